//! Posterior moments and samples given observations.

use nalgebra::DMatrix;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use super::model::SystemSolver;
use super::{Dataset, GpModel};
use crate::grf::sparse::sparse_dot;
use crate::seed::stream_seed;
use crate::{Error, Result};

/// Prior draws `mean + Φw`, `w ~ N(0, I)`, over all nodes.
pub fn sample_prior(model: &GpModel, num_samples: usize, seed: u64) -> Result<Vec<Vec<f64>>> {
    (0..num_samples)
        .map(|s| {
            let mut rng = ChaCha8Rng::seed_from_u64(stream_seed(seed, s as u64, 0));
            prior_draw(model, &mut rng)
        })
        .collect()
}

fn prior_draw(model: &GpModel, rng: &mut ChaCha8Rng) -> Result<Vec<f64>> {
    let w: Vec<f64> = (0..model.features().num_nodes()).map(|_| rng.sample(StandardNormal)).collect();
    let mut g = model.features().phi_mul(&w)?;
    g.iter_mut().for_each(|v| *v += model.mean());
    Ok(g)
}

/// A model conditioned on a dataset, with `α = H⁻¹(y − m)` precomputed.
pub struct Posterior<'a> {
    model: &'a GpModel,
    data: &'a Dataset,
    system: SystemSolver,
    alpha: Vec<f64>,
    converged: bool,
}

impl GpModel {
    pub fn condition<'a>(&'a self, data: &'a Dataset) -> Result<Posterior<'a>> {
        if data.nodes().iter().any(|&i| i >= self.num_nodes()) {
            return Err(Error::InvalidParameter("observation outside the graph".into()));
        }
        let system = SystemSolver::new(
            self.features().restrict(data.nodes()),
            self.noise_var(),
            self.solver(),
            *self.cg(),
        )?;
        let r: Vec<f64> = data.targets().iter().map(|y| y - self.mean()).collect();
        let (alpha, converged) = system.solve(&r)?;
        Ok(Posterior {
            model: self,
            data,
            system,
            alpha,
            converged,
        })
    }
}

impl Posterior<'_> {
    /// Whether every solve so far met the CG tolerance.
    pub fn converged(&self) -> bool {
        self.converged
    }

    fn check_query(&self, query: &[usize]) -> Result<()> {
        match query.iter().find(|&&q| q >= self.model.num_nodes()) {
            Some(q) => Err(Error::InvalidParameter(format!("query node {q} out of range"))),
            None => Ok(()),
        }
    }

    /// `m + K̂_qx α`.
    pub fn mean(&self, query: &[usize]) -> Result<Vec<f64>> {
        self.check_query(query)?;
        let u = self.system.features().phi_t_mul(&self.alpha)?;
        let phi = self.model.features().phi();
        Ok(query
            .iter()
            .map(|&q| {
                let (c, v) = phi.row(q);
                self.model.mean() + c.iter().zip(v).map(|(&k, &x)| x * u[k as usize]).sum::<f64>()
            })
            .collect())
    }

    /// Posterior mean at every node.
    pub fn mean_all(&self) -> Result<Vec<f64>> {
        let u = self.system.features().phi_t_mul(&self.alpha)?;
        let mut m = self.model.features().phi_mul(&u)?;
        m.iter_mut().for_each(|v| *v += self.model.mean());
        Ok(m)
    }

    /// `K̂_xq` as a length-T vector.
    fn cross_column(&self, q: usize) -> Vec<f64> {
        let phi = self.model.features().phi();
        let target = phi.row(q);
        self.data.nodes().iter().map(|&x| sparse_dot(phi.row(x), target)).collect()
    }

    /// Latent marginal variances `K̂_qq − K̂_qx H⁻¹ K̂_xq`, one solve per query,
    /// clipped at zero.
    pub fn variances(&mut self, query: &[usize]) -> Result<Vec<f64>> {
        self.check_query(query)?;
        let cols: Vec<Vec<f64>> = query.iter().map(|&q| self.cross_column(q)).collect();
        let (sols, ok) = self.system.solve_many(&cols)?;
        self.converged &= ok;
        Ok(query
            .iter()
            .zip(cols.iter().zip(&sols))
            .map(|(&q, (k, s))| {
                let prior = self.model.features().kernel_entry(q, q);
                (prior - k.iter().zip(s).map(|(a, b)| a * b).sum::<f64>()).max(0.0)
            })
            .collect())
    }

    /// Full latent covariance over `query`.
    pub fn covariance(&mut self, query: &[usize], cap: usize) -> Result<DMatrix<f64>> {
        self.check_query(query)?;
        if query.len() > cap {
            return Err(Error::DenseCapExceeded {
                requested: query.len(),
                cap,
            });
        }
        let cols: Vec<Vec<f64>> = query.iter().map(|&q| self.cross_column(q)).collect();
        let (sols, ok) = self.system.solve_many(&cols)?;
        self.converged &= ok;
        let features = self.model.features();
        let n = query.len();
        let mut cov = DMatrix::from_fn(n, n, |a, b| {
            let reduction: f64 = cols[a].iter().zip(&sols[b]).map(|(x, y)| x * y).sum();
            features.kernel_entry(query[a], query[b]) - reduction
        });
        cov = (&cov + cov.transpose()) * 0.5;
        Ok(cov)
    }

    /// One pathwise-conditioned posterior sample over all nodes:
    /// `g + K̂_(·)x H⁻¹ (y − g_x − ε)` with `g` a prior draw and fresh
    /// `ε ~ N(0, σ² I)`.
    pub fn sample(&mut self, seed: u64) -> Result<Vec<f64>> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut g = prior_draw(self.model, &mut rng)?;
        let sd = self.model.noise_var().sqrt();
        let rhs: Vec<f64> = self
            .data
            .nodes()
            .iter()
            .zip(self.data.targets())
            .map(|(&x, &y)| {
                let eps: f64 = rng.sample(StandardNormal);
                y - (g[x] + sd * eps)
            })
            .collect();
        let (v, ok) = self.system.solve(&rhs)?;
        self.converged &= ok;
        let correction = self.model.features().phi_mul(&self.system.features().phi_t_mul(&v)?)?;
        g.iter_mut().zip(&correction).for_each(|(a, b)| *a += b);
        Ok(g)
    }

    /// `count` samples with streams derived from `seed`.
    pub fn samples(&mut self, count: usize, seed: u64) -> Result<Vec<Vec<f64>>> {
        (0..count).map(|s| self.sample(stream_seed(seed, s as u64, 1))).collect()
    }
}
