//! Dense GP with the exact diffusion kernel `σ_f² exp(−β L̃)`, the reference
//! the GRF models are compared against.

use std::f64::consts::PI;
use std::sync::Arc;

use nalgebra::{DMatrix, DVector, SymmetricEigen};

use super::train::{Adam, TrainStep};
use super::{Dataset, TrainSettings};
use crate::graph::{normalized_laplacian, Graph};
use crate::{Error, Result};

/// Eigendecomposition `L̃ = V Λ Vᵀ`, shared between models on one graph.
#[derive(Clone, Debug)]
pub struct LaplacianEigen {
    values: DVector<f64>,
    vectors: DMatrix<f64>,
}

impl LaplacianEigen {
    pub fn new(g: &Graph, cap: usize) -> Result<Self> {
        if g.num_nodes() > cap {
            return Err(Error::DenseCapExceeded {
                requested: g.num_nodes(),
                cap,
            });
        }
        let eig = SymmetricEigen::new(normalized_laplacian(g)?);
        Ok(Self {
            values: eig.eigenvalues,
            vectors: eig.eigenvectors,
        })
    }

    pub fn num_nodes(&self) -> usize {
        self.values.len()
    }

    fn rows(&self, nodes: &[usize]) -> DMatrix<f64> {
        self.vectors.select_rows(nodes.iter())
    }

    /// `V_a diag(s) V_bᵀ`.
    fn block(&self, a: &DMatrix<f64>, b: &DMatrix<f64>, spectrum: &DVector<f64>) -> DMatrix<f64> {
        let mut scaled = a.clone();
        for (j, s) in spectrum.iter().enumerate() {
            scaled.column_mut(j).scale_mut(*s);
        }
        scaled * b.transpose()
    }
}

#[derive(Clone, Debug)]
pub struct ExactDiffusionGp {
    eigen: Arc<LaplacianEigen>,
    pub beta: f64,
    pub sigma_f: f64,
    pub noise_var: f64,
}

struct Fit {
    h_inv: DMatrix<f64>,
    alpha: DVector<f64>,
    lml: f64,
}

impl ExactDiffusionGp {
    pub fn new(eigen: Arc<LaplacianEigen>, beta: f64, sigma_f: f64, noise_var: f64) -> Result<Self> {
        if !(beta > 0.0 && sigma_f > 0.0 && noise_var > 0.0) {
            return Err(Error::InvalidParameter("beta, sigma_f and noise_var must be positive".into()));
        }
        Ok(Self {
            eigen,
            beta,
            sigma_f,
            noise_var,
        })
    }

    fn spectrum(&self) -> DVector<f64> {
        let v = self.sigma_f * self.sigma_f;
        self.eigen.values.map(|l| v * (-self.beta * l).exp())
    }

    /// Dense kernel between two node lists.
    pub fn kernel(&self, a: &[usize], b: &[usize]) -> DMatrix<f64> {
        self.eigen
            .block(&self.eigen.rows(a), &self.eigen.rows(b), &self.spectrum())
    }

    fn fit(&self, data: &Dataset, vx: &DMatrix<f64>) -> Result<Fit> {
        let mut h = self.eigen.block(vx, vx, &self.spectrum());
        for i in 0..h.nrows() {
            h[(i, i)] += self.noise_var;
        }
        let chol = h
            .cholesky()
            .ok_or_else(|| Error::NotPositiveDefinite("exact diffusion system".into()))?;
        let y = DVector::from_column_slice(data.targets());
        let alpha = chol.solve(&y);
        let log_det = 2.0 * chol.l_dirty().diagonal().iter().map(|d| d.ln()).sum::<f64>();
        let lml = -0.5 * y.dot(&alpha) - 0.5 * log_det - 0.5 * data.len() as f64 * (2.0 * PI).ln();
        Ok(Fit {
            h_inv: chol.inverse(),
            alpha,
            lml,
        })
    }

    pub fn log_marginal_likelihood(&self, data: &Dataset) -> Result<f64> {
        Ok(self.fit(data, &self.eigen.rows(data.nodes()))?.lml)
    }

    /// `∂L/∂(ln β, ln σ_f, ln σ²)` and `L`.
    pub fn gradient(&self, data: &Dataset) -> Result<([f64; 3], f64)> {
        let vx = self.eigen.rows(data.nodes());
        let fit = self.fit(data, &vx)?;
        // ∂L/∂θ = ½ tr((ααᵀ − H⁻¹) ∂H)
        let m = &fit.alpha * fit.alpha.transpose() - &fit.h_inv;
        let spec = self.spectrum();
        let d_beta = self.eigen.block(
            &vx,
            &vx,
            &DVector::from_iterator(spec.len(), spec.iter().zip(self.eigen.values.iter()).map(|(s, l)| -self.beta * l * s)),
        );
        let kxx = self.eigen.block(&vx, &vx, &spec);
        let g_beta = 0.5 * m.component_mul(&d_beta).sum();
        let g_sigma = 0.5 * m.component_mul(&(kxx * 2.0)).sum();
        let g_noise = 0.5 * self.noise_var * m.trace();
        Ok(([g_beta, g_sigma, g_noise], fit.lml))
    }

    /// Adam ascent on `(ln β, ln σ_f, ln σ²)` with the exact gradient.
    pub fn train(&self, data: &Dataset, settings: &TrainSettings) -> Result<(Self, Vec<TrainStep>)> {
        settings.validate()?;
        let mut p = [self.beta.ln(), self.sigma_f.ln(), self.noise_var.max(settings.min_noise_var).ln()];
        let mut adam = Adam::from_settings(3, settings);
        let mut model = self.clone();
        let mut history = Vec::with_capacity(settings.iterations);
        for it in 0..settings.iterations {
            let (mut g, lml) = model.gradient(data)?;
            if !settings.learn_modulation {
                g[0] = 0.0;
                g[1] = 0.0;
            }
            if !settings.learn_noise {
                g[2] = 0.0;
            }
            if !lml.is_finite() || g.iter().any(|x| !x.is_finite()) {
                return Err(Error::Divergence { iteration: it });
            }
            history.push(TrainStep {
                iteration: it,
                data_fit: f64::NAN,
                log_marginal: Some(lml),
            });
            adam.ascend(&mut p, &g);
            p[2] = p[2].max(settings.min_noise_var.ln());
            model.beta = p[0].exp();
            model.sigma_f = p[1].exp();
            model.noise_var = p[2].exp();
        }
        Ok((model, history))
    }

    /// Posterior latent mean and variance at `query`.
    pub fn predict(&self, data: &Dataset, query: &[usize]) -> Result<(Vec<f64>, Vec<f64>)> {
        let vx = self.eigen.rows(data.nodes());
        let fit = self.fit(data, &vx)?;
        let vq = self.eigen.rows(query);
        let spec = self.spectrum();
        let kqx = self.eigen.block(&vq, &vx, &spec);
        let mean = &kqx * &fit.alpha;
        let reduce = &kqx * &fit.h_inv;
        let var = (0..query.len())
            .map(|a| {
                let prior: f64 = vq.row(a).iter().zip(spec.iter()).map(|(v, s)| v * v * s).sum();
                (prior - reduce.row(a).dot(&kqx.row(a))).max(0.0)
            })
            .collect();
        Ok((mean.data.into(), var))
    }
}
