use std::io::Write;

use serde::{Deserialize, Serialize};

use super::Objective;
use crate::Result;

/// One query. Initial samples have `t ≤ 0`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct BoRecord {
    pub t: i64,
    pub node: usize,
    /// Noisy observation.
    pub y: f64,
    /// Best true value among nodes queried so far.
    pub best: f64,
    pub regret: f64,
}

/// The query history of one run.
#[derive(Clone, Debug, PartialEq)]
pub struct BoTrace {
    optimum: f64,
    records: Vec<BoRecord>,
    observed: Vec<bool>,
}

impl BoTrace {
    pub fn new(num_nodes: usize, optimum: f64) -> Self {
        Self {
            optimum,
            records: Vec::new(),
            observed: vec![false; num_nodes],
        }
    }

    /// Query `node` at step `t` and return the observation.
    ///
    /// Panics if `node` was already queried.
    pub fn query(&mut self, objective: &Objective, t: i64, node: usize) -> f64 {
        assert!(!self.observed[node], "node {node} queried twice");
        self.observed[node] = true;
        let y = objective.observe(node);
        let best = self.best().max(objective.value(node));
        self.records.push(BoRecord {
            t,
            node,
            y,
            best,
            regret: self.optimum - best,
        });
        y
    }

    pub fn records(&self) -> &[BoRecord] {
        &self.records
    }

    pub fn len(&self) -> usize {
        self.records.len()
    }

    pub fn is_empty(&self) -> bool {
        self.records.is_empty()
    }

    pub fn is_observed(&self, node: usize) -> bool {
        self.observed[node]
    }

    pub fn observed_mask(&self) -> &[bool] {
        &self.observed
    }

    pub fn nodes(&self) -> Vec<usize> {
        self.records.iter().map(|r| r.node).collect()
    }

    pub fn observations(&self) -> Vec<f64> {
        self.records.iter().map(|r| r.y).collect()
    }

    pub fn best(&self) -> f64 {
        self.records.last().map_or(f64::NEG_INFINITY, |r| r.best)
    }

    /// Simple regret after the last query, or `+∞` before any.
    pub fn final_regret(&self) -> f64 {
        self.records.last().map_or(f64::INFINITY, |r| r.regret)
    }

    /// CSV with header `t,node,y,best,regret`.
    pub fn write_csv<W: Write>(&self, out: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(out);
        for r in &self.records {
            w.serialize(r)?;
        }
        w.flush()?;
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn csv_has_the_plot_header() {
        let obj = Objective::new(vec![1.0, 3.0, 2.0], 0.0, 0).unwrap();
        let mut tr = BoTrace::new(3, obj.max_value());
        tr.query(&obj, 0, 2);
        tr.query(&obj, 1, 1);
        let mut buf = Vec::new();
        tr.write_csv(&mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        assert_eq!(text, "t,node,y,best,regret\n0,2,2.0,2.0,1.0\n1,1,3.0,3.0,0.0\n");
    }

    #[test]
    #[should_panic]
    fn requery_panics() {
        let obj = Objective::new(vec![1.0, 3.0], 0.0, 0).unwrap();
        let mut tr = BoTrace::new(2, 3.0);
        tr.query(&obj, 0, 1);
        tr.query(&obj, 1, 1);
    }
}
