//! Per-node positive-definite kernels and bandwidth selection.
//!
//! Both supported families are bounded by 1, which is the uniform bound the
//! learning-rate cap relies on.

use serde::{Deserialize, Serialize};

use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum KernelFamily {
    #[default]
    Gaussian,
    Laplacian,
}

/// A kernel attached to one node's observation space. Nodes own their own
/// spec: families, bandwidths, and input dimensions may differ across nodes.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct KernelSpec {
    pub family: KernelFamily,
    pub bandwidth: f64,
    pub input_dim: usize,
}

impl KernelSpec {
    pub fn new(family: KernelFamily, bandwidth: f64, input_dim: usize) -> Result<Self> {
        if !bandwidth.is_finite() || bandwidth <= 0.0 {
            return Err(Error::Config(format!(
                "kernel bandwidth must be positive, got {bandwidth}"
            )));
        }
        if input_dim == 0 {
            return Err(Error::Config("kernel input_dim must be positive".into()));
        }
        Ok(KernelSpec {
            family,
            bandwidth,
            input_dim,
        })
    }

    /// Kernel value in (0, 1]. Gaussian: `exp(-||x-y||^2 / (2 bw^2))`;
    /// Laplacian: `exp(-||x-y||_1 / bw)`.
    pub fn eval(&self, x: &[f64], y: &[f64]) -> Result<f64> {
        if x.len() != self.input_dim {
            return Err(Error::dim("kernel input x", self.input_dim, x.len()));
        }
        if y.len() != self.input_dim {
            return Err(Error::dim("kernel input y", self.input_dim, y.len()));
        }
        Ok(self.eval_unchecked(x, y))
    }

    pub(crate) fn eval_unchecked(&self, x: &[f64], y: &[f64]) -> f64 {
        match self.family {
            KernelFamily::Gaussian => {
                let d2: f64 = x.iter().zip(y).map(|(a, b)| (a - b) * (a - b)).sum();
                (-d2 / (2.0 * self.bandwidth * self.bandwidth)).exp()
            }
            KernelFamily::Laplacian => {
                let d1: f64 = x.iter().zip(y).map(|(a, b)| (a - b).abs()).sum();
                (-d1 / self.bandwidth).exp()
            }
        }
    }

    /// Uniform upper bound `M_v` on kernel values; 1 for both families.
    pub fn bound(&self) -> f64 {
        1.0
    }
}

/// Median of all pairwise Euclidean distances over unordered sample pairs
/// (the mean of the two middle values for even pair counts). Errors when
/// there are fewer than two samples or the median is zero, since the result
/// is used as a kernel bandwidth.
pub fn median_heuristic(samples: &[Vec<f64>]) -> Result<f64> {
    if samples.len() < 2 {
        return Err(Error::Data(
            "median heuristic requires at least 2 samples".into(),
        ));
    }
    let dim = samples[0].len();
    for (i, s) in samples.iter().enumerate() {
        if s.len() != dim {
            return Err(Error::dim(format!("sample {i}"), dim, s.len()));
        }
    }
    let mut dists = Vec::with_capacity(samples.len() * (samples.len() - 1) / 2);
    for i in 0..samples.len() {
        for j in (i + 1)..samples.len() {
            let d2: f64 = samples[i]
                .iter()
                .zip(&samples[j])
                .map(|(a, b)| (a - b) * (a - b))
                .sum();
            dists.push(d2.sqrt());
        }
    }
    dists.sort_by(f64::total_cmp);
    let m = dists.len();
    let median = if m % 2 == 1 {
        dists[m / 2]
    } else {
        0.5 * (dists[m / 2 - 1] + dists[m / 2])
    };
    if median <= 0.0 {
        return Err(Error::DegenerateSamples);
    }
    Ok(median)
}
