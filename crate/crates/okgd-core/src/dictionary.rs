//! Per-node online dictionaries of kernel atoms, grown by the coherence
//! criterion: an observation is admitted only when its maximal kernel value
//! against the current atoms stays at or below the coherence threshold, so
//! atoms remain mutually dissimilar and the dictionary stays finite on
//! bounded domains.

use crate::kernel::KernelSpec;
use crate::{Error, Result};

#[derive(Debug, Clone, PartialEq)]
pub struct NodeDictionary {
    kernel: KernelSpec,
    atoms: Vec<Vec<f64>>,
    coherence_threshold: f64,
}

impl NodeDictionary {
    /// Initializes the dictionary with the node's first observation, which is
    /// always admitted.
    pub fn new(kernel: KernelSpec, coherence_threshold: f64, first_observation: Vec<f64>) -> Result<Self> {
        if !(coherence_threshold > 0.0 && coherence_threshold < 1.0) {
            return Err(Error::Config(format!(
                "coherence threshold must be in (0, 1), got {coherence_threshold}"
            )));
        }
        if first_observation.len() != kernel.input_dim {
            return Err(Error::dim(
                "dictionary first observation",
                kernel.input_dim,
                first_observation.len(),
            ));
        }
        Ok(NodeDictionary {
            kernel,
            atoms: vec![first_observation],
            coherence_threshold,
        })
    }

    /// Admits `obs` as a new atom iff `max_l k(obs, atom_l) <= mu0`.
    /// Returns whether the atom was added.
    pub fn maybe_add(&mut self, obs: &[f64]) -> Result<bool> {
        let coherence = self.coherence(obs)?;
        if coherence <= self.coherence_threshold {
            self.atoms.push(obs.to_vec());
            Ok(true)
        } else {
            Ok(false)
        }
    }

    /// Max kernel value between `obs` and the current atoms.
    pub fn coherence(&self, obs: &[f64]) -> Result<f64> {
        if obs.len() != self.kernel.input_dim {
            return Err(Error::dim("observation", self.kernel.input_dim, obs.len()));
        }
        Ok(self
            .atoms
            .iter()
            .map(|a| self.kernel.eval_unchecked(obs, a))
            .fold(f64::NEG_INFINITY, f64::max))
    }

    /// Kernel feature vector of `obs` against the atoms: entry `l` is
    /// `k(obs, atom_l)`. Length equals the current dictionary size.
    pub fn featurize(&self, obs: &[f64]) -> Result<Vec<f64>> {
        if obs.len() != self.kernel.input_dim {
            return Err(Error::dim("observation", self.kernel.input_dim, obs.len()));
        }
        Ok(self
            .atoms
            .iter()
            .map(|a| self.kernel.eval_unchecked(obs, a))
            .collect())
    }

    /// Current dictionary size `L_v`.
    pub fn len(&self) -> usize {
        self.atoms.len()
    }

    pub fn is_empty(&self) -> bool {
        false // at least the first observation is always present
    }

    pub fn kernel(&self) -> &KernelSpec {
        &self.kernel
    }

    pub fn atoms(&self) -> &[Vec<f64>] {
        &self.atoms
    }

    pub fn coherence_threshold(&self) -> f64 {
        self.coherence_threshold
    }
}
