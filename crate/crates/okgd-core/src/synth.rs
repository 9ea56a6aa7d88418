//! Synthetic change scenarios: an SBM graph whose clusters emit
//! heterogeneous streams (bivariate Gaussians next to scalar Poisson
//! counts), a change time, and the set of affected nodes.

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Poisson, StandardNormal};
use serde::{Deserialize, Serialize};

use crate::derive_seed;
use crate::graph::{sample_sbm, Graph, SbmParams};
use crate::{Error, Frame, Result};

/// The four cluster models. C1/C3 emit 2-dimensional reals, C2/C4 scalar
/// counts — the detector must run on the mixture without special-casing.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum ClusterModel {
    /// Bivariate Gaussian, mean 0, identity covariance.
    C1,
    /// Poisson with mean 5.
    C2,
    /// Bivariate Gaussian, mean 0, unit variances, covariance 0.75.
    C3,
    /// Poisson with mean 10.
    C4,
}

impl ClusterModel {
    pub fn of_cluster(cluster: usize) -> Self {
        [ClusterModel::C1, ClusterModel::C2, ClusterModel::C3, ClusterModel::C4][cluster % 4]
    }

    pub fn dim(self) -> usize {
        match self {
            ClusterModel::C1 | ClusterModel::C3 => 2,
            ClusterModel::C2 | ClusterModel::C4 => 1,
        }
    }

    /// The post-change model a node of this cluster switches to: C1 and C3
    /// swap (a correlation change), C2 raises its mean to C4's, C4 lowers
    /// its mean to C2's.
    pub fn change_target(self) -> Self {
        match self {
            ClusterModel::C1 => ClusterModel::C3,
            ClusterModel::C3 => ClusterModel::C1,
            ClusterModel::C2 => ClusterModel::C4,
            ClusterModel::C4 => ClusterModel::C2,
        }
    }

    pub fn sample<R: Rng>(self, rng: &mut R) -> Vec<f64> {
        match self {
            ClusterModel::C1 => {
                let z1: f64 = StandardNormal.sample(rng);
                let z2: f64 = StandardNormal.sample(rng);
                vec![z1, z2]
            }
            ClusterModel::C3 => {
                let rho = 0.75;
                let z1: f64 = StandardNormal.sample(rng);
                let z2: f64 = StandardNormal.sample(rng);
                vec![z1, rho * z1 + (1.0 - rho * rho).sqrt() * z2]
            }
            ClusterModel::C2 => vec![Poisson::new(5.0).unwrap().sample(rng)],
            ClusterModel::C4 => vec![Poisson::new(10.0).unwrap().sample(rng)],
        }
    }
}

/// A fully materialized scenario: graph, per-node pre/post models, the change
/// time, and the affected set. Nodes outside the affected set keep the same
/// model before and after.
#[derive(Debug, Clone, PartialEq)]
pub struct Scenario {
    pub graph: Graph,
    pub labels: Vec<usize>,
    pub pre_models: Vec<ClusterModel>,
    pub post_models: Vec<ClusterModel>,
    /// Change time; frames at `t >= tau` come from the post models. `None`
    /// means no change (null scenario).
    pub tau: Option<usize>,
    /// Affected nodes, ascending.
    pub changed: Vec<usize>,
    pub horizon: usize,
}

impl Scenario {
    pub fn n_nodes(&self) -> usize {
        self.graph.n_nodes()
    }

    pub fn node_dims(&self) -> Vec<usize> {
        self.pre_models.iter().map(|m| m.dim()).collect()
    }

    /// Emits the full frame sequence: frame `t` (1-based) is drawn from the
    /// pre models when `t < tau`, from the post models when `t >= tau`;
    /// frames are independent across time. Byte-identical given the seed.
    pub fn emit_frames(&self, seed: u64) -> Vec<Frame> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        (1..=self.horizon)
            .map(|t| {
                let post = self.tau.is_some_and(|tau| t >= tau);
                (0..self.n_nodes())
                    .map(|v| {
                        let m = if post { self.post_models[v] } else { self.pre_models[v] };
                        m.sample(&mut rng)
                    })
                    .collect()
            })
            .collect()
    }
}

/// Which scenario to build.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ScenarioKind {
    /// Every node switches to its cluster's target model at `tau`.
    ClusterSwap,
    /// A single cluster's nodes switch; the rest keep their model.
    OneCluster,
    /// `n_changed` nodes picked uniformly at random switch.
    RandomLocations,
    /// No change at all.
    Null,
}

impl std::fmt::Display for ScenarioKind {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let s = match self {
            ScenarioKind::ClusterSwap => "cluster-swap",
            ScenarioKind::OneCluster => "one-cluster",
            ScenarioKind::RandomLocations => "random-locations",
            ScenarioKind::Null => "null",
        };
        f.write_str(s)
    }
}

impl std::str::FromStr for ScenarioKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "cluster-swap" => Ok(ScenarioKind::ClusterSwap),
            "one-cluster" => Ok(ScenarioKind::OneCluster),
            "random-locations" => Ok(ScenarioKind::RandomLocations),
            "null" => Ok(ScenarioKind::Null),
            other => Err(Error::Config(format!(
                "unknown scenario {other:?} (expected cluster-swap, one-cluster, random-locations, or null)"
            ))),
        }
    }
}

/// Declarative scenario description; replayable given a seed.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScenarioSpec {
    pub kind: ScenarioKind,
    #[serde(default = "defaults::clusters")]
    pub clusters: usize,
    #[serde(default = "defaults::cluster_size")]
    pub cluster_size: usize,
    #[serde(default = "defaults::p_intra")]
    pub p_intra: f64,
    #[serde(default = "defaults::p_inter")]
    pub p_inter: f64,
    #[serde(default = "defaults::tau")]
    pub tau: usize,
    #[serde(default = "defaults::horizon")]
    pub horizon: usize,
    /// Number of changed nodes for `random-locations`.
    #[serde(default = "defaults::n_changed")]
    pub n_changed: usize,
    /// Changed cluster for `one-cluster`; `None` picks one at random.
    #[serde(default)]
    pub changed_cluster: Option<usize>,
}

mod defaults {
    pub fn clusters() -> usize {
        4
    }
    pub fn cluster_size() -> usize {
        20
    }
    pub fn p_intra() -> f64 {
        0.5
    }
    pub fn p_inter() -> f64 {
        0.01
    }
    pub fn tau() -> usize {
        500
    }
    pub fn horizon() -> usize {
        1500
    }
    pub fn n_changed() -> usize {
        10
    }
}

impl Default for ScenarioSpec {
    fn default() -> Self {
        ScenarioSpec {
            kind: ScenarioKind::ClusterSwap,
            clusters: defaults::clusters(),
            cluster_size: defaults::cluster_size(),
            p_intra: defaults::p_intra(),
            p_inter: defaults::p_inter(),
            tau: defaults::tau(),
            horizon: defaults::horizon(),
            n_changed: defaults::n_changed(),
            changed_cluster: None,
        }
    }
}

impl ScenarioSpec {
    pub fn build(&self, seed: u64) -> Result<Scenario> {
        match self.kind {
            ScenarioKind::ClusterSwap => make_cluster_swap_scenario(self, seed),
            ScenarioKind::OneCluster => {
                make_one_cluster_scenario(self, self.changed_cluster, seed)
            }
            ScenarioKind::RandomLocations => {
                make_random_location_scenario(self, self.n_changed, seed)
            }
            ScenarioKind::Null => make_null_scenario(self, seed),
        }
    }

    fn sbm(&self) -> SbmParams {
        SbmParams {
            n_clusters: self.clusters,
            cluster_size: self.cluster_size,
            p_intra: self.p_intra,
            p_inter: self.p_inter,
        }
    }

    fn validate_tau(&self) -> Result<()> {
        if self.tau == 0 {
            return Err(Error::Config("tau must be >= 1".into()));
        }
        Ok(())
    }
}

fn base(spec: &ScenarioSpec, seed: u64) -> Result<(Graph, Vec<usize>, Vec<ClusterModel>)> {
    let (graph, labels) = sample_sbm(&spec.sbm(), seed)?;
    let pre: Vec<ClusterModel> = labels.iter().map(|&c| ClusterModel::of_cluster(c)).collect();
    Ok((graph, labels, pre))
}

/// All nodes change at `tau`: C1 and C3 clusters swap models, C2 goes to
/// Poisson(10), C4 to Poisson(5).
pub fn make_cluster_swap_scenario(spec: &ScenarioSpec, seed: u64) -> Result<Scenario> {
    spec.validate_tau()?;
    let (graph, labels, pre) = base(spec, seed)?;
    let post: Vec<ClusterModel> = pre.iter().map(|m| m.change_target()).collect();
    let changed = (0..graph.n_nodes()).collect();
    Ok(Scenario {
        graph,
        labels,
        pre_models: pre,
        post_models: post,
        tau: Some(spec.tau),
        changed,
        horizon: spec.horizon,
    })
}

/// One cluster's nodes change to their target model; everything else stays.
/// `cluster = None` picks the cluster uniformly at random (seeded).
pub fn make_one_cluster_scenario(
    spec: &ScenarioSpec,
    cluster: Option<usize>,
    seed: u64,
) -> Result<Scenario> {
    spec.validate_tau()?;
    let (graph, labels, pre) = base(spec, seed)?;
    let chosen = match cluster {
        Some(c) if c < spec.clusters => c,
        Some(c) => {
            return Err(Error::Config(format!(
                "changed_cluster {c} out of range (have {} clusters)",
                spec.clusters
            )))
        }
        None => {
            let mut rng = ChaCha8Rng::seed_from_u64(derive_seed(seed, 0x0c));
            rng.random_range(0..spec.clusters)
        }
    };
    let post: Vec<ClusterModel> = pre
        .iter()
        .zip(&labels)
        .map(|(m, &c)| if c == chosen { m.change_target() } else { *m })
        .collect();
    let changed = (0..graph.n_nodes()).filter(|&v| labels[v] == chosen).collect();
    Ok(Scenario {
        graph,
        labels,
        pre_models: pre,
        post_models: post,
        tau: Some(spec.tau),
        changed,
        horizon: spec.horizon,
    })
}

/// `n_changed` nodes picked uniformly at random change to their cluster's
/// target model.
pub fn make_random_location_scenario(
    spec: &ScenarioSpec,
    n_changed: usize,
    seed: u64,
) -> Result<Scenario> {
    spec.validate_tau()?;
    let (graph, labels, pre) = base(spec, seed)?;
    let n = graph.n_nodes();
    if n_changed > n {
        return Err(Error::Config(format!(
            "n_changed = {n_changed} exceeds node count {n}"
        )));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(derive_seed(seed, 0x0d));
    let mut changed: Vec<usize> = rand::seq::index::sample(&mut rng, n, n_changed).into_vec();
    changed.sort_unstable();
    let post: Vec<ClusterModel> = pre
        .iter()
        .enumerate()
        .map(|(v, m)| if changed.binary_search(&v).is_ok() { m.change_target() } else { *m })
        .collect();
    Ok(Scenario {
        graph,
        labels,
        pre_models: pre,
        post_models: post,
        tau: if n_changed == 0 { None } else { Some(spec.tau) },
        changed,
        horizon: spec.horizon,
    })
}

/// No change: every node keeps its cluster model for the whole horizon.
pub fn make_null_scenario(spec: &ScenarioSpec, seed: u64) -> Result<Scenario> {
    let (graph, labels, pre) = base(spec, seed)?;
    Ok(Scenario {
        graph,
        labels,
        pre_models: pre.clone(),
        post_models: pre,
        tau: None,
        changed: Vec::new(),
        horizon: spec.horizon,
    })
}
