//! Declarative run configuration: detector settings plus where the graph
//! and the stream come from. Serialized as TOML by the CLI; the same types
//! travel as JSON through the service.

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::detector::DetectorConfig;
use crate::graph::{knn_graph, sample_sbm, Graph, SbmParams};
use crate::io;
use crate::synth::{Scenario, ScenarioSpec};
use crate::{derive_seed, Error, Frame, Result};

/// Where the graph comes from.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum GraphSource {
    /// Edge-list file (`u v w` lines, `# nodes: N` hint honored).
    EdgeList { path: PathBuf },
    /// Stochastic block model sampled at load time; `seed` defaults to the
    /// run seed.
    Sbm {
        clusters: usize,
        cluster_size: usize,
        p_intra: f64,
        p_inter: f64,
        seed: Option<u64>,
    },
    /// Unit-weight k-NN graph built from a coordinates file.
    Knn { points: PathBuf, k: usize },
}

/// Where the stream comes from.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum StreamSource {
    /// Stream CSV (`t,v0_d0,...` header). `ar1 = true` applies the AR(1)
    /// residual filter at ingestion, with the coefficient fit on the burn-in
    /// segment.
    Csv {
        path: PathBuf,
        #[serde(default)]
        ar1: bool,
    },
    /// Synthetic scenario generated at load time; the scenario also supplies
    /// the graph and the ground truth. `seed` defaults to the run seed.
    Synthetic {
        #[serde(flatten)]
        spec: ScenarioSpec,
        seed: Option<u64>,
    },
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct OutputConfig {
    /// Score-trace CSV path.
    pub trace: Option<PathBuf>,
    /// Run summary JSON path.
    pub summary: Option<PathBuf>,
}

/// Everything a `detect` run needs.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct RunConfig {
    pub detector: DetectorConfig,
    pub graph: Option<GraphSource>,
    pub stream: Option<StreamSource>,
    /// Optional expected per-node input dimensions; validated against the
    /// stream schema when present.
    pub dims: Option<Vec<usize>>,
    pub output: OutputConfig,
}

/// A fully loaded run: graph, frames, and (for synthetic streams) the ground
/// truth.
#[derive(Debug, Clone)]
pub struct LoadedRun {
    pub graph: Graph,
    pub frames: Vec<Frame>,
    pub dims: Vec<usize>,
    pub truth: Option<Scenario>,
}

impl RunConfig {
    /// Resolves graph and stream sources into frames ready for the detector,
    /// enforcing node-count and dimension consistency. Relative paths are
    /// resolved against `base_dir`.
    pub fn load(&self, base_dir: &Path) -> Result<LoadedRun> {
        let stream = self
            .stream
            .as_ref()
            .ok_or_else(|| Error::Config("no stream source configured".into()))?;

        let (graph, frames, dims, truth) = match stream {
            StreamSource::Synthetic { spec, seed } => {
                if self.graph.is_some() {
                    return Err(Error::Config(
                        "a synthetic stream carries its own graph; remove the [graph] section"
                            .into(),
                    ));
                }
                let seed = seed.unwrap_or(self.detector.seed);
                let scenario = spec.build(seed)?;
                let frames = scenario.emit_frames(derive_seed(seed, 1));
                let dims = scenario.node_dims();
                (scenario.graph.clone(), frames, dims, Some(scenario))
            }
            StreamSource::Csv { path, ar1 } => {
                let (mut frames, dims) = io::read_stream_csv(&resolve(base_dir, path))?;
                if *ar1 {
                    frames = io::ar1_filter(&frames, self.detector.bp)?;
                }
                let graph_src = self
                    .graph
                    .as_ref()
                    .ok_or_else(|| Error::Config("no graph source configured".into()))?;
                let graph = load_graph(graph_src, base_dir, self.detector.seed)?;
                (graph, frames, dims, None)
            }
        };

        if graph.n_nodes() != dims.len() {
            return Err(Error::Data(format!(
                "graph has {} nodes but the stream covers {}",
                graph.n_nodes(),
                dims.len()
            )));
        }
        if let Some(expected) = &self.dims {
            if expected != &dims {
                return Err(Error::Data(format!(
                    "configured dims {expected:?} do not match the stream schema {dims:?}"
                )));
            }
        }
        Ok(LoadedRun { graph, frames, dims, truth })
    }
}

fn resolve(base: &Path, p: &Path) -> PathBuf {
    if p.is_absolute() {
        p.to_path_buf()
    } else {
        base.join(p)
    }
}

fn load_graph(src: &GraphSource, base_dir: &Path, run_seed: u64) -> Result<Graph> {
    match src {
        GraphSource::EdgeList { path } => io::read_edge_list(&resolve(base_dir, path)),
        GraphSource::Sbm { clusters, cluster_size, p_intra, p_inter, seed } => {
            let params = SbmParams {
                n_clusters: *clusters,
                cluster_size: *cluster_size,
                p_intra: *p_intra,
                p_inter: *p_inter,
            };
            Ok(sample_sbm(&params, seed.unwrap_or(run_seed))?.0)
        }
        GraphSource::Knn { points, k } => {
            let pts = io::parse_points(&io::read_to_string(&resolve(base_dir, points))?)?;
            knn_graph(&pts, *k)
        }
    }
}
