//! Request/response bodies of the HTTP service. Kept next to the domain
//! types so the service and the client share one definition.

use serde::{Deserialize, Serialize};

use crate::detector::{DetectionResult, DetectorConfig, StepRecord};
use crate::eval::{BenchReport, BenchVariant};
use crate::graph::Graph;
use crate::synth::ScenarioSpec;
use crate::{Frame, Result};

/// Graph as an explicit node count plus edge list.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GraphDto {
    pub n_nodes: usize,
    pub edges: Vec<(usize, usize, f64)>,
}

impl GraphDto {
    pub fn from_graph(g: &Graph) -> Self {
        GraphDto { n_nodes: g.n_nodes(), edges: g.edges().collect() }
    }

    pub fn to_graph(&self) -> Result<Graph> {
        Graph::from_edges(self.n_nodes, &self.edges)
    }
}

/// Batch detection: burn-in and stream in one request.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct DetectRequest {
    pub config: DetectorConfig,
    pub graph: GraphDto,
    pub frames: Vec<Frame>,
    #[serde(default)]
    pub continue_after_alarm: bool,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct DetectResponse {
    pub result: DetectionResult,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct CreateSessionRequest {
    pub config: DetectorConfig,
    pub graph: GraphDto,
    #[serde(default)]
    pub continue_after_alarm: bool,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct CreateSessionResponse {
    pub session_id: String,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct PushFramesRequest {
    pub frames: Vec<Frame>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct PushFramesResponse {
    /// Scored-step records produced by this batch, in order.
    pub records: Vec<StepRecord>,
    /// Frames actually consumed; less than the batch size only when the
    /// session stopped on an alarm mid-batch.
    pub consumed: usize,
    pub status: SessionStatus,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum SessionPhase {
    BurnIn,
    Online,
    Stopped,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SessionStatus {
    pub phase: SessionPhase,
    /// Frames consumed so far.
    pub t: usize,
    pub scored_steps: usize,
    pub alarms: Vec<usize>,
    pub dictionary_sizes: Vec<usize>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SynthRequest {
    pub spec: ScenarioSpec,
    pub seed: u64,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SynthResponse {
    pub graph: GraphDto,
    pub labels: Vec<usize>,
    pub dims: Vec<usize>,
    pub frames: Vec<Frame>,
    pub tau: Option<usize>,
    pub changed: Vec<usize>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct BenchRequest {
    pub spec: ScenarioSpec,
    pub config: DetectorConfig,
    pub variants: Vec<BenchVariant>,
    pub n_seeds: u64,
    #[serde(default = "default_delay_budget")]
    pub delay_budget: usize,
    #[serde(default)]
    pub tolerance_window: usize,
}

fn default_delay_budget() -> usize {
    150
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct BenchResponse {
    pub report: BenchReport,
}

/// Error body returned with every non-2xx status.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ErrorBody {
    pub error: String,
}
