//! The online detection loop: burn-in (bandwidths, dictionary seeding, the
//! pre-change pool), window management, per-step dictionary and parameter
//! updates, adaptive thresholding, and change declaration.
//!
//! Frame timeline (`t` counts frames from 1):
//! - `1..=bp`: burn-in. Bandwidths come from the median heuristic per node,
//!   dictionaries are grown over the burn-in observations, and all burn-in
//!   frames seed the pre-change pool.
//! - `bp+1..bp+n_post-1`: the post window fills; dictionaries keep growing.
//! - `t >= bp + n_post`: scored steps. Each step resamples the reference
//!   window from the pool, slides the post window, updates dictionaries and
//!   parameters (one BSGD sweep), scores, and compares against the adaptive
//!   threshold. The frame sliding out of the post window joins the pool only
//!   when no alarm fired, so post-change frames never contaminate it.

use std::collections::VecDeque;

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::dictionary::NodeDictionary;
use crate::estimator::{bsgd_step, compute_stats, score, step_constant, ParameterVector};
use crate::graph::Graph;
use crate::kernel::{median_heuristic, KernelFamily, KernelSpec};
use crate::{Error, Frame, Result};

/// Graph-penalty weight: a fixed value, or the default `10 / d̄` resolved
/// against the graph's mean degree at construction (an edgeless graph
/// resolves to 0 — there is nothing to smooth over).
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub enum LambdaSpec {
    #[default]
    Auto,
    Fixed(f64),
}

impl LambdaSpec {
    pub fn resolve(&self, graph: &Graph) -> Result<f64> {
        match *self {
            LambdaSpec::Fixed(l) => {
                if !l.is_finite() || l < 0.0 {
                    return Err(Error::Config(format!("lambda must be >= 0, got {l}")));
                }
                Ok(l)
            }
            LambdaSpec::Auto => {
                let d = graph.mean_degree();
                Ok(if d > 0.0 { 10.0 / d } else { 0.0 })
            }
        }
    }
}

impl Serialize for LambdaSpec {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        match *self {
            LambdaSpec::Auto => s.serialize_str("auto"),
            LambdaSpec::Fixed(v) => s.serialize_f64(v),
        }
    }
}

impl<'de> Deserialize<'de> for LambdaSpec {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        #[derive(Deserialize)]
        #[serde(untagged)]
        enum Raw {
            Num(f64),
            Str(String),
        }
        match Raw::deserialize(d)? {
            Raw::Num(v) => Ok(LambdaSpec::Fixed(v)),
            Raw::Str(s) if s == "auto" => Ok(LambdaSpec::Auto),
            Raw::Str(s) => Err(serde::de::Error::custom(format!(
                "lambda must be a number or \"auto\", got {s:?}"
            ))),
        }
    }
}

/// All inputs of the online loop. Defaults are the synthetic-study settings.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct DetectorConfig {
    /// Graph penalty weight.
    pub lambda: LambdaSpec,
    /// Ridge weight; keeps the quadratic strictly convex.
    pub gamma: f64,
    /// Coherence threshold for dictionary growth, in (0, 1).
    pub mu0: f64,
    /// Burn-in length in frames.
    pub bp: usize,
    /// Reference (pre-change) window size.
    pub n_pre: usize,
    /// Sliding (post) window size.
    pub n_post: usize,
    /// Learning-rate constant in `min(c/s, 1/C_v)`.
    pub c: f64,
    /// Threshold multiplier: `eps_t = kappa * mean_j ||g_j||`.
    pub kappa: f64,
    /// Scored steps during which no alarm may fire; `None` means
    /// `3 * n_post` (the running mean needs a few window lengths before its
    /// scale stabilizes; with a shorter warmup the startup transient alone
    /// crosses `kappa = 1.5` on a large fraction of change-free streams).
    pub threshold_warmup: Option<usize>,
    /// Resample the reference window with replacement (the default; every
    /// step sees an independent draw, which is what the convergence analysis
    /// assumes) or as a subset without replacement.
    pub resample_with_replacement: bool,
    /// Kernel family shared by all nodes (bandwidths stay per-node).
    pub kernel: KernelFamily,
    /// Fixed bandwidth for every node; `None` selects per-node bandwidths by
    /// the median heuristic over each node's burn-in observations.
    pub bandwidth: Option<f64>,
    /// Seed for the reference-window resampler (the only RNG in the loop).
    pub seed: u64,
}

impl Default for DetectorConfig {
    fn default() -> Self {
        DetectorConfig {
            lambda: LambdaSpec::Auto,
            gamma: 10.0,
            mu0: 0.5,
            bp: 100,
            n_pre: 100,
            n_post: 100,
            c: 1.0,
            kappa: 1.5,
            threshold_warmup: None,
            resample_with_replacement: true,
            kernel: KernelFamily::Gaussian,
            bandwidth: None,
            seed: 0,
        }
    }
}

impl DetectorConfig {
    pub fn validate(&self) -> Result<()> {
        if self.n_pre == 0 || self.n_post == 0 {
            return Err(Error::Config("n_pre and n_post must be >= 1".into()));
        }
        if self.bp < self.n_pre {
            return Err(Error::Config(format!(
                "bp ({}) must be >= n_pre ({})",
                self.bp, self.n_pre
            )));
        }
        if !(self.gamma.is_finite() && self.gamma > 0.0) {
            return Err(Error::Config(format!("gamma must be > 0, got {}", self.gamma)));
        }
        if !(self.mu0 > 0.0 && self.mu0 < 1.0) {
            return Err(Error::Config(format!("mu0 must be in (0, 1), got {}", self.mu0)));
        }
        if !(self.c.is_finite() && self.c > 0.0) {
            return Err(Error::Config(format!("c must be > 0, got {}", self.c)));
        }
        if !(self.kappa.is_finite() && self.kappa > 0.0) {
            return Err(Error::Config(format!("kappa must be > 0, got {}", self.kappa)));
        }
        if let Some(bw) = self.bandwidth {
            if !(bw.is_finite() && bw > 0.0) {
                return Err(Error::Config(format!("bandwidth must be > 0, got {bw}")));
            }
        }
        if let LambdaSpec::Fixed(l) = self.lambda {
            if !l.is_finite() || l < 0.0 {
                return Err(Error::Config(format!("lambda must be >= 0, got {l}")));
            }
        }
        Ok(())
    }

    pub fn warmup(&self) -> usize {
        self.threshold_warmup.unwrap_or(3 * self.n_post)
    }
}

/// One scored step of the detector.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StepRecord {
    /// Frame index (1-based).
    pub t: usize,
    /// `||g_t||`.
    pub norm: f64,
    /// Adaptive threshold at this step.
    pub eps: f64,
    /// Whether the alarm fired here.
    pub alarm: bool,
    /// Per-node scores `g_{v,t}`.
    pub per_node: Vec<f64>,
}

/// What [`Detector::feed`] did with a frame.
#[derive(Debug, Clone, PartialEq)]
pub enum StepOutcome {
    /// Frame buffered during burn-in.
    BurnIn,
    /// Frame pushed into the post window before it was full; not scored.
    Filling,
    /// A scored step.
    Scored(StepRecord),
    /// The detector already alarmed and is not in continue mode; the frame
    /// was ignored.
    Stopped,
}

/// Output of a full run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DetectionResult {
    pub detected: bool,
    /// First alarm time (frame index); present iff `detected`.
    pub tau_hat: Option<usize>,
    /// Every alarm raised (more than one only in continue mode).
    pub alarms: Vec<usize>,
    /// One record per scored step.
    pub records: Vec<StepRecord>,
    /// Final per-node dictionary sizes.
    pub dictionary_sizes: Vec<usize>,
    pub frames_consumed: usize,
}

/// Builds per-node dictionaries and the initial pre-change pool from the
/// burn-in frames. Per node: bandwidth from the median heuristic over that
/// node's burn-in observations (unless fixed), then the first observation is
/// admitted and the rest pass the coherence gate in order.
pub fn burn_in(
    frames: &[Frame],
    family: KernelFamily,
    bandwidth: Option<f64>,
    mu0: f64,
) -> Result<(Vec<NodeDictionary>, Vec<Frame>)> {
    if frames.is_empty() {
        return Err(Error::Data("burn-in needs at least one frame".into()));
    }
    let n = frames[0].len();
    if n == 0 {
        return Err(Error::Data("frames must cover at least one node".into()));
    }
    let dims: Vec<usize> = frames[0].iter().map(|o| o.len()).collect();
    for (t, f) in frames.iter().enumerate() {
        if f.len() != n {
            return Err(Error::Data(format!(
                "burn-in frame {} has {} node entries, expected {n}",
                t + 1,
                f.len()
            )));
        }
        for v in 0..n {
            if f[v].len() != dims[v] {
                return Err(Error::dim(
                    format!("burn-in frame {} node {v}", t + 1),
                    dims[v],
                    f[v].len(),
                ));
            }
        }
    }

    let mut dicts = Vec::with_capacity(n);
    for v in 0..n {
        let bw = match bandwidth {
            Some(b) => b,
            None => {
                let obs: Vec<Vec<f64>> = frames.iter().map(|f| f[v].clone()).collect();
                median_heuristic(&obs).map_err(|e| match e {
                    Error::DegenerateSamples => Error::DegenerateStream { node: v },
                    Error::Data(_) => Error::Data(format!(
                        "node {v}: burn-in too short for the median heuristic"
                    )),
                    other => other,
                })?
            }
        };
        let spec = KernelSpec::new(family, bw, dims[v])?;
        let mut dict = NodeDictionary::new(spec, mu0, frames[0][v].clone())?;
        for f in &frames[1..] {
            dict.maybe_add(&f[v])?;
        }
        dicts.push(dict);
    }
    Ok((dicts, frames.to_vec()))
}

enum Phase {
    BurnIn { buffered: Vec<Frame> },
    Online,
}

/// Single-stream online detector. Feed frames in order; state is not shared
/// across concurrent runs.
pub struct Detector {
    cfg: DetectorConfig,
    lambda: f64,
    warmup: usize,
    graph: Graph,
    dims: Vec<usize>,
    phase: Phase,
    dicts: Vec<NodeDictionary>,
    theta: ParameterVector,
    /// Validated frames with their frame indices; the reference window is
    /// resampled from here.
    pool: Vec<(usize, Frame)>,
    post: VecDeque<(usize, Frame)>,
    rng: ChaCha8Rng,
    t: usize,
    scored: usize,
    score_norm_sum: f64,
    alarms: Vec<usize>,
    continue_after_alarm: bool,
    stopped: bool,
}

impl Detector {
    pub fn new(cfg: DetectorConfig, graph: Graph) -> Result<Self> {
        Self::with_options(cfg, graph, false)
    }

    /// `continue_after_alarm` keeps the run going after an alarm by resetting
    /// the windows: the pool shrinks to the most recent `n_pre` validated
    /// frames, the (suspect) post window is discarded, the parameters are
    /// re-zeroed at the current dictionary sizes, and the scored-step counter
    /// restarts. Dictionaries are kept.
    pub fn with_options(
        cfg: DetectorConfig,
        graph: Graph,
        continue_after_alarm: bool,
    ) -> Result<Self> {
        cfg.validate()?;
        let lambda = cfg.lambda.resolve(&graph)?;
        let warmup = cfg.warmup();
        let rng = ChaCha8Rng::seed_from_u64(cfg.seed);
        Ok(Detector {
            cfg,
            lambda,
            warmup,
            graph,
            dims: Vec::new(),
            phase: Phase::BurnIn { buffered: Vec::new() },
            dicts: Vec::new(),
            theta: ParameterVector::zeros(&[]),
            pool: Vec::new(),
            post: VecDeque::new(),
            rng,
            t: 0,
            scored: 0,
            score_norm_sum: 0.0,
            alarms: Vec::new(),
            continue_after_alarm,
            stopped: false,
        })
    }

    /// Frames consumed so far.
    pub fn frames_consumed(&self) -> usize {
        self.t
    }

    pub fn scored_steps(&self) -> usize {
        self.scored
    }

    pub fn alarms(&self) -> &[usize] {
        &self.alarms
    }

    pub fn is_stopped(&self) -> bool {
        self.stopped
    }

    pub fn burn_in_complete(&self) -> bool {
        matches!(self.phase, Phase::Online)
    }

    /// Resolved graph-penalty weight.
    pub fn lambda(&self) -> f64 {
        self.lambda
    }

    /// Current per-node dictionary sizes (empty before burn-in completes).
    pub fn dictionary_sizes(&self) -> Vec<usize> {
        self.dicts.iter().map(|d| d.len()).collect()
    }

    /// Total parameter length; equals the sum of dictionary sizes after
    /// every step.
    pub fn parameter_len(&self) -> usize {
        self.theta.total_len()
    }

    /// Frame indices currently in the pre-change pool.
    pub fn validated_frame_indices(&self) -> Vec<usize> {
        self.pool.iter().map(|(i, _)| *i).collect()
    }

    fn check_frame(&self, frame: &Frame) -> Result<()> {
        let n = self.graph.n_nodes();
        if frame.len() != n {
            return Err(Error::Data(format!(
                "frame {} has {} node entries, expected {n}",
                self.t,
                frame.len()
            )));
        }
        if !self.dims.is_empty() {
            for (v, obs) in frame.iter().enumerate() {
                if obs.len() != self.dims[v] {
                    return Err(Error::dim(
                        format!("frame {} node {v}", self.t),
                        self.dims[v],
                        obs.len(),
                    ));
                }
            }
        }
        Ok(())
    }

    /// Consumes one frame.
    pub fn feed(&mut self, frame: Frame) -> Result<StepOutcome> {
        if self.stopped {
            return Ok(StepOutcome::Stopped);
        }
        self.t += 1;
        self.check_frame(&frame)?;
        if self.dims.is_empty() {
            self.dims = frame.iter().map(|o| o.len()).collect();
        }

        match &mut self.phase {
            Phase::BurnIn { buffered } => {
                buffered.push(frame);
                if buffered.len() == self.cfg.bp {
                    let frames = std::mem::take(buffered);
                    let (dicts, pool) =
                        burn_in(&frames, self.cfg.kernel, self.cfg.bandwidth, self.cfg.mu0)?;
                    let sizes: Vec<usize> = dicts.iter().map(|d| d.len()).collect();
                    self.theta = ParameterVector::zeros(&sizes);
                    self.dicts = dicts;
                    self.pool = pool.into_iter().enumerate().map(|(i, f)| (i + 1, f)).collect();
                    self.phase = Phase::Online;
                }
                Ok(StepOutcome::BurnIn)
            }
            Phase::Online => {
                if self.post.len() + 1 < self.cfg.n_post {
                    // window still filling: frames enter the sliding window
                    // only; dictionary updates happen at scored steps
                    self.post.push_back((self.t, frame));
                    Ok(StepOutcome::Filling)
                } else {
                    let record = self.scored_step(frame)?;
                    Ok(StepOutcome::Scored(record))
                }
            }
        }
    }

    fn admit_to_dictionaries(&mut self, frame: &Frame) -> Result<()> {
        for (v, obs) in frame.iter().enumerate() {
            if self.dicts[v].maybe_add(obs)? {
                self.theta.pad_block(v);
            }
        }
        Ok(())
    }

    fn scored_step(&mut self, frame: Frame) -> Result<StepRecord> {
        let n = self.graph.n_nodes();

        // (1) resample the reference window from the pool, fresh each step
        if self.pool.len() < self.cfg.n_pre {
            return Err(Error::Data(format!(
                "pre-change pool has {} frames, need n_pre = {}",
                self.pool.len(),
                self.cfg.n_pre
            )));
        }
        let pre_idx: Vec<usize> = if self.cfg.resample_with_replacement {
            (0..self.cfg.n_pre)
                .map(|_| self.rng.random_range(0..self.pool.len()))
                .collect()
        } else {
            rand::seq::index::sample(&mut self.rng, self.pool.len(), self.cfg.n_pre).into_vec()
        };

        // (2) slide the post window
        self.post.push_back((self.t, frame));
        let slid_out = if self.post.len() > self.cfg.n_post {
            self.post.pop_front()
        } else {
            None
        };

        // (3) dictionary update on the newest observation, padding theta
        let newest = self.post.back().expect("just pushed").1.clone();
        self.admit_to_dictionaries(&newest)?;

        // (4) window statistics against the current dictionaries
        let pre_frames: Vec<&Frame> = pre_idx.iter().map(|&i| &self.pool[i].1).collect();
        let post_frames: Vec<&Frame> = self.post.iter().map(|(_, f)| f).collect();
        let stats = compute_stats(&self.dicts, &self.graph, &pre_frames, &post_frames)?;

        // (5) one BSGD sweep, ascending node order
        let bounds: Vec<f64> = self.dicts.iter().map(|d| d.kernel().bound()).collect();
        // this step's index: c/s equals c/(t - (bp + n_post - 1)), and the
        // counter restarts after a continue-mode reset so the schedule does
        // too
        let s = self.scored + 1;
        let alphas: Vec<f64> = (0..n)
            .map(|v| {
                let c_vt =
                    step_constant(&stats, &self.graph, &bounds, v, self.lambda, self.cfg.gamma);
                (self.cfg.c / s as f64).min(1.0 / c_vt)
            })
            .collect();
        let order: Vec<usize> = (0..n).collect();
        bsgd_step(
            &mut self.theta,
            &stats,
            &self.graph,
            self.lambda,
            self.cfg.gamma,
            &alphas,
            &order,
        );

        // (6) score
        let g = score(&self.theta, &stats);

        // (7) adaptive threshold over all scored steps; alarms only past warmup
        self.scored += 1;
        self.score_norm_sum += g.norm;
        let eps = self.cfg.kappa * self.score_norm_sum / self.scored as f64;
        let alarm = self.scored > self.warmup && g.norm > eps;

        // (8) validate the slid-out frame into the pool, or handle the alarm
        if alarm {
            self.alarms.push(self.t);
            if self.continue_after_alarm {
                self.reset_after_alarm();
            } else {
                self.stopped = true;
            }
        } else if let Some((idx, f)) = slid_out {
            if idx > self.cfg.bp {
                self.pool.push((idx, f));
            }
        }

        Ok(StepRecord {
            t: self.t,
            norm: g.norm,
            eps,
            alarm,
            per_node: g.per_node,
        })
    }

    fn reset_after_alarm(&mut self) {
        let keep = self.cfg.n_pre;
        if self.pool.len() > keep {
            self.pool.drain(0..self.pool.len() - keep);
        }
        self.post.clear();
        self.theta = ParameterVector::zeros(&self.dictionary_sizes());
        self.scored = 0;
        self.score_norm_sum = 0.0;
    }

    fn into_result(self, records: Vec<StepRecord>) -> DetectionResult {
        DetectionResult {
            detected: !self.alarms.is_empty(),
            tau_hat: self.alarms.first().copied(),
            alarms: self.alarms,
            records,
            dictionary_sizes: self.dicts.iter().map(|d| d.len()).collect(),
            frames_consumed: self.t,
        }
    }
}

/// Drives burn-in and scored steps over a whole stream, stopping at the
/// first alarm (or never, in continue mode). Errors if the stream ends
/// before the first scored step.
pub fn run<I>(
    stream: I,
    cfg: &DetectorConfig,
    graph: &Graph,
    continue_after_alarm: bool,
) -> Result<DetectionResult>
where
    I: IntoIterator<Item = Frame>,
{
    let mut det = Detector::with_options(cfg.clone(), graph.clone(), continue_after_alarm)?;
    let mut records = Vec::new();
    for frame in stream {
        match det.feed(frame)? {
            StepOutcome::Scored(r) => records.push(r),
            StepOutcome::Stopped => break,
            StepOutcome::BurnIn | StepOutcome::Filling => {}
        }
        if det.is_stopped() {
            break;
        }
    }
    if records.is_empty() && det.alarms().is_empty() {
        return Err(Error::Data(format!(
            "stream ended after {} frames, before the first scored step at bp + n_post = {}",
            det.frames_consumed(),
            cfg.bp + cfg.n_post
        )));
    }
    Ok(det.into_result(records))
}
