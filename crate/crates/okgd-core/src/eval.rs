//! Detection-quality metrics and multi-seed benchmark orchestration.
//!
//! "Precision" here is the fraction of runs that detect within a delay
//! budget without a prior false alarm; the budget is part of the report so
//! every precision figure is labeled with the definition that produced it.

use serde::{Deserialize, Serialize};

use crate::detector::{run, DetectionResult, DetectorConfig, LambdaSpec};
use crate::synth::{Scenario, ScenarioSpec};
use crate::{derive_seed, Result};

/// How one run scored against the ground truth.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunReport {
    pub seed: u64,
    pub detected: bool,
    /// Alarm strictly before `tau - tolerance_window`.
    pub false_alarm: bool,
    pub tau_hat: Option<usize>,
    /// `max(0, tau_hat - tau)` when detected; tolerated early alarms count
    /// as delay 0.
    pub delay: Option<usize>,
}

/// Scores a detection result against the scenario's ground truth. An alarm
/// at `t >= tau - tolerance_window` is a detection with delay
/// `max(0, t - tau)`; an earlier alarm is a false alarm; no alarm is a miss.
/// Only the first alarm is scored (runs stop at the first alarm unless in
/// continue mode).
pub fn score_run(
    result: &DetectionResult,
    truth: &Scenario,
    tolerance_window: usize,
    seed: u64,
) -> RunReport {
    let alarm = result.alarms.first().copied();
    match (alarm, truth.tau) {
        (None, _) => RunReport {
            seed,
            detected: false,
            false_alarm: false,
            tau_hat: None,
            delay: None,
        },
        (Some(t), None) => RunReport {
            seed,
            detected: false,
            false_alarm: true,
            tau_hat: Some(t),
            delay: None,
        },
        (Some(t), Some(tau)) => {
            if t + tolerance_window < tau {
                RunReport {
                    seed,
                    detected: false,
                    false_alarm: true,
                    tau_hat: Some(t),
                    delay: None,
                }
            } else {
                RunReport {
                    seed,
                    detected: true,
                    false_alarm: false,
                    tau_hat: Some(t),
                    delay: Some(t.saturating_sub(tau)),
                }
            }
        }
    }
}

/// Aggregate over a batch of runs.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Aggregate {
    pub n_runs: usize,
    pub n_detected: usize,
    pub n_false_alarms: usize,
    /// Mean delay over detected runs; absent when nothing was detected.
    pub mean_delay: Option<f64>,
    /// Sample standard deviation (n-1) of the delay over detected runs;
    /// absent with fewer than two detections.
    pub std_delay: Option<f64>,
    /// Detections with `delay <= delay_budget` and no prior false alarm,
    /// divided by the total number of runs.
    pub precision: f64,
    pub delay_budget: usize,
}

pub fn aggregate(reports: &[RunReport], delay_budget: usize) -> Aggregate {
    let n_runs = reports.len();
    let delays: Vec<f64> = reports
        .iter()
        .filter(|r| r.detected && !r.false_alarm)
        .filter_map(|r| r.delay.map(|d| d as f64))
        .collect();
    let n_detected = delays.len();
    let n_false_alarms = reports.iter().filter(|r| r.false_alarm).count();
    let mean_delay = if n_detected > 0 {
        Some(delays.iter().sum::<f64>() / n_detected as f64)
    } else {
        None
    };
    let std_delay = if n_detected > 1 {
        let m = mean_delay.unwrap();
        Some(
            (delays.iter().map(|d| (d - m) * (d - m)).sum::<f64>() / (n_detected - 1) as f64)
                .sqrt(),
        )
    } else {
        None
    };
    let within_budget = reports
        .iter()
        .filter(|r| {
            r.detected && !r.false_alarm && r.delay.is_some_and(|d| d <= delay_budget)
        })
        .count();
    let precision = if n_runs == 0 {
        0.0
    } else {
        within_budget as f64 / n_runs as f64
    };
    Aggregate {
        n_runs,
        n_detected,
        n_false_alarms,
        mean_delay,
        std_delay,
        precision,
        delay_budget,
    }
}

/// A detector variant in a benchmark; variants differ only by the graph
/// penalty: `okgd` uses the auto (10 / mean degree) setting, `okgd-nograph`
/// sets it to zero.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BenchVariant {
    pub name: String,
    pub lambda: LambdaSpec,
}

impl BenchVariant {
    pub fn okgd() -> Self {
        BenchVariant { name: "okgd".into(), lambda: LambdaSpec::Auto }
    }

    pub fn okgd_nograph() -> Self {
        BenchVariant { name: "okgd-nograph".into(), lambda: LambdaSpec::Fixed(0.0) }
    }

    pub fn from_name(name: &str) -> Result<Self> {
        match name {
            "okgd" => Ok(Self::okgd()),
            "okgd-nograph" => Ok(Self::okgd_nograph()),
            other => Err(crate::Error::Config(format!(
                "unknown variant {other:?} (expected okgd or okgd-nograph)"
            ))),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BenchRun {
    pub variant: String,
    pub report: RunReport,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BenchSummary {
    pub variant: String,
    pub aggregate: Aggregate,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BenchReport {
    pub runs: Vec<BenchRun>,
    pub summaries: Vec<BenchSummary>,
    pub delay_budget: usize,
    pub tolerance_window: usize,
}

/// Runs `n_seeds` independent scenario instances (seeds `0..n_seeds`, each
/// resampling the graph and the stream) through every variant and
/// aggregates. Seeds fan out across worker threads; the report order is
/// deterministic regardless of scheduling.
pub fn run_bench(
    spec: &ScenarioSpec,
    base: &DetectorConfig,
    variants: &[BenchVariant],
    n_seeds: u64,
    delay_budget: usize,
    tolerance_window: usize,
) -> Result<BenchReport> {
    let seeds: Vec<u64> = (0..n_seeds).collect();
    let n_workers = std::thread::available_parallelism()
        .map(|p| p.get())
        .unwrap_or(1)
        .min(seeds.len().max(1));

    // per-seed results, each holding one report per variant
    let mut per_seed: Vec<Option<Vec<RunReport>>> = vec![None; seeds.len()];
    let chunks: Vec<Vec<usize>> = (0..n_workers)
        .map(|w| (w..seeds.len()).step_by(n_workers).collect())
        .collect();

    let seeds = &seeds;
    std::thread::scope(|scope| -> Result<()> {
        let mut handles = Vec::new();
        for chunk in &chunks {
            let handle = scope.spawn(move || -> Result<Vec<(usize, Vec<RunReport>)>> {
                let mut out = Vec::new();
                for &i in chunk {
                    let seed = seeds[i];
                    let scenario = spec.build(seed)?;
                    let frames = scenario.emit_frames(derive_seed(seed, 1));
                    let mut reports = Vec::new();
                    for variant in variants {
                        let cfg = DetectorConfig {
                            lambda: variant.lambda,
                            seed: derive_seed(seed, 2),
                            ..base.clone()
                        };
                        let result = run(frames.iter().cloned(), &cfg, &scenario.graph, false)?;
                        reports.push(score_run(&result, &scenario, tolerance_window, seed));
                    }
                    out.push((i, reports));
                }
                Ok(out)
            });
            handles.push(handle);
        }
        for handle in handles {
            for (i, reports) in handle.join().expect("bench worker panicked")? {
                per_seed[i] = Some(reports);
            }
        }
        Ok(())
    })?;

    let mut runs = Vec::new();
    let mut summaries = Vec::new();
    for (vi, variant) in variants.iter().enumerate() {
        let reports: Vec<RunReport> = per_seed
            .iter()
            .map(|r| r.as_ref().expect("missing seed result")[vi].clone())
            .collect();
        for report in &reports {
            runs.push(BenchRun { variant: variant.name.clone(), report: report.clone() });
        }
        summaries.push(BenchSummary {
            variant: variant.name.clone(),
            aggregate: aggregate(&reports, delay_budget),
        });
    }
    Ok(BenchReport { runs, summaries, delay_budget, tolerance_window })
}
