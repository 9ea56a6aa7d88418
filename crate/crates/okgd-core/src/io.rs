//! File formats: graph edge lists, stream CSVs, ground-truth files, score
//! traces, bench reports, and point clouds — plus the optional AR(1)
//! ingestion filter.
//!
//! All floats are written with Rust's shortest round-trip formatting, so
//! emit-then-ingest reproduces values exactly and seeded runs produce
//! byte-identical files.

use std::fmt::Write as _;
use std::path::Path;

use crate::detector::StepRecord;
use crate::eval::BenchReport;
use crate::graph::Graph;
use crate::{Error, Frame, Result};

pub fn read_to_string(path: &Path) -> Result<String> {
    std::fs::read_to_string(path).map_err(|source| Error::Io { path: path.into(), source })
}

pub fn write_string(path: &Path, contents: &str) -> Result<()> {
    std::fs::write(path, contents).map_err(|source| Error::Io { path: path.into(), source })
}

// ---------------------------------------------------------------------------
// Edge lists
// ---------------------------------------------------------------------------

/// One line per edge `u v w` (0-based indices, whitespace-separated). A
/// `# nodes: N` comment records the node count so edgeless or trailing
/// isolated nodes survive a round trip; other `#` lines are ignored.
pub fn write_edge_list(graph: &Graph) -> String {
    let mut out = String::new();
    let _ = writeln!(out, "# nodes: {}", graph.n_nodes());
    for (u, v, w) in graph.edges() {
        let _ = writeln!(out, "{u} {v} {w}");
    }
    out
}

/// Parses an edge list. The node count is the `# nodes:` hint when present,
/// otherwise the largest index + 1.
pub fn parse_edge_list(text: &str) -> Result<Graph> {
    let mut edges: Vec<(usize, usize, f64)> = Vec::new();
    let mut n_hint: Option<usize> = None;
    for (lineno, raw) in text.lines().enumerate() {
        let line = raw.trim();
        if line.is_empty() {
            continue;
        }
        if let Some(comment) = line.strip_prefix('#') {
            if let Some(rest) = comment.trim().strip_prefix("nodes:") {
                n_hint = Some(rest.trim().parse().map_err(|_| {
                    Error::Data(format!("edge list line {}: bad node count", lineno + 1))
                })?);
            }
            continue;
        }
        let mut parts = line.split_whitespace();
        let parse = |tok: Option<&str>, what: &str| -> Result<String> {
            tok.map(str::to_owned).ok_or_else(|| {
                Error::Data(format!("edge list line {}: missing {what}", lineno + 1))
            })
        };
        let u: usize = parse(parts.next(), "source index")?
            .parse()
            .map_err(|_| Error::Data(format!("edge list line {}: bad source index", lineno + 1)))?;
        let v: usize = parse(parts.next(), "target index")?
            .parse()
            .map_err(|_| Error::Data(format!("edge list line {}: bad target index", lineno + 1)))?;
        let w: f64 = parse(parts.next(), "weight")?
            .parse()
            .map_err(|_| Error::Data(format!("edge list line {}: bad weight", lineno + 1)))?;
        if parts.next().is_some() {
            return Err(Error::Data(format!(
                "edge list line {}: trailing fields",
                lineno + 1
            )));
        }
        edges.push((u, v, w));
    }
    let max_idx = edges.iter().map(|&(u, v, _)| u.max(v) + 1).max().unwrap_or(0);
    let n = match n_hint {
        Some(h) if h >= max_idx => h,
        Some(h) => {
            return Err(Error::Data(format!(
                "edge list declares {h} nodes but references index {}",
                max_idx - 1
            )))
        }
        None if max_idx > 0 => max_idx,
        None => return Err(Error::Data("edge list has no edges and no # nodes: hint".into())),
    };
    Graph::from_edges(n, &edges)
}

pub fn read_edge_list(path: &Path) -> Result<Graph> {
    parse_edge_list(&read_to_string(path)?)
}

// ---------------------------------------------------------------------------
// Stream CSVs
// ---------------------------------------------------------------------------

fn stream_header(dims: &[usize]) -> String {
    let mut h = String::from("t");
    for (v, &d) in dims.iter().enumerate() {
        for j in 0..d {
            let _ = write!(h, ",v{v}_d{j}");
        }
    }
    h
}

/// Header `t,v0_d0,v0_d1,...,vK_d0,...`; one row per frame with `t` counting
/// from 1.
pub fn write_stream_csv(frames: &[Frame]) -> Result<String> {
    if frames.is_empty() {
        return Err(Error::Data("cannot write an empty stream".into()));
    }
    let dims: Vec<usize> = frames[0].iter().map(|o| o.len()).collect();
    let mut out = stream_header(&dims);
    out.push('\n');
    for (i, frame) in frames.iter().enumerate() {
        if frame.len() != dims.len() {
            return Err(Error::Data(format!(
                "frame {} has {} node entries, expected {}",
                i + 1,
                frame.len(),
                dims.len()
            )));
        }
        let _ = write!(out, "{}", i + 1);
        for (v, obs) in frame.iter().enumerate() {
            if obs.len() != dims[v] {
                return Err(Error::dim(format!("frame {} node {v}", i + 1), dims[v], obs.len()));
            }
            for x in obs {
                let _ = write!(out, ",{x}");
            }
        }
        out.push('\n');
    }
    Ok(out)
}

/// Parses a stream CSV back into frames plus the per-node dimension schema
/// inferred from the header. Rows must be strictly increasing in `t`, cells
/// all numeric, no row ragged.
pub fn parse_stream_csv(text: &str) -> Result<(Vec<Frame>, Vec<usize>)> {
    let mut lines = text.lines().enumerate();
    let (_, header) = lines
        .next()
        .ok_or_else(|| Error::Data("stream CSV is empty".into()))?;
    let mut cols = header.split(',');
    if cols.next() != Some("t") {
        return Err(Error::Data("stream CSV header must start with 't'".into()));
    }
    let mut dims: Vec<usize> = Vec::new();
    for col in cols {
        let rest = col
            .strip_prefix('v')
            .ok_or_else(|| Error::Data(format!("bad stream column name {col:?}")))?;
        let (v_str, d_str) = rest
            .split_once("_d")
            .ok_or_else(|| Error::Data(format!("bad stream column name {col:?}")))?;
        let v: usize = v_str
            .parse()
            .map_err(|_| Error::Data(format!("bad stream column name {col:?}")))?;
        let d: usize = d_str
            .parse()
            .map_err(|_| Error::Data(format!("bad stream column name {col:?}")))?;
        if v == dims.len() && d == 0 {
            dims.push(1);
        } else if v + 1 == dims.len() && d == dims[v] {
            dims[v] += 1;
        } else {
            return Err(Error::Data(format!(
                "stream column {col:?} out of order (expected contiguous v/d indices)"
            )));
        }
    }
    if dims.is_empty() {
        return Err(Error::Data("stream CSV has no observation columns".into()));
    }
    let width: usize = dims.iter().sum::<usize>() + 1;

    let mut frames = Vec::new();
    let mut last_t: Option<i64> = None;
    for (lineno, raw) in lines {
        if raw.trim().is_empty() {
            continue;
        }
        let cells: Vec<&str> = raw.split(',').collect();
        if cells.len() != width {
            return Err(Error::Data(format!(
                "stream CSV line {}: {} cells, expected {width}",
                lineno + 1,
                cells.len()
            )));
        }
        let t: i64 = cells[0].trim().parse().map_err(|_| {
            Error::Data(format!("stream CSV line {}: bad t {:?}", lineno + 1, cells[0]))
        })?;
        if let Some(prev) = last_t {
            if t <= prev {
                return Err(Error::Data(format!(
                    "stream CSV line {}: t = {t} not strictly increasing (previous {prev})",
                    lineno + 1
                )));
            }
        }
        last_t = Some(t);
        let mut frame: Frame = Vec::with_capacity(dims.len());
        let mut idx = 1;
        for &d in &dims {
            let mut obs = Vec::with_capacity(d);
            for _ in 0..d {
                let cell = cells[idx].trim();
                if cell.is_empty() {
                    return Err(Error::Data(format!(
                        "stream CSV line {}: missing value in column {idx}",
                        lineno + 1
                    )));
                }
                let x: f64 = cell.parse().map_err(|_| {
                    Error::Data(format!(
                        "stream CSV line {}: non-numeric cell {cell:?}",
                        lineno + 1
                    ))
                })?;
                obs.push(x);
                idx += 1;
            }
            frame.push(obs);
        }
        frames.push(frame);
    }
    if frames.is_empty() {
        return Err(Error::Data("stream CSV has no data rows".into()));
    }
    Ok((frames, dims))
}

pub fn read_stream_csv(path: &Path) -> Result<(Vec<Frame>, Vec<usize>)> {
    parse_stream_csv(&read_to_string(path)?)
}

// ---------------------------------------------------------------------------
// Ground truth
// ---------------------------------------------------------------------------

/// `tau=<int>` (omitted when there is no change) and `changed=<comma list>`.
pub fn write_ground_truth(tau: Option<usize>, changed: &[usize]) -> String {
    let mut out = String::new();
    if let Some(tau) = tau {
        let _ = writeln!(out, "tau={tau}");
    }
    let list: Vec<String> = changed.iter().map(|v| v.to_string()).collect();
    let _ = writeln!(out, "changed={}", list.join(","));
    out
}

pub fn parse_ground_truth(text: &str) -> Result<(Option<usize>, Vec<usize>)> {
    let mut tau = None;
    let mut changed = Vec::new();
    for (lineno, raw) in text.lines().enumerate() {
        let line = raw.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        if let Some(v) = line.strip_prefix("tau=") {
            tau = Some(v.trim().parse().map_err(|_| {
                Error::Data(format!("ground truth line {}: bad tau", lineno + 1))
            })?);
        } else if let Some(v) = line.strip_prefix("changed=") {
            let v = v.trim();
            if !v.is_empty() {
                for tok in v.split(',') {
                    changed.push(tok.trim().parse().map_err(|_| {
                        Error::Data(format!("ground truth line {}: bad node id", lineno + 1))
                    })?);
                }
            }
        } else {
            return Err(Error::Data(format!(
                "ground truth line {}: unknown key",
                lineno + 1
            )));
        }
    }
    Ok((tau, changed))
}

// ---------------------------------------------------------------------------
// Score traces
// ---------------------------------------------------------------------------

/// One record per scored step: `t,g_norm,eps,alarm,g_1..g_N` with alarm as
/// 0/1 and full float round-trip precision.
pub fn write_trace_csv(records: &[StepRecord], n_nodes: usize) -> String {
    let mut out = String::from("t,g_norm,eps,alarm");
    for v in 1..=n_nodes {
        let _ = write!(out, ",g_{v}");
    }
    out.push('\n');
    for r in records {
        let _ = write!(out, "{},{},{},{}", r.t, r.norm, r.eps, u8::from(r.alarm));
        for g in &r.per_node {
            let _ = write!(out, ",{g}");
        }
        out.push('\n');
    }
    out
}

pub fn parse_trace_csv(text: &str) -> Result<Vec<StepRecord>> {
    let mut lines = text.lines();
    let header = lines
        .next()
        .ok_or_else(|| Error::Data("trace CSV is empty".into()))?;
    if !header.starts_with("t,g_norm,eps,alarm") {
        return Err(Error::Data("trace CSV header not recognized".into()));
    }
    let n_nodes = header.split(',').count() - 4;
    let mut records = Vec::new();
    for (lineno, raw) in lines.enumerate() {
        if raw.trim().is_empty() {
            continue;
        }
        let cells: Vec<&str> = raw.split(',').collect();
        if cells.len() != 4 + n_nodes {
            return Err(Error::Data(format!(
                "trace CSV line {}: {} cells, expected {}",
                lineno + 2,
                cells.len(),
                4 + n_nodes
            )));
        }
        let bad =
            |what: &str| Error::Data(format!("trace CSV line {}: bad {what}", lineno + 2));
        let t: usize = cells[0].parse().map_err(|_| bad("t"))?;
        let norm: f64 = cells[1].parse().map_err(|_| bad("g_norm"))?;
        let eps: f64 = cells[2].parse().map_err(|_| bad("eps"))?;
        let alarm = match cells[3] {
            "0" => false,
            "1" => true,
            _ => return Err(bad("alarm flag")),
        };
        let mut per_node = Vec::with_capacity(n_nodes);
        for c in &cells[4..] {
            per_node.push(c.parse().map_err(|_| bad("per-node score"))?);
        }
        records.push(StepRecord { t, norm, eps, alarm, per_node });
    }
    Ok(records)
}

// ---------------------------------------------------------------------------
// Bench reports
// ---------------------------------------------------------------------------

/// One row per (variant, seed), then one summary row per variant with
/// `seed=all`; per-run and aggregate columns are left empty where they do
/// not apply.
pub fn write_bench_csv(report: &BenchReport) -> String {
    let mut out = String::from(
        "variant,seed,detected,false_alarm,tau_hat,delay,mean_delay,std_delay,n_false_alarms,precision,delay_budget\n",
    );
    let fmt_opt = |o: Option<f64>| o.map(|v| v.to_string()).unwrap_or_default();
    for run in &report.runs {
        let r = &run.report;
        let _ = writeln!(
            out,
            "{},{},{},{},{},{},,,,,",
            run.variant,
            r.seed,
            u8::from(r.detected),
            u8::from(r.false_alarm),
            r.tau_hat.map(|t| t.to_string()).unwrap_or_default(),
            r.delay.map(|d| d.to_string()).unwrap_or_default(),
        );
    }
    for s in &report.summaries {
        let a = &s.aggregate;
        let _ = writeln!(
            out,
            "{},all,,,,,{},{},{},{},{}",
            s.variant,
            fmt_opt(a.mean_delay),
            fmt_opt(a.std_delay),
            a.n_false_alarms,
            a.precision,
            a.delay_budget,
        );
    }
    out
}

// ---------------------------------------------------------------------------
// Point clouds (k-NN graph input)
// ---------------------------------------------------------------------------

/// One point per line, whitespace- or comma-separated coordinates; `#`
/// comments ignored.
pub fn parse_points(text: &str) -> Result<Vec<Vec<f64>>> {
    let mut points = Vec::new();
    for (lineno, raw) in text.lines().enumerate() {
        let line = raw.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let coords: Result<Vec<f64>> = line
            .split(|c: char| c == ',' || c.is_whitespace())
            .filter(|tok| !tok.is_empty())
            .map(|tok| {
                tok.parse().map_err(|_| {
                    Error::Data(format!("points line {}: bad coordinate {tok:?}", lineno + 1))
                })
            })
            .collect();
        points.push(coords?);
    }
    if points.is_empty() {
        return Err(Error::Data("points file has no points".into()));
    }
    Ok(points)
}

// ---------------------------------------------------------------------------
// AR(1) ingestion filter
// ---------------------------------------------------------------------------

/// Per-channel AR(1) residual: fits the lag-1 least-squares coefficient on
/// the first `fit_len` frames and replaces `y_t` with `y_t - phi * y_{t-1}`
/// (the first frame is kept as-is). Channels with no lag-1 energy in the fit
/// segment keep `phi = 0`.
pub fn ar1_filter(frames: &[Frame], fit_len: usize) -> Result<Vec<Frame>> {
    if frames.len() < 2 {
        return Err(Error::Data("AR(1) filter needs at least 2 frames".into()));
    }
    let fit = fit_len.clamp(2, frames.len());
    let n = frames[0].len();
    let dims: Vec<usize> = frames[0].iter().map(|o| o.len()).collect();

    let mut phi: Vec<Vec<f64>> = dims.iter().map(|&d| vec![0.0; d]).collect();
    for v in 0..n {
        for d in 0..dims[v] {
            let mut num = 0.0;
            let mut den = 0.0;
            for t in 1..fit {
                let prev = frames[t - 1][v][d];
                num += frames[t][v][d] * prev;
                den += prev * prev;
            }
            if den > 0.0 {
                phi[v][d] = num / den;
            }
        }
    }

    let mut out = Vec::with_capacity(frames.len());
    out.push(frames[0].clone());
    for t in 1..frames.len() {
        let frame: Frame = (0..n)
            .map(|v| {
                (0..dims[v])
                    .map(|d| frames[t][v][d] - phi[v][d] * frames[t - 1][v][d])
                    .collect()
            })
            .collect();
        out.push(frame);
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::{sample_sbm, SbmParams};
    use rand::Rng;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn edge_list_round_trip() {
        let (g, _) = sample_sbm(
            &SbmParams { n_clusters: 2, cluster_size: 4, p_intra: 0.7, p_inter: 0.1 },
            3,
        )
        .unwrap();
        let text = write_edge_list(&g);
        let back = parse_edge_list(&text).unwrap();
        assert_eq!(g, back);
        // edgeless graphs survive via the nodes hint
        let empty = Graph::from_edges(5, &[]).unwrap();
        let back = parse_edge_list(&write_edge_list(&empty)).unwrap();
        assert_eq!(empty, back);
    }

    #[test]
    fn edge_list_parsing_rules() {
        let g = parse_edge_list("# a comment\n0 1 1.5\n\n1 2 0.5\n").unwrap();
        assert_eq!(g.n_nodes(), 3);
        assert_eq!(g.weight(0, 1), 1.5);
        assert!(parse_edge_list("0 1\n").is_err());
        assert!(parse_edge_list("0 x 1\n").is_err());
        assert!(parse_edge_list("# nodes: 2\n0 5 1.0\n").is_err());
        assert!(parse_edge_list("").is_err());
    }

    #[test]
    fn stream_csv_header_shape() {
        let frames = vec![vec![vec![1.0, 2.0], vec![3.0]]];
        let text = write_stream_csv(&frames).unwrap();
        assert!(text.starts_with("t,v0_d0,v0_d1,v1_d0\n"));
        assert_eq!(text.lines().nth(1).unwrap(), "1,1,2,3");
    }

    #[test]
    fn stream_csv_round_trip_is_exact() {
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        let frames: Vec<Frame> = (0..20)
            .map(|_| {
                vec![
                    vec![rng.random::<f64>() * 1e3, rng.random::<f64>() * 1e-7],
                    vec![-rng.random::<f64>()],
                ]
            })
            .collect();
        let text = write_stream_csv(&frames).unwrap();
        let (back, dims) = parse_stream_csv(&text).unwrap();
        assert_eq!(dims, vec![2, 1]);
        assert_eq!(frames, back); // bit-exact float round trip
        // and writing again is byte-identical
        assert_eq!(write_stream_csv(&back).unwrap(), text);
    }

    #[test]
    fn stream_csv_rejects_malformed_rows() {
        let ok = "t,v0_d0,v1_d0\n1,0.5,0.25\n2,1,2\n";
        assert!(parse_stream_csv(ok).is_ok());
        // ragged
        assert!(parse_stream_csv("t,v0_d0,v1_d0\n1,0.5\n").is_err());
        // non-monotone t
        assert!(parse_stream_csv("t,v0_d0\n2,0.5\n2,0.6\n").is_err());
        assert!(parse_stream_csv("t,v0_d0\n2,0.5\n1,0.6\n").is_err());
        // missing and non-numeric cells
        assert!(parse_stream_csv("t,v0_d0,v1_d0\n1,,2\n").is_err());
        assert!(parse_stream_csv("t,v0_d0\n1,abc\n").is_err());
        // header problems
        assert!(parse_stream_csv("x,v0_d0\n1,2\n").is_err());
        assert!(parse_stream_csv("t,v1_d0\n1,2\n").is_err());
        assert!(parse_stream_csv("t,v0_d0\n").is_err());
    }

    #[test]
    fn seismic_shaped_header() {
        // 13 nodes x 3 dims
        let frame: Frame = (0..13).map(|_| vec![0.0, 1.0, 2.0]).collect();
        let text = write_stream_csv(&[frame]).unwrap();
        let header = text.lines().next().unwrap();
        assert_eq!(header.split(',').count(), 1 + 13 * 3);
        assert!(header.ends_with("v12_d2"));
        let (_, dims) = parse_stream_csv(&text).unwrap();
        assert_eq!(dims, vec![3; 13]);
    }

    #[test]
    fn ground_truth_round_trip() {
        let text = write_ground_truth(Some(500), &[0, 3, 7]);
        assert_eq!(text, "tau=500\nchanged=0,3,7\n");
        let (tau, changed) = parse_ground_truth(&text).unwrap();
        assert_eq!(tau, Some(500));
        assert_eq!(changed, vec![0, 3, 7]);
        // null scenario: no tau line, empty changed list
        let text = write_ground_truth(None, &[]);
        assert_eq!(text, "changed=\n");
        let (tau, changed) = parse_ground_truth(&text).unwrap();
        assert_eq!(tau, None);
        assert!(changed.is_empty());
        assert!(parse_ground_truth("tau=abc\n").is_err());
        assert!(parse_ground_truth("surprise=1\n").is_err());
    }

    #[test]
    fn trace_csv_round_trip() {
        let records = vec![
            StepRecord {
                t: 25,
                norm: 0.123456789012345,
                eps: 0.2,
                alarm: false,
                per_node: vec![0.1, -0.07],
            },
            StepRecord {
                t: 26,
                norm: 0.9,
                eps: 0.3,
                alarm: true,
                per_node: vec![0.5, 0.4],
            },
        ];
        let text = write_trace_csv(&records, 2);
        assert!(text.starts_with("t,g_norm,eps,alarm,g_1,g_2\n"));
        let back = parse_trace_csv(&text).unwrap();
        assert_eq!(records, back);
    }

    #[test]
    fn bench_csv_has_run_and_summary_rows() {
        use crate::eval::{aggregate, BenchRun, BenchSummary, RunReport};
        let report = RunReport {
            seed: 0,
            detected: true,
            false_alarm: false,
            tau_hat: Some(510),
            delay: Some(10),
        };
        let bench = BenchReport {
            runs: vec![BenchRun { variant: "okgd".into(), report: report.clone() }],
            summaries: vec![BenchSummary {
                variant: "okgd".into(),
                aggregate: aggregate(&[report], 150),
            }],
            delay_budget: 150,
            tolerance_window: 0,
        };
        let text = write_bench_csv(&bench);
        let lines: Vec<&str> = text.lines().collect();
        assert_eq!(lines.len(), 3);
        assert!(lines[1].starts_with("okgd,0,1,0,510,10"));
        assert!(lines[2].starts_with("okgd,all,,,,,10,"));
    }

    #[test]
    fn points_parsing() {
        let pts = parse_points("# two 2d points\n0.0 1.0\n2.0,3.0\n").unwrap();
        assert_eq!(pts, vec![vec![0.0, 1.0], vec![2.0, 3.0]]);
        assert!(parse_points("a b\n").is_err());
        assert!(parse_points("# nothing\n").is_err());
    }

    #[test]
    fn ar1_filter_removes_known_autocorrelation() {
        // y_t = phi y_{t-1} + e_t with phi = 0.8; residuals should have
        // lag-1 autocorrelation near zero
        let mut rng = ChaCha8Rng::seed_from_u64(6);
        let mut y = 0.0;
        let frames: Vec<Frame> = (0..500)
            .map(|_| {
                y = 0.8 * y + rng.random_range(-1.0..1.0);
                vec![vec![y]]
            })
            .collect();
        let filtered = ar1_filter(&frames, 200).unwrap();
        assert_eq!(filtered.len(), frames.len());
        let xs: Vec<f64> = filtered.iter().skip(1).map(|f| f[0][0]).collect();
        let mean = xs.iter().sum::<f64>() / xs.len() as f64;
        let var: f64 = xs.iter().map(|x| (x - mean) * (x - mean)).sum::<f64>();
        let lag1: f64 = xs.windows(2).map(|w| (w[0] - mean) * (w[1] - mean)).sum::<f64>();
        assert!(
            (lag1 / var).abs() <= 0.1,
            "residual lag-1 autocorrelation {}",
            lag1 / var
        );
        // the raw series is strongly autocorrelated, as a sanity contrast
        let raw: Vec<f64> = frames.iter().map(|f| f[0][0]).collect();
        let rmean = raw.iter().sum::<f64>() / raw.len() as f64;
        let rvar: f64 = raw.iter().map(|x| (x - rmean) * (x - rmean)).sum::<f64>();
        let rlag1: f64 = raw.windows(2).map(|w| (w[0] - rmean) * (w[1] - rmean)).sum::<f64>();
        assert!(rlag1 / rvar > 0.5);
    }

    #[test]
    fn ar1_filter_on_known_coefficients() {
        // exact AR(1) with no noise: residuals after the fit are ~0
        let frames: Vec<Frame> = (0..10)
            .scan(1.0f64, |y, _| {
                let cur = *y;
                *y *= 0.5;
                Some(vec![vec![cur]])
            })
            .collect();
        let filtered = ar1_filter(&frames, 10).unwrap();
        assert_eq!(filtered[0][0][0], 1.0);
        for f in &filtered[1..] {
            assert!(f[0][0].abs() <= 1e-12);
        }
        assert!(ar1_filter(&frames[..1], 10).is_err());
    }
}
