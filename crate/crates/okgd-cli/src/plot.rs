//! `okgd plot`: turn a score-trace CSV into gnuplot-friendly data files.
//!
//! Writes `norm.dat` (t, ||g||, eps), `node_scores.dat` (t, g_v^2 per node —
//! the per-region map values), and a ready `plot.gp` script.

use std::fmt::Write as _;
use std::path::PathBuf;

use clap::Args;

use okgd_core::{io, Error, Result};

#[derive(Args)]
pub struct PlotArgs {
    /// Score-trace CSV produced by `okgd detect`.
    #[arg(long)]
    trace: PathBuf,
    /// Output directory.
    #[arg(long, default_value = "plot-out")]
    out_dir: PathBuf,
}

pub fn run(args: PlotArgs) -> Result<()> {
    let records = io::parse_trace_csv(&io::read_to_string(&args.trace)?)?;
    if records.is_empty() {
        return Err(Error::Data("trace has no scored steps".into()));
    }
    std::fs::create_dir_all(&args.out_dir).map_err(|source| Error::Io {
        path: args.out_dir.clone(),
        source,
    })?;

    let mut norm = String::from("# t g_norm eps alarm\n");
    for r in &records {
        let _ = writeln!(norm, "{} {} {} {}", r.t, r.norm, r.eps, u8::from(r.alarm));
    }
    io::write_string(&args.out_dir.join("norm.dat"), &norm)?;

    let n_nodes = records[0].per_node.len();
    let mut nodes = String::from("# t");
    for v in 1..=n_nodes {
        let _ = write!(nodes, " g{v}_sq");
    }
    nodes.push('\n');
    for r in &records {
        let _ = write!(nodes, "{}", r.t);
        for g in &r.per_node {
            let _ = write!(nodes, " {}", g * g);
        }
        nodes.push('\n');
    }
    io::write_string(&args.out_dir.join("node_scores.dat"), &nodes)?;

    let script = "\
set terminal pngcairo size 900,500\n\
set output 'score.png'\n\
set xlabel 't'\n\
set ylabel '||g_t||'\n\
plot 'norm.dat' using 1:2 with lines title 'score norm', \\\n     'norm.dat' using 1:3 with lines title 'threshold'\n";
    io::write_string(&args.out_dir.join("plot.gp"), script)?;

    println!(
        "wrote {}, {}, {}",
        args.out_dir.join("norm.dat").display(),
        args.out_dir.join("node_scores.dat").display(),
        args.out_dir.join("plot.gp").display()
    );
    Ok(())
}
