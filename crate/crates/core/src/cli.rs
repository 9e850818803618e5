//! Command-line front end: `expdet`, `trees`, `select` and `verify`.
//!
//! Exit codes: 0 success, 1 verification failure, 2 input or parse error,
//! 3 capacity or singularity error.

use std::ffi::OsString;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::time::Instant;

use clap::{Parser, Subcommand};

use crate::doptimal::{
    expected_doptimality, select_sensors, LinearSensorModel, Noise, SelectOptions,
};
use crate::ensemble::{
    expected_det_bruteforce, expected_det_cauchy_binet, expected_det_closed_form,
    expected_det_monte_carlo, RankOneEnsemble, DEFAULT_MAX_TERMS,
};
use crate::error::{Error, Result};
use crate::graphs::{
    block_expected_tree_count, expected_tree_count, expected_tree_count_bruteforce,
    weighted_tree_count, BlockCaps, BlockMethod, DEFAULT_MAX_BLOCKS, DEFAULT_MAX_EDGES,
};
use crate::io;
use crate::report::{RunReport, Value};
use crate::verify::{self, Size};

/// Environment variable overriding every `2^m` enumeration cap.
pub const MAX_BRUTE_ENV: &str = "EXPDET_MAX_BRUTE";

#[derive(Debug, Parser)]
#[command(
    name = "expdet",
    version,
    about = "Expected determinants of random rank-one sums"
)]
pub struct Cli {
    /// Emit a single JSON object instead of key=value lines.
    #[arg(long, global = true)]
    pub json: bool,

    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Expected determinant of sum_i pi_i u_i v_iᵀ from CSV files.
    Expdet {
        /// n x m matrix with columns u_i.
        u: PathBuf,
        /// n x m matrix with columns v_i.
        v: PathBuf,
        /// m success probabilities.
        p: PathBuf,
        /// Add the 2^m outcome enumeration.
        #[arg(long)]
        bruteforce: bool,
        /// Add the n-subset expansion.
        #[arg(long = "cauchy-binet")]
        cauchy_binet: bool,
        /// Add a Monte Carlo estimate with this many samples.
        #[arg(long, value_name = "N")]
        mc: Option<usize>,
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
    /// Weighted spanning-tree counts of an edge-list graph.
    Trees {
        edges: PathBuf,
        /// Expected count under independent edge survival.
        #[arg(long)]
        expected: bool,
        /// Add the 2^m edge-state enumeration.
        #[arg(long)]
        bruteforce: bool,
        /// Expected count under block survival, both methods.
        #[arg(long)]
        blocks: bool,
    },
    /// Relaxed D-optimal selection of k sensors.
    Select {
        /// m x n observation matrix.
        h: PathBuf,
        /// Noise variances (one row) or full covariance; unit variances if omitted.
        #[arg(long)]
        noise: Option<PathBuf>,
        /// Per-sensor survival probabilities; all ones if omitted.
        #[arg(long)]
        survival: Option<PathBuf>,
        #[arg(long)]
        k: usize,
        #[arg(long, default_value_t = SelectOptions::default().max_iters)]
        max_iters: usize,
        #[arg(long, default_value_t = SelectOptions::default().step)]
        step: f64,
        #[arg(long, default_value_t = SelectOptions::default().tol)]
        tol: f64,
    },
    /// Run the seeded cross-check battery.
    Verify {
        #[arg(long, value_enum, default_value_t = Size::Small)]
        size: Size,
        #[arg(long, default_value_t = 42)]
        seed: u64,
    },
}

/// Caps for every enumeration, with the environment override applied.
fn brute_cap(default: usize) -> Result<usize> {
    match std::env::var(MAX_BRUTE_ENV) {
        Ok(s) => s.trim().parse().map_err(|_| Error::Parse {
            source_name: MAX_BRUTE_ENV.to_string(),
            line: 1,
            message: format!("not a nonnegative integer: {s:?}"),
        }),
        Err(_) => Ok(default),
    }
}

fn path_str(p: &Path) -> String {
    p.display().to_string()
}

fn push_deviation(report: &mut RunReport, name: &str, reference: f64, value: f64) {
    report.push_real(name, value);
    report.push_real(format!("{name}.abs_dev"), (value - reference).abs());
    report.push_real(format!("{name}.rel_dev"), verify::rel_dev(value, reference));
}

pub fn cmd_expdet(
    u: &Path,
    v: &Path,
    p: &Path,
    bruteforce: bool,
    cauchy_binet: bool,
    mc: Option<usize>,
    seed: u64,
) -> Result<RunReport> {
    let mut report = RunReport::new("expdet");
    report.inputs = vec![path_str(u), path_str(v), path_str(p)];
    let e = RankOneEnsemble::new(
        io::load_matrix(u)?,
        io::load_matrix(v)?,
        io::load_vector(p)?,
    )?;
    report.push("n", Value::Count(e.n() as u64));
    report.push("m", Value::Count(e.m() as u64));
    report.push("underdetermined", Value::Flag(e.underdetermined()));
    let closed = expected_det_closed_form(&e);
    report.push_real("closed_form", closed);
    if bruteforce {
        let bf = expected_det_bruteforce(&e, brute_cap(DEFAULT_MAX_TERMS)?)?;
        push_deviation(&mut report, "bruteforce", closed, bf);
    }
    if cauchy_binet {
        let cb = expected_det_cauchy_binet(&e)?;
        push_deviation(&mut report, "cauchy_binet", closed, cb);
    }
    if let Some(samples) = mc {
        let est = expected_det_monte_carlo(&e, samples, seed)?;
        report.seed = Some(seed);
        push_deviation(&mut report, "monte_carlo", closed, est.mean);
        report.push_real("monte_carlo.std_error", est.std_error);
        report.push("monte_carlo.samples", Value::Count(est.samples as u64));
    }
    Ok(report)
}

pub fn cmd_trees(
    edges: &Path,
    expected: bool,
    bruteforce: bool,
    blocks: bool,
) -> Result<RunReport> {
    let mut report = RunReport::new("trees");
    report.inputs = vec![path_str(edges)];
    let g = io::load_edge_list(edges)?;
    report.push("vertices", Value::Count(g.vertex_count() as u64));
    report.push("edges", Value::Count(g.edge_count() as u64));
    report.push_real("tree_count", weighted_tree_count(&g));
    if expected || bruteforce {
        let closed = expected_tree_count(&g);
        report.push_real("expected_tree_count", closed);
        if bruteforce {
            let bf = expected_tree_count_bruteforce(&g, brute_cap(DEFAULT_MAX_EDGES)?)?;
            push_deviation(&mut report, "bruteforce", closed, bf);
        }
    }
    if blocks {
        if !g.has_blocks() {
            return Err(Error::domain(
                "--blocks needs a block column in the edge list",
            ));
        }
        let caps = BlockCaps {
            max_blocks: brute_cap(DEFAULT_MAX_BLOCKS)?,
            max_edges: brute_cap(DEFAULT_MAX_EDGES)?,
        };
        report.push("blocks", Value::Count(g.block_count().unwrap_or(0) as u64));
        let closed = block_expected_tree_count(&g, BlockMethod::Closed, caps)?;
        let brute = block_expected_tree_count(&g, BlockMethod::BruteForce, caps)?;
        report.push_real("block_closed", closed);
        push_deviation(&mut report, "block_bruteforce", closed, brute);
    }
    Ok(report)
}

pub fn cmd_select(
    h: &Path,
    noise: Option<&Path>,
    survival: Option<&Path>,
    k: usize,
    opts: SelectOptions,
) -> Result<RunReport> {
    let mut report = RunReport::new("select");
    report.inputs.push(path_str(h));
    let h_mat = io::load_matrix(h)?;
    let m = h_mat.rows();
    let noise = match noise {
        Some(path) => {
            report.inputs.push(path_str(path));
            io::load_noise(path, m)?
        }
        None => Noise::Diagonal(vec![1.0; m]),
    };
    let survival = match survival {
        Some(path) => {
            report.inputs.push(path_str(path));
            io::load_vector(path)?
        }
        None => vec![1.0; m],
    };
    let model = LinearSensorModel::new(h_mat, noise, survival)?;
    let res = select_sensors(&model, k, opts)?;

    let mut rounded = vec![0.0; m];
    res.selected.iter().for_each(|&i| rounded[i] = 1.0);
    report.push("k", Value::Count(k as u64));
    report.push("probs", Value::Reals(res.probs.clone()));
    report.push("selected", Value::Indices(res.selected.clone()));
    report.push("converged", Value::Flag(res.converged));
    report.push(
        "iterations",
        Value::Count(res.objective_trace.last().map_or(0, |t| t.0) as u64),
    );
    report.push_real("objective_initial", res.objective_trace[0].1);
    report.push_real("objective_final", res.objective());
    report.push_real("det_relaxed", expected_doptimality(&model, &res.probs)?);
    report.push_real("det_rounded", expected_doptimality(&model, &rounded)?);
    report.push_real(
        "det_expected_under_survival",
        expected_doptimality(&model, model.survival())?,
    );
    Ok(report)
}

pub fn cmd_verify(size: Size, seed: u64) -> RunReport {
    let mut report = RunReport::new("verify");
    report.seed = Some(seed);
    let label = match size {
        Size::Small => "small",
        Size::Medium => "medium",
    };
    report.push("size", Value::Label(label.to_string()));
    report.checks = verify::run_battery(size, seed);
    report.push(
        "failed_checks",
        Value::Count(report.checks.iter().filter(|c| !c.pass).count() as u64),
    );
    report
}

fn dispatch(command: Command) -> Result<RunReport> {
    match command {
        Command::Expdet {
            u,
            v,
            p,
            bruteforce,
            cauchy_binet,
            mc,
            seed,
        } => cmd_expdet(&u, &v, &p, bruteforce, cauchy_binet, mc, seed),
        Command::Trees {
            edges,
            expected,
            bruteforce,
            blocks,
        } => cmd_trees(&edges, expected, bruteforce, blocks),
        Command::Select {
            h,
            noise,
            survival,
            k,
            max_iters,
            step,
            tol,
        } => cmd_select(
            &h,
            noise.as_deref(),
            survival.as_deref(),
            k,
            SelectOptions {
                max_iters,
                step,
                tol,
            },
        ),
        Command::Verify { size, seed } => Ok(cmd_verify(size, seed)),
    }
}

/// Parses `args`, runs the command, writes the report and returns the exit code.
pub fn run<I, T>(args: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 2 } else { 0 };
            let rendered = e.render().to_string();
            let _ = if code == 0 {
                write!(out, "{rendered}")
            } else {
                write!(err, "{rendered}")
            };
            return code;
        }
    };
    let start = Instant::now();
    match dispatch(cli.command) {
        Ok(mut report) => {
            report.elapsed_ms = start.elapsed().as_secs_f64() * 1e3;
            let rendered = if cli.json {
                report.to_json() + "\n"
            } else {
                report.to_text()
            };
            let _ = out.write_all(rendered.as_bytes());
            report.exit_code()
        }
        Err(e) => {
            let _ = writeln!(err, "error: {e}");
            e.exit_code()
        }
    }
}
