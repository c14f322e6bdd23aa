//! Command-line interface.
//!
//! Every subcommand prints a human-readable table to standard output
//! and optionally writes machine-readable files with `--out`.  Values
//! resolve in three layers: command-line flags, then the `--config`
//! key=value file, then built-in defaults.  Exit codes: 0 success,
//! 1 usage error, 2 validation error, 3 capacity/runtime error.

use crate::error::{Error, Result};
use crate::favard::{
    buffon_circle_mc, buffon_circle_quadrature, buffon_noodle, favard_length, AngleDomain,
    AngleGrid,
};
use crate::harness::{bv_report, emit_report, BvConfig, ReportFormat, RunConfig};
use crate::noodle::Noodle;
use crate::pairs::{bound_ratios, distorted_pair_table, pair_table, TableMode};
use crate::projection::Direction;
use crate::rho::rho_bound_survey;
use clap::{Args, Parser, Subcommand};
use std::fmt::Write as _;
use std::path::{Path, PathBuf};

#[derive(Parser, Debug)]
#[command(
    name = "favard-lab",
    version,
    about = "Favard-length and Buffon-noodle experiments on the four-corner Cantor sets"
)]
struct Cli {
    /// Flat key=value config file; explicit flags override its values.
    #[arg(long, global = true, value_name = "FILE")]
    config: Option<PathBuf>,

    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// List the squares of generation n.
    Generate(GenerateArgs),
    /// Multiplicity profile of one projection direction.
    Project(ProjectArgs),
    /// Favard length by angle quadrature.
    Favard(FavardArgs),
    /// Circle drop-set area, Monte Carlo or polar quadrature.
    BuffonCircle(BuffonCircleArgs),
    /// Buffon noodle functional for a profile family.
    BuffonNoodle(BuffonNoodleArgs),
    /// Pair class table, exact, sampled, or noodle-distorted.
    Pairs(PairsArgs),
    /// Overlap survey over sampled pairs.
    Rho(RhoArgs),
    /// End-to-end pipeline report.
    VerifyBv(VerifyBvArgs),
}

#[derive(Args, Debug)]
struct GenerateArgs {
    /// Generation to build.
    #[arg(long)]
    n: Option<u32>,
    /// CSV destination (address, x0, y0, side).
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args, Debug)]
struct ProjectArgs {
    #[arg(long)]
    n: Option<u32>,
    /// Direction angle in radians.
    #[arg(long, allow_negative_numbers = true)]
    theta: Option<f64>,
    /// Angle frame: `standard` (from the x-axis) or `special`
    /// (from the direction arctan(1/2)).
    #[arg(long)]
    frame: Option<String>,
    /// Noodle spec distorting the projection (default `zero`).
    #[arg(long)]
    noodle: Option<String>,
    /// CSV destination (lo, hi, count).
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args, Debug)]
struct FavardArgs {
    #[arg(long)]
    n: Option<u32>,
    #[arg(long)]
    noodle: Option<String>,
    /// Angle nodes for the quadrature grid.
    #[arg(long)]
    angles: Option<usize>,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args, Debug)]
struct BuffonCircleArgs {
    #[arg(long)]
    n: Option<u32>,
    /// Circle radius (must exceed 2).
    #[arg(long)]
    r: Option<f64>,
    /// Monte Carlo sample count (the default method).
    #[arg(long)]
    samples: Option<u64>,
    #[arg(long)]
    seed: Option<u64>,
    /// Use exact-in-offset polar quadrature instead of Monte Carlo.
    #[arg(long, conflicts_with_all = ["samples", "seed"])]
    quadrature: bool,
    #[arg(long)]
    angles: Option<usize>,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args, Debug)]
struct BuffonNoodleArgs {
    #[arg(long)]
    n: Option<u32>,
    #[arg(long)]
    noodle: Option<String>,
    /// Offset half-range L; profiles drop at offsets in (-L, L).
    #[arg(long = "L")]
    big_l: Option<f64>,
    /// Offset quadrature steps.
    #[arg(long = "tau-steps")]
    tau_steps: Option<usize>,
    #[arg(long)]
    angles: Option<usize>,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args, Debug)]
struct PairsArgs {
    #[arg(long)]
    n: Option<u32>,
    /// Force exact enumeration (the default when --samples is absent).
    #[arg(long, conflicts_with = "samples")]
    exact: bool,
    /// Sample this many distinct pairs instead of enumerating.
    #[arg(long)]
    samples: Option<u64>,
    #[arg(long)]
    seed: Option<u64>,
    /// Count classes across all shear angles of this noodle.
    #[arg(long)]
    noodle: Option<String>,
    /// Shear-angle grid nodes for the distorted table.
    #[arg(long)]
    angles: Option<usize>,
    /// CSV destination (j, k, count, ratio).
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args, Debug)]
struct RhoArgs {
    #[arg(long)]
    n: Option<u32>,
    #[arg(long)]
    noodle: Option<String>,
    /// Number of classified pairs to sample.
    #[arg(long)]
    pairs: Option<u64>,
    #[arg(long)]
    seed: Option<u64>,
    /// CSV destination (qAddress, qPrimeAddress, j, k, rho, score,
    /// thetaSupport).
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args, Debug)]
struct VerifyBvArgs {
    #[arg(long)]
    n: Option<u32>,
    #[arg(long)]
    noodle: Option<String>,
    /// Background angle nodes for the composite grid.
    #[arg(long)]
    angles: Option<usize>,
    /// Minimum nodes per cone.
    #[arg(long = "min-cone-nodes")]
    min_cone_nodes: Option<usize>,
    #[arg(long)]
    out: Option<PathBuf>,
    /// Output format for --out: csv (default) or json.
    #[arg(long)]
    format: Option<String>,
}

/// Applies FAVARD_LAB_THREADS to the global worker pool, once.
pub fn configure_threads_from_env() {
    if let Ok(raw) = std::env::var("FAVARD_LAB_THREADS") {
        match raw.parse::<usize>() {
            Ok(t) if t >= 1 => {
                let _ = rayon::ThreadPoolBuilder::new().num_threads(t).build_global();
            }
            _ => eprintln!("warning: ignoring FAVARD_LAB_THREADS={raw} (want a positive integer)"),
        }
    }
}

/// Parses argv and runs one subcommand, returning the exit code.
pub fn run_cli<I, T>(argv: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(cli) => cli,
        Err(e) => {
            let code = match e.kind() {
                clap::error::ErrorKind::DisplayHelp | clap::error::ErrorKind::DisplayVersion => 0,
                _ => 1,
            };
            let _ = e.print();
            return code;
        }
    };
    configure_threads_from_env();
    let config = match &cli.config {
        Some(path) => match RunConfig::load(path) {
            Ok(c) => c,
            Err(e) => {
                eprintln!("error: {e}");
                return e.exit_code();
            }
        },
        None => RunConfig::default(),
    };
    let outcome = match cli.command {
        Command::Generate(a) => cmd_generate(a, &config),
        Command::Project(a) => cmd_project(a, &config),
        Command::Favard(a) => cmd_favard(a, &config),
        Command::BuffonCircle(a) => cmd_buffon_circle(a, &config),
        Command::BuffonNoodle(a) => cmd_buffon_noodle(a, &config),
        Command::Pairs(a) => cmd_pairs(a, &config),
        Command::Rho(a) => cmd_rho(a, &config),
        Command::VerifyBv(a) => cmd_verify_bv(a, &config),
    };
    match outcome {
        Ok(()) => 0,
        Err(e) => {
            eprintln!("error: {e}");
            e.exit_code()
        }
    }
}

/// Flag value if given, else the config-file value under `key`.
fn resolve<T>(flag: Option<T>, config: &RunConfig, key: &str) -> Result<Option<T>>
where
    T: std::str::FromStr,
    T::Err: std::fmt::Display,
{
    match flag {
        Some(v) => Ok(Some(v)),
        None => config.parsed(key),
    }
}

fn require<T>(value: Option<T>, what: &str) -> Result<T> {
    value.ok_or_else(|| Error::validation(format!("missing required value: {what}")))
}

fn resolve_noodle(flag: Option<String>, config: &RunConfig) -> Result<Noodle> {
    match resolve(flag, config, "noodle")? {
        Some(spec) => spec.parse(),
        None => Ok(Noodle::zero()),
    }
}

fn resolve_out(flag: Option<PathBuf>, config: &RunConfig) -> Result<Option<PathBuf>> {
    resolve(flag, config, "out")
}

fn write_text(path: &Path, text: &str) -> Result<()> {
    std::fs::write(path, text).map_err(|e| Error::io(path.display().to_string(), e))
}

/// One row of the shared measurement schema
/// (method, n, noodle, value, stderr, nodes, seed).
struct Measurement {
    method: &'static str,
    n: u32,
    noodle: String,
    value: f64,
    stderr: Option<f64>,
    nodes: u64,
    seed: Option<u64>,
}

impl Measurement {
    fn csv(&self) -> String {
        let stderr = self.stderr.map_or(String::new(), |s| format!("{s:.16e}"));
        let seed = self.seed.map_or(String::new(), |s| s.to_string());
        format!(
            "method,n,noodle,value,stderr,nodes,seed\n{},{},{},{:.16e},{},{},{}\n",
            self.method, self.n, self.noodle, self.value, stderr, self.nodes, seed
        )
    }

    fn print(&self) {
        println!("method      {}", self.method);
        println!("n           {}", self.n);
        println!("noodle      {}", self.noodle);
        println!("value       {:.12}", self.value);
        if let Some(s) = self.stderr {
            println!("stderr      {s:.12}");
        }
        println!("nodes       {}", self.nodes);
        if let Some(s) = self.seed {
            println!("seed        {s}");
        }
    }
}

const STDOUT_ROW_CAP: usize = 64;

fn cmd_generate(args: GenerateArgs, config: &RunConfig) -> Result<()> {
    let n = require(resolve(args.n, config, "n")?, "--n")?;
    let ks = crate::cantor::build_generation(n)?;
    println!("generation {n}: {} squares of side {}", ks.len(), ks.squares()[0].side());
    println!("{:<14} {:<22} {:<22} side", "address", "x0", "y0");
    for sq in ks.iter().take(STDOUT_ROW_CAP) {
        println!(
            "{:<14} {:<22} {:<22} {}",
            sq.address_string(),
            sq.anchor().0,
            sq.anchor().1,
            sq.side()
        );
    }
    if ks.len() > STDOUT_ROW_CAP {
        println!("... {} more rows (write them with --out)", ks.len() - STDOUT_ROW_CAP);
    }
    if let Some(path) = resolve_out(args.out, config)? {
        let mut text = String::from("address,x0,y0,side\n");
        for sq in ks.iter() {
            writeln!(
                text,
                "{},{},{},{}",
                sq.address_string(),
                sq.anchor().0,
                sq.anchor().1,
                sq.side()
            )
            .expect("string write");
        }
        write_text(&path, &text)?;
        println!("wrote {}", path.display());
    }
    Ok(())
}

fn cmd_project(args: ProjectArgs, config: &RunConfig) -> Result<()> {
    let n = require(resolve(args.n, config, "n")?, "--n")?;
    let theta = require(resolve(args.theta, config, "theta")?, "--theta")?;
    let frame = resolve(args.frame, config, "frame")?.unwrap_or_else(|| "standard".into());
    let d = match frame.as_str() {
        "standard" => Direction::standard(theta),
        "special" => Direction::special(theta),
        other => {
            return Err(Error::validation(format!(
                "unknown frame `{other}` (expected standard or special)"
            )))
        }
    };
    let g = resolve_noodle(args.noodle, config)?;
    let ks = crate::cantor::build_generation(n)?;
    let profile = crate::favard::projection_profile(&ks, &g, d);
    println!(
        "n {n}  theta {theta} ({frame} frame)  noodle {}",
        g.spec_string()
    );
    println!(
        "support {:.12}  mass {:.12}  second moment {:.12}  max multiplicity {}",
        profile.support_length(),
        profile.mass(),
        profile.second_moment(),
        profile.max_multiplicity()
    );
    println!("{:<22} {:<22} count", "lo", "hi");
    let pieces: Vec<_> = profile.pieces().collect();
    for (iv, count) in pieces.iter().take(STDOUT_ROW_CAP) {
        println!("{:<22} {:<22} {}", iv.lo, iv.hi, count);
    }
    if pieces.len() > STDOUT_ROW_CAP {
        println!("... {} more pieces (write them with --out)", pieces.len() - STDOUT_ROW_CAP);
    }
    if let Some(path) = resolve_out(args.out, config)? {
        let mut text = String::from("lo,hi,count\n");
        for (iv, count) in &pieces {
            writeln!(text, "{},{},{}", iv.lo, iv.hi, count).expect("string write");
        }
        write_text(&path, &text)?;
        println!("wrote {}", path.display());
    }
    Ok(())
}

fn cmd_favard(args: FavardArgs, config: &RunConfig) -> Result<()> {
    let n = require(resolve(args.n, config, "n")?, "--n")?;
    let angles = resolve(args.angles, config, "angles")?.unwrap_or(2048);
    let g = resolve_noodle(args.noodle, config)?;
    // the zero profile is half-turn periodic; other profiles need the
    // full circle
    let domain = if g.is_zero() {
        AngleDomain::HalfTurn
    } else {
        AngleDomain::FullTurn
    };
    let grid = AngleGrid::new(domain, angles)?;
    let ks = crate::cantor::build_generation(n)?;
    let value = favard_length(&ks, &g, &grid);
    let row = Measurement {
        method: "favard",
        n,
        noodle: g.spec_string(),
        value,
        stderr: None,
        nodes: angles as u64,
        seed: None,
    };
    row.print();
    if let Some(path) = resolve_out(args.out, config)? {
        write_text(&path, &row.csv())?;
        println!("wrote {}", path.display());
    }
    Ok(())
}

fn cmd_buffon_circle(args: BuffonCircleArgs, config: &RunConfig) -> Result<()> {
    let n = require(resolve(args.n, config, "n")?, "--n")?;
    let r = require(resolve(args.r, config, "r")?, "--r")?;
    let quadrature = args.quadrature || config.parsed::<bool>("quadrature")?.unwrap_or(false);
    let row = if quadrature {
        let angles = resolve(args.angles, config, "angles")?.unwrap_or(2048);
        let grid = AngleGrid::new(AngleDomain::FullTurn, angles)?;
        let value = buffon_circle_quadrature(n, r, &grid)?;
        Measurement {
            method: "buffon-circle-quadrature",
            n,
            noodle: format!("circle:r={r}"),
            value,
            stderr: None,
            nodes: angles as u64,
            seed: None,
        }
    } else {
        let samples = resolve(args.samples, config, "samples")?.unwrap_or(1_000_000);
        let seed = resolve(args.seed, config, "seed")?.unwrap_or(0);
        let est = buffon_circle_mc(n, r, samples, seed)?;
        Measurement {
            method: "buffon-circle-mc",
            n,
            noodle: format!("circle:r={r}"),
            value: est.value,
            stderr: Some(est.standard_error),
            nodes: est.samples,
            seed: Some(est.seed),
        }
    };
    row.print();
    if let Some(path) = resolve_out(args.out, config)? {
        write_text(&path, &row.csv())?;
        println!("wrote {}", path.display());
    }
    Ok(())
}

fn cmd_buffon_noodle(args: BuffonNoodleArgs, config: &RunConfig) -> Result<()> {
    let n = require(resolve(args.n, config, "n")?, "--n")?;
    let g = resolve_noodle(args.noodle, config)?;
    let big_l = resolve(args.big_l, config, "L")?.unwrap_or(12.0);
    let tau_steps = resolve(args.tau_steps, config, "tau-steps")?.unwrap_or(64);
    let angles = resolve(args.angles, config, "angles")?.unwrap_or(2048);
    let grid = AngleGrid::new(AngleDomain::FullTurn, angles)?;
    let value = buffon_noodle(n, &g, big_l, tau_steps, &grid)?;
    let row = Measurement {
        method: "buffon-noodle",
        n,
        noodle: g.spec_string(),
        value,
        stderr: None,
        nodes: (angles * tau_steps) as u64,
        seed: None,
    };
    row.print();
    if let Some(path) = resolve_out(args.out, config)? {
        write_text(&path, &row.csv())?;
        println!("wrote {}", path.display());
    }
    Ok(())
}

fn cmd_pairs(args: PairsArgs, config: &RunConfig) -> Result<()> {
    let n = require(resolve(args.n, config, "n")?, "--n")?;
    let ks = crate::cantor::build_generation(n)?;
    let samples = resolve(args.samples, config, "samples")?;
    let noodle = resolve(args.noodle, config, "noodle")?;
    let table = match (&noodle, samples) {
        (Some(spec), None) => {
            let g: Noodle = spec.parse()?;
            let angles = resolve(args.angles, config, "angles")?.unwrap_or(2048);
            let grid = AngleGrid::new(AngleDomain::FullTurn, angles)?;
            distorted_pair_table(&ks, &g, &grid)?
        }
        (Some(_), Some(_)) => {
            return Err(Error::validation(
                "distorted tables enumerate exactly; drop --samples or --noodle",
            ))
        }
        (None, Some(samples)) => {
            let seed = resolve(args.seed, config, "seed")?.unwrap_or(0);
            pair_table(&ks, TableMode::Sampled { samples, seed })?
        }
        (None, None) => pair_table(&ks, TableMode::Exact)?,
    };
    let ratios = bound_ratios(&table);
    println!(
        "n {n}  pairs {}  degenerate {}  classes {}  max ratio {:.6}",
        table.total_pairs(),
        table.degenerate(),
        ratios.ratios.len(),
        ratios.max_ratio
    );
    if table.is_multi() {
        println!("(distorted table: one pair may land in several classes)");
    }
    println!("{:>4} {:>4} {:>16} {:>12}", "j", "k", "count", "ratio");
    for ((j, k), count) in table.classes() {
        println!(
            "{j:>4} {k:>4} {count:>16} {:>12.6}",
            ratios.ratios[&(j, k)]
        );
    }
    if let Some(path) = resolve_out(args.out, config)? {
        let mut text = String::from("j,k,count,ratio\n");
        for ((j, k), count) in table.classes() {
            writeln!(text, "{j},{k},{count},{}", ratios.ratios[&(j, k)]).expect("string write");
        }
        write_text(&path, &text)?;
        println!("wrote {}", path.display());
    }
    Ok(())
}

fn cmd_rho(args: RhoArgs, config: &RunConfig) -> Result<()> {
    let n = require(resolve(args.n, config, "n")?, "--n")?;
    let g = resolve_noodle(args.noodle, config)?;
    let pairs = resolve(args.pairs, config, "pairs")?.unwrap_or(500);
    let seed = resolve(args.seed, config, "seed")?.unwrap_or(0);
    let ks = crate::cantor::build_generation(n)?;
    let survey = rho_bound_survey(&ks, &g, pairs, seed)?;
    println!(
        "n {n}  noodle {}  rows {}  degenerate skipped {}  max score {:.6}",
        survey.noodle,
        survey.rows.len(),
        survey.degenerate_skipped,
        survey.max_score
    );
    if let Some(t) = survey.theta_score_max {
        println!("theta-support score max {t:.6}");
    }
    for (k, score) in &survey.per_k_max {
        println!("  k={k}: max score {score:.6}");
    }
    for row in survey.rows.iter().take(16) {
        println!(
            "  {} {} j={} k={} rho={:.3e} score={:.4}",
            row.q, row.q2, row.j, row.k, row.rho, row.score
        );
    }
    if survey.rows.len() > 16 {
        println!("  ... {} more rows (write them with --out)", survey.rows.len() - 16);
    }
    if let Some(path) = resolve_out(args.out, config)? {
        let mut text = String::from("qAddress,qPrimeAddress,j,k,rho,score,thetaSupport\n");
        for row in &survey.rows {
            writeln!(
                text,
                "{},{},{},{},{},{},{}",
                row.q, row.q2, row.j, row.k, row.rho, row.score, row.theta_support
            )
            .expect("string write");
        }
        write_text(&path, &text)?;
        println!("wrote {}", path.display());
    }
    Ok(())
}

fn cmd_verify_bv(args: VerifyBvArgs, config: &RunConfig) -> Result<()> {
    let n = require(resolve(args.n, config, "n")?, "--n")?;
    let g = resolve_noodle(args.noodle, config)?;
    let mut bv = BvConfig::default();
    if let Some(b) = resolve(args.angles, config, "angles")? {
        bv.background_nodes = b;
    }
    if let Some(m) = resolve(args.min_cone_nodes, config, "min-cone-nodes")? {
        bv.min_cone_nodes = m;
    }
    let report = bv_report(n, &g, &bv)?;
    println!(
        "n {n}  noodle {}  grid {}+{}",
        report.summary.noodle, bv.background_nodes, bv.min_cone_nodes
    );
    println!(
        "{:>3} {:>14} {:>14} {:>14} {:>14} {:>9}",
        "j", "m1", "m2", "e", "cauchy_lb", "in_range"
    );
    for row in &report.rows {
        println!(
            "{:>3} {:>14.6e} {:>14.6e} {:>14.6e} {:>14.6e} {:>9}",
            row.j, row.m1, row.m2, row.e, row.cauchy_lb, row.in_range
        );
    }
    let s = &report.summary;
    println!(
        "favard {:.9}  score {:.6}  sum e (in range) {:.6}  sum e (all) {:.6}  out of cone {:.6}  (log base {})",
        s.favard, s.score, s.sum_e_in_range, s.sum_e_all, s.out_of_cone, s.log_base
    );
    if let Some(path) = resolve_out(args.out, config)? {
        let format: ReportFormat = resolve(args.format, config, "format")?
            .unwrap_or_else(|| "csv".into())
            .parse()?;
        emit_report(&report, &path, format)?;
        println!("wrote {}", path.display());
    }
    Ok(())
}
