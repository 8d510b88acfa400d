//! `randomset-lab` command line: sampling, verification runs and report
//! summaries.
//!
//! Exit codes: 0 success, 1 failing points or missing reports, 2 unknown
//! check id, 3 numerical failure or bad input.

use std::collections::BTreeMap;
use std::ffi::OsString;
use std::fs;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use ini::Ini;
use serde_json::Value;

use crate::brownian::{sample_zero_summary, SeedParams};
use crate::closedset::fmt17;
use crate::error::{Error, Result};
use crate::poisson::{sample_poisson, PoissonModel};
use crate::rng::par_draws;
use crate::tilt::sample_seed;
use crate::verify::{claim_of, default_kernel_cases, dyadic_lambdas, run_all, write_kernel_table, BoundReport, Grids, CHECK_IDS};

pub const OUT_ENV: &str = "RANDOMSET_LAB_OUT";
pub const MIN_SAMPLES: usize = 10_000;

#[derive(Debug, Parser)]
#[command(name = "randomset-lab", version, about = "Samplers and numerical checks for random closed sets")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Draw samples and write them as CSV.
    Sample(SampleArgs),
    /// Run one check, or `all`, and write JSON and CSV reports.
    Verify(VerifyArgs),
    /// Summarize a directory of reports.
    Report(ReportArgs),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum SampleKind {
    Poisson,
    Brownian,
    Seed,
}

#[derive(Debug, Args)]
pub struct SampleArgs {
    pub kind: SampleKind,
    #[arg(long)]
    pub seed: u64,
    #[arg(long, default_value_t = 10)]
    pub n: usize,
    #[arg(long, default_value_t = 1.0)]
    pub t: f64,
    #[arg(long, default_value_t = 1.0)]
    pub lambda: f64,
    /// Mark weights, comma separated.
    #[arg(long, default_value = "1")]
    pub weights: String,
    #[arg(long, default_value_t = 1.0)]
    pub a: f64,
    #[arg(long, default_value_t = 1.0)]
    pub beta: f64,
    /// Output file; stdout when absent.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct VerifyArgs {
    /// Check id or `all`.
    pub check: String,
    #[arg(long)]
    pub config: Option<PathBuf>,
    #[arg(long)]
    pub seed: Option<u64>,
    #[arg(long)]
    pub n_samples: Option<usize>,
    /// Monte Carlo draws per λ for the block sweeps.
    #[arg(long)]
    pub block_n: Option<usize>,
    #[arg(long)]
    pub out_dir: Option<PathBuf>,
    #[arg(long)]
    pub jobs: Option<usize>,
}

#[derive(Debug, Args)]
pub struct ReportArgs {
    pub in_dir: PathBuf,
}

/// Settings of a verification run after merging config, environment and flags.
#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub seed: u64,
    pub out_dir: PathBuf,
    pub n_samples: usize,
    pub grids: Grids,
    pub checks: Vec<String>,
    pub jobs: Option<usize>,
}

fn cfg_err(msg: impl Into<String>) -> Error {
    Error::Config(msg.into())
}

fn parse_value<T: std::str::FromStr>(section: &str, key: &str, v: &str) -> Result<T> {
    v.trim().parse().map_err(|_| cfg_err(format!("[{section}] {key}: cannot parse {v:?}")))
}

fn parse_list(section: &str, key: &str, v: &str) -> Result<Vec<f64>> {
    v.split(',').map(|x| parse_value(section, key, x)).collect()
}

/// Partial settings read from an INI file.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct FileConfig {
    pub seed: Option<u64>,
    pub out_dir: Option<PathBuf>,
    pub n_samples: Option<usize>,
    pub checks: Option<Vec<String>>,
    pub jobs: Option<usize>,
    pub grids: Grids,
}

impl FileConfig {
    pub fn parse(text: &str) -> Result<Self> {
        let ini = Ini::load_from_str(text).map_err(|e| cfg_err(e.to_string()))?;
        let mut out = FileConfig::default();
        for (section, props) in ini.iter() {
            let section = section.unwrap_or("run");
            for (key, v) in props.iter() {
                let g = &mut out.grids;
                match (section, key) {
                    ("run", "seed") => out.seed = Some(parse_value(section, key, v)?),
                    ("run", "out_dir") => out.out_dir = Some(PathBuf::from(v.trim())),
                    ("run", "n_samples") => out.n_samples = Some(parse_value(section, key, v)?),
                    ("run", "jobs") => out.jobs = Some(parse_value(section, key, v)?),
                    ("run", "checks") => out.checks = Some(v.split(',').map(|c| c.trim().to_string()).filter(|c| !c.is_empty()).collect()),
                    ("seed", "a") => g.seed_params.a = parse_value(section, key, v)?,
                    ("seed", "beta") => g.seed_params.beta = parse_value(section, key, v)?,
                    ("grid", "lambda_k") => {
                        let ks: Vec<f64> = parse_list(section, key, v)?;
                        if ks.len() != 2 || ks.iter().any(|k| k.fract() != 0.0) {
                            return Err(cfg_err("[grid] lambda_k expects two integers lo,hi"));
                        }
                        g.lambdas = dyadic_lambdas(ks[0] as i32, ks[1] as i32);
                    }
                    ("grid", "s") => g.s = parse_value(section, key, v)?,
                    ("grid", "t") => g.t = parse_value(section, key, v)?,
                    ("grid", "c") => g.tv_c = parse_list(section, key, v)?,
                    ("grid", "horizons") => g.tv_s = parse_list(section, key, v)?,
                    ("grid", "tail_fractions") => g.tail_fractions = parse_list(section, key, v)?,
                    ("grid", "u") => g.u_grid = parse_list(section, key, v)?,
                    ("grid", "overlap_t") => g.overlap_t = parse_list(section, key, v)?,
                    ("grid", "kakutani_n") => g.kakutani_n = parse_value(section, key, v)?,
                    ("grid", "block_n") => g.block_n = parse_value(section, key, v)?,
                    ("grid", "factorization_n") => g.factorization_n = parse_value(section, key, v)?,
                    _ => return Err(cfg_err(format!("unknown key [{section}] {key}"))),
                }
            }
        }
        SeedParams::new(out.grids.seed_params.a, out.grids.seed_params.beta)?;
        Ok(out)
    }
}

impl RunConfig {
    /// Precedence: config file < `RANDOMSET_LAB_OUT` < command line flags.
    pub fn resolve(args: &VerifyArgs, env_out: Option<OsString>) -> Result<Self> {
        let file = match &args.config {
            Some(p) => FileConfig::parse(&fs::read_to_string(p)?)?,
            None => FileConfig::default(),
        };
        let seed = args.seed.or(file.seed).ok_or_else(|| cfg_err("a seed is required (--seed or [run] seed)"))?;
        let out_dir = args
            .out_dir
            .clone()
            .or(env_out.map(PathBuf::from))
            .or(file.out_dir)
            .unwrap_or_else(|| PathBuf::from("reports"));
        let n_samples = args.n_samples.or(file.n_samples).unwrap_or(1_000_000);
        if n_samples < MIN_SAMPLES {
            return Err(cfg_err(format!("n_samples must be at least {MIN_SAMPLES}, got {n_samples}")));
        }
        let mut grids = file.grids;
        if let Some(b) = args.block_n {
            grids.block_n = b;
        }
        if grids.block_n < MIN_SAMPLES {
            return Err(cfg_err(format!("block_n must be at least {MIN_SAMPLES}")));
        }
        let checks = if args.check == "all" {
            file.checks.unwrap_or_else(|| CHECK_IDS.iter().map(|s| s.to_string()).collect())
        } else {
            vec![args.check.clone()]
        };
        Ok(Self { seed, out_dir, n_samples, grids, checks, jobs: args.jobs.or(file.jobs) })
    }
}

/// Entry point used by the binary; returns the process exit code.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { 3 } else { 0 };
        }
    };
    match cli.command {
        Command::Sample(a) => report_err(cmd_sample(&a).map(|_| 0)),
        Command::Verify(a) => cmd_verify(&a),
        Command::Report(a) => cmd_report(&a.in_dir),
    }
}

fn report_err(r: Result<i32>) -> i32 {
    r.unwrap_or_else(|e| {
        eprintln!("error: {e}");
        exit_code(&e)
    })
}

fn exit_code(e: &Error) -> i32 {
    match e {
        Error::UnknownCheck(_) => 2,
        _ => 3,
    }
}

/// Write samples as CSV to `args.out` or stdout.
pub fn cmd_sample(args: &SampleArgs) -> Result<()> {
    let writer: Box<dyn std::io::Write> = match &args.out {
        Some(p) => Box::new(fs::File::create(p)?),
        None => Box::new(std::io::stdout().lock()),
    };
    let mut w = csv::Writer::from_writer(writer);
    match args.kind {
        SampleKind::Poisson => {
            let weights = args
                .weights
                .split(',')
                .map(|x| x.trim().parse::<f64>().map_err(|_| Error::InvalidArgument(format!("bad weight {x:?}"))))
                .collect::<Result<Vec<_>>>()?;
            let model = PoissonModel::new(args.lambda, weights)?;
            sample_poisson(&model, args.t, &mut crate::rng::substream(args.seed, 0))?;
            let rows = par_draws(args.seed, args.n, |r| sample_poisson(&model, args.t, r).expect("validated"));
            w.write_record(["seed", "t", "lambda", "count", "times", "marks"])?;
            for z in rows {
                let times: Vec<String> = z.atoms().iter().map(|a| fmt17(a.time)).collect();
                let marks: Vec<String> = z.atoms().iter().map(|a| a.mark.to_string()).collect();
                w.write_record([args.seed.to_string(), fmt17(args.t), fmt17(args.lambda), z.len().to_string(), times.join(";"), marks.join(";")])?;
            }
        }
        SampleKind::Brownian => {
            sample_zero_summary(args.a, args.t, &mut crate::rng::substream(args.seed, 0))?;
            let rows = par_draws(args.seed, args.n, |r| sample_zero_summary(args.a, args.t, r).expect("validated"));
            w.write_record(["seed", "t", "empty", "alpha", "g_last"])?;
            for z in rows {
                w.write_record([
                    args.seed.to_string(),
                    fmt17(args.t),
                    z.is_empty().to_string(),
                    z.alpha().map_or(String::new(), fmt17),
                    z.g_last().map_or(String::new(), fmt17),
                ])?;
            }
        }
        SampleKind::Seed => {
            let p = SeedParams::new(args.a, args.beta)?;
            sample_seed(&p, args.t, &mut crate::rng::substream(args.seed, 0))?;
            let rows = par_draws(args.seed, args.n, |r| sample_seed(&p, args.t, r).expect("validated"));
            w.write_record(["t", "beta", "a", "empty", "alpha", "dm"])?;
            for z in rows {
                w.write_record([
                    fmt17(args.t),
                    fmt17(args.beta),
                    fmt17(args.a),
                    z.is_empty().to_string(),
                    z.alpha().map_or(String::new(), fmt17),
                    if z.is_empty() { String::new() } else { fmt17(z.dm()) },
                ])?;
            }
        }
    }
    w.flush()?;
    Ok(())
}

/// Run the requested checks and write reports; returns the exit code.
pub fn cmd_verify(args: &VerifyArgs) -> i32 {
    if args.check != "all" && !CHECK_IDS.contains(&args.check.as_str()) {
        eprintln!("error: unknown check {:?}; expected one of {} or all", args.check, CHECK_IDS.join(", "));
        return 2;
    }
    let cfg = match RunConfig::resolve(args, std::env::var_os(OUT_ENV)) {
        Ok(c) => c,
        Err(e) => return report_err(Err(e)),
    };
    if let Some(id) = cfg.checks.iter().find(|c| !CHECK_IDS.contains(&c.as_str())) {
        eprintln!("error: unknown check {id:?} in config");
        return 2;
    }
    let pool = match rayon::ThreadPoolBuilder::new().num_threads(cfg.jobs.unwrap_or(0)).build() {
        Ok(p) => p,
        Err(e) => return report_err(Err(Error::Config(e.to_string()))),
    };
    let results = pool.install(|| run_all(&cfg.checks, &cfg.grids, cfg.n_samples, cfg.seed));
    verify_outcome(&cfg.out_dir, results)
}

/// Write reports, print one summary line per check and pick the exit code.
pub fn verify_outcome(out_dir: &Path, results: Vec<(String, Result<BoundReport>)>) -> i32 {
    let mut code = 0;
    for (id, r) in results {
        match r {
            Ok(rep) => {
                if let Err(e) = rep.write(out_dir) {
                    eprintln!("error: writing {id}: {e}");
                    code = code.max(3);
                    continue;
                }
                if id == "poisson-kernel" {
                    let table = default_kernel_cases().and_then(|c| write_kernel_table(&out_dir.join("poisson-kernel-table.csv"), &c, &rep));
                    if let Err(e) = table {
                        eprintln!("error: writing kernel table: {e}");
                        code = code.max(3);
                    }
                }
                let ok = rep.all_pass();
                println!(
                    "{:<22} {}  points {}/{}  worstMargin {}",
                    id,
                    if ok { "PASS" } else { "FAIL" },
                    rep.pass.iter().filter(|p| **p).count(),
                    rep.pass.len(),
                    fmt17(rep.worst_margin())
                );
                if !ok {
                    for i in rep.failing_points() {
                        eprintln!("  {id} failing point {:?}: actual {} bound {}", rep.params[i], fmt17(rep.actual[i]), fmt17(rep.bound[i]));
                    }
                    for c in rep.criteria.iter().filter(|c| !c.pass) {
                        eprintln!("  {id} failing criterion {}: {}", c.name, fmt17(c.value));
                    }
                    let numerical = rep.actual.iter().any(|a| !a.is_finite());
                    code = code.max(if numerical { 3 } else { 1 });
                }
            }
            Err(e) => {
                println!("{id:<22} ERROR  {e}");
                code = 3;
            }
        }
    }
    code
}

/// Per-check plot data plus `summary.md`; exit 1 when reports are missing.
pub fn cmd_report(in_dir: &Path) -> i32 {
    match build_report(in_dir) {
        Ok(missing) if missing.is_empty() => 0,
        Ok(missing) => {
            eprintln!("missing reports: {}", missing.join(", "));
            1
        }
        Err(e) => {
            eprintln!("error: {e}");
            1
        }
    }
}

/// Returns the check ids without a report.
pub fn build_report(in_dir: &Path) -> Result<Vec<String>> {
    let mut reports: BTreeMap<String, Value> = BTreeMap::new();
    if in_dir.is_dir() {
        for id in CHECK_IDS {
            let p = in_dir.join(format!("{id}.json"));
            if p.is_file() {
                reports.insert(id.to_string(), serde_json::from_str(&fs::read_to_string(p)?)?);
            }
        }
    }
    let missing: Vec<String> = CHECK_IDS.iter().filter(|id| !reports.contains_key(**id)).map(|s| s.to_string()).collect();
    if reports.is_empty() {
        return Ok(missing);
    }
    let plot_dir = in_dir.join("plots");
    fs::create_dir_all(&plot_dir)?;
    let mut md = String::from("# Verification summary\n\n| check | claim | result | worst margin | slope | r2 |\n|---|---|---|---|---|---|\n");
    for (id, rep) in &reports {
        write_plot_csv(&plot_dir.join(format!("{id}.csv")), rep)?;
        let cell = |k: &str| rep.get(k).filter(|v| !v.is_null()).map_or("".to_string(), |v| v.to_string());
        let pass = rep.get("allPass").and_then(Value::as_bool).unwrap_or(false);
        md.push_str(&format!(
            "| {id} | {} | {} | {} | {} | {} |\n",
            claim_of(id).unwrap_or(""),
            if pass { "pass" } else { "FAIL" },
            cell("worstMargin"),
            cell("slope"),
            cell("r2")
        ));
    }
    for (id, rep) in &reports {
        md.push_str(&format!("\n## {id}\n\n"));
        if let Some(crit) = rep.get("criteria").and_then(Value::as_array) {
            for c in crit {
                md.push_str(&format!(
                    "- {}: {} ({})\n",
                    c["name"].as_str().unwrap_or(""),
                    c["value"],
                    if c["pass"].as_bool().unwrap_or(false) { "pass" } else { "FAIL" }
                ));
            }
        }
        if let Some(fits) = rep.get("fits").and_then(Value::as_object) {
            for (name, f) in fits {
                md.push_str(&format!("- fit {name}: slope {}, r2 {}\n", f["slope"], f["r2"]));
            }
        }
    }
    fs::write(in_dir.join("summary.md"), md)?;
    Ok(missing)
}

const X_KEYS: [&str; 6] = ["lambda", "u", "N", "t", "c", "case"];

fn write_plot_csv(path: &Path, rep: &Value) -> Result<()> {
    let arr = |k: &str| rep.get(k).and_then(Value::as_array).cloned().unwrap_or_default();
    let params = arr("params");
    let (bound, actual, stderr) = (arr("bound"), arr("actual"), arr("stderr"));
    let key = params
        .first()
        .and_then(Value::as_object)
        .and_then(|m| X_KEYS.iter().find(|k| m.contains_key(**k)).map(|k| k.to_string()));
    let mut w = csv::Writer::from_path(path)?;
    w.write_record(["x", "y", "yerr", "bound"])?;
    let s = |v: Option<&Value>| v.filter(|v| !v.is_null()).map_or(String::new(), Value::to_string);
    for (i, y) in actual.iter().enumerate() {
        let x = match &key {
            Some(k) => s(params.get(i).and_then(|p| p.get(k))),
            None => i.to_string(),
        };
        w.write_record([x, s(Some(y)), s(stderr.get(i)), s(bound.get(i))])?;
    }
    w.flush()?;
    Ok(())
}
