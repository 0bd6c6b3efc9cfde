//! `sarp`: generate instances, solve them, check small ones against the exact
//! front and evaluate batches of runs.
//!
//! Exit codes: 0 success, 1 I/O or bad input file, 2 usage, 3 oracle limits,
//! 4 failed check (front mismatch or audit violation).

use std::collections::BTreeMap;
use std::fs::{self, File};
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::Duration;

use anyhow::{anyhow, Context};
use chrono::{DateTime, Utc};
use clap::{Parser, Subcommand, ValueEnum};
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use sarp_core::coverage::Objectives;
use sarp_core::eval::{
    build_reference, compare_to_published, coverage_fractions, maxmin_equivalence_histogram, EvalError,
};
use sarp_core::instance::{generate_instance, GeneratorParams, Instance, Layout, DEFAULT_GENERATOR_SPEED};
use sarp_core::io::{archive_from_records, read_records, write_archive, write_records, SolutionRecord};
use sarp_core::mdls::{mdls_run, Configuration, SearchConfig};
use sarp_core::oracle::{enumerate_pareto, verify_points, OracleError, OracleLimits};

#[derive(Debug, Parser)]
#[command(name = "sarp", version, about = "Bi-objective selective assessment routing solver")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum LayoutArg {
    R,
    Rc,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Write a random (r) or random-clustered (rc) instance.
    Generate {
        #[arg(long)]
        sites: usize,
        #[arg(long)]
        chars: usize,
        #[arg(long)]
        teams: usize,
        #[arg(long)]
        tmax: f64,
        #[arg(long, value_enum)]
        layout: LayoutArg,
        #[arg(long)]
        seed: u64,
        #[arg(long, default_value_t = DEFAULT_GENERATOR_SPEED)]
        speed: f64,
        #[arg(long)]
        out: PathBuf,
    },
    /// Run the search; writes archive.jsonl, manifest.json and run_log.jsonl into --out.
    Solve {
        #[arg(long)]
        instance: PathBuf,
        /// all, leximin or max-min
        #[arg(long, default_value = "all")]
        config: Configuration,
        /// Wall-clock budget in seconds.
        #[arg(long)]
        time_limit: Option<f64>,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Iteration budget; gives reproducible runs when used without --time-limit.
        #[arg(long)]
        iterations: Option<u64>,
        #[arg(long)]
        out: PathBuf,
        /// Offer only each repair's final solution to the archive.
        #[arg(long)]
        final_only: bool,
    },
    /// Enumerate the exact Pareto front of a small instance.
    Oracle {
        #[arg(long)]
        instance: PathBuf,
        #[arg(long)]
        out: PathBuf,
        #[arg(long, default_value_t = OracleLimits::default().max_sites)]
        max_sites: usize,
        #[arg(long, default_value_t = OracleLimits::default().max_teams)]
        max_teams: usize,
        #[arg(long, default_value_t = OracleLimits::default().node_budget)]
        node_budget: u64,
    },
    /// Compare a candidate archive with an exact front.
    OracleVerify {
        #[arg(long)]
        candidate: PathBuf,
        #[arg(long)]
        exact: PathBuf,
    },
    /// Build a reference set from run archives and write evaluation CSVs.
    Evaluate {
        /// Glob matching archive files, e.g. 'runs/*/archive.jsonl'.
        #[arg(long)]
        runs: String,
        #[arg(long)]
        reference_out: PathBuf,
        #[arg(long, value_delimiter = ',', default_value = "0,1,2,3")]
        alphas: Vec<f64>,
        #[arg(long)]
        csv: PathBuf,
        /// Published max-min value to compare against.
        #[arg(long)]
        published: Option<f64>,
    },
}

#[derive(Debug)]
enum Failure {
    Io(anyhow::Error),
    Usage(anyhow::Error),
    Limits(anyhow::Error),
    Check(anyhow::Error),
}

impl Failure {
    fn code(&self) -> u8 {
        match self {
            Failure::Io(_) => 1,
            Failure::Usage(_) => 2,
            Failure::Limits(_) => 3,
            Failure::Check(_) => 4,
        }
    }

    fn error(&self) -> &anyhow::Error {
        match self {
            Failure::Io(e) | Failure::Usage(e) | Failure::Limits(e) | Failure::Check(e) => e,
        }
    }
}

impl From<anyhow::Error> for Failure {
    fn from(e: anyhow::Error) -> Self {
        Failure::Io(e)
    }
}

impl From<std::io::Error> for Failure {
    fn from(e: std::io::Error) -> Self {
        Failure::Io(e.into())
    }
}

type CmdResult = Result<(), Failure>;

#[derive(Debug, Serialize, Deserialize)]
struct RunManifest {
    instance_path: PathBuf,
    instance_name: String,
    instance_sha256: String,
    config: SearchConfig,
    started_at: DateTime<Utc>,
    finished_at: DateTime<Utc>,
    iterations: u64,
    elapsed_secs: f64,
    archive_path: PathBuf,
    archive_size: usize,
    audit_violations: usize,
}

fn sha256_file(path: &Path) -> anyhow::Result<String> {
    let bytes = fs::read(path).with_context(|| format!("reading {}", path.display()))?;
    Ok(hex::encode(Sha256::digest(&bytes)))
}

fn load_instance(path: &Path) -> Result<Instance, Failure> {
    Instance::load(path).map_err(|e| Failure::Io(anyhow!("{}: {e}", path.display())))
}

fn create(path: &Path) -> anyhow::Result<BufWriter<File>> {
    if let Some(parent) = path.parent().filter(|p| !p.as_os_str().is_empty()) {
        fs::create_dir_all(parent).with_context(|| format!("creating {}", parent.display()))?;
    }
    Ok(BufWriter::new(File::create(path).with_context(|| format!("creating {}", path.display()))?))
}

fn audit_requested() -> bool {
    std::env::var("SARP_DEBUG_AUDIT").is_ok_and(|v| v == "1")
}

#[allow(clippy::too_many_arguments)]
fn cmd_generate(
    sites: usize,
    chars: usize,
    teams: usize,
    tmax: f64,
    layout: LayoutArg,
    seed: u64,
    speed: f64,
    out: &Path,
) -> CmdResult {
    let layout = match layout {
        LayoutArg::R => Layout::Random,
        LayoutArg::Rc => Layout::RandomClustered,
    };
    let params = GeneratorParams { speed, ..GeneratorParams::new(sites, chars, teams, tmax, layout, seed) };
    let inst = generate_instance(&params).map_err(|e| Failure::Usage(anyhow!("{e}")))?;
    let mut w = create(out)?;
    w.write_all(inst.to_text().as_bytes())
        .and_then(|_| w.flush())
        .with_context(|| format!("writing {}", out.display()))?;
    println!("{} -> {}", inst.name(), out.display());
    Ok(())
}

fn cmd_solve(
    instance: &Path,
    config: Configuration,
    time_limit: Option<f64>,
    seed: u64,
    iterations: Option<u64>,
    out: &Path,
    final_only: bool,
) -> CmdResult {
    if time_limit.is_none() && iterations.is_none() {
        return Err(Failure::Usage(anyhow!("give --time-limit, --iterations or both")));
    }
    let time_limit = match time_limit {
        Some(t) if !(t.is_finite() && t >= 0.0) => return Err(Failure::Usage(anyhow!("bad --time-limit {t}"))),
        t => t.map(Duration::from_secs_f64),
    };
    let inst = load_instance(instance)?;
    let hash = sha256_file(instance)?;
    let mut cfg = SearchConfig::with_iterations(config, 0, seed);
    cfg.max_iterations = iterations;
    cfg.time_limit = time_limit;
    cfg.archive_intermediate = !final_only;
    cfg.audit = audit_requested();
    cfg.validate().map_err(|e| Failure::Usage(anyhow!(e)))?;

    fs::create_dir_all(out).with_context(|| format!("creating {}", out.display()))?;
    let started_at = Utc::now();
    let run = mdls_run(&inst, &cfg);
    let finished_at = Utc::now();

    let archive_path = out.join("archive.jsonl");
    let mut w = create(&archive_path)?;
    write_archive(&mut w, &inst, &run.archive).and_then(|_| w.flush())?;
    let mut log = create(&out.join("run_log.jsonl"))?;
    for segment in &run.segments {
        serde_json::to_writer(&mut log, segment).context("writing run log")?;
        log.write_all(b"\n")?;
    }
    log.flush()?;
    let manifest = RunManifest {
        instance_path: instance.to_path_buf(),
        instance_name: inst.name().to_string(),
        instance_sha256: hash,
        config: cfg,
        started_at,
        finished_at,
        iterations: run.iterations,
        elapsed_secs: run.elapsed.as_secs_f64(),
        archive_path: archive_path.clone(),
        archive_size: run.archive.len(),
        audit_violations: run.violations.len(),
    };
    let mut m = create(&out.join("manifest.json"))?;
    serde_json::to_writer_pretty(&mut m, &manifest).context("writing manifest")?;
    m.write_all(b"\n")?;
    m.flush()?;

    println!(
        "{}: {} iterations in {:.2} s, archive of {} -> {}",
        inst.name(),
        run.iterations,
        run.elapsed.as_secs_f64(),
        run.archive.len(),
        archive_path.display()
    );
    if !run.violations.is_empty() {
        for v in &run.violations {
            eprintln!("audit: {v}");
        }
        return Err(Failure::Check(anyhow!("{} audit violations", run.violations.len())));
    }
    Ok(())
}

fn cmd_oracle(instance: &Path, out: &Path, limits: OracleLimits) -> CmdResult {
    let inst = load_instance(instance)?;
    let front = enumerate_pareto(&inst, &limits).map_err(|e| match e {
        OracleError::LimitExceeded { .. } => Failure::Limits(anyhow!("{}: {e}", inst.name())),
    })?;
    let mut w = create(out)?;
    write_archive(&mut w, &inst, &front.archive).and_then(|_| w.flush())?;
    println!(
        "{}: {} plans, {} nodes, front of {} -> {}",
        inst.name(),
        front.plans,
        front.nodes,
        front.archive.len(),
        out.display()
    );
    Ok(())
}

fn load_points(path: &Path) -> Result<(String, Vec<Objectives>), Failure> {
    let records = read_records(path).map_err(|e| Failure::Io(anyhow!("{e}")))?;
    let name = records.first().map(|r| r.instance.clone()).unwrap_or_default();
    let points = records
        .iter()
        .map(SolutionRecord::objectives)
        .collect::<Result<_, _>>()
        .map_err(|e| Failure::Io(anyhow!("{}: {e}", path.display())))?;
    Ok((name, points))
}

/// Candidate entries are checked as written, so a dominated entry in the file counts.
fn cmd_oracle_verify(candidate: &Path, exact: &Path) -> CmdResult {
    let (cand_name, cand) = load_points(candidate)?;
    let (exact_name, exact_front) = load_points(exact)?;
    if !cand.is_empty() && !exact_front.is_empty() && cand_name != exact_name {
        return Err(Failure::Usage(anyhow!(
            "candidate solves {cand_name:?} but the exact front is for {exact_name:?}"
        )));
    }
    let report = verify_points(&cand, &exact_front);
    println!(
        "{{\"missing\":{},\"extra_dominated\":{},\"matched\":{},\"exact_size\":{},\"candidate_size\":{}}}",
        report.missing,
        report.extra_dominated,
        report.matched,
        exact_front.len(),
        cand.len()
    );
    if report.is_exact() {
        Ok(())
    } else {
        Err(Failure::Check(anyhow!("candidate front differs from the exact front")))
    }
}

/// Run metadata read from the manifest next to an archive, when there is one.
struct RunInfo {
    config: String,
    time_limit: String,
    run: String,
}

fn run_info(archive: &Path) -> RunInfo {
    let fallback = RunInfo { config: String::new(), time_limit: String::new(), run: archive.display().to_string() };
    let Some(dir) = archive.parent() else { return fallback };
    let Ok(text) = fs::read_to_string(dir.join("manifest.json")) else { return fallback };
    let Ok(m) = serde_json::from_str::<RunManifest>(&text) else { return fallback };
    RunInfo {
        config: m.config.configuration.name().to_string(),
        time_limit: m.config.time_limit.map(|t| format!("{}", t.as_secs_f64())).unwrap_or_default(),
        run: format!("{}#seed={}", dir.display(), m.config.seed),
    }
}

fn cmd_evaluate(runs: &str, reference_out: &Path, alphas: &[f64], csv_dir: &Path, published: Option<f64>) -> CmdResult {
    if alphas.iter().any(|a| !(a.is_finite() && *a >= 0.0 && *a < 100.0)) {
        return Err(Failure::Usage(anyhow!("alphas must lie in [0, 100)")));
    }
    let paths: Vec<PathBuf> = glob::glob(runs)
        .map_err(|e| Failure::Usage(anyhow!("bad --runs pattern: {e}")))?
        .collect::<Result<_, _>>()
        .context("listing runs")?;
    if paths.is_empty() {
        return Err(Failure::Io(anyhow!("no run files match {runs:?}")));
    }
    let mut inputs = Vec::new();
    for p in &paths {
        let records = read_records(p).map_err(|e| Failure::Io(anyhow!("{e}")))?;
        inputs.push((p.display().to_string(), records));
    }
    let reference = build_reference(&inputs).map_err(|e| match e {
        EvalError::MixedInstances(..) | EvalError::MixedDimensions(..) => Failure::Usage(anyhow!("{e}")),
        other => Failure::Io(anyhow!("{other}")),
    })?;
    let records: Vec<SolutionRecord> = reference.archive.iter().map(|e| e.item.clone()).collect();
    let mut w = create(reference_out)?;
    write_records(&mut w, &records).and_then(|_| w.flush())?;

    fs::create_dir_all(csv_dir).with_context(|| format!("creating {}", csv_dir.display()))?;
    let csv_err = |e: csv::Error| Failure::Io(anyhow!("writing CSV: {e}"));

    let mut fractions = csv::Writer::from_path(csv_dir.join("coverage_fractions.csv")).map_err(csv_err)?;
    fractions.write_record(["instance", "config", "time_limit", "run", "alpha", "fraction"]).map_err(csv_err)?;
    for ((_, records), path) in inputs.into_iter().zip(&paths) {
        let info = run_info(path);
        let assessed = archive_from_records(records).map_err(|e| Failure::Io(anyhow!("{}: {e}", path.display())))?;
        let report =
            coverage_fractions(&assessed, &reference.archive, alphas).map_err(|e| Failure::Io(anyhow!("{e}")))?;
        for (alpha, fraction) in report.alphas.iter().zip(&report.fractions) {
            fractions
                .write_record([
                    reference.instance.as_str(),
                    &info.config,
                    &info.time_limit,
                    &info.run,
                    &alpha.to_string(),
                    &format!("{fraction:.6}"),
                ])
                .map_err(csv_err)?;
        }
    }
    fractions.flush().context("writing coverage_fractions.csv")?;

    let hist = maxmin_equivalence_histogram(&reference.archive);
    let mut h = csv::Writer::from_path(csv_dir.join("maxmin_hist.csv")).map_err(csv_err)?;
    h.write_record(["instance", "min_ratio", "count"]).map_err(csv_err)?;
    for (ratio, count) in &hist {
        h.write_record([reference.instance.as_str(), &format!("{:.6}", ratio.value()), &count.to_string()])
            .map_err(csv_err)?;
    }
    h.flush().context("writing maxmin_hist.csv")?;

    let cmp = compare_to_published(&reference.archive, published);
    let mut c = csv::Writer::from_path(csv_dir.join("published_cmp.csv")).map_err(csv_err)?;
    c.write_record(["instance", "published", "equal", "higher", "best_found"]).map_err(csv_err)?;
    let show = |v: Option<f64>| v.map(|x| format!("{x:.6}")).unwrap_or_default();
    let (equal, higher) = if published.is_some() {
        (cmp.equal.to_string(), cmp.higher.to_string())
    } else {
        (String::new(), String::new())
    };
    c.write_record([reference.instance.as_str(), &show(cmp.published), &equal, &higher, &show(cmp.best_found)])
        .map_err(csv_err)?;
    c.flush().context("writing published_cmp.csv")?;

    let bins: BTreeMap<String, usize> = hist.iter().map(|(r, c)| (format!("{:.3}", r.value()), *c)).collect();
    println!(
        "{}: {} runs, reference of {} -> {}; max-min bins {:?}",
        reference.instance,
        paths.len(),
        reference.archive.len(),
        reference_out.display(),
        bins
    );
    Ok(())
}

fn run(cli: Cli) -> CmdResult {
    match cli.command {
        Command::Generate { sites, chars, teams, tmax, layout, seed, speed, out } => {
            cmd_generate(sites, chars, teams, tmax, layout, seed, speed, &out)
        }
        Command::Solve { instance, config, time_limit, seed, iterations, out, final_only } => {
            cmd_solve(&instance, config, time_limit, seed, iterations, &out, final_only)
        }
        Command::Oracle { instance, out, max_sites, max_teams, node_budget } => {
            cmd_oracle(&instance, &out, OracleLimits { max_sites, max_teams, node_budget })
        }
        Command::OracleVerify { candidate, exact } => cmd_oracle_verify(&candidate, &exact),
        Command::Evaluate { runs, reference_out, alphas, csv, published } => {
            cmd_evaluate(&runs, &reference_out, &alphas, &csv, published)
        }
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { 2 } else { 0 });
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            eprintln!("error: {:#}", f.error());
            ExitCode::from(f.code())
        }
    }
}
