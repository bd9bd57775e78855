//! Command-line front end: model fitting, residual computation,
//! goodness-of-fit testing, Kaplan-Meier curves, and the simulation
//! harness, all emitting plot-ready CSV/JSON plus a run manifest.

use std::collections::BTreeMap;
use std::fs::File;
use std::io::{BufReader, BufWriter, Write};
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use survdiag::aft::{fit_aft, AftFit};
use survdiag::coxph::{fit_cox, CoxFit};
use survdiag::data::{load_csv, Dataset};
use survdiag::dist::DistFamily;
use survdiag::error::Error;
use survdiag::gof::{ks_test, lcks_test, sw_test, GofResult, KsTarget};
use survdiag::nonparam::{cumhaz_of_cs, kaplan_meier};
use survdiag::residuals::{self, ResidualKind, ResidualSet, SurvivalModel, DEFAULT_ETA};
use survdiag::simlab::{
    rejection_rates, replicate_pvalues, true_spec, wrong_spec, FitSpec, Scenario,
    ScenarioTag, SimReport, TestKind,
};

const SCHEMA_VERSION: u32 = 1;

const EXIT_INPUT: i32 = 1;
const EXIT_NONCONVERGENCE: i32 = 2;
const EXIT_INTERNAL: i32 = 3;

#[derive(Parser)]
#[command(
    name = "survdiag",
    version,
    about = "Diagnostics for censored failure-time regression models"
)]
struct Cli {
    /// Cap the number of worker threads (also: SURVDIAG_THREADS).
    #[arg(long, global = true)]
    threads: Option<usize>,
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Fit an AFT or Cox model to a CSV dataset.
    Fit(FitArgs),
    /// Compute a residual set from a saved fit and a dataset.
    Residuals(ResidualArgs),
    /// Run a goodness-of-fit test on a residual file's value column.
    Gof(GofArgs),
    /// Kaplan-Meier curve of a dataset, or the cumulative hazard of a
    /// Cox-Snell residual file.
    Km(KmArgs),
    /// Monte Carlo rejection-rate study for a simulation scenario.
    Simulate(SimulateArgs),
    /// Replicated randomized-residual p-values for a fixed fit.
    ReplicatePvalues(ReplicateArgs),
}

#[derive(Args, Clone)]
struct DataArgs {
    /// Input CSV with one row per subject.
    #[arg(long)]
    data: PathBuf,
    /// Column holding the (possibly censored) follow-up time.
    #[arg(long, default_value = "time")]
    time: String,
    /// Column holding the event indicator (1 = event, 0 = censored).
    #[arg(long, default_value = "status")]
    status: String,
    /// Comma-separated covariate column names.
    #[arg(long, value_delimiter = ',')]
    covariates: Vec<String>,
}

#[derive(Args)]
struct FitArgs {
    #[command(flatten)]
    data: DataArgs,
    #[arg(long, value_enum)]
    model: ModelChoice,
    /// Output directory (fit.json + manifest.json).
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args)]
struct ResidualArgs {
    /// fit.json produced by `survdiag fit`.
    #[arg(long)]
    fit: PathBuf,
    #[command(flatten)]
    data: DataArgs,
    #[arg(long, value_enum)]
    kind: ResidualKind,
    /// Shrink factor for censored survival probabilities (MSP family).
    #[arg(long, default_value_t = DEFAULT_ETA)]
    eta: f64,
    /// Randomization seed; drawn from system entropy when omitted.
    #[arg(long)]
    seed: Option<u64>,
    /// Leave-one-out cross-validated residuals (AFT fits only).
    #[arg(long)]
    cv: bool,
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args)]
struct GofArgs {
    /// residuals.csv produced by `survdiag residuals`.
    #[arg(long)]
    residuals: PathBuf,
    #[arg(long, value_enum)]
    test: TestChoice,
    /// Monte Carlo replicates for the LCKS variants.
    #[arg(long, default_value_t = 1000)]
    mc_reps: usize,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args)]
struct KmArgs {
    /// Dataset mode: CSV of survival data.
    #[arg(long)]
    data: Option<PathBuf>,
    #[arg(long, default_value = "time")]
    time: String,
    #[arg(long, default_value = "status")]
    status: String,
    /// Residual mode: Cox-Snell residual CSV; emits its cumulative hazard.
    #[arg(long)]
    residuals: Option<PathBuf>,
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args)]
struct SimulateArgs {
    /// Scenario: family, functional, or ph.
    #[arg(long)]
    scenario: String,
    #[arg(long, default_value_t = 200)]
    n: usize,
    /// Target censoring fraction in [0, 1).
    #[arg(long, default_value_t = 0.0)]
    censoring: f64,
    #[arg(long, default_value_t = 500)]
    reps: usize,
    #[arg(long, default_value_t = 0.05)]
    alpha: f64,
    #[arg(long)]
    seed: Option<u64>,
    /// Sweep the full grid (n up to 800, all censoring levels, 1000
    /// replicates); multi-hour.
    #[arg(long)]
    full_paper: bool,
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args)]
struct ReplicateArgs {
    #[arg(long)]
    fit: PathBuf,
    #[command(flatten)]
    data: DataArgs,
    #[arg(long, default_value_t = 1000)]
    reps: usize,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    out: PathBuf,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum ModelChoice {
    Weibull,
    Lognormal,
    Loglogistic,
    Exponential,
    Coxph,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum TestChoice {
    Sw,
    KsNormal,
    KsExp,
    LcksNormal,
    LcksExp,
}

/// On-disk representation of a fitted model.
#[derive(Serialize, Deserialize)]
#[serde(tag = "model_type", rename_all = "lowercase")]
enum ModelFile {
    Aft(AftFit),
    Cox(CoxFit),
}

#[derive(Serialize, Deserialize)]
struct FitDocument {
    schema_version: u32,
    model: ModelFile,
}

impl FitDocument {
    fn converged(&self) -> bool {
        match &self.model {
            ModelFile::Aft(f) => f.converged,
            ModelFile::Cox(f) => f.converged,
        }
    }

    fn as_model(&self) -> &dyn SurvivalModel {
        match &self.model {
            ModelFile::Aft(f) => f,
            ModelFile::Cox(f) => f,
        }
    }

    fn aft_family(&self) -> Option<DistFamily> {
        match &self.model {
            ModelFile::Aft(f) => Some(f.family),
            ModelFile::Cox(_) => None,
        }
    }
}

#[derive(Serialize)]
struct RunManifest {
    schema_version: u32,
    command: String,
    arguments: Vec<String>,
    seed: Option<u64>,
    /// SHA-256 digests of every input file, keyed by path.
    input_digests: BTreeMap<String, String>,
    outputs: Vec<String>,
    created_unix: u64,
}

impl RunManifest {
    fn new(command: &str, seed: Option<u64>) -> Self {
        RunManifest {
            schema_version: SCHEMA_VERSION,
            command: command.into(),
            arguments: std::env::args().skip(1).collect(),
            seed,
            input_digests: BTreeMap::new(),
            outputs: Vec::new(),
            created_unix: std::time::SystemTime::now()
                .duration_since(std::time::UNIX_EPOCH)
                .map(|d| d.as_secs())
                .unwrap_or(0),
        }
    }

    fn digest_input(&mut self, path: &Path) -> survdiag::Result<()> {
        let bytes = std::fs::read(path)?;
        let digest = Sha256::digest(&bytes);
        self.input_digests
            .insert(path.display().to_string(), format!("{digest:x}"));
        Ok(())
    }

    fn write(&self, dir: &Path) -> survdiag::Result<()> {
        let f = BufWriter::new(File::create(dir.join("manifest.json"))?);
        serde_json::to_writer_pretty(f, self)?;
        Ok(())
    }
}

fn resolve_seed(seed: Option<u64>) -> u64 {
    seed.unwrap_or_else(|| {
        let s = rand::random::<u64>();
        eprintln!("note: no --seed given; using {s} (recorded in manifest)");
        s
    })
}

fn load_dataset(args: &DataArgs) -> survdiag::Result<Dataset> {
    load_csv(&args.data, &args.time, &args.status, &args.covariates)
}

fn load_fit(path: &Path) -> survdiag::Result<FitDocument> {
    let f = BufReader::new(File::open(path)?);
    Ok(serde_json::from_reader(f)?)
}

fn write_json<T: Serialize>(path: &Path, value: &T) -> survdiag::Result<()> {
    let f = BufWriter::new(File::create(path)?);
    serde_json::to_writer_pretty(f, value)?;
    Ok(())
}

fn ensure_out_dir(dir: &Path) -> survdiag::Result<()> {
    std::fs::create_dir_all(dir)?;
    Ok(())
}

fn cmd_fit(args: &FitArgs) -> survdiag::Result<i32> {
    let d = load_dataset(&args.data)?;
    let model = match args.model {
        ModelChoice::Weibull => ModelFile::Aft(fit_aft(&d, DistFamily::Weibull)?),
        ModelChoice::Lognormal => ModelFile::Aft(fit_aft(&d, DistFamily::Lognormal)?),
        ModelChoice::Loglogistic => {
            ModelFile::Aft(fit_aft(&d, DistFamily::Loglogistic)?)
        }
        ModelChoice::Exponential => {
            ModelFile::Aft(fit_aft(&d, DistFamily::Exponential)?)
        }
        ModelChoice::Coxph => ModelFile::Cox(fit_cox(&d)?),
    };
    let doc = FitDocument { schema_version: SCHEMA_VERSION, model };

    ensure_out_dir(&args.out)?;
    let fit_path = args.out.join("fit.json");
    write_json(&fit_path, &doc)?;
    let mut manifest = RunManifest::new("fit", None);
    manifest.digest_input(&args.data.data)?;
    manifest.outputs.push(fit_path.display().to_string());
    manifest.write(&args.out)?;

    match &doc.model {
        ModelFile::Aft(f) => println!(
            "aft {} loglik={:.4} aic={:.4} converged={}",
            f.family.name(),
            f.loglik,
            f.aic,
            f.converged
        ),
        ModelFile::Cox(f) => println!(
            "coxph log_partial_lik={:.4} converged={}",
            f.log_partial_lik, f.converged
        ),
    }
    Ok(if doc.converged() { 0 } else { EXIT_NONCONVERGENCE })
}

fn cmd_residuals(args: &ResidualArgs) -> survdiag::Result<i32> {
    let doc = load_fit(&args.fit)?;
    let d = load_dataset(&args.data)?;
    if !args.kind.uses_eta() && args.eta != DEFAULT_ETA {
        eprintln!(
            "warning: --eta has no effect for residual kind {}",
            args.kind.name()
        );
    }
    if !args.kind.uses_seed() && args.seed.is_some() {
        eprintln!(
            "warning: --seed has no effect for residual kind {}",
            args.kind.name()
        );
    }
    let seed = if args.kind.uses_seed() { resolve_seed(args.seed) } else { 0 };

    let set = if args.cv {
        let family = doc.aft_family().ok_or_else(|| {
            Error::Domain("--cv requires an AFT fit (leave-one-out refits)".into())
        })?;
        residuals::residuals_cv(&d, family, args.kind, args.eta, seed)?
    } else {
        residuals::compute(doc.as_model(), &d, args.kind, args.eta, seed)?
    };

    ensure_out_dir(&args.out)?;
    let res_path = args.out.join("residuals.csv");
    set.write_csv(BufWriter::new(File::create(&res_path)?))?;
    let mut manifest =
        RunManifest::new("residuals", args.kind.uses_seed().then_some(seed));
    manifest.digest_input(&args.fit)?;
    manifest.digest_input(&args.data.data)?;
    manifest.outputs.push(res_path.display().to_string());
    manifest.write(&args.out)?;
    println!("{} residuals for {} rows -> {}", set.kind.name(), d.len(), res_path.display());
    Ok(0)
}

fn cmd_gof(args: &GofArgs) -> survdiag::Result<i32> {
    let set = ResidualSet::read_csv(BufReader::new(File::open(&args.residuals)?))?;
    let values = set.clean_values();
    let needs_seed = matches!(args.test, TestChoice::LcksNormal | TestChoice::LcksExp);
    let seed = if needs_seed { Some(resolve_seed(args.seed)) } else { None };
    let result: GofResult = match args.test {
        TestChoice::Sw => sw_test(&values)?,
        TestChoice::KsNormal => ks_test(&values, KsTarget::StandardNormal)?,
        TestChoice::KsExp => ks_test(&values, KsTarget::UnitExponential)?,
        TestChoice::LcksNormal => {
            lcks_test(&values, KsTarget::StandardNormal, args.mc_reps, seed.unwrap())?
        }
        TestChoice::LcksExp => {
            lcks_test(&values, KsTarget::UnitExponential, args.mc_reps, seed.unwrap())?
        }
    };

    ensure_out_dir(&args.out)?;
    let gof_path = args.out.join("gof.json");
    write_json(&gof_path, &result)?;
    let mut manifest = RunManifest::new("gof", seed);
    manifest.digest_input(&args.residuals)?;
    manifest.outputs.push(gof_path.display().to_string());
    manifest.write(&args.out)?;
    println!(
        "{} on {} values: statistic={:.6} p={:.6}",
        result.method, result.n, result.statistic, result.p_value
    );
    Ok(0)
}

fn cmd_km(args: &KmArgs) -> survdiag::Result<i32> {
    ensure_out_dir(&args.out)?;
    let mut manifest = RunManifest::new("km", None);
    match (&args.data, &args.residuals) {
        (Some(data), None) => {
            let d = load_csv(data, &args.time, &args.status, &[])?;
            let km = kaplan_meier(&d.times(), &d.statuses())?;
            let km_path = args.out.join("km.csv");
            km.write_csv(BufWriter::new(File::create(&km_path)?))?;
            manifest.digest_input(data)?;
            manifest.outputs.push(km_path.display().to_string());
            println!("Kaplan-Meier: {} steps -> {}", km.points.len(), km_path.display());
        }
        (None, Some(res)) => {
            let set = ResidualSet::read_csv(BufReader::new(File::open(res)?))?;
            let curve = cumhaz_of_cs(&set)?;
            let ch_path = args.out.join("cumhaz.csv");
            let mut w = BufWriter::new(File::create(&ch_path)?);
            writeln!(w, "residual,cum_hazard,truncated")?;
            for p in &curve {
                writeln!(
                    w,
                    "{:.17e},{:.17e},{}",
                    p.residual,
                    p.cum_hazard,
                    u8::from(p.truncated)
                )?;
            }
            manifest.digest_input(res)?;
            manifest.outputs.push(ch_path.display().to_string());
            println!("cumulative hazard: {} points -> {}", curve.len(), ch_path.display());
        }
        _ => {
            return Err(Error::Domain(
                "pass exactly one of --data or --residuals".into(),
            ))
        }
    }
    manifest.write(&args.out)?;
    Ok(0)
}

const DESK_KINDS: [ResidualKind; 3] =
    [ResidualKind::Nrsp, ResidualKind::Nmsp, ResidualKind::Deviance];
const DESK_TESTS: [TestKind; 2] = [TestKind::Sw, TestKind::KsNormal];

fn cmd_simulate(args: &SimulateArgs) -> survdiag::Result<i32> {
    let tag = ScenarioTag::parse(&args.scenario)?;
    let seed = resolve_seed(args.seed);
    let specs: [FitSpec; 2] = [true_spec(tag), wrong_spec(tag)];
    ensure_out_dir(&args.out)?;

    let reports: Vec<SimReport> = if args.full_paper {
        let mut out = Vec::new();
        for &n in &[100_usize, 200, 400, 800] {
            for &c in &[0.0, 0.2, 0.5, 0.8] {
                let sc = Scenario::new(tag, n, c, seed)?;
                out.push(rejection_rates(
                    &sc,
                    &specs,
                    &DESK_KINDS,
                    &DESK_TESTS,
                    args.reps.max(1000),
                    args.alpha,
                )?);
            }
        }
        out
    } else {
        let sc = Scenario::new(tag, args.n, args.censoring, seed)?;
        vec![rejection_rates(&sc, &specs, &DESK_KINDS, &DESK_TESTS, args.reps, args.alpha)?]
    };

    let csv_path = args.out.join("sim_report.csv");
    {
        let mut w = BufWriter::new(File::create(&csv_path)?);
        for (i, r) in reports.iter().enumerate() {
            if i == 0 {
                r.write_csv(&mut w)?;
            } else {
                // Skip the repeated header for subsequent grid points.
                let mut buf = Vec::new();
                r.write_csv(&mut buf)?;
                let body = buf.splitn(2, |b| *b == b'\n').nth(1).unwrap_or(&[]);
                w.write_all(body)?;
            }
        }
    }
    let json_path = args.out.join("sim_report.json");
    write_json(&json_path, &reports)?;

    let mut manifest = RunManifest::new("simulate", Some(seed));
    manifest.outputs.push(csv_path.display().to_string());
    manifest.outputs.push(json_path.display().to_string());
    manifest.write(&args.out)?;

    for r in &reports {
        for c in &r.cells {
            println!(
                "{} n={} c={:.0}% {} {} {}: {:.2}% (used {}, excluded {})",
                r.scenario,
                r.n,
                r.target_censoring * 100.0,
                c.model,
                c.residual,
                c.test,
                c.rejection_pct,
                c.used_replicates,
                c.excluded_replicates
            );
        }
    }
    Ok(0)
}

fn cmd_replicate_pvalues(args: &ReplicateArgs) -> survdiag::Result<i32> {
    let doc = load_fit(&args.fit)?;
    let d = load_dataset(&args.data)?;
    let seed = resolve_seed(args.seed);
    let out = replicate_pvalues(doc.as_model(), &d, args.reps, seed)?;

    ensure_out_dir(&args.out)?;
    let pv_path = args.out.join("pvalues.csv");
    {
        let mut w = BufWriter::new(File::create(&pv_path)?);
        writeln!(w, "replicate,p_value")?;
        for (i, p) in out.p_values.iter().enumerate() {
            writeln!(w, "{i},{p:.17e}")?;
        }
    }
    let summary_path = args.out.join("pvalues_summary.json");
    write_json(&summary_path, &out)?;
    let mut manifest = RunManifest::new("replicate-pvalues", Some(seed));
    manifest.digest_input(&args.fit)?;
    manifest.digest_input(&args.data.data)?;
    manifest.outputs.push(pv_path.display().to_string());
    manifest.outputs.push(summary_path.display().to_string());
    manifest.write(&args.out)?;
    println!(
        "{} replicates: fraction of p-values >= 0.05 is {:.4}",
        out.reps, out.fraction_ge_05
    );
    Ok(0)
}

fn run(cli: &Cli) -> survdiag::Result<i32> {
    match &cli.cmd {
        Cmd::Fit(a) => cmd_fit(a),
        Cmd::Residuals(a) => cmd_residuals(a),
        Cmd::Gof(a) => cmd_gof(a),
        Cmd::Km(a) => cmd_km(a),
        Cmd::Simulate(a) => cmd_simulate(a),
        Cmd::ReplicatePvalues(a) => cmd_replicate_pvalues(a),
    }
}

fn exit_code_for(e: &Error) -> i32 {
    match e {
        Error::Io(_)
        | Error::Csv(_)
        | Error::Schema(_)
        | Error::Row { .. }
        | Error::Domain(_)
        | Error::Json(_) => EXIT_INPUT,
        Error::SingularDesign(_) | Error::DegenerateSample(_) => EXIT_NONCONVERGENCE,
        Error::ModelInconsistency(_) | Error::Calibration(_) => EXIT_INTERNAL,
    }
}

fn main() {
    let cli = Cli::parse();
    let threads = cli.threads.or_else(|| {
        std::env::var("SURVDIAG_THREADS").ok().and_then(|v| v.parse().ok())
    });
    if let Some(t) = threads {
        if let Err(e) = rayon::ThreadPoolBuilder::new().num_threads(t).build_global() {
            eprintln!("error: failed to configure {t} worker threads: {e}");
            std::process::exit(EXIT_INTERNAL);
        }
    }
    match run(&cli) {
        Ok(code) => std::process::exit(code),
        Err(e) => {
            eprintln!("error: {e}");
            std::process::exit(exit_code_for(&e));
        }
    }
}
