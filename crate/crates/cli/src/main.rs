use std::fs::{self, File};
use std::io::{self, BufWriter, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use fitconv::blocks::{a_coefficients, classify_regime, generate_block_matrix, BlockRecord};
use fitconv::decay::{mci_stopping_rule, DecayParams};
use fitconv::ingest::{
    binarize, compute_rca, load_flows, load_matrix, write_crossing_counts, write_dense,
    write_heatmap, write_sparse, write_trajectory, MatrixFormat, ThresholdRule,
};
use fitconv::report::{analyse, HeatmapSidecar, RunReport};
use fitconv::{catalog, BipartiteMatrix, EngineParams, Error, RankAxis, StopReason, StoppingRule};
use rayon::prelude::*;
use serde_json::json;
use sha2::{Digest, Sha256};

const EXIT_INPUT: u8 = 2;
const EXIT_DEGENERATE: u8 = 3;
const EXIT_BUDGET: u8 = 4;

#[derive(Parser)]
#[command(name = "fitconv", version, about = "Fitness-Complexity iteration, decay classification and ordered-matrix analysis")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Emit a named reference matrix or a generated two-block matrix.
    Synth(SynthArgs),
    /// Iterate, classify decays, order the matrix and run the belly and removal analyses.
    Run(RunArgs),
    /// Build a binary matrix from export flows via revealed comparative advantage.
    Rca(RcaArgs),
    /// Report the convergence regime of a two-block spec.
    Regime(RegimeArgs),
    /// Print the JSON schema of the run report.
    Schema,
    /// List the named reference matrices.
    List,
}

#[derive(Args)]
#[group(required = true, multiple = false)]
struct SourceArgs {
    /// Named reference matrix (see `fitconv list`).
    #[arg(long)]
    named: Option<String>,
    /// Two-block record, e.g. `R1=3,R2=4,C1=3,C2=6,d=1`.
    #[arg(long)]
    blocks: Option<String>,
}

#[derive(Args)]
struct SynthArgs {
    #[command(flatten)]
    source: SourceArgs,
    /// Cyclic-shift offset for generated blocks.
    #[arg(long, default_value_t = 0)]
    seed: usize,
    /// Output format; defaults to dense, or to the extension of `--output`.
    #[arg(long)]
    format: Option<MatrixFormat>,
    /// Output file; stdout when absent.
    #[arg(short, long)]
    output: Option<PathBuf>,
}

#[derive(Args)]
struct RunArgs {
    /// Matrix files (dense CSV or sparse pair list).
    inputs: Vec<PathBuf>,
    /// Named reference matrix; combinable with files and `--blocks`.
    #[arg(long)]
    named: Option<String>,
    /// Two-block record.
    #[arg(long)]
    blocks: Option<String>,
    #[arg(long, default_value_t = 0)]
    seed: usize,
    /// Format of the input files; inferred from the extension when absent.
    #[arg(long)]
    format: Option<MatrixFormat>,
    /// Elasticity of the complexity update (default -1, or the `gamma` of a block record).
    #[arg(long, allow_hyphen_values = true)]
    gamma: Option<f64>,
    /// `iters:N`, `rel:TOL` or `mci:THRESHOLD[:countries|products]`.
    #[arg(long)]
    stop: Option<StopSpec>,
    /// Iteration budget. Without `--stop`, the run is `iters:<max-iter>`.
    #[arg(long)]
    max_iter: Option<u64>,
    /// Trajectory sampling stride.
    #[arg(long, default_value_t = 1)]
    record_every: u64,
    /// Worker threads across inputs.
    #[arg(long, default_value_t = 1)]
    jobs: usize,
    /// Output directory; one subdirectory per input.
    #[arg(long, env = "FITCONV_OUT_DIR", default_value = "fitconv-out")]
    out_dir: PathBuf,
    /// Also print each report to stdout.
    #[arg(long)]
    json: bool,
}

#[derive(Args)]
struct RcaArgs {
    /// CSV with header `exporter,product,value`.
    flows: PathBuf,
    #[arg(long, default_value_t = 1.0)]
    threshold: f64,
    /// Use `RCA > threshold` instead of `RCA >= threshold`.
    #[arg(long)]
    strict: bool,
    #[arg(long)]
    format: Option<MatrixFormat>,
    /// Matrix output file; stdout when absent.
    #[arg(short, long)]
    output: Option<PathBuf>,
    /// Sanitation report file; stderr when absent.
    #[arg(long)]
    report: Option<PathBuf>,
}

#[derive(Args)]
struct RegimeArgs {
    /// Two-block record.
    #[arg(long)]
    blocks: String,
    #[arg(long, allow_hyphen_values = true)]
    gamma: Option<f64>,
}

#[derive(Clone, Copy, Debug)]
enum StopSpec {
    Iters(u64),
    Rel(f64),
    Mci(f64, RankAxis),
}

impl std::str::FromStr for StopSpec {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        let mut parts = s.split(':');
        let kind = parts.next().unwrap_or_default();
        let value = parts.next().ok_or_else(|| format!("expected KIND:VALUE, got {s:?}"))?;
        let extra = parts.next();
        let num = |v: &str| v.parse::<f64>().map_err(|_| format!("cannot parse {v:?} as a number"));
        let spec = match kind {
            "iters" => StopSpec::Iters(value.parse().map_err(|_| format!("cannot parse {value:?} as a count"))?),
            "rel" => StopSpec::Rel(num(value)?),
            "mci" => {
                let axis = match extra {
                    None | Some("countries") => RankAxis::Countries,
                    Some("products") => RankAxis::Products,
                    Some(other) => return Err(format!("unknown axis {other:?}")),
                };
                return Ok(StopSpec::Mci(num(value)?, axis));
            }
            other => return Err(format!("unknown stopping rule {other:?}")),
        };
        if extra.is_some() || parts.next().is_some() {
            return Err(format!("trailing fields in {s:?}"));
        }
        Ok(spec)
    }
}

/// Error message plus the exit code it maps to.
#[derive(Debug)]
struct Failure {
    code: u8,
    msg: String,
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        Failure {
            code: EXIT_INPUT,
            msg: e.to_string(),
        }
    }
}

impl From<io::Error> for Failure {
    fn from(e: io::Error) -> Self {
        Failure::from(Error::Io(e))
    }
}

impl From<serde_json::Error> for Failure {
    fn from(e: serde_json::Error) -> Self {
        Failure { code: EXIT_INPUT, msg: e.to_string() }
    }
}

type CmdResult = Result<u8, Failure>;

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Synth(a) => synth(a),
        Command::Run(a) => run(a),
        Command::Rca(a) => rca(a),
        Command::Regime(a) => regime(a),
        Command::Schema => schema(),
        Command::List => list(),
    };
    match result {
        Ok(code) => ExitCode::from(code),
        Err(f) => {
            eprintln!("error: {}", f.msg);
            ExitCode::from(f.code)
        }
    }
}

fn block_matrix(record: &str, seed: usize) -> Result<(BipartiteMatrix, BlockRecord), Failure> {
    let rec: BlockRecord = record.parse()?;
    Ok((generate_block_matrix(&rec.spec, seed)?, rec))
}

fn write_matrix<W: Write>(m: &BipartiteMatrix, format: MatrixFormat, w: W) -> fitconv::Result<()> {
    match format {
        MatrixFormat::Dense => write_dense(m, w),
        MatrixFormat::Sparse => write_sparse(m, w),
    }
}

fn emit_matrix(m: &BipartiteMatrix, format: Option<MatrixFormat>, output: Option<&Path>) -> Result<(), Failure> {
    match output {
        Some(path) => {
            let format = format.unwrap_or_else(|| MatrixFormat::from_path(path));
            let mut w = BufWriter::new(File::create(path)?);
            write_matrix(m, format, &mut w)?;
            w.flush()?;
        }
        None => {
            let stdout = io::stdout();
            let mut w = BufWriter::new(stdout.lock());
            write_matrix(m, format.unwrap_or(MatrixFormat::Dense), &mut w)?;
            w.flush()?;
        }
    }
    Ok(())
}

fn synth(a: SynthArgs) -> CmdResult {
    let m = match (a.source.named, a.source.blocks) {
        (Some(name), _) => catalog::named(&name)?,
        (None, Some(rec)) => block_matrix(&rec, a.seed)?.0,
        (None, None) => unreachable!("clap enforces one source"),
    };
    emit_matrix(&m, a.format, a.output.as_deref())?;
    Ok(0)
}

struct Input {
    source: String,
    stem: String,
    matrix: BipartiteMatrix,
    gamma: Option<f64>,
}

fn load_input(path: &Path, format: Option<MatrixFormat>) -> Result<Input, Failure> {
    let format = format.unwrap_or_else(|| MatrixFormat::from_path(path));
    let matrix = load_matrix(path, format).map_err(|e| Failure {
        code: EXIT_INPUT,
        msg: format!("{}: {e}", path.display()),
    })?;
    Ok(Input {
        source: path.display().to_string(),
        stem: path.file_stem().map(|s| s.to_string_lossy().into_owned()).unwrap_or_else(|| "input".into()),
        matrix,
        gamma: None,
    })
}

fn content_hash(m: &BipartiteMatrix) -> String {
    let mut buf = Vec::new();
    write_dense(m, &mut buf).expect("writing to memory");
    format!("{:x}", Sha256::digest(&buf))
}

fn stopping_rule(spec: StopSpec, decay: &DecayParams) -> StoppingRule {
    match spec {
        StopSpec::Iters(count) => StoppingRule::Iterations { count },
        StopSpec::Rel(tol) => StoppingRule::RelativeChange { tol },
        StopSpec::Mci(threshold, axis) => mci_stopping_rule(threshold, axis, decay),
    }
}

fn exit_code_of(report: &RunReport) -> u8 {
    if report.stop == StopReason::BudgetExhausted {
        EXIT_BUDGET
    } else if report.removal.crossing_country.is_none() {
        EXIT_DEGENERATE
    } else {
        0
    }
}

fn write_outputs(dir: &Path, a: &fitconv::report::Analysis, report: &RunReport) -> io::Result<()> {
    fs::create_dir_all(dir)?;
    let to_io = |e: Error| match e {
        Error::Io(e) => e,
        other => io::Error::other(other.to_string()),
    };
    let mut json = serde_json::to_string_pretty(report)?;
    json.push('\n');
    fs::write(dir.join("report.json"), json)?;

    let file = |name: &str| File::create(dir.join(name)).map(BufWriter::new);
    let mut w = file("trajectory.csv")?;
    write_trajectory(&a.trajectory, a.matrix.row_labels(), RankAxis::Countries, &mut w).map_err(to_io)?;
    w.flush()?;
    let mut w = file("trajectory_products.csv")?;
    write_trajectory(&a.trajectory, a.matrix.col_labels(), RankAxis::Products, &mut w).map_err(to_io)?;
    w.flush()?;
    let mut w = file("crossings.csv")?;
    write_crossing_counts(&a.crossing_counts, &mut w).map_err(to_io)?;
    w.flush()?;
    let mut w = file("heatmap.csv")?;
    write_heatmap(&a.ordered, &mut w).map_err(to_io)?;
    w.flush()?;
    let mut sidecar = serde_json::to_string_pretty(&HeatmapSidecar::new(&a.ordered, &report.belly))?;
    sidecar.push('\n');
    fs::write(dir.join("heatmap.json"), sidecar)
}

fn run(a: RunArgs) -> CmdResult {
    let mut inputs = Vec::new();
    if let Some(name) = &a.named {
        inputs.push(Input {
            source: format!("named:{name}"),
            stem: name.clone(),
            matrix: catalog::named(name)?,
            gamma: None,
        });
    }
    if let Some(rec) = &a.blocks {
        let (matrix, parsed) = block_matrix(rec, a.seed)?;
        inputs.push(Input {
            source: format!("blocks:{rec}"),
            stem: "blocks".into(),
            matrix,
            gamma: parsed.gamma,
        });
    }
    for path in &a.inputs {
        inputs.push(load_input(path, a.format)?);
    }
    if inputs.is_empty() {
        return Err(Failure {
            code: EXIT_INPUT,
            msg: "no input: give matrix files, --named or --blocks".into(),
        });
    }
    let mut seen = std::collections::HashMap::new();
    for input in &mut inputs {
        let n = seen.entry(input.stem.clone()).or_insert(0usize);
        *n += 1;
        if *n > 1 {
            input.stem = format!("{}-{}", input.stem, n);
        }
    }

    let decay = DecayParams::default();
    let stop_spec = a.stop.unwrap_or(StopSpec::Iters(a.max_iter.unwrap_or(2000)));
    let max_iter = a.max_iter.unwrap_or(match stop_spec {
        StopSpec::Iters(n) => n,
        _ => 100_000,
    });
    let stop = stopping_rule(stop_spec, &decay);

    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(a.jobs.max(1))
        .build()
        .map_err(|e| Failure { code: EXIT_INPUT, msg: e.to_string() })?;
    let results: Vec<Result<(RunReport, u8), Failure>> = pool.install(|| {
        inputs
            .par_iter()
            .map(|input| {
                let gamma = a.gamma.or(input.gamma).unwrap_or(-1.0);
                let params = EngineParams::default()
                    .with_gamma(gamma)
                    .with_max_iterations(max_iter)
                    .with_record_every(a.record_every);
                let analysis = analyse(&input.source, &input.matrix, &params, stop, &decay).map_err(|e| Failure {
                    code: EXIT_INPUT,
                    msg: format!("{}: {e}", input.source),
                })?;
                let mut report = analysis.report.clone();
                report.input.content_hash = content_hash(&analysis.matrix);
                write_outputs(&a.out_dir.join(&input.stem), &analysis, &report)?;
                let code = exit_code_of(&report);
                Ok((report, code))
            })
            .collect()
    });

    let mut worst = 0u8;
    let stdout = io::stdout();
    let mut out = stdout.lock();
    for (input, result) in inputs.iter().zip(results) {
        match result {
            Ok((report, code)) => {
                eprintln!(
                    "{}: {} iterations, stop={}, crossing={}, crossing country={}",
                    input.source,
                    report.final_iteration,
                    stop_kind(&report.stop),
                    report.belly.crossing,
                    report.removal.crossing_country.as_deref().unwrap_or("-"),
                );
                if a.json {
                    serde_json::to_writer_pretty(&mut out, &report)?;
                    writeln!(out)?;
                }
                worst = worst.max(code);
            }
            Err(f) => {
                eprintln!("error: {}", f.msg);
                worst = worst.max(f.code);
            }
        }
    }
    Ok(worst)
}

fn stop_kind(s: &StopReason) -> &'static str {
    match s {
        StopReason::IterationsReached => "iterations",
        StopReason::Converged { .. } => "converged",
        StopReason::MciExceeded { .. } => "mci",
        StopReason::BudgetExhausted => "budget_exhausted",
    }
}

fn rca(a: RcaArgs) -> CmdResult {
    let flows = load_flows(&a.flows).map_err(|e| Failure {
        code: EXIT_INPUT,
        msg: format!("{}: {e}", a.flows.display()),
    })?;
    let rca = compute_rca(&flows)?;
    let rule = if a.strict { ThresholdRule::Above } else { ThresholdRule::AtLeast };
    let (m, empty) = binarize(&rca, a.threshold, rule)?;
    emit_matrix(&m, a.format, a.output.as_deref())?;

    let unusable = m.ones() == 0;
    let mut report = serde_json::to_string_pretty(&json!({
        "threshold": a.threshold,
        "rule": rule,
        "n_rows": m.n_rows(),
        "n_cols": m.n_cols(),
        "ones": m.ones(),
        "unusable": unusable,
        "flows": rca.sanitation,
        "empty_lines": empty,
    }))?;
    report.push('\n');
    match &a.report {
        Some(path) => fs::write(path, report)?,
        None => eprint!("{report}"),
    }
    Ok(if unusable { EXIT_DEGENERATE } else { 0 })
}

fn regime(a: RegimeArgs) -> CmdResult {
    let rec: BlockRecord = a.blocks.parse()?;
    let gamma = a.gamma.or(rec.gamma).unwrap_or(-1.0);
    let report = classify_regime(&rec.spec, gamma)?;
    let out = json!({
        "spec": rec.spec,
        "coefficients": a_coefficients(&rec.spec),
        "regime": report,
    });
    println!("{}", serde_json::to_string_pretty(&out)?);
    Ok(0)
}

fn schema() -> CmdResult {
    println!("{}", serde_json::to_string_pretty(&schemars::schema_for!(RunReport))?);
    Ok(0)
}

fn list() -> CmdResult {
    for entry in catalog::CATALOG {
        let m = BipartiteMatrix::from_pattern(entry.pattern)?;
        println!("{:<10} {:>2}x{:<2} {}", entry.name, m.n_rows(), m.n_cols(), entry.about);
    }
    Ok(0)
}
