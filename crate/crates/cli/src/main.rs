use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};
use serde::Serialize;

use sic_core::classify::{Classifier, MAX_DIM};
use sic_core::refine::{self, BigFiducial};
use sic_core::search::{self, ProgressEvent, ProgressSink, SearchConfig, SearchMode, Subspace, Symmetry};
use sic_core::store::{self, SicSolution};
use sic_core::verify::{self, verify_sic, VerificationReport};
use sic_core::whgroup::{special_linear_order, zauner_unitary};
use sic_core::Error;

const EXIT_NO_RESULT: u8 = 1;
const EXIT_USAGE: u8 = 2;
const EXIT_VERIFY: u8 = 3;

#[derive(Parser)]
#[command(name = "sic", version, about = "Search, verify, refine and classify SIC fiducial vectors")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, ValueEnum)]
enum SymmetryArg {
    Zauner,
    None,
}

#[derive(Clone, Copy, ValueEnum)]
enum ModeArg {
    FirstHit,
    Exhaustive,
}

#[derive(Subcommand)]
enum Command {
    /// Randomized L-BFGS search for a fiducial vector.
    Search {
        #[arg(short = 'd', value_parser = clap::value_parser!(u64).range(2..))]
        dim: u64,
        /// Defaults to zauner for d > 2 and none for d = 2.
        #[arg(long, value_enum)]
        symmetry: Option<SymmetryArg>,
        /// Zauner eigenspace: auto, 0, 1 or 2.
        #[arg(long, default_value = "auto")]
        subspace: String,
        /// Defaults to 12·d.
        #[arg(long, value_parser = clap::value_parser!(u64).range(1..))]
        restarts: Option<u64>,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Worker threads; defaults to SIC_THREADS, then the available parallelism.
        #[arg(long, env = "SIC_THREADS", value_parser = clap::value_parser!(u64).range(1..))]
        threads: Option<u64>,
        /// Frame error counted as a hit.
        #[arg(long, default_value_t = 1e-14)]
        tol: f64,
        #[arg(long, value_enum, default_value = "first-hit")]
        mode: ModeArg,
        #[arg(short = 'o', long = "output")]
        output: Option<PathBuf>,
    },
    /// Check a stored solution against the SIC overlap conditions.
    Verify {
        file: PathBuf,
        #[arg(long, default_value_t = verify::ACCEPT_TOLERANCE)]
        tol: f64,
    },
    /// Polish a stored solution to more digits.
    Refine {
        file: PathBuf,
        #[arg(long, default_value_t = refine::DEFAULT_DIGITS as u64, value_parser = clap::value_parser!(u64).range(1..=2000))]
        digits: u64,
        #[arg(short = 'o', long = "output")]
        output: Option<PathBuf>,
    },
    /// Partition solutions into extended-Clifford classes.
    Classify {
        #[arg(required = true)]
        files: Vec<PathBuf>,
        #[arg(long, default_value_t = MAX_DIM)]
        max_dim: usize,
        /// Also write one representative per class plus a manifest under this directory.
        #[arg(long)]
        catalogue: Option<PathBuf>,
    },
    /// Group sizes, Zauner eigenspace dimensions and target constants.
    Info {
        #[arg(short = 'd', value_parser = clap::value_parser!(u64).range(2..))]
        dim: u64,
    },
}

struct Failure {
    code: u8,
    message: String,
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        let code = match e {
            Error::NotSic(_) | Error::Divergence { .. } => EXIT_VERIFY,
            _ => EXIT_USAGE,
        };
        Failure { code, message: e.to_string() }
    }
}

fn usage(message: impl Into<String>) -> Failure {
    Failure { code: EXIT_USAGE, message: message.into() }
}

struct StderrProgress;

impl ProgressSink for StderrProgress {
    fn event(&self, event: ProgressEvent<'_>) {
        let mut err = std::io::stderr().lock();
        let _ = match event {
            ProgressEvent::RestartStarted { .. } => Ok(()),
            ProgressEvent::RestartFinished(r) => writeln!(
                err,
                "restart {:>4} seed {} {}: frame error {:.3e} after {} iterations{}",
                r.index,
                r.seed,
                r.symmetry,
                r.frame_error,
                r.iterations,
                if r.hit { " (hit)" } else { "" }
            ),
            ProgressEvent::NewBest { index, frame_error } => {
                writeln!(err, "new best from restart {index}: {frame_error:.3e}")
            }
        };
    }
}

fn emit(text: &str, output: Option<&Path>) -> Result<(), Failure> {
    match output {
        Some(path) => {
            store::write_atomic(path, text.as_bytes()).map_err(Failure::from)?;
            eprintln!("wrote {}", path.display());
        }
        None => print!("{text}"),
    }
    Ok(())
}

fn thread_count(flag: Option<u64>) -> usize {
    flag.map(|t| t as usize).unwrap_or_else(|| std::thread::available_parallelism().map(|n| n.get()).unwrap_or(1))
}

fn run_search(cmd: Command) -> Result<(), Failure> {
    let Command::Search { dim, symmetry, subspace, restarts, seed, threads, tol, mode, output } = cmd else {
        unreachable!()
    };
    let d = dim as usize;
    let mut config = SearchConfig::new(d);
    let sub = match subspace.as_str() {
        "auto" => Subspace::Auto,
        s => Subspace::Index(s.parse().map_err(|_| usage(format!("invalid subspace '{s}'")))?),
    };
    config.symmetry = match symmetry {
        Some(SymmetryArg::None) => Symmetry::None,
        Some(SymmetryArg::Zauner) => Symmetry::Zauner(sub),
        None if d > 2 => Symmetry::Zauner(sub),
        None => Symmetry::None,
    };
    if let Some(r) = restarts {
        config.restarts = r as usize;
    }
    config.master_seed = seed;
    config.worker_count = thread_count(threads);
    config.success_threshold = tol;
    config.mode = match mode {
        ModeArg::FirstHit => SearchMode::FirstHit,
        ModeArg::Exhaustive => SearchMode::Exhaustive,
    };
    eprintln!("searching d={d} with {} restarts on {} worker(s)", config.restarts, config.worker_count);
    let (solution, report) = search::search_sic_with_progress(&config, &StderrProgress)?;
    eprintln!("{} of {} restarts hit in {:.2}s", report.hits(), report.records.len(), report.total_seconds);
    let Some(solution) = solution else {
        return Err(Failure { code: EXIT_NO_RESULT, message: "no fiducial found within the restart budget".into() });
    };
    emit(&solution.to_sicfid(), output.as_deref())
}

#[derive(Serialize)]
struct VerifyOutput {
    file: String,
    symmetry: String,
    digits: usize,
    stored_frame_error: String,
    /// Residual of the overlap system at the stored precision, for files
    /// with more digits than a double holds.
    #[serde(skip_serializing_if = "Option::is_none")]
    stored_precision_residual: Option<String>,
    report: VerificationReport,
}

fn run_verify(file: &Path, tol: f64) -> Result<(), Failure> {
    let solution = store::read_solution(file)?;
    let vector = solution.to_vector()?;
    let mut report = verify_sic(&vector, tol);
    if solution.symmetry.starts_with("zauner") && solution.dim > 2 {
        report = report.with_zauner(&vector, &zauner_unitary(solution.dim)?);
    }
    let stored_precision_residual = (solution.digits > 17).then(|| {
        BigFiducial::from_solution(&solution, solution.digits)
            .map(|b| format!("1e{:.1}", b.residual_log10()))
            .unwrap_or_else(|e| e.to_string())
    });
    let passed = report.passed;
    let out = VerifyOutput {
        file: file.display().to_string(),
        symmetry: solution.symmetry.clone(),
        digits: solution.digits,
        stored_frame_error: solution.frame_error.clone(),
        stored_precision_residual,
        report,
    };
    print!("{}", store::run_summary(&out)?);
    if !passed {
        return Err(Failure {
            code: EXIT_VERIFY,
            message: format!("{} is not a SIC fiducial at tolerance {tol:e}", file.display()),
        });
    }
    Ok(())
}

fn run_refine(file: &Path, digits: usize, output: Option<&Path>) -> Result<(), Failure> {
    let solution = store::read_solution(file)?;
    eprintln!("refining d={} {} to {digits} digits", solution.dim, solution.symmetry);
    let (refined, outcome) = refine::refine_solution(&solution, digits)?;
    for (i, step) in outcome.history.iter().enumerate() {
        eprintln!("step {i}: residual 1e{:.1} at {} digits", step.residual_log10, step.digits);
    }
    emit(&refined.to_sicfid(), output)
}

#[derive(Serialize)]
struct ClassReport {
    class: usize,
    representative: String,
    stabilizer_order: usize,
    members: Vec<String>,
}

#[derive(Serialize)]
struct ClassifyOutput {
    dim: usize,
    classes: Vec<ClassReport>,
}

fn run_classify(files: &[PathBuf], max_dim: usize, catalogue: Option<&Path>) -> Result<(), Failure> {
    let solutions = files.iter().map(|f| store::read_solution(f)).collect::<Result<Vec<_>, _>>()?;
    let d = solutions[0].dim;
    if let Some(s) = solutions.iter().find(|s| s.dim != d) {
        return Err(usage(format!("mixed dimensions {d} and {}", s.dim)));
    }
    if d > max_dim.min(MAX_DIM) {
        return Err(usage(format!("dimension {d} exceeds the classification cap of {}", max_dim.min(MAX_DIM))));
    }
    let classifier = Classifier::new(d)?;
    let vectors = solutions.iter().map(SicSolution::to_vector).collect::<Result<Vec<_>, _>>()?;
    let classes = classifier.catalogue(&vectors)?;
    let name = |i: usize| files[i].display().to_string();
    let out = ClassifyOutput {
        dim: d,
        classes: classes
            .iter()
            .enumerate()
            .map(|(k, c)| ClassReport {
                class: k,
                representative: name(c.representative),
                stabilizer_order: c.stabilizer_order,
                members: c.members.iter().map(|&i| name(i)).collect(),
            })
            .collect(),
    };
    print!("{}", store::run_summary(&out)?);
    if let Some(root) = catalogue {
        let entries: Vec<store::CatalogueEntry> = classes
            .iter()
            .enumerate()
            .map(|(k, c)| {
                let rep = solutions[c.representative].clone().with_stabilizer_order(c.stabilizer_order as u64);
                (format!("c{k:03}"), rep, c.members.len())
            })
            .collect();
        store::write_catalogue(root, d, &entries)?;
        eprintln!("wrote catalogue under {}", root.join(format!("d{d}")).display());
    }
    Ok(())
}

#[derive(Serialize)]
struct Info {
    dim: usize,
    weyl_heisenberg_order: u64,
    special_linear_order: u64,
    clifford_order_mod_phases: u64,
    extended_clifford_order_mod_phases: u64,
    zauner_subspace_dims: [usize; 3],
    overlap_target: f64,
    diagonal_target: f64,
}

fn run_info(d: usize) -> Result<(), Failure> {
    let z = zauner_unitary(d)?;
    let sl = special_linear_order(d);
    let wh = (d * d) as u64;
    let info = Info {
        dim: d,
        weyl_heisenberg_order: wh,
        special_linear_order: sl,
        clifford_order_mod_phases: sl * wh,
        extended_clifford_order_mod_phases: 2 * sl * wh,
        zauner_subspace_dims: z.subspace_dims,
        overlap_target: 1.0 / (d as f64 + 1.0),
        diagonal_target: 2.0 / (d as f64 + 1.0),
    };
    print!("{}", store::run_summary(&info)?);
    Ok(())
}

fn run(cli: Cli) -> Result<(), Failure> {
    match cli.command {
        cmd @ Command::Search { .. } => run_search(cmd),
        Command::Verify { file, tol } => run_verify(&file, tol),
        Command::Refine { file, digits, output } => run_refine(&file, digits as usize, output.as_deref()),
        Command::Classify { files, max_dim, catalogue } => run_classify(&files, max_dim, catalogue.as_deref()),
        Command::Info { dim } => run_info(dim as usize),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            eprintln!("sic: {}", f.message);
            ExitCode::from(f.code)
        }
    }
}
