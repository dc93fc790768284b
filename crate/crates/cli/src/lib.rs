//! `urdf-inspect` command line.
//!
//! Exit codes: 0 success, 1 `validate` found errors (or `inspect` could not
//! parse its file), 2 usage error, 3 I/O failure.

use std::ffi::OsString;
use std::fs;
use std::io::{self, Write};
use std::path::{Path, PathBuf};

use clap::{Parser, Subcommand};
use urdf_inspect::bundle::{display_path, relative};
use urdf_inspect::corpus::{analyze_corpus, diagnose, CorpusAnalysis};
use urdf_inspect::report::{self, Format, ReportTable, DIAGNOSTIC_COLUMNS};
use urdf_inspect::{parse_urdf, FkOptions};

pub const EXIT_OK: i32 = 0;
pub const EXIT_FINDINGS: i32 = 1;
pub const EXIT_USAGE: i32 = 2;
pub const EXIT_IO: i32 = 3;

/// Environment variable capping the number of worker threads.
pub const JOBS_VAR: &str = "URDF_INSPECT_JOBS";

#[derive(Debug, Parser)]
#[command(name = "urdf-inspect", version, about = "Validate URDF files and analyse URDF corpora")]
struct Cli {
    /// Output format for tables.
    #[arg(long, global = true, default_value = "csv")]
    format: Format,
    /// Write one file per table into this directory instead of stdout.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// Joint configurations sampled per forward-kinematics comparison.
    #[arg(long, global = true, default_value_t = 16)]
    fk_samples: usize,
    /// Forward-kinematics tolerance (meters and radians).
    #[arg(long, global = true, default_value_t = 1e-6)]
    fk_tol: f64,
    /// Seed for the sampled joint configurations.
    #[arg(long, global = true, default_value_t = 0)]
    seed: u64,
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Report diagnostics for a URDF file or every URDF under a directory.
    Validate { path: PathBuf },
    /// Show links, joints and mesh types of one URDF file.
    Inspect { file: PathBuf },
    /// Run every corpus analysis and emit all tables.
    Scan { root: PathBuf },
    /// Compare robots defined by several sources.
    Compare { root: PathBuf },
    /// Find identical files across the corpus.
    Dupes { root: PathBuf },
    /// Model, name, contact and license statistics.
    Stats { root: PathBuf },
}

#[derive(Debug)]
enum Failure {
    Usage(String),
    Io(String),
}

impl Failure {
    fn io(context: impl std::fmt::Display, e: impl std::fmt::Display) -> Self {
        Failure::Io(format!("{context}: {e}"))
    }
}

/// Run with `argv` (including the program name), writing tables to `stdout`
/// and messages to `stderr`. Returns the process exit code.
pub fn run_cli_with<I, T>(argv: I, stdout: &mut (dyn Write + Send), stderr: &mut (dyn Write + Send)) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_USAGE } else { EXIT_OK };
            let text = e.render().to_string();
            let _ = if e.use_stderr() {
                stderr.write_all(text.as_bytes())
            } else {
                stdout.write_all(text.as_bytes())
            };
            return code;
        }
    };
    let pool = match thread_pool() {
        Ok(pool) => pool,
        Err(msg) => {
            let _ = writeln!(stderr, "error: {msg}");
            return EXIT_USAGE;
        }
    };
    match pool.install(|| execute(&cli, stdout, stderr)) {
        Ok(code) => code,
        Err(Failure::Usage(msg)) => {
            let _ = writeln!(stderr, "error: {msg}");
            EXIT_USAGE
        }
        Err(Failure::Io(msg)) => {
            let _ = writeln!(stderr, "error: {msg}");
            EXIT_IO
        }
    }
}

pub fn run_cli<I, T>(argv: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let mut out = io::stdout();
    let mut err = io::stderr();
    run_cli_with(argv, &mut out, &mut err)
}

fn thread_pool() -> Result<rayon::ThreadPool, String> {
    let mut builder = rayon::ThreadPoolBuilder::new();
    if let Ok(v) = std::env::var(JOBS_VAR) {
        match v.trim().parse::<usize>() {
            Ok(n) if n > 0 => builder = builder.num_threads(n),
            _ => return Err(format!("{JOBS_VAR} must be a positive integer, got `{v}`")),
        }
    }
    builder.build().map_err(|e| e.to_string())
}

fn fk_options(cli: &Cli) -> Result<FkOptions, Failure> {
    if !(cli.fk_tol.is_finite() && cli.fk_tol > 0.0) {
        return Err(Failure::Usage(format!("--fk-tol must be positive, got {}", cli.fk_tol)));
    }
    if cli.fk_samples == 0 {
        return Err(Failure::Usage("--fk-samples must be at least 1".into()));
    }
    Ok(FkOptions {
        samples: cli.fk_samples,
        seed: cli.seed,
        tol: cli.fk_tol,
    })
}

fn execute(cli: &Cli, stdout: &mut (dyn Write + Send), stderr: &mut (dyn Write + Send)) -> Result<i32, Failure> {
    let opts = fk_options(cli)?;
    match &cli.command {
        Command::Validate { path } => {
            let (table, failed) = validate_path(path)?;
            write_tables(cli, &[table], stdout)?;
            Ok(if failed { EXIT_FINDINGS } else { EXIT_OK })
        }
        Command::Inspect { file } => {
            let raw = fs::read(file).map_err(|e| Failure::io(file.display(), e))?;
            let name = file_label(file);
            match parse_urdf(&raw) {
                Ok(model) => {
                    write_tables(cli, &[report::model_info(Path::new(&name), &model)], stdout)?;
                    Ok(EXIT_OK)
                }
                Err(failure) => {
                    let _ = writeln!(stderr, "{name}:{}:{}: {failure}", failure.pos.line, failure.pos.column);
                    Ok(EXIT_FINDINGS)
                }
            }
        }
        Command::Scan { root } => {
            let corpus = corpus(root)?;
            let dupes = corpus.duplicates();
            let reports = corpus.discrepancies(&opts);
            write_tables(cli, &report::scan_tables(&corpus, &dupes, &reports), stdout)?;
            Ok(EXIT_OK)
        }
        Command::Compare { root } => {
            let corpus = corpus(root)?;
            let reports = corpus.discrepancies(&opts);
            let tables = [report::discrepancies(&reports), report::discrepancy_summary(&reports)];
            write_tables(cli, &tables, stdout)?;
            Ok(EXIT_OK)
        }
        Command::Dupes { root } => {
            let corpus = corpus(root)?;
            let dupes = corpus.duplicates();
            let tables = [
                report::duplicates(&corpus, &dupes),
                report::duplicates_by_source(&corpus, &dupes),
                report::dedup_errors(&corpus, &dupes),
            ];
            write_tables(cli, &tables, stdout)?;
            Ok(EXIT_OK)
        }
        Command::Stats { root } => {
            let corpus = corpus(root)?;
            write_tables(cli, &report::stats_tables(&corpus), stdout)?;
            Ok(EXIT_OK)
        }
    }
}

fn corpus(root: &Path) -> Result<CorpusAnalysis, Failure> {
    analyze_corpus(root).map_err(|e| Failure::Io(e.to_string()))
}

/// File name only, so outputs never carry absolute paths.
fn file_label(file: &Path) -> String {
    file.file_name()
        .map(|n| n.to_string_lossy().into_owned())
        .unwrap_or_else(|| display_path(file))
}

fn is_urdf(path: &Path) -> bool {
    path.extension()
        .is_some_and(|e| e.eq_ignore_ascii_case("urdf"))
}

fn validate_path(path: &Path) -> Result<(ReportTable, bool), Failure> {
    let meta = fs::metadata(path).map_err(|e| Failure::io(path.display(), e))?;
    let files: Vec<(String, PathBuf)> = if meta.is_dir() {
        let mut files = Vec::new();
        collect_urdfs(path, &mut files)?;
        files.sort();
        files
            .into_iter()
            .map(|f| (display_path(&relative(path, &f)), f))
            .collect()
    } else {
        vec![(file_label(path), path.to_path_buf())]
    };
    let mut table = ReportTable::new("validation", &DIAGNOSTIC_COLUMNS);
    let mut failed = false;
    for (label, file) in files {
        let raw = fs::read(&file).map_err(|e| Failure::io(file.display(), e))?;
        let diags = diagnose(&parse_urdf(&raw));
        failed |= diags.iter().any(|d| d.is_error());
        report::push_diagnostics(&mut table, &label, &diags);
    }
    Ok((table, failed))
}

fn collect_urdfs(dir: &Path, out: &mut Vec<PathBuf>) -> Result<(), Failure> {
    let entries = fs::read_dir(dir).map_err(|e| Failure::io(dir.display(), e))?;
    for entry in entries {
        let entry = entry.map_err(|e| Failure::io(dir.display(), e))?;
        let path = entry.path();
        let ty = entry.file_type().map_err(|e| Failure::io(path.display(), e))?;
        if ty.is_dir() {
            collect_urdfs(&path, out)?;
        } else if ty.is_file() && is_urdf(&path) {
            out.push(path);
        }
    }
    Ok(())
}

fn write_tables(cli: &Cli, tables: &[ReportTable], stdout: &mut (dyn Write + Send)) -> Result<(), Failure> {
    match &cli.out {
        Some(dir) => {
            fs::create_dir_all(dir).map_err(|e| Failure::io(dir.display(), e))?;
            for table in tables {
                let path = dir.join(format!("{}.{}", table.name, cli.format.extension()));
                let bytes = report::render(table, cli.format).map_err(|e| Failure::io(&table.name, e))?;
                fs::write(&path, bytes).map_err(|e| Failure::io(path.display(), e))?;
            }
        }
        None if tables.len() == 1 => {
            report::emit(&tables[0], cli.format, stdout).map_err(|e| Failure::io("stdout", e))?;
        }
        None => {
            for (i, table) in tables.iter().enumerate() {
                let sep = if i == 0 { "" } else { "\n" };
                writeln!(stdout, "{sep}# {}", table.name).map_err(|e| Failure::io("stdout", e))?;
                report::emit(table, cli.format, stdout).map_err(|e| Failure::io("stdout", e))?;
            }
        }
    }
    Ok(())
}
