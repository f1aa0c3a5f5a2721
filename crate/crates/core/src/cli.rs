//! `agsy` command-line front end.

use std::fs;
use std::path::{Path, PathBuf};
use std::time::Instant;

use clap::{Args, Parser, Subcommand, ValueEnum};

use crate::builder::BuildConfig;
use crate::container;
use crate::error::{Error, Result};
use crate::report::{self, RunReport};

#[derive(Debug, Parser)]
#[command(name = "agsy", version, about = "Aggregate-symbol alphabet text compressor")]
pub struct Cli {
    /// Worker threads for candidate scoring (default: available cores).
    #[arg(long, global = true)]
    pub threads: Option<usize>,

    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Print base-alphabet statistics without building aggregates.
    Analyze {
        file: PathBuf,
        #[command(flatten)]
        out: OutputArgs,
    },
    /// Build an aggregate alphabet and report every accepted step.
    Build {
        file: PathBuf,
        #[command(flatten)]
        build: BuildArgs,
        #[command(flatten)]
        out: OutputArgs,
    },
    /// Build an alphabet and write a compressed container.
    Compress {
        input: PathBuf,
        output: PathBuf,
        #[command(flatten)]
        build: BuildArgs,
        #[command(flatten)]
        out: OutputArgs,
    },
    /// Restore the original bytes from a container.
    Decompress { input: PathBuf, output: PathBuf },
    /// Build and compress every file of a directory.
    Bench {
        dir: PathBuf,
        #[command(flatten)]
        build: BuildArgs,
        #[command(flatten)]
        out: OutputArgs,
    },
}

#[derive(Debug, Args, Clone)]
pub struct BuildArgs {
    /// Stop after this many aggregate symbols.
    #[arg(long)]
    pub max_symbols: Option<usize>,
    /// Stop once total bits per character drop to this value.
    #[arg(long)]
    pub stop_bpc: Option<f64>,
    /// Extra bits a candidate must gain beyond its header cost.
    #[arg(long, default_value_t = 0.0)]
    pub min_net_gain: f64,
    /// Cross-check every accepted gain against the probability form and a recount.
    #[arg(long)]
    pub verify: bool,
}

impl BuildArgs {
    fn config(&self) -> BuildConfig {
        BuildConfig {
            max_aggregates: self.max_symbols,
            min_net_gain_bits: self.min_net_gain,
            stop_at_bpc: self.stop_bpc,
            verify: self.verify,
            ..BuildConfig::default()
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Default)]
pub enum Format {
    #[default]
    Json,
    Csv,
}

#[derive(Debug, Args, Clone)]
pub struct OutputArgs {
    /// Write the report here instead of stdout.
    #[arg(long)]
    pub report: Option<PathBuf>,
    #[arg(long, value_enum, default_value_t = Format::Json)]
    pub format: Format,
    /// Include wall-clock time in reports (makes them non-reproducible).
    #[arg(long)]
    pub timing: bool,
}

fn read(path: &Path) -> Result<Vec<u8>> {
    fs::read(path).map_err(|e| Error::io(path, e))
}

fn write(path: &Path, data: &[u8]) -> Result<()> {
    fs::write(path, data).map_err(|e| Error::io(path, e))
}

fn emit(out: &OutputArgs, body: Vec<u8>) -> Result<()> {
    match &out.report {
        Some(path) => write(path, &body),
        None => {
            use std::io::Write;
            std::io::stdout().write_all(&body).map_err(|e| Error::io("<stdout>", e))
        }
    }
}

fn render_single(report: &RunReport, format: Format) -> Vec<u8> {
    match format {
        Format::Json => (report.to_json() + "\n").into_bytes(),
        Format::Csv if report.steps.is_empty() => {
            let mut buf = Vec::new();
            report::write_summary_csv(std::slice::from_ref(report), &mut buf).expect("in-memory csv");
            buf
        }
        Format::Csv => {
            let mut buf = Vec::new();
            report.write_steps_csv(&mut buf).expect("in-memory csv");
            buf
        }
    }
}

fn summarize(report: &RunReport) {
    let i = &report.initial;
    let f = &report.final_stats.stats;
    eprintln!(
        "{}: {} bytes, base alphabet {} ({} distinct), MXBITS {}",
        report.input_path, report.input_bytes, report.base_alphabet_size, report.distinct_symbols, report.mxbits
    );
    eprintln!(
        "  initial: header {} bits, message {:.4} bits, {:.4} / {:.4} bpc",
        i.header_bits, i.message_bits, i.bpc_message, i.bpc_total
    );
    if f.agcount > 0 {
        eprintln!(
            "  final:   {} aggregates, header {} bits, message {:.4} bits, {:.4} / {:.4} bpc",
            f.agcount, f.header_bits, f.message_bits, f.bpc_message, f.bpc_total
        );
    }
    if let Some(v) = &report.verification {
        eprintln!(
            "  verify:  {} steps, max rel dev char_gain {:.3e}, oracle {:.3e}",
            v.steps_checked, v.max_rel_dev_char_gain, v.max_rel_dev_oracle
        );
    }
}

fn run_one(path: &Path, config: &BuildConfig, timing: bool) -> Result<(RunReport, Vec<u8>)> {
    let data = read(path)?;
    let start = Instant::now();
    let compressed = container::compress(&data, config)?;
    let elapsed = timing.then(|| start.elapsed().as_secs_f64());
    let report = RunReport::new(&path.display().to_string(), config, &compressed, elapsed);
    Ok((report, compressed.container))
}

pub fn execute(cli: Cli) -> Result<()> {
    match cli.command {
        Command::Analyze { file, out } => {
            let config = BuildConfig { max_aggregates: Some(0), ..BuildConfig::default() };
            let (report, _) = run_one(&file, &config, out.timing)?;
            summarize(&report);
            emit(&out, render_single(&report, out.format))
        }
        Command::Build { file, build, out } => {
            let (report, _) = run_one(&file, &build.config(), out.timing)?;
            summarize(&report);
            emit(&out, render_single(&report, out.format))
        }
        Command::Compress { input, output, build, out } => {
            let (report, bytes) = run_one(&input, &build.config(), out.timing)?;
            write(&output, &bytes)?;
            summarize(&report);
            if out.report.is_some() {
                emit(&out, render_single(&report, out.format))?;
            }
            Ok(())
        }
        Command::Decompress { input, output } => {
            let bytes = read(&input)?;
            let data = container::decompress(&bytes)?;
            write(&output, &data)
        }
        Command::Bench { dir, build, out } => {
            let config = build.config();
            let mut files: Vec<PathBuf> = fs::read_dir(&dir)
                .map_err(|e| Error::io(&dir, e))?
                .filter_map(|entry| entry.ok().map(|e| e.path()))
                .filter(|p| p.is_file())
                .collect();
            files.sort();
            let mut reports = Vec::new();
            for path in files {
                match run_one(&path, &config, out.timing) {
                    Ok((report, _)) => {
                        summarize(&report);
                        reports.push(report);
                    }
                    Err(e) => log::warn!("skipping {}: {e}", path.display()),
                }
            }
            let body = match out.format {
                Format::Json => (report::bench_json(&reports) + "\n").into_bytes(),
                Format::Csv => {
                    let mut buf = Vec::new();
                    report::write_summary_csv(&reports, &mut buf).expect("in-memory csv");
                    buf
                }
            };
            emit(&out, body)
        }
    }
}

/// Parses `args`, runs the command and returns the process exit code.
pub fn main_with_args<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return code;
        }
    };
    let threads = cli.threads.unwrap_or(0);
    let pool = match rayon::ThreadPoolBuilder::new().num_threads(threads).build() {
        Ok(pool) => pool,
        Err(e) => {
            eprintln!("error: cannot start thread pool: {e}");
            return 1;
        }
    };
    match pool.install(|| execute(cli)) {
        Ok(()) => 0,
        Err(e) => {
            eprintln!("error: {e}");
            e.exit_code()
        }
    }
}
