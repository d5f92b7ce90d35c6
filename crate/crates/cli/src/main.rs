mod claims;
mod cli;
mod config;
mod report;

use std::ffi::OsString;
use std::path::Path;
use std::process::ExitCode;
use std::time::Instant;

use anyhow::{bail, Context, Result};
use clap::{CommandFactory, Parser};

use cli::{Cli, Command, Format, Group, Verify};
use report::VerificationReport;

/// An error in how the tool was invoked, as opposed to one in a computation.
#[derive(Debug)]
pub struct UsageError(pub String);

impl std::fmt::Display for UsageError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(&self.0)
    }
}

impl std::error::Error for UsageError {}

const EXIT_CLAIM_FAILED: u8 = 1;
const EXIT_USAGE: u8 = 2;
const EXIT_INTERNAL: u8 = 3;

fn exit_code(e: &anyhow::Error) -> u8 {
    if e.downcast_ref::<UsageError>().is_some() {
        return EXIT_USAGE;
    }
    match e.downcast_ref::<ricciforge_core::Error>() {
        Some(
            ricciforge_core::Error::InvalidParameter(_)
            | ricciforge_core::Error::Domain { .. }
            | ricciforge_core::Error::TooLarge { .. },
        ) => EXIT_USAGE,
        _ => EXIT_INTERNAL,
    }
}

fn configure_threads() -> Result<()> {
    let Ok(v) = std::env::var("RICCIFORGE_THREADS") else { return Ok(()) };
    let n: usize = match v.trim().parse() {
        Ok(n) if n > 0 => n,
        _ => bail!(UsageError(format!("RICCIFORGE_THREADS must be a positive integer, got `{v}`"))),
    };
    rayon::ThreadPoolBuilder::new().num_threads(n).build_global().context("building the worker pool")?;
    Ok(())
}

fn timed<F: FnOnce() -> Result<Vec<VerificationReport>>>(timing: bool, f: F) -> Result<Vec<VerificationReport>> {
    let t = Instant::now();
    let mut reports = f()?;
    if timing {
        let ms = t.elapsed().as_millis() as u64;
        for r in &mut reports {
            r.runtime_ms = ms;
        }
    }
    Ok(reports)
}

fn emit(reports: &[VerificationReport], format: Format, mut w: impl std::io::Write) -> Result<()> {
    match format {
        Format::Json => report::write_json(reports, &mut w),
        Format::Csv => report::write_csv(reports, &mut w),
    }
}

fn read_reports(input: &Path) -> Result<Vec<VerificationReport>> {
    let mut files = Vec::new();
    if input.is_dir() {
        for entry in std::fs::read_dir(input).with_context(|| format!("listing {}", input.display()))? {
            let p = entry?.path();
            if p.extension().is_some_and(|e| e == "json") {
                files.push(p);
            }
        }
        files.sort();
    } else if input.is_file() {
        files.push(input.to_path_buf());
    } else {
        bail!(UsageError(format!("no such report file or directory: {}", input.display())));
    }
    let mut out = Vec::new();
    for f in files {
        let text = std::fs::read_to_string(&f).with_context(|| format!("reading {}", f.display()))?;
        out.extend(report::read_json(&text).with_context(|| format!("parsing {}", f.display()))?);
    }
    Ok(out)
}

fn run(cli: Cli) -> Result<Vec<VerificationReport>> {
    let timing = cli.timing;
    let reports = match cli.command {
        Command::Verify(v) => match v {
            Verify::Ricci(a) => timed(timing, || {
                let lambda = claims::resolve_lambda(a.k, a.lambda, claims::AUTO_DELTA)?;
                Ok(vec![claims::ricci_band(a.k, lambda, a.samples, a.exclusion, a.seed, claims::AUTO_DELTA)?])
            })?,
            Verify::Chern(a) => timed(timing, || claims::chern(a.k, a.radius, a.clifford))?,
            Verify::Diameter(a) => timed(timing, || {
                let lambda = claims::resolve_lambda(a.k, a.lambda, claims::AUTO_DELTA)?;
                Ok(vec![claims::diameter(a.k, lambda, a.nodes, a.seed, a.round)?])
            })?,
            Verify::Green => timed(timing, claims::green)?,
            Verify::Conformal(a) => timed(timing, || {
                let lambda = claims::resolve_lambda(a.k, a.lambda, claims::AUTO_DELTA)?;
                claims::conformal(a.k, lambda, a.samples, a.seed)
            })?,
            Verify::Framebundle(a) => timed(timing, || Ok(vec![claims::framebundle(a.ric_lower, a.rm, a.drm, a.dk)?]))?,
        },
        Command::Group(g) => match g {
            Group::Index { k } => timed(timing, || Ok(vec![claims::group_index(k)?]))?,
            Group::Relations { k } => timed(timing, || Ok(vec![claims::group_relations(k)?]))?,
        },
        Command::Sweep(a) => {
            let mut all = Vec::new();
            for k in a.k_range.start..=a.k_range.end {
                all.extend(timed(timing, || claims::sweep_one(k, a.delta, a.samples, a.seed))?);
            }
            std::fs::create_dir_all(&a.out).with_context(|| format!("creating {}", a.out.display()))?;
            let json = a.out.join("reports.json");
            emit(
                &all,
                Format::Json,
                std::fs::File::create(&json).with_context(|| format!("writing {}", json.display()))?,
            )?;
            let csv = a.out.join("reports.csv");
            emit(
                &all,
                Format::Csv,
                std::fs::File::create(&csv).with_context(|| format!("writing {}", csv.display()))?,
            )?;
            all
        }
        Command::Report(a) => read_reports(&a.input)?,
    };
    Ok(reports)
}

fn main() -> ExitCode {
    let mut argv: Vec<OsString> = std::env::args_os().collect();
    if let Some(path) = config::config_path(&argv) {
        match config::load(&path) {
            Ok(cfg) => argv = config::merge(&Cli::command(), argv, &cfg),
            Err(e) => {
                eprintln!("error: {e:#}");
                return ExitCode::from(EXIT_USAGE);
            }
        }
    }
    let cli = match Cli::try_parse_from(argv) {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { EXIT_USAGE } else { 0 });
        }
    };
    let (format, output) = (cli.format, cli.output.clone());
    let result = configure_threads().and_then(|()| run(cli)).and_then(|reports| {
        emit(&reports, format, std::io::stdout().lock())?;
        if let Some(path) = output {
            let f = std::fs::File::create(&path).with_context(|| format!("writing {}", path.display()))?;
            emit(&reports, format, f)?;
        }
        Ok(reports)
    });
    match result {
        Ok(reports) if reports.iter().all(|r| r.passed) => ExitCode::SUCCESS,
        Ok(_) => ExitCode::from(EXIT_CLAIM_FAILED),
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(exit_code(&e))
        }
    }
}
