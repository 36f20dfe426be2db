use std::fs::{self, File};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::Context;
use clap::Parser;
use torus_verify::config::parse_suite_list;
use torus_verify::{emit_convergence_table, run_record, run_suites, RecordSelector, SuiteConfig, SuiteReport};

/// Runs the verification suites and writes a JSON report plus a convergence CSV.
#[derive(Parser, Debug)]
#[command(name = "verify", version)]
struct Args {
    /// TOML file with grid sizes, seeds, kmax, tolerances and suites.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Comma-separated suite names; overrides the config file.
    #[arg(long)]
    suites: Option<String>,
    /// Report path. The directory part is replaced by VERIFY_OUT_DIR when set.
    #[arg(long, default_value = "verify-report.json")]
    out: PathBuf,
    /// Rerun one record, written name:seed:N.
    #[arg(long)]
    record: Option<String>,
    #[arg(long, env = "VERIFY_OUT_DIR", hide = true)]
    out_dir: Option<PathBuf>,
}

fn load(args: &Args) -> anyhow::Result<(SuiteConfig, Option<RecordSelector>)> {
    let mut config = match &args.config {
        Some(path) => SuiteConfig::load(path)?,
        None => SuiteConfig::default(),
    };
    if let Some(list) = &args.suites {
        config.suites = parse_suite_list(list)?;
    }
    config.validate()?;
    let selector = args.record.as_deref().map(str::parse).transpose()?;
    Ok((config, selector))
}

fn output_path(args: &Args) -> PathBuf {
    match &args.out_dir {
        Some(dir) => dir.join(args.out.file_name().unwrap_or("verify-report.json".as_ref())),
        None => args.out.clone(),
    }
}

fn csv_path(json: &Path) -> PathBuf {
    let stem = json.file_stem().and_then(|s| s.to_str()).unwrap_or("verify-report");
    json.with_file_name(format!("{stem}.convergence.csv"))
}

fn write(report: &SuiteReport, path: &Path) -> anyhow::Result<()> {
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        fs::create_dir_all(dir).with_context(|| format!("creating {}", dir.display()))?;
    }
    fs::write(path, report.to_json()).with_context(|| format!("writing {}", path.display()))?;
    let table = csv_path(path);
    let file = File::create(&table).with_context(|| format!("writing {}", table.display()))?;
    emit_convergence_table(report, file)?;
    Ok(())
}

fn main() -> ExitCode {
    let args = Args::parse();
    let (config, selector) = match load(&args) {
        Ok(v) => v,
        Err(e) => {
            eprintln!("verify: {e:#}");
            return ExitCode::from(2);
        }
    };
    let report = match &selector {
        Some(sel) => match run_record(&config, sel) {
            Ok(r) => r,
            Err(e) => {
                eprintln!("verify: {e}");
                return ExitCode::from(2);
            }
        },
        None => run_suites(&config),
    };
    for w in &report.warnings {
        eprintln!("warning: {w}");
    }
    for r in report.records.iter().filter(|r| !r.passed) {
        let value = r.residual.map_or("-".to_string(), |v| format!("{v:.3e}"));
        eprintln!("FAIL {} seed={} N={} residual={} {}", r.name, r.seed, r.n, value, r.cause.as_deref().unwrap_or(""));
    }
    let path = output_path(&args);
    if let Err(e) = write(&report, &path) {
        eprintln!("verify: {e:#}");
        return ExitCode::from(2);
    }
    let s = &report.summary;
    println!("{} records, {} passed, {} failed in {:.1}s -> {}", s.total, s.passed, s.failed, report.wall_seconds, path.display());
    if report.passed {
        ExitCode::SUCCESS
    } else {
        ExitCode::from(1)
    }
}
