//! Workbench CLI for the gl(1|1) integrable chain: verification suites,
//! Bethe-ansatz spectra, and reproduction of the reference spectra.
//!
//! Exit status: 0 when every check passed, 1 when a check failed, 2 for
//! configuration or usage errors.

mod config;

use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::Instant;

use clap::{Args, Parser, Subcommand};
use num_complex::Complex64 as C64;
use serde_json::json;

use gl11::model::{Boundary, GrassmannContext, ModelParameters};
use gl11::report::{format_complex, parse_complex, Check, ParamsRecord, VerificationReport};
use gl11::spectrum::{
    compare_tables, computed_table, table_to_csv, ReferenceTable, SpectrumResult,
};
use gl11::suites::{fusion_suite, identity_suite, rk_suite, spectrum_suite, Tolerances};

use config::{parse_config, FileConfig};

#[derive(Parser)]
#[command(name = "gl11-workbench")]
#[command(about = "Verification workbench and spectral solver for the gl(1|1) integrable chain")]
#[command(version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// R-matrix and K-matrix identities: regularity, unitarity,
    /// crossing-unitarity, Yang-Baxter, reflection equations
    VerifyRk(JobArgs),
    /// Projectors and the two-branch fusion hierarchy: closure, fused
    /// Yang-Baxter and reflection equations, K-closure
    VerifyFusion(JobArgs),
    /// Transfer-matrix identities: RTT, projection and operator product
    /// identities, commutativity, special points, asymptotics, Hamiltonians
    VerifyIdentities(JobArgs),
    /// Solve the Bethe equations, enumerate all 2^N states, certify the
    /// spectrum against determinant oracles
    Spectrum(JobArgs),
    /// Regenerate the three reference spectra as CSV and compare them
    /// against the reference values
    ReproduceTables(TableArgs),
}

#[derive(Args)]
struct JobArgs {
    /// Configuration file ([model]/[job]/[tolerances] sections)
    #[arg(long)]
    config: Option<PathBuf>,
    /// Parameter preset: table1, table2 or table3
    #[arg(long)]
    preset: Option<String>,
    /// Site count
    #[arg(long)]
    n: Option<usize>,
    /// Crossing parameter, e.g. "1" or "0.8+0.1i"
    #[arg(long)]
    eta: Option<String>,
    /// Boundary condition: periodic or open
    #[arg(long)]
    boundary: Option<String>,
    /// Seed for every randomized draw in the job
    #[arg(long)]
    seed: Option<u64>,
    /// Report file (written atomically); stdout summary either way
    #[arg(long)]
    out: Option<PathBuf>,
    /// Report format: json or csv
    #[arg(long)]
    format: Option<String>,
}

#[derive(Args)]
struct TableArgs {
    /// Output directory for table1.csv, table2.csv, table3.csv
    #[arg(long, default_value = ".")]
    out: PathBuf,
    /// Absolute tolerance for the reference-value comparison
    #[arg(long)]
    tolerance: Option<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum OutputFormat {
    Json,
    Csv,
}

struct Job {
    params: ModelParameters,
    seed: u64,
    out: Option<PathBuf>,
    format: OutputFormat,
    tolerances: Tolerances,
}

fn usage_error(msg: impl std::fmt::Display) -> ExitCode {
    eprintln!("error: {msg}");
    ExitCode::from(2)
}

fn resolve_job(args: &JobArgs, subcommand: &str) -> Result<Job, String> {
    if args.config.is_some() && args.preset.is_some() {
        return Err("--config and --preset are mutually exclusive".into());
    }
    let mut cfg = FileConfig::default();
    if let Some(path) = &args.config {
        let text = std::fs::read_to_string(path)
            .map_err(|e| format!("cannot read {}: {e}", path.display()))?;
        cfg = parse_config(&text)?;
        if let Some(kind) = &cfg.kind {
            if kind != subcommand {
                return Err(format!(
                    "config requests job '{kind}' but the '{subcommand}' subcommand was invoked"
                ));
            }
        }
    }
    if let Some(preset) = &args.preset {
        cfg.params = match preset.as_str() {
            "table1" => ReferenceTable::PeriodicN3.parameters(),
            "table2" => ReferenceTable::PeriodicN4.parameters(),
            "table3" => ReferenceTable::OpenN3.parameters(),
            other => return Err(format!("unknown preset '{other}'")),
        };
    }
    if let Some(n) = args.n {
        if n == 0 {
            return Err("site count must be positive".into());
        }
        cfg.params.n = n;
        cfg.params.theta = vec![C64::new(0.0, 0.0); n];
    }
    if let Some(eta) = &args.eta {
        cfg.params.eta = parse_complex(eta).ok_or_else(|| format!("bad eta '{eta}'"))?;
    }
    if let Some(boundary) = &args.boundary {
        cfg.params.boundary = match boundary.as_str() {
            "periodic" => Boundary::Periodic,
            "open" => {
                // give the boundary data generic defaults when nothing set them
                if cfg.params.a_plus == C64::new(0.0, 0.0)
                    && cfg.params.a_minus == C64::new(0.0, 0.0)
                {
                    let reference = ModelParameters::open_reference(cfg.params.n);
                    cfg.params.a_plus = reference.a_plus;
                    cfg.params.a_minus = reference.a_minus;
                    cfg.params.b_plus = reference.b_plus;
                    cfg.params.b_minus = reference.b_minus;
                    cfg.params.f_plus = reference.f_plus;
                    cfg.params.f_minus = reference.f_minus;
                }
                Boundary::Open
            }
            other => return Err(format!("unknown boundary '{other}'")),
        };
    }
    let format = match args
        .format
        .as_deref()
        .or(cfg.format.as_deref())
        .unwrap_or("json")
    {
        "json" => OutputFormat::Json,
        "csv" => OutputFormat::Csv,
        other => return Err(format!("unknown format '{other}'")),
    };
    Ok(Job {
        params: cfg.params,
        seed: args.seed.or(cfg.seed).unwrap_or(0),
        out: args.out.clone().or(cfg.out),
        format,
        tolerances: cfg.tolerances,
    })
}

/// Write atomically: temp file in the target directory, then rename.
fn write_atomic(path: &Path, contents: &str) -> std::io::Result<()> {
    let tmp = path.with_extension("tmp");
    {
        let mut f = std::fs::File::create(&tmp)?;
        f.write_all(contents.as_bytes())?;
        f.sync_all()?;
    }
    std::fs::rename(&tmp, path)
}

fn checks_to_csv(job: &str, seed: u64, checks: &[Check]) -> String {
    let mut out = format!("# schema 1, job {job}, seed {seed}\n");
    out.push_str("name,residual,tolerance,passed,note\n");
    for c in checks {
        out.push_str(&format!(
            "{},{:e},{:e},{},{}\n",
            c.name,
            c.residual,
            c.tolerance,
            c.passed,
            c.note.as_deref().unwrap_or("")
        ));
    }
    out
}

fn emit_report(job_name: &str, job: &Job, checks: Vec<Check>, started: Instant) -> ExitCode {
    let report = VerificationReport::new(job_name, job.seed, &job.params, checks);
    let body = match job.format {
        OutputFormat::Json => report.to_json(),
        OutputFormat::Csv => checks_to_csv(job_name, job.seed, &report.checks),
    };
    if let Some(path) = &job.out {
        if let Err(e) = write_atomic(path, &body) {
            return usage_error(format!("cannot write {}: {e}", path.display()));
        }
        println!("report written to {}", path.display());
    } else {
        println!("{body}");
    }
    let failed: Vec<&Check> = report.checks.iter().filter(|c| !c.passed).collect();
    println!(
        "{}: {} checks, {} failed, max residual {:.3e}, wall time {:.3} s",
        job_name,
        report.checks.len(),
        failed.len(),
        report.max_residual(),
        started.elapsed().as_secs_f64()
    );
    for c in failed.iter().take(10) {
        println!("  FAILED {}: {:.3e} > {:.1e}", c.name, c.residual, c.tolerance);
    }
    if report.passed {
        ExitCode::SUCCESS
    } else {
        ExitCode::from(1)
    }
}

fn spectrum_json(job: &Job, result: &SpectrumResult) -> String {
    let lines: Vec<serde_json::Value> = result
        .lines
        .iter()
        .map(|l| {
            json!({
                "roots": l.roots.finite_roots.iter().map(|r| format_complex(*r)).collect::<Vec<_>>(),
                "has_infinite_root": l.roots.has_infinite_root,
                "m": l.roots.m,
                "energy": format_complex(l.energy),
            })
        })
        .collect();
    let report = VerificationReport::new("spectrum", job.seed, &job.params, result.checks.clone());
    serde_json::to_string_pretty(&json!({
        "schema": 1,
        "job": "spectrum",
        "seed": job.seed,
        "parameters": serde_json::to_value(ParamsRecord::from(&job.params)).unwrap(),
        "lines": lines,
        "tolerances": report.tolerances,
        "checks": serde_json::to_value(&report.checks).unwrap(),
        "passed": report.passed,
    }))
    .expect("spectrum report serializes")
}

fn run_spectrum(job: &Job) -> ExitCode {
    let started = Instant::now();
    let g = GrassmannContext::new();
    let result = match spectrum_suite(&job.params, &g, job.seed, &job.tolerances) {
        Ok(r) => r,
        Err(e) => return usage_error(e),
    };
    let body = match job.format {
        OutputFormat::Json => spectrum_json(job, &result),
        OutputFormat::Csv => {
            let rows = match computed_table(&job.params) {
                Ok(r) => r,
                Err(e) => return usage_error(e),
            };
            let label = match job.params.boundary {
                Boundary::Periodic => "mu",
                Boundary::Open => "lambda",
            };
            let mut csv = format!(
                "# schema 1, job spectrum, seed {}, membership tolerance {:e}, certification tolerance {:e}\n",
                job.seed, job.tolerances.membership, job.tolerances.certification
            );
            csv.push_str(&table_to_csv(&rows, job.params.n, label));
            csv
        }
    };
    if let Some(path) = &job.out {
        if let Err(e) = write_atomic(path, &body) {
            return usage_error(format!("cannot write {}: {e}", path.display()));
        }
        println!("report written to {}", path.display());
    } else {
        println!("{body}");
    }
    let failed = result.checks.iter().filter(|c| !c.passed).count();
    println!(
        "spectrum: {} states, {} checks, {} failed, wall time {:.3} s",
        result.lines.len(),
        result.checks.len(),
        failed,
        started.elapsed().as_secs_f64()
    );
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::from(1)
    }
}

fn run_reproduce_tables(args: &TableArgs) -> ExitCode {
    let started = Instant::now();
    let tol_table3 = args.tolerance.unwrap_or(1e-4);
    if let Err(e) = std::fs::create_dir_all(&args.out) {
        return usage_error(format!("cannot create {}: {e}", args.out.display()));
    }
    let specs = [
        (ReferenceTable::PeriodicN3, "table1.csv", "mu", 1e-9),
        (ReferenceTable::PeriodicN4, "table2.csv", "mu", 1e-9),
        (ReferenceTable::OpenN3, "table3.csv", "lambda", tol_table3),
    ];
    let mut all_passed = true;
    for (table, file, label, tol) in specs {
        let p = table.parameters();
        let rows = match computed_table(&p) {
            Ok(r) => r,
            Err(e) => return usage_error(e),
        };
        let mut csv = format!("# schema 1, job reproduce-tables, tolerance {tol:e}\n");
        csv.push_str(&table_to_csv(&rows, p.n, label));
        let path = args.out.join(file);
        if let Err(e) = write_atomic(&path, &csv) {
            return usage_error(format!("cannot write {}: {e}", path.display()));
        }
        let checks = compare_tables(&rows, &table.rows(), tol);
        let failed: Vec<&Check> = checks.iter().filter(|c| !c.passed).collect();
        println!(
            "{file}: {} rows, {} comparisons, {} failed",
            rows.len(),
            checks.len(),
            failed.len()
        );
        for c in &failed {
            println!(
                "  MISMATCH {}: residual {:.3e} > {:.1e} ({})",
                c.name,
                c.residual,
                c.tolerance,
                c.note.as_deref().unwrap_or("")
            );
        }
        all_passed &= failed.is_empty();
    }
    println!("wall time {:.3} s", started.elapsed().as_secs_f64());
    if all_passed {
        ExitCode::SUCCESS
    } else {
        ExitCode::from(1)
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match &cli.command {
        Command::VerifyRk(args) => {
            let job = match resolve_job(args, "verify-rk") {
                Ok(j) => j,
                Err(e) => return usage_error(e),
            };
            let started = Instant::now();
            match rk_suite(&job.params, job.seed, job.tolerances.identity) {
                Ok(checks) => emit_report("verify-rk", &job, checks, started),
                Err(e) => usage_error(e),
            }
        }
        Command::VerifyFusion(args) => {
            let job = match resolve_job(args, "verify-fusion") {
                Ok(j) => j,
                Err(e) => return usage_error(e),
            };
            let started = Instant::now();
            match fusion_suite(&job.params, job.seed, job.tolerances.identity) {
                Ok(checks) => emit_report("verify-fusion", &job, checks, started),
                Err(e) => usage_error(e),
            }
        }
        Command::VerifyIdentities(args) => {
            let job = match resolve_job(args, "verify-identities") {
                Ok(j) => j,
                Err(e) => return usage_error(e),
            };
            let started = Instant::now();
            let g = GrassmannContext::new();
            match identity_suite(&job.params, &g, job.seed, &job.tolerances) {
                Ok(checks) => emit_report("verify-identities", &job, checks, started),
                Err(e) => usage_error(e),
            }
        }
        Command::Spectrum(args) => {
            let job = match resolve_job(args, "spectrum") {
                Ok(j) => j,
                Err(e) => return usage_error(e),
            };
            run_spectrum(&job)
        }
        Command::ReproduceTables(args) => run_reproduce_tables(args),
    }
}
