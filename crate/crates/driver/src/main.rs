use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};
use sqg_core::decay::fit_decay_exponent;
use sqg_core::modulus::default_offsets;
use sqg_core::norms::format_f64;
use sqg_core::oracles::{run_suite, OracleReport, Suite};
use sqg_core::{build_knv_modulus, check_boundedness, check_modulus, NormSeries, SingularEnd};
use sqg_driver::{parse_config, run, DriverError, Result, RunOptions, Snapshot};

const OUTPUT_ENV: &str = "SQG_OUTPUT_DIR";

#[derive(Parser)]
#[command(name = "sqg", version, about = "Dissipative quasi-geostrophic solver and diagnostics")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run a simulation from a configuration file.
    Run {
        #[arg(long)]
        config: PathBuf,
        /// Resume from a snapshot or checkpoint written by an earlier run.
        #[arg(long)]
        restart: Option<PathBuf>,
        /// Exit with status 3 at the first modulus breach.
        #[arg(long)]
        strict: bool,
    },
    /// Run the reference-solution checks and write oracle_report.csv.
    Oracle {
        #[arg(long, default_value = "all")]
        suite: String,
        /// Directory for the report; defaults to $SQG_OUTPUT_DIR or the current one.
        #[arg(long)]
        output: Option<PathBuf>,
    },
    /// Check one snapshot against the modulus of continuity.
    ModulusCheck {
        #[arg(long)]
        field: PathBuf,
        #[arg(long)]
        delta3: f64,
        /// Largest tabulated separation; defaults to the box length.
        #[arg(long)]
        r_max: Option<f64>,
        #[arg(long, default_value_t = 1024)]
        table_size: usize,
    },
    /// Fit a power law to a norms.csv column, or check a weighted supremum.
    Analyze {
        #[arg(long)]
        norms: PathBuf,
        #[arg(long)]
        column: String,
        /// Time window `A:B`.
        #[arg(long)]
        window: String,
        /// Report `sup t^W · value` over the window instead of a fit.
        #[arg(long)]
        weight: Option<f64>,
        /// Which end of the window the stabilization test looks at.
        #[arg(long, value_enum, default_value_t = End::Late)]
        end: End,
    },
}

#[derive(Clone, Copy, ValueEnum)]
enum End {
    Late,
    Early,
}

fn parse_window(text: &str) -> Result<(f64, f64)> {
    let bad = || DriverError::Usage(format!("window must look like A:B, got `{text}`"));
    let (a, b) = text.split_once(':').ok_or_else(bad)?;
    let a = a.trim().parse::<f64>().map_err(|_| bad())?;
    let b = b.trim().parse::<f64>().map_err(|_| bad())?;
    Ok((a, b))
}

fn read_text(path: &Path) -> Result<String> {
    fs::read_to_string(path).map_err(|e| DriverError::io(path, e))
}

fn cmd_run(config_path: &Path, restart: Option<PathBuf>, strict: bool) -> Result<()> {
    let text = read_text(config_path)?;
    let config = parse_config(&text).map_err(|source| DriverError::Config {
        path: config_path.to_path_buf(),
        source,
    })?;
    let dir = std::env::var_os(OUTPUT_ENV).map_or_else(|| config.output.directory.clone(), PathBuf::from);
    let summary = run(&config, &dir, &RunOptions { restart, strict })?;
    eprintln!(
        "finished t = {} -> {} in {} steps, {} samples written to {}",
        summary.t_start,
        summary.t_final,
        summary.steps,
        summary.samples,
        dir.display()
    );
    if let Some(worst) = summary.worst_ratio {
        eprintln!("modulus: worst ratio {worst:.6}, {} breached samples", summary.breaches);
    }
    Ok(())
}

fn cmd_oracle(suite: &str, output: Option<PathBuf>) -> Result<()> {
    let suite: Suite = suite.parse()?;
    let dir = output
        .or_else(|| std::env::var_os(OUTPUT_ENV).map(PathBuf::from))
        .unwrap_or_else(|| PathBuf::from("."));
    fs::create_dir_all(&dir).map_err(|e| DriverError::io(&dir, e))?;
    let reports = run_suite(suite)?;
    let mut csv = format!("{}\n", OracleReport::CSV_HEADER);
    for r in &reports {
        csv.push_str(&r.to_csv_row());
        csv.push('\n');
    }
    let path = dir.join("oracle_report.csv");
    fs::write(&path, &csv).map_err(|e| DriverError::io(&path, e))?;
    print!("{csv}");
    let failed: Vec<String> = reports.iter().filter(|r| !r.pass).map(|r| r.name.clone()).collect();
    if failed.is_empty() {
        Ok(())
    } else {
        Err(DriverError::OracleFailure(failed))
    }
}

fn cmd_modulus_check(field: &Path, delta3: f64, r_max: Option<f64>, table_size: usize) -> Result<()> {
    let snap = Snapshot::load(field)?;
    let theta = snap.field()?;
    let omega = build_knv_modulus(delta3, r_max.unwrap_or(snap.length), table_size)?;
    let offsets = default_offsets(theta.grid(), omega.r_max());
    let report = check_modulus(&theta, &omega, &offsets, snap.t)?;
    println!("time,worst_ratio,d1,d2,breached");
    println!(
        "{},{},{},{},{}",
        format_f64(report.time),
        format_f64(report.worst_ratio),
        report.worst_offset.d1,
        report.worst_offset.d2,
        report.breached
    );
    Ok(())
}

fn cmd_analyze(norms: &Path, column: &str, window: &str, weight: Option<f64>, end: End) -> Result<()> {
    let series = NormSeries::from_csv(&read_text(norms)?).map_err(|e| DriverError::Format {
        path: norms.to_path_buf(),
        message: e.to_string(),
    })?;
    let col = series.column_by_name(column)?;
    let (a, b) = parse_window(window)?;
    match weight {
        None => {
            let fit = fit_decay_exponent(&series, col, (a, b))?;
            println!("t_a,t_b,alpha,amplitude,residual_rms,samples");
            println!(
                "{},{},{},{},{},{}",
                format_f64(fit.t_a),
                format_f64(fit.t_b),
                format_f64(fit.alpha),
                format_f64(fit.amplitude),
                format_f64(fit.residual_rms),
                fit.samples
            );
        }
        Some(w) => {
            let mut windowed = NormSeries::new(series.betas().to_vec());
            for row in series.rows().iter().filter(|r| r.t >= a && r.t <= b) {
                windowed.push(row.clone())?;
            }
            if windowed.is_empty() {
                return Err(DriverError::Usage(format!("no samples in window [{a}, {b}]")));
            }
            let end = match end {
                End::Late => SingularEnd::Late,
                End::Early => SingularEnd::Early,
            };
            let bound = check_boundedness(&windowed, w, col, end)?;
            println!("weight,sup,t_at_sup,stabilized");
            println!(
                "{},{},{},{}",
                format_f64(w),
                format_f64(bound.sup),
                format_f64(bound.t_at_sup),
                bound.stabilized
            );
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { 1 } else { 0 });
        }
    };
    let result = match cli.command {
        Command::Run { config, restart, strict } => cmd_run(&config, restart, strict),
        Command::Oracle { suite, output } => cmd_oracle(&suite, output),
        Command::ModulusCheck {
            field,
            delta3,
            r_max,
            table_size,
        } => cmd_modulus_check(&field, delta3, r_max, table_size),
        Command::Analyze {
            norms,
            column,
            window,
            weight,
            end,
        } => cmd_analyze(&norms, &column, &window, weight, end),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("sqg: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
