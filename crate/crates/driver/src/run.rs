//! Simulation orchestration: sampling schedule, norm and monitor logs,
//! snapshots, checkpoints and restarts.

use std::fs::{self, File, OpenOptions};
use std::io::{BufWriter, Write};
use std::ops::ControlFlow;
use std::path::{Path, PathBuf};

use sqg_core::modulus::default_offsets;
use sqg_core::{
    build_knv_modulus, check_modulus, forward_transform, gradient_bound_check, inverse_transform,
    norms::norm_row, run_until, Cadence, LatticeOffset, ModulusOfContinuity, NormSeries, SolverState,
    SqgError,
};

use crate::config::{OffsetSpec, RunConfig};
use crate::error::{DriverError, Result};
use crate::snapshot::{self, Snapshot};

pub const NORMS_FILE: &str = "norms.csv";
pub const MODULUS_FILE: &str = "modulus.csv";
const MODULUS_HEADER: &str = "t,worst_ratio,d1,d2,breached,grad_sup,margin";

#[derive(Debug, Clone, Default)]
pub struct RunOptions {
    pub restart: Option<PathBuf>,
    /// Stop with a breach error the first time the monitor is violated.
    pub strict: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunSummary {
    pub t_start: f64,
    pub t_final: f64,
    pub steps: u64,
    pub samples: usize,
    pub breaches: usize,
    pub worst_ratio: Option<f64>,
}

#[derive(Debug, Clone, Copy, Default, PartialEq)]
struct Event {
    t: f64,
    sample: bool,
    snapshot: bool,
    checkpoint: bool,
}

fn multiples(dt: f64, t_end: f64, tol: f64) -> impl Iterator<Item = f64> {
    (1u64..).map(move |k| k as f64 * dt).take_while(move |&t| t < t_end - tol)
}

/// Every landing time of the run with what happens there. Times closer than
/// the landing tolerance are merged.
fn schedule(config: &RunConfig, tol: f64) -> Vec<Event> {
    let t_end = config.t_end;
    let mut events: Vec<Event> = Vec::new();
    let mut add = |t: f64, f: fn(&mut Event)| {
        let mut e = Event { t, ..Event::default() };
        f(&mut e);
        events.push(e);
    };
    multiples(config.sample_dt, t_end, tol).for_each(|t| add(t, |e| e.sample = true));
    if config.output.log_sampling {
        let per = config.output.log_per_decade as f64;
        (0u32..)
            .map(|k| config.output.log_t_min * 10f64.powf(k as f64 / per))
            .take_while(|&t| t < t_end - tol)
            .for_each(|t| add(t, |e| e.sample = true));
    }
    if let Some(dt) = config.output.snapshot_dt {
        multiples(dt, t_end, tol).for_each(|t| add(t, |e| e.snapshot = true));
    }
    if let Some(dt) = config.checkpoint_dt {
        multiples(dt, t_end, tol).for_each(|t| add(t, |e| e.checkpoint = true));
    }
    add(t_end, |e| {
        e.sample = true;
        e.snapshot = true;
    });
    events.sort_by(|a, b| a.t.total_cmp(&b.t));
    let mut merged: Vec<Event> = Vec::new();
    for e in events {
        match merged.last_mut() {
            Some(last) if (e.t - last.t).abs() <= tol => {
                last.sample |= e.sample;
                last.snapshot |= e.snapshot;
                last.checkpoint |= e.checkpoint;
            }
            _ => merged.push(e),
        }
    }
    merged
}

fn offsets(config: &RunConfig, omega: &ModulusOfContinuity) -> Vec<LatticeOffset> {
    let grid = config.grid();
    let mut out = default_offsets(&grid, omega.r_max());
    if let OffsetSpec::Dense(k) = config.modulus.offsets {
        for d1 in -k..=k {
            for d2 in -k..=k {
                let d = LatticeOffset::new(d1, d2);
                // ±d give the same increment; keep one of each pair.
                let positive = d1 > 0 || (d1 == 0 && d2 > 0);
                if positive && !out.contains(&d) && d.length(&grid) <= omega.r_max() {
                    out.push(d);
                }
            }
        }
    }
    out
}

struct Monitor {
    omega: ModulusOfContinuity,
    offsets: Vec<LatticeOffset>,
    log: BufWriter<File>,
    breaches: usize,
    worst: f64,
}

impl Monitor {
    fn check(&mut self, state: &SolverState, path: &Path) -> Result<bool> {
        let real = inverse_transform(&state.theta)?;
        let report = check_modulus(&real, &self.omega, &self.offsets, state.t)?;
        let bound = gradient_bound_check(&real, &self.omega)?;
        writeln!(
            self.log,
            "{},{},{},{},{},{},{}",
            sqg_core::norms::format_f64(state.t),
            sqg_core::norms::format_f64(report.worst_ratio),
            report.worst_offset.d1,
            report.worst_offset.d2,
            report.breached,
            sqg_core::norms::format_f64(bound.gradient_sup),
            sqg_core::norms::format_f64(bound.margin),
        )
        .and_then(|_| self.log.flush())
        .map_err(|e| DriverError::io(path, e))?;
        self.worst = self.worst.max(report.worst_ratio);
        if report.breached {
            self.breaches += 1;
        }
        Ok(report.breached)
    }
}

/// Keeps the lines of a CSV log whose leading time is at most `t_cut`.
fn truncated_log(path: &Path, header: &str, t_cut: f64) -> Result<String> {
    let mut out = format!("{header}\n");
    match fs::read_to_string(path) {
        Ok(text) => {
            for line in text.lines().skip(1) {
                let t = line.split(',').next().and_then(|t| t.parse::<f64>().ok());
                if t.is_some_and(|t| t <= t_cut) {
                    out.push_str(line);
                    out.push('\n');
                }
            }
        }
        Err(e) if e.kind() == std::io::ErrorKind::NotFound => {}
        Err(e) => return Err(DriverError::io(path, e)),
    }
    Ok(out)
}

fn open_log(path: &Path, initial: &str) -> Result<BufWriter<File>> {
    fs::write(path, initial).map_err(|e| DriverError::io(path, e))?;
    let file = OpenOptions::new()
        .append(true)
        .open(path)
        .map_err(|e| DriverError::io(path, e))?;
    Ok(BufWriter::new(file))
}

fn initial_state(config: &RunConfig, restart: Option<&Path>) -> Result<SolverState> {
    let grid = config.grid();
    let Some(path) = restart else {
        return Ok(SolverState::new(config.initial.build(&grid)?, config.solver.clone())?);
    };
    let snap = Snapshot::load(path)?;
    let same = |a: f64, b: f64| (a - b).abs() <= 1e-12 * a.abs().max(b.abs()).max(1.0);
    if snap.n as usize != config.n
        || !same(snap.length, config.length)
        || !same(snap.gamma, config.solver.gamma)
        || !same(snap.kappa, config.solver.kappa)
    {
        return Err(DriverError::RestartMismatch(format!(
            "snapshot has n = {}, L = {}, gamma = {}, kappa = {}",
            snap.n, snap.length, snap.gamma, snap.kappa
        )));
    }
    if !(snap.t >= 0.0 && snap.t < config.t_end) {
        return Err(DriverError::RestartMismatch(format!(
            "snapshot time {} is outside [0, t_end = {})",
            snap.t, config.t_end
        )));
    }
    let field = snap.field()?.on_grid(&grid)?;
    Ok(SolverState::at_time(forward_transform(&field)?, config.solver.clone(), snap.t)?)
}

/// Runs the configured simulation, writing its logs and binaries into `dir`.
pub fn run(config: &RunConfig, dir: &Path, options: &RunOptions) -> Result<RunSummary> {
    fs::create_dir_all(dir).map_err(|e| DriverError::io(dir, e))?;
    let state = initial_state(config, options.restart.as_deref())?;
    let t_start = state.t;
    let tol = 1e-12 * config.t_end.max(1.0);
    let events: Vec<Event> = schedule(config, tol).into_iter().filter(|e| e.t > t_start + tol).collect();

    let betas = config.output.betas.clone();
    let norms_path = dir.join(NORMS_FILE);
    let (mut norms_log, record_start) = if options.restart.is_some() && norms_path.exists() {
        let text = fs::read_to_string(&norms_path).map_err(|e| DriverError::io(&norms_path, e))?;
        let mut previous = NormSeries::from_csv(&text).map_err(|e| DriverError::Format {
            path: norms_path.clone(),
            message: e.to_string(),
        })?;
        if previous.betas() != betas.as_slice() {
            return Err(DriverError::RestartMismatch(format!(
                "{} has different extra columns",
                norms_path.display()
            )));
        }
        previous.truncate_after(t_start + tol);
        let resumed = previous.rows().last().is_some_and(|r| (r.t - t_start).abs() <= tol);
        (open_log(&norms_path, &previous.to_csv())?, !resumed && previous.is_empty())
    } else {
        (open_log(&norms_path, &format!("{}\n", NormSeries::new(betas.clone()).header()))?, true)
    };

    let modulus_path = dir.join(MODULUS_FILE);
    let mut monitor = if config.modulus.enabled {
        let r_max = config.modulus.r_max.unwrap_or(config.length);
        let omega = build_knv_modulus(config.modulus.delta3, r_max, config.modulus.table_size)?;
        let offsets = offsets(config, &omega);
        if offsets.is_empty() {
            return Err(SqgError::Config(format!("no monitor offsets fit within r_max = {r_max}")).into());
        }
        let initial = if options.restart.is_some() {
            truncated_log(&modulus_path, MODULUS_HEADER, t_start + tol)?
        } else {
            format!("{MODULUS_HEADER}\n")
        };
        Some(Monitor {
            omega,
            offsets,
            log: open_log(&modulus_path, &initial)?,
            breaches: 0,
            worst: 0.0,
        })
    } else {
        None
    };

    let mut samples = 0usize;
    // Returns the worst ratio when the monitor is breached.
    let mut sample = |s: &SolverState, monitor: &mut Option<Monitor>| -> Result<Option<f64>> {
        let row = norm_row(s, &betas)?;
        NormSeries::new(betas.clone()).push(row.clone()).map_err(|_| SqgError::BlowUp {
            t: s.t,
            step: s.step_count,
            m1: 0,
            m2: 0,
        })?;
        writeln!(norms_log, "{}", row.to_csv_line())
            .and_then(|_| norms_log.flush())
            .map_err(|e| DriverError::io(&norms_path, e))?;
        samples += 1;
        match monitor {
            Some(m) => Ok(m.check(s, &modulus_path)?.then_some(m.worst)),
            None => Ok(None),
        }
    };

    if record_start {
        if let Some(worst_ratio) = sample(&state, &mut monitor)? {
            if options.strict {
                return Err(DriverError::Breach { t: state.t, worst_ratio });
            }
        }
    }

    let times: Vec<f64> = events.iter().map(|e| e.t).collect();
    let mut next = 0usize;
    let mut failure: Option<DriverError> = None;
    let end = run_until(&state, config.t_end, &Cadence::Times(times), |s| {
        while next < events.len() && events[next].t < s.t - tol {
            next += 1;
        }
        let Some(event) = events.get(next).filter(|e| (e.t - s.t).abs() <= tol).copied() else {
            return Ok(ControlFlow::Continue(()));
        };
        let mut act = || -> Result<()> {
            if event.sample {
                if let Some(worst_ratio) = sample(s, &mut monitor)? {
                    if options.strict {
                        return Err(DriverError::Breach { t: s.t, worst_ratio });
                    }
                }
            }
            if event.snapshot {
                Snapshot::from_state(s)?.save(&dir.join(snapshot::file_name("snap", s.t)))?;
            }
            if event.checkpoint {
                Snapshot::from_state(s)?.save(&dir.join(snapshot::file_name("checkpoint", s.t)))?;
            }
            Ok(())
        };
        match act() {
            Ok(()) => Ok(ControlFlow::Continue(())),
            Err(DriverError::Core(e)) => Err(e),
            Err(e) => {
                failure = Some(e);
                Ok(ControlFlow::Break(()))
            }
        }
    })?;
    if let Some(e) = failure {
        return Err(e);
    }

    Ok(RunSummary {
        t_start,
        t_final: end.t,
        steps: end.step_count,
        samples,
        breaches: monitor.as_ref().map_or(0, |m| m.breaches),
        worst_ratio: monitor.as_ref().map(|m| m.worst),
    })
}
