//! Time evolution: pseudo-spectral advection, exact dissipation through an
//! integrating factor, classical RK4, CFL-limited adaptive steps.

use std::ops::ControlFlow;
use std::sync::Arc;

use num_complex::Complex64;

use crate::error::{Result, SqgError};
use crate::field::{forward_unchecked, inverse_pair, SpectralField};
use crate::grid::Grid;
use crate::par;
use crate::spectral::{dealias_in_place, max_magnitude, riesz_coeffs, validate_gamma};

const ZERO: Complex64 = Complex64::new(0.0, 0.0);
const I: Complex64 = Complex64::new(0.0, 1.0);

/// Parameters of the time integrator.
#[derive(Debug, Clone, PartialEq)]
pub struct SolverConfig {
    /// Dissipation order, in `(0, 2]`.
    pub gamma: f64,
    /// Dissipation coefficient; `1` is the physical equation, `0` inviscid.
    pub kappa: f64,
    /// Courant factor in `(0, 1]`.
    pub cfl: f64,
    pub dt_max: f64,
    pub dt_min: f64,
    /// 2/3-rule truncation of the advection term.
    pub dealias: bool,
    /// Include `u·∇θ`; switching it off leaves the pure dissipation semigroup.
    pub nonlinear: bool,
    /// Total step budget for a state.
    pub max_steps: u64,
}

impl Default for SolverConfig {
    fn default() -> Self {
        Self {
            gamma: 1.0,
            kappa: 1.0,
            cfl: 0.5,
            dt_max: 0.05,
            dt_min: 1e-8,
            dealias: true,
            nonlinear: true,
            max_steps: 10_000_000,
        }
    }
}

impl SolverConfig {
    pub fn validate(&self) -> Result<()> {
        validate_gamma(self.gamma)?;
        if !(self.kappa.is_finite() && self.kappa >= 0.0) {
            return Err(SqgError::Parameter(format!(
                "kappa must be non-negative, got {}",
                self.kappa
            )));
        }
        if !(self.cfl > 0.0 && self.cfl <= 1.0) {
            return Err(SqgError::Parameter(format!(
                "cfl must lie in (0, 1], got {}",
                self.cfl
            )));
        }
        if !(self.dt_min > 0.0 && self.dt_min <= self.dt_max && self.dt_max.is_finite()) {
            return Err(SqgError::Parameter(format!(
                "need 0 < dt_min <= dt_max, got dt_min = {}, dt_max = {}",
                self.dt_min, self.dt_max
            )));
        }
        Ok(())
    }
}

/// One point of a trajectory.
#[derive(Debug, Clone)]
pub struct SolverState {
    pub t: f64,
    pub theta: SpectralField,
    /// Step size used by the most recent (or next, when set by hand) step.
    pub dt: f64,
    pub config: SolverConfig,
    pub step_count: u64,
    /// `κ|k|^γ` per mode.
    symbol: Arc<[f64]>,
}

impl SolverState {
    pub fn new(theta: SpectralField, config: SolverConfig) -> Result<Self> {
        Self::at_time(theta, config, 0.0)
    }

    /// A state starting at time `t`, as when resuming from a snapshot.
    pub fn at_time(theta: SpectralField, config: SolverConfig, t: f64) -> Result<Self> {
        config.validate()?;
        if !(t.is_finite() && t >= 0.0) {
            return Err(SqgError::Parameter(format!("time must be >= 0, got {t}")));
        }
        theta.check_hermitian(crate::field::HERMITIAN_TOLERANCE)?;
        let symbol = dissipation_symbol(theta.grid(), config.gamma, config.kappa);
        Ok(Self {
            t,
            theta,
            dt: config.dt_max,
            config,
            step_count: 0,
            symbol,
        })
    }

    pub fn grid(&self) -> &Grid {
        self.theta.grid()
    }

    /// Returns a copy carrying a new field, keeping time and counters.
    pub fn with_theta(&self, theta: SpectralField) -> Result<Self> {
        if theta.grid() != self.grid() {
            return Err(SqgError::GridMismatch);
        }
        Ok(Self {
            theta,
            ..self.clone()
        })
    }
}

fn dissipation_symbol(grid: &Grid, gamma: f64, kappa: f64) -> Arc<[f64]> {
    let n = grid.n();
    let mut out = vec![0.0; grid.len()];
    par::for_each_row(&mut out, n, |i1, row| {
        for (i2, v) in row.iter_mut().enumerate() {
            let k = grid.k_magnitude(i1, i2);
            *v = if k == 0.0 { 0.0 } else { kappa * k.powf(gamma) };
        }
    });
    out.into()
}

/// Spectral coefficients of `u·∇θ`, with `u` the Riesz velocity of `θ`.
///
/// Products are formed on the grid. With `dealias` set, both the input and
/// the output are truncated by the 2/3 rule, so the quadratic product is free
/// of aliasing on the retained modes. The mean coefficient is exactly zero.
pub fn nonlinear_term(theta: &SpectralField, dealias: bool) -> SpectralField {
    let grid = theta.grid().clone();
    let coeffs = advection_coeffs(&grid, theta.coeffs(), dealias);
    SpectralField::from_parts(grid, coeffs)
}

fn advection_coeffs(grid: &Grid, theta: &[Complex64], dealias: bool) -> Vec<Complex64> {
    let n = grid.n();
    let mut src = theta.to_vec();
    if dealias {
        dealias_in_place(grid, &mut src);
    }
    let src = SpectralField::from_parts(grid.clone(), src);
    let (u1, u2) = riesz_coeffs(&src);
    let kd = grid.derivative_wavenumbers();
    let mut g1 = vec![ZERO; grid.len()];
    let mut g2 = vec![ZERO; grid.len()];
    let s = src.coeffs();
    par::for_each_row(&mut g1, n, |i1, row| {
        for (i2, out) in row.iter_mut().enumerate() {
            *out = I * kd[i1] * s[i1 * n + i2];
        }
    });
    par::for_each_row(&mut g2, n, |i1, row| {
        for (i2, out) in row.iter_mut().enumerate() {
            *out = I * kd[i2] * s[i1 * n + i2];
        }
    });
    let (u1r, g1r) = inverse_pair(&u1, &g1, grid);
    let (u2r, g2r) = inverse_pair(&u2, &g2, grid);
    let mut product = vec![0.0; grid.len()];
    par::for_each_row(&mut product, n, |r, row| {
        for (c, out) in row.iter_mut().enumerate() {
            let j = r * n + c;
            *out = u1r[j] * g1r[j] + u2r[j] * g2r[j];
        }
    });
    let mut out = forward_unchecked(grid, &product).into_coeffs();
    out[0] = ZERO;
    if dealias {
        dealias_in_place(grid, &mut out);
    }
    out
}

/// Grid maximum of `|u|` for the Riesz velocity of `theta`.
pub fn max_velocity(theta: &SpectralField) -> f64 {
    let (u1, u2) = riesz_coeffs(theta);
    let (a, b) = inverse_pair(&u1, &u2, theta.grid());
    max_magnitude(&a, &b, theta.grid().n())
}

/// CFL step `clamp(cfl Δx / ‖u‖_∞, dt_min, dt_max)`; `dt_max` when `u = 0`.
pub fn adapt_dt(state: &SolverState) -> f64 {
    let c = &state.config;
    let umax = max_velocity(&state.theta);
    if umax == 0.0 {
        return c.dt_max;
    }
    (c.cfl * state.grid().dx() / umax).clamp(c.dt_min, c.dt_max)
}

/// Advances by `state.dt` with integrating-factor RK4.
///
/// RK4 is applied to `φ̂ = e^{κ|k|^γ t} θ̂`, so the dissipation semigroup is
/// exact and only the advection term carries time-discretization error.
/// Steps shorter than `dt_min` are accepted (needed to land on output times).
pub fn step(state: &SolverState) -> Result<SolverState> {
    let dt = state.dt;
    if !(dt > 0.0 && dt <= state.config.dt_max * (1.0 + 1e-12)) {
        return Err(SqgError::Parameter(format!(
            "dt must lie in (0, dt_max = {}], got {dt}",
            state.config.dt_max
        )));
    }
    let grid = state.grid().clone();
    let theta = state.theta.coeffs();
    let full: Vec<f64> = state.symbol.iter().map(|l| (-l * dt).exp()).collect();
    let half: Vec<f64> = state.symbol.iter().map(|l| (-l * dt * 0.5).exp()).collect();

    let next: Vec<Complex64> = if state.config.nonlinear {
        let dealias = state.config.dealias;
        let rhs = |c: &[Complex64]| -> Vec<Complex64> {
            advection_coeffs(&grid, c, dealias)
                .into_iter()
                .map(|z| -z)
                .collect()
        };
        let k1 = rhs(theta);
        let a: Vec<Complex64> = (0..theta.len())
            .map(|j| half[j] * (theta[j] + 0.5 * dt * k1[j]))
            .collect();
        let k2 = rhs(&a);
        let b: Vec<Complex64> = (0..theta.len())
            .map(|j| half[j] * theta[j] + 0.5 * dt * k2[j])
            .collect();
        let k3 = rhs(&b);
        let c: Vec<Complex64> = (0..theta.len())
            .map(|j| full[j] * theta[j] + dt * half[j] * k3[j])
            .collect();
        let k4 = rhs(&c);
        (0..theta.len())
            .map(|j| {
                full[j] * theta[j]
                    + dt / 6.0 * (full[j] * k1[j] + 2.0 * half[j] * (k2[j] + k3[j]) + k4[j])
            })
            .collect()
    } else {
        theta.iter().zip(&full).map(|(c, e)| c * e).collect()
    };

    let t = state.t + dt;
    let step_count = state.step_count + 1;
    if let Some((m1, m2)) = worst_non_finite(&grid, &next) {
        return Err(SqgError::BlowUp {
            t,
            step: step_count,
            m1,
            m2,
        });
    }
    Ok(SolverState {
        t,
        theta: SpectralField::from_parts(grid, next),
        dt,
        config: state.config.clone(),
        step_count,
        symbol: state.symbol.clone(),
    })
}

fn worst_non_finite(grid: &Grid, coeffs: &[Complex64]) -> Option<(i64, i64)> {
    let n = grid.n();
    coeffs
        .iter()
        .enumerate()
        .filter(|(_, c)| !(c.re.is_finite() && c.im.is_finite()))
        .map(|(idx, _)| (idx, grid.k_magnitude(idx / n, idx % n)))
        .max_by(|a, b| a.1.total_cmp(&b.1))
        .map(|(idx, _)| grid.modes_at(idx))
}

/// When diagnostic callbacks fire during [`run_until`].
#[derive(Debug, Clone, PartialEq)]
pub enum Cadence {
    /// Only at the final time.
    Final,
    /// At every multiple `k · interval` of the interval, plus the final time.
    Every(f64),
    /// At the listed times (those inside the run window), plus the final time.
    Times(Vec<f64>),
}

impl Cadence {
    fn targets(&self, t0: f64, t_end: f64) -> Result<Vec<f64>> {
        let tol = 1e-12 * t_end.abs().max(1.0);
        let mut out: Vec<f64> = match self {
            Cadence::Final => Vec::new(),
            Cadence::Every(dt) => {
                if !(dt.is_finite() && *dt > 0.0) {
                    return Err(SqgError::Parameter(format!(
                        "sampling interval must be positive, got {dt}"
                    )));
                }
                let first = ((t0 + tol) / dt).floor() as u64 + 1;
                (first..)
                    .map(|k| k as f64 * dt)
                    .take_while(|&t| t < t_end - tol)
                    .collect()
            }
            Cadence::Times(times) => {
                let mut v: Vec<f64> = times
                    .iter()
                    .copied()
                    .filter(|&t| t > t0 + tol && t < t_end - tol)
                    .collect();
                v.sort_by(f64::total_cmp);
                v.dedup_by(|a, b| (*a - *b).abs() <= tol);
                v
            }
        };
        out.push(t_end);
        Ok(out)
    }
}

/// Integrates to `t_end`, landing exactly on every cadence time and on `t_end`.
///
/// `observer` runs after each landing; returning `ControlFlow::Break` stops
/// the run early and returns the current state.
pub fn run_until<F>(
    state: &SolverState,
    t_end: f64,
    cadence: &Cadence,
    mut observer: F,
) -> Result<SolverState>
where
    F: FnMut(&SolverState) -> Result<ControlFlow<()>>,
{
    if !(t_end.is_finite() && t_end >= state.t) {
        return Err(SqgError::Parameter(format!(
            "t_end = {t_end} precedes the current time {}",
            state.t
        )));
    }
    let mut current = state.clone();
    if t_end == state.t {
        return Ok(current);
    }
    for target in cadence.targets(state.t, t_end)? {
        advance_to(&mut current, target)?;
        if observer(&current)?.is_break() {
            break;
        }
    }
    Ok(current)
}

fn advance_to(state: &mut SolverState, target: f64) -> Result<()> {
    let tol = 1e-12 * target.abs().max(1.0);
    while state.t < target - tol {
        if state.step_count >= state.config.max_steps {
            return Err(SqgError::Budget {
                limit: state.config.max_steps,
                t: state.t,
            });
        }
        let remaining = target - state.t;
        let dt = adapt_dt(state);
        let lands = dt >= remaining - tol;
        state.dt = if lands { remaining } else { dt };
        *state = step(state)?;
        if lands {
            state.t = target;
        }
    }
    state.t = target;
    Ok(())
}
