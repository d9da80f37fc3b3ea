//! Reference solutions that check the solver independently of its own code
//! paths: the dissipation semigroup, the exact single-mode solution, the
//! scaling symmetry, and a brute-force convolution for the advection term.

use std::f64::consts::{PI, TAU};
use std::ops::ControlFlow;

use num_complex::Complex64;

use crate::dynamics::{nonlinear_term, run_until, Cadence, SolverConfig, SolverState};
use crate::error::{Result, SqgError};
use crate::field::{forward_transform, inverse_transform, RealField, SpectralField};
use crate::grid::Grid;
use crate::norms::format_f64;
use crate::spectral::{dealias, l2_norm, sobolev_norm, validate_gamma};
use crate::{par, random};

/// Error summary of one oracle comparison.
#[derive(Debug, Clone, PartialEq)]
pub struct OracleReport {
    pub name: String,
    pub max_abs_error: f64,
    pub max_rel_error: f64,
    pub tolerance: f64,
    pub pass: bool,
}

impl OracleReport {
    pub fn new(name: impl Into<String>, max_abs_error: f64, max_rel_error: f64, tolerance: f64) -> Self {
        Self {
            name: name.into(),
            max_abs_error,
            max_rel_error,
            tolerance,
            pass: max_rel_error <= tolerance,
        }
    }

    /// Pointwise comparison: absolute error is the grid max, relative error
    /// divides it by `scale`.
    pub fn pointwise(name: impl Into<String>, got: &RealField, want: &RealField, scale: f64, tolerance: f64) -> Self {
        let abs = got
            .values()
            .iter()
            .zip(want.values())
            .fold(0.0, |m: f64, (a, b)| m.max((a - b).abs()));
        Self::new(name, abs, abs / scale, tolerance)
    }

    /// L² comparison: relative error is `‖got − want‖ / ‖want‖`.
    pub fn l2(name: impl Into<String>, got: &SpectralField, want: &SpectralField, tolerance: f64) -> Result<Self> {
        let diff = got.sub(want)?;
        let abs = sobolev_norm(&diff, 0.0)?;
        let reference = sobolev_norm(want, 0.0)?;
        let rel = if reference == 0.0 { abs } else { abs / reference };
        Ok(Self::new(name, abs, rel, tolerance))
    }

    pub const CSV_HEADER: &'static str = "name,max_abs_error,max_rel_error,tolerance,pass";

    pub fn to_csv_row(&self) -> String {
        format!(
            "{},{},{},{},{}",
            self.name,
            format_f64(self.max_abs_error),
            format_f64(self.max_rel_error),
            format_f64(self.tolerance),
            self.pass
        )
    }
}

/// `θ̂₀(m) e^{−κ|k(m)|^γ t}`.
pub fn linear_heat_exact(theta0: &SpectralField, gamma: f64, kappa: f64, t: f64) -> Result<SpectralField> {
    validate_gamma(gamma)?;
    if !(t >= 0.0) {
        return Err(SqgError::Parameter(format!("t must be >= 0, got {t}")));
    }
    let grid = theta0.grid().clone();
    Ok(theta0.map_modes(|i1, i2| {
        let k = grid.k_magnitude(i1, i2);
        let rate = if k == 0.0 { 0.0 } else { kappa * k.powf(gamma) };
        Complex64::new((-rate * t).exp(), 0.0)
    }))
}

/// `e^{−t} sin x₁`, the exact solution from `sin x₁` with `γ = κ = 1` on the `2π` box.
pub fn single_mode_exact(grid: &Grid, t: f64) -> Result<RealField> {
    if (grid.length() - TAU).abs() > 1e-12 * TAU {
        return Err(SqgError::Config(format!(
            "single-mode oracle needs a box of length 2π, got {}",
            grid.length()
        )));
    }
    let a = (-t).exp();
    Ok(RealField::from_fn(grid, move |x1, _| a * x1.sin()))
}

fn max_mode(f: &SpectralField) -> i64 {
    let grid = f.grid();
    f.coeffs()
        .iter()
        .enumerate()
        .filter(|(_, c)| c.norm() > 0.0)
        .map(|(idx, _)| {
            let (m1, m2) = grid.modes_at(idx);
            m1.abs().max(m2.abs())
        })
        .max()
        .unwrap_or(0)
}

/// Compares two solver runs related by the scaling `θ_c(t,x) = C^{γ−1} θ(C^γ t, C x)`:
/// (a) from `θ₀` on the box `L` to time `C^γ t`, sampled at `C x`; (b) from
/// `θ₀(C x)` on the box `L/C` with `n/C` points to time `t`.
///
/// Both grids share the spacing `L/n`, so (b) starts from every `C`-th
/// value of `θ₀` and no interpolation is involved. The relative error is in L².
pub fn scaling_consistency(
    theta0: &SpectralField,
    scale: usize,
    t: f64,
    config: &SolverConfig,
    tolerance: f64,
) -> Result<OracleReport> {
    let grid = theta0.grid();
    let n = grid.n();
    if scale == 0 || !n.is_multiple_of(scale) {
        return Err(SqgError::Config(format!("scaling factor {scale} must divide n = {n}")));
    }
    let limit = (n / (3 * scale)) as i64;
    if max_mode(theta0) > limit {
        return Err(SqgError::Parameter(format!(
            "data must be band-limited to |m| <= n/(3C) = {limit}"
        )));
    }
    let coarse = Grid::new(n / scale, grid.length() / scale as f64)?;
    let c = scale as f64;
    let gamma = config.gamma;
    let amplitude = c.powf(gamma - 1.0);
    let subsample =
        |f: &RealField| RealField::from_fn_indexed(&coarse, |j1, j2| amplitude * f.at(scale * j1, scale * j2));
    let run = |theta: SpectralField, t_end: f64| -> Result<SolverState> {
        let state = SolverState::new(theta, config.clone())?;
        run_until(&state, t_end, &Cadence::Final, |_| Ok(ControlFlow::Continue(())))
    };

    let initial = inverse_transform(theta0)?;
    let (a, b) = join(
        || run(theta0.clone(), c.powf(gamma) * t),
        || run(forward_transform(&subsample(&initial))?, t),
    );
    let sampled = subsample(&inverse_transform(&a?.theta)?);
    let direct = inverse_transform(&b?.theta)?;
    let diff = RealField::from_fn_indexed(&coarse, |j1, j2| sampled.at(j1, j2) - direct.at(j1, j2));
    let abs = l2_norm(&diff);
    let reference = l2_norm(&direct);
    let rel = if reference == 0.0 { abs } else { abs / reference };
    Ok(OracleReport::new(format!("scaling_c{scale}"), abs, rel, tolerance))
}

fn join<A, B, RA, RB>(a: A, b: B) -> (RA, RB)
where
    A: FnOnce() -> RA + Send,
    B: FnOnce() -> RB + Send,
    RA: Send,
    RB: Send,
{
    #[cfg(feature = "parallel")]
    return rayon::join(a, b);
    #[cfg(not(feature = "parallel"))]
    return (a(), b());
}

/// Largest grid for which [`convolution_nonlinearity`] is allowed.
pub const CONVOLUTION_MAX_N: usize = 24;

/// Direct triad sum `Σ_{p+q=m} û(p)·(i k(q)) θ̂(q)` over the 2/3-rule support.
///
/// The input is truncated to `max(|m₁|,|m₂|) ≤ n/3` and only outputs in the
/// same set are kept, matching the dealiased pseudo-spectral product.
/// `û(p) = (−i k₂/|k|, i k₁/|k|) θ̂(p)` is formed here from its definition.
pub fn convolution_nonlinearity(theta: &SpectralField) -> Result<SpectralField> {
    let grid = theta.grid().clone();
    let n = grid.n();
    if n > CONVOLUTION_MAX_N {
        return Err(SqgError::Budget {
            limit: CONVOLUTION_MAX_N as u64,
            t: 0.0,
        });
    }
    let scale = TAU / grid.length();
    let cutoff = (n / 3) as i64;
    let support: Vec<(i64, i64, Complex64)> = (-cutoff..=cutoff)
        .flat_map(|m1| (-cutoff..=cutoff).map(move |m2| (m1, m2)))
        .map(|(m1, m2)| (m1, m2, theta.mode(m1, m2)))
        .filter(|(_, _, c)| c.norm() > 0.0)
        .collect();
    let i = Complex64::new(0.0, 1.0);
    let velocity: Vec<(Complex64, Complex64)> = support
        .iter()
        .map(|&(p1, p2, c)| {
            let (k1, k2) = (scale * p1 as f64, scale * p2 as f64);
            let k = k1.hypot(k2);
            if k == 0.0 {
                (Complex64::new(0.0, 0.0), Complex64::new(0.0, 0.0))
            } else {
                (-i * (k2 / k) * c, i * (k1 / k) * c)
            }
        })
        .collect();

    let outputs: Vec<(i64, i64)> = (-cutoff..=cutoff)
        .flat_map(|m1| (-cutoff..=cutoff).map(move |m2| (m1, m2)))
        .collect();
    let values: Vec<Complex64> = par::map_slice(&outputs, |&(m1, m2)| {
        let mut acc = Complex64::new(0.0, 0.0);
        for (idx_p, &(p1, p2, _)) in support.iter().enumerate() {
            let (q1, q2) = (m1 - p1, m2 - p2);
            if q1.abs() > cutoff || q2.abs() > cutoff {
                continue;
            }
            let tq = theta.mode(q1, q2);
            if tq.norm() == 0.0 {
                continue;
            }
            let (u1, u2) = velocity[idx_p];
            acc += (u1 * (i * scale * q1 as f64) + u2 * (i * scale * q2 as f64)) * tq;
        }
        acc
    });
    let mut coeffs = vec![Complex64::new(0.0, 0.0); grid.len()];
    for (&(m1, m2), v) in outputs.iter().zip(values) {
        coeffs[grid.flat_index(m1, m2)] = v;
    }
    SpectralField::new(grid, coeffs)
}

/// Oracle groups selectable from the command line.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Suite {
    All,
    Linear,
    SingleMode,
    Scaling,
    Convolution,
}

impl std::str::FromStr for Suite {
    type Err = SqgError;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "all" => Ok(Self::All),
            "linear" => Ok(Self::Linear),
            "single-mode" => Ok(Self::SingleMode),
            "scaling" => Ok(Self::Scaling),
            "convolution" => Ok(Self::Convolution),
            other => Err(SqgError::Parameter(format!("unknown oracle suite `{other}`"))),
        }
    }
}

#[derive(Debug, Clone, Copy)]
enum Case {
    Linear(f64),
    SingleMode,
    ScalingTrivial,
    ScalingLinear,
    ScalingNonlinear,
    Convolution(u64),
}

/// Band-limited random data with unit RMS amplitude.
pub fn normalized_band_limited(grid: &Grid, max_mode: i64, seed: u64) -> SpectralField {
    let f = random::band_limited(grid, max_mode, seed);
    let norm = sobolev_norm(&f, 0.0).unwrap_or(0.0);
    if norm == 0.0 {
        f
    } else {
        f.scaled(grid.length() / norm)
    }
}

/// Single-mode data `sin x₁` on the `2π` box with `n` points.
pub fn single_mode_initial(n: usize) -> Result<SpectralField> {
    let grid = Grid::periodic_2pi(n)?;
    forward_transform(&RealField::from_fn(&grid, |x1, _| x1.sin()))
}

/// Runs the single-mode problem to `t` and compares with `e^{−t} sin x₁`
/// in the grid maximum norm relative to `e^{−t}`.
pub fn single_mode_check(n: usize, t: f64, config: &SolverConfig, tolerance: f64) -> Result<OracleReport> {
    let theta0 = single_mode_initial(n)?;
    let state = SolverState::new(theta0, config.clone())?;
    let end = run_until(&state, t, &Cadence::Final, |_| Ok(ControlFlow::Continue(())))?;
    let exact = single_mode_exact(state.grid(), t)?;
    Ok(OracleReport::pointwise(
        format!("single_mode_n{n}"),
        &inverse_transform(&end.theta)?,
        &exact,
        (-t).exp(),
        tolerance,
    ))
}

/// Runs the dissipation-only solver to `t` and compares with [`linear_heat_exact`].
pub fn linear_check(theta0: &SpectralField, gamma: f64, t: f64, tolerance: f64) -> Result<OracleReport> {
    let config = SolverConfig {
        gamma,
        nonlinear: false,
        ..SolverConfig::default()
    };
    let state = SolverState::new(theta0.clone(), config)?;
    let end = run_until(&state, t, &Cadence::Final, |_| Ok(ControlFlow::Continue(())))?;
    let exact = linear_heat_exact(theta0, gamma, 1.0, t)?;
    OracleReport::l2(format!("linear_gamma{gamma}"), &end.theta, &exact, tolerance)
}

/// Compares the pseudo-spectral advection term with the triad sum for one field.
pub fn convolution_check(theta: &SpectralField, name: impl Into<String>, tolerance: f64) -> Result<OracleReport> {
    let fast = nonlinear_term(theta, true);
    let slow = convolution_nonlinearity(theta)?;
    let abs = fast
        .coeffs()
        .iter()
        .zip(slow.coeffs())
        .fold(0.0, |m: f64, (a, b)| m.max((a - b).norm()));
    let scale = slow.max_abs().max(f64::MIN_POSITIVE);
    Ok(OracleReport::new(name, abs, abs / scale, tolerance))
}

fn run_case(case: Case) -> Result<OracleReport> {
    match case {
        Case::Linear(gamma) => {
            let grid = Grid::periodic_2pi(32)?;
            linear_check(&normalized_band_limited(&grid, 15, 7), gamma, 1.0, 1e-12)
        }
        Case::SingleMode => single_mode_check(64, 1.0, &SolverConfig::default(), 1e-8),
        Case::ScalingTrivial | Case::ScalingLinear | Case::ScalingNonlinear => {
            let grid = Grid::periodic_2pi(128)?;
            let theta0 = normalized_band_limited(&grid, 4, 11);
            let (scale, nonlinear, tol, name) = match case {
                Case::ScalingTrivial => (1, true, 1e-14, "scaling_c1"),
                Case::ScalingLinear => (2, false, 1e-12, "scaling_c2_linear"),
                _ => (2, true, 1e-5, "scaling_c2"),
            };
            let config = SolverConfig {
                nonlinear,
                ..SolverConfig::default()
            };
            let mut report = scaling_consistency(&theta0, scale, 0.5, &config, tol)?;
            report.name = name.into();
            Ok(report)
        }
        Case::Convolution(seed) => {
            let grid = Grid::new(16, TAU)?;
            let theta = random::band_limited(&grid, 5, seed);
            convolution_check(&theta, format!("convolution_seed{seed}"), 1e-10)
        }
    }
}

/// Runs the selected oracle suite; independent cases run concurrently.
pub fn run_suite(suite: Suite) -> Result<Vec<OracleReport>> {
    let mut cases = Vec::new();
    if matches!(suite, Suite::All | Suite::Linear) {
        cases.extend([0.5, 1.0, 1.5, 2.0].map(Case::Linear));
    }
    if matches!(suite, Suite::All | Suite::SingleMode) {
        cases.push(Case::SingleMode);
    }
    if matches!(suite, Suite::All | Suite::Scaling) {
        cases.extend([Case::ScalingTrivial, Case::ScalingLinear, Case::ScalingNonlinear]);
    }
    if matches!(suite, Suite::All | Suite::Convolution) {
        cases.extend((0..20).map(Case::Convolution));
    }
    par::map_slice(&cases, |c| run_case(*c)).into_iter().collect()
}

/// Hand-expanded advection term of `sin x₁ + cos 2x₂` on the `2π` box:
/// `u·∇θ = −sin(2x₂) cos x₁`, i.e. `i/4` at `(1, 2)` and `(−1, 2)` and
/// `−i/4` at their negatives.
pub fn two_mode_advection_reference(grid: &Grid) -> Result<SpectralField> {
    if (grid.length() - 2.0 * PI).abs() > 1e-12 {
        return Err(SqgError::Config("two-mode reference needs the 2π box".into()));
    }
    let q = Complex64::new(0.0, 0.25);
    Ok(SpectralField::zeros(grid).with_mode(1, 2, q).with_mode(-1, 2, q))
}

/// Truncates `theta` by the 2/3 rule; exposed for oracle inputs.
pub fn resolved(theta: &SpectralField) -> SpectralField {
    dealias(theta)
}
