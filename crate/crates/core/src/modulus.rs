//! Modulus of continuity `ω` with `ω″(r) = −δ₃ / (r^{1/2} + r² log r)`,
//! `ω′(r) = ∫_r^∞ δ₃ / (s^{1/2} + s² log s) ds` and `ω(0) = 0`, plus the
//! runtime monitor that compares a field's increments against it.
//!
//! `ω` is concave, strictly increasing and unbounded (it grows like
//! `δ₃ log log r`), with `ω′(0)` finite and `ω″(0⁺) = −∞`.

use crate::error::{Result, SqgError};
use crate::field::RealField;
use crate::grid::Grid;
use crate::par;
use crate::spectral::gradient_sup;

/// Positive denominator of `−ω″/δ₃`.
pub fn knv_denominator(r: f64) -> f64 {
    r.sqrt() + r * r * r.ln()
}

/// Minimum of [`knv_denominator`] over `samples` log-spaced points in `[lo, hi]`.
pub fn denominator_sweep_min(lo: f64, hi: f64, samples: usize) -> f64 {
    let (a, b) = (lo.ln(), hi.ln());
    (0..samples)
        .map(|i| knv_denominator((a + (b - a) * i as f64 / (samples - 1) as f64).exp()))
        .fold(f64::INFINITY, f64::min)
}

/// Tabulated modulus of continuity on log-spaced separations.
#[derive(Debug, Clone, PartialEq)]
pub struct ModulusOfContinuity {
    pub delta3: f64,
    pub r_table: Vec<f64>,
    pub omega: Vec<f64>,
    pub omega_prime: Vec<f64>,
    pub omega_prime_at_zero: f64,
}

impl ModulusOfContinuity {
    pub fn r_max(&self) -> f64 {
        *self.r_table.last().expect("table is non-empty")
    }

    /// `ω(r)` by monotone piecewise-linear interpolation through `(0, 0)`
    /// and the table nodes.
    pub fn omega_at(&self, r: f64) -> Result<f64> {
        self.interpolate(r, &self.omega, 0.0)
    }

    /// `ω′(r)` interpolated in the same way, with `ω′(0)` at the origin.
    pub fn omega_prime_at(&self, r: f64) -> Result<f64> {
        self.interpolate(r, &self.omega_prime, self.omega_prime_at_zero)
    }

    fn interpolate(&self, r: f64, values: &[f64], at_zero: f64) -> Result<f64> {
        let r_max = self.r_max();
        if !(r >= 0.0 && r <= r_max * (1.0 + 1e-12)) {
            return Err(SqgError::Range { r, r_max });
        }
        let r = r.min(r_max);
        let nodes = &self.r_table;
        if r <= nodes[0] {
            return Ok(at_zero + (values[0] - at_zero) * r / nodes[0]);
        }
        let hi = nodes.partition_point(|&x| x < r).min(nodes.len() - 1);
        let lo = hi - 1;
        let w = (r - nodes[lo]) / (nodes[hi] - nodes[lo]);
        Ok(values[lo] + w * (values[hi] - values[lo]))
    }

    /// Three-point second differences of `ω` at the interior table nodes.
    pub fn second_differences(&self) -> Vec<(f64, f64)> {
        let (r, w) = (&self.r_table, &self.omega);
        (1..r.len() - 1)
            .map(|i| {
                let h1 = r[i] - r[i - 1];
                let h2 = r[i + 1] - r[i];
                let d = 2.0 * ((w[i + 1] - w[i]) / h2 - (w[i] - w[i - 1]) / h1) / (h1 + h2);
                (r[i], d)
            })
            .collect()
    }

    /// Checks the structural conditions on the table: `ω′ > 0` and strictly
    /// decreasing, `ω` strictly increasing, `ω′(0)` finite, and second
    /// differences diverging monotonically to `−∞` over the first decade.
    pub fn certify(&self) -> Result<()> {
        let fail = |msg: String| Err(SqgError::Construction(msg));
        if !self.omega_prime_at_zero.is_finite() || self.omega_prime_at_zero <= 0.0 {
            return fail(format!("ω′(0) = {} is not finite and positive", self.omega_prime_at_zero));
        }
        if self.omega_prime.iter().any(|&d| !(d > 0.0)) {
            return fail("ω′ not positive on the table".into());
        }
        if self.omega_prime[0] >= self.omega_prime_at_zero
            || self.omega_prime.windows(2).any(|w| w[1] >= w[0])
        {
            return fail("ω′ not strictly decreasing".into());
        }
        if self.omega[0] <= 0.0 || self.omega.windows(2).any(|w| w[1] <= w[0]) {
            return fail("ω not strictly increasing".into());
        }
        let first_decade = 10.0 * self.r_table[0];
        let head: Vec<f64> = self
            .second_differences()
            .into_iter()
            .take_while(|(r, _)| *r <= first_decade)
            .map(|(_, d)| d)
            .collect();
        if head.len() < 2 || head.iter().any(|&d| d >= 0.0) || head.windows(2).any(|w| w[0] >= w[1]) {
            return fail("second differences do not diverge monotonically near r = 0".into());
        }
        Ok(())
    }
}

/// Builds the tabulated modulus for the given `δ₃` on `table_size`
/// log-spaced nodes ending at `r_max`.
///
/// `ω′` at each node is the tail integral `∫_r^∞`, assembled from
/// node-to-node pieces plus the tail beyond `r_max` (taken in `u = 1/s`).
/// `ω(r) = r ω′(r) + ∫_0^r s·δ₃/(s^{1/2}+s² log s) ds`, which is the
/// cumulative integral of `ω′` after one integration by parts.
pub fn build_knv_modulus(delta3: f64, r_max: f64, table_size: usize) -> Result<ModulusOfContinuity> {
    if !(delta3.is_finite() && delta3 > 0.0) {
        return Err(SqgError::Parameter(format!("delta3 must be positive, got {delta3}")));
    }
    if !(r_max.is_finite() && r_max > 0.0) {
        return Err(SqgError::Parameter(format!("r_max must be positive, got {r_max}")));
    }
    if table_size < 64 {
        return Err(SqgError::Parameter(format!("table_size must be >= 64, got {table_size}")));
    }
    let sweep = denominator_sweep_min(1e-8, 1e8, 100_001);
    if !(sweep > 0.0) {
        return Err(SqgError::Construction(format!(
            "denominator r^(1/2) + r^2 log r not positive on the sweep (min {sweep})"
        )));
    }

    let r_min = (r_max * 1e-3).min(1e-6);
    let (a, b) = (r_min.ln(), r_max.ln());
    let mut r_table: Vec<f64> = (0..table_size)
        .map(|i| (a + (b - a) * i as f64 / (table_size - 1) as f64).exp())
        .collect();
    r_table[table_size - 1] = r_max;

    // Piece i covers [r_{i-1}, r_i], piece 0 covers [0, r_0].
    let bounds: Vec<(f64, f64)> = (0..table_size)
        .map(|i| (if i == 0 { 0.0 } else { r_table[i - 1] }, r_table[i]))
        .collect();
    let pieces: Vec<Result<(f64, f64)>> = par::map_slice(&bounds, |&(lo, hi)| {
        Ok((integrate_kernel(lo, hi)?, integrate_moment(lo, hi)?))
    });
    let pieces: Vec<(f64, f64)> = pieces.into_iter().collect::<Result<_>>()?;
    let tail = tail_integral(r_max)?;

    let mut omega_prime = vec![0.0; table_size];
    omega_prime[table_size - 1] = tail;
    for i in (0..table_size - 1).rev() {
        omega_prime[i] = omega_prime[i + 1] + pieces[i + 1].0;
    }
    let omega_prime_at_zero = omega_prime[0] + pieces[0].0;

    let mut moment = 0.0;
    let mut omega = vec![0.0; table_size];
    for i in 0..table_size {
        moment += pieces[i].1;
        omega[i] = r_table[i] * omega_prime[i] + moment;
    }

    let scale = |v: &mut Vec<f64>| v.iter_mut().for_each(|x| *x *= delta3);
    scale(&mut omega);
    scale(&mut omega_prime);
    let modulus = ModulusOfContinuity {
        delta3,
        r_table,
        omega,
        omega_prime,
        omega_prime_at_zero: omega_prime_at_zero * delta3,
    };
    modulus.certify()?;
    Ok(modulus)
}

/// `∫_lo^hi ds / (s^{1/2} + s² log s)` for `0 ≤ lo < hi < ∞`.
fn integrate_kernel(lo: f64, hi: f64) -> Result<f64> {
    split_at_one(lo, hi, |v| 2.0 / (1.0 + 2.0 * v.powi(3) * v.ln_or_zero()), |s| {
        1.0 / knv_denominator(s)
    })
}

/// `∫_lo^hi s ds / (s^{1/2} + s² log s)`.
fn integrate_moment(lo: f64, hi: f64) -> Result<f64> {
    split_at_one(lo, hi, |v| 2.0 * v * v / (1.0 + 2.0 * v.powi(3) * v.ln_or_zero()), |s| {
        s / knv_denominator(s)
    })
}

/// Integrates over `[lo, hi]`, using `s = v²` on the part below 1 (the
/// transformed integrand `inner(v)` is smooth at `v = 0`) and `outer(s)` above.
fn split_at_one(
    lo: f64,
    hi: f64,
    inner: impl Fn(f64) -> f64,
    outer: impl Fn(f64) -> f64,
) -> Result<f64> {
    let mut total = 0.0;
    if lo < 1.0 {
        total += adaptive_gauss_kronrod(&inner, lo.sqrt(), hi.min(1.0).sqrt())?;
    }
    if hi > 1.0 {
        total += adaptive_gauss_kronrod(&outer, lo.max(1.0), hi)?;
    }
    Ok(total)
}

/// `∫_R^∞ ds / (s^{1/2} + s² log s)`, with `u = 1/s` on `[max(R,1), ∞)`.
fn tail_integral(r: f64) -> Result<f64> {
    let mut total = 0.0;
    if r < 1.0 {
        total += integrate_kernel(r, 1.0)?;
    }
    let u_hi = 1.0 / r.max(1.0);
    let f = |u: f64| if u == 0.0 { 0.0 } else { 1.0 / (u.powf(1.5) - u.ln()) };
    total += adaptive_gauss_kronrod(&f, 0.0, u_hi)?;
    Ok(total)
}

trait LnOrZero {
    fn ln_or_zero(self) -> f64;
}

impl LnOrZero for f64 {
    /// `ln v`, with the removable `v³ ln v` singularity at 0 handled by returning 0.
    fn ln_or_zero(self) -> f64 {
        if self == 0.0 {
            0.0
        } else {
            self.ln()
        }
    }
}

const GK_NODES: [f64; 8] = [
    0.991_455_371_120_812_6,
    0.949_107_912_342_758_5,
    0.864_864_423_359_769_1,
    0.741_531_185_599_394_5,
    0.586_087_235_467_691_1,
    0.405_845_151_377_397_2,
    0.207_784_955_007_898_48,
    0.0,
];
const K15_WEIGHTS: [f64; 8] = [
    0.022_935_322_010_529_224,
    0.063_092_092_629_978_56,
    0.104_790_010_322_250_19,
    0.140_653_259_715_525_92,
    0.169_004_726_639_267_9,
    0.190_350_578_064_785_42,
    0.204_432_940_075_298_89,
    0.209_482_141_084_727_82,
];
const G7_WEIGHTS: [f64; 4] = [
    0.129_484_966_168_869_7,
    0.279_705_391_489_276_64,
    0.381_830_050_505_118_9,
    0.417_959_183_673_469_4,
];

fn gk15(f: &impl Fn(f64) -> f64, a: f64, b: f64) -> (f64, f64) {
    let c = 0.5 * (a + b);
    let h = 0.5 * (b - a);
    let fc = f(c);
    let mut kronrod = K15_WEIGHTS[7] * fc;
    let mut gauss = G7_WEIGHTS[3] * fc;
    for j in 0..7 {
        let x = h * GK_NODES[j];
        let pair = f(c - x) + f(c + x);
        kronrod += K15_WEIGHTS[j] * pair;
        if j % 2 == 1 {
            gauss += G7_WEIGHTS[j / 2] * pair;
        }
    }
    (kronrod * h, ((kronrod - gauss) * h).abs())
}

const QUAD_REL_TOL: f64 = 1e-13;
const QUAD_MAX_INTERVALS: usize = 5_000;

/// Globally adaptive Gauss–Kronrod (7/15) quadrature on `[a, b]`.
fn adaptive_gauss_kronrod(f: &impl Fn(f64) -> f64, a: f64, b: f64) -> Result<f64> {
    if a == b {
        return Ok(0.0);
    }
    let mut intervals = vec![(a, b, gk15(f, a, b))];
    loop {
        let total: f64 = intervals.iter().map(|&(_, _, (v, _))| v).sum();
        let error: f64 = intervals.iter().map(|&(_, _, (_, e))| e).sum();
        if !total.is_finite() {
            return Err(SqgError::Accuracy(format!("non-finite integral on [{a}, {b}]")));
        }
        if error <= QUAD_REL_TOL * total.abs() || error <= f64::MIN_POSITIVE {
            return Ok(total);
        }
        if intervals.len() >= QUAD_MAX_INTERVALS {
            return Err(SqgError::Accuracy(format!(
                "error estimate {error:e} on [{a}, {b}] after {QUAD_MAX_INTERVALS} subdivisions"
            )));
        }
        let (worst, _) = intervals
            .iter()
            .enumerate()
            .max_by(|x, y| (x.1 .2).1.total_cmp(&(y.1 .2).1))
            .expect("non-empty");
        let (lo, hi, _) = intervals.swap_remove(worst);
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            return Err(SqgError::Accuracy(format!("interval [{lo}, {hi}] cannot be split")));
        }
        intervals.push((lo, mid, gk15(f, lo, mid)));
        intervals.push((mid, hi, gk15(f, mid, hi)));
    }
}

/// A grid separation `(d1, d2)` in cells.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct LatticeOffset {
    pub d1: i64,
    pub d2: i64,
}

impl LatticeOffset {
    pub const fn new(d1: i64, d2: i64) -> Self {
        Self { d1, d2 }
    }

    /// Physical length `Δx · |d|`.
    pub fn length(&self, grid: &Grid) -> f64 {
        grid.dx() * (self.d1 as f64).hypot(self.d2 as f64)
    }
}

/// Default monitor offsets: axis separations of 1…8 cells, then log-spaced
/// separations along both axes and both diagonals, up to half the box and
/// to `r_max`.
pub fn default_offsets(grid: &Grid, r_max: f64) -> Vec<LatticeOffset> {
    let half = (grid.n() / 2) as i64;
    let within = |d: LatticeOffset| d.length(grid) <= r_max;
    let mut out: Vec<LatticeOffset> = Vec::new();
    let mut push = |d: LatticeOffset| {
        if within(d) && !out.contains(&d) {
            out.push(d);
        }
    };
    for k in 1..=8.min(half) {
        push(LatticeOffset::new(k, 0));
        push(LatticeOffset::new(0, k));
    }
    let mut steps: Vec<i64> = Vec::new();
    let mut x = 1.0f64;
    while x <= half as f64 {
        let k = x.round() as i64;
        if !steps.contains(&k) {
            steps.push(k);
        }
        x *= 2f64.powf(0.25);
    }
    if !steps.contains(&half) {
        steps.push(half);
    }
    for &k in &steps {
        if k > 8 {
            push(LatticeOffset::new(k, 0));
            push(LatticeOffset::new(0, k));
        }
        push(LatticeOffset::new(k, k));
        push(LatticeOffset::new(k, -k));
    }
    out
}

/// Outcome of one modulus check.
#[derive(Debug, Clone, PartialEq)]
pub struct BreachReport {
    pub breached: bool,
    /// `max |θ(x+d) − θ(x)| / ω(|d|)` over the checked offsets.
    pub worst_ratio: f64,
    pub worst_offset: LatticeOffset,
    pub time: f64,
}

/// Compares periodic increments of `theta` at each offset with `ω(|d|)`.
pub fn check_modulus(
    theta: &RealField,
    omega: &ModulusOfContinuity,
    offsets: &[LatticeOffset],
    time: f64,
) -> Result<BreachReport> {
    if offsets.is_empty() {
        return Err(SqgError::Parameter("no offsets to check".into()));
    }
    let grid = theta.grid();
    for d in offsets {
        if d.d1 == 0 && d.d2 == 0 {
            return Err(SqgError::Parameter("zero offset".into()));
        }
    }
    let ratios: Vec<Result<f64>> = par::map_slice(offsets, |d| {
        let w = omega.omega_at(d.length(grid))?;
        Ok(max_increment(theta, *d) / w)
    });
    let mut worst = (0.0, offsets[0]);
    for (ratio, d) in ratios.into_iter().zip(offsets) {
        let ratio = ratio?;
        if ratio > worst.0 {
            worst = (ratio, *d);
        }
    }
    Ok(BreachReport {
        breached: worst.0 > 1.0,
        worst_ratio: worst.0,
        worst_offset: worst.1,
        time,
    })
}

/// `max_x |θ(x + d) − θ(x)|` with periodic wrap.
pub fn max_increment(theta: &RealField, d: LatticeOffset) -> f64 {
    let n = theta.grid().n();
    let v = theta.values();
    let s1 = d.d1.rem_euclid(n as i64) as usize;
    let s2 = d.d2.rem_euclid(n as i64) as usize;
    let rows: Vec<f64> = par::map_indices(n, |j1| {
        let base = j1 * n;
        let shifted = ((j1 + s1) % n) * n;
        (0..n).fold(0.0, |acc: f64, j2| {
            acc.max((v[shifted + (j2 + s2) % n] - v[base + j2]).abs())
        })
    });
    rows.into_iter().fold(0.0, f64::max)
}

/// Result of comparing `sup |∇θ|` with `ω′(0)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GradientBound {
    pub holds: bool,
    /// `ω′(0) − sup |∇θ|`.
    pub margin: f64,
    pub gradient_sup: f64,
}

/// Checks `sup |∇θ| < ω′(0)`, the pointwise consequence of `θ` having modulus `ω`.
pub fn gradient_bound_check(theta: &RealField, omega: &ModulusOfContinuity) -> Result<GradientBound> {
    let g = gradient_sup(theta)?;
    Ok(GradientBound {
        holds: g < omega.omega_prime_at_zero,
        margin: omega.omega_prime_at_zero - g,
        gradient_sup: g,
    })
}

/// A rescaled datum that satisfies the modulus with margin.
#[derive(Debug, Clone, PartialEq)]
pub struct ScalingSearch {
    /// `C` in `θ₀(C x)`; here `C = 1 / stretch ≤ 1`.
    pub factor: f64,
    /// The data are spread over a box `stretch` times larger.
    pub stretch: f64,
    pub field: RealField,
    pub report: BreachReport,
}

/// Worst-ratio threshold used by [`find_scaling`].
pub const SCALING_TARGET: f64 = 0.9;

/// Spreads `theta0` over boxes `2^j` times larger until [`check_modulus`]
/// with [`default_offsets`] reports `worst_ratio ≤ 0.9`.
///
/// The search ends with [`SqgError::NoScaling`] once `max_doublings` is
/// reached or the grid spacing outgrows the modulus table.
pub fn find_scaling(
    theta0: &RealField,
    omega: &ModulusOfContinuity,
    max_doublings: u32,
) -> Result<ScalingSearch> {
    let base = theta0.grid();
    let mut best: Option<(f64, f64)> = None;
    for j in 0..=max_doublings {
        let stretch = 2f64.powi(j as i32);
        let grid = base.with_length(base.length() * stretch)?;
        let offsets = default_offsets(&grid, omega.r_max());
        if offsets.is_empty() {
            break;
        }
        let field = theta0.on_grid(&grid)?;
        let report = check_modulus(&field, omega, &offsets, 0.0)?;
        if best.is_none_or(|(r, _)| report.worst_ratio < r) {
            best = Some((report.worst_ratio, stretch));
        }
        if report.worst_ratio <= SCALING_TARGET {
            return Ok(ScalingSearch {
                factor: 1.0 / stretch,
                stretch,
                field,
                report,
            });
        }
    }
    let (ratio, stretch) = best.unwrap_or((f64::INFINITY, 1.0));
    Err(SqgError::NoScaling(format!(
        "best worst_ratio {ratio:.6} at stretch {stretch:e} (target {SCALING_TARGET})"
    )))
}
