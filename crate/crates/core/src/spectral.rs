//! Fourier multipliers and norm functionals.

use num_complex::Complex64;

use crate::error::{Result, SqgError};
use crate::field::{forward_transform, inverse_pair, RealField, SpectralField, VelocityField};
use crate::par;

const ZERO: Complex64 = Complex64::new(0.0, 0.0);
const I: Complex64 = Complex64::new(0.0, 1.0);

pub(crate) fn validate_gamma(gamma: f64) -> Result<()> {
    if gamma.is_finite() && gamma > 0.0 && gamma <= 2.0 {
        Ok(())
    } else {
        Err(SqgError::Parameter(format!(
            "gamma must lie in (0, 2], got {gamma}"
        )))
    }
}

/// `(−Δ)^{γ/2}`: multiplies mode `m` by `|k(m)|^γ`; the mean maps to zero.
pub fn fractional_laplacian(f: &SpectralField, gamma: f64) -> Result<SpectralField> {
    validate_gamma(gamma)?;
    let grid = f.grid().clone();
    Ok(f.map_modes(|i1, i2| {
        let k = grid.k_magnitude(i1, i2);
        Complex64::new(if k == 0.0 { 0.0 } else { k.powf(gamma) }, 0.0)
    }))
}

/// Velocity `u = (−R₂θ, R₁θ)` with Riesz symbol `i k_j / |k|`.
///
/// The mean mode carries no velocity. Nyquist frequencies are dropped from
/// the odd symbol so both components stay real-valued.
pub fn riesz_velocity(theta: &SpectralField) -> VelocityField {
    let grid = theta.grid();
    let (u1, u2) = riesz_coeffs(theta);
    VelocityField {
        u1: SpectralField::from_parts(grid.clone(), u1),
        u2: SpectralField::from_parts(grid.clone(), u2),
    }
}

pub(crate) fn riesz_coeffs(theta: &SpectralField) -> (Vec<Complex64>, Vec<Complex64>) {
    let grid = theta.grid();
    let n = grid.n();
    let kd = grid.derivative_wavenumbers();
    let src = theta.coeffs();
    let mut u1 = vec![ZERO; grid.len()];
    let mut u2 = vec![ZERO; grid.len()];
    par::for_each_row(&mut u1, n, |i1, row| {
        for (i2, out) in row.iter_mut().enumerate() {
            let k = grid.k_magnitude(i1, i2);
            if k > 0.0 {
                *out = -I * (kd[i2] / k) * src[i1 * n + i2];
            }
        }
    });
    par::for_each_row(&mut u2, n, |i1, row| {
        for (i2, out) in row.iter_mut().enumerate() {
            let k = grid.k_magnitude(i1, i2);
            if k > 0.0 {
                *out = I * (kd[i1] / k) * src[i1 * n + i2];
            }
        }
    });
    (u1, u2)
}

/// Spectral gradient `(i k₁ f̂, i k₂ f̂)`.
pub fn gradient(f: &SpectralField) -> (SpectralField, SpectralField) {
    let grid = f.grid().clone();
    let kd = grid.derivative_wavenumbers().to_vec();
    let d1 = f.map_modes(|i1, _| I * kd[i1]);
    let d2 = f.map_modes(|_, i2| I * kd[i2]);
    (d1, d2)
}

/// Homogeneous Sobolev norm `(L² Σ |k|^{2s} |f̂|²)^{1/2}`.
///
/// For `s = 0` the mean is included and the result is the L² norm; for
/// `s > 0` the mean mode contributes nothing.
pub fn sobolev_norm(f: &SpectralField, s: f64) -> Result<f64> {
    if !(s.is_finite() && s >= 0.0) {
        return Err(SqgError::Parameter(format!(
            "Sobolev index must be non-negative, got {s}"
        )));
    }
    let grid = f.grid();
    let n = grid.n();
    let l = grid.length();
    let coeffs = f.coeffs();
    let weights: Vec<f64> = par::map_indices(n, |i1| {
        let row = &coeffs[i1 * n..(i1 + 1) * n];
        row.iter()
            .enumerate()
            .map(|(i2, c)| {
                let k = grid.k_magnitude(i1, i2);
                let w = if s == 0.0 {
                    1.0
                } else if k == 0.0 {
                    0.0
                } else {
                    k.powf(2.0 * s)
                };
                w * c.norm_sqr()
            })
            .sum()
    });
    let total: f64 = weights.iter().sum();
    Ok(l * total.sqrt())
}

/// Grid maximum of `|f|`.
pub fn linf_norm(f: &RealField) -> f64 {
    par::max_rows(f.values(), f.grid().n(), |row| {
        row.iter().fold(0.0, |acc: f64, v| acc.max(v.abs()))
    })
}

/// Grid quadrature `(Σ f² ΔA)^{1/2}`.
pub fn l2_norm(f: &RealField) -> f64 {
    let dx = f.grid().dx();
    let sum = par::sum_rows(f.values(), f.grid().n(), |row| row.iter().map(|v| v * v).sum());
    (sum * dx * dx).sqrt()
}

/// Grid maximum of `|∇f|` with the gradient taken spectrally.
pub fn gradient_sup(f: &RealField) -> Result<f64> {
    Ok(gradient_sup_spectral(&forward_transform(f)?))
}

/// [`gradient_sup`] for a field already in Fourier space.
pub fn gradient_sup_spectral(f: &SpectralField) -> f64 {
    let (d1, d2) = gradient(f);
    let grid = f.grid();
    let (g1, g2) = inverse_pair(d1.coeffs(), d2.coeffs(), grid);
    max_magnitude(&g1, &g2, grid.n())
}

pub(crate) fn max_magnitude(a: &[f64], b: &[f64], n: usize) -> f64 {
    let rows: Vec<f64> = par::map_indices(a.len() / n, |r| {
        let s = r * n..(r + 1) * n;
        a[s.clone()]
            .iter()
            .zip(&b[s])
            .fold(0.0, |acc: f64, (x, y)| acc.max(x.hypot(*y)))
    });
    rows.into_iter().fold(0.0, f64::max)
}

/// `Σ_m |k(m)| |f̂(m)|`, an upper bound for `sup |∇f|`.
pub fn fourier_gradient_bound(f: &SpectralField) -> f64 {
    let grid = f.grid();
    let n = grid.n();
    let kd = grid.derivative_wavenumbers();
    f.coeffs()
        .iter()
        .enumerate()
        .map(|(idx, c)| kd[idx / n].hypot(kd[idx % n]) * c.norm())
        .sum()
}

/// `L² Σ conj(f̂) ĝ`, the L² inner product by Parseval.
pub fn inner_product(f: &SpectralField, g: &SpectralField) -> Result<Complex64> {
    if f.grid() != g.grid() {
        return Err(SqgError::GridMismatch);
    }
    let l = f.grid().length();
    let sum: Complex64 = f
        .coeffs()
        .iter()
        .zip(g.coeffs())
        .map(|(a, b)| a.conj() * b)
        .sum();
    Ok(sum * l * l)
}

/// 2/3-rule truncation: zeroes every mode with `max(|m₁|, |m₂|) > n/3`.
pub fn dealias(f: &SpectralField) -> SpectralField {
    let grid = f.grid().clone();
    let mut coeffs = f.coeffs().to_vec();
    dealias_in_place(&grid, &mut coeffs);
    SpectralField::from_parts(grid, coeffs)
}

pub(crate) fn dealias_in_place(grid: &crate::grid::Grid, coeffs: &mut [Complex64]) {
    par::for_each_row(coeffs, grid.n(), |i1, row| {
        for (i2, c) in row.iter_mut().enumerate() {
            if !grid.is_resolved(i1, i2) {
                *c = ZERO;
            }
        }
    });
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::field::inverse_transform;
    use crate::grid::Grid;
    use std::f64::consts::PI;

    fn sine(n: usize, freq: f64) -> SpectralField {
        let g = Grid::periodic_2pi(n).unwrap();
        forward_transform(&RealField::from_fn(&g, |x1, _| (freq * x1).sin())).unwrap()
    }

    fn max_diff(a: &RealField, b: &RealField) -> f64 {
        a.values()
            .iter()
            .zip(b.values())
            .fold(0.0, |m, (x, y)| m.max((x - y).abs()))
    }

    #[test]
    fn unit_mode_is_fractional_eigenfunction() {
        // Built in Fourier space so no transform round-off gets amplified.
        let g = Grid::periodic_2pi(32).unwrap();
        let f = SpectralField::zeros(&g).with_mode(1, 0, Complex64::new(0.0, -0.5));
        for gamma in [0.3, 1.0, 1.7, 2.0] {
            let out = fractional_laplacian(&f, gamma).unwrap();
            let got = inverse_transform(&out).unwrap();
            assert!(max_diff(&got, &inverse_transform(&f).unwrap()) < 1e-14);
        }
    }

    #[test]
    fn double_mode_scales_by_two() {
        let f = sine(32, 2.0);
        let out = inverse_transform(&fractional_laplacian(&f, 1.0).unwrap()).unwrap();
        let expected = inverse_transform(&f.scaled(2.0)).unwrap();
        assert!(max_diff(&out, &expected) < 1e-13);
    }

    #[test]
    fn gamma_out_of_range() {
        let f = sine(8, 1.0);
        assert!(fractional_laplacian(&f, 0.0).is_err());
        assert!(fractional_laplacian(&f, 2.5).is_err());
        assert!(fractional_laplacian(&f, f64::NAN).is_err());
    }

    #[test]
    fn riesz_single_modes() {
        let g = Grid::periodic_2pi(32).unwrap();
        let th = forward_transform(&RealField::from_fn(&g, |x1, _| x1.sin())).unwrap();
        let u = riesz_velocity(&th);
        let u1 = inverse_transform(&u.u1).unwrap();
        let u2 = inverse_transform(&u.u2).unwrap();
        assert!(linf_norm(&u1) < 1e-14);
        assert!(max_diff(&u2, &RealField::from_fn(&g, |x1, _| x1.cos())) < 1e-14);

        let th = forward_transform(&RealField::from_fn(&g, |_, x2| x2.cos())).unwrap();
        let u = riesz_velocity(&th);
        let u1 = inverse_transform(&u.u1).unwrap();
        let u2 = inverse_transform(&u.u2).unwrap();
        assert!(max_diff(&u1, &RealField::from_fn(&g, |_, x2| x2.sin())) < 1e-14);
        assert!(linf_norm(&u2) < 1e-14);
    }

    #[test]
    fn constant_makes_no_velocity() {
        let g = Grid::new(16, 4.0).unwrap();
        let th = forward_transform(&RealField::from_fn(&g, |_, _| 3.0)).unwrap();
        let u = riesz_velocity(&th);
        assert_eq!(u.u1.max_abs(), 0.0);
        assert_eq!(u.u2.max_abs(), 0.0);
    }

    #[test]
    fn sobolev_of_unit_sine() {
        let f = sine(16, 1.0);
        let expected = (2.0 * PI * PI).sqrt();
        for s in [0.0, 0.5, 1.0, 1.5, 2.0, 3.7] {
            assert!((sobolev_norm(&f, s).unwrap() - expected).abs() < 1e-12);
        }
        let grid_l2 = l2_norm(&inverse_transform(&f).unwrap());
        assert!((grid_l2 - expected).abs() < 1e-12);
        assert!((expected - 4.4429).abs() < 1e-4);
        assert_eq!(sobolev_norm(&SpectralField::zeros(f.grid()), 1.0).unwrap(), 0.0);
        assert!(sobolev_norm(&f, -1.0).is_err());
    }

    #[test]
    fn sobolev_homogeneity() {
        let f = sine(16, 2.0);
        let h0 = sobolev_norm(&f, 0.0).unwrap();
        let h1 = sobolev_norm(&f, 1.0).unwrap();
        assert!((h1 - 2.0 * h0).abs() < 1e-12);
    }

    #[test]
    fn sobolev_zero_includes_mean() {
        let g = Grid::periodic_2pi(8).unwrap();
        let f = forward_transform(&RealField::from_fn(&g, |_, _| 1.0)).unwrap();
        assert!((sobolev_norm(&f, 0.0).unwrap() - 2.0 * PI).abs() < 1e-13);
        assert_eq!(sobolev_norm(&f, 0.5).unwrap(), 0.0);
    }

    #[test]
    fn sup_norms_of_sines() {
        let g = Grid::periodic_2pi(64).unwrap();
        let f = RealField::from_fn(&g, |x1, _| x1.sin());
        assert!((linf_norm(&f) - 1.0).abs() < 1e-15);
        assert!((gradient_sup(&f).unwrap() - 1.0).abs() < 1e-13);
        let f = RealField::from_fn(&g, |x1, x2| x1.sin() + x2.sin());
        assert!((gradient_sup(&f).unwrap() - 2f64.sqrt()).abs() < 1e-13);
    }

    #[test]
    fn dealias_cutoff() {
        let g = Grid::periodic_2pi(24).unwrap();
        let low = SpectralField::zeros(&g).with_mode(8, -3, Complex64::new(0.2, 0.1));
        assert_eq!(dealias(&low), low);
        let high = SpectralField::zeros(&g).with_mode(9, 0, Complex64::new(1.0, 0.0));
        assert_eq!(dealias(&high).max_abs(), 0.0);
    }
}
