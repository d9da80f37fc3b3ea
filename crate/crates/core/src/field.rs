//! Real-space and Fourier-space field representations.
//!
//! Transform convention: `f̂(m) = (1/n²) Σ_j f(x_j) exp(−i k·x_j)`, so that
//! `‖f‖²_{L²} = L² Σ_m |f̂(m)|²` holds exactly on the grid.

use num_complex::Complex64;

use crate::error::{Result, SqgError};
use crate::grid::Grid;
use crate::par;

/// Default tolerance for the Hermitian-symmetry check in [`inverse_transform`],
/// relative to the largest coefficient modulus.
pub const HERMITIAN_TOLERANCE: f64 = 1e-10;

/// Real values on the grid, row-major with the second coordinate fastest.
#[derive(Debug, Clone, PartialEq)]
pub struct RealField {
    grid: Grid,
    values: Vec<f64>,
}

impl RealField {
    pub fn new(grid: Grid, values: Vec<f64>) -> Result<Self> {
        if values.len() != grid.len() {
            return Err(SqgError::InvalidField(format!(
                "expected {} values, got {}",
                grid.len(),
                values.len()
            )));
        }
        Ok(Self { grid, values })
    }

    pub fn zeros(grid: &Grid) -> Self {
        Self {
            values: vec![0.0; grid.len()],
            grid: grid.clone(),
        }
    }

    /// Samples `f(x1, x2)` at the grid points.
    pub fn from_fn(grid: &Grid, f: impl Fn(f64, f64) -> f64 + Sync + Send) -> Self {
        let n = grid.n();
        let mut values = vec![0.0; grid.len()];
        par::for_each_row(&mut values, n, |j1, row| {
            let x1 = grid.coordinate(j1);
            for (j2, v) in row.iter_mut().enumerate() {
                *v = f(x1, grid.coordinate(j2));
            }
        });
        Self {
            grid: grid.clone(),
            values,
        }
    }

    /// Builds a field from a function of the grid indices `(j1, j2)`.
    pub fn from_fn_indexed(grid: &Grid, f: impl Fn(usize, usize) -> f64 + Sync + Send) -> Self {
        let n = grid.n();
        let mut values = vec![0.0; grid.len()];
        par::for_each_row(&mut values, n, |j1, row| {
            for (j2, v) in row.iter_mut().enumerate() {
                *v = f(j1, j2);
            }
        });
        Self {
            grid: grid.clone(),
            values,
        }
    }

    pub fn grid(&self) -> &Grid {
        &self.grid
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn into_values(self) -> Vec<f64> {
        self.values
    }

    /// Value at grid point `(j1, j2)`.
    pub fn at(&self, j1: usize, j2: usize) -> f64 {
        self.values[j1 * self.grid.n() + j2]
    }

    /// Returns the same values reinterpreted on a box of another length.
    pub fn on_grid(&self, grid: &Grid) -> Result<Self> {
        if grid.n() != self.grid.n() {
            return Err(SqgError::GridMismatch);
        }
        Ok(Self {
            grid: grid.clone(),
            values: self.values.clone(),
        })
    }

    pub fn scaled(&self, factor: f64) -> Self {
        Self {
            grid: self.grid.clone(),
            values: self.values.iter().map(|v| v * factor).collect(),
        }
    }
}

/// Fourier coefficients of a real scalar on the grid.
#[derive(Debug, Clone, PartialEq)]
pub struct SpectralField {
    grid: Grid,
    coeffs: Vec<Complex64>,
}

impl SpectralField {
    pub fn new(grid: Grid, coeffs: Vec<Complex64>) -> Result<Self> {
        if coeffs.len() != grid.len() {
            return Err(SqgError::InvalidField(format!(
                "expected {} coefficients, got {}",
                grid.len(),
                coeffs.len()
            )));
        }
        Ok(Self { grid, coeffs })
    }

    pub(crate) fn from_parts(grid: Grid, coeffs: Vec<Complex64>) -> Self {
        debug_assert_eq!(coeffs.len(), grid.len());
        Self { grid, coeffs }
    }

    pub fn zeros(grid: &Grid) -> Self {
        Self {
            coeffs: vec![Complex64::new(0.0, 0.0); grid.len()],
            grid: grid.clone(),
        }
    }

    pub fn grid(&self) -> &Grid {
        &self.grid
    }

    pub fn coeffs(&self) -> &[Complex64] {
        &self.coeffs
    }

    pub fn into_coeffs(self) -> Vec<Complex64> {
        self.coeffs
    }

    /// Coefficient of integer mode `(m1, m2)`.
    pub fn mode(&self, m1: i64, m2: i64) -> Complex64 {
        self.coeffs[self.grid.flat_index(m1, m2)]
    }

    /// Mean of the field, the `m = 0` coefficient.
    pub fn mean(&self) -> Complex64 {
        self.coeffs[0]
    }

    /// Returns a copy with mode `(m1, m2)` and its partner set to `value` and `conj(value)`.
    pub fn with_mode(mut self, m1: i64, m2: i64, value: Complex64) -> Self {
        let idx = self.grid.flat_index(m1, m2);
        let partner = self.grid.conjugate_index(idx);
        self.coeffs[idx] = value;
        self.coeffs[partner] = value.conj();
        if idx == partner {
            self.coeffs[idx].im = 0.0;
        }
        self
    }

    /// Maximum Hermitian deviation `|f̂(m) − conj(f̂(−m))|` and the mode where it occurs.
    pub fn hermitian_deviation(&self) -> (f64, i64, i64) {
        let mut worst = (0.0, 0, 0);
        for (idx, c) in self.coeffs.iter().enumerate() {
            let partner = self.coeffs[self.grid.conjugate_index(idx)];
            let dev = (c - partner.conj()).norm();
            if dev > worst.0 || dev.is_nan() {
                let (m1, m2) = self.grid.modes_at(idx);
                worst = (dev, m1, m2);
                if dev.is_nan() {
                    break;
                }
            }
        }
        worst
    }

    /// Checks Hermitian symmetry relative to the largest coefficient modulus.
    pub fn check_hermitian(&self, tolerance: f64) -> Result<()> {
        let scale = self.max_abs();
        let (dev, m1, m2) = self.hermitian_deviation();
        if dev.is_nan() || dev > tolerance * scale {
            return Err(SqgError::Asymmetry {
                m1,
                m2,
                deviation: dev,
            });
        }
        Ok(())
    }

    /// Largest coefficient modulus.
    pub fn max_abs(&self) -> f64 {
        self.coeffs.iter().fold(0.0, |acc, c| acc.max(c.norm()))
    }

    /// Multiplies each coefficient by `symbol(i1, i2)`.
    pub fn map_modes(&self, symbol: impl Fn(usize, usize) -> Complex64 + Sync + Send) -> Self {
        let n = self.grid.n();
        let mut out = self.coeffs.clone();
        par::for_each_row(&mut out, n, |i1, row| {
            for (i2, c) in row.iter_mut().enumerate() {
                *c *= symbol(i1, i2);
            }
        });
        Self::from_parts(self.grid.clone(), out)
    }

    pub fn scaled(&self, factor: f64) -> Self {
        Self::from_parts(
            self.grid.clone(),
            self.coeffs.iter().map(|c| c * factor).collect(),
        )
    }

    /// `self − other`, coefficient-wise.
    pub fn sub(&self, other: &Self) -> Result<Self> {
        if self.grid != other.grid {
            return Err(SqgError::GridMismatch);
        }
        Ok(Self::from_parts(
            self.grid.clone(),
            self.coeffs
                .iter()
                .zip(&other.coeffs)
                .map(|(a, b)| a - b)
                .collect(),
        ))
    }

    /// `L² Σ|f̂|²`, the squared L² norm by Parseval.
    pub fn energy(&self) -> f64 {
        let l = self.grid.length();
        l * l * par::sum_rows(&self.coeffs, self.grid.n(), |row| {
            row.iter().map(|c| c.norm_sqr()).sum()
        })
    }
}

/// The two velocity components, both in Fourier space.
#[derive(Debug, Clone, PartialEq)]
pub struct VelocityField {
    pub u1: SpectralField,
    pub u2: SpectralField,
}

impl VelocityField {
    /// Largest modulus of `k'₁ û₁ + k'₂ û₂` over all modes, with `k'` the
    /// derivative wavenumbers (Nyquist zeroed) that define the discrete divergence.
    pub fn max_divergence(&self) -> f64 {
        let grid = self.u1.grid();
        let n = grid.n();
        let k = grid.derivative_wavenumbers();
        let mut worst: f64 = 0.0;
        for i1 in 0..n {
            for i2 in 0..n {
                let idx = i1 * n + i2;
                let div = self.u1.coeffs[idx] * k[i1] + self.u2.coeffs[idx] * k[i2];
                worst = worst.max(div.norm());
            }
        }
        worst
    }
}

/// Forward transform of real grid values.
pub fn forward_transform(f: &RealField) -> Result<SpectralField> {
    if let Some(pos) = f.values.iter().position(|v| !v.is_finite()) {
        return Err(SqgError::InvalidField(format!(
            "non-finite value {} at grid index {pos}",
            f.values[pos]
        )));
    }
    Ok(forward_unchecked(&f.grid, &f.values))
}

pub(crate) fn forward_unchecked(grid: &Grid, values: &[f64]) -> SpectralField {
    let mut data: Vec<Complex64> = values.iter().map(|&v| Complex64::new(v, 0.0)).collect();
    grid.fft_forward(&mut data);
    let norm = 1.0 / grid.len() as f64;
    data.iter_mut().for_each(|c| *c *= norm);
    SpectralField::from_parts(grid.clone(), data)
}

/// Inverse transform; requires Hermitian symmetry to [`HERMITIAN_TOLERANCE`].
pub fn inverse_transform(f: &SpectralField) -> Result<RealField> {
    f.check_hermitian(HERMITIAN_TOLERANCE)?;
    Ok(inverse_unchecked(f))
}

pub(crate) fn inverse_unchecked(f: &SpectralField) -> RealField {
    let mut data = f.coeffs.clone();
    f.grid.fft_inverse(&mut data);
    RealField {
        grid: f.grid.clone(),
        values: data.into_iter().map(|c| c.re).collect(),
    }
}

/// Inverse transforms two Hermitian spectra with one complex FFT by packing
/// them as `a + i b`.
pub(crate) fn inverse_pair(a: &[Complex64], b: &[Complex64], grid: &Grid) -> (Vec<f64>, Vec<f64>) {
    let i = Complex64::new(0.0, 1.0);
    let mut data: Vec<Complex64> = a.iter().zip(b).map(|(x, y)| x + i * y).collect();
    grid.fft_inverse(&mut data);
    data.into_iter().map(|c| (c.re, c.im)).unzip()
}
