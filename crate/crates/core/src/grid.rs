//! Periodic square grid and its wavenumber lattice.

use std::f64::consts::PI;
use std::fmt;
use std::sync::Arc;

use num_complex::Complex64;
use rustfft::{Fft, FftPlanner};

use crate::error::{Result, SqgError};
use crate::par;

struct Plans {
    forward: Arc<dyn Fft<f64>>,
    inverse: Arc<dyn Fft<f64>>,
}

/// An `n × n` periodic grid on the box `[0, L)²`.
///
/// Array index `i ∈ 0..n` along an axis carries the integer frequency
/// `m = i` for `i ≤ n/2` and `m = i − n` otherwise, so the representable
/// frequencies are `−n/2+1, …, n/2`. Storage is row-major with the second
/// coordinate fastest: element `(i1, i2)` lives at `i1 * n + i2`.
#[derive(Clone)]
pub struct Grid {
    n: usize,
    length: f64,
    /// Physical wavenumber per axis index.
    k: Arc<[f64]>,
    /// Wavenumber used by odd (first-derivative) multipliers: Nyquist zeroed.
    k_odd: Arc<[f64]>,
    plans: Arc<Plans>,
}

impl Grid {
    pub fn new(n: usize, length: f64) -> Result<Self> {
        if n < 8 || !n.is_multiple_of(2) {
            return Err(SqgError::InvalidGrid(format!(
                "n must be even and at least 8 (got {n})"
            )));
        }
        if !(length.is_finite() && length > 0.0) {
            return Err(SqgError::InvalidGrid(format!(
                "box length must be positive and finite (got {length})"
            )));
        }
        let scale = 2.0 * PI / length;
        let k: Arc<[f64]> = (0..n).map(|i| scale * mode_of(i, n) as f64).collect();
        let k_odd: Arc<[f64]> = (0..n)
            .map(|i| if i == n / 2 { 0.0 } else { k[i] })
            .collect();
        let mut planner = FftPlanner::new();
        let plans = Arc::new(Plans {
            forward: planner.plan_fft_forward(n),
            inverse: planner.plan_fft_inverse(n),
        });
        Ok(Self {
            n,
            length,
            k,
            k_odd,
            plans,
        })
    }

    /// Convenience constructor for the `2π` box.
    pub fn periodic_2pi(n: usize) -> Result<Self> {
        Self::new(n, 2.0 * PI)
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn length(&self) -> f64 {
        self.length
    }

    /// Grid spacing `L / n`.
    pub fn dx(&self) -> f64 {
        self.length / self.n as f64
    }

    /// Number of grid points, `n²`.
    pub fn len(&self) -> usize {
        self.n * self.n
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    /// The same lattice on a box of a different side length.
    pub fn with_length(&self, length: f64) -> Result<Self> {
        Self::new(self.n, length)
    }

    /// Integer frequency carried by axis index `i`.
    pub fn mode(&self, i: usize) -> i64 {
        mode_of(i, self.n)
    }

    /// Axis index holding integer frequency `m` (taken modulo `n`).
    pub fn index_of(&self, m: i64) -> usize {
        m.rem_euclid(self.n as i64) as usize
    }

    /// Flat storage index of the mode `(m1, m2)`.
    pub fn flat_index(&self, m1: i64, m2: i64) -> usize {
        self.index_of(m1) * self.n + self.index_of(m2)
    }

    /// Integer frequencies of flat storage index `idx`.
    pub fn modes_at(&self, idx: usize) -> (i64, i64) {
        (self.mode(idx / self.n), self.mode(idx % self.n))
    }

    /// Flat index of the mode `−m`, the Hermitian partner of `idx`.
    pub fn conjugate_index(&self, idx: usize) -> usize {
        let n = self.n;
        let (i1, i2) = (idx / n, idx % n);
        ((n - i1) % n) * n + (n - i2) % n
    }

    /// Physical wavenumbers per axis index.
    pub fn wavenumbers(&self) -> &[f64] {
        &self.k
    }

    /// Wavenumbers for first-derivative multipliers, Nyquist set to zero.
    pub fn derivative_wavenumbers(&self) -> &[f64] {
        &self.k_odd
    }

    /// `|k|` of the mode stored at `(i1, i2)`.
    pub fn k_magnitude(&self, i1: usize, i2: usize) -> f64 {
        self.k[i1].hypot(self.k[i2])
    }

    /// Whether mode `(i1, i2)` survives the 2/3 truncation.
    pub fn is_resolved(&self, i1: usize, i2: usize) -> bool {
        let m = self.mode(i1).abs().max(self.mode(i2).abs());
        3 * m <= self.n as i64
    }

    /// Coordinate of grid point `j` along an axis.
    pub fn coordinate(&self, j: usize) -> f64 {
        self.dx() * j as f64
    }

    /// Unnormalized forward 2D DFT in place.
    pub(crate) fn fft_forward(&self, data: &mut [Complex64]) {
        self.fft_2d(data, &self.plans.forward);
    }

    /// Unnormalized inverse 2D DFT in place.
    pub(crate) fn fft_inverse(&self, data: &mut [Complex64]) {
        self.fft_2d(data, &self.plans.inverse);
    }

    fn fft_2d(&self, data: &mut [Complex64], plan: &Arc<dyn Fft<f64>>) {
        let n = self.n;
        debug_assert_eq!(data.len(), n * n);
        let scratch_len = plan.get_inplace_scratch_len();
        let rows = |buf: &mut [Complex64]| {
            par::for_each_row_with(
                buf,
                n,
                || vec![Complex64::new(0.0, 0.0); scratch_len],
                |scratch, row| plan.process_with_scratch(row, scratch),
            );
        };
        rows(data);
        let mut transposed = vec![Complex64::new(0.0, 0.0); n * n];
        transpose(data, &mut transposed, n);
        rows(&mut transposed);
        transpose(&transposed, data, n);
    }
}

fn transpose(src: &[Complex64], dst: &mut [Complex64], n: usize) {
    par::for_each_row(dst, n, |j, row| {
        for (i, out) in row.iter_mut().enumerate() {
            *out = src[i * n + j];
        }
    });
}

fn mode_of(i: usize, n: usize) -> i64 {
    if i <= n / 2 {
        i as i64
    } else {
        i as i64 - n as i64
    }
}

impl PartialEq for Grid {
    fn eq(&self, other: &Self) -> bool {
        self.n == other.n && self.length.to_bits() == other.length.to_bits()
    }
}

impl fmt::Debug for Grid {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("Grid")
            .field("n", &self.n)
            .field("length", &self.length)
            .finish()
    }
}
