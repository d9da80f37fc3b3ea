//! Seeded random fields.

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::field::SpectralField;
use crate::grid::Grid;

/// Deterministic generator used for every random field in the crate.
pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Random Hermitian spectrum built from `amplitude(m1, m2)` with uniform phases.
///
/// Modes on the Nyquist lines and the mean are left at zero; modes where
/// `amplitude` returns `None` are skipped without consuming randomness.
pub fn random_spectrum(
    grid: &Grid,
    seed: u64,
    mut amplitude: impl FnMut(i64, i64) -> Option<f64>,
) -> SpectralField {
    let mut rng = rng(seed);
    let n = grid.n();
    let nyq = (n / 2) as i64;
    let mut field = SpectralField::zeros(grid);
    // Visit one representative of each ± pair: m1 > 0, or m1 = 0 and m2 > 0.
    for m1 in 0..nyq {
        for m2 in (-nyq + 1)..nyq {
            if m1 == 0 && m2 <= 0 {
                continue;
            }
            let Some(a) = amplitude(m1, m2) else {
                continue;
            };
            let phase = rng.random::<f64>() * std::f64::consts::TAU;
            field = field.with_mode(m1, m2, Complex64::from_polar(a, phase));
        }
    }
    field
}

/// Random field supported on `max(|m₁|, |m₂|) ≤ max_mode` with
/// amplitudes uniform in `[0, 1)` and mean zero.
pub fn band_limited(grid: &Grid, max_mode: i64, seed: u64) -> SpectralField {
    let mut amp_rng = rng(seed ^ 0x9e37_79b9_7f4a_7c15);
    random_spectrum(grid, seed, |m1, m2| {
        (m1.abs().max(m2.abs()) <= max_mode).then(|| amp_rng.random::<f64>())
    })
}
