//! Named initial conditions.

use std::f64::consts::TAU;
use std::fmt;
use std::str::FromStr;

use crate::error::{Result, SqgError};
use crate::field::{forward_transform, RealField, SpectralField};
use crate::grid::Grid;
use crate::random::random_spectrum;
use crate::spectral::sobolev_norm;

/// Spectral slope offset of the `random_h1` preset: amplitudes `|m|^{−2−δ}`.
pub const RANDOM_H1_DELTA: f64 = 0.05;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Preset {
    /// `sin x₁`.
    SingleMode,
    /// `sin x₁ sin x₂ + cos x₂`.
    Cmt,
    /// Random phases with amplitudes `|m|^{−2−δ}`, normalized to unit `Ḣ¹` norm.
    RandomH1,
    /// Mean-free Gaussian `exp(−|x − x_c|²/σ²)` at the box center.
    GaussianBump,
}

impl Preset {
    pub const ALL: [Preset; 4] = [Self::SingleMode, Self::Cmt, Self::RandomH1, Self::GaussianBump];

    pub fn name(self) -> &'static str {
        match self {
            Self::SingleMode => "single_mode",
            Self::Cmt => "cmt",
            Self::RandomH1 => "random_h1",
            Self::GaussianBump => "gaussian_bump",
        }
    }
}

impl fmt::Display for Preset {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Preset {
    type Err = SqgError;

    fn from_str(s: &str) -> Result<Self> {
        Self::ALL
            .into_iter()
            .find(|p| p.name() == s)
            .ok_or_else(|| SqgError::Parameter(format!("unknown preset `{s}`")))
    }
}

/// A preset together with its parameters.
#[derive(Debug, Clone, PartialEq)]
pub struct InitialCondition {
    pub preset: Preset,
    pub seed: u64,
    /// Multiplies the preset after any normalization.
    pub amplitude: f64,
    /// Gaussian width; `None` means an eighth of the box.
    pub sigma: Option<f64>,
}

impl InitialCondition {
    pub fn new(preset: Preset, seed: u64) -> Self {
        Self {
            preset,
            seed,
            amplitude: 1.0,
            sigma: None,
        }
    }

    pub fn build(&self, grid: &Grid) -> Result<SpectralField> {
        let base = match self.preset {
            Preset::SingleMode => periodic(grid, |x1, _| x1.sin())?,
            Preset::Cmt => periodic(grid, |x1, x2| x1.sin() * x2.sin() + x2.cos())?,
            Preset::RandomH1 => random_h1(grid, self.seed)?,
            Preset::GaussianBump => {
                let sigma = self.sigma.unwrap_or(grid.length() / 8.0);
                if !(sigma.is_finite() && sigma > 0.0) {
                    return Err(SqgError::Parameter(format!("sigma must be positive, got {sigma}")));
                }
                gaussian_bump(grid, sigma)?
            }
        };
        Ok(base.scaled(self.amplitude))
    }
}

/// [`InitialCondition::build`] with unit amplitude and default width.
pub fn make_initial(preset: Preset, grid: &Grid, seed: u64) -> Result<SpectralField> {
    InitialCondition::new(preset, seed).build(grid)
}

/// Samples a `2π`-periodic profile with the box rescaled onto `[0, 2π)`.
fn periodic(grid: &Grid, f: impl Fn(f64, f64) -> f64 + Sync + Send) -> Result<SpectralField> {
    let s = TAU / grid.length();
    forward_transform(&RealField::from_fn(grid, |x1, x2| f(s * x1, s * x2)))
}

fn random_h1(grid: &Grid, seed: u64) -> Result<SpectralField> {
    let cutoff = (grid.n() / 3) as i64;
    let f = random_spectrum(grid, seed, |m1, m2| {
        (m1.abs().max(m2.abs()) <= cutoff).then(|| ((m1 * m1 + m2 * m2) as f64).powf(-(2.0 + RANDOM_H1_DELTA) / 2.0))
    });
    let h1 = sobolev_norm(&f, 1.0)?;
    Ok(f.scaled(1.0 / h1))
}

fn gaussian_bump(grid: &Grid, sigma: f64) -> Result<SpectralField> {
    let c = grid.length() / 2.0;
    let bump = RealField::from_fn(grid, |x1, x2| (-((x1 - c).powi(2) + (x2 - c).powi(2)) / (sigma * sigma)).exp());
    let mean = bump.values().iter().sum::<f64>() / grid.len() as f64;
    forward_transform(&RealField::from_fn_indexed(grid, |j1, j2| bump.at(j1, j2) - mean))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn single_mode_has_two_half_modes() {
        let g = Grid::periodic_2pi(64).unwrap();
        let f = make_initial(Preset::SingleMode, &g, 0).unwrap();
        let big: Vec<f64> = f.coeffs().iter().map(|c| c.norm()).filter(|a| *a > 1e-12).collect();
        assert_eq!(big.len(), 2);
        assert!(big.iter().all(|a| (a - 0.5).abs() < 1e-15));
    }

    #[test]
    fn random_h1_seeding_and_norm() {
        let g = Grid::periodic_2pi(64).unwrap();
        let a = make_initial(Preset::RandomH1, &g, 4).unwrap();
        assert_eq!(a, make_initial(Preset::RandomH1, &g, 4).unwrap());
        assert_ne!(a, make_initial(Preset::RandomH1, &g, 5).unwrap());
        assert!((sobolev_norm(&a, 1.0).unwrap() - 1.0).abs() < 1e-12);
        assert_eq!(a.mean().norm(), 0.0);
    }

    #[test]
    fn bump_is_mean_free() {
        let g = Grid::new(32, 10.0).unwrap();
        let f = make_initial(Preset::GaussianBump, &g, 0).unwrap();
        assert!(f.mean().norm() < 1e-16);
        assert!(f.max_abs() > 0.0);
    }

    #[test]
    fn names_round_trip() {
        for p in Preset::ALL {
            assert_eq!(p.name().parse::<Preset>().unwrap(), p);
        }
        assert!("vortex".parse::<Preset>().is_err());
    }
}
