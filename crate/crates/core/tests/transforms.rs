use std::f64::consts::TAU;

use num_complex::Complex64;
use proptest::prelude::*;
use sqg_core::random::band_limited;
use sqg_core::spectral::{fourier_gradient_bound, inner_product};
use sqg_core::{
    forward_transform, fractional_laplacian, gradient_sup, inverse_transform, riesz_velocity,
    sobolev_norm, Grid, RealField, SpectralField,
};

fn real_field(n: usize, length: f64, values: Vec<f64>) -> RealField {
    RealField::new(Grid::new(n, length).unwrap(), values).unwrap()
}

fn grid_values(n: usize) -> impl Strategy<Value = Vec<f64>> {
    prop::collection::vec(-10.0f64..10.0, n * n)
}

/// Direct O(n⁴) evaluation of `(1/n²) Σ f_j e^{−i k·x_j}`.
fn brute_force_dft(f: &RealField) -> Vec<Complex64> {
    let n = f.grid().n();
    let mut out = vec![Complex64::new(0.0, 0.0); n * n];
    for i1 in 0..n {
        for i2 in 0..n {
            let mut acc = Complex64::new(0.0, 0.0);
            for j1 in 0..n {
                for j2 in 0..n {
                    let phase = -TAU * ((i1 * j1 + i2 * j2) % n) as f64 / n as f64;
                    acc += f.at(j1, j2) * Complex64::from_polar(1.0, phase);
                }
            }
            out[i1 * n + i2] = acc / (n * n) as f64;
        }
    }
    out
}

#[test]
fn forward_matches_direct_sum() {
    let mut x = 0.3f64;
    let values: Vec<f64> = (0..64)
        .map(|_| {
            x = (x * 3.7 + 0.11).fract();
            x - 0.5
        })
        .collect();
    let f = real_field(8, 3.0, values);
    let fast = forward_transform(&f).unwrap();
    let slow = brute_force_dft(&f);
    for (a, b) in fast.coeffs().iter().zip(&slow) {
        assert!((a - b).norm() < 1e-15, "{a} vs {b}");
    }
}

#[test]
fn rejects_odd_and_tiny_grids() {
    assert!(Grid::new(7, 1.0).is_err());
    assert!(Grid::new(6, 1.0).is_err());
    assert!(Grid::new(8, 0.0).is_err());
    assert!(Grid::new(8, f64::NAN).is_err());
}

#[test]
fn riesz_of_unit_modes() {
    let g = Grid::periodic_2pi(16).unwrap();
    let th = SpectralField::zeros(&g).with_mode(1, 0, Complex64::new(0.0, -0.5));
    let v = riesz_velocity(&th);
    let u1 = inverse_transform(&v.u1).unwrap();
    let u2 = inverse_transform(&v.u2).unwrap();
    let want = RealField::from_fn(&g, |x1, _| x1.cos());
    for (a, b) in u2.values().iter().zip(want.values()) {
        assert!((a - b).abs() < 1e-14);
    }
    assert!(u1.values().iter().all(|v| v.abs() < 1e-15));
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn round_trip(exp in 3u32..6, values in grid_values(32), length in 0.5f64..20.0) {
        let n = 1 << exp;
        let f = real_field(n, length, values[..n * n].to_vec());
        let back = inverse_transform(&forward_transform(&f).unwrap()).unwrap();
        let scale = f.values().iter().fold(1.0f64, |m, v| m.max(v.abs()));
        for (a, b) in f.values().iter().zip(back.values()) {
            prop_assert!((a - b).abs() <= 1e-12 * scale);
        }
    }

    #[test]
    fn parseval(values in grid_values(16), length in 0.5f64..20.0) {
        let f = real_field(16, length, values);
        let hat = forward_transform(&f).unwrap();
        let dx = f.grid().dx();
        let physical: f64 = f.values().iter().map(|v| v * v).sum::<f64>() * dx * dx;
        let spectral = sobolev_norm(&hat, 0.0).unwrap().powi(2);
        prop_assert!((physical - spectral).abs() <= 1e-12 * physical.max(1e-300));
    }

    #[test]
    fn velocity_is_divergence_free(seed in any::<u64>(), max_mode in 1i64..10) {
        let g = Grid::new(32, 5.0).unwrap();
        let th = band_limited(&g, max_mode, seed);
        let scale = th.max_abs().max(1e-300);
        prop_assert!(riesz_velocity(&th).max_divergence() <= 1e-12 * scale);
    }

    #[test]
    fn fractional_laplacian_is_nonnegative(seed in any::<u64>(), gamma in 0.01f64..=2.0) {
        let g = Grid::periodic_2pi(16).unwrap();
        let th = band_limited(&g, 7, seed);
        let lap = fractional_laplacian(&th, gamma).unwrap();
        let ip = inner_product(&lap, &th).unwrap();
        prop_assert!(ip.re >= 0.0);
        prop_assert!(ip.im.abs() <= 1e-12 * ip.re.abs().max(1e-300));
        let want = sobolev_norm(&th, gamma / 2.0).unwrap().powi(2);
        prop_assert!((ip.re - want).abs() <= 1e-12 * want);
    }

    #[test]
    fn sobolev_interpolation(seed in any::<u64>(), s in 0.0f64..2.0, a in 0.0f64..1.0) {
        let g = Grid::periodic_2pi(32).unwrap();
        let th = band_limited(&g, 10, seed);
        let mid = sobolev_norm(&th, s + a).unwrap();
        let lo = sobolev_norm(&th, s).unwrap();
        let hi = sobolev_norm(&th, s + 2.0 * a).unwrap();
        prop_assert!(mid * mid <= lo * hi * (1.0 + 1e-12));
    }

    #[test]
    fn homogeneity(seed in any::<u64>(), s in 0.0f64..3.0, c in -5.0f64..5.0) {
        let g = Grid::periodic_2pi(16).unwrap();
        let th = band_limited(&g, 5, seed);
        let a = sobolev_norm(&th.scaled(c), s).unwrap();
        let b = c.abs() * sobolev_norm(&th, s).unwrap();
        prop_assert!((a - b).abs() <= 1e-12 * b.max(1e-300));
    }

    #[test]
    fn gradient_sup_below_fourier_bound(seed in any::<u64>()) {
        let g = Grid::new(32, 3.0).unwrap();
        let th = band_limited(&g, 10, seed);
        let real = inverse_transform(&th).unwrap();
        let sup = gradient_sup(&real).unwrap();
        prop_assert!(sup <= fourier_gradient_bound(&th) * (1.0 + 1e-12));
    }
}
