use std::f64::consts::TAU;

use proptest::prelude::*;
use sqg_core::modulus::{default_offsets, max_increment, knv_denominator};
use sqg_core::random::band_limited;
use sqg_core::{
    build_knv_modulus, check_modulus, gradient_bound_check, gradient_sup, inverse_transform,
    Grid, LatticeOffset, RealField,
};

/// `∫₀^∞ 0.1/(√s + s² ln s) ds`, cross-checked against an arbitrary-precision
/// evaluation: 0.314681954214164121594631326611.
const OMEGA_PRIME_ZERO_D01: f64 = 0.314_681_954_214_164;

fn simpson(f: &dyn Fn(f64) -> f64, a: f64, b: f64, tol: f64) -> f64 {
    #[allow(clippy::too_many_arguments)]
    fn rec(f: &dyn Fn(f64) -> f64, a: f64, b: f64, fa: f64, fm: f64, fb: f64, whole: f64, tol: f64, depth: u32) -> f64 {
        let m = 0.5 * (a + b);
        let (lm, rm) = (0.5 * (a + m), 0.5 * (m + b));
        let (flm, frm) = (f(lm), f(rm));
        let left = (m - a) / 6.0 * (fa + 4.0 * flm + fm);
        let right = (b - m) / 6.0 * (fm + 4.0 * frm + fb);
        let delta = left + right - whole;
        if depth == 0 || delta.abs() <= 15.0 * tol {
            return left + right + delta / 15.0;
        }
        rec(f, a, m, fa, flm, fm, left, tol / 2.0, depth - 1) + rec(f, m, b, fm, frm, fb, right, tol / 2.0, depth - 1)
    }
    let (fa, fb, fm) = (f(a), f(b), f(0.5 * (a + b)));
    let whole = (b - a) / 6.0 * (fa + 4.0 * fm + fb);
    rec(f, a, b, fa, fm, fb, whole, tol, 60)
}

/// `∫₀^∞ 1/(√s + s² ln s) ds` by adaptive Simpson: `s = v²` on `[0, 1]`,
/// `s = 1/u` on the tail.
fn reference_integral(tol: f64) -> f64 {
    let head = |v: f64| if v == 0.0 { 2.0 } else { 2.0 / (1.0 + 2.0 * v.powi(3) * v.ln()) };
    let tail = |u: f64| if u == 0.0 { 0.0 } else { 1.0 / (u.powf(1.5) - u.ln()) };
    simpson(&head, 0.0, 1.0, tol) + simpson(&tail, 0.0, 1.0, tol)
}

#[test]
fn omega_prime_at_zero_regression() {
    let coarse = 0.1 * reference_integral(1e-10);
    let fine = 0.1 * reference_integral(1e-13);
    assert!((coarse - fine).abs() < 1e-8, "{coarse} vs {fine}");
    assert!((fine - OMEGA_PRIME_ZERO_D01).abs() < 1e-9, "{fine}");
    let w = build_knv_modulus(0.1, 1e3, 512).unwrap();
    assert!((w.omega_prime_at_zero - OMEGA_PRIME_ZERO_D01).abs() < 1e-12, "{}", w.omega_prime_at_zero);
}

#[test]
fn tabulated_values_match_reference() {
    // Per unit δ₃, from an arbitrary-precision evaluation.
    let prime = [(1e-3, 3.0836), (0.1, 2.4997), (1.0, 0.83791), (10.0, 0.032209), (1e3, 1.2815e-4)];
    let value = [(0.1, 0.27198), (1.0, 1.64357), (3.0, 2.39612), (10.0, 2.88768), (100.0, 3.43908)];
    let w = build_knv_modulus(1.0, 1e3, 4096).unwrap();
    for (r, want) in prime {
        let got = w.omega_prime_at(r).unwrap();
        assert!((got - want).abs() <= 1e-4 * want, "ω′({r}) = {got}, want {want}");
    }
    for (r, want) in value {
        let got = w.omega_at(r).unwrap();
        assert!((got - want).abs() <= 1e-4 * want, "ω({r}) = {got}, want {want}");
    }
}

#[test]
fn linear_in_delta3() {
    let a = build_knv_modulus(0.1, 1e3, 300).unwrap();
    let b = build_knv_modulus(0.2, 1e3, 300).unwrap();
    assert_eq!(a.r_table, b.r_table);
    for (x, y) in a.omega.iter().zip(&b.omega) {
        assert!((2.0 * x - y).abs() <= 1e-14 * y);
    }
    for (x, y) in a.omega_prime.iter().zip(&b.omega_prime) {
        assert!((2.0 * x - y).abs() <= 1e-14 * y);
    }
    assert!((2.0 * a.omega_prime_at_zero - b.omega_prime_at_zero).abs() <= 1e-15);
}

#[test]
fn second_derivative_residual() {
    let w = build_knv_modulus(0.1, 1e4, 4096).unwrap();
    for (r, d2) in w.second_differences() {
        let residual = d2 * knv_denominator(r);
        assert!((residual + 0.1).abs() <= 0.01 * 0.1, "r = {r}: {residual}");
    }
}

#[test]
fn unbounded_growth() {
    let ends: Vec<f64> = [1e2, 1e4, 1e6]
        .iter()
        .map(|&r| build_knv_modulus(0.1, r, 1024).unwrap().omega_at(r).unwrap())
        .collect();
    assert!(ends[1] > ends[0] * 1.01 && ends[2] > ends[1] * 1.01, "{ends:?}");
}

#[test]
fn sine_increments_match_closed_form() {
    let n = 64;
    let g = Grid::periodic_2pi(n).unwrap();
    let w = build_knv_modulus(0.1, 10.0, 512).unwrap();
    let eps = 0.02;
    let theta = RealField::from_fn(&g, |x1, _| eps * x1.sin());
    let offsets: Vec<LatticeOffset> = (1..=20).map(|d| LatticeOffset::new(d, 0)).collect();
    // On the grid, the largest |cos| sample at half-cell shifts is cos(Δx/2).
    let closed = |d: i64| {
        let r = d as f64 * g.dx();
        let peak = if d % 2 == 0 { 1.0 } else { (g.dx() / 2.0).cos() };
        2.0 * eps * (r / 2.0).sin().abs() * peak
    };
    for d in &offsets {
        assert!((max_increment(&theta, *d) - closed(d.d1)).abs() < 1e-12);
    }
    let report = check_modulus(&theta, &w, &offsets, 0.0).unwrap();
    let expected = offsets
        .iter()
        .map(|d| closed(d.d1) / w.omega_at(d.length(&g)).unwrap())
        .fold(0.0, f64::max);
    assert!((report.worst_ratio - expected).abs() < 1e-12);
    assert!(!report.breached);

    // Amplify until the binding offset crosses ω.
    let big = theta.scaled(1.05 / report.worst_ratio);
    let breach = check_modulus(&big, &w, &offsets, 1.5).unwrap();
    assert!(breach.breached);
    assert_eq!(breach.worst_offset, report.worst_offset);
    assert_eq!(breach.time, 1.5);
}

#[test]
fn zero_field_and_gradient_margin() {
    let g = Grid::periodic_2pi(32).unwrap();
    let w = build_knv_modulus(0.1, 10.0, 128).unwrap();
    let zero = RealField::zeros(&g);
    let r = check_modulus(&zero, &w, &default_offsets(&g, 10.0), 0.0).unwrap();
    assert_eq!(r.worst_ratio, 0.0);
    assert!(!r.breached);
    let b = gradient_bound_check(&zero, &w).unwrap();
    assert!(b.holds);
    assert_eq!(b.margin, w.omega_prime_at_zero);
}

#[test]
fn offsets_outside_table_are_range_errors() {
    let g = Grid::periodic_2pi(32).unwrap();
    let w = build_knv_modulus(0.1, 1.0, 128).unwrap();
    let far = [LatticeOffset::new(16, 0)];
    assert!(check_modulus(&RealField::zeros(&g), &w, &far, 0.0).is_err());
    assert!(check_modulus(&RealField::zeros(&g), &w, &[], 0.0).is_err());
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(32))]

    #[test]
    fn concave_and_subadditive(a in 1e-4f64..50.0, b in 1e-4f64..50.0) {
        let w = build_knv_modulus(0.1, 100.0, 512).unwrap();
        let sum = w.omega_at(a + b).unwrap();
        prop_assert!(sum <= w.omega_at(a).unwrap() + w.omega_at(b).unwrap() + 1e-15);
        prop_assert!(w.omega_prime.windows(2).all(|p| p[1] < p[0]));
    }

    #[test]
    fn worst_ratio_is_linear_in_amplitude(seed in any::<u64>(), c in 0.01f64..100.0) {
        let g = Grid::new(32, TAU).unwrap();
        let w = build_knv_modulus(0.1, 10.0, 256).unwrap();
        let f = inverse_transform(&band_limited(&g, 6, seed)).unwrap();
        let offsets = default_offsets(&g, 10.0);
        let r1 = check_modulus(&f, &w, &offsets, 0.0).unwrap().worst_ratio;
        let rc = check_modulus(&f.scaled(c), &w, &offsets, 0.0).unwrap().worst_ratio;
        prop_assert!((rc - c * r1).abs() <= 1e-12 * c * r1);
    }

    #[test]
    fn monitor_pass_implies_gradient_bound(seed in any::<u64>(), amp in 1e-3f64..0.2) {
        let g = Grid::new(64, 40.0).unwrap();
        let w = build_knv_modulus(0.1, 40.0, 512).unwrap();
        let f = inverse_transform(&band_limited(&g, 4, seed)).unwrap();
        let f = f.scaled(amp / gradient_sup(&f).unwrap().max(1e-300));
        let dense: Vec<LatticeOffset> = (1..=4)
            .flat_map(|a| (-4..=4).map(move |b| LatticeOffset::new(a, b)))
            .chain((1..=4).map(|b| LatticeOffset::new(0, b)))
            .chain(default_offsets(&g, 40.0))
            .collect();
        let report = check_modulus(&f, &w, &dense, 0.0).unwrap();
        if report.worst_ratio < 1.0 {
            prop_assert!(gradient_bound_check(&f, &w).unwrap().holds);
        }
    }
}
