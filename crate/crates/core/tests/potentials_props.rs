use std::f64::consts::PI;

use proptest::prelude::*;
use virial_bounds::numerics::integrate;
use virial_bounds::potentials::{
    ball_volume, compute_vertex_coefficients, g_monte_carlo, g_monte_carlo_par, McSettings, PairPotential, Provenance,
    PsiMode, VertexCoefficients,
};

#[test]
fn hard_rods_monte_carlo_within_four_sigma() {
    // a = 1/2, C = 1: g(2) = 1/4, g(n) = 0 for n ≥ 3
    let p = PairPotential::hard_sphere(0.5, 1).unwrap();
    let exact = [1.0, 0.25, 0.0, 0.0, 0.0];
    for n in 2..=5 {
        let est = g_monte_carlo_par(&p, n, 1_000_000, 11, 4).unwrap();
        let err = (est.estimate - exact[n - 1]).abs();
        assert!(err <= 4.0 * est.std_err + 1e-15, "n = {n}: {est:?}");
    }
}

#[test]
fn hard_disk_second_coefficient() {
    let p = PairPotential::hard_sphere(1.0, 2).unwrap();
    let c = ball_volume(2, 1.0);
    let est = g_monte_carlo(&p, 2, 400_000, 5).unwrap();
    let exact = 3.0 * 3f64.sqrt() / (4.0 * PI) * c * c;
    assert!((est.estimate - exact).abs() <= 4.0 * est.std_err);
}

#[test]
fn monte_carlo_is_deterministic_and_worker_independent() {
    let p = PairPotential::power_law(1.0, 1.0, 6.0, 1.0, 3).unwrap();
    let a = g_monte_carlo_par(&p, 3, 20_000, 42, 1).unwrap();
    let b = g_monte_carlo_par(&p, 3, 20_000, 42, 1).unwrap();
    let c = g_monte_carlo_par(&p, 3, 20_000, 42, 5).unwrap();
    assert_eq!(a.estimate.to_bits(), b.estimate.to_bits());
    assert_eq!(a.estimate.to_bits(), c.estimate.to_bits());
    assert_eq!(a.std_err.to_bits(), c.std_err.to_bits());
    let d = g_monte_carlo_par(&p, 3, 20_000, 43, 1).unwrap();
    assert_ne!(a.estimate, d.estimate);
}

/// ∫_0^∞ h(r) dr as ∫_0^1 h + ∫_0^1 h(1/s)/s² ds.
fn half_line(h: impl Fn(f64) -> f64, tol: f64) -> f64 {
    let near = integrate(&h, 0.0, 1.0, tol, tol).value;
    let far = integrate(|s| h(1.0 / s) / (s * s), 0.0, 1.0, tol, tol).value;
    near + far
}

/// g(2) for φ = r^{-6} in d = 3 by nested quadrature over r₁, r₂ and the angle.
fn power_law_g2_quadrature() -> f64 {
    let f = |r: f64| -(-r.powi(-6)).exp_m1();
    let w = |r: f64| if r > 0.0 { (-r.powi(-6)).exp() } else { 0.0 };
    half_line(
        |r1| {
            if !r1.is_finite() {
                return 0.0;
            }
            let inner = half_line(
                |r2| {
                    if !r2.is_finite() {
                        return 0.0;
                    }
                    let ang = integrate(|t| w((r1 * r1 + r2 * r2 - 2.0 * r1 * r2 * t).max(0.0).sqrt()), -1.0, 1.0, 1e-10, 1e-9)
                        .value;
                    2.0 * PI * r2 * r2 * f(r2) * ang
                },
                1e-9,
            );
            4.0 * PI * r1 * r1 * f(r1) * inner
        },
        1e-8,
    )
}

#[test]
fn power_law_g2_quadrature_oracle() {
    let p = PairPotential::power_law(1.0, 1.0, 6.0, 1.0, 3).unwrap();
    let c = p.c_beta().unwrap();
    let quad = power_law_g2_quadrature() / (c * c);
    assert!((quad - 0.697_835).abs() < 2e-5, "{quad}");
    let est = g_monte_carlo_par(&p, 2, 200_000, 3, 2).unwrap();
    let sigma = est.std_err / (c * c);
    assert!((est.estimate / (c * c) - quad).abs() <= 4.0 * sigma, "{est:?} vs {quad}");
}

#[test]
fn c_beta_closed_form_matches_quadrature() {
    for n in [4.0, 5.0, 6.0, 7.0, 8.0, 12.0] {
        for beta in [0.5, 1.0, 2.0] {
            let p = PairPotential::power_law(1.3, 0.8, n, beta, 3).unwrap();
            let closed = p.c_beta_closed_form().unwrap();
            let quad = p.c_beta_quadrature().unwrap();
            assert!((closed - quad).abs() <= 1e-7 * closed, "n = {n}, beta = {beta}");
        }
    }
    let p = PairPotential::power_law(1.0, 1.0, 6.0, 1.0, 3).unwrap();
    assert!((p.c_beta().unwrap() - 4.0 * PI * PI.sqrt() / 3.0).abs() < 1e-12);
    assert!(PairPotential::power_law(1.0, 1.0, 3.0, 1.0, 3).is_err());
}

#[test]
fn vertex_entries_bounded_by_powers_of_c() {
    let p = PairPotential::power_law(1.0, 1.0, 8.0, 1.0, 3).unwrap();
    let mc = McSettings { samples: 20_000, seed: 1, workers: 2, max_order: 4 };
    let vc = compute_vertex_coefficients(&p, 10, &mc).unwrap();
    let c = vc.c_beta();
    for e in vc.entries() {
        let cap = c.powi(e.n as i32);
        assert!(e.value >= 0.0 && e.upper >= e.value - 1e-12 * cap && e.upper <= cap * (1.0 + 1e-12), "{e:?}");
        if e.n > 4 {
            assert!(matches!(e.provenance, Provenance::Bound { .. }));
        }
    }
}

fn normalized() -> impl Strategy<Value = Vec<f64>> {
    prop::collection::vec(0.0f64..=1.0, 1..8)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn psi_monotone_convex_and_ordered(c in 0.2f64..5.0, g in normalized(), cap in prop::option::of(2usize..12)) {
        let vc = VertexCoefficients::from_normalized(c, &g, Provenance::Supplied, cap).pad_submultiplicative(10);
        let h = 0.02 / c;
        let mut prev = vc.psi(0.0, PsiMode::Upper);
        prop_assert!((prev - 1.0).abs() < 1e-15);
        for i in 1..200 {
            let mu = i as f64 * h;
            let up = vc.psi(mu, PsiMode::Upper);
            let lo = vc.psi(mu, PsiMode::Lower);
            prop_assert!(up >= prev);
            prop_assert!(up >= lo * (1.0 - 1e-14) && lo >= 1.0);
            let second = vc.psi(mu + h, PsiMode::Upper) - 2.0 * up + prev;
            prop_assert!(second >= -1e-12 * up);
            prev = up;
        }
    }
}
