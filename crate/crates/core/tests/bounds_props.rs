use std::f64::consts::E;

use num_bigint::BigInt;
use num_traits::{One, Signed, Zero};
use proptest::prelude::*;
use virial_bounds::cluster::{
    classical_bound, fixed_point_mu_z, optimize_r_star, penrose_upper_bound, pi_iteration_sequence, ExponentialPsi,
    PsiView,
};
use virial_bounds::formal_series::{factorial, ratio, Rational, Series};
use virial_bounds::potentials::{PairPotential, Provenance, PsiMode, VertexCoefficients};
use virial_bounds::trees::classify_splittable;
use virial_bounds::virial::{
    grt_bound, lp_classical, m_star, r_star_virial, t_pen1_series, tree_sum_degrees, tree_sum_functional,
    virial_from_cluster_bell, virial_from_cluster_lagrange, virial_term_bound, vertex_weights, GRT_DEFAULT_TERMS,
};

fn hard_rods(c: f64) -> VertexCoefficients {
    VertexCoefficients::from_normalized(c, &[0.25], Provenance::Exact, Some(2))
}

fn vertex_set() -> impl Strategy<Value = VertexCoefficients> {
    (0.1f64..10.0, prop::collection::vec(0.0f64..=1.0, 1..6), prop::option::of(2usize..8))
        .prop_map(|(c, g, cap)| VertexCoefficients::from_normalized(c, &g, Provenance::Supplied, cap).pad_submultiplicative(12))
}

fn weight() -> impl Strategy<Value = Rational> {
    (0i64..=12, 1i64..=6).prop_map(|(a, b)| ratio(a, b))
}

fn signed() -> impl Strategy<Value = Rational> {
    (-12i64..=12, 1i64..=6).prop_map(|(a, b)| ratio(a, b))
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn radius_sandwich(vc in vertex_set()) {
        let c = vc.c_beta();
        let rs = optimize_r_star(&PsiView::new(&vc, PsiMode::Upper)).unwrap();
        prop_assert!(classical_bound(c).unwrap() <= rs.r_star * (1.0 + 1e-10));
        prop_assert!(rs.r_star <= penrose_upper_bound(&[1.0, -c], 2).unwrap() * (1.0 + 1e-10));
        let ms = m_star(&vc).unwrap();
        prop_assert!(ms.m_star >= lp_classical(c) * (1.0 - 1e-9));
        prop_assert!(ms.m_star <= rs.r_star);
    }

    #[test]
    fn fixed_point_monotone_and_below_mu_star(vc in vertex_set()) {
        let psi = PsiView::new(&vc, PsiMode::Upper);
        let rs = optimize_r_star(&psi).unwrap();
        let mut prev = 0.0;
        for i in 1..=10 {
            let z = rs.r_star * i as f64 / 10.0;
            let fp = fixed_point_mu_z(z, &psi).unwrap();
            prop_assert!(fp.mu >= prev);
            prop_assert!(fp.mu <= rs.mu_star * (1.0 + 1e-6));
            prev = fp.mu;
        }
    }

    #[test]
    fn tree_sum_dual_path(g in prop::collection::vec(weight(), 8)) {
        let mut g = g;
        g.insert(0, Rational::one());
        let f = tree_sum_functional(&g, 8).unwrap();
        let d = tree_sum_degrees(&g, 8).unwrap();
        prop_assert_eq!(f.coeffs(), d.coeffs());
        prop_assert!(f.coeffs().iter().all(|c| !c.is_negative()));
        let t = t_pen1_series(&f).unwrap();
        prop_assert!(t.is_nonnegative());
        // B = Σ_m T^m
        let mut acc = Series::zero(8);
        let mut power = Series::one(8);
        for _ in 1..=8 {
            power = power.mul(&t);
            acc = acc.add(&power);
        }
        prop_assert_eq!(acc, f.series().sub(&Series::one(8)));
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(100))]

    #[test]
    fn virial_dual_path_through_beta6(b in prop::collection::vec(signed(), 5)) {
        for n in 0..=5 {
            prop_assert_eq!(virial_from_cluster_bell(&b, n).unwrap(), virial_from_cluster_lagrange(&b, n).unwrap());
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(12))]

    #[test]
    fn virial_dual_path_through_order8(b in prop::collection::vec(signed(), 8)) {
        for n in 6..=8 {
            prop_assert_eq!(virial_from_cluster_bell(&b, n).unwrap(), virial_from_cluster_lagrange(&b, n).unwrap());
        }
    }
}

#[test]
fn exponential_psi_reproduces_classical_bound() {
    for c in [0.01, 0.3, 1.0, 7.424_437, 250.0] {
        let rs = optimize_r_star(&ExponentialPsi { c }).unwrap();
        let classical = classical_bound(c).unwrap();
        assert!(((rs.r_star - classical) / classical).abs() < 1e-8, "c = {c}");
    }
}

#[test]
fn hard_rod_iteration_chain() {
    // z B(z) ≤ Π^∞ ≤ ... ≤ Π^1 ≤ μ0
    let vc = hard_rods(1.0);
    let psi = PsiView::new(&vc, PsiMode::Upper);
    let rs = optimize_r_star(&psi).unwrap();
    let g = vertex_weights(&vc, PsiMode::Upper, 30);
    let b = tree_sum_functional(&g, 30).unwrap();
    for frac in [0.2, 0.5, 0.8, 0.95] {
        let z = frac * rs.r_star;
        let mu0 = rs.mu_star;
        let seq = pi_iteration_sequence(z, &psi, mu0, 400).unwrap();
        let limit = fixed_point_mu_z(z, &psi).unwrap().mu;
        assert!(seq[0] <= mu0);
        assert!(seq.windows(2).all(|w| w[1] <= w[0]));
        assert!(seq.iter().all(|&m| m >= limit - 1e-12));
        assert!(z * b.eval(z) <= limit + 1e-12, "frac = {frac}");
        // exact tree sum: the quadratic B = 1 + zB + (zB)²/8
        let a = z * z / 8.0;
        let exact_b = ((1.0 - z) - ((1.0 - z).powi(2) - 4.0 * a).sqrt()) / (2.0 * a);
        assert!((z * exact_b - limit).abs() < 1e-9);
    }
}

#[test]
fn unit_weight_collapse_matches_classifier() {
    let ones = vec![Rational::one(); 8];
    let b = tree_sum_functional(&ones, 7).unwrap();
    let t = t_pen1_series(&b).unwrap();
    for n in 1..=7 {
        let egf = t.coeff(n) * Rational::from_integer(factorial(n));
        let expect = BigInt::from(n - 1).pow((n - 1) as u32);
        assert_eq!(egf, Rational::from_integer(expect.clone()), "n = {n}");
        if n <= 6 {
            let counted = classify_splittable(n).unwrap()[&1];
            assert_eq!(BigInt::from(counted), expect);
        }
    }
    let one = tree_sum_functional(&[Rational::one(), Rational::zero()], 1).unwrap();
    assert!(t_pen1_series(&one).unwrap().is_zero());
}

#[test]
fn m_star_below_r_star_estimate_for_hard_rods() {
    for c in [0.5, 1.0, 3.0] {
        let vc = hard_rods(c);
        let ms = m_star(&vc).unwrap();
        let g = vertex_weights(&vc, PsiMode::Upper, 14);
        let b = tree_sum_functional(&g, 14).unwrap();
        let est = r_star_virial(&b, ms.r_star).unwrap();
        assert!(ms.m_star <= est.value + 1e-12);
        assert!(ms.m_star >= lp_classical(c));
        let t1 = virial_term_bound(&b, 1, ms.r_star).unwrap();
        // |β₂|/2! = C/2
        assert!(t1.bound >= c / 2.0);
    }
}

#[test]
fn term_bound_identity_on_fine_grid() {
    let g: Vec<Rational> = vec![Rational::one(), ratio(3, 2), ratio(1, 2), ratio(1, 8), ratio(1, 40)];
    let mut g = g;
    g.resize(13, Rational::zero());
    let b = tree_sum_functional(&g, 12).unwrap();
    let tb = virial_term_bound(&b, 4, 0.02).unwrap();
    assert!(tb.identity_residual < 1e-12, "{}", tb.identity_residual);
}

#[test]
fn grt_scaling_and_lp_ordering() {
    let base = grt_bound(1.0, GRT_DEFAULT_TERMS).unwrap();
    for c in [0.5, 2.0, 7.424_437] {
        let g = grt_bound(c, GRT_DEFAULT_TERMS).unwrap();
        assert!((g.r_grt * c - base.r_grt).abs() < 1e-14);
        assert!(g.r_grt > lp_classical(c));
    }
    // the GRT series is the unit-weight unsplittable series: R_GRT·C equals M* for Ψ = e^{Cμ}
    let m1 = virial_bounds::virial::m_star_with(&ExponentialPsi { c: 1.0 }).unwrap();
    assert!((m1.m_star - base.r_grt_natural).abs() < 1e-9);
}

#[test]
fn power_law_radii_with_reference_coefficients() {
    let p = PairPotential::power_law(1.0, 1.0, 6.0, 1.0, 3).unwrap();
    let c = p.c_beta().unwrap();
    let vc = VertexCoefficients::from_normalized(c, &[0.6917, 0.3685, 0.145, 0.0627], Provenance::Supplied, None)
        .pad_submultiplicative(14);
    let rs = optimize_r_star(&PsiView::new(&vc, PsiMode::Upper)).unwrap();
    assert!((rs.r_star * c - 0.428).abs() < 1e-3, "{}", rs.r_star * c);
    let ms = m_star(&vc).unwrap();
    assert!((ms.m_star * c - 0.261_249_4).abs() / 0.261_249_4 < 0.02, "{}", ms.m_star * c);
    let b = tree_sum_functional(&vertex_weights(&vc, PsiMode::Upper, 14), 14).unwrap();
    let est = r_star_virial(&b, rs.r_star).unwrap();
    assert!(est.value >= ms.m_star);
}

#[test]
fn lambert_endpoint_is_tangency() {
    let c = 2.0;
    let fp = fixed_point_mu_z(1.0 / (E * c), &ExponentialPsi { c }).unwrap();
    assert!(fp.at_tangency);
    assert!((fp.mu * c - 1.0).abs() < 1e-5);
}
