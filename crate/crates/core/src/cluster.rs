//! Cluster-expansion radius bounds: classical bound, first correction, the
//! r*/μ* optimization, the fixed point μ_z, the Π_z iteration and Penrose
//! upper bounds.

use std::f64::consts::E;

use serde::Serialize;
use thiserror::Error;

use crate::numerics::{lambert_w0, maximize, Maximum};
use crate::potentials::{PsiMode, VertexCoefficients};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ClusterError {
    #[error("invalid input: {0}")]
    InvalidInput(String),
    #[error("|z| = {z} exceeds the domain bound {limit}")]
    OutOfDomain { z: f64, limit: f64 },
    #[error("g(2) = {g2} exceeds C^2 = {c2}")]
    InvalidG2 { g2: f64, c2: f64 },
    #[error("maximum of mu/Psi(mu) sits at the search cap {cap}")]
    NoInteriorMax { cap: f64 },
    #[error("fixed-point iteration does not converge: |z| = {z} > r* = {r_star}")]
    NoConvergence { z: f64, r_star: f64 },
    #[error("first iteration step increases: z*Psi(mu0) = {image} > mu0 = {mu0}")]
    PreconditionViolated { mu0: f64, image: f64 },
    #[error("cluster coefficient b_{0} is zero")]
    ZeroCoefficient(usize),
}

/// A vertex sum Ψ(μ) = 1 + Σ g(n) μ^n / n! with its natural scale C.
pub trait VertexSum {
    fn value(&self, mu: f64) -> f64;
    fn scale(&self) -> f64;
}

/// Ψ(μ) = e^{Cμ}, the bound obtained from g(n) ≤ C^n alone.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ExponentialPsi {
    pub c: f64,
}

impl VertexSum for ExponentialPsi {
    fn value(&self, mu: f64) -> f64 {
        (self.c * mu).exp()
    }
    fn scale(&self) -> f64 {
        self.c
    }
}

/// Ψ built from vertex coefficients in lower (point) or upper (certified) mode.
#[derive(Debug, Clone, Copy)]
pub struct PsiView<'a> {
    pub vc: &'a VertexCoefficients,
    pub mode: PsiMode,
}

impl<'a> PsiView<'a> {
    pub fn new(vc: &'a VertexCoefficients, mode: PsiMode) -> Self {
        Self { vc, mode }
    }
}

impl VertexSum for PsiView<'_> {
    fn value(&self, mu: f64) -> f64 {
        self.vc.psi(mu, self.mode)
    }
    fn scale(&self) -> f64 {
        self.vc.c_beta()
    }
}

fn check_c(c: f64) -> Result<(), ClusterError> {
    if !(c > 0.0 && c.is_finite()) {
        return Err(ClusterError::InvalidInput(format!("C must be positive, got {c}")));
    }
    Ok(())
}

/// 1/(eC).
pub fn classical_bound(c: f64) -> Result<f64, ClusterError> {
    check_c(c)?;
    Ok(1.0 / (E * c))
}

/// -W(-C|z|)/C, the pressure bound valid for |z| ≤ 1/(eC).
pub fn lambert_pressure_bound(z_abs: f64, c: f64) -> Result<f64, ClusterError> {
    check_c(c)?;
    let limit = 1.0 / (E * c);
    if !(z_abs >= 0.0) || z_abs > limit * (1.0 + 1e-14) {
        return Err(ClusterError::OutOfDomain { z: z_abs, limit });
    }
    let x = (-c * z_abs).max(-1.0 / E);
    Ok(-lambert_w0(x) / c)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct FirstCorrection {
    pub r2: f64,
    /// r2 relative to the classical bound.
    pub ratio: f64,
    pub delta: f64,
}

/// r₂ = 1/(√g2·e + (C - √g2)·sinh 1), from μ = 1/√g(2).
pub fn first_correction_bound(c: f64, g2: f64) -> Result<FirstCorrection, ClusterError> {
    check_c(c)?;
    if !(g2 > 0.0) {
        return Err(ClusterError::InvalidInput(format!("g(2) must be positive, got {g2}")));
    }
    if g2 > c * c * (1.0 + 1e-12) {
        return Err(ClusterError::InvalidG2 { g2, c2: c * c });
    }
    let s = g2.sqrt().min(c);
    let sinh1 = 1f64.sinh();
    let r2 = 1.0 / (s * E + (c - s) * sinh1);
    let delta = s / c;
    let ratio = 1.0 / (delta + (1.0 - delta) * (1.0 - (-2f64).exp()) / 2.0);
    Ok(FirstCorrection { r2, ratio, delta })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct RStar {
    pub r_star: f64,
    pub mu_star: f64,
    pub evaluations: usize,
    /// Search cap used for μ.
    pub mu_cap: f64,
}

/// r* = max_μ μ/Ψ(μ) and its maximizer μ*. The search runs on [0, 10/C]
/// and is retried once on [0, 100/C] when the maximum sits at the cap.
pub fn optimize_r_star(psi: &dyn VertexSum) -> Result<RStar, ClusterError> {
    let c = psi.scale();
    check_c(c)?;
    let mut evaluations = 0;
    for cap in [10.0 / c, 100.0 / c] {
        let m: Maximum = maximize(|mu| mu / psi.value(mu), cap);
        evaluations += m.evaluations;
        if !m.at_cap {
            return Ok(RStar { r_star: m.value, mu_star: m.argmax, evaluations, mu_cap: cap });
        }
    }
    Err(ClusterError::NoInteriorMax { cap: 100.0 / c })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct FixedPoint {
    /// Smallest solution of μ = |z| Ψ(μ).
    pub mu: f64,
    /// Limit of the decreasing iteration from μ*.
    pub mu_descending: f64,
    pub iterations: usize,
    pub bisection: bool,
    /// |z| equals r* to rounding: the fixed point is the tangency μ*.
    pub at_tangency: bool,
}

const FIXED_POINT_TOL: f64 = 1e-12;
const MAX_ITERATIONS: usize = 1_000_000;

/// Smallest fixed point of μ ↦ |z|Ψ(μ), squeezed between the increasing
/// iteration from 0 and the decreasing iteration from μ*.
pub fn fixed_point_mu_z(z_abs: f64, psi: &dyn VertexSum) -> Result<FixedPoint, ClusterError> {
    if !(z_abs >= 0.0) {
        return Err(ClusterError::InvalidInput(format!("|z| must be nonnegative, got {z_abs}")));
    }
    if z_abs == 0.0 {
        return Ok(FixedPoint { mu: 0.0, mu_descending: 0.0, iterations: 0, bisection: false, at_tangency: false });
    }
    let rs = optimize_r_star(psi)?;
    if z_abs > rs.r_star * (1.0 + 1e-12) {
        return Err(ClusterError::NoConvergence { z: z_abs, r_star: rs.r_star });
    }
    let at_tangency = z_abs >= rs.r_star * (1.0 - 1e-12);
    let tol = FIXED_POINT_TOL / psi.scale();
    let step = |mu: f64| z_abs * psi.value(mu);
    let mut asc = 0.0;
    let mut desc = rs.mu_star;
    let mut iterations = 0;
    while iterations < MAX_ITERATIONS {
        iterations += 1;
        let a = step(asc);
        let d = step(desc).max(a);
        let done = (a - asc).abs() < tol && (d - a) < tol;
        asc = a;
        desc = d;
        if done || d - a < tol {
            return Ok(FixedPoint { mu: asc, mu_descending: desc, iterations, bisection: false, at_tangency });
        }
    }
    // h(μ) = |z|Ψ(μ) - μ is convex, ≥ 0 at asc and ≤ 0 at desc
    let (mut lo, mut hi) = (asc, desc);
    while hi - lo > tol {
        let mid = 0.5 * (lo + hi);
        if step(mid) - mid >= 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok(FixedPoint { mu: lo, mu_descending: hi, iterations, bisection: true, at_tangency })
}

/// Π_z^1(μ0), ..., Π_z^k(μ0) with Π_z(μ) = |z|Ψ(μ).
pub fn pi_iteration_sequence(z_abs: f64, psi: &dyn VertexSum, mu0: f64, k: usize) -> Result<Vec<f64>, ClusterError> {
    let first = z_abs * psi.value(mu0);
    if first > mu0 + FIXED_POINT_TOL * mu0.max(1.0 / psi.scale()) {
        return Err(ClusterError::PreconditionViolated { mu0, image: first });
    }
    let mut out = Vec::with_capacity(k);
    let mut mu = mu0;
    for _ in 0..k {
        mu = z_abs * psi.value(mu);
        out.push(mu);
    }
    Ok(out)
}

/// Upper bound on the cluster radius from the single coefficient b_n
/// (`b[i]` is b_{i+1}): [n/((n-1)|b_n|/n!)]^{1/(n-1)}, and 1/|b_2| for n = 2.
pub fn penrose_upper_bound(b: &[f64], n: usize) -> Result<f64, ClusterError> {
    if n < 2 || n > b.len() {
        return Err(ClusterError::InvalidInput(format!("need 2 <= n <= {}, got {n}", b.len())));
    }
    let bn = b[n - 1].abs();
    if bn == 0.0 {
        return Err(ClusterError::ZeroCoefficient(n));
    }
    if n == 2 {
        return Ok(1.0 / bn);
    }
    let fact: f64 = (1..=n).map(|k| k as f64).product();
    let nf = n as f64;
    Ok((nf / ((nf - 1.0) * bn / fact)).powf(1.0 / (nf - 1.0)))
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PenroseUpper {
    pub n: usize,
    pub radius: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ClusterMetadata {
    pub truncation: usize,
    pub psi_mode: PsiMode,
    pub optimizer_evaluations: usize,
    /// True when a queried |z| equals r* (endpoint of the admissible range).
    pub endpoint: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MuZ {
    pub z: f64,
    pub mu: f64,
    pub iterations: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ClusterReport {
    pub c_beta: f64,
    pub r_classical: f64,
    /// Certified lower bound on the cluster radius (Ψ upper bound).
    pub r_star: f64,
    pub mu_star: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub r_star_estimate: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub mu_star_estimate: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub r_first_correction: Option<FirstCorrection>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub mu_z: Option<MuZ>,
    pub penrose_upper: Vec<PenroseUpper>,
    pub metadata: ClusterMetadata,
}

/// All cluster bounds for one set of vertex coefficients. Estimates (Ψ from
/// point values) are included only when `with_estimates` is set.
pub fn cluster_report(vc: &VertexCoefficients, z: Option<f64>, with_estimates: bool) -> Result<ClusterReport, ClusterError> {
    let c = vc.c_beta();
    let upper = PsiView::new(vc, PsiMode::Upper);
    let certified = optimize_r_star(&upper)?;
    let mut evaluations = certified.evaluations;
    let (r_est, mu_est) = if with_estimates {
        let est = optimize_r_star(&PsiView::new(vc, PsiMode::Lower))?;
        evaluations += est.evaluations;
        (Some(est.r_star), Some(est.mu_star))
    } else {
        (None, None)
    };
    let first = if vc.order() >= 2 && vc.upper(2) > 0.0 {
        Some(first_correction_bound(c, vc.upper(2).min(c * c))?)
    } else {
        None
    };
    let mut endpoint = false;
    let mu_z = match z {
        Some(z) => {
            let fp = fixed_point_mu_z(z, &upper)?;
            endpoint = fp.at_tangency;
            Some(MuZ { z, mu: fp.mu, iterations: fp.iterations })
        }
        None => None,
    };
    Ok(ClusterReport {
        c_beta: c,
        r_classical: classical_bound(c)?,
        r_star: certified.r_star,
        mu_star: certified.mu_star,
        r_star_estimate: r_est,
        mu_star_estimate: mu_est,
        r_first_correction: first,
        mu_z,
        penrose_upper: vec![PenroseUpper { n: 2, radius: 1.0 / c }],
        metadata: ClusterMetadata { truncation: vc.order(), psi_mode: PsiMode::Upper, optimizer_evaluations: evaluations, endpoint },
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::potentials::Provenance;

    fn hard_rods(c: f64) -> VertexCoefficients {
        VertexCoefficients::from_normalized(c, &[0.25], Provenance::Exact, Some(2))
    }

    #[test]
    fn classical_examples() {
        assert!((classical_bound(1.0).unwrap() - 0.367_879).abs() < 1e-6);
        assert!((classical_bound(2.0).unwrap() - 0.183_939_7).abs() < 1e-7);
        assert!(classical_bound(0.0).is_err());
        let rs = optimize_r_star(&ExponentialPsi { c: 1.7 }).unwrap();
        assert!((rs.r_star - classical_bound(1.7).unwrap()).abs() < 1e-9);
        assert!((rs.mu_star * 1.7 - 1.0).abs() < 1e-6);
    }

    #[test]
    fn lambert_examples() {
        assert_eq!(lambert_pressure_bound(0.0, 1.0).unwrap(), 0.0);
        let c = 2.5;
        let end = lambert_pressure_bound(1.0 / (E * c), c).unwrap();
        assert!((end - 1.0 / c).abs() < 1e-7);
        assert!(matches!(lambert_pressure_bound(0.5, 1.0), Err(ClusterError::OutOfDomain { .. })));
        let z = 0.2;
        let fp = fixed_point_mu_z(z, &ExponentialPsi { c: 1.0 }).unwrap();
        assert!((fp.mu - lambert_pressure_bound(z, 1.0).unwrap()).abs() < 1e-10);
    }

    #[test]
    fn first_correction_examples() {
        let f = first_correction_bound(1.0, 1.0).unwrap();
        assert!((f.ratio - 1.0).abs() < 1e-15);
        assert!((f.r2 - classical_bound(1.0).unwrap()).abs() < 1e-15);
        let pi = std::f64::consts::PI;
        let delta = 3f64.powf(0.75) / (2.0 * pi.sqrt());
        let f = first_correction_bound(1.0, delta * delta).unwrap();
        assert!((f.ratio - 1.25).abs() < 0.01, "{}", f.ratio);
        assert!((f.r2 / classical_bound(1.0).unwrap() - f.ratio).abs() < 1e-12);
        let f = first_correction_bound(1.0, 1e-20).unwrap();
        assert!((f.r2 - 1.0 / 1f64.sinh()).abs() < 1e-9);
        assert!(matches!(first_correction_bound(1.0, 1.5), Err(ClusterError::InvalidG2 { .. })));
    }

    #[test]
    fn hard_rods_r_star() {
        let vc = hard_rods(1.0);
        let rs = optimize_r_star(&PsiView::new(&vc, PsiMode::Upper)).unwrap();
        let exact = 2f64.sqrt() / (1.0 + 2f64.sqrt());
        assert!((rs.r_star - exact).abs() < 1e-12);
        assert!((rs.mu_star - 8f64.sqrt()).abs() < 1e-6);
    }

    #[test]
    fn hard_disks_with_printed_coefficients() {
        let pi = std::f64::consts::PI;
        let vc = VertexCoefficients::from_normalized(
            1.0,
            &[3.0 * 3f64.sqrt() / (4.0 * pi), 0.0589, 0.00013, 0.0001],
            Provenance::Supplied,
            Some(5),
        );
        let rs = optimize_r_star(&PsiView::new(&vc, PsiMode::Upper)).unwrap();
        // independent evaluation: 0.5120873828 at alpha = 2.0145829
        assert!((rs.r_star - 0.512_087_382_8).abs() < 1e-9, "{}", rs.r_star);
        assert!((rs.mu_star - 2.014_58).abs() < 1e-4);
    }

    #[test]
    fn fixed_point_examples() {
        let exp = ExponentialPsi { c: 1.0 };
        assert_eq!(fixed_point_mu_z(0.0, &exp).unwrap().mu, 0.0);
        let fp = fixed_point_mu_z(1.0 / E, &exp).unwrap();
        assert!((fp.mu - 1.0).abs() < 1e-5, "{fp:?}");
        assert!(fp.at_tangency);
        let vc = hard_rods(1.0);
        let up = PsiView::new(&vc, PsiMode::Upper);
        let rs = optimize_r_star(&up).unwrap();
        let fp = fixed_point_mu_z(rs.r_star, &up).unwrap();
        assert!((fp.mu - 8f64.sqrt()).abs() < 1e-5, "{fp:?}");
        assert!(matches!(fixed_point_mu_z(0.6, &up), Err(ClusterError::NoConvergence { .. })));
    }

    #[test]
    fn fixed_point_matches_quadratic_root_for_hard_rods() {
        // μ = z(1 + μ + μ²/8): smallest root of (z/8)μ² + (z-1)μ + z = 0
        let vc = hard_rods(1.0);
        let up = PsiView::new(&vc, PsiMode::Upper);
        for z in [0.05f64, 0.2, 0.4, 0.55] {
            let a = z / 8.0;
            let b = z - 1.0;
            let exact = (-b - (b * b - 4.0 * a * z).sqrt()) / (2.0 * a);
            let fp = fixed_point_mu_z(z, &up).unwrap();
            assert!((fp.mu - exact).abs() < 1e-10, "z = {z}");
            assert!((fp.mu_descending - exact).abs() < 1e-10);
        }
    }

    #[test]
    fn pi_iteration_examples() {
        let vc = hard_rods(1.0);
        let up = PsiView::new(&vc, PsiMode::Upper);
        let z = 0.4;
        let fp = fixed_point_mu_z(z, &up).unwrap();
        let constant = pi_iteration_sequence(z, &up, fp.mu, 5).unwrap();
        assert!(constant.iter().all(|&m| (m - fp.mu).abs() < 1e-12));
        let rs = optimize_r_star(&up).unwrap();
        let seq = pi_iteration_sequence(z, &up, rs.mu_star, 200).unwrap();
        assert!(seq.windows(2).all(|w| w[1] <= w[0]));
        assert!(seq[1] < seq[0]);
        assert!((seq.last().unwrap() - fp.mu).abs() < 1e-10);
        assert!(matches!(
            pi_iteration_sequence(z, &up, 0.0, 3),
            Err(ClusterError::PreconditionViolated { .. })
        ));
    }

    #[test]
    fn penrose_upper_examples() {
        assert_eq!(penrose_upper_bound(&[1.0, -1.0], 2).unwrap(), 1.0);
        assert_eq!(penrose_upper_bound(&[1.0, -2.0], 2).unwrap(), 0.5);
        assert!(matches!(penrose_upper_bound(&[1.0, 0.0], 2), Err(ClusterError::ZeroCoefficient(2))));
        // hard rods, C = 1 (a = 1/2): b_n = (-n)^{n-1} a^{n-1}
        let a = 0.5f64;
        let b: Vec<f64> = (1..=20).map(|n: i32| (-(n as f64)).powi(n - 1) * a.powi(n - 1)).collect();
        let vc = hard_rods(1.0);
        let rs = optimize_r_star(&PsiView::new(&vc, PsiMode::Upper)).unwrap();
        for n in 2..=20 {
            assert!(penrose_upper_bound(&b, n).unwrap() >= rs.r_star, "n = {n}");
        }
    }

    #[test]
    fn report_sandwich() {
        let vc = hard_rods(1.0);
        let rep = cluster_report(&vc, Some(0.3), true).unwrap();
        assert!(rep.r_classical <= rep.r_star && rep.r_star <= rep.penrose_upper[0].radius);
        assert!(rep.mu_z.as_ref().unwrap().mu <= rep.mu_star);
        let rep = cluster_report(&vc, None, false).unwrap();
        assert!(rep.r_star_estimate.is_none());
    }
}
