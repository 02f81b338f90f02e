//! Repulsive pair potentials, the temperedness constant C(β), and the vertex
//! integrals g(n).

mod config;
mod monte_carlo;
mod sampler;
mod vertex;

pub use config::{load_potential_file, parse_potential_toml, read_radial_table, PotentialConfig, PotentialParameters};
pub use monte_carlo::{g_monte_carlo, g_monte_carlo_par, McEstimate, MC_STREAMS};
pub use sampler::RadialSampler;
pub use vertex::{
    compute_vertex_coefficients, psi, McSettings, Provenance, PsiBounds, PsiMode, VertexCoefficients,
    VertexEntry,
};

use std::f64::consts::PI;

use serde::Serialize;
use thiserror::Error;

use crate::numerics::integrate;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum PotentialError {
    #[error("potential is not tempered: exponent {exponent} must exceed dimension {dim}")]
    NotTempered { exponent: f64, dim: usize },
    #[error("no closed form for g({0})")]
    Unavailable(usize),
    #[error("Mayer function vanishes identically, nothing to sample")]
    DegenerateSampler,
    #[error("invalid potential: {0}")]
    Invalid(String),
    #[error("configuration error: {0}")]
    Config(String),
}

/// Radial table (r_i, φ(r_i)), linearly interpolated. Below the first node
/// φ is held at its first value, beyond the last node it vanishes.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RadialTable {
    r: Vec<f64>,
    phi: Vec<f64>,
}

impl RadialTable {
    pub fn new(r: Vec<f64>, phi: Vec<f64>) -> Result<Self, PotentialError> {
        if r.len() != phi.len() || r.len() < 2 {
            return Err(PotentialError::Invalid("table needs at least two (r, phi) rows".into()));
        }
        if r[0] < 0.0 || r.windows(2).any(|w| w[1] <= w[0]) {
            return Err(PotentialError::Invalid("radii must be nonnegative and increasing".into()));
        }
        if phi.iter().any(|&p| p.is_nan() || p < 0.0) {
            return Err(PotentialError::Invalid("phi must be nonnegative".into()));
        }
        Ok(Self { r, phi })
    }

    pub fn nodes(&self) -> &[f64] {
        &self.r
    }

    pub fn values(&self) -> &[f64] {
        &self.phi
    }

    /// An interval with an infinite endpoint is treated as hard core throughout.
    pub fn eval(&self, x: f64) -> f64 {
        let n = self.r.len();
        if x <= self.r[0] {
            return self.phi[0];
        }
        if x > self.r[n - 1] {
            return 0.0;
        }
        let i = self.r.partition_point(|&ri| ri < x).max(1) - 1;
        let (r0, r1, p0, p1) = (self.r[i], self.r[i + 1], self.phi[i], self.phi[i + 1]);
        if p0.is_infinite() || p1.is_infinite() {
            return f64::INFINITY;
        }
        p0 + (p1 - p0) * (x - r0) / (r1 - r0)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum PotentialKind {
    HardSphere { radius: f64 },
    PowerLaw { epsilon: f64, sigma: f64, exponent: f64 },
    Tabulated { table: RadialTable },
    Ideal,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PairPotential {
    pub kind: PotentialKind,
    pub beta: f64,
    pub dim: usize,
}

/// Volume of the d-dimensional ball of radius a.
pub fn ball_volume(d: usize, a: f64) -> f64 {
    unit_ball_volume(d) * a.powi(d as i32)
}

fn unit_ball_volume(d: usize) -> f64 {
    // V_d = (2π/d) V_{d-2}
    let mut v = if d.is_multiple_of(2) { 1.0 } else { 2.0 };
    let mut k = d % 2;
    while k < d {
        k += 2;
        v *= 2.0 * PI / k as f64;
    }
    v
}

/// Surface area of the unit sphere S^{d-1}.
pub fn sphere_area(d: usize) -> f64 {
    d as f64 * unit_ball_volume(d)
}

fn check_common(beta: f64, dim: usize) -> Result<(), PotentialError> {
    if dim == 0 {
        return Err(PotentialError::Invalid("dimension must be at least 1".into()));
    }
    if !(beta > 0.0 && beta.is_finite()) {
        return Err(PotentialError::Invalid("beta must be positive".into()));
    }
    Ok(())
}

impl PairPotential {
    /// φ = +∞ for |x - y| ≤ radius, 0 beyond.
    pub fn hard_sphere(radius: f64, dim: usize) -> Result<Self, PotentialError> {
        check_common(1.0, dim)?;
        if !(radius > 0.0 && radius.is_finite()) {
            return Err(PotentialError::Invalid("radius must be positive".into()));
        }
        Ok(Self { kind: PotentialKind::HardSphere { radius }, beta: 1.0, dim })
    }

    /// φ(r) = ε (σ/r)^n.
    pub fn power_law(epsilon: f64, sigma: f64, exponent: f64, beta: f64, dim: usize) -> Result<Self, PotentialError> {
        check_common(beta, dim)?;
        if !(epsilon > 0.0 && sigma > 0.0 && exponent > 0.0) {
            return Err(PotentialError::Invalid("epsilon, sigma and exponent must be positive".into()));
        }
        if exponent <= dim as f64 {
            return Err(PotentialError::NotTempered { exponent, dim });
        }
        Ok(Self { kind: PotentialKind::PowerLaw { epsilon, sigma, exponent }, beta, dim })
    }

    pub fn tabulated(table: RadialTable, beta: f64, dim: usize) -> Result<Self, PotentialError> {
        check_common(beta, dim)?;
        Ok(Self { kind: PotentialKind::Tabulated { table }, beta, dim })
    }

    pub fn ideal(dim: usize) -> Result<Self, PotentialError> {
        check_common(1.0, dim)?;
        Ok(Self { kind: PotentialKind::Ideal, beta: 1.0, dim })
    }

    pub fn phi(&self, r: f64) -> f64 {
        match &self.kind {
            PotentialKind::HardSphere { radius } => {
                if r <= *radius {
                    f64::INFINITY
                } else {
                    0.0
                }
            }
            PotentialKind::PowerLaw { epsilon, sigma, exponent } => epsilon * (sigma / r).powf(*exponent),
            PotentialKind::Tabulated { table } => table.eval(r),
            PotentialKind::Ideal => 0.0,
        }
    }

    /// Boltzmann factor e^{-βφ(r)}.
    pub fn boltzmann(&self, r: f64) -> f64 {
        (-self.beta * self.phi(r)).exp()
    }

    /// |Mayer function| = 1 - e^{-βφ(r)}.
    pub fn mayer_magnitude(&self, r: f64) -> f64 {
        -(-self.beta * self.phi(r)).exp_m1()
    }

    /// Hard-sphere radius, if this is a hard-sphere potential.
    pub fn hard_radius(&self) -> Option<f64> {
        match self.kind {
            PotentialKind::HardSphere { radius } => Some(radius),
            _ => None,
        }
    }

    /// C(β) = ∫ |e^{-βφ} - 1| dx, closed form when available, else quadrature.
    pub fn c_beta(&self) -> Result<f64, PotentialError> {
        match self.c_beta_closed_form() {
            Some(c) => Ok(c),
            None => self.c_beta_quadrature(),
        }
    }

    pub fn c_beta_closed_form(&self) -> Option<f64> {
        let d = self.dim;
        match &self.kind {
            PotentialKind::HardSphere { radius } => Some(ball_volume(d, *radius)),
            PotentialKind::PowerLaw { epsilon, sigma, exponent } => {
                let c = self.beta * epsilon * sigma.powf(*exponent);
                let df = d as f64;
                Some(sphere_area(d) * c.powf(df / exponent) * libm::tgamma(1.0 - df / exponent) / df)
            }
            PotentialKind::Ideal => Some(0.0),
            PotentialKind::Tabulated { .. } => None,
        }
    }

    /// Radial quadrature S_{d-1} ∫ f(r) r^{d-1} dr.
    pub fn c_beta_quadrature(&self) -> Result<f64, PotentialError> {
        let d = self.dim as i32;
        let area = sphere_area(self.dim);
        let tol = 1e-13;
        let radial = match &self.kind {
            PotentialKind::HardSphere { radius } => {
                integrate(|r| r.powi(d - 1), 0.0, *radius, tol, tol).value
            }
            PotentialKind::PowerLaw { epsilon, sigma, exponent } => {
                // r = s·c^{1/n}; inner part on [0,1], tail through s = 1/u
                let c = self.beta * epsilon * sigma.powf(*exponent);
                let scale = c.powf(1.0 / exponent);
                let n = *exponent;
                let f = |s: f64| -(-(s.powf(-n))).exp_m1();
                let inner = integrate(|s| f(s) * s.powi(d - 1), 0.0, 1.0, tol, tol).value;
                let tail = integrate(
                    |u| if u == 0.0 { 0.0 } else { f(1.0 / u) * u.powi(-d - 1) },
                    0.0,
                    1.0,
                    tol,
                    tol,
                )
                .value;
                if !(n > d as f64) {
                    return Err(PotentialError::NotTempered { exponent: n, dim: self.dim });
                }
                scale.powi(d) * (inner + tail)
            }
            PotentialKind::Tabulated { table } => {
                let nodes = table.nodes();
                let mut total = self.mayer_magnitude(nodes[0]) * nodes[0].powi(d) / d as f64;
                for w in nodes.windows(2) {
                    total += integrate(|r| self.mayer_magnitude(r) * r.powi(d - 1), w[0], w[1], tol, tol).value;
                }
                total
            }
            PotentialKind::Ideal => 0.0,
        };
        Ok(area * radial)
    }

    /// Closed-form g(n) where known: g(1) = C for every potential, and
    /// g(2) for hard spheres in d = 1, 2, 3.
    pub fn g_exact(&self, n: usize) -> Result<f64, PotentialError> {
        let c = self.c_beta()?;
        if n == 1 {
            return Ok(c);
        }
        if let PotentialKind::HardSphere { .. } = self.kind {
            let normalized = match (self.dim, n) {
                (1, 2) => Some(0.25),
                (1, _) => Some(0.0),
                (2, 2) => Some(3.0 * 3f64.sqrt() / (4.0 * PI)),
                (3, 2) => Some(17.0 / 32.0),
                _ => None,
            };
            if let Some(g) = normalized {
                return Ok(g * c.powi(n as i32));
            }
        }
        if let PotentialKind::Ideal = self.kind {
            return Ok(0.0);
        }
        Err(PotentialError::Unavailable(n))
    }

    /// g(n) = 0 beyond this order (hard spheres in d ≤ 3).
    pub fn degree_cap(&self) -> Option<usize> {
        match (&self.kind, self.dim) {
            (PotentialKind::HardSphere { .. }, 1) => Some(2),
            (PotentialKind::HardSphere { .. }, 2) => Some(5),
            (PotentialKind::HardSphere { .. }, 3) => Some(12),
            (PotentialKind::Ideal, _) => Some(0),
            _ => None,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn hard_sphere_c_beta() {
        let a = 0.7;
        let p = PairPotential::hard_sphere(a, 1).unwrap();
        assert!((p.c_beta().unwrap() - 2.0 * a).abs() < 1e-15);
        let p = PairPotential::hard_sphere(a, 3).unwrap();
        assert!((p.c_beta().unwrap() - 4.0 / 3.0 * PI * a.powi(3)).abs() < 1e-14);
        for d in 1..=4 {
            let p = PairPotential::hard_sphere(1.3, d).unwrap();
            let q = p.c_beta_quadrature().unwrap();
            assert!((q - p.c_beta().unwrap()).abs() < 1e-12, "d = {d}");
        }
    }

    #[test]
    fn power_law_c_beta_closed_and_quadrature() {
        let p = PairPotential::power_law(1.0, 1.0, 6.0, 1.0, 3).unwrap();
        let closed = p.c_beta_closed_form().unwrap();
        assert!((closed - 4.0 * PI * PI.sqrt() / 3.0).abs() < 1e-12);
        let quad = p.c_beta_quadrature().unwrap();
        assert!((quad - closed).abs() < 1e-9, "{quad} vs {closed}");
        let p = PairPotential::power_law(2.0, 0.8, 9.0, 0.5, 2).unwrap();
        let closed = p.c_beta_closed_form().unwrap();
        assert!((p.c_beta_quadrature().unwrap() - closed).abs() < 1e-9 * closed);
    }

    #[test]
    fn table_one_constants() {
        // 4π/3 Γ(1 - 3/n)
        let expected = [15.186_92, 9.291_40, 7.424_44, 6.528_57, 6.008_90];
        for (i, n) in (4..=8).enumerate() {
            let p = PairPotential::power_law(1.0, 1.0, n as f64, 1.0, 3).unwrap();
            assert!((p.c_beta().unwrap() - expected[i]).abs() < 1e-4, "n = {n}");
        }
    }

    #[test]
    fn not_tempered() {
        assert_eq!(
            PairPotential::power_law(1.0, 1.0, 3.0, 1.0, 3),
            Err(PotentialError::NotTempered { exponent: 3.0, dim: 3 })
        );
    }

    #[test]
    fn exact_coefficients() {
        let p = PairPotential::hard_sphere(0.5, 1).unwrap();
        assert_eq!(p.g_exact(1).unwrap(), 1.0);
        assert_eq!(p.g_exact(2).unwrap(), 0.25);
        assert_eq!(p.g_exact(3).unwrap(), 0.0);
        let q = PairPotential::power_law(1.0, 1.0, 6.0, 1.0, 3).unwrap();
        assert_eq!(q.g_exact(1).unwrap(), q.c_beta().unwrap());
        assert_eq!(q.g_exact(2), Err(PotentialError::Unavailable(2)));
    }

    #[test]
    fn tabulated_matches_hard_core_step() {
        let t = RadialTable::new(vec![0.0, 1.0, 1.0 + 1e-12], vec![f64::INFINITY, f64::INFINITY, 0.0]).unwrap();
        let p = PairPotential::tabulated(t, 1.0, 3).unwrap();
        let c = p.c_beta().unwrap();
        assert!((c - ball_volume(3, 1.0)).abs() < 1e-9);
    }

    #[test]
    fn tabulated_linear_ramp() {
        // φ from 1 to 0 on [0, 1]
        let t = RadialTable::new(vec![0.0, 1.0], vec![1.0, 0.0]).unwrap();
        let p = PairPotential::tabulated(t, 1.0, 1).unwrap();
        // 2∫_0^1 (1 - e^{-(1-r)}) dr = 2(1 - (1 - 1/e)) = 2/e
        assert!((p.c_beta().unwrap() - 2.0 / std::f64::consts::E).abs() < 1e-12);
    }
}
