//! Virial-side bounds: tree sums, the unsplittable-tree series T^{Pen,1},
//! virial coefficients from cluster coefficients, the GRT bound, M* and R*.

use num_bigint::BigInt;
use num_traits::{One, Zero};
use serde::Serialize;
use thiserror::Error;

use crate::cluster::{optimize_r_star, ClusterError, PsiView};
use crate::formal_series::{
    bell_exponential, factorial, generalized_binomial, rat, rational_to_f64, f64_to_rational, Rational, Series,
    SeriesError,
};
use crate::numerics::maximize;
use crate::potentials::{PairPotential, PotentialError, PsiMode, VertexCoefficients};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum VirialError {
    #[error("need {needed} cluster coefficients, got {got}")]
    InsufficientCoefficients { needed: usize, got: usize },
    #[error("degree-sum tree sum limited to order {limit}, got {n}")]
    TooLarge { n: usize, limit: usize },
    #[error("series tail bound {tail:e} exceeds tolerance {tol:e}; use more terms")]
    TruncationInsufficient { tail: f64, tol: f64 },
    #[error("search interval is empty (r_cap = {0})")]
    DomainEmpty(f64),
    #[error("invalid input: {0}")]
    InvalidInput(String),
    #[error(transparent)]
    Cluster(#[from] ClusterError),
    #[error(transparent)]
    Series(#[from] SeriesError),
    #[error(transparent)]
    Potential(#[from] PotentialError),
}

pub const DEGREE_SUM_MAX: usize = 10;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum TreeSumSource {
    FunctionalEquation,
    DegreeSum,
}

/// B(r) = Σ B̄_n r^n / n!, stored by ordinary coefficients B̄_n / n!.
#[derive(Debug, Clone, PartialEq)]
pub struct TreeSum {
    coeffs: Vec<Rational>,
    values: Vec<f64>,
    source: TreeSumSource,
}

impl TreeSum {
    fn new(coeffs: Vec<Rational>, source: TreeSumSource) -> Self {
        let values = coeffs.iter().map(rational_to_f64).collect();
        Self { coeffs, values, source }
    }

    pub fn order(&self) -> usize {
        self.coeffs.len() - 1
    }

    pub fn source(&self) -> TreeSumSource {
        self.source
    }

    /// B̄_n / n!.
    pub fn coeff(&self, n: usize) -> &Rational {
        &self.coeffs[n]
    }

    pub fn coeffs(&self) -> &[Rational] {
        &self.coeffs
    }

    /// B̄_n.
    pub fn bar(&self, n: usize) -> Rational {
        &self.coeffs[n] * Rational::from_integer(factorial(n))
    }

    pub fn series(&self) -> Series {
        Series::new(self.coeffs.clone())
    }

    /// Truncated B(r).
    pub fn eval(&self, r: f64) -> f64 {
        self.values.iter().rev().fold(0.0, |acc, &c| acc * r + c)
    }
}

/// g(0..=order) as exact rationals in the given mode (g(0) = 1).
pub fn vertex_weights(vc: &VertexCoefficients, mode: PsiMode, order: usize) -> Vec<Rational> {
    (0..=order)
        .map(|n| {
            let v = match mode {
                PsiMode::Lower => vc.point(n),
                PsiMode::Upper => vc.upper(n),
            };
            f64_to_rational(v)
        })
        .collect()
}

fn check_weights(g: &[Rational], order: usize) -> Result<(), VirialError> {
    if g.len() < order + 1 {
        return Err(VirialError::InsufficientCoefficients { needed: order + 1, got: g.len() });
    }
    if !g[0].is_one() {
        return Err(VirialError::InvalidInput("g(0) must be 1".into()));
    }
    Ok(())
}

/// Solves B = Ψ(r·B) order by order; `g[k]` is g(k).
pub fn tree_sum_functional(g: &[Rational], order: usize) -> Result<TreeSum, VirialError> {
    check_weights(g, order)?;
    let psi = Series::new((0..=order).map(|k| &g[k] / Rational::from_integer(factorial(k))).collect());
    let mut b = Series::one(order);
    for _ in 0..order {
        let inner = b.shift_up().truncate(order);
        b = psi.compose(&inner)?;
    }
    Ok(TreeSum::new(b.into_coeffs(), TreeSumSource::FunctionalEquation))
}

/// Partitions of `m` into at most `parts` positive parts, largest first.
fn partitions(m: usize, parts: usize, max: usize, cur: &mut Vec<usize>, f: &mut dyn FnMut(&[usize])) {
    if m == 0 {
        f(cur);
        return;
    }
    if parts == 0 {
        return;
    }
    for p in (1..=m.min(max)).rev() {
        cur.push(p);
        partitions(m - p, parts - 1, p, cur, f);
        cur.pop();
    }
}

/// B̄_n as a sum over degree sequences (d₀ ≥ 1, d_i ≥ 1, Σd = 2n) of
/// (n-1)!/Π(d_i - 1)! · g(d₀) · Π g(d_i - 1).
pub fn tree_sum_degrees(g: &[Rational], order: usize) -> Result<TreeSum, VirialError> {
    if order > DEGREE_SUM_MAX {
        return Err(VirialError::TooLarge { n: order, limit: DEGREE_SUM_MAX });
    }
    check_weights(g, order)?;
    let fact: Vec<Rational> = (0..=order + 1).map(|k| Rational::from_integer(factorial(k))).collect();
    let mut coeffs = vec![Rational::one()];
    for n in 1..=order {
        let mut bar = Rational::zero();
        // e_i = d_i - 1 for i ≥ 1 and e_0 = d_0 - 1; Σ e = n - 1
        for e0 in 0..n {
            let root = &g[e0 + 1] / &fact[e0];
            if root.is_zero() {
                continue;
            }
            partitions(n - 1 - e0, n, n, &mut Vec::new(), &mut |parts| {
                let mut term = root.clone();
                let mut mults: Vec<usize> = Vec::new();
                let mut last = 0;
                for &p in parts {
                    term *= &g[p] / &fact[p];
                    if p == last {
                        *mults.last_mut().expect("run") += 1;
                    } else {
                        mults.push(1);
                        last = p;
                    }
                }
                mults.push(n - parts.len());
                let arrangements = mults.iter().fold(fact[n].clone(), |acc, &m| acc / &fact[m]);
                bar += term * arrangements;
            });
        }
        bar *= &fact[n - 1];
        coeffs.push(bar / &fact[n]);
    }
    Ok(TreeSum::new(coeffs, TreeSumSource::DegreeSum))
}

/// T^{Pen,1} = 1 - 1/B, truncated at the order of B.
pub fn t_pen1_series(b: &TreeSum) -> Result<Series, VirialError> {
    let s = b.series();
    if !s.coeff(0).is_one() {
        return Err(VirialError::InvalidInput("B(0) must be 1".into()));
    }
    Ok(Series::one(s.order()).sub(&s.mul_inverse()?))
}

fn check_cluster_coeffs(b: &[Rational], n: usize) -> Result<(), VirialError> {
    if b.len() < n {
        return Err(VirialError::InsufficientCoefficients { needed: n, got: b.len() });
    }
    Ok(())
}

/// β_{n+1} = Σ_k binom(-n, k) k! B_{n,k}(b₂, b₃, ...), with `b[0] = b₂`.
pub fn virial_from_cluster_bell(b: &[Rational], n: usize) -> Result<Rational, VirialError> {
    if n == 0 {
        return Ok(Rational::one());
    }
    check_cluster_coeffs(b, n)?;
    let minus_n = rat(-(n as i64));
    let mut total = Rational::zero();
    for k in 1..=n {
        let coeff = generalized_binomial(&minus_n, k) * Rational::from_integer(factorial(k));
        total += coeff * bell_exponential(n, k, &b[..n])?;
    }
    Ok(total)
}

/// β_{n+1} = (n+1)!/(n+1) · [X^n] (b̂')^{-n}, with b̂(X) = X + Σ b_k X^k/k! and `b[0] = b₂`.
pub fn virial_from_cluster_lagrange(b: &[Rational], n: usize) -> Result<Rational, VirialError> {
    if n == 0 {
        return Ok(Rational::one());
    }
    check_cluster_coeffs(b, n)?;
    // b̂'(X) = 1 + Σ_{k≥2} b_k X^{k-1}/(k-1)!
    let mut d = vec![Rational::one()];
    for k in 2..=n + 1 {
        d.push(&b[k - 2] / Rational::from_integer(factorial(k - 1)));
    }
    let p = Series::new(d).real_power(&rat(-(n as i64)))?;
    Ok(p.coeff(n) * Rational::from_integer(factorial(n)))
}

/// β₁..β_{n_max+1} by the Bell route.
pub fn virial_coefficients(b: &[Rational], n_max: usize) -> Result<Vec<Rational>, VirialError> {
    (0..=n_max).map(|n| virial_from_cluster_bell(b, n)).collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct GrtBound {
    pub r_hat: f64,
    pub t1_at_r_hat: f64,
    /// R_GRT·C.
    pub r_grt_natural: f64,
    pub r_grt: f64,
    /// Bound on the neglected tail of T₁(r̂).
    pub tail_bound: f64,
    pub terms: usize,
}

pub const GRT_DEFAULT_TERMS: usize = 400;
const GRT_TAIL_TOL: f64 = 1e-5;
const BISECTION_TOL: f64 = 1e-12;

/// ln(n^n / (n+1)!).
fn grt_log_weight(n: usize) -> f64 {
    let nf = n as f64;
    nf * nf.ln() - libm::lgamma(nf + 2.0)
}

/// Bound on Σ_{n>N} n^p · n^n r^{n+1}/(n+1)! for p ∈ {0, 1}, from
/// n^n/(n+1)! ≤ e^n/((n+1)√(2πn))·(1 + 1/(12n)).
fn grt_tail(r: f64, terms: usize, p: i32) -> f64 {
    let x = std::f64::consts::E * r;
    if x >= 1.0 {
        return f64::INFINITY;
    }
    let m = (terms + 1) as f64;
    let corr = 1.0 + 1.0 / (12.0 * m);
    let base = r * corr / (2.0 * std::f64::consts::PI * m).sqrt();
    let geometric = x.powf(m) / (1.0 - x);
    if p == 0 {
        base * geometric / (m + 1.0)
    } else {
        // n/(n+1) ≤ 1
        base * geometric
    }
}

/// r̂ solving r T₁'(r) - T₁(r) = 1 on (0, 1/e) and R_GRT = r̂/(C(1 + T₁(r̂))),
/// with T₁(r) = r + Σ_{n≥1} n^n r^{n+1}/(n+1)! summed to `terms` terms.
pub fn grt_bound(c: f64, terms: usize) -> Result<GrtBound, VirialError> {
    if !(c > 0.0 && c.is_finite()) {
        return Err(VirialError::InvalidInput(format!("C must be positive, got {c}")));
    }
    if terms == 0 {
        return Err(VirialError::InvalidInput("need at least one term".into()));
    }
    let logw: Vec<f64> = (1..=terms).map(grt_log_weight).collect();
    // r T₁' - T₁ = Σ n^{n+1} r^{n+1}/(n+1)!
    let lhs = |r: f64| -> f64 {
        let lr = r.ln();
        logw
            .iter()
            .enumerate()
            .map(|(i, &lw)| {
                let n = (i + 1) as f64;
                (lw + n.ln() + (n + 1.0) * lr).exp()
            })
            .sum()
    };
    let t1 = |r: f64| -> f64 {
        let lr = r.ln();
        r + logw
            .iter()
            .enumerate()
            .map(|(i, &lw)| (lw + (i as f64 + 2.0) * lr).exp())
            .sum::<f64>()
    };
    let (mut lo, mut hi) = (0.0, (-1f64).exp());
    if lhs(hi) < 1.0 {
        return Err(VirialError::TruncationInsufficient { tail: f64::INFINITY, tol: GRT_TAIL_TOL });
    }
    while hi - lo > BISECTION_TOL {
        let mid = 0.5 * (lo + hi);
        if lhs(mid) < 1.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    let r_hat = 0.5 * (lo + hi);
    let tail = grt_tail(r_hat, terms, 0).max(grt_tail(r_hat, terms, 1));
    if tail > GRT_TAIL_TOL {
        return Err(VirialError::TruncationInsufficient { tail, tol: GRT_TAIL_TOL });
    }
    let t = t1(r_hat);
    let natural = r_hat / (1.0 + t);
    Ok(GrtBound {
        r_hat,
        t1_at_r_hat: t,
        r_grt_natural: natural,
        r_grt: natural / c,
        tail_bound: grt_tail(r_hat, terms, 0),
        terms,
    })
}

/// Classical lower bound on the virial radius, 0.144766998/C.
pub const LP_NATURAL: f64 = 0.144_766_998;

pub fn lp_classical(c: f64) -> f64 {
    LP_NATURAL / c
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct MStar {
    pub m_star: f64,
    pub argmax: f64,
    pub mu_star: f64,
    pub r_star: f64,
}

/// M* = sup_{0 ≤ μ ≤ μ*} μ/(2Ψ(μ) - 1) with the certified Ψ.
pub fn m_star(vc: &VertexCoefficients) -> Result<MStar, VirialError> {
    let psi = PsiView::new(vc, PsiMode::Upper);
    m_star_with(&psi)
}

pub fn m_star_with(psi: &dyn crate::cluster::VertexSum) -> Result<MStar, VirialError> {
    let rs = optimize_r_star(psi)?;
    let m = maximize(|mu| mu / (2.0 * psi.value(mu) - 1.0), rs.mu_star);
    Ok(MStar { m_star: m.value, argmax: m.argmax, mu_star: rs.mu_star, r_star: rs.r_star })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct RStarVirial {
    pub value: f64,
    pub argmax: f64,
    pub r_cap: f64,
    pub truncation: usize,
}

/// sup_{0 ≤ r ≤ r_cap} r B(r)/(2B(r) - 1) with the truncated tree sum.
pub fn r_star_virial(b: &TreeSum, r_cap: f64) -> Result<RStarVirial, VirialError> {
    if !(r_cap > 0.0 && r_cap.is_finite()) {
        return Err(VirialError::DomainEmpty(r_cap));
    }
    let m = maximize(
        |r| {
            let bv = b.eval(r);
            r * bv / (2.0 * bv - 1.0)
        },
        r_cap,
    );
    Ok(RStarVirial { value: m.value, argmax: m.argmax, r_cap, truncation: b.order() })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct TermBound {
    pub n: usize,
    /// (1/(n+1))·[inf_r (2/r - 1/(rB(r)))]^n.
    pub bound: f64,
    pub infimum: f64,
    /// Largest relative gap between 2/r - 1/(rB) and (1 + T^{Pen,1}(r))/r on the grid.
    pub identity_residual: f64,
}

const RESIDUAL_GRID: usize = 64;

/// Bound on |β_{n+1}|/(n+1)! from the tree sum on [0, r_cap].
pub fn virial_term_bound(b: &TreeSum, n: usize, r_cap: f64) -> Result<TermBound, VirialError> {
    let rs = r_star_virial(b, r_cap)?;
    let infimum = 1.0 / rs.value;
    let bound = infimum.powi(n as i32) / (n + 1) as f64;
    let t = t_pen1_series(b)?;
    let mut residual: f64 = 0.0;
    for i in 1..=RESIDUAL_GRID {
        let r = r_cap * i as f64 / RESIDUAL_GRID as f64;
        let direct = 2.0 / r - 1.0 / (r * b.eval(r));
        let via_t = (1.0 + t.eval_f64(r)) / r;
        residual = residual.max(((direct - via_t) / direct).abs());
    }
    Ok(TermBound { n, bound, infimum, identity_residual: residual })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct VirialReport {
    /// Certified lower bound on the virial radius.
    pub m_star: f64,
    pub m_star_argmax: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub r_star_estimate: Option<RStarVirial>,
    pub r_grt: f64,
    pub r_lp_classical: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub beta_coeffs: Option<Vec<f64>>,
    pub metadata: VirialMetadata,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct VirialMetadata {
    pub truncation: usize,
    pub grt_terms: usize,
    pub grt_tail_bound: f64,
    pub r_cap: f64,
}

/// Virial bounds for one set of vertex coefficients; the R* estimate uses the
/// tree sum of the certified weights truncated at `order`, searched up to the
/// certified cluster radius.
pub fn virial_report(vc: &VertexCoefficients, order: usize, with_estimates: bool) -> Result<VirialReport, VirialError> {
    let c = vc.c_beta();
    let ms = m_star(vc)?;
    let grt = grt_bound(c, GRT_DEFAULT_TERMS)?;
    let r_star_estimate = if with_estimates {
        let g = vertex_weights(vc, PsiMode::Upper, order);
        let b = tree_sum_functional(&g, order)?;
        Some(r_star_virial(&b, ms.r_star)?)
    } else {
        None
    };
    Ok(VirialReport {
        m_star: ms.m_star,
        m_star_argmax: ms.argmax,
        r_star_estimate,
        r_grt: grt.r_grt,
        r_lp_classical: lp_classical(c),
        beta_coeffs: None,
        metadata: VirialMetadata { truncation: order, grt_terms: grt.terms, grt_tail_bound: grt.tail_bound, r_cap: ms.r_star },
    })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct GrtRow {
    pub exponent: u32,
    pub c1: f64,
    pub r_grt: f64,
    pub r_num: f64,
}

/// Published numerical radius estimates for φ(r) = r^{-n}, d = 3, β = 1, n = 4..8.
pub const R_NUM_REFERENCE: [(u32, f64); 5] = [(4, 0.1092), (5, 0.2418), (6, 0.3280), (7, 0.4022), (8, 0.4634)];

/// R_GRT for power-law potentials in d = 3, exponents 4..8, at β = 1.
pub fn grt_table(terms: usize) -> Result<Vec<GrtRow>, VirialError> {
    let natural = grt_bound(1.0, terms)?.r_grt_natural;
    R_NUM_REFERENCE
        .iter()
        .map(|&(n, r_num)| {
            let c1 = PairPotential::power_law(1.0, 1.0, n as f64, 1.0, 3)?.c_beta()?;
            Ok(GrtRow { exponent: n, c1, r_grt: natural / c1, r_num })
        })
        .collect()
}

/// Hard-rod cluster coefficients b_n = (-n)^{n-1} a^{n-1}, n = 2..=n_max.
pub fn hard_rod_cluster_coefficients(a: &Rational, n_max: usize) -> Vec<Rational> {
    (2..=n_max)
        .map(|n| {
            let base = BigInt::from(-(n as i64)).pow((n - 1) as u32);
            Rational::from_integer(base) * num_traits::pow(a.clone(), n - 1)
        })
        .collect()
}
