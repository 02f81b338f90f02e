use serde::Serialize;

use super::{g_monte_carlo_par, McEstimate, PairPotential, PotentialError};

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Provenance {
    Exact,
    /// Externally supplied reference value, used as given.
    Supplied,
    MonteCarlo { std_err: f64, samples: u64 },
    /// g(n) ≤ g(n1)·g(n2), n = n1 + n2.
    Bound { n1: usize, n2: usize },
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct VertexEntry {
    pub n: usize,
    /// Point value (Monte Carlo estimates are not inflated).
    pub value: f64,
    /// Value used by certified bounds (Monte Carlo estimates + 3σ, capped at C^n).
    pub upper: f64,
    pub provenance: Provenance,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct VertexCoefficients {
    c_beta: f64,
    entries: Vec<Option<VertexEntry>>,
    degree_cap: Option<usize>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum PsiMode {
    Lower,
    Upper,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PsiBounds {
    pub lower: f64,
    pub upper: f64,
}

/// Monte Carlo configuration used when no closed form is available.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct McSettings {
    pub samples: u64,
    pub seed: u64,
    pub workers: usize,
    /// Orders above this are filled by submultiplicative bounds.
    pub max_order: usize,
}

impl Default for McSettings {
    fn default() -> Self {
        Self { samples: 1_000_000, seed: 0, workers: 1, max_order: 5 }
    }
}

const INFLATION_SIGMAS: f64 = 3.0;

impl VertexCoefficients {
    /// Only g(1) = C is known.
    pub fn new(c_beta: f64, order: usize) -> Self {
        assert!(order >= 1, "order must be at least 1");
        let mut entries = vec![None; order];
        entries[0] = Some(VertexEntry { n: 1, value: c_beta, upper: c_beta, provenance: Provenance::Exact });
        Self { c_beta, entries, degree_cap: None }
    }

    /// Builds from normalized values ĝ(n) = g(n)/C^n, with ĝ(1) = 1 implied.
    /// `normalized[i]` is ĝ(i + 2).
    pub fn from_normalized(c_beta: f64, normalized: &[f64], provenance: Provenance, degree_cap: Option<usize>) -> Self {
        let mut vc = Self::new(c_beta, normalized.len() + 1);
        for (i, &g) in normalized.iter().enumerate() {
            let n = i + 2;
            let v = g * c_beta.powi(n as i32);
            vc.entries[n - 1] = Some(VertexEntry { n, value: v, upper: v, provenance });
        }
        vc.degree_cap = degree_cap;
        vc
    }

    pub fn with_degree_cap(mut self, cap: Option<usize>) -> Self {
        self.degree_cap = cap;
        self
    }

    pub fn c_beta(&self) -> f64 {
        self.c_beta
    }

    pub fn order(&self) -> usize {
        self.entries.len()
    }

    pub fn degree_cap(&self) -> Option<usize> {
        self.degree_cap
    }

    pub fn entries(&self) -> impl Iterator<Item = &VertexEntry> {
        self.entries.iter().flatten()
    }

    pub fn get(&self, n: usize) -> Option<&VertexEntry> {
        if n == 0 || n > self.entries.len() {
            return None;
        }
        self.entries[n - 1].as_ref()
    }

    fn ensure_order(&mut self, n: usize) {
        if n > self.entries.len() {
            self.entries.resize(n, None);
        }
    }

    fn beyond_cap(&self, n: usize) -> bool {
        self.degree_cap.is_some_and(|k| n > k)
    }

    pub fn set_exact(&mut self, n: usize, value: f64) {
        assert!(n >= 2, "g(1) is fixed to C");
        self.ensure_order(n);
        self.entries[n - 1] = Some(VertexEntry { n, value, upper: value, provenance: Provenance::Exact });
    }

    pub fn set_monte_carlo(&mut self, n: usize, est: McEstimate) {
        assert!(n >= 2, "g(1) is fixed to C");
        self.ensure_order(n);
        let cap = self.c_beta.powi(n as i32);
        let value = est.estimate.clamp(0.0, cap);
        let upper = (est.estimate + INFLATION_SIGMAS * est.std_err).clamp(value, cap);
        self.entries[n - 1] = Some(VertexEntry {
            n,
            value,
            upper,
            provenance: Provenance::MonteCarlo { std_err: est.std_err, samples: est.samples },
        });
    }

    /// Point value used by estimates; missing entries count as 0.
    pub fn point(&self, n: usize) -> f64 {
        if n == 0 {
            return 1.0;
        }
        if self.beyond_cap(n) {
            return 0.0;
        }
        self.get(n).map_or(0.0, |e| e.value)
    }

    /// Certified upper value; missing entries fall back to C^n.
    pub fn upper(&self, n: usize) -> f64 {
        if n == 0 {
            return 1.0;
        }
        if self.beyond_cap(n) {
            return 0.0;
        }
        self.get(n).map_or(self.c_beta.powi(n as i32), |e| e.upper)
    }

    /// Fills each missing g(n), n ≤ up_to, with min over n1 + n2 = n of g(n1)·g(n2).
    pub fn pad_submultiplicative(&self, up_to: usize) -> VertexCoefficients {
        let mut out = self.clone();
        out.ensure_order(up_to);
        for n in 2..=up_to {
            if out.entries[n - 1].is_some() {
                continue;
            }
            if out.beyond_cap(n) {
                out.entries[n - 1] = Some(VertexEntry { n, value: 0.0, upper: 0.0, provenance: Provenance::Exact });
                continue;
            }
            let cap = self.c_beta.powi(n as i32);
            let mut best = (cap, 1, n - 1);
            let mut best_point = cap;
            for n1 in 1..=n / 2 {
                let n2 = n - n1;
                let up = out.upper(n1) * out.upper(n2);
                if up < best.0 {
                    best = (up, n1, n2);
                }
                best_point = best_point.min(out.point(n1) * out.point(n2));
            }
            out.entries[n - 1] = Some(VertexEntry {
                n,
                value: best_point.min(best.0),
                upper: best.0,
                provenance: Provenance::Bound { n1: best.1, n2: best.2 },
            });
        }
        out
    }

    /// Ψ in the given mode.
    pub fn psi(&self, mu: f64, mode: PsiMode) -> f64 {
        let b = psi(self, mu);
        match mode {
            PsiMode::Lower => b.lower,
            PsiMode::Upper => b.upper,
        }
    }

    /// Same coefficients with upper values replaced by point values and no tail:
    /// Ψ lower as a coefficient set.
    pub fn point_values(&self) -> Vec<f64> {
        (0..=self.order()).map(|n| self.point(n)).collect()
    }

    pub fn upper_values(&self) -> Vec<f64> {
        (0..=self.order()).map(|n| self.upper(n)).collect()
    }
}

fn exp_tail(x: f64, from: usize, to: Option<usize>) -> f64 {
    // Σ_{n=from}^{to} x^n/n!
    if x == 0.0 {
        return 0.0;
    }
    let mut term = 1.0;
    for k in 1..=from {
        term *= x / k as f64;
    }
    let mut sum = 0.0;
    let mut n = from;
    loop {
        if to.is_some_and(|t| n > t) {
            break;
        }
        sum += term;
        n += 1;
        term *= x / n as f64;
        if to.is_none() && n as f64 > x && term <= 1e-17 * sum {
            break;
        }
    }
    sum
}

/// Lower and upper bounds on Ψ(μ) = 1 + Σ μ^n g(n)/n!.
pub fn psi(vc: &VertexCoefficients, mu: f64) -> PsiBounds {
    let mut lower = 1.0;
    let mut upper = 1.0;
    let mut pow = 1.0;
    for n in 1..=vc.order() {
        pow *= mu / n as f64;
        lower += vc.point(n) * pow;
        upper += vc.upper(n) * pow;
    }
    let n_max = vc.order();
    let tail = match vc.degree_cap {
        Some(k) if k <= n_max => 0.0,
        cap => exp_tail(mu * vc.c_beta, n_max + 1, cap),
    };
    PsiBounds { lower, upper: upper + tail }
}

/// g(1..=order) from closed forms where available, Monte Carlo up to
/// `mc.max_order`, and submultiplicative bounds beyond.
pub fn compute_vertex_coefficients(
    p: &PairPotential,
    order: usize,
    mc: &McSettings,
) -> Result<VertexCoefficients, PotentialError> {
    let c = p.c_beta()?;
    let mut vc = VertexCoefficients::new(c, order).with_degree_cap(p.degree_cap());
    for n in 2..=order {
        if vc.beyond_cap(n) {
            vc.set_exact(n, 0.0);
            continue;
        }
        match p.g_exact(n) {
            Ok(v) => vc.set_exact(n, v),
            Err(PotentialError::Unavailable(_)) => {
                if n <= mc.max_order {
                    let est = g_monte_carlo_par(p, n, mc.samples, mc.seed, mc.workers)?;
                    vc.set_monte_carlo(n, est);
                }
            }
            Err(e) => return Err(e),
        }
    }
    Ok(vc.pad_submultiplicative(order))
}
