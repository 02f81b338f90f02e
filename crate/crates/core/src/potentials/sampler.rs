use rand::Rng;
use rand_distr::StandardNormal;

use super::{PairPotential, PotentialError, PotentialKind};

/// Exact sampler for points x ∈ R^d with density f(|x|)/C(β), where
/// f = 1 - e^{-βφ}. Radii come from rejection against a simple envelope,
/// directions are uniform.
#[derive(Debug, Clone)]
pub enum RadialSampler {
    Ball { radius: f64 },
    PowerLaw { r0: f64, coupling: f64, exponent: f64, inner_prob: f64 },
    Table { lo: Vec<f64>, hi: Vec<f64>, fmax: Vec<f64>, cdf: Vec<f64> },
}

impl RadialSampler {
    pub fn new(p: &PairPotential) -> Result<Self, PotentialError> {
        let d = p.dim as f64;
        match &p.kind {
            PotentialKind::HardSphere { radius } => Ok(Self::Ball { radius: *radius }),
            PotentialKind::PowerLaw { epsilon, sigma, exponent } => {
                let coupling = p.beta * epsilon * sigma.powf(*exponent);
                let r0 = coupling.powf(1.0 / exponent);
                let inner = 1.0 / d;
                let tail = 1.0 / (exponent - d);
                Ok(Self::PowerLaw { r0, coupling, exponent: *exponent, inner_prob: inner / (inner + tail) })
            }
            PotentialKind::Tabulated { table } => {
                let nodes = table.nodes();
                let mut lo = vec![0.0];
                let mut hi = vec![nodes[0]];
                let mut fmax = vec![p.mayer_magnitude(nodes[0])];
                for w in nodes.windows(2) {
                    lo.push(w[0]);
                    hi.push(w[1]);
                    let mid = p.mayer_magnitude(0.5 * (w[0] + w[1]));
                    let m = p
                        .mayer_magnitude(w[0])
                        .max(p.mayer_magnitude(w[1]))
                        .max(mid);
                    fmax.push(if m.is_nan() { 1.0 } else { m });
                }
                let mut cdf = Vec::with_capacity(lo.len());
                let mut total = 0.0;
                for i in 0..lo.len() {
                    total += fmax[i] * (hi[i].powf(d) - lo[i].powf(d));
                    cdf.push(total);
                }
                if total <= 0.0 {
                    return Err(PotentialError::DegenerateSampler);
                }
                for c in cdf.iter_mut() {
                    *c /= total;
                }
                Ok(Self::Table { lo, hi, fmax, cdf })
            }
            PotentialKind::Ideal => Err(PotentialError::DegenerateSampler),
        }
    }

    pub fn sample_radius<R: Rng + ?Sized>(&self, p: &PairPotential, rng: &mut R) -> f64 {
        let d = p.dim as f64;
        match self {
            Self::Ball { radius } => radius * rng.random::<f64>().powf(1.0 / d),
            Self::PowerLaw { r0, coupling, exponent, inner_prob } => loop {
                let r = if rng.random::<f64>() < *inner_prob {
                    r0 * rng.random::<f64>().powf(1.0 / d)
                } else {
                    r0 * (1.0 - rng.random::<f64>()).powf(-1.0 / (exponent - d))
                };
                let envelope = (coupling * r.powf(-exponent)).min(1.0);
                if rng.random::<f64>() * envelope < p.mayer_magnitude(r) {
                    return r;
                }
            },
            Self::Table { lo, hi, fmax, cdf } => loop {
                let u = rng.random::<f64>();
                let i = cdf.partition_point(|&c| c <= u).min(cdf.len() - 1);
                let (a, b) = (lo[i].powf(d), hi[i].powf(d));
                let r = (a + rng.random::<f64>() * (b - a)).powf(1.0 / d);
                if rng.random::<f64>() * fmax[i] < p.mayer_magnitude(r) {
                    return r;
                }
            },
        }
    }

    /// Writes one sample point into `out` (length = dimension).
    pub fn sample_point<R: Rng + ?Sized>(&self, p: &PairPotential, rng: &mut R, out: &mut [f64]) {
        let r = self.sample_radius(p, rng);
        if out.len() == 1 {
            out[0] = if rng.random::<bool>() { r } else { -r };
            return;
        }
        loop {
            let mut norm2 = 0.0;
            for x in out.iter_mut() {
                *x = rng.sample(StandardNormal);
                norm2 += *x * *x;
            }
            if norm2 > 0.0 {
                let s = r / norm2.sqrt();
                for x in out.iter_mut() {
                    *x *= s;
                }
                return;
            }
        }
    }
}
