use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use super::{PairPotential, PotentialError, RadialSampler};
use crate::numerics::KahanSum;

/// Number of independent random streams per estimate. Streams are dealt out
/// to workers round-robin and merged in stream order, so the result does not
/// depend on the worker count.
pub const MC_STREAMS: u64 = 64;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct McEstimate {
    pub estimate: f64,
    pub std_err: f64,
    pub samples: u64,
}

#[derive(Clone, Copy, Default)]
struct StreamSums {
    h: KahanSum,
    h2: KahanSum,
    count: u64,
}

fn run_stream(p: &PairPotential, sampler: &RadialSampler, n: usize, samples: u64, seed: u64, stream: u64) -> StreamSums {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(((n as u64) << 32) | stream);
    let d = p.dim;
    let mut pts = vec![0.0; n * d];
    let mut sums = StreamSums::default();
    for _ in 0..samples {
        for i in 0..n {
            sampler.sample_point(p, &mut rng, &mut pts[i * d..(i + 1) * d]);
        }
        let mut energy = 0.0;
        'pairs: for i in 0..n {
            for j in i + 1..n {
                let mut r2 = 0.0;
                for k in 0..d {
                    let diff = pts[i * d + k] - pts[j * d + k];
                    r2 += diff * diff;
                }
                energy += p.phi(r2.sqrt());
                if energy.is_infinite() {
                    break 'pairs;
                }
            }
        }
        let h = (-p.beta * energy).exp();
        sums.h.add(h);
        sums.h2.add(h * h);
        sums.count += 1;
    }
    sums
}

/// g(n) by importance sampling, single worker.
pub fn g_monte_carlo(p: &PairPotential, n: usize, samples: u64, seed: u64) -> Result<McEstimate, PotentialError> {
    g_monte_carlo_par(p, n, samples, seed, 1)
}

/// g(n) = C^n · E[Π_{i<j} e^{-βφ(x_i - x_j)}] with x_i drawn independently
/// from f(|x|)/C.
pub fn g_monte_carlo_par(
    p: &PairPotential,
    n: usize,
    samples: u64,
    seed: u64,
    workers: usize,
) -> Result<McEstimate, PotentialError> {
    if n < 2 {
        return Err(PotentialError::Invalid("Monte Carlo needs n >= 2".into()));
    }
    if samples < 2 {
        return Err(PotentialError::Invalid("need at least two samples".into()));
    }
    let c = p.c_beta()?;
    if !(c > 0.0 && c.is_finite()) {
        return Err(PotentialError::DegenerateSampler);
    }
    let sampler = RadialSampler::new(p)?;
    let per = samples / MC_STREAMS;
    let extra = samples % MC_STREAMS;
    let quota = |s: u64| per + u64::from(s < extra);
    let workers = workers.clamp(1, MC_STREAMS as usize);
    let mut results = vec![StreamSums::default(); MC_STREAMS as usize];
    std::thread::scope(|scope| {
        let handles: Vec<_> = (0..workers)
            .map(|w| {
                let sampler = &sampler;
                scope.spawn(move || {
                    (w as u64..MC_STREAMS)
                        .step_by(workers)
                        .map(|s| (s, run_stream(p, sampler, n, quota(s), seed, s)))
                        .collect::<Vec<_>>()
                })
            })
            .collect();
        for h in handles {
            for (s, sums) in h.join().expect("worker panicked") {
                results[s as usize] = sums;
            }
        }
    });
    let mut h = KahanSum::default();
    let mut h2 = KahanSum::default();
    let mut count = 0u64;
    for r in &results {
        h.add(r.h.value());
        h2.add(r.h2.value());
        count += r.count;
    }
    let nf = count as f64;
    let mean = h.value() / nf;
    let var = ((h2.value() - nf * mean * mean) / (nf - 1.0)).max(0.0);
    let scale = c.powi(n as i32);
    Ok(McEstimate { estimate: mean * scale, std_err: (var / nf).sqrt() * scale, samples: count })
}
