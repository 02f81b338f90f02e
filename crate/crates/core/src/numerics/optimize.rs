pub const SCAN_POINTS: usize = 64;
const REL_TOL: f64 = 1e-10;
const MAX_GOLDEN_STEPS: usize = 400;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Maximum {
    pub argmax: f64,
    pub value: f64,
    /// The best point found is the right end of the search interval.
    pub at_cap: bool,
    pub evaluations: usize,
}

/// Maximizes `f` on [0, cap]: a scan over 0 and 63 log-spaced points ending at
/// `cap`, then golden-section refinement on the bracket around the best point.
pub fn maximize(f: impl Fn(f64) -> f64, cap: f64) -> Maximum {
    assert!(cap > 0.0 && cap.is_finite(), "cap must be positive and finite");
    let mut xs = Vec::with_capacity(SCAN_POINTS);
    xs.push(0.0);
    let lo = cap * 1e-6;
    let ratio = (cap / lo).ln() / (SCAN_POINTS - 2) as f64;
    for i in 0..SCAN_POINTS - 1 {
        xs.push(lo * (ratio * i as f64).exp());
    }
    *xs.last_mut().expect("nonempty") = cap;
    let vals: Vec<f64> = xs.iter().map(|&x| f(x)).collect();
    let mut evaluations = xs.len();
    let best = vals
        .iter()
        .enumerate()
        .fold(0, |b, (i, &v)| if v > vals[b] { i } else { b });
    let mut a = xs[best.saturating_sub(1)];
    let mut b = xs[(best + 1).min(xs.len() - 1)];
    let phi = (5f64.sqrt() - 1.0) / 2.0;
    let mut c = b - phi * (b - a);
    let mut d = a + phi * (b - a);
    let mut fc = f(c);
    let mut fd = f(d);
    evaluations += 2;
    for _ in 0..MAX_GOLDEN_STEPS {
        if (b - a) <= REL_TOL * b.abs().max(f64::MIN_POSITIVE) {
            break;
        }
        if fc >= fd {
            b = d;
            d = c;
            fd = fc;
            c = b - phi * (b - a);
            fc = f(c);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + phi * (b - a);
            fd = f(d);
        }
        evaluations += 1;
    }
    let (mut argmax, mut value) = if fc >= fd { (c, fc) } else { (d, fd) };
    if vals[best] > value {
        argmax = xs[best];
        value = vals[best];
    }
    let fcap = vals[xs.len() - 1];
    if fcap >= value {
        argmax = cap;
        value = fcap;
    }
    let at_cap = (cap - argmax) <= 1e-8 * cap;
    Maximum { argmax, value, at_cap, evaluations }
}
