use std::f64::consts::E;

/// Principal branch W₀ for x ≥ -1/e (Halley iteration). Returns NaN below the branch point.
pub fn lambert_w0(x: f64) -> f64 {
    let branch = -1.0 / E;
    if x.is_nan() || x < branch - 1e-15 {
        return f64::NAN;
    }
    if x == 0.0 {
        return 0.0;
    }
    let q = (1.0 + E * x).max(0.0);
    let mut w = if x < -0.25 {
        let p = (2.0 * q).sqrt();
        -1.0 + p - p * p / 3.0 + 11.0 / 72.0 * p * p * p
    } else if x < 3.0 {
        x.ln_1p() * 0.8
    } else {
        let l = x.ln();
        l - l.ln()
    };
    if q == 0.0 {
        return -1.0;
    }
    for _ in 0..100 {
        let ew = w.exp();
        let f = w * ew - x;
        if f == 0.0 {
            break;
        }
        let wp1 = w + 1.0;
        if wp1 == 0.0 {
            break;
        }
        let step = f / (ew * wp1 - (w + 2.0) * f / (2.0 * wp1));
        let next = w - step;
        let done = (next - w).abs() <= 1e-14 * (1.0 + next.abs());
        w = next.max(-1.0);
        if done {
            break;
        }
    }
    w
}
