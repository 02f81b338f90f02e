use num_traits::Zero;

use super::{rat, Rational, Series, SeriesError};

fn reduced(b: &Series) -> Result<Series, SeriesError> {
    if !b.coeff(0).is_zero() || b.order() == 0 || b.coeff(1).is_zero() {
        return Err(SeriesError::NotInvertibleForm);
    }
    Ok(b.shift_down())
}

/// Compositional inverse b† with [X^k] b† = (1/k)[X^{k-1}] b̃^{-k}, where b = X·b̃.
pub fn lagrange_inverse(b: &Series) -> Result<Series, SeriesError> {
    let bt = reduced(b)?;
    let inv = bt.mul_inverse()?;
    let n = b.order();
    let mut out = vec![Rational::zero(); n + 1];
    let mut power = Series::one(inv.order());
    for (k, slot) in out.iter_mut().enumerate().skip(1) {
        power = power.mul(&inv);
        *slot = power.coeff(k - 1) / rat(k as i64);
    }
    Ok(Series::new(out))
}

/// [X^k] (c ∘ b†) = (1/k)[X^{k-1}] c'·b̃^{-k}, without building b†.
pub fn lagrange_compose_coeff(c: &Series, b: &Series, k: usize) -> Result<Rational, SeriesError> {
    let bt = reduced(b)?;
    if k == 0 {
        return Ok(c.coeff(0).clone());
    }
    let top = c.order().min(b.order());
    if k > top {
        return Err(SeriesError::IndexOutOfRange(format!(
            "coefficient {k} exceeds truncation order {top}"
        )));
    }
    let inv_pow = bt.mul_inverse()?.pow_int(k as u32);
    let prod = c.derivative().mul(&inv_pow);
    Ok(prod.coeff(k - 1) / rat(k as i64))
}

/// Solves compose(c, b) = X one coefficient at a time.
pub fn naive_compositional_inverse(b: &Series) -> Result<Series, SeriesError> {
    reduced(b)?;
    let n = b.order();
    let mut powers: Vec<Series> = Vec::with_capacity(n + 1);
    powers.push(Series::one(n));
    for k in 1..=n {
        let next = powers[k - 1].mul(b);
        powers.push(next);
    }
    let b1 = b.coeff(1).clone();
    let mut c = vec![Rational::zero(); n + 1];
    if n >= 1 {
        c[1] = b1.recip();
    }
    for m in 2..=n {
        let mut acc = Rational::zero();
        for (k, ck) in c.iter().enumerate().take(m).skip(1) {
            acc += ck * powers[k].coeff(m);
        }
        c[m] = -acc / powers[m].coeff(m);
    }
    Ok(Series::new(c))
}
