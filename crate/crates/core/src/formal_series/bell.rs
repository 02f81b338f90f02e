use num_bigint::BigInt;
use num_traits::{One, Zero};

use super::{factorial, Rational, SeriesError};

fn check_range(m: usize, k: usize, b: &[Rational]) -> Result<(), SeriesError> {
    if k == 0 || k > m {
        return Err(SeriesError::IndexOutOfRange(format!(
            "need 1 <= k <= m, got m={m}, k={k}"
        )));
    }
    if b.len() < m - k + 1 {
        return Err(SeriesError::IndexOutOfRange(format!(
            "need b_1..b_{} but only {} values given",
            m - k + 1,
            b.len()
        )));
    }
    Ok(())
}

/// Calls `visit` with the multiplicity vector (index i ↔ part size i+1) of
/// every partition of `m` into exactly `k` parts.
fn for_each_partition(m: usize, k: usize, visit: &mut dyn FnMut(&[usize])) {
    let mut mult = vec![0usize; m];
    fn rec(
        remaining: usize,
        parts_left: usize,
        max_part: usize,
        mult: &mut Vec<usize>,
        visit: &mut dyn FnMut(&[usize]),
    ) {
        if parts_left == 0 {
            if remaining == 0 {
                visit(mult);
            }
            return;
        }
        if remaining < parts_left {
            return;
        }
        let hi = max_part.min(remaining - (parts_left - 1));
        for part in (1..=hi).rev() {
            if part * parts_left < remaining {
                break;
            }
            mult[part - 1] += 1;
            rec(remaining - part, parts_left - 1, part, mult, visit);
            mult[part - 1] -= 1;
        }
    }
    rec(m, k, m, &mut mult, visit);
}

fn monomial(mult: &[usize], b: &[Rational]) -> Rational {
    let mut acc = Rational::one();
    for (i, &a) in mult.iter().enumerate() {
        for _ in 0..a {
            acc *= &b[i];
        }
    }
    acc
}

/// Partial ordinary Bell polynomial B̂_{m,k}(b_1, b_2, ...), with `b[i-1] = b_i`.
pub fn bell_ordinary(m: usize, k: usize, b: &[Rational]) -> Result<Rational, SeriesError> {
    check_range(m, k, b)?;
    let kf = factorial(k);
    let mut total = Rational::zero();
    for_each_partition(m, k, &mut |mult| {
        let denom: BigInt = mult.iter().map(|&a| factorial(a)).product();
        let coeff = Rational::new(kf.clone(), denom);
        total += coeff * monomial(mult, b);
    });
    Ok(total)
}

/// Partial exponential Bell polynomial B_{n,k}(b_1, b_2, ...), with `b[i-1] = b_i`.
pub fn bell_exponential(n: usize, k: usize, b: &[Rational]) -> Result<Rational, SeriesError> {
    check_range(n, k, b)?;
    let nf = factorial(n);
    let mut total = Rational::zero();
    for_each_partition(n, k, &mut |mult| {
        let mut denom = BigInt::one();
        for (i, &a) in mult.iter().enumerate() {
            denom *= factorial(a);
            let fi = factorial(i + 1);
            for _ in 0..a {
                denom *= &fi;
            }
        }
        total += Rational::new(nf.clone(), denom) * monomial(mult, b);
    });
    Ok(total)
}

/// B_{n,k} by explicit enumeration of set partitions of {1..n} into k blocks,
/// weighting each partition by Π b_{|block|}. Exponential in n.
pub fn set_partition_bell(n: usize, k: usize, b: &[Rational]) -> Result<Rational, SeriesError> {
    check_range(n, k, b)?;
    let mut total = Rational::zero();
    let mut block_of = vec![0usize; n];
    fn rec(
        i: usize,
        used: usize,
        k: usize,
        block_of: &mut Vec<usize>,
        b: &[Rational],
        total: &mut Rational,
    ) {
        let n = block_of.len();
        if n - i < k - used {
            return;
        }
        if i == n {
            let mut sizes = vec![0usize; k];
            for &blk in block_of.iter() {
                sizes[blk] += 1;
            }
            let mut w = Rational::one();
            for s in sizes {
                w *= &b[s - 1];
            }
            *total += w;
            return;
        }
        for blk in 0..used {
            block_of[i] = blk;
            rec(i + 1, used, k, block_of, b, total);
        }
        if used < k {
            block_of[i] = used;
            rec(i + 1, used + 1, k, block_of, b, total);
        }
    }
    rec(0, 0, k, &mut block_of, b, &mut total);
    Ok(total)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::formal_series::{rat, ratio};

    fn sample_b() -> Vec<Rational> {
        vec![ratio(2, 3), rat(-1), ratio(5, 4), rat(3), ratio(-1, 7), rat(2), ratio(1, 3), rat(1)]
    }

    #[test]
    fn ordinary_examples() {
        let b = sample_b();
        let b1 = &b[0];
        let mut p = rat(1);
        for _ in 0..4 {
            p *= b1;
        }
        assert_eq!(bell_ordinary(4, 4, &b).unwrap(), p);
        assert_eq!(bell_ordinary(5, 1, &b).unwrap(), b[4]);
        assert_eq!(bell_ordinary(3, 2, &b).unwrap(), rat(2) * &b[0] * &b[1]);
    }

    #[test]
    fn exponential_examples() {
        let b = sample_b();
        let mut p = rat(1);
        for _ in 0..5 {
            p *= &b[0];
        }
        assert_eq!(bell_exponential(5, 5, &b).unwrap(), p);
        assert_eq!(bell_exponential(6, 1, &b).unwrap(), b[5]);
        assert_eq!(bell_exponential(3, 2, &b).unwrap(), rat(3) * &b[0] * &b[1]);
    }

    #[test]
    fn unit_weights_give_stirling_numbers() {
        let ones = vec![rat(1); 8];
        assert_eq!(bell_exponential(5, 2, &ones).unwrap(), rat(15));
        assert_eq!(bell_exponential(6, 3, &ones).unwrap(), rat(90));
        // compositions of 6 into 3 parts: C(5,2)
        assert_eq!(bell_ordinary(6, 3, &ones).unwrap(), rat(10));
    }

    #[test]
    fn set_partitions_match_for_small_n() {
        let b = sample_b();
        for n in 1..=6 {
            for k in 1..=n {
                assert_eq!(
                    bell_exponential(n, k, &b).unwrap(),
                    set_partition_bell(n, k, &b).unwrap()
                );
            }
        }
    }

    #[test]
    fn range_errors() {
        let b = sample_b();
        assert!(matches!(bell_ordinary(3, 0, &b), Err(SeriesError::IndexOutOfRange(_))));
        assert!(matches!(bell_ordinary(3, 4, &b), Err(SeriesError::IndexOutOfRange(_))));
        assert!(matches!(
            bell_exponential(5, 1, &b[..2]),
            Err(SeriesError::IndexOutOfRange(_))
        ));
    }
}
