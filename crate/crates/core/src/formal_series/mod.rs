//! Truncated formal power series with exact rational coefficients.
//!
//! A [`Series`] of order `N` stores `a_0 ..= a_N`. Binary operations truncate
//! to the smaller order of their operands and never extend it.

mod bell;
mod lagrange;

pub use bell::{bell_exponential, bell_ordinary, set_partition_bell};
pub use lagrange::{lagrange_compose_coeff, lagrange_inverse, naive_compositional_inverse};

use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};
use thiserror::Error;

pub type Rational = BigRational;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum SeriesError {
    #[error("constant term is zero, series is not invertible")]
    ZeroConstantTerm,
    #[error("inner series has a nonzero constant term")]
    NonzeroInnerConstant,
    #[error("constant term must equal one")]
    ConstantTermNotOne,
    #[error("index out of range: {0}")]
    IndexOutOfRange(String),
    #[error("series is not of the form X*b(X) with b(0) != 0")]
    NotInvertibleForm,
}

pub fn rat(n: i64) -> Rational {
    Rational::from_integer(BigInt::from(n))
}

pub fn ratio(n: i64, d: i64) -> Rational {
    Rational::new(BigInt::from(n), BigInt::from(d))
}

pub fn factorial(n: usize) -> BigInt {
    (1..=n).fold(BigInt::one(), |acc, k| acc * BigInt::from(k))
}

/// r(r-1)...(r-n+1)/n!
pub fn generalized_binomial(r: &Rational, n: usize) -> Rational {
    let mut acc = Rational::one();
    for j in 0..n {
        acc *= r - rat(j as i64);
        acc /= rat(j as i64 + 1);
    }
    acc
}

#[derive(Clone, PartialEq, Eq)]
pub struct Series {
    coeffs: Vec<Rational>,
}

impl fmt::Debug for Series {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Series[")?;
        for (i, c) in self.coeffs.iter().enumerate() {
            if i > 0 {
                write!(f, ", ")?;
            }
            write!(f, "{c}")?;
        }
        write!(f, "; O(X^{})]", self.order() + 1)
    }
}

impl Series {
    /// Panics on an empty coefficient vector.
    pub fn new(coeffs: Vec<Rational>) -> Self {
        assert!(!coeffs.is_empty(), "a series needs at least a constant term");
        Self { coeffs }
    }

    pub fn from_ints(coeffs: &[i64]) -> Self {
        Self::new(coeffs.iter().map(|&c| rat(c)).collect())
    }

    pub fn zero(order: usize) -> Self {
        Self::new(vec![Rational::zero(); order + 1])
    }

    pub fn one(order: usize) -> Self {
        Self::constant(Rational::one(), order)
    }

    pub fn constant(c: Rational, order: usize) -> Self {
        let mut s = Self::zero(order);
        s.coeffs[0] = c;
        s
    }

    /// c·X^k truncated at `order` (zero if k > order).
    pub fn monomial(k: usize, c: Rational, order: usize) -> Self {
        let mut s = Self::zero(order);
        if k <= order {
            s.coeffs[k] = c;
        }
        s
    }

    pub fn x(order: usize) -> Self {
        Self::monomial(1, Rational::one(), order)
    }

    pub fn order(&self) -> usize {
        self.coeffs.len() - 1
    }

    pub fn coeff(&self, k: usize) -> &Rational {
        &self.coeffs[k]
    }

    pub fn coeffs(&self) -> &[Rational] {
        &self.coeffs
    }

    pub fn into_coeffs(self) -> Vec<Rational> {
        self.coeffs
    }

    /// Lowers the truncation order. Orders above the current one are clamped.
    pub fn truncate(&self, order: usize) -> Series {
        let keep = order.min(self.order());
        Series::new(self.coeffs[..=keep].to_vec())
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.iter().all(|c| c.is_zero())
    }

    pub fn scale(&self, c: &Rational) -> Series {
        Series::new(self.coeffs.iter().map(|a| a * c).collect())
    }

    pub fn add(&self, other: &Series) -> Series {
        let n = self.order().min(other.order());
        Series::new((0..=n).map(|k| &self.coeffs[k] + &other.coeffs[k]).collect())
    }

    pub fn sub(&self, other: &Series) -> Series {
        let n = self.order().min(other.order());
        Series::new((0..=n).map(|k| &self.coeffs[k] - &other.coeffs[k]).collect())
    }

    pub fn neg(&self) -> Series {
        Series::new(self.coeffs.iter().map(|a| -a).collect())
    }

    pub fn mul(&self, other: &Series) -> Series {
        let n = self.order().min(other.order());
        let mut out = vec![Rational::zero(); n + 1];
        for (i, a) in self.coeffs.iter().enumerate().take(n + 1) {
            if a.is_zero() {
                continue;
            }
            for (j, b) in other.coeffs.iter().enumerate().take(n + 1 - i) {
                if !b.is_zero() {
                    out[i + j] += a * b;
                }
            }
        }
        Series::new(out)
    }

    pub fn pow_int(&self, n: u32) -> Series {
        let mut result = Series::one(self.order());
        let mut base = self.clone();
        let mut e = n;
        while e > 0 {
            if e & 1 == 1 {
                result = result.mul(&base);
            }
            e >>= 1;
            if e > 0 {
                base = base.mul(&base);
            }
        }
        result
    }

    /// Recursive inverse: c_0 = 1/a_0, c_n = -(1/a_0) Σ_{k=1}^n a_k c_{n-k}.
    pub fn mul_inverse(&self) -> Result<Series, SeriesError> {
        let a0 = &self.coeffs[0];
        if a0.is_zero() {
            return Err(SeriesError::ZeroConstantTerm);
        }
        let inv0 = a0.recip();
        let n = self.order();
        let mut c: Vec<Rational> = Vec::with_capacity(n + 1);
        c.push(inv0.clone());
        for m in 1..=n {
            let mut acc = Rational::zero();
            for k in 1..=m {
                if !self.coeffs[k].is_zero() {
                    acc += &self.coeffs[k] * &c[m - k];
                }
            }
            c.push(-acc * &inv0);
        }
        Ok(Series::new(c))
    }

    /// a∘b as Σ_k a_k b^k.
    pub fn compose(&self, b: &Series) -> Result<Series, SeriesError> {
        if !b.coeffs[0].is_zero() {
            return Err(SeriesError::NonzeroInnerConstant);
        }
        let n = self.order().min(b.order());
        let b = b.truncate(n);
        let mut out = Series::constant(self.coeffs[0].clone(), n);
        let mut power = Series::one(n);
        for k in 1..=n {
            power = power.mul(&b);
            let ak = &self.coeffs[k];
            if ak.is_zero() {
                continue;
            }
            for m in k..=n {
                let t = ak * &power.coeffs[m];
                out.coeffs[m] += t;
            }
        }
        Ok(out)
    }

    /// a∘b through ordinary Bell polynomials: [X^m] = Σ_k a_k B̂_{m,k}(b_1, b_2, ...).
    pub fn compose_via_bell(&self, b: &Series) -> Result<Series, SeriesError> {
        if !b.coeffs[0].is_zero() {
            return Err(SeriesError::NonzeroInnerConstant);
        }
        let n = self.order().min(b.order());
        let inner: Vec<Rational> = b.coeffs[1..=n].to_vec();
        let mut out = vec![Rational::zero(); n + 1];
        out[0] = self.coeffs[0].clone();
        for (m, slot) in out.iter_mut().enumerate().skip(1) {
            let mut acc = Rational::zero();
            for k in 1..=m {
                if self.coeffs[k].is_zero() {
                    continue;
                }
                acc += &self.coeffs[k] * bell_ordinary(m, k, &inner)?;
            }
            *slot = acc;
        }
        Ok(Series::new(out))
    }

    /// Term-wise derivative; order drops by one (an order-0 series maps to the zero constant).
    pub fn derivative(&self) -> Series {
        if self.order() == 0 {
            return Series::zero(0);
        }
        Series::new(
            (1..=self.order())
                .map(|k| &self.coeffs[k] * rat(k as i64))
                .collect(),
        )
    }

    /// a(X)/X for a series with zero constant term; order drops by one.
    pub fn shift_down(&self) -> Series {
        if self.order() == 0 {
            return Series::zero(0);
        }
        Series::new(self.coeffs[1..].to_vec())
    }

    /// X·a(X); order rises by one (the new top coefficient is exact).
    pub fn shift_up(&self) -> Series {
        let mut c = Vec::with_capacity(self.coeffs.len() + 1);
        c.push(Rational::zero());
        c.extend(self.coeffs.iter().cloned());
        Series::new(c)
    }

    /// (1+X)^r truncated at `order`.
    pub fn binomial(r: &Rational, order: usize) -> Series {
        Series::new((0..=order).map(|k| generalized_binomial(r, k)).collect())
    }

    /// a^r for a series with a_0 = 1.
    pub fn real_power(&self, r: &Rational) -> Result<Series, SeriesError> {
        if !self.coeffs[0].is_one() {
            return Err(SeriesError::ConstantTermNotOne);
        }
        let inner = self.sub(&Series::one(self.order()));
        Series::binomial(r, self.order()).compose(&inner)
    }

    /// Evaluates the truncated polynomial at a float argument (Horner).
    pub fn eval_f64(&self, x: f64) -> f64 {
        self.coeffs
            .iter()
            .rev()
            .fold(0.0, |acc, c| acc * x + rational_to_f64(c))
    }

    pub fn is_nonnegative(&self) -> bool {
        self.coeffs.iter().all(|c| !c.is_negative())
    }
}

impl Add for &Series {
    type Output = Series;
    fn add(self, rhs: &Series) -> Series {
        Series::add(self, rhs)
    }
}

impl Sub for &Series {
    type Output = Series;
    fn sub(self, rhs: &Series) -> Series {
        Series::sub(self, rhs)
    }
}

impl Mul for &Series {
    type Output = Series;
    fn mul(self, rhs: &Series) -> Series {
        Series::mul(self, rhs)
    }
}

impl Neg for &Series {
    type Output = Series;
    fn neg(self) -> Series {
        Series::neg(self)
    }
}

/// Exponential view: the n-th exponential coefficient is n!·[X^n].
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct EgfView {
    series: Series,
}

impl EgfView {
    pub fn new(series: Series) -> Self {
        Self { series }
    }

    pub fn from_egf_coeffs(egf: &[Rational]) -> Self {
        let coeffs = egf
            .iter()
            .enumerate()
            .map(|(n, a)| a / Rational::from_integer(factorial(n)))
            .collect();
        Self::new(Series::new(coeffs))
    }

    pub fn coeff(&self, n: usize) -> Rational {
        self.series.coeff(n) * Rational::from_integer(factorial(n))
    }

    pub fn egf_coeffs(&self) -> Vec<Rational> {
        (0..=self.series.order()).map(|n| self.coeff(n)).collect()
    }

    pub fn series(&self) -> &Series {
        &self.series
    }

    pub fn into_series(self) -> Series {
        self.series
    }
}

pub fn rational_to_f64(q: &Rational) -> f64 {
    use num_traits::ToPrimitive;
    q.to_f64().unwrap_or(f64::NAN)
}

/// Exact conversion of a finite float. Non-finite input panics.
pub fn f64_to_rational(x: f64) -> Rational {
    Rational::from_float(x).expect("finite float")
}
