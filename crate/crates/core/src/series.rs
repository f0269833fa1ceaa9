//! Truncated formal power series over exact rationals.
//!
//! A [`PowerSeries`] of order `N` represents a function modulo `u^(N+1)`.
//! Internally every coefficient shares one denominator: the series is stored
//! as `(n_0 + n_1 u + ... + n_N u^N) / d` with integer numerators and
//! `gcd(d, n_0, ..., n_N) = 1`. Products and recurrences then run on plain
//! integers and only one gcd pass per result is needed, which is what makes
//! orders in the hundreds with thousand-digit denominators practical.
//!
//! Order bookkeeping: binary operations return the minimum of their inputs'
//! orders; `derivative` loses one order, `integrate` gains one, and
//! `compose`/`comp_inverse` keep the minimum order of the series involved.

use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Signed, Zero};
use serde::{Deserialize, Deserializer, Serialize, Serializer};
use thiserror::Error;

use crate::rational::ExactRational;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum SeriesError {
    #[error("division by a series with zero constant term")]
    DivisionByNonUnit,
    #[error("composition requires the inner series to have zero constant term")]
    CompositionNeedsZeroConstant,
    #[error("series is not compositionally invertible (needs s(0) = 0 and s'(0) != 0)")]
    NotInvertible,
    #[error("rational power requires constant term 1")]
    PowNeedsUnitConstant,
    #[error("logarithm requires constant term 1")]
    LogNeedsUnitConstant,
    #[error("exponential requires constant term 0")]
    ExpNeedsZeroConstant,
    #[error("cannot divide by u^{shift}: coefficient {index} is nonzero")]
    NotDivisibleByPower { shift: usize, index: usize },
    #[error("series has {len} coefficients but order {order}")]
    BadLength { len: usize, order: usize },
}

/// Truncated power series `c_0 + c_1 u + ... + c_N u^N + O(u^(N+1))`.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct PowerSeries {
    order: usize,
    den: BigInt,
    nums: Vec<BigInt>,
}

impl PowerSeries {
    pub fn zero(order: usize) -> Self {
        PowerSeries {
            order,
            den: BigInt::one(),
            nums: vec![BigInt::zero(); order + 1],
        }
    }

    pub fn one(order: usize) -> Self {
        Self::constant(&ExactRational::one(), order)
    }

    pub fn constant(c: &ExactRational, order: usize) -> Self {
        let mut nums = vec![BigInt::zero(); order + 1];
        nums[0] = c.numer().clone();
        PowerSeries {
            order,
            den: c.denom().clone(),
            nums,
        }
    }

    /// The formal variable `u`.
    pub fn variable(order: usize) -> Self {
        Self::monomial(&ExactRational::one(), 1, order)
    }

    /// `c u^k`, truncated at `order`.
    pub fn monomial(c: &ExactRational, k: usize, order: usize) -> Self {
        let mut s = Self::zero(order);
        if k <= order && !c.is_zero() {
            s.nums[k] = c.numer().clone();
            s.den = c.denom().clone();
        }
        s
    }

    /// Series whose order is `coeffs.len() - 1`.
    ///
    /// Panics on an empty slice.
    pub fn from_coeffs(coeffs: &[ExactRational]) -> Self {
        assert!(
            !coeffs.is_empty(),
            "a power series needs at least one coefficient"
        );
        Self::from_coeffs_with_order(coeffs, coeffs.len() - 1)
    }

    /// Pads with zeros (or truncates) to the given order.
    pub fn from_coeffs_with_order(coeffs: &[ExactRational], order: usize) -> Self {
        let mut den = BigInt::one();
        for c in coeffs.iter().take(order + 1) {
            if !den.is_multiple_of(c.denom()) {
                den = den.lcm(c.denom());
            }
        }
        let mut nums: Vec<BigInt> = coeffs
            .iter()
            .take(order + 1)
            .map(|c| c.numer() * (&den / c.denom()))
            .collect();
        nums.resize(order + 1, BigInt::zero());
        PowerSeries { order, den, nums }
    }

    pub fn from_integers(coeffs: &[i64]) -> Self {
        let rs: Vec<ExactRational> = coeffs.iter().map(|&c| ExactRational::from(c)).collect();
        Self::from_coeffs(&rs)
    }

    fn from_parts(order: usize, den: BigInt, nums: Vec<BigInt>) -> Self {
        debug_assert_eq!(nums.len(), order + 1);
        debug_assert!(den.is_positive());
        let mut s = PowerSeries { order, den, nums };
        s.normalize();
        s
    }

    fn normalize(&mut self) {
        if self.den.is_one() {
            return;
        }
        let mut g = self.den.clone();
        for n in &self.nums {
            if n.is_zero() {
                continue;
            }
            g = g.gcd(n);
            if g.is_one() {
                return;
            }
        }
        for n in &mut self.nums {
            *n /= &g;
        }
        self.den /= &g;
    }

    pub fn order(&self) -> usize {
        self.order
    }

    /// Coefficient of `u^n`; zero beyond the order is *not* implied, so this
    /// panics if `n > order`.
    pub fn coeff(&self, n: usize) -> ExactRational {
        ExactRational::new(self.nums[n].clone(), self.den.clone())
    }

    pub fn coeffs(&self) -> Vec<ExactRational> {
        (0..=self.order).map(|n| self.coeff(n)).collect()
    }

    /// Sign of the coefficient of `u^n` without building the rational.
    pub fn coeff_signum(&self, n: usize) -> i32 {
        if self.nums[n].is_positive() {
            1
        } else if self.nums[n].is_negative() {
            -1
        } else {
            0
        }
    }

    pub fn is_coeff_zero(&self, n: usize) -> bool {
        self.nums[n].is_zero()
    }

    /// Index of the first nonzero coefficient, if any.
    pub fn valuation(&self) -> Option<usize> {
        self.nums.iter().position(|n| !n.is_zero())
    }

    /// The shared denominator of all coefficients (their lcm).
    pub fn common_denominator(&self) -> &BigInt {
        &self.den
    }

    pub fn truncate(&self, order: usize) -> Self {
        if order >= self.order {
            return self.clone();
        }
        Self::from_parts(order, self.den.clone(), self.nums[..=order].to_vec())
    }

    /// Coefficient-wise equality up to the smaller of the two orders.
    pub fn agrees_with(&self, other: &PowerSeries) -> bool {
        let m = self.order.min(other.order);
        self.truncate(m) == other.truncate(m)
    }

    /// Index of the first coefficient (up to the common order) where the two differ.
    pub fn first_difference(&self, other: &PowerSeries) -> Option<usize> {
        let m = self.order.min(other.order);
        (0..=m).find(|&n| &self.nums[n] * &other.den != &other.nums[n] * &self.den)
    }

    pub fn is_zero(&self) -> bool {
        self.nums.iter().all(Zero::is_zero)
    }

    pub fn add(&self, other: &PowerSeries) -> PowerSeries {
        self.linear_combination(other, false)
    }

    pub fn sub(&self, other: &PowerSeries) -> PowerSeries {
        self.linear_combination(other, true)
    }

    fn linear_combination(&self, other: &PowerSeries, subtract: bool) -> PowerSeries {
        let order = self.order.min(other.order);
        let den = self.den.lcm(&other.den);
        let fa = &den / &self.den;
        let fb = &den / &other.den;
        let nums = (0..=order)
            .map(|n| {
                let a = &self.nums[n] * &fa;
                let b = &other.nums[n] * &fb;
                if subtract {
                    a - b
                } else {
                    a + b
                }
            })
            .collect();
        Self::from_parts(order, den, nums)
    }

    pub fn neg(&self) -> PowerSeries {
        PowerSeries {
            order: self.order,
            den: self.den.clone(),
            nums: self.nums.iter().map(|n| -n).collect(),
        }
    }

    pub fn scale(&self, c: &ExactRational) -> PowerSeries {
        let nums = self.nums.iter().map(|n| n * c.numer()).collect();
        let den = &self.den * c.denom();
        if c.is_zero() {
            return Self::zero(self.order);
        }
        Self::from_parts(self.order, den, nums)
    }

    /// `s(c u)`: multiplies the coefficient of `u^n` by `c^n`.
    pub fn scale_variable(&self, c: &ExactRational) -> PowerSeries {
        let mut coeffs = Vec::with_capacity(self.order + 1);
        let mut pw = ExactRational::one();
        for n in 0..=self.order {
            coeffs.push(self.coeff(n) * &pw);
            pw *= c;
        }
        Self::from_coeffs(&coeffs)
    }

    pub fn add_constant(&self, c: &ExactRational) -> PowerSeries {
        let den = self.den.lcm(c.denom());
        let f = &den / &self.den;
        let mut nums: Vec<BigInt> = self.nums.iter().map(|n| n * &f).collect();
        nums[0] += c.numer() * (&den / c.denom());
        Self::from_parts(self.order, den, nums)
    }

    /// Cauchy product truncated to the smaller order.
    pub fn mul(&self, other: &PowerSeries) -> PowerSeries {
        let order = self.order.min(other.order);
        let mut nums = vec![BigInt::zero(); order + 1];
        for (i, a) in self.nums.iter().enumerate().take(order + 1) {
            if a.is_zero() {
                continue;
            }
            for (j, b) in other.nums.iter().enumerate().take(order + 1 - i) {
                if !b.is_zero() {
                    nums[i + j] += a * b;
                }
            }
        }
        Self::from_parts(order, &self.den * &other.den, nums)
    }

    pub fn square(&self) -> PowerSeries {
        self.mul(self)
    }

    /// Nonnegative integer power by repeated squaring.
    pub fn powu(&self, mut exp: u32) -> PowerSeries {
        let mut result = Self::one(self.order);
        let mut base = self.clone();
        while exp > 0 {
            if exp & 1 == 1 {
                result = result.mul(&base);
            }
            exp >>= 1;
            if exp > 0 {
                base = base.square();
            }
        }
        result
    }

    /// `q` with `q * t = s` up to the common order.
    pub fn div(&self, t: &PowerSeries) -> Result<PowerSeries, SeriesError> {
        if t.nums[0].is_zero() {
            return Err(SeriesError::DivisionByNonUnit);
        }
        let order = self.order.min(t.order);
        let mut q = OnlineSeries::with_capacity(order + 1);
        let ds_t0 = &self.den * &t.nums[0];
        for n in 0..=order {
            let conv = convolve_at(&t.nums, &q.nums, n, 1);
            // q_n = (s_n/ds - conv/(dt dq)) / (t_0/dt)
            let num = &self.nums[n] * &t.den * &q.den - conv * &self.den;
            let den = &ds_t0 * &q.den;
            q.push(ExactRational::new(num, den));
        }
        Ok(q.finish(order))
    }

    /// Multiplicative inverse `1/s`.
    pub fn recip(&self) -> Result<PowerSeries, SeriesError> {
        Self::one(self.order).div(self)
    }

    /// `outer(inner(u))`, for `inner(0) = 0`.
    pub fn compose(&self, inner: &PowerSeries) -> Result<PowerSeries, SeriesError> {
        if !inner.nums[0].is_zero() {
            return Err(SeriesError::CompositionNeedsZeroConstant);
        }
        let order = self.order.min(inner.order);
        let inner = inner.truncate(order);
        let mut acc = Self::constant(&self.coeff(order), order);
        for k in (0..order).rev() {
            acc = acc.mul(&inner);
            if !self.nums[k].is_zero() {
                acc = acc.add_constant(&self.coeff(k));
            }
        }
        Ok(acc)
    }

    /// `outer(inner(u))` where `self` is an exact polynomial (no terms beyond
    /// its order), so the inner constant term may be nonzero. The result has
    /// the inner series' order.
    pub fn compose_polynomial(&self, inner: &PowerSeries) -> PowerSeries {
        let order = inner.order;
        let mut acc = Self::constant(&self.coeff(self.order), order);
        for k in (0..self.order).rev() {
            acc = acc.mul(inner).add_constant(&self.coeff(k));
        }
        acc
    }

    /// Divides by `u^k`; the first `k` coefficients must vanish.
    pub fn shift_down(&self, k: usize) -> Result<PowerSeries, SeriesError> {
        if let Some(index) = (0..k.min(self.order + 1)).find(|&i| !self.nums[i].is_zero()) {
            return Err(SeriesError::NotDivisibleByPower { shift: k, index });
        }
        if k > self.order {
            return Ok(Self::zero(0));
        }
        Ok(Self::from_parts(
            self.order - k,
            self.den.clone(),
            self.nums[k..].to_vec(),
        ))
    }

    /// Multiplies by `u^k`; the order grows by `k`.
    pub fn shift_up(&self, k: usize) -> PowerSeries {
        let mut nums = vec![BigInt::zero(); k];
        nums.extend(self.nums.iter().cloned());
        PowerSeries {
            order: self.order + k,
            den: self.den.clone(),
            nums,
        }
    }

    /// Formal derivative; the order drops by one (an order-0 series yields
    /// the zero series of order 0).
    pub fn derivative(&self) -> PowerSeries {
        if self.order == 0 {
            return Self::zero(0);
        }
        let nums = (1..=self.order)
            .map(|n| &self.nums[n] * BigInt::from(n))
            .collect();
        Self::from_parts(self.order - 1, self.den.clone(), nums)
    }

    /// Antiderivative with zero constant term; the order grows by one.
    pub fn integrate(&self) -> PowerSeries {
        let mut coeffs = Vec::with_capacity(self.order + 2);
        coeffs.push(ExactRational::zero());
        for n in 0..=self.order {
            coeffs.push(self.coeff(n) / (n as i64 + 1));
        }
        Self::from_coeffs(&coeffs)
    }

    /// `log(s)` for `s(0) = 1`.
    pub fn log(&self) -> Result<PowerSeries, SeriesError> {
        if !self.constant_is_one() {
            return Err(SeriesError::LogNeedsUnitConstant);
        }
        if self.order == 0 {
            return Ok(Self::zero(0));
        }
        let ratio = self.derivative().div(self)?;
        Ok(ratio.integrate())
    }

    /// `log(1 + s)` for `s(0) = 0`.
    pub fn log1p(&self) -> Result<PowerSeries, SeriesError> {
        self.add_constant(&ExactRational::one()).log()
    }

    /// `exp(s)` for `s(0) = 0`, via `n e_n = sum_k k s_k e_(n-k)`.
    pub fn exp(&self) -> Result<PowerSeries, SeriesError> {
        if !self.nums[0].is_zero() {
            return Err(SeriesError::ExpNeedsZeroConstant);
        }
        let weighted: Vec<BigInt> = self
            .nums
            .iter()
            .enumerate()
            .map(|(k, c)| c * BigInt::from(k))
            .collect();
        let mut e = OnlineSeries::with_capacity(self.order + 1);
        e.push(ExactRational::one());
        for n in 1..=self.order {
            let conv = convolve_at(&weighted, &e.nums, n, 1);
            let den = &self.den * &e.den * BigInt::from(n);
            e.push(ExactRational::new(conv, den));
        }
        Ok(e.finish(self.order))
    }

    /// `s^e` for `s(0) = 1`, computed as `exp(e log s)`.
    pub fn pow_rational(&self, e: &ExactRational) -> Result<PowerSeries, SeriesError> {
        if !self.constant_is_one() {
            return Err(SeriesError::PowNeedsUnitConstant);
        }
        if e.is_zero() {
            return Ok(Self::one(self.order));
        }
        self.log()?.scale(e).exp()
    }

    fn constant_is_one(&self) -> bool {
        self.nums[0] == self.den
    }

    /// Compositional inverse by order-doubling Newton iteration:
    /// `g <- g - (s(g) - u) / s'(g)`.
    pub fn comp_inverse(&self) -> Result<PowerSeries, SeriesError> {
        self.check_invertible()?;
        let n = self.order;
        let u = Self::variable(n);
        let mut g = Self::monomial(&self.coeff(1).recip(), 1, n.max(1)).truncate(1);
        let mut k = 1;
        while k < n {
            let next = (2 * k).min(n);
            let g_ext = g.pad_to(next);
            let s = self.truncate(next);
            let residual = s.compose(&g_ext)?.sub(&u.truncate(next));
            let slope = s.derivative().compose(&g_ext.truncate(next - 1))?;
            // residual has valuation >= k+1; divide it out to keep full order
            let step = residual
                .shift_down(k + 1)?
                .div(&slope.truncate(next - k - 1))?
                .shift_up(k + 1);
            g = g_ext.sub(&step);
            k = next;
        }
        Ok(g.pad_to(n).truncate(n))
    }

    /// Compositional inverse by Lagrange coefficient extraction,
    /// `[u^n] g = (1/n) [z^(n-1)] (z / s(z))^n`. Cubic cost; kept as an
    /// independent check on [`PowerSeries::comp_inverse`].
    #[allow(clippy::needless_range_loop)]
    pub fn comp_inverse_lagrange(&self) -> Result<PowerSeries, SeriesError> {
        self.check_invertible()?;
        let n = self.order;
        let phi = self.shift_down(1)?.recip()?;
        let mut coeffs = vec![ExactRational::zero(); n + 1];
        let mut power = Self::one(phi.order);
        for m in 1..=n {
            power = power.mul(&phi);
            coeffs[m] = power.coeff(m - 1) / (m as i64);
        }
        Ok(Self::from_coeffs(&coeffs))
    }

    fn check_invertible(&self) -> Result<(), SeriesError> {
        if self.order == 0 || !self.nums[0].is_zero() || self.nums[1].is_zero() {
            return Err(SeriesError::NotInvertible);
        }
        Ok(())
    }

    /// Raises the order by appending zero coefficients; used where the
    /// caller knows the extra coefficients are genuinely zero or is about
    /// to overwrite them.
    pub fn pad_to(&self, order: usize) -> PowerSeries {
        if order <= self.order {
            return self.clone();
        }
        let mut nums = self.nums.clone();
        nums.resize(order + 1, BigInt::zero());
        PowerSeries {
            order,
            den: self.den.clone(),
            nums,
        }
    }

    /// Value of the truncated polynomial at `x`.
    pub fn eval_polynomial(&self, x: &ExactRational) -> ExactRational {
        let mut acc = ExactRational::zero();
        for n in (0..=self.order).rev() {
            acc = acc * x + self.coeff(n);
        }
        acc
    }

    /// Sum of all stored coefficients.
    pub fn coeff_sum(&self) -> ExactRational {
        let total: BigInt = self.nums.iter().sum();
        ExactRational::new(total, self.den.clone())
    }

    pub fn to_f64_vec(&self) -> Vec<f64> {
        (0..=self.order).map(|n| self.coeff(n).to_f64()).collect()
    }
}

/// Coefficients of `1/t`, produced one at a time so callers can stop early.
pub struct ReciprocalStream<'a> {
    t: &'a PowerSeries,
    q: OnlineSeries,
}

impl PowerSeries {
    pub fn recip_stream(&self) -> Result<ReciprocalStream<'_>, SeriesError> {
        if self.nums[0].is_zero() {
            return Err(SeriesError::DivisionByNonUnit);
        }
        Ok(ReciprocalStream {
            t: self,
            q: OnlineSeries::with_capacity(self.order + 1),
        })
    }
}

impl ReciprocalStream<'_> {
    /// Number of coefficients produced so far.
    pub fn produced(&self) -> usize {
        self.q.nums.len()
    }

    /// Sign of the most recently produced coefficient.
    pub fn last_signum(&self) -> i32 {
        match self.q.nums.last() {
            Some(x) if x.is_positive() => 1,
            Some(x) if x.is_negative() => -1,
            _ => 0,
        }
    }

    /// The coefficients produced so far as a series (order = count - 1).
    pub fn into_series(self) -> Option<PowerSeries> {
        let n = self.q.nums.len();
        (n > 0).then(|| self.q.finish(n - 1))
    }
}

impl Iterator for ReciprocalStream<'_> {
    type Item = ExactRational;

    fn next(&mut self) -> Option<ExactRational> {
        let n = self.q.nums.len();
        if n > self.t.order {
            return None;
        }
        let conv = convolve_at(&self.t.nums, &self.q.nums, n, 1);
        let lead = if n == 0 {
            &self.t.den * &self.q.den
        } else {
            BigInt::zero()
        };
        let c = ExactRational::new(lead - conv, &self.q.den * &self.t.nums[0]);
        self.q.push(c.clone());
        Some(c)
    }
}

/// `sum_{k=start..=n} a[k] * b[n-k]` over integer numerators.
#[allow(clippy::needless_range_loop)]
fn convolve_at(a: &[BigInt], b: &[BigInt], n: usize, start: usize) -> BigInt {
    let mut acc = BigInt::zero();
    for k in start..=n.min(a.len().saturating_sub(1)) {
        let bk = n - k;
        if bk >= b.len() || a[k].is_zero() || b[bk].is_zero() {
            continue;
        }
        acc += &a[k] * &b[bk];
    }
    acc
}

/// A series being built one coefficient at a time, kept on a common
/// denominator so the convolutions in `div`/`exp` stay in integers.
struct OnlineSeries {
    den: BigInt,
    nums: Vec<BigInt>,
}

impl OnlineSeries {
    fn with_capacity(n: usize) -> Self {
        OnlineSeries {
            den: BigInt::one(),
            nums: Vec::with_capacity(n),
        }
    }

    fn push(&mut self, c: ExactRational) {
        let d = c.denom();
        if !self.den.is_multiple_of(d) {
            let f = d / self.den.gcd(d);
            for x in &mut self.nums {
                *x *= &f;
            }
            self.den *= &f;
        }
        self.nums.push(c.numer() * (&self.den / d));
    }

    fn finish(self, order: usize) -> PowerSeries {
        PowerSeries::from_parts(order, self.den, self.nums)
    }
}

impl fmt::Debug for PowerSeries {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "PowerSeries(order={}; ", self.order)?;
        for (n, c) in self.coeffs().iter().enumerate() {
            if n > 0 {
                write!(f, ", ")?;
            }
            write!(f, "{c}")?;
        }
        write!(f, ")")
    }
}

impl fmt::Display for PowerSeries {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut first = true;
        for n in 0..=self.order {
            if self.nums[n].is_zero() {
                continue;
            }
            if !first {
                write!(f, " + ")?;
            }
            first = false;
            match n {
                0 => write!(f, "{}", self.coeff(n))?,
                1 => write!(f, "({})u", self.coeff(n))?,
                _ => write!(f, "({})u^{n}", self.coeff(n))?,
            }
        }
        if first {
            write!(f, "0")?;
        }
        write!(f, " + O(u^{})", self.order + 1)
    }
}

macro_rules! series_binop {
    ($Trait:ident, $method:ident, $inherent:ident) => {
        impl<'a, 'b> $Trait<&'b PowerSeries> for &'a PowerSeries {
            type Output = PowerSeries;
            fn $method(self, rhs: &'b PowerSeries) -> PowerSeries {
                PowerSeries::$inherent(self, rhs)
            }
        }
    };
}

series_binop!(Add, add, add);
series_binop!(Sub, sub, sub);
series_binop!(Mul, mul, mul);

impl Neg for &PowerSeries {
    type Output = PowerSeries;
    fn neg(self) -> PowerSeries {
        PowerSeries::neg(self)
    }
}

impl Neg for PowerSeries {
    type Output = PowerSeries;
    fn neg(self) -> PowerSeries {
        PowerSeries::neg(&self)
    }
}

/// Wire form: `{"order": N, "coeffs": ["num/den", ...]}`.
#[derive(Serialize, Deserialize)]
struct SeriesRepr {
    order: usize,
    coeffs: Vec<ExactRational>,
}

impl Serialize for PowerSeries {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        SeriesRepr {
            order: self.order,
            coeffs: self.coeffs(),
        }
        .serialize(serializer)
    }
}

impl<'de> Deserialize<'de> for PowerSeries {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        let repr = SeriesRepr::deserialize(deserializer)?;
        PowerSeries::try_from_repr(repr.coeffs, repr.order).map_err(serde::de::Error::custom)
    }
}

impl PowerSeries {
    /// Coefficient list must not be longer than `order + 1`; a shorter list
    /// means the remaining coefficients are zero.
    pub fn try_from_repr(coeffs: Vec<ExactRational>, order: usize) -> Result<Self, SeriesError> {
        if coeffs.is_empty() || coeffs.len() > order + 1 {
            return Err(SeriesError::BadLength {
                len: coeffs.len(),
                order,
            });
        }
        Ok(Self::from_coeffs_with_order(&coeffs, order))
    }
}
