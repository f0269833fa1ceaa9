//! The Sibuya family: exact masses and generating functions, plus the
//! event-based sampler.
//!
//! For `0 < a < 1`, `s_a` has generating function `1 - (1-z)^a` and mass
//! `s_a(n) = a(1-a)(2-a)...(n-1-a)/n!`. Note that this equals `-(-a)_n/n!`;
//! the rising factorial `(-a)_n` itself is negative for `n >= 1`.
//!
//! Three variants are supported, at most one at a time:
//! - generalized `s_{a,k}` (integer `k >= 1`, `0 < a < k+1`), the first
//!   success time of independent events with probabilities `a/(n+k)`;
//! - the tilted law `s_a^(rho)` with gf `(1-(1-rho z)^a)/(1-(1-rho)^a)`;
//! - the zero-atom mixture `(1-lambda) delta_0 + lambda s_a`.

use rand::Rng;
use thiserror::Error;

use crate::rational::ExactRational;
use crate::series::PowerSeries;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum SibuyaError {
    #[error("invalid Sibuya parameters: {0}")]
    InvalidParams(String),
    #[error("normalizer 1-(1-{rho})^{a} is irrational; pick rho so that (1-rho)^a is rational")]
    NonRationalNormalizer {
        a: ExactRational,
        rho: ExactRational,
    },
    #[error("the event-based sampler supports only the plain and generalized laws (rho = 1, lambda = 1)")]
    UnsupportedSampler,
    #[error("sampled value exceeds {0}; draw is too large to represent")]
    SamplerOverflow(u64),
}

/// Parameters of a Sibuya-type law. `k = 0`, `rho = 1`, `lambda = 1` is
/// the plain `s_a`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SibuyaParams {
    pub a: ExactRational,
    pub k: u32,
    pub rho: ExactRational,
    pub lambda: ExactRational,
}

impl SibuyaParams {
    pub fn plain(a: ExactRational) -> Result<Self, SibuyaError> {
        Self::new(a, 0, ExactRational::one(), ExactRational::one())
    }

    pub fn generalized(a: ExactRational, k: u32) -> Result<Self, SibuyaError> {
        Self::new(a, k, ExactRational::one(), ExactRational::one())
    }

    pub fn tilted(a: ExactRational, rho: ExactRational) -> Result<Self, SibuyaError> {
        Self::new(a, 0, rho, ExactRational::one())
    }

    pub fn with_zero_atom(a: ExactRational, lambda: ExactRational) -> Result<Self, SibuyaError> {
        Self::new(a, 0, ExactRational::one(), lambda)
    }

    pub fn new(
        a: ExactRational,
        k: u32,
        rho: ExactRational,
        lambda: ExactRational,
    ) -> Result<Self, SibuyaError> {
        let p = SibuyaParams { a, k, rho, lambda };
        p.validate()?;
        Ok(p)
    }

    pub fn validate(&self) -> Result<(), SibuyaError> {
        let bad = |msg: String| Err(SibuyaError::InvalidParams(msg));
        let upper = ExactRational::from(self.k as i64 + 1);
        if !self.a.is_positive() || self.a >= upper {
            return bad(format!("need 0 < a < {upper}, got a = {}", self.a));
        }
        if self.k > 0 && self.a.is_integer() && self.a <= self.k as i64 {
            return bad(format!(
                "a = {} is an integer <= k = {}; the generalized gf degenerates",
                self.a, self.k
            ));
        }
        if !self.rho.is_positive() || self.rho > 1 {
            return bad(format!("need 0 < rho <= 1, got rho = {}", self.rho));
        }
        if !self.lambda.is_positive() || self.lambda > 1 {
            return bad(format!(
                "need 0 < lambda <= 1, got lambda = {}",
                self.lambda
            ));
        }
        let extensions =
            (self.k != 0) as u8 + (!self.rho.is_one()) as u8 + (!self.lambda.is_one()) as u8;
        if extensions > 1 {
            return bad("at most one of k, rho, lambda may differ from its default".into());
        }
        Ok(())
    }

    pub fn is_plain(&self) -> bool {
        self.k == 0 && self.rho.is_one() && self.lambda.is_one()
    }

    /// `1 - (1-rho)^a`, exactly; `1` when untilted.
    fn tilt_normalizer(&self) -> Result<ExactRational, SibuyaError> {
        if self.rho.is_one() {
            return Ok(ExactRational::one());
        }
        let base = ExactRational::one() - &self.rho;
        base.pow_exact(&self.a)
            .map(|p| ExactRational::one() - p)
            .ok_or_else(|| SibuyaError::NonRationalNormalizer {
                a: self.a.clone(),
                rho: self.rho.clone(),
            })
    }
}

/// Rising factorial `(x)_n = x (x+1) ... (x+n-1)`, with `(x)_0 = 1`.
pub fn pochhammer(x: &ExactRational, n: usize) -> ExactRational {
    (0..n).map(|i| x + ExactRational::from(i as i64)).product()
}

/// Taylor coefficients `(-a)_j / j!` of `(1-z)^a` for `j = 0..=n`.
fn binomial_coeffs(a: &ExactRational, n: usize) -> Vec<ExactRational> {
    let mut out = Vec::with_capacity(n + 1);
    out.push(ExactRational::one());
    for j in 1..=n {
        let next = &out[j - 1] * (ExactRational::from(j as i64 - 1) - a) / (j as i64);
        out.push(next);
    }
    out
}

/// Exact probability mass at `n >= 1`.
pub fn sibuya_pmf(params: &SibuyaParams, n: u64) -> Result<ExactRational, SibuyaError> {
    params.validate()?;
    if n == 0 {
        return Err(SibuyaError::InvalidParams("pmf index must be >= 1".into()));
    }
    let gf = sibuya_gf(params, n as usize)?;
    Ok(gf.coeff(n as usize))
}

/// The generating function as an exact series of the given order.
///
/// For `k > 0` the coefficients are extracted from
/// `(P_k(z) - (1-z)^a) / (z^k P_k(1))`, where `P_k` is the degree-`k`
/// Taylor polynomial of `(1-z)^a`.
pub fn sibuya_gf(params: &SibuyaParams, order: usize) -> Result<PowerSeries, SibuyaError> {
    params.validate()?;
    let k = params.k as usize;
    let taylor = binomial_coeffs(&params.a, order + k);
    let pk_at_one: ExactRational = taylor[..=k].iter().sum();
    let normalizer = params.tilt_normalizer()?;
    let mut coeffs = Vec::with_capacity(order + 1);
    coeffs.push(ExactRational::one() - &params.lambda);
    let mut rho_pow = ExactRational::one();
    for n in 1..=order {
        rho_pow *= &params.rho;
        let raw = -&taylor[n + k] / &pk_at_one;
        coeffs.push(raw * &params.lambda * &rho_pow / &normalizer);
    }
    Ok(PowerSeries::from_coeffs(&coeffs))
}

/// `Pr(S > n)`. For the plain and generalized laws this is the product
/// `prod_{j=1..n} (1 - a/(j+k))`; the tilted and atom variants use
/// `1 - sum_{m<=n} pmf(m)`.
pub fn sibuya_survival(params: &SibuyaParams, n: u64) -> Result<ExactRational, SibuyaError> {
    params.validate()?;
    if params.rho.is_one() {
        let k = params.k as i64;
        let prod: ExactRational = (1..=n as i64)
            .map(|j| ExactRational::one() - &params.a / (j + k))
            .product();
        return Ok(prod * &params.lambda);
    }
    let gf = sibuya_gf(params, n as usize)?;
    Ok(ExactRational::one() - gf.coeff_sum())
}

/// One draw of `min{n : A_n occurs}` where the `A_n` are independent with
/// `Pr(A_n) = a/(n+k)`.
pub fn sibuya_sample<R: Rng + ?Sized>(
    params: &SibuyaParams,
    rng: &mut R,
) -> Result<u64, SibuyaError> {
    params.validate()?;
    if !params.rho.is_one() || !params.lambda.is_one() {
        return Err(SibuyaError::UnsupportedSampler);
    }
    EventSampler::new(params.a.to_f64(), params.k as f64).sample(rng)
}

/// Floating-point sampler for the first success among independent events
/// with `Pr(A_n) = a/(n+k)`, valid for `0 < a <= k+1`.
///
/// The first [`EventSampler::PREFIX`] events are simulated as individual
/// Bernoulli trials. Past that, the remaining wait is drawn by inverting the
/// conditional survival function
/// `Pr(S > n | S > m) = Gamma(n+k+1-a) Gamma(m+k+1) / (Gamma(n+k+1) Gamma(m+k+1-a))`
/// with a galloping search, so heavy-tailed draws cost `O(log n)`.
#[derive(Debug, Clone, Copy)]
pub struct EventSampler {
    a: f64,
    k: f64,
}

impl EventSampler {
    pub const PREFIX: u64 = 64;
    /// Largest representable draw.
    pub const MAX_VALUE: u64 = 1 << 62;
    /// Hard cap on loop iterations per draw.
    pub const MAX_ITERATIONS: u64 = 1_000_000_000;

    pub fn new(a: f64, k: f64) -> Self {
        debug_assert!(a > 0.0 && a <= k + 1.0);
        EventSampler { a, k }
    }

    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> Result<u64, SibuyaError> {
        for n in 1..=Self::PREFIX {
            if rng.random::<f64>() < self.a / (n as f64 + self.k) {
                return Ok(n);
            }
        }
        let target = (1.0 - rng.random::<f64>()).ln();
        let base = self.log_survival_kernel(Self::PREFIX);
        let above = |n: u64| self.log_survival_kernel(n) - base > target;

        let mut lo = Self::PREFIX;
        let mut hi = Self::PREFIX + 1;
        let mut iterations = 0u64;
        while above(hi) {
            lo = hi;
            if hi >= Self::MAX_VALUE {
                return Err(SibuyaError::SamplerOverflow(Self::MAX_VALUE));
            }
            hi = hi.saturating_mul(2).min(Self::MAX_VALUE);
            iterations += 1;
            if iterations > Self::MAX_ITERATIONS {
                return Err(SibuyaError::SamplerOverflow(hi));
            }
        }
        while hi - lo > 1 {
            let mid = lo + (hi - lo) / 2;
            if above(mid) {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        Ok(hi)
    }

    /// `ln Gamma(n+k+1-a) - ln Gamma(n+k+1)`; differences of this give the
    /// log conditional survival.
    fn log_survival_kernel(&self, n: u64) -> f64 {
        ln_gamma_ratio(n as f64 + self.k + 1.0, -self.a)
    }
}

/// `ln Gamma(x + c) - ln Gamma(x)` for large `x` (here `x > 60`), from the
/// Stirling series written so that no large terms cancel.
fn ln_gamma_ratio(x: f64, c: f64) -> f64 {
    fn tail(z: f64) -> f64 {
        let z2 = z * z;
        1.0 / (12.0 * z) - 1.0 / (360.0 * z * z2) + 1.0 / (1260.0 * z * z2 * z2)
    }
    (x - 0.5) * (c / x).ln_1p() + c * (x + c).ln() - c + tail(x + c) - tail(x)
}
