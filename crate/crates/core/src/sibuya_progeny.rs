//! When is `s_{1/b}` a progeny?
//!
//! The offspring law whose progeny is `s_a` (if it exists) has generating
//! function `h_b(u) = u / (1 - (1-u)^b)` with `b = 1/a`, so `s_a` is a
//! progeny exactly when every Taylor coefficient of `h_b` is nonnegative.
//! This module computes those coefficients exactly and searches for the
//! first negative one.
//!
//! Notation used below:
//! - `Psi(u) = (1 - (1-u)^b) / (b u) = sum p_n u^n`, with
//!   `p_n = (1-b)_n / (n+1)!` (closed form, cheap to any order);
//! - `b h_b(u) = 1 / Psi(u) = 1 + (b-1)/2 u + sum_{n>=2} P_n u^n`;
//! - `H(u) = (1 - Psi(u)) / u`, so that `b h_b = 1 / (1 - u H)`. For
//!   `1 < b <= 2` every coefficient of `H` is nonnegative, which certifies
//!   positivity of all `P_n` at once;
//! - with `v = (b-1)u/2`, `A_n = P_n (2/(b-1))^n` and `a_n = p_n (2/(b-1))^n`.
//!
//! Sign decisions near `b = 2` depend on cancellations far below `f64`
//! resolution, so everything here is exact.

use std::time::{Duration, Instant};

use rayon::prelude::*;
use serde::Serialize;
use thiserror::Error;

use crate::rational::ExactRational;
use crate::series::{PowerSeries, SeriesError};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum CertifyError {
    #[error("b must satisfy b > 1, got {0}")]
    InvalidB(ExactRational),
    #[error("n_max must be at least 2, got {0}")]
    NMaxTooSmall(usize),
}

/// The exponent `b = 1/a > 1`.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
#[serde(transparent)]
pub struct BParam(ExactRational);

impl BParam {
    pub fn new(b: ExactRational) -> Result<Self, CertifyError> {
        if b > 1 {
            Ok(BParam(b))
        } else {
            Err(CertifyError::InvalidB(b))
        }
    }

    /// `b = 1/a` for a Sibuya parameter `0 < a < 1`.
    pub fn from_sibuya_a(a: &ExactRational) -> Result<Self, CertifyError> {
        if !a.is_positive() {
            return Err(CertifyError::InvalidB(a.clone()));
        }
        Self::new(a.recip())
    }

    pub fn value(&self) -> &ExactRational {
        &self.0
    }

    /// `1 < b <= 2`, where the `H` certificate applies.
    pub fn in_certified_window(&self) -> bool {
        self.0 <= 2
    }
}

/// `Psi(u) = (1-(1-u)^b)/(bu)`, coefficients `(1-b)_n/(n+1)!`.
pub fn psi_series(b: &BParam, order: usize) -> PowerSeries {
    let b = b.value();
    let mut coeffs = Vec::with_capacity(order + 1);
    coeffs.push(ExactRational::one());
    for n in 1..=order {
        let n_i = n as i64;
        let next = &coeffs[n - 1] * (ExactRational::from(n_i) - b) / (n_i + 1);
        coeffs.push(next);
    }
    PowerSeries::from_coeffs(&coeffs)
}

/// `b u / (1 - (1-u)^b) = 1/Psi(u)`; the coefficient of `u^n` is `P_n`.
pub fn reciprocal_series(b: &BParam, order: usize) -> PowerSeries {
    psi_series(b, order)
        .recip()
        .expect("Psi has constant term 1")
}

/// `h_b(u) = u/(1-(1-u)^b)` built from the generic series primitives:
/// `(1-u)^b` by `pow_rational`, then `1 - (1-u)^b = b u Psi(u)` with the
/// factor `u` removed before dividing.
pub fn hb_series(b: &BParam, order: usize) -> Result<PowerSeries, SeriesError> {
    let one_minus_u = PowerSeries::from_integers(&[1, -1]).pad_to(order + 1);
    let g = PowerSeries::one(order + 1).sub(&one_minus_u.pow_rational(b.value())?);
    let g_over_u = g.shift_down(1)?;
    PowerSeries::one(order).div(&g_over_u)
}

/// `H(u) = (b-1)/2 + sum_{n>=1} (b-1)(2-b)(3-b)...(n+1-b) u^n/(n+2)!`.
pub fn h_series(b: &BParam, order: usize) -> PowerSeries {
    let b = b.value();
    let mut coeffs = Vec::with_capacity(order + 1);
    coeffs.push((b - 1) / 2);
    let mut prod = b - 1;
    let mut fact = ExactRational::from(2);
    for n in 1..=order {
        let n_i = n as i64;
        prod *= ExactRational::from(n_i + 1) - b;
        fact *= ExactRational::from(n_i + 2);
        coeffs.push(&prod / &fact);
    }
    PowerSeries::from_coeffs(&coeffs)
}

/// Checks `b h_b(u) (1 - u H(u)) = 1` exactly to the given order, with
/// `b h_b` supplied by the caller (typically [`reciprocal_series`]).
pub fn louis_identity_holds(b: &BParam, b_hb: &PowerSeries) -> bool {
    let order = b_hb.order();
    let one_minus_uh = PowerSeries::one(order).sub(&h_series(b, order).shift_up(1));
    b_hb.mul(&one_minus_uh) == PowerSeries::one(order)
}

/// The rescaled coefficient sequences in the variable `v = (b-1)u/2`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct ScaledSeriesPair {
    pub b: ExactRational,
    /// `A_0 .. A_N`, with `A_0 = A_1 = 1`.
    pub big: Vec<ExactRational>,
    /// `a_0 .. a_N`, with `a_0 = 1`, `a_1 = -1`.
    pub small: Vec<ExactRational>,
}

pub fn scaled_pair(b: &BParam, order: usize) -> ScaledSeriesPair {
    let scale = ExactRational::from(2) / (b.value() - 1);
    let rescale = |s: PowerSeries| s.scale_variable(&scale).coeffs();
    ScaledSeriesPair {
        b: b.value().clone(),
        big: rescale(reciprocal_series(b, order)),
        small: rescale(psi_series(b, order)),
    }
}

impl ScaledSeriesPair {
    pub fn order(&self) -> usize {
        self.big.len() - 1
    }

    /// `a_n + a_{n-1} + sum_{k=2}^{n-2} A_{n-k} a_k - (A_{n-1} - A_n)`,
    /// which vanishes for `n >= 4`.
    pub fn recurrence_residual(&self, n: usize) -> ExactRational {
        assert!(n >= 4 && n <= self.order());
        let (a, big) = (&self.small, &self.big);
        let conv: ExactRational = (2..=n - 2).map(|k| &big[n - k] * &a[k]).sum();
        &a[n] + &a[n - 1] + conv - (&big[n - 1] - &big[n])
    }

    /// `a_{n+1} / a_n`; tends to `2/(b-1)`.
    pub fn small_ratio(&self, n: usize) -> ExactRational {
        &self.small[n + 1] / &self.small[n]
    }

    pub fn big_series(&self) -> PowerSeries {
        PowerSeries::from_coeffs(&self.big)
    }

    pub fn small_series(&self) -> PowerSeries {
        PowerSeries::from_coeffs(&self.small)
    }
}

/// Outcome of a coefficient-sign scan for one `b`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct CertificateReport {
    pub b: ExactRational,
    pub n_max: usize,
    /// Smallest `n <= n_max` with `P_n < 0`.
    pub first_negative: Option<usize>,
    pub value_at_first_negative: Option<ExactRational>,
    /// `Some(true)` when the `H` identity was checked and holds to `n_max`.
    pub louis_identity: Option<bool>,
    /// `1 < b <= 2`, `H` has no negative coefficient up to `n_max`, and the
    /// identity holds: positivity then holds for every `n`, not just `n <= n_max`.
    pub structural_certificate: bool,
    #[serde(serialize_with = "serialize_ms")]
    pub elapsed: Duration,
}

fn serialize_ms<S: serde::Serializer>(d: &Duration, s: S) -> Result<S::Ok, S::Error> {
    s.serialize_f64(d.as_secs_f64() * 1e3)
}

const FIRST_WINDOW: usize = 64;

/// Scans `P_2 .. P_{n_max}` and stops at the first negative one.
pub fn first_negative(b: &BParam, n_max: usize) -> Result<CertificateReport, CertifyError> {
    if n_max < 2 {
        return Err(CertifyError::NMaxTooSmall(n_max));
    }
    let start = Instant::now();
    // Psi's coefficients grow with the order, so scan in doubling windows
    // rather than building Psi to n_max up front.
    let mut order = n_max.min(FIRST_WINDOW);
    let found = loop {
        let psi = psi_series(b, order);
        let stream = psi.recip_stream().expect("Psi has constant term 1");
        let hit = stream.enumerate().find(|(n, c)| *n >= 2 && c.is_negative());
        if hit.is_some() || order == n_max {
            break hit;
        }
        order = (2 * order).min(n_max);
    };
    Ok(CertificateReport {
        b: b.value().clone(),
        n_max,
        first_negative: found.as_ref().map(|(n, _)| *n),
        value_at_first_negative: found.map(|(_, c)| c),
        louis_identity: None,
        structural_certificate: false,
        elapsed: start.elapsed(),
    })
}

/// [`first_negative`] plus, for `1 < b <= 2`, the structural check of the
/// `H` certificate to the same order.
pub fn certify(b: &BParam, n_max: usize) -> Result<CertificateReport, CertifyError> {
    if !b.in_certified_window() {
        return first_negative(b, n_max);
    }
    if n_max < 2 {
        return Err(CertifyError::NMaxTooSmall(n_max));
    }
    let start = Instant::now();
    let b_hb = reciprocal_series(b, n_max);
    let found = (2..=n_max).find(|&n| b_hb.coeff_signum(n) < 0);
    let identity = louis_identity_holds(b, &b_hb);
    let h = h_series(b, n_max);
    let h_nonnegative = (0..=n_max).all(|n| h.coeff_signum(n) >= 0);
    Ok(CertificateReport {
        b: b.value().clone(),
        n_max,
        first_negative: found,
        value_at_first_negative: found.map(|n| b_hb.coeff(n)),
        louis_identity: Some(identity),
        structural_certificate: identity && h_nonnegative && found.is_none(),
        elapsed: start.elapsed(),
    })
}

/// One report per grid point, in input order.
pub fn certify_interval(
    grid: &[BParam],
    n_max: usize,
) -> Result<Vec<CertificateReport>, CertifyError> {
    grid.par_iter().map(|b| certify(b, n_max)).collect()
}

/// `b` values `from, from+step, ...` up to and including `to`.
pub fn rational_grid(
    from: &ExactRational,
    to: &ExactRational,
    step: &ExactRational,
) -> Result<Vec<BParam>, CertifyError> {
    if !step.is_positive() {
        return Err(CertifyError::InvalidB(step.clone()));
    }
    let mut out = Vec::new();
    let mut b = from.clone();
    while &b <= to {
        out.push(BParam::new(b.clone())?);
        b += step;
    }
    Ok(out)
}

/// `3^{-n/2} sin((n+1) pi/6) / sin(pi/6)`, the coefficients of
/// `1/(1 - u + u^2/3) = 3 h_3(u)`.
pub fn h3_closed_form(n: usize) -> f64 {
    let theta = std::f64::consts::PI / 6.0;
    3f64.powf(-(n as f64) / 2.0) * ((n as f64 + 1.0) * theta).sin() / theta.sin()
}

/// Stated closed forms for `P_2 .. P_5`, checked against the expansion.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct ClosedFormRow {
    pub n: usize,
    pub b: ExactRational,
    pub stated: ExactRational,
    pub expansion: ExactRational,
    /// `stated / expansion`, when the expansion is nonzero.
    pub ratio: Option<ExactRational>,
}

/// The formulas `P_2 = (b^2-1)/6`, `P_3 = (b^2-1)/4`,
/// `P_4 = (19-b^2)(b^2-1)/30`, `P_5 = (9-b^2)(b^2-1)/4`.
///
/// Against the series expansion each is off by exactly `n!`: they are the
/// derivatives `d^n/du^n` at 0 rather than Taylor coefficients. The sign
/// pattern, and hence `P_5 < 0` for `b > 3`, is unaffected.
pub fn stated_closed_form(b: &ExactRational, n: usize) -> Option<ExactRational> {
    let b2m1 = b * b - 1;
    let b2 = b * b;
    match n {
        2 => Some(b2m1 / 6),
        3 => Some(b2m1 / 4),
        4 => Some((ExactRational::from(19) - b2) * b2m1 / 30),
        5 => Some((ExactRational::from(9) - b2) * b2m1 / 4),
        _ => None,
    }
}

pub fn closed_form_comparison(bs: &[BParam]) -> Vec<ClosedFormRow> {
    let mut rows = Vec::new();
    for b in bs {
        let p = reciprocal_series(b, 5);
        for n in 2..=5 {
            let stated = stated_closed_form(b.value(), n).expect("n in 2..=5");
            let expansion = p.coeff(n);
            let ratio = (!expansion.is_zero()).then(|| &stated / &expansion);
            rows.push(ClosedFormRow {
                n,
                b: b.value().clone(),
                stated,
                expansion,
                ratio,
            });
        }
    }
    rows
}
