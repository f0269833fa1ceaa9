//! Offspring and progeny laws as truncated exact pmfs.
//!
//! A law is stored as a [`PowerSeries`] whose coefficients are the masses.
//! Laws from a closed-form family remember the family, so they can be
//! regenerated at any order; other laws are trusted only up to the order
//! they were given at, unless their masses already sum to exactly one.

use serde::Serialize;
use thiserror::Error;

use crate::rational::ExactRational;
use crate::series::{PowerSeries, SeriesError};
use crate::sibuya::{sibuya_gf, SibuyaError, SibuyaParams};
use crate::sibuya_progeny::{reciprocal_series, BParam};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum LawError {
    #[error("invalid law parameters: {0}")]
    InvalidParams(String),
    #[error("mass at index {index} is negative ({value})")]
    NegativeMass { index: usize, value: ExactRational },
    #[error("masses sum to {0}, which exceeds 1")]
    MassExceedsOne(ExactRational),
    #[error("a progeny law has no mass at 0, got {0}")]
    ProgenyAtomAtZero(ExactRational),
    #[error("law is known to order {available}, but order {requested} was requested")]
    InsufficientOrder { requested: usize, available: usize },
    #[error("normalizer 1-(1-{r})^{b} is irrational")]
    NonRationalNormalizer { b: ExactRational, r: ExactRational },
    #[error(transparent)]
    Series(#[from] SeriesError),
    #[error(transparent)]
    Sibuya(#[from] SibuyaError),
}

/// Closed-form offspring families.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
#[serde(tag = "family", rename_all = "kebab-case")]
pub enum OffspringFamily {
    /// `p_n = (1-alpha) alpha^n`, gf `(1-alpha)/(1-alpha z)`.
    Geometric { alpha: ExactRational },
    /// `h_b` tilted by `r`: gf `(1-(1-r)^b) u / (1-(1-ru)^b)`, `1 < b <= 2`,
    /// `0 < r <= 1`. At `r = 1` this is the law whose progeny is `s_{1/b}`.
    SibuyaOffspring { b: ExactRational, r: ExactRational },
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
#[serde(tag = "kind", content = "value", rename_all = "kebab-case")]
pub enum Mean {
    Exact(ExactRational),
    /// Truncated law: the true mean is at least this.
    LowerBound(ExactRational),
    Infinite,
}

impl Mean {
    /// Whether the mean is known to exceed 1.
    pub fn exceeds_one(&self) -> bool {
        match self {
            Mean::Exact(m) | Mean::LowerBound(m) => *m > 1,
            Mean::Infinite => true,
        }
    }

    pub fn to_f64(&self) -> f64 {
        match self {
            Mean::Exact(m) | Mean::LowerBound(m) => m.to_f64(),
            Mean::Infinite => f64::INFINITY,
        }
    }
}

fn validate_masses(series: &PowerSeries) -> Result<(), LawError> {
    for n in 0..=series.order() {
        if series.coeff_signum(n) < 0 {
            return Err(LawError::NegativeMass {
                index: n,
                value: series.coeff(n),
            });
        }
    }
    let total = series.coeff_sum();
    if total > 1 {
        return Err(LawError::MassExceedsOne(total));
    }
    Ok(())
}

fn open_unit(name: &str, x: &ExactRational) -> Result<(), LawError> {
    if x.is_positive() && *x < 1 {
        Ok(())
    } else {
        Err(LawError::InvalidParams(format!(
            "need 0 < {name} < 1, got {x}"
        )))
    }
}

/// `1 - (1-r)^b`, when rational.
pub(crate) fn sibuya_offspring_normalizer(
    b: &ExactRational,
    r: &ExactRational,
) -> Result<ExactRational, LawError> {
    (ExactRational::one() - r)
        .pow_exact(b)
        .map(|p| ExactRational::one() - p)
        .ok_or_else(|| LawError::NonRationalNormalizer {
            b: b.clone(),
            r: r.clone(),
        })
}

/// An offspring law `p_0, p_1, ...`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct OffspringLaw {
    series: PowerSeries,
    family: Option<OffspringFamily>,
}

impl OffspringLaw {
    pub const DEFAULT_ORDER: usize = 64;

    pub fn geometric(alpha: ExactRational, order: usize) -> Result<Self, LawError> {
        open_unit("alpha", &alpha)?;
        let mut coeffs = Vec::with_capacity(order + 1);
        let mut mass = ExactRational::one() - &alpha;
        for _ in 0..=order {
            coeffs.push(mass.clone());
            mass *= &alpha;
        }
        Ok(OffspringLaw {
            series: PowerSeries::from_coeffs(&coeffs),
            family: Some(OffspringFamily::Geometric { alpha }),
        })
    }

    /// The critical law `h_b`, whose progeny is `s_{1/b}`.
    pub fn sibuya_offspring(b: ExactRational, order: usize) -> Result<Self, LawError> {
        Self::tilted_sibuya_offspring(b, ExactRational::one(), order)
    }

    pub fn tilted_sibuya_offspring(
        b: ExactRational,
        r: ExactRational,
        order: usize,
    ) -> Result<Self, LawError> {
        if !(b > 1 && b <= 2) {
            return Err(LawError::InvalidParams(format!(
                "h_b is an offspring law only for 1 < b <= 2, got b = {b}"
            )));
        }
        if !r.is_positive() || r > 1 {
            return Err(LawError::InvalidParams(format!(
                "need 0 < r <= 1, got r = {r}"
            )));
        }
        let normalizer = sibuya_offspring_normalizer(&b, &r)?;
        let bp = BParam::new(b.clone()).expect("b > 1 checked");
        // b h_b = sum P_n u^n and the tilted gf is (C/r) h_b(ru)
        let p = reciprocal_series(&bp, order);
        let factor = normalizer / &b / &r;
        let mut coeffs = Vec::with_capacity(order + 1);
        let mut r_pow = ExactRational::one();
        for n in 0..=order {
            coeffs.push(&factor * &r_pow * p.coeff(n));
            r_pow *= &r;
        }
        Ok(OffspringLaw {
            series: PowerSeries::from_coeffs(&coeffs),
            family: Some(OffspringFamily::SibuyaOffspring { b, r }),
        })
    }

    /// No children: `p_0 = 1`.
    pub fn delta0() -> Self {
        OffspringLaw {
            series: PowerSeries::one(0),
            family: None,
        }
    }

    /// A validated law from explicit masses; trusted to `series.order()`.
    pub fn from_series(series: PowerSeries) -> Result<Self, LawError> {
        validate_masses(&series)?;
        Ok(OffspringLaw {
            series,
            family: None,
        })
    }

    pub fn from_masses(masses: &[ExactRational]) -> Result<Self, LawError> {
        if masses.is_empty() {
            return Err(LawError::InvalidParams("empty mass list".into()));
        }
        Self::from_series(PowerSeries::from_coeffs(masses))
    }

    pub fn series(&self) -> &PowerSeries {
        &self.series
    }

    pub fn family(&self) -> Option<&OffspringFamily> {
        self.family.as_ref()
    }

    pub fn order(&self) -> usize {
        self.series.order()
    }

    pub fn mass(&self, n: usize) -> ExactRational {
        self.series.coeff(n)
    }

    /// `1 - sum_{n <= order} p_n`.
    pub fn tail_mass(&self) -> ExactRational {
        ExactRational::one() - self.series.coeff_sum()
    }

    /// The masses already sum to one, so every later mass is zero.
    pub fn is_exactly_finite(&self) -> bool {
        self.tail_mass().is_zero()
    }

    /// Regenerates (families), pads (exactly finite laws) or truncates.
    pub fn at_order(&self, order: usize) -> Result<Self, LawError> {
        match &self.family {
            Some(OffspringFamily::Geometric { alpha }) => Self::geometric(alpha.clone(), order),
            Some(OffspringFamily::SibuyaOffspring { b, r }) => {
                Self::tilted_sibuya_offspring(b.clone(), r.clone(), order)
            }
            None if order <= self.order() => Ok(OffspringLaw {
                series: self.series.truncate(order),
                family: None,
            }),
            None if self.is_exactly_finite() => Ok(OffspringLaw {
                series: self.series.pad_to(order),
                family: None,
            }),
            None => Err(LawError::InsufficientOrder {
                requested: order,
                available: self.order(),
            }),
        }
    }

    pub fn mean(&self) -> Mean {
        match &self.family {
            Some(OffspringFamily::Geometric { alpha }) => {
                Mean::Exact(alpha / (ExactRational::one() - alpha))
            }
            Some(OffspringFamily::SibuyaOffspring { b, r }) => {
                if r.is_one() {
                    return Mean::Exact(ExactRational::one());
                }
                // r f'(r)/f(r) = 1 - r b (1-r)^{b-1} / (1 - (1-r)^b)
                let one_minus_r = ExactRational::one() - r;
                let pow_b = one_minus_r.pow_exact(b).expect("checked at construction");
                let m = ExactRational::one()
                    - r * b * &pow_b / &one_minus_r / (ExactRational::one() - &pow_b);
                Mean::Exact(m)
            }
            None => {
                let m: ExactRational = (1..=self.order())
                    .map(|n| self.series.coeff(n) * ExactRational::from(n as i64))
                    .sum();
                if self.is_exactly_finite() {
                    Mean::Exact(m)
                } else {
                    Mean::LowerBound(m)
                }
            }
        }
    }
}

/// Closed-form progeny families.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
#[serde(tag = "family", rename_all = "kebab-case")]
pub enum ProgenyFamily {
    /// `s_a^(rho)`; `rho = 1` is the plain Sibuya law.
    Sibuya {
        a: ExactRational,
        rho: ExactRational,
    },
}

/// A progeny law `q_1, q_2, ...` (no mass at 0).
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ProgenyLaw {
    series: PowerSeries,
    family: Option<ProgenyFamily>,
}

impl ProgenyLaw {
    pub fn sibuya(a: ExactRational, order: usize) -> Result<Self, LawError> {
        Self::tilted_sibuya(a, ExactRational::one(), order)
    }

    pub fn tilted_sibuya(
        a: ExactRational,
        rho: ExactRational,
        order: usize,
    ) -> Result<Self, LawError> {
        let params = SibuyaParams::tilted(a.clone(), rho.clone())?;
        if params.a >= 1 {
            return Err(LawError::InvalidParams(format!(
                "need 0 < a < 1, got a = {a}"
            )));
        }
        Ok(ProgenyLaw {
            series: sibuya_gf(&params, order)?,
            family: Some(ProgenyFamily::Sibuya { a, rho }),
        })
    }

    /// Total progeny 1: `q_1 = 1`.
    pub fn delta1() -> Self {
        ProgenyLaw {
            series: PowerSeries::variable(1),
            family: None,
        }
    }

    pub fn from_series(series: PowerSeries) -> Result<Self, LawError> {
        if !series.is_coeff_zero(0) {
            return Err(LawError::ProgenyAtomAtZero(series.coeff(0)));
        }
        validate_masses(&series)?;
        Ok(ProgenyLaw {
            series,
            family: None,
        })
    }

    /// Masses for `1, 2, ...`; index 0 is implicitly zero.
    pub fn from_masses(masses_from_one: &[ExactRational]) -> Result<Self, LawError> {
        if masses_from_one.is_empty() {
            return Err(LawError::InvalidParams("empty mass list".into()));
        }
        let mut coeffs = vec![ExactRational::zero()];
        coeffs.extend_from_slice(masses_from_one);
        Self::from_series(PowerSeries::from_coeffs(&coeffs))
    }

    pub(crate) fn with_family(series: PowerSeries, family: Option<ProgenyFamily>) -> Self {
        ProgenyLaw { series, family }
    }

    pub fn series(&self) -> &PowerSeries {
        &self.series
    }

    pub fn family(&self) -> Option<&ProgenyFamily> {
        self.family.as_ref()
    }

    pub fn order(&self) -> usize {
        self.series.order()
    }

    pub fn mass(&self, n: usize) -> ExactRational {
        self.series.coeff(n)
    }

    pub fn tail_mass(&self) -> ExactRational {
        ExactRational::one() - self.series.coeff_sum()
    }

    pub fn is_exactly_finite(&self) -> bool {
        self.tail_mass().is_zero()
    }

    pub fn at_order(&self, order: usize) -> Result<Self, LawError> {
        match &self.family {
            Some(ProgenyFamily::Sibuya { a, rho }) => {
                Self::tilted_sibuya(a.clone(), rho.clone(), order)
            }
            None if order <= self.order() => Ok(ProgenyLaw {
                series: self.series.truncate(order),
                family: None,
            }),
            None if self.is_exactly_finite() => Ok(ProgenyLaw {
                series: self.series.pad_to(order),
                family: None,
            }),
            None => Err(LawError::InsufficientOrder {
                requested: order,
                available: self.order(),
            }),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rational::rat;

    #[test]
    fn geometric_masses_and_mean() {
        let p = OffspringLaw::geometric(rat(3, 10), 5).unwrap();
        assert_eq!(p.mass(0), rat(7, 10));
        assert_eq!(p.mass(2), rat(63, 1000));
        assert_eq!(p.mean(), Mean::Exact(rat(3, 7)));
        assert_eq!(p.at_order(9).unwrap().order(), 9);
        assert!(OffspringLaw::geometric(rat(1, 1), 5).is_err());
    }

    #[test]
    fn sibuya_offspring_b_two_is_geometric_half() {
        let h = OffspringLaw::sibuya_offspring(rat(2, 1), 30).unwrap();
        let g = OffspringLaw::geometric(rat(1, 2), 30).unwrap();
        assert_eq!(h.series(), g.series());
        assert_eq!(h.mean(), Mean::Exact(rat(1, 1)));
        // tilt r = 1/2: normalizer 3/4, gf 3/(4 - u) = geometric(1/4)
        let t = OffspringLaw::tilted_sibuya_offspring(rat(2, 1), rat(1, 2), 30).unwrap();
        let g4 = OffspringLaw::geometric(rat(1, 4), 30).unwrap();
        assert_eq!(t.series(), g4.series());
        assert_eq!(t.mean(), Mean::Exact(rat(1, 3)));
    }

    #[test]
    fn sibuya_offspring_masses() {
        let h = OffspringLaw::sibuya_offspring(rat(3, 2), 40).unwrap();
        assert_eq!(h.mass(0), rat(2, 3));
        assert_eq!(h.mass(1), rat(1, 6));
        assert!((0..=40).all(|n| !h.mass(n).is_negative()));
        assert!(h.tail_mass().is_positive());
        assert!(OffspringLaw::sibuya_offspring(rat(5, 2), 10).is_err());
        assert!(matches!(
            OffspringLaw::tilted_sibuya_offspring(rat(3, 2), rat(1, 2), 10),
            Err(LawError::NonRationalNormalizer { .. })
        ));
    }

    #[test]
    fn truncated_laws_track_order() {
        let p = OffspringLaw::from_masses(&[rat(1, 2), rat(1, 4)]).unwrap();
        assert_eq!(p.mean(), Mean::LowerBound(rat(1, 4)));
        assert!(matches!(
            p.at_order(3),
            Err(LawError::InsufficientOrder { .. })
        ));
        let f = OffspringLaw::from_masses(&[rat(1, 2), rat(0, 1), rat(1, 2)]).unwrap();
        assert!(f.is_exactly_finite());
        assert_eq!(f.mean(), Mean::Exact(rat(1, 1)));
        assert_eq!(f.at_order(6).unwrap().mass(6), rat(0, 1));
        assert!(matches!(
            OffspringLaw::from_masses(&[rat(1, 2), rat(-1, 4)]),
            Err(LawError::NegativeMass { index: 1, .. })
        ));
        assert!(matches!(
            OffspringLaw::from_masses(&[rat(3, 4), rat(1, 2)]),
            Err(LawError::MassExceedsOne(_))
        ));
    }

    #[test]
    fn progeny_law_constructors() {
        let q = ProgenyLaw::sibuya(rat(1, 2), 4).unwrap();
        assert_eq!(q.mass(1), rat(1, 2));
        assert_eq!(q.mass(2), rat(1, 8));
        assert!(ProgenyLaw::delta1().is_exactly_finite());
        assert!(matches!(
            ProgenyLaw::from_series(PowerSeries::from_coeffs(&[rat(1, 2), rat(1, 2)])),
            Err(LawError::ProgenyAtomAtZero(_))
        ));
        let t = ProgenyLaw::tilted_sibuya(rat(1, 2), rat(21, 25), 3).unwrap();
        // normalizer 1 - (4/25)^{1/2} = 3/5
        assert_eq!(t.mass(1), rat(1, 2) * rat(21, 25) / rat(3, 5));
    }
}
