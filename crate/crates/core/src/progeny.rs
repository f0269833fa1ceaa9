//! The map between an offspring law `p` and the law `q` of the total
//! progeny, tied together by `f_q(z) = z f_p(f_q(z))`.
//!
//! Forward, `q_n = [u^{n-1}] f_p(u)^n / n` (Lagrange), cross-checked by a
//! Newton solve of the functional equation. Backward, `f_p(u) = u / g(u)`
//! with `g` the compositional inverse of `f_q`; the result need not be a
//! probability law, which is what [`check_is_progeny`] decides.

use serde::Serialize;
use thiserror::Error;

use crate::law::{LawError, Mean, OffspringFamily, OffspringLaw, ProgenyFamily, ProgenyLaw};
use crate::rational::ExactRational;
use crate::series::{PowerSeries, SeriesError};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ProgenyError {
    #[error("offspring mean {0:?} exceeds 1; extinction is not certain")]
    SupercriticalOffspring(Mean),
    #[error("q_1 = 0, so f_q has no compositional inverse")]
    NotInvertible,
    #[error(transparent)]
    Law(#[from] LawError),
    #[error(transparent)]
    Series(SeriesError),
}

impl From<SeriesError> for ProgenyError {
    fn from(e: SeriesError) -> Self {
        match e {
            SeriesError::NotInvertible => ProgenyError::NotInvertible,
            other => ProgenyError::Series(other),
        }
    }
}

/// The progeny family of a closed-form offspring family, when it has one.
fn progeny_family_of(p: &OffspringLaw) -> Option<ProgenyFamily> {
    match p.family()? {
        OffspringFamily::Geometric { alpha } => {
            let one = ExactRational::one();
            Some(ProgenyFamily::Sibuya {
                a: ExactRational::from(1) / 2,
                rho: ExactRational::from(4) * alpha * (&one - alpha),
            })
        }
        OffspringFamily::SibuyaOffspring { b, r } => {
            let one = ExactRational::one();
            let rho = &one - (&one - r).pow_exact(b)?;
            Some(ProgenyFamily::Sibuya { a: b.recip(), rho })
        }
    }
}

fn require_subcritical(p: &OffspringLaw) -> Result<(), ProgenyError> {
    let m = p.mean();
    if m.exceeds_one() {
        return Err(ProgenyError::SupercriticalOffspring(m));
    }
    Ok(())
}

fn progeny_from_coeffs(p: &OffspringLaw, coeffs: PowerSeries) -> ProgenyLaw {
    ProgenyLaw::with_family(coeffs, progeny_family_of(p))
}

/// `q_1 .. q_N` by Lagrange inversion; `p` must be known to order `N-1`.
pub fn progeny_of(p: &OffspringLaw, order: usize) -> Result<ProgenyLaw, ProgenyError> {
    require_subcritical(p)?;
    if order == 0 {
        return Ok(progeny_from_coeffs(p, PowerSeries::zero(0)));
    }
    let f = p.at_order(order - 1)?.series().clone();
    let mut coeffs = Vec::with_capacity(order + 1);
    coeffs.push(ExactRational::zero());
    let mut power = PowerSeries::one(order - 1);
    for n in 1..=order {
        power = power.mul(&f);
        coeffs.push(power.coeff(n - 1) / (n as i64));
    }
    Ok(progeny_from_coeffs(p, PowerSeries::from_coeffs(&coeffs)))
}

/// Same result as [`progeny_of`], by Newton iteration on
/// `y - z f_p(y) = 0`. Each step doubles the number of correct terms.
pub fn progeny_of_newton(p: &OffspringLaw, order: usize) -> Result<ProgenyLaw, ProgenyError> {
    require_subcritical(p)?;
    let f = p.at_order(order)?.series().clone();
    let mut y = PowerSeries::zero(0);
    let mut prec = 0;
    while prec < order {
        prec = (2 * prec + 1).min(order);
        let y_k = y.pad_to(prec);
        let f_k = f.truncate(prec);
        let f_of_y = f_k.compose(&y_k)?;
        let residual = y_k.sub(&f_of_y.shift_up(1).truncate(prec));
        let jacobian = PowerSeries::one(prec).sub(
            &f_k.derivative()
                .pad_to(prec)
                .compose(&y_k)?
                .shift_up(1)
                .truncate(prec),
        );
        y = y_k.sub(&residual.div(&jacobian)?);
    }
    Ok(progeny_from_coeffs(p, y))
}

/// Coefficients of `u / g(u)` to order `N`, `g = f_q^{-1}`; needs `q` to
/// order `N+1`. Not necessarily a probability law.
pub fn offspring_of(q: &ProgenyLaw, order: usize) -> Result<PowerSeries, ProgenyError> {
    let f = q.at_order(order + 1)?.series().clone();
    if f.is_coeff_zero(1) {
        return Err(ProgenyError::NotInvertible);
    }
    let g = f.comp_inverse()?;
    Ok(g.shift_down(1)?.recip()?)
}

/// [`offspring_of`] followed by validation into an [`OffspringLaw`].
pub fn offspring_law_of(q: &ProgenyLaw, order: usize) -> Result<OffspringLaw, ProgenyError> {
    Ok(OffspringLaw::from_series(offspring_of(q, order)?)?)
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct CheckResult {
    pub order: usize,
    /// First index with a negative offspring coefficient.
    pub first_negative: Option<usize>,
    /// First index where the partial sum exceeds 1.
    pub first_excess: Option<usize>,
    pub offspring: PowerSeries,
}

impl CheckResult {
    pub fn is_valid(&self) -> bool {
        self.first_negative.is_none() && self.first_excess.is_none()
    }

    pub fn first_violation(&self) -> Option<usize> {
        match (self.first_negative, self.first_excess) {
            (Some(a), Some(b)) => Some(a.min(b)),
            (a, b) => a.or(b),
        }
    }
}

/// Whether `q` is consistent with being a progeny, up to order `N`.
pub fn check_is_progeny(q: &ProgenyLaw, order: usize) -> Result<CheckResult, ProgenyError> {
    let offspring = offspring_of(q, order)?;
    let first_negative = (0..=order).find(|&n| offspring.coeff_signum(n) < 0);
    let mut partial = ExactRational::zero();
    let mut first_excess = None;
    for n in 0..=order {
        partial += offspring.coeff(n);
        if partial > 1 {
            first_excess = Some(n);
            break;
        }
    }
    Ok(CheckResult {
        order,
        first_negative,
        first_excess,
        offspring,
    })
}

/// `f_q(z) - z f_p(f_q(z))` to the common order of the inputs.
pub fn functional_equation_residual(
    p: &PowerSeries,
    q: &PowerSeries,
) -> Result<PowerSeries, SeriesError> {
    let order = p.order().min(q.order());
    let q = q.truncate(order);
    let composed = p.truncate(order).compose(&q)?;
    Ok(q.sub(&composed.shift_up(1).truncate(order)))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rational::rat;

    fn catalan(n: u64) -> ExactRational {
        // C_n = binom(2n, n) / (n+1)
        let mut c = ExactRational::one();
        for k in 0..n as i64 {
            c = c * (2 * (2 * k + 1)) / (k + 2);
        }
        c
    }

    #[test]
    fn geometric_half_gives_catalan_progeny() {
        let p = OffspringLaw::geometric(rat(1, 2), 0).unwrap();
        let q = progeny_of(&p, 25).unwrap();
        for n in 1..=25u64 {
            let expected = catalan(n - 1) / ExactRational::from(2).powi(2 * n as i32 - 1);
            assert_eq!(q.mass(n as usize), expected, "n={n}");
        }
        assert_eq!(q.mass(4), rat(5, 128));
        assert_eq!(
            q.family(),
            Some(&ProgenyFamily::Sibuya {
                a: rat(1, 2),
                rho: rat(1, 1)
            })
        );
    }

    #[test]
    fn delta_pair() {
        let q = progeny_of(&OffspringLaw::delta0(), 10).unwrap();
        assert_eq!(q.mass(1), rat(1, 1));
        assert!((2..=10).all(|n| q.mass(n).is_zero()));
        let p = offspring_of(&ProgenyLaw::delta1(), 10).unwrap();
        assert_eq!(p, PowerSeries::one(10));
    }

    #[test]
    fn newton_agrees_with_lagrange() {
        for alpha in [rat(3, 10), rat(1, 2), rat(1, 7)] {
            let p = OffspringLaw::geometric(alpha, 0).unwrap();
            assert_eq!(
                progeny_of(&p, 40).unwrap().series(),
                progeny_of_newton(&p, 40).unwrap().series()
            );
        }
        let f = OffspringLaw::from_masses(&[rat(1, 3), rat(1, 3), rat(1, 3)]).unwrap();
        assert_eq!(
            progeny_of(&f, 17).unwrap().series(),
            progeny_of_newton(&f, 17).unwrap().series()
        );
    }

    #[test]
    fn supercritical_refused() {
        let p = OffspringLaw::geometric(rat(3, 5), 10).unwrap();
        assert!(matches!(
            progeny_of(&p, 5),
            Err(ProgenyError::SupercriticalOffspring(_))
        ));
        let t = OffspringLaw::from_masses(&[rat(1, 10), rat(0, 1), rat(3, 5)]).unwrap();
        assert!(matches!(
            progeny_of(&t, 5),
            Err(ProgenyError::SupercriticalOffspring(_))
        ));
    }

    #[test]
    fn truncated_offspring_needs_order() {
        let p = OffspringLaw::from_masses(&[rat(1, 2), rat(1, 4)]).unwrap();
        assert!(progeny_of(&p, 2).is_ok());
        assert!(matches!(
            progeny_of(&p, 3),
            Err(ProgenyError::Law(LawError::InsufficientOrder { .. }))
        ));
    }

    #[test]
    fn inversion_of_sibuya_half() {
        let q = ProgenyLaw::sibuya(rat(1, 2), 0).unwrap();
        let p = offspring_of(&q, 30).unwrap();
        for n in 0..=30 {
            assert_eq!(
                p.coeff(n),
                rat(1, 1) / ExactRational::from(2).powi(n as i32 + 1)
            );
        }
        assert!(check_is_progeny(&q, 200).unwrap().is_valid());
    }

    #[test]
    fn non_progenies_detected() {
        let third = ProgenyLaw::sibuya(rat(1, 3), 0).unwrap();
        let r = check_is_progeny(&third, 20).unwrap();
        // offspring of s_{1/3} is h_3, negative first at index 6
        assert_eq!(r.first_negative, Some(6));
        let bounded = ProgenyLaw::from_masses(&[rat(1, 2), rat(1, 2)]).unwrap();
        assert!(!check_is_progeny(&bounded, 20).unwrap().is_valid());
        let no_q1 = ProgenyLaw::from_masses(&[rat(0, 1), rat(1, 1)]).unwrap();
        assert!(matches!(
            offspring_of(&no_q1, 5),
            Err(ProgenyError::NotInvertible)
        ));
    }

    #[test]
    fn residual_cases() {
        let p = OffspringLaw::geometric(rat(1, 2), 60).unwrap();
        let q = ProgenyLaw::sibuya(rat(1, 2), 60).unwrap();
        assert!(functional_equation_residual(p.series(), q.series())
            .unwrap()
            .is_zero());
        let q3 = ProgenyLaw::sibuya(rat(1, 3), 60).unwrap();
        assert!(!functional_equation_residual(p.series(), q3.series())
            .unwrap()
            .is_zero());
        let d = functional_equation_residual(
            OffspringLaw::delta0().series(),
            ProgenyLaw::delta1().series(),
        )
        .unwrap();
        assert!(d.is_zero());
    }
}
