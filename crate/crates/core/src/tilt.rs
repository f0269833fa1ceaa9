//! Exponential tilting `f(z) -> f(rz)/f(r)` of offspring and progeny laws.
//!
//! If `q` is the progeny of `p` and `r = f_q(rho)`, then the progeny of the
//! tilted offspring law `p^(r)` is the tilted progeny law `q^(rho)`.
//! [`prop2_residual`] checks that identity on series.

use serde::Serialize;
use thiserror::Error;

use crate::law::{LawError, Mean, OffspringFamily, OffspringLaw, ProgenyFamily, ProgenyLaw};
use crate::progeny::functional_equation_residual;
use crate::rational::ExactRational;
use crate::series::{PowerSeries, SeriesError};
use crate::sibuya::SibuyaError;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum TiltError {
    #[error("tilt {value} is outside the admissible range {range}")]
    TiltOutOfRange { value: ExactRational, range: String },
    #[error("tilted mean {0} exceeds 1")]
    SupercriticalTilt(ExactRational),
    #[error("r = {0} is not in the range of f_q on (0, 1]")]
    OutOfRange(ExactRational),
    #[error("no exact rho for r = {0}; pass a denominator bound to allow an approximation")]
    NoExactRho(ExactRational),
    #[error(transparent)]
    Law(#[from] LawError),
    #[error(transparent)]
    Series(#[from] SeriesError),
}

impl From<SibuyaError> for TiltError {
    fn from(e: SibuyaError) -> Self {
        TiltError::Law(LawError::Sibuya(e))
    }
}

/// A tilt pairing: `r` acts on the offspring law, `rho` on the progeny law.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct TiltParams {
    pub r: ExactRational,
    pub rho: ExactRational,
    /// Radius bound for `f_p`; `None` when unbounded (finite support).
    pub r_bound: Option<ExactRational>,
    pub rho_exact: bool,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TiltedOffspring {
    pub law: OffspringLaw,
    /// `m_r = r f_p'(r) / f_p(r)`.
    pub mean: Mean,
    /// The normalizer `f_p(r)` was summed over the known prefix only.
    pub truncated_normalizer: bool,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TiltedProgeny {
    pub law: ProgenyLaw,
    pub truncated_normalizer: bool,
}

fn out_of_range(value: &ExactRational, range: &str) -> TiltError {
    TiltError::TiltOutOfRange {
        value: value.clone(),
        range: range.to_string(),
    }
}

/// `sum c_n r^n` and `sum n c_n r^n` over the known coefficients.
fn eval_with_derivative(s: &PowerSeries, r: &ExactRational) -> (ExactRational, ExactRational) {
    let mut value = ExactRational::zero();
    let mut moment = ExactRational::zero();
    let mut r_pow = ExactRational::one();
    for n in 0..=s.order() {
        let term = s.coeff(n) * &r_pow;
        moment += &term * ExactRational::from(n as i64);
        value += term;
        r_pow *= r;
    }
    (value, moment)
}

/// `c_n r^n / normalizer`.
fn tilt_coeffs(s: &PowerSeries, r: &ExactRational, normalizer: &ExactRational) -> PowerSeries {
    s.scale_variable(r).scale(&normalizer.recip())
}

/// Radius bound of `f_p`: `1/alpha` for the geometric law, `1/r` for
/// the tilted `h_b` (`2/r` at `b = 2`, where `h_2` is geometric).
pub fn offspring_radius(p: &OffspringLaw) -> Option<ExactRational> {
    match p.family() {
        Some(OffspringFamily::Geometric { alpha }) => Some(alpha.recip()),
        Some(OffspringFamily::SibuyaOffspring { b, r }) if *b == 2 => {
            Some(ExactRational::from(2) / r)
        }
        Some(OffspringFamily::SibuyaOffspring { r, .. }) => Some(r.recip()),
        None if p.is_exactly_finite() => None,
        None => Some(ExactRational::one()),
    }
}

/// `p^(r)`. Refuses a tilt whose mean exceeds 1.
pub fn tilt_offspring(p: &OffspringLaw, r: &ExactRational) -> Result<TiltedOffspring, TiltError> {
    let tilted = tilt_offspring_unchecked(p, r)?;
    if tilted.mean.exceeds_one() {
        let m = match &tilted.mean {
            Mean::Exact(m) | Mean::LowerBound(m) => m.clone(),
            Mean::Infinite => unreachable!("tilted means are finite"),
        };
        return Err(TiltError::SupercriticalTilt(m));
    }
    Ok(tilted)
}

/// [`tilt_offspring`] without the criticality check.
pub fn tilt_offspring_unchecked(
    p: &OffspringLaw,
    r: &ExactRational,
) -> Result<TiltedOffspring, TiltError> {
    if !r.is_positive() {
        return Err(out_of_range(r, "r > 0"));
    }
    if r.is_one() {
        return Ok(TiltedOffspring {
            law: p.clone(),
            mean: p.mean(),
            truncated_normalizer: false,
        });
    }
    let order = p.order();
    match p.family() {
        Some(OffspringFamily::Geometric { alpha }) => {
            let new_alpha = alpha * r;
            if new_alpha >= 1 {
                return Err(out_of_range(r, &format!("0 < r < {}", alpha.recip())));
            }
            let law = OffspringLaw::geometric(new_alpha, order)?;
            Ok(TiltedOffspring {
                mean: law.mean(),
                law,
                truncated_normalizer: false,
            })
        }
        Some(OffspringFamily::SibuyaOffspring { b, r: r0 }) => {
            // tilts compose multiplicatively; h_2 tilted past 1 is geometric
            let combined = r0 * r;
            if combined <= 1 {
                let law = OffspringLaw::tilted_sibuya_offspring(b.clone(), combined, order)?;
                return Ok(TiltedOffspring {
                    mean: law.mean(),
                    law,
                    truncated_normalizer: false,
                });
            }
            if *b == 2 && combined < 2 {
                let law = OffspringLaw::geometric(combined / 2, order)?;
                return Ok(TiltedOffspring {
                    mean: law.mean(),
                    law,
                    truncated_normalizer: false,
                });
            }
            let bound = offspring_radius(p).expect("families have a radius");
            Err(out_of_range(r, &format!("0 < r <= {bound}")))
        }
        None => {
            let finite = p.is_exactly_finite();
            if !finite && *r >= 1 {
                return Err(out_of_range(r, "0 < r < 1 for a truncated law"));
            }
            let (value, moment) = eval_with_derivative(p.series(), r);
            if value.is_zero() {
                return Err(out_of_range(r, "f_p(r) > 0"));
            }
            let m = &moment / &value;
            let law = OffspringLaw::from_series(tilt_coeffs(p.series(), r, &value))?;
            let mean = if finite {
                Mean::Exact(m)
            } else {
                Mean::LowerBound(m)
            };
            Ok(TiltedOffspring {
                law,
                mean,
                truncated_normalizer: !finite,
            })
        }
    }
}

/// `q^(rho)` for `0 < rho <= 1`.
pub fn tilt_progeny(q: &ProgenyLaw, rho: &ExactRational) -> Result<TiltedProgeny, TiltError> {
    if !rho.is_positive() || *rho > 1 {
        return Err(out_of_range(rho, "0 < rho <= 1"));
    }
    if rho.is_one() {
        return Ok(TiltedProgeny {
            law: q.clone(),
            truncated_normalizer: false,
        });
    }
    match q.family() {
        Some(ProgenyFamily::Sibuya { a, rho: rho0 }) => {
            let law = ProgenyLaw::tilted_sibuya(a.clone(), rho0 * rho, q.order())?;
            Ok(TiltedProgeny {
                law,
                truncated_normalizer: false,
            })
        }
        None => {
            let (value, _) = eval_with_derivative(q.series(), rho);
            let law = ProgenyLaw::from_series(tilt_coeffs(q.series(), rho, &value))?;
            Ok(TiltedProgeny {
                law,
                truncated_normalizer: !q.is_exactly_finite(),
            })
        }
    }
}

/// The `rho` with `f_q(rho) = r`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct SolvedRho {
    pub rho: ExactRational,
    /// `f_q(rho) = r` holds exactly (closed form or exact polynomial root).
    pub exact: bool,
}

/// Solves `f_q(rho) = r` for `rho` in `(0, 1]`.
///
/// For the Sibuya family `f_q(rho) = (1-(1-rho0 rho)^a)/(1-(1-rho0)^a)`
/// inverts in closed form. Otherwise, or when the closed form is
/// irrational, bisection on the known prefix of `f_q` runs with exact
/// endpoints until the bracket is shorter than `1/denominator_bound`, and
/// the answer is the nearest multiple of `1/denominator_bound`.
pub fn solve_rho(
    q: &ProgenyLaw,
    r: &ExactRational,
    denominator_bound: Option<u64>,
) -> Result<SolvedRho, TiltError> {
    if !r.is_positive() || *r > 1 {
        return Err(TiltError::OutOfRange(r.clone()));
    }
    if r.is_one() {
        return Ok(SolvedRho {
            rho: ExactRational::one(),
            exact: true,
        });
    }
    let one = ExactRational::one();
    if let Some(ProgenyFamily::Sibuya { a, rho: rho0 }) = q.family() {
        let c = &one
            - (&one - rho0).pow_exact(a).ok_or_else(|| {
                LawError::Sibuya(SibuyaError::NonRationalNormalizer {
                    a: a.clone(),
                    rho: rho0.clone(),
                })
            })?;
        let inner = &one - r * &c;
        if let Some(root) = inner.pow_exact(&a.recip()) {
            return Ok(SolvedRho {
                rho: (&one - root) / rho0,
                exact: true,
            });
        }
    }
    let bound = denominator_bound.ok_or_else(|| TiltError::NoExactRho(r.clone()))?;
    let f = q.series();
    if f.eval_polynomial(&one) < *r {
        return Err(TiltError::OutOfRange(r.clone()));
    }
    let (mut lo, mut hi) = (ExactRational::zero(), one);
    let width = ExactRational::new(1, bound);
    while &hi - &lo >= width {
        let mid = (&lo + &hi) / 2;
        let v = f.eval_polynomial(&mid);
        if v == *r {
            return Ok(SolvedRho {
                rho: mid,
                exact: q.is_exactly_finite(),
            });
        }
        if v < *r {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    let mid = (lo + hi) / 2;
    let scaled = mid * ExactRational::from(bound as i64);
    let k = (scaled + ExactRational::new(1, 2))
        .as_big()
        .floor()
        .to_integer();
    let rho = ExactRational::new(k, bound);
    let exact = q.is_exactly_finite() && f.eval_polynomial(&rho) == *r;
    Ok(SolvedRho { rho, exact })
}

/// The full pairing for `p` tilted by `r`, with `q` the progeny of `p`.
pub fn tilt_params(
    p: &OffspringLaw,
    q: &ProgenyLaw,
    r: &ExactRational,
) -> Result<TiltParams, TiltError> {
    let solved = solve_rho(q, r, None)?;
    Ok(TiltParams {
        r: r.clone(),
        rho: solved.rho,
        r_bound: offspring_radius(p),
        rho_exact: solved.exact,
    })
}

/// `f_{q^(rho)}(z) - z f_{p^(r)}(f_{q^(rho)}(z))` to order `N`, with
/// `rho = solve_rho(q, r)`.
pub fn prop2_residual(
    p: &OffspringLaw,
    q: &ProgenyLaw,
    r: &ExactRational,
    order: usize,
) -> Result<PowerSeries, TiltError> {
    let tilted_p = tilt_offspring(&p.at_order(order)?, r)?;
    let params = tilt_params(p, q, r)?;
    let tilted_q = tilt_progeny(&q.at_order(order)?, &params.rho)?;
    Ok(functional_equation_residual(
        tilted_p.law.series(),
        tilted_q.law.series(),
    )?)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::progeny::progeny_of;
    use crate::rational::rat;

    #[test]
    fn geometric_tilt_is_geometric() {
        let p = OffspringLaw::geometric(rat(1, 2), 20).unwrap();
        let t = tilt_offspring(&p, &rat(3, 4)).unwrap();
        assert_eq!(t.law, OffspringLaw::geometric(rat(3, 8), 20).unwrap());
        assert_eq!(t.mean, Mean::Exact(rat(3, 5)));
        assert!(matches!(
            tilt_offspring(&p, &rat(3, 2)),
            Err(TiltError::SupercriticalTilt(_))
        ));
        assert!(matches!(
            tilt_offspring(&p, &rat(2, 1)),
            Err(TiltError::TiltOutOfRange { .. })
        ));
        assert_eq!(tilt_offspring(&p, &rat(1, 1)).unwrap().law, p);
    }

    #[test]
    fn sibuya_offspring_tilt_matches_direct_series() {
        // (1-(1-r)^2) u / (1-(1-ru)^2) at r = 1/2, expanded independently
        let h = OffspringLaw::sibuya_offspring(rat(2, 1), 25).unwrap();
        let t = tilt_offspring(&h, &rat(1, 2)).unwrap();
        let num = PowerSeries::from_integers(&[0, 1])
            .pad_to(26)
            .scale(&rat(3, 4));
        let inner = PowerSeries::from_coeffs(&[rat(1, 1), rat(-1, 2)]).pad_to(26);
        let den = PowerSeries::one(26).sub(&inner.square());
        let direct = num
            .shift_down(1)
            .unwrap()
            .div(&den.shift_down(1).unwrap())
            .unwrap();
        assert_eq!(t.law.series(), &direct.truncate(25));
    }

    #[test]
    fn finite_and_truncated_tilts() {
        let f = OffspringLaw::from_masses(&[rat(1, 2), rat(0, 1), rat(1, 2)]).unwrap();
        let t = tilt_offspring(&f, &rat(1, 2)).unwrap();
        assert_eq!(t.law.mass(0), rat(4, 5));
        assert_eq!(t.mean, Mean::Exact(rat(2, 5)));
        assert!(!t.truncated_normalizer);
        let tr = OffspringLaw::from_masses(&[rat(1, 2), rat(1, 4)]).unwrap();
        assert!(tilt_offspring(&tr, &rat(1, 1)).is_ok());
        assert!(tilt_offspring(&tr, &rat(3, 2)).is_err());
        assert!(
            tilt_offspring(&tr, &rat(1, 2))
                .unwrap()
                .truncated_normalizer
        );
    }

    #[test]
    fn tilts_compose() {
        let f = OffspringLaw::from_masses(&[rat(1, 3), rat(1, 3), rat(1, 3)]).unwrap();
        let once = tilt_offspring(&f, &rat(1, 3)).unwrap().law;
        let twice = tilt_offspring(&tilt_offspring(&f, &rat(1, 2)).unwrap().law, &rat(2, 3))
            .unwrap()
            .law;
        assert_eq!(once, twice);
    }

    #[test]
    fn solve_rho_closed_forms() {
        let q = ProgenyLaw::sibuya(rat(1, 2), 10).unwrap();
        // geometric alpha = 1/2: rho = r(1 - alpha r)/(1 - alpha)
        let s = solve_rho(&q, &rat(3, 4), None).unwrap();
        assert_eq!(
            s,
            SolvedRho {
                rho: rat(15, 16),
                exact: true
            }
        );
        assert_eq!(solve_rho(&q, &rat(1, 1), None).unwrap().rho, rat(1, 1));
        assert!(solve_rho(&q, &rat(3, 2), None).is_err());
        // irrational root: approximate only on request
        let q3 = ProgenyLaw::sibuya(rat(1, 3), 60).unwrap();
        assert_eq!(solve_rho(&q3, &rat(1, 2), None).unwrap().rho, rat(7, 8));
        let q23 = ProgenyLaw::sibuya(rat(2, 3), 60).unwrap();
        assert!(matches!(
            solve_rho(&q23, &rat(1, 2), None),
            Err(TiltError::NoExactRho(_))
        ));
    }

    #[test]
    fn solve_rho_bisection_finite() {
        let q = ProgenyLaw::from_masses(&[rat(1, 2), rat(1, 2)]).unwrap();
        // f(rho) = (rho + rho^2)/2 = 3/8 at rho = 1/2
        let s = solve_rho(&q, &rat(3, 8), Some(1 << 20)).unwrap();
        assert_eq!(
            s,
            SolvedRho {
                rho: rat(1, 2),
                exact: true
            }
        );
        let approx = solve_rho(&q, &rat(1, 3), Some(1000)).unwrap();
        assert!(!approx.exact);
        let v = q.series().eval_polynomial(&approx.rho).to_f64();
        assert!((v - 1.0 / 3.0).abs() < 2e-3);
    }

    #[test]
    fn prop2_examples_vanish() {
        let p = OffspringLaw::geometric(rat(1, 2), 40).unwrap();
        let q = progeny_of(&p, 40).unwrap();
        assert!(prop2_residual(&p, &q, &rat(3, 4), 40).unwrap().is_zero());
        let h = OffspringLaw::sibuya_offspring(rat(2, 1), 40).unwrap();
        let qh = ProgenyLaw::sibuya(rat(1, 2), 40).unwrap();
        assert_eq!(solve_rho(&qh, &rat(1, 2), None).unwrap().rho, rat(3, 4));
        assert!(prop2_residual(&h, &qh, &rat(1, 2), 40).unwrap().is_zero());
        assert!(matches!(
            prop2_residual(&p, &q, &rat(3, 2), 10),
            Err(TiltError::SupercriticalTilt(_))
        ));
    }
}
