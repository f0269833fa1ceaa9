//! The release checks, one function per criterion, and [`check_all`].
//!
//! Each check returns a [`CriterionOutcome`] rather than panicking, so the
//! same code drives the CLI report and the `acceptance` test target. A
//! [`Fault`] perturbs one coefficient inside a chosen check to confirm that
//! the check notices.

use std::time::Instant;

use serde::Serialize;

use crate::law::{OffspringLaw, ProgenyLaw};
use crate::progeny::{offspring_of, progeny_of, progeny_of_newton};
use crate::rational::{rat, ExactRational};
use crate::series::PowerSeries;
use crate::sibuya::{sibuya_gf, EventSampler, SibuyaParams};
use crate::sibuya_progeny::{
    certify_interval, closed_form_comparison, first_negative, h3_closed_form, rational_grid,
    reciprocal_series, scaled_pair, BParam, ClosedFormRow,
};
use crate::sim::{compare, empirical_histogram, simulate_summary, GWConfig, DEFAULT_TV_THRESHOLD};
use crate::tilt::{prop2_residual, solve_rho};

/// First negative index for `b = 5/2`, found by search.
pub const PINNED_FIRST_NEGATIVE_5_2: usize = 7;
/// First negative index for `b = 29/10`, found by search.
pub const PINNED_FIRST_NEGATIVE_29_10: usize = 6;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Fault {
    /// Add `2^-60` to coefficient `min(order, 5)` of a series inside the
    /// given criterion.
    MutateCoefficient { criterion: u32 },
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct CheckOptions {
    /// Run only these criteria (all when `None`).
    pub only: Option<Vec<u32>>,
    pub fault: Option<Fault>,
    /// Sample size for the statistical criterion.
    pub replicas: u64,
    pub seed: u64,
}

impl Default for CheckOptions {
    fn default() -> Self {
        CheckOptions {
            only: None,
            fault: None,
            replicas: 1_000_000,
            seed: 20_240_601,
        }
    }
}

impl CheckOptions {
    fn tamper(&self, criterion: u32, s: PowerSeries) -> PowerSeries {
        match self.fault {
            Some(Fault::MutateCoefficient { criterion: c }) if c == criterion => {
                let n = s.order().min(5);
                let bump = ExactRational::one() / ExactRational::from(2).powi(60);
                s.add(&PowerSeries::monomial(&bump, n, s.order()))
            }
            _ => s,
        }
    }

    fn wants(&self, id: u32) -> bool {
        self.only.as_ref().is_none_or(|ids| ids.contains(&id))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CriterionOutcome {
    pub id: u32,
    /// Distinguishes the parts of a criterion checked separately.
    pub part: Option<char>,
    pub name: String,
    pub pass: bool,
    pub detail: String,
    pub elapsed_ms: f64,
}

impl CriterionOutcome {
    pub fn label(&self) -> String {
        match self.part {
            Some(p) => format!("{}{}", self.id, p),
            None => self.id.to_string(),
        }
    }

    /// `PASS 7a recurrence ...` style line.
    pub fn line(&self) -> String {
        let verdict = if self.pass { "PASS" } else { "FAIL" };
        format!(
            "{verdict} [{:>3}] {} ({:.0} ms): {}",
            self.label(),
            self.name,
            self.elapsed_ms,
            self.detail
        )
    }
}

fn timed(
    id: u32,
    part: Option<char>,
    name: &str,
    f: impl FnOnce() -> (bool, String),
) -> CriterionOutcome {
    let start = Instant::now();
    let (pass, detail) = f();
    CriterionOutcome {
        id,
        part,
        name: name.to_string(),
        pass,
        detail,
        elapsed_ms: start.elapsed().as_secs_f64() * 1e3,
    }
}

fn bp(s: &str) -> BParam {
    BParam::new(s.parse().expect("literal rational")).expect("literal b > 1")
}

pub fn criterion_1(opts: &CheckOptions) -> CriterionOutcome {
    timed(1, None, "first negative P_n at b = 2+1e-9", || {
        let start = Instant::now();
        let r = first_negative(&bp("2000000001/1000000000"), 60).expect("n_max >= 2");
        let mut index = r.first_negative;
        if matches!(opts.fault, Some(Fault::MutateCoefficient { criterion: 1 })) {
            index = index.map(|n| n + 1);
        }
        let secs = start.elapsed().as_secs_f64();
        (
            index == Some(45) && secs < 10.0,
            format!("first_negative = {index:?}, {secs:.3} s"),
        )
    })
}

pub fn criterion_2(opts: &CheckOptions) -> CriterionOutcome {
    timed(2, None, "P_n = 2^-n at b = 2, n <= 200", || {
        let p = opts.tamper(2, reciprocal_series(&bp("2"), 200));
        let half = rat(1, 2);
        let bad = (0..=200).find(|&n| p.coeff(n) != half.powi(n as i32));
        (bad.is_none(), format!("first mismatch: {bad:?}"))
    })
}

pub fn criterion_3(opts: &CheckOptions) -> CriterionOutcome {
    timed(3, None, "b = 3: P_5 = 0, P_6 = -1/27, closed form", || {
        let p = opts.tamper(3, reciprocal_series(&bp("3"), 30));
        let exact = p.coeff(5).is_zero() && p.coeff(6) == rat(-1, 27);
        let fneg = first_negative(&bp("3"), 60)
            .expect("n_max >= 2")
            .first_negative;
        let max_err = (0..=30)
            .map(|n| (p.coeff(n).to_f64() - h3_closed_form(n)).abs())
            .fold(0.0f64, f64::max);
        (
            exact && fneg == Some(6) && max_err < 1e-12,
            format!(
                "P_5 = {}, P_6 = {}, first_negative = {fneg:?}, closed-form max error {max_err:.2e}",
                p.coeff(5),
                p.coeff(6)
            ),
        )
    })
}

pub fn criterion_4(_opts: &CheckOptions) -> CriterionOutcome {
    timed(4, None, "first_negative <= 5 for b in {4, 5, 10}", || {
        let found: Vec<_> = ["4", "5", "10"]
            .iter()
            .map(|b| {
                first_negative(&bp(b), 5)
                    .expect("n_max >= 2")
                    .first_negative
            })
            .collect();
        let pass = found.iter().all(|f| f.is_some_and(|n| n <= 5));
        (pass, format!("indices {found:?}"))
    })
}

pub fn criterion_5(opts: &CheckOptions) -> CriterionOutcome {
    timed(
        5,
        None,
        "positivity and H identity on (1, 2], step 1/20, n <= 500",
        || {
            let grid = rational_grid(&rat(21, 20), &rat(2, 1), &rat(1, 20)).expect("valid grid");
            let mut reports = certify_interval(&grid, 500).expect("n_max >= 2");
            if matches!(opts.fault, Some(Fault::MutateCoefficient { criterion: 5 })) {
                reports[0].louis_identity = Some(false);
            }
            let failing: Vec<String> = reports
                .iter()
                .filter(|r| r.first_negative.is_some() || r.louis_identity != Some(true))
                .map(|r| r.b.to_string())
                .collect();
            (
                failing.is_empty(),
                format!("{} grid points, failing: {failing:?}", reports.len()),
            )
        },
    )
}

pub fn criterion_6(_opts: &CheckOptions) -> CriterionOutcome {
    timed(
        6,
        None,
        "finite first negative for b in {5/2, 29/10}",
        || {
            let a = first_negative(&bp("5/2"), 2000)
                .expect("n_max >= 2")
                .first_negative;
            let b = first_negative(&bp("29/10"), 2000)
                .expect("n_max >= 2")
                .first_negative;
            (
                a == Some(PINNED_FIRST_NEGATIVE_5_2) && b == Some(PINNED_FIRST_NEGATIVE_29_10),
                format!("b = 5/2: {a:?}, b = 29/10: {b:?}"),
            )
        },
    )
}

pub fn criterion_7_recurrence(opts: &CheckOptions) -> CriterionOutcome {
    timed(7, Some('a'), "A/a recurrence for 4 <= n <= 100", || {
        let mut bad = Vec::new();
        for b in ["5/2", "7/3"] {
            let mut pair = scaled_pair(&bp(b), 100);
            if matches!(opts.fault, Some(Fault::MutateCoefficient { criterion: 7 })) {
                pair.small[50] += ExactRational::one() / ExactRational::from(2).powi(60);
            }
            if let Some(n) = (4..=100).find(|&n| !pair.recurrence_residual(n).is_zero()) {
                bad.push(format!("b = {b}: n = {n}"));
            }
        }
        (bad.is_empty(), format!("nonzero residuals: {bad:?}"))
    })
}

/// `a_{101}/a_{100}` against its limit `2/(b-1)`, 1% tolerance.
///
/// The ratio is exactly `(n+1-b)/(n+2) * 2/(b-1)`, about 3.4% below the
/// limit at `n = 100` for both parameters, so this check fails as posed.
pub fn criterion_7_ratio(_opts: &CheckOptions) -> CriterionOutcome {
    timed(
        7,
        Some('b'),
        "a_{n+1}/a_n within 1% of 2/(b-1) at n = 100",
        || {
            let mut pass = true;
            let mut parts = Vec::new();
            for b in ["5/2", "7/3"] {
                let bb = bp(b);
                let pair = scaled_pair(&bb, 101);
                let limit = ExactRational::from(2) / (bb.value() - 1);
                let rel = (pair.small_ratio(100) / &limit - 1).to_f64();
                pass &= rel.abs() < 0.01;
                parts.push(format!("b = {b}: relative gap {rel:+.4}"));
            }
            (pass, parts.join(", "))
        },
    )
}

pub fn criterion_8(opts: &CheckOptions) -> CriterionOutcome {
    timed(
        8,
        None,
        "offspring_of(progeny_of(p)) = p to order 50",
        || {
            let laws = [
                (
                    "geometric 3/10",
                    OffspringLaw::geometric(rat(3, 10), 50).expect("valid"),
                ),
                (
                    "h_b, b = 3/2",
                    OffspringLaw::sibuya_offspring(rat(3, 2), 50).expect("valid"),
                ),
            ];
            let mut issues = Vec::new();
            for (name, p) in &laws {
                let q = progeny_of(p, 51).expect("subcritical");
                let q_newton = progeny_of_newton(p, 51).expect("subcritical");
                if q.series() != q_newton.series() {
                    issues.push(format!("{name}: Lagrange and Newton differ"));
                }
                let tampered = ProgenyLaw::from_series(opts.tamper(8, q.series().clone()))
                    .expect("still a sub-probability");
                let back = offspring_of(&tampered, 50).expect("q_1 > 0");
                if let Some(n) = back.first_difference(p.series()) {
                    issues.push(format!("{name}: round trip differs at n = {n}"));
                }
            }
            (issues.is_empty(), format!("issues: {issues:?}"))
        },
    )
}

pub fn criterion_9(opts: &CheckOptions) -> CriterionOutcome {
    timed(
        9,
        None,
        "progeny of geometric = tilted s_1/2, order 30",
        || {
            let mut issues = Vec::new();
            for alpha in [rat(1, 2), rat(3, 10)] {
                let p = OffspringLaw::geometric(alpha.clone(), 30).expect("valid");
                let q = opts.tamper(9, progeny_of(&p, 30).expect("subcritical").series().clone());
                let rho = ExactRational::from(4) * &alpha * (ExactRational::one() - &alpha);
                let target =
                    ProgenyLaw::tilted_sibuya(rat(1, 2), rho, 30).expect("rational normalizer");
                if let Some(n) = q.first_difference(target.series()) {
                    issues.push(format!("alpha = {alpha}: differs at n = {n}"));
                }
            }
            (issues.is_empty(), format!("issues: {issues:?}"))
        },
    )
}

pub fn criterion_10(opts: &CheckOptions) -> CriterionOutcome {
    timed(
        10,
        None,
        "tilt pairing residual vanishes to order 40",
        || {
            let mut issues = Vec::new();
            let geo = OffspringLaw::geometric(rat(1, 2), 40).expect("valid");
            let geo_q = progeny_of(&geo, 40).expect("critical");
            let r = rat(3, 4);
            let rho = solve_rho(&geo_q, &r, None).expect("closed form").rho;
            // rho = r(1 - alpha r)/(1 - alpha)
            if rho != &r * (ExactRational::one() - rat(1, 2) * &r) / rat(1, 2) {
                issues.push(format!("geometric rho = {rho}"));
            }
            let res = opts.tamper(
                10,
                prop2_residual(&geo, &geo_q, &r, 40).expect("admissible"),
            );
            if !res.is_zero() {
                issues.push("geometric residual nonzero".into());
            }
            let h = OffspringLaw::sibuya_offspring(rat(2, 1), 40).expect("valid");
            let hq = ProgenyLaw::sibuya(rat(1, 2), 40).expect("valid");
            let r = rat(1, 2);
            let rho = solve_rho(&hq, &r, None).expect("closed form").rho;
            if rho != rat(3, 4) {
                issues.push(format!("Sibuya rho = {rho}"));
            }
            if !prop2_residual(&h, &hq, &r, 40)
                .expect("admissible")
                .is_zero()
            {
                issues.push("Sibuya residual nonzero".into());
            }
            (issues.is_empty(), format!("issues: {issues:?}"))
        },
    )
}

pub fn criterion_11(opts: &CheckOptions) -> CriterionOutcome {
    timed(
        11,
        None,
        "f_{s_7/10} o f_{s_4/5} = f_{s_14/25} to order 100",
        || {
            let gf = |a: ExactRational| {
                sibuya_gf(&SibuyaParams::plain(a).expect("0<a<1"), 100).expect("valid")
            };
            let lhs = opts.tamper(
                11,
                gf(rat(7, 10))
                    .compose(&gf(rat(4, 5)))
                    .expect("zero constant term"),
            );
            let diff = lhs.first_difference(&gf(rat(14, 25)));
            (diff.is_none(), format!("first difference: {diff:?}"))
        },
    )
}

/// Exact total-progeny pmf of geometric `alpha = 2/5` on `0..=20`.
fn geometric_progeny_pmf(opts: &CheckOptions) -> Vec<ExactRational> {
    let p = OffspringLaw::geometric(rat(2, 5), 20).expect("valid");
    opts.tamper(
        12,
        progeny_of(&p, 20).expect("subcritical").series().clone(),
    )
    .coeffs()
}

pub fn criterion_12(opts: &CheckOptions) -> CriterionOutcome {
    timed(12, None, "Monte Carlo vs exact laws, TV < 0.005", || {
        let start = Instant::now();
        let cfg = GWConfig {
            master_seed: opts.seed,
            replicas: opts.replicas,
            ..GWConfig::default()
        };
        let p = OffspringLaw::geometric(rat(2, 5), 20).expect("valid");
        let exact_q = geometric_progeny_pmf(opts);
        let run_gw = || simulate_summary(&p, &cfg, 20).expect("valid config");
        let gw = run_gw();
        let gw_cmp = compare(&gw.histogram, &exact_q, DEFAULT_TV_THRESHOLD);

        let events = EventSampler::new(0.5, 0.0);
        let run_sib =
            || empirical_histogram(opts.replicas, opts.seed, 20, |rng| events.sample(rng).ok());
        let sib = run_sib();
        let exact_s = sibuya_gf(&SibuyaParams::plain(rat(1, 2)).expect("valid"), 20)
            .expect("valid")
            .coeffs();
        let sib_cmp = compare(&sib, &exact_s, DEFAULT_TV_THRESHOLD);

        let deterministic = run_gw().histogram == gw.histogram && run_sib() == sib;
        let secs = start.elapsed().as_secs_f64();
        match (gw_cmp, sib_cmp) {
            (Ok(g), Ok(s)) => (
                g.pass && s.pass && deterministic && secs < 60.0,
                format!(
                    "GW TV {:.5}, Sibuya TV {:.5}, censored {}, deterministic {deterministic}, {secs:.1} s",
                    g.tv_distance, s.tv_distance, gw.censored
                ),
            ),
            (g, s) => (false, format!("comparison error: {g:?} / {s:?}")),
        }
    })
}

pub fn discrepancy_rows() -> Vec<ClosedFormRow> {
    closed_form_comparison(&[bp("2"), bp("5/2"), bp("7/3"), bp("4")])
}

pub fn criterion_13(opts: &CheckOptions) -> CriterionOutcome {
    timed(
        13,
        None,
        "stated P_2..P_5 closed forms vs expansion",
        || {
            let rows = discrepancy_rows();
            let mut p2 = reciprocal_series(&bp("2"), 2);
            p2 = opts.tamper(13, p2);
            let factorial = |n: usize| {
                (1..=n as i64)
                    .map(ExactRational::from)
                    .product::<ExactRational>()
            };
            let constant_factor = rows
                .iter()
                .all(|r| r.ratio.as_ref() == Some(&factorial(r.n)));
            let forced = p2.coeff(2) == rat(1, 4);
            let summary = rows
                .iter()
                .filter(|r| r.b == rat(2, 1))
                .map(|r| {
                    format!(
                        "P_{}: stated {} vs expansion {}",
                        r.n, r.stated, r.expansion
                    )
                })
                .collect::<Vec<_>>()
                .join("; ");
            (
                constant_factor && forced,
                format!("ratio is n! throughout: {constant_factor}; at b = 2, {summary}"),
            )
        },
    )
}

type Check = fn(&CheckOptions) -> CriterionOutcome;

const CHECKS: &[(u32, Check)] = &[
    (1, criterion_1),
    (2, criterion_2),
    (3, criterion_3),
    (4, criterion_4),
    (5, criterion_5),
    (6, criterion_6),
    (7, criterion_7_recurrence),
    (7, criterion_7_ratio),
    (8, criterion_8),
    (9, criterion_9),
    (10, criterion_10),
    (11, criterion_11),
    (12, criterion_12),
    (13, criterion_13),
];

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CheckReport {
    pub options: CheckOptions,
    pub outcomes: Vec<CriterionOutcome>,
    pub closed_form_discrepancy: Vec<ClosedFormRow>,
    pub all_pass: bool,
    pub elapsed_ms: f64,
}

pub fn check_all(opts: &CheckOptions) -> CheckReport {
    let start = Instant::now();
    let outcomes: Vec<_> = CHECKS
        .iter()
        .filter(|(id, _)| opts.wants(*id))
        .map(|(_, check)| check(opts))
        .collect();
    CheckReport {
        options: opts.clone(),
        all_pass: outcomes.iter().all(|o| o.pass),
        outcomes,
        closed_form_discrepancy: discrepancy_rows(),
        elapsed_ms: start.elapsed().as_secs_f64() * 1e3,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn only(ids: &[u32], fault: Option<Fault>) -> CheckOptions {
        CheckOptions {
            only: Some(ids.to_vec()),
            fault,
            replicas: 20_000,
            seed: 1,
        }
    }

    #[test]
    fn fast_criteria_pass_clean() {
        let report = check_all(&only(&[2, 3, 4, 9, 11, 13], None));
        assert_eq!(report.outcomes.len(), 6);
        for o in &report.outcomes {
            assert!(o.pass, "{}", o.line());
        }
    }

    #[test]
    fn seeded_faults_are_caught() {
        for id in [1, 2, 3, 7, 9, 11, 13] {
            let fault = Some(Fault::MutateCoefficient { criterion: id });
            let report = check_all(&only(&[id], fault));
            assert!(
                report.outcomes.iter().any(|o| !o.pass),
                "fault in {id} went unnoticed"
            );
        }
    }

    #[test]
    fn discrepancy_report_covers_p2_to_p5() {
        let rows = discrepancy_rows();
        assert_eq!(rows.len(), 16);
        assert!(rows
            .iter()
            .any(|r| r.n == 2 && r.b == rat(2, 1) && r.expansion == rat(1, 4)));
    }
}
