//! Law arguments: inline shorthands or JSON series files.
//!
//! Offspring: `geometric:ALPHA`, `sibuya-offspring:B[:R]`, `delta0`,
//! `masses:P0,P1,...`, or a file holding `{"order": N, "coeffs": [...]}`.
//! Progeny: `sibuya:A`, `tilted-sibuya:A:RHO`, `delta1`,
//! `masses:Q0,Q1,...` (with `Q0 = 0`), or a file.

use std::fs;

use progeny_core::law::{OffspringLaw, ProgenyLaw};
use progeny_core::rational::ExactRational;
use progeny_core::series::PowerSeries;
use serde::Serialize;

use crate::CliError;

/// A parsed law argument, kept in its original spelling for the config echo.
#[derive(Debug, Clone, Serialize)]
#[serde(transparent)]
pub struct LawSpec(pub String);

fn rational(field: &str) -> Result<ExactRational, CliError> {
    field.parse().map_err(|e| CliError::Usage(format!("{e}")))
}

fn masses(list: &str) -> Result<PowerSeries, CliError> {
    let coeffs = list
        .split(',')
        .map(rational)
        .collect::<Result<Vec<_>, _>>()?;
    if coeffs.is_empty() {
        return Err(CliError::Usage("masses: needs at least one value".into()));
    }
    Ok(PowerSeries::from_coeffs(&coeffs))
}

fn series_file(path: &str) -> Result<PowerSeries, CliError> {
    let text = fs::read_to_string(path)
        .map_err(|e| CliError::Usage(format!("cannot read law file {path}: {e}")))?;
    serde_json::from_str(&text)
        .map_err(|e| CliError::Usage(format!("law file {path} is not a valid series: {e}")))
}

fn bad_shorthand(spec: &str, expected: &str) -> CliError {
    CliError::Usage(format!("cannot parse law {spec:?}; expected {expected}"))
}

impl LawSpec {
    pub fn offspring(&self, order: usize) -> Result<OffspringLaw, CliError> {
        let parts: Vec<&str> = self.0.split(':').collect();
        let law = match parts.as_slice() {
            ["geometric", alpha] => OffspringLaw::geometric(rational(alpha)?, order)?,
            ["sibuya-offspring", b] => OffspringLaw::sibuya_offspring(rational(b)?, order)?,
            ["sibuya-offspring", b, r] => {
                OffspringLaw::tilted_sibuya_offspring(rational(b)?, rational(r)?, order)?
            }
            ["delta0"] => OffspringLaw::delta0(),
            ["masses", list] => OffspringLaw::from_series(masses(list)?)?,
            [path] if !path.is_empty() => OffspringLaw::from_series(series_file(path)?)?,
            _ => {
                return Err(bad_shorthand(
                    &self.0,
                    "geometric:A, sibuya-offspring:B[:R], delta0, masses:..., or a file",
                ))
            }
        };
        Ok(law)
    }

    pub fn progeny(&self, order: usize) -> Result<ProgenyLaw, CliError> {
        let parts: Vec<&str> = self.0.split(':').collect();
        let law = match parts.as_slice() {
            ["sibuya", a] => ProgenyLaw::sibuya(rational(a)?, order)?,
            ["tilted-sibuya", a, rho] => {
                ProgenyLaw::tilted_sibuya(rational(a)?, rational(rho)?, order)?
            }
            ["delta1"] => ProgenyLaw::delta1(),
            ["masses", list] => ProgenyLaw::from_series(masses(list)?)?,
            [path] if !path.is_empty() => ProgenyLaw::from_series(series_file(path)?)?,
            _ => {
                return Err(bad_shorthand(
                    &self.0,
                    "sibuya:A, tilted-sibuya:A:RHO, delta1, masses:..., or a file",
                ))
            }
        };
        Ok(law)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use progeny_core::rational::rat;

    #[test]
    fn shorthands() {
        let p = LawSpec("geometric:3/10".into()).offspring(4).unwrap();
        assert_eq!(p.mass(0), rat(7, 10));
        let q = LawSpec("tilted-sibuya:1/2:21/25".into())
            .progeny(3)
            .unwrap();
        assert_eq!(q.order(), 3);
        let m = LawSpec("masses:0,1/2,1/2".into()).progeny(0).unwrap();
        assert!(m.is_exactly_finite());
        assert!(LawSpec("geometric:0.3".into()).offspring(4).is_err());
        assert!(LawSpec("nonsense:1:2:3".into()).offspring(4).is_err());
    }
}
