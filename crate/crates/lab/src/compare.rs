//! Cross-run relations.
//!
//! Relations are short phrases over a quantity of each report:
//!
//! * `rate ratio = 2 ± 0.3`: `q(a) / q(b)` within an absolute tolerance,
//! * `correction ratio = 16 within factor 3`: the ratio within a factor,
//! * `rates equal ± 0`: `|q(a) - q(b)|` within a tolerance.
//!
//! Quantities are `rate` and `exponent` of the first successful fit, or any
//! report metric by name (`correction` is short for `correction_norm`).
//! `+-` may replace `±`.

use serde::{Deserialize, Serialize};

use crate::report::RunReport;
use crate::HarnessError;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Test {
    Ratio { target: f64, tolerance: f64 },
    RatioFactor { target: f64, factor: f64 },
    Equal { tolerance: f64 },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Relation {
    pub quantity: String,
    pub test: Test,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Verdict {
    pub relation: String,
    pub quantity: String,
    pub a: f64,
    pub b: f64,
    /// The ratio, or the absolute difference for equality relations.
    pub measured: f64,
    pub passed: bool,
}

fn number(s: &str, rel: &str) -> Result<f64, HarnessError> {
    s.trim()
        .parse()
        .map_err(|_| HarnessError::Relation(rel.to_string()))
}

impl Relation {
    pub fn parse(text: &str) -> Result<Self, HarnessError> {
        let bad = || HarnessError::Relation(text.to_string());
        let norm = text.replace("+-", "±");
        let words: Vec<&str> = norm.split_whitespace().collect();
        let quantity = |w: &str| match w.trim_end_matches('s') {
            "correction" => "correction_norm".to_string(),
            q => q.to_string(),
        };
        match words.as_slice() {
            [q, "ratio", "=", target, "±", tol] => Ok(Self {
                quantity: quantity(q),
                test: Test::Ratio {
                    target: number(target, text)?,
                    tolerance: number(tol, text)?,
                },
            }),
            [q, "ratio", "=", target, "within", "factor", f] => {
                let factor = number(f, text)?;
                if !(factor >= 1.0) {
                    return Err(bad());
                }
                Ok(Self {
                    quantity: quantity(q),
                    test: Test::RatioFactor {
                        target: number(target, text)?,
                        factor,
                    },
                })
            }
            [q, "equal", "±", tol] => Ok(Self {
                quantity: quantity(q),
                test: Test::Equal {
                    tolerance: number(tol, text)?,
                },
            }),
            _ => Err(bad()),
        }
    }

    fn value(&self, r: &RunReport) -> Option<f64> {
        match self.quantity.as_str() {
            "rate" => r.primary_fit().map(|f| f.rate),
            "exponent" => r.primary_fit().map(|f| f.exponent),
            m => r.metrics.get(m).copied(),
        }
    }
}

/// Evaluates `relation` on two reports of the same kind.
pub fn compare(a: &RunReport, b: &RunReport, relation: &str) -> Result<Verdict, HarnessError> {
    if a.kind != b.kind {
        return Err(HarnessError::Incompatible(
            a.kind.name().into(),
            b.kind.name().into(),
        ));
    }
    let rel = Relation::parse(relation)?;
    let missing = |which: &str| {
        HarnessError::Unavailable(format!("report {which} has no `{}`", rel.quantity))
    };
    let va = rel.value(a).ok_or_else(|| missing("a"))?;
    let vb = rel.value(b).ok_or_else(|| missing("b"))?;
    let (measured, passed) = match rel.test {
        Test::Ratio { target, tolerance } => {
            let q = va / vb;
            (q, (q - target).abs() <= tolerance)
        }
        Test::RatioFactor { target, factor } => {
            let q = va / vb;
            (q, q >= target / factor && q <= target * factor)
        }
        Test::Equal { tolerance } => {
            let d = (va - vb).abs();
            (d, d <= tolerance)
        }
    };
    Ok(Verdict {
        relation: relation.into(),
        quantity: rel.quantity,
        a: va,
        b: vb,
        measured,
        passed,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::config::ExperimentKind;

    fn report(kind: ExperimentKind, correction: f64) -> RunReport {
        let mut r = RunReport::new(kind, "00".into());
        r.metric("correction_norm", correction);
        r
    }

    #[test]
    fn parses() {
        let r = Relation::parse("rate ratio = 2 ± 0.3").unwrap();
        assert_eq!(r.quantity, "rate");
        assert_eq!(
            r.test,
            Test::Ratio {
                target: 2.0,
                tolerance: 0.3
            }
        );
        assert_eq!(
            Relation::parse("rates equal +- 0").unwrap().test,
            Test::Equal { tolerance: 0.0 }
        );
        let c = Relation::parse("correction ratio = 16 within factor 3").unwrap();
        assert_eq!(c.quantity, "correction_norm");
        assert!(Relation::parse("rate ratio is about 2").is_err());
        assert!(Relation::parse("rate ratio = 2 within factor 0.5").is_err());
    }

    #[test]
    fn factor_window() {
        let a = report(ExperimentKind::NonlinearDamping, 16.0 * 2.0);
        let b = report(ExperimentKind::NonlinearDamping, 1.0);
        let v = compare(&a, &b, "correction ratio = 16 within factor 3").unwrap();
        assert!(v.passed && v.measured == 32.0);
        let c = report(ExperimentKind::NonlinearDamping, 2.0 * 48.0);
        assert!(
            !compare(&c, &b, "correction ratio = 16 within factor 3")
                .unwrap()
                .passed
        );
    }

    #[test]
    fn kinds_must_match() {
        let a = report(ExperimentKind::LinearMixing, 1.0);
        let b = report(ExperimentKind::ToyCoupled, 1.0);
        assert!(matches!(
            compare(&a, &b, "rates equal ± 0"),
            Err(HarnessError::Incompatible(..))
        ));
        assert!(matches!(
            compare(&a, &a, "rates equal ± 0"),
            Err(HarnessError::Unavailable(..))
        ));
    }
}
