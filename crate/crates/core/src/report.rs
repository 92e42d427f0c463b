//! Serializable results shared by the recovery pipelines.

use crate::reals::{rational_to_f64, Rational};
use serde::{Deserialize, Serialize};

/// One recovered real number: a point value with an error radius, plus the
/// exact rational when the pipeline certified one.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Estimate {
    pub value: f64,
    pub radius: f64,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub exact: Option<String>,
}

impl Estimate {
    pub fn approx(value: f64, radius: f64) -> Self {
        Estimate {
            value,
            radius,
            exact: None,
        }
    }

    pub fn exact(q: &Rational) -> Self {
        Estimate {
            value: rational_to_f64(q),
            radius: 0.0,
            exact: Some(q.to_string()),
        }
    }

    pub fn contains(&self, x: f64) -> bool {
        (self.value - x).abs() <= self.radius
    }
}

/// The JSON recovery report: `{family, d, N, recovered: [{value, radius}],
/// slope, gammas?, flags[], diagnostics}`.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct RecoveryReport {
    pub family: String,
    pub d: usize,
    #[serde(rename = "N")]
    pub n: u64,
    pub recovered: Vec<Estimate>,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub slope: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub slope_exact: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub gammas: Option<Vec<Estimate>>,
    pub flags: Vec<String>,
    #[serde(skip_serializing_if = "serde_json::Map::is_empty", default)]
    pub diagnostics: serde_json::Map<String, serde_json::Value>,
}

impl RecoveryReport {
    pub fn new(family: &str, d: usize, n: u64) -> Self {
        RecoveryReport {
            family: family.to_string(),
            d,
            n,
            recovered: Vec::new(),
            slope: None,
            slope_exact: None,
            gammas: None,
            flags: Vec::new(),
            diagnostics: serde_json::Map::new(),
        }
    }

    pub fn with_diagnostic(mut self, key: &str, value: serde_json::Value) -> Self {
        self.diagnostics.insert(key.to_string(), value);
        self
    }

    pub fn to_json_pretty(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serialization cannot fail")
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use num_bigint::BigInt;

    #[test]
    fn report_round_trips_through_json() {
        let mut r = RecoveryReport::new("linear-sum", 2, 100_000);
        r.recovered.push(Estimate::approx(0.4142, 0.002));
        r.recovered
            .push(Estimate::exact(&Rational::new(BigInt::from(2), BigInt::from(3))));
        r.slope = Some(1.1462);
        r.flags.push("weight-2-below-noise-floor".to_string());
        let json = r.to_json_pretty();
        assert!(json.contains("\"N\": 100000"));
        assert!(json.contains("\"2/3\""));
        let back: RecoveryReport = serde_json::from_str(&json).unwrap();
        assert_eq!(back.recovered, r.recovered);
        assert_eq!(back.flags, r.flags);
    }

    #[test]
    fn estimate_contains_uses_radius() {
        let e = Estimate::approx(0.5, 0.01);
        assert!(e.contains(0.505));
        assert!(!e.contains(0.52));
    }
}
