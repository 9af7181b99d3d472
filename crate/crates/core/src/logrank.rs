//! Weighted logrank statistic, its variance estimator, and weight schemes.
//!
//! The statistic is `U = sum_j w_j (d_{0,j} - d_j n_{0,j}/n_j)` with
//! estimated variance
//! `V = sum_j w_j^2 n_{0,j} n_{1,j} d_j (n_j - d_j) / (n_j^2 (n_j - 1))`.
//! Positive `U` means the control arm saw more events than expected, i.e.
//! evidence favouring the experimental arm; the reported p-value is
//! one-sided for that direction.

use crate::error::{Error, Result};
use crate::mwlrt::{modest_scores, ModestConfig};
use crate::normal::normal_cdf;
use crate::survival::RiskTable;

/// Weight-scheme descriptor.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Scheme {
    /// All weights one: the standard logrank test.
    Standard,
    /// Zero weight before `t_star`, one from `t_star` on.
    Threshold { t_star: f64 },
    /// Modest weighting with pivot `t_star` (unit scores before the pivot,
    /// frozen weights after).
    Modest { t_star: f64 },
}

impl Scheme {
    pub fn label(&self) -> String {
        match self {
            Scheme::Standard => "standard".into(),
            Scheme::Threshold { t_star } => format!("threshold({t_star})"),
            Scheme::Modest { t_star } => format!("modest({t_star})"),
        }
    }
}

/// Nonnegative per-event-time weights aligned to a risk table.
#[derive(Debug, Clone, PartialEq)]
pub struct WeightScheme {
    weights: Vec<f64>,
    label: String,
}

impl WeightScheme {
    /// Validated constructor: length must match the table, every weight
    /// finite and nonnegative, at least one strictly positive.
    pub fn new(table: &RiskTable, weights: Vec<f64>, label: impl Into<String>) -> Result<Self> {
        if weights.len() != table.len() {
            return Err(Error::invalid(format!(
                "weight length {} does not match table rows {}",
                weights.len(),
                table.len()
            )));
        }
        if weights.iter().any(|w| !w.is_finite() || *w < 0.0) {
            return Err(Error::invalid(
                "weights must be finite and nonnegative".to_string(),
            ));
        }
        if !weights.iter().any(|w| *w > 0.0) {
            return Err(Error::DegenerateWeights(
                "all weights are zero".to_string(),
            ));
        }
        Ok(WeightScheme {
            weights,
            label: label.into(),
        })
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn label(&self) -> &str {
        &self.label
    }
}

/// Outcome of a standardized test: statistic, variance estimate, Z, and
/// the one-sided p-value `1 - Phi(z)`.
#[derive(Debug, Clone, PartialEq)]
pub struct TestResult {
    pub statistic: f64,
    pub variance: f64,
    pub z: f64,
    pub p_one_sided: f64,
    pub method: String,
}

impl TestResult {
    pub(crate) fn from_statistic(
        statistic: f64,
        variance: f64,
        method: impl Into<String>,
    ) -> Result<Self> {
        if !variance.is_finite() || variance <= 0.0 {
            return Err(Error::DegenerateVariance(format!(
                "variance estimate {variance} admits no standardized statistic"
            )));
        }
        let z = statistic / variance.sqrt();
        Ok(TestResult {
            statistic,
            variance,
            z,
            p_one_sided: normal_cdf(-z),
            method: method.into(),
        })
    }
}

/// Build the weights of a [`Scheme`] for a given table.
pub fn make_weights(table: &RiskTable, scheme: Scheme) -> Result<WeightScheme> {
    match scheme {
        Scheme::Standard => {
            WeightScheme::new(table, vec![1.0; table.len()], scheme.label())
        }
        Scheme::Threshold { t_star } => {
            if !t_star.is_finite() || t_star < 0.0 {
                return Err(Error::domain(format!(
                    "threshold t* must be finite and >= 0, got {t_star}"
                )));
            }
            let weights: Vec<f64> = table
                .rows()
                .iter()
                .map(|row| if row.time < t_star { 0.0 } else { 1.0 })
                .collect();
            if !weights.iter().any(|w| *w > 0.0) {
                return Err(Error::DegenerateWeights(format!(
                    "threshold {t_star} lies beyond the last event time"
                )));
            }
            WeightScheme::new(table, weights, scheme.label())
        }
        Scheme::Modest { t_star } => {
            let derived = modest_scores(table, &ModestConfig::new(t_star)?)?;
            Ok(derived.weights)
        }
    }
}

/// Weighted logrank test on a risk table.
pub fn weighted_logrank(table: &RiskTable, scheme: &WeightScheme) -> Result<TestResult> {
    if scheme.weights().len() != table.len() {
        return Err(Error::invalid(format!(
            "weight length {} does not match table rows {}",
            scheme.weights().len(),
            table.len()
        )));
    }
    let mut statistic = 0.0;
    let mut variance = 0.0;
    for (row, &w) in table.rows().iter().zip(scheme.weights()) {
        let n = row.n() as f64;
        let d = row.d() as f64;
        let n0 = row.at_risk[0] as f64;
        let n1 = row.at_risk[1] as f64;
        let d0 = row.events[0] as f64;
        statistic += w * (d0 - d * n0 / n);
        if row.n() > 1 {
            variance += w * w * n0 * n1 * d * (n - d) / (n * n * (n - 1.0));
        }
    }
    TestResult::from_statistic(statistic, variance, scheme.label())
}
