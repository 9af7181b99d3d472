//! Modestly weighted logrank test: unit event scores before a pivot time
//! `t*`, frozen weights after.
//!
//! Up to the pivot the construction fixes `c_j = 1` and derives the
//! weights, which makes `w_j = 1 / S_pooled(t_j)` (reciprocal pooled
//! Kaplan-Meier). From the pivot on, the weight freezes at its last
//! pre-pivot value (1 when no event precedes the pivot, which reduces the
//! whole test to the standard logrank test) and the scores follow from the
//! weight-to-score conversion. The resulting scores are non-increasing,
//! which is exactly the property the safety diagnostic in [`crate::scores`]
//! checks.

use crate::error::{Error, Result};
use crate::logrank::{weighted_logrank, Scheme, TestResult, WeightScheme};
use crate::scores::{score_statistic, ScoreSet};
use crate::survival::RiskTable;

/// Pivot configuration. The pivot index is `j* = max{ j : t_j < t* }`
/// (0 when no event time precedes the pivot).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ModestConfig {
    t_star: f64,
}

impl ModestConfig {
    pub fn new(t_star: f64) -> Result<Self> {
        if !t_star.is_finite() || t_star < 0.0 {
            return Err(Error::domain(format!(
                "modest pivot t* must be finite and >= 0, got {t_star}"
            )));
        }
        Ok(ModestConfig { t_star })
    }

    pub fn t_star(&self) -> f64 {
        self.t_star
    }

    /// Number of rows strictly before the pivot.
    pub fn pivot_index(&self, table: &RiskTable) -> usize {
        table
            .event_times()
            .partition_point(|&t| t < self.t_star)
    }
}

/// Which variance estimate standardizes the modest statistic.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum VarianceKind {
    /// The weighted-logrank plug-in estimate (default).
    Plugin,
    /// The permutation variance of the score form.
    Permutation,
}

/// Derived weights and scores of a modest test on one table.
#[derive(Debug, Clone, PartialEq)]
pub struct ModestScores {
    pub weights: WeightScheme,
    pub scores: ScoreSet,
}

/// Build the modest weights and their dual scores.
pub fn modest_scores(table: &RiskTable, config: &ModestConfig) -> Result<ModestScores> {
    let k = table.len();
    let pivot = config.pivot_index(table);
    let mut weights = Vec::with_capacity(k);
    let mut event = Vec::with_capacity(k);
    let mut censor = Vec::with_capacity(k + 1);
    censor.push(0.0);

    let mut prev_w = 1.0; // w_0 := 1 so an empty pre-pivot segment is standard
    let mut cum = 0.0; // sum_i w_i d_i / n_i
    for (j, row) in table.rows().iter().enumerate() {
        let n = row.n() as f64;
        let d = row.d() as f64;
        let w = if j < pivot && row.n() > row.d() {
            // growth recursion keeping c_j = 1: w_j = w_{j-1} n_j/(n_j - d_j)
            prev_w * n / (n - d)
        } else {
            // frozen after the pivot; an exhausted pre-pivot row (only ever
            // the last row) also carries, since its weight cannot matter
            prev_w
        };
        cum += w * d / n;
        censor.push(-cum);
        event.push(w - cum);
        weights.push(w);
        prev_w = w;
    }

    let weights = WeightScheme::new(table, weights, Scheme::Modest { t_star: config.t_star }.label())?;
    let scores = ScoreSet::new(table, event, censor)?;
    Ok(ModestScores { weights, scores })
}

/// Run the modest test, standardizing by the chosen variance.
pub fn modest_test(
    table: &RiskTable,
    config: &ModestConfig,
    variance: VarianceKind,
) -> Result<TestResult> {
    let derived = modest_scores(table, config)?;
    match variance {
        VarianceKind::Plugin => weighted_logrank(table, &derived.weights),
        VarianceKind::Permutation => {
            let s = score_statistic(table, &derived.scores)?;
            TestResult::from_statistic(
                s.statistic,
                s.variance,
                derived.weights.label().to_string(),
            )
        }
    }
}
