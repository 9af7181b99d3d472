//! Score-statistic representation of weighted logrank tests.
//!
//! Every weight scheme has a dual set of per-subject scores: `c_j` for an
//! event at `t_j` and `C_j` for a censoring in `[t_j, t_{j+1})`, with
//! `C_0 = 0` covering censorings before the first event. The conversions
//! are
//!
//! ```text
//! C_j = -sum_{i<=j} w_i d_i / n_i,        c_j = w_j + C_j
//! w_{j+1} = (w_j + c_{j+1} - c_j) n_{j+1} / (n_{j+1} - d_{j+1})
//! ```
//!
//! and the score statistic `S = sum d_{0,j} c_j + sum l_{0,j} C_j` equals
//! `U` from the weighted form. Its permutation variance assumes equal
//! censoring distributions on the two arms; that assumption is not
//! checkable from the data and is simply documented here.
//!
//! A score set whose event and censor scores are non-increasing (and with
//! `c_j >= C_j` row by row) never rewards swapping a longer survival time
//! for a shorter one; [`strong_null_safe`] flags exactly that property.

use crate::error::{Error, Result};
use crate::logrank::WeightScheme;
use crate::survival::RiskTable;

/// Tolerance for the centering precondition and the safety diagnostic,
/// relative to the magnitude of the scores involved.
const SCORE_TOL: f64 = 1e-9;

/// Event scores `c_1..c_k` plus censor scores `C_0..C_k` aligned to a
/// risk table (`censor[0]` is the pre-first-event bucket, always 0 for
/// converted weights).
#[derive(Debug, Clone, PartialEq)]
pub struct ScoreSet {
    event: Vec<f64>,
    censor: Vec<f64>,
}

impl ScoreSet {
    pub fn new(table: &RiskTable, event: Vec<f64>, censor: Vec<f64>) -> Result<Self> {
        if event.len() != table.len() || censor.len() != table.len() + 1 {
            return Err(Error::invalid(format!(
                "score lengths (c: {}, C: {}) do not match table with {} rows",
                event.len(),
                censor.len(),
                table.len()
            )));
        }
        if event
            .iter()
            .chain(censor.iter())
            .any(|s| !s.is_finite())
        {
            return Err(Error::invalid("scores must be finite".to_string()));
        }
        Ok(ScoreSet { event, censor })
    }

    /// `c_1..c_k`.
    pub fn event_scores(&self) -> &[f64] {
        &self.event
    }

    /// `C_0..C_k`, index 0 being the pre-first-event bucket.
    pub fn censor_scores(&self) -> &[f64] {
        &self.censor
    }

    /// `sum_j d_j c_j + sum_{j=0..k} l_j C_j`; zero (up to rounding) for
    /// any score set derived from weights.
    pub fn centering_residual(&self, table: &RiskTable) -> f64 {
        let pre = table.pre_event_censored();
        let mut acc = (pre[0] + pre[1]) as f64 * self.censor[0];
        for (j, row) in table.rows().iter().enumerate() {
            acc += row.d() as f64 * self.event[j];
            acc += row.l() as f64 * self.censor[j + 1];
        }
        acc
    }

    fn magnitude(&self) -> f64 {
        self.event
            .iter()
            .chain(self.censor.iter())
            .fold(0.0f64, |m, s| m.max(s.abs()))
    }
}

/// True when the scores are non-increasing over time in every sense that
/// matters for strong-null safety: `c` non-increasing, `C` non-increasing
/// (starting from `C_0`), and `c_j >= C_j` for every row.
pub fn strong_null_safe(scores: &ScoreSet) -> bool {
    let tol = SCORE_TOL * scores.magnitude().max(1.0);
    let c = scores.event_scores();
    let cc = scores.censor_scores();
    let c_ok = c.windows(2).all(|w| w[0] >= w[1] - tol);
    let cc_ok = cc.windows(2).all(|w| w[0] >= w[1] - tol);
    let cross_ok = c.iter().zip(&cc[1..]).all(|(cj, ccj)| cj >= &(ccj - tol));
    c_ok && cc_ok && cross_ok
}

/// Convert weights to their dual scores.
pub fn weights_to_scores(table: &RiskTable, scheme: &WeightScheme) -> Result<ScoreSet> {
    if scheme.weights().len() != table.len() {
        return Err(Error::invalid(format!(
            "weight length {} does not match table rows {}",
            scheme.weights().len(),
            table.len()
        )));
    }
    Ok(raw_weights_to_scores(table, scheme.weights()))
}

pub(crate) fn raw_weights_to_scores(table: &RiskTable, weights: &[f64]) -> ScoreSet {
    let k = table.len();
    let mut event = Vec::with_capacity(k);
    let mut censor = Vec::with_capacity(k + 1);
    censor.push(0.0);
    let mut cum = 0.0;
    for (row, &w) in table.rows().iter().zip(weights) {
        cum += w * row.d() as f64 / row.n() as f64;
        censor.push(-cum);
        event.push(w - cum);
    }
    ScoreSet { event, censor }
}

/// Weights recovered from event scores, with rows whose weight is
/// unidentifiable (risk set exhausted, `n_j = d_j`) flagged.
#[derive(Debug, Clone, PartialEq)]
pub struct RecoveredWeights {
    pub scheme: WeightScheme,
    /// True at rows where the recursion's denominator vanishes; such rows
    /// contribute nothing to either the statistic or the variance, so the
    /// carried value there is a convention, not information.
    pub variance_null: Vec<bool>,
}

/// Invert the score-to-weight relation given the event scores `c_1..c_k`.
///
/// The first weight solves the conversion at `j = 1`
/// (`w_1 = c_1 n_1 / (n_1 - d_1)`); later rows follow the recursion. Rows
/// with `n_j = d_j` carry `w_j = w_{j-1} + c_j - c_{j-1}` and are flagged.
pub fn scores_to_weights(table: &RiskTable, event_scores: &[f64]) -> Result<RecoveredWeights> {
    if table.is_empty() {
        return Err(Error::NoEvents);
    }
    if event_scores.len() != table.len() {
        return Err(Error::invalid(format!(
            "score length {} does not match table rows {}",
            event_scores.len(),
            table.len()
        )));
    }
    let mut weights = Vec::with_capacity(table.len());
    let mut variance_null = Vec::with_capacity(table.len());
    let mut prev_w = 0.0;
    let mut prev_c = 0.0;
    for (j, (row, &c)) in table.rows().iter().zip(event_scores).enumerate() {
        let exhausted = row.n() == row.d();
        let w = if exhausted {
            prev_w + c - prev_c
        } else {
            let n = row.n() as f64;
            let d = row.d() as f64;
            if j == 0 {
                c * n / (n - d)
            } else {
                (prev_w + c - prev_c) * n / (n - d)
            }
        };
        weights.push(w);
        variance_null.push(exhausted);
        prev_w = w;
        prev_c = c;
    }
    let scheme = WeightScheme::new(table, weights, "recovered")?;
    Ok(RecoveredWeights {
        scheme,
        variance_null,
    })
}

/// Score statistic with permutation mean zero and variance
/// `N_0 N_1 / (N (N-1)) (sum d_j c_j^2 + sum l_j C_j^2)`.
#[derive(Debug, Clone, PartialEq)]
pub struct ScoreTestResult {
    pub statistic: f64,
    pub variance: f64,
    pub z: f64,
}

/// Evaluate the score statistic on arm-0 counts. Positive values favour
/// the experimental arm.
pub fn score_statistic(table: &RiskTable, scores: &ScoreSet) -> Result<ScoreTestResult> {
    if scores.event.len() != table.len() {
        return Err(Error::invalid(format!(
            "score length {} does not match table rows {}",
            scores.event.len(),
            table.len()
        )));
    }
    let residual = scores.centering_residual(table);
    let scale = scores.magnitude().max(1.0) * table.total_size() as f64;
    if residual.abs() > SCORE_TOL * scale {
        return Err(Error::invalid(format!(
            "scores are not centered: residual {residual}"
        )));
    }

    let pre = table.pre_event_censored();
    let mut statistic = pre[0] as f64 * scores.censor[0];
    let mut spread = (pre[0] + pre[1]) as f64 * scores.censor[0] * scores.censor[0];
    for (j, row) in table.rows().iter().enumerate() {
        statistic += row.events[0] as f64 * scores.event[j]
            + row.censored_after[0] as f64 * scores.censor[j + 1];
        spread += row.d() as f64 * scores.event[j] * scores.event[j]
            + row.l() as f64 * scores.censor[j + 1] * scores.censor[j + 1];
    }
    let [n0, n1] = table.arm_sizes();
    let n = (n0 + n1) as f64;
    let variance = if n0 == 0 || n1 == 0 || n < 2.0 {
        0.0
    } else {
        (n0 as f64) * (n1 as f64) / (n * (n - 1.0)) * spread
    };
    if !variance.is_finite() || variance <= 0.0 {
        return Err(Error::DegenerateVariance(
            "permutation variance of the score statistic is zero".to_string(),
        ));
    }
    Ok(ScoreTestResult {
        statistic,
        variance,
        z: statistic / variance.sqrt(),
    })
}
