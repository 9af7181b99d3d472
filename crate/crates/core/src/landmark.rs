//! Landmark comparison of survival probabilities at a fixed time.
//!
//! `Z = (S1(t*) - S0(t*)) / sqrt(var S1(t*) + var S0(t*))` with per-arm
//! Kaplan-Meier estimates and Greenwood variances on the plain survival
//! scale. Nothing observed after the landmark can change the statistic.

use crate::error::{Error, Result};
use crate::logrank::TestResult;
use crate::survival::{kaplan_meier, Arm, ArmSelector, KmCurve, SubjectRecord};

/// Landmark test at `t_star` months. Positive Z favours the experimental
/// arm; the reported p-value is one-sided.
pub fn landmark_test(records: &[SubjectRecord], t_star: f64) -> Result<TestResult> {
    if !t_star.is_finite() || t_star < 0.0 {
        return Err(Error::domain(format!(
            "landmark time must be finite and >= 0, got {t_star}"
        )));
    }
    let has = |arm: Arm| records.iter().any(|r| r.arm == arm);
    if !has(Arm::Control) || !has(Arm::Experimental) {
        return Err(Error::invalid(
            "landmark test needs subjects on both arms".to_string(),
        ));
    }
    let curve0 = arm_curve(records, Arm::Control)?;
    let curve1 = arm_curve(records, Arm::Experimental)?;
    landmark_from_curves(curve0.as_ref(), curve1.as_ref(), t_star)
}

/// An arm with no events has the flat curve S = 1 with zero variance;
/// that is not an error here, only a zero contribution to the comparison.
fn arm_curve(records: &[SubjectRecord], arm: Arm) -> Result<Option<KmCurve>> {
    match kaplan_meier(records, ArmSelector::Single(arm)) {
        Ok(curve) => Ok(Some(curve)),
        Err(Error::NoEvents) => Ok(None),
        Err(other) => Err(other),
    }
}

pub(crate) fn landmark_from_curves(
    curve0: Option<&KmCurve>,
    curve1: Option<&KmCurve>,
    t_star: f64,
) -> Result<TestResult> {
    let (s0, v0) = at(curve0, t_star);
    let (s1, v1) = at(curve1, t_star);
    TestResult::from_statistic(s1 - s0, v0 + v1, format!("landmark({t_star})"))
}

fn at(curve: Option<&KmCurve>, t: f64) -> (f64, f64) {
    match curve {
        Some(c) => (c.survival_at(t), c.variance_at(t)),
        None => (1.0, 0.0),
    }
}
