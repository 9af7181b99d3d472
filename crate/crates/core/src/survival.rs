//! Subject-level data, the per-event-time risk table, and Kaplan-Meier
//! estimation with Greenwood variance.
//!
//! The [`RiskTable`] is the shared substrate of every test in this crate:
//! one row per distinct event time carrying at-risk, event, and censoring
//! counts per arm. Censorings tied with an event time count the subject as
//! at risk at that time and fall in that row's gap bucket (events before
//! censorings at equal times). Times compare by exact bit equality;
//! simulated data never collides, and real data with intended ties must
//! encode them identically.

use crate::error::{Error, Result};

/// Treatment arm. Encoded as 0 (control) / 1 (experimental) in dataset files.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Arm {
    Control,
    Experimental,
}

impl Arm {
    #[inline]
    pub fn index(self) -> usize {
        match self {
            Arm::Control => 0,
            Arm::Experimental => 1,
        }
    }

    pub fn code(self) -> u8 {
        self.index() as u8
    }

    pub fn from_code(code: u8) -> Result<Self> {
        match code {
            0 => Ok(Arm::Control),
            1 => Ok(Arm::Experimental),
            other => Err(Error::invalid(format!(
                "arm code must be 0 or 1, got {other}"
            ))),
        }
    }

    pub fn other(self) -> Self {
        match self {
            Arm::Control => Arm::Experimental,
            Arm::Experimental => Arm::Control,
        }
    }
}

/// One patient's observed follow-up: time in months, event indicator
/// (`true` = event observed, `false` = censored), and treatment arm.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SubjectRecord {
    pub time: f64,
    pub event: bool,
    pub arm: Arm,
}

impl SubjectRecord {
    /// Validated constructor; time must be finite and nonnegative.
    pub fn new(time: f64, event: bool, arm: Arm) -> Result<Self> {
        if !time.is_finite() || time < 0.0 {
            return Err(Error::invalid(format!(
                "subject time must be finite and >= 0, got {time}"
            )));
        }
        Ok(SubjectRecord { time, event, arm })
    }
}

/// Counts at one distinct event time `t_j`.
///
/// `censored_after` holds censorings in `[t_j, t_{j+1})`; for the last row
/// the interval extends to infinity.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RiskRow {
    pub time: f64,
    pub at_risk: [u64; 2],
    pub events: [u64; 2],
    pub censored_after: [u64; 2],
}

impl RiskRow {
    /// Total at risk `n_j`.
    #[inline]
    pub fn n(&self) -> u64 {
        self.at_risk[0] + self.at_risk[1]
    }

    /// Total events `d_j`.
    #[inline]
    pub fn d(&self) -> u64 {
        self.events[0] + self.events[1]
    }

    /// Total censorings in the row's gap `l_j`.
    #[inline]
    pub fn l(&self) -> u64 {
        self.censored_after[0] + self.censored_after[1]
    }
}

/// Per-distinct-event-time counts for a two-arm dataset.
#[derive(Debug, Clone, PartialEq)]
pub struct RiskTable {
    event_times: Vec<f64>,
    rows: Vec<RiskRow>,
    pre_event_censored: [u64; 2],
    arm_sizes: [u64; 2],
}

impl RiskTable {
    /// Build the table from raw records.
    ///
    /// Ties among events at the same time pool into one row; a censoring
    /// tied with an event time counts the subject at risk there and lands
    /// in that row's gap bucket.
    pub fn from_records(records: &[SubjectRecord]) -> Result<Self> {
        for (i, r) in records.iter().enumerate() {
            if !r.time.is_finite() || r.time < 0.0 {
                return Err(Error::invalid(format!(
                    "record {i}: time must be finite and >= 0, got {}",
                    r.time
                )));
            }
        }
        if records.is_empty() || !records.iter().any(|r| r.event) {
            return Err(Error::NoEvents);
        }

        let mut event_times: Vec<f64> = records
            .iter()
            .filter(|r| r.event)
            .map(|r| r.time)
            .collect();
        event_times.sort_by(f64::total_cmp);
        event_times.dedup();

        let mut rows: Vec<RiskRow> = event_times
            .iter()
            .map(|&t| RiskRow {
                time: t,
                at_risk: [0, 0],
                events: [0, 0],
                censored_after: [0, 0],
            })
            .collect();
        let mut pre_event_censored = [0u64, 0u64];
        let mut arm_sizes = [0u64, 0u64];

        for r in records {
            let i = r.arm.index();
            arm_sizes[i] += 1;
            // Index of the last event time <= r.time, if any.
            let upto = event_times.partition_point(|&t| t <= r.time);
            if r.event {
                // An event's own time is an event time, so upto >= 1 and
                // event_times[upto - 1] == r.time exactly.
                rows[upto - 1].events[i] += 1;
            } else if upto == 0 {
                pre_event_censored[i] += 1;
            } else {
                rows[upto - 1].censored_after[i] += 1;
            }
        }

        // At risk at t_j = everyone whose row (event or gap censoring) is j
        // or later; suffix sums give n_{i,j} and the step-down identity.
        let mut suffix = [0u64, 0u64];
        for row in rows.iter_mut().rev() {
            suffix[0] += row.events[0] + row.censored_after[0];
            suffix[1] += row.events[1] + row.censored_after[1];
            row.at_risk = suffix;
        }

        debug_assert!(rows.iter().all(|r| r.d() >= 1));
        debug_assert_eq!(
            rows[0].at_risk[0] + pre_event_censored[0],
            arm_sizes[0]
        );
        debug_assert_eq!(
            rows[0].at_risk[1] + pre_event_censored[1],
            arm_sizes[1]
        );

        Ok(RiskTable {
            event_times,
            rows,
            pre_event_censored,
            arm_sizes,
        })
    }

    /// Number of distinct event times `k`.
    pub fn len(&self) -> usize {
        self.rows.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rows.is_empty()
    }

    pub fn rows(&self) -> &[RiskRow] {
        &self.rows
    }

    /// Strictly increasing distinct event times.
    pub fn event_times(&self) -> &[f64] {
        &self.event_times
    }

    pub fn time(&self, j: usize) -> f64 {
        self.event_times[j]
    }

    /// Censorings strictly before the first event time, per arm.
    pub fn pre_event_censored(&self) -> [u64; 2] {
        self.pre_event_censored
    }

    pub fn arm_size(&self, arm: Arm) -> u64 {
        self.arm_sizes[arm.index()]
    }

    pub fn arm_sizes(&self) -> [u64; 2] {
        self.arm_sizes
    }

    pub fn total_size(&self) -> u64 {
        self.arm_sizes[0] + self.arm_sizes[1]
    }

    /// Pooled product-limit survival after each event time.
    pub fn pooled_survival(&self) -> Vec<f64> {
        let mut s = 1.0;
        self.rows
            .iter()
            .map(|row| {
                s *= 1.0 - row.d() as f64 / row.n() as f64;
                s
            })
            .collect()
    }
}

/// Which subset of subjects a Kaplan-Meier fit uses.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ArmSelector {
    Pooled,
    Single(Arm),
}

/// A Kaplan-Meier curve: survival and Greenwood variance after each
/// distinct event time of the selected subset.
#[derive(Debug, Clone, PartialEq)]
pub struct KmCurve {
    times: Vec<f64>,
    survival: Vec<f64>,
    variance: Vec<f64>,
}

impl KmCurve {
    pub fn len(&self) -> usize {
        self.times.len()
    }

    pub fn is_empty(&self) -> bool {
        self.times.is_empty()
    }

    pub fn times(&self) -> &[f64] {
        &self.times
    }

    pub fn survival(&self) -> &[f64] {
        &self.survival
    }

    pub fn variance(&self) -> &[f64] {
        &self.variance
    }

    /// Right-continuous step lookup; 1.0 before the first event time.
    pub fn survival_at(&self, t: f64) -> f64 {
        match self.times.partition_point(|&x| x <= t) {
            0 => 1.0,
            j => self.survival[j - 1],
        }
    }

    /// Greenwood variance at `t`; 0.0 before the first event time.
    pub fn variance_at(&self, t: f64) -> f64 {
        match self.times.partition_point(|&x| x <= t) {
            0 => 0.0,
            j => self.variance[j - 1],
        }
    }
}

/// Kaplan-Meier estimate over the selected subset's own risk counts.
///
/// Errors with [`Error::NoEvents`] when the subset has no events.
pub fn kaplan_meier(records: &[SubjectRecord], selector: ArmSelector) -> Result<KmCurve> {
    let subset: Vec<SubjectRecord> = match selector {
        ArmSelector::Pooled => records.to_vec(),
        ArmSelector::Single(arm) => records.iter().copied().filter(|r| r.arm == arm).collect(),
    };
    let table = RiskTable::from_records(&subset)?;
    Ok(km_from_table(&table))
}

/// Product-limit and Greenwood from pooled risk-table counts.
pub(crate) fn km_from_table(table: &RiskTable) -> KmCurve {
    let mut survival = Vec::with_capacity(table.len());
    let mut variance = Vec::with_capacity(table.len());
    let mut s = 1.0;
    let mut greenwood_sum = 0.0;
    for row in table.rows() {
        let n = row.n() as f64;
        let d = row.d() as f64;
        s *= 1.0 - d / n;
        if row.n() > row.d() {
            greenwood_sum += d / (n * (n - d));
        }
        // When the curve hits zero the summand convention no longer
        // matters: s^2 annihilates the sum.
        survival.push(s);
        variance.push(s * s * greenwood_sum);
    }
    KmCurve {
        times: table.event_times().to_vec(),
        survival,
        variance,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn rec(time: f64, event: bool, arm: u8) -> SubjectRecord {
        SubjectRecord::new(time, event, Arm::from_code(arm).unwrap()).unwrap()
    }

    #[test]
    fn risk_table_two_arms_no_censoring() {
        // arm0 events at {1,3}, arm1 events at {2,4}
        let records = vec![
            rec(1.0, true, 0),
            rec(3.0, true, 0),
            rec(2.0, true, 1),
            rec(4.0, true, 1),
        ];
        let table = RiskTable::from_records(&records).unwrap();
        assert_eq!(table.len(), 4);
        assert_eq!(table.event_times(), &[1.0, 2.0, 3.0, 4.0]);
        let n: Vec<u64> = table.rows().iter().map(|r| r.n()).collect();
        assert_eq!(n, vec![4, 3, 2, 1]);
        let d0: Vec<u64> = table.rows().iter().map(|r| r.events[0]).collect();
        assert_eq!(d0, vec![1, 0, 1, 0]);
        assert_eq!(table.arm_sizes(), [2, 2]);
        assert_eq!(table.pre_event_censored(), [0, 0]);
    }

    #[test]
    fn tied_events_pool_into_one_row() {
        let records = vec![rec(1.0, true, 0), rec(1.0, true, 1)];
        let table = RiskTable::from_records(&records).unwrap();
        assert_eq!(table.len(), 1);
        let row = table.rows()[0];
        assert_eq!(row.d(), 2);
        assert_eq!(row.n(), 2);
        assert_eq!(row.events[0], 1);
    }

    #[test]
    fn censoring_tied_with_event_counts_at_risk() {
        let records = vec![rec(1.0, true, 0), rec(1.0, false, 0)];
        let table = RiskTable::from_records(&records).unwrap();
        assert_eq!(table.len(), 1);
        let row = table.rows()[0];
        assert_eq!(row.at_risk[0], 2);
        assert_eq!(row.events[0], 1);
        assert_eq!(row.censored_after[0], 1);
    }

    #[test]
    fn pre_event_censorings_fill_leading_bucket() {
        let records = vec![rec(0.5, false, 1), rec(1.0, true, 0), rec(2.0, false, 0)];
        let table = RiskTable::from_records(&records).unwrap();
        assert_eq!(table.pre_event_censored(), [0, 1]);
        assert_eq!(table.rows()[0].at_risk, [2, 0]);
        assert_eq!(table.rows()[0].censored_after, [1, 0]);
    }

    #[test]
    fn step_down_identity_holds() {
        let records = vec![
            rec(1.0, true, 0),
            rec(1.5, false, 0),
            rec(2.0, true, 1),
            rec(2.0, false, 1),
            rec(3.0, true, 0),
            rec(9.0, false, 1),
        ];
        let table = RiskTable::from_records(&records).unwrap();
        for i in 0..2 {
            assert_eq!(
                table.rows()[0].at_risk[i] + table.pre_event_censored()[i],
                table.arm_sizes()[i]
            );
            for j in 0..table.len() - 1 {
                let row = table.rows()[j];
                assert_eq!(
                    table.rows()[j + 1].at_risk[i],
                    row.at_risk[i] - row.events[i] - row.censored_after[i]
                );
            }
            let events: u64 = table.rows().iter().map(|r| r.events[i]).sum();
            let censored: u64 = table.rows().iter().map(|r| r.censored_after[i]).sum::<u64>()
                + table.pre_event_censored()[i];
            assert_eq!(events + censored, table.arm_sizes()[i]);
        }
    }

    #[test]
    fn empty_or_eventless_input_rejected() {
        assert!(matches!(
            RiskTable::from_records(&[]),
            Err(Error::NoEvents)
        ));
        let censored_only = vec![rec(1.0, false, 0), rec(2.0, false, 1)];
        assert!(matches!(
            RiskTable::from_records(&censored_only),
            Err(Error::NoEvents)
        ));
    }

    #[test]
    fn negative_time_rejected() {
        assert!(SubjectRecord::new(-1.0, true, Arm::Control).is_err());
        assert!(SubjectRecord::new(f64::NAN, true, Arm::Control).is_err());
        let bad = SubjectRecord {
            time: -2.0,
            event: true,
            arm: Arm::Control,
        };
        assert!(RiskTable::from_records(&[bad]).is_err());
    }

    #[test]
    fn km_product_limit_by_hand() {
        // times (1 event, 2 censored, 3 event), one arm
        let records = vec![rec(1.0, true, 0), rec(2.0, false, 0), rec(3.0, true, 0)];
        let km = kaplan_meier(&records, ArmSelector::Pooled).unwrap();
        assert_eq!(km.times(), &[1.0, 3.0]);
        assert!((km.survival()[0] - 2.0 / 3.0).abs() < 1e-15);
        assert_eq!(km.survival()[1], 0.0);
        // Greenwood at t=1: (2/3)^2 * 1/(3*2) = 2/27
        assert!((km.variance()[0] - 2.0 / 27.0).abs() < 1e-15);
        // Curve at zero has variance zero.
        assert_eq!(km.variance()[1], 0.0);
    }

    #[test]
    fn km_single_factor() {
        let records = vec![
            rec(1.0, true, 0),
            rec(5.5, false, 0),
            rec(6.0, false, 0),
            rec(7.0, false, 0),
        ];
        let km = kaplan_meier(&records, ArmSelector::Pooled).unwrap();
        assert_eq!(km.len(), 1);
        assert!((km.survival()[0] - 0.75).abs() < 1e-15);
    }

    #[test]
    fn km_step_lookup() {
        let records = vec![rec(1.0, true, 0), rec(2.0, false, 0), rec(3.0, true, 0)];
        let km = kaplan_meier(&records, ArmSelector::Pooled).unwrap();
        assert_eq!(km.survival_at(0.5), 1.0);
        assert_eq!(km.variance_at(0.5), 0.0);
        assert!((km.survival_at(1.0) - 2.0 / 3.0).abs() < 1e-15);
        assert!((km.survival_at(2.5) - 2.0 / 3.0).abs() < 1e-15);
        assert_eq!(km.survival_at(99.0), 0.0);
    }

    #[test]
    fn km_pooled_equals_single_arm_on_one_arm_data() {
        let records = vec![
            rec(1.0, true, 1),
            rec(2.0, false, 1),
            rec(4.0, true, 1),
            rec(5.0, true, 1),
        ];
        let pooled = kaplan_meier(&records, ArmSelector::Pooled).unwrap();
        let single = kaplan_meier(&records, ArmSelector::Single(Arm::Experimental)).unwrap();
        assert_eq!(pooled, single);
    }

    #[test]
    fn km_no_events_in_selected_arm() {
        let records = vec![rec(1.0, true, 0), rec(2.0, false, 1)];
        assert!(matches!(
            kaplan_meier(&records, ArmSelector::Single(Arm::Experimental)),
            Err(Error::NoEvents)
        ));
    }

    #[test]
    fn km_invariant_under_record_permutation() {
        let records = vec![
            rec(3.0, true, 0),
            rec(1.0, true, 1),
            rec(2.0, false, 0),
            rec(1.0, false, 1),
            rec(5.0, true, 0),
        ];
        let km = kaplan_meier(&records, ArmSelector::Pooled).unwrap();
        let mut shuffled = records.clone();
        shuffled.reverse();
        shuffled.swap(0, 2);
        let km2 = kaplan_meier(&shuffled, ArmSelector::Pooled).unwrap();
        assert_eq!(km, km2);
    }

    #[test]
    fn pooled_survival_matches_km() {
        let records = vec![
            rec(1.0, true, 0),
            rec(2.0, false, 1),
            rec(3.0, true, 1),
            rec(4.0, true, 0),
            rec(9.0, false, 0),
        ];
        let table = RiskTable::from_records(&records).unwrap();
        let km = kaplan_meier(&records, ArmSelector::Pooled).unwrap();
        for (a, b) in table.pooled_survival().iter().zip(km.survival()) {
            assert!((a - b).abs() < 1e-15);
        }
    }
}
