//! Monte Carlo power study: rejection rates over a grid of scenarios and
//! methods, with Monte Carlo standard errors and relative-efficiency
//! summaries.
//!
//! Within one replication every method sees the same dataset (common
//! random numbers), and each replication owns its own RNG stream, so the
//! aggregate is a pure function of the configuration and master seed no
//! matter how many worker threads run it. Replications whose analysis is
//! degenerate (zero variance, all-zero weights) count as non-rejections
//! and are tallied separately rather than silently dropped.

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::landmark::landmark_from_curves;
use crate::logrank::{make_weights, weighted_logrank, Scheme};
use crate::mwlrt::{modest_test, ModestConfig, VarianceKind};
use crate::normal::normal_quantile;
use crate::simulator::{simulate_trial, ReplicationRng, ScenarioSpec, TrialDesign};
use crate::survival::{kaplan_meier, Arm, ArmSelector, KmCurve, RiskTable, SubjectRecord};

/// One analysis method of the study grid.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum MethodSpec {
    /// Standard logrank test.
    Lrt,
    /// Weighted logrank with zero weight before `t_star`.
    Wlrt { t_star: f64 },
    /// Modestly weighted logrank with pivot `t_star`.
    Mwlrt { t_star: f64 },
    /// Landmark comparison at `t_star`.
    Landmark { t_star: f64 },
}

impl MethodSpec {
    pub fn family(&self) -> &'static str {
        match self {
            MethodSpec::Lrt => "lrt",
            MethodSpec::Wlrt { .. } => "wlrt",
            MethodSpec::Mwlrt { .. } => "mwlrt",
            MethodSpec::Landmark { .. } => "landmark",
        }
    }

    pub fn t_star(&self) -> Option<f64> {
        match self {
            MethodSpec::Lrt => None,
            MethodSpec::Wlrt { t_star }
            | MethodSpec::Mwlrt { t_star }
            | MethodSpec::Landmark { t_star } => Some(*t_star),
        }
    }

    pub fn label(&self) -> String {
        match self.t_star() {
            None => self.family().to_string(),
            Some(t) => format!("{}({t})", self.family()),
        }
    }

    fn validate(&self) -> Result<()> {
        if let Some(t) = self.t_star() {
            if !t.is_finite() || t < 0.0 {
                return Err(Error::invalid(format!(
                    "{}: t* must be finite and >= 0, got {t}",
                    self.family()
                )));
            }
        }
        Ok(())
    }
}

/// Full study configuration.
#[derive(Debug, Clone)]
pub struct StudyConfig {
    pub scenarios: Vec<ScenarioSpec>,
    pub methods: Vec<MethodSpec>,
    pub n_reps: u64,
    pub alpha_one_sided: f64,
    pub master_seed: u64,
    pub design: TrialDesign,
    pub mwlrt_variance: VarianceKind,
}

impl StudyConfig {
    /// Defaults: 10,000 replications, one-sided alpha 0.025, the canonical
    /// 100/12/36 design, plug-in variance for the modest test.
    pub fn new(scenarios: Vec<ScenarioSpec>, methods: Vec<MethodSpec>, master_seed: u64) -> Self {
        StudyConfig {
            scenarios,
            methods,
            n_reps: 10_000,
            alpha_one_sided: 0.025,
            master_seed,
            design: TrialDesign::canonical(),
            mwlrt_variance: VarianceKind::Plugin,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.scenarios.is_empty() || self.methods.is_empty() {
            return Err(Error::invalid(
                "study needs at least one scenario and one method".to_string(),
            ));
        }
        if self.n_reps == 0 {
            return Err(Error::invalid("n_reps must be >= 1".to_string()));
        }
        if !(self.alpha_one_sided > 0.0 && self.alpha_one_sided < 0.5) {
            return Err(Error::invalid(format!(
                "alpha must lie in (0, 0.5), got {}",
                self.alpha_one_sided
            )));
        }
        for m in &self.methods {
            m.validate()?;
        }
        Ok(())
    }
}

/// Rejection tally for one scenario-method cell.
#[derive(Debug, Clone, PartialEq)]
pub struct PowerRow {
    pub scenario: String,
    pub method: String,
    pub t_star: Option<f64>,
    pub n_reps: u64,
    pub rejections: u64,
    pub rejection_rate: f64,
    pub mc_se: f64,
    pub degenerate: u64,
}

#[derive(Clone, Copy)]
enum Outcome {
    Rejected,
    NotRejected,
    Degenerate,
}

/// Run the study. Rows come back in configuration order: scenarios outer,
/// methods inner.
pub fn run_power_study(config: &StudyConfig) -> Result<Vec<PowerRow>> {
    config.validate()?;
    let z_crit = normal_quantile(1.0 - config.alpha_one_sided)?;
    let n_methods = config.methods.len();
    let mut rows = Vec::with_capacity(config.scenarios.len() * n_methods);

    for spec in &config.scenarios {
        let zero = || vec![(0u64, 0u64); n_methods];
        let counts = (0..config.n_reps)
            .into_par_iter()
            .map(|rep| {
                let mut rng =
                    ReplicationRng::for_scenario(config.master_seed, spec.id, rep);
                let records = simulate_trial(spec, &config.design, &mut rng);
                evaluate_dataset(&records, &config.methods, z_crit, config.mwlrt_variance)
            })
            .fold(zero, |mut acc, outcomes| {
                for (slot, outcome) in acc.iter_mut().zip(outcomes) {
                    match outcome {
                        Outcome::Rejected => slot.0 += 1,
                        Outcome::Degenerate => slot.1 += 1,
                        Outcome::NotRejected => {}
                    }
                }
                acc
            })
            .reduce(zero, |mut a, b| {
                for (x, y) in a.iter_mut().zip(b) {
                    x.0 += y.0;
                    x.1 += y.1;
                }
                a
            });

        for (method, (rejections, degenerate)) in config.methods.iter().zip(counts) {
            let rate = rejections as f64 / config.n_reps as f64;
            rows.push(PowerRow {
                scenario: spec.id.label(),
                method: method.family().to_string(),
                t_star: method.t_star(),
                n_reps: config.n_reps,
                rejections,
                rejection_rate: rate,
                mc_se: (rate * (1.0 - rate) / config.n_reps as f64).sqrt(),
                degenerate,
            });
        }
    }
    Ok(rows)
}

/// Analyze one dataset with every method; shared structures (risk table,
/// per-arm curves) are built once.
fn evaluate_dataset(
    records: &[SubjectRecord],
    methods: &[MethodSpec],
    z_crit: f64,
    mwlrt_variance: VarianceKind,
) -> Vec<Outcome> {
    let table = match RiskTable::from_records(records) {
        Ok(t) => t,
        Err(Error::NoEvents) => return vec![Outcome::Degenerate; methods.len()],
        Err(e) => panic!("simulated dataset failed validation: {e}"),
    };

    let needs_curves = methods
        .iter()
        .any(|m| matches!(m, MethodSpec::Landmark { .. }));
    let curves: Option<(Option<KmCurve>, Option<KmCurve>)> = if needs_curves {
        Some((
            km_or_flat(records, Arm::Control),
            km_or_flat(records, Arm::Experimental),
        ))
    } else {
        None
    };

    methods
        .iter()
        .map(|method| {
            let result = match method {
                MethodSpec::Lrt => make_weights(&table, Scheme::Standard)
                    .and_then(|w| weighted_logrank(&table, &w)),
                MethodSpec::Wlrt { t_star } => {
                    make_weights(&table, Scheme::Threshold { t_star: *t_star })
                        .and_then(|w| weighted_logrank(&table, &w))
                }
                MethodSpec::Mwlrt { t_star } => ModestConfig::new(*t_star)
                    .and_then(|cfg| modest_test(&table, &cfg, mwlrt_variance)),
                MethodSpec::Landmark { t_star } => {
                    let (c0, c1) = curves.as_ref().expect("curves built for landmark methods");
                    landmark_from_curves(c0.as_ref(), c1.as_ref(), *t_star)
                }
            };
            match result {
                Ok(test) => {
                    if test.z > z_crit {
                        Outcome::Rejected
                    } else {
                        Outcome::NotRejected
                    }
                }
                Err(e) if e.is_degenerate() || matches!(e, Error::NoEvents) => Outcome::Degenerate,
                Err(e) => panic!("unexpected analysis failure: {e}"),
            }
        })
        .collect()
}

fn km_or_flat(records: &[SubjectRecord], arm: Arm) -> Option<KmCurve> {
    kaplan_meier(records, ArmSelector::Single(arm)).ok()
}

/// Relative efficiency of method A versus method B at the given one-sided
/// level: `100 * ((z_{1-a} + Phi^{-1}(p_A)) / (z_{1-a} + Phi^{-1}(p_B)))^2`,
/// the squared ratio of standardized drifts, i.e. the sample-size ratio
/// under a normal approximation.
pub fn relative_efficiency(power_a: f64, power_b: f64, alpha_one_sided: f64) -> Result<f64> {
    for (name, p) in [("power_a", power_a), ("power_b", power_b)] {
        if !(p > 0.0 && p < 1.0) {
            return Err(Error::domain(format!(
                "{name} must lie strictly inside (0,1), got {p}"
            )));
        }
    }
    let z = normal_quantile(1.0 - alpha_one_sided)?;
    let drift_a = z + normal_quantile(power_a)?;
    let drift_b = z + normal_quantile(power_b)?;
    let ratio = 100.0 * (drift_a / drift_b).powi(2);
    if !ratio.is_finite() {
        return Err(Error::domain(
            "relative efficiency undefined: zero drift in the reference method".to_string(),
        ));
    }
    Ok(ratio)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::simulator::{scenario, ScenarioId};

    #[test]
    fn relative_efficiency_reference_values() {
        // frozen reference pairs for the efficiency formula
        let ph = relative_efficiency(0.748, 0.766, 0.025).unwrap();
        assert!((ph - 95.7618810009).abs() < 1e-6, "ph = {ph}");
        assert!((ph - 96.0).abs() < 0.5);
        let nph = relative_efficiency(0.796, 0.697, 0.025).unwrap();
        assert!((nph - 126.758636166).abs() < 1e-6, "nph = {nph}");
        assert!((nph - 127.0).abs() < 0.5);
    }

    #[test]
    fn equal_powers_give_hundred_percent() {
        for p in [0.1, 0.4, 0.75, 0.9] {
            let re = relative_efficiency(p, p, 0.025).unwrap();
            assert!((re - 100.0).abs() < 1e-12);
        }
    }

    #[test]
    fn reciprocal_symmetry() {
        let ab = relative_efficiency(0.83, 0.61, 0.025).unwrap();
        let ba = relative_efficiency(0.61, 0.83, 0.025).unwrap();
        assert!((ab * ba - 10_000.0).abs() < 1e-9);
    }

    #[test]
    fn boundary_powers_rejected() {
        assert!(relative_efficiency(0.0, 0.5, 0.025).is_err());
        assert!(relative_efficiency(0.5, 1.0, 0.025).is_err());
        assert!(relative_efficiency(-0.1, 0.5, 0.025).is_err());
    }

    #[test]
    fn method_labels() {
        assert_eq!(MethodSpec::Lrt.label(), "lrt");
        assert_eq!(MethodSpec::Wlrt { t_star: 6.0 }.label(), "wlrt(6)");
        assert_eq!(MethodSpec::Mwlrt { t_star: 18.0 }.label(), "mwlrt(18)");
        assert_eq!(MethodSpec::Landmark { t_star: 27.0 }.label(), "landmark(27)");
        assert_eq!(MethodSpec::Lrt.t_star(), None);
    }

    #[test]
    fn config_validation() {
        let mut config = StudyConfig::new(
            vec![scenario(ScenarioId::I).unwrap()],
            vec![MethodSpec::Lrt],
            1,
        );
        assert!(config.validate().is_ok());
        config.n_reps = 0;
        assert!(config.validate().is_err());
        config.n_reps = 10;
        config.alpha_one_sided = 0.6;
        assert!(config.validate().is_err());
        config.alpha_one_sided = 0.025;
        config.methods = vec![MethodSpec::Wlrt { t_star: -3.0 }];
        assert!(config.validate().is_err());
        config.methods = vec![];
        assert!(config.validate().is_err());
    }

    #[test]
    fn small_study_is_deterministic_and_consistent() {
        let mut config = StudyConfig::new(
            vec![scenario(ScenarioId::I).unwrap(), scenario(ScenarioId::IV).unwrap()],
            vec![
                MethodSpec::Lrt,
                MethodSpec::Wlrt { t_star: 6.0 },
                MethodSpec::Mwlrt { t_star: 12.0 },
                MethodSpec::Landmark { t_star: 15.0 },
            ],
            271828,
        );
        config.n_reps = 60;
        config.design = TrialDesign::new(25, 12.0, 36.0).unwrap();
        let rows = run_power_study(&config).unwrap();
        assert_eq!(rows.len(), 8);
        for row in &rows {
            assert_eq!(row.n_reps, 60);
            assert!(row.rejections + row.degenerate <= row.n_reps);
            let rate = row.rejections as f64 / row.n_reps as f64;
            assert_eq!(row.rejection_rate, rate);
            let se = (rate * (1.0 - rate) / row.n_reps as f64).sqrt();
            assert_eq!(row.mc_se, se);
        }
        assert_eq!(rows[0].scenario, "I");
        assert_eq!(rows[4].scenario, "IV");
        assert_eq!(rows[1].method, "wlrt");
        assert_eq!(rows[1].t_star, Some(6.0));
        let again = run_power_study(&config).unwrap();
        assert_eq!(rows, again);
    }

    #[test]
    fn study_is_invariant_to_thread_count() {
        let mut config = StudyConfig::new(
            vec![scenario(ScenarioId::II).unwrap()],
            vec![MethodSpec::Lrt, MethodSpec::Mwlrt { t_star: 9.0 }],
            55,
        );
        config.n_reps = 40;
        config.design = TrialDesign::new(20, 12.0, 36.0).unwrap();
        let single = rayon::ThreadPoolBuilder::new()
            .num_threads(1)
            .build()
            .unwrap()
            .install(|| run_power_study(&config).unwrap());
        let several = rayon::ThreadPoolBuilder::new()
            .num_threads(4)
            .build()
            .unwrap()
            .install(|| run_power_study(&config).unwrap());
        assert_eq!(single, several);
    }

    #[test]
    fn impossible_grid_points_degenerate_not_fatal() {
        let mut config = StudyConfig::new(
            vec![scenario(ScenarioId::I).unwrap()],
            vec![MethodSpec::Wlrt { t_star: 500.0 }],
            9,
        );
        config.n_reps = 12;
        config.design = TrialDesign::new(10, 12.0, 36.0).unwrap();
        let rows = run_power_study(&config).unwrap();
        assert_eq!(rows[0].rejections, 0);
        assert_eq!(rows[0].degenerate, 12);
    }
}
