//! Survival analysis for two-arm trials under non-proportional hazards:
//! weighted and modestly weighted logrank tests with their score-statistic
//! duals, Kaplan-Meier estimation, landmark comparisons, a
//! piecewise-exponential trial simulator, and a Monte Carlo power-study
//! harness.
//!
//! The central object is the [`survival::RiskTable`], built once per
//! dataset; every test consumes it. Weight schemes and score sets convert
//! into each other ([`scores`]), and the modest construction ([`mwlrt`])
//! produces non-increasing scores, the property that keeps one-sided
//! inference honest when survival on one arm is uniformly worse.

pub mod dataset;
pub mod error;
pub mod harness;
pub mod landmark;
pub mod logrank;
pub mod mwlrt;
pub mod normal;
pub mod scores;
pub mod simulator;
pub mod survival;

pub use error::{Error, Result};

pub use dataset::{read_dataset, write_dataset, DATASET_HEADER};
pub use harness::{relative_efficiency, run_power_study, MethodSpec, PowerRow, StudyConfig};
pub use landmark::landmark_test;
pub use logrank::{make_weights, weighted_logrank, Scheme, TestResult, WeightScheme};
pub use mwlrt::{modest_scores, modest_test, ModestConfig, ModestScores, VarianceKind};
pub use normal::{normal_cdf, normal_pdf, normal_quantile};
pub use scores::{
    score_statistic, scores_to_weights, strong_null_safe, weights_to_scores, RecoveredWeights,
    ScoreSet, ScoreTestResult,
};
pub use simulator::{
    sample_survival, scenario, scenario_catalog, simulate_trial, ArmDistribution, ReplicationRng,
    ScenarioId, ScenarioSpec, TrialDesign,
};
pub use survival::{kaplan_meier, Arm, ArmSelector, KmCurve, RiskRow, RiskTable, SubjectRecord};
