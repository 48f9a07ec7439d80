//! Monte Carlo model of attacks on threshold-verification schemes, where
//! identities verify each other in small random groups and must show up
//! some fraction of the time.
//!
//! The attacker's identities are `0..n_sybil`. Groups made only of Sybils
//! verify themselves for free; elsewhere the attacker hires a minion for one
//! synchronized meeting only when an identity would otherwise drop below the
//! attendance threshold.

mod cover;
mod economy;
mod groups;
mod run;
mod scenario;
mod timeshift;

pub use cover::{attacker_cover, AttendanceBook, AttendancePolicy, MinionPlan};
pub use economy::{advantage, economy_step, CycleLedger, Economics};
pub use groups::{assign_groups, lucky_fraction_exact, Partition};
pub use run::{
    mean_stderr, plateau_curve, plateau_curve_with, replication_rng, run_replication, run_scenario,
    write_csv, CycleAggregate, CycleMetrics, PlateauConfig, PlateauPoint, ReplicationSummary,
    SimResult, SimSummary,
};
pub use scenario::SybilScenario;
pub use timeshift::{timeshift_demo, TimeshiftOutcome, VerificationMode};
