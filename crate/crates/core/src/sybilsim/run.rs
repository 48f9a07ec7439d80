use std::io::Write;

use rand::SeedableRng;
use rand_chacha::ChaCha20Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::cover::{attacker_cover, AttendanceBook, AttendancePolicy};
use super::economy::{advantage, economy_step, Economics};
use super::groups::{assign_groups, lucky_fraction_exact};
use super::scenario::SybilScenario;
use crate::error::Result;

/// Generator for replication `rep`: ChaCha20 keyed by the master seed, with
/// the replication index as its stream number.
pub fn replication_rng(master_seed: u64, rep: u64) -> ChaCha20Rng {
    let mut rng = ChaCha20Rng::seed_from_u64(master_seed);
    rng.set_stream(rep);
    rng
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CycleMetrics {
    pub cycle: usize,
    pub sybil_count: usize,
    pub sybil_share: f64,
    pub lucky_fraction: f64,
    pub exposed_sybils: usize,
    pub minions_hired: usize,
    pub verified_sybils: usize,
    pub income: f64,
    pub cost: f64,
    pub profit: f64,
    pub advantage: f64,
    pub new_sybils: usize,
}

/// One replication. The initial Sybils have been running the lazy
/// attendance strategy for a while; Sybils bought later start fresh.
pub fn run_replication(sc: &SybilScenario, rng: &mut ChaCha20Rng) -> Vec<CycleMetrics> {
    let policy = AttendancePolicy::new(sc.threshold, sc.window);
    let econ = Economics {
        reward: sc.reward,
        minion_cost: sc.minion_cost,
        creation_cost: sc.creation_cost,
        reinvest: sc.reinvest,
        max_sybils: sc.max_sybils,
    };
    let mut book = AttendanceBook::new(policy);
    book.add_veterans(sc.n_sybil, rng);
    let mut sybils = sc.n_sybil;
    let mut out = Vec::with_capacity(sc.cycles);
    for cycle in 0..sc.cycles {
        let n = sc.n_honest + sybils;
        let groups = assign_groups(n, sc.group_size, rng);
        let plan = attacker_cover(&groups, sybils, &mut book);
        let count = sybils;
        let ledger = economy_step(&mut sybils, plan.verified, plan.minions(), &econ);
        book.add_fresh(ledger.new_sybils);
        out.push(CycleMetrics {
            cycle,
            sybil_count: count,
            sybil_share: count as f64 / n as f64,
            lucky_fraction: if count == 0 {
                0.0
            } else {
                plan.lucky as f64 / count as f64
            },
            exposed_sybils: plan.exposed,
            minions_hired: plan.minions(),
            verified_sybils: plan.verified,
            income: ledger.income,
            cost: ledger.cost,
            profit: ledger.profit,
            advantage: advantage(ledger.income, ledger.cost, count),
            new_sybils: ledger.new_sybils,
        });
    }
    out
}

/// Mean and standard error of the mean. Infinite samples make the mean
/// infinite; the error is then 0 if every sample is infinite.
pub fn mean_stderr(xs: &[f64]) -> (f64, f64) {
    let n = xs.len();
    if n == 0 {
        return (f64::NAN, f64::NAN);
    }
    let inf = xs.iter().filter(|x| x.is_infinite()).count();
    if inf > 0 {
        return (f64::INFINITY, if inf == n { 0.0 } else { f64::INFINITY });
    }
    let mean = xs.iter().sum::<f64>() / n as f64;
    if n == 1 {
        return (mean, 0.0);
    }
    let var = xs.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1) as f64;
    (mean, (var / n as f64).sqrt())
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CycleAggregate {
    pub cycle: usize,
    pub sybil_count: f64,
    pub sybil_share: f64,
    pub lucky_fraction: f64,
    pub minions: f64,
    pub income: f64,
    pub cost: f64,
    pub advantage: f64,
    pub sybil_count_stderr: f64,
    pub sybil_share_stderr: f64,
    pub lucky_fraction_stderr: f64,
    pub minions_stderr: f64,
    pub income_stderr: f64,
    pub cost_stderr: f64,
    pub advantage_stderr: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ReplicationSummary {
    pub total_income: f64,
    pub total_cost: f64,
    pub advantage: f64,
    pub mean_lucky_fraction: f64,
    pub mean_minions: f64,
    pub final_share: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SimSummary {
    pub replications: usize,
    pub mean_advantage: f64,
    pub advantage_stderr: f64,
    pub mean_lucky_fraction: f64,
    pub lucky_fraction_stderr: f64,
    pub lucky_fraction_exact: f64,
    pub mean_minions: f64,
    pub minions_stderr: f64,
    pub final_share: f64,
    pub final_share_stderr: f64,
    pub notes: Vec<String>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SimResult {
    pub scenario: SybilScenario,
    pub master_seed: u64,
    pub summary: SimSummary,
    pub per_cycle: Vec<CycleAggregate>,
    pub replications: Vec<ReplicationSummary>,
    #[serde(skip)]
    pub trajectories: Vec<Vec<CycleMetrics>>,
}

fn summarize_replication(traj: &[CycleMetrics]) -> ReplicationSummary {
    let total_income: f64 = traj.iter().map(|m| m.income).sum();
    let total_cost: f64 = traj.iter().map(|m| m.cost).sum();
    let sybils = traj.first().map_or(0, |m| m.sybil_count);
    let cycles = traj.len().max(1) as f64;
    ReplicationSummary {
        total_income,
        total_cost,
        advantage: advantage(total_income, total_cost, sybils),
        mean_lucky_fraction: traj.iter().map(|m| m.lucky_fraction).sum::<f64>() / cycles,
        mean_minions: traj.iter().map(|m| m.minions_hired as f64).sum::<f64>() / cycles,
        final_share: traj.last().map_or(0.0, |m| m.sybil_share),
    }
}

fn aggregate_cycle(cycle: usize, rows: &[&CycleMetrics]) -> CycleAggregate {
    let stat = |f: &dyn Fn(&CycleMetrics) -> f64| {
        mean_stderr(&rows.iter().map(|m| f(m)).collect::<Vec<_>>())
    };
    let (sybil_count, sybil_count_stderr) = stat(&|m| m.sybil_count as f64);
    let (sybil_share, sybil_share_stderr) = stat(&|m| m.sybil_share);
    let (lucky_fraction, lucky_fraction_stderr) = stat(&|m| m.lucky_fraction);
    let (minions, minions_stderr) = stat(&|m| m.minions_hired as f64);
    let (income, income_stderr) = stat(&|m| m.income);
    let (cost, cost_stderr) = stat(&|m| m.cost);
    let (advantage, advantage_stderr) = stat(&|m| m.advantage);
    CycleAggregate {
        cycle,
        sybil_count,
        sybil_share,
        lucky_fraction,
        minions,
        income,
        cost,
        advantage,
        sybil_count_stderr,
        sybil_share_stderr,
        lucky_fraction_stderr,
        minions_stderr,
        income_stderr,
        cost_stderr,
        advantage_stderr,
    }
}

fn notes_for(sc: &SybilScenario, exact: f64) -> Vec<String> {
    let f = sc.n_sybil as f64 / (sc.n_honest + sc.n_sybil) as f64;
    let approx = f.powi(sc.group_size as i32 - 1);
    let mut notes = vec![format!(
        "lucky fraction: f^(g-1)={approx:.3e}; exact={exact:.3e} (f={f:.3}, g={})",
        sc.group_size
    )];
    if sc.group_size == 4 && (f - 0.1).abs() < 1e-9 {
        notes.push("f=0.1, g=4: 0.1^3 is 0.1%, not the .01% sometimes quoted".into());
    }
    if sc.reinvest && sc.max_sybils.is_none() {
        notes.push("reinvest without max_sybils: growth is unbounded".into());
    }
    notes
}

/// Runs every replication on its own ChaCha20 stream, in parallel.
/// Results are identical for a given scenario and seed regardless of
/// thread count.
pub fn run_scenario(sc: &SybilScenario, master_seed: u64) -> Result<SimResult> {
    sc.validate()?;
    let trajectories: Vec<Vec<CycleMetrics>> = (0..sc.replications)
        .into_par_iter()
        .map(|rep| run_replication(sc, &mut replication_rng(master_seed, rep as u64)))
        .collect();
    let replications: Vec<ReplicationSummary> = trajectories
        .iter()
        .map(|t| summarize_replication(t))
        .collect();
    let per_cycle = (0..sc.cycles)
        .map(|c| aggregate_cycle(c, &trajectories.iter().map(|t| &t[c]).collect::<Vec<_>>()))
        .collect();

    let col = |f: fn(&ReplicationSummary) -> f64| {
        mean_stderr(&replications.iter().map(f).collect::<Vec<_>>())
    };
    let (mean_advantage, advantage_stderr) = col(|r| r.advantage);
    let (mean_lucky_fraction, lucky_fraction_stderr) = col(|r| r.mean_lucky_fraction);
    let (mean_minions, minions_stderr) = col(|r| r.mean_minions);
    let (final_share, final_share_stderr) = col(|r| r.final_share);
    let exact = lucky_fraction_exact(sc.n_honest, sc.n_sybil, sc.group_size);
    let summary = SimSummary {
        replications: sc.replications,
        mean_advantage,
        advantage_stderr,
        mean_lucky_fraction,
        lucky_fraction_stderr,
        lucky_fraction_exact: exact,
        mean_minions,
        minions_stderr,
        final_share,
        final_share_stderr,
        notes: notes_for(sc, exact),
    };
    Ok(SimResult {
        scenario: sc.clone(),
        master_seed,
        summary,
        per_cycle,
        replications,
        trajectories,
    })
}

/// Per-cycle aggregates as CSV.
pub fn write_csv<W: Write>(result: &SimResult, out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    for row in &result.per_cycle {
        w.serialize(row)?;
    }
    w.flush()?;
    Ok(())
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct PlateauConfig {
    pub window: usize,
    pub warmup: usize,
    pub measured: usize,
}

impl Default for PlateauConfig {
    fn default() -> Self {
        Self {
            window: 10,
            warmup: 20,
            measured: 200,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PlateauPoint {
    pub sybils: usize,
    pub minions: f64,
    pub minions_stderr: f64,
    pub exposed: f64,
    pub ceiling: f64,
}

pub fn plateau_curve(
    h: usize,
    theta: f64,
    g: usize,
    s_values: &[usize],
    seed: u64,
) -> Result<Vec<PlateauPoint>> {
    plateau_curve_with(h, theta, g, s_values, seed, PlateauConfig::default())
}

/// Steady-state minions per cycle for each attacker size, without
/// reinvestment. Point `i` uses stream `i` of the seed.
pub fn plateau_curve_with(
    h: usize,
    theta: f64,
    g: usize,
    s_values: &[usize],
    seed: u64,
    cfg: PlateauConfig,
) -> Result<Vec<PlateauPoint>> {
    s_values
        .par_iter()
        .enumerate()
        .map(|(i, &s)| {
            let sc = SybilScenario {
                n_honest: h,
                n_sybil: s,
                group_size: g,
                threshold: theta,
                window: cfg.window,
                cycles: cfg.warmup + cfg.measured,
                replications: 1,
                reinvest: false,
                max_sybils: None,
                ..SybilScenario::baseline()
            };
            sc.validate()?;
            let traj = run_replication(&sc, &mut replication_rng(seed, i as u64));
            let tail = &traj[cfg.warmup..];
            let (minions, minions_stderr) = mean_stderr(
                &tail
                    .iter()
                    .map(|m| m.minions_hired as f64)
                    .collect::<Vec<_>>(),
            );
            let exposed = tail.iter().map(|m| m.exposed_sybils as f64).sum::<f64>()
                / tail.len().max(1) as f64;
            Ok(PlateauPoint {
                sybils: s,
                minions,
                minions_stderr,
                exposed,
                ceiling: theta * h as f64,
            })
        })
        .collect()
}
