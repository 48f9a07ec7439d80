use rand::Rng;
use serde::{Deserialize, Serialize};

use super::groups::Partition;

/// Attendance requirement: at least `⌈threshold · len⌉` of the last `len`
/// honest-exposed meetings, where `len` is capped at `window`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct AttendancePolicy {
    pub threshold: f64,
    pub window: usize,
}

impl AttendancePolicy {
    pub fn new(threshold: f64, window: usize) -> Self {
        assert!((1..=64).contains(&window), "window must be in 1..=64");
        Self { threshold, window }
    }

    pub fn required(&self, len: usize) -> usize {
        (self.threshold * len as f64 - 1e-9).ceil().max(0.0) as usize
    }
}

#[derive(Clone, Copy, Debug, Default)]
struct History {
    /// Bit 0 is the most recent meeting; set means a minion attended.
    bits: u64,
    meetings: usize,
}

fn low_mask(n: usize) -> u64 {
    if n >= 64 {
        u64::MAX
    } else {
        (1u64 << n) - 1
    }
}

/// Per-Sybil trailing attendance history.
///
/// Only meetings with honest participants are tracked. An all-Sybil group
/// verifies itself by fiat and leaves the history untouched.
#[derive(Clone, Debug)]
pub struct AttendanceBook {
    policy: AttendancePolicy,
    entries: Vec<History>,
}

impl AttendanceBook {
    pub fn new(policy: AttendancePolicy) -> Self {
        Self {
            policy,
            entries: Vec::new(),
        }
    }

    pub fn policy(&self) -> AttendancePolicy {
        self.policy
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    /// Adds `count` identities with no history.
    pub fn add_fresh(&mut self, count: usize) {
        self.entries
            .resize(self.entries.len() + count, History::default());
    }

    /// Adds `count` identities that have been running the lazy strategy for
    /// a while, each at a random phase of its steady-state pattern.
    pub fn add_veterans<R: Rng + ?Sized>(&mut self, count: usize, rng: &mut R) {
        let w = self.policy.window;
        for _ in 0..count {
            let mut h = History::default();
            for _ in 0..rng.gen_range(w..2 * w) {
                let attend = self.forced(&h);
                self.push(&mut h, attend);
            }
            self.entries.push(h);
        }
    }

    fn forced(&self, h: &History) -> bool {
        let len = self.policy.window.min(h.meetings + 1);
        let have = (h.bits & low_mask(len - 1)).count_ones() as usize;
        have < self.policy.required(len)
    }

    fn push(&self, h: &mut History, attended: bool) {
        h.bits = ((h.bits << 1) | attended as u64) & low_mask(self.policy.window);
        h.meetings = (h.meetings + 1).min(self.policy.window);
    }

    /// Whether identity `id` falls below the requirement this meeting
    /// unless a minion attends.
    pub fn needs_minion(&self, id: usize) -> bool {
        self.forced(&self.entries[id])
    }

    pub fn record(&mut self, id: usize, attended: bool) {
        let mut h = self.entries[id];
        self.push(&mut h, attended);
        self.entries[id] = h;
    }

    /// Attendance count in the trailing window and the window length.
    pub fn attendance(&self, id: usize) -> (usize, usize) {
        let h = &self.entries[id];
        (
            (h.bits & low_mask(h.meetings)).count_ones() as usize,
            h.meetings,
        )
    }

    pub fn satisfied(&self, id: usize) -> bool {
        let (have, len) = self.attendance(id);
        have >= self.policy.required(len)
    }
}

/// One cycle of the attacker's cheapest covering strategy.
#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct MinionPlan {
    /// Sybils in all-Sybil groups.
    pub lucky: usize,
    /// Sybils sharing a group with at least one honest identity.
    pub exposed: usize,
    /// Sybil identities a minion attends for this cycle, one minion each.
    pub covered: Vec<usize>,
    pub verified: usize,
}

impl MinionPlan {
    pub fn minions(&self) -> usize {
        self.covered.len()
    }
}

/// Identities `0..n_sybil` are the attacker's. A minion is hired for an
/// exposed Sybil only when skipping this meeting would drop it below the
/// attendance threshold.
pub fn attacker_cover(groups: &Partition, n_sybil: usize, book: &mut AttendanceBook) -> MinionPlan {
    assert!(book.len() >= n_sybil, "attendance book missing Sybils");
    let mut plan = MinionPlan::default();
    for group in groups.iter() {
        let sybils = group.iter().filter(|&&id| id < n_sybil).count();
        if sybils == 0 {
            continue;
        }
        if sybils == group.len() {
            plan.lucky += sybils;
            plan.verified += sybils;
            continue;
        }
        plan.exposed += sybils;
        for &id in group.iter().filter(|&&id| id < n_sybil) {
            let hire = book.needs_minion(id);
            book.record(id, hire);
            if hire {
                plan.covered.push(id);
            }
            if book.satisfied(id) {
                plan.verified += 1;
            }
        }
    }
    plan
}
