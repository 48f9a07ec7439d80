use serde::{Deserialize, Serialize};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum VerificationMode {
    /// Each identity picks its own meeting time.
    Asynchronous,
    /// Every meeting of the cycle happens in one of `slots` shared time slots.
    Synchronized { slots: usize },
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TimeshiftOutcome {
    pub identities: usize,
    pub humans: usize,
    pub verified: usize,
    pub per_human: f64,
}

/// How many of `m_identities` meetings `humans` real people can attend in
/// one cycle, assigning each meeting greedily to a person free at that time.
pub fn timeshift_demo(
    m_identities: usize,
    humans: usize,
    mode: VerificationMode,
) -> TimeshiftOutcome {
    let times: Vec<usize> = match mode {
        VerificationMode::Asynchronous => (0..m_identities).collect(),
        VerificationMode::Synchronized { slots } => {
            (0..m_identities).map(|i| i % slots.max(1)).collect()
        }
    };
    let mut busy: Vec<Vec<usize>> = vec![Vec::new(); humans];
    let mut verified = 0;
    for t in times {
        if let Some(person) = busy.iter_mut().find(|b| !b.contains(&t)) {
            person.push(t);
            verified += 1;
        }
    }
    TimeshiftOutcome {
        identities: m_identities,
        humans,
        verified,
        per_human: if humans == 0 {
            0.0
        } else {
            verified as f64 / humans as f64
        },
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn async_one_human_covers_all() {
        let o = timeshift_demo(10, 1, VerificationMode::Asynchronous);
        assert_eq!(o.verified, 10);
    }

    #[test]
    fn synchronized_limits() {
        assert_eq!(
            timeshift_demo(10, 1, VerificationMode::Synchronized { slots: 1 }).verified,
            1
        );
        assert_eq!(
            timeshift_demo(10, 10, VerificationMode::Synchronized { slots: 1 }).verified,
            10
        );
        assert_eq!(
            timeshift_demo(10, 1, VerificationMode::Synchronized { slots: 3 }).verified,
            3
        );
        assert_eq!(
            timeshift_demo(10, 0, VerificationMode::Asynchronous).verified,
            0
        );
    }
}
