use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Parameters of a threshold-verification attack economy.
///
/// Identities are assigned to verification groups of `group_size` every
/// cycle and must attend at least `⌈threshold · window⌉` of their last
/// `window` meetings that include honest participants.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SybilScenario {
    pub n_honest: usize,
    pub n_sybil: usize,
    pub group_size: usize,
    pub threshold: f64,
    #[serde(default = "default_window")]
    pub window: usize,
    pub reward: f64,
    pub minion_cost: f64,
    #[serde(default = "default_creation_cost")]
    pub creation_cost: f64,
    #[serde(default)]
    pub reinvest: bool,
    pub cycles: usize,
    #[serde(default = "default_replications")]
    pub replications: usize,
    /// Saturation cap on the attacker's identity count when reinvesting.
    #[serde(default)]
    pub max_sybils: Option<usize>,
}

fn default_window() -> usize {
    10
}

fn default_creation_cost() -> f64 {
    5.0
}

fn default_replications() -> usize {
    20
}

impl SybilScenario {
    /// 10% Sybils among 10 000 identities, pairs, 50% attendance over a
    /// 10-cycle window, minion cost equal to the per-identity reward.
    pub fn baseline() -> Self {
        Self {
            n_honest: 9000,
            n_sybil: 1000,
            group_size: 2,
            threshold: 0.5,
            window: 10,
            reward: 1.0,
            minion_cost: 1.0,
            creation_cost: 5.0,
            reinvest: false,
            cycles: 200,
            replications: 20,
            max_sybils: None,
        }
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |m: String| Err(Error::InvalidScenario(m));
        if self.group_size < 2 {
            return bad(format!(
                "group_size must be at least 2, got {}",
                self.group_size
            ));
        }
        if !(self.threshold > 0.0 && self.threshold <= 1.0) {
            return bad(format!(
                "threshold must be in (0, 1], got {}",
                self.threshold
            ));
        }
        if self.window == 0 || self.window > 64 {
            return bad(format!("window must be in 1..=64, got {}", self.window));
        }
        if self.n_honest + self.n_sybil < self.group_size {
            return bad("fewer identities than one group".into());
        }
        if self.replications == 0 {
            return bad("replications must be positive".into());
        }
        for (name, v) in [
            ("reward", self.reward),
            ("minion_cost", self.minion_cost),
            ("creation_cost", self.creation_cost),
        ] {
            if !v.is_finite() || v < 0.0 {
                return bad(format!("{name} must be finite and non-negative"));
            }
        }
        if self.reinvest && self.creation_cost <= 0.0 {
            return bad("creation_cost must be positive when reinvesting".into());
        }
        if let Some(cap) = self.max_sybils {
            if cap < self.n_sybil {
                return bad("max_sybils below the initial Sybil count".into());
            }
        }
        Ok(())
    }

    /// Sets one field from a `key=value` sweep entry.
    pub fn with_field(&self, key: &str, value: &str) -> Result<Self> {
        let mut v = serde_json::to_value(self)?;
        let obj = v.as_object_mut().expect("struct serializes to an object");
        if !obj.contains_key(key) {
            return Err(Error::InvalidScenario(format!(
                "unknown scenario field {key}"
            )));
        }
        let parsed = serde_json::from_str(value)
            .unwrap_or_else(|_| serde_json::Value::String(value.to_owned()));
        obj.insert(key.to_owned(), parsed);
        let out: Self = serde_json::from_value(v)
            .map_err(|e| Error::InvalidScenario(format!("{key}={value}: {e}")))?;
        out.validate()?;
        Ok(out)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn baseline_is_valid() {
        SybilScenario::baseline().validate().unwrap();
    }

    #[test]
    fn rejects_bad_values() {
        let mut s = SybilScenario::baseline();
        s.group_size = 1;
        assert!(s.validate().is_err());
        let mut s = SybilScenario::baseline();
        s.threshold = 0.0;
        assert!(s.validate().is_err());
        let mut s = SybilScenario::baseline();
        s.window = 65;
        assert!(s.validate().is_err());
    }

    #[test]
    fn sweep_field() {
        let s = SybilScenario::baseline()
            .with_field("group_size", "4")
            .unwrap();
        assert_eq!(s.group_size, 4);
        let s = SybilScenario::baseline()
            .with_field("reinvest", "true")
            .unwrap();
        assert!(s.reinvest);
        assert!(SybilScenario::baseline().with_field("nope", "1").is_err());
        assert!(SybilScenario::baseline()
            .with_field("group_size", "1")
            .is_err());
    }

    #[test]
    fn json_defaults() {
        let s: SybilScenario = serde_json::from_str(
            r#"{"n_honest":10,"n_sybil":2,"group_size":2,"threshold":0.5,"reward":1,"minion_cost":1,"cycles":3}"#,
        )
        .unwrap();
        assert_eq!(s.window, 10);
        assert_eq!(s.replications, 20);
        assert!(!s.reinvest);
    }
}
