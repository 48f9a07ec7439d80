use serde::{Deserialize, Serialize};

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Economics {
    pub reward: f64,
    pub minion_cost: f64,
    pub creation_cost: f64,
    pub reinvest: bool,
    pub max_sybils: Option<usize>,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct CycleLedger {
    pub income: f64,
    pub cost: f64,
    pub profit: f64,
    /// Sybils bought with this cycle's profit; they join next cycle.
    pub new_sybils: usize,
}

/// Books one cycle. Losses are absorbed; Sybils are never sold off.
pub fn economy_step(
    sybils: &mut usize,
    verified: usize,
    minions: usize,
    econ: &Economics,
) -> CycleLedger {
    let income = verified as f64 * econ.reward;
    let cost = minions as f64 * econ.minion_cost;
    let profit = income - cost;
    let mut new_sybils = 0;
    if econ.reinvest && econ.creation_cost > 0.0 {
        new_sybils = (profit.max(0.0) / econ.creation_cost).floor() as usize;
        if let Some(cap) = econ.max_sybils {
            new_sybils = new_sybils.min(cap.saturating_sub(*sybils));
        }
    }
    *sybils += new_sybils;
    CycleLedger {
        income,
        cost,
        profit,
        new_sybils,
    }
}

/// Income over cost, 1 for an attacker with no identities and infinite when
/// nothing was spent.
pub fn advantage(income: f64, cost: f64, sybils: usize) -> f64 {
    if sybils == 0 {
        1.0
    } else if cost == 0.0 {
        f64::INFINITY
    } else {
        income / cost
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn econ(reinvest: bool) -> Economics {
        Economics {
            reward: 1.0,
            minion_cost: 1.0,
            creation_cost: 5.0,
            reinvest,
            max_sybils: None,
        }
    }

    #[test]
    fn profit_arithmetic() {
        let mut s = 1000;
        let l = economy_step(&mut s, 1000, 450, &econ(false));
        assert_eq!(
            (l.income, l.cost, l.profit, l.new_sybils),
            (1000.0, 450.0, 550.0, 0)
        );
        assert_eq!(s, 1000);
    }

    #[test]
    fn reinvest_buys_whole_sybils() {
        let mut s = 1000;
        let l = economy_step(&mut s, 1000, 450, &econ(true));
        assert_eq!(l.new_sybils, 110);
        assert_eq!(s, 1110);
        let mut capped = econ(true);
        capped.max_sybils = Some(1050);
        let mut s = 1000;
        assert_eq!(economy_step(&mut s, 1000, 450, &capped).new_sybils, 50);
    }

    #[test]
    fn losses_keep_sybils() {
        let mut s = 10;
        let l = economy_step(&mut s, 10, 30, &econ(true));
        assert_eq!(l.profit, -20.0);
        assert_eq!((l.new_sybils, s), (0, 10));
    }

    #[test]
    fn advantage_edge_cases() {
        assert_eq!(advantage(0.0, 0.0, 0), 1.0);
        assert!(advantage(5.0, 0.0, 5).is_infinite());
        assert!((advantage(1000.0, 450.0, 1000) - 2.2222).abs() < 1e-4);
    }
}
