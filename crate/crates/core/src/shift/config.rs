use num_rational::Ratio;
use num_traits::{One, ToPrimitive};

use super::ShiftError;
use crate::scalar::Weight;

/// Parameters of one shift simulation. The threshold is `ε = 2^-k`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Config {
    pub k: u32,
    /// Number of cats eligible to service a shift.
    pub l: usize,
    /// Exponent of the finite-set bound being lifted; only used to derive `l`
    /// in theorem mode.
    pub alpha: Ratio<u64>,
    pub ant_tick_budget: u64,
    /// Cat steps allowed per cat search.
    pub cat_step_budget: u64,
    pub max_cascade_length: usize,
    /// Bound on the candidate lattice explored per detection.
    pub lattice_cap: usize,
    /// Largest `k'` for which `W_k'` is recorded each tick.
    pub wk_cap: u64,
}

impl Default for Config {
    fn default() -> Self {
        Config {
            k: 1,
            l: 1,
            alpha: Ratio::from_integer(2),
            ant_tick_budget: 16,
            cat_step_budget: 10_000,
            max_cascade_length: 1_000,
            lattice_cap: 1 << 14,
            wk_cap: 4,
        }
    }
}

impl Config {
    pub fn validate(&self) -> Result<(), ShiftError> {
        if self.k == 0 {
            return Err(ShiftError::InvalidConfig("k must be at least 1".into()));
        }
        if self.l == 0 {
            return Err(ShiftError::InvalidConfig("l must be at least 1".into()));
        }
        if self.alpha < Ratio::one() {
            return Err(ShiftError::InvalidConfig("alpha must be at least 1".into()));
        }
        if self.max_cascade_length == 0 || self.lattice_cap == 0 {
            return Err(ShiftError::InvalidConfig(
                "cascade and lattice limits must be positive".into(),
            ));
        }
        Ok(())
    }

    pub fn epsilon<W: Weight>(&self) -> W {
        W::pow2_neg(self.k as u64)
    }

    /// `l = 2^⌈alpha·k + c1·log2(k) + c0⌉`, or `None` if that does not fit in
    /// a `usize`.
    pub fn theorem_mode_l(k: u32, alpha: Ratio<u64>, c0: f64, c1: f64) -> Option<usize> {
        let alpha = alpha.to_f64()?;
        let k = k as f64;
        let log_k = if k > 0.0 { k.log2() } else { 0.0 };
        let exponent = (alpha * k + c1 * log_k + c0).ceil().max(0.0);
        if exponent >= (usize::BITS - 1) as f64 {
            return None;
        }
        Some(1usize << exponent as u32)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dyadic::DyadicRational;

    #[test]
    fn validation() {
        assert!(Config::default().validate().is_ok());
        assert!(Config { k: 0, ..Config::default() }.validate().is_err());
        assert!(Config { l: 0, ..Config::default() }.validate().is_err());
        assert!(Config { alpha: Ratio::new(1, 2), ..Config::default() }
            .validate()
            .is_err());
    }

    #[test]
    fn epsilon_is_exact() {
        let cfg = Config { k: 3, ..Config::default() };
        assert_eq!(cfg.epsilon::<DyadicRational>(), "1/8".parse().unwrap());
        assert_eq!(cfg.epsilon::<f64>(), 0.125);
    }

    #[test]
    fn theorem_mode_cat_count() {
        let two = Ratio::from_integer(2);
        assert_eq!(Config::theorem_mode_l(1, two, 0.0, 2.0), Some(4));
        assert_eq!(Config::theorem_mode_l(4, two, 1.0, 2.0), Some(1 << 13));
        assert_eq!(Config::theorem_mode_l(40, two, 0.0, 0.0), None);
    }
}
