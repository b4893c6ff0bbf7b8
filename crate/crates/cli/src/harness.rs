//! Scenario-level checks: the shift-at-a-set check and the shadow-machine
//! measure identity.

use std::collections::BTreeMap;
use std::sync::Arc;

use num_traits::Zero;
use thiserror::Error;

use shadowlab::code::code_length;
use shadowlab::oracles::{enumeration_probability, ProbabilityInterval};
use shadowlab::shadow::{build_shadow_machine, shadow_distribution, shadow_weights, ShadowHistory};
use shadowlab::shift::{simulate, ShiftError, ShiftEvent};
use shadowlab::{DyadicRational, Vertex};

use crate::scenario::{Scenario, ScenarioError};

#[derive(Debug, Error)]
pub enum HarnessError {
    #[error("scenario rejected: {0}")]
    RejectedScenario(String),
    #[error(transparent)]
    Scenario(#[from] ScenarioError),
    #[error(transparent)]
    Shift(#[from] ShiftError),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Verdict {
    Pass,
    Fail,
    Inconclusive,
}

impl Verdict {
    pub fn exit_code(self) -> i32 {
        match self {
            Verdict::Pass => 0,
            Verdict::Fail => 1,
            Verdict::Inconclusive => 2,
        }
    }

    pub fn as_str(self) -> &'static str {
        match self {
            Verdict::Pass => "PASS",
            Verdict::Fail => "FAIL",
            Verdict::Inconclusive => "INCONCLUSIVE",
        }
    }
}

/// Where the probability lower bound used by the precondition came from.
#[derive(Debug, Clone, PartialEq)]
pub enum ProbabilitySource {
    Oracle(ProbabilityInterval),
    Declared(DyadicRational),
}

#[derive(Debug, Clone)]
pub struct Lemma1Report {
    pub verdict: Verdict,
    pub probability: ProbabilitySource,
    pub epsilon: DyadicRational,
    /// First shift at a vertex between `S'` and `S`.
    pub witness: Option<ShiftEvent<DyadicRational>>,
    pub shifts: usize,
    pub ticks: u64,
    pub strict: bool,
}

impl Lemma1Report {
    pub fn lines(&self) -> Vec<(String, String)> {
        let mut out = vec![
            ("VERDICT".to_string(), self.verdict.as_str().to_string()),
            ("EPSILON".into(), self.epsilon.to_string()),
        ];
        match &self.probability {
            ProbabilitySource::Oracle(p) => {
                out.push(("PROBABILITY".into(), p.to_string()));
                out.push(("PROBABILITY_SOURCE".into(), "oracle".into()));
            }
            ProbabilitySource::Declared(p) => {
                out.push(("PROBABILITY".into(), p.to_string()));
                out.push(("PROBABILITY_SOURCE".into(), "declared".into()));
            }
        }
        out.push(("CONTAINMENT".into(), if self.strict { "strict" } else { "non-strict" }.into()));
        out.push(("TICKS".into(), self.ticks.to_string()));
        out.push(("SHIFTS".into(), self.shifts.to_string()));
        match &self.witness {
            Some(e) => {
                out.push(("WITNESS_TICK".into(), e.tick.to_string()));
                out.push(("WITNESS_VERTEX".into(), e.vertex.to_string()));
                out.push(("WITNESS_WEIGHT".into(), e.weight.to_string()));
            }
            None => out.push(("WITNESS_VERTEX".into(), "none".into())),
        }
        out
    }
}

/// Checks that `Pr(M enumerates S) > ε` and then looks for a shift at some
/// `X` with `S' ⊆ X ⊆ S` (proper inclusions when `strict`).
///
/// For finite `S` the probability comes from the exact oracle and its lower
/// bound must exceed `ε`; for infinite `S` the scenario must declare it.
pub fn lemma1_check(sc: &Scenario) -> Result<Lemma1Report, HarnessError> {
    let m = sc.require_m()?;
    let s = sc.require_s()?;
    let epsilon = DyadicRational::pow2_neg(sc.config.k as u64);
    let probability = if s.is_finite() {
        let p = enumeration_probability::<DyadicRational>(
            m.machine.as_ref(),
            s,
            sc.budgets.bit_depth,
            sc.budgets.step_budget,
        );
        if p.lo <= epsilon {
            return Err(HarnessError::RejectedScenario(format!(
                "Pr(M enumerates S) in {p} is not verified above {epsilon}"
            )));
        }
        ProbabilitySource::Oracle(p)
    } else {
        match &sc.declared_probability {
            Some(p) if *p > epsilon => ProbabilitySource::Declared(p.clone()),
            Some(p) => {
                return Err(HarnessError::RejectedScenario(format!(
                    "declared probability {p} is not above {epsilon}"
                )))
            }
            None => {
                return Err(HarnessError::RejectedScenario(
                    "infinite S needs a declared probability".into(),
                ))
            }
        }
    };

    let out = simulate::<DyadicRational>(m.machine.as_ref(), Arc::clone(&sc.d.machine), sc.config.clone())?;
    let between = |x: &Vertex| {
        let lower = sc.s_prime.is_subset(x) && (!sc.strict || sc.s_prime != *x);
        let upper = s.contains_all(x) && (!sc.strict || !s.equals(x));
        lower && upper
    };
    let witness = out.events.iter().find(|e| between(&e.vertex)).cloned();
    Ok(Lemma1Report {
        verdict: if witness.is_some() {
            Verdict::Pass
        } else {
            Verdict::Inconclusive
        },
        probability,
        epsilon,
        witness,
        shifts: out.events.len(),
        ticks: sc.config.ant_tick_budget,
        strict: sc.strict,
    })
}

#[derive(Debug, Clone, PartialEq)]
pub struct TickCheck {
    pub tick: u64,
    pub vertices: usize,
    pub discrepancy: DyadicRational,
}

#[derive(Debug, Clone)]
pub struct ShadowVerifyReport {
    pub k: u32,
    pub code_length: u64,
    pub ticks: Vec<TickCheck>,
    pub max_discrepancy: DyadicRational,
    pub simulation_error: Option<String>,
}

impl ShadowVerifyReport {
    pub fn verdict(&self) -> Verdict {
        if self.simulation_error.is_some() || self.ticks.is_empty() {
            Verdict::Inconclusive
        } else if self.max_discrepancy.is_zero() {
            Verdict::Pass
        } else {
            Verdict::Fail
        }
    }

    pub fn lines(&self) -> Vec<(String, String)> {
        let mut out = vec![
            ("VERDICT".to_string(), self.verdict().as_str().to_string()),
            ("K".into(), self.k.to_string()),
            ("CODE_LENGTH".into(), self.code_length.to_string()),
            ("TICKS_CHECKED".into(), self.ticks.len().to_string()),
            ("MAX_DISCREPANCY".into(), self.max_discrepancy.to_string()),
        ];
        for t in &self.ticks {
            out.push((
                format!("TICK_{}", t.tick),
                format!("vertices={} discrepancy={}", t.vertices, t.discrepancy),
            ));
        }
        if let Some(e) = &self.simulation_error {
            out.push(("SIMULATION_ERROR".into(), e.clone()));
        }
        out
    }
}

/// Explores the shadow machine exhaustively along the code of `k` and
/// compares, for every sampled tick and every shadow value `X`, its
/// probability with `2^-codeLength(k)` times the weight of ants whose shadow
/// is `X` in an independent simulation. All ticks are sampled when
/// `tick_samples` is empty.
pub fn shadow_verify(sc: &Scenario, tick_samples: &[u64]) -> Result<ShadowVerifyReport, HarnessError> {
    let m = sc.require_m()?;
    let k = sc.config.k;
    let reference = ShadowHistory::record(m.machine.as_ref(), Arc::clone(&sc.d.machine), sc.config.clone());
    let machine = build_shadow_machine(Arc::clone(&m.machine), Arc::clone(&sc.d.machine), sc.config.clone());
    let observed = shadow_distribution(&machine, k);
    let scale = DyadicRational::pow2_neg(code_length(k as u64));

    let samples: Vec<u64> = if tick_samples.is_empty() {
        (0..reference.ticks.len() as u64).collect()
    } else {
        tick_samples
            .iter()
            .copied()
            .filter(|t| (*t as usize) < reference.ticks.len())
            .collect()
    };
    let mut ticks = Vec::new();
    let mut max_discrepancy = DyadicRational::zero();
    for t in samples {
        let expected: BTreeMap<Vertex, DyadicRational> = shadow_weights(&reference, t as usize)
            .into_iter()
            .map(|(x, w)| (x, w * scale.clone()))
            .collect();
        let empty = Default::default();
        let seen = observed.get(t as usize).unwrap_or(&empty);
        let mut vertices: Vec<&Vertex> = expected.keys().chain(seen.keys()).collect();
        vertices.sort();
        vertices.dedup();
        let mut discrepancy = DyadicRational::zero();
        for x in &vertices {
            let zero = DyadicRational::zero();
            let a = expected.get(*x).unwrap_or(&zero);
            let b = seen.get(*x).unwrap_or(&zero);
            discrepancy = discrepancy.max(a.abs_diff(b));
        }
        max_discrepancy = max_discrepancy.max(discrepancy.clone());
        ticks.push(TickCheck {
            tick: t,
            vertices: vertices.len(),
            discrepancy,
        });
    }
    Ok(ShadowVerifyReport {
        k,
        code_length: code_length(k as u64),
        ticks,
        max_discrepancy,
        simulation_error: reference.error.map(|e| e.to_string()),
    })
}
