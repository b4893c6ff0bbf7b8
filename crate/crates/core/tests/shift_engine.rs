use std::collections::BTreeSet;
use std::sync::Arc;

use num_rational::BigRational;
use num_traits::{One, Zero};
use proptest::prelude::*;

use shadowlab::machine::{parse_program, share, AbstractMachine};
use shadowlab::population::{AntSpec, Population};
use shadowlab::shift::{
    audit_trace, detect_shift_vertices, qualifying_weight, simulate, Config, ShiftError, Simulation,
    TraceRecord,
};
use shadowlab::{BitString, DyadicRational, Vertex};

fn v(xs: &[u64]) -> Vertex {
    Vertex::from_elements(xs.iter().copied())
}

fn d(s: &str) -> DyadicRational {
    s.parse().unwrap()
}

fn machine(src: &str) -> Arc<dyn AbstractMachine> {
    share(parse_program(src).unwrap())
}

fn halt_d() -> Arc<dyn AbstractMachine> {
    machine("HALT")
}

fn spec(node: &str, pos: &[u64], sh: &[u64]) -> AntSpec {
    AntSpec {
        node: node.parse().unwrap(),
        position: v(pos),
        shadow: v(sh),
        shift_count: 0,
    }
}

fn cfg(k: u32, l: usize, ticks: u64) -> Config {
    Config {
        k,
        l,
        ant_tick_budget: ticks,
        ..Config::default()
    }
}

const EMIT5: &str = "KIND probabilistic\nEMITC 5\nHALT";
const COIN: &str = "RAND R0\nJZ R0 @a\nEMITC 2\nHALT\n@a: EMITC 1\nHALT";

#[test]
fn apply_shift_moves_shadow_to_position() {
    let pop = Population::from_parts(vec![spec("", &[5], &[])]).unwrap();
    let mut sim = Simulation::<DyadicRational>::with_population(pop, machine("EMITC 2\nHALT"), cfg(1, 1, 0)).unwrap();
    let ev = sim.apply_shift(&v(&[])).unwrap();
    assert_eq!(ev.cat_index, Some(0));
    assert_eq!(ev.ants, vec![0]);
    assert!(ev.weight.is_one());
    let ant = sim.population().get(0).unwrap();
    assert_eq!(ant.shadow, v(&[5]));
    assert_eq!(ant.shift_count, 1);
    let temp = sim
        .trace()
        .records
        .iter()
        .find_map(|r| match r {
            TraceRecord::ShiftTemp { vertex, .. } => Some(vertex.clone()),
            _ => None,
        })
        .unwrap();
    assert_eq!(temp, v(&[]));
}

#[test]
fn no_change_shift_still_counts() {
    let pop = Population::from_parts(vec![spec("", &[5], &[5])]).unwrap();
    let mut sim = Simulation::<DyadicRational>::with_population(pop, halt_d(), cfg(1, 1, 0)).unwrap();
    let ev = sim.apply_shift(&v(&[5])).unwrap();
    assert_eq!(ev.cat_index, None);
    let ant = sim.population().get(0).unwrap();
    assert_eq!(ant.shadow, v(&[5]));
    assert_eq!(ant.shift_count, 1);
}

#[test]
fn weight_equal_to_threshold_is_rejected() {
    let pop = Population::from_parts(vec![spec("0", &[1], &[]), spec("1", &[2], &[])]).unwrap();
    let mut sim = Simulation::<DyadicRational>::with_population(pop, halt_d(), cfg(1, 1, 0)).unwrap();
    assert!(matches!(
        sim.apply_shift(&v(&[1])),
        Err(ShiftError::NotAboveThreshold { .. })
    ));
    assert_eq!(sim.population().get(0).unwrap().shift_count, 0);
    assert!(sim.trace().records.is_empty());
}

#[test]
fn fresh_cascade_shifts_once() {
    let pop = Population::from_parts(vec![spec("", &[], &[])]).unwrap();
    let mut sim = Simulation::<DyadicRational>::with_population(pop, halt_d(), cfg(1, 1, 0)).unwrap();
    let shifts = sim.run_cascade().unwrap();
    assert_eq!(shifts.len(), 1);
    assert_eq!(shifts[0].vertex, v(&[]));
}

#[test]
fn cascade_chains_into_new_vertex() {
    // the shift at ∅ moves the shadow to {5}, which then qualifies itself
    let pop = Population::from_parts(vec![spec("", &[5], &[])]).unwrap();
    let mut sim = Simulation::<DyadicRational>::with_population(pop, halt_d(), cfg(1, 1, 0)).unwrap();
    let shifts = sim.run_cascade().unwrap();
    let vertices: Vec<Vertex> = shifts.iter().map(|e| e.vertex.clone()).collect();
    assert_eq!(vertices, vec![v(&[]), v(&[5])]);
    assert_eq!(sim.population().get(0).unwrap().shift_count, 2);
}

#[test]
fn cascade_overflow_is_reported() {
    let pop = Population::from_parts(vec![spec("", &[5], &[])]).unwrap();
    let config = Config {
        max_cascade_length: 1,
        ..cfg(1, 1, 0)
    };
    let mut sim = Simulation::<DyadicRational>::with_population(pop, halt_d(), config).unwrap();
    assert!(matches!(
        sim.run_cascade(),
        Err(ShiftError::CascadeOverflow { limit: 1, .. })
    ));
}

#[test]
fn emit5_simulation() {
    let m = machine(EMIT5);
    let out = simulate::<DyadicRational>(m.as_ref(), halt_d(), cfg(1, 1, 1)).unwrap();
    let shifts: Vec<(u64, Vertex)> = out.events.iter().map(|e| (e.tick, e.vertex.clone())).collect();
    assert_eq!(shifts, vec![(0, v(&[])), (1, v(&[])), (1, v(&[5]))]);
    let ant = out.population.get(0).unwrap();
    assert_eq!(ant.shadow, v(&[5]));
    assert_eq!(ant.position, v(&[5]));
}

#[test]
fn coin_simulation_never_shifts_past_divergence() {
    let m = machine(COIN);
    let out = simulate::<DyadicRational>(m.as_ref(), halt_d(), cfg(1, 1, 8)).unwrap();
    assert!(out.events.iter().all(|e| e.vertex == v(&[])));
    assert!(out.events.iter().all(|e| e.weight.is_one()));
    // ∅ shifts at ticks 0..=4; from tick 5 both shadows have diverged
    let ticks: Vec<u64> = out.events.iter().map(|e| e.tick).collect();
    assert_eq!(ticks, vec![0, 1, 2, 3, 4]);
    let shadows: BTreeSet<Vertex> = out.population.ants().map(|a| a.shadow.clone()).collect();
    assert_eq!(shadows, BTreeSet::from([v(&[1]), v(&[2])]));
    assert_eq!(out.population.len(), 2);
    for ant in out.population.ants() {
        assert_eq!(ant.weight::<DyadicRational>(), d("1/2"));
    }
}

#[test]
fn empty_budget_runs_only_the_initial_cascade() {
    let m = machine(COIN);
    let out = simulate::<DyadicRational>(m.as_ref(), halt_d(), cfg(1, 1, 0)).unwrap();
    assert_eq!(out.events.len(), 1);
    assert!(out.trace.records.iter().all(|r| r.tick() == 0));
    assert!(!out.trace.records.iter().any(|r| matches!(r, TraceRecord::Split { .. })));
}

#[test]
fn simulate_rejects_swapped_machines() {
    let m = machine(COIN);
    assert!(matches!(
        simulate::<DyadicRational>(halt_d().as_ref(), halt_d(), cfg(1, 1, 1)),
        Err(ShiftError::InvalidConfig(_))
    ));
    assert!(matches!(
        simulate::<DyadicRational>(m.as_ref(), Arc::clone(&m), cfg(1, 1, 1)),
        Err(ShiftError::InvalidConfig(_))
    ));
}

const SCENARIOS: &[&str] = &[
    EMIT5,
    COIN,
    "KIND probabilistic\nEMITC 1\nEMITC 2\nHALT",
    "RAND R0\nRAND R1\nEMIT R0\nADD R0 R1\nEMIT R0\nINC R0\nEMIT R0\nHALT",
    // geometric: keep emitting while the coin says so
    "SET R1 0\n@loop: RAND R0\nJZ R0 @end\nEMIT R1\nINC R1\nJMP @loop\n@end: HALT",
    // multiples of three forever
    "KIND probabilistic\nSET R0 3\n@l: EMIT R0\nINC R0\nINC R0\nINC R0\nJMP @l",
];

#[test]
fn traces_are_deterministic_and_pass_audit() {
    for src in SCENARIOS {
        for k in 1..=3 {
            let m = machine(src);
            let d_machine = machine("INBIT R0\nJZ R0 @z\nEMITC 1\nHALT\n@z: EMITC 2\nHALT");
            let a = simulate::<DyadicRational>(m.as_ref(), Arc::clone(&d_machine), cfg(k, 4, 24)).unwrap();
            let b = simulate::<DyadicRational>(m.as_ref(), d_machine, cfg(k, 4, 24)).unwrap();
            let text = a.trace.to_jsonl();
            assert_eq!(text, b.trace.to_jsonl());
            let reparsed = shadowlab::shift::Trace::from_jsonl(&text).unwrap();
            assert_eq!(reparsed, a.trace);
            let audit = audit_trace(&a.trace, &DyadicRational::pow2_neg(k as u64))
                .unwrap_or_else(|e| panic!("{src}: {e}"));
            assert_eq!(audit.ticks, 24);
            assert_eq!(audit.shifts, a.events.len());
        }
    }
}

#[test]
fn exact_scalars_agree() {
    for src in SCENARIOS {
        let m = machine(src);
        let a = simulate::<DyadicRational>(m.as_ref(), halt_d(), cfg(2, 1, 20)).unwrap();
        let b = simulate::<BigRational>(m.as_ref(), halt_d(), cfg(2, 1, 20)).unwrap();
        let c = simulate::<f64>(m.as_ref(), halt_d(), cfg(2, 1, 20)).unwrap();
        assert_eq!(a.events.len(), b.events.len());
        assert_eq!(a.events.len(), c.events.len());
        for ((x, y), z) in a.events.iter().zip(&b.events).zip(&c.events) {
            assert_eq!((x.tick, &x.vertex, &x.ants), (y.tick, &y.vertex, &y.ants));
            assert_eq!((x.tick, &x.vertex, &x.ants), (z.tick, &z.vertex, &z.ants));
            assert_eq!(x.weight.to_string(), y.weight.to_string());
            assert_eq!(x.weight.to_f64(), z.weight);
        }
    }
}

#[test]
fn tampered_trace_fails_audit() {
    let m = machine(EMIT5);
    let out = simulate::<DyadicRational>(m.as_ref(), halt_d(), cfg(1, 1, 2)).unwrap();
    let eps = d("1/2");
    assert!(audit_trace(&out.trace, &eps).is_ok());

    let mut bad = out.trace.clone();
    for r in &mut bad.records {
        if let TraceRecord::Shift { weight, .. } = r {
            *weight = "1/2".into();
        }
    }
    assert!(audit_trace(&bad, &eps).is_err());

    let mut bad = out.trace.clone();
    for r in &mut bad.records {
        if let TraceRecord::Measure { wk, .. } = r {
            wk[1] = "0".into();
        }
    }
    assert!(audit_trace(&bad, &eps).is_err());
}

fn arb_population() -> impl Strategy<Value = Population> {
    // split leaves at random until up to 10 ants exist
    let splits = proptest::collection::vec(any::<prop::sample::Index>(), 0..10);
    let ants = proptest::collection::vec((0u16..4096, 0u16..4096), 10);
    (splits, ants).prop_map(|(splits, ants)| {
        let mut leaves = vec![BitString::new()];
        for ix in splits {
            let leaf = leaves.swap_remove(ix.index(leaves.len()));
            leaves.push(leaf.child(false));
            leaves.push(leaf.child(true));
        }
        leaves.sort_by_key(|l| l.to_string());
        let specs = leaves
            .into_iter()
            .zip(ants)
            .map(|(node, (pos, sh))| {
                let position = Vertex::from_elements((0..12).filter(|i| pos >> i & 1 == 1));
                let shadow =
                    Vertex::from_elements((0..12).filter(|i| pos >> i & 1 == 1 && sh >> i & 1 == 1));
                AntSpec {
                    node,
                    position,
                    shadow,
                    shift_count: 0,
                }
            })
            .collect();
        Population::from_parts(specs).unwrap()
    })
}

fn brute_force_witnesses(pop: &Population, eps: &DyadicRational) -> Vec<Vertex> {
    let universe: Vec<u64> = pop
        .ants()
        .fold(Vertex::empty(), |acc, a| acc.union(&a.position))
        .elements()
        .to_vec();
    (0u32..1 << universe.len())
        .map(|mask| {
            Vertex::from_elements(
                universe
                    .iter()
                    .enumerate()
                    .filter(|(i, _)| mask >> i & 1 == 1)
                    .map(|(_, e)| *e),
            )
        })
        .filter(|x| qualifying_weight::<DyadicRational>(pop, x) > *eps)
        .collect()
}

proptest! {
    #[test]
    fn detection_matches_brute_force(pop in arb_population(), k in 1u64..5) {
        let eps = DyadicRational::pow2_neg(k);
        let lattice = detect_shift_vertices(&pop, &eps, &BTreeSet::new(), 1 << 16).unwrap();
        let brute = brute_force_witnesses(&pop, &eps);
        prop_assert_eq!(lattice.is_empty(), brute.is_empty());
        for x in &lattice {
            prop_assert!(qualifying_weight::<DyadicRational>(&pop, x) > eps);
            prop_assert!(brute.contains(x));
        }
        for x in &brute {
            prop_assert!(lattice.iter().any(|y| y.is_subset(x)));
        }
        let mut sorted = lattice.clone();
        sorted.sort();
        prop_assert_eq!(sorted, lattice);
    }

    #[test]
    fn measures_obey_laws(pop in arb_population(), counts in proptest::collection::vec(0u64..4, 10)) {
        let specs: Vec<AntSpec> = pop
            .ants()
            .zip(counts)
            .map(|(a, c)| AntSpec {
                node: a.node.clone(),
                position: a.position.clone(),
                shadow: a.shadow.clone(),
                shift_count: c,
            })
            .collect();
        let pop = Population::from_parts(specs).unwrap();
        prop_assert!(pop.measure_wk::<DyadicRational>(0).is_one());
        for k in 0..5 {
            prop_assert!(pop.measure_wk::<DyadicRational>(k + 1) <= pop.measure_wk::<DyadicRational>(k));
        }
        prop_assert!(pop.measure_wk::<DyadicRational>(4).is_zero());
    }
}
