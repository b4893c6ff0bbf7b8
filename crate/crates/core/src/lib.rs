//! Exact-measure simulator for enumeration machines, ant populations and
//! their shadow positions.

pub mod bits;
pub mod cats;
pub mod code;
pub mod dyadic;
pub mod machine;
pub mod oracles;
pub mod population;
pub mod scalar;
pub mod shadow;
pub mod shift;
pub mod universal;
pub mod vertex;

pub use bits::BitString;
pub use dyadic::DyadicRational;
pub use scalar::Weight;
pub use vertex::Vertex;

/// Simulation with exact dyadic weights.
pub type ExactSimulation = shift::Simulation<DyadicRational>;
/// Simulation with exact rational weights.
pub type RationalSimulation = shift::Simulation<num_rational::BigRational>;
/// Simulation with floating-point weights, for quick exploratory runs.
pub type FloatSimulation = shift::Simulation<f64>;
/// Outcome of an exact simulation.
pub type ExactOutcome = shift::SimulationOutcome<DyadicRational>;
/// Exact probability interval.
pub type ExactInterval = oracles::ProbabilityInterval<DyadicRational>;
