//! Selfish routing with user types that misjudge congestion.
//!
//! Each type `θ` perceives edge cost `r_θ·a·x^d + b` while paying
//! `a·x^d + b`. The crate computes equilibria and social optima, classifies
//! network topologies, checks the structural results on random instances
//! and builds the named scenarios, including parking choice.
//!
//! Cost evaluation is generic over [`scalar::Scalar`] (`f32`, `f64`,
//! `BigRational`); the solvers run on floats.

pub mod analysis;
pub mod cli;
pub mod equilibrium;
pub mod model;
pub mod output;
pub mod scalar;
pub mod scenarios;
pub mod topology;

pub use num_rational::BigRational;

pub use equilibrium::{solve_equilibrium, solve_social_optimum, SolveResult, SolverConfig};
pub use model::{social_cost, CostFunction, FlowAssignment, GameInstance, InstanceBuilder, Uncertainty, UncertaintySpec};

pub type Instance = GameInstance<f64>;
pub type Instance32 = GameInstance<f32>;
pub type ExactInstance = GameInstance<BigRational>;
pub type Flow = FlowAssignment<f64>;
pub type Flow32 = FlowAssignment<f32>;
pub type ExactFlow = FlowAssignment<BigRational>;
pub type Cost = CostFunction<f64>;
pub type ExactCost = CostFunction<BigRational>;
