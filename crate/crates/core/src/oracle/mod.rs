//! Ground truth for the solvers: exhaustive search on tiny grids, closed-form ROF solutions
//! and end-to-end checks of the worked examples.

pub mod brute;
pub mod calibrable;
pub mod random;
pub mod suites;
pub mod verify;

pub use brute::{brute_force_binary, brute_force_chain, BinaryEnergy, BinaryOptimum, ChainOptimum};
pub use calibrable::{calibrable_solution, CalibrableConfig, Square};
pub use suites::{standard_suites, SuiteReport};
pub use verify::{verify_counterexample_3phase, verify_example_break, Check, VerificationReport};
