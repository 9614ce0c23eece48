//! Alternating segmentation algorithms built on the exact and iterative ROF solvers.

pub mod fcm;
pub mod multiphase;
pub mod trace;
pub mod trof;
pub mod two_phase;

pub use fcm::{fcm_centers, fcm_init, fcm_init_raster};
pub use multiphase::{gn_alternate, gn_fixed_c_minimize, threshold_chain, GnOutcome};
pub use trace::{ArofEngine, IterationRecord, IterationTrace, StopReason, StoppingRule};
pub use trof::{trof_levels, trof_segment, trof_segment_with, TauUpdate, TrofOptions, TrofOutcome};
pub use two_phase::{acv_from_arof, acv_segment, lambda_for, mu_for, update_constants, AcvOptions, AcvOutcome};
