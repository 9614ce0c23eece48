//! Anisotropic ROF denoising and Chan–Vese style segmentation of piecewise constant
//! images on rectilinear grids.
//!
//! Images are [`pcr::PcrImage`]s: one value per cell of a tensor grid whose lines may be
//! unevenly spaced. Perimeter is the anisotropic (ℓ1) length, so every minimization over
//! sets reduces to a minimum cut on the cell graph.

// Parameter checks are written `!(x > 0.0)` so that NaN is rejected too.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod algorithms;
pub mod cellset;
pub mod cli;
pub mod energy;
pub mod error;
pub mod flow;
pub mod graphcut;
pub mod grid;
pub mod oracle;
pub mod pcr;
pub mod pd;
pub mod raster;
pub mod report;

pub use cellset::{CellSet, NestedChain};
pub use error::{Error, Result};
pub use grid::{Grid, Rect};
pub use pcr::{PcrImage, PhaseConstants};
pub use raster::Raster;
