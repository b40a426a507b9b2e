//! Derivative-free optimization: grid scans, an FFT dechirp scan for the
//! chirp periodogram, and the Nelder–Mead downhill simplex.

mod dechirp;
mod grid;
mod simplex;

pub use dechirp::{dechirp_scan, DechirpScanner};
pub(crate) use grid::hit_order;
pub use grid::{grid_search, GridAxis, GridHit, GridSpec};
pub use simplex::{
    default_steps, nelder_mead, nelder_mead_with_steps, SimplexConfig, SimplexReport,
};
