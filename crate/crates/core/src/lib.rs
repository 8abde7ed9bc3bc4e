//! Numerical toolkit for symmetric informationally complete (SIC) fiducial
//! vectors in complex dimension `d`.
//!
//! The pipeline mirrors how Weyl–Heisenberg SICs are found in practice:
//!
//! - [`whgroup`] builds the shift/phase operators, displacement operators,
//!   Clifford unitaries realized from symplectic matrices, and the order-3
//!   Zauner unitary with its eigenprojectors.
//! - [`overlaps`] computes the autocorrelation matrix `G` (via FFT) and the
//!   squared-overlap matrix `F`, together with direct reference evaluations.
//! - [`objective`] is the frame-error functional `Σ|G − G_sic|²` with its
//!   analytic gradient, plus the reduced three-row residual system.
//! - [`search`] runs Haar-random restarts of an L-BFGS minimizer, optionally
//!   restricted to a Zauner eigenspace.
//! - [`verify`] checks candidates against the defining overlap conditions
//!   using a code path independent of the FFT objective.
//! - [`refine`] polishes a double-precision fiducial with multi-precision
//!   Gauss–Newton.
//! - [`classify`] computes Clifford orbits, extended-Clifford equivalence and
//!   stabilizers for small dimensions.
//! - [`store`] reads and writes the `SICFID 1` solution format and catalogue
//!   directories.

pub mod classify;
mod clock;
pub mod error;
pub mod fiducials;
pub mod lbfgs;
pub mod mp;
pub mod objective;
pub mod overlaps;
pub mod refine;
pub mod search;
pub mod store;
pub mod verify;
pub mod whgroup;

pub use error::{Error, Result};
pub use num_complex::Complex64;
pub use overlaps::{FMatrix, FiducialVector, GMatrix};
pub use search::{SearchConfig, SearchMode, SearchReport, Symmetry};
pub use store::SicSolution;
pub use verify::VerificationReport;
pub use whgroup::{CliffordElement, DisplacementIndex, SymplecticMatrix, UnitaryMatrix, ZaunerData};

/// Version string embedded in written solution files.
pub const TOOL_VERSION: &str = env!("CARGO_PKG_VERSION");
