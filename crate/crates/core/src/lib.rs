//! Exact dynamics of the Bose-Hubbard model on small lattices: sector bases,
//! sparse Hamiltonians, Krylov propagation, out-of-time-ordered correlators,
//! entanglement diagnostics and decay-model fits.

pub mod entropy;
pub mod error;
pub mod experiment;
pub mod fitting;
pub mod format;
pub mod fock;
pub mod hamiltonian;
pub mod lattice;
pub mod observables;
pub mod oracle;
pub mod propagator;
pub mod special;

pub use error::{Error, Result};
pub use fock::{enumerate_basis, sector_dimension, FockBasis, QuantumState};
pub use hamiltonian::{build_hamiltonian, BoseHubbardParams, SectorCache, SparseHamiltonian};
pub use lattice::{build_preset, load_graph, LatticeGraph, OperatorSitePair, PresetRegistry};
pub use observables::{compute_otoc_series, OtocSeries, TimeGrid};
pub use propagator::{KrylovConfig, KrylovPropagator, Propagator, PropagatorRegistry};
