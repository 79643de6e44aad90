//! Jellium and indirect Coulomb energies of unit-density Bravais lattices.

pub mod cell;
pub mod energy;
pub mod finite;
pub mod lattice;
pub mod potential;

pub use cell::{ball_moment_lower_bound, WignerSeitzCell};
pub use energy::{
    indirect_energy, jellium_energy, jellium_table, shift_fourier_check, yukawa_shift,
    JelliumReport, LatticeSumResult,
};
pub use finite::{decomposition_check, finite_n_indirect, Carving, FiniteReport};
pub use lattice::{BravaisLattice, LatticeKind, V3};
pub use potential::{cell_self_potential, screened_potential};
