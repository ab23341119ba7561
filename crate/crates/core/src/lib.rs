//! Secular Bloch-Redfield dynamics of two Ising-coupled qubits coupled to
//! either two independent ohmic baths or a single common one.
//!
//! The crate is organised bottom-up:
//!
//! - [`spectral`]: system Hamiltonian, its closed-form eigensystem and the
//!   density-matrix type with its basis tag.
//! - [`bath`]: ohmic spectral density, golden-rule transition rates and
//!   dephasing rates.
//! - [`propagator`]: closed-form population and coherence evolution,
//!   equilibrium states and relaxation-time extraction.
//! - [`observables`]: concurrence, von Neumann entropy and purity.
//! - [`oracle`]: independent numerics (Jacobi eigensolver, RK4, rate
//!   quadrature) used to cross-check every closed form.
//!
//! Units are ħ = k_B = 1. Level indices are zero-based in code: index `k`
//! refers to eigenstate `|k+1⟩`, so the singlet is index [`SINGLET`].

pub mod bath;
pub mod error;
pub mod observables;
pub mod oracle;
pub mod propagator;
pub mod spectral;

pub use bath::{BathConfig, RateTable, Topology};
pub use error::{Error, Result};
pub use observables::{concurrence, purity, von_neumann_entropy, ObservableSample};
pub use propagator::{equilibrium_state, evolve, Propagator, Relaxation, Trajectory};
pub use spectral::{
    build_hamiltonian, diagonalize, make_state, Basis, DensityMatrix, SpectralDecomposition, StatePreset, SystemParams,
};

/// Zero-based index of the singlet eigenstate `|3⟩`.
pub const SINGLET: usize = 2;

/// Complex 4×4 matrix used for density matrices.
pub type CMat4 = nalgebra::Matrix4<num_complex::Complex64>;

/// Real 4×4 matrix used for Hamiltonians and rate tables.
pub type RMat4 = nalgebra::Matrix4<f64>;
