//! Supersymmetry of a charged spin-1/2 particle in time-dependent planar
//! magnetic and electric fields.
//!
//! The library builds the time-dependent supercharges and ladder operators of
//! the two-dimensional Pauli problem with vector potential `A = a(t) z / 2`,
//! `a(t) = D(t) + i B(t)`, proves their algebra exactly with a small
//! noncommutative rewriting engine, generates exact solutions of the
//! nonstationary Pauli equation from the ladder structure, and cross-validates
//! them against an independent spectral propagator.
//!
//! # Conventions
//!
//! Units `hbar = m = 1`; the charge `e` is a signed free parameter. Complex
//! coordinate `z = x + iy` with `d/dz = (d/dx - i d/dy)/2`. Kinetic momenta
//!
//! ```text
//! pi_minus = -2i d/dz  - (e a*(t)/2) z*
//! pi_plus  = -2i d/dz* - (e a(t)/2)  z
//! ```
//!
//! and the Hamiltonian generating the dynamics `i dpsi/dt = H psi` is the
//! block-diagonal `H = diag(pi_minus pi_plus, pi_plus pi_minus)`, i.e.
//! `pi_x^2 + pi_y^2 - e B sigma_z` without a 1/2 prefactor. All time
//! dependence of the dressed operators is carried by a complex solution of the
//! auxiliary oscillator equation `f'' = -((eB)^2 + e D') f`, Wronskian-scaled
//! so that `f conj(f') - conj(f) f' = -2i`, together with the accumulated
//! phase `Omega(t) = e Int B dt`.
//!
//! # Modules
//!
//! - [`fields`]: field profiles `B(t)`, `D(t)` and direct field quantities.
//! - [`aux_ode`]: the auxiliary oscillator solve, Wronskian normalization and
//!   per-time operator coefficients.
//! - [`grid`]: periodic square grid, spectral derivatives, inner products and
//!   snapshot I/O for two-component wavefunctions.
//! - [`operators`]: matrix-free application of every operator of the algebra
//!   to a grid wavefunction, plus commutator residual probes.
//! - [`solutions`]: exact eigensolutions built by the ladder operators and
//!   their Pauli-equation residual.
//! - [`propagator`]: independent explicit time integration of the Pauli
//!   equation with conserved-observable tracking.
//! - [`symbolic`]: exact noncommutative operator algebra and the identity
//!   verification suite.
//! - [`exec`]: sequential/parallel execution control (`SUSY_PAULI_THREADS`).

pub mod aux_ode;
pub mod exec;
pub mod fields;
pub mod grid;
pub mod operators;
pub mod propagator;
pub mod solutions;
pub mod symbolic;
