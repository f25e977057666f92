//! Simulation of multiqubit CNOT^N and C2NOT^2 gates for neutral-atom
//! qubits driven through Rydberg blockade and electromagnetically induced
//! transparency (EIT).
//!
//! The library propagates the non-Hermitian Schrodinger equation of one or
//! two three-level control atoms coupled to up to four four-level target
//! atoms, with homonuclear or heteronuclear (Rb/Cs) Forster interactions,
//! and evaluates gate truth tables and Bell/GHZ-state fidelities over
//! sweeps of interatomic distance and coupling strength.
//!
//! Conventions: hbar = 1; every frequency, Rabi amplitude, and interaction
//! energy is an angular frequency in rad/s; times are in seconds; distances
//! in micrometers. Configuration files use explicit unit suffixes
//! (`_mhz_2pi`, `_um`, `_ns`) and are converted on load.

pub mod config;
pub mod error;
pub mod fidelity;
pub mod geometry;
pub mod hamiltonian;
pub mod hilbert;
pub mod linalg;
pub mod propagator;
pub mod pulse;
pub mod species;
pub mod sweep;

pub use error::{Error, Result};
