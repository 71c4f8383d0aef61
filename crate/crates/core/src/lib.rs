//! Finite element solver for the Landau-Lifshitz-Bloch equation (LLBE)
//!
//!   du/dt = k1 Laplace(u) + gamma u x Laplace(u) - k2 (1 + mu |u|^2) u
//!
//! and its viscous regularisation (the eps-LLBE), which adds
//! -eps Laplace(du/dt) to the left-hand side. Both are discretised with
//! vector-valued P1 Lagrange elements on simplicial meshes and a linear
//! semi-implicit Euler scheme: the cross and cubic terms are frozen at the
//! previous time level, so each step costs exactly one sparse linear solve.
//!
//! Besides the solver itself, the crate ships the verification machinery
//! used to trust it: exact per-step energy balances, discrete decay bounds,
//! dense brute-force step oracles, manufactured solutions, and extrapolated
//! convergence-rate studies on nested mesh hierarchies.

pub mod assembly;
pub mod cli;
pub mod diagnostics;
pub mod error;
pub mod io;
pub mod mesh;
pub mod presets;
pub mod quadrature;
pub mod scheme;
pub mod sparse;
pub mod studies;
pub mod verification;

pub use error::Error;
