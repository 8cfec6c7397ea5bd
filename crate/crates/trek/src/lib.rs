//! Trust-region and norm-regularized subproblem solvers built on extended
//! Krylov subspaces.
//!
//! The central entry points are [`trek_solve`] (minimize a quadratic over a
//! ball) and [`nrek_solve`] (minimize a quadratic plus a power-of-norm
//! penalty).  Both factor the symmetric matrix once, grow the extended Krylov
//! subspace span{b, A⁻¹b, Ab, A⁻²b, A²b, ...} one vector at a time, and solve
//! a small projected problem per step until a cheaply computable residual
//! estimate passes the tolerance.  Indefinite matrices are handled by a
//! Gershgorin-based diagonal shift that is transparent to the caller: the
//! reported multiplier is always on the unshifted scale.
//!
//! Supporting modules are usable on their own:
//!
//! * [`matrix`], [`cholesky`], [`eig`]: dense/banded symmetric storage,
//!   shifted Cholesky factorization with solve telemetry, and a symmetric
//!   eigensolver plus one-sided Jacobi singular values.
//! * [`eks`]: the extended Krylov recurrence and the pentadiagonal projected
//!   matrix it maintains, including the elliptic-norm variant.
//! * [`secular`]: diagonal trust-region and regularization secular solvers.
//! * [`oracle`]: reference solvers (Moré–Sorensen iteration, dense spectral
//!   solve) used to cross-check the Krylov path.
//! * [`manifold`]: low-rank structure of the shifted-inverse manifold
//!   (Cauchy matrices, ε-ranks, the Beckermann–Townsend bound).
//! * [`rates`]: convergence-rate functions for the extended Krylov space on
//!   an interval spectrum.
//! * [`mm`]: Matrix Market coordinate I/O.
//! * [`synth`], [`bench`], [`cli`]: seeded problem generators, benchmark
//!   suites with Dolan–Moré performance profiles, and the command-line
//!   drivers used by the `trek` binary.
//!
//! The `examples/` directory of this crate is the guided tour: one runnable
//! program per capability.

pub mod bench;
pub mod cholesky;
pub mod cli;
pub mod eig;
pub mod eks;
pub mod manifold;
pub mod matrix;
pub mod mm;
pub mod nrek;
pub mod oracle;
pub mod rates;
pub mod secular;
pub mod synth;
pub mod trek;

mod vecmath;

pub use cholesky::{factorize, CholeskyFactor};
pub use eig::{singular_values, sym_eig, DenseMatrix, SpectralDecomposition};
pub use eks::EksState;
pub use manifold::{bt_bound, cauchy_matrix, epsilon_rank, spectrum, RankReport, SpectrumKind};
pub use matrix::SymmetricMatrix;
pub use nrek::{nrek_resolve, nrek_solve, RegOptions};
pub use oracle::{dense_spectral_solve, more_sorensen_solve, OracleReport};
pub use rates::RateModel;
pub use secular::{solve_diag_reg, solve_diag_tr, Constraint, SecularProblem, SecularSolution};
pub use trek::{
    perturb_rhs, residual_norm, trek_resolve, trek_solve, trek_solve_snorm, ShiftMode,
    SubproblemSolution, TrekError, TrekOptions, TrekSession,
};
