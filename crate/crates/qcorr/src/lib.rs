//! Witnessed entanglement and geometric discord in Schatten p-norms for
//! finite-dimensional bipartite density matrices.
//!
//! The crate provides:
//!
//! - [`matops`]: dense complex matrix primitives, partial transpose/trace,
//!   Hermitian eigendecompositions, Schatten norms.
//! - [`states`]: canonical bipartite state families (maximally entangled,
//!   Werner, a 3x3 one-parameter PPT-entangled family, a 4x4 tile-pattern
//!   bound entangled state) plus classical-quantum constructions.
//! - [`witness`]: entanglement quantifiers through optimized witnesses:
//!   negativity, random robustness (analytic decomposable optimum and a
//!   certified cutting-plane solver over all states), and a PPT relaxation
//!   of the generalized robustness.
//! - [`discord`]: geometric quantum discord `D_p`, the minimal Schatten
//!   p-distance to the classical-quantum states on a chosen side, with a
//!   seeded multi-restart basis optimizer.
//! - [`bounds`]: the discord-versus-entanglement inequalities tying the two
//!   families together, parameter sweeps, and reproduction of the reference
//!   tables with per-cell tolerances.
//!
//! All stochastic routines are driven by [`RunConfig::seed`] and produce
//! identical results for identical seeds, independent of thread count.

pub mod bounds;
pub mod config;
pub mod discord;
pub mod error;
pub mod matops;
mod optim;
pub mod states;
pub mod witness;

pub use config::RunConfig;
pub use error::{Error, Result};
pub use matops::{CMatrix, CVector, Cut, Side, C64};
pub use states::BipartiteState;
pub use witness::{EntanglementResult, Witness, WitnessFamily};
