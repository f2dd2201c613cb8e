//! Hybrid quantum-classical physics-informed solver for the steady
//! lid-driven cavity.
//!
//! Spatial derivatives travel as truncated bivariate jets ([`jet`]) through a
//! dense statevector simulator ([`qsim`]) whose rotation angles come from a
//! coordinate embedding ([`embeddings`]). [`qpinn`] assembles the loss and
//! its exact gradient, [`baseline`] provides the classical MLP model under
//! the same loss, and [`reference`] generates finite-difference ground
//! truth.

pub mod baseline;
pub mod circuits;
pub mod embeddings;
pub mod error;
pub mod jet;
pub mod mlp;
pub mod optim;
pub mod qpinn;
pub mod qsim;
pub mod reference;

pub use error::{Error, Result};
