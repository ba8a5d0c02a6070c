//! Hyperbolic cellular automata simulating one-dimensional ones.
//!
//! The crate builds finite regions of the pentagrid, heptagrid and
//! dodecagrid, embeds an arbitrary one-dimensional automaton along a
//! guideline of such a grid and runs the resulting automaton.
//!
//! Without the default `std` feature the crate is `no_std` and needs only
//! `alloc`.

#![cfg_attr(not(feature = "std"), no_std)]

extern crate alloc;

pub mod ca1d;
pub mod embed;
pub mod engine;
pub mod grid;
pub mod lorentz;
pub mod symmetry;

/// A cell state. Automata have at most 256 states.
pub type State = u8;

pub use ca1d::{run_1d, step_1d, FixWitness, Rule1D, Tape};
pub use embed::{embed, embed_theorem1, embed_theorem3, embed_theorem4, verify_unique_applicability, EmbedError, HcaAutomaton};
pub use engine::{equivalence_check, init_configuration, step_hca, yellow_trace, Configuration, EngineError};
pub use grid::{build_region, marker_cells, Adjacent, CellId, Construction, GridError, GridKind, GuidelineCell, Region};
pub use symmetry::{FacePermutation, RotationGroup, RuleContext};
