//! Presheaf toposes on finite categories: sieves, Grothendieck topologies,
//! sheaf conditions, orthogonality, and envelopes (least subtoposes
//! containing a given object), with the cohesive adjoint string of a
//! pre-cohesive site.
//!
//! Everything is computed exhaustively over finite data, so results are
//! exact. Start with [`catalog`] for ready-made sites and
//! [`envelope::envelope_of`] for the main computation.

pub mod catalog;
pub mod cli;
pub mod cohesion;
pub mod envelope;
pub mod fincat;
pub mod generate;
pub mod presheaf;
pub mod report;
pub mod sieve;
pub mod sitefile;
pub mod verify;

pub use fincat::{FinCategory, MorId, ObjId};
pub use presheaf::{NatTransf, Presheaf, Site, Subobject};
pub use sieve::{Sieve, Topology};
