//! Realization of heteroclinic networks in coupled cell systems.
//!
//! The pipeline runs from a directed graph of equilibria ([`graph`]) through a
//! constrained book embedding ([`book`]) or a degree profile, to a coupled cell
//! network ([`ccn`]), a synthesized scalar coupling function ([`synth`]) and
//! trajectory-level verification ([`dynamics`]). [`report`] bundles the
//! results into JSON and SVG artifacts.

pub mod book;
pub mod ccn;
pub mod dynamics;
pub mod error;
pub mod graph;
pub mod report;
pub mod synth;

pub use error::{Error, Result};
