//! Symmetry breaking for AllSAT enumeration of Ramsey-type arrowing
//! colorings.
//!
//! Pipeline: [`encode`] a host/pattern pair to CNF, find formula
//! symmetries with [`symmetry`], add breaking predicates from [`sbp`],
//! enumerate with [`solver`], and compare colorings up to host
//! automorphism in [`coloring`]. [`pipeline`] wires the stages together.

pub mod cnf;
pub mod coloring;
pub mod encode;
pub mod error;
pub mod graph;
pub mod pipeline;
pub mod sbp;
pub mod solver;
pub mod symmetry;
