//! DSL and CLI front end for the `gbx-core` graded Poisson engine.
//!
//! A `.gbx` document declares a coordinate context, binds named tensors, and
//! runs structure checks and analyses; the results are emitted either as
//! human-readable lines or as deterministic JSON (sorted keys, canonical
//! pretty-printing) so that reports diff cleanly.

pub mod ast;
pub mod error;
pub mod eval;
pub mod lex;
pub mod parse;
pub mod report;
pub mod run;
