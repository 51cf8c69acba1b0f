//! Finite relational structures and the constructions around Fraïssé limits
//! of amalgamation classes: binary random structures built from a permitted
//! set of 1- and 2-structures, seeded generic approximations, type and
//! algebraic-closure analysis, reduct checking and the doubled random graph.

pub mod amalgamation;
pub mod doubled;
pub mod error;
pub mod generic;
pub mod reduct;
pub mod structure;
pub mod text;
pub mod types;
pub mod zeroone;

pub use error::{Error, Result};
pub use structure::{Element, Embedding, FinStructure, TypeId, Vocabulary};
