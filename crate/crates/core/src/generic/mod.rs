//! Finite approximations of the generic structure of a random class, grown
//! by extension axioms, and the back-and-forth game used to compare them.

mod game;
mod oracle;

pub use game::{back_and_forth, homogeneity_probe, GameVerdict, Position, ProbeReport, Side};
pub(crate) use oracle::subsets_of_size_at_most;
pub use oracle::{compatible_extensions, verify_saturation, ExtensionStep, ExtensionType, GenericOracle, Saturation, SaturationReport};
