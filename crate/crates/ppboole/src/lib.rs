//! Boolean clones, height-1 conditions, and the pp-constructability classes
//! of relational structures on a two-element domain, together with the
//! complexity labels of the corresponding constraint satisfaction problems
//! and certificate-driven CSP-to-CSP reductions.

pub mod boolfn;
pub mod cli;
pub mod clones;
pub mod conditions;
pub mod poset;
pub mod ppcon;
pub mod reduction;
pub mod structures;
pub mod suite;

pub use boolfn::{named, BoolFn, BoolFnError, IndexMap};
pub use clones::{CloneSlice, GeneratorSet, MinorMapRule};
pub use structures::{canonical, Relation, Structure};

pub use cli::run as cli_run;
