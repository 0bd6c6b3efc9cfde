//! Bi-objective solver for the leximin selective assessment routing problem:
//! choose team routes that visit sites within a time budget, trading total
//! duration against the leximin-ordered coverage of site characteristics.

pub mod archive;
pub mod coverage;
pub mod eval;
pub mod instance;
pub mod io;
pub mod mdls;
pub mod operators;
pub mod oracle;
pub mod solution;

pub use archive::{ArchiveEntry, InsertOutcome, ParetoArchive};
pub use coverage::{dominates, leximin_compare, CoverageRatio, CoverageVector, Objectives};
pub use instance::{generate_instance, GeneratorParams, Instance, InstanceError, Layout};
pub use mdls::{mdls_run, Configuration, Objective, RunOutcome, SearchConfig};
pub use solution::Solution;
