//! Gram-matrix feasibility search with exact rationalization, and the rational
//! LDL^T kernel behind every sum-of-squares witness.

mod ldlt;
mod project;
mod rationalize;
mod search;
mod solve;
mod system;

pub use ldlt::{gram_to_sos, psd_ldlt, LdltResult};
pub use project::ExactProjector;
pub use rationalize::{rationalize, DEFAULT_LADDER};
pub use search::{degree_schedule, matrix_sos_search, verify_eps_certificate, EpsCertificate, SearchConfig};
pub(crate) use search::solve_exact;
pub use solve::{solve_feasibility, FeasibilitySolver, FloatSolution, Method, SolveError, SolverConfig};
pub use system::{build_gram_system, witness_from_blocks, GramBlock, GramSystem, Mode, RowKey};
