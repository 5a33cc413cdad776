//! Static analysis of PV programs: consumption semantics of the cubical state
//! space, future links, spare capacities, deadlocks and critical states, and a
//! brute-force directed-path oracle to check them against.

pub mod analysis;
pub mod corpus;
pub mod links;
pub mod oracle;
pub mod pv_lang;
pub mod semantics;

pub use analysis::{analyze, AnalysisReport, AnalyzeOptions};
pub use links::{ConnectivityClass, Spare};
pub use pv_lang::{parse_program, serialize_program, Program};
pub use semantics::{Box, Dirs, StateSpace, Vertex};
