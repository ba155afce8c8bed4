//! Synthetic corpora, the subclass closure, a brute-force oracle and the
//! use-case query set.

pub mod closure;
pub mod corpus;
pub mod differential;
pub mod laws;
pub mod oracle;
pub mod random;
pub mod usecases;

pub use closure::{closure, closure_p279star};
pub use differential::{check_random_case, run_engine, CaseOutcome};
pub use laws::{check_optional_law, LawOutcome};
pub use corpus::{generate_corpus, generate_scale_file, CorpusSpec, CORPUS_FILES};
pub use oracle::{load_inputs, oracle_query, oracle_query_bounded, OracleGraph, OracleResult};
pub use random::{random_case, RandomCase, RandomQuery};
pub use usecases::{oracle_usecases, Layout, UseCase, USE_CASES};
