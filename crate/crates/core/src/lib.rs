pub mod cache;
pub mod error;
pub mod exec;
pub mod harness;
pub mod io;
pub mod model;
pub mod plan;
pub mod query;
pub mod value;

pub use cache::{CacheStats, GraphCache, GraphDescriptor};
pub use error::{Error, Result};
pub use exec::{execute, execute_to_vec, ExecOptions, Flow, JoinStrategy, Row};
pub use model::{ColumnSchema, EdgeRecord, Role};
pub use plan::{bind_graphs, compile, required_indexes, CompiledQuery, LogicalPlan, PlanOptions};
pub use query::{assemble_query, InputSpec, QuerySpec, QueryText};
pub use value::{compare_values, format_value, parse_value, KgtkValue, Number};
