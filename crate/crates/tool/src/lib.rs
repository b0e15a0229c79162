//! File formats, JSON reports and the `polycube` command-line tool on top
//! of `polycube-core`.

pub mod cli;
pub mod clock;
pub mod error;
pub mod formats;
pub mod graph_json;

pub use clock::StdClock;
pub use error::ToolError;
