//! The `bjlab` subcommands.

mod bounds;
mod classify;
mod jjacobi;
mod operator_norm;
mod run;

pub use bounds::cmd_bounds;
pub use classify::cmd_classify;
pub use jjacobi::cmd_jjacobi;
pub use operator_norm::cmd_operator_norm;
pub use run::cmd_run;
