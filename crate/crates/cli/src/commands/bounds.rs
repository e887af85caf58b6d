//! `bjlab bounds`: tables of the contraction constants for a partition.

use std::fmt::Write as _;
use std::path::Path;

use bjlab_core::bounds::eta_recursion;
use serde_json::json;

use crate::config::Resolved;
use crate::error::{CliError, CliResult, EXIT_OK};
use crate::output::write_json;

/// Prints the per-level constants and, with a strategy, the bound that
/// applies to it. Writes `bounds.json` when an output directory is given.
pub fn cmd_bounds(cfg: &Resolved, out_dir: Option<&Path>) -> CliResult<u8> {
    let p = cfg.require_partition()?;
    let rho = cfg.solver.rho;
    let c = eta_recursion(p, rho).map_err(|e| CliError::Config(e.to_string()))?;

    let mut out = String::new();
    let _ = writeln!(out, "partition {p}, rho {rho}");
    let _ = writeln!(
        out,
        "{:>3} {:>5} {:>12} {:>12} {:>22} {:>14} {:>22} {:>14}",
        "l", "s_l", "zeta_sharp", "zeta_crude", "eta_l", "ln(1-eta_l)", "eta_tilde_l", "ln(1-eta~_l)"
    );
    for (idx, level) in (2..=p.m()).enumerate() {
        let eta = c.eta_per_level[idx];
        let tilde = c.eta_tilde_per_level[idx];
        let floor = &c.zeta_floor_per_level[idx];
        let _ = writeln!(
            out,
            "{level:>3} {:>5} {:>12.6e} {:>12.6e} {:>22.17} {:>14.6e} {:>22.17} {:>14.6e}",
            p.cumulative(level),
            floor.sharp,
            floor.crude,
            eta.eta(),
            eta.log_margin(),
            tilde.eta(),
            tilde.log_margin()
        );
    }
    let _ = writeln!(out, "eta       = {:.17} (ln(1-eta) = {:.6e}, {:?})", c.eta.eta(), c.eta.log_margin(), c.source);
    let _ = writeln!(out, "recursion = {:.17}", c.eta_recursion.eta());
    let _ = writeln!(out, "eta_tilde = {:.17}", c.eta_tilde.eta());
    let _ = writeln!(out, "mu        = {:.17} (ln(1-mu) = {:.6e})", c.mu.eta(), c.mu.log_margin());

    let mut sequence_bound = serde_json::Value::Null;
    if cfg.strategy.is_some() {
        match cfg.sequence_bound()? {
            Ok(b) => {
                let _ = writeln!(
                    out,
                    "strategy {}: eta {:.17} over {} sweep(s) on frame {:?}, mu {:.17}",
                    cfg.require_strategy()?.sequence,
                    b.eta.eta(),
                    b.sweeps,
                    b.bound_partition,
                    b.mu.eta()
                );
                sequence_bound = serde_json::to_value(&b)?;
            }
            Err(reason) => {
                let _ = writeln!(out, "strategy {}: no bound ({reason})", cfg.require_strategy()?.sequence);
            }
        }
    }
    print!("{out}");
    if let Some(dir) = out_dir {
        let doc = json!({
            "format": "bjlab-bounds v1",
            "config": cfg.to_json("bounds"),
            "constants": c,
            "sequence_bound": sequence_bound,
        });
        let path = write_json(dir, "bounds.json", &doc)?;
        println!("wrote {}", path.display());
    }
    Ok(EXIT_OK)
}
