//! `bjlab operator-norm`: sampling campaign for `‖J_1⋯J_{d+1}‖₂ ≤ μ`.

use std::path::Path;

use bjlab_core::annihilator::{product_norm, MAX_MATERIALIZE};
use bjlab_core::block_jacobi::enforce_ubc;
use bjlab_core::linalg::random::random_orthogonal;
use bjlab_core::linalg::NORM_TOL;
use bjlab_core::{BlockIndex, ElementaryBlockMatrix, Matrix, OperatorProduct, Partition, PivotSequence};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde_json::json;

use crate::config::Resolved;
use crate::error::{CliError, CliResult, EXIT_BOUND, EXIT_OK};
use crate::output::{write_file, write_json, Cell, Table, OPNORM_COLUMNS, OPNORM_FORMAT};

/// Slack allowed when comparing an observed norm against `μ`.
pub const NORM_SLACK: f64 = 1e-9;

/// Pivot factors drawn Haar-uniformly and then column-permuted to satisfy
/// UBC with slack `rho`.
fn ubc_factors(p: &Partition, o: &PivotSequence, rho: f64, rng: &mut ChaCha8Rng) -> CliResult<Vec<Matrix>> {
    o.pairs()
        .iter()
        .map(|&(i, j)| {
            let hat = random_orthogonal(p.size(i) + p.size(j), rng);
            let u = ElementaryBlockMatrix::new(p.clone(), BlockIndex { i, j }, hat)
                .map_err(|e| CliError::Solver(e.to_string()))?;
            let out = enforce_ubc(&u, rho).map_err(|e| CliError::Solver(e.to_string()))?;
            Ok(out.factor.hat_u().clone())
        })
        .collect()
}

/// Norm of one sampled product of `sweeps` operators. Sample `index` draws
/// from its own ChaCha stream, so results do not depend on scheduling.
fn sample_norm(p: &Partition, o: &PivotSequence, rho: f64, sweeps: usize, seed: u64, index: usize) -> CliResult<f64> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(index as u64);
    let ops = (0..sweeps)
        .map(|_| {
            let hats = ubc_factors(p, o, rho, &mut rng)?;
            OperatorProduct::new(p, o, &hats).map_err(|e| CliError::Solver(e.to_string()))
        })
        .collect::<CliResult<Vec<_>>>()?;
    product_norm(&ops, NORM_TOL).map_err(|e| CliError::Solver(e.to_string()))
}

/// Samples the configured number of operator products and returns the exit code.
pub fn cmd_operator_norm(cfg: &Resolved, out_dir: &Path) -> CliResult<u8> {
    let p = cfg.require_partition()?;
    let o = &cfg.solver_config()?.strategy;
    let k = p.vec_len();
    if k > MAX_MATERIALIZE {
        return Err(CliError::Unsupported(format!("K = {k} exceeds the materialization limit {MAX_MATERIALIZE}")));
    }
    let bound = cfg
        .sequence_bound()?
        .map_err(|reason| CliError::Config(format!("no a-priori bound for this strategy: {reason}")))?;
    let seed = cfg.seed.ok_or_else(|| CliError::Config("operator-norm sampling needs a seed".into()))?;
    let mu = bound.mu.eta();

    let norms: Vec<f64> = (0..cfg.samples)
        .into_par_iter()
        .map(|index| sample_norm(p, o, cfg.solver.rho, bound.sweeps, seed, index))
        .collect::<CliResult<_>>()?;

    let mut table = Table::new(OPNORM_FORMAT, &OPNORM_COLUMNS)?;
    for (index, &norm) in norms.iter().enumerate() {
        table.push(&[Cell::Int(index), Cell::Real(norm), Cell::Real(mu), Cell::Real(norm - mu)])?;
    }
    let max_norm = norms.iter().copied().fold(0.0, f64::max);
    let violations = norms.iter().filter(|&&x| x > mu + NORM_SLACK).count();
    let exit = if violations > 0 { EXIT_BOUND } else { EXIT_OK };

    println!(
        "{} samples of a {}-operator product, K = {k}: max norm {max_norm:.6}, mu {mu:.6}, margin {:.3e}",
        cfg.samples,
        bound.sweeps,
        mu - max_norm
    );
    let csv = write_file(out_dir, "operator_norms.csv", &table.into_bytes()?)?;
    let summary = json!({
        "format": "bjlab-operator-norm v1",
        "config": cfg.to_json("operator-norm"),
        "bound": bound,
        "k": k,
        "samples": cfg.samples,
        "max_norm": max_norm,
        "mu": mu,
        "margin": mu - max_norm,
        "norm_slack": NORM_SLACK,
        "violations": violations,
        "exit_code": exit,
    });
    let json_path = write_json(out_dir, "operator_norm.json", &summary)?;
    if violations > 0 {
        eprintln!("bjlab: {violations} sampled norm(s) exceed mu + {NORM_SLACK:e}");
    }
    println!("wrote {} and {}", csv.display(), json_path.display());
    Ok(exit)
}
