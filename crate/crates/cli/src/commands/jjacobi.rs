//! `bjlab jjacobi`: the block J-Jacobi method on a positive definite matrix.

use std::path::Path;

use bjlab_core::jjacobi::{check_assumptions, FactorKind, JJacobiResult};
use bjlab_core::{jjacobi_solve, JJacobiError, JSignature};
use serde_json::json;

use crate::config::Resolved;
use crate::error::{CliError, CliResult, EXIT_NONCONVERGENCE, EXIT_OK};
use crate::output::{write_file, write_json, Cell, Table, JJACOBI_COLUMNS, JJACOBI_FORMAT};

fn factor_name(kind: FactorKind) -> &'static str {
    match kind {
        FactorKind::Orthogonal => "orthogonal",
        FactorKind::Hyperbolic => "hyperbolic",
    }
}

fn write_outputs(cfg: &Resolved, out_dir: &Path, r: &JJacobiResult, exit: u8) -> CliResult<()> {
    let report = check_assumptions(&r.diagnostics);
    let mut table = Table::new(JJACOBI_FORMAT, &JJACOBI_COLUMNS)?;
    let mut steps = r.diagnostics.steps.iter().peekable();
    for sweep in &report.sweeps {
        while let Some(s) = steps.next_if(|s| s.sweep == sweep.sweep) {
            table.push(&[
                Cell::Text("step"),
                Cell::Int(s.sweep),
                Cell::Int(s.k),
                Cell::Int(s.i),
                Cell::Int(s.j),
                Cell::Text(factor_name(s.kind)),
                Cell::Real(s.pivot_ratio),
                Cell::Real(s.off_ratio),
                Cell::Real(s.orthogonality_deviation),
                Cell::Real(s.sigma_min_fii),
                Cell::Real(s.frobenius_norm),
                Cell::Bool(s.ubc_applied),
            ])?;
        }
        table.push(&[
            Cell::Text("sweep"),
            Cell::Int(sweep.sweep),
            Cell::Empty,
            Cell::Empty,
            Cell::Empty,
            Cell::Empty,
            Cell::Real(sweep.max_pivot_ratio),
            Cell::Real(sweep.final_off_ratio),
            Cell::Real(sweep.max_deviation),
            Cell::Real(sweep.min_sigma),
            Cell::Empty,
            Cell::Empty,
        ])?;
    }
    let rows = table.rows();
    let csv = write_file(out_dir, "jtrace.csv", &table.into_bytes()?)?;
    let summary = json!({
        "format": "bjlab-jjacobi-summary v1",
        "config": cfg.to_json("jjacobi"),
        "converged": r.converged,
        "sweeps": r.sweeps,
        "j_defect": r.j_defect,
        "pencil_eigenvalues": r.pencil_eigenvalues,
        "diagonal": r.diagonal,
        "initial_frobenius": r.diagnostics.initial_frobenius,
        "initial_off_ratio": r.diagnostics.initial_off_ratio,
        "assumptions": report,
        "trace_rows": rows,
        "exit_code": exit,
    });
    let json_path = write_json(out_dir, "jjacobi_summary.json", &summary)?;
    println!(
        "{} after {} sweeps, J-defect {:.3e}, hyperbolic sigma check {}",
        if r.converged { "converged" } else { "NOT converged" },
        r.sweeps,
        r.j_defect,
        if report.hyperbolic_sigma_ok { "ok" } else { "FAILED" }
    );
    println!("pencil eigenvalues: {:?}", r.pencil_eigenvalues);
    println!("wrote {} ({rows} rows) and {}", csv.display(), json_path.display());
    Ok(())
}

/// Runs the J-Jacobi method and returns the exit code.
pub fn cmd_jjacobi(cfg: &Resolved, out_dir: &Path) -> CliResult<u8> {
    let solver = cfg.solver_config()?;
    let a = cfg.require_matrix()?.build()?;
    let nu = cfg.nu.ok_or_else(|| CliError::Config("jjacobi needs the signature nu (--nu)".into()))?;
    let sig = JSignature::new(a.n(), nu).map_err(|e| CliError::Config(e.to_string()))?;
    match jjacobi_solve(&a, sig, &solver) {
        Ok(r) => {
            write_outputs(cfg, out_dir, &r, EXIT_OK)?;
            Ok(EXIT_OK)
        }
        Err(JJacobiError::SweepCapExceeded { partial, .. }) => {
            write_outputs(cfg, out_dir, &partial, EXIT_NONCONVERGENCE)?;
            Ok(EXIT_NONCONVERGENCE)
        }
        Err(e @ (JJacobiError::HyperbolicBreakdown { .. } | JJacobiError::KernelNonConvergence { .. })) => {
            eprintln!("bjlab: {e}");
            Ok(EXIT_NONCONVERGENCE)
        }
        Err(e @ JJacobiError::NotPositiveDefinite { .. }) => Err(CliError::NotPositiveDefinite(e.to_string())),
        Err(e) => Err(CliError::Config(e.to_string())),
    }
}
