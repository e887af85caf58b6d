//! `bjlab run`: block Jacobi runs with trace export and bound checking.

use std::path::Path;

use bjlab_core::block_jacobi::{BlockJacobiResult, ConvergenceTrace};
use bjlab_core::bounds::SequenceBound;
use bjlab_core::BlockJacobiError;
use rayon::prelude::*;
use serde_json::json;

use crate::config::Resolved;
use crate::error::{CliError, CliResult, EXIT_BOUND, EXIT_NONCONVERGENCE, EXIT_OK};
use crate::output::{write_file, write_json, Cell, Table, RUN_COLUMNS, RUN_FORMAT};

/// Slack allowed when comparing an observed ratio against `η`.
pub const BOUND_SLACK: f64 = 1e-12;

/// Outcome of one repetition.
struct Repetition {
    rep: usize,
    seed: Option<u64>,
    result: BlockJacobiResult,
}

/// Bound verdicts of one repetition.
struct Verdicts {
    /// Window ratio ending at each sweep, when a full window is available.
    window: Vec<Option<f64>>,
    violations: usize,
    max_window_ratio: Option<f64>,
}

fn verdicts(trace: &ConvergenceTrace, bound: Option<&SequenceBound>) -> Verdicts {
    let mut window = vec![None; trace.sweeps.len()];
    let mut violations = 0;
    let mut max_window_ratio: Option<f64> = None;
    if let Some(b) = bound {
        for (start, ratio) in trace.window_ratios(b.sweeps).into_iter().enumerate() {
            window[start + b.sweeps - 1] = Some(ratio);
            max_window_ratio = Some(max_window_ratio.map_or(ratio, |m| m.max(ratio)));
            if !b.eta.admits(ratio, BOUND_SLACK) {
                violations += 1;
            }
        }
    }
    Verdicts { window, violations, max_window_ratio }
}

fn push_trace(
    table: &mut Table,
    rep: usize,
    trace: &ConvergenceTrace,
    bound: Option<&SequenceBound>,
    v: &Verdicts,
) -> CliResult<()> {
    let mut prev = trace.initial_off_norm;
    let mut steps = trace.steps.iter().peekable();
    for sweep in &trace.sweeps {
        while let Some(s) = steps.next_if(|s| s.sweep == sweep.index) {
            let ratio = if prev == 0.0 { 0.0 } else { (s.off_norm / prev).powi(2) };
            prev = s.off_norm;
            table.push(&[
                Cell::Int(rep),
                Cell::Text("step"),
                Cell::Int(s.sweep),
                Cell::Int(s.k),
                Cell::Int(s.i),
                Cell::Int(s.j),
                Cell::Real(s.off_norm),
                Cell::Real(ratio),
                Cell::Empty,
                Cell::Empty,
                Cell::Empty,
                Cell::Real(s.sigma_min_uii),
                Cell::Bool(s.ubc_applied),
                Cell::Empty,
            ])?;
        }
        let window = v.window[sweep.index];
        let eta = window.and(bound.map(|b| b.eta.eta()));
        let (margin, ok) = match (window, bound) {
            (Some(w), Some(b)) => (Cell::Real(b.eta.eta() - w), Cell::Bool(b.eta.admits(w, BOUND_SLACK))),
            _ => (Cell::Empty, Cell::Empty),
        };
        table.push(&[
            Cell::Int(rep),
            Cell::Text("sweep"),
            Cell::Int(sweep.index),
            Cell::Empty,
            Cell::Empty,
            Cell::Empty,
            Cell::Real(sweep.off_after),
            Cell::Real(sweep.ratio),
            window.into(),
            eta.into(),
            margin,
            Cell::Real(sweep.min_sigma),
            Cell::Empty,
            ok,
        ])?;
    }
    Ok(())
}

/// Runs the configured experiment and returns the exit code.
pub fn cmd_run(cfg: &Resolved, out_dir: &Path) -> CliResult<u8> {
    let mut solver = cfg.solver_config()?;
    let matrix = cfg.require_matrix()?;
    let bound = cfg.sequence_bound()?;
    if cfg.check_bounds {
        if let Err(reason) = &bound {
            return Err(CliError::Config(format!("--check-bounds needs an a-priori bound: {reason}")));
        }
    }
    solver.bound = bound.as_ref().ok().cloned();
    let bound = bound.ok();

    let reps: Vec<Repetition> = (0..cfg.repetitions)
        .into_par_iter()
        .map(|rep| {
            let source = matrix.for_repetition(rep);
            let a = source.build()?;
            let result = match bjlab_core::solve(&a, &solver) {
                Ok(r) => r,
                Err(BlockJacobiError::SweepCapExceeded { partial, .. }) => *partial,
                Err(e) => return Err(CliError::Solver(format!("repetition {rep}: {e}"))),
            };
            Ok(Repetition { rep, seed: source.seed(), result })
        })
        .collect::<CliResult<_>>()?;

    let mut table = Table::new(RUN_FORMAT, &RUN_COLUMNS)?;
    let mut summaries = Vec::new();
    let mut violations = 0;
    let mut all_converged = true;
    for r in &reps {
        let trace = &r.result.trace;
        let v = verdicts(trace, bound.as_ref());
        push_trace(&mut table, r.rep, trace, bound.as_ref(), &v)?;
        violations += v.violations;
        all_converged &= r.result.converged;
        let final_off = trace.sweeps.last().map_or(trace.initial_off_norm, |s| s.off_after);
        let max_sweep_ratio =
            trace.sweeps.iter().map(|s| s.ratio).fold(None, |m: Option<f64>, x| Some(m.map_or(x, |m| m.max(x))));
        println!(
            "rep {}: {} after {} sweeps, S(A) {:.3e} -> {:.3e}{}",
            r.rep,
            if r.result.converged { "converged" } else { "NOT converged" },
            r.result.sweeps,
            trace.initial_off_norm,
            final_off,
            match (v.max_window_ratio, bound.as_ref()) {
                (Some(w), Some(b)) => format!(", max ratio {w:.6} vs eta = 1 - {:.3e}", b.eta.margin()),
                _ => String::new(),
            }
        );
        summaries.push(json!({
            "rep": r.rep,
            "seed": r.seed,
            "converged": r.result.converged,
            "sweeps": r.result.sweeps,
            "steps": trace.steps.len(),
            "frobenius_norm": trace.frobenius_norm,
            "initial_off_norm": trace.initial_off_norm,
            "final_off_norm": final_off,
            "max_sweep_ratio": max_sweep_ratio,
            "max_window_ratio": v.max_window_ratio,
            "bound_violations": v.violations,
            "ubc_switch_off_step": trace.ubc_switch_off_step,
            "eigenvalues": r.result.eigenvalues,
        }));
    }

    let exit = if cfg.check_bounds && violations > 0 {
        EXIT_BOUND
    } else if !all_converged {
        EXIT_NONCONVERGENCE
    } else {
        EXIT_OK
    };
    let rows = table.rows();
    let csv = write_file(out_dir, "trace.csv", &table.into_bytes()?)?;
    let summary = json!({
        "format": "bjlab-summary v1",
        "config": cfg.to_json("run"),
        "bound": bound,
        "bound_slack": BOUND_SLACK,
        "converged": all_converged,
        "bound_violations": violations,
        "trace_rows": rows,
        "repetitions": summaries,
        "exit_code": exit,
    });
    let json_path = write_json(out_dir, "summary.json", &summary)?;
    if cfg.check_bounds && violations > 0 {
        eprintln!("bjlab: {violations} sweep window(s) exceed the bound eta");
    }
    println!("wrote {} ({rows} rows) and {}", csv.display(), json_path.display());
    Ok(exit)
}
