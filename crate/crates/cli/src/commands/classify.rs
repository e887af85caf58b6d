//! `bjlab classify`: class memberships, witnesses and the ordering matrix of
//! a pivot sequence.

use std::fmt::Write as _;
use std::path::Path;
use std::str::FromStr;

use bjlab_core::orderings::{
    are_weak_equivalent, canonical_form, ordering_matrix, recognize_with_witness, ChainRelation, ChainShape,
    ClassWitness, OrderingMatrix, SerialBase, WeakChain, MAX_SEARCH_BLOCKS,
};
use bjlab_core::{ClassKind, OrderingError, PivotSequence};

use crate::config::{missing_pair, StrategySpec};
use crate::error::{CliError, CliResult, EXIT_OK};

/// Parses an `M_O` display: `m` rows of `m` entries with `*` on the diagonal.
fn parse_ordering_matrix(text: &str) -> CliResult<PivotSequence> {
    let rows = text
        .lines()
        .map(str::trim)
        .filter(|l| !l.is_empty())
        .map(|line| {
            line.split_whitespace()
                .map(|tok| match tok {
                    "*" => Ok(-1),
                    _ => {
                        tok.parse::<i64>().map_err(|_| CliError::Parse(format!("M_O entry {tok:?} is not an integer")))
                    }
                })
                .collect::<CliResult<Vec<i64>>>()
        })
        .collect::<CliResult<Vec<_>>>()?;
    let om = OrderingMatrix::from_rows(&rows).map_err(|e| CliError::Parse(format!("M_O: {e}")))?;
    PivotSequence::from_ordering_matrix(&om).map_err(|e| CliError::Parse(format!("M_O: {e}")))
}

/// Reads the sequence from a file when `input` names one, else parses it
/// inline. Files may hold a strategy spec or an `M_O` display.
fn load_sequence(input: &str, blocks: Option<usize>, seed: Option<u64>) -> CliResult<PivotSequence> {
    let path = Path::new(input);
    let text = if path.is_file() {
        std::fs::read_to_string(path).map_err(|source| CliError::Read { path: path.to_path_buf(), source })?
    } else {
        input.to_string()
    };
    if text.contains('*') {
        return parse_ordering_matrix(&text);
    }
    let text = text.split_whitespace().collect::<Vec<_>>().join(" ");
    let text = if text.starts_with('(') { format!("pairs:{}", text.replace(' ', "")) } else { text };
    let spec = StrategySpec::from_str(&text)?;
    Ok(spec.resolve(&text, blocks, seed)?.sequence)
}

fn describe_witness(w: &ClassWitness) -> String {
    let family = match w.base_kind {
        SerialBase::Col => "B_c",
        SerialBase::Row => "B_r",
        SerialBase::ColRev => "B_c_rev",
        SerialBase::RowRev => "B_r_rev",
    };
    let prefix = if w.quasi { "bar" } else { "" };
    let shape = match w.shape {
        ChainShape::PermThenWeak => "O(q) w~ O''",
        ChainShape::WeakThenPerm => "O w~ O', O'(q) = O''",
    };
    format!("base {prefix}{family} {}, q = {}, {shape}, d = {}", w.base, w.permutation, w.shifts)
}

/// The weak chain that realizes a witness.
fn witness_chain(o: &PivotSequence, w: &ClassWitness) -> Result<Option<WeakChain>, OrderingError> {
    match w.shape {
        ChainShape::PermThenWeak => are_weak_equivalent(&o.relabel(&w.permutation), &w.base),
        ChainShape::WeakThenPerm => are_weak_equivalent(o, &w.base.relabel(&w.permutation.inverse())),
    }
}

fn render_chain(chain: &WeakChain) -> String {
    let mut out = format!("  {}\n", chain.start);
    for link in &chain.links {
        let rel = match link.relation {
            ChainRelation::Equivalent => "~ ".to_string(),
            ChainRelation::Shift(r) => format!("s~ (shift by {r}) "),
        };
        let _ = writeln!(out, "  {rel}{}", link.sequence);
    }
    out
}

/// Prints the classification of `input` and returns the exit code.
///
/// `only` restricts the report to one class; search-based classes on more
/// than [`MAX_SEARCH_BLOCKS`] blocks are an error when requested that way and
/// are reported as skipped otherwise.
pub fn cmd_classify(input: &str, only: Option<ClassKind>, blocks: Option<usize>, seed: Option<u64>) -> CliResult<u8> {
    let o = load_sequence(input, blocks, seed)?;
    if let Some((i, j)) = missing_pair(&o) {
        return Err(CliError::NotPivotStrategy(format!("pair ({i},{j}) never appears in {o}")));
    }
    let m = o.m();
    if let Some(kind) = only {
        if kind.needs_search() && m > MAX_SEARCH_BLOCKS {
            return Err(CliError::Unsupported(format!(
                "{kind} needs a search, which supports m <= {MAX_SEARCH_BLOCKS} (got m = {m})"
            )));
        }
    }

    let mut report = String::new();
    let _ = writeln!(report, "sequence: {o}");
    let _ = writeln!(report, "m = {m}, length {}, {}", o.len(), if o.is_cyclic() { "cyclic" } else { "quasi-cyclic" });
    let _ = writeln!(report, "canonical form: {}", canonical_form(&o));
    match ordering_matrix(&o) {
        Ok(mo) => {
            let _ = writeln!(report, "M_O:\n{mo}");
        }
        Err(_) => {
            let _ = writeln!(report, "M_O: not defined for a quasi-cyclic sequence");
        }
    }

    let kinds: Vec<ClassKind> = only.map_or_else(|| ClassKind::ALL.to_vec(), |k| vec![k]);
    let mut witnesses: Vec<(ClassKind, ClassWitness)> = Vec::new();
    let _ = writeln!(report, "classes:");
    for kind in kinds {
        if kind.needs_search() && m > MAX_SEARCH_BLOCKS {
            let _ = writeln!(report, "  {:<11} skipped (search supports m <= {MAX_SEARCH_BLOCKS})", kind.name());
            continue;
        }
        match recognize_with_witness(kind, &o) {
            Ok(Some(w)) => {
                let _ = writeln!(report, "  {:<11} yes  {}", kind.name(), describe_witness(&w));
                witnesses.push((kind, w));
            }
            Ok(None) => {
                let _ = writeln!(report, "  {:<11} no", kind.name());
            }
            Err(OrderingError::UnsupportedSize { .. }) if only.is_none() => {
                let _ = writeln!(report, "  {:<11} undecided (search limit)", kind.name());
            }
            Err(e) => return Err(CliError::Unsupported(format!("{kind}: {e}"))),
        }
    }

    // The chain of the most general class that matches the sequence type.
    let preferred = if o.is_cyclic() { ClassKind::Bsg } else { ClassKind::BarBsg };
    let general = witnesses.iter().find(|(k, _)| *k == preferred).or(witnesses.last());
    if let Some((kind, w)) = general {
        if m <= MAX_SEARCH_BLOCKS {
            if let Ok(Some(chain)) = witness_chain(&o, w) {
                let _ = writeln!(report, "witness chain for {} ({} shift(s)):", kind.name(), chain.shifts());
                report.push_str(&render_chain(&chain));
            }
        }
    }
    print!("{report}");
    Ok(EXIT_OK)
}
