//! Experiment configuration: the JSON file, command-line overrides, the
//! strategy mini-language and matrix sources.
//!
//! A configuration file is a JSON object whose fields are all optional:
//!
//! ```json
//! {
//!   "matrix": { "kind": "random", "n": 12, "seed": 7, "scale": 1.0 },
//!   "partition": "pi:3,3,3,3",
//!   "strategy": "class:B_c m=4 seed=7",
//!   "seed": 7,
//!   "solver": { "ubc": "always", "rho": 1.0, "sweep_cap": 30, "stop_tol": 1e-12, "eig_order": "nonincreasing" },
//!   "out_dir": "out",
//!   "repetitions": 4,
//!   "check_bounds": true,
//!   "samples": 200,
//!   "nu": 4
//! }
//! ```
//!
//! Command-line flags override the file. The resolved values are echoed into
//! every JSON summary.

use std::fs;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use bjlab_core::bounds::{mu_for_sequence, SequenceBound};
use bjlab_core::linalg::random::{random_spd, random_symmetric};
use bjlab_core::orderings::{generate_member, ClassWitness, GenerateOptions};
use bjlab_core::{ClassKind, EigenOrdering, Matrix, Partition, PivotSequence, SolverConfig, SymmetricMatrix, UbcMode};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{CliError, CliResult};

/// Largest asymmetry `|a_ij − a_ji|` accepted in a matrix file.
pub const SYMMETRY_TOL: f64 = 1e-12;

/// The contents of a `--config` file.
#[derive(Clone, Debug, Default, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ExperimentConfig {
    pub matrix: Option<MatrixSource>,
    /// Partition in the `pi:n1,n2,…` form.
    pub partition: Option<String>,
    /// Strategy spec, see [`StrategySpec`].
    pub strategy: Option<String>,
    /// Seed used by random sources and class specs that do not carry their own.
    pub seed: Option<u64>,
    pub solver: SolverSettings,
    pub out_dir: Option<PathBuf>,
    /// Independent repetitions of `run` (random sources use `seed + r`).
    pub repetitions: Option<usize>,
    pub check_bounds: Option<bool>,
    /// Number of sampled operators for `operator-norm`.
    pub samples: Option<usize>,
    /// Signature `ν` for `jjacobi`.
    pub nu: Option<usize>,
}

impl ExperimentConfig {
    /// Reads and parses a JSON config file.
    pub fn load(path: &Path) -> CliResult<Self> {
        let text = fs::read_to_string(path).map_err(|source| CliError::Read { path: path.to_path_buf(), source })?;
        serde_json::from_str(&text).map_err(|source| CliError::ConfigJson { path: path.to_path_buf(), source })
    }
}

/// Solver knobs of a config file.
#[derive(Clone, Debug, Default, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SolverSettings {
    pub ubc: Option<UbcMode>,
    pub rho: Option<f64>,
    pub sweep_cap: Option<usize>,
    pub stop_tol: Option<f64>,
    pub kernel_tol: Option<f64>,
    pub eig_order: Option<EigenOrdering>,
}

/// Where the input matrix comes from.
#[derive(Clone, Debug, PartialEq, Deserialize, Serialize)]
#[serde(tag = "kind", rename_all = "lowercase", deny_unknown_fields)]
pub enum MatrixSource {
    /// A matrix file: first line `n`, then `n` rows of `n` numbers.
    File { path: PathBuf },
    /// Entries uniform on `[−scale, scale]`, mirrored across the diagonal.
    Random {
        #[serde(default, skip_serializing_if = "Option::is_none")]
        n: Option<usize>,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        seed: Option<u64>,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        scale: Option<f64>,
    },
    /// Positive definite `QᵀDQ` with `D` log-uniform on `[1e−3, 1]`.
    Spd {
        #[serde(default, skip_serializing_if = "Option::is_none")]
        n: Option<usize>,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        seed: Option<u64>,
    },
    /// A deterministic named matrix.
    Named {
        name: NamedMatrix,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        n: Option<usize>,
    },
}

impl MatrixSource {
    fn order(&self) -> Option<usize> {
        match self {
            MatrixSource::File { .. } => None,
            MatrixSource::Random { n, .. } | MatrixSource::Spd { n, .. } | MatrixSource::Named { n, .. } => *n,
        }
    }

    fn seed(&self) -> Option<u64> {
        match self {
            MatrixSource::Random { seed, .. } | MatrixSource::Spd { seed, .. } => *seed,
            _ => None,
        }
    }

    fn is_random(&self) -> bool {
        matches!(self, MatrixSource::Random { .. } | MatrixSource::Spd { .. })
    }
}

/// Deterministic test matrices.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Deserialize, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum NamedMatrix {
    /// The identity.
    Identity,
    /// `diag(n, n−1, …, 1)`.
    Diagonal,
    /// The tridiagonal `tridiag(−1, 2, −1)`.
    Laplacian,
}

impl FromStr for NamedMatrix {
    type Err = CliError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "identity" => Ok(NamedMatrix::Identity),
            "diagonal" => Ok(NamedMatrix::Diagonal),
            "laplacian" => Ok(NamedMatrix::Laplacian),
            other => Err(CliError::Parse(format!("unknown named matrix {other:?} (identity, diagonal, laplacian)"))),
        }
    }
}

/// A matrix source with every parameter filled in.
#[derive(Clone, Debug, PartialEq, Serialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum ResolvedMatrix {
    File { path: PathBuf, n: usize },
    Random { n: usize, seed: u64, scale: f64 },
    Spd { n: usize, seed: u64 },
    Named { name: NamedMatrix, n: usize },
}

impl ResolvedMatrix {
    /// Order of the matrix.
    pub fn n(&self) -> usize {
        match self {
            ResolvedMatrix::File { n, .. }
            | ResolvedMatrix::Random { n, .. }
            | ResolvedMatrix::Spd { n, .. }
            | ResolvedMatrix::Named { n, .. } => *n,
        }
    }

    /// The seed of a random source.
    pub fn seed(&self) -> Option<u64> {
        match self {
            ResolvedMatrix::Random { seed, .. } | ResolvedMatrix::Spd { seed, .. } => Some(*seed),
            _ => None,
        }
    }

    /// The source used by repetition `rep`: random sources advance the seed.
    pub fn for_repetition(&self, rep: usize) -> ResolvedMatrix {
        let mut out = self.clone();
        match &mut out {
            ResolvedMatrix::Random { seed, .. } | ResolvedMatrix::Spd { seed, .. } => {
                *seed = seed.wrapping_add(rep as u64);
            }
            _ => {}
        }
        out
    }

    /// Builds (or reads) the matrix.
    pub fn build(&self) -> CliResult<SymmetricMatrix> {
        Ok(match self {
            ResolvedMatrix::File { path, .. } => read_matrix_file(path)?,
            ResolvedMatrix::Random { n, seed, scale } => {
                let a = random_symmetric(*n, &mut ChaCha8Rng::seed_from_u64(*seed));
                SymmetricMatrix::from_lower_fn(*n, |i, j| scale * a.get(i, j))
            }
            ResolvedMatrix::Spd { n, seed } => random_spd(*n, &mut ChaCha8Rng::seed_from_u64(*seed)),
            ResolvedMatrix::Named { name, n } => match name {
                NamedMatrix::Identity => SymmetricMatrix::identity(*n),
                NamedMatrix::Diagonal => {
                    let d: Vec<f64> = (0..*n).map(|t| (*n - t) as f64).collect();
                    SymmetricMatrix::from_diagonal(&d)
                }
                NamedMatrix::Laplacian => SymmetricMatrix::from_lower_fn(*n, |i, j| match i - j {
                    0 => 2.0,
                    1 => -1.0,
                    _ => 0.0,
                }),
            },
        })
    }
}

/// Parses a matrix file: the first line holds `n`, followed by `n` lines of
/// `n` whitespace-separated numbers. Symmetry is checked to [`SYMMETRY_TOL`].
pub fn parse_matrix(text: &str) -> CliResult<SymmetricMatrix> {
    let mut lines = text.lines().map(str::trim).filter(|l| !l.is_empty());
    let header = lines.next().ok_or_else(|| CliError::Parse("matrix file is empty".into()))?;
    let n: usize = header.parse().map_err(|_| CliError::Parse(format!("first line {header:?} is not an order n")))?;
    if n == 0 {
        return Err(CliError::Parse("matrix order must be positive".into()));
    }
    let mut rows = Vec::with_capacity(n);
    for r in 0..n {
        let line = lines.next().ok_or_else(|| CliError::Parse(format!("expected {n} rows, found {r}")))?;
        let row = line
            .split_whitespace()
            .map(|x| x.parse::<f64>().map_err(|_| CliError::Parse(format!("row {}: {x:?} is not a number", r + 1))))
            .collect::<CliResult<Vec<f64>>>()?;
        if row.len() != n {
            return Err(CliError::Parse(format!("row {} has {} entries, expected {n}", r + 1, row.len())));
        }
        if let Some(x) = row.iter().find(|x| !x.is_finite()) {
            return Err(CliError::Parse(format!("row {}: entry {x} is not finite", r + 1)));
        }
        rows.push(row);
    }
    if lines.next().is_some() {
        return Err(CliError::Parse(format!("more than {n} rows")));
    }
    let dense = Matrix::from_rows(&rows).map_err(|e| CliError::Parse(e.to_string()))?;
    SymmetricMatrix::from_dense(&dense, SYMMETRY_TOL).map_err(|e| CliError::Parse(e.to_string()))
}

/// Reads a matrix file, see [`parse_matrix`].
pub fn read_matrix_file(path: &Path) -> CliResult<SymmetricMatrix> {
    let text = fs::read_to_string(path).map_err(|source| CliError::Read { path: path.to_path_buf(), source })?;
    parse_matrix(&text).map_err(|e| match e {
        CliError::Parse(msg) => CliError::Parse(format!("{}: {msg}", path.display())),
        other => other,
    })
}

/// Peeks at the order written on the first line of a matrix file.
fn matrix_file_order(path: &Path) -> CliResult<usize> {
    Ok(read_matrix_file(path)?.n())
}

/// A strategy spec in the harness mini-language.
///
/// * `class:<kind> [m=<blocks>] [seed=<u64>] [shifts=<d>]` samples a member
///   of a strategy class, for example `class:B_c m=4 seed=7`;
/// * `pairs:(1,2),(1,3),…` lists the pivot pairs explicitly;
/// * `row` and `column` name the row- and column-cyclic orderings.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum StrategySpec {
    Class { kind: ClassKind, m: Option<usize>, seed: Option<u64>, shifts: Option<usize> },
    Pairs(PivotSequence),
    Row,
    Column,
}

impl FromStr for StrategySpec {
    type Err = CliError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let s = s.trim();
        if let Some(body) = s.strip_prefix("class:") {
            let mut words = body.split_whitespace();
            let kind_word = words.next().ok_or_else(|| CliError::Parse(format!("strategy {s:?} names no class")))?;
            let kind = ClassKind::from_str(kind_word).map_err(|e| CliError::Parse(format!("strategy {s:?}: {e}")))?;
            let (mut m, mut seed, mut shifts) = (None, None, None);
            for word in words {
                let (key, value) = word
                    .split_once('=')
                    .ok_or_else(|| CliError::Parse(format!("strategy {s:?}: expected key=value, got {word:?}")))?;
                let bad = || CliError::Parse(format!("strategy {s:?}: bad value for {key}: {value:?}"));
                match key {
                    "m" => m = Some(value.parse().map_err(|_| bad())?),
                    "seed" => seed = Some(value.parse().map_err(|_| bad())?),
                    "shifts" => shifts = Some(value.parse().map_err(|_| bad())?),
                    other => return Err(CliError::Parse(format!("strategy {s:?}: unknown key {other:?}"))),
                }
            }
            Ok(StrategySpec::Class { kind, m, seed, shifts })
        } else if s.starts_with("pairs:") {
            PivotSequence::from_str(s)
                .map(StrategySpec::Pairs)
                .map_err(|e| CliError::Parse(format!("strategy {s:?}: {e}")))
        } else {
            match s {
                "row" => Ok(StrategySpec::Row),
                "column" => Ok(StrategySpec::Column),
                _ => Err(CliError::Parse(format!(
                    "strategy {s:?} is neither \"class:<kind> m=<m> seed=<seed>\", \"pairs:(i,j),…\", \"row\" nor \"column\""
                ))),
            }
        }
    }
}

/// A strategy after sampling: the sequence and, for class specs, the witness
/// of its construction.
#[derive(Clone, Debug)]
pub struct ResolvedStrategy {
    pub spec: String,
    pub sequence: PivotSequence,
    pub witness: Option<ClassWitness>,
}

impl StrategySpec {
    /// Resolves the spec on `m` blocks (`None` lets a class spec or a pair
    /// list decide). Class specs without a seed fall back to `seed`.
    pub fn resolve(&self, text: &str, m: Option<usize>, seed: Option<u64>) -> CliResult<ResolvedStrategy> {
        let need_m = || m.ok_or_else(|| CliError::Config(format!("strategy {text:?} needs the number of blocks")));
        let (sequence, witness) = match self {
            StrategySpec::Class { kind, m: spec_m, seed: spec_seed, shifts } => {
                let blocks = match (spec_m, m) {
                    (Some(a), Some(b)) if *a != b => {
                        return Err(CliError::Config(format!("strategy has m={a} but the partition has {b} blocks")))
                    }
                    (Some(a), _) => *a,
                    (None, _) => need_m()?,
                };
                let seed = spec_seed.or(seed).ok_or_else(|| {
                    CliError::Config(format!("strategy {text:?} samples a class member and needs a seed"))
                })?;
                let opts = GenerateOptions { shifts: *shifts, ..GenerateOptions::default() };
                let member = generate_member(*kind, blocks, opts, &mut ChaCha8Rng::seed_from_u64(seed))
                    .map_err(|e| CliError::Config(format!("strategy {text:?}: {e}")))?;
                (member.sequence, Some(member.witness))
            }
            StrategySpec::Pairs(o) => {
                if let Some(m) = m {
                    if o.m() > m {
                        return Err(CliError::Config(format!(
                            "strategy uses block {} but the partition has {m}",
                            o.m()
                        )));
                    }
                    let padded =
                        PivotSequence::new(m, o.pairs().to_vec()).map_err(|e| CliError::Config(e.to_string()))?;
                    (padded, None)
                } else {
                    (o.clone(), None)
                }
            }
            StrategySpec::Row => (PivotSequence::row(need_m()?), None),
            StrategySpec::Column => (PivotSequence::column(need_m()?), None),
        };
        Ok(ResolvedStrategy { spec: text.to_string(), sequence, witness })
    }
}

/// The first block pair that a sequence never visits.
pub fn missing_pair(o: &PivotSequence) -> Option<(usize, usize)> {
    (2..=o.m()).flat_map(|j| (1..j).map(move |i| (i, j))).find(|p| !o.pairs().contains(p))
}

/// Flags that override the config file.
#[derive(Clone, Debug, Default)]
pub struct Overrides {
    pub seed: Option<u64>,
    pub out_dir: Option<PathBuf>,
    pub check_bounds: bool,
    pub ubc: Option<UbcMode>,
    pub rho: Option<f64>,
    pub matrix: Option<PathBuf>,
    pub generator: Option<String>,
    pub n: Option<usize>,
    pub partition: Option<String>,
    pub strategy: Option<String>,
    pub repetitions: Option<usize>,
    pub samples: Option<usize>,
    pub nu: Option<usize>,
    pub sweep_cap: Option<usize>,
}

/// Solver parameters as echoed into the summary.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ResolvedSolver {
    pub ubc: UbcMode,
    pub rho: f64,
    pub sweep_cap: usize,
    pub stop_tol: f64,
    pub kernel_tol: f64,
    pub eig_order: EigenOrdering,
}

/// The full configuration of one command after merging file and flags.
#[derive(Clone, Debug)]
pub struct Resolved {
    pub seed: Option<u64>,
    pub matrix: Option<ResolvedMatrix>,
    pub partition: Option<Partition>,
    pub strategy: Option<ResolvedStrategy>,
    pub solver: ResolvedSolver,
    pub out_dir: Option<PathBuf>,
    pub repetitions: usize,
    pub check_bounds: bool,
    pub samples: usize,
    pub nu: Option<usize>,
}

/// Default number of sampled operators.
pub const DEFAULT_SAMPLES: usize = 200;

/// Which default matrix source a command uses when none is configured.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum DefaultMatrix {
    Random,
    Spd,
    None,
}

impl Resolved {
    /// Merges `file` with the command-line `flags`.
    pub fn new(file: ExperimentConfig, flags: Overrides, default_matrix: DefaultMatrix) -> CliResult<Self> {
        let seed = flags.seed.or(file.seed);
        let partition = flags
            .partition
            .or(file.partition)
            .map(|s| Partition::from_str(&s).map_err(|e| CliError::Parse(format!("partition {s:?}: {e}"))))
            .transpose()?;

        let source = if let Some(path) = flags.matrix {
            Some(MatrixSource::File { path })
        } else if let Some(name) = flags.generator {
            Some(match name.as_str() {
                "random" => MatrixSource::Random { n: flags.n, seed: None, scale: None },
                "spd" => MatrixSource::Spd { n: flags.n, seed: None },
                other => MatrixSource::Named { name: NamedMatrix::from_str(other)?, n: flags.n },
            })
        } else {
            file.matrix.or(match default_matrix {
                DefaultMatrix::Random => Some(MatrixSource::Random { n: flags.n, seed: None, scale: None }),
                DefaultMatrix::Spd => Some(MatrixSource::Spd { n: flags.n, seed: None }),
                DefaultMatrix::None => None,
            })
        };
        let matrix = source.map(|s| resolve_matrix(s, flags.seed, seed, partition.as_ref())).transpose()?;
        if let (Some(mat), Some(p)) = (&matrix, &partition) {
            if mat.n() != p.n() {
                return Err(CliError::Config(format!(
                    "matrix has order {} but partition {p} needs {}",
                    mat.n(),
                    p.n()
                )));
            }
        }

        let strategy = match flags.strategy.or(file.strategy) {
            Some(text) => {
                let spec = StrategySpec::from_str(&text)?;
                Some(spec.resolve(&text, partition.as_ref().map(Partition::m), seed)?)
            }
            None => None,
        };

        let defaults = SolverConfig::new(Partition::ones(2).expect("two blocks"), PivotSequence::row(2));
        let solver = ResolvedSolver {
            ubc: flags.ubc.or(file.solver.ubc).unwrap_or(defaults.ubc_mode),
            rho: flags.rho.or(file.solver.rho).unwrap_or(defaults.rho),
            sweep_cap: flags.sweep_cap.or(file.solver.sweep_cap).unwrap_or(defaults.sweep_cap),
            stop_tol: file.solver.stop_tol.unwrap_or(defaults.stop_tol),
            kernel_tol: file.solver.kernel_tol.unwrap_or(defaults.kernel_tol),
            eig_order: file.solver.eig_order.unwrap_or(defaults.eig_order),
        };
        if !(solver.rho > 0.0 && solver.rho <= 1.0) {
            return Err(CliError::Config(format!("rho must lie in (0, 1], got {}", solver.rho)));
        }

        Ok(Self {
            seed,
            matrix,
            partition,
            strategy,
            solver,
            out_dir: flags.out_dir.or(file.out_dir),
            repetitions: flags.repetitions.or(file.repetitions).unwrap_or(1).max(1),
            check_bounds: flags.check_bounds || file.check_bounds.unwrap_or(false),
            samples: flags.samples.or(file.samples).unwrap_or(DEFAULT_SAMPLES),
            nu: flags.nu.or(file.nu),
        })
    }

    /// The partition, which every solver command needs.
    pub fn require_partition(&self) -> CliResult<&Partition> {
        self.partition.as_ref().ok_or_else(|| CliError::Config("a partition (\"pi:n1,n2,…\") is required".into()))
    }

    /// The strategy, which every solver command needs.
    pub fn require_strategy(&self) -> CliResult<&ResolvedStrategy> {
        self.strategy.as_ref().ok_or_else(|| CliError::Config("a strategy spec is required".into()))
    }

    /// The matrix source.
    pub fn require_matrix(&self) -> CliResult<&ResolvedMatrix> {
        self.matrix.as_ref().ok_or_else(|| CliError::Config("a matrix source is required".into()))
    }

    /// The solver configuration for the resolved partition and strategy.
    pub fn solver_config(&self) -> CliResult<SolverConfig> {
        let mut cfg = SolverConfig::new(self.require_partition()?.clone(), self.require_strategy()?.sequence.clone());
        cfg.ubc_mode = self.solver.ubc;
        cfg.rho = self.solver.rho;
        cfg.sweep_cap = self.solver.sweep_cap;
        cfg.stop_tol = self.solver.stop_tol;
        cfg.kernel_tol = self.solver.kernel_tol;
        cfg.eig_order = self.solver.eig_order;
        cfg.validate().map_err(|e| match e {
            bjlab_core::BlockJacobiError::InvalidConfig(msg) if msg.contains("cover") => {
                CliError::NotPivotStrategy(msg)
            }
            other => CliError::Config(other.to_string()),
        })?;
        Ok(cfg)
    }

    /// The a-priori bound of the strategy on the partition, or the reason
    /// none is available.
    pub fn sequence_bound(&self) -> CliResult<Result<SequenceBound, String>> {
        let p = self.require_partition()?;
        let s = self.require_strategy()?;
        Ok(mu_for_sequence(&s.sequence, p, self.solver.rho, s.witness.as_ref()).map_err(|e| e.to_string()))
    }

    /// A JSON echo of the resolved configuration.
    pub fn to_json(&self, command: &str) -> serde_json::Value {
        serde_json::json!({
            "command": command,
            "seed": self.seed,
            "matrix": self.matrix,
            "partition": self.partition.as_ref().map(|p| p.to_string()),
            "strategy": self.strategy.as_ref().map(|s| serde_json::json!({
                "spec": s.spec,
                "sequence": s.sequence.to_string(),
                "witness": s.witness.as_ref().map(witness_json),
            })),
            "solver": self.solver,
            "repetitions": self.repetitions,
            "check_bounds": self.check_bounds,
            "samples": self.samples,
            "nu": self.nu,
        })
    }
}

/// JSON rendering of a class witness.
pub fn witness_json(w: &ClassWitness) -> serde_json::Value {
    serde_json::json!({
        "base_kind": format!("{:?}", w.base_kind),
        "quasi": w.quasi,
        "base": w.base.to_string(),
        "permutation": w.permutation.images(),
        "shape": format!("{:?}", w.shape),
        "shifts": w.shifts,
    })
}

fn resolve_matrix(
    source: MatrixSource,
    flag_seed: Option<u64>,
    seed: Option<u64>,
    partition: Option<&Partition>,
) -> CliResult<ResolvedMatrix> {
    let n = match (&source, source.order(), partition) {
        (MatrixSource::File { path }, _, _) => matrix_file_order(path)?,
        (_, Some(n), _) => n,
        (_, None, Some(p)) => p.n(),
        (_, None, None) => return Err(CliError::Config("the matrix order is unknown (give n or a partition)".into())),
    };
    // A command-line seed overrides the config file, including a seed given
    // inside the matrix source.
    let seed = flag_seed.or(source.seed()).or(seed);
    if source.is_random() && seed.is_none() {
        return Err(CliError::Config("random matrix sources need a seed (--seed or \"seed\" in the config)".into()));
    }
    Ok(match source {
        MatrixSource::File { path } => ResolvedMatrix::File { path, n },
        MatrixSource::Random { scale, .. } => {
            ResolvedMatrix::Random { n, seed: seed.expect("checked"), scale: scale.unwrap_or(1.0) }
        }
        MatrixSource::Spd { .. } => ResolvedMatrix::Spd { n, seed: seed.expect("checked") },
        MatrixSource::Named { name, .. } => ResolvedMatrix::Named { name, n },
    })
}
