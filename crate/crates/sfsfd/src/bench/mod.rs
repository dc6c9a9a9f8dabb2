//! Benchmark harness: the (method x d x n x seed) grid, aggregation,
//! and the measure-concentration diagnostic.

mod report;
mod store;

pub use report::{emit_report, format_significant, ReportFormat};
pub use store::RecordStore;

use std::collections::BTreeMap;
use std::time::Instant;

use serde::{Deserialize, Serialize};

use crate::baseline::{latin_hypercube_design, sobol_design_with, uniform_random_design};
use crate::baseline::sobol::SobolRandomization;
use crate::discrepancy::{
    centered_l2_discrepancy_with, mean_squared_distance_to_center, radii_to_center,
    DiscrepancyVariant,
};
use crate::error::{Error, Result};
use crate::optimizer::{run_sfsfd, ObjectiveSpec};
use crate::spectral::sample_design;
use crate::stream::{tags, StreamSeed};

/// The four compared generators, in report order.
#[derive(
    Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize,
)]
#[serde(rename_all = "lowercase")]
pub enum Method {
    Sfsfd,
    Lhs,
    Sobol,
    Uniform,
}

impl Method {
    pub const ALL: [Method; 4] = [Method::Sfsfd, Method::Lhs, Method::Sobol, Method::Uniform];

    fn stream_tag(self) -> u64 {
        match self {
            Method::Sfsfd => 1,
            Method::Lhs => 2,
            Method::Sobol => 3,
            Method::Uniform => 4,
        }
    }
}

impl std::fmt::Display for Method {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Method::Sfsfd => write!(f, "sfsfd"),
            Method::Lhs => write!(f, "lhs"),
            Method::Sobol => write!(f, "sobol"),
            Method::Uniform => write!(f, "uniform"),
        }
    }
}

impl std::str::FromStr for Method {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, Self::Err> {
        match s {
            "sfsfd" => Ok(Method::Sfsfd),
            "lhs" => Ok(Method::Lhs),
            "sobol" => Ok(Method::Sobol),
            "uniform" => Ok(Method::Uniform),
            other => Err(format!("unknown method {other:?}")),
        }
    }
}

/// One scored grid cell.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentRecord {
    pub method: Method,
    pub d: usize,
    pub n: usize,
    pub seed: u64,
    pub discrepancy: f64,
    pub wall_time_seconds: f64,
    /// Provenance options: discrepancy variant, sobol mode, optimizer
    /// budget, and (for the density method) whether the score is a
    /// realized design or the optimizer's own objective estimate.
    pub variant_flags: BTreeMap<String, String>,
}

/// A grid cell whose computation failed; recorded so a long run is never
/// aborted by one bad cell.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CellFailure {
    pub method: Method,
    pub d: usize,
    pub n: usize,
    pub seed: u64,
    pub variant_flags: BTreeMap<String, String>,
    pub error: String,
}

/// What the store holds per line: a scored record or a failure marker.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum StoredRecord {
    Failed(CellFailure),
    Ok(ExperimentRecord),
}

impl StoredRecord {
    pub fn key(&self) -> RecordKey {
        match self {
            StoredRecord::Ok(r) => RecordKey::new(r.method, r.d, r.n, r.seed, &r.variant_flags),
            StoredRecord::Failed(f) => {
                RecordKey::new(f.method, f.d, f.n, f.seed, &f.variant_flags)
            }
        }
    }
}

/// Unique identity of a record: `(method, d, n, seed, variant_flags)`.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord)]
pub struct RecordKey {
    pub method: Method,
    pub d: usize,
    pub n: usize,
    pub seed: u64,
    pub flags: String,
}

impl RecordKey {
    fn new(
        method: Method,
        d: usize,
        n: usize,
        seed: u64,
        flags: &BTreeMap<String, String>,
    ) -> Self {
        Self {
            method,
            d,
            n,
            seed,
            flags: serde_json::to_string(flags).expect("string map serializes"),
        }
    }
}

/// Mean and sample standard deviation of one (method, d, n) group.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AggregateCell {
    pub method: Method,
    pub d: usize,
    pub n: usize,
    pub mean_discrepancy: f64,
    pub std_discrepancy: f64,
    pub seed_count: usize,
}

/// Grid-level configuration shared by every cell.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GridConfig {
    /// Objective-evaluation budget for the density optimizer.
    pub budget: usize,
    /// Starting replicate count of the optimizer schedule.
    pub a_initial: usize,
    /// Iterations between replicate increments.
    pub a_growth_period: usize,
    /// Density cell count.
    pub m: usize,
    /// Discrepancy variant used for every score in the grid.
    pub variant: DiscrepancyVariant,
    /// Sobol randomization mode used for sobol cells.
    pub sobol_mode: SobolRandomization,
    /// Concurrent cell workers.
    pub workers: usize,
}

impl Default for GridConfig {
    fn default() -> Self {
        Self {
            budget: 200,
            a_initial: 20,
            a_growth_period: 10,
            m: 10,
            variant: DiscrepancyVariant::Classical,
            // The published comparison values for the sobol rows are
            // reproduced by the unscrambled sequence (origin included);
            // the mode is recorded on every record either way.
            sobol_mode: SobolRandomization::Unscrambled,
            workers: 1,
        }
    }
}

impl GridConfig {
    fn base_flags(&self) -> BTreeMap<String, String> {
        BTreeMap::from([("discrepancy".to_string(), self.variant.to_string())])
    }

    fn sobol_flags(&self) -> BTreeMap<String, String> {
        let mut flags = self.base_flags();
        flags.insert("sobol".into(), self.sobol_mode.to_string());
        flags
    }

    fn sfsfd_flags(&self, score: &str) -> BTreeMap<String, String> {
        let mut flags = self.base_flags();
        flags.insert("budget".into(), self.budget.to_string());
        flags.insert("a_initial".into(), self.a_initial.to_string());
        flags.insert("m".into(), self.m.to_string());
        flags.insert("score".into(), score.to_string());
        flags
    }

    /// Flags identifying the records a comparison table should include
    /// (for the density method: realized-design scores only).
    pub fn is_table_record(record: &ExperimentRecord) -> bool {
        record
            .variant_flags
            .get("score")
            .is_none_or(|s| s == "realized")
    }
}

/// One cell of work: every record key it is expected to produce.
#[derive(Debug, Clone)]
struct Cell {
    method: Method,
    d: usize,
    n: usize,
    seed: u64,
}

impl Cell {
    fn expected_flags(&self, config: &GridConfig) -> Vec<BTreeMap<String, String>> {
        match self.method {
            Method::Sfsfd => vec![
                config.sfsfd_flags("realized"),
                config.sfsfd_flags("objective"),
            ],
            Method::Sobol => vec![config.sobol_flags()],
            _ => vec![config.base_flags()],
        }
    }

    fn keys(&self, config: &GridConfig) -> Vec<RecordKey> {
        self.expected_flags(config)
            .iter()
            .map(|f| RecordKey::new(self.method, self.d, self.n, self.seed, f))
            .collect()
    }

    /// Computes all records of this cell. Deterministic per
    /// `(method, d, n, seed)` and the grid config.
    fn compute(&self, config: &GridConfig) -> Vec<StoredRecord> {
        let started = Instant::now();
        let outcome = self.compute_inner(config);
        let wall = started.elapsed().as_secs_f64();
        match outcome {
            Ok(scores) => scores
                .into_iter()
                .map(|(flags, discrepancy)| {
                    StoredRecord::Ok(ExperimentRecord {
                        method: self.method,
                        d: self.d,
                        n: self.n,
                        seed: self.seed,
                        discrepancy,
                        wall_time_seconds: wall,
                        variant_flags: flags,
                    })
                })
                .collect(),
            Err(err) => self
                .expected_flags(config)
                .into_iter()
                .map(|flags| {
                    StoredRecord::Failed(CellFailure {
                        method: self.method,
                        d: self.d,
                        n: self.n,
                        seed: self.seed,
                        variant_flags: flags,
                        error: err.to_string(),
                    })
                })
                .collect(),
        }
    }

    fn compute_inner(
        &self,
        config: &GridConfig,
    ) -> Result<Vec<(BTreeMap<String, String>, f64)>> {
        let cell_stream = StreamSeed::from_root(self.seed)
            .child(tags::CELL)
            .child(self.method.stream_tag())
            .child(self.d as u64)
            .child(self.n as u64);
        let score = |design: &crate::design::DesignMatrix| {
            centered_l2_discrepancy_with(design, config.variant).value()
        };
        match self.method {
            Method::Uniform => {
                let design = uniform_random_design(self.n, self.d, &mut cell_stream.rng())?;
                Ok(vec![(config.base_flags(), score(&design))])
            }
            Method::Lhs => {
                let design = latin_hypercube_design(self.n, self.d, &mut cell_stream.rng())?;
                Ok(vec![(config.base_flags(), score(&design))])
            }
            Method::Sobol => {
                let design =
                    sobol_design_with(self.n, self.d, cell_stream.as_u64(), config.sobol_mode)?;
                Ok(vec![(config.sobol_flags(), score(&design))])
            }
            Method::Sfsfd => {
                let spec = ObjectiveSpec {
                    n: self.n,
                    d: self.d,
                    m: config.m,
                    a_initial: config.a_initial,
                    a_growth_period: config.a_growth_period,
                    max_iterations: config.budget,
                    seed: cell_stream.as_u64(),
                    variant: config.variant,
                };
                let (pmf, trace) = run_sfsfd(&spec)?;
                let mut rng = cell_stream.child(tags::REALIZE).rng();
                let realized = sample_design(&pmf, self.n, self.d, &mut rng)?;
                Ok(vec![
                    (config.sfsfd_flags("realized"), score(&realized)),
                    (config.sfsfd_flags("objective"), trace.rescored_objective),
                ])
            }
        }
    }
}

/// Runs the grid, skipping already-persisted records, and returns the
/// complete record set (old plus new).
///
/// Cells execute on up to `config.workers` threads; completed records
/// are appended to the store in grid enumeration order regardless of
/// completion order, so the store bytes do not depend on the worker
/// count. Individual cell failures become failure records and do not
/// abort the run.
pub fn run_grid(
    methods: &[Method],
    dims: &[usize],
    sizes: &[usize],
    seeds: &[u64],
    config: &GridConfig,
    store: &mut RecordStore,
) -> Result<Vec<StoredRecord>> {
    if methods.is_empty() || dims.is_empty() || sizes.is_empty() || seeds.is_empty() {
        return Err(Error::InvalidSpec("empty grid axis".into()));
    }
    let mut pending = Vec::new();
    for &method in methods {
        for &d in dims {
            for &n in sizes {
                for &seed in seeds {
                    let cell = Cell { method, d, n, seed };
                    if cell.keys(config).iter().any(|k| !store.contains(k)) {
                        pending.push(cell);
                    }
                }
            }
        }
    }

    if !pending.is_empty() {
        let workers = config.workers.clamp(1, pending.len());
        let next = std::sync::atomic::AtomicUsize::new(0);
        let (sender, receiver) = std::sync::mpsc::channel::<(usize, Vec<StoredRecord>)>();
        std::thread::scope(|scope| {
            for _ in 0..workers {
                let sender = sender.clone();
                let pending = &pending;
                let next = &next;
                scope.spawn(move || loop {
                    let idx = next.fetch_add(1, std::sync::atomic::Ordering::Relaxed);
                    if idx >= pending.len() {
                        break;
                    }
                    let records = pending[idx].compute(config);
                    if sender.send((idx, records)).is_err() {
                        break;
                    }
                });
            }
            drop(sender);

            // Flush results in cell order so the store is append-ordered
            // deterministically even with out-of-order completion.
            let mut buffered: BTreeMap<usize, Vec<StoredRecord>> = BTreeMap::new();
            let mut next_flush = 0usize;
            for (idx, records) in receiver {
                buffered.insert(idx, records);
                while let Some(records) = buffered.remove(&next_flush) {
                    for record in records {
                        if !store.contains(&record.key()) {
                            store.append(&record)?;
                        }
                    }
                    next_flush += 1;
                }
            }
            debug_assert!(buffered.is_empty());
            Ok::<(), Error>(())
        })?;
    }

    Ok(store.records().to_vec())
}

/// Groups successful records by `(method, d, n)` and reduces each group
/// to mean and sample standard deviation. Records in one group must
/// carry identical variant flags; mixed provenance is an error because
/// the resulting cell would silently average incomparable numbers.
pub fn aggregate(records: &[ExperimentRecord]) -> Result<Vec<AggregateCell>> {
    let mut groups: BTreeMap<(Method, usize, usize), Vec<&ExperimentRecord>> = BTreeMap::new();
    for record in records {
        groups
            .entry((record.method, record.d, record.n))
            .or_default()
            .push(record);
    }
    let mut cells = Vec::with_capacity(groups.len());
    for ((method, d, n), group) in groups {
        let first_flags = &group[0].variant_flags;
        if let Some(conflict) = group.iter().find(|r| &r.variant_flags != first_flags) {
            return Err(Error::InconsistentFlags {
                method: method.to_string(),
                d,
                n,
                details: format!(
                    "{:?} vs {:?}",
                    first_flags, conflict.variant_flags
                ),
            });
        }
        let count = group.len();
        let mean = group.iter().map(|r| r.discrepancy).sum::<f64>() / count as f64;
        let std = if count > 1 {
            let ss: f64 = group
                .iter()
                .map(|r| (r.discrepancy - mean) * (r.discrepancy - mean))
                .sum();
            (ss / (count - 1) as f64).sqrt()
        } else {
            0.0
        };
        cells.push(AggregateCell {
            method,
            d,
            n,
            mean_discrepancy: mean,
            std_discrepancy: std,
            seed_count: count,
        });
    }
    Ok(cells)
}

/// Concentration diagnostics of uniform sampling at one dimension.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ConcentrationStat {
    pub d: usize,
    /// Mean of `||x - 1/2||^2`; approaches d/12.
    pub mean_radius_sq: f64,
    /// std(radius) / mean(radius); shrinks as d grows. 0 for a single
    /// pooled point (degenerate case).
    pub relative_std_radius: f64,
}

/// Measures how uniform-random designs concentrate on a shell as the
/// dimension grows: per dimension, the mean squared distance to the cube
/// center and the relative spread of the radius, pooled over all points
/// of all seeds.
pub fn concentration_sweep(dims: &[usize], n: usize, seeds: &[u64]) -> Result<Vec<ConcentrationStat>> {
    if dims.is_empty() {
        return Err(Error::InvalidSpec("empty dimension axis".into()));
    }
    if n == 0 || seeds.is_empty() {
        return Err(Error::InvalidSpec("need at least one point and seed".into()));
    }
    let mut stats = Vec::with_capacity(dims.len());
    for &d in dims {
        let mut radii = Vec::with_capacity(n * seeds.len());
        let mut mean_sq_acc = 0.0;
        for &seed in seeds {
            let mut rng = StreamSeed::from_root(seed)
                .child(tags::CELL)
                .child(Method::Uniform.stream_tag())
                .child(d as u64)
                .child(n as u64)
                .rng();
            let design = uniform_random_design(n, d, &mut rng)?;
            mean_sq_acc += mean_squared_distance_to_center(&design);
            radii.extend(radii_to_center(&design));
        }
        let mean_radius_sq = mean_sq_acc / seeds.len() as f64;
        let count = radii.len();
        let mean_radius = radii.iter().sum::<f64>() / count as f64;
        let relative_std_radius = if count > 1 && mean_radius > 0.0 {
            let ss: f64 = radii.iter().map(|r| (r - mean_radius) * (r - mean_radius)).sum();
            (ss / (count - 1) as f64).sqrt() / mean_radius
        } else {
            0.0
        };
        stats.push(ConcentrationStat {
            d,
            mean_radius_sq,
            relative_std_radius,
        });
    }
    Ok(stats)
}
