//! File-driven exploration workflow.
//!
//! A run configuration names a bundled scenario, a metric, the actor pair to
//! score, fixed-parameter overrides, and the optimization budget. From that
//! this module wires scenario instantiation, simulation, and metric
//! evaluation into the optimizer's objective, persists one record per
//! simulated cell as line-delimited JSON (crash-robust, append-only), and
//! writes a deterministic `report.json`. The exhaustive strided oracle, the
//! single-cell replay, and the heatmap pivot share the same record schema.

use std::cell::RefCell;
use std::collections::BTreeMap;
use std::fs;
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};
use std::time::Instant;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::bo::{self, BoConfig, ObjectiveValue};
use crate::error::{Error, Result};
use crate::metrics::{self, MetricKind, MetricResult};
use crate::scenario::{load_scenario_library, LogicalScenario, ParameterGrid, ScenarioId};
use crate::sim::{simulate, SimConfig, SimulationTrace, Termination};

pub const RUN_SCHEMA_VERSION: u32 = 1;

/// Environment variable overriding the output directory of any run.
pub const OUTPUT_DIR_ENV: &str = "SCENARIO_EXPLORER_OUT";

pub const RECORDS_FILE: &str = "records.jsonl";
pub const ORACLE_RECORDS_FILE: &str = "oracle_records.jsonl";
pub const REPORT_FILE: &str = "report.json";
pub const TRACE_FILE: &str = "trace.csv";
pub const METRICS_FILE: &str = "metrics.json";

fn default_schema_version() -> u32 {
    RUN_SCHEMA_VERSION
}
fn default_budget() -> usize {
    430
}
fn default_init_count() -> usize {
    8
}

/// Surrogate knobs exposed in the run file.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct BoSection {
    pub feature_count: usize,
    pub retune_every: usize,
    pub initial_length_scale: f64,
    pub initial_noise: f64,
}

impl Default for BoSection {
    fn default() -> Self {
        BoSection {
            feature_count: 1000,
            retune_every: 10,
            initial_length_scale: 0.2,
            initial_noise: 1e-2,
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct PairSection {
    a: String,
    b: String,
}

/// On-disk run configuration (TOML).
#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
struct RunConfigFile {
    #[serde(default = "default_schema_version")]
    schema_version: u32,
    scenario: String,
    metric: String,
    #[serde(default)]
    seed: u64,
    #[serde(default = "default_budget")]
    budget: usize,
    #[serde(default = "default_init_count")]
    init_count: usize,
    #[serde(default)]
    dt: Option<f64>,
    #[serde(default)]
    horizon: Option<f64>,
    #[serde(default)]
    output_dir: Option<PathBuf>,
    #[serde(default)]
    pair: Option<PairSection>,
    #[serde(default)]
    overrides: BTreeMap<String, f64>,
    #[serde(default)]
    idm: Option<crate::sim::IdmParams>,
    #[serde(default)]
    bo: Option<BoSection>,
}

/// One fixed dimension: the requested value snapped onto the lattice.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct OverrideBinding {
    /// Position of the dimension in the scenario grid.
    pub dim: usize,
    /// Lattice index the override resolves to.
    pub k: usize,
    pub requested: f64,
    pub effective: f64,
}

/// Fully resolved run configuration.
#[derive(Debug, Clone)]
pub struct RunConfig {
    pub scenario: LogicalScenario,
    pub metric: MetricKind,
    pub pair: (String, String),
    pub overrides: Vec<OverrideBinding>,
    pub budget: usize,
    pub init_count: usize,
    pub seed: u64,
    pub sim: SimConfig,
    pub bo: BoSection,
    pub output_dir: PathBuf,
}

impl RunConfig {
    /// Positions of the dimensions still open for search, in grid order.
    pub fn free_dims(&self) -> Vec<usize> {
        (0..self.scenario.grid.num_dims())
            .filter(|d| !self.overrides.iter().any(|o| o.dim == *d))
            .collect()
    }

    /// Grid over the free dimensions only, or `None` when everything is
    /// overridden.
    pub fn search_grid(&self) -> Option<ParameterGrid> {
        let free = self.free_dims();
        if free.is_empty() {
            return None;
        }
        let dims = free
            .iter()
            .map(|&d| self.scenario.grid.dims()[d].clone())
            .collect();
        Some(ParameterGrid::new(dims).expect("free dims form a valid grid"))
    }

    /// Expand a search-grid index into a full scenario-grid index.
    pub fn full_index(&self, sub: &[usize]) -> Vec<usize> {
        let free = self.free_dims();
        debug_assert_eq!(sub.len(), free.len());
        let mut full = vec![0usize; self.scenario.grid.num_dims()];
        for o in &self.overrides {
            full[o.dim] = o.k;
        }
        for (&pos, &k) in free.iter().zip(sub) {
            full[pos] = k;
        }
        full
    }

    /// Simulate one full-grid cell and score the configured metric.
    pub fn evaluate_cell(&self, full_index: &[usize]) -> Result<(MetricResult, SimulationTrace)> {
        let concrete = self.scenario.instantiate(full_index)?;
        let trace = simulate(&concrete, &self.sim)?;
        let result =
            metrics::evaluate(self.metric, &trace, &concrete, (&self.pair.0, &self.pair.1))?;
        Ok((result, trace))
    }
}

/// Parse and validate a run configuration file. Defaults are applied here so
/// the report echo always shows effective values.
pub fn parse_config(path: &Path) -> Result<RunConfig> {
    let text = fs::read_to_string(path)
        .map_err(|e| Error::Config(format!("cannot read {}: {e}", path.display())))?;
    let file: RunConfigFile =
        toml::from_str(&text).map_err(|e| Error::Config(format!("{}: {e}", path.display())))?;
    if file.schema_version != RUN_SCHEMA_VERSION {
        return Err(Error::Config(format!(
            "unsupported schema_version {} (expected {})",
            file.schema_version, RUN_SCHEMA_VERSION
        )));
    }
    let id: ScenarioId = file.scenario.parse()?;
    let scenario = load_scenario_library(id)?;
    let metric: MetricKind = file.metric.parse()?;
    let pair = match &file.pair {
        Some(p) => (p.a.clone(), p.b.clone()),
        None => ("ego".to_string(), "pedestrian".to_string()),
    };
    scenario.actor(&pair.0)?;
    scenario.actor(&pair.1)?;
    if pair.0 == pair.1 {
        return Err(Error::Config("pair must name two distinct actors".into()));
    }
    if file.init_count < 1 || file.budget < file.init_count {
        return Err(Error::Config("budget >= init_count >= 1 must hold".into()));
    }

    let mut overrides = Vec::new();
    for (name, value) in &file.overrides {
        let dim = scenario
            .grid
            .dim_position(name)
            .ok_or_else(|| Error::UnknownDim(name.clone()))?;
        let k = scenario.grid.dims()[dim].quantize(*value)?;
        overrides.push(OverrideBinding {
            dim,
            k,
            requested: *value,
            effective: scenario.grid.dims()[dim].value(k),
        });
    }
    overrides.sort_by_key(|o| o.dim);

    let mut sim = SimConfig::default();
    if let Some(idm) = file.idm {
        sim.idm = idm;
    }
    if let Some(dt) = file.dt {
        sim.dt = dt;
    }
    if let Some(horizon) = file.horizon {
        sim.horizon = horizon;
    }
    sim.validate()?;

    let output_dir = std::env::var_os(OUTPUT_DIR_ENV)
        .map(PathBuf::from)
        .or(file.output_dir)
        .unwrap_or_else(|| PathBuf::from(format!("runs/{}-{}-seed{}", id, metric, file.seed)));

    Ok(RunConfig {
        scenario,
        metric,
        pair,
        overrides,
        budget: file.budget,
        init_count: file.init_count,
        seed: file.seed,
        sim,
        bo: file.bo.unwrap_or_default(),
        output_dir,
    })
}

// ---------------------------------------------------------------------------
// Records
// ---------------------------------------------------------------------------

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DimMeta {
    pub name: String,
    pub min: f64,
    pub max: f64,
    pub samples: usize,
    /// Set when the dimension was fixed by an override.
    pub fixed: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RecordsMeta {
    pub schema_version: u32,
    pub mode: String,
    pub scenario: String,
    pub metric: MetricKind,
    pub pair: (String, String),
    pub seed: u64,
    pub budget: usize,
    pub init_count: usize,
    pub dt: f64,
    pub horizon: f64,
    pub dims: Vec<DimMeta>,
    pub strides: Option<Vec<usize>>,
}

/// One simulated cell: full-grid index, physical values, metric value.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RecordEntry {
    pub iteration: usize,
    pub index: Vec<usize>,
    pub values: Vec<f64>,
    pub value: f64,
    pub capped: bool,
    pub wall_ms: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case")]
pub enum RecordsLine {
    Meta(RecordsMeta),
    Record(RecordEntry),
}

fn dim_metas(cfg: &RunConfig) -> Vec<DimMeta> {
    cfg.scenario
        .grid
        .dims()
        .iter()
        .enumerate()
        .map(|(i, d)| DimMeta {
            name: d.name.clone(),
            min: d.min,
            max: d.max,
            samples: d.samples,
            fixed: cfg
                .overrides
                .iter()
                .find(|o| o.dim == i)
                .map(|o| o.effective),
        })
        .collect()
}

fn records_meta(cfg: &RunConfig, mode: &str, strides: Option<Vec<usize>>) -> RecordsMeta {
    RecordsMeta {
        schema_version: RUN_SCHEMA_VERSION,
        mode: mode.to_string(),
        scenario: cfg.scenario.id.to_string(),
        metric: cfg.metric,
        pair: cfg.pair.clone(),
        seed: cfg.seed,
        budget: cfg.budget,
        init_count: cfg.init_count,
        dt: cfg.sim.dt,
        horizon: cfg.sim.horizon,
        dims: dim_metas(cfg),
        strides,
    }
}

fn write_line<W: Write>(w: &mut W, line: &RecordsLine) -> Result<()> {
    serde_json::to_writer(&mut *w, line).map_err(|e| Error::Records(e.to_string()))?;
    writeln!(w)?;
    Ok(())
}

/// Parse a records file back into its meta line and entries.
pub fn read_records(path: &Path) -> Result<(RecordsMeta, Vec<RecordEntry>)> {
    let text = fs::read_to_string(path)
        .map_err(|e| Error::Config(format!("cannot read {}: {e}", path.display())))?;
    let mut meta = None;
    let mut records = Vec::new();
    for (lineno, line) in text.lines().enumerate() {
        if line.trim().is_empty() {
            continue;
        }
        let parsed: RecordsLine = serde_json::from_str(line)
            .map_err(|e| Error::Records(format!("line {}: {e}", lineno + 1)))?;
        match parsed {
            RecordsLine::Meta(m) => meta = Some(m),
            RecordsLine::Record(r) => records.push(r),
        }
    }
    let meta = meta.ok_or_else(|| Error::Records("missing meta line".into()))?;
    Ok((meta, records))
}

// ---------------------------------------------------------------------------
// Explore
// ---------------------------------------------------------------------------

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct HistoryEntry {
    pub iteration: usize,
    pub index: Vec<usize>,
    pub values: Vec<f64>,
    pub value: f64,
    pub capped: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Totals {
    pub evaluations: usize,
    pub capped_count: usize,
    pub best_value: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct ConfigEcho {
    pub scenario: String,
    pub metric: MetricKind,
    pub pair: (String, String),
    pub seed: u64,
    pub budget: usize,
    pub init_count: usize,
    pub sim: SimConfig,
    pub bo: BoSection,
    pub dims: Vec<DimMeta>,
    pub overrides: Vec<OverrideEcho>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct OverrideEcho {
    pub dim: String,
    pub requested: f64,
    pub effective: f64,
    pub k: usize,
}

/// Outcome of one exploration run. The serialized form (`report.json`) is
/// byte-identical across runs with the same seed; per-iteration wall times
/// live only in the records file and in this in-memory struct.
#[derive(Debug, Clone, Serialize)]
pub struct ExplorationReport {
    pub schema_version: u32,
    pub config: ConfigEcho,
    pub history: Vec<HistoryEntry>,
    pub incumbent: HistoryEntry,
    pub totals: Totals,
    #[serde(skip)]
    pub wall_ms: Vec<f64>,
}

fn config_echo(cfg: &RunConfig) -> ConfigEcho {
    ConfigEcho {
        scenario: cfg.scenario.id.to_string(),
        metric: cfg.metric,
        pair: cfg.pair.clone(),
        seed: cfg.seed,
        budget: cfg.budget,
        init_count: cfg.init_count,
        sim: cfg.sim,
        bo: cfg.bo,
        dims: dim_metas(cfg),
        overrides: cfg
            .overrides
            .iter()
            .map(|o| OverrideEcho {
                dim: cfg.scenario.grid.dims()[o.dim].name.clone(),
                requested: o.requested,
                effective: o.effective,
                k: o.k,
            })
            .collect(),
    }
}

fn incumbent_of(history: &[HistoryEntry]) -> HistoryEntry {
    history
        .iter()
        .min_by(|a, b| {
            a.value
                .total_cmp(&b.value)
                .then(a.iteration.cmp(&b.iteration))
        })
        .expect("non-empty history")
        .clone()
}

/// Run the optimization workflow: pick a start set, simulate, evaluate,
/// choose the next candidate from the surrogate, and repeat until the budget
/// is spent. Records stream to `records.jsonl` as they happen; the report is
/// written last.
pub fn explore(cfg: &RunConfig) -> Result<ExplorationReport> {
    let grid = cfg
        .search_grid()
        .ok_or_else(|| Error::Config("every dimension is overridden; nothing to explore".into()))?;
    fs::create_dir_all(&cfg.output_dir)?;
    let records_path = cfg.output_dir.join(RECORDS_FILE);
    let file = fs::File::create(&records_path)?;
    let writer = RefCell::new(BufWriter::new(file));
    write_line(
        &mut *writer.borrow_mut(),
        &RecordsLine::Meta(records_meta(cfg, "explore", None)),
    )?;

    let history = RefCell::new(Vec::<HistoryEntry>::new());
    let walls = RefCell::new(Vec::<f64>::new());
    let objective = |sub: &[usize]| -> Result<ObjectiveValue> {
        let full = cfg.full_index(sub);
        let started = Instant::now();
        let outcome = cfg.evaluate_cell(&full);
        let wall_ms = started.elapsed().as_secs_f64() * 1e3;
        let (value, capped) = match outcome {
            Ok((result, _)) => (result.value, result.capped),
            // a failing cell participates as a capped sentinel
            Err(_) => (cfg.metric.cap(), true),
        };
        let iteration = history.borrow().len();
        let values = cfg.scenario.grid.values(&full)?;
        let entry = HistoryEntry {
            iteration,
            index: full,
            values,
            value,
            capped,
        };
        {
            let mut w = writer.borrow_mut();
            write_line(
                &mut *w,
                &RecordsLine::Record(RecordEntry {
                    iteration: entry.iteration,
                    index: entry.index.clone(),
                    values: entry.values.clone(),
                    value: entry.value,
                    capped: entry.capped,
                    wall_ms,
                }),
            )?;
            w.flush()?;
        }
        history.borrow_mut().push(entry);
        walls.borrow_mut().push(wall_ms);
        Ok(ObjectiveValue { value, capped })
    };

    let bo_cfg = BoConfig {
        budget: cfg.budget,
        init_count: cfg.init_count,
        seed: cfg.seed,
        feature_count: cfg.bo.feature_count,
        initial_length_scale: cfg.bo.initial_length_scale,
        initial_noise: cfg.bo.initial_noise,
        retune_every: cfg.bo.retune_every,
        failure_value: cfg.metric.cap(),
    };
    // a surrogate failure aborts the run; everything simulated so far has
    // already been flushed to the records file
    bo::run(objective, &grid, &bo_cfg)?;

    let history = history.into_inner();
    let report = ExplorationReport {
        schema_version: RUN_SCHEMA_VERSION,
        config: config_echo(cfg),
        incumbent: incumbent_of(&history),
        totals: Totals {
            evaluations: history.len(),
            capped_count: history.iter().filter(|h| h.capped).count(),
            best_value: incumbent_of(&history).value,
        },
        history,
        wall_ms: walls.into_inner(),
    };
    let json = serde_json::to_string_pretty(&report).map_err(|e| Error::Records(e.to_string()))?;
    fs::write(cfg.output_dir.join(REPORT_FILE), json + "\n")?;
    Ok(report)
}

// ---------------------------------------------------------------------------
// Oracle
// ---------------------------------------------------------------------------

/// Exhaustive sweep over a strided sub-lattice. `strides` has one entry per
/// scenario-grid dimension (entries for overridden dimensions are ignored).
/// Cells run in parallel; records are merged in lattice order.
pub fn grid_oracle(cfg: &RunConfig, strides: &[usize]) -> Result<Vec<RecordEntry>> {
    let dims = cfg.scenario.grid.dims();
    if strides.len() != dims.len() {
        return Err(Error::Config(format!(
            "expected {} strides (one per dimension), got {}",
            dims.len(),
            strides.len()
        )));
    }
    if strides.iter().any(|&s| s == 0) {
        return Err(Error::Config("strides must be at least 1".into()));
    }
    let free = cfg.free_dims();
    // strided index lists per free dimension
    let axes: Vec<Vec<usize>> = free
        .iter()
        .map(|&d| (0..dims[d].samples).step_by(strides[d]).collect())
        .collect();
    // row-major enumeration of the strided lattice, first free dim slowest
    let total: usize = axes.iter().map(|a| a.len()).product();
    let cells: Vec<Vec<usize>> = (0..total)
        .map(|ordinal| {
            let mut rest = ordinal;
            let mut sub = vec![0usize; axes.len()];
            for d in (0..axes.len()).rev() {
                let n = axes[d].len();
                sub[d] = axes[d][rest % n];
                rest /= n;
            }
            cfg.full_index(&sub)
        })
        .collect();

    let evaluated: Vec<(f64, bool, f64)> = cells
        .par_iter()
        .map(|full| {
            let started = Instant::now();
            let (value, capped) = match cfg.evaluate_cell(full) {
                Ok((r, _)) => (r.value, r.capped),
                Err(_) => (cfg.metric.cap(), true),
            };
            (value, capped, started.elapsed().as_secs_f64() * 1e3)
        })
        .collect();

    let records: Vec<RecordEntry> = cells
        .into_iter()
        .zip(evaluated)
        .enumerate()
        .map(|(i, (index, (value, capped, wall_ms)))| RecordEntry {
            iteration: i,
            values: cfg.scenario.grid.values(&index).expect("cell in range"),
            index,
            value,
            capped,
            wall_ms,
        })
        .collect();

    fs::create_dir_all(&cfg.output_dir)?;
    let path = cfg.output_dir.join(ORACLE_RECORDS_FILE);
    let mut w = BufWriter::new(fs::File::create(&path)?);
    write_line(
        &mut w,
        &RecordsLine::Meta(records_meta(cfg, "oracle", Some(strides.to_vec()))),
    )?;
    for r in &records {
        write_line(&mut w, &RecordsLine::Record(r.clone()))?;
    }
    w.flush()?;
    Ok(records)
}

// ---------------------------------------------------------------------------
// Replay
// ---------------------------------------------------------------------------

#[derive(Debug, Clone, Serialize)]
pub struct ReplaySummary {
    pub scenario: String,
    pub index: Vec<usize>,
    pub values: Vec<f64>,
    pub pair: (String, String),
    pub termination: String,
    pub metrics: BTreeMap<String, MetricResult>,
}

/// Simulate one cell given the values of the free dimensions (in grid
/// order), dump the trace CSV, and score all five metrics for the pair.
pub fn replay(cfg: &RunConfig, at: &[f64]) -> Result<ReplaySummary> {
    let free = cfg.free_dims();
    if at.len() != free.len() {
        let names: Vec<&str> = free
            .iter()
            .map(|&d| cfg.scenario.grid.dims()[d].name.as_str())
            .collect();
        return Err(Error::Config(format!(
            "--at needs {} value(s) for ({})",
            free.len(),
            names.join(", ")
        )));
    }
    let sub: Vec<usize> = at
        .iter()
        .zip(&free)
        .map(|(&v, &d)| cfg.scenario.grid.dims()[d].quantize(v))
        .collect::<Result<_>>()?;
    let full = cfg.full_index(&sub);
    let concrete = cfg.scenario.instantiate(&full)?;
    let trace = simulate(&concrete, &cfg.sim)?;

    fs::create_dir_all(&cfg.output_dir)?;
    let mut csv = BufWriter::new(fs::File::create(cfg.output_dir.join(TRACE_FILE))?);
    trace.write_csv(&mut csv)?;
    csv.flush()?;

    let mut results = BTreeMap::new();
    for kind in MetricKind::ALL {
        let r = metrics::evaluate(kind, &trace, &concrete, (&cfg.pair.0, &cfg.pair.1))?;
        results.insert(kind.to_string(), r);
    }
    let termination = match &trace.termination {
        Termination::Horizon => "horizon".to_string(),
        Termination::AllArrived => "all-arrived".to_string(),
        Termination::Collision { a, b, time } => format!("collision {a}-{b} at {time:.2} s"),
    };
    let summary = ReplaySummary {
        scenario: cfg.scenario.id.to_string(),
        values: cfg.scenario.grid.values(&full)?,
        index: full,
        pair: cfg.pair.clone(),
        termination,
        metrics: results,
    };
    let json = serde_json::to_string_pretty(&summary).map_err(|e| Error::Records(e.to_string()))?;
    fs::write(cfg.output_dir.join(METRICS_FILE), json + "\n")?;
    Ok(summary)
}

// ---------------------------------------------------------------------------
// Heatmap
// ---------------------------------------------------------------------------

/// Pivot a records file into a 2-D CSV matrix over two named dimensions,
/// min-reducing over everything else. Unevaluated cells stay empty.
pub fn export_heatmap(records_path: &Path, x_dim: &str, y_dim: &str) -> Result<String> {
    let (meta, records) = read_records(records_path)?;
    let pos = |name: &str| -> Result<usize> {
        meta.dims
            .iter()
            .position(|d| d.name == name)
            .ok_or_else(|| Error::UnknownDim(name.to_string()))
    };
    let (xi, yi) = (pos(x_dim)?, pos(y_dim)?);
    if xi == yi {
        return Err(Error::Config(
            "x and y must name different dimensions".into(),
        ));
    }
    let mut cells: BTreeMap<(usize, usize), f64> = BTreeMap::new();
    for r in &records {
        let key = (r.index[yi], r.index[xi]);
        let slot = cells.entry(key).or_insert(f64::INFINITY);
        *slot = slot.min(r.value);
    }
    let value_of = |dim: &DimMeta, k: usize| -> f64 {
        if dim.samples < 2 {
            dim.min
        } else {
            dim.min + k as f64 * (dim.max - dim.min) / (dim.samples - 1) as f64
        }
    };
    let (xd, yd) = (&meta.dims[xi], &meta.dims[yi]);
    let mut out = String::new();
    out.push_str(&format!("{}\\{}", yd.name, xd.name));
    for k in 0..xd.samples {
        out.push_str(&format!(",{:.6}", value_of(xd, k)));
    }
    out.push('\n');
    for ky in 0..yd.samples {
        out.push_str(&format!("{:.6}", value_of(yd, ky)));
        for kx in 0..xd.samples {
            out.push(',');
            if let Some(v) = cells.get(&(ky, kx)) {
                out.push_str(&format!("{v:.6}"));
            }
        }
        out.push('\n');
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn write_cfg(dir: &Path, text: &str) -> PathBuf {
        let p = dir.join("run.toml");
        fs::write(&p, text).unwrap();
        p
    }

    #[test]
    fn minimal_config_gets_defaults() {
        let tmp = tempfile::tempdir().unwrap();
        let p = write_cfg(tmp.path(), "scenario = \"A\"\nmetric = \"pet\"\nseed = 1\n");
        let cfg = parse_config(&p).unwrap();
        assert_eq!(cfg.budget, 430);
        assert_eq!(cfg.init_count, 8);
        assert_eq!(cfg.sim.dt, 0.05);
        assert_eq!(cfg.sim.horizon, 60.0);
        assert_eq!(cfg.pair, ("ego".to_string(), "pedestrian".to_string()));
        assert_eq!(cfg.free_dims().len(), 3);
        assert_eq!(cfg.search_grid().unwrap().cardinality(), 625_000);
    }

    #[test]
    fn overrides_shrink_the_search_grid() {
        let tmp = tempfile::tempdir().unwrap();
        // lattice value for k = 159 on ego_start_s and exactly 15.0 on car_speed
        let ego = 27.99 + 159.0 * 50.0 / 249.0;
        let p = write_cfg(
            tmp.path(),
            &format!(
                "scenario = \"A\"\nmetric = \"euclidean\"\nseed = 2\nbudget = 30\n\
                 [overrides]\nego_start_s = {ego}\ncar_speed = 15.0\n"
            ),
        );
        let cfg = parse_config(&p).unwrap();
        assert_eq!(cfg.free_dims(), vec![0]);
        let grid = cfg.search_grid().unwrap();
        assert_eq!(grid.cardinality(), 50);
        assert_eq!(cfg.overrides.len(), 2);
        let full = cfg.full_index(&[13]);
        assert_eq!(full, vec![13, 159, 7]);
    }

    #[test]
    fn budget_equal_to_init_count_runs_start_set_only() {
        let tmp = tempfile::tempdir().unwrap();
        let ego = 27.99 + 159.0 * 50.0 / 249.0;
        let p = write_cfg(
            tmp.path(),
            &format!(
                "scenario = \"A\"\nmetric = \"euclidean\"\nseed = 3\nbudget = 8\ninit_count = 8\n\
                 output_dir = \"{}\"\n[overrides]\nego_start_s = {ego}\ncar_speed = 15.0\n",
                tmp.path().join("out").display()
            ),
        );
        let report = explore(&parse_config(&p).unwrap()).unwrap();
        assert_eq!(report.totals.evaluations, 8);
        assert_eq!(report.history.len(), 8);
    }

    #[test]
    fn off_lattice_override_names_neighbors() {
        let tmp = tempfile::tempdir().unwrap();
        let p = write_cfg(
            tmp.path(),
            "scenario = \"A\"\nmetric = \"pet\"\n[overrides]\nego_start_s = 60.05\n",
        );
        let err = parse_config(&p).unwrap_err();
        let msg = err.to_string();
        assert!(msg.contains("off the sample lattice"), "{msg}");
        assert!(msg.contains("59.9"), "{msg}");
        assert!(msg.contains("60.1"), "{msg}");
        assert_eq!(err.exit_code(), 2);
    }

    #[test]
    fn unknown_names_are_rejected() {
        let tmp = tempfile::tempdir().unwrap();
        for (text, needle) in [
            ("scenario = \"Z\"\nmetric = \"pet\"\n", "unknown scenario"),
            ("scenario = \"A\"\nmetric = \"nope\"\n", "unknown metric"),
            (
                "scenario = \"A\"\nmetric = \"pet\"\n[overrides]\nbogus = 1.0\n",
                "unknown dimension",
            ),
        ] {
            let p = write_cfg(tmp.path(), text);
            let err = parse_config(&p).unwrap_err();
            assert!(err.to_string().contains(needle), "{err}");
        }
    }

    #[test]
    fn heatmap_pivot_shapes_and_min_reduction() {
        let tmp = tempfile::tempdir().unwrap();
        let path = tmp.path().join("records.jsonl");
        let meta = RecordsMeta {
            schema_version: 1,
            mode: "oracle".into(),
            scenario: "A".into(),
            metric: MetricKind::Euclidean,
            pair: ("ego".into(), "pedestrian".into()),
            seed: 0,
            budget: 0,
            init_count: 0,
            dt: 0.05,
            horizon: 60.0,
            dims: vec![
                DimMeta {
                    name: "a".into(),
                    min: 0.0,
                    max: 1.0,
                    samples: 2,
                    fixed: None,
                },
                DimMeta {
                    name: "b".into(),
                    min: 0.0,
                    max: 1.0,
                    samples: 3,
                    fixed: None,
                },
                DimMeta {
                    name: "c".into(),
                    min: 0.0,
                    max: 1.0,
                    samples: 2,
                    fixed: None,
                },
            ],
            strides: None,
        };
        let mut f = fs::File::create(&path).unwrap();
        write_line(&mut f, &RecordsLine::Meta(meta)).unwrap();
        // two records in the same (a,b) cell with different c: min wins
        for (idx, v) in [
            (vec![0, 1, 0], 5.0),
            (vec![0, 1, 1], 3.0),
            (vec![1, 2, 0], 7.0),
        ] {
            write_line(
                &mut f,
                &RecordsLine::Record(RecordEntry {
                    iteration: 0,
                    index: idx,
                    values: vec![],
                    value: v,
                    capped: false,
                    wall_ms: 0.0,
                }),
            )
            .unwrap();
        }
        let csv = export_heatmap(&path, "b", "a").unwrap();
        let lines: Vec<&str> = csv.lines().collect();
        assert_eq!(lines.len(), 3); // header + 2 rows of a
        assert!(lines[0].starts_with("a\\b,"));
        assert_eq!(lines[0].split(',').count(), 4); // label + 3 b values
                                                    // row a=0: empty, 3.0 (min of 5 and 3), empty
        let row0: Vec<&str> = lines[1].split(',').collect();
        assert_eq!(row0[1], "");
        assert_eq!(row0[2], "3.000000");
        assert_eq!(row0[3], "");
        let row1: Vec<&str> = lines[2].split(',').collect();
        assert_eq!(row1[3], "7.000000");

        assert!(export_heatmap(&path, "b", "b").is_err());
        assert!(export_heatmap(&path, "nope", "a").is_err());
    }
}
