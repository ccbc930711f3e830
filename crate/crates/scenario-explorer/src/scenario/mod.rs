//! Logical scenarios, parameter grids, and instantiation of concrete
//! scenarios.
//!
//! A logical scenario fixes the road layout and the actors but leaves some
//! actor fields open as parameter ranges. Each range is discretized into an
//! inclusive sample lattice; binding every dimension to one lattice value
//! yields a concrete scenario that can be simulated.

mod library;

use std::collections::HashMap;
use std::fmt;
use std::str::FromStr;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::conflict::{conflict_region, ConflictRegion};
use crate::error::{Error, Result};
use crate::geom::Path;

pub use library::builtin_scenario;

pub const SCENARIO_SCHEMA_VERSION: u32 = 1;

/// One discretized parameter range with inclusive endpoints:
/// `value(k) = min + k * (max - min) / (samples - 1)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ParameterDim {
    pub name: String,
    pub min: f64,
    pub max: f64,
    pub samples: usize,
}

impl ParameterDim {
    pub fn new(name: impl Into<String>, min: f64, max: f64, samples: usize) -> Result<Self> {
        let dim = ParameterDim {
            name: name.into(),
            min,
            max,
            samples,
        };
        dim.validate()?;
        Ok(dim)
    }

    pub fn validate(&self) -> Result<()> {
        let fail = |reason: &str| {
            Err(Error::InvalidDim {
                name: self.name.clone(),
                reason: reason.to_string(),
            })
        };
        if self.samples == 0 {
            return fail("samples must be at least 1");
        }
        if !self.min.is_finite() || !self.max.is_finite() {
            return fail("bounds must be finite");
        }
        if self.samples >= 2 && self.max <= self.min {
            return fail("max must exceed min when samples >= 2");
        }
        Ok(())
    }

    /// Lattice spacing; 0 for single-sample dims.
    pub fn step(&self) -> f64 {
        if self.samples < 2 {
            0.0
        } else {
            (self.max - self.min) / (self.samples - 1) as f64
        }
    }

    pub fn value(&self, k: usize) -> f64 {
        if self.samples < 2 {
            self.min
        } else if k == self.samples - 1 {
            // endpoint exact by construction
            self.max
        } else {
            self.min + k as f64 * self.step()
        }
    }

    fn lattice_tolerance(&self) -> f64 {
        1e-9 * 1.0_f64.max(self.min.abs()).max(self.max.abs())
    }

    /// Nearest lattice index for `v`, or an off-lattice error naming the two
    /// neighboring lattice values.
    pub fn quantize(&self, v: f64) -> Result<usize> {
        let tol = self.lattice_tolerance();
        if self.samples < 2 {
            if (v - self.min).abs() <= tol {
                return Ok(0);
            }
            return Err(Error::OffLattice {
                dim: self.name.clone(),
                value: v,
                below: self.min,
                above: self.min,
            });
        }
        let raw = (v - self.min) / self.step();
        let k = raw.round().clamp(0.0, (self.samples - 1) as f64) as usize;
        if (v - self.value(k)).abs() <= tol {
            return Ok(k);
        }
        let lo = raw.floor().clamp(0.0, (self.samples - 1) as f64) as usize;
        let hi = (lo + 1).min(self.samples - 1);
        Err(Error::OffLattice {
            dim: self.name.clone(),
            value: v,
            below: self.value(lo),
            above: self.value(hi),
        })
    }
}

/// Discretized hyper-rectangle: the cartesian product of its dims' lattices,
/// with row-major flat indexing (first dim slowest).
#[derive(Debug, Clone, PartialEq)]
pub struct ParameterGrid {
    dims: Vec<ParameterDim>,
}

impl ParameterGrid {
    pub fn new(dims: Vec<ParameterDim>) -> Result<Self> {
        if dims.is_empty() {
            return Err(Error::InvalidScenario(
                "grid needs at least one dimension".into(),
            ));
        }
        for d in &dims {
            d.validate()?;
        }
        let mut names: Vec<&str> = dims.iter().map(|d| d.name.as_str()).collect();
        names.sort_unstable();
        names.dedup();
        if names.len() != dims.len() {
            return Err(Error::InvalidScenario("duplicate dimension names".into()));
        }
        Ok(ParameterGrid { dims })
    }

    pub fn dims(&self) -> &[ParameterDim] {
        &self.dims
    }

    pub fn num_dims(&self) -> usize {
        self.dims.len()
    }

    pub fn dim_position(&self, name: &str) -> Option<usize> {
        self.dims.iter().position(|d| d.name == name)
    }

    pub fn shape(&self) -> Vec<usize> {
        self.dims.iter().map(|d| d.samples).collect()
    }

    pub fn cardinality(&self) -> u64 {
        self.dims.iter().map(|d| d.samples as u64).product()
    }

    pub fn check_index(&self, index: &[usize]) -> Result<()> {
        let ok = index.len() == self.dims.len()
            && index.iter().zip(&self.dims).all(|(&k, d)| k < d.samples);
        if ok {
            Ok(())
        } else {
            Err(Error::IndexOutOfRange {
                index: index.to_vec(),
                shape: self.shape(),
            })
        }
    }

    pub fn flatten(&self, index: &[usize]) -> Result<u64> {
        self.check_index(index)?;
        let mut flat = 0u64;
        for (k, d) in index.iter().zip(&self.dims) {
            flat = flat * d.samples as u64 + *k as u64;
        }
        Ok(flat)
    }

    pub fn unflatten(&self, mut flat: u64) -> Result<Vec<usize>> {
        if flat >= self.cardinality() {
            return Err(Error::IndexOutOfRange {
                index: vec![flat as usize],
                shape: self.shape(),
            });
        }
        let mut index = vec![0usize; self.dims.len()];
        for (slot, d) in index.iter_mut().zip(&self.dims).rev() {
            *slot = (flat % d.samples as u64) as usize;
            flat /= d.samples as u64;
        }
        Ok(index)
    }

    /// Physical parameter values at a lattice index.
    pub fn values(&self, index: &[usize]) -> Result<Vec<f64>> {
        self.check_index(index)?;
        Ok(index
            .iter()
            .zip(&self.dims)
            .map(|(&k, d)| d.value(k))
            .collect())
    }

    /// Inverse of [`values`](Self::values) for on-lattice value vectors.
    pub fn quantize(&self, values: &[f64]) -> Result<Vec<usize>> {
        if values.len() != self.dims.len() {
            return Err(Error::Config(format!(
                "expected {} values, got {}",
                self.dims.len(),
                values.len()
            )));
        }
        values
            .iter()
            .zip(&self.dims)
            .map(|(&v, d)| d.quantize(v))
            .collect()
    }

    /// Coordinates in the unit cube: `k / (samples - 1)` per dim, 0 for
    /// single-sample dims.
    pub fn normalized(&self, index: &[usize]) -> Result<Vec<f64>> {
        self.check_index(index)?;
        Ok(index
            .iter()
            .zip(&self.dims)
            .map(|(&k, d)| {
                if d.samples < 2 {
                    0.0
                } else {
                    k as f64 / (d.samples - 1) as f64
                }
            })
            .collect())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum ScenarioId {
    A,
    B,
    A3,
    B3,
}

impl ScenarioId {
    pub const ALL: [ScenarioId; 4] = [ScenarioId::A, ScenarioId::B, ScenarioId::A3, ScenarioId::B3];
}

impl fmt::Display for ScenarioId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            ScenarioId::A => "A",
            ScenarioId::B => "B",
            ScenarioId::A3 => "A3",
            ScenarioId::B3 => "B3",
        };
        f.write_str(s)
    }
}

impl FromStr for ScenarioId {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_uppercase().as_str() {
            "A" => Ok(ScenarioId::A),
            "B" => Ok(ScenarioId::B),
            "A3" => Ok(ScenarioId::A3),
            "B3" => Ok(ScenarioId::B3),
            other => Err(Error::UnknownScenario(other.to_string())),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ActorKind {
    Ego,
    Pedestrian,
    Vehicle,
    Truck,
}

impl ActorKind {
    pub fn as_str(&self) -> &'static str {
        match self {
            ActorKind::Ego => "ego",
            ActorKind::Pedestrian => "pedestrian",
            ActorKind::Vehicle => "vehicle",
            ActorKind::Truck => "truck",
        }
    }

    pub fn parse(s: &str) -> Result<Self> {
        match s {
            "ego" => Ok(ActorKind::Ego),
            "pedestrian" => Ok(ActorKind::Pedestrian),
            "vehicle" => Ok(ActorKind::Vehicle),
            "truck" => Ok(ActorKind::Truck),
            other => Err(Error::InvalidScenario(format!(
                "unknown actor kind `{other}`"
            ))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Behavior {
    /// Driven by the curvature-aware IDM, reacting to other actors.
    IdmControlled,
    /// Follows its route at the profile speed after its start delay.
    Scripted,
}

impl Behavior {
    pub fn as_str(&self) -> &'static str {
        match self {
            Behavior::IdmControlled => "idm",
            Behavior::Scripted => "scripted",
        }
    }

    pub fn parse(s: &str) -> Result<Self> {
        match s {
            "idm" => Ok(Behavior::IdmControlled),
            "scripted" => Ok(Behavior::Scripted),
            other => Err(Error::InvalidScenario(format!(
                "unknown behavior `{other}`"
            ))),
        }
    }
}

/// One traffic participant: a route plus the motion profile along it.
#[derive(Debug, Clone)]
pub struct ActorSpec {
    pub id: String,
    pub kind: ActorKind,
    pub route: Arc<Path>,
    pub behavior: Behavior,
    /// Start position along the route, m.
    pub start_s: f64,
    /// Time the actor waits before moving, s.
    pub start_delay: f64,
    /// Profile speed (scripted) or desired speed (IDM), m/s.
    pub target_speed: f64,
    /// Bounding-circle radius, m.
    pub footprint_radius: f64,
    /// Worst-case acceleration bound used by WTTC, m/s².
    pub max_accel: f64,
    /// Acceleration used to ramp up to the profile speed, m/s².
    pub ramp_accel: f64,
}

impl ActorSpec {
    pub fn validate(&self) -> Result<()> {
        let fail = |reason: String| Err(Error::InvalidScenario(reason));
        if !(0.0..self.route.length()).contains(&self.start_s) {
            return fail(format!(
                "actor `{}`: start_s {} outside [0, {})",
                self.id,
                self.start_s,
                self.route.length()
            ));
        }
        if self.start_delay < 0.0 {
            return fail(format!("actor `{}`: negative start_delay", self.id));
        }
        if self.target_speed <= 0.0 {
            return fail(format!(
                "actor `{}`: target_speed must be positive",
                self.id
            ));
        }
        if self.footprint_radius <= 0.0 {
            return fail(format!(
                "actor `{}`: footprint_radius must be positive",
                self.id
            ));
        }
        if self.max_accel <= 0.0 || self.ramp_accel <= 0.0 {
            return fail(format!(
                "actor `{}`: acceleration bounds must be positive",
                self.id
            ));
        }
        Ok(())
    }

    /// Corridor width used when intersecting routes: the full body width.
    pub fn corridor_width(&self) -> f64 {
        2.0 * self.footprint_radius
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BindableField {
    StartS,
    StartDelay,
    TargetSpeed,
}

impl BindableField {
    pub fn as_str(&self) -> &'static str {
        match self {
            BindableField::StartS => "start_s",
            BindableField::StartDelay => "start_delay",
            BindableField::TargetSpeed => "target_speed",
        }
    }

    pub fn parse(s: &str) -> Result<Self> {
        match s {
            "start_s" => Ok(BindableField::StartS),
            "start_delay" => Ok(BindableField::StartDelay),
            "target_speed" => Ok(BindableField::TargetSpeed),
            other => Err(Error::InvalidScenario(format!(
                "unknown bindable field `{other}`"
            ))),
        }
    }
}

/// Maps one grid dimension onto one actor field, optionally through an
/// affine transform (`field = offset + scale * value`). The transform lets a
/// dimension expressed in map coordinates (e.g. a start y-coordinate) drive
/// an arc-length field.
#[derive(Debug, Clone)]
pub struct Binding {
    pub dim: String,
    pub actor: String,
    pub field: BindableField,
    pub scale: f64,
    pub offset: f64,
}

impl Binding {
    pub fn apply(&self, raw: f64) -> f64 {
        self.offset + self.scale * raw
    }
}

/// Conflict regions for all actor pairs whose inflated routes overlap,
/// keyed by the lexicographically ordered id pair.
#[derive(Debug, Default)]
pub struct RegionMap {
    regions: HashMap<(String, String), ConflictRegion>,
}

impl RegionMap {
    fn key(a: &str, b: &str) -> (String, String) {
        if a <= b {
            (a.to_string(), b.to_string())
        } else {
            (b.to_string(), a.to_string())
        }
    }

    pub fn get(&self, a: &str, b: &str) -> Option<&ConflictRegion> {
        self.regions.get(&Self::key(a, b))
    }

    /// Entry/exit spans in (a, b) argument order.
    pub fn spans(&self, a: &str, b: &str) -> Option<((f64, f64), (f64, f64))> {
        let region = self.get(a, b)?;
        if a <= b {
            Some((region.span_a, region.span_b))
        } else {
            Some((region.span_b, region.span_a))
        }
    }

    pub fn len(&self) -> usize {
        self.regions.len()
    }

    pub fn is_empty(&self) -> bool {
        self.regions.is_empty()
    }

    pub fn pairs(&self) -> impl Iterator<Item = (&str, &str)> {
        self.regions.keys().map(|(a, b)| (a.as_str(), b.as_str()))
    }
}

fn compute_regions(actors: &[ActorSpec]) -> RegionMap {
    let mut map = RegionMap::default();
    for i in 0..actors.len() {
        for j in i + 1..actors.len() {
            let (a, b) = (&actors[i], &actors[j]);
            if let Some(region) =
                conflict_region(&a.route, &b.route, a.corridor_width(), b.corridor_width())
            {
                let key = RegionMap::key(&a.id, &b.id);
                // span_a must belong to the lexicographically first id
                let region = if a.id <= b.id {
                    region
                } else {
                    ConflictRegion {
                        span_a: region.span_b,
                        span_b: region.span_a,
                        polygon: region.polygon,
                    }
                };
                map.regions.insert(key, region);
            }
        }
    }
    map
}

/// A scenario layout with open parameter ranges.
#[derive(Debug, Clone)]
pub struct LogicalScenario {
    pub id: ScenarioId,
    pub description: String,
    pub actors: Vec<ActorSpec>,
    pub grid: ParameterGrid,
    pub bindings: Vec<Binding>,
    regions: Arc<RegionMap>,
}

impl LogicalScenario {
    pub fn new(
        id: ScenarioId,
        description: String,
        actors: Vec<ActorSpec>,
        grid: ParameterGrid,
        bindings: Vec<Binding>,
    ) -> Result<Self> {
        for a in &actors {
            a.validate()?;
        }
        {
            let mut ids: Vec<&str> = actors.iter().map(|a| a.id.as_str()).collect();
            ids.sort_unstable();
            ids.dedup();
            if ids.len() != actors.len() {
                return Err(Error::InvalidScenario("duplicate actor ids".into()));
            }
        }
        // every grid dim bound exactly once, to an existing actor
        for d in grid.dims() {
            let n = bindings.iter().filter(|b| b.dim == d.name).count();
            if n != 1 {
                return Err(Error::InvalidScenario(format!(
                    "dimension `{}` must have exactly one binding, found {n}",
                    d.name
                )));
            }
        }
        for b in &bindings {
            let dim = grid
                .dim_position(&b.dim)
                .map(|i| &grid.dims()[i])
                .ok_or_else(|| Error::UnknownDim(b.dim.clone()))?;
            let actor = actors
                .iter()
                .find(|a| a.id == b.actor)
                .ok_or_else(|| Error::UnknownActor(b.actor.clone()))?;
            // bound values must stay valid across the whole lattice
            for k in [0, dim.samples - 1] {
                let v = b.apply(dim.value(k));
                let mut probe = actor.clone();
                match b.field {
                    BindableField::StartS => probe.start_s = v,
                    BindableField::StartDelay => probe.start_delay = v,
                    BindableField::TargetSpeed => probe.target_speed = v,
                }
                probe.validate().map_err(|e| {
                    Error::InvalidScenario(format!(
                        "binding of `{}` to {}.{} invalid at lattice endpoint: {e}",
                        b.dim,
                        b.actor,
                        b.field.as_str()
                    ))
                })?;
            }
        }
        let regions = Arc::new(compute_regions(&actors));
        Ok(LogicalScenario {
            id,
            description,
            actors,
            grid,
            bindings,
            regions,
        })
    }

    pub fn regions(&self) -> &RegionMap {
        &self.regions
    }

    pub fn actor(&self, id: &str) -> Result<&ActorSpec> {
        self.actors
            .iter()
            .find(|a| a.id == id)
            .ok_or_else(|| Error::UnknownActor(id.to_string()))
    }

    /// Bind every parameter dimension to the lattice value at `index`.
    pub fn instantiate(&self, index: &[usize]) -> Result<ConcreteScenario> {
        let values = self.grid.values(index)?;
        let mut actors = self.actors.clone();
        for b in &self.bindings {
            let pos = self
                .grid
                .dim_position(&b.dim)
                .ok_or_else(|| Error::UnknownDim(b.dim.clone()))?;
            let v = b.apply(values[pos]);
            let actor = actors
                .iter_mut()
                .find(|a| a.id == b.actor)
                .ok_or_else(|| Error::UnknownActor(b.actor.clone()))?;
            match b.field {
                BindableField::StartS => actor.start_s = v,
                BindableField::StartDelay => actor.start_delay = v,
                BindableField::TargetSpeed => actor.target_speed = v,
            }
        }
        Ok(ConcreteScenario {
            id: self.id,
            actors,
            index: index.to_vec(),
            regions: Arc::clone(&self.regions),
        })
    }
}

/// A fully bound scenario, ready for simulation.
#[derive(Debug, Clone)]
pub struct ConcreteScenario {
    pub id: ScenarioId,
    pub actors: Vec<ActorSpec>,
    /// The lattice index this scenario was instantiated from.
    pub index: Vec<usize>,
    regions: Arc<RegionMap>,
}

impl ConcreteScenario {
    /// Build a concrete scenario directly from fully bound actors, computing
    /// conflict regions on the fly. Useful for desk-scale setups that do not
    /// come from a parameter grid.
    pub fn from_actors(id: ScenarioId, actors: Vec<ActorSpec>) -> Result<Self> {
        for a in &actors {
            a.validate()?;
        }
        let regions = Arc::new(compute_regions(&actors));
        Ok(ConcreteScenario {
            id,
            actors,
            index: Vec::new(),
            regions,
        })
    }

    pub fn regions(&self) -> &RegionMap {
        &self.regions
    }

    pub fn actor(&self, id: &str) -> Result<&ActorSpec> {
        self.actors
            .iter()
            .find(|a| a.id == id)
            .ok_or_else(|| Error::UnknownActor(id.to_string()))
    }

    pub fn actor_index(&self, id: &str) -> Result<usize> {
        self.actors
            .iter()
            .position(|a| a.id == id)
            .ok_or_else(|| Error::UnknownActor(id.to_string()))
    }
}

// ---------------------------------------------------------------------------
// On-disk schema
// ---------------------------------------------------------------------------

/// Serialized form of a logical scenario (one TOML document per scenario).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScenarioFile {
    pub schema_version: u32,
    pub id: String,
    pub description: String,
    #[serde(rename = "actor")]
    pub actors: Vec<ActorFileEntry>,
    #[serde(rename = "dim")]
    pub dims: Vec<ParameterDim>,
    #[serde(rename = "binding")]
    pub bindings: Vec<BindingFileEntry>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ActorFileEntry {
    pub id: String,
    pub kind: String,
    pub behavior: String,
    pub start_s: f64,
    pub start_delay: f64,
    pub target_speed: f64,
    pub footprint_radius: f64,
    pub max_accel: f64,
    pub ramp_accel: f64,
    pub route: Vec<[f64; 2]>,
}

fn default_scale() -> f64 {
    1.0
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BindingFileEntry {
    pub dim: String,
    pub actor: String,
    pub field: String,
    #[serde(default = "default_scale")]
    pub scale: f64,
    #[serde(default)]
    pub offset: f64,
}

impl ScenarioFile {
    pub fn parse(text: &str) -> Result<Self> {
        toml::from_str(text).map_err(|e| Error::InvalidScenario(format!("scenario file: {e}")))
    }

    pub fn to_toml(&self) -> String {
        toml::to_string_pretty(self).expect("scenario file serializes")
    }

    pub fn into_logical(self) -> Result<LogicalScenario> {
        if self.schema_version != SCENARIO_SCHEMA_VERSION {
            return Err(Error::InvalidScenario(format!(
                "unsupported schema_version {} (expected {})",
                self.schema_version, SCENARIO_SCHEMA_VERSION
            )));
        }
        let id: ScenarioId = self.id.parse()?;
        let mut actors = Vec::with_capacity(self.actors.len());
        for a in self.actors {
            let points = a
                .route
                .iter()
                .map(|&[x, y]| crate::geom::Vec2::new(x, y))
                .collect();
            actors.push(ActorSpec {
                id: a.id,
                kind: ActorKind::parse(&a.kind)?,
                route: Arc::new(Path::new(points)?),
                behavior: Behavior::parse(&a.behavior)?,
                start_s: a.start_s,
                start_delay: a.start_delay,
                target_speed: a.target_speed,
                footprint_radius: a.footprint_radius,
                max_accel: a.max_accel,
                ramp_accel: a.ramp_accel,
            });
        }
        let grid = ParameterGrid::new(self.dims)?;
        let bindings = self
            .bindings
            .into_iter()
            .map(|b| {
                Ok(Binding {
                    dim: b.dim,
                    actor: b.actor,
                    field: BindableField::parse(&b.field)?,
                    scale: b.scale,
                    offset: b.offset,
                })
            })
            .collect::<Result<Vec<_>>>()?;
        LogicalScenario::new(id, self.description, actors, grid, bindings)
    }

    pub fn from_logical(s: &LogicalScenario) -> Self {
        ScenarioFile {
            schema_version: SCENARIO_SCHEMA_VERSION,
            id: s.id.to_string(),
            description: s.description.clone(),
            actors: s
                .actors
                .iter()
                .map(|a| ActorFileEntry {
                    id: a.id.clone(),
                    kind: a.kind.as_str().to_string(),
                    behavior: a.behavior.as_str().to_string(),
                    start_s: a.start_s,
                    start_delay: a.start_delay,
                    target_speed: a.target_speed,
                    footprint_radius: a.footprint_radius,
                    max_accel: a.max_accel,
                    ramp_accel: a.ramp_accel,
                    route: a.route.points().iter().map(|p| [p.x, p.y]).collect(),
                })
                .collect(),
            dims: s.grid.dims().to_vec(),
            bindings: s
                .bindings
                .iter()
                .map(|b| BindingFileEntry {
                    dim: b.dim.clone(),
                    actor: b.actor.clone(),
                    field: b.field.as_str().to_string(),
                    scale: b.scale,
                    offset: b.offset,
                })
                .collect(),
        }
    }
}

/// Load one of the bundled logical scenarios from its embedded definition
/// file.
pub fn load_scenario_library(id: ScenarioId) -> Result<LogicalScenario> {
    let text = match id {
        ScenarioId::A => include_str!("assets/scenario_a.toml"),
        ScenarioId::B => include_str!("assets/scenario_b.toml"),
        ScenarioId::A3 => include_str!("assets/scenario_a3.toml"),
        ScenarioId::B3 => include_str!("assets/scenario_b3.toml"),
    };
    ScenarioFile::parse(text)?.into_logical()
}
