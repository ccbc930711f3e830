//! Deterministic fixed-step closed-loop simulation.
//!
//! Scripted actors follow their routes at profile speed once their start
//! delay has elapsed. The ego vehicle is driven by a curvature-aware
//! Intelligent Driver Model: other actors are filtered by a lateral corridor
//! around the ego route and projected onto it, and upcoming curvature is
//! converted into a velocity limit that competes with real objects for the
//! binding (minimum) acceleration.
//!
//! Integration is semi-implicit Euler with the speed updated first, so
//! `s[k+1] = s[k] + v[k+1]*dt` holds exactly for every actor and step. Two
//! runs with identical inputs produce bit-identical traces.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geom::Vec2;
use crate::scenario::{ActorSpec, Behavior, ConcreteScenario};

/// Hard deceleration floor, m/s². IDM output below this is truncated.
pub const EMERGENCY_DECEL: f64 = -8.0;

/// Lateral corridor half-width around the ego route used by the object
/// filter, m.
pub const CORRIDOR_HALF_WIDTH: f64 = 1.75;

/// Sampling step of the curvature lookahead scan, m.
const CURVATURE_SCAN_STEP: f64 = 0.5;

/// Curvature below this is treated as straight; polyline joints between
/// straight pieces and sampled arcs estimate at ~1e-4 and must not register.
const MIN_CURVATURE: f64 = 1e-6;

/// Parameters of the Intelligent Driver Model plus the curvature extension.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct IdmParams {
    /// Desired free-road speed v0, m/s.
    pub v0: f64,
    /// Time headway T, s.
    pub time_headway: f64,
    /// Maximum acceleration a, m/s².
    pub max_accel: f64,
    /// Comfortable deceleration b, m/s².
    pub comfort_decel: f64,
    /// Free-acceleration exponent δ.
    pub delta: f64,
    /// Minimum standstill gap s0, m.
    pub min_gap: f64,
    /// Maximum lateral acceleration for cornering, m/s².
    pub max_lat_accel: f64,
    /// How far ahead the route is scanned for curvature, m.
    pub lookahead: f64,
}

impl Default for IdmParams {
    fn default() -> Self {
        IdmParams {
            v0: 12.0,
            time_headway: 1.2,
            max_accel: 2.0,
            comfort_decel: 2.5,
            delta: 4.0,
            min_gap: 2.0,
            max_lat_accel: 2.5,
            lookahead: 40.0,
        }
    }
}

impl IdmParams {
    pub fn validate(&self) -> Result<()> {
        let all_positive = self.v0 > 0.0
            && self.time_headway > 0.0
            && self.max_accel > 0.0
            && self.comfort_decel > 0.0
            && self.min_gap > 0.0
            && self.max_lat_accel > 0.0
            && self.lookahead > 0.0;
        if !all_positive || self.delta < 1.0 {
            return Err(Error::Config(
                "IDM parameters must be positive (delta >= 1)".into(),
            ));
        }
        Ok(())
    }
}

/// IDM acceleration against a lead object at distance `gap` closing with
/// relative speed `dv = v - v_lead`. Non-positive gaps demand the emergency
/// deceleration. The dynamic part of the desired gap is clamped at zero so a
/// fast-receding lead never induces braking.
pub fn idm_acceleration(v: f64, gap: f64, dv: f64, p: &IdmParams) -> f64 {
    if gap <= 0.0 {
        return EMERGENCY_DECEL;
    }
    let dynamic = v * p.time_headway + v * dv / (2.0 * (p.max_accel * p.comfort_decel).sqrt());
    let desired_gap = p.min_gap + dynamic.max(0.0);
    let accel = p.max_accel * (1.0 - (v / p.v0).powf(p.delta) - (desired_gap / gap).powi(2));
    accel.max(EMERGENCY_DECEL)
}

/// Free-road IDM acceleration (no interaction term).
pub fn free_road_acceleration(v: f64, p: &IdmParams) -> f64 {
    (p.max_accel * (1.0 - (v / p.v0).powf(p.delta))).max(EMERGENCY_DECEL)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum ObjectKind {
    /// Another traffic participant; payload is its actor index.
    RealActor(usize),
    /// Velocity limit induced by upcoming path curvature.
    CurvatureLimit,
}

/// An obstacle as seen by the ego controller after projection onto its path.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct VirtualObject {
    /// Distance ahead along the ego path, m (footprints already deducted for
    /// real actors).
    pub gap: f64,
    /// Object speed along the ego path direction, m/s. For curvature limits
    /// this is the admissible cornering speed.
    pub speed_along_path: f64,
    pub kind: ObjectKind,
}

/// Kinematic state of one actor on its own route.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ActorState {
    pub s: f64,
    pub v: f64,
    /// False while the start delay runs and after the route end is reached.
    pub active: bool,
}

/// Scan `[s, s+lookahead]` for the point of maximum curvature and convert it
/// into a velocity-limit object (`v_lim = sqrt(a_lat_max / kappa)`), with
/// ties keeping the nearest point. Returns `None` on straight geometry and
/// when the limit sits at or above the desired speed, where it could never
/// bind.
pub fn curvature_virtual_object(
    route: &crate::geom::Path,
    s: f64,
    p: &IdmParams,
) -> Option<VirtualObject> {
    let len = route.length();
    let end = (s + p.lookahead).min(len);
    let mut best_kappa = 0.0;
    let mut best_gap = 0.0;
    let mut x = s;
    loop {
        let kappa = route.state_at(x).expect("scan within route").curvature;
        if kappa > best_kappa {
            best_kappa = kappa;
            best_gap = x - s;
        }
        if x >= end {
            break;
        }
        x = (x + CURVATURE_SCAN_STEP).min(end);
    }
    if best_kappa <= MIN_CURVATURE {
        return None;
    }
    let v_lim = (p.max_lat_accel / best_kappa).sqrt();
    if v_lim >= p.v0 {
        return None;
    }
    Some(VirtualObject {
        gap: best_gap,
        speed_along_path: v_lim,
        kind: ObjectKind::CurvatureLimit,
    })
}

/// Project every active actor onto the ego route and keep those inside the
/// lateral corridor and ahead of the ego. The returned gap deducts both
/// footprint radii; the object speed is the projection of the actor velocity
/// onto the ego path tangent.
pub fn filter_objects(
    ego_index: usize,
    states: &[ActorState],
    actors: &[ActorSpec],
) -> Vec<VirtualObject> {
    let ego = &states[ego_index];
    let ego_spec = &actors[ego_index];
    let mut out = Vec::new();
    for (i, (state, spec)) in states.iter().zip(actors).enumerate() {
        if i == ego_index || !state.active {
            continue;
        }
        let actor_pose = spec.route.state_at(state.s).expect("state on route");
        let (proj_s, lateral) = ego_spec.route.project(actor_pose.position);
        if lateral > CORRIDOR_HALF_WIDTH + spec.footprint_radius {
            continue;
        }
        if proj_s <= ego.s {
            continue;
        }
        let gap = (proj_s - ego.s - ego_spec.footprint_radius - spec.footprint_radius).max(0.0);
        let ego_tangent = ego_spec
            .route
            .state_at(proj_s)
            .expect("projection on route")
            .tangent;
        out.push(VirtualObject {
            gap,
            speed_along_path: state.v * actor_pose.tangent.dot(ego_tangent),
            kind: ObjectKind::RealActor(i),
        });
    }
    out
}

/// Binding acceleration for an IDM-controlled actor: the minimum demand
/// over the free road, all filtered real objects, and the curvature limit.
///
/// A curvature object acts like a lead vehicle driving at the limit speed
/// placed one equilibrium distance (`s0 + v_lim*T`) beyond the curve point,
/// so the controller settles onto the curve at the limit speed instead of
/// stopping short of a fixed point. On approach it additionally respects
/// the constant-deceleration envelope that reaches the limit exactly at the
/// curve point.
pub fn ego_acceleration(
    ego_index: usize,
    states: &[ActorState],
    actors: &[ActorSpec],
    p: &IdmParams,
) -> f64 {
    let ego = &states[ego_index];
    let mut accel = free_road_acceleration(ego.v, p);
    for obj in filter_objects(ego_index, states, actors) {
        let a = idm_acceleration(ego.v, obj.gap, ego.v - obj.speed_along_path, p);
        accel = accel.min(a);
    }
    if let Some(curve) = curvature_virtual_object(&actors[ego_index].route, ego.s, p) {
        let v_lim = curve.speed_along_path;
        let effective_gap = curve.gap + p.min_gap + v_lim * p.time_headway;
        let mut demand = idm_acceleration(ego.v, effective_gap, ego.v - v_lim, p);
        if ego.v > v_lim {
            let envelope = (v_lim * v_lim - ego.v * ego.v) / (2.0 * curve.gap.max(0.1));
            demand = demand.min(envelope.max(EMERGENCY_DECEL));
        }
        accel = accel.min(demand);
    }
    accel
}

#[derive(Debug, Clone, PartialEq)]
pub enum Termination {
    Horizon,
    AllArrived,
    Collision { a: String, b: String, time: f64 },
}

#[derive(Debug, Clone)]
pub struct ActorTrack {
    pub id: String,
    pub pos: Vec<Vec2>,
    pub s: Vec<f64>,
    pub v: Vec<f64>,
}

/// Time series of one simulation run; all tracks have equal length and
/// `t[k] = k * dt`.
#[derive(Debug, Clone)]
pub struct SimulationTrace {
    pub dt: f64,
    pub tracks: Vec<ActorTrack>,
    pub termination: Termination,
}

impl SimulationTrace {
    pub fn len(&self) -> usize {
        self.tracks.first().map_or(0, |t| t.s.len())
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn time(&self, k: usize) -> f64 {
        k as f64 * self.dt
    }

    pub fn track(&self, actor_id: &str) -> Result<&ActorTrack> {
        self.tracks
            .iter()
            .find(|t| t.id == actor_id)
            .ok_or_else(|| Error::UnknownActor(actor_id.to_string()))
    }

    /// Dump as CSV (`t,actor,x,y,s,v`, 6-decimal fixed point), one row per
    /// actor per step.
    pub fn write_csv<W: std::io::Write>(&self, w: &mut W) -> Result<()> {
        writeln!(w, "t,actor,x,y,s,v")?;
        for k in 0..self.len() {
            let t = self.time(k);
            for track in &self.tracks {
                writeln!(
                    w,
                    "{:.6},{},{:.6},{:.6},{:.6},{:.6}",
                    t, track.id, track.pos[k].x, track.pos[k].y, track.s[k], track.v[k]
                )?;
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SimConfig {
    /// Integration step, s.
    pub dt: f64,
    /// Simulated horizon, s.
    pub horizon: f64,
    pub idm: IdmParams,
}

impl Default for SimConfig {
    fn default() -> Self {
        SimConfig {
            dt: 0.05,
            horizon: 60.0,
            idm: IdmParams::default(),
        }
    }
}

impl SimConfig {
    pub fn validate(&self) -> Result<()> {
        if self.dt <= 0.0 || self.horizon <= 0.0 {
            return Err(Error::Config("dt and horizon must be positive".into()));
        }
        self.idm.validate()
    }
}

fn is_started(spec: &ActorSpec, t: f64) -> bool {
    t >= spec.start_delay
}

/// Advance one actor by `dt` from the global state snapshot taken at time
/// `t`. Arrival at the route end lands exactly on the end coordinate by
/// shortening the final speed sample, keeping the Euler contract intact.
fn advance(
    index: usize,
    states: &[ActorState],
    actors: &[ActorSpec],
    t: f64,
    dt: f64,
    p: &IdmParams,
) -> ActorState {
    let state = states[index];
    let spec = &actors[index];
    let len = spec.route.length();
    if !is_started(spec, t) || state.s >= len {
        return ActorState {
            s: state.s,
            v: 0.0,
            active: false,
        };
    }
    let mut v_next = match spec.behavior {
        Behavior::Scripted => (state.v + spec.ramp_accel * dt).min(spec.target_speed),
        Behavior::IdmControlled => {
            let accel = ego_acceleration(index, states, actors, p);
            (state.v + accel * dt).max(0.0)
        }
    };
    let mut s_next = state.s + v_next * dt;
    if s_next >= len {
        v_next = (len - state.s) / dt;
        s_next = len;
    }
    ActorState {
        s: s_next,
        v: v_next,
        active: s_next < len,
    }
}

/// Initial speed of an IDM actor that starts already driving: the desired
/// speed, capped by the curvature limit at the start position.
fn initial_idm_speed(spec: &ActorSpec, p: &IdmParams) -> f64 {
    let kappa = spec
        .route
        .state_at(spec.start_s)
        .expect("start on route")
        .curvature;
    if kappa > MIN_CURVATURE {
        spec.target_speed.min((p.max_lat_accel / kappa).sqrt())
    } else {
        spec.target_speed
    }
}

/// Run the scenario to the horizon, to all actors arriving, or to the first
/// collision involving an IDM-controlled actor. Bitwise deterministic.
pub fn simulate(scenario: &ConcreteScenario, cfg: &SimConfig) -> Result<SimulationTrace> {
    cfg.validate()?;
    let actors = &scenario.actors;
    for a in actors {
        a.validate()?;
    }
    // The controller desires the actor's own profile speed.
    let idm_for = |spec: &ActorSpec| IdmParams {
        v0: spec.target_speed,
        ..cfg.idm
    };

    let mut states: Vec<ActorState> = actors
        .iter()
        .map(|spec| {
            let started = is_started(spec, 0.0);
            let v = match spec.behavior {
                Behavior::IdmControlled if started => initial_idm_speed(spec, &idm_for(spec)),
                _ => 0.0,
            };
            ActorState {
                s: spec.start_s,
                v,
                active: started,
            }
        })
        .collect();

    let steps = (cfg.horizon / cfg.dt).round() as usize;
    let mut tracks: Vec<ActorTrack> = actors
        .iter()
        .map(|a| ActorTrack {
            id: a.id.clone(),
            pos: Vec::with_capacity(steps + 1),
            s: Vec::with_capacity(steps + 1),
            v: Vec::with_capacity(steps + 1),
        })
        .collect();
    let record = |tracks: &mut Vec<ActorTrack>, states: &[ActorState]| {
        for (track, (state, spec)) in tracks.iter_mut().zip(states.iter().zip(actors)) {
            let pose = spec.route.state_at(state.s).expect("state on route");
            track.pos.push(pose.position);
            track.s.push(state.s);
            track.v.push(state.v);
        }
    };
    record(&mut tracks, &states);

    let collision = |states: &[ActorState]| -> Option<(usize, usize)> {
        for i in 0..actors.len() {
            for j in i + 1..actors.len() {
                if actors[i].behavior != Behavior::IdmControlled
                    && actors[j].behavior != Behavior::IdmControlled
                {
                    continue;
                }
                if !states[i].active || !states[j].active {
                    continue;
                }
                let pi = actors[i].route.state_at(states[i].s).unwrap().position;
                let pj = actors[j].route.state_at(states[j].s).unwrap().position;
                if pi.distance(pj) < actors[i].footprint_radius + actors[j].footprint_radius {
                    return Some((i, j));
                }
            }
        }
        None
    };

    let mut termination = Termination::Horizon;
    for k in 1..=steps {
        let all_arrived = states
            .iter()
            .zip(actors)
            .all(|(st, spec)| st.s >= spec.route.length());
        if all_arrived {
            termination = Termination::AllArrived;
            break;
        }
        let t = (k - 1) as f64 * cfg.dt;
        let next: Vec<ActorState> = (0..actors.len())
            .map(|i| advance(i, &states, actors, t, cfg.dt, &idm_for(&actors[i])))
            .collect();
        states = next;
        record(&mut tracks, &states);
        if let Some((i, j)) = collision(&states) {
            termination = Termination::Collision {
                a: actors[i].id.clone(),
                b: actors[j].id.clone(),
                time: k as f64 * cfg.dt,
            };
            break;
        }
    }

    Ok(SimulationTrace {
        dt: cfg.dt,
        tracks,
        termination,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geom::{Path, PathBuilder, Vec2};
    use crate::scenario::{ActorKind, ScenarioId};
    use std::sync::Arc;

    fn params() -> IdmParams {
        IdmParams::default()
    }

    #[test]
    fn idm_equilibrium_and_standstill() {
        let p = params();
        assert_eq!(free_road_acceleration(p.v0, &p), 0.0);
        assert_eq!(free_road_acceleration(0.0, &p), p.max_accel);
    }

    #[test]
    fn idm_matches_hand_evaluated_formula() {
        // v=10, v0=15, T=1.5, a=1.5, b=2, s0=2, delta=4, gap=30, dv=0:
        // s* = 2 + 15 = 17, accel = 1.5*(1 - (10/15)^4 - (17/30)^2)
        let p = IdmParams {
            v0: 15.0,
            time_headway: 1.5,
            max_accel: 1.5,
            comfort_decel: 2.0,
            delta: 4.0,
            min_gap: 2.0,
            ..IdmParams::default()
        };
        let a = idm_acceleration(10.0, 30.0, 0.0, &p);
        let expected = 1.5 * (1.0 - (10.0f64 / 15.0).powi(4) - (17.0f64 / 30.0).powi(2));
        assert!((a - expected).abs() < 1e-12);
        assert!((a - 0.72).abs() < 0.01, "accel {a}");
    }

    #[test]
    fn idm_emergency_on_nonpositive_gap() {
        let p = params();
        assert_eq!(idm_acceleration(5.0, 0.0, 0.0, &p), EMERGENCY_DECEL);
        assert_eq!(idm_acceleration(5.0, -1.0, 0.0, &p), EMERGENCY_DECEL);
    }

    #[test]
    fn straight_route_has_no_curvature_object() {
        let route = Path::new(vec![Vec2::new(0.0, 0.0), Vec2::new(200.0, 0.0)]).unwrap();
        assert!(curvature_virtual_object(&route, 0.0, &params()).is_none());
    }

    #[test]
    fn curvature_limit_value() {
        // kappa = 0.1 ahead with a_lat_max = 2.5 -> v_lim = 5 m/s
        let route = PathBuilder::new(Vec2::new(0.0, 0.0))
            .line_to(Vec2::new(5.0, 0.0))
            .arc(Vec2::new(5.0, 10.0), 10.0, -90.0, -30.0, 1.0)
            .build()
            .unwrap();
        let obj = curvature_virtual_object(&route, 0.0, &params()).unwrap();
        assert!(
            (obj.speed_along_path - 5.0).abs() < 0.01,
            "v_lim {}",
            obj.speed_along_path
        );
        assert_eq!(obj.kind, ObjectKind::CurvatureLimit);
    }

    /// Piecewise-constant-curvature test track built by heading integration.
    fn curvy_path(pieces: &[(f64, f64)]) -> Path {
        let ds = 0.1;
        let mut pts = vec![Vec2::new(0.0, 0.0)];
        let mut heading = 0.0f64;
        for &(len, kappa) in pieces {
            let n = (len / ds).round() as usize;
            for _ in 0..n {
                let last = *pts.last().unwrap();
                pts.push(last + Vec2::new(heading.cos(), heading.sin()) * ds);
                heading += kappa * ds;
            }
        }
        Path::new(pts).unwrap()
    }

    #[test]
    fn strongest_curve_in_horizon_binds() {
        // gentle curve (kappa 0.05) at 10 m, sharp curve (kappa 0.2) at 30 m:
        // the velocity limit of the sharp curve is the binding one.
        let route = curvy_path(&[
            (10.0, 0.0),
            (5.0, 0.05),
            (15.0, 0.0),
            (5.0, 0.2),
            (20.0, 0.0),
        ]);
        let obj = curvature_virtual_object(&route, 0.0, &params()).unwrap();
        let v_expected = (2.5f64 / 0.2).sqrt(); // 3.5355
        assert!(
            (obj.speed_along_path - v_expected).abs() < 0.15,
            "v_lim {} vs {}",
            obj.speed_along_path,
            v_expected
        );
        assert!(
            obj.gap > 29.0 && obj.gap < 35.5,
            "sharp curve should bind at ~30 m, got {}",
            obj.gap
        );
    }

    fn actor(id: &str, route: Path, behavior: Behavior) -> ActorSpec {
        ActorSpec {
            id: id.into(),
            kind: if behavior == Behavior::IdmControlled {
                ActorKind::Ego
            } else {
                ActorKind::Pedestrian
            },
            route: Arc::new(route),
            behavior,
            start_s: 0.0,
            start_delay: 0.0,
            target_speed: 10.0,
            footprint_radius: 1.0,
            max_accel: 3.0,
            ramp_accel: 2.0,
        }
    }

    #[test]
    fn filter_projects_crossing_pedestrian() {
        let ego_route = Path::new(vec![Vec2::new(0.0, 0.0), Vec2::new(100.0, 0.0)]).unwrap();
        let ped_route = Path::new(vec![Vec2::new(30.0, 1.0), Vec2::new(30.0, -10.0)]).unwrap();
        let mut ped = actor("ped", ped_route, Behavior::Scripted);
        ped.footprint_radius = 0.3;
        let ego = actor("ego", ego_route, Behavior::IdmControlled);
        let actors = vec![ego, ped];
        let states = vec![
            ActorState {
                s: 20.0,
                v: 8.0,
                active: true,
            },
            ActorState {
                s: 0.0,
                v: 1.4,
                active: true,
            },
        ];
        let objs = filter_objects(0, &states, &actors);
        assert_eq!(objs.len(), 1);
        let o = &objs[0];
        // gap = 30 - 20 - 1.0 - 0.3
        assert!((o.gap - 8.7).abs() < 1e-9, "gap {}", o.gap);
        // walking perpendicular to the ego path
        assert!(o.speed_along_path.abs() < 1e-9);
        assert_eq!(o.kind, ObjectKind::RealActor(1));
    }

    #[test]
    fn filter_excludes_behind_lateral_and_inactive() {
        let ego_route = Path::new(vec![Vec2::new(0.0, 0.0), Vec2::new(100.0, 0.0)]).unwrap();
        let make = |x: f64, y: f64| {
            let r = Path::new(vec![Vec2::new(x, y), Vec2::new(x + 50.0, y)]).unwrap();
            actor("other", r, Behavior::Scripted)
        };
        let ego = actor("ego", ego_route, Behavior::IdmControlled);

        // behind the ego
        let actors = vec![ego.clone(), make(5.0, 0.0)];
        let states = vec![
            ActorState {
                s: 20.0,
                v: 8.0,
                active: true,
            },
            ActorState {
                s: 0.0,
                v: 5.0,
                active: true,
            },
        ];
        assert!(filter_objects(0, &states, &actors).is_empty());

        // outside the corridor
        let actors = vec![ego.clone(), make(40.0, 10.0)];
        assert!(filter_objects(0, &states, &actors).is_empty());

        // ahead and inside, but inactive
        let actors = vec![ego, make(40.0, 0.0)];
        let states = vec![
            ActorState {
                s: 20.0,
                v: 8.0,
                active: true,
            },
            ActorState {
                s: 0.0,
                v: 0.0,
                active: false,
            },
        ];
        assert!(filter_objects(0, &states, &actors).is_empty());
    }

    fn synthetic_scenario(actors: Vec<ActorSpec>) -> ConcreteScenario {
        ConcreteScenario::from_actors(ScenarioId::A, actors).unwrap()
    }

    #[test]
    fn free_road_run_reaches_desired_speed() {
        let route = Path::new(vec![Vec2::new(0.0, 0.0), Vec2::new(100.0, 0.0)]).unwrap();
        let mut ego = actor("ego", route, Behavior::IdmControlled);
        ego.target_speed = 10.0;
        let scn = synthetic_scenario(vec![ego]);
        let cfg = SimConfig::default();
        let trace = simulate(&scn, &cfg).unwrap();
        assert_eq!(trace.termination, Termination::AllArrived);
        let ego_track = trace.track("ego").unwrap();
        let v_max = ego_track.v.iter().cloned().fold(0.0, f64::max);
        assert!(
            v_max <= 10.0 + 1e-9,
            "free-road speed bound violated: {v_max}"
        );
        // started at full desired speed, so it cruises throughout
        assert!((ego_track.v[0] - 10.0).abs() < 1e-9);
        let expected_steps = (100.0 / 10.0 / cfg.dt) as usize;
        assert!((ego_track.s.len() as i64 - expected_steps as i64).abs() <= 2);
    }

    #[test]
    fn standing_start_matches_ode_oracle() {
        // Independent oracle: integrate dv/dt = a*(1 - (v/v0)^4) with RK4 at
        // a fine step and record when the traveled distance passes 100 m.
        let (a, v0, dist) = (2.0, 10.0, 100.0);
        let fine = 1e-4;
        let (mut v, mut s, mut t_oracle) = (0.0f64, 0.0f64, 0.0f64);
        while s < dist {
            let f = |v: f64| a * (1.0 - (v / v0).powi(4));
            let k1 = f(v);
            let k2 = f(v + 0.5 * fine * k1);
            let k3 = f(v + 0.5 * fine * k2);
            let k4 = f(v + fine * k3);
            let v_next = v + fine / 6.0 * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
            s += 0.5 * (v + v_next) * fine;
            v = v_next;
            t_oracle += fine;
        }

        let route = Path::new(vec![Vec2::new(0.0, 0.0), Vec2::new(100.0, 0.0)]).unwrap();
        let mut ego = actor("ego", route, Behavior::IdmControlled);
        ego.target_speed = 10.0;
        // force a standing start via a start delay shorter than one step
        ego.start_delay = 0.01;
        let scn = synthetic_scenario(vec![ego]);
        let trace = simulate(&scn, &SimConfig::default()).unwrap();
        assert_eq!(trace.termination, Termination::AllArrived);
        let track = trace.track("ego").unwrap();
        let arrive_k = track.s.iter().position(|&s| s >= 100.0).unwrap();
        let t_sim = trace.time(arrive_k);
        // one step of activation lag plus O(dt) integration error
        assert!(
            (t_sim - t_oracle).abs() < 0.25,
            "arrival {t_sim} vs oracle {t_oracle}"
        );
        let v_final = track.v[arrive_k - 1];
        assert!(v_final > 9.8, "should cruise at v0, got {v_final}");
    }

    #[test]
    fn scripted_actor_advances_by_profile_speed() {
        let route = Path::new(vec![Vec2::new(0.0, 0.0), Vec2::new(50.0, 0.0)]).unwrap();
        let mut ped = actor("ped", route, Behavior::Scripted);
        ped.target_speed = 1.4;
        ped.ramp_accel = 1.0;
        let scn = synthetic_scenario(vec![ped]);
        let trace = simulate(
            &scn,
            &SimConfig {
                dt: 0.05,
                horizon: 2.0,
                ..Default::default()
            },
        )
        .unwrap();
        let track = trace.track("ped").unwrap();
        // after the ramp (1.4 s) the speed stays at the profile value
        let k = (1.8 / 0.05) as usize;
        assert!((track.v[k] - 1.4).abs() < 1e-9);
        assert!((track.s[k] - track.s[k - 1] - 1.4 * 0.05).abs() < 1e-9);
    }

    #[test]
    fn ego_stays_stopped_behind_standing_object() {
        let ego_route = Path::new(vec![Vec2::new(0.0, 0.0), Vec2::new(100.0, 0.0)]).unwrap();
        let ped_route = Path::new(vec![Vec2::new(21.0, 0.0), Vec2::new(21.0, 10.0)]).unwrap();
        let mut ego = actor("ego", ego_route, Behavior::IdmControlled);
        ego.start_s = 18.5; // gap = 21 - 18.5 - 1 - 0.3 = 1.2 < s0
        ego.target_speed = 1e-3; // at rest behind the obstacle
        let mut ped = actor("ped", ped_route, Behavior::Scripted);
        ped.footprint_radius = 0.3;
        ped.target_speed = 1e-6; // effectively standing
        let scn = synthetic_scenario(vec![ego, ped]);
        let trace = simulate(
            &scn,
            &SimConfig {
                dt: 0.05,
                horizon: 5.0,
                ..Default::default()
            },
        )
        .unwrap();
        let track = trace.track("ego").unwrap();
        let moved = track.s.last().unwrap() - track.s.first().unwrap();
        assert!(moved < 1e-3, "ego crept forward by {moved}");
        assert!(track.v[10..].iter().all(|&v| v == 0.0));
    }

    #[test]
    fn horizon_sample_count() {
        let route = Path::new(vec![Vec2::new(0.0, 0.0), Vec2::new(1000.0, 0.0)]).unwrap();
        let ego = actor("ego", route, Behavior::IdmControlled);
        let scn = synthetic_scenario(vec![ego]);
        let trace = simulate(
            &scn,
            &SimConfig {
                dt: 0.05,
                horizon: 0.1,
                ..Default::default()
            },
        )
        .unwrap();
        assert_eq!(trace.len(), 3); // t = 0, 0.05, 0.1
        assert_eq!(trace.termination, Termination::Horizon);
    }

    #[test]
    fn traces_are_bitwise_deterministic() {
        let scn = crate::scenario::load_scenario_library(ScenarioId::A)
            .unwrap()
            .instantiate(&[3, 120, 17])
            .unwrap();
        let cfg = SimConfig::default();
        let t1 = simulate(&scn, &cfg).unwrap();
        let t2 = simulate(&scn, &cfg).unwrap();
        assert_eq!(t1.len(), t2.len());
        for (a, b) in t1.tracks.iter().zip(&t2.tracks) {
            assert!(a.s == b.s && a.v == b.v, "trace differs for {}", a.id);
        }
    }

    #[test]
    fn scenario_a_ego_trace_ignores_car_speed() {
        // The car's route never enters the ego corridor in scenario A, so
        // the ego trace must be bit-identical across car-speed cells.
        let logical = crate::scenario::load_scenario_library(ScenarioId::A).unwrap();
        let cfg = SimConfig::default();
        let ego_track = |car_k: usize| {
            let scn = logical.instantiate(&[6, 140, car_k]).unwrap();
            let trace = simulate(&scn, &cfg).unwrap();
            let t = trace.track("ego").unwrap();
            (t.s.clone(), t.v.clone())
        };
        let base = ego_track(0);
        for car_k in [13, 28, 49] {
            assert_eq!(ego_track(car_k), base, "car speed leaked into the ego");
        }
    }

    #[test]
    fn kinematic_consistency_across_a_full_scenario() {
        let scn = crate::scenario::load_scenario_library(ScenarioId::B)
            .unwrap()
            .instantiate(&[10, 60, 44])
            .unwrap();
        let trace = simulate(&scn, &SimConfig::default()).unwrap();
        for track in &trace.tracks {
            for k in 0..track.s.len() - 1 {
                let residual = track.s[k + 1] - track.s[k] - track.v[k + 1] * trace.dt;
                assert!(
                    residual.abs() <= 1e-9,
                    "Euler contract broken for {} at step {k}: {residual}",
                    track.id
                );
            }
        }
    }

    #[test]
    fn halving_dt_halves_arrival_error() {
        // Standing start on a free road; the delay of 0.1 s is a step
        // boundary for all three dt values so activation happens at the same
        // simulated time everywhere.
        let route = Path::new(vec![Vec2::new(0.0, 0.0), Vec2::new(200.0, 0.0)]).unwrap();
        let mut ego = actor("ego", route, Behavior::IdmControlled);
        ego.target_speed = 10.0;
        ego.start_delay = 0.1;
        let scn = synthetic_scenario(vec![ego]);
        // crossing time of s = 90 m, interpolated consistently with the
        // piecewise-linear integrator motion
        let arrival = |dt: f64| {
            let cfg = SimConfig {
                dt,
                horizon: 30.0,
                ..Default::default()
            };
            let trace = simulate(&scn, &cfg).unwrap();
            let track = trace.track("ego").unwrap();
            let k = track.s.iter().position(|&s| s >= 90.0).unwrap();
            trace.time(k - 1) + (90.0 - track.s[k - 1]) / track.v[k]
        };
        let (t1, t2, t3) = (arrival(0.1), arrival(0.05), arrival(0.025));
        let d1 = (t1 - t2).abs();
        let d2 = (t2 - t3).abs();
        assert!(d2 > 0.0, "no refinement visible");
        let ratio = d1 / d2;
        assert!((1.5..=2.5).contains(&ratio), "convergence ratio {ratio}");
    }
}
