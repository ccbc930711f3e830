//! Scenario-level criticality metrics.
//!
//! All five metrics score one actor pair over a whole simulation trace and
//! are minimized: the smaller the value, the more critical the scenario.
//! Pairs that cannot interact (no conflict region, no reachable collision)
//! receive a finite sentinel cap so that the optimizer always sees ordinary
//! numbers; capped results are flagged and never rank as more critical than
//! an uncapped one.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::scenario::ConcreteScenario;
use crate::sim::{ActorTrack, SimulationTrace, Termination};

/// Sentinel cap for the time-based metrics (WTTC, gap time, PET), s.
pub const TIME_CAP: f64 = 20.0;
/// Sentinel cap for the distance-based metrics, m.
pub const DISTANCE_CAP: f64 = 200.0;
/// Speeds below this are treated as standing when predicting arrivals.
pub const MIN_PREDICTION_SPEED: f64 = 0.1;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum MetricKind {
    Euclidean,
    Trajectory,
    Wttc,
    GapTime,
    Pet,
}

impl MetricKind {
    pub const ALL: [MetricKind; 5] = [
        MetricKind::Euclidean,
        MetricKind::Trajectory,
        MetricKind::Wttc,
        MetricKind::GapTime,
        MetricKind::Pet,
    ];

    pub fn as_str(&self) -> &'static str {
        match self {
            MetricKind::Euclidean => "euclidean",
            MetricKind::Trajectory => "trajectory",
            MetricKind::Wttc => "wttc",
            MetricKind::GapTime => "gap_time",
            MetricKind::Pet => "pet",
        }
    }

    /// Sentinel for non-interacting pairs, in this metric's unit.
    pub fn cap(&self) -> f64 {
        match self {
            MetricKind::Euclidean | MetricKind::Trajectory => DISTANCE_CAP,
            _ => TIME_CAP,
        }
    }
}

impl fmt::Display for MetricKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for MetricKind {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "euclidean" => Ok(MetricKind::Euclidean),
            "trajectory" => Ok(MetricKind::Trajectory),
            "wttc" => Ok(MetricKind::Wttc),
            "gap_time" | "gt" => Ok(MetricKind::GapTime),
            "pet" => Ok(MetricKind::Pet),
            other => Err(Error::UnknownMetric(other.to_string())),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MetricResult {
    pub kind: MetricKind,
    pub value: f64,
    /// Time of the minimizing sample, absent on capped results.
    pub argmin_t: Option<f64>,
    /// True when the sentinel cap applied (no interaction observed).
    pub capped: bool,
}

impl MetricResult {
    fn capped(kind: MetricKind) -> Self {
        MetricResult {
            kind,
            value: kind.cap(),
            argmin_t: None,
            capped: true,
        }
    }

    /// Cap-aware wrap-up of a scanned minimum.
    fn from_min(kind: MetricKind, best: Option<(f64, f64)>) -> Self {
        match best {
            Some((value, t)) if value < kind.cap() => MetricResult {
                kind,
                value,
                argmin_t: Some(t),
                capped: false,
            },
            _ => MetricResult::capped(kind),
        }
    }
}

/// Entry/exit arc coordinates of a conflict region, per actor:
/// `((entry_a, exit_a), (entry_b, exit_b))`.
pub type PairSpans = ((f64, f64), (f64, f64));

fn common_len(a: &ActorTrack, b: &ActorTrack) -> usize {
    a.s.len().min(b.s.len())
}

/// Minimum center distance over all common timesteps.
pub fn euclidean_min(trace: &SimulationTrace, a: &str, b: &str) -> Result<MetricResult> {
    let (ta, tb) = (trace.track(a)?, trace.track(b)?);
    let mut best: Option<(f64, f64)> = None;
    for k in 0..common_len(ta, tb) {
        let d = ta.pos[k].distance(tb.pos[k]);
        if best.is_none_or(|(v, _)| d < v) {
            best = Some((d, trace.time(k)));
        }
    }
    Ok(MetricResult::from_min(MetricKind::Euclidean, best))
}

/// Minimum summed along-route distance to the shared conflict region, over
/// timesteps where neither actor has passed its region exit. Zero when both
/// are inside the region simultaneously.
pub fn trajectory_min(
    trace: &SimulationTrace,
    a: &str,
    b: &str,
    spans: Option<PairSpans>,
) -> Result<MetricResult> {
    let (ta, tb) = (trace.track(a)?, trace.track(b)?);
    let Some(((entry_a, exit_a), (entry_b, exit_b))) = spans else {
        return Ok(MetricResult::capped(MetricKind::Trajectory));
    };
    let mut best: Option<(f64, f64)> = None;
    for k in 0..common_len(ta, tb) {
        let (sa, sb) = (ta.s[k], tb.s[k]);
        if sa > exit_a || sb > exit_b {
            continue;
        }
        let d = (entry_a - sa).max(0.0) + (entry_b - sb).max(0.0);
        if best.is_none_or(|(v, _)| d < v) {
            best = Some((d, trace.time(k)));
        }
    }
    Ok(MetricResult::from_min(MetricKind::Trajectory, best))
}

/// Worst-time-to-collision at one timestep: the earliest τ at which the
/// worst-case motion envelopes (current speeds plus maximal accelerations)
/// can close the gap. Zero when the footprints already overlap.
fn wttc_at(gap: f64, v_sum: f64, a_sum: f64) -> Option<f64> {
    if gap <= 0.0 {
        return Some(0.0);
    }
    if a_sum > 0.0 {
        Some((-v_sum + (v_sum * v_sum + 2.0 * a_sum * gap).sqrt()) / a_sum)
    } else if v_sum > 0.0 {
        Some(gap / v_sum)
    } else {
        None
    }
}

/// Minimum worst-time-to-collision over the trace.
pub fn wttc_min(
    trace: &SimulationTrace,
    a: &str,
    b: &str,
    radii: (f64, f64),
    max_accel: (f64, f64),
) -> Result<MetricResult> {
    let (ta, tb) = (trace.track(a)?, trace.track(b)?);
    let r_sum = radii.0 + radii.1;
    let a_sum = max_accel.0 + max_accel.1;
    let mut best: Option<(f64, f64)> = None;
    for k in 0..common_len(ta, tb) {
        let gap = ta.pos[k].distance(tb.pos[k]) - r_sum;
        if let Some(tau) = wttc_at(gap, ta.v[k] + tb.v[k], a_sum) {
            if best.is_none_or(|(v, _)| tau < v) {
                best = Some((tau, trace.time(k)));
            }
        }
    }
    Ok(MetricResult::from_min(MetricKind::Wttc, best))
}

/// Minimum predicted arrival-time difference at the conflict region, over
/// timesteps where both actors are still before their entries and moving.
pub fn gap_time_min(
    trace: &SimulationTrace,
    a: &str,
    b: &str,
    spans: Option<PairSpans>,
) -> Result<MetricResult> {
    let (ta, tb) = (trace.track(a)?, trace.track(b)?);
    let Some(((entry_a, _), (entry_b, _))) = spans else {
        return Ok(MetricResult::capped(MetricKind::GapTime));
    };
    let mut best: Option<(f64, f64)> = None;
    for k in 0..common_len(ta, tb) {
        let (sa, sb) = (ta.s[k], tb.s[k]);
        let (va, vb) = (ta.v[k], tb.v[k]);
        if sa >= entry_a || sb >= entry_b {
            continue;
        }
        if va <= MIN_PREDICTION_SPEED || vb <= MIN_PREDICTION_SPEED {
            continue;
        }
        let gt = ((entry_a - sa) / va - (entry_b - sb) / vb).abs();
        if best.is_none_or(|(v, _)| gt < v) {
            best = Some((gt, trace.time(k)));
        }
    }
    Ok(MetricResult::from_min(MetricKind::GapTime, best))
}

/// Occupancy window of a track inside `[entry - r, exit + r]`, as
/// (first, last) sample times.
fn occupancy(
    trace: &SimulationTrace,
    track: &ActorTrack,
    span: (f64, f64),
    r: f64,
) -> Option<(f64, f64)> {
    let (lo, hi) = (span.0 - r, span.1 + r);
    let mut window: Option<(f64, f64)> = None;
    for (k, &s) in track.s.iter().enumerate() {
        if s >= lo && s <= hi {
            let t = trace.time(k);
            window = Some(match window {
                None => (t, t),
                Some((first, _)) => (first, t),
            });
        }
    }
    window
}

/// Post-encroachment time: measured time between one actor leaving the
/// conflict region and the other entering it. Zero when their occupancy
/// overlaps; capped when either never reaches the region.
pub fn pet(
    trace: &SimulationTrace,
    a: &str,
    b: &str,
    spans: Option<PairSpans>,
    radii: (f64, f64),
) -> Result<MetricResult> {
    let (ta, tb) = (trace.track(a)?, trace.track(b)?);
    let Some((span_a, span_b)) = spans else {
        return Ok(MetricResult::capped(MetricKind::Pet));
    };
    let (Some(win_a), Some(win_b)) = (
        occupancy(trace, ta, span_a, radii.0),
        occupancy(trace, tb, span_b, radii.1),
    ) else {
        return Ok(MetricResult::capped(MetricKind::Pet));
    };
    if win_a.0 <= win_b.1 && win_b.0 <= win_a.1 {
        // simultaneous encroachment
        let t = win_a.0.max(win_b.0);
        return Ok(MetricResult {
            kind: MetricKind::Pet,
            value: 0.0,
            argmin_t: Some(t),
            capped: false,
        });
    }
    let (gap, later_entry) = if win_b.0 > win_a.1 {
        (win_b.0 - win_a.1, win_b.0)
    } else {
        (win_a.0 - win_b.1, win_a.0)
    };
    Ok(MetricResult::from_min(
        MetricKind::Pet,
        Some((gap, later_entry)),
    ))
}

/// Evaluate one metric for an actor pair of a simulated concrete scenario.
///
/// A trace terminated by a collision *between the scored pair* is maximally
/// critical for the time-based metrics (value 0 at the collision time); the
/// distance metrics keep their measured minima. Collisions with third
/// actors just truncate the trace — criticality between other participants
/// is not attributed to this pair.
pub fn evaluate(
    kind: MetricKind,
    trace: &SimulationTrace,
    scenario: &ConcreteScenario,
    pair: (&str, &str),
) -> Result<MetricResult> {
    let (a, b) = pair;
    let spec_a = scenario.actor(a)?;
    let spec_b = scenario.actor(b)?;
    if let Termination::Collision {
        a: ref hit_a,
        b: ref hit_b,
        time,
    } = trace.termination
    {
        let same_pair = (hit_a == a && hit_b == b) || (hit_a == b && hit_b == a);
        if same_pair
            && matches!(
                kind,
                MetricKind::Wttc | MetricKind::GapTime | MetricKind::Pet
            )
        {
            return Ok(MetricResult {
                kind,
                value: 0.0,
                argmin_t: Some(time),
                capped: false,
            });
        }
    }
    let spans = scenario.regions().spans(a, b);
    let radii = (spec_a.footprint_radius, spec_b.footprint_radius);
    match kind {
        MetricKind::Euclidean => euclidean_min(trace, a, b),
        MetricKind::Trajectory => trajectory_min(trace, a, b, spans),
        MetricKind::Wttc => wttc_min(trace, a, b, radii, (spec_a.max_accel, spec_b.max_accel)),
        MetricKind::GapTime => gap_time_min(trace, a, b, spans),
        MetricKind::Pet => pet(trace, a, b, spans, radii),
    }
}
