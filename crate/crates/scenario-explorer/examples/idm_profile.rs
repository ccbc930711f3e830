//! The curvature-aware IDM in isolation: a single vehicle approaches a tight
//! curve and the controller brakes toward the cornering speed limit ahead of
//! time, then accelerates back out.
//!
//! ```bash
//! cargo run --example idm_profile
//! ```

use std::sync::Arc;

use scenario_explorer::geom::{PathBuilder, Vec2};
use scenario_explorer::scenario::{ActorKind, ActorSpec, Behavior, ConcreteScenario, ScenarioId};
use scenario_explorer::sim::{curvature_virtual_object, simulate, IdmParams, SimConfig};

fn main() {
    // 60 m straight, a radius-8 quarter circle, 40 m straight out.
    let route = PathBuilder::new(Vec2::new(0.0, 0.0))
        .line_to(Vec2::new(60.0, 0.0))
        .arc(Vec2::new(60.0, 8.0), 8.0, -90.0, 0.0, 1.0)
        .line_to(Vec2::new(68.0, 48.0))
        .build()
        .unwrap();

    let idm = IdmParams::default();
    let v_lim = (idm.max_lat_accel * 8.0).sqrt();
    println!("curve speed limit: sqrt(a_lat_max * R) = {v_lim:.2} m/s");

    // What the controller sees from the start line.
    if let Some(obj) = curvature_virtual_object(&route, 20.0, &idm) {
        println!(
            "from s = 20 m: curvature object {:.1} m ahead, limit {:.2} m/s\n",
            obj.gap, obj.speed_along_path
        );
    }

    let ego = ActorSpec {
        id: "ego".into(),
        kind: ActorKind::Ego,
        route: Arc::new(route),
        behavior: Behavior::IdmControlled,
        start_s: 0.0,
        start_delay: 0.0,
        target_speed: 12.0,
        footprint_radius: 1.0,
        max_accel: 3.0,
        ramp_accel: 2.0,
    };
    let scenario = ConcreteScenario::from_actors(ScenarioId::A, vec![ego]).unwrap();
    let trace = simulate(&scenario, &SimConfig::default()).unwrap();
    let track = trace.track("ego").unwrap();

    println!("{:>6} {:>8} {:>8}", "t", "s", "v");
    for k in (0..trace.len()).step_by(20) {
        println!(
            "{:6.1} {:8.2} {:8.2}",
            trace.time(k),
            track.s[k],
            track.v[k]
        );
    }
    let v_on_curve = track
        .s
        .iter()
        .zip(&track.v)
        .filter(|(&s, _)| s > 62.0 && s < 70.0)
        .map(|(_, &v)| v)
        .fold(0.0f64, f64::max);
    println!("\nfastest speed on the curve: {v_on_curve:.2} m/s (limit {v_lim:.2})");
    println!("termination: {:?}", trace.termination);
}
