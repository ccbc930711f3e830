//! Built-in scenario layouts.
//!
//! All four bundled scenarios share one four-way right-angle intersection
//! with 3.5 m lanes centered at x = ±1.75 / y = ±1.75 and arms reaching
//! ±80 m. The ego approaches from the south on the northbound lane and turns
//! right (A) or left (B); a pedestrian crosses the ego's exit arm on a
//! crosswalk, a truck drives the eastbound through lane, and a car crosses
//! southbound. The A3/B3 variants replace the pedestrian-delay dimension
//! with the car's start position.
//!
//! The canonical definitions live in the `assets/*.toml` files; this module
//! is the generator they were produced from and a guard test keeps the two
//! in sync.

use std::sync::Arc;

use super::{
    ActorKind, ActorSpec, Behavior, BindableField, Binding, LogicalScenario, ParameterDim,
    ParameterGrid, ScenarioId,
};
use crate::error::Result;
use crate::geom::{Path, PathBuilder, Vec2};

/// Offset of a lane center from the road axis (3.5 m lanes).
const LANE_OFFSET: f64 = 1.75;
/// How far each arm of the intersection extends, m.
const ARM_LENGTH: f64 = 80.0;
const RIGHT_TURN_RADIUS: f64 = 6.0;
const LEFT_TURN_RADIUS: f64 = 8.0;
/// Distance of the crosswalk center from the intersection center, m.
const CROSSWALK_OFFSET: f64 = 9.0;
/// The crosswalk spans the road plus a curb margin on both sides.
const CROSSWALK_REACH: f64 = 7.0;
/// Arc sampling step; keeps vertex spacing well under R/50 so curvature
/// estimates stay within 1% of 1/R.
const ARC_STEP_DEG: f64 = 1.0;

/// Ego route for scenario A: northbound, right turn, eastbound exit.
fn ego_route_right_turn() -> Result<Path> {
    let turn_start_y = -LANE_OFFSET - RIGHT_TURN_RADIUS;
    PathBuilder::new(Vec2::new(LANE_OFFSET, -ARM_LENGTH))
        .line_to(Vec2::new(LANE_OFFSET, turn_start_y))
        .arc(
            Vec2::new(LANE_OFFSET + RIGHT_TURN_RADIUS, turn_start_y),
            RIGHT_TURN_RADIUS,
            180.0,
            90.0,
            ARC_STEP_DEG,
        )
        .line_to(Vec2::new(ARM_LENGTH, -LANE_OFFSET))
        .build()
}

/// Ego route for scenario B: northbound, left turn, westbound exit.
fn ego_route_left_turn() -> Result<Path> {
    let turn_start_y = -LEFT_TURN_RADIUS + LANE_OFFSET;
    PathBuilder::new(Vec2::new(LANE_OFFSET, -ARM_LENGTH))
        .line_to(Vec2::new(LANE_OFFSET, turn_start_y))
        .arc(
            Vec2::new(LANE_OFFSET - LEFT_TURN_RADIUS, turn_start_y),
            LEFT_TURN_RADIUS,
            0.0,
            90.0,
            ARC_STEP_DEG,
        )
        .line_to(Vec2::new(-ARM_LENGTH, LANE_OFFSET))
        .build()
}

/// Crosswalk on the ego's exit arm, walked south to north.
fn pedestrian_route(crosswalk_x: f64) -> Result<Path> {
    Path::new(vec![
        Vec2::new(crosswalk_x, -CROSSWALK_REACH),
        Vec2::new(crosswalk_x, CROSSWALK_REACH),
    ])
}

/// Southbound through lane, crossing the intersection top to bottom.
fn car_route() -> Result<Path> {
    Path::new(vec![
        Vec2::new(-LANE_OFFSET, ARM_LENGTH),
        Vec2::new(-LANE_OFFSET, -ARM_LENGTH),
    ])
}

/// Eastbound through lane.
fn truck_route() -> Result<Path> {
    Path::new(vec![
        Vec2::new(-ARM_LENGTH, -LANE_OFFSET),
        Vec2::new(ARM_LENGTH, -LANE_OFFSET),
    ])
}

fn actors(id: ScenarioId) -> Result<Vec<ActorSpec>> {
    let (ego_route, crosswalk_x) = match id {
        ScenarioId::A | ScenarioId::A3 => (ego_route_right_turn()?, CROSSWALK_OFFSET),
        ScenarioId::B | ScenarioId::B3 => (ego_route_left_turn()?, -CROSSWALK_OFFSET),
    };
    // In A the truck shares the ego's exit lane, so it stays far enough back
    // that a crosswalk stop never puts the ego in its blind path; in B the
    // routes only cross and an earlier truck creates the interesting yields.
    let truck_start_s = match id {
        ScenarioId::A | ScenarioId::A3 => 40.0,
        ScenarioId::B | ScenarioId::B3 => 60.0,
    };
    Ok(vec![
        ActorSpec {
            id: "ego".into(),
            kind: ActorKind::Ego,
            route: Arc::new(ego_route),
            behavior: Behavior::IdmControlled,
            start_s: 50.0,
            start_delay: 0.0,
            target_speed: 12.0,
            footprint_radius: 1.0,
            max_accel: 3.0,
            ramp_accel: 2.0,
        },
        ActorSpec {
            id: "pedestrian".into(),
            kind: ActorKind::Pedestrian,
            route: Arc::new(pedestrian_route(crosswalk_x)?),
            behavior: Behavior::Scripted,
            start_s: 0.0,
            start_delay: 0.0,
            target_speed: 1.4,
            footprint_radius: 0.3,
            max_accel: 1.5,
            ramp_accel: 1.0,
        },
        ActorSpec {
            id: "car".into(),
            kind: ActorKind::Vehicle,
            route: Arc::new(car_route()?),
            behavior: Behavior::Scripted,
            start_s: 40.0,
            start_delay: 0.0,
            target_speed: 15.0,
            footprint_radius: 1.0,
            max_accel: 3.0,
            ramp_accel: 2.0,
        },
        ActorSpec {
            id: "truck".into(),
            kind: ActorKind::Truck,
            route: Arc::new(truck_route()?),
            behavior: Behavior::Scripted,
            start_s: truck_start_s,
            start_delay: 0.0,
            target_speed: 8.0,
            footprint_radius: 1.5,
            max_accel: 2.0,
            ramp_accel: 2.0,
        },
    ])
}

fn dim_pedestrian_delay() -> Result<ParameterDim> {
    ParameterDim::new("pedestrian_delay", 0.0, 7.0, 50)
}

fn dim_ego_start() -> Result<ParameterDim> {
    ParameterDim::new("ego_start_s", 27.99, 77.99, 250)
}

fn dim_car_speed() -> Result<ParameterDim> {
    ParameterDim::new("car_speed", 12.5, 30.0, 50)
}

fn dim_car_start_y() -> Result<ParameterDim> {
    ParameterDim::new("car_start_y", 15.0, 50.0, 50)
}

fn binding(dim: &str, actor: &str, field: BindableField) -> Binding {
    Binding {
        dim: dim.into(),
        actor: actor.into(),
        field,
        scale: 1.0,
        offset: 0.0,
    }
}

/// Construct one of the bundled scenarios programmatically. The embedded
/// asset files are generated from this and take precedence at load time.
pub fn builtin_scenario(id: ScenarioId) -> Result<LogicalScenario> {
    let actors = actors(id)?;
    let (description, dims, mut bindings): (&str, Vec<ParameterDim>, Vec<Binding>) = match id {
        ScenarioId::A => (
            "Ego turns right at a four-way intersection, crossing the pedestrian crosswalk \
             and the truck's through lane but not the car's lane. Search over pedestrian \
             delay, ego start position, and car speed limit.",
            vec![dim_pedestrian_delay()?, dim_ego_start()?, dim_car_speed()?],
            vec![
                binding("pedestrian_delay", "pedestrian", BindableField::StartDelay),
                binding("ego_start_s", "ego", BindableField::StartS),
                binding("car_speed", "car", BindableField::TargetSpeed),
            ],
        ),
        ScenarioId::B => (
            "Ego turns left at a four-way intersection, crossing the pedestrian crosswalk, \
             the truck's lane, and the car's lane. Search over pedestrian delay, ego start \
             position, and car speed limit.",
            vec![dim_pedestrian_delay()?, dim_ego_start()?, dim_car_speed()?],
            vec![
                binding("pedestrian_delay", "pedestrian", BindableField::StartDelay),
                binding("ego_start_s", "ego", BindableField::StartS),
                binding("car_speed", "car", BindableField::TargetSpeed),
            ],
        ),
        ScenarioId::A3 => (
            "Scenario A layout with the pedestrian crossing immediately; the search runs \
             over ego start position, car speed limit, and the car's start y-coordinate.",
            vec![dim_ego_start()?, dim_car_speed()?, dim_car_start_y()?],
            vec![
                binding("ego_start_s", "ego", BindableField::StartS),
                binding("car_speed", "car", BindableField::TargetSpeed),
                binding("car_start_y", "car", BindableField::StartS),
            ],
        ),
        ScenarioId::B3 => (
            "Scenario B layout with the pedestrian crossing immediately; the search runs \
             over ego start position, car speed limit, and the car's start y-coordinate.",
            vec![dim_ego_start()?, dim_car_speed()?, dim_car_start_y()?],
            vec![
                binding("ego_start_s", "ego", BindableField::StartS),
                binding("car_speed", "car", BindableField::TargetSpeed),
                binding("car_start_y", "car", BindableField::StartS),
            ],
        ),
    };
    // The car route runs southbound from y = +ARM_LENGTH, so a start
    // y-coordinate maps to arc length as s = ARM_LENGTH - y.
    for b in &mut bindings {
        if b.dim == "car_start_y" {
            b.scale = -1.0;
            b.offset = ARM_LENGTH;
        }
    }
    let grid = ParameterGrid::new(dims)?;
    LogicalScenario::new(id, description.to_string(), actors, grid, bindings)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scenario::{load_scenario_library, ScenarioFile};

    #[test]
    fn bundled_assets_match_builder() {
        for id in ScenarioId::ALL {
            let built = ScenarioFile::from_logical(&builtin_scenario(id).unwrap());
            let loaded = ScenarioFile::from_logical(&load_scenario_library(id).unwrap());
            assert_eq!(built, loaded, "asset file for scenario {id} is out of date");
        }
    }

    /// Regenerates the asset files from the builder. Run explicitly:
    /// `cargo test -p scenario-explorer regen_scenario_assets -- --ignored`
    #[test]
    #[ignore]
    fn regen_scenario_assets() {
        let dir = std::path::Path::new(env!("CARGO_MANIFEST_DIR")).join("src/scenario/assets");
        std::fs::create_dir_all(&dir).unwrap();
        for id in ScenarioId::ALL {
            let file = ScenarioFile::from_logical(&builtin_scenario(id).unwrap());
            let name = format!("scenario_{}.toml", id.to_string().to_lowercase());
            std::fs::write(dir.join(name), file.to_toml()).unwrap();
        }
    }

    #[test]
    fn scenario_a_has_no_ego_car_conflict() {
        let s = builtin_scenario(ScenarioId::A).unwrap();
        assert!(s.regions().get("ego", "car").is_none());
        assert!(s.regions().get("ego", "pedestrian").is_some());
        assert!(s.regions().get("ego", "truck").is_some());
    }

    #[test]
    fn scenario_b_conflicts_with_all_three() {
        let s = builtin_scenario(ScenarioId::B).unwrap();
        for other in ["pedestrian", "car", "truck"] {
            assert!(
                s.regions().get("ego", other).is_some(),
                "expected ego-{other} conflict"
            );
        }
    }

    #[test]
    fn experiment3_grid_shape() {
        let s = builtin_scenario(ScenarioId::A3).unwrap();
        let names: Vec<_> = s.grid.dims().iter().map(|d| d.name.as_str()).collect();
        assert_eq!(names, ["ego_start_s", "car_speed", "car_start_y"]);
        assert_eq!(s.grid.shape(), vec![250, 50, 50]);
        assert_eq!(s.grid.cardinality(), 625_000);
        let d = &s.grid.dims()[2];
        assert_eq!((d.min, d.max), (15.0, 50.0));
    }

    #[test]
    fn car_start_binding_maps_y_to_arc_length() {
        let s = builtin_scenario(ScenarioId::A3).unwrap();
        // car_start_y = 50 -> s = 30; car_start_y = 15 -> s = 65
        let c = s.instantiate(&[0, 0, 49]).unwrap();
        assert!((c.actor("car").unwrap().start_s - (ARM_LENGTH - 50.0)).abs() < 1e-9);
        let c = s.instantiate(&[0, 0, 0]).unwrap();
        assert!((c.actor("car").unwrap().start_s - (ARM_LENGTH - 15.0)).abs() < 1e-9);
    }

    #[test]
    fn instantiate_binds_all_dims() {
        let s = builtin_scenario(ScenarioId::A).unwrap();
        let c = s.instantiate(&[0, 160, 7]).unwrap();
        assert_eq!(c.actor("pedestrian").unwrap().start_delay, 0.0);
        let ego_s = c.actor("ego").unwrap().start_s;
        assert!((ego_s - (27.99 + 160.0 * 50.0 / 249.0)).abs() < 1e-9);
        assert!((c.actor("car").unwrap().target_speed - 15.0).abs() < 1e-9);
    }
}
