//! The five criticality metrics on a benign and a critical parameter set of
//! the same logical scenario. All metrics are minimized: smaller = closer to
//! an accident.
//!
//! ```bash
//! cargo run --example criticality_metrics
//! ```

use scenario_explorer::metrics::{evaluate, MetricKind};
use scenario_explorer::scenario::{load_scenario_library, ScenarioId};
use scenario_explorer::sim::{simulate, SimConfig};

fn main() {
    let logical = load_scenario_library(ScenarioId::A).unwrap();
    let cfg = SimConfig::default();

    // delay index 0 puts the pedestrian on the crosswalk exactly when the
    // ego arrives; a long delay lets the ego pass first
    let cases = [("critical", [0usize, 159, 7]), ("benign", [45, 159, 7])];

    for (label, index) in cases {
        let concrete = logical.instantiate(&index).unwrap();
        let trace = simulate(&concrete, &cfg).unwrap();
        println!("{label} cell {index:?} ({:?})", trace.termination);
        println!(
            "  {:<11} {:>10}  {:>9}  {}",
            "metric", "value", "argmin t", "capped"
        );
        for kind in MetricKind::ALL {
            let r = evaluate(kind, &trace, &concrete, ("ego", "pedestrian")).unwrap();
            println!(
                "  {:<11} {:>10.4}  {:>9}  {}",
                kind.to_string(),
                r.value,
                r.argmin_t.map_or("-".into(), |t| format!("{t:.2}")),
                r.capped
            );
        }
        println!();
    }

    // The ego and the car never share road space in scenario A, so metrics
    // needing a conflict region cap out for that pair.
    let concrete = logical.instantiate(&[0, 159, 7]).unwrap();
    let trace = simulate(&concrete, &cfg).unwrap();
    let pet = evaluate(MetricKind::Pet, &trace, &concrete, ("ego", "car")).unwrap();
    println!(
        "ego-car PET in scenario A: {:.1} (capped = {}, no shared conflict region)",
        pet.value, pet.capped
    );
}
