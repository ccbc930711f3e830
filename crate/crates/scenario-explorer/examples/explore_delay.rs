//! End-to-end exploration of a one-dimensional search space: the bundled
//! Experiment-1 configuration for scenario A (only the pedestrian delay is
//! free) against the exhaustive ground truth.
//!
//! ```bash
//! cargo run --example explore_delay
//! ```

use scenario_explorer::explore::{explore, grid_oracle, parse_config};

fn main() {
    let tmp = std::env::temp_dir().join("scenario-explorer-example-delay");
    // resolve the bundled config relative to the workspace root
    let config = std::path::Path::new(env!("CARGO_MANIFEST_DIR")).join("../../configs/exp1_a.toml");

    std::env::set_var("SCENARIO_EXPLORER_OUT", &tmp);
    let cfg = parse_config(&config).unwrap();
    println!(
        "scenario {}, metric {}, searching {} free dim(s), budget {}",
        cfg.scenario.id,
        cfg.metric,
        cfg.free_dims().len(),
        cfg.budget
    );
    for o in &cfg.overrides {
        let d = &cfg.scenario.grid.dims()[o.dim];
        println!(
            "  fixed {} = {} (lattice cell {})",
            d.name, o.effective, o.k
        );
    }

    let report = explore(&cfg).unwrap();
    println!(
        "\nincumbent after {} evaluations: {:.4} at delay {:.3} s",
        report.totals.evaluations, report.incumbent.value, report.incumbent.values[0]
    );

    // exhaustive truth over all 50 delay cells
    let records = grid_oracle(&cfg, &[1, 1, 1]).unwrap();
    let best = records
        .iter()
        .min_by(|a, b| a.value.total_cmp(&b.value))
        .unwrap();
    println!(
        "exhaustive minimum over {} cells: {:.4} at delay {:.3} s",
        records.len(),
        best.value,
        best.values[0]
    );
    println!(
        "exploration found the global minimum: {}",
        (report.incumbent.value - best.value).abs() < 1e-12
    );
    println!("\nartifacts in {}", tmp.display());
}
