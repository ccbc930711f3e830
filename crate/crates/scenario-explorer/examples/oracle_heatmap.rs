//! Strided exhaustive sweep over the scenario-A search space and a 2-D
//! heatmap pivot of the result, the desk-scale version of running the full
//! 625,000-cell grid.
//!
//! ```bash
//! cargo run --release --example oracle_heatmap
//! ```

use scenario_explorer::explore::{export_heatmap, grid_oracle, parse_config, ORACLE_RECORDS_FILE};

fn main() {
    let tmp = std::env::temp_dir().join("scenario-explorer-example-oracle");
    let config = std::path::Path::new(env!("CARGO_MANIFEST_DIR")).join("../../configs/exp2_a.toml");

    std::env::set_var("SCENARIO_EXPLORER_OUT", &tmp);
    let cfg = parse_config(&config).unwrap();

    // strides (5, 25, 10) cut 625,000 cells down to 10 x 10 x 5 = 500
    let strides = [5usize, 25, 10];
    let records = grid_oracle(&cfg, &strides).unwrap();
    println!("swept {} cells with strides {strides:?}", records.len());

    let mut values: Vec<f64> = records.iter().map(|r| r.value).collect();
    values.sort_by(f64::total_cmp);
    println!(
        "metric {} range: min {:.4}, median {:.4}, max {:.4}",
        cfg.metric,
        values[0],
        values[values.len() / 2],
        values[values.len() - 1]
    );

    let csv = export_heatmap(
        &tmp.join(ORACLE_RECORDS_FILE),
        "pedestrian_delay",
        "ego_start_s",
    )
    .unwrap();
    let filled = csv
        .lines()
        .skip(1)
        .flat_map(|l| l.split(',').skip(1))
        .filter(|c| !c.is_empty())
        .count();
    println!(
        "heatmap: {} filled cells (delay on x, ego start on y)",
        filled
    );

    // a compact look at the critical band: the five lowest-valued cells
    println!("\nfive most critical cells:");
    let mut sorted = records.clone();
    sorted.sort_by(|a, b| a.value.total_cmp(&b.value));
    for r in sorted.iter().take(5) {
        println!(
            "  delay {:5.2} s, ego start {:6.2} m, car speed {:5.2} m/s -> {:.4}",
            r.values[0], r.values[1], r.values[2], r.value
        );
    }
    println!("\nartifacts in {}", tmp.display());
}
