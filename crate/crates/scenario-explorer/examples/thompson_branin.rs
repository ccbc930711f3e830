//! Thompson-sampling Bayesian optimization against pure random search on a
//! discretized Branin surface (50 x 50 = 2,500 cells).
//!
//! ```bash
//! cargo run --example thompson_branin
//! ```

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha12Rng;
use scenario_explorer::bo::{run, BoConfig, ObjectiveValue};
use scenario_explorer::scenario::{ParameterDim, ParameterGrid};

fn branin(x: f64, y: f64) -> f64 {
    let b = 5.1 / (4.0 * std::f64::consts::PI.powi(2));
    let c = 5.0 / std::f64::consts::PI;
    let t = 1.0 / (8.0 * std::f64::consts::PI);
    (y - b * x * x + c * x - 6.0).powi(2) + 10.0 * (1.0 - t) * x.cos() + 10.0
}

fn main() {
    let grid = ParameterGrid::new(vec![
        ParameterDim::new("x", -5.0, 10.0, 50).unwrap(),
        ParameterDim::new("y", 0.0, 15.0, 50).unwrap(),
    ])
    .unwrap();

    // exhaustive oracle (cheap here; the point of the surrogate is that the
    // real simulator is not)
    let mut all: Vec<f64> = (0..grid.cardinality())
        .map(|flat| {
            let v = grid.values(&grid.unflatten(flat).unwrap()).unwrap();
            branin(v[0], v[1])
        })
        .collect();
    all.sort_by(f64::total_cmp);
    println!("grid minimum {:.4}, 1% quantile {:.4}", all[0], all[24]);

    let budget = 100;
    let seeds = 10;
    let mut bo_best = Vec::new();
    let mut rs_best = Vec::new();
    for seed in 0..seeds {
        let records = run(
            |idx| {
                let v = grid.values(idx).unwrap();
                Ok(ObjectiveValue::new(branin(v[0], v[1])))
            },
            &grid,
            &BoConfig {
                budget,
                init_count: 8,
                seed,
                feature_count: 500,
                ..BoConfig::default()
            },
        )
        .unwrap();
        bo_best.push(records.iter().map(|r| r.value).fold(f64::MAX, f64::min));

        let mut rng = ChaCha12Rng::seed_from_u64(seed);
        let mut best = f64::MAX;
        for _ in 0..budget {
            let flat = rng.random_range(0..grid.cardinality());
            let v = grid.values(&grid.unflatten(flat).unwrap()).unwrap();
            best = best.min(branin(v[0], v[1]));
        }
        rs_best.push(best);
    }
    bo_best.sort_by(f64::total_cmp);
    rs_best.sort_by(f64::total_cmp);
    println!("\nbest value after {budget} evaluations ({seeds} seeds):");
    println!(
        "  thompson sampling: median {:.4}, worst {:.4}",
        bo_best[seeds as usize / 2],
        bo_best[seeds as usize - 1]
    );
    println!(
        "  random search:     median {:.4}, worst {:.4}",
        rs_best[seeds as usize / 2],
        rs_best[seeds as usize - 1]
    );
}
