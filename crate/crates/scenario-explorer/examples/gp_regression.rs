//! Gaussian-process regression on random cosine features: evidence-based
//! hyperparameter selection and posterior quality on a known function.
//!
//! ```bash
//! cargo run --example gp_regression
//! ```

use scenario_explorer::gp::{
    fit, log_marginal_likelihood, sample_feature_map, tune, KernelConfig, Observation, TuneGrid,
};

fn target(x: f64) -> f64 {
    (std::f64::consts::TAU * x).sin()
}

fn main() {
    // 20 noiseless samples of sin(2 pi x) on [0, 1]
    let data: Vec<Observation> = (0..20)
        .map(|i| {
            let x = i as f64 / 19.0;
            Observation {
                index: vec![i],
                x: vec![x],
                y: target(x),
            }
        })
        .collect();

    // How well do M = 2000 cosine features reproduce the exact kernel?
    let cfg = KernelConfig {
        length_scales: vec![0.3],
        signal_variance: 1.0,
        noise_variance: 1e-4,
        feature_count: 2000,
    };
    let map = sample_feature_map(&cfg, 0);
    let (x1, x2) = ([0.2], [0.5]);
    println!(
        "kernel at |x-x'| = 0.3: exact {:.4}, features {:.4}",
        cfg.exact_kernel(&x1, &x2),
        map.features(&x1).dot(&map.features(&x2))
    );

    // Evidence across the candidate length scales.
    println!("\n{:>6} {:>12} {:>12}", "ell", "ml(1e-4)", "ml(1e-2)");
    for ell in [0.05, 0.1, 0.2, 0.4, 0.8] {
        let ml = |noise: f64| {
            let c = KernelConfig {
                length_scales: vec![ell],
                signal_variance: 1.0,
                noise_variance: noise,
                feature_count: 500,
            };
            log_marginal_likelihood(&data, &c, 7).unwrap()
        };
        println!("{:6.2} {:12.2} {:12.2}", ell, ml(1e-4), ml(1e-2));
    }

    let base = KernelConfig::isotropic(1, 0.2);
    let tuned = tune(&data, &TuneGrid::default(), &base, 7).unwrap();
    println!(
        "\ntuned: ell = {}, noise = {:.0e}",
        tuned.length_scales[0], tuned.noise_variance
    );

    let post = fit(&data, &tuned, 7).unwrap();
    let mut rmse = 0.0;
    for i in 0..100 {
        let x = i as f64 / 99.0;
        let (mean, _) = post.predict(&[x]);
        rmse += (mean - target(x)).powi(2) / 100.0;
    }
    println!("posterior RMSE on a 100-point grid: {:.4}", rmse.sqrt());

    let (_, var_seen) = post.predict(&[0.5]);
    let (_, var_unseen) = post.predict(&[-0.3]);
    println!("variance at an observed point {var_seen:.2e} vs outside the data {var_unseen:.2e}");
}
