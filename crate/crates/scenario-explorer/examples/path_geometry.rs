//! Arc-length paths, curvature estimation, and conflict regions.
//!
//! ```bash
//! cargo run --example path_geometry
//! ```

use scenario_explorer::conflict::conflict_region;
use scenario_explorer::geom::{Path, PathBuilder, Vec2};

fn main() {
    // A right-turn-like path: straight approach, quarter circle of radius 6,
    // straight exit.
    let path = PathBuilder::new(Vec2::new(0.0, -40.0))
        .line_to(Vec2::new(0.0, -6.0))
        .arc(Vec2::new(6.0, -6.0), 6.0, 180.0, 90.0, 1.0)
        .line_to(Vec2::new(40.0, 0.0))
        .build()
        .unwrap();

    println!("path length: {:.2} m", path.length());
    println!("{:>8} {:>8} {:>8} {:>10}", "s", "x", "y", "curvature");
    for i in 0..=10 {
        let s = path.length() * i as f64 / 10.0;
        let st = path.state_at(s).unwrap();
        println!(
            "{:8.2} {:8.2} {:8.2} {:10.4}",
            s, st.position.x, st.position.y, st.curvature
        );
    }

    // Projection: where does a point land on the path?
    let p = Vec2::new(10.0, 2.0);
    let (s, d) = path.project(p);
    println!(
        "\nproject ({}, {}) -> s = {s:.2} m, lateral distance {d:.2} m",
        p.x, p.y
    );

    // Conflict region of two crossing corridors.
    let crossing = Path::new(vec![Vec2::new(20.0, -15.0), Vec2::new(20.0, 15.0)]).unwrap();
    match conflict_region(&path, &crossing, 2.0, 0.6) {
        Some(region) => {
            println!("\nconflict with the crossing path:");
            println!(
                "  on the turn path: s in [{:.2}, {:.2}]",
                region.span_a.0, region.span_a.1
            );
            println!(
                "  on the crossing:  s in [{:.2}, {:.2}]",
                region.span_b.0, region.span_b.1
            );
            println!("  footprint polygon has {} corners", region.polygon.len());
        }
        None => println!("\nno conflict region"),
    }

    // Parallel corridors far apart never conflict.
    let far = Path::new(vec![Vec2::new(0.0, 20.0), Vec2::new(40.0, 20.0)]).unwrap();
    assert!(conflict_region(&path, &far, 2.0, 2.0).is_none());
    println!("distant parallel path: no conflict region, as expected");
}
