//! Conflict regions: where two actors' inflated paths overlap.
//!
//! A path inflated by half its corridor width forms a band; where two bands
//! intersect, both actors compete for the same patch of road. The entry/exit
//! arc coordinates on each path anchor the gap-time and post-encroachment
//! metrics.

use crate::geom::{Path, Vec2};

#[derive(Debug, Clone)]
pub struct ConflictRegion {
    /// Entry/exit arc coordinates on the first path.
    pub span_a: (f64, f64),
    /// Entry/exit arc coordinates on the second path.
    pub span_b: (f64, f64),
    /// Convex footprint of the crossing area.
    pub polygon: Vec<Vec2>,
}

const SCAN_STEP: f64 = 0.25;

/// Overlap of the two corridors, or `None` when the inflated paths are
/// disjoint. Entry/exit are the first/last arc coordinates whose lateral
/// corridor touches the other path's corridor, refined by bisection.
pub fn conflict_region(
    path_a: &Path,
    path_b: &Path,
    width_a: f64,
    width_b: f64,
) -> Option<ConflictRegion> {
    let reach = (width_a + width_b) / 2.0;
    let span_a = corridor_span(path_a, path_b, reach)?;
    let span_b = corridor_span(path_b, path_a, reach)?;
    let polygon = crossing_polygon(path_a, span_a, width_a, path_b, span_b, width_b);
    Some(ConflictRegion {
        span_a,
        span_b,
        polygon,
    })
}

/// First/last `s` on `path` whose distance to `other` is at most `reach`.
fn corridor_span(path: &Path, other: &Path, reach: f64) -> Option<(f64, f64)> {
    let len = path.length();
    let inside = |s: f64| -> bool {
        let p = path.state_at(s).expect("s within length").position;
        other.project(p).1 <= reach
    };
    let n = (len / SCAN_STEP).ceil() as usize;
    let sample = |i: usize| (i as f64 * SCAN_STEP).min(len);

    let mut first_in: Option<usize> = None;
    let mut last_in = 0;
    for i in 0..=n {
        if inside(sample(i)) {
            if first_in.is_none() {
                first_in = Some(i);
            }
            last_in = i;
        }
    }
    let first_in = first_in?;

    let entry = if first_in == 0 {
        0.0
    } else {
        bisect_boundary(sample(first_in - 1), sample(first_in), &inside)
    };
    let exit = if last_in == n {
        len
    } else {
        let s = bisect_boundary(sample(last_in + 1), sample(last_in), &inside);
        s.min(len)
    };
    Some((entry, exit))
}

/// Bisect between an outside and an inside coordinate until the boundary is
/// located to 1e-6 m.
fn bisect_boundary(outside: f64, inside_s: f64, inside: &dyn Fn(f64) -> bool) -> f64 {
    let mut lo = outside;
    let mut hi = inside_s;
    for _ in 0..40 {
        let mid = 0.5 * (lo + hi);
        if inside(mid) {
            hi = mid;
        } else {
            lo = mid;
        }
        if (hi - lo).abs() < 1e-6 {
            break;
        }
    }
    hi
}

/// Convex hull of both corridors' boundary points over the overlap windows.
fn crossing_polygon(
    path_a: &Path,
    span_a: (f64, f64),
    width_a: f64,
    path_b: &Path,
    span_b: (f64, f64),
    width_b: f64,
) -> Vec<Vec2> {
    let mut pts = Vec::new();
    collect_corridor_edge(path_a, span_a, width_a, &mut pts);
    collect_corridor_edge(path_b, span_b, width_b, &mut pts);
    convex_hull(pts)
}

fn collect_corridor_edge(path: &Path, span: (f64, f64), width: f64, out: &mut Vec<Vec2>) {
    let samples = 16;
    for i in 0..=samples {
        let s = span.0 + (span.1 - span.0) * i as f64 / samples as f64;
        let st = path.state_at(s).expect("span within path");
        let n = st.tangent.perp();
        out.push(st.position + n * (width / 2.0));
        out.push(st.position + n * (-width / 2.0));
    }
}

/// Andrew's monotone chain.
fn convex_hull(mut pts: Vec<Vec2>) -> Vec<Vec2> {
    pts.sort_by(|a, b| (a.x, a.y).partial_cmp(&(b.x, b.y)).unwrap());
    pts.dedup_by(|a, b| a.distance(*b) < 1e-9);
    if pts.len() < 3 {
        return pts;
    }
    let mut hull: Vec<Vec2> = Vec::with_capacity(pts.len() * 2);
    for phase in 0..2 {
        let start = hull.len();
        let iter: Box<dyn Iterator<Item = &Vec2>> = if phase == 0 {
            Box::new(pts.iter())
        } else {
            Box::new(pts.iter().rev())
        };
        for &p in iter {
            while hull.len() >= start + 2 {
                let q = hull[hull.len() - 1];
                let r = hull[hull.len() - 2];
                if (q - r).cross(p - r) <= 0.0 {
                    hull.pop();
                } else {
                    break;
                }
            }
            hull.push(p);
        }
        hull.pop();
    }
    hull
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geom::Path;

    fn straight(a: (f64, f64), b: (f64, f64)) -> Path {
        Path::new(vec![Vec2::new(a.0, a.1), Vec2::new(b.0, b.1)]).unwrap()
    }

    #[test]
    fn perpendicular_crossing_spans_half_width_sum() {
        // Paths cross at the origin, 20 m from each start; widths 2 m each
        // give a corridor reach of (2+2)/2 = 2 m on both axes.
        let a = straight((-20.0, 0.0), (20.0, 0.0));
        let b = straight((0.0, -20.0), (0.0, 20.0));
        let r = conflict_region(&a, &b, 2.0, 2.0).unwrap();
        assert!((r.span_a.0 - 18.0).abs() < 1e-4, "entry {}", r.span_a.0);
        assert!((r.span_a.1 - 22.0).abs() < 1e-4, "exit {}", r.span_a.1);
        assert!((r.span_b.0 - 18.0).abs() < 1e-4);
        assert!((r.span_b.1 - 22.0).abs() < 1e-4);
        assert!(r.polygon.len() >= 3, "crossing area must be a polygon");
    }

    #[test]
    fn parallel_distant_paths_have_no_region() {
        let a = straight((0.0, 0.0), (50.0, 0.0));
        let b = straight((0.0, 10.0), (50.0, 10.0));
        assert!(conflict_region(&a, &b, 2.0, 2.0).is_none());
    }

    #[test]
    fn identical_paths_overlap_fully() {
        let a = straight((0.0, 0.0), (30.0, 0.0));
        let b = straight((0.0, 0.0), (30.0, 0.0));
        let r = conflict_region(&a, &b, 2.0, 2.0).unwrap();
        assert_eq!(r.span_a.0, 0.0);
        assert_eq!(r.span_a.1, 30.0);
        assert_eq!(r.span_b, r.span_a);
    }

    #[test]
    fn polygon_is_nondegenerate_on_crossings() {
        let a = straight((-10.0, 0.0), (10.0, 0.0));
        let b = straight((-5.0, -10.0), (5.0, 10.0));
        let r = conflict_region(&a, &b, 2.0, 1.0).unwrap();
        // shoelace area of the hull
        let mut area = 0.0;
        for i in 0..r.polygon.len() {
            let p = r.polygon[i];
            let q = r.polygon[(i + 1) % r.polygon.len()];
            area += p.cross(q);
        }
        assert!(area.abs() / 2.0 > 1.0, "area {}", area / 2.0);
    }
}
