//! Planar geometry: arc-length parameterized polylines and point projection.
//!
//! Every actor in a scenario moves along a [`Path`], a polyline addressed by
//! the arc coordinate `s` (meters from the first vertex). Curvature is
//! estimated per vertex from the circumscribed circle of three consecutive
//! vertices and interpolated linearly in between, which is exact on sampled
//! circular arcs and identically zero on straight segments.

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Vec2 {
    pub x: f64,
    pub y: f64,
}

impl Vec2 {
    pub const fn new(x: f64, y: f64) -> Self {
        Vec2 { x, y }
    }

    pub fn dot(self, other: Vec2) -> f64 {
        self.x * other.x + self.y * other.y
    }

    /// z-component of the 3-D cross product.
    pub fn cross(self, other: Vec2) -> f64 {
        self.x * other.y - self.y * other.x
    }

    pub fn norm(self) -> f64 {
        self.x.hypot(self.y)
    }

    pub fn distance(self, other: Vec2) -> f64 {
        (self - other).norm()
    }

    pub fn normalized(self) -> Vec2 {
        let n = self.norm();
        Vec2::new(self.x / n, self.y / n)
    }

    /// Left-hand normal.
    pub fn perp(self) -> Vec2 {
        Vec2::new(-self.y, self.x)
    }
}

impl std::ops::Add for Vec2 {
    type Output = Vec2;
    fn add(self, rhs: Vec2) -> Vec2 {
        Vec2::new(self.x + rhs.x, self.y + rhs.y)
    }
}

impl std::ops::Sub for Vec2 {
    type Output = Vec2;
    fn sub(self, rhs: Vec2) -> Vec2 {
        Vec2::new(self.x - rhs.x, self.y - rhs.y)
    }
}

impl std::ops::Mul<f64> for Vec2 {
    type Output = Vec2;
    fn mul(self, rhs: f64) -> Vec2 {
        Vec2::new(self.x * rhs, self.y * rhs)
    }
}

/// Pose of a path at one arc coordinate.
#[derive(Debug, Clone, Copy)]
pub struct PathState {
    pub position: Vec2,
    /// Unit tangent of the containing segment.
    pub tangent: Vec2,
    /// Curvature in 1/m, non-negative (turning direction is not tracked).
    pub curvature: f64,
}

/// Arc-length parameterized planar polyline.
#[derive(Debug, Clone)]
pub struct Path {
    points: Vec<Vec2>,
    cum_s: Vec<f64>,
    vertex_curvature: Vec<f64>,
}

/// Minimum spacing between consecutive vertices.
const MIN_VERTEX_SPACING: f64 = 1e-9;

impl Path {
    pub fn new(points: Vec<Vec2>) -> Result<Path> {
        if points.len() < 2 {
            return Err(Error::InvalidPath(format!(
                "need at least 2 points, got {}",
                points.len()
            )));
        }
        let mut cum_s = Vec::with_capacity(points.len());
        cum_s.push(0.0);
        for i in 1..points.len() {
            let d = points[i].distance(points[i - 1]);
            if d <= MIN_VERTEX_SPACING {
                return Err(Error::InvalidPath(format!(
                    "consecutive points {} and {} coincide",
                    i - 1,
                    i
                )));
            }
            cum_s.push(cum_s[i - 1] + d);
        }
        let vertex_curvature = vertex_curvatures(&points);
        Ok(Path {
            points,
            cum_s,
            vertex_curvature,
        })
    }

    pub fn length(&self) -> f64 {
        *self.cum_s.last().unwrap()
    }

    pub fn points(&self) -> &[Vec2] {
        &self.points
    }

    /// Segment index containing `s`, so that `cum_s[i] <= s <= cum_s[i+1]`.
    fn segment_at(&self, s: f64) -> usize {
        let i = self.cum_s.partition_point(|&c| c <= s);
        i.clamp(1, self.points.len() - 1) - 1
    }

    /// Position, tangent, and curvature at arc coordinate `s`.
    pub fn state_at(&self, s: f64) -> Result<PathState> {
        let len = self.length();
        if !(0.0..=len).contains(&s) {
            return Err(Error::ArcOutOfRange { s, length: len });
        }
        let i = self.segment_at(s);
        let seg_len = self.cum_s[i + 1] - self.cum_s[i];
        let frac = (s - self.cum_s[i]) / seg_len;
        let a = self.points[i];
        let b = self.points[i + 1];
        let tangent = (b - a).normalized();
        let position = a + (b - a) * frac;
        let curvature =
            self.vertex_curvature[i] * (1.0 - frac) + self.vertex_curvature[i + 1] * frac;
        Ok(PathState {
            position,
            tangent,
            curvature,
        })
    }

    /// Project a point onto the path: arc coordinate of the closest path
    /// point and the distance to it. Ties resolve to the smallest `s`.
    pub fn project(&self, p: Vec2) -> (f64, f64) {
        let mut best_s = 0.0;
        let mut best_d = f64::INFINITY;
        for i in 0..self.points.len() - 1 {
            let a = self.points[i];
            let b = self.points[i + 1];
            let ab = b - a;
            let seg_len2 = ab.dot(ab);
            let t = ((p - a).dot(ab) / seg_len2).clamp(0.0, 1.0);
            let q = a + ab * t;
            let d = p.distance(q);
            if d < best_d - 1e-12 {
                best_d = d;
                best_s = self.cum_s[i] + t * (self.cum_s[i + 1] - self.cum_s[i]);
            }
        }
        (best_s, best_d)
    }
}

/// Curvature of the circle through three points; 0 when collinear.
fn circumscribed_curvature(a: Vec2, b: Vec2, c: Vec2) -> f64 {
    let ab = b - a;
    let bc = c - b;
    let ca = a - c;
    let denom = ab.norm() * bc.norm() * ca.norm();
    if denom <= 1e-12 {
        return 0.0;
    }
    2.0 * ab.cross(c - a).abs() / denom
}

/// Per-vertex curvature from consecutive triples, endpoints copying their
/// neighbor's value.
fn vertex_curvatures(points: &[Vec2]) -> Vec<f64> {
    let n = points.len();
    let mut k = vec![0.0; n];
    if n < 3 {
        return k;
    }
    for i in 1..n - 1 {
        k[i] = circumscribed_curvature(points[i - 1], points[i], points[i + 1]);
    }
    k[0] = k[1];
    k[n - 1] = k[n - 2];
    k
}

/// Incremental polyline construction from straight and circular pieces.
pub struct PathBuilder {
    points: Vec<Vec2>,
}

impl PathBuilder {
    pub fn new(start: Vec2) -> Self {
        PathBuilder {
            points: vec![start],
        }
    }

    pub fn line_to(mut self, p: Vec2) -> Self {
        self.push(p);
        self
    }

    /// Append a circular arc around `center` from `start_deg` to `end_deg`
    /// (sweep direction given by the sign of the difference), sampled every
    /// `step_deg`. The arc's first sample must coincide with the current
    /// endpoint.
    pub fn arc(
        mut self,
        center: Vec2,
        radius: f64,
        start_deg: f64,
        end_deg: f64,
        step_deg: f64,
    ) -> Self {
        let sweep = end_deg - start_deg;
        let n = (sweep.abs() / step_deg).round().max(1.0) as usize;
        for j in 0..=n {
            let ang = (start_deg + sweep * j as f64 / n as f64).to_radians();
            let p = center + Vec2::new(ang.cos(), ang.sin()) * radius;
            self.push(p);
        }
        self
    }

    fn push(&mut self, p: Vec2) {
        // Joints between pieces repeat the endpoint; drop the duplicate.
        if let Some(last) = self.points.last() {
            if last.distance(p) <= 1e-9 {
                return;
            }
        }
        self.points.push(p);
    }

    pub fn build(self) -> Result<Path> {
        Path::new(self.points)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn rejects_degenerate_polylines() {
        assert!(Path::new(vec![Vec2::new(0.0, 0.0)]).is_err());
        assert!(Path::new(vec![Vec2::new(0.0, 0.0), Vec2::new(0.0, 0.0)]).is_err());
    }

    #[test]
    fn straight_path_midpoint() {
        let p = Path::new(vec![Vec2::new(0.0, 0.0), Vec2::new(10.0, 0.0)]).unwrap();
        let st = p.state_at(5.0).unwrap();
        assert_relative_eq!(st.position.x, 5.0);
        assert_relative_eq!(st.position.y, 0.0);
        assert_eq!(st.curvature, 0.0);
        assert_relative_eq!(st.tangent.x, 1.0);
    }

    #[test]
    fn state_at_path_end_is_last_vertex() {
        let p = Path::new(vec![Vec2::new(0.0, 0.0), Vec2::new(3.0, 4.0)]).unwrap();
        let st = p.state_at(p.length()).unwrap();
        assert_relative_eq!(st.position.x, 3.0);
        assert_relative_eq!(st.position.y, 4.0);
        assert!(p.state_at(p.length() + 1e-6).is_err());
        assert!(p.state_at(-1e-6).is_err());
    }

    #[test]
    fn quarter_circle_curvature_matches_radius() {
        let r = 10.0;
        let path = PathBuilder::new(Vec2::new(r, 0.0))
            .arc(Vec2::new(0.0, 0.0), r, 0.0, 90.0, 1.0)
            .build()
            .unwrap();
        let mid = path.state_at(path.length() / 2.0).unwrap();
        assert!(
            (mid.curvature - 1.0 / r).abs() < 1e-3,
            "curvature {} vs {}",
            mid.curvature,
            1.0 / r
        );
        // within 1% of 1/R everywhere away from the endpoints
        for frac in [0.1, 0.3, 0.7, 0.9] {
            let st = path.state_at(path.length() * frac).unwrap();
            assert!((st.curvature - 0.1).abs() < 0.001);
        }
    }

    #[test]
    fn multi_vertex_straight_line_has_zero_curvature() {
        let p = Path::new(vec![
            Vec2::new(0.0, 0.0),
            Vec2::new(1.0, 1.0),
            Vec2::new(2.0, 2.0),
            Vec2::new(5.0, 5.0),
        ])
        .unwrap();
        for s in [0.0, 1.0, 2.5, p.length()] {
            assert_eq!(p.state_at(s).unwrap().curvature, 0.0);
        }
    }

    #[test]
    fn projection_onto_straight_path() {
        let p = Path::new(vec![Vec2::new(0.0, 0.0), Vec2::new(10.0, 0.0)]).unwrap();
        let (s, d) = p.project(Vec2::new(3.0, 4.0));
        assert_relative_eq!(s, 3.0);
        assert_relative_eq!(d, 4.0);
        // beyond the end clamps to the last vertex
        let (s, d) = p.project(Vec2::new(12.0, 0.0));
        assert_relative_eq!(s, 10.0);
        assert_relative_eq!(d, 2.0);
    }
}
