//! Planar geometry: convex polygons, Voronoi cells clipped to a rectangle,
//! contraction about a generator, enclosing circles and polygon quadrature.

use serde::Serialize;

use crate::error::{invalid, DesignError, Result};
use crate::quadrature::gauss_legendre;

pub type Point2 = [f64; 2];

fn sub(a: Point2, b: Point2) -> Point2 {
    [a[0] - b[0], a[1] - b[1]]
}

fn cross(a: Point2, b: Point2) -> f64 {
    a[0] * b[1] - a[1] * b[0]
}

fn dist(a: Point2, b: Point2) -> f64 {
    (a[0] - b[0]).hypot(a[1] - b[1])
}

/// Convex polygon with counterclockwise vertices.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ConvexPolygon {
    pub vertices: Vec<Point2>,
}

impl ConvexPolygon {
    pub fn new(vertices: Vec<Point2>) -> Result<Self> {
        if vertices.len() < 3 {
            return Err(invalid("polygon needs at least 3 vertices"));
        }
        let poly = ConvexPolygon { vertices };
        if !(poly.area() > 0.0) {
            return Err(invalid("polygon must be counterclockwise with positive area"));
        }
        let n = poly.vertices.len();
        let scale = poly.extent().max(1.0);
        for i in 0..n {
            let (a, b, c) = (poly.vertices[i], poly.vertices[(i + 1) % n], poly.vertices[(i + 2) % n]);
            if cross(sub(b, a), sub(c, b)) < -1e-12 * scale * scale {
                return Err(invalid(format!("polygon is not convex at vertex {}", (i + 1) % n)));
            }
        }
        Ok(poly)
    }

    pub fn rectangle(lower: Point2, upper: Point2) -> Result<Self> {
        Self::new(vec![lower, [upper[0], lower[1]], upper, [lower[0], upper[1]]])
    }

    fn extent(&self) -> f64 {
        self.vertices.iter().fold(0.0_f64, |m, v| m.max(v[0].abs()).max(v[1].abs()))
    }

    /// Shoelace area (positive for counterclockwise order).
    pub fn area(&self) -> f64 {
        let n = self.vertices.len();
        0.5 * (0..n)
            .map(|i| cross(self.vertices[i], self.vertices[(i + 1) % n]))
            .sum::<f64>()
    }

    pub fn centroid(&self) -> Point2 {
        let n = self.vertices.len();
        let (mut cx, mut cy, mut a2) = (0.0, 0.0, 0.0);
        for i in 0..n {
            let (p, q) = (self.vertices[i], self.vertices[(i + 1) % n]);
            let w = cross(p, q);
            a2 += w;
            cx += (p[0] + q[0]) * w;
            cy += (p[1] + q[1]) * w;
        }
        [cx / (3.0 * a2), cy / (3.0 * a2)]
    }

    /// Signed distance-like margin: min over edges of cross(edge, x − start)/|edge|.
    /// Positive strictly inside, zero on the boundary.
    pub fn margin(&self, x: Point2) -> f64 {
        let n = self.vertices.len();
        (0..n)
            .map(|i| {
                let (a, b) = (self.vertices[i], self.vertices[(i + 1) % n]);
                let e = sub(b, a);
                cross(e, sub(x, a)) / e[0].hypot(e[1])
            })
            .fold(f64::INFINITY, f64::min)
    }

    /// Half-plane test; boundary points count as inside.
    pub fn contains(&self, x: Point2) -> bool {
        self.margin(x) >= -1e-12 * self.extent().max(1.0)
    }

    /// Keeps {x : n·x ≤ d} (Sutherland-Hodgman against one line).
    fn clip(&self, n: Point2, d: f64) -> Option<ConvexPolygon> {
        let m = self.vertices.len();
        let mut out = Vec::with_capacity(m + 1);
        let val = |p: Point2| n[0] * p[0] + n[1] * p[1] - d;
        for i in 0..m {
            let (p, q) = (self.vertices[i], self.vertices[(i + 1) % m]);
            let (vp, vq) = (val(p), val(q));
            if vp <= 0.0 {
                out.push(p);
            }
            if (vp < 0.0 && vq > 0.0) || (vp > 0.0 && vq < 0.0) {
                let s = vp / (vp - vq);
                out.push([p[0] + s * (q[0] - p[0]), p[1] + s * (q[1] - p[1])]);
            }
        }
        // drop near-duplicate vertices created by clipping through a vertex
        let scale = self.extent().max(1.0);
        let mut dedup: Vec<Point2> = Vec::with_capacity(out.len());
        for p in out {
            if dedup.last().is_none_or(|q| dist(*q, p) > 1e-13 * scale) {
                dedup.push(p);
            }
        }
        while dedup.len() > 1 && dist(dedup[0], *dedup.last().unwrap()) <= 1e-13 * scale {
            dedup.pop();
        }
        let poly = ConvexPolygon { vertices: dedup };
        (poly.vertices.len() >= 3 && poly.area() > 0.0).then_some(poly)
    }
}

/// Voronoi tiles of the generators, clipped to a rectangle.
#[derive(Debug, Clone, Serialize)]
pub struct Tessellation2D {
    pub generators: Vec<Point2>,
    pub tiles: Vec<ConvexPolygon>,
    pub areas: Vec<f64>,
    /// ω_i = |T_i| / Σ|T_j|.
    pub weights: Vec<f64>,
}

pub fn voronoi_clipped(generators: &[Point2], lower: Point2, upper: Point2) -> Result<Tessellation2D> {
    let rect = ConvexPolygon::rectangle(lower, upper)?;
    for (i, g) in generators.iter().enumerate() {
        if !rect.contains(*g) {
            return Err(invalid(format!("generator {} at {g:?} lies outside the rectangle", i + 1)));
        }
        if let Some(j) = generators[..i].iter().position(|h| h == g) {
            return Err(invalid(format!("generators {} and {} coincide", j + 1, i + 1)));
        }
    }
    let mut tiles = Vec::with_capacity(generators.len());
    for (i, ti) in generators.iter().enumerate() {
        let mut cell = rect.clone();
        for (j, tj) in generators.iter().enumerate() {
            if i == j {
                continue;
            }
            // |x − t_i|² ≤ |x − t_j|²  ⇔  2(t_j − t_i)·x ≤ |t_j|² − |t_i|²
            let n = [2.0 * (tj[0] - ti[0]), 2.0 * (tj[1] - ti[1])];
            let d = tj[0] * tj[0] + tj[1] * tj[1] - ti[0] * ti[0] - ti[1] * ti[1];
            cell = cell
                .clip(n, d)
                .ok_or_else(|| DesignError::Numerical(format!("tile {} became empty", i + 1)))?;
        }
        tiles.push(cell);
    }
    let areas: Vec<f64> = tiles.iter().map(|t| t.area()).collect();
    let total: f64 = areas.iter().sum();
    Ok(Tessellation2D {
        generators: generators.to_vec(),
        weights: areas.iter().map(|a| a / total).collect(),
        tiles,
        areas,
    })
}

impl Tessellation2D {
    /// Index of the nearest generator (lowest index on ties).
    pub fn nearest(&self, x: Point2) -> usize {
        let mut best = (f64::INFINITY, 0);
        for (i, g) in self.generators.iter().enumerate() {
            let d = dist(*g, x);
            if d < best.0 {
                best = (d, i);
            }
        }
        best.1
    }

    pub fn to_json(&self) -> serde_json::Value {
        serde_json::json!({
            "generators": self.generators,
            "tiles": self.tiles.iter().map(|t| &t.vertices).collect::<Vec<_>>(),
            "areas": self.areas,
            "weights": self.weights,
        })
    }
}

/// J = t + √c (T − t).
pub fn contract_tile(tile: &ConvexPolygon, generator: Point2, c: f64) -> Result<ConvexPolygon> {
    if !(c > 0.0 && c <= 1.0) {
        return Err(invalid(format!("c = {c} must lie in (0, 1]")));
    }
    if !(tile.margin(generator) > 1e-12 * tile.extent().max(1.0)) {
        return Err(invalid("generator must lie strictly inside its tile"));
    }
    if c == 1.0 {
        return Ok(tile.clone());
    }
    let s = c.sqrt();
    ConvexPolygon::new(
        tile.vertices
            .iter()
            .map(|v| [generator[0] + s * (v[0] - generator[0]), generator[1] + s * (v[1] - generator[1])])
            .collect(),
    )
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Circle {
    pub center: Point2,
    pub radius: f64,
}

impl Circle {
    fn covers(&self, p: Point2) -> bool {
        dist(self.center, p) <= self.radius * (1.0 + 1e-12) + 1e-15
    }

    fn from2(a: Point2, b: Point2) -> Circle {
        let center = [0.5 * (a[0] + b[0]), 0.5 * (a[1] + b[1])];
        Circle { center, radius: 0.5 * dist(a, b) }
    }

    /// Circumcircle; None for collinear points.
    fn from3(a: Point2, b: Point2, c: Point2) -> Option<Circle> {
        let (bx, by) = (b[0] - a[0], b[1] - a[1]);
        let (cx, cy) = (c[0] - a[0], c[1] - a[1]);
        let d = 2.0 * (bx * cy - by * cx);
        if d.abs() < 1e-300 {
            return None;
        }
        let b2 = bx * bx + by * by;
        let c2 = cx * cx + cy * cy;
        let ux = (cy * b2 - by * c2) / d;
        let uy = (bx * c2 - cx * b2) / d;
        Some(Circle {
            center: [a[0] + ux, a[1] + uy],
            radius: ux.hypot(uy),
        })
    }
}

/// Smallest circle containing all points (Welzl, iterative form).
pub fn min_enclosing_circle(points: &[Point2]) -> Result<Circle> {
    if points.is_empty() {
        return Err(invalid("no points"));
    }
    let p = points;
    let mut c = Circle { center: p[0], radius: 0.0 };
    for i in 1..p.len() {
        if c.covers(p[i]) {
            continue;
        }
        c = Circle { center: p[i], radius: 0.0 };
        for j in 0..i {
            if c.covers(p[j]) {
                continue;
            }
            c = Circle::from2(p[i], p[j]);
            for k in 0..j {
                if c.covers(p[k]) {
                    continue;
                }
                // collinear triples cannot be the support; the pair already covers
                if let Some(cc) = Circle::from3(p[i], p[j], p[k]) {
                    c = cc;
                }
            }
        }
    }
    Ok(c)
}

/// Nodes and weights for ∫ over a convex polygon: fan triangles from the apex, each
/// mapped from the unit square by x = P + s(V₁ + u(V₂ − V₁) − P) (Jacobian 2·area·s),
/// with an order × order Gauss-Legendre product rule.
pub fn polygon_nodes(poly: &ConvexPolygon, apex: Point2, order: usize) -> Result<Vec<(Point2, f64)>> {
    if !(poly.margin(apex) > 0.0) {
        return Err(invalid("quadrature apex must lie strictly inside the polygon"));
    }
    let rule = gauss_legendre(order).mapped(0.0, 1.0);
    let n = poly.vertices.len();
    let mut out = Vec::with_capacity(n * order * order);
    for e in 0..n {
        let (v1, v2) = (poly.vertices[e], poly.vertices[(e + 1) % n]);
        let area2 = cross(sub(v1, apex), sub(v2, apex));
        for (s, ws) in rule.nodes.iter().zip(&rule.weights) {
            for (u, wu) in rule.nodes.iter().zip(&rule.weights) {
                let edge = [v1[0] + u * (v2[0] - v1[0]), v1[1] + u * (v2[1] - v1[1])];
                let x = [apex[0] + s * (edge[0] - apex[0]), apex[1] + s * (edge[1] - apex[1])];
                out.push((x, ws * wu * s * area2));
            }
        }
    }
    Ok(out)
}

pub fn polygon_quad<F: Fn(Point2) -> f64>(poly: &ConvexPolygon, apex: Point2, order: usize, f: F) -> Result<f64> {
    Ok(polygon_nodes(poly, apex, order)?.iter().map(|(x, w)| w * f(*x)).sum())
}

/// Default Gauss-Legendre order per triangle direction.
pub const POLYGON_QUAD_ORDER: usize = 16;

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::{open01, substream};

    fn ccd9() -> Vec<Point2> {
        let r = 2f64.sqrt();
        vec![
            [-1.0, -1.0],
            [-1.0, 1.0],
            [1.0, -1.0],
            [1.0, 1.0],
            [-r, 0.0],
            [r, 0.0],
            [0.0, -r],
            [0.0, r],
            [0.0, 0.0],
        ]
    }

    #[test]
    fn ccd_tessellation_areas() {
        let t = voronoi_clipped(&ccd9(), [-2.0, -2.0], [2.0, 2.0]).unwrap();
        assert!((t.areas.iter().sum::<f64>() - 16.0).abs() < 1e-9);
        let s = 2f64.sqrt() - 1.0;
        assert!((t.areas[8] - (2.0 - 2.0 * s * s)).abs() < 1e-12);
        for i in 4..8 {
            assert!((t.areas[i] - 3.5 * s).abs() < 1e-12, "{}", t.areas[i]);
        }
        for (g, tile) in t.generators.iter().zip(&t.tiles) {
            assert!(tile.contains(*g));
        }
    }

    #[test]
    fn tiles_match_nearest_generator() {
        let t = voronoi_clipped(&ccd9(), [-2.0, -2.0], [2.0, 2.0]).unwrap();
        let mut rng = substream(21, 0);
        for _ in 0..100_000 {
            let x = [4.0 * open01(&mut rng) - 2.0, 4.0 * open01(&mut rng) - 2.0];
            let i = t.nearest(x);
            assert!(t.tiles[i].contains(x));
            let inside = t.tiles.iter().filter(|tile| tile.margin(x) > 1e-9).count();
            assert!(inside <= 1);
        }
    }

    #[test]
    fn duplicate_generators_rejected() {
        assert!(voronoi_clipped(&[[0.0, 0.0], [0.0, 0.0]], [-1.0, -1.0], [1.0, 1.0]).is_err());
        assert!(voronoi_clipped(&[[3.0, 0.0]], [-1.0, -1.0], [1.0, 1.0]).is_err());
    }

    #[test]
    fn contraction() {
        let t = voronoi_clipped(&ccd9(), [-2.0, -2.0], [2.0, 2.0]).unwrap();
        for (g, tile) in t.generators.iter().zip(&t.tiles) {
            assert_eq!(contract_tile(tile, *g, 1.0).unwrap(), *tile);
            let j = contract_tile(tile, *g, 0.25).unwrap();
            assert!((j.area() - 0.25 * tile.area()).abs() < 1e-12);
            for (v, w) in tile.vertices.iter().zip(&j.vertices) {
                assert!((w[0] - (g[0] + 0.5 * (v[0] - g[0]))).abs() < 1e-15);
                assert!(tile.contains(*w));
            }
        }
        let sq = ConvexPolygon::rectangle([0.0, 0.0], [1.0, 1.0]).unwrap();
        assert!(contract_tile(&sq, [0.0, 0.5], 0.5).is_err());
    }

    #[test]
    fn enclosing_circle_square_and_triangles() {
        let sq = [[0.0, 0.0], [1.0, 0.0], [1.0, 1.0], [0.0, 1.0]];
        let c = min_enclosing_circle(&sq).unwrap();
        assert!((c.center[0] - 0.5).abs() < 1e-15 && (c.center[1] - 0.5).abs() < 1e-15);
        assert!((c.radius - 0.5f64.sqrt()).abs() < 1e-15);
        let mut rng = substream(5, 0);
        for _ in 0..200 {
            let tri: Vec<Point2> = (0..3).map(|_| [open01(&mut rng), open01(&mut rng)]).collect();
            let c = min_enclosing_circle(&tri).unwrap();
            let on = tri.iter().filter(|p| (dist(c.center, **p) - c.radius).abs() < 1e-10).count();
            assert!(on >= 2);
            assert!(tri.iter().all(|p| dist(c.center, *p) <= c.radius + 1e-12));
        }
    }

    fn brute_force_circle(p: &[Point2]) -> f64 {
        let mut best = f64::INFINITY;
        let ok = |c: &Circle| p.iter().all(|q| dist(c.center, *q) <= c.radius + 1e-12);
        for i in 0..p.len() {
            for j in i + 1..p.len() {
                let c = Circle::from2(p[i], p[j]);
                if ok(&c) {
                    best = best.min(c.radius);
                }
                for k in j + 1..p.len() {
                    if let Some(c) = Circle::from3(p[i], p[j], p[k]) {
                        if ok(&c) {
                            best = best.min(c.radius);
                        }
                    }
                }
            }
        }
        best
    }

    #[test]
    fn enclosing_circle_matches_brute_force() {
        let mut rng = substream(6, 0);
        for _ in 0..100 {
            // random convex polygon: sorted angles on a jittered ellipse
            let m = 3 + (open01(&mut rng) * 8.0) as usize;
            let mut ang: Vec<f64> = (0..m).map(|_| open01(&mut rng) * std::f64::consts::TAU).collect();
            ang.sort_by(|a, b| a.partial_cmp(b).unwrap());
            let (ax, by) = (0.5 + open01(&mut rng), 0.5 + open01(&mut rng));
            let pts: Vec<Point2> = ang.iter().map(|a| [ax * a.cos(), by * a.sin()]).collect();
            let c = min_enclosing_circle(&pts).unwrap();
            assert!((c.radius - brute_force_circle(&pts)).abs() < 1e-10);
        }
    }

    #[test]
    fn polygon_quadrature() {
        let t = voronoi_clipped(&ccd9(), [-2.0, -2.0], [2.0, 2.0]).unwrap();
        for (g, tile) in t.generators.iter().zip(&t.tiles) {
            let a = polygon_quad(tile, *g, POLYGON_QUAD_ORDER, |_| 1.0).unwrap();
            assert!((a - tile.area()).abs() < 1e-12);
            assert!(tile.contains(tile.centroid()));
        }
        let sq = ConvexPolygon::rectangle([0.0, 0.0], [1.0, 2.0]).unwrap();
        let v = polygon_quad(&sq, [0.3, 0.4], 8, |x| x[0] * x[0] * x[1]).unwrap();
        assert!((v - 2.0 / 3.0).abs() < 1e-13);
        assert!(polygon_quad(&sq, [0.0, 0.4], 8, |_| 1.0).is_err());
    }
}
