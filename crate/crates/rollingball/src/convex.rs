//! Convex bodies and the basic convex-analysis kernel.
//!
//! A body is one of:
//! - [`HPolytope`]: bounded intersection of halfspaces with unit normals,
//!   any dimension (1..=3 supported in anger);
//! - [`VPolygon`]: exact counterclockwise polygon in the plane, used as the
//!   2D oracle for boundary measures;
//! - `morphology::BallBody`: an inner body fattened by a ball.
//!
//! All three implement [`ConvexBody`]: membership, support, nearest-point
//! projection and distance. Projection onto an `HPolytope` is solved as the
//! strictly convex quadratic program `min |x - z|^2, Az <= b` by exact
//! active-set resolution: with n <= 3 the candidate active sets are the
//! faces of the body, which are enumerated once at construction, so the
//! KKT point is found by direct comparison instead of iteration.

use crate::error::{Error, Result};
use crate::geometry::{convex_hull_2d, cross2, solve_linear, Matrix, Vector};
use crate::rng::SeqRng;

/// Construction-time tolerance for unit normals.
pub const UNIT_NORMAL_TOL: f64 = 1e-12;
/// Membership slack used by boundary classification.
pub const MEMBERSHIP_TOL: f64 = 1e-9;
/// Bodies with Chebyshev radius at or below this are rejected as degenerate.
pub const MIN_INTERIOR_RADIUS: f64 = 1e-10;

/// Closed halfspace `<normal, x> <= offset` with `|normal| = 1`.
#[derive(Debug, Clone)]
pub struct Halfspace {
    pub normal: Vector,
    pub offset: f64,
}

impl Halfspace {
    pub fn violation(&self, x: &Vector) -> f64 {
        self.normal.dot(x) - self.offset
    }
}

/// A hyperplane supporting a convex body: `<normal, x - point> <= 0` on the
/// body, with `point` on its boundary and `normal` the outward unit normal.
#[derive(Debug, Clone)]
pub struct SupportingHyperplane {
    pub point: Vector,
    pub normal: Vector,
}

impl SupportingHyperplane {
    /// Largest violation `<normal, x - point>` over the given samples;
    /// non-positive (up to tolerance) for samples inside the supported body.
    pub fn max_violation(&self, samples: &[Vector]) -> f64 {
        samples
            .iter()
            .map(|x| self.normal.dot(&(x - &self.point)))
            .fold(f64::NEG_INFINITY, f64::max)
    }
}

/// Operations shared by every convex-body representation.
pub trait ConvexBody {
    fn dim(&self) -> usize;

    /// Membership with slack `tol`.
    fn contains(&self, x: &Vector, tol: f64) -> bool;

    /// Nearest point of the body.
    fn project(&self, x: &Vector) -> Result<Vector>;

    /// Support value `max <u, x>` over the body and one maximizer.
    /// Requires `|u| = 1`.
    fn support(&self, u: &Vector) -> Result<(f64, Vector)>;

    fn dist(&self, x: &Vector) -> Result<f64> {
        Ok(self.project(x)?.dist(x))
    }

    /// Gauge `inf { t > 0 : x/t in body }`; requires the origin interior.
    /// Default implementation brackets by doubling and bisects on
    /// membership; concrete bodies override with closed forms.
    fn minkowski_functional(&self, x: &Vector) -> Result<f64> {
        if !self.contains(&Vector::zeros(x.dim()), -MIN_INTERIOR_RADIUS) {
            return Err(Error::OriginNotInterior(
                "Minkowski functional needs 0 strictly inside the body".into(),
            ));
        }
        if x.norm() == 0.0 {
            return Ok(0.0);
        }
        let mut hi = 1.0_f64;
        let mut grow = 0;
        while !self.contains(&x.scale(1.0 / hi), 1e-12) {
            hi *= 2.0;
            grow += 1;
            if grow > 200 {
                return Err(Error::UnboundedBody("gauge bracket failed".into()));
            }
        }
        let mut lo = 0.0_f64;
        for _ in 0..100 {
            let mid = 0.5 * (lo + hi);
            if mid == 0.0 || self.contains(&x.scale(1.0 / mid), 1e-12) {
                hi = mid;
            } else {
                lo = mid;
            }
        }
        Ok(hi)
    }
}

/// Gradient of squared distance: `2 (x - project(K, x))`.
///
/// Vanishes inside the body and matches central finite differences of
/// `dist(., K)^2` to second order elsewhere.
pub fn dist_sq_gradient<B: ConvexBody + ?Sized>(body: &B, x: &Vector) -> Result<Vector> {
    let p = body.project(x)?;
    Ok((x - &p).scale(2.0))
}

// ---------------------------------------------------------------------------
// HPolytope
// ---------------------------------------------------------------------------

/// Bounded intersection of finitely many halfspaces with unit normals and
/// nonempty interior. Vertices and the Chebyshev ball are enumerated once at
/// construction; dimensions stay small so subset enumeration is exact and
/// cheap.
#[derive(Debug, Clone)]
pub struct HPolytope {
    halfspaces: Vec<Halfspace>,
    dim: usize,
    vertices: Vec<Vector>,
    chebyshev: (Vector, f64),
    faces: FaceCache,
}

/// Boundary faces prepared for exact nearest-point queries.
#[derive(Debug, Clone)]
enum FaceCache {
    /// Interval [lo, hi].
    Interval { lo: f64, hi: f64 },
    /// Ordered hull polygon.
    Polygon(Vec<[f64; 2]>),
    /// Facet cycles in 3D.
    Facets(Vec<FacetCycle>),
}

#[derive(Debug, Clone)]
struct FacetCycle {
    normal: Vector,
    offset: f64,
    /// Vertices of the facet in cyclic order.
    cycle: Vec<Vector>,
}

impl HPolytope {
    /// Build from `(normal, offset)` pairs. Normals are normalized here;
    /// rows with `|normal| < 1e-14` are rejected, duplicates coalesced.
    pub fn new(rows: Vec<(Vector, f64)>) -> Result<Self> {
        if rows.is_empty() {
            return Err(Error::InvalidInput("no halfspaces given".into()));
        }
        let dim = rows[0].0.dim();
        if dim == 0 || dim > 3 {
            return Err(Error::InvalidInput(format!(
                "unsupported dimension {dim}; expected 1..=3"
            )));
        }
        let mut halfspaces: Vec<Halfspace> = Vec::with_capacity(rows.len());
        for (a, b) in rows {
            if a.dim() != dim {
                return Err(Error::InvalidInput("mixed halfspace dimensions".into()));
            }
            let norm = a.norm();
            if norm < 1e-14 {
                return Err(Error::InvalidInput(
                    "halfspace normal shorter than 1e-14".into(),
                ));
            }
            if !b.is_finite() {
                return Err(Error::InvalidInput("halfspace offset not finite".into()));
            }
            let h = Halfspace {
                normal: a.scale(1.0 / norm),
                offset: b / norm,
            };
            // Coalesce (near-)duplicate rows, keeping the tighter offset;
            // duplicate facets would double-count in boundary sampling.
            let mut dup = false;
            for g in &mut halfspaces {
                if g.normal.dist(&h.normal) < 1e-10 {
                    g.offset = g.offset.min(h.offset);
                    dup = true;
                    break;
                }
            }
            if !dup {
                halfspaces.push(h);
            }
        }

        // Boundedness: support must be finite in the 2n axis directions and
        // the simplex direction, i.e. each must lie in the positive cone of
        // the normals (Farkas).
        let mut probes: Vec<Vector> = Vec::new();
        for i in 0..dim {
            probes.push(Vector::basis(dim, i));
            probes.push(Vector::basis(dim, i).scale(-1.0));
        }
        probes.push(Vector(vec![1.0 / (dim as f64).sqrt(); dim]));
        for u in &probes {
            if !in_positive_cone(&halfspaces, u) {
                return Err(Error::UnboundedBody(format!(
                    "support is +inf in direction {:?}",
                    u.as_slice()
                )));
            }
        }

        let vertices = enumerate_vertices(&halfspaces, dim);
        if vertices.is_empty() {
            return Err(Error::InfeasibleBody(
                "halfspace intersection has no vertex".into(),
            ));
        }
        let chebyshev = chebyshev_from_halfspaces(&halfspaces, dim)?;
        if chebyshev.1 <= MIN_INTERIOR_RADIUS {
            return Err(Error::DegenerateBody(format!(
                "Chebyshev radius {} <= {MIN_INTERIOR_RADIUS}",
                chebyshev.1
            )));
        }
        let faces = build_face_cache(&halfspaces, &vertices, dim)?;
        Ok(HPolytope {
            halfspaces,
            dim,
            vertices,
            chebyshev,
            faces,
        })
    }

    /// Axis-aligned box `prod [lo_i, hi_i]`.
    pub fn r#box(lo: &[f64], hi: &[f64]) -> Result<Self> {
        let n = lo.len();
        let mut rows = Vec::with_capacity(2 * n);
        for i in 0..n {
            rows.push((Vector::basis(n, i), hi[i]));
            rows.push((Vector::basis(n, i).scale(-1.0), -lo[i]));
        }
        HPolytope::new(rows)
    }

    /// Regular polygon with `k` vertices on the circle of radius `rho`
    /// centered at `center`, as a halfspace intersection.
    pub fn regular_polygon(k: usize, rho: f64, center: [f64; 2]) -> Result<Self> {
        let mut rows = Vec::with_capacity(k);
        let apothem = rho * (std::f64::consts::PI / k as f64).cos();
        for j in 0..k {
            let ang = 2.0 * std::f64::consts::PI * (j as f64 + 0.5) / k as f64;
            let n = Vector(vec![ang.cos(), ang.sin()]);
            let b = apothem + n[0] * center[0] + n[1] * center[1];
            rows.push((n, b));
        }
        HPolytope::new(rows)
    }

    pub fn halfspaces(&self) -> &[Halfspace] {
        &self.halfspaces
    }

    pub fn vertices(&self) -> &[Vector] {
        &self.vertices
    }

    /// Center and radius of a largest inscribed ball.
    pub fn chebyshev(&self) -> (&Vector, f64) {
        (&self.chebyshev.0, self.chebyshev.1)
    }

    /// Translate the body by `t` (`x -> x + t`).
    pub fn translated(&self, t: &Vector) -> HPolytope {
        let halfspaces: Vec<Halfspace> = self
            .halfspaces
            .iter()
            .map(|h| Halfspace {
                normal: h.normal.clone(),
                offset: h.offset + h.normal.dot(t),
            })
            .collect();
        let vertices: Vec<Vector> = self.vertices.iter().map(|v| v + t).collect();
        let faces = build_face_cache(&halfspaces, &vertices, self.dim)
            .expect("translation preserves face structure");
        HPolytope {
            halfspaces,
            dim: self.dim,
            vertices,
            chebyshev: (&self.chebyshev.0 + t, self.chebyshev.1),
            faces,
        }
    }

    /// A supporting hyperplane at boundary point `p`: the most active facet.
    pub fn supporting_hyperplane(&self, p: &Vector) -> Result<SupportingHyperplane> {
        let mut best = 0usize;
        let mut best_v = f64::NEG_INFINITY;
        for (i, h) in self.halfspaces.iter().enumerate() {
            let v = h.violation(p);
            if v > best_v {
                best_v = v;
                best = i;
            }
        }
        if best_v.abs() > MEMBERSHIP_TOL {
            return Err(Error::NotOnBoundary(format!(
                "point is {best_v:+e} away from the nearest facet plane"
            )));
        }
        Ok(SupportingHyperplane {
            point: p.clone(),
            normal: self.halfspaces[best].normal.clone(),
        })
    }
}

impl ConvexBody for HPolytope {
    fn dim(&self) -> usize {
        self.dim
    }

    fn contains(&self, x: &Vector, tol: f64) -> bool {
        self.halfspaces.iter().all(|h| h.violation(x) <= tol)
    }

    fn project(&self, x: &Vector) -> Result<Vector> {
        project_polytope(self, x)
    }

    fn support(&self, u: &Vector) -> Result<(f64, Vector)> {
        check_unit(u)?;
        let mut best = 0usize;
        let mut best_v = f64::NEG_INFINITY;
        for (i, v) in self.vertices.iter().enumerate() {
            let s = u.dot(v);
            if s > best_v {
                best_v = s;
                best = i;
            }
        }
        Ok((best_v, self.vertices[best].clone()))
    }

    fn minkowski_functional(&self, x: &Vector) -> Result<f64> {
        // With unit normals, dist(0, facet plane i) = offset_i, so the
        // Chebyshev test at the origin is min_i offset_i.
        let margin = self
            .halfspaces
            .iter()
            .map(|h| h.offset)
            .fold(f64::INFINITY, f64::min);
        if margin <= MIN_INTERIOR_RADIUS {
            return Err(Error::OriginNotInterior(format!(
                "facet margin at origin is {margin:e}"
            )));
        }
        let mut mu = 0.0_f64;
        for h in &self.halfspaces {
            mu = mu.max(h.normal.dot(x) / h.offset);
        }
        Ok(mu.max(0.0))
    }
}

fn check_unit(u: &Vector) -> Result<()> {
    if (u.norm() - 1.0).abs() > 1e-9 {
        return Err(Error::InvalidInput(format!(
            "direction must be a unit vector, |u| = {}",
            u.norm()
        )));
    }
    Ok(())
}

/// Chebyshev center of a halfspace intersection: maximize `r` subject to
/// `<a_i, c> + r <= b_i`, solved exactly by enumerating basic solutions of
/// the lifted (n+1)-dimensional linear program.
pub fn chebyshev_center(k: &HPolytope) -> (Vector, f64) {
    let (c, r) = k.chebyshev();
    (c.clone(), r)
}

fn chebyshev_from_halfspaces(hs: &[Halfspace], dim: usize) -> Result<(Vector, f64)> {
    let m = hs.len();
    let k = dim + 1;
    if m < k {
        return Err(Error::InfeasibleBody(
            "too few halfspaces for a bounded body".into(),
        ));
    }
    let mut best: Option<(Vector, f64)> = None;
    for_each_combination(m, k, &mut |idx: &[usize]| {
        let mut a = Matrix::zeros(k);
        let mut b = vec![0.0; k];
        for (row, &i) in idx.iter().enumerate() {
            for j in 0..dim {
                a.set(row, j, hs[i].normal[j]);
            }
            a.set(row, dim, 1.0);
            b[row] = hs[i].offset;
        }
        if let Some(sol) = solve_linear(&a, &Vector(b), 1e-12) {
            let c = Vector(sol.0[..dim].to_vec());
            let r = sol[dim];
            if r.is_finite() && r > best.as_ref().map_or(f64::NEG_INFINITY, |b| b.1) {
                let feasible = hs.iter().all(|h| h.violation(&c) + r <= 1e-9);
                if feasible {
                    best = Some((c, r));
                }
            }
        }
    });
    best.ok_or_else(|| Error::InfeasibleBody("no feasible Chebyshev basic solution".into()))
}

/// All vertices of the halfspace intersection: feasible solutions of
/// `n`-subsets of tight constraints, deduplicated.
fn enumerate_vertices(hs: &[Halfspace], dim: usize) -> Vec<Vector> {
    let m = hs.len();
    let mut verts: Vec<Vector> = Vec::new();
    for_each_combination(m, dim, &mut |idx: &[usize]| {
        let mut a = Matrix::zeros(dim);
        let mut b = vec![0.0; dim];
        for (row, &i) in idx.iter().enumerate() {
            for j in 0..dim {
                a.set(row, j, hs[i].normal[j]);
            }
            b[row] = hs[i].offset;
        }
        if let Some(x) = solve_linear(&a, &Vector(b), 1e-10) {
            if hs.iter().all(|h| h.violation(&x) <= 1e-9)
                && !verts.iter().any(|v| v.dist(&x) < 1e-8)
            {
                verts.push(x);
            }
        }
    });
    verts
}

/// Farkas test: `u` lies in the positive cone of the normals iff some
/// subset of at most `dim` normals combines to `u` with nonnegative weights.
fn in_positive_cone(hs: &[Halfspace], u: &Vector) -> bool {
    let dim = u.dim();
    let m = hs.len();
    for size in 1..=dim {
        let mut found = false;
        for_each_combination(m, size, &mut |idx: &[usize]| {
            if found {
                return;
            }
            // Solve min-norm A_S^T w = u via the Gram system.
            let mut gram = Matrix::zeros(size);
            let mut rhs = vec![0.0; size];
            for (p, &i) in idx.iter().enumerate() {
                for (q, &j) in idx.iter().enumerate() {
                    gram.set(p, q, hs[i].normal.dot(&hs[j].normal));
                }
                rhs[p] = hs[i].normal.dot(u);
            }
            if let Some(w) = solve_linear(&gram, &Vector(rhs), 1e-12) {
                if w.0.iter().all(|&wi| wi >= -1e-12) {
                    let mut recon = Vector::zeros(dim);
                    for (p, &i) in idx.iter().enumerate() {
                        recon = recon.axpy(w[p], &hs[i].normal);
                    }
                    if recon.dist(u) < 1e-9 {
                        found = true;
                    }
                }
            }
        });
        if found {
            return true;
        }
    }
    false
}

fn for_each_combination(m: usize, k: usize, f: &mut dyn FnMut(&[usize])) {
    if k > m {
        return;
    }
    let mut idx: Vec<usize> = (0..k).collect();
    loop {
        f(&idx);
        // advance
        let mut i = k;
        loop {
            if i == 0 {
                return;
            }
            i -= 1;
            if idx[i] != i + m - k {
                break;
            }
            if i == 0 {
                return;
            }
        }
        idx[i] += 1;
        for j in (i + 1)..k {
            idx[j] = idx[j - 1] + 1;
        }
    }
}

/// Assemble the face structures used by exact projection.
fn build_face_cache(hs: &[Halfspace], verts: &[Vector], dim: usize) -> Result<FaceCache> {
    match dim {
        1 => {
            let lo = verts.iter().map(|v| v[0]).fold(f64::INFINITY, f64::min);
            let hi = verts.iter().map(|v| v[0]).fold(f64::NEG_INFINITY, f64::max);
            Ok(FaceCache::Interval { lo, hi })
        }
        2 => {
            let pts: Vec<[f64; 2]> = verts.iter().map(|v| [v[0], v[1]]).collect();
            let hull = convex_hull_2d(&pts);
            if hull.len() < 3 {
                return Err(Error::DegenerateBody("fewer than 3 hull vertices".into()));
            }
            Ok(FaceCache::Polygon(hull))
        }
        3 => {
            let mut facets = Vec::new();
            for h in hs {
                let on: Vec<Vector> = verts
                    .iter()
                    .filter(|v| h.violation(v).abs() <= 1e-9)
                    .cloned()
                    .collect();
                if on.len() < 3 {
                    continue;
                }
                // Order the facet vertices around their centroid.
                let n = &h.normal;
                let mut u = if n[0].abs() < 0.9 {
                    Vector(vec![1.0, 0.0, 0.0])
                } else {
                    Vector(vec![0.0, 1.0, 0.0])
                };
                u = u.axpy(-u.dot(n), n).normalized()?;
                let v = cross3(n, &u);
                let centroid = on
                    .iter()
                    .fold(Vector::zeros(3), |acc, p| acc.axpy(1.0, p))
                    .scale(1.0 / on.len() as f64);
                let mut ang: Vec<(f64, Vector)> = on
                    .into_iter()
                    .map(|p| {
                        let d = &p - &centroid;
                        (d.dot(&v).atan2(d.dot(&u)), p)
                    })
                    .collect();
                ang.sort_by(|a, b| a.0.partial_cmp(&b.0).unwrap());
                facets.push(FacetCycle {
                    normal: h.normal.clone(),
                    offset: h.offset,
                    cycle: ang.into_iter().map(|(_, p)| p).collect(),
                });
            }
            if facets.is_empty() {
                return Err(Error::DegenerateBody("no 2-dimensional facets".into()));
            }
            Ok(FaceCache::Facets(facets))
        }
        _ => Err(Error::InvalidInput(format!("unsupported dimension {dim}"))),
    }
}

fn cross3(a: &Vector, b: &Vector) -> Vector {
    Vector(vec![
        a[1] * b[2] - a[2] * b[1],
        a[2] * b[0] - a[0] * b[2],
        a[0] * b[1] - a[1] * b[0],
    ])
}

/// Nearest-point projection onto a halfspace intersection, exact for
/// n <= 3: the optimal active set is one of the enumerated faces, so the
/// KKT point is the closest among facet feet (when they land inside their
/// facet) and facet-boundary segment projections.
fn project_polytope(p: &HPolytope, x: &Vector) -> Result<Vector> {
    if p.contains(x, 0.0) {
        return Ok(x.clone());
    }
    match &p.faces {
        FaceCache::Interval { lo, hi } => Ok(Vector(vec![x[0].clamp(*lo, *hi)])),
        FaceCache::Polygon(hull) => {
            let k = hull.len();
            let mut best = [hull[0][0], hull[0][1]];
            let mut best_d = f64::INFINITY;
            for i in 0..k {
                let q = project_segment(x.as_slice(), &hull[i], &hull[(i + 1) % k]);
                let d = (q[0] - x[0]).powi(2) + (q[1] - x[1]).powi(2);
                if d < best_d {
                    best_d = d;
                    best = q;
                }
            }
            Ok(Vector(vec![best[0], best[1]]))
        }
        FaceCache::Facets(facets) => {
            let mut best: Option<Vector> = None;
            let mut best_d = f64::INFINITY;
            let mut consider = |cand: Vector, d: f64| {
                if d < best_d {
                    best_d = d;
                    best = Some(cand);
                }
            };
            for f in facets {
                let gap = f.normal.dot(x) - f.offset;
                let foot = x.axpy(-gap, &f.normal);
                let m = f.cycle.len();
                let inside = (0..m).all(|i| {
                    let a = &f.cycle[i];
                    let b = &f.cycle[(i + 1) % m];
                    let edge = b - a;
                    let to = &foot - a;
                    cross3(&edge, &to).dot(&f.normal) >= -1e-10
                });
                if inside {
                    consider(foot, gap * gap);
                } else {
                    for i in 0..m {
                        let a = &f.cycle[i];
                        let b = &f.cycle[(i + 1) % m];
                        let ab = b - a;
                        let t = ((x - a).dot(&ab) / ab.norm_sq()).clamp(0.0, 1.0);
                        let q = a.axpy(t, &ab);
                        let d = q.dist(x);
                        consider(q, d * d);
                    }
                }
            }
            best.ok_or_else(|| Error::ConvergenceFailure("no projection candidate".into()))
        }
    }
}

// ---------------------------------------------------------------------------
// VPolygon
// ---------------------------------------------------------------------------

/// Strictly convex polygon with counterclockwise vertices; the exact 2D
/// oracle for boundary lengths and projections.
#[derive(Debug, Clone)]
pub struct VPolygon {
    vertices: Vec<[f64; 2]>,
}

impl VPolygon {
    pub fn new(vertices: Vec<[f64; 2]>) -> Result<Self> {
        if vertices.len() < 3 {
            return Err(Error::InvalidInput("polygon needs >= 3 vertices".into()));
        }
        let k = vertices.len();
        for i in 0..k {
            let a = &vertices[i];
            let b = &vertices[(i + 1) % k];
            let c = &vertices[(i + 2) % k];
            if (a[0] - b[0]).abs() < 1e-14 && (a[1] - b[1]).abs() < 1e-14 {
                return Err(Error::InvalidInput("duplicate polygon vertices".into()));
            }
            if cross2(a, b, c) <= 0.0 {
                return Err(Error::InvalidInput(
                    "vertices must be strictly convex in counterclockwise order".into(),
                ));
            }
        }
        Ok(VPolygon { vertices })
    }

    /// Convex hull of a point cloud.
    pub fn from_points(points: &[[f64; 2]]) -> Result<Self> {
        VPolygon::new(convex_hull_2d(points))
    }

    pub fn vertices(&self) -> &[[f64; 2]] {
        &self.vertices
    }

    pub fn len(&self) -> usize {
        self.vertices.len()
    }

    pub fn is_empty(&self) -> bool {
        self.vertices.is_empty()
    }

    pub fn perimeter(&self) -> f64 {
        let k = self.vertices.len();
        (0..k)
            .map(|i| {
                let a = self.vertices[i];
                let b = self.vertices[(i + 1) % k];
                ((a[0] - b[0]).powi(2) + (a[1] - b[1]).powi(2)).sqrt()
            })
            .sum()
    }

    /// Outward unit normal and offset of edge `i` (from vertex i to i+1).
    pub fn edge_halfplane(&self, i: usize) -> (Vector, f64) {
        let k = self.vertices.len();
        let a = self.vertices[i];
        let b = self.vertices[(i + 1) % k];
        let d = [b[0] - a[0], b[1] - a[1]];
        let len = (d[0] * d[0] + d[1] * d[1]).sqrt();
        let n = Vector(vec![d[1] / len, -d[0] / len]);
        let off = n[0] * a[0] + n[1] * a[1];
        (n, off)
    }

    /// Same polygon as a halfspace intersection.
    pub fn to_hpolytope(&self) -> Result<HPolytope> {
        let rows = (0..self.vertices.len())
            .map(|i| self.edge_halfplane(i))
            .collect();
        HPolytope::new(rows)
    }

    /// Radius of a largest inscribed disk.
    pub fn inradius(&self) -> Result<f64> {
        Ok(self.to_hpolytope()?.chebyshev().1)
    }

    /// Draw a random convex polygon: hull of `count` points with radii in
    /// `[0.5, 1.5]` around `center`, retried until strictly convex.
    pub fn random(seed: u64, count: usize, center: [f64; 2]) -> VPolygon {
        let mut rng = SeqRng::new(seed);
        loop {
            let pts: Vec<[f64; 2]> = (0..count.max(4))
                .map(|_| {
                    let ang = rng.next_range(0.0, 2.0 * std::f64::consts::PI);
                    let rad = rng.next_range(0.5, 1.5);
                    [center[0] + rad * ang.cos(), center[1] + rad * ang.sin()]
                })
                .collect();
            if let Ok(p) = VPolygon::from_points(&pts) {
                if p.len() >= 3 {
                    return p;
                }
            }
        }
    }
}

impl ConvexBody for VPolygon {
    fn dim(&self) -> usize {
        2
    }

    fn contains(&self, x: &Vector, tol: f64) -> bool {
        let k = self.vertices.len();
        (0..k).all(|i| {
            let a = self.vertices[i];
            let b = self.vertices[(i + 1) % k];
            cross2(&a, &b, x.as_slice()) >= -tol * dist2d(&a, &b)
        })
    }

    fn project(&self, x: &Vector) -> Result<Vector> {
        if self.contains(x, 0.0) {
            return Ok(x.clone());
        }
        let k = self.vertices.len();
        let mut best = Vector::zeros(2);
        let mut best_d = f64::INFINITY;
        for i in 0..k {
            let a = self.vertices[i];
            let b = self.vertices[(i + 1) % k];
            let p = project_segment(x.as_slice(), &a, &b);
            let d = (p[0] - x[0]).powi(2) + (p[1] - x[1]).powi(2);
            if d < best_d {
                best_d = d;
                best = Vector(vec![p[0], p[1]]);
            }
        }
        Ok(best)
    }

    fn support(&self, u: &Vector) -> Result<(f64, Vector)> {
        check_unit(u)?;
        let mut best_v = f64::NEG_INFINITY;
        let mut best = self.vertices[0];
        for v in &self.vertices {
            let s = u[0] * v[0] + u[1] * v[1];
            if s > best_v {
                best_v = s;
                best = *v;
            }
        }
        Ok((best_v, Vector(vec![best[0], best[1]])))
    }

    fn minkowski_functional(&self, x: &Vector) -> Result<f64> {
        let k = self.vertices.len();
        let mut margin = f64::INFINITY;
        let mut mu = 0.0_f64;
        for i in 0..k {
            let (n, off) = self.edge_halfplane(i);
            margin = margin.min(off);
            if off > 0.0 {
                mu = mu.max(n.dot(x) / off);
            }
        }
        if margin <= MIN_INTERIOR_RADIUS {
            return Err(Error::OriginNotInterior(format!(
                "edge margin at origin is {margin:e}"
            )));
        }
        Ok(mu.max(0.0))
    }
}

fn dist2d(a: &[f64; 2], b: &[f64; 2]) -> f64 {
    ((a[0] - b[0]).powi(2) + (a[1] - b[1]).powi(2)).sqrt()
}

fn project_segment(x: &[f64], a: &[f64; 2], b: &[f64; 2]) -> [f64; 2] {
    let ab = [b[0] - a[0], b[1] - a[1]];
    let len2 = ab[0] * ab[0] + ab[1] * ab[1];
    let t = (((x[0] - a[0]) * ab[0] + (x[1] - a[1]) * ab[1]) / len2).clamp(0.0, 1.0);
    [a[0] + t * ab[0], a[1] + t * ab[1]]
}

/// Draw a random bounded polytope in dimension `dim` containing the origin:
/// `count` random unit normals with offsets in `[0.6, 1.6]`, retried until
/// the constructor accepts (bounded, nonempty interior).
pub fn random_polytope(seed: u64, dim: usize, count: usize) -> HPolytope {
    let mut rng = SeqRng::new(seed);
    loop {
        let rows: Vec<(Vector, f64)> = (0..count)
            .map(|_| {
                let n = rng.next_unit_vector(dim);
                let b = rng.next_range(0.6, 1.6);
                (n, b)
            })
            .collect();
        if let Ok(p) = HPolytope::new(rows) {
            return p;
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sq2() -> HPolytope {
        HPolytope::r#box(&[-1.0, -1.0], &[1.0, 1.0]).unwrap()
    }

    #[test]
    fn chebyshev_square_and_triangle() {
        let (c, r) = chebyshev_center(&sq2());
        assert!(c.norm() < 1e-9);
        assert!((r - 1.0).abs() < 1e-9);

        // Triangle (0,0),(4,0),(0,3): inradius = area / semiperimeter = 6/6.
        let tri = VPolygon::new(vec![[0.0, 0.0], [4.0, 0.0], [0.0, 3.0]])
            .unwrap()
            .to_hpolytope()
            .unwrap();
        let (_, r) = chebyshev_center(&tri);
        assert!((r - 1.0).abs() < 1e-9, "inradius {r}");
    }

    #[test]
    fn chebyshev_regular_gon_apothem() {
        let gon = HPolytope::regular_polygon(64, 1.0, [0.25, -0.5]).unwrap();
        let (c, r) = chebyshev_center(&gon);
        let apothem = (std::f64::consts::PI / 64.0).cos();
        assert!((r - apothem).abs() / apothem < 0.005);
        assert!((c[0] - 0.25).abs() < 1e-8 && (c[1] + 0.5).abs() < 1e-8);
    }

    #[test]
    fn degenerate_and_unbounded_rejected() {
        // Slab in 2D: unbounded.
        let slab = HPolytope::new(vec![
            (Vector(vec![1.0, 0.0]), 1.0),
            (Vector(vec![-1.0, 0.0]), 1.0),
        ]);
        assert!(matches!(slab, Err(Error::UnboundedBody(_))));

        // Width-zero box: degenerate.
        let flat = HPolytope::r#box(&[0.0, 0.0], &[1.0, 0.0]);
        assert!(matches!(flat, Err(Error::DegenerateBody(_))));

        // x <= 0 and x >= 1 (and a box around): infeasible before Chebyshev.
        let infeas = HPolytope::new(vec![
            (Vector(vec![1.0, 0.0]), 0.0),
            (Vector(vec![-1.0, 0.0]), -1.0),
            (Vector(vec![0.0, 1.0]), 1.0),
            (Vector(vec![0.0, -1.0]), 1.0),
        ]);
        assert!(infeas.is_err());
    }

    #[test]
    fn projection_faces_and_corners() {
        let k = sq2();
        let p = k.project(&Vector(vec![2.0, 0.5])).unwrap();
        assert!(p.dist(&Vector(vec![1.0, 0.5])) < 1e-10);

        // Identity on the body.
        let inside = Vector(vec![0.3, -0.7]);
        assert_eq!(k.project(&inside).unwrap(), inside);

        // Idempotence.
        let p2 = k.project(&p).unwrap();
        assert!(p2.dist(&p) < 1e-10);

        // Corner of the triangle (0,0),(2,0),(0,2): (2,2) -> (1,1).
        let tri = VPolygon::new(vec![[0.0, 0.0], [2.0, 0.0], [0.0, 2.0]])
            .unwrap()
            .to_hpolytope()
            .unwrap();
        let q = tri.project(&Vector(vec![2.0, 2.0])).unwrap();
        assert!(q.dist(&Vector(vec![1.0, 1.0])) < 1e-9, "{:?}", q);
    }

    #[test]
    fn projection_matches_brute_force_boundary_grid() {
        // Independent oracle: minimize |x - z| over a fine boundary grid.
        let tri = VPolygon::new(vec![[0.0, 0.0], [2.0, 0.0], [0.0, 2.0]]).unwrap();
        let x = Vector(vec![2.0, 2.0]);
        let mut best = f64::INFINITY;
        let mut arg = [0.0, 0.0];
        for i in 0..3 {
            let a = tri.vertices()[i];
            let b = tri.vertices()[(i + 1) % 3];
            for t in 0..=4000 {
                let s = t as f64 / 4000.0;
                let z = [a[0] + s * (b[0] - a[0]), a[1] + s * (b[1] - a[1])];
                let d = (z[0] - x[0]).powi(2) + (z[1] - x[1]).powi(2);
                if d < best {
                    best = d;
                    arg = z;
                }
            }
        }
        let p = tri.project(&x).unwrap();
        assert!((p[0] - arg[0]).abs() < 1e-3 && (p[1] - arg[1]).abs() < 1e-3);
        assert!((x.dist(&p) - best.sqrt()).abs() < 1e-6);
    }

    #[test]
    fn projection_is_contractive_and_variational() {
        let mut rng = SeqRng::new(41);
        for body_seed in 0..6u64 {
            let k = random_polytope(100 + body_seed, 2 + (body_seed % 2) as usize, 10);
            let n = k.dim();
            for _ in 0..200 {
                let x = Vector((0..n).map(|_| rng.next_range(-3.0, 3.0)).collect());
                let y = Vector((0..n).map(|_| rng.next_range(-3.0, 3.0)).collect());
                let px = k.project(&x).unwrap();
                let py = k.project(&y).unwrap();
                assert!(px.dist(&py) <= x.dist(&y) + 1e-9);
                // Variational characterization against body samples.
                for _ in 0..5 {
                    let z = k.project(&Vector((0..n).map(|_| rng.next_range(-1.0, 1.0)).collect()))
                        .unwrap();
                    let lhs = (&x - &px).dot(&(&z - &px));
                    assert!(lhs <= 1e-7, "variational inequality violated: {lhs}");
                }
            }
        }
    }

    #[test]
    fn dist_sq_gradient_cases() {
        let k = sq2();
        // Interior: zero vector.
        let g = dist_sq_gradient(&k, &Vector(vec![0.2, -0.3])).unwrap();
        assert!(g.norm() < 1e-12);
        // (2, 0.5) -> 2(x - (1,0.5)) = (2, 0).
        let g = dist_sq_gradient(&k, &Vector(vec![2.0, 0.5])).unwrap();
        assert!(g.dist(&Vector(vec![2.0, 0.0])) < 1e-9);

        // Disk via fine polygon: x = (2,0) -> gradient (2,0).
        let disk = HPolytope::regular_polygon(128, 1.0, [0.0, 0.0]).unwrap();
        let g = dist_sq_gradient(&disk, &Vector(vec![2.0, 0.0])).unwrap();
        assert!(g.dist(&Vector(vec![2.0, 0.0])) < 2e-3, "{:?}", g);
    }

    #[test]
    fn dist_sq_gradient_matches_central_differences() {
        let k = random_polytope(7, 2, 8);
        let mut rng = SeqRng::new(9);
        let h = 1e-5;
        for _ in 0..50 {
            // Bodies are unit scale, so this probes distances up to ~10.
            let x = Vector(vec![rng.next_range(-8.0, 8.0), rng.next_range(-8.0, 8.0)]);
            let g = dist_sq_gradient(&k, &x).unwrap();
            for j in 0..2 {
                let mut xp = x.clone();
                xp[j] += h;
                let mut xm = x.clone();
                xm[j] -= h;
                let dp = k.dist(&xp).unwrap().powi(2);
                let dm = k.dist(&xm).unwrap().powi(2);
                let fd = (dp - dm) / (2.0 * h);
                assert!((fd - g[j]).abs() < 1e-7, "fd {fd} vs {g:?}");
            }
        }
    }

    #[test]
    fn support_examples() {
        let k = sq2();
        let (v, _) = k.support(&Vector(vec![1.0, 0.0])).unwrap();
        assert!((v - 1.0).abs() < 1e-12);

        // Round body: support approaches <u, c> + rho.
        let disk = HPolytope::regular_polygon(128, 0.7, [0.4, -0.9]).unwrap();
        let u = Vector(vec![0.6, 0.8]);
        let (v, _) = disk.support(&u).unwrap();
        let ball = 0.6 * 0.4 + 0.8 * (-0.9) + 0.7;
        assert!((v - ball).abs() < 3e-4 * 0.7, "{v} vs {ball}");

        // Polytope support = max over enumerated vertices (2D oracle).
        let tri = VPolygon::new(vec![[0.0, 0.0], [4.0, 0.0], [0.0, 3.0]]).unwrap();
        let u = Vector(vec![0.6, 0.8]);
        let (v, arg) = tri.support(&u).unwrap();
        let brute = tri
            .vertices()
            .iter()
            .map(|p| 0.6 * p[0] + 0.8 * p[1])
            .fold(f64::NEG_INFINITY, f64::max);
        assert!((v - brute).abs() < 1e-12);
        assert!((u.dot(&arg) - v).abs() < 1e-12);
    }

    #[test]
    fn minkowski_functional_examples() {
        let disk = HPolytope::regular_polygon(128, 1.0, [0.0, 0.0]).unwrap();
        let mu = disk.minkowski_functional(&Vector(vec![3.0, 4.0])).unwrap();
        assert!((mu - 5.0).abs() < 5e-3, "{mu}");

        let k = sq2();
        let mu = k.minkowski_functional(&Vector(vec![0.5, -2.0])).unwrap();
        assert!((mu - 2.0).abs() < 1e-12);

        // Triangle with origin interior: closed form vs bisection oracle.
        let tri = VPolygon::new(vec![[-1.0, -1.0], [2.0, -0.5], [-0.5, 2.0]]).unwrap();
        let x = Vector(vec![0.7, 0.9]);
        let mu = tri.minkowski_functional(&x).unwrap();
        // Bisection on the membership oracle.
        let mut lo = 0.0;
        let mut hi = 10.0;
        for _ in 0..60 {
            let mid = 0.5 * (lo + hi);
            if tri.contains(&x.scale(1.0 / mid), 1e-14) {
                hi = mid;
            } else {
                lo = mid;
            }
        }
        assert!((mu - hi).abs() < 1e-10, "{mu} vs {hi}");
        // Homogeneity and the membership characterization.
        let mu2 = tri.minkowski_functional(&x.scale(2.0)).unwrap();
        assert!((mu2 - 2.0 * mu).abs() < 1e-10);

        // Origin outside: error.
        let shifted = VPolygon::new(vec![[1.0, 1.0], [2.0, 1.0], [1.0, 2.0]]).unwrap();
        assert!(matches!(
            shifted.minkowski_functional(&x),
            Err(Error::OriginNotInterior(_))
        ));
    }

    #[test]
    fn supporting_hyperplane_is_valid() {
        let k = random_polytope(21, 2, 9);
        let mut rng = SeqRng::new(5);
        let mut samples = Vec::new();
        for _ in 0..1000 {
            let x = Vector(vec![rng.next_range(-2.0, 2.0), rng.next_range(-2.0, 2.0)]);
            samples.push(k.project(&x).unwrap());
        }
        for i in 0..50 {
            let outside = Vector(vec![
                4.0 * (i as f64 * 0.7).cos(),
                4.0 * (i as f64 * 0.7).sin(),
            ]);
            let p = k.project(&outside).unwrap();
            let hp = k.supporting_hyperplane(&p).unwrap();
            assert!(hp.max_violation(&samples) <= 1e-9);
        }
    }

    #[test]
    fn vpolygon_rejects_bad_input() {
        assert!(VPolygon::new(vec![[0.0, 0.0], [1.0, 0.0]]).is_err());
        // Clockwise ordering rejected.
        assert!(VPolygon::new(vec![[0.0, 0.0], [0.0, 1.0], [1.0, 0.0]]).is_err());
        // Duplicate vertex rejected.
        assert!(VPolygon::new(vec![[0.0, 0.0], [0.0, 0.0], [1.0, 0.0], [0.0, 1.0]]).is_err());
    }
}
