//! Inner parallel bodies, ball openings, the dilation factor, boundary
//! normal fields and boundary-measure computation.
//!
//! The opening `K(r)` — the union of all closed r-balls contained in `K` —
//! is represented as the inner parallel body `K_r` fattened by `r`
//! ([`BallBody`]), which reduces membership, projection and normals to the
//! core polytope. Boundary measures are exact in 2D via the rolling-disk
//! contact decomposition and estimated by seeded Monte Carlo otherwise.

use crate::convex::{chebyshev_center, ConvexBody, HPolytope, VPolygon, MEMBERSHIP_TOL};
use crate::error::{Error, Result};
use crate::geometry::{convex_hull_2d, Vector};
use crate::parallel::map_indexed;
use crate::rng::SampleStream;

/// `K(r) = K_r + rB`: the inner body `core` fattened by `radius`.
#[derive(Debug, Clone)]
pub struct BallBody {
    core: HPolytope,
    radius: f64,
}

impl BallBody {
    pub fn new(core: HPolytope, radius: f64) -> Result<Self> {
        if !(radius > 0.0) || !radius.is_finite() {
            return Err(Error::InvalidInput(format!(
                "ball radius must be positive, got {radius}"
            )));
        }
        Ok(BallBody { core, radius })
    }

    pub fn core(&self) -> &HPolytope {
        &self.core
    }

    pub fn radius(&self) -> f64 {
        self.radius
    }

    /// Inner unit normal at a boundary point `p`:
    /// `(project(core, p) - p) / r`. The unique supporting hyperplane of the
    /// body at `p` has outward normal `-nu`.
    pub fn boundary_normal(&self, p: &Vector) -> Result<Vector> {
        let h = self.core.project(p)?;
        let d = p.dist(&h);
        if (d - self.radius).abs() > 1e-7 {
            return Err(Error::NotOnBoundary(format!(
                "dist(p, core) = {d}, expected the rolling radius {}",
                self.radius
            )));
        }
        Ok((&h - p).scale(1.0 / self.radius))
    }

    /// Supporting hyperplane at a boundary point (outward normal).
    pub fn supporting_hyperplane(&self, p: &Vector) -> Result<crate::convex::SupportingHyperplane> {
        let nu = self.boundary_normal(p)?;
        Ok(crate::convex::SupportingHyperplane {
            point: p.clone(),
            normal: nu.scale(-1.0),
        })
    }
}

impl ConvexBody for BallBody {
    fn dim(&self) -> usize {
        self.core.dim()
    }

    fn contains(&self, x: &Vector, tol: f64) -> bool {
        match self.core.dist(x) {
            Ok(d) => d <= self.radius + tol,
            Err(_) => false,
        }
    }

    fn project(&self, x: &Vector) -> Result<Vector> {
        let c = self.core.project(x)?;
        let d = x.dist(&c);
        if d <= self.radius {
            return Ok(x.clone());
        }
        Ok(c.axpy(self.radius / d, &(x - &c)))
    }

    fn support(&self, u: &Vector) -> Result<(f64, Vector)> {
        let (v, arg) = self.core.support(u)?;
        Ok((v + self.radius, arg.axpy(self.radius, u)))
    }
}

/// Inner parallel body `K_r = { x in K : dist(x, boundary K) >= r }`.
///
/// For a halfspace intersection with unit normals this is the exact offset
/// `{ <a_i, x> <= b_i - r }`; redundant rows are left in place.
pub fn inner_parallel(k: &HPolytope, r: f64) -> Result<HPolytope> {
    if !(r > 0.0) || !r.is_finite() {
        return Err(Error::InvalidInput(format!("offset must be positive, got {r}")));
    }
    let (_, r_o) = chebyshev_center(k);
    if r >= r_o {
        return Err(Error::DegenerateBody(format!(
            "inner parallel body empty or degenerate: r = {r} >= Chebyshev radius {r_o}"
        )));
    }
    let rows = k
        .halfspaces()
        .iter()
        .map(|h| (h.normal.clone(), h.offset - r))
        .collect();
    HPolytope::new(rows)
}

/// Ball opening `K(r)`: union of all closed r-balls inside `K`, represented
/// as `K_r + rB`.
pub fn opening(k: &HPolytope, r: f64) -> Result<BallBody> {
    BallBody::new(inner_parallel(k, r)?, r)
}

/// Dilation factor `lambda(r) = inf { l > 0 : K subset l K_r }` together
/// with the translation that moved the Chebyshev center to the origin
/// (the infimum is taken in that normalized frame).
///
/// Computed exactly as the largest Minkowski functional of `K_r` over the
/// vertices of `K`.
pub fn lambda_factor(k: &HPolytope, r: f64) -> Result<(f64, Vector)> {
    let (c, r_o) = chebyshev_center(k);
    if r >= r_o {
        return Err(Error::DegenerateBody(format!(
            "lambda factor undefined: r = {r} >= Chebyshev radius {r_o}"
        )));
    }
    let shift = c.scale(-1.0);
    let kc = k.translated(&shift);
    let kr = inner_parallel(&kc, r)?;
    let mut lambda = 1.0_f64;
    for v in kc.vertices() {
        lambda = lambda.max(kr.minkowski_functional(v)?);
    }
    Ok((lambda, shift))
}

/// Straight contact piece of the opening boundary: a sub-segment of an edge
/// of the original polygon.
#[derive(Debug, Clone)]
pub struct ContactSegment {
    pub start: [f64; 2],
    pub end: [f64; 2],
    /// Index of the polygon edge this segment lies on.
    pub edge: usize,
}

impl ContactSegment {
    pub fn length(&self) -> f64 {
        ((self.end[0] - self.start[0]).powi(2) + (self.end[1] - self.start[1]).powi(2)).sqrt()
    }
}

/// Circular arc of the opening boundary bridging two contact pieces.
#[derive(Debug, Clone)]
pub struct ContactArc {
    pub center: [f64; 2],
    pub radius: f64,
    /// Start angle of the outward normal sweep, radians.
    pub angle_start: f64,
    /// End angle; `angle_end >= angle_start`, counterclockwise sweep.
    pub angle_end: f64,
}

impl ContactArc {
    pub fn length(&self) -> f64 {
        self.radius * (self.angle_end - self.angle_start)
    }
}

/// Exact decomposition of `boundary K(r)` for a convex polygon: contact
/// segments on `boundary K` plus corner arcs, and the five boundary
/// measures tied to it.
#[derive(Debug, Clone)]
pub struct ContactDecomposition2D {
    pub segments: Vec<ContactSegment>,
    pub arcs: Vec<ContactArc>,
    /// H^1(boundary K)
    pub boundary_len: f64,
    /// H^1(boundary K intersect boundary K(r))
    pub contact_len: f64,
    /// H^1(boundary K minus boundary K(r))
    pub lost_len: f64,
    /// H^1(boundary K(r) minus boundary K)
    pub gained_len: f64,
    /// H^1(boundary K symmetric-difference boundary K(r))
    pub sym_diff_len: f64,
}

/// Exact rolling-disk boundary decomposition of a convex polygon.
///
/// The contact part of every edge equals the matching edge of the inner
/// polygon `K_r` translated back out by `r` along the edge normal, so the
/// decomposition is assembled from the offset polygon: each surviving facet
/// contributes a segment, each vertex of `K_r` an arc spanning the normal
/// fan between its adjacent facets.
pub fn contact_set_2d(p: &VPolygon, r: f64) -> Result<ContactDecomposition2D> {
    let inr = p.inradius()?;
    if !(r > 0.0) || r >= inr {
        return Err(Error::DegenerateBody(format!(
            "rolling radius {r} outside (0, inradius = {inr})"
        )));
    }
    let k = p.len();
    let offsets: Vec<(Vector, f64)> = (0..k)
        .map(|i| {
            let (n, off) = p.edge_halfplane(i);
            (n, off - r)
        })
        .collect();
    let kr = HPolytope::new(offsets.clone())?;
    let hull: Vec<[f64; 2]> = convex_hull_2d(
        &kr.vertices()
            .iter()
            .map(|v| [v[0], v[1]])
            .collect::<Vec<_>>(),
    );
    let kr_poly = VPolygon::new(hull)?;

    // Associate every edge of K_r with the original facet whose offset line
    // carries it, and emit the outward-translated contact segment.
    let m = kr_poly.len();
    let mut segments: Vec<ContactSegment> = Vec::new();
    let mut edge_normals: Vec<Vector> = Vec::with_capacity(m);
    for e in 0..m {
        let (n_e, _) = kr_poly.edge_halfplane(e);
        let mut facet = None;
        for (i, (n_i, _)) in offsets.iter().enumerate() {
            if n_i.dist(&n_e) < 1e-7 {
                facet = Some(i);
                break;
            }
        }
        let a = kr_poly.vertices()[e];
        let b = kr_poly.vertices()[(e + 1) % m];
        if let Some(i) = facet {
            let (n_i, _) = &offsets[i];
            segments.push(ContactSegment {
                start: [a[0] + r * n_i[0], a[1] + r * n_i[1]],
                end: [b[0] + r * n_i[0], b[1] + r * n_i[1]],
                edge: i,
            });
        }
        edge_normals.push(n_e);
    }

    // Arcs: at each vertex of K_r sweep from the incoming edge normal to the
    // outgoing edge normal (counterclockwise).
    let mut arcs: Vec<ContactArc> = Vec::with_capacity(m);
    for v in 0..m {
        let prev = edge_normals[(v + m - 1) % m].clone();
        let next = edge_normals[v].clone();
        let a0 = prev[1].atan2(prev[0]);
        let mut a1 = next[1].atan2(next[0]);
        while a1 < a0 - 1e-12 {
            a1 += 2.0 * std::f64::consts::PI;
        }
        arcs.push(ContactArc {
            center: kr_poly.vertices()[v],
            radius: r,
            angle_start: a0,
            angle_end: a1,
        });
    }

    let boundary_len = p.perimeter();
    let contact_len: f64 = segments.iter().map(|s| s.length()).sum();
    let gained_len: f64 = arcs.iter().map(|a| a.length()).sum();
    let lost_len = boundary_len - contact_len;
    Ok(ContactDecomposition2D {
        segments,
        arcs,
        boundary_len,
        contact_len,
        lost_len,
        gained_len,
        sym_diff_len: lost_len + gained_len,
    })
}

/// Exact boundary measures of the opening of a 3D axis-aligned box:
/// every face keeps an inner contact rectangle, the twelve edges round
/// into quarter cylinders and the corners into eighth spheres. Returns
/// `None` when the body is not an axis box (use the Monte Carlo estimator
/// instead).
pub fn axis_box_measures_3d(k: &HPolytope, r: f64) -> Result<Option<ContactMeasures3D>> {
    if k.dim() != 3 {
        return Ok(None);
    }
    let mut lo = [f64::NEG_INFINITY; 3];
    let mut hi = [f64::INFINITY; 3];
    for h in k.halfspaces() {
        let axis = (0..3).find(|&d| (h.normal[d].abs() - 1.0).abs() <= 1e-12);
        let Some(d) = axis else { return Ok(None) };
        if (0..3).any(|e| e != d && h.normal[e].abs() > 1e-12) {
            return Ok(None);
        }
        if h.normal[d] > 0.0 {
            hi[d] = hi[d].min(h.offset);
        } else {
            lo[d] = lo[d].max(-h.offset);
        }
    }
    let sides = [hi[0] - lo[0], hi[1] - lo[1], hi[2] - lo[2]];
    let r_o = 0.5 * sides.iter().cloned().fold(f64::INFINITY, f64::min);
    if !(r > 0.0) || r >= r_o {
        return Err(Error::DegenerateBody(format!(
            "rolling radius {r} outside (0, {r_o})"
        )));
    }
    let boundary = 2.0 * (sides[0] * sides[1] + sides[1] * sides[2] + sides[2] * sides[0]);
    let core = [sides[0] - 2.0 * r, sides[1] - 2.0 * r, sides[2] - 2.0 * r];
    let contact = 2.0 * (core[0] * core[1] + core[1] * core[2] + core[2] * core[0]);
    let lost = boundary - contact;
    let gained =
        2.0 * std::f64::consts::PI * r * (core[0] + core[1] + core[2])
            + 4.0 * std::f64::consts::PI * r * r;
    Ok(Some(ContactMeasures3D {
        boundary_area: boundary,
        contact_area: contact,
        lost_area: lost,
        gained_area: gained,
        sym_diff_area: lost + gained,
    }))
}

/// Exact boundary areas of a 3D opening (axis boxes only).
#[derive(Debug, Clone, serde::Serialize)]
pub struct ContactMeasures3D {
    pub boundary_area: f64,
    pub contact_area: f64,
    pub lost_area: f64,
    pub gained_area: f64,
    pub sym_diff_area: f64,
}

/// One polytope facet prepared for uniform surface sampling.
struct Facet {
    area: f64,
    kind: FacetKind,
}

enum FacetKind {
    /// n = 1: a single endpoint.
    Point(Vector),
    /// n = 2: a segment.
    Segment { a: Vector, b: Vector },
    /// n = 3: fan triangulation (apex, triangles with cumulative areas).
    Polygon {
        apex: Vector,
        tris: Vec<(Vector, Vector, f64)>,
        cumulative: Vec<f64>,
    },
}

impl Facet {
    fn sample(&self, s: &mut SampleStream) -> Vector {
        match &self.kind {
            FacetKind::Point(p) => p.clone(),
            FacetKind::Segment { a, b } => {
                let t = s.next_f64();
                a.axpy(t, &(b - a))
            }
            FacetKind::Polygon {
                apex,
                tris,
                cumulative,
            } => {
                let u = s.next_f64() * cumulative.last().copied().unwrap_or(1.0);
                let idx = cumulative.partition_point(|&c| c < u).min(tris.len() - 1);
                let (b, c, _) = &tris[idx];
                // Uniform point in the triangle (apex, b, c).
                let su = s.next_f64().sqrt();
                let v = s.next_f64();
                apex.scale(1.0 - su)
                    .axpy(su * (1.0 - v), b)
                    .axpy(su * v, c)
            }
        }
    }
}

/// Decompose the boundary of a polytope into facets with exact measures
/// (counting measure in R^1, length in R^2, area in R^3).
fn boundary_facets(k: &HPolytope) -> Result<Vec<Facet>> {
    let dim = k.dim();
    let mut facets = Vec::new();
    for h in k.halfspaces() {
        let on: Vec<&Vector> = k
            .vertices()
            .iter()
            .filter(|v| h.violation(v).abs() <= 1e-9)
            .collect();
        match dim {
            1 => {
                if let Some(v) = on.first() {
                    facets.push(Facet {
                        area: 1.0,
                        kind: FacetKind::Point((*v).clone()),
                    });
                }
            }
            2 => {
                if on.len() >= 2 {
                    let t = Vector(vec![-h.normal[1], h.normal[0]]);
                    let lo = on
                        .iter()
                        .min_by(|a, b| t.dot(a).partial_cmp(&t.dot(b)).unwrap())
                        .unwrap();
                    let hi = on
                        .iter()
                        .max_by(|a, b| t.dot(a).partial_cmp(&t.dot(b)).unwrap())
                        .unwrap();
                    let area = lo.dist(hi);
                    if area > 1e-12 {
                        facets.push(Facet {
                            area,
                            kind: FacetKind::Segment {
                                a: (*lo).clone(),
                                b: (*hi).clone(),
                            },
                        });
                    }
                }
            }
            3 => {
                if on.len() >= 3 {
                    // In-plane frame.
                    let n = &h.normal;
                    let mut u = if n[0].abs() < 0.9 {
                        Vector(vec![1.0, 0.0, 0.0])
                    } else {
                        Vector(vec![0.0, 1.0, 0.0])
                    };
                    u = u.axpy(-u.dot(n), n).normalized().unwrap();
                    let v = Vector(vec![
                        n[1] * u[2] - n[2] * u[1],
                        n[2] * u[0] - n[0] * u[2],
                        n[0] * u[1] - n[1] * u[0],
                    ]);
                    let centroid = on
                        .iter()
                        .fold(Vector::zeros(3), |acc, p| acc.axpy(1.0, p))
                        .scale(1.0 / on.len() as f64);
                    let mut pts: Vec<(f64, Vector)> = on
                        .iter()
                        .map(|p| {
                            let d = *p - &centroid;
                            (d.dot(&v).atan2(d.dot(&u)), (*p).clone())
                        })
                        .collect();
                    pts.sort_by(|a, b| a.0.partial_cmp(&b.0).unwrap());
                    let apex = pts[0].1.clone();
                    let mut tris = Vec::new();
                    let mut cumulative = Vec::new();
                    let mut acc = 0.0;
                    for w in 1..(pts.len() - 1) {
                        let b = pts[w].1.clone();
                        let c = pts[w + 1].1.clone();
                        let ab = &b - &apex;
                        let ac = &c - &apex;
                        let cr = Vector(vec![
                            ab[1] * ac[2] - ab[2] * ac[1],
                            ab[2] * ac[0] - ab[0] * ac[2],
                            ab[0] * ac[1] - ab[1] * ac[0],
                        ]);
                        let area = 0.5 * cr.norm();
                        acc += area;
                        tris.push((b, c, area));
                        cumulative.push(acc);
                    }
                    if acc > 1e-12 {
                        facets.push(Facet {
                            area: acc,
                            kind: FacetKind::Polygon {
                                apex,
                                tris,
                                cumulative,
                            },
                        });
                    }
                }
            }
            _ => {
                return Err(Error::InvalidInput(format!(
                    "boundary sampling unsupported in dimension {dim}"
                )))
            }
        }
    }
    if facets.is_empty() {
        return Err(Error::DegenerateBody("no boundary facets found".into()));
    }
    Ok(facets)
}

/// Monte Carlo estimate of a boundary measure.
#[derive(Debug, Clone, serde::Serialize)]
pub struct McEstimate {
    /// Estimate of `H^{n-1}(boundary K minus boundary K(r))`.
    pub estimate: f64,
    /// One standard error of the estimate.
    pub std_error: f64,
    /// Exact `H^{n-1}(boundary K)` used for weighting.
    pub boundary_measure: f64,
    /// Fraction of samples classified off the opening boundary.
    pub miss_fraction: f64,
    pub samples: u64,
    pub seed: u64,
}

/// Estimate `H^{n-1}(boundary K minus boundary K(r))` by uniform boundary
/// sampling: facet areas are exact, the facet and the point within it are
/// drawn from the per-sample stream `(seed, index)`, and a sample `x` lies
/// on `boundary K(r)` iff `dist(x, K_r) <= r + 1e-9`. Deterministic for any
/// worker count because the miss count is an integer reduced in index order.
pub fn boundary_measure_mc(
    k: &HPolytope,
    r: f64,
    samples: u64,
    seed: u64,
) -> Result<McEstimate> {
    if samples == 0 {
        return Err(Error::InvalidSampleCount("need at least one sample".into()));
    }
    let kr = inner_parallel(k, r)?;
    let facets = boundary_facets(k)?;
    let total: f64 = facets.iter().map(|f| f.area).sum();
    let cumulative: Vec<f64> = facets
        .iter()
        .scan(0.0, |acc, f| {
            *acc += f.area;
            Some(*acc)
        })
        .collect();

    let n = samples as usize;
    let misses: u64 = map_indexed(n, |i| {
        let mut s = SampleStream::new(seed, i as u64);
        let u = s.next_f64() * total;
        let fi = cumulative.partition_point(|&c| c < u).min(facets.len() - 1);
        let x = facets[fi].sample(&mut s);
        let d = kr.dist(&x).expect("projection converges on offset body");
        u64::from(d > r + MEMBERSHIP_TOL)
    })
    .into_iter()
    .sum();

    let p = misses as f64 / samples as f64;
    let se = total * (p * (1.0 - p) / samples as f64).sqrt();
    Ok(McEstimate {
        estimate: total * p,
        std_error: se,
        boundary_measure: total,
        miss_fraction: p,
        samples,
        seed,
    })
}

/// Walk from an interior point along `direction` to the body's boundary by
/// bisection on membership. `direction` need not be unit.
pub fn boundary_point<B: ConvexBody + ?Sized>(
    body: &B,
    interior: &Vector,
    direction: &Vector,
) -> Result<Vector> {
    let d = direction.normalized()?;
    let mut hi = 1.0_f64;
    let mut grow = 0;
    while body.contains(&interior.axpy(hi, &d), 0.0) {
        hi *= 2.0;
        grow += 1;
        if grow > 100 {
            return Err(Error::UnboundedBody("ray never left the body".into()));
        }
    }
    let mut lo = 0.0_f64;
    for _ in 0..80 {
        let mid = 0.5 * (lo + hi);
        if body.contains(&interior.axpy(mid, &d), 0.0) {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok(interior.axpy(0.5 * (lo + hi), &d))
}
