//! Smooth maximum, `C^{1,1}` convex extension from a ball, annulus
//! patchwork, and grid convex envelopes with second-difference
//! certification.
//!
//! The smooth maximum replaces `max{x, y} = (x + y + |x-y|)/2` by
//! `M(x, y) = (x + y + theta(x-y))/2` where `theta` is the convex even
//! `C^{1,1}` cap that equals `|t|` exactly for `|t| >= 1`. Gluing a convex
//! `h` on a ball with the quadratic `q(x) = a|x|^2 - b` through `M` yields
//! a convex extension to all of space that reproduces `h` on the inner
//! ball bit-for-bit. The patchwork stacks regularized pieces on annuli
//! behind barrier functions, and its convex envelope is recovered on grids
//! as an exact lower convex hull.

use crate::error::{Error, Result};
use crate::funcreg::{PCQFunction, RegularizedFunction};
use crate::geometry::{solve_linear, Matrix, Vector};
use crate::rng::SampleStream;

/// The `C^{1,1}` cap: `theta(t) = (t^2 + 1)/2` for `|t| <= 1`, `|t|`
/// beyond. Even, convex, 1-Lipschitz, and `theta(t) = |t|` iff `|t| >= 1`.
pub fn theta(t: f64) -> f64 {
    if t.abs() >= 1.0 {
        t.abs()
    } else {
        0.5 * (t * t + 1.0)
    }
}

/// Derivative of [`theta`]; continuous, `|theta'| <= 1`.
pub fn theta_prime(t: f64) -> f64 {
    if t.abs() >= 1.0 {
        t.signum()
    } else {
        t
    }
}

/// Smooth maximum `M(x, y) = (x + y + theta(x - y))/2`.
///
/// Equals `max(x, y)` exactly (same floating-point value) when
/// `|x - y| >= 1`, exceeds it otherwise; symmetric, nondecreasing in each
/// argument, jointly convex.
pub fn smooth_max(x: f64, y: f64) -> f64 {
    if (x - y).abs() >= 1.0 {
        x.max(y)
    } else {
        0.5 * (x + y + theta(x - y))
    }
}

/// Partial derivatives of the smooth maximum:
/// `((1 + theta'(x-y))/2, (1 - theta'(x-y))/2)`.
pub fn smooth_max_partials(x: f64, y: f64) -> (f64, f64) {
    let tp = theta_prime(x - y);
    (0.5 * (1.0 + tp), 0.5 * (1.0 - tp))
}

/// A convex function with gradients, the common currency of this module.
pub trait ConvexC1 {
    fn dim(&self) -> usize;
    fn value(&self, x: &Vector) -> Result<f64>;
    fn gradient(&self, x: &Vector) -> Result<Vector>;
}

impl ConvexC1 for PCQFunction {
    fn dim(&self) -> usize {
        self.dim()
    }

    fn value(&self, x: &Vector) -> Result<f64> {
        Ok(self.eval(x))
    }

    /// One active-piece gradient; callers requiring `C^{1,1}` inputs must
    /// pass smooth instances (single pieces or non-kinked maxima).
    fn gradient(&self, x: &Vector) -> Result<Vector> {
        Ok(self.subdiff(x).first().clone())
    }
}

impl ConvexC1 for RegularizedFunction {
    fn dim(&self) -> usize {
        self.source().dim()
    }

    fn value(&self, x: &Vector) -> Result<f64> {
        RegularizedFunction::value(self, x)
    }

    fn gradient(&self, x: &Vector) -> Result<Vector> {
        RegularizedFunction::gradient(self, x)
    }
}

/// Pointwise smooth maximum of two convex functions; convex, and equal to
/// the plain maximum wherever the two differ by at least one.
pub struct ComposedMax {
    pub u: Box<dyn ConvexC1>,
    pub v: Box<dyn ConvexC1>,
}

/// `x -> M(u(x), v(x))`.
pub fn smooth_max_compose(u: Box<dyn ConvexC1>, v: Box<dyn ConvexC1>) -> ComposedMax {
    ComposedMax { u, v }
}

impl ConvexC1 for ComposedMax {
    fn dim(&self) -> usize {
        self.u.dim()
    }

    fn value(&self, x: &Vector) -> Result<f64> {
        Ok(smooth_max(self.u.value(x)?, self.v.value(x)?))
    }

    fn gradient(&self, x: &Vector) -> Result<Vector> {
        let (mu, mv) = smooth_max_partials(self.u.value(x)?, self.v.value(x)?);
        Ok(self.u.gradient(x)?.scale(mu).axpy(mv, &self.v.gradient(x)?))
    }
}

// ---------------------------------------------------------------------------
// Extension from a ball
// ---------------------------------------------------------------------------

/// Convex `C^{1,1}` extension of `h` from the ball `|x| <= r` to all of
/// space: the smooth maximum of `h` with a steep quadratic
/// `q(x) = a|x|^2 - b` inside `|x| <= rho`, and `q` alone beyond.
pub struct GluedFunction {
    h: Box<dyn ConvexC1>,
    /// q(x) = quad_a |x|^2 - quad_b
    pub quad_a: f64,
    pub quad_b: f64,
    /// Inner radius: H = h for |x| <= r.
    pub r: f64,
    /// Switch radius rho = (r + R)/2.
    pub rho: f64,
    /// Verified annulus width: M(h, q) = q for rho <= |x| <= rho + epsilon.
    pub epsilon: f64,
    /// inf of h over |x| <= r and sup of h over |x| = rho, as sampled.
    pub inner_min: f64,
    pub sphere_max: f64,
}

impl GluedFunction {
    pub fn q_value(&self, x: &Vector) -> f64 {
        self.quad_a * x.norm_sq() - self.quad_b
    }

    pub fn inner_value(&self, x: &Vector) -> Result<f64> {
        self.h.value(x)
    }
}

impl ConvexC1 for GluedFunction {
    fn dim(&self) -> usize {
        self.h.dim()
    }

    fn value(&self, x: &Vector) -> Result<f64> {
        if x.norm() <= self.rho {
            Ok(smooth_max(self.h.value(x)?, self.q_value(x)))
        } else {
            Ok(self.q_value(x))
        }
    }

    fn gradient(&self, x: &Vector) -> Result<Vector> {
        if x.norm() <= self.rho {
            let (mu, mv) = smooth_max_partials(self.h.value(x)?, self.q_value(x));
            Ok(self
                .h
                .gradient(x)?
                .scale(mu)
                .axpy(mv * 2.0 * self.quad_a, x))
        } else {
            Ok(x.scale(2.0 * self.quad_a))
        }
    }
}

/// Deterministic direction set on the unit sphere of R^n.
fn sphere_directions(n: usize, count: usize) -> Vec<Vector> {
    match n {
        1 => vec![Vector(vec![1.0]), Vector(vec![-1.0])],
        2 => (0..count)
            .map(|i| {
                let a = 2.0 * std::f64::consts::PI * i as f64 / count as f64;
                Vector(vec![a.cos(), a.sin()])
            })
            .collect(),
        _ => {
            // Fibonacci sphere.
            let golden = std::f64::consts::PI * (3.0 - 5f64.sqrt());
            (0..count)
                .map(|i| {
                    let z = 1.0 - 2.0 * (i as f64 + 0.5) / count as f64;
                    let rad = (1.0 - z * z).max(0.0).sqrt();
                    let a = golden * i as f64;
                    Vector(vec![rad * a.cos(), rad * a.sin(), z])
                })
                .collect()
        }
    }
}

/// Compass-search minimization of `f` over the ball `|x| <= radius`.
fn compass_min_ball(
    f: &dyn Fn(&Vector) -> Result<f64>,
    start: &Vector,
    radius: f64,
) -> Result<(Vector, f64)> {
    let n = start.dim();
    let mut dirs: Vec<Vector> = Vec::new();
    for mask in 0..3u32.pow(n as u32) {
        let mut v = vec![0.0; n];
        let mut m = mask;
        for item in v.iter_mut() {
            *item = (m % 3) as f64 - 1.0;
            m /= 3;
        }
        let vec = Vector(v);
        if vec.norm() > 1e-9 {
            dirs.push(vec.normalized()?);
        }
    }
    let mut x = start.clone();
    let mut val = f(&x)?;
    let mut step = 0.25 * radius.max(1e-6);
    while step > 1e-12 * radius.max(1.0) {
        let mut improved = false;
        for d in &dirs {
            let mut cand = x.axpy(step, d);
            let cn = cand.norm();
            if cn > radius {
                cand = cand.scale(radius / cn);
            }
            let cv = f(&cand)?;
            if cv < val - 1e-16 {
                x = cand;
                val = cv;
                improved = true;
                break;
            }
        }
        if !improved {
            step *= 0.5;
        }
    }
    Ok((x, val))
}

/// Extend a convex `h` with Lipschitz gradient on `B(0, R)` beyond the ball
/// `|x| <= r`: choose `rho = (r + R)/2`, sample `m = inf_{|x|<=r} h` and
/// `M = sup_{|x|=rho} h`, and glue with `q(x) = a|x|^2 - b` where
///
/// ```text
/// a = (M - m + 2 + s)/(rho^2 - r^2),   b = a r^2 - (m - 1 - s/2),
/// ```
///
/// with margin `s = 1/2` so that `q < m - 1` on `|x| <= r` and `q > M + 1`
/// on `|x| = rho` hold with room for sampling error; both are re-verified
/// by probes before returning (`MarginFailure` otherwise). The outer width
/// `epsilon` with `M(h, q) = q` on `rho <= |x| <= rho + epsilon` is located
/// by bisection on `q - h >= 1`.
pub fn extend(h: Box<dyn ConvexC1>, r: f64, big_r: f64) -> Result<GluedFunction> {
    if !(0.0 < r && r < big_r) {
        return Err(Error::InvalidInput(format!(
            "need 0 < r < R, got r = {r}, R = {big_r}"
        )));
    }
    let n = h.dim();
    let rho = 0.5 * (r + big_r);

    // inf over the closed ball |x| <= r: dense radial samples, then a
    // compass polish (h is convex, so the local min is global).
    let dirs = sphere_directions(n, if n == 2 { 128 } else { 256 });
    let mut best = (Vector::zeros(n), h.value(&Vector::zeros(n))?);
    for d in &dirs {
        for j in 1..=16 {
            let x = d.scale(r * j as f64 / 16.0);
            let v = h.value(&x)?;
            if v < best.1 {
                best = (x, v);
            }
        }
    }
    let value_fn = |x: &Vector| h.value(x);
    let (_, inner_min) = compass_min_ball(&value_fn, &best.0, r)?;

    // sup over the sphere |x| = rho: dense directions plus a fine local
    // sweep around the best one in 2D.
    let sup_dirs = sphere_directions(n, if n == 2 { 2048 } else { 4096 });
    let mut sphere_max = f64::NEG_INFINITY;
    let mut best_i = 0;
    for (i, d) in sup_dirs.iter().enumerate() {
        let v = h.value(&d.scale(rho))?;
        if v > sphere_max {
            sphere_max = v;
            best_i = i;
        }
    }
    if n == 2 {
        let base = 2.0 * std::f64::consts::PI * best_i as f64 / sup_dirs.len() as f64;
        let width = 2.0 * std::f64::consts::PI / sup_dirs.len() as f64;
        for j in 0..200 {
            let a = base - width + 2.0 * width * j as f64 / 199.0;
            let v = h.value(&Vector(vec![rho * a.cos(), rho * a.sin()]))?;
            sphere_max = sphere_max.max(v);
        }
    }

    let s = 0.5;
    let a = (sphere_max - inner_min + 2.0 + s) / (rho * rho - r * r);
    let b = a * r * r - (inner_min - 1.0 - s / 2.0);
    let q = |x: &Vector| a * x.norm_sq() - b;

    // Verify the margins against fresh probes.
    for d in &dirs {
        for j in 0..=16 {
            let x = d.scale(r * j as f64 / 16.0);
            if h.value(&x)? - q(&x) <= 1.0 {
                return Err(Error::MarginFailure(format!(
                    "q reaches within 1 of h at |x| = {} <= r; inner sampling too coarse",
                    x.norm()
                )));
            }
        }
    }
    for d in &sup_dirs {
        let x = d.scale(rho);
        if q(&x) - h.value(&x)? <= 1.0 {
            return Err(Error::MarginFailure(format!(
                "q fails to clear h + 1 on the switch sphere (direction {:?})",
                d.as_slice()
            )));
        }
    }

    // Outer agreement width by bisection on min over spheres of q - h - 1.
    let eps_max = 0.45 * (big_r - rho);
    let ok = |e: f64| -> Result<bool> {
        for d in &dirs {
            let x = d.scale(rho + e);
            if q(&x) - h.value(&x)? < 1.0 {
                return Ok(false);
            }
        }
        Ok(true)
    };
    let epsilon = if ok(eps_max)? {
        eps_max
    } else {
        let mut lo = 0.0;
        let mut hi = eps_max;
        for _ in 0..60 {
            let mid = 0.5 * (lo + hi);
            if ok(mid)? {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        lo
    };

    Ok(GluedFunction {
        h,
        quad_a: a,
        quad_b: b,
        r,
        rho,
        epsilon,
        inner_min,
        sphere_max,
    })
}

// ---------------------------------------------------------------------------
// Barriers and patchwork
// ---------------------------------------------------------------------------

/// `psi(s) = 0` for `s <= 0`, `s^2/(1-s)` for `0 <= s < 1`; convex, `C^1`
/// at the gluing point, blows up at `s = 1`.
fn psi(s: f64) -> f64 {
    if s <= 0.0 {
        0.0
    } else {
        s * s / (1.0 - s)
    }
}

fn psi_prime(s: f64) -> f64 {
    if s <= 0.0 {
        0.0
    } else {
        let d = 1.0 - s;
        s * (2.0 - s) / (d * d)
    }
}

/// Barrier `theta_k` on the open interval `(k-2, k+1)`: zero exactly on
/// `[k-1, k]`, convex, divergent at both endpoints.
#[derive(Debug, Clone, Copy)]
pub struct Barrier {
    pub k: i64,
}

/// Construct `theta_k(t) = psi(k - 1 - t) + psi(t - k)`.
pub fn barrier(k: i64) -> Barrier {
    Barrier { k }
}

impl Barrier {
    pub fn domain(&self) -> (f64, f64) {
        (self.k as f64 - 2.0, self.k as f64 + 1.0)
    }

    pub fn value(&self, t: f64) -> Result<f64> {
        let (lo, hi) = self.domain();
        if t <= lo || t >= hi {
            return Err(Error::DomainExceeded(format!(
                "barrier {} evaluated at {t} outside ({lo}, {hi})",
                self.k
            )));
        }
        let k = self.k as f64;
        Ok(psi(k - 1.0 - t) + psi(t - k))
    }

    pub fn derivative(&self, t: f64) -> Result<f64> {
        let (lo, hi) = self.domain();
        if t <= lo || t >= hi {
            return Err(Error::DomainExceeded(format!(
                "barrier {} derivative at {t} outside ({lo}, {hi})",
                self.k
            )));
        }
        let k = self.k as f64;
        Ok(-psi_prime(k - 1.0 - t) + psi_prime(t - k))
    }
}

/// The annulus patchwork `phi = min_k [g_k + theta_k(|x|)]`: finite and
/// continuous where some barrier window covers `|x|`, locally the minimum
/// of at most three pieces, squeezed between `f` and each `g_k` on its
/// annulus.
pub struct PatchworkFunction {
    f: PCQFunction,
    /// `pieces[k-1]` is `g_k`, regularized for the ball `B(0, 2k)`.
    pieces: Vec<RegularizedFunction>,
    max_index: i64,
    /// Set when the coercivity probe failed; the construction is still
    /// usable but the envelope may disagree with `f` on a large set.
    pub coercivity_warning: Option<String>,
}

/// Assemble the patchwork from regularizers `g_k` for `B(0, 2k)`,
/// `k = 1..=max_index`. Probes coercivity: the minimum of `f` on the
/// sphere `|x| = max_index` must exceed its minimum over the unit ball.
pub fn patchwork(
    f: &PCQFunction,
    regularizers: Vec<RegularizedFunction>,
    max_index: i64,
) -> Result<PatchworkFunction> {
    if max_index < 1 || regularizers.len() != max_index as usize {
        return Err(Error::InvalidInput(format!(
            "need one regularizer per index 1..={max_index}, got {}",
            regularizers.len()
        )));
    }
    for (i, g) in regularizers.iter().enumerate() {
        let k = (i + 1) as f64;
        if g.domain_radius() + 1e-9 < 2.0 * k {
            return Err(Error::InvalidInput(format!(
                "regularizer {} must cover B(0, {}), has domain radius {}",
                i + 1,
                2.0 * k,
                g.domain_radius()
            )));
        }
    }
    let n = f.dim();
    let dirs = sphere_directions(n, if n == 1 { 2 } else { 512 });
    let far = dirs
        .iter()
        .map(|d| f.eval(&d.scale(max_index as f64)))
        .fold(f64::INFINITY, f64::min);
    let mut near = f64::INFINITY;
    for d in &dirs {
        for j in 0..=8 {
            near = near.min(f.eval(&d.scale(j as f64 / 8.0)));
        }
    }
    let coercivity_warning = if far <= near {
        Some(format!(
            "coercivity probe failed: min f on |x| = {max_index} is {far}, \
             not above the inner minimum {near}"
        ))
    } else {
        None
    };
    Ok(PatchworkFunction {
        f: f.clone(),
        pieces: regularizers,
        max_index,
        coercivity_warning,
    })
}

impl PatchworkFunction {
    pub fn source(&self) -> &PCQFunction {
        &self.f
    }

    pub fn max_index(&self) -> i64 {
        self.max_index
    }

    /// `phi_k(x) = g_k(x) + theta_k(|x|)` where the window covers `|x|`,
    /// `+inf` otherwise.
    pub fn piece_value(&self, k: i64, x: &Vector) -> Result<f64> {
        if k < 1 || k > self.max_index {
            return Ok(f64::INFINITY);
        }
        let t = x.norm();
        let bar = barrier(k);
        let (lo, hi) = bar.domain();
        if t <= lo || t >= hi {
            return Ok(f64::INFINITY);
        }
        Ok(self.pieces[(k - 1) as usize].value(x)? + bar.value(t)?)
    }

    /// Indices whose windows contain `|x|` (at most three).
    pub fn active_indices(&self, x: &Vector) -> Vec<i64> {
        let t = x.norm();
        let lo = (t - 1.0).floor() as i64;
        (lo..=lo + 3)
            .filter(|&k| {
                k >= 1 && k <= self.max_index && {
                    let (a, b) = barrier(k).domain();
                    t > a && t < b
                }
            })
            .collect()
    }

    /// `phi(x) = min_k phi_k(x)`.
    pub fn value(&self, x: &Vector) -> Result<f64> {
        let mut best = f64::INFINITY;
        for k in self.active_indices(x) {
            best = best.min(self.piece_value(k, x)?);
        }
        if !best.is_finite() {
            return Err(Error::DomainExceeded(format!(
                "patchwork not finite at |x| = {} (covered: |x| < {})",
                x.norm(),
                self.max_index + 1
            )));
        }
        Ok(best)
    }
}

// ---------------------------------------------------------------------------
// Grid convex envelope
// ---------------------------------------------------------------------------

/// Lower convex hull of grid samples `(node, phi(node))`: the exact convex
/// envelope of the sampled data, stored as its affine facets. Evaluation is
/// the max over facet planes (convex by construction).
pub struct EnvelopeFunction {
    dim: usize,
    nodes: Vec<Vector>,
    phi: Vec<f64>,
    values: Vec<f64>,
    /// Affine pieces (w, c): F(x) = max <w, x> + c.
    facets: Vec<(Vector, f64)>,
    hull_vertex: Vec<bool>,
    lo: Vec<f64>,
    hi: Vec<f64>,
}

impl EnvelopeFunction {
    pub fn nodes(&self) -> &[Vector] {
        &self.nodes
    }

    pub fn phi(&self) -> &[f64] {
        &self.phi
    }

    /// Envelope values at the input nodes.
    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn facets(&self) -> &[(Vector, f64)] {
        &self.facets
    }

    /// Whether node `i` is a vertex of the lower hull (`F = phi` there).
    pub fn is_hull_vertex(&self, i: usize) -> bool {
        self.hull_vertex[i]
    }

    /// Evaluate the envelope inside the grid bounding box.
    pub fn value(&self, x: &Vector) -> Result<f64> {
        for d in 0..self.dim {
            if x[d] < self.lo[d] - 1e-12 || x[d] > self.hi[d] + 1e-12 {
                return Err(Error::DomainExceeded(format!(
                    "envelope evaluated outside the grid box at coordinate {d}"
                )));
            }
        }
        Ok(self
            .facets
            .iter()
            .map(|(w, c)| w.dot(x) + c)
            .fold(f64::NEG_INFINITY, f64::max))
    }
}

/// Exact lower convex hull of the lifted samples. 1D uses a monotone
/// chain; 2D an incremental lifted hull. Affinely flat data (all samples
/// on one plane) yields that plane; degenerate node sets are rejected.
pub fn convex_envelope(nodes: &[Vector], phi: &[f64]) -> Result<EnvelopeFunction> {
    if nodes.is_empty() || nodes.len() != phi.len() {
        return Err(Error::InvalidInput(
            "need matching, nonempty nodes and values".into(),
        ));
    }
    if phi.iter().any(|v| !v.is_finite()) {
        return Err(Error::InvalidInput("phi must be finite at all nodes".into()));
    }
    let dim = nodes[0].dim();
    let lo: Vec<f64> = (0..dim)
        .map(|d| nodes.iter().map(|p| p[d]).fold(f64::INFINITY, f64::min))
        .collect();
    let hi: Vec<f64> = (0..dim)
        .map(|d| nodes.iter().map(|p| p[d]).fold(f64::NEG_INFINITY, f64::max))
        .collect();
    let (facets, hull_vertex) = match dim {
        1 => lower_hull_1d(nodes, phi)?,
        2 => lower_hull_2d(nodes, phi)?,
        _ => {
            return Err(Error::InvalidInput(
                "grid envelopes are implemented for dimensions 1 and 2".into(),
            ))
        }
    };
    let values: Vec<f64> = nodes
        .iter()
        .map(|x| {
            facets
                .iter()
                .map(|(w, c)| w.dot(x) + c)
                .fold(f64::NEG_INFINITY, f64::max)
        })
        .collect();
    Ok(EnvelopeFunction {
        dim,
        nodes: nodes.to_vec(),
        phi: phi.to_vec(),
        values,
        facets,
        hull_vertex,
        lo,
        hi,
    })
}

/// Monotone-chain lower hull in 1D.
#[allow(clippy::type_complexity)]
fn lower_hull_1d(nodes: &[Vector], phi: &[f64]) -> Result<(Vec<(Vector, f64)>, Vec<bool>)> {
    let mut order: Vec<usize> = (0..nodes.len()).collect();
    order.sort_by(|&i, &j| nodes[i][0].partial_cmp(&nodes[j][0]).unwrap());
    // Keep the lowest value per duplicate abscissa.
    let mut pts: Vec<(f64, f64, usize)> = Vec::new();
    for &i in &order {
        let x = nodes[i][0];
        if let Some(last) = pts.last_mut() {
            if (x - last.0).abs() < 1e-14 {
                if phi[i] < last.1 {
                    *last = (x, phi[i], i);
                }
                continue;
            }
        }
        pts.push((x, phi[i], i));
    }
    if pts.len() < 2 {
        return Err(Error::DegenerateGrid(
            "1D envelope needs at least two distinct abscissas".into(),
        ));
    }
    let mut hull: Vec<(f64, f64, usize)> = Vec::new();
    for p in pts {
        while hull.len() >= 2 {
            let a = hull[hull.len() - 2];
            let b = hull[hull.len() - 1];
            // Drop b when it lies on or above chord a-p.
            if (b.0 - a.0) * (p.1 - a.1) - (p.0 - a.0) * (b.1 - a.1) <= 1e-15 * (p.0 - a.0).abs().max(1.0)
            {
                hull.pop();
            } else {
                break;
            }
        }
        hull.push(p);
    }
    let mut facets = Vec::with_capacity(hull.len() - 1);
    let mut hull_vertex = vec![false; nodes.len()];
    for w in hull.windows(2) {
        let (x0, y0, i0) = w[0];
        let (x1, y1, i1) = w[1];
        let slope = (y1 - y0) / (x1 - x0);
        facets.push((Vector(vec![slope]), y0 - slope * x0));
        hull_vertex[i0] = true;
        hull_vertex[i1] = true;
    }
    Ok((facets, hull_vertex))
}

/// Incremental 3D convex hull of the lifted nodes; the lower facets
/// (outward normal pointing down) are the envelope.
#[allow(clippy::type_complexity)]
fn lower_hull_2d(nodes: &[Vector], phi: &[f64]) -> Result<(Vec<(Vector, f64)>, Vec<bool>)> {
    let n = nodes.len();
    let pts: Vec<[f64; 3]> = (0..n).map(|i| [nodes[i][0], nodes[i][1], phi[i]]).collect();
    let scale = {
        let mut s = 1.0_f64;
        for p in &pts {
            for c in p {
                s = s.max(c.abs());
            }
        }
        s
    };
    let eps = 1e-9 * scale;

    // Check for affinely flat data: fit a plane through three spread
    // points and test all residuals.
    if let Some(plane) = common_plane(&pts, eps) {
        // conv(phi) = phi: single facet, every node a hull vertex.
        return Ok((vec![plane], vec![true; n]));
    }

    // Initial simplex: four affinely independent points.
    let (i0, i1, i2, i3) = initial_simplex(&pts, eps).ok_or_else(|| {
        Error::DegenerateGrid("lifted nodes are affinely degenerate".into())
    })?;

    #[derive(Clone)]
    struct Face {
        v: [usize; 3],
        normal: [f64; 3],
        offset: f64,
    }
    let mk_face = |a: usize, b: usize, c: usize, inside: &[f64; 3]| -> Face {
        let (pa, pb, pc) = (pts[a], pts[b], pts[c]);
        let u = [pb[0] - pa[0], pb[1] - pa[1], pb[2] - pa[2]];
        let w = [pc[0] - pa[0], pc[1] - pa[1], pc[2] - pa[2]];
        let mut nrm = [
            u[1] * w[2] - u[2] * w[1],
            u[2] * w[0] - u[0] * w[2],
            u[0] * w[1] - u[1] * w[0],
        ];
        let mut off = nrm[0] * pa[0] + nrm[1] * pa[1] + nrm[2] * pa[2];
        let side = nrm[0] * inside[0] + nrm[1] * inside[1] + nrm[2] * inside[2] - off;
        let mut v = [a, b, c];
        if side > 0.0 {
            nrm = [-nrm[0], -nrm[1], -nrm[2]];
            off = -off;
            v.swap(1, 2);
        }
        Face {
            v,
            normal: nrm,
            offset: off,
        }
    };

    let inside = [
        (pts[i0][0] + pts[i1][0] + pts[i2][0] + pts[i3][0]) / 4.0,
        (pts[i0][1] + pts[i1][1] + pts[i2][1] + pts[i3][1]) / 4.0,
        (pts[i0][2] + pts[i1][2] + pts[i2][2] + pts[i3][2]) / 4.0,
    ];
    let mut faces: Vec<Face> = vec![
        mk_face(i0, i1, i2, &inside),
        mk_face(i0, i1, i3, &inside),
        mk_face(i0, i2, i3, &inside),
        mk_face(i1, i2, i3, &inside),
    ];

    // Deterministically shuffled insertion order.
    let mut order: Vec<usize> = (0..n).filter(|i| ![i0, i1, i2, i3].contains(i)).collect();
    let mut stream = SampleStream::new(0x9e3779b9, n as u64);
    for i in (1..order.len()).rev() {
        let j = (stream.next_u64() % (i as u64 + 1)) as usize;
        order.swap(i, j);
    }

    for &p in &order {
        let pt = pts[p];
        let mut visible = vec![false; faces.len()];
        let mut any = false;
        for (fi, f) in faces.iter().enumerate() {
            let side =
                f.normal[0] * pt[0] + f.normal[1] * pt[1] + f.normal[2] * pt[2] - f.offset;
            let nn = (f.normal[0].powi(2) + f.normal[1].powi(2) + f.normal[2].powi(2)).sqrt();
            if side > eps * nn.max(1e-300) {
                visible[fi] = true;
                any = true;
            }
        }
        if !any {
            continue;
        }
        // Horizon = directed edges of visible faces whose reverse is not
        // in the visible set.
        use std::collections::HashSet;
        let mut edges: HashSet<(usize, usize)> = HashSet::new();
        for (fi, f) in faces.iter().enumerate() {
            if !visible[fi] {
                continue;
            }
            for e in [(f.v[0], f.v[1]), (f.v[1], f.v[2]), (f.v[2], f.v[0])] {
                if edges.contains(&(e.1, e.0)) {
                    edges.remove(&(e.1, e.0));
                } else {
                    edges.insert(e);
                }
            }
        }
        let keep: Vec<Face> = faces
            .iter()
            .zip(&visible)
            .filter(|(_, &vis)| !vis)
            .map(|(f, _)| f.clone())
            .collect();
        faces = keep;
        for (a, b) in edges {
            faces.push(mk_face(a, b, p, &inside));
        }
    }

    let mut facets: Vec<(Vector, f64)> = Vec::new();
    let mut hull_vertex = vec![false; n];
    for f in &faces {
        let nn = (f.normal[0].powi(2) + f.normal[1].powi(2) + f.normal[2].powi(2)).sqrt();
        if f.normal[2] < -1e-12 * nn {
            // Plane z = w.xy + c from normal form n.(x,y,z) = offset.
            let w = Vector(vec![-f.normal[0] / f.normal[2], -f.normal[1] / f.normal[2]]);
            let c = f.offset / f.normal[2];
            facets.push((w, c));
            for &v in &f.v {
                hull_vertex[v] = true;
            }
        }
    }
    if facets.is_empty() {
        return Err(Error::DegenerateGrid("no lower facets found".into()));
    }
    Ok((facets, hull_vertex))
}

/// If all lifted points lie on one plane (non-vertical), return it.
fn common_plane(pts: &[[f64; 3]], eps: f64) -> Option<(Vector, f64)> {
    // Least-squares plane z = w.xy + c through three spread anchors, then
    // residual test; fall back to full LS on failure of anchor pick.
    let n = pts.len();
    let mut sxx = 0.0;
    let mut sxy = 0.0;
    let mut syy = 0.0;
    let mut sx = 0.0;
    let mut sy = 0.0;
    let mut sz = 0.0;
    let mut sxz = 0.0;
    let mut syz = 0.0;
    for p in pts {
        sxx += p[0] * p[0];
        sxy += p[0] * p[1];
        syy += p[1] * p[1];
        sx += p[0];
        sy += p[1];
        sz += p[2];
        sxz += p[0] * p[2];
        syz += p[1] * p[2];
    }
    let nf = n as f64;
    let a = Matrix::from_rows(&[
        vec![sxx, sxy, sx],
        vec![sxy, syy, sy],
        vec![sx, sy, nf],
    ])
    .ok()?;
    let rhs = Vector(vec![sxz, syz, sz]);
    let sol = solve_linear(&a, &rhs, 1e-30)?;
    let w = Vector(vec![sol[0], sol[1]]);
    let c = sol[2];
    for p in pts {
        if (w[0] * p[0] + w[1] * p[1] + c - p[2]).abs() > eps {
            return None;
        }
    }
    Some((w, c))
}

fn initial_simplex(pts: &[[f64; 3]], eps: f64) -> Option<(usize, usize, usize, usize)> {
    let n = pts.len();
    let i0 = 0;
    let mut i1 = None;
    for j in 1..n {
        let d = dist3(&pts[i0], &pts[j]);
        if d > eps {
            i1 = Some(j);
            break;
        }
    }
    let i1 = i1?;
    let mut i2 = None;
    let mut best = eps;
    for j in 0..n {
        let d = dist_point_line(&pts[j], &pts[i0], &pts[i1]);
        if d > best {
            best = d;
            i2 = Some(j);
        }
    }
    let i2 = i2?;
    let mut i3 = None;
    let mut best = eps;
    for j in 0..n {
        let d = dist_point_plane(&pts[j], &pts[i0], &pts[i1], &pts[i2]);
        if d > best {
            best = d;
            i3 = Some(j);
        }
    }
    Some((i0, i1, i2, i3?))
}

fn dist3(a: &[f64; 3], b: &[f64; 3]) -> f64 {
    ((a[0] - b[0]).powi(2) + (a[1] - b[1]).powi(2) + (a[2] - b[2]).powi(2)).sqrt()
}

fn dist_point_line(p: &[f64; 3], a: &[f64; 3], b: &[f64; 3]) -> f64 {
    let ab = [b[0] - a[0], b[1] - a[1], b[2] - a[2]];
    let ap = [p[0] - a[0], p[1] - a[1], p[2] - a[2]];
    let cr = [
        ab[1] * ap[2] - ab[2] * ap[1],
        ab[2] * ap[0] - ab[0] * ap[2],
        ab[0] * ap[1] - ab[1] * ap[0],
    ];
    let num = (cr[0] * cr[0] + cr[1] * cr[1] + cr[2] * cr[2]).sqrt();
    let den = (ab[0] * ab[0] + ab[1] * ab[1] + ab[2] * ab[2]).sqrt();
    if den == 0.0 {
        0.0
    } else {
        num / den
    }
}

fn dist_point_plane(p: &[f64; 3], a: &[f64; 3], b: &[f64; 3], c: &[f64; 3]) -> f64 {
    let u = [b[0] - a[0], b[1] - a[1], b[2] - a[2]];
    let v = [c[0] - a[0], c[1] - a[1], c[2] - a[2]];
    let nrm = [
        u[1] * v[2] - u[2] * v[1],
        u[2] * v[0] - u[0] * v[2],
        u[0] * v[1] - u[1] * v[0],
    ];
    let nn = (nrm[0] * nrm[0] + nrm[1] * nrm[1] + nrm[2] * nrm[2]).sqrt();
    if nn == 0.0 {
        return 0.0;
    }
    ((p[0] - a[0]) * nrm[0] + (p[1] - a[1]) * nrm[1] + (p[2] - a[2]) * nrm[2]).abs() / nn
}

/// Symmetric second difference `E_h(x) = F(x+h) + F(x-h) - 2 F(x)`;
/// `<= C |h|^2` exactly when `F` has a `C`-Lipschitz gradient.
pub fn second_difference(
    f: &dyn Fn(&Vector) -> Result<f64>,
    x: &Vector,
    h: &Vector,
) -> Result<f64> {
    Ok(f(&x.axpy(1.0, h))? + f(&x.axpy(-1.0, h))? - 2.0 * f(x)?)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::funcreg::regularize;
    use crate::rng::SeqRng;

    #[test]
    fn theta_shape() {
        let mut rng = SeqRng::new(1);
        let mut prev_slope = f64::NEG_INFINITY;
        for i in 0..400 {
            let t = -3.0 + 6.0 * i as f64 / 399.0;
            // Even and above |t| inside, equal outside.
            assert_eq!(theta(t), theta(-t));
            if t.abs() >= 1.0 {
                assert_eq!(theta(t), t.abs());
            } else {
                assert!(theta(t) > t.abs());
            }
            // Non-decreasing slope = convex.
            let h = 1e-5;
            let slope = (theta(t + h) - theta(t - h)) / (2.0 * h);
            assert!(slope >= prev_slope - 1e-9);
            assert!(slope.abs() <= 1.0 + 1e-9, "1-Lipschitz");
            prev_slope = slope;
        }
        // 1-Lipschitz on random pairs.
        for _ in 0..1000 {
            let a = rng.next_range(-4.0, 4.0);
            let b = rng.next_range(-4.0, 4.0);
            assert!((theta(a) - theta(b)).abs() <= (a - b).abs() + 1e-12);
        }
    }

    #[test]
    fn smooth_max_exactness_and_pinned_values() {
        assert_eq!(smooth_max(3.0, 1.0), 3.0);
        assert_eq!(smooth_max(0.0, 1.0), 1.0);
        // M(t, t) = t + theta(0)/2 = t + 1/4.
        for t in [-2.0, 0.0, 0.3, 10.0] {
            assert!((smooth_max(t, t) - (t + 0.25)).abs() < 1e-15);
        }
        let mut rng = SeqRng::new(2);
        for _ in 0..100_000 {
            let x = rng.next_range(-50.0, 50.0);
            let y = rng.next_range(-50.0, 50.0);
            let m = smooth_max(x, y);
            if (x - y).abs() >= 1.0 {
                // Bit-for-bit equality with the plain maximum.
                assert_eq!(m, x.max(y));
            } else {
                assert!(m > x.max(y));
            }
            // Symmetry.
            assert_eq!(m, smooth_max(y, x));
        }
    }

    #[test]
    fn smooth_max_monotone_and_convex() {
        let mut rng = SeqRng::new(3);
        for _ in 0..20_000 {
            let x = rng.next_range(-3.0, 3.0);
            let y = rng.next_range(-3.0, 3.0);
            let t = rng.next_range(0.0, 2.0);
            assert!(smooth_max(x + t, y) >= smooth_max(x, y) - 1e-12);
            assert!(smooth_max(x, y + t) >= smooth_max(x, y) - 1e-12);
            // Joint midpoint convexity.
            let (x2, y2) = (rng.next_range(-3.0, 3.0), rng.next_range(-3.0, 3.0));
            let mid = smooth_max(0.5 * (x + x2), 0.5 * (y + y2));
            assert!(mid <= 0.5 * (smooth_max(x, y) + smooth_max(x2, y2)) + 1e-12);
        }
    }

    #[test]
    fn composition_cases() {
        // u = v: M(u,u) = u + 1/4.
        let u = PCQFunction::quadratic(Matrix::from_rows(&[vec![2.0]]).unwrap(), Vector::zeros(1), 0.0)
            .unwrap();
        let m = smooth_max_compose(Box::new(u.clone()), Box::new(u.clone()));
        for t in [-1.0, 0.0, 0.5] {
            let x = Vector(vec![t]);
            assert!((m.value(&x).unwrap() - (u.eval(&x) + 0.25)).abs() < 1e-14);
        }

        // Far-apart affine pieces: composition is the plain max.
        let lo = PCQFunction::max_affine(vec![(Vector(vec![1.0]), 0.0)]).unwrap();
        let hi = PCQFunction::max_affine(vec![(Vector(vec![1.0]), 5.0)]).unwrap();
        let m = smooth_max_compose(Box::new(lo), Box::new(hi));
        for t in [-1.0, 0.2, 2.0] {
            let x = Vector(vec![t]);
            assert_eq!(m.value(&x).unwrap(), t + 5.0);
        }

        // x^2 vs 1: convex on random triples.
        let sq = PCQFunction::quadratic(
            Matrix::from_rows(&[vec![2.0]]).unwrap(),
            Vector::zeros(1),
            0.0,
        )
        .unwrap();
        let one = PCQFunction::max_affine(vec![(Vector::zeros(1), 1.0)]).unwrap();
        let m = smooth_max_compose(Box::new(sq), Box::new(one));
        let mut rng = SeqRng::new(4);
        for _ in 0..10_000 {
            let a = Vector(vec![rng.next_range(-2.0, 2.0)]);
            let b = Vector(vec![rng.next_range(-2.0, 2.0)]);
            let mid = a.axpy(1.0, &b).scale(0.5);
            assert!(
                m.value(&mid).unwrap()
                    <= 0.5 * (m.value(&a).unwrap() + m.value(&b).unwrap()) + 1e-12
            );
        }
    }

    #[test]
    fn extension_of_square_function() {
        // h(x) = x^2 on B(0,2), r = 1: m = 0, rho = 1.5, M = 2.25,
        // a = 4.75/1.25 = 3.8.
        let h = PCQFunction::quadratic(
            Matrix::from_rows(&[vec![2.0]]).unwrap(),
            Vector::zeros(1),
            0.0,
        )
        .unwrap();
        let glue = extend(Box::new(h.clone()), 1.0, 2.0).unwrap();
        assert!((glue.inner_min - 0.0).abs() < 1e-12);
        assert!((glue.sphere_max - 2.25).abs() < 1e-12);
        assert!((glue.quad_a - 3.8).abs() < 1e-12);
        assert!((glue.rho - 1.5).abs() < 1e-12);
        // eq-style margins: q(1) < -1, q(1.5) > M + 1.
        assert!(glue.q_value(&Vector(vec![1.0])) < -1.0);
        assert!(glue.q_value(&Vector(vec![1.5])) > 2.25 + 1.0);
        assert!(glue.epsilon > 0.0);

        // H = h exactly on |x| <= r.
        for i in 0..=1000 {
            let x = Vector(vec![-1.0 + 2.0 * i as f64 / 1000.0]);
            assert_eq!(glue.value(&x).unwrap(), h.eval(&x));
        }
        // H = q exactly beyond rho + epsilon (and already at rho here).
        for t in [1.5 + glue.epsilon, 1.8, 2.5, 10.0] {
            let x = Vector(vec![t]);
            assert_eq!(glue.value(&x).unwrap(), glue.q_value(&x));
        }
        // Convexity across the seams.
        let mut rng = SeqRng::new(6);
        for _ in 0..20_000 {
            let a = Vector(vec![rng.next_range(-3.0, 3.0)]);
            let b = Vector(vec![rng.next_range(-3.0, 3.0)]);
            let mid = a.axpy(1.0, &b).scale(0.5);
            assert!(
                glue.value(&mid).unwrap()
                    <= 0.5 * (glue.value(&a).unwrap() + glue.value(&b).unwrap()) + 1e-12
            );
        }
        // Gradient Lipschitz on compacts: difference quotients of the
        // gradient stay bounded as the probe step refines.
        let mut prev_sup = f64::INFINITY;
        for level in 1..=3 {
            let hstep = 1e-2 / 4f64.powi(level);
            let mut sup: f64 = 0.0;
            for i in 0..400 {
                let t = -2.5 + 5.0 * i as f64 / 399.0;
                let g1 = glue.gradient(&Vector(vec![t])).unwrap()[0];
                let g2 = glue.gradient(&Vector(vec![t + hstep])).unwrap()[0];
                sup = sup.max((g2 - g1).abs() / hstep);
            }
            // Stable under refinement (no blow-up).
            assert!(sup <= prev_sup.max(20.0) * 1.5 + 1.0, "sup {sup}");
            prev_sup = sup;
        }
    }

    #[test]
    fn extension_of_flat_function() {
        let zero = PCQFunction::max_affine(vec![(Vector::zeros(2), 0.0)]).unwrap();
        let glue = extend(Box::new(zero), 1.0, 3.0).unwrap();
        let mut rng = SeqRng::new(7);
        for _ in 0..2000 {
            let x = Vector(vec![rng.next_range(-1.0, 1.0), rng.next_range(-1.0, 1.0)]);
            if x.norm() <= 1.0 {
                assert_eq!(glue.value(&x).unwrap(), 0.0);
            }
        }
        // Far out: pure quadratic.
        let far = Vector(vec![5.0, 0.0]);
        assert_eq!(glue.value(&far).unwrap(), glue.q_value(&far));
        // Convex on triples.
        for _ in 0..5000 {
            let a = Vector(vec![rng.next_range(-4.0, 4.0), rng.next_range(-4.0, 4.0)]);
            let b = Vector(vec![rng.next_range(-4.0, 4.0), rng.next_range(-4.0, 4.0)]);
            let mid = a.axpy(1.0, &b).scale(0.5);
            assert!(
                glue.value(&mid).unwrap()
                    <= 0.5 * (glue.value(&a).unwrap() + glue.value(&b).unwrap()) + 1e-12
            );
        }
    }

    #[test]
    fn extension_of_planar_bowl() {
        // h = |x|^2/2 on B(0,2) in the plane: m = 0, M = 1.125 on the
        // switch sphere, and the glue is exact on the inner disk.
        let h = PCQFunction::quadratic(Matrix::identity(2), Vector::zeros(2), 0.0).unwrap();
        let glue = extend(Box::new(h.clone()), 1.0, 2.0).unwrap();
        assert!(glue.inner_min.abs() < 1e-12);
        assert!((glue.sphere_max - 1.125).abs() < 1e-9);
        let mut rng = SeqRng::new(14);
        for _ in 0..2000 {
            let x = Vector(vec![rng.next_range(-1.0, 1.0), rng.next_range(-1.0, 1.0)]);
            if x.norm() <= 1.0 {
                assert_eq!(glue.value(&x).unwrap(), h.eval(&x));
            }
        }
        for _ in 0..5000 {
            let a = Vector(vec![rng.next_range(-3.0, 3.0), rng.next_range(-3.0, 3.0)]);
            let b = Vector(vec![rng.next_range(-3.0, 3.0), rng.next_range(-3.0, 3.0)]);
            let mid = a.axpy(1.0, &b).scale(0.5);
            assert!(
                glue.value(&mid).unwrap()
                    <= 0.5 * (glue.value(&a).unwrap() + glue.value(&b).unwrap()) + 1e-12
            );
        }
    }

    #[test]
    fn envelope_2d_handles_flat_facets() {
        // Pyramid max(|x|, |y|): piecewise linear, so the lifted nodes are
        // massively coplanar within each face; the hull must still
        // reproduce the function (it is already convex).
        let mut nodes = Vec::new();
        let mut phi = Vec::new();
        for i in 0..33 {
            for j in 0..33 {
                let x = -1.0 + i as f64 / 16.0;
                let y = -1.0 + j as f64 / 16.0;
                nodes.push(Vector(vec![x, y]));
                phi.push(x.abs().max(y.abs()));
            }
        }
        let env = convex_envelope(&nodes, &phi).unwrap();
        for i in 0..nodes.len() {
            assert!(
                (env.values()[i] - phi[i]).abs() < 1e-9,
                "pyramid node {i}: {} vs {}",
                env.values()[i],
                phi[i]
            );
        }
    }

    #[test]
    fn extension_rejects_bad_radii() {
        let h = PCQFunction::abs_1d();
        assert!(extend(Box::new(h.clone()), 2.0, 1.0).is_err());
        assert!(extend(Box::new(h), 0.0, 1.0).is_err());
    }

    #[test]
    fn barrier_shape() {
        for k in [1i64, 2, 5] {
            let bar = barrier(k);
            let kf = k as f64;
            // Zero exactly on [k-1, k].
            for i in 0..=50 {
                let t = kf - 1.0 + i as f64 / 50.0;
                assert_eq!(bar.value(t).unwrap(), 0.0);
            }
            // Positive outside.
            assert!(bar.value(kf - 1.0 - 1e-6).unwrap() > 0.0);
            assert!(bar.value(kf + 1e-6).unwrap() > 0.0);
            // Pinned value and blow-up.
            assert!((bar.value(kf + 0.5).unwrap() - 0.5).abs() < 1e-12);
            assert!(bar.value(kf + 1.0 - 1e-6).unwrap() > 1e5);
            assert!(bar.value(kf - 2.0 + 1e-6).unwrap() > 1e5);
            // Domain errors.
            assert!(matches!(
                bar.value(kf + 1.0),
                Err(Error::DomainExceeded(_))
            ));
            assert!(matches!(
                bar.value(kf - 2.0),
                Err(Error::DomainExceeded(_))
            ));
            // Convexity (slopes nondecreasing) and C^1 gluing at the
            // boundary of the zero plateau.
            let mut prev = f64::NEG_INFINITY;
            for i in 1..200 {
                let t = kf - 2.0 + 3.0 * i as f64 / 200.0;
                let h = 1e-6;
                if t - h <= kf - 2.0 || t + h >= kf + 1.0 {
                    continue;
                }
                let slope = (bar.value(t + h).unwrap() - bar.value(t - h).unwrap()) / (2.0 * h);
                assert!(slope >= prev - 1e-6);
                prev = slope;
            }
            assert!(bar.derivative(kf).unwrap().abs() < 1e-12);
            assert!(bar.derivative(kf - 1.0).unwrap().abs() < 1e-12);
        }
    }

    fn abs_patchwork(max_k: i64, eps: f64) -> PatchworkFunction {
        let f = PCQFunction::abs_1d();
        let regs: Vec<RegularizedFunction> = (1..=max_k)
            .map(|k| {
                let delta = eps / 2f64.powi(k as i32);
                regularize(&f, delta, 2.0 * k as f64).unwrap()
            })
            .collect();
        patchwork(&f, regs, max_k).unwrap()
    }

    #[test]
    fn patchwork_structure() {
        let pw = abs_patchwork(4, 0.1);
        assert!(pw.coercivity_warning.is_none());
        let f = PCQFunction::abs_1d();
        // Finite and above f on the covered region, phi <= g_k on A_k.
        for i in 0..400 {
            let t = -3.0 + 6.0 * i as f64 / 399.0;
            let x = Vector(vec![t]);
            let phi = pw.value(&x).unwrap();
            assert!(phi.is_finite());
            assert!(phi >= f.eval(&x) - 1e-9);
            // At most three active windows.
            assert!(pw.active_indices(&x).len() <= 3);
            let k = t.abs().ceil().max(1.0) as i64;
            if k <= 4 && t.abs() >= (k - 1) as f64 && t.abs() <= k as f64 {
                let gk = regularize(&f, 0.1 / 2f64.powi(k as i32), 2.0 * k as f64).unwrap();
                assert!(phi <= gk.value(&x).unwrap() + 1e-9);
            }
        }
        // On the sphere |x| = k: phi = min(phi_k, phi_{k+1}) since the
        // other windows hit their barrier plateau boundary.
        for k in 1..=3i64 {
            let x = Vector(vec![k as f64]);
            let phi = pw.value(&x).unwrap();
            let near = pw
                .piece_value(k, &x)
                .unwrap()
                .min(pw.piece_value(k + 1, &x).unwrap());
            assert!((phi - near).abs() < 1e-12);
        }
        // Uncovered far region errors.
        assert!(matches!(
            pw.value(&Vector(vec![5.2])),
            Err(Error::DomainExceeded(_))
        ));
    }

    #[test]
    fn patchwork_coercivity_warning() {
        // f = x is not coercive; the probe must flag it.
        let f = PCQFunction::max_affine(vec![(Vector(vec![1.0]), 0.0)]).unwrap();
        let regs: Vec<RegularizedFunction> = (1..=2)
            .map(|k| regularize(&f, 0.05, 2.0 * k as f64).unwrap())
            .collect();
        let pw = patchwork(&f, regs, 2).unwrap();
        assert!(pw.coercivity_warning.is_some());
    }

    #[test]
    fn envelope_1d_exactness() {
        // Convex input: F = phi at every node.
        let nodes: Vec<Vector> = (0..201).map(|i| Vector(vec![-2.0 + i as f64 / 50.0])).collect();
        let phi: Vec<f64> = nodes.iter().map(|x| x[0] * x[0]).collect();
        let env = convex_envelope(&nodes, &phi).unwrap();
        for i in 0..nodes.len() {
            assert!((env.values()[i] - phi[i]).abs() < 1e-9);
        }

        // Double well: bridge across the middle.
        let nodes: Vec<Vector> = (0..=4000)
            .map(|i| Vector(vec![-2.0 + i as f64 / 1000.0]))
            .collect();
        let phi: Vec<f64> = nodes
            .iter()
            .map(|x| ((x[0] + 1.0).powi(2)).min((x[0] - 1.0).powi(2)))
            .collect();
        let env = convex_envelope(&nodes, &phi).unwrap();
        let f0 = env.value(&Vector(vec![0.0])).unwrap();
        assert!(f0.abs() < 1e-9, "F(0) = {f0}");
        // F <= phi everywhere; convex via second differences on nodes.
        for i in 0..nodes.len() {
            assert!(env.values()[i] <= phi[i] + 1e-9);
            if env.is_hull_vertex(i) {
                assert!((env.values()[i] - phi[i]).abs() < 1e-9);
            }
        }
        for i in 1..(nodes.len() - 1) {
            let e = env.values()[i + 1] + env.values()[i - 1] - 2.0 * env.values()[i];
            assert!(e >= -1e-10);
        }
        // F dominates any affine minorant of the samples.
        for (slope, c) in [(0.5, -2.3), (-1.0, -2.0), (0.0, -0.1)] {
            let minorant_ok = nodes
                .iter()
                .zip(&phi)
                .all(|(x, v)| slope * x[0] + c <= *v + 1e-12);
            assert!(minorant_ok);
            for (i, x) in nodes.iter().enumerate() {
                assert!(env.values()[i] >= slope * x[0] + c - 1e-9);
            }
        }
    }

    #[test]
    fn envelope_2d_exactness() {
        // Convex bowl: envelope equals samples.
        let mut nodes = Vec::new();
        let mut phi = Vec::new();
        for i in 0..21 {
            for j in 0..21 {
                let x = -1.0 + i as f64 / 10.0;
                let y = -1.0 + j as f64 / 10.0;
                nodes.push(Vector(vec![x, y]));
                phi.push(x * x + y * y);
            }
        }
        let env = convex_envelope(&nodes, &phi).unwrap();
        for i in 0..nodes.len() {
            assert!(
                (env.values()[i] - phi[i]).abs() < 1e-9,
                "node {i}: {} vs {}",
                env.values()[i],
                phi[i]
            );
        }

        // Double well in 2D: bridged along the x-axis.
        let mut nodes = Vec::new();
        let mut phi = Vec::new();
        for i in 0..41 {
            for j in 0..41 {
                let x = -1.5 + 3.0 * i as f64 / 40.0;
                let y = -1.0 + 2.0 * j as f64 / 40.0;
                nodes.push(Vector(vec![x, y]));
                let w1 = (x - 0.75).powi(2) + y * y;
                let w2 = (x + 0.75).powi(2) + y * y;
                phi.push(w1.min(w2));
            }
        }
        let env = convex_envelope(&nodes, &phi).unwrap();
        let mid = env.value(&Vector(vec![0.0, 0.0])).unwrap();
        assert!(mid.abs() < 5e-3, "bridge value {mid}");
        for i in 0..nodes.len() {
            assert!(env.values()[i] <= phi[i] + 1e-9);
        }
        // Midpoint convexity on random node triples.
        let mut rng = SeqRng::new(9);
        for _ in 0..2000 {
            let a = Vector(vec![rng.next_range(-1.4, 1.4), rng.next_range(-0.9, 0.9)]);
            let b = Vector(vec![rng.next_range(-1.4, 1.4), rng.next_range(-0.9, 0.9)]);
            let m = a.axpy(1.0, &b).scale(0.5);
            assert!(
                env.value(&m).unwrap()
                    <= 0.5 * (env.value(&a).unwrap() + env.value(&b).unwrap()) + 1e-10
            );
        }
    }

    #[test]
    fn envelope_flat_and_degenerate() {
        // Affine data: envelope is the plane itself.
        let nodes: Vec<Vector> = (0..25)
            .map(|i| Vector(vec![(i % 5) as f64, (i / 5) as f64]))
            .collect();
        let phi: Vec<f64> = nodes.iter().map(|x| 2.0 * x[0] - x[1] + 0.5).collect();
        let env = convex_envelope(&nodes, &phi).unwrap();
        for i in 0..nodes.len() {
            assert!((env.values()[i] - phi[i]).abs() < 1e-9);
        }

        // Collinear 2D nodes: degenerate.
        let nodes: Vec<Vector> = (0..10).map(|i| Vector(vec![i as f64, i as f64])).collect();
        let phi: Vec<f64> = nodes.iter().map(|x| x[0] * x[0]).collect();
        assert!(matches!(
            convex_envelope(&nodes, &phi),
            Err(Error::DegenerateGrid(_))
        ));

        // Single 1D node: degenerate.
        assert!(matches!(
            convex_envelope(&[Vector(vec![0.0])], &[1.0]),
            Err(Error::DegenerateGrid(_))
        ));
    }

    #[test]
    fn second_difference_cases() {
        // Affine: zero.
        let aff = |x: &Vector| -> Result<f64> { Ok(3.0 * x[0] - 1.0) };
        let e = second_difference(&aff, &Vector(vec![0.3]), &Vector(vec![0.05])).unwrap();
        assert!(e.abs() < 1e-14);
        // x^2: exactly 2 h^2.
        let sq = |x: &Vector| -> Result<f64> { Ok(x[0] * x[0]) };
        let e = second_difference(&sq, &Vector(vec![-0.7]), &Vector(vec![0.1])).unwrap();
        assert!((e - 2.0 * 0.01).abs() < 1e-14);
    }

    #[test]
    fn envelope_of_patchwork_second_differences() {
        // Envelope of the |x| patchwork: f <= F <= phi, and the envelope's
        // second-difference ratios never exceed the patchwork's (up to
        // refinement slack), stably under grid halving.
        let pw = abs_patchwork(3, 0.1);
        let f = PCQFunction::abs_1d();
        let mut prev_sup_f = f64::INFINITY;
        for (count, hsteps) in [(801usize, [0.2, 0.1, 0.05]), (1601, [0.2, 0.1, 0.05])] {
            let nodes: Vec<Vector> = (0..count)
                .map(|i| Vector(vec![-2.5 + 5.0 * i as f64 / (count - 1) as f64]))
                .collect();
            let phi: Vec<f64> = nodes.iter().map(|x| pw.value(x).unwrap()).collect();
            let env = convex_envelope(&nodes, &phi).unwrap();
            for (i, x) in nodes.iter().enumerate() {
                assert!(env.values()[i] <= phi[i] + 1e-9);
                assert!(env.values()[i] >= f.eval(x) - 1e-6);
            }
            // Second-difference ratio ordering on a common probe grid.
            let phi_fn = |x: &Vector| pw.value(x);
            let env_fn = |x: &Vector| env.value(x);
            let mut sup_phi: f64 = 0.0;
            let mut sup_env: f64 = 0.0;
            for &hstep in &hsteps {
                let h = Vector(vec![hstep]);
                for i in 0..200 {
                    let x = Vector(vec![-2.0 + 4.0 * i as f64 / 199.0]);
                    let ep = second_difference(&phi_fn, &x, &h).unwrap();
                    let ee = second_difference(&env_fn, &x, &h).unwrap();
                    sup_phi = sup_phi.max(ep / (hstep * hstep));
                    sup_env = sup_env.max(ee / (hstep * hstep));
                }
            }
            assert!(
                sup_env <= sup_phi + 1e-6,
                "envelope ratio {sup_env} exceeds patchwork ratio {sup_phi}"
            );
            // Stable under refinement.
            assert!(sup_env <= prev_sup_f.max(sup_env));
            prev_sup_f = sup_env;
        }
    }

    #[test]
    fn planar_patchwork_envelope_pipeline() {
        // Full pipeline in the plane: coercive f, two regularized pieces
        // on barrier windows, grid envelope of the patchwork.
        let f = PCQFunction::abs_sum(2);
        let regs: Vec<RegularizedFunction> = (1..=2)
            .map(|k| regularize(&f, 0.1 / 2f64.powi(k), 2.0 * k as f64).unwrap())
            .collect();
        let pw = patchwork(&f, regs, 2).unwrap();
        assert!(pw.coercivity_warning.is_none());

        let per_axis = 81;
        let cell = 2.0 / (per_axis - 1) as f64;
        let mut nodes = Vec::new();
        let mut phi = Vec::new();
        for i in 0..per_axis {
            for j in 0..per_axis {
                let x = Vector(vec![
                    -1.0 + i as f64 * cell,
                    -1.0 + j as f64 * cell,
                ]);
                let v = pw.value(&x).unwrap();
                assert!(v.is_finite() && v >= f.eval(&x) - 1e-9);
                nodes.push(x);
                phi.push(v);
            }
        }
        let env = convex_envelope(&nodes, &phi).unwrap();
        for (i, x) in nodes.iter().enumerate() {
            // f <= F <= phi at every node.
            assert!(env.values()[i] <= phi[i] + 1e-9);
            assert!(env.values()[i] >= f.eval(x) - 1e-6);
        }
        // Second differences of the envelope stay below the patchwork's
        // on a common probe set. The grid envelope is piecewise linear,
        // so the probe steps must sit well above the cell size or its
        // facet kinks (ratio ~ slope jump / h) drown the comparison;
        // the residual discretization bias is covered by the slack.
        let pw_fn = |x: &Vector| pw.value(x);
        let env_fn = |x: &Vector| env.value(x);
        let mut sup_pw: f64 = 0.0;
        let mut sup_env: f64 = 0.0;
        for &hstep in &[0.15, 0.25] {
            for dir in [[1.0, 0.0], [0.0, 1.0], [0.7, 0.7]] {
                let h = Vector(vec![hstep * dir[0], hstep * dir[1]]);
                for i in 0..14 {
                    for j in 0..14 {
                        let x = Vector(vec![-0.6 + i as f64 / 11.0, -0.6 + j as f64 / 11.0]);
                        let e_pw = second_difference(&pw_fn, &x, &h).unwrap();
                        let e_env = second_difference(&env_fn, &x, &h).unwrap();
                        sup_pw = sup_pw.max(e_pw / h.norm_sq());
                        sup_env = sup_env.max(e_env / h.norm_sq());
                    }
                }
            }
        }
        assert!(
            sup_env <= sup_pw + 0.5,
            "envelope ratio {sup_env} above patchwork ratio {sup_pw}"
        );
    }

    #[test]
    fn disagreement_accounting_through_envelope() {
        // measure{f != F} <= sum_k measure{f != g_k on A_k}, all measured
        // by node counting on a common grid.
        let eps = 0.1;
        let max_k = 3i64;
        let pw = abs_patchwork(max_k, eps);
        let f = PCQFunction::abs_1d();
        let count = 4001;
        let width = 4.0; // [-2, 2]
        let cell = width / (count - 1) as f64;
        let nodes: Vec<Vector> = (0..count)
            .map(|i| Vector(vec![-2.0 + width * i as f64 / (count - 1) as f64]))
            .collect();
        let phi: Vec<f64> = nodes.iter().map(|x| pw.value(x).unwrap()).collect();
        let env = convex_envelope(&nodes, &phi).unwrap();
        let env_disagree = nodes
            .iter()
            .enumerate()
            .filter(|(i, x)| env.values()[*i] - f.eval(x) > 1e-9)
            .count() as f64
            * cell;
        let mut per_annulus_sum = 0.0;
        for k in 1..=max_k {
            let g = regularize(&f, eps / 2f64.powi(k as i32), 2.0 * k as f64).unwrap();
            let on_annulus = nodes
                .iter()
                .filter(|x| {
                    let t = x.norm();
                    t >= (k - 1) as f64 && t <= k as f64
                })
                .filter(|x| !g.is_touch(x, 1e-9).unwrap())
                .count() as f64
                * cell;
            per_annulus_sum += on_annulus;
        }
        assert!(
            env_disagree <= per_annulus_sum + 4.0 * cell,
            "envelope disagreement {env_disagree} vs per-annulus sum {per_annulus_sum}"
        );
        // And each annulus contribution is below eps / 2^k at these deltas.
        for k in 1..=max_k {
            let d = eps / 2f64.powi(k as i32);
            assert!(d * 2f64.sqrt() < eps / 2f64.powi(k as i32) * 1.5);
        }
    }
}
