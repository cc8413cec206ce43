//! Convex functions as maxima of quadratic pieces, and the epigraph-opening
//! regularizer.
//!
//! For a convex `f` and radius `delta`, the union of all closed
//! `delta`-balls inside the epigraph of `f` is again the epigraph of a
//! convex function `g >= f` whose graph rolls a ball, hence has a
//! `(2/delta)`-Lipschitz normal field. The construction factors through the
//! erosion
//!
//! ```text
//! f^d(x)  =  max_{|u| <= d} [ f(x+u) + sqrt(d^2 - |u|^2) ]      (centers)
//! g(x)    =  min_{|u| <= d} [ f^d(x+u) - sqrt(d^2 - |u|^2) ]    (opening)
//! ```
//!
//! Because `f` is a max of quadratic pieces, the erosion commutes with the
//! piece maximum and each per-piece problem is a trust-region-style solve
//! with an exact secular-equation solution, so `f^d` is evaluated to
//! machine precision without nested iteration. The opening is evaluated
//! through a touch test first: `g(x) = f(x)` exactly iff the ball tangent
//! from above at `(x, f(x))` stays inside the epigraph, which costs one
//! erosion evaluation. Only points that fail the test (a set of measure
//! `O(delta)`) run the ball-constrained minimization.

use crate::error::{Error, Result};
use crate::geometry::{solve_linear, BoxRegion, Matrix, Vector};
use crate::parallel::map_indexed;
use crate::rng::SampleStream;

/// Pieces within this of the max are considered active.
pub const ACTIVE_TOL: f64 = 1e-9;
/// Slack below this certifies `g(x) = f(x)` for evaluation purposes.
const VALUE_TOUCH_TOL: f64 = 1e-11;
/// Classification threshold for "f differs from g" in measure estimates.
pub const DISAGREE_TOL: f64 = 1e-9;

/// One convex quadratic piece `q(x) = x^T Q x / 2 + <a, x> + b`.
#[derive(Debug, Clone)]
pub struct QuadraticPiece {
    pub q: Matrix,
    pub a: Vector,
    pub b: f64,
    eigvals: Vec<f64>,
    eigvecs: Matrix,
}

impl QuadraticPiece {
    fn new(q: Matrix, a: Vector, b: f64) -> Result<Self> {
        if q.n != a.dim() {
            return Err(Error::InvalidInput("piece dimensions disagree".into()));
        }
        if q.asymmetry() > 1e-12 {
            return Err(Error::InvalidInput(format!(
                "piece matrix asymmetry {} exceeds 1e-12",
                q.asymmetry()
            )));
        }
        let q = q.symmetrized();
        let (eigvals, eigvecs) = q.sym_eigen();
        if eigvals.iter().any(|&l| l < -1e-10) {
            return Err(Error::InvalidInput(format!(
                "piece matrix not positive semidefinite (min eigenvalue {})",
                eigvals.iter().cloned().fold(f64::INFINITY, f64::min)
            )));
        }
        Ok(QuadraticPiece {
            q,
            a,
            b,
            eigvals,
            eigvecs,
        })
    }

    pub fn value(&self, x: &Vector) -> f64 {
        0.5 * self.q.quad_form(x) + self.a.dot(x) + self.b
    }

    pub fn gradient(&self, x: &Vector) -> Vector {
        self.q.matvec(x).axpy(1.0, &self.a)
    }
}

/// Convex function `f(x) = max_i q_i(x)` over finitely many convex
/// quadratic pieces (max-affine when all `Q_i = 0`).
#[derive(Debug, Clone)]
pub struct PCQFunction {
    pieces: Vec<QuadraticPiece>,
    dim: usize,
}

impl PCQFunction {
    pub fn new(pieces: Vec<(Matrix, Vector, f64)>) -> Result<Self> {
        if pieces.is_empty() {
            return Err(Error::InvalidInput("need at least one piece".into()));
        }
        let dim = pieces[0].1.dim();
        let pieces = pieces
            .into_iter()
            .map(|(q, a, b)| {
                if a.dim() != dim {
                    return Err(Error::InvalidInput("mixed piece dimensions".into()));
                }
                QuadraticPiece::new(q, a, b)
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(PCQFunction { pieces, dim })
    }

    /// Max-affine function `max_i (<a_i, x> + b_i)`.
    pub fn max_affine(rows: Vec<(Vector, f64)>) -> Result<Self> {
        let dim = rows.first().map(|r| r.0.dim()).unwrap_or(0);
        PCQFunction::new(
            rows.into_iter()
                .map(|(a, b)| (Matrix::zeros(dim), a, b))
                .collect(),
        )
    }

    /// `|x|` in one dimension.
    pub fn abs_1d() -> Self {
        PCQFunction::max_affine(vec![
            (Vector(vec![1.0]), 0.0),
            (Vector(vec![-1.0]), 0.0),
        ])
        .expect("valid pieces")
    }

    /// `|x_1| + ... + |x_n|` as a max over sign patterns.
    pub fn abs_sum(n: usize) -> Self {
        let mut rows = Vec::with_capacity(1 << n);
        for mask in 0..(1u32 << n) {
            let a: Vec<f64> = (0..n)
                .map(|i| if mask >> i & 1 == 1 { 1.0 } else { -1.0 })
                .collect();
            rows.push((Vector(a), 0.0));
        }
        PCQFunction::max_affine(rows).expect("valid pieces")
    }

    /// Single quadratic `x^T Q x / 2 + <a, x> + b`.
    pub fn quadratic(q: Matrix, a: Vector, b: f64) -> Result<Self> {
        PCQFunction::new(vec![(q, a, b)])
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn pieces(&self) -> &[QuadraticPiece] {
        &self.pieces
    }

    pub fn eval(&self, x: &Vector) -> f64 {
        self.pieces
            .iter()
            .map(|p| p.value(x))
            .fold(f64::NEG_INFINITY, f64::max)
    }

    /// Gradients of the pieces active at `x` (within [`ACTIVE_TOL`]).
    pub fn subdiff(&self, x: &Vector) -> SubdifferentialSet {
        let vmax = self.eval(x);
        let tol = ACTIVE_TOL * (1.0 + vmax.abs());
        let generators = self
            .pieces
            .iter()
            .filter(|p| p.value(x) >= vmax - tol)
            .map(|p| p.gradient(x))
            .collect();
        SubdifferentialSet {
            generators,
            active_tol: tol,
        }
    }
}

/// Generators (active-piece gradients) of the subdifferential at a point.
#[derive(Debug, Clone)]
pub struct SubdifferentialSet {
    pub generators: Vec<Vector>,
    pub active_tol: f64,
}

impl SubdifferentialSet {
    /// Largest pairwise distance between generators.
    pub fn spread(&self) -> f64 {
        let mut worst = 0.0_f64;
        for i in 0..self.generators.len() {
            for j in (i + 1)..self.generators.len() {
                worst = worst.max(self.generators[i].dist(&self.generators[j]));
            }
        }
        worst
    }

    pub fn is_singleton(&self, tol: f64) -> bool {
        self.spread() <= tol
    }

    pub fn first(&self) -> &Vector {
        &self.generators[0]
    }

    pub fn mean(&self) -> Vector {
        let n = self.generators[0].dim();
        self.generators
            .iter()
            .fold(Vector::zeros(n), |acc, g| acc.axpy(1.0, g))
            .scale(1.0 / self.generators.len() as f64)
    }
}

// ---------------------------------------------------------------------------
// Erosion
// ---------------------------------------------------------------------------

/// Solution of one per-piece erosion solve.
#[derive(Debug, Clone)]
struct ErosionSol {
    /// Maximizer offset, |u| < delta.
    u: Vector,
    value: f64,
}

/// The eroded function `f^d`: pointwise the height of the lowest center
/// whose `delta`-ball stays above the graph of `f`. Convex; evaluated as a
/// max of per-piece exact solves.
#[derive(Debug, Clone)]
pub struct ErodedFunction {
    f: PCQFunction,
    delta: f64,
}

impl ErodedFunction {
    pub fn delta(&self) -> f64 {
        self.delta
    }

    pub fn value(&self, x: &Vector) -> Result<f64> {
        Ok(self.best_piece(x)?.1.value)
    }

    /// Envelope-theorem gradient: the active piece's gradient at its
    /// maximizer. At piece-switch kinks this returns one active generator.
    pub fn gradient(&self, x: &Vector) -> Result<Vector> {
        let (i, sol) = self.best_piece(x)?;
        Ok(self.f.pieces[i].gradient(&x.axpy(1.0, &sol.u)))
    }

    fn best_piece(&self, x: &Vector) -> Result<(usize, ErosionSol)> {
        let mut best: Option<(usize, ErosionSol)> = None;
        for (i, p) in self.f.pieces.iter().enumerate() {
            let sol = erode_piece(p, self.delta, x)?;
            if best.as_ref().map_or(true, |(_, b)| sol.value > b.value) {
                best = Some((i, sol));
            }
        }
        best.ok_or_else(|| Error::InnerSolveFailure("no pieces".into()))
    }

    /// Values of all per-piece erosions at `x` (for active-set detection).
    fn piece_values(&self, x: &Vector) -> Result<Vec<f64>> {
        self.f
            .pieces
            .iter()
            .map(|p| erode_piece(p, self.delta, x).map(|s| s.value))
            .collect()
    }
}

/// Epigraph erosion of `f` by a ball of radius `delta`:
/// `f^d(x) = max_{|u| <= d} [f(x+u) + sqrt(d^2 - |u|^2)]`.
///
/// Satisfies `f^d >= f + delta`.
pub fn erode(f: &PCQFunction, delta: f64) -> Result<ErodedFunction> {
    if !(delta > 0.0) || !delta.is_finite() {
        return Err(Error::InvalidInput(format!(
            "erosion radius must be positive, got {delta}"
        )));
    }
    Ok(ErodedFunction {
        f: f.clone(),
        delta,
    })
}

/// Exact per-piece erosion: maximize `q(x+u) + sqrt(d^2 - |u|^2)` over the
/// ball. Stationarity gives `u = (sigma I - Q)^{-1} grad q(x)` with
/// `sigma = 1/sqrt(d^2 - |u|^2)`; the scalar secular equation in `sigma` is
/// monotone on `(max(lambda_max, 1/d), inf)` and is bisected to machine
/// precision, with the usual hard-case branch when the gradient has no
/// component on the top eigenspace.
fn erode_piece(piece: &QuadraticPiece, delta: f64, x: &Vector) -> Result<ErosionSol> {
    let n = x.dim();
    let g0 = piece.gradient(x);
    let lam_max = piece.eigvals.iter().cloned().fold(0.0_f64, f64::max);

    // Affine fast path.
    if lam_max <= 1e-14 {
        let sigma = (g0.norm_sq() + 1.0).sqrt() / delta;
        let u = g0.scale(1.0 / sigma);
        let s = 1.0 / sigma;
        let value = piece.value(&x.axpy(1.0, &u)) + s;
        return Ok(ErosionSol { u, value });
    }

    // Coordinates of the gradient in the eigenbasis.
    let mut ghat = vec![0.0; n];
    for (k, gk) in ghat.iter_mut().enumerate() {
        let mut s = 0.0;
        for r in 0..n {
            s += piece.eigvecs.get(r, k) * g0[r];
        }
        *gk = s;
    }
    let eig_scale = 1.0 + lam_max.abs();
    let top: Vec<usize> = (0..n)
        .filter(|&k| piece.eigvals[k] >= lam_max - 1e-12 * eig_scale)
        .collect();
    let g_top_sq: f64 = top.iter().map(|&k| ghat[k] * ghat[k]).sum();

    let secular = |sigma: f64| -> f64 {
        let mut s = 1.0 / (sigma * sigma) - delta * delta;
        for k in 0..n {
            if ghat[k] != 0.0 {
                let d = sigma - piece.eigvals[k];
                s += (ghat[k] / d) * (ghat[k] / d);
            }
        }
        s
    };

    let sigma_lo = lam_max.max(1.0 / delta);
    // Hard case: over-curved piece with no gradient component on the top
    // eigenspace, and the secular value at lambda_max already negative.
    if lam_max > 1.0 / delta && g_top_sq.sqrt() <= 1e-13 * (1.0 + g0.norm()) {
        let mut rest = 1.0 / (lam_max * lam_max) - delta * delta;
        for k in 0..n {
            if !top.contains(&k) && ghat[k] != 0.0 {
                let d = lam_max - piece.eigvals[k];
                rest += (ghat[k] / d) * (ghat[k] / d);
            }
        }
        if rest < 0.0 {
            let sigma = lam_max;
            let mut u = Vector::zeros(n);
            let mut norm_sq = 0.0;
            for k in 0..n {
                if top.contains(&k) {
                    continue;
                }
                if ghat[k] == 0.0 {
                    continue;
                }
                let coef = ghat[k] / (sigma - piece.eigvals[k]);
                norm_sq += coef * coef;
                for r in 0..n {
                    u[r] += coef * piece.eigvecs.get(r, k);
                }
            }
            let tau = (delta * delta - 1.0 / (sigma * sigma) - norm_sq).max(0.0).sqrt();
            let kt = top[0];
            for r in 0..n {
                u[r] += tau * piece.eigvecs.get(r, kt);
            }
            let s = 1.0 / sigma;
            let value = piece.value(&x.axpy(1.0, &u)) + s;
            return Ok(ErosionSol { u, value });
        }
    }

    // Bracket and bisect the secular equation.
    let mut lo = sigma_lo * (1.0 + 1e-15) + 1e-300;
    if secular(lo) < 0.0 {
        lo = sigma_lo;
    }
    let mut hi = (2.0 * sigma_lo).max(2.0 / delta);
    let mut grow = 0;
    while secular(hi) > 0.0 {
        hi *= 2.0;
        grow += 1;
        if grow > 200 {
            return Err(Error::InnerSolveFailure(
                "erosion secular equation failed to bracket".into(),
            ));
        }
    }
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if secular(mid) > 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
        if (hi - lo) <= 1e-16 * hi {
            break;
        }
    }
    let sigma = 0.5 * (lo + hi);
    let mut u = Vector::zeros(n);
    for k in 0..n {
        if ghat[k] == 0.0 {
            continue;
        }
        let coef = ghat[k] / (sigma - piece.eigvals[k]);
        for r in 0..n {
            u[r] += coef * piece.eigvecs.get(r, k);
        }
    }
    let s = 1.0 / sigma;
    let value = piece.value(&x.axpy(1.0, &u)) + s;
    Ok(ErosionSol { u, value })
}

// ---------------------------------------------------------------------------
// Regularized function (the opening)
// ---------------------------------------------------------------------------

/// Outcome of the tangent-ball touch probe at a point.
#[derive(Debug, Clone)]
pub enum TouchProbe {
    /// The subdifferential is not a singleton; no ball touches a kink.
    Kink { spread: f64 },
    /// Certified upper bound on `g(x) - f(x)`; zero (within solver
    /// tolerance) iff the tangent ball fits, i.e. `g(x) = f(x)`.
    Slack(f64),
}

/// The epigraph-opening regularization of a [`PCQFunction`]: a convex
/// majorant `g >= f` with `(2/delta)`-Lipschitz epigraph normals, equal to
/// `f` away from an `O(delta)` neighborhood of the kinks.
#[derive(Debug, Clone)]
pub struct RegularizedFunction {
    f: PCQFunction,
    eroded: ErodedFunction,
    delta: f64,
    domain_radius: f64,
}

/// Build the opening regularizer `g` for radius `delta`, evaluable on
/// `|x| <= domain_radius` (with `delta < domain_radius`).
pub fn regularize(f: &PCQFunction, delta: f64, domain_radius: f64) -> Result<RegularizedFunction> {
    if !(delta > 0.0) || !delta.is_finite() {
        return Err(Error::InvalidInput(format!(
            "regularization radius must be positive, got {delta}"
        )));
    }
    if !(delta < domain_radius) {
        return Err(Error::DomainExceeded(format!(
            "need delta < domain radius, got {delta} >= {domain_radius}"
        )));
    }
    Ok(RegularizedFunction {
        f: f.clone(),
        eroded: erode(f, delta)?,
        delta,
        domain_radius,
    })
}

impl RegularizedFunction {
    pub fn source(&self) -> &PCQFunction {
        &self.f
    }

    pub fn eroded(&self) -> &ErodedFunction {
        &self.eroded
    }

    pub fn delta(&self) -> f64 {
        self.delta
    }

    pub fn domain_radius(&self) -> f64 {
        self.domain_radius
    }

    fn check_domain(&self, x: &Vector) -> Result<()> {
        if x.norm() > self.domain_radius * (1.0 + 1e-12) {
            return Err(Error::DomainExceeded(format!(
                "|x| = {} exceeds the evaluation domain radius {}",
                x.norm(),
                self.domain_radius
            )));
        }
        Ok(())
    }

    /// Tangent-ball touch probe. `g(x) = f(x)` iff the subdifferential at
    /// `x` is a singleton `{sigma}` and the ball of radius `delta` tangent
    /// to the graph at `(x, f(x))` fits inside the epigraph, i.e. the
    /// erosion at the tangent center does not exceed the center height.
    pub fn touch_probe(&self, x: &Vector) -> Result<TouchProbe> {
        let sub = self.f.subdiff(x);
        let spread = sub.spread();
        if spread > 1e-9 {
            return Ok(TouchProbe::Kink { spread });
        }
        let sigma = sub.first();
        let w = (1.0 + sigma.norm_sq()).sqrt();
        let center = x.axpy(-self.delta / w, sigma);
        let slack = self.eroded.value(&center)? - (self.f.eval(x) + self.delta / w);
        Ok(TouchProbe::Slack(slack.max(0.0)))
    }

    /// Whether `g(x) = f(x)` within `tol`.
    pub fn is_touch(&self, x: &Vector, tol: f64) -> Result<bool> {
        Ok(matches!(self.touch_probe(x)?, TouchProbe::Slack(s) if s <= tol))
    }

    pub fn value(&self, x: &Vector) -> Result<f64> {
        self.check_domain(x)?;
        if let TouchProbe::Slack(s) = self.touch_probe(x)? {
            if s <= VALUE_TOUCH_TOL {
                return Ok(self.f.eval(x));
            }
        }
        Ok(self.outer_solve(x)?.1)
    }

    /// Value and gradient together. At touch points the gradient is the
    /// (singleton) subgradient of `f`; on the arc regime it is
    /// `(x - c) / sqrt(delta^2 - |x - c|^2)` for the optimal ball center
    /// abscissa `c`.
    pub fn value_and_gradient(&self, x: &Vector) -> Result<(f64, Vector)> {
        self.check_domain(x)?;
        if let TouchProbe::Slack(s) = self.touch_probe(x)? {
            if s <= VALUE_TOUCH_TOL {
                return Ok((self.f.eval(x), self.f.subdiff(x).first().clone()));
            }
        }
        let (c, v) = self.outer_solve(x)?;
        let d = x.dist(&c);
        let s = (self.delta * self.delta - d * d).max(1e-300).sqrt();
        Ok((v, (x - &c).scale(1.0 / s)))
    }

    pub fn gradient(&self, x: &Vector) -> Result<Vector> {
        Ok(self.value_and_gradient(x)?.1)
    }

    /// Ball-constrained outer minimization: returns the optimal center `c`
    /// and `g(x)`. Localizes with golden-section (1D) or multi-start
    /// compass search, then polishes with a Newton solve of the active-set
    /// KKT system of the touching sphere.
    fn outer_solve(&self, x: &Vector) -> Result<(Vector, f64)> {
        let n = x.dim();
        let d = self.delta;
        let objective = |u: &Vector| -> Result<f64> {
            let r2 = d * d - u.norm_sq();
            if r2 < -1e-15 {
                return Ok(f64::INFINITY);
            }
            Ok(self.eroded.value(&x.axpy(1.0, u))? - r2.max(0.0).sqrt())
        };

        let u_best = if n == 1 {
            golden_section(&|t: f64| objective(&Vector(vec![t])), -d, d, 120)?
        } else {
            self.compass_localize(&objective)?
        };
        let mut best_val = objective(&u_best)?;
        let mut best_c = x.axpy(1.0, &u_best);

        if let Some((c, v)) = self.kkt_polish(x, &best_c)? {
            if v <= best_val + 1e-12 {
                best_val = v;
                best_c = c;
            }
        }
        Ok((best_c, best_val))
    }

    /// Deterministic multi-start compass search over the ball `|u| <= d`.
    fn compass_localize(&self, objective: &dyn Fn(&Vector) -> Result<f64>) -> Result<Vector> {
        let n = self.f.dim;
        let d = self.delta;
        // Axis and diagonal moves.
        let mut dirs: Vec<Vector> = Vec::new();
        let corners: u32 = 3u32.pow(n as u32);
        for mask in 0..corners {
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
        let starts: Vec<Vector> = {
            let mut s = vec![Vector::zeros(n)];
            for i in 0..n {
                s.push(Vector::basis(n, i).scale(0.6 * d));
                s.push(Vector::basis(n, i).scale(-0.6 * d));
            }
            s.push(Vector(vec![0.37 * d / (n as f64).sqrt(); n]));
            s
        };
        let mut best: Option<(Vector, f64)> = None;
        for start in starts {
            let mut u = start;
            let mut val = objective(&u)?;
            let mut step = 0.25 * d;
            while step > 1e-13 * d.max(1.0) {
                let mut improved = false;
                for dir in &dirs {
                    let mut cand = u.axpy(step, dir);
                    let cn = cand.norm();
                    if cn > d {
                        cand = cand.scale(d / cn);
                    }
                    let cv = objective(&cand)?;
                    if cv < val - 1e-16 {
                        u = cand;
                        val = cv;
                        improved = true;
                        break;
                    }
                }
                if !improved {
                    step *= 0.5;
                }
            }
            if best.as_ref().map_or(true, |(_, bv)| val < *bv) {
                best = Some((u, val));
            }
        }
        Ok(best.expect("at least one start").0)
    }

    /// Newton solve of the active-set KKT system of the outer problem at
    /// the localized center: with active erosion pieces `q_i` and convex
    /// weights `theta`, solve
    ///
    /// ```text
    /// sum theta_i grad q_i^d(c) + (c - x) / s(c) = 0,   sum theta_i = 1,
    /// q_i^d(c) all equal,    where s(c) = sqrt(d^2 - |c - x|^2),
    /// ```
    ///
    /// by damped finite-difference Newton. Falls back to the localized
    /// point when the polish wanders or loses feasibility.
    fn kkt_polish(&self, x: &Vector, c0: &Vector) -> Result<Option<(Vector, f64)>> {
        let n = x.dim();
        let d = self.delta;
        let vals = self.eroded.piece_values(c0)?;
        let vmax = vals.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
        let active: Vec<usize> = (0..vals.len())
            .filter(|&i| vals[i] >= vmax - 1e-6 * (1.0 + vmax.abs()))
            .collect();
        let k = active.len();
        if k == 0 || k > n + 1 {
            return Ok(None);
        }

        let piece_grad = |i: usize, c: &Vector| -> Result<Vector> {
            let sol = erode_piece(&self.f.pieces[i], d, c)?;
            Ok(self.f.pieces[i].gradient(&c.axpy(1.0, &sol.u)))
        };
        let piece_val =
            |i: usize, c: &Vector| -> Result<f64> { Ok(erode_piece(&self.f.pieces[i], d, c)?.value) };

        // Residual of the KKT system; unknowns z = (c, theta).
        let resid = |z: &Vector| -> Result<Vector> {
            let c = Vector(z.0[..n].to_vec());
            let theta = &z.0[n..];
            let dist_sq = c.dist(x).powi(2);
            let s = (d * d - dist_sq).max(1e-300).sqrt();
            let mut r = Vector::zeros(n + k);
            for (j, &i) in active.iter().enumerate() {
                let gi = piece_grad(i, &c)?;
                for t in 0..n {
                    r[t] += theta[j] * gi[t];
                }
            }
            for t in 0..n {
                r[t] += (c[t] - x[t]) / s;
            }
            r[n] = theta.iter().sum::<f64>() - 1.0;
            for j in 1..k {
                r[n + j] = piece_val(active[0], &c)? - piece_val(active[j], &c)?;
            }
            Ok(r)
        };

        let mut z = Vector::zeros(n + k);
        for t in 0..n {
            z[t] = c0[t];
        }
        for j in 0..k {
            z[n + j] = 1.0 / k as f64;
        }
        let mut r = resid(&z)?;
        let mut rnorm = r.norm();
        for _iter in 0..30 {
            if rnorm <= 1e-12 {
                break;
            }
            // Finite-difference Jacobian.
            let m = n + k;
            let mut jac = Matrix::zeros(m);
            let h = 1e-7;
            for col in 0..m {
                let mut zp = z.clone();
                zp[col] += h;
                let rp = resid(&zp)?;
                for row in 0..m {
                    jac.set(row, col, (rp[row] - r[row]) / h);
                }
            }
            let Some(step) = solve_linear(&jac, &r, 1e-14) else {
                return Ok(None);
            };
            // Damped update.
            let mut t = 1.0;
            let mut accepted = false;
            for _ in 0..30 {
                let cand = z.axpy(-t, &step);
                let rc = resid(&cand)?;
                if rc.norm() < rnorm {
                    z = cand;
                    r = rc;
                    rnorm = r.norm();
                    accepted = true;
                    break;
                }
                t *= 0.5;
            }
            if !accepted {
                break;
            }
        }
        if rnorm > 1e-10 {
            return Ok(None);
        }
        let c = Vector(z.0[..n].to_vec());
        let theta = &z.0[n..];
        if theta.iter().any(|&t| t < -1e-8) || c.dist(x) > d * (1.0 + 1e-12) {
            return Ok(None);
        }
        let dist_sq = c.dist(x).powi(2);
        let s = (d * d - dist_sq).max(0.0).sqrt();
        let v = self.eroded.value(&c)? - s;
        Ok(Some((c, v)))
    }
}

/// Golden-section minimization of a one-dimensional convex function;
/// returns the minimizer as a 1-vector.
fn golden_section(
    f: &dyn Fn(f64) -> Result<f64>,
    mut lo: f64,
    mut hi: f64,
    iters: usize,
) -> Result<Vector> {
    let phi = 0.5 * (5f64.sqrt() - 1.0);
    let mut b = hi - phi * (hi - lo);
    let mut c = lo + phi * (hi - lo);
    let mut fb = f(b)?;
    let mut fc = f(c)?;
    for _ in 0..iters {
        if fb <= fc {
            hi = c;
            c = b;
            fc = fb;
            b = hi - phi * (hi - lo);
            fb = f(b)?;
        } else {
            lo = b;
            b = c;
            fb = fc;
            c = lo + phi * (hi - lo);
            fc = f(c)?;
        }
    }
    Ok(Vector(vec![if fb <= fc { b } else { c }]))
}

// ---------------------------------------------------------------------------
// Measures and touch sets
// ---------------------------------------------------------------------------

/// How to estimate the Lebesgue measure of the disagreement set.
#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "snake_case", tag = "kind")]
pub enum MeasureMethod {
    /// Cell-centered uniform grid with `per_axis` cells per axis.
    Grid { per_axis: usize },
    /// Seeded Monte Carlo over the region.
    Mc { samples: u64, seed: u64 },
}

/// Measure estimate with its error bar (the cell volume for the grid
/// method, one standard error for Monte Carlo).
#[derive(Debug, Clone, serde::Serialize)]
pub struct MeasureEstimate {
    pub measure: f64,
    pub error_bar: f64,
    pub method: MeasureMethod,
    /// Points counted as disagreeing satisfy `g - f > threshold`.
    pub threshold: f64,
}

/// Lebesgue measure of `{ x in region : g(x) - f(x) > 1e-9 }`.
///
/// Classification runs the touch probe only (one erosion evaluation per
/// point): the probe slack bounds `g - f` from above and vanishes exactly
/// on the touch set, so thresholding it reproduces the disagreement set up
/// to its measure-zero boundary. Deterministic for the grid method and for
/// Monte Carlo given the seed, at any worker count.
pub fn disagreement_measure(
    g: &RegularizedFunction,
    region: &BoxRegion,
    method: MeasureMethod,
) -> Result<MeasureEstimate> {
    if region.dim() != g.source().dim() {
        return Err(Error::InvalidInput("region dimension mismatch".into()));
    }
    let disagrees = |x: &Vector| -> bool {
        match g.touch_probe(x) {
            Ok(TouchProbe::Slack(s)) => s > DISAGREE_TOL,
            Ok(TouchProbe::Kink { .. }) => true,
            Err(_) => true,
        }
    };
    match method {
        MeasureMethod::Grid { per_axis } => {
            if per_axis == 0 {
                return Err(Error::InvalidSampleCount("grid needs >= 1 cell".into()));
            }
            let cells = region.cell_count(per_axis);
            let hits: u64 =
                map_indexed(cells, |i| u64::from(disagrees(&region.cell_center(per_axis, i))))
                    .into_iter()
                    .sum();
            Ok(MeasureEstimate {
                measure: hits as f64 * region.cell_volume(per_axis),
                error_bar: region.cell_volume(per_axis),
                method,
                threshold: DISAGREE_TOL,
            })
        }
        MeasureMethod::Mc { samples, seed } => {
            if samples == 0 {
                return Err(Error::InvalidSampleCount("need at least one sample".into()));
            }
            let hits: u64 = map_indexed(samples as usize, |i| {
                let mut stream = SampleStream::new(seed, i as u64);
                u64::from(disagrees(&region.sample(&mut stream)))
            })
            .into_iter()
            .sum();
            let p = hits as f64 / samples as f64;
            let vol = region.volume();
            Ok(MeasureEstimate {
                measure: vol * p,
                error_bar: vol * (p * (1.0 - p) / samples as f64).sqrt(),
                method,
                threshold: DISAGREE_TOL,
            })
        }
    }
}

/// Grid-sampled touch points: up to `budget` cell centers where the touch
/// slack is at most `tol` and the subdifferential is a singleton.
pub fn touch_points(
    g: &RegularizedFunction,
    region: &BoxRegion,
    tol: f64,
    budget: usize,
) -> Result<Vec<Vector>> {
    let n = g.source().dim();
    let per_axis = (budget.max(1) as f64)
        .powf(1.0 / n as f64)
        .floor()
        .max(1.0) as usize;
    let mut out = Vec::new();
    for i in 0..region.cell_count(per_axis) {
        let x = region.cell_center(per_axis, i);
        if let TouchProbe::Slack(s) = g.touch_probe(&x)? {
            if s <= tol && g.source().subdiff(&x).is_singleton(tol) {
                out.push(x);
            }
        }
        if out.len() >= budget {
            break;
        }
    }
    Ok(out)
}
