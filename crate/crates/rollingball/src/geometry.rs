//! Small dense vectors and symmetric matrices for dimensions 1..=3.
//!
//! Nothing here is tuned for large n; bodies and functions in this crate
//! live in R^1..R^3 and the occasional lifted R^4. Storage is a plain
//! `Vec<f64>` and solvers are direct Gaussian elimination / cyclic Jacobi.

use crate::error::{Error, Result};
use std::ops::{Add, Index, IndexMut, Mul, Neg, Sub};

/// A point or direction of R^n with all-finite coordinates.
#[derive(Debug, Clone, PartialEq)]
pub struct Vector(pub Vec<f64>);

impl Vector {
    pub fn new(coords: Vec<f64>) -> Result<Self> {
        if coords.is_empty() {
            return Err(Error::InvalidInput("vector must have dimension >= 1".into()));
        }
        if coords.iter().any(|c| !c.is_finite()) {
            return Err(Error::InvalidInput("vector has non-finite coordinate".into()));
        }
        Ok(Vector(coords))
    }

    pub fn zeros(n: usize) -> Self {
        Vector(vec![0.0; n])
    }

    pub fn from_slice(s: &[f64]) -> Self {
        Vector(s.to_vec())
    }

    pub fn dim(&self) -> usize {
        self.0.len()
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.0
    }

    pub fn dot(&self, other: &Vector) -> f64 {
        debug_assert_eq!(self.dim(), other.dim());
        self.0.iter().zip(&other.0).map(|(a, b)| a * b).sum()
    }

    pub fn norm_sq(&self) -> f64 {
        self.dot(self)
    }

    pub fn norm(&self) -> f64 {
        self.norm_sq().sqrt()
    }

    pub fn dist(&self, other: &Vector) -> f64 {
        self.0
            .iter()
            .zip(&other.0)
            .map(|(a, b)| (a - b) * (a - b))
            .sum::<f64>()
            .sqrt()
    }

    pub fn scale(&self, t: f64) -> Vector {
        Vector(self.0.iter().map(|a| a * t).collect())
    }

    /// self + t * other
    pub fn axpy(&self, t: f64, other: &Vector) -> Vector {
        Vector(
            self.0
                .iter()
                .zip(&other.0)
                .map(|(a, b)| a + t * b)
                .collect(),
        )
    }

    /// Unit vector in the same direction; error if the norm is ~0.
    pub fn normalized(&self) -> Result<Vector> {
        let n = self.norm();
        if n < 1e-14 {
            return Err(Error::InvalidInput("cannot normalize near-zero vector".into()));
        }
        Ok(self.scale(1.0 / n))
    }

    /// Standard basis vector e_i of R^n.
    pub fn basis(n: usize, i: usize) -> Vector {
        let mut v = vec![0.0; n];
        v[i] = 1.0;
        Vector(v)
    }
}

impl Index<usize> for Vector {
    type Output = f64;
    fn index(&self, i: usize) -> &f64 {
        &self.0[i]
    }
}

impl IndexMut<usize> for Vector {
    fn index_mut(&mut self, i: usize) -> &mut f64 {
        &mut self.0[i]
    }
}

impl Add for &Vector {
    type Output = Vector;
    fn add(self, rhs: &Vector) -> Vector {
        self.axpy(1.0, rhs)
    }
}

impl Sub for &Vector {
    type Output = Vector;
    fn sub(self, rhs: &Vector) -> Vector {
        self.axpy(-1.0, rhs)
    }
}

impl Mul<f64> for &Vector {
    type Output = Vector;
    fn mul(self, t: f64) -> Vector {
        self.scale(t)
    }
}

impl Neg for &Vector {
    type Output = Vector;
    fn neg(self) -> Vector {
        self.scale(-1.0)
    }
}

/// Dense square matrix, row-major. Used for quadratic-piece Hessians and
/// extracted second derivatives; n stays tiny.
#[derive(Debug, Clone, PartialEq)]
pub struct Matrix {
    pub n: usize,
    pub data: Vec<f64>,
}

impl Matrix {
    pub fn zeros(n: usize) -> Self {
        Matrix {
            n,
            data: vec![0.0; n * n],
        }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Matrix::zeros(n);
        for i in 0..n {
            m.data[i * n + i] = 1.0;
        }
        m
    }

    pub fn from_rows(rows: &[Vec<f64>]) -> Result<Self> {
        let n = rows.len();
        if rows.iter().any(|r| r.len() != n) {
            return Err(Error::InvalidInput("matrix rows must be square".into()));
        }
        let data: Vec<f64> = rows.iter().flatten().copied().collect();
        if data.iter().any(|x| !x.is_finite()) {
            return Err(Error::InvalidInput("matrix has non-finite entry".into()));
        }
        Ok(Matrix { n, data })
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.data[i * self.n + j]
    }

    pub fn set(&mut self, i: usize, j: usize, v: f64) {
        self.data[i * self.n + j] = v;
    }

    pub fn matvec(&self, x: &Vector) -> Vector {
        let mut out = vec![0.0; self.n];
        for i in 0..self.n {
            let mut s = 0.0;
            for j in 0..self.n {
                s += self.get(i, j) * x[j];
            }
            out[i] = s;
        }
        Vector(out)
    }

    /// x^T A x
    pub fn quad_form(&self, x: &Vector) -> f64 {
        self.matvec(x).dot(x)
    }

    /// max |A_ij - A_ji|
    pub fn asymmetry(&self) -> f64 {
        let mut worst: f64 = 0.0;
        for i in 0..self.n {
            for j in (i + 1)..self.n {
                worst = worst.max((self.get(i, j) - self.get(j, i)).abs());
            }
        }
        worst
    }

    /// (A + A^T)/2
    pub fn symmetrized(&self) -> Matrix {
        let mut m = self.clone();
        for i in 0..self.n {
            for j in 0..self.n {
                m.set(i, j, 0.5 * (self.get(i, j) + self.get(j, i)));
            }
        }
        m
    }

    pub fn max_abs_diff(&self, other: &Matrix) -> f64 {
        self.data
            .iter()
            .zip(&other.data)
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max)
    }

    /// Eigendecomposition of a symmetric matrix by cyclic Jacobi rotations.
    /// Returns (eigenvalues, eigenvectors as columns), unsorted pairing
    /// preserved between the two.
    pub fn sym_eigen(&self) -> (Vec<f64>, Matrix) {
        let n = self.n;
        let mut a = self.symmetrized();
        let mut v = Matrix::identity(n);
        if n == 1 {
            return (vec![a.get(0, 0)], v);
        }
        for _sweep in 0..64 {
            let mut off = 0.0;
            for i in 0..n {
                for j in (i + 1)..n {
                    off += a.get(i, j).abs();
                }
            }
            if off < 1e-300 {
                break;
            }
            for p in 0..n {
                for q in (p + 1)..n {
                    let apq = a.get(p, q);
                    if apq.abs() < 1e-300 {
                        continue;
                    }
                    let app = a.get(p, p);
                    let aqq = a.get(q, q);
                    let theta = (aqq - app) / (2.0 * apq);
                    let t = if theta >= 0.0 {
                        1.0 / (theta + (1.0 + theta * theta).sqrt())
                    } else {
                        1.0 / (theta - (1.0 + theta * theta).sqrt())
                    };
                    let c = 1.0 / (1.0 + t * t).sqrt();
                    let s = t * c;
                    for k in 0..n {
                        let akp = a.get(k, p);
                        let akq = a.get(k, q);
                        a.set(k, p, c * akp - s * akq);
                        a.set(k, q, s * akp + c * akq);
                    }
                    for k in 0..n {
                        let apk = a.get(p, k);
                        let aqk = a.get(q, k);
                        a.set(p, k, c * apk - s * aqk);
                        a.set(q, k, s * apk + c * aqk);
                    }
                    for k in 0..n {
                        let vkp = v.get(k, p);
                        let vkq = v.get(k, q);
                        v.set(k, p, c * vkp - s * vkq);
                        v.set(k, q, s * vkp + c * vkq);
                    }
                }
            }
        }
        let eig = (0..n).map(|i| a.get(i, i)).collect();
        (eig, v)
    }

    pub fn min_eigenvalue(&self) -> f64 {
        let (eig, _) = self.sym_eigen();
        eig.into_iter().fold(f64::INFINITY, f64::min)
    }
}

/// Solve A x = b by Gaussian elimination with partial pivoting.
/// Returns None when the pivot collapses (singular within `tol`).
pub fn solve_linear(a: &Matrix, b: &Vector, tol: f64) -> Option<Vector> {
    let n = a.n;
    let mut m = a.data.clone();
    let mut rhs = b.0.clone();
    for col in 0..n {
        let mut piv = col;
        for r in (col + 1)..n {
            if m[r * n + col].abs() > m[piv * n + col].abs() {
                piv = r;
            }
        }
        if m[piv * n + col].abs() < tol {
            return None;
        }
        if piv != col {
            for c in 0..n {
                m.swap(col * n + c, piv * n + c);
            }
            rhs.swap(col, piv);
        }
        let d = m[col * n + col];
        for r in (col + 1)..n {
            let f = m[r * n + col] / d;
            if f == 0.0 {
                continue;
            }
            for c in col..n {
                m[r * n + c] -= f * m[col * n + c];
            }
            rhs[r] -= f * rhs[col];
        }
    }
    let mut x = vec![0.0; n];
    for row in (0..n).rev() {
        let mut s = rhs[row];
        for c in (row + 1)..n {
            s -= m[row * n + c] * x[c];
        }
        x[row] = s / m[row * n + row];
    }
    if x.iter().any(|v| !v.is_finite()) {
        return None;
    }
    Some(Vector(x))
}

/// Axis-aligned box `prod [lo_i, hi_i]`, the probe region for measures,
/// sweeps and scans.
#[derive(Debug, Clone, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct BoxRegion {
    pub lo: Vec<f64>,
    pub hi: Vec<f64>,
}

impl BoxRegion {
    pub fn new(lo: Vec<f64>, hi: Vec<f64>) -> Result<Self> {
        if lo.is_empty() || lo.len() != hi.len() {
            return Err(Error::InvalidInput("region bounds must match and be nonempty".into()));
        }
        if lo.iter().zip(&hi).any(|(l, h)| !(l < h) || !l.is_finite() || !h.is_finite()) {
            return Err(Error::InvalidInput("region must satisfy lo < hi with finite bounds".into()));
        }
        Ok(BoxRegion { lo, hi })
    }

    /// Cube `[a, b]^n`.
    pub fn cube(a: f64, b: f64, n: usize) -> Result<Self> {
        BoxRegion::new(vec![a; n], vec![b; n])
    }

    pub fn dim(&self) -> usize {
        self.lo.len()
    }

    pub fn volume(&self) -> f64 {
        self.lo.iter().zip(&self.hi).map(|(l, h)| h - l).product()
    }

    pub fn contains(&self, x: &Vector) -> bool {
        x.as_slice()
            .iter()
            .zip(self.lo.iter().zip(&self.hi))
            .all(|(xi, (l, h))| *xi >= *l && *xi <= *h)
    }

    /// Center of cell `index` of the uniform grid with `per_axis` cells per
    /// axis (row-major order over `per_axis^n` cells).
    pub fn cell_center(&self, per_axis: usize, index: usize) -> Vector {
        let n = self.dim();
        let mut idx = index;
        let mut x = vec![0.0; n];
        for d in 0..n {
            let i = idx % per_axis;
            idx /= per_axis;
            let h = (self.hi[d] - self.lo[d]) / per_axis as f64;
            x[d] = self.lo[d] + (i as f64 + 0.5) * h;
        }
        Vector(x)
    }

    pub fn cell_count(&self, per_axis: usize) -> usize {
        per_axis.pow(self.dim() as u32)
    }

    pub fn cell_volume(&self, per_axis: usize) -> f64 {
        self.volume() / self.cell_count(per_axis) as f64
    }

    /// Uniform point drawn from the per-sample stream.
    pub fn sample(&self, stream: &mut crate::rng::SampleStream) -> Vector {
        Vector(
            self.lo
                .iter()
                .zip(&self.hi)
                .map(|(l, h)| stream.next_range(*l, *h))
                .collect(),
        )
    }
}

/// Cross product z-component of (b-a) x (c-a); positive when a,b,c turn
/// counterclockwise.
pub fn cross2(a: &[f64], b: &[f64], c: &[f64]) -> f64 {
    (b[0] - a[0]) * (c[1] - a[1]) - (b[1] - a[1]) * (c[0] - a[0])
}

/// Andrew's monotone chain; returns the hull in counterclockwise order with
/// collinear points dropped.
pub fn convex_hull_2d(points: &[[f64; 2]]) -> Vec<[f64; 2]> {
    let mut pts: Vec<[f64; 2]> = points.to_vec();
    pts.sort_by(|a, b| {
        a[0].partial_cmp(&b[0])
            .unwrap()
            .then(a[1].partial_cmp(&b[1]).unwrap())
    });
    pts.dedup_by(|a, b| (a[0] - b[0]).abs() < 1e-12 && (a[1] - b[1]).abs() < 1e-12);
    if pts.len() < 3 {
        return pts;
    }
    let mut lower: Vec<[f64; 2]> = Vec::with_capacity(pts.len());
    for p in &pts {
        while lower.len() >= 2
            && cross2(&lower[lower.len() - 2], &lower[lower.len() - 1], p) <= 1e-14
        {
            lower.pop();
        }
        lower.push(*p);
    }
    let mut upper: Vec<[f64; 2]> = Vec::with_capacity(pts.len());
    for p in pts.iter().rev() {
        while upper.len() >= 2
            && cross2(&upper[upper.len() - 2], &upper[upper.len() - 1], p) <= 1e-14
        {
            upper.pop();
        }
        upper.push(*p);
    }
    lower.pop();
    upper.pop();
    lower.extend(upper);
    lower
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn solve_3x3() {
        let a = Matrix::from_rows(&[
            vec![2.0, 1.0, 0.0],
            vec![1.0, 3.0, 1.0],
            vec![0.0, 1.0, 2.0],
        ])
        .unwrap();
        let b = Vector(vec![3.0, 5.0, 3.0]);
        let x = solve_linear(&a, &b, 1e-14).unwrap();
        let r = &a.matvec(&x) - &b;
        assert!(r.norm() < 1e-12);
    }

    #[test]
    fn singular_detected() {
        let a = Matrix::from_rows(&[vec![1.0, 2.0], vec![2.0, 4.0]]).unwrap();
        assert!(solve_linear(&a, &Vector(vec![1.0, 2.0]), 1e-12).is_none());
    }

    #[test]
    fn jacobi_eigen_recovers_spectrum() {
        let m = Matrix::from_rows(&[
            vec![4.0, 1.0, 0.5],
            vec![1.0, 3.0, 0.25],
            vec![0.5, 0.25, 2.0],
        ])
        .unwrap();
        let (eig, v) = m.sym_eigen();
        // A v_k = lambda_k v_k for each column.
        for k in 0..3 {
            let col = Vector(vec![v.get(0, k), v.get(1, k), v.get(2, k)]);
            let av = m.matvec(&col);
            let lv = col.scale(eig[k]);
            assert!(av.dist(&lv) < 1e-10, "eigenpair {k} residual too large");
        }
        let trace: f64 = eig.iter().sum();
        assert!((trace - 9.0).abs() < 1e-10);
    }

    #[test]
    fn hull_of_square_plus_interior() {
        let pts = vec![
            [0.0, 0.0],
            [1.0, 0.0],
            [1.0, 1.0],
            [0.0, 1.0],
            [0.5, 0.5],
            [0.25, 0.75],
        ];
        let hull = convex_hull_2d(&pts);
        assert_eq!(hull.len(), 4);
    }
}
