//! Shared numerical kernels: log-scaled 2x2 products, a dense real-symmetric
//! eigensolver (Householder + implicit-shift QL), a complex tridiagonal
//! solver, bracketed root finding and adaptive Gauss-Legendre quadrature.

use crate::{Error, Result};
use num_complex::Complex64;

/// 2x2 real matrix stored as a unit-scale part and the natural log of the
/// removed magnitude. The Frobenius norm of `m` stays in `[1/2, 2]`, so
/// arbitrarily long SL(2,R) products never overflow a double.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ScaledMatrix {
    pub m: [[f64; 2]; 2],
    pub log_scale: f64,
}

impl ScaledMatrix {
    pub fn identity() -> Self {
        ScaledMatrix {
            m: [[1.0, 0.0], [0.0, 1.0]],
            log_scale: 0.0,
        }
    }

    pub fn from_matrix(m: [[f64; 2]; 2]) -> Result<Self> {
        check_finite(&m)?;
        let mut s = ScaledMatrix { m, log_scale: 0.0 };
        s.renormalize();
        Ok(s)
    }

    fn frobenius(&self) -> f64 {
        let m = &self.m;
        (m[0][0] * m[0][0] + m[0][1] * m[0][1] + m[1][0] * m[1][0] + m[1][1] * m[1][1]).sqrt()
    }

    fn renormalize(&mut self) {
        let f = self.frobenius();
        if !(0.5..=2.0).contains(&f) && f > 0.0 && f.is_finite() {
            for row in self.m.iter_mut() {
                for x in row.iter_mut() {
                    *x /= f;
                }
            }
            self.log_scale += f.ln();
        }
    }

    /// det of the represented matrix, reconstructed through the log scale.
    pub fn det(&self) -> f64 {
        let d = self.m[0][0] * self.m[1][1] - self.m[0][1] * self.m[1][0];
        d * (2.0 * self.log_scale).exp()
    }

    fn frob_sq(&self) -> f64 {
        let m = &self.m;
        m[0][0] * m[0][0] + m[0][1] * m[0][1] + m[1][0] * m[1][0] + m[1][1] * m[1][1]
    }

    /// Natural log of the operator 2-norm (largest singular value) of the
    /// unit-scale part via sigma_max = ((s1+s2) + |s1-s2|)/2, using
    /// f^2 + 2|det| = (s1+s2)^2 and f^2 - 2|det| = (s1-s2)^2; this form is
    /// exact for orthogonal matrices where the discriminant route loses
    /// half the mantissa.
    pub fn norm_log(&self) -> f64 {
        let f2 = self.frob_sq();
        let d = (self.m[0][0] * self.m[1][1] - self.m[0][1] * self.m[1][0]).abs();
        let sum = (f2 + 2.0 * d).sqrt();
        let diff = (f2 - 2.0 * d).max(0.0).sqrt();
        (0.5 * (sum + diff)).ln() + self.log_scale
    }

    /// Smallest singular value on the log scale.
    pub fn min_sv_log(&self) -> f64 {
        let f2 = self.frob_sq();
        let d = (self.m[0][0] * self.m[1][1] - self.m[0][1] * self.m[1][0]).abs();
        let sum = (f2 + 2.0 * d).sqrt();
        let diff = (f2 - 2.0 * d).max(0.0).sqrt();
        (0.5 * (sum - diff)).max(f64::MIN_POSITIVE).ln() + self.log_scale
    }

    /// The represented matrix as a plain 2x2 array. Only meaningful while
    /// `|log_scale|` is small enough for `exp` not to overflow.
    pub fn reconstruct(&self) -> [[f64; 2]; 2] {
        let s = self.log_scale.exp();
        [
            [self.m[0][0] * s, self.m[0][1] * s],
            [self.m[1][0] * s, self.m[1][1] * s],
        ]
    }

    /// Squared norm of `M u` for `u = (1, 0)^T`, on the log scale.
    pub fn first_column_norm_sq_log(&self) -> f64 {
        let c = self.m[0][0] * self.m[0][0] + self.m[1][0] * self.m[1][0];
        c.ln() + 2.0 * self.log_scale
    }
}

fn check_finite(m: &[[f64; 2]; 2]) -> Result<()> {
    for row in m {
        for x in row {
            if !x.is_finite() {
                return Err(Error::InvalidInput(format!("non-finite matrix entry {x}")));
            }
        }
    }
    Ok(())
}

/// Left-multiply the represented matrix by `b`, renormalizing the result.
pub fn scaled_mul(a: &ScaledMatrix, b: [[f64; 2]; 2]) -> Result<ScaledMatrix> {
    check_finite(&b)?;
    let m = &a.m;
    let p = [
        [
            b[0][0] * m[0][0] + b[0][1] * m[1][0],
            b[0][0] * m[0][1] + b[0][1] * m[1][1],
        ],
        [
            b[1][0] * m[0][0] + b[1][1] * m[1][0],
            b[1][0] * m[0][1] + b[1][1] * m[1][1],
        ],
    ];
    let mut out = ScaledMatrix {
        m: p,
        log_scale: a.log_scale,
    };
    out.renormalize();
    Ok(out)
}

/// An open energy window `(lo, hi)` with positive width.
#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct Interval {
    lo: f64,
    hi: f64,
}

impl Interval {
    pub fn new(lo: f64, hi: f64) -> Result<Self> {
        if !(lo.is_finite() && hi.is_finite() && lo < hi) {
            return Err(Error::InvalidInput(format!(
                "degenerate interval ({lo}, {hi})"
            )));
        }
        Ok(Interval { lo, hi })
    }

    pub fn lo(&self) -> f64 {
        self.lo
    }

    pub fn hi(&self) -> f64 {
        self.hi
    }

    pub fn len(&self) -> f64 {
        self.hi - self.lo
    }

    pub fn contains(&self, e: f64) -> bool {
        self.lo < e && e < self.hi
    }

    /// Length of the overlap with the closed interval `[a, b]`.
    pub fn overlap(&self, a: f64, b: f64) -> f64 {
        (self.hi.min(b) - self.lo.max(a)).max(0.0)
    }
}

// ---------------------------------------------------------------------------
// Root finding
// ---------------------------------------------------------------------------

/// Bracketed root finding: bisection with secant acceleration. The bracket is
/// never abandoned, so convergence to width `tol` is guaranteed.
pub fn find_root<F: FnMut(f64) -> f64>(mut f: F, bracket: Interval, tol: f64) -> Result<f64> {
    let (mut lo, mut hi) = (bracket.lo(), bracket.hi());
    let (mut flo, mut fhi) = (f(lo), f(hi));
    if flo == 0.0 {
        return Ok(lo);
    }
    if fhi == 0.0 {
        return Ok(hi);
    }
    if flo.signum() == fhi.signum() {
        return Err(Error::InvalidBracket);
    }
    let mut bisect_next = false;
    for _ in 0..200 {
        if hi - lo <= tol {
            break;
        }
        let mid = 0.5 * (lo + hi);
        // Try a secant step every other iteration; fall back to bisection
        // whenever the step leaves the bracket interior.
        let mut x = mid;
        if !bisect_next && flo.is_finite() && fhi.is_finite() && fhi != flo {
            let s = lo - flo * (hi - lo) / (fhi - flo);
            let margin = 0.01 * (hi - lo);
            if s > lo + margin && s < hi - margin {
                x = s;
            }
        }
        bisect_next = !bisect_next;
        let fx = f(x);
        if fx == 0.0 {
            return Ok(x);
        }
        if fx.signum() == flo.signum() {
            lo = x;
            flo = fx;
        } else {
            hi = x;
            fhi = fx;
        }
    }
    Ok(0.5 * (lo + hi))
}

// ---------------------------------------------------------------------------
// Gauss-Legendre quadrature
// ---------------------------------------------------------------------------

/// Nodes and weights of the n-point Gauss-Legendre rule on [-1, 1], by Newton
/// iteration on the Legendre recurrence.
pub fn gauss_legendre(n: usize) -> (Vec<f64>, Vec<f64>) {
    assert!(n >= 1);
    let mut nodes = vec![0.0; n];
    let mut weights = vec![0.0; n];
    let m = n.div_ceil(2);
    for i in 0..m {
        let mut x = (std::f64::consts::PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
        let mut pp = 0.0;
        for _ in 0..100 {
            let mut p0 = 1.0;
            let mut p1 = 0.0;
            for j in 0..n {
                let p2 = p1;
                p1 = p0;
                p0 = ((2.0 * j as f64 + 1.0) * x * p1 - j as f64 * p2) / (j as f64 + 1.0);
            }
            pp = n as f64 * (x * p0 - p1) / (x * x - 1.0);
            let dx = p0 / pp;
            x -= dx;
            if dx.abs() < 1e-15 {
                break;
            }
        }
        nodes[i] = -x;
        nodes[n - 1 - i] = x;
        let w = 2.0 / ((1.0 - x * x) * pp * pp);
        weights[i] = w;
        weights[n - 1 - i] = w;
    }
    nodes[n / 2] = if n % 2 == 1 { 0.0 } else { nodes[n / 2] };
    (nodes, weights)
}

const PANEL_ORDER: usize = 15;
const MAX_DEPTH: u32 = 40;

/// Quadrature result; `converged` is false when some panel hit the bisection
/// depth cap before meeting its error budget.
#[derive(Debug, Clone, Copy)]
pub struct Quadrature {
    pub value: f64,
    pub converged: bool,
}

fn gl_panel<F: FnMut(f64) -> Result<f64>>(
    f: &mut F,
    a: f64,
    b: f64,
    nodes: &[f64],
    weights: &[f64],
) -> Result<f64> {
    let c = 0.5 * (a + b);
    let h = 0.5 * (b - a);
    let mut acc = 0.0;
    for (x, w) in nodes.iter().zip(weights) {
        let e = c + h * x;
        let y = f(e)?;
        if !y.is_finite() {
            return Err(Error::InvalidIntegrand(e));
        }
        acc += w * y;
    }
    Ok(acc * h)
}

/// Composite Gauss-Legendre quadrature on adaptively bisected panels.
/// The total error budget is `max(tol * |estimate|, tol * |I|)`, distributed
/// over panels proportionally to panel length.
pub fn integrate<F: FnMut(f64) -> f64>(
    mut f: F,
    interval: Interval,
    tol: f64,
) -> Result<Quadrature> {
    integrate_res(|e| Ok(f(e)), interval, tol)
}

/// Fallible-integrand version of [`integrate`].
pub fn integrate_res<F: FnMut(f64) -> Result<f64>>(
    mut f: F,
    interval: Interval,
    tol: f64,
) -> Result<Quadrature> {
    let (nodes, weights) = gauss_legendre(PANEL_ORDER);
    let (a, b) = (interval.lo(), interval.hi());
    let rough = gl_panel(&mut f, a, b, &nodes, &weights)?;
    let budget = tol * rough.abs().max(interval.len());

    // Explicit stack of (a, b, whole-panel estimate, depth).
    let mut stack = vec![(a, b, rough, 0u32)];
    let mut total = 0.0;
    let mut converged = true;
    while let Some((a, b, whole, depth)) = stack.pop() {
        let mid = 0.5 * (a + b);
        let left = gl_panel(&mut f, a, mid, &nodes, &weights)?;
        let right = gl_panel(&mut f, mid, b, &nodes, &weights)?;
        let refined = left + right;
        let local = budget * (b - a) / interval.len();
        if (refined - whole).abs() <= local || depth >= MAX_DEPTH {
            if (refined - whole).abs() > local {
                converged = false;
            }
            total += refined;
        } else {
            stack.push((a, mid, left, depth + 1));
            stack.push((mid, b, right, depth + 1));
        }
    }
    Ok(Quadrature {
        value: total,
        converged,
    })
}

// ---------------------------------------------------------------------------
// Symmetric eigensolver
// ---------------------------------------------------------------------------

/// Householder reduction of a dense symmetric matrix (row-major, n*n) to
/// tridiagonal form, accumulating the orthogonal transform in `z`.
fn tred2(a: &mut [f64], n: usize, d: &mut [f64], e: &mut [f64]) {
    for i in (1..n).rev() {
        let l = i - 1;
        let mut h = 0.0;
        if l > 0 {
            let scale: f64 = (0..=l).map(|k| a[i * n + k].abs()).sum();
            if scale == 0.0 {
                e[i] = a[i * n + l];
            } else {
                for k in 0..=l {
                    a[i * n + k] /= scale;
                    h += a[i * n + k] * a[i * n + k];
                }
                let mut f = a[i * n + l];
                let g = if f >= 0.0 { -h.sqrt() } else { h.sqrt() };
                e[i] = scale * g;
                h -= f * g;
                a[i * n + l] = f - g;
                f = 0.0;
                for j in 0..=l {
                    a[j * n + i] = a[i * n + j] / h;
                    let mut g = 0.0;
                    for k in 0..=j {
                        g += a[j * n + k] * a[i * n + k];
                    }
                    for k in (j + 1)..=l {
                        g += a[k * n + j] * a[i * n + k];
                    }
                    e[j] = g / h;
                    f += e[j] * a[i * n + j];
                }
                let hh = f / (h + h);
                for j in 0..=l {
                    let f = a[i * n + j];
                    let g = e[j] - hh * f;
                    e[j] = g;
                    for k in 0..=j {
                        a[j * n + k] -= f * e[k] + g * a[i * n + k];
                    }
                }
            }
        } else {
            e[i] = a[i * n + l];
        }
        d[i] = h;
    }
    d[0] = 0.0;
    e[0] = 0.0;
    for i in 0..n {
        if d[i] != 0.0 {
            for j in 0..i {
                let mut g = 0.0;
                for k in 0..i {
                    g += a[i * n + k] * a[k * n + j];
                }
                for k in 0..i {
                    a[k * n + j] -= g * a[k * n + i];
                }
            }
        }
        d[i] = a[i * n + i];
        a[i * n + i] = 1.0;
        for j in 0..i {
            a[j * n + i] = 0.0;
            a[i * n + j] = 0.0;
        }
    }
}

/// Implicit-shift QL on a symmetric tridiagonal matrix. `z` holds rows whose
/// columns are rotated along with the matrix; pass the identity (or any
/// accumulated transform) to obtain eigenvectors, a single `e_1` row to obtain
/// first components only, or nothing for eigenvalues alone.
fn tqli(d: &mut [f64], e: &mut [f64], n: usize, z: &mut [Vec<f64>]) -> Result<()> {
    if n == 0 {
        return Ok(());
    }
    for i in 1..n {
        e[i - 1] = e[i];
    }
    e[n - 1] = 0.0;
    for l in 0..n {
        let mut iter = 0;
        loop {
            let mut m = l;
            while m + 1 < n {
                let dd = d[m].abs() + d[m + 1].abs();
                if e[m].abs() <= f64::EPSILON * dd {
                    break;
                }
                m += 1;
            }
            if m == l {
                break;
            }
            iter += 1;
            if iter > 50 {
                return Err(Error::NumericalFailure(
                    "QL iteration did not converge within 50 sweeps".into(),
                ));
            }
            let mut g = (d[l + 1] - d[l]) / (2.0 * e[l]);
            let mut r = g.hypot(1.0);
            g = d[m] - d[l] + e[l] / (g + r.copysign(g));
            let (mut s, mut c) = (1.0, 1.0);
            let mut p = 0.0;
            for i in (l..m).rev() {
                let mut f = s * e[i];
                let b = c * e[i];
                r = f.hypot(g);
                e[i + 1] = r;
                if r == 0.0 {
                    d[i + 1] -= p;
                    e[m] = 0.0;
                    break;
                }
                s = f / r;
                c = g / r;
                g = d[i + 1] - p;
                r = (d[i] - g) * s + 2.0 * c * b;
                p = s * r;
                d[i + 1] = g + p;
                g = c * r - b;
                for row in z.iter_mut() {
                    f = row[i + 1];
                    row[i + 1] = s * row[i] + c * f;
                    row[i] = c * row[i] - s * f;
                }
            }
            if r == 0.0 && m > l {
                continue;
            }
            d[l] -= p;
            e[l] = g;
            e[m] = 0.0;
        }
    }
    Ok(())
}

fn check_symmetric(a: &[f64], n: usize) -> Result<()> {
    let amax = a.iter().fold(0.0f64, |m, x| m.max(x.abs())).max(1e-300);
    for i in 0..n {
        for j in 0..i {
            if (a[i * n + j] - a[j * n + i]).abs() > 1e-12 * amax {
                return Err(Error::InvalidInput(format!(
                    "matrix asymmetric at ({i},{j})"
                )));
            }
        }
    }
    Ok(())
}

fn sort_ascending(d: &mut [f64], cols: Option<&mut Vec<Vec<f64>>>) {
    let n = d.len();
    let mut idx: Vec<usize> = (0..n).collect();
    idx.sort_by(|&i, &j| d[i].partial_cmp(&d[j]).unwrap());
    let sorted: Vec<f64> = idx.iter().map(|&i| d[i]).collect();
    d.copy_from_slice(&sorted);
    if let Some(cols) = cols {
        let reordered: Vec<Vec<f64>> = idx.iter().map(|&i| cols[i].clone()).collect();
        *cols = reordered;
    }
}

/// Eigenvalues (ascending) of a dense real symmetric matrix, row-major.
pub fn sym_eig(a: &[f64], n: usize) -> Result<Vec<f64>> {
    if n == 0 || a.len() != n * n {
        return Err(Error::InvalidInput("matrix size mismatch".into()));
    }
    check_symmetric(a, n)?;
    let mut work = a.to_vec();
    let mut d = vec![0.0; n];
    let mut e = vec![0.0; n];
    tred2(&mut work, n, &mut d, &mut e);
    tqli(&mut d, &mut e, n, &mut [])?;
    sort_ascending(&mut d, None);
    Ok(d)
}

/// Eigenvalues (ascending) and matching unit eigenvectors.
pub fn sym_eig_vectors(a: &[f64], n: usize) -> Result<(Vec<f64>, Vec<Vec<f64>>)> {
    if n == 0 || a.len() != n * n {
        return Err(Error::InvalidInput("matrix size mismatch".into()));
    }
    check_symmetric(a, n)?;
    let mut work = a.to_vec();
    let mut d = vec![0.0; n];
    let mut e = vec![0.0; n];
    tred2(&mut work, n, &mut d, &mut e);
    // Rows of the accumulated transform; column j across rows is eigenvector j.
    let mut rows: Vec<Vec<f64>> = (0..n).map(|i| work[i * n..(i + 1) * n].to_vec()).collect();
    tqli(&mut d, &mut e, n, &mut rows)?;
    let mut vecs: Vec<Vec<f64>> = (0..n)
        .map(|j| (0..n).map(|i| rows[i][j]).collect())
        .collect();
    sort_ascending(&mut d, Some(&mut vecs));
    Ok((d, vecs))
}

/// Eigenvalues (ascending) of a symmetric tridiagonal matrix together with
/// the first component of each unit eigenvector, accumulated through the QL
/// rotations in O(n^2). Used for spectral-measure oracles of Jacobi matrices.
pub fn tridiag_eig_first_components(diag: &[f64], off: &[f64]) -> Result<(Vec<f64>, Vec<f64>)> {
    let n = diag.len();
    if n == 0 || off.len() + 1 != n {
        return Err(Error::InvalidInput("tridiagonal size mismatch".into()));
    }
    let mut d = diag.to_vec();
    // tqli consumes the subdiagonal in slots 1..n.
    let mut e = vec![0.0; n];
    e[1..n].copy_from_slice(off);
    let mut first = vec![vec![0.0; n]];
    first[0][0] = 1.0;
    tqli(&mut d, &mut e, n, &mut first)?;
    let mut pairs: Vec<(f64, f64)> = d.iter().cloned().zip(first[0].iter().cloned()).collect();
    pairs.sort_by(|a, b| a.0.partial_cmp(&b.0).unwrap());
    Ok((
        pairs.iter().map(|p| p.0).collect(),
        pairs.iter().map(|p| p.1).collect(),
    ))
}

// ---------------------------------------------------------------------------
// Complex tridiagonal solve
// ---------------------------------------------------------------------------

/// Thomas recursion for a complex tridiagonal system with real off-diagonals.
/// Breakdown (pivot below 1e-300) signals an energy at, or within roundoff
/// of, a resonance of the decoupled sample.
pub fn tridiag_solve_complex(
    diag: &[Complex64],
    off: &[f64],
    rhs: &[Complex64],
) -> Result<Vec<Complex64>> {
    let n = diag.len();
    if n == 0 || off.len() + 1 != n || rhs.len() != n {
        return Err(Error::InvalidInput("tridiagonal size mismatch".into()));
    }
    let mut c_prime = vec![Complex64::new(0.0, 0.0); n];
    let mut d_prime = vec![Complex64::new(0.0, 0.0); n];
    let mut pivot = diag[0];
    if pivot.norm() < 1e-300 {
        return Err(Error::NearSingular(pivot.norm()));
    }
    if n > 1 {
        c_prime[0] = Complex64::new(off[0], 0.0) / pivot;
    }
    d_prime[0] = rhs[0] / pivot;
    for i in 1..n {
        pivot = diag[i] - off[i - 1] * c_prime[i - 1];
        if pivot.norm() < 1e-300 {
            return Err(Error::NearSingular(pivot.norm()));
        }
        if i + 1 < n {
            c_prime[i] = Complex64::new(off[i], 0.0) / pivot;
        }
        d_prime[i] = (rhs[i] - off[i - 1] * d_prime[i - 1]) / pivot;
    }
    let mut x = vec![Complex64::new(0.0, 0.0); n];
    x[n - 1] = d_prime[n - 1];
    for i in (0..n - 1).rev() {
        x[i] = d_prime[i] - c_prime[i] * x[i + 1];
    }
    Ok(x)
}
