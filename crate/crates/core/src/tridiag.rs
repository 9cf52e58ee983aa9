//! Symmetric tridiagonal eigenvalues by Sturm-sequence bisection.

use crate::error::{invalid, Result};

/// Symmetric tridiagonal matrix stored by its diagonal and first off-diagonal.
#[derive(Debug, Clone, PartialEq)]
pub struct SymTridiagonal {
    pub diag: Vec<f64>,
    pub off: Vec<f64>,
}

impl SymTridiagonal {
    pub fn new(diag: Vec<f64>, off: Vec<f64>) -> Result<Self> {
        if diag.is_empty() {
            return Err(invalid("diag", "empty matrix"));
        }
        if off.len() + 1 != diag.len() {
            return Err(invalid(
                "off",
                format!("off-diagonal must have {} entries", diag.len() - 1),
            ));
        }
        Ok(Self { diag, off })
    }

    pub fn dim(&self) -> usize {
        self.diag.len()
    }

    fn pivot_floor(&self) -> f64 {
        let scale = self
            .off
            .iter()
            .map(|e| e * e)
            .fold(f64::MIN_POSITIVE, f64::max);
        scale * f64::EPSILON * f64::EPSILON
    }

    /// Number of eigenvalues strictly below `x`.
    pub fn count_below(&self, x: f64) -> usize {
        let pivmin = self.pivot_floor();
        let mut count = 0;
        let mut q = self.diag[0] - x;
        if q.abs() < pivmin {
            q = -pivmin;
        }
        if q < 0.0 {
            count += 1;
        }
        for i in 1..self.dim() {
            let e = self.off[i - 1];
            q = self.diag[i] - x - e * e / q;
            if q.abs() < pivmin {
                q = -pivmin;
            }
            if q < 0.0 {
                count += 1;
            }
        }
        count
    }

    /// Gershgorin interval containing the spectrum.
    pub fn gershgorin(&self) -> (f64, f64) {
        let n = self.dim();
        let mut lo = f64::INFINITY;
        let mut hi = f64::NEG_INFINITY;
        for i in 0..n {
            let r = if i > 0 { self.off[i - 1].abs() } else { 0.0 }
                + if i + 1 < n { self.off[i].abs() } else { 0.0 };
            lo = lo.min(self.diag[i] - r);
            hi = hi.max(self.diag[i] + r);
        }
        (lo, hi)
    }

    /// The `k`-th smallest eigenvalue (0-based).
    pub fn eigenvalue(&self, k: usize) -> f64 {
        assert!(k < self.dim());
        let (mut lo, mut hi) = self.gershgorin();
        let pad = f64::EPSILON * lo.abs().max(hi.abs()).max(1.0);
        lo -= pad;
        hi += pad;
        for _ in 0..200 {
            let mid = 0.5 * (lo + hi);
            if mid <= lo || mid >= hi {
                break;
            }
            if self.count_below(mid) > k {
                hi = mid;
            } else {
                lo = mid;
            }
        }
        0.5 * (lo + hi)
    }

    /// All eigenvalues, ascending.
    pub fn eigenvalues(&self) -> Vec<f64> {
        (0..self.dim()).map(|k| self.eigenvalue(k)).collect()
    }

    /// `x^T T x`.
    pub fn quadratic(&self, x: &[f64]) -> f64 {
        let mut acc = 0.0;
        for i in 0..self.dim() {
            acc += self.diag[i] * x[i] * x[i];
            if i + 1 < self.dim() {
                acc += 2.0 * self.off[i] * x[i] * x[i + 1];
            }
        }
        acc
    }

    /// Solves `(T - shift I) y = rhs` by Gaussian elimination with partial pivoting.
    /// Exactly singular pivots are perturbed, which is what inverse iteration wants.
    pub fn solve_shifted(&self, shift: f64, rhs: &[f64]) -> Vec<f64> {
        let n = self.dim();
        let tiny = f64::EPSILON
            * self
                .diag
                .iter()
                .chain(self.off.iter())
                .fold(0.0f64, |m, v| m.max(v.abs()))
                .max(f64::MIN_POSITIVE);
        if n == 1 {
            let d = self.diag[0] - shift;
            let d = if d.abs() < tiny { tiny } else { d };
            return vec![rhs[0] / d];
        }
        // Row i of U holds (u0, u1, u2) at columns (i, i+1, i+2).
        let mut u0 = vec![0.0; n];
        let mut u1 = vec![0.0; n];
        let mut u2 = vec![0.0; n];
        let mut b = rhs.to_vec();
        let mut cur = (self.diag[0] - shift, self.off[0], 0.0);
        for i in 0..n - 1 {
            let below_sub = self.off[i];
            let below = (
                below_sub,
                self.diag[i + 1] - shift,
                if i + 2 < n { self.off[i + 1] } else { 0.0 },
            );
            // pivot candidates: cur row (cur.0 at col i) vs next row (below.0 at col i)
            let (top, mut bot, swapped) = if below.0.abs() > cur.0.abs() {
                ((below.0, below.1, below.2), (cur.0, cur.1, cur.2), true)
            } else {
                ((cur.0, cur.1, cur.2), (below.0, below.1, below.2), false)
            };
            if swapped {
                b.swap(i, i + 1);
            }
            let piv = if top.0.abs() < tiny { tiny } else { top.0 };
            let m = bot.0 / piv;
            bot.1 -= m * top.1;
            bot.2 -= m * top.2;
            b[i + 1] -= m * b[i];
            u0[i] = piv;
            u1[i] = top.1;
            u2[i] = top.2;
            cur = (bot.1, bot.2, 0.0);
        }
        u0[n - 1] = if cur.0.abs() < tiny { tiny } else { cur.0 };
        let mut y = vec![0.0; n];
        for i in (0..n).rev() {
            let mut s = b[i];
            if i + 1 < n {
                s -= u1[i] * y[i + 1];
            }
            if i + 2 < n {
                s -= u2[i] * y[i + 2];
            }
            y[i] = s / u0[i];
        }
        y
    }

    /// Eigenvector for the (already accurate) eigenvalue `ev`, by inverse iteration.
    /// Normalized to unit Euclidean norm with a nonnegative first nonzero entry.
    pub fn eigenvector(&self, ev: f64, iterations: usize) -> Vec<f64> {
        let n = self.dim();
        let mut v = vec![1.0 / (n as f64).sqrt(); n];
        for _ in 0..iterations.max(1) {
            let y = self.solve_shifted(ev, &v);
            let norm = y.iter().map(|t| t * t).sum::<f64>().sqrt();
            if !(norm > 0.0 && norm.is_finite()) {
                break;
            }
            v = y.into_iter().map(|t| t / norm).collect();
        }
        if let Some(first) = v.iter().find(|t| **t != 0.0) {
            if *first < 0.0 {
                v.iter_mut().for_each(|t| *t = -*t);
            }
        }
        v
    }
}

/// Smallest singular value of the upper/lower bidiagonal matrix with diagonal
/// `d` (length N) and off-diagonal `e` (length N-1).
///
/// Works on the Golub–Kahan form: the 2N x 2N zero-diagonal tridiagonal with
/// off-diagonal `(d_1, e_1, d_2, ..., e_{N-1}, d_N)` has eigenvalues `±sigma_j`.
/// Zero-diagonal Sturm counts resolve every singular value to high relative
/// accuracy, so bisection runs in relative (geometric) steps.
pub fn bidiagonal_min_singular(d: &[f64], e: &[f64]) -> Result<f64> {
    let n = d.len();
    if n == 0 || e.len() + 1 != n {
        return Err(invalid(
            "bidiagonal",
            "need N diagonal and N-1 off-diagonal entries",
        ));
    }
    let mut off2 = Vec::with_capacity(2 * n - 1);
    for i in 0..n {
        off2.push(d[i] * d[i]);
        if i + 1 < n {
            off2.push(e[i] * e[i]);
        }
    }
    // #{sigma_j < s} for s > 0.
    let count_below = |s: f64| -> usize {
        let pivmin = f64::MIN_POSITIVE / f64::EPSILON;
        let mut neg = 0usize;
        let mut q = -s;
        if q < 0.0 {
            neg += 1;
        }
        for &b2 in &off2 {
            q = -s - b2 / q;
            if q.abs() < pivmin {
                q = -pivmin;
            }
            if q < 0.0 {
                neg += 1;
            }
        }
        neg - n
    };
    if d.contains(&0.0) {
        return Ok(0.0);
    }
    let mut hi = d
        .iter()
        .zip(e.iter().chain(std::iter::once(&0.0)))
        .map(|(a, b)| a.abs() + b.abs())
        .fold(0.0f64, f64::max)
        .max(f64::MIN_POSITIVE);
    hi *= 1.0 + 4.0 * f64::EPSILON;
    // smallest singular value is bounded below by a positive number; shrink until
    // the count drops to zero
    let mut lo = hi;
    while count_below(lo) > 0 {
        lo *= 0.5;
        if lo < f64::MIN_POSITIVE {
            return Ok(0.0);
        }
    }
    while count_below(hi) == 0 {
        hi *= 2.0;
    }
    for _ in 0..400 {
        let mid = (lo * hi).sqrt();
        if !(mid > lo && mid < hi) || hi - lo <= 2.0 * f64::EPSILON * hi {
            break;
        }
        if count_below(mid) >= 1 {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    Ok(0.5 * (lo + hi))
}
