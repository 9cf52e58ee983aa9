//! Discrete Wirtinger-type forms
//! `Q(x) = b^2 x_1^2 + sum_{n<N} (a x_n - b x_{n+1})^2 + a^2 x_N^2`
//! and their extreme eigenvalues `a^2 + b^2 ± 2ab cos(pi/(N+1))`.

use std::f64::consts::PI;

use serde::Serialize;

use crate::error::{invalid, Error, Result};
use crate::tridiag::SymTridiagonal;

/// Matrix of `Q`: diagonal `a^2 + b^2`, off-diagonal `-ab`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct TridiagonalForm {
    pub a: f64,
    pub b: f64,
    pub n: usize,
}

impl TridiagonalForm {
    pub fn new(a: f64, b: f64, n: usize) -> Result<Self> {
        check_ab(a, b)?;
        if n == 0 {
            return Err(invalid("N", "N must be >= 1"));
        }
        Ok(Self { a, b, n })
    }

    pub fn matrix(&self) -> SymTridiagonal {
        SymTridiagonal::new(
            vec![self.a * self.a + self.b * self.b; self.n],
            vec![-self.a * self.b; self.n - 1],
        )
        .expect("dimensions are consistent")
    }

    /// `a^2 + b^2 + 2ab cos(k pi/(N+1))`, `k = N..1`, ascending.
    pub fn closed_form_spectrum(&self) -> Vec<f64> {
        let (a, b) = (self.a, self.b);
        let t = PI / (self.n as f64 + 1.0);
        (1..=self.n)
            .rev()
            .map(|k| a * a + b * b + 2.0 * a * b * (k as f64 * t).cos())
            .collect()
    }

    pub fn extremes(&self) -> (f64, f64) {
        let (a, b) = (self.a, self.b);
        let c = (PI / (self.n as f64 + 1.0)).cos();
        (
            a * a + b * b - 2.0 * a * b * c,
            a * a + b * b + 2.0 * a * b * c,
        )
    }
}

fn check_ab(a: f64, b: f64) -> Result<()> {
    if !(a > 0.0 && a.is_finite()) {
        return Err(invalid("a", format!("need a > 0, got {a}")));
    }
    if !(b > 0.0 && b.is_finite()) {
        return Err(invalid("b", format!("need b > 0, got {b}")));
    }
    Ok(())
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Spectrum {
    pub closed_form: Vec<f64>,
    pub numeric: Vec<f64>,
    pub max_deviation: f64,
}

/// Closed-form spectrum, cross-checked against Sturm bisection. Fails when
/// the two disagree by more than `1e-9` (scaled by `max(1, a^2 + b^2)`).
pub fn tridiag_spectrum(a: f64, b: f64, n: usize) -> Result<Spectrum> {
    let form = TridiagonalForm::new(a, b, n)?;
    let closed_form = form.closed_form_spectrum();
    let numeric = form.matrix().eigenvalues();
    let max_deviation = closed_form
        .iter()
        .zip(&numeric)
        .map(|(x, y)| (x - y).abs())
        .fold(0.0, f64::max);
    let tol = 1e-9 * (a * a + b * b).max(1.0);
    if max_deviation > tol {
        return Err(Error::CrossCheck(format!(
            "spectrum deviation {max_deviation:e} exceeds {tol:e}"
        )));
    }
    Ok(Spectrum {
        closed_form,
        numeric,
        max_deviation,
    })
}

pub fn quadratic_form(a: f64, b: f64, x: &[f64]) -> Result<f64> {
    let n = x.len();
    if n == 0 {
        return Err(invalid("x", "empty vector"));
    }
    let mut s = b * b * x[0] * x[0] + a * a * x[n - 1] * x[n - 1];
    for k in 0..n - 1 {
        let d = a * x[k] - b * x[k + 1];
        s += d * d;
    }
    Ok(s)
}

/// `(Q(x) - lo |x|^2, hi |x|^2 - Q(x))` with `lo, hi` the extreme eigenvalues.
pub fn lossers_bounds_check(a: f64, b: f64, x: &[f64]) -> Result<(f64, f64)> {
    check_ab(a, b)?;
    let q = quadratic_form(a, b, x)?;
    let (lo, hi) = TridiagonalForm::new(a, b, x.len())?.extremes();
    let s: f64 = x.iter().map(|v| v * v).sum();
    Ok((q - lo * s, hi * s - q))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum Sign {
    #[serde(rename = "+")]
    Plus,
    #[serde(rename = "-")]
    Minus,
}

impl Sign {
    fn value(self) -> f64 {
        match self {
            Sign::Plus => 1.0,
            Sign::Minus => -1.0,
        }
    }
}

impl std::str::FromStr for Sign {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim() {
            "+" | "plus" | "upper" => Ok(Sign::Plus),
            "-" | "minus" | "lower" => Ok(Sign::Minus),
            other => Err(invalid("sign", format!("expected + or -, got `{other}`"))),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RedhefferTrace {
    pub sign: Sign,
    /// `mu_1 .. mu_{N-1}`.
    pub mu: Vec<f64>,
    /// Coefficient of `x_n^2` after summing the termwise bounds, `n = 1..N`.
    pub coefficients: Vec<f64>,
    /// `a^2 + b^2 ± 2ab cos(pi/(N+1))`.
    pub constant: f64,
    pub max_deviation: f64,
}

/// Multipliers `mu_n = a^2 ± ab sin((n+1)t)/sin(nt)`, `t = pi/(N+1)`.
///
/// The termwise bound compares `(a x_n - b x_{n+1})^2` with
/// `mu_n x_n^2 - b^2 mu_n/(mu_n - a^2) x_{n+1}^2` (direction set by the sign);
/// summing over `n` leaves each
/// `x_n^2` with coefficient `mu_n + b^2 mu_{n-1}/(mu_{n-1} - a^2)` (ends adjusted
/// by `b^2 x_1^2` and `a^2 x_N^2`). All of them equal the extreme eigenvalue.
pub fn redheffer_mu(a: f64, b: f64, n: usize, sign: Sign) -> Result<RedhefferTrace> {
    check_ab(a, b)?;
    if n < 2 {
        return Err(invalid("N", "need N >= 2"));
    }
    let t = PI / (n as f64 + 1.0);
    // sin(k t) = sin((N+1-k) t); the reduced argument stays below pi/2
    let s = |k: usize| -> f64 {
        let j = k.min(n + 1 - k);
        (j as f64 * t).sin()
    };
    let mut mu = Vec::with_capacity(n - 1);
    for k in 1..n {
        let sk = s(k);
        if sk == 0.0 {
            return Err(invalid("N", format!("sin({k} t) vanishes")));
        }
        mu.push(a * a + sign.value() * a * b * s(k + 1) / sk);
    }
    let transfer = |m: f64| b * b * m / (m - a * a);
    let mut coefficients = Vec::with_capacity(n);
    coefficients.push(b * b + mu[0]);
    for k in 2..n {
        coefficients.push(mu[k - 1] + transfer(mu[k - 2]));
    }
    coefficients.push(a * a + transfer(mu[n - 2]));
    let constant = a * a + b * b + sign.value() * 2.0 * a * b * t.cos();
    let max_deviation = coefficients
        .iter()
        .map(|c| (c - constant).abs() / constant.abs().max(f64::MIN_POSITIVE))
        .fold(0.0, f64::max);
    Ok(RedhefferTrace {
        sign,
        mu,
        coefficients,
        constant,
        max_deviation,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn spectrum_examples() {
        let s = tridiag_spectrum(1.0, 1.0, 3).unwrap();
        let r2 = 2f64.sqrt();
        for (x, y) in s.closed_form.iter().zip([2.0 - r2, 2.0, 2.0 + r2]) {
            assert!((x - y).abs() < 1e-14);
        }
        assert!(s.max_deviation < 1e-12);
        let s = tridiag_spectrum(1.0, 1.0, 1).unwrap();
        assert!((s.closed_form[0] - 2.0).abs() < 1e-15);
        let s = tridiag_spectrum(2.0, 1.0, 2).unwrap();
        assert!((s.closed_form[0] - 3.0).abs() < 1e-14);
        assert!((s.closed_form[1] - 7.0).abs() < 1e-14);
        assert!(tridiag_spectrum(0.0, 1.0, 2).is_err());
    }

    #[test]
    fn quadratic_examples() {
        assert_eq!(quadratic_form(1.0, 1.0, &[1.0]).unwrap(), 2.0);
        assert_eq!(quadratic_form(1.0, 1.0, &[1.0, 1.0]).unwrap(), 2.0);
        assert_eq!(quadratic_form(2.0, 1.0, &[1.0, 0.0]).unwrap(), 5.0);
        assert!(quadratic_form(1.0, 1.0, &[]).is_err());
    }

    #[test]
    fn quadratic_matches_matrix() {
        let f = TridiagonalForm::new(1.3, 0.7, 5).unwrap();
        let x = [0.3, -1.2, 2.0, 0.5, -0.1];
        let q = quadratic_form(1.3, 0.7, &x).unwrap();
        assert!((q - f.matrix().quadratic(&x)).abs() < 1e-13 * q);
    }

    #[test]
    fn lossers_equality_cases() {
        let (lo, hi) = lossers_bounds_check(1.0, 1.0, &[1.0]).unwrap();
        assert!(lo.abs() < 1e-15 && hi.abs() < 1e-15);
        let n = 8;
        let x: Vec<f64> = (1..=n)
            .map(|k| (k as f64 * PI / (n as f64 + 1.0)).sin())
            .collect();
        let (lo, hi) = lossers_bounds_check(1.0, 1.0, &x).unwrap();
        assert!(lo.abs() < 1e-13);
        assert!(hi > 0.0);
    }

    #[test]
    fn redheffer_examples() {
        let r = redheffer_mu(1.0, 1.0, 3, Sign::Plus).unwrap();
        assert!((r.mu[0] - (1.0 + 2f64.sqrt())).abs() < 1e-14);
        assert!(r.max_deviation < 1e-12);
        let r = redheffer_mu(1.0, 1.0, 3, Sign::Minus).unwrap();
        assert!((r.mu[0] - (1.0 - 2f64.sqrt())).abs() < 1e-14);
        assert!(r.max_deviation < 1e-12);
        let s = tridiag_spectrum(1.0, 1.0, 3).unwrap();
        assert!((r.constant - s.closed_form[0]).abs() < 1e-14);
        assert!(redheffer_mu(1.0, 1.0, 1, Sign::Plus).is_err());
    }

    #[test]
    fn redheffer_large_n() {
        for sign in [Sign::Plus, Sign::Minus] {
            let r = redheffer_mu(1.7, 0.4, 10_000, sign).unwrap();
            assert!(r.max_deviation < 1e-12, "{:?} {}", sign, r.max_deviation);
        }
    }
}
