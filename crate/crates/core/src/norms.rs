//! `l^p` norms of the truncated weighted mean matrix `a_{n,k} = lambda_k / Lambda_n`.
//!
//! Three independent routes: the nonlinear power method (any `p > 1`), the
//! `eta`-recurrence bisection (any `p > 1`), and a direct eigen/singular value
//! computation for `p = 2`.

use serde::Serialize;

use crate::error::{invalid, Error, Result};
use crate::recurrences::{eta_log_sequence, EtaClass};
use crate::sum::NeumaierSum;
use crate::tridiag::{bidiagonal_min_singular, SymTridiagonal};
use crate::weights::WeightSequence;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum NormMethod {
    Eigen,
    PowerIteration,
    EtaBisection,
}

impl NormMethod {
    pub fn as_str(self) -> &'static str {
        match self {
            NormMethod::Eigen => "eigen",
            NormMethod::PowerIteration => "power-iteration",
            NormMethod::EtaBisection => "eta-bisection",
        }
    }
}

impl std::str::FromStr for NormMethod {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim() {
            "eigen" => Ok(NormMethod::Eigen),
            "power" | "power-iteration" => Ok(NormMethod::PowerIteration),
            "eta" | "eta-bisection" => Ok(NormMethod::EtaBisection),
            other => Err(invalid(
                "method",
                format!("unknown method `{other}` (eigen, power-iteration, eta-bisection)"),
            )),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct NormEstimate {
    pub method: NormMethod,
    pub p: f64,
    pub n: usize,
    pub norm: f64,
    /// Unit-`l^p` nonnegative maximizer.
    pub maximizer: Vec<f64>,
    /// Relative residual of the Lagrange stationarity equations at `maximizer`.
    pub residual: f64,
    pub iterations: usize,
    pub converged: bool,
    /// Power method: the ratio `||Ax||_p / ||x||_p` after every step.
    pub history: Vec<f64>,
}

/// Entrywise nonnegative `N x N` operator with its transpose.
pub trait NonnegOperator: Sync {
    fn dim(&self) -> usize;
    fn apply(&self, x: &[f64]) -> Vec<f64>;
    fn apply_transpose(&self, y: &[f64]) -> Vec<f64>;
}

/// `A` restricted to the first `n` coordinates.
#[derive(Debug, Clone, Copy)]
pub struct WeightedMean<'a> {
    w: &'a WeightSequence,
    n: usize,
}

impl<'a> WeightedMean<'a> {
    pub fn new(w: &'a WeightSequence, n: usize) -> Result<Self> {
        if n == 0 {
            return Err(invalid("N", "N must be >= 1"));
        }
        w.require_positive(n)?;
        Ok(Self { w, n })
    }
}

impl NonnegOperator for WeightedMean<'_> {
    fn dim(&self) -> usize {
        self.n
    }

    fn apply(&self, x: &[f64]) -> Vec<f64> {
        forward(self.w, x)
    }

    fn apply_transpose(&self, y: &[f64]) -> Vec<f64> {
        adjoint(self.w, y)
    }
}

/// The transpose operator, with `apply` and `apply_transpose` swapped.
#[derive(Debug, Clone, Copy)]
pub struct Transposed<O>(pub O);

impl<O: NonnegOperator> NonnegOperator for Transposed<O> {
    fn dim(&self) -> usize {
        self.0.dim()
    }

    fn apply(&self, x: &[f64]) -> Vec<f64> {
        self.0.apply_transpose(x)
    }

    fn apply_transpose(&self, y: &[f64]) -> Vec<f64> {
        self.0.apply(y)
    }
}

fn forward(w: &WeightSequence, a: &[f64]) -> Vec<f64> {
    let mut acc = NeumaierSum::new();
    a.iter()
        .enumerate()
        .map(|(i, v)| {
            acc.add(w.lambda(i + 1) * v);
            acc.value() / w.prefix(i + 1)
        })
        .collect()
}

fn adjoint(w: &WeightSequence, y: &[f64]) -> Vec<f64> {
    let n = y.len();
    let mut out = vec![0.0; n];
    let mut acc = NeumaierSum::new();
    for k in (1..=n).rev() {
        acc.add(y[k - 1] / w.prefix(k));
        out[k - 1] = w.lambda(k) * acc.value();
    }
    out
}

fn check_len(w: &WeightSequence, v: &[f64]) -> Result<()> {
    if v.is_empty() {
        return Err(Error::LengthMismatch {
            expected: w.len(),
            got: 0,
        });
    }
    if v.len() > w.len() {
        return Err(Error::LengthMismatch {
            expected: w.len(),
            got: v.len(),
        });
    }
    Ok(())
}

/// `(Aa)_n = Lambda_n^{-1} sum_{k<=n} lambda_k a_k`, for `n = 1..a.len()`.
pub fn apply_forward(w: &WeightSequence, a: &[f64]) -> Result<Vec<f64>> {
    check_len(w, a)?;
    Ok(forward(w, a))
}

/// `(A^T b)_k = lambda_k sum_{n>=k} b_n / Lambda_n`.
pub fn apply_adjoint(w: &WeightSequence, b: &[f64]) -> Result<Vec<f64>> {
    check_len(w, b)?;
    Ok(adjoint(w, b))
}

fn lp_norm(x: &[f64], p: f64) -> f64 {
    let m = x.iter().fold(0.0f64, |m, v| m.max(v.abs()));
    if m == 0.0 {
        return 0.0;
    }
    let s: f64 = x.iter().map(|v| (v.abs() / m).powf(p)).sum();
    m * s.powf(1.0 / p)
}

#[inline]
fn pow_pm1(v: f64, p: f64) -> f64 {
    if p == 2.0 {
        v
    } else {
        v.powf(p - 1.0)
    }
}

fn residual_for<O: NonnegOperator>(op: &O, p: f64, x: &[f64]) -> f64 {
    let y = op.apply(x);
    let ratio = lp_norm(&y, p) / lp_norm(x, p);
    let mu = ratio.powf(p);
    let g: Vec<f64> = y.iter().map(|v| pow_pm1(*v, p)).collect();
    let z = op.apply_transpose(&g);
    x.iter()
        .zip(&z)
        .map(|(xk, zk)| (mu * pow_pm1(*xk, p) - zk).abs() / zk)
        .fold(0.0, f64::max)
}

/// Settings for the nonlinear power method.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PowerOptions {
    /// Relative change of the norm estimate between consecutive steps.
    pub tol: f64,
    /// Required stationarity residual.
    pub residual_tol: f64,
    pub max_iter: usize,
}

impl Default for PowerOptions {
    fn default() -> Self {
        Self {
            tol: 1e-12,
            residual_tol: 1e-8,
            max_iter: 10_000,
        }
    }
}

/// Nonlinear power method `x <- (A^T (Ax)^{p-1})^{1/(p-1)}`, normalized.
///
/// Starts from the constant vector. For a nonnegative operator with a
/// positive lower-triangular part the iterates stay strictly positive and the
/// ratio `||Ax||_p / ||x||_p` is nondecreasing.
pub fn power_iteration<O: NonnegOperator>(
    op: &O,
    p: f64,
    opts: PowerOptions,
) -> Result<NormEstimate> {
    if !(p > 1.0 && p.is_finite()) {
        return Err(invalid("p", format!("need p > 1, got {p}")));
    }
    if !(opts.tol > 0.0) || opts.max_iter == 0 {
        return Err(invalid("tol", "need tol > 0 and max_iter >= 1"));
    }
    let n = op.dim();
    let inv = 1.0 / (p - 1.0);
    let mut x = vec![(n as f64).powf(-1.0 / p); n];
    let mut history = Vec::new();
    let mut prev = f64::NAN;
    let mut residual = f64::INFINITY;
    let mut converged = false;
    let mut iterations = 0;
    for it in 1..=opts.max_iter {
        iterations = it;
        let y = op.apply(&x);
        let ratio = lp_norm(&y, p) / lp_norm(&x, p);
        history.push(ratio);
        let mu = ratio.powf(p);
        let g: Vec<f64> = y.iter().map(|v| pow_pm1(*v, p)).collect();
        let z = op.apply_transpose(&g);
        residual = x
            .iter()
            .zip(&z)
            .map(|(xk, zk)| (mu * pow_pm1(*xk, p) - zk).abs() / zk)
            .fold(0.0, f64::max);
        if (ratio - prev).abs() <= opts.tol * ratio && residual < opts.residual_tol {
            converged = true;
            break;
        }
        prev = ratio;
        if it == opts.max_iter {
            break;
        }
        let mut next: Vec<f64> = if p == 2.0 {
            z
        } else {
            z.iter().map(|v| v.powf(inv)).collect()
        };
        let s = lp_norm(&next, p);
        next.iter_mut().for_each(|v| *v /= s);
        x = next;
    }
    let norm = *history.last().expect("at least one iteration");
    Ok(NormEstimate {
        method: NormMethod::PowerIteration,
        p,
        n,
        norm,
        maximizer: x,
        residual,
        iterations,
        converged,
        history,
    })
}

/// Power method on `A` restricted to `N` coordinates.
pub fn estimate_pnorm(
    w: &WeightSequence,
    p: f64,
    n: usize,
    tol: f64,
    max_iter: usize,
) -> Result<NormEstimate> {
    let op = WeightedMean::new(w, n)?;
    power_iteration(
        &op,
        p,
        PowerOptions {
            tol,
            max_iter,
            ..PowerOptions::default()
        },
    )
}

/// Power method on `A^T` in the dual exponent `q = p/(p-1)`. Its norm equals
/// that of `A` in `l^p`.
pub fn estimate_dual_qnorm(
    w: &WeightSequence,
    p: f64,
    n: usize,
    tol: f64,
    max_iter: usize,
) -> Result<NormEstimate> {
    if !(p > 1.0 && p.is_finite()) {
        return Err(invalid("p", format!("need p > 1, got {p}")));
    }
    let q = p / (p - 1.0);
    let op = Transposed(WeightedMean::new(w, n)?);
    power_iteration(
        &op,
        q,
        PowerOptions {
            tol,
            max_iter,
            ..PowerOptions::default()
        },
    )
}

/// `max_k |mu x_k^{p-1} - (A^T (Ax)^{p-1})_k| / (A^T (Ax)^{p-1})_k` with
/// `mu = ||Ax||_p^p / ||x||_p^p`. Zero exactly at a critical point of the ratio.
pub fn stationarity_residual(w: &WeightSequence, p: f64, x: &[f64]) -> Result<f64> {
    if !(p > 1.0 && p.is_finite()) {
        return Err(invalid("p", format!("need p > 1, got {p}")));
    }
    check_len(w, x)?;
    if let Some((i, v)) = x.iter().enumerate().find(|(_, v)| !(**v > 0.0)) {
        return Err(Error::NonPositiveEntry {
            index: i + 1,
            value: *v,
        });
    }
    let op = WeightedMean::new(w, x.len())?;
    Ok(residual_for(&op, p, x))
}

/// `(A^T A)^{-1} = A^{-1} A^{-T}` for the first `n` coordinates.
///
/// `A^{-1}` is lower bidiagonal with diagonal `Lambda_i/lambda_i` and
/// subdiagonal `-Lambda_i/lambda_{i+1}`, so the product is tridiagonal with
/// diagonal `x_i^2 + (Lambda_{i-1}/lambda_i)^2` and off-diagonal
/// `-Lambda_i^2 / (lambda_i lambda_{i+1})`.
pub fn inverse_gram_tridiagonal(w: &WeightSequence, n: usize) -> Result<SymTridiagonal> {
    if n == 0 {
        return Err(invalid("N", "N must be >= 1"));
    }
    w.require_positive(n)?;
    let diag = (1..=n)
        .map(|i| {
            let x = w.prefix(i) / w.lambda(i);
            let s = w.prefix(i - 1) / w.lambda(i);
            x * x + s * s
        })
        .collect();
    let off = (1..n)
        .map(|i| {
            let big = w.prefix(i);
            -(big / w.lambda(i)) * (big / w.lambda(i + 1))
        })
        .collect();
    SymTridiagonal::new(diag, off)
}

/// Exact `l^2` norm: `1 / sigma_min(A^{-1})`, with `A^{-1}` bidiagonal.
/// The maximizer is the bottom eigenvector of [`inverse_gram_tridiagonal`].
pub fn exact_l2_norm(w: &WeightSequence, n: usize) -> Result<NormEstimate> {
    if n == 0 {
        return Err(invalid("N", "N must be >= 1"));
    }
    w.require_positive(n)?;
    let d: Vec<f64> = (1..=n).map(|i| w.prefix(i) / w.lambda(i)).collect();
    let e: Vec<f64> = (1..n).map(|i| -w.prefix(i) / w.lambda(i + 1)).collect();
    let sigma = bidiagonal_min_singular(&d, &e)?;
    if !(sigma > 0.0) {
        return Err(Error::CrossCheck(
            "inverse matrix is numerically singular".into(),
        ));
    }
    let t = inverse_gram_tridiagonal(w, n)?;
    let iterations = 3;
    let v = t.eigenvector(sigma * sigma, iterations);
    let mut maximizer: Vec<f64> = v.iter().map(|t| t.abs()).collect();
    let s = lp_norm(&maximizer, 2.0);
    maximizer.iter_mut().for_each(|t| *t /= s);
    let residual = if maximizer.iter().all(|t| *t > 0.0) {
        stationarity_residual(w, 2.0, &maximizer)?
    } else {
        f64::NAN
    };
    Ok(NormEstimate {
        method: NormMethod::Eigen,
        p: 2.0,
        n,
        norm: 1.0 / sigma,
        maximizer,
        residual,
        iterations,
        converged: true,
        history: Vec::new(),
    })
}

/// The truncated norm is `mu*^{1/p}` where `mu*` is the unique `mu` with
/// `eta_N(mu) = x_N^p` and no earlier escape. Bisection on `mu`.
///
/// The maximizer is rebuilt from the `eta` values through
/// `(a_{k+1}/a_k)^{p-1} = (lambda_{k+1}/lambda_k) (1 - eta_k / x_k^p)`.
pub fn norm_via_eta_bisection(
    w: &WeightSequence,
    p: f64,
    n: usize,
    tol: f64,
) -> Result<NormEstimate> {
    if !(p > 1.0 && p.is_finite()) {
        return Err(invalid("p", format!("need p > 1, got {p}")));
    }
    if !(tol > 0.0) {
        return Err(invalid("tol", "need tol > 0"));
    }
    if n == 0 {
        return Err(invalid("N", "N must be >= 1"));
    }
    w.require_positive(n)?;
    let classify = |mu: f64| eta_log_sequence(w, p, mu, n).0;

    let mut lo = 1.0f64;
    let mut hi = 2.0f64;
    let mut doublings = 0;
    while classify(hi) == EtaClass::TooSmall {
        lo = hi;
        hi *= 2.0;
        doublings += 1;
        if doublings > 2000 || !hi.is_finite() {
            return Err(Error::Bracket(format!(
                "no upper bracket for mu up to {hi:e}"
            )));
        }
    }
    let mut iterations = 0;
    while hi - lo > tol * hi {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        iterations += 1;
        match classify(mid) {
            EtaClass::TooSmall => lo = mid,
            EtaClass::TooLarge => hi = mid,
        }
    }
    let mu = hi;
    let (_, ln_m) = eta_log_sequence(w, p, mu, n);
    let inv = 1.0 / (p - 1.0);
    let mut a = Vec::with_capacity(n);
    let mut cur = 1.0f64;
    a.push(cur);
    for k in 1..n {
        let ln_x = (w.prefix(k) / w.lambda(k)).ln();
        let t = p * ln_x - (p - 1.0) * ln_m[k - 1];
        let step = (w.lambda(k + 1) / w.lambda(k)) * (-(-t).exp_m1());
        cur *= step.powf(inv);
        a.push(cur);
    }
    let s = lp_norm(&a, p);
    a.iter_mut().for_each(|v| *v /= s);
    let residual = if a.iter().all(|v| *v > 0.0) {
        stationarity_residual(w, p, &a)?
    } else {
        f64::NAN
    };
    Ok(NormEstimate {
        method: NormMethod::EtaBisection,
        p,
        n,
        norm: mu.powf(1.0 / p),
        maximizer: a,
        residual,
        iterations,
        converged: hi - lo <= tol * hi * 2.0,
        history: Vec::new(),
    })
}

/// Dispatch on [`NormMethod`]; `Eigen` requires `p = 2`.
pub fn estimate(
    w: &WeightSequence,
    p: f64,
    n: usize,
    method: NormMethod,
    tol: f64,
) -> Result<NormEstimate> {
    match method {
        NormMethod::Eigen => {
            if p != 2.0 {
                return Err(invalid("method", "eigen route needs p = 2"));
            }
            exact_l2_norm(w, n)
        }
        NormMethod::PowerIteration => {
            estimate_pnorm(w, p, n, tol, PowerOptions::default().max_iter)
        }
        NormMethod::EtaBisection => norm_via_eta_bisection(w, p, n, tol.min(1e-14)),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn rel(a: f64, b: f64) -> f64 {
        (a - b).abs() / b.abs()
    }

    #[test]
    fn forward_and_adjoint_examples() {
        let w = WeightSequence::constant(3);
        assert_eq!(apply_forward(&w, &[1.0, 1.0, 1.0]).unwrap(), vec![1.0; 3]);
        let got = apply_forward(&w, &[3.0, 0.0, 0.0]).unwrap();
        assert_eq!(got, vec![3.0, 1.5, 1.0]);
        let adj = apply_adjoint(&w, &[1.0, 1.0, 1.0]).unwrap();
        let want = [1.0 + 0.5 + 1.0 / 3.0, 0.5 + 1.0 / 3.0, 1.0 / 3.0];
        for (a, b) in adj.iter().zip(want) {
            assert!(rel(*a, b) < 1e-15);
        }
        assert!(apply_forward(&w, &[1.0; 4]).is_err());
        assert!(apply_forward(&w, &[]).is_err());
    }

    #[test]
    fn small_cesaro_l2() {
        let w = WeightSequence::constant(3);
        let e = exact_l2_norm(&w, 1).unwrap();
        assert!(rel(e.norm, 1.0) < 1e-15);
        let e = exact_l2_norm(&w, 2).unwrap();
        assert!(rel(e.norm, 1.144_122_805_635_368_7) < 1e-14);
        let e = exact_l2_norm(&w, 3).unwrap();
        assert!(rel(e.norm, 1.221_513_004_93) < 1e-10);
        assert!(e.residual < 1e-10);
    }

    #[test]
    fn bidiagonal_vs_tridiagonal_route() {
        let w = WeightSequence::power(0.6, 200).unwrap();
        let e = exact_l2_norm(&w, 200).unwrap();
        let t = inverse_gram_tridiagonal(&w, 200).unwrap();
        let lam = t.eigenvalue(0);
        assert!(rel(e.norm, 1.0 / lam.sqrt()) < 1e-9);
    }

    #[test]
    fn three_routes_agree() {
        let w = WeightSequence::constant(300);
        let exact = exact_l2_norm(&w, 300).unwrap();
        let pw = estimate_pnorm(&w, 2.0, 300, 1e-13, 20_000).unwrap();
        let eta = norm_via_eta_bisection(&w, 2.0, 300, 1e-15).unwrap();
        assert!(pw.converged);
        assert!(rel(pw.norm, exact.norm) < 1e-8);
        assert!(rel(eta.norm, exact.norm) < 1e-12);
        assert!(eta.residual < 1e-6, "{}", eta.residual);
    }

    #[test]
    fn power_history_nondecreasing() {
        let w = WeightSequence::power(1.5, 80).unwrap();
        let e = estimate_pnorm(&w, 3.0, 80, 1e-12, 5000).unwrap();
        for pair in e.history.windows(2) {
            assert!(pair[1] >= pair[0] * (1.0 - 1e-14));
        }
    }

    #[test]
    fn dual_exponent_same_norm() {
        let w = WeightSequence::power(0.5, 60).unwrap();
        for p in [1.5, 3.0] {
            let a = estimate_pnorm(&w, p, 60, 1e-13, 50_000).unwrap();
            let b = estimate_dual_qnorm(&w, p, 60, 1e-13, 50_000).unwrap();
            assert!(rel(a.norm, b.norm) < 1e-7, "{} {}", a.norm, b.norm);
        }
    }

    #[test]
    fn residual_zero_for_single_coordinate() {
        let w = WeightSequence::constant(1);
        assert_eq!(stationarity_residual(&w, 2.0, &[1.0]).unwrap(), 0.0);
        assert!(stationarity_residual(&w, 2.0, &[0.0]).is_err());
    }

    #[test]
    fn eta_bisection_n_one_is_one() {
        let w = WeightSequence::power(2.0, 1).unwrap();
        let e = norm_via_eta_bisection(&w, 3.0, 1, 1e-15).unwrap();
        assert!(rel(e.norm, 1.0) < 1e-14);
    }

    #[test]
    fn method_parsing() {
        assert_eq!("eigen".parse::<NormMethod>().unwrap(), NormMethod::Eigen);
        assert_eq!(
            "power".parse::<NormMethod>().unwrap(),
            NormMethod::PowerIteration
        );
        assert!("svd".parse::<NormMethod>().is_err());
    }
}
