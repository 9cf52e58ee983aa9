//! Auxiliary sequences behind the norm bounds: the `eta` recurrence from the
//! Lagrange system, its `q`-exponent form `mu_n`, the barrier `(b+c)x - c`,
//! the classical Kaluza–Szegő weights, the `beta`-sequence that certifies
//! `(p/(p-L))^p`, and the `w`-sequence used for the reversed inequalities.
//!
//! Throughout, `x_n = Lambda_n / lambda_n` and indices in traces are 1-based
//! (`values[0]` is the `n = 1` term).

use std::collections::BTreeMap;

use serde::Serialize;

use crate::error::{invalid, Result};
use crate::norms::apply_forward;
use crate::weights::WeightSequence;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum TraceKind {
    Eta,
    MuQ,
    KsClassical,
    #[serde(rename = "gao_beta")]
    Beta,
    ReversedW,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RecurrenceTrace {
    pub kind: TraceKind,
    pub params: BTreeMap<String, f64>,
    pub values: Vec<f64>,
    pub log_values: Vec<f64>,
    /// `x_n` for the indices covered by `values`.
    pub ratios: Vec<f64>,
    pub barrier: Vec<f64>,
    /// Per-index slack of the verification inequality that goes with the
    /// sequence (Kaluza–Szegő, `beta`-sequence, reversed `w`). `>= 0` holds.
    pub margins: Vec<f64>,
    /// Secondary per-index checks, keyed by name.
    pub side_margins: BTreeMap<String, Vec<f64>>,
    pub first_violation: Option<usize>,
    pub escaped_at: Option<usize>,
    /// Barrier met with equality at the critical `mu` (informational).
    pub boundary_touch: Option<usize>,
}

impl RecurrenceTrace {
    fn new(kind: TraceKind) -> Self {
        Self {
            kind,
            params: BTreeMap::new(),
            values: Vec::new(),
            log_values: Vec::new(),
            ratios: Vec::new(),
            barrier: Vec::new(),
            margins: Vec::new(),
            side_margins: BTreeMap::new(),
            first_violation: None,
            escaped_at: None,
            boundary_touch: None,
        }
    }

    fn param(&self, key: &str) -> Option<f64> {
        self.params.get(key).copied()
    }

    /// Smallest 1-based index with a negative margin.
    pub fn first_negative_margin(&self) -> Option<usize> {
        self.margins.iter().position(|m| *m < 0.0).map(|i| i + 1)
    }

    pub fn min_margin(&self) -> Option<f64> {
        self.margins.iter().copied().reduce(f64::min)
    }
}

fn check_p_l(p: f64, l: f64) -> Result<()> {
    if !(p > 1.0 && p.is_finite()) {
        return Err(invalid("p", format!("need p > 1, got {p}")));
    }
    if !(l > 0.0 && l < p) {
        return Err(invalid("L", format!("need 0 < L < p, got L={l}, p={p}")));
    }
    Ok(())
}

/// Barrier constants `b = (1-L/p)^{p/(p-1)}`, `c = (L/p)(1-L/p)^{1/(p-1)}`.
pub fn barrier_constants(p: f64, l: f64) -> (f64, f64) {
    let base = 1.0 - l / p;
    let b = base.powf(p / (p - 1.0));
    let c = (l / p) * base.powf(1.0 / (p - 1.0));
    (b, c)
}

#[inline]
fn log_add_exp(a: f64, b: f64) -> f64 {
    let (hi, lo) = if a >= b { (a, b) } else { (b, a) };
    if hi == f64::NEG_INFINITY {
        return hi;
    }
    hi + (lo - hi).exp().ln_1p()
}

/// Trace of `eta_k(mu)`: `eta_1 = 1/mu` and
/// `eta_{k+1}^{1/(p-1)} = (Lambda_k/lambda_{k+1}) (Lambda_k eta_k / lambda_{k+1} / (x_k^p - eta_k))^{1/(p-1)} + mu^{-1/(p-1)}`.
///
/// Escape (`eta_k >= x_k^p`, boundary equality included) stops the trace and
/// is reported in `escaped_at`. Very small or very large `p` switch to log-domain arithmetic.
pub fn eta_trace(w: &WeightSequence, p: f64, mu: f64, n: usize) -> Result<RecurrenceTrace> {
    let log_domain = !(1.2..=8.0).contains(&p);
    eta_trace_impl(w, p, mu, n, log_domain)
}

pub(crate) fn eta_trace_impl(
    w: &WeightSequence,
    p: f64,
    mu: f64,
    n: usize,
    log_domain: bool,
) -> Result<RecurrenceTrace> {
    if !(p > 1.0 && p.is_finite()) {
        return Err(invalid("p", format!("need p > 1, got {p}")));
    }
    if !(mu > 0.0 && mu.is_finite()) {
        return Err(invalid("mu", format!("need mu > 0, got {mu}")));
    }
    if n == 0 {
        return Err(invalid("N", "N must be >= 1"));
    }
    w.require_positive(n)?;
    let s = 1.0 / (p - 1.0);
    let mut tr = RecurrenceTrace::new(TraceKind::Eta);
    tr.params.insert("p".into(), p);
    tr.params.insert("mu".into(), mu);

    let mut eta = 1.0 / mu;
    let mut ln_eta = -mu.ln();
    for k in 1..=n {
        let x = w.prefix(k) / w.lambda(k);
        tr.values.push(eta);
        tr.log_values.push(ln_eta);
        tr.ratios.push(x);
        let ln_xp = p * x.ln();
        if ln_eta >= ln_xp {
            tr.escaped_at = Some(k);
            break;
        }
        if k == n {
            break;
        }
        let lk = w.prefix(k);
        let lam_next = w.lambda(k + 1);
        if log_domain {
            let ln_ratio = (lk / lam_next).ln();
            // ln(x^p - eta) = ln x^p + ln(1 - eta/x^p)
            let ln_gap = ln_xp + (-(ln_eta - ln_xp).exp_m1()).ln();
            let first = ln_ratio + s * (ln_ratio + ln_eta - ln_gap);
            let ln_root = log_add_exp(first, -s * mu.ln());
            ln_eta = (p - 1.0) * ln_root;
            eta = ln_eta.exp();
        } else {
            let gap = x.powf(p) - eta;
            let root = (lk / lam_next) * (lk * eta / lam_next / gap).powf(s) + mu.powf(-s);
            eta = root.powf(p - 1.0);
            ln_eta = eta.ln();
        }
    }
    Ok(tr)
}

/// Compares `eta_k^{1/(p-1)}` against the barrier `(b+c) x_k - c`.
///
/// For `mu` above the critical value `(1-L/p)^{-p}` the comparison is strict;
/// at the critical value the base case is an equality, recorded in
/// `boundary_touch` rather than as a violation.
pub fn barrier_check(trace: &RecurrenceTrace, p: f64, l: f64) -> Result<RecurrenceTrace> {
    if trace.kind != TraceKind::Eta {
        return Err(invalid("trace", "barrier_check needs an eta trace"));
    }
    check_p_l(p, l)?;
    let mu = trace
        .param("mu")
        .ok_or_else(|| invalid("trace", "eta trace is missing mu"))?;
    let (b, c) = barrier_constants(p, l);
    let critical = (1.0 - l / p).powf(-p);
    let strict = mu - critical > 1e-12 * critical;
    let mut out = trace.clone();
    out.params.insert("L".into(), l);
    out.params.insert("b".into(), b);
    out.params.insert("c".into(), c);
    out.barrier.clear();
    out.first_violation = None;
    out.boundary_touch = None;
    for (i, (&ln_eta, &x)) in trace.log_values.iter().zip(&trace.ratios).enumerate() {
        let bar = (b + c) * x - c;
        let v = (ln_eta / (p - 1.0)).exp();
        out.barrier.push(bar);
        let close = (v - bar).abs() <= 1e-12 * bar.abs().max(1.0);
        if close && !strict && out.boundary_touch.is_none() {
            out.boundary_touch = Some(i + 1);
        }
        let violated = if strict { v >= bar } else { v > bar && !close };
        if violated && out.first_violation.is_none() {
            out.first_violation = Some(i + 1);
        }
    }
    Ok(out)
}

/// The `q`-exponent sequence: `mu_1 = ((p-L)/p)^q`,
/// `mu_{n+1} = ((p-L)/p)^q + (Lambda_n/lambda_{n+1})^q / (x_n^p mu_n^{-(p-1)} - 1)^{q-1}`,
/// with `q = p/(p-1)`. Checked against the escape ceiling `mu_n < x_n^q`
/// (`escaped_at`) and the barrier `mu_n <= (b+c) x_n - c` (`first_violation`).
pub fn mu_trace_q(w: &WeightSequence, p: f64, l: f64, n: usize) -> Result<RecurrenceTrace> {
    check_p_l(p, l)?;
    if n == 0 {
        return Err(invalid("N", "N must be >= 1"));
    }
    w.require_positive(n)?;
    let q = p / (p - 1.0);
    let base = ((p - l) / p).powf(q);
    let (b, c) = barrier_constants(p, l);
    let mut tr = RecurrenceTrace::new(TraceKind::MuQ);
    tr.params.insert("p".into(), p);
    tr.params.insert("L".into(), l);
    tr.params.insert("q".into(), q);
    tr.params.insert("b".into(), b);
    tr.params.insert("c".into(), c);

    let mut mu = base;
    for k in 1..=n {
        let x = w.prefix(k) / w.lambda(k);
        let bar = (b + c) * x - c;
        tr.values.push(mu);
        tr.log_values.push(mu.ln());
        tr.ratios.push(x);
        tr.barrier.push(bar);
        if tr.first_violation.is_none() && mu > bar * (1.0 + 1e-12) {
            tr.first_violation = Some(k);
        }
        let t = p * x.ln() - (p - 1.0) * mu.ln();
        if t <= 0.0 {
            tr.escaped_at = Some(k);
            break;
        }
        if k == n {
            break;
        }
        let d = t.exp_m1();
        let ln_term = q * (w.prefix(k) / w.lambda(k + 1)).ln() - (q - 1.0) * d.ln();
        mu = base + ln_term.exp();
    }
    Ok(tr)
}

/// Kaluza–Szegő weights for the Cesàro matrix: `w_1 = 1`,
/// `w_1 + ... + w_n = ((n - 1/p)/(1 - 1/p)) w_n`, i.e. `w_{n+1} = (1 - 1/(pn)) w_n`.
///
/// `margins[n-1]` is the slack of
/// `(w_1+...+w_n)^{p-1} <= q^p n^p (w_n^{p-1} - w_{n+1}^{p-1})`.
pub fn ks_classical_weights(p: f64, n: usize) -> Result<RecurrenceTrace> {
    if !(p > 1.0 && p.is_finite()) {
        return Err(invalid("p", format!("need p > 1, got {p}")));
    }
    if n == 0 {
        return Err(invalid("N", "N must be >= 1"));
    }
    let q = p / (p - 1.0);
    let u = q.powf(p);
    let mut tr = RecurrenceTrace::new(TraceKind::KsClassical);
    tr.params.insert("p".into(), p);
    tr.params.insert("U".into(), u);

    let mut wn = 1.0f64;
    for k in 1..=n {
        let kf = k as f64;
        tr.values.push(wn);
        tr.log_values.push(wn.ln());
        tr.ratios.push(kf);
        let partial = (kf - 1.0 / p) / (1.0 - 1.0 / p);
        // 1 - (w_{k+1}/w_k)^{p-1}
        let drop = -((p - 1.0) * (-1.0 / (p * kf)).ln_1p()).exp_m1();
        let scaled = u * kf.powf(p) * drop - partial.powf(p - 1.0);
        tr.margins.push(wn.powf(p - 1.0) * scaled);
        wn *= 1.0 - 1.0 / (p * kf);
    }
    tr.first_violation = tr.first_negative_margin();
    Ok(tr)
}

/// `a_1 = 1`, `a_{n+1} = (1 + beta - beta lambda_n/Lambda_n) a_n / (1 + beta)`,
/// `beta = L/(p-L)`, checked against
/// `U (a_k^{p-1}/lambda_k - a_{k+1}^{p-1}/lambda_{k+1}) >= A_k^{p-1}/Lambda_k` (k < N) and
/// `U a_N^{p-1}/lambda_N >= A_N^{p-1}/Lambda_N`, `U = (p/(p-L))^p`.
///
/// `A_k` is recomputed from the sequence itself. The reduced one-variable form
/// `U (1+beta)^{1-p} (x (1 - beta/((1+beta)x))^{1-p} - (y - 1)) - 1` is kept in
/// `side_margins["reduced"]`.
pub fn gao_sequence(w: &WeightSequence, p: f64, l: f64, n: usize) -> Result<RecurrenceTrace> {
    check_p_l(p, l)?;
    if n == 0 {
        return Err(invalid("N", "N must be >= 1"));
    }
    w.require_positive(n)?;
    let beta = l / (p - l);
    let u = (p / (p - l)).powf(p);
    let mut tr = RecurrenceTrace::new(TraceKind::Beta);
    tr.params.insert("p".into(), p);
    tr.params.insert("L".into(), l);
    tr.params.insert("beta".into(), beta);
    tr.params.insert("U".into(), u);

    let mut a = Vec::with_capacity(n);
    let mut cur = 1.0f64;
    for k in 1..=n {
        a.push(cur);
        tr.ratios.push(w.prefix(k) / w.lambda(k));
        let big = (1.0 + beta) * w.prefix(k);
        cur = (big - beta * w.lambda(k)) * cur / big;
    }
    let means = apply_forward(w, &a)?;
    for k in 1..=n {
        let lhs_scale = u * a[k - 1].powf(p - 1.0) / w.lambda(k);
        let next = if k < n {
            u * a[k].powf(p - 1.0) / w.lambda(k + 1)
        } else {
            0.0
        };
        let rhs = means[k - 1].powf(p - 1.0) / w.prefix(k);
        tr.margins.push(lhs_scale - next - rhs);
    }
    let reduced: Vec<f64> = (1..n)
        .map(|k| {
            let x = tr.ratios[k - 1];
            let y = tr.ratios[k];
            let inner = x * (1.0 - beta / ((1.0 + beta) * x)).powf(1.0 - p) - (y - 1.0);
            u * (1.0 + beta).powf(1.0 - p) * inner - 1.0
        })
        .collect();
    tr.side_margins.insert("reduced".into(), reduced);
    tr.log_values = a.iter().map(|v| v.ln()).collect();
    tr.values = a;
    tr.first_violation = tr.first_negative_margin();
    Ok(tr)
}

/// `w_1 = 1`, `w_1 + ... + w_n = ((1+beta) x_n - beta) w_n`, `beta = (2p-L)/(L-p)`,
/// for `0 < p < 1`. Needs `N+1` weights.
///
/// `margins[n-1]` is the relative slack `RHS/LHS - 1` of
/// `(w_1+...+w_n)^{-1/(1-p)} lambda_n^{-p/(1-p)} <= ((L-p)/p)^{p/(1-p)} (g_n - g_{n+1})`,
/// `g_n = w_n^{-1/(1-p)} Lambda_n^{-p/(1-p)}`. `side_margins["decreasing"]` holds
/// `ln g_n - ln g_{n+1}` (positive while `g` decreases).
pub fn reversed_w_sequence(
    w: &WeightSequence,
    p: f64,
    l: f64,
    n: usize,
) -> Result<RecurrenceTrace> {
    if !(p > 0.0 && p < 1.0) {
        return Err(invalid("p", format!("need 0 < p < 1, got {p}")));
    }
    if !(l > p) {
        return Err(invalid("L", format!("need L > p, got L={l}, p={p}")));
    }
    if n == 0 {
        return Err(invalid("N", "N must be >= 1"));
    }
    w.require_positive(n + 1)?;
    let beta = (2.0 * p - l) / (l - p);
    let e = 1.0 / (1.0 - p);
    let ln_k = (p * e) * ((l - p) / p).ln();
    let mut tr = RecurrenceTrace::new(TraceKind::ReversedW);
    tr.params.insert("p".into(), p);
    tr.params.insert("L".into(), l);
    tr.params.insert("beta".into(), beta);

    // ln w_1 .. ln w_{N+1}
    let mut ln_w = Vec::with_capacity(n + 1);
    ln_w.push(0.0f64);
    for k in 1..=n {
        let x = w.prefix(k) / w.lambda(k);
        let factor = (1.0 + beta) * x - beta;
        if !(factor > 0.0) {
            return Err(invalid(
                "L",
                format!("(1+beta) x_{k} - beta = {factor} is not positive"),
            ));
        }
        let step = factor * w.lambda(k + 1) / ((1.0 + beta) * w.prefix(k));
        ln_w.push(ln_w[k - 1] + step.ln());
    }
    let ln_g = |k: usize| -e * ln_w[k - 1] - p * e * w.prefix(k).ln();
    let mut decreasing = Vec::with_capacity(n);
    for k in 1..=n {
        let x = w.prefix(k) / w.lambda(k);
        let ln_s = ln_w[k - 1] + ((1.0 + beta) * x - beta).ln();
        let ln_lhs = -e * ln_s - p * e * w.lambda(k).ln();
        let delta = ln_g(k + 1) - ln_g(k);
        decreasing.push(-delta);
        let margin = if delta < 0.0 {
            let ln_rhs = ln_k + ln_g(k) + (-delta.exp_m1()).ln();
            (ln_rhs - ln_lhs).exp_m1()
        } else {
            -1.0
        };
        tr.values.push(ln_w[k - 1].exp());
        tr.log_values.push(ln_w[k - 1]);
        tr.ratios.push(x);
        tr.margins.push(margin);
    }
    tr.side_margins.insert("decreasing".into(), decreasing);
    tr.first_violation = tr.first_negative_margin();
    Ok(tr)
}

/// Outcome of running the `eta` recurrence for a trial `mu` up to `N`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub(crate) enum EtaClass {
    /// `mu` is below the truncated optimum (escape or `eta_N > x_N^p`).
    TooSmall,
    /// `eta_N(mu) < x_N^p` with no escape on the way.
    TooLarge,
}

/// `eta` recurrence in the overflow-free form `m_k = eta_k^{1/(p-1)}` carried
/// as `ln m_k`:
/// `m_{k+1} = (Lambda_k/lambda_{k+1})^q / ((x_k^q/m_k)^{p-1} - 1)^{1/(p-1)} + mu^{-1/(p-1)}`.
pub(crate) fn eta_log_sequence(
    w: &WeightSequence,
    p: f64,
    mu: f64,
    n: usize,
) -> (EtaClass, Vec<f64>) {
    let s = 1.0 / (p - 1.0);
    let q = p / (p - 1.0);
    let ln_floor = -s * mu.ln();
    let mut ln_m = ln_floor;
    let mut out = Vec::with_capacity(n);
    for k in 1..=n {
        out.push(ln_m);
        let ln_x = (w.prefix(k) / w.lambda(k)).ln();
        let t = p * ln_x - (p - 1.0) * ln_m;
        if k == n {
            return (
                if t <= 0.0 {
                    EtaClass::TooSmall
                } else {
                    EtaClass::TooLarge
                },
                out,
            );
        }
        if t <= 0.0 {
            return (EtaClass::TooSmall, out);
        }
        let term = q * (w.prefix(k) / w.lambda(k + 1)).ln() - s * t.exp_m1().ln();
        ln_m = log_add_exp(term, ln_floor);
    }
    unreachable!("loop returns at k == n")
}

#[cfg(test)]
mod tests {
    use super::*;

    fn close(a: f64, b: f64, tol: f64) -> bool {
        (a - b).abs() <= tol * b.abs().max(1.0)
    }

    #[test]
    fn eta_starts_at_inverse_mu() {
        let w = WeightSequence::power(0.3, 5).unwrap();
        for mu in [1.5, 4.0, 17.0] {
            let t = eta_trace(&w, 2.5, mu, 5).unwrap();
            assert_eq!(t.values[0], 1.0 / mu);
        }
    }

    #[test]
    fn eta_hand_values_cesaro() {
        let w = WeightSequence::constant(3);
        let t = eta_trace(&w, 2.0, 4.0, 2).unwrap();
        assert!(close(t.values[1], 7.0 / 12.0, 1e-15));
        assert_eq!(t.escaped_at, None);

        let t = eta_trace(&w, 2.0, 1.2, 3).unwrap();
        assert_eq!(t.escaped_at, Some(2));
        assert!(close(t.values[1], 5.0 + 1.0 / 1.2, 1e-13));
        assert!(t.values[1] > 4.0);
    }

    #[test]
    fn eta_escape_at_exact_boundary() {
        // mu = 1: eta_1 = 1 = x_1^p
        let w = WeightSequence::constant(4);
        let t = eta_trace(&w, 2.0, 1.0, 4).unwrap();
        assert_eq!(t.escaped_at, Some(1));
        assert_eq!(t.values.len(), 1);
    }

    #[test]
    fn eta_log_and_raw_paths_agree() {
        let w = WeightSequence::power(0.7, 60).unwrap();
        for &(p, mu) in &[(2.0, 9.0), (3.0, 20.0), (1.5, 30.0)] {
            let raw = eta_trace_impl(&w, p, mu, 60, false).unwrap();
            let log = eta_trace_impl(&w, p, mu, 60, true).unwrap();
            assert_eq!(raw.escaped_at, log.escaped_at);
            for (a, b) in raw.values.iter().zip(&log.values) {
                assert!(close(*a, *b, 1e-11), "{a} vs {b}");
            }
        }
    }

    #[test]
    fn barrier_examples() {
        let w = WeightSequence::constant(1000);
        let t = eta_trace(&w, 2.0, 4.0, 2).unwrap();
        let b = barrier_check(&t, 2.0, 1.0).unwrap();
        assert!(close(b.barrier[0], 0.25, 1e-15));
        assert!(close(b.values[0], 0.25, 1e-15));
        assert_eq!(b.boundary_touch, Some(1));
        assert_eq!(b.first_violation, None);
        assert!(close(b.barrier[1], 0.75, 1e-15));
        assert!(b.values[1] < b.barrier[1]);

        let t = eta_trace(&w, 2.0, 4.5, 1000).unwrap();
        let b = barrier_check(&t, 2.0, 1.0).unwrap();
        assert_eq!(b.first_violation, None);
        assert_eq!(b.escaped_at, None);
        assert_eq!(b.boundary_touch, None);
        let slack: Vec<f64> = b
            .barrier
            .iter()
            .zip(&b.values)
            .map(|(bar, v)| bar - v)
            .collect();
        assert!(slack.iter().all(|s| *s > 0.0));
        assert!(slack[999] > slack[9]);

        // below the critical mu the strict barrier must break
        let t = eta_trace(&w, 2.0, 3.5, 1000).unwrap();
        let b = barrier_check(&t, 2.0, 1.0).unwrap();
        assert_eq!(b.first_violation, Some(1));

        let m = mu_trace_q(&w, 2.0, 1.0, 3).unwrap();
        assert!(barrier_check(&m, 2.0, 1.0).is_err());
    }

    #[test]
    fn mu_q_hand_values() {
        let w = WeightSequence::constant(1000);
        let t = mu_trace_q(&w, 2.0, 1.0, 1000).unwrap();
        assert!(close(t.values[0], 0.25, 1e-15));
        assert!(close(t.values[1], 7.0 / 12.0, 1e-15));
        assert_eq!(t.escaped_at, None);
        assert_eq!(t.first_violation, None);
        for (k, v) in t.values.iter().enumerate() {
            let n = (k + 1) as f64;
            assert!(*v < n * n);
        }
    }

    #[test]
    fn mu_q_identifies_with_eta() {
        let w = WeightSequence::power(0.4, 100).unwrap();
        for &(p, l) in &[(2.0f64, 1.0f64), (3.0, 1.5), (1.5, 0.4)] {
            let mu = (p / (p - l)).powf(p);
            let eta = eta_trace(&w, p, mu, 100).unwrap();
            let m = mu_trace_q(&w, p, l, 100).unwrap();
            assert_eq!(eta.values.len(), m.values.len());
            for (e, v) in eta.values.iter().zip(&m.values) {
                assert!(close(e.powf(1.0 / (p - 1.0)), *v, 1e-10));
            }
        }
    }

    #[test]
    fn ks_weights_p2() {
        let t = ks_classical_weights(2.0, 6).unwrap();
        assert_eq!(&t.values[..4], &[1.0, 0.5, 0.375, 0.3125]);
        assert!(close(t.margins[0], 1.0, 1e-14));
        assert_eq!(t.first_violation, None);
    }

    #[test]
    fn beta_sequence_matches_ks_for_cesaro() {
        let w = WeightSequence::constant(50);
        let g = gao_sequence(&w, 2.0, 1.0, 50).unwrap();
        assert_eq!(&g.values[..4], &[1.0, 0.5, 0.375, 0.3125]);
        let ks = ks_classical_weights(2.0, 50).unwrap();
        for (a, b) in g.values.iter().zip(&ks.values) {
            assert!(close(*a, *b, 1e-14));
        }
        assert_eq!(g.first_violation, None);
        // reduced form for Cesàro p=2 L=1 is 2x/(2x-1) - 1 = 1/(2n-1)
        for (k, r) in g.side_margins["reduced"].iter().enumerate() {
            let n = (k + 1) as f64;
            assert!(close(*r, 1.0 / (2.0 * n - 1.0), 1e-12));
        }
    }

    #[test]
    fn beta_sequence_terminal_at_one_is_u_minus_one() {
        for w in [
            WeightSequence::constant(1),
            WeightSequence::power(2.0, 1).unwrap(),
            WeightSequence::explicit(vec![3.5]).unwrap(),
        ] {
            let g = gao_sequence(&w, 3.0, 1.0, 1).unwrap();
            let u: f64 = 1.5f64.powi(3);
            assert!(close(g.margins[0], (u - 1.0) / w.lambda(1), 1e-14));
        }
    }

    #[test]
    fn parameter_checks() {
        let w = WeightSequence::constant(5);
        assert!(mu_trace_q(&w, 2.0, 2.0, 5).is_err());
        assert!(mu_trace_q(&w, 1.0, 0.5, 5).is_err());
        assert!(gao_sequence(&w, 2.0, 0.0, 5).is_err());
        assert!(eta_trace(&w, 2.0, -1.0, 5).is_err());
        assert!(ks_classical_weights(0.5, 5).is_err());
        assert!(reversed_w_sequence(&w, 0.25, 0.2, 3).is_err());
        assert!(reversed_w_sequence(&w, 0.25, 2.0, 5).is_err());
    }
}
