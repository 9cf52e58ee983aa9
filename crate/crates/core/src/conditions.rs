//! Checkable sufficient conditions on the weights, evaluated on finite prefixes.
//!
//! Every check produces per-index margins where `margin >= 0` means the
//! inequality holds at that index. A prefix check never proves anything about
//! the tail; `tail_note` says what is known about it for the parametric families.

use std::collections::BTreeMap;
use std::fmt;

use serde::Serialize;

use crate::error::{invalid, Result};
use crate::recurrences::reversed_w_sequence;
use crate::sum::NeumaierSum;
use crate::weights::{power_sum_bounds, WeightSequence, WeightSpec};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum ConditionKind {
    #[serde(rename = "cartlidge")]
    Cartlidge,
    #[serde(rename = "thm13")]
    Thm13,
    #[serde(rename = "cor14")]
    Cor14,
    #[serde(rename = "carleman_M")]
    CarlemanM,
    #[serde(rename = "bennett_E")]
    BennettE,
    #[serde(rename = "reversed_LS")]
    ReversedLs,
    #[serde(rename = "thm61")]
    Thm61,
}

impl ConditionKind {
    pub fn as_str(self) -> &'static str {
        match self {
            ConditionKind::Cartlidge => "cartlidge",
            ConditionKind::Thm13 => "thm13",
            ConditionKind::Cor14 => "cor14",
            ConditionKind::CarlemanM => "carleman_M",
            ConditionKind::BennettE => "bennett_E",
            ConditionKind::ReversedLs => "reversed_LS",
            ConditionKind::Thm61 => "thm61",
        }
    }

    pub const ALL: [ConditionKind; 7] = [
        ConditionKind::Cartlidge,
        ConditionKind::Thm13,
        ConditionKind::Cor14,
        ConditionKind::CarlemanM,
        ConditionKind::BennettE,
        ConditionKind::ReversedLs,
        ConditionKind::Thm61,
    ];
}

impl fmt::Display for ConditionKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl std::str::FromStr for ConditionKind {
    type Err = crate::Error;

    fn from_str(s: &str) -> Result<Self> {
        let t = s.trim();
        ConditionKind::ALL
            .into_iter()
            .find(|k| k.as_str().eq_ignore_ascii_case(t))
            .ok_or_else(|| {
                invalid(
                    "condition",
                    format!(
                        "unknown condition `{t}` (cartlidge, thm13, cor14, carleman_M, bennett_E, reversed_LS, thm61)"
                    ),
                )
            })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(tag = "verdict", rename_all = "kebab-case")]
pub enum Verdict {
    HoldsOnPrefix,
    /// First failing index and the name of the margin series that failed.
    ViolatedAt {
        n: usize,
        series: String,
    },
}

impl Verdict {
    pub fn holds(&self) -> bool {
        matches!(self, Verdict::HoldsOnPrefix)
    }
}

impl fmt::Display for Verdict {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Verdict::HoldsOnPrefix => f.write_str("holds-on-prefix"),
            Verdict::ViolatedAt { n, series } => write!(f, "violated-at({n}, {series})"),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ConditionReport {
    pub condition: ConditionKind,
    pub params: BTreeMap<String, f64>,
    pub n_checked: usize,
    /// Main margin series, 1-based (`margins[0]` is `n = 1`).
    pub margins: Vec<f64>,
    /// The per-index quantity the condition is about (differences, `M_n`, `E_n`, ...).
    pub values: Vec<f64>,
    pub sup_value: Option<f64>,
    pub verdict: Verdict,
    pub tail_note: String,
    pub aux: BTreeMap<String, f64>,
    pub side_margins: BTreeMap<String, Vec<f64>>,
}

impl ConditionReport {
    fn new(condition: ConditionKind, n_checked: usize) -> Self {
        Self {
            condition,
            params: BTreeMap::new(),
            n_checked,
            margins: Vec::new(),
            values: Vec::new(),
            sup_value: None,
            verdict: Verdict::HoldsOnPrefix,
            tail_note: String::new(),
            aux: BTreeMap::new(),
            side_margins: BTreeMap::new(),
        }
    }

    /// Smallest index at which the main series or any side series is negative.
    /// Ties go to the main series, then side series in name order.
    fn settle(&mut self) {
        let mut best: Option<(usize, String)> = None;
        let mut consider = |name: &str, series: &[f64]| {
            if let Some(i) = series.iter().position(|m| *m < 0.0 || m.is_nan()) {
                if best.as_ref().is_none_or(|(n, _)| i + 1 < *n) {
                    best = Some((i + 1, name.to_string()));
                }
            }
        };
        consider("main", &self.margins);
        for (name, series) in &self.side_margins {
            consider(name, series);
        }
        self.verdict = match best {
            Some((n, series)) => Verdict::ViolatedAt { n, series },
            None => Verdict::HoldsOnPrefix,
        };
    }

    pub fn min_margin(&self) -> Option<f64> {
        self.margins.iter().copied().reduce(f64::min)
    }
}

fn sup(values: &[f64]) -> Option<f64> {
    values.iter().copied().reduce(f64::max)
}

fn check_n(n: usize) -> Result<()> {
    if n == 0 {
        Err(invalid("N", "N must be >= 1"))
    } else {
        Ok(())
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

fn increments(w: &WeightSequence, n: usize) -> Result<Vec<f64>> {
    w.require_positive(n + 1)?;
    (1..=n).map(|k| w.ratio_increment(k)).collect()
}

fn family_note(w: &WeightSequence) -> String {
    match w.spec() {
        WeightSpec::Constant => "constant weights: x_{n+1} - x_n = 1 for every n".to_string(),
        WeightSpec::Power(a) if *a > -1.0 => format!(
            "power weights n^{a}: x_{{n+1}} - x_n -> 1/(1+alpha) = {}",
            1.0 / (1.0 + a)
        ),
        WeightSpec::Geometric(r) if *r > 1.0 => format!(
            "geometric weights r^n: x_n -> r/(r-1) = {}, differences -> 0",
            r / (r - 1.0)
        ),
        _ => "prefix only; nothing is claimed about the tail".to_string(),
    }
}

/// `L = sup_n (x_{n+1} - x_n)` over `n <= N`. Needs `N+1` weights.
///
/// With `p` given the margins are `p - (x_{n+1} - x_n)` and the finite-prefix
/// bound `p/(p-L)` is reported in `aux`; without `p` the margins are the raw differences.
pub fn cartlidge_l(w: &WeightSequence, n: usize, p: Option<f64>) -> Result<ConditionReport> {
    check_n(n)?;
    let d = increments(w, n)?;
    let mut r = ConditionReport::new(ConditionKind::Cartlidge, n);
    let l = sup(&d).expect("n >= 1");
    r.sup_value = Some(l);
    r.aux.insert("L".into(), l);
    match p {
        Some(p) => {
            if !(p > 1.0 && p.is_finite()) {
                return Err(invalid("p", format!("need p > 1, got {p}")));
            }
            r.params.insert("p".into(), p);
            r.margins = d.iter().map(|v| p - v).collect();
            if l < p {
                r.aux.insert("bound".into(), p / (p - l));
            }
        }
        None => r.margins = d.clone(),
    }
    r.values = d;
    r.tail_note = family_note(w);
    r.settle();
    Ok(r)
}

/// `x_{n+1} <= x_n (1 - L/(p x_n))^{1-p} + L/p`, margins
/// `x_n ((1 - L/(p x_n))^{1-p} - 1) + L/p - (x_{n+1} - x_n)`.
pub fn thm13_condition(w: &WeightSequence, p: f64, l: f64, n: usize) -> Result<ConditionReport> {
    check_p_l(p, l)?;
    check_n(n)?;
    let d = increments(w, n)?;
    let mut r = ConditionReport::new(ConditionKind::Thm13, n);
    r.params.insert("p".into(), p);
    r.params.insert("L".into(), l);
    for (k, dk) in d.iter().enumerate() {
        let x = w.prefix(k + 1) / w.lambda(k + 1);
        let t = -l / (p * x);
        if !(t > -1.0) {
            return Err(invalid(
                "L",
                format!("1 - L/(p x_{}) is not positive", k + 1),
            ));
        }
        let grow = x * ((1.0 - p) * t.ln_1p()).exp_m1();
        r.margins.push(grow + l / p - dk);
    }
    r.values = d;
    r.sup_value = sup(&r.values);
    r.aux.insert("bound".into(), p / (p - l));
    r.tail_note = family_note(w);
    r.settle();
    Ok(r)
}

/// `x_{n+1} - x_n <= L + (lambda_n / (2 Lambda_n)) (1 - 1/p) L^2`.
pub fn cor14_condition(w: &WeightSequence, p: f64, l: f64, n: usize) -> Result<ConditionReport> {
    check_p_l(p, l)?;
    check_n(n)?;
    let d = increments(w, n)?;
    let mut r = ConditionReport::new(ConditionKind::Cor14, n);
    r.params.insert("p".into(), p);
    r.params.insert("L".into(), l);
    for (k, dk) in d.iter().enumerate() {
        let inv_x = w.lambda(k + 1) / w.prefix(k + 1);
        r.margins
            .push(l + 0.5 * inv_x * (1.0 - 1.0 / p) * l * l - dk);
    }
    r.values = d;
    r.sup_value = sup(&r.values);
    r.aux.insert("bound".into(), p / (p - l));
    r.tail_note = family_note(w);
    r.settle();
    Ok(r)
}

/// `M_n = x_n ln(x_{n+1}/x_n)`, `M = sup M_n`. Needs `N+1` weights.
///
/// The ratio bound is `e^M`. With a `target` the margins are `target - M_n`;
/// otherwise there is no per-index inequality and the margins are empty.
pub fn carleman_m(w: &WeightSequence, n: usize, target: Option<f64>) -> Result<ConditionReport> {
    check_n(n)?;
    let d = increments(w, n)?;
    let mut r = ConditionReport::new(ConditionKind::CarlemanM, n);
    r.values = d
        .iter()
        .enumerate()
        .map(|(k, dk)| {
            let x = w.prefix(k + 1) / w.lambda(k + 1);
            x * (dk / x).ln_1p()
        })
        .collect();
    let m = sup(&r.values).expect("n >= 1");
    r.sup_value = Some(m);
    r.aux.insert("M".into(), m);
    r.aux.insert("exp_M".into(), m.exp());
    if let Some(t) = target {
        r.params.insert("target".into(), t);
        r.margins = r.values.iter().map(|v| t - v).collect();
    }
    r.tail_note = family_note(w);
    r.settle();
    Ok(r)
}

/// `E_n = x_{n+1} exp(-(1/Lambda_n) sum_{k<=n} lambda_k ln x_k)`. Needs `N+1` weights.
///
/// Always `E_n <= e^{M_1 v ... v M_n}`; that inequality is kept as the side
/// series `"exp_M"`. A `target` adds main margins `target - E_n`.
pub fn bennett_e(w: &WeightSequence, n: usize, target: Option<f64>) -> Result<ConditionReport> {
    check_n(n)?;
    w.require_positive(n + 1)?;
    let m = carleman_m(w, n, None)?;
    let mut r = ConditionReport::new(ConditionKind::BennettE, n);
    let mut acc = NeumaierSum::new();
    let mut running_m = f64::NEG_INFINITY;
    let mut ordering = Vec::with_capacity(n);
    for k in 1..=n {
        let x = w.prefix(k) / w.lambda(k);
        acc.add(w.lambda(k) * x.ln());
        let next = w.prefix(k + 1) / w.lambda(k + 1);
        let e = next * (-acc.value() / w.prefix(k)).exp();
        r.values.push(e);
        running_m = running_m.max(m.values[k - 1]);
        ordering.push(running_m.exp() * (1.0 + 1e-12) - e);
    }
    let e = sup(&r.values).expect("n >= 1");
    r.sup_value = Some(e);
    r.aux.insert("E".into(), e);
    r.aux.insert("exp_M".into(), m.aux["exp_M"]);
    if let Some(t) = target {
        r.params.insert("target".into(), t);
        r.margins = r.values.iter().map(|v| t - v).collect();
    }
    r.side_margins.insert("exp_M".into(), ordering);
    r.tail_note = family_note(w);
    r.settle();
    Ok(r)
}

/// For `lambda_n = n^alpha`, `0 <= alpha <= 1`, `p >= 2`, the increment
/// condition with `L = 1/(alpha+1)` is `f_n(x_n) >= 0`, `x_n = 1/Lambda_n`, where
/// `f_n(x) = 1 + n^alpha x (1/(alpha+1) + (n^alpha/2)(1-1/p) x/(alpha+1)^2) - (n/(n+1))^alpha (1 + (n+1)^alpha x)`.
///
/// Side series: `"h"` holds the single value `h(alpha) = 2^alpha (5+4alpha) - 4(1+alpha)^2`,
/// `"taylor"` is `(1+1/n)^alpha - 1 - alpha/(2n)`, and `"lambda_lower"` is the
/// relative slack of `Lambda_n >= n (n+1)^alpha / (alpha+1)`.
pub fn thm61_checks(alpha: f64, p: f64, n: usize) -> Result<ConditionReport> {
    if !(0.0..=1.0).contains(&alpha) {
        return Err(invalid(
            "alpha",
            format!("need 0 <= alpha <= 1, got {alpha}"),
        ));
    }
    if !(p >= 2.0 && p.is_finite()) {
        return Err(invalid("p", format!("need p >= 2, got {p}")));
    }
    check_n(n)?;
    let w = WeightSequence::power(alpha, n)?;
    let mut r = ConditionReport::new(ConditionKind::Thm61, n);
    r.params.insert("alpha".into(), alpha);
    r.params.insert("p".into(), p);
    let a1 = alpha + 1.0;
    let h = 2f64.powf(alpha) * (5.0 + 4.0 * alpha) - 4.0 * a1 * a1;
    r.aux.insert("h".into(), h);
    r.aux.insert("L".into(), 1.0 / a1);
    r.aux.insert("bound".into(), p / (p - 1.0 / a1));
    let mut taylor = Vec::with_capacity(n);
    let mut lower = Vec::with_capacity(n);
    for k in 1..=n {
        let kf = k as f64;
        let grow = (alpha * (1.0 / kf).ln_1p()).exp_m1();
        // u = n^alpha x_n; the x-linear terms combine to -alpha u/(alpha+1)
        let u = w.lambda(k) / w.prefix(k);
        let one_minus_r = -(-alpha * (1.0 / kf).ln_1p()).exp_m1();
        let f = one_minus_r - alpha * u / a1 + (1.0 - 1.0 / p) * u * u / (2.0 * a1 * a1);
        r.values.push(1.0 / w.prefix(k));
        r.margins.push(f);
        taylor.push(grow - alpha / (2.0 * kf));
        let bounds = power_sum_bounds(k, alpha)?;
        // equality at n = 1 for alpha in {0, 1}; allow a few ulps
        lower.push(w.prefix(k) / bounds.lower - 1.0 + 4.0 * f64::EPSILON);
    }
    r.side_margins.insert("h".into(), vec![h]);
    r.side_margins.insert("taylor".into(), taylor);
    r.side_margins.insert("lambda_lower".into(), lower);
    r.sup_value = sup(&r.values);
    r.tail_note = format!(
        "power weights n^{alpha}: increments tend to L = 1/(1+alpha) = {}",
        1.0 / a1
    );
    r.settle();
    Ok(r)
}

/// The failure of the reversed inequality for `p > 1/2`, with the pair that
/// exhibits it.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct LsCounterexample {
    pub p: f64,
    /// Left side at `a = (1, 0, 0, ...)`: always 1.
    pub lhs: f64,
    /// Right side at `a = (1, 0, 0, ...)`: `(p/(1-p))^p`.
    pub rhs: f64,
    /// The single-spike sequence already violates the inequality.
    pub spike_fails: bool,
    /// Worst two-term sequence `(1, t)` on a log grid as `(t, lhs, rhs)`, kept
    /// only when it violates the inequality.
    pub pair: Option<(f64, f64, f64)>,
    pub fails: bool,
}

/// Tests `sum_n ((1/n) sum_{k>=n} a_k)^p >= (p/(1-p))^p sum_n a_n^p` against
/// `a = (1, 0, ...)` and the two-term sequences `(1, t, 0, ...)`, `0 < p < 1`.
pub fn ls_counterexample(p: f64) -> Result<LsCounterexample> {
    if !(p > 0.0 && p < 1.0) {
        return Err(invalid("p", format!("need 0 < p < 1, got {p}")));
    }
    let c = (p / (1.0 - p)).powf(p);
    let spike_fails = 1.0 < c;
    // a = (1, t, 0, ...): tail means are 1 + t and t/2, then zero
    let mut best: Option<(f64, f64, f64)> = None;
    let steps = 4000;
    for i in 0..=steps {
        let t = 10f64.powf(-8.0 + 12.0 * i as f64 / steps as f64);
        let lhs = (1.0 + t).powf(p) + (0.5 * t).powf(p);
        let rhs = c * (1.0 + t.powf(p));
        if best.is_none_or(|(_, l, r)| rhs / lhs > r / l) {
            best = Some((t, lhs, rhs));
        }
    }
    let pair_fails = best.is_some_and(|(_, l, r)| r > l * (1.0 + 1e-12));
    Ok(LsCounterexample {
        p,
        lhs: 1.0,
        rhs: c,
        spike_fails,
        pair: best.filter(|_| pair_fails),
        fails: spike_fails || pair_fails,
    })
}

/// Reversed inequality, `0 < p <= 1/3`: requires `x_{n+1} <= x_n + L` on the
/// prefix, `L >= 1`, `L > p`, and checks the sufficient per-index inequality
/// along the `w`-sequence with relative margins. Needs `N+1` weights.
pub fn reversed_condition_check(
    w: &WeightSequence,
    p: f64,
    l: f64,
    n: usize,
) -> Result<ConditionReport> {
    if !(p > 0.0 && p <= 1.0 / 3.0) {
        return Err(invalid("p", format!("need 0 < p <= 1/3, got {p}")));
    }
    if !(l >= 1.0 && l > p) {
        return Err(invalid("L", format!("need L >= 1 and L > p, got {l}")));
    }
    check_n(n)?;
    let d = increments(w, n)?;
    if let Some(k) = d.iter().position(|v| *v > l * (1.0 + 1e-12)) {
        return Err(invalid(
            "L",
            format!(
                "x_{{n+1}} - x_n = {} exceeds L = {l} at n = {}",
                d[k],
                k + 1
            ),
        ));
    }
    let tr = reversed_w_sequence(w, p, l, n)?;
    let mut r = ConditionReport::new(ConditionKind::ReversedLs, n);
    r.params.insert("p".into(), p);
    r.params.insert("L".into(), l);
    r.params.insert("beta".into(), tr.params["beta"]);
    r.margins = tr.margins.clone();
    r.values = tr.values.clone();
    r.sup_value = sup(&d);
    r.side_margins = tr.side_margins.clone();
    r.aux.insert("U".into(), (p / (l - p)).powf(p));
    r.aux.insert("U_root".into(), p / (l - p));
    match w.spec() {
        WeightSpec::Power(alpha) if *alpha > -1.0 && *alpha <= 0.0 => {
            let a = *alpha;
            let decay = -(1.0 - (2.0 + a) * p + p * p * (1.0 + a)) / (p * (1.0 - p));
            r.aux.insert("decay_exponent".into(), decay);
            r.tail_note = if decay < 0.0 {
                format!("power weights n^{a}: w_n^(-1/(1-p)) Lambda_n^(-p/(1-p)) = O(n^{decay}), decreasing to 0")
            } else {
                format!("power weights n^{a}: decay exponent {decay} is not negative; the tail requirement fails")
            };
        }
        _ => r.tail_note = family_note(w),
    }
    r.settle();
    Ok(r)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn cesaro_cartlidge_is_one() {
        let w = WeightSequence::constant(101);
        let r = cartlidge_l(&w, 100, Some(2.0)).unwrap();
        assert_eq!(r.sup_value, Some(1.0));
        assert!(r.values.iter().all(|d| *d == 1.0));
        assert_eq!(r.aux["bound"], 2.0);
        assert!(r.verdict.holds());
    }

    #[test]
    fn cartlidge_power_half() {
        let w = WeightSequence::power(0.5, 10_001).unwrap();
        let r = cartlidge_l(&w, 10_000, None).unwrap();
        // increments decrease toward 1/(1+alpha); the sup sits at n = 1
        assert_eq!(r.sup_value, Some(r.values[0]));
        assert!((r.values[0] - 0.5f64.sqrt()).abs() < 1e-15);
        assert!((r.values[9_999] - 1.0 / 1.5).abs() < 1e-4);
        assert!(r.values.iter().all(|d| *d > 1.0 / 1.5));
    }

    #[test]
    fn growth_condition_cesaro_margins_positive() {
        let w = WeightSequence::constant(201);
        let r = thm13_condition(&w, 2.0, 1.0, 200).unwrap();
        assert!(r.verdict.holds());
        // margin is x (2x/(2x-1) - 1) + 1/2 - 1 = 1/(2(2n-1))
        for (k, m) in r.margins.iter().enumerate() {
            let n = (k + 1) as f64;
            assert!((m - 0.5 / (2.0 * n - 1.0)).abs() < 1e-13);
        }
    }

    #[test]
    fn quadratic_increment_small_p_fails_first_index() {
        let w = WeightSequence::power(0.5, 200).unwrap();
        let r = cor14_condition(&w, 1.01, 1.0 / 1.5, 100).unwrap();
        match &r.verdict {
            Verdict::ViolatedAt { n, series } => {
                assert_eq!(*n, 1);
                assert_eq!(series, "main");
            }
            v => panic!("expected violation, got {v}"),
        }
        assert!(r.margins[0] < 0.0);
    }

    #[test]
    fn m_and_e_constant() {
        let w = WeightSequence::constant(3);
        let m = carleman_m(&w, 2, None).unwrap();
        assert!((m.values[0] - 2f64.ln()).abs() < 1e-15);
        let e = bennett_e(&w, 1, None).unwrap();
        assert_eq!(e.values[0], 2.0);
        assert!(e.verdict.holds());
    }

    #[test]
    fn power_weight_grid_holds() {
        for alpha in [0.0, 0.25, 0.5, 0.75, 1.0] {
            for p in [2.0, 3.0, 10.0] {
                let r = thm61_checks(alpha, p, 2000).unwrap();
                assert!(r.verdict.holds(), "alpha={alpha} p={p}: {}", r.verdict);
                assert!(r.aux["h"] >= 0.0);
            }
        }
        assert!(thm61_checks(1.5, 2.0, 10).is_err());
        assert!(thm61_checks(0.5, 1.5, 10).is_err());
    }

    #[test]
    fn ls_examples() {
        let c = ls_counterexample(0.25).unwrap();
        assert!(!c.fails);
        assert_eq!(c.lhs, 1.0);
        assert!((c.rhs - (1f64 / 3.0).powf(0.25)).abs() < 1e-15);
        let c = ls_counterexample(0.5).unwrap();
        assert!(c.fails);
        assert!(!c.spike_fails);
        let c = ls_counterexample(0.75).unwrap();
        assert!(c.spike_fails);
        assert!(ls_counterexample(1.0).is_err());
    }

    #[test]
    fn reversed_examples() {
        let w = WeightSequence::power(-0.5, 2001).unwrap();
        let r = reversed_condition_check(&w, 0.25, 2.0, 2000).unwrap();
        assert!(r.verdict.holds(), "{}", r.verdict);
        assert!((r.aux["decay_exponent"] + 3.5).abs() < 1e-12);
        let w = WeightSequence::constant(501);
        let r = reversed_condition_check(&w, 1.0 / 3.0, 1.0, 500).unwrap();
        assert!(r.verdict.holds(), "{}", r.verdict);
        assert!(reversed_condition_check(&w, 0.4, 1.0, 500).is_err());
    }

    #[test]
    fn condition_names_roundtrip() {
        for k in ConditionKind::ALL {
            assert_eq!(k.as_str().parse::<ConditionKind>().unwrap(), k);
        }
    }
}
