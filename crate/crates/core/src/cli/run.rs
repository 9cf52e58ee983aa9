//! Command dispatch: turns a [`RunConfig`] into a [`Report`].

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::carleman::{bound_comparison, OptimizeOptions};
use crate::cli::config::{Command, LChoice, RunConfig};
use crate::cli::report::{Cell, Report};
use crate::conditions::{
    bennett_e, carleman_m, cartlidge_l, cor14_condition, ls_counterexample,
    reversed_condition_check, thm13_condition, thm61_checks, ConditionKind, ConditionReport,
};
use crate::error::Result;
use crate::norms::{estimate, NormEstimate};
use crate::weights::{WeightSequence, WeightSpec};
use crate::wirtinger::{lossers_bounds_check, redheffer_mu, tridiag_spectrum, Sign};

/// Numeric spectrum cross-check is quadratic in `N`; above this it is skipped.
const SPECTRUM_CHECK_MAX_N: usize = 2000;

pub fn run(cfg: &RunConfig) -> Report {
    match cfg.command {
        Command::Norm => run_norm(cfg),
        Command::Conditions => run_conditions(cfg),
        Command::Certify => run_certify(cfg),
        Command::Carleman => run_carleman(cfg),
        Command::Wirtinger => run_wirtinger(cfg),
        Command::Sweep => run_sweep(cfg),
        Command::Counterexample => run_counterexample(cfg),
    }
}

/// One grid point: weights (possibly replaced by `power:alpha`) and an exponent.
#[derive(Debug, Clone)]
struct GridPoint {
    spec: WeightSpec,
    alpha: Option<f64>,
    p: f64,
}

fn grid(cfg: &RunConfig) -> Vec<GridPoint> {
    let alphas: Vec<Option<f64>> = if cfg.alpha.is_empty() {
        vec![None]
    } else {
        cfg.alpha.iter().copied().map(Some).collect()
    };
    let mut out = Vec::new();
    for a in alphas {
        for &p in &cfg.p_grid() {
            out.push(GridPoint {
                spec: a.map_or_else(|| cfg.weights.clone(), WeightSpec::Power),
                alpha: a,
                p,
            });
        }
    }
    out
}

/// `L = 1` for constant weights, `1/(1+alpha)` for `n^alpha`, otherwise the
/// prefix sup of the ratio increments.
fn resolve_l(cfg: &RunConfig, spec: &WeightSpec, w: &WeightSequence, n: usize) -> Result<f64> {
    Ok(match (cfg.l, spec) {
        (LChoice::Value(v), _) => v,
        (LChoice::Auto, WeightSpec::Constant) => 1.0,
        (LChoice::Auto, WeightSpec::Power(a)) => 1.0 / (1.0 + a),
        (LChoice::Auto, _) => cartlidge_l(w, n, None)?.sup_value.expect("n >= 1"),
    })
}

struct Evaluated {
    cell: GridPoint,
    l: Option<f64>,
    report: Result<ConditionReport>,
}

fn eval_condition(cfg: &RunConfig, kind: ConditionKind, cell: GridPoint) -> Evaluated {
    let n = cfg.n;
    if kind == ConditionKind::Thm61 {
        let alpha = cell
            .alpha
            .or(cell.spec.power_exponent())
            .unwrap_or(f64::NAN);
        return Evaluated {
            l: Some(1.0 / (1.0 + alpha)),
            report: thm61_checks(alpha, cell.p, n),
            cell,
        };
    }
    let w = match WeightSequence::new(&cell.spec, n + 1) {
        Ok(w) => w,
        Err(e) => {
            return Evaluated {
                cell,
                l: None,
                report: Err(e),
            }
        }
    };
    let needs_l = matches!(
        kind,
        ConditionKind::Thm13 | ConditionKind::Cor14 | ConditionKind::ReversedLs
    );
    let l = if needs_l {
        match resolve_l(cfg, &cell.spec, &w, n) {
            Ok(l) => Some(l),
            Err(e) => {
                return Evaluated {
                    cell,
                    l: None,
                    report: Err(e),
                }
            }
        }
    } else {
        None
    };
    let p = cell.p;
    let report = match kind {
        ConditionKind::Cartlidge => cartlidge_l(&w, n, Some(p)),
        ConditionKind::Thm13 => thm13_condition(&w, p, l.unwrap(), n),
        ConditionKind::Cor14 => cor14_condition(&w, p, l.unwrap(), n),
        ConditionKind::CarlemanM => carleman_m(&w, n, None),
        ConditionKind::BennettE => bennett_e(&w, n, None),
        ConditionKind::ReversedLs => reversed_condition_check(&w, p, l.unwrap(), n),
        ConditionKind::Thm61 => unreachable!("handled above"),
    };
    Evaluated { cell, l, report }
}

fn spec_label(cell: &GridPoint) -> String {
    cell.spec.to_string()
}

fn run_conditions(cfg: &RunConfig) -> Report {
    let kind = cfg.condition_or(ConditionKind::Thm13);
    let mut rep = Report::new(
        "conditions",
        &[
            "condition",
            "weights",
            "p",
            "L",
            "N",
            "n",
            "value",
            "margin",
            "holds",
        ],
    );
    for cell in grid(cfg) {
        let ev = eval_condition(cfg, kind, cell);
        let label = spec_label(&ev.cell);
        match ev.report {
            Err(e) => rep.fail(format!("{kind} {label} p={}: {e}", ev.cell.p)),
            Ok(r) => {
                for (i, v) in r.values.iter().enumerate() {
                    let m = r.margins.get(i).copied();
                    rep.push(vec![
                        kind.as_str().into(),
                        label.clone().into(),
                        ev.cell.p.into(),
                        ev.l.into(),
                        r.n_checked.into(),
                        (i + 1).into(),
                        (*v).into(),
                        m.into(),
                        m.map(|m| m >= 0.0).into(),
                    ]);
                }
                describe(&mut rep, &r, &label, ev.cell.p);
            }
        }
    }
    rep
}

fn describe(rep: &mut Report, r: &ConditionReport, label: &str, p: f64) {
    let head = format!("{} {label} p={p}", r.condition);
    if let Some(s) = r.sup_value {
        rep.info(format!("{head}: prefix sup {s}"));
    }
    for (k, v) in &r.aux {
        rep.info(format!("{head}: {k} = {v}"));
    }
    for (k, series) in &r.side_margins {
        if let Some(m) = series.iter().copied().reduce(f64::min) {
            rep.info(format!("{head}: side series {k} min margin {m}"));
        }
    }
    if !r.tail_note.is_empty() {
        rep.info(format!("{head}: {}", r.tail_note));
    }
    if r.verdict.holds() {
        rep.info(format!("{head}: holds on n <= {}", r.n_checked));
    } else {
        rep.fail(format!("{head}: {}", r.verdict));
    }
}

fn run_sweep(cfg: &RunConfig) -> Report {
    let kind = cfg.condition_or(ConditionKind::Cor14);
    let mut rep = Report::new(
        "sweep",
        &[
            "condition",
            "weights",
            "p",
            "L",
            "N",
            "min_margin",
            "first_violation",
            "sup_value",
            "verdict",
        ],
    );
    let results: Vec<Evaluated> = grid(cfg)
        .into_par_iter()
        .map(|cell| eval_condition(cfg, kind, cell))
        .collect();
    for ev in results {
        let label = spec_label(&ev.cell);
        match ev.report {
            Err(e) => {
                rep.push(vec![
                    kind.as_str().into(),
                    label.clone().into(),
                    ev.cell.p.into(),
                    ev.l.into(),
                    cfg.n.into(),
                    Cell::Empty,
                    Cell::Empty,
                    Cell::Empty,
                    "error".into(),
                ]);
                rep.fail(format!("{kind} {label} p={}: {e}", ev.cell.p));
            }
            Ok(r) => {
                let first = match &r.verdict {
                    crate::conditions::Verdict::ViolatedAt { n, .. } => Some(*n),
                    _ => None,
                };
                rep.push(vec![
                    kind.as_str().into(),
                    label.clone().into(),
                    ev.cell.p.into(),
                    ev.l.into(),
                    r.n_checked.into(),
                    r.min_margin().into(),
                    first.into(),
                    r.sup_value.into(),
                    r.verdict.to_string().into(),
                ]);
                if !r.verdict.holds() {
                    rep.fail(format!("{kind} {label} p={}: {}", ev.cell.p, r.verdict));
                }
            }
        }
    }
    if rep.ok() {
        rep.info(format!(
            "all {} cells hold on n <= {}",
            rep.rows.len(),
            cfg.n
        ));
    }
    rep
}

fn norm_for(cfg: &RunConfig, w: &WeightSequence, p: f64) -> Result<NormEstimate> {
    estimate(w, p, cfg.n, cfg.method.resolve(p), cfg.tol)
}

fn run_norm(cfg: &RunConfig) -> Report {
    let mut rep = Report::new(
        "norm",
        &[
            "weights",
            "method",
            "p",
            "N",
            "norm",
            "residual",
            "iterations",
            "converged",
        ],
    );
    let w = match WeightSequence::new(&cfg.weights, cfg.n) {
        Ok(w) => w,
        Err(e) => {
            rep.fail(e.to_string());
            return rep;
        }
    };
    for p in cfg.p_grid() {
        match norm_for(cfg, &w, p) {
            Ok(e) => {
                rep.push(vec![
                    cfg.weights.to_string().into(),
                    e.method.as_str().into(),
                    p.into(),
                    e.n.into(),
                    e.norm.into(),
                    e.residual.into(),
                    e.iterations.into(),
                    e.converged.into(),
                ]);
                if !e.converged {
                    rep.fail(format!("p={p}: {} did not converge", e.method.as_str()));
                }
            }
            Err(err) => rep.fail(format!("p={p}: {err}")),
        }
    }
    rep
}

fn run_certify(cfg: &RunConfig) -> Report {
    let kind = cfg.condition_or(ConditionKind::Thm13);
    let mut rep = Report::new(
        "certify",
        &[
            "condition",
            "weights",
            "p",
            "L",
            "N",
            "min_margin",
            "verdict",
            "method",
            "norm",
            "bound",
            "slack",
        ],
    );
    let w = match WeightSequence::new(&cfg.weights, cfg.n + 1) {
        Ok(w) => w,
        Err(e) => {
            rep.fail(e.to_string());
            return rep;
        }
    };
    let label = cfg.weights.to_string();
    for p in cfg.p_grid() {
        let step = || -> Result<(f64, ConditionReport, NormEstimate)> {
            let l = resolve_l(cfg, &cfg.weights, &w, cfg.n)?;
            let r = match kind {
                ConditionKind::Cor14 => cor14_condition(&w, p, l, cfg.n)?,
                _ => thm13_condition(&w, p, l, cfg.n)?,
            };
            let e = norm_for(cfg, &w, p)?;
            Ok((l, r, e))
        };
        match step() {
            Err(e) => rep.fail(format!("p={p}: {e}")),
            Ok((l, r, e)) => {
                let bound = p / (p - l);
                let slack = bound - e.norm;
                rep.push(vec![
                    kind.as_str().into(),
                    label.clone().into(),
                    p.into(),
                    l.into(),
                    cfg.n.into(),
                    r.min_margin().into(),
                    r.verdict.to_string().into(),
                    e.method.as_str().into(),
                    e.norm.into(),
                    bound.into(),
                    slack.into(),
                ]);
                if !r.verdict.holds() {
                    rep.fail(format!("p={p}: {kind} {}", r.verdict));
                }
                if !e.converged {
                    rep.fail(format!("p={p}: norm estimate did not converge"));
                }
                if e.norm > bound + 1e-9 {
                    rep.fail(format!("p={p}: norm {} exceeds bound {bound}", e.norm));
                } else if r.verdict.holds() {
                    rep.info(format!(
                        "p={p}: {kind} holds on n <= {}, truncated norm {} <= {bound}",
                        cfg.n, e.norm
                    ));
                }
            }
        }
    }
    rep
}

fn run_carleman(cfg: &RunConfig) -> Report {
    let mut rep = Report::new(
        "carleman",
        &[
            "weights",
            "N",
            "lower_bound_E",
            "exp_M",
            "bennett_E",
            "exp_inv_alpha1",
            "iterations",
            "best_restart",
            "stagnated",
        ],
    );
    let opts = OptimizeOptions {
        restarts: cfg.restarts,
        seed: cfg.seed,
        ..OptimizeOptions::default()
    };
    let res = WeightSequence::new(&cfg.weights, cfg.n + 1)
        .and_then(|w| bound_comparison(&w, cfg.n, opts));
    match res {
        Err(e) => rep.fail(e.to_string()),
        Ok(est) => {
            let ub = |k: &str| est.upper_bounds.get(k).copied();
            rep.push(vec![
                cfg.weights.to_string().into(),
                est.n.into(),
                est.lower_bound_e.into(),
                ub("exp_M").into(),
                ub("bennett_E").into(),
                ub("exp_inv_alpha1").into(),
                est.iterations.into(),
                est.best_restart.into(),
                est.stagnated.into(),
            ]);
            rep.info("lower_bound_E is an optimized ratio, not a certified constant");
            if est.stagnated {
                rep.info("best run stopped on step-size stagnation");
            }
        }
    }
    rep
}

fn run_wirtinger(cfg: &RunConfig) -> Report {
    let (a, b, n) = (cfg.a, cfg.b, cfg.n);
    let mut rep = Report::new(
        "wirtinger",
        &["a", "b", "N", "k", "closed_form", "numeric", "deviation"],
    );
    if n <= SPECTRUM_CHECK_MAX_N {
        match tridiag_spectrum(a, b, n) {
            Ok(s) => {
                for (k, (c, v)) in s.closed_form.iter().zip(&s.numeric).enumerate() {
                    rep.push(vec![
                        a.into(),
                        b.into(),
                        n.into(),
                        (k + 1).into(),
                        (*c).into(),
                        (*v).into(),
                        (c - v).abs().into(),
                    ]);
                }
                rep.info(format!("spectrum max deviation {}", s.max_deviation));
            }
            Err(e) => rep.fail(e.to_string()),
        }
    } else {
        rep.info(format!(
            "N > {SPECTRUM_CHECK_MAX_N}: numeric spectrum cross-check skipped"
        ));
    }
    if n >= 2 {
        for sign in [Sign::Plus, Sign::Minus] {
            match redheffer_mu(a, b, n, sign) {
                Ok(t) => {
                    let s = if sign == Sign::Plus { "+" } else { "-" };
                    if t.max_deviation <= 1e-12 {
                        rep.info(format!(
                            "telescoping ({s}) reproduces {} within {}",
                            t.constant, t.max_deviation
                        ));
                    } else {
                        rep.fail(format!(
                            "telescoping ({s}) deviates from {} by {}",
                            t.constant, t.max_deviation
                        ));
                    }
                }
                Err(e) => rep.fail(e.to_string()),
            }
        }
    }
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let (mut lo, mut hi) = (f64::INFINITY, f64::INFINITY);
    let mut bad = 0usize;
    let trials = 1000;
    for _ in 0..trials {
        let x: Vec<f64> = (0..n).map(|_| rng.gen_range(-1.0..1.0)).collect();
        let scale = (a * a + b * b) * x.iter().map(|v| v * v).sum::<f64>();
        match lossers_bounds_check(a, b, &x) {
            Ok((l, h)) => {
                let tol = -1e-12 * scale.max(1.0);
                if l < tol || h < tol {
                    bad += 1;
                }
                lo = lo.min(l / scale.max(f64::MIN_POSITIVE));
                hi = hi.min(h / scale.max(f64::MIN_POSITIVE));
            }
            Err(e) => {
                rep.fail(e.to_string());
                break;
            }
        }
    }
    rep.info(format!(
        "{trials} random vectors: min relative margins lower {lo}, upper {hi}"
    ));
    if bad > 0 {
        rep.fail(format!("{bad} random vectors violate the two-sided bound"));
    }
    rep
}

fn run_counterexample(cfg: &RunConfig) -> Report {
    let mut rep = Report::new(
        "counterexample",
        &[
            "p",
            "lhs",
            "rhs",
            "spike_fails",
            "pair_t",
            "pair_lhs",
            "pair_rhs",
            "fails",
        ],
    );
    for p in cfg.p_grid() {
        match ls_counterexample(p) {
            Err(e) => rep.fail(format!("p={p}: {e}")),
            Ok(c) => {
                let (t, pl, pr) = match c.pair {
                    Some((t, l, r)) => (Some(t), Some(l), Some(r)),
                    None => (None, None, None),
                };
                rep.push(vec![
                    p.into(),
                    c.lhs.into(),
                    c.rhs.into(),
                    c.spike_fails.into(),
                    t.into(),
                    pl.into(),
                    pr.into(),
                    c.fails.into(),
                ]);
                if c.fails {
                    if p >= 0.5 {
                        rep.expected(format!(
                            "p={p}: reversed inequality fails, as predicted for p >= 1/2"
                        ));
                    } else if p <= 1.0 / 3.0 {
                        rep.fail(format!(
                            "p={p}: violation found where the inequality is proved"
                        ));
                    } else {
                        rep.info(format!("p={p}: violation found"));
                    }
                } else if p >= 0.5 {
                    rep.fail(format!("p={p}: no violation found although one must exist"));
                } else {
                    rep.info(format!("p={p}: no violation among the tested sequences"));
                }
            }
        }
    }
    rep
}
