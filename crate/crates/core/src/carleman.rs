//! Weighted Carleman sums `G(a) = sum_n prod_{k<=n} a_k^{lambda_k/Lambda_n}` and
//! numerical lower bounds for the best constant `E` in `G(a) <= E sum a_n`.

use std::collections::BTreeMap;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;

use crate::conditions::{bennett_e, carleman_m};
use crate::error::{invalid, Error, Result};
use crate::sum::NeumaierSum;
use crate::weights::{WeightSequence, WeightSpec};

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CarlemanEstimate {
    pub n: usize,
    /// Best ratio `G(a) / sum a` found. A lower bound for `E`, never a certificate.
    pub lower_bound_e: f64,
    /// Maximizing vector, normalized to `sum a = 1`.
    pub optimizer: Vec<f64>,
    /// `exp_M`, `bennett_E` and, for power weights, `exp_inv_alpha1 = e^{1/(alpha+1)}`.
    pub upper_bounds: BTreeMap<String, f64>,
    pub iterations: usize,
    pub restarts: usize,
    /// Index of the restart that produced the best ratio.
    pub best_restart: usize,
    /// The winning run ended because no step size improved the ratio.
    pub stagnated: bool,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OptimizeOptions {
    pub restarts: usize,
    pub seed: u64,
    pub max_iter: usize,
    /// Stop after three consecutive accepted steps with relative gain below this.
    pub tol: f64,
}

impl Default for OptimizeOptions {
    fn default() -> Self {
        Self {
            restarts: 8,
            seed: 0,
            max_iter: 20_000,
            tol: 1e-13,
        }
    }
}

/// Per-`n` geometric means, `0` once a zero entry has entered.
fn geomeans(w: &WeightSequence, a: &[f64]) -> Vec<f64> {
    let mut acc = NeumaierSum::new();
    let mut dead = false;
    a.iter()
        .enumerate()
        .map(|(i, &v)| {
            if v == 0.0 {
                dead = true;
            }
            if dead {
                return 0.0;
            }
            acc.add(w.lambda(i + 1) * v.ln());
            (acc.value() / w.prefix(i + 1)).exp()
        })
        .collect()
}

/// `sum_n prod_{k<=n} a_k^{lambda_k/Lambda_n}`, in log space.
pub fn geomean_sum(w: &WeightSequence, a: &[f64]) -> Result<f64> {
    if a.is_empty() {
        return Err(invalid("a", "empty vector"));
    }
    w.require_positive(a.len())?;
    if let Some((i, v)) = a.iter().enumerate().find(|(_, v)| !(**v >= 0.0)) {
        return Err(Error::NonPositiveEntry {
            index: i + 1,
            value: *v,
        });
    }
    Ok(crate::sum::sum(geomeans(w, a)))
}

struct Run {
    ratio: f64,
    a: Vec<f64>,
    iterations: usize,
    stagnated: bool,
}

fn normalize(a: &mut [f64]) {
    let s = crate::sum::sum(a.iter().copied());
    a.iter_mut().for_each(|v| *v /= s);
}

/// Multiplicative ascent on the simplex: `a_k <- a_k (c_k / (a_k G))^theta`,
/// `c_k = lambda_k sum_{n>=k} T_n / Lambda_n`, with `T_n` the geometric means.
/// `a = c/G` is the fixed point of the Lagrange conditions. A step is kept only
/// if `G` does not decrease; otherwise `theta` is halved.
fn ascend(w: &WeightSequence, mut a: Vec<f64>, opts: &OptimizeOptions) -> Run {
    let n = a.len();
    normalize(&mut a);
    let mut terms = geomeans(w, &a);
    let mut g = crate::sum::sum(terms.iter().copied());
    let mut theta = 1.0f64;
    let mut quiet = 0;
    let mut iterations = 0;
    let mut stagnated = false;
    let mut c = vec![0.0; n];
    while iterations < opts.max_iter {
        iterations += 1;
        let mut acc = NeumaierSum::new();
        for k in (1..=n).rev() {
            acc.add(terms[k - 1] / w.prefix(k));
            c[k - 1] = w.lambda(k) * acc.value();
        }
        let mut next: Vec<f64> = a
            .iter()
            .zip(&c)
            .map(|(ak, ck)| {
                if theta == 1.0 {
                    ck / g
                } else {
                    ak * (ck / (ak * g)).powf(theta)
                }
            })
            .collect();
        normalize(&mut next);
        let next_terms = geomeans(w, &next);
        let next_g = crate::sum::sum(next_terms.iter().copied());
        if next_g >= g {
            let gain = (next_g - g) / g;
            a = next;
            terms = next_terms;
            g = next_g;
            theta = (2.0 * theta).min(1.0);
            if gain < opts.tol {
                quiet += 1;
                if quiet >= 3 {
                    break;
                }
            } else {
                quiet = 0;
            }
        } else {
            theta *= 0.5;
            if theta < 1e-10 {
                stagnated = true;
                break;
            }
        }
    }
    Run {
        ratio: g,
        a,
        iterations,
        stagnated,
    }
}

fn start_vector(w: &WeightSequence, n: usize, restart: usize, seed: u64) -> Vec<f64> {
    match restart {
        0 => (1..=n)
            .map(|k| w.lambda(k) * 0.9f64.powi(k as i32 - 1))
            .collect(),
        1 => (1..=n).map(|k| w.lambda(k) / w.prefix(k)).collect(),
        _ => {
            let mut rng = ChaCha8Rng::seed_from_u64(seed.wrapping_add(restart as u64));
            let decay: f64 = rng.gen_range(0.0..0.2);
            (1..=n)
                .map(|k| {
                    let jitter: f64 = rng.gen_range(0.5..1.5);
                    w.lambda(k) * (-decay * (k as f64 - 1.0)).exp() * jitter
                })
                .map(|v| v.max(f64::MIN_POSITIVE))
                .collect()
        }
    }
}

/// Maximizes `G(a) / sum a` over `a >= 0` of length `N`.
///
/// Restart 0 starts from `lambda_k 0.9^k`, restart 1 from `lambda_k / Lambda_k`,
/// later ones from randomly damped and jittered weights. Restarts run in
/// parallel; the best ratio wins, ties going to the lowest restart index.
pub fn optimize_ratio(
    w: &WeightSequence,
    n: usize,
    opts: OptimizeOptions,
) -> Result<CarlemanEstimate> {
    if n == 0 {
        return Err(invalid("N", "N must be >= 1"));
    }
    if opts.restarts == 0 {
        return Err(invalid("restarts", "need at least one restart"));
    }
    w.require_positive(n)?;
    let runs: Vec<Run> = (0..opts.restarts)
        .into_par_iter()
        .map(|r| ascend(w, start_vector(w, n, r, opts.seed), &opts))
        .collect();
    let (best_restart, best) = runs
        .iter()
        .enumerate()
        .fold(None::<(usize, &Run)>, |acc, (i, run)| match acc {
            Some((_, b)) if b.ratio >= run.ratio => acc,
            _ => Some((i, run)),
        })
        .expect("at least one restart");
    Ok(CarlemanEstimate {
        n,
        lower_bound_e: best.ratio,
        optimizer: best.a.clone(),
        upper_bounds: BTreeMap::new(),
        iterations: runs.iter().map(|r| r.iterations).sum(),
        restarts: opts.restarts,
        best_restart,
        stagnated: best.stagnated,
    })
}

/// Optimized lower bound next to the upper bounds `e^M`, `E` (prefix sups
/// over `n <= N`) and `e^{1/(alpha+1)}` for power weights. Needs `N+1` weights.
///
/// Fails with [`Error::Ordering`] unless `lower <= E <= e^M` and `lower` stays
/// below every upper bound.
pub fn bound_comparison(
    w: &WeightSequence,
    n: usize,
    opts: OptimizeOptions,
) -> Result<CarlemanEstimate> {
    w.require_positive(n + 1)?;
    let mut est = optimize_ratio(w, n, opts)?;
    let m = carleman_m(w, n, None)?;
    let e = bennett_e(w, n, None)?;
    let exp_m = m.aux["exp_M"];
    let big_e = e.aux["E"];
    est.upper_bounds.insert("exp_M".into(), exp_m);
    est.upper_bounds.insert("bennett_E".into(), big_e);
    if let WeightSpec::Power(alpha) = w.spec() {
        if *alpha > -1.0 {
            est.upper_bounds
                .insert("exp_inv_alpha1".into(), (1.0 / (alpha + 1.0)).exp());
        }
    }
    let lower = est.lower_bound_e;
    if big_e > exp_m * (1.0 + 1e-9) {
        return Err(Error::Ordering(format!(
            "E = {big_e} exceeds e^M = {exp_m}"
        )));
    }
    for (name, ub) in &est.upper_bounds {
        if lower > ub + 1e-6 {
            return Err(Error::Ordering(format!(
                "optimized ratio {lower} exceeds {name} = {ub}"
            )));
        }
    }
    Ok(est)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn geomean_examples() {
        let w = WeightSequence::power(0.7, 5).unwrap();
        assert!((geomean_sum(&w, &[1.0; 5]).unwrap() - 5.0).abs() < 1e-13);
        let c = WeightSequence::constant(3);
        assert_eq!(geomean_sum(&c, &[1.0, 0.0, 0.0]).unwrap(), 1.0);
        assert!((geomean_sum(&c, &[4.0, 1.0]).unwrap() - 6.0).abs() < 1e-14);
        assert!(geomean_sum(&c, &[1.0, -1.0]).is_err());
    }

    #[test]
    fn single_coordinate_ratio_is_one() {
        let w = WeightSequence::power(2.0, 3).unwrap();
        let e = optimize_ratio(&w, 1, OptimizeOptions::default()).unwrap();
        assert_eq!(e.lower_bound_e, 1.0);
    }

    #[test]
    fn cesaro_bracket() {
        let w = WeightSequence::constant(101);
        let e = bound_comparison(&w, 100, OptimizeOptions::default()).unwrap();
        assert!(e.lower_bound_e > 2.0 && e.lower_bound_e < std::f64::consts::E);
        assert!(e.optimizer.iter().all(|v| *v >= 0.0));
    }

    #[test]
    fn deterministic_given_seed() {
        let w = WeightSequence::power(0.5, 60).unwrap();
        let opts = OptimizeOptions {
            seed: 7,
            ..OptimizeOptions::default()
        };
        let a = optimize_ratio(&w, 60, opts).unwrap();
        let b = optimize_ratio(&w, 60, opts).unwrap();
        assert_eq!(a, b);
    }
}
