//! Weight sequences `lambda_n`, their prefix sums `Lambda_n` and the ratio
//! `Lambda_n / lambda_n` consumed by every condition and recurrence.
//!
//! Indices in this module's accessors are 1-based, matching the usual
//! `lambda_1, lambda_2, ...` numbering. Slice accessors are 0-based.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};
use crate::sum;

/// Recipe for a weight sequence.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum WeightSpec {
    /// `lambda_n = 1` (Cesàro matrix).
    Constant,
    /// `lambda_n = n^alpha`, `alpha > -1`.
    Power(f64),
    /// `lambda_n = r^n`, `r > 0`.
    Geometric(f64),
    /// Explicit list; `lambda_1 > 0`, all entries `>= 0`.
    Explicit(Vec<f64>),
}

impl WeightSpec {
    pub fn validate(&self) -> Result<()> {
        match self {
            WeightSpec::Constant => Ok(()),
            WeightSpec::Power(alpha) => {
                if !alpha.is_finite() || *alpha <= -1.0 {
                    return Err(invalid(
                        "alpha",
                        format!("power weights need alpha > -1, got {alpha}"),
                    ));
                }
                Ok(())
            }
            WeightSpec::Geometric(r) => {
                if !r.is_finite() || *r <= 0.0 {
                    return Err(invalid(
                        "r",
                        format!("geometric ratio must be > 0, got {r}"),
                    ));
                }
                Ok(())
            }
            WeightSpec::Explicit(values) => {
                let first = values
                    .first()
                    .ok_or_else(|| invalid("weights", "explicit weight list is empty"))?;
                if !(*first > 0.0) {
                    return Err(invalid(
                        "weights",
                        format!("lambda_1 must be > 0, got {first}"),
                    ));
                }
                if let Some((i, v)) = values
                    .iter()
                    .enumerate()
                    .find(|(_, v)| !v.is_finite() || **v < 0.0)
                {
                    return Err(invalid(
                        "weights",
                        format!("lambda_{} must be finite and >= 0, got {v}", i + 1),
                    ));
                }
                Ok(())
            }
        }
    }

    /// The power exponent when this is a power family (constant is `alpha = 0`).
    pub fn power_exponent(&self) -> Option<f64> {
        match self {
            WeightSpec::Constant => Some(0.0),
            WeightSpec::Power(a) => Some(*a),
            _ => None,
        }
    }
}

impl fmt::Display for WeightSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            WeightSpec::Constant => write!(f, "constant"),
            WeightSpec::Power(a) => write!(f, "power:{a}"),
            WeightSpec::Geometric(r) => write!(f, "geometric:{r}"),
            WeightSpec::Explicit(v) => {
                write!(f, "list:")?;
                for (i, x) in v.iter().enumerate() {
                    if i > 0 {
                        write!(f, ";")?;
                    }
                    write!(f, "{x}")?;
                }
                Ok(())
            }
        }
    }
}

impl FromStr for WeightSpec {
    type Err = Error;

    /// Parses `constant`, `cesaro`, `power:A`, `geometric:R` and `list:x;y;z`.
    /// File-backed lists (`file:PATH`) are resolved by the CLI layer.
    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim();
        let (kind, param) = match s.split_once(':') {
            Some((k, p)) => (k.trim(), Some(p.trim())),
            None => (s, None),
        };
        let number = |p: Option<&str>| -> Result<f64> {
            let p = p.ok_or_else(|| invalid("weights", format!("`{kind}` needs a parameter")))?;
            p.parse::<f64>()
                .map_err(|_| invalid("weights", format!("cannot parse `{p}` as a number")))
        };
        let spec = match kind {
            "constant" | "cesaro" => WeightSpec::Constant,
            "power" => WeightSpec::Power(number(param)?),
            "geometric" => WeightSpec::Geometric(number(param)?),
            "list" => {
                let p = param.ok_or_else(|| invalid("weights", "`list` needs values"))?;
                WeightSpec::Explicit(parse_weight_column(&p.replace([';', ','], "\n"))?)
            }
            other => {
                return Err(invalid(
                    "weights",
                    format!("unknown weight kind `{other}` (constant|power:A|geometric:R|list:..|file:PATH)"),
                ))
            }
        };
        spec.validate()?;
        Ok(spec)
    }
}

/// Parses a one-column numeric text file. Blank lines and `#` comments are skipped.
pub fn parse_weight_column(text: &str) -> Result<Vec<f64>> {
    let mut out = Vec::new();
    for (lineno, line) in text.lines().enumerate() {
        let line = line.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let v = line.parse::<f64>().map_err(|_| {
            invalid(
                "weights",
                format!("line {}: cannot parse `{line}` as a number", lineno + 1),
            )
        })?;
        out.push(v);
    }
    Ok(out)
}

/// A truncated weight sequence `lambda_1..lambda_N` with compensated prefix sums.
#[derive(Debug, Clone, PartialEq)]
pub struct WeightSequence {
    spec: WeightSpec,
    lambda: Vec<f64>,
    prefix: Vec<f64>,
}

impl WeightSequence {
    pub fn new(spec: &WeightSpec, len: usize) -> Result<Self> {
        if len == 0 {
            return Err(invalid("N", "length must be >= 1"));
        }
        spec.validate()?;
        let lambda: Vec<f64> = match spec {
            WeightSpec::Constant => vec![1.0; len],
            WeightSpec::Power(alpha) => (1..=len).map(|n| (n as f64).powf(*alpha)).collect(),
            WeightSpec::Geometric(r) => (1..=len).map(|n| r.powi(n as i32)).collect(),
            WeightSpec::Explicit(values) => {
                if values.len() < len {
                    return Err(Error::TooShort {
                        have: values.len(),
                        need: len,
                    });
                }
                values[..len].to_vec()
            }
        };
        if let Some(n) = lambda.iter().position(|v| !v.is_finite()) {
            return Err(invalid(
                "weights",
                format!("lambda_{} overflows double range", n + 1),
            ));
        }
        let prefix = sum::prefix_sums(&lambda);
        if !prefix[len - 1].is_finite() {
            return Err(invalid("weights", "prefix sum overflows double range"));
        }
        Ok(Self {
            spec: spec.clone(),
            lambda,
            prefix,
        })
    }

    pub fn constant(len: usize) -> Self {
        Self::new(&WeightSpec::Constant, len).expect("constant weights are always valid")
    }

    pub fn power(alpha: f64, len: usize) -> Result<Self> {
        Self::new(&WeightSpec::Power(alpha), len)
    }

    pub fn geometric(r: f64, len: usize) -> Result<Self> {
        Self::new(&WeightSpec::Geometric(r), len)
    }

    pub fn explicit(values: Vec<f64>) -> Result<Self> {
        let len = values.len();
        Self::new(&WeightSpec::Explicit(values), len)
    }

    pub fn spec(&self) -> &WeightSpec {
        &self.spec
    }

    pub fn len(&self) -> usize {
        self.lambda.len()
    }

    pub fn is_empty(&self) -> bool {
        self.lambda.is_empty()
    }

    pub fn lambdas(&self) -> &[f64] {
        &self.lambda
    }

    pub fn prefixes(&self) -> &[f64] {
        &self.prefix
    }

    /// `lambda_n`, 1-based.
    #[inline]
    pub fn lambda(&self, n: usize) -> f64 {
        self.lambda[n - 1]
    }

    /// `Lambda_n = lambda_1 + ... + lambda_n`, 1-based. `prefix(0) = 0`.
    #[inline]
    pub fn prefix(&self, n: usize) -> f64 {
        if n == 0 {
            0.0
        } else {
            self.prefix[n - 1]
        }
    }

    /// Truncation to the first `len` terms.
    pub fn truncate(&self, len: usize) -> Result<Self> {
        self.require(len)?;
        if len == 0 {
            return Err(invalid("N", "length must be >= 1"));
        }
        Ok(Self {
            spec: self.spec.clone(),
            lambda: self.lambda[..len].to_vec(),
            prefix: self.prefix[..len].to_vec(),
        })
    }

    pub(crate) fn require(&self, len: usize) -> Result<()> {
        if self.len() < len {
            Err(Error::TooShort {
                have: self.len(),
                need: len,
            })
        } else {
            Ok(())
        }
    }

    pub(crate) fn require_positive(&self, upto: usize) -> Result<()> {
        self.require(upto)?;
        match self.lambda[..upto].iter().position(|&l| l == 0.0) {
            Some(i) => Err(Error::ZeroWeight { n: i + 1 }),
            None => Ok(()),
        }
    }

    /// `Lambda_n / lambda_n`, 1-based. Fails on `lambda_n = 0`.
    pub fn ratio(&self, n: usize) -> Result<f64> {
        if n == 0 || n > self.len() {
            return Err(invalid(
                "n",
                format!("index {n} outside 1..={}", self.len()),
            ));
        }
        let l = self.lambda(n);
        if l == 0.0 {
            return Err(Error::ZeroWeight { n });
        }
        Ok(self.prefix(n) / l)
    }

    /// `lambda_{n+1} - lambda_n`, evaluated without cancellation for the
    /// parametric families.
    pub fn lambda_diff(&self, n: usize) -> Result<f64> {
        self.require(n + 1)?;
        let (a, b) = (self.lambda(n), self.lambda(n + 1));
        Ok(match self.spec {
            WeightSpec::Constant => 0.0,
            WeightSpec::Power(alpha) if alpha.fract() != 0.0 => {
                let nf = n as f64;
                a * (alpha * (1.0 / nf).ln_1p()).exp_m1()
            }
            WeightSpec::Geometric(r) => a * (r - 1.0),
            _ => b - a,
        })
    }

    /// `Lambda_{n+1}/lambda_{n+1} - Lambda_n/lambda_n`, rewritten as
    /// `1 - Lambda_n (lambda_{n+1} - lambda_n) / (lambda_n lambda_{n+1})`.
    pub fn ratio_increment(&self, n: usize) -> Result<f64> {
        self.require(n + 1)?;
        let (a, b) = (self.lambda(n), self.lambda(n + 1));
        if a == 0.0 {
            return Err(Error::ZeroWeight { n });
        }
        if b == 0.0 {
            return Err(Error::ZeroWeight { n: n + 1 });
        }
        let diff = self.lambda_diff(n)?;
        Ok(1.0 - self.prefix(n) * diff / (a * b))
    }

    /// All ratios `x_1..x_len`.
    pub fn ratios(&self, len: usize) -> Result<Vec<f64>> {
        self.require_positive(len)?;
        Ok((1..=len).map(|n| self.prefix(n) / self.lambda(n)).collect())
    }
}

/// Shorthand for [`WeightSequence::new`].
pub fn make_weights(spec: &WeightSpec, n: usize) -> Result<WeightSequence> {
    WeightSequence::new(spec, n)
}

/// Closed-form bracket for `sum_{i<=n} i^r`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct PowerSumBounds {
    pub lower: f64,
    pub upper: f64,
    /// `-1 < r < 0`: only `upper` is a valid bound there.
    pub extended: bool,
}

/// `n (n+1)^r / (r+1) <= sum_{i<=n} i^r <= (r/(r+1)) n^r (n+1)^r / ((n+1)^r - n^r)`
/// for `0 <= r <= 1`. The upper form is evaluated as
/// `(r/(r+1)) (n+1)^r / expm1(r ln(1 + 1/n))`; at `r = 0` it is the exact value `n`.
pub fn power_sum_bounds(n: usize, r: f64) -> Result<PowerSumBounds> {
    if n == 0 {
        return Err(invalid("n", "n must be >= 1"));
    }
    if !(r > -1.0 && r <= 1.0) {
        return Err(invalid("r", format!("need -1 < r <= 1, got {r}")));
    }
    let nf = n as f64;
    let lower = nf * (nf + 1.0).powf(r) / (r + 1.0);
    let upper = if r == 0.0 {
        nf
    } else {
        let denom = (r * (1.0 / nf).ln_1p()).exp_m1();
        (r / (r + 1.0)) * (nf + 1.0).powf(r) / denom
    };
    Ok(PowerSumBounds {
        lower,
        upper,
        extended: r < 0.0,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn constructs_the_three_families() {
        let c = WeightSequence::constant(3);
        assert_eq!(c.lambdas(), &[1.0, 1.0, 1.0]);
        assert_eq!(c.prefixes(), &[1.0, 2.0, 3.0]);

        let p = WeightSequence::power(1.0, 3).unwrap();
        assert_eq!(p.lambdas(), &[1.0, 2.0, 3.0]);
        assert_eq!(p.prefixes(), &[1.0, 3.0, 6.0]);

        let g = WeightSequence::geometric(2.0, 3).unwrap();
        assert_eq!(g.lambdas(), &[2.0, 4.0, 8.0]);
        assert_eq!(g.prefixes(), &[2.0, 6.0, 14.0]);
    }

    #[test]
    fn ratio_examples() {
        let c = WeightSequence::constant(10);
        for n in 1..=10 {
            assert_eq!(c.ratio(n).unwrap(), n as f64);
        }
        let p = WeightSequence::power(1.0, 4).unwrap();
        assert_eq!(p.ratio(4).unwrap(), 2.5);
        let g = WeightSequence::geometric(2.0, 3).unwrap();
        assert_eq!(g.ratio(3).unwrap(), 1.75);
    }

    #[test]
    fn rejects_bad_specs() {
        assert!(matches!(
            WeightSequence::power(-1.0, 3),
            Err(Error::InvalidParameter { name: "alpha", .. })
        ));
        assert!(WeightSequence::power(-1.5, 3).is_err());
        assert!(WeightSequence::explicit(vec![0.0, 1.0]).is_err());
        assert!(WeightSequence::explicit(vec![1.0, -1.0]).is_err());
        assert!(WeightSequence::explicit(vec![]).is_err());
        assert!(WeightSequence::geometric(0.0, 3).is_err());
        assert!(WeightSequence::new(&WeightSpec::Constant, 0).is_err());
    }

    #[test]
    fn zero_weights_are_stored_but_ratio_fails() {
        let w = WeightSequence::explicit(vec![1.0, 0.0, 2.0]).unwrap();
        assert_eq!(w.prefixes(), &[1.0, 1.0, 3.0]);
        assert_eq!(w.ratio(2), Err(Error::ZeroWeight { n: 2 }));
        assert_eq!(w.ratio(3).unwrap(), 1.5);
        assert!(w.ratio_increment(1).is_err());
    }

    #[test]
    fn ratio_increment_is_exact_for_simple_families() {
        let c = WeightSequence::constant(1001);
        let p = WeightSequence::power(1.0, 1001).unwrap();
        for n in 1..=1000 {
            assert_eq!(c.ratio_increment(n).unwrap(), 1.0);
            assert_eq!(p.ratio_increment(n).unwrap(), 0.5);
        }
        let g = WeightSequence::geometric(2.0, 12).unwrap();
        for n in 1..=11 {
            let expect = 0.5f64.powi(n as i32);
            assert!((g.ratio_increment(n).unwrap() - expect).abs() < 1e-15);
        }
    }

    #[test]
    fn ratio_increment_matches_subtraction() {
        let w = WeightSequence::power(0.37, 200).unwrap();
        for n in 1..200 {
            let direct = w.ratio(n + 1).unwrap() - w.ratio(n).unwrap();
            assert!((w.ratio_increment(n).unwrap() - direct).abs() < 1e-12);
        }
    }

    #[test]
    fn parses_specs() {
        assert_eq!(
            "constant".parse::<WeightSpec>().unwrap(),
            WeightSpec::Constant
        );
        assert_eq!(
            "power:0.5".parse::<WeightSpec>().unwrap(),
            WeightSpec::Power(0.5)
        );
        assert_eq!(
            "geometric:2".parse::<WeightSpec>().unwrap(),
            WeightSpec::Geometric(2.0)
        );
        assert_eq!(
            "list:1;2;0.5".parse::<WeightSpec>().unwrap(),
            WeightSpec::Explicit(vec![1.0, 2.0, 0.5])
        );
        assert!("power:-1.5".parse::<WeightSpec>().is_err());
        assert!("power".parse::<WeightSpec>().is_err());
        assert!("triangle:3".parse::<WeightSpec>().is_err());
        for s in ["constant", "power:0.25", "geometric:1.5", "list:1;0;3"] {
            let spec: WeightSpec = s.parse().unwrap();
            assert_eq!(spec.to_string().parse::<WeightSpec>().unwrap(), spec);
        }
    }

    #[test]
    fn weight_column_file_format() {
        let v = parse_weight_column("# weights\n1.0\n\n2.5  # trailing\n3\n").unwrap();
        assert_eq!(v, vec![1.0, 2.5, 3.0]);
        let err = parse_weight_column("1\nabc\n").unwrap_err();
        assert!(err.to_string().contains("line 2"));
    }

    #[test]
    fn power_sum_bound_examples() {
        let b = power_sum_bounds(2, 0.5).unwrap();
        let s = 1.0 + 2f64.sqrt();
        assert!((b.lower - 2.309_401_076_758_503).abs() < 1e-12);
        assert!((b.upper - 2.568_914_100_752_348).abs() < 1e-9);
        assert!(b.lower <= s && s <= b.upper);

        let b = power_sum_bounds(1, 1.0).unwrap();
        assert!((b.lower - 1.0).abs() < 1e-15 && (b.upper - 1.0).abs() < 1e-15);

        let b = power_sum_bounds(3, 1.0).unwrap();
        assert!((b.lower - 6.0).abs() < 1e-14 && (b.upper - 6.0).abs() < 1e-13);

        let b = power_sum_bounds(7, 0.0).unwrap();
        assert_eq!(b.upper, 7.0);
        assert_eq!(b.lower, 7.0);
    }

    #[test]
    fn power_sum_bounds_extended_regime_keeps_upper() {
        for &r in &[-0.9, -0.5, -0.1] {
            let w = WeightSequence::power(r, 500).unwrap();
            for n in 1..=500 {
                let b = power_sum_bounds(n, r).unwrap();
                assert!(b.extended);
                assert!(w.prefix(n) <= b.upper * (1.0 + 1e-13), "n={n} r={r}");
            }
        }
        assert!(power_sum_bounds(3, -1.0).is_err());
        assert!(power_sum_bounds(3, 1.5).is_err());
        assert!(power_sum_bounds(0, 0.5).is_err());
    }
}
