//! Run configuration.
//!
//! Config files are flat `key = value` lines. `#` starts a comment, blank lines
//! are ignored, list values are comma separated, and each key may appear once.
//! Keys: `command`, `weights`, `p`, `L`, `alpha`, `N`, `condition`, `method`,
//! `a`, `b`, `restarts`, `tol`, `seed`, `out`, `format`. Command-line flags use
//! the same names and the same value syntax, and override the file.

use std::fmt;
use std::path::PathBuf;
use std::str::FromStr;

use thiserror::Error;

use crate::cli::report::Format;
use crate::conditions::ConditionKind;
use crate::norms::NormMethod;
use crate::weights::{parse_weight_column, WeightSpec};

#[derive(Debug, Error, PartialEq)]
pub enum ConfigError {
    #[error("line {line}: {msg}")]
    Syntax { line: usize, msg: String },
    #[error("{origin}: invalid `{key}`: {msg}")]
    Invalid {
        key: String,
        origin: Origin,
        msg: String,
    },
    #[error("{0}")]
    Io(String),
}

/// Where a setting came from, for error messages.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Origin {
    Line(usize),
    Flag,
    Default,
}

impl fmt::Display for Origin {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Origin::Line(n) => write!(f, "line {n}"),
            Origin::Flag => write!(f, "command line"),
            Origin::Default => write!(f, "default value"),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, clap::ValueEnum)]
pub enum Command {
    Norm,
    Conditions,
    Certify,
    Carleman,
    Wirtinger,
    Sweep,
    Counterexample,
}

impl Command {
    pub fn as_str(self) -> &'static str {
        match self {
            Command::Norm => "norm",
            Command::Conditions => "conditions",
            Command::Certify => "certify",
            Command::Carleman => "carleman",
            Command::Wirtinger => "wirtinger",
            Command::Sweep => "sweep",
            Command::Counterexample => "counterexample",
        }
    }
}

impl FromStr for Command {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        <Command as clap::ValueEnum>::from_str(s.trim(), false)
            .map_err(|_| format!("unknown command `{}`", s.trim()))
    }
}

/// `L` is either a number or chosen per weight family.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum LChoice {
    Auto,
    Value(f64),
}

/// `method = auto` picks `eigen` at `p = 2` and `eta-bisection` otherwise.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum MethodChoice {
    Auto,
    Fixed(NormMethod),
}

impl MethodChoice {
    pub fn resolve(self, p: f64) -> NormMethod {
        match self {
            MethodChoice::Fixed(m) => m,
            MethodChoice::Auto if p == 2.0 => NormMethod::Eigen,
            MethodChoice::Auto => NormMethod::EtaBisection,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub command: Command,
    pub weights: WeightSpec,
    /// Exponent grid; `None` means the command default.
    pub p: Option<Vec<f64>>,
    pub l: LChoice,
    pub alpha: Vec<f64>,
    pub n: usize,
    pub condition: Option<ConditionKind>,
    pub method: MethodChoice,
    pub a: f64,
    pub b: f64,
    pub restarts: usize,
    pub tol: f64,
    pub seed: u64,
    pub out: Option<PathBuf>,
    pub format: Format,
}

pub const KEYS: [&str; 15] = [
    "command",
    "weights",
    "p",
    "L",
    "alpha",
    "N",
    "condition",
    "method",
    "a",
    "b",
    "restarts",
    "tol",
    "seed",
    "out",
    "format",
];

impl RunConfig {
    pub fn defaults(command: Command) -> Self {
        Self {
            command,
            weights: WeightSpec::Constant,
            p: None,
            l: LChoice::Auto,
            alpha: Vec::new(),
            n: 1000,
            condition: None,
            method: MethodChoice::Auto,
            a: 1.0,
            b: 1.0,
            restarts: 8,
            tol: 1e-12,
            seed: 0,
            out: None,
            format: Format::Table,
        }
    }

    /// The exponent grid after command defaults.
    pub fn p_grid(&self) -> Vec<f64> {
        match (&self.p, self.command) {
            (Some(p), _) => p.clone(),
            (None, Command::Counterexample) => vec![0.25, 0.5, 0.6],
            (None, Command::Sweep | Command::Certify) => vec![2.0, 3.0],
            (None, _) => match self.condition {
                Some(ConditionKind::ReversedLs) => vec![0.25],
                _ => vec![2.0],
            },
        }
    }

    pub fn condition_or(&self, fallback: ConditionKind) -> ConditionKind {
        self.condition.unwrap_or(fallback)
    }

    /// Config text that parses back to `self`.
    pub fn to_config_text(&self) -> String {
        let list = |v: &[f64]| {
            v.iter()
                .map(|x| x.to_string())
                .collect::<Vec<_>>()
                .join(", ")
        };
        let mut s = String::new();
        let mut put = |k: &str, v: String| {
            s.push_str(k);
            s.push_str(" = ");
            s.push_str(&v);
            s.push('\n');
        };
        put("command", self.command.as_str().into());
        put("weights", self.weights.to_string());
        if let Some(p) = &self.p {
            put("p", list(p));
        }
        put(
            "L",
            match self.l {
                LChoice::Auto => "auto".into(),
                LChoice::Value(v) => v.to_string(),
            },
        );
        if !self.alpha.is_empty() {
            put("alpha", list(&self.alpha));
        }
        put("N", self.n.to_string());
        if let Some(c) = self.condition {
            put("condition", c.as_str().into());
        }
        put(
            "method",
            match self.method {
                MethodChoice::Auto => "auto".into(),
                MethodChoice::Fixed(m) => m.as_str().into(),
            },
        );
        put("a", self.a.to_string());
        put("b", self.b.to_string());
        put("restarts", self.restarts.to_string());
        put("tol", self.tol.to_string());
        put("seed", self.seed.to_string());
        if let Some(o) = &self.out {
            put("out", o.display().to_string());
        }
        put("format", self.format.as_str().into());
        s
    }

    fn set(&mut self, key: &str, value: &str, origin: Origin) -> Result<(), ConfigError> {
        let bad = |msg: String| ConfigError::Invalid {
            key: key.to_string(),
            origin,
            msg,
        };
        let num = |v: &str| -> Result<f64, ConfigError> {
            v.trim()
                .parse::<f64>()
                .map_err(|_| bad(format!("`{}` is not a number", v.trim())))
        };
        let list = |v: &str| -> Result<Vec<f64>, ConfigError> {
            let vals: Vec<f64> = v.split(',').map(&num).collect::<Result<_, _>>()?;
            if vals.is_empty() {
                return Err(bad("empty list".into()));
            }
            Ok(vals)
        };
        let int = |v: &str| -> Result<u64, ConfigError> {
            v.trim()
                .parse::<u64>()
                .map_err(|_| bad(format!("`{}` is not a nonnegative integer", v.trim())))
        };
        match key {
            "command" => {
                let c: Command = value.parse().map_err(bad)?;
                if c != self.command {
                    return Err(bad(format!(
                        "config is for `{}` but `{}` was requested",
                        c.as_str(),
                        self.command.as_str()
                    )));
                }
            }
            "weights" => self.weights = parse_weights(value).map_err(bad)?,
            "p" => self.p = Some(list(value)?),
            "L" => {
                self.l = if value.trim() == "auto" {
                    LChoice::Auto
                } else {
                    LChoice::Value(num(value)?)
                }
            }
            "alpha" => self.alpha = list(value)?,
            "N" => self.n = int(value)? as usize,
            "condition" => {
                self.condition = Some(
                    value
                        .parse()
                        .map_err(|e: crate::Error| bad(e.to_string()))?,
                )
            }
            "method" => {
                self.method = if value.trim() == "auto" {
                    MethodChoice::Auto
                } else {
                    MethodChoice::Fixed(
                        value
                            .parse()
                            .map_err(|e: crate::Error| bad(e.to_string()))?,
                    )
                }
            }
            "a" => self.a = num(value)?,
            "b" => self.b = num(value)?,
            "restarts" => self.restarts = int(value)? as usize,
            "tol" => self.tol = num(value)?,
            "seed" => self.seed = int(value)?,
            "out" => self.out = Some(PathBuf::from(value.trim())),
            "format" => self.format = value.parse().map_err(bad)?,
            other => {
                return Err(bad(format!(
                    "unknown key `{other}` (known: {})",
                    KEYS.join(", ")
                )))
            }
        }
        Ok(())
    }

    /// Checks every field the command uses against the preconditions of the
    /// operation it feeds.
    pub fn validate(&self) -> Result<(), ConfigError> {
        let bad = |key: &str, msg: String| ConfigError::Invalid {
            key: key.to_string(),
            origin: Origin::Default,
            msg,
        };
        self.weights
            .validate()
            .map_err(|e| bad("weights", e.to_string()))?;
        if self.n == 0 {
            return Err(bad("N", "N must be >= 1".into()));
        }
        if !(self.tol > 0.0 && self.tol < 1.0) {
            return Err(bad("tol", format!("need 0 < tol < 1, got {}", self.tol)));
        }
        for &a in &self.alpha {
            if !(a > -1.0 && a.is_finite()) {
                return Err(bad("alpha", format!("need alpha > -1, got {a}")));
            }
        }
        if let LChoice::Value(l) = self.l {
            if !(l > 0.0 && l.is_finite()) {
                return Err(bad("L", format!("need L > 0, got {l}")));
            }
        }
        let p = self.p_grid();
        let cond = self.condition;
        let need_p_gt_1 = |p: &[f64]| -> Result<(), ConfigError> {
            match p.iter().find(|v| !(**v > 1.0 && v.is_finite())) {
                Some(v) => Err(bad(
                    "p",
                    format!("`{}` requires p > 1, got {v}", self.command.as_str()),
                )),
                None => Ok(()),
            }
        };
        match self.command {
            Command::Norm => {
                need_p_gt_1(&p)?;
                if self.method == MethodChoice::Fixed(NormMethod::Eigen)
                    && p.iter().any(|v| *v != 2.0)
                {
                    return Err(bad("method", "the eigen route needs p = 2".into()));
                }
            }
            Command::Certify => {
                need_p_gt_1(&p)?;
                match cond {
                    None | Some(ConditionKind::Thm13 | ConditionKind::Cor14) => {}
                    Some(c) => {
                        return Err(bad(
                            "condition",
                            format!("certify works with thm13 or cor14, got {c}"),
                        ))
                    }
                }
                if self.method == MethodChoice::Fixed(NormMethod::Eigen)
                    && p.iter().any(|v| *v != 2.0)
                {
                    return Err(bad("method", "the eigen route needs p = 2".into()));
                }
            }
            Command::Conditions | Command::Sweep => {
                let c = cond.unwrap_or(if self.command == Command::Sweep {
                    ConditionKind::Cor14
                } else {
                    ConditionKind::Thm13
                });
                match c {
                    ConditionKind::ReversedLs => {
                        if let Some(v) = p.iter().find(|v| !(**v > 0.0 && **v <= 1.0 / 3.0)) {
                            return Err(bad(
                                "p",
                                format!("reversed_LS needs 0 < p <= 1/3, got {v}"),
                            ));
                        }
                    }
                    ConditionKind::Thm61 => {
                        if let Some(v) = p.iter().find(|v| !(**v >= 2.0 && v.is_finite())) {
                            return Err(bad("p", format!("thm61 needs p >= 2, got {v}")));
                        }
                        if let Some(a) = self.alpha.iter().find(|a| !(0.0..=1.0).contains(*a)) {
                            return Err(bad(
                                "alpha",
                                format!("thm61 needs 0 <= alpha <= 1, got {a}"),
                            ));
                        }
                    }
                    ConditionKind::CarlemanM | ConditionKind::BennettE => {}
                    _ => need_p_gt_1(&p)?,
                }
            }
            Command::Carleman => {
                if self.restarts == 0 {
                    return Err(bad("restarts", "need at least one restart".into()));
                }
            }
            Command::Wirtinger => {
                if !(self.a > 0.0 && self.a.is_finite()) {
                    return Err(bad("a", format!("need a > 0, got {}", self.a)));
                }
                if !(self.b > 0.0 && self.b.is_finite()) {
                    return Err(bad("b", format!("need b > 0, got {}", self.b)));
                }
            }
            Command::Counterexample => {
                if let Some(v) = p.iter().find(|v| !(**v > 0.0 && **v < 1.0)) {
                    return Err(bad("p", format!("counterexample needs 0 < p < 1, got {v}")));
                }
            }
        }
        Ok(())
    }
}

/// `file:PATH` reads a one-column file; anything else goes to [`WeightSpec`].
pub fn parse_weights(value: &str) -> Result<WeightSpec, String> {
    let v = value.trim();
    if let Some(path) = v.strip_prefix("file:") {
        let text = std::fs::read_to_string(path.trim())
            .map_err(|e| format!("cannot read `{}`: {e}", path.trim()))?;
        let vals = parse_weight_column(&text).map_err(|e| e.to_string())?;
        let spec = WeightSpec::Explicit(vals);
        spec.validate().map_err(|e| e.to_string())?;
        return Ok(spec);
    }
    v.parse::<WeightSpec>().map_err(|e| e.to_string())
}

/// Splits config text into `(line, key, value)` triples.
pub fn parse_pairs(text: &str) -> Result<Vec<(usize, String, String)>, ConfigError> {
    let mut out: Vec<(usize, String, String)> = Vec::new();
    for (i, raw) in text.lines().enumerate() {
        let line = i + 1;
        let body = raw.split('#').next().unwrap_or("").trim();
        if body.is_empty() {
            continue;
        }
        let (k, v) = body.split_once('=').ok_or_else(|| ConfigError::Syntax {
            line,
            msg: format!("expected `key = value`, got `{body}`"),
        })?;
        let (k, v) = (k.trim(), v.trim());
        if k.is_empty() {
            return Err(ConfigError::Syntax {
                line,
                msg: "missing key before `=`".into(),
            });
        }
        if !KEYS.contains(&k) {
            return Err(ConfigError::Syntax {
                line,
                msg: format!("unknown key `{k}` (known: {})", KEYS.join(", ")),
            });
        }
        if v.is_empty() {
            return Err(ConfigError::Syntax {
                line,
                msg: format!("`{k}` has no value"),
            });
        }
        if let Some((first, _, _)) = out.iter().find(|(_, key, _)| key == k) {
            return Err(ConfigError::Syntax {
                line,
                msg: format!("`{k}` already set on line {first}"),
            });
        }
        out.push((line, k.to_string(), v.to_string()));
    }
    Ok(out)
}

/// Builds a validated config for `command` from file pairs, then flag pairs.
pub fn build(
    command: Command,
    file: &[(usize, String, String)],
    flags: &[(String, String)],
) -> Result<RunConfig, ConfigError> {
    let mut cfg = RunConfig::defaults(command);
    let mut origins: Vec<(&str, Origin)> = Vec::new();
    for (line, k, v) in file {
        cfg.set(k, v, Origin::Line(*line))?;
        origins.push((k, Origin::Line(*line)));
    }
    for (k, v) in flags {
        cfg.set(k, v, Origin::Flag)?;
        origins.push((k, Origin::Flag));
    }
    cfg.validate().map_err(|e| match e {
        ConfigError::Invalid { key, origin, msg } => {
            let origin = origins
                .iter()
                .rev()
                .find(|(k, _)| *k == key)
                .map_or(origin, |(_, o)| *o);
            ConfigError::Invalid { key, origin, msg }
        }
        other => other,
    })?;
    Ok(cfg)
}

/// Parses a self-contained config document; `command` is required.
pub fn parse_config(text: &str) -> Result<RunConfig, ConfigError> {
    let pairs = parse_pairs(text)?;
    let (_, _, cmd) = pairs
        .iter()
        .find(|(_, k, _)| k == "command")
        .ok_or_else(|| ConfigError::Syntax {
            line: 0,
            msg: "missing `command`".into(),
        })?;
    let command: Command = cmd.parse().map_err(|msg| ConfigError::Invalid {
        key: "command".into(),
        origin: Origin::Line(
            pairs
                .iter()
                .find(|(_, k, _)| k == "command")
                .map_or(0, |t| t.0),
        ),
        msg,
    })?;
    build(command, &pairs, &[])
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn valid_norm_config() {
        let cfg = parse_config("command=norm\nweights=power:0.5\np=2\nN=1000\n").unwrap();
        assert_eq!(cfg.command, Command::Norm);
        assert_eq!(cfg.weights, WeightSpec::Power(0.5));
        assert_eq!(cfg.p_grid(), vec![2.0]);
        assert_eq!(cfg.n, 1000);
    }

    #[test]
    fn norm_rejects_small_p() {
        let err = parse_config("command=norm\np=0.5\n").unwrap_err();
        assert!(
            matches!(err, ConfigError::Invalid { ref key, .. } if key == "p"),
            "{err}"
        );
        assert!(err.to_string().starts_with("line 2"), "{err}");
    }

    #[test]
    fn rejects_bad_alpha() {
        let err = parse_config("command = norm\nweights = power:-1.5\n").unwrap_err();
        assert!(err.to_string().contains("alpha"), "{err}");
        assert!(err.to_string().contains("line 2"), "{err}");
    }

    #[test]
    fn unknown_key_has_line_number() {
        let err = parse_config("# header\ncommand = norm\n\nweigths = constant\n").unwrap_err();
        assert_eq!(
            err,
            ConfigError::Syntax {
                line: 4,
                msg: format!("unknown key `weigths` (known: {})", KEYS.join(", "))
            }
        );
    }

    #[test]
    fn duplicate_and_malformed_lines() {
        assert!(matches!(
            parse_config("command = norm\np = 2\np = 3\n"),
            Err(ConfigError::Syntax { line: 3, .. })
        ));
        assert!(matches!(
            parse_config("command = norm\njust words\n"),
            Err(ConfigError::Syntax { line: 2, .. })
        ));
    }

    #[test]
    fn round_trip() {
        let text = "command = sweep\nweights = geometric:2\np = 2, 3.5\nL = 0.75\nalpha = 0, 0.25, 1\nN = 77\ncondition = thm13\nmethod = power-iteration\nseed = 9\nformat = jsonl\nout = /tmp/x.jsonl\n";
        let cfg = parse_config(text).unwrap();
        let again = parse_config(&cfg.to_config_text()).unwrap();
        assert_eq!(cfg, again);
        let cfg = parse_config("command = carleman\nweights = list:1;0.5;0.25\n").unwrap();
        assert_eq!(parse_config(&cfg.to_config_text()).unwrap(), cfg);
    }

    #[test]
    fn flags_override_file() {
        let file = parse_pairs("p = 3\nN = 10\n").unwrap();
        let cfg = build(Command::Norm, &file, &[("N".into(), "20".into())]).unwrap();
        assert_eq!(cfg.n, 20);
        assert_eq!(cfg.p_grid(), vec![3.0]);
    }

    #[test]
    fn command_mismatch_rejected() {
        let file = parse_pairs("command = norm\n").unwrap();
        assert!(build(Command::Sweep, &file, &[]).is_err());
    }
}
