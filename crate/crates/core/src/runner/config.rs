//! Scenario configuration: a line-based `key = value` format with defaults,
//! field-level validation and the named presets.

use std::fmt;
use std::path::PathBuf;
use std::str::FromStr;

use crate::error::{Error, Result};
use crate::evolver::{Topology, DEFAULT_MC_SAMPLES, DEFAULT_QUAD_NODES};

pub const DEFAULT_THRESHOLD: f64 = 1e-3;
pub const DEFAULT_T_MAX: f64 = 20.0;
pub const DEFAULT_POINTS: usize = 101;
pub const DEFAULT_SEED: u64 = 42;

pub const PRESETS: [&str; 3] = ["fig1-static", "fig2-markov", "fig2-nonmarkov"];

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum NoiseKind {
    Static,
    Rtn,
}

impl NoiseKind {
    pub fn as_str(&self) -> &'static str {
        match self {
            NoiseKind::Static => "static",
            NoiseKind::Rtn => "rtn",
        }
    }
}

impl fmt::Display for NoiseKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for NoiseKind {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "static" => Ok(NoiseKind::Static),
            "rtn" | "telegraph" => Ok(NoiseKind::Rtn),
            other => Err(Error::Usage(format!("unknown noise kind {other:?} (expected static or rtn)"))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Method {
    Mc,
    Quadrature,
    ClosedForm,
}

impl Method {
    pub fn as_str(&self) -> &'static str {
        match self {
            Method::Mc => "mc",
            Method::Quadrature => "quadrature",
            Method::ClosedForm => "closed_form",
        }
    }

    pub fn is_stochastic(&self) -> bool {
        matches!(self, Method::Mc)
    }
}

impl fmt::Display for Method {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Method {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "mc" | "monte_carlo" | "monte-carlo" => Ok(Method::Mc),
            "quadrature" | "quad" => Ok(Method::Quadrature),
            "closed_form" | "closed-form" | "closed" => Ok(Method::ClosedForm),
            other => Err(Error::Usage(format!(
                "unknown method {other:?} (expected mc, quadrature or closed_form)"
            ))),
        }
    }
}

/// Comma-separated list, duplicates dropped, order kept.
fn parse_list<T: FromStr<Err = Error> + PartialEq>(s: &str) -> Result<Vec<T>> {
    let mut out = Vec::new();
    for part in s.split(',').map(str::trim).filter(|p| !p.is_empty()) {
        let v = part.parse()?;
        if !out.contains(&v) {
            out.push(v);
        }
    }
    Ok(out)
}

pub fn parse_topologies(s: &str) -> Result<Vec<Topology>> {
    if s.trim().eq_ignore_ascii_case("both") {
        return Ok(vec![Topology::Separate, Topology::Common]);
    }
    parse_list(s)
}

pub fn parse_methods(s: &str) -> Result<Vec<Method>> {
    parse_list(s)
}

/// Everything needed to produce one set of curves.
///
/// Times are dimensionless (`nu * t`); `t_max` is in the same units.
#[derive(Debug, Clone, PartialEq)]
pub struct ScenarioConfig {
    pub noise: NoiseKind,
    pub topologies: Vec<Topology>,
    pub methods: Vec<Method>,
    pub nu: f64,
    /// Switching rate; ignored when `nu_over_gamma` is set.
    pub gamma: f64,
    pub nu_over_gamma: Option<f64>,
    pub c0: f64,
    pub delta_c: f64,
    pub epsilon: f64,
    pub t_max: f64,
    pub n_points: usize,
    pub n_samples: usize,
    pub quad_nodes: usize,
    pub seed: u64,
    pub workers: Option<usize>,
    pub threshold: f64,
    /// Overrides the per-method-pair default in comparisons.
    pub tolerance: Option<f64>,
    pub output_path: Option<PathBuf>,
    pub preset: Option<String>,
    /// Parameters chosen for a qualitative reproduction rather than taken from a source.
    pub qualitative: bool,
}

impl Default for ScenarioConfig {
    fn default() -> Self {
        ScenarioConfig {
            noise: NoiseKind::Static,
            topologies: vec![Topology::Separate],
            methods: vec![Method::ClosedForm],
            nu: 1.0,
            gamma: 1.0,
            nu_over_gamma: None,
            c0: 1.0,
            delta_c: 1.0,
            epsilon: 0.0,
            t_max: DEFAULT_T_MAX,
            n_points: DEFAULT_POINTS,
            n_samples: DEFAULT_MC_SAMPLES,
            quad_nodes: DEFAULT_QUAD_NODES,
            seed: DEFAULT_SEED,
            workers: None,
            threshold: DEFAULT_THRESHOLD,
            tolerance: None,
            output_path: None,
            preset: None,
            qualitative: false,
        }
    }
}

fn field_err(key: &str, msg: impl fmt::Display) -> Error {
    Error::Usage(format!("field `{key}`: {msg}"))
}

fn parse_num<T: FromStr>(key: &str, value: &str, what: &str) -> Result<T> {
    value
        .trim()
        .parse()
        .map_err(|_| field_err(key, format!("cannot parse {value:?} as {what}")))
}

impl ScenarioConfig {
    /// Defaults overlaid with the `key = value` lines of `text`. `#` starts a comment.
    pub fn parse(text: &str) -> Result<Self> {
        let mut cfg = ScenarioConfig::default();
        cfg.merge_text(text)?;
        Ok(cfg)
    }

    pub fn merge_text(&mut self, text: &str) -> Result<()> {
        for (i, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (key, value) = line
                .split_once('=')
                .ok_or_else(|| Error::Usage(format!("line {}: expected `key = value`, got {line:?}", i + 1)))?;
            self.apply(key.trim(), value.trim()).map_err(|e| match e {
                Error::Usage(msg) => Error::Usage(format!("line {}: {msg}", i + 1)),
                other => other,
            })?;
        }
        Ok(())
    }

    /// Sets one field from its textual form.
    pub fn apply(&mut self, key: &str, value: &str) -> Result<()> {
        let wrap = |e: Error| match e {
            Error::Usage(msg) => field_err(key, msg),
            other => other,
        };
        match key {
            "noise" => self.noise = value.parse().map_err(wrap)?,
            "topology" => self.topologies = parse_topologies(value).map_err(wrap)?,
            "method" => self.methods = parse_methods(value).map_err(wrap)?,
            "nu" => self.nu = parse_num(key, value, "a number")?,
            "gamma" => {
                self.gamma = parse_num(key, value, "a number")?;
                self.nu_over_gamma = None;
            }
            "nu_over_gamma" => self.nu_over_gamma = Some(parse_num(key, value, "a number")?),
            "c0" => self.c0 = parse_num(key, value, "a number")?,
            "delta_c" => self.delta_c = parse_num(key, value, "a number")?,
            "epsilon" => self.epsilon = parse_num(key, value, "a number")?,
            "t_max" => self.t_max = parse_num(key, value, "a number")?,
            "points" => self.n_points = parse_num(key, value, "a count")?,
            "samples" => self.n_samples = parse_num(key, value, "a count")?,
            "nodes" => self.quad_nodes = parse_num(key, value, "a count")?,
            "seed" => self.seed = parse_num(key, value, "an unsigned integer")?,
            "workers" => self.workers = Some(parse_num(key, value, "a count")?),
            "threshold" => self.threshold = parse_num(key, value, "a number")?,
            "tolerance" => self.tolerance = Some(parse_num(key, value, "a number")?),
            "out" => self.output_path = Some(PathBuf::from(value)),
            "preset" => self.preset = Some(value.to_string()),
            "qualitative" => self.qualitative = parse_num(key, value, "true or false")?,
            _ => return Err(Error::Usage(format!("unknown field `{key}`"))),
        }
        Ok(())
    }

    pub fn effective_gamma(&self) -> f64 {
        match self.nu_over_gamma {
            Some(r) => self.nu / r,
            None => self.gamma,
        }
    }

    pub fn validate(&self) -> Result<()> {
        let positive = |key: &str, v: f64| {
            if v.is_finite() && v > 0.0 {
                Ok(())
            } else {
                Err(field_err(key, format!("must be positive and finite (got {v})")))
            }
        };
        positive("nu", self.nu)?;
        positive("t_max", self.t_max)?;
        positive("threshold", self.threshold)?;
        if !self.epsilon.is_finite() {
            return Err(field_err("epsilon", "must be finite"));
        }
        match self.noise {
            NoiseKind::Static => {
                if !self.c0.is_finite() {
                    return Err(field_err("c0", "must be finite"));
                }
                positive("delta_c", self.delta_c)?;
            }
            NoiseKind::Rtn => {
                if let Some(r) = self.nu_over_gamma {
                    positive("nu_over_gamma", r)?;
                }
                positive("gamma", self.effective_gamma())?;
                if self.methods.contains(&Method::Quadrature) {
                    return Err(field_err(
                        "method",
                        "quadrature averages static disorder only; use closed_form or mc for rtn",
                    ));
                }
            }
        }
        if self.n_points < 2 {
            return Err(field_err("points", format!("need at least 2 (got {})", self.n_points)));
        }
        if self.topologies.is_empty() {
            return Err(field_err("topology", "no topology selected"));
        }
        if self.methods.is_empty() {
            return Err(field_err("method", "no method selected"));
        }
        if self.methods.contains(&Method::Mc) && self.n_samples == 0 {
            return Err(field_err("samples", "Monte Carlo needs at least one sample"));
        }
        if self.methods.contains(&Method::Quadrature) && self.quad_nodes < 2 {
            return Err(field_err("nodes", format!("need at least 2 (got {})", self.quad_nodes)));
        }
        if self.workers == Some(0) {
            return Err(field_err("workers", "must be at least 1"));
        }
        if let Some(tol) = self.tolerance {
            positive("tolerance", tol)?;
        }
        Ok(())
    }

    /// Uniform grid `0, ..., t_max` in units of `nu * t`.
    pub fn times(&self) -> Vec<f64> {
        let last = (self.n_points - 1) as f64;
        (0..self.n_points)
            .map(|k| if k + 1 == self.n_points { self.t_max } else { self.t_max * k as f64 / last })
            .collect()
    }

    /// Fully resolved configuration; parsing it back reproduces `self`.
    pub fn to_text(&self) -> String {
        let join = |v: Vec<&str>| v.join(",");
        let mut lines = Vec::new();
        if let Some(p) = &self.preset {
            lines.push(format!("preset = {p}"));
        }
        lines.push(format!("qualitative = {}", self.qualitative));
        lines.push(format!("noise = {}", self.noise));
        lines.push(format!("topology = {}", join(self.topologies.iter().map(|t| t.as_str()).collect())));
        lines.push(format!("method = {}", join(self.methods.iter().map(|m| m.as_str()).collect())));
        lines.push(format!("nu = {}", self.nu));
        match self.nu_over_gamma {
            Some(r) => lines.push(format!("nu_over_gamma = {r}  # gamma = {}", self.effective_gamma())),
            None => lines.push(format!("gamma = {}", self.gamma)),
        }
        lines.push(format!("c0 = {}", self.c0));
        lines.push(format!("delta_c = {}", self.delta_c));
        lines.push(format!("epsilon = {}", self.epsilon));
        lines.push(format!("t_max = {}", self.t_max));
        lines.push(format!("points = {}", self.n_points));
        lines.push(format!("samples = {}", self.n_samples));
        lines.push(format!("nodes = {}", self.quad_nodes));
        lines.push(format!("seed = {}", self.seed));
        if let Some(w) = self.workers {
            lines.push(format!("workers = {w}"));
        }
        lines.push(format!("threshold = {}", self.threshold));
        if let Some(tol) = self.tolerance {
            lines.push(format!("tolerance = {tol}"));
        }
        if let Some(out) = &self.output_path {
            lines.push(format!("out = {}", out.display()));
        }
        let mut text = lines.join("\n");
        text.push('\n');
        text
    }

    /// Named scenario. All presets cover both topologies with the closed forms;
    /// time ranges and the static spread are illustrative choices.
    pub fn preset(name: &str) -> Result<Self> {
        let base = ScenarioConfig {
            topologies: vec![Topology::Separate, Topology::Common],
            preset: Some(name.to_string()),
            qualitative: true,
            ..ScenarioConfig::default()
        };
        match name {
            "fig1-static" => Ok(ScenarioConfig {
                noise: NoiseKind::Static,
                c0: 1.0,
                delta_c: 1.0,
                ..base
            }),
            "fig2-markov" => Ok(ScenarioConfig {
                noise: NoiseKind::Rtn,
                nu_over_gamma: Some(0.2),
                ..base
            }),
            "fig2-nonmarkov" => Ok(ScenarioConfig {
                noise: NoiseKind::Rtn,
                nu_over_gamma: Some(5.0),
                ..base
            }),
            other => Err(Error::Usage(format!(
                "unknown preset {other:?} (expected one of {})",
                PRESETS.join(", ")
            ))),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn defaults_validate() {
        ScenarioConfig::default().validate().unwrap();
        for p in PRESETS {
            ScenarioConfig::preset(p).unwrap().validate().unwrap();
        }
    }

    #[test]
    fn parses_key_values_with_comments() {
        let cfg = ScenarioConfig::parse(
            "# scenario\nnoise = rtn\ntopology = both\nmethod = mc, closed_form\nnu_over_gamma = 5 # slow\npoints=11\n",
        )
        .unwrap();
        assert_eq!(cfg.noise, NoiseKind::Rtn);
        assert_eq!(cfg.topologies, vec![Topology::Separate, Topology::Common]);
        assert_eq!(cfg.methods, vec![Method::Mc, Method::ClosedForm]);
        assert_eq!(cfg.effective_gamma(), 0.2);
        assert_eq!(cfg.n_points, 11);
    }

    #[test]
    fn resolved_text_round_trips() {
        let mut cfg = ScenarioConfig::preset("fig2-nonmarkov").unwrap();
        cfg.workers = Some(3);
        cfg.tolerance = Some(1e-7);
        cfg.output_path = Some("out/run.csv".into());
        cfg.t_max = 0.1 + 0.2;
        assert_eq!(ScenarioConfig::parse(&cfg.to_text()).unwrap(), cfg);
        let plain = ScenarioConfig { gamma: 0.37, ..ScenarioConfig::default() };
        assert_eq!(ScenarioConfig::parse(&plain.to_text()).unwrap(), plain);
    }

    #[test]
    fn errors_name_the_field_and_line() {
        let err = ScenarioConfig::parse("nu = 1\ndelta_c = abc\n").unwrap_err();
        assert!(err.is_usage());
        let msg = err.to_string();
        assert!(msg.contains("line 2") && msg.contains("delta_c"), "{msg}");

        let err = ScenarioConfig::parse("bogus = 1").unwrap_err().to_string();
        assert!(err.contains("bogus"), "{err}");
        assert!(ScenarioConfig::parse("no equals sign").is_err());

        let bad = ScenarioConfig { delta_c: -1.0, ..ScenarioConfig::default() };
        assert!(bad.validate().unwrap_err().to_string().contains("delta_c"));
        let bad = ScenarioConfig { n_points: 1, ..ScenarioConfig::default() };
        assert!(bad.validate().unwrap_err().to_string().contains("points"));
        let bad = ScenarioConfig {
            noise: NoiseKind::Rtn,
            methods: vec![Method::Quadrature],
            ..ScenarioConfig::default()
        };
        assert!(bad.validate().unwrap_err().to_string().contains("method"));
        let bad = ScenarioConfig { noise: NoiseKind::Rtn, gamma: 0.0, ..ScenarioConfig::default() };
        assert!(bad.validate().unwrap_err().to_string().contains("gamma"));
    }

    #[test]
    fn grid_ends_exactly_at_t_max() {
        let cfg = ScenarioConfig { t_max: 0.7, n_points: 8, ..ScenarioConfig::default() };
        let t = cfg.times();
        assert_eq!(t.len(), 8);
        assert_eq!(t[0], 0.0);
        assert_eq!(*t.last().unwrap(), 0.7);
        assert!(t.windows(2).all(|w| w[0] < w[1]));
    }

    #[test]
    fn unknown_preset_is_usage_error() {
        assert!(ScenarioConfig::preset("fig3").unwrap_err().is_usage());
    }
}
