//! Flat `key = value` run configuration with command-line overrides.
//!
//! ```text
//! # comment
//! dim = 1
//! n = 1024
//! m0 = 1.0
//! center = 0
//! branch = mixed
//! ```
//!
//! Vectors are comma separated. Lengths are in units of `hbar / (m0 c)`
//! unless given explicitly, so the defaults scale with the mass.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use serde::Serialize;

use crate::dynamics::{Generator, PacketSpec, SpinorMix};
use crate::error::{Error, Result};
use crate::grid::GridSpec;
use crate::params::PhysParams;

pub const KEYS: &[&str] = &[
    "dim",
    "n",
    "extent",
    "m0",
    "center",
    "width",
    "pbar",
    "branch",
    "w_plus",
    "w_minus",
    "experiment",
    "samples",
    "span",
    "generator",
    "observables",
    "out",
    "seed",
    "random_states",
    "corrupt_beta",
];

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Branch {
    Pos,
    Neg,
    Mixed,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RunConfig {
    pub dim: usize,
    pub n: usize,
    pub extent: f64,
    pub m0: f64,
    pub center: Vec<f64>,
    pub width: f64,
    pub pbar: Vec<f64>,
    pub branch: Branch,
    pub w_plus: f64,
    pub w_minus: f64,
    pub experiment: String,
    pub samples: usize,
    /// Evolution span; `None` selects the command's default.
    pub span: Option<f64>,
    pub generator: Generator,
    pub observables: Vec<String>,
    pub out: PathBuf,
    pub seed: u64,
    pub random_states: usize,
    /// Test hook: run the identity checks against a corrupted `beta`.
    pub corrupt_beta: bool,
}

/// Parses `key = value` lines. Blank lines and `#` comments are skipped.
pub fn parse_pairs(text: &str) -> Result<BTreeMap<String, String>> {
    let mut map = BTreeMap::new();
    let mut errs = Vec::new();
    for (lineno, raw) in text.lines().enumerate() {
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        match line.split_once('=') {
            Some((k, v)) => {
                map.insert(k.trim().to_string(), v.trim().to_string());
            }
            None => errs.push(format!("line {}: expected `key = value`, got `{line}`", lineno + 1)),
        }
    }
    if errs.is_empty() {
        Ok(map)
    } else {
        Err(Error::Config(errs))
    }
}

pub fn load_file(path: &Path) -> Result<BTreeMap<String, String>> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| Error::Config(vec![format!("cannot read {}: {e}", path.display())]))?;
    parse_pairs(&text)
}

struct Reader<'a> {
    map: &'a BTreeMap<String, String>,
    errs: Vec<String>,
}

impl Reader<'_> {
    fn get<T: std::str::FromStr>(&mut self, key: &str) -> Option<T> {
        let v = self.map.get(key)?;
        match v.parse() {
            Ok(x) => Some(x),
            Err(_) => {
                self.errs.push(format!("{key}: cannot parse `{v}`"));
                None
            }
        }
    }

    fn vector(&mut self, key: &str) -> Option<Vec<f64>> {
        let v = self.map.get(key)?;
        let parsed: std::result::Result<Vec<f64>, _> = v.split(',').map(|s| s.trim().parse::<f64>()).collect();
        match parsed {
            Ok(x) => Some(x),
            Err(_) => {
                self.errs.push(format!("{key}: cannot parse vector `{v}`"));
                None
            }
        }
    }
}

impl RunConfig {
    /// Builds and validates a configuration; every problem found is reported
    /// at once.
    pub fn from_pairs(map: &BTreeMap<String, String>) -> Result<Self> {
        let mut r = Reader { map, errs: Vec::new() };
        for k in map.keys() {
            if !KEYS.contains(&k.as_str()) {
                r.errs.push(format!("unknown key `{k}`"));
            }
        }
        let dim: usize = r.get("dim").unwrap_or(1);
        let m0: f64 = r.get("m0").unwrap_or(1.0);
        let unit = if m0 > 0.0 && m0.is_finite() { 1.0 / m0 } else { 1.0 };
        let (n_def, extent_def, width_def) = if dim == 3 {
            (64, 80.0 * unit, 4.0 * unit)
        } else {
            (1024, 400.0 * unit, 10.0 * unit)
        };
        let n = r.get("n").unwrap_or(n_def);
        let extent = r.get("extent").unwrap_or(extent_def);
        let center = r.vector("center").unwrap_or_else(|| vec![0.0; dim]);
        let width = r.get("width").unwrap_or(width_def);
        let pbar = r.vector("pbar").unwrap_or_else(|| vec![0.0; dim]);
        let branch = match map.get("branch").map(String::as_str) {
            None | Some("mixed") => Branch::Mixed,
            Some("pos") => Branch::Pos,
            Some("neg") => Branch::Neg,
            Some(other) => {
                r.errs.push(format!("branch: expected pos, neg or mixed, got `{other}`"));
                Branch::Mixed
            }
        };
        let w = std::f64::consts::FRAC_1_SQRT_2;
        let w_plus = r.get("w_plus").unwrap_or(w);
        let w_minus = r.get("w_minus").unwrap_or(w);
        let experiment = map.get("experiment").cloned().unwrap_or_else(|| "default".into());
        let samples = r.get("samples").unwrap_or(512);
        let span = r.get("span");
        let generator = match map.get("generator") {
            None => Generator::Hamiltonian,
            Some(g) => g.parse().unwrap_or_else(|_| {
                r.errs.push(format!("generator: expected H or T, got `{g}`"));
                Generator::Hamiltonian
            }),
        };
        let observables = map
            .get("observables")
            .map(|v| v.split(',').map(|s| s.trim().to_string()).filter(|s| !s.is_empty()).collect())
            .unwrap_or_else(|| {
                let mut v = vec!["norm".to_string()];
                v.extend((0..dim.min(3)).map(|a| format!("x_{a}")));
                v.extend((0..dim.min(3)).map(|a| format!("p_{a}")));
                v.extend(["beta", "H", "T"].map(String::from));
                v
            });
        let out = map.get("out").map(PathBuf::from).unwrap_or_else(|| PathBuf::from("out"));
        let seed = r.get("seed").unwrap_or(42);
        let random_states = r.get("random_states").unwrap_or(20);
        let corrupt_beta = r.get("corrupt_beta").unwrap_or(false);

        let mut errs = r.errs;
        let cfg = RunConfig {
            dim,
            n,
            extent,
            m0,
            center,
            width,
            pbar,
            branch,
            w_plus,
            w_minus,
            experiment,
            samples,
            span,
            generator,
            observables,
            out,
            seed,
            random_states,
            corrupt_beta,
        };
        errs.extend(cfg.violations());
        if errs.is_empty() {
            Ok(cfg)
        } else {
            Err(Error::Config(errs))
        }
    }

    fn violations(&self) -> Vec<String> {
        let mut out = Vec::new();
        let grid = match GridSpec::new(self.dim, self.n, self.extent) {
            Ok(g) => Some(g),
            Err(e) => {
                out.push(e.to_string());
                None
            }
        };
        if let Err(e) = PhysParams::new(self.m0) {
            out.push(e.to_string());
        }
        if let Some(g) = grid {
            out.extend(self.packet().violations(&g));
        }
        if self.samples < 2 {
            out.push(format!("samples must be at least 2, got {}", self.samples));
        }
        if let Some(s) = self.span {
            if !(s.is_finite() && s > 0.0) {
                out.push(format!("span must be positive, got {s}"));
            }
        }
        for o in &self.observables {
            match o.parse::<crate::dynamics::Observable>() {
                Ok(crate::dynamics::Observable::X(a))
                | Ok(crate::dynamics::Observable::P(a))
                | Ok(crate::dynamics::Observable::Alpha(a))
                    if a >= self.dim =>
                {
                    out.push(format!("observable `{o}` needs axis {a} but dim is {}", self.dim))
                }
                Ok(_) => {}
                Err(e) => out.push(e.to_string()),
            }
        }
        if self.random_states == 0 {
            out.push("random_states must be positive".into());
        }
        out
    }

    pub fn grid(&self) -> Result<GridSpec> {
        GridSpec::new(self.dim, self.n, self.extent)
    }

    pub fn packet(&self) -> PacketSpec {
        let mix = match self.branch {
            Branch::Pos => SpinorMix::Positive,
            Branch::Neg => SpinorMix::Negative,
            Branch::Mixed => SpinorMix::Mixed {
                w_plus: self.w_plus,
                w_minus: self.w_minus,
            },
        };
        PacketSpec::new(self.center.clone(), self.width, self.pbar.clone(), mix)
    }
}

impl Default for RunConfig {
    fn default() -> Self {
        Self::from_pairs(&BTreeMap::new()).expect("default configuration is valid")
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn pairs(text: &str) -> BTreeMap<String, String> {
        parse_pairs(text).unwrap()
    }

    #[test]
    fn defaults_are_valid() {
        let c = RunConfig::default();
        assert_eq!(c.dim, 1);
        assert_eq!(c.n, 1024);
        assert_eq!(c.branch, Branch::Mixed);
        let c3 = RunConfig::from_pairs(&pairs("dim = 3")).unwrap();
        assert_eq!(c3.n, 64);
        assert_eq!(c3.center.len(), 3);
    }

    #[test]
    fn parses_comments_and_vectors() {
        let c = RunConfig::from_pairs(&pairs(
            "# run\ndim = 3 # three\ncenter = 0.5, 0, -0.5\npbar=0,0,1\nbranch = pos\n",
        ))
        .unwrap();
        assert_eq!(c.center, vec![0.5, 0.0, -0.5]);
        assert_eq!(c.pbar, vec![0.0, 0.0, 1.0]);
        assert_eq!(c.branch, Branch::Pos);
    }

    #[test]
    fn reports_every_violation() {
        let err = RunConfig::from_pairs(&pairs(
            "n = 100\nm0 = -1\nbranch = up\nfoo = 1\nsamples = x\nobservables = x_1, spin",
        ))
        .unwrap_err();
        let Error::Config(list) = err else { panic!() };
        let joined = list.join("\n");
        for needle in ["unknown key `foo`", "branch", "samples", "power of two", "rest mass", "spin", "x_1"] {
            assert!(joined.contains(needle), "missing {needle} in {joined}");
        }
    }

    #[test]
    fn malformed_line_is_rejected() {
        assert!(parse_pairs("dim 3").is_err());
    }
}
