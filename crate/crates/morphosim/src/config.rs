//! Flat `key = value` configuration files.
//!
//! Blank lines and `#` comments are ignored. Every key may appear once;
//! unknown keys are rejected so that typos do not silently fall back to
//! defaults.

use std::collections::BTreeMap;
use std::f64::consts::PI;
use std::fmt;
use std::str::FromStr;

use morphosim_core::dynamics::{InitialCondition, SimConfig, StepControl};
use morphosim_core::stability::Range;
use morphosim_core::{CouplingFunction, Diffusion, Dim, ModelParams};

/// A configuration problem tied to a key and, when known, a line.
#[derive(Debug, Clone, PartialEq)]
pub struct ConfigError {
    pub line: Option<usize>,
    pub key: String,
    pub message: String,
}

impl ConfigError {
    fn new(line: Option<usize>, key: &str, message: impl Into<String>) -> Self {
        Self {
            line,
            key: key.to_string(),
            message: message.into(),
        }
    }
}

impl fmt::Display for ConfigError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.line {
            Some(line) => write!(f, "line {line}, `{}`: {}", self.key, self.message),
            None => write!(f, "`{}`: {}", self.key, self.message),
        }
    }
}

impl std::error::Error for ConfigError {}

/// Parsed but uninterpreted entries.
#[derive(Debug, Clone, Default)]
pub struct ConfigFile {
    entries: BTreeMap<String, (usize, String)>,
}

impl ConfigFile {
    pub fn parse(text: &str) -> Result<Self, ConfigError> {
        let mut entries = BTreeMap::new();
        for (idx, raw) in text.lines().enumerate() {
            let line = idx + 1;
            let content = raw.split('#').next().unwrap_or("").trim();
            if content.is_empty() {
                continue;
            }
            let Some((key, value)) = content.split_once('=') else {
                return Err(ConfigError::new(
                    Some(line),
                    content,
                    "expected `key = value`",
                ));
            };
            let (key, value) = (key.trim(), value.trim());
            if key.is_empty() {
                return Err(ConfigError::new(Some(line), "", "empty key"));
            }
            if entries
                .insert(key.to_string(), (line, value.to_string()))
                .is_some()
            {
                return Err(ConfigError::new(Some(line), key, "duplicate key"));
            }
        }
        Ok(Self { entries })
    }

    pub fn echo(&self) -> BTreeMap<String, String> {
        self.entries
            .iter()
            .map(|(k, (_, v))| (k.clone(), v.clone()))
            .collect()
    }

    fn line(&self, key: &str) -> Option<usize> {
        self.entries.get(key).map(|(l, _)| *l)
    }

    fn raw(&self, key: &str) -> Option<&str> {
        self.entries.get(key).map(|(_, v)| v.as_str())
    }

    fn get<T: FromStr>(&self, key: &str) -> Result<Option<T>, ConfigError> {
        match self.entries.get(key) {
            None => Ok(None),
            Some((line, v)) => v
                .parse()
                .map(Some)
                .map_err(|_| ConfigError::new(Some(*line), key, format!("cannot parse `{v}`"))),
        }
    }

    fn get_or<T: FromStr>(&self, key: &str, default: T) -> Result<T, ConfigError> {
        Ok(self.get(key)?.unwrap_or(default))
    }

    fn bool_or(&self, key: &str, default: bool) -> Result<bool, ConfigError> {
        match self.raw(key) {
            None => Ok(default),
            Some("true" | "yes" | "1") => Ok(true),
            Some("false" | "no" | "0") => Ok(false),
            Some(v) => Err(ConfigError::new(
                self.line(key),
                key,
                format!("expected a boolean, got `{v}`"),
            )),
        }
    }

    fn reject_unknown(&self, known: &[&str]) -> Result<(), ConfigError> {
        match self
            .entries
            .iter()
            .find(|(k, _)| !known.contains(&k.as_str()))
        {
            Some((k, (line, _))) => Err(ConfigError::new(Some(*line), k, "unknown key")),
            None => Ok(()),
        }
    }
}

pub fn parse_dim(s: &str) -> Result<Dim, String> {
    match s {
        "2" | "2d" | "2D" => Ok(Dim::Two),
        "3" | "3d" | "3D" => Ok(Dim::Three),
        _ => Err(format!("dimension must be 2 or 3, got `{s}`")),
    }
}

/// Parses `start:end:count`.
pub fn parse_range(s: &str) -> Result<Range, String> {
    let parts: Vec<&str> = s.split(':').map(str::trim).collect();
    let [a, b, n] = parts.as_slice() else {
        return Err(format!("expected start:end:count, got `{s}`"));
    };
    let (a, b): (f64, f64) = match (a.parse(), b.parse()) {
        (Ok(a), Ok(b)) => (a, b),
        _ => return Err(format!("range bounds must be numbers, got `{s}`")),
    };
    let n: usize = n
        .parse()
        .map_err(|_| format!("range count must be an integer, got `{n}`"))?;
    Range::new(a, b, n).map_err(|e| e.to_string())
}

/// Parses `k:amplitude` pairs separated by commas.
fn parse_modes(s: &str) -> Result<Vec<(usize, f64)>, String> {
    s.split(',')
        .map(|item| {
            let (k, a) = item
                .split_once(':')
                .ok_or_else(|| format!("expected k:amplitude, got `{item}`"))?;
            let k = k
                .trim()
                .parse()
                .map_err(|_| format!("bad mode index `{k}`"))?;
            let a = a
                .trim()
                .parse()
                .map_err(|_| format!("bad amplitude `{a}`"))?;
            Ok((k, a))
        })
        .collect()
}

const SIM_KEYS: &[&str] = &[
    "name",
    "dim",
    "nu",
    "pressure",
    "coupling",
    "d",
    "sigma",
    "gamma",
    "alpha",
    "beta",
    "inflating",
    "m",
    "length",
    "t_end",
    "output_interval",
    "modes",
    "initial",
    "perturbation",
    "random_count",
    "epsilon",
    "seed",
    "cfl",
    "max_dt",
    "diffusion_number",
    "project_closure",
    "max_steps",
    "snapshot_every",
    "mesh_every",
    "mesh_segments",
];

/// Everything `simulate` needs.
#[derive(Debug, Clone)]
pub struct RunConfig {
    pub name: String,
    pub sim: SimConfig,
    pub seed: u64,
    /// Profile snapshot every this many outputs; 0 disables.
    pub snapshot_every: usize,
    /// OBJ mesh every this many outputs; 0 disables. The final state is always meshed when enabled.
    pub mesh_every: usize,
    pub mesh_segments: usize,
    pub echo: BTreeMap<String, String>,
}

impl RunConfig {
    pub fn parse(text: &str) -> Result<Self, ConfigError> {
        Self::from_file(&ConfigFile::parse(text)?)
    }

    pub fn from_file(cfg: &ConfigFile) -> Result<Self, ConfigError> {
        cfg.reject_unknown(SIM_KEYS)?;
        let dim = match cfg.raw("dim") {
            None => Dim::Three,
            Some(v) => parse_dim(v).map_err(|e| ConfigError::new(cfg.line("dim"), "dim", e))?,
        };
        let coupling = match cfg.raw("coupling").unwrap_or("power") {
            "power" => CouplingFunction::Power(cfg.get_or("d", 4.0)?),
            "exponential" => {
                if cfg.raw("d").is_some() {
                    return Err(ConfigError::new(
                        cfg.line("d"),
                        "d",
                        "only used with coupling = power",
                    ));
                }
                CouplingFunction::Exponential
            }
            other => {
                return Err(ConfigError::new(
                    cfg.line("coupling"),
                    "coupling",
                    format!("expected `power` or `exponential`, got `{other}`"),
                ))
            }
        };
        let physical = ["gamma", "alpha", "beta"].map(|k| cfg.raw(k).is_some());
        let diffusion = match (cfg.get::<f64>("sigma")?, physical) {
            (Some(s), [false, false, false]) => Diffusion::Reduced(s),
            (None, [true, true, true]) => Diffusion::Physical {
                gamma: cfg.get_or("gamma", 0.0)?,
                alpha: cfg.get_or("alpha", 0.0)?,
                beta: cfg.get_or("beta", 0.0)?,
            },
            (Some(_), _) => {
                return Err(ConfigError::new(
                    cfg.line("sigma"),
                    "sigma",
                    "give either sigma or gamma/alpha/beta, not both",
                ))
            }
            (None, _) => {
                return Err(ConfigError::new(
                    None,
                    "sigma",
                    "missing: give sigma or all of gamma, alpha, beta",
                ))
            }
        };
        let params = ModelParams {
            pressure: cfg.get_or("pressure", 1.0)?,
            poisson: cfg.get_or("nu", 0.5)?,
            coupling,
            diffusion,
            dim,
            inflating: cfg.bool_or("inflating", false)?,
        };

        let seed = cfg.get_or("seed", 1u64)?;
        let initial = match cfg.raw("initial").unwrap_or("random") {
            "sphere" => InitialCondition::Sphere,
            "random" => InitialCondition::Random {
                seed,
                count: cfg.get_or("random_count", 10)?,
                epsilon: cfg.get_or("epsilon", 0.05 * PI)?,
            },
            "modes" => {
                let raw = cfg.raw("perturbation").ok_or_else(|| {
                    ConfigError::new(None, "perturbation", "required when initial = modes")
                })?;
                let modes = parse_modes(raw)
                    .map_err(|e| ConfigError::new(cfg.line("perturbation"), "perturbation", e))?;
                InitialCondition::Modes(modes)
            }
            other => {
                return Err(ConfigError::new(
                    cfg.line("initial"),
                    "initial",
                    format!("expected sphere, random or modes, got `{other}`"),
                ))
            }
        };

        let defaults = SimConfig::new(params);
        let control = StepControl {
            cfl: cfg.get_or("cfl", defaults.control.cfl)?,
            max_dt: cfg.get_or("max_dt", defaults.control.max_dt)?,
            diffusion_number: cfg.get_or("diffusion_number", defaults.control.diffusion_number)?,
        };
        let sim = SimConfig {
            params,
            m: cfg.get_or("m", defaults.m)?,
            length0: cfg.get_or("length", defaults.length0)?,
            control,
            t_end: cfg.get_or("t_end", defaults.t_end)?,
            initial,
            output_interval: cfg.get_or("output_interval", defaults.output_interval)?,
            modes: cfg.get_or("modes", defaults.modes)?,
            project_closure: cfg.bool_or("project_closure", false)?,
            max_steps: cfg.get_or("max_steps", defaults.max_steps)?,
        };
        sim.validate().map_err(|e| match e {
            morphosim_core::Error::InvalidParameter { name, reason } => {
                ConfigError::new(cfg.line(name), name, reason)
            }
            other => ConfigError::new(None, "config", other.to_string()),
        })?;

        let mesh_segments = cfg.get_or("mesh_segments", 48)?;
        if mesh_segments < 3 {
            return Err(ConfigError::new(
                cfg.line("mesh_segments"),
                "mesh_segments",
                "need at least 3",
            ));
        }
        Ok(Self {
            name: cfg.raw("name").unwrap_or("run").to_string(),
            sim,
            seed,
            snapshot_every: cfg.get_or("snapshot_every", 10)?,
            mesh_every: cfg.get_or("mesh_every", 0)?,
            mesh_segments,
            echo: cfg.echo(),
        })
    }

    /// Replaces the seed of random initial data.
    pub fn with_seed(mut self, seed: u64) -> Self {
        self.seed = seed;
        if let InitialCondition::Random { seed: s, .. } = &mut self.sim.initial {
            *s = seed;
        }
        self.echo.insert("seed".into(), seed.to_string());
        self
    }
}

/// Settings of a stability-region scan.
#[derive(Debug, Clone)]
pub struct ScanConfig {
    pub dim: Dim,
    pub nus: Vec<f64>,
    pub d_range: Range,
    pub sigma_range: Range,
}

impl Default for ScanConfig {
    fn default() -> Self {
        Self {
            dim: Dim::Three,
            nus: vec![0.5],
            d_range: Range::new(2.0, 8.0, 100).expect("valid range"),
            sigma_range: Range::new(0.01, 0.5, 100).expect("valid range"),
        }
    }
}

const SCAN_KEYS: &[&str] = &["name", "dim", "nu", "d_range", "sigma_range"];

impl ScanConfig {
    pub fn parse(text: &str) -> Result<Self, ConfigError> {
        let cfg = ConfigFile::parse(text)?;
        cfg.reject_unknown(SCAN_KEYS)?;
        let mut out = Self::default();
        let field = |key: &str, e: String| ConfigError::new(cfg.line(key), key, e);
        if let Some(v) = cfg.raw("dim") {
            out.dim = parse_dim(v).map_err(|e| field("dim", e))?;
        }
        if let Some(v) = cfg.raw("nu") {
            out.nus = parse_list(v).map_err(|e| field("nu", e))?;
        }
        if let Some(v) = cfg.raw("d_range") {
            out.d_range = parse_range(v).map_err(|e| field("d_range", e))?;
        }
        if let Some(v) = cfg.raw("sigma_range") {
            out.sigma_range = parse_range(v).map_err(|e| field("sigma_range", e))?;
        }
        out.validate().map_err(|e| field("nu", e))?;
        Ok(out)
    }

    pub fn validate(&self) -> Result<(), String> {
        if self.nus.is_empty() {
            return Err("need at least one Poisson ratio".into());
        }
        if self.dim == Dim::Three && self.nus.iter().any(|&nu| !(nu > 0.0 && nu < 1.0)) {
            return Err("Poisson ratios must lie in (0, 1)".into());
        }
        Ok(())
    }
}

/// Comma-separated numbers.
pub fn parse_list(s: &str) -> Result<Vec<f64>, String> {
    s.split(',')
        .map(|v| {
            v.trim()
                .parse()
                .map_err(|_| format!("cannot parse `{}` as a number", v.trim()))
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_a_minimal_file() {
        let cfg =
            RunConfig::parse("# stable\nsigma = 0.1\nd = 4\nm = 50\ninitial = sphere\n").unwrap();
        assert_eq!(cfg.sim.m, 50);
        assert_eq!(cfg.sim.params.diffusion, Diffusion::Reduced(0.1));
        assert_eq!(cfg.sim.params.coupling, CouplingFunction::Power(4.0));
        assert_eq!(cfg.sim.initial, InitialCondition::Sphere);
        assert_eq!(cfg.echo["m"], "50");
    }

    #[test]
    fn errors_name_the_field() {
        let e = RunConfig::parse("sigma = 0.1\nm = ten\n").unwrap_err();
        assert_eq!((e.line, e.key.as_str()), (Some(2), "m"));
        let e = RunConfig::parse("sigma = 0.1\nsgima = 2\n").unwrap_err();
        assert_eq!(e.key, "sgima");
        assert!(e.message.contains("unknown"));
        let e = RunConfig::parse("sigma = -1\n").unwrap_err();
        assert_eq!((e.line, e.key.as_str()), (Some(1), "sigma"));
        let e = RunConfig::parse("sigma = 0.1\nsigma = 0.2\n").unwrap_err();
        assert!(e.message.contains("duplicate"));
        let e = RunConfig::parse("sigma = 0.1\ninflating = true\n").unwrap_err();
        assert_eq!(e.key, "inflating");
        assert!(RunConfig::parse("gamma = 1\nalpha = 1\n").is_err());
    }

    #[test]
    fn seed_override_reaches_initial_data() {
        let cfg = RunConfig::parse("sigma = 0.1\nseed = 3\n")
            .unwrap()
            .with_seed(9);
        assert!(matches!(
            cfg.sim.initial,
            InitialCondition::Random { seed: 9, .. }
        ));
        assert_eq!(cfg.echo["seed"], "9");
    }

    #[test]
    fn mode_lists_and_ranges() {
        let cfg =
            RunConfig::parse("sigma = 0.1\ninitial = modes\nperturbation = 3:1e-4, 5:-2e-4\n")
                .unwrap();
        assert_eq!(
            cfg.sim.initial,
            InitialCondition::Modes(vec![(3, 1e-4), (5, -2e-4)])
        );
        let r = parse_range("0.01:0.5:50").unwrap();
        assert_eq!((r.start, r.end, r.count), (0.01, 0.5, 50));
        assert!(parse_range("1:2").is_err());
        let scan = ScanConfig::parse("dim = 3\nnu = 0.1, 0.5\nd_range = 2:8:10\n").unwrap();
        assert_eq!(scan.nus, vec![0.1, 0.5]);
        assert!(ScanConfig::parse("nu = 1.5").is_err());
    }
}
