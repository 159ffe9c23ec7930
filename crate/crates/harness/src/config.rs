//! Flat `key = value` run configuration with flag overrides.

use std::fmt;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use sie_core::{InitialCondition, SolverKind, StepperConfig, StudyConfig};

/// Where a configuration value came from.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub enum Location {
    Line {
        source: String,
        line: usize,
    },
    Flag,
    #[default]
    Default,
}

impl fmt::Display for Location {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Self::Line { source, line } => write!(f, "{source}:{line}"),
            Self::Flag => f.write_str("command line"),
            Self::Default => f.write_str("defaults"),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum ConfigError {
    #[error("{location}: unknown key `{key}`")]
    UnknownKey { key: String, location: Location },
    #[error("{location}: duplicate key `{key}` (first set at {first})")]
    DuplicateKey {
        key: String,
        location: Location,
        first: Location,
    },
    #[error("{location}: expected `key = value`, found `{text}`")]
    Syntax { text: String, location: Location },
    #[error("{location}: invalid value `{value}` for `{key}`: {reason}")]
    Invalid {
        key: String,
        value: String,
        reason: String,
        location: Location,
    },
    #[error("missing required key `{key}` for mode {mode}")]
    Missing { key: &'static str, mode: Mode },
    #[error("cannot read {path}: {reason}")]
    Io { path: String, reason: String },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Mode {
    Simulate,
    Converge,
    ProbOrder,
    Selfcheck,
}

impl Mode {
    pub fn name(self) -> &'static str {
        match self {
            Self::Simulate => "simulate",
            Self::Converge => "converge",
            Self::ProbOrder => "prob-order",
            Self::Selfcheck => "selfcheck",
        }
    }
}

impl fmt::Display for Mode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Mode {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        match s {
            "simulate" => Ok(Self::Simulate),
            "converge" => Ok(Self::Converge),
            "prob-order" => Ok(Self::ProbOrder),
            "selfcheck" => Ok(Self::Selfcheck),
            _ => Err("expected simulate, converge, prob-order or selfcheck".into()),
        }
    }
}

pub const KEYS: &[&str] = &[
    "mode",
    "N",
    "T",
    "n",
    "levels",
    "c0",
    "r",
    "paths",
    "seed",
    "path_id",
    "xi0",
    "out",
    "workers",
    "solver",
    "fp_tol",
    "fp_max_iter",
    "dense_dim_cap",
    "diagnostics",
    "ref_extra",
    "betas",
    "dump_noise",
];

/// Fully validated run configuration.
#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub mode: Mode,
    pub n_modes: usize,
    pub t_end: f64,
    /// Step count for `simulate`.
    pub steps: usize,
    /// Step counts for `converge` and `prob-order`.
    pub levels: Vec<usize>,
    pub c0: f64,
    pub r: f64,
    pub paths: usize,
    pub seed: u64,
    pub path_id: u64,
    pub xi0: InitialCondition,
    pub out: PathBuf,
    pub workers: usize,
    pub solver: SolverKind,
    pub fp_tol: f64,
    pub fp_max_iter: usize,
    pub dense_dim_cap: usize,
    pub diagnostics: bool,
    pub ref_extra: u32,
    pub betas: Vec<f64>,
    pub dump_noise: bool,
}

/// Raw `(key, value)` entries before typing.
#[derive(Debug, Clone, Default)]
pub struct Entries {
    items: Vec<(String, String, Location)>,
}

impl Entries {
    /// Parses configuration text. `#` starts a comment.
    pub fn parse(text: &str, source: &str) -> Result<Self, ConfigError> {
        let mut entries = Self::default();
        for (i, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let location = Location::Line {
                source: source.to_string(),
                line: i + 1,
            };
            let Some((key, value)) = line.split_once('=') else {
                return Err(ConfigError::Syntax {
                    text: line.to_string(),
                    location,
                });
            };
            entries.insert(key.trim(), value.trim(), location)?;
        }
        Ok(entries)
    }

    pub fn read(path: &Path) -> Result<Self, ConfigError> {
        let text = std::fs::read_to_string(path).map_err(|e| ConfigError::Io {
            path: path.display().to_string(),
            reason: e.to_string(),
        })?;
        Self::parse(&text, &path.display().to_string())
    }

    fn insert(&mut self, key: &str, value: &str, location: Location) -> Result<(), ConfigError> {
        if !KEYS.contains(&key) {
            return Err(ConfigError::UnknownKey {
                key: key.to_string(),
                location,
            });
        }
        if let Some((_, _, first)) = self.items.iter().find(|(k, _, _)| k == key) {
            return Err(ConfigError::DuplicateKey {
                key: key.to_string(),
                location,
                first: first.clone(),
            });
        }
        self.items
            .push((key.to_string(), value.to_string(), location));
        Ok(())
    }

    /// Sets `key` from the command line, replacing any file value.
    pub fn set_flag(&mut self, key: &str, value: &str) -> Result<(), ConfigError> {
        self.items.retain(|(k, _, _)| k != key);
        self.insert(key, value, Location::Flag)
    }

    fn get(&self, key: &str) -> Option<(&str, &Location)> {
        self.items
            .iter()
            .find(|(k, _, _)| k == key)
            .map(|(_, v, l)| (v.as_str(), l))
    }

    fn typed<T>(
        &self,
        key: &'static str,
        parse: impl Fn(&str) -> Result<T, String>,
    ) -> Result<Option<T>, ConfigError> {
        match self.get(key) {
            None => Ok(None),
            Some((value, location)) => {
                parse(value)
                    .map(Some)
                    .map_err(|reason| ConfigError::Invalid {
                        key: key.to_string(),
                        value: value.to_string(),
                        reason,
                        location: location.clone(),
                    })
            }
        }
    }

    fn invalid(&self, key: &'static str, reason: &str) -> ConfigError {
        let (value, location) = self
            .get(key)
            .map(|(v, l)| (v.to_string(), l.clone()))
            .unwrap_or_default();
        ConfigError::Invalid {
            key: key.to_string(),
            value,
            reason: reason.to_string(),
            location,
        }
    }

    /// Types, defaults and validates the entries. `mode` overrides any `mode` key.
    pub fn resolve(&self, mode: Option<Mode>) -> Result<RunConfig, ConfigError> {
        let mode = match mode {
            Some(m) => m,
            None => self
                .typed("mode", |s| s.parse())?
                .ok_or(ConfigError::Missing {
                    key: "mode",
                    mode: Mode::Selfcheck,
                })?,
        };
        let needs_study = matches!(mode, Mode::Converge | Mode::ProbOrder);
        let required = |key: &'static str, needed: bool| -> Result<(), ConfigError> {
            if needed && self.get(key).is_none() {
                return Err(ConfigError::Missing { key, mode });
            }
            Ok(())
        };
        required("N", mode != Mode::Selfcheck)?;
        required("T", mode != Mode::Selfcheck)?;
        required("n", mode == Mode::Simulate)?;
        required("levels", needs_study)?;

        let defaults = StepperConfig::new(1.0);
        let cfg = RunConfig {
            mode,
            n_modes: self.typed("N", parse_positive_usize)?.unwrap_or(4),
            t_end: self.typed("T", parse_positive_f64)?.unwrap_or(0.5),
            steps: self.typed("n", parse_positive_usize)?.unwrap_or(64),
            levels: self
                .typed("levels", parse_levels)?
                .unwrap_or_else(|| vec![16, 32, 64]),
            c0: self.typed("c0", parse_f64)?.unwrap_or(0.1),
            r: self.typed("r", parse_f64)?.unwrap_or(6.0),
            paths: self
                .typed("paths", parse_positive_usize)?
                .unwrap_or(if mode == Mode::ProbOrder { 50 } else { 3 }),
            seed: self.typed("seed", parse_u64)?.unwrap_or(0),
            path_id: self.typed("path_id", parse_u64)?.unwrap_or(0),
            xi0: self
                .typed("xi0", parse_initial)?
                .unwrap_or(InitialCondition::Preset3Mode),
            out: self
                .typed("out", |s| Ok(PathBuf::from(s)))?
                .unwrap_or_else(|| PathBuf::from("sie-out")),
            workers: self.typed("workers", parse_positive_usize)?.unwrap_or(1),
            solver: self
                .typed("solver", parse_solver)?
                .unwrap_or(defaults.solver),
            fp_tol: self
                .typed("fp_tol", parse_positive_f64)?
                .unwrap_or(defaults.fp_tol),
            fp_max_iter: self
                .typed("fp_max_iter", parse_positive_usize)?
                .unwrap_or(defaults.fp_max_iter),
            dense_dim_cap: self
                .typed("dense_dim_cap", parse_usize)?
                .unwrap_or(defaults.dense_dim_cap),
            diagnostics: self.typed("diagnostics", parse_bool)?.unwrap_or(true),
            ref_extra: self.typed("ref_extra", parse_u32)?.unwrap_or(2),
            betas: self
                .typed("betas", parse_betas)?
                .unwrap_or_else(|| vec![0.6, 0.75, 0.9]),
            dump_noise: self.typed("dump_noise", parse_bool)?.unwrap_or(false),
        };
        if !(cfg.r.is_finite() && cfg.r > 0.0) {
            return Err(self.invalid("r", "decay exponent must be positive"));
        }
        if !(cfg.c0.is_finite() && cfg.c0 >= 0.0) {
            return Err(self.invalid("c0", "noise amplitude must be finite and non-negative"));
        }
        if cfg.n_modes > i32::MAX as usize / 2 {
            return Err(self.invalid("N", "truncation radius is too large"));
        }
        if needs_study {
            cfg.study()
                .validate()
                .map_err(|e| self.invalid("levels", &e.to_string()))?;
        }
        Ok(cfg)
    }
}

impl RunConfig {
    /// Parses a configuration file, applies `(key, value)` flag overrides, validates.
    pub fn load(
        path: Option<&Path>,
        flags: &[(&str, String)],
        mode: Option<Mode>,
    ) -> Result<Self, ConfigError> {
        let mut entries = match path {
            Some(p) => Entries::read(p)?,
            None => Entries::default(),
        };
        for (key, value) in flags {
            entries.set_flag(key, value)?;
        }
        entries.resolve(mode)
    }

    pub fn parse_text(text: &str) -> Result<Self, ConfigError> {
        Entries::parse(text, "<text>")?.resolve(None)
    }

    pub fn stepper(&self) -> StepperConfig {
        let mut cfg = StepperConfig::new(self.t_end / self.steps as f64);
        cfg.solver = self.solver;
        cfg.fp_tol = self.fp_tol;
        cfg.fp_max_iter = self.fp_max_iter;
        cfg.dense_dim_cap = self.dense_dim_cap;
        cfg.diagnostics = self.diagnostics;
        cfg
    }

    pub fn study(&self) -> StudyConfig {
        let mut study = StudyConfig::new(self.n_modes, self.t_end, self.levels.clone());
        study.initial = self.xi0;
        study.c0 = self.c0;
        study.decay = self.r;
        study.ref_extra = self.ref_extra;
        study.paths = self.paths;
        study.master_seed = self.seed;
        study.stepper = self.stepper();
        study.stepper.diagnostics = false;
        study
    }

    /// The effective configuration as `key = value` text that re-parses to `self`.
    pub fn to_text(&self) -> String {
        let join = |v: &[String]| v.join(",");
        let lines = [
            ("mode", self.mode.name().to_string()),
            ("N", self.n_modes.to_string()),
            ("T", self.t_end.to_string()),
            ("n", self.steps.to_string()),
            (
                "levels",
                join(
                    &self
                        .levels
                        .iter()
                        .map(|l| l.to_string())
                        .collect::<Vec<_>>(),
                ),
            ),
            ("c0", self.c0.to_string()),
            ("r", self.r.to_string()),
            ("paths", self.paths.to_string()),
            ("seed", self.seed.to_string()),
            ("path_id", self.path_id.to_string()),
            ("xi0", format_initial(&self.xi0)),
            ("out", self.out.display().to_string()),
            ("workers", self.workers.to_string()),
            ("solver", format_solver(self.solver).to_string()),
            ("fp_tol", self.fp_tol.to_string()),
            ("fp_max_iter", self.fp_max_iter.to_string()),
            ("dense_dim_cap", self.dense_dim_cap.to_string()),
            ("diagnostics", self.diagnostics.to_string()),
            ("ref_extra", self.ref_extra.to_string()),
            (
                "betas",
                join(&self.betas.iter().map(|b| b.to_string()).collect::<Vec<_>>()),
            ),
            ("dump_noise", self.dump_noise.to_string()),
        ];
        lines.iter().map(|(k, v)| format!("{k} = {v}\n")).collect()
    }
}

fn parse_f64(s: &str) -> Result<f64, String> {
    s.parse::<f64>().map_err(|e| e.to_string())
}

fn parse_positive_f64(s: &str) -> Result<f64, String> {
    let v = parse_f64(s)?;
    if v > 0.0 && v.is_finite() {
        Ok(v)
    } else {
        Err("must be a positive finite number".into())
    }
}

fn parse_usize(s: &str) -> Result<usize, String> {
    s.parse::<usize>().map_err(|e| e.to_string())
}

fn parse_positive_usize(s: &str) -> Result<usize, String> {
    match parse_usize(s)? {
        0 => Err("must be positive".into()),
        v => Ok(v),
    }
}

fn parse_u64(s: &str) -> Result<u64, String> {
    s.parse::<u64>().map_err(|e| e.to_string())
}

fn parse_u32(s: &str) -> Result<u32, String> {
    s.parse::<u32>().map_err(|e| e.to_string())
}

fn parse_bool(s: &str) -> Result<bool, String> {
    match s {
        "true" | "yes" | "1" => Ok(true),
        "false" | "no" | "0" => Ok(false),
        _ => Err("expected true or false".into()),
    }
}

/// `16,32,64` or the dyadic range `16..512`.
pub fn parse_levels(s: &str) -> Result<Vec<usize>, String> {
    if let Some((lo, hi)) = s.split_once("..") {
        let lo = parse_positive_usize(lo.trim())?;
        let hi = parse_positive_usize(hi.trim())?;
        let mut levels = vec![lo];
        while *levels.last().unwrap() < hi {
            let next = levels
                .last()
                .unwrap()
                .checked_mul(2)
                .ok_or("range overflows")?;
            levels.push(next);
        }
        if *levels.last().unwrap() != hi {
            return Err(format!("{hi} is not {lo} times a power of two"));
        }
        return Ok(levels);
    }
    s.split(',')
        .map(|p| parse_positive_usize(p.trim()))
        .collect()
}

fn parse_betas(s: &str) -> Result<Vec<f64>, String> {
    let betas: Vec<f64> = s
        .split(',')
        .map(|p| parse_f64(p.trim()))
        .collect::<Result<_, _>>()?;
    if betas.iter().any(|&b| !(b > 0.0 && b < 1.0)) {
        return Err("exponents must lie in (0, 1)".into());
    }
    Ok(betas)
}

fn parse_solver(s: &str) -> Result<SolverKind, String> {
    match s {
        "fixed-point" => Ok(SolverKind::FixedPoint),
        "dense" => Ok(SolverKind::Dense),
        _ => Err("expected fixed-point or dense".into()),
    }
}

fn format_solver(kind: SolverKind) -> &'static str {
    match kind {
        SolverKind::FixedPoint => "fixed-point",
        SolverKind::Dense => "dense",
    }
}

/// `preset-3mode`, `random-smooth(s, seed)` or `mode(k1, k2)`.
pub fn parse_initial(s: &str) -> Result<InitialCondition, String> {
    if s == "preset-3mode" {
        return Ok(InitialCondition::Preset3Mode);
    }
    let call = |name: &str| {
        s.strip_prefix(name)
            .and_then(|rest| rest.strip_prefix('('))
            .and_then(|rest| rest.strip_suffix(')'))
            .map(|args| args.split(',').map(str::trim).collect::<Vec<_>>())
    };
    if let Some(args) = call("random-smooth") {
        if let [decay, seed] = args[..] {
            let decay = parse_f64(decay)?;
            if !(decay.is_finite() && decay >= 0.0) {
                return Err("smoothness exponent must be finite and non-negative".into());
            }
            return Ok(InitialCondition::RandomSmooth {
                decay,
                seed: parse_u64(seed)?,
            });
        }
    }
    if let Some(args) = call("mode") {
        if let [k1, k2] = args[..] {
            let k1 = k1.parse::<i32>().map_err(|e| e.to_string())?;
            let k2 = k2.parse::<i32>().map_err(|e| e.to_string())?;
            if (k1, k2) == (0, 0) {
                return Err("the zero mode is excluded".into());
            }
            return Ok(InitialCondition::SingleMode { k1, k2 });
        }
    }
    Err("expected preset-3mode, random-smooth(s, seed) or mode(k1, k2)".into())
}

pub fn format_initial(ic: &InitialCondition) -> String {
    match *ic {
        InitialCondition::Preset3Mode => "preset-3mode".into(),
        InitialCondition::RandomSmooth { decay, seed } => format!("random-smooth({decay}, {seed})"),
        InitialCondition::SingleMode { k1, k2 } => format!("mode({k1}, {k2})"),
    }
}
