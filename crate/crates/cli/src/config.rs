//! Flat `key = value` run configuration.
//!
//! A config file holds one assignment per line; blank lines and lines
//! starting with `#` are ignored. Command-line `--set key=value` overrides
//! are applied on top of the file. Unknown keys are rejected so that typos
//! never silently fall back to defaults.

use std::collections::BTreeMap;
use std::fmt;
use std::path::Path;
use std::str::FromStr;

use crescent_core::wigner::Window;
use crescent_core::{Complex64, ProtocolParams, DEFAULT_LEAK_TOL, DEFAULT_TAIL_TOL};

use crate::CliError;

/// Every key the parser understands.
pub const KNOWN_KEYS: &[&str] = &[
    "task",
    "alpha_mag",
    "alpha_phase",
    "beta_mag",
    "beta_phase",
    "gamma",
    "dim",
    "tail_tol",
    "leak_tol",
    "x_list",
    "wigner_state",
    "wigner_x",
    "wigner_window",
    "wigner_half_width",
    "wigner_points",
    "wigner_x_range",
    "wigner_p_range",
    "wigner_radial_cut",
    "wigner_radial_points",
    "fidelity_x_range",
    "fidelity_points",
    "fidelity_threshold",
    "support_fraction",
    "scan_axis",
    "scan_values",
    "scan_product",
    "scan_x",
    "scan_purity",
];

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Task {
    PhotonStats,
    Wigner,
    Fidelity,
    Ensemble,
    Scan,
}

impl Task {
    pub fn name(self) -> &'static str {
        match self {
            Task::PhotonStats => "photon-stats",
            Task::Wigner => "wigner",
            Task::Fidelity => "fidelity",
            Task::Ensemble => "ensemble",
            Task::Scan => "scan",
        }
    }
}

impl FromStr for Task {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "photon-stats" => Ok(Task::PhotonStats),
            "wigner" => Ok(Task::Wigner),
            "fidelity" => Ok(Task::Fidelity),
            "ensemble" => Ok(Task::Ensemble),
            "scan" => Ok(Task::Scan),
            _ => Err(format!(
                "unknown task `{s}` (expected photon-stats, wigner, fidelity, ensemble or scan)"
            )),
        }
    }
}

impl fmt::Display for Task {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// Which state the Wigner task samples.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum WignerState {
    /// `|ψ(x)⟩` at the given outcome.
    Conditional(f64),
    /// The feed-forward ensemble `ρ`.
    Ensemble,
}

#[derive(Debug, Clone, PartialEq)]
pub struct WignerSettings {
    pub state: WignerState,
    pub window: Window,
    pub points: usize,
    pub radial_cut: bool,
    pub radial_points: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct FidelitySettings {
    /// Outcome range; `None` uses the adapted integration window.
    pub range: Option<(f64, f64)>,
    pub points: usize,
    pub threshold: f64,
    /// Outcomes with `P(x) ≥ support_fraction · max P` form the support.
    pub support_fraction: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SweepAxis {
    /// Sweep `γ|β|` at fixed `γ` and `|α|`.
    GammaBeta,
    /// Sweep `|α|` at fixed `γ` and fixed product `γ|αβ|`.
    AlphaMag,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ScanSettings {
    pub axis: SweepAxis,
    pub values: Vec<f64>,
    /// `γ|αβ|` held fixed by the `alpha_mag` sweep.
    pub product: f64,
    /// Outcome at which the conditional-state columns are evaluated.
    pub x: f64,
    pub purity: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub task: Option<Task>,
    pub alpha_mag: f64,
    pub alpha_phase: f64,
    pub beta_mag: f64,
    pub beta_phase: Option<f64>,
    pub gamma: f64,
    pub dim: Option<usize>,
    pub tail_tol: f64,
    pub leak_tol: f64,
    pub x_list: Vec<f64>,
    pub wigner: WignerSettings,
    pub fidelity: FidelitySettings,
    pub scan: ScanSettings,
}

fn config_err(msg: impl Into<String>) -> CliError {
    CliError::Config(msg.into())
}

/// Parses `key = value` lines. Repeated keys are an error.
pub fn parse_assignments(text: &str, origin: &str) -> Result<BTreeMap<String, String>, CliError> {
    let mut map = BTreeMap::new();
    for (lineno, raw) in text.lines().enumerate() {
        let line = raw.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let (k, v) = split_assignment(line).ok_or_else(|| {
            config_err(format!("{origin}:{}: expected `key = value`", lineno + 1))
        })?;
        if map.insert(k.to_string(), v.to_string()).is_some() {
            return Err(config_err(format!(
                "{origin}:{}: key `{k}` given twice",
                lineno + 1
            )));
        }
    }
    Ok(map)
}

fn split_assignment(s: &str) -> Option<(&str, &str)> {
    let (k, v) = s.split_once('=')?;
    let k = k.trim();
    if k.is_empty() {
        return None;
    }
    Some((k, v.trim()))
}

/// Reads an optional config file and applies `key=value` overrides.
pub fn load(path: Option<&Path>, overrides: &[String]) -> Result<RunConfig, CliError> {
    let mut map = match path {
        Some(p) => {
            let text = std::fs::read_to_string(p)
                .map_err(|e| config_err(format!("cannot read config {}: {e}", p.display())))?;
            parse_assignments(&text, &p.display().to_string())?
        }
        None => BTreeMap::new(),
    };
    for o in overrides {
        let (k, v) = split_assignment(o)
            .ok_or_else(|| config_err(format!("--set expects key=value, got `{o}`")))?;
        map.insert(k.to_string(), v.to_string());
    }
    RunConfig::from_map(map)
}

/// Pulls typed values out of the assignment map, remembering what was used.
struct Keys {
    map: BTreeMap<String, String>,
}

impl Keys {
    fn take(&mut self, key: &str) -> Option<String> {
        debug_assert!(KNOWN_KEYS.contains(&key), "{key} missing from KNOWN_KEYS");
        self.map.remove(key)
    }

    fn parse<T: FromStr>(&mut self, key: &str) -> Result<Option<T>, CliError>
    where
        T::Err: fmt::Display,
    {
        match self.take(key) {
            None => Ok(None),
            Some(v) => v
                .parse::<T>()
                .map(Some)
                .map_err(|e| config_err(format!("invalid value `{v}` for `{key}`: {e}"))),
        }
    }

    fn required_f64(&mut self, key: &str) -> Result<f64, CliError> {
        let v: f64 = self
            .parse(key)?
            .ok_or_else(|| config_err(format!("missing required key `{key}`")))?;
        finite(key, v)
    }

    fn f64_or(&mut self, key: &str, default: f64) -> Result<f64, CliError> {
        let v = self.parse(key)?.unwrap_or(default);
        finite(key, v)
    }

    fn list(&mut self, key: &str) -> Result<Option<Vec<f64>>, CliError> {
        let Some(v) = self.take(key) else {
            return Ok(None);
        };
        let items: Result<Vec<f64>, CliError> = v
            .split(',')
            .map(str::trim)
            .filter(|s| !s.is_empty())
            .map(|s| {
                let x = s
                    .parse::<f64>()
                    .map_err(|e| config_err(format!("invalid entry `{s}` in `{key}`: {e}")))?;
                finite(key, x)
            })
            .collect();
        Ok(Some(items?))
    }

    fn range(&mut self, key: &str) -> Result<Option<(f64, f64)>, CliError> {
        match self.list(key)? {
            None => Ok(None),
            Some(v) if v.len() == 2 && v[0] < v[1] => Ok(Some((v[0], v[1]))),
            Some(_) => Err(config_err(format!(
                "`{key}` must be two increasing numbers `lo,hi`"
            ))),
        }
    }

    fn flag(&mut self, key: &str, default: bool) -> Result<bool, CliError> {
        match self.take(key).as_deref() {
            None => Ok(default),
            Some("true") | Some("yes") | Some("1") => Ok(true),
            Some("false") | Some("no") | Some("0") => Ok(false),
            Some(v) => Err(config_err(format!(
                "invalid value `{v}` for `{key}`: expected true or false"
            ))),
        }
    }
}

fn finite(key: &str, v: f64) -> Result<f64, CliError> {
    if v.is_finite() {
        Ok(v)
    } else {
        Err(config_err(format!("`{key}` must be finite")))
    }
}

fn positive_count(key: &str, n: usize, min: usize) -> Result<usize, CliError> {
    if n < min {
        Err(config_err(format!("`{key}` must be at least {min}")))
    } else {
        Ok(n)
    }
}

impl RunConfig {
    pub fn from_map(map: BTreeMap<String, String>) -> Result<Self, CliError> {
        if let Some(k) = map.keys().find(|k| !KNOWN_KEYS.contains(&k.as_str())) {
            return Err(config_err(format!("unknown key `{k}`")));
        }
        let mut keys = Keys { map };

        let task = keys.parse::<Task>("task")?;
        let alpha_mag = keys.required_f64("alpha_mag")?;
        let alpha_phase = keys.f64_or("alpha_phase", 0.0)?;
        let beta_mag = keys.required_f64("beta_mag")?;
        let beta_phase = match keys.parse::<f64>("beta_phase")? {
            Some(v) => Some(finite("beta_phase", v)?),
            None => None,
        };
        let gamma = keys.required_f64("gamma")?;
        let dim = keys.parse::<usize>("dim")?;
        let tail_tol = keys.f64_or("tail_tol", DEFAULT_TAIL_TOL)?;
        let leak_tol = keys.f64_or("leak_tol", DEFAULT_LEAK_TOL)?;

        let x_list = keys.list("x_list")?.unwrap_or_else(|| vec![-4.0, 0.0, 4.0]);
        if x_list.is_empty() {
            return Err(config_err("`x_list` is empty: give at least one outcome"));
        }

        let state = match keys.take("wigner_state").as_deref() {
            None | Some("conditional") => WignerState::Conditional(keys.f64_or("wigner_x", 0.0)?),
            Some("ensemble") => {
                if keys.take("wigner_x").is_some() {
                    return Err(config_err(
                        "`wigner_x` only applies to wigner_state = conditional",
                    ));
                }
                WignerState::Ensemble
            }
            Some(v) => {
                return Err(config_err(format!(
                    "invalid value `{v}` for `wigner_state`: expected conditional or ensemble"
                )))
            }
        };
        let half_width = keys.f64_or("wigner_half_width", 12.0)?;
        let x_range = keys.range("wigner_x_range")?;
        let p_range = keys.range("wigner_p_range")?;
        let window = match keys.take("wigner_window").as_deref() {
            None | Some("centered") => Window::Centered { half_width },
            Some("auto") => Window::Auto,
            Some("fixed") => {
                let (x, p) = x_range.zip(p_range).ok_or_else(|| {
                    config_err("wigner_window = fixed needs `wigner_x_range` and `wigner_p_range`")
                })?;
                Window::Fixed {
                    x_min: x.0,
                    x_max: x.1,
                    p_min: p.0,
                    p_max: p.1,
                }
            }
            Some(v) => {
                return Err(config_err(format!(
                    "invalid value `{v}` for `wigner_window`: expected centered, auto or fixed"
                )))
            }
        };
        if !(half_width > 0.0) {
            return Err(config_err("`wigner_half_width` must be positive"));
        }
        let points = positive_count(
            "wigner_points",
            keys.parse("wigner_points")?.unwrap_or(241),
            2,
        )?;
        let radial_cut = keys.flag("wigner_radial_cut", false)?;
        let radial_points = positive_count(
            "wigner_radial_points",
            keys.parse("wigner_radial_points")?.unwrap_or(481),
            2,
        )?;

        let fidelity = FidelitySettings {
            range: keys.range("fidelity_x_range")?,
            points: positive_count(
                "fidelity_points",
                keys.parse("fidelity_points")?.unwrap_or(401),
                2,
            )?,
            threshold: keys.f64_or("fidelity_threshold", 0.9)?,
            support_fraction: keys.f64_or("support_fraction", 0.01)?,
        };
        if !(0.0..=1.0).contains(&fidelity.support_fraction) {
            return Err(config_err("`support_fraction` must lie in [0, 1]"));
        }

        let axis = match keys.take("scan_axis").as_deref() {
            None | Some("gamma_beta") => SweepAxis::GammaBeta,
            Some("alpha_mag") => SweepAxis::AlphaMag,
            Some(v) => {
                return Err(config_err(format!(
                    "invalid value `{v}` for `scan_axis`: expected gamma_beta or alpha_mag"
                )))
            }
        };
        let scan = ScanSettings {
            axis,
            values: keys.list("scan_values")?.unwrap_or_default(),
            product: keys.f64_or("scan_product", 2.0)?,
            x: keys.f64_or("scan_x", 0.0)?,
            purity: keys.flag("scan_purity", true)?,
        };

        debug_assert!(keys.map.is_empty());
        let cfg = RunConfig {
            task,
            alpha_mag,
            alpha_phase,
            beta_mag,
            beta_phase,
            gamma,
            dim,
            tail_tol,
            leak_tol,
            x_list,
            wigner: WignerSettings {
                state,
                window,
                points,
                radial_cut,
                radial_points,
            },
            fidelity,
            scan,
        };
        cfg.params()?;
        Ok(cfg)
    }

    /// Protocol parameters with this config's `|α|` and `|β|`.
    pub fn params(&self) -> Result<ProtocolParams, CliError> {
        self.params_with(self.alpha_mag, self.beta_mag)
    }

    /// Protocol parameters with substituted magnitudes, as used by scans.
    pub fn params_with(&self, alpha_mag: f64, beta_mag: f64) -> Result<ProtocolParams, CliError> {
        if alpha_mag < 0.0 {
            return Err(config_err("`alpha_mag` must be nonnegative"));
        }
        let mut p = ProtocolParams::new(
            Complex64::from_polar(alpha_mag, self.alpha_phase),
            beta_mag,
            self.gamma,
        );
        p.tail_tol = self.tail_tol;
        p.leak_tol = self.leak_tol;
        if let Some(ph) = self.beta_phase {
            p = p.with_beta_phase(ph);
        }
        if let Some(d) = self.dim {
            p = p.with_dim(d);
        }
        p.validate()
            .map_err(|e| config_err(format!("invalid protocol parameters: {e}")))?;
        Ok(p)
    }
}
