//! Run configuration and its plain-text `key = value` form.

use std::fmt::Write as _;

use crate::data::FeatureKind;
use crate::error::{Error, Result};
use crate::exec::Execution;
use crate::gp::GpSettings;
use crate::mice::ChainSettings;

/// Which `T_med` events a long visit keeps in the temporal view.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Truncation {
    #[default]
    KeepLast,
    KeepFirst,
}

impl Truncation {
    pub fn as_str(self) -> &'static str {
        match self {
            Truncation::KeepLast => "keep_last",
            Truncation::KeepFirst => "keep_first",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EcfWindows {
    pub lab: u64,
    pub vital: u64,
    pub other: u64,
}

impl Default for EcfWindows {
    fn default() -> Self {
        Self {
            lab: 1440,
            vital: 480,
            other: 480,
        }
    }
}

impl EcfWindows {
    pub fn for_kind(&self, kind: FeatureKind) -> u64 {
        match kind {
            FeatureKind::Lab => self.lab,
            FeatureKind::Vital => self.vital,
            FeatureKind::Other => self.other,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Config {
    pub w1: f64,
    pub w2: f64,
    pub chains: ChainSettings,
    pub gp: GpSettings,
    pub ctp_truncate: Truncation,
    pub ecf_windows: EcfWindows,
    pub normalize: bool,
    pub seed: u64,
}

impl Default for Config {
    fn default() -> Self {
        Self {
            w1: 0.5,
            w2: 0.5,
            chains: ChainSettings::default(),
            gp: GpSettings::default(),
            ctp_truncate: Truncation::KeepLast,
            ecf_windows: EcfWindows::default(),
            normalize: true,
            seed: 0,
        }
    }
}

pub const WEIGHT_TOLERANCE: f64 = 1e-12;

pub fn check_weights(w1: f64, w2: f64) -> Result<()> {
    if !(w1 >= 0.0 && w2 >= 0.0) || (w1 + w2 - 1.0).abs() > WEIGHT_TOLERANCE {
        return Err(Error::Config(format!(
            "compromise weights must be non-negative and sum to 1 (w1 = {w1}, w2 = {w2})"
        )));
    }
    Ok(())
}

fn parse<T: std::str::FromStr>(key: &str, value: &str) -> Result<T> {
    value
        .parse()
        .map_err(|_| Error::Config(format!("invalid value for {key}: {value:?}")))
}

fn parse_bool(key: &str, value: &str) -> Result<bool> {
    match value.to_ascii_lowercase().as_str() {
        "true" | "on" | "yes" | "1" => Ok(true),
        "false" | "off" | "no" | "0" => Ok(false),
        _ => Err(Error::Config(format!("invalid value for {key}: {value:?}"))),
    }
}

impl Config {
    pub fn check(&self) -> Result<()> {
        check_weights(self.w1, self.w2)?;
        self.chains.check()?;
        self.gp.check()?;
        let w = self.ecf_windows;
        if w.lab == 0 || w.vital == 0 || w.other == 0 {
            return Err(Error::Config("ecf windows must be positive".into()));
        }
        Ok(())
    }

    /// Applies one `key = value` setting.
    pub fn set(&mut self, key: &str, value: &str) -> Result<()> {
        let value = value.trim();
        match key.trim() {
            "w1" => self.w1 = parse(key, value)?,
            "w2" => self.w2 = parse(key, value)?,
            "chains" => self.chains.chains = parse(key, value)?,
            "iterations" => self.chains.iterations = parse(key, value)?,
            "pmm_donors" => self.chains.donors = parse(key, value)?,
            "ridge" => self.chains.ridge = parse(key, value)?,
            "parallel" => {
                self.chains.execution = if parse_bool(key, value)? {
                    Execution::Parallel
                } else {
                    Execution::Sequential
                }
            }
            "gp_nugget" => self.gp.nugget_factor = parse(key, value)?,
            "gp_nugget_max" => self.gp.nugget_max = parse(key, value)?,
            "gp_log10_alpha_lo" => self.gp.log10_alpha_lo = parse(key, value)?,
            "gp_log10_alpha_hi" => self.gp.log10_alpha_hi = parse(key, value)?,
            "gp_alpha_rel_tol" => self.gp.alpha_rel_tol = parse(key, value)?,
            "gp_scan_points" => self.gp.scan_points = parse(key, value)?,
            "ctp_truncate" => {
                self.ctp_truncate = match value {
                    "keep_last" => Truncation::KeepLast,
                    "keep_first" => Truncation::KeepFirst,
                    _ => return Err(Error::Config(format!("invalid value for ctp_truncate: {value:?}"))),
                }
            }
            "ecf_window_lab" => self.ecf_windows.lab = parse(key, value)?,
            "ecf_window_vital" => self.ecf_windows.vital = parse(key, value)?,
            "ecf_window_other" => self.ecf_windows.other = parse(key, value)?,
            "normalize" => self.normalize = parse_bool(key, value)?,
            "seed" => self.seed = parse(key, value)?,
            other => return Err(Error::Config(format!("unknown config key {other:?}"))),
        }
        Ok(())
    }

    /// Parses a config file body. Blank lines and `#` comments are ignored.
    pub fn apply_text(&mut self, text: &str) -> Result<()> {
        for (i, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (key, value) = line.split_once('=').ok_or_else(|| {
                Error::Config(format!("line {}: expected `key = value`", i + 1))
            })?;
            self.set(key, value)?;
        }
        Ok(())
    }

    pub fn from_text(text: &str) -> Result<Self> {
        let mut c = Self::default();
        c.apply_text(text)?;
        c.check()?;
        Ok(c)
    }

    pub fn execution(&self) -> Execution {
        self.chains.execution
    }

    /// Every effective setting as `key = value` lines, in a fixed order.
    pub fn to_text(&self) -> String {
        let mut s = String::new();
        let mut kv = |k: &str, v: String| {
            let _ = writeln!(s, "{k} = {v}");
        };
        kv("w1", self.w1.to_string());
        kv("w2", self.w2.to_string());
        kv("chains", self.chains.chains.to_string());
        kv("iterations", self.chains.iterations.to_string());
        kv("pmm_donors", self.chains.donors.to_string());
        kv("ridge", self.chains.ridge.to_string());
        kv("gp_nugget", self.gp.nugget_factor.to_string());
        kv("gp_nugget_max", self.gp.nugget_max.to_string());
        kv("gp_log10_alpha_lo", self.gp.log10_alpha_lo.to_string());
        kv("gp_log10_alpha_hi", self.gp.log10_alpha_hi.to_string());
        kv("gp_alpha_rel_tol", self.gp.alpha_rel_tol.to_string());
        kv("gp_scan_points", self.gp.scan_points.to_string());
        kv("ctp_truncate", self.ctp_truncate.as_str().to_string());
        kv("ecf_window_lab", self.ecf_windows.lab.to_string());
        kv("ecf_window_vital", self.ecf_windows.vital.to_string());
        kv("ecf_window_other", self.ecf_windows.other.to_string());
        kv("normalize", self.normalize.to_string());
        kv("seed", self.seed.to_string());
        s
    }
}
