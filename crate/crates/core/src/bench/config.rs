//! Experiment configuration for the bench runner, read from TOML.

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::coincidence::acquire::Backend;
use crate::error::{Error, Result};
use crate::source::{CouplerParams, DetectorParams, LaserParams, QdSourceParams};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum BackendChoice {
    Analytic,
    Montecarlo,
    Both,
}

impl BackendChoice {
    pub fn backends(self) -> Vec<Backend> {
        match self {
            BackendChoice::Analytic => vec![Backend::Analytic],
            BackendChoice::Montecarlo => vec![Backend::Montecarlo],
            BackendChoice::Both => vec![Backend::Analytic, Backend::Montecarlo],
        }
    }

    pub fn parse(s: &str) -> Result<Self> {
        match s {
            "analytic" => Ok(Self::Analytic),
            "montecarlo" => Ok(Self::Montecarlo),
            "both" => Ok(Self::Both),
            other => Err(Error::Config(format!("unknown backend '{other}'"))),
        }
    }
}

pub fn backend_name(b: Backend) -> &'static str {
    match b {
        Backend::Analytic => "analytic",
        Backend::Montecarlo => "montecarlo",
    }
}

/// Post-selection windows and analysis ranges, all in ps.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct WindowConfig {
    /// `[Δτ₁, Δτ₂]` windows centred on zero delay for the BB84 table.
    pub bb84: Vec<[i64; 2]>,
    /// Largest window explored by the significance sweep.
    pub sweep_max: [i64; 2],
    /// Window of the detuning scan.
    pub detuning: [i64; 2],
    /// τ₁ width used for the oscillation fits and tomography.
    pub oscillation_dt1: i64,
    /// `[from, to)` τ₂ range of the oscillation fits.
    pub oscillation_t2: [i64; 2],
    /// τ₂ slice width of the oscillation fits.
    pub oscillation_group: i64,
    /// Span and step of the entanglement curve.
    pub entanglement_span: i64,
    pub entanglement_step: i64,
}

impl Default for WindowConfig {
    fn default() -> Self {
        Self {
            bb84: vec![[88, 120], [16, 16]],
            sweep_max: [200, 304],
            detuning: [16, 16],
            oscillation_dt1: 120,
            oscillation_t2: [0, 1008],
            oscillation_group: 56,
            entanglement_span: 65_536,
            entanglement_step: 8,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct BenchConfig {
    pub seed: u64,
    /// Acquisition time per scenario run, in seconds.
    pub duration_s: f64,
    pub backend: BackendChoice,
    pub bin_ps: i64,
    pub output_dir: PathBuf,
    /// Replace every imperfection by its ideal value (analytic backend only).
    pub noise_free: bool,
    pub phase_offset_rad: f64,
    pub detuning_ghz: Vec<f64>,
    pub landscape_grid: [usize; 2],
    pub source: QdSourceParams,
    pub laser: LaserParams,
    pub detector: DetectorParams,
    pub coupler: CouplerParams,
    pub windows: WindowConfig,
}

impl Default for BenchConfig {
    fn default() -> Self {
        Self {
            seed: 7,
            duration_s: 20.0,
            backend: BackendChoice::Analytic,
            bin_ps: 8,
            output_dir: PathBuf::from("qrelay-out"),
            noise_free: false,
            phase_offset_rad: 0.0,
            detuning_ghz: vec![0.0, 1.0, 2.0, 3.0, 4.0, 5.0, 6.0, 7.0, 8.0],
            landscape_grid: [37, 72],
            source: QdSourceParams::default(),
            laser: LaserParams::default(),
            detector: DetectorParams::default(),
            coupler: CouplerParams::default(),
            windows: WindowConfig::default(),
        }
    }
}

fn check(ok: bool, msg: &str) -> Result<()> {
    if ok {
        Ok(())
    } else {
        Err(Error::Config(msg.to_string()))
    }
}

impl BenchConfig {
    pub fn from_toml_str(text: &str) -> Result<Self> {
        let cfg: BenchConfig = toml::from_str(text).map_err(|e| Error::Config(e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::Config(format!("{}: {e}", path.display())))?;
        Self::from_toml_str(&text)
    }

    pub fn to_toml_string(&self) -> Result<String> {
        toml::to_string_pretty(self).map_err(|e| Error::Format(e.to_string()))
    }

    pub fn validate(&self) -> Result<()> {
        self.source.validate()?;
        self.laser.validate()?;
        self.detector.validate()?;
        self.coupler.validate()?;
        check(self.duration_s.is_finite() && self.duration_s > 0.0 && self.duration_s <= 1e5, "duration_s must lie in (0, 1e5]")?;
        check((1..=8).contains(&self.bin_ps), "bin_ps must lie in 1..=8")?;
        check(self.phase_offset_rad.is_finite(), "phase_offset_rad must be finite")?;
        check(self.source.fss_uev <= 100.0, "source.fss_uev must be <= 100")?;
        check(self.source.coh2x_ps <= 1e12, "source.coh2x_ps must be <= 1e12")?;
        check(self.detector.jitter_fwhm_ps <= 2000.0, "detector.jitter_fwhm_ps must be <= 2000")?;
        check(self.laser.intensity_ratio <= 100.0, "laser.intensity_ratio must be <= 100")?;
        check(!self.detuning_ghz.is_empty(), "detuning_ghz must not be empty")?;
        check(self.detuning_ghz.iter().all(|d| d.is_finite() && d.abs() <= 100.0), "detuning_ghz entries must lie in [-100, 100]")?;
        check(self.landscape_grid[0] >= 2 && self.landscape_grid[1] >= 1, "landscape_grid must be at least [2, 1]")?;
        check(self.landscape_grid[0] * self.landscape_grid[1] <= 1_000_000, "landscape_grid is too large")?;
        if self.noise_free && self.backend != BackendChoice::Analytic {
            return Err(Error::Config("noise_free requires backend = \"analytic\"".into()));
        }
        let w = &self.windows;
        let multiple = |v: i64| v > 0 && v % self.bin_ps == 0;
        check(!w.bb84.is_empty(), "windows.bb84 must not be empty")?;
        for win in w.bb84.iter().chain([&w.sweep_max, &w.detuning]) {
            check(multiple(win[0]) && multiple(win[1]), "window sizes must be positive multiples of bin_ps")?;
            check(win[0] <= 2000 && win[1] <= 4000, "window sizes must be at most 2000 × 4000 ps")?;
        }
        check(multiple(w.oscillation_dt1) && multiple(w.oscillation_group), "oscillation window sizes must be multiples of bin_ps")?;
        let span = w.oscillation_t2[1] - w.oscillation_t2[0];
        check(span > 0 && span % w.oscillation_group == 0, "oscillation_t2 must be a whole number of groups")?;
        check(w.oscillation_t2[0] >= -4000 && w.oscillation_t2[1] <= 20_000, "oscillation_t2 out of range")?;
        check(w.entanglement_step > 0 && w.entanglement_span >= 16 * w.entanglement_step, "entanglement span needs 16 steps")?;
        check(w.entanglement_span / w.entanglement_step <= 1 << 20, "entanglement curve too long")?;
        Ok(())
    }

    /// Parameters actually simulated; equal to the configured ones unless
    /// `noise_free` is set.
    pub fn effective(&self) -> BenchConfig {
        if !self.noise_free {
            return self.clone();
        }
        let mut c = self.clone();
        c.source.depolarization = 0.0;
        c.source.fss_uev = 0.0;
        c.source.coh2x_ps = 1e9;
        c.laser.detuning_ghz = 0.0;
        c.laser.linewidth_khz = 0.0;
        c.laser.intensity_ratio = 1.0;
        c.detector.jitter_fwhm_ps = 0.0;
        c.detector.dark_cps = 0.0;
        c.detector.extinction_ratio_db = f64::INFINITY;
        c.detuning_ghz = vec![0.0];
        c
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn defaults_round_trip() {
        let cfg = BenchConfig::default();
        cfg.validate().unwrap();
        let text = cfg.to_toml_string().unwrap();
        assert_eq!(BenchConfig::from_toml_str(&text).unwrap(), cfg);
        let empty = BenchConfig::from_toml_str("").unwrap();
        assert_eq!(empty, cfg);
    }

    #[test]
    fn infinite_extinction_round_trips() {
        let mut cfg = BenchConfig::default();
        cfg.detector.extinction_ratio_db = f64::INFINITY;
        let back = BenchConfig::from_toml_str(&cfg.to_toml_string().unwrap()).unwrap();
        assert_eq!(back, cfg);
    }

    #[test]
    fn rejects_unknown_keys_and_bad_bounds() {
        assert!(matches!(BenchConfig::from_toml_str("sed = 3"), Err(Error::Config(_))));
        assert!(matches!(BenchConfig::from_toml_str("[source]\nfss = 3.0"), Err(Error::Config(_))));
        assert!(matches!(BenchConfig::from_toml_str("bin_ps = 12"), Err(Error::Config(_))));
        assert!(matches!(BenchConfig::from_toml_str("[detector]\nefficiency = 1.5"), Err(Error::Config(_))));
        assert!(matches!(BenchConfig::from_toml_str("[windows]\nbb84 = [[90, 120]]"), Err(Error::Config(_))));
        assert!(matches!(
            BenchConfig::from_toml_str("noise_free = true\nbackend = \"montecarlo\""),
            Err(Error::Config(_))
        ));
    }
}
