//! Experiment configuration.
//!
//! Configs are JSON objects. Every field is optional; a scenario fills the
//! gaps from its own defaults and the merged result is what gets recorded in
//! the run manifest. Quantities given in dB carry an explicit `_db` suffix.

use std::path::{Path, PathBuf};

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::ambiguity::AfMode;
use crate::channel::Target;
use crate::detect::CfarConfig;
use crate::dsp::db_to_linear;
use crate::error::{Error, Result};
use crate::pa::{Amplifier, PaConfig};
use crate::signaling::{BasisKind, ConstellationSpec};

/// Amplifier section. Each entry of `ibo_db` gives one nonlinear operating
/// point; linear reference curves are always produced alongside.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PaSection {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub ibo_db: Option<Vec<f64>>,
    /// Saturation amplitude. When absent the back-off is realized by the
    /// saturation level (`alpha = 1`, see [`PaConfig::unit_drive`]).
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub v_sat: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub p1db: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub p1db_db: Option<f64>,
    /// Linear amplitude gain.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub gain: Option<f64>,
    /// Power gain in dB.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub gain_db: Option<f64>,
}

impl PaSection {
    fn merge(&self, over: &PaSection) -> PaSection {
        PaSection {
            ibo_db: over.ibo_db.clone().or_else(|| self.ibo_db.clone()),
            v_sat: over.v_sat.or(self.v_sat),
            p1db: over.p1db.or(self.p1db),
            p1db_db: over.p1db_db.or(self.p1db_db),
            gain: over.gain.or(self.gain),
            gain_db: over.gain_db.or(self.gain_db),
        }
    }

    /// SEL configuration at one IBO given in dB.
    pub fn amplifier(&self, ibo_db: f64) -> Result<PaConfig> {
        let ibo = db_to_linear(ibo_db);
        let mut cfg = match self.v_sat {
            Some(v) => PaConfig::new(v, ibo)?,
            None => PaConfig::unit_drive(ibo)?,
        };
        if self.p1db.is_some() && self.p1db_db.is_some() {
            return Err(Error::config("give either pa.p1db or pa.p1db_db, not both"));
        }
        if let Some(p) = self.p1db.or(self.p1db_db.map(db_to_linear)) {
            cfg = cfg.with_p1db(p)?;
        }
        if self.gain.is_some() && self.gain_db.is_some() {
            return Err(Error::config("give either pa.gain or pa.gain_db, not both"));
        }
        if let Some(g) = self.gain.or(self.gain_db.map(|d| db_to_linear(d).sqrt())) {
            cfg = cfg.with_gain(Complex64::new(g, 0.0))?;
        }
        Ok(cfg)
    }

    pub fn ibo_list(&self) -> Result<Vec<f64>> {
        let v = self.ibo_db.clone().unwrap_or_default();
        if v.iter().any(|x| !x.is_finite()) {
            return Err(Error::config("pa.ibo_db entries must be finite"));
        }
        Ok(v)
    }
}

/// A point target; `power` is `|gain|^2`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TargetSpec {
    pub delay: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub power: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub power_db: Option<f64>,
    /// Normalized Doppler in subcarrier-spacing units.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub doppler: Option<f64>,
}

impl TargetSpec {
    pub fn target(&self) -> Result<Target> {
        let power = match (self.power, self.power_db) {
            (Some(_), Some(_)) => return Err(Error::config("target takes power or power_db, not both")),
            (Some(p), None) => p,
            (None, Some(d)) => db_to_linear(d),
            (None, None) => 1.0,
        };
        if !(power > 0.0) || !power.is_finite() {
            return Err(Error::config(format!("target power must be positive, got {power}")));
        }
        let mut t = Target::with_power(power, self.delay);
        t.doppler = self.doppler.unwrap_or(0.0);
        Ok(t)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum CalibrationMode {
    /// i.i.d. exponential noise cells.
    Nominal,
    /// Noise-only output of the full receiver chain.
    Pipeline,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CfarSection {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub window: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub guard: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub pfa: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub calibration: Option<CalibrationMode>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub calibration_trials: Option<usize>,
}

impl CfarSection {
    fn merge(&self, over: &CfarSection) -> CfarSection {
        CfarSection {
            window: over.window.or(self.window),
            guard: over.guard.or(self.guard),
            pfa: over.pfa.or(self.pfa),
            calibration: over.calibration.or(self.calibration),
            calibration_trials: over.calibration_trials.or(self.calibration_trials),
        }
    }

    /// Uncalibrated detector skeleton.
    pub fn skeleton(&self) -> CfarConfig {
        let d = CfarConfig::default();
        CfarConfig {
            window: self.window.unwrap_or(d.window),
            guard: self.guard.unwrap_or(d.guard),
            pfa: self.pfa.unwrap_or(d.pfa),
            ..d
        }
    }

    pub fn mode(&self) -> CalibrationMode {
        self.calibration.unwrap_or(CalibrationMode::Nominal)
    }

    /// Default sample sizes give a few hundred expected false alarms per
    /// geometry at `P_fa = 1e-4`.
    pub fn trials(&self) -> usize {
        self.calibration_trials.unwrap_or(match self.mode() {
            CalibrationMode::Nominal => 2_000_000,
            CalibrationMode::Pipeline => 60_000,
        })
    }
}

/// One experiment. See the README for the full schema.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub scenario: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub constellations: Option<Vec<ConstellationSpec>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub bases: Option<Vec<BasisKind>>,
    /// Samples per symbol.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub n: Option<usize>,
    /// Sweep of `n` for the length-scaling scenarios.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub n_values: Option<Vec<usize>>,
    /// Symbols per frame.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub m: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub cp_len: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub af_modes: Option<Vec<AfMode>>,
    /// Doppler grid size `K` for zero-delay cuts.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub doppler_grid: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub pa: Option<PaSection>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub targets: Option<Vec<TargetSpec>>,
    /// Delay bin scored by the detection scenarios.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub weak_bin: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub snr_db: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub snr_db_grid: Option<Vec<f64>>,
    /// Monte-Carlo realizations per point.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub trials: Option<usize>,
    /// Realizations behind the envelope correlation used by analytic overlays.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub rho_trials: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub out_dir: Option<PathBuf>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub n_per: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub m_per: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub cfar: Option<CfarSection>,
}

fn need<T: Clone>(v: &Option<T>, name: &str) -> Result<T> {
    v.clone().ok_or_else(|| Error::config(format!("missing config field `{name}`")))
}

impl ExperimentConfig {
    /// Parses a config, or the `config` block of a run manifest.
    pub fn from_json(text: &str) -> Result<Self> {
        let value: serde_json::Value = serde_json::from_str(text)?;
        let inner = match value.get("config") {
            Some(c) if value.get("files").is_some() => c.clone(),
            _ => value,
        };
        Ok(serde_json::from_value(inner)?)
    }

    pub fn load(path: &Path) -> Result<Self> {
        Self::from_json(&std::fs::read_to_string(path)?)
    }

    /// Fields set in `over` win; nested sections merge field by field.
    pub fn merge(&self, over: &ExperimentConfig) -> ExperimentConfig {
        macro_rules! pick {
            ($f:ident) => {
                over.$f.clone().or_else(|| self.$f.clone())
            };
        }
        let section = |a: &Option<PaSection>, b: &Option<PaSection>| match (a, b) {
            (Some(a), Some(b)) => Some(a.merge(b)),
            (a, b) => b.clone().or_else(|| a.clone()),
        };
        let cfar = match (&self.cfar, &over.cfar) {
            (Some(a), Some(b)) => Some(a.merge(b)),
            (a, b) => b.clone().or_else(|| a.clone()),
        };
        ExperimentConfig {
            scenario: pick!(scenario),
            constellations: pick!(constellations),
            bases: pick!(bases),
            n: pick!(n),
            n_values: pick!(n_values),
            m: pick!(m),
            cp_len: pick!(cp_len),
            af_modes: pick!(af_modes),
            doppler_grid: pick!(doppler_grid),
            pa: section(&self.pa, &over.pa),
            targets: pick!(targets),
            weak_bin: pick!(weak_bin),
            snr_db: pick!(snr_db),
            snr_db_grid: pick!(snr_db_grid),
            trials: pick!(trials),
            rho_trials: pick!(rho_trials),
            seed: pick!(seed),
            out_dir: pick!(out_dir),
            n_per: pick!(n_per),
            m_per: pick!(m_per),
            cfar,
        }
    }

    pub fn constellations(&self) -> Result<Vec<ConstellationSpec>> {
        let v = need(&self.constellations, "constellations")?;
        if v.is_empty() {
            return Err(Error::config("`constellations` is empty"));
        }
        v.iter().try_for_each(|c| c.validate())?;
        Ok(v)
    }

    pub fn n(&self) -> Result<usize> {
        need(&self.n, "n")
    }

    pub fn n_values(&self) -> Result<Vec<usize>> {
        let v = need(&self.n_values, "n_values")?;
        if v.is_empty() {
            return Err(Error::config("`n_values` is empty"));
        }
        Ok(v)
    }

    pub fn m(&self) -> Result<usize> {
        need(&self.m, "m")
    }

    pub fn trials(&self) -> Result<usize> {
        let t = need(&self.trials, "trials")?;
        if t == 0 {
            return Err(Error::config("`trials` must be >= 1"));
        }
        Ok(t)
    }

    pub fn rho_trials(&self) -> Result<usize> {
        Ok(self.rho_trials.unwrap_or(self.trials()?))
    }

    pub fn pa(&self) -> PaSection {
        self.pa.clone().unwrap_or_default()
    }

    pub fn ibo_list(&self) -> Result<Vec<f64>> {
        self.pa().ibo_list()
    }

    pub fn af_modes(&self) -> Result<Vec<AfMode>> {
        need(&self.af_modes, "af_modes")
    }

    pub fn bases(&self) -> Result<Vec<BasisKind>> {
        need(&self.bases, "bases")
    }

    pub fn targets(&self) -> Result<Vec<Target>> {
        need(&self.targets, "targets")?.iter().map(TargetSpec::target).collect()
    }

    pub fn snr_db(&self) -> Result<f64> {
        need(&self.snr_db, "snr_db")
    }

    pub fn snr_db_grid(&self) -> Result<Vec<f64>> {
        let g = need(&self.snr_db_grid, "snr_db_grid")?;
        if g.is_empty() {
            return Err(Error::config("`snr_db_grid` is empty"));
        }
        Ok(g)
    }

    pub fn cfar(&self) -> CfarSection {
        self.cfar.clone().unwrap_or_default()
    }

    /// Amplifiers to compare: linear first, then one SEL per IBO.
    pub fn amplifiers(&self) -> Result<Vec<(String, Amplifier)>> {
        let pa = self.pa();
        let mut out = vec![("linear".to_string(), Amplifier::Linear)];
        for ibo in pa.ibo_list()? {
            out.push((ibo_tag(ibo), Amplifier::Sel(pa.amplifier(ibo)?)));
        }
        Ok(out)
    }
}

/// Column-name fragment for an IBO: `ibo1`, `ibo2p5`, `ibom1`.
pub fn ibo_tag(ibo_db: f64) -> String {
    let s = format!("{ibo_db}").replace('-', "m").replace('.', "p");
    format!("ibo{s}")
}
