//! Smallest-of CFAR detection on periodogram range cuts, threshold
//! calibration and probability-of-detection experiments.

use rand::Rng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Exp1};
use serde::{Deserialize, Serialize};

use crate::channel::{apply_channel, ChannelConfig, Target};
use crate::error::{Error, Result};
use crate::pa::Amplifier;
use crate::parallel;
use crate::radar::{division_filter, periodogram, Periodogram};
use crate::seed::SeedStream;
use crate::signaling::{Constellation, ConstellationSpec, Frame, FrameConfig, SignalingBasis, SymbolVector, TimeSignal};

/// SO-CFAR geometry and thresholds.
///
/// The noise level of a cell is the smaller of the leading and lagging
/// training-window means. Cells near either end, where only one full window
/// exists, use that window alone and the separate `edge_factor`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CfarConfig {
    /// Training cells per side.
    pub window: usize,
    /// Guard cells per side.
    pub guard: usize,
    /// Target per-cell false-alarm probability.
    pub pfa: f64,
    /// Threshold multiplier for cells with both windows.
    pub factor: f64,
    /// Multiplier for single-window cells; `factor` when absent.
    #[serde(default)]
    pub edge_factor: Option<f64>,
}

impl Default for CfarConfig {
    fn default() -> Self {
        Self {
            window: 16,
            guard: 2,
            pfa: 1e-4,
            factor: 1.0,
            edge_factor: None,
        }
    }
}

impl CfarConfig {
    pub fn validate(&self) -> Result<()> {
        if self.window < 1 {
            return Err(Error::config("CFAR training window must be >= 1"));
        }
        if !(self.pfa > 0.0 && self.pfa < 1.0) {
            return Err(Error::config(format!("P_fa must lie in (0, 1), got {}", self.pfa)));
        }
        if !(self.factor > 0.0) || self.edge_factor.is_some_and(|f| !(f > 0.0)) {
            return Err(Error::config("CFAR threshold factors must be positive"));
        }
        Ok(())
    }

    /// Shortest cut the detector accepts.
    pub fn min_len(&self) -> usize {
        2 * (self.window + self.guard) + 2
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DetectionReport {
    pub detections: Vec<bool>,
    pub thresholds: Vec<f64>,
    /// Indices of detected cells.
    pub detected: Vec<usize>,
}

impl DetectionReport {
    pub fn is_detected(&self, cell: usize) -> bool {
        self.detections.get(cell).copied().unwrap_or(false)
    }
}

fn window_mean(cut: &[f64], lo: usize, hi: usize) -> f64 {
    cut[lo..hi].iter().sum::<f64>() / (hi - lo) as f64
}

pub fn so_cfar(cut: &[f64], cfg: &CfarConfig) -> Result<DetectionReport> {
    cfg.validate()?;
    let (w, g) = (cfg.window, cfg.guard);
    if cut.len() < cfg.min_len() {
        return Err(Error::config(format!(
            "range cut of {} cells is too short for window {w} and guard {g} (need {})",
            cut.len(),
            cfg.min_len()
        )));
    }
    let len = cut.len();
    let edge = cfg.edge_factor.unwrap_or(cfg.factor);
    let mut detections = Vec::with_capacity(len);
    let mut thresholds = Vec::with_capacity(len);
    let mut detected = Vec::new();
    for i in 0..len {
        let lead = (i >= g + w).then(|| window_mean(cut, i - g - w, i - g));
        let lag = (i + g + w < len).then(|| window_mean(cut, i + g + 1, i + g + w + 1));
        let t = match (lead, lag) {
            (Some(a), Some(b)) => cfg.factor * a.min(b),
            (Some(a), None) | (None, Some(a)) => edge * a,
            (None, None) => unreachable!("cut length checked above"),
        };
        let hit = cut[i] > t;
        if hit {
            detected.push(i);
        }
        detections.push(hit);
        thresholds.push(t);
    }
    Ok(DetectionReport {
        detections,
        thresholds,
        detected,
    })
}

/// Source of noise-only cells for threshold calibration.
#[derive(Debug, Clone)]
pub enum NoiseModel {
    /// i.i.d. unit-mean exponential cells (squared complex Gaussian).
    Exponential,
    /// Noise-only range cuts from the full receiver chain of a scenario
    /// (targets removed, linear amplifier, unit noise variance).
    Pipeline(Box<PdScenario>),
}

/// Test statistics `cell / noise level` for interior and edge geometry.
struct RatioSample {
    interior: Vec<f64>,
    edge: Vec<f64>,
}

fn exponential_ratios(cfg: &CfarConfig, trials: usize, seed: &SeedStream) -> Result<RatioSample> {
    let (w, g) = (cfg.window, cfg.guard);
    let per = parallel::map_trials(trials, seed, |_, rng| {
        let cells: Vec<f64> = (0..2 * (w + g) + 1).map(|_| Exp1.sample(rng)).collect();
        let c = w + g;
        let lead = window_mean(&cells, 0, w);
        let lag = window_mean(&cells, c + g + 1, c + g + 1 + w);
        Ok((cells[c] / lead.min(lag), cells[c] / lag))
    })?;
    Ok(RatioSample {
        interior: per.iter().map(|p| p.0).collect(),
        edge: per.iter().map(|p| p.1).collect(),
    })
}

fn pipeline_ratios(cfg: &CfarConfig, scenario: &PdScenario, trials: usize, seed: &SeedStream) -> Result<RatioSample> {
    let mut quiet = scenario.clone();
    quiet.targets.clear();
    quiet.amplifier = Amplifier::Linear;
    let (w, g) = (cfg.window, cfg.guard);
    let per = parallel::map_trials(trials, seed, |_, rng| {
        let cut = quiet.run_trial(Some(1.0), rng)?.range_cut;
        let len = cut.len();
        let mut interior = Vec::new();
        let mut edge = Vec::new();
        for i in 0..len {
            let lead = (i >= g + w).then(|| window_mean(&cut, i - g - w, i - g));
            let lag = (i + g + w < len).then(|| window_mean(&cut, i + g + 1, i + g + w + 1));
            match (lead, lag) {
                (Some(a), Some(b)) => interior.push(cut[i] / a.min(b)),
                (Some(a), None) | (None, Some(a)) => edge.push(cut[i] / a),
                (None, None) => {}
            }
        }
        Ok((interior, edge))
    })?;
    let mut out = RatioSample {
        interior: vec![],
        edge: vec![],
    };
    for (i, e) in per {
        out.interior.extend(i);
        out.edge.extend(e);
    }
    Ok(out)
}

/// Smallest factor whose empirical exceedance rate is at most `pfa`,
/// located by bisection on the sample.
fn bisect_factor(ratios: &[f64], pfa: f64) -> Result<f64> {
    let n = ratios.len() as f64;
    let rate = |f: f64| ratios.iter().filter(|&&r| r > f).count() as f64 / n;
    let mut lo = 0.0;
    let mut hi = 1.0;
    let mut expansions = 0;
    while rate(hi) > pfa {
        lo = hi;
        hi *= 2.0;
        expansions += 1;
        if expansions > 64 {
            return Err(Error::Calibration("threshold search did not bracket the target P_fa".into()));
        }
    }
    if rate(lo) <= pfa && lo > 0.0 {
        return Err(Error::Calibration("threshold search did not bracket the target P_fa".into()));
    }
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if rate(mid) > pfa {
            lo = mid;
        } else {
            hi = mid;
        }
        if hi - lo <= 1e-12 * hi {
            break;
        }
    }
    Ok(hi)
}

/// Calibrates `factor` and `edge_factor` so the empirical per-cell false
/// alarm rate under `model` equals `skeleton.pfa`.
pub fn calibrate_cfar(skeleton: &CfarConfig, model: &NoiseModel, trials: usize, seed: &SeedStream) -> Result<CfarConfig> {
    let mut cfg = *skeleton;
    cfg.factor = cfg.factor.max(f64::MIN_POSITIVE);
    cfg.validate()?;
    let sample = match model {
        NoiseModel::Exponential => exponential_ratios(&cfg, trials, seed)?,
        NoiseModel::Pipeline(s) => pipeline_ratios(&cfg, s, trials, seed)?,
    };
    for (name, r) in [("interior", &sample.interior), ("edge", &sample.edge)] {
        let expected = r.len() as f64 * cfg.pfa;
        if expected < 100.0 {
            return Err(Error::Calibration(format!(
                "{name} sample of {} cells gives only {expected:.1} expected false alarms; need >= 100",
                r.len()
            )));
        }
    }
    cfg.factor = bisect_factor(&sample.interior, cfg.pfa)?;
    cfg.edge_factor = Some(bisect_factor(&sample.edge, cfg.pfa)?);
    Ok(cfg)
}

/// Empirical false-alarm rate of `cfg` on fresh exponential cells, testing
/// `(interior, edge)` geometry separately.
pub fn empirical_pfa(cfg: &CfarConfig, trials: usize, seed: &SeedStream) -> Result<(f64, f64)> {
    let s = exponential_ratios(cfg, trials, seed)?;
    let edge = cfg.edge_factor.unwrap_or(cfg.factor);
    let n = trials as f64;
    Ok((
        s.interior.iter().filter(|&&r| r > cfg.factor).count() as f64 / n,
        s.edge.iter().filter(|&&r| r > edge).count() as f64 / n,
    ))
}

/// Full sensing chain for one detection experiment.
#[derive(Debug, Clone, PartialEq)]
pub struct PdScenario {
    pub constellation: ConstellationSpec,
    pub frame: FrameConfig,
    pub amplifier: Amplifier,
    pub targets: Vec<Target>,
    pub cfar: CfarConfig,
    pub n_per: usize,
    pub m_per: usize,
    /// Delay bin (at the native `N` grid) of the target whose detection is
    /// scored.
    pub weak_bin: usize,
}

/// Everything one trial of the chain produces.
#[derive(Debug, Clone)]
pub struct TrialOutput {
    pub periodogram: Periodogram,
    /// Zero-Doppler delay profile.
    pub range_cut: Vec<f64>,
    pub report: Option<DetectionReport>,
    pub noise_var: f64,
}

impl PdScenario {
    /// Two static targets at delays 4 and 8, the second 10 dB weaker, on an
    /// `N = 64` CP-OFDM frame with `L = 16`.
    pub fn two_target(constellation: ConstellationSpec, m: usize, amplifier: Amplifier) -> Result<Self> {
        Ok(Self {
            constellation,
            frame: FrameConfig::new(64, m, 16)?,
            amplifier,
            targets: vec![Target::with_power(1.0, 4), Target::with_power(0.1, 8)],
            cfar: CfarConfig::default(),
            n_per: 64,
            m_per: m,
            weak_bin: 8,
        })
    }

    pub fn validate(&self) -> Result<()> {
        self.frame.validate()?;
        self.constellation.validate()?;
        if self.n_per < self.frame.n || self.m_per < self.frame.m {
            return Err(Error::config("periodogram grid must be at least N x M"));
        }
        if self.weak_bin >= self.frame.n {
            return Err(Error::config("scored target bin outside the delay axis"));
        }
        ChannelConfig::new(self.targets.clone(), 0.0).validate(self.frame.cp_len)?;
        self.cfar.validate()
    }

    /// Transmit frame after the amplifier, plus the frequency-domain
    /// reference symbols.
    pub fn transmit<R: Rng + ?Sized>(&self, rng: &mut R) -> Result<(Frame, Vec<SymbolVector>)> {
        let fc = self.frame;
        let basis = SignalingBasis::ofdm(fc.n)?;
        let table = Constellation::new(self.constellation)?;
        let refs: Vec<SymbolVector> = (0..fc.m).map(|_| table.draw(fc.n, rng)).collect();
        let bodies: Vec<TimeSignal> = refs
            .iter()
            .map(|s| TimeSignal::new(self.amplifier.apply(&basis.synthesize_slice(&s.0))))
            .collect();
        Ok((Frame::from_symbols(fc, &bodies)?, refs))
    }

    /// Runs one trial. `noise_var = None` is the distortion-limited case.
    pub fn run_trial(&self, noise_var: Option<f64>, rng: &mut ChaCha8Rng) -> Result<TrialOutput> {
        let (tx, refs) = self.transmit(rng)?;
        let mut ch = ChannelConfig::new(self.targets.clone(), noise_var.unwrap_or(0.0));
        ch.distortion_limited = noise_var.is_none();
        let rx = apply_channel(&tx, &ch, rng)?;
        let per = periodogram(&division_filter(&rx, &refs)?, self.n_per, self.m_per)?;
        let range_cut = per.range_cut(0).expect("Doppler axis contains 0");
        Ok(TrialOutput {
            periodogram: per,
            range_cut,
            report: None,
            noise_var: ch.effective_noise_var(),
        })
    }

    /// Runs one trial and the detector.
    pub fn detect_trial(&self, noise_var: Option<f64>, rng: &mut ChaCha8Rng) -> Result<TrialOutput> {
        let mut out = self.run_trial(noise_var, rng)?;
        out.report = Some(so_cfar(&out.range_cut, &self.cfar)?);
        Ok(out)
    }

    /// Whether the scored target was found: the exact bin, or within one
    /// bin when the delay axis is zero-padded.
    pub fn weak_detected(&self, report: &DetectionReport) -> bool {
        let pad = self.n_per / self.frame.n;
        let centre = self.weak_bin * pad;
        if pad > 1 {
            (centre.saturating_sub(1)..=centre + 1).any(|c| report.is_detected(c))
        } else {
            report.is_detected(centre)
        }
    }

    /// Noise variance for a sensing SNR given in dB: the linear-amplifier
    /// output power per sample divided by `10^(snr/10)`.
    pub fn noise_var_for_snr_db(&self, snr_db: f64) -> Option<f64> {
        snr_db
            .is_finite()
            .then(|| self.amplifier.linear_power_gain() / 10f64.powf(snr_db / 10.0))
    }
}

/// Detection probability versus SNR with Wilson 95% half-widths.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PdCurve {
    /// `+inf` marks the noise-free (distortion-limited) point.
    pub snr_db: Vec<f64>,
    pub pd: Vec<f64>,
    pub ci_halfwidth: Vec<f64>,
    pub trials: usize,
}

/// 95% Wilson score half-width for `k` successes out of `n`.
pub fn wilson_halfwidth(k: usize, n: usize) -> f64 {
    if n == 0 {
        return 0.0;
    }
    let z = 1.959_963_984_540_054;
    let n = n as f64;
    let p = k as f64 / n;
    z / (1.0 + z * z / n) * (p * (1.0 - p) / n + z * z / (4.0 * n * n)).sqrt()
}

/// Runs the scenario at every SNR point. Each point reuses the same trial
/// streams, so curves differ only through the noise level.
pub fn pd_experiment(scenario: &PdScenario, snr_db: &[f64], trials: usize, seed: &SeedStream) -> Result<PdCurve> {
    scenario.validate()?;
    if trials == 0 {
        return Err(Error::config("Pd experiment needs at least one trial"));
    }
    let mut pd = Vec::with_capacity(snr_db.len());
    let mut hw = Vec::with_capacity(snr_db.len());
    for &snr in snr_db {
        let noise = scenario.noise_var_for_snr_db(snr);
        let hits = parallel::map_reduce(
            trials,
            seed,
            || 0usize,
            |acc, _, rng| {
                let out = scenario.detect_trial(noise, rng)?;
                if scenario.weak_detected(out.report.as_ref().expect("detector ran")) {
                    *acc += 1;
                }
                Ok(())
            },
            |a, b| *a += b,
        )?;
        pd.push(hits as f64 / trials as f64);
        hw.push(wilson_halfwidth(hits, trials));
    }
    Ok(PdCurve {
        snr_db: snr_db.to_vec(),
        pd,
        ci_halfwidth: hw,
        trials,
    })
}

/// Same as [`pd_experiment`] with a single noise-free point.
pub fn pd_distortion_limited(scenario: &PdScenario, trials: usize, seed: &SeedStream) -> Result<f64> {
    Ok(pd_experiment(scenario, &[f64::INFINITY], trials, seed)?.pd[0])
}

/// Empirical false-alarm rate of the full chain with no targets and a
/// linear amplifier, over every non-target cell.
pub fn pipeline_false_alarm_rate(scenario: &PdScenario, snr_db: f64, trials: usize, seed: &SeedStream) -> Result<f64> {
    let mut quiet = scenario.clone();
    quiet.targets.clear();
    quiet.amplifier = Amplifier::Linear;
    let noise = quiet.noise_var_for_snr_db(snr_db).unwrap_or(1.0);
    let (alarms, cells) = parallel::map_reduce(
        trials,
        seed,
        || (0usize, 0usize),
        |acc, _, rng| {
            let out = quiet.detect_trial(Some(noise), rng)?;
            let r = out.report.expect("detector ran");
            acc.0 += r.detected.len();
            acc.1 += r.detections.len();
            Ok(())
        },
        |a, b| {
            a.0 += b.0;
            a.1 += b.1;
        },
    )?;
    Ok(alarms as f64 / cells as f64)
}
