//! Integer-delay, per-symbol-Doppler target channel with additive noise.
//!
//! Target `h` contributes `b_h exp(j 2 pi (k_h / N)(L + N) m) s(p - l_h)` to
//! symbol `m`, where `s` is the serialized frame. Samples before the frame
//! start are zero, so the first `l_h` samples of symbol `m` pick up the tail
//! of symbol `m - 1` exactly as the inter-block term of the Toeplitz model.

use std::f64::consts::PI;

use num_complex::Complex64;
use rand::Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::signaling::Frame;

/// One point scatterer.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Target {
    /// Complex path gain `b`.
    pub gain: Complex64,
    /// Integer delay in samples.
    pub delay: usize,
    /// Normalized Doppler `k_h` (cycles per `N` samples).
    #[serde(default)]
    pub doppler: f64,
}

impl Target {
    pub fn new(gain: Complex64, delay: usize, doppler: f64) -> Self {
        Self { gain, delay, doppler }
    }

    /// Static target with real gain `sqrt(power)`.
    pub fn with_power(power: f64, delay: usize) -> Self {
        Self::new(Complex64::new(power.sqrt(), 0.0), delay, 0.0)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ChannelConfig {
    pub targets: Vec<Target>,
    /// `sigma_z^2` per complex sample.
    pub noise_var: f64,
    /// Forces `noise_var = 0`.
    #[serde(default)]
    pub distortion_limited: bool,
}

impl ChannelConfig {
    pub fn new(targets: Vec<Target>, noise_var: f64) -> Self {
        Self {
            targets,
            noise_var,
            distortion_limited: false,
        }
    }

    pub fn effective_noise_var(&self) -> f64 {
        if self.distortion_limited {
            0.0
        } else {
            self.noise_var
        }
    }

    /// Checks gains, noise and, for a cyclic-prefix frame, that every delay
    /// fits inside the prefix.
    pub fn validate(&self, cp_len: usize) -> Result<()> {
        if !(self.noise_var >= 0.0) || !self.noise_var.is_finite() {
            return Err(Error::config(format!("noise variance must be >= 0, got {}", self.noise_var)));
        }
        for t in &self.targets {
            if !(t.gain.norm() > 0.0) || !t.gain.norm().is_finite() {
                return Err(Error::config("target gain must be non-zero and finite"));
            }
            if !t.doppler.is_finite() {
                return Err(Error::config("target Doppler must be finite"));
            }
            if cp_len > 0 && t.delay > cp_len {
                return Err(Error::config(format!(
                    "target delay {} exceeds the cyclic prefix length {cp_len}; \
                     the prefix must be at least the maximum channel delay",
                    t.delay
                )));
            }
        }
        Ok(())
    }
}

/// Per-symbol phase `exp(j 2 pi (k / N)(L + N) m)`.
pub fn doppler_phase(doppler: f64, n: usize, cp_len: usize, m: usize) -> Complex64 {
    Complex64::from_polar(1.0, 2.0 * PI * doppler / n as f64 * (cp_len + n) as f64 * m as f64)
}

/// Noise-free multipath response of a frame.
pub fn propagate(frame: &Frame, targets: &[Target]) -> Result<Frame> {
    let fc = frame.config;
    let serial = frame.serialize();
    let sym = fc.symbol_len();
    let mut out = vec![Complex64::new(0.0, 0.0); serial.len()];
    for t in targets {
        for m in 0..fc.m {
            let g = t.gain * doppler_phase(t.doppler, fc.n, fc.cp_len, m);
            let base = m * sym;
            for i in 0..sym {
                let idx = base + i;
                if idx >= t.delay {
                    out[idx] += g * serial[idx - t.delay];
                }
            }
        }
    }
    Frame::from_serial(fc, &out)
}

/// Received frame: multipath response plus circular complex Gaussian noise.
pub fn apply_channel<R: Rng + ?Sized>(frame: &Frame, cfg: &ChannelConfig, rng: &mut R) -> Result<Frame> {
    cfg.validate(frame.config.cp_len)?;
    let clean = propagate(frame, &cfg.targets)?;
    let noisy = add_noise(&clean.serialize(), cfg.effective_noise_var(), rng);
    Frame::from_serial(frame.config, &noisy)
}

/// `x + z` with `z ~ CN(0, noise_var)`. Zero variance returns `x` unchanged
/// and draws nothing.
pub fn add_noise<R: Rng + ?Sized>(x: &[Complex64], noise_var: f64, rng: &mut R) -> Vec<Complex64> {
    if noise_var <= 0.0 {
        return x.to_vec();
    }
    let s = (noise_var / 2.0).sqrt();
    x.iter()
        .map(|&v| {
            let re: f64 = StandardNormal.sample(rng);
            let im: f64 = StandardNormal.sample(rng);
            v + Complex64::new(re * s, im * s)
        })
        .collect()
}
