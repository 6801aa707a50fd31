//! Soft-envelope-limiter (SEL) amplifier, input back-off and Bussgang
//! statistics.
//!
//! The amplifier sees the unit-power baseband signal `x`, scales it by the
//! back-off coefficient `alpha`, applies the linear gain `G` and saturates the
//! envelope at `V_sat`:
//!
//! ```text
//! s = G alpha x                     if |G alpha x| <= V_sat
//! s = V_sat exp(j arg(G alpha x))   otherwise
//! ```
//!
//! The Bussgang decomposition `s = kappa x + d` is taken with respect to the
//! unit-power input, so `kappa -> G alpha` when nothing clips.

use std::f64::consts::PI;

use num_complex::Complex64;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::parallel;
use crate::seed::SeedStream;
use crate::signaling::{Constellation, ConstellationSpec, SignalingBasis, TimeSignal};

/// Input power at the 1 dB compression point of a pure limiter with
/// saturation amplitude `v_sat` and unit gain, for constant-envelope drive.
///
/// Below `V_sat^2` the limiter is exactly linear. Its output power falls 1 dB
/// short of the linear extrapolation once the input power reaches
/// `10^(1/10) V_sat^2`.
pub fn limiter_p1db(v_sat: f64) -> f64 {
    10f64.powf(0.1) * v_sat * v_sat
}

/// `alpha = sqrt(P_1dB / (IBO sigma^2))`, which must lie in `(0, 1]`.
pub fn backoff_coefficient(p1db: f64, ibo: f64, sigma2: f64) -> Result<f64> {
    for (name, v) in [("P_1dB", p1db), ("IBO", ibo), ("sigma^2", sigma2)] {
        if !(v > 0.0) || !v.is_finite() {
            return Err(Error::config(format!("{name} must be positive and finite, got {v}")));
        }
    }
    let alpha = (p1db / (ibo * sigma2)).sqrt();
    if alpha > 1.0 + 1e-12 {
        return Err(Error::config(format!(
            "back-off coefficient alpha = {alpha:.4} exceeds 1: P_1dB / (IBO sigma^2) = {:.4} \
             would require amplifying the input before the PA; raise the IBO or lower P_1dB",
            p1db / (ibo * sigma2)
        )));
    }
    Ok(alpha.min(1.0))
}

/// Amplifier parameters. Fields are private so `alpha` always matches the
/// other values.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct PaConfig {
    gain: Complex64,
    v_sat: f64,
    p1db: f64,
    ibo: f64,
    sigma2: f64,
    alpha: f64,
}

impl PaConfig {
    /// Limiter with saturation `v_sat`, unit gain, unit input power and
    /// `P_1dB = limiter_p1db(v_sat)`. `ibo` is linear.
    pub fn new(v_sat: f64, ibo: f64) -> Result<Self> {
        Self::build(Complex64::new(1.0, 0.0), v_sat, limiter_p1db(v_sat), ibo, 1.0)
    }

    /// Operating point where the back-off is realized by lowering the
    /// saturation level instead of attenuating the input: `alpha = 1` and
    /// `V_sat^2 = IBO sigma^2 / 10^(1/10)`. The normalized clipping
    /// threshold is then `Y = sqrt(IBO / 10^(1/10))`, so `Y = 1` at 1 dB.
    pub fn unit_drive(ibo: f64) -> Result<Self> {
        if !(ibo > 0.0) || !ibo.is_finite() {
            return Err(Error::config(format!("IBO must be positive and finite, got {ibo}")));
        }
        let v_sat = (ibo / 10f64.powf(0.1)).sqrt();
        Self::new(v_sat, ibo)
    }

    pub fn unit_drive_db(ibo_db: f64) -> Result<Self> {
        Self::unit_drive(10f64.powf(ibo_db / 10.0))
    }

    fn build(gain: Complex64, v_sat: f64, p1db: f64, ibo: f64, sigma2: f64) -> Result<Self> {
        if !(v_sat > 0.0) || !v_sat.is_finite() {
            return Err(Error::config(format!("V_sat must be positive and finite, got {v_sat}")));
        }
        if !(gain.norm() > 0.0) || !gain.norm().is_finite() {
            return Err(Error::config("PA gain must be non-zero and finite"));
        }
        let alpha = backoff_coefficient(p1db, ibo, sigma2)?;
        Ok(Self {
            gain,
            v_sat,
            p1db,
            ibo,
            sigma2,
            alpha,
        })
    }

    pub fn with_gain(self, gain: Complex64) -> Result<Self> {
        Self::build(gain, self.v_sat, self.p1db, self.ibo, self.sigma2)
    }

    pub fn with_p1db(self, p1db: f64) -> Result<Self> {
        Self::build(self.gain, self.v_sat, p1db, self.ibo, self.sigma2)
    }

    pub fn with_sigma2(self, sigma2: f64) -> Result<Self> {
        Self::build(self.gain, self.v_sat, self.p1db, self.ibo, sigma2)
    }

    pub fn gain(&self) -> Complex64 {
        self.gain
    }

    pub fn v_sat(&self) -> f64 {
        self.v_sat
    }

    pub fn p1db(&self) -> f64 {
        self.p1db
    }

    pub fn ibo(&self) -> f64 {
        self.ibo
    }

    pub fn sigma2(&self) -> f64 {
        self.sigma2
    }

    pub fn alpha(&self) -> f64 {
        self.alpha
    }

    /// Normalized clipping threshold `Y = V_sat / (|G| alpha sigma)`.
    pub fn clip_threshold(&self) -> f64 {
        self.v_sat / (self.gain.norm() * self.alpha * self.sigma2.sqrt())
    }

    /// Per-sample SEL transfer function applied to the unit-power input.
    #[inline]
    pub fn transfer(&self, x: Complex64) -> Complex64 {
        let u = self.gain * self.alpha * x;
        let r = u.norm();
        if r <= self.v_sat {
            u
        } else {
            u * (self.v_sat / r)
        }
    }

    pub fn amplify_slice(&self, x: &[Complex64]) -> Vec<Complex64> {
        x.iter().map(|&v| self.transfer(v)).collect()
    }

    /// Clipping residual `s - G alpha x`, zero wherever the PA is linear.
    pub fn clipping_distortion(&self, x: &[Complex64]) -> Vec<Complex64> {
        x.iter()
            .map(|&v| self.transfer(v) - self.gain * self.alpha * v)
            .collect()
    }
}

/// Applies the SEL to every sample. The cyclic-prefix marker is kept.
pub fn sel_amplify(signal: &TimeSignal, cfg: &PaConfig) -> TimeSignal {
    TimeSignal {
        samples: cfg.amplify_slice(&signal.samples),
        cp_len: signal.cp_len,
    }
}

/// Either an ideal linear amplifier (`s = x`) or a SEL.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Amplifier {
    Linear,
    Sel(PaConfig),
}

impl Amplifier {
    pub fn apply(&self, x: &[Complex64]) -> Vec<Complex64> {
        match self {
            Amplifier::Linear => x.to_vec(),
            Amplifier::Sel(cfg) => cfg.amplify_slice(x),
        }
    }

    pub fn config(&self) -> Option<&PaConfig> {
        match self {
            Amplifier::Linear => None,
            Amplifier::Sel(cfg) => Some(cfg),
        }
    }

    /// Linear output power per unit input power, `|G|^2 alpha^2`.
    pub fn linear_power_gain(&self) -> f64 {
        match self {
            Amplifier::Linear => 1.0,
            Amplifier::Sel(cfg) => cfg.gain.norm_sqr() * cfg.alpha * cfg.alpha,
        }
    }
}

/// Monte-Carlo Bussgang statistics of one (amplifier, signal) pair.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BussgangStats {
    /// `E[x^* s] / E|x|^2`.
    pub kappa: Complex64,
    /// `E|s - kappa x|^2`.
    pub distortion_var: f64,
    /// `E|s - kappa x|^4`.
    pub distortion_fourth_moment: f64,
    /// `|G|^2 alpha^2 sigma^2 / distortion_var`; infinite when nothing clips.
    pub sdr: f64,
    /// `Y = V_sat / (|G| alpha sigma)`.
    pub clip_threshold: f64,
    /// Sample `E|x|^2`.
    pub signal_power: f64,
    /// Sample `E|s|^2`.
    pub output_power: f64,
    /// Fraction of samples that were clipped.
    pub clip_fraction: f64,
    pub samples: u64,
}

#[derive(Default)]
struct FirstPass {
    cross: Complex64,
    px: f64,
    ps: f64,
    clipped: u64,
    n: u64,
}

#[derive(Default)]
struct SecondPass {
    d2: f64,
    d4: f64,
}

/// Bussgang statistics for OFDM/SC/CDMA blocks of random constellation
/// symbols. `trials` is the number of `N`-sample blocks.
pub fn estimate_bussgang(
    cfg: &PaConfig,
    basis: &SignalingBasis,
    constellation: ConstellationSpec,
    trials: usize,
    seed: &SeedStream,
) -> Result<BussgangStats> {
    let table = Constellation::new(constellation)?;
    let basis = *basis;
    estimate_bussgang_with(cfg, trials, seed, move |rng| {
        let s = table.draw(basis.size(), rng);
        Ok(basis.synthesize_slice(&s.0))
    })
}

/// Bussgang statistics for an arbitrary block generator. The generator is
/// called twice per trial with identical RNG streams, once to estimate
/// `kappa` and once for the distortion moments.
pub fn estimate_bussgang_with<G>(
    cfg: &PaConfig,
    trials: usize,
    seed: &SeedStream,
    generator: G,
) -> Result<BussgangStats>
where
    G: Fn(&mut ChaCha8Rng) -> Result<Vec<Complex64>> + Sync,
{
    if trials == 0 {
        return Err(Error::config("Bussgang estimation needs at least one trial"));
    }
    let v2 = cfg.v_sat * cfg.v_sat;
    let first = parallel::map_reduce(
        trials,
        seed,
        FirstPass::default,
        |acc, _, rng| {
            let x = generator(rng)?;
            for &v in &x {
                let s = cfg.transfer(v);
                acc.cross += v.conj() * s;
                acc.px += v.norm_sqr();
                acc.ps += s.norm_sqr();
                if (cfg.gain * cfg.alpha * v).norm_sqr() > v2 {
                    acc.clipped += 1;
                }
                acc.n += 1;
            }
            Ok(())
        },
        |a, b| {
            a.cross += b.cross;
            a.px += b.px;
            a.ps += b.ps;
            a.clipped += b.clipped;
            a.n += b.n;
        },
    )?;
    if !(first.px > 0.0) {
        return Err(Error::Numeric("input signal has zero power".into()));
    }
    let kappa = first.cross / first.px;
    let second = parallel::map_reduce(
        trials,
        seed,
        SecondPass::default,
        |acc, _, rng| {
            let x = generator(rng)?;
            for &v in &x {
                let d = (cfg.transfer(v) - kappa * v).norm_sqr();
                acc.d2 += d;
                acc.d4 += d * d;
            }
            Ok(())
        },
        |a, b| {
            a.d2 += b.d2;
            a.d4 += b.d4;
        },
    )?;
    let n = first.n as f64;
    let distortion_var = second.d2 / n;
    let stats = BussgangStats {
        kappa,
        distortion_var,
        distortion_fourth_moment: second.d4 / n,
        sdr: 0.0,
        clip_threshold: cfg.clip_threshold(),
        signal_power: first.px / n,
        output_power: first.ps / n,
        clip_fraction: first.clipped as f64 / n,
        samples: first.n,
    };
    Ok(BussgangStats {
        sdr: sdr(&stats, cfg),
        ..stats
    })
}

/// `SDR = |G|^2 alpha^2 sigma^2 / sigma_d^2`, `+inf` for a distortion-free PA.
pub fn sdr(stats: &BussgangStats, cfg: &PaConfig) -> f64 {
    let signal = cfg.gain.norm_sqr() * cfg.alpha * cfg.alpha * cfg.sigma2;
    if stats.distortion_var <= 0.0 {
        f64::INFINITY
    } else {
        signal / stats.distortion_var
    }
}

/// Same ratio written as `|G|^2 P_1dB / (IBO sigma_d^2)`.
pub fn sdr_from_ibo(stats: &BussgangStats, cfg: &PaConfig) -> f64 {
    if stats.distortion_var <= 0.0 {
        f64::INFINITY
    } else {
        cfg.gain.norm_sqr() * cfg.p1db / (cfg.ibo * stats.distortion_var)
    }
}

/// Effective SNR of a noisy, distorted link: `snr0 / (1 + snr0 / sdr)`.
/// Either argument may be `+inf`.
pub fn snr_eff(snr0: f64, sdr: f64) -> f64 {
    if sdr.is_infinite() {
        snr0
    } else if snr0.is_infinite() {
        sdr
    } else {
        snr0 / (1.0 + snr0 / sdr)
    }
}

/// `kappa / (G alpha)` for a circular complex Gaussian input clipped at
/// normalized threshold `y`.
pub fn gaussian_bussgang_gain(y: f64) -> f64 {
    1.0 - (-y * y).exp() + 0.5 * PI.sqrt() * y * libm::erfc(y)
}

/// `sigma_d^2 / (|G|^2 alpha^2 sigma^2)` for a Gaussian input at threshold `y`:
/// the clipped output power `1 - e^{-y^2}` minus `kappa^2`.
pub fn gaussian_distortion_ratio(y: f64) -> f64 {
    let k = gaussian_bussgang_gain(y);
    (1.0 - (-y * y).exp() - k * k).max(0.0)
}

/// Average clipping-residual power `E|s - G alpha x|^2` over `trials` blocks.
pub fn clipping_distortion_power(
    cfg: &PaConfig,
    basis: &SignalingBasis,
    constellation: ConstellationSpec,
    trials: usize,
    seed: &SeedStream,
) -> Result<f64> {
    if trials == 0 {
        return Err(Error::config("distortion estimate needs at least one trial"));
    }
    let table = Constellation::new(constellation)?;
    let (sum, n) = parallel::map_reduce(
        trials,
        seed,
        || (0.0f64, 0u64),
        |acc, _, rng| {
            let s = table.draw(basis.size(), rng);
            let x = basis.synthesize_slice(&s.0);
            acc.0 += cfg.clipping_distortion(&x).iter().map(|d| d.norm_sqr()).sum::<f64>();
            acc.1 += x.len() as u64;
            Ok(())
        },
        |a, b| {
            a.0 += b.0;
            a.1 += b.1;
        },
    )?;
    Ok(sum / n as f64)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::signaling::BasisKind;
    use approx::assert_relative_eq;
    use rand_distr::{Distribution, StandardNormal};

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    fn gaussian_block(n: usize, rng: &mut ChaCha8Rng) -> Vec<Complex64> {
        let s = std::f64::consts::FRAC_1_SQRT_2;
        (0..n)
            .map(|_| {
                let re: f64 = StandardNormal.sample(rng);
                let im: f64 = StandardNormal.sample(rng);
                c(re * s, im * s)
            })
            .collect()
    }

    #[test]
    fn backoff_examples() {
        assert_relative_eq!(backoff_coefficient(1.0, 1.0, 1.0).unwrap(), 1.0);
        let a = backoff_coefficient(1.0, 10f64.powf(0.4), 1.0).unwrap();
        assert!((a - 0.631).abs() < 5e-4, "{a}");
        assert!(matches!(backoff_coefficient(1.0, 0.5, 1.0), Err(Error::Config(_))));
        assert!(backoff_coefficient(0.0, 1.0, 1.0).is_err());
        assert!(backoff_coefficient(1.0, -1.0, 1.0).is_err());
    }

    #[test]
    fn limiter_one_db_point() {
        // unit-modulus drive at the returned P_1dB is compressed by exactly 1 dB
        let v = 0.7;
        let p = limiter_p1db(v);
        let cfg = PaConfig::new(v, 1.0).unwrap().with_p1db(p).unwrap();
        let x = c(p.sqrt(), 0.0);
        let out = cfg.transfer(x / cfg.alpha()).norm_sqr();
        assert_relative_eq!(10.0 * (p / out).log10(), 1.0, epsilon = 1e-12);
    }

    #[test]
    fn unit_drive_threshold() {
        let cfg = PaConfig::unit_drive_db(1.0).unwrap();
        assert_relative_eq!(cfg.alpha(), 1.0, epsilon = 1e-12);
        assert_relative_eq!(cfg.clip_threshold(), 1.0, epsilon = 1e-12);
        let y0 = PaConfig::unit_drive_db(0.0).unwrap().clip_threshold();
        assert_relative_eq!(y0, 10f64.powf(-0.05), epsilon = 1e-12);
    }

    #[test]
    fn transfer_regions() {
        let cfg = PaConfig::new(1.0, 10f64.powf(0.1)).unwrap();
        let x = c(0.3, -0.4);
        assert_eq!(cfg.transfer(x), x * cfg.alpha());
        let theta = 0.77;
        let big = Complex64::from_polar(3.0, theta);
        let out = cfg.transfer(big / cfg.alpha());
        assert_relative_eq!(out.norm(), 1.0, epsilon = 1e-15);
        assert_relative_eq!(out.arg(), theta, epsilon = 1e-15);
        let d = cfg.clipping_distortion(&[x]);
        assert_eq!(d[0], c(0.0, 0.0));
    }

    #[test]
    fn idempotent_and_phase_preserving() {
        let cfg = PaConfig::new(0.8, 10f64.powf(0.1) * 0.64).unwrap();
        assert_relative_eq!(cfg.alpha(), 1.0, epsilon = 1e-12);
        let mut rng = SeedStream::new(4).rng();
        let x = TimeSignal::new(gaussian_block(512, &mut rng));
        let s = sel_amplify(&x, &cfg);
        let s2 = sel_amplify(&s, &cfg);
        for (a, b) in s.samples.iter().zip(&s2.samples) {
            assert!((a - b).norm() <= 1e-15);
        }
        for (a, b) in x.samples.iter().zip(&s.samples) {
            assert!((a.arg() - b.arg()).abs() < 1e-15);
        }
    }

    #[test]
    fn linear_limit_kappa() {
        let cfg = PaConfig::unit_drive(64.0 * 10f64.powf(0.1)).unwrap();
        assert!(cfg.clip_threshold() >= 8.0);
        let basis = SignalingBasis::ofdm(64).unwrap();
        let st = estimate_bussgang(&cfg, &basis, ConstellationSpec::qam(16).unwrap(), 200, &SeedStream::new(1))
            .unwrap();
        assert!((st.kappa - cfg.gain() * cfg.alpha()).norm() < 1e-6);
        assert!(st.distortion_var < 1e-20);
        assert!(st.sdr.is_infinite());
    }

    #[test]
    fn gaussian_closed_form_value() {
        assert_relative_eq!(gaussian_bussgang_gain(1.0), 0.771_523, epsilon = 1e-6);
        assert!(gaussian_bussgang_gain(8.0) > 1.0 - 1e-12);
        // 1-D quadrature over the Rayleigh envelope: E[r min(r, Y)] / E[r^2]
        let y = 1.0;
        let steps = 400_000;
        let rmax = 10.0;
        let h = rmax / steps as f64;
        let mut acc = 0.0;
        for i in 0..steps {
            let r = (i as f64 + 0.5) * h;
            acc += r * r.min(y) * 2.0 * r * (-r * r).exp() * h;
        }
        assert_relative_eq!(acc, gaussian_bussgang_gain(y), epsilon = 1e-8);
    }

    #[test]
    fn ofdm_kappa_matches_gaussian_closed_form() {
        let cfg = PaConfig::unit_drive_db(1.0).unwrap();
        let basis = SignalingBasis::ofdm(1024).unwrap();
        let st = estimate_bussgang(&cfg, &basis, ConstellationSpec::psk(16).unwrap(), 400, &SeedStream::new(2))
            .unwrap();
        let k = st.kappa.re / cfg.alpha();
        let oracle = gaussian_bussgang_gain(cfg.clip_threshold());
        assert!((k - oracle).abs() / oracle < 0.005, "{k} vs {oracle}");
        assert!(st.kappa.im.abs() < 1e-3);
    }

    #[test]
    fn distortion_identity_and_orthogonality() {
        let cfg = PaConfig::unit_drive_db(1.0).unwrap();
        let basis = SignalingBasis::ofdm(256).unwrap();
        let spec = ConstellationSpec::qam(16).unwrap();
        let seed = SeedStream::new(3);
        let st = estimate_bussgang(&cfg, &basis, spec, 400, &seed).unwrap();
        let identity = st.output_power - st.kappa.norm_sqr() * st.signal_power;
        assert!((st.distortion_var - identity).abs() / st.distortion_var < 0.01);
        // E[x^* d] with d = s - kappa x
        let table = Constellation::new(spec).unwrap();
        let mut cross = c(0.0, 0.0);
        let mut n = 0.0;
        for t in 0..400 {
            let mut rng = seed.trial(t);
            let x = basis.synthesize_slice(&table.draw(256, &mut rng).0);
            for v in x {
                cross += v.conj() * (cfg.transfer(v) - st.kappa * v);
                n += 1.0;
            }
        }
        let rel = (cross / n).norm() / (st.signal_power.sqrt() * st.distortion_var.sqrt());
        assert!(rel < 0.01, "{rel}");
    }

    #[test]
    fn gaussian_distortion_matches_mc() {
        let cfg = PaConfig::unit_drive_db(1.0).unwrap();
        let st = estimate_bussgang_with(&cfg, 2000, &SeedStream::new(9), |rng| Ok(gaussian_block(256, rng)))
            .unwrap();
        let pred = gaussian_distortion_ratio(1.0);
        assert!((st.distortion_var - pred).abs() / pred < 0.02, "{} {pred}", st.distortion_var);
    }

    #[test]
    fn monotone_in_threshold() {
        let basis = SignalingBasis::ofdm(128).unwrap();
        let spec = ConstellationSpec::qam(16).unwrap();
        let mut prev: Option<BussgangStats> = None;
        for ibo_db in [0.0, 2.0, 4.0, 6.0, 8.0] {
            let cfg = PaConfig::unit_drive_db(ibo_db).unwrap();
            let st = estimate_bussgang(&cfg, &basis, spec, 300, &SeedStream::new(5)).unwrap();
            if let Some(p) = prev {
                assert!(st.kappa.re >= p.kappa.re);
                assert!(st.distortion_var <= p.distortion_var);
                assert!(st.sdr >= p.sdr);
            }
            prev = Some(st);
        }
    }

    #[test]
    fn sdr_two_ways() {
        let cfg = PaConfig::new(1.0, 2.0).unwrap();
        let basis = SignalingBasis::new(BasisKind::Ofdm, 64).unwrap();
        let st = estimate_bussgang(&cfg, &basis, ConstellationSpec::psk(16).unwrap(), 50, &SeedStream::new(6))
            .unwrap();
        assert_relative_eq!(sdr(&st, &cfg), sdr_from_ibo(&st, &cfg), max_relative = 1e-14);
    }

    #[test]
    fn snr_eff_examples() {
        assert_eq!(snr_eff(7.0, f64::INFINITY), 7.0);
        let s = 13.0;
        assert_relative_eq!(snr_eff(s, s), s / 2.0);
        let d = 20.0;
        assert!((snr_eff(1e6 * d, d) - d).abs() / d < 1e-5);
        assert_eq!(snr_eff(0.0, 3.0), 0.0);
    }

    #[test]
    fn distortion_power_decreases_with_ibo() {
        let basis = SignalingBasis::ofdm(256).unwrap();
        let spec = ConstellationSpec::psk(16).unwrap();
        let mut prev = f64::INFINITY;
        for ibo_db in [0.0, 2.0, 4.0, 6.0] {
            let cfg = PaConfig::unit_drive_db(ibo_db).unwrap();
            let p = clipping_distortion_power(&cfg, &basis, spec, 100, &SeedStream::new(7)).unwrap();
            assert!(p < prev);
            prev = p;
        }
    }
}
