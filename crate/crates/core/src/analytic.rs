//! Closed-form and semi-analytic AF predictors.
//!
//! * Bussgang view: the AF of `s = kappa x + d` expanded into self and cross
//!   ambiguity terms, and the large-`N` sidelobe/mainlobe expectations.
//! * SEL view: the zero-Doppler and zero-delay cuts written as
//!   probability-weighted sums over the four joint clipping events of the
//!   pair `(x(p), x(p-l))`, whose envelopes are modelled as bivariate
//!   Rayleigh with envelope-power correlation `rho(l)`.

use std::f64::consts::PI;

use num_complex::Complex64;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::ambiguity::{cross_af, AfCut, AfMode, ComplexAf};
use crate::dsp;
use crate::error::{Error, Result};
use crate::pa::PaConfig;
use crate::parallel;
use crate::seed::SeedStream;
use crate::signaling::{Constellation, ConstellationSpec, SignalingBasis};

const TRAPEZOID_START: usize = 4096;
const TRAPEZOID_MAX: usize = 1 << 22;
const TRAPEZOID_TOL: f64 = 1e-12;

/// `P(|x(p)| <= V_sat, |x(p-l)| <= V_sat)` for jointly Gaussian samples
/// with normalized threshold `y` and envelope-power correlation `rho`:
///
/// ```text
/// 1 - 2 e^{-Y^2} + (1/2pi) int_{-pi}^{pi}
///     exp(-Y^2 [1 + (1 - rho) / (1 + 2 sqrt(rho) sin(theta) + rho)]) dtheta
/// ```
///
/// `rho = 1` (the zero lag) returns the marginal `1 - e^{-Y^2}`. The
/// periodic integrand is evaluated with the trapezoid rule, doubling the
/// point count from 4096 until successive estimates agree to 1e-12.
pub fn joint_below_prob(y: f64, rho: f64) -> Result<f64> {
    if !(y > 0.0) || !y.is_finite() {
        return Err(Error::config(format!("clipping threshold Y must be positive, got {y}")));
    }
    if !(0.0..=1.0).contains(&rho) {
        return Err(Error::config(format!("envelope correlation must lie in [0, 1], got {rho}")));
    }
    let e = (-y * y).exp();
    if rho == 1.0 {
        return Ok(1.0 - e);
    }
    let sr = rho.sqrt();
    let f = |theta: f64| {
        let den = 1.0 + 2.0 * sr * theta.sin() + rho;
        (-y * y * (1.0 + (1.0 - rho) / den)).exp()
    };
    let mut n = TRAPEZOID_START;
    let h0 = 2.0 * PI / n as f64;
    let mut sum: f64 = (0..n).map(|i| f(-PI + i as f64 * h0)).sum();
    let mut mean = sum / n as f64;
    loop {
        let h = 2.0 * PI / n as f64;
        let mid: f64 = (0..n).map(|i| f(-PI + (i as f64 + 0.5) * h)).sum();
        sum += mid;
        n *= 2;
        let next = sum / n as f64;
        let delta = (next - mean).abs();
        mean = next;
        if delta < TRAPEZOID_TOL {
            break;
        }
        if n >= TRAPEZOID_MAX {
            return Err(Error::Numeric(format!(
                "joint clipping integral did not converge: Y = {y}, rho = {rho}, \
                 {n} points, last change {delta:.3e}"
            )));
        }
    }
    Ok(1.0 - 2.0 * e + mean)
}

/// The four joint clipping probabilities of a sample pair.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ClipProbabilities {
    pub y: f64,
    pub rho: f64,
    /// Both envelopes below `V_sat`.
    pub p_below_both: f64,
    /// One specific sample above, the other below (each of the two mixed
    /// events has this probability).
    pub p_mixed: f64,
    pub p_above_both: f64,
}

impl ClipProbabilities {
    /// `p_below_both + 2 p_mixed + p_above_both`.
    pub fn total(&self) -> f64 {
        self.p_below_both + 2.0 * self.p_mixed + self.p_above_both
    }
}

pub fn clip_probabilities(y: f64, rho: f64) -> Result<ClipProbabilities> {
    let below = joint_below_prob(y, rho)?;
    let e = (-y * y).exp();
    Ok(ClipProbabilities {
        y,
        rho,
        p_below_both: below,
        p_mixed: 1.0 - e - below,
        p_above_both: 2.0 * e + below - 1.0,
    })
}

/// Sample normalized covariance of `|x(p)|^2` and `|x(p-l)|^2` at one lag.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RhoEstimate {
    pub lag: usize,
    /// Estimate clipped to `[0, 1]`; `None` when an envelope variance is zero.
    pub rho: Option<f64>,
    /// Unclipped sample value.
    pub raw: Option<f64>,
    pub degenerate: bool,
    pub clipped_negative: bool,
}

#[derive(Clone, Copy, Default)]
struct PairSums {
    a: f64,
    b: f64,
    aa: f64,
    bb: f64,
    ab: f64,
    n: f64,
}

impl PairSums {
    fn add(&mut self, o: &PairSums) {
        self.a += o.a;
        self.b += o.b;
        self.aa += o.aa;
        self.bb += o.bb;
        self.ab += o.ab;
        self.n += o.n;
    }

    fn estimate(&self, lag: usize) -> RhoEstimate {
        let n = self.n;
        let (ma, mb) = (self.a / n, self.b / n);
        let va = self.aa / n - ma * ma;
        let vb = self.bb / n - mb * mb;
        let cov = self.ab / n - ma * mb;
        let tiny = 1e-12 * (ma * ma).max(mb * mb).max(f64::MIN_POSITIVE);
        if n == 0.0 || va <= tiny || vb <= tiny {
            return RhoEstimate {
                lag,
                rho: None,
                raw: None,
                degenerate: true,
                clipped_negative: false,
            };
        }
        let raw = cov / (va * vb).sqrt();
        RhoEstimate {
            lag,
            rho: Some(raw.clamp(0.0, 1.0)),
            raw: Some(raw),
            degenerate: false,
            clipped_negative: raw < 0.0,
        }
    }
}

fn pair_sums(env: &[f64], lag: usize, circular: bool, out: &mut PairSums) {
    let n = env.len();
    let lo = if circular { 0 } else { lag.min(n) };
    for p in lo..n {
        let q = if circular { (p + n - lag % n) % n } else { p - lag };
        let (a, b) = (env[p], env[q]);
        out.a += a;
        out.b += b;
        out.aa += a * a;
        out.bb += b * b;
        out.ab += a * b;
        out.n += 1.0;
    }
}

/// Envelope-power correlation `rho(l)` for `l = 0..=N`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LagCorrelation {
    pub rho: Vec<f64>,
    /// Pairs were formed modulo `N` (cyclic-prefix view).
    pub circular: bool,
    /// Lags whose estimate was negative and clipped to zero.
    pub clipped_lags: Vec<usize>,
    /// Lags with zero envelope variance (reported as 0).
    pub degenerate_lags: Vec<usize>,
}

impl LagCorrelation {
    /// `rho(0) = 1`, zero elsewhere: the i.i.d. Gaussian assumption.
    pub fn uncorrelated(n: usize) -> Self {
        let mut rho = vec![0.0; n + 1];
        rho[0] = 1.0;
        Self {
            rho,
            circular: false,
            clipped_lags: vec![],
            degenerate_lags: vec![],
        }
    }

    pub fn n(&self) -> usize {
        self.rho.len() - 1
    }

    /// `rho` at a signed lag. Periodic lags are reduced modulo `N` first;
    /// aperiodic lags use `|l|`, and `|l| >= N` is uncorrelated.
    pub fn at(&self, l: i64, mode: AfMode) -> f64 {
        let n = self.n() as i64;
        let idx = match mode {
            AfMode::Periodic => l.rem_euclid(n),
            AfMode::Aperiodic => l.abs(),
        };
        if idx >= n {
            if idx == 0 {
                1.0
            } else {
                0.0
            }
        } else {
            self.rho[idx as usize]
        }
    }

    /// Monte-Carlo estimate over `trials` blocks of the given signaling.
    pub fn estimate(
        constellation: ConstellationSpec,
        basis: &SignalingBasis,
        trials: usize,
        seed: &SeedStream,
        circular: bool,
    ) -> Result<Self> {
        let n = basis.size();
        let sums = envelope_pair_sums(constellation, basis, &(1..n).collect::<Vec<_>>(), trials, seed, circular)?;
        let mut rho = vec![0.0; n + 1];
        rho[0] = 1.0;
        let mut clipped = vec![];
        let mut degenerate = vec![];
        for (i, s) in sums.iter().enumerate() {
            let l = i + 1;
            let e = s.estimate(l);
            if e.degenerate {
                degenerate.push(l);
            }
            if e.clipped_negative {
                clipped.push(l);
            }
            rho[l] = e.rho.unwrap_or(0.0);
        }
        Ok(Self {
            rho,
            circular,
            clipped_lags: clipped,
            degenerate_lags: degenerate,
        })
    }
}

fn envelope_pair_sums(
    constellation: ConstellationSpec,
    basis: &SignalingBasis,
    lags: &[usize],
    trials: usize,
    seed: &SeedStream,
    circular: bool,
) -> Result<Vec<PairSums>> {
    if trials == 0 {
        return Err(Error::config("correlation estimate needs at least one trial"));
    }
    let table = Constellation::new(constellation)?;
    let n = basis.size();
    parallel::map_reduce(
        trials,
        seed,
        || vec![PairSums::default(); lags.len()],
        |acc, _, rng| {
            let x = basis.synthesize_slice(&table.draw(n, rng).0);
            let env: Vec<f64> = x.iter().map(|v| v.norm_sqr()).collect();
            for (slot, &l) in acc.iter_mut().zip(lags) {
                pair_sums(&env, l, circular, slot);
            }
            Ok(())
        },
        |a, b| {
            for (x, y) in a.iter_mut().zip(&b) {
                x.add(y);
            }
        },
    )
}

/// `rho(l)` at a single lag `0 <= l <= N`. Lag `N` has no in-symbol pairs
/// in the aperiodic view and reduces to lag 0 in the circular one.
pub fn estimate_rho(
    constellation: ConstellationSpec,
    basis: &SignalingBasis,
    lag: usize,
    trials: usize,
    seed: &SeedStream,
    circular: bool,
) -> Result<RhoEstimate> {
    let n = basis.size();
    if lag > n {
        return Err(Error::config(format!("lag {lag} outside 0..={n}")));
    }
    let effective = if circular { lag % n } else { lag };
    if effective == 0 {
        return Ok(RhoEstimate {
            lag,
            rho: Some(1.0),
            raw: Some(1.0),
            degenerate: false,
            clipped_negative: false,
        });
    }
    if effective == n {
        return Ok(RhoEstimate {
            lag,
            rho: Some(0.0),
            raw: Some(0.0),
            degenerate: false,
            clipped_negative: false,
        });
    }
    let sums = envelope_pair_sums(constellation, basis, &[effective], trials, seed, circular)?;
    let mut est = sums[0].estimate(lag);
    est.lag = lag;
    Ok(est)
}

/// Self and cross AFs of the Bussgang components of one realization.
#[derive(Debug, Clone, PartialEq)]
pub struct BussgangAfTerms {
    pub kappa: Complex64,
    pub a_x: ComplexAf,
    pub a_d: ComplexAf,
    pub a_xd: ComplexAf,
    pub a_dx: ComplexAf,
}

pub fn bussgang_af_decompose(
    x: &[Complex64],
    d: &[Complex64],
    kappa: Complex64,
    k_grid: usize,
    mode: AfMode,
) -> Result<BussgangAfTerms> {
    if x.len() != d.len() {
        return Err(Error::dim(x.len(), d.len()));
    }
    Ok(BussgangAfTerms {
        kappa,
        a_x: cross_af(x, x, k_grid, mode)?,
        a_d: cross_af(d, d, k_grid, mode)?,
        a_xd: cross_af(x, d, k_grid, mode)?,
        a_dx: cross_af(d, x, k_grid, mode)?,
    })
}

impl BussgangAfTerms {
    /// `|A(l,k)|^2` rebuilt from the four terms on the natural grid.
    ///
    /// With `A = |k|^2 A_x + k A_xd + k^* A_dx + A_d` the squared magnitude
    /// is the four self terms plus
    /// `2 Re{|k|^2 k^* A_x A_xd^* + |k|^2 k A_x A_dx^* + |k|^2 A_x A_d^*
    ///       + k^2 A_xd A_dx^* + k A_xd A_d^* + k^* A_dx A_d^*}`,
    /// which for real `kappa` is the usual real-gain expansion.
    pub fn recombine(&self) -> Vec<f64> {
        let k = self.kappa;
        let k2 = k.norm_sqr();
        let kc = k.conj();
        (0..self.a_x.values.len())
            .map(|i| {
                let ax = self.a_x.values[i];
                let ad = self.a_d.values[i];
                let axd = self.a_xd.values[i];
                let adx = self.a_dx.values[i];
                let selfs = k2 * k2 * ax.norm_sqr() + k2 * (axd.norm_sqr() + adx.norm_sqr()) + ad.norm_sqr();
                let cross = k2 * kc * ax * axd.conj()
                    + k2 * k * ax * adx.conj()
                    + k2 * ax * ad.conj()
                    + k * k * axd * adx.conj()
                    + k * axd * ad.conj()
                    + kc * adx * ad.conj();
                selfs + 2.0 * cross.re
            })
            .collect()
    }

    /// Zero-Doppler cut keeping only the self terms and the `A_x A_d^*`
    /// cross term: `|k|^4 |A_x|^2 + |A_d|^2 + 2 Re{k^2 A_x A_d^*}`.
    /// Indexed like `a_x.delays`.
    pub fn zero_doppler_reduced(&self) -> Vec<f64> {
        let k = self.kappa;
        let k4 = k.norm_sqr().powi(2);
        self.a_x
            .delays
            .iter()
            .map(|&l| {
                let ax = self.a_x.get(l, 0).unwrap_or_default();
                let ad = self.a_d.get(l, 0).unwrap_or_default();
                k4 * ax.norm_sqr() + ad.norm_sqr() + 2.0 * (k * k * ax * ad.conj()).re
            })
            .collect()
    }

    /// `2 Re{k^2 A_x(l,0) A_d^*(l,0)}` per delay.
    pub fn zero_doppler_cross_term(&self) -> Vec<f64> {
        let k = self.kappa;
        self.a_x
            .delays
            .iter()
            .map(|&l| {
                let ax = self.a_x.get(l, 0).unwrap_or_default();
                let ad = self.a_d.get(l, 0).unwrap_or_default();
                2.0 * (k * k * ax * ad.conj()).re
            })
            .collect()
    }
}

/// Large-`N` Bussgang expectations of the zero-Doppler cut.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BussgangExpectation {
    /// `|kappa|^4 sigma^4 + sigma_d^4`.
    pub per_lag: f64,
    /// `(2N - 2) per_lag`.
    pub eisl: f64,
    /// `2 |kappa|^4 sigma^4 + E|d|^4 + 2 |kappa|^2 N sigma^2 sigma_d^2`.
    pub mainlobe: f64,
    pub eislr: f64,
}

pub fn expected_zero_doppler_bussgang(
    kappa: Complex64,
    sigma2: f64,
    sigma_d2: f64,
    d_fourth: f64,
    n: usize,
) -> Result<BussgangExpectation> {
    if n < 2 {
        return Err(Error::config("signal length must be >= 2"));
    }
    if !(sigma2 > 0.0) || sigma_d2 < 0.0 || d_fourth < 0.0 {
        return Err(Error::config("need sigma^2 > 0, sigma_d^2 >= 0 and E|d|^4 >= 0"));
    }
    let k2 = kappa.norm_sqr();
    let per_lag = k2 * k2 * sigma2 * sigma2 + sigma_d2 * sigma_d2;
    let eisl = (2 * n - 2) as f64 * per_lag;
    let mainlobe = 2.0 * k2 * k2 * sigma2 * sigma2 + d_fourth + 2.0 * k2 * n as f64 * sigma2 * sigma_d2;
    Ok(BussgangExpectation {
        per_lag,
        eisl,
        mainlobe,
        eislr: eisl / mainlobe,
    })
}

/// Probability-weighted clipping terms of the SEL zero-Doppler cut.
///
/// With `u = G alpha x` the PA input and `V = V_sat`:
///
/// ```text
/// W1(l) = P_<  A_u(l,0)
/// W2(l) = P_mix (V/sqrt(N)) sum_p u(p) e^{-j arg u(p-l)}
/// W3(l) = P_mix (V/sqrt(N)) sum_p u(p-l) e^{ j arg u(p)}
/// W4(l) = P_>  (V^2/sqrt(N)) sum_p e^{j(arg u(p) - arg u(p-l))}
/// ```
#[derive(Debug, Clone, PartialEq)]
pub struct SelAfTerms {
    pub delays: Vec<i64>,
    pub w1: Vec<Complex64>,
    pub w2: Vec<Complex64>,
    pub w3: Vec<Complex64>,
    pub w4: Vec<Complex64>,
    pub probabilities: Vec<ClipProbabilities>,
}

impl SelAfTerms {
    /// `W1 + 2 (W2 + W3) + W4`: the cut with the doubled mixed-event weight.
    pub fn zero_doppler_cut(&self) -> Vec<Complex64> {
        (0..self.delays.len())
            .map(|i| self.w1[i] + 2.0 * (self.w2[i] + self.w3[i]) + self.w4[i])
            .collect()
    }

    /// `W1 + W2 + W3 + W4`, whose squared magnitude enters the EISL sum.
    pub fn sum(&self) -> Vec<Complex64> {
        (0..self.delays.len())
            .map(|i| self.w1[i] + self.w2[i] + self.w3[i] + self.w4[i])
            .collect()
    }
}

fn unit_phase(v: Complex64) -> Complex64 {
    let r = v.norm();
    if r > 0.0 {
        v / r
    } else {
        Complex64::new(1.0, 0.0)
    }
}

/// Joint clip probabilities for every lag of `mode`, computed once per
/// distinct `rho`.
pub fn lag_probabilities(
    cfg: &PaConfig,
    rho: &LagCorrelation,
    n: usize,
    mode: AfMode,
) -> Result<Vec<ClipProbabilities>> {
    if rho.n() < n {
        return Err(Error::config(format!(
            "lag correlation covers N = {}, signal needs N = {n}",
            rho.n()
        )));
    }
    let y = cfg.clip_threshold();
    let mut cache: Vec<(u64, ClipProbabilities)> = Vec::new();
    mode.delays(n)
        .into_iter()
        .map(|l| {
            let r = rho.at(l, mode);
            if let Some((_, p)) = cache.iter().find(|(b, _)| *b == r.to_bits()) {
                return Ok(*p);
            }
            let p = clip_probabilities(y, r)?;
            cache.push((r.to_bits(), p));
            Ok(p)
        })
        .collect()
}

/// W-terms for one realization `x` (unit-power PA input before back-off).
pub fn sel_af_terms(
    x: &[Complex64],
    cfg: &PaConfig,
    probabilities: &[ClipProbabilities],
    mode: AfMode,
) -> Result<SelAfTerms> {
    let n = x.len();
    if n < 2 {
        return Err(Error::config("signal length must be >= 2"));
    }
    let delays = mode.delays(n);
    if probabilities.len() != delays.len() {
        return Err(Error::dim(delays.len(), probabilities.len()));
    }
    let g = cfg.gain() * cfg.alpha();
    let u: Vec<Complex64> = x.iter().map(|&v| g * v).collect();
    let ph: Vec<Complex64> = u.iter().map(|&v| unit_phase(v)).collect();
    let v = cfg.v_sat();
    let norm = 1.0 / (n as f64).sqrt();
    let mut w = [Vec::new(), Vec::new(), Vec::new(), Vec::new()];
    for (&l, pr) in delays.iter().zip(probabilities) {
        let mut acc = [Complex64::new(0.0, 0.0); 4];
        for p in 0..n {
            let q = p as i64 - l;
            let q = match mode {
                AfMode::Periodic => q.rem_euclid(n as i64) as usize,
                AfMode::Aperiodic => {
                    if q < 0 || q >= n as i64 {
                        continue;
                    }
                    q as usize
                }
            };
            acc[0] += u[p] * u[q].conj();
            acc[1] += u[p] * ph[q].conj();
            acc[2] += u[q] * ph[p];
            acc[3] += ph[p] * ph[q].conj();
        }
        w[0].push(pr.p_below_both * norm * acc[0]);
        w[1].push(pr.p_mixed * v * norm * acc[1]);
        w[2].push(pr.p_mixed * v * norm * acc[2]);
        w[3].push(pr.p_above_both * v * v * norm * acc[3]);
    }
    let [w1, w2, w3, w4] = w;
    Ok(SelAfTerms {
        delays,
        w1,
        w2,
        w3,
        w4,
        probabilities: probabilities.to_vec(),
    })
}

/// Analytic SEL zero-Doppler cut `A(l, 0)` of one realization.
pub fn sel_zero_doppler_cut(
    x: &[Complex64],
    cfg: &PaConfig,
    rho: &LagCorrelation,
    mode: AfMode,
) -> Result<Vec<Complex64>> {
    let probs = lag_probabilities(cfg, rho, x.len(), mode)?;
    Ok(sel_af_terms(x, cfg, &probs, mode)?.zero_doppler_cut())
}

/// Analytic SEL zero-delay cut `A(0, k)` on a `K`-point grid, natural order.
///
/// Each output power `|s(p)|^2` is replaced by its clip-weighted value
/// `(1 - e^{-Y^2}) |u(p)|^2 + e^{-Y^2} V_sat^2`, giving
/// `(1/sqrt(N)) ((1 - e^{-Y^2}) sum_p |u(p)|^2 e^{-j 2 pi k p / K}
///  + V_sat^2 e^{-Y^2} sum_p e^{-j 2 pi k p / K})`.
/// The second sum is `N delta(k)` when `K = N`.
pub fn sel_zero_delay_cut(x: &[Complex64], cfg: &PaConfig, k_grid: usize) -> Result<Vec<Complex64>> {
    let n = x.len();
    if n < 2 {
        return Err(Error::config("signal length must be >= 2"));
    }
    if k_grid < 1 {
        return Err(Error::config("Doppler grid size K must be >= 1"));
    }
    let y = cfg.clip_threshold();
    let e = (-y * y).exp();
    let g2 = (cfg.gain() * cfg.alpha()).norm_sqr();
    let floor = e * cfg.v_sat() * cfg.v_sat();
    let mut buf = vec![Complex64::new(0.0, 0.0); k_grid];
    for (p, v) in x.iter().enumerate() {
        buf[p % k_grid] += (1.0 - e) * g2 * v.norm_sqr() + floor;
    }
    dsp::fft_in_place(&mut buf);
    let norm = 1.0 / (n as f64).sqrt();
    for b in buf.iter_mut() {
        *b *= norm;
    }
    Ok(buf)
}

/// Monte-Carlo EISL predicted by the W-terms.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SelEisl {
    /// `sum_{l != 0} E|W1 + W2 + W3 + W4|^2`, counting `l = 1-N..N-1`
    /// (periodic lags reduced modulo `N`).
    pub eisl: f64,
    /// `E|sum W_i(0)|^2`.
    pub mainlobe: f64,
    pub eislr: f64,
    pub delays: Vec<i64>,
    /// `E|sum W_i(l)|^2` per delay.
    pub per_lag: Vec<f64>,
    pub trials: usize,
}

/// EISL from the W-term expectations over `trials` realizations produced by
/// `generator` (unit-power PA input blocks of length `n`).
pub fn sel_eisl_with<G>(
    cfg: &PaConfig,
    rho: &LagCorrelation,
    n: usize,
    mode: AfMode,
    trials: usize,
    seed: &SeedStream,
    generator: G,
) -> Result<SelEisl>
where
    G: Fn(&mut ChaCha8Rng) -> Result<Vec<Complex64>> + Sync,
{
    if trials == 0 {
        return Err(Error::config("EISL estimate needs at least one trial"));
    }
    let probs = lag_probabilities(cfg, rho, n, mode)?;
    let delays = mode.delays(n);
    let sums = parallel::map_reduce(
        trials,
        seed,
        || vec![0.0; delays.len()],
        |acc, _, rng| {
            let x = generator(rng)?;
            if x.len() != n {
                return Err(Error::dim(n, x.len()));
            }
            let terms = sel_af_terms(&x, cfg, &probs, mode)?;
            for (a, w) in acc.iter_mut().zip(terms.sum()) {
                *a += w.norm_sqr();
            }
            Ok(())
        },
        |a, b| parallel::add_assign(a, &b),
    )?;
    let per_lag: Vec<f64> = sums.iter().map(|s| s / trials as f64).collect();
    let weight = if mode == AfMode::Periodic { 2.0 } else { 1.0 };
    let mut eisl = 0.0;
    let mut mainlobe = 0.0;
    for (&l, &v) in delays.iter().zip(&per_lag) {
        if l == 0 {
            mainlobe = v;
        } else {
            eisl += weight * v;
        }
    }
    Ok(SelEisl {
        eisl,
        mainlobe,
        eislr: if mainlobe > 0.0 { eisl / mainlobe } else { f64::NAN },
        delays,
        per_lag,
        trials,
    })
}

pub fn sel_eisl(
    cfg: &PaConfig,
    constellation: ConstellationSpec,
    basis: &SignalingBasis,
    rho: &LagCorrelation,
    mode: AfMode,
    trials: usize,
    seed: &SeedStream,
) -> Result<SelEisl> {
    let table = Constellation::new(constellation)?;
    let b = *basis;
    sel_eisl_with(cfg, rho, basis.size(), mode, trials, seed, move |rng| {
        Ok(b.synthesize_slice(&table.draw(b.size(), rng).0))
    })
}

/// Averages `|cut|^2` of a per-realization complex cut over `trials` and
/// returns it with the given axis.
pub fn average_cut<G, F>(
    axis: Vec<i64>,
    trials: usize,
    seed: &SeedStream,
    generator: G,
    cut: F,
) -> Result<AfCut>
where
    G: Fn(&mut ChaCha8Rng) -> Result<Vec<Complex64>> + Sync,
    F: Fn(&[Complex64]) -> Result<Vec<f64>> + Sync,
{
    if trials == 0 {
        return Err(Error::config("average needs at least one trial"));
    }
    let len = axis.len();
    let (sum, sq) = parallel::map_reduce(
        trials,
        seed,
        || (vec![0.0; len], vec![0.0; len]),
        |acc, _, rng| {
            let x = generator(rng)?;
            let v = cut(&x)?;
            if v.len() != len {
                return Err(Error::dim(len, v.len()));
            }
            for (i, val) in v.iter().enumerate() {
                acc.0[i] += val;
                acc.1[i] += val * val;
            }
            Ok(())
        },
        |a, b| {
            parallel::add_assign(&mut a.0, &b.0);
            parallel::add_assign(&mut a.1, &b.1);
        },
    )?;
    let t = trials as f64;
    let values: Vec<f64> = sum.iter().map(|s| s / t).collect();
    let std_err = (trials > 1).then(|| {
        values
            .iter()
            .zip(&sq)
            .map(|(m, q)| (((q / t - m * m) * t / (t - 1.0)).max(0.0) / t).sqrt())
            .collect()
    });
    Ok(AfCut { axis, values, std_err })
}
