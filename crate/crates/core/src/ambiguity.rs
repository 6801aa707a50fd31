//! Empirical periodic and aperiodic ambiguity functions (AF).
//!
//! For a length-`N` signal the discrete AF on a `K`-point Doppler grid is
//!
//! ```text
//! A(l, k) = (1/sqrt(N)) sum_p u(p) v^*(p - l) exp(-j 2 pi k p / K)
//! ```
//!
//! with `p - l` taken modulo `N` for the periodic AF (PAF) and zero-extended
//! for the aperiodic AF (AAF). `K = N` is the native grid; `K > N` zero-pads
//! the lag product and `K < N` folds it modulo `K`.

use num_complex::Complex64;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::dsp;
use crate::error::{Error, Result};
use crate::parallel;
use crate::seed::SeedStream;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum AfMode {
    Periodic,
    Aperiodic,
}

impl AfMode {
    /// Delay axis: `0..N` (periodic) or `1-N..N` (aperiodic).
    pub fn delays(self, n: usize) -> Vec<i64> {
        let n = n as i64;
        match self {
            AfMode::Periodic => (0..n).collect(),
            AfMode::Aperiodic => (1 - n..n).collect(),
        }
    }
}

/// Complex AF of one realization, Doppler bins in natural FFT order.
#[derive(Debug, Clone, PartialEq)]
pub struct ComplexAf {
    pub n: usize,
    pub k_grid: usize,
    pub mode: AfMode,
    pub delays: Vec<i64>,
    /// Row-major `delays.len() x k_grid`.
    pub values: Vec<Complex64>,
}

impl ComplexAf {
    fn row_of(&self, l: i64) -> Option<usize> {
        let first = *self.delays.first()?;
        let r = l - first;
        (r >= 0 && (r as usize) < self.delays.len()).then_some(r as usize)
    }

    /// `A(l, k)`; `k` may be negative and is taken modulo `K`. Periodic lags
    /// are also reduced modulo `N`.
    pub fn get(&self, l: i64, k: i64) -> Option<Complex64> {
        let l = match self.mode {
            AfMode::Periodic => l.rem_euclid(self.n as i64),
            AfMode::Aperiodic => l,
        };
        let row = self.row_of(l)?;
        let col = k.rem_euclid(self.k_grid as i64) as usize;
        Some(self.values[row * self.k_grid + col])
    }

    /// Squared magnitude with the Doppler axis centered.
    pub fn to_surface(&self) -> AmbiguitySurface {
        let mut values = Vec::with_capacity(self.values.len());
        for row in self.values.chunks(self.k_grid) {
            let sq: Vec<f64> = row.iter().map(|v| v.norm_sqr()).collect();
            values.extend(dsp::fftshift(&sq));
        }
        let mainlobe = self.get(0, 0).map(|v| v.norm_sqr()).unwrap_or(0.0);
        AmbiguitySurface {
            values,
            std_err: None,
            delays: self.delays.clone(),
            dopplers: dsp::shifted_axis(self.k_grid),
            mode: self.mode,
            n: self.n,
            normalized: false,
            mainlobe_raw: mainlobe,
            realizations: 1,
        }
    }
}

fn check_inputs(u: &[Complex64], v: &[Complex64], k_grid: usize) -> Result<()> {
    if u.len() != v.len() {
        return Err(Error::dim(u.len(), v.len()));
    }
    if u.len() < 2 {
        return Err(Error::config("ambiguity function needs at least 2 samples"));
    }
    if k_grid < 1 {
        return Err(Error::config("Doppler grid size K must be >= 1"));
    }
    Ok(())
}

/// Zero-Doppler rows for every lag via one FFT correlation.
fn correlation_rows(u: &[Complex64], v: &[Complex64], mode: AfMode) -> Vec<Complex64> {
    let n = u.len();
    let len = match mode {
        AfMode::Periodic => n,
        AfMode::Aperiodic => 2 * n,
    };
    let mut a = vec![Complex64::new(0.0, 0.0); len];
    let mut b = a.clone();
    a[..n].copy_from_slice(u);
    b[..n].copy_from_slice(v);
    dsp::fft_in_place(&mut a);
    dsp::fft_in_place(&mut b);
    for (x, y) in a.iter_mut().zip(&b) {
        *x *= y.conj();
    }
    dsp::ifft_in_place(&mut a);
    let s = 1.0 / (len as f64 * (n as f64).sqrt());
    mode.delays(n)
        .into_iter()
        .map(|l| a[l.rem_euclid(len as i64) as usize] * s)
        .collect()
}

fn lag_rows(u: &[Complex64], v: &[Complex64], lags: &[i64], k_grid: usize, mode: AfMode) -> Vec<Complex64> {
    let n = u.len();
    let s = 1.0 / (n as f64).sqrt();
    let mut out = Vec::with_capacity(lags.len() * k_grid);
    let mut buf = vec![Complex64::new(0.0, 0.0); k_grid];
    for &l in lags {
        buf.iter_mut().for_each(|b| *b = Complex64::new(0.0, 0.0));
        for p in 0..n {
            let q = p as i64 - l;
            let vq = match mode {
                AfMode::Periodic => v[q.rem_euclid(n as i64) as usize],
                AfMode::Aperiodic => {
                    if q < 0 || q >= n as i64 {
                        continue;
                    }
                    v[q as usize]
                }
            };
            buf[p % k_grid] += u[p] * vq.conj();
        }
        dsp::fft_in_place(&mut buf);
        out.extend(buf.iter().map(|b| b * s));
    }
    out
}

/// Complex cross-ambiguity `A_{u,v}(l, k)` over the full delay axis.
pub fn cross_af(u: &[Complex64], v: &[Complex64], k_grid: usize, mode: AfMode) -> Result<ComplexAf> {
    check_inputs(u, v, k_grid)?;
    let n = u.len();
    let delays = mode.delays(n);
    let values = if k_grid == 1 {
        correlation_rows(u, v, mode)
    } else {
        lag_rows(u, v, &delays, k_grid, mode)
    };
    Ok(ComplexAf {
        n,
        k_grid,
        mode,
        delays,
        values,
    })
}

/// Complex `A_{u,v}(0, k)` only (the zero-delay cut).
pub fn cross_af_zero_delay(u: &[Complex64], v: &[Complex64], k_grid: usize, mode: AfMode) -> Result<ComplexAf> {
    check_inputs(u, v, k_grid)?;
    Ok(ComplexAf {
        n: u.len(),
        k_grid,
        mode,
        delays: vec![0],
        values: lag_rows(u, v, &[0], k_grid, mode),
    })
}

/// `|A(l,k)|^2` of the periodic AF of one realization.
pub fn paf(signal: &[Complex64], k_grid: usize) -> Result<AmbiguitySurface> {
    Ok(cross_af(signal, signal, k_grid, AfMode::Periodic)?.to_surface())
}

/// `|A(l,k)|^2` of the aperiodic AF of one realization.
pub fn aaf(signal: &[Complex64], k_grid: usize) -> Result<AmbiguitySurface> {
    Ok(cross_af(signal, signal, k_grid, AfMode::Aperiodic)?.to_surface())
}

/// Squared AF on a delay-Doppler grid, possibly averaged over realizations.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AmbiguitySurface {
    /// Row-major `delays.len() x dopplers.len()`.
    pub values: Vec<f64>,
    /// Standard error of each averaged cell (same scaling as `values`).
    pub std_err: Option<Vec<f64>>,
    pub delays: Vec<i64>,
    /// Centered Doppler bins, `-K/2 .. K/2`.
    pub dopplers: Vec<i64>,
    pub mode: AfMode,
    /// Signal length.
    pub n: usize,
    pub normalized: bool,
    /// `|A(0,0)|^2` (or its average) before normalization.
    pub mainlobe_raw: f64,
    pub realizations: usize,
}

/// One slice of a surface together with its axis.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AfCut {
    pub axis: Vec<i64>,
    pub values: Vec<f64>,
    pub std_err: Option<Vec<f64>>,
}

impl AfCut {
    pub fn at(&self, index: i64) -> Option<f64> {
        self.axis.iter().position(|&a| a == index).map(|i| self.values[i])
    }

    pub fn db(&self) -> Vec<f64> {
        self.values.iter().map(|&v| dsp::to_db(v)).collect()
    }
}

impl AmbiguitySurface {
    pub fn cols(&self) -> usize {
        self.dopplers.len()
    }

    fn row(&self, l: i64) -> Option<usize> {
        self.delays.iter().position(|&d| d == l)
    }

    fn col(&self, k: i64) -> Option<usize> {
        self.dopplers.iter().position(|&d| d == k)
    }

    pub fn value(&self, l: i64, k: i64) -> Option<f64> {
        Some(self.values[self.row(l)? * self.cols() + self.col(k)?])
    }

    pub fn max(&self) -> f64 {
        self.values.iter().copied().fold(0.0, f64::max)
    }

    /// Divides by the `(0,0)` value so the mainlobe equals 1.
    pub fn normalize(mut self) -> Result<Self> {
        if self.normalized {
            return Ok(self);
        }
        let m = self.mainlobe_raw;
        if !(m > 0.0) {
            return Err(Error::Metric("cannot normalize: mainlobe is zero".into()));
        }
        self.values.iter_mut().for_each(|v| *v /= m);
        if let Some(se) = self.std_err.as_mut() {
            se.iter_mut().for_each(|v| *v /= m);
        }
        self.normalized = true;
        Ok(self)
    }

    /// Values on the raw (unnormalized) scale.
    pub fn raw_values(&self) -> Vec<f64> {
        if self.normalized {
            self.values.iter().map(|v| v * self.mainlobe_raw).collect()
        } else {
            self.values.clone()
        }
    }

    fn column(&self, c: usize, raw: bool) -> (Vec<f64>, Option<Vec<f64>>) {
        let s = if raw && self.normalized { self.mainlobe_raw } else { 1.0 };
        let cols = self.cols();
        let vals = (0..self.delays.len()).map(|r| self.values[r * cols + c] * s).collect();
        let se = self
            .std_err
            .as_ref()
            .map(|e| (0..self.delays.len()).map(|r| e[r * cols + c] * s).collect());
        (vals, se)
    }

    /// `|A(l, 0)|^2` over all delays.
    pub fn zero_doppler_cut(&self) -> AfCut {
        let c = self.col(0).expect("Doppler axis always contains 0");
        let (values, std_err) = self.column(c, false);
        AfCut {
            axis: self.delays.clone(),
            values,
            std_err,
        }
    }

    /// `|A(0, k)|^2` over all Doppler bins.
    pub fn zero_delay_cut(&self) -> AfCut {
        let r = self.row(0).expect("delay axis always contains 0");
        let cols = self.cols();
        AfCut {
            axis: self.dopplers.clone(),
            values: self.values[r * cols..(r + 1) * cols].to_vec(),
            std_err: self.std_err.as_ref().map(|e| e[r * cols..(r + 1) * cols].to_vec()),
        }
    }
}

/// Averages `|A|^2` over `trials` independent realizations drawn from
/// `generator`, then normalizes by the averaged `(0,0)` value.
pub fn average_af<G>(
    generator: G,
    trials: usize,
    k_grid: usize,
    mode: AfMode,
    seed: &SeedStream,
) -> Result<AmbiguitySurface>
where
    G: Fn(&mut ChaCha8Rng) -> Result<Vec<Complex64>> + Sync,
{
    average_with(generator, trials, k_grid, mode, seed, false)
}

/// Like [`average_af`] but evaluates only the zero-delay row.
pub fn average_zero_delay<G>(
    generator: G,
    trials: usize,
    k_grid: usize,
    mode: AfMode,
    seed: &SeedStream,
) -> Result<AmbiguitySurface>
where
    G: Fn(&mut ChaCha8Rng) -> Result<Vec<Complex64>> + Sync,
{
    average_with(generator, trials, k_grid, mode, seed, true)
}

fn average_with<G>(
    generator: G,
    trials: usize,
    k_grid: usize,
    mode: AfMode,
    seed: &SeedStream,
    zero_delay_only: bool,
) -> Result<AmbiguitySurface>
where
    G: Fn(&mut ChaCha8Rng) -> Result<Vec<Complex64>> + Sync,
{
    if trials < 1 {
        return Err(Error::config("average_af needs at least one trial"));
    }
    let one = |rng: &mut ChaCha8Rng| -> Result<AmbiguitySurface> {
        let s = generator(rng)?;
        let af = if zero_delay_only {
            cross_af_zero_delay(&s, &s, k_grid, mode)?
        } else {
            cross_af(&s, &s, k_grid, mode)?
        };
        Ok(af.to_surface())
    };
    // shape from a throwaway realization on a separate stream
    let template = one(&mut seed.derive("shape").rng())?;
    let cells = template.values.len();
    let (sum, sum_sq) = parallel::map_reduce(
        trials,
        seed,
        || (vec![0.0; cells], vec![0.0; cells]),
        |acc, _, rng| {
            let s = one(rng)?;
            if s.values.len() != cells {
                return Err(Error::dim(cells, s.values.len()));
            }
            for (i, v) in s.values.iter().enumerate() {
                acc.0[i] += v;
                acc.1[i] += v * v;
            }
            Ok(())
        },
        |a, b| {
            parallel::add_assign(&mut a.0, &b.0);
            parallel::add_assign(&mut a.1, &b.1);
        },
    )?;
    let t = trials as f64;
    let mean: Vec<f64> = sum.iter().map(|s| s / t).collect();
    let std_err = (trials > 1).then(|| {
        mean.iter()
            .zip(&sum_sq)
            .map(|(m, q)| {
                let var = ((q / t - m * m) * t / (t - 1.0)).max(0.0);
                (var / t).sqrt()
            })
            .collect()
    });
    let mut surf = AmbiguitySurface {
        values: mean,
        std_err,
        realizations: trials,
        ..template
    };
    surf.mainlobe_raw = surf.value(0, 0).unwrap_or(0.0);
    surf.normalize()
}

/// Sidelobe statistics of the zero-Doppler cut.
///
/// Sums run over `l = 1-N .. N-1`, `l != 0`. For a periodic surface the lag
/// is reduced modulo `N`, so each distinct non-zero lag is counted twice and
/// both conventions share the `2N-2` sidelobe count.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SidelobeMetrics {
    /// Integrated sidelobe level (raw scale).
    pub isl: f64,
    /// `isl` when the surface is an average over several realizations.
    pub eisl: Option<f64>,
    /// `isl / mainlobe`.
    pub eislr: f64,
    /// Peak sidelobe over mainlobe; 0 for an ideal thumbtack.
    pub pslr: f64,
    /// `|A(0,0)|^2` (raw scale).
    pub mainlobe: f64,
    /// Mean normalized sidelobe, `eislr / (2N - 2)`.
    pub mean_sidelobe: f64,
    pub sidelobe_count: usize,
}

pub fn sidelobe_metrics(surface: &AmbiguitySurface) -> Result<SidelobeMetrics> {
    let cut = surface.zero_doppler_cut();
    let scale = if surface.normalized { surface.mainlobe_raw } else { 1.0 };
    let mainlobe = cut.at(0).unwrap_or(0.0) * scale;
    if !(mainlobe > 0.0) || !mainlobe.is_finite() {
        return Err(Error::Metric("zero-Doppler mainlobe is zero; surface is degenerate".into()));
    }
    let weight = match surface.mode {
        AfMode::Periodic => 2.0,
        AfMode::Aperiodic => 1.0,
    };
    let mut isl = 0.0;
    let mut peak = 0.0f64;
    let mut count = 0usize;
    for (&l, &v) in cut.axis.iter().zip(&cut.values) {
        if l == 0 {
            continue;
        }
        let raw = v * scale;
        isl += weight * raw;
        peak = peak.max(raw);
        count += weight as usize;
    }
    Ok(SidelobeMetrics {
        isl,
        eisl: (surface.realizations > 1).then_some(isl),
        eislr: isl / mainlobe,
        pslr: peak / mainlobe,
        mainlobe,
        mean_sidelobe: if count > 0 { isl / count as f64 / mainlobe } else { 0.0 },
        sidelobe_count: count,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::signaling::{ConstellationSpec, SignalingBasis, Constellation};
    use rand::Rng;
    use std::f64::consts::PI;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    fn brute(s: &[Complex64], l: i64, k: i64, k_grid: usize, mode: AfMode) -> Complex64 {
        let n = s.len() as i64;
        let mut acc = c(0.0, 0.0);
        for p in 0..n {
            let q = p - l;
            let v = match mode {
                AfMode::Periodic => s[q.rem_euclid(n) as usize],
                AfMode::Aperiodic if (0..n).contains(&q) => s[q as usize],
                AfMode::Aperiodic => continue,
            };
            let ph = -2.0 * PI * (k * p) as f64 / k_grid as f64;
            acc += s[p as usize] * v.conj() * Complex64::from_polar(1.0, ph);
        }
        acc / (n as f64).sqrt()
    }

    fn random_signal(n: usize, seed: u64) -> Vec<Complex64> {
        let mut rng = SeedStream::new(seed).rng();
        (0..n).map(|_| c(rng.random::<f64>() - 0.5, rng.random::<f64>() - 0.5)).collect()
    }

    #[test]
    fn fft_matches_brute_force_all_grids() {
        for n in [2usize, 4, 8, 16] {
            let s = random_signal(n, n as u64);
            for k_grid in [1, 3, n, 2 * n] {
                for mode in [AfMode::Periodic, AfMode::Aperiodic] {
                    let af = cross_af(&s, &s, k_grid, mode).unwrap();
                    for &l in &af.delays {
                        for k in 0..k_grid as i64 {
                            let e = (af.get(l, k).unwrap() - brute(&s, l, k, k_grid, mode)).norm();
                            assert!(e < 1e-10, "n={n} K={k_grid} {mode:?} l={l} k={k}: {e}");
                        }
                    }
                }
            }
        }
    }

    #[test]
    fn dc_signal_paf() {
        let n = 16;
        let s = vec![c(1.0, 0.0); n];
        let surf = paf(&s, n).unwrap();
        for l in 0..n as i64 {
            assert!((surf.value(l, 0).unwrap() - n as f64).abs() < 1e-10);
        }
        for k in 1..(n as i64 / 2) {
            assert!(surf.value(0, k).unwrap() < 1e-20);
        }
        let flat: f64 = surf.zero_doppler_cut().values.iter().sum();
        assert!((flat - (n * n) as f64).abs() < 1e-8);
    }

    #[test]
    fn impulse_aaf() {
        let n = 8;
        let mut s = vec![c(0.0, 0.0); n];
        s[0] = c(1.0, 0.0);
        let surf = aaf(&s, n).unwrap();
        for &l in &surf.delays {
            for &k in &surf.dopplers {
                let want = if l == 0 { 1.0 / n as f64 } else { 0.0 };
                assert!((surf.value(l, k).unwrap() - want).abs() < 1e-15);
            }
        }
    }

    #[test]
    fn aaf_symmetry() {
        let s = random_signal(12, 77);
        let surf = aaf(&s, 12).unwrap();
        for &l in &surf.delays {
            for k in -5..6 {
                let a = surf.value(l, k).unwrap();
                let b = surf.value(-l, -k).unwrap();
                assert!((a - b).abs() < 1e-10);
            }
        }
    }

    #[test]
    fn unit_modulus_circular_parseval() {
        // sum_l |A(l,0)|^2 = N for a unit-power constant-modulus sequence
        // whose circular autocorrelation is an impulse (Zadoff-Chu)
        let n = 16usize;
        let zc: Vec<Complex64> = (0..n)
            .map(|p| Complex64::from_polar(1.0, -PI * (p * p) as f64 / n as f64))
            .collect();
        let cut = paf(&zc, 1).unwrap().zero_doppler_cut();
        let total: f64 = cut.values.iter().sum();
        assert!((total - n as f64).abs() < 1e-9, "{total}");
    }

    #[test]
    fn average_single_trial_and_normalization() {
        let basis = SignalingBasis::ofdm(16).unwrap();
        let table = Constellation::new(ConstellationSpec::psk(16).unwrap()).unwrap();
        let gen = |rng: &mut ChaCha8Rng| Ok(basis.synthesize_slice(&table.draw(16, rng).0));
        let seed = SeedStream::new(12);
        let avg = average_af(gen, 1, 16, AfMode::Periodic, &seed).unwrap();
        let single = paf(&gen(&mut seed.trial(0)).unwrap(), 16).unwrap().normalize().unwrap();
        for (a, b) in avg.values.iter().zip(&single.values) {
            assert!((a - b).abs() < 1e-12);
        }
        let many = average_af(gen, 64, 16, AfMode::Aperiodic, &seed).unwrap();
        assert_eq!(many.value(0, 0).unwrap(), 1.0);
        assert!(many.max() <= 1.0 + 1e-12);
    }

    #[test]
    fn linear_psk_ofdm_is_thumbtack() {
        let n = 64;
        let basis = SignalingBasis::ofdm(n).unwrap();
        let table = Constellation::new(ConstellationSpec::psk(16).unwrap()).unwrap();
        let gen = |rng: &mut ChaCha8Rng| Ok(basis.synthesize_slice(&table.draw(n, rng).0));
        let surf = average_af(gen, 200, 1, AfMode::Periodic, &SeedStream::new(1)).unwrap();
        let cut = surf.zero_doppler_cut();
        for (&l, &v) in cut.axis.iter().zip(&cut.values) {
            if l != 0 {
                assert!(dsp::to_db(v) <= -60.0);
            }
        }
    }

    #[test]
    fn metrics_ideal_and_degenerate() {
        let mut s = vec![c(0.0, 0.0); 8];
        s[0] = c(1.0, 0.0);
        let m = sidelobe_metrics(&paf(&s, 8).unwrap()).unwrap();
        assert_eq!(m.isl, 0.0);
        assert_eq!(m.pslr, 0.0);
        let zero = vec![c(0.0, 0.0); 8];
        assert!(matches!(sidelobe_metrics(&paf(&zero, 8).unwrap()), Err(Error::Metric(_))));
    }

    #[test]
    fn config_errors() {
        assert!(matches!(paf(&[c(1.0, 0.0); 4], 0), Err(Error::Config(_))));
        assert!(paf(&[c(1.0, 0.0)], 1).is_err());
        assert!(cross_af(&[c(1.0, 0.0); 4], &[c(1.0, 0.0); 3], 4, AfMode::Periodic).is_err());
    }
}
