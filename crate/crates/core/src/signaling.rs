//! Constellations, signaling bases and cyclic-prefix framing.

use std::f64::consts::PI;
use std::fmt;
use std::str::FromStr;

use num_complex::Complex64;
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::dsp;
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Scheme {
    Psk,
    Qam,
}

/// Constellation family and order, e.g. 16-QAM.
///
/// Points are Gray-labelled, zero-mean and scaled to unit average power.
/// PSK points sit at `exp(j(2 pi i + pi) / M)`, so QPSK lands on the
/// diagonals. Square QAM is scaled by `1/sqrt(2(M-1)/3)`, which is
/// `1/sqrt(10)` for 16-QAM and `1/sqrt(42)` for 64-QAM.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(try_from = "String", into = "String")]
pub struct ConstellationSpec {
    pub scheme: Scheme,
    pub order: usize,
}

impl ConstellationSpec {
    pub fn psk(order: usize) -> Result<Self> {
        let s = Self { scheme: Scheme::Psk, order };
        s.validate()?;
        Ok(s)
    }

    pub fn qam(order: usize) -> Result<Self> {
        let s = Self { scheme: Scheme::Qam, order };
        s.validate()?;
        Ok(s)
    }

    pub fn validate(&self) -> Result<()> {
        match self.scheme {
            Scheme::Psk => {
                if self.order < 2 || !self.order.is_power_of_two() {
                    return Err(Error::Constellation(format!(
                        "PSK order must be a power of two >= 2, got {}",
                        self.order
                    )));
                }
            }
            Scheme::Qam => {
                let side = (self.order as f64).sqrt().round() as usize;
                if self.order < 4 || side * side != self.order || !side.is_power_of_two() {
                    return Err(Error::Constellation(format!(
                        "QAM order must be a square with an even power-of-two side (4, 16, 64, ...), got {}",
                        self.order
                    )));
                }
            }
        }
        Ok(())
    }

    /// Points indexed by their Gray label.
    pub fn points(&self) -> Result<Vec<Complex64>> {
        self.validate()?;
        let m = self.order;
        let mut pts = vec![Complex64::new(0.0, 0.0); m];
        match self.scheme {
            Scheme::Psk => {
                for i in 0..m {
                    let phase = (2.0 * PI * i as f64 + PI) / m as f64;
                    pts[gray(i)] = Complex64::from_polar(1.0, phase);
                }
            }
            Scheme::Qam => {
                let side = (m as f64).sqrt().round() as usize;
                let bits = side.trailing_zeros();
                let norm = (2.0 * (m as f64 - 1.0) / 3.0).sqrt();
                for i in 0..side {
                    for q in 0..side {
                        let re = (2 * i) as f64 - side as f64 + 1.0;
                        let im = (2 * q) as f64 - side as f64 + 1.0;
                        let label = (gray(i) << bits) | gray(q);
                        pts[label] = Complex64::new(re, im) / norm;
                    }
                }
            }
        }
        Ok(pts)
    }

    /// `E|x|^4` of the normalized constellation (1 for PSK, 1.32 for 16-QAM).
    pub fn fourth_moment(&self) -> Result<f64> {
        let pts = self.points()?;
        Ok(pts.iter().map(|p| p.norm_sqr().powi(2)).sum::<f64>() / pts.len() as f64)
    }
}

fn gray(i: usize) -> usize {
    i ^ (i >> 1)
}

impl fmt::Display for ConstellationSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self.scheme {
            Scheme::Psk => "psk",
            Scheme::Qam => "qam",
        };
        write!(f, "{s}{}", self.order)
    }
}

impl FromStr for ConstellationSpec {
    type Err = Error;

    /// Accepts `psk16`, `16psk`, `16-PSK`, `qam64`, ...
    fn from_str(s: &str) -> Result<Self> {
        let lower: String = s
            .to_ascii_lowercase()
            .chars()
            .filter(|c| c.is_ascii_alphanumeric())
            .collect();
        let (scheme, rest) = if let Some(r) = lower.strip_prefix("psk") {
            (Scheme::Psk, r.to_string())
        } else if let Some(r) = lower.strip_prefix("qam") {
            (Scheme::Qam, r.to_string())
        } else if let Some(r) = lower.strip_suffix("psk") {
            (Scheme::Psk, r.to_string())
        } else if let Some(r) = lower.strip_suffix("qam") {
            (Scheme::Qam, r.to_string())
        } else {
            return Err(Error::Constellation(format!("unrecognised constellation `{s}`")));
        };
        let order = rest
            .parse::<usize>()
            .map_err(|_| Error::Constellation(format!("missing order in `{s}`")))?;
        let spec = Self { scheme, order };
        spec.validate()?;
        Ok(spec)
    }
}

impl TryFrom<String> for ConstellationSpec {
    type Error = Error;
    fn try_from(s: String) -> Result<Self> {
        s.parse()
    }
}

impl From<ConstellationSpec> for String {
    fn from(c: ConstellationSpec) -> String {
        c.to_string()
    }
}

/// Pre-built point table for repeated draws.
#[derive(Debug, Clone)]
pub struct Constellation {
    spec: ConstellationSpec,
    points: Vec<Complex64>,
}

impl Constellation {
    pub fn new(spec: ConstellationSpec) -> Result<Self> {
        Ok(Self {
            points: spec.points()?,
            spec,
        })
    }

    pub fn spec(&self) -> ConstellationSpec {
        self.spec
    }

    pub fn points(&self) -> &[Complex64] {
        &self.points
    }

    /// Uniform i.i.d. draws over the constellation.
    pub fn draw<R: Rng + ?Sized>(&self, n: usize, rng: &mut R) -> SymbolVector {
        let m = self.points.len();
        SymbolVector(
            (0..n)
                .map(|_| self.points[rng.random_range(0..m)])
                .collect(),
        )
    }
}

pub fn draw_symbols<R: Rng + ?Sized>(
    spec: ConstellationSpec,
    n: usize,
    rng: &mut R,
) -> Result<SymbolVector> {
    if n == 0 {
        return Err(Error::config("symbol count must be >= 1"));
    }
    Ok(Constellation::new(spec)?.draw(n, rng))
}

/// Frequency- or code-domain data symbols.
#[derive(Debug, Clone, PartialEq)]
pub struct SymbolVector(pub Vec<Complex64>);

impl SymbolVector {
    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn values(&self) -> &[Complex64] {
        &self.0
    }

    pub fn mean_power(&self) -> f64 {
        dsp::energy(&self.0) / self.0.len() as f64
    }
}

/// Time-domain samples, optionally carrying a cyclic prefix of `cp_len`
/// samples at the front.
#[derive(Debug, Clone, PartialEq)]
pub struct TimeSignal {
    pub samples: Vec<Complex64>,
    pub cp_len: usize,
}

impl TimeSignal {
    pub fn new(samples: Vec<Complex64>) -> Self {
        Self { samples, cp_len: 0 }
    }

    pub fn len(&self) -> usize {
        self.samples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }

    pub fn has_cp(&self) -> bool {
        self.cp_len > 0
    }

    pub fn energy(&self) -> f64 {
        dsp::energy(&self.samples)
    }

    /// Samples after the prefix.
    pub fn body(&self) -> &[Complex64] {
        &self.samples[self.cp_len..]
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum BasisKind {
    /// Multicarrier: unitary IDFT.
    Ofdm,
    /// Single carrier: identity.
    Sc,
    /// Normalized Sylvester-Hadamard spreading.
    Cdma,
}

impl FromStr for BasisKind {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "ofdm" | "dft" => Ok(BasisKind::Ofdm),
            "sc" | "single-carrier" | "identity" => Ok(BasisKind::Sc),
            "cdma" | "hadamard" => Ok(BasisKind::Cdma),
            _ => Err(Error::config(format!("unknown signaling basis `{s}`"))),
        }
    }
}

impl fmt::Display for BasisKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            BasisKind::Ofdm => "ofdm",
            BasisKind::Sc => "sc",
            BasisKind::Cdma => "cdma",
        })
    }
}

/// Unitary `N x N` map from data symbols to time samples.
///
/// All three kinds are applied as the adjoint of the analysis transform:
/// `x = U^H s`. OFDM uses `F_N^H`, SC the identity and CDMA the symmetric
/// normalized Hadamard matrix.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SignalingBasis {
    kind: BasisKind,
    size: usize,
}

impl SignalingBasis {
    pub fn new(kind: BasisKind, size: usize) -> Result<Self> {
        if size == 0 {
            return Err(Error::config("basis size must be >= 1"));
        }
        if kind == BasisKind::Cdma && !size.is_power_of_two() {
            return Err(Error::config(format!(
                "Hadamard basis needs a power-of-two size, got {size}"
            )));
        }
        Ok(Self { kind, size })
    }

    pub fn ofdm(size: usize) -> Result<Self> {
        Self::new(BasisKind::Ofdm, size)
    }

    pub fn kind(&self) -> BasisKind {
        self.kind
    }

    pub fn size(&self) -> usize {
        self.size
    }

    /// Time samples for one block of symbols.
    pub fn synthesize(&self, symbols: &SymbolVector) -> Result<TimeSignal> {
        self.check(symbols.len())?;
        Ok(TimeSignal::new(self.synthesize_slice(&symbols.0)))
    }

    /// Slice form of [`synthesize`](Self::synthesize); the caller guarantees the length.
    pub fn synthesize_slice(&self, s: &[Complex64]) -> Vec<Complex64> {
        match self.kind {
            BasisKind::Ofdm => dsp::unitary_idft(s),
            BasisKind::Sc => s.to_vec(),
            BasisKind::Cdma => self.hadamard(s),
        }
    }

    /// Inverse of [`synthesize`](Self::synthesize) (the forward analysis
    /// transform `U`).
    pub fn analyze(&self, signal: &[Complex64]) -> Result<SymbolVector> {
        self.check(signal.len())?;
        Ok(SymbolVector(match self.kind {
            BasisKind::Ofdm => dsp::unitary_dft(signal),
            BasisKind::Sc => signal.to_vec(),
            BasisKind::Cdma => self.hadamard(signal),
        }))
    }

    fn hadamard(&self, s: &[Complex64]) -> Vec<Complex64> {
        let mut buf = s.to_vec();
        dsp::fwht_in_place(&mut buf);
        dsp::scale(&mut buf, 1.0 / (self.size as f64).sqrt());
        buf
    }

    fn check(&self, len: usize) -> Result<()> {
        if len != self.size {
            return Err(Error::dim(self.size, len));
        }
        Ok(())
    }
}

/// Prepends the last `cp_len` samples.
pub fn add_cp(signal: &TimeSignal, cp_len: usize) -> Result<TimeSignal> {
    if signal.has_cp() {
        return Err(Error::config("signal already carries a cyclic prefix"));
    }
    let n = signal.len();
    if cp_len > n {
        return Err(Error::config(format!(
            "cyclic prefix length {cp_len} exceeds symbol length {n}"
        )));
    }
    let mut samples = Vec::with_capacity(n + cp_len);
    samples.extend_from_slice(&signal.samples[n - cp_len..]);
    samples.extend_from_slice(&signal.samples);
    Ok(TimeSignal { samples, cp_len })
}

/// Drops the first `cp_len` samples. The signal must have been framed with
/// the same prefix length.
pub fn remove_cp(signal: &TimeSignal, cp_len: usize) -> Result<TimeSignal> {
    if signal.cp_len != cp_len {
        return Err(Error::dim(cp_len, signal.cp_len));
    }
    if signal.len() < cp_len {
        return Err(Error::dim(cp_len, signal.len()));
    }
    Ok(TimeSignal::new(signal.samples[cp_len..].to_vec()))
}

/// Frame geometry: `n` samples per symbol, `m` symbols, `cp_len` prefix.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FrameConfig {
    pub n: usize,
    pub m: usize,
    pub cp_len: usize,
    /// Sampling period; 1 unless a physical time axis is wanted.
    #[serde(default = "one")]
    pub sample_period: f64,
}

fn one() -> f64 {
    1.0
}

impl FrameConfig {
    pub fn new(n: usize, m: usize, cp_len: usize) -> Result<Self> {
        let c = Self {
            n,
            m,
            cp_len,
            sample_period: 1.0,
        };
        c.validate()?;
        Ok(c)
    }

    pub fn validate(&self) -> Result<()> {
        if self.n == 0 || self.m == 0 {
            return Err(Error::config("frame needs n >= 1 and m >= 1"));
        }
        if self.cp_len > self.n {
            return Err(Error::config(format!(
                "cyclic prefix {} longer than symbol {}",
                self.cp_len, self.n
            )));
        }
        if !(self.sample_period > 0.0) {
            return Err(Error::config("sample period must be positive"));
        }
        Ok(())
    }

    pub fn symbol_len(&self) -> usize {
        self.n + self.cp_len
    }

    pub fn serial_len(&self) -> usize {
        self.m * self.symbol_len()
    }
}

/// `m` consecutive (optionally CP-prefixed) time-domain symbols.
#[derive(Debug, Clone, PartialEq)]
pub struct Frame {
    pub config: FrameConfig,
    pub symbols: Vec<TimeSignal>,
}

impl Frame {
    /// Builds a frame from per-symbol time signals (without CP), adding the
    /// configured prefix.
    pub fn from_symbols(config: FrameConfig, bodies: &[TimeSignal]) -> Result<Self> {
        config.validate()?;
        if bodies.len() != config.m {
            return Err(Error::dim(config.m, bodies.len()));
        }
        let symbols = bodies
            .iter()
            .map(|b| {
                if b.len() != config.n {
                    return Err(Error::dim(config.n, b.len()));
                }
                add_cp(b, config.cp_len)
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(Self { config, symbols })
    }

    /// Concatenated samples, `m * (n + cp_len)` long.
    pub fn serialize(&self) -> Vec<Complex64> {
        self.symbols.iter().flat_map(|s| s.samples.iter().copied()).collect()
    }

    pub fn from_serial(config: FrameConfig, samples: &[Complex64]) -> Result<Self> {
        config.validate()?;
        if samples.len() != config.serial_len() {
            return Err(Error::dim(config.serial_len(), samples.len()));
        }
        let symbols = samples
            .chunks(config.symbol_len())
            .map(|c| TimeSignal {
                samples: c.to_vec(),
                cp_len: config.cp_len,
            })
            .collect();
        Ok(Self { config, symbols })
    }

    /// Applies `f` to every symbol (prefix included), keeping the geometry.
    pub fn map_symbols<F>(&self, f: F) -> Result<Self>
    where
        F: Fn(&TimeSignal) -> Result<TimeSignal>,
    {
        let symbols = self.symbols.iter().map(f).collect::<Result<Vec<_>>>()?;
        for s in &symbols {
            if s.len() != self.config.symbol_len() {
                return Err(Error::dim(self.config.symbol_len(), s.len()));
            }
        }
        Ok(Self {
            config: self.config,
            symbols,
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::seed::SeedStream;
    use approx::assert_relative_eq;
    use proptest::prelude::*;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    #[test]
    fn qpsk_draw_lands_on_diagonals() {
        let mut rng = SeedStream::new(3).rng();
        let s = draw_symbols(ConstellationSpec::psk(4).unwrap(), 1, &mut rng).unwrap();
        let v = s.0[0];
        assert_relative_eq!(v.norm(), 1.0, epsilon = 1e-15);
        let k = (v.arg() - PI / 4.0).rem_euclid(PI / 2.0);
        assert!(k < 1e-12 || (PI / 2.0 - k) < 1e-12);
    }

    #[test]
    fn invalid_orders_rejected() {
        assert!(matches!(ConstellationSpec::qam(8), Err(Error::Constellation(_))));
        assert!(ConstellationSpec::qam(36).is_err());
        assert!(ConstellationSpec::psk(6).is_err());
        assert!(ConstellationSpec::psk(1).is_err());
        let mut rng = SeedStream::new(0).rng();
        let bad = ConstellationSpec {
            scheme: Scheme::Qam,
            order: 8,
        };
        assert!(draw_symbols(bad, 4, &mut rng).is_err());
    }

    #[test]
    fn constellations_are_zero_mean_unit_power() {
        for spec in ["psk2", "psk4", "psk16", "qam4", "qam16", "qam64", "qam256"] {
            let pts = spec.parse::<ConstellationSpec>().unwrap().points().unwrap();
            let n = pts.len() as f64;
            let mean: Complex64 = pts.iter().sum::<Complex64>() / n;
            let power = pts.iter().map(|p| p.norm_sqr()).sum::<f64>() / n;
            assert!(mean.norm() < 1e-12, "{spec}");
            assert_relative_eq!(power, 1.0, epsilon = 1e-12);
        }
    }

    #[test]
    fn qam16_scale_and_fourth_moment() {
        let pts = ConstellationSpec::qam(16).unwrap().points().unwrap();
        let max = pts.iter().map(|p| p.re.abs()).fold(0.0, f64::max);
        assert_relative_eq!(max, 3.0 / 10f64.sqrt(), epsilon = 1e-14);
        // brute-force average over the 16 normalized points
        let k4 = pts.iter().map(|p| p.norm_sqr().powi(2)).sum::<f64>() / 16.0;
        assert_relative_eq!(k4, 1.32, epsilon = 1e-12);
    }

    #[test]
    fn gray_neighbours_differ_in_one_bit() {
        let pts = ConstellationSpec::psk(16).unwrap().points().unwrap();
        let mut by_angle: Vec<(f64, usize)> = pts
            .iter()
            .enumerate()
            .map(|(l, p)| (p.arg().rem_euclid(2.0 * PI), l))
            .collect();
        by_angle.sort_by(|a, b| a.0.partial_cmp(&b.0).unwrap());
        for w in 0..16 {
            let a = by_angle[w].1;
            let b = by_angle[(w + 1) % 16].1;
            assert_eq!((a ^ b).count_ones(), 1);
        }
    }

    #[test]
    fn qam16_empirical_moments() {
        let spec = ConstellationSpec::qam(16).unwrap();
        let mut rng = SeedStream::new(99).rng();
        let s = draw_symbols(spec, 1_000_000, &mut rng).unwrap();
        let p2 = s.mean_power();
        let p4 = s.0.iter().map(|v| v.norm_sqr().powi(2)).sum::<f64>() / s.len() as f64;
        assert!((p2 - 1.0).abs() < 0.005, "{p2}");
        assert!((p4 - 1.32).abs() < 0.01, "{p4}");
    }

    #[test]
    fn synthesize_examples() {
        let ones = SymbolVector(vec![c(1.0, 0.0); 4]);
        let x = SignalingBasis::ofdm(4).unwrap().synthesize(&ones).unwrap();
        let expect = [2.0, 0.0, 0.0, 0.0];
        for (v, e) in x.samples.iter().zip(expect) {
            assert!((v - c(e, 0.0)).norm() < 1e-12);
        }

        let s = SymbolVector(vec![c(0.3, -1.0), c(2.0, 0.5), c(-1.0, 0.0)]);
        let sc = SignalingBasis::new(BasisKind::Sc, 3).unwrap();
        assert_eq!(sc.synthesize(&s).unwrap().samples, s.0);

        let e0 = SymbolVector(vec![c(1.0, 0.0), c(0.0, 0.0), c(0.0, 0.0), c(0.0, 0.0)]);
        let cdma = SignalingBasis::new(BasisKind::Cdma, 4).unwrap();
        for v in cdma.synthesize(&e0).unwrap().samples {
            assert!((v - c(0.5, 0.0)).norm() < 1e-15);
        }
    }

    #[test]
    fn basis_errors() {
        assert!(SignalingBasis::new(BasisKind::Cdma, 6).is_err());
        let b = SignalingBasis::ofdm(8).unwrap();
        assert!(matches!(
            b.synthesize(&SymbolVector(vec![c(1.0, 0.0); 4])),
            Err(Error::Dimension { expected: 8, actual: 4 })
        ));
    }

    #[test]
    fn unitarity_all_bases() {
        let spec = ConstellationSpec::qam(16).unwrap();
        let mut rng = SeedStream::new(5).rng();
        for kind in [BasisKind::Ofdm, BasisKind::Sc, BasisKind::Cdma] {
            for n in [4, 8, 16, 64] {
                let b = SignalingBasis::new(kind, n).unwrap();
                let s = draw_symbols(spec, n, &mut rng).unwrap();
                let x = b.synthesize(&s).unwrap();
                let back = b.analyze(&x.samples).unwrap();
                for (a, r) in s.0.iter().zip(&back.0) {
                    assert!((a - r).norm() < 1e-10);
                }
                let rel = (x.energy() - dsp::energy(&s.0)).abs() / dsp::energy(&s.0);
                assert!(rel <= 1e-12, "{kind} {n}: {rel}");
            }
        }
    }

    #[test]
    fn ofdm_time_samples_look_gaussian() {
        let spec = ConstellationSpec::psk(16).unwrap();
        let b = SignalingBasis::ofdm(64).unwrap();
        let mut rng = SeedStream::new(8).rng();
        let (mut m2, mut m4) = (0.0, 0.0);
        for _ in 0..4000 {
            let x = b.synthesize(&draw_symbols(spec, 64, &mut rng).unwrap()).unwrap();
            for v in &x.samples {
                m2 += v.norm_sqr();
                m4 += v.norm_sqr().powi(2);
            }
        }
        let n = 4000.0 * 64.0;
        let kurt = (m4 / n) / (m2 / n).powi(2);
        assert!((kurt - 2.0).abs() / 2.0 < 0.05, "{kurt}");
    }

    #[test]
    fn cp_examples() {
        let x = TimeSignal::new(vec![c(1.0, 0.0), c(2.0, 0.0), c(3.0, 0.0), c(4.0, 0.0)]);
        let y = add_cp(&x, 2).unwrap();
        let re: Vec<f64> = y.samples.iter().map(|v| v.re).collect();
        assert_eq!(re, vec![3.0, 4.0, 1.0, 2.0, 3.0, 4.0]);
        assert_eq!(remove_cp(&y, 2).unwrap(), x);
        assert_eq!(add_cp(&x, 0).unwrap(), x);
        assert_eq!(remove_cp(&x, 0).unwrap(), x);
        assert!(matches!(add_cp(&x, 5), Err(Error::Config(_))));
        assert!(matches!(remove_cp(&y, 1), Err(Error::Dimension { .. })));
    }

    #[test]
    fn frame_serial_length() {
        let cfg = FrameConfig::new(8, 3, 2).unwrap();
        let bodies = vec![TimeSignal::new(vec![c(1.0, 0.0); 8]); 3];
        let f = Frame::from_symbols(cfg, &bodies).unwrap();
        assert_eq!(f.serialize().len(), 30);
        let g = Frame::from_symbols(FrameConfig::new(8, 3, 0).unwrap(), &bodies).unwrap();
        assert_eq!(g.serialize().len(), 24);
        assert_eq!(Frame::from_serial(cfg, &f.serialize()).unwrap(), f);
    }

    #[test]
    fn parse_and_display() {
        assert_eq!("16-QAM".parse::<ConstellationSpec>().unwrap().to_string(), "qam16");
        assert_eq!("psk8".parse::<ConstellationSpec>().unwrap().order, 8);
        assert!("ask4".parse::<ConstellationSpec>().is_err());
        let json = serde_json::to_string(&ConstellationSpec::qam(64).unwrap()).unwrap();
        assert_eq!(json, "\"qam64\"");
    }

    proptest! {
        #[test]
        fn cp_round_trip(re in prop::collection::vec(-10.0f64..10.0, 1..64), l_frac in 0.0f64..1.0) {
            let x = TimeSignal::new(re.iter().map(|&v| c(v, -v)).collect());
            let l = (l_frac * x.len() as f64) as usize;
            let y = add_cp(&x, l).unwrap();
            prop_assert_eq!(y.len(), x.len() + l);
            prop_assert_eq!(&y.samples[..l], &x.samples[x.len() - l..]);
            prop_assert_eq!(remove_cp(&y, l).unwrap(), x);
        }
    }
}
