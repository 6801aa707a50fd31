//! Monostatic OFDM radar receiver: division filter and 2-D periodogram.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::dsp;
use crate::error::{Error, Result};
use crate::signaling::{remove_cp, Frame, SymbolVector};

/// Per-subcarrier, per-symbol channel estimates `H(n, m)`.
#[derive(Debug, Clone, PartialEq)]
pub struct ChannelEstimateMatrix {
    pub n: usize,
    pub m: usize,
    /// One length-`n` column per symbol.
    pub columns: Vec<Vec<Complex64>>,
}

impl ChannelEstimateMatrix {
    pub fn get(&self, n: usize, m: usize) -> Complex64 {
        self.columns[m][n]
    }
}

/// `H(:, m) = F_N y_m / x~_m` for every symbol, where `y_m` is the received
/// symbol after prefix removal and `x~_m` the transmitted frequency-domain
/// symbols before amplification. No regularization is applied.
pub fn division_filter(received: &Frame, reference: &[SymbolVector]) -> Result<ChannelEstimateMatrix> {
    let fc = received.config;
    if reference.len() != fc.m {
        return Err(Error::dim(fc.m, reference.len()));
    }
    let mut columns = Vec::with_capacity(fc.m);
    for (sym, x) in received.symbols.iter().zip(reference) {
        if x.len() != fc.n {
            return Err(Error::dim(fc.n, x.len()));
        }
        let y = dsp::unitary_dft(&remove_cp(sym, fc.cp_len)?.samples);
        let col = y
            .iter()
            .zip(&x.0)
            .enumerate()
            .map(|(i, (yv, xv))| {
                if xv.norm_sqr() == 0.0 {
                    Err(Error::Numeric(format!("reference symbol {i} is zero; division filter undefined")))
                } else {
                    Ok(yv / xv)
                }
            })
            .collect::<Result<Vec<_>>>()?;
        columns.push(col);
    }
    Ok(ChannelEstimateMatrix {
        n: fc.n,
        m: fc.m,
        columns,
    })
}

/// Delay-Doppler power map.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Periodogram {
    /// Row-major `n_per x m_per`, Doppler columns centered.
    pub values: Vec<f64>,
    pub n_per: usize,
    pub m_per: usize,
    /// `0..n_per`.
    pub delays: Vec<i64>,
    /// `-m_per/2 .. m_per/2`.
    pub dopplers: Vec<i64>,
}

impl Periodogram {
    pub fn value(&self, l: usize, k: i64) -> Option<f64> {
        let c = self.dopplers.iter().position(|&d| d == k)?;
        (l < self.n_per).then(|| self.values[l * self.m_per + c])
    }

    /// Delay profile at Doppler bin `k`.
    pub fn range_cut(&self, k: i64) -> Option<Vec<f64>> {
        let c = self.dopplers.iter().position(|&d| d == k)?;
        Some((0..self.n_per).map(|l| self.values[l * self.m_per + c]).collect())
    }

    /// Largest cell as `(delay, doppler, value)`.
    pub fn peak(&self) -> (usize, i64, f64) {
        let (i, v) = self
            .values
            .iter()
            .enumerate()
            .fold((0, f64::MIN), |acc, (i, &v)| if v > acc.1 { (i, v) } else { acc });
        (i / self.m_per, self.dopplers[i % self.m_per], v)
    }
}

/// `Per(l, k) = (1/(N M)) |sum_n (sum_m H(n,m) e^{-j 2 pi k m / M_per}) e^{j 2 pi l n / N_per}|^2`
/// with zero padding to `N_per x M_per`.
pub fn periodogram(h: &ChannelEstimateMatrix, n_per: usize, m_per: usize) -> Result<Periodogram> {
    if n_per < h.n || m_per < h.m {
        return Err(Error::config(format!(
            "periodogram grid {n_per}x{m_per} smaller than estimate {}x{}",
            h.n, h.m
        )));
    }
    // Doppler DFT along each subcarrier row
    let mut grid = vec![vec![Complex64::new(0.0, 0.0); n_per]; m_per];
    let mut row = vec![Complex64::new(0.0, 0.0); m_per];
    for n in 0..h.n {
        row.iter_mut().for_each(|v| *v = Complex64::new(0.0, 0.0));
        for m in 0..h.m {
            row[m] = h.columns[m][n];
        }
        dsp::fft_in_place(&mut row);
        for (k, v) in row.iter().enumerate() {
            grid[k][n] = *v;
        }
    }
    let scale = 1.0 / (h.n * h.m) as f64;
    let mut natural = vec![0.0; n_per * m_per];
    for (k, col) in grid.iter_mut().enumerate() {
        dsp::ifft_in_place(col);
        for (l, v) in col.iter().enumerate() {
            natural[l * m_per + k] = v.norm_sqr() * scale;
        }
    }
    let mut values = Vec::with_capacity(n_per * m_per);
    for r in natural.chunks(m_per) {
        values.extend(dsp::fftshift(r));
    }
    Ok(Periodogram {
        values,
        n_per,
        m_per,
        delays: (0..n_per as i64).collect(),
        dopplers: dsp::shifted_axis(m_per),
    })
}

/// `SNR_Per = SNR + 10 log10(N_per M_per)` in dB, from a linear SNR.
pub fn snr_per(snr_linear: f64, n_per: usize, m_per: usize) -> Result<f64> {
    if !(snr_linear > 0.0) || n_per == 0 || m_per == 0 {
        return Err(Error::config("SNR and grid sizes must be positive"));
    }
    Ok(10.0 * snr_linear.log10() + 10.0 * ((n_per * m_per) as f64).log10())
}
