//! Scenario implementations. Each takes a fully merged config and a seed
//! stream and returns result tables; file output happens in the runner.

use num_complex::Complex64;
use rand_chacha::ChaCha8Rng;

use super::config::{ibo_tag, CalibrationMode, ExperimentConfig, PaSection, TargetSpec};
use super::output::Table;
use crate::ambiguity::{average_af, average_zero_delay, sidelobe_metrics, AfMode};
use crate::analytic::{
    average_cut, bussgang_af_decompose, expected_zero_doppler_bussgang, lag_probabilities, sel_af_terms,
    sel_eisl, sel_zero_delay_cut, LagCorrelation,
};
use crate::detect::{calibrate_cfar, pd_experiment, so_cfar, CfarConfig, NoiseModel, PdCurve, PdScenario};
use crate::dsp::{fftshift, shifted_axis, to_db};
use crate::error::{Error, Result};
use crate::pa::{clipping_distortion_power, estimate_bussgang, gaussian_distortion_ratio, Amplifier, PaConfig};
use crate::seed::SeedStream;
use crate::signaling::{BasisKind, Constellation, ConstellationSpec, FrameConfig, SignalingBasis};

type Generator = Box<dyn Fn(&mut ChaCha8Rng) -> Result<Vec<Complex64>> + Sync>;

/// Unit-power blocks of `basis` signaling, passed through `amp`.
fn blocks(spec: ConstellationSpec, basis: SignalingBasis, amp: Amplifier) -> Result<Generator> {
    let table = Constellation::new(spec)?;
    Ok(Box::new(move |rng| {
        let x = basis.synthesize_slice(&table.draw(basis.size(), rng).0);
        Ok(amp.apply(&x))
    }))
}

fn mode_tag(mode: AfMode) -> &'static str {
    match mode {
        AfMode::Periodic => "cp",
        AfMode::Aperiodic => "nocp",
    }
}

/// Divides by the value at axis position 0 and converts to dB.
fn relative_db(axis: &[i64], values: &[f64]) -> Result<Vec<f64>> {
    let i = axis
        .iter()
        .position(|&a| a == 0)
        .ok_or_else(|| Error::Metric("axis has no zero bin".into()))?;
    let peak = values[i];
    if !(peak > 0.0) {
        return Err(Error::Metric("reference bin is zero".into()));
    }
    Ok(values.iter().map(|v| to_db(v / peak)).collect())
}

fn data_seed(seed: &SeedStream, spec: ConstellationSpec) -> SeedStream {
    seed.derive("data").derive(&spec.to_string())
}

// ---------------------------------------------------------------- AF cuts

/// Zero-Doppler cuts with SEL and Bussgang analytic overlays. Linear and
/// nonlinear curves share the same symbol draws.
pub(super) fn zero_doppler(cfg: &ExperimentConfig, seed: &SeedStream) -> Result<Vec<Table>> {
    let n = cfg.n()?;
    let trials = cfg.trials()?;
    let pa = cfg.pa();
    let basis = SignalingBasis::ofdm(n)?;
    let mut out = vec![];
    for mode in cfg.af_modes()? {
        let axis = mode.delays(n);
        let mut t = Table::new(format!("zero_doppler_{}", mode_tag(mode)));
        t.i64_col("lag", &axis)?;
        for c in cfg.constellations()? {
            let data = data_seed(seed, c);
            let lin = average_af(blocks(c, basis, Amplifier::Linear)?, trials, 1, mode, &data)?;
            t.f64_col(format!("linear_{c}"), &lin.zero_doppler_cut().db())?;
            let rho = LagCorrelation::estimate(
                c,
                &basis,
                cfg.rho_trials()?,
                &seed.derive("rho").derive(&c.to_string()),
                mode == AfMode::Periodic,
            )?;
            for ibo in pa.ibo_list()? {
                let pc = pa.amplifier(ibo)?;
                let tag = ibo_tag(ibo);
                let sim = average_af(blocks(c, basis, Amplifier::Sel(pc))?, trials, 1, mode, &data)?;
                t.f64_col(format!("nonlinear_{c}_{tag}"), &sim.zero_doppler_cut().db())?;

                let probs = lag_probabilities(&pc, &rho, n, mode)?;
                let sel = average_cut(axis.clone(), trials, &data, blocks(c, basis, Amplifier::Linear)?, |x| {
                    Ok(sel_af_terms(x, &pc, &probs, mode)?
                        .zero_doppler_cut()
                        .iter()
                        .map(|v| v.norm_sqr())
                        .collect())
                })?;
                t.f64_col(format!("sel_analytic_{c}_{tag}"), &relative_db(&axis, &sel.values)?)?;

                let stats = estimate_bussgang(&pc, &basis, c, trials, &seed.derive("bussgang").derive(&c.to_string()))?;
                let k = stats.kappa;
                let bus = average_cut(axis.clone(), trials, &data, blocks(c, basis, Amplifier::Linear)?, |x| {
                    let s = pc.amplify_slice(x);
                    let d: Vec<Complex64> = s.iter().zip(x).map(|(s, x)| s - k * x).collect();
                    Ok(bussgang_af_decompose(x, &d, k, 1, mode)?.zero_doppler_reduced())
                })?;
                t.f64_col(format!("bussgang_analytic_{c}_{tag}"), &relative_db(&axis, &bus.values)?)?;
            }
        }
        t.with_plot("lag", "normalized |A(l,0)|^2 [dB]");
        out.push(t);
    }
    Ok(out)
}

/// Average Bussgang distortion power and clipping-residual power vs IBO,
/// with the Gaussian-input reference.
pub(super) fn distortion_power(cfg: &ExperimentConfig, seed: &SeedStream) -> Result<Vec<Table>> {
    let n = cfg.n()?;
    let trials = cfg.trials()?;
    let pa = cfg.pa();
    let ibos = pa.ibo_list()?;
    let basis = SignalingBasis::ofdm(n)?;
    let mut t = Table::new("distortion_power");
    t.f64_col("ibo_db", &ibos)?;
    let mut gauss = vec![];
    for &ibo in &ibos {
        let pc = pa.amplifier(ibo)?;
        let g2 = (pc.gain() * pc.alpha()).norm_sqr() * pc.sigma2();
        gauss.push(to_db(g2 * gaussian_distortion_ratio(pc.clip_threshold())));
    }
    t.f64_col("gaussian_reference_db", &gauss)?;
    for c in cfg.constellations()? {
        let mut bus = vec![];
        let mut clip = vec![];
        for &ibo in &ibos {
            let pc = pa.amplifier(ibo)?;
            let s = data_seed(seed, c);
            bus.push(to_db(estimate_bussgang(&pc, &basis, c, trials, &s)?.distortion_var));
            clip.push(to_db(clipping_distortion_power(&pc, &basis, c, trials, &s)?));
        }
        t.f64_col(format!("{c}_db"), &bus)?;
        t.f64_col(format!("{c}_clip_residual_db"), &clip)?;
    }
    t.with_plot("ibo_db", "distortion power [dB]");
    Ok(vec![t])
}

/// Output cut, input cut scaled by `|kappa|^4`, and their difference (the
/// distortion contribution), all relative to the output mainlobe.
pub(super) fn distortion_term(cfg: &ExperimentConfig, seed: &SeedStream) -> Result<Vec<Table>> {
    let n = cfg.n()?;
    let trials = cfg.trials()?;
    let pa = cfg.pa();
    let basis = SignalingBasis::ofdm(n)?;
    let mut out = vec![];
    for mode in cfg.af_modes()? {
        let axis = mode.delays(n);
        let mut t = Table::new(format!("distortion_term_{}", mode_tag(mode)));
        t.i64_col("lag", &axis)?;
        for c in cfg.constellations()? {
            let data = data_seed(seed, c);
            let lin = average_af(blocks(c, basis, Amplifier::Linear)?, trials, 1, mode, &data)?;
            let ax = lin.zero_doppler_cut();
            let ax_raw: Vec<f64> = ax.values.iter().map(|v| v * lin.mainlobe_raw).collect();
            for ibo in pa.ibo_list()? {
                let pc = pa.amplifier(ibo)?;
                let tag = ibo_tag(ibo);
                let stats = estimate_bussgang(&pc, &basis, c, trials, &seed.derive("bussgang").derive(&c.to_string()))?;
                let k4 = stats.kappa.norm_sqr().powi(2);
                let sim = average_af(blocks(c, basis, Amplifier::Sel(pc))?, trials, 1, mode, &data)?;
                let main = sim.mainlobe_raw;
                let cut = sim.zero_doppler_cut();
                let scaled: Vec<f64> = ax_raw.iter().map(|v| k4 * v / main).collect();
                let diff: Vec<f64> = cut.values.iter().zip(&scaled).map(|(a, b)| a - b).collect();
                t.f64_col(format!("output_{c}_{tag}"), &cut.db())?;
                t.f64_col(format!("scaled_input_{c}_{tag}"), &scaled.iter().map(|&v| to_db(v)).collect::<Vec<_>>())?;
                t.f64_col(format!("distortion_{c}_{tag}"), &diff.iter().map(|&v| to_db(v)).collect::<Vec<_>>())?;
            }
        }
        t.with_plot("lag", "relative to output mainlobe [dB]");
        out.push(t);
    }
    Ok(out)
}

/// OFDM, single-carrier and Hadamard-spread CDMA zero-Doppler cuts.
pub(super) fn signaling_comparison(cfg: &ExperimentConfig, seed: &SeedStream) -> Result<Vec<Table>> {
    let n = cfg.n()?;
    let trials = cfg.trials()?;
    let amps = cfg.amplifiers()?;
    let mut out = vec![];
    let mut summary: (Vec<String>, Vec<String>, Vec<String>, Vec<String>, Vec<f64>, Vec<f64>) = Default::default();
    for mode in cfg.af_modes()? {
        let axis = mode.delays(n);
        let mut t = Table::new(format!("signaling_comparison_{}", mode_tag(mode)));
        t.i64_col("lag", &axis)?;
        for kind in cfg.bases()? {
            let basis = SignalingBasis::new(kind, n)?;
            for c in cfg.constellations()? {
                let data = data_seed(seed, c).derive(&kind.to_string());
                for (tag, amp) in &amps {
                    let s = average_af(blocks(c, basis, *amp)?, trials, 1, mode, &data)?;
                    t.f64_col(format!("{kind}_{c}_{tag}"), &s.zero_doppler_cut().db())?;
                    let m = sidelobe_metrics(&s)?;
                    summary.0.push(mode_tag(mode).into());
                    summary.1.push(kind.to_string());
                    summary.2.push(c.to_string());
                    summary.3.push(tag.clone());
                    summary.4.push(to_db(m.mean_sidelobe));
                    summary.5.push(to_db(m.pslr));
                }
            }
        }
        t.with_plot("lag", "normalized |A(l,0)|^2 [dB]");
        out.push(t);
    }
    let mut s = Table::new("signaling_summary");
    s.str_col("cp", &summary.0)?
        .str_col("basis", &summary.1)?
        .str_col("constellation", &summary.2)?
        .str_col("amplifier", &summary.3)?
        .f64_col("mean_sidelobe_db", &summary.4)?
        .f64_col("pslr_db", &summary.5)?;
    out.push(s);
    Ok(out)
}

// ------------------------------------------------------- length scaling

/// Unnormalized EISL vs `N`: probability-weighted clipping terms against
/// direct Monte-Carlo averaging.
pub(super) fn eisl_vs_n(cfg: &ExperimentConfig, seed: &SeedStream) -> Result<Vec<Table>> {
    let ns = cfg.n_values()?;
    let trials = cfg.trials()?;
    let pa = cfg.pa();
    let mut t = Table::new("eisl_vs_n");
    t.i64_col("n", &ns.iter().map(|&n| n as i64).collect::<Vec<_>>())?;
    for mode in cfg.af_modes()? {
        for c in cfg.constellations()? {
            for ibo in pa.ibo_list()? {
                let pc = pa.amplifier(ibo)?;
                let mut wterm = vec![];
                let mut mc = vec![];
                for &n in &ns {
                    let basis = SignalingBasis::ofdm(n)?;
                    let s = data_seed(seed, c).index(n as u64);
                    let rho = LagCorrelation::estimate(
                        c,
                        &basis,
                        cfg.rho_trials()?,
                        &seed.derive("rho").derive(&c.to_string()).index(n as u64),
                        mode == AfMode::Periodic,
                    )?;
                    wterm.push(to_db(sel_eisl(&pc, c, &basis, &rho, mode, trials, &s)?.eisl));
                    let surf = average_af(blocks(c, basis, Amplifier::Sel(pc))?, trials, 1, mode, &s)?;
                    mc.push(to_db(sidelobe_metrics(&surf)?.isl));
                }
                let base = format!("{c}_{}_{}", mode_tag(mode), ibo_tag(ibo));
                t.f64_col(format!("{base}_wterm_db"), &wterm)?;
                t.f64_col(format!("{base}_mc_db"), &mc)?;
            }
        }
    }
    t.with_plot("n", "EISL [dB]");
    Ok(vec![t])
}

/// EISLR vs `N` from the large-`N` Bussgang expectation and from direct
/// Monte-Carlo averaging.
pub(super) fn eislr_vs_n(cfg: &ExperimentConfig, seed: &SeedStream) -> Result<Vec<Table>> {
    let ns = cfg.n_values()?;
    let trials = cfg.trials()?;
    let pa = cfg.pa();
    let mut t = Table::new("eislr_vs_n");
    t.i64_col("n", &ns.iter().map(|&n| n as i64).collect::<Vec<_>>())?;
    for mode in cfg.af_modes()? {
        for c in cfg.constellations()? {
            let mut lin = vec![];
            for &n in &ns {
                let basis = SignalingBasis::ofdm(n)?;
                let s = data_seed(seed, c).index(n as u64);
                let surf = average_af(blocks(c, basis, Amplifier::Linear)?, trials, 1, mode, &s)?;
                lin.push(to_db(sidelobe_metrics(&surf)?.eislr));
            }
            t.f64_col(format!("{c}_{}_linear_mc_db", mode_tag(mode)), &lin)?;
            for ibo in pa.ibo_list()? {
                let pc = pa.amplifier(ibo)?;
                let mut formula = vec![];
                let mut mc = vec![];
                for &n in &ns {
                    let basis = SignalingBasis::ofdm(n)?;
                    let s = data_seed(seed, c).index(n as u64);
                    let st = estimate_bussgang(&pc, &basis, c, trials, &seed.derive("bussgang").derive(&c.to_string()).index(n as u64))?;
                    let e = expected_zero_doppler_bussgang(st.kappa, st.signal_power, st.distortion_var, st.distortion_fourth_moment, n)?;
                    formula.push(to_db(e.eislr));
                    let surf = average_af(blocks(c, basis, Amplifier::Sel(pc))?, trials, 1, mode, &s)?;
                    mc.push(to_db(sidelobe_metrics(&surf)?.eislr));
                }
                let base = format!("{c}_{}_{}", mode_tag(mode), ibo_tag(ibo));
                t.f64_col(format!("{base}_formula_db"), &formula)?;
                t.f64_col(format!("{base}_mc_db"), &mc)?;
            }
        }
    }
    t.with_plot("n", "EISLR [dB]");
    Ok(vec![t])
}

/// PSLR per `N` and the underlying zero-Doppler cuts (long format).
pub(super) fn pslr_vs_n(cfg: &ExperimentConfig, seed: &SeedStream) -> Result<Vec<Table>> {
    let ns = cfg.n_values()?;
    let trials = cfg.trials()?;
    let amps = cfg.amplifiers()?;
    let mut sum = (vec![], vec![], vec![], vec![], vec![], vec![], vec![]);
    let mut cuts = (vec![], vec![], vec![], vec![], vec![], vec![]);
    for mode in cfg.af_modes()? {
        for c in cfg.constellations()? {
            for (tag, amp) in &amps {
                let mut prev: Option<f64> = None;
                for &n in &ns {
                    let basis = SignalingBasis::ofdm(n)?;
                    let surf = average_af(blocks(c, basis, *amp)?, trials, 1, mode, &data_seed(seed, c).index(n as u64))?;
                    let m = sidelobe_metrics(&surf)?;
                    let p = to_db(m.pslr);
                    sum.0.push(mode_tag(mode).to_string());
                    sum.1.push(c.to_string());
                    sum.2.push(tag.clone());
                    sum.3.push(n as i64);
                    sum.4.push(p);
                    sum.5.push(to_db(m.mean_sidelobe));
                    sum.6.push(prev.map_or(f64::NAN, |q| q - p));
                    prev = Some(p);
                    let cut = surf.zero_doppler_cut();
                    for (l, v) in cut.axis.iter().zip(cut.db()) {
                        cuts.0.push(mode_tag(mode).to_string());
                        cuts.1.push(c.to_string());
                        cuts.2.push(tag.clone());
                        cuts.3.push(n as i64);
                        cuts.4.push(*l);
                        cuts.5.push(v);
                    }
                }
            }
        }
    }
    let mut s = Table::new("pslr_vs_n");
    s.str_col("cp", &sum.0)?
        .str_col("constellation", &sum.1)?
        .str_col("amplifier", &sum.2)?
        .i64_col("n", &sum.3)?
        .f64_col("pslr_db", &sum.4)?
        .f64_col("mean_sidelobe_db", &sum.5)?
        .f64_col("gain_vs_previous_db", &sum.6)?;
    let mut c = Table::new("pslr_cuts");
    c.str_col("cp", &cuts.0)?
        .str_col("constellation", &cuts.1)?
        .str_col("amplifier", &cuts.2)?
        .i64_col("n", &cuts.3)?
        .i64_col("lag", &cuts.4)?
        .f64_col("value_db", &cuts.5)?;
    Ok(vec![s, c])
}

/// Zero-delay (Doppler) cuts, simulated and analytic.
pub(super) fn zero_delay(cfg: &ExperimentConfig, seed: &SeedStream) -> Result<Vec<Table>> {
    let n = cfg.n()?;
    let k_grid = cfg.doppler_grid.unwrap_or(n);
    let trials = cfg.trials()?;
    let pa = cfg.pa();
    let basis = SignalingBasis::ofdm(n)?;
    let axis = shifted_axis(k_grid);
    let mut t = Table::new("zero_delay");
    t.i64_col("doppler", &axis)?;
    for c in cfg.constellations()? {
        let data = data_seed(seed, c);
        let lin = average_zero_delay(blocks(c, basis, Amplifier::Linear)?, trials, k_grid, AfMode::Periodic, &data)?;
        t.f64_col(format!("linear_{c}"), &lin.zero_delay_cut().db())?;
        for ibo in pa.ibo_list()? {
            let pc = pa.amplifier(ibo)?;
            let tag = ibo_tag(ibo);
            let sim = average_zero_delay(blocks(c, basis, Amplifier::Sel(pc))?, trials, k_grid, AfMode::Periodic, &data)?;
            t.f64_col(format!("nonlinear_{c}_{tag}"), &sim.zero_delay_cut().db())?;
            let ana = average_cut(axis.clone(), trials, &data, blocks(c, basis, Amplifier::Linear)?, |x| {
                let natural: Vec<f64> = sel_zero_delay_cut(x, &pc, k_grid)?.iter().map(|v| v.norm_sqr()).collect();
                Ok(fftshift(&natural))
            })?;
            t.f64_col(format!("sel_analytic_{c}_{tag}"), &relative_db(&axis, &ana.values)?)?;
        }
    }
    t.with_plot("doppler", "normalized |A(0,k)|^2 [dB]");
    Ok(vec![t])
}

// ------------------------------------------------------------ detection

fn pd_scenario(cfg: &ExperimentConfig, c: ConstellationSpec, amp: Amplifier) -> Result<PdScenario> {
    let m = cfg.m()?;
    let mut s = PdScenario::two_target(c, m, amp)?;
    let n = cfg.n.unwrap_or(s.frame.n);
    s.frame = FrameConfig::new(n, m, cfg.cp_len.unwrap_or(s.frame.cp_len))?;
    if cfg.targets.is_some() {
        s.targets = cfg.targets()?;
    }
    s.n_per = cfg.n_per.unwrap_or(n);
    s.m_per = cfg.m_per.unwrap_or(m);
    s.weak_bin = cfg.weak_bin.unwrap_or(s.weak_bin);
    s.cfar = cfg.cfar().skeleton();
    s.validate()?;
    Ok(s)
}

/// Calibrated detector for `scenario` under the configured mode.
fn calibrated(cfg: &ExperimentConfig, scenario: &PdScenario, seed: &SeedStream) -> Result<CfarConfig> {
    let sec = cfg.cfar();
    let model = match sec.mode() {
        CalibrationMode::Nominal => NoiseModel::Exponential,
        CalibrationMode::Pipeline => NoiseModel::Pipeline(Box::new(scenario.clone())),
    };
    calibrate_cfar(&sec.skeleton(), &model, sec.trials(), &seed.derive("cfar"))
}

/// Calibrates once per run in nominal mode, once per constellation in
/// pipeline mode.
struct CfarCache {
    nominal: Option<CfarConfig>,
    rows: Vec<(String, CfarConfig)>,
}

impl CfarCache {
    fn new() -> Self {
        Self {
            nominal: None,
            rows: vec![],
        }
    }

    fn get(&mut self, cfg: &ExperimentConfig, s: &PdScenario, seed: &SeedStream) -> Result<CfarConfig> {
        match cfg.cfar().mode() {
            CalibrationMode::Nominal => {
                if self.nominal.is_none() {
                    let c = calibrated(cfg, s, seed)?;
                    self.rows.push(("all".into(), c));
                    self.nominal = Some(c);
                }
                Ok(self.nominal.expect("set above"))
            }
            CalibrationMode::Pipeline => {
                let key = s.constellation.to_string();
                if let Some((_, c)) = self.rows.iter().find(|(k, _)| *k == key) {
                    return Ok(*c);
                }
                let c = calibrated(cfg, s, &seed.derive(&key))?;
                self.rows.push((key, c));
                Ok(c)
            }
        }
    }

    fn table(&self, mode: CalibrationMode) -> Result<Table> {
        let mut t = Table::new("cfar_calibration");
        let mode = match mode {
            CalibrationMode::Nominal => "nominal",
            CalibrationMode::Pipeline => "pipeline",
        };
        t.str_col("mode", &vec![mode; self.rows.len()])?
            .str_col("constellation", &self.rows.iter().map(|r| r.0.clone()).collect::<Vec<_>>())?
            .i64_col("window", &self.rows.iter().map(|r| r.1.window as i64).collect::<Vec<_>>())?
            .i64_col("guard", &self.rows.iter().map(|r| r.1.guard as i64).collect::<Vec<_>>())?
            .f64_col("pfa", &self.rows.iter().map(|r| r.1.pfa).collect::<Vec<_>>())?
            .f64_col("factor", &self.rows.iter().map(|r| r.1.factor).collect::<Vec<_>>())?
            .f64_col(
                "edge_factor",
                &self.rows.iter().map(|r| r.1.edge_factor.unwrap_or(r.1.factor)).collect::<Vec<_>>(),
            )?;
        Ok(t)
    }
}

/// Nonlinear operating points, failing early when none are configured.
fn sel_points(pa: &PaSection) -> Result<Vec<(f64, PaConfig)>> {
    let v: Vec<(f64, PaConfig)> = pa
        .ibo_list()?
        .into_iter()
        .map(|i| Ok((i, pa.amplifier(i)?)))
        .collect::<Result<_>>()?;
    if v.is_empty() {
        return Err(Error::config("scenario needs at least one pa.ibo_db entry"));
    }
    Ok(v)
}

/// One linear and one nonlinear periodogram from the same draws.
pub(super) fn periodogram_pair(cfg: &ExperimentConfig, seed: &SeedStream) -> Result<Vec<Table>> {
    let pa = cfg.pa();
    let (ibo, pc) = sel_points(&pa)?[0];
    let snr = cfg.snr_db()?;
    let mut maps = vec![];
    let c = cfg.constellations()?[0];
    for amp in [Amplifier::Linear, Amplifier::Sel(pc)] {
        let s = pd_scenario(cfg, c, amp)?;
        let mut rng = seed.derive("realization").rng();
        let per = s.run_trial(s.noise_var_for_snr_db(snr), &mut rng)?.periodogram;
        maps.push(per);
    }
    let (lin, nl) = (&maps[0], &maps[1]);
    let peak = |p: &crate::radar::Periodogram| p.peak().2;
    let (pl, pn) = (peak(lin), peak(nl));
    let mut delay = vec![];
    let mut doppler = vec![];
    let mut vl = vec![];
    let mut vn = vec![];
    for &l in &lin.delays {
        for &k in &lin.dopplers {
            delay.push(l);
            doppler.push(k);
            vl.push(to_db(lin.value(l as usize, k).unwrap_or(0.0) / pl));
            vn.push(to_db(nl.value(l as usize, k).unwrap_or(0.0) / pn));
        }
    }
    let tag = ibo_tag(ibo);
    let mut map = Table::new("periodogram_map");
    map.i64_col("delay", &delay)?
        .i64_col("doppler", &doppler)?
        .f64_col(format!("linear_{c}_db"), &vl)?
        .f64_col(format!("nonlinear_{c}_{tag}_db"), &vn)?;
    let cut = |p: &crate::radar::Periodogram, peak: f64| -> Vec<f64> {
        p.range_cut(0).unwrap_or_default().iter().map(|v| to_db(v / peak)).collect()
    };
    let mut rc = Table::new("periodogram_range_cut");
    rc.i64_col("delay", &lin.delays)?
        .f64_col(format!("linear_{c}_db"), &cut(lin, pl))?
        .f64_col(format!("nonlinear_{c}_{tag}_db"), &cut(nl, pn))?;
    rc.with_plot("delay", "relative power [dB]");
    Ok(vec![map, rc])
}

/// One SO-CFAR realization per (constellation, amplifier).
pub(super) fn cfar_single(cfg: &ExperimentConfig, seed: &SeedStream) -> Result<Vec<Table>> {
    let snr = cfg.snr_db()?;
    let amps = cfg.amplifiers()?;
    let mut cache = CfarCache::new();
    let mut t = Table::new("cfar_single");
    let mut summary = (vec![], vec![], vec![], vec![]);
    let mut first = true;
    for c in cfg.constellations()? {
        for (tag, amp) in &amps {
            let mut s = pd_scenario(cfg, c, *amp)?;
            s.cfar = cache.get(cfg, &s, seed)?;
            let mut rng = seed.derive("realization").derive(&c.to_string()).rng();
            let out = s.run_trial(s.noise_var_for_snr_db(snr), &mut rng)?;
            let rep = so_cfar(&out.range_cut, &s.cfar)?;
            if first {
                t.i64_col("range_bin", &(0..out.range_cut.len() as i64).collect::<Vec<_>>())?;
                first = false;
            }
            let base = format!("{c}_{tag}");
            t.f64_col(format!("{base}_cut_db"), &out.range_cut.iter().map(|&v| to_db(v)).collect::<Vec<_>>())?;
            t.f64_col(format!("{base}_threshold_db"), &rep.thresholds.iter().map(|&v| to_db(v)).collect::<Vec<_>>())?;
            t.i64_col(format!("{base}_detected"), &rep.detections.iter().map(|&d| d as i64).collect::<Vec<_>>())?;
            summary.0.push(c.to_string());
            summary.1.push(tag.clone());
            summary.2.push(s.weak_detected(&rep) as i64);
            summary.3.push(rep.detected.iter().map(|d| d.to_string()).collect::<Vec<_>>().join(" "));
        }
    }
    let mut sm = Table::new("cfar_single_summary");
    sm.str_col("constellation", &summary.0)?
        .str_col("amplifier", &summary.1)?
        .i64_col("weak_detected", &summary.2)?
        .str_col("detected_bins", &summary.3)?;
    Ok(vec![t, sm, cache.table(cfg.cfar().mode())?])
}

fn pd_table(name: String, curve: &PdCurve) -> Result<Table> {
    let mut t = Table::new(name);
    t.f64_col("snr_db", &curve.snr_db)?
        .f64_col("pd", &curve.pd)?
        .f64_col("ci_halfwidth", &curve.ci_halfwidth)?
        .i64_col("trials", &vec![curve.trials as i64; curve.pd.len()])?;
    Ok(t)
}

/// SNR at which the linear curve first reaches `level`, by linear
/// interpolation. NaN when it never does, starts above it, or `level` is 1
/// (a perfect plateau matches every SNR past saturation).
pub fn project_snr_eff(linear: &PdCurve, level: f64) -> f64 {
    if level >= 1.0 {
        return f64::NAN;
    }
    let pts: Vec<(f64, f64)> = linear
        .snr_db
        .iter()
        .zip(&linear.pd)
        .filter(|p| p.0.is_finite())
        .map(|(&s, &p)| (s, p))
        .collect();
    if pts.first().is_none_or(|p| p.1 >= level) {
        return f64::NAN;
    }
    for w in pts.windows(2) {
        let ((s0, p0), (s1, p1)) = (w[0], w[1]);
        if p0 < level && p1 >= level {
            return s0 + (level - p0) / (p1 - p0) * (s1 - s0);
        }
    }
    f64::NAN
}

/// Pd vs SNR for linear and SEL transmitters, plus the noise-free
/// (distortion-limited) point, with a plateau / SNR_eff summary.
pub(super) fn pd_curves(cfg: &ExperimentConfig, seed: &SeedStream) -> Result<Vec<Table>> {
    let grid = cfg.snr_db_grid()?;
    let trials = cfg.trials()?;
    let pa = cfg.pa();
    let points = sel_points(&pa)?;
    let mut cache = CfarCache::new();
    let mut out = vec![];
    let mut sm = (vec![], vec![], vec![], vec![], vec![], vec![]);
    for c in cfg.constellations()? {
        let s_seed = data_seed(seed, c);
        let mut lin = pd_scenario(cfg, c, Amplifier::Linear)?;
        lin.cfar = cache.get(cfg, &lin, seed)?;
        let lin_curve = pd_experiment(&lin, &grid, trials, &s_seed)?;
        out.push(pd_table(format!("pd_{c}_linear"), &lin_curve)?);
        for &(ibo, pc) in &points {
            let tag = ibo_tag(ibo);
            let mut nl = pd_scenario(cfg, c, Amplifier::Sel(pc))?;
            nl.cfar = lin.cfar;
            let curve = pd_experiment(&nl, &grid, trials, &s_seed)?;
            out.push(pd_table(format!("pd_{c}_{tag}"), &curve)?);
            let limited = pd_experiment(&nl, &[f64::INFINITY], trials, &s_seed)?;
            out.push(pd_table(format!("pd_{c}_{tag}_limited"), &limited)?);
            let basis = SignalingBasis::ofdm(nl.frame.n)?;
            let st = estimate_bussgang(&pc, &basis, c, trials, &seed.derive("bussgang").derive(&c.to_string()))?;
            sm.0.push(c.to_string());
            sm.1.push(tag);
            sm.2.push(limited.pd[0]);
            sm.3.push(limited.ci_halfwidth[0]);
            sm.4.push(project_snr_eff(&lin_curve, limited.pd[0]));
            sm.5.push(to_db(st.sdr));
        }
    }
    let mut s = Table::new("pd_summary");
    s.str_col("constellation", &sm.0)?
        .str_col("amplifier", &sm.1)?
        .f64_col("plateau_pd", &sm.2)?
        .f64_col("plateau_ci_halfwidth", &sm.3)?
        .f64_col("snr_eff_projected_db", &sm.4)?
        .f64_col("sdr_db", &sm.5)?;
    out.push(s);
    out.push(cache.table(cfg.cfar().mode())?);
    Ok(out)
}

/// Window/guard sweep: nominal calibration per geometry, then the
/// distortion-limited weak-target Pd of each constellation at `ibo_db`.
#[allow(clippy::too_many_arguments)]
pub fn cfar_sweep(
    geometries: &[(usize, usize)],
    constellations: &[ConstellationSpec],
    pa: &PaConfig,
    m: usize,
    pfa: f64,
    calibration_trials: usize,
    trials: usize,
    seed: &SeedStream,
) -> Result<Table> {
    let mut cols: (Vec<i64>, Vec<i64>, Vec<f64>, Vec<f64>) = Default::default();
    let mut pds: Vec<Vec<f64>> = vec![vec![]; constellations.len()];
    for &(w, g) in geometries {
        let skeleton = CfarConfig {
            window: w,
            guard: g,
            pfa,
            ..CfarConfig::default()
        };
        let cal = calibrate_cfar(&skeleton, &NoiseModel::Exponential, calibration_trials, &seed.derive("cfar"))?;
        cols.0.push(w as i64);
        cols.1.push(g as i64);
        cols.2.push(cal.factor);
        cols.3.push(cal.edge_factor.unwrap_or(cal.factor));
        for (i, &c) in constellations.iter().enumerate() {
            let mut s = PdScenario::two_target(c, m, Amplifier::Sel(*pa))?;
            s.cfar = cal;
            s.validate()?;
            let pd = pd_experiment(&s, &[f64::INFINITY], trials, &data_seed(seed, c))?;
            pds[i].push(pd.pd[0]);
        }
    }
    let mut t = Table::new("cfar_sweep");
    t.i64_col("window", &cols.0)?
        .i64_col("guard", &cols.1)?
        .f64_col("factor", &cols.2)?
        .f64_col("edge_factor", &cols.3)?;
    for (c, v) in constellations.iter().zip(&pds) {
        t.f64_col(format!("pd_limited_{c}"), v)?;
    }
    Ok(t)
}

// -------------------------------------------------------------- defaults

fn specs(names: &[&str]) -> Vec<ConstellationSpec> {
    names.iter().map(|n| n.parse().expect("built-in constellation name")).collect()
}

fn pa_db(ibo: &[f64]) -> Option<PaSection> {
    Some(PaSection {
        ibo_db: Some(ibo.to_vec()),
        ..Default::default()
    })
}

pub(super) fn defaults_zero_doppler(mode: AfMode) -> ExperimentConfig {
    ExperimentConfig {
        constellations: Some(specs(&["psk16", "qam16"])),
        n: Some(64),
        af_modes: Some(vec![mode]),
        pa: pa_db(&[1.0, 4.0]),
        trials: Some(10_000),
        ..Default::default()
    }
}

pub(super) fn defaults_distortion_power() -> ExperimentConfig {
    ExperimentConfig {
        constellations: Some(specs(&["psk16", "psk64", "qam16", "qam64"])),
        n: Some(1024),
        pa: pa_db(&(0..=10).map(f64::from).collect::<Vec<_>>()),
        trials: Some(1000),
        ..Default::default()
    }
}

pub(super) fn defaults_distortion_term() -> ExperimentConfig {
    ExperimentConfig {
        constellations: Some(specs(&["psk16", "qam16", "qam64"])),
        n: Some(64),
        af_modes: Some(vec![AfMode::Periodic]),
        pa: pa_db(&[1.0]),
        trials: Some(10_000),
        ..Default::default()
    }
}

pub(super) fn defaults_signaling() -> ExperimentConfig {
    ExperimentConfig {
        constellations: Some(specs(&["psk16", "qam16"])),
        bases: Some(vec![BasisKind::Ofdm, BasisKind::Sc, BasisKind::Cdma]),
        n: Some(64),
        af_modes: Some(vec![AfMode::Periodic]),
        pa: pa_db(&[1.0]),
        trials: Some(10_000),
        ..Default::default()
    }
}

pub(super) fn defaults_eisl() -> ExperimentConfig {
    ExperimentConfig {
        constellations: Some(specs(&["psk16", "qam16"])),
        n_values: Some(vec![16, 32, 64, 128, 256]),
        af_modes: Some(vec![AfMode::Periodic, AfMode::Aperiodic]),
        pa: pa_db(&[1.0]),
        trials: Some(1000),
        ..Default::default()
    }
}

pub(super) fn defaults_eislr() -> ExperimentConfig {
    ExperimentConfig {
        constellations: Some(specs(&["psk16", "qam16", "qam64"])),
        n_values: Some(vec![16, 32, 64, 128, 256]),
        af_modes: Some(vec![AfMode::Aperiodic]),
        pa: pa_db(&[1.0, 3.0, 5.0]),
        trials: Some(1000),
        ..Default::default()
    }
}

pub(super) fn defaults_pslr() -> ExperimentConfig {
    ExperimentConfig {
        constellations: Some(specs(&["psk16"])),
        n_values: Some(vec![64, 128, 256]),
        af_modes: Some(vec![AfMode::Periodic]),
        pa: pa_db(&[1.0]),
        trials: Some(4000),
        ..Default::default()
    }
}

pub(super) fn defaults_zero_delay() -> ExperimentConfig {
    ExperimentConfig {
        constellations: Some(specs(&["psk16", "qam16"])),
        n: Some(64),
        doppler_grid: Some(64),
        pa: pa_db(&[4.0]),
        trials: Some(10_000),
        ..Default::default()
    }
}

pub(super) fn defaults_zero_delay_qam() -> ExperimentConfig {
    ExperimentConfig {
        constellations: Some(specs(&["qam16"])),
        pa: pa_db(&[0.0, 2.0, 4.0, 6.0, 8.0]),
        ..defaults_zero_delay()
    }
}

fn two_targets() -> Option<Vec<TargetSpec>> {
    Some(vec![
        TargetSpec {
            delay: 4,
            power: None,
            power_db: Some(0.0),
            doppler: None,
        },
        TargetSpec {
            delay: 8,
            power: None,
            power_db: Some(-10.0),
            doppler: None,
        },
    ])
}

fn detection_base() -> ExperimentConfig {
    ExperimentConfig {
        n: Some(64),
        cp_len: Some(16),
        targets: two_targets(),
        weak_bin: Some(8),
        cfar: Some(super::config::CfarSection {
            window: Some(16),
            guard: Some(2),
            pfa: Some(1e-4),
            calibration: Some(CalibrationMode::Nominal),
            calibration_trials: None,
        }),
        ..Default::default()
    }
}

pub(super) fn defaults_periodogram() -> ExperimentConfig {
    ExperimentConfig {
        constellations: Some(specs(&["psk16"])),
        m: Some(64),
        pa: pa_db(&[1.0]),
        snr_db: Some(20.0),
        trials: Some(1),
        ..detection_base()
    }
}

pub(super) fn defaults_cfar_single() -> ExperimentConfig {
    ExperimentConfig {
        constellations: Some(specs(&["psk16", "qam16"])),
        m: Some(1),
        pa: pa_db(&[5.0]),
        snr_db: Some(15.0),
        trials: Some(1),
        ..detection_base()
    }
}

fn snr_grid() -> Option<Vec<f64>> {
    Some((0..=12).map(|i| 2.0 * f64::from(i)).collect())
}

pub(super) fn defaults_pd_curves() -> ExperimentConfig {
    ExperimentConfig {
        constellations: Some(specs(&["psk16", "qam16"])),
        m: Some(1),
        pa: pa_db(&[1.0]),
        snr_db_grid: snr_grid(),
        trials: Some(1000),
        ..detection_base()
    }
}

pub(super) fn defaults_pd_constellations() -> ExperimentConfig {
    ExperimentConfig {
        constellations: Some(specs(&["psk16", "qam16", "qam64"])),
        ..defaults_pd_curves()
    }
}
