use std::io::Write;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};

use isac_pa::ambiguity::{average_af, average_zero_delay, sidelobe_metrics, AfMode};
use isac_pa::detect::{calibrate_cfar, empirical_pfa, pd_experiment, CfarConfig, NoiseModel, PdScenario};
use isac_pa::dsp::to_db;
use isac_pa::experiments::{self, cfar_sweep, ExperimentConfig, RunOptions, Table};
use isac_pa::pa::{Amplifier, PaConfig};
use isac_pa::seed::SeedStream;
use isac_pa::signaling::{BasisKind, Constellation, ConstellationSpec, SignalingBasis};
use isac_pa::{Error, Result};

#[derive(Parser)]
#[command(name = "isac-pa", version, about = "OFDM ISAC waveform analysis under PA clipping")]
struct Cli {
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// List registered scenarios.
    List {
        /// Emit JSON instead of a table.
        #[arg(long)]
        json: bool,
    },
    /// Run a named scenario and write CSVs plus manifest.json.
    Run {
        scenario: String,
        /// JSON config (or a previous manifest.json).
        #[arg(long)]
        config: Option<PathBuf>,
        #[arg(long)]
        seed: Option<u64>,
        #[arg(long)]
        trials: Option<usize>,
        #[arg(long)]
        out: Option<PathBuf>,
        #[arg(long)]
        workers: Option<usize>,
        /// Also render SVG line plots.
        #[arg(long)]
        plots: bool,
    },
    /// Calibrate the SO-CFAR threshold factors, optionally sweeping geometries.
    CalibrateCfar {
        #[arg(long, default_value_t = 16)]
        window: usize,
        #[arg(long, default_value_t = 2)]
        guard: usize,
        #[arg(long, default_value_t = 1e-4)]
        pfa: f64,
        #[arg(long, value_enum, default_value_t = CalMode::Nominal)]
        mode: CalMode,
        /// Constellation of the pipeline noise model.
        #[arg(long, default_value = "psk16")]
        constellation: ConstellationSpec,
        /// Symbols per frame for the pipeline model and the sweep.
        #[arg(long, default_value_t = 1)]
        m: usize,
        /// Calibration sample size; a per-mode default when absent.
        #[arg(long)]
        trials: Option<usize>,
        /// Comma-separated `window:guard` pairs; reports distortion-limited Pd for each.
        #[arg(long)]
        sweep: Option<String>,
        /// IBO of the sweep transmitter.
        #[arg(long, default_value_t = 1.0)]
        ibo_db: f64,
        /// Constellations scored by the sweep.
        #[arg(long, value_delimiter = ',', default_value = "psk16,qam16,qam64")]
        sweep_constellations: Vec<ConstellationSpec>,
        /// Pd trials per sweep point.
        #[arg(long, default_value_t = 1000)]
        pd_trials: usize,
        #[arg(long, default_value_t = experiments::DEFAULT_SEED)]
        seed: u64,
        #[arg(long)]
        workers: Option<usize>,
        /// CSV output for the sweep; stdout when absent.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Averaged zero-Doppler or zero-delay AF cut as CSV.
    AfCut {
        #[arg(long, default_value = "psk16")]
        constellation: ConstellationSpec,
        #[arg(long, default_value = "ofdm")]
        basis: BasisKind,
        #[arg(long, default_value_t = 64)]
        n: usize,
        /// SEL operating point; linear amplifier when absent.
        #[arg(long)]
        ibo_db: Option<f64>,
        #[arg(long, value_enum, default_value_t = Mode::Periodic)]
        mode: Mode,
        #[arg(long, value_enum, default_value_t = Axis::Delay)]
        axis: Axis,
        /// Doppler grid for the zero-delay cut; `n` when absent.
        #[arg(long)]
        doppler_grid: Option<usize>,
        #[arg(long, default_value_t = 1000)]
        trials: usize,
        #[arg(long, default_value_t = experiments::DEFAULT_SEED)]
        seed: u64,
        #[arg(long)]
        workers: Option<usize>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Weak-target Pd versus SNR for the two-target scene.
    PdCurve {
        #[arg(long, default_value = "psk16")]
        constellation: ConstellationSpec,
        #[arg(long)]
        ibo_db: Option<f64>,
        /// Comma-separated SNR grid in dB; `inf` gives the distortion-limited point.
        #[arg(long, value_delimiter = ',', default_value = "0,2,4,6,8,10,12,14,16,18,20,22,24")]
        snr_db: Vec<f64>,
        #[arg(long, default_value_t = 1)]
        m: usize,
        #[arg(long, default_value_t = 1000)]
        trials: usize,
        #[arg(long, default_value_t = 16)]
        window: usize,
        #[arg(long, default_value_t = 2)]
        guard: usize,
        #[arg(long, default_value_t = 1e-4)]
        pfa: f64,
        #[arg(long, default_value_t = experiments::DEFAULT_SEED)]
        seed: u64,
        #[arg(long)]
        workers: Option<usize>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// One delay-Doppler periodogram of the two-target scene as CSV.
    Periodogram {
        #[arg(long, default_value = "psk16")]
        constellation: ConstellationSpec,
        #[arg(long)]
        ibo_db: Option<f64>,
        #[arg(long, default_value_t = 20.0)]
        snr_db: f64,
        #[arg(long, default_value_t = 64)]
        m: usize,
        #[arg(long, default_value_t = experiments::DEFAULT_SEED)]
        seed: u64,
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

#[derive(Clone, Copy, ValueEnum)]
enum CalMode {
    Nominal,
    Pipeline,
}

#[derive(Clone, Copy, ValueEnum)]
enum Mode {
    Periodic,
    Aperiodic,
}

#[derive(Clone, Copy, ValueEnum)]
enum Axis {
    Delay,
    Doppler,
}

fn amplifier(ibo_db: Option<f64>) -> Result<Amplifier> {
    Ok(match ibo_db {
        Some(i) => Amplifier::Sel(PaConfig::unit_drive_db(i)?),
        None => Amplifier::Linear,
    })
}

fn emit(table: &Table, out: Option<&PathBuf>) -> Result<()> {
    let bytes = table.to_csv_bytes()?;
    match out {
        Some(p) => std::fs::write(p, bytes)?,
        None => std::io::stdout().write_all(&bytes)?,
    }
    Ok(())
}

fn in_pool<T: Send>(workers: Option<usize>, f: impl FnOnce() -> Result<T> + Send) -> Result<T> {
    let mut b = rayon::ThreadPoolBuilder::new();
    if let Some(w) = workers {
        if w == 0 {
            return Err(Error::Config("--workers must be >= 1".into()));
        }
        b = b.num_threads(w);
    }
    b.build()
        .map_err(|e| Error::Config(format!("cannot build worker pool: {e}")))?
        .install(f)
}

fn parse_geometries(s: &str) -> Result<Vec<(usize, usize)>> {
    s.split(',')
        .map(|p| {
            let (w, g) = p
                .trim()
                .split_once(':')
                .ok_or_else(|| Error::Config(format!("sweep entry `{p}` is not window:guard")))?;
            let parse = |v: &str| v.trim().parse::<usize>().map_err(|e| Error::Config(format!("sweep entry `{p}`: {e}")));
            Ok((parse(w)?, parse(g)?))
        })
        .collect()
}

fn run(cli: Cli) -> Result<()> {
    match cli.cmd {
        Cmd::List { json } => {
            let list = experiments::list_scenarios();
            if json {
                println!("{}", serde_json::to_string_pretty(&list)?);
            } else {
                for s in list {
                    println!("{:<26} {:>6}  {}", s.name, s.default_runtime, s.figure);
                }
            }
        }
        Cmd::Run {
            scenario,
            config,
            seed,
            trials,
            out,
            workers,
            plots,
        } => {
            let user = match config {
                Some(p) => ExperimentConfig::load(&p)?,
                None => ExperimentConfig::default(),
            };
            let opts = RunOptions {
                seed,
                trials,
                out_dir: out,
                workers,
                plots,
            };
            let m = experiments::run_scenario(&scenario, &user, &opts)?;
            let dir = m.config.out_dir.clone().unwrap_or_else(|| PathBuf::from("out").join(&scenario));
            eprintln!("{} finished in {:.2} s (seed {})", m.scenario, m.wall_clock_secs, m.seed);
            for f in &m.files {
                println!("{}  {}", f.sha256, dir.join(&f.path).display());
            }
        }
        Cmd::CalibrateCfar {
            window,
            guard,
            pfa,
            mode,
            constellation,
            m,
            trials,
            sweep,
            ibo_db,
            sweep_constellations,
            pd_trials,
            seed,
            workers,
            out,
        } => {
            let seed = SeedStream::new(seed).derive("calibrate-cfar");
            let skeleton = CfarConfig {
                window,
                guard,
                pfa,
                ..CfarConfig::default()
            };
            let (model, default_trials) = match mode {
                CalMode::Nominal => (NoiseModel::Exponential, 2_000_000),
                CalMode::Pipeline => (
                    NoiseModel::Pipeline(Box::new(PdScenario::two_target(constellation, m, Amplifier::Linear)?)),
                    60_000,
                ),
            };
            let n_trials = trials.unwrap_or(default_trials);
            let cal = in_pool(workers, || calibrate_cfar(&skeleton, &model, n_trials, &seed))?;
            let check = in_pool(workers, || empirical_pfa(&cal, 2_000_000, &seed.derive("check")))?;
            eprintln!(
                "window {} guard {} pfa {:e}: factor {:.4}, edge factor {:.4}; fresh exponential check interior {:.2e} edge {:.2e}",
                cal.window,
                cal.guard,
                cal.pfa,
                cal.factor,
                cal.edge_factor.unwrap_or(cal.factor),
                check.0,
                check.1
            );
            println!("{}", serde_json::to_string(&cal)?);
            if let Some(s) = sweep {
                let geoms = parse_geometries(&s)?;
                let pa = PaConfig::unit_drive_db(ibo_db)?;
                let cal_trials = trials.unwrap_or(2_000_000);
                let t = in_pool(workers, || {
                    cfar_sweep(&geoms, &sweep_constellations, &pa, m, pfa, cal_trials, pd_trials, &seed.derive("sweep"))
                })?;
                emit(&t, out.as_ref())?;
            }
        }
        Cmd::AfCut {
            constellation,
            basis,
            n,
            ibo_db,
            mode,
            axis,
            doppler_grid,
            trials,
            seed,
            workers,
            out,
        } => {
            let b = SignalingBasis::new(basis, n)?;
            let table = Constellation::new(constellation)?;
            let amp = amplifier(ibo_db)?;
            let gen = move |rng: &mut rand_chacha::ChaCha8Rng| Ok(amp.apply(&b.synthesize_slice(&table.draw(n, rng).0)));
            let mode = match mode {
                Mode::Periodic => AfMode::Periodic,
                Mode::Aperiodic => AfMode::Aperiodic,
            };
            let seed = SeedStream::new(seed).derive("af-cut");
            let mut t = Table::new("af_cut");
            match axis {
                Axis::Delay => {
                    let s = in_pool(workers, || average_af(gen, trials, 1, mode, &seed))?;
                    let m = sidelobe_metrics(&s)?;
                    eprintln!(
                        "mean sidelobe {:.2} dB, PSLR {:.2} dB, EISLR {:.2} dB",
                        to_db(m.mean_sidelobe),
                        to_db(m.pslr),
                        to_db(m.eislr)
                    );
                    let c = s.zero_doppler_cut();
                    t.i64_col("lag", &c.axis)?.f64_col("value_db", &c.db())?;
                    if let Some(se) = &c.std_err {
                        t.f64_col("std_err", se)?;
                    }
                }
                Axis::Doppler => {
                    let k = doppler_grid.unwrap_or(n);
                    let s = in_pool(workers, || average_zero_delay(gen, trials, k, mode, &seed))?;
                    let c = s.zero_delay_cut();
                    t.i64_col("doppler", &c.axis)?.f64_col("value_db", &c.db())?;
                    if let Some(se) = &c.std_err {
                        t.f64_col("std_err", se)?;
                    }
                }
            }
            emit(&t, out.as_ref())?;
        }
        Cmd::PdCurve {
            constellation,
            ibo_db,
            snr_db,
            m,
            trials,
            window,
            guard,
            pfa,
            seed,
            workers,
            out,
        } => {
            let seed = SeedStream::new(seed).derive("pd-curve");
            let mut s = PdScenario::two_target(constellation, m, amplifier(ibo_db)?)?;
            let skeleton = CfarConfig {
                window,
                guard,
                pfa,
                ..CfarConfig::default()
            };
            let curve = in_pool(workers, || {
                s.cfar = calibrate_cfar(&skeleton, &NoiseModel::Exponential, 2_000_000, &seed.derive("cfar"))?;
                pd_experiment(&s, &snr_db, trials, &seed.derive("data"))
            })?;
            let mut t = Table::new("pd_curve");
            t.f64_col("snr_db", &curve.snr_db)?
                .f64_col("pd", &curve.pd)?
                .f64_col("ci_halfwidth", &curve.ci_halfwidth)?
                .i64_col("trials", &vec![curve.trials as i64; curve.pd.len()])?;
            emit(&t, out.as_ref())?;
        }
        Cmd::Periodogram {
            constellation,
            ibo_db,
            snr_db,
            m,
            seed,
            out,
        } => {
            let s = PdScenario::two_target(constellation, m, amplifier(ibo_db)?)?;
            let mut rng = SeedStream::new(seed).derive("periodogram").rng();
            let per = s.run_trial(s.noise_var_for_snr_db(snr_db), &mut rng)?.periodogram;
            let (mut d, mut k, mut v) = (vec![], vec![], vec![]);
            for &l in &per.delays {
                for &f in &per.dopplers {
                    d.push(l);
                    k.push(f);
                    v.push(to_db(per.value(l as usize, f).unwrap_or(0.0)));
                }
            }
            let mut t = Table::new("periodogram");
            t.i64_col("delay", &d)?.i64_col("doppler", &k)?.f64_col("power_db", &v)?;
            emit(&t, out.as_ref())?;
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
