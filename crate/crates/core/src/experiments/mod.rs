//! Named, reproducible scenarios.
//!
//! A run merges the user config over the scenario defaults, derives every
//! random stream from a single base seed, computes result tables on a
//! dedicated worker pool and writes CSV files plus a `manifest.json` from
//! the calling thread. Monte-Carlo reductions merge fixed-size chunks in
//! index order, so CSV bytes do not depend on the worker count.

pub mod config;
pub mod output;
pub mod plot;
mod scenarios;

use std::path::PathBuf;
use std::time::{Instant, SystemTime, UNIX_EPOCH};

use serde::Serialize;

use crate::ambiguity::AfMode;
use crate::error::{Error, Result};
use crate::seed::SeedStream;

pub use config::{CalibrationMode, CfarSection, ExperimentConfig, PaSection, TargetSpec};
pub use output::{FileRecord, RunManifest, Table};
pub use scenarios::{cfar_sweep, project_snr_eff};

pub const DEFAULT_SEED: u64 = 20_240_601;

/// Registry entry as shown by `list`.
#[derive(Debug, Clone, Serialize)]
pub struct ScenarioInfo {
    pub name: &'static str,
    /// The figure this scenario regenerates.
    pub figure: &'static str,
    pub description: &'static str,
    /// Wall clock with default settings, release build, single core.
    pub default_runtime: &'static str,
}

type RunFn = fn(&ExperimentConfig, &SeedStream) -> Result<Vec<Table>>;

struct Entry {
    info: ScenarioInfo,
    defaults: fn() -> ExperimentConfig,
    run: RunFn,
}

fn registry() -> Vec<Entry> {
    use scenarios as s;
    vec![
        Entry {
            info: ScenarioInfo {
                name: "fig-zero-doppler-cp",
                figure: "zero-Doppler AF cuts, CP-OFDM (periodic), 16-PSK/16-QAM, linear vs SEL with analytic overlays",
                description: "Averaged |A(l,0)|^2 with SEL clipping-term and Bussgang overlays",
                default_runtime: "~3 s",
            },
            defaults: || s::defaults_zero_doppler(AfMode::Periodic),
            run: s::zero_doppler,
        },
        Entry {
            info: ScenarioInfo {
                name: "fig-zero-doppler-nocp",
                figure: "zero-Doppler AF cuts, OFDM without CP (aperiodic), 16-PSK/16-QAM, linear vs SEL with analytic overlays",
                description: "Aperiodic counterpart of fig-zero-doppler-cp",
                default_runtime: "~3 s",
            },
            defaults: || s::defaults_zero_doppler(AfMode::Aperiodic),
            run: s::zero_doppler,
        },
        Entry {
            info: ScenarioInfo {
                name: "fig-distortion-power",
                figure: "PA distortion power vs IBO, N = 1024, 16/64-PSK and 16/64-QAM",
                description: "Bussgang distortion variance and clipping residual per IBO with Gaussian reference",
                default_runtime: "~5 s",
            },
            defaults: s::defaults_distortion_power,
            run: s::distortion_power,
        },
        Entry {
            info: ScenarioInfo {
                name: "fig-distortion-term",
                figure: "isolated distortion contribution A(l,0) - |kappa|^4 A_x(l,0), OFDM, N = 64",
                description: "Output cut, scaled input cut and their difference relative to the output mainlobe",
                default_runtime: "<1 s",
            },
            defaults: s::defaults_distortion_term,
            run: s::distortion_term,
        },
        Entry {
            info: ScenarioInfo {
                name: "fig-signaling-comparison",
                figure: "zero-Doppler cuts of OFDM, SC and CDMA signaling, 16-PSK and 16-QAM, IBO = 1 dB, N = 64",
                description: "Per-basis cuts and a sidelobe summary table",
                default_runtime: "~1 s",
            },
            defaults: s::defaults_signaling,
            run: s::signaling_comparison,
        },
        Entry {
            info: ScenarioInfo {
                name: "fig-eisl-vs-n",
                figure: "EISL vs sequence length from the SEL clipping terms, with and without CP, IBO = 1 dB",
                description: "Clipping-term EISL against direct Monte-Carlo EISL",
                default_runtime: "~3 s",
            },
            defaults: s::defaults_eisl,
            run: s::eisl_vs_n,
        },
        Entry {
            info: ScenarioInfo {
                name: "fig-eislr-vs-n",
                figure: "aperiodic EISLR vs sequence length for several constellations and IBOs",
                description: "Large-N Bussgang EISLR against direct Monte-Carlo EISLR",
                default_runtime: "~1 s",
            },
            defaults: s::defaults_eislr,
            run: s::eislr_vs_n,
        },
        Entry {
            info: ScenarioInfo {
                name: "fig-pslr-vs-n",
                figure: "zero-Doppler cuts of 16-PSK for N = 64, 128, 256 at IBO = 1 dB",
                description: "PSLR per length with per-doubling gain, plus the cuts in long format",
                default_runtime: "<1 s",
            },
            defaults: s::defaults_pslr,
            run: s::pslr_vs_n,
        },
        Entry {
            info: ScenarioInfo {
                name: "fig-zero-delay",
                figure: "zero-delay AF cuts, OFDM, N = 64, IBO = 4 dB, PSK vs QAM",
                description: "Averaged |A(0,k)|^2 linear, SEL and analytic",
                default_runtime: "<1 s",
            },
            defaults: s::defaults_zero_delay,
            run: s::zero_delay,
        },
        Entry {
            info: ScenarioInfo {
                name: "fig-zero-delay-qam",
                figure: "zero-delay AF cuts of 16-QAM for several IBOs, N = 64",
                description: "Zero-delay cuts showing lower Doppler sidelobes under stronger clipping",
                default_runtime: "<1 s",
            },
            defaults: s::defaults_zero_delay_qam,
            run: s::zero_delay,
        },
        Entry {
            info: ScenarioInfo {
                name: "fig-periodogram",
                figure: "linear vs nonlinear periodograms, 16-PSK, N = M = 64, IBO = 1 dB, SNR = 20 dB",
                description: "Delay-Doppler maps and zero-Doppler range cuts from one realization",
                default_runtime: "<1 s",
            },
            defaults: s::defaults_periodogram,
            run: s::periodogram_pair,
        },
        Entry {
            info: ScenarioInfo {
                name: "fig-cfar-single",
                figure: "SO-CFAR on single realizations of 16-PSK and 16-QAM, with and without PA, IBO = 5 dB",
                description: "Range cut, threshold and detections per transmitter",
                default_runtime: "~1 s",
            },
            defaults: s::defaults_cfar_single,
            run: s::cfar_single,
        },
        Entry {
            info: ScenarioInfo {
                name: "fig-pd-curves",
                figure: "probability of detection vs SNR, 16-PSK and 16-QAM, linear / IBO = 1 dB / distortion-limited",
                description: "Weak-target Pd curves with Wilson intervals and plateau summary",
                default_runtime: "~2 s",
            },
            defaults: s::defaults_pd_curves,
            run: s::pd_curves,
        },
        Entry {
            info: ScenarioInfo {
                name: "fig-pd-constellations",
                figure: "probability of detection vs SNR for 16-PSK, 16-QAM and 64-QAM at IBO = 1 dB",
                description: "Pd curves, distortion-limited plateaus and projected SNR_eff",
                default_runtime: "~2 s",
            },
            defaults: s::defaults_pd_constellations,
            run: s::pd_curves,
        },
    ]
}

pub fn list_scenarios() -> Vec<ScenarioInfo> {
    registry().into_iter().map(|e| e.info).collect()
}

fn find(name: &str) -> Result<Entry> {
    let reg = registry();
    let names: Vec<&str> = reg.iter().map(|e| e.info.name).collect();
    let joined = names.join(", ");
    reg.into_iter().find(|e| e.info.name == name).ok_or(Error::UnknownScenario {
        name: name.to_string(),
        available: joined,
    })
}

/// Default configuration of a scenario.
pub fn scenario_defaults(name: &str) -> Result<ExperimentConfig> {
    let e = find(name)?;
    let mut c = (e.defaults)();
    c.scenario = Some(name.to_string());
    Ok(c)
}

/// Command-line level overrides.
#[derive(Debug, Clone, Default)]
pub struct RunOptions {
    pub seed: Option<u64>,
    pub trials: Option<usize>,
    pub out_dir: Option<PathBuf>,
    /// Worker threads; all available cores when absent.
    pub workers: Option<usize>,
    pub plots: bool,
}

/// Defaults, then the user config, then command-line overrides.
pub fn resolve_config(name: &str, user: &ExperimentConfig, opts: &RunOptions) -> Result<ExperimentConfig> {
    if let Some(s) = &user.scenario {
        if s != name {
            return Err(Error::config(format!("config is for scenario `{s}`, not `{name}`")));
        }
    }
    let mut c = scenario_defaults(name)?.merge(user);
    if let Some(t) = opts.trials {
        c.trials = Some(t);
    }
    c.seed = Some(opts.seed.or(c.seed).unwrap_or(DEFAULT_SEED));
    if let Some(o) = &opts.out_dir {
        c.out_dir = Some(o.clone());
    }
    Ok(c)
}

fn pool(workers: Option<usize>) -> Result<rayon::ThreadPool> {
    let mut b = rayon::ThreadPoolBuilder::new();
    if let Some(w) = workers {
        if w == 0 {
            return Err(Error::config("--workers must be >= 1"));
        }
        b = b.num_threads(w);
    }
    b.build().map_err(|e| Error::config(format!("cannot build worker pool: {e}")))
}

/// Computes the tables of a resolved config without touching the disk.
pub fn compute_tables(config: &ExperimentConfig, workers: Option<usize>) -> Result<Vec<Table>> {
    let name = config
        .scenario
        .clone()
        .ok_or_else(|| Error::config("config has no scenario name"))?;
    let entry = find(&name)?;
    let seed = SeedStream::new(config.seed.unwrap_or(DEFAULT_SEED)).derive(&name);
    let tables = pool(workers)?
        .install(|| (entry.run)(config, &seed))
        .map_err(|e| Error::Scenario {
            scenario: name.clone(),
            source: Box::new(e),
        })?;
    let mut seen = std::collections::HashSet::new();
    for t in &tables {
        if !seen.insert(t.name.clone()) {
            return Err(Error::config(format!("scenario `{name}` produced table `{}` twice", t.name)));
        }
    }
    Ok(tables)
}

/// Runs a scenario end to end and writes its files.
pub fn run_scenario(name: &str, user: &ExperimentConfig, opts: &RunOptions) -> Result<RunManifest> {
    let config = resolve_config(name, user, opts)?;
    let started = SystemTime::now().duration_since(UNIX_EPOCH).map_or(0, |d| d.as_secs());
    let clock = Instant::now();
    let tables = compute_tables(&config, opts.workers)?;
    let dir = config
        .out_dir
        .clone()
        .unwrap_or_else(|| PathBuf::from("out").join(name));
    std::fs::create_dir_all(&dir)?;
    let mut files = vec![];
    for t in &tables {
        files.push(output::write_file(&dir, &format!("{}.csv", t.name), &t.to_csv_bytes()?)?);
        if opts.plots {
            if let Some(svg) = plot::render_svg(t) {
                files.push(output::write_file(&dir, &format!("{}.svg", t.name), svg.as_bytes())?);
            }
        }
    }
    let manifest = RunManifest {
        scenario: name.to_string(),
        description: find(name)?.info.figure.to_string(),
        seed: config.seed.unwrap_or(DEFAULT_SEED),
        version: env!("CARGO_PKG_VERSION").to_string(),
        config,
        workers: opts.workers.unwrap_or_else(rayon::current_num_threads),
        started_unix: started,
        wall_clock_secs: clock.elapsed().as_secs_f64(),
        files,
    };
    let json = serde_json::to_vec_pretty(&manifest)?;
    std::fs::write(dir.join("manifest.json"), json)?;
    Ok(manifest)
}
