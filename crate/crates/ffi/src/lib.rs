//! C ABI for `isac-pa`.
//!
//! Conventions:
//! - every fallible call returns an [`IsacStatus`]; `ISAC_STATUS_OK` is 0
//! - results come back through out-pointers; handles are opaque and must be
//!   released with their `*_free` function
//! - on failure, [`isac_last_error`] returns a message for the calling thread
//! - complex samples are passed as arrays of [`IsacComplex`]
//! - a NaN `ibo_db` selects the ideal linear amplifier
//!
//! Panics never cross the boundary; they surface as `ISAC_STATUS_PANIC`.

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::path::PathBuf;
use std::ptr;

use isac_pa::ambiguity::{average_af, sidelobe_metrics, AfMode, AmbiguitySurface};
use isac_pa::detect::{calibrate_cfar, pd_experiment, CfarConfig, NoiseModel, PdCurve, PdScenario};
use isac_pa::experiments::{run_scenario, ExperimentConfig, RunOptions};
use isac_pa::pa::{snr_eff, Amplifier, PaConfig};
use isac_pa::seed::SeedStream;
use isac_pa::signaling::{BasisKind, Constellation, ConstellationSpec, SignalingBasis};
use isac_pa::{Complex64, Error};

/// Status codes. Values 2 and 3 match the CLI exit codes.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum IsacStatus {
    Ok = 0,
    /// A required pointer argument was null.
    NullPointer = 1,
    /// Invalid parameters or configuration.
    Config = 2,
    /// Numeric, metric or calibration failure.
    Numeric = 3,
    /// File system or serialization failure.
    Io = 4,
    /// A string argument was not valid UTF-8.
    InvalidUtf8 = 5,
    /// Caller buffer too small.
    BufferTooSmall = 6,
    /// Internal panic caught at the boundary.
    Panic = 7,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct IsacComplex {
    pub re: f64,
    pub im: f64,
}

/// Zero-Doppler sidelobe statistics of an averaged surface.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct IsacSidelobeMetrics {
    pub isl: f64,
    pub eislr: f64,
    pub pslr: f64,
    pub mainlobe: f64,
    pub mean_sidelobe: f64,
}

/// Opaque SEL amplifier.
pub struct IsacAmplifier {
    cfg: PaConfig,
}

/// Opaque averaged ambiguity surface.
pub struct IsacAfSurface {
    surface: AmbiguitySurface,
}

/// Opaque detection curve.
pub struct IsacPdCurve {
    curve: PdCurve,
}

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_error(msg: String) {
    let c = CString::new(msg.replace('\0', " ")).unwrap_or_default();
    LAST_ERROR.with(|e| *e.borrow_mut() = Some(c));
}

fn status_of(e: &Error) -> IsacStatus {
    match e.exit_code() {
        2 => IsacStatus::Config,
        3 => IsacStatus::Numeric,
        _ => IsacStatus::Io,
    }
}

/// Runs `f`, mapping errors and panics to status codes.
fn guard(f: impl FnOnce() -> Result<(), (IsacStatus, String)>) -> IsacStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => IsacStatus::Ok,
        Ok(Err((s, msg))) => {
            set_error(msg);
            s
        }
        Err(_) => {
            set_error("internal panic".into());
            IsacStatus::Panic
        }
    }
}

fn lib(e: Error) -> (IsacStatus, String) {
    (status_of(&e), e.to_string())
}

fn null(name: &str) -> (IsacStatus, String) {
    (IsacStatus::NullPointer, format!("`{name}` is null"))
}

unsafe fn read_str<'a>(p: *const c_char, name: &str) -> Result<&'a str, (IsacStatus, String)> {
    if p.is_null() {
        return Err(null(name));
    }
    CStr::from_ptr(p)
        .to_str()
        .map_err(|_| (IsacStatus::InvalidUtf8, format!("`{name}` is not UTF-8")))
}

fn amplifier(ibo_db: f64) -> Result<Amplifier, Error> {
    if ibo_db.is_nan() {
        Ok(Amplifier::Linear)
    } else {
        Ok(Amplifier::Sel(PaConfig::unit_drive_db(ibo_db)?))
    }
}

/// Message of the last failure on this thread, or null. Valid until the
/// next failing call on the same thread.
#[no_mangle]
pub extern "C" fn isac_last_error() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ref().map_or(ptr::null(), |c| c.as_ptr()))
}

/// Library version as a static NUL-terminated string.
#[no_mangle]
pub extern "C" fn isac_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr().cast()
}

/// `snr0 / (1 + snr0 / sdr)` for linear inputs.
#[no_mangle]
pub extern "C" fn isac_snr_eff(snr0: f64, sdr: f64) -> f64 {
    snr_eff(snr0, sdr)
}

/// Creates a SEL amplifier at `ibo_db`. `v_sat <= 0` selects the unit-drive
/// operating point (back-off through the saturation level).
///
/// # Safety
/// `out` must be a valid pointer to writable storage for one handle.
#[no_mangle]
pub unsafe extern "C" fn isac_amplifier_new(ibo_db: f64, v_sat: f64, out: *mut *mut IsacAmplifier) -> IsacStatus {
    guard(|| {
        if out.is_null() {
            return Err(null("out"));
        }
        let ibo = 10f64.powf(ibo_db / 10.0);
        let cfg = if v_sat > 0.0 {
            PaConfig::new(v_sat, ibo)
        } else {
            PaConfig::unit_drive(ibo)
        }
        .map_err(lib)?;
        *out = Box::into_raw(Box::new(IsacAmplifier { cfg }));
        Ok(())
    })
}

/// # Safety
/// `h` must come from [`isac_amplifier_new`] and not be used afterwards.
#[no_mangle]
pub unsafe extern "C" fn isac_amplifier_free(h: *mut IsacAmplifier) {
    if !h.is_null() {
        drop(Box::from_raw(h));
    }
}

/// Normalized clipping threshold `Y`, or NaN for a null handle.
///
/// # Safety
/// `h` must be null or a live amplifier handle.
#[no_mangle]
pub unsafe extern "C" fn isac_amplifier_clip_threshold(h: *const IsacAmplifier) -> f64 {
    h.as_ref().map_or(f64::NAN, |a| a.cfg.clip_threshold())
}

/// Applies the amplifier to `len` samples; `input` and `output` may alias.
///
/// # Safety
/// `h` must be live; `input` and `output` must each point to `len` elements.
#[no_mangle]
pub unsafe extern "C" fn isac_amplifier_apply(
    h: *const IsacAmplifier,
    input: *const IsacComplex,
    output: *mut IsacComplex,
    len: usize,
) -> IsacStatus {
    guard(|| {
        let a = h.as_ref().ok_or_else(|| null("h"))?;
        if len == 0 {
            return Ok(());
        }
        if input.is_null() {
            return Err(null("input"));
        }
        if output.is_null() {
            return Err(null("output"));
        }
        for i in 0..len {
            let v = *input.add(i);
            let s = a.cfg.transfer(Complex64::new(v.re, v.im));
            *output.add(i) = IsacComplex { re: s.re, im: s.im };
        }
        Ok(())
    })
}

/// Averages the squared AF of `trials` random blocks.
///
/// `constellation` is e.g. `"psk16"` or `"qam64"`; `basis` is `"ofdm"`,
/// `"sc"` or `"cdma"`; `periodic` selects the cyclic (CP) AF; `k_grid` is
/// the Doppler grid size.
///
/// # Safety
/// String arguments must be NUL-terminated; `out` must be writable.
#[no_mangle]
#[allow(clippy::too_many_arguments)]
pub unsafe extern "C" fn isac_average_af(
    constellation: *const c_char,
    basis: *const c_char,
    n: usize,
    ibo_db: f64,
    periodic: bool,
    k_grid: usize,
    trials: usize,
    seed: u64,
    out: *mut *mut IsacAfSurface,
) -> IsacStatus {
    guard(|| {
        if out.is_null() {
            return Err(null("out"));
        }
        let spec: ConstellationSpec = read_str(constellation, "constellation")?.parse().map_err(lib)?;
        let kind: BasisKind = read_str(basis, "basis")?.parse().map_err(lib)?;
        let b = SignalingBasis::new(kind, n).map_err(lib)?;
        let table = Constellation::new(spec).map_err(lib)?;
        let amp = amplifier(ibo_db).map_err(lib)?;
        let mode = if periodic { AfMode::Periodic } else { AfMode::Aperiodic };
        let surface = average_af(
            move |rng| Ok(amp.apply(&b.synthesize_slice(&table.draw(n, rng).0))),
            trials,
            k_grid,
            mode,
            &SeedStream::new(seed),
        )
        .map_err(lib)?;
        *out = Box::into_raw(Box::new(IsacAfSurface { surface }));
        Ok(())
    })
}

/// # Safety
/// `h` must come from [`isac_average_af`] and not be used afterwards.
#[no_mangle]
pub unsafe extern "C" fn isac_af_free(h: *mut IsacAfSurface) {
    if !h.is_null() {
        drop(Box::from_raw(h));
    }
}

/// Number of delay rows and Doppler columns.
///
/// # Safety
/// `h` must be live; `delays` and `dopplers` must be writable.
#[no_mangle]
pub unsafe extern "C" fn isac_af_dims(h: *const IsacAfSurface, delays: *mut usize, dopplers: *mut usize) -> IsacStatus {
    guard(|| {
        let s = &h.as_ref().ok_or_else(|| null("h"))?.surface;
        if delays.is_null() || dopplers.is_null() {
            return Err(null("delays/dopplers"));
        }
        *delays = s.delays.len();
        *dopplers = s.dopplers.len();
        Ok(())
    })
}

/// Copies the normalized zero-Doppler cut (linear scale) and its delay axis.
/// `lags` may be null.
///
/// # Safety
/// `h` must be live; `values` (and `lags` if non-null) must hold `cap`
/// elements.
#[no_mangle]
pub unsafe extern "C" fn isac_af_zero_doppler_cut(
    h: *const IsacAfSurface,
    values: *mut f64,
    lags: *mut i64,
    cap: usize,
) -> IsacStatus {
    guard(|| {
        let s = &h.as_ref().ok_or_else(|| null("h"))?.surface;
        let cut = s.zero_doppler_cut();
        if cap < cut.values.len() {
            return Err((
                IsacStatus::BufferTooSmall,
                format!("need {} elements, got {cap}", cut.values.len()),
            ));
        }
        if values.is_null() {
            return Err(null("values"));
        }
        ptr::copy_nonoverlapping(cut.values.as_ptr(), values, cut.values.len());
        if !lags.is_null() {
            ptr::copy_nonoverlapping(cut.axis.as_ptr(), lags, cut.axis.len());
        }
        Ok(())
    })
}

/// # Safety
/// `h` must be live and `out` writable.
#[no_mangle]
pub unsafe extern "C" fn isac_af_metrics(h: *const IsacAfSurface, out: *mut IsacSidelobeMetrics) -> IsacStatus {
    guard(|| {
        let s = &h.as_ref().ok_or_else(|| null("h"))?.surface;
        if out.is_null() {
            return Err(null("out"));
        }
        let m = sidelobe_metrics(s).map_err(lib)?;
        *out = IsacSidelobeMetrics {
            isl: m.isl,
            eislr: m.eislr,
            pslr: m.pslr,
            mainlobe: m.mainlobe,
            mean_sidelobe: m.mean_sidelobe,
        };
        Ok(())
    })
}

/// Weak-target detection probability of the two-target scene at each SNR
/// in `snr_db` (an infinite entry gives the noise-free point). The SO-CFAR
/// uses the default geometry calibrated on exponential noise.
///
/// # Safety
/// `constellation` must be NUL-terminated; `snr_db` must hold `len`
/// values; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn isac_pd_curve(
    constellation: *const c_char,
    ibo_db: f64,
    snr_db: *const f64,
    len: usize,
    m: usize,
    trials: usize,
    seed: u64,
    out: *mut *mut IsacPdCurve,
) -> IsacStatus {
    guard(|| {
        if out.is_null() {
            return Err(null("out"));
        }
        if snr_db.is_null() && len > 0 {
            return Err(null("snr_db"));
        }
        let spec: ConstellationSpec = read_str(constellation, "constellation")?.parse().map_err(lib)?;
        let grid = if len == 0 { vec![] } else { std::slice::from_raw_parts(snr_db, len).to_vec() };
        let seed = SeedStream::new(seed);
        let mut s = PdScenario::two_target(spec, m, amplifier(ibo_db).map_err(lib)?).map_err(lib)?;
        s.cfar = calibrate_cfar(&CfarConfig::default(), &NoiseModel::Exponential, 2_000_000, &seed.derive("cfar"))
            .map_err(lib)?;
        let curve = pd_experiment(&s, &grid, trials, &seed.derive("data")).map_err(lib)?;
        *out = Box::into_raw(Box::new(IsacPdCurve { curve }));
        Ok(())
    })
}

/// # Safety
/// `h` must come from [`isac_pd_curve`] and not be used afterwards.
#[no_mangle]
pub unsafe extern "C" fn isac_pd_curve_free(h: *mut IsacPdCurve) {
    if !h.is_null() {
        drop(Box::from_raw(h));
    }
}

/// Number of SNR points, 0 for a null handle.
///
/// # Safety
/// `h` must be null or live.
#[no_mangle]
pub unsafe extern "C" fn isac_pd_curve_len(h: *const IsacPdCurve) -> usize {
    h.as_ref().map_or(0, |c| c.curve.pd.len())
}

/// Copies Pd and the 95% interval half-widths. `ci` may be null.
///
/// # Safety
/// `h` must be live; `pd` (and `ci` if non-null) must hold `cap` elements.
#[no_mangle]
pub unsafe extern "C" fn isac_pd_curve_values(h: *const IsacPdCurve, pd: *mut f64, ci: *mut f64, cap: usize) -> IsacStatus {
    guard(|| {
        let c = &h.as_ref().ok_or_else(|| null("h"))?.curve;
        let n = c.pd.len();
        if cap < n {
            return Err((IsacStatus::BufferTooSmall, format!("need {n} elements, got {cap}")));
        }
        if pd.is_null() {
            return Err(null("pd"));
        }
        ptr::copy_nonoverlapping(c.pd.as_ptr(), pd, n);
        if !ci.is_null() {
            ptr::copy_nonoverlapping(c.ci_halfwidth.as_ptr(), ci, n);
        }
        Ok(())
    })
}

/// Runs a registered scenario. `config_json` may be null for defaults;
/// `seed` 0 keeps the config or default seed; `workers` 0 uses all cores.
/// On success `*manifest_json` receives the run manifest, to be released
/// with [`isac_string_free`].
///
/// # Safety
/// String arguments must be NUL-terminated or null where allowed;
/// `manifest_json` must be writable.
#[no_mangle]
pub unsafe extern "C" fn isac_run_scenario(
    name: *const c_char,
    config_json: *const c_char,
    out_dir: *const c_char,
    seed: u64,
    workers: usize,
    manifest_json: *mut *mut c_char,
) -> IsacStatus {
    guard(|| {
        if manifest_json.is_null() {
            return Err(null("manifest_json"));
        }
        let name = read_str(name, "name")?;
        let user = if config_json.is_null() {
            ExperimentConfig::default()
        } else {
            ExperimentConfig::from_json(read_str(config_json, "config_json")?).map_err(lib)?
        };
        let opts = RunOptions {
            seed: (seed != 0).then_some(seed),
            trials: None,
            out_dir: if out_dir.is_null() {
                None
            } else {
                Some(PathBuf::from(read_str(out_dir, "out_dir")?))
            },
            workers: (workers != 0).then_some(workers),
            plots: false,
        };
        let m = run_scenario(name, &user, &opts).map_err(lib)?;
        let json = serde_json::to_string(&m).map_err(|e| lib(e.into()))?;
        *manifest_json = CString::new(json).map_err(|e| (IsacStatus::Io, e.to_string()))?.into_raw();
        Ok(())
    })
}

/// # Safety
/// `s` must be null or a string returned by this library, freed once.
#[no_mangle]
pub unsafe extern "C" fn isac_string_free(s: *mut c_char) {
    if !s.is_null() {
        drop(CString::from_raw(s));
    }
}
