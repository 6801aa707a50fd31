use approx::assert_relative_eq;
use isac_pa::pa::{
    estimate_bussgang, gaussian_bussgang_gain, gaussian_distortion_ratio, snr_eff, Amplifier, PaConfig,
};
use isac_pa::seed::SeedStream;
use isac_pa::signaling::{ConstellationSpec, SignalingBasis};
use isac_pa::Complex64;
use proptest::prelude::*;

#[test]
fn unit_drive_threshold_is_one_at_one_db() {
    let c = PaConfig::unit_drive_db(1.0).unwrap();
    assert_relative_eq!(c.clip_threshold(), 1.0, epsilon = 1e-12);
    assert_relative_eq!(c.alpha(), 1.0, epsilon = 1e-12);
}

#[test]
fn gaussian_gain_reference_value() {
    // Independent closed form: kappa = 1 - e^{-Y^2} + (sqrt(pi)/2) Y erfc(Y).
    // At Y = 1, erfc(1) = 0.157299207050285.
    let expect = 1.0 - (-1.0f64).exp() + 0.5 * std::f64::consts::PI.sqrt() * 0.157_299_207_050_285;
    assert_relative_eq!(gaussian_bussgang_gain(1.0), expect, epsilon = 1e-12);
    assert_relative_eq!(gaussian_bussgang_gain(1.0), 0.7715, epsilon = 1e-4);
    assert!(gaussian_distortion_ratio(1.0) > 0.0);
}

#[test]
fn bussgang_gain_of_large_ofdm_blocks_is_near_gaussian() {
    let cfg = PaConfig::unit_drive_db(1.0).unwrap();
    let basis = SignalingBasis::ofdm(256).unwrap();
    let st = estimate_bussgang(&cfg, &basis, ConstellationSpec::qam(16).unwrap(), 2000, &SeedStream::new(4)).unwrap();
    assert!((st.kappa.re - gaussian_bussgang_gain(1.0)).abs() < 0.01, "{:?}", st.kappa);
    assert!(st.kappa.im.abs() < 1e-3);
    assert!((st.signal_power - 1.0).abs() < 0.01);
    assert!(st.sdr > 1.0 && st.sdr.is_finite());
}

#[test]
fn linear_amplifier_has_no_distortion() {
    let x: Vec<Complex64> = (0..8).map(|i| Complex64::new(i as f64, -1.0)).collect();
    assert_eq!(Amplifier::Linear.apply(&x), x);
}

#[test]
fn rejects_bad_back_off() {
    assert!(PaConfig::unit_drive(0.0).is_err());
    assert!(PaConfig::unit_drive(f64::NAN).is_err());
    assert!(PaConfig::new(-1.0, 1.0).is_err());
}

proptest! {
    #[test]
    fn output_never_exceeds_saturation(ibo_db in -5.0f64..15.0, re in -10.0f64..10.0, im in -10.0f64..10.0) {
        let c = PaConfig::unit_drive_db(ibo_db).unwrap();
        let x = Complex64::new(re, im);
        let y = c.transfer(x);
        prop_assert!(y.norm() <= c.v_sat() * (1.0 + 1e-12));
        if x.norm() > 1e-9 {
            let u = c.gain() * c.alpha() * x;
            // Phase of the drive signal is preserved.
            prop_assert!((y * u.conj()).im.abs() <= 1e-9 * y.norm() * u.norm());
            prop_assert!((y * u.conj()).re >= 0.0);
            if u.norm() <= c.v_sat() {
                prop_assert!((y - u).norm() < 1e-12);
            }
        }
    }

    #[test]
    fn amplification_is_idempotent_at_unit_gain(ibo_db in -5.0f64..15.0, re in -10.0f64..10.0, im in -10.0f64..10.0) {
        let c = PaConfig::unit_drive_db(ibo_db).unwrap();
        let once = c.transfer(Complex64::new(re, im));
        prop_assert!((c.transfer(once) - once).norm() < 1e-12);
    }

    #[test]
    fn snr_eff_is_bounded(snr0 in 1e-3f64..1e6, sdr in 1e-3f64..1e6) {
        let v = snr_eff(snr0, sdr);
        prop_assert!(v <= snr0.min(sdr) * (1.0 + 1e-12));
        prop_assert!(v >= 0.5 * snr0.min(sdr) * (1.0 - 1e-12));
    }
}
