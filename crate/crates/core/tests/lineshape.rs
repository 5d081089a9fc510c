use proptest::prelude::*;
use rydeit_core::*;

fn single_path() -> Config {
    let mut cfg = Config::default();
    cfg.levels.intermediate_weights = vec![0.0, 0.0, 1.0];
    cfg
}

/// Direct trapezoid integral of the two-level Voigt absorption, written out
/// without the crate's kernel or quadrature.
fn voigt_transmission(model: &EitModel, delta_p: f64) -> f64 {
    let u = model.thermal_velocity();
    let kp = std::f64::consts::TAU / model.fields.lambda_p * 1e-6;
    let g2 = model.scheme.gamma2();
    let sigma = 3.0 * model.fields.lambda_p.powi(2) / (4.0 * std::f64::consts::PI);
    let steps = 200_000;
    let (lo, hi) = (-9.0 * u, 9.0 * u);
    let dv = (hi - lo) / steps as f64;
    let mut alpha = 0.0;
    for i in 0..=steps {
        let v = lo + i as f64 * dv;
        let g = (-0.5 * (v / u).powi(2)).exp() / (u * std::f64::consts::TAU.sqrt());
        let w = if i == 0 || i == steps { 0.5 } else { 1.0 };
        for c in model.scheme.intermediate() {
            let d = delta_p - c.offset - kp * v;
            alpha += w * dv * g * c.weight * g2 * g2 / (g2 * g2 + d * d);
        }
    }
    (-sigma * model.cell.number_density * alpha * model.cell.length).exp()
}

#[test]
fn no_coupling_matches_voigt_oracle() {
    let model = Config::default().model(45, 0.0, None).unwrap();
    let axis: Vec<f64> = linspace(-900.0, 700.0, 33).into_iter().map(mhz).collect();
    let s = spectrum_probe_scan(&model, &axis).unwrap();
    for (x, t) in axis.iter().zip(s.values()) {
        let want = voigt_transmission(&model, *x);
        assert!((t - want).abs() < 1e-7, "{} MHz: {t} vs {want}", to_mhz(*x));
    }
}

#[test]
fn no_coupling_width_is_doppler() {
    let model = single_path().model(45, 0.0, None).unwrap();
    let axis: Vec<f64> = linspace(-1500.0, 1500.0, 3001).into_iter().map(mhz).collect();
    let s = spectrum_probe_scan(&model, &axis).unwrap();
    let alpha: Vec<f64> = s.values().iter().map(|t| -t.ln()).collect();
    let top = alpha.iter().cloned().fold(0.0, f64::max);
    let above: Vec<f64> = axis
        .iter()
        .zip(&alpha)
        .filter(|(_, a)| **a >= 0.5 * top)
        .map(|(x, _)| to_mhz(*x))
        .collect();
    let fwhm = above.last().unwrap() - above.first().unwrap();
    let doppler = 2.0 * (2.0 * 2f64.ln()).sqrt() * model.thermal_velocity() / model.fields.lambda_p * 1e-6;
    assert!((fwhm / doppler - 1.0).abs() < 0.02, "{fwhm} vs {doppler}");
}

#[test]
fn coupling_scan_lines_sit_at_two_photon_resonance() {
    let cfg = single_path();
    for dp in [0.0, 10.0, -25.0] {
        let mut model = cfg.model(45, 3.5, None).unwrap();
        model.fields.delta_p = mhz(dp);
        let ratio = model.fields.lambda_p / model.fields.lambda_c;
        let fs = to_mhz(model.scheme.fs_splitting());
        for centre in [0.0, fs] {
            let want = centre - ratio * dp;
            let axis: Vec<f64> = linspace(want - 3.0, want + 3.0, 601).into_iter().map(mhz).collect();
            let s = delta_t_spectrum(&model, ScanAxis::CouplingDetuning, &axis).unwrap();
            let peaks = find_peaks(&s, 0.5 * s.max_abs_value());
            assert_eq!(peaks.len(), 1, "dp {dp}, centre {centre}");
            assert!((to_mhz(peaks[0].position) - want).abs() < 0.02, "dp {dp}: {:?} vs {want}", peaks[0]);
        }
    }
}

#[test]
fn peak_grows_with_coupling_strength() {
    let cfg = Config::default();
    let mut last = -1.0;
    for i in 0..=20 {
        let model = cfg.model(45, 0.1 * i as f64, None).unwrap();
        let ev = Evaluator::new(&model).unwrap();
        let on = ev.transmission(0.0, 0.0);
        let off = ev.transmission(0.0, model.reference_offset);
        let v = on - off;
        assert!(v >= last - 1e-12, "omega_c {}: {v} < {last}", 0.1 * i as f64);
        last = v;
    }
    assert!(last > 0.0);
}

#[test]
fn spectrum_is_independent_of_thread_count() {
    let model = Config::default().model(45, 3.5, None).unwrap();
    let axis: Vec<f64> = linspace(-100.0, 100.0, 400).into_iter().map(mhz).collect();
    let run = |threads| {
        rayon::ThreadPoolBuilder::new()
            .num_threads(threads)
            .build()
            .unwrap()
            .install(|| delta_t_spectrum(&model, ScanAxis::ProbeDetuning, &axis).unwrap())
    };
    let one = run(1);
    let four = run(4);
    assert_eq!(one.values(), four.values());
    assert_eq!(one.fingerprint(), four.fingerprint());
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn delta_t_bounded_below_by_reference(
        omega in 0.0f64..10.0,
        gamma3 in 0.05f64..3.0,
        dc in -50.0f64..50.0,
        dp in -200.0f64..200.0,
    ) {
        let cfg = Config { gamma3_mhz: gamma3, ..Config::default() };
        let mut model = cfg.model(45, omega, None).unwrap();
        model.fields.delta_c = mhz(dc);
        let axis = vec![mhz(dp), mhz(dp + 1.0)];
        let ev = Evaluator::new(&model).unwrap();
        let on = ev.scan(ScanAxis::ProbeDetuning, &axis, false).unwrap();
        let reference = ev.scan(ScanAxis::ProbeDetuning, &axis, true).unwrap();
        let dt = delta_t_spectrum(&model, ScanAxis::ProbeDetuning, &axis).unwrap();
        for i in 0..2 {
            prop_assert!(on.values()[i] >= 0.0 && on.values()[i] <= 1.0);
            prop_assert!(dt.values()[i] >= -reference.values()[i] - 1e-15);
        }
    }
}
