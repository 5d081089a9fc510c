use rydeit_core::*;

fn model() -> EitModel {
    let mut cfg = Config::default();
    cfg.levels.intermediate_weights = vec![0.0, 0.0, 1.0];
    cfg.model(45, 3.5, None).unwrap()
}

#[test]
fn half_line_moves_further_with_field() {
    let m = model();
    let pols = PolarizabilitySet::illustrative();
    let axis: Vec<f64> = linspace(-260.0, 20.0, 2801).into_iter().map(mhz).collect();
    let mut last = 0.0;
    for mv in [180.0, 320.0, 480.0] {
        let e = mv / 1000.0;
        let s = stark::dc_stark_spectrum(&m, &pols, e, false, &axis).unwrap();
        let want = to_mhz(stark_shift(2000.0, e));
        let peaks = find_peaks(&s, 0.05 * s.max_abs_value());
        let p = peaks
            .iter()
            .min_by(|a, b| (to_mhz(a.position) - want).abs().total_cmp(&(to_mhz(b.position) - want).abs()))
            .unwrap();
        let at = to_mhz(p.position);
        assert!((at - want).abs() < 0.2, "{mv} mV/cm: {at} vs {want}");
        assert!(at < last, "{mv} mV/cm: {at} not beyond {last}");
        last = at;
    }
}

#[test]
fn screened_field_leaves_spectrum_unchanged() {
    let m = model();
    let pols = PolarizabilitySet::illustrative();
    let axis: Vec<f64> = linspace(-20.0, 20.0, 201).into_iter().map(mhz).collect();
    let bare = delta_t_spectrum(&m, ScanAxis::CouplingDetuning, &axis).unwrap();
    let screened = stark::dc_stark_spectrum(&m, &pols, 0.5, true, &axis).unwrap();
    assert_eq!(bare.values(), screened.values());
}

#[test]
fn rf_average_converged_in_phase_samples() {
    let m = model();
    let pols = PolarizabilitySet::illustrative();
    let axis: Vec<f64> = linspace(-40.0, 20.0, 601).into_iter().map(mhz).collect();
    let mut rf = RfField::new(0.1, 50.0);
    let base = rf_averaged_spectrum(&m, &pols, &rf, &axis).unwrap();
    rf.phase_samples *= 2;
    let fine = rf_averaged_spectrum(&m, &pols, &rf, &axis).unwrap();
    let change = base.max_abs_difference(&fine).unwrap() / base.max_abs_value();
    assert!(change < 1e-3, "{change}");
}

#[test]
fn rf_validation() {
    let m = model();
    let pols = PolarizabilitySet::illustrative();
    let axis: Vec<f64> = linspace(-1.0, 1.0, 3).into_iter().map(mhz).collect();
    let mut rf = RfField::new(0.1, 50.0);
    rf.phase_samples = 8;
    assert!(rf_averaged_spectrum(&m, &pols, &rf, &axis).is_err());
    assert!(rf_averaged_spectrum(&m, &pols, &RfField::new(-0.1, 50.0), &axis).is_err());
}
