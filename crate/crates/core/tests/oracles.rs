use std::f64::consts::{FRAC_PI_3, PI};

use squint_core::beamform::{optimal_delays, td1_geometric_delays, td2_center_delays, td_generic_weights, Beamformer, BeamformerKind};
use squint_core::experiments::sweep::half_wave_geometry;
use squint_core::experiments::{Preset, ScenarioConfig};
use squint_core::linalg::dot_h;
use squint_core::metrics::{avg_snr_corollary1, avg_snr_theorem1, snr_instantaneous, BandSpec, WeakScalars};
use squint_core::scalar::principal_arg;
use squint_core::{ArrayModel, Complex64, MutualImpedanceModel};

fn tight() -> (ScenarioConfig, ArrayModel<f64>) {
    let cfg = ScenarioConfig::preset(Preset::Fig2);
    let model = cfg.model();
    (cfg, model)
}

// Matched filter h^H R_n^{-1} h is the unconstrained SNR ceiling.
#[test]
fn matched_filter_bounds_every_beamformer() {
    let (cfg, model) = tight();
    let kinds = [BeamformerKind::Pop, BeamformerKind::TdI, BeamformerKind::TdII, BeamformerKind::TdOpt];
    let designed: Vec<_> = kinds.iter().map(|&k| Beamformer::design(k, &model, cfg.band.center).unwrap()).collect();
    for i in 0..=24 {
        let f = 4e9 + 0.5e9 * i as f64;
        let r = model.response(f).unwrap();
        let whitened = r.noise.solve(&r.state.channel).unwrap();
        let ceiling = dot_h(&r.state.channel, &whitened).re;
        for b in &designed {
            let snr = snr_instantaneous(&b.weights(&r).unwrap(), &r.state, &r.noise, 1.0).unwrap().snr;
            assert!(snr <= ceiling * (1.0 + 1e-12), "{:?} at {f}: {snr} > {ceiling}", b.kind());
        }
    }
}

#[test]
fn optimal_delays_round_trip_to_whitened_phases() {
    let (_, model) = tight();
    for f in [4.5e9, 10e9, 15.5e9] {
        let r = model.response(f).unwrap();
        let x = r.noise.solve(r.state.distorted_steering()).unwrap();
        let w = td_generic_weights(&optimal_delays(f, &r.state, &r.noise).unwrap(), f);
        for (wk, xk) in w.weights.iter().zip(&x) {
            let expected = principal_arg(xk * x[0].conj());
            let diff = principal_arg(Complex64::from_polar(1.0, wk.arg() - expected));
            assert!(diff.abs() < 1e-12, "phase mismatch {diff}");
        }
    }
}

#[test]
fn center_delays_are_optimal_delays_at_center() {
    let (cfg, model) = tight();
    let r = model.response(cfg.band.center).unwrap();
    assert_eq!(
        td2_center_delays(cfg.band.center, &r.state, &r.noise).unwrap(),
        optimal_delays(cfg.band.center, &r.state, &r.noise).unwrap()
    );
}

// Without mutual impedance the center-frequency delays only differ from the
// geometric ones by whole periods of f_c.
#[test]
fn zero_coupling_center_delays_match_geometry_modulo_period() {
    let (cfg, mut model) = tight();
    if let ArrayModel::Circuit(c) = &mut model {
        c.impedance.mutual = MutualImpedanceModel::Zero;
    }
    let fc = cfg.band.center;
    let r = model.response(fc).unwrap();
    let td2 = td2_center_delays(fc, &r.state, &r.noise).unwrap();
    let td1 = td1_geometric_delays(cfg.link.aoa, &cfg.geometry);
    for (a, b) in td2.iter().zip(&td1) {
        let periods = (a - b) * fc;
        assert!((periods - periods.round()).abs() < 1e-9, "{a} vs {b}");
    }
}

#[test]
fn zero_coupling_pop_matches_conv_everywhere() {
    let (cfg, mut model) = tight();
    if let ArrayModel::Circuit(c) = &mut model {
        c.impedance.mutual = MutualImpedanceModel::Zero;
    }
    let pop = Beamformer::design(BeamformerKind::Pop, &model, cfg.band.center).unwrap();
    let conv = Beamformer::design(BeamformerKind::Conv, &model, cfg.band.center).unwrap();
    for i in 0..=12 {
        let r = model.response(4e9 + 1e9 * i as f64).unwrap();
        let a = snr_instantaneous(&pop.weights(&r).unwrap(), &r.state, &r.noise, 1.0).unwrap().snr;
        let b = snr_instantaneous(&conv.weights(&r).unwrap(), &r.state, &r.noise, 1.0).unwrap().snr;
        assert!((a - b).abs() <= 1e-12 * b, "{a} vs {b}");
    }
}

// The small-band form is the second-order expansion of the closed form.
#[test]
fn corollary_curvature_matches_closed_form() {
    let n = 16;
    let fc = 10e9;
    let g = half_wave_geometry(n, fc).unwrap();
    let unity = WeakScalars::unity();
    let avg = |bw: f64| avg_snr_theorem1(&BandSpec::new(fc, bw, 1.0).unwrap(), FRAC_PI_3, &g, &unity);
    let h = 2e7;
    let exact_curv = (avg(2.0 * h) - 2.0 * avg(h) + avg(1e-3)) / (h * h);
    let approx_curv = (avg_snr_corollary1(2.0 * h, 1.0, FRAC_PI_3, &g, &unity) - 2.0 * avg_snr_corollary1(h, 1.0, FRAC_PI_3, &g, &unity)
        + avg_snr_corollary1(1e-3, 1.0, FRAC_PI_3, &g, &unity))
        / (h * h);
    assert!((exact_curv - approx_curv).abs() < 1e-3 * approx_curv.abs(), "{exact_curv} vs {approx_curv}");
    let delta = g.spacing();
    let analytic = -2.0 * n as f64 / 36.0 * (PI * delta * FRAC_PI_3.sin() / squint_core::SPEED_OF_LIGHT).powi(2) * (n * n - 1) as f64;
    assert!((approx_curv - analytic).abs() < 1e-6 * analytic.abs());
}

// Closed-form band average against a brute-force midpoint average of |Σ e^{jkθ}|²/N.
#[test]
fn closed_form_average_matches_midpoint_sum() {
    let n = 8;
    let fc = 28e9;
    let g = half_wave_geometry(n, fc).unwrap();
    let bw = 4e9;
    let aoa = 0.7;
    let closed = avg_snr_theorem1(&BandSpec::new(fc, bw, 1.0).unwrap(), aoa, &g, &WeakScalars::unity());
    let m = 200_000;
    let mut acc = 0.0;
    for i in 0..m {
        let f = fc - bw / 2.0 + bw * (i as f64 + 0.5) / m as f64;
        let theta = 2.0 * PI * g.spacing() / squint_core::SPEED_OF_LIGHT * (f - fc) * aoa.sin();
        let s: Complex64 = (0..n).map(|k| Complex64::from_polar(1.0, k as f64 * theta)).sum();
        acc += s.norm_sqr() / n as f64;
    }
    let brute = acc / m as f64;
    assert!((closed - brute).abs() < 1e-8 * closed, "{closed} vs {brute}");
}
