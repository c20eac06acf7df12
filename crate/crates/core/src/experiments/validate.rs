//! Self-checks run by `squint validate`.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;

use crate::beamform::{Beamformer, BeamformerKind};
use crate::channel::steering_vector;
use crate::error::Result;
use crate::experiments::config::{ScenarioConfig, SweepKind};
use crate::experiments::sweep::{half_wave_geometry, tc_pop_loss};
use crate::impedance::{array_impedance_matrix, MutualImpedanceModel};
use crate::linalg::hermitian_eigenvalues;
use crate::metrics::{
    avg_snr_corollary1, avg_snr_numeric, avg_snr_theorem1_with, snr_conv_wc_closed, snr_instantaneous, snr_ttd_wc,
    squint_loss, BandSpec, SincConvention, WeakScalars,
};
use crate::system::{ArrayModel, CircuitModel};

/// Array sizes exercised by the closed-form average check.
pub const THEOREM_SIZES: [usize; 6] = [1, 2, 3, 5, 8, 32];

pub const THEOREM_RTOL: f64 = 1e-8;
pub const COROLLARY_RTOL: f64 = 0.01;
pub const PSI_RTOL: f64 = 1e-12;
pub const MODULUS_TOL: f64 = 1e-12;
pub const BASELINE_RTOL: f64 = 1e-9;
pub const DOMINANCE_POINTS: usize = 1024;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ValidateOptions {
    pub sinc: SincConvention,
    pub seed: u64,
    /// Random draws per array size for the closed-form average check.
    pub draws: usize,
    /// Frequencies sampled for the per-frequency structural checks.
    pub sample_points: usize,
}

impl Default for ValidateOptions {
    fn default() -> Self {
        Self {
            sinc: SincConvention::Unnormalized,
            seed: 0x5157_1a7e,
            draws: 20,
            sample_points: 25,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Check {
    pub name: String,
    pub passed: bool,
    pub measured: f64,
    pub tolerance: f64,
    pub detail: String,
}

impl Check {
    fn at_most(name: &str, measured: f64, tolerance: f64, detail: impl Into<String>) -> Self {
        Self {
            name: name.to_string(),
            passed: measured <= tolerance,
            measured,
            tolerance,
            detail: detail.into(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ValidationReport {
    pub config_hash: String,
    pub passed: bool,
    pub checks: Vec<Check>,
}

impl ValidationReport {
    pub fn check(&self, name: &str) -> Option<&Check> {
        self.checks.iter().find(|c| c.name == name)
    }

    pub fn failures(&self) -> impl Iterator<Item = &Check> {
        self.checks.iter().filter(|c| !c.passed)
    }
}

fn rel(a: f64, b: f64) -> f64 {
    let scale = a.abs().max(b.abs());
    if scale == 0.0 {
        0.0
    } else {
        (a - b).abs() / scale
    }
}

/// The sweep grid for frequency sweeps, otherwise a dense grid over the band.
fn dominance_grid(cfg: &ScenarioConfig) -> Vec<f64> {
    if cfg.sweep.kind == SweepKind::Frequency {
        cfg.sweep.grid()
    } else {
        sample_freqs(cfg, DOMINANCE_POINTS)
    }
}

/// Frequencies spread over the configured band.
fn sample_freqs(cfg: &ScenarioConfig, points: usize) -> Vec<f64> {
    let (lo, hi) = (cfg.band.lower(), cfg.band.upper());
    let points = points.max(2);
    (0..points).map(|i| lo + (hi - lo) * i as f64 / (points - 1) as f64).collect()
}

fn designable() -> Vec<BeamformerKind> {
    BeamformerKind::ALL
        .iter()
        .copied()
        .filter(|&k| k != BeamformerKind::TdGeneric)
        .collect()
}

/// Beamformers the optimal-delay baseline is claimed to dominate.
fn dominated(cfg: &ScenarioConfig, kind: BeamformerKind) -> bool {
    match kind {
        BeamformerKind::TdOpt | BeamformerKind::TdGeneric => false,
        // Weakly coupled reference weights ignore the circuit.
        BeamformerKind::Conv | BeamformerKind::TtdWc => !cfg.coupling_mode.is_circuit(),
        _ => true,
    }
}

/// Largest relative gap between the closed-form band average and quadrature.
pub fn theorem_vs_numeric(cfg: &ScenarioConfig, opts: &ValidateOptions) -> Result<f64> {
    let mut rng = ChaCha8Rng::seed_from_u64(opts.seed);
    let center = cfg.band.center;
    let unity = WeakScalars::unity();
    let mut worst: f64 = 0.0;
    for &n in &THEOREM_SIZES {
        let g = half_wave_geometry(n, center)?;
        for _ in 0..opts.draws {
            let bw = 10f64.powf(rng.gen_range(7.0..(2.0 * center).log10()));
            let aoa = rng.gen_range(-std::f64::consts::FRAC_PI_2..=std::f64::consts::FRAC_PI_2);
            let band = BandSpec::new(center, bw, 1.0)?;
            let closed = avg_snr_theorem1_with(&band, aoa, &g, &unity, opts.sinc);
            let numeric = avg_snr_numeric(|f| Ok(snr_conv_wc_closed(f, &band, aoa, &g, &unity)), &band, &cfg.quadrature)?;
            worst = worst.max(rel(closed, numeric));
        }
    }
    Ok(worst)
}

/// `(worst error for Δf ≤ 0.02 f_c, worst error for 0.02 f_c < Δf ≤ 0.2 f_c)`.
pub fn corollary_window(n: usize, center: f64, aoa: f64, opts: &ValidateOptions) -> Result<(f64, f64)> {
    let g = half_wave_geometry(n, center)?;
    let unity = WeakScalars::unity();
    let mut inside: f64 = 0.0;
    let mut outside: f64 = 0.0;
    let points = 200;
    for i in 1..=points {
        let bw = 0.2 * center * i as f64 / points as f64;
        let band = BandSpec::new(center, bw, 1.0)?;
        let exact = avg_snr_theorem1_with(&band, aoa, &g, &unity, opts.sinc);
        let approx = avg_snr_corollary1(bw, 1.0, aoa, &g, &unity);
        let err = (approx - exact).abs() / exact.abs();
        if bw <= 0.02 * center * (1.0 + 1e-12) {
            inside = inside.max(err);
        } else {
            outside = outside.max(err);
        }
    }
    Ok((inside, outside))
}

fn steering_defect(cfg: &ScenarioConfig, freqs: &[f64]) -> f64 {
    let mut worst: f64 = 0.0;
    for &f in freqs {
        for i in 0..=8 {
            let aoa = -std::f64::consts::FRAC_PI_2 + std::f64::consts::PI * i as f64 / 8.0;
            for a in steering_vector(f, aoa, &cfg.geometry) {
                worst = worst.max((a.norm() - 1.0).abs());
            }
        }
    }
    worst
}

fn circuit(cfg: &ScenarioConfig) -> Option<CircuitModel<f64>> {
    match cfg.model() {
        ArrayModel::Circuit(c) => Some(c),
        ArrayModel::WeakUnity { .. } => None,
    }
}

fn snr_of(model: &ArrayModel<f64>, b: &Beamformer<f64>, f: f64, power: f64) -> Result<f64> {
    let r = model.response(f)?;
    Ok(snr_instantaneous(&b.weights(&r)?, &r.state, &r.noise, power)?.snr)
}

fn design_all(model: &ArrayModel<f64>, kinds: &[BeamformerKind], fc: f64) -> Result<Vec<Beamformer<f64>>> {
    kinds.iter().map(|&k| Beamformer::design(k, model, fc)).collect()
}

fn circuit_checks(cfg: &ScenarioConfig, c: &CircuitModel<f64>, freqs: &[f64], checks: &mut Vec<Check>) -> Result<()> {
    let mut toeplitz: f64 = 0.0;
    let mut re_psd: f64 = 0.0;
    let mut rn_hermitian: f64 = 0.0;
    let mut rn_psd: f64 = 0.0;
    for &f in freqs {
        let z = array_impedance_matrix(&c.geometry, &c.impedance, f)?.z_matrix;
        let n = z.rows();
        for i in 0..n {
            for j in 0..n {
                toeplitz = toeplitz.max((z[(i, j)] - z[(j, i)]).norm());
                if i > 0 && j > 0 {
                    toeplitz = toeplitz.max((z[(i, j)] - z[(i - 1, j - 1)]).norm());
                }
            }
        }
        let re = z.real_part();
        let scale = re.max_abs().max(f64::MIN_POSITIVE);
        re_psd = re_psd.max(-hermitian_eigenvalues(&re)[0] / scale);
        let (_, resp) = c.evaluate(f)?;
        let m = resp.noise.matrix();
        let scale = m.trace().re / n as f64;
        rn_hermitian = rn_hermitian.max(m.hermitian_defect() / scale);
        rn_psd = rn_psd.max(-hermitian_eigenvalues(m)[0] / scale);
    }
    checks.push(Check::at_most("impedance_symmetric_toeplitz", toeplitz, 0.0, "max |Z_ij - Z_ji|, |Z_ij - Z_(i-1)(j-1)|"));
    checks.push(Check::at_most("impedance_real_psd", re_psd.max(0.0), 1e-9, "-λ_min(Re Z) / max|Re Z|"));
    checks.push(Check::at_most("noise_hermitian", rn_hermitian, 1e-10, "max |R - R^H| / (tr R / N)"));
    checks.push(Check::at_most("noise_psd", rn_psd.max(0.0), 1e-9, "-λ_min(R_n) / (tr R_n / N)"));

    // Zero mutual impedance: P and R_n diagonal with equal entries, POP equals CONV.
    let mut zc = *c;
    zc.impedance.mutual = MutualImpedanceModel::Zero;
    let zmodel = ArrayModel::Circuit(zc);
    let fc = cfg.band.center;
    let pop = Beamformer::design(BeamformerKind::Pop, &zmodel, fc)?;
    let conv = Beamformer::design(BeamformerKind::Conv, &zmodel, fc)?;
    let mut offdiag: f64 = 0.0;
    let mut pop_conv: f64 = 0.0;
    for &f in freqs {
        let r = zmodel.response(f)?;
        let n = r.state.n_elements();
        let p = &r.state.coupling;
        let rn = r.noise.matrix();
        for i in 0..n {
            for j in 0..n {
                if i != j {
                    offdiag = offdiag.max(p[(i, j)].norm() / p[(0, 0)].norm());
                    offdiag = offdiag.max(rn[(i, j)].norm() / rn[(0, 0)].norm());
                } else {
                    offdiag = offdiag.max((p[(i, i)] - p[(0, 0)]).norm() / p[(0, 0)].norm());
                    offdiag = offdiag.max((rn[(i, i)] - rn[(0, 0)]).norm() / rn[(0, 0)].norm());
                }
            }
        }
        let power = cfg.band.power_per_tone;
        let a = snr_instantaneous(&pop.weights(&r)?, &r.state, &r.noise, power)?.snr;
        let b = snr_instantaneous(&conv.weights(&r)?, &r.state, &r.noise, power)?.snr;
        pop_conv = pop_conv.max(rel(a, b));
    }
    checks.push(Check::at_most("zero_coupling_diagonal", offdiag, 1e-12, "P and R_n reduce to scaled identities"));
    checks.push(Check::at_most("zero_coupling_pop_equals_conv", pop_conv, PSI_RTOL, "relative SNR gap"));

    // Scaling the thermal noise power scales every SNR alike.
    let bw = (0.1 * fc).min(cfg.band.width);
    let band = cfg.band.with_width(bw);
    let model = cfg.model();
    let pop = Beamformer::design(BeamformerKind::Pop, &model, fc)?;
    let base = tc_pop_loss(&model, &pop, &band, &cfg.quadrature)?;
    let mut hot = *c;
    hot.noise.temperature *= 7.0;
    let hot = ArrayModel::Circuit(hot);
    let hot_pop = Beamformer::design(BeamformerKind::Pop, &hot, fc)?;
    let scaled = tc_pop_loss(&hot, &hot_pop, &band, &cfg.quadrature)?;
    checks.push(Check::at_most(
        "loss_scale_invariance",
        (base - scaled).abs() / base.abs().max(1.0),
        1e-9,
        format!("POP loss {base:.6}% at Δf = {bw:e} Hz under 7x noise temperature"),
    ));
    Ok(())
}

/// Runs every applicable check against `cfg`.
pub fn validate(cfg: &ScenarioConfig, opts: &ValidateOptions) -> Result<ValidationReport> {
    let mut checks = Vec::new();
    let fc = cfg.band.center;

    let theorem = theorem_vs_numeric(cfg, opts)?;
    checks.push(Check::at_most(
        "theorem1_vs_numeric",
        theorem,
        THEOREM_RTOL,
        format!("N in {THEOREM_SIZES:?}, {} draws each", opts.draws),
    ));

    let (inside, outside) = corollary_window(32, fc, std::f64::consts::FRAC_PI_3, opts)?;
    checks.push(Check {
        name: "corollary1_window".to_string(),
        passed: inside < COROLLARY_RTOL && outside > COROLLARY_RTOL,
        measured: inside,
        tolerance: COROLLARY_RTOL,
        detail: format!("worst error {inside:.3e} for Δf <= 0.02 f_c, {outside:.3e} beyond"),
    });

    let n = cfg.geometry.n_elements();
    let g = half_wave_geometry(n, fc)?;
    let unity = WeakScalars::unity();
    let peak = snr_conv_wc_closed(fc, &cfg.band, 0.3, &g, &unity).snr;
    checks.push(Check::at_most(
        "conv_peak_equals_n",
        (peak - n as f64).abs(),
        1e-12 * n as f64,
        "weakly coupled CONV SNR at f_c",
    ));

    let freqs = sample_freqs(cfg, opts.sample_points);
    checks.push(Check::at_most("steering_unit_modulus", steering_defect(cfg, &freqs), MODULUS_TOL, "max ||a_k| - 1|"));

    if let Some(c) = circuit(cfg) {
        circuit_checks(cfg, &c, &freqs, &mut checks)?;
    } else {
        let bw = cfg.band.width;
        let scalars = WeakScalars {
            gamma: num_complex::Complex::new(3.0, -1.0),
            sigma_c2: num_complex::Complex::new(0.5, 0.25),
            sigma_n2: 2.0,
        };
        let loss = |s: &WeakScalars<f64>| -> Result<f64> {
            let band = BandSpec::new(fc, bw, 1.0)?;
            let avg = crate::metrics::avg_snr_theorem1(&band, cfg.link.aoa, &g, s);
            Ok(squint_loss(snr_ttd_wc(s, n, 1.0), avg)?.raw())
        };
        let a = loss(&unity)?;
        let b = loss(&scalars)?;
        checks.push(Check::at_most("loss_scale_invariance", (a - b).abs() / a.abs().max(1.0), 1e-9, "unity vs scaled weak scalars"));
    }

    let kinds = designable();
    let model = cfg.model();
    let designed = design_all(&model, &kinds, fc)?;
    let mut rotated_model = model;
    match &mut rotated_model {
        ArrayModel::Circuit(c) => c.link.psi = 1.23,
        ArrayModel::WeakUnity { .. } => {}
    }
    let rotated = design_all(&rotated_model, &kinds, fc)?;
    let power = cfg.band.power_per_tone;
    let mut psi: f64 = 0.0;
    let mut modulus: f64 = 0.0;
    for &f in &freqs {
        let r = model.response(f)?;
        let rr = rotated_model.response(f)?;
        for (b, br) in designed.iter().zip(&rotated) {
            let w = b.weights(&r)?;
            modulus = modulus.max(w.modulus_defect());
            let s = snr_instantaneous(&w, &r.state, &r.noise, power)?.snr;
            let sr = snr_instantaneous(&br.weights(&rr)?, &rr.state, &rr.noise, power)?.snr;
            psi = psi.max(rel(s, sr));
        }
    }
    if cfg.coupling_mode.is_circuit() {
        checks.push(Check::at_most("psi_invariance", psi, PSI_RTOL, "ψ = 0 vs ψ = 1.23 rad, every beamformer"));
    }
    checks.push(Check::at_most("constant_modulus", modulus, MODULUS_TOL, "max ||w_k| - 1|"));

    // Dominance is scanned on a dense grid: violations can be confined to a narrow band.
    let dense = dominance_grid(cfg);
    let gaps = dense
        .par_iter()
        .map(|&f| {
            let r = model.response(f)?;
            let opt = snr_instantaneous(&Beamformer::TdOpt.weights(&r)?, &r.state, &r.noise, power)?.snr;
            let mut worst = (f64::NEG_INFINITY, BeamformerKind::TdOpt, f);
            for b in designed.iter().filter(|b| dominated(cfg, b.kind())) {
                let s = snr_instantaneous(&b.weights(&r)?, &r.state, &r.noise, power)?.snr;
                let gap = (s - opt) / opt;
                if gap > worst.0 {
                    worst = (gap, b.kind(), f);
                }
            }
            Ok(worst)
        })
        .collect::<Result<Vec<_>>>()?;
    let (above, kind, at) = gaps
        .into_iter()
        .fold((f64::NEG_INFINITY, BeamformerKind::TdOpt, 0.0), |acc, g| if g.0 > acc.0 { g } else { acc });
    checks.push(Check::at_most(
        "baseline_dominance",
        above.max(0.0),
        BASELINE_RTOL,
        format!(
            "largest (SNR - SNR_opt) / SNR_opt = {above:.3e} ({} at {at:e} Hz) over {} frequencies",
            kind.name(),
            dense.len()
        ),
    ));

    let td2 = Beamformer::design(BeamformerKind::TdII, &model, fc)?;
    let gap = rel(snr_of(&model, &td2, fc, power)?, snr_of(&model, &Beamformer::TdOpt, fc, power)?);
    checks.push(Check::at_most("td2_matches_baseline_at_center", gap, BASELINE_RTOL, "relative SNR gap at f_c"));

    let passed = checks.iter().all(|c| c.passed);
    Ok(ValidationReport {
        config_hash: cfg.hash(),
        passed,
        checks,
    })
}
