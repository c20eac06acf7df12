//! Figure runners and generic sweeps.

use std::collections::BTreeMap;
use std::path::Path;

use rayon::prelude::*;
use serde::Serialize;

use crate::beamform::{Beamformer, BeamformerKind};
use crate::error::{Error, Result};
use crate::experiments::config::{ScenarioConfig, SweepKind};
use crate::experiments::csv::write_csv_file;
use crate::impedance::{AntennaElement, ArrayGeometry};
use crate::metrics::{
    avg_snr_corollary1, avg_snr_numeric, avg_snr_numeric_many, avg_snr_theorem1, snr_conv_wc_closed, snr_instantaneous,
    snr_ttd_wc, squint_loss, BandSpec, WeakScalars,
};
use crate::quadrature::{average_over_dyn, QuadratureSpec};
use crate::scalar::SPEED_OF_LIGHT;
use crate::system::ArrayModel;

pub const TOOL_VERSION: &str = env!("CARGO_PKG_VERSION");

/// Angles of arrival swept by the squint-loss figure, rad.
pub const FIG3_AOAS: [f64; 3] = [0.0, std::f64::consts::FRAC_PI_3, std::f64::consts::FRAC_PI_2];

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum ColumnKind {
    Sweep,
    Snr,
    Loss,
    Decibel,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Column {
    pub name: String,
    pub kind: ColumnKind,
}

impl Column {
    fn new(name: impl Into<String>, kind: ColumnKind) -> Self {
        Self { name: name.into(), kind }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SweepMetadata {
    pub figure: String,
    pub config_hash: String,
    pub tool_version: String,
    pub quadrature: String,
    /// Derived scalars such as interpolated 50 % crossings.
    pub summary: BTreeMap<String, f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepResult {
    pub columns: Vec<Column>,
    pub rows: Vec<Vec<f64>>,
    pub metadata: SweepMetadata,
}

impl SweepResult {
    pub fn header(&self) -> Vec<String> {
        self.columns.iter().map(|c| c.name.clone()).collect()
    }

    pub fn column(&self, name: &str) -> Option<Vec<f64>> {
        let idx = self.columns.iter().position(|c| c.name == name)?;
        Some(self.rows.iter().map(|r| r[idx]).collect())
    }

    /// Appends a `<name>_db` column for every SNR column.
    pub fn with_db(&self) -> Self {
        let snr: Vec<usize> = (0..self.columns.len()).filter(|&i| self.columns[i].kind == ColumnKind::Snr).collect();
        let mut columns = self.columns.clone();
        columns.extend(snr.iter().map(|&i| Column::new(format!("{}_db", self.columns[i].name), ColumnKind::Decibel)));
        let rows = self
            .rows
            .iter()
            .map(|r| {
                let mut row = r.clone();
                row.extend(snr.iter().map(|&i| 10.0 * r[i].log10()));
                row
            })
            .collect();
        Self {
            columns,
            rows,
            metadata: self.metadata.clone(),
        }
    }

    pub fn check_finite(&self) -> Result<()> {
        if self.rows.iter().flatten().all(|v| v.is_finite()) {
            Ok(())
        } else {
            Err(Error::NumericalDegeneracy("sweep produced a non-finite cell"))
        }
    }
}

fn metadata(figure: &str, cfg: &ScenarioConfig) -> SweepMetadata {
    let q = &cfg.quadrature;
    SweepMetadata {
        figure: figure.to_string(),
        config_hash: cfg.hash(),
        tool_version: TOOL_VERSION.to_string(),
        quadrature: format!("gauss-legendre order={} rtol={:e} max_level={}", q.order, q.rtol, q.max_level),
        summary: BTreeMap::new(),
    }
}

/// Evaluates `f` on every grid point on the ambient rayon pool; rows come back in grid order.
fn par_rows(grid: &[f64], f: impl Fn(f64) -> Result<Vec<f64>> + Sync) -> Result<Vec<Vec<f64>>> {
    grid.par_iter()
        .map(|&x| {
            let mut row = vec![x];
            row.extend(f(x)?);
            Ok(row)
        })
        .collect()
}

fn require(cfg: &ScenarioConfig, figure: &str, circuit: bool, kind: SweepKind) -> Result<()> {
    if cfg.coupling_mode.is_circuit() != circuit {
        let want = if circuit { "tight-default or custom" } else { "weak-unity" };
        return Err(Error::Config(format!("{figure} needs coupling_mode {want}")));
    }
    if cfg.sweep.kind != kind {
        return Err(Error::Config(format!("{figure} needs sweep.kind = {kind:?}").to_lowercase()));
    }
    Ok(())
}

/// Half-wavelength weakly coupled counterpart of `geometry` at `center`.
pub fn half_wave_geometry(n: usize, center: f64) -> Result<ArrayGeometry<f64>> {
    let spacing = SPEED_OF_LIGHT / center / 2.0;
    ArrayGeometry::new(n, spacing, AntennaElement::new(spacing / 10.0)?)
}

/// Instantaneous SNR across frequency for a weakly coupled array: closed form,
/// vector expression, and the true-time-delay reference.
pub fn run_fig1a(cfg: &ScenarioConfig) -> Result<SweepResult> {
    require(cfg, "fig1a", false, SweepKind::Frequency)?;
    let model = cfg.model();
    let unity = WeakScalars::unity();
    let conv = Beamformer::design(BeamformerKind::Conv, &model, cfg.band.center)?;
    let n = cfg.geometry.n_elements();
    let rows = par_rows(&cfg.sweep.grid(), |f| {
        let closed = snr_conv_wc_closed(f, &cfg.band, cfg.link.aoa, &cfg.geometry, &unity).snr;
        let r = model.response(f)?;
        let vector = snr_instantaneous(&conv.weights(&r)?, &r.state, &r.noise, cfg.band.power_per_tone)?.snr;
        Ok(vec![closed, vector, snr_ttd_wc(&unity, n, cfg.band.power_per_tone)])
    })?;
    Ok(SweepResult {
        columns: vec![
            Column::new("freq_hz", ColumnKind::Sweep),
            Column::new("conv", ColumnKind::Snr),
            Column::new("conv_vector", ColumnKind::Snr),
            Column::new("ttd", ColumnKind::Snr),
        ],
        rows,
        metadata: metadata("fig1a", cfg),
    })
}

/// Band-averaged SNR of a weakly coupled array: closed form, small-band
/// approximation, and quadrature of the instantaneous closed form.
pub fn run_fig1b(cfg: &ScenarioConfig) -> Result<SweepResult> {
    require(cfg, "fig1b", false, SweepKind::Bandwidth)?;
    let unity = WeakScalars::unity();
    let aoa = cfg.link.aoa;
    let g = &cfg.geometry;
    let rows = par_rows(&cfg.sweep.grid(), |bw| {
        let band = cfg.band.with_width(bw);
        let theorem = avg_snr_theorem1(&band, aoa, g, &unity);
        let corollary = avg_snr_corollary1(bw, band.power_per_tone, aoa, g, &unity);
        let numeric = avg_snr_numeric(|f| Ok(snr_conv_wc_closed(f, &band, aoa, g, &unity)), &band, &cfg.quadrature)?;
        Ok(vec![theorem, corollary, numeric])
    })?;
    Ok(SweepResult {
        columns: vec![
            Column::new("bandwidth_hz", ColumnKind::Sweep),
            Column::new("theorem1", ColumnKind::Snr),
            Column::new("corollary1", ColumnKind::Snr),
            Column::new("numeric", ColumnKind::Snr),
        ],
        rows,
        metadata: metadata("fig1b", cfg),
    })
}

/// Instantaneous SNR of the tightly coupled array under POP, TD-I, TD-II and
/// the per-frequency optimal-delay baseline.
pub fn run_fig2(cfg: &ScenarioConfig) -> Result<SweepResult> {
    require(cfg, "fig2", true, SweepKind::Frequency)?;
    let kinds = [BeamformerKind::Pop, BeamformerKind::TdI, BeamformerKind::TdII, BeamformerKind::TdOpt];
    let model = cfg.model();
    let designed = kinds
        .iter()
        .map(|&k| Beamformer::design(k, &model, cfg.band.center))
        .collect::<Result<Vec<_>>>()?;
    let rows = par_rows(&cfg.sweep.grid(), |f| snr_row(&model, &designed, f, cfg.band.power_per_tone))?;
    let mut columns = vec![Column::new("freq_hz", ColumnKind::Sweep)];
    columns.extend(["pop", "td_i", "td_ii", "td_opt"].map(|n| Column::new(n, ColumnKind::Snr)));
    Ok(SweepResult {
        columns,
        rows,
        metadata: metadata("fig2", cfg),
    })
}

fn snr_row(model: &ArrayModel<f64>, designed: &[Beamformer<f64>], f: f64, power: f64) -> Result<Vec<f64>> {
    let r = model.response(f)?;
    designed
        .iter()
        .map(|b| Ok(snr_instantaneous(&b.weights(&r)?, &r.state, &r.noise, power)?.snr))
        .collect()
}

fn aoa_label(aoa: f64) -> String {
    format!("{}deg", aoa.to_degrees().round() as i64)
}

/// Weakly coupled phase-controlled squint loss (percent) at bandwidth `bw`.
pub fn wc_conv_loss(n: usize, center: f64, aoa: f64, bw: f64) -> Result<f64> {
    let g = half_wave_geometry(n, center)?;
    let unity = WeakScalars::unity();
    let band = BandSpec::new(center, bw, 1.0)?;
    let baseline = snr_ttd_wc(&unity, n, 1.0);
    Ok(squint_loss(baseline, avg_snr_theorem1(&band, aoa, &g, &unity))?.raw())
}

/// Tightly coupled POP squint loss (percent) relative to the optimal-delay baseline.
pub fn tc_pop_loss(
    model: &ArrayModel<f64>,
    pop: &Beamformer<f64>,
    band: &BandSpec<f64>,
    quad: &QuadratureSpec<f64>,
) -> Result<f64> {
    let baseline = Beamformer::TdOpt;
    let [avg_pop, avg_opt] = avg_snr_numeric_many(
        |f| {
            let r = model.response(f)?;
            let p = snr_instantaneous(&pop.weights(&r)?, &r.state, &r.noise, band.power_per_tone)?.snr;
            let o = snr_instantaneous(&baseline.weights(&r)?, &r.state, &r.noise, band.power_per_tone)?.snr;
            Ok([p, o])
        },
        band,
        quad,
    )?;
    Ok(squint_loss(avg_opt, avg_pop)?.raw())
}

fn with_aoa(model: &ArrayModel<f64>, aoa: f64) -> ArrayModel<f64> {
    match *model {
        ArrayModel::WeakUnity { geometry, .. } => ArrayModel::WeakUnity { geometry, aoa },
        ArrayModel::Circuit(mut c) => {
            c.link.aoa = aoa;
            ArrayModel::Circuit(c)
        }
    }
}

/// Squint loss versus bandwidth for weakly coupled CONV and tightly coupled POP
/// at each angle in [`FIG3_AOAS`].
pub fn run_fig3(cfg: &ScenarioConfig) -> Result<SweepResult> {
    require(cfg, "fig3", true, SweepKind::Bandwidth)?;
    let n = cfg.geometry.n_elements();
    let center = cfg.band.center;
    let base = cfg.model();
    let tight: Vec<(ArrayModel<f64>, Beamformer<f64>)> = FIG3_AOAS
        .iter()
        .map(|&aoa| {
            let m = with_aoa(&base, aoa);
            let pop = Beamformer::design(BeamformerKind::Pop, &m, center)?;
            Ok((m, pop))
        })
        .collect::<Result<_>>()?;
    let rows = par_rows(&cfg.sweep.grid(), |bw| {
        let mut row = Vec::with_capacity(2 * FIG3_AOAS.len());
        for &aoa in &FIG3_AOAS {
            row.push(wc_conv_loss(n, center, aoa, bw)?);
        }
        let band = cfg.band.with_width(bw);
        for (m, pop) in &tight {
            row.push(tc_pop_loss(m, pop, &band, &cfg.quadrature)?);
        }
        Ok(row)
    })?;
    let mut columns = vec![Column::new("bandwidth_hz", ColumnKind::Sweep)];
    for prefix in ["wc_conv", "tc_pop"] {
        for &aoa in &FIG3_AOAS {
            columns.push(Column::new(format!("{prefix}_{}", aoa_label(aoa)), ColumnKind::Loss));
        }
    }
    let mut result = SweepResult {
        columns,
        rows,
        metadata: metadata("fig3", cfg),
    };
    let grid: Vec<f64> = result.rows.iter().map(|r| r[0]).collect();
    for c in 1..result.columns.len() {
        let values: Vec<f64> = result.rows.iter().map(|r| r[c]).collect();
        if let Some(x) = interpolated_crossing(&grid, &values, 50.0) {
            result.metadata.summary.insert(format!("{}_half_loss_bandwidth_hz", result.columns[c].name), x);
        }
    }
    Ok(result)
}

/// First upward crossing of `target`, linearly interpolated in `ln(x)`.
pub fn interpolated_crossing(grid: &[f64], values: &[f64], target: f64) -> Option<f64> {
    grid.windows(2).zip(values.windows(2)).find_map(|(x, y)| {
        if y[0] < target && y[1] >= target {
            let t = (target - y[0]) / (y[1] - y[0]);
            Some((x[0].ln() + t * (x[1].ln() - x[0].ln())).exp())
        } else {
            None
        }
    })
}

/// Bisection for the first bandwidth in `[lo, hi]` where `loss` reaches `target`.
///
/// `scan` points bracket the crossing before bisection narrows it to `tol`.
pub fn crossing_bandwidth(
    loss: impl Fn(f64) -> Result<f64>,
    lo: f64,
    hi: f64,
    target: f64,
    scan: usize,
    tol: f64,
) -> Result<Option<f64>> {
    let scan = scan.max(2);
    let mut prev_x = lo;
    if loss(lo)? >= target {
        return Ok(Some(lo));
    }
    for i in 1..scan {
        let x = (lo.ln() + (hi.ln() - lo.ln()) * i as f64 / (scan - 1) as f64).exp();
        let y = loss(x)?;
        if y >= target {
            let (mut a, mut b) = (prev_x, x);
            while b - a > tol {
                let m = 0.5 * (a + b);
                if loss(m)? >= target {
                    b = m;
                } else {
                    a = m;
                }
            }
            return Ok(Some(0.5 * (a + b)));
        }
        prev_x = x;
    }
    Ok(None)
}

/// Per-beamformer sweep driven entirely by the scenario.
///
/// Frequency sweeps report instantaneous SNR. Bandwidth sweeps report the band
/// average and the squint loss relative to the optimal-delay baseline.
pub fn run_sweep(cfg: &ScenarioConfig) -> Result<SweepResult> {
    let model = cfg.model();
    let center = cfg.band.center;
    let mut kinds: Vec<BeamformerKind> = cfg.beamformers.clone();
    if cfg.sweep.kind == SweepKind::Bandwidth {
        // The baseline is appended last and never reported against itself.
        kinds.retain(|&k| k != BeamformerKind::TdOpt);
    }
    let designed = kinds
        .iter()
        .map(|&k| Beamformer::design(k, &model, center))
        .collect::<Result<Vec<_>>>()?;
    let power = cfg.band.power_per_tone;
    let name = |k: BeamformerKind| k.name().replace('-', "_");
    match cfg.sweep.kind {
        SweepKind::Frequency => {
            let rows = par_rows(&cfg.sweep.grid(), |f| snr_row(&model, &designed, f, power))?;
            let mut columns = vec![Column::new("freq_hz", ColumnKind::Sweep)];
            columns.extend(kinds.iter().map(|&k| Column::new(name(k), ColumnKind::Snr)));
            Ok(SweepResult {
                columns,
                rows,
                metadata: metadata("sweep", cfg),
            })
        }
        SweepKind::Bandwidth => {
            let mut all = designed;
            all.push(Beamformer::TdOpt);
            let k = all.len();
            let rows = par_rows(&cfg.sweep.grid(), |bw| {
                let band = cfg.band.with_width(bw);
                let avg = average_over_dyn(band.lower(), band.upper(), &cfg.quadrature, k, |f| snr_row(&model, &all, f, power))?;
                let baseline = avg[k - 1];
                let mut row = avg[..k - 1].to_vec();
                row.push(baseline);
                for &a in &avg[..k - 1] {
                    row.push(squint_loss(baseline, a)?.raw());
                }
                Ok(row)
            })?;
            let mut columns = vec![Column::new("bandwidth_hz", ColumnKind::Sweep)];
            columns.extend(kinds.iter().map(|&b| Column::new(format!("avg_{}", name(b)), ColumnKind::Snr)));
            columns.push(Column::new("avg_td_opt", ColumnKind::Snr));
            columns.extend(kinds.iter().map(|&b| Column::new(format!("loss_{}", name(b)), ColumnKind::Loss)));
            Ok(SweepResult {
                columns,
                rows,
                metadata: metadata("sweep", cfg),
            })
        }
    }
}

/// Writes the CSV to `path` and the metadata to `<path>.meta.json`.
pub fn emit(result: &SweepResult, path: &Path) -> Result<()> {
    write_csv_file(path, &result.header(), &result.rows)?;
    let mut meta = path.as_os_str().to_owned();
    meta.push(".meta.json");
    let meta = std::path::PathBuf::from(meta);
    let json = serde_json::to_string_pretty(&result.metadata).expect("metadata serializes");
    std::fs::write(&meta, json + "\n").map_err(|source| Error::Io { path: meta.clone(), source })
}
