//! Scenario files: a flat TOML key set, per-mode defaults, and validation.

use std::fmt::Write as _;
use std::path::Path;

use num_complex::Complex;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::beamform::BeamformerKind;
use crate::channel::LinkConfig;
use crate::error::{Error, Result};
use crate::impedance::{AntennaElement, ArrayGeometry, ImpedanceModel, MutualImpedanceModel};
use crate::metrics::BandSpec;
use crate::noise::NoiseConfig;
use crate::quadrature::QuadratureSpec;
use crate::scalar::{BOLTZMANN, SPEED_OF_LIGHT};
use crate::system::{ArrayModel, CircuitModel};

/// Spacing of the tightly coupled array, m.
pub const TIGHT_SPACING: f64 = 0.005;
/// Default `spacing / radius` of the tightly coupled array.
pub const TIGHT_COUPLING_FACTOR: f64 = 2.5;
/// Noise bandwidth used for bandwidth sweeps when none is configured, Hz.
pub const DEFAULT_TONE_BANDWIDTH: f64 = 1e6;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum CouplingMode {
    /// Half-wavelength array with every scalar normalized to one.
    WeakUnity,
    /// Tightly coupled CMS array with the reference link budget.
    TightDefault,
    /// Full circuit model; geometry must be given explicitly.
    Custom,
}

impl CouplingMode {
    pub fn is_circuit(self) -> bool {
        !matches!(self, CouplingMode::WeakUnity)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum SweepKind {
    Frequency,
    Bandwidth,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum GridSpacing {
    Linear,
    Log,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SweepSpec {
    pub kind: SweepKind,
    pub points: usize,
    pub start: f64,
    pub stop: f64,
    pub spacing: GridSpacing,
}

impl SweepSpec {
    /// Grid values in index order.
    pub fn grid(&self) -> Vec<f64> {
        let n = self.points;
        if n == 0 {
            return Vec::new();
        }
        if n == 1 {
            return vec![self.start];
        }
        let last = (n - 1) as f64;
        (0..n)
            .map(|i| {
                if i == n - 1 {
                    return self.stop;
                }
                let t = i as f64 / last;
                match self.spacing {
                    GridSpacing::Linear => self.start + (self.stop - self.start) * t,
                    GridSpacing::Log => (self.start.ln() + (self.stop.ln() - self.start.ln()) * t).exp(),
                }
            })
            .collect()
    }

    /// Spacing of a uniform frequency grid.
    pub fn bin_width(&self) -> f64 {
        (self.stop - self.start) / (self.points.max(2) - 1) as f64
    }
}

/// Raw scenario file; every key optional except `coupling_mode`.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScenarioFile {
    pub coupling_mode: Option<CouplingMode>,
    pub beamformers: Option<Vec<String>>,
    #[serde(default)]
    pub geometry: GeometryKeys,
    #[serde(default)]
    pub link: LinkKeys,
    #[serde(default)]
    pub noise: NoiseKeys,
    #[serde(default)]
    pub band: BandKeys,
    #[serde(default)]
    pub impedance: ImpedanceKeys,
    #[serde(default)]
    pub sweep: SweepKeys,
    #[serde(default)]
    pub quadrature: QuadratureKeys,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GeometryKeys {
    pub n_elements: Option<usize>,
    pub spacing: Option<f64>,
    pub element_radius: Option<f64>,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LinkKeys {
    pub distance: Option<f64>,
    pub path_loss_exponent: Option<f64>,
    pub tx_gain: Option<f64>,
    pub rx_gain: Option<f64>,
    pub aoa: Option<f64>,
    /// `[re, im]`, Ω.
    pub source_impedance: Option<[f64; 2]>,
    pub lna_gain: Option<f64>,
    /// `[re, im]`, Ω.
    pub lna_impedance: Option<[f64; 2]>,
    pub psi: Option<f64>,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct NoiseKeys {
    pub boltzmann: Option<f64>,
    pub temperature: Option<f64>,
    pub noise_bandwidth: Option<f64>,
    pub noise_factor_db: Option<f64>,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BandKeys {
    pub center: Option<f64>,
    pub width: Option<f64>,
    pub power_per_tone: Option<f64>,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ImpedanceKeys {
    pub mutual_model: Option<String>,
    pub radiation_resistance: Option<f64>,
    pub resonance: Option<f64>,
    pub tx_radius_factor: Option<f64>,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepKeys {
    pub kind: Option<SweepKind>,
    pub points: Option<usize>,
    pub start: Option<f64>,
    pub stop: Option<f64>,
    pub spacing: Option<GridSpacing>,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct QuadratureKeys {
    pub order: Option<usize>,
    pub rtol: Option<f64>,
    pub max_level: Option<u32>,
}

impl ScenarioFile {
    pub fn parse(text: &str) -> Result<Self> {
        toml::from_str(text).map_err(|e| Error::Config(format!("parse error: {e}")))
    }

    pub fn read(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|source| Error::Io {
            path: path.to_path_buf(),
            source,
        })?;
        Self::parse(&text).map_err(|e| match e {
            Error::Config(msg) => Error::Config(format!("{}: {msg}", path.display())),
            other => other,
        })
    }

    /// Fills defaults for the selected mode and validates every invariant.
    pub fn resolve(&self) -> Result<ScenarioConfig> {
        let mode = self
            .coupling_mode
            .ok_or_else(|| Error::Config("missing required field `coupling_mode`".into()))?;
        let center = self.band.center.unwrap_or(10e9);
        let positive = |name: &str, v: f64| -> Result<f64> {
            if v > 0.0 && v.is_finite() {
                Ok(v)
            } else {
                Err(Error::Config(format!("`{name}` must be a positive finite number, got {v}")))
            }
        };
        positive("band.center", center)?;

        let n = self.geometry.n_elements.unwrap_or(32);
        if n == 0 {
            return Err(Error::Config("`geometry.n_elements` must be >= 1".into()));
        }
        let spacing = match (mode, self.geometry.spacing) {
            (_, Some(s)) => s,
            (CouplingMode::WeakUnity, None) => SPEED_OF_LIGHT / center / 2.0,
            (CouplingMode::TightDefault, None) => TIGHT_SPACING,
            (CouplingMode::Custom, None) => {
                return Err(Error::Config("custom mode requires `geometry.spacing`".into()));
            }
        };
        positive("geometry.spacing", spacing)?;
        let radius = match (mode, self.geometry.element_radius) {
            (_, Some(r)) => r,
            (CouplingMode::WeakUnity, None) => spacing / 10.0,
            (CouplingMode::TightDefault, None) => spacing / TIGHT_COUPLING_FACTOR,
            (CouplingMode::Custom, None) => {
                return Err(Error::Config("custom mode requires `geometry.element_radius`".into()));
            }
        };
        positive("geometry.element_radius", radius)?;
        let geometry = ArrayGeometry::new(n, spacing, AntennaElement::new(radius)?).map_err(config_err)?;

        let reference = LinkConfig::<f64>::reference();
        let k = &self.link;
        let cplx = |v: Option<[f64; 2]>, d: Complex<f64>| v.map_or(d, |[re, im]| Complex::new(re, im));
        let link = LinkConfig {
            distance: k.distance.unwrap_or(reference.distance),
            path_loss_exponent: k.path_loss_exponent.unwrap_or(reference.path_loss_exponent),
            tx_gain: k.tx_gain.unwrap_or(reference.tx_gain),
            rx_gain: k.rx_gain.unwrap_or(reference.rx_gain),
            aoa: k.aoa.unwrap_or(reference.aoa),
            source_impedance: cplx(k.source_impedance, reference.source_impedance),
            lna_gain: k.lna_gain.unwrap_or(reference.lna_gain),
            lna_impedance: cplx(k.lna_impedance, reference.lna_impedance),
            psi: k.psi.unwrap_or(reference.psi),
        };
        link.validate().map_err(config_err)?;

        let default_width = if mode.is_circuit() { 12e9 } else { 2e9 };
        let power_per_tone = self.band.power_per_tone.unwrap_or(1.0);
        if mode == CouplingMode::WeakUnity && power_per_tone != 1.0 {
            return Err(Error::Config("weak-unity mode normalizes `band.power_per_tone` to 1".into()));
        }
        let band = BandSpec::new(center, self.band.width.unwrap_or(default_width), power_per_tone).map_err(config_err)?;

        let kind = self.sweep.kind.unwrap_or(SweepKind::Frequency);
        let (start_default, stop_default, spacing_default, points_default) = match kind {
            SweepKind::Frequency if mode.is_circuit() => (4e9, 16e9, GridSpacing::Linear, 1024),
            SweepKind::Frequency => (center - 1e9, center + 1e9, GridSpacing::Linear, 1024),
            SweepKind::Bandwidth if mode.is_circuit() => (1e8, 12e9, GridSpacing::Log, 64),
            SweepKind::Bandwidth => (1e7, 2e9, GridSpacing::Log, 64),
        };
        let sweep = SweepSpec {
            kind,
            points: self.sweep.points.unwrap_or(points_default),
            start: self.sweep.start.unwrap_or(start_default),
            stop: self.sweep.stop.unwrap_or(stop_default),
            spacing: self.sweep.spacing.unwrap_or(spacing_default),
        };
        validate_sweep(&sweep, center)?;

        let noise_bandwidth = self.noise.noise_bandwidth.unwrap_or(match sweep.kind {
            SweepKind::Frequency => sweep.bin_width(),
            SweepKind::Bandwidth => DEFAULT_TONE_BANDWIDTH,
        });
        let noise_factor_db = self.noise.noise_factor_db.unwrap_or(5.0);
        let noise = NoiseConfig {
            boltzmann: self.noise.boltzmann.unwrap_or(BOLTZMANN),
            temperature: self.noise.temperature.unwrap_or(290.0),
            noise_bandwidth,
            noise_factor: 10f64.powf(noise_factor_db / 10.0),
        };
        positive("noise.boltzmann", noise.boltzmann)?;
        noise.validate().map_err(config_err)?;

        let mutual_name = self
            .impedance
            .mutual_model
            .clone()
            .unwrap_or_else(|| if mode.is_circuit() { "cms-closed-form" } else { "zero" }.to_string());
        let mutual = match mutual_name.as_str() {
            "cms-closed-form" => MutualImpedanceModel::CmsClosedForm {
                radiation_resistance: positive(
                    "impedance.radiation_resistance",
                    self.impedance.radiation_resistance.unwrap_or(1.0),
                )?,
            },
            "zero" => MutualImpedanceModel::Zero,
            other => {
                return Err(Error::Config(format!(
                    "`impedance.mutual_model` must be `cms-closed-form` or `zero`, got `{other}`"
                )))
            }
        };
        let impedance = ImpedanceModel {
            mutual,
            resonance: positive("impedance.resonance", self.impedance.resonance.unwrap_or(center))?,
            tx_radius_factor: positive("impedance.tx_radius_factor", self.impedance.tx_radius_factor.unwrap_or(100.0))?,
        };

        let beamformers = match &self.beamformers {
            Some(names) => names.iter().map(|s| s.parse()).collect::<Result<Vec<BeamformerKind>>>()?,
            None if mode.is_circuit() => vec![
                BeamformerKind::Pop,
                BeamformerKind::TdI,
                BeamformerKind::TdII,
                BeamformerKind::TdOpt,
            ],
            None => vec![BeamformerKind::Conv, BeamformerKind::TtdWc],
        };
        if beamformers.contains(&BeamformerKind::TdGeneric) {
            return Err(Error::Config("`td-generic` needs explicit delays and cannot be swept".into()));
        }

        let quad_default = QuadratureSpec::<f64>::default();
        let quadrature = QuadratureSpec {
            order: self.quadrature.order.unwrap_or(quad_default.order),
            rtol: self.quadrature.rtol.unwrap_or(quad_default.rtol),
            max_level: self.quadrature.max_level.unwrap_or(quad_default.max_level),
            min_level: quad_default.min_level,
        };
        if quadrature.order == 0 || quadrature.order > 256 {
            return Err(Error::Config("`quadrature.order` must lie in 1..=256".into()));
        }
        positive("quadrature.rtol", quadrature.rtol)?;
        if quadrature.max_level > 20 {
            return Err(Error::Config("`quadrature.max_level` must be <= 20".into()));
        }

        Ok(ScenarioConfig {
            coupling_mode: mode,
            geometry,
            link,
            noise,
            noise_factor_db,
            band,
            impedance,
            beamformers,
            sweep,
            quadrature,
        })
    }
}

fn config_err(e: Error) -> Error {
    match e {
        Error::Config(_) => e,
        other => Error::Config(other.to_string()),
    }
}

fn validate_sweep(sweep: &SweepSpec, center: f64) -> Result<()> {
    if sweep.points < 2 {
        return Err(Error::Config(format!("`sweep.points` must be >= 2, got {}", sweep.points)));
    }
    if !(sweep.start > 0.0 && sweep.stop > sweep.start && sweep.stop.is_finite()) {
        return Err(Error::Config(format!(
            "sweep range [{}, {}] must be positive and increasing",
            sweep.start, sweep.stop
        )));
    }
    if sweep.kind == SweepKind::Bandwidth && !(center - sweep.stop / 2.0 > 0.0) {
        return Err(Error::Config("bandwidth sweep would reach non-positive frequencies".into()));
    }
    Ok(())
}

/// Fully resolved, validated scenario.
#[derive(Debug, Clone, PartialEq)]
pub struct ScenarioConfig {
    pub coupling_mode: CouplingMode,
    pub geometry: ArrayGeometry<f64>,
    pub link: LinkConfig<f64>,
    pub noise: NoiseConfig<f64>,
    /// `noise.noise_factor` as configured, dB.
    pub noise_factor_db: f64,
    pub band: BandSpec<f64>,
    pub impedance: ImpedanceModel<f64>,
    pub beamformers: Vec<BeamformerKind>,
    pub sweep: SweepSpec,
    pub quadrature: QuadratureSpec<f64>,
}

/// Built-in figure scenarios.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Preset {
    Fig1a,
    Fig1b,
    Fig2,
    Fig3,
}

impl Preset {
    pub fn file(self) -> ScenarioFile {
        let mut f = ScenarioFile::default();
        match self {
            Preset::Fig1a | Preset::Fig1b => f.coupling_mode = Some(CouplingMode::WeakUnity),
            Preset::Fig2 | Preset::Fig3 => f.coupling_mode = Some(CouplingMode::TightDefault),
        }
        f.sweep.kind = Some(match self {
            Preset::Fig1a | Preset::Fig2 => SweepKind::Frequency,
            Preset::Fig1b | Preset::Fig3 => SweepKind::Bandwidth,
        });
        f
    }
}

impl ScenarioConfig {
    pub fn preset(p: Preset) -> Self {
        p.file().resolve().expect("built-in preset is valid")
    }

    pub fn model(&self) -> ArrayModel<f64> {
        if self.coupling_mode.is_circuit() {
            ArrayModel::Circuit(CircuitModel {
                geometry: self.geometry,
                impedance: self.impedance,
                link: self.link,
                noise: self.noise,
            })
        } else {
            ArrayModel::WeakUnity {
                geometry: self.geometry,
                aoa: self.link.aoa,
            }
        }
    }

    /// Every key with its resolved value.
    pub fn to_file(&self) -> ScenarioFile {
        let (mutual_model, radiation_resistance) = match self.impedance.mutual {
            MutualImpedanceModel::CmsClosedForm { radiation_resistance } => ("cms-closed-form", Some(radiation_resistance)),
            MutualImpedanceModel::Zero => ("zero", None),
        };
        ScenarioFile {
            coupling_mode: Some(self.coupling_mode),
            beamformers: Some(self.beamformers.iter().map(|b| b.name().to_string()).collect()),
            geometry: GeometryKeys {
                n_elements: Some(self.geometry.n_elements()),
                spacing: Some(self.geometry.spacing()),
                element_radius: Some(self.geometry.element().radius()),
            },
            link: LinkKeys {
                distance: Some(self.link.distance),
                path_loss_exponent: Some(self.link.path_loss_exponent),
                tx_gain: Some(self.link.tx_gain),
                rx_gain: Some(self.link.rx_gain),
                aoa: Some(self.link.aoa),
                source_impedance: Some([self.link.source_impedance.re, self.link.source_impedance.im]),
                lna_gain: Some(self.link.lna_gain),
                lna_impedance: Some([self.link.lna_impedance.re, self.link.lna_impedance.im]),
                psi: Some(self.link.psi),
            },
            noise: NoiseKeys {
                boltzmann: Some(self.noise.boltzmann),
                temperature: Some(self.noise.temperature),
                noise_bandwidth: Some(self.noise.noise_bandwidth),
                noise_factor_db: Some(self.noise_factor_db),
            },
            band: BandKeys {
                center: Some(self.band.center),
                width: Some(self.band.width),
                power_per_tone: Some(self.band.power_per_tone),
            },
            impedance: ImpedanceKeys {
                mutual_model: Some(mutual_model.to_string()),
                radiation_resistance,
                resonance: Some(self.impedance.resonance),
                tx_radius_factor: Some(self.impedance.tx_radius_factor),
            },
            sweep: SweepKeys {
                kind: Some(self.sweep.kind),
                points: Some(self.sweep.points),
                start: Some(self.sweep.start),
                stop: Some(self.sweep.stop),
                spacing: Some(self.sweep.spacing),
            },
            quadrature: QuadratureKeys {
                order: Some(self.quadrature.order),
                rtol: Some(self.quadrature.rtol),
                max_level: Some(self.quadrature.max_level),
            },
        }
    }

    /// Flat `section.key = value` TOML, one key per line in a fixed order.
    pub fn to_toml(&self) -> String {
        let value = toml::Value::try_from(self.to_file()).expect("scenario serializes");
        let mut out = String::new();
        flatten(&value, "", &mut out);
        out
    }

    /// SHA-256 of [`ScenarioConfig::to_toml`], hex encoded.
    pub fn hash(&self) -> String {
        hex::encode(Sha256::digest(self.to_toml().as_bytes()))
    }
}

fn flatten(value: &toml::Value, prefix: &str, out: &mut String) {
    match value {
        toml::Value::Table(table) => {
            // Scalars before nested tables so the top-level keys come first.
            let (scalars, tables): (Vec<_>, Vec<_>) = table.iter().partition(|(_, v)| !v.is_table());
            for (k, v) in scalars.into_iter().chain(tables) {
                let key = if prefix.is_empty() { k.clone() } else { format!("{prefix}.{k}") };
                flatten(v, &key, out);
            }
        }
        leaf => {
            let _ = writeln!(out, "{prefix} = {leaf}");
        }
    }
}

pub fn load_scenario(path: &Path) -> Result<ScenarioConfig> {
    ScenarioFile::read(path)?.resolve()
}
