use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::array::{ArrayGeometry, LensArrayGeometry, UpaGeometry};
use crate::channel::ChannelSamplingParams;
use crate::error::{Error, Result};
use crate::power::PowerModel;
use crate::transceivers::{SchemeConfig, SchemeKind};

/// Base-station aperture shared by the lens array and the UPA.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BsSpec {
    /// Electric aperture width and height, in wavelengths.
    pub aperture_y: f64,
    pub aperture_z: f64,
    pub elevation_coverage_deg: f64,
    pub azimuth_coverage_deg: f64,
    /// UPA element spacing, in wavelengths.
    pub upa_spacing: f64,
}

impl Default for BsSpec {
    fn default() -> Self {
        Self {
            aperture_y: 10.0,
            aperture_z: 10.0,
            elevation_coverage_deg: 60.0,
            azimuth_coverage_deg: 120.0,
            upa_spacing: 0.5,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case", deny_unknown_fields)]
pub enum MsSpec {
    Upa { rows: usize, cols: usize, spacing: f64, amplitude: f64 },
    Lens { aperture_y: f64, aperture_z: f64, elevation_coverage_deg: f64, azimuth_coverage_deg: f64 },
}

impl Default for MsSpec {
    fn default() -> Self {
        MsSpec::Upa { rows: 2, cols: 2, spacing: 0.5, amplitude: 1.0 }
    }
}

/// Power constants in watts.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PowerSpec {
    pub p_rf: f64,
    pub p_ps: f64,
    pub p_sw: f64,
    /// Lens element count used for power accounting; defaults to the
    /// geometry's own count.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub m_lens: Option<usize>,
}

impl Default for PowerSpec {
    fn default() -> Self {
        let pm = PowerModel::default();
        Self { p_rf: pm.p_rf, p_ps: pm.p_ps, p_sw: pm.p_sw, m_lens: None }
    }
}

impl PowerSpec {
    pub fn model(&self) -> PowerModel {
        PowerModel { p_rf: self.p_rf, p_ps: self.p_ps, p_sw: self.p_sw }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OutputSpec {
    pub dir: PathBuf,
    pub stem: String,
}

impl Default for OutputSpec {
    fn default() -> Self {
        Self { dir: PathBuf::from("results"), stem: "results".into() }
    }
}

fn default_reference_snr() -> f64 {
    10.0
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub name: String,
    pub num_trials: usize,
    pub master_seed: u64,
    pub snr_sweep_db: Vec<f64>,
    /// SNR at which spectral efficiency per watt is reported.
    #[serde(default = "default_reference_snr")]
    pub reference_snr_db: f64,
    pub channel: ChannelSamplingParams,
    pub bs: BsSpec,
    #[serde(default)]
    pub ms: MsSpec,
    #[serde(default)]
    pub power: PowerSpec,
    #[serde(default)]
    pub output: OutputSpec,
    pub schemes: Vec<SchemeConfig>,
}

impl Default for ExperimentConfig {
    /// 28 GHz, B = 500 MHz, T_m = 100 ns, three paths, 10 x 10 aperture with
    /// 60 x 120 degree coverage, 2 x 2 MS UPA, N = 512 with a 50-symbol CP,
    /// lens and hybrid at 3 and 16 RF chains plus the fully digital UPA.
    fn default() -> Self {
        let bs = BsSpec::default();
        let m_upa = ((bs.aperture_y / bs.upa_spacing).round() * (bs.aperture_z / bs.upa_spacing).round()) as usize;
        Self {
            name: "default".into(),
            num_trials: 1000,
            master_seed: 2016,
            snr_sweep_db: (0..=6).map(|i| 5.0 * i as f64).collect(),
            reference_snr_db: default_reference_snr(),
            channel: ChannelSamplingParams::default(),
            bs,
            ms: MsSpec::default(),
            power: PowerSpec { m_lens: Some(149), ..PowerSpec::default() },
            output: OutputSpec::default(),
            schemes: vec![
                SchemeConfig::lens(3),
                SchemeConfig::lens(16),
                SchemeConfig::digital(m_upa),
                SchemeConfig::hybrid(3),
                SchemeConfig::hybrid(16),
            ]
            .into_iter()
            .map(|s| s.with_snr(vec![]))
            .collect(),
        }
    }
}

impl ExperimentConfig {
    pub fn from_toml_str(text: &str) -> Result<Self> {
        let mut cfg: Self = toml::from_str(text).map_err(|e| Error::Config(e.to_string()))?;
        cfg.normalize();
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn from_file(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|source| Error::Io { path: path.into(), source })?;
        Self::from_toml_str(&text).map_err(|e| match e {
            Error::Config(message) => Error::Format { path: path.into(), message },
            other => other,
        })
    }

    pub fn to_toml(&self) -> Result<String> {
        toml::to_string_pretty(self).map_err(|e| Error::Config(e.to_string()))
    }

    /// Fills in the fully digital RF-chain count from the UPA size.
    pub fn normalize(&mut self) {
        let m_upa = self.bs_upa().map(|g| g.len()).unwrap_or(0);
        for s in &mut self.schemes {
            if s.scheme == SchemeKind::UpaDigitalOfdm {
                s.m_rf = m_upa;
            }
        }
    }

    pub fn validate(&self) -> Result<()> {
        let fail = |m: String| Err(Error::Config(m));
        if self.num_trials == 0 {
            return fail("num_trials must be at least 1".into());
        }
        if self.schemes.is_empty() {
            return fail("at least one scheme is required".into());
        }
        if self.snr_sweep_db.is_empty() || self.snr_sweep_db.iter().any(|x| !x.is_finite()) {
            return fail("snr_sweep_db must be a non-empty list of finite values".into());
        }
        if !self.reference_snr_db.is_finite() {
            return fail("reference_snr_db must be finite".into());
        }
        self.channel.validate()?;
        self.power.model().validate()?;
        let lens = self.bs_lens()?;
        let upa = self.bs_upa()?;
        self.ms_geometry()?;
        for s in &self.schemes {
            match s.scheme {
                SchemeKind::LensScPdm => {
                    if s.m_rf == 0 || s.m_rf > self.lens_power_elements()?.min(lens.len()) {
                        return fail(format!("lens m_rf = {} outside 1..={}", s.m_rf, lens.len()));
                    }
                }
                SchemeKind::UpaDigitalOfdm => {
                    if s.m_rf != upa.len() {
                        return fail(format!("fully digital m_rf must equal the {} UPA elements", upa.len()));
                    }
                }
                SchemeKind::UpaHybridOfdm => {
                    if s.m_rf == 0 || s.m_rf > s.codebook_size || s.m_rf > upa.len() {
                        return fail(format!("hybrid m_rf = {} must be in 1..=min(codebook, M)", s.m_rf));
                    }
                }
            }
            if s.scheme.is_ofdm() && (s.cp_len as f64) < self.channel.bandwidth_hz * self.channel.delay_max - 1e-9 {
                return fail(format!("{}: cp_len {} shorter than B*T_m", s.scheme, s.cp_len));
            }
        }
        Ok(())
    }

    pub fn bs_lens(&self) -> Result<LensArrayGeometry> {
        LensArrayGeometry::from_degrees(
            self.bs.aperture_y,
            self.bs.aperture_z,
            self.bs.elevation_coverage_deg,
            self.bs.azimuth_coverage_deg,
        )
    }

    pub fn bs_upa(&self) -> Result<UpaGeometry> {
        UpaGeometry::aperture_matched(self.bs.aperture_y, self.bs.aperture_z, self.bs.upa_spacing)
    }

    pub fn ms_geometry(&self) -> Result<ArrayGeometry> {
        Ok(match &self.ms {
            MsSpec::Upa { rows, cols, spacing, amplitude } => UpaGeometry::new(*rows, *cols, *spacing, *amplitude)?.into(),
            MsSpec::Lens { aperture_y, aperture_z, elevation_coverage_deg, azimuth_coverage_deg } => {
                LensArrayGeometry::from_degrees(*aperture_y, *aperture_z, *elevation_coverage_deg, *azimuth_coverage_deg)?.into()
            }
        })
    }

    /// Lens element count used for power accounting.
    pub fn lens_power_elements(&self) -> Result<usize> {
        Ok(match self.power.m_lens {
            Some(m) => m,
            None => self.bs_lens()?.len(),
        })
    }
}
