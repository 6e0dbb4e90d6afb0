//! The three BS transmission schemes and their spectral efficiency:
//! lens single-carrier path division multiplexing with antenna selection,
//! fully digital UPA MIMO-OFDM, and UPA hybrid analog/digital OFDM.
//!
//! SNR convention: noise power is 1 and `sum |alpha_l|^2 = 1`, so the linear
//! SNR is the transmit power budget; array gains enter only through the
//! response vectors.

mod hybrid;
mod lens;
mod ofdm;

pub use hybrid::{build_codebook, build_codebook_grid, greedy_beam_selection, hybrid_rate, hybrid_rate_with_codebook, Codebook, CodebookEntry};
pub use lens::{lens_sc_pdm_rate, select_antennas, select_by_power, AntennaSelection};
pub use ofdm::ofdm_digital_rate;

use serde::{Deserialize, Serialize};

use crate::channel::AngleRange;
use crate::error::{invalid, Result};
use crate::waterfill::waterfill;

pub const DEFAULT_SUBCARRIERS: usize = 512;
pub const DEFAULT_CP_LEN: usize = 50;
pub const DEFAULT_CODEBOOK_SIZE: usize = 256;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum SchemeKind {
    LensScPdm,
    UpaDigitalOfdm,
    UpaHybridOfdm,
}

impl SchemeKind {
    pub fn as_str(&self) -> &'static str {
        match self {
            SchemeKind::LensScPdm => "lens-sc-pdm",
            SchemeKind::UpaDigitalOfdm => "upa-digital-ofdm",
            SchemeKind::UpaHybridOfdm => "upa-hybrid-ofdm",
        }
    }

    pub fn is_ofdm(&self) -> bool {
        !matches!(self, SchemeKind::LensScPdm)
    }
}

impl std::fmt::Display for SchemeKind {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.as_str())
    }
}

fn default_subcarriers() -> usize {
    DEFAULT_SUBCARRIERS
}
fn default_cp_len() -> usize {
    DEFAULT_CP_LEN
}
fn default_codebook_size() -> usize {
    DEFAULT_CODEBOOK_SIZE
}
fn default_codebook_azimuth() -> AngleRange {
    AngleRange::degrees(-60.0, 60.0)
}
fn default_codebook_elevation() -> AngleRange {
    AngleRange::degrees(-30.0, 30.0)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SchemeConfig {
    pub scheme: SchemeKind,
    /// RF chains at the BS. Ignored on input for the fully digital scheme,
    /// which always uses one per element.
    #[serde(default)]
    pub m_rf: usize,
    /// Filled from the experiment sweep when run by the harness.
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub snr_db: Vec<f64>,
    #[serde(default = "default_subcarriers")]
    pub n_subcarriers: usize,
    #[serde(default = "default_cp_len")]
    pub cp_len: usize,
    #[serde(default = "default_codebook_size")]
    pub codebook_size: usize,
    #[serde(default = "default_codebook_azimuth", rename = "codebook_azimuth_deg")]
    pub codebook_azimuth: AngleRange,
    #[serde(default = "default_codebook_elevation", rename = "codebook_elevation_deg")]
    pub codebook_elevation: AngleRange,
}

impl SchemeConfig {
    pub fn new(scheme: SchemeKind, m_rf: usize) -> Self {
        Self {
            scheme,
            m_rf,
            snr_db: vec![0.0],
            n_subcarriers: DEFAULT_SUBCARRIERS,
            cp_len: DEFAULT_CP_LEN,
            codebook_size: DEFAULT_CODEBOOK_SIZE,
            codebook_azimuth: default_codebook_azimuth(),
            codebook_elevation: default_codebook_elevation(),
        }
    }

    pub fn lens(m_rf: usize) -> Self {
        Self::new(SchemeKind::LensScPdm, m_rf)
    }

    pub fn digital(bs_elements: usize) -> Self {
        Self::new(SchemeKind::UpaDigitalOfdm, bs_elements)
    }

    pub fn hybrid(m_rf: usize) -> Self {
        Self::new(SchemeKind::UpaHybridOfdm, m_rf)
    }

    pub fn with_snr(mut self, snr_db: impl Into<Vec<f64>>) -> Self {
        self.snr_db = snr_db.into();
        self
    }

    pub fn with_ofdm(mut self, n_subcarriers: usize, cp_len: usize) -> Self {
        self.n_subcarriers = n_subcarriers;
        self.cp_len = cp_len;
        self
    }

    /// `N / (N + mu)`, or 1 for single-carrier.
    pub fn cp_factor(&self) -> f64 {
        if self.scheme.is_ofdm() {
            self.n_subcarriers as f64 / (self.n_subcarriers + self.cp_len) as f64
        } else {
            1.0
        }
    }

    fn check(&self, expected: SchemeKind, delay_spread_symbols: f64) -> Result<()> {
        if self.scheme != expected {
            return Err(invalid(format!("config is for {}, expected {expected}", self.scheme)));
        }
        if self.m_rf == 0 {
            return Err(invalid("m_rf must be at least 1"));
        }
        if self.snr_db.is_empty() {
            return Err(invalid("no SNR points to evaluate"));
        }
        if self.scheme.is_ofdm() {
            if self.n_subcarriers == 0 {
                return Err(invalid("OFDM needs at least one subcarrier"));
            }
            let needed = (delay_spread_symbols - 1e-9).ceil().max(0.0) as usize;
            if self.cp_len < needed {
                return Err(invalid(format!(
                    "cyclic prefix of {} symbols is shorter than the delay spread B*T_m = {delay_spread_symbols}",
                    self.cp_len
                )));
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SchemeResult {
    pub snr_db: f64,
    /// bits/s/Hz
    pub spectral_efficiency: f64,
    /// Lens elements driven by RF chains, strongest first.
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub selected_antennas: Vec<usize>,
    /// Codebook indices of the analog beams, in selection order.
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub rf_beams: Vec<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub leakage: Option<f64>,
    /// Power per eigenmode rank, averaged over subcarriers for OFDM.
    pub per_stream_power: Vec<f64>,
}

pub(crate) fn db_to_linear(db: f64) -> f64 {
    10f64.powf(db / 10.0)
}

/// Eigenmode gains of one channel realization, ready for an SNR sweep.
///
/// `gains` holds `blocks` groups (subcarriers) of `streams` values each. The
/// total budget `blocks * snr` is water-filled jointly over every entry, and
/// the rate is averaged per block and scaled by `overhead`.
#[derive(Debug, Clone)]
pub(crate) struct ModalGains {
    pub gains: Vec<f64>,
    pub blocks: usize,
    pub streams: usize,
    pub overhead: f64,
}

impl ModalGains {
    pub fn evaluate(&self, snr_db: f64) -> Result<(f64, Vec<f64>)> {
        let snr = db_to_linear(snr_db);
        let alloc = waterfill(&self.gains, self.blocks as f64 * snr)?;
        let mut per_stream = vec![0.0; self.streams];
        for (i, p) in alloc.powers.iter().enumerate() {
            per_stream[i % self.streams] += p / self.blocks as f64;
        }
        Ok((self.overhead * alloc.rate / self.blocks as f64, per_stream))
    }

    pub fn results(
        &self,
        snr_db: &[f64],
        mut decorate: impl FnMut(&mut SchemeResult),
    ) -> Result<Vec<SchemeResult>> {
        snr_db
            .iter()
            .map(|&snr| {
                let (se, per_stream_power) = self.evaluate(snr)?;
                let mut r = SchemeResult {
                    snr_db: snr,
                    spectral_efficiency: se,
                    selected_antennas: Vec::new(),
                    rf_beams: Vec::new(),
                    leakage: None,
                    per_stream_power,
                };
                decorate(&mut r);
                Ok(r)
            })
            .collect()
    }
}
