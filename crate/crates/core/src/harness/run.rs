use log::{debug, info};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::config::ExperimentConfig;
use crate::array::{ArrayGeometry, LensArrayGeometry, UpaGeometry};
use crate::channel::{sample_channel, MultipathChannel};
use crate::error::{Error, Result};
use crate::transceivers::{
    build_codebook, hybrid_rate_with_codebook, lens_sc_pdm_rate, ofdm_digital_rate, Codebook, SchemeConfig, SchemeKind, SchemeResult,
};

/// Seed of trial `trial`'s RNG stream: SplitMix64 over the pair, so streams
/// are independent of evaluation order.
pub fn trial_seed(master_seed: u64, trial: u64) -> u64 {
    fn mix(mut z: u64) -> u64 {
        z = z.wrapping_add(0x9e37_79b9_7f4a_7c15);
        z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
        z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
        z ^ (z >> 31)
    }
    mix(master_seed ^ mix(trial))
}

/// Outcome of one channel realization across every scheme.
#[derive(Debug, Clone, PartialEq)]
pub struct TrialRecord {
    pub trial: usize,
    pub channel_hash: u64,
    /// `[scheme][snr]` over the evaluation SNR list.
    pub spectral_efficiency: Vec<Vec<f64>>,
    /// Lens schemes only.
    pub leakage: Vec<Option<f64>>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AggregateRow {
    pub scheme: SchemeKind,
    pub m_rf: usize,
    pub snr_db: f64,
    pub mean_se: f64,
    pub stderr_se: f64,
    pub trials: usize,
    pub power_w: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SchemeSummary {
    pub scheme: SchemeKind,
    pub m_rf: usize,
    pub power_w: f64,
    pub reference_snr_db: f64,
    pub mean_se_at_reference: f64,
    /// Mean spectral efficiency at the reference SNR per watt.
    pub se_per_watt: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub mean_leakage: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AggregateResult {
    pub config: ExperimentConfig,
    /// Scheme-major, SNR in sweep order.
    pub rows: Vec<AggregateRow>,
    pub schemes: Vec<SchemeSummary>,
}

impl AggregateResult {
    pub fn row(&self, scheme: SchemeKind, m_rf: usize, snr_db: f64) -> Option<&AggregateRow> {
        self.rows.iter().find(|r| r.scheme == scheme && r.m_rf == m_rf && r.snr_db == snr_db)
    }

    pub fn summary(&self, scheme: SchemeKind, m_rf: usize) -> Option<&SchemeSummary> {
        self.schemes.iter().find(|s| s.scheme == scheme && s.m_rf == m_rf)
    }
}

/// Sweep points plus the reference SNR when it is not already swept.
fn evaluation_snrs(cfg: &ExperimentConfig) -> Vec<f64> {
    let mut snrs = cfg.snr_sweep_db.clone();
    if !snrs.contains(&cfg.reference_snr_db) {
        snrs.push(cfg.reference_snr_db);
    }
    snrs
}

struct Setup {
    lens: LensArrayGeometry,
    upa: UpaGeometry,
    ms: ArrayGeometry,
    schemes: Vec<SchemeConfig>,
    codebooks: Vec<Option<Codebook>>,
}

impl Setup {
    fn new(cfg: &ExperimentConfig) -> Result<Self> {
        let mut cfg = cfg.clone();
        cfg.normalize();
        cfg.validate()?;
        let upa = cfg.bs_upa()?;
        let snrs = evaluation_snrs(&cfg);
        let schemes: Vec<SchemeConfig> = cfg.schemes.iter().map(|s| s.clone().with_snr(snrs.clone())).collect();
        let mut codebooks: Vec<Option<Codebook>> = Vec::with_capacity(schemes.len());
        for (i, s) in schemes.iter().enumerate() {
            let cb = if s.scheme == SchemeKind::UpaHybridOfdm {
                // reuse an identical earlier codebook
                let shared = schemes[..i].iter().zip(&codebooks).find_map(|(t, cb)| {
                    let same = t.codebook_size == s.codebook_size
                        && t.codebook_azimuth == s.codebook_azimuth
                        && t.codebook_elevation == s.codebook_elevation;
                    cb.as_ref().filter(|_| same).cloned()
                });
                match shared {
                    Some(cb) => Some(cb),
                    None => Some(build_codebook(s.codebook_size, s.codebook_azimuth, s.codebook_elevation, &upa)?),
                }
            } else {
                None
            };
            codebooks.push(cb);
        }
        Ok(Self { lens: cfg.bs_lens()?, upa, ms: cfg.ms_geometry()?, schemes, codebooks })
    }

    fn evaluate(&self, ch: &MultipathChannel, idx: usize) -> Result<Vec<SchemeResult>> {
        let s = &self.schemes[idx];
        match s.scheme {
            SchemeKind::LensScPdm => lens_sc_pdm_rate(ch, &self.lens, &self.ms, s),
            SchemeKind::UpaDigitalOfdm => ofdm_digital_rate(ch, &self.upa, &self.ms, s),
            SchemeKind::UpaHybridOfdm => {
                let cb = self.codebooks[idx].as_ref().expect("hybrid schemes get a codebook");
                hybrid_rate_with_codebook(ch, &self.upa, &self.ms, s, cb)
            }
        }
    }
}

/// Runs every trial, in parallel, returning records in trial order. Each
/// trial samples one channel and evaluates every scheme on it.
pub fn run_trials(cfg: &ExperimentConfig) -> Result<Vec<TrialRecord>> {
    let setup = Setup::new(cfg)?;
    (0..cfg.num_trials)
        .into_par_iter()
        .map(|trial| {
            let mut rng = ChaCha8Rng::seed_from_u64(trial_seed(cfg.master_seed, trial as u64));
            let ch = sample_channel(&cfg.channel, &mut rng)?;
            let channel_hash = ch.fingerprint();
            debug!("trial {trial}: channel {channel_hash:016x}");
            let mut spectral_efficiency = Vec::with_capacity(setup.schemes.len());
            let mut leakage = Vec::with_capacity(setup.schemes.len());
            for idx in 0..setup.schemes.len() {
                let results = setup.evaluate(&ch, idx).map_err(|e| {
                    Error::Numerical(format!("trial {trial}, {}: {e}", setup.schemes[idx].scheme))
                })?;
                if let Some(bad) = results.iter().find(|r| !r.spectral_efficiency.is_finite()) {
                    return Err(Error::Numerical(format!(
                        "trial {trial}, {}: non-finite spectral efficiency at {} dB",
                        setup.schemes[idx].scheme, bad.snr_db
                    )));
                }
                leakage.push(results.first().and_then(|r| r.leakage));
                spectral_efficiency.push(results.into_iter().map(|r| r.spectral_efficiency).collect());
            }
            Ok(TrialRecord { trial, channel_hash, spectral_efficiency, leakage })
        })
        .collect()
}

fn mean_and_stderr(xs: impl Iterator<Item = f64> + Clone) -> (f64, f64) {
    let n = xs.clone().count();
    let mean = xs.clone().sum::<f64>() / n as f64;
    if n < 2 {
        return (mean, 0.0);
    }
    let var = xs.map(|x| (x - mean) * (x - mean)).sum::<f64>() / (n - 1) as f64;
    (mean, (var / n as f64).sqrt())
}

/// Reduces trial records in trial order into per-(scheme, SNR) statistics
/// and per-scheme power and efficiency.
pub fn aggregate(cfg: &ExperimentConfig, trials: &[TrialRecord]) -> Result<AggregateResult> {
    let mut cfg = cfg.clone();
    cfg.normalize();
    if trials.is_empty() {
        return Err(Error::Config("no trials to aggregate".into()));
    }
    let snrs = evaluation_snrs(&cfg);
    let pm = cfg.power.model();
    let m_upa = cfg.bs_upa()?.len();
    let m_lens = cfg.lens_power_elements()?;

    let mut rows = Vec::new();
    let mut schemes = Vec::new();
    for (idx, s) in cfg.schemes.iter().enumerate() {
        let power_w = match s.scheme {
            SchemeKind::LensScPdm => pm.lens(m_lens, s.m_rf)?,
            SchemeKind::UpaDigitalOfdm => pm.digital(m_upa)?,
            SchemeKind::UpaHybridOfdm => pm.hybrid(m_upa, s.m_rf)?,
        };
        let column = |j: usize| trials.iter().map(move |t| t.spectral_efficiency[idx][j]);
        for (j, &snr_db) in snrs.iter().enumerate().take(cfg.snr_sweep_db.len()) {
            let (mean_se, stderr_se) = mean_and_stderr(column(j));
            rows.push(AggregateRow { scheme: s.scheme, m_rf: s.m_rf, snr_db, mean_se, stderr_se, trials: trials.len(), power_w });
        }
        let ref_idx = snrs.iter().position(|&x| x == cfg.reference_snr_db).expect("reference SNR is evaluated");
        let (mean_ref, _) = mean_and_stderr(column(ref_idx));
        let mean_leakage = (s.scheme == SchemeKind::LensScPdm)
            .then(|| trials.iter().filter_map(|t| t.leakage[idx]).sum::<f64>() / trials.len() as f64);
        schemes.push(SchemeSummary {
            scheme: s.scheme,
            m_rf: s.m_rf,
            power_w,
            reference_snr_db: cfg.reference_snr_db,
            mean_se_at_reference: mean_ref,
            se_per_watt: mean_ref / power_w,
            mean_leakage,
        });
    }
    Ok(AggregateResult { config: cfg, rows, schemes })
}

pub fn run_experiment(cfg: &ExperimentConfig) -> Result<AggregateResult> {
    info!("{}: {} trials, {} schemes, seed {}", cfg.name, cfg.num_trials, cfg.schemes.len(), cfg.master_seed);
    let trials = run_trials(cfg)?;
    info!("{}: trials done, aggregating", cfg.name);
    aggregate(cfg, &trials)
}
