//! Wideband multipath channels: random generation, frequency-domain
//! synthesis, and the flat equivalent seen after per-element delay
//! pre-compensation at a lens base station.

use std::collections::BTreeMap;
use std::f64::consts::PI;

use num_complex::Complex64;
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::array::{ArrayGeometry, Direction, LensArrayGeometry};
use crate::error::{invalid, Result};
use crate::linalg::CMatrix;

pub const DEFAULT_CARRIER_HZ: f64 = 28e9;
pub const DEFAULT_BANDWIDTH_HZ: f64 = 500e6;
pub const DEFAULT_MAX_DELAY_S: f64 = 100e-9;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PathComponent {
    pub bs_dir: Direction,
    pub ms_dir: Direction,
    /// Seconds.
    pub delay: f64,
    pub gain: Complex64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(into = "ChannelRecord", try_from = "ChannelRecord")]
pub struct MultipathChannel {
    pub paths: Vec<PathComponent>,
    pub carrier_hz: f64,
    pub bandwidth_hz: f64,
    /// Maximum path delay `T_m`, seconds.
    pub t_max: f64,
}

impl MultipathChannel {
    pub fn new(paths: Vec<PathComponent>, bandwidth_hz: f64, t_max: f64) -> Result<Self> {
        if paths.is_empty() {
            return Err(invalid("a channel needs at least one path"));
        }
        if !(bandwidth_hz > 0.0) || !(t_max >= 0.0) {
            return Err(invalid("bandwidth must be positive and T_m non-negative"));
        }
        if let Some(p) = paths.iter().find(|p| !(0.0..=t_max * (1.0 + 1e-12)).contains(&p.delay)) {
            return Err(invalid(format!("path delay {} s outside [0, {t_max}]", p.delay)));
        }
        Ok(Self { paths, carrier_hz: DEFAULT_CARRIER_HZ, bandwidth_hz, t_max })
    }

    pub fn num_paths(&self) -> usize {
        self.paths.len()
    }

    /// Delay spread in symbols, `mu = B T_m`.
    pub fn mu(&self) -> f64 {
        self.bandwidth_hz * self.t_max
    }

    pub fn total_power(&self) -> f64 {
        self.paths.iter().map(|p| p.gain.norm_sqr()).sum()
    }

    /// Copy with every delay set to zero (a frequency-flat channel).
    pub fn without_delays(&self) -> Self {
        let mut ch = self.clone();
        ch.paths.iter_mut().for_each(|p| p.delay = 0.0);
        ch
    }

    /// FNV-1a over the bit patterns of every field; identifies a realization.
    pub fn fingerprint(&self) -> u64 {
        let mut h: u64 = 0xcbf2_9ce4_8422_2325;
        let mut eat = |x: f64| {
            for b in x.to_bits().to_le_bytes() {
                h ^= b as u64;
                h = h.wrapping_mul(0x0000_0100_0000_01b3);
            }
        };
        eat(self.carrier_hz);
        eat(self.bandwidth_hz);
        eat(self.t_max);
        for p in &self.paths {
            for x in [p.bs_dir.theta, p.bs_dir.phi, p.ms_dir.theta, p.ms_dir.phi, p.delay, p.gain.re, p.gain.im] {
                eat(x);
            }
        }
        h
    }
}

/// Closed interval of angles. Stored in degrees, the unit used on disk, so
/// configurations round-trip exactly; accessors return radians.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(from = "[f64; 2]", into = "[f64; 2]")]
pub struct AngleRange {
    pub min_deg: f64,
    pub max_deg: f64,
}

impl AngleRange {
    pub fn degrees(min_deg: f64, max_deg: f64) -> Self {
        Self { min_deg, max_deg }
    }

    pub fn min(&self) -> f64 {
        self.min_deg.to_radians()
    }

    pub fn max(&self) -> f64 {
        self.max_deg.to_radians()
    }

    pub fn width(&self) -> f64 {
        self.max() - self.min()
    }

    /// Whether `x` (radians) lies in the range.
    pub fn contains(&self, x: f64) -> bool {
        (self.min() - 1e-12..=self.max() + 1e-12).contains(&x)
    }

    fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> f64 {
        self.min() + self.width() * rng.random::<f64>()
    }
}

impl From<[f64; 2]> for AngleRange {
    fn from(d: [f64; 2]) -> Self {
        AngleRange::degrees(d[0], d[1])
    }
}

impl From<AngleRange> for [f64; 2] {
    fn from(r: AngleRange) -> Self {
        [r.min_deg, r.max_deg]
    }
}

/// How total channel power is divided among paths before normalization.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum PowerProfile {
    /// `|alpha_l|^2` proportional to `u_l ~ Uniform(0, 1]`.
    UniformRandom,
    /// `|alpha_l|^2` proportional to `exp(-l / decay)`, `l = 0, 1, ...`.
    Exponential { decay: f64 },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ChannelSamplingParams {
    pub num_paths: usize,
    #[serde(rename = "azimuth_range_deg")]
    pub azimuth_range: AngleRange,
    #[serde(rename = "elevation_range_deg")]
    pub elevation_range: AngleRange,
    #[serde(rename = "ms_azimuth_range_deg")]
    pub ms_azimuth_range: AngleRange,
    #[serde(rename = "ms_elevation_range_deg")]
    pub ms_elevation_range: AngleRange,
    /// `T_m`, seconds.
    #[serde(rename = "delay_max_s")]
    pub delay_max: f64,
    pub carrier_hz: f64,
    pub bandwidth_hz: f64,
    pub power_profile: PowerProfile,
}

impl Default for ChannelSamplingParams {
    fn default() -> Self {
        Self {
            num_paths: 3,
            azimuth_range: AngleRange::degrees(-60.0, 60.0),
            elevation_range: AngleRange::degrees(-30.0, 30.0),
            ms_azimuth_range: AngleRange::degrees(-60.0, 60.0),
            ms_elevation_range: AngleRange::degrees(-30.0, 30.0),
            delay_max: DEFAULT_MAX_DELAY_S,
            carrier_hz: DEFAULT_CARRIER_HZ,
            bandwidth_hz: DEFAULT_BANDWIDTH_HZ,
            power_profile: PowerProfile::UniformRandom,
        }
    }
}

impl ChannelSamplingParams {
    pub fn validate(&self) -> Result<()> {
        if self.num_paths == 0 {
            return Err(invalid("num_paths must be at least 1"));
        }
        for r in [self.azimuth_range, self.elevation_range, self.ms_azimuth_range, self.ms_elevation_range] {
            if !(r.min_deg <= r.max_deg) || r.min_deg < -90.0 || r.max_deg > 90.0 {
                return Err(invalid(format!(
                    "angle range [{}, {}] deg must be ordered and within [-90, 90]",
                    r.min_deg, r.max_deg
                )));
            }
        }
        if !(self.delay_max >= 0.0) || !(self.bandwidth_hz > 0.0) || !(self.carrier_hz > 0.0) {
            return Err(invalid("delay_max must be non-negative; bandwidth and carrier positive"));
        }
        if let PowerProfile::Exponential { decay } = self.power_profile {
            if !(decay > 0.0) {
                return Err(invalid("exponential power profile needs a positive decay"));
            }
        }
        Ok(())
    }
}

/// Draws one channel. Per path, in order: BS azimuth, BS elevation, MS
/// azimuth, MS elevation, delay, power weight, phase. Gains are then
/// normalized so `sum |alpha_l|^2 = 1`.
pub fn sample_channel<R: Rng + ?Sized>(params: &ChannelSamplingParams, rng: &mut R) -> Result<MultipathChannel> {
    params.validate()?;
    let mut paths = Vec::with_capacity(params.num_paths);
    let mut weights = Vec::with_capacity(params.num_paths);
    for l in 0..params.num_paths {
        let bs_phi = params.azimuth_range.sample(rng);
        let bs_theta = params.elevation_range.sample(rng);
        let ms_phi = params.ms_azimuth_range.sample(rng);
        let ms_theta = params.ms_elevation_range.sample(rng);
        let delay = params.delay_max * rng.random::<f64>();
        let weight = match params.power_profile {
            PowerProfile::UniformRandom => 1.0 - rng.random::<f64>(),
            PowerProfile::Exponential { decay } => (-(l as f64) / decay).exp(),
        };
        let phase = 2.0 * PI * rng.random::<f64>();
        weights.push(weight);
        paths.push(PathComponent {
            bs_dir: Direction::new(bs_theta, bs_phi),
            ms_dir: Direction::new(ms_theta, ms_phi),
            delay,
            gain: Complex64::from_polar(1.0, phase),
        });
    }
    let total: f64 = weights.iter().sum();
    for (p, w) in paths.iter_mut().zip(&weights) {
        p.gain *= (w / total).sqrt();
    }
    Ok(MultipathChannel {
        paths,
        carrier_hz: params.carrier_hz,
        bandwidth_hz: params.bandwidth_hz,
        t_max: params.delay_max,
    })
}

/// Path-domain factorization `H[k] = A_rx D_k A_tx^T`, where column `l` of
/// `A_rx` / `A_tx` is the path's array response and
/// `D_k = diag(alpha_l exp(-j 2 pi f_k tau_l))`.
///
/// Everything the OFDM schemes need reduces to `L x L` products, so the
/// per-subcarrier work is independent of the BS array size.
#[derive(Debug, Clone)]
pub struct PathFactors {
    pub rx: CMatrix,
    pub tx: CMatrix,
    gains: Vec<Complex64>,
    delays: Vec<f64>,
    bandwidth_hz: f64,
}

impl PathFactors {
    pub fn new(ch: &MultipathChannel, tx: &ArrayGeometry, rx: &ArrayGeometry) -> Self {
        let l = ch.num_paths();
        let mut rx_m = CMatrix::zeros(rx.len(), l);
        let mut tx_m = CMatrix::zeros(tx.len(), l);
        for (i, p) in ch.paths.iter().enumerate() {
            rx_m.set_column(i, &rx.response(p.ms_dir));
            tx_m.set_column(i, &tx.response(p.bs_dir));
        }
        Self {
            rx: rx_m,
            tx: tx_m,
            gains: ch.paths.iter().map(|p| p.gain).collect(),
            delays: ch.paths.iter().map(|p| p.delay).collect(),
            bandwidth_hz: ch.bandwidth_hz,
        }
    }

    pub fn num_paths(&self) -> usize {
        self.gains.len()
    }

    /// Diagonal of `D_k` for subcarrier `k` of `n`, at `f_k = k B / n`.
    pub fn path_coefficients(&self, k: usize, n: usize) -> Vec<Complex64> {
        let f = k as f64 * self.bandwidth_hz / n as f64;
        self.gains
            .iter()
            .zip(&self.delays)
            .map(|(&a, &tau)| a * Complex64::from_polar(1.0, -2.0 * PI * f * tau))
            .collect()
    }

    pub fn subcarrier_matrix(&self, k: usize, n: usize) -> CMatrix {
        let d = self.path_coefficients(k, n);
        let mut scaled = self.rx.clone();
        for (mut col, c) in scaled.column_iter_mut().zip(&d) {
            col *= *c;
        }
        scaled * self.tx.transpose()
    }

    /// `A_rx D_k core D_k^* A_rx^H` for an `L x L` Hermitian `core`.
    ///
    /// With `core = B B^H` this is the receive-side Gram matrix of the
    /// channel `A_rx D_k B`; `B = A_tx^T` gives `H[k] H[k]^H`.
    pub fn rx_gram(&self, k: usize, n: usize, core: &CMatrix) -> CMatrix {
        let d = self.path_coefficients(k, n);
        let l = d.len();
        let inner = CMatrix::from_fn(l, l, |i, j| d[i] * core[(i, j)] * d[j].conj());
        &self.rx * inner * self.rx.adjoint()
    }

    /// `A_tx^T conj(A_tx)`, the `L x L` core of `H[k] H[k]^H`.
    pub fn tx_core(&self) -> CMatrix {
        self.tx.transpose() * self.tx.map(|z| z.conj())
    }

    /// `C = sum_k D_k^* (A_rx^H A_rx) D_k`, so that the wideband transmit
    /// covariance is `sum_k H[k]^H H[k] = conj(A_tx) C A_tx^T`.
    pub fn wideband_tx_core(&self, n: usize) -> CMatrix {
        let g = self.rx.adjoint() * &self.rx;
        let l = self.num_paths();
        let mut c = CMatrix::zeros(l, l);
        for k in 0..n {
            let d = self.path_coefficients(k, n);
            for i in 0..l {
                for j in 0..l {
                    c[(i, j)] += d[i].conj() * g[(i, j)] * d[j];
                }
            }
        }
        c
    }
}

/// `H[k] = sum_l alpha_l exp(-j 2 pi f_k tau_l) a_rx(ms_l) a_tx(bs_l)^T`,
/// `f_k = k B / N`, for `k = 0..N`.
pub fn freq_response(ch: &MultipathChannel, tx: &ArrayGeometry, rx: &ArrayGeometry, n_subcarriers: usize) -> Result<Vec<CMatrix>> {
    if n_subcarriers == 0 {
        return Err(invalid("need at least one subcarrier"));
    }
    let factors = PathFactors::new(ch, tx, rx);
    Ok((0..n_subcarriers).map(|k| factors.subcarrier_matrix(k, n_subcarriers)).collect())
}

/// Element index -> delay advance (seconds) applied at the BS.
pub type DelayCompensation = BTreeMap<usize, f64>;

/// Flat channel after per-element delay pre-compensation at a lens BS.
///
/// Column `m` collects each path `l` with the residual phase
/// `exp(-j 2 pi (B/2) (tau_l - c_m))`, where `c_m` is the element's advance
/// (zero if absent from the map). Matched elements carry no residual.
pub fn effective_flat_channel(
    ch: &MultipathChannel,
    tx: &LensArrayGeometry,
    rx: &ArrayGeometry,
    compensation: &DelayCompensation,
) -> Result<CMatrix> {
    if let Some((&m, _)) = compensation.iter().find(|(&m, _)| m >= tx.len()) {
        return Err(invalid(format!("compensated element {m} outside a {}-element lens", tx.len())));
    }
    let f_eff = ch.bandwidth_hz / 2.0;
    let mut h = CMatrix::zeros(rx.len(), tx.len());
    for p in &ch.paths {
        let a_rx = rx.response(p.ms_dir);
        let a_tx = tx.response(p.bs_dir);
        for (m, &a) in a_tx.iter().enumerate() {
            if a == 0.0 {
                continue;
            }
            let residual = p.delay - compensation.get(&m).copied().unwrap_or(0.0);
            let coeff = p.gain * a * Complex64::from_polar(1.0, -2.0 * PI * f_eff * residual);
            for r in 0..a_rx.len() {
                h[(r, m)] += a_rx[r] * coeff;
            }
        }
    }
    Ok(h)
}

/// `|alpha_l|^2 |a_m(bs_l)|^2`, indexed `[path][element]`.
pub fn lens_path_powers(ch: &MultipathChannel, geom: &LensArrayGeometry) -> Vec<Vec<f64>> {
    ch.paths
        .iter()
        .map(|p| {
            let g = p.gain.norm_sqr();
            geom.response(p.bs_dir).into_iter().map(|a| g * a * a).collect()
        })
        .collect()
}

/// Fraction of the power landing on the selected elements that comes from
/// paths other than each element's assigned path. Zero means the paths are
/// perfectly separated on the selection.
pub fn leakage_ratio(ch: &MultipathChannel, tx: &LensArrayGeometry, selection: &[usize], assignment: &[usize]) -> Result<f64> {
    if selection.is_empty() {
        return Err(invalid("leakage needs a non-empty selection"));
    }
    if selection.len() != assignment.len() {
        return Err(invalid("selection and assignment lengths differ"));
    }
    if let Some(&m) = selection.iter().find(|&&m| m >= tx.len()) {
        return Err(invalid(format!("selected element {m} outside a {}-element lens", tx.len())));
    }
    if let Some(&l) = assignment.iter().find(|&&l| l >= ch.num_paths()) {
        return Err(invalid(format!("assigned path {l} but channel has {}", ch.num_paths())));
    }
    let powers = lens_path_powers(ch, tx);
    let (mut total, mut foreign) = (0.0, 0.0);
    for (&m, &own) in selection.iter().zip(assignment) {
        for (l, row) in powers.iter().enumerate() {
            total += row[m];
            if l != own {
                foreign += row[m];
            }
        }
    }
    Ok(if total > 0.0 { foreign / total } else { 0.0 })
}

/// On-disk form: angles in degrees, delays in nanoseconds.
#[derive(Debug, Clone, Serialize, Deserialize)]
struct ChannelRecord {
    carrier_hz: f64,
    bandwidth_hz: f64,
    t_max_ns: f64,
    paths: Vec<PathRecord>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
struct PathRecord {
    bs_elevation_deg: f64,
    bs_azimuth_deg: f64,
    ms_elevation_deg: f64,
    ms_azimuth_deg: f64,
    delay_ns: f64,
    gain: GainRecord,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
struct GainRecord {
    re: f64,
    im: f64,
}

impl From<MultipathChannel> for ChannelRecord {
    fn from(ch: MultipathChannel) -> Self {
        ChannelRecord {
            carrier_hz: ch.carrier_hz,
            bandwidth_hz: ch.bandwidth_hz,
            t_max_ns: ch.t_max * 1e9,
            paths: ch
                .paths
                .iter()
                .map(|p| PathRecord {
                    bs_elevation_deg: p.bs_dir.theta.to_degrees(),
                    bs_azimuth_deg: p.bs_dir.phi.to_degrees(),
                    ms_elevation_deg: p.ms_dir.theta.to_degrees(),
                    ms_azimuth_deg: p.ms_dir.phi.to_degrees(),
                    delay_ns: p.delay * 1e9,
                    gain: GainRecord { re: p.gain.re, im: p.gain.im },
                })
                .collect(),
        }
    }
}

impl TryFrom<ChannelRecord> for MultipathChannel {
    type Error = crate::error::Error;

    fn try_from(r: ChannelRecord) -> Result<Self> {
        let paths = r
            .paths
            .iter()
            .map(|p| PathComponent {
                bs_dir: Direction::from_degrees(p.bs_elevation_deg, p.bs_azimuth_deg),
                ms_dir: Direction::from_degrees(p.ms_elevation_deg, p.ms_azimuth_deg),
                delay: p.delay_ns * 1e-9,
                gain: Complex64::new(p.gain.re, p.gain.im),
            })
            .collect();
        let mut ch = MultipathChannel::new(paths, r.bandwidth_hz, r.t_max_ns * 1e-9)?;
        ch.carrier_hz = r.carrier_hz;
        Ok(ch)
    }
}
