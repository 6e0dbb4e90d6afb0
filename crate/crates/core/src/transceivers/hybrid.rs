//! Hybrid analog/digital OFDM on a UPA.
//!
//! RF beams come from a beamsteering codebook on a uniform azimuth x
//! elevation grid. Beams are picked greedily: each step takes the codeword
//! whose component orthogonal to the beams already chosen carries the most
//! wideband energy `sum_k |H[k] w|^2`, then Gram-Schmidt removes that
//! direction from every remaining codeword. The baseband then sees the
//! channel restricted to the orthonormal span of the chosen beams.

use nalgebra::DVector;
use num_complex::Complex64;

use super::ofdm::subcarrier_modes;
use super::{SchemeConfig, SchemeKind, SchemeResult};
use crate::array::{ArrayGeometry, Direction, UpaGeometry};
use crate::channel::{AngleRange, MultipathChannel, PathFactors};
use crate::error::{invalid, Result};
use crate::linalg::CMatrix;

/// Residual norm below which a codeword is treated as lying in the span of
/// the beams already chosen.
const SPAN_TOLERANCE: f64 = 1e-10;

#[derive(Debug, Clone, PartialEq)]
pub struct CodebookEntry {
    /// Steering direction; `None` for codewords not built from a direction.
    pub direction: Option<Direction>,
    /// Unit-norm transmit weights.
    pub vector: DVector<Complex64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Codebook {
    pub entries: Vec<CodebookEntry>,
}

impl Codebook {
    /// Codebook from arbitrary weight vectors, normalized to unit norm.
    pub fn from_vectors(vectors: Vec<DVector<Complex64>>) -> Result<Self> {
        let Some(dim) = vectors.first().map(|v| v.len()) else {
            return Err(invalid("empty codebook"));
        };
        let mut entries = Vec::with_capacity(vectors.len());
        for v in vectors {
            let norm = v.norm();
            if v.len() != dim || !(norm > 0.0) {
                return Err(invalid("codewords must be nonzero and share one length"));
            }
            entries.push(CodebookEntry { direction: None, vector: v / Complex64::from(norm) });
        }
        Ok(Self { entries })
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn dim(&self) -> usize {
        self.entries.first().map_or(0, |e| e.vector.len())
    }
}

/// Square beamsteering codebook: `size` must be `n * n`, giving an
/// `n x n` azimuth x elevation grid.
pub fn build_codebook(size: usize, az_range: AngleRange, el_range: AngleRange, geom: &UpaGeometry) -> Result<Codebook> {
    let side = (size as f64).sqrt().round() as usize;
    if size == 0 || side * side != size {
        return Err(invalid(format!(
            "codebook size {size} does not factor into a square azimuth x elevation grid"
        )));
    }
    build_codebook_grid(side, side, az_range, el_range, geom)
}

/// `n_az x n_el` grid with points at the midpoints of equal sub-intervals.
/// Entries are ordered elevation-major. Each vector is the matched transmit
/// beam `conj(a(dir)) / |a(dir)|`, so `a(dir)^T v = |a(dir)|`.
pub fn build_codebook_grid(
    n_az: usize,
    n_el: usize,
    az_range: AngleRange,
    el_range: AngleRange,
    geom: &UpaGeometry,
) -> Result<Codebook> {
    if n_az == 0 || n_el == 0 {
        return Err(invalid("codebook grid needs at least one point per axis"));
    }
    let az_step = az_range.width() / n_az as f64;
    let el_step = el_range.width() / n_el as f64;
    let mut entries = Vec::with_capacity(n_az * n_el);
    for e in 0..n_el {
        let theta = el_range.min() + (e as f64 + 0.5) * el_step;
        for a in 0..n_az {
            let phi = az_range.min() + (a as f64 + 0.5) * az_step;
            let direction = Direction::new(theta, phi);
            let steer = geom.response(direction);
            let norm = steer.norm();
            entries.push(CodebookEntry {
                direction: Some(direction),
                vector: steer.map(|z| z.conj() / norm),
            });
        }
    }
    Ok(Codebook { entries })
}

/// Result of the greedy RF stage.
#[derive(Debug, Clone)]
pub struct BeamSelection {
    /// Codebook indices in selection order.
    pub beams: Vec<usize>,
    /// Orthonormal basis of the chosen beams' span, one column per beam.
    pub basis: CMatrix,
}

/// Greedy Gram-Schmidt beam selection against the wideband transmit
/// covariance `R = conj(A_tx) C A_tx^T` (`A_tx`: `M x L`, `C`: `L x L`).
///
/// Selection stops early if every remaining codeword already lies in the
/// chosen span. Energy ties go to the lowest codebook index.
pub fn greedy_beam_selection(tx: &CMatrix, core: &CMatrix, codebook: &Codebook, m_rf: usize) -> Result<BeamSelection> {
    if codebook.dim() != tx.nrows() {
        return Err(invalid(format!(
            "codebook vectors have length {} but the array has {} elements",
            codebook.dim(),
            tx.nrows()
        )));
    }
    if m_rf == 0 || m_rf > codebook.len() {
        return Err(invalid(format!("m_rf must be in 1..={}, got {m_rf}", codebook.len())));
    }
    let tx_t = tx.transpose();
    let mut residual: Vec<DVector<Complex64>> = codebook.entries.iter().map(|e| e.vector.clone()).collect();
    let mut chosen = vec![false; residual.len()];
    let mut beams = Vec::with_capacity(m_rf);
    let mut basis: Vec<DVector<Complex64>> = Vec::with_capacity(m_rf);

    for _ in 0..m_rf {
        let mut best: Option<(usize, f64)> = None;
        for (c, w) in residual.iter().enumerate() {
            if chosen[c] || w.norm() < SPAN_TOLERANCE {
                continue;
            }
            let t = &tx_t * w;
            let energy = t.dotc(&(core * &t)).re;
            if best.is_none_or(|(_, e)| energy > e) {
                best = Some((c, energy));
            }
        }
        let Some((c, _)) = best else { break };
        chosen[c] = true;

        // second pass against the basis keeps the columns orthonormal
        let mut q = residual[c].clone();
        for b in &basis {
            let proj = b.dotc(&q);
            q -= b * proj;
        }
        let norm = q.norm();
        q /= Complex64::from(norm);
        for w in residual.iter_mut() {
            let proj = q.dotc(w);
            *w -= &q * proj;
        }
        beams.push(c);
        basis.push(q);
    }
    Ok(BeamSelection { beams, basis: CMatrix::from_columns(&basis) })
}

/// Hybrid precoding rate with a freshly built codebook from `cfg`.
pub fn hybrid_rate(ch: &MultipathChannel, bs: &UpaGeometry, ms: &ArrayGeometry, cfg: &SchemeConfig) -> Result<Vec<SchemeResult>> {
    let codebook = build_codebook(cfg.codebook_size, cfg.codebook_azimuth, cfg.codebook_elevation, bs)?;
    hybrid_rate_with_codebook(ch, bs, ms, cfg, &codebook)
}

/// Hybrid precoding rate: greedy RF beams, then fully digital eigenmode
/// transmission over the effective channels `H[k] U`, water-filled jointly
/// across subcarriers, with the cyclic-prefix overhead applied.
pub fn hybrid_rate_with_codebook(
    ch: &MultipathChannel,
    bs: &UpaGeometry,
    ms: &ArrayGeometry,
    cfg: &SchemeConfig,
    codebook: &Codebook,
) -> Result<Vec<SchemeResult>> {
    cfg.check(SchemeKind::UpaHybridOfdm, ch.mu())?;
    let factors = PathFactors::new(ch, &ArrayGeometry::Upa(bs.clone()), ms);
    let selection = greedy_beam_selection(&factors.tx, &factors.wideband_tx_core(cfg.n_subcarriers), codebook, cfg.m_rf)?;
    let projected = factors.tx.transpose() * &selection.basis;
    let core = &projected * projected.adjoint();
    let modes = subcarrier_modes(&factors, &core, cfg);
    modes.results(&cfg.snr_db, |r| r.rf_beams = selection.beams.clone())
}
