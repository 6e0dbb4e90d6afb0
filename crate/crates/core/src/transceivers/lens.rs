use log::warn;
use nalgebra::DMatrix;

use super::{ModalGains, SchemeConfig, SchemeKind, SchemeResult};
use crate::array::{ArrayGeometry, LensArrayGeometry};
use crate::channel::{effective_flat_channel, leakage_ratio, lens_path_powers, DelayCompensation, MultipathChannel};
use crate::error::{invalid, Result};
use crate::linalg::squared_singular_values;

#[derive(Debug, Clone, PartialEq)]
pub struct AntennaSelection {
    /// Element indices, strongest first.
    pub indices: Vec<usize>,
    /// Dominant path of each selected element.
    pub assignment: Vec<usize>,
    /// Power summed over the selected elements.
    pub captured_power: f64,
    /// Power summed over every element.
    pub total_power: f64,
}

impl AntennaSelection {
    pub fn captured_fraction(&self) -> f64 {
        if self.total_power > 0.0 {
            self.captured_power / self.total_power
        } else {
            0.0
        }
    }
}

/// Keeps the `m_rf` elements with the largest total power
/// `sum_l path_powers[l][m]`. Equal powers keep index order.
pub fn select_by_power(path_powers: &[Vec<f64>], m_rf: usize) -> Result<AntennaSelection> {
    if m_rf == 0 {
        return Err(invalid("m_rf must be at least 1"));
    }
    let Some(n) = path_powers.first().map(Vec::len) else {
        return Err(invalid("no paths to select for"));
    };
    if path_powers.iter().any(|row| row.len() != n) {
        return Err(invalid("per-path power rows differ in length"));
    }
    let totals: Vec<f64> = (0..n).map(|m| path_powers.iter().map(|row| row[m]).sum()).collect();
    let keep = if m_rf > n {
        warn!("m_rf = {m_rf} exceeds the {n} available elements; selecting all");
        n
    } else {
        m_rf
    };
    let mut order: Vec<usize> = (0..n).collect();
    // stable: ties stay in index order
    order.sort_by(|&a, &b| totals[b].total_cmp(&totals[a]));
    order.truncate(keep);

    let assignment = order
        .iter()
        .map(|&m| {
            (0..path_powers.len())
                .reduce(|best, l| if path_powers[l][m] > path_powers[best][m] { l } else { best })
                .unwrap_or(0)
        })
        .collect();
    Ok(AntennaSelection {
        captured_power: order.iter().map(|&m| totals[m]).sum(),
        total_power: totals.iter().sum(),
        indices: order,
        assignment,
    })
}

/// Power-based antenna selection on a lens array.
pub fn select_antennas(ch: &MultipathChannel, geom: &LensArrayGeometry, m_rf: usize) -> Result<AntennaSelection> {
    select_by_power(&lens_path_powers(ch, geom), m_rf)
}

/// Single-carrier path division multiplexing over a lens BS.
///
/// Selected elements are advanced by their assigned path's delay, which
/// leaves a flat channel over the selected columns. Its eigenmodes are
/// water-filled; there is no cyclic-prefix overhead.
pub fn lens_sc_pdm_rate(
    ch: &MultipathChannel,
    bs: &LensArrayGeometry,
    ms: &ArrayGeometry,
    cfg: &SchemeConfig,
) -> Result<Vec<SchemeResult>> {
    cfg.check(SchemeKind::LensScPdm, 0.0)?;
    let sel = select_antennas(ch, bs, cfg.m_rf)?;
    let compensation: DelayCompensation = sel
        .indices
        .iter()
        .zip(&sel.assignment)
        .map(|(&m, &l)| (m, ch.paths[l].delay))
        .collect();
    let full = effective_flat_channel(ch, bs, ms, &compensation)?;
    let h = DMatrix::from_fn(full.nrows(), sel.indices.len(), |r, c| full[(r, sel.indices[c])]);

    let streams = sel.indices.len().min(ms.len()).min(ch.num_paths());
    let mut gains = squared_singular_values(&h);
    gains.truncate(streams);
    let leakage = leakage_ratio(ch, bs, &sel.indices, &sel.assignment)?;

    let modes = ModalGains { gains, blocks: 1, streams, overhead: 1.0 };
    modes.results(&cfg.snr_db, |r| {
        r.selected_antennas = sel.indices.clone();
        r.leakage = Some(leakage);
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::array::{Direction, UpaGeometry};
    use crate::channel::{PathComponent, DEFAULT_BANDWIDTH_HZ, DEFAULT_MAX_DELAY_S};
    use approx::assert_abs_diff_eq;
    use num_complex::Complex64;

    fn lens() -> LensArrayGeometry {
        LensArrayGeometry::from_degrees(10.0, 10.0, 60.0, 120.0).unwrap()
    }

    fn one_hot(geom: &LensArrayGeometry, picks: &[(i32, i32)], powers: &[f64]) -> MultipathChannel {
        let paths = picks
            .iter()
            .zip(powers)
            .enumerate()
            .map(|(l, (&(e, a), &p))| PathComponent {
                bs_dir: geom.elements()[geom.index_of(e, a).unwrap()].direction(),
                ms_dir: Direction::from_degrees(5.0 * l as f64, -30.0 + 25.0 * l as f64),
                delay: (15.0 + 30.0 * l as f64) * 1e-9,
                gain: Complex64::from_polar(p.sqrt(), 1.1 * l as f64),
            })
            .collect();
        MultipathChannel::new(paths, DEFAULT_BANDWIDTH_HZ, DEFAULT_MAX_DELAY_S).unwrap()
    }

    #[test]
    fn one_hot_selection_finds_focusing_elements() {
        let g = lens();
        let picks = [(0, 0), (2, -5), (-3, 4)];
        let ch = one_hot(&g, &picks, &[1.0 / 3.0; 3]);
        let sel = select_antennas(&ch, &g, 3).unwrap();
        let mut expected: Vec<usize> = picks.iter().map(|&(e, a)| g.index_of(e, a).unwrap()).collect();
        expected.sort();
        let mut got = sel.indices.clone();
        got.sort();
        assert_eq!(got, expected);
        for (&m, &l) in sel.indices.iter().zip(&sel.assignment) {
            assert_eq!(m, g.index_of(picks[l].0, picks[l].1).unwrap());
        }
        assert_abs_diff_eq!(sel.captured_fraction(), 1.0, epsilon = 1e-12);
    }

    #[test]
    fn single_path_picks_nearest_element() {
        let g = lens();
        // focal point at (1.3, -2.2) in index space
        let theta = (1.3f64 / 10.0).asin();
        let phi = (-2.2 / (10.0 * theta.cos())).asin();
        let ch = MultipathChannel::new(
            vec![PathComponent {
                bs_dir: Direction::new(theta, phi),
                ms_dir: Direction::BROADSIDE,
                delay: 0.0,
                gain: Complex64::new(1.0, 0.0),
            }],
            DEFAULT_BANDWIDTH_HZ,
            DEFAULT_MAX_DELAY_S,
        )
        .unwrap();
        let sel = select_antennas(&ch, &g, 1).unwrap();
        assert_eq!(sel.indices, vec![g.index_of(1, -2).unwrap()]);
    }

    #[test]
    fn fully_correlated_selection_keeps_fraction() {
        let powers = vec![vec![0.25; 40]];
        for m_rf in [1, 7, 40] {
            let sel = select_by_power(&powers, m_rf).unwrap();
            assert_eq!(sel.captured_fraction(), m_rf as f64 / 40.0);
            // ties resolve to the lowest indices
            assert_eq!(sel.indices, (0..m_rf).collect::<Vec<_>>());
        }
    }

    #[test]
    fn oversized_selection_takes_everything() {
        let sel = select_by_power(&[vec![1.0, 2.0, 0.5]], 10).unwrap();
        assert_eq!(sel.indices, vec![1, 0, 2]);
        assert!(select_by_power(&[vec![1.0]], 0).is_err());
        assert!(select_by_power(&[], 1).is_err());
    }

    #[test]
    fn single_antenna_siso_rate() {
        let g = lens();
        let ms: ArrayGeometry = UpaGeometry::unit(1, 1, 0.5).unwrap().into();
        let theta = (0.4f64 / 10.0).asin();
        let ch = MultipathChannel::new(
            vec![PathComponent {
                bs_dir: Direction::new(theta, 0.3),
                ms_dir: Direction::from_degrees(3.0, 20.0),
                delay: 42e-9,
                gain: Complex64::from_polar(1.0, 0.4),
            }],
            DEFAULT_BANDWIDTH_HZ,
            DEFAULT_MAX_DELAY_S,
        )
        .unwrap();
        let snr_db = 7.0;
        let cfg = SchemeConfig::lens(1).with_snr(vec![snr_db]);
        let r = &lens_sc_pdm_rate(&ch, &g, &ms, &cfg).unwrap()[0];
        let a = g.response(ch.paths[0].bs_dir);
        let a_max = a.iter().fold(0.0f64, |m, x| m.max(x.abs()));
        let expected = (1.0 + 10f64.powf(snr_db / 10.0) * a_max * a_max).log2();
        assert_abs_diff_eq!(r.spectral_efficiency, expected, epsilon = 1e-10);
        assert_eq!(r.leakage, Some(0.0));
    }

    #[test]
    fn rate_monotone_in_snr_and_rf_chains() {
        use rand::SeedableRng;
        let g = lens();
        let ms: ArrayGeometry = UpaGeometry::unit(2, 2, 0.5).unwrap().into();
        let params = crate::channel::ChannelSamplingParams::default();
        for seed in 0..20 {
            let ch = crate::channel::sample_channel(&params, &mut rand_chacha::ChaCha8Rng::seed_from_u64(seed)).unwrap();
            let snrs = vec![-10.0, 0.0, 10.0, 20.0, 30.0];
            let mut prev_by_snr = vec![0.0; snrs.len()];
            for m_rf in [1, 2, 3, 8, 16, 40] {
                let r = lens_sc_pdm_rate(&ch, &g, &ms, &SchemeConfig::lens(m_rf).with_snr(snrs.clone())).unwrap();
                for w in r.windows(2) {
                    assert!(w[1].spectral_efficiency >= w[0].spectral_efficiency);
                }
                for (i, res) in r.iter().enumerate() {
                    assert!(res.spectral_efficiency >= prev_by_snr[i] - 1e-9, "seed {seed} m_rf {m_rf}");
                    prev_by_snr[i] = res.spectral_efficiency;
                    assert!(res.selected_antennas.len() <= m_rf);
                }
            }
        }
    }
}
