use super::{ModalGains, SchemeConfig, SchemeKind, SchemeResult};
use crate::array::{ArrayGeometry, UpaGeometry};
use crate::channel::{MultipathChannel, PathFactors};
use crate::error::{invalid, Result};
use crate::linalg::{hermitian_eigenvalues, CMatrix};

/// Eigenmode gains of `A_rx D_k B` over every subcarrier, with `core = B B^H`.
pub(super) fn subcarrier_modes(factors: &PathFactors, core: &CMatrix, cfg: &SchemeConfig) -> ModalGains {
    let n = cfg.n_subcarriers;
    let streams = factors.rx.nrows();
    let mut gains = Vec::with_capacity(n * streams);
    for k in 0..n {
        gains.extend(hermitian_eigenvalues(factors.rx_gram(k, n, core)));
    }
    ModalGains { gains, blocks: n, streams, overhead: cfg.cp_factor() }
}

/// Fully digital MIMO-OFDM on a UPA: eigenmode transmission on every
/// subcarrier with one water-filling across all subcarriers and modes.
pub fn ofdm_digital_rate(
    ch: &MultipathChannel,
    bs: &UpaGeometry,
    ms: &ArrayGeometry,
    cfg: &SchemeConfig,
) -> Result<Vec<SchemeResult>> {
    cfg.check(SchemeKind::UpaDigitalOfdm, ch.mu())?;
    if cfg.m_rf != bs.len() {
        return Err(invalid(format!(
            "fully digital operation needs one RF chain per element ({}), got {}",
            bs.len(),
            cfg.m_rf
        )));
    }
    let factors = PathFactors::new(ch, &ArrayGeometry::Upa(bs.clone()), ms);
    let modes = subcarrier_modes(&factors, &factors.tx_core(), cfg);
    modes.results(&cfg.snr_db, |_| {})
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::array::Direction;
    use crate::channel::{freq_response, sample_channel, ChannelSamplingParams, PathComponent};
    use crate::linalg::squared_singular_values;
    use crate::waterfill::waterfill;
    use approx::assert_abs_diff_eq;
    use num_complex::Complex64;
    use rand::SeedableRng;

    fn ms() -> ArrayGeometry {
        UpaGeometry::unit(2, 2, 0.5).unwrap().into()
    }

    fn small_bs() -> UpaGeometry {
        UpaGeometry::aperture_matched(3.0, 2.0, 0.5).unwrap()
    }

    fn channel(seed: u64) -> MultipathChannel {
        sample_channel(&ChannelSamplingParams::default(), &mut rand_chacha::ChaCha8Rng::seed_from_u64(seed)).unwrap()
    }

    #[test]
    fn flat_channel_pays_only_the_cp() {
        let bs = small_bs();
        let ch = channel(1).without_delays();
        let snr_db = 12.0;
        let cfg = SchemeConfig::digital(bs.len()).with_snr(vec![snr_db]);
        let se = ofdm_digital_rate(&ch, &bs, &ms(), &cfg).unwrap()[0].spectral_efficiency;
        let h = freq_response(&ch, &bs.clone().into(), &ms(), 1).unwrap().remove(0);
        let flat = waterfill(&squared_singular_values(&h), 10f64.powf(snr_db / 10.0)).unwrap().rate;
        assert_abs_diff_eq!(se, 512.0 / 562.0 * flat, epsilon = 1e-9);

        let mut no_cp = cfg.clone();
        no_cp.cp_len = 0;
        let ch0 = MultipathChannel { t_max: 0.0, ..ch };
        let se0 = ofdm_digital_rate(&ch0, &bs, &ms(), &no_cp).unwrap()[0].spectral_efficiency;
        assert_abs_diff_eq!(se0, flat, epsilon = 1e-9);
    }

    #[test]
    fn two_subcarrier_siso_matches_hand_waterfilling() {
        // 1x1 arrays, two paths: H[k] = a0 + a1 exp(-j pi k tau1 B) with N = 2
        let one = UpaGeometry::unit(1, 1, 0.5).unwrap();
        let (a0, a1) = (Complex64::new(0.8, 0.1), Complex64::from_polar(0.5, 1.0));
        let tau = 37e-9;
        let paths = vec![
            PathComponent { bs_dir: Direction::BROADSIDE, ms_dir: Direction::BROADSIDE, delay: 0.0, gain: a0 },
            PathComponent { bs_dir: Direction::BROADSIDE, ms_dir: Direction::BROADSIDE, delay: tau, gain: a1 },
        ];
        let ch = MultipathChannel::new(paths, 500e6, 100e-9).unwrap();
        let g0 = (a0 + a1).norm_sqr();
        let g1 = (a0 + a1 * Complex64::from_polar(1.0, -2.0 * std::f64::consts::PI * 250e6 * tau)).norm_sqr();
        let snr = 10f64.powf(0.3);
        // closed form with both channels active: nu = (2 P + 1/g0 + 1/g1) / 2
        let nu = (2.0 * snr + 1.0 / g0 + 1.0 / g1) / 2.0;
        assert!(nu > 1.0 / g0 && nu > 1.0 / g1);
        let hand = ((nu * g0).log2() + (nu * g1).log2()) / 2.0 * 2.0 / 52.0;
        let cfg = SchemeConfig::digital(1).with_ofdm(2, 50).with_snr(vec![3.0]);
        let se = ofdm_digital_rate(&ch, &one, &one.clone().into(), &cfg).unwrap()[0].spectral_efficiency;
        assert_abs_diff_eq!(se, hand, epsilon = 1e-9);
    }

    #[test]
    fn monotone_in_snr() {
        let bs = small_bs();
        let ch = channel(3);
        let snrs: Vec<f64> = (-2..=6).map(|i| 5.0 * i as f64).collect();
        let r = ofdm_digital_rate(&ch, &bs, &ms(), &SchemeConfig::digital(bs.len()).with_snr(snrs).with_ofdm(64, 50)).unwrap();
        for w in r.windows(2) {
            assert!(w[1].spectral_efficiency >= w[0].spectral_efficiency);
        }
    }

    #[test]
    fn rejects_short_cp_and_wrong_rf_count() {
        let bs = small_bs();
        let ch = channel(3);
        let cfg = SchemeConfig::digital(bs.len()).with_ofdm(64, 10);
        assert!(ofdm_digital_rate(&ch, &bs, &ms(), &cfg).is_err());
        assert!(ofdm_digital_rate(&ch, &bs, &ms(), &SchemeConfig::digital(3)).is_err());
    }
}
