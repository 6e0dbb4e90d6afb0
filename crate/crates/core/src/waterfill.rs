//! Water-filling power allocation over parallel Gaussian channels.

use serde::{Deserialize, Serialize};

use crate::error::{invalid, Result};

/// Relative tolerance on the power constraint reached by bisection.
pub const POWER_TOLERANCE: f64 = 1e-9;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Allocation {
    /// Power per channel, aligned with the input gains. Empty when no gain
    /// is positive.
    pub powers: Vec<f64>,
    /// Water level `nu`; zero when nothing is allocated.
    pub water_level: f64,
    /// Achieved `sum_i log2(1 + p_i g_i)`.
    pub rate: f64,
}

impl Allocation {
    fn empty() -> Self {
        Self { powers: Vec::new(), water_level: 0.0, rate: 0.0 }
    }
}

/// Sum rate `sum log2(1 + p_i g_i)` of an arbitrary allocation.
pub fn sum_rate(gains: &[f64], powers: &[f64]) -> f64 {
    gains
        .iter()
        .zip(powers)
        .map(|(g, p)| (p * g).ln_1p())
        .sum::<f64>()
        / std::f64::consts::LN_2
}

/// Maximizes `sum log2(1 + p_i g_i)` subject to `sum p_i = total_power`,
/// `p_i >= 0`. The optimum is `p_i = max(0, nu - 1/g_i)`.
///
/// The water level is bracketed and bisected until the power constraint holds
/// to [`POWER_TOLERANCE`], then snapped to the closed form for the active set
/// found. Zero gains receive zero power.
pub fn waterfill(gains: &[f64], total_power: f64) -> Result<Allocation> {
    if !(total_power >= 0.0 && total_power.is_finite()) {
        return Err(invalid(format!("total power must be finite and non-negative, got {total_power}")));
    }
    if let Some(g) = gains.iter().find(|g| !(**g >= 0.0 && g.is_finite())) {
        return Err(invalid(format!("channel gains must be finite and non-negative, got {g}")));
    }
    let Some(g_max) = gains.iter().copied().filter(|&g| g > 0.0).reduce(f64::max) else {
        return Ok(Allocation::empty());
    };
    if total_power == 0.0 {
        return Ok(Allocation { powers: vec![0.0; gains.len()], water_level: 0.0, rate: 0.0 });
    }

    let allocated = |nu: f64| -> f64 {
        gains
            .iter()
            .filter(|&&g| g > 0.0)
            .map(|&g| (nu - 1.0 / g).max(0.0))
            .sum()
    };

    // allocated(lo) = 0 and allocated(hi) >= total_power
    let mut lo = 1.0 / g_max;
    let mut hi = lo + total_power;
    let mut nu = hi;
    for _ in 0..200 {
        nu = 0.5 * (lo + hi);
        let p = allocated(nu);
        if (p - total_power).abs() < POWER_TOLERANCE * total_power {
            break;
        }
        if p > total_power {
            hi = nu;
        } else {
            lo = nu;
        }
    }

    // Closed-form level on the active set found by bisection.
    let (count, inv_sum) = gains
        .iter()
        .filter(|&&g| g > 0.0 && nu > 1.0 / g)
        .fold((0usize, 0.0), |(n, s), &g| (n + 1, s + 1.0 / g));
    if count > 0 {
        let exact = (total_power + inv_sum) / count as f64;
        let consistent = gains
            .iter()
            .filter(|&&g| g > 0.0)
            .all(|&g| (nu > 1.0 / g) == (exact > 1.0 / g));
        if consistent {
            nu = exact;
        }
    }

    let powers: Vec<f64> = gains
        .iter()
        .map(|&g| if g > 0.0 { (nu - 1.0 / g).max(0.0) } else { 0.0 })
        .collect();
    let rate = sum_rate(gains, &powers);
    Ok(Allocation { powers, water_level: nu, rate })
}
