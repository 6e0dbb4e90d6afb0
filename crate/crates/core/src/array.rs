//! Antenna array geometries and direction-dependent array responses.
//!
//! Two base-station architectures share one effective aperture `d_y x d_z`
//! (in wavelengths):
//!
//! * a lens antenna array whose elements sit on the focal surface at angles
//!   `sin(theta_m) = m_e / d_z`, `sin(phi_m) = m_a / (d_y cos(theta_m))`, with a
//!   real sinc-type response;
//! * a uniform planar array (UPA) with half-wavelength spacing whose element
//!   amplitude is scaled so that `|a|^2 = d_y * d_z` in every direction.
//!
//! Angles are radians internally. `theta` is elevation, `phi` is azimuth.

use std::f64::consts::{FRAC_PI_2, PI};

use nalgebra::DVector;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{invalid, Result};

/// Below this magnitude a sinc argument is treated as exactly zero, and
/// arguments this close to a nonzero integer land exactly on a null.
pub const SINC_SNAP: f64 = 1e-12;

/// Slack for the `floor` in the element placement rule, so that products
/// such as `10 * sin(30 deg) = 4.999...` land on the intended integer.
const FLOOR_SLACK: f64 = 1e-9;

/// Normalized sinc, `sin(pi x) / (pi x)`.
pub fn sinc(x: f64) -> f64 {
    if x.abs() < SINC_SNAP {
        let px = PI * x;
        return 1.0 - px * px / 6.0;
    }
    let nearest = x.round();
    let frac = x - nearest;
    if frac.abs() < SINC_SNAP {
        return 0.0;
    }
    // sin(pi x) = (-1)^n sin(pi (x - n)) keeps precision for large |x|.
    let sign = if (nearest as i64) % 2 == 0 { 1.0 } else { -1.0 };
    sign * (PI * frac).sin() / (PI * x)
}

/// Signal direction: elevation `theta` and azimuth `phi`, in radians.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Direction {
    pub theta: f64,
    pub phi: f64,
}

impl Direction {
    pub fn new(theta: f64, phi: f64) -> Self {
        debug_assert!(
            theta.abs() <= FRAC_PI_2 + 1e-12 && phi.abs() <= FRAC_PI_2 + 1e-12,
            "direction out of range: ({theta}, {phi})"
        );
        Self { theta, phi }
    }

    pub fn from_degrees(theta_deg: f64, phi_deg: f64) -> Self {
        Self::new(theta_deg.to_radians(), phi_deg.to_radians())
    }

    pub const BROADSIDE: Direction = Direction { theta: 0.0, phi: 0.0 };
}

/// One element of a lens array, identified by its elevation and azimuth indices.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LensElement {
    pub m_e: i32,
    pub m_a: i32,
    pub theta: f64,
    pub phi: f64,
}

impl LensElement {
    pub fn direction(&self) -> Direction {
        Direction::new(self.theta, self.phi)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LensArrayGeometry {
    pub d_y: f64,
    pub d_z: f64,
    pub theta_cov: f64,
    pub phi_cov: f64,
    elements: Vec<LensElement>,
}

impl LensArrayGeometry {
    /// Places elements on the focal surface per the sine-spaced rule and
    /// returns them ordered lexicographically by `(m_e, m_a)`.
    ///
    /// A coverage angle of zero collapses that axis to index 0.
    pub fn new(d_y: f64, d_z: f64, theta_cov: f64, phi_cov: f64) -> Result<Self> {
        if !(d_y > 0.0 && d_y.is_finite()) || !(d_z > 0.0 && d_z.is_finite()) {
            return Err(invalid(format!(
                "lens aperture must be positive, got {d_y} x {d_z}"
            )));
        }
        for (name, cov) in [("elevation", theta_cov), ("azimuth", phi_cov)] {
            if !(0.0..=PI).contains(&cov) {
                return Err(invalid(format!(
                    "{name} coverage must lie in [0, pi], got {cov}"
                )));
            }
        }

        let max_e = (d_z * (theta_cov / 2.0).sin() + FLOOR_SLACK).floor() as i32;
        let mut elements = Vec::new();
        for m_e in -max_e..=max_e {
            let sin_theta = m_e as f64 / d_z;
            let cos_theta = (1.0 - sin_theta * sin_theta).max(0.0).sqrt();
            let theta = sin_theta.asin();
            let row_width = d_y * cos_theta;
            let max_a = (row_width * (phi_cov / 2.0).sin() + FLOOR_SLACK).floor() as i32;
            for m_a in -max_a..=max_a {
                let phi = (m_a as f64 / row_width).clamp(-1.0, 1.0).asin();
                elements.push(LensElement { m_e, m_a, theta, phi });
            }
        }
        Ok(Self { d_y, d_z, theta_cov, phi_cov, elements })
    }

    pub fn from_degrees(d_y: f64, d_z: f64, theta_cov_deg: f64, phi_cov_deg: f64) -> Result<Self> {
        Self::new(d_y, d_z, theta_cov_deg.to_radians(), phi_cov_deg.to_radians())
    }

    pub fn elements(&self) -> &[LensElement] {
        &self.elements
    }

    pub fn len(&self) -> usize {
        self.elements.len()
    }

    pub fn is_empty(&self) -> bool {
        self.elements.is_empty()
    }

    pub fn index_of(&self, m_e: i32, m_a: i32) -> Option<usize> {
        self.elements
            .binary_search_by(|el| (el.m_e, el.m_a).cmp(&(m_e, m_a)))
            .ok()
    }

    pub fn covers(&self, dir: Direction) -> bool {
        const EPS: f64 = 1e-12;
        dir.theta.abs() <= self.theta_cov / 2.0 + EPS && dir.phi.abs() <= self.phi_cov / 2.0 + EPS
    }

    /// Peak response magnitude, `sqrt(d_y d_z)`.
    pub fn peak_gain(&self) -> f64 {
        (self.d_y * self.d_z).sqrt()
    }

    /// Real sinc-type response for `dir`, one entry per element:
    /// `sqrt(d_y d_z) sinc(m_e - d_z sin(theta)) sinc(m_a - d_y cos(theta) sin(phi))`.
    pub fn response(&self, dir: Direction) -> Vec<f64> {
        let scale = self.peak_gain();
        let elev = self.d_z * dir.theta.sin();
        let azim = self.d_y * dir.theta.cos() * dir.phi.sin();
        self.elements
            .iter()
            .map(|el| scale * sinc(el.m_e as f64 - elev) * sinc(el.m_a as f64 - azim))
            .collect()
    }
}

/// Free-function form of [`LensArrayGeometry::new`].
pub fn build_lens_geometry(d_y: f64, d_z: f64, theta_cov: f64, phi_cov: f64) -> Result<LensArrayGeometry> {
    LensArrayGeometry::new(d_y, d_z, theta_cov, phi_cov)
}

pub fn lens_response(geom: &LensArrayGeometry, dir: Direction) -> Vec<f64> {
    geom.response(dir)
}

/// Rectangular grid of `n_rows x n_cols` elements, rows along elevation.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct UpaGeometry {
    pub n_rows: usize,
    pub n_cols: usize,
    pub spacing: f64,
    pub amplitude_scale: f64,
}

impl UpaGeometry {
    pub fn new(n_rows: usize, n_cols: usize, spacing: f64, amplitude_scale: f64) -> Result<Self> {
        if n_rows == 0 || n_cols == 0 {
            return Err(invalid(format!("UPA needs at least one element, got {n_rows} x {n_cols}")));
        }
        if !(spacing > 0.0) || !(amplitude_scale > 0.0) {
            return Err(invalid("UPA spacing and amplitude must be positive"));
        }
        Ok(Self { n_rows, n_cols, spacing, amplitude_scale })
    }

    /// Unit-amplitude elements.
    pub fn unit(n_rows: usize, n_cols: usize, spacing: f64) -> Result<Self> {
        Self::new(n_rows, n_cols, spacing, 1.0)
    }

    /// UPA filling a `d_y x d_z` aperture, with element amplitude chosen so
    /// the steering vector carries `d_y * d_z` total power.
    pub fn aperture_matched(d_y: f64, d_z: f64, spacing: f64) -> Result<Self> {
        if !(d_y > 0.0) || !(d_z > 0.0) || !(spacing > 0.0) {
            return Err(invalid("aperture and spacing must be positive"));
        }
        let n_rows = (d_z / spacing).round().max(1.0) as usize;
        let n_cols = (d_y / spacing).round().max(1.0) as usize;
        let amplitude = (d_y * d_z / (n_rows * n_cols) as f64).sqrt();
        Self::new(n_rows, n_cols, spacing, amplitude)
    }

    pub fn len(&self) -> usize {
        self.n_rows * self.n_cols
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// Steering vector, row-major over (row p, column q):
    /// `amplitude * exp(j 2 pi spacing (p sin(theta) + q cos(theta) sin(phi)))`.
    pub fn response(&self, dir: Direction) -> DVector<Complex64> {
        let k = 2.0 * PI * self.spacing;
        let u = dir.theta.sin();
        let v = dir.theta.cos() * dir.phi.sin();
        DVector::from_iterator(
            self.len(),
            (0..self.n_rows).flat_map(|p| {
                (0..self.n_cols).map(move |q| {
                    Complex64::from_polar(self.amplitude_scale, k * (p as f64 * u + q as f64 * v))
                })
            }),
        )
    }
}

pub fn upa_response(geom: &UpaGeometry, dir: Direction) -> DVector<Complex64> {
    geom.response(dir)
}

/// Either array architecture, for code that works on both.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum ArrayGeometry {
    Lens(LensArrayGeometry),
    Upa(UpaGeometry),
}

impl ArrayGeometry {
    pub fn len(&self) -> usize {
        match self {
            ArrayGeometry::Lens(g) => g.len(),
            ArrayGeometry::Upa(g) => g.len(),
        }
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn response(&self, dir: Direction) -> DVector<Complex64> {
        match self {
            ArrayGeometry::Lens(g) => {
                DVector::from_iterator(g.len(), g.response(dir).into_iter().map(Complex64::from))
            }
            ArrayGeometry::Upa(g) => g.response(dir),
        }
    }
}

impl From<LensArrayGeometry> for ArrayGeometry {
    fn from(g: LensArrayGeometry) -> Self {
        ArrayGeometry::Lens(g)
    }
}

impl From<UpaGeometry> for ArrayGeometry {
    fn from(g: UpaGeometry) -> Self {
        ArrayGeometry::Upa(g)
    }
}

/// Per-element received power for one direction.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PowerMap {
    pub direction: Direction,
    pub out_of_coverage: bool,
    /// `(m_e, m_a, |a_m|^2)` in element order.
    pub entries: Vec<(i32, i32, f64)>,
    pub argmax: (i32, i32),
    /// Power at the strongest element over `d_y d_z`.
    pub argmax_fraction: f64,
    /// Power summed over all elements over `d_y d_z`.
    pub total_fraction: f64,
}

pub fn power_response_map(geom: &LensArrayGeometry, dirs: &[Direction]) -> Result<Vec<PowerMap>> {
    if dirs.is_empty() {
        return Err(invalid("power_response_map needs at least one direction"));
    }
    let norm = geom.d_y * geom.d_z;
    Ok(dirs
        .iter()
        .map(|&dir| {
            let entries: Vec<(i32, i32, f64)> = geom
                .elements()
                .iter()
                .zip(geom.response(dir))
                .map(|(el, a)| (el.m_e, el.m_a, a * a))
                .collect();
            // First maximum wins, i.e. lexicographic tie-break.
            let best = entries
                .iter()
                .fold(None::<&(i32, i32, f64)>, |best, e| match best {
                    Some(b) if b.2 >= e.2 => Some(b),
                    _ => Some(e),
                })
                .expect("lens geometry always has the broadside element");
            let total: f64 = entries.iter().map(|e| e.2).sum();
            PowerMap {
                direction: dir,
                out_of_coverage: !geom.covers(dir),
                argmax: (best.0, best.1),
                argmax_fraction: best.2 / norm,
                total_fraction: total / norm,
                entries,
            }
        })
        .collect())
}
