//! Line-of-sight optical channel gains.
//!
//! Every access point points straight down. The gain `h[u][a]` is the
//! fraction of the emitted power that lands on user `u`'s circular detector,
//! found by integrating the rotationally symmetric beam intensity over the
//! disc in polar coordinates about the beam axis. The angular extent of the
//! disc at each radius is known in closed form, which leaves a 1-D radial
//! integral for the adaptive Gauss–Kronrod rule.

use alloc::vec::Vec;
use core::f64::consts::PI;
#[allow(unused_imports)]
use num_traits::Float as _;

use crate::beam::{effective_beam, BeamSpec, LensSpec};
use crate::error::{Error, Result};
use crate::linalg::Matrix;
use crate::quadrature::{integrate, Tolerance};
use crate::scene::Scene;

/// Beam intensity beyond this many beam radii is treated as zero.
pub const RADIAL_CUTOFF: f64 = 8.0;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LinkGeometry {
    /// Vertical emitter-to-receive-plane distance.
    pub distance: f64,
    /// Horizontal offset of the detector centre from the beam axis.
    pub offset: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ChannelMatrix {
    gains: Matrix,
    geometry: Vec<LinkGeometry>,
}

impl ChannelMatrix {
    /// Wraps raw gains; geometry is left at zero. Gains must lie in `[0, 1]`.
    pub fn from_gains(gains: Matrix) -> Result<Self> {
        if gains.iter().any(|g| !(0.0..=1.0).contains(g)) {
            return Err(Error::invalid("gains", "every entry must lie in [0, 1]"));
        }
        let n = gains.rows() * gains.cols();
        Ok(ChannelMatrix {
            gains,
            geometry: alloc::vec![LinkGeometry { distance: 0.0, offset: 0.0 }; n],
        })
    }

    /// `U × A`.
    pub fn gains(&self) -> &Matrix {
        &self.gains
    }

    pub fn users(&self) -> usize {
        self.gains.rows()
    }

    pub fn aps(&self) -> usize {
        self.gains.cols()
    }

    pub fn geometry(&self, user: usize, ap: usize) -> LinkGeometry {
        self.geometry[user * self.aps() + ap]
    }
}

/// Fraction of emitted power collected by a disc of `aperture_radius` whose
/// centre is `rho` off the beam axis at distance `z` from the emitter.
pub fn captured_fraction(
    beam: &BeamSpec,
    lens: Option<&LensSpec>,
    z: f64,
    rho: f64,
    aperture_radius: f64,
) -> Result<f64> {
    captured_fraction_with(beam, lens, z, rho, aperture_radius, Tolerance::default())
}

pub fn captured_fraction_with(
    beam: &BeamSpec,
    lens: Option<&LensSpec>,
    z: f64,
    rho: f64,
    aperture_radius: f64,
    tol: Tolerance,
) -> Result<f64> {
    if !(z > 0.0) {
        return Err(Error::Domain("link distance must be positive"));
    }
    if !(rho >= 0.0) {
        return Err(Error::Domain("lateral offset must be non-negative"));
    }
    if !(aperture_radius > 0.0) {
        return Err(Error::Domain("aperture radius must be positive"));
    }
    let eff = effective_beam(beam, lens)?;
    let z_eff = z - eff.waist_offset;
    if !(z_eff > 0.0) {
        return Err(Error::Domain("receiver lies inside the lens focus region"));
    }
    let w = eff.beam.radius_at(z_eff);
    Ok(disc_integral(&eff.beam, w, rho, aperture_radius, tol))
}

fn disc_integral(beam: &BeamSpec, w: f64, rho: f64, a: f64, tol: Tolerance) -> f64 {
    let r_max = (rho + a).min(RADIAL_CUTOFF * w);
    let r_min = (rho - a).max(0.0);
    if r_min >= r_max {
        return 0.0;
    }
    let radial = |r: f64| beam.intensity_with_radius(r, w) * r;
    let mut total = 0.0;
    // full circles fit inside the disc up to a - rho
    let inner = (a - rho).min(r_max);
    if inner > 0.0 {
        total += 2.0 * PI * integrate(radial, 0.0, inner, tol).value;
    }
    let lo = r_min.max(inner.max(0.0));
    if rho > 0.0 && lo < r_max {
        let arc = |r: f64| {
            let c = (r * r + rho * rho - a * a) / (2.0 * r * rho);
            2.0 * c.clamp(-1.0, 1.0).acos()
        };
        total += integrate(|r| radial(r) * arc(r), lo, r_max, tol).value;
    }
    total.clamp(0.0, 1.0)
}

/// LOS gain contributed by reflections off room surfaces. Only direct paths
/// are modelled.
pub fn reflection_gain(_scene: &Scene, _user: usize, _ap: usize) -> f64 {
    0.0
}

pub fn build_channel_matrix(scene: &Scene) -> Result<ChannelMatrix> {
    let (nu, na) = (scene.users.len(), scene.aps.len());
    let mut gains = Matrix::zeros(nu, na);
    let mut geometry = Vec::with_capacity(nu * na);
    for (u, user) in scene.users.iter().enumerate() {
        for (a, ap) in scene.aps.iter().enumerate() {
            let z = scene.link_height(a);
            let dx = user.position[0] - ap.position[0];
            let dy = user.position[1] - ap.position[1];
            let rho = dx.hypot(dy);
            geometry.push(LinkGeometry {
                distance: z,
                offset: rho,
            });
            let incidence = rho.atan2(z);
            if incidence > user.fov_half_angle {
                continue;
            }
            let mut h =
                captured_fraction(&ap.beam, ap.lens.as_ref(), z, rho, user.aperture_radius())?;
            if scene.incidence_cosine {
                h *= incidence.cos();
            }
            gains[(u, a)] = (h + reflection_gain(scene, u, a)).min(1.0);
        }
    }
    Ok(ChannelMatrix { gains, geometry })
}
