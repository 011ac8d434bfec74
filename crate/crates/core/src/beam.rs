//! Laguerre–Gaussian beam propagation and the thin-lens waist transform.
//!
//! A multimode VCSEL is modelled as an incoherent superposition of
//! cylindrically symmetric LG modes `(p, l)`, each carrying a fixed fraction
//! of the emitted power. All modes share the fundamental-mode waist `w0` and
//! therefore the same beam radius `w(z)`.

use alloc::vec::Vec;
use core::f64::consts::PI;
#[allow(unused_imports)]
use num_traits::Float as _;

use crate::error::{Error, Result};

/// Highest radial index accepted by [`laguerre`] and [`mode_norm_const`].
pub const MAX_RADIAL_INDEX: u32 = 12;

/// `(p + l)!` must stay inside the factorial table.
const MAX_FACTORIAL: u32 = 20;

const FACTORIALS: [f64; 21] = [
    1.0,
    1.0,
    2.0,
    6.0,
    24.0,
    120.0,
    720.0,
    5040.0,
    40320.0,
    362880.0,
    3628800.0,
    39916800.0,
    479001600.0,
    6227020800.0,
    87178291200.0,
    1307674368000.0,
    20922789888000.0,
    355687428096000.0,
    6402373705728000.0,
    121645100408832000.0,
    2432902008176640000.0,
];

fn check_indices(p: u32, l: u32) -> Result<()> {
    if p > MAX_RADIAL_INDEX {
        return Err(Error::Domain("radial index p above supported limit of 12"));
    }
    if p + l > MAX_FACTORIAL {
        return Err(Error::Domain(
            "mode order p + l above supported limit of 20",
        ));
    }
    Ok(())
}

/// Generalised Laguerre polynomial `L_p^l(x)` from its explicit finite sum.
pub fn laguerre(p: u32, l: u32, x: f64) -> Result<f64> {
    check_indices(p, l)?;
    Ok(laguerre_unchecked(p, l, x))
}

fn laguerre_unchecked(p: u32, l: u32, x: f64) -> f64 {
    let top = FACTORIALS[(p + l) as usize];
    let mut sum = 0.0;
    let mut x_pow = 1.0;
    for m in 0..=p {
        let coeff = top
            / (FACTORIALS[(p - m) as usize]
                * FACTORIALS[(l + m) as usize]
                * FACTORIALS[m as usize]);
        if m % 2 == 0 {
            sum += coeff * x_pow;
        } else {
            sum -= coeff * x_pow;
        }
        x_pow *= x;
    }
    sum
}

/// Amplitude normalisation `A_p^l` (units 1/m) giving each mode unit power.
pub fn mode_norm_const(p: u32, l: u32, w0: f64) -> Result<f64> {
    check_indices(p, l)?;
    Ok(norm_unchecked(p, l, w0))
}

fn norm_unchecked(p: u32, l: u32, w0: f64) -> f64 {
    let ratio = FACTORIALS[p as usize] / FACTORIALS[(p + l) as usize];
    (2.0 * ratio / PI).sqrt() / w0
}

/// One transverse mode and the share of total power it carries.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Mode {
    pub p: u32,
    pub l: u32,
    pub fraction: f64,
}

impl Mode {
    pub fn new(p: u32, l: u32, fraction: f64) -> Self {
        Mode { p, l, fraction }
    }
}

/// Complete description of the light leaving one emitter.
#[derive(Debug, Clone, PartialEq)]
pub struct BeamSpec {
    waist: f64,
    wavelength: f64,
    modes: Vec<Mode>,
}

impl BeamSpec {
    pub fn new(waist: f64, wavelength: f64, modes: Vec<Mode>) -> Result<Self> {
        if !(waist > 0.0 && waist.is_finite()) {
            return Err(Error::invalid("beam_waist", "must be positive and finite"));
        }
        if !(wavelength > 0.0 && wavelength.is_finite()) {
            return Err(Error::invalid("wavelength", "must be positive and finite"));
        }
        if modes.is_empty() {
            return Err(Error::invalid("modes", "at least one mode is required"));
        }
        let mut total = 0.0;
        for (i, m) in modes.iter().enumerate() {
            check_indices(m.p, m.l).map_err(|_| {
                Error::invalid(
                    "modes",
                    alloc::format!("mode {i}: p must be <= 12 and p + l <= 20"),
                )
            })?;
            if !(m.fraction >= 0.0 && m.fraction.is_finite()) {
                return Err(Error::invalid(
                    "modes",
                    alloc::format!("mode {i}: power fraction must be non-negative"),
                ));
            }
            if modes[..i].iter().any(|o| o.p == m.p && o.l == m.l) {
                return Err(Error::invalid(
                    "modes",
                    alloc::format!("duplicate mode (p={}, l={})", m.p, m.l),
                ));
            }
            total += m.fraction;
        }
        if (total - 1.0).abs() > 1e-12 {
            return Err(Error::invalid("modes", "power fractions must sum to 1"));
        }
        Ok(BeamSpec {
            waist,
            wavelength,
            modes,
        })
    }

    /// Single TEM00 mode.
    pub fn fundamental(waist: f64, wavelength: f64) -> Result<Self> {
        Self::new(waist, wavelength, alloc::vec![Mode::new(0, 0, 1.0)])
    }

    /// The eight VCSEL modes `p ∈ {0,1}`, `l ∈ {0,1,2,3}` at equal power.
    pub fn vcsel(waist: f64, wavelength: f64) -> Result<Self> {
        Self::new(waist, wavelength, default_vcsel_modes())
    }

    pub fn waist(&self) -> f64 {
        self.waist
    }

    pub fn wavelength(&self) -> f64 {
        self.wavelength
    }

    pub fn modes(&self) -> &[Mode] {
        &self.modes
    }

    /// Same wavelength and mode content with a different waist.
    pub fn with_waist(&self, waist: f64) -> Result<Self> {
        Self::new(waist, self.wavelength, self.modes.clone())
    }

    pub fn rayleigh_range(&self) -> f64 {
        PI * self.waist * self.waist / self.wavelength
    }

    /// Beam radius `w(z)` at distance `z` from the waist.
    pub fn radius_at(&self, z: f64) -> f64 {
        let s = z / self.rayleigh_range();
        self.waist * (1.0 + s * s).sqrt()
    }

    /// Asymptotic radius `z·λ/(π·w0)`, valid for `z ≫ z_r`.
    pub fn far_field_radius(&self, z: f64) -> f64 {
        z * self.wavelength / (self.waist * PI)
    }

    /// Far-field divergence half-angle `atan(λ/(π·w0))`.
    pub fn far_field_divergence(&self) -> f64 {
        (self.wavelength / (PI * self.waist)).atan()
    }

    /// Half-angle subtended by the beam radius at distance `z`.
    pub fn divergence_half_angle(&self, z: f64) -> Result<f64> {
        if !(z > 0.0) {
            return Err(Error::Domain("divergence half-angle needs z > 0"));
        }
        Ok((self.radius_at(z) / z).atan())
    }

    /// Wavefront radius of curvature; infinite (planar) at the waist.
    pub fn phase_front_radius(&self, z: f64) -> Result<f64> {
        if !(z > 0.0) {
            return Err(Error::Domain("phase front is planar at z = 0"));
        }
        let s = self.rayleigh_range() / z;
        Ok(z * (1.0 + s * s))
    }

    /// Intensity of mode `(p, l)` per watt of mode power (W/m² per W).
    pub fn mode_intensity(&self, p: u32, l: u32, r: f64, z: f64) -> Result<f64> {
        check_indices(p, l)?;
        if !(r >= 0.0 && z >= 0.0) {
            return Err(Error::Domain("mode intensity needs r >= 0 and z >= 0"));
        }
        let w = self.radius_at(z);
        Ok(self.mode_intensity_at(p, l, r, w))
    }

    fn mode_intensity_at(&self, p: u32, l: u32, r: f64, w: f64) -> f64 {
        let a = norm_unchecked(p, l, self.waist);
        let x = 2.0 * r * r / (w * w);
        let lag = laguerre_unchecked(p, l, x);
        let scale = self.waist / w;
        a * a * scale * scale * x.powi(l as i32) * lag * lag * (-x).exp()
    }

    /// Total intensity per watt of emitted power, summed over the mode set.
    pub fn intensity(&self, r: f64, z: f64) -> f64 {
        let w = self.radius_at(z);
        self.intensity_with_radius(r, w)
    }

    pub(crate) fn intensity_with_radius(&self, r: f64, w: f64) -> f64 {
        self.modes
            .iter()
            .filter(|m| m.fraction > 0.0)
            .map(|m| m.fraction * self.mode_intensity_at(m.p, m.l, r, w))
            .sum()
    }
}

pub fn default_vcsel_modes() -> Vec<Mode> {
    let mut modes = Vec::with_capacity(8);
    for p in 0..2 {
        for l in 0..4 {
            modes.push(Mode::new(p, l, 0.125));
        }
    }
    modes
}

/// Thin micro lens placed in front of the emitter.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LensSpec {
    focal_length: f64,
    distance: f64,
    refractive_index: f64,
}

impl LensSpec {
    /// `distance` is measured from the emitter waist to the lens.
    pub fn new(focal_length: f64, distance: f64, refractive_index: f64) -> Result<Self> {
        if !(focal_length > 0.0 && focal_length.is_finite()) {
            return Err(Error::invalid("focal_length", "must be positive"));
        }
        if !(distance >= 0.0 && distance.is_finite()) {
            return Err(Error::invalid("vcsel_to_lens", "must be non-negative"));
        }
        if !(refractive_index > 1.0 && refractive_index.is_finite()) {
            return Err(Error::invalid("refractive_index", "must exceed 1"));
        }
        Ok(LensSpec {
            focal_length,
            distance,
            refractive_index,
        })
    }

    pub fn focal_length(&self) -> f64 {
        self.focal_length
    }

    pub fn distance(&self) -> f64 {
        self.distance
    }

    /// Carried for completeness; the thin-lens transform only needs `f`.
    pub fn refractive_index(&self) -> f64 {
        self.refractive_index
    }
}

/// Waist produced by a lens.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TransformedBeam {
    /// Distance from the lens to the new waist.
    pub waist_distance: f64,
    /// New minimum waist radius.
    pub waist: f64,
    /// Far-field divergence half-angle after the lens.
    pub divergence: f64,
    /// Ratio of new to original waist.
    pub magnification: f64,
}

/// Thin-lens transform of a Gaussian waist located `lens.distance()` before
/// the lens.
pub fn lens_transform(beam: &BeamSpec, lens: &LensSpec) -> TransformedBeam {
    let f = lens.focal_length;
    let zr = beam.rayleigh_range();
    let offset = lens.distance - f;
    let denom = offset * offset + zr * zr;
    let waist_distance = f + f * f * offset / denom;
    let waist = beam.waist * f / denom.sqrt();
    let magnification = waist / beam.waist;
    TransformedBeam {
        waist_distance,
        waist,
        divergence: beam.far_field_divergence() / magnification,
        magnification,
    }
}

/// The beam seen by the rest of the world, plus the axial offset of its waist
/// from the emitter plane.
#[derive(Debug, Clone, PartialEq)]
pub struct EffectiveBeam {
    pub beam: BeamSpec,
    pub waist_offset: f64,
}

pub fn effective_beam(beam: &BeamSpec, lens: Option<&LensSpec>) -> Result<EffectiveBeam> {
    match lens {
        None => Ok(EffectiveBeam {
            beam: beam.clone(),
            waist_offset: 0.0,
        }),
        Some(lens) => {
            let t = lens_transform(beam, lens);
            Ok(EffectiveBeam {
                beam: beam.with_waist(t.waist)?,
                waist_offset: t.waist_distance,
            })
        }
    }
}
