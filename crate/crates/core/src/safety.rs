//! Eye-safe transmit power of a single emitter.
//!
//! The eye is placed at the most hazardous position (MHP): the distance at
//! which 86 % of the beam power would fit through the pupil, but never closer
//! than a floor distance. The permitted power is the one that puts exactly the
//! maximum permissible exposure (MPE) through the pupil there.

use core::f64::consts::PI;
#[allow(unused_imports)]
use num_traits::Float as _;

use crate::beam::{effective_beam, BeamSpec, LensSpec};
use crate::error::{Error, Result};

/// Fraction of beam power that defines the hazard distance.
pub const PUPIL_POWER_FRACTION: f64 = 0.86;
/// Pupil radius for a 7 mm dilated pupil.
pub const DEFAULT_PUPIL_RADIUS: f64 = 3.5e-3;
pub const DEFAULT_MHP_FLOOR: f64 = 0.1;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SafetySpec {
    mpe: f64,
    pupil_radius: f64,
    mhp_floor: f64,
}

impl SafetySpec {
    /// `mpe` in W/m². There is deliberately no default exposure limit.
    pub fn new(mpe: f64, pupil_radius: f64, mhp_floor: f64) -> Result<Self> {
        if !(mpe > 0.0 && mpe.is_finite()) {
            return Err(Error::invalid("safety.mpe", "must be positive"));
        }
        if !(pupil_radius > 0.0 && pupil_radius.is_finite()) {
            return Err(Error::invalid("safety.pupil_radius", "must be positive"));
        }
        if !(mhp_floor > 0.0 && mhp_floor.is_finite()) {
            return Err(Error::invalid("safety.mhp_floor", "must be positive"));
        }
        Ok(SafetySpec {
            mpe,
            pupil_radius,
            mhp_floor,
        })
    }

    pub fn with_mpe(mpe: f64) -> Result<Self> {
        Self::new(mpe, DEFAULT_PUPIL_RADIUS, DEFAULT_MHP_FLOOR)
    }

    pub fn mpe(&self) -> f64 {
        self.mpe
    }

    pub fn pupil_radius(&self) -> f64 {
        self.pupil_radius
    }

    pub fn mhp_floor(&self) -> f64 {
        self.mhp_floor
    }

    pub fn pupil_area(&self) -> f64 {
        PI * self.pupil_radius * self.pupil_radius
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SafetyResult {
    /// Distance at which 86 % of the power enters the pupil.
    pub d86: f64,
    /// Most hazardous position, `max(d86, floor)`.
    pub mhp: f64,
    /// Angle subtended by the waist at the MHP. Reported only.
    pub alpha: f64,
    /// Fraction of beam power entering the pupil at the MHP.
    pub eta: f64,
    /// Maximum eye-safe emitter power in W.
    pub p_max: f64,
}

pub fn d86_distance(beam: &BeamSpec, safety: &SafetySpec) -> f64 {
    let r = safety.pupil_radius;
    PI * beam.waist() / beam.wavelength()
        * (-2.0 * r * r / (1.0 - PUPIL_POWER_FRACTION).ln()).sqrt()
}

pub fn subtense_angle(beam: &BeamSpec, mhp: f64) -> f64 {
    2.0 * (beam.waist() / mhp).atan()
}

/// Power fraction of a Gaussian beam passing a centred pupil at distance
/// `mhp` from the waist.
pub fn pupil_fraction(beam: &BeamSpec, mhp: f64, safety: &SafetySpec) -> f64 {
    let w = beam.radius_at(mhp);
    let r = safety.pupil_radius;
    -(-2.0 * r * r / (w * w)).exp_m1()
}

/// Eye-safety analysis for one emitter. With a lens, the transformed waist
/// is used and distances are measured from it.
pub fn max_safe_power(
    beam: &BeamSpec,
    safety: &SafetySpec,
    lens: Option<&LensSpec>,
) -> Result<SafetyResult> {
    let eff = effective_beam(beam, lens)?;
    let beam = &eff.beam;
    let d86 = d86_distance(beam, safety);
    let mhp = d86.max(safety.mhp_floor);
    let eta = pupil_fraction(beam, mhp, safety);
    if !(eta > 0.0) {
        return Err(Error::Domain(
            "pupil captures no power at the hazard distance",
        ));
    }
    Ok(SafetyResult {
        d86,
        mhp,
        alpha: subtense_angle(beam, mhp),
        eta,
        p_max: safety.mpe * safety.pupil_area() / eta,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    const W0: f64 = 5e-6;
    const LAMBDA: f64 = 850e-9;

    fn beam(w0: f64) -> BeamSpec {
        BeamSpec::fundamental(w0, LAMBDA).unwrap()
    }

    fn spec() -> SafetySpec {
        SafetySpec::with_mpe(10.0).unwrap()
    }

    #[test]
    fn d86_reference_value() {
        let d = d86_distance(&beam(W0), &spec());
        assert!((d - 0.06524).abs() / 0.06524 < 1e-3);
    }

    #[test]
    fn d86_is_linear_in_waist_and_pupil() {
        let s = spec();
        let d = d86_distance(&beam(W0), &s);
        assert!((d86_distance(&beam(2.0 * W0), &s) - 2.0 * d).abs() < 1e-15);
        let s2 = SafetySpec::new(10.0, 7e-3, 0.1).unwrap();
        assert!((d86_distance(&beam(W0), &s2) - 2.0 * d).abs() < 1e-15);
    }

    #[test]
    fn subtense() {
        assert!((subtense_angle(&beam(W0), 0.1) - 1.0e-4).abs() < 1e-8);
        assert!((subtense_angle(&beam(0.1), 0.1) - PI / 2.0).abs() < 1e-15);
        assert!(subtense_angle(&beam(1e-12), 0.1) < 1e-10);
    }

    #[test]
    fn pupil_fraction_values() {
        let s = spec();
        let eta = pupil_fraction(&beam(W0), 0.1, &s);
        assert!((eta - 0.5666).abs() < 1e-3);
        let big = SafetySpec::new(10.0, 1.0, 0.1).unwrap();
        assert!(pupil_fraction(&beam(W0), 0.1, &big) > 1.0 - 1e-12);
        let tiny = SafetySpec::new(10.0, 1e-9, 0.1).unwrap();
        assert!(pupil_fraction(&beam(W0), 0.1, &tiny) < 1e-10);
    }

    #[test]
    fn pupil_fraction_at_d86_closes_the_loop() {
        let s = spec();
        for w0 in [1e-6, 5e-6, 8e-6, 20e-6] {
            let b = beam(w0);
            let eta = pupil_fraction(&b, d86_distance(&b, &s), &s);
            assert!((eta - 0.86).abs() < 5e-3, "w0={w0}: {eta}");
        }
    }

    #[test]
    fn reference_power() {
        let mpe = 7.5;
        let s = SafetySpec::with_mpe(mpe).unwrap();
        let r = max_safe_power(&beam(W0), &s, None).unwrap();
        assert_eq!(r.mhp, 0.1);
        assert!((r.p_max / mpe - 6.793e-5).abs() / 6.793e-5 < 1e-3);
        assert!((r.p_max * r.eta / s.pupil_area() - mpe).abs() < 1e-12 * mpe);
        assert!(r.eta > 0.0 && r.eta < 1.0);
    }

    #[test]
    fn cap_never_below_mpe_times_pupil_area() {
        for r_p in [1e-3, 3.5e-3, 0.5] {
            let s = SafetySpec::new(3.0, r_p, 0.1).unwrap();
            let r = max_safe_power(&beam(W0), &s, None).unwrap();
            assert!(r.p_max >= 3.0 * PI * r_p * r_p);
        }
    }

    #[test]
    fn floor_applies() {
        let s = spec();
        let small = max_safe_power(&beam(W0), &s, None).unwrap();
        assert_eq!(small.mhp, 0.1);
        let large = max_safe_power(&beam(20e-6), &s, None).unwrap();
        assert_eq!(large.mhp, large.d86);
        assert!(large.d86 > 0.1);
    }

    #[test]
    fn magnifying_lens_lowers_power_cap() {
        let s = spec();
        let b = beam(3e-6);
        let lens = LensSpec::new(1.27e-4, 1.33e-4, 1.5).unwrap();
        let t = crate::beam::lens_transform(&b, &lens);
        assert!(t.magnification > 1.0);
        assert!(t.divergence < b.far_field_divergence());
        let bare = max_safe_power(&b, &s, None).unwrap();
        let lensed = max_safe_power(&b, &s, Some(&lens)).unwrap();
        assert!(pupil_fraction(&beam(t.waist), 0.1, &s) > pupil_fraction(&b, 0.1, &s));
        assert!(lensed.p_max < bare.p_max);
    }

    #[test]
    fn spec_validation() {
        assert!(SafetySpec::with_mpe(0.0).is_err());
        assert!(SafetySpec::new(1.0, 0.0, 0.1).is_err());
        assert!(SafetySpec::new(1.0, 1e-3, -0.1).is_err());
    }

    proptest! {
        #[test]
        fn eta_increases_with_pupil(r in 1e-4f64..1e-2, dr in 1e-5f64..1e-3) {
            let b = beam(W0);
            let s1 = SafetySpec::new(1.0, r, 0.1).unwrap();
            let s2 = SafetySpec::new(1.0, r + dr, 0.1).unwrap();
            prop_assume!(pupil_fraction(&b, 0.1, &s1) < 1.0 - 1e-9);
            prop_assert!(pupil_fraction(&b, 0.1, &s2) > pupil_fraction(&b, 0.1, &s1));
        }

        #[test]
        fn eta_decreases_with_distance(m in 0.01f64..5.0, dm in 1e-3f64..1.0) {
            let b = beam(W0);
            let s = spec();
            prop_assert!(pupil_fraction(&b, m + dm, &s) < pupil_fraction(&b, m, &s));
        }

        #[test]
        fn mhp_is_max_of_d86_and_floor(w0 in 5e-7f64..3e-5, floor in 0.01f64..0.5) {
            let s = SafetySpec::new(1.0, DEFAULT_PUPIL_RADIUS, floor).unwrap();
            let r = max_safe_power(&beam(w0), &s, None).unwrap();
            prop_assert_eq!(r.mhp, r.d86.max(floor));
        }

        #[test]
        fn power_cap_falls_as_eta_rises(w0 in 1e-6f64..7e-6, dw in 1e-8f64..5e-7) {
            // below the floor crossover the MHP is fixed and eta grows with w0
            let s = spec();
            let a = max_safe_power(&beam(w0), &s, None).unwrap();
            let b = max_safe_power(&beam(w0 + dw), &s, None).unwrap();
            prop_assert!(b.eta > a.eta);
            prop_assert!(b.p_max < a.p_max);
        }
    }
}
