//! The simulated room: access points on the ceiling, users on the receive
//! plane, receiver electronics and the eye-safety limit.
//!
//! [`Scene::new`] validates every invariant and clamps any emitter power that
//! exceeds its eye-safe cap, returning one [`PowerClamp`] record per clamp.

use alloc::string::String;
use alloc::vec::Vec;
use core::f64::consts::PI;
use core::fmt;
#[allow(unused_imports)]
use num_traits::Float as _;

use rand::distributions::Open01;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::beam::{BeamSpec, LensSpec};
use crate::error::{Error, Result};
use crate::safety::{max_safe_power, SafetyResult, SafetySpec};

pub const DEFAULT_WAIST: f64 = 5e-6;
pub const DEFAULT_WAVELENGTH: f64 = 850e-9;
pub const DEFAULT_ARRAY_N: u32 = 5;
pub const DEFAULT_PITCH: f64 = 10e-6;
pub const DEFAULT_AP_POSITIONS: [[f64; 3]; 4] = [
    [3.0, 3.0, 3.0],
    [1.0, 3.0, 3.0],
    [3.0, 1.0, 3.0],
    [1.0, 1.0, 3.0],
];
pub const DEFAULT_RESPONSIVITY: f64 = 0.4;
pub const DEFAULT_DETECTOR_AREA: f64 = 2e-4;
pub const DEFAULT_FOV_HALF_ANGLE: f64 = PI / 2.0;

/// Micro lens in front of each emitter.
pub fn default_lens() -> LensSpec {
    LensSpec::new(0.127e-3, 0.133e-3, 1.5).expect("valid default lens")
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Room {
    pub width: f64,
    pub length: f64,
    pub height: f64,
    pub rx_plane_height: f64,
}

impl Default for Room {
    fn default() -> Self {
        Room {
            width: 5.0,
            length: 5.0,
            height: 3.0,
            rx_plane_height: 1.0,
        }
    }
}

impl Room {
    pub fn validate(&self) -> Result<()> {
        for (name, v) in [
            ("room.width", self.width),
            ("room.length", self.length),
            ("room.height", self.height),
            ("room.rx_plane_height", self.rx_plane_height),
        ] {
            if !(v > 0.0 && v.is_finite()) {
                return Err(Error::invalid(name, "must be positive"));
            }
        }
        if self.rx_plane_height >= self.height {
            return Err(Error::invalid(
                "room.rx_plane_height",
                "must be below the ceiling",
            ));
        }
        Ok(())
    }

    fn contains_xy(&self, x: f64, y: f64) -> bool {
        (0.0..=self.width).contains(&x) && (0.0..=self.length).contains(&y)
    }
}

/// An `N × N` VCSEL array treated as one co-located source.
#[derive(Debug, Clone, PartialEq)]
pub struct AccessPoint {
    pub position: [f64; 3],
    pub array_n: u32,
    pub pitch: f64,
    pub beam: BeamSpec,
    pub lens: Option<LensSpec>,
    /// Optical power of each VCSEL in W.
    pub per_vcsel_power: f64,
}

impl AccessPoint {
    /// Default array at `position` running at `per_vcsel_power`.
    pub fn standard(position: [f64; 3], per_vcsel_power: f64) -> Self {
        AccessPoint {
            position,
            array_n: DEFAULT_ARRAY_N,
            pitch: DEFAULT_PITCH,
            beam: BeamSpec::vcsel(DEFAULT_WAIST, DEFAULT_WAVELENGTH).expect("valid default beam"),
            lens: Some(default_lens()),
            per_vcsel_power,
        }
    }

    pub fn vcsel_count(&self) -> u32 {
        self.array_n * self.array_n
    }

    /// Total optical power of the array.
    pub fn power(&self) -> f64 {
        self.vcsel_count() as f64 * self.per_vcsel_power
    }

    pub fn eye_safety(&self, safety: &SafetySpec) -> Result<SafetyResult> {
        max_safe_power(&self.beam, safety, self.lens.as_ref())
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct UserTerminal {
    /// `(x, y)` on the receive plane.
    pub position: [f64; 2],
    pub detector_area: f64,
    pub responsivity: f64,
    pub fov_half_angle: f64,
}

impl UserTerminal {
    pub fn standard(position: [f64; 2]) -> Self {
        UserTerminal {
            position,
            detector_area: DEFAULT_DETECTOR_AREA,
            responsivity: DEFAULT_RESPONSIVITY,
            fov_half_angle: DEFAULT_FOV_HALF_ANGLE,
        }
    }

    /// Radius of the equivalent circular detector.
    pub fn aperture_radius(&self) -> f64 {
        (self.detector_area / PI).sqrt()
    }

    fn with_position(&self, position: [f64; 2]) -> Self {
        UserTerminal { position, ..*self }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ElectricalSpec {
    /// Receiver electrical bandwidth `B_e` (Hz).
    pub rx_bandwidth: f64,
    /// Optical (VCSEL) bandwidth `B_o` (Hz). Not used by the noise model.
    pub optical_bandwidth: f64,
    pub load_resistance: f64,
    pub noise_figure_db: f64,
    pub rin_db_per_hz: f64,
    /// Preamplifier input noise current PSD (A²/Hz).
    pub preamp_noise_density: f64,
    pub temperature: f64,
    pub bias_current: f64,
    pub drive_voltage: f64,
    /// BER below which forward error correction succeeds.
    pub fec_limit: f64,
    /// Overrides `bias_current · drive_voltage` as consumed power per VCSEL.
    pub consumed_power_per_vcsel: Option<f64>,
}

impl Default for ElectricalSpec {
    fn default() -> Self {
        ElectricalSpec {
            rx_bandwidth: 1.75e9,
            optical_bandwidth: 5e9,
            load_resistance: 50.0,
            noise_figure_db: 5.0,
            rin_db_per_hz: -155.0,
            preamp_noise_density: 4.47e-12 * 4.47e-12,
            temperature: 300.0,
            bias_current: 9e-3,
            drive_voltage: 0.9,
            fec_limit: 1e-3,
            consumed_power_per_vcsel: None,
        }
    }
}

impl ElectricalSpec {
    pub fn validate(&self) -> Result<()> {
        for (name, v) in [
            ("electrical.rx_bandwidth", self.rx_bandwidth),
            ("electrical.optical_bandwidth", self.optical_bandwidth),
            ("electrical.load_resistance", self.load_resistance),
            ("electrical.noise_figure_db", self.noise_figure_db),
            ("electrical.preamp_noise_density", self.preamp_noise_density),
            ("electrical.temperature", self.temperature),
            ("electrical.bias_current", self.bias_current),
            ("electrical.drive_voltage", self.drive_voltage),
        ] {
            if !(v > 0.0 && v.is_finite()) {
                return Err(Error::invalid(name, "must be strictly positive"));
            }
        }
        if !(self.rin_db_per_hz < 0.0 && self.rin_db_per_hz.is_finite()) {
            return Err(Error::invalid(
                "electrical.rin_db_per_hz",
                "must be negative (dB/Hz)",
            ));
        }
        if !(self.fec_limit > 0.0 && self.fec_limit < 0.5) {
            return Err(Error::invalid(
                "electrical.fec_limit",
                "must lie in (0, 0.5)",
            ));
        }
        if let Some(p) = self.consumed_power_per_vcsel {
            if !(p > 0.0 && p.is_finite()) {
                return Err(Error::invalid(
                    "electrical.consumed_power_per_vcsel",
                    "must be positive",
                ));
            }
        }
        Ok(())
    }

    /// Electrical power drawn by one VCSEL.
    pub fn vcsel_consumption(&self) -> f64 {
        self.consumed_power_per_vcsel
            .unwrap_or(self.bias_current * self.drive_voltage)
    }
}

/// An emitter power that was reduced to its eye-safe cap.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PowerClamp {
    pub ap: usize,
    pub requested: f64,
    pub cap: f64,
}

impl fmt::Display for PowerClamp {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "access point {}: per-VCSEL power {:e} W exceeds eye-safe cap, clamped to {:e} W",
            self.ap, self.requested, self.cap
        )
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Scene {
    pub room: Room,
    pub aps: Vec<AccessPoint>,
    pub users: Vec<UserTerminal>,
    pub electrical: ElectricalSpec,
    pub safety: SafetySpec,
    pub seed: u64,
    /// Multiply channel gains by the cosine of the incidence angle.
    pub incidence_cosine: bool,
}

impl Scene {
    /// Validates the parts and enforces the eye-safety cap on every access
    /// point.
    pub fn new(
        room: Room,
        mut aps: Vec<AccessPoint>,
        users: Vec<UserTerminal>,
        electrical: ElectricalSpec,
        safety: SafetySpec,
        seed: u64,
    ) -> Result<(Scene, Vec<PowerClamp>)> {
        room.validate()?;
        electrical.validate()?;
        if aps.is_empty() {
            return Err(Error::invalid("access_points", "at least one is required"));
        }
        if users.is_empty() {
            return Err(Error::invalid("users", "at least one is required"));
        }
        if users.len() > aps.len() {
            return Err(Error::Infeasible {
                users: users.len(),
                aps: aps.len(),
            });
        }
        let mut clamps = Vec::new();
        for (i, ap) in aps.iter_mut().enumerate() {
            let field = |f: &str| -> String { alloc::format!("access_points[{i}].{f}") };
            let [x, y, z] = ap.position;
            if !room.contains_xy(x, y) {
                return Err(Error::invalid(
                    field("position"),
                    "outside the room footprint",
                ));
            }
            if (z - room.height).abs() > 1e-9 {
                return Err(Error::invalid(
                    field("position"),
                    "must be at ceiling height",
                ));
            }
            if ap.array_n == 0 {
                return Err(Error::invalid(field("array_n"), "must be at least 1"));
            }
            if !(ap.pitch > 0.0 && ap.pitch.is_finite()) {
                return Err(Error::invalid(field("pitch"), "must be positive"));
            }
            if !(ap.per_vcsel_power > 0.0 && ap.per_vcsel_power.is_finite()) {
                return Err(Error::invalid(field("per_vcsel_power"), "must be positive"));
            }
            let cap = ap.eye_safety(&safety)?.p_max;
            if ap.per_vcsel_power > cap {
                clamps.push(PowerClamp {
                    ap: i,
                    requested: ap.per_vcsel_power,
                    cap,
                });
                ap.per_vcsel_power = cap;
            }
        }
        for (i, u) in users.iter().enumerate() {
            let field = |f: &str| -> String { alloc::format!("users[{i}].{f}") };
            if !room.contains_xy(u.position[0], u.position[1]) {
                return Err(Error::invalid(
                    field("position"),
                    "outside the room footprint",
                ));
            }
            if !(u.detector_area > 0.0 && u.detector_area.is_finite()) {
                return Err(Error::invalid(field("detector_area"), "must be positive"));
            }
            if !(u.responsivity > 0.0 && u.responsivity <= 1.2) {
                return Err(Error::invalid(
                    field("responsivity"),
                    "must lie in (0, 1.2] A/W",
                ));
            }
            if !(u.fov_half_angle > 0.0 && u.fov_half_angle <= PI / 2.0) {
                return Err(Error::invalid(
                    field("fov_half_angle"),
                    "must lie in (0, π/2]",
                ));
            }
        }
        Ok((
            Scene {
                room,
                aps,
                users,
                electrical,
                safety,
                seed,
                incidence_cosine: false,
            },
            clamps,
        ))
    }

    /// Vertical distance from the ceiling emitters to the receive plane for
    /// access point `a`.
    pub fn link_height(&self, a: usize) -> f64 {
        self.aps[a].position[2] - self.room.rx_plane_height
    }

    fn user_template(&self) -> UserTerminal {
        self.users
            .first()
            .copied()
            .unwrap_or_else(|| UserTerminal::standard([0.0, 0.0]))
    }
}

/// Replaces the users with `count` terminals drawn uniformly over the room
/// footprint. Identical seeds give identical placements.
pub fn place_users(scene: &Scene, count: usize, seed: u64) -> Result<Scene> {
    check_count(scene, count)?;
    let template = scene.user_template();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let users = (0..count)
        .map(|_| {
            let x: f64 = rng.sample(Open01);
            let y: f64 = rng.sample(Open01);
            template.with_position([x * scene.room.width, y * scene.room.length])
        })
        .collect();
    Ok(Scene {
        users,
        seed,
        ..scene.clone()
    })
}

/// Places user `i` directly below access point `i`.
pub fn place_users_on_axis(scene: &Scene, count: usize) -> Result<Scene> {
    check_count(scene, count)?;
    let template = scene.user_template();
    let users = scene.aps[..count]
        .iter()
        .map(|ap| template.with_position([ap.position[0], ap.position[1]]))
        .collect();
    Ok(Scene {
        users,
        ..scene.clone()
    })
}

fn check_count(scene: &Scene, count: usize) -> Result<()> {
    if count == 0 {
        return Err(Error::invalid("users", "count must be positive"));
    }
    if count > scene.aps.len() {
        return Err(Error::Infeasible {
            users: count,
            aps: scene.aps.len(),
        });
    }
    Ok(())
}
