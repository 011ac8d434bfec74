//! TOML scene configuration.
//!
//! Every key is optional except `safety.mpe`. Missing keys take the built-in
//! defaults of the core crate. Units are SI throughout: metres, watts, hertz,
//! amperes, volts, kelvin; angles in radians; noise figures in dB.

use serde::{Deserialize, Serialize};

use lasernet_core::beam::{default_vcsel_modes, BeamSpec, LensSpec, Mode};
use lasernet_core::safety::{SafetySpec, DEFAULT_MHP_FLOOR, DEFAULT_PUPIL_RADIUS};
use lasernet_core::scene::{
    self, default_lens, AccessPoint, ElectricalSpec, PowerClamp, Room, Scene, UserTerminal,
};
use lasernet_core::sweep::Placement;
use lasernet_core::Error;

#[derive(Debug, thiserror::Error)]
pub enum ConfigError {
    #[error("config parse error at line {line}, column {column}: {message}")]
    Parse {
        line: usize,
        column: usize,
        message: String,
    },
    #[error("config validation failed: {0}")]
    Invalid(#[from] Error),
    #[error("config serialization failed: {0}")]
    Serialize(#[from] toml::ser::Error),
}

#[derive(Debug, Clone, Default, PartialEq, Deserialize, Serialize)]
#[serde(default, deny_unknown_fields)]
pub struct Config {
    pub room: RoomConfig,
    pub vcsel: VcselConfig,
    pub lens: LensConfig,
    pub receiver: ReceiverConfig,
    pub electrical: ElectricalConfig,
    pub safety: SafetyConfig,
    pub simulation: SimulationConfig,
    #[serde(skip_serializing_if = "Vec::is_empty")]
    pub access_points: Vec<AccessPointConfig>,
    #[serde(skip_serializing_if = "Vec::is_empty")]
    pub users: Vec<UserConfig>,
}

#[derive(Debug, Clone, PartialEq, Deserialize, Serialize)]
#[serde(default, deny_unknown_fields)]
pub struct RoomConfig {
    pub width: f64,
    pub length: f64,
    pub height: f64,
    pub rx_plane_height: f64,
}

impl Default for RoomConfig {
    fn default() -> Self {
        let r = Room::default();
        RoomConfig {
            width: r.width,
            length: r.length,
            height: r.height,
            rx_plane_height: r.rx_plane_height,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Deserialize, Serialize)]
#[serde(deny_unknown_fields)]
pub struct ModeConfig {
    pub p: u32,
    pub l: u32,
    pub fraction: f64,
}

/// Emitter defaults shared by every access point.
#[derive(Debug, Clone, PartialEq, Deserialize, Serialize)]
#[serde(default, deny_unknown_fields)]
pub struct VcselConfig {
    pub beam_waist: f64,
    pub wavelength: f64,
    pub array_n: u32,
    pub pitch: f64,
    /// Defaults to the eye-safe cap.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub per_vcsel_power: Option<f64>,
    /// Defaults to eight modes at equal power.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub modes: Option<Vec<ModeConfig>>,
}

impl Default for VcselConfig {
    fn default() -> Self {
        VcselConfig {
            beam_waist: scene::DEFAULT_WAIST,
            wavelength: scene::DEFAULT_WAVELENGTH,
            array_n: scene::DEFAULT_ARRAY_N,
            pitch: scene::DEFAULT_PITCH,
            per_vcsel_power: None,
            modes: None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Deserialize, Serialize)]
#[serde(default, deny_unknown_fields)]
pub struct LensConfig {
    pub enabled: bool,
    pub focal_length: f64,
    /// Emitter-to-lens distance.
    pub vcsel_to_lens: f64,
    pub refractive_index: f64,
}

impl Default for LensConfig {
    fn default() -> Self {
        let l = default_lens();
        LensConfig {
            enabled: true,
            focal_length: l.focal_length(),
            vcsel_to_lens: l.distance(),
            refractive_index: l.refractive_index(),
        }
    }
}

/// Per-access-point lens; absent keys fall back to `[lens]`.
#[derive(Debug, Clone, Default, PartialEq, Deserialize, Serialize)]
#[serde(default, deny_unknown_fields)]
pub struct LensOverride {
    #[serde(skip_serializing_if = "Option::is_none")]
    pub enabled: Option<bool>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub focal_length: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub vcsel_to_lens: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub refractive_index: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Deserialize, Serialize)]
#[serde(default, deny_unknown_fields)]
pub struct ReceiverConfig {
    pub responsivity: f64,
    pub detector_area: f64,
    pub fov_half_angle: f64,
    pub incidence_cosine: bool,
}

impl Default for ReceiverConfig {
    fn default() -> Self {
        ReceiverConfig {
            responsivity: scene::DEFAULT_RESPONSIVITY,
            detector_area: scene::DEFAULT_DETECTOR_AREA,
            fov_half_angle: scene::DEFAULT_FOV_HALF_ANGLE,
            incidence_cosine: false,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Deserialize, Serialize)]
#[serde(default, deny_unknown_fields)]
pub struct ElectricalConfig {
    pub rx_bandwidth: f64,
    pub optical_bandwidth: f64,
    pub load_resistance: f64,
    pub noise_figure_db: f64,
    pub rin_db_per_hz: f64,
    /// A²/Hz.
    pub preamp_noise_density: f64,
    pub temperature: f64,
    pub bias_current: f64,
    pub drive_voltage: f64,
    pub fec_limit: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub consumed_power_per_vcsel: Option<f64>,
}

impl From<ElectricalSpec> for ElectricalConfig {
    fn from(e: ElectricalSpec) -> Self {
        ElectricalConfig {
            rx_bandwidth: e.rx_bandwidth,
            optical_bandwidth: e.optical_bandwidth,
            load_resistance: e.load_resistance,
            noise_figure_db: e.noise_figure_db,
            rin_db_per_hz: e.rin_db_per_hz,
            preamp_noise_density: e.preamp_noise_density,
            temperature: e.temperature,
            bias_current: e.bias_current,
            drive_voltage: e.drive_voltage,
            fec_limit: e.fec_limit,
            consumed_power_per_vcsel: e.consumed_power_per_vcsel,
        }
    }
}

impl From<&ElectricalConfig> for ElectricalSpec {
    fn from(e: &ElectricalConfig) -> Self {
        ElectricalSpec {
            rx_bandwidth: e.rx_bandwidth,
            optical_bandwidth: e.optical_bandwidth,
            load_resistance: e.load_resistance,
            noise_figure_db: e.noise_figure_db,
            rin_db_per_hz: e.rin_db_per_hz,
            preamp_noise_density: e.preamp_noise_density,
            temperature: e.temperature,
            bias_current: e.bias_current,
            drive_voltage: e.drive_voltage,
            fec_limit: e.fec_limit,
            consumed_power_per_vcsel: e.consumed_power_per_vcsel,
        }
    }
}

impl Default for ElectricalConfig {
    fn default() -> Self {
        ElectricalSpec::default().into()
    }
}

#[derive(Debug, Clone, PartialEq, Deserialize, Serialize)]
#[serde(default, deny_unknown_fields)]
pub struct SafetyConfig {
    /// W/m². Required: there is no default exposure limit.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub mpe: Option<f64>,
    pub pupil_radius: f64,
    pub mhp_floor: f64,
}

impl Default for SafetyConfig {
    fn default() -> Self {
        SafetyConfig {
            mpe: None,
            pupil_radius: DEFAULT_PUPIL_RADIUS,
            mhp_floor: DEFAULT_MHP_FLOOR,
        }
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Deserialize, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum PlacementConfig {
    #[default]
    OnAxis,
    Random,
}

impl From<PlacementConfig> for Placement {
    fn from(p: PlacementConfig) -> Self {
        match p {
            PlacementConfig::OnAxis => Placement::OnAxis,
            PlacementConfig::Random => Placement::Random,
        }
    }
}

#[derive(Debug, Clone, Default, PartialEq, Deserialize, Serialize)]
#[serde(default, deny_unknown_fields)]
pub struct SimulationConfig {
    pub seed: u64,
    /// Number of generated users when no `[[users]]` are listed. Defaults to
    /// one per access point.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub users: Option<usize>,
    pub placement: PlacementConfig,
}

#[derive(Debug, Clone, Default, PartialEq, Deserialize, Serialize)]
#[serde(deny_unknown_fields)]
pub struct AccessPointConfig {
    pub position: [f64; 3],
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub array_n: Option<u32>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub pitch: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub beam_waist: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub wavelength: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub per_vcsel_power: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub modes: Option<Vec<ModeConfig>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub lens: Option<LensOverride>,
}

#[derive(Debug, Clone, Default, PartialEq, Deserialize, Serialize)]
#[serde(deny_unknown_fields)]
pub struct UserConfig {
    /// `[x, y]`, or `[x, y, z]` with `z` on the receive plane.
    pub position: Vec<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub detector_area: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub responsivity: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub fov_half_angle: Option<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct LoadedScene {
    pub scene: Scene,
    /// Sweep placement requested by `[simulation]`.
    pub placement: Placement,
    /// Emitters whose configured power exceeded the eye-safe cap.
    pub warnings: Vec<PowerClamp>,
}

pub fn parse_config(text: &str) -> Result<Config, ConfigError> {
    toml::from_str(text).map_err(|e| {
        let (line, column) = e.span().map(|s| line_col(text, s.start)).unwrap_or((0, 0));
        ConfigError::Parse {
            line,
            column,
            message: e.message().to_string(),
        }
    })
}

/// 1-based line and column of byte `offset`.
fn line_col(text: &str, offset: usize) -> (usize, usize) {
    let head = &text[..offset.min(text.len())];
    let line = head.matches('\n').count() + 1;
    let column = head.rsplit('\n').next().map_or(0, |l| l.chars().count()) + 1;
    (line, column)
}

pub fn load_scene(text: &str) -> Result<LoadedScene, ConfigError> {
    parse_config(text)?.build()
}

/// Re-labels a core validation error with the config path it came from.
fn scoped(prefix: &str) -> impl Fn(Error) -> Error + '_ {
    move |e| match e {
        Error::Invalid { field, reason } if !field.contains('.') => Error::Invalid {
            field: format!("{prefix}.{field}"),
            reason,
        },
        other => other,
    }
}

fn invalid(field: impl Into<String>, reason: &str) -> Error {
    Error::Invalid {
        field: field.into(),
        reason: reason.to_string(),
    }
}

fn modes_of(cfg: &Option<Vec<ModeConfig>>) -> Vec<Mode> {
    match cfg {
        Some(ms) => ms.iter().map(|m| Mode::new(m.p, m.l, m.fraction)).collect(),
        None => default_vcsel_modes(),
    }
}

impl Config {
    pub fn build(&self) -> Result<LoadedScene, ConfigError> {
        let room = Room {
            width: self.room.width,
            length: self.room.length,
            height: self.room.height,
            rx_plane_height: self.room.rx_plane_height,
        };
        room.validate()?;
        let mpe = self
            .safety
            .mpe
            .ok_or_else(|| invalid("safety.mpe", "is required and has no default"))?;
        let safety = SafetySpec::new(mpe, self.safety.pupil_radius, self.safety.mhp_floor)?;
        let electrical = ElectricalSpec::from(&self.electrical);

        let ap_cfgs: Vec<AccessPointConfig> = if self.access_points.is_empty() {
            scene::DEFAULT_AP_POSITIONS
                .iter()
                .map(|&position| AccessPointConfig {
                    position,
                    ..Default::default()
                })
                .collect()
        } else {
            self.access_points.clone()
        };
        let aps = ap_cfgs
            .iter()
            .enumerate()
            .map(|(i, c)| self.access_point(i, c, &safety))
            .collect::<Result<Vec<_>, Error>>()?;

        let template = UserTerminal {
            position: [0.0, 0.0],
            detector_area: self.receiver.detector_area,
            responsivity: self.receiver.responsivity,
            fov_half_angle: self.receiver.fov_half_angle,
        };
        let placement = Placement::from(self.simulation.placement);
        let generated = self.users.is_empty();
        let users = if generated {
            let count = self.simulation.users.unwrap_or(aps.len());
            if count == 0 {
                return Err(invalid("simulation.users", "must be positive").into());
            }
            if count > aps.len() {
                return Err(Error::Infeasible {
                    users: count,
                    aps: aps.len(),
                }
                .into());
            }
            aps[..count]
                .iter()
                .map(|ap| UserTerminal {
                    position: [ap.position[0], ap.position[1]],
                    ..template
                })
                .collect()
        } else {
            self.users
                .iter()
                .enumerate()
                .map(|(i, u)| user_terminal(i, u, &template, room.rx_plane_height))
                .collect::<Result<Vec<_>, Error>>()?
        };

        let (mut scene, warnings) =
            Scene::new(room, aps, users, electrical, safety, self.simulation.seed)?;
        scene.incidence_cosine = self.receiver.incidence_cosine;
        if generated && placement == Placement::Random {
            scene = scene::place_users(&scene, scene.users.len(), scene.seed)?;
        }
        Ok(LoadedScene {
            scene,
            placement,
            warnings,
        })
    }

    fn access_point(
        &self,
        i: usize,
        c: &AccessPointConfig,
        safety: &SafetySpec,
    ) -> Result<AccessPoint, Error> {
        let prefix = format!("access_points[{i}]");
        let v = &self.vcsel;
        let beam = BeamSpec::new(
            c.beam_waist.unwrap_or(v.beam_waist),
            c.wavelength.unwrap_or(v.wavelength),
            modes_of(if c.modes.is_some() {
                &c.modes
            } else {
                &v.modes
            }),
        )
        .map_err(scoped(&prefix))?;
        let o = c.lens.clone().unwrap_or_default();
        let lens = if o.enabled.unwrap_or(self.lens.enabled) {
            Some(
                LensSpec::new(
                    o.focal_length.unwrap_or(self.lens.focal_length),
                    o.vcsel_to_lens.unwrap_or(self.lens.vcsel_to_lens),
                    o.refractive_index.unwrap_or(self.lens.refractive_index),
                )
                .map_err(scoped(&format!("{prefix}.lens")))?,
            )
        } else {
            None
        };
        let mut ap = AccessPoint {
            position: c.position,
            array_n: c.array_n.unwrap_or(v.array_n),
            pitch: c.pitch.unwrap_or(v.pitch),
            beam,
            lens,
            per_vcsel_power: 0.0,
        };
        ap.per_vcsel_power = match c.per_vcsel_power.or(v.per_vcsel_power) {
            Some(p) => p,
            None => ap.eye_safety(safety)?.p_max,
        };
        Ok(ap)
    }
}

fn user_terminal(
    i: usize,
    u: &UserConfig,
    template: &UserTerminal,
    plane: f64,
) -> Result<UserTerminal, Error> {
    let field = format!("users[{i}].position");
    let (x, y) = match u.position.as_slice() {
        [x, y] => (*x, *y),
        [x, y, z] => {
            if (z - plane).abs() > 1e-9 {
                return Err(invalid(field, "z must equal room.rx_plane_height"));
            }
            (*x, *y)
        }
        _ => return Err(invalid(field, "expected [x, y] or [x, y, z]")),
    };
    Ok(UserTerminal {
        position: [x, y],
        detector_area: u.detector_area.unwrap_or(template.detector_area),
        responsivity: u.responsivity.unwrap_or(template.responsivity),
        fov_half_angle: u.fov_half_angle.unwrap_or(template.fov_half_angle),
    })
}

/// A config that reloads to exactly `scene`. Every access point and user is
/// written out in full.
pub fn scene_to_config(scene: &Scene, placement: Placement) -> Config {
    let access_points = scene
        .aps
        .iter()
        .map(|ap| AccessPointConfig {
            position: ap.position,
            array_n: Some(ap.array_n),
            pitch: Some(ap.pitch),
            beam_waist: Some(ap.beam.waist()),
            wavelength: Some(ap.beam.wavelength()),
            per_vcsel_power: Some(ap.per_vcsel_power),
            modes: Some(
                ap.beam
                    .modes()
                    .iter()
                    .map(|m| ModeConfig {
                        p: m.p,
                        l: m.l,
                        fraction: m.fraction,
                    })
                    .collect(),
            ),
            lens: Some(match ap.lens {
                Some(l) => LensOverride {
                    enabled: Some(true),
                    focal_length: Some(l.focal_length()),
                    vcsel_to_lens: Some(l.distance()),
                    refractive_index: Some(l.refractive_index()),
                },
                None => LensOverride {
                    enabled: Some(false),
                    ..Default::default()
                },
            }),
        })
        .collect();
    let users = scene
        .users
        .iter()
        .map(|u| UserConfig {
            position: u.position.to_vec(),
            detector_area: Some(u.detector_area),
            responsivity: Some(u.responsivity),
            fov_half_angle: Some(u.fov_half_angle),
        })
        .collect();
    Config {
        room: RoomConfig {
            width: scene.room.width,
            length: scene.room.length,
            height: scene.room.height,
            rx_plane_height: scene.room.rx_plane_height,
        },
        vcsel: VcselConfig::default(),
        lens: LensConfig::default(),
        receiver: ReceiverConfig {
            incidence_cosine: scene.incidence_cosine,
            ..ReceiverConfig::default()
        },
        electrical: scene.electrical.into(),
        safety: SafetyConfig {
            mpe: Some(scene.safety.mpe()),
            pupil_radius: scene.safety.pupil_radius(),
            mhp_floor: scene.safety.mhp_floor(),
        },
        simulation: SimulationConfig {
            seed: scene.seed,
            users: None,
            placement: match placement {
                Placement::OnAxis => PlacementConfig::OnAxis,
                Placement::Random => PlacementConfig::Random,
            },
        },
        access_points,
        users,
    }
}

pub fn scene_to_toml(scene: &Scene, placement: Placement) -> Result<String, ConfigError> {
    Ok(toml::to_string(&scene_to_config(scene, placement))?)
}
