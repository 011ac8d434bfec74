//! Receiver noise, per-user SINR, achievable rate and energy efficiency.

use alloc::vec::Vec;
use core::fmt;
#[allow(unused_imports)]
use num_traits::Float as _;

use crate::error::{Error, Result};
use crate::linalg::Matrix;
use crate::precoding::Precoder;
use crate::scene::{ElectricalSpec, Scene};

/// Elementary charge (C).
pub const ELECTRON_CHARGE: f64 = 1.602_176_634e-19;
/// Boltzmann constant (J/K).
pub const BOLTZMANN: f64 = 1.380_649e-23;

/// Noise current variances in A².
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NoiseBreakdown {
    pub shot: f64,
    pub thermal: f64,
    pub rin: f64,
    pub preamp: f64,
    pub total: f64,
}

pub fn db_to_linear(db: f64) -> f64 {
    10.0.powf(db / 10.0)
}

/// Noise variance at the receiver for a signal photocurrent `photocurrent` (A).
pub fn noise_variance(photocurrent: f64, elec: &ElectricalSpec) -> NoiseBreakdown {
    let i = photocurrent.max(0.0);
    let be = elec.rx_bandwidth;
    let shot = 2.0 * ELECTRON_CHARGE * be * i;
    let thermal = 4.0 * BOLTZMANN * elec.temperature * db_to_linear(elec.noise_figure_db) * be
        / elec.load_resistance;
    let rin = db_to_linear(elec.rin_db_per_hz) * be * i * i;
    let preamp = elec.preamp_noise_density * be;
    NoiseBreakdown {
        shot,
        thermal,
        rin,
        preamp,
        total: shot + thermal + rin + preamp,
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum RateModel {
    /// `B_e · log2(1 + SINR)`.
    #[default]
    Shannon,
    /// Full `B_e` when the OOK bit error rate `Q(√SINR)` meets the FEC limit,
    /// otherwise nothing.
    Ook,
}

impl fmt::Display for RateModel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            RateModel::Shannon => "shannon",
            RateModel::Ook => "ook",
        })
    }
}

/// Standard normal upper tail.
pub fn q_function(x: f64) -> f64 {
    0.5 * libm::erfc(x / core::f64::consts::SQRT_2)
}

pub fn user_rate(sinr: f64, elec: &ElectricalSpec, model: RateModel) -> f64 {
    let sinr = sinr.max(0.0);
    match model {
        RateModel::Shannon => elec.rx_bandwidth * sinr.ln_1p() / core::f64::consts::LN_2,
        RateModel::Ook => {
            if sinr > 0.0 && q_function(sinr.sqrt()) <= elec.fec_limit {
                elec.rx_bandwidth
            } else {
                0.0
            }
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct UserLink {
    /// Signal photocurrent `R · (H·G)[u,u]` (A).
    pub photocurrent: f64,
    /// Summed interference current power (A²).
    pub interference: f64,
    pub noise: NoiseBreakdown,
    /// Electrical SINR `I² / (σ² + interference)`.
    pub sinr: f64,
    /// Amplitude ratio `I / σ_T`, reported for reference.
    pub amplitude_ratio: f64,
    pub rate: f64,
}

/// Evaluates user `u` given the effective channel `hg = H·G`.
fn user_link_from_product(
    u: usize,
    hg: &Matrix,
    responsivity: f64,
    elec: &ElectricalSpec,
    model: RateModel,
) -> UserLink {
    let photocurrent = responsivity * hg[(u, u)];
    let interference: f64 = (0..hg.cols())
        .filter(|&n| n != u)
        .map(|n| {
            let i = responsivity * hg[(u, n)];
            i * i
        })
        .sum();
    let noise = noise_variance(photocurrent, elec);
    let signal = photocurrent.max(0.0);
    let sinr = signal * signal / (noise.total + interference);
    UserLink {
        photocurrent,
        interference,
        noise,
        sinr,
        amplitude_ratio: signal / noise.total.sqrt(),
        rate: user_rate(sinr, elec, model),
    }
}

pub fn user_link(
    u: usize,
    scene: &Scene,
    h: &Matrix,
    precoder: &Precoder,
    model: RateModel,
) -> UserLink {
    let hg = h.mul(&precoder.weights);
    user_link_from_product(
        u,
        &hg,
        scene.users[u].responsivity,
        &scene.electrical,
        model,
    )
}

pub fn user_sinr(u: usize, scene: &Scene, h: &Matrix, precoder: &Precoder) -> f64 {
    user_link(u, scene, h, precoder, RateModel::Shannon).sinr
}

/// Electrical power drawn by all VCSELs in the scene (W).
pub fn consumed_power(scene: &Scene) -> f64 {
    let per_vcsel = scene.electrical.vcsel_consumption();
    scene
        .aps
        .iter()
        .map(|ap| ap.vcsel_count() as f64 * per_vcsel)
        .sum()
}

/// Sum rate over consumed power, in bit/J.
pub fn energy_efficiency(rates: &[f64], scene: &Scene) -> Result<f64> {
    efficiency(rates.iter().sum(), consumed_power(scene))
}

fn efficiency(sum_rate: f64, consumed: f64) -> Result<f64> {
    if !(consumed > 0.0) {
        return Err(Error::Domain("consumed power must be positive"));
    }
    Ok(sum_rate / consumed)
}

#[derive(Debug, Clone, PartialEq)]
pub struct LinkReport {
    pub per_user: Vec<UserLink>,
    pub sum_rate: f64,
    pub consumed_power: f64,
    pub energy_efficiency: f64,
}

impl LinkReport {
    /// Worst SINR over the reported users, zero when there are none.
    pub fn min_sinr(&self) -> f64 {
        if self.per_user.is_empty() {
            return 0.0;
        }
        self.per_user
            .iter()
            .map(|u| u.sinr)
            .fold(f64::INFINITY, f64::min)
    }
}

pub fn evaluate_link(
    scene: &Scene,
    h: &Matrix,
    precoder: &Precoder,
    model: RateModel,
) -> Result<LinkReport> {
    let hg = h.mul(&precoder.weights);
    let per_user: Vec<UserLink> = scene
        .users
        .iter()
        .enumerate()
        .map(|(u, user)| {
            user_link_from_product(u, &hg, user.responsivity, &scene.electrical, model)
        })
        .collect();
    let sum_rate = per_user.iter().map(|u| u.rate).sum();
    let consumed = consumed_power(scene);
    Ok(LinkReport {
        per_user,
        sum_rate,
        consumed_power: consumed,
        energy_efficiency: efficiency(sum_rate, consumed)?,
    })
}
