//! Beam-waist sweeps with and without the micro lens.
//!
//! Every sweep point rebuilds the emitters with the new waist, runs them at
//! their eye-safe cap, places users, rebuilds the channel, precodes and
//! evaluates the link. Rows are averaged over the placement seeds and come
//! out ordered by waist, then by the lens modes as listed in [`SweepSpec`].

use alloc::vec::Vec;
use core::fmt;
#[allow(unused_imports)]
use num_traits::Float as _;

use crate::channel::{build_channel_matrix, ChannelMatrix};
use crate::error::{Error, Result};
use crate::linalg::{right_pseudo_inverse, Matrix, RANK_TOLERANCE};
use crate::link::{consumed_power, energy_efficiency, evaluate_link, LinkReport, RateModel};
use crate::precoding::{zf_precoder_with_caps, Precoder};
use crate::safety::SafetyResult;
use crate::scene::{default_lens, place_users, place_users_on_axis, Scene};

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum LensMode {
    On,
    Off,
}

impl fmt::Display for LensMode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            LensMode::On => "on",
            LensMode::Off => "off",
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Placement {
    /// User `i` directly below access point `i`.
    #[default]
    OnAxis,
    /// Uniform over the room footprint, one draw per seed.
    Random,
}

impl fmt::Display for Placement {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Placement::OnAxis => "on-axis",
            Placement::Random => "random",
        })
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepSpec {
    pub waist_start: f64,
    pub waist_end: f64,
    pub steps: usize,
    pub lens_modes: Vec<LensMode>,
    pub seeds: Vec<u64>,
    pub users: usize,
    pub placement: Placement,
    pub rate_model: RateModel,
}

impl SweepSpec {
    /// The 1–8 µm sweep, both lens modes, one seed, four on-axis users.
    pub fn standard() -> Self {
        SweepSpec {
            waist_start: 1e-6,
            waist_end: 8e-6,
            steps: 8,
            lens_modes: alloc::vec![LensMode::On, LensMode::Off],
            seeds: alloc::vec![0],
            users: 4,
            placement: Placement::OnAxis,
            rate_model: RateModel::Shannon,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.waist_start > 0.0 && self.waist_start.is_finite()) {
            return Err(Error::invalid("waist_start", "must be positive"));
        }
        if !(self.waist_start < self.waist_end && self.waist_end.is_finite()) {
            return Err(Error::invalid("waist_end", "must exceed waist_start"));
        }
        if self.steps < 2 {
            return Err(Error::invalid("steps", "at least 2 steps are required"));
        }
        if self.lens_modes.is_empty() {
            return Err(Error::invalid(
                "lens_modes",
                "at least one lens mode is required",
            ));
        }
        if self.seeds.is_empty() {
            return Err(Error::invalid("seeds", "at least one seed is required"));
        }
        if self.users == 0 {
            return Err(Error::invalid("users", "must be positive"));
        }
        Ok(())
    }

    /// Evenly spaced waists, both ends exact.
    pub fn waists(&self) -> Vec<f64> {
        let last = (self.steps - 1) as f64;
        (0..self.steps)
            .map(|i| {
                let t = i as f64;
                (self.waist_start * (last - t) + self.waist_end * t) / last
            })
            .collect()
    }
}

/// Everything computed at one `(waist, lens, seed)` point.
#[derive(Debug, Clone, PartialEq)]
pub struct PointResult {
    pub waist: f64,
    pub lens: LensMode,
    pub seed: u64,
    /// Eye-safety analysis of the first access point's emitters.
    pub safety: SafetyResult,
    /// Full channel, every placed user.
    pub channel: ChannelMatrix,
    /// Users that were precoded, in row order of `precoder` and `report`.
    /// The rest sit outside every beam and get zero rate.
    pub served: Vec<usize>,
    pub precoder: Precoder,
    pub report: LinkReport,
}

/// One output row: seed-averaged metrics at a `(waist, lens)` pair.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SweepRow {
    pub waist: f64,
    pub lens: LensMode,
    pub seed_count: usize,
    pub sum_rate: f64,
    pub sum_rate_std: f64,
    pub energy_efficiency: f64,
    pub energy_efficiency_std: f64,
    /// Worst user's SINR in dB, averaged over seeds.
    pub min_user_snr_db: f64,
    /// Eye-safe per-VCSEL power (W).
    pub p_max: f64,
}

/// Scene with every emitter set to `waist`, the lens fitted or removed and
/// each emitter running at its eye-safe cap.
pub fn configure_emitters(scene: &Scene, waist: f64, lens: LensMode) -> Result<Scene> {
    let mut s = scene.clone();
    for ap in &mut s.aps {
        ap.beam = ap.beam.with_waist(waist)?;
        ap.lens = match lens {
            LensMode::On => Some(ap.lens.unwrap_or_else(default_lens)),
            LensMode::Off => None,
        };
        ap.per_vcsel_power = ap.eye_safety(&s.safety)?.p_max;
    }
    Ok(s)
}

pub fn evaluate_point(
    scene: &Scene,
    spec: &SweepSpec,
    waist: f64,
    lens: LensMode,
    seed: u64,
) -> Result<PointResult> {
    let inner = || -> Result<PointResult> {
        let s = configure_emitters(scene, waist, lens)?;
        let s = match spec.placement {
            Placement::OnAxis => place_users_on_axis(&s, spec.users)?,
            Placement::Random => place_users(&s, spec.users, seed)?,
        };
        let safety = s.aps[0].eye_safety(&s.safety)?;
        let channel = build_channel_matrix(&s)?;
        let served = served_users(channel.gains());
        let h = Matrix::from_fn(served.len(), channel.aps(), |i, a| {
            channel.gains()[(served[i], a)]
        });
        let mut active = s.clone();
        active.users = served.iter().map(|&u| s.users[u]).collect();
        let (precoder, report) = if served.is_empty() {
            idle_point(&active)?
        } else {
            let caps: Vec<f64> = s.aps.iter().map(|ap| ap.power()).collect();
            let precoder = zf_precoder_with_caps(&h, &caps)?;
            let report = evaluate_link(&active, &h, &precoder, spec.rate_model)?;
            (precoder, report)
        };
        Ok(PointResult {
            waist,
            lens,
            seed,
            safety,
            channel,
            served,
            precoder,
            report,
        })
    };
    inner().map_err(|e| Error::SweepPoint {
        waist,
        lens,
        seed,
        source: alloc::boxed::Box::new(e),
    })
}

/// Nobody in any beam: no weights, no rate, full consumption.
fn idle_point(scene: &Scene) -> Result<(Precoder, LinkReport)> {
    let aps = scene.aps.len();
    let precoder = Precoder {
        weights: Matrix::zeros(aps, 0),
        unscaled: Matrix::zeros(aps, 0),
        sqrt_q: Vec::new(),
        beta: 0.0,
    };
    let consumed = consumed_power(scene);
    let report = LinkReport {
        per_user: Vec::new(),
        sum_rate: 0.0,
        consumed_power: consumed,
        energy_efficiency: energy_efficiency(&[], scene)?,
    };
    Ok((precoder, report))
}

/// Greedy user selection for zero forcing. Users are taken in index order
/// and kept while their rows stay linearly independent; a user whose
/// strongest gain is below `RANK_TOLERANCE` times the largest gain in `h` is
/// outside every beam and never kept.
pub fn served_users(h: &Matrix) -> Vec<usize> {
    let peak = h.max_abs();
    let mut chosen: Vec<usize> = Vec::new();
    for u in 0..h.rows() {
        if !(peak > 0.0 && h.row(u).iter().any(|g| g.abs() >= RANK_TOLERANCE * peak)) {
            continue;
        }
        chosen.push(u);
        let sub = Matrix::from_fn(chosen.len(), h.cols(), |i, a| h[(chosen[i], a)]);
        if right_pseudo_inverse(&sub).is_err() {
            chosen.pop();
        }
    }
    chosen
}

/// Mean and population standard deviation.
fn mean_std(values: impl Iterator<Item = f64> + Clone) -> (f64, f64) {
    let n = values.clone().count() as f64;
    let mean = values.clone().sum::<f64>() / n;
    let var = values.map(|v| (v - mean) * (v - mean)).sum::<f64>() / n;
    (mean, var.sqrt())
}

pub fn aggregate(points: &[PointResult]) -> Result<SweepRow> {
    let first = points
        .first()
        .ok_or_else(|| Error::invalid("seeds", "no points to aggregate"))?;
    let (sum_rate, sum_rate_std) = mean_std(points.iter().map(|p| p.report.sum_rate));
    let (ee, ee_std) = mean_std(points.iter().map(|p| p.report.energy_efficiency));
    let (snr_db, _) = mean_std(points.iter().map(|p| 10.0 * p.report.min_sinr().log10()));
    Ok(SweepRow {
        waist: first.waist,
        lens: first.lens,
        seed_count: points.len(),
        sum_rate,
        sum_rate_std,
        energy_efficiency: ee,
        energy_efficiency_std: ee_std,
        min_user_snr_db: snr_db,
        p_max: first.safety.p_max,
    })
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepOutcome {
    pub rows: Vec<SweepRow>,
    pub points: Vec<PointResult>,
}

/// Runs the full grid. Points are evaluated in `(waist, lens, seed)` order.
pub fn run_sweep_detailed(scene: &Scene, spec: &SweepSpec) -> Result<SweepOutcome> {
    spec.validate()?;
    let mut rows = Vec::new();
    let mut points = Vec::new();
    for waist in spec.waists() {
        for &lens in &spec.lens_modes {
            let group = spec
                .seeds
                .iter()
                .map(|&seed| evaluate_point(scene, spec, waist, lens, seed))
                .collect::<Result<Vec<_>>>()?;
            rows.push(aggregate(&group)?);
            points.extend(group);
        }
    }
    Ok(SweepOutcome { rows, points })
}

pub fn run_sweep(scene: &Scene, spec: &SweepSpec) -> Result<Vec<SweepRow>> {
    run_sweep_detailed(scene, spec).map(|o| o.rows)
}
