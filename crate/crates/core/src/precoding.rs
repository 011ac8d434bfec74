//! Zero-forcing precoding with a per-access-point optical power cap.
//!
//! `G₀` is the Moore–Penrose right inverse of the `U × A` channel, so
//! `H·G₀ = I`. A single scalar `β` then scales `G₀` until the worst access
//! point's summed absolute weights reach its cap: `G = β·G₀`, and every user
//! sees the same effective gain `√q_u = β`. Weights are in watts per unit
//! symbol amplitude; negative entries modulate below the bias point.

use alloc::vec::Vec;
#[allow(unused_imports)]
use num_traits::Float as _;

use crate::channel::ChannelMatrix;
use crate::error::{Error, Result};
use crate::linalg::{right_pseudo_inverse, Matrix};

#[derive(Debug, Clone, PartialEq)]
pub struct Precoder {
    /// `A × U` weights in watts, `β·G₀`.
    pub weights: Matrix,
    /// Unscaled right inverse `G₀`.
    pub unscaled: Matrix,
    /// Diagonal of `H·G`, i.e. `√q_u` per user.
    pub sqrt_q: Vec<f64>,
    /// Global power-normalisation scalar (W).
    pub beta: f64,
}

impl Precoder {
    pub fn q(&self) -> Vec<f64> {
        self.sqrt_q.iter().map(|s| s * s).collect()
    }

    /// Optical power drawn from each access point, `Σ_u |G[a,u]|`.
    pub fn ap_power(&self) -> Vec<f64> {
        (0..self.weights.rows())
            .map(|a| self.weights.row(a).iter().map(|g| g.abs()).sum())
            .collect()
    }
}

pub fn zf_precoder(h: &ChannelMatrix, per_ap_power_cap: f64) -> Result<Precoder> {
    let caps = alloc::vec![per_ap_power_cap; h.aps()];
    zf_precoder_with_caps(h.gains(), &caps)
}

/// Zero forcing with an individual power cap per access point.
pub fn zf_precoder_with_caps(h: &Matrix, caps: &[f64]) -> Result<Precoder> {
    if caps.len() != h.cols() {
        return Err(Error::invalid(
            "per_ap_power_cap",
            "one cap per access point required",
        ));
    }
    if let Some(a) = caps.iter().position(|c| !(*c > 0.0 && c.is_finite())) {
        return Err(Error::invalid(
            alloc::format!("per_ap_power_cap[{a}]"),
            "must be positive",
        ));
    }
    let g0 = right_pseudo_inverse(h)?;
    let beta = (0..g0.rows())
        .filter_map(|a| {
            let l1: f64 = g0.row(a).iter().map(|g| g.abs()).sum();
            (l1 > 0.0).then(|| caps[a] / l1)
        })
        .fold(f64::INFINITY, f64::min);
    if !beta.is_finite() {
        return Err(Error::Domain("precoder has no non-zero weights"));
    }
    let weights = g0.scale(beta);
    let hg = h.mul(&weights);
    let sqrt_q = (0..hg.rows()).map(|u| hg[(u, u)]).collect();
    Ok(Precoder {
        weights,
        unscaled: g0,
        sqrt_q,
        beta,
    })
}

/// `H·G` with its diagonal zeroed: the inter-user leakage left after
/// precoding.
pub fn residual_interference(h: &Matrix, g: &Matrix) -> Matrix {
    let mut m = h.mul(g);
    for i in 0..m.rows().min(m.cols()) {
        m[(i, i)] = 0.0;
    }
    m
}
