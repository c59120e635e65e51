//! Decision layer: thresholded detection and sign-rounding recovery.

use crate::counting::{
    exact_detection_stat, exact_recovery_score, f_tilde, phi_tilde_grid, ratio_f64, ColorCodingPlan,
};
use crate::error::{Error, Result};
use crate::family::{ChainFamily, NecklaceFamily};
use crate::tensor::{Spike, SymmetricTensor};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Mode {
    Exact,
    Cc,
}

/// Detection test configuration. The threshold is τ = C·E_P[f_H] with the
/// exact finite-n planted mean.
#[derive(Clone, Copy, Debug)]
pub struct DetectionConfig {
    /// Threshold fraction C in (0,1).
    pub threshold_fraction: f64,
    pub lambda: f64,
    pub mode: Mode,
    /// Seed for the color-coding plan (cc mode).
    pub seed: u64,
    /// Optional repetition override for cc mode.
    pub t_override: Option<u32>,
}

#[derive(Clone, Copy, Debug, Serialize)]
pub struct DetectionOutcome {
    pub decision: u8,
    pub statistic: f64,
    pub threshold: f64,
}

/// Exact finite-n planted mean of f_H:
/// λ^{2mℓ}·√β_H·C(n,mpℓ)·(mpℓ)!/n^{mpℓ}.
pub fn planted_mean(fam: &NecklaceFamily, n: u32, lambda: f64) -> f64 {
    let k = fam.n_vertices();
    let copies = crate::combinatorics::binomial(n as u64, k as u64) as f64
        * crate::combinatorics::factorial(k as u64) as f64;
    lambda.powi(2 * (fam.blocks.m * fam.ell) as i32) * ratio_f64(&fam.beta).sqrt() * copies
        / (n as f64).powi(k as i32)
}

/// Exact finite-n null second moment of f_H: C(n,mpℓ)·(mpℓ)!/n^{mpℓ}.
pub fn null_second_moment(fam: &NecklaceFamily, n: u32) -> f64 {
    let k = fam.n_vertices();
    crate::combinatorics::binomial(n as u64, k as u64) as f64
        * crate::combinatorics::factorial(k as u64) as f64
        / (n as f64).powi(k as i32)
}

/// The decision rule of the detection test: boundary inclusive.
#[inline]
pub fn decide(statistic: f64, threshold: f64) -> bool {
    statistic >= threshold
}

pub fn detect(
    tensor: &SymmetricTensor,
    fam: &NecklaceFamily,
    cfg: &DetectionConfig,
) -> Result<DetectionOutcome> {
    if fam.classes.is_empty() {
        return Err(Error::Family(format!(
            "necklace family (m={}, p={}, ell={}) is empty",
            fam.blocks.m, fam.blocks.p, fam.ell
        )));
    }
    if !(cfg.threshold_fraction > 0.0 && cfg.threshold_fraction < 1.0) {
        return Err(Error::Param(format!(
            "threshold fraction must lie in (0,1), got {}",
            cfg.threshold_fraction
        )));
    }
    let statistic = match cfg.mode {
        Mode::Exact => exact_detection_stat(tensor, fam)?,
        Mode::Cc => {
            let mut plan = ColorCodingPlan::detection(fam, cfg.seed)?;
            if let Some(t) = cfg.t_override {
                plan = plan.with_t(t)?;
            }
            f_tilde(tensor, fam, &plan)?.statistic
        }
    };
    let threshold = cfg.threshold_fraction * planted_mean(fam, tensor.n, cfg.lambda);
    Ok(DetectionOutcome {
        decision: decide(statistic, threshold) as u8,
        statistic,
        threshold,
    })
}

/// Output of the recovery estimator.
#[derive(Clone, Debug)]
pub struct RecoveryResult {
    pub estimate: Spike,
    pub anchor: u32,
    /// Score against the anchor per vertex; the anchor's own entry is 0.
    pub scores: Vec<f64>,
}

/// The sign-rounding rule: +1 for positive score, −1 otherwise (ties to −1);
/// the anchor itself gets +1.
pub fn round_scores(scores: &[f64], anchor: u32) -> Spike {
    let entries = scores
        .iter()
        .enumerate()
        .map(|(v, &s)| if v as u32 == anchor || s > 0.0 { 1 } else { -1 })
        .collect();
    Spike::new(entries).expect("signs are ±1")
}

pub fn recover(
    tensor: &SymmetricTensor,
    fam: &ChainFamily,
    lambda: f64,
    mode: Mode,
    anchor: u32,
    seed: u64,
    t_override: Option<u32>,
) -> Result<RecoveryResult> {
    if fam.classes.is_empty() {
        return Err(Error::Family(format!(
            "chain family (m={}, p={}, ell={}) is empty",
            fam.blocks.m, fam.blocks.p, fam.ell
        )));
    }
    let n = tensor.n;
    if anchor >= n {
        return Err(Error::Param(format!(
            "anchor {anchor} out of range for n={n}"
        )));
    }
    let scores: Vec<f64> = match mode {
        Mode::Exact => (0..n)
            .into_par_iter()
            .map(|j| {
                if j == anchor {
                    Ok(0.0)
                } else {
                    exact_recovery_score(tensor, fam, lambda, anchor, j)
                }
            })
            .collect::<Result<_>>()?,
        Mode::Cc => {
            let mut plan = ColorCodingPlan::recovery(fam, seed)?;
            if let Some(t) = t_override {
                plan = plan.with_t(t)?;
            }
            let grid = phi_tilde_grid(tensor, fam, lambda, &plan)?;
            (0..n as usize)
                .map(|j| {
                    if j as u32 == anchor {
                        0.0
                    } else {
                        grid[anchor as usize * n as usize + j]
                            + grid[j * n as usize + anchor as usize]
                    }
                })
                .collect()
        }
    };
    Ok(RecoveryResult {
        estimate: round_scores(&scores, anchor),
        anchor,
        scores,
    })
}

/// |⟨a, b⟩| / (‖a‖·‖b‖) for ±1 vectors, i.e. |Σ a_i b_i| / n.
pub fn overlap(a: &Spike, b: &Spike) -> Result<f64> {
    if a.len() != b.len() {
        return Err(Error::Shape(format!(
            "overlap needs equal lengths, got {} and {}",
            a.len(),
            b.len()
        )));
    }
    if a.is_empty() {
        return Err(Error::Param("overlap of empty vectors".into()));
    }
    let dot: i64 = a
        .entries
        .iter()
        .zip(&b.entries)
        .map(|(&x, &y)| x as i64 * y as i64)
        .sum();
    Ok(dot.unsigned_abs() as f64 / a.len() as f64)
}
