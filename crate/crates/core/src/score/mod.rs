//! Manufacturability scores and batch pass-through statistics.

mod batch;

pub use batch::{batch_stats, render_stage_table, BatchStats, DesignOutcome, Histogram, StageRatio};

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::body::Part;
use crate::mesh::OrientedBox;
use crate::motor::MotorPlacement;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct ScoreBounds {
    pub motor: [f64; 2],
    pub elec: [f64; 2],
    pub cable: [f64; 2],
}

impl Default for ScoreBounds {
    fn default() -> Self {
        // motor upper bound is 20·τ for the default τ = 500 mm³
        Self { motor: [0.0, 10_000.0], elec: [0.0, 30.0], cable: [0.0, 1.5] }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct ScoringParams {
    /// 1/mm
    pub lambda_length: f64,
    /// mm
    pub lambda_curvature: f64,
    pub cable_alpha: f64,
    /// mm³
    pub inst_lambda: f64,
    /// Full OBB length above which the size penalty applies, mm.
    pub obb_threshold: f64,
    /// 1/mm
    pub obb_decay: f64,
    pub bounds: ScoreBounds,
    pub histogram_bin_width: f64,
}

impl Default for ScoringParams {
    fn default() -> Self {
        Self {
            lambda_length: 0.002,
            lambda_curvature: 2.0,
            cable_alpha: 0.5,
            inst_lambda: 50_000.0,
            obb_threshold: 200.0,
            obb_decay: 0.02,
            bounds: ScoreBounds::default(),
            histogram_bin_width: 0.25,
        }
    }
}

impl ScoringParams {
    pub fn validate(&self) -> Result<(), String> {
        for (name, v) in [
            ("lambda_length", self.lambda_length),
            ("lambda_curvature", self.lambda_curvature),
            ("inst_lambda", self.inst_lambda),
            ("obb_decay", self.obb_decay),
            ("histogram_bin_width", self.histogram_bin_width),
        ] {
            if !(v > 0.0) {
                return Err(format!("scoring.{name} must be positive"));
            }
        }
        if !(self.cable_alpha >= 0.0) || !(self.obb_threshold >= 0.0) {
            return Err("scoring.cable_alpha and obb_threshold must be non-negative".into());
        }
        let b = &self.bounds;
        for (name, [lo, hi]) in [("motor", b.motor), ("elec", b.elec), ("cable", b.cable)] {
            if !(hi > lo) {
                return Err(format!("scoring.bounds.{name} must have max > min"));
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ScoreError {
    #[error("no joints to score")]
    NoJoints,
    #[error("no interior clearance")]
    NoInterior,
    #[error("empty batch")]
    EmptyBatch,
}

/// The five manufacturability terms, raw or normalized.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct ScoreTerms {
    pub s_motor: f64,
    pub s_elec: f64,
    pub s_cable: f64,
    pub s_elec_inst: f64,
    pub s_body_inst: f64,
}

impl ScoreTerms {
    pub fn as_array(&self) -> [f64; 5] {
        [self.s_motor, self.s_elec, self.s_cable, self.s_elec_inst, self.s_body_inst]
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ScoreBundle {
    pub raw: ScoreTerms,
    pub normalized: ScoreTerms,
    pub s_mfg: f64,
}

/// Mean of the per-joint optimal offset scores.
pub fn score_motor(placements: &[MotorPlacement]) -> Result<f64, ScoreError> {
    if placements.is_empty() {
        return Err(ScoreError::NoJoints);
    }
    Ok(placements.iter().map(|p| p.score).sum::<f64>() / placements.len() as f64)
}

/// 1 up to the threshold, then exponential decay in the excess length.
pub fn obb_penalty(length: f64, params: &ScoringParams) -> f64 {
    if length <= params.obb_threshold {
        1.0
    } else {
        (-params.obb_decay * (length - params.obb_threshold)).exp()
    }
}

/// `d_max · p_obb`, with the penalty on the full length of the host's
/// longest OBB axis.
pub fn score_electronics(d_max: f64, obb: &OrientedBox, params: &ScoringParams) -> Result<f64, ScoreError> {
    if !(d_max > 0.0) {
        return Err(ScoreError::NoInterior);
    }
    Ok(d_max * obb_penalty(2.0 * obb.max_extent(), params))
}

/// `exp(−λ_L·L) + α·exp(−λ_κ·κ)`.
pub fn score_cable(total_length: f64, max_curvature: f64, params: &ScoringParams) -> f64 {
    (-params.lambda_length * total_length).exp() + params.cable_alpha * (-params.lambda_curvature * max_curvature).exp()
}

/// `exp(−V/λ)`.
pub fn score_installability(volume: f64, lambda: f64) -> f64 {
    (-volume / lambda).exp()
}

/// Total pairwise intersection volume of the parts' occupancy fields.
pub fn body_overlap_volume(parts: &BTreeMap<u32, Part>) -> f64 {
    let list: Vec<&Part> = parts.values().collect();
    let mut total = 0.0;
    for (i, a) in list.iter().enumerate() {
        for b in &list[i + 1..] {
            total += a.field.overlap_count(&b.field) as f64 * a.field.cell_volume();
        }
    }
    total
}

fn clamp_normalize(v: f64, [lo, hi]: [f64; 2]) -> f64 {
    ((v - lo) / (hi - lo)).clamp(0.0, 1.0)
}

/// Clamped min-max normalization of the first three terms; installability
/// terms already lie in (0, 1] and pass through.
pub fn aggregate(raw: ScoreTerms, params: &ScoringParams) -> ScoreBundle {
    let b = &params.bounds;
    let normalized = ScoreTerms {
        s_motor: clamp_normalize(raw.s_motor, b.motor),
        s_elec: clamp_normalize(raw.s_elec, b.elec),
        s_cable: clamp_normalize(raw.s_cable, b.cable),
        s_elec_inst: raw.s_elec_inst,
        s_body_inst: raw.s_body_inst,
    };
    ScoreBundle { raw, normalized, s_mfg: normalized.as_array().iter().sum() }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mesh::Vec3;
    use nalgebra::Matrix3;

    fn obb(half_length: f64) -> OrientedBox {
        OrientedBox { center: Vec3::zeros(), axes: Matrix3::identity(), extents: [half_length, 1.0, 1.0] }
    }

    #[test]
    fn cable_at_origin_and_half_life() {
        let p = ScoringParams::default();
        assert_eq!(score_cable(0.0, 0.0, &p), 1.0 + p.cable_alpha);
        let q = ScoringParams { lambda_length: 0.01, cable_alpha: 0.0, ..p };
        assert!((score_cable(100.0 * 2f64.ln(), 0.0, &q) - 0.5).abs() < 1e-12);
    }

    #[test]
    fn installability_spot_values() {
        assert_eq!(score_installability(0.0, 5000.0), 1.0);
        assert!((score_installability(5000.0, 5000.0) - (-1f64).exp()).abs() < 1e-12);
        assert!((score_installability(5000.0 * 10f64.ln(), 5000.0) - 0.1).abs() < 1e-12);
    }

    #[test]
    fn electronics_penalty() {
        let p = ScoringParams::default();
        assert_eq!(score_electronics(12.0, &obb(50.0), &p), Ok(12.0));
        let half = 0.5 * (p.obb_threshold + 2f64.ln() / p.obb_decay);
        assert!((score_electronics(12.0, &obb(half), &p).unwrap() - 6.0).abs() < 1e-12);
        assert_eq!(score_electronics(0.0, &obb(1.0), &p), Err(ScoreError::NoInterior));
    }

    #[test]
    fn aggregate_bounds() {
        let p = ScoringParams::default();
        let top = ScoreTerms { s_motor: 1e4, s_elec: 30.0, s_cable: 1.5, s_elec_inst: 1.0, s_body_inst: 1.0 };
        assert!((aggregate(top, &p).s_mfg - 5.0).abs() < 1e-12);
        let bottom = ScoreTerms { s_motor: -1.0, s_elec: 0.0, s_cable: 0.0, s_elec_inst: 0.0, s_body_inst: 0.0 };
        assert_eq!(aggregate(bottom, &p).s_mfg, 0.0);
        let failed_elec = ScoreTerms { s_elec: 0.0, ..top };
        assert!(aggregate(failed_elec, &p).s_mfg <= 4.0 + 1e-12);
    }

    #[test]
    fn motor_mean() {
        assert_eq!(score_motor(&[]), Err(ScoreError::NoJoints));
    }
}
