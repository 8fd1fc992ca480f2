use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use super::ScoreError;

/// How a single design ended. Invalid trees and processor failures stop
/// the design before any solver and are counted with the motor stage.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DesignOutcome {
    Success,
    InvalidTree,
    ProcessorFail,
    MotorFail,
    ElecFail,
    WireFail,
}

impl DesignOutcome {
    pub fn as_str(self) -> &'static str {
        match self {
            DesignOutcome::Success => "success",
            DesignOutcome::InvalidTree => "invalid_tree",
            DesignOutcome::ProcessorFail => "processor_fail",
            DesignOutcome::MotorFail => "motor_fail",
            DesignOutcome::ElecFail => "elec_fail",
            DesignOutcome::WireFail => "wire_fail",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StageRatio {
    pub stage: String,
    pub failures: usize,
    /// `1 − failures / n_tot`, the layout of the published table.
    pub remaining: f64,
    /// Survivors of this stage over designs that reached it.
    pub conditional: f64,
    /// Survivors of this and all earlier stages over `n_tot`.
    pub cumulative: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Histogram {
    pub bin_width: f64,
    pub lo: f64,
    pub counts: Vec<usize>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BatchStats {
    pub n_tot: usize,
    pub n_succ: usize,
    pub n_fail_motor: usize,
    pub n_fail_elec: usize,
    pub n_fail_cable: usize,
    /// Informational: part of `n_fail_motor`.
    pub n_invalid_tree: usize,
    pub r_pass: f64,
    pub stages: Vec<StageRatio>,
    pub histogram: Histogram,
}

const S_MFG_MAX: f64 = 5.0;

/// Aggregates `(outcome, s_mfg)` pairs. Only successful designs enter the
/// histogram.
pub fn batch_stats(outcomes: &[(DesignOutcome, f64)], bin_width: f64) -> Result<BatchStats, ScoreError> {
    if outcomes.is_empty() {
        return Err(ScoreError::EmptyBatch);
    }
    let count = |pred: &dyn Fn(DesignOutcome) -> bool| outcomes.iter().filter(|(o, _)| pred(*o)).count();
    let n_tot = outcomes.len();
    let n_invalid_tree = count(&|o| o == DesignOutcome::InvalidTree);
    let n_fail_motor =
        count(&|o| matches!(o, DesignOutcome::InvalidTree | DesignOutcome::ProcessorFail | DesignOutcome::MotorFail));
    let n_fail_elec = count(&|o| o == DesignOutcome::ElecFail);
    let n_fail_cable = count(&|o| o == DesignOutcome::WireFail);
    Ok(from_counts(n_tot, n_fail_motor, n_fail_elec, n_fail_cable, n_invalid_tree, histogram(outcomes, bin_width)))
}

fn histogram(outcomes: &[(DesignOutcome, f64)], bin_width: f64) -> Histogram {
    let bins = (S_MFG_MAX / bin_width).ceil().max(1.0) as usize;
    let mut counts = vec![0; bins];
    for &(o, s) in outcomes {
        if o == DesignOutcome::Success {
            let b = ((s / bin_width).floor().max(0.0) as usize).min(bins - 1);
            counts[b] += 1;
        }
    }
    Histogram { bin_width, lo: 0.0, counts }
}

impl BatchStats {
    /// Stats from bare counts, for summaries built without per-design data.
    pub fn from_counts(n_tot: usize, n_fail_motor: usize, n_fail_elec: usize, n_fail_cable: usize) -> Result<Self, ScoreError> {
        if n_tot == 0 || n_fail_motor + n_fail_elec + n_fail_cable > n_tot {
            return Err(ScoreError::EmptyBatch);
        }
        let empty = Histogram { bin_width: 0.25, lo: 0.0, counts: vec![0; 20] };
        Ok(from_counts(n_tot, n_fail_motor, n_fail_elec, n_fail_cable, 0, empty))
    }
}

fn from_counts(
    n_tot: usize,
    n_fail_motor: usize,
    n_fail_elec: usize,
    n_fail_cable: usize,
    n_invalid_tree: usize,
    histogram: Histogram,
) -> BatchStats {
    let n_succ = n_tot - n_fail_motor - n_fail_elec - n_fail_cable;
    let total = n_tot as f64;
    let mut reached = n_tot;
    let stages = [("motor", n_fail_motor), ("electronics", n_fail_elec), ("cable", n_fail_cable)]
        .into_iter()
        .map(|(stage, failures)| {
            let survivors = reached - failures;
            let conditional = if reached == 0 { 0.0 } else { survivors as f64 / reached as f64 };
            reached = survivors;
            StageRatio {
                stage: stage.to_string(),
                failures,
                remaining: 1.0 - failures as f64 / total,
                conditional,
                cumulative: survivors as f64 / total,
            }
        })
        .collect();
    BatchStats {
        n_tot,
        n_succ,
        n_fail_motor,
        n_fail_elec,
        n_fail_cable,
        n_invalid_tree,
        r_pass: n_succ as f64 / total,
        stages,
        histogram,
    }
}

/// Plain-text table: one row per stage with its remaining ratio, then the
/// final pass-through. Conditional and cumulative ratios follow in their own
/// labelled columns.
pub fn render_stage_table(stats: &BatchStats) -> String {
    let mut out = String::new();
    let _ = writeln!(out, "{:<14}{:>12}{:>10}{:>14}{:>13}", "stage", "remaining", "failed", "(conditional)", "(cumulative)");
    for s in &stats.stages {
        let _ = writeln!(
            out,
            "{:<14}{:>11.2}%{:>10}{:>13.2}%{:>12.2}%",
            s.stage,
            100.0 * s.remaining,
            s.failures,
            100.0 * s.conditional,
            100.0 * s.cumulative
        );
    }
    let _ = writeln!(out, "{:<14}{:>11.2}%{:>10}", "pass-through", 100.0 * stats.r_pass, stats.n_succ);
    let _ = writeln!(out, "n_tot = {}", stats.n_tot);
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn five_designs() {
        use DesignOutcome::*;
        let outcomes = [(Success, 3.0), (Success, 2.0), (Success, 4.9), (MotorFail, 0.0), (ElecFail, 1.0)];
        let s = batch_stats(&outcomes, 0.25).unwrap();
        assert_eq!(s.r_pass, 0.6);
        assert_eq!(s.n_tot, s.n_succ + s.n_fail_motor + s.n_fail_elec + s.n_fail_cable);
        assert_eq!(s.histogram.counts.iter().sum::<usize>(), 3);
        assert_eq!(s.histogram.counts[19], 1);
    }

    #[test]
    fn all_success_ratios_are_one() {
        let s = batch_stats(&[(DesignOutcome::Success, 1.0); 4], 0.25).unwrap();
        assert!(s.stages.iter().all(|r| r.remaining == 1.0 && r.conditional == 1.0 && r.cumulative == 1.0));
    }

    #[test]
    fn empty_batch() {
        assert_eq!(batch_stats(&[], 0.25), Err(ScoreError::EmptyBatch));
    }
}
