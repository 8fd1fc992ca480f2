use std::fs;
use std::path::Path;

use super::{PipelineConfig, PipelineError, PipelineReport, PipelineRun};
use crate::mesh::write_stl;
use crate::motor::ScanSample;
use crate::score::ScoreBundle;

pub const REPORT_JSON: &str = "report.json";
pub const SCORES_CSV: &str = "scores.csv";

pub fn scores_csv_header() -> [&'static str; 15] {
    [
        "design",
        "stage_reached",
        "outcome",
        "failure_reason",
        "s_motor",
        "s_elec",
        "s_cable",
        "s_elec_inst",
        "s_body_inst",
        "n_motor",
        "n_elec",
        "n_cable",
        "n_elec_inst",
        "n_body_inst",
        "s_mfg",
    ]
}

pub fn scores_csv_row(design: &str, stage: &str, outcome: &str, reason: &str, scores: &ScoreBundle) -> Vec<String> {
    let mut row = vec![design.to_string(), stage.to_string(), outcome.to_string(), reason.to_string()];
    row.extend(scores.raw.as_array().iter().map(|v| v.to_string()));
    row.extend(scores.normalized.as_array().iter().map(|v| v.to_string()));
    row.push(scores.s_mfg.to_string());
    row
}

pub fn scan_curve_csv(curve: &[ScanSample]) -> Vec<u8> {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(["configuration", "delta_mm", "v_h_mm3", "v_c_mm3", "score"]).expect("in-memory write");
    for s in curve {
        w.write_record([
            s.configuration.as_str().to_string(),
            s.delta.to_string(),
            s.v_h.to_string(),
            s.v_c.to_string(),
            s.score.to_string(),
        ])
        .expect("in-memory write");
    }
    w.into_inner().expect("in-memory flush")
}

fn write(path: &Path, bytes: &[u8]) -> Result<(), PipelineError> {
    fs::write(path, bytes).map_err(|source| PipelineError::Io { path: path.display().to_string(), source })
}

/// Writes `report.json` and `scores.csv` for any run; a complete blueprint
/// also gets one binary STL per part and a scan-curve CSV per joint.
pub fn export_run(run: &PipelineRun, config: &PipelineConfig, dir: &Path) -> Result<(), PipelineError> {
    fs::create_dir_all(dir).map_err(|source| PipelineError::Io { path: dir.display().to_string(), source })?;
    write(&dir.join(REPORT_JSON), &PipelineReport::from_run(run, config).to_json())?;

    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(scores_csv_header()).expect("in-memory write");
    let reason = run.failure().map_or("", |(_, r)| r.as_str());
    w.write_record(scores_csv_row(&run.design, run.stage_reached().as_str(), run.outcome.as_str(), reason, &run.scores))
        .expect("in-memory write");
    write(&dir.join(SCORES_CSV), &w.into_inner().expect("in-memory flush"))?;

    if !run.is_blueprint() {
        return Ok(());
    }
    for part in run.rigid_parts.values().chain(run.skin.as_ref()) {
        write(&dir.join(format!("{}.stl", part.label)), &write_stl(&part.mesh))?;
    }
    if let Some(motors) = &run.motors {
        for m in &motors.placements {
            write(&dir.join(format!("scan_joint_{}.csv", m.joint)), &scan_curve_csv(&m.curves))?;
        }
    }
    Ok(())
}
