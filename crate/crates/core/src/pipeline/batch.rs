use std::collections::BTreeMap;
use std::fs;
use std::path::Path;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::{run_pipeline, scores_csv_header, scores_csv_row, PipelineConfig, PipelineError, ReasonCode, Stage};
use crate::score::{batch_stats, render_stage_table, BatchStats, DesignOutcome, ScoreBundle};
use crate::voxel::{parse_morphology, MorphologySpec};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DesignRecord {
    pub id: String,
    pub outcome: DesignOutcome,
    pub stage_reached: Stage,
    pub reason: Option<ReasonCode>,
    pub detail: Option<String>,
    pub scores: ScoreBundle,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BatchResult {
    pub designs: Vec<DesignRecord>,
    pub stats: BatchStats,
}

/// Runs every design on a pool of `jobs` threads. Records keep input
/// order, so the result does not depend on `jobs`.
pub fn batch_run(designs: &[(String, MorphologySpec)], config: &PipelineConfig, jobs: usize) -> Result<BatchResult, PipelineError> {
    if designs.is_empty() {
        return Err(PipelineError::EmptyBatch);
    }
    config.validate()?;
    let pool = rayon::ThreadPoolBuilder::new().num_threads(jobs.max(1)).build().expect("thread pool builds");
    let records: Vec<DesignRecord> = pool.install(|| {
        designs
            .par_iter()
            .map(|(id, spec)| {
                let run = run_pipeline(spec, config)?;
                let failure = run.failure().map(|(r, reason)| (reason, r.status.clone()));
                let detail = failure.as_ref().and_then(|(_, s)| match s {
                    super::StageStatus::Failure { detail, .. } => Some(detail.clone()),
                    super::StageStatus::Success => None,
                });
                Ok(DesignRecord {
                    id: id.clone(),
                    outcome: run.outcome,
                    stage_reached: run.stage_reached(),
                    reason: failure.map(|(r, _)| r),
                    detail,
                    scores: run.scores,
                })
            })
            .collect::<Result<_, PipelineError>>()
    })?;
    let pairs: Vec<(DesignOutcome, f64)> = records.iter().map(|r| (r.outcome, r.scores.s_mfg)).collect();
    let stats = batch_stats(&pairs, config.scoring.histogram_bin_width).map_err(|_| PipelineError::EmptyBatch)?;
    Ok(BatchResult { designs: records, stats })
}

/// Morphology files (`*.vmorph`, `*.json`) in `dir`, sorted by file name.
pub fn load_design_dir(dir: &Path) -> Result<Vec<(String, MorphologySpec)>, PipelineError> {
    let io = |source| PipelineError::Io { path: dir.display().to_string(), source };
    let mut paths: Vec<_> = fs::read_dir(dir)
        .map_err(io)?
        .filter_map(|e| e.ok().map(|e| e.path()))
        .filter(|p| p.is_file() && matches!(p.extension().and_then(|e| e.to_str()), Some("vmorph" | "json")))
        .collect();
    paths.sort();
    if paths.is_empty() {
        return Err(PipelineError::EmptyBatch);
    }
    paths
        .iter()
        .map(|p| {
            let bytes = fs::read(p).map_err(|source| PipelineError::Io { path: p.display().to_string(), source })?;
            let id = p.file_stem().and_then(|s| s.to_str()).unwrap_or("design").to_string();
            Ok((id, parse_morphology(&bytes)?))
        })
        .collect()
}

/// Writes `batch.csv`, `summary.json`, `failure_labels.json` and
/// `table.txt`.
pub fn write_batch_outputs(result: &BatchResult, dir: &Path) -> Result<(), PipelineError> {
    let io = |path: &Path| {
        let path = path.display().to_string();
        move |source| PipelineError::Io { path, source }
    };
    fs::create_dir_all(dir).map_err(io(dir))?;
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(scores_csv_header()).expect("in-memory write");
    for r in &result.designs {
        let reason = r.reason.map_or("", ReasonCode::as_str);
        w.write_record(scores_csv_row(&r.id, r.stage_reached.as_str(), r.outcome.as_str(), reason, &r.scores))
            .expect("in-memory write");
    }
    let files: [(&str, Vec<u8>); 4] = [
        ("batch.csv", w.into_inner().expect("in-memory flush")),
        ("summary.json", serde_json::to_vec_pretty(&result.stats).expect("stats serialize")),
        (
            "failure_labels.json",
            serde_json::to_vec_pretty(
                &result.designs.iter().map(|r| (r.id.as_str(), r.outcome.as_str())).collect::<BTreeMap<_, _>>(),
            )
            .expect("labels serialize"),
        ),
        ("table.txt", render_stage_table(&result.stats).into_bytes()),
    ];
    for (name, bytes) in files {
        let path = dir.join(name);
        fs::write(&path, bytes).map_err(io(&path))?;
    }
    Ok(())
}
