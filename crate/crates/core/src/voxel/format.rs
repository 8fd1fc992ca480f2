//! The `.vmorph` JSON morphology file.
//!
//! Serialization is canonical: compact JSON, fields in a fixed order, maximal
//! label runs and sorted metadata keys. Any file produced by
//! [`serialize_morphology`] parses back and re-serializes to the same bytes.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use super::{JointAnnotation, MaterialGrid, MaterialLabel, MorphologySpec};

pub const FORMAT_VERSION: u32 = 1;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum MorphologyError {
    #[error("malformed morphology file at `{field}`: {message}")]
    MalformedFile { field: String, message: String },
    #[error("invariant violation at `{field}`: {message}")]
    InvariantViolation { field: String, message: String },
}

impl MorphologyError {
    pub(crate) fn malformed(field: &str, message: impl Into<String>) -> Self {
        Self::MalformedFile { field: field.to_owned(), message: message.into() }
    }

    pub(crate) fn invariant(field: &str, message: impl Into<String>) -> Self {
        Self::InvariantViolation { field: field.to_owned(), message: message.into() }
    }

    pub fn field(&self) -> &str {
        match self {
            Self::MalformedFile { field, .. } | Self::InvariantViolation { field, .. } => field,
        }
    }
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct FileRepr {
    version: u32,
    dims: [usize; 3],
    voxel_size_mm: f64,
    labels_rle: Vec<[u64; 2]>,
    joints: Vec<JointRepr>,
    meta: BTreeMap<String, String>,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct JointRepr {
    id: u32,
    position_mm: [f64; 3],
    axis: [f64; 3],
    range_rad: [f64; 2],
}

pub fn serialize_morphology(spec: &MorphologySpec) -> Vec<u8> {
    let mut runs: Vec<[u64; 2]> = Vec::new();
    for label in spec.grid.labels() {
        let code = u64::from(label.code());
        match runs.last_mut() {
            Some(run) if run[1] == code => run[0] += 1,
            _ => runs.push([1, code]),
        }
    }
    let repr = FileRepr {
        version: FORMAT_VERSION,
        dims: spec.grid.dims(),
        voxel_size_mm: spec.grid.voxel_size(),
        labels_rle: runs,
        joints: spec
            .joints
            .iter()
            .map(|j| JointRepr {
                id: j.id,
                position_mm: j.position.into(),
                axis: j.axis.into(),
                range_rad: [j.motion_range.0, j.motion_range.1],
            })
            .collect(),
        meta: spec.meta.clone(),
    };
    serde_json::to_vec(&repr).expect("morphology serialization cannot fail")
}

pub fn parse_morphology(bytes: &[u8]) -> Result<MorphologySpec, MorphologyError> {
    let value: serde_json::Value = serde_json::from_slice(bytes)
        .map_err(|e| MorphologyError::malformed("<document>", e.to_string()))?;
    let obj = value
        .as_object()
        .ok_or_else(|| MorphologyError::malformed("<document>", "expected a JSON object"))?;
    match obj.get("version").and_then(|v| v.as_u64()) {
        Some(v) if v == u64::from(FORMAT_VERSION) => {}
        Some(v) => return Err(MorphologyError::malformed("version", format!("unsupported version {v}"))),
        None => return Err(MorphologyError::malformed("version", "missing or not an integer")),
    }
    for key in ["dims", "voxel_size_mm", "labels_rle", "joints", "meta"] {
        if !obj.contains_key(key) {
            return Err(MorphologyError::malformed(key, "missing field"));
        }
    }
    let repr: FileRepr = serde_json::from_value(value)
        .map_err(|e| MorphologyError::malformed("<document>", e.to_string()))?;

    let [nx, ny, nz] = repr.dims;
    let total = nx
        .checked_mul(ny)
        .and_then(|v| v.checked_mul(nz))
        .ok_or_else(|| MorphologyError::invariant("dims", "grid too large"))?;
    if !repr.dims.iter().all(|d| (super::MIN_DIM..=super::MAX_DIM).contains(d)) {
        return Err(MorphologyError::invariant("dims", "each dimension must lie in [4, 256]"));
    }
    let mut labels = Vec::with_capacity(total);
    for (n, [count, code]) in repr.labels_rle.iter().copied().enumerate() {
        let field = format!("labels_rle[{n}]");
        if count == 0 {
            return Err(MorphologyError::malformed(&field, "zero-length run"));
        }
        let label = MaterialLabel::from_code(code)
            .ok_or_else(|| MorphologyError::malformed(&field, format!("unknown label code {code}")))?;
        if labels.len() as u64 + count > total as u64 {
            return Err(MorphologyError::invariant("labels_rle", "total run length exceeds nx*ny*nz"));
        }
        labels.extend(std::iter::repeat_n(label, count as usize));
    }
    if labels.len() != total {
        return Err(MorphologyError::invariant("labels_rle", "total run length must equal nx*ny*nz"));
    }
    let grid = MaterialGrid::from_labels(repr.dims, repr.voxel_size_mm, labels)?;
    let joints = repr
        .joints
        .into_iter()
        .map(|j| JointAnnotation::new(j.id, j.position_mm, j.axis, (j.range_rad[0], j.range_rad[1])))
        .collect();
    let spec = MorphologySpec { grid, joints, meta: repr.meta };
    spec.validate()?;
    Ok(spec)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn empty_spec() -> MorphologySpec {
        MorphologySpec::new(MaterialGrid::new([4, 4, 4], 5.0), vec![])
    }

    #[test]
    fn minimal_empty_grid_parses() {
        let bytes = serialize_morphology(&empty_spec());
        let spec = parse_morphology(&bytes).unwrap();
        assert_eq!(spec.grid.non_empty_count(), 0);
        assert!(spec.joints.is_empty());
    }

    #[test]
    fn non_unit_axis_is_rejected() {
        let mut spec = empty_spec();
        spec.joints.push(JointAnnotation::new(0, [10.0, 10.0, 10.0], [0.0, 0.0, 2.0], (-1.0, 1.0)));
        let err = parse_morphology(&serialize_morphology(&spec)).unwrap_err();
        match err {
            MorphologyError::InvariantViolation { field, message } => {
                assert_eq!(field, "joints[0].axis");
                assert_eq!(message, "axis not unit");
            }
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn bad_version_is_malformed() {
        let text = String::from_utf8(serialize_morphology(&empty_spec())).unwrap();
        let text = text.replace("\"version\":1", "\"version\":7");
        let err = parse_morphology(text.as_bytes()).unwrap_err();
        assert!(matches!(err, MorphologyError::MalformedFile { ref field, .. } if field == "version"));
    }

    #[test]
    fn short_rle_is_rejected() {
        let text = String::from_utf8(serialize_morphology(&empty_spec())).unwrap();
        let text = text.replace("[[64,0]]", "[[60,0]]");
        let err = parse_morphology(text.as_bytes()).unwrap_err();
        assert_eq!(err.field(), "labels_rle");
    }

    #[test]
    fn duplicate_joint_ids_rejected() {
        let mut spec = empty_spec();
        for _ in 0..2 {
            spec.joints.push(JointAnnotation::new(3, [5.0, 5.0, 5.0], [1.0, 0.0, 0.0], (0.0, 1.0)));
        }
        let err = parse_morphology(&serialize_morphology(&spec)).unwrap_err();
        assert_eq!(err.field(), "joints[3].id");
    }

    #[test]
    fn position_outside_grid_rejected() {
        let mut spec = empty_spec();
        spec.joints.push(JointAnnotation::new(0, [25.0, 5.0, 5.0], [1.0, 0.0, 0.0], (0.0, 1.0)));
        let err = parse_morphology(&serialize_morphology(&spec)).unwrap_err();
        assert_eq!(err.field(), "joints[0].position_mm");
    }

    #[test]
    fn garbage_is_malformed() {
        assert!(matches!(
            parse_morphology(b"{not json").unwrap_err(),
            MorphologyError::MalformedFile { .. }
        ));
    }
}
