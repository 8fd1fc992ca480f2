use std::fs;
use std::io;
use std::path::Path;

use serde::Serialize;

use super::{rigid_label, ProcessorProvenance, SemiVirtualBody};
use crate::mesh::{write_stl, Vec3};
use crate::voxel::KinematicTree;

pub const BODY_JSON: &str = "body.json";

#[derive(Serialize)]
struct PartEntry {
    segment: u32,
    file: String,
    voxels: usize,
    triangles: usize,
    volume_mm3: f64,
}

#[derive(Serialize)]
struct JointEntry {
    id: u32,
    position_mm: Vec3,
    axis: Vec3,
    range_rad: [f64; 2],
}

#[derive(Serialize)]
struct BodyDocument<'a> {
    parts: Vec<PartEntry>,
    skin: Option<&'static str>,
    tree: &'a KinematicTree,
    joints: Vec<JointEntry>,
    provenance: &'a ProcessorProvenance,
}

/// Writes `body.json`, `rigid_<id>.stl` per segment and `skin.stl`.
pub fn write_body_bundle(body: &SemiVirtualBody, dir: &Path) -> io::Result<()> {
    fs::create_dir_all(dir)?;
    let mut parts = Vec::new();
    for (&seg, part) in &body.rigid_parts {
        let file = format!("{}.stl", rigid_label(seg));
        fs::write(dir.join(&file), write_stl(&part.mesh))?;
        parts.push(PartEntry {
            segment: seg,
            file,
            voxels: body.labeling.segment_volumes[seg as usize],
            triangles: part.mesh.triangles.len(),
            volume_mm3: part.volume(),
        });
    }
    if let Some(skin) = &body.skin {
        fs::write(dir.join("skin.stl"), write_stl(&skin.mesh))?;
    }
    let doc = BodyDocument {
        parts,
        skin: body.skin.as_ref().map(|_| "skin.stl"),
        tree: &body.tree,
        joints: body
            .joints
            .iter()
            .map(|j| JointEntry { id: j.id, position_mm: j.position, axis: j.axis, range_rad: [j.motion_range.0, j.motion_range.1] })
            .collect(),
        provenance: &body.provenance,
    };
    let json = serde_json::to_vec_pretty(&doc).map_err(io::Error::other)?;
    fs::write(dir.join(BODY_JSON), json)
}
