use super::TriMesh;

/// Fixed 80-byte header so repeated exports are byte-identical.
pub const STL_HEADER: [u8; 80] = {
    let text = b"binary STL";
    let mut h = [b' '; 80];
    let mut i = 0;
    while i < text.len() {
        h[i] = text[i];
        i += 1;
    }
    h
};

/// Binary STL bytes: header, u32 triangle count, then per triangle the unit
/// normal and three vertices as little-endian f32 plus a zero u16.
pub fn write_stl(mesh: &TriMesh) -> Vec<u8> {
    let mut out = Vec::with_capacity(84 + 50 * mesh.triangles.len());
    out.extend_from_slice(&STL_HEADER);
    out.extend_from_slice(&(mesh.triangles.len() as u32).to_le_bytes());
    for t in 0..mesh.triangles.len() {
        let n = mesh.triangle_normal(t);
        let len = n.norm();
        let n = if len > 0.0 { n / len } else { n };
        for v in std::iter::once(n).chain(mesh.triangle(t)) {
            for c in v.iter() {
                out.extend_from_slice(&(*c as f32).to_le_bytes());
            }
        }
        out.extend_from_slice(&0u16.to_le_bytes());
    }
    out
}

/// Triangle count from a binary STL, if the length is consistent with it.
pub fn read_stl_triangle_count(bytes: &[u8]) -> Option<u32> {
    let count = u32::from_le_bytes(bytes.get(80..84)?.try_into().ok()?);
    (bytes.len() == 84 + 50 * count as usize).then_some(count)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mesh::{make_box, Vec3};

    #[test]
    fn count_field_matches_mesh() {
        let m = make_box(&Vec3::new(1.0, 2.0, 3.0)).unwrap();
        let bytes = write_stl(&m);
        assert_eq!(&bytes[..80], &STL_HEADER);
        assert_eq!(read_stl_triangle_count(&bytes), Some(m.triangles.len() as u32));
        assert_eq!(bytes, write_stl(&m));
    }

    #[test]
    fn first_facet_layout() {
        let m = make_box(&Vec3::repeat(1.0)).unwrap();
        let bytes = write_stl(&m);
        let f = |off: usize| f32::from_le_bytes(bytes[off..off + 4].try_into().unwrap());
        let [a, _, _] = m.triangle(0);
        assert_eq!(f(84 + 12), a.x as f32);
        assert_eq!(&bytes[84 + 48..84 + 50], &[0, 0]);
    }
}
