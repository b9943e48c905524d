//! Closed triangulated surfaces with inner orientation.
//!
//! Every [`TriMesh`] is validated on construction: it must be a closed,
//! orientable 2-manifold without degenerate faces. Face orientation is then
//! canonicalized per connected component so that the face normals
//! `(p1 - p0) × (p2 - p0)` point into the enclosed domain. The file order of
//! the input is never trusted for this.

mod generate;
mod io;

use std::collections::{BTreeMap, VecDeque};

use nalgebra::Vector3;

use crate::{Error, Result};

pub use generate::{make_ellipsoid, make_sphere, make_torus, MIN_RESOLUTION};
pub use io::{load_mesh, load_mesh_file, write_obj, write_off, MeshFormat};

/// Faces with area below this fraction of the squared bounding-box diagonal are rejected.
pub const DEGENERATE_AREA_RATIO: f64 = 1e-12;

/// Closed oriented triangle mesh with cached inner normals and lumped areas.
#[derive(Debug, Clone)]
pub struct TriMesh {
    label: String,
    positions: Vec<Vector3<f64>>,
    faces: Vec<[usize; 3]>,
    normals: Vec<Vector3<f64>>,
    areas: Vec<f64>,
    face_areas: Vec<f64>,
    edges: Vec<[usize; 2]>,
    neighbors: Vec<Vec<usize>>,
    fingerprint: u64,
}

impl TriMesh {
    /// Validates the input and canonicalizes its orientation to inner normals.
    pub fn new(positions: Vec<Vector3<f64>>, faces: Vec<[usize; 3]>) -> Result<Self> {
        if positions.is_empty() || faces.is_empty() {
            return Err(Error::InvalidParameter(
                "mesh has no vertices or faces".into(),
            ));
        }
        if positions.iter().any(|p| !p.iter().all(|c| c.is_finite())) {
            return Err(Error::InvalidParameter(
                "non-finite vertex coordinate".into(),
            ));
        }
        let nv = positions.len();
        for (f, face) in faces.iter().enumerate() {
            if face.iter().any(|&v| v >= nv) {
                return Err(Error::InvalidParameter(format!(
                    "face {f} references a vertex outside 0..{nv}"
                )));
            }
        }

        let diag2 = bbox_diagonal_sq(&positions);
        for (f, face) in faces.iter().enumerate() {
            let area = triangle_area(&positions, face);
            let repeated = face[0] == face[1] || face[1] == face[2] || face[0] == face[2];
            if repeated || area < DEGENERATE_AREA_RATIO * diag2 {
                return Err(Error::DegenerateFace {
                    face: f,
                    area: if repeated { 0.0 } else { area },
                });
            }
        }

        let mut faces = faces;
        let incidence = edge_incidence(&faces)?;
        let flips = consistent_orientation(&faces, &incidence)?;
        for (face, flip) in faces.iter_mut().zip(&flips.flip) {
            if *flip {
                face.swap(1, 2);
            }
        }
        // Inner orientation: the signed volume of each component must be negative.
        let mut volume = vec![0.0; flips.components];
        for (face, &c) in faces.iter().zip(&flips.component) {
            volume[c] += signed_volume_term(&positions, face);
        }
        for (face, &c) in faces.iter_mut().zip(&flips.component) {
            if volume[c] > 0.0 {
                face.swap(1, 2);
            }
        }

        Ok(Self::from_oriented(
            String::from("mesh"),
            positions,
            faces,
            incidence.into_keys().collect(),
        ))
    }

    fn from_oriented(
        label: String,
        positions: Vec<Vector3<f64>>,
        faces: Vec<[usize; 3]>,
        edges: Vec<[usize; 2]>,
    ) -> Self {
        let nv = positions.len();
        let mut normals = vec![Vector3::zeros(); nv];
        let mut areas = vec![0.0; nv];
        let mut face_areas = Vec::with_capacity(faces.len());
        for face in &faces {
            let n = face_normal(&positions, face);
            let area = 0.5 * n.norm();
            face_areas.push(area);
            for &v in face {
                normals[v] += n;
                areas[v] += area / 3.0;
            }
        }
        for n in &mut normals {
            n.normalize_mut();
        }
        let mut neighbors = vec![Vec::new(); nv];
        for &[a, b] in &edges {
            neighbors[a].push(b);
            neighbors[b].push(a);
        }
        for ring in &mut neighbors {
            ring.sort_unstable();
        }
        let fingerprint = fingerprint(&positions, &faces);
        Self {
            label,
            positions,
            faces,
            normals,
            areas,
            face_areas,
            edges,
            neighbors,
            fingerprint,
        }
    }

    /// Replaces the human-readable identifier carried into reports.
    pub fn with_label(mut self, label: impl Into<String>) -> Self {
        self.label = label.into();
        self
    }

    /// Same surface with every face reversed, so that normals point outward.
    ///
    /// The result deliberately breaks the inner-orientation convention and is
    /// meant for sign checks.
    pub fn reversed(&self) -> Self {
        let faces = self.faces.iter().map(|&[a, b, c]| [a, c, b]).collect();
        Self::from_oriented(
            self.label.clone(),
            self.positions.clone(),
            faces,
            self.edges.clone(),
        )
    }

    pub fn label(&self) -> &str {
        &self.label
    }

    pub fn vertex_count(&self) -> usize {
        self.positions.len()
    }

    pub fn face_count(&self) -> usize {
        self.faces.len()
    }

    pub fn edge_count(&self) -> usize {
        self.edges.len()
    }

    pub fn positions(&self) -> &[Vector3<f64>] {
        &self.positions
    }

    pub fn faces(&self) -> &[[usize; 3]] {
        &self.faces
    }

    /// Unique undirected edges `[i, j]` with `i < j`, sorted.
    pub fn edges(&self) -> &[[usize; 2]] {
        &self.edges
    }

    /// Sorted one-ring of each vertex.
    pub fn neighbors(&self) -> &[Vec<usize>] {
        &self.neighbors
    }

    /// Area-weighted unit vertex normals pointing into the enclosed domain.
    pub fn normals(&self) -> &[Vector3<f64>] {
        &self.normals
    }

    /// Barycentric (lumped) vertex areas.
    pub fn lumped_areas(&self) -> &[f64] {
        &self.areas
    }

    pub fn face_areas(&self) -> &[f64] {
        &self.face_areas
    }

    pub fn total_area(&self) -> f64 {
        self.face_areas.iter().sum()
    }

    pub fn euler_characteristic(&self) -> i64 {
        self.positions.len() as i64 - self.edges.len() as i64 + self.faces.len() as i64
    }

    /// Volume from the divergence theorem with the stored orientation; negative for inner normals.
    pub fn enclosed_volume(&self) -> f64 {
        self.faces
            .iter()
            .map(|f| signed_volume_term(&self.positions, f))
            .sum()
    }

    pub fn mean_edge_length(&self) -> f64 {
        let total: f64 = self
            .edges
            .iter()
            .map(|&[a, b]| (self.positions[a] - self.positions[b]).norm())
            .sum();
        total / self.edges.len() as f64
    }

    /// Hash of positions and faces, used to match derived data to its mesh.
    pub fn fingerprint(&self) -> u64 {
        self.fingerprint
    }
}

fn face_normal(positions: &[Vector3<f64>], face: &[usize; 3]) -> Vector3<f64> {
    let [a, b, c] = *face;
    (positions[b] - positions[a]).cross(&(positions[c] - positions[a]))
}

fn triangle_area(positions: &[Vector3<f64>], face: &[usize; 3]) -> f64 {
    0.5 * face_normal(positions, face).norm()
}

fn signed_volume_term(positions: &[Vector3<f64>], face: &[usize; 3]) -> f64 {
    let [a, b, c] = *face;
    positions[a].dot(&positions[b].cross(&positions[c])) / 6.0
}

fn bbox_diagonal_sq(positions: &[Vector3<f64>]) -> f64 {
    let mut lo = positions[0];
    let mut hi = positions[0];
    for p in positions {
        lo = lo.inf(p);
        hi = hi.sup(p);
    }
    (hi - lo).norm_squared()
}

/// Faces incident to each undirected edge, with the direction each face traverses it.
type Incidence = BTreeMap<[usize; 2], Vec<(usize, bool)>>;

fn edge_incidence(faces: &[[usize; 3]]) -> Result<Incidence> {
    let mut map: Incidence = BTreeMap::new();
    for (f, face) in faces.iter().enumerate() {
        for k in 0..3 {
            let (a, b) = (face[k], face[(k + 1) % 3]);
            let key = if a < b { [a, b] } else { [b, a] };
            map.entry(key).or_default().push((f, a < b));
        }
    }
    if let Some((&[a, b], inc)) = map.iter().find(|(_, inc)| inc.len() != 2) {
        return Err(Error::NotClosed {
            a,
            b,
            count: inc.len(),
        });
    }
    Ok(map)
}

struct Orientation {
    flip: Vec<bool>,
    component: Vec<usize>,
    components: usize,
}

fn consistent_orientation(faces: &[[usize; 3]], incidence: &Incidence) -> Result<Orientation> {
    let nf = faces.len();
    let mut adjacent: Vec<Vec<(usize, bool)>> = vec![Vec::new(); nf];
    for inc in incidence.values() {
        let (f, df) = inc[0];
        let (g, dg) = inc[1];
        // Two faces agree when they traverse their shared edge in opposite directions.
        let same = df == dg;
        adjacent[f].push((g, same));
        adjacent[g].push((f, same));
    }
    let mut flip = vec![false; nf];
    let mut component = vec![usize::MAX; nf];
    let mut components = 0;
    let mut queue = VecDeque::new();
    for seed in 0..nf {
        if component[seed] != usize::MAX {
            continue;
        }
        component[seed] = components;
        queue.push_back(seed);
        while let Some(f) = queue.pop_front() {
            for &(g, same) in &adjacent[f] {
                let want = flip[f] ^ same;
                if component[g] == usize::MAX {
                    component[g] = components;
                    flip[g] = want;
                    queue.push_back(g);
                } else if flip[g] != want {
                    return Err(Error::NotOrientable);
                }
            }
        }
        components += 1;
    }
    Ok(Orientation {
        flip,
        component,
        components,
    })
}

fn fingerprint(positions: &[Vector3<f64>], faces: &[[usize; 3]]) -> u64 {
    // FNV-1a over the raw bit patterns.
    let mut h: u64 = 0xcbf2_9ce4_8422_2325;
    let mut feed = |x: u64| {
        for byte in x.to_le_bytes() {
            h ^= byte as u64;
            h = h.wrapping_mul(0x0100_0000_01b3);
        }
    };
    for p in positions {
        p.iter().for_each(|c| feed(c.to_bits()));
    }
    for f in faces {
        f.iter().for_each(|&v| feed(v as u64));
    }
    h
}
