//! Discrete curvature of a [`TriMesh`] with respect to its inner normal.
//!
//! * `H` from the cotangent Laplacian of the position field, `Δp = 2H N`.
//! * `K` from the angle defect.
//! * The shape operator from a least-squares quadratic height fit over the one-ring.
//!
//! `H` and `K` are normalized by mixed Voronoi areas.

use std::f64::consts::TAU;

use nalgebra::{DMatrix, DVector, Matrix2, SymmetricEigen, Vector3};
use rayon::prelude::*;

use crate::mesh::TriMesh;
use crate::{Error, Result};

/// Relative spectral gap below which a one-ring is treated as collinear.
pub const FIT_CONDITION_LIMIT: f64 = 1e-9;

/// Shape operator in an orthonormal tangent frame.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ShapeOperator {
    pub frame: [Vector3<f64>; 2],
    pub matrix: Matrix2<f64>,
}

impl ShapeOperator {
    /// `trace(A) / 2`.
    pub fn mean(&self) -> f64 {
        0.5 * self.matrix.trace()
    }

    /// `det(A)`.
    pub fn gauss(&self) -> f64 {
        self.matrix.determinant()
    }

    /// Principal curvatures, ascending.
    pub fn principal(&self) -> (f64, f64) {
        let e = SymmetricEigen::new(self.matrix).eigenvalues;
        (e[0].min(e[1]), e[0].max(e[1]))
    }

    /// `‖A - (trace(A)/2) I‖_F`, zero exactly at umbilics.
    pub fn trace_free_norm(&self) -> f64 {
        (self.matrix - Matrix2::identity() * self.mean()).norm()
    }

    /// `|σ|² = ‖A‖_F²`.
    pub fn norm_squared(&self) -> f64 {
        self.matrix.norm_squared()
    }
}

/// Per-vertex curvature of one mesh.
#[derive(Debug, Clone)]
pub struct CurvatureField {
    mean: Vec<f64>,
    gauss: Vec<f64>,
    shape: Vec<ShapeOperator>,
    dual_areas: Vec<f64>,
    cotan: Vec<f64>,
    fingerprint: u64,
}

impl CurvatureField {
    /// Cotangent mean curvature per vertex.
    pub fn mean(&self) -> &[f64] {
        &self.mean
    }

    /// Angle-defect Gauss curvature per vertex.
    pub fn gauss(&self) -> &[f64] {
        &self.gauss
    }

    /// Intrinsic scalar curvature `R = 2K`.
    pub fn scalar(&self) -> Vec<f64> {
        self.gauss.iter().map(|k| 2.0 * k).collect()
    }

    pub fn shape(&self) -> &[ShapeOperator] {
        &self.shape
    }

    /// Mean curvature `trace(A)/2` of the fitted shape operators.
    pub fn fitted_mean(&self) -> Vec<f64> {
        self.shape.iter().map(ShapeOperator::mean).collect()
    }

    /// Gauss curvature `det(A)` of the fitted shape operators.
    pub fn fitted_gauss(&self) -> Vec<f64> {
        self.shape.iter().map(ShapeOperator::gauss).collect()
    }

    /// Mixed Voronoi areas used to normalize `H` and `K`.
    pub fn dual_areas(&self) -> &[f64] {
        &self.dual_areas
    }

    /// Cotangent edge weights `(cot α + cot β) / 2`, aligned with [`TriMesh::edges`].
    pub fn cotan_weights(&self) -> &[f64] {
        &self.cotan
    }

    pub fn vertex_count(&self) -> usize {
        self.mean.len()
    }

    /// Fingerprint of the mesh this field was computed on.
    pub fn mesh_fingerprint(&self) -> u64 {
        self.fingerprint
    }

    /// `(vertex, H)` at the minimum of `H`.
    pub fn min_mean(&self) -> (usize, f64) {
        argmin(&self.mean)
    }

    /// `(vertex, K)` at the minimum of `K`.
    pub fn min_gauss(&self) -> (usize, f64) {
        argmin(&self.gauss)
    }

    /// Discrete Gauss–Bonnet sum `Σ K_i a_i`, equal to `2πχ` up to rounding.
    pub fn total_gauss(&self) -> f64 {
        self.gauss
            .iter()
            .zip(&self.dual_areas)
            .map(|(k, a)| k * a)
            .sum()
    }

    /// Fails with [`Error::CurvatureMismatch`] unless the field belongs to `mesh`.
    pub fn check_mesh(&self, mesh: &TriMesh) -> Result<()> {
        if self.fingerprint == mesh.fingerprint() && self.mean.len() == mesh.vertex_count() {
            Ok(())
        } else {
            Err(Error::CurvatureMismatch)
        }
    }
}

fn argmin(v: &[f64]) -> (usize, f64) {
    v.iter().copied().enumerate().fold(
        (0, f64::INFINITY),
        |best, (i, x)| if x < best.1 { (i, x) } else { best },
    )
}

/// Index of edge `[a, b]` in the sorted edge list.
pub(crate) fn edge_index(edges: &[[usize; 2]], a: usize, b: usize) -> usize {
    let key = if a < b { [a, b] } else { [b, a] };
    edges
        .binary_search(&key)
        .expect("edge of a face is in the edge list")
}

fn cot(u: &Vector3<f64>, v: &Vector3<f64>) -> f64 {
    u.dot(v) / u.cross(v).norm()
}

/// Cotangent weights `(cot α + cot β)/2` per edge of the mesh.
pub fn cotan_weights(mesh: &TriMesh) -> Vec<f64> {
    let p = mesh.positions();
    let edges = mesh.edges();
    let mut w = vec![0.0; edges.len()];
    for face in mesh.faces() {
        for k in 0..3 {
            let (c, a, b) = (face[k], face[(k + 1) % 3], face[(k + 2) % 3]);
            w[edge_index(edges, a, b)] += 0.5 * cot(&(p[a] - p[c]), &(p[b] - p[c]));
        }
    }
    w
}

fn mixed_areas(mesh: &TriMesh) -> Vec<f64> {
    let p = mesh.positions();
    let mut area = vec![0.0; mesh.vertex_count()];
    for (face, &fa) in mesh.faces().iter().zip(mesh.face_areas()) {
        let e = |k: usize| p[face[(k + 2) % 3]] - p[face[(k + 1) % 3]];
        let at = |k: usize| {
            (p[face[(k + 1) % 3]] - p[face[k]]).dot(&(p[face[(k + 2) % 3]] - p[face[k]]))
        };
        match (0..3).find(|&k| at(k) < 0.0) {
            None => {
                for k in 0..3 {
                    let (u, v) = (face[(k + 1) % 3], face[(k + 2) % 3]);
                    // The edge opposite each corner contributes to the other two vertices.
                    let c = cot(&(p[u] - p[face[k]]), &(p[v] - p[face[k]]));
                    let contrib = e(k).norm_squared() * c / 8.0;
                    area[u] += contrib;
                    area[v] += contrib;
                }
            }
            Some(obtuse) => {
                for k in 0..3 {
                    area[face[k]] += if k == obtuse { fa / 2.0 } else { fa / 4.0 };
                }
            }
        }
    }
    area
}

fn angle_sums(mesh: &TriMesh) -> Vec<f64> {
    let p = mesh.positions();
    let mut sum = vec![0.0; mesh.vertex_count()];
    for face in mesh.faces() {
        for k in 0..3 {
            let u = p[face[(k + 1) % 3]] - p[face[k]];
            let v = p[face[(k + 2) % 3]] - p[face[k]];
            sum[face[k]] += u.cross(&v).norm().atan2(u.dot(&v));
        }
    }
    sum
}

fn tangent_frame(n: &Vector3<f64>) -> [Vector3<f64>; 2] {
    let axis = if n.x.abs() <= n.y.abs() && n.x.abs() <= n.z.abs() {
        Vector3::x()
    } else if n.y.abs() <= n.z.abs() {
        Vector3::y()
    } else {
        Vector3::z()
    };
    let t1 = n.cross(&axis).normalize();
    [t1, n.cross(&t1)]
}

fn fit_stencil(mesh: &TriMesh, i: usize) -> Vec<usize> {
    let ring = &mesh.neighbors()[i];
    if ring.len() >= 5 {
        return ring.clone();
    }
    let mut wide: Vec<usize> = ring
        .iter()
        .flat_map(|&j| mesh.neighbors()[j].iter().copied())
        .chain(ring.iter().copied())
        .filter(|&j| j != i)
        .collect();
    wide.sort_unstable();
    wide.dedup();
    wide
}

fn fit_shape(mesh: &TriMesh, i: usize) -> Result<ShapeOperator> {
    let p = mesh.positions();
    let n = mesh.normals()[i];
    let frame = tangent_frame(&n);
    let stencil = fit_stencil(mesh, i);
    let h =
        stencil.iter().map(|&j| (p[j] - p[i]).norm()).sum::<f64>() / stencil.len().max(1) as f64;
    if stencil.len() < 3 || h <= 0.0 {
        return Err(Error::DegenerateOneRing(i));
    }
    // Height z = ½(a x² + 2b xy + c y²) + d x + e y, in coordinates scaled by h.
    let mut m = DMatrix::zeros(stencil.len(), 5);
    let mut rhs = DVector::zeros(stencil.len());
    for (row, &j) in stencil.iter().enumerate() {
        let d = (p[j] - p[i]) / h;
        let (x, y) = (d.dot(&frame[0]), d.dot(&frame[1]));
        m.set_row(
            row,
            &nalgebra::RowDVector::from_row_slice(&[0.5 * x * x, x * y, 0.5 * y * y, x, y]),
        );
        rhs[row] = d.dot(&n);
    }
    let scatter = m.columns(3, 2).transpose() * m.columns(3, 2);
    let e = SymmetricEigen::new(scatter).eigenvalues;
    if e.min() <= FIT_CONDITION_LIMIT * e.max() {
        return Err(Error::DegenerateOneRing(i));
    }
    // Minimum-norm solution; symmetric stencils may leave a coefficient undetermined.
    let svd = m.svd(true, true);
    let eps = FIT_CONDITION_LIMIT * svd.singular_values.max();
    let coef = svd
        .solve(&rhs, eps)
        .map_err(|_| Error::DegenerateOneRing(i))?;
    let matrix = Matrix2::new(coef[0], coef[1], coef[1], coef[2]) / h;
    Ok(ShapeOperator { frame, matrix })
}

/// Computes `H`, `K` and the shape operator at every vertex.
pub fn curvature(mesh: &TriMesh) -> Result<CurvatureField> {
    let nv = mesh.vertex_count();
    let p = mesh.positions();
    let cotan = cotan_weights(mesh);
    let dual_areas = mixed_areas(mesh);
    if let Some(i) = dual_areas.iter().position(|&a| a <= 0.0) {
        return Err(Error::DegenerateOneRing(i));
    }

    let mut laplace = vec![Vector3::zeros(); nv];
    for (&[a, b], &w) in mesh.edges().iter().zip(&cotan) {
        let d = (p[b] - p[a]) * w;
        laplace[a] += d;
        laplace[b] -= d;
    }
    let mean: Vec<f64> = (0..nv)
        .map(|i| 0.5 * laplace[i].dot(&mesh.normals()[i]) / dual_areas[i])
        .collect();

    let angles = angle_sums(mesh);
    let gauss: Vec<f64> = (0..nv).map(|i| (TAU - angles[i]) / dual_areas[i]).collect();

    let shape = (0..nv)
        .into_par_iter()
        .map(|i| fit_shape(mesh, i))
        .collect::<Result<Vec<_>>>()?;

    Ok(CurvatureField {
        mean,
        gauss,
        shape,
        dual_areas,
        cotan,
        fingerprint: mesh.fingerprint(),
    })
}
