//! Serializable spectrum results.

use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use super::{AssemblyDiagnostics, DiracOperator, SpinorField};
use crate::mesh::TriMesh;

/// Version of the JSON layout written by [`SpectrumReport::to_json`].
pub const SCHEMA_VERSION: u32 = 1;

/// Relative gap below which neighbouring eigenvalues form one multiplicity group.
pub const CLUSTER_TOL: f64 = 1e-6;

/// Identification of the mesh a report was computed on.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MeshInfo {
    pub label: String,
    pub vertices: usize,
    pub faces: usize,
    pub euler_characteristic: i64,
    pub fingerprint: String,
}

impl MeshInfo {
    pub fn from_mesh(mesh: &TriMesh) -> Self {
        Self {
            label: mesh.label().to_string(),
            vertices: mesh.vertex_count(),
            faces: mesh.face_count(),
            euler_characteristic: mesh.euler_characteristic(),
            fingerprint: format!("{:016x}", mesh.fingerprint()),
        }
    }
}

/// Solver configuration echoed into the report.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SolverInfo {
    pub method: String,
    pub requested: usize,
    pub tolerance: f64,
    pub seed: u64,
    pub restarts: usize,
    pub wilson: f64,
}

/// A run of eigenvalues equal within [`CLUSTER_TOL`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MultiplicityGroup {
    pub value: f64,
    pub count: usize,
}

/// Smallest-magnitude eigenpairs of `D v = λ M v` with their checks.
///
/// `residuals[j]` is `‖M^{-1/2}(D v_j - λ_j M v_j)‖ / (|λ_j| ‖v_j‖_M)`.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SpectrumReport {
    pub schema_version: u32,
    pub mesh: MeshInfo,
    pub solver: SolverInfo,
    /// Sorted by `|λ|`, negative first within a magnitude cluster.
    pub eigenvalues: Vec<f64>,
    /// Groups in ascending order of value.
    pub multiplicities: Vec<MultiplicityGroup>,
    pub residuals: Vec<f64>,
    /// Largest `|λ⁺_i - |λ⁻_i||` after matching sorted positive and negative eigenvalues.
    pub symmetry_residual: f64,
    pub symmetry_tolerance: f64,
    /// Eigenvalues left without a partner because the requested count cut a pair.
    pub unpaired: usize,
    pub diagnostics: AssemblyDiagnostics,
    #[serde(skip)]
    eigenvectors: Vec<SpinorField>,
    #[serde(skip)]
    mass: Vec<f64>,
}

impl SpectrumReport {
    pub(crate) fn new(
        op: &DiracOperator,
        mut pairs: Vec<(f64, SpinorField, f64)>,
        solver: SolverInfo,
    ) -> Self {
        sort_pairs(&mut pairs);
        let eigenvalues: Vec<f64> = pairs.iter().map(|p| p.0).collect();
        let residuals: Vec<f64> = pairs.iter().map(|p| p.2).collect();
        let eigenvectors = pairs.into_iter().map(|p| p.1).collect();
        let (symmetry_residual, unpaired) = pairing(&eigenvalues);
        let scale = eigenvalues.iter().fold(0.0f64, |m, l| m.max(l.abs()));
        let abs_residual = eigenvalues
            .iter()
            .zip(&residuals)
            .fold(0.0f64, |m, (l, r)| m.max(l.abs() * r));
        let diagnostics = op.diagnostics();
        Self {
            schema_version: SCHEMA_VERSION,
            mesh: op.mesh_info().clone(),
            solver,
            multiplicities: multiplicities(&eigenvalues),
            symmetry_tolerance: 10.0 * abs_residual + diagnostics.hermitian_defect * scale,
            eigenvalues,
            residuals,
            symmetry_residual,
            unpaired,
            diagnostics,
            eigenvectors,
            mass: op.mass().to_vec(),
        }
    }

    /// M-orthonormal eigenvectors, aligned with `eigenvalues`. Empty after deserialization.
    pub fn eigenvectors(&self) -> &[SpinorField] {
        &self.eigenvectors
    }

    /// Mass diagonal of the operator. Empty after deserialization.
    pub fn mass(&self) -> &[f64] {
        &self.mass
    }

    /// Smallest nonnegative computed eigenvalue.
    pub fn lambda1(&self) -> Option<f64> {
        self.eigenvalues
            .iter()
            .copied()
            .filter(|l| *l >= 0.0)
            .min_by(f64::total_cmp)
    }

    pub fn max_residual(&self) -> f64 {
        self.residuals.iter().fold(0.0, |m: f64, r| m.max(*r))
    }

    pub fn is_symmetric(&self) -> bool {
        self.symmetry_residual <= self.symmetry_tolerance
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serializes")
    }

    pub fn from_json(text: &str) -> serde_json::Result<Self> {
        serde_json::from_str(text)
    }

    /// One row per eigenvalue: `index,eigenvalue,residual`.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("index,eigenvalue,residual\n");
        for (i, (l, r)) in self.eigenvalues.iter().zip(&self.residuals).enumerate() {
            let _ = writeln!(out, "{i},{l:.15e},{r:.3e}");
        }
        out
    }
}

fn close(a: f64, b: f64) -> bool {
    (a - b).abs() <= CLUSTER_TOL * a.abs().max(b.abs())
}

fn sort_pairs(pairs: &mut [(f64, SpinorField, f64)]) {
    pairs.sort_by(|a, b| a.0.abs().total_cmp(&b.0.abs()));
    let mut start = 0;
    while start < pairs.len() {
        let mut end = start + 1;
        while end < pairs.len() && close(pairs[end - 1].0.abs(), pairs[end].0.abs()) {
            end += 1;
        }
        pairs[start..end].sort_by(|a, b| a.0.total_cmp(&b.0));
        start = end;
    }
}

fn multiplicities(values: &[f64]) -> Vec<MultiplicityGroup> {
    let mut sorted = values.to_vec();
    sorted.sort_by(f64::total_cmp);
    let mut groups: Vec<(f64, usize, f64)> = Vec::new();
    for v in sorted {
        match groups.last_mut() {
            Some((sum, count, last)) if close(*last, v) => {
                *sum += v;
                *count += 1;
                *last = v;
            }
            _ => groups.push((v, 1, v)),
        }
    }
    groups
        .into_iter()
        .map(|(sum, count, _)| MultiplicityGroup {
            value: sum / count as f64,
            count,
        })
        .collect()
}

fn pairing(values: &[f64]) -> (f64, usize) {
    let mut pos: Vec<f64> = values.iter().copied().filter(|l| *l >= 0.0).collect();
    let mut neg: Vec<f64> = values.iter().filter(|l| **l < 0.0).map(|l| -l).collect();
    pos.sort_by(f64::total_cmp);
    neg.sort_by(f64::total_cmp);
    let residual = pos
        .iter()
        .zip(&neg)
        .fold(0.0f64, |m, (a, b)| m.max((a - b).abs()));
    (residual, pos.len().abs_diff(neg.len()))
}
