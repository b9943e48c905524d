//! Smallest-magnitude eigenpairs of the pencil `(D, M)`.
//!
//! Both routes work with the symmetrically scaled matrix `A = M^{-1/2} D M^{-1/2}`.
//! Small problems are solved densely. Larger ones use restarted block Krylov
//! iteration on `A⁻¹`, applied through one sparse LU factorization of `D`.

use faer::linalg::solvers::Solve;
use faer::prelude::{Reborrow, ReborrowMut};
use faer::{Mat, MatRef, Side};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::{DiracOperator, SolverInfo, SpectrumReport, SpinorField};
use crate::{Error, Result, C64};

/// Largest complex dimension `2V` solved densely by default.
pub const DENSE_LIMIT: usize = 4000;

/// Eigensolver configuration.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SolverSettings {
    /// Required relative residual of every returned pair.
    pub tolerance: f64,
    /// Outer iterations of the Krylov route before giving up.
    pub max_restarts: usize,
    /// Dimension up to which the dense route is used.
    pub dense_limit: usize,
    /// Krylov blocks generated per outer iteration.
    pub krylov_depth: usize,
    /// Seed of the random starting block.
    pub seed: u64,
}

impl Default for SolverSettings {
    fn default() -> Self {
        Self {
            tolerance: 1e-10,
            max_restarts: 60,
            dense_limit: DENSE_LIMIT,
            krylov_depth: 4,
            seed: 0x5EED,
        }
    }
}

/// The `k` smallest-|λ| eigenpairs with default settings.
pub fn spectrum(op: &DiracOperator, k: usize) -> Result<SpectrumReport> {
    spectrum_with(op, k, &SolverSettings::default())
}

/// The `k` smallest-|λ| eigenpairs.
pub fn spectrum_with(
    op: &DiracOperator,
    k: usize,
    settings: &SolverSettings,
) -> Result<SpectrumReport> {
    if k == 0 || k > op.dim() {
        return Err(Error::InvalidParameter(format!(
            "k must lie in 1..={}, got {k}",
            op.dim()
        )));
    }
    if !(settings.tolerance > 0.0) || settings.krylov_depth == 0 {
        return Err(Error::InvalidParameter(
            "solver tolerance and Krylov depth must be positive".into(),
        ));
    }
    if op.dim() <= settings.dense_limit {
        dense(op, Some(k), settings)
    } else {
        krylov(op, k, settings)
    }
}

/// Every eigenpair, computed densely.
pub fn full_spectrum(op: &DiracOperator) -> Result<SpectrumReport> {
    dense(op, None, &SolverSettings::default())
}

struct Scaling {
    sqrt_m: Vec<f64>,
    inv_sqrt_m: Vec<f64>,
}

impl Scaling {
    fn new(op: &DiracOperator) -> Self {
        let sqrt_m: Vec<f64> = op.mass().iter().map(|a| a.sqrt()).collect();
        let inv_sqrt_m = sqrt_m.iter().map(|s| 1.0 / s).collect();
        Self { sqrt_m, inv_sqrt_m }
    }

    /// `v = M^{-1/2} y`.
    fn eigenvector(&self, y: &[C64]) -> SpinorField {
        let data = y
            .iter()
            .enumerate()
            .map(|(k, z)| z * self.inv_sqrt_m[k / 2])
            .collect();
        SpinorField::from_vec(data).expect("even length")
    }

    /// `‖A y - λ y‖ / (|λ| ‖y‖)`.
    fn residual(&self, op: &DiracOperator, lambda: f64, y: &[C64]) -> f64 {
        let x = self.eigenvector(y);
        let mut dx = vec![C64::new(0.0, 0.0); y.len()];
        op.matrix().apply(x.as_slice(), &mut dx);
        let r: f64 = dx
            .iter()
            .zip(y)
            .enumerate()
            .map(|(k, (d, yk))| (d * self.inv_sqrt_m[k / 2] - yk * lambda).norm_sqr())
            .sum();
        let ny: f64 = y.iter().map(|z| z.norm_sqr()).sum();
        r.sqrt() / (lambda.abs() * ny.sqrt()).max(f64::MIN_POSITIVE)
    }
}

fn failure(message: impl Into<String>, residual: f64) -> Error {
    Error::SolverFailure {
        message: message.into(),
        residual,
    }
}

fn dense(
    op: &DiracOperator,
    k: Option<usize>,
    settings: &SolverSettings,
) -> Result<SpectrumReport> {
    let scaling = Scaling::new(op);
    let a = op.matrix().to_dense(&scaling.inv_sqrt_m);
    let eig = a
        .self_adjoint_eigen(Side::Lower)
        .map_err(|e| failure(format!("dense eigendecomposition: {e:?}"), f64::INFINITY))?;
    let values: Vec<f64> = eig.S().column_vector().iter().map(|z| z.re).collect();
    let u = eig.U();
    let mut order: Vec<usize> = (0..values.len()).collect();
    order.sort_by(|&i, &j| values[i].abs().total_cmp(&values[j].abs()));
    order.truncate(k.unwrap_or(values.len()));

    let mut pairs = Vec::with_capacity(order.len());
    let mut worst = 0.0f64;
    for &j in &order {
        let y: Vec<C64> = u.col(j).iter().copied().collect();
        let r = scaling.residual(op, values[j], &y);
        worst = worst.max(r);
        pairs.push((values[j], scaling.eigenvector(&y), r));
    }
    if worst > settings.tolerance.max(1e-8) {
        return Err(failure("dense eigenpairs fail the residual check", worst));
    }
    let info = SolverInfo {
        method: "dense".into(),
        requested: order.len(),
        tolerance: settings.tolerance,
        seed: settings.seed,
        restarts: 0,
        wilson: op.settings().wilson,
    };
    Ok(SpectrumReport::new(op, pairs, info))
}

fn random_block(rng: &mut ChaCha8Rng, n: usize, p: usize) -> Mat<C64> {
    Mat::from_fn(n, p, |_, _| {
        C64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0))
    })
}

fn column_norm(c: &[C64]) -> f64 {
    c.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
}

/// Orthonormalizes the columns of `w` against the orthonormal columns of `q` and each other.
///
/// Columns that vanish numerically are replaced by fresh random directions.
fn orthonormalize(q: Option<MatRef<'_, C64>>, w: &mut Mat<C64>, rng: &mut ChaCha8Rng) {
    let project = |w: &mut Mat<C64>| {
        if let Some(q) = q {
            for _ in 0..2 {
                let c = q.adjoint() * &*w;
                *w = &*w - q * &c;
            }
        }
    };
    project(w);
    let (n, p) = (w.nrows(), w.ncols());
    for j in 0..p {
        for attempt in 0.. {
            let before = column_norm(w.col_as_slice(j));
            for _ in 0..2 {
                for i in 0..j {
                    let (head, tail) = w.as_mut().split_at_col_mut(j);
                    let qi = head.col(i);
                    let mut wj = tail.col_mut(0);
                    let c: C64 = qi
                        .iter()
                        .zip(wj.rb().iter())
                        .map(|(a, b)| a.conj() * b)
                        .sum();
                    for (b, a) in wj.rb_mut().iter_mut().zip(qi.iter()) {
                        *b -= c * a;
                    }
                }
            }
            let after = column_norm(w.col_as_slice(j));
            if after > 1e-8 * before && after > 0.0 {
                w.col_as_slice_mut(j).iter_mut().for_each(|z| *z /= after);
                break;
            }
            assert!(
                attempt < 8,
                "cannot extend an orthonormal basis of dimension {n}"
            );
            let mut fresh = random_block(rng, n, 1);
            project(&mut fresh);
            w.col_as_slice_mut(j).copy_from_slice(fresh.col_as_slice(0));
        }
    }
}

fn hcat(a: &Mat<C64>, b: &Mat<C64>) -> Mat<C64> {
    let ca = a.ncols();
    Mat::from_fn(a.nrows(), ca + b.ncols(), |i, j| {
        if j < ca {
            a[(i, j)]
        } else {
            b[(i, j - ca)]
        }
    })
}

fn krylov(op: &DiracOperator, k: usize, settings: &SolverSettings) -> Result<SpectrumReport> {
    let n = op.dim();
    let depth = settings.krylov_depth;
    let p = k + k.max(8);
    if p * (depth + 1) >= n {
        return Err(Error::InvalidParameter(format!(
            "k = {k} is too large for an iterative solve of dimension {n}"
        )));
    }
    let scaling = Scaling::new(op);
    let lu = op
        .matrix()
        .to_sparse(&vec![1.0; op.vertex_count()])
        .sp_lu()
        .map_err(|e| failure(format!("sparse LU of D: {e:?}"), f64::INFINITY))?;
    // A⁻¹ y = M^{1/2} D⁻¹ M^{1/2} y
    let inverse = |y: &Mat<C64>| -> Mat<C64> {
        let mut x = Mat::from_fn(n, y.ncols(), |i, j| y[(i, j)] * scaling.sqrt_m[i / 2]);
        lu.solve_in_place(x.as_mut());
        Mat::from_fn(n, y.ncols(), |i, j| x[(i, j)] * scaling.sqrt_m[i / 2])
    };

    let mut rng = ChaCha8Rng::seed_from_u64(settings.seed);
    let mut x = random_block(&mut rng, n, p);
    orthonormalize(None, &mut x, &mut rng);
    let mut worst = f64::INFINITY;
    for restart in 0..settings.max_restarts {
        let mut q = x.clone();
        let mut z = inverse(&q);
        let mut last = z.clone();
        for _ in 1..depth {
            let mut w = last;
            orthonormalize(Some(q.as_ref()), &mut w, &mut rng);
            last = inverse(&w);
            q = hcat(&q, &w);
            z = hcat(&z, &last);
        }
        let t = q.adjoint() * &z;
        let t = Mat::from_fn(t.nrows(), t.ncols(), |i, j| {
            (t[(i, j)] + t[(j, i)].conj()) * 0.5
        });
        let eig = t
            .self_adjoint_eigen(Side::Lower)
            .map_err(|e| failure(format!("Rayleigh-Ritz: {e:?}"), worst))?;
        let theta: Vec<f64> = eig.S().column_vector().iter().map(|z| z.re).collect();
        let mut order: Vec<usize> = (0..theta.len()).collect();
        order.sort_by(|&i, &j| theta[j].abs().total_cmp(&theta[i].abs()));
        order.truncate(p);
        let s = Mat::from_fn(theta.len(), p, |i, j| eig.U()[(i, order[j])]);
        x = &q * &s;

        let mut pairs = Vec::with_capacity(k);
        worst = 0.0;
        for (j, &idx) in order.iter().take(k).enumerate() {
            let lambda = 1.0 / theta[idx];
            let y = x.col_as_slice(j);
            let r = scaling.residual(op, lambda, y);
            worst = worst.max(r);
            pairs.push((lambda, scaling.eigenvector(y), r));
        }
        if worst <= settings.tolerance {
            let info = SolverInfo {
                method: "shift-invert block Krylov".into(),
                requested: k,
                tolerance: settings.tolerance,
                seed: settings.seed,
                restarts: restart + 1,
                wilson: op.settings().wilson,
            };
            return Ok(SpectrumReport::new(op, pairs, info));
        }
    }
    Err(failure(
        format!("no convergence after {} restarts", settings.max_restarts),
        worst,
    ))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::clifford::build_rep;
    use crate::curvature::curvature;
    use crate::dirac::assemble;
    use crate::mesh::make_sphere;

    #[test]
    fn dense_and_krylov_agree() {
        let mesh = make_sphere(1.0, 3).unwrap();
        let op = assemble(&mesh, &build_rep(), &curvature(&mesh).unwrap()).unwrap();
        let dense = spectrum(&op, 12).unwrap();
        let forced = SolverSettings {
            dense_limit: 0,
            ..SolverSettings::default()
        };
        let iter = spectrum_with(&op, 12, &forced).unwrap();
        assert_eq!(iter.solver.method, "shift-invert block Krylov");
        for (a, b) in dense.eigenvalues.iter().zip(&iter.eigenvalues) {
            assert!((a - b).abs() < 1e-9, "{a} vs {b}");
        }
        assert!(iter.max_residual() <= 1e-10);
    }

    #[test]
    fn eigenvectors_are_mass_orthonormal() {
        let mesh = make_sphere(1.0, 3).unwrap();
        let op = assemble(&mesh, &build_rep(), &curvature(&mesh).unwrap()).unwrap();
        let rep = spectrum_with(
            &op,
            6,
            &SolverSettings {
                dense_limit: 0,
                ..Default::default()
            },
        )
        .unwrap();
        let v = rep.eigenvectors();
        for i in 0..v.len() {
            for j in 0..v.len() {
                let g = v[i].inner_mass(&v[j], op.mass());
                let expect = if i == j { 1.0 } else { 0.0 };
                assert!((g - C64::from(expect)).norm() < 1e-9);
            }
        }
    }

    #[test]
    fn invalid_counts_rejected() {
        let mesh = make_sphere(1.0, 3).unwrap();
        let op = assemble(&mesh, &build_rep(), &curvature(&mesh).unwrap()).unwrap();
        assert!(matches!(spectrum(&op, 0), Err(Error::InvalidParameter(_))));
        assert!(matches!(
            spectrum(&op, op.dim() + 1),
            Err(Error::InvalidParameter(_))
        ));
    }

    #[test]
    fn starved_iteration_reports_failure() {
        let mesh = make_sphere(1.0, 3).unwrap();
        let op = assemble(&mesh, &build_rep(), &curvature(&mesh).unwrap()).unwrap();
        let starved = SolverSettings {
            dense_limit: 0,
            max_restarts: 1,
            krylov_depth: 1,
            tolerance: 1e-14,
            ..Default::default()
        };
        match spectrum_with(&op, 12, &starved) {
            Err(Error::SolverFailure { residual, .. }) => {
                assert!(residual.is_finite() && residual > 1e-14)
            }
            other => panic!("expected failure, got {other:?}"),
        }
    }
}
