use approx::assert_relative_eq;
use num_complex::Complex64 as C64;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use spindirac::bounds::{
    compare, extrinsic_bound, friedrich_bound, refinement_tolerance, umbilicity, Verdict,
};
use spindirac::clifford::{build_rep, Spinor};
use spindirac::curvature::curvature;
use spindirac::dirac::{
    assemble, full_spectrum, normal_conjugate, project_nonneg, spectrum, DiracOperator,
    SpectrumReport, SpinorField,
};
use spindirac::mesh::{
    load_mesh, make_ellipsoid, make_sphere, make_torus, write_obj, MeshFormat, TriMesh,
};
use spindirac::Error;

fn operator(mesh: &TriMesh) -> DiracOperator {
    assemble(mesh, &build_rep(), &curvature(mesh).unwrap()).unwrap()
}

#[test]
fn icosphere_obj_has_sphere_topology() {
    let mut buf = Vec::new();
    write_obj(&make_sphere(1.0, 3).unwrap(), &mut buf).unwrap();
    let mesh = load_mesh(buf.as_slice(), MeshFormat::Obj).unwrap();
    assert_eq!(mesh.euler_characteristic(), 2);
    assert!(mesh.face_areas().iter().all(|a| *a > 0.0));
    assert!(mesh.lumped_areas().iter().all(|a| *a > 0.0));
    assert!(mesh.enclosed_volume() < 0.0);
}

#[test]
fn fine_sphere_mean_curvature_is_one() {
    let c = curvature(&make_sphere(1.0, 5).unwrap()).unwrap();
    for h in c.mean() {
        assert!((h - 1.0).abs() < 0.01, "{h}");
    }
    let fitted = c.fitted_mean();
    assert!(fitted.iter().all(|h| (h - 1.0).abs() < 0.01));
}

#[test]
fn fine_torus_curvature_extremes() {
    let c = curvature(&make_torus(2.0, 0.5, 128, 64).unwrap()).unwrap();
    let (_, h_min) = c.min_mean();
    let (_, k_min) = c.min_gauss();
    // Inner equator: principal curvatures 1/r and -1/(R - r).
    let exact = 0.5 * (1.0 / 0.5 - 1.0 / 1.5);
    assert!((h_min - exact).abs() < 0.02 * exact, "{h_min}");
    assert!(k_min < 0.0 && h_min > 0.0);
    assert!(c.total_gauss().abs() < 1e-6);
}

#[test]
fn mean_curvature_errors_shrink_under_refinement() {
    let errs: Vec<f64> = (3..=5)
        .map(|s| {
            let c = curvature(&make_sphere(1.0, s).unwrap()).unwrap();
            let h = c.mean().iter().fold(0.0f64, |m, h| m.max((h - 1.0).abs()));
            let k = c.gauss().iter().fold(0.0f64, |m, k| m.max((k - 1.0).abs()));
            h.max(k)
        })
        .collect();
    assert!(errs.windows(2).all(|w| w[1] < w[0]), "{errs:?}");
}

#[test]
fn mass_is_lumped_area_and_operator_is_hermitian() {
    for mesh in [
        make_sphere(1.0, 3).unwrap(),
        make_torus(2.0, 0.5, 24, 12).unwrap(),
    ] {
        let op = operator(&mesh);
        assert_eq!(op.mass(), mesh.lumped_areas());
        assert!(op.diagnostics().hermitian_defect < 1e-14);
    }
}

#[test]
fn split_defect_shrinks_with_mesh_size() {
    let d: Vec<f64> = (3..=5)
        .map(|s| {
            operator(&make_sphere(1.0, s).unwrap())
                .diagnostics()
                .split_defect
        })
        .collect();
    assert!(d.windows(2).all(|w| w[1] < 0.6 * w[0]), "{d:?}");
}

/// `D ψ₀ ≈ H ψ₀` for constant `ψ₀`, measured in the discrete L² norm.
#[test]
fn constant_spinor_sees_mean_curvature() {
    let psi0 = Spinor::new(C64::new(0.3, -0.2), C64::new(0.9, 0.1));
    let mut errs = Vec::new();
    for s in 3..=5 {
        let mesh = make_sphere(1.0, s).unwrap();
        let op = operator(&mesh);
        let psi = SpinorField::constant(mesh.vertex_count(), psi0);
        let inv: Vec<f64> = op.mass().iter().map(|a| 1.0 / a).collect();
        let d = op.apply(&psi).unwrap().weighted(&inv);
        errs.push(d.sub(&psi).norm_mass(op.mass()) / psi.norm_mass(op.mass()));
    }
    assert!(
        errs[2] < 0.05 && errs.windows(2).all(|w| w[1] < w[0]),
        "{errs:?}"
    );
}

#[test]
fn spectrum_scales_inversely_with_radius() {
    let unit = spectrum(&operator(&make_sphere(1.0, 3).unwrap()), 12).unwrap();
    let big = spectrum(&operator(&make_sphere(2.5, 3).unwrap()), 12).unwrap();
    for (a, b) in unit.eigenvalues.iter().zip(&big.eigenvalues) {
        assert_relative_eq!(a / 2.5, *b, max_relative = 1e-9);
    }
}

#[test]
fn torus_first_eigenvalue_clears_mean_curvature_bound() {
    let fine = make_torus(2.0, 0.5, 96, 48).unwrap();
    let coarse = make_torus(2.0, 0.5, 48, 24).unwrap();
    let rf = spectrum(&operator(&fine), 6).unwrap();
    let rc = spectrum(&operator(&coarse), 6).unwrap();
    let l1 = rf.lambda1().unwrap();
    let tol = refinement_tolerance(rc.lambda1().unwrap(), l1, rf.max_residual());
    let min_abs = rf
        .eigenvalues
        .iter()
        .fold(f64::INFINITY, |m, l| m.min(l.abs()));
    assert!(min_abs >= 2.0 / 3.0 - tol, "{min_abs} {tol}");
    assert_eq!(rf.eigenvalues.len(), 6);
}

fn anticommutation_residual(s: usize) -> f64 {
    let mesh = make_sphere(1.0, s).unwrap();
    let op = operator(&mesh);
    let rep = spectrum(&op, 4).unwrap();
    let mut worst = 0.0f64;
    for (lambda, v) in rep.eigenvalues.iter().zip(rep.eigenvectors()) {
        let gv = normal_conjugate(&mesh, &build_rep(), v).unwrap();
        let mut res = op.apply(&gv).unwrap();
        res.axpy(C64::from(*lambda), &gv.weighted(op.mass()));
        let inv: Vec<f64> = op.mass().iter().map(|a| 1.0 / a).collect();
        worst = worst.max(res.weighted(&inv).norm_mass(op.mass()) / lambda.abs());
    }
    worst
}

#[test]
fn normal_conjugate_nearly_maps_eigenvectors_to_opposite_eigenvalues() {
    let r: Vec<f64> = (3..=4).map(anticommutation_residual).collect();
    assert!(r[1] < r[0] && r[1] < 0.05, "{r:?}");
}

#[test]
fn normal_conjugate_preserves_norm_and_zero() {
    let mesh = make_ellipsoid(1.0, 0.8, 1.3, 3).unwrap();
    let rep = build_rep();
    let zero = SpinorField::zeros(mesh.vertex_count());
    assert_eq!(normal_conjugate(&mesh, &rep, &zero).unwrap(), zero);
    let psi = SpinorField::random(mesh.vertex_count(), &mut ChaCha8Rng::seed_from_u64(3));
    let g = normal_conjugate(&mesh, &rep, &psi).unwrap();
    let m = mesh.lumped_areas();
    assert_relative_eq!(g.norm_mass(m), psi.norm_mass(m), max_relative = 1e-13);
}

fn full(mesh: &TriMesh) -> (DiracOperator, SpectrumReport) {
    let op = operator(mesh);
    let r = full_spectrum(&op).unwrap();
    (op, r)
}

#[test]
fn projector_on_eigenvectors() {
    let (op, rep) = full(&make_torus(2.0, 0.5, 12, 6).unwrap());
    for (lambda, v) in rep.eigenvalues.iter().zip(rep.eigenvectors()) {
        let p = project_nonneg(&rep, v).unwrap();
        let expected = if *lambda >= 0.0 {
            v.clone()
        } else {
            SpinorField::zeros(v.vertex_count())
        };
        assert!(p.sub(&expected).norm_mass(op.mass()) < 1e-10);
    }
}

#[test]
fn projector_raises_the_quadratic_form() {
    let (op, rep) = full(&make_sphere(1.0, 3).unwrap());
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    for _ in 0..10 {
        let psi = SpinorField::random(op.vertex_count(), &mut rng);
        let p = project_nonneg(&rep, &psi).unwrap();
        assert!(op.quadratic_form(&psi).unwrap() < op.quadratic_form(&p).unwrap());
    }
}

#[test]
fn projector_needs_a_complete_basis() {
    let op = operator(&make_sphere(1.0, 3).unwrap());
    let rep = spectrum(&op, 4).unwrap();
    let psi = SpinorField::random(op.vertex_count(), &mut ChaCha8Rng::seed_from_u64(5));
    assert!(matches!(
        project_nonneg(&rep, &psi),
        Err(Error::IncompleteBasis { .. })
    ));
}

#[test]
fn bounds_on_spheres_and_torus() {
    for r in [1.0, 2.0] {
        let c = curvature(&make_sphere(r, 4).unwrap()).unwrap();
        assert_relative_eq!(extrinsic_bound(&c).value, 1.0 / r, max_relative = 1e-3);
        assert_relative_eq!(friedrich_bound(&c).unwrap(), 1.0 / r, max_relative = 1e-3);
    }
    let t = curvature(&make_torus(2.0, 0.5, 96, 48).unwrap()).unwrap();
    assert!((extrinsic_bound(&t).value - 2.0 / 3.0).abs() < 0.01);
    assert!(friedrich_bound(&t).is_none());
    assert!(umbilicity(&t) > 0.5);
}

#[test]
fn ellipsoid_friedrich_bound_lies_below_extrinsic() {
    let c = curvature(&make_ellipsoid(1.0, 1.0, 1.5, 4).unwrap()).unwrap();
    let f = friedrich_bound(&c).unwrap();
    assert!(f < extrinsic_bound(&c).value);
    let u = umbilicity(&c);
    let s = umbilicity(&curvature(&make_sphere(1.0, 4).unwrap()).unwrap());
    assert!(u > s && u < 0.5, "{u}");
}

#[test]
fn sphere_reaches_equality() {
    let fine = make_sphere(1.0, 4).unwrap();
    let op = operator(&fine);
    let rf = spectrum(&op, 4).unwrap();
    let rc = spectrum(&operator(&make_sphere(1.0, 3).unwrap()), 4).unwrap();
    let tol = refinement_tolerance(
        rc.lambda1().unwrap(),
        rf.lambda1().unwrap(),
        rf.max_residual(),
    );
    let b = compare(&rf, &curvature(&fine).unwrap(), tol).unwrap();
    assert_eq!(b.extrinsic_verdict, Verdict::Equality);
    assert_eq!(b.extrinsic_verdict.to_string(), "equality (sphere)");
    assert!(b.extrinsic_slack.abs() <= tol);
    assert_eq!(b.remark_violations, 0);
    assert!(b.passed());
}

#[test]
fn outward_orientation_does_not_meet_the_hypothesis() {
    let mesh = make_sphere(1.0, 3).unwrap().reversed();
    let c = curvature(&mesh).unwrap();
    let rep = spectrum(&assemble(&mesh, &build_rep(), &c).unwrap(), 4).unwrap();
    let b = compare(&rep, &c, 0.01).unwrap();
    assert_eq!(b.extrinsic_verdict, Verdict::HypothesisNotMet);
}

#[test]
fn bound_report_requires_a_nonnegative_eigenvalue() {
    let mesh = make_sphere(1.0, 3).unwrap();
    let c = curvature(&mesh).unwrap();
    let mut rep = spectrum(&assemble(&mesh, &build_rep(), &c).unwrap(), 2).unwrap();
    rep.eigenvalues.retain(|l| *l < 0.0);
    assert_eq!(compare(&rep, &c, 0.01), Err(Error::UnresolvedLambda1));
}

#[test]
fn report_json_round_trip() {
    let rep = spectrum(&operator(&make_sphere(1.0, 3).unwrap()), 6).unwrap();
    let text = rep.to_json();
    let back = SpectrumReport::from_json(&text).unwrap();
    assert_eq!(back.eigenvalues, rep.eigenvalues);
    assert_eq!(back.schema_version, 1);
    assert!(back.eigenvectors().is_empty());
    assert_eq!(rep.to_csv().lines().count(), 7);
}
