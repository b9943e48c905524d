use std::f64::consts::PI;

use nalgebra::Vector3;
use num_complex::Complex64 as C64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use spindirac::clifford::{build_rep, Spinor};
use spindirac::reilly::{
    ambient_dirac, emt_identity_check, energy_momentum, lhs_surface, random_spinor, reilly_terms,
    rhs_volume, sphere_dirac, twistor_residual, AmbientSpinorField, BallQuadrature,
    PolynomialSpinorField, RadialQuadraticSpinor, TwistorFamilySpinor,
};
use spindirac::Error;

/// Midpoint rule in (cos θ, φ) on the unit sphere, independent of the library rules.
fn midpoint_sphere(n: usize, f: impl Fn(&Vector3<f64>) -> f64) -> f64 {
    let (dz, dp) = (2.0 / n as f64, 2.0 * PI / (2 * n) as f64);
    let mut total = 0.0;
    for i in 0..n {
        let z = -1.0 + (i as f64 + 0.5) * dz;
        let s = (1.0 - z * z).sqrt();
        for j in 0..2 * n {
            let p = (j as f64 + 0.5) * dp;
            total += f(&Vector3::new(s * p.cos(), s * p.sin(), z)) * dz * dp;
        }
    }
    total
}

fn e0() -> Spinor {
    Spinor::new(C64::new(1.0, 0.0), C64::new(0.0, 0.0))
}

#[test]
fn twistor_family_derivatives() {
    let rep = build_rep();
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    let (p0, p1) = (random_spinor(&mut rng), random_spinor(&mut rng));
    let f = TwistorFamilySpinor::new(&rep, p0, p1);
    let x = Vector3::new(0.2, -0.4, 0.1);
    let dir = Vector3::new(0.3, 0.5, -0.7);
    assert!((f.derivative(&x, &dir) - rep.gamma(&dir) * p1).norm() < 1e-15);
    assert!((ambient_dirac(&rep, &f, &x) + p1 * C64::from(3.0)).norm() < 1e-14);
    let r = twistor_residual(&rep, &f, &[x, Vector3::new(0.9, 0.0, 0.1)]);
    assert!(r.twistor < 1e-12 && r.decomposition < 1e-12);
}

#[test]
fn boundary_integral_matches_independent_rule() {
    let rep = build_rep();
    let f = TwistorFamilySpinor::new(&rep, Spinor::zeros(), e0());
    let oracle = midpoint_sphere(200, |x| {
        let psi = f.value(x);
        (sphere_dirac(&rep, &f, x).dotc(&psi)).re - psi.norm_squared()
    });
    let q = BallQuadrature::new(12).unwrap();
    let lhs = lhs_surface(&rep, &f, &q);
    assert!((oracle + 8.0 * PI).abs() < 1e-3);
    assert!((lhs + 8.0 * PI).abs() < 1e-12);
    assert!((rhs_volume(&rep, &f, &q) + 8.0 * PI).abs() < 1e-12);
}

#[test]
fn boundary_term_scales_quadratically() {
    let rep = build_rep();
    let q = BallQuadrature::new(8).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    let (p0, p1) = (random_spinor(&mut rng), random_spinor(&mut rng));
    let c = C64::new(1.5, -0.7);
    let base = lhs_surface(&rep, &TwistorFamilySpinor::new(&rep, p0, p1), &q);
    let scaled = lhs_surface(&rep, &TwistorFamilySpinor::new(&rep, p0 * c, p1 * c), &q);
    assert!((scaled - c.norm_sqr() * base).abs() < 1e-11 * scaled.abs().max(1.0));
}

#[test]
fn parallel_spinor_terms_vanish() {
    let rep = build_rep();
    let q = BallQuadrature::new(6).unwrap();
    let f = TwistorFamilySpinor::new(&rep, e0() * C64::new(0.4, 2.0), Spinor::zeros());
    assert!(lhs_surface(&rep, &f, &q).abs() < 1e-13);
    assert!(rhs_volume(&rep, &f, &q).abs() < 1e-13);
}

#[test]
fn mixed_draws_satisfy_the_identity_at_every_resolution() {
    let rep = build_rep();
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    for n in [4, 8, 16] {
        let q = BallQuadrature::new(n).unwrap();
        for _ in 0..5 {
            let f =
                TwistorFamilySpinor::new(&rep, random_spinor(&mut rng), random_spinor(&mut rng));
            let t = reilly_terms(&rep, &f, &q);
            assert!((t.lhs - t.rhs()).abs() < 1e-12 * (1.0 + t.rhs().abs()));
            assert!((t.lhs - t.twistor_bound()).abs() < 1e-12 * (1.0 + t.rhs().abs()));
        }
    }
}

#[test]
fn energy_momentum_inequality_holds_for_all_families() {
    let rep = build_rep();
    let q = BallQuadrature::new(10).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    let fields: Vec<Box<dyn AmbientSpinorField>> = vec![
        Box::new(TwistorFamilySpinor::new(
            &rep,
            random_spinor(&mut rng),
            random_spinor(&mut rng),
        )),
        Box::new(RadialQuadraticSpinor {
            phi0: random_spinor(&mut rng),
        }),
        Box::new(PolynomialSpinorField::random(&mut rng)),
        Box::new(PolynomialSpinorField::random(&mut rng)),
    ];
    for f in &fields {
        let t = reilly_terms(&rep, f.as_ref(), &q);
        assert!(
            t.lhs >= t.emt_bound() - 1e-9,
            "{}: {} < {}",
            f.family(),
            t.lhs,
            t.emt_bound()
        );
        assert!(t.lhs >= t.twistor_bound() - 1e-9);
        assert!(
            (t.lhs - t.emt_rhs()).abs() < 1e-6 * (1.0 + t.lhs.abs()),
            "{}",
            f.family()
        );
    }
}

#[test]
fn non_twistor_field_has_positive_twistor_part() {
    let rep = build_rep();
    let f = RadialQuadraticSpinor { phi0: e0() };
    let r = twistor_residual(&rep, &f, &[Vector3::new(0.3, 0.2, -0.5)]);
    assert!(r.twistor > 0.1);
    let q = BallQuadrature::new(8).unwrap();
    let t = reilly_terms(&rep, &f, &q);
    assert!((t.lhs - t.twistor_bound() - 32.0 * PI / 15.0).abs() < 1e-12);
}

#[test]
fn energy_momentum_of_twistor_family() {
    let rep = build_rep();
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    for _ in 0..50 {
        let f = TwistorFamilySpinor::new(&rep, random_spinor(&mut rng), random_spinor(&mut rng));
        let x = Vector3::new(
            rng.gen_range(-0.6..0.6),
            rng.gen_range(-0.6..0.6),
            rng.gen_range(-0.6..0.6),
        );
        assert!(emt_identity_check(&rep, &f, &x).unwrap() < 1e-10);
    }
}

#[test]
fn energy_momentum_is_scale_invariant_and_symmetric() {
    let rep = build_rep();
    let mut rng = ChaCha8Rng::seed_from_u64(6);
    let f = PolynomialSpinorField::random(&mut rng);
    let c = C64::new(-2.0, 0.5);
    let g = PolynomialSpinorField::new(
        f.constant * c,
        f.linear.map(|l| l * c),
        f.quadratic.map(|row| row.map(|q| q * c)),
    );
    let x = Vector3::new(0.1, 0.7, -0.2);
    let (qf, qg) = (
        energy_momentum(&rep, &f, &x).unwrap(),
        energy_momentum(&rep, &g, &x).unwrap(),
    );
    assert!((qf - qg).norm() < 1e-12 * qf.norm().max(1.0));
    assert!((qf - qf.transpose()).norm() < 1e-15);
}

#[test]
fn energy_momentum_undefined_at_zeros() {
    let rep = build_rep();
    let f = TwistorFamilySpinor::new(&rep, Spinor::zeros(), e0());
    assert_eq!(
        energy_momentum(&rep, &f, &Vector3::zeros()),
        Err(Error::ZeroSpinor)
    );
}

#[test]
fn quadrature_totals() {
    for n in [2, 4, 9, 32] {
        let q = BallQuadrature::new(n).unwrap();
        assert!((q.volume_total() - 4.0 * PI / 3.0).abs() < 1e-12);
        assert!((q.surface_total() - 4.0 * PI).abs() < 1e-12);
    }
}
