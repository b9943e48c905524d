//! Analytic test surfaces: icospheres, ellipsoids and tori of revolution.

use std::collections::HashMap;
use std::f64::consts::TAU;

use nalgebra::Vector3;

use super::TriMesh;
use crate::{Error, Result};

/// Smallest accepted subdivision level or grid resolution.
pub const MIN_RESOLUTION: usize = 3;

fn check_positive(name: &str, x: f64) -> Result<()> {
    if x.is_finite() && x > 0.0 {
        Ok(())
    } else {
        Err(Error::InvalidParameter(format!(
            "{name} must be positive and finite, got {x}"
        )))
    }
}

fn check_resolution(name: &str, n: usize) -> Result<()> {
    if n >= MIN_RESOLUTION {
        Ok(())
    } else {
        Err(Error::InvalidParameter(format!(
            "{name} must be at least {MIN_RESOLUTION}, got {n}"
        )))
    }
}

/// Unit icosphere: `s` rounds of midpoint subdivision of the icosahedron, projected to the sphere.
fn unit_icosphere(s: usize) -> (Vec<Vector3<f64>>, Vec<[usize; 3]>) {
    let t = (1.0 + 5f64.sqrt()) / 2.0;
    let mut positions: Vec<Vector3<f64>> = [
        [-1.0, t, 0.0],
        [1.0, t, 0.0],
        [-1.0, -t, 0.0],
        [1.0, -t, 0.0],
        [0.0, -1.0, t],
        [0.0, 1.0, t],
        [0.0, -1.0, -t],
        [0.0, 1.0, -t],
        [t, 0.0, -1.0],
        [t, 0.0, 1.0],
        [-t, 0.0, -1.0],
        [-t, 0.0, 1.0],
    ]
    .iter()
    .map(|c| Vector3::from(*c).normalize())
    .collect();
    let mut faces: Vec<[usize; 3]> = vec![
        [0, 11, 5],
        [0, 5, 1],
        [0, 1, 7],
        [0, 7, 10],
        [0, 10, 11],
        [1, 5, 9],
        [5, 11, 4],
        [11, 10, 2],
        [10, 7, 6],
        [7, 1, 8],
        [3, 9, 4],
        [3, 4, 2],
        [3, 2, 6],
        [3, 6, 8],
        [3, 8, 9],
        [4, 9, 5],
        [2, 4, 11],
        [6, 2, 10],
        [8, 6, 7],
        [9, 8, 1],
    ];
    for _ in 0..s {
        let mut cache: HashMap<(usize, usize), usize> = HashMap::new();
        let mut midpoint = |a: usize, b: usize, positions: &mut Vec<Vector3<f64>>| {
            let key = (a.min(b), a.max(b));
            *cache.entry(key).or_insert_with(|| {
                positions.push(((positions[a] + positions[b]) * 0.5).normalize());
                positions.len() - 1
            })
        };
        let mut next = Vec::with_capacity(faces.len() * 4);
        for &[a, b, c] in &faces {
            let ab = midpoint(a, b, &mut positions);
            let bc = midpoint(b, c, &mut positions);
            let ca = midpoint(c, a, &mut positions);
            next.extend_from_slice(&[[a, ab, ca], [b, bc, ab], [c, ca, bc], [ab, bc, ca]]);
        }
        faces = next;
    }
    (positions, faces)
}

/// Round sphere of the given radius; `10·4^s + 2` vertices.
pub fn make_sphere(radius: f64, subdivisions: usize) -> Result<TriMesh> {
    check_positive("radius", radius)?;
    check_resolution("subdivisions", subdivisions)?;
    let (mut positions, faces) = unit_icosphere(subdivisions);
    positions.iter_mut().for_each(|p| *p *= radius);
    Ok(TriMesh::new(positions, faces)?.with_label(format!("sphere(r={radius},s={subdivisions})")))
}

/// Axis-aligned ellipsoid with semi-axes `a, b, c`, obtained by scaling an icosphere.
pub fn make_ellipsoid(a: f64, b: f64, c: f64, subdivisions: usize) -> Result<TriMesh> {
    check_positive("a", a)?;
    check_positive("b", b)?;
    check_positive("c", c)?;
    check_resolution("subdivisions", subdivisions)?;
    let (mut positions, faces) = unit_icosphere(subdivisions);
    positions
        .iter_mut()
        .for_each(|p| *p = Vector3::new(a * p.x, b * p.y, c * p.z));
    Ok(TriMesh::new(positions, faces)?
        .with_label(format!("ellipsoid(a={a},b={b},c={c},s={subdivisions})")))
}

/// Torus of revolution about the z axis with tube centre radius `big_r` and tube radius `r`.
///
/// The `(u, v)` parameter grid has `n_u × n_v` vertices and each cell is split into two triangles.
pub fn make_torus(big_r: f64, r: f64, n_u: usize, n_v: usize) -> Result<TriMesh> {
    check_positive("r", r)?;
    check_positive("R", big_r)?;
    if big_r <= r {
        return Err(Error::InvalidParameter(format!(
            "R must exceed r, got R={big_r}, r={r}"
        )));
    }
    check_resolution("n_u", n_u)?;
    check_resolution("n_v", n_v)?;
    let mut positions = Vec::with_capacity(n_u * n_v);
    for i in 0..n_u {
        let (su, cu) = (TAU * i as f64 / n_u as f64).sin_cos();
        for j in 0..n_v {
            let (sv, cv) = (TAU * j as f64 / n_v as f64).sin_cos();
            let rho = big_r + r * cv;
            positions.push(Vector3::new(rho * cu, rho * su, r * sv));
        }
    }
    let idx = |i: usize, j: usize| (i % n_u) * n_v + (j % n_v);
    let mut faces = Vec::with_capacity(2 * n_u * n_v);
    for i in 0..n_u {
        for j in 0..n_v {
            let (a, b, c, d) = (idx(i, j), idx(i + 1, j), idx(i + 1, j + 1), idx(i, j + 1));
            faces.push([a, b, c]);
            faces.push([a, c, d]);
        }
    }
    Ok(TriMesh::new(positions, faces)?
        .with_label(format!("torus(R={big_r},r={r},nu={n_u},nv={n_v})")))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn sphere_vertices_lie_on_sphere() {
        for s in 3..=4 {
            let mesh = make_sphere(1.0, s).unwrap();
            assert_eq!(mesh.vertex_count(), 10 * 4usize.pow(s as u32) + 2);
            assert_eq!(mesh.euler_characteristic(), 2);
            assert!(mesh
                .positions()
                .iter()
                .all(|p| (p.norm() - 1.0).abs() < 1e-15));
        }
        let big = make_sphere(2.5, 3).unwrap();
        assert!(big
            .positions()
            .iter()
            .all(|p| (p.norm() - 2.5).abs() < 1e-14));
    }

    #[test]
    fn torus_is_genus_one() {
        let mesh = make_torus(2.0, 0.5, 64, 32).unwrap();
        assert_eq!(mesh.euler_characteristic(), 0);
        for p in mesh.positions() {
            let rho = (p.x * p.x + p.y * p.y).sqrt();
            assert!(((rho - 2.0).powi(2) + p.z * p.z - 0.25).abs() < 1e-14);
        }
        assert!(mesh.enclosed_volume() < 0.0);
    }

    #[test]
    fn degenerate_ellipsoid_is_the_sphere() {
        let e = make_ellipsoid(1.0, 1.0, 1.0, 3).unwrap();
        let s = make_sphere(1.0, 3).unwrap();
        assert_eq!(e.positions(), s.positions());
        assert_eq!(e.faces(), s.faces());
    }

    #[test]
    fn ellipsoid_vertices_satisfy_equation() {
        let e = make_ellipsoid(1.0, 1.0, 1.5, 3).unwrap();
        for p in e.positions() {
            assert!((p.x * p.x + p.y * p.y + p.z * p.z / 2.25 - 1.0).abs() < 1e-14);
        }
    }

    #[test]
    fn invalid_parameters_rejected() {
        assert!(matches!(
            make_sphere(0.0, 3),
            Err(Error::InvalidParameter(_))
        ));
        assert!(matches!(
            make_sphere(1.0, 2),
            Err(Error::InvalidParameter(_))
        ));
        assert!(matches!(
            make_torus(0.5, 2.0, 8, 8),
            Err(Error::InvalidParameter(_))
        ));
        assert!(matches!(
            make_torus(2.0, 0.5, 2, 8),
            Err(Error::InvalidParameter(_))
        ));
        assert!(matches!(
            make_ellipsoid(1.0, -1.0, 1.0, 3),
            Err(Error::InvalidParameter(_))
        ));
        assert!(matches!(
            make_sphere(f64::NAN, 3),
            Err(Error::InvalidParameter(_))
        ));
    }

    #[test]
    fn klein_bottle_grid_is_not_orientable() {
        let (nu, nv) = (8usize, 6usize);
        let mut positions = Vec::new();
        for i in 0..nu {
            for j in 0..nv {
                let (x, y) = (i as f64, j as f64);
                positions.push(Vector3::new(x, y, (x * 1.3 + y * 0.7).sin() + 0.1 * x * y));
            }
        }
        // Crossing the u seam reverses v.
        let idx = |i: usize, j: usize| {
            if i == nu {
                (nv - j % nv) % nv
            } else {
                i * nv + j % nv
            }
        };
        let mut faces = Vec::new();
        for i in 0..nu {
            for j in 0..nv {
                faces.push([idx(i, j), idx(i + 1, j), idx(i + 1, j + 1)]);
                faces.push([idx(i, j), idx(i + 1, j + 1), idx(i, j + 1)]);
            }
        }
        assert!(matches!(
            TriMesh::new(positions, faces),
            Err(Error::NotOrientable)
        ));
    }
}
