//! Product quadrature on the unit ball and the unit sphere.

use std::f64::consts::{PI, TAU};

use nalgebra::Vector3;

use crate::{Error, Result};

/// Below this resolution the rules still run but are flagged as coarse by the CLI.
pub const MIN_RESOLUTION: usize = 4;

/// Gauss–Legendre nodes (ascending) and weights on `[-1, 1]`.
pub fn gauss_legendre(n: usize) -> (Vec<f64>, Vec<f64>) {
    let mut x = vec![0.0; n];
    let mut w = vec![0.0; n];
    for i in 0..n.div_ceil(2) {
        let mut z = (PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
        let mut dp = 1.0;
        for _ in 0..100 {
            let (mut p1, mut p2) = (1.0, 0.0);
            for j in 1..=n {
                let p3 = p2;
                p2 = p1;
                p1 = ((2 * j - 1) as f64 * z * p2 - (j - 1) as f64 * p3) / j as f64;
            }
            dp = n as f64 * (z * p1 - p2) / (z * z - 1.0);
            let step = p1 / dp;
            z -= step;
            if step.abs() < 1e-16 {
                break;
            }
        }
        x[i] = -z;
        x[n - 1 - i] = z;
        w[i] = 2.0 / ((1.0 - z * z) * dp * dp);
        w[n - 1 - i] = w[i];
    }
    (x, w)
}

/// Quadrature nodes and weights for the unit ball and its boundary sphere.
///
/// Radius uses `n` Gauss–Legendre points with the `r²` Jacobian, the polar
/// angle `n` Gauss–Legendre points in `cos θ`, and the azimuth `2n` equispaced
/// points. Polynomials of degree below `2n` in each factor are integrated exactly.
#[derive(Debug, Clone)]
pub struct BallQuadrature {
    resolution: usize,
    volume: Vec<(Vector3<f64>, f64)>,
    surface: Vec<(Vector3<f64>, f64)>,
}

impl BallQuadrature {
    pub fn new(resolution: usize) -> Result<Self> {
        if resolution == 0 {
            return Err(Error::InvalidParameter(
                "quadrature resolution must be positive".into(),
            ));
        }
        let n = resolution;
        let (t, wt) = gauss_legendre(n);
        let azimuth: Vec<(f64, f64)> = (0..2 * n)
            .map(|k| (TAU * k as f64 / (2 * n) as f64).sin_cos())
            .collect();
        let dphi = TAU / (2 * n) as f64;
        let mut surface = Vec::with_capacity(2 * n * n);
        for (&c, &w) in t.iter().zip(&wt) {
            let s = (1.0 - c * c).sqrt();
            for &(sp, cp) in &azimuth {
                surface.push((Vector3::new(s * cp, s * sp, c), w * dphi));
            }
        }
        let mut volume = Vec::with_capacity(surface.len() * n);
        for (&r, &w) in t.iter().zip(&wt) {
            let (r, w) = (0.5 * (r + 1.0), 0.5 * w);
            for (x, ws) in &surface {
                volume.push((x * r, ws * w * r * r));
            }
        }
        Ok(Self {
            resolution,
            volume,
            surface,
        })
    }

    pub fn resolution(&self) -> usize {
        self.resolution
    }

    /// `(point, weight)` pairs inside the ball.
    pub fn volume(&self) -> &[(Vector3<f64>, f64)] {
        &self.volume
    }

    /// `(point, weight)` pairs on the unit sphere.
    pub fn surface(&self) -> &[(Vector3<f64>, f64)] {
        &self.surface
    }

    pub fn volume_total(&self) -> f64 {
        self.volume.iter().map(|p| p.1).sum()
    }

    pub fn surface_total(&self) -> f64 {
        self.surface.iter().map(|p| p.1).sum()
    }
}
