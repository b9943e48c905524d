//! Clifford action of R^3 on two-component complex spinors.
//!
//! The representation is fixed to `γ_k = i σ_k` with the Pauli matrices
//! `σ_k`, so that `γ(v)² = -|v|²` and every `γ(v)` is skew-Hermitian.

use nalgebra::{Matrix2, Vector2, Vector3};

use crate::{Error, Result, C64};

/// A spinor fibre element.
pub type Spinor = Vector2<C64>;

/// A complex 2×2 endomorphism of the spinor fibre.
pub type Endo = Matrix2<C64>;

/// Relative tolerance of the orthogonality check in [`CliffordRep::gamma_surface`].
pub const ORTHOGONALITY_TOL: f64 = 1e-10;

const ZERO: C64 = C64::new(0.0, 0.0);
const ONE: C64 = C64::new(1.0, 0.0);
const I: C64 = C64::new(0.0, 1.0);

/// Gamma matrices of the rank-3 Clifford algebra.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CliffordRep {
    gammas: [Endo; 3],
}

/// The fixed representation `γ_k = i σ_k`.
pub fn build_rep() -> CliffordRep {
    CliffordRep::new()
}

impl Default for CliffordRep {
    fn default() -> Self {
        Self::new()
    }
}

impl CliffordRep {
    /// Ambient dimension.
    pub const DIM: usize = 3;

    pub fn new() -> Self {
        let g1 = Matrix2::new(ZERO, I, I, ZERO);
        let g2 = Matrix2::new(ZERO, ONE, -ONE, ZERO);
        let g3 = Matrix2::new(I, ZERO, ZERO, -I);
        Self {
            gammas: [g1, g2, g3],
        }
    }

    pub fn dim(&self) -> usize {
        Self::DIM
    }

    pub fn gammas(&self) -> &[Endo; 3] {
        &self.gammas
    }

    /// Clifford multiplication by `v`.
    pub fn gamma(&self, v: &Vector3<f64>) -> Endo {
        // i(v1 σ1 + v2 σ2 + v3 σ3), written out.
        Matrix2::new(
            C64::new(0.0, v.z),
            C64::new(v.y, v.x),
            C64::new(-v.y, v.x),
            C64::new(0.0, -v.z),
        )
    }

    /// Induced surface action `γ(X)γ(N)` for a tangent vector `X` at a point with unit normal `N`.
    pub fn gamma_surface(&self, x: &Vector3<f64>, n: &Vector3<f64>) -> Result<Endo> {
        let dot = x.dot(n);
        if dot.abs() > ORTHOGONALITY_TOL * x.norm() {
            return Err(Error::NonOrthogonal(dot));
        }
        Ok(self.gamma(x) * self.gamma(n))
    }

    /// `γ₁γ₂γ₃`, a scalar multiple of the identity.
    pub fn volume_element(&self) -> Endo {
        self.gammas[0] * self.gammas[1] * self.gammas[2]
    }

    /// Lift to the spinor fibre of the minimal rotation taking `from` to `to`.
    ///
    /// Both vectors must be unit length and not antipodal. The result `U` is
    /// unitary and satisfies `U γ(from) = γ(to) U`.
    pub fn spin_transport(&self, from: &Vector3<f64>, to: &Vector3<f64>) -> Option<Endo> {
        let c = 1.0 + from.dot(to);
        if c <= 1e-12 {
            return None;
        }
        let m = Endo::identity() - self.gamma(to) * self.gamma(from);
        Some(m.unscale((2.0 * c).sqrt()))
    }

    /// Antilinear structure `J ψ = σ₂ ψ̄`, commuting with every `γ(v)` and squaring to `-1`.
    pub fn quaternionic(&self, psi: &Spinor) -> Spinor {
        Spinor::new(-I * psi[1].conj(), I * psi[0].conj())
    }
}

/// Hermitian fibre product `⟨ψ, φ⟩ = Σ ψ_a φ̄_a`, linear in the first slot.
pub fn inner(psi: &Spinor, phi: &Spinor) -> C64 {
    psi[0] * phi[0].conj() + psi[1] * phi[1].conj()
}

/// Real part of the fibre product.
pub fn real_inner(psi: &Spinor, phi: &Spinor) -> f64 {
    inner(psi, phi).re
}
