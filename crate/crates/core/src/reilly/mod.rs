//! Integral identities for spinor fields on the unit ball in flat space.
//!
//! The boundary is the unit sphere with inner normal `N = -x` and mean
//! curvature `H = 1`. Its Dirac operator acts on restrictions of ambient fields
//! through `Dψ = Hψ - γ(N)D̄ψ - ∇̄_Nψ`, so every boundary and volume term is
//! computable from the exact first derivatives of the field.

mod quadrature;

use nalgebra::{Matrix3, Vector3};
use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::clifford::{inner, real_inner, CliffordRep, Spinor};
use crate::{Error, Result, C64};

pub use quadrature::{gauss_legendre, BallQuadrature, MIN_RESOLUTION};

/// Scalar curvature of the flat ambient space. Kept explicit in every formula.
pub const AMBIENT_SCALAR_CURVATURE: f64 = 0.0;

/// `n + 1`, the ambient dimension.
const AMBIENT_DIM: f64 = 3.0;

/// `|ψ|²` below which the energy-momentum tensor is undefined.
pub const ZERO_SPINOR_TOL: f64 = 1e-24;

/// A smooth spinor field on a neighbourhood of the closed unit ball.
pub trait AmbientSpinorField: Sync {
    fn value(&self, x: &Vector3<f64>) -> Spinor;

    /// Flat partial derivative `∂_k ψ`.
    fn partial(&self, x: &Vector3<f64>, k: usize) -> Spinor;

    /// Name used in verification records.
    fn family(&self) -> &'static str;

    /// Directional derivative `∇̄_X ψ`.
    fn derivative(&self, x: &Vector3<f64>, dir: &Vector3<f64>) -> Spinor {
        (0..3).fold(Spinor::zeros(), |acc, k| {
            acc + self.partial(x, k) * C64::from(dir[k])
        })
    }
}

/// `ψ(x) = φ₀ + γ(x)φ₁`, a twistor spinor for every choice of constants.
#[derive(Debug, Clone, Copy)]
pub struct TwistorFamilySpinor {
    pub phi0: Spinor,
    pub phi1: Spinor,
    rep: CliffordRep,
}

impl TwistorFamilySpinor {
    pub fn new(rep: &CliffordRep, phi0: Spinor, phi1: Spinor) -> Self {
        Self {
            phi0,
            phi1,
            rep: *rep,
        }
    }
}

impl AmbientSpinorField for TwistorFamilySpinor {
    fn value(&self, x: &Vector3<f64>) -> Spinor {
        self.phi0 + self.rep.gamma(x) * self.phi1
    }

    fn partial(&self, _x: &Vector3<f64>, k: usize) -> Spinor {
        self.rep.gammas()[k] * self.phi1
    }

    fn family(&self) -> &'static str {
        "twistor"
    }
}

/// `ψ(x) = |x|² φ₀`, a field with nonvanishing twistor part.
#[derive(Debug, Clone, Copy)]
pub struct RadialQuadraticSpinor {
    pub phi0: Spinor,
}

impl AmbientSpinorField for RadialQuadraticSpinor {
    fn value(&self, x: &Vector3<f64>) -> Spinor {
        self.phi0 * C64::from(x.norm_squared())
    }

    fn partial(&self, x: &Vector3<f64>, k: usize) -> Spinor {
        self.phi0 * C64::from(2.0 * x[k])
    }

    fn family(&self) -> &'static str {
        "non-twistor"
    }
}

/// `ψ(x) = c + Σ x_k l_k + ½ Σ x_j x_k q_{jk}` with symmetric `q`.
#[derive(Debug, Clone, Copy)]
pub struct PolynomialSpinorField {
    pub constant: Spinor,
    pub linear: [Spinor; 3],
    pub quadratic: [[Spinor; 3]; 3],
}

impl PolynomialSpinorField {
    /// Symmetrizes `quadratic` on construction.
    pub fn new(constant: Spinor, linear: [Spinor; 3], quadratic: [[Spinor; 3]; 3]) -> Self {
        let mut q = quadratic;
        for j in 0..3 {
            for k in 0..j {
                let s = (quadratic[j][k] + quadratic[k][j]) * C64::from(0.5);
                q[j][k] = s;
                q[k][j] = s;
            }
        }
        Self {
            constant,
            linear,
            quadratic: q,
        }
    }

    /// Coefficients drawn from [`random_spinor`].
    pub fn random<R: Rng + ?Sized>(rng: &mut R) -> Self {
        let mut s = || random_spinor(rng);
        let constant = s();
        let linear = [s(), s(), s()];
        let quadratic = [[s(), s(), s()], [s(), s(), s()], [s(), s(), s()]];
        Self::new(constant, linear, quadratic)
    }
}

impl AmbientSpinorField for PolynomialSpinorField {
    fn value(&self, x: &Vector3<f64>) -> Spinor {
        let mut v = self.constant;
        for j in 0..3 {
            v += self.linear[j] * C64::from(x[j]);
            for k in 0..3 {
                v += self.quadratic[j][k] * C64::from(0.5 * x[j] * x[k]);
            }
        }
        v
    }

    fn partial(&self, x: &Vector3<f64>, k: usize) -> Spinor {
        (0..3).fold(self.linear[k], |acc, j| {
            acc + self.quadratic[k][j] * C64::from(x[j])
        })
    }

    fn family(&self) -> &'static str {
        "polynomial"
    }
}

/// Spinor with real and imaginary parts uniform in `[-1, 1]`.
pub fn random_spinor<R: Rng + ?Sized>(rng: &mut R) -> Spinor {
    let mut c = || C64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0));
    Spinor::new(c(), c())
}

/// Ambient Dirac operator `D̄ψ = Σ γ(e_k) ∂_k ψ`.
pub fn ambient_dirac<F: AmbientSpinorField + ?Sized>(
    rep: &CliffordRep,
    field: &F,
    x: &Vector3<f64>,
) -> Spinor {
    (0..3).fold(Spinor::zeros(), |acc, k| {
        acc + rep.gammas()[k] * field.partial(x, k)
    })
}

/// Twistor operator `P̄_X ψ = ∇̄_X ψ + (1/3) γ(X) D̄ψ`.
pub fn twistor_operator<F: AmbientSpinorField + ?Sized>(
    rep: &CliffordRep,
    field: &F,
    x: &Vector3<f64>,
    dir: &Vector3<f64>,
) -> Spinor {
    field.derivative(x, dir)
        + rep.gamma(dir) * ambient_dirac(rep, field, x) * C64::from(1.0 / AMBIENT_DIM)
}

/// Boundary Dirac operator of the unit sphere applied to the restriction of `field`, at `x` on the sphere.
pub fn sphere_dirac<F: AmbientSpinorField + ?Sized>(
    rep: &CliffordRep,
    field: &F,
    x: &Vector3<f64>,
) -> Spinor {
    let n = -x;
    let h = 1.0;
    field.value(x) * C64::from(h)
        - rep.gamma(&n) * ambient_dirac(rep, field, x)
        - field.derivative(x, &n)
}

/// Every integral entering the boundary Weitzenböck identities.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ReillyTerms {
    /// `∫_S (⟨Dψ,ψ⟩ - H|ψ|²)`.
    pub lhs: f64,
    /// `¼ ∫_B R̄ |ψ|²`.
    pub curvature: f64,
    /// `∫_B |D̄ψ|²`.
    pub dirac: f64,
    /// `∫_B |P̄ψ|²`.
    pub twistor: f64,
    /// `∫_B |∇̄ψ|²`.
    pub gradient: f64,
    /// `∫_B |Q̄_ψ|² |ψ|²`.
    pub energy_momentum: f64,
    /// `∫_B |∇̄^Q ψ|²`.
    pub modified_gradient: f64,
}

impl ReillyTerms {
    /// Right side of the twistor form of the identity.
    pub fn rhs(&self) -> f64 {
        self.curvature - (2.0 / AMBIENT_DIM) * self.dirac + self.twistor
    }

    /// Right side of the inequality obtained by dropping the twistor term.
    pub fn twistor_bound(&self) -> f64 {
        self.curvature - (2.0 / AMBIENT_DIM) * self.dirac
    }

    /// Right side of the plain integrated Weitzenböck formula.
    pub fn weitzenbock_rhs(&self) -> f64 {
        self.gradient - self.dirac + self.curvature
    }

    /// Right side of the energy-momentum form of the identity.
    pub fn emt_rhs(&self) -> f64 {
        self.curvature + self.energy_momentum - self.dirac + self.modified_gradient
    }

    /// Right side of the inequality obtained by dropping `|∇̄^Q ψ|²`.
    pub fn emt_bound(&self) -> f64 {
        self.curvature + self.energy_momentum - self.dirac
    }
}

fn sum_ordered(values: Vec<f64>) -> f64 {
    values.into_iter().sum()
}

/// `∫_S (⟨Dψ,ψ⟩ - H|ψ|²) dΣ`, real part.
pub fn lhs_surface<F: AmbientSpinorField + ?Sized>(
    rep: &CliffordRep,
    field: &F,
    q: &BallQuadrature,
) -> f64 {
    let terms: Vec<f64> = q
        .surface()
        .par_iter()
        .map(|(x, w)| {
            let psi = field.value(x);
            w * (real_inner(&sphere_dirac(rep, field, x), &psi) - psi.norm_squared())
        })
        .collect();
    sum_ordered(terms)
}

/// `¼∫R̄|ψ|² - (2/3)∫|D̄ψ|² + ∫|P̄ψ|²` over the ball.
pub fn rhs_volume<F: AmbientSpinorField + ?Sized>(
    rep: &CliffordRep,
    field: &F,
    q: &BallQuadrature,
) -> f64 {
    reilly_terms(rep, field, q).rhs()
}

fn frame() -> [Vector3<f64>; 3] {
    [Vector3::x(), Vector3::y(), Vector3::z()]
}

/// Value and first partials of a field at one point.
#[derive(Debug, Clone, Copy)]
struct Jet {
    psi: Spinor,
    d: [Spinor; 3],
}

impl Jet {
    fn of<F: AmbientSpinorField + ?Sized>(field: &F, x: &Vector3<f64>) -> Self {
        Self {
            psi: field.value(x),
            d: [
                field.partial(x, 0),
                field.partial(x, 1),
                field.partial(x, 2),
            ],
        }
    }

    fn dirac(&self, rep: &CliffordRep) -> Spinor {
        let g = rep.gammas();
        g[0] * self.d[0] + g[1] * self.d[1] + g[2] * self.d[2]
    }

    fn gradient(&self) -> f64 {
        self.d.iter().map(|v| v.norm_squared()).sum()
    }

    /// `Σ_k |∂_k ψ + ⅓ γ_k D̄ψ|²`.
    fn twistor(&self, rep: &CliffordRep) -> f64 {
        let dirac = self.dirac(rep) * C64::from(1.0 / AMBIENT_DIM);
        (0..3)
            .map(|k| (self.d[k] + rep.gammas()[k] * dirac).norm_squared())
            .sum()
    }

    fn energy_momentum(&self, rep: &CliffordRep) -> Result<Matrix3<f64>> {
        let norm2 = self.psi.norm_squared();
        if norm2 <= ZERO_SPINOR_TOL {
            return Err(Error::ZeroSpinor);
        }
        let g = rep.gammas();
        Ok(Matrix3::from_fn(|k, l| {
            0.5 * (inner(&(g[k] * self.d[l]), &self.psi) + inner(&(g[l] * self.d[k]), &self.psi)).re
                / norm2
        }))
    }

    /// `Σ_k |∂_k ψ + γ(Q e_k) ψ|²`.
    fn modified_gradient(&self, rep: &CliffordRep, q: &Matrix3<f64>) -> f64 {
        (0..3)
            .map(|k| (self.d[k] + rep.gamma(&q.column(k).into_owned()) * self.psi).norm_squared())
            .sum()
    }
}

/// Evaluates all boundary and volume integrals.
pub fn reilly_terms<F: AmbientSpinorField + ?Sized>(
    rep: &CliffordRep,
    field: &F,
    q: &BallQuadrature,
) -> ReillyTerms {
    let volume: Vec<[f64; 6]> = q
        .volume()
        .par_iter()
        .map(|(x, w)| {
            let jet = Jet::of(field, x);
            let norm2 = jet.psi.norm_squared();
            let gradient = jet.gradient();
            let (emt, modified) = match jet.energy_momentum(rep) {
                Ok(qm) => (qm.norm_squared() * norm2, jet.modified_gradient(rep, &qm)),
                Err(_) => (0.0, gradient),
            };
            [
                w * 0.25 * AMBIENT_SCALAR_CURVATURE * norm2,
                w * jet.dirac(rep).norm_squared(),
                w * jet.twistor(rep),
                w * gradient,
                w * emt,
                w * modified,
            ]
        })
        .collect();
    let mut acc = [0.0; 6];
    for row in volume {
        for (a, v) in acc.iter_mut().zip(row) {
            *a += v;
        }
    }
    ReillyTerms {
        lhs: lhs_surface(rep, field, q),
        curvature: acc[0],
        dirac: acc[1],
        twistor: acc[2],
        gradient: acc[3],
        energy_momentum: acc[4],
        modified_gradient: acc[5],
    }
}

/// Pointwise twistor checks over a sample set.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TwistorResidual {
    /// `max |∇̄_X ψ + ⅓ γ(X) D̄ψ|` over samples and frame directions.
    pub twistor: f64,
    /// `max ||∇̄ψ|² - |P̄ψ|² - ⅓|D̄ψ|²|`.
    pub decomposition: f64,
}

pub fn twistor_residual<F: AmbientSpinorField + ?Sized>(
    rep: &CliffordRep,
    field: &F,
    points: &[Vector3<f64>],
) -> TwistorResidual {
    let mut out = TwistorResidual {
        twistor: 0.0,
        decomposition: 0.0,
    };
    for x in points {
        let mut p2 = 0.0;
        for e in frame() {
            let p = twistor_operator(rep, field, x, &e);
            out.twistor = out.twistor.max(p.norm());
            p2 += p.norm_squared();
        }
        let grad: f64 = (0..3).map(|k| field.partial(x, k).norm_squared()).sum();
        let d2 = ambient_dirac(rep, field, x).norm_squared();
        out.decomposition = out.decomposition.max((grad - p2 - d2 / AMBIENT_DIM).abs());
    }
    out
}

/// Energy-momentum tensor `Q_{kl} = ½ Re⟨γ_k ∂_l ψ + γ_l ∂_k ψ, ψ⟩ / |ψ|²`.
pub fn energy_momentum<F: AmbientSpinorField + ?Sized>(
    rep: &CliffordRep,
    field: &F,
    x: &Vector3<f64>,
) -> Result<Matrix3<f64>> {
    Jet::of(field, x).energy_momentum(rep)
}

/// `||∇̄ψ|² - |∇̄^Q ψ|² - |Q|²|ψ|²|` at `x`.
pub fn emt_identity_check<F: AmbientSpinorField + ?Sized>(
    rep: &CliffordRep,
    field: &F,
    x: &Vector3<f64>,
) -> Result<f64> {
    let jet = Jet::of(field, x);
    let q = jet.energy_momentum(rep)?;
    Ok((jet.gradient()
        - jet.modified_gradient(rep, &q)
        - q.norm_squared() * jet.psi.norm_squared())
    .abs())
}

/// Result of checking one field at one quadrature resolution.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VerificationRecord {
    pub family: String,
    pub lhs: f64,
    /// Right side of the twistor identity.
    pub rhs: f64,
    /// `|lhs - rhs| / (|rhs| + 1)`.
    pub defect: f64,
    pub resolution: usize,
    /// Whether doubling the resolution changes `lhs` and `rhs` by less than the tolerance.
    pub converged: bool,
    /// `lhs` minus the right side with the twistor term dropped; zero exactly for twistor spinors.
    pub twistor_margin: f64,
    /// `lhs` minus the right side with the modified-gradient term dropped.
    pub emt_margin: f64,
}

/// Evaluates the identities at `resolution` and checks stability at twice that resolution.
pub fn verify<F: AmbientSpinorField + ?Sized>(
    rep: &CliffordRep,
    field: &F,
    resolution: usize,
    tol: f64,
) -> Result<VerificationRecord> {
    let coarse = reilly_terms(rep, field, &BallQuadrature::new(resolution)?);
    let fine = reilly_terms(rep, field, &BallQuadrature::new(2 * resolution)?);
    let drift = (coarse.lhs - fine.lhs).abs() + (coarse.rhs() - fine.rhs()).abs();
    Ok(VerificationRecord {
        family: field.family().to_string(),
        lhs: coarse.lhs,
        rhs: coarse.rhs(),
        defect: (coarse.lhs - coarse.rhs()).abs() / (coarse.rhs().abs() + 1.0),
        resolution,
        converged: drift <= tol * (1.0 + fine.rhs().abs()),
        twistor_margin: coarse.lhs - coarse.twistor_bound(),
        emt_margin: coarse.lhs - coarse.emt_bound(),
    })
}
