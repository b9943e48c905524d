//! Lower bounds for the first nonnegative Dirac eigenvalue and the umbilicity diagnostic.

use std::fmt::{self, Write as _};

use serde::{Deserialize, Serialize};

use crate::curvature::CurvatureField;
use crate::dirac::SpectrumReport;
use crate::{Error, Result};

/// Surface dimension.
const DIM: f64 = 2.0;

/// Relative slack allowed in the pointwise check `R ≤ 2H²`.
pub const REMARK_REL_TOL: f64 = 0.05;

/// Largest relative standard deviation of `H` still counted as constant mean curvature.
pub const CONSTANT_H_TOL: f64 = 0.02;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Verdict {
    Holds,
    /// Bound attained with constant mean curvature.
    Equality,
    Violated,
    HypothesisNotMet,
    /// The bound is absent.
    Vacuous,
}

impl Verdict {
    /// Whether the verdict contradicts the inequality.
    pub fn is_failure(self) -> bool {
        self == Verdict::Violated
    }
}

impl fmt::Display for Verdict {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Verdict::Holds => "holds",
            Verdict::Equality => "equality (sphere)",
            Verdict::Violated => "violated",
            Verdict::HypothesisNotMet => "hypothesis not met",
            Verdict::Vacuous => "vacuous",
        })
    }
}

/// `(n/2) min H`, flagged when `min H < 0`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ExtrinsicBound {
    pub value: f64,
    pub hypothesis_met: bool,
    /// Vertex attaining the minimum.
    pub vertex: usize,
}

pub fn extrinsic_bound(curv: &CurvatureField) -> ExtrinsicBound {
    let (vertex, h) = curv.min_mean();
    ExtrinsicBound {
        value: 0.5 * DIM * h,
        hypothesis_met: h >= 0.0,
        vertex,
    }
}

/// `sqrt(n/(4(n-1)) min R)` with `R = 2K`, or `None` when `min R ≤ 0`.
pub fn friedrich_bound(curv: &CurvatureField) -> Option<f64> {
    let (_, k) = curv.min_gauss();
    let r = 2.0 * k;
    (r > 0.0).then(|| (DIM / (4.0 * (DIM - 1.0)) * r).sqrt())
}

/// `max_i ‖A_i - H_i I‖_F / mean |H|` over the fitted shape operators.
pub fn umbilicity(curv: &CurvatureField) -> f64 {
    let shape = curv.shape();
    if shape.is_empty() {
        return 0.0;
    }
    let mean_h = shape.iter().map(|a| a.mean().abs()).sum::<f64>() / shape.len() as f64;
    let worst = shape
        .iter()
        .map(|a| a.trace_free_norm())
        .fold(0.0, f64::max);
    if mean_h > 0.0 {
        worst / mean_h
    } else {
        f64::INFINITY
    }
}

/// `3|λ₁(fine) - λ₁(coarse)| + residual`.
pub fn refinement_tolerance(coarse: f64, fine: f64, residual: f64) -> f64 {
    3.0 * (fine - coarse).abs() + residual
}

/// Pointwise check of `R ≤ 2H²` at one vertex, with [`REMARK_REL_TOL`] slack.
pub fn remark_holds(h: f64, k: f64) -> bool {
    let (lhs, rhs) = (2.0 * k, 2.0 * h * h);
    lhs <= rhs + REMARK_REL_TOL * rhs.max(lhs.abs())
}

/// Bounds compared against a computed spectrum.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BoundReport {
    pub lambda1: f64,
    pub tolerance: f64,
    pub extrinsic_bound: f64,
    pub extrinsic_slack: f64,
    pub extrinsic_verdict: Verdict,
    pub friedrich_bound: Option<f64>,
    pub friedrich_slack: Option<f64>,
    pub friedrich_verdict: Verdict,
    /// Whether the Friedrich bound lies below the extrinsic one. Reported, not asserted.
    pub friedrich_below_extrinsic: Option<bool>,
    pub umbilicity_deviation: f64,
    /// Relative standard deviation of `H` over vertices.
    pub mean_curvature_spread: f64,
    /// Vertices where `R ≤ 2H²` fails beyond tolerance.
    pub remark_violations: usize,
    pub remark_worst_excess: f64,
}

impl BoundReport {
    /// True unless some inequality is violated.
    pub fn passed(&self) -> bool {
        !self.extrinsic_verdict.is_failure()
            && !self.friedrich_verdict.is_failure()
            && self.remark_violations == 0
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serializes")
    }

    pub fn to_table(&self) -> String {
        let opt = |v: Option<f64>| v.map_or_else(|| "-".to_string(), |v| format!("{v:.6}"));
        let mut s = String::new();
        let _ = writeln!(
            s,
            "{:<14} {:>12} {:>12}  verdict",
            "bound", "value", "slack"
        );
        let _ = writeln!(
            s,
            "{:<14} {:>12.6} {:>12.6}  {}",
            "extrinsic", self.extrinsic_bound, self.extrinsic_slack, self.extrinsic_verdict
        );
        let _ = writeln!(
            s,
            "{:<14} {:>12} {:>12}  {}",
            "friedrich",
            opt(self.friedrich_bound),
            opt(self.friedrich_slack),
            self.friedrich_verdict
        );
        let _ = writeln!(s, "lambda1         {:.6}", self.lambda1);
        let _ = writeln!(s, "tolerance       {:.3e}", self.tolerance);
        let _ = writeln!(s, "umbilicity      {:.6}", self.umbilicity_deviation);
        let _ = writeln!(s, "H spread        {:.6}", self.mean_curvature_spread);
        let _ = writeln!(s, "R <= 2H^2       {} violations", self.remark_violations);
        s
    }
}

fn relative_spread(values: &[f64]) -> f64 {
    let n = values.len() as f64;
    let mean = values.iter().sum::<f64>() / n;
    let var = values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / n;
    if mean.abs() > 0.0 {
        var.sqrt() / mean.abs()
    } else {
        f64::INFINITY
    }
}

/// Evaluates both bounds against `λ₁` of `spec` with discretization tolerance `tol`.
pub fn compare(spec: &SpectrumReport, curv: &CurvatureField, tol: f64) -> Result<BoundReport> {
    if format!("{:016x}", curv.mesh_fingerprint()) != spec.mesh.fingerprint {
        return Err(Error::CurvatureMismatch);
    }
    let lambda1 = spec.lambda1().ok_or(Error::UnresolvedLambda1)?;
    let extrinsic = extrinsic_bound(curv);
    let spread = relative_spread(curv.mean());
    let extrinsic_slack = lambda1 - extrinsic.value;
    let extrinsic_verdict = if !extrinsic.hypothesis_met {
        Verdict::HypothesisNotMet
    } else if extrinsic_slack < -tol {
        Verdict::Violated
    } else if extrinsic_slack <= tol && spread <= CONSTANT_H_TOL {
        Verdict::Equality
    } else {
        Verdict::Holds
    };

    let friedrich = friedrich_bound(curv);
    let friedrich_slack = friedrich.map(|b| lambda1 - b);
    let friedrich_verdict = match friedrich_slack {
        None => Verdict::Vacuous,
        Some(s) if s < -tol => Verdict::Violated,
        Some(_) => Verdict::Holds,
    };

    let mut remark_violations = 0;
    let mut remark_worst_excess = f64::NEG_INFINITY;
    for (&h, &k) in curv.mean().iter().zip(curv.gauss()) {
        remark_worst_excess = remark_worst_excess.max(2.0 * k - 2.0 * h * h);
        if !remark_holds(h, k) {
            remark_violations += 1;
        }
    }

    Ok(BoundReport {
        lambda1,
        tolerance: tol,
        extrinsic_bound: extrinsic.value,
        extrinsic_slack,
        extrinsic_verdict,
        friedrich_bound: friedrich,
        friedrich_slack,
        friedrich_verdict,
        friedrich_below_extrinsic: friedrich.map(|f| f <= extrinsic.value),
        umbilicity_deviation: umbilicity(curv),
        mean_curvature_spread: spread,
        remark_violations,
        remark_worst_excess,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::curvature::curvature;
    use crate::mesh::{make_ellipsoid, make_sphere, make_torus};

    #[test]
    fn sphere_bounds_scale() {
        for r in [0.5, 1.0, 3.0] {
            let c = curvature(&make_sphere(r, 4).unwrap()).unwrap();
            let e = extrinsic_bound(&c);
            assert!(e.hypothesis_met);
            assert!((e.value * r - 1.0).abs() < 0.01, "r={r} {}", e.value);
            assert!((friedrich_bound(&c).unwrap() * r - 1.0).abs() < 0.01);
        }
    }

    #[test]
    fn torus_bounds() {
        let c = curvature(&make_torus(2.0, 0.5, 96, 48).unwrap()).unwrap();
        assert!((extrinsic_bound(&c).value - 2.0 / 3.0).abs() < 0.01);
        assert_eq!(friedrich_bound(&c), None);
        assert!(umbilicity(&c) > 0.5);
    }

    #[test]
    fn umbilicity_orders_shapes() {
        let s = umbilicity(&curvature(&make_sphere(1.0, 4).unwrap()).unwrap());
        let e = umbilicity(&curvature(&make_ellipsoid(1.0, 1.0, 1.5, 4).unwrap()).unwrap());
        let t = umbilicity(&curvature(&make_torus(2.0, 0.5, 64, 32).unwrap()).unwrap());
        assert!(s < 0.05 && s < e && e < t, "{s} {e} {t}");
    }

    #[test]
    fn reversed_orientation_fails_hypothesis() {
        let c = curvature(&make_sphere(1.0, 3).unwrap().reversed()).unwrap();
        assert!(!extrinsic_bound(&c).hypothesis_met);
    }

    #[test]
    fn remark_check() {
        assert!(remark_holds(1.0, 1.0));
        assert!(remark_holds(1.0, 1.04));
        assert!(!remark_holds(1.0, 1.2));
        assert!(remark_holds(0.3, -4.0));
    }

    #[test]
    fn verdict_strings() {
        assert_eq!(Verdict::Equality.to_string(), "equality (sphere)");
        assert_eq!(Verdict::HypothesisNotMet.to_string(), "hypothesis not met");
        assert!((refinement_tolerance(1.0, 0.99, 1e-9) - 0.03).abs() < 1e-8);
    }
}
