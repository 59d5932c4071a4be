//! Closed-form spectral theory at Einstein metrics: GJMS factorization,
//! Einstein operator polynomials, sphere stability verdicts, and the
//! weight −4 cones.
//!
//! Operators act on −Δ eigenvalues: the substitution is Δ ↦ −λ, so a
//! conformal linearization DL = q(−Δ)(−Δ − 2J) becomes q(λ)(λ − 2J).

use crate::catalog::InvariantId;
use crate::{Error, Result};
use serde::Serialize;

/// DL at an Einstein metric as a polynomial in the −Δ eigenvalue λ,
/// either q(λ)·(λ − 2J) (stability factor set) or q(λ) alone.
#[derive(Clone, Debug, Serialize)]
pub struct OperatorPolynomial {
    pub id: String,
    pub n: usize,
    pub j: f64,
    /// Coefficients of q(λ), ascending in λ.
    pub q: Vec<f64>,
    pub has_stability_factor: bool,
    /// Closed form valid only where W = 0 (round spheres).
    pub sphere_only: bool,
}

impl OperatorPolynomial {
    pub fn eval_q(&self, lambda: f64) -> f64 {
        let mut acc = 0.0;
        for &c in self.q.iter().rev() {
            acc = acc * lambda + c;
        }
        acc
    }

    /// Full operator eigenvalue at λ.
    pub fn eval(&self, lambda: f64) -> f64 {
        if self.has_stability_factor {
            self.eval_q(lambda) * (lambda - 2.0 * self.j)
        } else {
            self.eval_q(lambda)
        }
    }

    pub fn leading_coefficient(&self) -> f64 {
        *self
            .q
            .iter()
            .rev()
            .find(|c| **c != 0.0)
            .unwrap_or(&0.0)
    }

    pub fn is_zero(&self) -> bool {
        self.q.iter().all(|c| *c == 0.0)
    }

    /// Ellipticity verdict from the sign of the leading coefficient of the
    /// full operator (spectrum tending to +∞).
    pub fn elliptic(&self) -> bool {
        self.leading_coefficient() > 0.0
    }

    /// Whether q(λ) ≥ 0 for every λ ≥ lo (degree ≤ 2 sign analysis); the
    /// tail obligation that makes k_max immaterial to verdicts.
    pub fn q_nonnegative_from(&self, lo: f64) -> bool {
        let c = &self.q;
        let get = |i: usize| c.get(i).copied().unwrap_or(0.0);
        let (c0, c1, c2) = (get(0), get(1), get(2));
        assert!(c.len() <= 3, "sign analysis implemented for degree <= 2");
        if c2 == 0.0 {
            if c1 == 0.0 {
                return c0 >= 0.0;
            }
            if c1 < 0.0 {
                return false; // negative for large λ
            }
            return c0 + c1 * lo >= 0.0;
        }
        if c2 < 0.0 {
            return false;
        }
        let disc = c1 * c1 - 4.0 * c2 * c0;
        if disc <= 0.0 {
            return true;
        }
        let r2 = (-c1 + disc.sqrt()) / (2.0 * c2); // larger root
        r2 <= lo + 1e-12 * (1.0 + lo.abs())
    }
}

/// GJMS operator P_2k at an Einstein metric: the product of Schrödinger
/// factors (−Δ + (n+2j−2)(n−2j)J/(2n)), expanded in λ.
pub fn gjms_operator(k: usize, n: usize, j: f64) -> OperatorPolynomial {
    let mut q = vec![1.0];
    for fac_j in 1..=k {
        let c = (n as f64 + 2.0 * fac_j as f64 - 2.0) * (n as f64 - 2.0 * fac_j as f64)
            / (2.0 * n as f64)
            * j;
        // multiply by (λ + c)
        let mut next = vec![0.0; q.len() + 1];
        for (i, &coef) in q.iter().enumerate() {
            next[i] += coef * c;
            next[i + 1] += coef;
        }
        q = next;
    }
    OperatorPolynomial {
        id: format!("P{}", 2 * k),
        n,
        j,
        q,
        has_stability_factor: false,
        sphere_only: false,
    }
}

/// Exact value of Q_2k on the unit n-sphere: 2/(n−2k) · P_2k(0) away from
/// the critical dimension, and the analytic continuation at n = 2k.
pub fn q_curvature_sphere(k: usize, n: usize) -> f64 {
    let nf = n as f64;
    if n != 2 * k {
        let p = gjms_operator(k, n, nf / 2.0);
        return 2.0 / (nf - 2.0 * k as f64) * p.eval_q(0.0);
    }
    // continuation: drop the vanishing factor (n−2j) at j = k and insert
    // its derivative normalization 2/(n−2k) → product over j < k times
    // (n+2k−2)·J/(2n) · 2 ... equivalently the closed forms
    match k {
        2 => nf * (nf - 2.0) * (nf + 2.0) / 8.0,
        3 => nf * (nf - 2.0) * (nf + 2.0) * (nf - 4.0) * (nf + 4.0) / 32.0,
        _ => {
            // generic continuation via lim 2 P_2k(0)/(n−2k)
            let j = nf / 2.0;
            let mut acc = 2.0;
            for fj in 1..=k {
                if fj == k {
                    acc *= (nf + 2.0 * fj as f64 - 2.0) / (2.0 * nf) * j;
                } else {
                    acc *= (nf + 2.0 * fj as f64 - 2.0) * (nf - 2.0 * fj as f64) / (2.0 * nf) * j;
                }
            }
            acc
        }
    }
}

/// Einstein operator polynomial for a catalog invariant.
///
/// The Q6 constant coefficient is 3(n²−4)(n²−16)/(4n²)·J², derived from
/// the conformal linearization of Q6 combined with the Einstein GJMS
/// factorization; the full operator then vanishes at λ = 2J as required.
pub fn einstein_operator(id: InvariantId, n: usize, j: f64) -> Result<OperatorPolynomial> {
    let nf = n as f64;
    let mk = |q: Vec<f64>, sphere_only: bool| OperatorPolynomial {
        id: id.as_str().to_string(),
        n,
        j,
        q,
        has_stability_factor: true,
        sphere_only,
    };
    match id {
        InvariantId::J => Ok(mk(vec![1.0], false)),
        InvariantId::Sigma2 => Ok(mk(vec![(nf - 1.0) / nf * j], false)),
        InvariantId::Q4 => Ok(mk(vec![(nf * nf - 4.0) / nf * j, 1.0], false)),
        InvariantId::V3 => Ok(mk(
            vec![(nf - 1.0) * (nf - 2.0) / (2.0 * nf * nf) * j * j],
            false,
        )),
        InvariantId::Q6 => Ok(mk(
            vec![
                3.0 * (nf * nf - 4.0) * (nf * nf - 16.0) / (4.0 * nf * nf) * j * j,
                (3.0 * nf * nf - 2.0 * nf - 32.0) / (2.0 * nf) * j,
                1.0,
            ],
            false,
        )),
        InvariantId::I1 => Ok(mk(vec![(nf - 6.0) * j * j, 2.0 * j], false)),
        InvariantId::I2 => Ok(mk(
            vec![3.0 * (nf - 6.0) / nf * j * j, 2.0 * (nf + 2.0) / nf * j],
            false,
        )),
        InvariantId::K1 => Ok(mk(vec![0.0], false)),
        // DK2 = −δ(W²(∇Υ)) at Einstein metrics, which vanishes when W = 0
        InvariantId::K2 => Ok(mk(vec![0.0], true)),
        InvariantId::K3 | InvariantId::L1 | InvariantId::L2 | InvariantId::L3 => {
            Err(Error::UnsupportedId {
                id: id.as_str().into(),
                why: "no Einstein diagonal form".into(),
            })
        }
        InvariantId::WeylSq => Err(Error::UnsupportedId {
            id: id.as_str().into(),
            why: "pointwise conformal invariant; no Einstein diagonal form".into(),
        }),
    }
}

/// αQ4 + βσ2 as an Einstein operator (both parts share the (λ−2J) factor).
pub fn weight4_combination_operator(alpha: f64, beta: f64, n: usize, j: f64) -> OperatorPolynomial {
    let q4 = einstein_operator(InvariantId::Q4, n, j).unwrap();
    let s2 = einstein_operator(InvariantId::Sigma2, n, j).unwrap();
    OperatorPolynomial {
        id: format!("{alpha}*Q4 + {beta}*sigma2"),
        n,
        j,
        q: vec![alpha * q4.q[0] + beta * s2.q[0], alpha * q4.q[1]],
        has_stability_factor: true,
        sphere_only: false,
    }
}

/// −Δ eigenvalue on the k-th spherical-harmonic eigenspace.
pub fn sphere_lambda(k: usize, n: usize, radius: f64) -> f64 {
    (k * (k + n - 1)) as f64 / (radius * radius)
}

pub fn sphere_j(n: usize, radius: f64) -> f64 {
    n as f64 / (2.0 * radius * radius)
}

/// (k, λ_k, eigenvalue of DL on that eigenspace), k = 0..k_max.
pub fn sphere_spectrum_table(
    id: InvariantId,
    n: usize,
    radius: f64,
    k_max: usize,
) -> Result<Vec<(usize, f64, f64)>> {
    let op = einstein_operator(id, n, sphere_j(n, radius))?;
    Ok((0..=k_max)
        .map(|k| {
            let l = sphere_lambda(k, n, radius);
            (k, l, op.eval(l))
        })
        .collect())
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum StabilityVerdict {
    Stable,
    Unstable,
    /// Operator vanishes identically on mean-zero functions.
    Degenerate,
    /// Not decidable by the diagonal closed form (K2 away from spheres).
    Indeterminate,
}

#[derive(Clone, Debug, Serialize)]
pub struct StabilityReport {
    pub id: String,
    pub n: usize,
    pub radius: f64,
    pub verdict: StabilityVerdict,
    pub stable: bool,
    /// Modes k ≥ 1 with vanishing eigenvalue.
    pub kernel_modes: Vec<usize>,
    pub min_positive_gap: f64,
    /// Eigenvalue on constants (k = 0), reported separately and never used
    /// for the verdict, which lives on the mean-zero subspace.
    pub constant_mode_eigenvalue: f64,
}

fn verdict_from_operator(
    op: &OperatorPolynomial,
    n: usize,
    radius: f64,
    k_max: usize,
) -> StabilityReport {
    let lam1 = sphere_lambda(1, n, radius);
    let scale = op
        .q
        .iter()
        .map(|c| c.abs())
        .fold(0.0f64, f64::max)
        .max(1e-300)
        * (1.0 + lam1.powi(op.q.len() as i32));
    let tol = 1e-11 * scale;
    let mut kernel = Vec::new();
    let mut min_pos = f64::INFINITY;
    let mut any_negative = false;
    for k in 1..=k_max {
        let nu = op.eval(sphere_lambda(k, n, radius));
        if nu.abs() <= tol {
            kernel.push(k);
        } else if nu < 0.0 {
            any_negative = true;
        } else {
            min_pos = min_pos.min(nu);
        }
    }
    let verdict = if op.is_zero() {
        StabilityVerdict::Degenerate
    } else if any_negative
        || kernel != vec![1]
        || !op.q_nonnegative_from(2.0 * op.j)
    {
        StabilityVerdict::Unstable
    } else {
        StabilityVerdict::Stable
    };
    StabilityReport {
        id: op.id.clone(),
        n,
        radius,
        verdict,
        stable: verdict == StabilityVerdict::Stable,
        kernel_modes: kernel,
        min_positive_gap: if min_pos.is_finite() { min_pos } else { 0.0 },
        constant_mode_eigenvalue: op.eval(0.0),
    }
}

/// Stability verdict for the round sphere, over mean-zero modes k ≥ 1:
/// stable iff every eigenvalue is nonnegative with zero exactly at k = 1
/// and q(λ) stays nonnegative on [λ1, ∞). Raising `k_max` cannot change
/// the verdict: eigenvalues at λ > λ1 are q(λ)(λ−2J) with λ−2J > 0, and
/// the q sign analysis already covers all λ ≥ λ1 = 2J.
pub fn stability_verdict(
    id: InvariantId,
    n: usize,
    radius: f64,
    k_max: usize,
) -> Result<StabilityReport> {
    let op = einstein_operator(id, n, sphere_j(n, radius))?;
    let mut rep = verdict_from_operator(&op, n, radius, k_max);
    if op.sphere_only && op.is_zero() {
        // W = 0 on the round sphere: the zero operator is genuine there
        rep.verdict = StabilityVerdict::Degenerate;
        rep.stable = false;
    }
    Ok(rep)
}

/// Generic-Einstein verdict: requires q(λ) > 0 for all λ ≥ 2J (empty
/// kernel) since λ1 > 2J away from the round sphere.
pub fn stability_verdict_einstein_generic(
    id: InvariantId,
    n: usize,
    j: f64,
) -> Result<StabilityVerdict> {
    let op = einstein_operator(id, n, j)?;
    if op.sphere_only {
        return Ok(StabilityVerdict::Indeterminate);
    }
    if op.is_zero() {
        return Ok(StabilityVerdict::Degenerate);
    }
    Ok(if op.q_nonnegative_from(2.0 * j) && op.eval_q(2.0 * j) > 0.0 {
        StabilityVerdict::Stable
    } else {
        StabilityVerdict::Unstable
    })
}

/// Cone membership of αQ4 + βσ2.
#[derive(Clone, Debug, Serialize)]
pub struct ConeVerdict {
    pub alpha: f64,
    pub beta: f64,
    pub n: usize,
    pub in_elliptic: bool,
    pub in_variational: bool,
    pub in_strong_variational: bool,
    /// Witness values of the membership inequalities.
    pub v_witness: f64,
    pub sv_witness: f64,
    /// Whether the inequality flags agree with the sphere-spectrum signs.
    pub spectrum_route_agrees: bool,
}

pub fn cone_classify(alpha: f64, beta: f64, n: usize) -> ConeVerdict {
    let nf = n as f64;
    let v_witness = (nf * nf + 2.0 * nf - 4.0) * alpha + (nf - 1.0) * beta;
    let sv_witness = (nf * nf - 4.0) * alpha + (nf - 1.0) * beta;
    let in_elliptic = alpha > 0.0 || (alpha == 0.0 && beta > 0.0);
    let nonzero = alpha != 0.0 || beta != 0.0;
    let in_variational = alpha >= 0.0 && v_witness >= 0.0 && nonzero;
    let in_strong_variational = alpha >= 0.0 && sv_witness > 0.0;

    // cross-check against the spectrum of the combined Einstein operator
    let op = weight4_combination_operator(alpha, beta, n, sphere_j(n, 1.0));
    let rep = verdict_from_operator(&op, n, 1.0, 50);
    let spectrum_route_agrees = rep.stable == in_variational;

    ConeVerdict {
        alpha,
        beta,
        n,
        in_elliptic,
        in_variational,
        in_strong_variational,
        v_witness,
        sv_witness,
        spectrum_route_agrees,
    }
}

/// Membership verdict for the determinant-ratio gradient
/// L_{γ2,γ3} = (γ2+γ3) Q4 − 4 γ3 σ2 at n = 4, checked along both routes.
#[derive(Clone, Debug, Serialize)]
pub struct DetGradientMembership {
    pub gamma2: f64,
    pub gamma3: f64,
    pub cone: ConeVerdict,
    pub direct_in_variational: bool,
    pub direct_in_strong_variational: bool,
    pub routes_agree: bool,
}

pub fn det_gradient_membership(gamma2: f64, gamma3: f64) -> DetGradientMembership {
    let alpha = gamma2 + gamma3;
    let beta = -4.0 * gamma3;
    let cone = cone_classify(alpha, beta, 4);
    let nonzero = gamma2 != 0.0 || gamma3 != 0.0;
    let direct_in_variational =
        5.0 * gamma2 + 2.0 * gamma3 >= 0.0 && gamma2 + gamma3 >= 0.0 && nonzero;
    let direct_in_strong_variational = gamma2 > 0.0 && gamma2 + gamma3 >= 0.0;
    let routes_agree = direct_in_variational == cone.in_variational
        && direct_in_strong_variational == cone.in_strong_variational;
    DetGradientMembership {
        gamma2,
        gamma3,
        cone,
        direct_in_variational,
        direct_in_strong_variational,
        routes_agree,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn j_operator_is_the_plain_factor() {
        let op = einstein_operator(InvariantId::J, 4, 2.0).unwrap();
        assert_eq!(op.q, vec![1.0]);
        assert_eq!(op.eval(4.0), 0.0);
        assert_eq!(op.eval(10.0), 6.0);
    }

    #[test]
    fn q4_operator_at_unit_s4() {
        // (λ + 6)(λ − 4) at n=4, J=2
        let op = einstein_operator(InvariantId::Q4, 4, 2.0).unwrap();
        assert_eq!(op.eval(10.0), 96.0);
        assert_eq!(op.eval(4.0), 0.0);
        assert_eq!(op.eval(0.0), -24.0); // matches −2k·Q4(S⁴) = −4·6 on constants
    }

    #[test]
    fn sigma2_table_example() {
        let table = sphere_spectrum_table(InvariantId::Sigma2, 5, 1.0, 3).unwrap();
        let (_, l2, v2) = table[2];
        assert_eq!(l2, 12.0);
        assert!((v2 - 14.0).abs() < 1e-12);
    }

    #[test]
    fn q6_operator_matches_gjms_route_on_harmonics() {
        // eigenvalue must equal P6(λ) − P6(0)(n+6)/(n−6) for n > 6
        for n in [7usize, 8] {
            let nf = n as f64;
            let j = sphere_j(n, 1.0);
            let op = einstein_operator(InvariantId::Q6, n, j).unwrap();
            let p6 = gjms_operator(3, n, j);
            for k in 1..=6 {
                let l = sphere_lambda(k, n, 1.0);
                let expect = p6.eval_q(l) - p6.eval_q(0.0) * (nf + 6.0) / (nf - 6.0);
                let got = op.eval(l);
                assert!(
                    (got - expect).abs() <= 1e-9 * expect.abs().max(1.0),
                    "n={n} k={k}: {got} vs {expect}"
                );
            }
        }
        // critical dimension: kernel at the first harmonic and value 4320 at k=2
        let op = einstein_operator(InvariantId::Q6, 6, 3.0).unwrap();
        assert!(op.eval(6.0).abs() < 1e-12);
        assert!((op.eval(14.0) - 4320.0).abs() < 1e-9);
    }

    #[test]
    fn stability_examples() {
        assert_eq!(
            stability_verdict(InvariantId::Q4, 4, 1.0, 50).unwrap().verdict,
            StabilityVerdict::Stable
        );
        assert_eq!(
            stability_verdict(InvariantId::K1, 6, 1.0, 50).unwrap().verdict,
            StabilityVerdict::Degenerate
        );
        assert_eq!(
            stability_verdict(InvariantId::V3, 6, 1.0, 50).unwrap().verdict,
            StabilityVerdict::Stable
        );
        let rep = stability_verdict(InvariantId::J, 4, 1.0, 50).unwrap();
        assert_eq!(rep.kernel_modes, vec![1]);
        assert_eq!(
            stability_verdict_einstein_generic(InvariantId::K2, 6, 3.0).unwrap(),
            StabilityVerdict::Indeterminate
        );
    }

    #[test]
    fn cone_examples() {
        let v = cone_classify(1.0, 0.0, 4);
        assert!(v.in_elliptic && v.in_variational && v.in_strong_variational);
        assert!(v.spectrum_route_agrees);

        let v = cone_classify(0.0, 1.0, 4);
        assert!(v.in_elliptic && v.in_variational && v.in_strong_variational);

        // boundary of V at n=5, outside SV
        let n = 5usize;
        let beta = -((n * n + 2 * n - 4) as f64) / (n as f64 - 1.0);
        let v = cone_classify(1.0, beta, n);
        assert!(v.in_variational && !v.in_strong_variational);
        assert!((v.sv_witness - (-(2.0 * n as f64))).abs() < 1e-12);
    }

    #[test]
    fn det_gradient_examples() {
        let m = det_gradient_membership(1.0, 0.0);
        assert!(m.direct_in_strong_variational && m.routes_agree);
        let m = det_gradient_membership(1.0, -0.5);
        assert!(m.direct_in_variational && m.direct_in_strong_variational && m.routes_agree);
        let m = det_gradient_membership(0.0, 1.0);
        assert!(m.direct_in_variational && m.routes_agree);
        assert!(m.cone.in_variational);
    }

    #[test]
    fn q_curvature_sphere_values() {
        assert!((q_curvature_sphere(2, 4) - 6.0).abs() < 1e-12);
        assert!((q_curvature_sphere(3, 6) - 120.0).abs() < 1e-12);
        // noncritical route at (2,6): 2/(n−4) P4(0), J = 3
        let p4 = gjms_operator(2, 6, 3.0);
        assert!((q_curvature_sphere(2, 6) - p4.eval_q(0.0)).abs() < 1e-12);
    }
}
