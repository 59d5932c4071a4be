//! Registry and pointwise evaluation of the scalar invariants in scope:
//! the weight −2, −4, −6 bases and the 17-element Riemannian basis of
//! weight −6.
//!
//! Every evaluator consumes a [`CurvatureFrame`] and returns a jet, so the
//! same code path serves plain values and t-derivatives along metric
//! families.

use crate::geometry::{cotton_schouten_pairing_field, Chart, CurvatureFrame, FrameContext, Tensor};
use crate::jet::Jet;
use crate::{Error, Result};
use serde::Serialize;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize)]
pub enum InvariantId {
    J,
    Sigma2,
    Q4,
    WeylSq,
    V3,
    Q6,
    I1,
    I2,
    K1,
    K2,
    K3,
    L1,
    L2,
    L3,
}

pub const ALL_INVARIANTS: [InvariantId; 14] = [
    InvariantId::J,
    InvariantId::Sigma2,
    InvariantId::Q4,
    InvariantId::WeylSq,
    InvariantId::V3,
    InvariantId::Q6,
    InvariantId::I1,
    InvariantId::I2,
    InvariantId::K1,
    InvariantId::K2,
    InvariantId::K3,
    InvariantId::L1,
    InvariantId::L2,
    InvariantId::L3,
];

impl InvariantId {
    pub fn as_str(&self) -> &'static str {
        match self {
            InvariantId::J => "J",
            InvariantId::Sigma2 => "sigma2",
            InvariantId::Q4 => "Q4",
            InvariantId::WeylSq => "W2",
            InvariantId::V3 => "v3",
            InvariantId::Q6 => "Q6",
            InvariantId::I1 => "I1",
            InvariantId::I2 => "I2",
            InvariantId::K1 => "K1",
            InvariantId::K2 => "K2",
            InvariantId::K3 => "K3",
            InvariantId::L1 => "L1",
            InvariantId::L2 => "L2",
            InvariantId::L3 => "L3",
        }
    }

    pub fn parse(s: &str) -> Result<InvariantId> {
        ALL_INVARIANTS
            .iter()
            .find(|id| id.as_str().eq_ignore_ascii_case(s))
            .copied()
            .ok_or_else(|| Error::UnsupportedId {
                id: s.to_string(),
                why: "not a catalog invariant".into(),
            })
    }
}

/// Registry row for one invariant.
#[derive(Clone, Debug, Serialize)]
pub struct InvariantEntry {
    pub id: InvariantId,
    /// Weight −2k.
    pub weight: i32,
    pub min_dim: usize,
    /// Metric-derivative order the evaluator needs.
    pub metric_order: usize,
    pub is_pointwise_conformal: bool,
    pub constant_at_einstein: bool,
    pub has_einstein_operator_polynomial: bool,
}

impl InvariantEntry {
    pub fn k(&self) -> usize {
        (-self.weight / 2) as usize
    }
}

pub fn catalog() -> &'static [InvariantEntry] {
    use InvariantId::*;
    static TABLE: std::sync::OnceLock<Vec<InvariantEntry>> = std::sync::OnceLock::new();
    TABLE.get_or_init(|| {
        let row = |id,
                   weight,
                   min_dim,
                   metric_order,
                   is_pointwise_conformal,
                   constant_at_einstein,
                   has_einstein_operator_polynomial| InvariantEntry {
            id,
            weight,
            min_dim,
            metric_order,
            is_pointwise_conformal,
            constant_at_einstein,
            has_einstein_operator_polynomial,
        };
        vec![
            row(J, -2, 2, 2, false, true, true),
            row(Sigma2, -4, 4, 2, false, true, true),
            row(Q4, -4, 4, 4, false, true, true),
            row(WeylSq, -4, 4, 2, true, false, false),
            // v3 and Q6 carry explicit 1/(n−4) factors and keep the
            // default weight −6 gate; the rest admit n ≥ 5
            row(V3, -6, 6, 4, false, true, true),
            row(Q6, -6, 6, 6, false, true, true),
            row(I1, -6, 5, 4, false, true, true),
            row(I2, -6, 5, 4, false, true, true),
            row(K1, -6, 5, 4, false, true, true),
            row(K2, -6, 5, 4, false, true, true),
            row(K3, -6, 5, 3, false, false, false),
            row(L1, -6, 5, 2, true, false, false),
            row(L2, -6, 5, 2, true, false, false),
            row(L3, -6, 5, 4, true, false, false),
        ]
    })
}

pub fn entry(id: InvariantId) -> &'static InvariantEntry {
    catalog().iter().find(|e| e.id == id).unwrap()
}

// ---- shared contraction helpers -----------------------------------------

/// |P|² at the given jet order.
pub fn schouten_norm_sq(frame: &CurvatureFrame, order: usize) -> Result<Jet> {
    let p = frame.schouten(order)?;
    frame.norm_sq(&p)
}

pub fn weyl_norm_sq(frame: &CurvatureFrame, order: usize) -> Result<Jet> {
    let w = frame.weyl(order)?;
    frame.norm_sq(&w)
}

pub fn cotton_norm_sq(frame: &CurvatureFrame, order: usize) -> Result<Jet> {
    let c = frame.cotton(order)?;
    frame.norm_sq(&c)
}

/// tr P³ = P_i^s P_s^t P_t^i.
pub fn tr_p3(frame: &CurvatureFrame, order: usize) -> Result<Jet> {
    let n = frame.n();
    let p = frame.schouten(order)?;
    let pud = frame.raise_slot(&p, 1)?; // P_i{}^j
    let shape = frame.shape_at(order)?;
    let mut acc = Jet::constant(&shape, 0.0);
    for i in 0..n {
        for s in 0..n {
            let mut pair = Jet::constant(&shape, 0.0);
            for t in 0..n {
                pair.addmul_assign(pud.get(&[s, t]), pud.get(&[t, i]));
            }
            let mut term = Jet::constant(&shape, 0.0);
            term.addmul_assign(pud.get(&[i, s]), &pair);
            acc.add_assign(&term);
        }
    }
    Ok(acc)
}

/// W·P² = W_ijkl P^ik P^jl.
pub fn w_dot_p2(frame: &CurvatureFrame, order: usize) -> Result<Jet> {
    let n = frame.n();
    let w = frame.weyl(order)?;
    let praised = frame.raise_all(&*frame.schouten(order)?)?;
    let shape = frame.shape_at(order)?;
    let mut acc = Jet::constant(&shape, 0.0);
    for i in 0..n {
        for j in 0..n {
            for k in 0..n {
                let mut inner = Jet::constant(&shape, 0.0);
                for l in 0..n {
                    inner.addmul_assign(w.get(&[i, j, k, l]), praised.get(&[j, l]));
                }
                let mut term = Jet::constant(&shape, 0.0);
                term.addmul_assign(&inner, praised.get(&[i, k]));
                acc.add_assign(&term);
            }
        }
    }
    Ok(acc)
}

/// (W²)_ij = W_istu W_j^stu as an all-lower symmetric tensor.
pub fn w_sq_tensor(frame: &CurvatureFrame, order: usize) -> Result<Tensor> {
    let n = frame.n();
    let w = frame.weyl(order)?;
    let mut wr = frame.raise_slot(&w, 1)?;
    wr = frame.raise_slot(&wr, 2)?;
    wr = frame.raise_slot(&wr, 3)?; // W_j{}^{stu}
    let shape = frame.shape_at(order)?;
    let mut out = Tensor::zeros(&shape, n, 2, vec![false, false]);
    for i in 0..n {
        for j in 0..n {
            let mut acc = Jet::constant(&shape, 0.0);
            for s in 0..n {
                for t in 0..n {
                    for u in 0..n {
                        acc.addmul_assign(w.get(&[i, s, t, u]), wr.get(&[j, s, t, u]));
                    }
                }
            }
            *out.get_mut(&[i, j]) = acc;
        }
    }
    Ok(out)
}

/// ⟨B, P⟩.
pub fn bach_dot_p(frame: &CurvatureFrame, order: usize) -> Result<Jet> {
    let b = frame.bach(order)?;
    let p = frame.schouten(order)?;
    frame.inner(&b, &p)
}

/// L₁ = W_ij^kl W_kl^st W_st^ij.
pub fn l1_scalar(frame: &CurvatureFrame, order: usize) -> Result<Jet> {
    let n = frame.n();
    let w = frame.weyl(order)?;
    let mut a = frame.raise_slot(&w, 2)?;
    a = frame.raise_slot(&a, 3)?; // W_{ij}{}^{kl}
    let shape = frame.shape_at(order)?;
    // M[ij][st] = sum_kl A[ijkl] A[klst]
    let mut m = Tensor::zeros(&shape, n, 4, vec![false; 4]);
    for i in 0..n {
        for j in 0..n {
            for s in 0..n {
                for t in 0..n {
                    let mut acc = Jet::constant(&shape, 0.0);
                    for k in 0..n {
                        for l in 0..n {
                            acc.addmul_assign(a.get(&[i, j, k, l]), a.get(&[k, l, s, t]));
                        }
                    }
                    *m.get_mut(&[i, j, s, t]) = acc;
                }
            }
        }
    }
    let mut acc = Jet::constant(&shape, 0.0);
    for i in 0..n {
        for j in 0..n {
            for s in 0..n {
                for t in 0..n {
                    acc.addmul_assign(m.get(&[i, j, s, t]), a.get(&[s, t, i, j]));
                }
            }
        }
    }
    Ok(acc)
}

/// L₂ = W_i^k_j^l W_k^s_l^t W_s^i_t^j.
pub fn l2_scalar(frame: &CurvatureFrame, order: usize) -> Result<Jet> {
    let n = frame.n();
    let w = frame.weyl(order)?;
    let mut b = frame.raise_slot(&w, 1)?;
    b = frame.raise_slot(&b, 3)?; // stored [i][k][j][l] = W_i{}^k{}_j{}^l
    let shape = frame.shape_at(order)?;
    // M[i][j][s][t] = sum_kl B[i][k][j][l] B[k][s][l][t]
    let mut m = Tensor::zeros(&shape, n, 4, vec![false; 4]);
    for i in 0..n {
        for j in 0..n {
            for s in 0..n {
                for t in 0..n {
                    let mut acc = Jet::constant(&shape, 0.0);
                    for k in 0..n {
                        for l in 0..n {
                            acc.addmul_assign(b.get(&[i, k, j, l]), b.get(&[k, s, l, t]));
                        }
                    }
                    *m.get_mut(&[i, j, s, t]) = acc;
                }
            }
        }
    }
    let mut acc = Jet::constant(&shape, 0.0);
    for i in 0..n {
        for j in 0..n {
            for s in 0..n {
                for t in 0..n {
                    acc.addmul_assign(m.get(&[i, j, s, t]), b.get(&[s, i, t, j]));
                }
            }
        }
    }
    Ok(acc)
}

/// δ(P(∇J)) with the field X_i = P_ij ∇^j J.
pub fn div_p_grad_j(frame: &CurvatureFrame, order: usize) -> Result<Jet> {
    let n = frame.n();
    let p = frame.schouten(order + 1)?;
    let j = frame.j_scalar(order + 2)?;
    let grad = frame.grad(&j); // order+1
    let gradr = frame.raise_slot(&grad, 0)?;
    let shape = frame.shape_at(order + 1)?;
    let mut x = Tensor::zeros(&shape, n, 1, vec![false]);
    for i in 0..n {
        let mut acc = Jet::constant(&shape, 0.0);
        for jj in 0..n {
            acc.addmul_assign(p.get(&[i, jj]), gradr.get(&[jj]));
        }
        *x.get_mut(&[i]) = acc;
    }
    frame.divergence_covector(&x)
}

/// ∇^k (C_skt P^st).
pub fn div_cotton_schouten(frame: &CurvatureFrame, order: usize) -> Result<Jet> {
    let x = cotton_schouten_pairing_field(frame, order + 1)?;
    frame.divergence_covector(&x)
}

/// ∇^l (W_ijkl C^ijk).
pub fn div_weyl_cotton(frame: &CurvatureFrame, order: usize) -> Result<Jet> {
    let n = frame.n();
    let w = frame.weyl(order + 1)?;
    let craised = frame.raise_all(&*frame.cotton(order + 1)?)?;
    let shape = frame.shape_at(order + 1)?;
    let mut y = Tensor::zeros(&shape, n, 1, vec![false]);
    for l in 0..n {
        let mut acc = Jet::constant(&shape, 0.0);
        for i in 0..n {
            for j in 0..n {
                for k in 0..n {
                    acc.addmul_assign(w.get(&[i, j, k, l]), craised.get(&[i, j, k]));
                }
            }
        }
        *y.get_mut(&[l]) = acc;
    }
    frame.divergence_covector(&y)
}

/// ⟨W², P⟩.
pub fn w_sq_dot_p(frame: &CurvatureFrame, order: usize) -> Result<Jet> {
    let w2 = w_sq_tensor(frame, order)?;
    let p = frame.schouten(order)?;
    frame.inner(&w2, &p)
}

// ---- invariant evaluators ------------------------------------------------

fn require_dim(id: InvariantId, n: usize) -> Result<()> {
    let e = entry(id);
    if n < e.min_dim {
        return Err(Error::DimensionTooSmall {
            id: id.as_str().into(),
            n,
            min: e.min_dim,
        });
    }
    Ok(())
}

/// Evaluate an invariant on a prepared frame as a jet of coordinate order
/// `v` (the frame's metric order must be at least the entry's declared
/// order plus `v`).
pub fn eval_on_frame_at(id: InvariantId, frame: &CurvatureFrame, v: usize) -> Result<Jet> {
    require_dim(id, frame.n())?;
    let n = frame.n() as f64;
    match id {
        InvariantId::J => frame.j_scalar(v),
        InvariantId::Sigma2 => {
            let j = frame.j_scalar(v)?;
            let p2 = schouten_norm_sq(frame, v)?;
            Ok(j.mul(&j).sub(&p2).scale(0.5))
        }
        InvariantId::Q4 => {
            let j2 = frame.j_scalar(v + 2)?;
            let lap_j = frame.laplacian(&j2)?;
            let j = j2.truncate(lap_j.shape());
            let p2 = schouten_norm_sq(frame, v)?;
            let mut out = lap_j.neg();
            out.add_scaled(&p2, -2.0);
            out.add_scaled(&j.mul(&j), n / 2.0);
            Ok(out)
        }
        InvariantId::WeylSq => weyl_norm_sq(frame, v),
        InvariantId::V3 => {
            let j = frame.j_scalar(v)?;
            let p2 = schouten_norm_sq(frame, v)?;
            let t3 = tr_p3(frame, v)?;
            let bp = bach_dot_p(frame, v)?;
            let mut out = j.mul(&j).mul(&j).scale(1.0 / 6.0);
            out.add_scaled(&j.mul(&p2), -0.5);
            out.add_scaled(&t3, 1.0 / 3.0);
            out.add_scaled(&bp, 1.0 / (3.0 * (n - 4.0)));
            Ok(out)
        }
        InvariantId::Q6 => {
            let j4 = frame.j_scalar(v + 4)?;
            let lap_j = frame.laplacian(&j4)?; // order 2
            let lap2_j = frame.laplacian(&lap_j)?; // order 0
            let j2 = j4.truncate(lap_j.shape());
            let lap_j2 = frame.laplacian(&j2.mul(&j2))?;
            let p = frame.schouten(v + 2)?;
            let p2_field = frame.norm_sq(&p)?;
            let lap_p2 = frame.laplacian(&p2_field)?;
            let dpj = div_p_grad_j(frame, v)?;
            let j = j4.truncate(lap2_j.shape());
            let p2 = p2_field.truncate(lap2_j.shape());
            let t3 = tr_p3(frame, v)?;
            let bp = bach_dot_p(frame, v)?;
            let j_lap_j = j.mul(&lap_j.truncate(lap2_j.shape()));
            let mut out = lap2_j;
            out.add_scaled(&j_lap_j, -(n - 6.0) / 2.0);
            out.add_scaled(&lap_j2, -(n + 2.0) / 2.0);
            out.add_scaled(&dpj, 8.0);
            out.add_scaled(&lap_p2, 4.0);
            out.add_scaled(&j.mul(&j).mul(&j), (n * n - 4.0) / 4.0);
            out.add_scaled(&j.mul(&p2), -4.0 * n);
            out.add_scaled(&t3, 16.0);
            out.add_scaled(&bp, 16.0 / (n - 4.0));
            Ok(out)
        }
        InvariantId::I1 => {
            let j2 = frame.j_scalar(v + 2)?;
            let lap_j2 = frame.laplacian(&j2.mul(&j2))?;
            let j = j2.truncate(lap_j2.shape());
            let mut out = lap_j2.neg();
            out.add_scaled(&j.mul(&j).mul(&j), (n - 6.0) / 3.0);
            Ok(out)
        }
        InvariantId::I2 => {
            let p = frame.schouten(v + 2)?;
            let p2_field = frame.norm_sq(&p)?;
            let lap_p2 = frame.laplacian(&p2_field)?;
            let dpj = div_p_grad_j(frame, v)?;
            let j2 = frame.j_scalar(v + 2)?;
            let lap_j2 = frame.laplacian(&j2.mul(&j2))?;
            let j = j2.truncate(lap_p2.shape());
            let p2 = p2_field.truncate(lap_p2.shape());
            let mut out = lap_p2.neg();
            out.add_scaled(&dpj, -2.0);
            out.add_scaled(&lap_j2, -1.0);
            out.add_scaled(&j.mul(&p2), n - 6.0);
            Ok(out)
        }
        InvariantId::K1 => {
            let dcp = div_cotton_schouten(frame, v)?;
            let bp = bach_dot_p(frame, v)?;
            let mut out = dcp.scale(3.0 * (n - 4.0));
            out.add_scaled(&bp, n - 6.0);
            Ok(out)
        }
        InvariantId::K2 => {
            let dcp = div_cotton_schouten(frame, v)?;
            let dwc = div_weyl_cotton(frame, v)?;
            let wp2 = w_dot_p2(frame, v)?;
            let mut out = dcp.scale(2.0 * (n - 3.0));
            out.add_assign(&dwc);
            out.add_scaled(&wp2, n - 6.0);
            Ok(out)
        }
        InvariantId::K3 => {
            let w2p = w_sq_dot_p(frame, v)?;
            let w2 = weyl_norm_sq(frame, v)?;
            let j = frame.j_scalar(v)?;
            let c2 = cotton_norm_sq(frame, v)?;
            let mut out = w2p.neg();
            out.add_scaled(&w2.mul(&j), 0.25);
            out.add_scaled(&c2, (n - 4.0) / 2.0);
            Ok(out)
        }
        InvariantId::L1 => l1_scalar(frame, v),
        InvariantId::L2 => l2_scalar(frame, v),
        InvariantId::L3 => {
            let w2_field = weyl_norm_sq(frame, v + 2)?;
            let lap_w2 = frame.laplacian(&w2_field)?;
            let dwc = div_weyl_cotton(frame, v)?;
            let w2p = w_sq_dot_p(frame, v)?;
            let j = frame.j_scalar(v)?;
            let w2 = w2_field.truncate(lap_w2.shape());
            let c2 = cotton_norm_sq(frame, v)?;
            let mut out = lap_w2.scale(-0.5);
            out.add_scaled(&dwc, -2.0 * (n - 10.0));
            out.add_scaled(&w2p, 2.0 * (n - 10.0));
            out.add_scaled(&j.mul(&w2), 2.0);
            out.add_scaled(&c2, -2.0 * (n - 5.0) * (n - 10.0));
            Ok(out)
        }
    }
}

/// Evaluate an invariant on a prepared frame (value jet, order 0).
pub fn eval_on_frame(id: InvariantId, frame: &CurvatureFrame) -> Result<Jet> {
    eval_on_frame_at(id, frame, 0)
}

/// Pointwise value of an invariant on a chart.
pub fn eval_invariant(id: InvariantId, chart: &Chart, point: &[f64]) -> Result<f64> {
    require_dim(id, chart.n)?;
    let ctx = FrameContext::from_chart(chart);
    let frame = ctx.frame(point, entry(id).metric_order)?;
    Ok(eval_on_frame(id, &frame)?.value())
}

// ---- the 17-element Riemannian basis of weight −6 ------------------------

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum RiemBasisId {
    J3,
    JP2,
    TrP3,
    BP,
    NegJLapJ,
    WP2,
    JW2,
    L1,
    L2,
    L3,
    NegLapJ2,
    NegLapP2,
    NegLapW2,
    DivPGradJ,
    DivCP,
    DivWC,
    Lap2J,
}

/// The spec-fixed evaluation order of the weight −6 Riemannian basis.
pub const RIEM_BASIS6: [RiemBasisId; 17] = [
    RiemBasisId::J3,
    RiemBasisId::JP2,
    RiemBasisId::TrP3,
    RiemBasisId::BP,
    RiemBasisId::NegJLapJ,
    RiemBasisId::WP2,
    RiemBasisId::JW2,
    RiemBasisId::L1,
    RiemBasisId::L2,
    RiemBasisId::L3,
    RiemBasisId::NegLapJ2,
    RiemBasisId::NegLapP2,
    RiemBasisId::NegLapW2,
    RiemBasisId::DivPGradJ,
    RiemBasisId::DivCP,
    RiemBasisId::DivWC,
    RiemBasisId::Lap2J,
];

impl RiemBasisId {
    pub fn as_str(&self) -> &'static str {
        match self {
            RiemBasisId::J3 => "J3",
            RiemBasisId::JP2 => "J|P|2",
            RiemBasisId::TrP3 => "trP3",
            RiemBasisId::BP => "<B,P>",
            RiemBasisId::NegJLapJ => "-JLapJ",
            RiemBasisId::WP2 => "W.P2",
            RiemBasisId::JW2 => "J|W|2",
            RiemBasisId::L1 => "L1",
            RiemBasisId::L2 => "L2",
            RiemBasisId::L3 => "L3",
            RiemBasisId::NegLapJ2 => "-LapJ2",
            RiemBasisId::NegLapP2 => "-Lap|P|2",
            RiemBasisId::NegLapW2 => "-Lap|W|2",
            RiemBasisId::DivPGradJ => "div(P gradJ)",
            RiemBasisId::DivCP => "div(CP)",
            RiemBasisId::DivWC => "div(WC)",
            RiemBasisId::Lap2J => "Lap2J",
        }
    }
}

/// Evaluate one basis element on a prepared frame (metric order ≥ 6 for
/// `Lap2J`, ≥ 4 for the other derivative entries).
pub fn eval_basis_on_frame(id: RiemBasisId, frame: &CurvatureFrame) -> Result<Jet> {
    let shape0 = frame.shape_at(0)?;
    match id {
        RiemBasisId::J3 => {
            let j = frame.j_scalar(0)?;
            Ok(j.mul(&j).mul(&j))
        }
        RiemBasisId::JP2 => {
            let j = frame.j_scalar(0)?;
            Ok(j.mul(&schouten_norm_sq(frame, 0)?))
        }
        RiemBasisId::TrP3 => tr_p3(frame, 0),
        RiemBasisId::BP => bach_dot_p(frame, 0),
        RiemBasisId::NegJLapJ => {
            let j2 = frame.j_scalar(2)?;
            let lap_j = frame.laplacian(&j2)?;
            let j = j2.truncate(&shape0);
            Ok(j.mul(&lap_j).neg())
        }
        RiemBasisId::WP2 => w_dot_p2(frame, 0),
        RiemBasisId::JW2 => {
            let j = frame.j_scalar(0)?;
            Ok(j.mul(&weyl_norm_sq(frame, 0)?))
        }
        RiemBasisId::L1 => l1_scalar(frame, 0),
        RiemBasisId::L2 => l2_scalar(frame, 0),
        RiemBasisId::L3 => eval_on_frame(InvariantId::L3, frame),
        RiemBasisId::NegLapJ2 => {
            let j2 = frame.j_scalar(2)?;
            Ok(frame.laplacian(&j2.mul(&j2))?.neg())
        }
        RiemBasisId::NegLapP2 => {
            let p = frame.schouten(2)?;
            Ok(frame.laplacian(&frame.norm_sq(&p)?)?.neg())
        }
        RiemBasisId::NegLapW2 => Ok(frame.laplacian(&weyl_norm_sq(frame, 2)?)?.neg()),
        RiemBasisId::DivPGradJ => div_p_grad_j(frame, 0),
        RiemBasisId::DivCP => div_cotton_schouten(frame, 0),
        RiemBasisId::DivWC => div_weyl_cotton(frame, 0),
        RiemBasisId::Lap2J => {
            let j4 = frame.j_scalar(4)?;
            let lap_j = frame.laplacian(&j4)?;
            frame.laplacian(&lap_j)
        }
    }
}

/// The 17 basis values in the fixed order; n ≥ 5 (the ⟨B,P⟩ entry is
/// dimension-uniform).
pub fn eval_riem_basis6(chart: &Chart, point: &[f64]) -> Result<Vec<f64>> {
    if chart.n < 5 {
        return Err(Error::DimensionTooSmall {
            id: "riem_basis6".into(),
            n: chart.n,
            min: 5,
        });
    }
    let ctx = FrameContext::from_chart(chart);
    let frame = ctx.frame(point, 6)?;
    RIEM_BASIS6
        .iter()
        .map(|id| Ok(eval_basis_on_frame(*id, &frame)?.value()))
        .collect()
}

/// |L(c²g) − c^{−2k} L(g)| / max(1, |L(g)|), maximized over the points.
pub fn homogeneity_check(
    id: InvariantId,
    chart: &Chart,
    c: f64,
    points: &[Vec<f64>],
) -> Result<f64> {
    if c <= 0.0 {
        return Err(Error::Validation("homogeneity scale must be positive".into()));
    }
    let c2 = crate::expr::rational_from_f64(c * c)?;
    let mut scaled = chart.clone();
    scaled.name = format!("{}_scaled", chart.name);
    for row in scaled.metric.iter_mut() {
        for e in row.iter_mut() {
            if !e.is_zero() {
                *e = crate::expr::Expr::mul(crate::expr::Expr::Const(c2), e.clone());
            }
        }
    }
    let k = entry(id).k() as i32;
    let mut worst: f64 = 0.0;
    for p in points {
        let base = eval_invariant(id, chart, p)?;
        let val = eval_invariant(id, &scaled, p)?;
        let expect = c.powi(-2 * k) * base;
        worst = worst.max((val - expect).abs() / base.abs().max(1.0));
    }
    Ok(worst)
}
