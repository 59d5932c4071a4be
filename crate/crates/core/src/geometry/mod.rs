//! Coordinate charts and exact pointwise curvature.

mod chart;
mod frame;
mod tensor;

pub use chart::{AxisQuad, Chart, QuadScheme};
pub use frame::{CurvatureFrame, FrameContext, FrameEnv, T_SYMBOL};
pub use tensor::Tensor;

use crate::expr::Expr;
use crate::{Error, Result};

/// Intrinsic metric order of the deepest tensor a frame can deliver at
/// this dimension (Bach for n ≥ 4, Cotton for n = 3, Riemann for n = 2).
pub fn deepest_intrinsic_order(n: usize) -> usize {
    match n {
        0..=2 => 2,
        3 => 3,
        _ => 4,
    }
}

/// Build a frame able to deliver all curvature tensors together with
/// covariant derivatives up to `deriv_order`.
pub fn curvature_frame(chart: &Chart, point: &[f64], deriv_order: usize) -> Result<CurvatureFrame> {
    let metric_order = deriv_order + deepest_intrinsic_order(chart.n);
    let ctx = FrameContext::from_chart(chart);
    ctx.frame(point, metric_order)
}

/// Selector for the divergence operation.
pub enum DivergenceSelector {
    /// ∇^k W_ijkl (rank 3; equals (n−3) C_ijl).
    Weyl,
    /// ∇^k B_jk (rank 1; equals −(n−4) C_sjt P^st).
    Bach,
    /// δ of the pairing field X_s = C_skt P^st (scalar).
    CottonSchoutenPairing,
    /// δ of the gradient of a user scalar field (its Laplacian).
    Scalar(Expr),
}

/// Contracted covariant derivative with the δω = tr ∇ω convention.
pub fn divergence(
    chart: &Chart,
    point: &[f64],
    selector: &DivergenceSelector,
) -> Result<Tensor> {
    let mut ctx = FrameContext::from_chart(chart);
    if let DivergenceSelector::Scalar(e) = selector {
        ctx.ensure_active(&[e]);
    }
    match selector {
        DivergenceSelector::Weyl => {
            let frame = ctx.frame(point, 5)?;
            let n = frame.n();
            let w = frame.weyl(1)?;
            let dw = frame.cov_deriv(&w)?; // (∇W)_{c,ijkl}
            let ginv = frame.inv_metric(0)?;
            let shape = frame.shape_at(0)?;
            let mut out = Tensor::zeros(&shape, n, 3, vec![false; 3]);
            for i in 0..n {
                for j in 0..n {
                    for l in 0..n {
                        let mut acc = crate::jet::Jet::constant(&shape, 0.0);
                        for c in 0..n {
                            for k in 0..n {
                                acc.addmul_assign(ginv.get(&[c, k]), dw.get(&[c, i, j, k, l]));
                            }
                        }
                        *out.get_mut(&[i, j, l]) = acc;
                    }
                }
            }
            Ok(out)
        }
        DivergenceSelector::Bach => {
            let frame = ctx.frame(point, 6)?;
            let n = frame.n();
            let b = frame.bach(1)?;
            let db = frame.cov_deriv(&b)?; // (∇B)_{c,jk}
            let ginv = frame.inv_metric(0)?;
            let shape = frame.shape_at(0)?;
            let mut out = Tensor::zeros(&shape, n, 1, vec![false]);
            for j in 0..n {
                let mut acc = crate::jet::Jet::constant(&shape, 0.0);
                for c in 0..n {
                    for k in 0..n {
                        acc.addmul_assign(ginv.get(&[c, k]), db.get(&[c, j, k]));
                    }
                }
                *out.get_mut(&[j]) = acc;
            }
            Ok(out)
        }
        DivergenceSelector::CottonSchoutenPairing => {
            let frame = ctx.frame(point, 5)?;
            let x = cotton_schouten_pairing_field(&frame, 1)?;
            let div = frame.divergence_covector(&x)?;
            Ok(Tensor::scalar(div))
        }
        DivergenceSelector::Scalar(e) => {
            let frame = ctx.frame(point, 2)?;
            let f = frame.eval_field(e, 2)?;
            Ok(Tensor::scalar(frame.laplacian(&f)?))
        }
    }
}

/// V_k = C_skt P^st as a covariant 1-tensor at the given jet order (the
/// free slot is the middle index of the Cotton tensor).
pub fn cotton_schouten_pairing_field(frame: &CurvatureFrame, order: usize) -> Result<Tensor> {
    let n = frame.n();
    let c = frame.cotton(order)?;
    let praised = frame.raise_all(&*frame.schouten(order)?)?;
    let shape = frame.shape_at(order)?;
    let mut x = Tensor::zeros(&shape, n, 1, vec![false]);
    for k in 0..n {
        let mut acc = crate::jet::Jet::constant(&shape, 0.0);
        for s in 0..n {
            for t in 0..n {
                acc.addmul_assign(c.get(&[s, k, t]), praised.get(&[s, t]));
            }
        }
        *x.get_mut(&[k]) = acc;
    }
    Ok(x)
}

/// Residual of the cyclic ∇W identity
/// ∇_m W_ijkl + ∇_i W_jmkl + ∇_j W_mikl
///    = C_imk g_jl + C_mjk g_il + C_jik g_ml − C_iml g_jk − C_mjl g_ik − C_jil g_mk,
/// as max-norm of (LHS − RHS) divided by the curvature scale
/// max(‖∇W‖, ‖C‖, ‖Rm‖). Normalizing by ‖Rm‖ keeps the residual honest on
/// conformally flat charts, where both sides vanish identically but are
/// computed through Rm-sized intermediate quantities.
pub fn weyl_bianchi_residual(chart: &Chart, point: &[f64]) -> Result<f64> {
    if chart.n < 4 {
        return Err(Error::DimensionTooSmall {
            id: "weyl_bianchi".into(),
            n: chart.n,
            min: 4,
        });
    }
    let ctx = FrameContext::from_chart(chart);
    let frame = ctx.frame(point, 5)?;
    let n = frame.n();
    let w = frame.weyl(1)?;
    let dw = frame.cov_deriv(&w)?;
    let c = frame.cotton(0)?;
    let g = frame.metric(0)?;
    let mut max_diff = 0.0f64;
    let mut scale = 1e-300f64;
    for m in 0..n {
        for i in 0..n {
            for j in 0..n {
                for k in 0..n {
                    for l in 0..n {
                        let lhs = dw.get(&[m, i, j, k, l]).value()
                            + dw.get(&[i, j, m, k, l]).value()
                            + dw.get(&[j, m, i, k, l]).value();
                        let rhs = c.get(&[i, m, k]).value() * g.get(&[j, l]).value()
                            + c.get(&[m, j, k]).value() * g.get(&[i, l]).value()
                            + c.get(&[j, i, k]).value() * g.get(&[m, l]).value()
                            - c.get(&[i, m, l]).value() * g.get(&[j, k]).value()
                            - c.get(&[m, j, l]).value() * g.get(&[i, k]).value()
                            - c.get(&[j, i, l]).value() * g.get(&[m, k]).value();
                        max_diff = max_diff.max((lhs - rhs).abs());
                        scale = scale.max(lhs.abs()).max(rhs.abs());
                    }
                }
            }
        }
    }
    let rm_scale = frame.riemann(0)?.max_abs_value();
    let dw_scale = dw
        .max_abs_value()
        .max(c.max_abs_value())
        .max(scale)
        .max(rm_scale);
    Ok(max_diff / dw_scale.max(1e-12))
}
