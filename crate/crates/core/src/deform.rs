//! First and second variations of invariants and functionals along
//! conformal families e^{2tΥ}g, metric paths g + th, and diffeomorphism
//! pullbacks, plus the weak-form identity residuals built from them.
//!
//! The deformation variable t is adjoined to the jets (order ≤ 2), so all
//! variations are exact in t; no finite differences appear anywhere.

use crate::catalog::{self, entry, InvariantId, RiemBasisId};
use crate::expr::{diff_expr, rational_from_f64, Expr};
use crate::geometry::{Chart, CurvatureFrame, FrameContext, Tensor};
use crate::jet::Jet;
use crate::quad::{build_grid, integrate_multi, neumaier_sum, Grid, Profile};
use crate::{Error, Result};

/// Kind of one-parameter metric family through the base metric.
#[derive(Clone)]
pub enum FamilyKind {
    Conformal(Expr),
    Path(Vec<Vec<Expr>>),
    Lie(Vec<Expr>),
    VolumeNormalizedConformal(Expr),
}

/// A metric family g_t with exact t-jets at t = 0.
pub struct MetricFamily {
    pub base: Chart,
    pub kind: FamilyKind,
    pub t_order: usize,
    ctx: FrameContext,
}

fn t_expr() -> Expr {
    Expr::sym(crate::geometry::T_SYMBOL)
}

fn check_field_symbols(chart: &Chart, e: &Expr) -> Result<()> {
    for s in e.symbols() {
        if chart.coord_index(&s).is_none() && chart.param(&s).is_none() {
            return Err(Error::UnknownSymbol(s));
        }
    }
    Ok(())
}

impl MetricFamily {
    /// e^{2tΥ} g.
    pub fn conformal(base: &Chart, upsilon: &Expr, t_order: usize) -> Result<MetricFamily> {
        check_field_symbols(base, upsilon)?;
        let factor = Expr::exp(Expr::mul(
            Expr::int(2),
            Expr::mul(t_expr(), upsilon.clone()),
        ));
        let mut ctx = FrameContext::from_chart(base);
        ctx.ensure_active(&[upsilon]);
        ctx.t_order = t_order;
        for row in ctx.components.iter_mut() {
            for e in row.iter_mut() {
                if !e.is_zero() {
                    *e = Expr::mul(factor.clone(), e.clone());
                }
            }
        }
        Ok(MetricFamily {
            base: base.clone(),
            kind: FamilyKind::Conformal(upsilon.clone()),
            t_order,
            ctx,
        })
    }

    /// g + t h for a symmetric expression tensor h.
    pub fn path(base: &Chart, h: &[Vec<Expr>], t_order: usize) -> Result<MetricFamily> {
        if h.len() != base.n || h.iter().any(|r| r.len() != base.n) {
            return Err(Error::Validation("h must be n x n".into()));
        }
        for row in h {
            for e in row {
                check_field_symbols(base, e)?;
            }
        }
        let mut ctx = FrameContext::from_chart(base);
        let refs: Vec<&Expr> = h.iter().flatten().collect();
        ctx.ensure_active(&refs);
        ctx.t_order = t_order;
        for i in 0..base.n {
            for j in 0..base.n {
                if !h[i][j].is_zero() {
                    ctx.components[i][j] = Expr::add(
                        ctx.components[i][j].clone(),
                        Expr::mul(t_expr(), h[i][j].clone()),
                    );
                }
            }
        }
        Ok(MetricFamily {
            base: base.clone(),
            kind: FamilyKind::Path(h.to_vec()),
            t_order,
            ctx,
        })
    }

    /// g + t 𝓛_X g, with the Lie derivative formed symbolically in
    /// coordinates: (𝓛_X g)_ij = X^k ∂_k g_ij + g_kj ∂_i X^k + g_ik ∂_j X^k.
    pub fn lie(base: &Chart, x_upper: &[Expr], t_order: usize) -> Result<MetricFamily> {
        if x_upper.len() != base.n {
            return Err(Error::Validation("X must have n components".into()));
        }
        for e in x_upper {
            check_field_symbols(base, e)?;
        }
        let h = lie_derivative_metric(base, x_upper);
        let mut fam = MetricFamily::path(base, &h, t_order)?;
        fam.kind = FamilyKind::Lie(x_upper.to_vec());
        Ok(fam)
    }

    /// Volume-normalized conformal family c(t) e^{2tΥ} g with
    /// c(t) = (V / ∫ e^{ntΥ} dvol)^{2/n}, which pins Vol(g_t) = V exactly
    /// for all t (so the first and second volume derivatives vanish at
    /// t = 0).
    pub fn volume_normalized_conformal(
        base: &Chart,
        upsilon: &Expr,
        profile: Profile,
    ) -> Result<MetricFamily> {
        let mut fam = MetricFamily::conformal(base, upsilon, 2)?;
        let n = base.n as f64;
        // t-jets of M(t) = ∫ e^{ntΥ} dvol: (V, n∫Υ, n²∫Υ²)
        let grid = build_grid(base, profile, &[upsilon])?;
        let base_ctx = {
            let mut c = FrameContext::from_chart(base);
            c.ensure_active(&[upsilon]);
            c
        };
        let moments = integrate_multi(&grid, 3, &mut |p, out| {
            let frame = base_ctx.frame(p, 0)?;
            let sd = frame.sqrt_det(0)?.at(0).value();
            let u = frame.eval_field(upsilon, 0)?.value();
            out[0] = sd;
            out[1] = u * sd;
            out[2] = u * u * sd;
            Ok(())
        })?;
        let v = moments[0];
        let m1 = n * moments[1];
        let m2 = n * n * moments[2];
        // c(t) = (M(t)/V)^{−2/n}: c(0) = 1, c'(0) = −(2/n) m1/V,
        // c''(0) = (2/n)(2/n + 1)(m1/V)² − (2/n) m2/V
        let a = 2.0 / n;
        let c1 = -a * m1 / v;
        let c2 = a * (a + 1.0) * (m1 / v) * (m1 / v) - a * m2 / v;
        fam.ctx.scale_tjet = Some([1.0, c1, c2]);
        fam.kind = FamilyKind::VolumeNormalizedConformal(upsilon.clone());
        Ok(fam)
    }

    pub fn ensure_active(&mut self, exprs: &[&Expr]) {
        self.ctx.ensure_active(exprs);
    }

    pub fn scale_tjet(&self) -> Option<[f64; 3]> {
        self.ctx.scale_tjet
    }

    pub fn frame(&self, point: &[f64], metric_order: usize) -> Result<CurvatureFrame> {
        self.ctx.frame(point, metric_order)
    }
}

/// (𝓛_X g)_ij as symbolic expressions.
pub fn lie_derivative_metric(chart: &Chart, x_upper: &[Expr]) -> Vec<Vec<Expr>> {
    let n = chart.n;
    let mut h = vec![vec![Expr::zero(); n]; n];
    for i in 0..n {
        for j in i..n {
            let mut acc = Expr::zero();
            for k in 0..n {
                acc = Expr::add(
                    acc,
                    Expr::mul(
                        x_upper[k].clone(),
                        diff_expr(&chart.metric[i][j], &chart.coords[k]),
                    ),
                );
                acc = Expr::add(
                    acc,
                    Expr::mul(
                        chart.metric[k][j].clone(),
                        diff_expr(&x_upper[k], &chart.coords[i]),
                    ),
                );
                acc = Expr::add(
                    acc,
                    Expr::mul(
                        chart.metric[i][k].clone(),
                        diff_expr(&x_upper[k], &chart.coords[j]),
                    ),
                );
            }
            h[i][j] = acc.clone();
            h[j][i] = acc;
        }
    }
    h
}

/// Value and first/second t-derivatives of a quantity along a family.
#[derive(Clone, Copy, Debug)]
pub struct DeformationJet {
    pub value: f64,
    pub first: f64,
    pub second: Option<f64>,
}

impl DeformationJet {
    pub fn from_jet(j: &Jet, order: usize) -> Result<DeformationJet> {
        Ok(DeformationJet {
            value: j.value(),
            first: j.t_slice(1)?.value(),
            second: if order >= 2 {
                Some(j.t_slice(2)?.value())
            } else {
                None
            },
        })
    }
}

/// Exact t-derivatives of an invariant at a point along a family.
pub fn d_dt_invariant(
    id: InvariantId,
    family: &MetricFamily,
    point: &[f64],
    order: usize,
) -> Result<DeformationJet> {
    let frame = family.frame(point, entry(id).metric_order)?;
    let jet = catalog::eval_on_frame(id, &frame)?;
    DeformationJet::from_jet(&jet, order)
}

/// Pointwise residual of the identity DL(Υ) = DL[2Υg].
pub fn relate_derivatives_residual(
    id: InvariantId,
    chart: &Chart,
    upsilon: &Expr,
    point: &[f64],
) -> Result<f64> {
    let conformal = MetricFamily::conformal(chart, upsilon, 1)?;
    let two_ug: Vec<Vec<Expr>> = chart
        .metric
        .iter()
        .map(|row| {
            row.iter()
                .map(|g| {
                    if g.is_zero() {
                        Expr::zero()
                    } else {
                        Expr::mul(Expr::int(2), Expr::mul(upsilon.clone(), g.clone()))
                    }
                })
                .collect()
        })
        .collect();
    let path = MetricFamily::path(chart, &two_ug, 1)?;
    let a = d_dt_invariant(id, &conformal, point, 1)?.first;
    let b = d_dt_invariant(id, &path, point, 1)?.first;
    Ok((a - b).abs() / a.abs().max(b.abs()).max(1.0))
}

/// Scalar field value at a point with every symbol bound as a constant.
pub fn eval_value(chart: &Chart, e: &Expr, point: &[f64]) -> Result<f64> {
    let sh = crate::jet::shape(0, 0, 0)?;
    let lookup = |name: &str| -> Option<crate::jet::SymBinding> {
        if let Some(i) = chart.coord_index(name) {
            return Some(crate::jet::SymBinding::Const(point[i]));
        }
        chart.param(name).map(crate::jet::SymBinding::Const)
    };
    Ok(crate::jet::eval_expr_jet(e, &sh, &lookup)?.value())
}

/// dL(X) = X^k ∂_k L at a point, through the first-order invariant jet on
/// the base metric.
pub fn directional_derivative(
    id: InvariantId,
    chart: &Chart,
    x_upper: &[Expr],
    point: &[f64],
) -> Result<f64> {
    let ctx = FrameContext::from_chart(chart);
    let frame = ctx.frame(point, entry(id).metric_order + 1)?;
    let jet = catalog::eval_on_frame_at(id, &frame, 1)?;
    let mut acc = 0.0;
    for (k, xe) in x_upper.iter().enumerate() {
        acc += eval_value(chart, xe, point)? * frame.partial(&jet, k).value();
    }
    Ok(acc)
}

/// Pointwise residual of the naturality identity DL[𝓛_X g] = dL(X).
pub fn diffeo_identity_residual(
    id: InvariantId,
    chart: &Chart,
    x_upper: &[Expr],
    point: &[f64],
) -> Result<f64> {
    let fam = MetricFamily::lie(chart, x_upper, 1)?;
    let lhs = d_dt_invariant(id, &fam, point, 1)?.first;
    let rhs = directional_derivative(id, chart, x_upper, point)?;
    Ok((lhs - rhs).abs() / lhs.abs().max(rhs.abs()).max(1.0))
}

// ---- closed-form linearization comparators --------------------------------

/// Comparator targets with their closed-form first variations.
pub enum ComparatorTarget {
    /// DP_ij(Υ) = −∇²_ij Υ.
    SchoutenConformal(Expr),
    /// DC_ijk(Υ) = W_ij{}^s{}_k Υ_s.
    CottonConformal(Expr),
    /// DB_ij(Υ) = −2Υ B_ij − (n−4) Υ^s (C_isj + C_jsi).
    BachConformal(Expr),
    /// DR(Υ) = −2RΥ − 2(n−1)ΔΥ.
    ScalarConformal(Expr),
    /// DJ(Υ) = −2JΥ − ΔΥ.
    JConformal(Expr),
    /// DR[h] = −⟨Ric, h⟩ + δ²h − Δ tr h.
    ScalarMetric(Vec<Vec<Expr>>),
}

/// ‖jet-computed variation − closed form‖ / scale at a point.
pub fn linearization_comparator(
    target: &ComparatorTarget,
    chart: &Chart,
    point: &[f64],
) -> Result<f64> {
    let n = chart.n;
    match target {
        ComparatorTarget::SchoutenConformal(u) => {
            let fam = MetricFamily::conformal(chart, u, 1)?;
            let frame = fam.frame(point, 4)?;
            let p = frame.schouten(0)?;
            let uj = frame.eval_field(u, 2)?;
            let hess = frame.hessian(&uj)?;
            tensor_residual(
                &p.map(|j| j.t_slice(1).unwrap()),
                &hess.map(|j| j.t_slice(0).unwrap().neg()),
                0.0,
            )
        }
        ComparatorTarget::CottonConformal(u) => {
            let fam = MetricFamily::conformal(chart, u, 1)?;
            let frame = fam.frame(point, 4)?;
            let c = frame.cotton(0)?;
            let w = frame.weyl(0)?;
            let uj = frame.eval_field(u, 1)?;
            let gradr = frame.raise_slot(&frame.grad(&uj), 0)?;
            let shape = frame.shape_at(0)?;
            let mut rhs = Tensor::zeros(&shape, n, 3, vec![false; 3]);
            for i in 0..n {
                for j in 0..n {
                    for k in 0..n {
                        let mut acc = Jet::constant(&shape, 0.0);
                        for s in 0..n {
                            acc.addmul_assign(w.get(&[i, j, s, k]), gradr.get(&[s]));
                        }
                        *rhs.get_mut(&[i, j, k]) = acc;
                    }
                }
            }
            let floor = comparator_floor(&frame, &uj.truncate(&frame.shape_at(1)?))?;
            tensor_residual(
                &c.map(|j| j.t_slice(1).unwrap()),
                &rhs.map(|j| j.t_slice(0).unwrap()),
                floor,
            )
        }
        ComparatorTarget::BachConformal(u) => {
            let fam = MetricFamily::conformal(chart, u, 1)?;
            let frame = fam.frame(point, 5)?;
            let b = frame.bach(0)?;
            let c = frame.cotton(0)?;
            let uj = frame.eval_field(u, 1)?;
            let u0 = uj.truncate(&frame.shape_at(0)?);
            let gradr = frame.raise_slot(&frame.grad(&uj), 0)?;
            let shape = frame.shape_at(0)?;
            let mut rhs = Tensor::zeros(&shape, n, 2, vec![false; 2]);
            for i in 0..n {
                for j in 0..n {
                    let mut acc = Jet::constant(&shape, 0.0);
                    acc.addmul_assign(&u0, b.get(&[i, j]));
                    let mut acc = acc.scale(-2.0);
                    for s in 0..n {
                        let mut csum = c.get(&[i, s, j]).clone();
                        csum.add_assign(c.get(&[j, s, i]));
                        let mut term = Jet::constant(&shape, 0.0);
                        term.addmul_assign(gradr.get(&[s]), &csum);
                        acc.add_scaled(&term, -(n as f64 - 4.0));
                    }
                    *rhs.get_mut(&[i, j]) = acc;
                }
            }
            let floor = comparator_floor(&frame, &uj)?;
            // Bach is second order in curvature; square the floor scale
            tensor_residual(
                &b.map(|j| j.t_slice(1).unwrap()),
                &rhs.map(|j| j.t_slice(0).unwrap()),
                floor * (1.0 + floor),
            )
        }
        ComparatorTarget::ScalarConformal(u) => {
            let fam = MetricFamily::conformal(chart, u, 1)?;
            let frame = fam.frame(point, 4)?;
            let r = frame.scalar_curvature(0)?;
            let uj = frame.eval_field(u, 2)?;
            let lap_u = frame.laplacian(&uj)?;
            let lhs = r.t_slice(1)?.value();
            let rhs = -2.0 * r.t_slice(0)?.value() * uj.t_slice(0)?.value()
                - 2.0 * (n as f64 - 1.0) * lap_u.t_slice(0)?.value();
            Ok((lhs - rhs).abs() / lhs.abs().max(rhs.abs()).max(1.0))
        }
        ComparatorTarget::JConformal(u) => {
            let fam = MetricFamily::conformal(chart, u, 1)?;
            let frame = fam.frame(point, 4)?;
            let j = frame.j_scalar(0)?;
            let uj = frame.eval_field(u, 2)?;
            let lap_u = frame.laplacian(&uj)?;
            let lhs = j.t_slice(1)?.value();
            let rhs = -2.0 * j.t_slice(0)?.value() * uj.t_slice(0)?.value()
                - lap_u.t_slice(0)?.value();
            Ok((lhs - rhs).abs() / lhs.abs().max(rhs.abs()).max(1.0))
        }
        ComparatorTarget::ScalarMetric(h) => {
            let fam = MetricFamily::path(chart, h, 1)?;
            let frame = fam.frame(point, 4)?;
            let lhs = frame.scalar_curvature(0)?.t_slice(1)?.value();
            let rhs = scalar_metric_linearization(&frame, h)?;
            Ok((lhs - rhs).abs() / lhs.abs().max(rhs.abs()).max(1.0))
        }
    }
}

/// −⟨Ric, h⟩ + δ²h − Δ tr h evaluated on the base metric (the frame may
/// carry a deformation variable; only t-slices at 0 are used).
fn scalar_metric_linearization(frame: &CurvatureFrame, h: &[Vec<Expr>]) -> Result<f64> {
    let n = frame.n();
    let shape2 = frame.shape_at(2)?;
    let mut ht = Tensor::zeros(&shape2, n, 2, vec![false, false]);
    for i in 0..n {
        for j in 0..n {
            *ht.get_mut(&[i, j]) = frame.eval_field(&h[i][j], 2)?;
        }
    }
    let ric = frame.ricci(0)?;
    let ric_h = frame.inner(&ric, &ht.truncate(&frame.shape_at(0)?))?;
    let ginv2 = frame.inv_metric(2)?;
    let mut tr_h = Jet::constant(&shape2, 0.0);
    for i in 0..n {
        for j in 0..n {
            tr_h.addmul_assign(ginv2.get(&[i, j]), ht.get(&[i, j]));
        }
    }
    let lap_tr = frame.laplacian(&tr_h)?;
    let dh = frame.cov_deriv(&ht)?;
    let ddh = frame.cov_deriv(&dh)?;
    let ginv0 = frame.inv_metric(0)?;
    let shape0 = frame.shape_at(0)?;
    let mut div2 = Jet::constant(&shape0, 0.0);
    for c in 0..n {
        for d in 0..n {
            for i in 0..n {
                for j in 0..n {
                    let mut term = Jet::constant(&shape0, 0.0);
                    term.addmul_assign(ginv0.get(&[c, i]), ddh.get(&[d, c, i, j]));
                    let mut term2 = Jet::constant(&shape0, 0.0);
                    term2.addmul_assign(ginv0.get(&[d, j]), &term);
                    div2.add_assign(&term2);
                }
            }
        }
    }
    Ok(-ric_h.t_slice(0)?.value() + div2.t_slice(0)?.value() - lap_tr.t_slice(0)?.value())
}

fn tensor_residual(lhs: &Tensor, rhs: &Tensor, floor: f64) -> Result<f64> {
    let mut max_diff = 0.0f64;
    let mut scale = floor.max(1e-12);
    for i in 0..lhs.len() {
        let (a, b) = (lhs.at(i).value(), rhs.at(i).value());
        max_diff = max_diff.max((a - b).abs());
        scale = scale.max(a.abs()).max(b.abs());
    }
    Ok(max_diff / scale)
}

/// Curvature-times-field scale floor for comparators whose two sides can
/// vanish identically (e.g. Cotton and Bach variations on conformally
/// flat charts): the roundoff in both sides is proportional to this.
fn comparator_floor(frame: &CurvatureFrame, u: &Jet) -> Result<f64> {
    let rm = frame.riemann(0)?.max_abs_value();
    let grad = frame.grad(u);
    let mut u_scale = u.value().abs();
    for c in 0..frame.n() {
        u_scale = u_scale.max(grad.at(c).value().abs());
    }
    Ok(rm * (1.0 + u_scale))
}

// ---- integrated identities -------------------------------------------------

/// Mean of a field with respect to dvol.
pub fn field_mean(chart: &Chart, profile: Profile, e: &Expr) -> Result<f64> {
    let grid = build_grid(chart, profile, &[e])?;
    let mut ctx = FrameContext::from_chart(chart);
    ctx.ensure_active(&[e]);
    let vals = integrate_multi(&grid, 2, &mut |p, out| {
        let frame = ctx.frame(p, 0)?;
        let sd = frame.sqrt_det(0)?.at(0).value();
        out[0] = sd;
        out[1] = frame.eval_field(e, 0)?.value() * sd;
        Ok(())
    })?;
    Ok(vals[1] / vals[0])
}

/// All pairings ∫ Υ_a DL(Υ_b) dvol, sharing one family frame per (node,
/// Υ_b). Returns the matrix and an L¹ scale for residual normalization.
pub fn self_adjointness_matrix(
    id: InvariantId,
    chart: &Chart,
    upsilons: &[Expr],
    profile: Profile,
) -> Result<(Vec<Vec<f64>>, f64)> {
    let m = upsilons.len();
    let refs: Vec<&Expr> = upsilons.iter().collect();
    let grid = build_grid(chart, profile, &refs)?;
    let order = entry(id).metric_order;
    let mut fams = Vec::with_capacity(m);
    for u in upsilons {
        let mut fam = MetricFamily::conformal(chart, u, 1)?;
        fam.ensure_active(&refs);
        fams.push(fam);
    }
    let k = m * m + 1;
    let vals = integrate_multi(&grid, k, &mut |p, out| {
        let mut dl = vec![0.0; m];
        let mut uv = vec![0.0; m];
        let mut sd = 0.0;
        for (b, fam) in fams.iter().enumerate() {
            let f = fam.frame(p, order)?;
            dl[b] = catalog::eval_on_frame(id, &f)?.t_slice(1)?.value();
            if b == 0 {
                sd = f.sqrt_det(0)?.at(0).t_slice(0)?.value();
                for (a, u) in upsilons.iter().enumerate() {
                    uv[a] = f.eval_field(u, 0)?.t_slice(0)?.value();
                }
            }
        }
        for a in 0..m {
            for b in 0..m {
                out[a * m + b] = uv[a] * dl[b] * sd;
            }
        }
        out[m * m] = uv
            .iter()
            .zip(dl.iter())
            .map(|(u, d)| (u * d).abs())
            .fold(0.0, f64::max)
            * sd;
        Ok(())
    })?;
    let mut mat = vec![vec![0.0; m]; m];
    for a in 0..m {
        for b in 0..m {
            mat[a][b] = vals[a * m + b];
        }
    }
    Ok((mat, vals[m * m]))
}

/// |∫Υ1 DL(Υ2) − ∫Υ2 DL(Υ1)| / scale over a closed chart.
pub fn self_adjointness_residual(
    id: InvariantId,
    chart: &Chart,
    ups1: &Expr,
    ups2: &Expr,
    profile: Profile,
) -> Result<f64> {
    let (mat, scale) =
        self_adjointness_matrix(id, chart, &[ups1.clone(), ups2.clone()], profile)?;
    let (i12, i21) = (mat[0][1], mat[1][0]);
    Ok((i12 - i21).abs() / i12.abs().max(i21.abs()).max(scale).max(1e-14))
}

pub struct GradientCheck {
    pub lhs: f64,
    pub rhs: f64,
    pub residual: f64,
}

fn gradient_residual(lhs: f64, rhs: f64, scale: f64) -> GradientCheck {
    GradientCheck {
        lhs,
        rhs,
        residual: (lhs - rhs).abs() / lhs.abs().max(rhs.abs()).max(scale).max(1e-14),
    }
}

/// d/dt ∫ L(g_t) dvol_{g_t} against (n−2k) ∫ L Υ dvol.
pub fn conformal_gradient_residual(
    id: InvariantId,
    chart: &Chart,
    upsilon: &Expr,
    profile: Profile,
) -> Result<GradientCheck> {
    let fam = MetricFamily::conformal(chart, upsilon, 1)?;
    let grid = build_grid(chart, profile, &[upsilon])?;
    let order = entry(id).metric_order;
    let k = entry(id).k() as f64;
    let n = chart.n as f64;
    let vals = integrate_multi(&grid, 3, &mut |p, out| {
        let f = fam.frame(p, order)?;
        let l = catalog::eval_on_frame(id, &f)?;
        let sd = f.sqrt_det(0)?.at(0).clone();
        let u = f.eval_field(upsilon, 0)?.t_slice(0)?.value();
        out[0] = l.mul(&sd).t_slice(1)?.value();
        let l0 = l.t_slice(0)?.value();
        out[1] = l0 * u * sd.t_slice(0)?.value();
        out[2] = (l0 * u).abs() * sd.t_slice(0)?.value();
        Ok(())
    })?;
    Ok(gradient_residual(vals[0], (n - 2.0 * k) * vals[1], vals[2]))
}

/// Conformal gradient G_b of a weight −6 basis integral ∫ b dvol, per the
/// stated formulas (as a pointwise field on the frame).
pub fn weight6_gradient_field(basis: RiemBasisId, frame: &CurvatureFrame) -> Result<Jet> {
    use RiemBasisId::*;
    let n = frame.n() as f64;
    let b = |id| catalog::eval_basis_on_frame(id, frame);
    match basis {
        J3 => {
            // −3ΔJ² + (n−6)J³
            let mut out = b(NegLapJ2)?.scale(3.0);
            out.add_scaled(&b(J3)?, n - 6.0);
            Ok(out)
        }
        JP2 => {
            // −Δ|P|² − 2δ(P∇J) − ΔJ² + (n−6)J|P|²
            let mut out = b(NegLapP2)?;
            out.add_scaled(&b(DivPGradJ)?, -2.0);
            out.add_assign(&b(NegLapJ2)?);
            out.add_scaled(&b(JP2)?, n - 6.0);
            Ok(out)
        }
        TrP3 => {
            // −3δ(P∇J) − (3/2)Δ|P|² − 3∇^k(C_skt P^st) + (n−6)trP³
            let mut out = b(DivPGradJ)?.scale(-3.0);
            out.add_scaled(&b(NegLapP2)?, 1.5);
            out.add_scaled(&b(DivCP)?, -3.0);
            out.add_scaled(&b(TrP3)?, n - 6.0);
            Ok(out)
        }
        NegJLapJ => {
            // 2Δ²J + ((n−2)/2)ΔJ² − (n−6)JΔJ
            let mut out = b(Lap2J)?.scale(2.0);
            out.add_scaled(&b(NegLapJ2)?, -(n - 2.0) / 2.0);
            out.add_scaled(&b(NegJLapJ)?, n - 6.0);
            Ok(out)
        }
        BP => {
            // 3(n−4)∇^k(C_skt P^st) + (n−6)⟨B,P⟩
            let mut out = b(DivCP)?.scale(3.0 * (n - 4.0));
            out.add_scaled(&b(BP)?, n - 6.0);
            Ok(out)
        }
        WP2 => {
            // 2(n−3)∇^k(C_skt P^st) + ∇^l(W_ijkl C^ijk) + (n−6)W·P²
            let mut out = b(DivCP)?.scale(2.0 * (n - 3.0));
            out.add_assign(&b(DivWC)?);
            out.add_scaled(&b(WP2)?, n - 6.0);
            Ok(out)
        }
        JW2 => {
            // −Δ|W|² + (n−6)J|W|²
            let mut out = b(NegLapW2)?;
            out.add_scaled(&b(JW2)?, n - 6.0);
            Ok(out)
        }
        other => Err(Error::UnsupportedId {
            id: other.as_str().into(),
            why: "no stated conformal gradient (divergence or pointwise conformal entry)".into(),
        }),
    }
}

/// d/dt ∫ b(g_t) dvol_{g_t} against ∫ G_b Υ dvol for a weight −6 basis id.
pub fn weight6_gradient_residual(
    basis: RiemBasisId,
    chart: &Chart,
    upsilon: &Expr,
    profile: Profile,
) -> Result<GradientCheck> {
    let fam = MetricFamily::conformal(chart, upsilon, 1)?;
    let grid = build_grid(chart, profile, &[upsilon])?;
    let vals = integrate_multi(&grid, 3, &mut |p, out| {
        let f = fam.frame(p, 6)?;
        let bjet = catalog::eval_basis_on_frame(basis, &f)?;
        let g = weight6_gradient_field(basis, &f)?;
        let sd = f.sqrt_det(0)?.at(0).clone();
        let u = f.eval_field(upsilon, 0)?.t_slice(0)?.value();
        out[0] = bjet.mul(&sd).t_slice(1)?.value();
        let g0 = g.t_slice(0)?.value();
        out[1] = g0 * u * sd.t_slice(0)?.value();
        out[2] = (g0 * u).abs() * sd.t_slice(0)?.value();
        Ok(())
    })?;
    Ok(gradient_residual(vals[0], vals[1], vals[2]))
}

/// dvol-weighted mean and standard deviation of an invariant over the
/// quadrature nodes. Volume weighting keeps coordinate-degenerate regions
/// (sphere poles, where the inverse metric is ill-conditioned) from
/// dominating the constancy verdict beyond their measure.
pub fn constant_invariant_stats(
    id: InvariantId,
    chart: &Chart,
    profile: Profile,
) -> Result<(f64, f64)> {
    let grid = build_grid(chart, profile, &[])?;
    let ctx = FrameContext::from_chart(chart);
    let order = entry(id).metric_order;
    let mut vals = Vec::with_capacity(grid.points.len());
    let mut wts = Vec::with_capacity(grid.points.len());
    for (p, w) in grid.points.iter().zip(grid.weights.iter()) {
        let frame = ctx.frame(p, order)?;
        let sd = frame.sqrt_det(0)?.at(0).value();
        vals.push(catalog::eval_on_frame(id, &frame)?.value());
        wts.push(w * sd);
    }
    let wsum = neumaier_sum(wts.iter().copied());
    let mean = neumaier_sum(vals.iter().zip(wts.iter()).map(|(v, w)| v * w)) / wsum;
    let var = neumaier_sum(
        vals.iter()
            .zip(wts.iter())
            .map(|(v, w)| w * (v - mean) * (v - mean)),
    ) / wsum;
    Ok((mean, var.max(0.0).sqrt()))
}

pub struct SecondVariation {
    pub d2s: f64,
    pub pairing: f64,
    pub residual: f64,
}

/// D²𝒮(Υ) along the volume-normalized conformal family against
/// ∫ Υ0 DL(Υ0) dvol, with Υ0 the mean-zero part of Υ. Requires the base
/// invariant to be constant. 𝒮 is the standard conformal primitive:
/// (n−2k)⁻¹ ∫ L dvol away from the critical dimension, and the
/// s-parameter primitive at n = 2k.
pub fn second_variation_residual(
    id: InvariantId,
    chart: &Chart,
    upsilon: &Expr,
    profile: Profile,
) -> Result<SecondVariation> {
    let (mean_l, sd_l) = constant_invariant_stats(id, chart, profile)?;
    if sd_l > 1e-8 * mean_l.abs().max(1.0) {
        return Err(Error::NonconstantInvariant(id.as_str().into(), sd_l));
    }
    let n = chart.n;
    let k = entry(id).k();
    // quantize the mean to a dyadic grid so the shift stays an exact
    // rational; the leftover mean (≤ 2⁻⁴⁹) is far below the tolerances
    let um = (field_mean(chart, profile, upsilon)? * (1u64 << 48) as f64).round()
        / (1u64 << 48) as f64;
    let ups0 = Expr::sub(upsilon.clone(), Expr::Const(rational_from_f64(um)?));

    let fam = MetricFamily::volume_normalized_conformal(chart, &ups0, profile)?;
    let grid = build_grid(chart, profile, &[&ups0])?;
    let order = entry(id).metric_order;
    let d2s = if n != 2 * k {
        let vals = integrate_multi(&grid, 1, &mut |p, out| {
            let f = fam.frame(p, order)?;
            let l = catalog::eval_on_frame(id, &f)?;
            let sd = f.sqrt_det(0)?.at(0).clone();
            out[0] = l.mul(&sd).t_slice(2)?.value();
            Ok(())
        })?;
        vals[0] / (n as f64 - 2.0 * k as f64)
    } else {
        critical_primitive_second_derivative(id, chart, &ups0, &fam, profile)?
    };
    // the normalized family's first-order tangent is exactly 2Υ0 g (the
    // scale factor's first derivative vanishes for mean-zero Υ0), so its
    // first t-slice equals DL(Υ0)
    let vals = integrate_multi(&grid, 2, &mut |p, out| {
        let f = fam.frame(p, order)?;
        let l = catalog::eval_on_frame(id, &f)?;
        let sd = f.sqrt_det(0)?.at(0).t_slice(0)?.value();
        let u = f.eval_field(&ups0, 0)?.t_slice(0)?.value();
        let dl = l.t_slice(1)?.value();
        out[0] = u * dl * sd;
        out[1] = (u * dl).abs() * sd;
        Ok(())
    })?;
    let pairing = vals[0];
    let residual = (d2s - pairing).abs() / d2s.abs().max(pairing.abs()).max(vals[1]).max(1e-14);
    Ok(SecondVariation {
        d2s,
        pairing,
        residual,
    })
}

/// Standard conformal primitive at the critical dimension n = 2k:
/// 𝒮(e^{2u}g0) = ∫_0^1 ∫ u L(e^{2su}g0) dvol_{e^{2su}g0} ds by
/// Gauss–Legendre quadrature in s.
pub fn critical_primitive(
    id: InvariantId,
    chart: &Chart,
    u: &Expr,
    profile: Profile,
    s_nodes: usize,
) -> Result<f64> {
    let e = entry(id);
    if chart.n != 2 * e.k() {
        return Err(Error::Validation(format!(
            "critical primitive needs n = 2k, got n = {} for {}",
            chart.n,
            id.as_str()
        )));
    }
    let (sx, sw) = crate::quad::gauss_legendre(s_nodes);
    let mut total = Vec::with_capacity(s_nodes);
    for (s_raw, w_raw) in sx.iter().zip(sw.iter()) {
        let s = 0.5 * (s_raw + 1.0);
        let w = 0.5 * w_raw;
        let su = Expr::mul(Expr::Const(rational_from_f64(s)?), u.clone());
        let scaled = crate::models::conformal_perturb(chart, &su)?;
        let mut ctx = FrameContext::from_chart(&scaled);
        ctx.ensure_active(&[u]);
        let grid = build_grid(&scaled, profile, &[u])?;
        let vals = integrate_multi(&grid, 1, &mut |p, out| {
            let f = ctx.frame(p, e.metric_order)?;
            out[0] = f.eval_field(u, 0)?.value()
                * catalog::eval_on_frame(id, &f)?.value()
                * f.sqrt_det(0)?.at(0).value();
            Ok(())
        })?;
        total.push(w * vals[0]);
    }
    Ok(neumaier_sum(total))
}

/// First-order gradient check of the critical primitive: d/dt of
/// 𝒮(e^{2(u+tv)}g0) at t = 0 against ∫ v L(e^{2u}g0) dvol_{e^{2u}g0}.
pub fn critical_primitive_gradient_residual(
    id: InvariantId,
    chart: &Chart,
    u: &Expr,
    v: &Expr,
    profile: Profile,
    s_nodes: usize,
) -> Result<GradientCheck> {
    let e = entry(id);
    if chart.n != 2 * e.k() {
        return Err(Error::Validation("critical primitive needs n = 2k".into()));
    }
    let (sx, sw) = crate::quad::gauss_legendre(s_nodes);
    let mut lhs_terms = Vec::new();
    for (s_raw, w_raw) in sx.iter().zip(sw.iter()) {
        let s = 0.5 * (s_raw + 1.0);
        let w = 0.5 * w_raw;
        let su = Expr::mul(Expr::Const(rational_from_f64(s)?), u.clone());
        let scaled = crate::models::conformal_perturb(chart, &su)?;
        let sv = Expr::mul(Expr::Const(rational_from_f64(s)?), v.clone());
        let mut fam = MetricFamily::conformal(&scaled, &sv, 1)?;
        fam.ensure_active(&[u, v]);
        let grid = build_grid(&scaled, profile, &[u, v])?;
        let vals = integrate_multi(&grid, 1, &mut |p, out| {
            let f = fam.frame(p, e.metric_order)?;
            let l = catalog::eval_on_frame(id, &f)?;
            let sd = f.sqrt_det(0)?.at(0).clone();
            let uj = f.eval_field(u, 0)?;
            let vj = f.eval_field(v, 0)?;
            // the integrand factor u + t v
            let ut = uj.add(&vj.mul(&Jet::t_var(vj.shape())));
            out[0] = ut.mul(&l).mul(&sd).t_slice(1)?.value();
            Ok(())
        })?;
        lhs_terms.push(w * vals[0]);
    }
    let lhs = neumaier_sum(lhs_terms);

    let perturbed = crate::models::conformal_perturb(chart, u)?;
    let mut ctx = FrameContext::from_chart(&perturbed);
    ctx.ensure_active(&[u, v]);
    let grid = build_grid(&perturbed, profile, &[u, v])?;
    let vals = integrate_multi(&grid, 2, &mut |p, out| {
        let f = ctx.frame(p, e.metric_order)?;
        let l = catalog::eval_on_frame(id, &f)?.value();
        let sd = f.sqrt_det(0)?.at(0).value();
        let vv = f.eval_field(v, 0)?.value();
        out[0] = vv * l * sd;
        out[1] = (vv * l).abs() * sd;
        Ok(())
    })?;
    Ok(gradient_residual(lhs, vals[0], vals[1]))
}

/// d²/dt² of the critical-dimension primitive along the volume-normalized
/// family, whose exponent is u_t = tΥ0 + φ(t) with the constant φ(t)
/// recovered from the family's scale jet c(t) = e^{2φ(t)}.
fn critical_primitive_second_derivative(
    id: InvariantId,
    chart: &Chart,
    ups0: &Expr,
    fam: &MetricFamily,
    profile: Profile,
) -> Result<f64> {
    let e = entry(id);
    let scale = fam.scale_tjet().unwrap_or([1.0, 0.0, 0.0]);
    let phi1 = scale[1] / 2.0;
    let phi2 = (scale[2] - scale[1] * scale[1]) / 2.0;
    let (sx, sw) = crate::quad::gauss_legendre(8);
    let mut terms = Vec::new();
    for (s_raw, w_raw) in sx.iter().zip(sw.iter()) {
        let s = 0.5 * (s_raw + 1.0);
        let w = 0.5 * w_raw;
        // metric e^{2 s u_t} g0 = e^{2 s t Υ0} e^{2 s φ(t)} g0
        let sut = Expr::mul(
            Expr::Const(rational_from_f64(s)?),
            Expr::mul(t_expr(), ups0.clone()),
        );
        let mut ctx = FrameContext::from_chart(chart);
        ctx.ensure_active(&[ups0]);
        ctx.t_order = 2;
        let factor = Expr::exp(Expr::mul(Expr::int(2), sut));
        for row in ctx.components.iter_mut() {
            for comp in row.iter_mut() {
                if !comp.is_zero() {
                    *comp = Expr::mul(factor.clone(), comp.clone());
                }
            }
        }
        let a1 = 2.0 * s * phi1;
        let a2 = 2.0 * s * phi2;
        ctx.scale_tjet = Some([1.0, a1, a2 + a1 * a1]);
        let grid = build_grid(chart, profile, &[ups0])?;
        let vals = integrate_multi(&grid, 1, &mut |p, out| {
            let f = ctx.frame(p, e.metric_order)?;
            let l = catalog::eval_on_frame(id, &f)?;
            let sd = f.sqrt_det(0)?.at(0).clone();
            let uj = f.eval_field(ups0, 0)?;
            // u_t = t Υ0 + φ(t)
            let mut ut = uj.mul(&Jet::t_var(uj.shape()));
            let phi = Jet::constant(ut.shape(), 1.0).mul_tjet(&[0.0, phi1, phi2]);
            ut.add_assign(&phi);
            out[0] = ut.mul(&l).mul(&sd).t_slice(2)?.value();
            Ok(())
        })?;
        terms.push(w * vals[0]);
    }
    Ok(neumaier_sum(terms))
}

pub struct GammaPairing {
    pub trace_residual: f64,
    pub divergence_residual: f64,
    pub gamma_star_residual: Option<f64>,
}

/// Weak-form pairing tests: (a) the trace route ∫ f DL(u)/2 = ∫ f DL[ug],
/// (b) the divergence route ∫ f DL[𝓛_X g] = ∫ f dL(X), and — when a
/// metric direction h is supplied — (c) the closed-form Γ* duality for the
/// scalar curvature, ∫⟨Γ*(f), h⟩ = ∫ f DR[h].
pub fn gamma_pairing_residuals(
    id: InvariantId,
    chart: &Chart,
    f_e: &Expr,
    u_e: &Expr,
    x_upper: &[Expr],
    h: Option<&[Vec<Expr>]>,
    profile: Profile,
) -> Result<GammaPairing> {
    let order = entry(id).metric_order;
    let mut extra: Vec<&Expr> = vec![f_e, u_e];
    extra.extend(x_upper.iter());
    if let Some(h) = h {
        extra.extend(h.iter().flatten());
    }
    let grid = build_grid(chart, profile, &extra)?;

    // (a) trace route
    let mut fam_conf = MetricFamily::conformal(chart, u_e, 1)?;
    fam_conf.ensure_active(&extra);
    let ug: Vec<Vec<Expr>> = chart
        .metric
        .iter()
        .map(|row| {
            row.iter()
                .map(|g| {
                    if g.is_zero() {
                        Expr::zero()
                    } else {
                        Expr::mul(u_e.clone(), g.clone())
                    }
                })
                .collect()
        })
        .collect();
    let mut fam_ug = MetricFamily::path(chart, &ug, 1)?;
    fam_ug.ensure_active(&extra);
    let vals = integrate_multi(&grid, 3, &mut |p, out| {
        let f1 = fam_conf.frame(p, order)?;
        let dl_u = catalog::eval_on_frame(id, &f1)?.t_slice(1)?.value();
        let sd = f1.sqrt_det(0)?.at(0).t_slice(0)?.value();
        let fv = f1.eval_field(f_e, 0)?.t_slice(0)?.value();
        let f2 = fam_ug.frame(p, order)?;
        let dl_ug = catalog::eval_on_frame(id, &f2)?.t_slice(1)?.value();
        out[0] = fv * dl_u * sd / 2.0;
        out[1] = fv * dl_ug * sd;
        out[2] = (fv * dl_u / 2.0).abs() * sd;
        Ok(())
    })?;
    let trace_residual =
        (vals[0] - vals[1]).abs() / vals[0].abs().max(vals[1].abs()).max(vals[2]).max(1e-14);

    // (b) divergence route
    let mut fam_lie = MetricFamily::lie(chart, x_upper, 1)?;
    fam_lie.ensure_active(&extra);
    let mut base_ctx = FrameContext::from_chart(chart);
    base_ctx.ensure_active(&extra);
    let vals = integrate_multi(&grid, 3, &mut |p, out| {
        let f1 = fam_lie.frame(p, order)?;
        let dl_lie = catalog::eval_on_frame(id, &f1)?.t_slice(1)?.value();
        let sd = f1.sqrt_det(0)?.at(0).t_slice(0)?.value();
        let fv = f1.eval_field(f_e, 0)?.t_slice(0)?.value();
        let bf = base_ctx.frame(p, order + 1)?;
        let ljet = catalog::eval_on_frame_at(id, &bf, 1)?;
        let mut dlx = 0.0;
        for (kk, xe) in x_upper.iter().enumerate() {
            dlx += eval_value(chart, xe, p)? * bf.partial(&ljet, kk).value();
        }
        out[0] = fv * dl_lie * sd;
        out[1] = fv * dlx * sd;
        out[2] = (fv * dl_lie).abs() * sd;
        Ok(())
    })?;
    let divergence_residual =
        (vals[0] - vals[1]).abs() / vals[0].abs().max(vals[1].abs()).max(vals[2]).max(1e-14);

    let gamma_star_residual = match h {
        Some(h) => Some(gamma_star_r_residual(chart, f_e, h, &grid)?),
        None => None,
    };
    Ok(GammaPairing {
        trace_residual,
        divergence_residual,
        gamma_star_residual,
    })
}

/// ∫⟨Γ*(f), h⟩ − ∫ f DR[h] with the closed-form adjoint for the scalar
/// curvature, Γ*(f) = −f Ric + ∇²f − Δf g.
pub fn gamma_star_r_residual(
    chart: &Chart,
    f_e: &Expr,
    h: &[Vec<Expr>],
    grid: &Grid,
) -> Result<f64> {
    let n = chart.n;
    let mut refs: Vec<&Expr> = vec![f_e];
    refs.extend(h.iter().flatten());
    let mut fam = MetricFamily::path(chart, h, 1)?;
    fam.ensure_active(&refs);
    let mut base_ctx = FrameContext::from_chart(chart);
    base_ctx.ensure_active(&refs);
    let vals = integrate_multi(grid, 3, &mut |p, out| {
        let ff = fam.frame(p, 4)?;
        let dr_h = ff.scalar_curvature(0)?.t_slice(1)?.value();
        let sd = ff.sqrt_det(0)?.at(0).t_slice(0)?.value();
        let fv = ff.eval_field(f_e, 0)?.t_slice(0)?.value();

        let bf = base_ctx.frame(p, 4)?;
        let fjet = bf.eval_field(f_e, 2)?;
        let hess = bf.hessian(&fjet)?;
        let lap = bf.laplacian(&fjet)?;
        let ric = bf.ricci(0)?;
        let g = bf.metric(0)?;
        let f0 = fjet.truncate(&bf.shape_at(0)?);
        let shape0 = bf.shape_at(0)?;
        let mut gamma_star = Tensor::zeros(&shape0, n, 2, vec![false, false]);
        for i in 0..n {
            for j in 0..n {
                let mut v = hess.get(&[i, j]).clone();
                v.submul_assign(&f0, ric.get(&[i, j]));
                v.submul_assign(&lap, g.get(&[i, j]));
                *gamma_star.get_mut(&[i, j]) = v;
            }
        }
        let mut ht = Tensor::zeros(&shape0, n, 2, vec![false, false]);
        for i in 0..n {
            for j in 0..n {
                *ht.get_mut(&[i, j]) = bf.eval_field(&h[i][j], 0)?;
            }
        }
        let pair = bf.inner(&gamma_star, &ht)?.value();
        out[0] = pair * sd;
        out[1] = fv * dr_h * sd;
        out[2] = pair.abs() * sd;
        Ok(())
    })?;
    Ok((vals[0] - vals[1]).abs() / vals[0].abs().max(vals[1].abs()).max(vals[2]).max(1e-14))
}

#[derive(Debug, Clone, serde::Serialize)]
pub struct AlmostSchur {
    pub lhs: f64,
    pub rhs: f64,
    pub ric_min: f64,
    pub ratio: f64,
    pub pass: bool,
}

/// Almost-Schur inequality for L = R (S = Ric, k = 1):
/// ∫(R − R̄)² ≤ 4n(n−1)/(n−2)² ∫|Ric − (R/n)g|², with Ric ≥ floor ≥ 0
/// required at every quadrature node.
pub fn almost_schur_check(
    chart: &Chart,
    ricci_floor: f64,
    profile: Profile,
) -> Result<AlmostSchur> {
    if chart.n < 3 {
        return Err(Error::DimensionTooSmall {
            id: "almost_schur".into(),
            n: chart.n,
            min: 3,
        });
    }
    if ricci_floor < 0.0 {
        return Err(Error::Validation("ricci floor must be nonnegative".into()));
    }
    let n = chart.n;
    let nf = n as f64;
    let ctx = FrameContext::from_chart(chart);
    let grid = build_grid(chart, profile, &[])?;
    let mut ric_min = f64::INFINITY;
    let vals = integrate_multi(&grid, 4, &mut |p, out| {
        let f = ctx.frame(p, 2)?;
        let sd = f.sqrt_det(0)?.at(0).value();
        let r = f.scalar_curvature(0)?.value();
        let ric = f.ricci(0)?;
        let g = f.metric(0)?;
        // minimum Ricci eigenvalue relative to g via Cholesky reduction
        let gm = nalgebra::DMatrix::from_fn(n, n, |i, j| g.get(&[i, j]).value());
        let rm = nalgebra::DMatrix::from_fn(n, n, |i, j| ric.get(&[i, j]).value());
        let chol = gm
            .cholesky()
            .ok_or_else(|| Error::SingularMetric("in almost-Schur floor".into()))?;
        let li = chol
            .l()
            .try_inverse()
            .ok_or_else(|| Error::SingularMetric("in almost-Schur floor".into()))?;
        let sym = &li * rm * li.transpose();
        let min_eig = sym
            .symmetric_eigenvalues()
            .iter()
            .cloned()
            .fold(f64::INFINITY, f64::min);
        ric_min = ric_min.min(min_eig);

        let ginv = f.inv_metric(0)?;
        let mut s0sq = 0.0;
        for i in 0..n {
            for j in 0..n {
                let s0ij = ric.get(&[i, j]).value() - r / nf * g.get(&[i, j]).value();
                for a in 0..n {
                    for b in 0..n {
                        let s0ab = ric.get(&[a, b]).value() - r / nf * g.get(&[a, b]).value();
                        s0sq +=
                            s0ij * s0ab * ginv.get(&[i, a]).value() * ginv.get(&[j, b]).value();
                    }
                }
            }
        }
        out[0] = sd;
        out[1] = r * sd;
        out[2] = r * r * sd;
        out[3] = s0sq * sd;
        Ok(())
    })?;
    if ric_min < ricci_floor {
        return Err(Error::PositivityViolation(format!(
            "minimum Ricci eigenvalue {ric_min:.4e} below floor {ricci_floor:.1e}"
        )));
    }
    let (vol, ir, ir2, is0) = (vals[0], vals[1], vals[2], vals[3]);
    let lhs = ir2 - ir * ir / vol;
    let rhs = 4.0 * nf * (nf - 1.0) / ((nf - 2.0) * (nf - 2.0)) * is0;
    Ok(AlmostSchur {
        lhs,
        rhs,
        ric_min,
        ratio: if rhs.abs() > 1e-300 { lhs / rhs } else { 1.0 },
        pass: lhs <= rhs * (1.0 + 1e-8) + 1e-12 * ir2.abs().max(1.0),
    })
}
