//! Pointwise curvature frames computed from metric jets.
//!
//! A frame owns the metric jets at one point (optionally with the
//! deformation variable adjoined) and derives curvature tensors on demand,
//! each at the jet order its consumer asks for. Derived tensors are
//! memoized per (tensor, order); recomputing at a higher order replaces the
//! cached entry and lower orders become truncations.

use super::chart::Chart;
use super::tensor::Tensor;
use crate::expr::Expr;
use crate::jet::{self, Jet, JetShape, SymBinding};
use crate::{Error, Result};
use std::cell::RefCell;
use std::collections::HashMap;
use std::rc::Rc;
use std::sync::Arc;

/// Reserved name for the deformation variable in family metric expressions.
pub const T_SYMBOL: &str = "t";

#[derive(Clone, Copy, PartialEq, Eq, Hash, Debug)]
enum Kind {
    G,
    Ginv,
    SqrtDet,
    GammaFirst,
    Gamma,
    RiemMixed,
    RiemLower,
    Ricci,
    ScalarR,
    JScalar,
    Schouten,
    Cotton,
    Weyl,
    Bach,
}

/// Everything needed to evaluate metric components and auxiliary fields as
/// jets at a point.
#[derive(Clone)]
pub struct FrameContext {
    pub n: usize,
    pub coord_names: Vec<String>,
    pub params: Vec<(String, f64)>,
    pub components: Vec<Vec<Expr>>,
    /// Constant-in-x multiplier applied to every metric component,
    /// given as t-derivative values [c, c', c''] at t = 0.
    pub scale_tjet: Option<[f64; 3]>,
    /// Indices of coordinates treated as jet variables.
    pub active: Vec<usize>,
    pub t_order: usize,
}

impl FrameContext {
    pub fn from_chart(chart: &Chart) -> FrameContext {
        FrameContext {
            n: chart.n,
            coord_names: chart.coords.clone(),
            params: chart.params.clone(),
            components: chart.metric.clone(),
            scale_tjet: None,
            active: chart.active_coords(),
            t_order: 0,
        }
    }

    /// Extend the active coordinate set with every chart coordinate
    /// referenced by `exprs`.
    pub fn ensure_active(&mut self, exprs: &[&Expr]) {
        for e in exprs {
            for s in e.symbols() {
                if let Some(i) = self.coord_names.iter().position(|c| *c == s) {
                    if !self.active.contains(&i) {
                        self.active.push(i);
                    }
                }
            }
        }
        self.active.sort_unstable();
    }

    pub fn frame(&self, point: &[f64], metric_order: usize) -> Result<CurvatureFrame> {
        assert_eq!(point.len(), self.n);
        let shape = jet::shape(self.active.len(), metric_order, self.t_order)?;
        let env = Rc::new(FrameEnv {
            ctx: self.clone(),
            point: point.to_vec(),
            slot_of: {
                let mut m = vec![None; self.n];
                for (slot, &ci) in self.active.iter().enumerate() {
                    m[ci] = Some(slot);
                }
                m
            },
        });
        let mut g = Tensor::zeros(&shape, self.n, 2, vec![false, false]);
        for i in 0..self.n {
            for j in i..self.n {
                let mut jet = env.eval(&self.components[i][j], &shape)?;
                if let Some(c) = &self.scale_tjet {
                    jet = jet.mul_tjet(c);
                }
                *g.get_mut(&[i, j]) = jet.clone();
                if i != j {
                    *g.get_mut(&[j, i]) = jet;
                }
            }
        }
        let frame = CurvatureFrame {
            env,
            g_order: metric_order,
            cache: RefCell::new(HashMap::new()),
            highest: RefCell::new(HashMap::new()),
        };
        frame.install(Kind::G, metric_order, Rc::new(g));
        Ok(frame)
    }
}

pub struct FrameEnv {
    pub ctx: FrameContext,
    pub point: Vec<f64>,
    slot_of: Vec<Option<usize>>,
}

impl FrameEnv {
    fn binding(&self, name: &str) -> Option<SymBinding> {
        if name == T_SYMBOL {
            return Some(if self.ctx.t_order > 0 {
                SymBinding::TVar
            } else {
                SymBinding::Const(0.0)
            });
        }
        if let Some(i) = self.ctx.coord_names.iter().position(|c| c == name) {
            return Some(match self.slot_of[i] {
                Some(slot) => SymBinding::Coord(slot, self.point[i]),
                None => SymBinding::Const(self.point[i]),
            });
        }
        self.ctx
            .params
            .iter()
            .find(|(p, _)| p == name)
            .map(|(_, v)| SymBinding::Const(*v))
    }

    pub fn eval(&self, e: &Expr, shape: &Arc<JetShape>) -> Result<Jet> {
        // refuse silently-constant coordinates: fields must be activated
        for s in e.symbols() {
            if s == T_SYMBOL {
                continue;
            }
            if let Some(i) = self.ctx.coord_names.iter().position(|c| *c == s) {
                if self.slot_of[i].is_none() {
                    return Err(Error::Validation(format!(
                        "field references coordinate `{s}` outside the active set"
                    )));
                }
            }
        }
        jet::eval_expr_jet(e, shape, &|name| self.binding(name))
    }
}

pub struct CurvatureFrame {
    env: Rc<FrameEnv>,
    g_order: usize,
    cache: RefCell<HashMap<(Kind, usize), Rc<Tensor>>>,
    highest: RefCell<HashMap<Kind, usize>>,
}

impl CurvatureFrame {
    pub fn n(&self) -> usize {
        self.env.ctx.n
    }

    pub fn point(&self) -> &[f64] {
        &self.env.point
    }

    pub fn env(&self) -> &Rc<FrameEnv> {
        &self.env
    }

    pub fn metric_order(&self) -> usize {
        self.g_order
    }

    pub fn t_order(&self) -> usize {
        self.env.ctx.t_order
    }

    pub fn shape_at(&self, order: usize) -> Result<Arc<JetShape>> {
        jet::shape(self.env.ctx.active.len(), order, self.env.ctx.t_order)
    }

    /// Evaluate an auxiliary expression field at the frame's point.
    pub fn eval_field(&self, e: &Expr, order: usize) -> Result<Jet> {
        let shape = self.shape_at(order)?;
        self.env.eval(e, &shape)
    }

    fn install(&self, kind: Kind, order: usize, t: Rc<Tensor>) {
        self.cache.borrow_mut().insert((kind, order), t);
        let mut h = self.highest.borrow_mut();
        let e = h.entry(kind).or_insert(order);
        if *e < order {
            *e = order;
        }
    }

    fn cached(
        &self,
        kind: Kind,
        order: usize,
        build: &dyn Fn(&CurvatureFrame, usize) -> Result<Tensor>,
    ) -> Result<Rc<Tensor>> {
        if let Some(t) = self.cache.borrow().get(&(kind, order)) {
            return Ok(t.clone());
        }
        let have = self.highest.borrow().get(&kind).copied();
        if let Some(h) = have {
            if h >= order {
                let src = self.cache.borrow().get(&(kind, h)).unwrap().clone();
                let target = self.shape_at(order)?;
                let t = Rc::new(src.truncate(&target));
                self.cache.borrow_mut().insert((kind, order), t.clone());
                return Ok(t);
            }
        }
        let built = Rc::new(build(self, order)?);
        self.install(kind, order, built.clone());
        Ok(built)
    }

    /// Partial derivative of a jet along chart coordinate `ci` (zero when
    /// the coordinate is outside the active set).
    pub fn partial(&self, j: &Jet, ci: usize) -> Jet {
        match self.env.slot_of[ci] {
            Some(slot) => j.dx(slot),
            None => {
                let shape = jet::shape(
                    self.env.ctx.active.len(),
                    j.shape().order - 1,
                    j.shape().t_order,
                )
                .expect("derivative shape");
                Jet::constant(&shape, 0.0)
            }
        }
    }

    pub fn metric(&self, order: usize) -> Result<Rc<Tensor>> {
        if order > self.g_order {
            return Err(Error::OrderOverflow {
                requested: order,
                cap: self.g_order,
            });
        }
        self.cached(Kind::G, order, &|_, _| unreachable!("metric is installed"))
    }

    pub fn inv_metric(&self, order: usize) -> Result<Rc<Tensor>> {
        self.cached(Kind::Ginv, order, &|f, p| {
            let g = f.metric(p)?;
            invert_jet_matrix(&g)
        })
    }

    pub fn sqrt_det(&self, order: usize) -> Result<Rc<Tensor>> {
        self.cached(Kind::SqrtDet, order, &|f, p| {
            let g = f.metric(p)?;
            let det = det_jet_matrix(&g)?;
            Ok(Tensor::scalar(det.sqrt()?))
        })
    }

    fn christoffel_first(&self, order: usize) -> Result<Rc<Tensor>> {
        self.cached(Kind::GammaFirst, order, &|f, p| {
            let n = f.n();
            let g = f.metric(p + 1)?;
            let shape = f.shape_at(p)?;
            let mut out = Tensor::zeros(&shape, n, 3, vec![false; 3]);
            for k in 0..n {
                for i in 0..n {
                    for j in i..n {
                        let mut v = f.partial(g.get(&[k, j]), i);
                        v.add_assign(&f.partial(g.get(&[k, i]), j));
                        let dk = f.partial(g.get(&[i, j]), k);
                        v = v.sub(&dk).scale(0.5);
                        *out.get_mut(&[k, i, j]) = v.clone();
                        if i != j {
                            *out.get_mut(&[k, j, i]) = v;
                        }
                    }
                }
            }
            Ok(out)
        })
    }

    /// Christoffel symbols of the second kind, stored [k][i][j] with the
    /// first slot contravariant.
    pub fn christoffel(&self, order: usize) -> Result<Rc<Tensor>> {
        self.cached(Kind::Gamma, order, &|f, p| {
            let n = f.n();
            let first = f.christoffel_first(p)?;
            let ginv = f.inv_metric(p)?;
            let shape = f.shape_at(p)?;
            let mut out = Tensor::zeros(&shape, n, 3, vec![true, false, false]);
            for k in 0..n {
                for i in 0..n {
                    for j in i..n {
                        let mut acc = Jet::constant(&shape, 0.0);
                        for l in 0..n {
                            acc.addmul_assign(ginv.get(&[k, l]), first.get(&[l, i, j]));
                        }
                        *out.get_mut(&[k, i, j]) = acc.clone();
                        if i != j {
                            *out.get_mut(&[k, j, i]) = acc;
                        }
                    }
                }
            }
            Ok(out)
        })
    }

    /// Riemann tensor R_ij^k_s (third slot contravariant), with the sign
    /// convention (∇_i∇_j − ∇_j∇_i)X^k = R_ij^k_s X^s.
    pub fn riemann_mixed(&self, order: usize) -> Result<Rc<Tensor>> {
        self.cached(Kind::RiemMixed, order, &|f, p| {
            let n = f.n();
            let gamma_hi = f.christoffel(p + 1)?;
            let gamma = f.christoffel(p)?;
            let shape = f.shape_at(p)?;
            let mut out = Tensor::zeros(&shape, n, 4, vec![false, false, true, false]);
            for i in 0..n {
                for j in 0..i {
                    for k in 0..n {
                        for s in 0..n {
                            let mut v = f.partial(gamma_hi.get(&[k, j, s]), i);
                            v = v.sub(&f.partial(gamma_hi.get(&[k, i, s]), j));
                            for m in 0..n {
                                v.addmul_assign(gamma.get(&[k, i, m]), gamma.get(&[m, j, s]));
                                v.submul_assign(gamma.get(&[k, j, m]), gamma.get(&[m, i, s]));
                            }
                            *out.get_mut(&[i, j, k, s]) = v.clone();
                            *out.get_mut(&[j, i, k, s]) = v.neg();
                        }
                    }
                }
            }
            Ok(out)
        })
    }

    /// All-lower Riemann tensor R_ijkl = g_km R_ij^m_l.
    pub fn riemann(&self, order: usize) -> Result<Rc<Tensor>> {
        self.cached(Kind::RiemLower, order, &|f, p| {
            let n = f.n();
            let mixed = f.riemann_mixed(p)?;
            let g = f.metric(p)?;
            let shape = f.shape_at(p)?;
            let mut out = Tensor::zeros(&shape, n, 4, vec![false; 4]);
            for i in 0..n {
                for j in 0..n {
                    for k in 0..n {
                        for l in 0..n {
                            let mut acc = Jet::constant(&shape, 0.0);
                            for m in 0..n {
                                acc.addmul_assign(g.get(&[k, m]), mixed.get(&[i, j, m, l]));
                            }
                            *out.get_mut(&[i, j, k, l]) = acc;
                        }
                    }
                }
            }
            Ok(out)
        })
    }

    /// Ricci tensor Ric_js = R_ij^i_s, computed directly from Christoffel
    /// symbols (avoids materializing the full Riemann tensor).
    pub fn ricci(&self, order: usize) -> Result<Rc<Tensor>> {
        self.cached(Kind::Ricci, order, &|f, p| {
            let n = f.n();
            let gamma_hi = f.christoffel(p + 1)?;
            let gamma = f.christoffel(p)?;
            let shape = f.shape_at(p)?;
            let mut out = Tensor::zeros(&shape, n, 2, vec![false, false]);
            for j in 0..n {
                for s in j..n {
                    let mut v = Jet::constant(&shape, 0.0);
                    for i in 0..n {
                        v.add_assign(&f.partial(gamma_hi.get(&[i, j, s]), i));
                        v = v.sub(&f.partial(gamma_hi.get(&[i, i, s]), j));
                        for m in 0..n {
                            v.addmul_assign(gamma.get(&[i, i, m]), gamma.get(&[m, j, s]));
                            v.submul_assign(gamma.get(&[i, j, m]), gamma.get(&[m, i, s]));
                        }
                    }
                    *out.get_mut(&[j, s]) = v.clone();
                    if j != s {
                        *out.get_mut(&[s, j]) = v;
                    }
                }
            }
            Ok(out)
        })
    }

    pub fn scalar_curvature(&self, order: usize) -> Result<Jet> {
        let t = self.cached(Kind::ScalarR, order, &|f, p| {
            let n = f.n();
            let ric = f.ricci(p)?;
            let ginv = f.inv_metric(p)?;
            let shape = f.shape_at(p)?;
            let mut acc = Jet::constant(&shape, 0.0);
            for j in 0..n {
                for s in 0..n {
                    acc.addmul_assign(ginv.get(&[j, s]), ric.get(&[j, s]));
                }
            }
            Ok(Tensor::scalar(acc))
        })?;
        Ok(t.at(0).clone())
    }

    /// J = R / (2(n−1)), the trace of the Schouten tensor.
    pub fn j_scalar(&self, order: usize) -> Result<Jet> {
        let t = self.cached(Kind::JScalar, order, &|f, p| {
            let r = f.scalar_curvature(p)?;
            Ok(Tensor::scalar(
                r.scale(1.0 / (2.0 * (f.n() as f64 - 1.0))),
            ))
        })?;
        Ok(t.at(0).clone())
    }

    /// Schouten tensor P_ij = (Ric_ij − J g_ij)/(n−2); requires n ≥ 3.
    pub fn schouten(&self, order: usize) -> Result<Rc<Tensor>> {
        if self.n() < 3 {
            return Err(Error::DimensionTooSmall {
                id: "schouten".into(),
                n: self.n(),
                min: 3,
            });
        }
        self.cached(Kind::Schouten, order, &|f, p| {
            let n = f.n();
            let ric = f.ricci(p)?;
            let g = f.metric(p)?;
            let j = f.j_scalar(p)?;
            let shape = f.shape_at(p)?;
            let inv = 1.0 / (n as f64 - 2.0);
            let mut out = Tensor::zeros(&shape, n, 2, vec![false, false]);
            for a in 0..n {
                for b in 0..n {
                    let mut v = ric.get(&[a, b]).clone();
                    v.submul_assign(&j, g.get(&[a, b]));
                    *out.get_mut(&[a, b]) = v.scale(inv);
                }
            }
            Ok(out)
        })
    }

    /// Cotton tensor C_ijk = ∇_i P_jk − ∇_j P_ik.
    pub fn cotton(&self, order: usize) -> Result<Rc<Tensor>> {
        self.cached(Kind::Cotton, order, &|f, p| {
            let n = f.n();
            let dp = f.cov_deriv(&*f.schouten(p + 1)?)?;
            let shape = f.shape_at(p)?;
            let mut out = Tensor::zeros(&shape, n, 3, vec![false; 3]);
            for i in 0..n {
                for j in 0..n {
                    for k in 0..n {
                        *out.get_mut(&[i, j, k]) = dp.get(&[i, j, k]).sub(dp.get(&[j, i, k]));
                    }
                }
            }
            Ok(out)
        })
    }

    /// Weyl tensor W_ijkl = R_ijkl − P_ik g_jl − P_jl g_ik + P_il g_jk + P_jk g_il.
    pub fn weyl(&self, order: usize) -> Result<Rc<Tensor>> {
        self.cached(Kind::Weyl, order, &|f, p| {
            let n = f.n();
            let rm = f.riemann(p)?;
            let pt = f.schouten(p)?;
            let g = f.metric(p)?;
            let shape = f.shape_at(p)?;
            let mut out = Tensor::zeros(&shape, n, 4, vec![false; 4]);
            for i in 0..n {
                for j in 0..n {
                    for k in 0..n {
                        for l in 0..n {
                            let mut v = rm.get(&[i, j, k, l]).clone();
                            v.submul_assign(pt.get(&[i, k]), g.get(&[j, l]));
                            v.submul_assign(pt.get(&[j, l]), g.get(&[i, k]));
                            v.addmul_assign(pt.get(&[i, l]), g.get(&[j, k]));
                            v.addmul_assign(pt.get(&[j, k]), g.get(&[i, l]));
                            *out.get_mut(&[i, j, k, l]) = v;
                        }
                    }
                }
            }
            Ok(out)
        })
    }

    /// Bach tensor B_ij = ∇^k C_kij + W_isjt P^st; defined for n ≥ 4.
    pub fn bach(&self, order: usize) -> Result<Rc<Tensor>> {
        if self.n() < 4 {
            return Err(Error::DimensionTooSmall {
                id: "bach".into(),
                n: self.n(),
                min: 4,
            });
        }
        self.cached(Kind::Bach, order, &|f, p| {
            let n = f.n();
            let dc = f.cov_deriv(&*f.cotton(p + 1)?)?; // (∇C)_{c,kij}
            let ginv = f.inv_metric(p)?;
            let w = f.weyl(p)?;
            let praised = f.raise_all(&*f.schouten(p)?)?;
            let shape = f.shape_at(p)?;
            let mut out = Tensor::zeros(&shape, n, 2, vec![false, false]);
            for i in 0..n {
                for j in 0..n {
                    let mut v = Jet::constant(&shape, 0.0);
                    for c in 0..n {
                        for k in 0..n {
                            let mut term = Jet::constant(&shape, 0.0);
                            term.addmul_assign(ginv.get(&[c, k]), dc.get(&[c, k, i, j]));
                            v.add_assign(&term);
                        }
                    }
                    for s in 0..n {
                        for tt in 0..n {
                            let mut term = Jet::constant(&shape, 0.0);
                            term.addmul_assign(w.get(&[i, s, j, tt]), praised.get(&[s, tt]));
                            v.add_assign(&term);
                        }
                    }
                    *out.get_mut(&[i, j]) = v;
                }
            }
            Ok(out)
        })
    }

    /// Covariant derivative with the new (covariant) slot first:
    /// (∇T)_{c, a...} = ∂_c T_{a...} ∓ Γ-corrections per slot variance.
    pub fn cov_deriv(&self, t: &Tensor) -> Result<Tensor> {
        let p = t.order();
        if p == 0 {
            return Err(Error::OrderOverflow {
                requested: 1,
                cap: 0,
            });
        }
        let n = self.n();
        let gamma = self.christoffel(p - 1)?;
        let shape = self.shape_at(p - 1)?;
        let t_low = t.truncate(&shape);
        let mut up = vec![false];
        up.extend_from_slice(&t.up);
        let mut out = Tensor::zeros(&shape, n, t.rank + 1, up);
        let mut idx = vec![0usize; t.rank];
        for full in out.indices() {
            let c = full[0];
            idx.copy_from_slice(&full[1..]);
            let mut v = self.partial(t.get(&idx), c);
            for s in 0..t.rank {
                let orig = idx[s];
                if t.up[s] {
                    for e in 0..n {
                        idx[s] = e;
                        v.addmul_assign(gamma.get(&[orig, c, e]), t_low.get(&idx));
                    }
                } else {
                    for e in 0..n {
                        idx[s] = e;
                        v.submul_assign(gamma.get(&[e, c, orig]), t_low.get(&idx));
                    }
                }
                idx[s] = orig;
            }
            *out.get_mut(&full) = v;
        }
        Ok(out)
    }

    /// Raise a covariant slot with the inverse metric.
    pub fn raise_slot(&self, t: &Tensor, slot: usize) -> Result<Tensor> {
        assert!(!t.up[slot]);
        let p = t.order();
        let n = self.n();
        let ginv = self.inv_metric(p)?;
        let shape = t.jet_shape().clone();
        let mut up = t.up.clone();
        up[slot] = true;
        let mut out = Tensor::zeros(&shape, n, t.rank, up);
        for mut idx in out.indices() {
            let a = idx[slot];
            let mut acc = Jet::constant(&shape, 0.0);
            for e in 0..n {
                idx[slot] = e;
                acc.addmul_assign(ginv.get(&[a, e]), t.get(&idx));
            }
            idx[slot] = a;
            *out.get_mut(&idx) = acc;
        }
        Ok(out)
    }

    /// Lower a contravariant slot with the metric.
    pub fn lower_slot(&self, t: &Tensor, slot: usize) -> Result<Tensor> {
        assert!(t.up[slot]);
        let p = t.order();
        let n = self.n();
        let g = self.metric(p)?;
        let shape = t.jet_shape().clone();
        let mut up = t.up.clone();
        up[slot] = false;
        let mut out = Tensor::zeros(&shape, n, t.rank, up);
        for mut idx in out.indices() {
            let a = idx[slot];
            let mut acc = Jet::constant(&shape, 0.0);
            for e in 0..n {
                idx[slot] = e;
                acc.addmul_assign(g.get(&[a, e]), t.get(&idx));
            }
            idx[slot] = a;
            *out.get_mut(&idx) = acc;
        }
        Ok(out)
    }

    /// Raise every covariant slot.
    pub fn raise_all(&self, t: &Tensor) -> Result<Tensor> {
        let mut cur = t.clone();
        for s in 0..t.rank {
            if !cur.up[s] {
                cur = self.raise_slot(&cur, s)?;
            }
        }
        Ok(cur)
    }

    /// Full contraction ⟨a, b⟩ of two all-covariant tensors of equal rank.
    pub fn inner(&self, a: &Tensor, b: &Tensor) -> Result<Jet> {
        assert_eq!(a.rank, b.rank);
        let braised = self.raise_all(b)?;
        let shape = a.jet_shape().clone();
        let mut acc = Jet::constant(&shape, 0.0);
        for i in 0..a.len() {
            acc.addmul_assign(a.at(i), braised.at(i));
        }
        Ok(acc)
    }

    pub fn norm_sq(&self, t: &Tensor) -> Result<Jet> {
        self.inner(t, t)
    }

    /// Hessian ∇²_ab f of a scalar jet (f at order p yields order p−2).
    pub fn hessian(&self, f: &Jet) -> Result<Tensor> {
        let p = f.shape().order;
        if p < 2 {
            return Err(Error::OrderOverflow {
                requested: 2,
                cap: p,
            });
        }
        let n = self.n();
        let shape = self.shape_at(p - 2)?;
        let gamma = self.christoffel(p - 2)?;
        let grads: Vec<Jet> = (0..n)
            .map(|c| self.partial(f, c).truncate(&shape))
            .collect();
        let mut out = Tensor::zeros(&shape, n, 2, vec![false, false]);
        for a in 0..n {
            for b in a..n {
                let mut v = self.partial(&self.partial(f, a), b);
                for c in 0..n {
                    v.submul_assign(gamma.get(&[c, a, b]), &grads[c]);
                }
                *out.get_mut(&[a, b]) = v.clone();
                if a != b {
                    *out.get_mut(&[b, a]) = v;
                }
            }
        }
        Ok(out)
    }

    /// Δf = g^{ab} ∇²_ab f.
    pub fn laplacian(&self, f: &Jet) -> Result<Jet> {
        let h = self.hessian(f)?;
        let p = h.order();
        let ginv = self.inv_metric(p)?;
        let shape = h.jet_shape().clone();
        let n = self.n();
        let mut acc = Jet::constant(&shape, 0.0);
        for a in 0..n {
            for b in 0..n {
                acc.addmul_assign(ginv.get(&[a, b]), h.get(&[a, b]));
            }
        }
        Ok(acc)
    }

    /// Divergence δω = g^{ab} ∇_a ω_b of a covariant 1-tensor.
    pub fn divergence_covector(&self, omega: &Tensor) -> Result<Jet> {
        assert_eq!(omega.rank, 1);
        let d = self.cov_deriv(omega)?;
        let ginv = self.inv_metric(d.order())?;
        let shape = d.jet_shape().clone();
        let n = self.n();
        let mut acc = Jet::constant(&shape, 0.0);
        for a in 0..n {
            for b in 0..n {
                acc.addmul_assign(ginv.get(&[a, b]), d.get(&[a, b]));
            }
        }
        Ok(acc)
    }

    /// Gradient as a covariant 1-tensor (∂f per coordinate).
    pub fn grad(&self, f: &Jet) -> Tensor {
        let n = self.n();
        let p = f.shape().order;
        let shape = self.shape_at(p - 1).expect("gradient shape");
        let comps: Vec<Jet> = (0..n).map(|c| self.partial(f, c)).collect();
        let mut t = Tensor::zeros(&shape, n, 1, vec![false]);
        for (c, j) in comps.into_iter().enumerate() {
            *t.get_mut(&[c]) = j;
        }
        t
    }
}

/// Invert a symmetric matrix of jets by Gauss–Jordan elimination with
/// value-based partial pivoting.
fn invert_jet_matrix(g: &Tensor) -> Result<Tensor> {
    let n = g.n;
    let shape = g.jet_shape().clone();
    let mut a: Vec<Vec<Jet>> = (0..n)
        .map(|i| (0..n).map(|j| g.get(&[i, j]).clone()).collect())
        .collect();
    let mut inv: Vec<Vec<Jet>> = (0..n)
        .map(|i| {
            (0..n)
                .map(|j| Jet::constant(&shape, if i == j { 1.0 } else { 0.0 }))
                .collect()
        })
        .collect();
    for col in 0..n {
        let pivot_row = (col..n)
            .max_by(|&r1, &r2| {
                a[r1][col]
                    .value()
                    .abs()
                    .partial_cmp(&a[r2][col].value().abs())
                    .unwrap()
            })
            .unwrap();
        // coordinate-degenerate but valid metrics (sphere poles) have
        // legitimately tiny pivots; only a genuine zero is singular
        if a[pivot_row][col].value().abs() < 1e-250 {
            return Err(Error::SingularMetric(format!(
                "pivot {:.3e} in metric inversion",
                a[pivot_row][col].value()
            )));
        }
        a.swap(col, pivot_row);
        inv.swap(col, pivot_row);
        let pr = a[col][col].recip()?;
        for j in 0..n {
            a[col][j] = a[col][j].mul(&pr);
            inv[col][j] = inv[col][j].mul(&pr);
        }
        for r in 0..n {
            if r == col {
                continue;
            }
            let factor = a[r][col].clone();
            if factor.value() == 0.0 && factor.shape().len() == 1 {
                continue;
            }
            for j in 0..n {
                let mut t = a[r][j].clone();
                t.submul_assign(&factor, &a[col][j]);
                a[r][j] = t;
                let mut t = inv[r][j].clone();
                t.submul_assign(&factor, &inv[col][j]);
                inv[r][j] = t;
            }
        }
    }
    let mut out = Tensor::zeros(&shape, n, 2, vec![true, true]);
    for i in 0..n {
        for j in 0..n {
            *out.get_mut(&[i, j]) = inv[i][j].clone();
        }
    }
    Ok(out)
}

fn det_jet_matrix(g: &Tensor) -> Result<Jet> {
    let n = g.n;
    let shape = g.jet_shape().clone();
    let mut a: Vec<Vec<Jet>> = (0..n)
        .map(|i| (0..n).map(|j| g.get(&[i, j]).clone()).collect())
        .collect();
    let mut det = Jet::constant(&shape, 1.0);
    for col in 0..n {
        let pivot_row = (col..n)
            .max_by(|&r1, &r2| {
                a[r1][col]
                    .value()
                    .abs()
                    .partial_cmp(&a[r2][col].value().abs())
                    .unwrap()
            })
            .unwrap();
        if a[pivot_row][col].value().abs() < 1e-250 {
            return Err(Error::SingularMetric("zero pivot in determinant".into()));
        }
        if pivot_row != col {
            a.swap(col, pivot_row);
            det = det.neg();
        }
        det = det.mul(&a[col][col]);
        let pr = a[col][col].recip()?;
        for r in col + 1..n {
            let factor = a[r][col].mul(&pr);
            for j in col..n {
                let mut t = a[r][j].clone();
                t.submul_assign(&factor, &a[col][j]);
                a[r][j] = t;
            }
        }
    }
    Ok(det)
}
