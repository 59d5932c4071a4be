//! Truncated multivariate Taylor tables ("jets").
//!
//! A jet holds the derivative **values** ∂^α f at a base point for all
//! multi-indices |α| ≤ `order` over the active coordinate variables, with an
//! optional extra deformation variable `t` truncated separately at
//! `t_order` ≤ 2. Storing raw partials (rather than Taylor coefficients)
//! lets curvature code consume entries directly; the product tables carry
//! the binomial weights instead.
//!
//! Arithmetic is exact truncation of Taylor composition: for polynomial
//! inputs of degree ≤ `order` the result is exact up to rounding.

use crate::expr::Expr;
use crate::{Error, Result};
use std::collections::HashMap;
use std::sync::{Arc, Mutex, OnceLock};

/// Hard cap on the coordinate order; weight −6 invariants need metric
/// order 6 and divergence checks one more.
pub const MAX_ORDER: usize = 7;
/// Hard cap on the deformation-variable order.
pub const MAX_T_ORDER: usize = 2;

struct PairTable {
    out: Vec<u32>,
    a: Vec<u32>,
    b: Vec<u32>,
    coef: Vec<f64>,
}

/// Shared layout for all jets with the same (active variable count,
/// coordinate order, t order).
pub struct JetShape {
    pub nvars: usize,
    pub order: usize,
    pub t_order: usize,
    /// Coordinate multi-indices in graded lexicographic order; shapes of
    /// lower order share a prefix of this enumeration.
    exps: Vec<Vec<u8>>,
    n_x: usize,
    /// up_x[v][xi] = index of α+e_v (u32::MAX when |α| = order).
    up_x: Vec<Vec<u32>>,
    pairs: PairTable,
}

impl JetShape {
    pub fn len(&self) -> usize {
        self.n_x * (self.t_order + 1)
    }

    pub fn n_x(&self) -> usize {
        self.n_x
    }

    #[inline]
    fn at(&self, xi: usize, ti: usize) -> usize {
        xi * (self.t_order + 1) + ti
    }

    pub fn exponents(&self, xi: usize) -> &[u8] {
        &self.exps[xi]
    }
}

fn enumerate_multi_indices(nvars: usize, order: usize) -> Vec<Vec<u8>> {
    let mut all = Vec::new();
    for deg in 0..=order {
        let mut cur = vec![0u8; nvars];
        gen_degree(&mut all, &mut cur, 0, deg as u8);
    }
    all
}

fn gen_degree(all: &mut Vec<Vec<u8>>, cur: &mut Vec<u8>, slot: usize, remaining: u8) {
    if cur.is_empty() {
        if remaining == 0 {
            all.push(cur.clone());
        }
        return;
    }
    if slot == cur.len() - 1 {
        cur[slot] = remaining;
        all.push(cur.clone());
        cur[slot] = 0;
        return;
    }
    for v in (0..=remaining).rev() {
        cur[slot] = v;
        gen_degree(all, cur, slot + 1, remaining - v);
        cur[slot] = 0;
    }
}

fn binom_u(n: u8, k: u8) -> f64 {
    let mut acc = 1.0f64;
    for i in 0..k {
        acc = acc * (n - i) as f64 / (i + 1) as f64;
    }
    acc
}

fn build_shape(nvars: usize, order: usize, t_order: usize) -> JetShape {
    let exps = enumerate_multi_indices(nvars, order);
    let n_x = exps.len();
    let mut index: HashMap<&[u8], u32> = HashMap::with_capacity(n_x);
    for (i, e) in exps.iter().enumerate() {
        index.insert(e.as_slice(), i as u32);
    }

    let mut up_x = vec![vec![u32::MAX; n_x]; nvars.max(1)];
    let mut scratch = vec![0u8; nvars];
    for (xi, e) in exps.iter().enumerate() {
        let deg: usize = e.iter().map(|&v| v as usize).sum();
        if deg >= order {
            continue;
        }
        for v in 0..nvars {
            scratch.copy_from_slice(e);
            scratch[v] += 1;
            up_x[v][xi] = index[scratch.as_slice()];
        }
    }

    // product table with binomial weights (derivative-value storage)
    let mut entries: Vec<(u32, u32, u32, f64)> = Vec::new();
    let degs: Vec<usize> = exps
        .iter()
        .map(|e| e.iter().map(|&v| v as usize).sum())
        .collect();
    let t1 = t_order + 1;
    for ax in 0..n_x {
        for bx in 0..n_x {
            if degs[ax] + degs[bx] > order {
                continue;
            }
            for (s, v) in scratch.iter_mut().enumerate() {
                *v = exps[ax][s] + exps[bx][s];
            }
            let ox = index[scratch.as_slice()];
            let mut cx = 1.0f64;
            for s in 0..nvars {
                cx *= binom_u(scratch[s], exps[ax][s]);
            }
            for ta in 0..t1 {
                for tb in 0..t1 - ta {
                    let coef = cx * binom_u((ta + tb) as u8, ta as u8);
                    entries.push((
                        (ox as usize * t1 + ta + tb) as u32,
                        (ax * t1 + ta) as u32,
                        (bx * t1 + tb) as u32,
                        coef,
                    ));
                }
            }
        }
    }
    entries.sort_unstable_by_key(|e| e.0);
    let pairs = PairTable {
        out: entries.iter().map(|e| e.0).collect(),
        a: entries.iter().map(|e| e.1).collect(),
        b: entries.iter().map(|e| e.2).collect(),
        coef: entries.iter().map(|e| e.3).collect(),
    };

    JetShape {
        nvars,
        order,
        t_order,
        exps,
        n_x,
        up_x,
        pairs,
    }
}

fn shape_cache() -> &'static Mutex<HashMap<(usize, usize, usize), Arc<JetShape>>> {
    static CACHE: OnceLock<Mutex<HashMap<(usize, usize, usize), Arc<JetShape>>>> = OnceLock::new();
    CACHE.get_or_init(|| Mutex::new(HashMap::new()))
}

/// Fetch (building if needed) the shared shape for the given layout.
pub fn shape(nvars: usize, order: usize, t_order: usize) -> Result<Arc<JetShape>> {
    if order > MAX_ORDER {
        return Err(Error::OrderOverflow {
            requested: order,
            cap: MAX_ORDER,
        });
    }
    if t_order > MAX_T_ORDER {
        return Err(Error::OrderOverflow {
            requested: t_order,
            cap: MAX_T_ORDER,
        });
    }
    let mut cache = shape_cache().lock().unwrap();
    Ok(cache
        .entry((nvars, order, t_order))
        .or_insert_with(|| Arc::new(build_shape(nvars, order, t_order)))
        .clone())
}

/// A truncated Taylor table of derivative values at a point.
#[derive(Clone)]
pub struct Jet {
    shape: Arc<JetShape>,
    vals: Vec<f64>,
}

impl std::fmt::Debug for Jet {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(
            f,
            "Jet(nvars={}, order={}, t={}, value={})",
            self.shape.nvars,
            self.shape.order,
            self.shape.t_order,
            self.value()
        )
    }
}

impl Jet {
    pub fn constant(shape: &Arc<JetShape>, v: f64) -> Jet {
        let mut vals = vec![0.0; shape.len()];
        vals[0] = v;
        Jet {
            shape: shape.clone(),
            vals,
        }
    }

    /// Seed for the coordinate variable in `slot`, evaluated at `value`.
    pub fn coord(shape: &Arc<JetShape>, slot: usize, value: f64) -> Jet {
        let mut j = Jet::constant(shape, value);
        if shape.order >= 1 {
            let xi = shape.up_x[slot][0] as usize;
            j.vals[shape.at(xi, 0)] = 1.0;
        }
        j
    }

    /// Seed for the deformation variable (base value 0 at t = 0).
    pub fn t_var(shape: &Arc<JetShape>) -> Jet {
        let mut j = Jet::constant(shape, 0.0);
        if shape.t_order >= 1 {
            j.vals[shape.at(0, 1)] = 1.0;
        }
        j
    }

    pub fn shape(&self) -> &Arc<JetShape> {
        &self.shape
    }

    /// The function value (entry at multi-index 0).
    pub fn value(&self) -> f64 {
        self.vals[0]
    }

    /// ∂_t^j f as a jet in the coordinate variables only.
    pub fn t_slice(&self, j: usize) -> Result<Jet> {
        if j > self.shape.t_order {
            return Err(Error::OrderOverflow {
                requested: j,
                cap: self.shape.t_order,
            });
        }
        let out_shape = shape(self.shape.nvars, self.shape.order, 0)?;
        let mut vals = vec![0.0; out_shape.len()];
        for xi in 0..self.shape.n_x {
            vals[xi] = self.vals[self.shape.at(xi, j)];
        }
        Ok(Jet {
            shape: out_shape,
            vals,
        })
    }

    /// Raw partial derivative value ∂^α ∂_t^{ti} f.
    pub fn partial(&self, alpha: &[u8], ti: usize) -> f64 {
        for (xi, e) in self.shape.exps.iter().enumerate() {
            if e.as_slice() == alpha {
                return self.vals[self.shape.at(xi, ti)];
            }
        }
        panic!("multi-index {alpha:?} out of shape");
    }

    /// Coordinate derivative along variable `slot`; result has order − 1.
    pub fn dx(&self, slot: usize) -> Jet {
        let out_shape = shape(self.shape.nvars, self.shape.order - 1, self.shape.t_order)
            .expect("derivative shape");
        let t1 = self.shape.t_order + 1;
        let mut vals = vec![0.0; out_shape.len()];
        for xi in 0..out_shape.n_x {
            let src_xi = self.shape.up_x[slot][xi] as usize;
            for ti in 0..t1 {
                vals[xi * t1 + ti] = self.vals[src_xi * t1 + ti];
            }
        }
        Jet {
            shape: out_shape,
            vals,
        }
    }

    /// Derivative in the deformation variable; result has t_order − 1.
    pub fn dt(&self) -> Jet {
        let out_shape = shape(self.shape.nvars, self.shape.order, self.shape.t_order - 1)
            .expect("derivative shape");
        let t1 = self.shape.t_order + 1;
        let o1 = out_shape.t_order + 1;
        let mut vals = vec![0.0; out_shape.len()];
        for xi in 0..self.shape.n_x {
            for ti in 0..o1 {
                vals[xi * o1 + ti] = self.vals[xi * t1 + ti + 1];
            }
        }
        Jet {
            shape: out_shape,
            vals,
        }
    }

    /// Drop entries above the target orders (same variable count).
    pub fn truncate(&self, target: &Arc<JetShape>) -> Jet {
        assert_eq!(self.shape.nvars, target.nvars, "variable count mismatch");
        assert!(target.order <= self.shape.order && target.t_order <= self.shape.t_order);
        if Arc::ptr_eq(&self.shape, target) {
            return self.clone();
        }
        let t1 = self.shape.t_order + 1;
        let o1 = target.t_order + 1;
        let mut vals = vec![0.0; target.len()];
        for xi in 0..target.n_x {
            for ti in 0..o1 {
                vals[xi * o1 + ti] = self.vals[xi * t1 + ti];
            }
        }
        Jet {
            shape: target.clone(),
            vals,
        }
    }

    pub fn add(&self, other: &Jet) -> Jet {
        debug_assert!(Arc::ptr_eq(&self.shape, &other.shape));
        let mut out = self.clone();
        for (o, v) in out.vals.iter_mut().zip(other.vals.iter()) {
            *o += v;
        }
        out
    }

    pub fn sub(&self, other: &Jet) -> Jet {
        debug_assert!(Arc::ptr_eq(&self.shape, &other.shape));
        let mut out = self.clone();
        for (o, v) in out.vals.iter_mut().zip(other.vals.iter()) {
            *o -= v;
        }
        out
    }

    pub fn add_assign(&mut self, other: &Jet) {
        debug_assert!(Arc::ptr_eq(&self.shape, &other.shape));
        for (o, v) in self.vals.iter_mut().zip(other.vals.iter()) {
            *o += v;
        }
    }

    pub fn add_scaled(&mut self, other: &Jet, c: f64) {
        debug_assert!(Arc::ptr_eq(&self.shape, &other.shape));
        for (o, v) in self.vals.iter_mut().zip(other.vals.iter()) {
            *o += c * v;
        }
    }

    pub fn neg(&self) -> Jet {
        let mut out = self.clone();
        for o in out.vals.iter_mut() {
            *o = -*o;
        }
        out
    }

    pub fn scale(&self, c: f64) -> Jet {
        let mut out = self.clone();
        for o in out.vals.iter_mut() {
            *o *= c;
        }
        out
    }

    pub fn mul(&self, other: &Jet) -> Jet {
        let mut out = Jet::constant(&self.shape, 0.0);
        out.vals[0] = 0.0;
        out.addmul_assign(self, other);
        out
    }

    /// self += a * b, without allocating a temporary.
    pub fn addmul_assign(&mut self, a: &Jet, b: &Jet) {
        debug_assert!(Arc::ptr_eq(&self.shape, &a.shape));
        debug_assert!(Arc::ptr_eq(&a.shape, &b.shape));
        let p = &self.shape.pairs;
        let (av, bv) = (&a.vals, &b.vals);
        for i in 0..p.out.len() {
            // indices are in-range by construction of the pair table
            self.vals[p.out[i] as usize] +=
                p.coef[i] * av[p.a[i] as usize] * bv[p.b[i] as usize];
        }
    }

    /// self -= a * b.
    pub fn submul_assign(&mut self, a: &Jet, b: &Jet) {
        debug_assert!(Arc::ptr_eq(&self.shape, &a.shape));
        debug_assert!(Arc::ptr_eq(&a.shape, &b.shape));
        let p = &self.shape.pairs;
        let (av, bv) = (&a.vals, &b.vals);
        for i in 0..p.out.len() {
            self.vals[p.out[i] as usize] -=
                p.coef[i] * av[p.a[i] as usize] * bv[p.b[i] as usize];
        }
    }

    /// Multiply by a pure t-jet `[c0, c1, c2, ...]` (constant in the
    /// coordinates). Used for volume-normalization factors.
    pub fn mul_tjet(&self, c: &[f64]) -> Jet {
        let t1 = self.shape.t_order + 1;
        assert!(c.len() >= t1);
        let mut out = Jet::constant(&self.shape, 0.0);
        for xi in 0..self.shape.n_x {
            for to in 0..t1 {
                let mut acc = 0.0;
                for ta in 0..=to {
                    acc += binom_u(to as u8, ta as u8) * self.vals[xi * t1 + ta] * c[to - ta];
                }
                out.vals[xi * t1 + to] = acc;
            }
        }
        out
    }

    /// Compose with a univariate analytic function given its Taylor
    /// coefficients `c[i] = f^(i)(u0)/i!` around the jet's value u0.
    fn compose(&self, c: &[f64]) -> Jet {
        let mut hat = self.clone();
        hat.vals[0] = 0.0;
        let m = c.len() - 1;
        let mut acc = Jet::constant(&self.shape, c[m]);
        for i in (0..m).rev() {
            let mut next = Jet::constant(&self.shape, c[i]);
            next.addmul_assign(&acc, &hat);
            acc = next;
        }
        acc
    }

    fn series_len(&self) -> usize {
        self.shape.order + self.shape.t_order + 1
    }

    pub fn recip(&self) -> Result<Jet> {
        let u0 = self.value();
        if u0 == 0.0 {
            return Err(Error::Domain("division by zero in jet arithmetic".into()));
        }
        let m = self.series_len();
        let mut c = vec![0.0; m];
        let mut cur = 1.0 / u0;
        for ci in c.iter_mut() {
            *ci = cur;
            cur = -cur / u0;
        }
        Ok(self.compose(&c))
    }

    pub fn div(&self, other: &Jet) -> Result<Jet> {
        Ok(self.mul(&other.recip()?))
    }

    pub fn powi(&self, p: i64) -> Result<Jet> {
        if p == 0 {
            return Ok(Jet::constant(&self.shape, 1.0));
        }
        let mut base = if p < 0 { self.recip()? } else { self.clone() };
        let mut e = p.unsigned_abs();
        let mut acc: Option<Jet> = None;
        loop {
            if e & 1 == 1 {
                acc = Some(match acc {
                    None => base.clone(),
                    Some(a) => a.mul(&base),
                });
            }
            e >>= 1;
            if e == 0 {
                break;
            }
            base = base.mul(&base);
        }
        Ok(acc.unwrap())
    }

    pub fn sqrt(&self) -> Result<Jet> {
        let u0 = self.value();
        if u0 <= 0.0 {
            return Err(Error::Domain(format!("sqrt of non-positive value {u0}")));
        }
        self.powf(0.5)
    }

    /// Real power with arbitrary exponent; positive base required unless
    /// the exponent is an integer.
    pub fn powf(&self, r: f64) -> Result<Jet> {
        if r.fract() == 0.0 && r.abs() <= 64.0 {
            return self.powi(r as i64);
        }
        let u0 = self.value();
        if u0 <= 0.0 {
            return Err(Error::Domain(format!(
                "power {r} of non-positive value {u0}"
            )));
        }
        let m = self.series_len();
        let mut c = vec![0.0; m];
        let mut coef = u0.powf(r);
        for (i, ci) in c.iter_mut().enumerate() {
            *ci = coef;
            coef *= (r - i as f64) / (i as f64 + 1.0) / u0;
        }
        Ok(self.compose(&c))
    }

    pub fn exp(&self) -> Jet {
        let m = self.series_len();
        let mut c = vec![0.0; m];
        let mut coef = self.value().exp();
        for (i, ci) in c.iter_mut().enumerate() {
            *ci = coef;
            coef /= i as f64 + 1.0;
        }
        self.compose(&c)
    }

    pub fn ln(&self) -> Result<Jet> {
        let u0 = self.value();
        if u0 <= 0.0 {
            return Err(Error::Domain(format!("log of non-positive value {u0}")));
        }
        let m = self.series_len();
        let mut c = vec![0.0; m];
        c[0] = u0.ln();
        let mut pw = 1.0 / u0;
        for i in 1..m {
            c[i] = if i % 2 == 1 { pw } else { -pw } / i as f64;
            pw /= u0;
        }
        Ok(self.compose(&c))
    }

    pub fn sin(&self) -> Jet {
        self.trig(true)
    }

    pub fn cos(&self) -> Jet {
        self.trig(false)
    }

    fn trig(&self, is_sin: bool) -> Jet {
        let u0 = self.value();
        let (s, co) = u0.sin_cos();
        let cycle = [s, co, -s, -co];
        let start = if is_sin { 0 } else { 1 };
        let m = self.series_len();
        let mut c = vec![0.0; m];
        let mut fact = 1.0;
        for (i, ci) in c.iter_mut().enumerate() {
            if i > 0 {
                fact *= i as f64;
            }
            *ci = cycle[(start + i) % 4] / fact;
        }
        self.compose(&c)
    }
}

/// How a symbol is bound during jet evaluation.
#[derive(Clone, Copy, Debug)]
pub enum SymBinding {
    /// Active coordinate: jet variable `slot` seeded at the given value.
    Coord(usize, f64),
    /// Held constant (parameter, or coordinate outside the active set).
    Const(f64),
    /// The deformation variable.
    TVar,
}

/// Evaluate an expression into a jet, resolving symbols through `lookup`.
pub fn eval_expr_jet(
    e: &Expr,
    shape: &Arc<JetShape>,
    lookup: &dyn Fn(&str) -> Option<SymBinding>,
) -> Result<Jet> {
    match e {
        Expr::Const(c) => Ok(Jet::constant(
            shape,
            *c.numer() as f64 / *c.denom() as f64,
        )),
        Expr::Sym(s) => match lookup(s) {
            Some(SymBinding::Coord(slot, v)) => Ok(Jet::coord(shape, slot, v)),
            Some(SymBinding::Const(v)) => Ok(Jet::constant(shape, v)),
            Some(SymBinding::TVar) => Ok(Jet::t_var(shape)),
            None => Err(Error::UnknownSymbol(s.to_string())),
        },
        Expr::Add(a, b) => Ok(eval_expr_jet(a, shape, lookup)?.add(&eval_expr_jet(b, shape, lookup)?)),
        Expr::Sub(a, b) => Ok(eval_expr_jet(a, shape, lookup)?.sub(&eval_expr_jet(b, shape, lookup)?)),
        Expr::Mul(a, b) => Ok(eval_expr_jet(a, shape, lookup)?.mul(&eval_expr_jet(b, shape, lookup)?)),
        Expr::Div(a, b) => eval_expr_jet(a, shape, lookup)?.div(&eval_expr_jet(b, shape, lookup)?),
        Expr::Neg(a) => Ok(eval_expr_jet(a, shape, lookup)?.neg()),
        Expr::Pow(a, r) => {
            let base = eval_expr_jet(a, shape, lookup)?;
            if r.is_integer() {
                base.powi(*r.numer())
            } else if *r == crate::expr::Rational::new(1, 2) {
                base.sqrt()
            } else {
                base.powf(*r.numer() as f64 / *r.denom() as f64)
            }
        }
        Expr::Sin(a) => Ok(eval_expr_jet(a, shape, lookup)?.sin()),
        Expr::Cos(a) => Ok(eval_expr_jet(a, shape, lookup)?.cos()),
        Expr::Exp(a) => Ok(eval_expr_jet(a, shape, lookup)?.exp()),
        Expr::Log(a) => eval_expr_jet(a, shape, lookup)?.ln(),
        Expr::Sqrt(a) => eval_expr_jet(a, shape, lookup)?.sqrt(),
    }
}

/// Evaluate all partials of `e` at `point` up to total `order`, with every
/// listed coordinate active.
pub fn eval_jet(e: &Expr, point: &[(&str, f64)], order: usize) -> Result<Jet> {
    let sh = shape(point.len(), order, 0)?;
    let lookup = |name: &str| -> Option<SymBinding> {
        point
            .iter()
            .position(|(n, _)| *n == name)
            .map(|i| SymBinding::Coord(i, point[i].1))
    };
    eval_expr_jet(e, &sh, &lookup)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::expr::parse_expr;

    #[test]
    fn univariate_polynomial_partials() {
        let e = parse_expr("x1^2", &["x1"]).unwrap();
        let j = eval_jet(&e, &[("x1", 2.0)], 2).unwrap();
        assert_eq!(j.partial(&[0], 0), 4.0);
        assert_eq!(j.partial(&[1], 0), 4.0);
        assert_eq!(j.partial(&[2], 0), 2.0);
    }

    #[test]
    fn sine_partials_at_zero() {
        let e = parse_expr("sin(x1)", &["x1"]).unwrap();
        let j = eval_jet(&e, &[("x1", 0.0)], 3).unwrap();
        assert_eq!(j.partial(&[0], 0), 0.0);
        assert!((j.partial(&[1], 0) - 1.0).abs() < 1e-15);
        assert!(j.partial(&[2], 0).abs() < 1e-15);
        assert!((j.partial(&[3], 0) + 1.0).abs() < 1e-15);
    }

    #[test]
    fn mixed_partial_of_exp_product() {
        let e = parse_expr("exp(x1*x2)", &["x1", "x2"]).unwrap();
        let j = eval_jet(&e, &[("x1", 0.0), ("x2", 0.0)], 2).unwrap();
        assert!((j.partial(&[1, 1], 0) - 1.0).abs() < 1e-15);
    }

    #[test]
    fn product_rule_is_exact_for_polynomials() {
        let a = parse_expr("1 + 2*x1 - x2^2 + x1*x2", &["x1", "x2"]).unwrap();
        let b = parse_expr("3 - x1 + x1^2*x2", &["x1", "x2"]).unwrap();
        let prod = Expr::mul(a.clone(), b.clone());
        let pt = [("x1", 0.7), ("x2", -1.3)];
        let ja = eval_jet(&a, &pt, 5).unwrap();
        let jb = eval_jet(&b, &pt, 5).unwrap();
        let jp = eval_jet(&prod, &pt, 5).unwrap();
        let prod_jets = ja.mul(&jb);
        for (x, y) in jp.vals.iter().zip(prod_jets.vals.iter()) {
            assert!((x - y).abs() <= 1e-12 * x.abs().max(1.0));
        }
    }

    #[test]
    fn derivative_slice_matches_symbolic() {
        let e = parse_expr("sin(x1)*exp(x2) + x1^3", &["x1", "x2"]).unwrap();
        let d = crate::expr::diff_expr(&e, "x1");
        let pt = [("x1", 0.4), ("x2", 0.2)];
        let je = eval_jet(&e, &pt, 4).unwrap();
        let jd = eval_jet(&d, &pt, 3).unwrap();
        let slice = je.dx(0);
        for xi in 0..slice.shape.n_x {
            let a = slice.vals[xi];
            let b = jd.vals[xi];
            assert!((a - b).abs() <= 1e-10 * a.abs().max(1.0));
        }
    }

    #[test]
    fn t_variable_is_truncated_separately() {
        // f = (1 + t)^2 * x1: t^2 kept, t^3 dropped, x-order unaffected
        let e = parse_expr("(1 + t)^2 * x1", &["x1", "t"]).unwrap();
        let sh = shape(1, 1, 2).unwrap();
        let lookup = |name: &str| match name {
            "x1" => Some(SymBinding::Coord(0, 3.0)),
            "t" => Some(SymBinding::TVar),
            _ => None,
        };
        let j = eval_expr_jet(&e, &sh, &lookup).unwrap();
        assert_eq!(j.value(), 3.0);
        assert_eq!(j.t_slice(1).unwrap().value(), 6.0); // d/dt = 2(1+t)x1 -> 6
        assert_eq!(j.t_slice(2).unwrap().value(), 6.0); // d2/dt2 = 2x1
        assert_eq!(j.t_slice(1).unwrap().partial(&[1], 0), 2.0);
    }

    #[test]
    fn order_cap_is_enforced() {
        assert!(matches!(
            shape(2, 8, 0),
            Err(Error::OrderOverflow { .. })
        ));
    }
}
