//! Closed-form scalar expressions in coordinates and parameters.
//!
//! Constants are exact rationals; everything else is left unsimplified
//! beyond constant folding, which is all that evaluation correctness needs.

mod parse;

pub use parse::parse_expr;

use num_rational::Rational64;
use num_traits::{Signed, ToPrimitive, Zero};
use std::collections::BTreeSet;
use std::fmt;
use std::sync::Arc;

pub type Rational = Rational64;

/// Expression tree. `Sym` covers both coordinate symbols and named
/// parameters; the owning chart decides which is which at evaluation time.
#[derive(Clone, Debug, PartialEq)]
pub enum Expr {
    Const(Rational),
    Sym(Arc<str>),
    Add(Box<Expr>, Box<Expr>),
    Sub(Box<Expr>, Box<Expr>),
    Mul(Box<Expr>, Box<Expr>),
    Div(Box<Expr>, Box<Expr>),
    Neg(Box<Expr>),
    /// Power with exact rational exponent.
    Pow(Box<Expr>, Rational),
    Sin(Box<Expr>),
    Cos(Box<Expr>),
    Exp(Box<Expr>),
    Log(Box<Expr>),
    Sqrt(Box<Expr>),
}

/// Overflow-checked rational arithmetic; `None` falls back to an
/// unfolded expression node.
fn checked_rat(num: i128, den: i128) -> Option<Rational> {
    if den == 0 {
        return None;
    }
    let g = gcd_i128(num.unsigned_abs(), den.unsigned_abs()) as i128;
    let (num, den) = (num / g, den / g);
    let (num, den) = if den < 0 { (-num, -den) } else { (num, den) };
    if num.abs() > i64::MAX as i128 || den > i64::MAX as i128 {
        return None;
    }
    Some(Rational::new_raw(num as i64, den as i64))
}

fn gcd_i128(mut a: u128, mut b: u128) -> u128 {
    while b != 0 {
        let t = a % b;
        a = b;
        b = t;
    }
    a.max(1)
}

fn rat_add(x: &Rational, y: &Rational) -> Option<Rational> {
    let (xn, xd) = (*x.numer() as i128, *x.denom() as i128);
    let (yn, yd) = (*y.numer() as i128, *y.denom() as i128);
    checked_rat(xn * yd + yn * xd, xd * yd)
}

fn rat_sub(x: &Rational, y: &Rational) -> Option<Rational> {
    rat_add(x, &(-y))
}

fn rat_mul(x: &Rational, y: &Rational) -> Option<Rational> {
    checked_rat(
        *x.numer() as i128 * *y.numer() as i128,
        *x.denom() as i128 * *y.denom() as i128,
    )
}

fn rat_div(x: &Rational, y: &Rational) -> Option<Rational> {
    if y.is_zero() {
        return None;
    }
    checked_rat(
        *x.numer() as i128 * *y.denom() as i128,
        *x.denom() as i128 * *y.numer() as i128,
    )
}

impl Expr {
    pub fn int(v: i64) -> Expr {
        Expr::Const(Rational::from_integer(v))
    }

    pub fn rational(num: i64, den: i64) -> Expr {
        Expr::Const(Rational::new(num, den))
    }

    pub fn sym(name: &str) -> Expr {
        Expr::Sym(Arc::from(name))
    }

    pub fn zero() -> Expr {
        Expr::int(0)
    }

    pub fn one() -> Expr {
        Expr::int(1)
    }

    pub fn is_zero(&self) -> bool {
        matches!(self, Expr::Const(c) if c.is_zero())
    }

    pub fn is_one(&self) -> bool {
        matches!(self, Expr::Const(c) if *c == Rational::from_integer(1))
    }

    pub fn as_const(&self) -> Option<Rational> {
        match self {
            Expr::Const(c) => Some(*c),
            _ => None,
        }
    }

    // Smart constructors: constant folding and neutral elements only.

    pub fn add(a: Expr, b: Expr) -> Expr {
        if let (Expr::Const(x), Expr::Const(y)) = (&a, &b) {
            if let Some(c) = rat_add(x, y) {
                return Expr::Const(c);
            }
        }
        if a.is_zero() {
            return b;
        }
        if b.is_zero() {
            return a;
        }
        Expr::Add(Box::new(a), Box::new(b))
    }

    pub fn sub(a: Expr, b: Expr) -> Expr {
        if let (Expr::Const(x), Expr::Const(y)) = (&a, &b) {
            if let Some(c) = rat_sub(x, y) {
                return Expr::Const(c);
            }
        }
        if b.is_zero() {
            return a;
        }
        if a.is_zero() {
            return Expr::neg(b);
        }
        Expr::Sub(Box::new(a), Box::new(b))
    }

    pub fn mul(a: Expr, b: Expr) -> Expr {
        if let (Expr::Const(x), Expr::Const(y)) = (&a, &b) {
            if let Some(c) = rat_mul(x, y) {
                return Expr::Const(c);
            }
        }
        if a.is_zero() || b.is_zero() {
            return Expr::zero();
        }
        if a.is_one() {
            return b;
        }
        if b.is_one() {
            return a;
        }
        // pull nested rational factors together: c1 * (c2 * x) = (c1 c2) * x
        if let (Expr::Const(x), Expr::Mul(u, _)) = (&a, &b) {
            if let Expr::Const(y) = **u {
                if let Some(c) = rat_mul(x, &y) {
                    if let Expr::Mul(_, v) = b {
                        return Expr::mul(Expr::Const(c), *v);
                    }
                }
            }
        }
        Expr::Mul(Box::new(a), Box::new(b))
    }

    pub fn div(a: Expr, b: Expr) -> Expr {
        if let (Expr::Const(x), Expr::Const(y)) = (&a, &b) {
            if !y.is_zero() {
                if let Some(c) = rat_div(x, y) {
                    return Expr::Const(c);
                }
            }
        }
        if a.is_zero() && !matches!(&b, Expr::Const(c) if c.is_zero()) {
            return Expr::zero();
        }
        if b.is_one() {
            return a;
        }
        Expr::Div(Box::new(a), Box::new(b))
    }

    pub fn neg(a: Expr) -> Expr {
        match &a {
            Expr::Const(x) => Expr::Const(-x),
            Expr::Neg(inner) => (**inner).clone(),
            _ => Expr::Neg(Box::new(a)),
        }
    }

    pub fn pow(a: Expr, r: Rational) -> Expr {
        if r.is_zero() {
            return Expr::one();
        }
        if r == Rational::from_integer(1) {
            return a;
        }
        if let Expr::Const(x) = &a {
            if r.is_integer() && r.numer().unsigned_abs() <= 16 {
                let mut acc = Some(Rational::from_integer(1));
                for _ in 0..r.numer().unsigned_abs() {
                    acc = acc.and_then(|v| rat_mul(&v, x));
                }
                if let Some(acc) = acc {
                    if r.is_negative() {
                        if let Some(inv) = rat_div(&Rational::from_integer(1), &acc) {
                            return Expr::Const(inv);
                        }
                    } else {
                        return Expr::Const(acc);
                    }
                }
            }
        }
        Expr::Pow(Box::new(a), r)
    }

    pub fn sin(a: Expr) -> Expr {
        if a.is_zero() {
            return Expr::zero();
        }
        Expr::Sin(Box::new(a))
    }

    pub fn cos(a: Expr) -> Expr {
        if a.is_zero() {
            return Expr::one();
        }
        Expr::Cos(Box::new(a))
    }

    pub fn exp(a: Expr) -> Expr {
        if a.is_zero() {
            return Expr::one();
        }
        Expr::Exp(Box::new(a))
    }

    pub fn log(a: Expr) -> Expr {
        if a.is_one() {
            return Expr::zero();
        }
        Expr::Log(Box::new(a))
    }

    pub fn sqrt(a: Expr) -> Expr {
        if a.is_one() {
            return Expr::one();
        }
        Expr::Sqrt(Box::new(a))
    }

    /// Collect every symbol referenced by the expression.
    pub fn symbols(&self) -> BTreeSet<String> {
        let mut out = BTreeSet::new();
        self.visit_symbols(&mut out);
        out
    }

    fn visit_symbols(&self, out: &mut BTreeSet<String>) {
        match self {
            Expr::Const(_) => {}
            Expr::Sym(s) => {
                out.insert(s.to_string());
            }
            Expr::Add(a, b) | Expr::Sub(a, b) | Expr::Mul(a, b) | Expr::Div(a, b) => {
                a.visit_symbols(out);
                b.visit_symbols(out);
            }
            Expr::Neg(a)
            | Expr::Pow(a, _)
            | Expr::Sin(a)
            | Expr::Cos(a)
            | Expr::Exp(a)
            | Expr::Log(a)
            | Expr::Sqrt(a) => a.visit_symbols(out),
        }
    }

    pub fn references(&self, name: &str) -> bool {
        match self {
            Expr::Const(_) => false,
            Expr::Sym(s) => &**s == name,
            Expr::Add(a, b) | Expr::Sub(a, b) | Expr::Mul(a, b) | Expr::Div(a, b) => {
                a.references(name) || b.references(name)
            }
            Expr::Neg(a)
            | Expr::Pow(a, _)
            | Expr::Sin(a)
            | Expr::Cos(a)
            | Expr::Exp(a)
            | Expr::Log(a)
            | Expr::Sqrt(a) => a.references(name),
        }
    }

    /// Substitute `map(name)` for each symbol where the map returns `Some`.
    pub fn substitute(&self, map: &dyn Fn(&str) -> Option<Expr>) -> Expr {
        match self {
            Expr::Const(c) => Expr::Const(*c),
            Expr::Sym(s) => map(s).unwrap_or_else(|| self.clone()),
            Expr::Add(a, b) => Expr::add(a.substitute(map), b.substitute(map)),
            Expr::Sub(a, b) => Expr::sub(a.substitute(map), b.substitute(map)),
            Expr::Mul(a, b) => Expr::mul(a.substitute(map), b.substitute(map)),
            Expr::Div(a, b) => Expr::div(a.substitute(map), b.substitute(map)),
            Expr::Neg(a) => Expr::neg(a.substitute(map)),
            Expr::Pow(a, r) => Expr::pow(a.substitute(map), *r),
            Expr::Sin(a) => Expr::sin(a.substitute(map)),
            Expr::Cos(a) => Expr::cos(a.substitute(map)),
            Expr::Exp(a) => Expr::exp(a.substitute(map)),
            Expr::Log(a) => Expr::log(a.substitute(map)),
            Expr::Sqrt(a) => Expr::sqrt(a.substitute(map)),
        }
    }
}

/// Symbolic derivative with respect to `symbol`, unsimplified beyond
/// constant folding. Used for manifest preprocessing (e.g. Lie-derivative
/// components); runtime derivatives go through jets instead.
pub fn diff_expr(e: &Expr, symbol: &str) -> Expr {
    match e {
        Expr::Const(_) => Expr::zero(),
        Expr::Sym(s) => {
            if &**s == symbol {
                Expr::one()
            } else {
                Expr::zero()
            }
        }
        Expr::Add(a, b) => Expr::add(diff_expr(a, symbol), diff_expr(b, symbol)),
        Expr::Sub(a, b) => Expr::sub(diff_expr(a, symbol), diff_expr(b, symbol)),
        Expr::Mul(a, b) => Expr::add(
            Expr::mul(diff_expr(a, symbol), (**b).clone()),
            Expr::mul((**a).clone(), diff_expr(b, symbol)),
        ),
        Expr::Div(a, b) => {
            // (a/b)' = a'/b - a b'/b^2
            let da = diff_expr(a, symbol);
            let db = diff_expr(b, symbol);
            Expr::sub(
                Expr::div(da, (**b).clone()),
                Expr::div(
                    Expr::mul((**a).clone(), db),
                    Expr::pow((**b).clone(), Rational::from_integer(2)),
                ),
            )
        }
        Expr::Neg(a) => Expr::neg(diff_expr(a, symbol)),
        Expr::Pow(a, r) => {
            // (a^r)' = r a^(r-1) a'
            let da = diff_expr(a, symbol);
            Expr::mul(
                Expr::Const(*r),
                Expr::mul(
                    Expr::pow((**a).clone(), r - Rational::from_integer(1)),
                    da,
                ),
            )
        }
        Expr::Sin(a) => Expr::mul(Expr::cos((**a).clone()), diff_expr(a, symbol)),
        Expr::Cos(a) => Expr::neg(Expr::mul(Expr::sin((**a).clone()), diff_expr(a, symbol))),
        Expr::Exp(a) => Expr::mul(e.clone(), diff_expr(a, symbol)),
        Expr::Log(a) => Expr::div(diff_expr(a, symbol), (**a).clone()),
        Expr::Sqrt(a) => Expr::div(
            diff_expr(a, symbol),
            Expr::mul(Expr::int(2), e.clone()),
        ),
    }
}

fn precedence(e: &Expr) -> u8 {
    match e {
        Expr::Add(..) | Expr::Sub(..) => 1,
        Expr::Mul(..) | Expr::Div(..) => 2,
        Expr::Neg(..) => 3,
        Expr::Pow(..) => 4,
        _ => 5,
    }
}

fn fmt_child(f: &mut fmt::Formatter<'_>, e: &Expr, min_prec: u8) -> fmt::Result {
    if precedence(e) < min_prec {
        write!(f, "({e})")
    } else {
        write!(f, "{e}")
    }
}

fn fmt_rational(f: &mut fmt::Formatter<'_>, c: &Rational) -> fmt::Result {
    if c.is_integer() {
        write!(f, "{}", c.numer())
    } else if c.is_negative() {
        write!(f, "(-{}/{})", c.numer().unsigned_abs(), c.denom())
    } else {
        write!(f, "{}/{}", c.numer(), c.denom())
    }
}

impl fmt::Display for Expr {
    /// Prints in the manifest grammar; parsing the output reproduces an
    /// expression with identical evaluation semantics.
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Expr::Const(c) => {
                if c.is_integer() && c.is_negative() {
                    write!(f, "(-{})", c.numer().unsigned_abs())
                } else {
                    fmt_rational(f, c)
                }
            }
            Expr::Sym(s) => write!(f, "{s}"),
            Expr::Add(a, b) => {
                fmt_child(f, a, 1)?;
                write!(f, " + ")?;
                fmt_child(f, b, 2)
            }
            Expr::Sub(a, b) => {
                fmt_child(f, a, 1)?;
                write!(f, " - ")?;
                fmt_child(f, b, 2)
            }
            Expr::Mul(a, b) => {
                fmt_child(f, a, 2)?;
                write!(f, "*")?;
                fmt_child(f, b, 3)
            }
            Expr::Div(a, b) => {
                fmt_child(f, a, 2)?;
                write!(f, "/")?;
                fmt_child(f, b, 5)
            }
            Expr::Neg(a) => {
                write!(f, "-")?;
                fmt_child(f, a, 3)
            }
            Expr::Pow(a, r) => {
                fmt_child(f, a, 5)?;
                write!(f, "^")?;
                if r.is_integer() && !r.is_negative() {
                    write!(f, "{}", r.numer())
                } else {
                    write!(f, "(")?;
                    fmt_rational(f, r)?;
                    write!(f, ")")
                }
            }
            Expr::Sin(a) => write!(f, "sin({a})"),
            Expr::Cos(a) => write!(f, "cos({a})"),
            Expr::Exp(a) => write!(f, "exp({a})"),
            Expr::Log(a) => write!(f, "log({a})"),
            Expr::Sqrt(a) => write!(f, "sqrt({a})"),
        }
    }
}

/// Exact rational for an f64 (mantissa over power of two). Errors when the
/// denominator would overflow `i64`; charts keep such values in parameter
/// bindings instead.
pub fn rational_from_f64(v: f64) -> crate::Result<Rational> {
    if !v.is_finite() {
        return Err(crate::Error::Domain(format!("non-finite constant {v}")));
    }
    if v == 0.0 {
        return Ok(Rational::zero());
    }
    let bits = v.to_bits();
    let sign = if bits >> 63 == 1 { -1i64 } else { 1 };
    let exp_bits = ((bits >> 52) & 0x7ff) as i64;
    let frac = bits & ((1u64 << 52) - 1);
    let (mut mant, mut exp) = if exp_bits == 0 {
        (frac as i128, -1074i64)
    } else {
        ((frac | (1u64 << 52)) as i128, exp_bits - 1075)
    };
    while mant % 2 == 0 && mant != 0 {
        mant /= 2;
        exp += 1;
    }
    let ok = |x: i128| -> crate::Result<i64> {
        x.to_i64()
            .ok_or_else(|| crate::Error::Domain(format!("constant {v} exceeds exact rational range")))
    };
    if exp >= 0 {
        if exp > 62 {
            return Err(crate::Error::Domain(format!(
                "constant {v} exceeds exact rational range"
            )));
        }
        Ok(Rational::from_integer(ok(sign as i128 * mant * (1i128 << exp))?))
    } else {
        if -exp > 62 {
            return Err(crate::Error::Domain(format!(
                "constant {v} exceeds exact rational range"
            )));
        }
        Ok(Rational::new(ok(sign as i128 * mant)?, ok(1i128 << (-exp))?))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn eval(e: &Expr, x: f64) -> f64 {
        // scalar reference evaluator for expression tests only
        match e {
            Expr::Const(c) => *c.numer() as f64 / *c.denom() as f64,
            Expr::Sym(_) => x,
            Expr::Add(a, b) => eval(a, x) + eval(b, x),
            Expr::Sub(a, b) => eval(a, x) - eval(b, x),
            Expr::Mul(a, b) => eval(a, x) * eval(b, x),
            Expr::Div(a, b) => eval(a, x) / eval(b, x),
            Expr::Neg(a) => -eval(a, x),
            Expr::Pow(a, r) => eval(a, x).powf(*r.numer() as f64 / *r.denom() as f64),
            Expr::Sin(a) => eval(a, x).sin(),
            Expr::Cos(a) => eval(a, x).cos(),
            Expr::Exp(a) => eval(a, x).exp(),
            Expr::Log(a) => eval(a, x).ln(),
            Expr::Sqrt(a) => eval(a, x).sqrt(),
        }
    }

    #[test]
    fn diff_power_rule() {
        let e = parse_expr("x1^2", &["x1"]).unwrap();
        let d = diff_expr(&e, "x1");
        for &x in &[0.3, 1.7, -2.2] {
            assert!((eval(&d, x) - 2.0 * x).abs() < 1e-14);
        }
    }

    #[test]
    fn diff_of_foreign_symbol_is_zero() {
        let e = parse_expr("sin(x2)", &["x1", "x2"]).unwrap();
        assert!(diff_expr(&e, "x1").is_zero());
    }

    #[test]
    fn diff_sqrt_chain() {
        let e = parse_expr("sqrt(1-r^2)", &["r"]).unwrap();
        let d = diff_expr(&e, "r");
        for &r in &[0.2f64, 0.5, 0.9] {
            let expect = -r / (1.0 - r * r).sqrt();
            assert!((eval(&d, r) - expect).abs() < 1e-13);
        }
    }

    #[test]
    fn display_round_trips_by_value() {
        let texts = [
            "sin(x1)^2 + 3",
            "1/(1 + x1^2)",
            "-x1^2 + 2*x1 - 7/3",
            "exp(2*x1)*cos(x1) - sqrt(x1 + 5)",
            "x1^(3/2) + x1^(-2)",
        ];
        for t in texts {
            let e = parse_expr(t, &["x1"]).unwrap();
            let printed = e.to_string();
            let e2 = parse_expr(&printed, &["x1"]).unwrap();
            for &x in &[0.4, 1.3, 2.9] {
                let (a, b) = (eval(&e, x), eval(&e2, x));
                assert_eq!(a.to_bits(), b.to_bits(), "{t} vs {printed} at {x}");
            }
        }
    }

    #[test]
    fn rational_from_f64_exact() {
        for &v in &[0.5, 0.1, 6.283185307179586, -3.25, 1.0 / 3.0] {
            let r = rational_from_f64(v).unwrap();
            assert_eq!(*r.numer() as f64 / *r.denom() as f64, v);
        }
    }
}
