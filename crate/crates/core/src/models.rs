//! Manifold zoo: spheres, flat tori, products, perturbations, and the
//! Page metric.

use crate::expr::{parse_expr, Expr, Rational};
use crate::geometry::{AxisQuad, Chart, QuadScheme};
use crate::{Error, Result};
use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

pub const TWO_PI: f64 = std::f64::consts::TAU;

fn torus_axis_quad(n: usize) -> AxisQuad {
    AxisQuad {
        scheme: QuadScheme::TrapezoidPeriodic,
        nodes: if n <= 5 { 12 } else { 8 },
    }
}

/// Round sphere of dimension n in nested polar coordinates
/// (θ1, …, θ_{n−1}, φ): g = R²(dθ1² + sin²θ1 dθ2² + … ).
pub fn round_sphere(n: usize, radius: f64) -> Result<Chart> {
    if !(2..=7).contains(&n) {
        return Err(Error::DimensionOutOfRange(format!(
            "sphere dimension {n} outside 2..=7"
        )));
    }
    let mut coords: Vec<String> = (1..n).map(|i| format!("th{i}")).collect();
    coords.push("phi".to_string());
    let r2 = Expr::sym("R2");
    let mut metric = vec![vec![Expr::zero(); n]; n];
    for i in 0..n {
        let mut comp = r2.clone();
        for k in 0..i {
            comp = Expr::mul(
                comp,
                Expr::pow(Expr::sin(Expr::sym(&coords[k])), Rational::from_integer(2)),
            );
        }
        metric[i][i] = comp;
    }
    // a hair of polar margin keeps Gauss nodes off the worst coordinate
    // degeneracy; the omitted caps hold O(margin^n) volume, far below the
    // 1e-8 quadrature contract
    let m = 1e-3;
    let mut domain = vec![(m, std::f64::consts::PI - m); n - 1];
    domain.push((0.0, TWO_PI));
    let mut periodic = vec![false; n - 1];
    periodic.push(true);
    let mut quad = vec![
        AxisQuad {
            scheme: QuadScheme::GaussLegendre,
            nodes: 24,
        };
        n - 1
    ];
    quad.push(AxisQuad {
        scheme: QuadScheme::TrapezoidPeriodic,
        nodes: 24,
    });
    Chart::new(
        &format!("sphere{n}"),
        coords,
        metric,
        domain,
        periodic,
        quad,
        vec![("R2".to_string(), radius * radius)],
        false,
    )
}

/// Flat torus with the identity metric and the given periods.
pub fn flat_torus(n: usize, periods: &[f64]) -> Result<Chart> {
    assert_eq!(periods.len(), n);
    if periods.iter().any(|&p| p <= 0.0) {
        return Err(Error::Validation("torus periods must be positive".into()));
    }
    let coords: Vec<String> = (1..=n).map(|i| format!("x{i}")).collect();
    let mut metric = vec![vec![Expr::zero(); n]; n];
    for (i, row) in metric.iter_mut().enumerate() {
        row[i] = Expr::one();
    }
    let domain = periods.iter().map(|&p| (0.0, p)).collect();
    Chart::new(
        &format!("torus{n}"),
        coords,
        metric,
        domain,
        vec![true; n],
        vec![torus_axis_quad(n); n],
        vec![],
        false,
    )
}

pub fn flat_torus_2pi(n: usize) -> Result<Chart> {
    flat_torus(n, &vec![TWO_PI; n])
}

/// Riemannian product with block-diagonal metric. Clashing coordinate or
/// parameter names from the second factor get a `_b` suffix.
pub fn product(a: &Chart, b: &Chart) -> Result<Chart> {
    let n = a.n + b.n;
    if n > 8 {
        return Err(Error::DimensionOutOfRange(format!(
            "product dimension {n} exceeds 8"
        )));
    }
    let mut coords = a.coords.clone();
    let mut rename: Vec<(String, String)> = Vec::new();
    for c in &b.coords {
        let mut name = c.clone();
        while coords.contains(&name) {
            name.push_str("_b");
        }
        if name != *c {
            rename.push((c.clone(), name.clone()));
        }
        coords.push(name);
    }
    let mut params = a.params.clone();
    let mut param_rename: Vec<(String, String)> = Vec::new();
    for (p, v) in &b.params {
        let mut name = p.clone();
        while params.iter().any(|(q, _)| q == &name) {
            name.push_str("_b");
        }
        if name != *p {
            param_rename.push((p.clone(), name.clone()));
        }
        params.push((name, *v));
    }
    let subst = |e: &Expr| -> Expr {
        e.substitute(&|s: &str| {
            rename
                .iter()
                .chain(param_rename.iter())
                .find(|(old, _)| old == s)
                .map(|(_, new)| Expr::sym(new))
        })
    };
    let mut metric = vec![vec![Expr::zero(); n]; n];
    for i in 0..a.n {
        for j in 0..a.n {
            metric[i][j] = a.metric[i][j].clone();
        }
    }
    for i in 0..b.n {
        for j in 0..b.n {
            metric[a.n + i][a.n + j] = subst(&b.metric[i][j]);
        }
    }
    let mut domain = a.domain.clone();
    domain.extend_from_slice(&b.domain);
    let mut periodic = a.periodic.clone();
    periodic.extend_from_slice(&b.periodic);
    let mut quad = a.quad.clone();
    quad.extend_from_slice(&b.quad);
    Chart::new(
        &format!("{}x{}", a.name, b.name),
        coords,
        metric,
        domain,
        periodic,
        quad,
        params,
        a.pointwise_only || b.pointwise_only,
    )
}

/// Parameters of the Page metric: ν is the root of
/// ν⁴ + 4ν³ − 6ν² + 12ν − 3 in (0,1), c = (3 + 6ν² − ν⁴)⁻¹, and α, β, γ
/// are functions of r with ν, c bound (αβ = c, γ² = c(1 − r²)).
pub struct PageParameters {
    pub nu: f64,
    pub c: f64,
    pub alpha: Expr,
    pub beta: Expr,
    pub gamma: Expr,
}

pub fn page_quartic(nu: f64) -> f64 {
    nu * nu * nu * nu + 4.0 * nu * nu * nu - 6.0 * nu * nu + 12.0 * nu - 3.0
}

impl PageParameters {
    pub fn compute() -> PageParameters {
        // Newton iteration seeded at 0.28
        let mut nu = 0.28f64;
        for _ in 0..60 {
            let f = page_quartic(nu);
            let fp = 4.0 * nu * nu * nu + 12.0 * nu * nu - 12.0 * nu + 12.0;
            let step = f / fp;
            nu -= step;
            if step.abs() < 1e-15 {
                break;
            }
        }
        let c = 1.0 / (3.0 + 6.0 * nu * nu - nu * nu * nu * nu);
        let syms = ["r", "nu", "c"];
        let beta_sq = parse_expr(
            "c^2 * (nu^2 - r^2) * (3 - nu^2 - (1 + nu^2)*r^2) / (1 - r^2)",
            &syms,
        )
        .unwrap();
        let beta = Expr::sqrt(beta_sq);
        let alpha = Expr::div(Expr::sym("c"), beta.clone());
        let gamma = parse_expr("sqrt(c * (1 - r^2))", &syms).unwrap();
        PageParameters {
            nu,
            c,
            alpha,
            beta,
            gamma,
        }
    }
}

/// The Page metric on ℂP² # conj(ℂP²), written in coordinates
/// (r, τ, ρ, θ) with the one-form σ = dτ − 4 sin²(ρ/2) dθ:
/// g = α² dr² + β² σ² + γ² (dρ² + sin²ρ dθ²).
/// Coordinate degeneracies keep this chart pointwise-only.
pub fn page_metric() -> Result<Chart> {
    let p = PageParameters::compute();
    let coords = vec![
        "r".to_string(),
        "tau".to_string(),
        "rho".to_string(),
        "theta".to_string(),
    ];
    let syms = ["r", "tau", "rho", "theta", "nu", "c"];
    let e = |s: &str| parse_expr(s, &syms).unwrap();
    let beta_sq = e("c^2 * (nu^2 - r^2) * (3 - nu^2 - (1 + nu^2)*r^2) / (1 - r^2)");
    let alpha_sq = Expr::div(
        Expr::pow(Expr::sym("c"), Rational::from_integer(2)),
        beta_sq.clone(),
    );
    let gamma_sq = e("c * (1 - r^2)");
    let s2 = e("sin(rho/2)^2");
    let mut metric = vec![vec![Expr::zero(); 4]; 4];
    metric[0][0] = alpha_sq;
    metric[1][1] = beta_sq.clone();
    let g_tau_theta = Expr::neg(Expr::mul(
        Expr::int(4),
        Expr::mul(beta_sq.clone(), s2.clone()),
    ));
    metric[1][3] = g_tau_theta.clone();
    metric[3][1] = g_tau_theta;
    metric[2][2] = gamma_sq.clone();
    metric[3][3] = Expr::add(
        Expr::mul(
            Expr::int(16),
            Expr::mul(beta_sq, Expr::pow(s2, Rational::from_integer(2))),
        ),
        Expr::mul(
            gamma_sq,
            Expr::pow(Expr::sin(Expr::sym("rho")), Rational::from_integer(2)),
        ),
    );
    let domain = vec![
        (0.05 * p.nu, 0.95 * p.nu),
        (0.0, TWO_PI),
        (0.1, std::f64::consts::PI - 0.1),
        (0.0, TWO_PI),
    ];
    Chart::new(
        "page",
        coords,
        metric,
        domain,
        vec![false, true, false, true],
        vec![
            AxisQuad {
                scheme: QuadScheme::GaussLegendre,
                nodes: 16,
            },
            AxisQuad {
                scheme: QuadScheme::TrapezoidPeriodic,
                nodes: 8,
            },
            AxisQuad {
                scheme: QuadScheme::GaussLegendre,
                nodes: 16,
            },
            AxisQuad {
                scheme: QuadScheme::TrapezoidPeriodic,
                nodes: 8,
            },
        ],
        vec![("nu".to_string(), p.nu), ("c".to_string(), p.c)],
        true,
    )
}

/// Einstein product of the Page metric with a 2-sphere whose Ricci
/// constant matches 3(1 + ν²).
pub fn page_einstein_product() -> Result<Chart> {
    let p = PageParameters::compute();
    let radius = 1.0 / (3.0 * (1.0 + p.nu * p.nu)).sqrt();
    product(&page_metric()?, &round_sphere(2, radius)?)
}

/// Multiply every metric component by e^{2Υ}.
pub fn conformal_perturb(chart: &Chart, upsilon: &Expr) -> Result<Chart> {
    for s in upsilon.symbols() {
        if chart.coord_index(&s).is_none() && chart.param(&s).is_none() {
            return Err(Error::UnknownSymbol(s));
        }
    }
    let factor = Expr::exp(Expr::mul(Expr::int(2), upsilon.clone()));
    let mut out = chart.clone();
    out.name = format!("{}_conf", chart.name);
    for i in 0..chart.n {
        for j in 0..chart.n {
            if !out.metric[i][j].is_zero() {
                out.metric[i][j] = Expr::mul(factor.clone(), out.metric[i][j].clone());
            }
        }
    }
    Ok(out)
}

/// Seeded random trigonometric perturbation of the flat torus:
/// g_ij = δ_ij + ε Σ_m a_m trig(x·k_m). Coefficients are exact rationals
/// so charts serialize losslessly. `max_active` caps how many coordinates
/// the perturbation uses (quadrature cost grows with the active count).
pub fn generic_metric_limited(
    n: usize,
    seed: u64,
    eps: f64,
    max_active: usize,
) -> Result<Chart> {
    if eps > 0.45 {
        return Err(Error::Validation(format!("perturbation eps {eps} too large")));
    }
    let base = flat_torus_2pi(n)?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let nact = max_active.min(n).max(1);
    let mut metric = base.metric.clone();
    // eps as exact rational with denominator 1024
    let eps_rat = Expr::Const(Rational::new((eps * 1024.0).round() as i64, 1024));
    for i in 0..n {
        for j in i..n {
            let mut pert = Expr::zero();
            for _ in 0..2 {
                let c1 = rng.random_range(0..nact);
                let c2 = rng.random_range(0..nact);
                let amp = Expr::Const(Rational::new(rng.random_range(-512..=512), 1024));
                let phase_cos = rng.random_bool(0.5);
                let f1 = rng.random_range(1..=2);
                let arg = if c1 == c2 {
                    Expr::mul(Expr::int(f1), Expr::sym(&base.coords[c1]))
                } else {
                    Expr::add(
                        Expr::mul(Expr::int(f1), Expr::sym(&base.coords[c1])),
                        Expr::sym(&base.coords[c2]),
                    )
                };
                let trig = if phase_cos {
                    Expr::cos(arg)
                } else {
                    Expr::sin(arg)
                };
                pert = Expr::add(pert, Expr::mul(amp, trig));
            }
            let term = Expr::mul(eps_rat.clone(), pert);
            metric[i][j] = Expr::add(metric[i][j].clone(), term.clone());
            if i != j {
                metric[j][i] = metric[i][j].clone();
            }
        }
    }
    let chart = Chart::new(
        &format!("generic{n}_s{seed}"),
        base.coords.clone(),
        metric,
        base.domain.clone(),
        base.periodic.clone(),
        base.quad.clone(),
        vec![],
        false,
    )?;
    // positivity over a coarse grid plus random samples
    let mut pts = grid_points(&chart, 4);
    let mut rng2 = ChaCha8Rng::seed_from_u64(seed ^ 0x9e3779b97f4a7c15);
    for _ in 0..32 {
        pts.push(chart.sample_interior(&mut rng2, 0.0));
    }
    chart.check_positivity(&pts, 0.1)?;
    Ok(chart)
}

/// Seeded random perturbed torus using every coordinate.
pub fn generic_metric(n: usize, seed: u64, eps: f64) -> Result<Chart> {
    generic_metric_limited(n, seed, eps, n)
}

/// Frequency-1 perturbed torus for quadrature-based suites: the gentler
/// spectrum keeps trapezoid aliasing below the integral tolerances even
/// at reduced node counts.
pub fn suite_torus(n: usize, seed: u64, eps: f64) -> Result<Chart> {
    let base = flat_torus_2pi(n)?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let nact = 3.min(n);
    let mut metric = base.metric.clone();
    let eps_rat = Expr::Const(Rational::new((eps * 1024.0).round() as i64, 1024));
    for i in 0..n {
        for j in i..n {
            let c1 = rng.random_range(0..nact);
            let c2 = rng.random_range(0..nact);
            let amp = Expr::Const(Rational::new(rng.random_range(-512..=512), 1024));
            let arg = if c1 == c2 {
                Expr::sym(&base.coords[c1])
            } else {
                Expr::add(Expr::sym(&base.coords[c1]), Expr::sym(&base.coords[c2]))
            };
            let trig = if rng.random_bool(0.5) {
                Expr::cos(arg)
            } else {
                Expr::sin(arg)
            };
            let term = Expr::mul(eps_rat.clone(), Expr::mul(amp, trig));
            metric[i][j] = Expr::add(metric[i][j].clone(), term);
            if i != j {
                metric[j][i] = metric[i][j].clone();
            }
        }
    }
    let chart = Chart::new(
        &format!("suite_torus{n}_s{seed}"),
        base.coords.clone(),
        metric,
        base.domain.clone(),
        base.periodic.clone(),
        base.quad.clone(),
        vec![],
        false,
    )?;
    let mut pts = grid_points(&chart, 3);
    let mut rng2 = ChaCha8Rng::seed_from_u64(seed ^ 0x9e3779b97f4a7c15);
    for _ in 0..16 {
        pts.push(chart.sample_interior(&mut rng2, 0.0));
    }
    chart.check_positivity(&pts, 0.1)?;
    Ok(chart)
}

/// Coarse rectangular grid over the chart domain (interior points).
pub fn grid_points(chart: &Chart, per_axis: usize) -> Vec<Vec<f64>> {
    let mut pts = vec![vec![]];
    for ax in 0..chart.n {
        let (lo, hi) = chart.domain[ax];
        let mut next = Vec::new();
        for p in &pts {
            for k in 0..per_axis {
                let frac = (k as f64 + 0.5) / per_axis as f64;
                let mut q = p.clone();
                q.push(lo + frac * (hi - lo));
                next.push(q);
            }
        }
        pts = next;
    }
    pts
}

/// Zonal spherical harmonic of degree k on the sphere chart (depends only
/// on θ1): Y1 = cos θ1 (eigenvalue n/R²), Y2 = cos²θ1 − 1/(n+1)
/// (eigenvalue 2(n+1)/R²).
pub fn zonal_harmonic(n: usize, k: usize) -> Result<Expr> {
    let th = Expr::sym("th1");
    match k {
        1 => Ok(Expr::cos(th)),
        2 => Ok(Expr::sub(
            Expr::pow(Expr::cos(th), Rational::from_integer(2)),
            Expr::Const(Rational::new(1, (n + 1) as i64)),
        )),
        _ => Err(Error::UnsupportedId {
            id: format!("Y{k}"),
            why: "only zonal harmonics of degree 1 and 2 are built in".into(),
        }),
    }
}

/// Surface area of the round n-sphere of the given radius.
pub fn sphere_area(n: usize, radius: f64) -> f64 {
    // 2 pi^{(n+1)/2} / Gamma((n+1)/2) * r^n
    fn gamma_half_int(twice: usize) -> f64 {
        // Gamma(twice/2)
        if twice % 2 == 0 {
            let mut acc = 1.0;
            for k in 2..(twice / 2) {
                acc *= k as f64;
            }
            if twice / 2 == 1 {
                1.0
            } else {
                acc
            }
        } else {
            let mut acc = std::f64::consts::PI.sqrt();
            let mut x = 0.5;
            while (2.0 * x) as usize + 1 <= twice {
                if ((2.0 * x) as usize) + 2 > twice {
                    break;
                }
                acc *= x;
                x += 1.0;
            }
            acc
        }
    }
    let pi = std::f64::consts::PI;
    2.0 * pi.powf((n as f64 + 1.0) / 2.0) / gamma_half_int(n + 1) * radius.powi(n as i32)
}
