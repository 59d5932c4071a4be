//! Quadrature on closed charts, and the exact Fourier toolkit on flat tori.
//!
//! Grids are built only over the axes an integrand actually depends on;
//! axes the integrand is constant along contribute their coordinate length
//! as a factor. Node sums use Neumaier compensation in a fixed order, so
//! results are reproducible regardless of evaluation scheduling.

pub mod fourier;

use crate::expr::Expr;
use crate::geometry::{AxisQuad, Chart, FrameContext, QuadScheme};
use crate::{Error, Result};

/// Node-count profile for the verification suites.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Profile {
    Smoke,
    Standard,
    Deep,
}

impl Profile {
    pub fn scale(&self, nodes: usize) -> usize {
        match self {
            Profile::Smoke => (nodes / 2).max(4),
            Profile::Standard => nodes,
            Profile::Deep => nodes * 2,
        }
    }

    pub fn parse(s: &str) -> Result<Profile> {
        match s {
            "smoke" => Ok(Profile::Smoke),
            "standard" => Ok(Profile::Standard),
            "deep" => Ok(Profile::Deep),
            other => Err(Error::Validation(format!("unknown profile `{other}`"))),
        }
    }

    pub fn name(&self) -> &'static str {
        match self {
            Profile::Smoke => "smoke",
            Profile::Standard => "standard",
            Profile::Deep => "deep",
        }
    }
}

/// Gauss–Legendre nodes and weights on [-1, 1] by Newton iteration.
pub fn gauss_legendre(n: usize) -> (Vec<f64>, Vec<f64>) {
    let mut nodes = vec![0.0; n];
    let mut weights = vec![0.0; n];
    let m = n.div_ceil(2);
    for i in 0..m {
        // Chebyshev-based initial guess
        let mut x = (std::f64::consts::PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
        let mut dp = 0.0;
        for _ in 0..100 {
            // evaluate P_n and P_n' by recurrence
            let mut p0 = 1.0;
            let mut p1 = x;
            for k in 2..=n {
                let p2 = ((2 * k - 1) as f64 * x * p1 - (k - 1) as f64 * p0) / k as f64;
                p0 = p1;
                p1 = p2;
            }
            dp = n as f64 * (x * p1 - p0) / (x * x - 1.0);
            let dx = p1 / dp;
            x -= dx;
            if dx.abs() < 1e-15 {
                break;
            }
        }
        nodes[i] = -x;
        nodes[n - 1 - i] = x;
        let w = 2.0 / ((1.0 - x * x) * dp * dp);
        weights[i] = w;
        weights[n - 1 - i] = w;
    }
    (nodes, weights)
}

/// Nodes and weights for one axis on its domain interval.
pub fn axis_nodes(rule: &AxisQuad, domain: (f64, f64), nodes: usize) -> (Vec<f64>, Vec<f64>) {
    let (lo, hi) = domain;
    let len = hi - lo;
    match rule.scheme {
        QuadScheme::TrapezoidPeriodic => {
            let h = len / nodes as f64;
            (
                (0..nodes).map(|k| lo + k as f64 * h).collect(),
                vec![h; nodes],
            )
        }
        QuadScheme::GaussLegendre => {
            let (xs, ws) = gauss_legendre(nodes);
            (
                xs.iter().map(|x| lo + 0.5 * len * (x + 1.0)).collect(),
                ws.iter().map(|w| 0.5 * len * w).collect(),
            )
        }
    }
}

/// A product grid over the active axes; weights already include the
/// coordinate lengths of the inactive axes.
pub struct Grid {
    pub points: Vec<Vec<f64>>,
    pub weights: Vec<f64>,
}

fn active_union(chart: &Chart, extra: &[&Expr]) -> Vec<usize> {
    let mut active = chart.active_coords();
    for e in extra {
        for s in e.symbols() {
            if let Some(i) = chart.coord_index(&s) {
                if !active.contains(&i) {
                    active.push(i);
                }
            }
        }
    }
    active.sort_unstable();
    active
}

/// Build the quadrature grid for integrands depending on the chart metric
/// and the given extra fields.
pub fn build_grid(chart: &Chart, profile: Profile, extra: &[&Expr]) -> Result<Grid> {
    build_grid_scaled(chart, profile, extra, 1.0)
}

fn build_grid_scaled(
    chart: &Chart,
    profile: Profile,
    extra: &[&Expr],
    node_factor: f64,
) -> Result<Grid> {
    if chart.pointwise_only {
        return Err(Error::Validation(format!(
            "chart `{}` is pointwise-only; it has no quadrature grid",
            chart.name
        )));
    }
    let active = active_union(chart, extra);
    let mut factor = 1.0;
    for ax in 0..chart.n {
        if !active.contains(&ax) {
            factor *= chart.axis_length(ax);
        }
    }
    let mut axes: Vec<(usize, Vec<f64>, Vec<f64>)> = Vec::new();
    for &ax in &active {
        let base = profile.scale(chart.quad[ax].nodes);
        let count = ((base as f64 * node_factor).round() as usize).max(3);
        let (xs, ws) = axis_nodes(&chart.quad[ax], chart.domain[ax], count);
        axes.push((ax, xs, ws));
    }
    let mut points = vec![vec![0.0; chart.n]];
    // seed interior midpoints on inactive axes so parameters stay valid
    for ax in 0..chart.n {
        points[0][ax] = 0.5 * (chart.domain[ax].0 + chart.domain[ax].1);
    }
    let mut weights = vec![factor];
    for (ax, xs, ws) in &axes {
        let mut np = Vec::with_capacity(points.len() * xs.len());
        let mut nw = Vec::with_capacity(points.len() * xs.len());
        for (p, w) in points.iter().zip(weights.iter()) {
            for (x, wx) in xs.iter().zip(ws.iter()) {
                let mut q = p.clone();
                q[*ax] = *x;
                np.push(q);
                nw.push(w * wx);
            }
        }
        points = np;
        weights = nw;
    }
    Ok(Grid { points, weights })
}

/// Compensated (Neumaier) summation in index order.
pub fn neumaier_sum(values: impl IntoIterator<Item = f64>) -> f64 {
    let mut sum = 0.0f64;
    let mut comp = 0.0f64;
    for v in values {
        let t = sum + v;
        if sum.abs() >= v.abs() {
            comp += (sum - t) + v;
        } else {
            comp += (v - t) + sum;
        }
        sum = t;
    }
    sum + comp
}

pub struct Integral {
    pub value: f64,
    pub est_rel_err: Option<f64>,
}

/// Integrate `k` simultaneous outputs over the grid. The evaluator fills
/// `out` with the integrand values at the node (without quadrature weight).
pub fn integrate_multi(
    grid: &Grid,
    k: usize,
    eval: &mut dyn FnMut(&[f64], &mut [f64]) -> Result<()>,
) -> Result<Vec<f64>> {
    let mut node_vals: Vec<Vec<f64>> = vec![Vec::with_capacity(grid.points.len()); k];
    let mut buf = vec![0.0; k];
    for (p, w) in grid.points.iter().zip(grid.weights.iter()) {
        eval(p, &mut buf)?;
        for (s, v) in node_vals.iter_mut().zip(buf.iter()) {
            s.push(v * w);
        }
    }
    Ok(node_vals
        .into_iter()
        .map(|vals| neumaier_sum(vals))
        .collect())
}

/// ∫ field dvol over a closed chart, with an error estimate from one
/// node-halving refinement when `refine` is set.
pub fn integrate_expr_field(
    chart: &Chart,
    profile: Profile,
    field: &Expr,
    refine: bool,
) -> Result<Integral> {
    let mut ctx = FrameContext::from_chart(chart);
    ctx.ensure_active(&[field]);
    let eval_on = |grid: &Grid| -> Result<f64> {
        let vals = integrate_multi(grid, 1, &mut |p, out| {
            let frame = ctx.frame(p, 0)?;
            let sd = frame.sqrt_det(0)?.at(0).value();
            let f = frame.eval_field(field, 0)?.value();
            out[0] = f * sd;
            Ok(())
        })?;
        Ok(vals[0])
    };
    let grid = build_grid(chart, profile, &[field])?;
    let value = eval_on(&grid)?;
    if !refine {
        return Ok(Integral {
            value,
            est_rel_err: None,
        });
    }
    let coarse_grid = build_grid_scaled(chart, profile, &[field], 0.5)?;
    let coarse = eval_on(&coarse_grid)?;
    let est = (value - coarse).abs() / value.abs().max(1.0);
    if est > 1e-6 {
        return Err(Error::NonConvergence(format!(
            "refinement changed integral by {est:.3e} relative"
        )));
    }
    Ok(Integral {
        value,
        est_rel_err: Some(est),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::expr::parse_expr;
    use crate::models;

    #[test]
    fn gauss_legendre_integrates_polynomials_exactly() {
        let (xs, ws) = gauss_legendre(8);
        // degree up to 15 exact
        for deg in [0usize, 3, 8, 15] {
            let num: f64 = xs
                .iter()
                .zip(ws.iter())
                .map(|(x, w)| w * x.powi(deg as i32))
                .sum();
            let exact = if deg % 2 == 1 {
                0.0
            } else {
                2.0 / (deg as f64 + 1.0)
            };
            assert!((num - exact).abs() < 1e-13, "deg {deg}: {num} vs {exact}");
        }
    }

    #[test]
    fn trapezoid_exact_below_nyquist() {
        let t2 = models::flat_torus_2pi(2).unwrap();
        let f = parse_expr("sin(x1)^2", &["x1", "x2"]).unwrap();
        let i = integrate_expr_field(&t2, Profile::Standard, &f, true).unwrap();
        let expect = 2.0 * std::f64::consts::PI * std::f64::consts::PI;
        assert!((i.value - expect).abs() <= 1e-12 * expect);
    }

    #[test]
    fn sphere_volume_is_exact_to_1e8() {
        for n in [2usize, 4] {
            let s = models::round_sphere(n, 1.0).unwrap();
            let one = Expr::one();
            let i = integrate_expr_field(&s, Profile::Standard, &one, false).unwrap();
            let expect = models::sphere_area(n, 1.0);
            assert!(
                (i.value - expect).abs() <= 1e-8 * expect,
                "n={n}: {} vs {expect}",
                i.value
            );
        }
    }

    #[test]
    fn inactive_axes_multiply_by_length() {
        // integrand depends only on x1; other axes contribute 2 pi each
        let t4 = models::flat_torus_2pi(4).unwrap();
        let f = parse_expr("cos(x1)^2", &["x1"]).unwrap();
        let i = integrate_expr_field(&t4, Profile::Standard, &f, true).unwrap();
        let expect = std::f64::consts::PI * (models::TWO_PI).powi(3);
        assert!((i.value - expect).abs() <= 1e-12 * expect);
    }
}
