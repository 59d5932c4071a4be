//! Coordinate charts: metric expressions, domain, quadrature descriptor.

use crate::expr::Expr;
use crate::{Error, Result};
use rand::Rng;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum QuadScheme {
    TrapezoidPeriodic,
    GaussLegendre,
}

#[derive(Clone, Debug)]
pub struct AxisQuad {
    pub scheme: QuadScheme,
    pub nodes: usize,
}

/// A coordinate patch with symmetric metric expression components.
#[derive(Clone)]
pub struct Chart {
    pub name: String,
    pub n: usize,
    pub coords: Vec<String>,
    pub metric: Vec<Vec<Expr>>,
    pub domain: Vec<(f64, f64)>,
    pub periodic: Vec<bool>,
    pub quad: Vec<AxisQuad>,
    pub params: Vec<(String, f64)>,
    pub pointwise_only: bool,
}

impl Chart {
    #[allow(clippy::too_many_arguments)]
    pub fn new(
        name: &str,
        coords: Vec<String>,
        metric: Vec<Vec<Expr>>,
        domain: Vec<(f64, f64)>,
        periodic: Vec<bool>,
        quad: Vec<AxisQuad>,
        params: Vec<(String, f64)>,
        pointwise_only: bool,
    ) -> Result<Chart> {
        let n = coords.len();
        if !(2..=8).contains(&n) {
            return Err(Error::DimensionOutOfRange(format!(
                "chart dimension {n} outside 2..=8"
            )));
        }
        if metric.len() != n || metric.iter().any(|row| row.len() != n) {
            return Err(Error::Validation("metric must be n x n".into()));
        }
        for i in 0..n {
            for j in 0..i {
                if metric[i][j] != metric[j][i] {
                    return Err(Error::Validation(format!(
                        "metric component g[{}][{}] differs from g[{}][{}]",
                        i + 1,
                        j + 1,
                        j + 1,
                        i + 1
                    )));
                }
            }
        }
        if domain.len() != n || periodic.len() != n || quad.len() != n {
            return Err(Error::Validation(
                "domain, periodicity and quadrature must cover every axis".into(),
            ));
        }
        for (lo, hi) in &domain {
            if !(lo.is_finite() && hi.is_finite() && lo < hi) {
                return Err(Error::Validation(format!("bad domain [{lo}, {hi}]")));
            }
        }
        let chart = Chart {
            name: name.to_string(),
            n,
            coords,
            metric,
            domain,
            periodic,
            quad,
            params,
            pointwise_only,
        };
        chart.check_symbols()?;
        Ok(chart)
    }

    fn check_symbols(&self) -> Result<()> {
        for row in &self.metric {
            for e in row {
                for s in e.symbols() {
                    if !self.coords.iter().any(|c| *c == s)
                        && !self.params.iter().any(|(p, _)| *p == s)
                    {
                        return Err(Error::UnknownSymbol(s));
                    }
                }
            }
        }
        Ok(())
    }

    pub fn coord_index(&self, name: &str) -> Option<usize> {
        self.coords.iter().position(|c| c == name)
    }

    pub fn param(&self, name: &str) -> Option<f64> {
        self.params
            .iter()
            .find(|(p, _)| p == name)
            .map(|(_, v)| *v)
    }

    /// Indices of coordinates that actually appear in the metric.
    pub fn active_coords(&self) -> Vec<usize> {
        let mut active = Vec::new();
        for (i, c) in self.coords.iter().enumerate() {
            if self.metric.iter().flatten().any(|e| e.references(c)) {
                active.push(i);
            }
        }
        active
    }

    /// Uniform interior sample, shrinking each axis by `margin` of its
    /// length (plus at least 0.1 rad for non-periodic angular axes, which
    /// keeps sphere samples away from the coordinate poles).
    pub fn sample_interior(&self, rng: &mut impl Rng, margin: f64) -> Vec<f64> {
        self.domain
            .iter()
            .zip(self.periodic.iter())
            .map(|(&(lo, hi), &periodic)| {
                let len = hi - lo;
                let pad = if periodic {
                    0.0
                } else {
                    (len * margin).max(0.1_f64.min(0.4 * len))
                };
                rng.random_range((lo + pad)..(hi - pad))
            })
            .collect()
    }

    /// Check symmetric positive definiteness of the metric at `points`
    /// (minimum eigenvalue above `floor`).
    pub fn check_positivity(&self, points: &[Vec<f64>], floor: f64) -> Result<()> {
        for p in points {
            let min = self.min_metric_eigenvalue(p)?;
            if min <= floor {
                return Err(Error::PositivityViolation(format!(
                    "metric eigenvalue {min:.3e} <= {floor:.1e} at {p:?}"
                )));
            }
        }
        Ok(())
    }

    pub fn min_metric_eigenvalue(&self, point: &[f64]) -> Result<f64> {
        let vals = self.metric_values(point)?;
        let m = nalgebra::DMatrix::from_fn(self.n, self.n, |i, j| vals[i][j]);
        let eig = m.symmetric_eigenvalues();
        Ok(eig.iter().cloned().fold(f64::INFINITY, f64::min))
    }

    pub fn metric_values(&self, point: &[f64]) -> Result<Vec<Vec<f64>>> {
        let sh = crate::jet::shape(0, 0, 0)?;
        let lookup = |name: &str| -> Option<crate::jet::SymBinding> {
            if let Some(i) = self.coord_index(name) {
                return Some(crate::jet::SymBinding::Const(point[i]));
            }
            self.param(name).map(crate::jet::SymBinding::Const)
        };
        let mut out = vec![vec![0.0; self.n]; self.n];
        for i in 0..self.n {
            for j in 0..self.n {
                out[i][j] = crate::jet::eval_expr_jet(&self.metric[i][j], &sh, &lookup)?.value();
            }
        }
        Ok(out)
    }

    /// Total coordinate volume of the domain box (not the Riemannian
    /// volume); used for inactive-axis quadrature factors.
    pub fn axis_length(&self, axis: usize) -> f64 {
        self.domain[axis].1 - self.domain[axis].0
    }
}
