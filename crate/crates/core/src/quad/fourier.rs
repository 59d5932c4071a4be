//! Exact per-mode Fourier fields on flat tori: Poisson solves, the E
//! construction, and TT projection realizing ker δ ≅ S²_TT ⊕ C^∞.

use crate::expr::{rational_from_f64, Expr};
use crate::{Error, Result};

/// Physical frequency vector κ_i = 2π m_i / L_i.
fn kappa(freq: &[i32], periods: &[f64]) -> Vec<f64> {
    freq.iter()
        .zip(periods.iter())
        .map(|(&m, &l)| std::f64::consts::TAU * m as f64 / l)
        .collect()
}

fn kappa_norm_sq(freq: &[i32], periods: &[f64]) -> f64 {
    kappa(freq, periods).iter().map(|k| k * k).sum()
}

/// Scalar field Σ (a cos(κ·x) + b sin(κ·x)).
#[derive(Clone, Debug)]
pub struct FourierScalar {
    pub n: usize,
    pub periods: Vec<f64>,
    /// (frequency multiples, cosine amplitude, sine amplitude)
    pub modes: Vec<(Vec<i32>, f64, f64)>,
}

/// Symmetric 2-tensor field with per-mode amplitude matrices.
#[derive(Clone, Debug)]
pub struct FourierSym2 {
    pub n: usize,
    pub periods: Vec<f64>,
    pub modes: Vec<ModeSym2>,
}

#[derive(Clone, Debug)]
pub struct ModeSym2 {
    pub freq: Vec<i32>,
    pub cos_amp: Vec<Vec<f64>>,
    pub sin_amp: Vec<Vec<f64>>,
}

impl FourierScalar {
    pub fn zero(n: usize, periods: Vec<f64>) -> Self {
        FourierScalar {
            n,
            periods,
            modes: vec![],
        }
    }

    pub fn single(n: usize, periods: Vec<f64>, freq: Vec<i32>, cos_amp: f64, sin_amp: f64) -> Self {
        FourierScalar {
            n,
            periods,
            modes: vec![(freq, cos_amp, sin_amp)],
        }
    }

    pub fn volume(&self) -> f64 {
        self.periods.iter().product()
    }

    pub fn mean(&self) -> f64 {
        self.modes
            .iter()
            .filter(|(f, _, _)| f.iter().all(|&m| m == 0))
            .map(|(_, a, _)| *a)
            .sum()
    }

    /// ∫ |∇^k f|² dvol (flat metric, exact per mode).
    pub fn sobolev_norm_sq(&self, k: usize) -> f64 {
        let vol = self.volume();
        let mut acc = 0.0;
        for (freq, a, b) in &self.modes {
            if freq.iter().all(|&m| m == 0) {
                if k == 0 {
                    acc += a * a * vol;
                }
                continue;
            }
            let k2 = kappa_norm_sq(freq, &self.periods);
            acc += k2.powi(k as i32) * (a * a + b * b) * vol / 2.0;
        }
        acc
    }

    /// Expression form (coordinates named as in the owning chart).
    pub fn to_expr(&self, coords: &[String]) -> Result<Expr> {
        let mut out = Expr::zero();
        for (freq, a, b) in &self.modes {
            let arg = phase_expr(freq, &self.periods, coords)?;
            if freq.iter().all(|&m| m == 0) {
                out = Expr::add(out, Expr::Const(rational_from_f64(*a)?));
                continue;
            }
            if *a != 0.0 {
                out = Expr::add(
                    out,
                    Expr::mul(Expr::Const(rational_from_f64(*a)?), Expr::cos(arg.clone())),
                );
            }
            if *b != 0.0 {
                out = Expr::add(
                    out,
                    Expr::mul(Expr::Const(rational_from_f64(*b)?), Expr::sin(arg)),
                );
            }
        }
        Ok(out)
    }
}

fn phase_expr(freq: &[i32], periods: &[f64], coords: &[String]) -> Result<Expr> {
    let mut arg = Expr::zero();
    for (i, &m) in freq.iter().enumerate() {
        if m == 0 {
            continue;
        }
        let rate = std::f64::consts::TAU / periods[i];
        let coeff = if (rate - 1.0).abs() < 1e-15 {
            Expr::int(m as i64)
        } else {
            Expr::Const(rational_from_f64(m as f64 * rate)?)
        };
        arg = Expr::add(arg, Expr::mul(coeff, Expr::sym(&coords[i])));
    }
    Ok(arg)
}

impl FourierSym2 {
    pub fn zero(n: usize, periods: Vec<f64>) -> Self {
        FourierSym2 {
            n,
            periods,
            modes: vec![],
        }
    }

    pub fn volume(&self) -> f64 {
        self.periods.iter().product()
    }

    pub fn single(n: usize, periods: Vec<f64>, mode: ModeSym2) -> Self {
        FourierSym2 {
            n,
            periods,
            modes: vec![mode],
        }
    }

    pub fn add_field(&self, other: &FourierSym2) -> FourierSym2 {
        let mut out = self.clone();
        out.modes.extend(other.modes.iter().cloned());
        out.merge_modes();
        out
    }

    pub fn scale(&self, c: f64) -> FourierSym2 {
        let mut out = self.clone();
        for m in &mut out.modes {
            for row in m.cos_amp.iter_mut().chain(m.sin_amp.iter_mut()) {
                for v in row.iter_mut() {
                    *v *= c;
                }
            }
        }
        out
    }

    fn merge_modes(&mut self) {
        let mut merged: Vec<ModeSym2> = Vec::new();
        for m in &self.modes {
            if let Some(e) = merged.iter_mut().find(|e| e.freq == m.freq) {
                for i in 0..self.n {
                    for j in 0..self.n {
                        e.cos_amp[i][j] += m.cos_amp[i][j];
                        e.sin_amp[i][j] += m.sin_amp[i][j];
                    }
                }
            } else {
                merged.push(m.clone());
            }
        }
        self.modes = merged;
    }

    pub fn trace(&self) -> FourierScalar {
        FourierScalar {
            n: self.n,
            periods: self.periods.clone(),
            modes: self
                .modes
                .iter()
                .map(|m| {
                    let a: f64 = (0..self.n).map(|i| m.cos_amp[i][i]).sum();
                    let b: f64 = (0..self.n).map(|i| m.sin_amp[i][i]).sum();
                    (m.freq.clone(), a, b)
                })
                .collect(),
        }
    }

    /// Per-mode divergence residual max |κ_i ĥ_ij| (exact zero for fields
    /// in ker δ).
    pub fn divergence_residual(&self) -> f64 {
        let mut worst = 0.0f64;
        for m in &self.modes {
            let k = kappa(&m.freq, &self.periods);
            for j in 0..self.n {
                let dc: f64 = (0..self.n).map(|i| k[i] * m.cos_amp[i][j]).sum();
                let ds: f64 = (0..self.n).map(|i| k[i] * m.sin_amp[i][j]).sum();
                worst = worst.max(dc.abs()).max(ds.abs());
            }
        }
        worst
    }

    pub fn require_divergence_free(&self) -> Result<()> {
        let scale = self.max_abs().max(1e-300);
        let res = self.divergence_residual();
        if res > 1e-12 * scale {
            return Err(Error::NotDivergenceFree(format!(
                "per-mode divergence residual {res:.3e}"
            )));
        }
        Ok(())
    }

    pub fn max_abs(&self) -> f64 {
        self.modes
            .iter()
            .flat_map(|m| m.cos_amp.iter().chain(m.sin_amp.iter()))
            .flatten()
            .fold(0.0f64, |acc, v| acc.max(v.abs()))
    }

    /// ∫ |∇^k h|² dvol (flat metric).
    pub fn sobolev_norm_sq(&self, k: usize) -> f64 {
        let vol = self.volume();
        let mut acc = 0.0;
        for m in &self.modes {
            let frob_c: f64 = m.cos_amp.iter().flatten().map(|v| v * v).sum();
            let frob_s: f64 = m.sin_amp.iter().flatten().map(|v| v * v).sum();
            if m.freq.iter().all(|&f| f == 0) {
                if k == 0 {
                    acc += frob_c * vol;
                }
                continue;
            }
            let k2 = kappa_norm_sq(&m.freq, &self.periods);
            acc += k2.powi(k as i32) * (frob_c + frob_s) * vol / 2.0;
        }
        acc
    }

    /// L² inner product ⟨h1, h2⟩ (flat metric).
    pub fn l2_inner(&self, other: &FourierSym2) -> f64 {
        let vol = self.volume();
        let mut acc = 0.0;
        for m in &self.modes {
            for o in &other.modes {
                if m.freq != o.freq {
                    continue;
                }
                let dot_c: f64 = m
                    .cos_amp
                    .iter()
                    .flatten()
                    .zip(o.cos_amp.iter().flatten())
                    .map(|(a, b)| a * b)
                    .sum();
                let dot_s: f64 = m
                    .sin_amp
                    .iter()
                    .flatten()
                    .zip(o.sin_amp.iter().flatten())
                    .map(|(a, b)| a * b)
                    .sum();
                if m.freq.iter().all(|&f| f == 0) {
                    acc += dot_c * vol;
                } else {
                    acc += (dot_c + dot_s) * vol / 2.0;
                }
            }
        }
        acc
    }

    /// Component expressions h_ij for chart construction.
    pub fn to_exprs(&self, coords: &[String]) -> Result<Vec<Vec<Expr>>> {
        let mut out = vec![vec![Expr::zero(); self.n]; self.n];
        for m in &self.modes {
            let zero_mode = m.freq.iter().all(|&f| f == 0);
            let arg = phase_expr(&m.freq, &self.periods, coords)?;
            for i in 0..self.n {
                for j in 0..self.n {
                    let mut term = Expr::zero();
                    if zero_mode {
                        if m.cos_amp[i][j] != 0.0 {
                            term = Expr::Const(rational_from_f64(m.cos_amp[i][j])?);
                        }
                    } else {
                        if m.cos_amp[i][j] != 0.0 {
                            term = Expr::add(
                                term,
                                Expr::mul(
                                    Expr::Const(rational_from_f64(m.cos_amp[i][j])?),
                                    Expr::cos(arg.clone()),
                                ),
                            );
                        }
                        if m.sin_amp[i][j] != 0.0 {
                            term = Expr::add(
                                term,
                                Expr::mul(
                                    Expr::Const(rational_from_f64(m.sin_amp[i][j])?),
                                    Expr::sin(arg.clone()),
                                ),
                            );
                        }
                    }
                    out[i][j] = Expr::add(out[i][j].clone(), term);
                }
            }
        }
        Ok(out)
    }
}

/// Solve Δf = −(Υ − mean Υ)/(n−1) with mean-zero f, exactly per mode:
/// f̂_κ = Υ̂_κ / ((n−1)|κ|²).
pub fn poisson_solve_torus(upsilon: &FourierScalar, n: usize) -> FourierScalar {
    let mut out = FourierScalar::zero(upsilon.n, upsilon.periods.clone());
    for (freq, a, b) in &upsilon.modes {
        if freq.iter().all(|&m| m == 0) {
            continue; // zero mode dropped by construction
        }
        let k2 = kappa_norm_sq(freq, &upsilon.periods);
        let d = (n as f64 - 1.0) * k2;
        out.modes.push((freq.clone(), a / d, b / d));
    }
    out
}

/// E(Υ) = ∇²f − (Δf/n) g + (Υ/n) g with f from `poisson_solve_torus`;
/// lands in ker δ with tr E(Υ) = Υ.
pub fn e_map(upsilon: &FourierScalar, n: usize) -> FourierSym2 {
    let dim = upsilon.n;
    let periods = upsilon.periods.clone();
    let mut out = FourierSym2::zero(dim, periods.clone());
    for (freq, a, b) in &upsilon.modes {
        let mut cos_amp = vec![vec![0.0; dim]; dim];
        let mut sin_amp = vec![vec![0.0; dim]; dim];
        if freq.iter().all(|&m| m == 0) {
            // f = 0: E = (mean/n) g
            for i in 0..dim {
                cos_amp[i][i] = a / n as f64;
            }
        } else {
            let k = kappa(freq, &periods);
            let k2: f64 = k.iter().map(|v| v * v).sum();
            // single mode: E = (amp/(n−1)) (δ − κ̂κ̂) on the same phase
            for i in 0..dim {
                for j in 0..dim {
                    let proj = (if i == j { 1.0 } else { 0.0 }) - k[i] * k[j] / k2;
                    cos_amp[i][j] = a / (n as f64 - 1.0) * proj;
                    sin_amp[i][j] = b / (n as f64 - 1.0) * proj;
                }
            }
        }
        out.modes.push(ModeSym2 {
            freq: freq.clone(),
            cos_amp,
            sin_amp,
        });
    }
    out.merge_modes();
    out
}

/// TT part of a divergence-free field: h_TT = h − E(tr h); per mode both
/// tr h_TT = 0 and δ h_TT = 0 hold exactly.
pub fn tt_project(h: &FourierSym2, n: usize) -> Result<FourierSym2> {
    h.require_divergence_free()?;
    let e = e_map(&h.trace(), n);
    let mut out = h.add_field(&e.scale(-1.0));
    // drop numerically dead modes
    out.modes.retain(|m| {
        m.cos_amp
            .iter()
            .chain(m.sin_amp.iter())
            .flatten()
            .any(|v| v.abs() > 1e-300)
    });
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn periods(n: usize) -> Vec<f64> {
        vec![std::f64::consts::TAU; n]
    }

    #[test]
    fn poisson_single_and_multi_mode() {
        let n = 4;
        let ups = FourierScalar {
            n,
            periods: periods(n),
            modes: vec![
                (vec![1, 0, 0, 0], 1.0, 0.0),
                (vec![0, 2, 0, 0], 0.0, 1.0),
            ],
        };
        let f = poisson_solve_torus(&ups, n);
        // cos x1 -> (1/3) cos x1 ; sin 2x2 -> (1/12) sin 2x2
        assert!((f.modes[0].1 - 1.0 / 3.0).abs() < 1e-15);
        assert!((f.modes[1].2 - 1.0 / 12.0).abs() < 1e-15);
    }

    #[test]
    fn poisson_drops_constants() {
        let n = 4;
        let ups = FourierScalar::single(n, periods(n), vec![0, 0, 0, 0], 2.5, 0.0);
        let f = poisson_solve_torus(&ups, n);
        assert!(f.modes.is_empty());
    }

    #[test]
    fn e_map_properties_per_mode() {
        let n = 4;
        let ups = FourierScalar::single(n, periods(n), vec![1, 0, 0, 0], 1.0, 0.0);
        let e = e_map(&ups, n);
        assert!(e.divergence_residual() < 1e-15);
        let tr = e.trace();
        assert!((tr.modes[0].1 - 1.0).abs() < 1e-15);
        // constant mode: E = (c/n) g
        let c = FourierScalar::single(n, periods(n), vec![0; 4], 2.0, 0.0);
        let ec = e_map(&c, n);
        assert!((ec.modes[0].cos_amp[0][0] - 0.5).abs() < 1e-15);
    }

    #[test]
    fn e_image_is_l2_orthogonal_to_tt() {
        let n = 4;
        let ups = FourierScalar::single(n, periods(n), vec![1, 0, 0, 0], 0.7, 0.3);
        let e = e_map(&ups, n);
        // TT mode on the same frequency: amplitude orthogonal to kappa, trace-free
        let mut cos_amp = vec![vec![0.0; n]; n];
        cos_amp[1][2] = 1.0;
        cos_amp[2][1] = 1.0;
        let tt = FourierSym2::single(
            n,
            periods(n),
            ModeSym2 {
                freq: vec![1, 0, 0, 0],
                cos_amp,
                sin_amp: vec![vec![0.0; n]; n],
            },
        );
        tt.require_divergence_free().unwrap();
        assert!(e.l2_inner(&tt).abs() < 1e-14);
    }

    #[test]
    fn tt_projection_annihilates_e_image_and_fixes_tt() {
        let n = 4;
        let ups = FourierScalar::single(n, periods(n), vec![1, 0, 0, 0], 1.0, 0.0);
        let e = e_map(&ups, n);
        let p = tt_project(&e, n).unwrap();
        assert!(p.max_abs() < 1e-14);

        let mut cos_amp = vec![vec![0.0; n]; n];
        cos_amp[1][1] = 1.0;
        cos_amp[2][2] = -1.0;
        let tt = FourierSym2::single(
            n,
            periods(n),
            ModeSym2 {
                freq: vec![1, 0, 0, 0],
                cos_amp: cos_amp.clone(),
                sin_amp: vec![vec![0.0; n]; n],
            },
        );
        let q = tt_project(&tt, n).unwrap();
        assert_eq!(q.modes.len(), 1);
        for i in 0..n {
            for j in 0..n {
                assert!((q.modes[0].cos_amp[i][j] - cos_amp[i][j]).abs() < 1e-15);
            }
        }
        // random div-free field: trace of projection vanishes per mode
        let h = e.add_field(&tt);
        let r = tt_project(&h, n).unwrap();
        for m in &r.trace().modes {
            assert!(m.1.abs() < 1e-14 && m.2.abs() < 1e-14);
        }
        assert!(r.divergence_residual() < 1e-14);
    }

    #[test]
    fn rejects_non_divergence_free() {
        let n = 4;
        let mut cos_amp = vec![vec![0.0; n]; n];
        cos_amp[0][0] = 1.0; // kappa along x1 with h_11 != 0 violates ker delta
        let bad = FourierSym2::single(
            n,
            periods(n),
            ModeSym2 {
                freq: vec![1, 0, 0, 0],
                cos_amp,
                sin_amp: vec![vec![0.0; n]; n],
            },
        );
        assert!(matches!(
            tt_project(&bad, n),
            Err(Error::NotDivergenceFree(_))
        ));
    }
}
