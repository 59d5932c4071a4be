//! Golden constants for the invariant catalog, computed first through the
//! constant-curvature oracle (P = g/2 on the unit sphere) and then frozen
//! against the jet pipeline.

use cvi_core::catalog::{
    eval_invariant, eval_riem_basis6, homogeneity_check, InvariantId,
};
use cvi_core::geometry::curvature_frame;
use cvi_core::models;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// Constant-curvature oracle: on the unit n-sphere P = g/2 forces
/// J = n/2, |P|² = n/4, trP³ = n/8, W = C = B = 0 and all derivatives
/// vanish; substituting into the defining formulas gives the constants.
mod oracle {
    pub fn sigma2(n: usize) -> f64 {
        let (j, p2) = (n as f64 / 2.0, n as f64 / 4.0);
        0.5 * (j * j - p2)
    }

    pub fn q4(n: usize) -> f64 {
        let (j, p2) = (n as f64 / 2.0, n as f64 / 4.0);
        -2.0 * p2 + n as f64 / 2.0 * j * j
    }

    pub fn q6(n: usize) -> f64 {
        let nf = n as f64;
        let (j, p2, t3) = (nf / 2.0, nf / 4.0, nf / 8.0);
        (nf * nf - 4.0) / 4.0 * j.powi(3) - 4.0 * nf * j * p2 + 16.0 * t3
    }

    pub fn v3(n: usize) -> f64 {
        let nf = n as f64;
        let (j, p2, t3) = (nf / 2.0, nf / 4.0, nf / 8.0);
        j.powi(3) / 6.0 - 0.5 * j * p2 + t3 / 3.0
    }
}

fn sphere_point(n: usize, seed: u64) -> Vec<f64> {
    let s = models::round_sphere(n, 1.0).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    s.sample_interior(&mut rng, 0.12)
}

#[test]
fn golden_sphere_constants() {
    assert_eq!(oracle::q4(4), 6.0);
    assert_eq!(oracle::q6(6), 120.0);
    assert_eq!(oracle::v3(6), 2.5);

    let s4 = models::round_sphere(4, 1.0).unwrap();
    let p4 = sphere_point(4, 1);
    let q4 = eval_invariant(InvariantId::Q4, &s4, &p4).unwrap();
    assert!((q4 - 6.0).abs() <= 1e-8 * 6.0, "Q4(S4) = {q4}");

    let s6 = models::round_sphere(6, 1.0).unwrap();
    let p6 = sphere_point(6, 2);
    let q6 = eval_invariant(InvariantId::Q6, &s6, &p6).unwrap();
    assert!((q6 - 120.0).abs() <= 1e-8 * 120.0, "Q6(S6) = {q6}");
    let v3 = eval_invariant(InvariantId::V3, &s6, &p6).unwrap();
    assert!((v3 - 2.5).abs() <= 1e-8 * 2.5, "v3(S6) = {v3}");

    for n in [4usize, 5, 6] {
        let s = models::round_sphere(n, 1.0).unwrap();
        let p = sphere_point(n, 3 + n as u64);
        let got = eval_invariant(InvariantId::Sigma2, &s, &p).unwrap();
        let expect = oracle::sigma2(n);
        assert_eq!(expect, (n * (n - 1)) as f64 / 8.0);
        assert!(
            (got - expect).abs() <= 1e-8 * expect,
            "sigma2(S{n}) = {got}"
        );
    }
}

#[test]
fn all_invariants_vanish_on_flat_torus() {
    let t6 = models::flat_torus_2pi(6).unwrap();
    let p = vec![0.4, 1.1, 2.7, 3.9, 5.0, 0.9];
    for id in cvi_core::catalog::ALL_INVARIANTS {
        let v = eval_invariant(id, &t6, &p).unwrap();
        assert_eq!(v, 0.0, "{id:?} on flat torus");
    }
}

#[test]
fn k1_and_k2_vanish_at_einstein_charts() {
    let s6 = models::round_sphere(6, 1.0).unwrap();
    let p6 = sphere_point(6, 5);
    for id in [InvariantId::K1, InvariantId::K2] {
        let v = eval_invariant(id, &s6, &p6).unwrap();
        assert!(v.abs() < 1e-9, "{id:?}(S6) = {v}");
    }
    // Einstein product with nonvanishing Weyl curvature
    let prod = models::page_einstein_product().unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    for _ in 0..3 {
        let p = prod.sample_interior(&mut rng, 0.12);
        let v = eval_invariant(InvariantId::K1, &prod, &p).unwrap();
        let scale = eval_invariant(InvariantId::WeylSq, &prod, &p)
            .unwrap()
            .abs()
            .max(1.0);
        assert!(v.abs() <= 1e-6 * scale, "K1(Page x S2) = {v}");
    }
}

#[test]
fn riem_basis6_matches_sphere_oracle() {
    // P = g/2 oracle: J³ = 27, J|P|² = 3·(6/4) = 4.5, trP³ = 6/8 = 0.75,
    // every other entry vanishes on the unit 6-sphere
    let s6 = models::round_sphere(6, 1.0).unwrap();
    let p = sphere_point(6, 6);
    let vals = eval_riem_basis6(&s6, &p).unwrap();
    let expect = [
        27.0, 4.5, 0.75, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0,
    ];
    for (i, (got, want)) in vals.iter().zip(expect.iter()).enumerate() {
        assert!(
            (got - want).abs() <= 1e-7 * want.abs().max(1.0),
            "basis entry {i}: {got} vs {want}"
        );
    }
    // flat torus: all 17 vanish
    let t6 = models::flat_torus_2pi(6).unwrap();
    let vals = eval_riem_basis6(&t6, &[0.1, 0.2, 0.3, 0.4, 0.5, 0.6]).unwrap();
    assert!(vals.iter().all(|v| *v == 0.0));
}

#[test]
fn homogeneity_examples() {
    let s4 = models::round_sphere(4, 1.0).unwrap();
    let pts = vec![sphere_point(4, 7)];
    let res = homogeneity_check(InvariantId::Q4, &s4, 2.0, &pts).unwrap();
    assert!(res <= 1e-10, "Q4 homogeneity residual {res}");
    // and the scaled value itself: Q4(4g) = 6/16
    let mut scaled = s4.clone();
    for (p, v) in scaled.params.iter_mut() {
        if p == "R2" {
            *v *= 4.0;
        }
    }
    let v = eval_invariant(InvariantId::Q4, &scaled, &pts[0]).unwrap();
    assert!((v - 0.375).abs() <= 1e-10);

    let s6 = models::round_sphere(6, 1.0).unwrap();
    let pts6 = vec![sphere_point(6, 8)];
    let res = homogeneity_check(InvariantId::Q6, &s6, 2.0, &pts6).unwrap();
    assert!(res <= 1e-9, "Q6 homogeneity residual {res}");

    let t4 = models::flat_torus_2pi(4).unwrap();
    let res = homogeneity_check(InvariantId::J, &t4, 3.0, &[vec![0.1, 0.2, 0.3, 0.4]]).unwrap();
    assert_eq!(res, 0.0);
}

#[test]
fn product_chart_curvatures() {
    // S2(1) x S2(1): Einstein with Ric = g
    let s2 = models::round_sphere(2, 1.0).unwrap();
    let prod = models::product(&s2, &s2).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(9);
    let p = prod.sample_interior(&mut rng, 0.12);
    let frame = curvature_frame(&prod, &p, 0).unwrap();
    let ric = frame.ricci(0).unwrap();
    let g = frame.metric(0).unwrap();
    for i in 0..4 {
        for j in 0..4 {
            let diff = ric.get(&[i, j]).value() - g.get(&[i, j]).value();
            assert!(diff.abs() < 1e-9, "Ric[{i}{j}]");
        }
    }
    // S2(1) x S2(2): R = 2 + 0.5 constant, non-Einstein
    let s2b = models::round_sphere(2, 2.0).unwrap();
    let prod2 = models::product(&s2, &s2b).unwrap();
    let p2 = prod2.sample_interior(&mut rng, 0.12);
    let f2 = curvature_frame(&prod2, &p2, 0).unwrap();
    let r = f2.scalar_curvature(0).unwrap().value();
    assert!((r - 2.5).abs() < 1e-9, "R = {r}");

    // T2 x S2: R = 2
    let t2 = models::flat_torus_2pi(2).unwrap();
    let prod3 = models::product(&t2, &s2).unwrap();
    let p3 = prod3.sample_interior(&mut rng, 0.12);
    let f3 = curvature_frame(&prod3, &p3, 0).unwrap();
    let r = f3.scalar_curvature(0).unwrap().value();
    assert!((r - 2.0).abs() < 1e-9, "R = {r}");
}

#[test]
fn dimension_gates() {
    let s5 = models::round_sphere(5, 1.0).unwrap();
    let p = sphere_point(5, 10);
    assert!(matches!(
        eval_invariant(InvariantId::V3, &s5, &p),
        Err(cvi_core::Error::DimensionTooSmall { .. })
    ));
    assert!(eval_invariant(InvariantId::I1, &s5, &p).is_ok());
    let s4 = models::round_sphere(4, 1.0).unwrap();
    let p4 = sphere_point(4, 10);
    assert!(matches!(
        eval_invariant(InvariantId::K3, &s4, &p4),
        Err(cvi_core::Error::DimensionTooSmall { .. })
    ));
}

#[test]
fn page_metric_is_einstein() {
    let page = models::page_metric().unwrap();
    let nu = page.param("nu").unwrap();
    let lambda = 3.0 * (1.0 + nu * nu);
    let mut rng = ChaCha8Rng::seed_from_u64(12);
    for _ in 0..10 {
        let p = page.sample_interior(&mut rng, 0.05);
        let frame = curvature_frame(&page, &p, 0).unwrap();
        let ric = frame.ricci(0).unwrap();
        let g = frame.metric(0).unwrap();
        let scale = ric.max_abs_value().max(1e-12);
        for i in 0..4 {
            for j in 0..4 {
                let diff = ric.get(&[i, j]).value() - lambda * g.get(&[i, j]).value();
                assert!(
                    diff.abs() <= 1e-6 * scale,
                    "Ric[{i}{j}] off by {diff:.3e} at {p:?}"
                );
            }
        }
    }
}

#[test]
fn page_frame_weyl_relations() {
    let page = models::page_metric().unwrap();
    let nu = page.param("nu").unwrap();
    let c = page.param("c").unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(13);
    let mut w2_samples = Vec::new();
    for _ in 0..10 {
        let p = page.sample_interior(&mut rng, 0.05);
        let frame = curvature_frame(&page, &p, 0).unwrap();
        let w = frame.weyl(0).unwrap();

        // orthonormal coframe e0 = α dr, e1 = β(dτ − 4sin²(ρ/2)dθ),
        // e2 = γ dρ, e3 = γ sinρ dθ; dual frame vectors:
        let r = p[0];
        let rho = p[2];
        let beta_sq = c * c * (nu * nu - r * r) * (3.0 - nu * nu - (1.0 + nu * nu) * r * r)
            / (1.0 - r * r);
        let beta = beta_sq.sqrt();
        let alpha = c / beta;
        let gamma = (c * (1.0 - r * r)).sqrt();
        let s2 = (rho / 2.0).sin().powi(2);
        let mut fvec = [[0.0f64; 4]; 4]; // fvec[a][coord]
        fvec[0][0] = 1.0 / alpha;
        fvec[1][1] = 1.0 / beta;
        fvec[2][2] = 1.0 / gamma;
        fvec[3][3] = 1.0 / (gamma * rho.sin());
        fvec[3][1] = 4.0 * s2 / (gamma * rho.sin());

        let wf = |a: usize, b: usize, cc: usize, d: usize| -> f64 {
            let mut acc = 0.0;
            for i in 0..4 {
                for j in 0..4 {
                    for k in 0..4 {
                        for l in 0..4 {
                            let coef = fvec[a][i] * fvec[b][j] * fvec[cc][k] * fvec[d][l];
                            if coef != 0.0 {
                                acc += coef * w.get(&[i, j, k, l]).value();
                            }
                        }
                    }
                }
            }
            acc
        };

        // frame orthonormality sanity: g(E_a, E_b) = δ_ab
        let g = frame.metric(0).unwrap();
        for a in 0..4 {
            for b in 0..4 {
                let mut acc = 0.0;
                for i in 0..4 {
                    for j in 0..4 {
                        acc += fvec[a][i] * fvec[b][j] * g.get(&[i, j]).value();
                    }
                }
                let expect = if a == b { 1.0 } else { 0.0 };
                assert!((acc - expect).abs() < 1e-9, "frame not orthonormal [{a}{b}]");
            }
        }

        let w0202 = wf(0, 2, 0, 2);
        let w0303 = wf(0, 3, 0, 3);
        let w1212 = wf(1, 2, 1, 2);
        let w1313 = wf(1, 3, 1, 3);
        let scale = w0202.abs().max(1e-10);
        assert!((w0202 - w0303).abs() <= 1e-6 * scale, "{w0202} vs {w0303}");
        assert!((w0202 - w1212).abs() <= 1e-6 * scale, "{w0202} vs {w1212}");
        assert!((w0202 - w1313).abs() <= 1e-6 * scale, "{w0202} vs {w1313}");

        let w0231 = wf(0, 2, 3, 1);
        let w0312 = wf(0, 3, 1, 2);
        let cscale = w0231.abs().max(scale);
        assert!((w0231 - w0312).abs() <= 1e-6 * cscale, "{w0231} vs {w0312}");

        // Einstein 4-manifold: frame Weyl rows are trace-free, so
        // W0101 = −2 W0202 when the three mixed components agree
        let w0101 = wf(0, 1, 0, 1);
        assert!((w0101 + 2.0 * w0202).abs() <= 1e-6 * w0101.abs().max(scale));

        let w2 = eval_invariant(InvariantId::WeylSq, &page, &p).unwrap();
        w2_samples.push(w2);
    }
    // |W|² nonconstant across the chart
    let mean = w2_samples.iter().sum::<f64>() / w2_samples.len() as f64;
    let sd = (w2_samples
        .iter()
        .map(|v| (v - mean) * (v - mean))
        .sum::<f64>()
        / w2_samples.len() as f64)
        .sqrt();
    assert!(sd > 1e-3 * mean.abs(), "|W|^2 std dev {sd} vs mean {mean}");
}
