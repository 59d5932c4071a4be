//! Pointwise curvature checks on known charts: constant-curvature values,
//! tensor symmetries, divergence identities, and naturality.

use cvi_core::expr::{parse_expr, Expr};
use cvi_core::geometry::{
    curvature_frame, divergence, weyl_bianchi_residual, Chart, DivergenceSelector, FrameContext,
};
use cvi_core::models;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn sample_points(chart: &Chart, seed: u64, count: usize) -> Vec<Vec<f64>> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..count)
        .map(|_| chart.sample_interior(&mut rng, 0.12))
        .collect()
}

#[test]
fn flat_torus_is_flat() {
    let t4 = models::flat_torus_2pi(4).unwrap();
    let frame = curvature_frame(&t4, &[1.0, 2.0, 3.0, 0.5], 0).unwrap();
    assert_eq!(frame.christoffel(0).unwrap().max_abs_value(), 0.0);
    assert_eq!(frame.riemann(0).unwrap().max_abs_value(), 0.0);
    assert_eq!(frame.bach(0).unwrap().max_abs_value(), 0.0);
}

#[test]
fn unit_s2_scalar_curvature() {
    let s2 = models::round_sphere(2, 1.0).unwrap();
    for p in sample_points(&s2, 1, 4) {
        let frame = curvature_frame(&s2, &p, 0).unwrap();
        let r = frame.scalar_curvature(0).unwrap().value();
        assert!((r - 2.0).abs() < 1e-10, "R = {r}");
        let j = frame.j_scalar(0).unwrap().value();
        assert!((j - 1.0).abs() < 1e-10);
    }
}

#[test]
fn sphere_radius_scaling() {
    let s4 = models::round_sphere(4, 2.0).unwrap();
    let p = sample_points(&s4, 2, 1).remove(0);
    let frame = curvature_frame(&s4, &p, 0).unwrap();
    let r = frame.scalar_curvature(0).unwrap().value();
    assert!((r - 3.0).abs() < 1e-10, "R = {r}"); // n(n-1)/r² = 12/4
}

#[test]
fn unit_s4_is_an_einstein_space_form() {
    let s4 = models::round_sphere(4, 1.0).unwrap();
    for p in sample_points(&s4, 3, 3) {
        let frame = curvature_frame(&s4, &p, 0).unwrap();
        let g = frame.metric(0).unwrap();
        let pt = frame.schouten(0).unwrap();
        for i in 0..4 {
            for j in 0..4 {
                let expect = 0.5 * g.get(&[i, j]).value();
                assert!(
                    (pt.get(&[i, j]).value() - expect).abs() < 1e-9,
                    "P[{i}{j}]"
                );
            }
        }
        let w = frame.weyl(0).unwrap();
        assert!(w.max_abs_value() < 1e-9, "|W| = {}", w.max_abs_value());
        let c = frame.cotton(0).unwrap();
        assert!(c.max_abs_value() < 1e-9);
    }
}

#[test]
fn riemann_symmetries_and_first_bianchi() {
    let chart = models::generic_metric(4, 11, 0.08).unwrap();
    for p in sample_points(&chart, 4, 3) {
        let frame = curvature_frame(&chart, &p, 0).unwrap();
        let rm = frame.riemann(0).unwrap();
        let scale = rm.max_abs_value().max(1e-12);
        let n = 4;
        for i in 0..n {
            for j in 0..n {
                for k in 0..n {
                    for l in 0..n {
                        let v = rm.get(&[i, j, k, l]).value();
                        let aij = rm.get(&[j, i, k, l]).value();
                        let akl = rm.get(&[i, j, l, k]).value();
                        let pair = rm.get(&[k, l, i, j]).value();
                        assert!((v + aij).abs() < 1e-9 * scale);
                        assert!((v + akl).abs() < 1e-9 * scale);
                        assert!((v - pair).abs() < 1e-9 * scale);
                        let bianchi = v
                            + rm.get(&[j, k, i, l]).value()
                            + rm.get(&[k, i, j, l]).value();
                        assert!(bianchi.abs() < 1e-9 * scale);
                    }
                }
            }
        }
    }
}

#[test]
fn commutator_sign_convention() {
    // (∇_i ∇_j − ∇_j ∇_i) X^k = R_ij^k_s X^s on a curved chart
    let chart = models::generic_metric(3, 5, 0.1).unwrap();
    let coords = ["x1", "x2", "x3"];
    let xs: Vec<Expr> = ["sin(x2)", "cos(x1) + x3*0", "sin(x1)*cos(x2)"]
        .iter()
        .map(|s| parse_expr(s, &coords).collect_err())
        .collect();
    // helper to keep parse terse
    trait CollectErr {
        fn collect_err(self) -> Expr;
    }
    impl CollectErr for cvi_core::Result<Expr> {
        fn collect_err(self) -> Expr {
            self.unwrap()
        }
    }
    let mut ctx = FrameContext::from_chart(&chart);
    ctx.ensure_active(&xs.iter().collect::<Vec<_>>());
    for p in sample_points(&chart, 6, 2) {
        let frame = ctx.frame(&p, 4).unwrap();
        let n = 3;
        // X as a (1,0)-tensor of jets at order 2
        let shape2 = frame.shape_at(2).unwrap();
        let mut x = cvi_core::geometry::Tensor::zeros(&shape2, n, 1, vec![true]);
        for (k, e) in xs.iter().enumerate() {
            *x.get_mut(&[k]) = frame.eval_field(e, 2).unwrap();
        }
        let dx = frame.cov_deriv(&x).unwrap(); // (∇X)_{j}^k at order 1
        let ddx = frame.cov_deriv(&dx).unwrap(); // (∇∇X)_{i j}^k at order 0
        let rm = frame.riemann_mixed(0).unwrap();
        let x0 = x.truncate(&frame.shape_at(0).unwrap());
        let scale = ddx.max_abs_value().max(1e-12);
        for i in 0..n {
            for j in 0..n {
                for k in 0..n {
                    let lhs = ddx.get(&[i, j, k]).value() - ddx.get(&[j, i, k]).value();
                    let mut rhs = 0.0;
                    for s in 0..n {
                        rhs += rm.get(&[i, j, k, s]).value() * x0.get(&[s]).value();
                    }
                    assert!(
                        (lhs - rhs).abs() < 1e-8 * scale,
                        "commutator [{i}{j}]^{k}: {lhs} vs {rhs}"
                    );
                }
            }
        }
    }
}

#[test]
fn weyl_is_totally_trace_free_and_cotton_traces_vanish() {
    for n in [4usize, 5] {
        let chart = models::generic_metric(n, 21 + n as u64, 0.08).unwrap();
        for p in sample_points(&chart, 7, 2) {
            let frame = curvature_frame(&chart, &p, 0).unwrap();
            let w = frame.weyl(0).unwrap();
            let ginv = frame.inv_metric(0).unwrap();
            let scale = w.max_abs_value().max(1e-10);
            // all single traces of W vanish
            for (s1, s2) in [(0, 1), (0, 2), (0, 3), (1, 2), (1, 3), (2, 3)] {
                for a in 0..n {
                    for b in 0..n {
                        let mut tr = 0.0;
                        for i in 0..n {
                            for j in 0..n {
                                let mut idx = [0usize; 4];
                                idx[s1] = i;
                                idx[s2] = j;
                                let free: Vec<usize> =
                                    (0..4).filter(|s| *s != s1 && *s != s2).collect();
                                idx[free[0]] = a;
                                idx[free[1]] = b;
                                tr += ginv.get(&[i, j]).value() * w.get(&idx).value();
                            }
                        }
                        assert!(tr.abs() < 1e-9 * scale, "trace W slots {s1}{s2}");
                    }
                }
            }
            let c = frame.cotton(0).unwrap();
            let cscale = c.max_abs_value().max(1e-10);
            for i in 0..n {
                for j in 0..n {
                    for k in 0..n {
                        let anti = c.get(&[i, j, k]).value() + c.get(&[j, i, k]).value();
                        assert!(anti.abs() < 1e-9 * cscale);
                    }
                    let mut tr = 0.0;
                    for a in 0..n {
                        for b in 0..n {
                            tr += ginv.get(&[a, b]).value() * c.get(&[i, a, b]).value();
                        }
                    }
                    assert!(tr.abs() < 1e-9 * cscale, "g^jk C_ijk at i={i}");
                }
            }
        }
    }
}

#[test]
fn weyl_and_bach_divergence_identities() {
    let n = 5usize;
    let chart = models::generic_metric(n, 31, 0.07).unwrap();
    for p in sample_points(&chart, 8, 2) {
        let dw = divergence(&chart, &p, &DivergenceSelector::Weyl).unwrap();
        let frame = curvature_frame(&chart, &p, 1).unwrap();
        let c = frame.cotton(0).unwrap();
        let scale = dw.max_abs_value().max(c.max_abs_value()).max(1e-12);
        for i in 0..n {
            for j in 0..n {
                for l in 0..n {
                    let expect = (n as f64 - 3.0) * c.get(&[i, j, l]).value();
                    let got = dw.get(&[i, j, l]).value();
                    assert!(
                        (got - expect).abs() <= 1e-7 * scale,
                        "divW[{i}{j}{l}] {got} vs {expect}"
                    );
                }
            }
        }

        let db = divergence(&chart, &p, &DivergenceSelector::Bach).unwrap();
        let praised = frame.raise_all(&frame.schouten(0).unwrap()).unwrap();
        let bscale = db.max_abs_value().max(1e-12);
        for j in 0..n {
            let mut expect = 0.0;
            for s in 0..n {
                for t in 0..n {
                    expect += c.get(&[s, j, t]).value() * praised.get(&[s, t]).value();
                }
            }
            expect *= -(n as f64 - 4.0);
            let got = db.get(&[j]).value();
            assert!(
                (got - expect).abs() <= 1e-7 * bscale.max(expect.abs()),
                "divB[{j}] {got} vs {expect}"
            );
        }
    }
}

#[test]
fn divergences_vanish_on_flat_torus() {
    let t5 = models::flat_torus_2pi(5).unwrap();
    let p = vec![0.3, 1.0, 2.0, 4.0, 5.5];
    let dw = divergence(&t5, &p, &DivergenceSelector::Weyl).unwrap();
    assert_eq!(dw.max_abs_value(), 0.0);
}

#[test]
fn weyl_bianchi_residual_small_on_curved_charts() {
    let chart = models::generic_metric(5, 41, 0.07).unwrap();
    for p in sample_points(&chart, 9, 2) {
        let res = weyl_bianchi_residual(&chart, &p).unwrap();
        assert!(res <= 1e-7, "residual {res}");
    }
    let s4 = models::round_sphere(4, 1.0).unwrap();
    let p = sample_points(&s4, 10, 1).remove(0);
    let res = weyl_bianchi_residual(&s4, &p).unwrap();
    assert!(res <= 1e-7);
}

#[test]
fn contracted_second_bianchi_for_scalar_curvature() {
    // δ(Ric − (R/n) g) = ((n−2)/(2n)) dR pointwise
    let n = 4usize;
    let chart = models::generic_metric(n, 51, 0.09).unwrap();
    for p in sample_points(&chart, 11, 3) {
        let frame = curvature_frame(&chart, &p, 1).unwrap();
        let ric = frame.ricci(1).unwrap();
        let g = frame.metric(1).unwrap();
        let r = frame.scalar_curvature(1).unwrap();
        let shape1 = frame.shape_at(1).unwrap();
        let mut s0 = cvi_core::geometry::Tensor::zeros(&shape1, n, 2, vec![false, false]);
        for i in 0..n {
            for j in 0..n {
                let mut v = ric.get(&[i, j]).clone();
                v.add_scaled(&r.mul(g.get(&[i, j])), -1.0 / n as f64);
                *s0.get_mut(&[i, j]) = v;
            }
        }
        let ds0 = frame.cov_deriv(&s0).unwrap();
        let ginv = frame.inv_metric(0).unwrap();
        let r2 = frame.scalar_curvature(2).unwrap();
        let mut scale = 1e-12f64;
        for j in 0..n {
            let mut div = 0.0;
            for a in 0..n {
                for b in 0..n {
                    div += ginv.get(&[a, b]).value() * ds0.get(&[a, b, j]).value();
                }
            }
            let dr = frame.partial(&r2, j).value();
            let expect = (n as f64 - 2.0) / (2.0 * n as f64) * dr;
            scale = scale.max(div.abs()).max(expect.abs());
            assert!(
                (div - expect).abs() <= 1e-7 * scale,
                "axis {j}: {div} vs {expect}"
            );
        }
    }
}

#[test]
fn naturality_under_linear_coordinate_change() {
    // pull the metric back along x = A y and compare scalar outputs
    let chart = models::generic_metric(3, 61, 0.1).unwrap();
    let a = [[1.0, 0.5, 0.0], [0.0, 1.0, -0.25], [0.25, 0.0, 1.0]];
    let coords = ["x1", "x2", "x3"];
    let lin = |row: &[f64; 3]| -> Expr {
        let mut acc = Expr::zero();
        for (c, &v) in row.iter().enumerate() {
            acc = Expr::add(
                acc,
                Expr::mul(
                    Expr::Const(cvi_core::expr::rational_from_f64(v).unwrap()),
                    Expr::sym(coords[c]),
                ),
            );
        }
        acc
    };
    let map = |e: &Expr| -> Expr {
        e.substitute(&|s| {
            coords
                .iter()
                .position(|c| *c == s)
                .map(|i| lin(&a[i]))
        })
    };
    // g'_{ab}(y) = A^i_a A^j_b g_ij(Ay); build the upper triangle and
    // mirror so the stored expressions are structurally symmetric
    let n = 3;
    let mut metric2 = vec![vec![Expr::zero(); n]; n];
    for aa in 0..n {
        for bb in aa..n {
            let mut acc = Expr::zero();
            for i in 0..n {
                for j in 0..n {
                    let coef = a[i][aa] * a[j][bb];
                    if coef == 0.0 {
                        continue;
                    }
                    acc = Expr::add(
                        acc,
                        Expr::mul(
                            Expr::Const(cvi_core::expr::rational_from_f64(coef).unwrap()),
                            map(&chart.metric[i][j]),
                        ),
                    );
                }
            }
            metric2[aa][bb] = acc.clone();
            metric2[bb][aa] = acc;
        }
    }
    let chart2 = Chart::new(
        "pullback",
        chart.coords.clone(),
        metric2,
        vec![(-10.0, 10.0); 3],
        vec![false; 3],
        chart.quad.clone(),
        vec![],
        true,
    )
    .unwrap();
    let y = vec![0.4, 0.9, 1.3];
    let x: Vec<f64> = (0..3)
        .map(|i| (0..3).map(|c| a[i][c] * y[c]).sum())
        .collect();
    let f1 = curvature_frame(&chart, &x, 0).unwrap();
    let f2 = curvature_frame(&chart2, &y, 0).unwrap();
    for (v1, v2) in [
        (
            f1.scalar_curvature(0).unwrap().value(),
            f2.scalar_curvature(0).unwrap().value(),
        ),
        (
            f1.norm_sq(&f1.schouten(0).unwrap()).unwrap().value(),
            f2.norm_sq(&f2.schouten(0).unwrap()).unwrap().value(),
        ),
        (
            f1.norm_sq(&f1.cotton(0).unwrap()).unwrap().value(),
            f2.norm_sq(&f2.cotton(0).unwrap()).unwrap().value(),
        ),
    ] {
        assert!(
            (v1 - v2).abs() <= 1e-9 * v1.abs().max(1.0),
            "{v1} vs {v2}"
        );
    }
}
