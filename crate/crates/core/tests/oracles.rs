//! Brute-force oracles written against raw matrix entries, independent of the
//! library's composition and divergence code paths.

use finstat_core::finstat2::square_violations;
use finstat_core::prob::section_violation;
use finstat_core::randgen::{GenConfig, Generator};
use finstat_core::{
    bayes_inverse, ce, ce_closed_form, convex_combine_stat, convex_combine_two, kl, re, re2,
    Channel, DetMap, Dist, ExtReal, FinSet, StatMorphism, TwoMorphism,
};
use std::f64::consts::LN_2;

fn set(prefix: &str, n: usize) -> FinSet {
    FinSet::indexed(prefix, n).unwrap()
}

fn matrix(c: &Channel) -> Vec<Vec<f64>> {
    c.rows().map(|r| r.to_vec()).collect()
}

/// `(g∘f)^x_z = Σ_y f^x_y g^y_z` by explicit triple loop.
fn oracle_compose(g: &[Vec<f64>], f: &[Vec<f64>]) -> Vec<Vec<f64>> {
    let nz = g[0].len();
    f.iter()
        .map(|fx| {
            let mut row = vec![0.0; nz];
            for (y, &fyx) in fx.iter().enumerate() {
                for z in 0..nz {
                    row[z] += fyx * g[y][z];
                }
            }
            row
        })
        .collect()
}

fn oracle_kl(p: &[f64], q: &[f64]) -> f64 {
    let mut acc = 0.0;
    for (&a, &b) in p.iter().zip(q) {
        if a > 0.0 {
            if b == 0.0 {
                return f64::INFINITY;
            }
            acc += a * (a / b).ln();
        }
    }
    acc
}

/// `Σ_x p_x D(f^x, (t∘f′∘μ)^x)` with the reconstruction built by hand.
fn oracle_ce(sq: &TwoMorphism) -> f64 {
    let mu = sq.dom().f().map();
    let p = sq.dom().p().probs();
    let f = matrix(sq.f());
    let fp = matrix(sq.fp());
    let t = matrix(sq.cod().s());
    let mut total = 0.0;
    for x in 0..p.len() {
        if p[x] == 0.0 {
            continue;
        }
        let recon: Vec<f64> = (0..f[x].len())
            .map(|y| (0..fp[0].len()).map(|yp| fp[mu[x]][yp] * t[yp][y]).sum())
            .collect();
        let d = oracle_kl(&f[x], &recon);
        if d.is_infinite() {
            return f64::INFINITY;
        }
        total += p[x] * d;
    }
    total
}

fn close(a: ExtReal, b: f64, tol: f64) -> bool {
    match a {
        ExtReal::Infinite => b.is_infinite(),
        ExtReal::Finite(v) => b.is_finite() && (v - b).abs() <= tol,
    }
}

#[test]
fn composition_matches_triple_loop() {
    let mut g = Generator::new(GenConfig::default().with_seed(11));
    for _ in 0..200 {
        let x = set("x", g.size_up_to(6));
        let y = set("y", g.size_up_to(6));
        let z = set("z", g.size_up_to(6));
        let f = g.random_channel(&x, &y);
        let h = g.random_channel(&y, &z);
        let got = matrix(&h.compose(&f).unwrap());
        let want = oracle_compose(&matrix(&h), &matrix(&f));
        for (a, b) in got.iter().flatten().zip(want.iter().flatten()) {
            assert!((a - b).abs() <= 1e-15);
        }
    }
}

#[test]
fn hand_matrix_product_and_pushforward() {
    let two = set("x", 2);
    let f = Channel::new(two.clone(), two.clone(), vec![vec![0.5, 0.5], vec![0.2, 0.8]]).unwrap();
    let g = Channel::new(two.clone(), two.clone(), vec![vec![1.0, 0.0], vec![0.5, 0.5]]).unwrap();
    let want = [[0.75, 0.25], [0.6, 0.4]];
    let got = matrix(&g.compose(&f).unwrap());
    for (row, w) in got.iter().zip(want) {
        for (a, b) in row.iter().zip(w) {
            assert!((a - b).abs() < 1e-15);
        }
    }
    let q = f.apply(&Dist::uniform(two)).unwrap();
    assert!((q.get(0) - 0.35).abs() < 1e-15 && (q.get(1) - 0.65).abs() < 1e-15);
}

#[test]
fn kl_matches_direct_sum() {
    let mut g = Generator::new(GenConfig::default().sparse().with_seed(5));
    for _ in 0..300 {
        let x = set("x", g.size_up_to(6));
        let p = g.random_dist(&x);
        let q = g.random_dist(&x);
        assert!(close(kl(&p, &q).unwrap(), oracle_kl(p.probs(), q.probs()), 1e-14));
    }
}

#[test]
fn ce_matches_hand_reconstruction() {
    for (seed, cfg) in [(1, GenConfig::default()), (2, GenConfig::default().sparse())] {
        let mut g = Generator::new(cfg.with_seed(seed));
        for _ in 0..300 {
            let sq = g.random_two_morphism();
            let want = oracle_ce(&sq);
            assert!(close(ce(&sq), want, 1e-12));
            assert!(close(ce_closed_form(&sq), want, 1e-12));
        }
    }
}

#[test]
fn zero_weight_rows_do_not_count() {
    let x = FinSet::new(["a", "b"]).unwrap();
    let y = FinSet::new(["y1", "y2"]).unwrap();
    let star = FinSet::point();
    let to_star = |s: &FinSet| DetMap::constant(s.clone(), star.clone(), 0).unwrap();
    let p = Dist::new(x.clone(), vec![1.0, 0.0]).unwrap();
    let f = Channel::new(x.clone(), y.clone(), vec![vec![0.5, 0.5], vec![1.0, 0.0]]).unwrap();
    let dom = StatMorphism::new(to_star(&x), p.clone(), Channel::constant(star.clone(), &Dist::uniform(x.clone()))).unwrap();
    let q = f.apply(&p).unwrap();
    let cod = StatMorphism::new(to_star(&y), q, Channel::constant(star.clone(), &Dist::uniform(y))).unwrap();
    let sq = TwoMorphism::new(dom, cod, f, Channel::identity(star)).unwrap();
    assert_eq!(ce(&sq), ExtReal::ZERO);
    assert_eq!(ce_closed_form(&sq), ExtReal::ZERO);
    assert!(sq.is_two_optimal(1e-12));
}

#[test]
fn re2_adds_domain_log2_to_zero_ce() {
    let x = FinSet::new(["a", "b"]).unwrap();
    let star = FinSet::point();
    let dom = StatMorphism::new(
        DetMap::constant(x.clone(), star.clone(), 0).unwrap(),
        Dist::new(x.clone(), vec![1.0, 0.0]).unwrap(),
        Channel::new(star.clone(), x.clone(), vec![vec![0.5, 0.5]]).unwrap(),
    )
    .unwrap();
    let cod = StatMorphism::identity(Dist::point(star.clone(), 0));
    let f = Channel::new(x, star.clone(), vec![vec![1.0], vec![1.0]]).unwrap();
    let sq = TwoMorphism::new(dom, cod, f, Channel::identity(star)).unwrap();
    assert_eq!(ce(&sq), ExtReal::ZERO);
    assert!(close(re2(&sq), LN_2, 1e-15));
}

#[test]
fn bayes_inverse_is_optimal() {
    let mut g = Generator::new(GenConfig::default().with_seed(9));
    for _ in 0..300 {
        let m = g.random_stat_morphism();
        let s = bayes_inverse(m.f(), m.p()).unwrap();
        assert!(section_violation(&s, m.f()).unwrap() <= 1e-12);
        let opt = StatMorphism::new(m.f().clone(), m.p().clone(), s).unwrap();
        assert!(opt.is_optimal(1e-12));
        assert!(re(&opt).to_f64() <= 1e-12);
    }
}

#[test]
fn bayes_inverse_examples() {
    let x = FinSet::new(["a", "b"]).unwrap();
    let p = Dist::new(x.clone(), vec![0.25, 0.75]).unwrap();
    let s = bayes_inverse(&DetMap::constant(x.clone(), FinSet::point(), 0).unwrap(), &p).unwrap();
    assert_eq!(s.row(0), &[0.25, 0.75]);
    let swap = DetMap::new(x.clone(), x.clone(), vec![1, 0]).unwrap();
    let s = bayes_inverse(&swap, &p).unwrap();
    assert_eq!(matrix(&s), vec![vec![0.0, 1.0], vec![1.0, 0.0]]);
}

#[test]
fn half_and_half_convex_sums() {
    let mut g = Generator::new(GenConfig { max_size: 4, ..GenConfig::default() }.with_seed(3));
    let base = Dist::uniform(set("c", 2));
    for _ in 0..100 {
        let ms = [g.random_stat_morphism(), g.random_stat_morphism()];
        let lhs = re(&convex_combine_stat(&base, &ms).unwrap());
        let rhs = 0.5 * re(&ms[0]).to_f64() + 0.5 * re(&ms[1]).to_f64();
        assert!(close(lhs, rhs, 1e-9));

        let sqs = [g.random_two_morphism(), g.random_two_morphism()];
        let lhs = ce(&convex_combine_two(&base, &sqs).unwrap());
        let rhs = 0.5 * ce(&sqs[0]).to_f64() + 0.5 * ce(&sqs[1]).to_f64();
        assert!(close(lhs, rhs, 1e-9));
    }
}

#[test]
fn vertical_legs_compose_as_functions() {
    let mut g = Generator::new(GenConfig::default().with_seed(21));
    for _ in 0..200 {
        let (spade, club) = g.stacked_pair();
        let v = club.vcompose(&spade).unwrap();
        for x in 0..spade.dom().source().len() {
            let want = club.dom().f().image(spade.dom().f().image(x));
            assert_eq!(v.dom().f().image(x), want);
        }
        for y in 0..spade.cod().source().len() {
            let want = club.cod().f().image(spade.cod().f().image(y));
            assert_eq!(v.cod().f().image(y), want);
        }
    }
}

/// A square out of `spade.cod()`, built by refining a random bottom channel.
fn square_after(g: &mut Generator, spade: &TwoMorphism) -> TwoMorphism {
    let y = spade.cod().source().clone();
    let yp = spade.cod().target().clone();
    let z = set("z", g.size_up_to(6));
    let zp = set("zp", g.size_up_to(z.len()));
    let xi = g.random_surjection(&z, &zp).unwrap();
    let gp = g.random_channel(&yp, &zp);
    let top = g.refine(&gp, spade.cod().f(), &xi);
    let r = top.apply(spade.cod().p()).unwrap();
    let u = g.random_section(&xi).unwrap();
    let cod = StatMorphism::new(xi, r, u).unwrap();
    assert_eq!(y, top.dom().clone());
    TwoMorphism::new(spade.cod().clone(), cod, top, gp).unwrap()
}

#[test]
fn horizontal_composites_validate() {
    let mut g = Generator::new(GenConfig::default().with_seed(33));
    let mut worst: f64 = 0.0;
    for _ in 0..200 {
        let spade = g.random_two_morphism();
        let heart = square_after(&mut g, &spade);
        let h = heart.hcompose(&spade).unwrap();
        let v = square_violations(h.dom(), h.cod(), h.f(), h.fp()).unwrap();
        worst = v.into_iter().fold(worst, f64::max);
    }
    assert!(worst <= 2e-9, "{worst}");
}

#[test]
fn horizontal_identity_after_spade_is_spade() {
    let mut g = Generator::new(GenConfig::default().with_seed(34));
    for _ in 0..50 {
        let spade = g.random_two_morphism();
        let heart = TwoMorphism::horizontal_identity(spade.cod().clone());
        let h = heart.hcompose(&spade).unwrap();
        assert!(h.f().max_abs_diff(spade.f()).unwrap() < 1e-15);
        assert!(h.fp().max_abs_diff(spade.fp()).unwrap() < 1e-15);
    }
}
