//! 2-morphisms between statistical morphisms: commuting squares of channels
//! connecting `(μ,p,s): (X,p) → (X′,p′)` to `(ν,q,t): (Y,q) → (Y′,q′)`.
//!
//! ```text
//!          f
//!     X ~~~~~> Y
//!     |        |
//!   μ |        | ν        s, t: stochastic sections of μ, ν
//!     v   f′   v
//!     X′~~~~~> Y′
//! ```
//!
//! Conditional relative entropy `CE` measures how well `f` is reconstructed
//! from the bottom row through `t∘f′∘μ`; `RE₂ = RE(μ,p,s) + CE`.

use crate::error::{Error, Result, SquareCondition};
use crate::finstat::{convex_combine_stat, StatMorphism};
use crate::prob::{conditional_kl, Channel, Dist, ExtReal};
use crate::EPS_EQ;

/// A validated 2-morphism `(μ,p,s) ⇒ (ν,q,t)` with top channel `f` and
/// bottom channel `fp` (`f′`).
#[derive(Debug, Clone, PartialEq)]
pub struct TwoMorphism {
    dom: StatMorphism,
    cod: StatMorphism,
    f: Channel,
    fp: Channel,
}

/// Max violation of each square condition, in [`SquareCondition`] order.
pub fn square_violations(
    dom: &StatMorphism,
    cod: &StatMorphism,
    f: &Channel,
    fp: &Channel,
) -> Result<[f64; 3]> {
    if f.dom() != dom.source()
        || f.cod() != cod.source()
        || fp.dom() != dom.target()
        || fp.cod() != cod.target()
    {
        return Err(Error::SpaceMismatch {
            context: "2-morphism legs",
        });
    }
    let top = f.apply(dom.p())?.max_abs_diff(cod.p())?;
    let bottom = fp.apply(dom.q())?.max_abs_diff(cod.q())?;
    let nu_f = cod.f().lift().compose(f)?;
    let fp_mu = fp.compose_pure(dom.f())?;
    let naturality = nu_f.max_abs_diff(&fp_mu)?;
    Ok([top, bottom, naturality])
}

impl TwoMorphism {
    pub fn new(dom: StatMorphism, cod: StatMorphism, f: Channel, fp: Channel) -> Result<Self> {
        let violations = square_violations(&dom, &cod, &f, &fp)?;
        let conditions = [
            SquareCondition::TopPushforward,
            SquareCondition::BottomPushforward,
            SquareCondition::Naturality,
        ];
        for (condition, v) in conditions.into_iter().zip(violations) {
            if v > EPS_EQ {
                return Err(Error::SquareDoesNotCommute {
                    condition,
                    max_violation: v,
                });
            }
        }
        Ok(Self { dom, cod, f, fp })
    }

    /// Square with identity functions and sections on both sides and `f`
    /// on top and bottom; a unit for vertical composition.
    pub fn vertical_identity(f: Channel, p: Dist) -> Result<Self> {
        let q = f.apply(&p)?;
        TwoMorphism::new(
            StatMorphism::identity(p),
            StatMorphism::identity(q),
            f.clone(),
            f,
        )
    }

    /// Square from `m` to itself with identity channels; a unit for
    /// horizontal composition.
    pub fn horizontal_identity(m: StatMorphism) -> Self {
        let f = Channel::identity(m.source().clone());
        let fp = Channel::identity(m.target().clone());
        TwoMorphism::new(m.clone(), m, f, fp).expect("identity square commutes")
    }

    /// The domain 1-morphism `(μ, p, s)`.
    pub fn dom(&self) -> &StatMorphism {
        &self.dom
    }

    /// The codomain 1-morphism `(ν, q, t)`.
    pub fn cod(&self) -> &StatMorphism {
        &self.cod
    }

    /// Top channel `f: X ⇝ Y`.
    pub fn f(&self) -> &Channel {
        &self.f
    }

    /// Bottom channel `f′: X′ ⇝ Y′`.
    pub fn fp(&self) -> &Channel {
        &self.fp
    }

    pub fn size(&self) -> usize {
        self.dom.size() + self.cod.size()
    }

    /// `t∘f′∘μ`, built from two generic kernel products.
    pub fn reconstruction(&self) -> Channel {
        let fp_mu = self
            .fp
            .compose(&self.dom.f().lift())
            .expect("validated square");
        self.cod.s().compose(&fp_mu).expect("validated square")
    }

    /// `CE = Σ_x p_x D(f^x, (t∘f′∘μ)^x)`.
    pub fn conditional_relative_entropy(&self) -> ExtReal {
        conditional_kl(&self.f, &self.reconstruction(), self.dom.p()).expect("validated square")
    }

    /// `CE` through the fiberwise closed form
    /// `ΣΣ p_x f_{yx} log(f_{yx} / (t_{yν(y)} f′_{ν(y)μ(x)}))`.
    ///
    /// Agrees with [`Self::conditional_relative_entropy`] when `t` is an exact
    /// section; with sections that leak mass below `ε_eq` outside their fibers
    /// the literal form may stay finite where this one is `∞`.
    pub fn conditional_relative_entropy_closed_form(&self) -> ExtReal {
        let mu = self.dom.f();
        let nu = self.cod.f();
        let t = self.cod.s();
        let mut acc = 0.0;
        for (x, &px) in self.dom.p().probs().iter().enumerate() {
            if px == 0.0 {
                continue;
            }
            let xp = mu.image(x);
            for (y, &fyx) in self.f.row(x).iter().enumerate() {
                if fyx == 0.0 {
                    continue;
                }
                let yp = nu.image(y);
                let denom = t.entry(yp, y) * self.fp.entry(xp, yp);
                if denom == 0.0 {
                    return ExtReal::Infinite;
                }
                acc += px * fyx * (fyx / denom).ln();
            }
        }
        ExtReal::finite(acc.max(0.0))
    }

    /// `RE₂ = RE(μ, p, s) + CE`.
    pub fn two_relative_entropy(&self) -> ExtReal {
        self.dom.relative_entropy() + self.conditional_relative_entropy()
    }

    /// Whether `f^x = (t∘f′∘μ)^x` within `tol` for every `x` with `p_x > tol`,
    /// the exact condition for `CE = 0`.
    pub fn is_two_optimal(&self, tol: f64) -> bool {
        let recon = self.reconstruction();
        self.dom
            .p()
            .probs()
            .iter()
            .enumerate()
            .filter(|&(_, &px)| px > tol)
            .all(|(x, _)| {
                self.f
                    .row(x)
                    .iter()
                    .zip(recon.row(x))
                    .all(|(a, b)| (a - b).abs() <= tol)
            })
    }

    /// Checks `p′_{x′} f′_{y′x′} = Σ_{x∈μ⁻¹(x′)} Σ_{y∈ν⁻¹(y′)} p_x f_{yx}`
    /// entrywise; returns whether it holds within `tol` and the largest gap.
    pub fn marginal_check(&self, tol: f64) -> (bool, f64) {
        let mu = self.dom.f();
        let nu = self.cod.f();
        let nyp = self.fp.cod().len();
        let mut folded = vec![0.0; self.fp.dom().len() * nyp];
        for (x, &px) in self.dom.p().probs().iter().enumerate() {
            let base = mu.image(x) * nyp;
            for (y, &fyx) in self.f.row(x).iter().enumerate() {
                folded[base + nu.image(y)] += px * fyx;
            }
        }
        let pp = self.dom.q();
        let mut worst: f64 = 0.0;
        for (xp, chunk) in folded.chunks(nyp).enumerate() {
            for (yp, &rhs) in chunk.iter().enumerate() {
                let lhs = pp.get(xp) * self.fp.entry(xp, yp);
                worst = worst.max((lhs - rhs).abs());
            }
        }
        (worst <= tol, worst)
    }

    /// Vertical composite `self∘spade`, where `self` is stacked below `spade`.
    pub fn vcompose(&self, spade: &TwoMorphism) -> Result<TwoMorphism> {
        if self.dom.source() != spade.dom.target() || self.cod.source() != spade.cod.target() {
            return Err(Error::SpaceMismatch {
                context: "vertical composition",
            });
        }
        let glue = self.f.max_abs_diff(&spade.fp)?;
        if glue > EPS_EQ {
            return Err(Error::GlueMismatch {
                what: "shared middle channel",
                max_violation: glue,
            });
        }
        let dom = self.dom.compose(&spade.dom).map_err(prior_as_glue)?;
        let cod = self.cod.compose(&spade.cod).map_err(prior_as_glue)?;
        TwoMorphism::new(dom, cod, spade.f.clone(), self.fp.clone())
    }

    /// Horizontal composite `self∘spade` pasted along `spade.cod = self.dom`.
    pub fn hcompose(&self, spade: &TwoMorphism) -> Result<TwoMorphism> {
        let gap = spade
            .cod
            .max_abs_diff(&self.dom)
            .ok_or(Error::SpaceMismatch {
                context: "horizontal composition",
            })?;
        if gap > EPS_EQ {
            return Err(Error::GlueMismatch {
                what: "shared 1-morphism",
                max_violation: gap,
            });
        }
        TwoMorphism::new(
            spade.dom.clone(),
            self.cod.clone(),
            self.f.compose(&spade.f)?,
            self.fp.compose(&spade.fp)?,
        )
    }
}

fn prior_as_glue(e: Error) -> Error {
    match e {
        Error::PriorMismatch { max_violation } => Error::GlueMismatch {
            what: "prior",
            max_violation,
        },
        other => other,
    }
}

pub fn vcompose(club: &TwoMorphism, spade: &TwoMorphism) -> Result<TwoMorphism> {
    club.vcompose(spade)
}

pub fn hcompose(heart: &TwoMorphism, spade: &TwoMorphism) -> Result<TwoMorphism> {
    heart.hcompose(spade)
}

pub fn ce(spade: &TwoMorphism) -> ExtReal {
    spade.conditional_relative_entropy()
}

pub fn ce_closed_form(spade: &TwoMorphism) -> ExtReal {
    spade.conditional_relative_entropy_closed_form()
}

pub fn re2(spade: &TwoMorphism) -> ExtReal {
    spade.two_relative_entropy()
}

/// Convex sum `⊕_x p_x ♠^x`.
pub fn convex_combine_two(base: &Dist, family: &[TwoMorphism]) -> Result<TwoMorphism> {
    if family.is_empty() {
        return Err(Error::EmptyFamily);
    }
    if family.len() != base.len() {
        return Err(Error::SpaceMismatch {
            context: "convex sum: one square per base element",
        });
    }
    let doms: Vec<StatMorphism> = family.iter().map(|sq| sq.dom.clone()).collect();
    let cods: Vec<StatMorphism> = family.iter().map(|sq| sq.cod.clone()).collect();
    let tops: Vec<&Channel> = family.iter().map(|sq| &sq.f).collect();
    let bottoms: Vec<&Channel> = family.iter().map(|sq| &sq.fp).collect();
    TwoMorphism::new(
        convex_combine_stat(base, &doms)?,
        convex_combine_stat(base, &cods)?,
        Channel::direct_sum(base.space(), &tops)?,
        Channel::direct_sum(base.space(), &bottoms)?,
    )
}

/// Small hand-built squares used by tests and fault injection.
pub(crate) mod fixtures {
    use super::*;
    use crate::prob::{DetMap, FinSet};

    /// `X = X′ = {x}`, `Y = {y1,y2}`, `Y′ = {⋆}`, `f^x = top`, `f′ = (1)`,
    /// `t^⋆ = t`.
    pub fn collapse_square(top: [f64; 2], t: [f64; 2]) -> TwoMorphism {
        let x = FinSet::new(["x"]).unwrap();
        let y = FinSet::new(["y1", "y2"]).unwrap();
        let star = FinSet::point();
        let p = Dist::point(x.clone(), 0);
        let dom = StatMorphism::identity(p);
        let f = Channel::new(x.clone(), y.clone(), vec![top.to_vec()]).unwrap();
        let q = Dist::new(y.clone(), top.to_vec()).unwrap();
        let cod = StatMorphism::new(
            DetMap::constant(y.clone(), star.clone(), 0).unwrap(),
            q,
            Channel::new(star.clone(), y, vec![t.to_vec()]).unwrap(),
        )
        .unwrap();
        let fp = Channel::new(x, star, vec![vec![1.0]]).unwrap();
        TwoMorphism::new(dom, cod, f, fp).unwrap()
    }

    /// `{a,b} → {⋆}` with `p = (½,½)` and `s = (1,0)`: `RE = ∞`.
    pub fn support_violation_morphism() -> StatMorphism {
        let x = FinSet::new(["a", "b"]).unwrap();
        let star = FinSet::point();
        StatMorphism::new(
            DetMap::constant(x.clone(), star.clone(), 0).unwrap(),
            Dist::uniform(x.clone()),
            Channel::new(star, x, vec![vec![1.0, 0.0]]).unwrap(),
        )
        .unwrap()
    }
}

#[cfg(test)]
mod tests {
    use super::fixtures::collapse_square;
    use super::*;
    use crate::prob::{DetMap, FinSet};
    use std::f64::consts::LN_2;

    fn identity_square() -> TwoMorphism {
        let x = FinSet::new(["a", "b"]).unwrap();
        let y = FinSet::new(["u", "v", "w"]).unwrap();
        let f = Channel::new(x.clone(), y, vec![vec![0.2, 0.3, 0.5], vec![0.6, 0.0, 0.4]]).unwrap();
        TwoMorphism::vertical_identity(f, Dist::new(x, vec![0.3, 0.7]).unwrap()).unwrap()
    }

    #[test]
    fn identity_square_has_zero_entropies() {
        let sq = identity_square();
        assert_eq!(sq.conditional_relative_entropy(), ExtReal::ZERO);
        assert_eq!(sq.conditional_relative_entropy_closed_form(), ExtReal::ZERO);
        assert_eq!(sq.two_relative_entropy(), ExtReal::ZERO);
        assert!(sq.is_two_optimal(1e-12));
        assert_eq!(sq.marginal_check(0.0), (true, 0.0));
    }

    #[test]
    fn single_term_ce_is_log_two() {
        let sq = collapse_square([1.0, 0.0], [0.5, 0.5]);
        assert_eq!(sq.conditional_relative_entropy(), ExtReal::finite(LN_2));
        let closed = sq.conditional_relative_entropy_closed_form().value().unwrap();
        assert!((closed - LN_2).abs() < 1e-15);
        assert!(!sq.is_two_optimal(1e-12));
        assert_eq!(sq.two_relative_entropy(), ExtReal::finite(LN_2));
    }

    #[test]
    fn support_violation_is_infinite_both_ways() {
        let sq = collapse_square([0.5, 0.5], [1.0, 0.0]);
        assert_eq!(sq.conditional_relative_entropy(), ExtReal::Infinite);
        assert_eq!(sq.conditional_relative_entropy_closed_form(), ExtReal::Infinite);
        assert_eq!(sq.two_relative_entropy(), ExtReal::Infinite);
    }

    #[test]
    fn re2_adds_domain_entropy() {
        // dom = {a,b} → {⋆} with p = (1,0), s = (.5,.5): RE = log 2.
        let x = FinSet::new(["a", "b"]).unwrap();
        let star = FinSet::point();
        let p = Dist::new(x.clone(), vec![1.0, 0.0]).unwrap();
        let dom = StatMorphism::new(
            DetMap::constant(x.clone(), star.clone(), 0).unwrap(),
            p.clone(),
            Channel::new(star.clone(), x.clone(), vec![vec![0.5, 0.5]]).unwrap(),
        )
        .unwrap();
        // f collapses onto a point, so the reconstruction is exact and CE = 0.
        let y = FinSet::new(["c"]).unwrap();
        let f = DetMap::constant(x, y.clone(), 0).unwrap().lift();
        let cod = StatMorphism::identity(Dist::point(y.clone(), 0));
        let fp = Channel::new(star, y, vec![vec![1.0]]).unwrap();
        let sq = TwoMorphism::new(dom, cod, f, fp).unwrap();
        assert_eq!(sq.conditional_relative_entropy(), ExtReal::ZERO);
        assert_eq!(sq.two_relative_entropy(), ExtReal::finite(LN_2));
    }

    #[test]
    fn perturbed_bottom_channel_is_rejected() {
        let x = FinSet::new(["a", "b"]).unwrap();
        let y = FinSet::new(["u", "v"]).unwrap();
        let f = Channel::new(x.clone(), y.clone(), vec![vec![0.2, 0.8], vec![0.6, 0.4]]).unwrap();
        let fp = Channel::new(x.clone(), y, vec![vec![0.3, 0.7], vec![0.6, 0.4]]).unwrap();
        let p = Dist::new(x, vec![0.3, 0.7]).unwrap();
        let dom = StatMorphism::identity(p.clone());
        let cod = StatMorphism::identity(f.apply(&p).unwrap());
        let err = TwoMorphism::new(dom, cod, f, fp).unwrap_err();
        match err {
            Error::SquareDoesNotCommute {
                condition,
                max_violation,
            } => {
                assert_eq!(condition, SquareCondition::BottomPushforward);
                assert!((max_violation - 0.03).abs() < 1e-12);
            }
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn vertical_units() {
        let sq = collapse_square([0.3, 0.7], [0.5, 0.5]);
        let above = TwoMorphism::vertical_identity(sq.f().clone(), sq.dom().p().clone()).unwrap();
        let below = TwoMorphism::vertical_identity(sq.fp().clone(), sq.dom().q().clone()).unwrap();
        let a = sq.vcompose(&above).unwrap();
        let b = below.vcompose(&sq).unwrap();
        for c in [a, b] {
            assert!(c.f().max_abs_diff(sq.f()).unwrap() <= EPS_EQ);
            assert!(c.fp().max_abs_diff(sq.fp()).unwrap() <= EPS_EQ);
            assert!(c.dom().max_abs_diff(sq.dom()).unwrap() <= EPS_EQ);
            assert!(c.cod().max_abs_diff(sq.cod()).unwrap() <= EPS_EQ);
        }
    }

    #[test]
    fn horizontal_unit() {
        let sq = collapse_square([0.3, 0.7], [0.5, 0.5]);
        let heart = TwoMorphism::horizontal_identity(sq.cod().clone());
        let c = heart.hcompose(&sq).unwrap();
        assert!(c.f().max_abs_diff(sq.f()).unwrap() <= EPS_EQ);
        assert_eq!(c.cod(), sq.cod());
    }

    #[test]
    fn glue_mismatch() {
        let a = collapse_square([0.3, 0.7], [0.5, 0.5]);
        let other_t = collapse_square([0.3, 0.7], [0.2, 0.8]);
        let heart = TwoMorphism::horizontal_identity(other_t.cod().clone());
        assert!(matches!(
            heart.hcompose(&a),
            Err(Error::GlueMismatch { .. })
        ));
        let elsewhere = TwoMorphism::horizontal_identity(a.dom().clone());
        assert!(matches!(
            elsewhere.hcompose(&a),
            Err(Error::SpaceMismatch { .. })
        ));
    }

    #[test]
    fn convex_sum_weight_one() {
        let a = collapse_square([1.0, 0.0], [0.5, 0.5]);
        let b = collapse_square([0.5, 0.5], [1.0, 0.0]);
        let base = Dist::new(FinSet::new(["l", "r"]).unwrap(), vec![1.0, 0.0]).unwrap();
        let sum = convex_combine_two(&base, &[a.clone(), b]).unwrap();
        assert_eq!(
            sum.conditional_relative_entropy(),
            a.conditional_relative_entropy()
        );
    }
}
