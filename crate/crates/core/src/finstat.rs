//! The category of finite probability spaces with hypothesis sections.
//!
//! A morphism `(X,p) → (Y,q)` is a measurement function `f: X → Y` pushing
//! `p` to `q`, together with a stochastic section `s: Y ⇝ X` of `f`. Its
//! relative entropy is `D(p, s∘f∘p)`.

use crate::error::{Error, Result};
use crate::prob::{kl, section_violation, Channel, DetMap, Dist, ExtReal, FinSet};
use crate::EPS_EQ;

/// A validated morphism `(f, p, s)`.
///
/// `q = f∘p` and `r = s∘q` are derived at construction.
#[derive(Debug, Clone, PartialEq)]
pub struct StatMorphism {
    f: DetMap,
    p: Dist,
    s: Channel,
    q: Dist,
    r: Dist,
}

impl StatMorphism {
    pub fn new(f: DetMap, p: Dist, s: Channel) -> Result<Self> {
        if p.space() != f.dom() || s.dom() != f.cod() || s.cod() != f.dom() {
            return Err(Error::SpaceMismatch {
                context: "statistical morphism legs",
            });
        }
        f.check_surjective()?;
        let violation = section_violation(&s, &f)?;
        if violation > EPS_EQ {
            return Err(Error::NotASection {
                max_violation: violation,
            });
        }
        let q = f.pushforward(&p)?;
        let r = s.apply(&q)?;
        Ok(Self { f, p, s, q, r })
    }

    /// `(id, p, id)`.
    pub fn identity(p: Dist) -> Self {
        let space = p.space().clone();
        Self::new(DetMap::identity(space.clone()), p, Channel::identity(space))
            .expect("identity morphism is valid")
    }

    pub fn f(&self) -> &DetMap {
        &self.f
    }

    pub fn p(&self) -> &Dist {
        &self.p
    }

    pub fn s(&self) -> &Channel {
        &self.s
    }

    /// Target prior `f∘p`.
    pub fn q(&self) -> &Dist {
        &self.q
    }

    /// Retrodicted prior `s∘f∘p`.
    pub fn r(&self) -> &Dist {
        &self.r
    }

    pub fn source(&self) -> &FinSet {
        self.f.dom()
    }

    pub fn target(&self) -> &FinSet {
        self.f.cod()
    }

    /// Number of elements across source and target, used to order
    /// counterexamples.
    pub fn size(&self) -> usize {
        self.source().len() + self.target().len()
    }

    /// Composite `(g∘f, p, s∘t)` of `self = (g, q, t)` after `first = (f, p, s)`.
    pub fn compose(&self, first: &StatMorphism) -> Result<StatMorphism> {
        if first.target() != self.source() {
            return Err(Error::SpaceMismatch {
                context: "statistical morphism composition",
            });
        }
        let gap = first.q.max_abs_diff(&self.p)?;
        if gap > EPS_EQ {
            return Err(Error::PriorMismatch { max_violation: gap });
        }
        StatMorphism::new(
            self.f.compose(&first.f)?,
            first.p.clone(),
            first.s.compose(&self.s)?,
        )
    }

    /// `RE(f, p, s) = D(p, s∘f∘p)`.
    pub fn relative_entropy(&self) -> ExtReal {
        kl(&self.p, &self.r).expect("p and r share a space")
    }

    /// Whether `s∘q = p` within `tol`.
    pub fn is_optimal(&self, tol: f64) -> bool {
        self.r
            .max_abs_diff(&self.p)
            .expect("p and r share a space")
            <= tol
    }

    /// Largest approximate equality gap against another morphism of the same
    /// shape, or `None` when the shapes differ.
    pub fn max_abs_diff(&self, other: &StatMorphism) -> Option<f64> {
        if self.f != other.f {
            return None;
        }
        let a = self.p.max_abs_diff(&other.p).ok()?;
        let b = self.s.max_abs_diff(&other.s).ok()?;
        Some(a.max(b))
    }

    /// Same morphism with every element relabelled through new spaces of the
    /// same sizes.
    pub fn relabel(&self, source: FinSet, target: FinSet) -> Result<StatMorphism> {
        if source.len() != self.source().len() || target.len() != self.target().len() {
            return Err(Error::SpaceMismatch { context: "relabel" });
        }
        let f = DetMap::new(source.clone(), target.clone(), self.f.map().to_vec())?;
        let p = Dist::new_unchecked(source.clone(), self.p.probs().to_vec());
        let rows: Vec<Vec<f64>> = self.s.rows().map(<[f64]>::to_vec).collect();
        let s = Channel::from_rows_unchecked(target, source, &rows);
        StatMorphism::new(f, p, s)
    }
}

/// `RE` as a free function.
pub fn re(m: &StatMorphism) -> ExtReal {
    m.relative_entropy()
}

/// Composite of `m2` after `m1`.
pub fn compose_stat(m2: &StatMorphism, m1: &StatMorphism) -> Result<StatMorphism> {
    m2.compose(m1)
}

/// The optimal hypothesis for `(f|p)`: `s_{xy} = p_x / q_y` on the fiber of
/// `y`, uniform on the fiber where `q_y = 0`.
pub fn bayes_inverse(f: &DetMap, p: &Dist) -> Result<Channel> {
    f.check_surjective()?;
    let q = f.pushforward(p)?;
    let nx = f.dom().len();
    let rows: Vec<Vec<f64>> = f
        .fibers()
        .iter()
        .enumerate()
        .map(|(y, fiber)| {
            let mut row = vec![0.0; nx];
            let qy = q.get(y);
            if qy > 0.0 {
                for &x in fiber {
                    row[x] = p.get(x) / qy;
                }
            } else {
                let w = 1.0 / fiber.len() as f64;
                for &x in fiber {
                    row[x] = w;
                }
            }
            row
        })
        .collect();
    Ok(Channel::from_rows_unchecked(
        f.cod().clone(),
        f.dom().clone(),
        &rows,
    ))
}

/// `⊕_x p_x (μ^x, q^x, s^x)` on tagged disjoint unions `x:u`.
pub fn convex_combine_stat(base: &Dist, family: &[StatMorphism]) -> Result<StatMorphism> {
    if family.is_empty() {
        return Err(Error::EmptyFamily);
    }
    if family.len() != base.len() {
        return Err(Error::SpaceMismatch {
            context: "convex combination: one morphism per base element",
        });
    }
    let tags = base.space();
    let maps: Vec<&DetMap> = family.iter().map(|m| &m.f).collect();
    let priors: Vec<&Dist> = family.iter().map(|m| &m.p).collect();
    let sections: Vec<&Channel> = family.iter().map(|m| &m.s).collect();
    StatMorphism::new(
        DetMap::direct_sum(tags, &maps)?,
        Dist::weighted_sum(base, &priors)?,
        Channel::direct_sum(tags, &sections)?,
    )
}
