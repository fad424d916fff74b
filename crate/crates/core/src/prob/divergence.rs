//! Relative entropy and the chain-rule quantities built from it.
//!
//! All values are in nats; convert with [`LogBase`](crate::prob::LogBase).

use crate::error::{Error, Result};
use crate::prob::{Channel, Dist, ExtReal};

/// `Σ_x p_x log(p_x / q_x)` over raw slices, without space checks.
///
/// Terms with `p_x = 0` contribute 0; `p_x > 0 = q_x` gives `∞`.
pub(crate) fn kl_slices(p: &[f64], q: &[f64]) -> ExtReal {
    let mut acc = 0.0;
    for (&px, &qx) in p.iter().zip(q) {
        if px == 0.0 {
            continue;
        }
        if qx == 0.0 {
            return ExtReal::Infinite;
        }
        acc += px * (px / qx).ln();
    }
    // Rounding can push a true zero slightly negative.
    ExtReal::finite(acc.max(0.0))
}

/// Relative entropy `D(p, q)`.
pub fn kl(p: &Dist, q: &Dist) -> Result<ExtReal> {
    if p.space() != q.space() {
        return Err(Error::SpaceMismatch {
            context: "relative entropy",
        });
    }
    Ok(kl_slices(p.probs(), q.probs()))
}

/// `Σ_x p_x D(f^x, g^x)`, with `0·∞ = 0`.
pub fn conditional_kl(f: &Channel, g: &Channel, p: &Dist) -> Result<ExtReal> {
    if f.dom() != g.dom() || f.cod() != g.cod() || p.space() != f.dom() {
        return Err(Error::SpaceMismatch {
            context: "conditional relative entropy",
        });
    }
    Ok(p.probs()
        .iter()
        .enumerate()
        .map(|(x, &px)| kl_slices(f.row(x), g.row(x)).scale(px))
        .sum())
}

/// The joint distribution `ϑ(f|p)_{(x,y)} = p_x f_{yx}` on `X×Y`.
pub fn joint(f: &Channel, p: &Dist) -> Result<Dist> {
    if p.space() != f.dom() {
        return Err(Error::SpaceMismatch {
            context: "joint distribution",
        });
    }
    let space = f.dom().product(f.cod());
    let probs = p
        .probs()
        .iter()
        .enumerate()
        .flat_map(|(x, &px)| f.row(x).iter().map(move |&v| px * v))
        .collect();
    Ok(Dist::new_unchecked(space, probs))
}
