use crate::error::{Error, Result};
use crate::prob::FinSet;
use crate::EPS_STOCH;

/// Checks a probability vector against `ε_stoch` and clamps the tolerated
/// slightly-negative entries to zero.
pub(crate) fn validate_probs(mut probs: Vec<f64>, expected_len: usize) -> Result<Vec<f64>> {
    if probs.len() != expected_len {
        return Err(Error::InvalidDist(format!(
            "expected {expected_len} entries, got {}",
            probs.len()
        )));
    }
    for v in probs.iter_mut() {
        if !v.is_finite() {
            return Err(Error::InvalidDist(format!("non-finite entry {v}")));
        }
        if *v < -EPS_STOCH {
            return Err(Error::InvalidDist(format!("negative entry {v}")));
        }
        if *v < 0.0 {
            *v = 0.0;
        }
    }
    let sum: f64 = probs.iter().sum();
    if (sum - 1.0).abs() > EPS_STOCH {
        return Err(Error::InvalidDist(format!("entries sum to {sum}")));
    }
    Ok(probs)
}

/// A probability distribution on a finite set, i.e. a channel `⋆ ⇝ X`.
#[derive(Debug, Clone, PartialEq)]
pub struct Dist {
    space: FinSet,
    probs: Vec<f64>,
}

impl Dist {
    pub fn new(space: FinSet, probs: Vec<f64>) -> Result<Self> {
        let probs = validate_probs(probs, space.len())?;
        Ok(Self { space, probs })
    }

    /// Skips validation; the caller guarantees a valid probability vector.
    pub(crate) fn new_unchecked(space: FinSet, probs: Vec<f64>) -> Self {
        debug_assert_eq!(space.len(), probs.len());
        Self { space, probs }
    }

    pub fn point(space: FinSet, at: usize) -> Self {
        let mut probs = vec![0.0; space.len()];
        probs[at] = 1.0;
        Self { space, probs }
    }

    pub fn uniform(space: FinSet) -> Self {
        let n = space.len();
        Self {
            space,
            probs: vec![1.0 / n as f64; n],
        }
    }

    pub fn space(&self) -> &FinSet {
        &self.space
    }

    pub fn probs(&self) -> &[f64] {
        &self.probs
    }

    pub fn len(&self) -> usize {
        self.probs.len()
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn get(&self, i: usize) -> f64 {
        self.probs[i]
    }

    /// Largest entrywise absolute difference; `SpaceMismatch` if the spaces
    /// differ.
    pub fn max_abs_diff(&self, other: &Dist) -> Result<f64> {
        if self.space != other.space {
            return Err(Error::SpaceMismatch {
                context: "distribution comparison",
            });
        }
        Ok(max_abs_diff(&self.probs, &other.probs))
    }

    /// `(1 − w)·self + w·other`.
    pub fn mix(&self, other: &Dist, w: f64) -> Result<Dist> {
        if self.space != other.space {
            return Err(Error::SpaceMismatch {
                context: "distribution mixture",
            });
        }
        let probs = mix_slices(&self.probs, &other.probs, w);
        Ok(Dist::new_unchecked(self.space.clone(), probs))
    }

    /// `⊕_x weights_x · parts^x` on the tagged disjoint union of the parts'
    /// spaces.
    pub fn weighted_sum(weights: &Dist, parts: &[&Dist]) -> Result<Dist> {
        let spaces: Vec<&FinSet> = parts.iter().map(|d| d.space()).collect();
        let space = FinSet::disjoint_union(weights.space(), &spaces)?;
        let probs = weights
            .probs
            .iter()
            .zip(parts)
            .flat_map(|(&w, d)| d.probs.iter().map(move |&v| w * v))
            .collect();
        Ok(Dist::new_unchecked(space, probs))
    }
}

pub(crate) fn max_abs_diff(a: &[f64], b: &[f64]) -> f64 {
    a.iter()
        .zip(b)
        .map(|(x, y)| (x - y).abs())
        .fold(0.0, f64::max)
}

pub(crate) fn mix_slices(a: &[f64], b: &[f64], w: f64) -> Vec<f64> {
    a.iter().zip(b).map(|(x, y)| (1.0 - w) * x + w * y).collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn two() -> FinSet {
        FinSet::new(["a", "b"]).unwrap()
    }

    #[test]
    fn clamps_tiny_negatives() {
        let d = Dist::new(two(), vec![1.0 + 5e-10, -5e-10]).unwrap();
        assert_eq!(d.get(1), 0.0);
    }

    #[test]
    fn rejects_real_negatives_and_bad_sums() {
        assert!(Dist::new(two(), vec![1.1, -0.1]).is_err());
        assert!(Dist::new(two(), vec![0.5, 0.6]).is_err());
        assert!(Dist::new(two(), vec![1.0]).is_err());
        assert!(Dist::new(two(), vec![f64::NAN, 1.0]).is_err());
    }

    #[test]
    fn weighted_sum_blocks() {
        let w = Dist::new(FinSet::new(["l", "r"]).unwrap(), vec![0.25, 0.75]).unwrap();
        let a = Dist::new(two(), vec![0.5, 0.5]).unwrap();
        let b = Dist::point(FinSet::new(["c"]).unwrap(), 0);
        let s = Dist::weighted_sum(&w, &[&a, &b]).unwrap();
        assert_eq!(s.space().labels(), ["l:a", "l:b", "r:c"]);
        assert_eq!(s.probs(), &[0.125, 0.125, 0.75]);
    }
}
