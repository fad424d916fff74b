use std::fmt;
use std::sync::Arc;

use crate::error::{Error, Result};

/// Separator used for labels of disjoint unions, `x:u`.
pub const UNION_SEP: char = ':';
/// Separator used for labels of cartesian products, `x⊗y`.
pub const PRODUCT_SEP: char = '⊗';

/// An ordered, labelled finite set.
///
/// Elements are addressed by index; labels are kept for serialization and
/// diagnostics. Cloning is cheap.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct FinSet {
    labels: Arc<[String]>,
}

impl FinSet {
    pub fn new<I, S>(labels: I) -> Result<Self>
    where
        I: IntoIterator<Item = S>,
        S: Into<String>,
    {
        let labels: Vec<String> = labels.into_iter().map(Into::into).collect();
        if labels.is_empty() {
            return Err(Error::EmptySet);
        }
        let mut sorted: Vec<&String> = labels.iter().collect();
        sorted.sort();
        if let Some(w) = sorted.windows(2).find(|w| w[0] == w[1]) {
            return Err(Error::DuplicateLabel(w[0].clone()));
        }
        Ok(Self {
            labels: labels.into(),
        })
    }

    /// `{prefix}0, …, {prefix}{n-1}`; `n` must be positive.
    pub fn indexed(prefix: &str, n: usize) -> Result<Self> {
        Self::new((0..n).map(|i| format!("{prefix}{i}")))
    }

    /// The one-point set `⋆`.
    pub fn point() -> Self {
        Self::new(["⋆"]).expect("singleton is valid")
    }

    pub fn len(&self) -> usize {
        self.labels.len()
    }

    /// Always false; kept for clippy's `len_without_is_empty`.
    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn labels(&self) -> &[String] {
        &self.labels
    }

    pub fn label(&self, i: usize) -> &str {
        &self.labels[i]
    }

    pub fn index_of(&self, label: &str) -> Option<usize> {
        self.labels.iter().position(|l| l == label)
    }

    /// Cartesian product with labels `x⊗y` in lexicographic `(x, y)` order.
    pub fn product(&self, other: &FinSet) -> FinSet {
        let labels: Vec<String> = self
            .labels
            .iter()
            .flat_map(|x| other.labels.iter().map(move |y| format!("{x}{PRODUCT_SEP}{y}")))
            .collect();
        // `x⊗y` can collide when labels themselves contain `⊗`; fall back to
        // positional labels in that case.
        FinSet::new(labels.clone()).unwrap_or_else(|_| {
            FinSet::new(
                (0..self.len())
                    .flat_map(|i| (0..other.len()).map(move |j| format!("{i}{PRODUCT_SEP}{j}"))),
            )
            .expect("positional labels are distinct")
        })
    }

    /// Tagged disjoint union `∐_x U^x` with labels `x:u`.
    ///
    /// `tags` supplies one tag per summand; tags may not contain `:`, which
    /// makes the labelling collision-free.
    pub fn disjoint_union(tags: &FinSet, summands: &[&FinSet]) -> Result<FinSet> {
        if summands.len() != tags.len() {
            return Err(Error::SpaceMismatch {
                context: "disjoint union: one summand per tag",
            });
        }
        if let Some(bad) = tags.labels.iter().find(|l| l.contains(UNION_SEP)) {
            return Err(Error::InvalidLabel {
                label: bad.clone(),
                reason: "`:` is reserved for disjoint-union labels",
            });
        }
        FinSet::new(tags.labels.iter().zip(summands).flat_map(|(x, u)| {
            u.labels.iter().map(move |l| format!("{x}{UNION_SEP}{l}"))
        }))
    }
}

impl fmt::Debug for FinSet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_set().entries(self.labels.iter()).finish()
    }
}
