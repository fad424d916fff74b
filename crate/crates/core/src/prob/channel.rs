use crate::error::{Error, Result};
use crate::prob::dist::{max_abs_diff, mix_slices, validate_probs};
use crate::prob::{Dist, FinSet};

/// A discrete memoryless channel `X ⇝ Y`.
///
/// Stored row-per-input: row `x` is the distribution `f^x` on `Y`, so
/// [`Channel::entry`]`(x, y)` is `f_{yx}`.
#[derive(Debug, Clone, PartialEq)]
pub struct Channel {
    dom: FinSet,
    cod: FinSet,
    data: Vec<f64>,
}

impl Channel {
    pub fn new(dom: FinSet, cod: FinSet, rows: Vec<Vec<f64>>) -> Result<Self> {
        if rows.len() != dom.len() {
            return Err(Error::SpaceMismatch {
                context: "channel: one row per input",
            });
        }
        let mut data = Vec::with_capacity(dom.len() * cod.len());
        for row in rows {
            data.extend(validate_probs(row, cod.len())?);
        }
        Ok(Self { dom, cod, data })
    }

    pub(crate) fn from_flat_unchecked(dom: FinSet, cod: FinSet, data: Vec<f64>) -> Self {
        debug_assert_eq!(data.len(), dom.len() * cod.len());
        Self { dom, cod, data }
    }

    pub(crate) fn from_rows_unchecked(dom: FinSet, cod: FinSet, rows: &[Vec<f64>]) -> Self {
        Self::from_flat_unchecked(dom, cod, rows.concat())
    }

    pub fn identity(space: FinSet) -> Self {
        DetMap::identity(space).lift()
    }

    /// Every input is sent to `d`.
    pub fn constant(dom: FinSet, d: &Dist) -> Self {
        let data = d.probs().repeat(dom.len());
        Self::from_flat_unchecked(dom, d.space().clone(), data)
    }

    pub fn dom(&self) -> &FinSet {
        &self.dom
    }

    pub fn cod(&self) -> &FinSet {
        &self.cod
    }

    /// The distribution `f^x` as a slice.
    pub fn row(&self, x: usize) -> &[f64] {
        let n = self.cod.len();
        &self.data[x * n..(x + 1) * n]
    }

    pub fn rows(&self) -> impl Iterator<Item = &[f64]> {
        self.data.chunks(self.cod.len())
    }

    pub fn row_dist(&self, x: usize) -> Dist {
        Dist::new_unchecked(self.cod.clone(), self.row(x).to_vec())
    }

    /// `f_{yx}`: the probability of output `y` given input `x`.
    pub fn entry(&self, x: usize, y: usize) -> f64 {
        self.data[x * self.cod.len() + y]
    }

    /// Kernel product `g∘f` with `(g∘f)_{zx} = Σ_y g_{zy} f_{yx}`, where
    /// `self` is `g`.
    pub fn compose(&self, f: &Channel) -> Result<Channel> {
        if f.cod != self.dom {
            return Err(Error::SpaceMismatch {
                context: "channel composition",
            });
        }
        let nz = self.cod.len();
        let mut data = vec![0.0; f.dom.len() * nz];
        for (x, out) in data.chunks_mut(nz).enumerate() {
            for (y, &fyx) in f.row(x).iter().enumerate() {
                if fyx == 0.0 {
                    continue;
                }
                for (o, &gzy) in out.iter_mut().zip(self.row(y)) {
                    *o += gzy * fyx;
                }
            }
        }
        Ok(Channel::from_flat_unchecked(f.dom.clone(), self.cod.clone(), data))
    }

    /// `g∘h` for a pure `h`: row `x` is copied from row `h(x)` of `g`.
    pub fn compose_pure(&self, h: &DetMap) -> Result<Channel> {
        if h.cod != self.dom {
            return Err(Error::SpaceMismatch {
                context: "pure composition",
            });
        }
        let data = h.map.iter().flat_map(|&y| self.row(y).iter().copied()).collect();
        Ok(Channel::from_flat_unchecked(h.dom.clone(), self.cod.clone(), data))
    }

    /// `g∘f` when `g: Y ⇝ Z` is a stochastic section of `h: Z → Y`:
    /// `(g∘f)_{zx} = g_{z h(z)} f_{h(z) x}`.
    ///
    /// The result is only meaningful when `g` really is a section of `h`.
    pub fn compose_through_section(&self, h: &DetMap, f: &Channel) -> Result<Channel> {
        if h.dom != self.cod || h.cod != self.dom || f.cod != self.dom {
            return Err(Error::SpaceMismatch {
                context: "composition through a section",
            });
        }
        let nz = self.cod.len();
        let mut data = Vec::with_capacity(f.dom.len() * nz);
        for x in 0..f.dom.len() {
            data.extend((0..nz).map(|z| {
                let y = h.map[z];
                self.entry(y, z) * f.entry(x, y)
            }));
        }
        Ok(Channel::from_flat_unchecked(f.dom.clone(), self.cod.clone(), data))
    }

    /// Pushforward `(f∘p)_y = Σ_x f_{yx} p_x`.
    pub fn apply(&self, p: &Dist) -> Result<Dist> {
        if p.space() != &self.dom {
            return Err(Error::SpaceMismatch {
                context: "channel application",
            });
        }
        let mut out = vec![0.0; self.cod.len()];
        for (row, &px) in self.rows().zip(p.probs()) {
            if px == 0.0 {
                continue;
            }
            for (o, &v) in out.iter_mut().zip(row) {
                *o += v * px;
            }
        }
        Ok(Dist::new_unchecked(self.cod.clone(), out))
    }

    /// Recovers the function of a pure channel.
    pub fn as_det(&self, tol: f64) -> Result<DetMap> {
        let map = self
            .rows()
            .enumerate()
            .map(|(x, row)| {
                row.iter()
                    .position(|&v| v >= 1.0 - tol)
                    .ok_or_else(|| Error::NotPure {
                        row: self.dom.label(x).to_owned(),
                    })
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(DetMap {
            dom: self.dom.clone(),
            cod: self.cod.clone(),
            map,
        })
    }

    pub fn max_abs_diff(&self, other: &Channel) -> Result<f64> {
        if self.dom != other.dom || self.cod != other.cod {
            return Err(Error::SpaceMismatch {
                context: "channel comparison",
            });
        }
        Ok(max_abs_diff(&self.data, &other.data))
    }

    /// `(1 − w)·self + w·other`.
    pub fn mix(&self, other: &Channel, w: f64) -> Result<Channel> {
        if self.dom != other.dom || self.cod != other.cod {
            return Err(Error::SpaceMismatch {
                context: "channel mixture",
            });
        }
        Ok(Channel::from_flat_unchecked(
            self.dom.clone(),
            self.cod.clone(),
            mix_slices(&self.data, &other.data, w),
        ))
    }

    /// Block-diagonal direct sum `⊕_x f_x: ∐ U_x ⇝ ∐ V_x`.
    pub fn direct_sum(tags: &FinSet, parts: &[&Channel]) -> Result<Channel> {
        let doms: Vec<&FinSet> = parts.iter().map(|c| &c.dom).collect();
        let cods: Vec<&FinSet> = parts.iter().map(|c| &c.cod).collect();
        let dom = FinSet::disjoint_union(tags, &doms)?;
        let cod = FinSet::disjoint_union(tags, &cods)?;
        let width = cod.len();
        let mut data = Vec::with_capacity(dom.len() * width);
        let mut offset = 0;
        for c in parts {
            for row in c.rows() {
                let mut out = vec![0.0; width];
                out[offset..offset + row.len()].copy_from_slice(row);
                data.extend(out);
            }
            offset += c.cod.len();
        }
        Ok(Channel::from_flat_unchecked(dom, cod, data))
    }
}

/// A deterministic map between finite sets, i.e. a pure channel.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DetMap {
    dom: FinSet,
    cod: FinSet,
    map: Vec<usize>,
}

impl DetMap {
    pub fn new(dom: FinSet, cod: FinSet, map: Vec<usize>) -> Result<Self> {
        if map.len() != dom.len() {
            return Err(Error::SpaceMismatch {
                context: "deterministic map: one image per element",
            });
        }
        if map.iter().any(|&y| y >= cod.len()) {
            return Err(Error::SpaceMismatch {
                context: "deterministic map: image out of range",
            });
        }
        Ok(Self { dom, cod, map })
    }

    pub fn identity(space: FinSet) -> Self {
        let map = (0..space.len()).collect();
        Self {
            dom: space.clone(),
            cod: space,
            map,
        }
    }

    pub fn constant(dom: FinSet, cod: FinSet, at: usize) -> Result<Self> {
        let n = dom.len();
        Self::new(dom, cod, vec![at; n])
    }

    pub fn dom(&self) -> &FinSet {
        &self.dom
    }

    pub fn cod(&self) -> &FinSet {
        &self.cod
    }

    pub fn map(&self) -> &[usize] {
        &self.map
    }

    pub fn image(&self, x: usize) -> usize {
        self.map[x]
    }

    /// The fiber `h⁻¹(y)` in increasing order.
    pub fn fiber(&self, y: usize) -> Vec<usize> {
        (0..self.map.len()).filter(|&x| self.map[x] == y).collect()
    }

    pub fn fibers(&self) -> Vec<Vec<usize>> {
        let mut out = vec![Vec::new(); self.cod.len()];
        for (x, &y) in self.map.iter().enumerate() {
            out[y].push(x);
        }
        out
    }

    /// `Err(NotSurjective)` naming the first element with an empty fiber.
    pub fn check_surjective(&self) -> Result<()> {
        let mut hit = vec![false; self.cod.len()];
        for &y in &self.map {
            hit[y] = true;
        }
        match hit.iter().position(|h| !h) {
            Some(y) => Err(Error::NotSurjective {
                element: self.cod.label(y).to_owned(),
            }),
            None => Ok(()),
        }
    }

    /// Function composition `self∘h`.
    pub fn compose(&self, h: &DetMap) -> Result<DetMap> {
        if h.cod != self.dom {
            return Err(Error::SpaceMismatch {
                context: "function composition",
            });
        }
        Ok(DetMap {
            dom: h.dom.clone(),
            cod: self.cod.clone(),
            map: h.map.iter().map(|&y| self.map[y]).collect(),
        })
    }

    pub fn lift(&self) -> Channel {
        let n = self.cod.len();
        let mut data = vec![0.0; self.dom.len() * n];
        for (x, &y) in self.map.iter().enumerate() {
            data[x * n + y] = 1.0;
        }
        Channel::from_flat_unchecked(self.dom.clone(), self.cod.clone(), data)
    }

    /// Pushforward of `p` along the function; same as `lift().apply(p)`.
    pub fn pushforward(&self, p: &Dist) -> Result<Dist> {
        if p.space() != &self.dom {
            return Err(Error::SpaceMismatch {
                context: "pushforward",
            });
        }
        let mut out = vec![0.0; self.cod.len()];
        for (&y, &px) in self.map.iter().zip(p.probs()) {
            out[y] += px;
        }
        Ok(Dist::new_unchecked(self.cod.clone(), out))
    }

    /// Blockwise `⊕_x h_x: ∐ U_x → ∐ V_x`.
    pub fn direct_sum(tags: &FinSet, parts: &[&DetMap]) -> Result<DetMap> {
        let doms: Vec<&FinSet> = parts.iter().map(|h| &h.dom).collect();
        let cods: Vec<&FinSet> = parts.iter().map(|h| &h.cod).collect();
        let dom = FinSet::disjoint_union(tags, &doms)?;
        let cod = FinSet::disjoint_union(tags, &cods)?;
        let mut map = Vec::with_capacity(dom.len());
        let mut offset = 0;
        for h in parts {
            map.extend(h.map.iter().map(|&y| y + offset));
            offset += h.cod.len();
        }
        Ok(DetMap { dom, cod, map })
    }
}

/// Largest entrywise deviation of `h∘s` from `id_Y`.
pub fn section_violation(s: &Channel, h: &DetMap) -> Result<f64> {
    if s.dom != h.cod || s.cod != h.dom {
        return Err(Error::SpaceMismatch {
            context: "section check",
        });
    }
    let ny = h.cod.len();
    let mut worst: f64 = 0.0;
    let mut mass = vec![0.0; ny];
    for (y, row) in s.rows().enumerate() {
        mass.iter_mut().for_each(|m| *m = 0.0);
        for (x, &v) in row.iter().enumerate() {
            mass[h.map[x]] += v;
        }
        for (y2, &m) in mass.iter().enumerate() {
            let target = if y2 == y { 1.0 } else { 0.0 };
            worst = worst.max((m - target).abs());
        }
    }
    Ok(worst)
}

/// Whether `s` is a stochastic section of `h`, i.e. `h∘s = id` within `tol`.
pub fn is_section(s: &Channel, h: &DetMap, tol: f64) -> Result<bool> {
    Ok(section_violation(s, h)? <= tol)
}
