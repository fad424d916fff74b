//! Seeded generators of valid random instances.
//!
//! The pseudo-random source is [`Rng`], a xorshift64* stream seeded through
//! one round of SplitMix64:
//!
//! ```text
//! seed:  z = seed + 0x9E3779B97F4A7C15
//!        z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9
//!        z = (z ^ (z >> 27)) * 0x94D049BB133111EB
//!        state = z ^ (z >> 31)            (0 is replaced by 0x9E3779B97F4A7C15)
//! next:  state ^= state >> 12; state ^= state << 25; state ^= state >> 27
//!        output = state * 0x2545F4914F6CDD1D   (wrapping)
//! ```
//!
//! Uniform reals take the top 53 bits; everything else is integer arithmetic
//! or IEEE operations, so outputs are identical on every platform.
//!
//! Commuting squares are never found by rejection: the bottom channel `f′` is
//! drawn first and the top channel is obtained by splitting each mass
//! `f′_{y′μ(x)}` across the fiber `ν⁻¹(y′)` with random convex weights.

use crate::error::{Error, Result};
use crate::finstat::StatMorphism;
use crate::finstat2::TwoMorphism;
use crate::prob::{Channel, DetMap, Dist, FinSet};

/// Generator settings. Identical configs give bit-identical streams.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct GenConfig {
    pub seed: u64,
    /// Upper bound on the size of every generated finite set.
    pub max_size: usize,
    /// When false, each entry of a drawn distribution is zeroed with
    /// probability 0.2 before renormalizing.
    pub full_support: bool,
    /// Flat-Dirichlet weights (`−ln U`) instead of plain uniform weights.
    pub dirichlet_like: bool,
}

impl Default for GenConfig {
    fn default() -> Self {
        Self {
            seed: 42,
            max_size: 6,
            full_support: true,
            dirichlet_like: true,
        }
    }
}

impl GenConfig {
    pub fn with_seed(self, seed: u64) -> Self {
        Self { seed, ..self }
    }

    pub fn sparse(self) -> Self {
        Self {
            full_support: false,
            ..self
        }
    }
}

pub(crate) fn splitmix64(seed: u64) -> u64 {
    let mut z = seed.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// xorshift64* stream.
#[derive(Debug, Clone)]
pub struct Rng {
    state: u64,
}

impl Rng {
    pub fn new(seed: u64) -> Self {
        let state = match splitmix64(seed) {
            0 => 0x9E37_79B9_7F4A_7C15,
            s => s,
        };
        Self { state }
    }

    pub fn next_u64(&mut self) -> u64 {
        let mut x = self.state;
        x ^= x >> 12;
        x ^= x << 25;
        x ^= x >> 27;
        self.state = x;
        x.wrapping_mul(0x2545_F491_4F6C_DD1D)
    }

    /// Uniform on `[0, 1)`.
    pub fn next_f64(&mut self) -> f64 {
        (self.next_u64() >> 11) as f64 * (1.0 / (1u64 << 53) as f64)
    }

    /// Uniform on the open interval `(0, 1)`.
    pub fn next_open01(&mut self) -> f64 {
        ((self.next_u64() >> 11) as f64 + 0.5) * (1.0 / (1u64 << 53) as f64)
    }

    /// Uniform on `0..n`; `n` must be positive.
    pub fn below(&mut self, n: usize) -> usize {
        ((self.next_u64() as u128 * n as u128) >> 64) as usize
    }

    pub fn shuffle<T>(&mut self, v: &mut [T]) {
        for i in (1..v.len()).rev() {
            let j = self.below(i + 1);
            v.swap(i, j);
        }
    }
}

/// A stateful instance generator.
#[derive(Debug, Clone)]
pub struct Generator {
    cfg: GenConfig,
    rng: Rng,
}

impl Generator {
    pub fn new(cfg: GenConfig) -> Self {
        Self {
            rng: Rng::new(cfg.seed),
            cfg,
        }
    }

    pub fn config(&self) -> &GenConfig {
        &self.cfg
    }

    pub fn rng(&mut self) -> &mut Rng {
        &mut self.rng
    }

    /// Uniform size in `1..=hi`.
    pub fn size_up_to(&mut self, hi: usize) -> usize {
        1 + self.rng.below(hi.max(1))
    }

    /// A random probability vector of length `n`.
    pub fn probs(&mut self, n: usize) -> Vec<f64> {
        loop {
            let mut w: Vec<f64> = (0..n)
                .map(|_| {
                    let u = self.rng.next_open01();
                    if self.cfg.dirichlet_like {
                        -u.ln()
                    } else {
                        u
                    }
                })
                .collect();
            if !self.cfg.full_support {
                for v in w.iter_mut() {
                    if self.rng.next_f64() < 0.2 {
                        *v = 0.0;
                    }
                }
            }
            let total: f64 = w.iter().sum();
            if total > 0.0 {
                w.iter_mut().for_each(|v| *v /= total);
                // Pin the last nonzero entry so the left-to-right sum is 1.0.
                let last = w.iter().rposition(|&v| v > 0.0).expect("total > 0");
                let head: f64 = w[..last].iter().sum();
                w[last] = (1.0 - head).max(0.0);
                return w;
            }
        }
    }

    pub fn random_dist(&mut self, space: &FinSet) -> Dist {
        Dist::new_unchecked(space.clone(), self.probs(space.len()))
    }

    pub fn random_channel(&mut self, dom: &FinSet, cod: &FinSet) -> Channel {
        let data = (0..dom.len()).flat_map(|_| self.probs(cod.len())).collect();
        Channel::from_flat_unchecked(dom.clone(), cod.clone(), data)
    }

    /// A random surjection: one random preimage per target element, the rest
    /// assigned uniformly.
    pub fn random_surjection(&mut self, dom: &FinSet, cod: &FinSet) -> Result<DetMap> {
        if dom.len() < cod.len() {
            return Err(Error::SizeError(format!(
                "no surjection from {} onto {} elements",
                dom.len(),
                cod.len()
            )));
        }
        let mut order: Vec<usize> = (0..dom.len()).collect();
        self.rng.shuffle(&mut order);
        let mut map = vec![0; dom.len()];
        for (i, &x) in order.iter().enumerate() {
            map[x] = if i < cod.len() {
                i
            } else {
                self.rng.below(cod.len())
            };
        }
        DetMap::new(dom.clone(), cod.clone(), map)
    }

    /// A section whose row `y` is a random distribution on `h⁻¹(y)`.
    pub fn random_section(&mut self, h: &DetMap) -> Result<Channel> {
        h.check_surjective()?;
        let nx = h.dom().len();
        let mut data = Vec::with_capacity(h.cod().len() * nx);
        for fiber in h.fibers() {
            let w = self.probs(fiber.len());
            let mut row = vec![0.0; nx];
            for (&x, v) in fiber.iter().zip(w) {
                row[x] = v;
            }
            data.extend(row);
        }
        Ok(Channel::from_flat_unchecked(
            h.cod().clone(),
            h.dom().clone(),
            data,
        ))
    }

    /// Top channel `f: X ⇝ Y` with `ν∘f = f′∘μ`, obtained by splitting
    /// `f′_{y′μ(x)}` over `ν⁻¹(y′)` with fresh random weights.
    pub fn refine(&mut self, fp: &Channel, mu: &DetMap, nu: &DetMap) -> Channel {
        let fibers = nu.fibers();
        let ny = nu.dom().len();
        let mut data = Vec::with_capacity(mu.dom().len() * ny);
        for x in 0..mu.dom().len() {
            let mut row = vec![0.0; ny];
            for (yp, fiber) in fibers.iter().enumerate() {
                let mass = fp.entry(mu.image(x), yp);
                let w = self.probs(fiber.len());
                for (&y, v) in fiber.iter().zip(w) {
                    row[y] = mass * v;
                }
            }
            data.extend(row);
        }
        Channel::from_flat_unchecked(mu.dom().clone(), nu.dom().clone(), data)
    }

    pub fn random_stat_morphism(&mut self) -> StatMorphism {
        let nx = self.size_up_to(self.cfg.max_size);
        let ny = self.size_up_to(nx);
        let x = FinSet::indexed("x", nx).expect("positive size");
        let y = FinSet::indexed("y", ny).expect("positive size");
        let f = self.random_surjection(&x, &y).expect("|X| ≥ |Y|");
        let p = self.random_dist(&x);
        let s = self.random_section(&f).expect("surjective");
        StatMorphism::new(f, p, s).expect("generated morphism is valid")
    }

    pub fn random_two_morphism(&mut self) -> TwoMorphism {
        self.tower(1).pop().expect("one square")
    }

    /// `(spade, club)` with `club` stacked below `spade` and
    /// `club.f() == spade.fp()` exactly.
    pub fn stacked_pair(&mut self) -> (TwoMorphism, TwoMorphism) {
        let mut t = self.tower(2);
        let club = t.pop().expect("two squares");
        let spade = t.pop().expect("two squares");
        (spade, club)
    }

    /// A column of `levels` vertically composable squares, top first.
    ///
    /// Sizes shrink weakly going down; the bottom channel is drawn first and
    /// each channel above it is a fiberwise refinement of the one below.
    pub fn tower(&mut self, levels: usize) -> Vec<TwoMorphism> {
        assert!(levels >= 1);
        let mut xs = vec![self.size_up_to(self.cfg.max_size)];
        let mut ys = vec![self.size_up_to(self.cfg.max_size)];
        for _ in 0..levels {
            let nx = self.size_up_to(*xs.last().unwrap());
            let ny = self.size_up_to(*ys.last().unwrap());
            xs.push(nx);
            ys.push(ny);
        }
        let xsets: Vec<FinSet> = xs
            .iter()
            .enumerate()
            .map(|(k, &n)| FinSet::indexed(&level_prefix("x", k), n).expect("positive"))
            .collect();
        let ysets: Vec<FinSet> = ys
            .iter()
            .enumerate()
            .map(|(k, &n)| FinSet::indexed(&level_prefix("y", k), n).expect("positive"))
            .collect();
        let mus: Vec<DetMap> = (0..levels)
            .map(|k| self.random_surjection(&xsets[k], &xsets[k + 1]).expect("sizes shrink"))
            .collect();
        let nus: Vec<DetMap> = (0..levels)
            .map(|k| self.random_surjection(&ysets[k], &ysets[k + 1]).expect("sizes shrink"))
            .collect();

        let mut channels = vec![self.random_channel(&xsets[levels], &ysets[levels])];
        for k in (0..levels).rev() {
            let below = channels.last().expect("non-empty");
            let above = self.refine(below, &mus[k], &nus[k]);
            channels.push(above);
        }
        channels.reverse();

        let mut p = self.random_dist(&xsets[0]);
        let mut squares = Vec::with_capacity(levels);
        for k in 0..levels {
            let s = self.random_section(&mus[k]).expect("surjective");
            let t = self.random_section(&nus[k]).expect("surjective");
            let q = channels[k].apply(&p).expect("shapes agree");
            let dom = StatMorphism::new(mus[k].clone(), p, s).expect("valid");
            let cod = StatMorphism::new(nus[k].clone(), q, t).expect("valid");
            p = dom.q().clone();
            squares.push(
                TwoMorphism::new(dom, cod, channels[k].clone(), channels[k + 1].clone())
                    .expect("refined square commutes"),
            );
        }
        squares
    }
}

fn level_prefix(base: &str, level: usize) -> String {
    format!("{base}{}", "p".repeat(level))
}

/// A sequence of 1-morphisms `(f, p_n, s_n)` converging to a target, where
/// element `n` mixes `p` and `s` with fixed full-support draws at weight `1/n`.
#[derive(Debug, Clone)]
pub struct StatSequence {
    target: StatMorphism,
    prior_noise: Dist,
    section_noise: Channel,
    n_max: u64,
}

impl StatSequence {
    pub fn new(target: StatMorphism, n_max: u64, cfg: GenConfig) -> Self {
        let mut gen = Generator::new(GenConfig {
            full_support: true,
            ..cfg
        });
        let prior_noise = gen.random_dist(target.source());
        let section_noise = gen.random_section(target.f()).expect("valid target");
        Self {
            target,
            prior_noise,
            section_noise,
            n_max,
        }
    }

    pub fn target(&self) -> &StatMorphism {
        &self.target
    }

    pub fn element(&self, n: u64) -> Result<StatMorphism> {
        assert!(n >= 1);
        let w = 1.0 / n as f64;
        StatMorphism::new(
            self.target.f().clone(),
            self.target.p().mix(&self.prior_noise, w)?,
            self.target.s().mix(&self.section_noise, w)?,
        )
    }

    pub fn elements(&self) -> impl Iterator<Item = Result<StatMorphism>> + '_ {
        (1..=self.n_max).map(|n| self.element(n))
    }
}

/// A sequence of squares converging to a target with fixed deterministic
/// legs.
///
/// Element `n` mixes `p`, `s`, `t`, `f′` and `f` with fixed full-support draws
/// at weight `1/n`; the noise for `f` refines the noise for `f′`, so every
/// element commutes. `q`, `p′` and `q′` are re-derived.
#[derive(Debug, Clone)]
pub struct ConvergentSequence {
    target: TwoMorphism,
    prior_noise: Dist,
    s_noise: Channel,
    t_noise: Channel,
    f_noise: Channel,
    fp_noise: Channel,
    n_max: u64,
}

impl ConvergentSequence {
    pub fn new(target: TwoMorphism, n_max: u64, cfg: GenConfig) -> Self {
        let mut gen = Generator::new(GenConfig {
            full_support: true,
            ..cfg
        });
        let dom = target.dom();
        let cod = target.cod();
        let prior_noise = gen.random_dist(dom.source());
        let s_noise = gen.random_section(dom.f()).expect("valid target");
        let t_noise = gen.random_section(cod.f()).expect("valid target");
        let fp_noise = gen.random_channel(dom.target(), cod.target());
        let f_noise = gen.refine(&fp_noise, dom.f(), cod.f());
        Self {
            target,
            prior_noise,
            s_noise,
            t_noise,
            f_noise,
            fp_noise,
            n_max,
        }
    }

    pub fn target(&self) -> &TwoMorphism {
        &self.target
    }

    pub fn element(&self, n: u64) -> Result<TwoMorphism> {
        assert!(n >= 1);
        let w = 1.0 / n as f64;
        let dom = self.target.dom();
        let cod = self.target.cod();
        let p = dom.p().mix(&self.prior_noise, w)?;
        let f = self.target.f().mix(&self.f_noise, w)?;
        let fp = self.target.fp().mix(&self.fp_noise, w)?;
        let q = f.apply(&p)?;
        let dom = StatMorphism::new(dom.f().clone(), p, dom.s().mix(&self.s_noise, w)?)?;
        let cod = StatMorphism::new(cod.f().clone(), q, cod.s().mix(&self.t_noise, w)?)?;
        TwoMorphism::new(dom, cod, f, fp)
    }

    pub fn elements(&self) -> impl Iterator<Item = Result<TwoMorphism>> + '_ {
        (1..=self.n_max).map(|n| self.element(n))
    }
}

/// Convenience wrapper matching the free-function style of the other modules.
pub fn convergent_sequence(target: TwoMorphism, n_max: u64, cfg: GenConfig) -> ConvergentSequence {
    ConvergentSequence::new(target, n_max, cfg)
}
