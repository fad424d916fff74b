//! Named randomized suites checking the laws satisfied by `RE`, `CE` and
//! `RE₂`.
//!
//! Trial `i` of suite `name` draws its instance from a generator seeded with
//! [`trial_seed`]`(seed, name, i)`, so trials run in parallel and the report
//! does not depend on scheduling. Extended reals are compared as follows:
//! both sides `∞` passes, one side `∞` fails, finite sides are compared with
//! an absolute tolerance.
//!
//! `vanishing_probe` is report-only: it records the distribution of `CE` over
//! squares whose sections are both Bayes inverses, which is not zero in
//! general (with `ν` constant it is the mutual information of `f` under `p`).

use std::collections::BTreeMap;
use std::time::Instant;

use rayon::prelude::*;
use serde_json::{json, Map, Value};

use crate::document::{canonical_number, Document};
use crate::error::{Error, Result};
use crate::finstat::{bayes_inverse, convex_combine_stat, re, StatMorphism};
use crate::finstat2::{ce, ce_closed_form, convex_combine_two, fixtures, re2, square_violations, TwoMorphism};
use crate::prob::{conditional_kl, joint, kl, section_violation, DetMap, ExtReal, FinSet};
use crate::randgen::{splitmix64, GenConfig, Generator, StatSequence, ConvergentSequence};

/// Registered suites, in the order `all` runs them.
pub const SUITES: &[&str] = &[
    "chain_rule",
    "chain_rule_sparse",
    "re_functorial",
    "re_convex",
    "re_vanishing",
    "re_lsc",
    "lcm17",
    "lev77",
    "ce_closed_form",
    "ce_vertical",
    "ce_convex",
    "ce_vanishing",
    "re2_vertical",
    "re2_convex",
    "re2_lsc",
    "generator",
    "vanishing_probe",
];

/// Suites that record a distribution instead of asserting a law.
pub const PROBES: &[&str] = &["vanishing_probe"];

/// `CE` above this counts as a counterexample in the probe.
pub const PROBE_THRESHOLD: f64 = 1e-6;

/// Sequence indices sampled by the semicontinuity suites.
pub const LSC_SAMPLES: [u64; 5] = [10, 100, 1_000, 10_000, 1_000_000];

/// First sampled index belonging to the tail.
pub const LSC_TAIL_START: u64 = 1_000;

pub const MAX_COUNTEREXAMPLES: usize = 5;

/// Largest set size used by the convex-sum suites (base and components).
pub const CONVEX_MAX_SIZE: usize = 4;

#[derive(Debug, Clone, PartialEq)]
pub struct Counterexample {
    pub trial: usize,
    pub size: usize,
    pub violation: ExtReal,
    pub instance: Value,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SuiteReport {
    pub suite: String,
    pub trials: usize,
    pub passes: usize,
    pub max_violation: ExtReal,
    pub tol: f64,
    pub config: GenConfig,
    pub probe: bool,
    pub stats: BTreeMap<String, f64>,
    /// At most [`MAX_COUNTEREXAMPLES`], smallest instance first.
    pub counterexamples: Vec<Counterexample>,
    /// Wall-clock seconds; left out of [`SuiteReport::to_value`] unless
    /// asked for, so reports stay byte-identical.
    pub elapsed: f64,
}

impl SuiteReport {
    pub fn all_passed(&self) -> bool {
        self.passes == self.trials
    }

    pub fn to_value(&self, with_timing: bool) -> Value {
        let stats: Map<String, Value> = self
            .stats
            .iter()
            .map(|(k, &v)| (k.clone(), canonical_number(v)))
            .collect();
        let counterexamples: Vec<Value> = self
            .counterexamples
            .iter()
            .map(|c| {
                json!({
                    "trial": c.trial,
                    "size": c.size,
                    "violation": ext_value(c.violation),
                    "instance": c.instance,
                })
            })
            .collect();
        let mut v = json!({
            "suite": self.suite,
            "trials": self.trials,
            "passes": self.passes,
            "max_violation": ext_value(self.max_violation),
            "tol": canonical_number(self.tol),
            "probe": self.probe,
            "config": {
                "seed": self.config.seed,
                "max_size": self.config.max_size,
                "full_support": self.config.full_support,
                "dirichlet_like": self.config.dirichlet_like,
            },
            "stats": stats,
            "counterexamples": counterexamples,
        });
        if with_timing {
            v["elapsed"] = canonical_number(self.elapsed);
        }
        v
    }

    pub fn to_json(&self, with_timing: bool) -> String {
        serde_json::to_string_pretty(&self.to_value(with_timing)).expect("finite numbers")
    }
}

fn ext_value(v: ExtReal) -> Value {
    canonical_number(v.to_f64())
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct RunOptions {
    /// In the vertical suites, replace this trial's composite with a fixed
    /// square whose entropies are `log 2`.
    pub corrupt_trial: Option<usize>,
}

/// Sub-seed of one trial; depends only on the master seed, the suite name and
/// the trial index.
pub fn trial_seed(master: u64, suite: &str, trial: usize) -> u64 {
    splitmix64(splitmix64(master ^ fnv1a(suite)).wrapping_add(trial as u64))
}

fn fnv1a(s: &str) -> u64 {
    s.bytes().fold(0xcbf2_9ce4_8422_2325, |h, b| {
        (h ^ u64::from(b)).wrapping_mul(0x0000_0100_0000_01b3)
    })
}

pub fn run_suite(name: &str, trials: usize, cfg: GenConfig, tol: f64) -> Result<SuiteReport> {
    run_suite_with(name, trials, cfg, tol, RunOptions::default())
}

/// One report per suite; `"all"` runs every registered suite.
pub fn run_suites(name: &str, trials: usize, cfg: GenConfig, tol: f64) -> Result<Vec<SuiteReport>> {
    if name == "all" {
        SUITES
            .iter()
            .map(|s| run_suite(s, trials, cfg, tol))
            .collect()
    } else {
        Ok(vec![run_suite(name, trials, cfg, tol)?])
    }
}

pub fn run_suite_with(
    name: &str,
    trials: usize,
    cfg: GenConfig,
    tol: f64,
    opts: RunOptions,
) -> Result<SuiteReport> {
    if !tol.is_finite() || tol < 0.0 {
        return Err(Error::InvalidTolerance(tol));
    }
    if cfg.max_size == 0 {
        return Err(Error::SizeError("max_size must be positive".into()));
    }
    let body = suite_fn(name).ok_or_else(|| Error::UnknownSuite(name.to_owned()))?;
    let probe = PROBES.contains(&name);
    let threshold = if probe { PROBE_THRESHOLD } else { tol };

    let start = Instant::now();
    let results: Vec<Trial> = (0..trials)
        .into_par_iter()
        .map(|index| {
            let ctx = Ctx {
                index,
                cfg: cfg.with_seed(trial_seed(cfg.seed, name, index)),
                tol: threshold,
                corrupt: opts.corrupt_trial == Some(index),
            };
            body(&ctx).unwrap_or_else(Trial::from_error)
        })
        .collect();
    let elapsed = start.elapsed().as_secs_f64();

    let limit = ExtReal::finite(threshold);
    let mut passes = 0;
    let mut max_violation = ExtReal::ZERO;
    let mut infinite = 0usize;
    let mut stats: BTreeMap<String, f64> = BTreeMap::new();
    let mut failures = Vec::new();
    let mut samples = Vec::new();
    for (index, t) in results.into_iter().enumerate() {
        if t.violation > max_violation {
            max_violation = t.violation;
        }
        if t.infinite {
            infinite += 1;
        }
        for (key, v) in t.extras {
            let e = stats.entry(key.to_owned()).or_insert(f64::NEG_INFINITY);
            *e = e.max(v);
        }
        samples.push(t.violation.to_f64());
        if t.violation <= limit {
            passes += 1;
        } else {
            failures.push(Counterexample {
                trial: index,
                size: t.size,
                violation: t.violation,
                instance: t.witness.unwrap_or(Value::Null),
            });
        }
    }
    failures.sort_by_key(|c| (c.size, c.trial));
    failures.truncate(MAX_COUNTEREXAMPLES);
    stats.insert("infinite_cases".into(), infinite as f64);
    if probe && !samples.is_empty() {
        samples.sort_by(f64::total_cmp);
        let n = samples.len();
        let median = if n % 2 == 1 {
            samples[n / 2]
        } else {
            0.5 * (samples[n / 2 - 1] + samples[n / 2])
        };
        stats.insert("ce_min".into(), samples[0]);
        stats.insert("ce_median".into(), median);
        stats.insert("ce_max".into(), samples[n - 1]);
    }

    Ok(SuiteReport {
        suite: name.to_owned(),
        trials,
        passes,
        max_violation,
        tol,
        config: cfg,
        probe,
        stats,
        counterexamples: failures,
        elapsed,
    })
}

struct Ctx {
    index: usize,
    cfg: GenConfig,
    tol: f64,
    corrupt: bool,
}

impl Ctx {
    fn gen(&self) -> Generator {
        Generator::new(self.cfg)
    }

    /// Every fourth trial samples sparse instances so `∞` cases occur.
    fn gen_mixed(&self) -> Generator {
        if self.index % 4 == 3 {
            Generator::new(self.cfg.sparse())
        } else {
            self.gen()
        }
    }

    fn gen_convex(&self) -> Generator {
        Generator::new(GenConfig {
            max_size: self.cfg.max_size.min(CONVEX_MAX_SIZE),
            ..self.cfg
        })
    }
}

struct Trial {
    violation: ExtReal,
    size: usize,
    infinite: bool,
    witness: Option<Value>,
    extras: Vec<(&'static str, f64)>,
}

impl Trial {
    fn from_error(e: Error) -> Trial {
        Trial {
            violation: ExtReal::Infinite,
            size: 0,
            infinite: false,
            witness: Some(json!({ "error": e.to_string() })),
            extras: Vec::new(),
        }
    }
}

/// `|lhs − rhs|` against `ctx.tol`; the witness is built only on failure.
fn compare(
    ctx: &Ctx,
    lhs: ExtReal,
    rhs: ExtReal,
    size: usize,
    witness: impl FnOnce() -> Document,
) -> Trial {
    let violation = lhs.distance(rhs);
    bounded(ctx, violation, size, lhs.is_infinite() || rhs.is_infinite(), witness)
}

/// `violation` against `ctx.tol`.
fn bounded(
    ctx: &Ctx,
    violation: ExtReal,
    size: usize,
    infinite: bool,
    witness: impl FnOnce() -> Document,
) -> Trial {
    let failed = violation > ExtReal::finite(ctx.tol);
    Trial {
        violation,
        size,
        infinite,
        witness: failed.then(|| witness().to_value()),
        extras: Vec::new(),
    }
}

type SuiteFn = fn(&Ctx) -> Result<Trial>;

fn suite_fn(name: &str) -> Option<SuiteFn> {
    Some(match name {
        "chain_rule" => |c| chain_rule(c, false),
        "chain_rule_sparse" => |c| chain_rule(c, true),
        "re_functorial" => re_functorial,
        "re_convex" => re_convex,
        "re_vanishing" => re_vanishing,
        "re_lsc" => re_lsc,
        "lcm17" => lcm17,
        "lev77" => lev77,
        "ce_closed_form" => ce_closed_form_suite,
        "ce_vertical" => |c| vertical(c, ce),
        "ce_convex" => |c| convex_two(c, ce),
        "ce_vanishing" => ce_vanishing,
        "re2_vertical" => |c| vertical(c, re2),
        "re2_convex" => |c| convex_two(c, re2),
        "re2_lsc" => re2_lsc,
        "generator" => generator,
        "vanishing_probe" => vanishing_probe,
        _ => return None,
    })
}

fn doc(build: impl FnOnce(&mut Document) -> std::result::Result<(), crate::document::DocError>) -> Document {
    let mut d = Document::default();
    build(&mut d).expect("witness names are distinct");
    d
}

fn chain_rule(ctx: &Ctx, sparse: bool) -> Result<Trial> {
    let cfg = GenConfig {
        full_support: !sparse,
        ..ctx.cfg
    };
    let mut g = Generator::new(cfg);
    let x = FinSet::indexed("x", g.size_up_to(cfg.max_size))?;
    let y = FinSet::indexed("y", g.size_up_to(cfg.max_size))?;
    let p = g.random_dist(&x);
    let f = g.random_channel(&x, &y);
    let q = g.random_dist(&x);
    let gc = g.random_channel(&x, &y);
    let lhs = kl(&joint(&f, &p)?, &joint(&gc, &q)?)?;
    let rhs = kl(&p, &q)? + conditional_kl(&f, &gc, &p)?;
    Ok(compare(ctx, lhs, rhs, x.len() + y.len(), || {
        doc(|d| {
            d.insert_dist("p", &p)?;
            d.insert_dist("q", &q)?;
            d.insert_channel("f", &f)?;
            d.insert_channel("g", &gc)?;
            Ok(())
        })
    }))
}

fn re_functorial(ctx: &Ctx) -> Result<Trial> {
    let mut g = ctx.gen_mixed();
    let first = g.random_stat_morphism();
    let y = first.target().clone();
    let z = FinSet::indexed("z", g.size_up_to(y.len()))?;
    let h = g.random_surjection(&y, &z)?;
    let t = g.random_section(&h)?;
    let second = StatMorphism::new(h, first.q().clone(), t)?;
    let comp = second.compose(&first)?;
    let size = first.size() + z.len();
    Ok(compare(ctx, re(&comp), re(&first) + re(&second), size, || {
        doc(|d| {
            d.insert_morphism("first", &first)?;
            d.insert_morphism("second", &second)?;
            Ok(())
        })
    }))
}

fn re_convex(ctx: &Ctx) -> Result<Trial> {
    let mut g = ctx.gen_convex();
    let tags = FinSet::indexed("c", g.size_up_to(g.config().max_size))?;
    let base = g.random_dist(&tags);
    let mut family: Vec<StatMorphism> = (0..tags.len()).map(|_| g.random_stat_morphism()).collect();
    if ctx.index == 0 {
        family[0] = fixtures::support_violation_morphism();
    }
    let combo = convex_combine_stat(&base, &family)?;
    let rhs: ExtReal = family
        .iter()
        .zip(base.probs())
        .map(|(m, &w)| re(m).scale(w))
        .sum();
    Ok(compare(ctx, re(&combo), rhs, combo.size(), || {
        doc(|d| {
            d.insert_dist("base", &base)?;
            for (i, m) in family.iter().enumerate() {
                d.insert_morphism(&format!("component{i}"), m)?;
            }
            Ok(())
        })
    }))
}

fn re_vanishing(ctx: &Ctx) -> Result<Trial> {
    let mut g = ctx.gen_mixed();
    let m = g.random_stat_morphism();
    let s = bayes_inverse(m.f(), m.p())?;
    let opt = StatMorphism::new(m.f().clone(), m.p().clone(), s)?;
    let value = re(&opt);
    Ok(bounded(ctx, value, opt.size(), value.is_infinite(), || {
        doc(|d| d.insert_morphism("m", &opt).map(drop))
    }))
}

/// `value(limit) − min over the sampled tail`, floored at 0.
fn tail_deficit(limit: ExtReal, samples: &[(u64, ExtReal)]) -> ExtReal {
    let tail_min = samples
        .iter()
        .filter(|(n, _)| *n >= LSC_TAIL_START)
        .map(|&(_, v)| v)
        .fold(ExtReal::Infinite, |a, b| if b < a { b } else { a });
    match (limit, tail_min) {
        (_, ExtReal::Infinite) => ExtReal::ZERO,
        (ExtReal::Infinite, _) => ExtReal::Infinite,
        (ExtReal::Finite(a), ExtReal::Finite(b)) => ExtReal::finite((a - b).max(0.0)),
    }
}

fn worst_sample_deficit(limit: ExtReal, samples: &[(u64, ExtReal)]) -> f64 {
    samples
        .iter()
        .map(|&(_, v)| match (limit, v) {
            (ExtReal::Finite(a), ExtReal::Finite(b)) => a - b,
            _ => 0.0,
        })
        .fold(0.0, f64::max)
}

fn re_lsc(ctx: &Ctx) -> Result<Trial> {
    let mut g = ctx.gen();
    let target = g.random_stat_morphism();
    let noise_seed = g.rng().next_u64();
    let seq = StatSequence::new(target.clone(), LSC_SAMPLES[4], ctx.cfg.with_seed(noise_seed));
    let samples = LSC_SAMPLES
        .iter()
        .map(|&n| Ok((n, re(&seq.element(n)?))))
        .collect::<Result<Vec<_>>>()?;
    let limit = re(&target);
    let mut t = bounded(ctx, tail_deficit(limit, &samples), target.size(), limit.is_infinite(), || {
        doc(|d| d.insert_morphism("limit", &target).map(drop))
    });
    t.extras.push(("worst_sample_deficit", worst_sample_deficit(limit, &samples)));
    Ok(t)
}

fn re2_lsc(ctx: &Ctx) -> Result<Trial> {
    let mut g = ctx.gen();
    let target = g.random_two_morphism();
    let noise_seed = g.rng().next_u64();
    let seq = ConvergentSequence::new(target.clone(), LSC_SAMPLES[4], ctx.cfg.with_seed(noise_seed));
    let samples = LSC_SAMPLES
        .iter()
        .map(|&n| Ok((n, re2(&seq.element(n)?))))
        .collect::<Result<Vec<_>>>()?;
    let limit = re2(&target);
    let mut t = bounded(ctx, tail_deficit(limit, &samples), target.size(), limit.is_infinite(), || {
        doc(|d| d.insert_two_morphism("limit", &target).map(drop))
    });
    t.extras.push(("worst_sample_deficit", worst_sample_deficit(limit, &samples)));
    Ok(t)
}

/// Both fast paths against the generic kernel product.
fn lcm17(ctx: &Ctx) -> Result<Trial> {
    let mut g = ctx.gen();
    let max = ctx.cfg.max_size;

    let x = FinSet::indexed("x", g.size_up_to(max))?;
    let y = FinSet::indexed("y", g.size_up_to(max))?;
    let z = FinSet::indexed("z", g.size_up_to(max))?;
    let map = (0..x.len()).map(|_| g.rng().below(y.len())).collect();
    let h = DetMap::new(x.clone(), y.clone(), map)?;
    let gy = g.random_channel(&y, &z);
    let pure_gap = gy.compose_pure(&h)?.max_abs_diff(&gy.compose(&h.lift())?)?;

    let nz = g.size_up_to(max);
    let zs = FinSet::indexed("w", nz)?;
    let ys = FinSet::indexed("v", g.size_up_to(nz))?;
    let hs = g.random_surjection(&zs, &ys)?;
    let sec = g.random_section(&hs)?;
    let f = g.random_channel(&x, &ys);
    let section_gap = sec
        .compose_through_section(&hs, &f)?
        .max_abs_diff(&sec.compose(&f)?)?;

    let size = x.len() + y.len() + z.len() + zs.len() + ys.len();
    let mut t = bounded(ctx, ExtReal::finite(pure_gap.max(section_gap)), size, false, || {
        doc(|d| {
            d.insert_det_map("h", &h)?;
            d.insert_channel("g", &gy)?;
            d.insert_det_map("h_section", &hs)?;
            d.insert_channel("s", &sec)?;
            d.insert_channel("f", &f)?;
            Ok(())
        })
    });
    t.extras.push(("pure_max", pure_gap));
    t.extras.push(("section_max", section_gap));
    Ok(t)
}

fn lev77(ctx: &Ctx) -> Result<Trial> {
    let sq = ctx.gen_mixed().random_two_morphism();
    let (_, gap) = sq.marginal_check(ctx.tol);
    Ok(bounded(ctx, ExtReal::finite(gap), sq.size(), false, || {
        doc(|d| d.insert_two_morphism("square", &sq).map(drop))
    }))
}

fn ce_closed_form_suite(ctx: &Ctx) -> Result<Trial> {
    let sq = ctx.gen_mixed().random_two_morphism();
    Ok(compare(ctx, ce(&sq), ce_closed_form(&sq), sq.size(), || {
        doc(|d| d.insert_two_morphism("square", &sq).map(drop))
    }))
}

/// `value(club∘spade) = value(club) + value(spade)`. Trial 0 is a pair whose
/// top square has a support violation, so both sides are `∞`.
fn vertical(ctx: &Ctx, value: fn(&TwoMorphism) -> ExtReal) -> Result<Trial> {
    let (spade, club) = if ctx.index == 0 {
        let spade = fixtures::collapse_square([0.5, 0.5], [1.0, 0.0]);
        let club = TwoMorphism::vertical_identity(spade.fp().clone(), spade.dom().q().clone())?;
        (spade, club)
    } else {
        ctx.gen().stacked_pair()
    };
    let composite = if ctx.corrupt {
        fixtures::collapse_square([1.0, 0.0], [0.5, 0.5])
    } else {
        club.vcompose(&spade)?
    };
    let size = spade.size() + club.cod().size();
    Ok(compare(ctx, value(&composite), value(&club) + value(&spade), size, || {
        doc(|d| {
            d.insert_two_morphism("spade", &spade)?;
            d.insert_two_morphism("club", &club)?;
            Ok(())
        })
    }))
}

/// Convex linearity; trial 0 has a component with `CE = ∞`.
fn convex_two(ctx: &Ctx, value: fn(&TwoMorphism) -> ExtReal) -> Result<Trial> {
    let mut g = ctx.gen_convex();
    let tags = FinSet::indexed("c", g.size_up_to(g.config().max_size))?;
    let base = g.random_dist(&tags);
    let mut family: Vec<TwoMorphism> = (0..tags.len()).map(|_| g.random_two_morphism()).collect();
    if ctx.index == 0 {
        family[0] = fixtures::collapse_square([0.5, 0.5], [1.0, 0.0]);
    }
    let combo = convex_combine_two(&base, &family)?;
    let rhs: ExtReal = family
        .iter()
        .zip(base.probs())
        .map(|(sq, &w)| value(sq).scale(w))
        .sum();
    Ok(compare(ctx, value(&combo), rhs, combo.size(), || {
        doc(|d| {
            d.insert_dist("base", &base)?;
            for (i, sq) in family.iter().enumerate() {
                d.insert_two_morphism(&format!("component{i}"), sq)?;
            }
            Ok(())
        })
    }))
}

/// Squares with `f = t∘f′∘μ` (so `is_two_optimal` holds); on even trials
/// `s` is also the Bayes inverse and `RE₂` must vanish too.
fn ce_vanishing(ctx: &Ctx) -> Result<Trial> {
    let sq = ctx.gen_mixed().random_two_morphism();
    let dom_optimal = ctx.index % 2 == 0;
    let dom = if dom_optimal {
        let mu = sq.dom().f();
        let p = sq.dom().p();
        StatMorphism::new(mu.clone(), p.clone(), bayes_inverse(mu, p)?)?
    } else {
        sq.dom().clone()
    };
    let f = sq.reconstruction();
    let q = f.apply(dom.p())?;
    let cod = StatMorphism::new(sq.cod().f().clone(), q, sq.cod().s().clone())?;
    let opt = TwoMorphism::new(dom, cod, f, sq.fp().clone())?;

    let mut violation = if opt.is_two_optimal(1e-12) {
        ce(&opt)
    } else {
        ExtReal::Infinite
    };
    if dom_optimal {
        let r2 = re2(&opt);
        if r2 > violation {
            violation = r2;
        }
    }
    Ok(bounded(ctx, violation, opt.size(), violation.is_infinite(), || {
        doc(|d| d.insert_two_morphism("square", &opt).map(drop))
    }))
}

/// Regenerates each draw from the same seed and re-checks every validator
/// condition; a non-identical regeneration counts as `∞`.
fn generator(ctx: &Ctx) -> Result<Trial> {
    let a = ctx.gen().random_two_morphism();
    let b = ctx.gen().random_two_morphism();
    let text = |sq: &TwoMorphism| doc(|d| d.insert_two_morphism("square", sq).map(drop)).to_canonical_string();
    let identical = text(&a) == text(&b);

    let mut worst = square_violations(a.dom(), a.cod(), a.f(), a.fp())?
        .into_iter()
        .fold(0.0, f64::max);
    worst = worst.max(section_violation(a.dom().s(), a.dom().f())?);
    worst = worst.max(section_violation(a.cod().s(), a.cod().f())?);
    let violation = if identical {
        ExtReal::finite(worst)
    } else {
        ExtReal::Infinite
    };
    let zero_in_f = a.f().rows().flatten().any(|&v| v == 0.0);
    let mut t = bounded(ctx, violation, a.size(), false, || {
        doc(|d| d.insert_two_morphism("square", &a).map(drop))
    });
    t.extras.push(("zero_in_f_seen", f64::from(u8::from(zero_in_f))));
    Ok(t)
}

fn vanishing_probe(ctx: &Ctx) -> Result<Trial> {
    let sq = ctx.gen().random_two_morphism();
    let (mu, p) = (sq.dom().f(), sq.dom().p());
    let (nu, q) = (sq.cod().f(), sq.cod().p());
    let dom = StatMorphism::new(mu.clone(), p.clone(), bayes_inverse(mu, p)?)?;
    let cod = StatMorphism::new(nu.clone(), q.clone(), bayes_inverse(nu, q)?)?;
    let opt = TwoMorphism::new(dom, cod, sq.f().clone(), sq.fp().clone())?;
    let value = ce(&opt);
    Ok(bounded(ctx, value, opt.size(), value.is_infinite(), || {
        doc(|d| d.insert_two_morphism("square", &opt).map(drop))
    }))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn cfg() -> GenConfig {
        GenConfig::default()
    }

    #[test]
    fn unknown_suite_is_an_error() {
        assert_eq!(
            run_suite("nope", 1, cfg(), 1e-8),
            Err(Error::UnknownSuite("nope".into()))
        );
        assert!(matches!(
            run_suite("chain_rule", 1, cfg(), -1.0),
            Err(Error::InvalidTolerance(_))
        ));
    }

    #[test]
    fn every_registered_suite_resolves() {
        for name in SUITES {
            assert!(suite_fn(name).is_some(), "{name}");
        }
    }

    #[test]
    fn trial_seeds_are_distinct() {
        let a = trial_seed(42, "chain_rule", 0);
        assert_ne!(a, trial_seed(42, "chain_rule", 1));
        assert_ne!(a, trial_seed(42, "lev77", 0));
        assert_ne!(a, trial_seed(43, "chain_rule", 0));
    }

    #[test]
    fn reports_are_reproducible() {
        let a = run_suite("chain_rule_sparse", 40, cfg(), 1e-8).unwrap();
        let b = run_suite("chain_rule_sparse", 40, cfg(), 1e-8).unwrap();
        assert_eq!(a.to_json(false), b.to_json(false));
        assert!(a.stats["infinite_cases"] > 0.0);
    }

    #[test]
    fn corrupted_composite_is_reported() {
        let opts = RunOptions {
            corrupt_trial: Some(3),
        };
        let r = run_suite_with("ce_vertical", 20, cfg(), 1e-8, opts).unwrap();
        assert_eq!(r.passes, 19);
        assert_eq!(r.counterexamples.len(), 1);
        assert_eq!(r.counterexamples[0].trial, 3);
        assert!(r.counterexamples[0].instance["two_morphisms"].is_object());
    }

    #[test]
    fn probe_records_its_distribution() {
        let r = run_suite("vanishing_probe", 30, cfg(), 1e-8).unwrap();
        assert!(r.probe);
        for key in ["ce_min", "ce_median", "ce_max"] {
            assert!(r.stats.contains_key(key));
        }
        assert!(r.stats["ce_min"] <= r.stats["ce_median"]);
        assert!(r.stats["ce_median"] <= r.stats["ce_max"]);
    }

    #[test]
    fn sparse_draws_reach_zero_entries() {
        let r = run_suite("generator", 1000, cfg().sparse(), 1e-9).unwrap();
        assert!(r.all_passed());
        assert_eq!(r.stats["zero_in_f_seen"], 1.0);
    }

    #[test]
    fn tail_deficit_cases() {
        let s = [(10, ExtReal::finite(0.0)), (1000, ExtReal::finite(0.5))];
        assert_eq!(tail_deficit(ExtReal::finite(0.4), &s), ExtReal::ZERO);
        assert_eq!(tail_deficit(ExtReal::finite(0.7), &s).to_f64(), 0.7 - 0.5);
        assert_eq!(tail_deficit(ExtReal::Infinite, &s), ExtReal::Infinite);
    }
}
