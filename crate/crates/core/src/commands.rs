//! Subcommands of the `finstat` tool as pure functions from inputs to
//! [`Outcome`]s, so the binary only handles argument parsing and I/O.
//!
//! Exit codes: 0 success, 1 semantic failure (invalid object, failed law,
//! impossible composition), 2 parse or usage error.

use std::fmt::Write as _;

use clap::ValueEnum;

use crate::document::{canonical_number, parse, DocError, Document};
use crate::error::Error;
use crate::finstat2::square_violations;
use crate::harness::{run_suites, PROBES};
use crate::prob::{kl, section_violation, ExtReal, LogBase};
use crate::randgen::{GenConfig, Generator};
use crate::prob::FinSet;

pub const EXIT_OK: u8 = 0;
pub const EXIT_SEMANTIC: u8 = 1;
pub const EXIT_USAGE: u8 = 2;

#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct Outcome {
    pub code: u8,
    pub stdout: String,
    pub stderr: String,
}

impl Outcome {
    fn ok(stdout: String) -> Self {
        Self {
            code: EXIT_OK,
            stdout,
            stderr: String::new(),
        }
    }

    fn fail(code: u8, stderr: impl Into<String>) -> Self {
        let mut stderr = stderr.into();
        if !stderr.ends_with('\n') {
            stderr.push('\n');
        }
        Self {
            code,
            stdout: String::new(),
            stderr,
        }
    }
}

fn doc_failure(e: DocError) -> Outcome {
    let code = match e {
        DocError::Invalid { .. } => EXIT_SEMANTIC,
        _ => EXIT_USAGE,
    };
    Outcome::fail(code, format!("error: {e}"))
}

fn lib_failure(e: Error) -> Outcome {
    Outcome::fail(EXIT_SEMANTIC, format!("error: {e}"))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum EntropyKind {
    /// `D(p, q)` between two dists (`--against` names `q`).
    Kl,
    /// Relative entropy of a morphism.
    Re,
    /// Conditional relative entropy of a 2-morphism.
    Ce,
    /// 2-relative entropy of a 2-morphism.
    Re2,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum ComposeMode {
    /// `left∘right` for channels.
    Channel,
    /// `left∘right` for morphisms (`right` first).
    Morphism,
    /// `left` stacked below `right`.
    Vertical,
    /// `left` pasted after `right` along `right`'s codomain morphism.
    Horizontal,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum GenerateKind {
    Dist,
    Channel,
    Morphism,
    TwoMorphism,
    StackedPair,
}

/// 12 significant digits, `0` for zero and `inf` for `∞`.
pub fn format_entropy(v: ExtReal) -> String {
    let x = match v {
        ExtReal::Infinite => return "inf".into(),
        ExtReal::Finite(x) => x,
    };
    if x == 0.0 {
        return "0".into();
    }
    let sci = format!("{x:.11e}");
    let exp: i32 = sci[sci.find('e').expect("exponent") + 1..]
        .parse()
        .expect("integer exponent");
    if (-5..12).contains(&exp) {
        format!("{x:.*}", (11 - exp) as usize)
    } else {
        sci
    }
}

struct Row {
    kind: &'static str,
    name: String,
    violation: Option<f64>,
    error: Option<String>,
}

fn vec_violation(probs: &[f64]) -> f64 {
    if probs.iter().any(|v| !v.is_finite()) {
        return f64::INFINITY;
    }
    let sum: f64 = probs.iter().sum();
    let neg = probs.iter().filter(|&&v| v < 0.0).fold(0.0_f64, |m, &v| m.max(-v));
    (sum - 1.0).abs().max(neg)
}

fn row<T>(
    kind: &'static str,
    name: &str,
    violation: Option<f64>,
    built: std::result::Result<T, DocError>,
) -> Row {
    Row {
        kind,
        name: name.to_owned(),
        violation,
        error: built.err().map(|e| match e {
            DocError::Invalid { source, .. } => source.to_string(),
            other => other.to_string(),
        }),
    }
}

/// Per-object table of measured violations. An object is `ok` when its
/// violation is within `tol` and it also passes the library validators.
pub fn validate(text: &str, tol: f64) -> Outcome {
    let doc = match parse(text) {
        Ok(d) => d,
        Err(e) => return doc_failure(e),
    };
    let mut rows = Vec::new();
    for name in doc.spaces.keys() {
        rows.push(row("space", name, Some(0.0), doc.space(name)));
    }
    for name in doc.dists.keys() {
        let v = doc.dist_probs(name).ok().map(|(_, p)| vec_violation(&p));
        rows.push(row("dist", name, v, doc.dist(name)));
    }
    for name in doc.channels.keys() {
        let v = doc
            .channel_rows(name)
            .ok()
            .map(|(_, _, rows)| rows.iter().map(|r| vec_violation(r)).fold(0.0, f64::max));
        rows.push(row("channel", name, v, doc.channel(name)));
    }
    for name in doc.det_maps.keys() {
        rows.push(row("det_map", name, Some(0.0), doc.det_map(name)));
    }
    for (name, spec) in &doc.morphisms {
        let v = match (doc.det_map(&spec.f), doc.channel(&spec.s)) {
            (Ok(f), Ok(s)) => section_violation(&s, &f).ok(),
            _ => None,
        };
        rows.push(row("morphism", name, v, doc.morphism(name)));
    }
    for (name, spec) in &doc.two_morphisms {
        let parts = (
            doc.morphism(&spec.dom),
            doc.morphism(&spec.cod),
            doc.channel(&spec.f),
            doc.channel(&spec.fp),
        );
        let v = match parts {
            (Ok(d), Ok(c), Ok(f), Ok(fp)) => square_violations(&d, &c, &f, &fp)
                .ok()
                .map(|v| v.into_iter().fold(0.0, f64::max)),
            _ => None,
        };
        rows.push(row("two_morphism", name, v, doc.two_morphism(name)));
    }

    let mut out = String::new();
    let width = rows.iter().map(|r| r.name.len()).max().unwrap_or(4).max(4);
    writeln!(out, "{:<13} {:<width$} {:>22}  status", "kind", "name", "max_violation").unwrap();
    let mut failed = false;
    for r in &rows {
        let shown = match r.violation {
            Some(v) => canonical_number(v).to_string().trim_matches('"').to_owned(),
            None => "-".to_owned(),
        };
        let status = match (&r.error, r.violation) {
            (Some(e), _) => format!("FAIL ({e})"),
            (None, Some(v)) if v <= tol => "ok".to_owned(),
            (None, _) => "FAIL (exceeds tolerance)".to_owned(),
        };
        failed |= status != "ok";
        writeln!(out, "{:<13} {:<width$} {:>22}  {status}", r.kind, r.name, shown).unwrap();
    }
    Outcome {
        code: if failed { EXIT_SEMANTIC } else { EXIT_OK },
        stdout: out,
        stderr: String::new(),
    }
}

pub fn entropy(
    text: &str,
    target: &str,
    kind: EntropyKind,
    against: Option<&str>,
    base: LogBase,
) -> Outcome {
    let doc = match parse(text) {
        Ok(d) => d,
        Err(e) => return doc_failure(e),
    };
    let missing = |section: &str| {
        Outcome::fail(EXIT_USAGE, format!("error: no {section} named `{target}`"))
    };
    let value = match kind {
        EntropyKind::Kl => {
            let Some(other) = against else {
                return Outcome::fail(EXIT_USAGE, "error: --kind kl needs --against <DIST>");
            };
            if !doc.dists.contains_key(target) {
                return missing("dist");
            }
            if !doc.dists.contains_key(other) {
                return Outcome::fail(EXIT_USAGE, format!("error: no dist named `{other}`"));
            }
            let (p, q) = match (doc.dist(target), doc.dist(other)) {
                (Ok(p), Ok(q)) => (p, q),
                (Err(e), _) | (_, Err(e)) => return doc_failure(e),
            };
            match kl(&p, &q) {
                Ok(v) => v,
                Err(e) => return lib_failure(e),
            }
        }
        EntropyKind::Re => {
            if !doc.morphisms.contains_key(target) {
                return missing("morphism");
            }
            match doc.morphism(target) {
                Ok(m) => m.relative_entropy(),
                Err(e) => return doc_failure(e),
            }
        }
        EntropyKind::Ce | EntropyKind::Re2 => {
            if !doc.two_morphisms.contains_key(target) {
                return missing("two_morphism");
            }
            match doc.two_morphism(target) {
                Ok(sq) if kind == EntropyKind::Ce => sq.conditional_relative_entropy(),
                Ok(sq) => sq.two_relative_entropy(),
                Err(e) => return doc_failure(e),
            }
        }
    };
    Outcome::ok(format!("{}\n", format_entropy(base.convert(value))))
}

/// Adds the composite of `left` and `right` to the document under `name`
/// and returns the extended document in canonical form.
pub fn compose(text: &str, left: &str, right: &str, mode: ComposeMode, name: &str) -> Outcome {
    let mut doc = match parse(text) {
        Ok(d) => d,
        Err(e) => return doc_failure(e),
    };
    let (section_has, section) = match mode {
        ComposeMode::Channel => (doc.channels.contains_key(left) && doc.channels.contains_key(right), "channels"),
        ComposeMode::Morphism => (doc.morphisms.contains_key(left) && doc.morphisms.contains_key(right), "morphisms"),
        ComposeMode::Vertical | ComposeMode::Horizontal => (
            doc.two_morphisms.contains_key(left) && doc.two_morphisms.contains_key(right),
            "two_morphisms",
        ),
    };
    if !section_has {
        return Outcome::fail(
            EXIT_USAGE,
            format!("error: `{left}` and `{right}` must both be defined in {section}"),
        );
    }
    let inserted = match mode {
        ComposeMode::Channel => compose_with(&mut doc, |d| {
            let c = d.channel(left)?.compose(&d.channel(right)?).map_err(|e| invalid(name, e))?;
            d.insert_channel(name, &c)
        }),
        ComposeMode::Morphism => compose_with(&mut doc, |d| {
            let m = d.morphism(left)?.compose(&d.morphism(right)?).map_err(|e| invalid(name, e))?;
            d.insert_morphism(name, &m)
        }),
        ComposeMode::Vertical => compose_with(&mut doc, |d| {
            let sq = d
                .two_morphism(left)?
                .vcompose(&d.two_morphism(right)?)
                .map_err(|e| invalid(name, e))?;
            d.insert_two_morphism(name, &sq)
        }),
        ComposeMode::Horizontal => compose_with(&mut doc, |d| {
            let sq = d
                .two_morphism(left)?
                .hcompose(&d.two_morphism(right)?)
                .map_err(|e| invalid(name, e))?;
            d.insert_two_morphism(name, &sq)
        }),
    };
    match inserted {
        Ok(()) => Outcome::ok(doc.to_canonical_string()),
        Err(DocError::NameTaken(n)) => Outcome::fail(
            EXIT_USAGE,
            format!("error: name `{n}` is already defined; pick another with --name"),
        ),
        Err(e) => doc_failure(e),
    }
}

fn invalid(name: &str, source: Error) -> DocError {
    DocError::Invalid {
        object: format!("composite `{name}`"),
        source,
    }
}

fn compose_with(
    doc: &mut Document,
    f: impl FnOnce(&mut Document) -> std::result::Result<String, DocError>,
) -> std::result::Result<(), DocError> {
    f(doc).map(drop)
}

/// Runs a suite (or `all`) and prints its report as JSON. Exits 1 if any
/// non-probe suite has a failing trial.
pub fn check(suite: &str, trials: usize, cfg: GenConfig, tol: f64, timing: bool) -> Outcome {
    let reports = match run_suites(suite, trials, cfg, tol) {
        Ok(r) => r,
        Err(e @ (Error::UnknownSuite(_) | Error::InvalidTolerance(_) | Error::SizeError(_))) => {
            return Outcome::fail(EXIT_USAGE, format!("error: {e}"))
        }
        Err(e) => return lib_failure(e),
    };
    let failed = reports
        .iter()
        .any(|r| !PROBES.contains(&r.suite.as_str()) && !r.all_passed());
    let value = if suite == "all" {
        serde_json::Value::Array(reports.iter().map(|r| r.to_value(timing)).collect())
    } else {
        reports[0].to_value(timing)
    };
    let mut stdout = serde_json::to_string_pretty(&value).expect("finite numbers");
    stdout.push('\n');
    Outcome {
        code: if failed { EXIT_SEMANTIC } else { EXIT_OK },
        stdout,
        stderr: String::new(),
    }
}

/// A fresh random document.
pub fn generate(kind: GenerateKind, cfg: GenConfig) -> Outcome {
    if cfg.max_size == 0 {
        return Outcome::fail(EXIT_USAGE, "error: --max-size must be positive");
    }
    let mut g = Generator::new(cfg);
    let mut doc = Document::default();
    let built = match kind {
        GenerateKind::Dist => {
            let x = FinSet::indexed("x", g.size_up_to(cfg.max_size)).expect("positive size");
            doc.insert_dist("p", &g.random_dist(&x))
        }
        GenerateKind::Channel => {
            let x = FinSet::indexed("x", g.size_up_to(cfg.max_size)).expect("positive size");
            let y = FinSet::indexed("y", g.size_up_to(cfg.max_size)).expect("positive size");
            doc.insert_channel("f", &g.random_channel(&x, &y))
        }
        GenerateKind::Morphism => doc.insert_morphism("m", &g.random_stat_morphism()),
        GenerateKind::TwoMorphism => doc.insert_two_morphism("square", &g.random_two_morphism()),
        GenerateKind::StackedPair => {
            let (spade, club) = g.stacked_pair();
            doc.insert_two_morphism("spade", &spade)
                .and_then(|_| doc.insert_two_morphism("club", &club))
        }
    };
    match built {
        Ok(_) => Outcome::ok(doc.to_canonical_string()),
        Err(e) => doc_failure(e),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::LN_2;

    const LOG2: &str = r#"{
        "spaces": { "X": ["a", "b"], "pt": ["⋆"] },
        "dists": { "p": { "space": "X", "probs": { "a": 1 } },
                   "r": { "space": "X", "probs": { "a": 0.5, "b": 0.5 } } },
        "det_maps": { "h": { "dom": "X", "cod": "pt", "map": { "a": "⋆", "b": "⋆" } } },
        "channels": { "s": { "dom": "pt", "cod": "X", "rows": { "⋆": { "a": 0.5, "b": 0.5 } } } },
        "morphisms": { "m": { "f": "h", "p": "p", "s": "s" } }
    }"#;

    #[test]
    fn entropy_formatting() {
        assert_eq!(format_entropy(ExtReal::finite(1.0)), "1.00000000000");
        assert_eq!(format_entropy(ExtReal::ZERO), "0");
        assert_eq!(format_entropy(ExtReal::Infinite), "inf");
        assert_eq!(format_entropy(ExtReal::finite(LN_2)), "0.693147180560");
        assert_eq!(format_entropy(ExtReal::finite(0.99999999999999)), "1.00000000000");
        assert_eq!(format_entropy(ExtReal::finite(1.5e-20)), "1.50000000000e-20");
    }

    #[test]
    fn log2_in_bits() {
        let out = entropy(LOG2, "m", EntropyKind::Re, None, LogBase::Two);
        assert_eq!((out.code, out.stdout.as_str()), (0, "1.00000000000\n"));
        let out = entropy(LOG2, "p", EntropyKind::Kl, Some("r"), LogBase::Two);
        assert_eq!(out.stdout, "1.00000000000\n");
    }

    #[test]
    fn usage_errors_exit_2() {
        assert_eq!(entropy(LOG2, "nope", EntropyKind::Re, None, LogBase::E).code, 2);
        assert_eq!(entropy(LOG2, "p", EntropyKind::Kl, None, LogBase::E).code, 2);
        assert_eq!(entropy("{", "m", EntropyKind::Re, None, LogBase::E).code, 2);
        assert_eq!(check("nope", 1, GenConfig::default(), 1e-8, false).code, 2);
    }

    #[test]
    fn validate_flags_bad_objects() {
        let out = validate(LOG2, 1e-9);
        assert_eq!(out.code, 0, "{}", out.stdout);
        let bad = LOG2.replace("\"a\": 0.5, \"b\": 0.5 } } },\n        \"det", "\"a\": 0.6, \"b\": 0.5 } } },\n        \"det");
        let out = validate(&bad, 1e-9);
        assert_eq!(out.code, 1);
        assert!(out.stdout.lines().any(|l| l.starts_with("dist") && l.contains("FAIL")));
    }

    #[test]
    fn compose_extends_the_document() {
        let out = compose(LOG2, "m", "m", ComposeMode::Morphism, "mm");
        // `m` ends at a one-point space, so it cannot be followed by itself.
        assert_eq!(out.code, 1, "{}", out.stderr);
        let out = compose(LOG2, "s", "h", ComposeMode::Channel, "m");
        assert_eq!(out.code, 2);
        let out = compose(LOG2, "s", "s", ComposeMode::Channel, "ss");
        assert_eq!(out.code, 1);
    }

    #[test]
    fn generate_round_trips() {
        for kind in [
            GenerateKind::Dist,
            GenerateKind::Channel,
            GenerateKind::Morphism,
            GenerateKind::TwoMorphism,
            GenerateKind::StackedPair,
        ] {
            let out = generate(kind, GenConfig::default());
            assert_eq!(out.code, 0);
            assert_eq!(parse(&out.stdout).unwrap().to_canonical_string(), out.stdout);
            assert_eq!(validate(&out.stdout, 1e-9).code, 0, "{kind:?}");
        }
    }
}
