//! Acceptance gate: one line per criterion, non-zero exit if any fails.

use std::path::Path;
use std::process::{Command, ExitCode};
use std::time::{Duration, Instant};

use finstat_core::document::parse;
use finstat_core::harness::{run_suite, SuiteReport};
use finstat_core::randgen::GenConfig;
use finstat_core::EPS_EQ;

const SEED: u64 = 42;
const MAX_SIZE: usize = 6;

struct Criterion {
    id: u32,
    name: &'static str,
    limit: Duration,
    run: fn() -> Result<String, String>,
}

fn cfg() -> GenConfig {
    GenConfig {
        seed: SEED,
        max_size: MAX_SIZE,
        ..GenConfig::default()
    }
}

fn suite(name: &str, trials: usize, tol: f64) -> Result<SuiteReport, String> {
    run_suite(name, trials, cfg(), tol).map_err(|e| e.to_string())
}

/// All trials pass; otherwise describe the first counterexample.
fn all_pass(r: &SuiteReport) -> Result<(), String> {
    if r.all_passed() {
        return Ok(());
    }
    let first = r
        .counterexamples
        .first()
        .map(|c| format!("; first failing trial {} (size {})", c.trial, c.size))
        .unwrap_or_default();
    Err(format!(
        "{}: {}/{} passed, max violation {:.3e} > {:e}{first}",
        r.suite,
        r.passes,
        r.trials,
        r.max_violation.to_f64(),
        r.tol
    ))
}

fn infinite_cases(r: &SuiteReport) -> usize {
    r.stats.get("infinite_cases").copied().unwrap_or(0.0) as usize
}

fn summary(r: &SuiteReport) -> String {
    format!(
        "{} {}/{} max {:.3e}",
        r.suite,
        r.passes,
        r.trials,
        r.max_violation.to_f64()
    )
}

fn chain_rule() -> Result<String, String> {
    let full = suite("chain_rule", 1000, 1e-9)?;
    all_pass(&full)?;
    let sparse = suite("chain_rule_sparse", 100, 1e-9)?;
    all_pass(&sparse)?;
    if infinite_cases(&sparse) == 0 {
        return Err("sparse trials never produced ∞".into());
    }
    Ok(format!(
        "{}; {} with {} ∞ cases",
        summary(&full),
        summary(&sparse),
        infinite_cases(&sparse)
    ))
}

fn re_functorial() -> Result<String, String> {
    let r = suite("re_functorial", 500, 1e-8)?;
    all_pass(&r)?;
    if infinite_cases(&r) == 0 {
        return Err("no ∞ case exercised".into());
    }
    Ok(format!("{}, {} ∞ cases", summary(&r), infinite_cases(&r)))
}

fn convex_linearity() -> Result<String, String> {
    let mut parts = Vec::new();
    for name in ["re_convex", "ce_convex", "re2_convex"] {
        let r = suite(name, 200, 1e-8)?;
        all_pass(&r)?;
        if infinite_cases(&r) < 1 {
            return Err(format!("{name}: the ∞-component trial did not yield ∞"));
        }
        parts.push(summary(&r));
    }
    Ok(parts.join("; "))
}

fn ce_closed_form() -> Result<String, String> {
    let r = suite("ce_closed_form", 500, 1e-9)?;
    all_pass(&r)?;
    Ok(format!("{}, {} ∞ agreements", summary(&r), infinite_cases(&r)))
}

fn marginal_identity() -> Result<String, String> {
    let r = suite("lev77", 500, 1e-10)?;
    all_pass(&r)?;
    Ok(summary(&r))
}

fn fast_paths() -> Result<String, String> {
    let r = suite("lcm17", 500, 1e-12)?;
    all_pass(&r)?;
    Ok(format!(
        "{} (pure {:e}, section {:e})",
        summary(&r),
        r.stats["pure_max"],
        r.stats["section_max"]
    ))
}

fn vertical_functoriality() -> Result<String, String> {
    let mut parts = Vec::new();
    for name in ["ce_vertical", "re2_vertical"] {
        let r = suite(name, 500, 1e-8)?;
        all_pass(&r)?;
        if infinite_cases(&r) < 1 {
            return Err(format!("{name}: injected support violation did not yield ∞"));
        }
        parts.push(summary(&r));
    }
    Ok(parts.join("; "))
}

fn vanishing() -> Result<String, String> {
    let re = suite("re_vanishing", 200, 1e-12)?;
    all_pass(&re)?;
    let two = suite("ce_vanishing", 200, 1e-9)?;
    all_pass(&two)?;
    Ok(format!("{}; {}", summary(&re), summary(&two)))
}

fn vanishing_probe() -> Result<String, String> {
    let r = suite("vanishing_probe", 200, 1e-8)?;
    if !r.probe {
        return Err("not flagged as a probe".into());
    }
    let max = r.stats["ce_max"];
    if max > 1e-6 {
        let c = r
            .counterexamples
            .first()
            .ok_or("CE > 1e-6 found but nothing serialized")?;
        let text = serde_json::to_string(&c.instance).map_err(|e| e.to_string())?;
        let doc = parse(&text).map_err(|e| e.to_string())?;
        let sq = doc.two_morphism("square").map_err(|e| e.to_string())?;
        if sq.conditional_relative_entropy().to_f64() <= 1e-6 {
            return Err("serialized instance does not reproduce CE > 1e-6".into());
        }
    }
    Ok(format!(
        "CE min {:.3e} median {:.3e} max {:.3e}; {} of {} above 1e-6 (report-only)",
        r.stats["ce_min"],
        r.stats["ce_median"],
        max,
        r.trials - r.passes,
        r.trials
    ))
}

fn semicontinuity() -> Result<String, String> {
    let re = suite("re_lsc", 100, 1e-6)?;
    let re2 = suite("re2_lsc", 100, 1e-6)?;
    let line = format!("{}; {}", summary(&re), summary(&re2));
    match (all_pass(&re), all_pass(&re2)) {
        (Ok(()), Ok(())) => Ok(line),
        (a, b) => Err(format!(
            "{line}; {}",
            [a.err(), b.err()].into_iter().flatten().collect::<Vec<_>>().join("; ")
        )),
    }
}

fn generator_soundness() -> Result<String, String> {
    let a = suite("generator", 1000, EPS_EQ)?;
    all_pass(&a)?;
    let b = suite("generator", 1000, EPS_EQ)?;
    if a.to_json(false) != b.to_json(false) {
        return Err("reports differ between identical runs".into());
    }
    Ok(summary(&a))
}

fn cli_golden() -> Result<String, String> {
    let fixtures = Path::new(env!("CARGO_MANIFEST_DIR")).join("fixtures");
    let cases = [
        ("log2.json", "log2", "re", "2", "1.00000000000"),
        ("identity_square.json", "identity", "re2", "e", "0"),
        ("support_violation.json", "violation", "re", "e", "inf"),
    ];
    for (file, target, kind, base, want) in cases {
        let path = fixtures.join(file);
        let out = Command::new(env!("CARGO_BIN_EXE_finstat"))
            .args(["entropy", path.to_str().unwrap(), target, "--kind", kind, "--base", base])
            .output()
            .map_err(|e| e.to_string())?;
        let got = String::from_utf8_lossy(&out.stdout);
        if out.status.code() != Some(0) || got.trim_end() != want {
            return Err(format!("{file}: expected {want}, got {:?}", got.trim_end()));
        }
        let text = std::fs::read_to_string(&path).map_err(|e| e.to_string())?;
        let canon = parse(&text).map_err(|e| e.to_string())?.to_canonical_string();
        if canon != text || parse(&canon).map_err(|e| e.to_string())?.to_canonical_string() != canon {
            return Err(format!("{file}: canonical form is not a fixed point"));
        }
    }
    Ok("1.00000000000 / 0 / inf; canonical fixtures round-trip".into())
}

const CRITERIA: &[Criterion] = &[
    Criterion { id: 1, name: "chain rule", limit: Duration::from_secs(5), run: chain_rule },
    Criterion { id: 2, name: "RE functoriality", limit: Duration::from_secs(5), run: re_functorial },
    Criterion { id: 3, name: "RE/CE/RE2 convex linearity", limit: Duration::from_secs(10), run: convex_linearity },
    Criterion { id: 4, name: "CE definition vs closed form", limit: Duration::from_secs(5), run: ce_closed_form },
    Criterion { id: 5, name: "marginal identity", limit: Duration::from_secs(5), run: marginal_identity },
    Criterion { id: 6, name: "pure/section fast paths", limit: Duration::from_secs(2), run: fast_paths },
    Criterion { id: 7, name: "CE and RE2 vertical functoriality", limit: Duration::from_secs(10), run: vertical_functoriality },
    Criterion { id: 8, name: "vanishing under optimal hypotheses", limit: Duration::from_secs(5), run: vanishing },
    Criterion { id: 9, name: "vanishing probe", limit: Duration::from_secs(5), run: vanishing_probe },
    Criterion { id: 10, name: "lower semicontinuity", limit: Duration::from_secs(10), run: semicontinuity },
    Criterion { id: 11, name: "generator soundness", limit: Duration::from_secs(10), run: generator_soundness },
    Criterion { id: 12, name: "CLI golden outputs", limit: Duration::from_secs(2), run: cli_golden },
];

fn main() -> ExitCode {
    let mut failed = 0;
    for c in CRITERIA {
        let start = Instant::now();
        let result = (c.run)();
        let elapsed = start.elapsed();
        let result = match result {
            Ok(detail) if elapsed > c.limit => Err(format!(
                "{detail}; took {:.2}s, limit {}s",
                elapsed.as_secs_f64(),
                c.limit.as_secs()
            )),
            other => other,
        };
        let (tag, detail) = match result {
            Ok(d) => ("PASS", d),
            Err(d) => {
                failed += 1;
                ("FAIL", d)
            }
        };
        println!(
            "[{tag}] {:>2} {:<36} {:>6.2}s  {detail}",
            c.id,
            c.name,
            elapsed.as_secs_f64()
        );
    }
    println!(
        "acceptance: {} passed, {failed} failed",
        CRITERIA.len() - failed
    );
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
