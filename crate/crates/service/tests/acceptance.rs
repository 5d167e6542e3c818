//! Acceptance run: one PASS/FAIL line per criterion.
//!
//! Exits non-zero when a criterion fails for any reason other than the
//! documented reference-value discrepancy in the worked cosine example.

mod common;
#[path = "../../core/tests/oracle/mod.rs"]
mod oracle;

use std::collections::{BTreeMap, BTreeSet};
use std::process::ExitCode;
use std::sync::Arc;
use std::time::{Duration, Instant};

use axum::http::Method;
use proptest::prelude::*;
use proptest::test_runner::{Config, RngAlgorithm, TestCaseError, TestRng, TestRunner};
use serde_json::json;
use typematch_core::labeling::{suggest_labels, wilson_score, DEFAULT_TOP_M, DEFAULT_Z};
use typematch_core::matchers::{
    cosine_similarity, match_tables, pearson, rank, spearman, ColumnTypeProfile, MatchConfig, Matcher, TieStrategy,
    TypeVector,
};
use typematch_core::merge::merge_tables;
use typematch_core::reconcile::{FixtureProvider, Provider, Reconciler, TableAnnotations, TypeCandidate};
use typematch_core::{load_table, run_match, MatchReport, Table};

/// Exact value of the worked cosine example, cross-checked with mpmath at
/// 50 digits: 0.78 / sqrt(1.73 * 0.52) = 0.8223750...
const WORKED_COSINE_EXACT: f64 = 0.822_375_0;

struct Outcome {
    pass: bool,
    /// Failed only because of the known worked-example discrepancy.
    documented: bool,
    detail: String,
}

impl Outcome {
    fn check(pass: bool, detail: impl Into<String>) -> Self {
        Outcome { pass, documented: false, detail: detail.into() }
    }
}

fn runner(cases: u32) -> TestRunner {
    let config = Config { cases, failure_persistence: None, ..Config::default() };
    TestRunner::new_with_rng(config, TestRng::deterministic_rng(RngAlgorithm::ChaCha))
}

fn close(a: f64, b: f64, tol: f64) -> Result<(), TestCaseError> {
    if (a - b).abs() <= tol {
        Ok(())
    } else {
        Err(TestCaseError::fail(format!("{a} vs {b} (|Δ| = {:e})", (a - b).abs())))
    }
}

fn sparse() -> impl Strategy<Value = Vec<(String, f64)>> {
    prop::collection::vec((0u8..20, 0.0f64..=10.0), 0..=20)
        .prop_map(|v| v.into_iter().map(|(k, w)| (format!("/t/{k}"), w)).collect())
}

fn paired(min_len: usize, ties: bool) -> impl Strategy<Value = (Vec<f64>, Vec<f64>)> {
    (min_len..=20).prop_flat_map(move |n| {
        let value = if ties { (0u8..=10).prop_map(f64::from).boxed() } else { (0.0f64..=10.0).boxed() };
        (prop::collection::vec(value.clone(), n), prop::collection::vec(value, n))
    })
}

fn math_oracles() -> Outcome {
    const CASES: u32 = 1000;
    let mut failures = Vec::new();
    macro_rules! record {
        ($name:expr, $result:expr $(,)?) => {
            if let Err(e) = $result {
                failures.push(format!("{}: {e}", $name));
            }
        };
    }

    record!(
        "cosine",
        runner(CASES).run(&(sparse(), sparse()), |(v, w)| {
            let got = cosine_similarity(&TypeVector::from_weights(v.clone()), &TypeVector::from_weights(w.clone()));
            close(got, oracle::dense_cosine(&v, &w), 1e-9)
        }),
    );
    for ties in [false, true] {
        record!(
            "pearson",
            runner(CASES).run(&paired(2, ties), |(x, y)| {
                close(pearson(&x, &y).unwrap(), oracle::standard_score_pearson(&x, &y), 1e-9)
            }),
        );
        record!(
            "spearman",
            runner(CASES).run(&paired(2, ties), |(x, y)| {
                close(spearman(&x, &y).unwrap(), oracle::naive_spearman(&x, &y), 1e-9)
            }),
        );
        record!(
            "rank",
            runner(CASES).run(&paired(1, ties), |(x, _)| {
                let got = rank(&x, TieStrategy::Average).unwrap();
                for (a, b) in got.iter().zip(oracle::quadratic_ranks(&x)) {
                    close(*a, b, 1e-9)?;
                }
                Ok(())
            }),
        );
    }
    record!(
        "wilson",
        runner(CASES).run(&(0.0f64..=1.0, 1usize..=2000, 0.5f64..=3.5), |(p, n, z)| {
            close(wilson_score(p, n, z).unwrap(), oracle::wilson_root(p, n, z), 1e-9)
        }),
    );

    let cosine = cosine_similarity(
        &TypeVector::from_weights([("A", 1.3), ("B", 0.2)]),
        &TypeVector::from_weights([("A", 0.6), ("C", 0.4)]),
    );
    let worked = [
        ("cosine", cosine, 0.822365, 1e-6),
        ("pearson", pearson(&[2.0, 0.0, 1.0, 3.0], &[1.0, 0.0, 0.0, 2.0]).unwrap(), 0.943880, 1e-6),
        ("spearman", spearman(&[1.0, 2.0, 3.0, 4.0], &[1.0, 3.0, 2.0, 4.0]).unwrap(), 0.8, 1e-9),
        ("wilson", wilson_score(0.5, 10, 1.96).unwrap(), 0.236589, 1e-6),
    ];
    let mut worked_misses = Vec::new();
    for (name, got, want, tol) in worked {
        if (got - want).abs() > tol {
            worked_misses.push(format!("worked {name} {got:.7} vs reference {want} (tol {tol:e})"));
        }
    }

    let random_ok = failures.is_empty();
    let only_known_miss = worked_misses.len() == 1
        && worked_misses[0].starts_with("worked cosine")
        && (cosine - WORKED_COSINE_EXACT).abs() < 1e-7;
    let mut detail = format!("{} random cases per routine", CASES);
    for miss in failures.iter().chain(&worked_misses) {
        detail.push_str("; ");
        detail.push_str(miss);
    }
    if only_known_miss {
        detail.push_str(&format!("; exact value is {WORKED_COSINE_EXACT}, the reference is off by 1e-5"));
    }
    Outcome { pass: random_ok && worked_misses.is_empty(), documented: random_ok && only_known_miss, detail }
}

/// Deterministic candidates for the `w<j>` vocabulary of generated tables.
struct Synthetic;

impl Provider for Synthetic {
    fn id(&self) -> &str {
        "synthetic"
    }

    fn search(&self, text: &str, _limit: usize) -> typematch_core::Result<Vec<TypeCandidate>> {
        let j: usize = text.trim_start_matches('w').parse().unwrap_or(0);
        Ok(vec![
            TypeCandidate::new(format!("/t/{}", j % 5), "A", 1.0 - 0.1 * (j % 3) as f64),
            TypeCandidate::new(format!("/t/{}", (j * 7 + 1) % 6), "B", 0.3 + 0.1 * (j % 4) as f64),
        ])
    }
}

fn table_strategy() -> impl Strategy<Value = Table> {
    (2usize..6, 1usize..5).prop_flat_map(|(rows, width)| {
        let header = prop::option::of(prop::sample::select(vec!["name", "Name", "country", "cost", "org"]))
            .prop_map(|h| h.map(str::to_string));
        let text = prop::collection::vec((0usize..12).prop_map(|j| format!("w{j}")), rows);
        let numeric = prop::collection::vec((0u32..1000).prop_map(|v| v.to_string()), rows);
        prop::collection::vec((header, prop_oneof![text, numeric]), width)
            .prop_map(|cols| Table::from_columns("t", cols).unwrap())
    })
}

fn annotate(table: &Table) -> TableAnnotations {
    Reconciler::new(Arc::new(Synthetic)).annotate_table(table).unwrap()
}

fn ensure(ok: bool, msg: impl FnOnce() -> String) -> Result<(), TestCaseError> {
    if ok {
        Ok(())
    } else {
        Err(TestCaseError::fail(msg()))
    }
}

fn property_suite() -> Outcome {
    const CASES: u32 = 500;
    let mut failures: Vec<String> = Vec::new();
    macro_rules! property {
        ($name:expr, $strategy:expr, $body:expr) => {
            if let Err(e) = runner(CASES).run(&$strategy, $body) {
                failures.push(format!("{}: {e}", $name));
            }
        };
    }
    let positive = || {
        prop::collection::vec((0u8..12, 0.01f64..10.0), 1..20)
            .prop_map(|v| v.into_iter().map(|(k, w)| (format!("/t/{k}"), w)).collect::<Vec<_>>())
    };

    property!("cosine scale invariance", (positive(), positive(), 0.01f64..100.0), |(v, w, c)| {
        let (v, w) = (TypeVector::from_weights(v), TypeVector::from_weights(w));
        close(cosine_similarity(&v.scaled(c), &w), cosine_similarity(&v, &w), 1e-12)
    });
    property!("cosine symmetry", (positive(), positive()), |(v, w)| {
        let (v, w) = (TypeVector::from_weights(v), TypeVector::from_weights(w));
        ensure(cosine_similarity(&v, &w) == cosine_similarity(&w, &v), || "asymmetric".into())
    });
    let spread = |xs: &[f64]| {
        let m = xs.iter().sum::<f64>() / xs.len() as f64;
        xs.iter().map(|x| (x - m).powi(2)).sum::<f64>()
    };
    property!(
        "pearson affine invariance",
        (
            paired(2, false).prop_filter("non-degenerate", move |(x, y)| spread(x) > 1e-3 && spread(y) > 1e-3),
            0.1f64..10.0,
            -10.0f64..10.0
        ),
        |((x, y), a, b)| {
            let moved: Vec<f64> = x.iter().map(|v| a * v + b).collect();
            close(pearson(&moved, &y).unwrap(), pearson(&x, &y).unwrap(), 1e-12)
        }
    );
    property!("spearman == pearson∘rank", paired(2, true), |(x, y)| {
        let composed =
            pearson(&rank(&x, TieStrategy::Average).unwrap(), &rank(&y, TieStrategy::Average).unwrap()).unwrap();
        ensure(spearman(&x, &y).unwrap() == composed, || "composition differs".into())
    });
    property!("spearman monotone invariance", paired(2, false), |(x, y)| {
        let warped: Vec<f64> = x.iter().map(|v| (v * 0.7).exp() + v.powi(3)).collect();
        ensure(spearman(&warped, &y).unwrap() == spearman(&x, &y).unwrap(), || "changed".into())
    });
    property!("wilson bounds", (0.0f64..=1.0, 1usize..5000), |(p, n)| {
        let w = wilson_score(p, n, DEFAULT_Z).unwrap();
        ensure((0.0..=p).contains(&w), || format!("w = {w} outside [0, {p}]"))
    });
    property!("matcher outputs in [0,1]", (table_strategy(), table_strategy()), |(a, b)| {
        let config = MatchConfig { threshold: 0.0, ..Default::default() };
        for pair in match_tables(&a, &b, &annotate(&a), &annotate(&b), &config).unwrap() {
            for (m, s) in &pair.scores {
                if let Some(v) = s.value() {
                    ensure((0.0..=1.0).contains(&v), || format!("{m} = {v}"))?;
                }
            }
            ensure((0.0..=1.0).contains(&pair.combined), || format!("combined = {}", pair.combined))?;
        }
        Ok(())
    });
    property!("pair-score symmetry under table swap", (table_strategy(), table_strategy()), |(a, b)| {
        let config = MatchConfig { threshold: 0.0, ..Default::default() };
        let (aa, ab) = (annotate(&a), annotate(&b));
        let forward = match_tables(&a, &b, &aa, &ab, &config).unwrap();
        let backward: BTreeMap<_, _> =
            match_tables(&b, &a, &ab, &aa, &config).unwrap().into_iter().map(|p| ((p.target, p.source), p)).collect();
        ensure(forward.len() == backward.len(), || "pair sets differ".into())?;
        for p in forward {
            let q = &backward[&(p.source, p.target)];
            for m in Matcher::ALL {
                match (p.scores[&m].value(), q.scores[&m].value()) {
                    (Some(x), Some(y)) => close(x, y, 1e-12)?,
                    (x, y) => ensure(x == y, || format!("{m}: {x:?} vs {y:?}"))?,
                }
            }
        }
        Ok(())
    });

    let ps: Vec<f64> = (0..=20).map(|i| i as f64 / 20.0).collect();
    let ns = [1usize, 2, 3, 5, 8, 13, 21, 50, 100, 1000];
    let w = |p, n| wilson_score(p, n, DEFAULT_Z).unwrap();
    let grid_ok = ps.iter().all(|&p| ns.windows(2).all(|n| w(p, n[1]) >= w(p, n[0]) - 1e-15))
        && ns.iter().all(|&n| ps.windows(2).all(|p| w(p[1], n) >= w(p[0], n) - 1e-15));
    if !grid_ok {
        failures.push("wilson monotonicity grid".into());
    }

    Outcome::check(
        failures.is_empty(),
        if failures.is_empty() {
            format!("8 properties, {CASES} cases each, plus a 21x10 wilson monotonicity grid")
        } else {
            failures.join("; ")
        },
    )
}

fn fixture_table(name: &str) -> Table {
    load_table(&std::fs::read(common::fixture(name)).unwrap(), true, name).unwrap()
}

fn fixture_reconciler() -> Reconciler {
    Reconciler::new(Arc::new(FixtureProvider::load(common::fixture("reconciliation.json")).unwrap()))
}

fn run_fixture(src: &str, tgt: &str, matchers: &[Matcher]) -> MatchReport {
    let config = MatchConfig::with_matchers(matchers.iter().copied());
    run_match(&fixture_table(src), &fixture_table(tgt), Some(&fixture_reconciler()), &config).unwrap()
}

fn pair_set(report: &MatchReport) -> BTreeSet<(usize, usize)> {
    report.pairs.iter().map(|p| (p.source, p.target)).collect()
}

fn pair_score(report: &MatchReport, pair: (usize, usize), m: Matcher) -> Option<f64> {
    report.pairs.iter().find(|p| (p.source, p.target) == pair)?.scores.get(&m)?.value()
}

fn fixture_scenario() -> Outcome {
    use Matcher::*;
    let mut notes = Vec::new();
    let mut ok = true;
    let mut check = |label: &str, pass: bool, note: String| {
        ok &= pass;
        notes.push(format!("({label}) {} {note}", if pass { "ok" } else { "FAILED" }));
    };

    let a = run_fixture("source.csv", "target.csv", &[Name]);
    let cost = pair_score(&a, (3, 3), Name);
    check("a", pair_set(&a) == BTreeSet::from([(0, 0), (3, 3)]) && cost == Some(1.0), format!("{:?}", pair_set(&a)));

    let b = run_fixture("source.csv", "target.csv", &[Name, Cosine]);
    let mut want = pair_set(&a);
    want.insert((1, 1));
    check("b", pair_set(&b) == want, format!("{:?}", pair_set(&b)));

    let c = run_fixture("source.csv", "target.csv", &[Name, Cosine, Pearson]);
    want.insert((2, 2));
    check("c", pair_set(&c) == want, format!("{:?}", pair_set(&c)));

    let d = run_fixture("source.csv", "target.csv", &Matcher::ALL);
    let s = |m| pair_score(&d, (0, 0), m).unwrap_or(f64::NAN);
    let (cos, pea, spe) = (s(Cosine), s(Pearson), s(Spearman));
    check("d", spe < cos && spe < pea, format!("airport cos {cos:.4} pea {pea:.4} spe {spe:.4}"));

    let e = run_fixture("clean_source.csv", "clean_target.csv", &Matcher::ALL);
    let s = |m| pair_score(&e, (0, 0), m).unwrap_or(f64::NAN);
    let (cos, pea, spe) = (s(Cosine), s(Pearson), s(Spearman));
    check("e", cos >= 0.9 && pea >= 0.9 && spe >= 0.9, format!("country cos {cos:.4} pea {pea:.4} spe {spe:.4}"));

    Outcome::check(ok, notes.join(", "))
}

fn labeling() -> Outcome {
    let table = fixture_table("clean_target.csv");
    let column = &table.columns()[1];
    let annotation = fixture_reconciler().annotate_column(column).unwrap();
    let labels = suggest_labels(&ColumnTypeProfile::from_annotation(&annotation), DEFAULT_Z, DEFAULT_TOP_M).unwrap();
    let find = |label: &str| labels.iter().position(|l| l.label == label);
    let pass = match (find("Organization"), find("Organism Classification")) {
        (Some(0), Some(j)) => labels[0].wilson > labels[j].wilson && labels[0].support_n > labels[j].support_n,
        _ => false,
    };
    let ranking: Vec<String> =
        labels.iter().map(|l| format!("{} w={:.4} n={}", l.label, l.wilson, l.support_n)).collect();
    Outcome::check(
        pass && column.header().is_none(),
        format!("unnamed column 1 of clean_target.csv: {}", ranking.join(" > ")),
    )
}

fn merge() -> Outcome {
    let (source, target) = (fixture_table("source.csv"), fixture_table("target.csv"));
    let report = run_fixture("source.csv", "target.csv", &Matcher::ALL);
    let pairs: Vec<(usize, usize)> = report.mapping.iter().map(|[s, t]| (*s, *t)).collect();
    let merged = merge_tables(&source, &target, &pairs, true).unwrap().table;

    let expected_costs = ["123.2", "232.12", "321.7", "354.64", "243.8", "201.41", "90.5", "198", "211.27", "55.99"];
    let cost_col = merged.columns().iter().position(|c| c.header() == Some("Cost"));
    let costs_ok = cost_col.is_some_and(|i| merged.columns()[i].cells() == expected_costs);

    let csv = merged.to_csv().unwrap();
    let reread = load_table(&csv, true, merged.name()).unwrap();
    let round_trip = reread.to_csv().unwrap() == csv && reread == merged;

    let shape = (merged.row_count(), merged.width());
    Outcome::check(
        shape == (10, 4) && costs_ok && round_trip,
        format!(
            "{} rows x {} columns, Cost concatenation {}, CSV round trip {}",
            shape.0,
            shape.1,
            if costs_ok { "exact" } else { "WRONG" },
            if round_trip { "bit-identical" } else { "DIFFERS" }
        ),
    )
}

fn cli_api_equivalence() -> Outcome {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("match.json");
    let src = common::fixture("source.csv");
    let tgt = common::fixture("target.csv");
    let status = common::cli(&[
        "match",
        src.to_str().unwrap(),
        tgt.to_str().unwrap(),
        "--provider",
        &common::provider_flag(),
        "-o",
        out.to_str().unwrap(),
    ]);
    if !status.status.success() {
        return Outcome::check(false, format!("cli failed: {}", String::from_utf8_lossy(&status.stderr)));
    }
    let cli_bytes = std::fs::read(&out).unwrap();

    let runtime = tokio::runtime::Builder::new_multi_thread().enable_all().build().unwrap();
    let api_bytes = runtime.block_on(async {
        let app = common::App::new(true);
        let (s, t) = (app.upload("source.csv").await, app.upload("target.csv").await);
        let (_, session) = app.session(&s, &t, json!({})).await;
        let id = session["id"].as_str().unwrap().to_string();
        app.call(Method::GET, &format!("/sessions/{id}/matches"), "").await.1
    });

    let pairs = serde_json::from_slice::<MatchReport>(&cli_bytes).map(|r| r.pairs.len()).unwrap_or(0);
    Outcome::check(
        cli_bytes == api_bytes,
        format!(
            "{} bytes via CLI, {} via API, {pairs} pairs, identical: {}",
            cli_bytes.len(),
            api_bytes.len(),
            cli_bytes == api_bytes
        ),
    )
}

type Criterion = (&'static str, Option<Duration>, fn() -> Outcome);

fn main() -> ExitCode {
    let criteria: [Criterion; 6] = [
        ("math-oracles", Some(Duration::from_secs(10)), math_oracles),
        ("property-suite", Some(Duration::from_secs(30)), property_suite),
        ("fixture-scenario", Some(Duration::from_secs(30)), fixture_scenario),
        ("labeling", None, labeling),
        ("merge", None, merge),
        ("cli-api-equivalence", None, cli_api_equivalence),
    ];

    let mut unexpected = 0;
    let mut passed = 0;
    for (name, budget, criterion) in criteria {
        let started = Instant::now();
        let mut outcome = criterion();
        let elapsed = started.elapsed();
        if let Some(budget) = budget {
            if elapsed > budget {
                outcome.pass = false;
                outcome.documented = false;
                outcome.detail.push_str(&format!("; over the {} s budget", budget.as_secs()));
            }
        }
        let verdict = if outcome.pass { "PASS" } else { "FAIL" };
        println!("{verdict} {name} [{:.2} s] {}", elapsed.as_secs_f64(), outcome.detail);
        if outcome.pass {
            passed += 1;
        } else if !outcome.documented {
            unexpected += 1;
        }
    }
    println!("acceptance: {passed}/6 criteria passed, {unexpected} unexpected failures");
    if unexpected == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
