//! Acceptance run: one PASS/FAIL line per criterion, at the stated
//! tolerances, with the runtime against its limit.
//!
//! Runs without the libtest harness so the report is always printed:
//! `cargo test -p qfilter --test acceptance`.

use std::fs;
use std::process::Command;
use std::time::{Duration, Instant};

use qfilter::config::{Scenario, ScenarioConfig};
use qfilter::logic::logic_suite;
use qfilter::output::{Check, Outcome};
use qfilter::scenarios::{appendix_instance, execute, ito_table_text};
use qfilter_core::ito::{heisenberg_pair_check, uncertainty_product, white_noise_intensities, Basis, ItoElement};
use qfilter_core::measurement::{decohere, CatSystem};
use qfilter_core::operator::entropy;
use qfilter_core::rng::DEFAULT_SEED;
use qfilter_core::{StateVector, Tolerance, C64};

type Criterion = (&'static str, Duration, fn() -> Verdict);

struct Verdict {
    pass: bool,
    detail: String,
}

fn verdict(checks: &[Check]) -> Verdict {
    let pass = checks.iter().all(|c| c.pass);
    let detail = checks.iter().map(|c| format!("{} = {:.3e} {}", c.name, c.measured, c.bound)).collect::<Vec<_>>();
    Verdict { pass, detail: detail.join("; ") }
}

fn find<'a>(outcome: &'a Outcome, prefix: &str) -> &'a Check {
    outcome.checks.iter().find(|c| c.name.starts_with(prefix)).unwrap_or_else(|| panic!("no check {prefix}"))
}

fn config(scenario: Scenario) -> ScenarioConfig {
    ScenarioConfig { scenario: Some(scenario), ..Default::default() }
}

fn cat_entropy() -> Verdict {
    let h = std::f64::consts::FRAC_1_SQRT_2;
    let tol = Tolerance::default();
    let atom = StateVector::from_real(&[h, h]).unwrap();
    let dec = decohere(&CatSystem::new(atom, tol).unwrap().interact(), tol).unwrap();
    let s = entropy(&dec.atom, tol).unwrap();
    verdict(&[Check::at_most("|S - 1 bit|", (s - 1.0).abs(), 1e-12)])
}

fn ito_tables() -> Verdict {
    let mut outcome = execute(&config(Scenario::ItoTables)).unwrap();
    // the hep products straight from the elements, independent of the scenario
    let el = |b: Basis| b.element();
    let mul = |a: &ItoElement, b: &ItoElement| ItoElement::multiply(a, b).unwrap();
    let (dt, em, ep, e) = (el(Basis::Dt), el(Basis::EMinus), el(Basis::EPlus), el(Basis::E));
    outcome.checks.push(Check::holds("dL_- dL^+ = dt", mul(&em, &ep) == dt));
    outcome.checks.push(Check::holds("dL^+ dL_- = 0", mul(&ep, &em) == ItoElement::zero(1)));
    outcome.checks.push(Check::holds("dL_- dLambda = dL_-", mul(&em, &e) == em));
    let pass = outcome.passed() && ito_table_text(1.0).unwrap() == outcome.texts[0].1;
    let failed = outcome.checks.iter().filter(|c| !c.pass).count();
    Verdict { pass, detail: format!("{} identities, {failed} failures, zero tolerance", outcome.checks.len()) }
}

fn heisenberg() -> Verdict {
    let h = heisenberg_pair_check(1.0).unwrap();
    let dt = Basis::Dt.element();
    let (sigma, tau) = white_noise_intensities(2.0, 1.0).unwrap();
    let u = uncertainty_product(sigma, tau, 1.0).unwrap();
    verdict(&[
        Check::holds("df dw = i hbar dt", h.df_dw.to_element().unwrap() == dt.scale(C64::new(0.0, 1.0))),
        Check::holds("dw df = -i hbar dt", h.dw_df.to_element().unwrap() == dt.scale(C64::new(0.0, -1.0))),
        Check::at_most("|sigma tau - hbar/2| at lambda = 2", u.slack.abs(), 0.0),
    ])
}

fn martingale() -> Verdict {
    let cfg = ScenarioConfig { trajectories: Some(10_000), dt: Some(1e-3), ..config(Scenario::DephasingDiffusive) };
    let outcome = execute(&cfg).unwrap();
    verdict(&[find(&outcome, "martingale").clone()])
}

fn master_equivalence() -> Verdict {
    let cfg = ScenarioConfig { trajectories: Some(100_000), dt: Some(1e-3), ..config(Scenario::DephasingDiffusive) };
    let outcome = execute(&cfg).unwrap();
    verdict(&[
        find(&outcome, "trace distance, input").clone(),
        find(&outcome, "trace distance, output").clone(),
        find(&outcome, "master rho01").clone(),
    ])
}

fn counting() -> Verdict {
    let cfg = ScenarioConfig { trajectories: Some(10_000), ..config(Scenario::DephasingCounting) };
    let outcome = execute(&cfg).unwrap();
    verdict(&[find(&outcome, "jump count mean").clone()])
}

fn central_limit() -> Verdict {
    let cfg = ScenarioConfig { trajectories_per_nu: Some(vec![2000, 200]), ..config(Scenario::CentralLimit) };
    let outcome = execute(&cfg).unwrap();
    let mut v = verdict(&outcome.checks);
    v.detail = format!("{}; {}", outcome.summary.join("; "), v.detail);
    v
}

fn appendix_figure() -> Verdict {
    let dir = tempfile::tempdir().unwrap();
    let out = Command::new(env!("CARGO_BIN_EXE_qfilter"))
        .args(["run", "appendix-figure", "--output", dir.path().to_str().unwrap()])
        .output()
        .unwrap();
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let mut reader = csv::Reader::from_path(dir.path().join("appendix_figure.csv")).unwrap();
    let (mut closed_err, mut ode_diff, mut scale, mut t_last) = (0.0f64, 0.0f64, 0.0f64, 0.0f64);
    for rec in reader.records() {
        let rec = rec.unwrap();
        let x = |i: usize| rec[i].parse::<f64>().unwrap();
        let (t, numeric, closed) = (x(0), x(1), x(2));
        let literal = (-t).exp() * (t.cos() + 6.0 * t.sin()) + 0.5 * t - 1.0;
        closed_err = closed_err.max((closed - literal).abs());
        ode_diff = ode_diff.max((numeric - literal).abs());
        scale = scale.max(literal.abs());
        t_last = t;
        assert_eq!(literal.to_bits(), appendix_instance(t).to_bits());
    }
    verdict(&[
        Check::at_most("t_end", (t_last - 6.0).abs(), 1e-9),
        Check::at_most("closed form vs literal formula", closed_err, 1e-12),
        Check::at_most("deviation ODE vs formula, relative", ode_diff / scale, 1e-6),
    ])
}

fn continuous_collapse() -> Verdict {
    let outcome = execute(&config(Scenario::PositionCollapse)).unwrap();
    verdict(&outcome.checks)
}

fn logic() -> Verdict {
    verdict(&logic_suite(DEFAULT_SEED, 200, 1000).unwrap())
}

fn main() {
    let golden = fs::read_to_string(concat!(env!("CARGO_MANIFEST_DIR"), "/tests/golden/ito_tables.txt")).unwrap();
    assert_eq!(golden, ito_table_text(1.0).unwrap(), "golden Ito table is stale");

    let criteria: [Criterion; 10] = [
        ("cat entropy", Duration::from_secs(1), cat_entropy),
        ("Ito tables", Duration::from_secs(1), ito_tables),
        ("Heisenberg pair", Duration::from_secs(1), heisenberg),
        ("mean-square unitarity", Duration::from_secs(60), martingale),
        ("trajectory/master equivalence", Duration::from_secs(120), master_equivalence),
        ("counting statistics", Duration::from_secs(60), counting),
        ("central limit", Duration::from_secs(300), central_limit),
        ("appendix figure", Duration::from_secs(1), appendix_figure),
        ("continuous collapse", Duration::from_secs(300), continuous_collapse),
        ("logic/lattice suite", Duration::from_secs(60), logic),
    ];
    let mut failures = Vec::new();
    for (n, (name, limit, run)) in criteria.iter().enumerate() {
        let start = Instant::now();
        let v = run();
        let elapsed = start.elapsed();
        let pass = v.pass && elapsed < *limit;
        println!(
            "{} criterion {} ({name}): {} [runtime {:.2} s < {} s]",
            if pass { "PASS" } else { "FAIL" },
            n + 1,
            v.detail,
            elapsed.as_secs_f64(),
            limit.as_secs()
        );
        if !pass {
            failures.push(n + 1);
        }
    }
    if failures.is_empty() {
        println!("acceptance: all 10 criteria passed");
    } else {
        println!("acceptance: failed criteria {failures:?}");
        std::process::exit(1);
    }
}
