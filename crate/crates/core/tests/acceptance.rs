//! End-to-end acceptance run. Prints one PASS/FAIL line per criterion and
//! exits non-zero if any criterion fails or overruns its time budget.

mod common;

use std::f64::consts::PI;
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::process::ExitCode;
use std::time::{Duration, Instant};

use qedgraph::counting::{
    classify_divergence, solve_direct, solve_inverse, DivergenceClass, ExternalData, InternalData,
};
use qedgraph::diagram::{fixtures, Diagram, ParticleKind};
use qedgraph::dsl::{parse, serialize, summary_document};
use qedgraph::enumeration::{enumerate, EnumerationRequest};
use qedgraph::integral::{
    closed_form, divergence_scan, growth_fit, integrate, FourVector, IntegralSpec, Method,
};
use qedgraph::topology::{connected_components, is_irreducible, loop_count, summarize};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

type Check = fn() -> Result<String, String>;

macro_rules! ensure {
    ($cond:expr, $($fmt:tt)+) => {
        if !$cond {
            return Err(format!($($fmt)+));
        }
    };
}

const E1: FourVector = FourVector([1.0, 0.0, 0.0, 0.0]);

fn ac1_figure_summaries() -> Result<String, String> {
    let cases = [
        (fixtures::figure1(), [2, 2, 2, 0, 1, 1, 2, 1], -1),
        (fixtures::figure2(), [6, 4, 4, 2, 4, 2, 6, 1], 4),
    ];
    for (d, want, k) in cases {
        let s = summarize(&d).map_err(|e| e.to_string())?;
        let got = [
            s.n,
            s.contact_points,
            s.external_electrons,
            s.external_photons,
            s.internal_electrons,
            s.internal_photons,
            s.internal_lines,
            s.loops,
        ];
        ensure!(
            got == want && s.power_counter == k,
            "{:?}: {got:?} K={}",
            d.name(),
            s.power_counter
        );
    }
    Ok("figure 1: K=-1, figure 2: K=4".into())
}

fn ac2_four_cases() -> Result<String, String> {
    let mut found = Vec::new();
    for ne in (0..=40).step_by(2) {
        for np in (0..=40).step_by(2) {
            let r = classify_divergence(ne, np, 1).map_err(|e| e.to_string())?;
            if r.power_counter <= 0 {
                found.push((ne, np, r.power_counter, r.nominal_class));
            }
        }
    }
    found.sort();
    let expected = vec![
        (0, 0, -4, DivergenceClass::Vacuum),
        (0, 2, -2, DivergenceClass::Quadratic),
        (0, 4, 0, DivergenceClass::Logarithmic),
        (2, 0, -1, DivergenceClass::Linear),
    ];
    ensure!(found == expected, "divergent set {found:?}");
    Ok(format!("{} divergent points out of 441", found.len()))
}

fn ac3_round_trip() -> Result<String, String> {
    let mut checked = 0;
    for ne in (0..=200).step_by(2) {
        for np in (0..=200).step_by(2) {
            let inv = solve_inverse(ExternalData::new(ne, np)).map_err(|e| e.to_string())?;
            let dir = solve_direct(inv.internal).map_err(|e| e.to_string())?;
            ensure!(dir == inv, "inverse then direct at ({ne},{np})");
            checked += 1;
        }
    }
    for total in 0..=200u64 {
        for fp in 0..=total / 2 {
            let dir = solve_direct(InternalData::new(total - fp, fp)).map_err(|e| e.to_string())?;
            let inv = solve_inverse(dir.external).map_err(|e| e.to_string())?;
            ensure!(inv == dir, "direct then inverse at ({},{fp})", total - fp);
            checked += 1;
        }
    }
    Ok(format!("{checked} tuples"))
}

fn identities(d: &Diagram) -> Result<(), String> {
    let n = d.vertex_count() as i64;
    let fe = d.internal_count(ParticleKind::Electron) as i64;
    let fp = d.internal_count(ParticleKind::Photon) as i64;
    let ne = d.external_count(ParticleKind::Electron) as i64;
    let np = d.external_count(ParticleKind::Photon) as i64;
    let f = d.internal_lines().len() as i64;
    let q = d
        .external_legs()
        .iter()
        .filter(|l| l.kind == ParticleKind::Electron)
        .count() as i64;
    let c = common::bfs_components(d, None) as i64;
    let m = f - n + c;
    let text = serialize(d);

    ensure!(f == fe + fp, "F = Fe + Fp fails\n{text}");
    ensure!(q == ne && q == 2 * fp, "Q = Ne = 2Fp fails\n{text}");
    ensure!(n == fe + fp && n == ne + np, "vertex counts fail\n{text}");
    ensure!(
        2 * fe == 2 * np + ne && np == fe - fp,
        "electron line count fails\n{text}"
    );
    ensure!(m == c, "m = C fails\n{text}");
    ensure!(
        loop_count(d) as i64 == m && connected_components(d).count() as i64 == c,
        "topology\n{text}"
    );
    let k_internal = 2 * f - (fe + 4 * m);
    ensure!(
        2 * k_internal == 3 * ne + 2 * np - 8 * m,
        "K forms disagree\n{text}"
    );
    let s = summarize(d).map_err(|e| format!("{e}\n{text}"))?;
    ensure!(s.power_counter == k_internal, "summary K\n{text}");
    ensure!(
        is_irreducible(d).irreducible == common::brute_force_irreducible(d),
        "irreducibility disagrees with bridge removal\n{text}"
    );
    Ok(())
}

fn ac4_identity_suite() -> Result<String, String> {
    let mut total = 0;
    for n in 0..=6 {
        for d in enumerate(&EnumerationRequest::vertices(n)).map_err(|e| e.to_string())? {
            identities(&d)?;
            total += 1;
        }
    }
    Ok(format!("{total} labeled diagrams, n <= 6"))
}

/// Canonical classes per vertex count from the naive generator, n = 0..=4.
const GOLDEN_CLASS_COUNTS: [usize; 5] = [1, 1, 3, 5, 14];

fn ac5_enumeration_oracle() -> Result<String, String> {
    for n in 0..=4 {
        let naive = common::class_set(&common::naive_main_condition_diagrams(n));
        let fast =
            enumerate(&EnumerationRequest::vertices(n).deduped()).map_err(|e| e.to_string())?;
        let fast_set = common::class_set(&fast);
        ensure!(fast.len() == fast_set.len(), "duplicate classes at n={n}");
        ensure!(naive == fast_set, "class sets differ at n={n}");
        ensure!(
            naive.len() == GOLDEN_CLASS_COUNTS[n],
            "n={n}: {} classes",
            naive.len()
        );
    }
    Ok(format!("class counts {GOLDEN_CLASS_COUNTS:?}"))
}

fn ac6_log_divergence() -> Result<String, String> {
    let target = PI * PI * 4f64.ln();
    let cutoffs = [50.0, 100.0, 200.0];
    let mut values = Vec::new();
    let mut worst_mc: f64 = 0.0;
    let mut worst_null: f64 = 0.0;
    for (i, &l) in cutoffs.iter().enumerate() {
        let spec = IntegralSpec::new(E1, 2.0, l, 1, Method::quadrature());
        let est = integrate(&spec).map_err(|e| e.to_string())?;
        ensure!(est.converged, "quadrature did not converge at L={l}");
        let closed = closed_form(&spec).map_err(|e| e.to_string())?;
        ensure!(
            (est.value - closed).abs() < 0.01 * closed.abs(),
            "L={l}: {} vs closed form {closed}",
            est.value
        );

        let mc_spec = IntegralSpec {
            method: Method::monte_carlo(10_000_000),
            ..spec
        }
        .with_seed(1000 + i as u64);
        let mc = integrate(&mc_spec).map_err(|e| e.to_string())?;
        let z = (mc.value - est.value).abs() / mc.std_error;
        ensure!(
            z <= 3.0,
            "L={l}: Monte Carlo {} ± {} vs quadrature {}",
            mc.value,
            mc.std_error,
            est.value
        );
        worst_mc = worst_mc.max(z);

        for mu in 2..=4 {
            let null = integrate(&mc_spec.with_mu(mu)).map_err(|e| e.to_string())?;
            let z = null.value.abs() / null.std_error;
            ensure!(
                z <= 3.0,
                "L={l} mu={mu}: {} ± {}",
                null.value,
                null.std_error
            );
            worst_null = worst_null.max(z);
        }
        values.push(est.value);
    }
    let mut worst_diff: f64 = 0.0;
    for w in values.windows(2) {
        let rel = ((w[1] - w[0]) - target).abs() / target;
        ensure!(rel < 0.005, "difference {} vs {target}", w[1] - w[0]);
        worst_diff = worst_diff.max(rel);
    }
    Ok(format!(
        "diff rel err {worst_diff:.1e}, MC |z| <= {worst_mc:.2}, null |z| <= {worst_null:.2}"
    ))
}

fn ac7_nominal_vs_actual() -> Result<String, String> {
    let base = IntegralSpec::new(E1, 2.0, 1.0, 1, Method::quadrature());
    let rows = divergence_scan(&base, &[50.0, 100.0, 200.0, 400.0]).map_err(|e| e.to_string())?;
    let fit = growth_fit(&rows);
    ensure!(fit.logarithmic_residual < 0.02, "{fit:?}");
    ensure!(fit.linear_residual > 0.20, "{fit:?}");
    Ok(format!(
        "ln L² residual {:.1e}, linear residual {:.3}",
        fit.logarithmic_residual, fit.linear_residual
    ))
}

fn ac8_parser() -> Result<String, String> {
    let mut enumerated = 0;
    for n in 0..=4 {
        for d in enumerate(&EnumerationRequest::vertices(n)).map_err(|e| e.to_string())? {
            let text = serialize(&d);
            let back = parse(&text).map_err(|e| format!("{e}\n{text}"))?;
            ensure!(back.same_structure(&d), "round trip\n{text}");
            enumerated += 1;
        }
    }
    let mut rng = ChaCha8Rng::seed_from_u64(0xacc8);
    for _ in 0..1000 {
        let (source, expected) = common::fuzz_valid_source(&mut rng);
        let d = parse(&source).map_err(|e| format!("{e}\n{source}"))?;
        ensure!(d.same_structure(&expected), "fuzzed source\n{source}");
        let text = serialize(&d);
        ensure!(
            serialize(&parse(&text).map_err(|e| e.to_string())?) == text,
            "not idempotent\n{text}"
        );
    }
    let mut rejected = 0;
    for _ in 0..1000 {
        let (source, _) = common::fuzz_valid_source(&mut rng);
        let broken = common::mutate_source(&mut rng, &source);
        let outcome = catch_unwind(|| parse(&broken).map(|_| ()).map_err(|e| (e.line, e.column)));
        match outcome {
            Err(_) => return Err(format!("parser panicked on\n{broken}")),
            Ok(Err((line, column))) => {
                ensure!(line >= 1 && column >= 1, "bad position {line}:{column}");
                rejected += 1;
            }
            Ok(Ok(())) => {}
        }
    }
    for (d, golden) in [
        (fixtures::figure1(), include_str!("golden/figure1.json")),
        (fixtures::figure2(), include_str!("golden/figure2.json")),
    ] {
        let json = summary_document(&d).map_err(|e| e.to_string())?.to_json();
        ensure!(json == golden, "golden JSON drift for {:?}", d.name());
    }
    Ok(format!(
        "{enumerated} enumerated, 1000 fuzzed valid, {rejected}/1000 mutations rejected"
    ))
}

fn main() -> ExitCode {
    let criteria: [(&str, &str, u64, Check); 8] = [
        ("AC1", "figure summaries", 1, ac1_figure_summaries),
        ("AC2", "one-loop divergent cases", 1, ac2_four_cases),
        ("AC3", "direct/inverse round trip", 1, ac3_round_trip),
        (
            "AC4",
            "identity suite on enumerated diagrams",
            60,
            ac4_identity_suite,
        ),
        ("AC5", "enumeration oracle", 60, ac5_enumeration_oracle),
        ("AC6", "integral log-divergence", 120, ac6_log_divergence),
        (
            "AC7",
            "nominal linear vs actual logarithmic",
            240,
            ac7_nominal_vs_actual,
        ),
        ("AC8", "parser and serializer", 60, ac8_parser),
    ];
    let mut failures = 0;
    for (id, title, budget, check) in criteria {
        let start = Instant::now();
        let outcome =
            catch_unwind(AssertUnwindSafe(check)).unwrap_or_else(|_| Err("panicked".into()));
        let elapsed = start.elapsed();
        let outcome = match outcome {
            Ok(_) if elapsed > Duration::from_secs(budget) => {
                Err(format!("over budget ({budget} s)"))
            }
            other => other,
        };
        let secs = elapsed.as_secs_f64();
        match outcome {
            Ok(detail) => println!("[PASS] {id} {title} ({secs:.2} s): {detail}"),
            Err(reason) => {
                failures += 1;
                println!("[FAIL] {id} {title} ({secs:.2} s): {reason}");
            }
        }
    }
    if failures == 0 {
        println!("acceptance: all criteria passed");
        ExitCode::SUCCESS
    } else {
        println!("acceptance: {failures} criteria failed");
        ExitCode::FAILURE
    }
}
