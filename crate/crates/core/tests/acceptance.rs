//! Acceptance suite: one PASS/FAIL line per criterion, nonzero exit on any
//! failure. Run with `cargo test -p horizeta-core --test acceptance`.

use std::process::ExitCode;
use std::time::{Duration, Instant};

use horizeta_core::arith::{self, primes_up_to};
use horizeta_core::characters::{self, verify_character_regrouping};
use horizeta_core::elliptic::{self, standard_corpus};
use horizeta_core::gm::{self, horizontal_component, verify_gm_cyclotomic_factorization, verify_gm_local_partition};
use horizeta_core::localzeta::cyclotomic_local_factor;
use horizeta_core::strata::{self, OpenSubschemeSpec};
use horizeta_core::{Certificate, LocalFactor, Result};
use rayon::prelude::*;

/// Coefficientwise bound for the character regrouping, relative to
/// `max(1, largest exact coefficient)`.
const REGROUPING_TOL: f64 = 1e-9;
/// Regrouped complete product against `zeta(s-1)/zeta(s)`.
const GLOBAL_TOL: f64 = 1e-3;
const GLOBAL_S: f64 = 3.0;
const GLOBAL_PRIME_BOUND: u64 = 10_000;
const GLOBAL_N_MAX: u64 = 200;
/// Largest `q` for the elliptic enumeration sweep.
const ELLIPTIC_FIELD_BOUND: u64 = 1_000_000;

struct Outcome {
    summary: String,
    failures: Vec<String>,
}

impl Outcome {
    fn from_certificates(summary: String, certs: &[Certificate]) -> Self {
        let failures = certs
            .iter()
            .flat_map(|c| {
                c.failures()
                    .map(move |r| format!("{} / {}: {} expected {} got {}", c.task, r.name, r.inputs, r.expected, r.actual))
            })
            .collect();
        Outcome { summary, failures }
    }
}

fn collect(results: Vec<Result<Certificate>>) -> std::result::Result<Vec<Certificate>, String> {
    results.into_iter().collect::<Result<Vec<_>>>().map_err(|e| e.to_string())
}

fn criterion_1() -> std::result::Result<Outcome, String> {
    let primes = primes_up_to(50);
    let certs = collect(primes.par_iter().map(|&p| verify_gm_local_partition(p, 6)).collect())?;
    Ok(Outcome::from_certificates(format!("{} primes p <= 50, nu <= 6", primes.len()), &certs))
}

fn criterion_2() -> std::result::Result<Outcome, String> {
    let primes = primes_up_to(100);
    let pairs: Vec<(u64, u64)> = (1..=100u64)
        .flat_map(|n| primes.iter().filter(move |&&p| n % p != 0).map(move |&p| (n, p)))
        .collect();
    let certs = collect(pairs.par_iter().map(|&(n, p)| verify_character_regrouping(n, p)).collect())?;
    let mut outcome = Outcome::from_certificates(format!("{} pairs (n, p)", pairs.len()), &certs);
    if characters::regrouping_tolerance(1) != REGROUPING_TOL {
        outcome.failures.push(format!("module tolerance {} != {REGROUPING_TOL}", characters::regrouping_tolerance(1)));
    }
    Ok(outcome)
}

fn criterion_3() -> std::result::Result<Outcome, String> {
    let primes = primes_up_to(13);
    let certs = collect(
        primes
            .par_iter()
            .map(|&p| verify_gm_cyclotomic_factorization(p, 4, p.pow(4) - 1))
            .collect(),
    )?;
    Ok(Outcome::from_certificates(format!("{} primes p <= 13 through degree 4", primes.len()), &certs))
}

fn criterion_4() -> std::result::Result<Outcome, String> {
    let report = gm::verify_gm_global(GLOBAL_S, GLOBAL_N_MAX, GLOBAL_PRIME_BOUND).map_err(|e| e.to_string())?;
    let mut outcome = Outcome::from_certificates(
        format!(
            "gap N=200 {:.3e} < gap N=100 {:.3e}; |regrouped - target| = {:.3e}",
            report.gap,
            report.gap_half,
            (report.regrouped - report.target).abs()
        ),
        std::slice::from_ref(&report.certificate),
    );
    if !(report.gap < report.gap_half) {
        outcome.failures.push(format!("gap {} not below {}", report.gap, report.gap_half));
    }
    if !((report.regrouped - report.target).abs() <= GLOBAL_TOL) {
        outcome.failures.push(format!("regrouped {} vs target {}", report.regrouped, report.target));
    }
    Ok(outcome)
}

fn criterion_5() -> std::result::Result<Outcome, String> {
    let corpus = standard_corpus();
    let mut jobs = Vec::new();
    for p in primes_up_to(50) {
        let mut q = p;
        let mut nu = 1;
        while q <= ELLIPTIC_FIELD_BOUND {
            for (i, curve) in corpus.iter().enumerate() {
                if curve.is_good(p) {
                    jobs.push((i, p, nu));
                }
            }
            q *= p;
            nu += 1;
        }
    }
    let certs = collect(
        jobs.par_iter()
            .map(|&(i, p, nu)| elliptic::verify_torsion_partition(&corpus[i], p, nu))
            .collect(),
    )?;
    Ok(Outcome::from_certificates(
        format!("{} curves, {} (curve, p, nu) cases with p^nu <= 10^6", corpus.len(), jobs.len()),
        &certs,
    ))
}

fn criterion_6() -> std::result::Result<Outcome, String> {
    let corpus = standard_corpus();
    let jobs: Vec<(usize, u64)> = primes_up_to(20)
        .into_iter()
        .flat_map(|p| corpus.iter().enumerate().filter(move |(_, c)| c.is_good(p)).map(move |(i, _)| (i, p)))
        .collect();
    let certs = collect(
        jobs.par_iter()
            .map(|&(i, p)| elliptic::verify_torsion_factorization(&corpus[i], p, 3))
            .collect(),
    )?;
    Ok(Outcome::from_certificates(format!("{} (curve, p) cases, degree 3", jobs.len()), &certs))
}

fn strata_corpus() -> Vec<OpenSubschemeSpec> {
    let spec = |n, polys: &[&str]| OpenSubschemeSpec::from_polys(n, polys).expect("corpus spec");
    vec![
        OpenSubschemeSpec::projective_space(1),
        spec(1, &["x0*x1"]),
        spec(1, &["x0^2 + x1^2"]),
        OpenSubschemeSpec::projective_space(2),
        spec(2, &["x0*x1*x2"]),
        spec(2, &["x0 + x1 + x2"]),
        spec(2, &["x0^3 + x1^3 + x2^3"]),
        spec(2, &["x0", "x1"]),
        spec(2, &["x0^2 + x1^2 - x2^2", "x0*x1"]),
    ]
}

/// Stratification for d = 1, 2, then every torsion stratum over `F_{p^2}`
/// through the orbit check.
fn strata_case(spec: &OpenSubschemeSpec, p: u64) -> Result<Certificate> {
    let mut cert = Certificate::new("acceptance.strata");
    for d in 1..=2 {
        cert.extend(strata::verify_stratification(spec, p, d)?);
    }
    cert.extend(strata::verify_all_stratum_orbits(spec, p, 2)?);
    Ok(cert)
}

fn criterion_7() -> std::result::Result<Outcome, String> {
    let corpus = strata_corpus();
    let jobs: Vec<(usize, u64)> = primes_up_to(13)
        .into_iter()
        .flat_map(|p| (0..corpus.len()).map(move |i| (i, p)))
        .collect();
    let certs = collect(jobs.par_iter().map(|&(i, p)| strata_case(&corpus[i], p)).collect())?;
    Ok(Outcome::from_certificates(format!("{} specs over P^1/P^2, p <= 13, d <= 2", corpus.len()), &certs))
}

fn criterion_8() -> std::result::Result<Outcome, String> {
    let gm = OpenSubschemeSpec::from_polys(1, &["x0*x1"]).map_err(|e| e.to_string())?;
    let mut checked = 0;
    let mut failures = Vec::new();
    for p in primes_up_to(50) {
        for n in 1..=60u64 {
            if n % p == 0 {
                continue;
            }
            let f = arith::multiplicative_order(p, n).map_err(|e| e.to_string())?;
            if (p as f64).powi(f as i32) > 1e6 {
                continue;
            }
            let j = strata::OrderTuple::new(vec![n]).map_err(|e| e.to_string())?;
            let r = strata::verify_stratum_orbits(&gm, &j, p, None).map_err(|e| e.to_string())?;
            let from_strata: LocalFactor = r.product().map_err(|e| e.to_string())?;
            let cyclotomic = cyclotomic_local_factor(n, p).map_err(|e| e.to_string())?;
            let component = horizontal_component(n).and_then(|c| c.local_factor(p)).map_err(|e| e.to_string())?;
            if !r.certificate.passed() || from_strata != cyclotomic || from_strata != component {
                failures.push(format!("n={n} p={p}: strata {from_strata}, gm {cyclotomic}, component {component}"));
            }
            checked += 1;
        }
    }
    Ok(Outcome { summary: format!("{checked} (n, p) pairs, n <= 60, p <= 50, p^f <= 10^6"), failures })
}

type Criterion = fn() -> std::result::Result<Outcome, String>;

fn main() -> ExitCode {
    let criteria: [(u32, &str, Criterion, u64); 8] = [
        (1, "G_m local partition", criterion_1, 10),
        (2, "character regrouping", criterion_2, 30),
        (3, "G_m cyclotomic factorization", criterion_3, 10),
        (4, "G_m global truncation", criterion_4, 60),
        (5, "elliptic torsion partition", criterion_5, 300),
        (6, "elliptic torsion factorization", criterion_6, 300),
        (7, "open subscheme stratification", criterion_7, 120),
        (8, "strata vs G_m factors", criterion_8, 60),
    ];
    let mut all_passed = true;
    for (id, name, run, limit) in criteria {
        let start = Instant::now();
        let result = run();
        let elapsed = start.elapsed();
        let over_time = elapsed > Duration::from_secs(limit);
        let (passed, detail, failures) = match result {
            Ok(o) => (o.failures.is_empty() && !over_time, o.summary, o.failures),
            Err(e) => (false, format!("error: {e}"), Vec::new()),
        };
        all_passed &= passed;
        println!(
            "{} criterion {id} ({name}): {detail}; {:.2} s (limit {limit} s){}",
            if passed { "PASS" } else { "FAIL" },
            elapsed.as_secs_f64(),
            if over_time { " TIME LIMIT EXCEEDED" } else { "" }
        );
        for f in failures.iter().take(5) {
            println!("    {f}");
        }
        if failures.len() > 5 {
            println!("    ... {} more", failures.len() - 5);
        }
    }
    if all_passed {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
