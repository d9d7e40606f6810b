//! One line per acceptance criterion; exits nonzero if any fails.

mod common;

use common::{random_document, random_gamma, random_quadric_image, seeded};
use crnf::flatten::{flatten_test, harmonic_mixed_manifold};
use crnf::io::{emit_manifold, parse_manifold};
use crnf::moser::{check_solution_estimates, quadric_image_fixture, run_iteration, IterationConfig};
use crnf::oracle::{multi_indices, oracle_solve};
use crnf::pseudo_normal::{
    check_map_normalization, check_phi_normalization, linearized_residual, normal_form, solve_linearized,
    transform_manifold, Manifold, Vanishing,
};
use crnf::quadric_auto::{make_auto, quadric_residual, random_params, Family};
use crnf::series::coeff::{self, Rational};
use crnf::series::{FormalSeries, Monomial};
use rand::Rng;
use std::time::{Duration, Instant};

type Check = Result<String, String>;

fn ensure(cond: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(msg())
    }
}

fn residual_zero(gamma: &FormalSeries) -> Result<bool, String> {
    let s = solve_linearized(gamma).map_err(|e| e.to_string())?;
    let r = linearized_residual(gamma, &s.f, &s.g, &s.phi).map_err(|e| e.to_string())?;
    Ok(r.is_zero())
}

fn solver_exactness() -> Check {
    let mut rng = seeded(101);
    let mut count = 0;
    for k in 0..50 {
        let dim = if k % 2 == 0 { 2 } else { 3 };
        let nterms = rng.gen_range(1..9);
        let gamma = random_gamma(&mut rng, dim, 8, 3, nterms);
        ensure(residual_zero(&gamma)?, || format!("nonzero residual for Gamma #{k}"))?;
        count += 1;
    }
    Ok(format!("{count} seeded Gamma (n = 2, 3; degree <= 8), residual identically zero"))
}

fn oracle_equivalence() -> Check {
    // both solvers are real-linear, so a real basis of the degree 3..5 space
    // covers every Gamma; random combinations check the linearity itself
    let (dim, cap) = (2, 5);
    let mut basis = Vec::new();
    for t in 3..=cap {
        for p in 0..=t {
            for i in multi_indices(dim, p) {
                for j in multi_indices(dim, t - p) {
                    for c in [coeff::one(), coeff::i_unit()] {
                        basis.push(FormalSeries::monomial(dim, cap, Monomial::new(&i, &j, 0), c));
                    }
                }
            }
        }
    }
    let same = |g: &FormalSeries| -> Result<bool, String> {
        let a = solve_linearized(g).map_err(|e| e.to_string())?;
        let b = oracle_solve(g).map_err(|e| e.to_string())?;
        Ok(a == b)
    };
    for (k, g) in basis.iter().enumerate() {
        ensure(same(g)?, || format!("mismatch on basis element {k}: {:?}", g.terms()))?;
    }
    let mut rng = seeded(202);
    for k in 0..30 {
        let nterms = rng.gen_range(2..12);
        let g = random_gamma(&mut rng, dim, cap, 3, nterms);
        ensure(same(&g)?, || format!("mismatch on random Gamma #{k}"))?;
    }
    Ok(format!("{} real basis elements of degrees 3..5 and 30 random combinations agree exactly", basis.len()))
}

fn idempotence() -> Check {
    let mut rng = seeded(303);
    let mut done = 0;
    while done < 20 {
        let dim = if done % 4 == 3 { 3 } else { 2 };
        let cap = if dim == 2 { 7 } else { 5 };
        let nterms = rng.gen_range(1..6);
        let e = random_gamma(&mut rng, dim, cap, 3, nterms);
        let phi = normal_form(&Manifold::new(e).unwrap()).map_err(|e| e.to_string())?.phi;
        if phi.is_zero() {
            continue;
        }
        let v = check_phi_normalization(&phi).map_err(|e| e.to_string())?;
        ensure(v.is_empty(), || format!("phi #{done} not normalized: {v:?}"))?;
        let again = normal_form(&Manifold::new(phi.clone()).unwrap()).map_err(|e| e.to_string())?;
        ensure(again.map.is_identity(), || format!("H != id for phi #{done}"))?;
        ensure(again.phi == phi, || format!("phi changed for #{done}"))?;
        done += 1;
    }
    Ok("20 seeded normalized phi: H = identity, phi unchanged".into())
}

fn worked_normal_form() -> Check {
    let (dim, cap) = (2, 4);
    let quartic = FormalSeries::monomial(dim, cap, Monomial::new(&[2], &[2], 0), coeff::one());
    let r = normal_form(&Manifold::new(quartic.clone()).unwrap()).map_err(|e| e.to_string())?;
    let a = FormalSeries::monomial(dim, cap, Monomial::new(&[1], &[1], 0), coeff::one());
    let b = FormalSeries::monomial(dim, cap, Monomial::new(&[0, 1], &[0, 1], 0), coeff::one());
    let want = a.sub(&b).unwrap().pow(2).scale(&coeff::ratio(1, 4));
    ensure(r.phi == want, || format!("phi = {:?}", r.phi.terms()))?;
    ensure(r.s == Vanishing::Order(4), || format!("s = {}", r.s))?;
    let oracle = oracle_solve(&quartic).map_err(|e| e.to_string())?;
    ensure(oracle.phi == want, || "oracle disagrees".into())?;
    ensure(check_map_normalization(&r.map).is_empty(), || "map not normalized".into())?;
    Ok("|z1|^4 gives phi = (|z1|^2 - |z2|^2)^2/4, s = 4, confirmed by the dense solve".into())
}

fn automorphisms() -> Check {
    let mut rng = seeded(505);
    let mut count = 0;
    for dim in [2, 3] {
        for family in [Family::Linear, Family::Full] {
            for k in 0..20 {
                let p = random_params(&mut rng, dim, 6, family);
                let h = make_auto(&p, family).map_err(|e| e.to_string())?;
                let res = quadric_residual(&h).map_err(|e| e.to_string())?;
                ensure(res.is_zero(), || format!("{family:?} n = {dim} #{k}: residual {:?}", res.terms()))?;
                count += 1;
            }
        }
    }
    Ok(format!("{count} parameter sets (20 per family per n in {{2, 3}}, cap 6), residual identically zero"))
}

fn order_invariance() -> Check {
    let mut rng = seeded(606);
    let mut seen = Vec::new();
    for start in 0..4 {
        let e = loop {
            let nterms = rng.gen_range(1..4);
            let e = random_gamma(&mut rng, 2, 6, 3 + start % 3, nterms);
            if matches!(normal_form(&Manifold::new(e.clone()).unwrap()).unwrap().s, Vanishing::Order(_)) {
                break e;
            }
        };
        let first = normal_form(&Manifold::new(e).unwrap()).map_err(|e| e.to_string())?;
        let s0 = first.s;
        let mut phi = first.phi;
        for cycle in 0..5 {
            let family = if rng.gen_bool(0.5) { Family::Full } else { Family::Linear };
            let auto = make_auto(&random_params(&mut rng, 2, 6, family), family).map_err(|e| e.to_string())?;
            let image = transform_manifold(&Manifold::new(phi).unwrap(), &auto).map_err(|e| e.to_string())?;
            let again = normal_form(&image).map_err(|e| e.to_string())?;
            ensure(again.s == s0, || format!("start {start} cycle {cycle}: s {} -> {}", s0, again.s))?;
            phi = again.phi;
        }
        seen.push(s0.to_string());
    }
    Ok(format!("20 conjugation + re-normalization cycles keep s (starting orders {})", seen.join(", ")))
}

fn flattening() -> Check {
    let mut rng = seeded(707);
    let pairs: [(&[u32], &[u32]); 4] = [(&[2, 0], &[0, 2]), (&[3, 0], &[0, 2]), (&[2, 0], &[0, 3]), (&[3, 0], &[0, 3])];
    let q = |r: &mut rand_chacha::ChaCha8Rng| coeff::complex_ratio((r.gen_range(-4..5), 3), (r.gen_range(-4..5), 3));
    let (mut flat, mut total) = (0, 0);
    for k in 0..40 {
        let mut harmonic = Vec::new();
        for j in [vec![3, 0], vec![1, 2], vec![0, 4]] {
            if rng.gen_bool(0.5) {
                harmonic.push((j, q(&mut rng)));
            }
        }
        let symmetric = k % 2 == 0;
        let mut mixed = Vec::new();
        let mut all_sym = true;
        for (i, j) in pairs {
            if !rng.gen_bool(0.7) {
                continue;
            }
            let b = q(&mut rng);
            let mut partner = coeff::conj(&b);
            if !symmetric && (mixed.is_empty() || rng.gen_bool(0.3)) {
                let d = loop {
                    let d = q(&mut rng);
                    if !coeff::is_zero(&d) {
                        break d;
                    }
                };
                partner = &partner + &d;
                all_sym = false;
            }
            mixed.push((i.to_vec(), j.to_vec(), b));
            mixed.push((j.to_vec(), i.to_vec(), partner));
        }
        let m = harmonic_mixed_manifold(2, 8, &harmonic, &mixed).map_err(|e| e.to_string())?;
        let v = flatten_test(&m).map_err(|e| e.to_string())?;
        ensure(v.flat == all_sym, || format!("instance {k}: flat = {}, symmetric = {all_sym}", v.flat))?;
        ensure(v.cap == 8, || "verdict lost its cap".into())?;
        flat += v.flat as usize;
        total += 1;
    }
    Ok(format!("{total} instances ({flat} symmetric): flat exactly when b_IJ = conj(b_JI)"))
}

fn order_doubling() -> Check {
    let t = Instant::now();
    let m = quadric_image_fixture(20).map_err(|e| e.to_string())?;
    let rep = run_iteration(&m, 3, &IterationConfig::default()).map_err(|e| e.to_string())?;
    let d = rep.orders();
    ensure(d.len() == 4, || format!("d-sequence {:?}", rep.d_sequence))?;
    for (nu, dv) in d.iter().enumerate() {
        let dv = dv.ok_or_else(|| format!("d_{nu} undetermined"))?;
        ensure(dv >= (1 << nu) + 2, || format!("d_{nu} = {dv} < 2^{nu} + 2"))?;
        if nu > 0 {
            let prev = d[nu - 1].unwrap();
            ensure(dv >= 2 * prev - 2, || format!("d_{nu} = {dv} < 2 d_{} - 2", nu - 1))?;
        }
    }
    ensure(rep.stall.is_none(), || "unexpected stall".into())?;
    let elapsed = t.elapsed();
    ensure(elapsed < Duration::from_secs(300), || format!("took {elapsed:?}"))?;
    let seq: Vec<String> = rep.d_sequence.iter().map(|v| v.to_string()).collect();
    Ok(format!("d-sequence ({}) in {:.2?}", seq.join(", "), elapsed))
}

fn negative_control() -> Check {
    let e = FormalSeries::monomial(2, 12, Monomial::new(&[2], &[2], 0), coeff::one());
    let rep = run_iteration(&Manifold::new(e).unwrap(), 3, &IterationConfig::default()).map_err(|e| e.to_string())?;
    ensure(rep.orders().iter().all(|d| *d == Some(4)), || format!("d-sequence {:?}", rep.d_sequence))?;
    ensure(rep.stall == Some(4), || format!("stall flag {:?}", rep.stall))?;
    Ok(format!("|z1|^4 stays at d = 4 for {} steps, report flags s = 4", rep.records.len()))
}

fn estimate_soundness() -> Check {
    let mut rng = seeded(1010);
    let (r, rho) = (Rational::from(1), Rational::from_signeds(5, 6));
    let (mut bounds, mut grads, mut coeffs) = (0, 0, 0);
    let mut worst = 0f64;
    for k in 0..10 {
        let m = random_quadric_image(&mut rng, 2, 10);
        let rep = check_solution_estimates(&m, 3, &r, &rho, 64, k).map_err(|e| e.to_string())?;
        for c in &rep.checks {
            ensure(c.pass, || format!("fixture {k}: {} = {} exceeds {}", c.name, c.lhs, c.rhs_approx))?;
        }
        ensure(rep.gradient.pass, || format!("fixture {k}: finite differences off by {:e}", rep.gradient.max_rel_err))?;
        ensure(rep.coefficient_bounds.failures.is_empty(), || format!("fixture {k}: coefficient bound fails at {:?}", rep.coefficient_bounds.failures))?;
        bounds += rep.checks.len();
        grads += rep.gradient.compared;
        coeffs += rep.coefficient_bounds.checked;
        worst = worst.max(rep.gradient.max_rel_err);
    }
    Ok(format!(
        "10 fixtures: {bounds} sup bounds, {coeffs} exact coefficient bounds, {grads} gradient entries (max rel err {worst:.1e})"
    ))
}

fn round_trip() -> Check {
    let mut rng = seeded(1111);
    for k in 0..100 {
        let doc = random_document(&mut rng);
        let m = parse_manifold(&doc).map_err(|e| format!("document {k}: {e}"))?;
        let text = serde_json::to_string(&emit_manifold(&m)).unwrap();
        let back: crnf::io::ManifoldDocument = serde_json::from_str(&text).unwrap();
        let m2 = parse_manifold(&back).map_err(|e| format!("document {k} re-parse: {e}"))?;
        ensure(m2 == m, || format!("document {k}: manifold changed"))?;
        let text2 = serde_json::to_string(&emit_manifold(&m2)).unwrap();
        ensure(text2 == text, || format!("document {k}: emitted bytes differ"))?;
    }
    Ok("100 seeded documents: parse -> emit -> parse byte-identical".into())
}

fn main() {
    let criteria: [(&str, fn() -> Check); 11] = [
        ("linearized solver exactness", solver_exactness),
        ("oracle equivalence", oracle_equivalence),
        ("uniqueness and idempotence", idempotence),
        ("worked normal form", worked_normal_form),
        ("automorphism preservation", automorphisms),
        ("lowest vanishing order invariance", order_invariance),
        ("flattening criterion", flattening),
        ("order doubling", order_doubling),
        ("negative control", negative_control),
        ("estimate soundness", estimate_soundness),
        ("serialization round trip", round_trip),
    ];
    let mut failed = 0;
    for (k, (name, run)) in criteria.iter().enumerate() {
        let t = Instant::now();
        let outcome = std::panic::catch_unwind(run).unwrap_or_else(|_| Err("panicked".into()));
        let secs = t.elapsed().as_secs_f64();
        match outcome {
            Ok(detail) => println!("criterion {:>2} PASS  {name}: {detail} [{secs:.2}s]", k + 1),
            Err(why) => {
                failed += 1;
                println!("criterion {:>2} FAIL  {name}: {why} [{secs:.2}s]", k + 1);
            }
        }
    }
    println!("acceptance: {} passed, {failed} failed", criteria.len() - failed);
    if failed > 0 {
        std::process::exit(1);
    }
}
