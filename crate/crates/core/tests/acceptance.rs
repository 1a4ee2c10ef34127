//! One pass/fail line per acceptance criterion. Runs without the libtest
//! harness so the lines always reach the output.

mod common;

use std::panic::{catch_unwind, AssertUnwindSafe};
use std::sync::atomic::{AtomicUsize, Ordering};
use std::time::Instant;

use pentaheat_core::basin::{fixed_point_data, label_stability, phi_inv, render, PixelClass, RenderConfig};
use pentaheat_core::blowup::{
    collapse_test, exceptional_image, lift_map, maps_onto_divisor, CollapseVerdict, CurveOnSurface, Exceptional,
    Restricted,
};
use pentaheat_core::charts::{curves, heat_map_xy, Chart, P1Value};
use pentaheat_core::cohomology::{
    mat_vec, multiplicity_table, non_functoriality_witness, proper_transform_class, pullback_matrix, DivisorClass,
};
use pentaheat_core::degrees::{
    char_poly, fibration_divisibility, spectral_radius_exact, topological_degree, IntPolynomial,
};
use pentaheat_core::pentagon::{
    convergence_table, heat_step, normalize, random_convex_pentagon, random_transform, regular_pentagon, Polygon,
};
use pentaheat_core::poly::{int, Poly, RatFn, Rational};
use pentaheat_core::report::{verify, Certificate, Overall, Status, VerifyOptions};
use proptest::test_runner::{Config, TestRunner};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

const MATRIX: [[i64; 5]; 5] =
    [[3, 4, 2, 2, 2], [4, 3, 2, 2, 2], [-2, -2, -2, -1, -1], [-2, -2, -1, -2, -1], [-2, -2, -1, -1, -2]];

type Verdict = Result<String, String>;

fn ensure(cond: bool, msg: impl Into<String>) -> Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(msg.into())
    }
}

fn record_passes(cert: &Certificate, id: &str) -> Result<(), String> {
    let r = cert.record(id).ok_or(format!("certificate lacks `{id}`"))?;
    ensure(r.status == Status::Pass, format!("certificate check `{id}` is {:?}", r.status))
}

fn criterion_1(cert: &Certificate) -> Verdict {
    let (m, _) = pullback_matrix().map_err(|e| e.to_string())?;
    ensure(m == MATRIX, format!("computed {m:?}"))?;
    record_passes(cert, "pullback-matrix")?;
    Ok("25 integer entries equal".into())
}

fn criterion_2(cert: &Certificate) -> Verdict {
    let cp = char_poly(&MATRIX);
    let expected = IntPolynomial::from_roots(&[(4, 1), (-1, 4)]);
    ensure(cp == expected, format!("char poly {cp}"))?;
    let rho = spectral_radius_exact(&cp).map_err(|e| e.to_string())?;
    ensure(rho.exact() == Some(&int(4)), format!("spectral radius {rho}"))?;
    record_passes(cert, "char-poly")?;
    record_passes(cert, "spectral-radius")?;
    Ok(format!("{cp}, radius exactly {rho}"))
}

fn criterion_3() -> Verdict {
    let td = topological_degree(&heat_map_xy(), 5, 1).map_err(|e| e.to_string())?;
    ensure(td.samples.len() >= 5, "fewer than 5 samples")?;
    let mut targets: Vec<&[String; 2]> = td.samples.iter().map(|s| &s.target).collect();
    targets.sort();
    targets.dedup();
    ensure(targets.len() == td.samples.len(), "repeated target")?;
    for s in &td.samples {
        ensure(s.count == 6, format!("target {:?} has {} preimages", s.target, s.count))?;
        ensure(s.max_residual < 1e-8, format!("residual {:e} at {:?}", s.max_residual, s.target))?;
    }
    ensure(td.degree == Some(6), "samples disagree")?;
    for ev in &td.resampled {
        println!("    resampled sample {} at ({}, {}): {}", ev.sample, ev.target[0], ev.target[1], ev.reason);
    }
    let worst = td.samples.iter().map(|s| s.max_residual).fold(0.0, f64::max);
    Ok(format!(
        "6 preimages at {} targets, max residual {worst:.1e}, {} resampled",
        td.samples.len(),
        td.resampled.len()
    ))
}

fn rf(chart: Chart, n: &str, d: &str) -> Restricted {
    let v = chart.vars();
    Restricted::Function(RatFn::new(Poly::expr(&v, n), Poly::expr(&v, d)).unwrap())
}

fn criterion_4(cert: &Certificate) -> Verdict {
    let h = heat_map_xy();
    let fin = |a: i64, b: i64| [P1Value::Finite(int(a)), P1Value::Finite(int(b))];
    let expected_images = [
        fin(1, 1),
        fin(1, 1),
        [P1Value::Infinity, P1Value::Finite(int(0))],
        [P1Value::Finite(int(0)), P1Value::Infinity],
    ];
    for (k, want) in (1..=4).zip(expected_images) {
        let v = collapse_test(&CurveOnSurface::critical(k, false), &h).map_err(|e| e.to_string())?;
        ensure(v == CollapseVerdict::Collapsed { image: want.clone() }, format!("C{k}: {v:?}"))?;
    }
    let v5 = collapse_test(&CurveOnSurface::critical(5, false), &h).map_err(|e| e.to_string())?;
    let CollapseVerdict::NotCollapsed { witnesses: Some([a, b]), .. } = v5 else {
        return Err("C5 lacks witnesses".into());
    };
    ensure(a.point == [int(0), int(0)] && b.point == [int(0), int(1)], "C5 witnesses differ from (0,0), (0,1)")?;
    ensure(a.image != b.image, "C5 witness images coincide")?;

    for (k, e) in [(1, Exceptional::E1), (2, Exceptional::E1), (3, Exceptional::E2), (4, Exceptional::E3)] {
        let inc = maps_onto_divisor(&CurveOnSurface::critical(k, true), e).map_err(|e| e.to_string())?;
        ensure(inc.divides(), format!("C{k}~ does not map onto {e}"))?;
    }
    let m1 = collapse_test(&CurveOnSurface::critical(1, true), &lift_map(Chart::XY, Chart::AM1))
        .map_err(|e| e.to_string())?;
    let CollapseVerdict::NotCollapsed { restriction: Some(r), .. } = m1 else {
        return Err("C1~ restriction missing".into());
    };
    ensure(r.comps[1] == rf(Chart::XY, "x*(x + 2)", "2*x + 1"), format!("m1' = {}", r.comps[1]))?;
    for e in Exceptional::ALL {
        exceptional_image(e).map_err(|err| format!("{e}: {err}"))?;
    }
    let e2 = exceptional_image(Exceptional::E2).map_err(|e| e.to_string())?;
    ensure(
        e2.restriction.comps == [rf(Chart::UM2, "3 - 2*m2", "m2^2 - 6*m2 + 6"), rf(Chart::UM2, "0", "1")],
        format!("E2 image ({}, {})", e2.restriction.comps[0], e2.restriction.comps[1]),
    )?;
    record_passes(cert, "collapse")?;
    record_passes(cert, "lifted-noncollapse")?;
    Ok("C1,C2 -> (1,1), C3 -> p2, C4 -> p3, C5 witnesses (0,0),(0,1); lifts onto E1,E1,E2,E3; m1' and E2 image exact"
        .into())
}

fn criterion_5(cert: &Certificate) -> Verdict {
    let expected: [[u32; 3]; 5] = [[1, 0, 0], [1, 2, 1], [1, 1, 2], [1, 1, 1], [1, 1, 1]];
    let table = multiplicity_table();
    let labels: Vec<&str> = table.iter().map(|r| r.0.as_str()).collect();
    ensure(labels == ["C2", "C3", "C4", "C6", "C7"], format!("rows {labels:?}"))?;
    let entries = table.len() * 3;
    ensure(table.iter().zip(expected).all(|(r, e)| r.1 == e), "multiplicity table differs")?;
    let classes = [
        (1, [1, 1, -1, -1, -1]),
        (2, [1, 1, -1, 0, 0]),
        (3, [2, 2, -1, -2, -1]),
        (4, [2, 2, -1, -1, -2]),
        (6, [1, 2, -1, -1, -1]),
        (7, [2, 1, -1, -1, -1]),
    ];
    for (k, want) in classes {
        let c = proper_transform_class(&curves::c(k), Chart::XY).map_err(|e| e.to_string())?;
        ensure(c == DivisorClass(want), format!("class of C{k}~ is {c}"))?;
    }
    record_passes(cert, "multiplicity-table")?;
    record_passes(cert, "class-equations")?;
    Ok(format!("{entries} multiplicities and 6 proper-transform classes exact"))
}

fn criterion_6(cert: &Certificate) -> Verdict {
    let r = cert.record("degree-growth").ok_or("no growth record")?;
    ensure(r.status == Status::Pass, "growth check did not pass")?;
    let rows = r.payload["rows"].as_array().ok_or("growth rows missing")?;
    let got: Vec<(i64, i64)> = rows
        .iter()
        .map(|row| (row["symbolic"][0].as_i64().unwrap_or(-1), row["symbolic"][1].as_i64().unwrap_or(-1)))
        .collect();
    ensure(got == [(3, 4), (13, 12), (51, 52)], format!("bidegrees {got:?}"))?;
    let mut v = DivisorClass::LX;
    for (n, g) in got.iter().enumerate() {
        v = mat_vec(&MATRIX, &v);
        ensure((v.0[0], v.0[1]) == *g, format!("M^{} e1 = {v}", n + 1))?;
    }
    let nf = non_functoriality_witness().map_err(|e| e.to_string())?;
    ensure(nf.first != nf.second, "non-functoriality vectors coincide")?;
    Ok(format!("(3,4), (13,12), (51,52); witness {} != {}", nf.first, nf.second))
}

fn criterion_7() -> Verdict {
    let k = DivisorClass([2, 2, -1, -1, -1]);
    let mk = mat_vec(&MATRIX, &k);
    ensure(mk == 4 * k, format!("M(-K) = {mk}"))?;
    ensure(!fibration_divisibility(4, 6), "4 divides 6")?;
    Ok(format!("M{k} = {mk}; 4 does not divide 6"))
}

fn criterion_8() -> Verdict {
    let mut rng = ChaCha8Rng::seed_from_u64(2024);
    for i in 0..50 {
        let p = random_convex_pentagon(&mut rng);
        let t = random_transform(&mut rng);
        let direct = normalize(&heat_step(&p).map_err(|e| e.to_string())?).map_err(|e| e.to_string())?;
        let moved =
            normalize(&heat_step(&t.apply_polygon(&p)).map_err(|e| e.to_string())?).map_err(|e| e.to_string())?;
        ensure(direct == moved, format!("pair {i} breaks equivariance"))?;
    }
    let reg = regular_pentagon();
    let stepped = heat_step(&reg).map_err(|e| e.to_string())?;
    ensure(
        normalize(&stepped).map_err(|e| e.to_string())? == normalize(&reg).map_err(|e| e.to_string())?,
        "regular pentagon moved",
    )?;
    let mut rng = ChaCha8Rng::seed_from_u64(99);
    let polys: Vec<Polygon<Rational>> = (0..100).map(|_| random_convex_pentagon(&mut rng)).collect();
    let rows = convergence_table(&polys, 1e-6, 100);
    let mut worst = 0;
    for r in &rows {
        let n = r.iterations.ok_or(format!("pentagon {}: {:?}", r.index, r.error))?;
        worst = worst.max(n);
    }
    Ok(format!("50 exact equivariance pairs, regular class fixed exactly, 100/100 converge (max {worst} iterations)"))
}

fn criterion_9() -> Verdict {
    let base = RenderConfig::default();
    ensure(base.width == 512 && base.height == 512, "default size is not 512x512")?;
    let mut images = Vec::new();
    for threads in [1, 2, 7] {
        let img = render(&RenderConfig { threads: Some(threads), ..base.clone() }).map_err(|e| e.to_string())?;
        images.push(img.to_ppm());
        if threads == 1 {
            let r = phi_inv();
            let (c, row) = base.pixel_of(r, r);
            ensure(img.get(c, row) == PixelClass::Basin, "fixed-point pixel is not Basin")?;
            let [b, n, g] = img.counts();
            println!("    512x512 labels: basin {b}, non-basin {n}, guarded {g}");
        }
    }
    ensure(images.windows(2).all(|w| w[0] == w[1]), "renders differ across thread counts")?;
    let fp = fixed_point_data().map_err(|e| e.to_string())?;
    ensure(fp.is_attracting, "fixed point is not attracting")?;
    let st = label_stability(&base, 1000, 9);
    ensure(st.sampled == 1000, "stability sample size")?;
    ensure(st.fraction() >= 0.99, format!("label stability {:.3}", st.fraction()))?;
    Ok(format!(
        "identical bytes for 1, 2, 7 threads; fixed-point pixel Basin; stability {:.3} on 1000 pixels",
        st.fraction()
    ))
}

fn criterion_10() -> Verdict {
    let cases = AtomicUsize::new(0);
    let run = |n: u32, f: &dyn Fn(&mut TestRunner) -> Result<(), String>| {
        let mut runner = TestRunner::new(Config { cases: n, failure_persistence: None, ..Config::default() });
        f(&mut runner)
    };
    let count = |c: &AtomicUsize| c.fetch_add(1, Ordering::Relaxed);
    use common::*;
    let trials = trial_factors();
    run(200, &|r| {
        r.run(&(poly_strategy(3, 3, 6), nonzero_poly(2, 2, 4)), |(p, q)| {
            count(&cases);
            prop_divide_roundtrip(&p, &q)
        })
        .map_err(|e| e.to_string())
    })?;
    run(200, &|r| {
        r.run(&(nonzero_poly(2, 2, 4), nonconstant_poly(1, 2, 3), 0u32..=3), |(p, q, k)| {
            count(&cases);
            prop_vanishing_order_shift(&p, &q, k)
        })
        .map_err(|e| e.to_string())
    })?;
    run(200, &|r| {
        r.run(&(nonzero_poly(3, 3, 6), small_rational(), small_rational()), |(p, a, b)| {
            count(&cases);
            prop_multiplicity_zero_iff_nonvanishing(&p, &[a, b])
        })
        .map_err(|e| e.to_string())
    })?;
    run(200, &|r| {
        r.run(&(nonzero_poly(1, 1, 3), nonzero_poly(2, 1, 4), nonzero_poly(1, 2, 4)), |(f, a, b)| {
            count(&cases);
            prop_gcd(&f, &a, &b, &trials)
        })
        .map_err(|e| e.to_string())
    })?;
    run(200, &|r| {
        let strat = (nonconstant_poly(2, 2, 5), nonconstant_poly(2, 2, 5), small_rational(), small_rational());
        r.run(&(strat, small_rational()), |((p, q, a, b), x1)| {
            count(&cases);
            prop_resultant(&p, &q, &[a, b], &x1)
        })
        .map_err(|e| e.to_string())
    })?;
    run(200, &|r| {
        r.run(&(nonzero_poly(3, 3, 5), nonzero_poly(3, 3, 5)), |(p, q)| {
            count(&cases);
            prop_bidegree_additive(&p, &q)
        })
        .map_err(|e| e.to_string())
    })?;
    run(100, &|r| {
        r.run(&(matrix5(), unimodular5()), |(m, (s, s_inv))| {
            count(&cases);
            prop_char_poly(&m, &s, &s_inv)
        })
        .map_err(|e| e.to_string())
    })?;
    let total = cases.load(Ordering::Relaxed);
    ensure(total >= 1000, format!("only {total} cases ran"))?;
    Ok(format!("{total} randomized cases over division, order, multiplicity, gcd, resultant, bidegree, char poly"))
}

fn main() {
    let start = Instant::now();
    let cert = verify(&VerifyOptions::default()).expect("default options are valid");
    let cert_ok = cert.overall == Overall::Pass;
    if !cert_ok {
        println!("verify failed at {:?}", cert.failed_check);
    }
    let checks: [(u32, Box<dyn Fn() -> Verdict + '_>); 10] = [
        (1, Box::new(|| criterion_1(&cert))),
        (2, Box::new(|| criterion_2(&cert))),
        (3, Box::new(criterion_3)),
        (4, Box::new(|| criterion_4(&cert))),
        (5, Box::new(|| criterion_5(&cert))),
        (6, Box::new(|| criterion_6(&cert))),
        (7, Box::new(criterion_7)),
        (8, Box::new(criterion_8)),
        (9, Box::new(criterion_9)),
        (10, Box::new(criterion_10)),
    ];
    let mut failures = 0;
    for (n, f) in checks.iter() {
        let t = Instant::now();
        let verdict = catch_unwind(AssertUnwindSafe(f)).unwrap_or_else(|_| Err("panicked".into()));
        let secs = t.elapsed().as_secs_f64();
        match verdict {
            Ok(detail) => println!("criterion {n}: PASS ({secs:.1}s) {detail}"),
            Err(why) => {
                failures += 1;
                println!("criterion {n}: FAIL ({secs:.1}s) {why}");
            }
        }
    }
    println!("acceptance: {} of 10 criteria pass in {:.1}s", 10 - failures, start.elapsed().as_secs_f64());
    if failures > 0 || !cert_ok {
        std::process::exit(1);
    }
}
