//! Strategies and property bodies shared by the property suite and the
//! acceptance target.
#![allow(dead_code)]

use num_traits::{One, Zero};
use pentaheat_core::degrees::{char_poly, to_big};
use pentaheat_core::poly::{gcd, gcd_prs, int, resultant, vars, Poly, Rational, UniPoly, Vars};
use proptest::prelude::*;
use proptest::test_runner::TestCaseError;

pub fn xy() -> Vars {
    vars(&["x", "y"])
}

/// Polynomials of bidegree at most `(dx, dy)` with small integer coefficients.
pub fn poly_strategy(dx: u32, dy: u32, max_terms: usize) -> impl Strategy<Value = Poly> {
    prop::collection::vec((0..=dx, 0..=dy, -4i64..=4), 1..=max_terms).prop_map(|terms| {
        let v = xy();
        let t: Vec<([u32; 2], Rational)> = terms.into_iter().map(|(i, j, c)| ([i, j], int(c))).collect();
        let refs: Vec<(&[u32], Rational)> = t.iter().map(|(e, c)| (&e[..], c.clone())).collect();
        Poly::from_exponent_terms(&v, &refs)
    })
}

pub fn nonzero_poly(dx: u32, dy: u32, max_terms: usize) -> impl Strategy<Value = Poly> {
    poly_strategy(dx, dy, max_terms).prop_filter("nonzero", |p| !p.is_zero())
}

pub fn nonconstant_poly(dx: u32, dy: u32, max_terms: usize) -> impl Strategy<Value = Poly> {
    poly_strategy(dx, dy, max_terms).prop_filter("nonconstant", |p| !p.is_constant())
}

pub fn small_rational() -> impl Strategy<Value = Rational> {
    (-6i64..=6, 1i64..=4).prop_map(|(n, d)| Rational::new(n.into(), d.into()))
}

pub fn matrix5() -> impl Strategy<Value = [[i64; 5]; 5]> {
    prop::array::uniform5(prop::array::uniform5(-4i64..=4))
}

/// Unimodular matrix as a product of unit lower and unit upper triangular factors.
pub fn unimodular5() -> impl Strategy<Value = ([[i64; 5]; 5], [[i64; 5]; 5])> {
    (prop::collection::vec(-2i64..=2, 10), prop::collection::vec(-2i64..=2, 10)).prop_map(|(lo, up)| {
        let mut l = [[0i64; 5]; 5];
        let mut u = [[0i64; 5]; 5];
        let (mut a, mut b) = (lo.into_iter(), up.into_iter());
        for i in 0..5 {
            l[i][i] = 1;
            u[i][i] = 1;
            for j in 0..i {
                l[i][j] = a.next().unwrap();
                u[j][i] = b.next().unwrap();
            }
        }
        let m = matmul(&l, &u);
        (m, inverse_unimodular(&l, &u))
    })
}

pub fn matmul(a: &[[i64; 5]; 5], b: &[[i64; 5]; 5]) -> [[i64; 5]; 5] {
    std::array::from_fn(|i| std::array::from_fn(|j| (0..5).map(|k| a[i][k] * b[k][j]).sum()))
}

fn transpose(a: &[[i64; 5]; 5]) -> [[i64; 5]; 5] {
    std::array::from_fn(|i| std::array::from_fn(|j| a[j][i]))
}

/// `(L U)^-1 = U^-1 L^-1` by substitution on unit triangular factors.
fn inverse_unimodular(l: &[[i64; 5]; 5], u: &[[i64; 5]; 5]) -> [[i64; 5]; 5] {
    let mut li = [[0i64; 5]; 5];
    let mut ui = [[0i64; 5]; 5];
    for c in 0..5 {
        for i in 0..5 {
            let e = i64::from(i == c);
            li[i][c] = e - (0..i).map(|k| l[i][k] * li[k][c]).sum::<i64>();
        }
        for i in (0..5).rev() {
            let e = i64::from(i == c);
            ui[i][c] = e - (i + 1..5).map(|k| u[i][k] * ui[k][c]).sum::<i64>();
        }
    }
    matmul(&ui, &li)
}

/// Determinant by fraction-free elimination over the rationals.
#[allow(clippy::needless_range_loop)]
pub fn det(mut m: Vec<Vec<Rational>>) -> Rational {
    let n = m.len();
    let mut d = Rational::one();
    for c in 0..n {
        let Some(p) = (c..n).find(|&r| !m[r][c].is_zero()) else { return Rational::zero() };
        if p != c {
            m.swap(p, c);
            d = -d;
        }
        let piv = m[c][c].clone();
        d *= &piv;
        for r in c + 1..n {
            let f = &m[r][c] / &piv;
            for k in c..n {
                let t = &f * &m[c][k];
                m[r][k] -= t;
            }
        }
    }
    d
}

/// Univariate Sylvester determinant, written out directly.
pub fn sylvester_det(a: &[Rational], b: &[Rational]) -> Rational {
    let (m, n) = (a.len() - 1, b.len() - 1);
    let size = m + n;
    let mut mat = vec![vec![Rational::zero(); size]; size];
    for r in 0..n {
        for (k, c) in a.iter().rev().enumerate() {
            mat[r][r + k] = c.clone();
        }
    }
    for r in 0..m {
        for (k, c) in b.iter().rev().enumerate() {
            mat[n + r][r + k] = c.clone();
        }
    }
    det(mat)
}

/// Coefficients in `y` (ascending) of `p(x0, y)`.
pub fn specialize_x(p: &Poly, x0: &Rational) -> Vec<Rational> {
    p.coefficients_in(1).iter().map(|c| c.eval(&[x0.clone(), Rational::zero()])).collect()
}

/// Every polynomial of bidegree at most (1, 1) with coefficients in {-1, 0, 1}.
pub fn trial_factors() -> Vec<Poly> {
    let v = xy();
    let mut out = Vec::new();
    for code in 0..81u32 {
        let mut c = code;
        let mut terms = Vec::new();
        for e in [[0u32, 0], [1, 0], [0, 1], [1, 1]] {
            terms.push((e, int((c % 3) as i64 - 1)));
            c /= 3;
        }
        let refs: Vec<(&[u32], Rational)> = terms.iter().map(|(e, c)| (&e[..], c.clone())).collect();
        let p = Poly::from_exponent_terms(&v, &refs);
        if !p.is_constant() {
            out.push(p);
        }
    }
    out
}

fn divides(q: &Poly, p: &Poly) -> bool {
    p.exact_divide(q).is_ok()
}

pub fn prop_divide_roundtrip(p: &Poly, q: &Poly) -> Result<(), TestCaseError> {
    let prod = p * q;
    prop_assert_eq!(prod.exact_divide(q).unwrap(), p.clone());
    Ok(())
}

pub fn prop_division_failure_is_honest(p: &Poly, q: &Poly) -> Result<(), TestCaseError> {
    match p.exact_divide(q) {
        Ok(r) => prop_assert_eq!(&r * q, p.clone()),
        // a failure must not hide a quotient: p + q is then not divisible either
        Err(_) => prop_assert!((p + q).exact_divide(q).is_err()),
    }
    Ok(())
}

pub fn prop_vanishing_order_shift(p: &Poly, q: &Poly, k: u32) -> Result<(), TestCaseError> {
    let base = p.vanishing_order(q).unwrap();
    let lifted = (p * &q.pow(k)).vanishing_order(q).unwrap();
    prop_assert_eq!(lifted, base + k);
    Ok(())
}

pub fn prop_multiplicity_zero_iff_nonvanishing(p: &Poly, pt: &[Rational; 2]) -> Result<(), TestCaseError> {
    let m = p.multiplicity_at_point(pt).unwrap();
    prop_assert_eq!(m == 0, !p.eval(pt).is_zero());
    // the translate has no terms of degree below the multiplicity
    let t = p.translate(pt);
    let low = t.terms().iter().map(|(mono, _)| mono.total_degree()).min().unwrap();
    prop_assert_eq!(low, m);
    Ok(())
}

/// gcd divides both inputs, contains every common trial factor, and agrees
/// with the remainder-sequence gcd.
pub fn prop_gcd(f: &Poly, a: &Poly, b: &Poly, trials: &[Poly]) -> Result<(), TestCaseError> {
    let (pa, pb) = (f * a, f * b);
    let g = gcd(&pa, &pb);
    prop_assert!(divides(&g, &pa) && divides(&g, &pb));
    prop_assert!(divides(&f.normalized(), &g), "planted factor {} missing from gcd {}", f, g);
    prop_assert_eq!(g.clone(), gcd_prs(&pa, &pb));
    for t in trials {
        if divides(t, &pa) && divides(t, &pb) {
            prop_assert!(divides(t, &g), "common factor {} does not divide gcd {}", t, g);
        }
    }
    Ok(())
}

/// A common rational zero is a zero of the resultant, and specializing the
/// resultant agrees with the Sylvester determinant of the specializations.
pub fn prop_resultant(p: &Poly, q: &Poly, pt: &[Rational; 2], x1: &Rational) -> Result<(), TestCaseError> {
    let v = xy();
    let p0 = p - &Poly::constant(&v, p.eval(pt));
    let q0 = q - &Poly::constant(&v, q.eval(pt));
    prop_assume!(p0.degree_in(1) > 0 && q0.degree_in(1) > 0);
    let r = resultant(&p0, &q0, 1);
    prop_assert!(r.eval(&[pt[0].clone(), Rational::zero()]).is_zero());
    let a = specialize_x(&p0, x1);
    let b = specialize_x(&q0, x1);
    prop_assume!(!a.last().unwrap().is_zero() && !b.last().unwrap().is_zero());
    prop_assert_eq!(r.eval(&[x1.clone(), Rational::zero()]), sylvester_det(&a, &b));
    Ok(())
}

pub fn prop_bidegree_additive(p: &Poly, q: &Poly) -> Result<(), TestCaseError> {
    let (a, b) = (p.bidegree().unwrap(), q.bidegree().unwrap());
    prop_assert_eq!((p * q).bidegree().unwrap(), (a.0 + b.0, a.1 + b.1));
    Ok(())
}

pub fn prop_univariate_division(a: &[i64], b: &[i64]) -> Result<(), TestCaseError> {
    let (pa, pb) = (UniPoly::from_ints(a), UniPoly::from_ints(b));
    prop_assume!(!pb.is_zero());
    let (q, r) = pa.div_rem(&pb);
    prop_assert_eq!(q.mul(&pb).add(&r), pa.clone());
    prop_assert!(r.is_zero() || r.degree() < pb.degree());
    let g = pa.gcd(&pb);
    if !g.is_zero() {
        prop_assert!(pa.div_rem(&g).1.is_zero() && pb.div_rem(&g).1.is_zero());
    }
    Ok(())
}

/// Characteristic polynomial: agrees with `det(tI - M)` at sample points,
/// is invariant under transpose and unimodular similarity, and satisfies
/// Cayley-Hamilton.
pub fn prop_char_poly(m: &[[i64; 5]; 5], s: &[[i64; 5]; 5], s_inv: &[[i64; 5]; 5]) -> Result<(), TestCaseError> {
    prop_assert_eq!(matmul(s, s_inv), std::array::from_fn(|i| std::array::from_fn(|j| i64::from(i == j))));
    let cp = char_poly(m);
    let up = cp.to_unipoly();
    for t in -2i64..=2 {
        let rows: Vec<Vec<Rational>> =
            (0..5).map(|i| (0..5).map(|j| int(if i == j { t } else { 0 }) - int(m[i][j])).collect()).collect();
        prop_assert_eq!(up.eval(&int(t)), det(rows));
    }
    prop_assert_eq!(char_poly(&transpose(m)), cp.clone());
    prop_assert_eq!(char_poly(&matmul(&matmul(s, m), s_inv)), cp.clone());
    let zero = cp.eval_matrix(&to_big(m));
    prop_assert!(zero.iter().flatten().all(|c| c.is_zero()));
    Ok(())
}
