//! Dense univariate polynomials over the rationals: Euclidean algorithm,
//! Sturm sequences, exact real-root isolation, rational roots, and
//! numeric complex roots.

use std::fmt;

use num_bigint::BigInt;
use num_complex::Complex64;
use num_integer::Integer;
use num_traits::{One, Signed, ToPrimitive, Zero};

use super::{Monomial, Poly, Rational, Vars};

#[derive(Clone, PartialEq, Eq, Hash)]
pub struct UniPoly {
    /// Coefficient of `t^i` at index `i`; no trailing zeros.
    coeffs: Vec<Rational>,
}

/// A real root: exact when rational, otherwise an isolating interval
/// `(lo, hi]` containing exactly one root of the squarefree part.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum RealRoot {
    Exact(Rational),
    Isolated { lo: Rational, hi: Rational },
}

impl RealRoot {
    pub fn approx(&self) -> f64 {
        match self {
            RealRoot::Exact(r) => r.to_f64().unwrap_or(f64::NAN),
            RealRoot::Isolated { lo, hi } => {
                ((lo + hi) / Rational::from_integer(2.into())).to_f64().unwrap_or(f64::NAN)
            }
        }
    }
}

impl UniPoly {
    pub fn new(mut coeffs: Vec<Rational>) -> Self {
        while coeffs.last().is_some_and(|c| c.is_zero()) {
            coeffs.pop();
        }
        UniPoly { coeffs }
    }

    pub fn from_ints(coeffs: &[i64]) -> Self {
        Self::new(coeffs.iter().map(|&c| Rational::from_integer(c.into())).collect())
    }

    pub fn zero() -> Self {
        UniPoly { coeffs: Vec::new() }
    }

    pub fn one() -> Self {
        Self::from_ints(&[1])
    }

    /// `t - r`.
    pub fn linear_root(r: &Rational) -> Self {
        Self::new(vec![-r.clone(), Rational::one()])
    }

    /// Extracts the coefficients of `p` in `var`; `p` must not involve other variables.
    pub fn from_poly(p: &Poly, var: usize) -> Option<Self> {
        let mut coeffs = vec![Rational::zero(); p.degree_in(var) as usize + 1];
        for (m, c) in p.terms() {
            if m.total_degree() != m.exponent(var) {
                return None;
            }
            coeffs[m.exponent(var) as usize] = c.clone();
        }
        Some(Self::new(coeffs))
    }

    pub fn to_poly(&self, vars: &Vars, var: usize) -> Poly {
        Poly::from_terms(vars, self.coeffs.iter().enumerate().map(|(i, c)| (Monomial::var(var, i as u32), c.clone())))
    }

    pub fn coeffs(&self) -> &[Rational] {
        &self.coeffs
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.is_empty()
    }

    /// Degree; the zero polynomial reports `None`.
    pub fn degree(&self) -> Option<usize> {
        self.coeffs.len().checked_sub(1)
    }

    pub fn leading(&self) -> Rational {
        self.coeffs.last().cloned().unwrap_or_else(Rational::zero)
    }

    pub fn eval(&self, t: &Rational) -> Rational {
        self.coeffs.iter().rev().fold(Rational::zero(), |acc, c| acc * t + c)
    }

    pub fn eval_f64(&self, t: f64) -> f64 {
        self.coeffs.iter().rev().fold(0.0, |acc, c| acc * t + c.to_f64().unwrap_or(f64::NAN))
    }

    pub fn eval_complex(&self, z: Complex64) -> Complex64 {
        self.coeffs.iter().rev().fold(Complex64::new(0.0, 0.0), |acc, c| acc * z + c.to_f64().unwrap_or(f64::NAN))
    }

    pub fn derivative(&self) -> Self {
        Self::new(
            self.coeffs.iter().enumerate().skip(1).map(|(i, c)| c * Rational::from_integer(BigInt::from(i))).collect(),
        )
    }

    pub fn scale(&self, c: &Rational) -> Self {
        Self::new(self.coeffs.iter().map(|a| a * c).collect())
    }

    pub fn monic(&self) -> Self {
        if self.is_zero() {
            return self.clone();
        }
        self.scale(&self.leading().recip())
    }

    pub fn add(&self, other: &Self) -> Self {
        let n = self.coeffs.len().max(other.coeffs.len());
        Self::new(
            (0..n)
                .map(|i| {
                    let a = self.coeffs.get(i).cloned().unwrap_or_else(Rational::zero);
                    let b = other.coeffs.get(i).cloned().unwrap_or_else(Rational::zero);
                    a + b
                })
                .collect(),
        )
    }

    pub fn neg(&self) -> Self {
        Self::new(self.coeffs.iter().map(|c| -c).collect())
    }

    pub fn sub(&self, other: &Self) -> Self {
        self.add(&other.neg())
    }

    pub fn mul(&self, other: &Self) -> Self {
        if self.is_zero() || other.is_zero() {
            return Self::zero();
        }
        let mut out = vec![Rational::zero(); self.coeffs.len() + other.coeffs.len() - 1];
        for (i, a) in self.coeffs.iter().enumerate() {
            for (j, b) in other.coeffs.iter().enumerate() {
                out[i + j] += a * b;
            }
        }
        Self::new(out)
    }

    pub fn pow(&self, k: u32) -> Self {
        (0..k).fold(Self::one(), |acc, _| acc.mul(self))
    }

    /// Quotient and remainder; `other` must be nonzero.
    pub fn div_rem(&self, other: &Self) -> (Self, Self) {
        assert!(!other.is_zero(), "division by zero polynomial");
        let db = other.coeffs.len() - 1;
        let lc = other.leading();
        let mut r = self.coeffs.clone();
        if r.len() <= db {
            return (Self::zero(), self.clone());
        }
        let mut q = vec![Rational::zero(); r.len() - db];
        for k in (0..q.len()).rev() {
            let t = &r[k + db] / &lc;
            if !t.is_zero() {
                for (i, b) in other.coeffs.iter().enumerate() {
                    r[k + i] -= &t * b;
                }
            }
            q[k] = t;
        }
        r.truncate(db);
        (Self::new(q), Self::new(r))
    }

    /// Monic gcd (zero if both are zero).
    pub fn gcd(&self, other: &Self) -> Self {
        let mut a = self.clone();
        let mut b = other.clone();
        while !b.is_zero() {
            let r = a.div_rem(&b).1;
            a = b;
            b = r;
        }
        a.monic()
    }

    pub fn squarefree_part(&self) -> Self {
        if self.degree().unwrap_or(0) == 0 {
            return self.monic();
        }
        let g = self.gcd(&self.derivative());
        self.div_rem(&g).0.monic()
    }

    /// Scaled to coprime integer coefficients with positive leading coefficient.
    pub fn primitive_integer(&self) -> Vec<BigInt> {
        if self.is_zero() {
            return Vec::new();
        }
        let lcm = self.coeffs.iter().fold(BigInt::one(), |acc, c| acc.lcm(c.denom()));
        let ints: Vec<BigInt> = self.coeffs.iter().map(|c| c.numer() * (&lcm / c.denom())).collect();
        let mut g = ints.iter().fold(BigInt::zero(), |acc, c| acc.gcd(c));
        if ints.last().unwrap().is_negative() {
            g = -g;
        }
        ints.into_iter().map(|c| c / &g).collect()
    }

    pub fn sturm_sequence(&self) -> Vec<UniPoly> {
        let p = self.squarefree_part();
        let mut seq = vec![p.clone(), p.derivative()];
        loop {
            let n = seq.len();
            if seq[n - 1].is_zero() {
                seq.pop();
                break;
            }
            let r = seq[n - 2].div_rem(&seq[n - 1]).1.neg();
            if r.is_zero() {
                break;
            }
            seq.push(r);
        }
        seq
    }

    /// Cauchy bound: every complex root has modulus strictly below it.
    pub fn root_bound(&self) -> Rational {
        let lc = self.leading().abs();
        let m = self.coeffs[..self.coeffs.len() - 1].iter().map(|c| c.abs() / &lc).max().unwrap_or_else(Rational::zero);
        m + Rational::one()
    }

    /// Real roots of the squarefree part, in increasing order.
    pub fn real_roots(&self) -> Vec<RealRoot> {
        if self.degree().unwrap_or(0) == 0 {
            return Vec::new();
        }
        let seq = self.sturm_sequence();
        let p = &seq[0];
        let b = self.root_bound();
        let mut out = Vec::new();
        isolate(&seq, p, -b.clone(), b, &mut out);
        out
    }

    /// Refines an isolating interval until it is narrower than `width`.
    pub fn refine(&self, root: &RealRoot, width: &Rational) -> RealRoot {
        let p = self.squarefree_part();
        let RealRoot::Isolated { lo, hi } = root else {
            return root.clone();
        };
        let (mut lo, mut hi) = (lo.clone(), hi.clone());
        let two = Rational::from_integer(2.into());
        let shi = sign(&p.eval(&hi));
        while &(&hi - &lo) >= width {
            let mid = (&lo + &hi) / &two;
            let sm = sign(&p.eval(&mid));
            if sm == 0 {
                return RealRoot::Exact(mid);
            }
            if sm == shi {
                hi = mid;
            } else {
                lo = mid;
            }
        }
        RealRoot::Isolated { lo, hi }
    }

    /// Distinct rational roots, in increasing order.
    pub fn rational_roots(&self) -> Vec<Rational> {
        if self.degree().unwrap_or(0) == 0 {
            return Vec::new();
        }
        let sf = self.squarefree_part();
        let ints = UniPoly::new(sf.primitive_integer().into_iter().map(Rational::from_integer).collect());
        let lc = ints.leading().abs();
        // distinct rationals with denominator dividing lc are at least 1/lc^2 apart
        let width = (&lc * &lc).recip();
        let mut out = Vec::new();
        for root in sf.real_roots() {
            let mut w = width.clone();
            loop {
                match sf.refine(&root, &w) {
                    RealRoot::Exact(r) => out.push(r),
                    RealRoot::Isolated { lo, hi } => {
                        let cand = simplest_between(&lo, &hi);
                        // the interval is open at lo, which may be another root
                        if cand == lo {
                            w /= Rational::from_integer(2.into());
                            continue;
                        }
                        if sf.eval(&cand).is_zero() {
                            out.push(cand);
                        }
                    }
                }
                break;
            }
        }
        out
    }

    /// All complex roots (with multiplicity) by Aberth iteration followed by
    /// Newton polishing. Intended for squarefree input of modest degree.
    pub fn complex_roots(&self) -> Vec<Complex64> {
        let c: Vec<Complex64> = self.coeffs.iter().map(|v| Complex64::new(v.to_f64().unwrap(), 0.0)).collect();
        aberth(&c)
    }
}

/// Roots of `sum c[i] t^i` with complex coefficients (no trailing zeros
/// expected); same method as [`UniPoly::complex_roots`].
pub fn aberth(coeffs: &[Complex64]) -> Vec<Complex64> {
    let mut coeffs = coeffs.to_vec();
    while coeffs.last().is_some_and(|c| c.norm() == 0.0) {
        coeffs.pop();
    }
    if coeffs.len() <= 1 {
        return Vec::new();
    }
    let n = coeffs.len() - 1;
    let lc = coeffs[n];
    let c: Vec<Complex64> = coeffs.iter().map(|&k| k / lc).collect();
    let dc: Vec<Complex64> = (1..=n).map(|i| c[i] * i as f64).collect();
    let eval =
        |coeffs: &[Complex64], z: Complex64| coeffs.iter().rev().fold(Complex64::new(0.0, 0.0), |a, &k| a * z + k);
    let radius = 1.0 + c[..n].iter().map(|k| k.norm()).fold(0.0, f64::max).min(1e150);
    let mut z: Vec<Complex64> = (0..n)
        .map(|k| {
            let ang = 2.0 * std::f64::consts::PI * (k as f64 + 0.25) / n as f64 + 0.4;
            Complex64::from_polar(radius * 0.5 + 0.1, ang)
        })
        .collect();
    for _ in 0..500 {
        let mut moved = 0.0f64;
        for i in 0..n {
            let pv = eval(&c, z[i]);
            let dv = eval(&dc, z[i]);
            if pv.norm() == 0.0 {
                continue;
            }
            let ratio = pv / dv;
            let sum: Complex64 = (0..n).filter(|&j| j != i).map(|j| Complex64::new(1.0, 0.0) / (z[i] - z[j])).sum();
            let w = ratio / (Complex64::new(1.0, 0.0) - ratio * sum);
            if w.is_finite() {
                z[i] -= w;
                moved = moved.max(w.norm() / (1.0 + z[i].norm()));
            }
        }
        if moved < 1e-15 {
            break;
        }
    }
    for zi in z.iter_mut() {
        for _ in 0..3 {
            let dv = eval(&dc, *zi);
            if dv.norm() == 0.0 {
                break;
            }
            let step = eval(&c, *zi) / dv;
            if !step.is_finite() {
                break;
            }
            *zi -= step;
        }
    }
    z
}

fn sign(r: &Rational) -> i32 {
    if r.is_zero() {
        0
    } else if r.is_positive() {
        1
    } else {
        -1
    }
}

fn sign_variations(seq: &[UniPoly], t: &Rational) -> usize {
    let mut last = 0;
    let mut count = 0;
    for s in seq {
        let v = sign(&s.eval(t));
        if v != 0 {
            if last != 0 && v != last {
                count += 1;
            }
            last = v;
        }
    }
    count
}

/// Number of distinct real roots in `(lo, hi]`.
pub fn count_roots(seq: &[UniPoly], lo: &Rational, hi: &Rational) -> usize {
    sign_variations(seq, lo).saturating_sub(sign_variations(seq, hi))
}

fn isolate(seq: &[UniPoly], p: &UniPoly, lo: Rational, hi: Rational, out: &mut Vec<RealRoot>) {
    let n = count_roots(seq, &lo, &hi);
    if n == 0 {
        return;
    }
    if p.eval(&hi).is_zero() && n == 1 {
        out.push(RealRoot::Exact(hi));
        return;
    }
    if n == 1 {
        out.push(RealRoot::Isolated { lo, hi });
        return;
    }
    let mid = (&lo + &hi) / Rational::from_integer(2.into());
    isolate(seq, p, lo, mid.clone(), out);
    isolate(seq, p, mid, hi, out);
}

/// The rational with the smallest denominator in `[lo, hi]`.
pub fn simplest_between(lo: &Rational, hi: &Rational) -> Rational {
    assert!(lo <= hi);
    if lo.is_positive() {
        return simplest_positive(lo, hi);
    }
    if hi.is_negative() {
        return -simplest_positive(&-hi, &-lo);
    }
    Rational::zero()
}

fn simplest_positive(lo: &Rational, hi: &Rational) -> Rational {
    let fl = lo.floor();
    if &fl == lo {
        return fl;
    }
    let next = &fl + Rational::one();
    if &next <= hi {
        return next;
    }
    let inner = simplest_positive(&(hi - &fl).recip(), &(lo - &fl).recip());
    fl + inner.recip()
}

impl fmt::Debug for UniPoly {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "UniPoly({})", self)
    }
}

impl fmt::Display for UniPoly {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let v = super::vars(&["t"]);
        write!(f, "{}", self.to_poly(&v, 0))
    }
}

#[cfg(test)]
mod tests {
    use super::super::{int, rat};
    use super::*;

    #[test]
    fn rational_roots_of_products() {
        // (2t - 3)(t + 1)^2 (t^2 - 2)
        let p =
            UniPoly::from_ints(&[-3, 2]).mul(&UniPoly::from_ints(&[1, 1]).pow(2)).mul(&UniPoly::from_ints(&[-2, 0, 1]));
        assert_eq!(p.rational_roots(), vec![int(-1), rat(3, 2)]);
        assert_eq!(p.real_roots().len(), 4);
    }

    #[test]
    fn rational_root_next_to_isolated_one() {
        // t (t^2 - t - 3): the interval of (1 + sqrt 13)/2 may start at 0
        let p = UniPoly::from_ints(&[0, -3, -1, 1]);
        assert_eq!(p.rational_roots(), vec![int(0)]);
        let q = UniPoly::from_ints(&[0, -3, -1, 1]).mul(&UniPoly::from_ints(&[2, 1]));
        assert_eq!(q.rational_roots(), vec![int(-2), int(0)]);
    }

    #[test]
    fn sqrt_two_isolation() {
        let p = UniPoly::from_ints(&[-2, 0, 1]);
        let roots = p.real_roots();
        let pos = roots.iter().find(|r| r.approx() > 0.0).unwrap();
        let fine = p.refine(pos, &Rational::new(1.into(), BigInt::from(10u64).pow(13)));
        match fine {
            RealRoot::Isolated { lo, hi } => {
                assert!(lo.to_f64().unwrap() <= 2f64.sqrt() && 2f64.sqrt() <= hi.to_f64().unwrap());
            }
            RealRoot::Exact(_) => panic!("irrational root reported exact"),
        }
    }

    #[test]
    fn simplest_rationals() {
        assert_eq!(simplest_between(&rat(3, 10), &rat(4, 10)), rat(1, 3));
        assert_eq!(simplest_between(&rat(-7, 3), &rat(-2, 1)), int(-2));
        assert_eq!(simplest_between(&rat(-1, 3), &rat(1, 7)), int(0));
    }

    #[test]
    fn complex_roots_of_cyclotomic() {
        let p = UniPoly::from_ints(&[1, 1, 1, 1, 1]);
        let roots = p.complex_roots();
        assert_eq!(roots.len(), 4);
        for z in roots {
            assert!((z.norm() - 1.0).abs() < 1e-12);
            assert!(p.eval_complex(z).norm() < 1e-12);
        }
    }
}
