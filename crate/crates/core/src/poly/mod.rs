//! Exact sparse multivariate polynomials over the rationals.
//!
//! Terms are kept sorted in descending graded-lexicographic order with
//! variable 0 the most significant, zero coefficients are never stored, and
//! two equal polynomials always have identical term vectors. Heavy arithmetic
//! (products, exact division) clears denominators and runs over `BigInt`.

pub mod gcd;
pub mod modp;
mod monomial;
mod parse;
pub mod ratfn;
pub mod resultant;
pub mod univariate;

use std::collections::{BTreeMap, HashMap};
use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};
use std::sync::Arc;

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};
use thiserror::Error;

pub use gcd::{gcd, gcd_prs, gcd_with_cofactors};
pub use monomial::{Monomial, MAX_EXPONENT, MAX_VARS};
pub use ratfn::RatFn;
pub use resultant::resultant;
pub use univariate::UniPoly;

/// Arbitrary-precision rational scalar, always kept in lowest terms with a
/// positive denominator.
pub type Rational = BigRational;

/// Shared, ordered list of variable names.
pub type Vars = Arc<[String]>;

pub fn vars(names: &[&str]) -> Vars {
    assert!(names.len() <= MAX_VARS, "at most {MAX_VARS} variables");
    names.iter().map(|s| s.to_string()).collect::<Vec<_>>().into()
}

pub fn rat(n: i64, d: i64) -> Rational {
    Rational::new(BigInt::from(n), BigInt::from(d))
}

pub fn int(n: i64) -> Rational {
    Rational::from_integer(BigInt::from(n))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Error)]
#[error("exact division failed: divisor does not divide the dividend")]
pub struct DivisionFailure;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum PolyError {
    #[error("operation undefined for the zero polynomial ({0})")]
    ZeroPolynomial(&'static str),
    #[error("expected a nonconstant polynomial ({0})")]
    ConstantPolynomial(&'static str),
    #[error("expected a polynomial in exactly two variables, found {0}")]
    NotBivariate(usize),
    #[error("point has {found} coordinates but the polynomial has {expected} variables")]
    PointArity { expected: usize, found: usize },
    #[error("parse error: {0}")]
    Parse(String),
    #[error("unknown variable `{0}`")]
    UnknownVariable(String),
}

#[derive(Clone, PartialEq, Eq, Hash)]
pub struct Poly {
    vars: Vars,
    terms: Vec<(Monomial, Rational)>,
}

impl Poly {
    pub fn zero(vars: &Vars) -> Self {
        Poly { vars: vars.clone(), terms: Vec::new() }
    }

    pub fn one(vars: &Vars) -> Self {
        Self::constant(vars, Rational::one())
    }

    pub fn constant(vars: &Vars, c: Rational) -> Self {
        let terms = if c.is_zero() { Vec::new() } else { vec![(Monomial::ONE, c)] };
        Poly { vars: vars.clone(), terms }
    }

    pub fn from_int(vars: &Vars, c: i64) -> Self {
        Self::constant(vars, int(c))
    }

    /// The polynomial consisting of variable `i`.
    pub fn var(vars: &Vars, i: usize) -> Self {
        assert!(i < vars.len());
        Poly { vars: vars.clone(), terms: vec![(Monomial::var(i, 1), Rational::one())] }
    }

    /// Builds a polynomial from arbitrary (possibly repeated, possibly zero) terms.
    pub fn from_terms<I>(vars: &Vars, terms: I) -> Self
    where
        I: IntoIterator<Item = (Monomial, Rational)>,
    {
        let mut map: BTreeMap<Monomial, Rational> = BTreeMap::new();
        for (m, c) in terms {
            *map.entry(m).or_insert_with(Rational::zero) += c;
        }
        let terms = map.into_iter().rev().filter(|(_, c)| !c.is_zero()).collect();
        Poly { vars: vars.clone(), terms }
    }

    pub fn from_exponent_terms(vars: &Vars, terms: &[(&[u32], Rational)]) -> Self {
        Self::from_terms(
            vars,
            terms.iter().map(|(e, c)| {
                assert_eq!(e.len(), vars.len(), "exponent vector length mismatch");
                (Monomial::from_exponents(e), c.clone())
            }),
        )
    }

    /// Parses an expression such as `x*y^2 + 2*x*y - 3` over the given variables.
    pub fn parse(vars: &Vars, text: &str) -> Result<Self, PolyError> {
        parse::parse(vars, text)
    }

    /// Shorthand used by the fixed curve catalogue; panics on malformed input.
    pub fn expr(vars: &Vars, text: &str) -> Self {
        Self::parse(vars, text).unwrap_or_else(|e| panic!("bad polynomial literal {text:?}: {e}"))
    }

    pub fn vars(&self) -> &Vars {
        &self.vars
    }

    pub fn nvars(&self) -> usize {
        self.vars.len()
    }

    pub fn var_index(&self, name: &str) -> Option<usize> {
        self.vars.iter().position(|v| v == name)
    }

    pub fn terms(&self) -> &[(Monomial, Rational)] {
        &self.terms
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn is_constant(&self) -> bool {
        self.terms.is_empty() || (self.terms.len() == 1 && self.terms[0].0.is_one())
    }

    /// The constant value if the polynomial is constant.
    pub fn constant_value(&self) -> Option<Rational> {
        match self.terms.as_slice() {
            [] => Some(Rational::zero()),
            [(m, c)] if m.is_one() => Some(c.clone()),
            _ => None,
        }
    }

    pub fn leading_term(&self) -> Option<&(Monomial, Rational)> {
        self.terms.first()
    }

    pub fn leading_coefficient(&self) -> Rational {
        self.terms.first().map(|t| t.1.clone()).unwrap_or_else(Rational::zero)
    }

    pub fn degree_in(&self, var: usize) -> u32 {
        self.terms.iter().map(|(m, _)| m.exponent(var)).max().unwrap_or(0)
    }

    pub fn total_degree(&self) -> u32 {
        self.terms.first().map(|(m, _)| m.total_degree()).unwrap_or(0)
    }

    pub fn max_exponents(&self) -> [u32; MAX_VARS] {
        let mut out = [0; MAX_VARS];
        for (m, _) in &self.terms {
            for (i, o) in out.iter_mut().enumerate().take(self.nvars()) {
                *o = (*o).max(m.exponent(i));
            }
        }
        out
    }

    /// Variables that actually occur.
    pub fn support_vars(&self) -> Vec<usize> {
        let maxe = self.max_exponents();
        (0..self.nvars()).filter(|&i| maxe[i] > 0).collect()
    }

    /// `(deg_x, deg_y)` for a polynomial in two variables.
    pub fn bidegree(&self) -> Result<(u32, u32), PolyError> {
        if self.nvars() != 2 {
            return Err(PolyError::NotBivariate(self.nvars()));
        }
        if self.is_zero() {
            return Err(PolyError::ZeroPolynomial("bidegree"));
        }
        Ok((self.degree_in(0), self.degree_in(1)))
    }

    fn check_same_vars(&self, other: &Poly) {
        assert!(
            Arc::ptr_eq(&self.vars, &other.vars) || self.vars == other.vars,
            "variable mismatch: {:?} vs {:?}",
            self.vars,
            other.vars
        );
    }

    pub fn eval(&self, point: &[Rational]) -> Rational {
        assert_eq!(point.len(), self.nvars(), "point arity");
        let mut powers: Vec<Vec<Rational>> = Vec::with_capacity(self.nvars());
        let maxe = self.max_exponents();
        for (i, x) in point.iter().enumerate() {
            let mut row = vec![Rational::one()];
            for k in 1..=maxe[i] as usize {
                let next = &row[k - 1] * x;
                row.push(next);
            }
            powers.push(row);
        }
        let mut acc = Rational::zero();
        for (m, c) in &self.terms {
            let mut t = c.clone();
            for (i, row) in powers.iter().enumerate() {
                let e = m.exponent(i) as usize;
                if e > 0 {
                    t *= &row[e];
                }
            }
            acc += t;
        }
        acc
    }

    pub fn eval_f64(&self, point: &[f64]) -> f64 {
        assert_eq!(point.len(), self.nvars(), "point arity");
        self.terms
            .iter()
            .map(|(m, c)| {
                let mut t = c.to_f64().unwrap_or(f64::NAN);
                for (i, x) in point.iter().enumerate() {
                    t *= x.powi(m.exponent(i) as i32);
                }
                t
            })
            .sum()
    }

    pub fn eval_complex(&self, point: &[num_complex::Complex64]) -> num_complex::Complex64 {
        assert_eq!(point.len(), self.nvars(), "point arity");
        self.terms
            .iter()
            .map(|(m, c)| {
                let mut t = num_complex::Complex64::new(c.to_f64().unwrap_or(f64::NAN), 0.0);
                for (i, x) in point.iter().enumerate() {
                    t *= x.powu(m.exponent(i));
                }
                t
            })
            .sum()
    }

    /// Sum of absolute term magnitudes at a complex point.
    pub fn eval_abs_complex(&self, point: &[num_complex::Complex64]) -> f64 {
        let abs: Vec<f64> = point.iter().map(|z| z.norm()).collect();
        self.eval_abs_f64(&abs)
    }

    /// Sum of absolute term magnitudes at `point`; a scale for relative residuals.
    pub fn eval_abs_f64(&self, point: &[f64]) -> f64 {
        self.terms
            .iter()
            .map(|(m, c)| {
                let mut t = c.to_f64().unwrap_or(f64::NAN).abs();
                for (i, x) in point.iter().enumerate() {
                    t *= x.abs().powi(m.exponent(i) as i32);
                }
                t
            })
            .sum()
    }

    pub fn derivative(&self, var: usize) -> Poly {
        let terms = self.terms.iter().filter_map(|(m, c)| {
            let e = m.exponent(var);
            (e > 0).then(|| (m.with_exponent(var, e - 1), c * int(e as i64)))
        });
        Poly::from_terms(&self.vars, terms)
    }

    pub fn scale(&self, c: &Rational) -> Poly {
        if c.is_zero() {
            return Poly::zero(&self.vars);
        }
        Poly { vars: self.vars.clone(), terms: self.terms.iter().map(|(m, a)| (*m, a * c)).collect() }
    }

    /// Multiplies by a monomial.
    pub fn shift_monomial(&self, m: Monomial) -> Poly {
        let maxe = self.max_exponents();
        for (i, &e) in maxe.iter().enumerate().take(self.nvars()) {
            assert!(e + m.exponent(i) <= MAX_EXPONENT, "exponent overflow");
        }
        Poly { vars: self.vars.clone(), terms: self.terms.iter().map(|(t, c)| (*t * m, c.clone())).collect() }
    }

    fn merge(&self, other: &Poly, negate_other: bool) -> Poly {
        self.check_same_vars(other);
        let mut out = Vec::with_capacity(self.terms.len() + other.terms.len());
        let (mut i, mut j) = (0, 0);
        let a = &self.terms;
        let b = &other.terms;
        while i < a.len() || j < b.len() {
            if j == b.len() || (i < a.len() && a[i].0 > b[j].0) {
                out.push(a[i].clone());
                i += 1;
            } else if i == a.len() || b[j].0 > a[i].0 {
                let c = if negate_other { -b[j].1.clone() } else { b[j].1.clone() };
                out.push((b[j].0, c));
                j += 1;
            } else {
                let c = if negate_other { &a[i].1 - &b[j].1 } else { &a[i].1 + &b[j].1 };
                if !c.is_zero() {
                    out.push((a[i].0, c));
                }
                i += 1;
                j += 1;
            }
        }
        Poly { vars: self.vars.clone(), terms: out }
    }

    /// Denominator-cleared form: `self = terms / lcm`, with `lcm > 0`.
    pub fn integer_terms(&self) -> (BigInt, Vec<(Monomial, BigInt)>) {
        let lcm = self.terms.iter().fold(BigInt::one(), |acc, (_, c)| acc.lcm(c.denom()));
        let terms = self.terms.iter().map(|(m, c)| (*m, c.numer() * (&lcm / c.denom()))).collect();
        (lcm, terms)
    }

    pub fn from_integer_terms(vars: &Vars, terms: Vec<(Monomial, BigInt)>, denom: &BigInt) -> Poly {
        let mut terms: Vec<(Monomial, Rational)> = terms
            .into_iter()
            .filter(|(_, c)| !c.is_zero())
            .map(|(m, c)| (m, Rational::new(c, denom.clone())))
            .collect();
        terms.sort_by_key(|t| std::cmp::Reverse(t.0));
        Poly { vars: vars.clone(), terms }
    }

    /// Splits `self = content * primitive` where `primitive` has coprime integer
    /// coefficients and a positive leading coefficient.
    pub fn integer_primitive(&self) -> (Rational, Poly) {
        if self.is_zero() {
            return (Rational::zero(), self.clone());
        }
        let (lcm, terms) = self.integer_terms();
        let mut g = terms.iter().fold(BigInt::zero(), |acc, (_, c)| acc.gcd(c));
        if terms[0].1.is_negative() {
            g = -g;
        }
        let prim_terms: Vec<(Monomial, Rational)> =
            terms.into_iter().map(|(m, c)| (m, Rational::from_integer(c / &g))).collect();
        (Rational::new(g, lcm), Poly { vars: self.vars.clone(), terms: prim_terms })
    }

    /// Primitive integer representative with positive leading coefficient.
    pub fn normalized(&self) -> Poly {
        self.integer_primitive().1
    }

    pub fn pow(&self, k: u32) -> Poly {
        let mut result = Poly::one(&self.vars);
        let mut base = self.clone();
        let mut k = k;
        while k > 0 {
            if k & 1 == 1 {
                result = &result * &base;
            }
            k >>= 1;
            if k > 0 {
                base = &base * &base;
            }
        }
        result
    }

    /// Returns `r` with `self = q * r`, or [`DivisionFailure`] if `q` does not
    /// divide `self` exactly.
    pub fn exact_divide(&self, q: &Poly) -> Result<Poly, DivisionFailure> {
        self.check_same_vars(q);
        assert!(!q.is_zero(), "exact_divide: divisor must be nonzero");
        if self.is_zero() {
            return Ok(self.clone());
        }
        if let Some(c) = q.constant_value() {
            return Ok(self.scale(&c.recip()));
        }
        let pe = self.max_exponents();
        let qe = q.max_exponents();
        if (0..self.nvars()).any(|i| qe[i] > pe[i]) {
            return Err(DivisionFailure);
        }
        // self = P / dp with P integral; q = cq * Q with Q primitive integral.
        // Gauss: Q | P over Q iff the quotient is integral.
        let (dp, p_int) = self.integer_terms();
        let (cq, q_prim) = q.integer_primitive();
        let q_int: Vec<(Monomial, BigInt)> = q_prim.terms.iter().map(|(m, c)| (*m, c.numer().clone())).collect();
        let quotient = int_exact_divide(p_int, &q_int).ok_or(DivisionFailure)?;
        let scale = (cq * Rational::from_integer(dp)).recip();
        let out = Poly::from_integer_terms(&self.vars, quotient, &BigInt::one());
        Ok(out.scale(&scale))
    }

    /// Largest `k` with `q^k | self`.
    pub fn vanishing_order(&self, q: &Poly) -> Result<u32, PolyError> {
        if self.is_zero() {
            return Err(PolyError::ZeroPolynomial("vanishing_order"));
        }
        if q.is_constant() {
            return Err(PolyError::ConstantPolynomial("vanishing_order"));
        }
        let mut k = 0;
        let mut cur = self.clone();
        while let Ok(next) = cur.exact_divide(q) {
            k += 1;
            cur = next;
        }
        Ok(k)
    }

    /// Lowest total degree of `self(point + t)`, i.e. the multiplicity of the
    /// hypersurface `self = 0` at `point` (zero when `self(point) != 0`).
    pub fn multiplicity_at_point(&self, point: &[Rational]) -> Result<u32, PolyError> {
        if self.is_zero() {
            return Err(PolyError::ZeroPolynomial("multiplicity_at_point"));
        }
        if point.len() != self.nvars() {
            return Err(PolyError::PointArity { expected: self.nvars(), found: point.len() });
        }
        let shifted = self.translate(point);
        Ok(shifted.terms.last().map(|(m, _)| m.total_degree()).unwrap_or(0))
    }

    /// `self(x + point)`.
    pub fn translate(&self, point: &[Rational]) -> Poly {
        let images: Vec<Poly> = (0..self.nvars())
            .map(|i| &Poly::var(&self.vars, i) + &Poly::constant(&self.vars, point[i].clone()))
            .collect();
        self.substitute(&images)
    }

    /// Substitutes polynomial `images[i]` for variable `i`. All images must
    /// share one variable list, which becomes the variable list of the result.
    pub fn substitute(&self, images: &[Poly]) -> Poly {
        assert_eq!(images.len(), self.nvars(), "one image per variable");
        let target = images.first().map(|p| p.vars.clone()).unwrap_or_else(|| self.vars.clone());
        let maxe = self.max_exponents();
        let tables: Vec<Vec<Poly>> = images
            .iter()
            .enumerate()
            .map(|(i, img)| {
                let mut row = vec![Poly::one(&target)];
                for k in 1..=maxe[i] as usize {
                    let next = &row[k - 1] * img;
                    row.push(next);
                }
                row
            })
            .collect();
        self.combine_tables(&tables, &target)
    }

    /// Evaluates `sum_m c_m prod_i tables[i][m_i]`, grouping terms by exponent
    /// prefix so that only one large product is formed per distinct prefix.
    pub fn combine_tables(&self, tables: &[Vec<Poly>], target: &Vars) -> Poly {
        assert_eq!(tables.len(), self.nvars());
        combine_rec(&self.terms, 0, tables, target)
    }

    /// Same polynomial over a renamed variable list of equal length.
    pub fn with_vars(&self, vars: &Vars) -> Poly {
        assert_eq!(vars.len(), self.nvars());
        Poly { vars: vars.clone(), terms: self.terms.clone() }
    }

    /// Re-indexes variables: variable `i` of `self` becomes variable `map[i]`
    /// of the new variable list.
    pub fn remap_vars(&self, vars: &Vars, map: &[usize]) -> Poly {
        assert_eq!(map.len(), self.nvars());
        let terms = self.terms.iter().map(|(m, c)| {
            let mut e = vec![0u32; vars.len()];
            for (i, &j) in map.iter().enumerate() {
                e[j] += m.exponent(i);
            }
            (Monomial::from_exponents(&e), c.clone())
        });
        Poly::from_terms(vars, terms)
    }

    /// Exchanges variables `i` and `j` (names stay in place).
    pub fn swap_vars(&self, i: usize, j: usize) -> Poly {
        let mut map: Vec<usize> = (0..self.nvars()).collect();
        map.swap(i, j);
        self.remap_vars(&self.vars, &map)
    }

    /// Coefficients with respect to `var`: `self = sum_k out[k] * var^k`,
    /// where each `out[k]` is free of `var`.
    pub fn coefficients_in(&self, var: usize) -> Vec<Poly> {
        let d = self.degree_in(var) as usize;
        let mut buckets: Vec<Vec<(Monomial, Rational)>> = vec![Vec::new(); d + 1];
        for (m, c) in &self.terms {
            buckets[m.exponent(var) as usize].push((m.with_exponent(var, 0), c.clone()));
        }
        buckets.into_iter().map(|b| Poly::from_terms(&self.vars, b)).collect()
    }

    pub fn from_coefficients_in(vars: &Vars, var: usize, coeffs: &[Poly]) -> Poly {
        let mut acc = Poly::zero(vars);
        for (k, c) in coeffs.iter().enumerate() {
            if !c.is_zero() {
                acc = &acc + &c.shift_monomial(Monomial::var(var, k as u32));
            }
        }
        acc
    }

    /// Explicit-exponent serialization, e.g. `x^2*y^1 - 6*x^1 + 6`.
    pub fn to_canonical_string(&self) -> String {
        self.render(true)
    }

    fn render(&self, explicit: bool) -> String {
        if self.terms.is_empty() {
            return "0".to_string();
        }
        let mut s = String::new();
        for (idx, (m, c)) in self.terms.iter().enumerate() {
            let neg = c.is_negative();
            let abs = c.abs();
            if idx == 0 {
                if neg {
                    s.push('-');
                }
            } else {
                s.push_str(if neg { " - " } else { " + " });
            }
            let mut factors: Vec<String> = Vec::new();
            if !abs.is_one() || m.is_one() {
                factors.push(abs.to_string());
            }
            for i in 0..self.nvars() {
                let e = m.exponent(i);
                if e == 0 {
                    continue;
                }
                if e == 1 && !explicit {
                    factors.push(self.vars[i].clone());
                } else {
                    factors.push(format!("{}^{}", self.vars[i], e));
                }
            }
            s.push_str(&factors.join("*"));
        }
        s
    }
}

fn combine_rec(terms: &[(Monomial, Rational)], var: usize, tables: &[Vec<Poly>], target: &Vars) -> Poly {
    if var == tables.len() {
        let c = terms.iter().fold(Rational::zero(), |acc, (_, c)| acc + c);
        return Poly::constant(target, c);
    }
    let mut groups: BTreeMap<u32, Vec<(Monomial, Rational)>> = BTreeMap::new();
    for (m, c) in terms {
        groups.entry(m.exponent(var)).or_default().push((*m, c.clone()));
    }
    let mut acc = Poly::zero(target);
    for (k, group) in groups {
        let inner = combine_rec(&group, var + 1, tables, target);
        let term = &tables[var][k as usize] * &inner;
        acc = &acc + &term;
    }
    acc
}

/// Exact division of integer polynomials; `None` if the quotient is not an
/// integer polynomial (equivalently, for primitive `q`, if `q` does not divide `p`).
fn int_exact_divide(p: Vec<(Monomial, BigInt)>, q: &[(Monomial, BigInt)]) -> Option<Vec<(Monomial, BigInt)>> {
    let (lm, lc) = q[0].clone();
    let mut rem: BTreeMap<Monomial, BigInt> = p.into_iter().collect();
    let mut quotient = Vec::new();
    while let Some((&m, c)) = rem.iter().next_back() {
        if !lm.divides(m) {
            return None;
        }
        let (t, r) = c.div_rem(&lc);
        if !r.is_zero() {
            return None;
        }
        let tm = m / lm;
        for (qm, qc) in q {
            let key = *qm * tm;
            let delta = &t * qc;
            match rem.get_mut(&key) {
                Some(v) => {
                    *v -= delta;
                    if v.is_zero() {
                        rem.remove(&key);
                    }
                }
                None => {
                    // a new term strictly above the running leading term would
                    // mean the division cannot terminate exactly
                    if key > m {
                        return None;
                    }
                    rem.insert(key, -delta);
                }
            }
        }
        quotient.push((tm, t));
    }
    Some(quotient)
}

/// Product of two integer term lists over `nvars` variables.
fn int_mul(a: &[(Monomial, BigInt)], b: &[(Monomial, BigInt)], nvars: usize) -> Vec<(Monomial, BigInt)> {
    let mut amax = [0u32; MAX_VARS];
    let mut bmax = [0u32; MAX_VARS];
    for (m, _) in a {
        for (i, v) in amax.iter_mut().enumerate().take(nvars) {
            *v = (*v).max(m.exponent(i));
        }
    }
    for (m, _) in b {
        for (i, v) in bmax.iter_mut().enumerate().take(nvars) {
            *v = (*v).max(m.exponent(i));
        }
    }
    for i in 0..nvars {
        assert!(amax[i] + bmax[i] <= MAX_EXPONENT, "exponent overflow in product");
    }
    let dims: Vec<usize> = (0..nvars).map(|i| (amax[i] + bmax[i] + 1) as usize).collect();
    let cells: usize = dims.iter().product();
    let pairs = a.len().saturating_mul(b.len());
    if cells <= (1 << 22) && cells <= pairs.saturating_mul(8) {
        let mut strides = vec![1usize; nvars];
        for i in (0..nvars.saturating_sub(1)).rev() {
            strides[i] = strides[i + 1] * dims[i + 1];
        }
        let index = |m: &Monomial| -> usize { (0..nvars).map(|i| m.exponent(i) as usize * strides[i]).sum() };
        let ai: Vec<usize> = a.iter().map(|(m, _)| index(m)).collect();
        let bi: Vec<usize> = b.iter().map(|(m, _)| index(m)).collect();
        let mut acc: Vec<BigInt> = vec![BigInt::zero(); cells];
        let mut mono: Vec<Monomial> = vec![Monomial::ONE; cells];
        for (x, (am, ac)) in a.iter().enumerate() {
            for (y, (bm, bc)) in b.iter().enumerate() {
                let k = ai[x] + bi[y];
                acc[k] += ac * bc;
                mono[k] = *am * *bm;
            }
        }
        acc.into_iter().zip(mono).filter(|(c, _)| !c.is_zero()).map(|(c, m)| (m, c)).collect()
    } else {
        let mut acc: HashMap<Monomial, BigInt> = HashMap::with_capacity(a.len().max(b.len()) * 4);
        for (am, ac) in a {
            for (bm, bc) in b {
                *acc.entry(*am * *bm).or_insert_with(BigInt::zero) += ac * bc;
            }
        }
        acc.into_iter().filter(|(_, c)| !c.is_zero()).collect()
    }
}

impl Add for &Poly {
    type Output = Poly;
    fn add(self, rhs: &Poly) -> Poly {
        self.merge(rhs, false)
    }
}

impl Sub for &Poly {
    type Output = Poly;
    fn sub(self, rhs: &Poly) -> Poly {
        self.merge(rhs, true)
    }
}

impl Neg for &Poly {
    type Output = Poly;
    fn neg(self) -> Poly {
        Poly { vars: self.vars.clone(), terms: self.terms.iter().map(|(m, c)| (*m, -c.clone())).collect() }
    }
}

impl Mul for &Poly {
    type Output = Poly;
    fn mul(self, rhs: &Poly) -> Poly {
        self.check_same_vars(rhs);
        if self.is_zero() || rhs.is_zero() {
            return Poly::zero(&self.vars);
        }
        if let Some(c) = self.constant_value() {
            return rhs.scale(&c);
        }
        if let Some(c) = rhs.constant_value() {
            return self.scale(&c);
        }
        let (da, ia) = self.integer_terms();
        let (db, ib) = rhs.integer_terms();
        let prod = int_mul(&ia, &ib, self.nvars());
        Poly::from_integer_terms(&self.vars, prod, &(da * db))
    }
}

macro_rules! forward_owned {
    ($tr:ident, $m:ident) => {
        impl $tr for Poly {
            type Output = Poly;
            fn $m(self, rhs: Poly) -> Poly {
                (&self).$m(&rhs)
            }
        }
        impl $tr<&Poly> for Poly {
            type Output = Poly;
            fn $m(self, rhs: &Poly) -> Poly {
                (&self).$m(rhs)
            }
        }
    };
}
forward_owned!(Add, add);
forward_owned!(Sub, sub);
forward_owned!(Mul, mul);

impl Neg for Poly {
    type Output = Poly;
    fn neg(self) -> Poly {
        -&self
    }
}

impl fmt::Display for Poly {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.render(false))
    }
}

impl fmt::Debug for Poly {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Poly[{}]({})", self.vars.join(","), self.render(false))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn xy() -> Vars {
        vars(&["x", "y"])
    }

    fn p(s: &str) -> Poly {
        Poly::expr(&xy(), s)
    }

    #[test]
    fn difference_of_squares_divides() {
        let q = p("x^2*y^2 - 1").exact_divide(&p("x*y - 1")).unwrap();
        assert_eq!(q, p("x*y + 1"));
    }

    #[test]
    fn degree_obstruction_fails() {
        assert_eq!(p("x*y - 1").exact_divide(&p("x + y")), Err(DivisionFailure));
    }

    #[test]
    fn heat_map_numerator_factor() {
        let n = p("(x*y^2 + 2*x*y - 3)*(x^2*y^2 - 6*x*y - x + 6)");
        let q = n.exact_divide(&p("x^2*y^2 - 6*x*y - x + 6")).unwrap();
        assert_eq!(q, p("x*y^2 + 2*x*y - 3"));
    }

    #[test]
    fn rational_coefficients_divide() {
        let a = p("1/2*x^2 - 1/8");
        let q = a.exact_divide(&p("3*x + 3/2")).unwrap();
        assert_eq!(&q * &p("3*x + 3/2"), a);
    }

    #[test]
    fn vanishing_orders() {
        let q = p("x*y - 1");
        let f = &q.pow(3) * &p("x + 1");
        assert_eq!(f.vanishing_order(&q).unwrap(), 3);
        assert_eq!(p("x + 1").vanishing_order(&q).unwrap(), 0);
        assert!(Poly::zero(&xy()).vanishing_order(&q).is_err());
        assert!(f.vanishing_order(&p("7")).is_err());
    }

    #[test]
    fn multiplicities() {
        assert_eq!(p("x*y - 1").multiplicity_at_point(&[int(1), int(1)]).unwrap(), 1);
        assert_eq!(p("2*x*y + x + y - 4").multiplicity_at_point(&[int(1), int(1)]).unwrap(), 1);
        let uy = vars(&["u", "y"]);
        let c3 = Poly::expr(&uy, "y^2 - 6*u*y - u^2*y + 6*u^2");
        assert_eq!(c3.multiplicity_at_point(&[int(0), int(0)]).unwrap(), 2);
        let c2 = Poly::expr(&uy, "2*y + 1 + u*y - 4*u");
        assert_eq!(c2.multiplicity_at_point(&[int(0), int(0)]).unwrap(), 0);
    }

    #[test]
    fn bidegrees() {
        assert_eq!(p("x*y^2 + 2*x*y - 3").bidegree().unwrap(), (1, 2));
        assert_eq!(p("5").bidegree().unwrap(), (0, 0));
        assert!(Poly::zero(&xy()).bidegree().is_err());
    }

    #[test]
    fn canonical_text_round_trips() {
        let f = p("-x^2*y + 1/3*x - y^3 + 7");
        assert_eq!(f.to_canonical_string(), "-x^2*y^1 - y^3 + 1/3*x^1 + 7");
        assert_eq!(Poly::parse(&xy(), &f.to_canonical_string()).unwrap(), f);
        assert_eq!(Poly::parse(&xy(), &f.to_string()).unwrap(), f);
    }

    #[test]
    fn substitution_and_translation() {
        let f = p("x^2 + y");
        let g = f.translate(&[int(1), int(-2)]);
        assert_eq!(g, p("x^2 + 2*x + 1 + y - 2"));
        let swapped = p("x^2*y - 3*y").swap_vars(0, 1);
        assert_eq!(swapped, p("x*y^2 - 3*x"));
    }

    #[test]
    fn coefficient_split_round_trips() {
        let f = p("x^2*y^3 - 2*x*y + y^2 - 5");
        let coeffs = f.coefficients_in(1);
        assert_eq!(coeffs.len(), 4);
        assert_eq!(Poly::from_coefficients_in(&xy(), 1, &coeffs), f);
    }
}
