use std::collections::HashMap;
use std::fmt;

use num_traits::{One, Zero};
use thiserror::Error;

use super::gcd::gcd_with_cofactors;
use super::{Poly, Rational, Vars};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum RatFnError {
    #[error("zero denominator")]
    ZeroDenominator,
}

/// Value of a rational function at a point of its chart.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum RatValue {
    Finite(Rational),
    /// numerator nonzero, denominator zero
    Infinite,
    /// numerator and denominator both vanish
    Undetermined,
}

/// A reduced fraction `num / den`: coprime, `den` primitive with positive
/// leading coefficient (so the representation is canonical).
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct RatFn {
    num: Poly,
    den: Poly,
}

impl RatFn {
    pub fn new(num: Poly, den: Poly) -> Result<Self, RatFnError> {
        if den.is_zero() {
            return Err(RatFnError::ZeroDenominator);
        }
        let (_, n, d) = gcd_with_cofactors(&num, &den);
        Ok(Self::from_coprime(n, d))
    }

    /// Skips the gcd; the caller guarantees `num` and `den` are coprime.
    pub fn from_coprime(num: Poly, den: Poly) -> Self {
        assert!(!den.is_zero(), "zero denominator");
        if num.is_zero() {
            return RatFn { den: Poly::one(num.vars()), num };
        }
        let (c, d) = den.integer_primitive();
        RatFn { num: num.scale(&c.recip()), den: d }
    }

    pub fn from_poly(p: Poly) -> Self {
        let one = Poly::one(p.vars());
        RatFn { num: p, den: one }
    }

    pub fn constant(vars: &Vars, c: Rational) -> Self {
        Self::from_poly(Poly::constant(vars, c))
    }

    pub fn var(vars: &Vars, i: usize) -> Self {
        Self::from_poly(Poly::var(vars, i))
    }

    pub fn num(&self) -> &Poly {
        &self.num
    }

    pub fn den(&self) -> &Poly {
        &self.den
    }

    pub fn vars(&self) -> &Vars {
        self.num.vars()
    }

    pub fn is_constant(&self) -> bool {
        self.num.is_constant() && self.den.is_constant()
    }

    pub fn constant_value(&self) -> Option<Rational> {
        if self.den.is_constant() {
            Some(self.num.constant_value()? / self.den.constant_value()?)
        } else {
            None
        }
    }

    pub fn recip(&self) -> Result<Self, RatFnError> {
        if self.num.is_zero() {
            return Err(RatFnError::ZeroDenominator);
        }
        Ok(Self::from_coprime(self.den.clone(), self.num.clone()))
    }

    pub fn eval(&self, point: &[Rational]) -> RatValue {
        let n = self.num.eval(point);
        let d = self.den.eval(point);
        match (n.is_zero(), d.is_zero()) {
            (_, false) => RatValue::Finite(n / d),
            (false, true) => RatValue::Infinite,
            (true, true) => RatValue::Undetermined,
        }
    }

    pub fn eval_f64(&self, point: &[f64]) -> f64 {
        self.num.eval_f64(point) / self.den.eval_f64(point)
    }

    pub fn add(&self, other: &Self) -> Self {
        let n = &(&self.num * &other.den) + &(&other.num * &self.den);
        Self::new(n, &self.den * &other.den).expect("nonzero denominators")
    }

    pub fn sub(&self, other: &Self) -> Self {
        self.add(&other.neg())
    }

    pub fn neg(&self) -> Self {
        RatFn { num: -&self.num, den: self.den.clone() }
    }

    pub fn mul(&self, other: &Self) -> Self {
        Self::new(&self.num * &other.num, &self.den * &other.den).expect("nonzero denominators")
    }

    pub fn div(&self, other: &Self) -> Result<Self, RatFnError> {
        Ok(self.mul(&other.recip()?))
    }

    /// Partial derivative.
    pub fn derivative(&self, var: usize) -> Self {
        let n = &(&self.num.derivative(var) * &self.den) - &(&self.num * &self.den.derivative(var));
        Self::new(n, self.den.pow(2)).expect("nonzero denominator")
    }

    /// Substitutes `images[i]` for variable `i` and reduces.
    pub fn compose(&self, images: &[RatFn]) -> Result<Self, RatFnError> {
        Ok(compose_all(std::slice::from_ref(self), images)?.remove(0).0)
    }

    pub fn with_vars(&self, vars: &Vars) -> Self {
        RatFn { num: self.num.with_vars(vars), den: self.den.with_vars(vars) }
    }

    pub fn swap_vars(&self, i: usize, j: usize) -> Self {
        RatFn { num: self.num.swap_vars(i, j), den: self.den.swap_vars(i, j) }
    }
}

/// Bidegree data recorded before and after gcd cancellation.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ComposeStats {
    pub unreduced_num: (u32, u32),
    pub unreduced_den: (u32, u32),
}

/// Composes several rational functions with one shared substitution.
///
/// With `images[i] = f_i / g_i` and `A_i` the larger `var_i` degree of the
/// numerator and denominator of `p / q`, both are replaced by
/// `sum c_m prod_i f_i^{m_i} g_i^{A_i - m_i}`; the common factor
/// `prod g_i^{A_i}` cancels in the quotient. Power tables are shared between
/// functions needing the same `A_i`.
pub fn compose_all(fns: &[RatFn], images: &[RatFn]) -> Result<Vec<(RatFn, ComposeStats)>, RatFnError> {
    assert!(!fns.is_empty());
    let nv = fns[0].vars().len();
    assert_eq!(images.len(), nv, "one image per source variable");
    let target = images[0].vars().clone();
    let mut cache: HashMap<(usize, u32), Vec<Poly>> = HashMap::new();
    let bideg = |p: &Poly| -> (u32, u32) {
        if p.nvars() >= 2 {
            (p.degree_in(0), p.degree_in(1))
        } else {
            (p.degree_in(0), 0)
        }
    };
    let mut out = Vec::with_capacity(fns.len());
    for f in fns {
        let tables: Vec<Vec<Poly>> = (0..nv)
            .map(|i| {
                let a = f.num.degree_in(i).max(f.den.degree_in(i));
                cache.entry((i, a)).or_insert_with(|| power_table(images[i].num(), images[i].den(), a)).clone()
            })
            .collect();
        let n = f.num.combine_tables(&tables, &target);
        let d = f.den.combine_tables(&tables, &target);
        if d.is_zero() {
            return Err(RatFnError::ZeroDenominator);
        }
        let stats = ComposeStats { unreduced_num: bideg(&n), unreduced_den: bideg(&d) };
        out.push((RatFn::new(n, d)?, stats));
    }
    Ok(out)
}

/// `[f^k g^(a-k)]` for `k = 0..=a`.
fn power_table(f: &Poly, g: &Poly, a: u32) -> Vec<Poly> {
    let a = a as usize;
    let mut fp = vec![Poly::one(f.vars())];
    let mut gp = vec![Poly::one(f.vars())];
    for k in 1..=a {
        let nf = &fp[k - 1] * f;
        fp.push(nf);
        let ng = &gp[k - 1] * g;
        gp.push(ng);
    }
    (0..=a).map(|k| &fp[k] * &gp[a - k]).collect()
}

impl fmt::Display for RatFn {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.den.constant_value().is_some_and(|c| c.is_one()) {
            write!(f, "{}", self.num)
        } else {
            write!(f, "({}) / ({})", self.num, self.den)
        }
    }
}

impl fmt::Debug for RatFn {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "RatFn[{}]({})", self.vars().join(","), self)
    }
}

#[cfg(test)]
mod tests {
    use super::super::{int, rat, vars};
    use super::*;

    fn p(s: &str) -> Poly {
        Poly::expr(&vars(&["x", "y"]), s)
    }

    #[test]
    fn reduction_is_canonical() {
        let a = RatFn::new(p("2*(x*y - 1)*(x + 1)"), p("-4*(x*y - 1)*(y + 2)")).unwrap();
        assert_eq!(a.num(), &p("-1/2*x - 1/2"));
        assert_eq!(a.den(), &p("y + 2"));
        assert!(RatFn::new(p("x"), p("0")).is_err());
    }

    #[test]
    fn evaluation_outcomes() {
        let f = RatFn::new(p("x - 1"), p("y")).unwrap();
        assert_eq!(f.eval(&[int(3), int(2)]), RatValue::Finite(int(1)));
        assert_eq!(f.eval(&[int(3), int(0)]), RatValue::Infinite);
        assert_eq!(f.eval(&[int(1), int(0)]), RatValue::Undetermined);
    }

    #[test]
    fn composition_matches_pointwise() {
        let v = vars(&["x", "y"]);
        let f = RatFn::new(p("x^2 + y"), p("x - y")).unwrap();
        let g1 = RatFn::new(p("y + 1"), p("x")).unwrap();
        let g2 = RatFn::new(p("x*y"), p("1")).unwrap();
        let h = f.compose(&[g1.clone(), g2.clone()]).unwrap();
        let pt = [rat(2, 3), rat(-5, 7)];
        let RatValue::Finite(a) = g1.eval(&pt) else { panic!() };
        let RatValue::Finite(b) = g2.eval(&pt) else { panic!() };
        assert_eq!(h.eval(&pt), f.eval(&[a, b]));
        assert_eq!(h.vars(), &v);
    }
}
