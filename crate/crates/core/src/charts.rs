//! The heat map on the product of two projective lines and its chart atlas.
//!
//! A chart is an affine coordinate system together with birational maps to
//! and from the `(x, y)` chart. Besides the four standard charts of
//! `P1 x P1`, the atlas includes the coordinates on the blow-ups at
//! `p1 = (1, 1)`, `p2 = (inf, 0)` and `p3 = (0, inf)` so that every lift of the
//! map is obtained by the same substitute-and-reduce step.

use std::fmt;

use num_traits::Zero;
use serde::Serialize;
use thiserror::Error;

use crate::poly::ratfn::{compose_all, ComposeStats, RatFnError, RatValue};
use crate::poly::{vars, Poly, RatFn, Rational, Vars};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
pub enum Chart {
    /// `(x, y)`
    XY,
    /// `(u, y)` with `u = 1/x`
    UY,
    /// `(x, v)` with `v = 1/y`
    XV,
    /// `(u, v)`
    UV,
    /// `(a, m1)`: `x = 1 + a`, `y = 1 + a*m1`; exceptional divisor `E1 = {a = 0}`
    AM1,
    /// `(u, m2)`: `y = u*m2` in the `(u, y)` chart; `E2 = {u = 0}`
    UM2,
    /// `(v, m3)`: `x = v*m3` in the `(x, v)` chart; `E3 = {v = 0}`
    VM3,
    /// `(b, n1)`: `x = 1 + b*n1`, `y = 1 + b`; covers the direction `m1 = inf`
    BN1,
    /// `(w2, n2)`: `y = w2`, `u = w2*n2`; covers the direction `m2 = inf`
    WN2,
    /// `(w3, n3)`: `x = w3`, `v = w3*n3`; covers the direction `m3 = inf`
    WN3,
}

impl Chart {
    pub const BASE: [Chart; 4] = [Chart::XY, Chart::UY, Chart::XV, Chart::UV];

    pub fn var_names(self) -> [&'static str; 2] {
        match self {
            Chart::XY => ["x", "y"],
            Chart::UY => ["u", "y"],
            Chart::XV => ["x", "v"],
            Chart::UV => ["u", "v"],
            Chart::AM1 => ["a", "m1"],
            Chart::UM2 => ["u", "m2"],
            Chart::VM3 => ["v", "m3"],
            Chart::BN1 => ["b", "n1"],
            Chart::WN2 => ["w2", "n2"],
            Chart::WN3 => ["w3", "n3"],
        }
    }

    pub fn vars(self) -> Vars {
        vars(&self.var_names())
    }

    pub fn is_base(self) -> bool {
        Chart::BASE.contains(&self)
    }

    /// `(x, y)` as rational functions of this chart's coordinates.
    pub fn to_xy(self) -> [RatFn; 2] {
        let v = self.vars();
        let e = |s: &str| Poly::expr(&v, s);
        let f = |n: &str, d: &str| RatFn::new(e(n), e(d)).expect("nonzero literal denominator");
        match self {
            Chart::XY => [f("x", "1"), f("y", "1")],
            Chart::UY => [f("1", "u"), f("y", "1")],
            Chart::XV => [f("x", "1"), f("1", "v")],
            Chart::UV => [f("1", "u"), f("1", "v")],
            Chart::AM1 => [f("1 + a", "1"), f("1 + a*m1", "1")],
            Chart::UM2 => [f("1", "u"), f("u*m2", "1")],
            Chart::VM3 => [f("v*m3", "1"), f("1", "v")],
            Chart::BN1 => [f("1 + b*n1", "1"), f("1 + b", "1")],
            Chart::WN2 => [f("1", "w2*n2"), f("w2", "1")],
            Chart::WN3 => [f("w3", "1"), f("1", "w3*n3")],
        }
    }

    /// This chart's coordinates as rational functions of `(x, y)`.
    pub fn from_xy(self) -> [RatFn; 2] {
        let v = Chart::XY.vars();
        let e = |s: &str| Poly::expr(&v, s);
        let f = |n: &str, d: &str| RatFn::new(e(n), e(d)).expect("nonzero literal denominator");
        match self {
            Chart::XY => [f("x", "1"), f("y", "1")],
            Chart::UY => [f("1", "x"), f("y", "1")],
            Chart::XV => [f("x", "1"), f("1", "y")],
            Chart::UV => [f("1", "x"), f("1", "y")],
            Chart::AM1 => [f("x - 1", "1"), f("y - 1", "x - 1")],
            Chart::UM2 => [f("1", "x"), f("x*y", "1")],
            Chart::VM3 => [f("1", "y"), f("x*y", "1")],
            Chart::BN1 => [f("y - 1", "1"), f("x - 1", "y - 1")],
            Chart::WN2 => [f("y", "1"), f("1", "x*y")],
            Chart::WN3 => [f("x", "1"), f("1", "x*y")],
        }
    }
}

impl fmt::Display for Chart {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let [a, b] = self.var_names();
        write!(f, "({a},{b})")
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum MapError {
    #[error("chart mismatch: expected source {expected}, found {found}")]
    ChartMismatch { expected: Chart, found: Chart },
    #[error("composition is nowhere defined")]
    Degenerate(#[from] RatFnError),
    #[error("jacobian numerator has an unexplained factor: {0}")]
    NonconstantResidual(String),
    #[error("reflection symmetry requires a map from (x,y) or (u,v) to itself")]
    NotSymmetricChart,
}

/// A point of `P1`: an affine coordinate or the point at infinity.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum P1Value {
    Finite(Rational),
    Infinity,
}

impl P1Value {
    pub fn finite(&self) -> Option<&Rational> {
        match self {
            P1Value::Finite(r) => Some(r),
            P1Value::Infinity => None,
        }
    }

    /// The coordinate in the reciprocal chart.
    pub fn recip(&self) -> P1Value {
        match self {
            P1Value::Infinity => P1Value::Finite(Rational::zero()),
            P1Value::Finite(r) if r.is_zero() => P1Value::Infinity,
            P1Value::Finite(r) => P1Value::Finite(r.recip()),
        }
    }
}

impl fmt::Display for P1Value {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            P1Value::Finite(r) => write!(f, "{r}"),
            P1Value::Infinity => write!(f, "inf"),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum EvalResult {
    /// Both components finite in the target chart.
    Finite(Vec<Rational>),
    /// Component `component` has a pole; `image` gives both target
    /// coordinates as points of `P1`.
    Infinite { component: usize, image: [P1Value; 2] },
    /// Some component is `0/0` in every chart of the target.
    Indeterminate,
}

impl EvalResult {
    pub fn finite(&self) -> Option<&[Rational]> {
        match self {
            EvalResult::Finite(v) => Some(v),
            _ => None,
        }
    }

    /// Both coordinates as points of `P1`, if the value is determinate.
    pub fn p1_image(&self) -> Option<[P1Value; 2]> {
        match self {
            EvalResult::Finite(v) => Some([P1Value::Finite(v[0].clone()), P1Value::Finite(v[1].clone())]),
            EvalResult::Infinite { image, .. } => Some(image.clone()),
            EvalResult::Indeterminate => None,
        }
    }
}

/// A rational map between two charts, each component a reduced fraction.
#[derive(Clone, PartialEq, Eq)]
pub struct PlaneMap {
    pub source: Chart,
    pub target: Chart,
    pub comps: [RatFn; 2],
}

impl fmt::Debug for PlaneMap {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let [a, b] = self.target.var_names();
        write!(f, "PlaneMap {} -> {}: {a}' = {}, {b}' = {}", self.source, self.target, self.comps[0], self.comps[1])
    }
}

/// Polynomial catalogue in the `(x, y)` chart.
pub mod curves {
    use super::*;

    pub const C5_TEXT: &str = "x^6*y^6 - 10*x^5*y^5 - x^6*y^3 + 2*x^5*y^4 + 2*x^4*y^5 - x^3*y^6 \
        - 4*x^5*y^3 + 39*x^4*y^4 - 4*x^3*y^5 + 3*x^5*y^2 - 12*x^4*y^3 - 12*x^3*y^4 + 3*x^2*y^5 \
        + 10*x^4*y^2 - 47*x^3*y^3 + 10*x^2*y^4 - 3*x^4*y + 22*x^3*y^2 + 22*x^2*y^3 - 3*x*y^4 \
        - 12*x^3*y - 2*x^2*y^2 - 12*x*y^3 - 6*x^2*y - 6*x*y^2 + 9*x^2 + 21*x*y + 9*y^2 - 9*x - 9*y";

    pub fn xy(text: &str) -> Poly {
        Poly::expr(&Chart::XY.vars(), text)
    }

    /// Defining polynomial of `C_k`, `k` in `1..=7`.
    pub fn c(k: usize) -> Poly {
        xy(match k {
            1 => "x*y - 1",
            2 => "2*x*y + x + y - 4",
            3 => "x^2*y^2 - 6*x*y - y + 6",
            4 => "x^2*y^2 - 6*x*y - x + 6",
            5 => C5_TEXT,
            6 => "x*y^2 + 2*x*y - 3",
            7 => "x^2*y + 2*x*y - 3",
            _ => panic!("no curve C{k}"),
        })
    }

    /// The first denominator factor `x*y^2 + 4*x*y + x - y - 5`.
    pub fn h1() -> Poly {
        xy("x*y^2 + 4*x*y + x - y - 5")
    }

    /// The second denominator factor `x^2*y + 4*x*y - x + y - 5`.
    pub fn h2() -> Poly {
        xy("x^2*y + 4*x*y - x + y - 5")
    }
}

/// The heat map in the `(x, y)` chart.
pub fn heat_map_xy() -> PlaneMap {
    use curves::{c, h1, h2};
    let n1 = &c(6) * &c(4);
    let d1 = &h1() * &c(3);
    let n2 = &c(7) * &c(3);
    let d2 = &h2() * &c(4);
    PlaneMap {
        source: Chart::XY,
        target: Chart::XY,
        comps: [RatFn::new(n1, d1).expect("nonzero"), RatFn::new(n2, d2).expect("nonzero")],
    }
}

/// The heat map (or its lift to the blow-up) from `source` to `target`.
pub fn heat_map(source: Chart, target: Chart) -> PlaneMap {
    heat_map_xy().conjugate(source, target)
}

impl PlaneMap {
    pub fn new(source: Chart, target: Chart, comp1: RatFn, comp2: RatFn) -> Self {
        assert_eq!(comp1.vars(), &source.vars(), "component 1 must use source chart variables");
        assert_eq!(comp2.vars(), &source.vars(), "component 2 must use source chart variables");
        PlaneMap { source, target, comps: [comp1, comp2] }
    }

    pub fn identity(chart: Chart) -> Self {
        let v = chart.vars();
        PlaneMap { source: chart, target: chart, comps: [RatFn::var(&v, 0), RatFn::var(&v, 1)] }
    }

    /// Re-expresses a map given in `(x,y) -> (x,y)` coordinates in the chart
    /// pair `(source, target)`.
    pub fn conjugate(&self, source: Chart, target: Chart) -> PlaneMap {
        assert!(self.source == Chart::XY && self.target == Chart::XY, "conjugate expects an (x,y) map");
        let inner = if source == Chart::XY {
            self.comps.clone()
        } else {
            let c = compose_all(&self.comps, &source.to_xy()).expect("chart change of a dominant map");
            [c[0].0.clone(), c[1].0.clone()]
        };
        let comps = if target == Chart::XY {
            inner
        } else {
            let c = compose_all(&target.from_xy(), &inner).expect("chart change of a dominant map");
            [c[0].0.clone(), c[1].0.clone()]
        };
        PlaneMap { source, target, comps }
    }

    /// `self` after `g`, reduced, with unreduced bidegrees of each component.
    pub fn compose_with_stats(&self, g: &PlaneMap) -> Result<(PlaneMap, [ComposeStats; 2]), MapError> {
        if g.target != self.source {
            return Err(MapError::ChartMismatch { expected: self.source, found: g.target });
        }
        let mut c = compose_all(&self.comps, &g.comps)?;
        let (c2, s2) = c.pop().unwrap();
        let (c1, s1) = c.pop().unwrap();
        Ok((PlaneMap { source: g.source, target: self.target, comps: [c1, c2] }, [s1, s2]))
    }

    pub fn compose_reduce(&self, g: &PlaneMap) -> Result<PlaneMap, MapError> {
        Ok(self.compose_with_stats(g)?.0)
    }

    /// Bidegree of each component's numerator.
    pub fn numerator_bidegrees(&self) -> [(u32, u32); 2] {
        let b = |r: &RatFn| (r.num().degree_in(0), r.num().degree_in(1));
        [b(&self.comps[0]), b(&self.comps[1])]
    }

    /// Evaluates at a point of the source chart. A reduced component that is
    /// `0/0` stays `0/0` in the reciprocal chart, so it is indeterminate in
    /// every chart of the target.
    pub fn evaluate(&self, pt: &[Rational]) -> EvalResult {
        let vals = [self.comps[0].eval(pt), self.comps[1].eval(pt)];
        if let (RatValue::Finite(a), RatValue::Finite(b)) = (&vals[0], &vals[1]) {
            return EvalResult::Finite(vec![a.clone(), b.clone()]);
        }
        if vals.contains(&RatValue::Undetermined) {
            return EvalResult::Indeterminate;
        }
        let to_p1 = |v: &RatValue| match v {
            RatValue::Finite(r) => P1Value::Finite(r.clone()),
            _ => P1Value::Infinity,
        };
        let component = if vals[0] == RatValue::Infinite { 0 } else { 1 };
        EvalResult::Infinite { component, image: [to_p1(&vals[0]), to_p1(&vals[1])] }
    }

    /// Value as points of `P1 x P1` in `(x, y)` terms, for maps whose target
    /// is a base chart.
    pub fn evaluate_xy(&self, pt: &[Rational]) -> Option<[P1Value; 2]> {
        assert!(self.target.is_base());
        let img = self.evaluate(pt).p1_image()?;
        let [ix, iy] = img;
        Some(match self.target {
            Chart::XY => [ix, iy],
            Chart::UY => [ix.recip(), iy],
            Chart::XV => [ix, iy.recip()],
            _ => [ix.recip(), iy.recip()],
        })
    }

    pub fn evaluate_f64(&self, pt: &[f64]) -> [f64; 2] {
        [self.comps[0].eval_f64(pt), self.comps[1].eval_f64(pt)]
    }

    /// Numerator of the Jacobian determinant, reduced against its denominator.
    pub fn jacobian(&self) -> RatFn {
        let [f, g] = &self.comps;
        f.derivative(0).mul(&g.derivative(1)).sub(&f.derivative(1).mul(&g.derivative(0)))
    }

    /// Exponents of the critical curves `C1..C5` in the Jacobian determinant
    /// of an `(x,y)` map, and the residual of the `(x,y)` Jacobian numerator
    /// after dividing them out. The residual must be a constant times a
    /// product of denominator factors of the heat map.
    ///
    /// A curve lying in a pole of some component is invisible in the `(x,y)`
    /// Jacobian, so each exponent is read in the first base target chart
    /// where neither component has a pole along the curve.
    pub fn jacobian_critical_factors(&self) -> Result<CriticalFactors, MapError> {
        assert!(self.source == Chart::XY && self.target == Chart::XY);
        let jacs: Vec<(PlaneMap, RatFn)> = Chart::BASE
            .iter()
            .map(|&t| {
                let m = self.conjugate(Chart::XY, t);
                let j = m.jacobian();
                (m, j)
            })
            .collect();
        let mut factors = Vec::new();
        let mut residual = jacs[0].1.num().clone();
        for k in 1..=5 {
            let c = curves::c(k);
            let regular = jacs
                .iter()
                .find(|(m, _)| m.comps.iter().all(|r| r.den().vanishing_order(&c).expect("nonzero denominator") == 0));
            let Some((_, jac)) = regular else { continue };
            let e = jac.num().vanishing_order(&c).expect("nonzero jacobian");
            if e > 0 {
                factors.push((format!("C{k}"), c.clone(), e));
            }
            let here = residual.vanishing_order(&c).expect("nonzero jacobian");
            if here > 0 {
                residual = residual.exact_divide(&c.pow(here)).expect("order computed");
            }
        }
        let mut rest = residual.clone();
        let den_factors = [curves::h1(), curves::c(3), curves::h2(), curves::c(4)];
        for d in &den_factors {
            while !rest.is_constant() {
                match rest.exact_divide(d) {
                    Ok(q) => rest = q,
                    Err(_) => break,
                }
            }
        }
        if !rest.is_constant() {
            return Err(MapError::NonconstantResidual(rest.to_string()));
        }
        Ok(CriticalFactors { factors, residual })
    }

    /// Checks `R∘f = f∘R` for the coordinate swap `R`.
    pub fn check_reflection_symmetry(&self) -> Result<bool, MapError> {
        let ok = matches!((self.source, self.target), (Chart::XY, Chart::XY) | (Chart::UV, Chart::UV));
        if !ok {
            return Err(MapError::NotSymmetricChart);
        }
        let [f, g] = &self.comps;
        Ok(f.swap_vars(0, 1) == *g && g.swap_vars(0, 1) == *f)
    }
}

#[derive(Debug, Clone)]
pub struct CriticalFactors {
    /// `(label, defining polynomial, exponent)` for each curve with positive exponent.
    pub factors: Vec<(String, Poly, u32)>,
    /// Jacobian numerator with all critical-curve powers divided out.
    pub residual: Poly,
}

/// Transports a curve `{p = 0}` from the `(x, y)` chart to `chart`: the
/// numerator of `p` in the new coordinates (total transform for blow-up charts).
pub fn curve_in_chart(p: &Poly, chart: Chart) -> Poly {
    transport(p, Chart::XY, chart)
}

/// The equation of `{p = 0}`, given in chart `from`, in chart `to`.
pub fn transport(p: &Poly, from: Chart, to: Chart) -> Poly {
    if from == to {
        return p.normalized();
    }
    let from_coords: Vec<RatFn> = if from == Chart::XY {
        to.to_xy().to_vec()
    } else {
        compose_all(&from.from_xy(), &to.to_xy()).expect("chart transition").into_iter().map(|(f, _)| f).collect()
    };
    let f = RatFn::from_poly(p.clone());
    f.compose(&from_coords).expect("chart map").num().normalized()
}

/// Convenience constructor for exact rationals used by the CLI and tests.
pub fn point(coords: &[(i64, i64)]) -> Vec<Rational> {
    coords.iter().map(|&(n, d)| crate::poly::rat(n, d)).collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::poly::{int, rat};

    #[test]
    fn heat_map_numerators_in_charts() {
        let h = heat_map(Chart::XY, Chart::XY);
        assert_eq!(h.comps[0].num().normalized(), (&curves::c(6) * &curves::c(4)).normalized());
        let hu = heat_map(Chart::XY, Chart::UY);
        assert_eq!(hu.comps[0].num().normalized(), (&curves::h1() * &curves::c(3)).normalized());
        let hv = heat_map(Chart::XY, Chart::XV);
        assert_eq!(hv.comps[1], h.comps[1].recip().unwrap());
        assert_eq!(h.numerator_bidegrees(), [(3, 4), (4, 3)]);
    }

    #[test]
    fn point_values() {
        let h = heat_map_xy();
        assert_eq!(h.evaluate(&[int(0), int(0)]), EvalResult::Finite(vec![rat(3, 5), rat(3, 5)]));
        assert_eq!(h.evaluate(&[int(2), rat(1, 2)]), EvalResult::Finite(vec![int(1), int(1)]));
        assert_eq!(h.evaluate(&[int(1), int(1)]), EvalResult::Indeterminate);
        let hu = heat_map(Chart::XY, Chart::UY);
        assert_eq!(hu.evaluate(&[int(0), int(6)]), EvalResult::Finite(vec![int(0), int(0)]));
        assert_eq!(
            h.evaluate(&[int(0), int(6)]),
            EvalResult::Infinite { component: 0, image: [P1Value::Infinity, P1Value::Finite(int(0))] }
        );
    }

    #[test]
    fn symmetry() {
        assert!(heat_map_xy().check_reflection_symmetry().unwrap());
        assert!(heat_map(Chart::UV, Chart::UV).check_reflection_symmetry().unwrap());
        let v = Chart::XY.vars();
        let sq = PlaneMap::new(Chart::XY, Chart::XY, RatFn::from_poly(Poly::expr(&v, "x^2")), RatFn::var(&v, 1));
        assert!(!sq.check_reflection_symmetry().unwrap());
    }

    #[test]
    fn identity_composition_and_jacobian() {
        let h = heat_map_xy();
        let id = PlaneMap::identity(Chart::XY);
        assert_eq!(h.compose_reduce(&id).unwrap(), h);
        let cf = id.jacobian_critical_factors().unwrap();
        assert!(cf.factors.is_empty());
        assert!(cf.residual.is_constant());
    }

    #[test]
    fn heat_map_critical_curves() {
        let cf = heat_map_xy().jacobian_critical_factors().unwrap();
        let labels: Vec<&str> = cf.factors.iter().map(|f| f.0.as_str()).collect();
        assert_eq!(labels, ["C1", "C2", "C3", "C4", "C5"]);
        assert!(cf.factors.iter().all(|f| f.2 >= 1));
    }

    #[test]
    fn chart_round_trips() {
        let pt = [rat(2, 7), rat(-3, 5)];
        for chart in
            [Chart::UY, Chart::XV, Chart::UV, Chart::AM1, Chart::UM2, Chart::VM3, Chart::BN1, Chart::WN2, Chart::WN3]
        {
            let there: Vec<Rational> = chart
                .from_xy()
                .iter()
                .map(|f| match f.eval(&pt) {
                    RatValue::Finite(r) => r,
                    _ => panic!("chart {chart} undefined"),
                })
                .collect();
            let back: Vec<Rational> = chart
                .to_xy()
                .iter()
                .map(|f| match f.eval(&there) {
                    RatValue::Finite(r) => r,
                    _ => panic!("chart {chart} undefined"),
                })
                .collect();
            assert_eq!(back, pt.to_vec(), "chart {chart}");
        }
    }
}
