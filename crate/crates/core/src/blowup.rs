//! The surface obtained from `P1 x P1` by blowing up `p1 = (1, 1)`,
//! `p2 = (inf, 0)` and `p3 = (0, inf)`, together with the lifted heat map,
//! collapse tests and indeterminacy detection.
//!
//! Every lift is computed by the same substitute-and-reduce step as the
//! base map (see [`crate::charts`]); the exceptional coordinate is always
//! variable 0 of an exceptional chart.

use std::fmt;

use num_complex::Complex64;
use num_traits::Zero;
use rayon::prelude::*;
use serde::Serialize;
use thiserror::Error;

use crate::charts::{curves, heat_map, Chart, EvalResult, MapError, P1Value, PlaneMap};
use crate::poly::univariate::UniPoly;
use crate::poly::{gcd, int, rat, resultant, Poly, RatFn, Rational};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
pub enum Exceptional {
    E1,
    E2,
    E3,
}

impl Exceptional {
    pub const ALL: [Exceptional; 3] = [Exceptional::E1, Exceptional::E2, Exceptional::E3];

    pub fn index(self) -> usize {
        self as usize
    }

    /// The chart covering all of the divisor but one point.
    pub fn chart(self) -> Chart {
        match self {
            Exceptional::E1 => Chart::AM1,
            Exceptional::E2 => Chart::UM2,
            Exceptional::E3 => Chart::VM3,
        }
    }

    /// The chart covering the point that [`Exceptional::chart`] misses.
    pub fn complementary_chart(self) -> Chart {
        match self {
            Exceptional::E1 => Chart::BN1,
            Exceptional::E2 => Chart::WN2,
            Exceptional::E3 => Chart::WN3,
        }
    }

    /// Base chart centered at the blown-up point, with its coordinates there.
    pub fn center(self) -> (Chart, [Rational; 2]) {
        match self {
            Exceptional::E1 => (Chart::XY, [int(1), int(1)]),
            Exceptional::E2 => (Chart::UY, [int(0), int(0)]),
            Exceptional::E3 => (Chart::XV, [int(0), int(0)]),
        }
    }

    /// The blown-up point in `(x, y)` terms.
    pub fn center_xy(self) -> [P1Value; 2] {
        match self {
            Exceptional::E1 => [P1Value::Finite(int(1)), P1Value::Finite(int(1))],
            Exceptional::E2 => [P1Value::Infinity, P1Value::Finite(int(0))],
            Exceptional::E3 => [P1Value::Finite(int(0)), P1Value::Infinity],
        }
    }

    pub fn from_center(pt: &[P1Value; 2]) -> Option<Exceptional> {
        Exceptional::ALL.into_iter().find(|e| e.center_xy() == *pt)
    }
}

impl fmt::Display for Exceptional {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "E{}", self.index() + 1)
    }
}

#[derive(Debug, Error)]
pub enum BlowupError {
    #[error("curve {0} has the zero polynomial as defining equation")]
    ZeroCurve(String),
    #[error("curve {label} lives in chart {found}, but the map starts in {expected}")]
    ChartMismatch { label: String, expected: Chart, found: Chart },
    #[error("curve {0} lies in the indeterminacy locus")]
    CurveInIndeterminacy(String),
    #[error("the image of {label} is not visible in the target chart {chart}")]
    OutsideChart { label: String, chart: Chart },
    #[error("no pair of points of {0} with distinct images was found within the search budget")]
    WitnessSearchFailed(String),
    #[error("restriction of the map to {0} is constant")]
    ConstantRestriction(String),
    #[error("collapse of {label} to {image} failed re-verification at {point}")]
    VerificationFailed { label: String, image: String, point: String },
    #[error("numeric root isolation could not separate candidate points of {0}")]
    UnresolvedCluster(String),
    #[error(transparent)]
    Map(#[from] MapError),
}

/// A curve on the blown-up surface given by its equation in one chart.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CurveOnSurface {
    pub label: String,
    pub chart: Chart,
    pub poly: Poly,
    /// True when the curve stands for a proper transform: its equation in a
    /// blow-up chart carries no power of the exceptional coordinate.
    pub proper: bool,
}

impl CurveOnSurface {
    pub fn new(label: &str, chart: Chart, poly: Poly, proper: bool) -> Result<Self, BlowupError> {
        if poly.is_zero() {
            return Err(BlowupError::ZeroCurve(label.to_string()));
        }
        assert_eq!(poly.vars(), &chart.vars(), "curve equation must use the chart variables");
        Ok(CurveOnSurface { label: label.to_string(), chart, poly: poly.normalized(), proper })
    }

    /// A curve of `P1 x P1` given in `(x, y)`, seen as a curve on the base.
    pub fn base_curve(label: &str, p: Poly) -> Result<Self, BlowupError> {
        Self::new(label, Chart::XY, p, false)
    }

    /// The proper transform of `{p = 0}` with `p` in `(x, y)`.
    pub fn proper_transform(label: &str, p: Poly) -> Result<Self, BlowupError> {
        Self::new(label, Chart::XY, p, true)
    }

    /// `C_k` (base) or its proper transform.
    pub fn critical(k: usize, proper: bool) -> Self {
        let label = if proper { format!("C{k}~") } else { format!("C{k}") };
        Self::new(&label, Chart::XY, curves::c(k), proper).expect("catalogued curve")
    }

    pub fn exceptional(e: Exceptional) -> Self {
        let chart = e.chart();
        Self::new(&e.to_string(), chart, Poly::var(&chart.vars(), 0), false).expect("coordinate line")
    }

    /// Equation in another chart. For a proper transform in a blow-up chart
    /// every power of the exceptional coordinate is divided out.
    pub fn in_chart(&self, chart: Chart) -> Poly {
        assert_eq!(self.chart, Chart::XY, "transport starts from the (x,y) chart");
        let q = crate::charts::curve_in_chart(&self.poly, chart);
        if self.proper && !chart.is_base() {
            strip_var_power(&q, 0).normalized()
        } else {
            q
        }
    }
}

/// `p / var^k` with `k` the lowest exponent of `var` in `p`.
pub fn strip_var_power(p: &Poly, var: usize) -> Poly {
    let k = p.terms().iter().map(|(m, _)| m.exponent(var)).min().unwrap_or(0);
    if k == 0 {
        return p.clone();
    }
    let v = Poly::var(p.vars(), var).pow(k);
    p.exact_divide(&v).expect("monomial divides every term")
}

/// A map component restricted to a curve: a function of the parameter, or
/// identically infinite.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Restricted {
    Function(RatFn),
    Infinity,
}

impl Restricted {
    pub fn constant(&self) -> Option<P1Value> {
        match self {
            Restricted::Infinity => Some(P1Value::Infinity),
            Restricted::Function(f) => f.constant_value().map(P1Value::Finite),
        }
    }
}

impl fmt::Display for Restricted {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Restricted::Function(r) => write!(f, "{r}"),
            Restricted::Infinity => write!(f, "inf"),
        }
    }
}

/// Both components of a map restricted to a curve parametrized by one of the
/// source coordinates.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Restriction {
    /// Name of the source coordinate serving as parameter.
    pub param: String,
    pub comps: [Restricted; 2],
}

/// Two points of a curve together with their images.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Witness {
    pub point: Vec<Rational>,
    pub image: [P1Value; 2],
}

// one verdict per curve, so the size gap costs nothing
#[allow(clippy::large_enum_variant)]
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum CollapseVerdict {
    /// Image point in the target chart (a point of `P1 x P1` for base targets).
    Collapsed {
        image: [P1Value; 2],
    },
    NotCollapsed {
        witnesses: Option<[Witness; 2]>,
        restriction: Option<Restriction>,
    },
}

impl CollapseVerdict {
    pub fn is_collapsed(&self) -> bool {
        matches!(self, CollapseVerdict::Collapsed { .. })
    }
}

/// The lifted map in the requested chart pair.
pub fn lift_map(source: Chart, target: Chart) -> PlaneMap {
    heat_map(source, target)
}

/// Small-height rationals: 0, 1, -1, 2, -2, 1/2, -1/2, 3, ...
pub fn small_rationals(max_height: i64) -> Vec<Rational> {
    let mut out = vec![int(0)];
    for h in 1..=max_height {
        for q in 1..=h {
            for p in [h, -h] {
                if q == h && p.abs() != h {
                    continue;
                }
                if num_integer::gcd(p, q) == 1 {
                    out.push(rat(p, q));
                }
            }
        }
        for p in 1..h {
            for s in [p, -p] {
                if num_integer::gcd(p, h) == 1 {
                    out.push(rat(s, h));
                }
            }
        }
    }
    out
}

const WITNESS_HEIGHT: i64 = 12;
const VERIFY_SAMPLES: usize = 10;

/// Parametrization `v = -B(t) / A(t)` of a curve `A(t) v + B(t) = 0` linear
/// in `v`; `None` when the curve is not of that shape or `A, B` share a factor.
struct LinearParam {
    solved: usize,
    a: Poly,
    b: Poly,
}

impl LinearParam {
    fn find(p: &Poly) -> Option<LinearParam> {
        [1, 0].into_iter().find_map(|solved| {
            if p.degree_in(solved) != 1 {
                return None;
            }
            let c = p.coefficients_in(solved);
            let (b, a) = (c[0].clone(), c[1].clone());
            if !b.is_zero() && !gcd(&a, &b).is_constant() {
                return None;
            }
            Some(LinearParam { solved, a, b })
        })
    }

    fn param(&self) -> usize {
        1 - self.solved
    }

    /// Images of the source variables as rational functions of the parameter.
    fn images(&self, vars: &crate::poly::Vars) -> [RatFn; 2] {
        let t = RatFn::var(vars, self.param());
        let v = RatFn::new(-&self.b, self.a.clone()).expect("nonzero leading coefficient");
        if self.solved == 1 {
            [t, v]
        } else {
            [v, t]
        }
    }

    fn point(&self, t: &Rational) -> Option<Vec<Rational>> {
        let mut probe = vec![Rational::zero(), Rational::zero()];
        probe[self.param()] = t.clone();
        let a = self.a.eval(&probe);
        if a.is_zero() {
            return None;
        }
        probe[self.solved] = -self.b.eval(&probe) / a;
        Some(probe)
    }
}

fn restrict(f: &RatFn, images: &[RatFn; 2], label: &str) -> Result<Restricted, BlowupError> {
    let n = RatFn::from_poly(f.num().clone()).compose(images).map_err(MapError::from)?;
    let d = RatFn::from_poly(f.den().clone()).compose(images).map_err(MapError::from)?;
    match (n.num().is_zero(), d.num().is_zero()) {
        (true, true) => Err(BlowupError::CurveInIndeterminacy(label.to_string())),
        (false, true) => Ok(Restricted::Infinity),
        _ => Ok(Restricted::Function(n.div(&d).expect("nonzero denominator"))),
    }
}

/// Image of a witness point usable for comparisons in the target chart, or
/// `None` if the map is indeterminate there or the image leaves a blow-up chart.
fn witness_image(map: &PlaneMap, pt: &[Rational]) -> Option<[P1Value; 2]> {
    match map.evaluate(pt) {
        EvalResult::Indeterminate => None,
        EvalResult::Finite(v) => Some([P1Value::Finite(v[0].clone()), P1Value::Finite(v[1].clone())]),
        EvalResult::Infinite { image, .. } => map.target.is_base().then_some(image),
    }
}

/// Rational points of `{p = 0}` found by fixing one coordinate at
/// small-height rationals and collecting rational roots in the other.
struct PointSearch<'a> {
    p: &'a Poly,
    ts: Vec<Rational>,
    pass: usize,
    idx: usize,
    pending: Vec<Vec<Rational>>,
}

impl<'a> PointSearch<'a> {
    fn new(p: &'a Poly) -> Self {
        PointSearch { p, ts: small_rationals(WITNESS_HEIGHT), pass: 0, idx: 0, pending: Vec::new() }
    }
}

impl Iterator for PointSearch<'_> {
    type Item = Vec<Rational>;

    fn next(&mut self) -> Option<Vec<Rational>> {
        loop {
            if let Some(pt) = self.pending.pop() {
                return Some(pt);
            }
            if self.idx == self.ts.len() {
                if self.pass == 1 {
                    return None;
                }
                self.pass = 1;
                self.idx = 0;
            }
            let t = self.ts[self.idx].clone();
            self.idx += 1;
            let fixed = self.pass;
            let free = 1 - fixed;
            let vars = self.p.vars().clone();
            let mut images = [Poly::var(&vars, 0), Poly::var(&vars, 1)];
            images[fixed] = Poly::constant(&vars, t.clone());
            let slice = self.p.substitute(&images);
            if slice.is_zero() {
                continue;
            }
            let Some(uni) = UniPoly::from_poly(&slice, free) else { continue };
            for r in uni.rational_roots().into_iter().rev() {
                let mut pt = vec![Rational::zero(), Rational::zero()];
                pt[fixed] = t.clone();
                pt[free] = r;
                self.pending.push(pt);
            }
        }
    }
}

fn render_point(pt: &[Rational]) -> String {
    let parts: Vec<String> = pt.iter().map(|c| c.to_string()).collect();
    format!("({})", parts.join(","))
}

fn render_image(img: &[P1Value; 2]) -> String {
    format!("({},{})", img[0], img[1])
}

/// Decides whether `map` collapses `curve` to a point of its target chart.
///
/// Curves linear in one coordinate are parametrized and the restriction is
/// computed symbolically. Other curves are sampled at rational points; a
/// collapse candidate `c` is certified by `p | N - c D` for each component
/// `N / D`, and a non-collapse by two points with distinct images.
pub fn collapse_test(curve: &CurveOnSurface, map: &PlaneMap) -> Result<CollapseVerdict, BlowupError> {
    if curve.chart != map.source {
        return Err(BlowupError::ChartMismatch {
            label: curve.label.clone(),
            expected: map.source,
            found: curve.chart,
        });
    }
    if let Some(lp) = LinearParam::find(&curve.poly) {
        return collapse_linear(curve, map, &lp);
    }
    collapse_by_points(curve, map)
}

fn collapse_linear(curve: &CurveOnSurface, map: &PlaneMap, lp: &LinearParam) -> Result<CollapseVerdict, BlowupError> {
    let vars = curve.chart.vars();
    let images = lp.images(&vars);
    let comps = [restrict(&map.comps[0], &images, &curve.label)?, restrict(&map.comps[1], &images, &curve.label)?];
    let restriction = Restriction { param: vars[lp.param()].clone(), comps };
    let samples = small_rationals(WITNESS_HEIGHT);
    let points = samples.iter().filter_map(|t| lp.point(t));
    if let (Some(a), Some(b)) = (restriction.comps[0].constant(), restriction.comps[1].constant()) {
        let image = [a, b];
        if !map.target.is_base() && image.contains(&P1Value::Infinity) {
            return Err(BlowupError::OutsideChart { label: curve.label.clone(), chart: map.target });
        }
        let mut checked = 0;
        for pt in points {
            match map.evaluate(&pt) {
                EvalResult::Indeterminate => continue,
                r => {
                    if r.p1_image().as_ref() != Some(&image) {
                        return Err(BlowupError::VerificationFailed {
                            label: curve.label.clone(),
                            image: render_image(&image),
                            point: render_point(&pt),
                        });
                    }
                    checked += 1;
                }
            }
            if checked == VERIFY_SAMPLES {
                break;
            }
        }
        return Ok(CollapseVerdict::Collapsed { image });
    }
    let witnesses = distinct_pair(map, points);
    if witnesses.is_none() {
        return Err(BlowupError::WitnessSearchFailed(curve.label.clone()));
    }
    Ok(CollapseVerdict::NotCollapsed { witnesses, restriction: Some(restriction) })
}

fn distinct_pair(map: &PlaneMap, points: impl Iterator<Item = Vec<Rational>>) -> Option<[Witness; 2]> {
    let mut first: Option<Witness> = None;
    for pt in points {
        let Some(image) = witness_image(map, &pt) else { continue };
        match &first {
            None => first = Some(Witness { point: pt, image }),
            Some(w) if w.image != image => return Some([w.clone(), Witness { point: pt, image }]),
            Some(_) => {}
        }
    }
    None
}

fn collapse_by_points(curve: &CurveOnSurface, map: &PlaneMap) -> Result<CollapseVerdict, BlowupError> {
    let mut search = PointSearch::new(&curve.poly);
    let first = loop {
        let Some(pt) = search.next() else {
            return Err(BlowupError::WitnessSearchFailed(curve.label.clone()));
        };
        if let Some(image) = witness_image(map, &pt) {
            break Witness { point: pt, image };
        }
    };
    let holds = |k: usize| -> bool {
        let f = &map.comps[k];
        let target = match &first.image[k] {
            P1Value::Infinity => f.den().clone(),
            P1Value::Finite(c) => f.num() - &f.den().scale(c),
        };
        target.is_zero() || target.exact_divide(&curve.poly).is_ok()
    };
    if holds(0) && holds(1) {
        return Ok(CollapseVerdict::Collapsed { image: first.image });
    }
    for pt in search {
        let Some(image) = witness_image(map, &pt) else { continue };
        if image != first.image {
            return Ok(CollapseVerdict::NotCollapsed {
                witnesses: Some([first, Witness { point: pt, image }]),
                restriction: None,
            });
        }
    }
    Err(BlowupError::WitnessSearchFailed(curve.label.clone()))
}

/// Restriction of the lifted map to an exceptional divisor, with `(x, y)`
/// coordinates in the target.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ExceptionalImage {
    pub divisor: Exceptional,
    pub restriction: Restriction,
}

pub fn exceptional_image(e: Exceptional) -> Result<ExceptionalImage, BlowupError> {
    let map = lift_map(e.chart(), Chart::XY);
    let curve = CurveOnSurface::exceptional(e);
    let lp = LinearParam::find(&curve.poly).expect("coordinate line");
    let images = lp.images(&curve.chart.vars());
    let comps = [restrict(&map.comps[0], &images, &curve.label)?, restrict(&map.comps[1], &images, &curve.label)?];
    if comps.iter().all(|c| c.constant().is_some()) {
        return Err(BlowupError::ConstantRestriction(curve.label));
    }
    let param = curve.chart.vars()[lp.param()].clone();
    Ok(ExceptionalImage { divisor: e, restriction: Restriction { param, comps } })
}

/// Incidence of a curve's image with an exceptional divisor.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct DivisorIncidence {
    pub divisor: Exceptional,
    /// Order of the curve's equation in the numerator of the coordinate
    /// defining the divisor; zero when the image misses the divisor.
    pub multiplicity: u32,
}

impl DivisorIncidence {
    /// With a non-collapse verdict and irreducibility of the divisor, a
    /// positive multiplicity means the curve maps onto the divisor.
    pub fn divides(&self) -> bool {
        self.multiplicity > 0
    }
}

/// Order of a proper transform, given in `(x, y)`, in the numerator of the
/// exceptional coordinate of the lifted map into `e`'s chart.
pub fn maps_onto_divisor(curve: &CurveOnSurface, e: Exceptional) -> Result<DivisorIncidence, BlowupError> {
    let map = lift_map(curve.chart, e.chart());
    let num = map.comps[0].num();
    let multiplicity = if num.is_zero() {
        0
    } else {
        num.vanishing_order(&curve.poly).map_err(|_| BlowupError::ZeroCurve(curve.label.clone()))?
    };
    Ok(DivisorIncidence { divisor: e, multiplicity })
}

/// A coordinate of an indeterminacy point.
#[derive(Debug, Clone, PartialEq)]
pub enum Coord {
    Exact(Rational),
    /// A root of `poly` (squarefree, without rational roots), numerically `approx`.
    Algebraic {
        poly: UniPoly,
        approx: Complex64,
    },
}

impl Coord {
    pub fn approx(&self) -> Complex64 {
        match self {
            Coord::Exact(r) => Complex64::new(num_traits::ToPrimitive::to_f64(r).unwrap_or(f64::NAN), 0.0),
            Coord::Algebraic { approx, .. } => *approx,
        }
    }

    pub fn exact(&self) -> Option<&Rational> {
        match self {
            Coord::Exact(r) => Some(r),
            Coord::Algebraic { .. } => None,
        }
    }
}

impl fmt::Display for Coord {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Coord::Exact(r) => write!(f, "{r}"),
            Coord::Algebraic { poly, approx } => {
                if approx.im.abs() < 1e-12 {
                    write!(f, "{:.12} [root of {}]", approx.re, poly)
                } else {
                    write!(f, "{:.12}{:+.12}i [root of {}]", approx.re, approx.im, poly)
                }
            }
        }
    }
}

/// A point where some component of a reduced map is `0/0`.
#[derive(Debug, Clone, PartialEq)]
pub struct IndeterminacyPoint {
    pub chart: Chart,
    pub coords: [Coord; 2],
    /// Largest relative residual of the vanishing numerator and denominator;
    /// zero for exact points, which are re-verified exactly.
    pub residual: f64,
}

impl IndeterminacyPoint {
    pub fn is_exact(&self) -> bool {
        self.coords.iter().all(|c| c.exact().is_some())
    }

    pub fn exact_coords(&self) -> Option<[Rational; 2]> {
        Some([self.coords[0].exact()?.clone(), self.coords[1].exact()?.clone()])
    }
}

impl fmt::Display for IndeterminacyPoint {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} ({}, {})", self.chart, self.coords[0], self.coords[1])
    }
}

const PAIRING_TOL: f64 = 1e-9;
const CLUSTER_TOL: f64 = 1e-7;

fn slice_at(p: &Poly, var: usize, value: &Rational) -> UniPoly {
    let vars = p.vars().clone();
    let mut images = [Poly::var(&vars, 0), Poly::var(&vars, 1)];
    images[var] = Poly::constant(&vars, value.clone());
    UniPoly::from_poly(&p.substitute(&images), 1 - var).expect("bivariate slice is univariate")
}

/// Squarefree part with all rational roots divided out.
fn irrational_part(p: &UniPoly) -> UniPoly {
    let mut q = p.squarefree_part();
    for r in p.rational_roots() {
        q = q.div_rem(&UniPoly::linear_root(&r)).0;
    }
    q
}

fn separated_roots(p: &UniPoly, label: &str) -> Result<Vec<Complex64>, BlowupError> {
    let roots = p.complex_roots();
    for (i, a) in roots.iter().enumerate() {
        if roots[i + 1..].iter().any(|b| (a - b).norm() < CLUSTER_TOL * (1.0 + a.norm())) {
            return Err(BlowupError::UnresolvedCluster(label.to_string()));
        }
    }
    Ok(roots)
}

fn relative_residual(p: &Poly, pt: &[Complex64]) -> f64 {
    let scale = p.eval_abs_complex(pt).max(f64::MIN_POSITIVE);
    p.eval_complex(pt).norm() / scale
}

/// Common zeros of a coprime pair `(n, d)` in the affine chart.
fn common_zeros(n: &Poly, d: &Poly, chart: Chart) -> Result<Vec<IndeterminacyPoint>, BlowupError> {
    if n.is_constant() || d.is_constant() {
        return Ok(Vec::new());
    }
    let label = chart.to_string();
    let rx = UniPoly::from_poly(&resultant(n, d, 1), 0).expect("resultant in x only");
    let ry = UniPoly::from_poly(&resultant(n, d, 0), 1).expect("resultant in y only");
    assert!(!rx.is_zero() && !ry.is_zero(), "components must be reduced");
    let mut out = Vec::new();
    for x0 in rx.rational_roots() {
        let g = slice_at(n, 0, &x0).gcd(&slice_at(d, 0, &x0));
        for y0 in g.rational_roots() {
            out.push(IndeterminacyPoint { chart, coords: [Coord::Exact(x0.clone()), Coord::Exact(y0)], residual: 0.0 });
        }
        let rest = irrational_part(&g);
        for y in separated_roots(&rest, &label)? {
            let pt = [Complex64::new(num_traits::ToPrimitive::to_f64(&x0).unwrap_or(f64::NAN), 0.0), y];
            let residual = relative_residual(n, &pt).max(relative_residual(d, &pt));
            out.push(IndeterminacyPoint {
                chart,
                coords: [Coord::Exact(x0.clone()), Coord::Algebraic { poly: rest.clone(), approx: y }],
                residual,
            });
        }
    }
    let qx = irrational_part(&rx);
    if qx.degree().unwrap_or(0) > 0 {
        let qy = irrational_part(&ry);
        let mut ycands: Vec<Coord> = ry.rational_roots().into_iter().map(Coord::Exact).collect();
        ycands.extend(
            separated_roots(&qy, &label)?.into_iter().map(|approx| Coord::Algebraic { poly: qy.clone(), approx }),
        );
        for x in separated_roots(&qx, &label)? {
            let mut matches = Vec::new();
            for yc in &ycands {
                let pt = [x, yc.approx()];
                let residual = relative_residual(n, &pt).max(relative_residual(d, &pt));
                if residual < PAIRING_TOL {
                    matches.push((yc.clone(), residual));
                }
            }
            for (yc, residual) in matches {
                out.push(IndeterminacyPoint {
                    chart,
                    coords: [Coord::Algebraic { poly: qx.clone(), approx: x }, yc],
                    residual,
                });
            }
        }
    }
    Ok(out)
}

fn same_point(a: &IndeterminacyPoint, b: &IndeterminacyPoint) -> bool {
    a.coords.iter().zip(&b.coords).all(|(p, q)| match (p, q) {
        (Coord::Exact(r), Coord::Exact(s)) => r == s,
        (Coord::Algebraic { approx: x, .. }, Coord::Algebraic { approx: y, .. }) => {
            (x - y).norm() < CLUSTER_TOL * (1.0 + x.norm())
        }
        _ => false,
    })
}

/// Points of the source chart where some component of `map` is `0/0`.
///
/// Candidates come from the resultants of each component's numerator and
/// denominator in both variables. Rational points are verified exactly;
/// irrational ones are paired numerically and carry their residual.
pub fn indeterminacy_points(map: &PlaneMap) -> Result<Vec<IndeterminacyPoint>, BlowupError> {
    let mut out: Vec<IndeterminacyPoint> = Vec::new();
    for f in &map.comps {
        for p in common_zeros(f.num(), f.den(), map.source)? {
            if let Some(c) = p.exact_coords() {
                assert!(map.evaluate(&c) == EvalResult::Indeterminate, "exact point re-verifies as 0/0");
            }
            if !out.iter().any(|q| same_point(q, &p)) {
                out.push(p);
            }
        }
    }
    Ok(out)
}

/// Indeterminacy points of an `(x, y)` self-map over all of `P1 x P1`.
/// Points from the `(u, y)`, `(x, v)` and `(u, v)` charts are kept only
/// when they lie on the lines at infinity not seen by earlier charts.
pub fn indeterminacy_locus(f: &PlaneMap) -> Result<Vec<IndeterminacyPoint>, BlowupError> {
    let is_zero = |c: &Coord| c.exact().is_some_and(|r| r.is_zero());
    let mut out = Vec::new();
    for chart in Chart::BASE {
        let m = f.conjugate(chart, Chart::XY);
        for p in indeterminacy_points(&m)? {
            let keep = match chart {
                Chart::XY => true,
                Chart::UY => is_zero(&p.coords[0]),
                Chart::XV => is_zero(&p.coords[1]),
                _ => is_zero(&p.coords[0]) && is_zero(&p.coords[1]),
            };
            if keep {
                out.push(p);
            }
        }
    }
    Ok(out)
}

/// Whether the stability check runs on `P1 x P1` or on the blown-up surface.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum Surface {
    Base,
    Blown,
}

/// One curve's collapse verdict in the chart where it was decided.
#[derive(Debug, Clone)]
pub struct CurveCheck {
    pub label: String,
    pub target: Chart,
    pub verdict: CollapseVerdict,
    /// Exceptional divisor the image lies on, with its multiplicity.
    pub onto: Option<DivisorIncidence>,
}

#[derive(Debug, Clone)]
pub struct StabilityReport {
    pub surface: Surface,
    /// `(label, exponent)` of the critical curves in the Jacobian.
    pub critical: Vec<(String, u32)>,
    pub checks: Vec<CurveCheck>,
}

#[derive(Debug, Error)]
pub enum StabilityError {
    #[error("critical set not exhausted: {0}")]
    Critical(#[from] MapError),
    #[error("{label} is collapsed to {image}{}", if *.into_indeterminacy { ", a point of indeterminacy" } else { "" })]
    Collapsed { label: String, image: String, into_indeterminacy: bool },
    #[error("collapse test for {label}: {source}")]
    Test { label: String, source: BlowupError },
}

/// Curves whose non-collapse implies stability: the critical curves, the
/// coordinate axes and the lines at infinity, plus the exceptional divisors
/// on the blown-up surface.
fn stability_curves(critical: &[(String, u32)], surface: Surface) -> Vec<CurveOnSurface> {
    let proper = surface == Surface::Blown;
    let mut out: Vec<CurveOnSurface> = critical
        .iter()
        .map(|(label, _)| CurveOnSurface::critical(label[1..].parse().expect("label C<k>"), proper))
        .collect();
    let line = |label: &str, chart: Chart, var: usize| {
        CurveOnSurface::new(label, chart, Poly::var(&chart.vars(), var), proper).expect("coordinate line")
    };
    out.push(line("{x=0}", Chart::XY, 0));
    out.push(line("{y=0}", Chart::XY, 1));
    out.push(line("{x=inf}", Chart::UY, 0));
    out.push(line("{y=inf}", Chart::XV, 1));
    if surface == Surface::Blown {
        out.extend(Exceptional::ALL.into_iter().map(CurveOnSurface::exceptional));
    }
    out
}

fn check_curve(f: &PlaneMap, curve: &CurveOnSurface, surface: Surface) -> Result<CurveCheck, StabilityError> {
    let err = |source| StabilityError::Test { label: curve.label.clone(), source };
    let base = f.conjugate(curve.chart, Chart::XY);
    let verdict = collapse_test(curve, &base).map_err(err)?;
    let CollapseVerdict::Collapsed { image } = &verdict else {
        return Ok(CurveCheck { label: curve.label.clone(), target: Chart::XY, verdict, onto: None });
    };
    let center = Exceptional::from_center(image);
    match (surface, center) {
        (Surface::Blown, Some(e)) => {
            let mut last = None;
            for chart in [e.chart(), e.complementary_chart()] {
                match collapse_test(curve, &f.conjugate(curve.chart, chart)) {
                    Ok(CollapseVerdict::Collapsed { image }) => {
                        return Err(StabilityError::Collapsed {
                            label: curve.label.clone(),
                            image: format!("{} in {chart}", render_image(&image)),
                            into_indeterminacy: false,
                        })
                    }
                    Ok(v) => {
                        let onto = if curve.chart == Chart::XY && curve.proper {
                            Some(maps_onto_divisor(curve, e).map_err(err)?)
                        } else {
                            None
                        };
                        return Ok(CurveCheck { label: curve.label.clone(), target: chart, verdict: v, onto });
                    }
                    Err(e @ BlowupError::OutsideChart { .. }) => last = Some(e),
                    Err(e) => return Err(err(e)),
                }
            }
            Err(err(last.expect("two charts tried")))
        }
        _ => Err(StabilityError::Collapsed {
            label: curve.label.clone(),
            image: render_image(image),
            into_indeterminacy: is_indeterminate_at(f, image),
        }),
    }
}

/// Whether an `(x, y)` self-map is indeterminate at a point of `P1 x P1`.
pub fn is_indeterminate_at(f: &PlaneMap, pt: &[P1Value; 2]) -> bool {
    let (chart, coords) = match pt {
        [P1Value::Finite(x), P1Value::Finite(y)] => (Chart::XY, [x.clone(), y.clone()]),
        [P1Value::Infinity, P1Value::Finite(y)] => (Chart::UY, [int(0), y.clone()]),
        [P1Value::Finite(x), P1Value::Infinity] => (Chart::XV, [x.clone(), int(0)]),
        [P1Value::Infinity, P1Value::Infinity] => (Chart::UV, [int(0), int(0)]),
    };
    f.conjugate(chart, Chart::XY).evaluate(&coords) == EvalResult::Indeterminate
}

/// Certifies that no curve is collapsed by `f` (an `(x, y)` self-map of
/// `P1 x P1`) or by its lift to the blown-up surface. Relies on the fact
/// that a collapsed curve lies in the critical set; the critical set is
/// exhausted by [`PlaneMap::jacobian_critical_factors`].
pub fn stability_certificate(f: &PlaneMap, surface: Surface) -> Result<StabilityReport, StabilityError> {
    let critical: Vec<(String, u32)> =
        f.jacobian_critical_factors()?.factors.into_iter().map(|(l, _, e)| (l, e)).collect();
    let curves = stability_curves(&critical, surface);
    let results: Vec<Result<CurveCheck, StabilityError>> =
        curves.par_iter().map(|c| check_curve(f, c, surface)).collect();
    let checks = results.into_iter().collect::<Result<Vec<_>, _>>()?;
    Ok(StabilityReport { surface, critical, checks })
}
