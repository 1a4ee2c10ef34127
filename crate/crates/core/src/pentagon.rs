//! Projective geometry of polygons: joins and meets, the projective
//! midpoint of an edge, the heat map on N-gons and the canonical
//! representative of a pentagon's projective class.
//!
//! Everything is generic over [`Scalar`]: exact rationals for property
//! tests, `Q(sqrt 5)` for the regular pentagon, and `f64` for long runs.

use std::fmt;
use std::str::FromStr;

use num_traits::{One, Signed, ToPrimitive, Zero};
use rand::Rng;
use rayon::prelude::*;
use serde::Serialize;
use thiserror::Error;

use crate::poly::Rational;

/// Field operations needed by the constructions.
pub trait Scalar: Clone + PartialEq + fmt::Debug + fmt::Display + Send + Sync {
    fn zero() -> Self;
    fn one() -> Self;
    fn add(&self, o: &Self) -> Self;
    fn sub(&self, o: &Self) -> Self;
    fn mul(&self, o: &Self) -> Self;
    /// `o` must not be negligible.
    fn div(&self, o: &Self) -> Self;
    fn neg(&self) -> Self;
    fn to_f64(&self) -> f64;
    /// Exact types test for zero; floats compare against `scale` with a
    /// relative tolerance.
    fn is_negligible(&self, scale: f64) -> bool;
    fn from_i64(n: i64) -> Self;
    /// Whether arithmetic is exact; floats canonicalize by the largest
    /// coordinate instead of the last nonzero one.
    const EXACT: bool = true;
}

impl Scalar for Rational {
    fn zero() -> Self {
        Zero::zero()
    }
    fn one() -> Self {
        One::one()
    }
    fn add(&self, o: &Self) -> Self {
        self + o
    }
    fn sub(&self, o: &Self) -> Self {
        self - o
    }
    fn mul(&self, o: &Self) -> Self {
        self * o
    }
    fn div(&self, o: &Self) -> Self {
        self / o
    }
    fn neg(&self) -> Self {
        -self
    }
    fn to_f64(&self) -> f64 {
        ToPrimitive::to_f64(self).unwrap_or(f64::NAN)
    }
    fn is_negligible(&self, _: f64) -> bool {
        self.is_zero()
    }
    fn from_i64(n: i64) -> Self {
        Rational::from_integer(n.into())
    }
}

/// Relative tolerance for degeneracy in floating point.
pub const FLOAT_DEGENERACY_TOL: f64 = 1e-13;

impl Scalar for f64 {
    fn zero() -> Self {
        0.0
    }
    fn one() -> Self {
        1.0
    }
    fn add(&self, o: &Self) -> Self {
        self + o
    }
    fn sub(&self, o: &Self) -> Self {
        self - o
    }
    fn mul(&self, o: &Self) -> Self {
        self * o
    }
    fn div(&self, o: &Self) -> Self {
        self / o
    }
    fn neg(&self) -> Self {
        -self
    }
    fn to_f64(&self) -> f64 {
        *self
    }
    fn is_negligible(&self, scale: f64) -> bool {
        self.abs() <= FLOAT_DEGENERACY_TOL * scale
    }
    fn from_i64(n: i64) -> Self {
        n as f64
    }
    const EXACT: bool = false;
}

/// `a + b sqrt 5` with rational `a`, `b`.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct QSqrt5 {
    pub a: Rational,
    pub b: Rational,
}

impl QSqrt5 {
    pub fn new(a: Rational, b: Rational) -> Self {
        QSqrt5 { a, b }
    }

    pub fn rational(a: Rational) -> Self {
        QSqrt5 { a, b: <Rational as Zero>::zero() }
    }

    pub fn sqrt5() -> Self {
        QSqrt5 { a: <Rational as Zero>::zero(), b: <Rational as One>::one() }
    }

    /// `a^2 - 5 b^2`, zero only for zero.
    pub fn norm(&self) -> Rational {
        &self.a * &self.a - Rational::from_integer(5.into()) * &self.b * &self.b
    }
}

impl fmt::Display for QSqrt5 {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.b.is_zero() {
            return write!(f, "{}", self.a);
        }
        let sign = if self.b.is_negative() { "-" } else { "+" };
        write!(f, "{} {} {}*sqrt5", self.a, sign, self.b.abs())
    }
}

impl Scalar for QSqrt5 {
    fn zero() -> Self {
        Self::rational(<Rational as Zero>::zero())
    }
    fn one() -> Self {
        Self::rational(<Rational as One>::one())
    }
    fn add(&self, o: &Self) -> Self {
        QSqrt5 { a: &self.a + &o.a, b: &self.b + &o.b }
    }
    fn sub(&self, o: &Self) -> Self {
        QSqrt5 { a: &self.a - &o.a, b: &self.b - &o.b }
    }
    fn mul(&self, o: &Self) -> Self {
        let five = Rational::from_integer(5.into());
        QSqrt5 { a: &self.a * &o.a + five * &self.b * &o.b, b: &self.a * &o.b + &self.b * &o.a }
    }
    fn div(&self, o: &Self) -> Self {
        let n = o.norm();
        let conj = QSqrt5 { a: &o.a / &n, b: -&o.b / &n };
        self.mul(&conj)
    }
    fn neg(&self) -> Self {
        QSqrt5 { a: -&self.a, b: -&self.b }
    }
    fn to_f64(&self) -> f64 {
        ToPrimitive::to_f64(&self.a).unwrap_or(f64::NAN)
            + ToPrimitive::to_f64(&self.b).unwrap_or(f64::NAN) * 5f64.sqrt()
    }
    fn is_negligible(&self, _: f64) -> bool {
        self.a.is_zero() && self.b.is_zero()
    }
    fn from_i64(n: i64) -> Self {
        Self::rational(Rational::from_integer(n.into()))
    }
}

#[derive(Debug, Clone, PartialEq, Error, Serialize)]
pub enum GeometryError {
    #[error("all homogeneous coordinates are zero")]
    ZeroPoint,
    #[error("inputs coincide projectively")]
    CoincidentInputs,
    #[error("configuration is not in general position{}", window_note(*.window, *.iteration))]
    DegenerateConfiguration { window: Option<usize>, iteration: Option<usize> },
    #[error("a polygon needs at least 5 vertices, got {0}")]
    TooFewVertices(usize),
    #[error("consecutive vertices {0} and {1} coincide")]
    RepeatedVertex(usize, usize),
    #[error("transform has zero determinant")]
    SingularTransform,
    #[error("no convergence after {max_iter} iterations (distance {distance:e})")]
    NoConvergence { max_iter: usize, distance: f64 },
    #[error("line {line}: {msg}")]
    Parse { line: usize, msg: String },
}

fn window_note(window: Option<usize>, iteration: Option<usize>) -> String {
    let mut s = String::new();
    if let Some(w) = window {
        s += &format!(" at window {w}");
    }
    if let Some(i) = iteration {
        s += &format!(" in iteration {i}");
    }
    s
}

fn degenerate() -> GeometryError {
    GeometryError::DegenerateConfiguration { window: None, iteration: None }
}

fn cross<T: Scalar>(u: &[T; 3], v: &[T; 3]) -> [T; 3] {
    [
        u[1].mul(&v[2]).sub(&u[2].mul(&v[1])),
        u[2].mul(&v[0]).sub(&u[0].mul(&v[2])),
        u[0].mul(&v[1]).sub(&u[1].mul(&v[0])),
    ]
}

fn dot<T: Scalar>(u: &[T; 3], v: &[T; 3]) -> T {
    u[0].mul(&v[0]).add(&u[1].mul(&v[1])).add(&u[2].mul(&v[2]))
}

fn mag<T: Scalar>(u: &[T; 3]) -> f64 {
    u.iter().map(|c| c.to_f64().abs()).fold(0.0, f64::max)
}

fn all_negligible<T: Scalar>(u: &[T; 3], scale: f64) -> bool {
    u.iter().all(|c| c.is_negligible(scale))
}

/// A point of the projective plane, stored in canonical form: the last
/// nonzero coordinate is 1 (for floats, the largest coordinate is 1).
#[derive(Debug, Clone, PartialEq)]
pub struct ProjPoint<T: Scalar>([T; 3]);

impl<T: Scalar> ProjPoint<T> {
    pub fn new(c: [T; 3]) -> Result<Self, GeometryError> {
        let m = mag(&c);
        let Some(mut k) = (0..3).rev().find(|&i| !c[i].is_negligible(m)) else {
            return Err(GeometryError::ZeroPoint);
        };
        if !T::EXACT {
            k = (0..3).max_by(|&i, &j| c[i].to_f64().abs().total_cmp(&c[j].to_f64().abs())).unwrap_or(k);
        }
        let s = c[k].clone();
        let mut out = c.map(|v| v.div(&s));
        out[k] = T::one();
        Ok(ProjPoint(out))
    }

    /// The affine point `(x, y)` as `(x : y : 1)`.
    pub fn affine(x: T, y: T) -> Self {
        ProjPoint([x, y, T::one()])
    }

    pub fn coords(&self) -> &[T; 3] {
        &self.0
    }

    /// `(x/z, y/z)` when `z` is nonzero.
    pub fn dehomogenize(&self) -> Option<(T, T)> {
        let z = &self.0[2];
        if z.is_negligible(mag(&self.0)) {
            return None;
        }
        Some((self.0[0].div(z), self.0[1].div(z)))
    }

    pub fn to_f64(&self) -> ProjPoint<f64> {
        ProjPoint(self.0.clone().map(|v| v.to_f64()))
    }

    pub fn same_as(&self, other: &Self) -> bool {
        let c = cross(&self.0, &other.0);
        all_negligible(&c, mag(&self.0) * mag(&other.0))
    }
}

impl<T: Scalar> fmt::Display for ProjPoint<T> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({} : {} : {})", self.0[0], self.0[1], self.0[2])
    }
}

/// A line `a x + b y + c z = 0`.
#[derive(Debug, Clone, PartialEq)]
pub struct ProjLine<T: Scalar>([T; 3]);

impl<T: Scalar> ProjLine<T> {
    pub fn new(c: [T; 3]) -> Result<Self, GeometryError> {
        Ok(ProjLine(ProjPoint::new(c)?.0))
    }

    pub fn coords(&self) -> &[T; 3] {
        &self.0
    }

    pub fn contains(&self, p: &ProjPoint<T>) -> bool {
        dot(&self.0, &p.0).is_negligible(mag(&self.0) * mag(&p.0))
    }
}

pub fn join<T: Scalar>(p: &ProjPoint<T>, q: &ProjPoint<T>) -> Result<ProjLine<T>, GeometryError> {
    let c = cross(&p.0, &q.0);
    if all_negligible(&c, mag(&p.0) * mag(&q.0)) {
        return Err(GeometryError::CoincidentInputs);
    }
    ProjLine::new(c)
}

pub fn meet<T: Scalar>(l: &ProjLine<T>, m: &ProjLine<T>) -> Result<ProjPoint<T>, GeometryError> {
    let c = cross(&l.0, &m.0);
    if all_negligible(&c, mag(&l.0) * mag(&m.0)) {
        return Err(GeometryError::CoincidentInputs);
    }
    ProjPoint::new(c)
}

/// The projective midpoint of `BC` relative to its neighbors `A` and `D`:
/// `S = BC . QR` with `Q = AB . CD` and `R = AC . BD`.
pub fn projective_midpoint<T: Scalar>(
    a: &ProjPoint<T>,
    b: &ProjPoint<T>,
    c: &ProjPoint<T>,
    d: &ProjPoint<T>,
) -> Result<ProjPoint<T>, GeometryError> {
    let step = || -> Result<ProjPoint<T>, GeometryError> {
        let q = meet(&join(a, b)?, &join(c, d)?)?;
        let r = meet(&join(a, c)?, &join(b, d)?)?;
        let bc = join(b, c)?;
        let s = meet(&bc, &join(&q, &r)?)?;
        Ok(s)
    };
    step().map_err(|_| degenerate())
}

/// A closed polygon with at least five vertices.
#[derive(Debug, Clone, PartialEq)]
pub struct Polygon<T: Scalar> {
    vertices: Vec<ProjPoint<T>>,
}

impl<T: Scalar> Polygon<T> {
    pub fn new(vertices: Vec<ProjPoint<T>>) -> Result<Self, GeometryError> {
        let n = vertices.len();
        if n < 5 {
            return Err(GeometryError::TooFewVertices(n));
        }
        for i in 0..n {
            if vertices[i].same_as(&vertices[(i + 1) % n]) {
                return Err(GeometryError::RepeatedVertex(i, (i + 1) % n));
            }
        }
        Ok(Polygon { vertices })
    }

    pub fn from_affine(points: &[(T, T)]) -> Result<Self, GeometryError> {
        Self::new(points.iter().map(|(x, y)| ProjPoint::affine(x.clone(), y.clone())).collect())
    }

    pub fn vertices(&self) -> &[ProjPoint<T>] {
        &self.vertices
    }

    pub fn len(&self) -> usize {
        self.vertices.len()
    }

    pub fn is_empty(&self) -> bool {
        self.vertices.is_empty()
    }

    /// Vertex `i` becomes vertex `i - k`.
    pub fn rotated(&self, k: usize) -> Self {
        let mut v = self.vertices.clone();
        v.rotate_left(k % self.len());
        Polygon { vertices: v }
    }

    /// Vertex `i` becomes vertex `-i`.
    pub fn reflected(&self) -> Self {
        let n = self.len();
        Polygon { vertices: (0..n).map(|i| self.vertices[(n - i) % n].clone()).collect() }
    }

    pub fn to_f64(&self) -> Polygon<f64> {
        Polygon { vertices: self.vertices.iter().map(|p| p.to_f64()).collect() }
    }

    /// Affine convexity in the chart `z = 1`: every vertex is finite and all
    /// cross products of consecutive edge vectors are nonzero with one sign.
    pub fn is_convex(&self) -> bool {
        let Some(pts) = self.vertices.iter().map(|p| p.dehomogenize()).collect::<Option<Vec<_>>>() else {
            return false;
        };
        let n = pts.len();
        let mut sign = 0;
        for i in 0..n {
            let (p, q, r) = (&pts[i], &pts[(i + 1) % n], &pts[(i + 2) % n]);
            let (ux, uy) = (q.0.sub(&p.0), q.1.sub(&p.1));
            let (vx, vy) = (r.0.sub(&q.0), r.1.sub(&q.1));
            let z = ux.mul(&vy).sub(&uy.mul(&vx));
            let scale = (ux.to_f64().abs() + uy.to_f64().abs()) * (vx.to_f64().abs() + vy.to_f64().abs());
            if z.is_negligible(scale) {
                return false;
            }
            let s = if z.to_f64() > 0.0 { 1 } else { -1 };
            if sign == 0 {
                sign = s;
            } else if s != sign {
                return false;
            }
        }
        true
    }
}

impl<T: Scalar> fmt::Display for Polygon<T> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for p in &self.vertices {
            let c = p.coords();
            writeln!(f, "{} {} {}", c[0], c[1], c[2])?;
        }
        Ok(())
    }
}

/// The heat map on polygons: vertex `k` of the image is the projective
/// midpoint of the edge from vertex `k` to vertex `k + 1`.
pub fn heat_step<T: Scalar>(p: &Polygon<T>) -> Result<Polygon<T>, GeometryError> {
    let v = &p.vertices;
    let n = v.len();
    let out = (0..n)
        .map(|k| {
            projective_midpoint(&v[(k + n - 1) % n], &v[k], &v[(k + 1) % n], &v[(k + 2) % n])
                .map_err(|_| GeometryError::DegenerateConfiguration { window: Some(k), iteration: None })
        })
        .collect::<Result<Vec<_>, _>>()?;
    Polygon::new(out).map_err(|_| GeometryError::DegenerateConfiguration { window: None, iteration: None })
}

/// An invertible 3x3 matrix acting on column vectors.
#[derive(Debug, Clone, PartialEq)]
pub struct ProjTransform<T: Scalar>([[T; 3]; 3]);

fn det3<T: Scalar>(m: &[[T; 3]; 3]) -> T {
    let c = cross(&m[1], &m[2]);
    dot(&m[0], &c)
}

impl<T: Scalar> ProjTransform<T> {
    pub fn new(m: [[T; 3]; 3]) -> Result<Self, GeometryError> {
        let scale = m.iter().map(mag).fold(0.0, f64::max).powi(3);
        if det3(&m).is_negligible(scale) {
            return Err(GeometryError::SingularTransform);
        }
        Ok(ProjTransform(m))
    }

    pub fn matrix(&self) -> &[[T; 3]; 3] {
        &self.0
    }

    pub fn apply(&self, p: &ProjPoint<T>) -> ProjPoint<T> {
        let c = self.0.clone().map(|row| dot(&row, &p.0));
        ProjPoint::new(c).expect("invertible map sends nonzero vectors to nonzero vectors")
    }

    pub fn apply_polygon(&self, p: &Polygon<T>) -> Polygon<T> {
        Polygon { vertices: p.vertices.iter().map(|v| self.apply(v)).collect() }
    }

    /// Inverse via the adjugate.
    pub fn inverse(&self) -> Self {
        let m = &self.0;
        let d = det3(m);
        let cols = [cross(&m[1], &m[2]), cross(&m[2], &m[0]), cross(&m[0], &m[1])];
        // row i of the inverse is column i of the cofactor matrix
        let inv = std::array::from_fn(|i| std::array::from_fn(|j| cols[j][i].div(&d)));
        ProjTransform(inv)
    }

    /// The unique transform sending the standard frame
    /// `(1:0:0), (0:1:0), (0:0:1), (1:1:1)` to `p0..p3`.
    pub fn from_frame(p: [&ProjPoint<T>; 4]) -> Result<Self, GeometryError> {
        let cols = [&p[0].0, &p[1].0, &p[2].0];
        let m: [[T; 3]; 3] = std::array::from_fn(|i| std::array::from_fn(|j| cols[j][i].clone()));
        let base = ProjTransform::new(m).map_err(|_| degenerate())?;
        let lam = base.inverse().0.map(|row| dot(&row, &p[3].0));
        let scale = mag(&p[3].0);
        if lam.iter().any(|l| l.is_negligible(scale)) {
            return Err(degenerate());
        }
        let m = std::array::from_fn(|i| std::array::from_fn(|j| base.0[i][j].mul(&lam[j])));
        ProjTransform::new(m).map_err(|_| degenerate())
    }
}

/// Sends vertices 1-4 of a pentagon to the standard frame and returns the
/// transformed pentagon; its fifth vertex represents the class.
pub fn normalize_polygon<T: Scalar>(p: &Polygon<T>) -> Result<Polygon<T>, GeometryError> {
    let v = &p.vertices;
    let t = ProjTransform::from_frame([&v[0], &v[1], &v[2], &v[3]])?.inverse();
    Ok(t.apply_polygon(p))
}

/// The canonical representative of a pentagon's projective class.
pub fn normalize<T: Scalar>(p: &Polygon<T>) -> Result<ProjPoint<T>, GeometryError> {
    assert_eq!(p.len(), 5, "canonical representatives are defined for pentagons");
    Ok(normalize_polygon(p)?.vertices[4].clone())
}

/// A regular pentagon in coordinates from `Q(sqrt 5)`: the vertices
/// `(cos 2 pi k/5, sin 2 pi k/5)` with `y` rescaled by `1 / sin(2 pi/5)`.
pub fn regular_pentagon() -> Polygon<QSqrt5> {
    let q = |a: i64, b: i64, d: i64| QSqrt5::new(Rational::new(a.into(), d.into()), Rational::new(b.into(), d.into()));
    // cos 72 = (sqrt5 - 1)/4, cos 144 = -(sqrt5 + 1)/4, sin 144 / sin 72 = (sqrt5 - 1)/2
    let c1 = q(-1, 1, 4);
    let c2 = q(-1, -1, 4);
    let s2 = q(-1, 1, 2);
    let pts = [
        (QSqrt5::one(), QSqrt5::zero()),
        (c1.clone(), QSqrt5::one()),
        (c2.clone(), s2.clone()),
        (c2, s2.neg()),
        (c1, QSqrt5::one().neg()),
    ];
    Polygon::from_affine(&pts).expect("distinct vertices")
}

/// The canonical representative of the regular class, exactly.
pub fn regular_class() -> ProjPoint<QSqrt5> {
    normalize(&regular_pentagon()).expect("regular pentagon is in general position")
}

/// Dehomogenized regular class in floating point.
pub fn regular_class_f64() -> (f64, f64) {
    let (x, y) = regular_class().dehomogenize().expect("finite representative");
    (x.to_f64(), y.to_f64())
}

/// Max-norm distance between the dehomogenized representative of `p` and
/// the regular class.
pub fn distance_to_regular<T: Scalar>(rep: &ProjPoint<T>) -> f64 {
    let (rx, ry) = regular_class_f64();
    match rep.dehomogenize() {
        Some((x, y)) => (x.to_f64() - rx).abs().max((y.to_f64() - ry).abs()),
        None => f64::INFINITY,
    }
}

/// Iterates the heat map in floating point, renormalizing every step, and
/// returns the first iteration count whose class lies within `tol` of the
/// regular class.
pub fn converge_to_regular<T: Scalar>(p: &Polygon<T>, tol: f64, max_iter: usize) -> Result<usize, GeometryError> {
    assert_eq!(p.len(), 5, "convergence is measured for pentagons");
    let with_iter = |e: GeometryError, i: usize| match e {
        GeometryError::DegenerateConfiguration { window, .. } => {
            GeometryError::DegenerateConfiguration { window, iteration: Some(i) }
        }
        other => other,
    };
    let mut cur = normalize_polygon(&p.to_f64()).map_err(|e| with_iter(e, 0))?;
    let mut dist = distance_to_regular(&cur.vertices[4]);
    for i in 0..max_iter {
        if dist < tol {
            return Ok(i);
        }
        cur = heat_step(&cur).map_err(|e| with_iter(e, i + 1))?;
        cur = normalize_polygon(&cur).map_err(|e| with_iter(e, i + 1))?;
        dist = distance_to_regular(&cur.vertices[4]);
    }
    if dist < tol {
        return Ok(max_iter);
    }
    Err(GeometryError::NoConvergence { max_iter, distance: dist })
}

/// A random rational of height at most `h`, nonzero denominator.
fn small_rational(rng: &mut impl Rng, h: i64) -> Rational {
    Rational::new(rng.gen_range(-h..=h).into(), rng.gen_range(1..=h).into())
}

/// A random convex pentagon with rational vertices on the unit circle,
/// from sorted parameters of the rational parametrization.
pub fn random_convex_pentagon(rng: &mut impl Rng) -> Polygon<Rational> {
    loop {
        let mut ts: Vec<Rational> = (0..5).map(|_| small_rational(rng, 9)).collect();
        ts.sort();
        ts.dedup();
        if ts.len() < 5 {
            continue;
        }
        let one = <Rational as One>::one();
        let pts: Vec<(Rational, Rational)> = ts
            .iter()
            .map(|t| {
                let d = &one + t * t;
                ((&one - t * t) / &d, (t + t) / &d)
            })
            .collect();
        let p = Polygon::from_affine(&pts).expect("distinct parameters give distinct points");
        if p.is_convex() {
            return p;
        }
    }
}

/// A random invertible transform with small integer entries.
pub fn random_transform(rng: &mut impl Rng) -> ProjTransform<Rational> {
    loop {
        let m =
            std::array::from_fn(|_| std::array::from_fn(|_| Rational::from_integer(rng.gen_range(-5i64..=5).into())));
        if let Ok(t) = ProjTransform::new(m) {
            return t;
        }
    }
}

/// Outcome of one convergence run.
#[derive(Debug, Clone, Serialize)]
pub struct ConvergenceRow {
    pub index: usize,
    pub iterations: Option<usize>,
    pub error: Option<String>,
}

/// Convergence runs over a batch, in parallel, reported in input order.
pub fn convergence_table<T: Scalar>(polys: &[Polygon<T>], tol: f64, max_iter: usize) -> Vec<ConvergenceRow> {
    polys
        .par_iter()
        .enumerate()
        .map(|(index, p)| match converge_to_regular(p, tol, max_iter) {
            Ok(n) => ConvergenceRow { index, iterations: Some(n), error: None },
            Err(e) => ConvergenceRow { index, iterations: None, error: Some(e.to_string()) },
        })
        .collect()
}

/// Reads polygons as rows of three rationals (`x y z`), one vertex per row.
/// Blank lines separate polygons and `#` starts a comment.
pub fn parse_polygons(text: &str) -> Result<Vec<Polygon<Rational>>, GeometryError> {
    let mut out = Vec::new();
    let mut cur: Vec<ProjPoint<Rational>> = Vec::new();
    let finish = |cur: &mut Vec<ProjPoint<Rational>>, out: &mut Vec<Polygon<Rational>>, line: usize| {
        if cur.is_empty() {
            return Ok(());
        }
        let p = Polygon::new(std::mem::take(cur)).map_err(|e| GeometryError::Parse { line, msg: e.to_string() })?;
        out.push(p);
        Ok(())
    };
    for (i, raw) in text.lines().enumerate() {
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            finish(&mut cur, &mut out, i + 1)?;
            continue;
        }
        let parts: Vec<&str> = line.split_whitespace().collect();
        if parts.len() != 3 {
            return Err(GeometryError::Parse {
                line: i + 1,
                msg: format!("expected 3 coordinates, got {}", parts.len()),
            });
        }
        let c = parts
            .iter()
            .map(|s| Rational::from_str(s).map_err(|e| GeometryError::Parse { line: i + 1, msg: format!("{s}: {e}") }))
            .collect::<Result<Vec<_>, _>>()?;
        let p = ProjPoint::new([c[0].clone(), c[1].clone(), c[2].clone()])
            .map_err(|e| GeometryError::Parse { line: i + 1, msg: e.to_string() })?;
        cur.push(p);
    }
    finish(&mut cur, &mut out, text.lines().count())?;
    Ok(out)
}
