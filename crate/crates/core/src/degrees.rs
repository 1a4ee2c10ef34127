//! Dynamical and topological degrees: characteristic polynomial, certified
//! spectral radius, anticanonical eigenvector, preimage counting and the
//! growth of iterate bidegrees.

use std::fmt;

use num_bigint::BigInt;
use num_complex::Complex64;
use num_traits::{One, Signed, ToPrimitive, Zero};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;
use thiserror::Error;

use crate::charts::{heat_map_xy, Chart, MapError, PlaneMap};
use crate::cohomology::{mat_vec, DivisorClass, Matrix5};
use crate::poly::univariate::aberth;
use crate::poly::{gcd, resultant, Poly, Rational, UniPoly};

/// Integer polynomial in `lambda`, coefficient of `lambda^i` at index `i`.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct IntPolynomial {
    coeffs: Vec<BigInt>,
}

impl IntPolynomial {
    pub fn new(mut coeffs: Vec<BigInt>) -> Self {
        while coeffs.last().is_some_and(|c| c.is_zero()) {
            coeffs.pop();
        }
        IntPolynomial { coeffs }
    }

    pub fn from_i64(coeffs: &[i64]) -> Self {
        Self::new(coeffs.iter().map(|&c| BigInt::from(c)).collect())
    }

    /// `prod (lambda - r)^k` over `(r, k)`.
    pub fn from_roots(roots: &[(i64, u32)]) -> Self {
        let mut acc = vec![BigInt::one()];
        for &(r, k) in roots {
            for _ in 0..k {
                let mut next = vec![BigInt::zero(); acc.len() + 1];
                for (i, c) in acc.iter().enumerate() {
                    next[i + 1] += c;
                    next[i] -= c * r;
                }
                acc = next;
            }
        }
        Self::new(acc)
    }

    pub fn coeffs(&self) -> &[BigInt] {
        &self.coeffs
    }

    pub fn degree(&self) -> Option<usize> {
        self.coeffs.len().checked_sub(1)
    }

    pub fn to_unipoly(&self) -> UniPoly {
        UniPoly::new(self.coeffs.iter().map(|c| Rational::from_integer(c.clone())).collect())
    }

    /// `p(M)` by Horner's rule.
    pub fn eval_matrix(&self, m: &[Vec<BigInt>]) -> Vec<Vec<BigInt>> {
        let n = m.len();
        let mut acc = vec![vec![BigInt::zero(); n]; n];
        for c in self.coeffs.iter().rev() {
            acc = mat_mul(&acc, m);
            for (i, row) in acc.iter_mut().enumerate() {
                row[i] += c;
            }
        }
        acc
    }
}

impl fmt::Display for IntPolynomial {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.coeffs.is_empty() {
            return write!(f, "0");
        }
        let mut first = true;
        for (i, c) in self.coeffs.iter().enumerate().rev() {
            if c.is_zero() {
                continue;
            }
            let a = c.abs();
            if first {
                if c.is_negative() {
                    write!(f, "-")?;
                }
            } else {
                write!(f, " {} ", if c.is_negative() { "-" } else { "+" })?;
            }
            first = false;
            let mono = match i {
                0 => String::new(),
                1 => "λ".to_string(),
                _ => format!("λ^{i}"),
            };
            if mono.is_empty() {
                write!(f, "{a}")?;
            } else if a.is_one() {
                write!(f, "{mono}")?;
            } else {
                write!(f, "{a}{mono}")?;
            }
        }
        Ok(())
    }
}

impl Serialize for IntPolynomial {
    fn serialize<S: serde::Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_str(&self.to_string())
    }
}

pub fn to_big<const N: usize>(m: &[[i64; N]; N]) -> Vec<Vec<BigInt>> {
    m.iter().map(|r| r.iter().map(|&v| BigInt::from(v)).collect()).collect()
}

fn mat_mul(a: &[Vec<BigInt>], b: &[Vec<BigInt>]) -> Vec<Vec<BigInt>> {
    let n = a.len();
    (0..n).map(|i| (0..n).map(|j| (0..n).map(|k| &a[i][k] * &b[k][j]).sum()).collect()).collect()
}

/// `det(lambda I - M)` by Berkowitz's division-free algorithm.
pub fn char_poly<const N: usize>(m: &[[i64; N]; N]) -> IntPolynomial {
    char_poly_big(&to_big(m))
}

pub fn char_poly_big(a: &[Vec<BigInt>]) -> IntPolynomial {
    let n = a.len();
    // coefficients in descending order
    let mut v = vec![BigInt::one()];
    for r in 0..n {
        let row: Vec<BigInt> = a[r][..r].to_vec();
        let mut col: Vec<BigInt> = (0..r).map(|i| a[i][r].clone()).collect();
        // first column of the Toeplitz factor: 1, -a_rr, -R C, -R A C, ...
        let mut t = vec![BigInt::one(), -a[r][r].clone()];
        for _ in 0..r {
            let rc: BigInt = row.iter().zip(&col).map(|(x, y)| x * y).sum();
            t.push(-rc);
            col = (0..r).map(|i| (0..r).map(|k| &a[i][k] * &col[k]).sum()).collect();
        }
        let mut next = vec![BigInt::zero(); r + 2];
        for (i, slot) in next.iter_mut().enumerate() {
            for (j, vj) in v.iter().enumerate() {
                if i >= j {
                    *slot += &t[i - j] * vj;
                }
            }
        }
        v = next;
    }
    v.reverse();
    IntPolynomial::new(v)
}

/// Number of roots of `p` strictly inside `|z| < 1`, or `None` when the
/// Schur-Cohn recursion meets a zero leading minor (roots on the circle
/// among the possible causes).
pub fn zeros_in_unit_disk(p: &UniPoly) -> Option<usize> {
    let n = p.degree()?;
    if n == 0 {
        return Some(0);
    }
    let c = p.coeffs();
    let (a0, an) = (&c[0], &c[n]);
    let delta = a0 * a0 - an * an;
    if delta.is_zero() {
        return None;
    }
    // T p = a0 p - an p*, with p* the reversal of p; degree drops below n
    let t: Vec<Rational> = (0..n).map(|i| a0 * &c[i] - an * &c[n - i]).collect();
    let t = UniPoly::new(t);
    let inner = zeros_in_unit_disk(&t)?;
    Some(if delta.is_positive() { inner } else { n - inner })
}

/// Roots of `p` with modulus strictly below `r > 0`.
pub fn zeros_in_disk(p: &UniPoly, r: &Rational) -> Option<usize> {
    let mut scale = Rational::one();
    let coeffs = p
        .coeffs()
        .iter()
        .map(|c| {
            let v = c * &scale;
            scale *= r;
            v
        })
        .collect();
    zeros_in_unit_disk(&UniPoly::new(coeffs))
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum SpectralRadius {
    /// A rational root whose modulus bounds every other root.
    Exact { value: Rational, certificate: String },
    /// `lo < rho < hi`, both ends certified by disk root counts.
    Interval { lo: Rational, hi: Rational },
}

impl SpectralRadius {
    pub fn approx(&self) -> f64 {
        match self {
            SpectralRadius::Exact { value, .. } => value.to_f64().unwrap_or(f64::NAN),
            SpectralRadius::Interval { lo, hi } => {
                ((lo + hi) / Rational::from_integer(2.into())).to_f64().unwrap_or(f64::NAN)
            }
        }
    }

    pub fn exact(&self) -> Option<&Rational> {
        match self {
            SpectralRadius::Exact { value, .. } => Some(value),
            SpectralRadius::Interval { .. } => None,
        }
    }
}

impl fmt::Display for SpectralRadius {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            SpectralRadius::Exact { value, .. } => write!(f, "{value}"),
            SpectralRadius::Interval { lo, hi } => {
                write!(f, "({:.15}, {:.15})", lo.to_f64().unwrap_or(f64::NAN), hi.to_f64().unwrap_or(f64::NAN))
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum SpectralError {
    #[error("zero polynomial has no spectral radius")]
    ZeroPolynomial,
    #[error("disk root counts stayed degenerate near radius {0} after every nudge")]
    IsolationFailure(f64),
}

/// Target width of isolating intervals.
pub fn isolation_width() -> Rational {
    Rational::new(1.into(), BigInt::from(10u64).pow(13))
}

/// Degenerate disk counts are retried at radii nudged by width / 2^k.
const MAX_NUDGES: u32 = 24;

/// Largest root modulus of `p`, certified with exact arithmetic.
///
/// A rational root `r` of largest modulus among the rational roots is
/// returned exactly when the other roots of the squarefree part lie
/// strictly inside `|z| < r`. Otherwise the radius is bracketed by
/// bisection on disk root counts until the bracket is narrower than
/// [`isolation_width`].
pub fn spectral_radius_exact(p: &IntPolynomial) -> Result<SpectralRadius, SpectralError> {
    let p = p.to_unipoly();
    if p.is_zero() {
        return Err(SpectralError::ZeroPolynomial);
    }
    let sf = p.squarefree_part();
    let n = sf.degree().unwrap_or(0);
    if n == 0 {
        return Ok(SpectralRadius::Exact { value: Rational::zero(), certificate: "no roots".into() });
    }
    let rats = sf.rational_roots();
    if let Some(r) = rats.iter().map(|r| r.abs()).max() {
        let mut rest = sf.clone();
        let mut removed = Vec::new();
        for cand in [r.clone(), -r.clone()] {
            if rats.contains(&cand) && !removed.contains(&cand) {
                let (q, rem) = rest.div_rem(&UniPoly::linear_root(&cand));
                assert!(rem.is_zero());
                rest = q;
                removed.push(cand);
            }
        }
        let k = rest.degree().unwrap_or(0);
        if r.is_zero() && k == 0 {
            return Ok(SpectralRadius::Exact { value: r, certificate: "all roots are zero".into() });
        }
        if !r.is_zero() && (k == 0 || zeros_in_disk(&rest, &r) == Some(k)) {
            let certificate = format!(
                "(λ - {}) divides exactly; the other {k} distinct roots lie strictly inside |z| < {r} (Schur-Cohn count)",
                removed.iter().map(|v| v.to_string()).collect::<Vec<_>>().join(")(λ - "),
            );
            return Ok(SpectralRadius::Exact { value: r, certificate });
        }
    }

    let count = |r: &Rational, width: &Rational| -> Result<(Rational, usize), SpectralError> {
        let mut step = width / Rational::from_integer(4.into());
        for k in 0..MAX_NUDGES {
            let cand = if k == 0 { r.clone() } else { r + &step };
            if cand.is_positive() {
                if let Some(c) = zeros_in_disk(&sf, &cand) {
                    return Ok((cand, c));
                }
            }
            step = -step / Rational::from_integer(2.into());
        }
        Err(SpectralError::IsolationFailure(r.to_f64().unwrap_or(f64::NAN)))
    };
    let mut lo = Rational::zero();
    let (mut hi, c) = count(&sf.root_bound(), &Rational::one())?;
    debug_assert_eq!(c, n, "Cauchy bound encloses every root");
    let target = isolation_width();
    let two = Rational::from_integer(2.into());
    while &hi - &lo >= target {
        let width = &hi - &lo;
        let (mid, c) = count(&((&lo + &hi) / &two), &width)?;
        if mid <= lo || mid >= hi {
            return Err(SpectralError::IsolationFailure(mid.to_f64().unwrap_or(f64::NAN)));
        }
        if c == n {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    Ok(SpectralRadius::Interval { lo, hi })
}

/// `M v` for `v = -K`, and whether it equals `4 v`.
pub fn anticanonical_eigencheck(m: &Matrix5) -> (bool, DivisorClass) {
    let k = DivisorClass::anticanonical();
    let mk = mat_vec(m, &k);
    (mk == 4 * k, mk)
}

/// Whether `l1 | l2`. An invariant fibration would force divisibility, so
/// `false` rules one out.
pub fn fibration_divisibility(l1: u64, l2: u64) -> bool {
    assert!(l1 >= 1 && l2 >= 1, "degrees are positive");
    l2.is_multiple_of(l1)
}

/// A target that is not generic enough to count preimages.
#[derive(Debug, Clone, PartialEq, Error, Serialize)]
pub enum DegenerateSample {
    #[error("the two preimage curves share the component {0}")]
    CommonComponent(String),
    #[error("a preimage lies on the boundary line {0}")]
    AtInfinity(String),
    #[error("eliminant of degree {degree} with {roots} distinct roots; a generic target gives {generic_degree} and {generic_roots}")]
    NonGenericEliminant { degree: usize, roots: usize, generic_degree: usize, generic_roots: usize },
    #[error("the eliminant vanishes identically")]
    ResultantVanishes,
    #[error("unresolved root cluster near x = {0}")]
    Clustered(String),
    #[error("candidate preimage with residual {0:e} above tolerance")]
    Unconfirmed(f64),
}

/// Preimages of one target and the bookkeeping behind the count.
#[derive(Debug, Clone, Serialize)]
pub struct PreimageSample {
    pub target: [String; 2],
    pub resultant_degree: usize,
    /// Distinct roots of the eliminant in `x`.
    pub eliminant_roots: usize,
    /// Back-substituted solutions of both curve equations.
    pub candidates: usize,
    /// Solutions where a denominator vanishes.
    pub spurious: usize,
    pub preimages: Vec<[(f64, f64); 2]>,
    pub count: usize,
    pub max_residual: f64,
}

/// Residual bound for an accepted preimage.
pub const PREIMAGE_TOL: f64 = 1e-8;
/// Relative size below which a denominator counts as vanishing.
const DENOMINATOR_TOL: f64 = 1e-9;
/// Eliminant roots closer than this are an unresolved cluster.
const CLUSTER_TOL: f64 = 1e-7;
/// Newton polishing stops earlier once the step is at rounding level.
const NEWTON_STEPS: usize = 40;

fn rel_eval(p: &Poly, pt: &[Complex64]) -> f64 {
    let scale = p.eval_abs_complex(pt);
    if scale == 0.0 {
        0.0
    } else {
        p.eval_complex(pt).norm() / scale
    }
}

/// `p` with every root shared with `d` removed.
fn saturate(mut p: UniPoly, d: &UniPoly) -> UniPoly {
    loop {
        let g = p.gcd(d);
        if g.degree().unwrap_or(0) == 0 {
            return p;
        }
        p = p.div_rem(&g).0;
    }
}

/// The boundary line of `P1 x P1` carrying a preimage of `target` at which
/// both denominators are nonzero, if any. Affine counts are incomplete for
/// such targets.
fn boundary_preimage(map: &PlaneMap, target: &[Rational; 2]) -> Option<&'static str> {
    for (chart, var, label) in [(Chart::UY, 0, "x = inf"), (Chart::XV, 1, "y = inf")] {
        let m = map.conjugate(chart, Chart::XY);
        let restrict = |p: &Poly| {
            let c0 = p.coefficients_in(var).into_iter().next().unwrap_or_else(|| Poly::zero(p.vars()));
            UniPoly::from_poly(&c0, 1 - var).expect("one variable left")
        };
        let eqs: Vec<UniPoly> =
            (0..2).map(|i| restrict(&(m.comps[i].num() - &m.comps[i].den().scale(&target[i])))).collect();
        let common = eqs[0].gcd(&eqs[1]);
        let common = if common.is_zero() { UniPoly::one() } else { common };
        let genuine = (0..2).fold(common, |g, i| saturate(g, &restrict(m.comps[i].den())));
        if genuine.degree().unwrap_or(0) > 0 {
            return Some(label);
        }
    }
    let m = map.conjugate(Chart::UV, Chart::XY);
    let origin = [Rational::zero(), Rational::zero()];
    let hits = (0..2).all(|i| {
        let f = &m.comps[i];
        !f.den().eval(&origin).is_zero() && (f.num() - &f.den().scale(&target[i])).eval(&origin).is_zero()
    });
    hits.then_some("x = y = inf")
}

/// Counts the affine preimages of `target` under a map `(x, y) -> (x, y)`.
///
/// The curves `N_i - c_i D_i = 0` are intersected by eliminating `y`; each
/// root of the eliminant is paired with the common roots in `y`, polished
/// by Newton's method and accepted when both denominators are nonzero and
/// the map sends it to the target within [`PREIMAGE_TOL`].
pub fn count_preimages(map: &PlaneMap, target: &[Rational; 2]) -> Result<PreimageSample, DegenerateSample> {
    let eqs: Vec<Poly> = (0..2)
        .map(|i| {
            let f = &map.comps[i];
            f.num() - &f.den().scale(&target[i])
        })
        .collect();
    let g = gcd(&eqs[0], &eqs[1]);
    if !g.is_constant() {
        return Err(DegenerateSample::CommonComponent(g.normalized().to_string()));
    }
    if let Some(line) = boundary_preimage(map, target) {
        return Err(DegenerateSample::AtInfinity(line.into()));
    }
    let res = resultant(&eqs[0], &eqs[1], 1);
    if res.is_zero() {
        return Err(DegenerateSample::ResultantVanishes);
    }
    let res = UniPoly::from_poly(&res, 0).expect("eliminant is free of y");
    let sf = res.squarefree_part();
    let xs = sf.complex_roots();
    for (i, a) in xs.iter().enumerate() {
        if xs[i + 1..].iter().any(|b| (a - b).norm() < CLUSTER_TOL * (1.0 + a.norm())) {
            return Err(DegenerateSample::Clustered(format!("{a}")));
        }
    }

    let coeffs_y: Vec<Vec<Poly>> = eqs.iter().map(|e| e.coefficients_in(1)).collect();
    let jac: Vec<[Poly; 2]> = eqs.iter().map(|e| [e.derivative(0), e.derivative(1)]).collect();
    let mut candidates: Vec<[Complex64; 2]> = Vec::new();
    for &x in &xs {
        let at =
            |cs: &Vec<Poly>| -> Vec<Complex64> { cs.iter().map(|c| c.eval_complex(&[x, Complex64::zero()])).collect() };
        // the equation of smaller positive degree in y supplies the candidates
        let mut polys: Vec<Vec<Complex64>> = coeffs_y.iter().map(at).collect();
        polys.retain(|c| c.len() > 1 && c[1..].iter().any(|v| v.norm() > 1e-12 * (1.0 + c[0].norm())));
        polys.sort_by_key(|c| c.len());
        let Some(ys) = polys.first().map(|c| aberth(c)) else { continue };
        for y in ys {
            let mut pt = [x, y];
            for _ in 0..NEWTON_STEPS {
                let f = [eqs[0].eval_complex(&pt), eqs[1].eval_complex(&pt)];
                let j = [
                    [jac[0][0].eval_complex(&pt), jac[0][1].eval_complex(&pt)],
                    [jac[1][0].eval_complex(&pt), jac[1][1].eval_complex(&pt)],
                ];
                let det = j[0][0] * j[1][1] - j[0][1] * j[1][0];
                if det.norm() == 0.0 {
                    break;
                }
                let dx = (f[0] * j[1][1] - f[1] * j[0][1]) / det;
                let dy = (f[1] * j[0][0] - f[0] * j[1][0]) / det;
                if !(dx.is_finite() && dy.is_finite()) {
                    break;
                }
                pt = [pt[0] - dx, pt[1] - dy];
                if dx.norm() + dy.norm() <= 1e-15 * (1.0 + pt[0].norm() + pt[1].norm()) {
                    break;
                }
            }
            if rel_eval(&eqs[0], &pt) < 1e-9 && rel_eval(&eqs[1], &pt) < 1e-9 {
                let dup = candidates.iter().any(|c| (c[0] - pt[0]).norm() + (c[1] - pt[1]).norm() < CLUSTER_TOL);
                if !dup {
                    candidates.push(pt);
                }
            }
        }
    }

    let c: Vec<Complex64> = target.iter().map(|t| Complex64::new(t.to_f64().unwrap(), 0.0)).collect();
    let mut spurious = 0;
    let mut preimages = Vec::new();
    let mut max_residual = 0.0f64;
    for pt in &candidates {
        let dens = [map.comps[0].den(), map.comps[1].den()];
        if dens.iter().any(|d| rel_eval(d, pt) < DENOMINATOR_TOL) {
            spurious += 1;
            continue;
        }
        let img: Vec<Complex64> =
            (0..2).map(|i| map.comps[i].num().eval_complex(pt) / map.comps[i].den().eval_complex(pt)).collect();
        let r = (img[0] - c[0]).norm().max((img[1] - c[1]).norm());
        if r >= PREIMAGE_TOL {
            return Err(DegenerateSample::Unconfirmed(r));
        }
        max_residual = max_residual.max(r);
        preimages.push([(pt[0].re, pt[0].im), (pt[1].re, pt[1].im)]);
    }
    Ok(PreimageSample {
        target: [target[0].to_string(), target[1].to_string()],
        resultant_degree: res.degree().unwrap_or(0),
        eliminant_roots: xs.len(),
        candidates: candidates.len(),
        spurious,
        count: preimages.len(),
        preimages,
        max_residual,
    })
}

#[derive(Debug, Clone, Serialize)]
pub struct ResampleEvent {
    pub sample: usize,
    pub target: [String; 2],
    pub reason: DegenerateSample,
}

/// A high-height target fixing the eliminant shape that generic targets share.
#[derive(Debug, Clone, Serialize)]
pub struct ReferenceTarget {
    pub target: [String; 2],
    pub resultant_degree: usize,
    pub eliminant_roots: usize,
    pub count: usize,
}

#[derive(Debug, Clone, Serialize)]
pub struct TopologicalDegree {
    /// The common count, when every sample agrees.
    pub degree: Option<usize>,
    pub seed: u64,
    pub reference: ReferenceTarget,
    pub samples: Vec<PreimageSample>,
    pub resampled: Vec<ResampleEvent>,
}

#[derive(Debug, Clone, Error)]
pub enum DegreeError {
    #[error("sample {sample}: no generic target after {attempts} attempts")]
    NoGenericTarget { sample: usize, attempts: usize },
    #[error("no usable reference target after {0} attempts")]
    NoReferenceTarget(usize),
    #[error("at least one sample is required")]
    NoSamples,
    #[error(transparent)]
    Map(#[from] MapError),
    #[error(transparent)]
    Spectral(#[from] SpectralError),
}

const MAX_ATTEMPTS: usize = 20;

/// A random rational of small height: numerator in `[-30, 30]`, denominator in `[1, 12]`.
pub fn random_small_rational(rng: &mut impl Rng) -> Rational {
    let n: i64 = rng.gen_range(-30..=30);
    let d: i64 = rng.gen_range(1..=12);
    Rational::new(n.into(), d.into())
}

/// The target drawn for `sample` on its `attempt`-th try.
pub fn sample_target(seed: u64, sample: usize, attempt: usize) -> [Rational; 2] {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(((sample as u64) << 16) | attempt as u64);
    [random_small_rational(&mut rng), random_small_rational(&mut rng)]
}

/// Random stream reserved for reference targets.
const REFERENCE_STREAM: u64 = 1 << 63;
/// Bound on numerators and denominators of reference targets.
const REFERENCE_HEIGHT: i64 = 1_000_000;

/// The reference target for `seed` on its `attempt`-th try.
pub fn reference_target(seed: u64, attempt: usize) -> [Rational; 2] {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(REFERENCE_STREAM | attempt as u64);
    let mut draw = || {
        let n: i64 = rng.gen_range(-REFERENCE_HEIGHT..=REFERENCE_HEIGHT);
        let d: i64 = rng.gen_range(1..=REFERENCE_HEIGHT);
        Rational::new(n.into(), d.into())
    };
    [draw(), draw()]
}

/// Eliminant shape at a high-height random target. Targets on the special
/// curves (images of exceptional curves, boundary lines) lose eliminant
/// degree or distinct roots; a random target of large height avoids them
/// with overwhelming probability.
pub fn reference_eliminant(map: &PlaneMap, seed: u64) -> Result<ReferenceTarget, DegreeError> {
    for attempt in 0..MAX_ATTEMPTS {
        let t = reference_target(seed, attempt);
        if let Ok(s) = count_preimages(map, &t) {
            return Ok(ReferenceTarget {
                target: s.target,
                resultant_degree: s.resultant_degree,
                eliminant_roots: s.eliminant_roots,
                count: s.count,
            });
        }
    }
    Err(DegreeError::NoReferenceTarget(MAX_ATTEMPTS))
}

/// Preimage counts at `samples` random targets. Each sample uses its own
/// random stream, so results do not depend on thread scheduling. A sample
/// whose eliminant shape differs from the reference is resampled.
pub fn topological_degree(map: &PlaneMap, samples: usize, seed: u64) -> Result<TopologicalDegree, DegreeError> {
    if samples == 0 {
        return Err(DegreeError::NoSamples);
    }
    let reference = reference_eliminant(map, seed)?;
    let generic = |s: &PreimageSample| {
        if (s.resultant_degree, s.eliminant_roots) == (reference.resultant_degree, reference.eliminant_roots) {
            Ok(())
        } else {
            Err(DegenerateSample::NonGenericEliminant {
                degree: s.resultant_degree,
                roots: s.eliminant_roots,
                generic_degree: reference.resultant_degree,
                generic_roots: reference.eliminant_roots,
            })
        }
    };
    let per: Vec<Result<(PreimageSample, Vec<ResampleEvent>), DegreeError>> = (0..samples)
        .into_par_iter()
        .map(|i| {
            let mut events = Vec::new();
            for attempt in 0..MAX_ATTEMPTS {
                let t = sample_target(seed, i, attempt);
                match count_preimages(map, &t).and_then(|s| generic(&s).map(|()| s)) {
                    Ok(s) => return Ok((s, events)),
                    Err(reason) => {
                        events.push(ResampleEvent { sample: i, target: [t[0].to_string(), t[1].to_string()], reason })
                    }
                }
            }
            Err(DegreeError::NoGenericTarget { sample: i, attempts: MAX_ATTEMPTS })
        })
        .collect();
    let mut out = TopologicalDegree { degree: None, seed, reference, samples: Vec::new(), resampled: Vec::new() };
    for r in per {
        let (s, ev) = r?;
        out.samples.push(s);
        out.resampled.extend(ev);
    }
    let first = out.samples[0].count;
    if out.samples.iter().all(|s| s.count == first) {
        out.degree = Some(first);
    }
    Ok(out)
}

/// One row of the degree-growth table.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct GrowthRow {
    pub n: u32,
    /// Bidegree of the reduced first component of the n-th iterate.
    pub symbolic: (u32, u32),
    /// First two coordinates of `M^n e_1`.
    pub predicted: (i64, i64),
    /// Numerator bidegree before cancellation of common factors.
    pub unreduced: (u32, u32),
    /// Ratio of successive total degrees.
    pub ratio: Option<f64>,
}

impl GrowthRow {
    pub fn agrees(&self) -> bool {
        (self.symbolic.0 as i64, self.symbolic.1 as i64) == self.predicted
    }
}

/// Largest iterate `degree_growth` will compose.
pub const MAX_GROWTH_N: u32 = 4;

/// Bidegrees of `H^n` for `n = 1..=n_max` beside the predictions of `m`.
pub fn degree_growth(n_max: u32, m: &Matrix5) -> Result<Vec<GrowthRow>, DegreeError> {
    assert!(n_max <= MAX_GROWTH_N, "iterates beyond {MAX_GROWTH_N} are too costly");
    let h = heat_map_xy();
    let mut iterate = h.clone();
    let mut unreduced = h.numerator_bidegrees()[0];
    let mut v = DivisorClass::LX;
    let mut rows: Vec<GrowthRow> = Vec::new();
    for n in 1..=n_max {
        if n > 1 {
            let (next, stats) = h.compose_with_stats(&iterate)?;
            unreduced = stats[0].unreduced_num;
            iterate = next;
        }
        v = mat_vec(m, &v);
        let f = &iterate.comps[0];
        let symbolic = (f.num().degree_in(0).max(f.den().degree_in(0)), f.num().degree_in(1).max(f.den().degree_in(1)));
        let ratio = rows.last().map(|r| (symbolic.0 + symbolic.1) as f64 / (r.symbolic.0 + r.symbolic.1) as f64);
        rows.push(GrowthRow { n, symbolic, predicted: (v.0[0], v.0[1]), unreduced, ratio });
    }
    Ok(rows)
}

/// Summary of the degree computations for one matrix.
#[derive(Debug, Clone, Serialize)]
pub struct DegreeReport {
    pub lambda1: String,
    pub lambda1_certificate: String,
    pub lambda2: Option<usize>,
    pub lambda2_samples: usize,
    pub char_poly: IntPolynomial,
    pub eigencheck: bool,
    /// Whether `lambda1 | lambda2`.
    pub divisibility: Option<bool>,
    pub degree_sequence: Vec<GrowthRow>,
}

/// Recomputes every entry from `m`; nothing is cached between calls.
pub fn degree_report(m: &Matrix5, samples: usize, seed: u64, n_max: u32) -> Result<DegreeReport, DegreeError> {
    let cp = char_poly(m);
    let rho = spectral_radius_exact(&cp)?;
    let lambda2 = if samples > 0 { topological_degree(&heat_map_xy(), samples, seed)?.degree } else { None };
    let l1 = rho.exact().filter(|r| r.is_integer()).and_then(|r| r.to_integer().to_u64());
    let divisibility = match (l1, lambda2) {
        (Some(a), Some(b)) if a >= 1 && b >= 1 => Some(fibration_divisibility(a, b as u64)),
        _ => None,
    };
    let lambda1_certificate = match &rho {
        SpectralRadius::Exact { certificate, .. } => certificate.clone(),
        SpectralRadius::Interval { .. } => "isolating interval".into(),
    };
    Ok(DegreeReport {
        lambda1: rho.to_string(),
        lambda1_certificate,
        lambda2,
        lambda2_samples: samples,
        char_poly: cp,
        eigencheck: anticanonical_eigencheck(m).0,
        divisibility,
        degree_sequence: degree_growth(n_max, m)?,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::charts::curves::xy;
    use crate::charts::Chart;
    use crate::cohomology::REFERENCE_MATRIX;
    use crate::poly::{int, RatFn};

    fn ident(k: i64) -> [[i64; 5]; 5] {
        std::array::from_fn(|i| std::array::from_fn(|j| if i == j { k } else { 0 }))
    }

    #[test]
    fn characteristic_polynomials() {
        let cp = char_poly(&REFERENCE_MATRIX);
        assert_eq!(cp, IntPolynomial::from_roots(&[(4, 1), (-1, 4)]));
        assert_eq!(cp, IntPolynomial::from_i64(&[-4, -15, -20, -10, 0, 1]));
        assert_eq!(cp.to_string(), "λ^5 - 10λ^3 - 20λ^2 - 15λ - 4");
        assert_eq!(char_poly(&ident(1)), IntPolynomial::from_roots(&[(1, 5)]));
        assert_eq!(char_poly(&[[0i64; 5]; 5]), IntPolynomial::from_i64(&[0, 0, 0, 0, 0, 1]));
        let z = cp.eval_matrix(&to_big(&REFERENCE_MATRIX));
        assert!(z.iter().flatten().all(|v| v.is_zero()));
    }

    #[test]
    fn spectral_radii() {
        let r = spectral_radius_exact(&char_poly(&REFERENCE_MATRIX)).unwrap();
        assert_eq!(r.exact(), Some(&int(4)));
        let r = spectral_radius_exact(&IntPolynomial::from_roots(&[(1, 5)])).unwrap();
        assert_eq!(r.exact(), Some(&int(1)));
        let SpectralRadius::Interval { lo, hi } = spectral_radius_exact(&IntPolynomial::from_i64(&[-2, 0, 1])).unwrap()
        else {
            panic!("sqrt 2 is irrational")
        };
        assert!(&hi - &lo < Rational::new(1.into(), BigInt::from(10u64).pow(12)));
        assert!(&lo * &lo < int(2) && &hi * &hi > int(2));
        // complex pair of modulus sqrt 5 dominates the rational root 1
        let p = IntPolynomial::from_i64(&[-5, 7, -3, 1]); // (t - 1)(t^2 - 2t + 5)
        let r = spectral_radius_exact(&p).unwrap();
        assert!((r.approx() - 5f64.sqrt()).abs() < 1e-12);
        assert!(r.exact().is_none());
    }

    #[test]
    fn disk_counts() {
        let p = UniPoly::from_ints(&[-5, 7, -3, 1]);
        assert_eq!(zeros_in_disk(&p, &int(2)), Some(1));
        assert_eq!(zeros_in_disk(&p, &int(3)), Some(3));
        assert_eq!(zeros_in_disk(&p, &Rational::new(1.into(), 2.into())), Some(0));
        assert_eq!(zeros_in_disk(&p, &int(1)), None);
    }

    #[test]
    fn eigencheck_and_divisibility() {
        let (ok, v) = anticanonical_eigencheck(&REFERENCE_MATRIX);
        assert!(ok);
        assert_eq!(v, DivisorClass([8, 8, -4, -4, -4]));
        assert!(!anticanonical_eigencheck(&ident(1)).0);
        assert!(anticanonical_eigencheck(&ident(4)).0);
        assert!(!fibration_divisibility(4, 6));
        assert!(fibration_divisibility(2, 6));
        assert!(fibration_divisibility(1, 17));
    }

    #[test]
    fn preimages_of_heat_map() {
        let h = heat_map_xy();
        let t = topological_degree(&h, 5, 7).unwrap();
        assert_eq!(t.degree, Some(6));
        for s in &t.samples {
            assert!(s.max_residual < PREIMAGE_TOL);
        }
        let err = count_preimages(&h, &[int(1), int(1)]).unwrap_err();
        assert!(matches!(err, DegenerateSample::CommonComponent(_)), "{err}");
    }

    #[test]
    fn preimages_of_translation() {
        let v = Chart::XY.vars();
        let m = PlaneMap::new(Chart::XY, Chart::XY, RatFn::from_poly(xy("x + 1")), RatFn::var(&v, 1));
        let t = topological_degree(&m, 3, 1).unwrap();
        assert_eq!(t.degree, Some(1));
    }

    #[test]
    fn growth_first_two() {
        let rows = degree_growth(2, &REFERENCE_MATRIX).unwrap();
        assert_eq!(rows[0].symbolic, (3, 4));
        assert_eq!(rows[1].symbolic, (13, 12));
        assert!(rows.iter().all(|r| r.agrees()));
        assert!(rows[1].unreduced.0 + rows[1].unreduced.1 > 25);
    }
}
