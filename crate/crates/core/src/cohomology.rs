//! Divisor classes on the blown-up surface in the ordered basis
//! `(pi*L_x, pi*L_y, E1, E2, E3)` and the pullback of the lifted map.
//!
//! Pullbacks are computed from orders of vanishing: a curve `D` contributes
//! `k [D]` to the pullback of a target curve `T = {t = 0}` when the
//! numerator of `t` after the map vanishes to order `k` along `D` and the
//! coordinate along `T` stays finite on `D`. When that coordinate is
//! infinite along `D`, the image of `D` is a single point of `T` or lies
//! off `T`, so `D` is excluded with a logged reason.

use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};

use serde::Serialize;
use thiserror::Error;

use crate::blowup::Exceptional;
use crate::charts::{curves, heat_map, transport, Chart, P1Value};
use crate::poly::{gcd, int, Poly, PolyError};

/// Integer coefficients in the basis `(pi*L_x, pi*L_y, E1, E2, E3)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
pub struct DivisorClass(pub [i64; 5]);

impl DivisorClass {
    pub const ZERO: DivisorClass = DivisorClass([0; 5]);
    pub const LX: DivisorClass = DivisorClass([1, 0, 0, 0, 0]);
    pub const LY: DivisorClass = DivisorClass([0, 1, 0, 0, 0]);

    pub fn exceptional(e: Exceptional) -> Self {
        let mut c = [0; 5];
        c[2 + e.index()] = 1;
        DivisorClass(c)
    }

    pub fn basis(b: BasisElement) -> Self {
        match b {
            BasisElement::Lx => Self::LX,
            BasisElement::Ly => Self::LY,
            BasisElement::E(e) => Self::exceptional(e),
        }
    }

    /// `-K = 2 pi*L_x + 2 pi*L_y - E1 - E2 - E3`.
    pub fn anticanonical() -> Self {
        DivisorClass([2, 2, -1, -1, -1])
    }

    pub fn coeffs(&self) -> [i64; 5] {
        self.0
    }
}

impl Add for DivisorClass {
    type Output = DivisorClass;
    fn add(self, o: DivisorClass) -> DivisorClass {
        DivisorClass(std::array::from_fn(|i| self.0[i] + o.0[i]))
    }
}

impl Sub for DivisorClass {
    type Output = DivisorClass;
    fn sub(self, o: DivisorClass) -> DivisorClass {
        self + (-o)
    }
}

impl Neg for DivisorClass {
    type Output = DivisorClass;
    fn neg(self) -> DivisorClass {
        DivisorClass(self.0.map(|c| -c))
    }
}

impl Mul<DivisorClass> for i64 {
    type Output = DivisorClass;
    fn mul(self, c: DivisorClass) -> DivisorClass {
        DivisorClass(c.0.map(|v| self * v))
    }
}

impl std::iter::Sum for DivisorClass {
    fn sum<I: Iterator<Item = DivisorClass>>(iter: I) -> DivisorClass {
        iter.fold(DivisorClass::ZERO, |a, b| a + b)
    }
}

impl fmt::Display for DivisorClass {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let c = self.0;
        write!(f, "({},{},{},{},{})", c[0], c[1], c[2], c[3], c[4])
    }
}

/// Intersection pairing: `L_x . L_y = 1`, `L_x^2 = L_y^2 = 0`,
/// `E_i . E_j = -delta_ij`, base classes orthogonal to the `E_i`.
pub fn intersect(a: &DivisorClass, b: &DivisorClass) -> i64 {
    let (a, b) = (a.0, b.0);
    a[0] * b[1] + a[1] * b[0] - a[2] * b[2] - a[3] * b[3] - a[4] * b[4]
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
pub enum BasisElement {
    Lx,
    Ly,
    E(Exceptional),
}

impl BasisElement {
    pub const ALL: [BasisElement; 5] = [
        BasisElement::Lx,
        BasisElement::Ly,
        BasisElement::E(Exceptional::E1),
        BasisElement::E(Exceptional::E2),
        BasisElement::E(Exceptional::E3),
    ];
}

impl fmt::Display for BasisElement {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            BasisElement::Lx => write!(f, "pi*L_x"),
            BasisElement::Ly => write!(f, "pi*L_y"),
            BasisElement::E(e) => write!(f, "{e}"),
        }
    }
}

#[derive(Debug, Error)]
pub enum CohomologyError {
    #[error("pullback of {target}: unexplained component {residual}")]
    UnexplainedComponent { target: String, residual: String },
    #[error("the two non-functoriality classes coincide: {0}")]
    WitnessesEqual(DivisorClass),
    #[error(transparent)]
    Poly(#[from] PolyError),
}

/// `(deg_x p, deg_y p, 0, 0, 0)` for `p` in a base chart.
pub fn class_in_base(p: &Poly) -> Result<DivisorClass, PolyError> {
    let (dx, dy) = p.bidegree()?;
    Ok(DivisorClass([dx as i64, dy as i64, 0, 0, 0]))
}

/// Multiplicities at `p1, p2, p3` of the curve `{p = 0}` given in a base chart.
pub fn point_multiplicities(p: &Poly, chart: Chart) -> Result<[u32; 3], PolyError> {
    let mut out = [0; 3];
    for e in Exceptional::ALL {
        let (center_chart, coords) = e.center();
        let q = transport(p, chart, center_chart);
        out[e.index()] = q.multiplicity_at_point(&coords)?;
    }
    Ok(out)
}

/// Class of the proper transform of `{p = 0}`, `p` in a base chart.
pub fn proper_transform_class(p: &Poly, chart: Chart) -> Result<DivisorClass, PolyError> {
    assert!(chart.is_base(), "proper transforms start from a base chart");
    let base = class_in_base(p)?;
    let m = point_multiplicities(p, chart)?;
    Ok(base - Exceptional::ALL.iter().map(|&e| m[e.index()] as i64 * DivisorClass::exceptional(e)).sum())
}

/// The curves whose multiplicities are tabulated, in table order.
pub const TABLE_CURVES: [usize; 5] = [2, 3, 4, 6, 7];

/// Multiplicities of `C2, C3, C4, C6, C7` at `p1, p2, p3`.
pub fn multiplicity_table() -> Vec<(String, [u32; 3])> {
    TABLE_CURVES
        .iter()
        .map(|&k| (format!("C{k}"), point_multiplicities(&curves::c(k), Chart::XY).expect("nonzero curve")))
        .collect()
}

/// A curve contributing to a pullback.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct PullbackTerm {
    pub label: String,
    pub class: DivisorClass,
    pub multiplicity: u32,
    /// The target curve it maps onto.
    pub onto: String,
}

/// A factor of the target coordinate's numerator that does not map onto the target.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Exclusion {
    pub factor: String,
    pub target: String,
    pub reason: String,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Pullback {
    pub element: BasisElement,
    pub terms: Vec<PullbackTerm>,
    pub excluded: Vec<Exclusion>,
    pub class: DivisorClass,
}

/// A curve `T = {t = 0}` on the surface: `t` is component `coord` of the
/// target chart, and component `1 - coord` is the coordinate along `T`.
struct Target {
    name: String,
    chart: Chart,
    coord: usize,
}

impl Target {
    fn exceptional(e: Exceptional) -> Self {
        Target { name: e.to_string(), chart: e.chart(), coord: 0 }
    }

    /// Proper transform of `{x = 0}` (`coord = 0`) or `{y = 0}` (`coord = 1`).
    fn axis(coord: usize) -> Self {
        let name = if coord == 0 { "{x=0}~" } else { "{y=0}~" };
        Target { name: name.to_string(), chart: Chart::XY, coord }
    }
}

/// Source curves outside the `(x, y)` chart: the lines at infinity and the
/// exceptional divisors, each the zero set of variable `var` of `chart`.
fn special_sources() -> Vec<(String, Chart, usize, DivisorClass)> {
    let line = |chart: Chart, var: usize| {
        let p = Poly::var(&chart.vars(), var);
        proper_transform_class(&p, chart).expect("coordinate line")
    };
    let mut out = vec![
        ("{x=inf}~".to_string(), Chart::UY, 0, line(Chart::UY, 0)),
        ("{y=inf}~".to_string(), Chart::XV, 1, line(Chart::XV, 1)),
    ];
    for e in Exceptional::ALL {
        out.push((e.to_string(), e.chart(), 0, DivisorClass::exceptional(e)));
    }
    out
}

const CATALOG: [usize; 7] = [1, 2, 3, 4, 5, 6, 7];

fn pullback_of_target(t: &Target) -> Result<(Vec<PullbackTerm>, Vec<Exclusion>), CohomologyError> {
    let mut terms = Vec::new();
    let mut excluded = Vec::new();
    let fiber = 1 - t.coord;

    let m = heat_map(Chart::XY, t.chart);
    let num = m.comps[t.coord].num();
    let fden = m.comps[fiber].den();
    let mut residual = num.clone();
    for k in CATALOG {
        let c = curves::c(k);
        let e = num.vanishing_order(&c)?;
        if e == 0 {
            continue;
        }
        residual = residual.exact_divide(&c.pow(e)).expect("order computed");
        if fden.exact_divide(&c).is_ok() {
            excluded.push(Exclusion {
                factor: format!("C{k}"),
                target: t.name.clone(),
                reason: "coordinate along the target is infinite on it".into(),
            });
        } else {
            terms.push(PullbackTerm {
                label: format!("C{k}~"),
                class: proper_transform_class(&c, Chart::XY)?,
                multiplicity: e,
                onto: t.name.clone(),
            });
        }
    }
    loop {
        let g = gcd(&residual, fden);
        if g.is_constant() {
            break;
        }
        residual = residual.exact_divide(&g).expect("gcd divides");
        excluded.push(Exclusion {
            factor: g.normalized().to_string(),
            target: t.name.clone(),
            reason: "divides the denominator of the coordinate along the target".into(),
        });
    }
    if !residual.is_constant() {
        return Err(CohomologyError::UnexplainedComponent { target: t.name.clone(), residual: residual.to_string() });
    }

    for (label, chart, var, class) in special_sources() {
        let m = heat_map(chart, t.chart);
        let num = m.comps[t.coord].num();
        if num.is_zero() {
            continue;
        }
        let v = Poly::var(&chart.vars(), var);
        let e = num.vanishing_order(&v)?;
        if e == 0 {
            continue;
        }
        if m.comps[fiber].den().exact_divide(&v).is_ok() {
            excluded.push(Exclusion {
                factor: label,
                target: t.name.clone(),
                reason: "coordinate along the target is infinite on it".into(),
            });
        } else {
            terms.push(PullbackTerm { label, class, multiplicity: e, onto: t.name.clone() });
        }
    }
    Ok((terms, excluded))
}

/// Pullback of one basis element by the lifted map.
///
/// For `E_i` this is the pullback of the divisor itself. For `pi*L_x` the
/// line `{x = 0}` is used: its total transform is its proper transform plus
/// the exceptional divisors over the blown-up points it contains, and each
/// part is pulled back separately (likewise `{y = 0}` for `pi*L_y`).
pub fn pullback_basis_class(b: BasisElement) -> Result<Pullback, CohomologyError> {
    let mut targets = Vec::new();
    match b {
        BasisElement::E(e) => targets.push(Target::exceptional(e)),
        BasisElement::Lx | BasisElement::Ly => {
            let coord = if b == BasisElement::Lx { 0 } else { 1 };
            targets.push(Target::axis(coord));
            for e in Exceptional::ALL {
                if e.center_xy()[coord] == P1Value::Finite(int(0)) {
                    targets.push(Target::exceptional(e));
                }
            }
        }
    }
    let mut terms = Vec::new();
    let mut excluded = Vec::new();
    for t in &targets {
        let (tm, ex) = pullback_of_target(t)?;
        terms.extend(tm);
        excluded.extend(ex);
    }
    let class = terms.iter().map(|t| t.multiplicity as i64 * t.class).sum();
    Ok(Pullback { element: b, terms, excluded, class })
}

/// Rows of a 5x5 integer matrix.
pub type Matrix5 = [[i64; 5]; 5];

/// The pullback matrix acting on column vectors, as printed with the
/// computation it summarizes.
pub const REFERENCE_MATRIX: Matrix5 =
    [[3, 4, 2, 2, 2], [4, 3, 2, 2, 2], [-2, -2, -2, -1, -1], [-2, -2, -1, -2, -1], [-2, -2, -1, -1, -2]];

/// The matrix whose column `j` is the pullback of basis element `j`.
pub fn pullback_matrix() -> Result<(Matrix5, Vec<Pullback>), CohomologyError> {
    let pulls = BasisElement::ALL.iter().map(|&b| pullback_basis_class(b)).collect::<Result<Vec<_>, _>>()?;
    let mut m = [[0i64; 5]; 5];
    for (j, p) in pulls.iter().enumerate() {
        for (i, row) in m.iter_mut().enumerate() {
            row[j] = p.class.0[i];
        }
    }
    Ok((m, pulls))
}

pub fn mat_vec(m: &Matrix5, v: &DivisorClass) -> DivisorClass {
    DivisorClass(std::array::from_fn(|i| (0..5).map(|j| m[i][j] * v.0[j]).sum()))
}

/// Two classes that would agree if pulling back commuted with blowing down.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct NonFunctoriality {
    /// Class of the base pullback of `L_y` on `P1 x P1`, as `(deg_x, deg_y)`.
    pub base_pullback: (i64, i64),
    /// Total transform of the base pullback: proper transforms of its
    /// components plus their multiplicities at the blown-up points.
    pub first: DivisorClass,
    /// Pullback of the total transform of `L_y` by the lifted map.
    pub second: DivisorClass,
    /// Components of the base pullback with their exponents.
    pub components: Vec<(String, u32)>,
}

/// Compares the total transform of the base pullback of `L_y` with the
/// pullback of `pi*L_y` by the lifted map; they must differ.
pub fn non_functoriality_witness() -> Result<NonFunctoriality, CohomologyError> {
    let h = heat_map(Chart::XY, Chart::XY);
    let num = h.comps[1].num();
    let mut components = Vec::new();
    let mut base = DivisorClass::ZERO;
    let mut first = DivisorClass::ZERO;
    for k in CATALOG {
        let c = curves::c(k);
        let e = num.vanishing_order(&c)?;
        if e == 0 {
            continue;
        }
        components.push((format!("C{k}"), e));
        base = base + e as i64 * class_in_base(&c)?;
        let mult = point_multiplicities(&c, Chart::XY)?;
        let correction: DivisorClass =
            Exceptional::ALL.iter().map(|&x| mult[x.index()] as i64 * DivisorClass::exceptional(x)).sum();
        first = first + e as i64 * (proper_transform_class(&c, Chart::XY)? + correction);
    }
    let second = pullback_basis_class(BasisElement::Ly)?.class;
    if first == second {
        return Err(CohomologyError::WitnessesEqual(first));
    }
    Ok(NonFunctoriality { base_pullback: (base.0[0], base.0[1]), first, second, components })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn dc(v: [i64; 5]) -> DivisorClass {
        DivisorClass(v)
    }

    #[test]
    fn pairing() {
        assert_eq!(intersect(&DivisorClass::LX, &DivisorClass::LY), 1);
        let e1 = DivisorClass::exceptional(Exceptional::E1);
        assert_eq!(intersect(&e1, &e1), -1);
        let k = DivisorClass::anticanonical();
        assert_eq!(intersect(&k, &k), 5);
    }

    #[test]
    fn base_classes() {
        assert_eq!(class_in_base(&curves::c(6)).unwrap(), dc([1, 2, 0, 0, 0]));
        assert_eq!(class_in_base(&curves::c(3)).unwrap(), dc([2, 2, 0, 0, 0]));
        assert_eq!(class_in_base(&curves::xy("x - 7")).unwrap(), dc([1, 0, 0, 0, 0]));
    }

    #[test]
    fn proper_transforms() {
        let pt = |k| proper_transform_class(&curves::c(k), Chart::XY).unwrap();
        assert_eq!(pt(1), dc([1, 1, -1, -1, -1]));
        assert_eq!(pt(2), dc([1, 1, -1, 0, 0]));
        assert_eq!(pt(3), dc([2, 2, -1, -2, -1]));
        assert_eq!(pt(4), dc([2, 2, -1, -1, -2]));
        assert_eq!(pt(6), dc([1, 2, -1, -1, -1]));
        assert_eq!(pt(7), dc([2, 1, -1, -1, -1]));
        assert_eq!(proper_transform_class(&curves::xy("x - 7"), Chart::XY).unwrap(), dc([1, 0, 0, 0, 0]));
        let u = Poly::var(&Chart::UY.vars(), 0);
        assert_eq!(proper_transform_class(&u, Chart::UY).unwrap(), dc([1, 0, 0, -1, 0]));
    }

    #[test]
    fn table() {
        let t = multiplicity_table();
        let rows: Vec<[u32; 3]> = t.iter().map(|r| r.1).collect();
        assert_eq!(rows, vec![[1, 0, 0], [1, 2, 1], [1, 1, 2], [1, 1, 1], [1, 1, 1]]);
    }

    #[test]
    fn pullbacks_and_matrix() {
        let lx = pullback_basis_class(BasisElement::Lx).unwrap();
        assert_eq!(lx.class, dc([3, 4, -2, -2, -2]));
        let labels: Vec<&str> = lx.terms.iter().map(|t| t.label.as_str()).collect();
        assert_eq!(labels, ["C6~", "E3", "C4~"]);
        let e1 = pullback_basis_class(BasisElement::E(Exceptional::E1)).unwrap();
        assert_eq!(e1.class, dc([2, 2, -2, -1, -1]));
        assert!(e1.excluded.iter().any(|x| x.factor == "x*y - y - 3"));
        let e2 = pullback_basis_class(BasisElement::E(Exceptional::E2)).unwrap();
        assert_eq!(e2.class, dc([2, 2, -1, -2, -1]));
        let (m, _) = pullback_matrix().unwrap();
        assert_eq!(m, REFERENCE_MATRIX);
        let sums: Vec<i64> = m.iter().map(|r| r.iter().sum()).collect();
        assert_eq!(sums, vec![13, 13, -8, -8, -8]);
    }

    #[test]
    fn e2_coefficient_in_ly_pullback() {
        let ly = pullback_basis_class(BasisElement::Ly).unwrap();
        let e2 = ly.terms.iter().find(|t| t.label == "E2").unwrap();
        assert_eq!(e2.multiplicity, 1);
        assert_eq!(e2.onto, "{y=0}~");
    }

    #[test]
    fn non_functoriality() {
        let w = non_functoriality_witness().unwrap();
        assert_eq!(w.base_pullback, (4, 3));
        assert_eq!(w.first, dc([4, 3, 0, 0, 0]));
        assert_eq!(w.second, dc([4, 3, -2, -2, -2]));
    }
}
