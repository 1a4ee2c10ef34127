//! Python bindings for `pentaheat-core`.
//!
//! Rationals cross the boundary as `fractions.Fraction` on the way out and as
//! anything whose `str()` parses as `p/q` on the way in (int, Fraction, str).

use pyo3::exceptions::PyValueError;
use pyo3::prelude::*;
use pyo3::types::PyBytes;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use pentaheat_core::basin::{self, RenderConfig};
use pentaheat_core::charts::{heat_map_xy, P1Value, PlaneMap};
use pentaheat_core::cohomology::{self, REFERENCE_MATRIX};
use pentaheat_core::degrees::{self, char_poly, spectral_radius_exact, MAX_GROWTH_N};
use pentaheat_core::pentagon::{self, Polygon, ProjPoint};
use pentaheat_core::poly::{self, vars, Rational};
use pentaheat_core::report::{self, VerifyOptions};

fn value_err(e: impl std::fmt::Display) -> PyErr {
    PyValueError::new_err(e.to_string())
}

fn to_rational(obj: &Bound<'_, PyAny>) -> PyResult<Rational> {
    let text = obj.str()?.to_string();
    text.trim().parse::<Rational>().map_err(|_| PyValueError::new_err(format!("not a rational: {text:?}")))
}

fn to_fraction<'py>(py: Python<'py>, r: &Rational) -> PyResult<Bound<'py, PyAny>> {
    py.import("fractions")?.getattr("Fraction")?.call1((r.to_string(),))
}

fn p1_to_py<'py>(py: Python<'py>, v: &P1Value) -> PyResult<Bound<'py, PyAny>> {
    match v {
        P1Value::Finite(r) => to_fraction(py, r),
        P1Value::Infinity => Ok(py.None().into_bound(py)),
    }
}

fn json_to_py<'py>(py: Python<'py>, text: &str) -> PyResult<Bound<'py, PyAny>> {
    py.import("json")?.call_method1("loads", (text,))
}

/// Polynomial with rational coefficients in `x, y`.
#[pyclass(name = "Poly", frozen)]
struct PyPoly(poly::Poly);

#[pymethods]
impl PyPoly {
    #[new]
    fn new(text: &str) -> PyResult<Self> {
        poly::Poly::parse(&vars(&["x", "y"]), text).map(PyPoly).map_err(value_err)
    }

    fn __str__(&self) -> String {
        self.0.to_string()
    }

    fn __repr__(&self) -> String {
        format!("Poly({:?})", self.0.to_string())
    }

    fn __eq__(&self, other: &Self) -> bool {
        self.0 == other.0
    }

    fn __add__(&self, other: &Self) -> Self {
        PyPoly(&self.0 + &other.0)
    }

    fn __sub__(&self, other: &Self) -> Self {
        PyPoly(&self.0 - &other.0)
    }

    fn __mul__(&self, other: &Self) -> Self {
        PyPoly(&self.0 * &other.0)
    }

    fn __pow__(&self, k: u32, _modulo: Option<Py<PyAny>>) -> Self {
        PyPoly(self.0.pow(k))
    }

    /// Quotient when `other` divides exactly; `ValueError` otherwise.
    fn exact_divide(&self, other: &Self) -> PyResult<Self> {
        self.0.exact_divide(&other.0).map(PyPoly).map_err(value_err)
    }

    fn vanishing_order(&self, factor: &Self) -> PyResult<u32> {
        self.0.vanishing_order(&factor.0).map_err(value_err)
    }

    fn multiplicity_at(&self, x: &Bound<'_, PyAny>, y: &Bound<'_, PyAny>) -> PyResult<u32> {
        self.0.multiplicity_at_point(&[to_rational(x)?, to_rational(y)?]).map_err(value_err)
    }

    fn bidegree(&self) -> Option<(u32, u32)> {
        self.0.bidegree().ok()
    }

    fn eval<'py>(&self, py: Python<'py>, x: &Bound<'py, PyAny>, y: &Bound<'py, PyAny>) -> PyResult<Bound<'py, PyAny>> {
        to_fraction(py, &self.0.eval(&[to_rational(x)?, to_rational(y)?]))
    }

    fn gcd(&self, other: &Self) -> Self {
        PyPoly(poly::gcd(&self.0, &other.0))
    }

    /// Resultant eliminating `var` (`"x"` or `"y"`).
    fn resultant(&self, other: &Self, var: &str) -> PyResult<Self> {
        let idx = match var {
            "x" => 0,
            "y" => 1,
            _ => return Err(PyValueError::new_err("var must be \"x\" or \"y\"")),
        };
        Ok(PyPoly(poly::resultant(&self.0, &other.0, idx)))
    }
}

/// A rational self-map of `P1 x P1`, given in the `(x, y)` chart.
#[pyclass(name = "HeatMap", frozen)]
struct PyHeatMap(PlaneMap);

#[pymethods]
impl PyHeatMap {
    #[new]
    fn new() -> Self {
        PyHeatMap(heat_map_xy())
    }

    fn __repr__(&self) -> String {
        format!("{:?}", self.0)
    }

    /// Exact image as a pair of Fractions, `None` standing for infinity.
    /// Raises `ValueError` at an indeterminacy point.
    fn __call__<'py>(
        &self,
        py: Python<'py>,
        x: &Bound<'py, PyAny>,
        y: &Bound<'py, PyAny>,
    ) -> PyResult<(Bound<'py, PyAny>, Bound<'py, PyAny>)> {
        let pt = [to_rational(x)?, to_rational(y)?];
        let [a, b] = self
            .0
            .evaluate_xy(&pt)
            .ok_or_else(|| PyValueError::new_err(format!("({}, {}) is an indeterminacy point", pt[0], pt[1])))?;
        Ok((p1_to_py(py, &a)?, p1_to_py(py, &b)?))
    }

    fn evaluate_float(&self, x: f64, y: f64) -> (f64, f64) {
        let [a, b] = self.0.evaluate_f64(&[x, y]);
        (a, b)
    }

    /// Reduced numerator bidegrees of both components.
    fn numerator_bidegrees(&self) -> [(u32, u32); 2] {
        self.0.numerator_bidegrees()
    }

    /// The `n`-th iterate, reduced after each composition.
    fn iterate(&self, n: u32) -> PyResult<Self> {
        if n == 0 {
            return Err(PyValueError::new_err("n must be positive"));
        }
        let mut acc = self.0.clone();
        for _ in 1..n {
            acc = self.0.compose_reduce(&acc).map_err(value_err)?;
        }
        Ok(PyHeatMap(acc))
    }

    fn is_reflection_symmetric(&self) -> PyResult<bool> {
        self.0.check_reflection_symmetry().map_err(value_err)
    }
}

/// A polygon in the projective plane with exact rational vertices.
#[pyclass(name = "Polygon", frozen)]
struct PyPolygon(Polygon<Rational>);

fn point_to_py<'py>(py: Python<'py>, p: &ProjPoint<Rational>) -> PyResult<Vec<Bound<'py, PyAny>>> {
    p.coords().iter().map(|c| to_fraction(py, c)).collect()
}

impl PyPolygon {
    // the core asserts on pentagons here
    fn require_pentagon(&self) -> PyResult<()> {
        match self.0.len() {
            5 => Ok(()),
            n => Err(PyValueError::new_err(format!("expected a pentagon, got a {n}-gon"))),
        }
    }

    fn class(&self) -> PyResult<ProjPoint<Rational>> {
        self.require_pentagon()?;
        pentagon::normalize(&self.0).map_err(value_err)
    }
}

#[pymethods]
impl PyPolygon {
    /// Vertices as `(x, y)` affine pairs or `(x, y, z)` homogeneous triples.
    #[new]
    fn new(vertices: Vec<Vec<Bound<'_, PyAny>>>) -> PyResult<Self> {
        let mut pts = Vec::with_capacity(vertices.len());
        for v in &vertices {
            let c: Vec<Rational> = v.iter().map(to_rational).collect::<PyResult<_>>()?;
            let p = match c.as_slice() {
                [x, y] => ProjPoint::affine(x.clone(), y.clone()),
                [x, y, z] => ProjPoint::new([x.clone(), y.clone(), z.clone()]).map_err(value_err)?,
                _ => return Err(PyValueError::new_err("each vertex needs 2 or 3 coordinates")),
            };
            pts.push(p);
        }
        Polygon::new(pts).map(PyPolygon).map_err(value_err)
    }

    /// A random convex pentagon from a seeded stream.
    #[staticmethod]
    fn random_convex(seed: u64) -> Self {
        PyPolygon(pentagon::random_convex_pentagon(&mut ChaCha8Rng::seed_from_u64(seed)))
    }

    fn __len__(&self) -> usize {
        self.0.len()
    }

    fn __str__(&self) -> String {
        self.0.to_string()
    }

    fn vertices<'py>(&self, py: Python<'py>) -> PyResult<Vec<Vec<Bound<'py, PyAny>>>> {
        self.0.vertices().iter().map(|p| point_to_py(py, p)).collect()
    }

    fn is_convex(&self) -> bool {
        self.0.is_convex()
    }

    /// Vertex `k` goes to the projective midpoint of edge `k, k + 1`.
    fn heat_step(&self) -> PyResult<Self> {
        pentagon::heat_step(&self.0).map(PyPolygon).map_err(value_err)
    }

    /// Canonical representative of the projective class, as a homogeneous triple.
    fn normalize<'py>(&self, py: Python<'py>) -> PyResult<Vec<Bound<'py, PyAny>>> {
        let p = self.class()?;
        point_to_py(py, &p)
    }

    fn distance_to_regular(&self) -> PyResult<f64> {
        Ok(pentagon::distance_to_regular(&self.class()?))
    }

    /// Steps needed to come within `tol` of the regular class.
    #[pyo3(signature = (tol=1e-9, max_iter=200))]
    fn converge(&self, tol: f64, max_iter: usize) -> PyResult<usize> {
        self.require_pentagon()?;
        pentagon::converge_to_regular(&self.0, tol, max_iter).map_err(value_err)
    }
}

/// The full verification pipeline; returns the certificate as a dict.
#[pyfunction]
#[pyo3(signature = (seed=1, samples=5, growth_n=3, skip=Vec::new()))]
fn verify<'py>(
    py: Python<'py>,
    seed: u64,
    samples: usize,
    growth_n: u32,
    skip: Vec<String>,
) -> PyResult<Bound<'py, PyAny>> {
    let opts = VerifyOptions { seed, samples, growth_n, skip: skip.into_iter().collect(), ..VerifyOptions::default() };
    opts.validate().map_err(value_err)?;
    let cert = py.detach(|| report::verify(&opts)).map_err(value_err)?;
    json_to_py(py, &cert.to_json())
}

/// Pullback matrix computed from the blow-up model, rows indexed by
/// `(Lx, Ly, E1, E2, E3)`.
#[pyfunction]
fn pullback_matrix(py: Python<'_>) -> PyResult<[[i64; 5]; 5]> {
    py.detach(cohomology::pullback_matrix).map(|(m, _)| m).map_err(value_err)
}

#[pyfunction]
fn reference_matrix() -> [[i64; 5]; 5] {
    REFERENCE_MATRIX
}

/// Integer coefficients of `det(tI - M)`, lowest degree first.
#[pyfunction]
#[pyo3(signature = (matrix=None))]
fn characteristic_polynomial(matrix: Option<[[i64; 5]; 5]>) -> Vec<i64> {
    char_poly(&matrix.unwrap_or(REFERENCE_MATRIX)).coeffs().iter().map(|c| c.try_into().unwrap_or(i64::MAX)).collect()
}

/// Spectral radius as a Fraction when exact, else a certified `(lo, hi)` pair of floats.
#[pyfunction]
#[pyo3(signature = (matrix=None))]
fn spectral_radius<'py>(py: Python<'py>, matrix: Option<[[i64; 5]; 5]>) -> PyResult<Bound<'py, PyAny>> {
    use degrees::SpectralRadius::*;
    match spectral_radius_exact(&char_poly(&matrix.unwrap_or(REFERENCE_MATRIX))).map_err(value_err)? {
        Exact { value, .. } => to_fraction(py, &value),
        r @ Interval { .. } => Ok(r.approx().into_pyobject(py)?.into_any()),
    }
}

/// Preimage count of generic targets; `None` when samples disagree.
#[pyfunction]
#[pyo3(signature = (samples=5, seed=1))]
fn topological_degree(py: Python<'_>, samples: usize, seed: u64) -> PyResult<Option<usize>> {
    if samples == 0 {
        return Err(PyValueError::new_err("samples must be positive"));
    }
    let td = py.detach(|| degrees::topological_degree(&heat_map_xy(), samples, seed)).map_err(value_err)?;
    Ok(td.degree)
}

/// Rows `(n, symbolic, predicted, unreduced)` for iterates `1..=n`.
#[pyfunction]
#[pyo3(signature = (n=3))]
#[allow(clippy::type_complexity)]
fn degree_growth(py: Python<'_>, n: u32) -> PyResult<Vec<(u32, (u32, u32), (i64, i64), (u32, u32))>> {
    if n == 0 || n > MAX_GROWTH_N {
        return Err(PyValueError::new_err(format!("n must lie in 1..={MAX_GROWTH_N}")));
    }
    let rows = py.detach(|| degrees::degree_growth(n, &REFERENCE_MATRIX)).map_err(value_err)?;
    Ok(rows.into_iter().map(|r| (r.n, r.symbolic, r.predicted, r.unreduced)).collect())
}

/// Point multiplicities at the three blown-up points for the tabulated curves.
#[pyfunction]
fn multiplicity_table() -> Vec<(String, [u32; 3])> {
    cohomology::multiplicity_table()
}

/// Regular pentagon class as floats.
#[pyfunction]
fn regular_class() -> (f64, f64) {
    pentagon::regular_class_f64()
}

/// Basin image; returns `(bytes, [basin, non_basin, guarded])`.
#[pyfunction]
#[pyo3(signature = (width=128, height=128, max_iter=200, region=None, fmt="ppm"))]
fn render<'py>(
    py: Python<'py>,
    width: usize,
    height: usize,
    max_iter: usize,
    region: Option<[f64; 4]>,
    fmt: &str,
) -> PyResult<(Bound<'py, PyBytes>, [usize; 3])> {
    let mut cfg = RenderConfig { width, height, max_iter, ..RenderConfig::default() };
    if let Some(r) = region {
        cfg.region = r;
    }
    let img = py.detach(|| basin::render(&cfg)).map_err(value_err)?;
    let bytes = match fmt {
        "ppm" => img.to_ppm(),
        "png" => img.to_png().map_err(value_err)?,
        _ => return Err(PyValueError::new_err("fmt must be \"ppm\" or \"png\"")),
    };
    Ok((PyBytes::new(py, &bytes), img.counts()))
}

#[pymodule]
fn pentaheat(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_class::<PyPoly>()?;
    m.add_class::<PyHeatMap>()?;
    m.add_class::<PyPolygon>()?;
    m.add_function(wrap_pyfunction!(verify, m)?)?;
    m.add_function(wrap_pyfunction!(pullback_matrix, m)?)?;
    m.add_function(wrap_pyfunction!(reference_matrix, m)?)?;
    m.add_function(wrap_pyfunction!(characteristic_polynomial, m)?)?;
    m.add_function(wrap_pyfunction!(spectral_radius, m)?)?;
    m.add_function(wrap_pyfunction!(topological_degree, m)?)?;
    m.add_function(wrap_pyfunction!(degree_growth, m)?)?;
    m.add_function(wrap_pyfunction!(multiplicity_table, m)?)?;
    m.add_function(wrap_pyfunction!(regular_class, m)?)?;
    m.add_function(wrap_pyfunction!(render, m)?)?;
    m.add("__version__", env!("CARGO_PKG_VERSION"))?;
    Ok(())
}
