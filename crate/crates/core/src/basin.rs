//! Basin of the attracting fixed point `(1/phi, 1/phi)` in the real
//! `(x, y)` plane, rendered pixel-parallel with deterministic output.

use std::io::Write;
use std::ops::{Add, Div, Mul, Sub};
use std::path::Path;

use num_traits::{ToPrimitive, Zero};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;
use thiserror::Error;
use twofloat::TwoFloat;

use crate::charts::{curves, heat_map_xy};
use crate::pentagon::{QSqrt5, Scalar};
use crate::poly::{Poly, Rational};

/// `1/phi = (sqrt 5 - 1) / 2`.
pub fn phi_inv() -> f64 {
    (5f64.sqrt() - 1.0) / 2.0
}

/// Arithmetic used by the orbit iteration.
pub trait Real: Copy + Add<Output = Self> + Sub<Output = Self> + Mul<Output = Self> + Div<Output = Self> {
    fn from_f64(v: f64) -> Self;
    fn to_f64(self) -> f64;
    fn abs(self) -> Self;
}

impl Real for f64 {
    fn from_f64(v: f64) -> Self {
        v
    }
    fn to_f64(self) -> f64 {
        self
    }
    fn abs(self) -> Self {
        f64::abs(self)
    }
}

impl Real for TwoFloat {
    fn from_f64(v: f64) -> Self {
        TwoFloat::from(v)
    }
    fn to_f64(self) -> f64 {
        self.hi() + self.lo()
    }
    fn abs(self) -> Self {
        TwoFloat::abs(&self)
    }
}

/// A polynomial in `x, y` with small integer coefficients, flattened for
/// fast evaluation.
#[derive(Debug, Clone)]
struct FlatPoly {
    terms: Vec<(usize, usize, f64)>,
}

const MAX_DEG: usize = 4;

impl FlatPoly {
    fn new(p: &Poly) -> Self {
        let terms = p
            .terms()
            .iter()
            .map(|(m, c)| {
                let (i, j) = (m.exponent(0) as usize, m.exponent(1) as usize);
                assert!(i <= MAX_DEG && j <= MAX_DEG, "curve degree bound");
                let v = ToPrimitive::to_f64(c).expect("small coefficient");
                assert_eq!(Rational::from_float(v), Some(c.clone()), "coefficients must be exact in binary");
                (i, j, v)
            })
            .collect();
        FlatPoly { terms }
    }

    fn eval<T: Real>(&self, xp: &[T; MAX_DEG + 1], yp: &[T; MAX_DEG + 1]) -> T {
        self.terms.iter().fold(T::from_f64(0.0), |acc, &(i, j, c)| acc + T::from_f64(c) * xp[i] * yp[j])
    }
}

/// `H` as `x' = C6 C4 / (h1 C3)`, `y' = C7 C3 / (h2 C4)`, with each factor
/// evaluated separately so the denominators can be guarded.
#[derive(Debug, Clone)]
pub struct FloatHeatMap {
    c3: FlatPoly,
    c4: FlatPoly,
    c6: FlatPoly,
    c7: FlatPoly,
    h1: FlatPoly,
    h2: FlatPoly,
}

impl Default for FloatHeatMap {
    fn default() -> Self {
        Self::new()
    }
}

/// One step of the orbit: the image, or the smaller denominator when it
/// falls under the guard.
pub enum Step<T> {
    Point(T, T),
    Guarded(f64),
}

impl FloatHeatMap {
    pub fn new() -> Self {
        FloatHeatMap {
            c3: FlatPoly::new(&curves::c(3)),
            c4: FlatPoly::new(&curves::c(4)),
            c6: FlatPoly::new(&curves::c(6)),
            c7: FlatPoly::new(&curves::c(7)),
            h1: FlatPoly::new(&curves::h1()),
            h2: FlatPoly::new(&curves::h2()),
        }
    }

    pub fn step<T: Real>(&self, x: T, y: T, guard: f64) -> Step<T> {
        let mut xp = [T::from_f64(1.0); MAX_DEG + 1];
        let mut yp = [T::from_f64(1.0); MAX_DEG + 1];
        for k in 1..=MAX_DEG {
            xp[k] = xp[k - 1] * x;
            yp[k] = yp[k - 1] * y;
        }
        let c3 = self.c3.eval(&xp, &yp);
        let c4 = self.c4.eval(&xp, &yp);
        let d1 = self.h1.eval(&xp, &yp) * c3;
        let d2 = self.h2.eval(&xp, &yp) * c4;
        let m = d1.abs().to_f64().min(d2.abs().to_f64());
        if m.is_nan() || m < guard {
            return Step::Guarded(m);
        }
        Step::Point(self.c6.eval(&xp, &yp) * c4 / d1, self.c7.eval(&xp, &yp) * c3 / d2)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
pub enum PixelClass {
    Basin,
    NonBasin,
    Guarded,
}

impl PixelClass {
    pub fn rgb(self) -> [u8; 3] {
        match self {
            PixelClass::Basin => [255, 215, 0],
            PixelClass::NonBasin => [200, 16, 16],
            PixelClass::Guarded => [128, 128, 128],
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RenderConfig {
    /// `[xmin, xmax, ymin, ymax]`.
    pub region: [f64; 4],
    pub width: usize,
    pub height: usize,
    pub max_iter: usize,
    /// Max-norm radius around the fixed point counted as converged.
    pub tol: f64,
    /// Further iterations that must stay within `tol`.
    pub confirmations: usize,
    /// Denominator magnitude below which the orbit is rerun in double-double.
    pub guard: f64,
    /// Worker threads; `None` uses the global pool.
    pub threads: Option<usize>,
}

impl Default for RenderConfig {
    fn default() -> Self {
        let r = phi_inv();
        RenderConfig {
            region: [-9.0, r, -9.0, r],
            width: 512,
            height: 512,
            max_iter: 200,
            tol: 1e-6,
            confirmations: 3,
            guard: 1e-12,
            threads: None,
        }
    }
}

#[derive(Debug, Error)]
pub enum RenderError {
    #[error("empty region {0:?}")]
    EmptyRegion([f64; 4]),
    #[error("image size must be positive")]
    EmptyImage,
    #[error("unsupported output extension for {0} (use .ppm or .png)")]
    Format(String),
    #[error("thread pool: {0}")]
    Pool(#[from] rayon::ThreadPoolBuildError),
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error(transparent)]
    Png(#[from] png::EncodingError),
}

impl RenderConfig {
    pub fn validate(&self) -> Result<(), RenderError> {
        let [x0, x1, y0, y1] = self.region;
        if !(x0 < x1 && y0 < y1) {
            return Err(RenderError::EmptyRegion(self.region));
        }
        if self.width == 0 || self.height == 0 {
            return Err(RenderError::EmptyImage);
        }
        Ok(())
    }

    /// Center of pixel `(col, row)`; row 0 is the top edge `y = ymax`.
    pub fn pixel_center(&self, col: usize, row: usize) -> (f64, f64) {
        let [x0, x1, y0, y1] = self.region;
        let x = x0 + (col as f64 + 0.5) * (x1 - x0) / self.width as f64;
        let y = y1 - (row as f64 + 0.5) * (y1 - y0) / self.height as f64;
        (x, y)
    }

    /// The pixel containing `(x, y)`, clamped to the image.
    pub fn pixel_of(&self, x: f64, y: f64) -> (usize, usize) {
        let [x0, x1, y0, y1] = self.region;
        let c = ((x - x0) / (x1 - x0) * self.width as f64).floor();
        let r = ((y1 - y) / (y1 - y0) * self.height as f64).floor();
        let clamp = |v: f64, n: usize| (v.max(0.0) as usize).min(n - 1);
        (clamp(c, self.width), clamp(r, self.height))
    }
}

enum Orbit {
    Basin,
    NonBasin,
    Guarded,
}

fn run_orbit<T: Real>(map: &FloatHeatMap, x: f64, y: f64, cfg: &RenderConfig, guard: f64) -> Orbit {
    let p = phi_inv();
    let (mut x, mut y) = (T::from_f64(x), T::from_f64(y));
    let mut inside = 0;
    for _ in 0..=cfg.max_iter + cfg.confirmations {
        let (fx, fy) = (x.to_f64(), y.to_f64());
        if !(fx.is_finite() && fy.is_finite()) {
            return Orbit::Guarded;
        }
        if (fx - p).abs().max((fy - p).abs()) < cfg.tol {
            inside += 1;
            if inside > cfg.confirmations {
                return Orbit::Basin;
            }
        } else if inside > 0 {
            inside = 0;
        }
        match map.step(x, y, guard) {
            Step::Point(a, b) => (x, y) = (a, b),
            Step::Guarded(_) => return Orbit::Guarded,
        }
    }
    Orbit::NonBasin
}

/// Label of the point `(x, y)`: converged within `max_iter` steps and
/// confirmed, not converged, or guarded even at extended precision.
pub fn classify(map: &FloatHeatMap, x: f64, y: f64, cfg: &RenderConfig) -> PixelClass {
    match run_orbit::<f64>(map, x, y, cfg, cfg.guard) {
        Orbit::Basin => PixelClass::Basin,
        Orbit::NonBasin => PixelClass::NonBasin,
        // double-double carries about 106 bits, so the guard scales with it
        Orbit::Guarded => match run_orbit::<TwoFloat>(map, x, y, cfg, cfg.guard * cfg.guard) {
            Orbit::Basin => PixelClass::Basin,
            Orbit::NonBasin => PixelClass::NonBasin,
            Orbit::Guarded => PixelClass::Guarded,
        },
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Image {
    pub width: usize,
    pub height: usize,
    pub pixels: Vec<PixelClass>,
}

impl Image {
    pub fn get(&self, col: usize, row: usize) -> PixelClass {
        self.pixels[row * self.width + col]
    }

    pub fn rgb_bytes(&self) -> Vec<u8> {
        self.pixels.iter().flat_map(|p| p.rgb()).collect()
    }

    /// Binary portable pixmap (P6).
    pub fn to_ppm(&self) -> Vec<u8> {
        let mut out = format!("P6\n{} {}\n255\n", self.width, self.height).into_bytes();
        out.extend(self.rgb_bytes());
        out
    }

    pub fn to_png(&self) -> Result<Vec<u8>, RenderError> {
        let mut out = Vec::new();
        {
            let mut enc = png::Encoder::new(&mut out, self.width as u32, self.height as u32);
            enc.set_color(png::ColorType::Rgb);
            enc.set_depth(png::BitDepth::Eight);
            let mut w = enc.write_header()?;
            w.write_image_data(&self.rgb_bytes())?;
        }
        Ok(out)
    }

    /// Writes `.ppm` or `.png` according to the extension.
    pub fn save(&self, path: &Path) -> Result<(), RenderError> {
        let ext = path.extension().and_then(|e| e.to_str()).map(|e| e.to_ascii_lowercase());
        let bytes = match ext.as_deref() {
            Some("ppm") => self.to_ppm(),
            Some("png") => self.to_png()?,
            _ => return Err(RenderError::Format(path.display().to_string())),
        };
        std::fs::File::create(path)?.write_all(&bytes)?;
        Ok(())
    }

    pub fn counts(&self) -> [usize; 3] {
        let mut c = [0; 3];
        for p in &self.pixels {
            c[*p as usize] += 1;
        }
        c
    }
}

/// Classifies every pixel center. Each pixel is a pure function of the
/// configuration and its index, so the output does not depend on threads.
pub fn render(cfg: &RenderConfig) -> Result<Image, RenderError> {
    cfg.validate()?;
    let map = FloatHeatMap::new();
    let work = || -> Vec<PixelClass> {
        (0..cfg.width * cfg.height)
            .into_par_iter()
            .map(|i| {
                let (x, y) = cfg.pixel_center(i % cfg.width, i / cfg.width);
                classify(&map, x, y, cfg)
            })
            .collect()
    };
    let pixels = match cfg.threads {
        Some(n) => rayon::ThreadPoolBuilder::new().num_threads(n).build()?.install(work),
        None => work(),
    };
    Ok(Image { width: cfg.width, height: cfg.height, pixels })
}

/// Agreement of labels at `max_iter` and `2 max_iter` on random pixels.
#[derive(Debug, Clone, Serialize)]
pub struct StabilityReport {
    pub sampled: usize,
    pub agree: usize,
    /// Disagreeing pixels as `(col, row)`.
    pub changed: Vec<(usize, usize)>,
}

impl StabilityReport {
    pub fn fraction(&self) -> f64 {
        self.agree as f64 / self.sampled as f64
    }
}

pub fn label_stability(cfg: &RenderConfig, samples: usize, seed: u64) -> StabilityReport {
    let map = FloatHeatMap::new();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let pix: Vec<(usize, usize)> =
        (0..samples).map(|_| (rng.gen_range(0..cfg.width), rng.gen_range(0..cfg.height))).collect();
    let doubled = RenderConfig { max_iter: 2 * cfg.max_iter, ..cfg.clone() };
    let changed: Vec<(usize, usize)> = pix
        .par_iter()
        .filter(|&&(c, r)| {
            let (x, y) = cfg.pixel_center(c, r);
            classify(&map, x, y, cfg) != classify(&map, x, y, &doubled)
        })
        .copied()
        .collect();
    StabilityReport { sampled: samples, agree: samples - changed.len(), changed }
}

/// Facts about the fixed point `(1/phi, 1/phi)`.
#[derive(Debug, Clone, Serialize)]
pub struct FixedPointData {
    pub point: (f64, f64),
    /// `x^2 + x - 1` divides the numerator of `x'(x, x) - x`.
    pub diagonal_divisibility: bool,
    pub jacobian: [[f64; 2]; 2],
    pub jacobian_spectral_radius: f64,
    pub is_attracting: bool,
}

#[derive(Debug, Error)]
pub enum FixedPointError {
    #[error("x^2 + x - 1 does not divide the numerator of x'(x,x) - x")]
    NotFixed,
    #[error("spectral radius {0} is not below 1")]
    NotAttracting(f64),
}

fn eval_q5(p: &Poly, pt: &[QSqrt5; 2]) -> QSqrt5 {
    p.terms().iter().fold(QSqrt5::zero(), |acc, (m, c)| {
        let mut t = QSqrt5::rational(c.clone());
        for (i, v) in pt.iter().enumerate() {
            for _ in 0..m.exponent(i) {
                t = t.mul(v);
            }
        }
        acc.add(&t)
    })
}

/// Checks the fixed point exactly on the diagonal and evaluates the exact
/// Jacobian there in `Q(sqrt 5)`; eigenvalues are taken from the exact
/// trace and determinant.
pub fn fixed_point_data() -> Result<FixedPointData, FixedPointError> {
    let h = heat_map_xy();
    let vars = h.comps[0].vars().clone();
    let x = Poly::var(&vars, 0);
    let diag = [x.clone(), x.clone()];
    let num = h.comps[0].num().substitute(&diag);
    let den = h.comps[0].den().substitute(&diag);
    let lhs = &num - &(&x * &den);
    let q = curves::xy("x^2 + x - 1");
    let divisible = !lhs.is_zero() && lhs.exact_divide(&q).is_ok();
    if !divisible {
        return Err(FixedPointError::NotFixed);
    }

    let half = Rational::new(1.into(), 2.into());
    let p = QSqrt5::new(-half.clone(), half);
    let pt = [p.clone(), p];
    let mut jac = [[QSqrt5::zero(), QSqrt5::zero()], [QSqrt5::zero(), QSqrt5::zero()]];
    for (i, row) in jac.iter_mut().enumerate() {
        for (j, slot) in row.iter_mut().enumerate() {
            let d = h.comps[i].derivative(j);
            *slot = eval_q5(d.num(), &pt).div(&eval_q5(d.den(), &pt));
        }
    }
    let tr = jac[0][0].add(&jac[1][1]);
    let det = jac[0][0].mul(&jac[1][1]).sub(&jac[1][0].mul(&jac[0][1]));
    let (t, d) = (tr.to_f64(), det.to_f64());
    let disc = t * t - 4.0 * d;
    let rho = if disc >= 0.0 {
        let s = disc.sqrt();
        ((t + s) / 2.0).abs().max(((t - s) / 2.0).abs())
    } else {
        d.abs().sqrt()
    };
    let jf = jac.clone().map(|r| r.map(|v| v.to_f64()));
    if rho.is_nan() || rho >= 1.0 {
        return Err(FixedPointError::NotAttracting(rho));
    }
    let r = phi_inv();
    Ok(FixedPointData {
        point: (r, r),
        diagonal_divisibility: true,
        jacobian: jf,
        jacobian_spectral_radius: rho,
        is_attracting: true,
    })
}

/// Largest relative error of the float step against exact evaluation, over
/// random rational points where `H` is finite.
pub fn float_consistency(samples: usize, seed: u64) -> f64 {
    let map = FloatHeatMap::new();
    let h = heat_map_xy();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut worst = 0.0f64;
    let mut done = 0;
    while done < samples {
        let r = |rng: &mut ChaCha8Rng| Rational::new(rng.gen_range(-400i64..=400).into(), 64.into());
        let pt = [r(&mut rng), r(&mut rng)];
        let Some(exact) = h.evaluate(&pt).finite().map(|v| v.to_vec()) else { continue };
        let (x, y) = (ToPrimitive::to_f64(&pt[0]).unwrap(), ToPrimitive::to_f64(&pt[1]).unwrap());
        let Step::Point(a, b) = map.step(x, y, 0.0) else { continue };
        for (f, e) in [a, b].iter().zip(&exact) {
            let e = ToPrimitive::to_f64(e).unwrap();
            let err = if e.is_zero() { f.abs() } else { ((f - e) / e).abs() };
            worst = worst.max(err);
        }
        done += 1;
    }
    worst
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn fixed_point() {
        let f = fixed_point_data().unwrap();
        assert!(f.is_attracting && f.jacobian_spectral_radius < 1.0);
        let map = FloatHeatMap::new();
        let r = phi_inv();
        let Step::Point(a, b) = map.step(r, r, 1e-12) else { panic!() };
        assert!((a - r).abs() < 1e-15 && (b - r).abs() < 1e-15);
    }

    #[test]
    fn known_points() {
        let cfg = RenderConfig::default();
        let map = FloatHeatMap::new();
        let r = phi_inv();
        assert_eq!(classify(&map, r, r, &cfg), PixelClass::Basin);
        assert_eq!(classify(&map, 0.0, 0.0, &cfg), PixelClass::Basin);
        let Step::Point(a, b) = map.step(0.0, 0.0, 1e-12) else { panic!() };
        assert_eq!((a, b), (0.6, 0.6));
    }

    #[test]
    fn float_step_matches_exact() {
        assert!(float_consistency(100, 4) < 1e-12);
    }

    #[test]
    fn small_render_is_thread_independent() {
        let cfg = RenderConfig { width: 48, height: 40, threads: Some(1), ..Default::default() };
        let a = render(&cfg).unwrap();
        let b = render(&RenderConfig { threads: Some(3), ..cfg.clone() }).unwrap();
        assert_eq!(a.to_ppm(), b.to_ppm());
        assert!(a.counts()[0] > 0);
    }

    #[test]
    fn orbit_into_indeterminacy_is_guarded() {
        // (-1, -5) lies on C2, which collapses to the indeterminate point (1, 1)
        let cfg = RenderConfig::default();
        assert_eq!(classify(&FloatHeatMap::new(), -1.0, -5.0, &cfg), PixelClass::Guarded);
    }
}
