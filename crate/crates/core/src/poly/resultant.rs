use num_traits::Zero;

use super::Poly;

/// Sylvester resultant of `p` and `q` with respect to variable `var`.
///
/// A factor of degree zero in `var` is treated as a constant `c`, giving
/// `c^deg(other)`; the resultant of two such factors is 1.
pub fn resultant(p: &Poly, q: &Poly, var: usize) -> Poly {
    let vars = p.vars().clone();
    if p.is_zero() || q.is_zero() {
        return Poly::zero(&vars);
    }
    let m = p.degree_in(var);
    let n = q.degree_in(var);
    if m == 0 {
        return p.pow(n);
    }
    if n == 0 {
        return q.pow(m);
    }
    let a = p.coefficients_in(var);
    let b = q.coefficients_in(var);
    let size = (m + n) as usize;
    let zero = Poly::zero(&vars);
    let mut mat: Vec<Vec<Poly>> = vec![vec![zero.clone(); size]; size];
    for r in 0..n as usize {
        for (k, c) in a.iter().rev().enumerate() {
            mat[r][r + k] = c.clone();
        }
    }
    for r in 0..m as usize {
        for (k, c) in b.iter().rev().enumerate() {
            mat[n as usize + r][r + k] = c.clone();
        }
    }
    bareiss_det(mat)
}

/// Determinant by fraction-free Gaussian elimination; every intermediate
/// division is exact.
pub fn bareiss_det(mut mat: Vec<Vec<Poly>>) -> Poly {
    let size = mat.len();
    assert!(size > 0 && mat.iter().all(|r| r.len() == size));
    let vars = mat[0][0].vars().clone();
    let mut prev = Poly::one(&vars);
    let mut negate = false;
    for k in 0..size.saturating_sub(1) {
        if mat[k][k].is_zero() {
            match (k + 1..size).find(|&i| !mat[i][k].is_zero()) {
                Some(i) => {
                    mat.swap(k, i);
                    negate = !negate;
                }
                None => return Poly::zero(&vars),
            }
        }
        for i in k + 1..size {
            for j in k + 1..size {
                let t = &(&mat[k][k] * &mat[i][j]) - &(&mat[i][k] * &mat[k][j]);
                mat[i][j] = t.exact_divide(&prev).expect("Bareiss step divides exactly");
            }
            mat[i][k] = Poly::zero(&vars);
        }
        prev = mat[k][k].clone();
    }
    let det = mat[size - 1][size - 1].clone();
    if negate {
        -det
    } else {
        det
    }
}

/// Exact determinant of a small rational matrix given as constant polynomials.
pub fn det_is_zero(mat: Vec<Vec<Poly>>) -> bool {
    bareiss_det(mat).constant_value().map(|c| c.is_zero()).unwrap_or(false)
}
