//! Arithmetic in prime fields below 2^62 and dense univariate polynomials over them.

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::ToPrimitive;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Field {
    pub p: u64,
}

impl Field {
    pub fn new(p: u64) -> Self {
        assert!(p > 2 && p < (1 << 62));
        Field { p }
    }

    #[inline]
    pub fn add(self, a: u64, b: u64) -> u64 {
        let s = a + b;
        if s >= self.p {
            s - self.p
        } else {
            s
        }
    }

    #[inline]
    pub fn sub(self, a: u64, b: u64) -> u64 {
        if a >= b {
            a - b
        } else {
            a + self.p - b
        }
    }

    #[inline]
    pub fn neg(self, a: u64) -> u64 {
        if a == 0 {
            0
        } else {
            self.p - a
        }
    }

    #[inline]
    pub fn mul(self, a: u64, b: u64) -> u64 {
        ((a as u128 * b as u128) % self.p as u128) as u64
    }

    pub fn pow(self, mut a: u64, mut e: u64) -> u64 {
        let mut r = 1;
        while e > 0 {
            if e & 1 == 1 {
                r = self.mul(r, a);
            }
            a = self.mul(a, a);
            e >>= 1;
        }
        r
    }

    /// Multiplicative inverse; `a` must be nonzero.
    pub fn inv(self, a: u64) -> u64 {
        debug_assert!(a != 0);
        self.pow(a, self.p - 2)
    }

    pub fn reduce(self, n: &BigInt) -> u64 {
        n.mod_floor(&BigInt::from(self.p)).to_u64().expect("residue fits")
    }

    /// Representative in `(-p/2, p/2]`.
    pub fn symmetric(self, a: u64) -> i128 {
        if a > self.p / 2 {
            a as i128 - self.p as i128
        } else {
            a as i128
        }
    }
}

fn is_prime_u64(n: u64) -> bool {
    if n < 2 {
        return false;
    }
    for small in [2u64, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37] {
        if n.is_multiple_of(small) {
            return n == small;
        }
    }
    let mut d = n - 1;
    let mut s = 0;
    while d.is_multiple_of(2) {
        d /= 2;
        s += 1;
    }
    let f = Field { p: n };
    'witness: for a in [2u64, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37] {
        let mut x = f.pow(a, d);
        if x == 1 || x == n - 1 {
            continue;
        }
        for _ in 1..s {
            x = f.mul(x, x);
            if x == n - 1 {
                continue 'witness;
            }
        }
        return false;
    }
    true
}

/// Descending sequence of primes just below 2^62.
pub struct Primes {
    next: u64,
}

impl Primes {
    pub fn new() -> Self {
        Primes { next: (1 << 62) - 1 }
    }
}

impl Default for Primes {
    fn default() -> Self {
        Self::new()
    }
}

impl Iterator for Primes {
    type Item = u64;
    fn next(&mut self) -> Option<u64> {
        while self.next > 3 {
            let c = self.next;
            self.next -= 2;
            if is_prime_u64(c) {
                return Some(c);
            }
        }
        None
    }
}

/// Dense polynomial, coefficient of `x^i` at index `i`, no trailing zeros.
pub type UPoly = Vec<u64>;

pub fn trim(a: &mut UPoly) {
    while a.last() == Some(&0) {
        a.pop();
    }
}

/// Degree, or `None` for the zero polynomial.
pub fn degree(a: &[u64]) -> Option<usize> {
    a.iter().rposition(|&c| c != 0)
}

pub fn eval(f: Field, a: &[u64], x: u64) -> u64 {
    a.iter().rev().fold(0, |acc, &c| f.add(f.mul(acc, x), c))
}

pub fn scale(f: Field, a: &[u64], c: u64) -> UPoly {
    let mut out: UPoly = a.iter().map(|&v| f.mul(v, c)).collect();
    trim(&mut out);
    out
}

pub fn make_monic(f: Field, a: &[u64]) -> UPoly {
    match a.last() {
        Some(&lc) if lc != 0 => scale(f, a, f.inv(lc)),
        _ => Vec::new(),
    }
}

/// Remainder of `a` modulo `b` (`b` nonzero and trimmed).
pub fn rem(f: Field, a: &[u64], b: &[u64]) -> UPoly {
    let mut r: UPoly = a.to_vec();
    trim(&mut r);
    let db = b.len() - 1;
    let inv = f.inv(b[db]);
    while r.len() > db {
        let lead = f.mul(*r.last().unwrap(), inv);
        let shift = r.len() - 1 - db;
        for (i, &bc) in b.iter().enumerate() {
            r[shift + i] = f.sub(r[shift + i], f.mul(lead, bc));
        }
        trim(&mut r);
    }
    r
}

/// Quotient of an exact division (`b` nonzero and trimmed, `b | a`).
pub fn div_exact(f: Field, a: &[u64], b: &[u64]) -> UPoly {
    let mut r: UPoly = a.to_vec();
    trim(&mut r);
    let db = b.len() - 1;
    if r.len() <= db {
        return Vec::new();
    }
    let inv = f.inv(b[db]);
    let mut q = vec![0; r.len() - db];
    for k in (0..q.len()).rev() {
        let t = f.mul(r[k + db], inv);
        if t != 0 {
            for (i, &bc) in b.iter().enumerate() {
                r[k + i] = f.sub(r[k + i], f.mul(t, bc));
            }
        }
        q[k] = t;
    }
    debug_assert!(r.iter().all(|&c| c == 0), "inexact division");
    trim(&mut q);
    q
}

/// Monic gcd; the gcd of two zero polynomials is zero.
pub fn gcd(f: Field, a: &[u64], b: &[u64]) -> UPoly {
    let mut x = a.to_vec();
    let mut y = b.to_vec();
    trim(&mut x);
    trim(&mut y);
    while !y.is_empty() {
        let r = rem(f, &x, &y);
        x = y;
        y = r;
    }
    make_monic(f, &x)
}

/// Newton interpolation on a fixed node set, reusable across many value vectors.
pub struct Interpolator {
    f: Field,
    xs: Vec<u64>,
    // inverse of xs[k] - xs[k - level], indexed [level][k]
    inv: Vec<Vec<u64>>,
}

impl Interpolator {
    /// Nodes must be distinct.
    pub fn new(f: Field, xs: &[u64]) -> Self {
        let n = xs.len();
        let mut inv = vec![Vec::new()];
        for level in 1..n {
            let row = (0..n).map(|k| if k >= level { f.inv(f.sub(xs[k], xs[k - level])) } else { 0 }).collect();
            inv.push(row);
        }
        Interpolator { f, xs: xs.to_vec(), inv }
    }

    /// Polynomial of degree < n through `(xs[k], ys[k])`.
    pub fn interpolate(&self, ys: &[u64]) -> UPoly {
        let f = self.f;
        let n = self.xs.len();
        assert_eq!(ys.len(), n);
        let mut dd = ys.to_vec();
        for level in 1..n {
            for k in (level..n).rev() {
                dd[k] = f.mul(f.sub(dd[k], dd[k - 1]), self.inv[level][k]);
            }
        }
        // Horner expansion of the Newton form: out = out * (x - xs[k]) + dd[k]
        let mut out: UPoly = Vec::with_capacity(n);
        for k in (0..n).rev() {
            out.insert(0, 0);
            for i in 0..out.len() - 1 {
                let t = f.mul(out[i + 1], self.xs[k]);
                out[i] = f.sub(out[i], t);
            }
            out[0] = f.add(out[0], dd[k]);
        }
        trim(&mut out);
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn primes_are_prime_and_descending() {
        let ps: Vec<u64> = Primes::new().take(5).collect();
        assert!(ps.windows(2).all(|w| w[0] > w[1]));
        for &p in &ps {
            assert!(p < 1 << 62);
            // Fermat check with a couple of bases
            let f = Field::new(p);
            assert_eq!(f.pow(3, p - 1), 1);
            assert_eq!(f.pow(10, p - 1), 1);
        }
        assert!(is_prime_u64(97));
        assert!(!is_prime_u64(561));
        assert!(!is_prime_u64(3215031751));
    }

    #[test]
    fn gcd_and_interpolation() {
        let f = Field::new(1_000_000_007);
        // (x-1)(x-2) and (x-1)(x+5)
        let a = vec![2, f.neg(3), 1];
        let b = vec![f.neg(5), 4, 1];
        assert_eq!(gcd(f, &a, &b), vec![f.neg(1), 1]);
        let xs = [1, 2, 3, 4];
        let poly = vec![7, 0, 3, 1];
        let ys: Vec<u64> = xs.iter().map(|&x| eval(f, &poly, x)).collect();
        assert_eq!(Interpolator::new(f, &xs).interpolate(&ys), poly);
    }
}
