//! Exact algebra for the diagonal of `1/(1 - p(x, y))`: substitution
//! `x = s`, `y = z/s`, the discriminant in `s`, and root finding in `z`.

use num_bigint::{BigInt, Sign};
use num_complex::Complex64;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{FromPrimitive, One, Signed, ToPrimitive, Zero};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::twig::BivariatePolynomial;

/// Integer polynomial in one variable, lowest degree first, no trailing zeros.
pub type IntPoly = Vec<BigInt>;

fn trim(p: &mut IntPoly) {
    while p.last().is_some_and(|c| c.is_zero()) {
        p.pop();
    }
}

/// `deg` of a trimmed polynomial; the zero polynomial has no degree.
pub fn degree(p: &IntPoly) -> Option<usize> {
    p.len().checked_sub(1)
}

/// Polynomial in `s` whose coefficients are integer polynomials in `z`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SPoly {
    /// `coeffs[j]` multiplies `s^j`.
    pub coeffs: Vec<IntPoly>,
}

impl SPoly {
    pub fn s_degree(&self) -> Option<usize> {
        self.coeffs.len().checked_sub(1)
    }

    pub fn z_degree(&self) -> usize {
        self.coeffs.iter().map(|c| c.len().saturating_sub(1)).max().unwrap_or(0)
    }

    fn from_terms(terms: impl IntoIterator<Item = (usize, usize, BigInt)>) -> Self {
        let mut coeffs: Vec<IntPoly> = Vec::new();
        for (j, k, c) in terms {
            if coeffs.len() <= j {
                coeffs.resize(j + 1, Vec::new());
            }
            let row = &mut coeffs[j];
            if row.len() <= k {
                row.resize(k + 1, BigInt::zero());
            }
            row[k] += c;
        }
        for row in &mut coeffs {
            trim(row);
        }
        while coeffs.last().is_some_and(|r| r.is_empty()) {
            coeffs.pop();
        }
        SPoly { coeffs }
    }

    /// Univariate integer polynomial in `s` (no `z` dependence).
    pub fn constant_in_z(p: &[i64]) -> Self {
        Self::from_terms(p.iter().enumerate().map(|(j, &c)| (j, 0, BigInt::from(c))))
    }

    /// `∂/∂s`.
    pub fn derivative(&self) -> Self {
        Self::from_terms(self.coeffs.iter().enumerate().skip(1).flat_map(|(j, row)| {
            row.iter()
                .enumerate()
                .map(move |(k, c)| (j - 1, k, c * BigInt::from(j)))
        }))
    }

    /// Divide out the largest power of `s` dividing the polynomial.
    pub fn strip_s_power(&self) -> Self {
        let low = self.coeffs.iter().take_while(|r| r.is_empty()).count();
        SPoly {
            coeffs: self.coeffs[low.min(self.coeffs.len())..].to_vec(),
        }
    }

    pub fn eval_f64(&self, s: f64, z: f64) -> f64 {
        self.coeffs
            .iter()
            .rev()
            .fold(0.0, |acc, row| acc * s + eval_f64(row, z))
    }
}

/// `s^N_y (1 - p(s, z/s))`.
pub fn laurent_normalize(p: &BivariatePolynomial) -> SPoly {
    let ny = p.degree_y() as usize;
    let mut terms = vec![(ny, 0, BigInt::one())];
    for (&(a, b), c) in &p.terms {
        terms.push((a as usize + ny - b as usize, b as usize, -c.clone()));
    }
    SPoly::from_terms(terms)
}

fn eval_f64(p: &IntPoly, z: f64) -> f64 {
    p.iter().rev().fold(0.0, |acc, c| acc * z + big_to_f64(c))
}

fn big_to_f64(c: &BigInt) -> f64 {
    c.to_f64().unwrap_or(if c.is_negative() { f64::NEG_INFINITY } else { f64::INFINITY })
}

// ---------------------------------------------------------------------------
// arithmetic modulo word-size primes

fn mul_mod(a: u64, b: u64, p: u64) -> u64 {
    ((a as u128 * b as u128) % p as u128) as u64
}

fn pow_mod(mut a: u64, mut e: u64, p: u64) -> u64 {
    let mut r = 1u64;
    a %= p;
    while e > 0 {
        if e & 1 == 1 {
            r = mul_mod(r, a, p);
        }
        a = mul_mod(a, a, p);
        e >>= 1;
    }
    r
}

fn inv_mod(a: u64, p: u64) -> u64 {
    pow_mod(a, p - 2, p)
}

fn is_prime(n: u64) -> bool {
    if n < 2 {
        return false;
    }
    for q in [2u64, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37] {
        if n.is_multiple_of(q) {
            return n == q;
        }
    }
    let s = (n - 1).trailing_zeros();
    let d = (n - 1) >> s;
    'witness: for a in [2u64, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37] {
        let mut x = pow_mod(a, d, n);
        if x == 1 || x == n - 1 {
            continue;
        }
        for _ in 1..s {
            x = mul_mod(x, x, n);
            if x == n - 1 {
                continue 'witness;
            }
        }
        return false;
    }
    true
}

/// Primes just below `2^62`, largest first.
fn primes() -> impl Iterator<Item = u64> {
    (0..).map(|i| (1u64 << 62) - 1 - 2 * i).filter(|&n| is_prime(n))
}

fn reduce(c: &BigInt, p: u64) -> u64 {
    let r = c.mod_floor(&BigInt::from(p));
    r.to_u64().expect("residue fits")
}

fn eval_mod(p: &[u64], z: u64, q: u64) -> u64 {
    p.iter().rev().fold(0, |acc, &c| (mul_mod(acc, z, q) + c) % q)
}

fn trim_mod(p: &mut Vec<u64>) {
    while p.last() == Some(&0) {
        p.pop();
    }
}

/// Resultant over `F_q` of polynomials with nonzero leading coefficients.
fn resultant_mod(a: &[u64], b: &[u64], q: u64) -> u64 {
    let mut a = a.to_vec();
    let mut b = b.to_vec();
    trim_mod(&mut a);
    trim_mod(&mut b);
    let mut acc = 1u64;
    loop {
        if a.is_empty() || b.is_empty() {
            return 0;
        }
        let n = a.len() - 1;
        let m = b.len() - 1;
        if m == 0 {
            return mul_mod(acc, pow_mod(b[0], n as u64, q), q);
        }
        if n == 0 {
            return mul_mod(acc, pow_mod(a[0], m as u64, q), q);
        }
        // a mod b
        let inv = inv_mod(b[m], q);
        let mut r = a.clone();
        while r.len() > m {
            let top = r.len() - 1;
            let f = mul_mod(r[top], inv, q);
            if f != 0 {
                for (i, &bc) in b.iter().enumerate() {
                    let k = top - m + i;
                    r[k] = (r[k] + q - mul_mod(f, bc, q)) % q;
                }
            }
            r.pop();
            trim_mod(&mut r);
        }
        if r.is_empty() {
            return 0;
        }
        let k = r.len() - 1;
        // Res(a, b) = (-1)^{nm} lc(b)^{n-k} Res(b, r)
        if (n * m) % 2 == 1 {
            acc = (q - acc) % q;
        }
        acc = mul_mod(acc, pow_mod(b[m], (n - k) as u64, q), q);
        a = b;
        b = r;
    }
}

/// Interpolate through `(xs[i], ys[i])` over `F_q`; coefficients lowest first.
fn interpolate_mod(xs: &[u64], ys: &[u64], q: u64) -> Vec<u64> {
    let n = xs.len();
    // Newton divided differences
    let mut c = ys.to_vec();
    for j in 1..n {
        for i in (j..n).rev() {
            let num = (c[i] + q - c[i - 1]) % q;
            let den = (xs[i] + q - xs[i - j]) % q;
            c[i] = mul_mod(num, inv_mod(den, q), q);
        }
    }
    let mut poly = vec![0u64; n];
    for j in (0..n).rev() {
        // poly = poly * (x - xs[j]) + c[j]
        let mut next = vec![0u64; n];
        for i in 0..n {
            if poly[i] == 0 {
                continue;
            }
            if i + 1 < n {
                next[i + 1] = (next[i + 1] + poly[i]) % q;
            }
            next[i] = (next[i] + q - mul_mod(poly[i], xs[j], q)) % q;
        }
        next[0] = (next[0] + c[j]) % q;
        poly = next;
    }
    poly
}

/// Number of bits bounding every coefficient of `Res_s(f, g)`: each term of
/// the Sylvester determinant is a product of one entry per row.
fn resultant_bit_bound(f: &SPoly, g: &SPoly) -> u64 {
    let row_bits = |p: &SPoly| -> f64 {
        let l1: BigInt = p
            .coeffs
            .iter()
            .flat_map(|r| r.iter())
            .map(|c| c.abs())
            .sum();
        (l1.bits() as f64).max(1.0)
    };
    let n = f.s_degree().unwrap_or(0) as f64;
    let m = g.s_degree().unwrap_or(0) as f64;
    // each z-coefficient of a product of polynomials is bounded by the product of l1 norms
    (m * row_bits(f) + n * row_bits(g)).ceil() as u64 + 2
}

/// Exact `Res_s(f, g)` as a polynomial in `z`, by evaluation at integer
/// points modulo enough primes and Chinese remaindering.
pub fn resultant_in_s(f: &SPoly, g: &SPoly) -> Result<IntPoly> {
    let (Some(n), Some(m)) = (f.s_degree(), g.s_degree()) else {
        return Err(Error::Degenerate("resultant of a zero polynomial".into()));
    };
    let deg_bound = n * g.z_degree() + m * f.z_degree();
    let bits = resultant_bit_bound(f, g) + 1;
    let lc_f = &f.coeffs[n];
    let lc_g = &g.coeffs[m];
    let mut modulus = BigInt::one();
    let mut acc: Vec<BigInt> = vec![BigInt::zero(); deg_bound + 1];
    for q in primes() {
        if modulus.bits() > bits {
            break;
        }
        let fm: Vec<Vec<u64>> = f.coeffs.iter().map(|r| r.iter().map(|c| reduce(c, q)).collect()).collect();
        let gm: Vec<Vec<u64>> = g.coeffs.iter().map(|r| r.iter().map(|c| reduce(c, q)).collect()).collect();
        let lf: Vec<u64> = lc_f.iter().map(|c| reduce(c, q)).collect();
        let lg: Vec<u64> = lc_g.iter().map(|c| reduce(c, q)).collect();
        let mut xs = Vec::with_capacity(deg_bound + 1);
        let mut ys = Vec::with_capacity(deg_bound + 1);
        let mut z = 1u64;
        while xs.len() <= deg_bound {
            if eval_mod(&lf, z, q) != 0 && eval_mod(&lg, z, q) != 0 {
                let fa: Vec<u64> = fm.iter().map(|r| eval_mod(r, z, q)).collect();
                let ga: Vec<u64> = gm.iter().map(|r| eval_mod(r, z, q)).collect();
                xs.push(z);
                ys.push(resultant_mod(&fa, &ga, q));
            }
            z += 1;
        }
        let res = interpolate_mod(&xs, &ys, q);
        // combine with the previous residues
        let qb = BigInt::from(q);
        let minv = BigInt::from(inv_mod(reduce(&modulus, q), q));
        for (a, &r) in acc.iter_mut().zip(&res) {
            let diff = (BigInt::from(r) - &*a).mod_floor(&qb);
            let t = (diff * &minv).mod_floor(&qb);
            *a += &modulus * t;
        }
        modulus *= qb;
    }
    let half = &modulus >> 1;
    for a in acc.iter_mut() {
        if *a > half {
            *a -= &modulus;
        }
    }
    trim(&mut acc);
    Ok(acc)
}

/// Exact quotient of integer polynomials; errors if the division is not exact.
pub fn exact_div(num: &IntPoly, den: &IntPoly) -> Result<IntPoly> {
    let Some(dd) = degree(den) else {
        return Err(Error::Degenerate("division by zero polynomial".into()));
    };
    let mut r = num.clone();
    trim(&mut r);
    if r.is_empty() {
        return Ok(Vec::new());
    }
    if r.len() <= dd {
        return Err(Error::Degenerate("inexact polynomial division".into()));
    }
    let mut quot = vec![BigInt::zero(); r.len() - dd];
    for i in (0..quot.len()).rev() {
        let top = &r[i + dd];
        let (qc, rem) = top.div_rem(&den[dd]);
        if !rem.is_zero() {
            return Err(Error::Degenerate("inexact polynomial division".into()));
        }
        for (j, c) in den.iter().enumerate() {
            r[i + j] -= &qc * c;
        }
        quot[i] = qc;
    }
    if r.iter().any(|c| !c.is_zero()) {
        return Err(Error::Degenerate("inexact polynomial division".into()));
    }
    trim(&mut quot);
    Ok(quot)
}

/// Discriminant of `q` in `s`: `(-1)^{n(n-1)/2} Res(q, q_s) / lc(q)`.
///
/// Powers of `s` dividing `q` are removed first; `s = 0` is never a
/// singularity of the diagonal.
pub fn discriminant_in_s(q: &SPoly) -> Result<IntPoly> {
    let q = q.strip_s_power();
    let n = match q.s_degree() {
        Some(n) if n >= 1 => n,
        _ => return Err(Error::Degenerate("s-degree below 1".into())),
    };
    let lc = &q.coeffs[n];
    if lc.is_empty() {
        return Err(Error::Degenerate("vanishing leading coefficient".into()));
    }
    let res = resultant_in_s(&q, &q.derivative())?;
    let mut d = exact_div(&res, lc)?;
    if (n * (n - 1) / 2) % 2 == 1 {
        for c in d.iter_mut() {
            *c = -&*c;
        }
    }
    Ok(d)
}

// ---------------------------------------------------------------------------
// root finding

/// Complex number with a separate binary exponent: `m * 2^e`.
#[derive(Clone, Copy, Debug)]
struct XC {
    m: Complex64,
    e: i64,
}

impl XC {
    const ZERO: XC = XC {
        m: Complex64::new(0.0, 0.0),
        e: 0,
    };

    fn norm(self) -> XC {
        let a = self.m.re.abs().max(self.m.im.abs());
        if a == 0.0 || !a.is_finite() {
            return XC { m: self.m, e: 0 };
        }
        let k = a.log2().floor() as i64;
        XC {
            m: self.m * 2f64.powi(-k as i32),
            e: self.e + k,
        }
    }

    fn from_big(c: &BigInt) -> XC {
        let bits = c.bits() as i64;
        let shift = (bits - 60).max(0);
        let top = (c >> shift as usize).to_f64().unwrap_or(0.0);
        XC {
            m: Complex64::new(top, 0.0),
            e: shift,
        }
        .norm()
    }

    fn is_zero(&self) -> bool {
        self.m.re == 0.0 && self.m.im == 0.0
    }

    fn add(self, o: XC) -> XC {
        if self.is_zero() {
            return o;
        }
        if o.is_zero() {
            return self;
        }
        let (hi, lo) = if self.e >= o.e { (self, o) } else { (o, self) };
        let d = hi.e - lo.e;
        if d > 1100 {
            return hi;
        }
        XC {
            m: hi.m + lo.m * 2f64.powi(-(d as i32)),
            e: hi.e,
        }
        .norm()
    }

    fn mul_c(self, z: Complex64) -> XC {
        XC { m: self.m * z, e: self.e }.norm()
    }

    /// `self / o` as a plain complex number (saturating).
    fn ratio(self, o: XC) -> Complex64 {
        let d = (self.e - o.e).clamp(-1000, 1000) as i32;
        self.m / o.m * 2f64.powi(d)
    }

    fn log2_abs(self) -> f64 {
        if self.is_zero() {
            f64::NEG_INFINITY
        } else {
            self.m.norm().log2() + self.e as f64
        }
    }
}

fn horner_with_derivative(c: &[XC], z: Complex64) -> (XC, XC) {
    let mut b = *c.last().unwrap();
    let mut d = XC::ZERO;
    for ci in c.iter().rev().skip(1) {
        d = d.mul_c(z).add(b);
        b = b.mul_c(z).add(*ci);
    }
    (b, d)
}

fn horner_abs(c: &[XC], r: f64) -> XC {
    let z = Complex64::new(r, 0.0);
    c.iter().rev().fold(XC::ZERO, |acc, ci| acc.mul_c(z).add(*ci))
}

/// Roots of an integer polynomial with their residual record.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct RootSet {
    /// All complex roots, repeated by multiplicity, sorted by (real, imag).
    pub roots: Vec<(f64, f64)>,
    /// `log2 |poly(root)|` minus `log2 (max|coeff| max(1,|root|)^deg)`.
    pub relative_residual_log2: Vec<f64>,
    pub tol: f64,
    pub iterations: usize,
    pub converged: bool,
}

impl RootSet {
    pub fn degree(&self) -> usize {
        self.roots.len()
    }

    pub fn residuals_ok(&self) -> bool {
        let lt = self.tol.log2();
        self.relative_residual_log2.iter().all(|&r| r <= lt)
    }
}

/// Aberth–Ehrlich iteration started from the Newton polygon radii.
pub fn find_roots(poly: &IntPoly, tol: f64) -> Result<RootSet> {
    let mut p = poly.clone();
    trim(&mut p);
    let Some(deg) = degree(&p) else {
        return Err(Error::Degenerate("zero polynomial".into()));
    };
    if deg == 0 {
        return Err(Error::Degenerate("constant polynomial has no roots".into()));
    }
    if tol <= 0.0 {
        return Err(Error::InvalidArgument("tolerance must be positive".into()));
    }
    let zeros = p.iter().take_while(|c| c.is_zero()).count();
    let core: Vec<BigInt> = p[zeros..].to_vec();
    let n = core.len() - 1;
    let c: Vec<XC> = core.iter().map(XC::from_big).collect();
    let c_abs: Vec<XC> = c.iter().map(|x| XC { m: Complex64::new(x.m.norm(), 0.0), e: x.e }).collect();
    let mut z = initial_guesses(&c);
    let mut iterations = 0;
    let mut converged = n == 0;
    let max_iter = 2000;
    let mut done = vec![false; n];
    while !converged && iterations < max_iter {
        iterations += 1;
        let mut all = true;
        for k in 0..n {
            if done[k] {
                continue;
            }
            let (pv, dv) = horner_with_derivative(&c, z[k]);
            // at rounding level: nothing more to gain (multiple roots end here)
            let floor = horner_abs(&c_abs, z[k].norm()).log2_abs() + (4.0 * n as f64 * f64::EPSILON).log2();
            if pv.is_zero() || pv.log2_abs() <= floor {
                done[k] = true;
                continue;
            }
            let ratio = pv.ratio(dv);
            let mut sum = Complex64::new(0.0, 0.0);
            for j in 0..n {
                if j != k {
                    sum += 1.0 / (z[k] - z[j]);
                }
            }
            let w = ratio / (1.0 - ratio * sum);
            if !w.re.is_finite() || !w.im.is_finite() {
                continue;
            }
            z[k] -= w;
            if w.norm() <= 1e-15 * z[k].norm() {
                done[k] = true;
            } else {
                all = false;
            }
        }
        converged = all;
    }
    let log_max = c.iter().map(|x| x.log2_abs()).fold(f64::NEG_INFINITY, f64::max);
    let mut roots: Vec<Complex64> = vec![Complex64::new(0.0, 0.0); zeros];
    roots.extend(z);
    let residuals: Vec<f64> = roots
        .iter()
        .map(|&r| {
            if r.norm() == 0.0 && zeros > 0 {
                return f64::NEG_INFINITY;
            }
            let (pv, _) = horner_with_derivative(&c, r);
            let scale = log_max + deg as f64 * r.norm().max(1.0).log2();
            pv.log2_abs() - scale
        })
        .collect();
    let mut pairs: Vec<(Complex64, f64)> = roots.into_iter().zip(residuals).collect();
    pairs.sort_by(|a, b| {
        a.0.re
            .partial_cmp(&b.0.re)
            .unwrap_or(std::cmp::Ordering::Equal)
            .then(a.0.im.partial_cmp(&b.0.im).unwrap_or(std::cmp::Ordering::Equal))
    });
    Ok(RootSet {
        roots: pairs.iter().map(|(r, _)| (r.re, r.im)).collect(),
        relative_residual_log2: pairs.iter().map(|(_, e)| *e).collect(),
        tol,
        iterations,
        converged,
    })
}

/// Starting points on circles whose radii come from the upper convex hull
/// of `(i, log|c_i|)`.
fn initial_guesses(c: &[XC]) -> Vec<Complex64> {
    let n = c.len() - 1;
    let pts: Vec<(usize, f64)> = c
        .iter()
        .enumerate()
        .filter(|(_, x)| !x.is_zero())
        .map(|(i, x)| (i, x.log2_abs()))
        .collect();
    let mut hull: Vec<(usize, f64)> = Vec::new();
    for &p in &pts {
        while hull.len() >= 2 {
            let (a, b) = (hull[hull.len() - 2], hull[hull.len() - 1]);
            let cross = (b.0 as f64 - a.0 as f64) * (p.1 - a.1) - (b.1 - a.1) * (p.0 as f64 - a.0 as f64);
            if cross >= 0.0 {
                hull.pop();
            } else {
                break;
            }
        }
        hull.push(p);
    }
    let mut out = Vec::with_capacity(n);
    for w in hull.windows(2) {
        let (i, li) = w[0];
        let (j, lj) = w[1];
        let k = j - i;
        let r = 2f64.powf((li - lj) / k as f64);
        for t in 0..k {
            let ang = std::f64::consts::TAU * (t as f64 + 0.25) / k as f64 + 0.4 * out.len() as f64 / n as f64;
            out.push(Complex64::from_polar(r, ang));
        }
    }
    out
}

/// Sign of `p(x)` evaluated exactly at the dyadic rational `x`.
fn eval_dyadic_sign(p: &IntPoly, x: f64) -> Sign {
    // x = a / 2^K; scale by 2^{K (n-1)}
    const K: usize = 64;
    let a = BigInt::from_f64(x * 2f64.powi(K as i32)).unwrap_or_default();
    let n = p.len();
    let mut acc = BigInt::zero();
    for (i, c) in p.iter().enumerate().rev() {
        acc = acc * &a + (c << (K * (n - 1 - i)));
    }
    acc.sign()
}

/// Refine a positive real root by exact bisection when `p` changes sign
/// across it; returns `None` if no sign change brackets it.
fn refine_positive_root(p: &IntPoly, r: f64) -> Option<f64> {
    let mut lo = r * (1.0 - 1e-8);
    let mut hi = r * (1.0 + 1e-8);
    let slo = eval_dyadic_sign(p, lo);
    let shi = eval_dyadic_sign(p, hi);
    if slo == Sign::NoSign {
        return Some(lo);
    }
    if shi == Sign::NoSign {
        return Some(hi);
    }
    if slo == shi {
        return None;
    }
    for _ in 0..60 {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        let sm = eval_dyadic_sign(p, mid);
        if sm == Sign::NoSign {
            return Some(mid);
        }
        if sm == slo {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Some(0.5 * (lo + hi))
}

/// Result of the root selection at one level.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DiagonalRadius {
    /// Selected inverse radius `r^{-1}(l)`.
    pub selected: f64,
    /// `1 / max { xy : p(x, y) = 1 }`, computed without the discriminant.
    pub oracle: f64,
    /// Inverses of all positive real roots of the discriminant, descending.
    pub inverse_roots: Vec<f64>,
    /// Inverse roots at or above the previous level's value, rejected.
    pub rejected: Vec<f64>,
    pub previous: f64,
    pub discriminant_degree: usize,
}

/// The largest inverse positive real root of the discriminant of
/// `s^N_y (1 - p(s, z/s))` that is below `prev` (equality allowed up to a
/// relative `1e-9`).
pub fn diagonal_radius(p: &BivariatePolynomial, prev: f64) -> Result<DiagonalRadius> {
    let q = laurent_normalize(p);
    let disc = discriminant_in_s(&q)?;
    let roots = find_roots(&disc, 1e-12)?;
    if !roots.converged {
        return Err(Error::RootFinding(format!(
            "Aberth iteration stopped after {} steps",
            roots.iterations
        )));
    }
    let mut inv: Vec<f64> = roots
        .roots
        .iter()
        .filter(|&&(re, im)| re > 0.0 && im.abs() <= 1e-7 * re)
        .map(|&(re, _)| 1.0 / refine_positive_root(&disc, re).unwrap_or(re))
        .collect();
    inv.sort_by(|a, b| b.partial_cmp(a).unwrap());
    inv.dedup_by(|a, b| (*a - *b).abs() <= 1e-12 * b.abs());
    let limit = prev * (1.0 + 1e-9);
    let (below, rejected): (Vec<f64>, Vec<f64>) = inv.iter().partition(|&&r| r < limit);
    let selected = *below.first().ok_or(Error::NoRootBelow { prev })?;
    Ok(DiagonalRadius {
        selected,
        oracle: saddle_inverse_radius(p)?,
        inverse_roots: inv.clone(),
        rejected,
        previous: prev,
        discriminant_degree: disc.len().saturating_sub(1),
    })
}

/// Exact value of an integer polynomial at a rational point.
pub fn eval_rational(poly: &IntPoly, x: &BigRational) -> BigRational {
    poly.iter()
        .rev()
        .fold(BigRational::zero(), |acc, c| acc * x + BigRational::from_integer(c.clone()))
}

/// Whether `1/inverse_radius` is an exact root of the discriminant of
/// `s^N_y (1 - p(s, z/s))`.
pub fn is_exact_inverse_root(p: &BivariatePolynomial, inverse_radius: &BigRational) -> Result<bool> {
    if inverse_radius.is_zero() {
        return Ok(false);
    }
    let disc = discriminant_in_s(&laurent_normalize(p))?;
    Ok(eval_rational(&disc, &inverse_radius.recip()).is_zero())
}

/// `1 / max { xy : p(x, y) = 1, x, y > 0 }` for `p` with nonnegative
/// coefficients. Along `p = 1` in log coordinates the feasible set is convex,
/// so `log x + log y` is unimodal.
pub fn saddle_inverse_radius(p: &BivariatePolynomial) -> Result<f64> {
    if !p.has_nonnegative_coefficients() || p.is_zero() {
        return Err(Error::Degenerate("need a nonzero polynomial with nonnegative coefficients".into()));
    }
    let terms: Vec<(f64, f64, f64)> = p
        .terms
        .iter()
        .map(|(&(a, b), c)| (big_to_f64(c), a as f64, b as f64))
        .collect();
    let eval = |lx: f64, ly: f64| -> f64 { terms.iter().map(|&(c, a, b)| c * (a * lx + b * ly).exp()).sum() };
    let ly_of = |lx: f64| -> Option<f64> {
        let (mut lo, mut hi) = (-200.0f64, 200.0f64);
        if eval(lx, lo) >= 1.0 || eval(lx, hi) <= 1.0 {
            return None;
        }
        for _ in 0..200 {
            let mid = 0.5 * (lo + hi);
            if eval(lx, mid) < 1.0 {
                lo = mid
            } else {
                hi = mid
            }
        }
        Some(0.5 * (lo + hi))
    };
    let obj = |lx: f64| ly_of(lx).map(|ly| lx + ly).unwrap_or(f64::NEG_INFINITY);
    let mut best = (f64::NEG_INFINITY, 0.0);
    let mut lx = -30.0;
    while lx <= 30.0 {
        let v = obj(lx);
        if v > best.0 {
            best = (v, lx);
        }
        lx += 0.01;
    }
    if !best.0.is_finite() {
        return Err(Error::Degenerate("p = 1 has no positive solution".into()));
    }
    let (mut a, mut b) = (best.1 - 0.01, best.1 + 0.01);
    let g = (5f64.sqrt() - 1.0) / 2.0;
    for _ in 0..200 {
        let c = b - g * (b - a);
        let d = a + g * (b - a);
        if obj(c) > obj(d) {
            b = d
        } else {
            a = c
        }
    }
    Ok((-obj(0.5 * (a + b))).exp())
}
