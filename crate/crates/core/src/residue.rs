//! Arithmetic in F_p and in simple extensions F_p[t]/(pi), with complete
//! factorization of small-degree polynomials over these fields.
//!
//! Fields are always presented as simple extensions of the prime field, never
//! as towers. Factorization runs squarefree + distinct-degree decomposition
//! first; equal-degree parts are then split by trial division over enumerated
//! monic polynomials when the candidate space is small, and by a
//! deterministic sweep of splitting elements otherwise.

use num_bigint::BigUint;
use num_traits::{One, Zero};
use std::cmp::Ordering;
use std::fmt;

/// Candidate spaces up to this size are searched exhaustively.
const ENUM_LIMIT: u128 = 200_000;

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum ResidueError {
    NotPrime(u64),
    NotIrreducible(String),
    ZeroInput,
    DegreeTooSmall,
    SplitterExhausted,
}

impl fmt::Display for ResidueError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ResidueError::NotPrime(p) => write!(f, "{p} is not prime"),
            ResidueError::NotIrreducible(m) => write!(f, "{m} is not irreducible"),
            ResidueError::ZeroInput => write!(f, "zero polynomial"),
            ResidueError::DegreeTooSmall => write!(f, "polynomial must have degree >= 1"),
            ResidueError::SplitterExhausted => {
                write!(f, "no splitting element found in the deterministic sweep")
            }
        }
    }
}

impl std::error::Error for ResidueError {}

pub fn is_prime_u64(n: u64) -> bool {
    if n < 2 {
        return false;
    }
    if n % 2 == 0 {
        return n == 2;
    }
    let mut d = 3u64;
    while d.checked_mul(d).map_or(false, |sq| sq <= n) {
        if n % d == 0 {
            return false;
        }
        d += 2;
    }
    true
}

/// An element of F_p[t]/(pi): the residue of a polynomial of degree below
/// deg(pi), stored as base-p digits, constant first.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct FFElem {
    rep: Vec<u64>,
}

impl FFElem {
    pub fn rep(&self) -> &[u64] {
        &self.rep
    }
}

/// F_p[t]/(pi) with pi monic irreducible over F_p. Degree 1 gives the prime
/// field itself.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FiniteField {
    p: u64,
    modulus: Vec<u64>, // monic, constant first
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct FFPoly {
    coeffs: Vec<FFElem>, // constant first, no trailing zeros
}

// ---- scalar arithmetic mod p ----

fn sadd(p: u64, a: u64, b: u64) -> u64 {
    (a + b) % p
}

fn ssub(p: u64, a: u64, b: u64) -> u64 {
    (a + p - b % p) % p
}

fn smul(p: u64, a: u64, b: u64) -> u64 {
    ((a as u128 * b as u128) % p as u128) as u64
}

fn sinv(p: u64, a: u64) -> u64 {
    // extended euclid
    let (mut t, mut new_t): (i128, i128) = (0, 1);
    let (mut r, mut new_r): (i128, i128) = (p as i128, (a % p) as i128);
    while new_r != 0 {
        let q = r / new_r;
        (t, new_t) = (new_t, t - q * new_t);
        (r, new_r) = (new_r, r - q * new_r);
    }
    assert_eq!(r, 1, "not invertible mod {p}");
    (((t % p as i128) + p as i128) % p as i128) as u64
}

// ---- polynomials over F_p as digit vectors (used for element reps) ----

fn ptrim(mut v: Vec<u64>) -> Vec<u64> {
    while v.last() == Some(&0) {
        v.pop();
    }
    v
}

fn pmul_mod(p: u64, a: &[u64], b: &[u64], modulus: &[u64]) -> Vec<u64> {
    if a.is_empty() || b.is_empty() {
        return Vec::new();
    }
    let mut prod = vec![0u64; a.len() + b.len() - 1];
    for (i, &x) in a.iter().enumerate() {
        if x == 0 {
            continue;
        }
        for (j, &y) in b.iter().enumerate() {
            prod[i + j] = (prod[i + j] + smul(p, x, y)) % p;
        }
    }
    prem(p, prod, modulus)
}

fn prem(p: u64, mut a: Vec<u64>, modulus: &[u64]) -> Vec<u64> {
    let dm = modulus.len() - 1;
    while a.len() > dm {
        let lead = *a.last().unwrap();
        let k = a.len() - 1;
        if lead != 0 {
            for (j, &mj) in modulus.iter().enumerate().take(dm) {
                a[k - dm + j] = ssub(p, a[k - dm + j], smul(p, lead, mj));
            }
        }
        a.pop();
    }
    ptrim(a)
}

impl FiniteField {
    pub fn prime(p: u64) -> Result<FiniteField, ResidueError> {
        if !is_prime_u64(p) {
            return Err(ResidueError::NotPrime(p));
        }
        Ok(FiniteField {
            p,
            modulus: vec![0, 1],
        })
    }

    /// Build F_p[t]/(pi); pi is verified irreducible over F_p.
    pub fn extension(p: u64, modulus: Vec<u64>) -> Result<FiniteField, ResidueError> {
        let prime = FiniteField::prime(p)?;
        let modulus: Vec<u64> = ptrim(modulus.into_iter().map(|c| c % p).collect());
        if modulus.len() < 2 {
            return Err(ResidueError::DegreeTooSmall);
        }
        if *modulus.last().unwrap() != 1 {
            return Err(ResidueError::NotIrreducible(
                "modulus must be monic".into(),
            ));
        }
        if modulus.len() > 2 {
            let as_poly = FFPoly {
                coeffs: modulus
                    .iter()
                    .map(|&c| prime.from_u64(c))
                    .collect::<Vec<_>>(),
            };
            if !prime.is_irreducible(&as_poly)? {
                return Err(ResidueError::NotIrreducible(format!(
                    "modulus {:?} over F_{p}",
                    modulus
                )));
            }
        }
        Ok(FiniteField { p, modulus })
    }

    pub fn p(&self) -> u64 {
        self.p
    }

    /// Extension degree over the prime field.
    pub fn degree(&self) -> usize {
        self.modulus.len() - 1
    }

    pub fn modulus(&self) -> &[u64] {
        &self.modulus
    }

    pub fn order(&self) -> u128 {
        (self.p as u128).pow(self.degree() as u32)
    }

    pub fn zero(&self) -> FFElem {
        FFElem { rep: Vec::new() }
    }

    pub fn one(&self) -> FFElem {
        self.from_u64(1)
    }

    pub fn from_u64(&self, c: u64) -> FFElem {
        let c = c % self.p;
        if c == 0 && self.degree() >= 1 {
            return self.zero();
        }
        FFElem { rep: vec![c] }
    }

    pub fn from_i64(&self, c: i64) -> FFElem {
        let m = self.p as i64;
        self.from_u64(((c % m) + m) as u64)
    }

    /// The class of t, the generator of the extension.
    pub fn generator(&self) -> FFElem {
        if self.degree() == 1 {
            // t reduces to a scalar: pi = t + c means t = -c.
            return self.from_i64(-(self.modulus[0] as i64));
        }
        FFElem { rep: vec![0, 1] }
    }

    pub fn is_zero(&self, a: &FFElem) -> bool {
        a.rep.is_empty()
    }

    pub fn add(&self, a: &FFElem, b: &FFElem) -> FFElem {
        let n = a.rep.len().max(b.rep.len());
        let mut rep = vec![0u64; n];
        for (i, slot) in rep.iter_mut().enumerate() {
            let x = a.rep.get(i).copied().unwrap_or(0);
            let y = b.rep.get(i).copied().unwrap_or(0);
            *slot = sadd(self.p, x, y);
        }
        FFElem { rep: ptrim(rep) }
    }

    pub fn sub(&self, a: &FFElem, b: &FFElem) -> FFElem {
        let n = a.rep.len().max(b.rep.len());
        let mut rep = vec![0u64; n];
        for (i, slot) in rep.iter_mut().enumerate() {
            let x = a.rep.get(i).copied().unwrap_or(0);
            let y = b.rep.get(i).copied().unwrap_or(0);
            *slot = ssub(self.p, x, y);
        }
        FFElem { rep: ptrim(rep) }
    }

    pub fn neg(&self, a: &FFElem) -> FFElem {
        self.sub(&self.zero(), a)
    }

    pub fn mul(&self, a: &FFElem, b: &FFElem) -> FFElem {
        FFElem {
            rep: pmul_mod(self.p, &a.rep, &b.rep, &self.modulus),
        }
    }

    pub fn inv(&self, a: &FFElem) -> FFElem {
        assert!(!self.is_zero(a), "inverting zero");
        // extended euclid in F_p[t]
        let (mut r0, mut r1) = (self.modulus.clone(), a.rep.clone());
        let (mut s0, mut s1): (Vec<u64>, Vec<u64>) = (Vec::new(), vec![1]);
        while !r1.is_empty() {
            let (q, r) = fp_divrem(self.p, &r0, &r1);
            let qs1 = fp_mul(self.p, &q, &s1);
            let new_s = fp_sub(self.p, &s0, &qs1);
            r0 = r1;
            r1 = r;
            s0 = s1;
            s1 = new_s;
        }
        // r0 = gcd, a unit since the modulus is irreducible
        assert_eq!(r0.len(), 1, "element not invertible: shared factor with modulus");
        let scale = sinv(self.p, r0[0]);
        let rep: Vec<u64> = s0.iter().map(|&c| smul(self.p, c, scale)).collect();
        FFElem {
            rep: prem(self.p, rep, &self.modulus),
        }
    }

    pub fn pow(&self, a: &FFElem, mut n: u128) -> FFElem {
        let mut base = a.clone();
        let mut acc = self.one();
        while n > 0 {
            if n & 1 == 1 {
                acc = self.mul(&acc, &base);
            }
            base = self.mul(&base, &base);
            n >>= 1;
        }
        acc
    }

    pub fn pow_big(&self, a: &FFElem, n: &BigUint) -> FFElem {
        let mut acc = self.one();
        let mut base = a.clone();
        let mut n = n.clone();
        let two = BigUint::from(2u32);
        while !n.is_zero() {
            if (&n % &two).is_one() {
                acc = self.mul(&acc, &base);
            }
            base = self.mul(&base, &base);
            n >>= 1;
        }
        acc
    }

    /// p-th root in F_{p^k}: c^(p^(k-1)).
    pub fn pth_root(&self, a: &FFElem) -> FFElem {
        let k = self.degree() as u32;
        if k == 1 {
            return a.clone();
        }
        self.pow(a, (self.p as u128).pow(k - 1))
    }

    /// Index of an element in the canonical enumeration (digits base p).
    pub fn elem_index(&self, a: &FFElem) -> u128 {
        let mut idx = 0u128;
        for &d in a.rep.iter().rev() {
            idx = idx * self.p as u128 + d as u128;
        }
        idx
    }

    pub fn elem_from_index(&self, mut idx: u128) -> FFElem {
        let mut rep = Vec::new();
        while idx > 0 {
            rep.push((idx % self.p as u128) as u64);
            idx /= self.p as u128;
        }
        FFElem { rep }
    }

    pub fn elem_to_string(&self, a: &FFElem) -> String {
        if self.is_zero(a) {
            return "0".to_string();
        }
        let mut parts = Vec::new();
        for (i, &c) in a.rep.iter().enumerate().rev() {
            if c == 0 {
                continue;
            }
            let s = match (i, c) {
                (0, c) => format!("{c}"),
                (1, 1) => "t".to_string(),
                (1, c) => format!("{c}*t"),
                (i, 1) => format!("t^{i}"),
                (i, c) => format!("{c}*t^{i}"),
            };
            parts.push(s);
        }
        parts.join("+")
    }

    // ---- polynomials over this field ----

    pub fn poly_from_elems(&self, coeffs: Vec<FFElem>) -> FFPoly {
        let mut coeffs = coeffs;
        while coeffs.last().map_or(false, |c| self.is_zero(c)) {
            coeffs.pop();
        }
        FFPoly { coeffs }
    }

    pub fn poly_zero(&self) -> FFPoly {
        FFPoly { coeffs: Vec::new() }
    }

    pub fn poly_one(&self) -> FFPoly {
        FFPoly {
            coeffs: vec![self.one()],
        }
    }

    pub fn poly_x(&self) -> FFPoly {
        FFPoly {
            coeffs: vec![self.zero(), self.one()],
        }
    }

    pub fn poly_from_i64(&self, coeffs: &[i64]) -> FFPoly {
        self.poly_from_elems(coeffs.iter().map(|&c| self.from_i64(c)).collect())
    }

    pub fn poly_is_zero(&self, f: &FFPoly) -> bool {
        f.coeffs.is_empty()
    }

    pub fn poly_degree(&self, f: &FFPoly) -> Option<usize> {
        if f.coeffs.is_empty() {
            None
        } else {
            Some(f.coeffs.len() - 1)
        }
    }

    pub fn poly_add(&self, f: &FFPoly, g: &FFPoly) -> FFPoly {
        let n = f.coeffs.len().max(g.coeffs.len());
        let mut out = Vec::with_capacity(n);
        for i in 0..n {
            let a = f.coeffs.get(i).cloned().unwrap_or_else(|| self.zero());
            let b = g.coeffs.get(i).cloned().unwrap_or_else(|| self.zero());
            out.push(self.add(&a, &b));
        }
        self.poly_from_elems(out)
    }

    pub fn poly_sub(&self, f: &FFPoly, g: &FFPoly) -> FFPoly {
        let n = f.coeffs.len().max(g.coeffs.len());
        let mut out = Vec::with_capacity(n);
        for i in 0..n {
            let a = f.coeffs.get(i).cloned().unwrap_or_else(|| self.zero());
            let b = g.coeffs.get(i).cloned().unwrap_or_else(|| self.zero());
            out.push(self.sub(&a, &b));
        }
        self.poly_from_elems(out)
    }

    pub fn poly_mul(&self, f: &FFPoly, g: &FFPoly) -> FFPoly {
        if f.coeffs.is_empty() || g.coeffs.is_empty() {
            return self.poly_zero();
        }
        let mut out = vec![self.zero(); f.coeffs.len() + g.coeffs.len() - 1];
        for (i, a) in f.coeffs.iter().enumerate() {
            if self.is_zero(a) {
                continue;
            }
            for (j, b) in g.coeffs.iter().enumerate() {
                let t = self.mul(a, b);
                out[i + j] = self.add(&out[i + j], &t);
            }
        }
        self.poly_from_elems(out)
    }

    pub fn poly_scale(&self, f: &FFPoly, c: &FFElem) -> FFPoly {
        self.poly_from_elems(f.coeffs.iter().map(|a| self.mul(a, c)).collect())
    }

    pub fn poly_divrem(&self, f: &FFPoly, g: &FFPoly) -> (FFPoly, FFPoly) {
        assert!(!self.poly_is_zero(g), "division by zero polynomial");
        let dg = self.poly_degree(g).unwrap();
        let lead_inv = self.inv(g.coeffs.last().unwrap());
        let mut rem = f.coeffs.clone();
        if rem.len() <= dg {
            return (self.poly_zero(), f.clone());
        }
        let mut quot = vec![self.zero(); rem.len() - dg];
        for k in (dg..rem.len()).rev() {
            let lead = self.mul(&rem[k], &lead_inv);
            rem[k] = self.zero();
            if self.is_zero(&lead) {
                continue;
            }
            for (j, gj) in g.coeffs.iter().enumerate().take(dg) {
                let t = self.mul(gj, &lead);
                rem[k - dg + j] = self.sub(&rem[k - dg + j], &t);
            }
            quot[k - dg] = lead;
        }
        rem.truncate(dg);
        (self.poly_from_elems(quot), self.poly_from_elems(rem))
    }

    pub fn poly_gcd(&self, f: &FFPoly, g: &FFPoly) -> FFPoly {
        let (mut a, mut b) = (f.clone(), g.clone());
        while !self.poly_is_zero(&b) {
            let (_, r) = self.poly_divrem(&a, &b);
            a = b;
            b = r;
        }
        self.poly_monic(&a)
    }

    /// (gcd, s, t) with s*f + t*g = gcd and gcd monic.
    pub fn poly_ext_gcd(&self, f: &FFPoly, g: &FFPoly) -> (FFPoly, FFPoly, FFPoly) {
        let (mut r0, mut r1) = (f.clone(), g.clone());
        let (mut s0, mut s1) = (self.poly_one(), self.poly_zero());
        let (mut t0, mut t1) = (self.poly_zero(), self.poly_one());
        while !self.poly_is_zero(&r1) {
            let (q, r) = self.poly_divrem(&r0, &r1);
            let new_s = self.poly_sub(&s0, &self.poly_mul(&q, &s1));
            let new_t = self.poly_sub(&t0, &self.poly_mul(&q, &t1));
            r0 = r1;
            r1 = r;
            s0 = s1;
            s1 = new_s;
            t0 = t1;
            t1 = new_t;
        }
        if self.poly_is_zero(&r0) {
            return (r0, s0, t0);
        }
        let lead_inv = self.inv(r0.coeffs.last().unwrap());
        (
            self.poly_scale(&r0, &lead_inv),
            self.poly_scale(&s0, &lead_inv),
            self.poly_scale(&t0, &lead_inv),
        )
    }

    pub fn poly_monic(&self, f: &FFPoly) -> FFPoly {
        if self.poly_is_zero(f) {
            return f.clone();
        }
        let inv = self.inv(f.coeffs.last().unwrap());
        self.poly_scale(f, &inv)
    }

    pub fn poly_eval(&self, f: &FFPoly, x: &FFElem) -> FFElem {
        let mut acc = self.zero();
        for c in f.coeffs.iter().rev() {
            acc = self.add(&self.mul(&acc, x), c);
        }
        acc
    }

    pub fn poly_derivative(&self, f: &FFPoly) -> FFPoly {
        let mut out = Vec::new();
        for (i, c) in f.coeffs.iter().enumerate().skip(1) {
            let scale = self.from_u64((i as u64) % self.p);
            out.push(self.mul(c, &scale));
        }
        self.poly_from_elems(out)
    }

    pub fn poly_pow_mod(&self, base: &FFPoly, exp: &BigUint, modulus: &FFPoly) -> FFPoly {
        let mut acc = self.poly_one();
        let (_, mut b) = self.poly_divrem(base, modulus);
        let mut n = exp.clone();
        let two = BigUint::from(2u32);
        while !n.is_zero() {
            if (&n % &two).is_one() {
                let prod = self.poly_mul(&acc, &b);
                acc = self.poly_divrem(&prod, modulus).1;
            }
            let sq = self.poly_mul(&b, &b);
            b = self.poly_divrem(&sq, modulus).1;
            n >>= 1;
        }
        acc
    }

    pub fn poly_to_string(&self, f: &FFPoly) -> String {
        if self.poly_is_zero(f) {
            return "0".to_string();
        }
        let mut parts = Vec::new();
        for (i, c) in f.coeffs.iter().enumerate().rev() {
            if self.is_zero(c) {
                continue;
            }
            let cs = self.elem_to_string(c);
            let shown = if i == 0 {
                cs
            } else {
                let xs = if i == 1 { "x".to_string() } else { format!("x^{i}") };
                if cs == "1" {
                    xs
                } else if c.rep.len() > 1 {
                    format!("({cs})*{xs}")
                } else {
                    format!("{cs}*{xs}")
                }
            };
            parts.push(shown);
        }
        parts.join("+")
    }

    /// Total order on polynomials: by degree, then coefficients from the
    /// leading side down. Used everywhere a deterministic pick is needed.
    pub fn poly_cmp(&self, f: &FFPoly, g: &FFPoly) -> Ordering {
        let df = f.coeffs.len();
        let dg = g.coeffs.len();
        if df != dg {
            return df.cmp(&dg);
        }
        for i in (0..df).rev() {
            let a = self.elem_index(&f.coeffs[i]);
            let b = self.elem_index(&g.coeffs[i]);
            if a != b {
                return a.cmp(&b);
            }
        }
        Ordering::Equal
    }

    pub fn elem_cmp(&self, a: &FFElem, b: &FFElem) -> Ordering {
        self.elem_index(a).cmp(&self.elem_index(b))
    }

    /// Monic polynomial of degree d with coefficient vector given by the
    /// base-order digits of idx (constant digit first).
    fn monic_from_index(&self, d: usize, mut idx: u128) -> FFPoly {
        let q = self.order();
        let mut coeffs = Vec::with_capacity(d + 1);
        for _ in 0..d {
            coeffs.push(self.elem_from_index(idx % q));
            idx /= q;
        }
        coeffs.push(self.one());
        FFPoly { coeffs }
    }

    /// True iff g has no monic divisor of degree in [1, deg(g)/2]. Decided by
    /// exhaustive divisor enumeration when the space is small, by the
    /// deterministic Frobenius criterion otherwise.
    pub fn is_irreducible(&self, g: &FFPoly) -> Result<bool, ResidueError> {
        let d = match self.poly_degree(g) {
            None => return Err(ResidueError::ZeroInput),
            Some(0) => return Err(ResidueError::DegreeTooSmall),
            Some(d) => d,
        };
        if d == 1 {
            return Ok(true);
        }
        let half = d / 2;
        let q = self.order();
        if q.checked_pow(half as u32).map_or(false, |n| n <= ENUM_LIMIT) {
            for deg in 1..=half {
                let count = q.pow(deg as u32);
                for idx in 0..count {
                    let cand = self.monic_from_index(deg, idx);
                    let (_, r) = self.poly_divrem(g, &cand);
                    if self.poly_is_zero(&r) {
                        return Ok(false);
                    }
                }
            }
            return Ok(true);
        }
        Ok(self.is_irreducible_frobenius(g))
    }

    /// x^(q^d) == x mod g together with gcd(x^(q^(d/l)) - x, g) = 1 for the
    /// prime divisors l of d.
    fn is_irreducible_frobenius(&self, g: &FFPoly) -> bool {
        let d = self.poly_degree(g).unwrap();
        let q = BigUint::from(self.p) .pow(self.degree() as u32);
        let x = self.poly_x();
        let top = self.poly_pow_mod(&x, &q.pow(d as u32), g);
        if self.poly_sub(&top, &x) != self.poly_zero() {
            return false;
        }
        for l in prime_divisors(d) {
            let e = d / l;
            let fr = self.poly_pow_mod(&x, &q.pow(e as u32), g);
            let diff = self.poly_sub(&fr, &x);
            let gcd = self.poly_gcd(&diff, g);
            if self.poly_degree(&gcd) != Some(0) {
                return false;
            }
        }
        true
    }

    /// Monic irreducible factors with multiplicities, sorted canonically.
    pub fn factor(&self, g: &FFPoly) -> Result<Vec<(FFPoly, u32)>, ResidueError> {
        if self.poly_is_zero(g) {
            return Err(ResidueError::ZeroInput);
        }
        let g = self.poly_monic(g);
        if self.poly_degree(&g) == Some(0) {
            return Ok(Vec::new());
        }
        let mut out: Vec<(FFPoly, u32)> = Vec::new();
        for (part, mult) in self.squarefree_decomposition(&g) {
            for (irr_deg, prod) in self.distinct_degree(&part) {
                for factor in self.equal_degree(&prod, irr_deg)? {
                    out.push((factor, mult));
                }
            }
        }
        out.sort_by(|a, b| self.poly_cmp(&a.0, &b.0));
        // merge duplicates (cannot occur from a correct decomposition, but
        // keeps the output well-formed regardless)
        let mut merged: Vec<(FFPoly, u32)> = Vec::new();
        for (f, m) in out {
            if let Some(last) = merged.last_mut() {
                if last.0 == f {
                    last.1 += m;
                    continue;
                }
            }
            merged.push((f, m));
        }
        Ok(merged)
    }

    /// Squarefree monic parts with multiplicities; product of part^mult is g.
    fn squarefree_decomposition(&self, g: &FFPoly) -> Vec<(FFPoly, u32)> {
        let mut out = Vec::new();
        self.squarefree_inner(g, 1, &mut out);
        out
    }

    fn squarefree_inner(&self, g: &FFPoly, mult: u32, out: &mut Vec<(FFPoly, u32)>) {
        if self.poly_degree(g) == Some(0) {
            return;
        }
        let deriv = self.poly_derivative(g);
        if self.poly_is_zero(&deriv) {
            // g = h(x^p)
            let h = self.pth_root_poly(g);
            self.squarefree_inner(&h, mult * self.p as u32, out);
            return;
        }
        let mut c = self.poly_gcd(g, &deriv);
        let mut w = self.poly_divrem(g, &c).0;
        let mut i = 1u32;
        while self.poly_degree(&w) != Some(0) {
            let y = self.poly_gcd(&w, &c);
            let fac = self.poly_divrem(&w, &y).0;
            if self.poly_degree(&fac).map_or(false, |d| d > 0) {
                out.push((fac, mult * i));
            }
            w = y;
            c = self.poly_divrem(&c, &w).0;
            i += 1;
        }
        if self.poly_degree(&c).map_or(false, |d| d > 0) {
            let h = self.pth_root_poly(&c);
            self.squarefree_inner(&h, mult * self.p as u32, out);
        }
    }

    fn pth_root_poly(&self, g: &FFPoly) -> FFPoly {
        let p = self.p as usize;
        let mut out = Vec::new();
        for (i, c) in g.coeffs.iter().enumerate() {
            if i % p == 0 {
                out.push(self.pth_root(c));
            } else {
                debug_assert!(self.is_zero(c), "derivative-zero polynomial expected");
            }
        }
        self.poly_from_elems(out)
    }

    /// (d, product of the irreducible factors of degree d) for squarefree u.
    fn distinct_degree(&self, u: &FFPoly) -> Vec<(usize, FFPoly)> {
        let mut out = Vec::new();
        let mut u = self.poly_monic(u);
        let q = BigUint::from(self.p).pow(self.degree() as u32);
        let x = self.poly_x();
        let mut frob = x.clone();
        let mut d = 0usize;
        while self.poly_degree(&u).map_or(false, |du| du > 0) {
            d += 1;
            if 2 * d > self.poly_degree(&u).unwrap() {
                let du = self.poly_degree(&u).unwrap();
                out.push((du, u.clone()));
                break;
            }
            frob = self.poly_pow_mod(&frob, &q, &u);
            let diff = self.poly_sub(&frob, &x);
            let gd = self.poly_gcd(&diff, &u);
            if self.poly_degree(&gd).map_or(false, |dg| dg > 0) {
                out.push((d, gd.clone()));
                u = self.poly_divrem(&u, &gd).0;
                frob = self.poly_divrem(&frob, &u).1;
            }
        }
        out
    }

    /// Split a product of distinct degree-d irreducibles into the factors.
    fn equal_degree(&self, h: &FFPoly, d: usize) -> Result<Vec<FFPoly>, ResidueError> {
        let deg = self.poly_degree(h).unwrap();
        if deg == d {
            return Ok(vec![self.poly_monic(h)]);
        }
        let q = self.order();
        if q.checked_pow(d as u32).map_or(false, |n| n <= ENUM_LIMIT) {
            // trial division: a monic degree-d divisor of h is one of its
            // irreducible factors, so no separate irreducibility test runs
            let mut rest = self.poly_monic(h);
            let mut out = Vec::new();
            let count = q.pow(d as u32);
            'outer: for idx in 0..count {
                let cand = self.monic_from_index(d, idx);
                loop {
                    let (quo, rem) = self.poly_divrem(&rest, &cand);
                    if !self.poly_is_zero(&rem) {
                        break;
                    }
                    out.push(cand.clone());
                    rest = quo;
                    if self.poly_degree(&rest) == Some(0) {
                        break 'outer;
                    }
                }
            }
            debug_assert_eq!(self.poly_degree(&rest), Some(0), "trial division incomplete");
            return Ok(out);
        }
        // deterministic splitter sweep
        let mut pending = vec![self.poly_monic(h)];
        let mut done = Vec::new();
        while let Some(cur) = pending.pop() {
            if self.poly_degree(&cur) == Some(d) {
                done.push(cur);
                continue;
            }
            let (a, b) = self.split_once(&cur, d)?;
            pending.push(a);
            pending.push(b);
        }
        Ok(done)
    }

    fn split_once(&self, h: &FFPoly, d: usize) -> Result<(FFPoly, FFPoly), ResidueError> {
        let n = self.poly_degree(h).unwrap();
        let q = self.order();
        for j in 1..n {
            for ci in 0..q.min(ENUM_LIMIT) {
                let c = self.elem_from_index(ci);
                // candidate v = x^j + c
                let mut coeffs = vec![self.zero(); j + 1];
                coeffs[0] = c;
                coeffs[j] = self.one();
                let v = self.poly_from_elems(coeffs);
                let g = if self.p == 2 {
                    // trace splitter over characteristic 2
                    let bits = (d * self.degree()) as u32;
                    let mut tr = self.poly_divrem(&v, h).1;
                    let mut acc = tr.clone();
                    for _ in 1..bits {
                        let sq = self.poly_mul(&tr, &tr);
                        tr = self.poly_divrem(&sq, h).1;
                        acc = self.poly_add(&acc, &tr);
                    }
                    self.poly_gcd(&acc, h)
                } else {
                    let exp = (BigUint::from(q).pow(d as u32) - BigUint::one())
                        / BigUint::from(2u32);
                    let s = self.poly_pow_mod(&v, &exp, h);
                    let s1 = self.poly_sub(&s, &self.poly_one());
                    self.poly_gcd(&s1, h)
                };
                if let Some(dg) = self.poly_degree(&g) {
                    if dg > 0 && dg < n {
                        let rest = self.poly_divrem(h, &g).0;
                        return Ok((g, self.poly_monic(&rest)));
                    }
                }
            }
        }
        Err(ResidueError::SplitterExhausted)
    }

    /// Roots of g in this field, sorted canonically.
    pub fn roots(&self, g: &FFPoly) -> Result<Vec<FFElem>, ResidueError> {
        let mut out = Vec::new();
        for (factor, _) in self.factor(g)? {
            if self.poly_degree(&factor) == Some(1) {
                out.push(self.neg(&factor.coeffs[0]));
            }
        }
        out.sort_by(|a, b| self.elem_cmp(a, b));
        Ok(out)
    }

    /// Map a polynomial with prime-field coefficients into this field.
    pub fn poly_from_prime_coeffs(&self, coeffs: &[u64]) -> FFPoly {
        self.poly_from_elems(coeffs.iter().map(|&c| self.from_u64(c)).collect())
    }

    /// Coefficient-wise Frobenius x -> x^p.
    pub fn poly_frobenius_coeffs(&self, f: &FFPoly) -> FFPoly {
        self.poly_from_elems(
            f.coeffs
                .iter()
                .map(|c| self.pow(c, self.p as u128))
                .collect(),
        )
    }
}

impl FFPoly {
    pub fn coeffs(&self) -> &[FFElem] {
        &self.coeffs
    }

    pub fn coeff(&self, i: usize) -> Option<&FFElem> {
        self.coeffs.get(i)
    }
}

/// Smallest monic irreducible of the given degree over F_p, by enumeration
/// order; used to present composite residue fields over the prime field.
pub fn find_irreducible(p: u64, degree: usize) -> Result<Vec<u64>, ResidueError> {
    let prime = FiniteField::prime(p)?;
    if degree == 1 {
        return Ok(vec![0, 1]);
    }
    let q = p as u128;
    let count = q.checked_pow(degree as u32).ok_or(ResidueError::SplitterExhausted)?;
    let mut idx = 0u128;
    while idx < count {
        let cand = prime.monic_from_index(degree, idx);
        if prime.is_irreducible(&cand)? {
            let mut rep: Vec<u64> = cand
                .coeffs
                .iter()
                .map(|c| c.rep.first().copied().unwrap_or(0))
                .collect();
            while rep.len() < degree + 1 {
                rep.push(0);
            }
            return Ok(rep);
        }
        idx += 1;
    }
    Err(ResidueError::SplitterExhausted)
}

fn prime_divisors(mut n: usize) -> Vec<usize> {
    let mut out = Vec::new();
    let mut d = 2;
    while d * d <= n {
        if n % d == 0 {
            out.push(d);
            while n % d == 0 {
                n /= d;
            }
        }
        d += 1;
    }
    if n > 1 {
        out.push(n);
    }
    out
}

// F_p[t] helpers used by the extended euclid in `inv`
fn fp_mul(p: u64, a: &[u64], b: &[u64]) -> Vec<u64> {
    if a.is_empty() || b.is_empty() {
        return Vec::new();
    }
    let mut out = vec![0u64; a.len() + b.len() - 1];
    for (i, &x) in a.iter().enumerate() {
        for (j, &y) in b.iter().enumerate() {
            out[i + j] = (out[i + j] + smul(p, x, y)) % p;
        }
    }
    ptrim(out)
}

fn fp_sub(p: u64, a: &[u64], b: &[u64]) -> Vec<u64> {
    let n = a.len().max(b.len());
    let mut out = vec![0u64; n];
    for (i, slot) in out.iter_mut().enumerate() {
        let x = a.get(i).copied().unwrap_or(0);
        let y = b.get(i).copied().unwrap_or(0);
        *slot = ssub(p, x, y);
    }
    ptrim(out)
}

fn fp_divrem(p: u64, a: &[u64], b: &[u64]) -> (Vec<u64>, Vec<u64>) {
    assert!(!b.is_empty());
    let db = b.len() - 1;
    let lead_inv = sinv(p, *b.last().unwrap());
    let mut rem: Vec<u64> = a.to_vec();
    if rem.len() <= db {
        return (Vec::new(), ptrim(rem));
    }
    let mut quot = vec![0u64; rem.len() - db];
    for k in (db..rem.len()).rev() {
        let lead = smul(p, rem[k], lead_inv);
        rem[k] = 0;
        if lead == 0 {
            continue;
        }
        for (j, &bj) in b.iter().enumerate().take(db) {
            rem[k - db + j] = ssub(p, rem[k - db + j], smul(p, lead, bj));
        }
        quot[k - db] = lead;
    }
    rem.truncate(db);
    (ptrim(quot), ptrim(rem))
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn fixture_factorization_over_f2() {
        let f2 = FiniteField::prime(2).unwrap();
        let g = f2.poly_from_i64(&[1, 1, 0, 1, 0, 1, 1]); // x^6+x^5+x^3+x+1
        let factors = f2.factor(&g).unwrap();
        assert_eq!(factors.len(), 1);
        assert_eq!(factors[0].0, f2.poly_from_i64(&[1, 1, 1]));
        assert_eq!(factors[0].1, 3);
    }

    #[test]
    fn fixture_factorization_over_f3() {
        let f3 = FiniteField::prime(3).unwrap();
        let g = f3.poly_from_i64(&[1, 0, 0, 1]); // x^3+1
        let factors = f3.factor(&g).unwrap();
        assert_eq!(factors, vec![(f3.poly_from_i64(&[1, 1]), 3)]);
    }

    #[test]
    fn fixture_factorization_over_f25() {
        // F_5[t]/(t^2+t+1), the field written F_5(j) in the analysis output
        let f25 = FiniteField::extension(5, vec![1, 1, 1]).unwrap();
        let g = f25.poly_from_i64(&[-2, 0, 0, 1]); // x^3-2
        let factors = f25.factor(&g).unwrap();
        assert_eq!(factors.len(), 3);
        let t = f25.generator();
        let three = f25.from_u64(3);
        let mut expected_roots = vec![
            three.clone(),
            f25.mul(&three, &t),
            f25.mul(&three, &f25.mul(&t, &t)),
        ];
        expected_roots.sort_by(|a, b| f25.elem_cmp(a, b));
        let mut roots = f25.roots(&g).unwrap();
        roots.sort_by(|a, b| f25.elem_cmp(a, b));
        assert_eq!(roots, expected_roots);
        for (factor, mult) in &factors {
            assert_eq!(*mult, 1);
            assert_eq!(f25.poly_degree(factor), Some(1));
        }
    }

    #[test]
    fn irreducibility_examples() {
        let f2 = FiniteField::prime(2).unwrap();
        assert!(f2.is_irreducible(&f2.poly_from_i64(&[1, 1, 1])).unwrap());
        let f3 = FiniteField::prime(3).unwrap();
        assert!(!f3.is_irreducible(&f3.poly_from_i64(&[1, 1, 1])).unwrap());
        let f7 = FiniteField::prime(7).unwrap();
        assert!(f7.is_irreducible(&f7.poly_from_i64(&[3, 1])).unwrap());
        assert!(f2.is_irreducible(&f2.poly_zero()).is_err());
    }

    #[test]
    fn inverse_and_pow_agree() {
        let f25 = FiniteField::extension(5, vec![1, 1, 1]).unwrap();
        for idx in 1..25u128 {
            let a = f25.elem_from_index(idx);
            let inv = f25.inv(&a);
            assert_eq!(f25.mul(&a, &inv), f25.one());
            assert_eq!(inv, f25.pow(&a, 23)); // a^(q-2)
        }
    }

    #[test]
    fn frobenius_sanity() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        for p in [2u64, 3, 5] {
            let field = FiniteField::prime(p).unwrap();
            for _ in 0..20 {
                let deg = rng.gen_range(1..6);
                let coeffs: Vec<i64> = (0..=deg).map(|_| rng.gen_range(0..p as i64)).collect();
                let g = field.poly_from_i64(&coeffs);
                if field.poly_is_zero(&g) {
                    continue;
                }
                let lhs = {
                    let mut acc = field.poly_one();
                    for _ in 0..p {
                        acc = field.poly_mul(&acc, &g);
                    }
                    acc
                };
                // g(x)^p = g^sigma(x^p) with sigma the coefficient Frobenius
                let gp = field.poly_frobenius_coeffs(&g);
                let rhs = {
                    let mut out = vec![field.zero(); field.poly_degree(&gp).unwrap() * p as usize + 1];
                    for (i, c) in gp.coeffs().iter().enumerate() {
                        out[i * p as usize] = c.clone();
                    }
                    field.poly_from_elems(out)
                };
                assert_eq!(lhs, rhs);
            }
        }
    }

    #[test]
    fn random_factorizations_multiply_back() {
        let mut rng = ChaCha8Rng::seed_from_u64(99);
        let fields = vec![
            FiniteField::prime(2).unwrap(),
            FiniteField::prime(3).unwrap(),
            FiniteField::prime(5).unwrap(),
            FiniteField::prime(7).unwrap(),
            FiniteField::extension(2, vec![1, 1, 1]).unwrap(),
            FiniteField::extension(3, vec![1, 2, 0, 1]).unwrap(),
            FiniteField::extension(5, vec![1, 1, 1]).unwrap(),
            FiniteField::extension(7, vec![2, 0, 0, 1]).unwrap(),
        ];
        for field in &fields {
            for _ in 0..12 {
                let deg = rng.gen_range(1..=12);
                let mut coeffs: Vec<FFElem> = (0..deg)
                    .map(|_| field.elem_from_index(rng.gen_range(0..field.order())))
                    .collect();
                coeffs.push(field.one());
                let g = field.poly_from_elems(coeffs);
                let factors = field.factor(&g).unwrap();
                let mut prod = field.poly_one();
                for (f, m) in &factors {
                    assert!(field.is_irreducible(f).unwrap(), "reducible factor emitted");
                    for _ in 0..*m {
                        prod = field.poly_mul(&prod, f);
                    }
                }
                assert_eq!(prod, field.poly_monic(&g));
            }
        }
    }

    #[test]
    fn find_irreducible_returns_monic_irreducible() {
        for (p, d) in [(2u64, 2usize), (2, 6), (3, 2), (5, 2), (5, 3)] {
            let m = find_irreducible(p, d).unwrap();
            assert_eq!(m.len(), d + 1);
            assert_eq!(m[d], 1);
            let field = FiniteField::extension(p, m).unwrap();
            assert_eq!(field.degree(), d);
        }
    }
}
