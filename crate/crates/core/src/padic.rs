//! The p-adic valuation on Q, Hensel lifting of simple roots and of coprime
//! factorizations, and the branch oracle that evaluates the reference
//! valuation on Q[x]/(f) through resultants against a lifted local factor.

use crate::exactnum::{ExtendedValue, Rational};
use crate::polyring::{resultant, Poly, PolyError};
use crate::residue::{is_prime_u64, FFPoly, FiniteField, ResidueError};
use num_bigint::{BigInt, BigUint};
use num_integer::Integer;
use num_traits::{One, ToPrimitive, Zero};
use std::fmt;
use std::sync::Mutex;

pub const DEFAULT_INITIAL_PRECISION: u32 = 32;
pub const DEFAULT_MAX_PRECISION: u32 = 4096;

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum PadicError {
    NotPrime(u64),
    NotASimpleRoot(String),
    NotIntegral,
    NotMonic,
    PrecisionExhausted { max: u32 },
    BranchOutOfRange { got: usize, count: usize },
    Poly(PolyError),
    Residue(ResidueError),
}

impl fmt::Display for PadicError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            PadicError::NotPrime(p) => write!(f, "{p} is not prime"),
            PadicError::NotASimpleRoot(m) => write!(f, "not a simple residual root: {m}"),
            PadicError::NotIntegral => write!(f, "coefficients are not p-integral"),
            PadicError::NotMonic => write!(f, "polynomial must be monic"),
            PadicError::PrecisionExhausted { max } => {
                write!(f, "no stable value below the precision cap {max}")
            }
            PadicError::BranchOutOfRange { got, count } => {
                write!(f, "branch index {got} out of range: {count} branches")
            }
            PadicError::Poly(e) => write!(f, "{e}"),
            PadicError::Residue(e) => write!(f, "{e}"),
        }
    }
}

impl std::error::Error for PadicError {}

impl From<PolyError> for PadicError {
    fn from(e: PolyError) -> Self {
        PadicError::Poly(e)
    }
}

impl From<ResidueError> for PadicError {
    fn from(e: ResidueError) -> Self {
        PadicError::Residue(e)
    }
}

/// p-adic valuation of a nonzero integer.
pub fn vp_int(n: &BigInt, p: u64) -> Option<u64> {
    if n.is_zero() {
        return None;
    }
    let p = BigInt::from(p);
    let mut n = n.clone();
    let mut v = 0u64;
    loop {
        let (q, r) = n.div_rem(&p);
        if !r.is_zero() {
            return Some(v);
        }
        v += 1;
        n = q;
    }
}

/// Exact p-adic valuation on Q; vp(0) is infinite.
pub fn vp(r: &Rational, p: u64) -> ExtendedValue {
    if r.is_zero() {
        return ExtendedValue::Infinity;
    }
    let vn = vp_int(r.numer(), p).unwrap() as i64;
    let vd = vp_int(r.denom(), p).unwrap() as i64;
    ExtendedValue::from_rat(Rational::from_integer(BigInt::from(vn - vd)))
}

/// Reduce a p-integral rational to its class in [0, p).
pub fn rational_mod_p(r: &Rational, p: u64) -> Result<u64, PadicError> {
    let pb = BigInt::from(p);
    let den = r.denom().mod_floor(&pb);
    if den.is_zero() {
        return Err(PadicError::NotIntegral);
    }
    let num = r.numer().mod_floor(&pb);
    let num = num.to_u64().unwrap();
    let den = den.to_u64().unwrap();
    let inv = mod_inv_u64(den, p);
    Ok(((num as u128 * inv as u128) % p as u128) as u64)
}

fn mod_inv_u64(a: u64, p: u64) -> u64 {
    let (mut t, mut new_t): (i128, i128) = (0, 1);
    let (mut r, mut new_r): (i128, i128) = (p as i128, (a % p) as i128);
    while new_r != 0 {
        let q = r / new_r;
        (t, new_t) = (new_t, t - q * new_t);
        (r, new_r) = (new_r, r - q * new_r);
    }
    assert_eq!(r, 1);
    (((t % p as i128) + p as i128) % p as i128) as u64
}

/// Reduce a p-integral rational polynomial modulo p.
pub fn poly_mod_p(f: &Poly, field: &FiniteField) -> Result<FFPoly, PadicError> {
    let p = field.p();
    let mut coeffs = Vec::with_capacity(f.coeffs().len());
    for c in f.coeffs() {
        coeffs.push(field.from_u64(rational_mod_p(c, p)?));
    }
    Ok(field.poly_from_elems(coeffs))
}

/// An integer known modulo p^precision.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PadicInt {
    pub p: u64,
    pub precision: u32,
    pub value: BigUint,
}

impl PadicInt {
    pub fn new(p: u64, precision: u32, value: BigUint) -> PadicInt {
        let modulus = BigUint::from(p).pow(precision);
        PadicInt {
            p,
            precision,
            value: value % modulus,
        }
    }
}

/// Digits and partial sums of a Hensel-lifted simple root.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct HenselRoot {
    pub p: u64,
    /// digits a_0..a_n of the root, each in [0, p)
    pub digits: Vec<u64>,
    /// partial sums x_k = a_0 + a_1 p + ... + a_k p^k
    pub partial_sums: Vec<BigUint>,
}

impl HenselRoot {
    /// The k-th partial sum as an integer known modulo p^(k+1).
    pub fn partial(&self, k: usize) -> PadicInt {
        PadicInt::new(self.p, k as u32 + 1, self.partial_sums[k].clone())
    }
}

/// Lift the simple residual root r0 of g to n further digits, so that the
/// last partial sum x_n satisfies g(x_n) = 0 mod p^(n+1).
pub fn hensel_root(g: &Poly, p: u64, r0: u64, n: u32) -> Result<HenselRoot, PadicError> {
    if !is_prime_u64(p) {
        return Err(PadicError::NotPrime(p));
    }
    if g.is_zero() {
        return Err(PadicError::Poly(PolyError::ZeroInput));
    }
    // Scaling by the coefficient lcm does not move roots.
    let gi = clear_denominators(g);
    let r0 = r0 % p;
    let pb = BigInt::from(p);
    let g_at = |x: &BigUint, modulus: &BigUint| -> BigUint {
        let xb = BigInt::from(x.clone());
        let mb = BigInt::from(modulus.clone());
        let mut acc = BigInt::zero();
        for c in gi.iter().rev() {
            acc = (acc * &xb + c).mod_floor(&mb);
        }
        acc.to_biguint().unwrap()
    };
    let deriv: Vec<BigInt> = gi
        .iter()
        .enumerate()
        .skip(1)
        .map(|(i, c)| c * BigInt::from(i))
        .collect();
    let d_at_r0 = {
        let mut acc = BigInt::zero();
        let x = BigInt::from(r0);
        for c in deriv.iter().rev() {
            acc = (acc * &x + c).mod_floor(&pb);
        }
        acc.to_u64().unwrap()
    };
    let g_at_r0 = g_at(&BigUint::from(r0), &BigUint::from(p));
    if !g_at_r0.is_zero() {
        return Err(PadicError::NotASimpleRoot(format!(
            "g({r0}) != 0 mod {p}"
        )));
    }
    if d_at_r0 == 0 {
        return Err(PadicError::NotASimpleRoot(format!(
            "g'({r0}) = 0 mod {p}"
        )));
    }
    let inv = mod_inv_u64(d_at_r0, p);
    let mut digits = vec![r0];
    let mut x = BigUint::from(r0);
    let mut partial_sums = vec![x.clone()];
    let mut pk = BigUint::from(p);
    for _ in 1..=n {
        let pk1 = &pk * p;
        let e = g_at(&x, &pk1); // g(x) mod p^(k+1); divisible by p^k
        let ek = (&e / &pk) % p; // the obstructing digit
        let ek = ek.to_u64().unwrap();
        let digit = (p - (ek as u128 * inv as u128 % p as u128) as u64) % p;
        x += &pk * digit;
        digits.push(digit);
        partial_sums.push(x.clone());
        pk = pk1;
        debug_assert!(g_at(&x, &pk).is_zero());
    }
    Ok(HenselRoot {
        p,
        digits,
        partial_sums,
    })
}

fn clear_denominators(g: &Poly) -> Vec<BigInt> {
    let mut lcm = BigInt::one();
    for c in g.coeffs() {
        lcm = lcm.lcm(c.denom());
    }
    g.coeffs()
        .iter()
        .map(|c| (c * Rational::from_integer(lcm.clone())).to_integer())
        .collect()
}

/// A monic polynomial with coefficients known modulo p^precision.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PadicPoly {
    pub p: u64,
    pub precision: u32,
    /// constant first, coefficients in [0, p^precision); includes the leading 1
    pub coeffs: Vec<BigUint>,
}

impl PadicPoly {
    pub fn degree(&self) -> usize {
        self.coeffs.len() - 1
    }

    pub fn to_poly(&self) -> Poly {
        Poly::new(
            self.coeffs
                .iter()
                .map(|c| Rational::from_integer(BigInt::from(c.clone())))
                .collect(),
        )
    }

    /// Truncate the coefficients to a lower precision.
    pub fn reduced_to(&self, precision: u32) -> PadicPoly {
        if precision >= self.precision {
            return self.clone();
        }
        let modulus = BigUint::from(self.p).pow(precision);
        PadicPoly {
            p: self.p,
            precision,
            coeffs: self.coeffs.iter().map(|c| c % &modulus).collect(),
        }
    }
}

/// Monic lifts modulo p^precision of the coprime groups of f mod p. Each
/// group collects one irreducible factor of f mod p with its multiplicity;
/// groups are returned in the canonical order of their irreducible factors.
pub fn hensel_factor(f: &Poly, p: u64, precision: u32) -> Result<Vec<PadicPoly>, PadicError> {
    let groups = mod_p_groups(f, p)?;
    let field = FiniteField::prime(p)?;
    let modulus = BigUint::from(p).pow(precision);
    let fi = integral_coeffs_mod(f, p, &modulus)?;
    if groups.len() == 1 {
        return Ok(vec![PadicPoly {
            p,
            precision,
            coeffs: fi,
        }]);
    }
    let mut out = Vec::new();
    let mut rest = fi;
    let mut rest_groups = groups;
    while rest_groups.len() > 1 {
        let (pi, mult) = rest_groups.remove(0);
        let mut gbar = field.poly_one();
        for _ in 0..mult {
            gbar = field.poly_mul(&gbar, &pi);
        }
        let rest_poly_bar = {
            let mut acc = field.poly_one();
            for (pi2, m2) in &rest_groups {
                for _ in 0..*m2 {
                    acc = field.poly_mul(&acc, pi2);
                }
            }
            acc
        };
        let (g, h) = lift_coprime_pair(&rest, &gbar, &rest_poly_bar, p, precision, &field)?;
        out.push(PadicPoly {
            p,
            precision,
            coeffs: g,
        });
        rest = h;
    }
    out.push(PadicPoly {
        p,
        precision,
        coeffs: rest,
    });
    Ok(out)
}

/// The coprime groups of f mod p: (irreducible factor, multiplicity), in
/// canonical factor order. This ordering defines branch indices everywhere.
pub fn mod_p_groups(f: &Poly, p: u64) -> Result<Vec<(FFPoly, u32)>, PadicError> {
    if !f.is_monic() {
        return Err(PadicError::NotMonic);
    }
    let field = FiniteField::prime(p)?;
    let fbar = poly_mod_p(f, &field)?;
    let factors = field.factor(&fbar)?;
    Ok(factors)
}

fn integral_coeffs_mod(f: &Poly, p: u64, modulus: &BigUint) -> Result<Vec<BigUint>, PadicError> {
    let mb = BigInt::from(modulus.clone());
    let mut out = Vec::with_capacity(f.coeffs().len());
    for c in f.coeffs() {
        let den = c.denom();
        if vp_int(den, p) != Some(0) {
            return Err(PadicError::NotIntegral);
        }
        let dinv = mod_inv_big(&den.mod_floor(&mb), &mb);
        let val = (c.numer().mod_floor(&mb) * dinv).mod_floor(&mb);
        out.push(val.to_biguint().unwrap());
    }
    Ok(out)
}

fn mod_inv_big(a: &BigInt, m: &BigInt) -> BigInt {
    let e = a.extended_gcd(m);
    assert!(e.gcd.is_one(), "not invertible");
    e.x.mod_floor(m)
}

/// Linear Hensel lifting of f = g*h from mod p to mod p^precision, for gbar,
/// hbar monic and coprime mod p. Coefficient vectors are mod p^precision.
fn lift_coprime_pair(
    f: &[BigUint],
    gbar: &FFPoly,
    hbar: &FFPoly,
    p: u64,
    precision: u32,
    field: &FiniteField,
) -> Result<(Vec<BigUint>, Vec<BigUint>), PadicError> {
    let (d, _s, t) = field.poly_ext_gcd(gbar, hbar);
    if field.poly_degree(&d) != Some(0) {
        return Err(PadicError::Residue(ResidueError::NotIrreducible(
            "groups not coprime mod p".into(),
        )));
    }
    let mut g = lift_ff(gbar, field);
    let mut h = lift_ff(hbar, field);
    let mut pk = BigUint::from(p);
    for _ in 1..precision {
        let pk1 = &pk * p;
        // e = (f - g*h)/p^k mod p
        let prod = int_poly_mul_mod(&g, &h, &pk1);
        let mut e = Vec::with_capacity(f.len());
        for i in 0..f.len() {
            let a = f.get(i).cloned().unwrap_or_default() % &pk1;
            let b = prod.get(i).cloned().unwrap_or_default();
            let diff = (&a + &pk1 - b) % &pk1;
            debug_assert!((&diff % &pk).is_zero());
            e.push((diff / &pk) % p);
        }
        let ebar = field.poly_from_elems(
            e.iter()
                .map(|c| field.from_u64(c.to_u64().unwrap()))
                .collect(),
        );
        if !field.poly_is_zero(&ebar) {
            // delta_g = t*e mod gbar; delta_h = (e - delta_g*hbar)/gbar
            let dg = field.poly_divrem(&field.poly_mul(&t, &ebar), gbar).1;
            let num = field.poly_sub(&ebar, &field.poly_mul(&dg, hbar));
            let (dh, rem) = field.poly_divrem(&num, gbar);
            debug_assert!(field.poly_is_zero(&rem));
            add_scaled(&mut g, &dg, &pk, field);
            add_scaled(&mut h, &dh, &pk, field);
        }
        pk = pk1;
    }
    Ok((g, h))
}

fn lift_ff(f: &FFPoly, _field: &FiniteField) -> Vec<BigUint> {
    f.coeffs()
        .iter()
        .map(|c| BigUint::from(c.rep().first().copied().unwrap_or(0)))
        .collect()
}

fn int_poly_mul_mod(a: &[BigUint], b: &[BigUint], m: &BigUint) -> Vec<BigUint> {
    if a.is_empty() || b.is_empty() {
        return Vec::new();
    }
    let mut out = vec![BigUint::zero(); a.len() + b.len() - 1];
    for (i, x) in a.iter().enumerate() {
        if x.is_zero() {
            continue;
        }
        for (j, y) in b.iter().enumerate() {
            out[i + j] = (&out[i + j] + x * y) % m;
        }
    }
    out
}

fn add_scaled(target: &mut Vec<BigUint>, delta: &FFPoly, pk: &BigUint, _field: &FiniteField) {
    for (i, c) in delta.coeffs().iter().enumerate() {
        let d = BigUint::from(c.rep().first().copied().unwrap_or(0));
        if i >= target.len() {
            target.resize(i + 1, BigUint::zero());
        }
        target[i] += d * pk;
    }
}

/// Policy for the oracle's precision escalation.
#[derive(Debug, Clone)]
pub struct PrecisionPolicy {
    pub initial: u32,
    pub max: u32,
}

impl Default for PrecisionPolicy {
    fn default() -> Self {
        PrecisionPolicy {
            initial: DEFAULT_INITIAL_PRECISION,
            max: DEFAULT_MAX_PRECISION,
        }
    }
}

struct OracleCache {
    precision: u32,
    factor: Option<PadicPoly>,
}

/// The reference valuation on Q[x]/(f) attached to one coprime group of
/// f mod p: values are computed as vp(Res(F, g))/deg(F) against the lifted
/// group factor F, re-verified at doubled precision until stable.
pub struct BranchOracle {
    p: u64,
    minpoly: Poly,
    branch: usize,
    groups: Vec<(FFPoly, u32)>,
    local_degree: usize,
    policy: PrecisionPolicy,
    cache: Mutex<OracleCache>,
}

impl fmt::Debug for BranchOracle {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("BranchOracle")
            .field("p", &self.p)
            .field("minpoly", &self.minpoly.to_string())
            .field("branch", &self.branch)
            .field("local_degree", &self.local_degree)
            .finish()
    }
}

impl BranchOracle {
    pub fn new(
        p: u64,
        minpoly: Poly,
        branch: usize,
        policy: PrecisionPolicy,
    ) -> Result<BranchOracle, PadicError> {
        if !is_prime_u64(p) {
            return Err(PadicError::NotPrime(p));
        }
        if !minpoly.is_monic() {
            return Err(PadicError::NotMonic);
        }
        let groups = mod_p_groups(&minpoly, p)?;
        if branch >= groups.len() {
            return Err(PadicError::BranchOutOfRange {
                got: branch,
                count: groups.len(),
            });
        }
        let field = FiniteField::prime(p)?;
        let local_degree =
            field.poly_degree(&groups[branch].0).unwrap() * groups[branch].1 as usize;
        Ok(BranchOracle {
            p,
            minpoly,
            branch,
            groups,
            local_degree,
            policy,
            cache: Mutex::new(OracleCache {
                precision: 0,
                factor: None,
            }),
        })
    }

    pub fn p(&self) -> u64 {
        self.p
    }

    pub fn minpoly(&self) -> &Poly {
        &self.minpoly
    }

    pub fn branch(&self) -> usize {
        self.branch
    }

    pub fn branch_count(&self) -> usize {
        self.groups.len()
    }

    pub fn local_degree(&self) -> usize {
        self.local_degree
    }

    pub fn groups(&self) -> &[(FFPoly, u32)] {
        &self.groups
    }

    /// Residual description of the branch: its irreducible factor mod p.
    pub fn branch_residual(&self) -> &FFPoly {
        &self.groups[self.branch].0
    }

    fn factor_at(&self, precision: u32) -> Result<PadicPoly, PadicError> {
        let mut cache = self.cache.lock().unwrap();
        if cache.precision >= precision {
            if let Some(f) = &cache.factor {
                if f.precision >= precision {
                    return Ok(f.clone());
                }
            }
        }
        let factors = hensel_factor(&self.minpoly, self.p, precision)?;
        let factor = factors
            .into_iter()
            .nth(self.branch)
            .expect("branch validated at construction");
        cache.precision = precision;
        cache.factor = Some(factor.clone());
        Ok(factor)
    }

    /// The exact value of g(chi) under this branch's valuation, normalized so
    /// that the prime has value 1.
    pub fn value(&self, g: &Poly) -> Result<ExtendedValue, PadicError> {
        let (_, reduced) = g.euclid_div(&self.minpoly)?;
        if reduced.is_zero() {
            return Ok(ExtendedValue::Infinity);
        }
        // factor the p-content out first to keep the resultant p-integral
        let mut content_vp: Option<Rational> = None;
        for c in reduced.coeffs() {
            if let ExtendedValue::Finite(v) = vp(c, self.p) {
                content_vp = Some(match content_vp {
                    None => v,
                    Some(cur) => cur.min(v),
                });
            }
        }
        let content_vp = content_vp.expect("nonzero polynomial");
        let shift = content_vp
            .to_integer()
            .to_i64()
            .expect("content valuation fits i64");
        debug_assert!(content_vp.is_integer());
        let scale = pow_rat_int(self.p, -shift);
        let normalized = reduced.scale(&scale);
        let normalized = clear_non_p_denominators(&normalized, self.p);
        let deg_f = self.local_degree as i64;

        if self.groups.len() == 1 {
            // single-branch case: use the minimal polynomial itself, exactly
            let res = resultant(&normalized, &self.minpoly)?;
            let v = match vp(&res, self.p) {
                ExtendedValue::Infinity => {
                    // g shares a factor with f over Q, impossible for an
                    // irreducible minimal polynomial and nonzero g
                    return Err(PadicError::PrecisionExhausted {
                        max: self.policy.max,
                    });
                }
                ExtendedValue::Finite(v) => v,
            };
            return Ok(ExtendedValue::from_rat(
                content_vp + v / Rational::from_integer(BigInt::from(deg_f)),
            ));
        }

        let mut precision = self.policy.initial;
        let mut prev: Option<BigInt> = None;
        while precision <= self.policy.max {
            // the cache may hold a deeper lift; reduce it so that consecutive
            // iterations genuinely compare precision N against 2N
            let factor = self.factor_at(precision)?.reduced_to(precision);
            let fpoly = factor.to_poly();
            let res = resultant(&normalized, &fpoly)?;
            let stable = match vp(&res, self.p) {
                ExtendedValue::Infinity => None,
                ExtendedValue::Finite(v) => {
                    let vi = v.to_integer();
                    // guard: only trust valuations well inside the budget
                    let bound = BigInt::from(precision as i64) * BigInt::from(deg_f) / 2;
                    if vi <= bound {
                        Some(vi)
                    } else {
                        None
                    }
                }
            };
            if let Some(vi) = stable {
                if prev.as_ref() == Some(&vi) {
                    let v = Rational::new(vi, BigInt::from(deg_f));
                    return Ok(ExtendedValue::from_rat(content_vp.clone() + v));
                }
                prev = Some(vi);
            } else {
                prev = None;
            }
            precision = precision.saturating_mul(2);
        }
        Err(PadicError::PrecisionExhausted {
            max: self.policy.max,
        })
    }

    pub fn describe(&self) -> String {
        format!(
            "p={} branch {}/{} of {} (local degree {})",
            self.p,
            self.branch,
            self.groups.len(),
            self.minpoly,
            self.local_degree
        )
    }
}

fn pow_rat_int(p: u64, exp: i64) -> Rational {
    let mag = BigInt::from(p).pow(exp.unsigned_abs() as u32);
    if exp >= 0 {
        Rational::from_integer(mag)
    } else {
        Rational::new(BigInt::one(), mag)
    }
}

fn clear_non_p_denominators(f: &Poly, p: u64) -> Poly {
    let mut lcm = BigInt::one();
    for c in f.coeffs() {
        lcm = lcm.lcm(c.denom());
    }
    debug_assert_eq!(vp_int(&lcm, p), Some(0));
    f.scale(&Rational::from_integer(lcm))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::exactnum::rat;
    use crate::polyring::parse_poly;

    #[test]
    fn vp_examples() {
        assert_eq!(vp(&rat(50, 1), 5), rat(2, 1).into());
        assert_eq!(vp(&rat(0, 1), 2), ExtendedValue::Infinity);
        assert_eq!(vp(&rat(9, 2), 3), rat(2, 1).into());
        assert_eq!(vp(&rat(9, 2), 2), rat(-1, 1).into());
    }

    #[test]
    fn hensel_root_digits_of_cube_root_of_two() {
        let g = parse_poly("x^3-2").unwrap();
        let lift = hensel_root(&g, 5, 3, 4).unwrap();
        // x^3 = 2 has the simple residual root 3 mod 5; the digit stream is
        // pinned by x_k^3 = 2 mod 5^(k+1) at every step.
        assert_eq!(lift.digits[0], 3);
        assert_eq!(lift.digits[1], 0);
        assert_eq!(lift.digits[2], 2);
        assert_eq!(lift.partial_sums[2], BigUint::from(53u32));
        assert_eq!(lift.digits[3], 2);
        assert_eq!(lift.partial_sums[3], BigUint::from(303u32));
        let x3 = lift.partial(3);
        assert_eq!(x3.precision, 4);
        assert_eq!(x3.value, BigUint::from(303u32));
        // 303^3 = 2 mod 5^4 but continuing requires digit 3: 2178^3 = 2 mod 5^5
        // while 1553^3 = 1877 mod 5^5.
        assert_eq!(lift.digits[4], 3);
        assert_eq!(lift.partial_sums[4], BigUint::from(2178u32));
        let m = BigUint::from(5u32).pow(5);
        let x = lift.partial_sums[4].clone();
        assert_eq!((&x * &x * &x) % &m, BigUint::from(2u32) % &m);
    }

    #[test]
    fn hensel_root_digits_stable_under_deeper_lifts() {
        let g = parse_poly("x^3-2").unwrap();
        let short = hensel_root(&g, 5, 3, 4).unwrap();
        let long = hensel_root(&g, 5, 3, 12).unwrap();
        assert_eq!(&long.digits[..5], &short.digits[..]);
        let m = BigUint::from(5u32).pow(13);
        let x = long.partial_sums[12].clone();
        assert_eq!((&x * &x * &x) % &m, BigUint::from(2u32) % &m);
    }

    #[test]
    fn hensel_root_rejects_non_simple_roots() {
        let g = parse_poly("x^2-4").unwrap();
        assert!(matches!(
            hensel_root(&g, 2, 2, 3),
            Err(PadicError::NotASimpleRoot(_))
        ));
        let h = parse_poly("x^2-1").unwrap();
        assert!(matches!(
            hensel_root(&h, 5, 2, 3),
            Err(PadicError::NotASimpleRoot(_))
        ));
    }

    #[test]
    fn hensel_factor_splits_coprime_roots() {
        let f = parse_poly("x^2-1").unwrap();
        let factors = hensel_factor(&f, 3, 4).unwrap();
        assert_eq!(factors.len(), 2);
        let m = BigUint::from(81u32);
        // canonical order puts x+1 (rep [1,1]) before x+2 (= x-1 mod 3)
        assert_eq!(factors[0].coeffs, vec![BigUint::from(1u32), BigUint::from(1u32)]);
        assert_eq!(factors[1].coeffs, vec![&m - BigUint::from(1u32) % &m, BigUint::one()]);
        let prod = int_poly_mul_mod(&factors[0].coeffs, &factors[1].coeffs, &m);
        assert_eq!(prod, vec![&m - BigUint::one(), BigUint::zero(), BigUint::one()]);
    }

    #[test]
    fn hensel_factor_single_group_for_two_adic_fixture() {
        let f = parse_poly("x^6+3*x^5+6*x^4+3*x^3+9*x+9").unwrap();
        let factors = hensel_factor(&f, 2, 16).unwrap();
        assert_eq!(factors.len(), 1);
        assert_eq!(factors[0].degree(), 6);
    }

    #[test]
    fn hensel_factor_three_branches_at_five() {
        let f = parse_poly("x^6+3*x^5+6*x^4+3*x^3+9*x+9").unwrap();
        let factors = hensel_factor(&f, 5, 24).unwrap();
        assert_eq!(factors.len(), 3);
        let m = BigUint::from(5u32).pow(24);
        let mut prod = factors[0].coeffs.clone();
        for f2 in &factors[1..] {
            prod = int_poly_mul_mod(&prod, &f2.coeffs, &m);
        }
        let expect = integral_coeffs_mod(&f, 5, &m).unwrap();
        assert_eq!(prod, expect);
        for f2 in &factors {
            assert_eq!(f2.degree(), 2);
        }
    }

    #[test]
    fn oracle_values_on_two_adic_fixture() {
        let f = parse_poly("x^6+3*x^5+6*x^4+3*x^3+9*x+9").unwrap();
        let oracle = BranchOracle::new(2, f.clone(), 0, PrecisionPolicy::default()).unwrap();
        assert_eq!(oracle.branch_count(), 1);
        assert_eq!(oracle.local_degree(), 6);
        assert_eq!(oracle.value(&parse_poly("x").unwrap()).unwrap(), rat(0, 1).into());
        assert_eq!(
            oracle.value(&parse_poly("x^2+x+1").unwrap()).unwrap(),
            rat(1, 3).into()
        );
        assert_eq!(oracle.value(&f).unwrap(), ExtendedValue::Infinity);
    }

    #[test]
    fn oracle_values_on_three_adic_fixture() {
        let f = parse_poly("x^6+3*x^5+6*x^4+3*x^3+9*x+9").unwrap();
        let oracle = BranchOracle::new(3, f, 0, PrecisionPolicy::default()).unwrap();
        assert_eq!(oracle.branch_count(), 1);
        assert_eq!(
            oracle.value(&parse_poly("x").unwrap()).unwrap(),
            rat(1, 3).into()
        );
        assert_eq!(
            oracle.value(&parse_poly("x^3+6*x^2+12*x+6").unwrap()).unwrap(),
            rat(11, 6).into()
        );
        assert_eq!(
            oracle.value(&parse_poly("x^2").unwrap()).unwrap(),
            rat(2, 3).into()
        );
    }

    #[test]
    fn oracle_value_on_five_adic_branch_of_cubic() {
        let f = parse_poly("x^3-2").unwrap();
        let oracle = BranchOracle::new(5, f, 0, PrecisionPolicy::default()).unwrap();
        assert_eq!(oracle.branch_count(), 2);
        assert_eq!(oracle.local_degree(), 1);
        assert_eq!(
            oracle.value(&parse_poly("x-3").unwrap()).unwrap(),
            rat(2, 1).into()
        );
    }

    #[test]
    fn oracle_partial_multiplicativity_and_ultrametric() {
        use rand::{Rng, SeedableRng};
        use rand_chacha::ChaCha8Rng;
        let f = parse_poly("x^6+3*x^5+6*x^4+3*x^3+9*x+9").unwrap();
        let oracle = BranchOracle::new(2, f, 0, PrecisionPolicy::default()).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for _ in 0..40 {
            let g = Poly::from_int_coeffs(&[
                rng.gen_range(-20..20),
                rng.gen_range(-20..20),
                rng.gen_range(-20..20),
            ]);
            let h = Poly::from_int_coeffs(&[
                rng.gen_range(-20..20),
                rng.gen_range(-20..20),
                rng.gen_range(-20..20),
            ]);
            if g.is_zero() || h.is_zero() {
                continue;
            }
            let vg = oracle.value(&g).unwrap();
            let vh = oracle.value(&h).unwrap();
            let vgh = oracle.value(&(&g * &h)).unwrap();
            assert_eq!(vgh, vg.clone() + vh.clone());
            let vsum = oracle.value(&(&g + &h)).unwrap();
            assert!(vsum >= ExtendedValue::min(vg.clone(), vh.clone()));
            if vg != vh {
                assert_eq!(vsum, ExtendedValue::min(vg, vh));
            }
        }
    }
}
