//! Dense univariate polynomials over the rationals: euclidean division,
//! Phi-adic expansion, resultants, divided derivatives, and the text syntax
//! shared by the CLI (`x^6+3*x^5+6*x^4+3*x^3+9*x+9`).

use crate::exactnum::Rational;
use num_bigint::BigInt;
use num_traits::{One, Signed, Zero};
use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum PolyError {
    NonMonicDivisor,
    ZeroDivisor,
    ZeroInput,
    Parse(String),
}

impl fmt::Display for PolyError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            PolyError::NonMonicDivisor => write!(f, "divisor must be monic"),
            PolyError::ZeroDivisor => write!(f, "division by the zero polynomial"),
            PolyError::ZeroInput => write!(f, "operation requires a nonzero polynomial"),
            PolyError::Parse(msg) => write!(f, "polynomial syntax error: {msg}"),
        }
    }
}

impl std::error::Error for PolyError {}

/// Coefficients are stored lowest degree first with no trailing zeros.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Poly {
    coeffs: Vec<Rational>,
}

impl Poly {
    pub fn new(mut coeffs: Vec<Rational>) -> Poly {
        while coeffs.last().map_or(false, |c| c.is_zero()) {
            coeffs.pop();
        }
        Poly { coeffs }
    }

    pub fn zero() -> Poly {
        Poly { coeffs: Vec::new() }
    }

    pub fn one() -> Poly {
        Poly::constant(Rational::one())
    }

    pub fn constant(c: Rational) -> Poly {
        Poly::new(vec![c])
    }

    pub fn x() -> Poly {
        Poly::new(vec![Rational::zero(), Rational::one()])
    }

    /// c * x^k
    pub fn monomial(c: Rational, k: usize) -> Poly {
        if c.is_zero() {
            return Poly::zero();
        }
        let mut coeffs = vec![Rational::zero(); k + 1];
        coeffs[k] = c;
        Poly { coeffs }
    }

    pub fn from_int_coeffs(coeffs: &[i64]) -> Poly {
        Poly::new(
            coeffs
                .iter()
                .map(|&c| Rational::from_integer(BigInt::from(c)))
                .collect(),
        )
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.is_empty()
    }

    /// Degree, with deg 0 for nonzero constants; None for the zero polynomial.
    pub fn degree(&self) -> Option<usize> {
        if self.coeffs.is_empty() {
            None
        } else {
            Some(self.coeffs.len() - 1)
        }
    }

    pub fn deg_or_zero(&self) -> usize {
        self.degree().unwrap_or(0)
    }

    pub fn coeff(&self, k: usize) -> Rational {
        self.coeffs.get(k).cloned().unwrap_or_else(Rational::zero)
    }

    pub fn coeffs(&self) -> &[Rational] {
        &self.coeffs
    }

    pub fn leading(&self) -> Option<&Rational> {
        self.coeffs.last()
    }

    pub fn is_monic(&self) -> bool {
        self.leading().map_or(false, |c| c.is_one())
    }

    pub fn scale(&self, c: &Rational) -> Poly {
        if c.is_zero() {
            return Poly::zero();
        }
        Poly {
            coeffs: self.coeffs.iter().map(|a| a * c).collect(),
        }
    }

    pub fn eval(&self, x: &Rational) -> Rational {
        let mut acc = Rational::zero();
        for c in self.coeffs.iter().rev() {
            acc = acc * x + c;
        }
        acc
    }

    pub fn pow(&self, mut n: u32) -> Poly {
        let mut base = self.clone();
        let mut acc = Poly::one();
        while n > 0 {
            if n & 1 == 1 {
                acc = &acc * &base;
            }
            base = &base * &base;
            n >>= 1;
        }
        acc
    }

    /// Quotient and remainder of division by a monic polynomial; exact.
    pub fn euclid_div(&self, g: &Poly) -> Result<(Poly, Poly), PolyError> {
        if g.is_zero() {
            return Err(PolyError::ZeroDivisor);
        }
        if !g.is_monic() {
            return Err(PolyError::NonMonicDivisor);
        }
        let dg = g.degree().unwrap();
        let mut rem = self.coeffs.clone();
        if rem.len() <= dg {
            return Ok((Poly::zero(), self.clone()));
        }
        let mut quot = vec![Rational::zero(); rem.len() - dg];
        for k in (dg..rem.len()).rev() {
            let lead = std::mem::replace(&mut rem[k], Rational::zero());
            if lead.is_zero() {
                continue;
            }
            for (j, gj) in g.coeffs.iter().enumerate().take(dg) {
                let delta = gj * &lead;
                rem[k - dg + j] = &rem[k - dg + j] - &delta;
            }
            quot[k - dg] = lead;
        }
        rem.truncate(dg);
        Ok((Poly::new(quot), Poly::new(rem)))
    }

    /// Coefficients [f0, ..., fm] with f = sum fi * phi^i and deg fi < deg phi.
    pub fn phi_expand(&self, phi: &Poly) -> Result<Vec<Poly>, PolyError> {
        if phi.is_zero() || phi.degree() == Some(0) {
            return Err(PolyError::ZeroDivisor);
        }
        if !phi.is_monic() {
            return Err(PolyError::NonMonicDivisor);
        }
        let mut out = Vec::new();
        let mut rest = self.clone();
        loop {
            let (q, r) = rest.euclid_div(phi)?;
            out.push(r);
            if q.is_zero() {
                break;
            }
            rest = q;
        }
        Ok(out)
    }

    /// The i-th formal derivative divided by i!, in binomial form so that it
    /// stays meaningful after reduction to positive characteristic.
    pub fn divided_derivative(&self, i: usize) -> Poly {
        if i == 0 {
            return self.clone();
        }
        let mut out = Vec::new();
        for (k, c) in self.coeffs.iter().enumerate().skip(i) {
            out.push(c * Rational::from_integer(binomial(k, i)));
        }
        Poly::new(out)
    }

    pub fn derivative(&self) -> Poly {
        self.divided_derivative(1)
    }

    /// Substitute q for the variable: self(q(x)).
    pub fn compose(&self, q: &Poly) -> Poly {
        let mut acc = Poly::zero();
        for c in self.coeffs.iter().rev() {
            acc = &(&acc * q) + &Poly::constant(c.clone());
        }
        acc
    }
}

fn binomial(n: usize, k: usize) -> BigInt {
    let mut num = BigInt::one();
    let mut den = BigInt::one();
    for j in 0..k {
        num *= BigInt::from(n - j);
        den *= BigInt::from(j + 1);
    }
    num / den
}

/// Res(f, g) normalized as lc(g)^deg(f) times the product of f over the roots
/// of g, so that resultant(x^3-2, x-3) = 25.
pub fn resultant(f: &Poly, g: &Poly) -> Result<Rational, PolyError> {
    if f.is_zero() || g.is_zero() {
        return Err(PolyError::ZeroInput);
    }
    Ok(resultant_inner(f.clone(), g.clone()))
}

fn resultant_inner(f: Poly, g: Poly) -> Rational {
    let dg = g.degree().unwrap();
    if dg == 0 {
        // No roots: only the normalization factor lc(g)^deg f survives.
        return pow_rat(g.leading().unwrap(), f.deg_or_zero() as u32);
    }
    let df = f.degree().unwrap();
    if df == 0 {
        return pow_rat(f.leading().unwrap(), dg as u32);
    }
    // Reduce f modulo g. Division by the monic normalization of g keeps the
    // computation exact; the leading coefficient is restored afterwards.
    let lc = g.leading().unwrap().clone();
    let gm = g.scale(&(Rational::one() / &lc));
    let (_, r) = f.euclid_div(&gm).expect("monic by construction");
    if r.is_zero() {
        return Rational::zero();
    }
    let dr = r.degree().unwrap();
    // f = q*g + r on the roots of g, so prod f = prod r there.
    let scale = pow_rat(&lc, (df - dr) as u32);
    let sign = if (dr * dg) % 2 == 1 {
        -Rational::one()
    } else {
        Rational::one()
    };
    scale * sign * resultant_inner(g, r)
}

fn pow_rat(base: &Rational, mut n: u32) -> Rational {
    let mut b = base.clone();
    let mut acc = Rational::one();
    while n > 0 {
        if n & 1 == 1 {
            acc *= &b;
        }
        b = &b * &b;
        n >>= 1;
    }
    acc
}

impl<'a> Add for &'a Poly {
    type Output = Poly;

    fn add(self, rhs: &'a Poly) -> Poly {
        let n = self.coeffs.len().max(rhs.coeffs.len());
        let mut out = Vec::with_capacity(n);
        for k in 0..n {
            out.push(self.coeff(k) + rhs.coeff(k));
        }
        Poly::new(out)
    }
}

impl<'a> Sub for &'a Poly {
    type Output = Poly;

    fn sub(self, rhs: &'a Poly) -> Poly {
        let n = self.coeffs.len().max(rhs.coeffs.len());
        let mut out = Vec::with_capacity(n);
        for k in 0..n {
            out.push(self.coeff(k) - rhs.coeff(k));
        }
        Poly::new(out)
    }
}

impl Neg for &Poly {
    type Output = Poly;

    fn neg(self) -> Poly {
        Poly {
            coeffs: self.coeffs.iter().map(|c| -c).collect(),
        }
    }
}

impl<'a> Mul for &'a Poly {
    type Output = Poly;

    fn mul(self, rhs: &'a Poly) -> Poly {
        if self.is_zero() || rhs.is_zero() {
            return Poly::zero();
        }
        let mut out = vec![Rational::zero(); self.coeffs.len() + rhs.coeffs.len() - 1];
        for (i, a) in self.coeffs.iter().enumerate() {
            if a.is_zero() {
                continue;
            }
            for (j, b) in rhs.coeffs.iter().enumerate() {
                out[i + j] = &out[i + j] + &(a * b);
            }
        }
        Poly::new(out)
    }
}

impl fmt::Display for Poly {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_zero() {
            return write!(f, "0");
        }
        let mut first = true;
        for k in (0..self.coeffs.len()).rev() {
            let c = &self.coeffs[k];
            if c.is_zero() {
                continue;
            }
            let neg = c.is_negative();
            let mag = c.abs();
            if first {
                if neg {
                    write!(f, "-")?;
                }
                first = false;
            } else if neg {
                write!(f, "-")?;
            } else {
                write!(f, "+")?;
            }
            let coef_is_one = mag.is_one();
            if k == 0 {
                write!(f, "{}", mag)?;
            } else {
                if !coef_is_one {
                    write!(f, "{}*", mag)?;
                }
                if k == 1 {
                    write!(f, "x")?;
                } else {
                    write!(f, "x^{}", k)?;
                }
            }
        }
        Ok(())
    }
}

/// Parse the term syntax `c*x^k`, `x^k`, `c` joined by `+`/`-`. Coefficients
/// may be integers or fractions `a/b`; whitespace is ignored.
pub fn parse_poly(input: &str) -> Result<Poly, PolyError> {
    let s: String = input.chars().filter(|c| !c.is_whitespace()).collect();
    if s.is_empty() {
        return Err(PolyError::Parse("empty input".into()));
    }
    let bytes = s.as_bytes();
    let mut terms: Vec<(Rational, usize)> = Vec::new();
    let mut pos = 0usize;
    let mut sign = 1i64;
    if bytes[0] == b'+' || bytes[0] == b'-' {
        sign = if bytes[0] == b'-' { -1 } else { 1 };
        pos = 1;
    }
    while pos < bytes.len() {
        let (coef, exp, next) = parse_term(&s, pos)?;
        let coef = if sign < 0 { -coef } else { coef };
        terms.push((coef, exp));
        pos = next;
        if pos < bytes.len() {
            sign = match bytes[pos] {
                b'+' => 1,
                b'-' => -1,
                c => {
                    return Err(PolyError::Parse(format!(
                        "expected '+' or '-' at byte {pos}, found '{}'",
                        c as char
                    )))
                }
            };
            pos += 1;
            if pos >= bytes.len() {
                return Err(PolyError::Parse("dangling sign".into()));
            }
        }
    }
    let max_exp = terms.iter().map(|(_, e)| *e).max().unwrap_or(0);
    let mut coeffs = vec![Rational::zero(); max_exp + 1];
    for (c, e) in terms {
        coeffs[e] = &coeffs[e] + &c;
    }
    Ok(Poly::new(coeffs))
}

fn parse_term(s: &str, start: usize) -> Result<(Rational, usize, usize), PolyError> {
    let bytes = s.as_bytes();
    let mut pos = start;
    let mut coef = Rational::one();
    let mut saw_coef = false;
    if pos < bytes.len() && bytes[pos].is_ascii_digit() {
        let (num, next) = parse_uint(s, pos)?;
        pos = next;
        let mut c = Rational::from_integer(num);
        if pos < bytes.len() && bytes[pos] == b'/' {
            let (den, next) = parse_uint(s, pos + 1)?;
            if den.is_zero() {
                return Err(PolyError::Parse("zero denominator".into()));
            }
            c = Rational::new(c.numer().clone(), den);
            pos = next;
        }
        coef = c;
        saw_coef = true;
        if pos < bytes.len() && bytes[pos] == b'*' {
            pos += 1;
            if pos >= bytes.len() || bytes[pos] != b'x' {
                return Err(PolyError::Parse(format!("expected 'x' at byte {pos}")));
            }
        }
    }
    if pos < bytes.len() && bytes[pos] == b'x' {
        pos += 1;
        let exp = if pos < bytes.len() && bytes[pos] == b'^' {
            let (e, next) = parse_uint(s, pos + 1)?;
            pos = next;
            let e: usize = e
                .to_string()
                .parse()
                .map_err(|_| PolyError::Parse("exponent too large".into()))?;
            e
        } else {
            1
        };
        Ok((coef, exp, pos))
    } else if saw_coef {
        Ok((coef, 0, pos))
    } else {
        Err(PolyError::Parse(format!(
            "expected a term at byte {start}"
        )))
    }
}

fn parse_uint(s: &str, start: usize) -> Result<(BigInt, usize), PolyError> {
    let bytes = s.as_bytes();
    let mut pos = start;
    while pos < bytes.len() && bytes[pos].is_ascii_digit() {
        pos += 1;
    }
    if pos == start {
        return Err(PolyError::Parse(format!("expected digits at byte {start}")));
    }
    let num: BigInt = s[start..pos]
        .parse()
        .map_err(|_| PolyError::Parse("bad integer".into()))?;
    Ok((num, pos))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::exactnum::{rat, rat_int};
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn random_poly(rng: &mut ChaCha8Rng, max_deg: usize, height: i64) -> Poly {
        let deg = rng.gen_range(0..=max_deg);
        let coeffs: Vec<i64> = (0..=deg).map(|_| rng.gen_range(-height..=height)).collect();
        Poly::from_int_coeffs(&coeffs)
    }

    fn random_monic(rng: &mut ChaCha8Rng, deg: usize, height: i64) -> Poly {
        let mut coeffs: Vec<i64> = (0..deg).map(|_| rng.gen_range(-height..=height)).collect();
        coeffs.push(1);
        Poly::from_int_coeffs(&coeffs)
    }

    #[test]
    fn euclid_div_cubic_by_quadratic() {
        let f = Poly::from_int_coeffs(&[0, 0, 0, 1]); // x^3
        let g = Poly::from_int_coeffs(&[1, 1, 1]); // x^2+x+1
        let (q, r) = f.euclid_div(&g).unwrap();
        assert_eq!(q, Poly::from_int_coeffs(&[-1, 1]));
        assert_eq!(r, Poly::one());
        assert_eq!(&(&q * &g) + &r, f);
    }

    #[test]
    fn euclid_div_self_and_errors() {
        let phi = Poly::from_int_coeffs(&[1, 1, 1]);
        let (q, r) = phi.euclid_div(&phi).unwrap();
        assert_eq!(q, Poly::one());
        assert!(r.is_zero());
        assert_eq!(
            phi.euclid_div(&Poly::zero()),
            Err(PolyError::ZeroDivisor)
        );
        assert_eq!(
            phi.euclid_div(&Poly::from_int_coeffs(&[1, 2])),
            Err(PolyError::NonMonicDivisor)
        );
    }

    #[test]
    fn euclid_div_fixture_sextic() {
        let f = parse_poly("x^6+3*x^5+6*x^4+3*x^3+9*x+9").unwrap();
        let g = parse_poly("x^2+x+1").unwrap();
        let (q, r) = f.euclid_div(&g).unwrap();
        assert!(r.degree().map_or(true, |d| d <= 1));
        assert_eq!(&(&q * &g) + &r, f);
    }

    #[test]
    fn phi_expand_examples() {
        let phi = Poly::from_int_coeffs(&[1, 1, 1]);
        let f = Poly::from_int_coeffs(&[0, 0, 0, 1]);
        let parts = f.phi_expand(&phi).unwrap();
        assert_eq!(parts, vec![Poly::one(), Poly::from_int_coeffs(&[-1, 1])]);

        let sq = &phi * &phi;
        assert_eq!(
            sq.phi_expand(&phi).unwrap(),
            vec![Poly::zero(), Poly::zero(), Poly::one()]
        );

        let small = Poly::from_int_coeffs(&[5, 7]);
        assert_eq!(small.phi_expand(&phi).unwrap(), vec![small.clone()]);
    }

    #[test]
    fn phi_expand_roundtrips_on_random_input() {
        let mut rng = ChaCha8Rng::seed_from_u64(101);
        for _ in 0..200 {
            let f = random_poly(&mut rng, 9, 30);
            let d = rng.gen_range(1..4);
            let phi = random_monic(&mut rng, d, 10);
            let parts = f.phi_expand(&phi).unwrap();
            let mut acc = Poly::zero();
            for (i, part) in parts.iter().enumerate() {
                assert!(part.degree().map_or(true, |d| d < phi.degree().unwrap()));
                acc = &acc + &(part * &phi.pow(i as u32));
            }
            assert_eq!(acc, f);
        }
    }

    #[test]
    fn euclid_div_roundtrips_on_random_input() {
        let mut rng = ChaCha8Rng::seed_from_u64(102);
        for _ in 0..200 {
            let f = random_poly(&mut rng, 10, 50);
            let d = rng.gen_range(1..5);
            let g = random_monic(&mut rng, d, 12);
            let (q, r) = f.euclid_div(&g).unwrap();
            assert_eq!(&(&q * &g) + &r, f);
            assert!(r.degree().map_or(true, |d| d < g.degree().unwrap()));
        }
    }

    #[test]
    fn resultant_examples() {
        let f = parse_poly("x^3-2").unwrap();
        let g = parse_poly("x-3").unwrap();
        assert_eq!(resultant(&f, &g).unwrap(), rat_int(25));
        assert_eq!(resultant(&f, &Poly::one()).unwrap(), rat_int(1));
        assert_eq!(
            resultant(&Poly::zero(), &f),
            Err(PolyError::ZeroInput)
        );
    }

    #[test]
    fn resultant_of_fixture_has_expected_two_adic_valuation() {
        let f = parse_poly("x^6+3*x^5+6*x^4+3*x^3+9*x+9").unwrap();
        let g = parse_poly("x^2+x+1").unwrap();
        let r = resultant(&f, &g).unwrap();
        // f(j)*f(j^2) = 124 = 4*31 for the primitive cube root j.
        assert_eq!(r, rat_int(124));
    }

    #[test]
    fn resultant_antisymmetry_for_monic_inputs() {
        let mut rng = ChaCha8Rng::seed_from_u64(103);
        for _ in 0..100 {
            let df = rng.gen_range(1..5);
            let f = random_monic(&mut rng, df, 8);
            let dg = rng.gen_range(1..5);
            let g = random_monic(&mut rng, dg, 8);
            let lhs = resultant(&f, &g).unwrap();
            let sign = if (f.degree().unwrap() * g.degree().unwrap()) % 2 == 1 {
                -Rational::one()
            } else {
                Rational::one()
            };
            assert_eq!(lhs, sign * resultant(&g, &f).unwrap());
        }
    }

    #[test]
    fn divided_derivative_examples() {
        let f = Poly::from_int_coeffs(&[0, 0, 0, 1]); // x^3
        assert_eq!(f.divided_derivative(1), Poly::from_int_coeffs(&[0, 0, 3]));
        assert_eq!(f.divided_derivative(3), Poly::one());
        assert!(f.divided_derivative(4).is_zero());
    }

    #[test]
    fn taylor_identity_with_divided_derivatives() {
        let mut rng = ChaCha8Rng::seed_from_u64(104);
        for _ in 0..100 {
            let f = random_poly(&mut rng, 6, 20);
            let c = rat(rng.gen_range(-9..9), rng.gen_range(1..5));
            let shift = Poly::new(vec![-c.clone(), Rational::one()]); // x - c
            let mut acc = Poly::zero();
            for i in 0..=f.deg_or_zero() {
                let coef = f.divided_derivative(i).eval(&c);
                acc = &acc + &Poly::monomial(coef, 0).mul(&shift.pow(i as u32));
            }
            assert_eq!(acc, f);
        }
    }

    #[test]
    fn parse_and_display_roundtrip() {
        for text in [
            "x^6+3*x^5+6*x^4+3*x^3+9*x+9",
            "x^2+x+1",
            "x^3+6*x^2+12*x+6",
            "x^6+9*x^4-32*x^3+27*x^2-293",
            "x-3",
            "7",
            "0",
            "1/3*x^2-5",
        ] {
            let p = parse_poly(text).unwrap();
            let shown = p.to_string();
            assert_eq!(parse_poly(&shown).unwrap(), p, "roundtrip for {text}");
        }
        assert_eq!(parse_poly(" x^2 + x + 1 ").unwrap(), parse_poly("x^2+x+1").unwrap());
        assert!(parse_poly("x^").is_err());
        assert!(parse_poly("3*").is_err());
        assert!(parse_poly("").is_err());
    }
}
