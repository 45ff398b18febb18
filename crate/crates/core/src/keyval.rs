//! Inductive valuation chains: towers of augmentations (phi_1, gamma_1), ...,
//! (phi_k, gamma_k) evaluating polynomials through phi-adic expansion, the
//! residual polynomial operator over the chain's residue field, lifting of
//! residual factors to new key polynomials, and the sampled key predicates.
//!
//! Residue bookkeeping: every value v in the chain group has a canonical
//! normalizing monomial p^a * phi_1^b1 * ... * phi_k^bk with 0 <= b_i < e_i
//! and a possibly negative p-exponent. Residues of polynomials are taken
//! relative to these monomials; the class of any exponent vector of total
//! value zero is computable from the stored level generators, which keeps
//! residual polynomials and lifts exact mutual inverses.

use crate::exactnum::{rat_int, ExactNumError, ExtendedValue, Rational, ValueGroup};
use crate::padic::{rational_mod_p, vp, PadicError};
use crate::polyring::{Poly, PolyError};
use crate::residue::{find_irreducible, FFElem, FFPoly, FiniteField, ResidueError};
use num_bigint::BigInt;
use num_traits::{ToPrimitive, Zero};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use std::fmt;

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum KeyvalError {
    InadmissibleValue { got: String, needed_above: String },
    DegreeRegression { got: usize, last: usize },
    DegreeIncompatible { got: usize, expected: usize },
    DegreeOutOfRange { got: usize },
    AmbiguousResidual,
    NotIrreducible,
    NotMonic,
    ZeroInput,
    NegativeLevelValue,
    Poly(PolyError),
    Residue(ResidueError),
    Padic(PadicError),
    ExactNum(ExactNumError),
}

impl fmt::Display for KeyvalError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            KeyvalError::InadmissibleValue { got, needed_above } => {
                write!(f, "assigned value {got} must exceed the chain value {needed_above}")
            }
            KeyvalError::DegreeRegression { got, last } => {
                write!(f, "degree {got} regresses below the last level degree {last}")
            }
            KeyvalError::DegreeIncompatible { got, expected } => {
                write!(f, "degree {got} incompatible with the chain step (expected {expected})")
            }
            KeyvalError::DegreeOutOfRange { got } => write!(f, "degree {got} out of range"),
            KeyvalError::AmbiguousResidual => {
                write!(f, "residual polynomial is reducible; the step is ambiguous")
            }
            KeyvalError::NotIrreducible => write!(f, "residual factor is not irreducible"),
            KeyvalError::NotMonic => write!(f, "key polynomial must be monic"),
            KeyvalError::ZeroInput => write!(f, "zero polynomial"),
            KeyvalError::NegativeLevelValue => {
                write!(f, "generator value is negative; rescale the generator")
            }
            KeyvalError::Poly(e) => write!(f, "{e}"),
            KeyvalError::Residue(e) => write!(f, "{e}"),
            KeyvalError::Padic(e) => write!(f, "{e}"),
            KeyvalError::ExactNum(e) => write!(f, "{e}"),
        }
    }
}

impl std::error::Error for KeyvalError {}

impl From<PolyError> for KeyvalError {
    fn from(e: PolyError) -> Self {
        KeyvalError::Poly(e)
    }
}

impl From<ResidueError> for KeyvalError {
    fn from(e: ResidueError) -> Self {
        KeyvalError::Residue(e)
    }
}

impl From<PadicError> for KeyvalError {
    fn from(e: PadicError) -> Self {
        KeyvalError::Padic(e)
    }
}

impl From<ExactNumError> for KeyvalError {
    fn from(e: ExactNumError) -> Self {
        KeyvalError::ExactNum(e)
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum ChainContext {
    /// Values of K(chi) = Q[x]/(f): inputs are reduced modulo f first.
    Algebraic { minpoly: Poly },
    /// The chain itself is the valuation; no degree bound.
    Transcendental,
}

/// Residue data materialized on a level once a later level sits on top of it:
/// the chosen residual factor psi, the residue field after the level
/// (presented over the prime field), the embedding of the previous residue
/// field, and the class z of phi^e over its normalizing monomial.
#[derive(Debug, Clone)]
struct InnerLevel {
    psi: FFPoly,
    t: usize,
    field_after: FiniteField,
    embed_gen: FFElem,
    z: FFElem,
}

#[derive(Debug, Clone)]
struct Level {
    phi: Poly,
    gamma: Rational,
    group_before: ValueGroup,
    group: ValueGroup,
    e: u64,
    field_before: FiniteField,
    inner: Option<InnerLevel>,
}

/// An inductive valuation chain nu_{phi_1,...,phi_k} over Q with the p-adic
/// base valuation, normalized so that nu(p) = 1.
#[derive(Debug, Clone)]
pub struct ValuationChain {
    p: u64,
    context: ChainContext,
    levels: Vec<Level>,
}

/// Residual polynomial of g at the top level, in collapsed form: the support
/// lives on i0 + j*e and coefficient j sits at Y^j over the residue field
/// below the top level.
#[derive(Debug, Clone)]
pub struct ResidualData {
    pub value: Rational,
    pub i0: usize,
    pub e: u64,
    pub collapsed: FFPoly,
}

impl ValuationChain {
    /// Start a chain with a degree-one key polynomial.
    pub fn gauss(
        p: u64,
        context: ChainContext,
        phi: Poly,
        gamma: Rational,
    ) -> Result<ValuationChain, KeyvalError> {
        if !phi.is_monic() {
            return Err(KeyvalError::NotMonic);
        }
        if phi.degree() != Some(1) {
            return Err(KeyvalError::DegreeIncompatible {
                got: phi.deg_or_zero(),
                expected: 1,
            });
        }
        if let ChainContext::Algebraic { minpoly } = &context {
            if !minpoly.is_monic() {
                return Err(KeyvalError::NotMonic);
            }
        }
        let field = FiniteField::prime(p)?;
        let group_before = ValueGroup::integers();
        let group = group_before.join(&gamma);
        let e = crate::exactnum::group_index(&group_before, &group)?;
        Ok(ValuationChain {
            p,
            context,
            levels: vec![Level {
                phi,
                gamma,
                group_before,
                group,
                e,
                field_before: field,
                inner: None,
            }],
        })
    }

    pub fn p(&self) -> u64 {
        self.p
    }

    pub fn context(&self) -> &ChainContext {
        &self.context
    }

    pub fn level_count(&self) -> usize {
        self.levels.len()
    }

    pub fn level_polys(&self) -> Vec<(Poly, Rational)> {
        self.levels
            .iter()
            .map(|l| (l.phi.clone(), l.gamma.clone()))
            .collect()
    }

    pub fn last_phi(&self) -> &Poly {
        &self.levels.last().unwrap().phi
    }

    pub fn last_gamma(&self) -> &Rational {
        &self.levels.last().unwrap().gamma
    }

    pub fn last_degree(&self) -> usize {
        self.levels.last().unwrap().phi.deg_or_zero()
    }

    pub fn last_e(&self) -> u64 {
        self.levels.last().unwrap().e
    }

    /// Group of the chain truncated below the last level.
    pub fn group_before_last(&self) -> ValueGroup {
        self.levels.last().unwrap().group_before.clone()
    }

    /// (value group, accumulated residue field): the residue field counts the
    /// residual extensions of all completed levels.
    pub fn invariants(&self) -> (ValueGroup, FiniteField) {
        let last = self.levels.last().unwrap();
        (last.group.clone(), last.field_before.clone())
    }

    /// Residue field in which the top level's residual polynomials live.
    pub fn top_residue_field(&self) -> &FiniteField {
        &self.levels.last().unwrap().field_before
    }

    /// The residual factor recorded on an inner level (0-based), if the level
    /// has one sitting on top of it.
    pub fn level_residual_factor(&self, level: usize) -> Option<&FFPoly> {
        self.levels.get(level).and_then(|l| l.inner.as_ref()).map(|i| &i.psi)
    }

    /// The canonical normalizing monomial p^a * phi_1^b1 * ... * phi_k^bk of
    /// a value in the chain group, as (a, [b_1..b_k]) with 0 <= b_i < e_i.
    pub fn normalizing_monomial(&self, v: &Rational) -> Result<(i64, Vec<i64>), KeyvalError> {
        let (group, _) = self.invariants();
        if !group.contains(v) {
            return Err(KeyvalError::InadmissibleValue {
                got: v.to_string(),
                needed_above: format!("an element of {group}"),
            });
        }
        let expo = self.monomial_exponents(self.levels.len(), v);
        Ok((expo[0], expo[1..].to_vec()))
    }

    /// Ramification index e and residue degree f of the chain.
    pub fn e_f(&self) -> (u64, u64) {
        let (group, field) = self.invariants();
        (group.denominator(), field.degree() as u64)
    }

    fn degree_bound(&self) -> Option<usize> {
        match &self.context {
            ChainContext::Algebraic { minpoly } => Some(minpoly.deg_or_zero()),
            ChainContext::Transcendental => None,
        }
    }

    /// Chain value after reduction modulo the context minimal polynomial.
    pub fn value(&self, g: &Poly) -> ExtendedValue {
        match &self.context {
            ChainContext::Algebraic { minpoly } => {
                let (_, reduced) = g.euclid_div(minpoly).expect("context minpoly is monic");
                self.value_raw(&reduced)
            }
            ChainContext::Transcendental => self.value_raw(g),
        }
    }

    /// Chain value of the polynomial as given, without context reduction.
    pub fn value_raw(&self, g: &Poly) -> ExtendedValue {
        self.value_at(self.levels.len(), g)
    }

    fn value_at(&self, upto: usize, g: &Poly) -> ExtendedValue {
        if g.is_zero() {
            return ExtendedValue::Infinity;
        }
        if upto == 0 {
            debug_assert!(g.degree() == Some(0));
            return vp(&g.coeff(0), self.p);
        }
        let level = &self.levels[upto - 1];
        let parts = g.phi_expand(&level.phi).expect("monic key polynomial");
        let mut best = ExtendedValue::Infinity;
        for (i, part) in parts.iter().enumerate() {
            if part.is_zero() {
                continue;
            }
            let inner = self.value_at(upto - 1, part);
            let term = inner + ExtendedValue::from_rat(&level.gamma * rat_int(i as i64));
            best = ExtendedValue::min(best, term);
        }
        best
    }

    /// Augment the chain: replace the last level when degrees match, append a
    /// new one when the degree grows.
    pub fn augment(&self, phi: Poly, gamma: ExtendedValue) -> Result<ValuationChain, KeyvalError> {
        if !phi.is_monic() {
            return Err(KeyvalError::NotMonic);
        }
        let gamma = match gamma {
            ExtendedValue::Finite(g) => g,
            ExtendedValue::Infinity => {
                return Err(KeyvalError::InadmissibleValue {
                    got: "inf".into(),
                    needed_above: "a finite chain value".into(),
                })
            }
        };
        let current = self.value_raw(&phi);
        if ExtendedValue::from_rat(gamma.clone()) <= current {
            return Err(KeyvalError::InadmissibleValue {
                got: gamma.to_string(),
                needed_above: current.to_string(),
            });
        }
        let deg = phi.deg_or_zero();
        let last = self.last_degree();
        if deg < last {
            return Err(KeyvalError::DegreeRegression { got: deg, last });
        }
        if let Some(bound) = self.degree_bound() {
            if deg > bound {
                return Err(KeyvalError::DegreeOutOfRange { got: deg });
            }
        }
        let mut chain = self.clone();
        if deg == last {
            let old = chain.levels.pop().unwrap();
            let group = old.group_before.join(&gamma);
            let e = crate::exactnum::group_index(&old.group_before, &group)?;
            chain.levels.push(Level {
                phi,
                gamma,
                group_before: old.group_before,
                group,
                e,
                field_before: old.field_before,
                inner: None,
            });
            return Ok(chain);
        }
        // growth step: derive the residual factor of phi to fix the residue
        // tower of the level below
        let res = self.residual_data(&phi)?;
        self.levels.last().unwrap().pipe_degree_check(deg, &res)?;
        chain.materialize_top_inner(&res.collapsed)?;
        let top = chain.levels.last().unwrap();
        let group_before = top.group.clone();
        let field_before = top.inner.as_ref().unwrap().field_after.clone();
        let group = group_before.join(&gamma);
        let e = crate::exactnum::group_index(&group_before, &group)?;
        chain.levels.push(Level {
            phi,
            gamma,
            group_before,
            group,
            e,
            field_before,
            inner: None,
        });
        Ok(chain)
    }

    fn materialize_top_inner(&mut self, psi: &FFPoly) -> Result<(), KeyvalError> {
        let p = self.p;
        let field = self.levels.last().unwrap().field_before.clone();
        let psi = field.poly_monic(psi);
        let t = field.poly_degree(&psi).ok_or(KeyvalError::ZeroInput)?;
        if t == 0 {
            return Err(KeyvalError::NotIrreducible);
        }
        let (field_after, embed_gen, z) = if t == 1 {
            let c0 = psi.coeff(0).cloned().unwrap_or_else(|| field.zero());
            let z = field.neg(&c0);
            (field.clone(), field.generator(), z)
        } else {
            let degree = field.degree() * t;
            let modulus = find_irreducible(p, degree)?;
            let big = FiniteField::extension(p, modulus)?;
            let prev_modulus = big.poly_from_prime_coeffs(field.modulus());
            let gen_img = big
                .roots(&prev_modulus)?
                .into_iter()
                .next()
                .expect("subfield generator must have a root in the extension");
            let psi_up = embed_poly(&field, &big, &gen_img, &psi);
            let z = big
                .roots(&psi_up)?
                .into_iter()
                .next()
                .expect("residual factor must split in the constructed field");
            (big, gen_img, z)
        };
        self.levels.last_mut().unwrap().inner = Some(InnerLevel {
            psi,
            t,
            field_after,
            embed_gen,
            z,
        });
        Ok(())
    }

    // ---- canonical monomials and graded classes ----

    /// Exponents (a; b_1..b_upto) of the canonical monomial of value v in the
    /// group of the first `upto` levels: 0 <= b_i < e_i, a integral.
    fn monomial_exponents(&self, upto: usize, v: &Rational) -> Vec<i64> {
        let mut out = vec![0i64; upto + 1];
        let mut v = v.clone();
        for kappa in (1..=upto).rev() {
            let level = &self.levels[kappa - 1];
            let mut found = false;
            for b in 0..level.e {
                let cand = &v - &level.gamma * rat_int(b as i64);
                if level.group_before.contains(&cand) {
                    out[kappa] = b as i64;
                    v = cand;
                    found = true;
                    break;
                }
            }
            debug_assert!(found, "value not in the level group");
        }
        debug_assert!(v.is_integer(), "residual exponent must be integral");
        out[0] = v.to_integer().to_i64().expect("p-exponent fits i64");
        out
    }

    /// Class in field(kappa) of the monomial with the given exponent vector
    /// (length kappa+1), which must have total value zero.
    fn cls(&self, kappa: usize, expo: Vec<i64>) -> FFElem {
        debug_assert_eq!(expo.len(), kappa + 1);
        if kappa == 0 {
            debug_assert_eq!(expo[0], 0, "nonzero p-exponent in a value-zero monomial");
            return self.field(0).one();
        }
        let level = &self.levels[kappa - 1];
        let inner = level
            .inner
            .as_ref()
            .expect("inner residue data required below the top level");
        let e = level.e as i64;
        let b = expo[kappa];
        debug_assert_eq!(b.rem_euclid(e), 0, "exponent not divisible by e");
        let s = b / e;
        // fold phi_kappa^e into its normalizing monomial one level down
        let gamma_e = &level.gamma * rat_int(e);
        let m = self.monomial_exponents(kappa - 1, &gamma_e);
        let mut folded = expo[..kappa].to_vec();
        for (slot, mi) in folded.iter_mut().zip(m.iter()) {
            *slot += s * mi;
        }
        let below = self.cls(kappa - 1, folded);
        let field = &inner.field_after;
        let lifted = embed_elem(&self.levels[kappa - 1].field_before, field, &inner.embed_gen, &below);
        let zpow = if s >= 0 {
            field.pow(&inner.z, s as u128)
        } else {
            field.pow(&field.inv(&inner.z), (-s) as u128)
        };
        field.mul(&lifted, &zpow)
    }

    /// Residue field after kappa completed levels (field(0) is F_p).
    fn field(&self, kappa: usize) -> &FiniteField {
        if kappa == 0 {
            if let Some(first) = self.levels.first() {
                return &first.field_before;
            }
            unreachable!("chains always carry at least one level");
        }
        &self.levels[kappa - 1]
            .inner
            .as_ref()
            .expect("inner residue data missing")
            .field_after
    }

    /// Residue of g relative to the canonical monomial of value v, in
    /// field(kappa). Requires value_at(kappa, g) >= v; higher value gives 0.
    fn residue_at(&self, kappa: usize, g: &Poly, v: &Rational) -> FFElem {
        if g.is_zero() {
            return self.field(kappa).zero();
        }
        if kappa == 0 {
            let c = g.coeff(0);
            let scaled = &c * pow_p(self.p, -v_to_i64(v));
            match vp(&scaled, self.p) {
                ExtendedValue::Finite(w) if w.is_zero() => {
                    let digit = rational_mod_p(&scaled, self.p).expect("p-integral unit part");
                    self.field(0).from_u64(digit)
                }
                _ => self.field(0).zero(),
            }
        } else {
            let level = &self.levels[kappa - 1];
            let field = self.field(kappa);
            let parts = g.phi_expand(&level.phi).expect("monic key polynomial");
            let target = self.monomial_exponents(kappa, v);
            let mut acc = field.zero();
            for (i, part) in parts.iter().enumerate() {
                if part.is_zero() {
                    continue;
                }
                let vi = v - &level.gamma * rat_int(i as i64);
                let inner_val = self.value_at(kappa - 1, part);
                if inner_val != ExtendedValue::from_rat(vi.clone()) {
                    debug_assert!(inner_val > ExtendedValue::from_rat(vi.clone()));
                    continue;
                }
                let below = self.residue_at(kappa - 1, part, &vi);
                let mut ratio = self.monomial_exponents(kappa - 1, &vi);
                ratio.push(i as i64);
                for (slot, t) in ratio.iter_mut().zip(target.iter()) {
                    *slot -= t;
                }
                let unit = self.cls(kappa, ratio);
                let inner = level.inner.as_ref().expect("inner data below the top level");
                let lifted = embed_elem(&level.field_before, &inner.field_after, &inner.embed_gen, &below);
                acc = field.add(&acc, &field.mul(&lifted, &unit));
            }
            acc
        }
    }

    /// Collapsed residual polynomial of g at the top level.
    pub fn residual_data(&self, g: &Poly) -> Result<ResidualData, KeyvalError> {
        if g.is_zero() {
            return Err(KeyvalError::ZeroInput);
        }
        let k = self.levels.len();
        let level = &self.levels[k - 1];
        let parts = g.phi_expand(&level.phi)?;
        let mut value = ExtendedValue::Infinity;
        let mut term_values: Vec<ExtendedValue> = Vec::with_capacity(parts.len());
        for (i, part) in parts.iter().enumerate() {
            let w = self.value_at(k - 1, part)
                + ExtendedValue::from_rat(&level.gamma * rat_int(i as i64));
            value = ExtendedValue::min(value, w.clone());
            term_values.push(w);
        }
        let value = match value {
            ExtendedValue::Finite(v) => v,
            ExtendedValue::Infinity => return Err(KeyvalError::ZeroInput),
        };
        let support: Vec<usize> = term_values
            .iter()
            .enumerate()
            .filter(|(_, w)| **w == ExtendedValue::from_rat(value.clone()))
            .map(|(i, _)| i)
            .collect();
        let i0 = *support.first().expect("nonempty support");
        let e = level.e;
        let t_max = (support.last().unwrap() - i0) / e as usize;
        let field = &level.field_before;
        let gamma_e = &level.gamma * rat_int(e as i64);
        let ref_expo = self.monomial_exponents(k - 1, &(&value - &level.gamma * rat_int(i0 as i64)));
        let m_e = self.monomial_exponents(k - 1, &gamma_e);
        let mut coeffs = vec![field.zero(); t_max + 1];
        for &i in &support {
            debug_assert_eq!((i - i0) % e as usize, 0, "support outside the e-progression");
            let j = (i - i0) / e as usize;
            let vi = &value - &level.gamma * rat_int(i as i64);
            let below = self.residue_at(k - 1, &parts[i], &vi);
            let mut fold = self.monomial_exponents(k - 1, &vi);
            for (slot, (m, r)) in fold.iter_mut().zip(m_e.iter().zip(ref_expo.iter())) {
                *slot += (j as i64) * m - r;
            }
            let unit = self.cls(k - 1, fold);
            coeffs[j] = field.mul(&below, &unit);
        }
        Ok(ResidualData {
            value,
            i0,
            e,
            collapsed: field.poly_from_elems(coeffs),
        })
    }

    /// The residual polynomial operator: coefficients of the collapsed form
    /// placed back on their expansion exponents i0 + j*e.
    pub fn residual_polynomial(&self, g: &Poly) -> Result<FFPoly, KeyvalError> {
        let data = self.residual_data(g)?;
        let field = self.field(self.levels.len() - 1);
        let deg = data.i0 + field.poly_degree(&data.collapsed).unwrap_or(0) * data.e as usize;
        let mut coeffs = vec![field.zero(); deg + 1];
        for (j, c) in data.collapsed.coeffs().iter().enumerate() {
            coeffs[data.i0 + j * data.e as usize] = c.clone();
        }
        Ok(field.poly_from_elems(coeffs))
    }

    /// Lift an irreducible factor of the top-level residual polynomial
    /// (collapsed form) to a monic key polynomial of degree deg(phi)*e*deg(psi)
    /// whose residual image is exactly psi.
    pub fn lift_residual_factor(&self, psi: &FFPoly) -> Result<Poly, KeyvalError> {
        let k = self.levels.len();
        let level = &self.levels[k - 1];
        let field = &level.field_before;
        let t = match field.poly_degree(psi) {
            None | Some(0) => return Err(KeyvalError::NotIrreducible),
            Some(t) => t,
        };
        if !field.is_irreducible(psi)? {
            return Err(KeyvalError::NotIrreducible);
        }
        if field.is_zero(psi.coeff(0).unwrap()) {
            return Err(KeyvalError::NotIrreducible);
        }
        let psi = field.poly_monic(psi);
        let e = level.e;
        if t == 1 && e == 1 {
            // same-degree refinement: subtract the lift of the residual root,
            // the classical pseudo-Cauchy correction phi - lift(root)
            let root = field.neg(psi.coeff(0).unwrap());
            let correction = self.lift_residue(k - 1, &root, &level.gamma);
            return Ok(&level.phi - &correction);
        }
        let gamma_e = &level.gamma * rat_int(e as i64);
        let target = &gamma_e * rat_int(t as i64);
        let target_expo = self.monomial_exponents(k - 1, &target);
        let m_e = self.monomial_exponents(k - 1, &gamma_e);
        let mut out = level.phi.pow((t * e as usize) as u32);
        for (j, c) in psi.coeffs().iter().enumerate().take(t) {
            if field.is_zero(c) {
                continue;
            }
            let v_j = &target - &gamma_e * rat_int(j as i64);
            let mut fold = self.monomial_exponents(k - 1, &v_j);
            for (slot, (m, r)) in fold.iter_mut().zip(m_e.iter().zip(target_expo.iter())) {
                *slot += (j as i64) * m - r;
            }
            let unit = self.cls(k - 1, fold);
            let adjusted = field.mul(c, &field.inv(&unit));
            let lifted = self.lift_residue(k - 1, &adjusted, &v_j);
            let term = &lifted * &level.phi.pow((j * e as usize) as u32);
            out = &out + &term;
        }
        Ok(out)
    }

    /// Canonical polynomial of chain value v whose residue (relative to the
    /// canonical monomial of v) is c; degree below the next key degree.
    fn lift_residue(&self, kappa: usize, c: &FFElem, v: &Rational) -> Poly {
        let field = self.field(kappa);
        if field.is_zero(c) {
            return Poly::zero();
        }
        if kappa == 0 {
            let digit = c.rep().first().copied().unwrap_or(0);
            return Poly::constant(
                Rational::from_integer(BigInt::from(digit)) * pow_p(self.p, v_to_i64(v)),
            );
        }
        let level = &self.levels[kappa - 1];
        let b = self.monomial_exponents(kappa, v)[kappa] as usize;
        let parts = self.decompose_over_below(kappa, c);
        let e = level.e as usize;
        let base = v - &(&level.gamma * rat_int(b as i64));
        let gamma_e = &level.gamma * rat_int(e as i64);
        let m_e = self.monomial_exponents(kappa - 1, &gamma_e);
        let base_expo = self.monomial_exponents(kappa - 1, &base);
        let lower_field = &level.field_before;
        let mut out = Poly::zero();
        for (s, c_s) in parts.iter().enumerate() {
            if lower_field.is_zero(c_s) {
                continue;
            }
            let v_s = &base - &gamma_e * rat_int(s as i64);
            let mut fold = self.monomial_exponents(kappa - 1, &v_s);
            for (slot, (m, r)) in fold.iter_mut().zip(m_e.iter().zip(base_expo.iter())) {
                *slot += (s as i64) * m - r;
            }
            let unit = self.cls(kappa - 1, fold);
            let adjusted = lower_field.mul(c_s, &lower_field.inv(&unit));
            let lifted = self.lift_residue(kappa - 1, &adjusted, &v_s);
            let term = &lifted * &level.phi.pow((b + s * e) as u32);
            out = &out + &term;
        }
        out
    }

    /// Write c in field(kappa) as sum c_s * z^s with c_s in field(kappa-1).
    fn decompose_over_below(&self, kappa: usize, c: &FFElem) -> Vec<FFElem> {
        let level = &self.levels[kappa - 1];
        let inner = level.inner.as_ref().expect("inner data");
        let field = &inner.field_after;
        let lower = &level.field_before;
        let t = inner.t;
        let lower_deg = lower.degree();
        let dim = field.degree();
        debug_assert_eq!(dim, lower_deg * t);
        // columns: embed(gen^r) * z^s for r < lower_deg, s < t
        let p = self.p;
        let mut cols: Vec<Vec<u64>> = Vec::with_capacity(dim);
        let gen = lower.generator();
        let mut gen_pow = lower.one();
        let mut lower_basis = Vec::with_capacity(lower_deg);
        for _ in 0..lower_deg {
            lower_basis.push(gen_pow.clone());
            gen_pow = lower.mul(&gen_pow, &gen);
        }
        let mut zpow = field.one();
        let mut z_powers = Vec::with_capacity(t);
        for _ in 0..t {
            z_powers.push(zpow.clone());
            zpow = field.mul(&zpow, &inner.z);
        }
        for zs in &z_powers {
            for basis in &lower_basis {
                let up = embed_elem(lower, field, &inner.embed_gen, basis);
                let col = field.mul(&up, zs);
                let mut digits = col.rep().to_vec();
                digits.resize(dim, 0);
                cols.push(digits);
            }
        }
        let mut rhs = c.rep().to_vec();
        rhs.resize(dim, 0);
        let coords = solve_mod_p(p, &cols, &rhs);
        // reassemble: coordinate (s*lower_deg + r) scales gen^r inside c_s
        let mut out = Vec::with_capacity(t);
        for s in 0..t {
            let mut acc = lower.zero();
            for (r, basis) in lower_basis.iter().enumerate() {
                let w = coords[s * lower_deg + r];
                if w != 0 {
                    let scaled = lower.mul(&lower.from_u64(w), basis);
                    acc = lower.add(&acc, &scaled);
                }
            }
            out.push(acc);
        }
        out
    }

    /// Maximum chain value among monic polynomials of degree n together with
    /// the witness product of chain basis elements.
    pub fn degree_segment_max(&self, n: usize) -> Result<(ExtendedValue, Poly), KeyvalError> {
        if let Some(bound) = self.degree_bound() {
            if n >= bound {
                return Err(KeyvalError::DegreeOutOfRange { got: n });
            }
        }
        let degrees: Vec<usize> = self.levels.iter().map(|l| l.phi.deg_or_zero()).collect();
        let mut rem = n;
        let mut witness = Poly::one();
        let mut value = Rational::zero();
        for (idx, level) in self.levels.iter().enumerate().rev() {
            let m = degrees[idx];
            let b = rem / m;
            if idx + 1 < self.levels.len() {
                let cap = degrees[idx + 1] / m;
                if b >= cap {
                    return Err(KeyvalError::DegreeOutOfRange { got: n });
                }
            }
            rem %= m;
            if b > 0 {
                witness = &witness * &level.phi.pow(b as u32);
                value += &level.gamma * rat_int(b as i64);
            }
        }
        debug_assert_eq!(rem, 0);
        Ok((ExtendedValue::from_rat(value), witness))
    }
}

fn embed_poly(src: &FiniteField, dst: &FiniteField, gen_img: &FFElem, f: &FFPoly) -> FFPoly {
    dst.poly_from_elems(
        f.coeffs()
            .iter()
            .map(|c| embed_elem(src, dst, gen_img, c))
            .collect(),
    )
}

fn embed_elem(_src: &FiniteField, dst: &FiniteField, gen_img: &FFElem, e: &FFElem) -> FFElem {
    let mut acc = dst.zero();
    for &digit in e.rep().iter().rev() {
        acc = dst.mul(&acc, gen_img);
        acc = dst.add(&acc, &dst.from_u64(digit));
    }
    acc
}

fn solve_mod_p(p: u64, cols: &[Vec<u64>], rhs: &[u64]) -> Vec<u64> {
    let dim = rhs.len();
    debug_assert_eq!(cols.len(), dim);
    // dense Gaussian elimination on the augmented matrix
    let mut m: Vec<Vec<u64>> = (0..dim)
        .map(|row| {
            let mut r: Vec<u64> = cols.iter().map(|c| c[row]).collect();
            r.push(rhs[row]);
            r
        })
        .collect();
    let inv = |a: u64| -> u64 {
        let (mut t, mut new_t): (i128, i128) = (0, 1);
        let (mut r, mut new_r): (i128, i128) = (p as i128, (a % p) as i128);
        while new_r != 0 {
            let q = r / new_r;
            (t, new_t) = (new_t, t - q * new_t);
            (r, new_r) = (new_r, r - q * new_r);
        }
        (((t % p as i128) + p as i128) % p as i128) as u64
    };
    let mut pivot_cols = Vec::with_capacity(dim);
    let mut row = 0usize;
    for col in 0..dim {
        if let Some(r) = (row..dim).find(|&r| m[r][col] != 0) {
            m.swap(row, r);
            let iv = inv(m[row][col]);
            for x in m[row].iter_mut() {
                *x = ((*x as u128 * iv as u128) % p as u128) as u64;
            }
            for r2 in 0..dim {
                if r2 != row && m[r2][col] != 0 {
                    let factor = m[r2][col];
                    for c2 in 0..=dim {
                        let sub = (m[row][c2] as u128 * factor as u128) % p as u128;
                        m[r2][c2] = ((m[r2][c2] as u128 + p as u128 - sub) % p as u128) as u64;
                    }
                }
            }
            pivot_cols.push(col);
            row += 1;
            if row == dim {
                break;
            }
        }
    }
    assert_eq!(row, dim, "basis matrix is singular");
    let mut out = vec![0u64; dim];
    for (r, &col) in pivot_cols.iter().enumerate() {
        out[col] = m[r][dim];
    }
    out
}

fn pow_p(p: u64, exp: i64) -> Rational {
    let mag = BigInt::from(p).pow(exp.unsigned_abs() as u32);
    if exp >= 0 {
        Rational::from_integer(mag)
    } else {
        Rational::new(BigInt::from(1), mag)
    }
}

fn v_to_i64(v: &Rational) -> i64 {
    debug_assert!(v.is_integer());
    v.to_integer().to_i64().expect("exponent fits i64")
}

impl Level {
    fn pipe_degree_check(&self, deg: usize, res: &ResidualData) -> Result<usize, KeyvalError> {
        let field = &self.field_before;
        if res.i0 != 0 {
            return Err(KeyvalError::AmbiguousResidual);
        }
        let t = field.poly_degree(&res.collapsed).unwrap_or(0);
        if t == 0 {
            return Err(KeyvalError::AmbiguousResidual);
        }
        let expected = self.phi.deg_or_zero() * self.e as usize * t;
        if deg != expected {
            return Err(KeyvalError::DegreeIncompatible { got: deg, expected });
        }
        // one factor must carry the whole step
        let factors = field.factor(&res.collapsed)?;
        if factors.len() != 1 || factors[0].1 != 1 {
            return Err(KeyvalError::AmbiguousResidual);
        }
        Ok(t)
    }
}

// ---- sampled key-polynomial predicates ----

pub type ValFn<'a> = dyn Fn(&Poly) -> Result<ExtendedValue, PadicError> + 'a;

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum KeyCheck {
    Pass,
    Fail { f: Poly, g: Poly },
}

#[derive(Debug, Clone)]
pub enum MlCheck {
    Pass,
    Fail { parts: Vec<Poly> },
}

const SAMPLE_DIGITS: [i64; 5] = [0, 1, -1, 2, -2];
const EXHAUSTIVE_PAIR_CAP: usize = 4000;

fn enumerate_small_polys(deg_below: usize, cap: usize) -> Vec<Poly> {
    let mut out = Vec::new();
    let mut counter = vec![0usize; deg_below];
    loop {
        let coeffs: Vec<i64> = counter.iter().map(|&d| SAMPLE_DIGITS[d]).collect();
        let p = Poly::from_int_coeffs(&coeffs);
        if !p.is_zero() {
            out.push(p);
        }
        if out.len() >= cap {
            return out;
        }
        let mut i = 0;
        loop {
            if i == counter.len() {
                return out;
            }
            counter[i] += 1;
            if counter[i] < SAMPLE_DIGITS.len() {
                break;
            }
            counter[i] = 0;
            i += 1;
        }
    }
}

fn random_poly_below(rng: &mut ChaCha8Rng, deg_below: usize, height: i64) -> Poly {
    let coeffs: Vec<i64> = (0..deg_below)
        .map(|_| rng.gen_range(-height..=height))
        .collect();
    Poly::from_int_coeffs(&coeffs)
}

/// Sampled check of the key-polynomial identity nu(fg) = nu(r_phi(f,g)).
/// Fail is conclusive; Pass is sampled evidence.
pub fn is_key_sampled(
    valfn: &ValFn,
    phi: &Poly,
    n_cap: usize,
    trials: u32,
    seed: u64,
) -> Result<KeyCheck, PadicError> {
    key_check_inner(valfn, phi, n_cap, trials, seed, false)
}

/// As `is_key_sampled` with the strict inequality nu(r) < nu(q*phi) as well.
pub fn is_strict_key_sampled(
    valfn: &ValFn,
    phi: &Poly,
    n_cap: usize,
    trials: u32,
    seed: u64,
) -> Result<KeyCheck, PadicError> {
    key_check_inner(valfn, phi, n_cap, trials, seed, true)
}

fn key_check_inner(
    valfn: &ValFn,
    phi: &Poly,
    n_cap: usize,
    trials: u32,
    seed: u64,
    strict: bool,
) -> Result<KeyCheck, PadicError> {
    let d = phi.deg_or_zero();
    assert!(d >= 1, "key polynomials have degree >= 1");
    let mut pairs: Vec<(Poly, Poly)> = Vec::new();
    let small = enumerate_small_polys(d, EXHAUSTIVE_PAIR_CAP);
    'outer: for f in &small {
        for g in &small {
            if f.deg_or_zero() + g.deg_or_zero() < n_cap {
                pairs.push((f.clone(), g.clone()));
                if pairs.len() >= EXHAUSTIVE_PAIR_CAP {
                    break 'outer;
                }
            }
        }
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    for _ in 0..trials {
        let f = random_poly_below(&mut rng, d, 1_000_000);
        let g = random_poly_below(&mut rng, d, 1_000_000);
        if f.is_zero() || g.is_zero() || f.deg_or_zero() + g.deg_or_zero() >= n_cap {
            continue;
        }
        pairs.push((f, g));
    }
    for (f, g) in pairs {
        let fg = &f * &g;
        let (q, r) = fg.euclid_div(phi)?;
        let v_fg = valfn(&fg)?;
        let v_r = valfn(&r)?;
        if v_fg != v_r {
            return Ok(KeyCheck::Fail { f, g });
        }
        if strict {
            let v_qphi = valfn(&(&q * phi))?;
            if !(v_r < v_qphi) {
                return Ok(KeyCheck::Fail { f, g });
            }
        }
    }
    Ok(KeyCheck::Pass)
}

/// Sampled check that the powers of phi form a separate family: the value of
/// sum f_i phi^i is the minimum of the term values. `designed` combinations
/// are checked first (the minimal polynomial's own expansion is the standard
/// witness when the degree cap admits it).
pub fn is_ml_key_sampled(
    valfn: &ValFn,
    phi: &Poly,
    n_cap: usize,
    trials: u32,
    seed: u64,
    designed: &[Vec<Poly>],
) -> Result<MlCheck, PadicError> {
    let d = phi.deg_or_zero();
    assert!(d >= 1);
    let m_max = if n_cap == 0 { 0 } else { (n_cap - 1) / d };
    let mut combos: Vec<Vec<Poly>> = designed.to_vec();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    for _ in 0..trials {
        let m = rng.gen_range(1..=m_max.max(1));
        let parts: Vec<Poly> = (0..=m)
            .map(|_| random_poly_below(&mut rng, d, 1000))
            .collect();
        if parts.iter().all(|p| p.is_zero()) {
            continue;
        }
        combos.push(parts);
    }
    for parts in combos {
        let mut total = Poly::zero();
        let mut min_term = ExtendedValue::Infinity;
        for (i, part) in parts.iter().enumerate() {
            if part.is_zero() {
                continue;
            }
            let term = part * &phi.pow(i as u32);
            total = &total + &term;
            min_term = ExtendedValue::min(min_term, valfn(&term)?);
        }
        let v_total = valfn(&total)?;
        if v_total != min_term {
            return Ok(MlCheck::Fail { parts });
        }
    }
    Ok(MlCheck::Pass)
}
