//! The end-to-end analysis pipeline: build the key-polynomial chain for a
//! branch oracle, classify key degrees, extend pseudo-Cauchy families at an
//! immediate degree, and compute values by the adaptive stopping rule.

use crate::exactnum::{rational_strings, ExtendedValue, Rational};
use crate::keyval::{ChainContext, KeyvalError, ValuationChain};
use crate::padic::{BranchOracle, PadicError};
use crate::polyring::{Poly, PolyError};
use crate::residue::ResidueError;
use serde::Serialize;
use std::fmt;

#[derive(Debug)]
pub enum ApproxError {
    NegativeGeneratorValue,
    NonConvergent { depth: u32 },
    NotImmediate { degree: usize },
    Inconsistent(String),
    Keyval(KeyvalError),
    Padic(PadicError),
    Poly(PolyError),
    Residue(ResidueError),
}

impl fmt::Display for ApproxError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ApproxError::NegativeGeneratorValue => {
                write!(f, "the generator has negative value; rescale it first")
            }
            ApproxError::NonConvergent { depth } => {
                write!(f, "no stabilization within family depth {depth}")
            }
            ApproxError::NotImmediate { degree } => {
                write!(f, "degree {degree} is not an immediate key degree of this analysis")
            }
            ApproxError::Inconsistent(m) => write!(f, "analysis inconsistency: {m}"),
            ApproxError::Keyval(e) => write!(f, "{e}"),
            ApproxError::Padic(e) => write!(f, "{e}"),
            ApproxError::Poly(e) => write!(f, "{e}"),
            ApproxError::Residue(e) => write!(f, "{e}"),
        }
    }
}

impl std::error::Error for ApproxError {}

impl From<KeyvalError> for ApproxError {
    fn from(e: KeyvalError) -> Self {
        ApproxError::Keyval(e)
    }
}

impl From<PadicError> for ApproxError {
    fn from(e: PadicError) -> Self {
        ApproxError::Padic(e)
    }
}

impl From<PolyError> for ApproxError {
    fn from(e: PolyError) -> Self {
        ApproxError::Poly(e)
    }
}

impl From<ResidueError> for ApproxError {
    fn from(e: ResidueError) -> Self {
        ApproxError::Residue(e)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum DegreeKind {
    SeparateResidual,
    SeparateValuational,
    Immediate,
}

impl fmt::Display for DegreeKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            DegreeKind::SeparateResidual => "SeparateResidual",
            DegreeKind::SeparateValuational => "SeparateValuational",
            DegreeKind::Immediate => "Immediate",
        };
        write!(f, "{s}")
    }
}

/// One same-degree step (phi, gamma) inside a key degree.
#[derive(Debug, Clone)]
pub struct KeyStep {
    pub phi: Poly,
    pub gamma: Rational,
}

#[derive(Debug, Clone)]
pub struct KeyDegreeReport {
    pub degree: usize,
    pub kind: DegreeKind,
    /// Same-degree family at this degree; the last entry is the level kept in
    /// the chain (for separate degrees, the one of maximal value).
    pub steps: Vec<KeyStep>,
    /// Display form of the residual factor whose lift opened this degree.
    pub residual_factor: Option<String>,
}

impl KeyDegreeReport {
    pub fn final_step(&self) -> &KeyStep {
        self.steps.last().expect("every degree has at least one step")
    }
}

#[derive(Debug, Clone)]
pub struct AnalysisReport {
    pub p: u64,
    pub minpoly: Poly,
    pub branch: usize,
    pub branch_count: usize,
    pub local_degree: usize,
    pub degrees: Vec<KeyDegreeReport>,
    pub chain: ValuationChain,
    pub e: u64,
    pub f_res: u64,
    pub separate: bool,
    pub truncated: bool,
    pub oracle_description: String,
}

#[derive(Debug, Clone, Copy)]
pub struct AnalyzeOptions {
    /// Same-degree steps taken at one degree before reporting it immediate.
    pub immediate_depth: u32,
}

impl Default for AnalyzeOptions {
    fn default() -> Self {
        AnalyzeOptions { immediate_depth: 8 }
    }
}

/// One same-degree refinement: factor the minimal polynomial's residual at
/// the top level, lift the active linear factor, and re-augment at the same
/// degree with the oracle's exact value of the lift.
fn same_degree_step(
    oracle: &BranchOracle,
    chain: &ValuationChain,
) -> Result<(ValuationChain, KeyStep), ApproxError> {
    let (_psi, lift, val) = active_factor(oracle, chain)?;
    let gamma = match &val {
        ExtendedValue::Finite(g) => g.clone(),
        ExtendedValue::Infinity => {
            return Err(ApproxError::Inconsistent(
                "same-degree lift collapsed onto the minimal polynomial".into(),
            ))
        }
    };
    let next = chain.augment(lift.clone(), val)?;
    Ok((next, KeyStep { phi: lift, gamma }))
}

/// The active factor of the minimal polynomial's residual at the top level:
/// the factor whose lift gains value under the oracle. Factors are tried in
/// canonical order, so the choice is deterministic.
fn active_factor(
    oracle: &BranchOracle,
    chain: &ValuationChain,
) -> Result<(crate::residue::FFPoly, Poly, ExtendedValue), ApproxError> {
    let res = chain.residual_data(oracle.minpoly())?;
    let field = chain.top_residue_field().clone();
    let factors = field.factor(&res.collapsed)?;
    for (psi, _mult) in &factors {
        let lift = chain.lift_residual_factor(psi)?;
        let hom = chain.value_raw(&lift);
        let val = oracle.value(&lift)?;
        if val > hom {
            return Ok((psi.clone(), lift, val));
        }
    }
    Err(ApproxError::Inconsistent(
        "no residual factor of the minimal polynomial gains value on this branch".into(),
    ))
}

/// Build the key-degree analysis of one branch.
pub fn analyze(oracle: &BranchOracle, opts: AnalyzeOptions) -> Result<AnalysisReport, ApproxError> {
    let gamma1 = match oracle.value(&Poly::x())? {
        ExtendedValue::Finite(g) => g,
        ExtendedValue::Infinity => {
            return Err(ApproxError::Inconsistent("generator vanishes".into()))
        }
    };
    if gamma1 < Rational::from_integer(0.into()) {
        return Err(ApproxError::NegativeGeneratorValue);
    }
    let context = ChainContext::Algebraic {
        minpoly: oracle.minpoly().clone(),
    };
    let mut chain = ValuationChain::gauss(oracle.p(), context, Poly::x(), gamma1.clone())?;
    let mut steps = vec![KeyStep {
        phi: Poly::x(),
        gamma: gamma1,
    }];
    let mut residual_into: Option<String> = None;
    let mut degrees: Vec<KeyDegreeReport> = Vec::new();
    let mut truncated = false;
    let mut separate = false;
    loop {
        let (psi, lift, val) = active_factor(oracle, &chain)?;
        let field = chain.top_residue_field();
        let t = field.poly_degree(&psi).unwrap();
        let e_k = chain.last_e() as usize;
        let m_k = chain.last_degree();
        let d_next = m_k * e_k * t;
        if d_next == m_k {
            // e = 1 and a linear factor: the maximum at this degree is not
            // reached yet; refine in place
            if steps.len() >= opts.immediate_depth.max(1) as usize {
                degrees.push(KeyDegreeReport {
                    degree: m_k,
                    kind: DegreeKind::Immediate,
                    steps,
                    residual_factor: residual_into,
                });
                truncated = true;
                break;
            }
            let gamma = match &val {
                ExtendedValue::Finite(g) => g.clone(),
                ExtendedValue::Infinity => {
                    return Err(ApproxError::Inconsistent(
                        "same-degree lift collapsed onto the minimal polynomial".into(),
                    ))
                }
            };
            chain = chain.augment(lift.clone(), val)?;
            steps.push(KeyStep { phi: lift, gamma });
            continue;
        }
        // the current degree is complete; classify by group membership
        let final_gamma = chain.last_gamma().clone();
        let kind = if chain.group_before_last().contains(&final_gamma) {
            DegreeKind::SeparateResidual
        } else {
            DegreeKind::SeparateValuational
        };
        degrees.push(KeyDegreeReport {
            degree: m_k,
            kind,
            steps: std::mem::take(&mut steps),
            residual_factor: residual_into.take(),
        });
        if d_next > oracle.local_degree() {
            return Err(ApproxError::Inconsistent(format!(
                "next key degree {d_next} exceeds the local degree {}",
                oracle.local_degree()
            )));
        }
        // The analysis is finished only when the next key polynomial would
        // have the full degree of the field: key degrees below it remain
        // reachable on branches whose local degree is smaller, and those end
        // in an immediate degree instead (the local factor is irrational).
        if d_next == oracle.minpoly().deg_or_zero() {
            separate = true;
            break;
        }
        let gamma = match &val {
            ExtendedValue::Finite(g) => g.clone(),
            ExtendedValue::Infinity => {
                return Err(ApproxError::Inconsistent(
                    "key lift below the local degree has infinite value".into(),
                ))
            }
        };
        residual_into = Some(field.poly_to_string(&psi));
        chain = chain.augment(lift.clone(), val)?;
        steps = vec![KeyStep { phi: lift, gamma }];
    }
    let (group, res_field) = chain.invariants();
    let report = AnalysisReport {
        p: oracle.p(),
        minpoly: oracle.minpoly().clone(),
        branch: oracle.branch(),
        branch_count: oracle.branch_count(),
        local_degree: oracle.local_degree(),
        degrees,
        chain,
        e: group.denominator(),
        f_res: res_field.degree() as u64,
        separate,
        truncated,
        oracle_description: oracle.describe(),
    };
    confirm_against_oracle(oracle, &report)?;
    Ok(report)
}

/// Cross-check the finished chain against the oracle on the chain basis
/// monomials below the local degree.
fn confirm_against_oracle(
    oracle: &BranchOracle,
    report: &AnalysisReport,
) -> Result<(), ApproxError> {
    let bound = report
        .local_degree
        .min(report.minpoly.deg_or_zero());
    for n in 1..bound {
        let (value, witness) = report.chain.degree_segment_max(n)?;
        let seen = oracle.value(&witness)?;
        if seen != value {
            return Err(ApproxError::Inconsistent(format!(
                "chain basis monomial {witness} has value {seen} but the chain assigns {value}"
            )));
        }
    }
    Ok(())
}

/// Replay the analysis chain keeping only the first `depth+1` steps of the
/// trailing immediate degree (depth counts from zero).
fn chain_at_depth(report: &AnalysisReport, depth: usize) -> Result<ValuationChain, ApproxError> {
    let context = ChainContext::Algebraic {
        minpoly: report.minpoly.clone(),
    };
    let mut chain: Option<ValuationChain> = None;
    for (idx, deg) in report.degrees.iter().enumerate() {
        let last_degree = idx + 1 == report.degrees.len();
        for (step_idx, step) in deg.steps.iter().enumerate() {
            if last_degree && deg.kind == DegreeKind::Immediate && step_idx > depth {
                break;
            }
            chain = Some(match chain {
                None => ValuationChain::gauss(
                    report.p,
                    context.clone(),
                    step.phi.clone(),
                    step.gamma.clone(),
                )?,
                Some(c) => c.augment(step.phi.clone(), step.gamma.clone().into())?,
            });
        }
    }
    chain.ok_or_else(|| ApproxError::Inconsistent("empty analysis".into()))
}

/// The pseudo-Cauchy family (phi_{d,k}, gamma_k) at an immediate degree,
/// extended with fresh same-degree steps up to `depth` entries.
pub fn pseudo_cauchy_family(
    oracle: &BranchOracle,
    report: &AnalysisReport,
    degree: usize,
    depth: usize,
) -> Result<Vec<KeyStep>, ApproxError> {
    let deg = report
        .degrees
        .iter()
        .find(|d| d.degree == degree && d.kind == DegreeKind::Immediate)
        .ok_or(ApproxError::NotImmediate { degree })?;
    let mut family: Vec<KeyStep> = deg.steps.clone();
    if family.len() >= depth {
        family.truncate(depth);
        return Ok(family);
    }
    let mut chain = chain_at_depth(report, family.len() - 1)?;
    while family.len() < depth {
        let (next, step) = same_degree_step(oracle, &chain)?;
        chain = next;
        family.push(step);
    }
    Ok(family)
}

/// Value of g under the analyzed valuation together with the family depth
/// used. Separate analyses read the chain directly; an immediate trailing
/// degree uses the stopping rule: deepen until two consecutive values agree.
pub fn value_adaptive_depth(
    oracle: &BranchOracle,
    report: &AnalysisReport,
    g: &Poly,
    max_depth: u32,
) -> Result<(ExtendedValue, u32), ApproxError> {
    let immediate = report
        .degrees
        .last()
        .map(|d| d.kind == DegreeKind::Immediate)
        .unwrap_or(false);
    if !immediate {
        return Ok((report.chain.value(g), 0));
    }
    let degree = report.degrees.last().unwrap().degree;
    let mut family = pseudo_cauchy_family(oracle, report, degree, 2)?;
    let mut values: Vec<ExtendedValue> = Vec::new();
    let mut m = 0usize;
    loop {
        while values.len() <= m + 1 {
            if values.len() >= family.len() {
                if family.len() >= max_depth as usize {
                    return Err(ApproxError::NonConvergent { depth: max_depth });
                }
                family = pseudo_cauchy_family(oracle, report, degree, family.len() + 1)?;
            }
            let chain = chain_at_depth_with(report, &family, values.len())?;
            values.push(chain.value(g));
        }
        if values[m] == values[m + 1] {
            return Ok((values[m].clone(), (m + 1) as u32));
        }
        m += 1;
    }
}

/// Like `chain_at_depth` but with an explicitly extended family.
fn chain_at_depth_with(
    report: &AnalysisReport,
    family: &[KeyStep],
    depth: usize,
) -> Result<ValuationChain, ApproxError> {
    if depth < report.degrees.last().unwrap().steps.len() {
        return chain_at_depth(report, depth);
    }
    let mut chain = chain_at_depth(report, report.degrees.last().unwrap().steps.len() - 1)?;
    for step in &family[report.degrees.last().unwrap().steps.len()..=depth] {
        chain = chain.augment(step.phi.clone(), step.gamma.clone().into())?;
    }
    Ok(chain)
}

pub fn value_adaptive(
    oracle: &BranchOracle,
    report: &AnalysisReport,
    g: &Poly,
) -> Result<ExtendedValue, ApproxError> {
    value_adaptive_depth(oracle, report, g, 24).map(|(v, _)| v)
}

/// The separate/immediate verdict by the degree formula.
#[derive(Debug, Clone, Serialize)]
pub struct SeparateVerdict {
    pub e: u64,
    pub f_res: u64,
    pub product: u64,
    pub global_degree: u64,
    pub local_degree: u64,
    /// e * f_res against the global field degree
    pub separate: bool,
    /// e * f_res against this branch's local degree
    pub local_match: bool,
}

pub fn verify_separate(report: &AnalysisReport) -> SeparateVerdict {
    let product = report.e * report.f_res;
    let global_degree = report.minpoly.deg_or_zero() as u64;
    SeparateVerdict {
        e: report.e,
        f_res: report.f_res,
        product,
        global_degree,
        local_degree: report.local_degree as u64,
        separate: product == global_degree,
        local_match: product == report.local_degree as u64,
    }
}

// ---- stable JSON shape ----

#[derive(Serialize)]
struct DegreeJson {
    d: usize,
    kind: String,
    phi: String,
    gamma_num: String,
    gamma_den: String,
}

#[derive(Serialize)]
struct ReportJson {
    prime: u64,
    minpoly: String,
    branch: usize,
    degrees: Vec<DegreeJson>,
    e: u64,
    f_res: u64,
    separate: bool,
    truncated: bool,
}

impl AnalysisReport {
    /// The stable serialized shape; rationals appear as num/den strings.
    pub fn to_json_value(&self) -> serde_json::Value {
        let degrees = self
            .degrees
            .iter()
            .map(|d| {
                let fin = d.final_step();
                let (num, den) = rational_strings(&fin.gamma);
                DegreeJson {
                    d: d.degree,
                    kind: d.kind.to_string(),
                    phi: fin.phi.to_string(),
                    gamma_num: num,
                    gamma_den: den,
                }
            })
            .collect();
        serde_json::to_value(ReportJson {
            prime: self.p,
            minpoly: self.minpoly.to_string(),
            branch: self.branch,
            degrees,
            e: self.e,
            f_res: self.f_res,
            separate: self.separate,
            truncated: self.truncated,
        })
        .expect("report serialization cannot fail")
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::exactnum::rat;
    use crate::padic::PrecisionPolicy;
    use crate::polyring::parse_poly;

    fn sextic() -> Poly {
        parse_poly("x^6+3*x^5+6*x^4+3*x^3+9*x+9").unwrap()
    }

    #[test]
    fn two_adic_analysis() {
        let oracle = BranchOracle::new(2, sextic(), 0, PrecisionPolicy::default()).unwrap();
        let report = analyze(&oracle, AnalyzeOptions::default()).unwrap();
        assert_eq!(report.branch_count, 1);
        assert_eq!(report.local_degree, 6);
        let degrees: Vec<(usize, DegreeKind)> = report
            .degrees
            .iter()
            .map(|d| (d.degree, d.kind))
            .collect();
        assert_eq!(
            degrees,
            vec![(1, DegreeKind::SeparateResidual), (2, DegreeKind::SeparateValuational)]
        );
        assert_eq!(
            report.chain.level_polys(),
            vec![
                (Poly::x(), rat(0, 1)),
                (parse_poly("x^2+x+1").unwrap(), rat(1, 3)),
            ]
        );
        assert_eq!(report.e, 3);
        assert_eq!(report.f_res, 2);
        assert!(report.separate);
        assert!(!report.truncated);
    }

    #[test]
    fn three_adic_analysis() {
        let oracle = BranchOracle::new(3, sextic(), 0, PrecisionPolicy::default()).unwrap();
        let report = analyze(&oracle, AnalyzeOptions::default()).unwrap();
        let degrees: Vec<(usize, DegreeKind)> = report
            .degrees
            .iter()
            .map(|d| (d.degree, d.kind))
            .collect();
        assert_eq!(
            degrees,
            vec![
                (1, DegreeKind::SeparateValuational),
                (3, DegreeKind::SeparateValuational)
            ]
        );
        assert_eq!(report.degrees[0].final_step().gamma, rat(1, 3));
        assert_eq!(report.degrees[1].final_step().gamma, rat(11, 6));
        assert_eq!(report.e, 6);
        assert_eq!(report.f_res, 1);
        assert!(report.separate);
        // the reported degree-3 polynomial attains the same maximum as the
        // classical representative
        let classical = parse_poly("x^3+6*x^2+12*x+6").unwrap();
        assert_eq!(oracle.value(&classical).unwrap(), rat(11, 6).into());
        assert_eq!(report.chain.value(&classical), rat(11, 6).into());
    }

    #[test]
    fn five_adic_analysis_is_immediate_at_two() {
        let oracle = BranchOracle::new(5, sextic(), 0, PrecisionPolicy::default()).unwrap();
        let report = analyze(&oracle, AnalyzeOptions { immediate_depth: 5 }).unwrap();
        assert_eq!(report.branch_count, 3);
        assert_eq!(report.local_degree, 2);
        let degrees: Vec<(usize, DegreeKind)> = report
            .degrees
            .iter()
            .map(|d| (d.degree, d.kind))
            .collect();
        assert_eq!(
            degrees,
            vec![(1, DegreeKind::SeparateResidual), (2, DegreeKind::Immediate)]
        );
        assert_eq!(report.e, 1);
        assert_eq!(report.f_res, 2);
        assert!(report.truncated);
        assert!(!report.separate);
        let verdict = verify_separate(&report);
        assert!(!verdict.separate);
        assert!(verdict.local_match);
        // family values strictly increase
        let steps = &report.degrees[1].steps;
        for w in steps.windows(2) {
            assert!(w[0].gamma < w[1].gamma);
        }
    }

    #[test]
    fn y_generator_analysis() {
        // minimal polynomial of y = 2*chi + 1 over the sextic fixture
        let h = parse_poly("x^6+9*x^4-32*x^3+27*x^2+288*x+283").unwrap();
        let oracle = BranchOracle::new(2, h, 0, PrecisionPolicy::default()).unwrap();
        let report = analyze(&oracle, AnalyzeOptions::default()).unwrap();
        let d1 = &report.degrees[0];
        assert_eq!(d1.degree, 1);
        assert_eq!(d1.steps.len(), 2);
        assert_eq!(d1.steps[0].phi, Poly::x());
        assert_eq!(d1.steps[0].gamma, rat(0, 1));
        assert_eq!(d1.steps[1].phi, parse_poly("x-1").unwrap());
        assert_eq!(d1.steps[1].gamma, rat(1, 1));
        let d2 = &report.degrees[1];
        assert_eq!(d2.degree, 2);
        // (y-1)^2 + 2(y-1) + 4 expanded
        assert_eq!(d2.final_step().phi, parse_poly("x^2+3").unwrap());
        assert_eq!(d2.final_step().gamma, rat(7, 3));
        assert_eq!(report.e, 3);
        assert_eq!(report.f_res, 2);
        assert!(report.separate);
    }

    #[test]
    fn adaptive_values_agree_with_oracle() {
        let oracle = BranchOracle::new(5, sextic(), 0, PrecisionPolicy::default()).unwrap();
        let report = analyze(&oracle, AnalyzeOptions::default()).unwrap();
        for g in [
            parse_poly("x^2+1").unwrap(),
            parse_poly("x^2-5*x-18").unwrap(),
            parse_poly("x^5+25*x^2-125").unwrap(),
            parse_poly("x-3").unwrap(),
        ] {
            let direct = oracle.value(&g).unwrap();
            let adaptive = value_adaptive(&oracle, &report, &g).unwrap();
            assert_eq!(adaptive, direct, "value of {g}");
        }
    }

    #[test]
    fn pseudo_cauchy_family_extends_with_increasing_values() {
        let oracle = BranchOracle::new(5, sextic(), 0, PrecisionPolicy::default()).unwrap();
        let report = analyze(&oracle, AnalyzeOptions { immediate_depth: 3 }).unwrap();
        let family = pseudo_cauchy_family(&oracle, &report, 2, 6).unwrap();
        assert_eq!(family.len(), 6);
        for w in family.windows(2) {
            assert!(w[0].gamma < w[1].gamma);
        }
        assert!(matches!(
            pseudo_cauchy_family(&oracle, &report, 1, 3),
            Err(ApproxError::NotImmediate { degree: 1 })
        ));
    }

    #[test]
    fn named_adaptive_values() {
        let two = BranchOracle::new(2, sextic(), 0, PrecisionPolicy::default()).unwrap();
        let r2 = analyze(&two, AnalyzeOptions::default()).unwrap();
        assert_eq!(
            value_adaptive(&two, &r2, &parse_poly("x^3").unwrap()).unwrap(),
            rat(0, 1).into()
        );
        let three = BranchOracle::new(3, sextic(), 0, PrecisionPolicy::default()).unwrap();
        let r3 = analyze(&three, AnalyzeOptions::default()).unwrap();
        assert_eq!(
            value_adaptive(&three, &r3, &parse_poly("x^2").unwrap()).unwrap(),
            rat(2, 3).into()
        );
        assert_eq!(
            value_adaptive(&three, &r3, &sextic()).unwrap(),
            ExtendedValue::Infinity
        );
    }

    #[test]
    fn separate_degrees_divide_their_successors() {
        for (p, f) in [
            (2u64, sextic()),
            (3, sextic()),
            (5, sextic()),
            (2, parse_poly("x^6+9*x^4-32*x^3+27*x^2+288*x+283").unwrap()),
        ] {
            let o = BranchOracle::new(p, f, 0, PrecisionPolicy::default()).unwrap();
            let r = analyze(&o, AnalyzeOptions::default()).unwrap();
            let degrees: Vec<usize> = r.degrees.iter().map(|d| d.degree).collect();
            for w in degrees.windows(2) {
                assert_eq!(w[1] % w[0], 0, "degree {} does not divide {}", w[0], w[1]);
            }
        }
    }

    #[test]
    fn stopping_rule_is_stable_beyond_agreement() {
        use rand::{Rng, SeedableRng};
        use rand_chacha::ChaCha8Rng;
        let oracle = BranchOracle::new(5, sextic(), 0, PrecisionPolicy::default()).unwrap();
        let report = analyze(&oracle, AnalyzeOptions::default()).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(23);
        for _ in 0..15 {
            let g = Poly::from_int_coeffs(
                &(0..=rng.gen_range(0..5))
                    .map(|_| rng.gen_range(-500..500))
                    .collect::<Vec<_>>(),
            );
            if g.is_zero() {
                continue;
            }
            let (value, depth) = super::value_adaptive_depth(&oracle, &report, &g, 24).unwrap();
            // once two consecutive values agree, deeper families agree too
            let family =
                pseudo_cauchy_family(&oracle, &report, 2, depth as usize + 4).unwrap();
            for extra in depth as usize..(depth as usize + 3) {
                let chain = super::chain_at_depth_with(&report, &family, extra).unwrap();
                assert_eq!(chain.value(&g), value, "depth {extra} for {g}");
            }
        }
    }

    #[test]
    fn chain_agrees_with_oracle_iff_gamma_is_maximal() {
        use crate::keyval::{ChainContext, ValuationChain};
        let oracle = BranchOracle::new(2, sextic(), 0, PrecisionPolicy::default()).unwrap();
        let phi = parse_poly("x^2+x+1").unwrap();
        let base = ValuationChain::gauss(
            2,
            ChainContext::Algebraic { minpoly: sextic() },
            Poly::x(),
            rat(0, 1),
        )
        .unwrap();
        // gamma below the maximum: the chain disagrees with the oracle at phi
        let low = base.augment(phi.clone(), rat(1, 6).into()).unwrap();
        assert_eq!(low.value(&phi), rat(1, 6).into());
        assert_eq!(oracle.value(&phi).unwrap(), rat(1, 3).into());
        // gamma at the maximum: agreement across degree <= 2 samples
        let max = base.augment(phi.clone(), rat(1, 3).into()).unwrap();
        for a in -2..=2i64 {
            for b in -2..=2i64 {
                for c in [1i64, 2] {
                    let g = Poly::from_int_coeffs(&[a, b, c]);
                    assert_eq!(max.value(&g), oracle.value(&g).unwrap(), "{g}");
                }
            }
        }
    }
}
