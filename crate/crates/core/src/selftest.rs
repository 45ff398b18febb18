//! The fixture suite behind `maclane selftest` and the acceptance tests: one
//! named check per assertion, deterministic given the seed, reported as a
//! stable JSON document.

use crate::approx::{
    analyze, pseudo_cauchy_family, value_adaptive, value_adaptive_depth, AnalysisReport,
    AnalyzeOptions, DegreeKind,
};
use crate::exactnum::{rat, ExtendedValue, Rational};
use crate::keyval::{
    is_key_sampled, is_ml_key_sampled, is_strict_key_sampled, ChainContext, KeyCheck, MlCheck,
    ValuationChain,
};
use crate::padic::{hensel_root, BranchOracle, PrecisionPolicy};
use crate::polyring::{parse_poly, Poly};
use crate::residue::FiniteField;
use num_traits::Zero;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

pub const DEFAULT_SEED: u64 = 4051;

#[derive(Debug, Clone, Serialize)]
pub struct CheckResult {
    pub name: String,
    pub pass: bool,
    pub detail: String,
}

impl CheckResult {
    fn ok(name: &str, detail: String) -> CheckResult {
        CheckResult {
            name: name.to_string(),
            pass: true,
            detail,
        }
    }

    fn fail(name: &str, detail: String) -> CheckResult {
        CheckResult {
            name: name.to_string(),
            pass: false,
            detail,
        }
    }
}

#[derive(Debug, Serialize)]
pub struct SelftestReport {
    pub seed: u64,
    pub passed: usize,
    pub failed: usize,
    pub checks: Vec<CheckResult>,
}

pub fn fixture_minpoly() -> Poly {
    parse_poly("x^6+3*x^5+6*x^4+3*x^3+9*x+9").unwrap()
}

/// Minimal polynomial of y = 2*chi + 1, derived from the sextic fixture by
/// the substitution chi = (y-1)/2 cleared by 2^6.
pub fn y_generator_minpoly() -> Poly {
    let f = fixture_minpoly();
    let half_shift = parse_poly("1/2*x-1/2").unwrap();
    let substituted = f.compose(&half_shift);
    substituted.scale(&rat(64, 1))
}

struct Harness {
    checks: Vec<CheckResult>,
}

impl Harness {
    fn new() -> Harness {
        Harness { checks: Vec::new() }
    }

    fn push(&mut self, name: &str, pass: bool, detail: String) {
        self.checks.push(if pass {
            CheckResult::ok(name, detail)
        } else {
            CheckResult::fail(name, detail)
        });
    }

    fn run<F>(&mut self, name: &str, body: F)
    where
        F: FnOnce() -> Result<(bool, String), String>,
    {
        match body() {
            Ok((pass, detail)) => self.push(name, pass, detail),
            Err(err) => self.push(name, false, format!("error: {err}")),
        }
    }
}

fn err_str<E: std::fmt::Display>(e: E) -> String {
    e.to_string()
}

fn oracle(p: u64, f: &Poly, branch: usize) -> Result<BranchOracle, String> {
    BranchOracle::new(p, f.clone(), branch, PrecisionPolicy::default()).map_err(err_str)
}

fn report(p: u64, f: &Poly, branch: usize, depth: u32) -> Result<(BranchOracle, AnalysisReport), String> {
    let o = oracle(p, f, branch)?;
    let r = analyze(&o, AnalyzeOptions { immediate_depth: depth }).map_err(err_str)?;
    Ok((o, r))
}

fn degrees_of(r: &AnalysisReport) -> Vec<(usize, DegreeKind)> {
    r.degrees.iter().map(|d| (d.degree, d.kind)).collect()
}

/// Criteria 1-8 in order; criterion 9 (determinism) replays this whole list.
pub fn fixture_checks(seed: u64) -> Vec<CheckResult> {
    (1..=8).flat_map(|n| criterion_checks(n, seed)).collect()
}

/// The checks of one acceptance criterion (1 through 8).
pub fn criterion_checks(n: u32, seed: u64) -> Vec<CheckResult> {
    let mut h = Harness::new();
    match n {
        1 => criterion_1(&mut h),
        2 => criterion_2(&mut h),
        3 => criterion_3(&mut h),
        4 => criterion_4(&mut h),
        5 => criterion_5(&mut h),
        6 => criterion_6(&mut h),
        7 => criterion_7(&mut h, seed),
        8 => criterion_8(&mut h, seed),
        _ => panic!("criteria run from 1 to 8"),
    }
    h.checks
}

pub fn run_all(seed: u64) -> SelftestReport {
    let mut checks = fixture_checks(seed);
    // criterion 9: two full runs must serialize byte-identically
    let first = serde_json::to_string(&fixture_checks(seed)).unwrap();
    let second = serde_json::to_string(&fixture_checks(seed)).unwrap();
    checks.push(if first == second {
        CheckResult::ok(
            "criterion_9_determinism",
            format!("two runs, {} bytes each, byte-identical", first.len()),
        )
    } else {
        CheckResult::fail(
            "criterion_9_determinism",
            "consecutive runs differ".to_string(),
        )
    });
    // harness sanity: a corrupted expectation must come back as a failure
    let corrupted = corrupted_fixture_check();
    checks.push(if corrupted.pass {
        CheckResult::fail(
            "harness_sanity",
            "corrupted fixture unexpectedly passed".to_string(),
        )
    } else {
        CheckResult::ok(
            "harness_sanity",
            format!("corrupted fixture fails as it should: {}", corrupted.detail),
        )
    });
    let passed = checks.iter().filter(|c| c.pass).count();
    let failed = checks.len() - passed;
    SelftestReport {
        seed,
        passed,
        failed,
        checks,
    }
}

fn criterion_1(h: &mut Harness) {
    h.run("criterion_1_two_adic_fixture", || {
        let f = fixture_minpoly();
        let (o, r) = report(2, &f, 0, 8)?;
        let mut ok = true;
        let mut notes = Vec::new();
        if degrees_of(&r)
            != vec![
                (1, DegreeKind::SeparateResidual),
                (2, DegreeKind::SeparateValuational),
            ]
        {
            ok = false;
            notes.push(format!("degrees {:?}", degrees_of(&r)));
        }
        let expected_chain = vec![
            (Poly::x(), rat(0, 1)),
            (parse_poly("x^2+x+1").unwrap(), rat(1, 3)),
        ];
        if r.chain.level_polys() != expected_chain {
            ok = false;
            notes.push("chain differs from [(x,0),(x^2+x+1,1/3)]".to_string());
        }
        if r.e != 3 || r.f_res != 2 || !r.separate {
            ok = false;
            notes.push(format!("e={} f_res={} separate={}", r.e, r.f_res, r.separate));
        }
        for d in [3usize, 4, 5] {
            if r.degrees.iter().any(|kd| kd.degree == d) {
                ok = false;
                notes.push(format!("spurious key degree {d}"));
            }
        }
        let probe = parse_poly("x^2+x+1").unwrap();
        let v = o.value(&probe).map_err(err_str)?;
        let v_adaptive =
            value_adaptive(&o, &r, &probe).map_err(err_str)?;
        if v != rat(1, 3).into() || v_adaptive != rat(1, 3).into() {
            ok = false;
            notes.push(format!("value of x^2+x+1 = {v} (adaptive {v_adaptive})"));
        }
        let detail = if ok {
            "degrees {1:res, 2:val}, chain [(x,0),(x^2+x+1,1/3)], e=3 f_res=2 separate, v(x^2+x+1)=1/3".to_string()
        } else {
            notes.join("; ")
        };
        Ok((ok, detail))
    });
}

fn criterion_2(h: &mut Harness) {
    h.run("criterion_2_three_adic_fixture", || {
        let f = fixture_minpoly();
        let (o, r) = report(3, &f, 0, 8)?;
        let mut ok = true;
        let mut notes = Vec::new();
        if degrees_of(&r)
            != vec![
                (1, DegreeKind::SeparateValuational),
                (3, DegreeKind::SeparateValuational),
            ]
        {
            ok = false;
            notes.push(format!("degrees {:?}", degrees_of(&r)));
        }
        if r.degrees[0].final_step().gamma != rat(1, 3) {
            ok = false;
            notes.push(format!("v(x) = {}", r.degrees[0].final_step().gamma));
        }
        // the classical degree-3 key polynomial: exact value 11/6, and the
        // reported polynomial defines the same chain valuation (both attain
        // the degree-3 maximum; their difference has strictly larger value)
        let classical = parse_poly("x^3+6*x^2+12*x+6").unwrap();
        let v_classical = o.value(&classical).map_err(err_str)?;
        if v_classical != rat(11, 6).into() {
            ok = false;
            notes.push(format!("v(x^3+6x^2+12x+6) = {v_classical}"));
        }
        let reported = r.degrees[1].final_step();
        if reported.gamma != rat(11, 6) {
            ok = false;
            notes.push(format!("reported degree-3 value {}", reported.gamma));
        }
        if r.chain.value(&classical) != rat(11, 6).into() {
            ok = false;
            notes.push("chain does not assign 11/6 to the classical key".to_string());
        }
        let diff = &reported.phi - &classical;
        let v_diff = o.value(&diff).map_err(err_str)?;
        if !(v_diff > rat(11, 6).into()) {
            ok = false;
            notes.push(format!("reported and classical keys differ at value {v_diff}"));
        }
        if r.e != 6 || r.f_res != 1 || !r.separate {
            ok = false;
            notes.push(format!("e={} f_res={} separate={}", r.e, r.f_res, r.separate));
        }
        let detail = if ok {
            format!(
                "degrees {{1:val, 3:val}}, v(x)=1/3, degree-3 key {} with value 11/6 (= classical x^3+6*x^2+12*x+6 as a valuation), e=6 f_res=1 separate",
                reported.phi
            )
        } else {
            notes.join("; ")
        };
        Ok((ok, detail))
    });
}

fn criterion_3(h: &mut Harness) {
    h.run("criterion_3_five_adic_fixture", || {
        let f = fixture_minpoly();
        let (_o, r) = report(5, &f, 0, 5)?;
        let mut ok = true;
        let mut notes = Vec::new();
        if r.branch_count != 3 {
            ok = false;
            notes.push(format!("branch count {}", r.branch_count));
        }
        if r.local_degree != 2 || r.e != 1 || r.f_res != 2 {
            ok = false;
            notes.push(format!(
                "local={} e={} f_res={}",
                r.local_degree, r.e, r.f_res
            ));
        }
        if degrees_of(&r)
            != vec![(1, DegreeKind::SeparateResidual), (2, DegreeKind::Immediate)]
        {
            ok = false;
            notes.push(format!("degrees {:?}", degrees_of(&r)));
        }
        // residual factorization of x^3-2 over F_5(j), j^2+j+1 = 0
        let f25 = FiniteField::extension(5, vec![1, 1, 1]).map_err(err_str)?;
        let cubic = f25.poly_from_i64(&[-2, 0, 0, 1]);
        let factors = f25.factor(&cubic).map_err(err_str)?;
        let j = f25.generator();
        let three = f25.from_u64(3);
        let mut expected: Vec<_> = [
            three.clone(),
            f25.mul(&three, &j),
            f25.mul(&three, &f25.mul(&j, &j)),
        ]
        .into_iter()
        .map(|root| f25.poly_from_elems(vec![f25.neg(&root), f25.one()]))
        .collect();
        expected.sort_by(|a, b| f25.poly_cmp(a, b));
        let got: Vec<_> = factors.iter().map(|(f, _)| f.clone()).collect();
        if got != expected || factors.iter().any(|(_, m)| *m != 1) {
            ok = false;
            notes.push("x^3-2 does not split as (x-3)(x-3j)(x-3j^2) over F_5(j)".to_string());
        }
        // v5(cbrt(2) - 3) = 2 through the degree-1 branch of x^3-2:
        // vp(Res(F, x-3)) = 2 with deg(F) = 1
        let cubic_q = parse_poly("x^3-2").unwrap();
        let o3 = oracle(5, &cubic_q, 0)?;
        if o3.local_degree() != 1 {
            ok = false;
            notes.push("branch 0 of x^3-2 at p=5 should be the linear one".to_string());
        }
        let probe = o3.value(&parse_poly("x-3").unwrap()).map_err(err_str)?;
        if probe != rat(2, 1).into() {
            ok = false;
            notes.push(format!("v5(x-3) on the lifting-of-3 branch = {probe}"));
        }
        let detail = if ok {
            "3 branches, chosen branch local degree 2 with e=1 f_res=2, degrees {1:res, 2:immediate}, residual split (x-3)(x-3j)(x-3j^2), probe value 2 matching vp(Res)=2".to_string()
        } else {
            notes.join("; ")
        };
        Ok((ok, detail))
    });
}

fn criterion_4(h: &mut Harness) {
    h.run("criterion_4_hensel_digits", || {
        let g = parse_poly("x^3-2").unwrap();
        let lift = hensel_root(&g, 5, 3, 4).map_err(err_str)?;
        let mut ok = true;
        let mut notes = Vec::new();
        if lift.digits[1] != 0 {
            ok = false;
            notes.push(format!("a1 = {}", lift.digits[1]));
        }
        if lift.partial_sums[2].to_string() != "53" {
            ok = false;
            notes.push(format!("x2 = {}", lift.partial_sums[2]));
        }
        if lift.digits[3] != 2 {
            ok = false;
            notes.push(format!("a3 = {}", lift.digits[3]));
        }
        // The fixture table pins a4 = 2. Exact arithmetic disagrees: the
        // partial sum with a4 = 2 is 1553 and 1553^3 = 1877 mod 5^5, while
        // 2178^3 = 2 mod 5^5, so the digit forced by x^3 = 2 is a4 = 3.
        // The assertion is kept as stated and the computed digit is shown.
        if lift.digits[4] != 2 {
            ok = false;
            notes.push(format!(
                "a4 = {} (computed; 1553^3 mod 3125 = 1877 != 2, 2178^3 mod 3125 = 2)",
                lift.digits[4]
            ));
        }
        let detail = if ok {
            "a1=0, x2=53, a3=2, a4=2".to_string()
        } else {
            notes.join("; ")
        };
        Ok((ok, detail))
    });
}

fn criterion_5(h: &mut Harness) {
    h.run("criterion_5_y_generator_fixture", || {
        let hpoly = y_generator_minpoly();
        let mut ok = true;
        let mut notes = Vec::new();
        // the fixture is defined by the generator change y = 2*chi + 1, so
        // its minimal polynomial is derived by substitution and must vanish
        // at 2*chi+1 modulo the sextic: x^6+9x^4-32x^3+27x^2+288x+283
        let expected_h = parse_poly("x^6+9*x^4-32*x^3+27*x^2+288*x+283").unwrap();
        if hpoly != expected_h {
            ok = false;
            notes.push(format!("derived minimal polynomial {hpoly}"));
        }
        let subst = hpoly.compose(&parse_poly("2*x+1").unwrap());
        let f = fixture_minpoly();
        let (_, rem) = subst.euclid_div(&f).map_err(err_str)?;
        if !rem.is_zero() {
            ok = false;
            notes.push("h(2*chi+1) != 0 mod f".to_string());
        }
        let (_o, r) = report(2, &hpoly, 0, 8)?;
        let d1 = &r.degrees[0];
        let step_ok = d1.degree == 1
            && d1.steps.len() == 2
            && d1.steps[0].phi == Poly::x()
            && d1.steps[0].gamma == Rational::zero()
            && d1.steps[1].phi == parse_poly("x-1").unwrap()
            && d1.steps[1].gamma == rat(1, 1);
        if !step_ok {
            ok = false;
            notes.push(format!(
                "degree-1 path {:?}",
                d1.steps
                    .iter()
                    .map(|s| format!("({},{})", s.phi, s.gamma))
                    .collect::<Vec<_>>()
            ));
        }
        let d2 = &r.degrees[1];
        // (y-1)^2 + 2(y-1) + 4 = y^2 + 3
        if d2.final_step().phi != parse_poly("x^2+3").unwrap()
            || d2.final_step().gamma != rat(7, 3)
        {
            ok = false;
            notes.push(format!(
                "degree-2 key ({}, {})",
                d2.final_step().phi,
                d2.final_step().gamma
            ));
        }
        if r.e != 3 || r.f_res != 2 || !r.separate {
            ok = false;
            notes.push(format!("e={} f_res={} separate={}", r.e, r.f_res, r.separate));
        }
        let detail = if ok {
            "same-degree step y -> y-1 with value 1, then (y-1)^2+2(y-1)+4 at 7/3; e=3 f_res=2 matching the 2-adic fixture".to_string()
        } else {
            notes.join("; ")
        };
        Ok((ok, detail))
    });
}

fn criterion_6(h: &mut Harness) {
    h.run("criterion_6_separate_basis_maxima", || {
        let f = fixture_minpoly();
        let (_o, r) = report(2, &f, 0, 8)?;
        let phi2 = parse_poly("x^2+x+1").unwrap();
        let (v3, w3) = r.chain.degree_segment_max(3).map_err(err_str)?;
        let (v4, w4) = r.chain.degree_segment_max(4).map_err(err_str)?;
        let ok = v3 == rat(1, 3).into()
            && w3 == &Poly::x() * &phi2
            && v4 == rat(2, 3).into()
            && w4 == phi2.pow(2);
        let detail = if ok {
            "max at degree 3 is (1/3, x*(x^2+x+1)); at degree 4 is (2/3, (x^2+x+1)^2)".to_string()
        } else {
            format!("got n=3 -> ({v3}, {w3}), n=4 -> ({v4}, {w4})")
        };
        Ok((ok, detail))
    });
}

struct PropertyStats {
    trials: u32,
    failures: Vec<String>,
}

impl PropertyStats {
    fn new() -> Self {
        PropertyStats {
            trials: 0,
            failures: Vec::new(),
        }
    }

    fn check(&mut self, cond: bool, describe: impl FnOnce() -> String) {
        self.trials += 1;
        if !cond && self.failures.len() < 3 {
            self.failures.push(describe());
        }
    }

    fn finish(self, h: &mut Harness, name: &str) {
        let pass = self.failures.is_empty();
        let detail = if pass {
            format!("{} trials, zero failures", self.trials)
        } else {
            format!("{} trials, failures: {}", self.trials, self.failures.join("; "))
        };
        h.push(name, pass, detail);
    }
}

fn random_poly(rng: &mut ChaCha8Rng, max_deg: usize, height: i64) -> Poly {
    let deg = rng.gen_range(0..=max_deg);
    Poly::from_int_coeffs(
        &(0..=deg)
            .map(|_| rng.gen_range(-height..=height))
            .collect::<Vec<_>>(),
    )
}

fn random_nonzero_poly(rng: &mut ChaCha8Rng, max_deg: usize, height: i64) -> Poly {
    loop {
        let p = random_poly(rng, max_deg, height);
        if !p.is_zero() {
            return p;
        }
    }
}

fn criterion_7(h: &mut Harness, seed: u64) {
    let trials = 500u32;
    let f = fixture_minpoly();
    let two = oracle(2, &f, 0).expect("fixture oracle");
    let chain2 = analyze(&two, AnalyzeOptions::default())
        .expect("fixture analysis")
        .chain;

    // (a) K-module axioms and partial multiplicativity of the chain value
    {
        let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0xa);
        let mut stats = PropertyStats::new();
        for _ in 0..trials {
            let g = random_poly(&mut rng, 5, 50);
            let hh = random_poly(&mut rng, 5, 50);
            let x = rat(rng.gen_range(-40..40).max(1), rng.gen_range(1..9));
            let vg = chain2.value(&g);
            let vh = chain2.value(&hh);
            let vsum = chain2.value(&(&g + &hh));
            stats.check(
                vsum >= ExtendedValue::min(vg.clone(), vh.clone()),
                || format!("ultrametric fails for {g} and {hh}"),
            );
            stats.check(
                (chain2.value(&g.scale(&x))
                    == crate::padic::vp(&x, 2) + vg.clone())
                    && (chain2.value(&Poly::zero()) == ExtendedValue::Infinity),
                || format!("scalar rule fails for {x} * ({g})"),
            );
            if g.deg_or_zero() + hh.deg_or_zero() < 6 && !g.is_zero() && !hh.is_zero() {
                stats.check(
                    chain2.value(&(&g * &hh)) == vg + vh,
                    || format!("partial multiplicativity fails for {g} and {hh}"),
                );
            }
        }
        stats.finish(h, "criterion_7a_chain_k_module_axioms");
    }

    // (b) chain domination: chain value <= oracle value
    {
        let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0xb);
        let mut stats = PropertyStats::new();
        for _ in 0..trials {
            let g = random_poly(&mut rng, 5, 200);
            let cv = chain2.value(&g);
            let ov = two.value(&g).expect("oracle value");
            stats.check(cv <= ov, || format!("domination fails for {g}: {cv} > {ov}"));
        }
        stats.finish(h, "criterion_7b_chain_domination");
    }

    // (c) augmentation monotonicity and low-degree preservation
    {
        let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0xc);
        let mut stats = PropertyStats::new();
        let gauss = ValuationChain::gauss(
            2,
            ChainContext::Algebraic { minpoly: f.clone() },
            Poly::x(),
            Rational::zero(),
        )
        .expect("gauss chain");
        let phi2 = parse_poly("x^2+x+1").unwrap();
        for _ in 0..trials {
            // random admissible value above the current chain value 0
            let gamma = rat(rng.gen_range(1..20), rng.gen_range(1..8));
            let augmented = gauss.augment(phi2.clone(), gamma.clone().into()).expect("admissible");
            let g = random_poly(&mut rng, 5, 50);
            let before = gauss.value(&g);
            let after = augmented.value(&g);
            stats.check(after >= before, || {
                format!("augmentation decreased value of {g}")
            });
            let low = random_poly(&mut rng, 1, 50);
            stats.check(augmented.value(&low) == gauss.value(&low), || {
                format!("low-degree value changed for {low}")
            });
        }
        stats.finish(h, "criterion_7c_augmentation_monotonicity");
    }

    // (d) oracle partial multiplicativity
    {
        let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0xd);
        let mut stats = PropertyStats::new();
        for _ in 0..trials {
            let g = random_nonzero_poly(&mut rng, 2, 100);
            let hh = random_nonzero_poly(&mut rng, 2, 100);
            let vg = two.value(&g).expect("value");
            let vh = two.value(&hh).expect("value");
            let vgh = two.value(&(&g * &hh)).expect("value");
            stats.check(vgh == vg + vh, || {
                format!("oracle multiplicativity fails for {g} and {hh}")
            });
        }
        stats.finish(h, "criterion_7d_oracle_partial_multiplicativity");
    }

    // (e) residual multiplicativity up to a scalar unit
    {
        let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0xe);
        let mut stats = PropertyStats::new();
        let field = chain2.top_residue_field().clone();
        for _ in 0..trials {
            let g = random_nonzero_poly(&mut rng, 2, 60);
            let hh = random_nonzero_poly(&mut rng, 2, 60);
            let rg = chain2.residual_polynomial(&g).expect("residual");
            let rh = chain2.residual_polynomial(&hh).expect("residual");
            let rgh = chain2.residual_polynomial(&(&g * &hh)).expect("residual");
            let prod = field.poly_mul(&rg, &rh);
            // equality up to a scalar unit
            let equal_up_to_unit = match (field.poly_degree(&prod), field.poly_degree(&rgh)) {
                (Some(a), Some(b)) if a == b => {
                    let la = prod.coeffs().last().unwrap();
                    let lb = rgh.coeffs().last().unwrap();
                    let scale = field.mul(lb, &field.inv(la));
                    field.poly_scale(&prod, &scale) == rgh
                }
                _ => false,
            };
            stats.check(equal_up_to_unit, || {
                format!("residual multiplicativity fails for {g} and {hh}")
            });
        }
        stats.finish(h, "criterion_7e_residual_multiplicativity");
    }

    // (f) strict-key certification of pipeline keys; x^2 must fail at f=g=x
    {
        let mut stats = PropertyStats::new();
        let valfn = |g: &Poly| two.value(g);
        for fixture in [(2u64, 0usize), (3, 0), (5, 0)] {
            let o = oracle(fixture.0, &f, fixture.1).expect("oracle");
            let r = analyze(&o, AnalyzeOptions { immediate_depth: 4 }).expect("analysis");
            let vf = |g: &Poly| o.value(g);
            for deg in &r.degrees {
                for step in &deg.steps {
                    let check =
                        is_strict_key_sampled(&vf, &step.phi, 6, 60, seed ^ 0xf).expect("sampled");
                    stats.check(check == KeyCheck::Pass, || {
                        format!("pipeline key {} rejected at p={}", step.phi, fixture.0)
                    });
                }
            }
        }
        let sq = parse_poly("x^2").unwrap();
        let check = is_strict_key_sampled(&valfn, &sq, 6, 60, seed ^ 0xf).expect("sampled");
        stats.check(
            check
                == KeyCheck::Fail {
                    f: Poly::x(),
                    g: Poly::x(),
                },
            || format!("x^2 check returned {check:?}"),
        );
        // ML witness: the minimal polynomial's own expansion defeats the
        // separateness of the powers of x^2+x+1 under the oracle
        let phi2 = parse_poly("x^2+x+1").unwrap();
        let designed = vec![f.phi_expand(&phi2).expect("expansion")];
        let ml = is_ml_key_sampled(&valfn, &phi2, 7, 60, seed ^ 0xf, &designed).expect("sampled");
        stats.check(matches!(ml, MlCheck::Fail { .. }), || {
            "expected the designed combination to defeat separateness".to_string()
        });
        let ml_pass =
            is_ml_key_sampled(&valfn, &phi2, 6, 60, seed ^ 0xf, &[]).expect("sampled");
        stats.check(matches!(ml_pass, MlCheck::Pass), || {
            "powers of the degree-2 key must be separate below the cap".to_string()
        });
        let key_pass = is_key_sampled(&valfn, &phi2, 6, 60, seed ^ 0xf).expect("sampled");
        stats.check(key_pass == KeyCheck::Pass, || {
            "x^2+x+1 must pass the key check".to_string()
        });
        stats.finish(h, "criterion_7f_strict_key_certification");
    }
}

fn criterion_8(h: &mut Harness, seed: u64) {
    let f = fixture_minpoly();
    let fixtures: Vec<(&str, u64, Poly, usize)> = vec![
        ("p2", 2, f.clone(), 0),
        ("p3", 3, f.clone(), 0),
        ("p5", 5, f.clone(), 0),
        ("ygen", 2, y_generator_minpoly(), 0),
    ];
    let mut stats = PropertyStats::new();
    let mut max_depth_seen = 0u32;
    for (idx, (name, p, minpoly, branch)) in fixtures.iter().enumerate() {
        let o = match oracle(*p, minpoly, *branch) {
            Ok(o) => o,
            Err(e) => {
                h.push(
                    "criterion_8_approximation_theorem",
                    false,
                    format!("{name}: {e}"),
                );
                return;
            }
        };
        let r = match analyze(&o, AnalyzeOptions::default()) {
            Ok(r) => r,
            Err(e) => {
                h.push(
                    "criterion_8_approximation_theorem",
                    false,
                    format!("{name}: {e}"),
                );
                return;
            }
        };
        let mut rng = ChaCha8Rng::seed_from_u64(seed.wrapping_add(idx as u64 * 7919));
        for _ in 0..200 {
            let g = random_poly(&mut rng, 5, 10_000);
            let direct = match o.value(&g) {
                Ok(v) => v,
                Err(e) => {
                    stats.check(false, || format!("{name}: oracle error {e} on {g}"));
                    continue;
                }
            };
            match value_adaptive_depth(&o, &r, &g, 24) {
                Ok((v, depth)) => {
                    max_depth_seen = max_depth_seen.max(depth);
                    stats.check(v == direct && depth <= 8, || {
                        format!("{name}: adaptive {v} (depth {depth}) vs oracle {direct} for {g}")
                    });
                }
                Err(e) => stats.check(false, || format!("{name}: adaptive error {e} on {g}")),
            }
        }
    }
    let pass = stats.failures.is_empty();
    let detail = if pass {
        format!(
            "{} samples across 4 fixtures agree exactly; max stabilization depth {max_depth_seen}",
            stats.trials
        )
    } else {
        format!("failures: {}", stats.failures.join("; "))
    };
    h.push("criterion_8_approximation_theorem", pass, detail);
}

/// A deliberately corrupted expectation, used to prove the harness can fail.
pub fn corrupted_fixture_check() -> CheckResult {
    let f = fixture_minpoly();
    let o = BranchOracle::new(2, f, 0, PrecisionPolicy::default()).expect("oracle");
    let v = o
        .value(&parse_poly("x^2+x+1").unwrap())
        .expect("value");
    // negated expectation: -1/3 instead of 1/3
    if v == rat(-1, 3).into() {
        CheckResult::ok("corrupted_fixture", "unexpectedly matched".into())
    } else {
        CheckResult::fail(
            "corrupted_fixture",
            format!("expected -1/3 (corrupted), computed {v}"),
        )
    }
}

// Extra helpers for the pseudo-Cauchy acceptance text.
pub fn five_adic_family_matches_digit_formula(depth: usize) -> Result<(bool, String), String> {
    let f = fixture_minpoly();
    let o = oracle(5, &f, 0)?;
    let r = analyze(&o, AnalyzeOptions { immediate_depth: 5 }).map_err(err_str)?;
    let family = pseudo_cauchy_family(&o, &r, 2, depth).map_err(err_str)?;
    // digit data of cbrt(2) (x_n) and cbrt(4) (y_n)
    let cubic = parse_poly("x^3-2").unwrap();
    let xs = hensel_root(&cubic, 5, 3, depth as u32).map_err(err_str)?;
    let quartic = parse_poly("x^3-4").unwrap();
    let ys = hensel_root(&quartic, 5, 4, depth as u32).map_err(err_str)?;
    let mut ok = true;
    let mut notes = Vec::new();
    for n in 0..depth {
        let xn = Rational::from_integer(xs.partial_sums[n].clone().into());
        let yn = Rational::from_integer(ys.partial_sums[n].clone().into());
        // phi_{2,n} = x^2 + (1-2x_n)x + x_n(2x_n-1) + 1 - y_n
        let a = rat(1, 1) - rat(2, 1) * xn.clone();
        let b = xn.clone() * (rat(2, 1) * xn - rat(1, 1)) + rat(1, 1) - yn;
        let phi = Poly::new(vec![b, a, rat(1, 1)]);
        let v = o.value(&phi).map_err(err_str)?;
        if v != rat((n + 1) as i64, 1).into() {
            ok = false;
            notes.push(format!("formula polynomial at n={n} has value {v}"));
        }
        if family[n].gamma <= Rational::zero() {
            ok = false;
            notes.push(format!("family value at {n} not positive"));
        }
    }
    let detail = if ok {
        format!("digit-formula polynomials have values 1..{depth} on the branch")
    } else {
        notes.join("; ")
    };
    Ok((ok, detail))
}

pub fn value_of(p: u64, minpoly: &Poly, branch: usize, expr: &Poly) -> Result<ExtendedValue, String> {
    let o = oracle(p, minpoly, branch)?;
    let r = analyze(&o, AnalyzeOptions::default()).map_err(err_str)?;
    value_adaptive(&o, &r, expr).map_err(err_str)
}
