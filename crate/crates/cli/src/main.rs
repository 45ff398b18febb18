use clap::{Parser, Subcommand};
use maclane::approx::{
    analyze, pseudo_cauchy_family, value_adaptive, AnalyzeOptions, ApproxError,
};
use maclane::exactnum::{rational_strings, ExtendedValue};
use maclane::keyval::KeyvalError;
use maclane::padic::{hensel_root, mod_p_groups, BranchOracle, PadicError, PrecisionPolicy};
use maclane::polyring::{parse_poly, Poly, PolyError};
use maclane::residue::FiniteField;
use maclane::selftest;
use serde_json::{json, Value};

/// Exact key-polynomial analysis of p-adic valuations on simple extensions
/// of the rationals.
#[derive(Parser)]
#[command(name = "maclane", version, about)]
struct Cli {
    #[command(subcommand)]
    command: Command,
    /// Pretty-print the JSON output.
    #[arg(long, global = true)]
    pretty: bool,
    /// Seed for the sampled checks; echoed in every output.
    #[arg(long, global = true, default_value_t = selftest::DEFAULT_SEED)]
    seed: u64,
}

#[derive(Subcommand)]
enum Command {
    /// Analyze the key degrees of one p-adic branch of a minimal polynomial.
    Analyze {
        #[arg(long)]
        p: u64,
        #[arg(long)]
        minpoly: String,
        /// Branch index (canonical order of the mod-p factors); default 0.
        #[arg(long)]
        branch: Option<usize>,
        /// Analyze every branch of the prime.
        #[arg(long)]
        all_branches: bool,
        #[arg(long, default_value_t = 8)]
        immediate_depth: u32,
        /// Initial p-adic working precision.
        #[arg(long)]
        precision: Option<u32>,
    },
    /// Value of a polynomial expression under the analyzed valuation.
    Value {
        #[arg(long)]
        p: u64,
        #[arg(long)]
        minpoly: String,
        #[arg(long)]
        branch: Option<usize>,
        #[arg(long)]
        expr: String,
        #[arg(long, default_value_t = 8)]
        immediate_depth: u32,
        #[arg(long)]
        precision: Option<u32>,
    },
    /// p-adic digits of a simple residual root, lifted by Hensel's lemma.
    Digits {
        #[arg(long)]
        p: u64,
        #[arg(long)]
        poly: String,
        #[arg(long)]
        root: u64,
        #[arg(long)]
        n: u32,
    },
    /// List the p-adic branches (coprime mod-p groups) of a minimal polynomial.
    Branches {
        #[arg(long)]
        p: u64,
        #[arg(long)]
        minpoly: String,
    },
    /// Run the built-in fixture and property suite.
    Selftest {
        /// Also list the pseudo-Cauchy family of the five-adic fixture.
        #[arg(long, default_value_t = false)]
        verbose: bool,
    },
}

struct CliError {
    kind: &'static str,
    message: String,
    code: i32,
}

impl CliError {
    fn new(kind: &'static str, message: String, code: i32) -> CliError {
        CliError {
            kind,
            message,
            code,
        }
    }
}

impl From<PolyError> for CliError {
    fn from(e: PolyError) -> Self {
        match &e {
            PolyError::Parse(_) => CliError::new("ParseError", e.to_string(), 2),
            _ => CliError::new("PolyError", e.to_string(), 1),
        }
    }
}

impl From<PadicError> for CliError {
    fn from(e: PadicError) -> Self {
        match &e {
            PadicError::PrecisionExhausted { .. } => {
                CliError::new("PrecisionExhausted", e.to_string(), 3)
            }
            PadicError::NotASimpleRoot(_) => CliError::new("NotASimpleRoot", e.to_string(), 4),
            PadicError::BranchOutOfRange { .. } => {
                CliError::new("BranchOutOfRange", e.to_string(), 1)
            }
            PadicError::NotPrime(_) => CliError::new("NotPrime", e.to_string(), 2),
            PadicError::NotIntegral => CliError::new("NotIntegral", e.to_string(), 1),
            PadicError::NotMonic => CliError::new("NotMonic", e.to_string(), 1),
            PadicError::Poly(p) => CliError::from(p.clone()),
            _ => CliError::new("PadicError", e.to_string(), 1),
        }
    }
}

impl From<maclane::residue::ResidueError> for CliError {
    fn from(e: maclane::residue::ResidueError) -> Self {
        CliError::new("ResidueError", e.to_string(), 1)
    }
}

impl From<ApproxError> for CliError {
    fn from(e: ApproxError) -> Self {
        match e {
            ApproxError::Padic(p) => CliError::from(p),
            ApproxError::Poly(p) => CliError::from(p),
            ApproxError::Keyval(KeyvalError::Padic(p)) => CliError::from(p),
            ApproxError::NonConvergent { .. } => {
                CliError::new("NonConvergent", e.to_string(), 1)
            }
            other => CliError::new("AnalysisError", other.to_string(), 1),
        }
    }
}

fn precision_policy(initial: Option<u32>) -> PrecisionPolicy {
    let mut policy = PrecisionPolicy::default();
    if let Some(init) = initial {
        policy.initial = init.max(1);
    }
    if let Ok(cap) = std::env::var("MACLANE_MAX_PRECISION") {
        if let Ok(cap) = cap.parse::<u32>() {
            policy.max = cap.max(policy.initial);
        }
    }
    policy
}

fn parse_minpoly(text: &str) -> Result<Poly, CliError> {
    let poly = parse_poly(text)?;
    if !poly.is_monic() {
        return Err(CliError::new(
            "ParseError",
            "minimal polynomial must be monic".into(),
            2,
        ));
    }
    if poly.deg_or_zero() < 2 {
        return Err(CliError::new(
            "ParseError",
            "minimal polynomial must have degree at least 2".into(),
            2,
        ));
    }
    Ok(poly)
}

fn value_json(v: &ExtendedValue) -> Value {
    match v.finite() {
        Some(r) => {
            let (num, den) = rational_strings(r);
            json!({ "num": num, "den": den })
        }
        None => json!("inf"),
    }
}

fn report_with_seed(report: &maclane::AnalysisReport, seed: u64) -> Value {
    let mut v = report.to_json_value();
    v.as_object_mut()
        .expect("report is an object")
        .insert("seed".to_string(), json!(seed));
    v
}

fn run(cli: &Cli) -> Result<Value, CliError> {
    match &cli.command {
        Command::Analyze {
            p,
            minpoly,
            branch,
            all_branches,
            immediate_depth,
            precision,
        } => {
            let f = parse_minpoly(minpoly)?;
            let policy = precision_policy(*precision);
            let opts = AnalyzeOptions {
                immediate_depth: *immediate_depth,
            };
            if *all_branches {
                let probe = BranchOracle::new(*p, f.clone(), 0, policy.clone())?;
                let count = probe.branch_count();
                let mut reports = Vec::new();
                for b in 0..count {
                    let oracle = BranchOracle::new(*p, f.clone(), b, policy.clone())?;
                    let report = analyze(&oracle, opts)?;
                    reports.push(report.to_json_value());
                }
                Ok(json!({
                    "prime": p,
                    "minpoly": f.to_string(),
                    "branch_count": count,
                    "reports": reports,
                    "seed": cli.seed,
                }))
            } else {
                let oracle = BranchOracle::new(*p, f, branch.unwrap_or(0), policy)?;
                let report = analyze(&oracle, opts)?;
                Ok(report_with_seed(&report, cli.seed))
            }
        }
        Command::Value {
            p,
            minpoly,
            branch,
            expr,
            immediate_depth,
            precision,
        } => {
            let f = parse_minpoly(minpoly)?;
            let g = parse_poly(expr)?;
            let policy = precision_policy(*precision);
            let oracle = BranchOracle::new(*p, f.clone(), branch.unwrap_or(0), policy)?;
            let report = analyze(
                &oracle,
                AnalyzeOptions {
                    immediate_depth: *immediate_depth,
                },
            )?;
            let value = value_adaptive(&oracle, &report, &g)?;
            Ok(json!({
                "prime": p,
                "minpoly": f.to_string(),
                "branch": report.branch,
                "expr": g.to_string(),
                "value": value_json(&value),
                "seed": cli.seed,
            }))
        }
        Command::Digits { p, poly, root, n } => {
            let g = parse_poly(poly)?;
            let lift = hensel_root(&g, *p, *root, *n)?;
            Ok(json!({
                "prime": p,
                "poly": g.to_string(),
                "root": root,
                "n": n,
                "digits": lift.digits,
                "partial_sums": lift
                    .partial_sums
                    .iter()
                    .map(|x| x.to_string())
                    .collect::<Vec<_>>(),
                "seed": cli.seed,
            }))
        }
        Command::Branches { p, minpoly } => {
            let f = parse_minpoly(minpoly)?;
            let groups = mod_p_groups(&f, *p)?;
            let field = FiniteField::prime(*p)?;
            let branches: Vec<Value> = groups
                .iter()
                .enumerate()
                .map(|(i, (pi, mult))| {
                    json!({
                        "index": i,
                        "residual": field.poly_to_string(pi),
                        "multiplicity": mult,
                        "local_degree": field.poly_degree(pi).unwrap_or(0) * *mult as usize,
                    })
                })
                .collect();
            Ok(json!({
                "prime": p,
                "minpoly": f.to_string(),
                "branches": branches,
                "seed": cli.seed,
            }))
        }
        Command::Selftest { verbose } => {
            let report = selftest::run_all(cli.seed);
            let mut doc = serde_json::to_value(&report).expect("selftest serialization");
            if *verbose {
                let f = selftest::fixture_minpoly();
                let policy = PrecisionPolicy::default();
                let oracle = BranchOracle::new(5, f, 0, policy)?;
                let analysis = analyze(&oracle, AnalyzeOptions { immediate_depth: 5 })?;
                let family = pseudo_cauchy_family(&oracle, &analysis, 2, 5)?;
                let family_json: Vec<Value> = family
                    .iter()
                    .map(|s| {
                        let (num, den) = rational_strings(&s.gamma);
                        json!({"phi": s.phi.to_string(), "gamma_num": num, "gamma_den": den})
                    })
                    .collect();
                doc.as_object_mut()
                    .unwrap()
                    .insert("five_adic_family".into(), json!(family_json));
            }
            Ok(doc)
        }
    }
}

fn main() {
    let cli = Cli::parse();
    match run(&cli) {
        Ok(doc) => {
            let rendered = if cli.pretty {
                serde_json::to_string_pretty(&doc).expect("render")
            } else {
                serde_json::to_string(&doc).expect("render")
            };
            println!("{rendered}");
            // selftest reports failures through the exit code
            if let Command::Selftest { .. } = cli.command {
                let failed = doc.get("failed").and_then(|f| f.as_u64()).unwrap_or(0);
                if failed > 0 {
                    std::process::exit(1);
                }
            }
        }
        Err(err) => {
            let doc = json!({
                "error": { "kind": err.kind, "message": err.message },
                "seed": cli.seed,
            });
            let rendered = if cli.pretty {
                serde_json::to_string_pretty(&doc).expect("render")
            } else {
                serde_json::to_string(&doc).expect("render")
            };
            println!("{rendered}");
            std::process::exit(err.code);
        }
    }
}
