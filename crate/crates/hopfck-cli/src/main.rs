//! Batch front end: trees | hopf | seq | lambda | classify | rge | golden.
//!
//! Deterministic given its flags (randomized characters require an explicit
//! --seed). Exit codes: 0 success, 1 domain error, 2 verification failure.

use std::collections::BTreeMap;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use serde_json::{json, Value};

use hopfck::classify::{self, FamilySpec};
use hopfck::elem::Elem;
use hopfck::error::Error;
use hopfck::lambda::{DiagonalOrder, LambdaArray};
use hopfck::rational::{format_q, parse_q, Q};
use hopfck::rge::{self, Char};
use hopfck::seq::{self, PowerSeries, Seq};
use hopfck::tree::{enumeration_bound, enumerate_trees, Tree};

mod golden;

#[derive(Parser)]
#[command(name = "hopfck", version, about = "Exact computations in the Hopf algebra of rooted trees")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Clone)]
struct Common {
    /// Truncation order (capped by HOPFCK_NMAX, default cap 10).
    #[arg(short = 'N', long = "order", default_value_t = 8)]
    n: usize,
    /// Emit JSON instead of text.
    #[arg(long)]
    json: bool,
    /// Seed for randomized characters.
    #[arg(long)]
    seed: Option<u64>,
    /// Family parameters as comma-separated key=value rationals,
    /// e.g. --params a=2,b=3/4.
    #[arg(long, value_parser = parse_params)]
    params: Option<Params>,
}

#[derive(Clone, Debug, Default)]
struct Params(BTreeMap<String, String>);

fn parse_params(s: &str) -> Result<Params, String> {
    let mut map = BTreeMap::new();
    for piece in s.split(',').filter(|p| !p.trim().is_empty()) {
        let (k, v) = piece
            .split_once('=')
            .ok_or_else(|| format!("expected key=value, found {piece:?}"))?;
        map.insert(k.trim().to_string(), v.trim().to_string());
    }
    Ok(Params(map))
}

impl Params {
    fn rational(&self, key: &str, default: Option<&str>) -> Result<Q, Error> {
        match self.0.get(key).map(String::as_str).or(default) {
            Some(raw) => parse_q(raw),
            None => Err(Error::Precondition(format!("missing parameter {key:?}"))),
        }
    }

    fn integer(&self, key: &str, default: Option<usize>) -> Result<usize, Error> {
        match self.0.get(key) {
            Some(raw) => raw
                .parse()
                .map_err(|e| Error::Precondition(format!("bad integer {key}={raw:?}: {e}"))),
            None => default.ok_or_else(|| Error::Precondition(format!("missing parameter {key:?}"))),
        }
    }
}

#[derive(Subcommand)]
enum Command {
    /// Enumeration and statistics of canonical rooted trees.
    Trees {
        #[command(subcommand)]
        cmd: TreesCmd,
    },
    /// Hopf-algebra operations on elements.
    Hopf {
        #[command(subcommand)]
        cmd: HopfCmd,
    },
    /// Generator sequences.
    Seq {
        #[command(subcommand)]
        cmd: SeqCmd,
    },
    /// Structure-constant arrays.
    Lambda {
        #[command(subcommand)]
        cmd: LambdaCmd,
    },
    /// Family classification.
    Classify {
        #[command(subcommand)]
        cmd: ClassifyCmd,
    },
    /// Feynman rules, triangles, fits and residuals.
    Rge {
        #[command(subcommand)]
        cmd: RgeCmd,
    },
    /// Golden fixture regeneration.
    Golden {
        #[command(subcommand)]
        cmd: GoldenCmd,
    },
}

#[derive(Subcommand)]
enum TreesCmd {
    /// All canonical trees with n vertices.
    Enumerate {
        #[arg(short = 'n', long = "size")]
        size: usize,
        #[command(flatten)]
        common: Common,
    },
    /// Size, symmetry factor, tree factorial and cut count of one tree.
    Stats {
        #[arg(long)]
        tree: String,
        #[command(flatten)]
        common: Common,
    },
}

#[derive(Subcommand)]
enum HopfCmd {
    Coproduct {
        #[arg(long)]
        elem: String,
        #[command(flatten)]
        common: Common,
    },
    Antipode {
        #[arg(long)]
        elem: String,
        #[command(flatten)]
        common: Common,
    },
    Bplus {
        #[arg(long)]
        elem: String,
        #[command(flatten)]
        common: Common,
    },
    Growth {
        #[arg(long)]
        elem: String,
        #[command(flatten)]
        common: Common,
    },
    Product {
        #[arg(long)]
        left: String,
        #[arg(long)]
        right: String,
        #[command(flatten)]
        common: Common,
    },
    /// The pre-Lie graft of two elements.
    Graft {
        #[arg(long)]
        left: String,
        #[arg(long)]
        right: String,
        #[command(flatten)]
        common: Common,
    },
}

#[derive(Subcommand)]
enum SeqCmd {
    /// Construct a named family (see --family).
    Build {
        #[arg(long)]
        family: String,
        #[command(flatten)]
        common: Common,
    },
    /// Run the sub-Hopf membership check; exit 2 on failure.
    Verify {
        #[arg(long)]
        family: String,
        #[command(flatten)]
        common: Common,
    },
}

#[derive(Subcommand)]
enum LambdaCmd {
    /// Extract the array of a sequence family.
    Extract {
        #[arg(long)]
        family: String,
        #[command(flatten)]
        common: Common,
    },
    /// Rebuild the sequence of a named array.
    Reconstruct {
        #[arg(long)]
        array: String,
        #[command(flatten)]
        common: Common,
    },
    /// Pre-Lie violations of a named array; exit 2 if any.
    Prelie {
        #[arg(long)]
        array: String,
        #[command(flatten)]
        common: Common,
    },
    /// Per-diagonal orders and the strong verdict of a named array.
    Orders {
        #[arg(long)]
        array: String,
        #[command(flatten)]
        common: Common,
    },
    /// Whether constant outer diagonals of value c preserve the order.
    Homogeneity {
        #[arg(long)]
        array: String,
        #[arg(long, default_value = "1")]
        c: String,
        #[command(flatten)]
        common: Common,
    },
}

#[derive(Subcommand)]
enum ClassifyCmd {
    /// Match a named array against the classified families.
    Match {
        #[arg(long)]
        array: String,
        #[command(flatten)]
        common: Common,
    },
    /// Classify a 0-1 rightmost diagonal, e.g. --bits 1,1,0,1,1,0.
    Seq01 {
        #[arg(long)]
        bits: String,
        #[command(flatten)]
        common: Common,
    },
    /// Corolla-coefficient series of the B(m)/C(m) families, both routes.
    An {
        #[arg(short)]
        m: usize,
        #[arg(long, default_value_t = 8)]
        max_n: usize,
        #[command(flatten)]
        common: Common,
    },
}

#[derive(Subcommand)]
enum RgeCmd {
    /// The c-triangle of a family under a character.
    Triangle {
        #[arg(long)]
        family: String,
        #[arg(long, default_value = "generic")]
        sigma: String,
        #[command(flatten)]
        common: Common,
    },
    /// Fit an order-m system to the triangle; exit 2 on fit failure.
    Fit {
        #[arg(long)]
        family: String,
        #[arg(long, default_value = "generic")]
        sigma: String,
        #[arg(short)]
        m: i64,
        #[command(flatten)]
        common: Common,
    },
    /// Strong-order report plus a fitted system and residual at that order.
    Order {
        #[arg(long)]
        family: String,
        /// Corolla scaling exponent shortcut (same as --params k=...).
        #[arg(long)]
        k: Option<u32>,
        #[arg(long, default_value = "generic")]
        sigma: String,
        #[command(flatten)]
        common: Common,
    },
}

#[derive(Subcommand)]
enum GoldenCmd {
    /// Regenerate every golden fixture under the output directory.
    Regen {
        #[arg(long, default_value = "golden")]
        out: String,
    },
    /// Compare the fixtures on disk against freshly computed values;
    /// exit 2 on any mismatch.
    Check {
        #[arg(long, default_value = "golden")]
        dir: String,
    },
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(err) => {
            // help/version print and exit 0; usage errors are domain errors
            if err.use_stderr() {
                eprintln!("{err}");
                return ExitCode::from(1);
            }
            print!("{err}");
            return ExitCode::SUCCESS;
        }
    };
    match run(cli) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(1)
        }
    }
}

fn check_order(n: usize) -> Result<(), Error> {
    let max = enumeration_bound();
    if n > max {
        return Err(Error::BoundExceeded { n, max });
    }
    if n == 0 {
        return Err(Error::Precondition("order must be at least 1".into()));
    }
    Ok(())
}

/// Builds a sequence family by name.
fn build_seq(name: &str, common: &Common) -> Result<Seq, Error> {
    check_order(common.n)?;
    let n = common.n;
    let p = common.params.clone().unwrap_or_default();
    match name {
        "ladders" => Ok(seq::family_ladders(n)),
        "cm" => Ok(seq::family_cm(n)),
        "corollas" | "scaled-corolla" => {
            let k = p.integer("k", Some(0))? as u32;
            Ok(seq::family_corollas(k, n))
        }
        "binary" => seq::dse_solve(&PowerSeries::new(vec![parse_q("1")?, parse_q("2")?, parse_q("1")?]), n),
        "plane" => seq::dse_solve(&PowerSeries::geometric(n), n),
        "dse-ab" => {
            let a = p.rational("a", None)?;
            let b = p.rational("b", None)?;
            seq::family_dse_ab(&a, &b, n)
        }
        "zn" => {
            let m = p.integer("n", None)?;
            let b = p.rational("b", None)?;
            seq::family_zn(m, &b, n)
        }
        "abc" => {
            let a = p.rational("a", None)?;
            let b = p.rational("b", None)?;
            let c = p.rational("c", None)?;
            seq::family_abc(&a, &b, &c, n)
        }
        "prelie-ext-example" => {
            let base = Seq::new(
                vec![
                    Elem::from_tree(Tree::leaf()),
                    Elem::from_tree(Tree::ladder(2)),
                ],
                Some("ladder prefix".into()),
            )?;
            let x = Elem::parse("2 * o[o] + -1 * o*o")?;
            seq::family_prelie_ext(&base, &x, n)
        }
        "ladders-leaves" => {
            let a = p.rational("a", None)?;
            let b = p.rational("b", None)?;
            seq::family_ladders_with_leaves(&a, &b, n)
        }
        other => Err(Error::Precondition(format!(
            "unknown sequence family {other:?} (expected ladders, cm, corollas, \
             binary, plane, dse-ab, zn, abc, prelie-ext-example, ladders-leaves)"
        ))),
    }
}

/// Builds a named array.
fn build_array(name: &str, common: &Common) -> Result<LambdaArray, Error> {
    check_order(common.n)?;
    let n = common.n;
    let p = common.params.clone().unwrap_or_default();
    let spec = match name {
        "all-ones" => Some(FamilySpec::Ladders),
        "z" => Some(FamilySpec::Z {
            n: p.integer("n", None)?,
            b: p.rational("b", None)?,
        }),
        "case-a" => Some(FamilySpec::CaseA {
            a1: p.rational("a1", None)?,
            a2: p.rational("a2", None)?,
            b: p.rational("b", None)?,
        }),
        "case-b" => Some(FamilySpec::CaseB {
            a1: p.rational("a1", None)?,
            a2: p.rational("a2", None)?,
        }),
        "case-c" => Some(FamilySpec::CaseC {
            a1: p.rational("a1", None)?,
            a2: p.rational("a2", None)?,
        }),
        "case-d" => Some(FamilySpec::CaseD {
            a1: p.rational("a1", None)?,
            a2: p.rational("a2", None)?,
        }),
        "case-e" => Some(FamilySpec::CaseE {
            a1: p.rational("a1", None)?,
            b: p.rational("b", None)?,
        }),
        "scaled-corolla" => Some(FamilySpec::ScaledCorolla {
            k: p.integer("k", Some(1))? as u32,
        }),
        "seq01-all-ones" => Some(FamilySpec::Seq01AllOnes),
        "seq01-a" => Some(FamilySpec::Seq01A {
            m: p.integer("m", None)?,
        }),
        "seq01-b" => Some(FamilySpec::Seq01B {
            m: p.integer("m", None)?,
        }),
        "seq01-c" => Some(FamilySpec::Seq01C {
            m: p.integer("m", None)?,
        }),
        _ => None,
    };
    if let Some(spec) = spec {
        return classify::family_array(&spec, n);
    }
    match name {
        "cm-binomial" => Ok(LambdaArray::from_fn(n, |i, j| {
            Q::from_integer(hopfck::rational::binomial(i + j, j + 1))
        })),
        "ex-prelie" => {
            let s = build_seq("prelie-ext-example", common)?;
            LambdaArray::extract(&s)
        }
        other => {
            // fall back: extract from a sequence family of the same name
            let s = build_seq(other, common)?;
            LambdaArray::extract(&s)
        }
    }
}

fn build_sigma(kind: &str, seed: Option<u64>, window: usize) -> Result<Char, Error> {
    match kind {
        "generic" => Char::generic(window),
        "treefact" => Ok(Char::tree_factorial_rules(window)),
        "zero" => Ok(Char::new(window)),
        "random" => {
            let seed = seed.ok_or_else(|| {
                Error::Precondition("--sigma random needs an explicit --seed".into())
            })?;
            Char::random(seed, window)
        }
        other => Err(Error::Precondition(format!(
            "unknown character kind {other:?} (expected generic, treefact, zero, random)"
        ))),
    }
}

fn emit(json_mode: bool, value: Value, text: String) {
    if json_mode {
        println!("{}", serde_json::to_string_pretty(&value).unwrap());
    } else {
        println!("{text}");
    }
}

fn run(cli: Cli) -> Result<ExitCode, Error> {
    match cli.command {
        Command::Trees { cmd } => match cmd {
            TreesCmd::Enumerate { size, common } => {
                check_order(size)?;
                let trees = enumerate_trees(size)?;
                let text = trees
                    .iter()
                    .map(|t| t.repr().to_string())
                    .collect::<Vec<_>>()
                    .join("\n");
                let value = Value::Array(trees.iter().map(tree_to_nested_json).collect());
                emit(common.json, value, text);
                Ok(ExitCode::SUCCESS)
            }
            TreesCmd::Stats { tree, common } => {
                let t = Tree::parse(&tree)?;
                let value = json!({
                    "tree": t.repr(),
                    "size": t.size(),
                    "symmetry_factor": t.symmetry_factor().to_string(),
                    "tree_factorial": t.tree_factorial().to_string(),
                    "admissible_cuts": t.admissible_cuts().len(),
                });
                let text = format!(
                    "tree: {}\nsize: {}\nsymmetry factor: {}\ntree factorial: {}\nadmissible cuts: {}",
                    t.repr(),
                    t.size(),
                    t.symmetry_factor(),
                    t.tree_factorial(),
                    t.admissible_cuts().len()
                );
                emit(common.json, value, text);
                Ok(ExitCode::SUCCESS)
            }
        },
        Command::Hopf { cmd } => {
            let unary = |raw: &str, f: fn(&Elem) -> Elem, common: &Common| -> Result<ExitCode, Error> {
                let x = Elem::parse(raw)?;
                let y = f(&x);
                emit(common.json, y.to_json(), y.to_string());
                Ok(ExitCode::SUCCESS)
            };
            match cmd {
                HopfCmd::Coproduct { elem, common } => {
                    let x = Elem::parse(&elem)?;
                    let d = hopfck::hopf::coproduct(&x);
                    emit(common.json, d.to_json(), d.to_string());
                    Ok(ExitCode::SUCCESS)
                }
                HopfCmd::Antipode { elem, common } => unary(&elem, hopfck::hopf::antipode, &common),
                HopfCmd::Bplus { elem, common } => unary(&elem, hopfck::hopf::bplus, &common),
                HopfCmd::Growth { elem, common } => unary(&elem, hopfck::hopf::growth, &common),
                HopfCmd::Product { left, right, common } => {
                    let x = Elem::parse(&left)?.mul(&Elem::parse(&right)?);
                    emit(common.json, x.to_json(), x.to_string());
                    Ok(ExitCode::SUCCESS)
                }
                HopfCmd::Graft { left, right, common } => {
                    let x = hopfck::hopf::prelie_graft(&Elem::parse(&left)?, &Elem::parse(&right)?);
                    emit(common.json, x.to_json(), x.to_string());
                    Ok(ExitCode::SUCCESS)
                }
            }
        }
        Command::Seq { cmd } => match cmd {
            SeqCmd::Build { family, common } => {
                let s = build_seq(&family, &common)?;
                emit(common.json, s.to_json(), s.to_text());
                Ok(ExitCode::SUCCESS)
            }
            SeqCmd::Verify { family, common } => {
                let s = build_seq(&family, &common)?;
                let report = seq::verify_subhopf(&s);
                match report.failure {
                    None => {
                        emit(
                            common.json,
                            json!({"ok": true}),
                            format!("sub-Hopf check passed through degree {}", s.order()),
                        );
                        Ok(ExitCode::SUCCESS)
                    }
                    Some(f) => {
                        emit(
                            common.json,
                            json!({
                                "ok": false,
                                "degree": f.degree,
                                "bidegree": [f.bidegree.0, f.bidegree.1],
                                "offending_block": f.offending_block.to_json(),
                            }),
                            format!(
                                "sub-Hopf check FAILED at degree {}, bidegree ({}, {})",
                                f.degree, f.bidegree.0, f.bidegree.1
                            ),
                        );
                        Ok(ExitCode::from(2))
                    }
                }
            }
        },
        Command::Lambda { cmd } => match cmd {
            LambdaCmd::Extract { family, common } => {
                let s = build_seq(&family, &common)?;
                let lam = LambdaArray::extract(&s)?;
                emit(common.json, lam.to_json(), lam.to_text_triangle());
                Ok(ExitCode::SUCCESS)
            }
            LambdaCmd::Reconstruct { array, common } => {
                let lam = build_array(&array, &common)?;
                let s = lam.reconstruct(common.n)?;
                emit(common.json, s.to_json(), s.to_text());
                Ok(ExitCode::SUCCESS)
            }
            LambdaCmd::Prelie { array, common } => {
                let lam = build_array(&array, &common)?;
                let bad = lam.check_prelie();
                let ok = bad.is_empty();
                emit(
                    common.json,
                    json!({"ok": ok, "violations": bad.iter().map(|(i, j, k)| json!([i, j, k])).collect::<Vec<_>>()}),
                    if ok {
                        "pre-Lie relation holds on the window".to_string()
                    } else {
                        format!("pre-Lie violations at {bad:?}")
                    },
                );
                Ok(if ok { ExitCode::SUCCESS } else { ExitCode::from(2) })
            }
            LambdaCmd::Orders { array, common } => {
                let lam = build_array(&array, &common)?;
                let report = lam.strong_order();
                emit(common.json, order_report_json(&report), order_report_text(&report));
                Ok(ExitCode::SUCCESS)
            }
            LambdaCmd::Homogeneity { array, c, common } => {
                let lam = build_array(&array, &common)?;
                let c = parse_q(&c)?;
                let verdict = lam.homogeneity_check(&c);
                emit(
                    common.json,
                    json!({"c": format_q(&c), "homogeneous": verdict}),
                    format!(
                        "outer diagonals of value {}: order {}",
                        format_q(&c),
                        if verdict { "preserved (homogeneous)" } else { "not preserved" }
                    ),
                );
                Ok(ExitCode::SUCCESS)
            }
        },
        Command::Classify { cmd } => match cmd {
            ClassifyCmd::Match { array, common } => {
                let lam = build_array(&array, &common)?;
                let result = classify::match_family(&lam)?;
                let text = match &result.matched {
                    Some(spec) => format!("matched: {spec}"),
                    None => "no classified family matches the window".to_string(),
                };
                emit(common.json, result.to_json(), text);
                Ok(ExitCode::SUCCESS)
            }
            ClassifyCmd::Seq01 { bits, common } => {
                let parsed: Result<Vec<bool>, Error> = bits
                    .split(',')
                    .map(|p| match p.trim() {
                        "0" => Ok(false),
                        "1" => Ok(true),
                        other => Err(Error::Precondition(format!("bad bit {other:?}"))),
                    })
                    .collect();
                let verdict = classify::seq01_classify(&parsed?)?;
                let text = match &verdict {
                    classify::Seq01Class::Variant(v) => format!("variant: {v}"),
                    classify::Seq01Class::Ambiguous(vs) => format!(
                        "ambiguous on this window: {}",
                        vs.iter().map(ToString::to_string).collect::<Vec<_>>().join(", ")
                    ),
                    classify::Seq01Class::Invalid => "invalid: no classified shape fits".to_string(),
                };
                emit(common.json, json!({"verdict": text}), text.clone());
                Ok(ExitCode::SUCCESS)
            }
            ClassifyCmd::An { m, max_n, common } => {
                let mut rows = Vec::new();
                let mut text = String::new();
                for n in 0..=max_n {
                    let direct = classify::seq01_an(m, n);
                    let cyc = classify::seq01_an_via_cycle_index(m, n);
                    text.push_str(&format!(
                        "a_{n} = {} (series) = {} (cycle index)\n",
                        format_q(&direct),
                        format_q(&cyc)
                    ));
                    rows.push(json!({"n": n, "series": format_q(&direct), "cycle_index": format_q(&cyc)}));
                }
                emit(common.json, Value::Array(rows), text.trim_end().to_string());
                Ok(ExitCode::SUCCESS)
            }
        },
        Command::Rge { cmd } => match cmd {
            RgeCmd::Triangle { family, sigma, common } => {
                let s = build_seq(&family, &common)?;
                let sig = build_sigma(&sigma, common.seed, common.n)?;
                let tri = rge::c_triangle(&s, &sig)?;
                let mut text = String::new();
                for n in 1..=tri.nmax() {
                    let row: Vec<String> = (0..n).rev().map(|i| format_q(&tri.get(n, i))).collect();
                    text.push_str(&format!("n={n}: {}\n", row.join(" ")));
                }
                text.push_str(&format!("oracle checked: {}", tri.oracle_checked));
                emit(
                    common.json,
                    json!({"triangle": tri.to_json(), "oracle_checked": tri.oracle_checked}),
                    text,
                );
                Ok(ExitCode::SUCCESS)
            }
            RgeCmd::Fit { family, sigma, m, common } => {
                let s = build_seq(&family, &common)?;
                let sig = build_sigma(&sigma, common.seed, common.n)?;
                let tri = rge::c_triangle(&s, &sig)?;
                match rge::fit_beta(&tri, m) {
                    Ok(bs) => {
                        let g = rge::green_function(&sig, &s)?;
                        let residuals = rge::grge_residual(&g, &bs);
                        let residual_zero = residuals.iter().all(|r| r.is_zero());
                        emit(
                            common.json,
                            json!({
                                "system": bs.to_json(),
                                "gamma0_zero": bs.gamma0_is_zero(),
                                "residual_zero": residual_zero,
                            }),
                            format!(
                                "order-{m} fit succeeded; gamma0 {}; residual {}",
                                if bs.gamma0_is_zero() { "= 0" } else { "!= 0" },
                                if residual_zero { "= 0" } else { "!= 0" }
                            ),
                        );
                        Ok(ExitCode::SUCCESS)
                    }
                    Err(f) => {
                        emit(
                            common.json,
                            json!({"fit_failed_at": [f.witness.0, f.witness.1]}),
                            format!(
                                "order-{m} fit FAILED at triangle entry (n, i) = ({}, {})",
                                f.witness.0, f.witness.1
                            ),
                        );
                        Ok(ExitCode::from(2))
                    }
                }
            }
            RgeCmd::Order { family, k, sigma, mut common } => {
                if let Some(k) = k {
                    let mut p = common.params.clone().unwrap_or_default();
                    p.0.insert("k".into(), k.to_string());
                    common.params = Some(p);
                }
                let s = build_seq(&family, &common)?;
                let lam = LambdaArray::extract(&s)?;
                let report = lam.strong_order();
                let sig = build_sigma(&sigma, common.seed, common.n)?;
                let tri = rge::c_triangle(&s, &sig)?;
                let mut text = order_report_text(&report);
                let mut fit_json = Value::Null;
                if let Some(m) = report.strong {
                    match rge::fit_beta(&tri, m as i64) {
                        Ok(bs) => {
                            let g = rge::green_function(&sig, &s)?;
                            let ok = rge::grge_residual(&g, &bs).iter().all(|r| r.is_zero());
                            text.push_str(&format!(
                                "\nfitted order {m}: residual {}; gamma0 {}",
                                if ok { "= 0" } else { "!= 0" },
                                if bs.gamma0_is_zero() { "= 0" } else { "!= 0" }
                            ));
                            fit_json = json!({
                                "system": bs.to_json(),
                                "gamma0_zero": bs.gamma0_is_zero(),
                                "residual_zero": ok,
                            });
                        }
                        Err(f) => {
                            text.push_str(&format!(
                                "\nfit at the strong order unexpectedly failed at {:?}",
                                f.witness
                            ));
                        }
                    }
                }
                emit(
                    common.json,
                    json!({"orders": order_report_json(&report), "fit": fit_json}),
                    text,
                );
                Ok(ExitCode::SUCCESS)
            }
        },
        Command::Golden { cmd } => match cmd {
            GoldenCmd::Regen { out } => {
                golden::regen(&out)?;
                println!("golden fixtures written under {out}/");
                Ok(ExitCode::SUCCESS)
            }
            GoldenCmd::Check { dir } => {
                let bad = golden::check(&dir)?;
                if bad.is_empty() {
                    println!("golden fixtures match");
                    Ok(ExitCode::SUCCESS)
                } else {
                    println!("fixtures out of date: {}", bad.join(", "));
                    Ok(ExitCode::from(2))
                }
            }
        },
    }
}

fn tree_to_nested_json(t: &Tree) -> Value {
    Value::Array(t.children().iter().map(tree_to_nested_json).collect())
}

fn order_report_json(report: &hopfck::lambda::OrderReport) -> Value {
    let mut diag = serde_json::Map::new();
    for (j, order) in &report.per_diagonal {
        let v = match order {
            DiagonalOrder::Order { k, identically_zero } => {
                json!({"order": k, "identically_zero": identically_zero})
            }
            DiagonalOrder::Undetermined => json!("undetermined"),
        };
        diag.insert(j.to_string(), v);
    }
    json!({
        "per_diagonal": Value::Object(diag),
        "strong": report.strong,
        "leftmost_exact": report.leftmost_exact,
    })
}

fn order_report_text(report: &hopfck::lambda::OrderReport) -> String {
    let mut text = String::new();
    for (j, order) in &report.per_diagonal {
        let desc = match order {
            DiagonalOrder::Order { k, identically_zero: true } => format!("order {k} (identically zero)"),
            DiagonalOrder::Order { k, .. } => format!("order {k}"),
            DiagonalOrder::Undetermined => "undetermined (window too short)".to_string(),
        };
        text.push_str(&format!("diagonal j={j}: {desc}\n"));
    }
    match report.strong {
        Some(k) => text.push_str(&format!("strong order: {k} (leftmost exact)")),
        None => text.push_str("strong order: none on this window"),
    }
    text
}
