//! Constructors and matchers for the classified families: the 0th-order
//! families (ladders and the one-deformed-diagonal arrays), the five
//! first-order cases, scaled corollas for order two and up, and the
//! weak 0-1 families with their corolla-coefficient generating series.

use std::fmt;

use num_traits::{One, Zero};
use serde_json::{json, Value};

use crate::error::{Error, Result};
use crate::lambda::LambdaArray;
use crate::rational::{binomial_q, exact_log2, format_q, parse_q, q, qr, Q};
use crate::seq::Seq;
use crate::tree::Tree;

/// A classified family with its parameters.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum FamilySpec {
    Ladders,
    Z { n: usize, b: Q },
    CaseA { a1: Q, a2: Q, b: Q },
    CaseB { a1: Q, a2: Q },
    CaseC { a1: Q, a2: Q },
    CaseD { a1: Q, a2: Q },
    CaseE { a1: Q, b: Q },
    ScaledCorolla { k: u32 },
    Seq01AllOnes,
    Seq01A { m: usize },
    Seq01B { m: usize },
    Seq01C { m: usize },
}

impl FamilySpec {
    /// Parameter-domain validation.
    pub fn validate(&self) -> Result<()> {
        let fail = |msg: String| Err(Error::Degenerate(msg));
        match self {
            FamilySpec::Ladders | FamilySpec::Seq01AllOnes | FamilySpec::ScaledCorolla { .. } => {
                Ok(())
            }
            FamilySpec::Z { n, b } => {
                if *n == 0 {
                    return fail("Z index must be at least 1".into());
                }
                if b.is_zero() {
                    return fail("Z requires b != 0".into());
                }
                Ok(())
            }
            FamilySpec::CaseA { a1, .. }
            | FamilySpec::CaseB { a1, .. }
            | FamilySpec::CaseC { a1, .. }
            | FamilySpec::CaseD { a1, .. }
            | FamilySpec::CaseE { a1, .. } => {
                if a1.is_zero() {
                    return fail("first-order cases require a1 != 0".into());
                }
                Ok(())
            }
            FamilySpec::Seq01A { m } | FamilySpec::Seq01B { m } | FamilySpec::Seq01C { m } => {
                if *m < 2 {
                    return fail("0-1 variants require m >= 2".into());
                }
                Ok(())
            }
        }
    }

    /// The array entry at `(i, j)`; `Err(ZeroDenominator)` where the case
    /// formula degenerates.
    pub fn entry(&self, i: usize, j: usize) -> Result<Q> {
        let iq = q(i as i64);
        let jq = q(j as i64);
        Ok(match self {
            FamilySpec::Ladders | FamilySpec::Seq01AllOnes => Q::one(),
            FamilySpec::Z { n, b } => {
                if j < *n {
                    Q::one()
                } else if j == *n {
                    b.clone()
                } else {
                    Q::zero()
                }
            }
            FamilySpec::CaseA { a1, a2, b } => match j {
                1 => a1 * &iq + b,
                2 => a2 * &iq + b,
                _ => {
                    let den = q(j as i64 - 1) * a1 - q(j as i64 - 2) * a2;
                    if den.is_zero() {
                        return Err(Error::ZeroDenominator { j });
                    }
                    a1 * a2 * &iq / den + b
                }
            },
            FamilySpec::CaseB { a1, a2 } => {
                let a = if j == 2 { a2 } else { a1 };
                a * (&iq - q(2))
            }
            FamilySpec::CaseC { a1, a2 } => match j {
                1 => a1 * (&iq + q(2)),
                2 => a2 * (&iq + q(4)),
                _ => {
                    let j1 = j as i64;
                    let den = qr((j1 - 1) * j1 * (j1 + 1), 6) * a1
                        - qr((j1 - 2) * j1 * (j1 + 2), 3) * a2;
                    if den.is_zero() {
                        return Err(Error::ZeroDenominator { j });
                    }
                    a1 * a2 * (q(2) * &jq + &iq) / den
                }
            },
            FamilySpec::CaseD { a1, a2 } => match j {
                1 => a1 * (&iq + Q::one()),
                2 => a2 * (&iq + q(2)),
                _ => {
                    let j1 = j as i64;
                    let den = qr((j1 - 1) * j1, 2) * a1 - q((j1 - 2) * j1) * a2;
                    if den.is_zero() {
                        return Err(Error::ZeroDenominator { j });
                    }
                    a1 * a2 * (&iq + &jq) / den
                }
            },
            FamilySpec::CaseE { a1, b } => {
                if j == 1 {
                    a1 * &iq + b
                } else {
                    Q::zero()
                }
            }
            FamilySpec::ScaledCorolla { k } => {
                if j == 1 {
                    let mut acc = iq;
                    for _ in 0..*k {
                        acc *= q(i as i64 + 1);
                    }
                    acc
                } else {
                    Q::zero()
                }
            }
            FamilySpec::Seq01A { m } => {
                if j < *m {
                    Q::one()
                } else {
                    Q::zero()
                }
            }
            FamilySpec::Seq01B { m } => {
                if j.is_multiple_of(*m) {
                    Q::one() - iq
                } else {
                    Q::one()
                }
            }
            FamilySpec::Seq01C { m } => {
                if j == *m {
                    Q::one() - iq
                } else {
                    Q::one()
                }
            }
        })
    }

    pub fn kind_name(&self) -> &'static str {
        match self {
            FamilySpec::Ladders => "ladders",
            FamilySpec::Z { .. } => "z",
            FamilySpec::CaseA { .. } => "case-a",
            FamilySpec::CaseB { .. } => "case-b",
            FamilySpec::CaseC { .. } => "case-c",
            FamilySpec::CaseD { .. } => "case-d",
            FamilySpec::CaseE { .. } => "case-e",
            FamilySpec::ScaledCorolla { .. } => "scaled-corolla",
            FamilySpec::Seq01AllOnes => "seq01-all-ones",
            FamilySpec::Seq01A { .. } => "seq01-a",
            FamilySpec::Seq01B { .. } => "seq01-b",
            FamilySpec::Seq01C { .. } => "seq01-c",
        }
    }

    /// Tagged JSON `{kind, params}`.
    pub fn to_json(&self) -> Value {
        let params = match self {
            FamilySpec::Ladders | FamilySpec::Seq01AllOnes => json!({}),
            FamilySpec::Z { n, b } => json!({"n": n, "b": format_q(b)}),
            FamilySpec::CaseA { a1, a2, b } => {
                json!({"a1": format_q(a1), "a2": format_q(a2), "b": format_q(b)})
            }
            FamilySpec::CaseB { a1, a2 }
            | FamilySpec::CaseC { a1, a2 }
            | FamilySpec::CaseD { a1, a2 } => {
                json!({"a1": format_q(a1), "a2": format_q(a2)})
            }
            FamilySpec::CaseE { a1, b } => json!({"a1": format_q(a1), "b": format_q(b)}),
            FamilySpec::ScaledCorolla { k } => json!({"k": k}),
            FamilySpec::Seq01A { m } | FamilySpec::Seq01B { m } | FamilySpec::Seq01C { m } => {
                json!({"m": m})
            }
        };
        json!({"kind": self.kind_name(), "params": params})
    }

    pub fn from_json(v: &Value) -> Result<FamilySpec> {
        let bad = |msg: &str| Error::Parse {
            pos: 0,
            msg: msg.to_string(),
        };
        let kind = v
            .get("kind")
            .and_then(Value::as_str)
            .ok_or_else(|| bad("family JSON needs a \"kind\""))?;
        let params = v.get("params").cloned().unwrap_or_else(|| json!({}));
        let get_q = |name: &str| -> Result<Q> {
            parse_q(
                params
                    .get(name)
                    .and_then(Value::as_str)
                    .ok_or_else(|| bad(&format!("missing rational param {name:?}")))?,
            )
        };
        let get_usize = |name: &str| -> Result<usize> {
            params
                .get(name)
                .and_then(Value::as_u64)
                .map(|x| x as usize)
                .ok_or_else(|| bad(&format!("missing integer param {name:?}")))
        };
        let spec = match kind {
            "ladders" => FamilySpec::Ladders,
            "z" => FamilySpec::Z {
                n: get_usize("n")?,
                b: get_q("b")?,
            },
            "case-a" => FamilySpec::CaseA {
                a1: get_q("a1")?,
                a2: get_q("a2")?,
                b: get_q("b")?,
            },
            "case-b" => FamilySpec::CaseB {
                a1: get_q("a1")?,
                a2: get_q("a2")?,
            },
            "case-c" => FamilySpec::CaseC {
                a1: get_q("a1")?,
                a2: get_q("a2")?,
            },
            "case-d" => FamilySpec::CaseD {
                a1: get_q("a1")?,
                a2: get_q("a2")?,
            },
            "case-e" => FamilySpec::CaseE {
                a1: get_q("a1")?,
                b: get_q("b")?,
            },
            "scaled-corolla" => FamilySpec::ScaledCorolla {
                k: get_usize("k")? as u32,
            },
            "seq01-all-ones" => FamilySpec::Seq01AllOnes,
            "seq01-a" => FamilySpec::Seq01A { m: get_usize("m")? },
            "seq01-b" => FamilySpec::Seq01B { m: get_usize("m")? },
            "seq01-c" => FamilySpec::Seq01C { m: get_usize("m")? },
            other => return Err(bad(&format!("unknown family kind {other:?}"))),
        };
        spec.validate()?;
        Ok(spec)
    }
}

impl fmt::Display for FamilySpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            FamilySpec::Ladders => write!(f, "ladders"),
            FamilySpec::Z { n, b } => write!(f, "Z({n}, {})", format_q(b)),
            FamilySpec::CaseA { a1, a2, b } => write!(
                f,
                "CaseA({}, {}, {})",
                format_q(a1),
                format_q(a2),
                format_q(b)
            ),
            FamilySpec::CaseB { a1, a2 } => {
                write!(f, "CaseB({}, {})", format_q(a1), format_q(a2))
            }
            FamilySpec::CaseC { a1, a2 } => {
                write!(f, "CaseC({}, {})", format_q(a1), format_q(a2))
            }
            FamilySpec::CaseD { a1, a2 } => {
                write!(f, "CaseD({}, {})", format_q(a1), format_q(a2))
            }
            FamilySpec::CaseE { a1, b } => {
                write!(f, "CaseE({}, {})", format_q(a1), format_q(b))
            }
            FamilySpec::ScaledCorolla { k } => write!(f, "ScaledCorolla({k})"),
            FamilySpec::Seq01AllOnes => write!(f, "Seq01AllOnes"),
            FamilySpec::Seq01A { m } => write!(f, "Seq01A({m})"),
            FamilySpec::Seq01B { m } => write!(f, "Seq01B({m})"),
            FamilySpec::Seq01C { m } => write!(f, "Seq01C({m})"),
        }
    }
}

/// Fills the window with the exact case formula.
pub fn family_array(spec: &FamilySpec, n: usize) -> Result<LambdaArray> {
    spec.validate()?;
    let mut rows: Vec<Vec<Q>> = Vec::new();
    for total in 2..=n {
        let mut row = Vec::with_capacity(total - 1);
        for j in 1..total {
            row.push(spec.entry(total - j, j)?);
        }
        rows.push(row);
    }
    LambdaArray::from_rows(&rows)
}

/// One attempted family during matching, with its first mismatch if any.
#[derive(Clone, Debug)]
pub struct MatchAttempt {
    pub spec: FamilySpec,
    pub failure_witness: Option<(usize, usize)>,
}

/// Result of `match_family`: the first family whose formula reproduces
/// every window entry, with the full attempt log as certificate.
#[derive(Clone, Debug)]
pub struct MatchResult {
    pub matched: Option<FamilySpec>,
    /// Number of window entries each successful check covered.
    pub entries_checked: usize,
    pub attempts: Vec<MatchAttempt>,
}

impl MatchResult {
    pub fn to_json(&self) -> Value {
        json!({
            "matched": self.matched.as_ref().map(FamilySpec::to_json),
            "entries_checked": self.entries_checked,
            "attempts": Value::Array(self.attempts.iter().map(|a| json!({
                "spec": a.spec.to_json(),
                "failure_witness": a.failure_witness.map(|(i, j)| json!([i, j])),
            })).collect()),
        })
    }
}

/// First `(i, j)` where the array deviates from the family's formula.
fn window_mismatch(a: &LambdaArray, spec: &FamilySpec) -> Option<(usize, usize)> {
    let n = a.window();
    for total in 2..=n {
        for j in 1..total {
            let i = total - j;
            let expect = match spec.entry(i, j) {
                Ok(v) => v,
                Err(_) => return Some((i, j)),
            };
            if a.get(i, j).unwrap() != expect {
                return Some((i, j));
            }
        }
    }
    None
}

/// Tries the classified families in order (0th order, first-order cases A-E,
/// scaled corollas, then the 0-1 variants) and returns the first exact
/// window match. Parameters are read off `lambda[1][1]`, `lambda[2][1]`,
/// `lambda[1][2]` and the rightmost diagonal.
pub fn match_family(a: &LambdaArray) -> Result<MatchResult> {
    if a.window() < 6 {
        return Err(Error::Precondition(
            "family matching needs window at least 6".into(),
        ));
    }
    let mut attempts = Vec::new();
    let entries_checked = (a.window() - 1) * a.window() / 2;
    let l11 = a.get(1, 1)?;
    let l21 = a.get(2, 1)?;
    let l12 = a.get(1, 2)?;

    let mut candidates: Vec<FamilySpec> = Vec::new();
    candidates.push(FamilySpec::Ladders);
    // deformed-diagonal 0th order: n = first j with lambda[1][j] != 1
    if let Some(n) = (1..a.window()).find(|&j| !a.get(1, j).unwrap().is_one()) {
        let b = a.get(1, n)?;
        if !b.is_zero() {
            candidates.push(FamilySpec::Z { n, b });
        }
    }
    // first-order cases, parameters from the minimal prefix
    let a1 = &l21 - &l11;
    if !a1.is_zero() {
        let b = &l11 - &a1;
        let a2_a = &l12 - &b;
        candidates.push(FamilySpec::CaseA {
            a1: a1.clone(),
            a2: a2_a,
            b,
        });
        let l22 = a.get(2, 2)?;
        let a2_slope = &l22 - &l12;
        candidates.push(FamilySpec::CaseB {
            a1: a1.clone(),
            a2: a2_slope.clone(),
        });
        candidates.push(FamilySpec::CaseC {
            a1: a1.clone(),
            a2: a2_slope.clone(),
        });
        candidates.push(FamilySpec::CaseD {
            a1: a1.clone(),
            a2: a2_slope,
        });
        candidates.push(FamilySpec::CaseE {
            a1: a1.clone(),
            b: &l11 - &a1,
        });
    }
    // scaled corollas: lambda[1][1] = 2^k
    if let Some(k) = exact_log2(&l11) {
        candidates.push(FamilySpec::ScaledCorolla { k });
    }
    // 0-1 variants: rightmost diagonal bits
    let bits: Option<Vec<bool>> = (1..a.window())
        .map(|j| {
            let v = a.get(1, j).unwrap();
            if v.is_one() {
                Some(true)
            } else if v.is_zero() {
                Some(false)
            } else {
                None
            }
        })
        .collect();
    if let Some(bits) = bits {
        if let Some(first_zero) = bits.iter().position(|&x| !x) {
            let m = first_zero + 1;
            if m >= 2 {
                candidates.push(FamilySpec::Seq01A { m });
                candidates.push(FamilySpec::Seq01B { m });
                candidates.push(FamilySpec::Seq01C { m });
            }
        } else {
            candidates.push(FamilySpec::Seq01AllOnes);
        }
    }

    let mut matched = None;
    for spec in candidates {
        if spec.validate().is_err() {
            continue;
        }
        let witness = window_mismatch(a, &spec);
        attempts.push(MatchAttempt {
            spec: spec.clone(),
            failure_witness: witness,
        });
        if witness.is_none() {
            matched = Some(spec);
            break;
        }
    }
    Ok(MatchResult {
        matched,
        entries_checked,
        attempts,
    })
}

// ---------------------------------------------------------------------------
// 0-1 sequences
// ---------------------------------------------------------------------------

/// The shape of a 0-1 rightmost diagonal.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Seq01Variant {
    AllOnes,
    A(usize),
    B(usize),
    C(usize),
}

impl fmt::Display for Seq01Variant {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Seq01Variant::AllOnes => write!(f, "all-ones"),
            Seq01Variant::A(m) => write!(f, "A({m})"),
            Seq01Variant::B(m) => write!(f, "B({m})"),
            Seq01Variant::C(m) => write!(f, "C({m})"),
        }
    }
}

/// Verdict of `seq01_classify` on a finite window.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Seq01Class {
    Variant(Seq01Variant),
    /// The window is too short to separate the listed candidates.
    Ambiguous(Vec<Seq01Variant>),
    /// No classified shape fits the window.
    Invalid,
}

/// Decides which classified 0-1 shape the bits `x_1..x_M` agree with.
pub fn seq01_classify(bits: &[bool]) -> Result<Seq01Class> {
    if bits.first() != Some(&true) {
        return Err(Error::Precondition("x_1 must be 1".into()));
    }
    let expected = |variant: &Seq01Variant, j: usize| -> bool {
        match variant {
            Seq01Variant::AllOnes => true,
            Seq01Variant::A(m) => j < *m,
            Seq01Variant::B(m) => !j.is_multiple_of(*m),
            Seq01Variant::C(m) => j != *m,
        }
    };
    let mut candidates = vec![Seq01Variant::AllOnes];
    if let Some(first_zero) = bits.iter().position(|&x| !x) {
        let m = first_zero + 1;
        candidates = vec![Seq01Variant::A(m), Seq01Variant::B(m), Seq01Variant::C(m)];
    }
    let consistent: Vec<Seq01Variant> = candidates
        .into_iter()
        .filter(|v| bits.iter().enumerate().all(|(k, &x)| x == expected(v, k + 1)))
        .collect();
    Ok(match consistent.len() {
        0 => Seq01Class::Invalid,
        1 => Seq01Class::Variant(consistent.into_iter().next().unwrap()),
        _ => Seq01Class::Ambiguous(consistent),
    })
}

/// Coefficient of `X^n` in `G(X) = (1+X) / (1 - (-X)^m)^{1/m}` by direct
/// rational binomial-series expansion.
pub fn seq01_an(m: usize, n: usize) -> Q {
    assert!(m >= 2);
    // (1 - Y)^{-1/m} = sum_k C(1/m + k - 1, k) Y^k with Y = (-X)^m
    let h = |k: usize| -> Q {
        let e = qr(1, m as i64) + q(k as i64 - 1);
        // C(1/m + k - 1, k)
        let mut acc = binomial_q(&e, k);
        if !(m * k).is_multiple_of(2) {
            acc = -acc;
        }
        acc
    };
    let mut out = Q::zero();
    if n.is_multiple_of(m) {
        out += h(n / m);
    }
    if n >= 1 && (n - 1).is_multiple_of(m) {
        out += h((n - 1) / m);
    }
    out
}

/// The same coefficient via the cycle-index formula: for `m | n` it is the
/// cycle index of the symmetric group evaluated at `X_i = (-1)^i` for
/// `m | i` and 0 otherwise; the `(1+X)` factor shifts it to `n` with
/// `m | n - 1`; all other coefficients vanish.
pub fn seq01_an_via_cycle_index(m: usize, n: usize) -> Q {
    assert!(m >= 2);
    if n == 0 {
        return Q::one();
    }
    if n.is_multiple_of(m) {
        cycle_index_eval(n, |i| {
            if i.is_multiple_of(m) {
                if i.is_multiple_of(2) {
                    Q::one()
                } else {
                    -Q::one()
                }
            } else {
                Q::zero()
            }
        })
    } else if (n - 1).is_multiple_of(m) {
        seq01_an_via_cycle_index(m, n - 1)
    } else {
        Q::zero()
    }
}

/// `Z(S_n)` evaluated at `X_i = weight(i)`: the partition sum
/// `sum 1/(prod i^{m_i} m_i!) prod weight(i)^{m_i}`.
pub fn cycle_index_eval(n: usize, weight: impl Fn(usize) -> Q) -> Q {
    let mut total = Q::zero();
    let mut parts: Vec<usize> = Vec::new();
    fn rec(
        remaining: usize,
        max_part: usize,
        parts: &mut Vec<usize>,
        weight: &impl Fn(usize) -> Q,
        total: &mut Q,
    ) {
        if remaining == 0 {
            // 1/(part^mult mult!) prod weight(part)^mult per distinct part
            let mut term = Q::one();
            let mut idx = 0;
            while idx < parts.len() {
                let part = parts[idx];
                let mut mult = 0usize;
                while idx < parts.len() && parts[idx] == part {
                    mult += 1;
                    idx += 1;
                }
                for s in 1..=mult {
                    term /= q((part * s) as i64);
                    term *= weight(part);
                }
                if term.is_zero() {
                    return;
                }
            }
            *total += term;
            return;
        }
        for part in (1..=max_part.min(remaining)).rev() {
            parts.push(part);
            rec(remaining - part, part, parts, weight, total);
            parts.pop();
        }
    }
    rec(n, n, &mut parts, &weight, &mut total);
    total
}

/// Reads the corolla coefficient of `t_{n+1}` in a reconstructed sequence;
/// equal to the series coefficient `a_n` for the B/C families.
pub fn seq01_corolla_coeff(s: &Seq, n: usize) -> Result<Q> {
    if n + 1 > s.order() {
        return Err(Error::Window {
            requested: n + 1,
            window: s.order(),
        });
    }
    Ok(s.gen(n + 1).coeff_of_tree(&Tree::corolla(n + 1)))
}
