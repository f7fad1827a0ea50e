//! Generator sequences: Dyson-Schwinger solutions and the named families,
//! plus the sub-Hopf membership check.
//!
//! A `Seq` holds one nonzero tree combination per degree with `t_1` the
//! single vertex; the algebra its entries generate is meant to be a Hopf
//! subalgebra, which `verify_subhopf` checks degree by degree by an exact
//! linear solve over the forest (x) forest basis.

use serde_json::{json, Value};

use num_traits::{One, Zero};

use crate::elem::{Elem, Series, TensorElem};
use crate::error::{Error, Result};
use crate::hopf::{bplus, coproduct, growth, prelie_graft};
use crate::linalg;
use crate::rational::{binomial_q, factorial, format_q, parse_q, Q};
use crate::tree::{enumerate_trees, Forest, Tree};

/// A power series over the rationals, the datum of a Dyson-Schwinger
/// equation (`coeffs[0]` must be 1 there).
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PowerSeries {
    coeffs: Vec<Q>,
}

impl PowerSeries {
    pub fn new(coeffs: Vec<Q>) -> PowerSeries {
        PowerSeries { coeffs }
    }

    pub fn coeff(&self, k: usize) -> Q {
        self.coeffs.get(k).cloned().unwrap_or_else(Q::zero)
    }

    pub fn coeffs(&self) -> &[Q] {
        &self.coeffs
    }

    /// `1 + x`.
    pub fn one_plus_x() -> PowerSeries {
        PowerSeries::new(vec![Q::one(), Q::one()])
    }

    /// `1/(1-x)` truncated to `n` terms.
    pub fn geometric(n: usize) -> PowerSeries {
        PowerSeries::new(vec![Q::one(); n + 1])
    }

    /// `e^{a x}` truncated to `n` terms.
    pub fn exponential(a: &Q, n: usize) -> PowerSeries {
        let mut coeffs = Vec::with_capacity(n + 1);
        let mut acc = Q::one();
        coeffs.push(acc.clone());
        for k in 1..=n {
            acc = acc * a / Q::from_integer((k as i64).into());
            coeffs.push(acc.clone());
        }
        PowerSeries::new(coeffs)
    }

    /// `(1 + b x)^e` truncated to `n` terms, for a rational exponent.
    pub fn binomial_power(e: &Q, b: &Q, n: usize) -> PowerSeries {
        let mut coeffs = Vec::with_capacity(n + 1);
        let mut bk = Q::one();
        for k in 0..=n {
            coeffs.push(binomial_q(e, k) * bk.clone());
            bk *= b;
        }
        PowerSeries::new(coeffs)
    }

    pub fn to_json(&self) -> Value {
        Value::Array(self.coeffs.iter().map(|c| json!(format_q(c))).collect())
    }

    pub fn from_json(v: &Value) -> Result<PowerSeries> {
        let arr = v.as_array().ok_or_else(|| Error::Parse {
            pos: 0,
            msg: "expected a JSON array of rationals".into(),
        })?;
        let mut coeffs = Vec::new();
        for item in arr {
            let s = item.as_str().ok_or_else(|| Error::Parse {
                pos: 0,
                msg: "power series entries must be rational strings".into(),
            })?;
            coeffs.push(parse_q(s)?);
        }
        Ok(PowerSeries::new(coeffs))
    }
}

/// A validated generator sequence `t_1..t_N`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Seq {
    gens: Vec<Elem>,
    name: Option<String>,
}

impl Seq {
    /// Validates: every `t_n` is a nonzero homogeneous tree combination of
    /// degree `n`, and `t_1` is the single vertex with coefficient 1.
    pub fn new(gens: Vec<Elem>, name: Option<String>) -> Result<Seq> {
        if gens.is_empty() {
            return Err(Error::Precondition("empty generator list".into()));
        }
        for (k, g) in gens.iter().enumerate() {
            let n = k + 1;
            if g.is_zero() {
                return Err(Error::ZeroGenerator { degree: n });
            }
            if !g.is_homogeneous(n) {
                return Err(Error::Precondition(format!(
                    "t_{n} is not homogeneous of degree {n}"
                )));
            }
            if !g.is_tree_combination() {
                return Err(Error::Precondition(format!(
                    "t_{n} contains multi-tree monomials"
                )));
            }
        }
        if gens[0] != Elem::from_tree(Tree::leaf()) {
            return Err(Error::Precondition(
                "t_1 must be the single vertex with coefficient 1".into(),
            ));
        }
        Ok(Seq { gens, name })
    }

    /// Truncation order N.
    pub fn order(&self) -> usize {
        self.gens.len()
    }

    pub fn name(&self) -> Option<&str> {
        self.name.as_deref()
    }

    /// `t_n`, 1-based.
    pub fn gen(&self, n: usize) -> &Elem {
        &self.gens[n - 1]
    }

    pub fn gens(&self) -> &[Elem] {
        &self.gens
    }

    /// Shortens the window.
    pub fn truncate(&self, n: usize) -> Seq {
        assert!(n >= 1 && n <= self.order());
        Seq {
            gens: self.gens[..n].to_vec(),
            name: self.name.clone(),
        }
    }

    pub fn to_json(&self) -> Value {
        json!({
            "name": self.name,
            "N": self.order(),
            "gens": Value::Array(self.gens.iter().map(Elem::to_json).collect()),
        })
    }

    pub fn from_json(v: &Value) -> Result<Seq> {
        let gens = v
            .get("gens")
            .and_then(Value::as_array)
            .ok_or_else(|| Error::Parse {
                pos: 0,
                msg: "sequence JSON needs a \"gens\" array".into(),
            })?
            .iter()
            .map(Elem::from_json)
            .collect::<Result<Vec<_>>>()?;
        let name = v
            .get("name")
            .and_then(Value::as_str)
            .map(|s| s.to_string());
        Seq::new(gens, name)
    }

    /// Human-diffable text: one `degree n: ...` line per generator.
    pub fn to_text(&self) -> String {
        let mut out = String::new();
        for (k, g) in self.gens.iter().enumerate() {
            out.push_str(&format!("degree {}: {}\n", k + 1, g));
        }
        out
    }
}

// ---------------------------------------------------------------------------
// Dyson-Schwinger equations
// ---------------------------------------------------------------------------

/// Solves `X = x B+(f(X))` degree by degree: the degree-`n` generator is
/// `B+` of the degree-`(n-1)` component of `f(X)`.
pub fn dse_solve(f: &PowerSeries, n: usize) -> Result<Seq> {
    if f.coeff(0) != Q::one() {
        return Err(Error::Precondition(
            "Dyson-Schwinger datum must have constant term 1".into(),
        ));
    }
    if n == 0 {
        return Err(Error::Precondition("order must be at least 1".into()));
    }
    let mut gens: Vec<Elem> = Vec::with_capacity(n);
    for deg in 1..=n {
        // X so far as a series truncated at degree deg-1
        let mut x = Series::zero(deg - 1);
        for (k, g) in gens.iter().enumerate() {
            if k < deg - 1 {
                x.set_component(k + 1, g.clone());
            }
        }
        // f(X) truncated at degree deg-1
        let mut fx = Series::zero(deg - 1);
        fx.set_component(0, Elem::one().scale(&f.coeff(0)));
        let mut power = {
            let mut p = Series::zero(deg - 1);
            p.set_component(0, Elem::one());
            p
        };
        for j in 1..=deg - 1 {
            power = power.mul(&x);
            let cj = f.coeff(j);
            if !cj.is_zero() {
                fx = fx.add(&power.scale(&cj));
            }
        }
        let next = bplus(fx.component(deg - 1));
        if next.is_zero() {
            return Err(Error::ZeroGenerator { degree: deg });
        }
        gens.push(next);
    }
    Seq::new(gens, Some("dse".into()))
}

// ---------------------------------------------------------------------------
// named families
// ---------------------------------------------------------------------------

/// Ladders: `t_n` is the path with `n` vertices.
pub fn family_ladders(n: usize) -> Seq {
    let gens = (1..=n).map(|k| Elem::from_tree(Tree::ladder(k))).collect();
    Seq::new(gens, Some("ladders".into())).expect("ladders are a valid sequence")
}

/// Connes-Moscovici generators: iterate the growth operator from the vertex.
pub fn family_cm(n: usize) -> Seq {
    let mut gens = vec![Elem::from_tree(Tree::leaf())];
    for _ in 1..n {
        let next = growth(gens.last().unwrap());
        gens.push(next);
    }
    Seq::new(gens, Some("cm".into())).expect("growth iterates are a valid sequence")
}

/// Corollas scaled by `(m!)^k`; `k = 0` gives plain corollas.
pub fn family_corollas(k: u32, n: usize) -> Seq {
    let gens = (1..=n)
        .map(|m| {
            let mut c = Q::one();
            for _ in 0..k {
                c *= Q::from_integer(factorial(m));
            }
            Elem::term(Forest::single(Tree::corolla(m)), c)
        })
        .collect();
    Seq::new(gens, Some(format!("corollas^{k}"))).expect("scaled corollas are a valid sequence")
}

/// The two-parameter Dyson-Schwinger family with array `ai + b`, built from
/// the closed per-vertex product: a vertex with `k` children contributes
/// `prod_{j=1..k} (a + (2-j) b)`.
pub fn family_dse_ab(a: &Q, b: &Q, n: usize) -> Result<Seq> {
    if (a + b).is_zero() {
        return Err(Error::Degenerate("a + b = 0".into()));
    }
    let mut gens = Vec::with_capacity(n);
    for deg in 1..=n {
        let mut e = Elem::zero();
        for t in enumerate_trees(deg)?.iter() {
            let w = vertex_product(t, a, b);
            if w.is_zero() {
                continue;
            }
            let coeff = w / Q::from_integer(t.symmetry_factor());
            e.add_term(Forest::single(t.clone()), coeff);
        }
        if e.is_zero() {
            return Err(Error::ZeroGenerator { degree: deg });
        }
        gens.push(e);
    }
    Seq::new(gens, Some("dse-ab".into()))
}

fn vertex_product(t: &Tree, a: &Q, b: &Q) -> Q {
    let k = t.children().len();
    let mut acc = Q::one();
    for j in 1..=k {
        acc *= a + b * Q::from_integer((2 - j as i64).into());
        if acc.is_zero() {
            return acc;
        }
    }
    for c in t.children() {
        acc *= vertex_product(c, a, b);
        if acc.is_zero() {
            return acc;
        }
    }
    acc
}

/// The Dyson-Schwinger datum matching `family_dse_ab`:
/// `(1+bx)^{(a+b)/b}` for `b != 0`, `e^{ax}` for `b = 0`.
pub fn dse_datum_ab(a: &Q, b: &Q, n: usize) -> Result<PowerSeries> {
    if (a + b).is_zero() {
        return Err(Error::Degenerate("a + b = 0".into()));
    }
    if b.is_zero() {
        Ok(PowerSeries::exponential(a, n))
    } else {
        let e = (a + b) / b;
        Ok(PowerSeries::binomial_power(&e, b, n))
    }
}

/// `Z_m(b)`: add a root to `exp(p_1 + ... + p_{m-1} + b p_m)`, where the
/// `p_k` are the primitive components of `log` of the ladder series.
pub fn family_zn(m: usize, b: &Q, n: usize) -> Result<Seq> {
    if b.is_zero() {
        return Err(Error::Degenerate("b = 0".into()));
    }
    if m == 0 {
        return Err(Error::Precondition("index must be at least 1".into()));
    }
    let order = n.max(2) - 1;
    let mut ladder_series = Series::zero(order);
    ladder_series.set_component(0, Elem::one());
    for k in 1..=order {
        ladder_series.set_component(k, Elem::from_tree(Tree::ladder(k)));
    }
    let p = ladder_series.log()?;
    let mut y = Series::zero(order);
    for k in 1..=order.min(m.saturating_sub(1)) {
        y.set_component(k, p.component(k).clone());
    }
    if m <= order {
        y.set_component(m, p.component(m).scale(b));
    }
    let exp_y = y.exp()?;
    let mut gens = Vec::with_capacity(n);
    for k in 1..=n {
        let g = bplus(exp_y.component(k - 1));
        if g.is_zero() {
            return Err(Error::ZeroGenerator { degree: k });
        }
        gens.push(g);
    }
    Seq::new(gens, Some(format!("z_{m}({})", format_q(b))))
}

/// Extends a sub-Hopf prefix `t'_1..t'_M` by `t_n = t_{n-M} . X` for a
/// primitive homogeneous `X` of degree `M` in the algebra of the prefix.
pub fn family_prelie_ext(base: &Seq, x: &Elem, n: usize) -> Result<Seq> {
    let m = base.order();
    if x.is_zero() || !x.is_homogeneous(m) {
        return Err(Error::Precondition(format!(
            "X must be nonzero homogeneous of degree {m}"
        )));
    }
    // primitivity
    let mut primitive_part = TensorElem::zero();
    for (f, c) in x.terms() {
        primitive_part.add_term(f.clone(), Forest::empty(), c.clone());
        primitive_part.add_term(Forest::empty(), f.clone(), c.clone());
    }
    if coproduct(x) != primitive_part {
        return Err(Error::Precondition("X is not primitive".into()));
    }
    // X must lie in the algebra generated by the prefix
    if expand_in_monomials(x, base, m).is_none() {
        return Err(Error::Precondition(
            "X does not lie in the algebra of the prefix".into(),
        ));
    }
    let report = verify_subhopf(base);
    if let Some(failure) = report.failure {
        return Err(Error::NotSubHopf(format!(
            "prefix fails at degree {}, bidegree {:?}",
            failure.degree, failure.bidegree
        )));
    }
    let mut gens = base.gens().to_vec();
    for deg in m + 1..=n {
        let prev = gens[deg - m - 1].clone();
        let next = prelie_graft(&prev, x);
        if next.is_zero() {
            return Err(Error::ZeroGenerator { degree: deg });
        }
        gens.push(next);
    }
    gens.truncate(n);
    Seq::new(gens, Some("prelie-ext".into()))
}

/// The three-parameter parity family; built from its array and the inverse
/// bijection (see `lambda`).
pub fn family_abc(a: &Q, b: &Q, c: &Q, n: usize) -> Result<Seq> {
    if (a + b).is_zero() {
        return Err(Error::Degenerate("a + b = 0".into()));
    }
    if c.is_zero() {
        return Err(Error::Degenerate("c = 0".into()));
    }
    let array = crate::lambda::LambdaArray::from_fn(n, |i, j| abc_entry(a, b, c, i, j));
    let mut s = array.reconstruct(n)?;
    s.name = Some("abc".into());
    Ok(s)
}

/// The parity-case entries of the three-parameter family.
pub fn abc_entry(a: &Q, b: &Q, c: &Q, i: usize, j: usize) -> Q {
    match (i % 2, j % 2) {
        (0, 0) => a * Q::from_integer(((i / 2) as i64).into()) + b,
        (1, 0) => a * Q::from_integer(((i / 2) as i64).into()) + (a + b) / Q::from_integer(2.into()),
        (0, 1) => Q::zero(),
        _ => c.clone(),
    }
}

/// Ladders with added leaves: `t_{m+1} = B+(a^m o^m + b sum_k a^k t_{m-k} o^k)`.
pub fn family_ladders_with_leaves(a: &Q, b: &Q, n: usize) -> Result<Seq> {
    let mut gens = vec![Elem::from_tree(Tree::leaf())];
    for m in 1..n {
        let mut arg = Elem::term(
            Forest::from_trees(vec![Tree::leaf(); m]),
            pow_q(a, m),
        );
        for k in 0..m {
            let t = gens[m - k - 1].clone();
            let leaves = Elem::from_forest(Forest::from_trees(vec![Tree::leaf(); k]));
            arg = arg.add(&t.mul(&leaves).scale(&(b * pow_q(a, k))));
        }
        let next = bplus(&arg);
        if next.is_zero() {
            return Err(Error::ZeroGenerator { degree: m + 1 });
        }
        gens.push(next);
    }
    Seq::new(gens, Some("ladders-with-leaves".into()))
}

fn pow_q(x: &Q, k: usize) -> Q {
    let mut acc = Q::one();
    for _ in 0..k {
        acc *= x;
    }
    acc
}

// ---------------------------------------------------------------------------
// sub-Hopf verification
// ---------------------------------------------------------------------------

#[derive(Clone, Debug)]
pub struct SubHopfReport {
    pub failure: Option<SubHopfFailure>,
}

impl SubHopfReport {
    pub fn ok(&self) -> bool {
        self.failure.is_none()
    }
}

#[derive(Clone, Debug)]
pub struct SubHopfFailure {
    pub degree: usize,
    pub bidegree: (usize, usize),
    /// The tensor block that is not expressible in the generator monomials.
    pub offending_block: TensorElem,
}

/// Checks degree by degree that `Delta(t_n)` lies in `A (x) A`, where `A` is
/// the algebra generated by the sequence; exact linear solve per bidegree.
pub fn verify_subhopf(s: &Seq) -> SubHopfReport {
    for n in 2..=s.order() {
        let delta = coproduct(s.gen(n));
        for p in 1..n {
            let q = n - p;
            let block = delta.bidegree(p, q);
            if solve_block(&block, s, p, q).is_none() {
                return SubHopfReport {
                    failure: Some(SubHopfFailure {
                        degree: n,
                        bidegree: (p, q),
                        offending_block: block,
                    }),
                };
            }
        }
    }
    SubHopfReport { failure: None }
}

/// Expresses `block` in the basis (monomials of degree p) (x) (monomials of
/// degree q); returns the coefficients or None if impossible.
fn solve_block(block: &TensorElem, s: &Seq, p: usize, q: usize) -> Option<Vec<Q>> {
    let bas_p = monomial_elems(s, p);
    let bas_q = monomial_elems(s, q);
    // collect the support
    let mut keys: std::collections::BTreeSet<(Forest, Forest)> = Default::default();
    for (k, _) in block.terms() {
        keys.insert(k.clone());
    }
    for bp in &bas_p {
        for bq in &bas_q {
            for (fp, _) in bp.terms() {
                for (fq, _) in bq.terms() {
                    keys.insert((fp.clone(), fq.clone()));
                }
            }
        }
    }
    let mut a: Vec<Vec<Q>> = Vec::with_capacity(keys.len());
    let mut rhs: Vec<Q> = Vec::with_capacity(keys.len());
    for (fl, fr) in &keys {
        let mut row = Vec::with_capacity(bas_p.len() * bas_q.len());
        for bp in &bas_p {
            for bq in &bas_q {
                row.push(bp.coeff(fl) * bq.coeff(fr));
            }
        }
        a.push(row);
        rhs.push(block.coeff(fl, fr));
    }
    linalg::solve(&a, &rhs)
}

/// Expands a homogeneous element in the generator monomials of its degree.
pub fn expand_in_monomials(x: &Elem, s: &Seq, degree: usize) -> Option<Vec<Q>> {
    let bas = monomial_elems(s, degree);
    let mut keys: std::collections::BTreeSet<Forest> = Default::default();
    for (f, _) in x.terms() {
        keys.insert(f.clone());
    }
    for b in &bas {
        for (f, _) in b.terms() {
            keys.insert(f.clone());
        }
    }
    let mut a = Vec::with_capacity(keys.len());
    let mut rhs = Vec::with_capacity(keys.len());
    for f in &keys {
        a.push(bas.iter().map(|b| b.coeff(f)).collect());
        rhs.push(x.coeff(f));
    }
    linalg::solve(&a, &rhs)
}

/// All products of generators with total degree `d` (one per partition of
/// `d` into parts at most `s.order()`).
fn monomial_elems(s: &Seq, d: usize) -> Vec<Elem> {
    let mut parts = Vec::new();
    let mut out = Vec::new();
    partitions_rec(d, d.min(s.order()), &mut parts, &mut |partition| {
        let mut e = Elem::one();
        for &p in partition {
            e = e.mul(s.gen(p));
        }
        out.push(e);
    });
    out
}

fn partitions_rec(
    remaining: usize,
    max_part: usize,
    acc: &mut Vec<usize>,
    emit: &mut impl FnMut(&[usize]),
) {
    if remaining == 0 {
        emit(acc);
        return;
    }
    for part in (1..=max_part.min(remaining)).rev() {
        acc.push(part);
        partitions_rec(remaining - part, part, acc, emit);
        acc.pop();
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rational::{q, qr};

    fn e(s: &str) -> Elem {
        Elem::parse(s).unwrap()
    }

    #[test]
    fn dse_ladders() {
        let s = dse_solve(&PowerSeries::one_plus_x(), 5).unwrap();
        for k in 1..=5 {
            assert_eq!(s.gen(k), &Elem::from_tree(Tree::ladder(k)));
        }
    }

    #[test]
    fn dse_binary_trees() {
        // f = (1+x)^2
        let f = PowerSeries::new(vec![q(1), q(2), q(1)]);
        let s = dse_solve(&f, 4).unwrap();
        assert_eq!(s.gen(1), &e("1 * o"));
        assert_eq!(s.gen(2), &e("2 * o[o]"));
        assert_eq!(s.gen(3), &e("1 * o[o,o] + 4 * o[o[o]]"));
        assert_eq!(
            s.gen(4),
            &e("4 * o[o,o[o]] + 2 * o[o[o,o]] + 8 * o[o[o[o]]]")
        );
    }

    #[test]
    fn dse_plane_trees() {
        let s = dse_solve(&PowerSeries::geometric(5), 4).unwrap();
        assert_eq!(s.gen(3), &e("1 * o[o,o] + 1 * o[o[o]]"));
        assert_eq!(
            s.gen(4),
            &e("1 * o[o,o,o] + 2 * o[o,o[o]] + 1 * o[o[o,o]] + 1 * o[o[o[o]]]")
        );
    }

    #[test]
    fn dse_constant_datum_degenerates() {
        let f = PowerSeries::new(vec![q(1)]);
        assert_eq!(
            dse_solve(&f, 3),
            Err(Error::ZeroGenerator { degree: 2 })
        );
    }

    #[test]
    fn cm_matches_growth_display() {
        let s = family_cm(5);
        assert_eq!(s.gen(3), &e("1 * o[o,o] + 1 * o[o[o]]"));
        assert_eq!(
            s.gen(4),
            &e("1 * o[o,o,o] + 3 * o[o,o[o]] + 1 * o[o[o,o]] + 1 * o[o[o[o]]]")
        );
        let t5 = s.gen(5);
        assert_eq!(t5.num_terms(), 9);
        let mut coeffs: Vec<Q> = t5.terms().map(|(_, c)| c.clone()).collect();
        coeffs.sort();
        let mut expect: Vec<Q> = [1, 1, 3, 1, 4, 4, 3, 6, 1].map(q).to_vec();
        expect.sort();
        assert_eq!(coeffs, expect);
    }

    #[test]
    fn dse_ab_closed_coefficients() {
        let (a, b) = (q(2), q(3));
        let s = family_dse_ab(&a, &b, 4).unwrap();
        assert_eq!(s.gen(2), &e("5 * o[o]"));
        // t3 = (a+b)^2 l3 + (a+b)a/2 c3
        assert_eq!(s.gen(3), &e("5 * o[o,o] + 25 * o[o[o]]"));
        // t4 corolla coefficient (a+b)a(a-b)/6 = -5/3
        assert_eq!(s.gen(4).coeff_of_tree(&Tree::corolla(4)), qr(-5, 3));
    }

    #[test]
    fn dse_ab_equals_dse_solve() {
        for (a, b) in [(q(2), q(3)), (q(1), q(1)), (q(2), q(-1)), (q(0), q(1))] {
            let lhs = family_dse_ab(&a, &b, 6).unwrap();
            let f = dse_datum_ab(&a, &b, 6).unwrap();
            let rhs = dse_solve(&f, 6).unwrap();
            assert_eq!(lhs.gens(), rhs.gens(), "a={a} b={b}");
        }
    }

    #[test]
    fn dse_ab_at_zero_one_is_ladders() {
        // the all-ones array: only ladders survive, all coefficients 1
        let s = family_dse_ab(&q(0), &q(1), 6).unwrap();
        for k in 1..=6 {
            assert_eq!(s.gen(k), &Elem::from_tree(Tree::ladder(k)));
        }
    }

    #[test]
    fn zn_prefix_is_ladders_and_table_rows_match() {
        let s = family_zn(3, &q(2), 5).unwrap();
        for k in 1..=3 {
            assert_eq!(s.gen(k), &Elem::from_tree(Tree::ladder(k)));
        }
        // Table row: t4 = b l4 - (b-1) o[o,o[o]] + (1/3)(b-1) c4, at b=2
        assert_eq!(
            s.gen(4),
            &e("1/3 * o[o,o,o] + -1 * o[o,o[o]] + 2 * o[o[o[o]]]")
        );
        assert_eq!(
            s.gen(5),
            &e("7/12 * o[o,o,o,o] + -2 * o[o,o,o[o]] + 2 * o[o,o[o[o]]] + 1/2 * o[o[o],o[o]]")
        );
        assert!(family_zn(3, &q(0), 5).is_err());
    }

    #[test]
    fn prelie_ext_reproduces_worked_example() {
        let base = Seq::new(
            vec![e("1 * o"), e("1 * o[o]")],
            Some("ladder prefix".into()),
        )
        .unwrap();
        let x = e("2 * o[o] + -1 * o*o");
        let s = family_prelie_ext(&base, &x, 5).unwrap();
        assert_eq!(s.gen(3), &e("-1 * o[o,o] + 2 * o[o[o]]"));
        assert_eq!(
            s.gen(4),
            &e("-1 * o[o,o,o] + 2 * o[o,o[o]] + -1 * o[o[o,o]] + 2 * o[o[o[o]]]")
        );
        assert_eq!(
            s.gen(5),
            &e("1 * o[o,o,o,o] + -4 * o[o,o,o[o]] + 2 * o[o,o[o,o]] + -4 * o[o,o[o[o]]] \
                + -2 * o[o[o,o,o]] + 4 * o[o[o,o[o]]] + -2 * o[o[o[o,o]]] + 4 * o[o[o[o[o]]]] \
                + 4 * o[o[o],o[o]]")
        );
        // a non-primitive X is rejected
        let bad = e("1 * o[o]");
        assert!(family_prelie_ext(&base, &bad, 4).is_err());
    }

    #[test]
    fn abc_family_displays() {
        let one = q(1);
        let s = family_abc(&one, &one, &one, 5).unwrap();
        assert_eq!(s.gen(2), &e("1 * o[o]"));
        assert_eq!(s.gen(3), &e("-1/2 * o[o,o] + 1 * o[o[o]]"));
        assert_eq!(
            s.gen(4),
            &e("-1/2 * o[o,o,o] + 1 * o[o,o[o]] + -1/2 * o[o[o,o]] + 1 * o[o[o[o]]]")
        );
        assert_eq!(
            s.gen(5),
            &e("1/2 * o[o,o[o,o]] + -1 * o[o,o[o[o]]] + -1/2 * o[o[o,o,o]] \
                + 1 * o[o[o,o[o]]] + -1/2 * o[o[o[o,o]]] + 1 * o[o[o[o[o]]]]")
        );
        assert!(family_abc(&one, &q(-1), &one, 4).is_err());
        assert!(family_abc(&one, &one, &q(0), 4).is_err());
    }

    #[test]
    fn ladders_with_leaves_weights() {
        let (a, b) = (q(2), q(3));
        let s = family_ladders_with_leaves(&a, &b, 4).unwrap();
        assert_eq!(s.gen(2), &e("5 * o[o]"));
        assert_eq!(s.gen(3), &e("10 * o[o,o] + 15 * o[o[o]]"));
        assert_eq!(
            s.gen(4),
            &e("20 * o[o,o,o] + 30 * o[o,o[o]] + 30 * o[o[o,o]] + 45 * o[o[o[o]]]")
        );
    }

    #[test]
    fn subhopf_verdicts() {
        assert!(verify_subhopf(&family_ladders(6)).ok());
        assert!(verify_subhopf(&family_cm(6)).ok());
        let f = PowerSeries::new(vec![q(1), q(1), q(0), q(1)]);
        let s = dse_solve(&f, 6).unwrap();
        let report = verify_subhopf(&s);
        let failure = report.failure.expect("1 + x + x^3 must fail");
        assert_eq!(failure.degree, 4);
        assert_eq!(failure.bidegree, (1, 3));
        // the prefix (l1, l2, c3) generates a genuine Hopf subalgebra;
        // the padded sequence dies on the nonzero condition instead
        let prefix = Seq::new(
            vec![e("1 * o"), e("1 * o[o]"), e("1 * o[o,o]")],
            None,
        )
        .unwrap();
        assert!(verify_subhopf(&prefix).ok());
        let padded = Seq::new(
            vec![e("1 * o"), e("1 * o[o]"), e("1 * o[o,o]"), Elem::zero()],
            None,
        );
        assert_eq!(padded, Err(Error::ZeroGenerator { degree: 4 }));
    }

    #[test]
    fn power_series_json_round_trip() {
        let f = PowerSeries::new(vec![q(1), qr(-2, 3), q(0), q(5)]);
        assert_eq!(PowerSeries::from_json(&f.to_json()).unwrap(), f);
    }

    #[test]
    fn seq_json_round_trip() {
        let s = family_cm(4);
        assert_eq!(Seq::from_json(&s.to_json()).unwrap(), s);
        assert!(s.to_text().starts_with("degree 1: 1 * o\n"));
    }
}
