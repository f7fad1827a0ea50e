//! Rational linear combinations of forests and of forest pairs.
//!
//! `Elem` is an element of the Hopf algebra: a finite map forest -> nonzero
//! rational. `TensorElem` lives in the tensor square. Both drop zero
//! coefficients eagerly; the zero element is the empty map.
//!
//! Text form: `c1 * <forest> + c2 * <forest> + ...` with rationals as `p/q`.

use std::collections::BTreeMap;
use std::fmt;

use serde_json::{json, Value};

use crate::error::{Error, Result};
use crate::rational::{format_q, parse_q, Q};
use crate::tree::{Forest, Tree};
use num_traits::Zero;

#[derive(Clone, Debug, PartialEq, Eq, Default)]
pub struct Elem {
    terms: BTreeMap<Forest, Q>,
}

impl Elem {
    pub fn zero() -> Elem {
        Elem::default()
    }

    /// The unit: the empty forest with coefficient 1.
    pub fn one() -> Elem {
        Elem::term(Forest::empty(), Q::from_integer(1.into()))
    }

    pub fn from_tree(t: Tree) -> Elem {
        Elem::term(Forest::single(t), Q::from_integer(1.into()))
    }

    pub fn from_forest(f: Forest) -> Elem {
        Elem::term(f, Q::from_integer(1.into()))
    }

    pub fn term(f: Forest, c: Q) -> Elem {
        let mut terms = BTreeMap::new();
        if !c.is_zero() {
            terms.insert(f, c);
        }
        Elem { terms }
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn coeff(&self, f: &Forest) -> Q {
        self.terms.get(f).cloned().unwrap_or_else(Q::zero)
    }

    pub fn coeff_of_tree(&self, t: &Tree) -> Q {
        self.coeff(&Forest::single(t.clone()))
    }

    pub fn terms(&self) -> impl Iterator<Item = (&Forest, &Q)> {
        self.terms.iter()
    }

    pub fn num_terms(&self) -> usize {
        self.terms.len()
    }

    pub fn add_term(&mut self, f: Forest, c: Q) {
        if c.is_zero() {
            return;
        }
        use std::collections::btree_map::Entry;
        match self.terms.entry(f) {
            Entry::Occupied(mut o) => {
                *o.get_mut() += c;
                if o.get().is_zero() {
                    o.remove();
                }
            }
            Entry::Vacant(v) => {
                v.insert(c);
            }
        }
    }

    pub fn add(&self, other: &Elem) -> Elem {
        let mut out = self.clone();
        for (f, c) in other.terms() {
            out.add_term(f.clone(), c.clone());
        }
        out
    }

    pub fn sub(&self, other: &Elem) -> Elem {
        self.add(&other.neg())
    }

    pub fn neg(&self) -> Elem {
        self.scale(&Q::from_integer((-1).into()))
    }

    pub fn scale(&self, c: &Q) -> Elem {
        if c.is_zero() {
            return Elem::zero();
        }
        Elem {
            terms: self
                .terms
                .iter()
                .map(|(f, v)| (f.clone(), v * c))
                .collect(),
        }
    }

    /// The algebra product: bilinear forest concatenation.
    pub fn mul(&self, other: &Elem) -> Elem {
        let mut out = Elem::zero();
        for (f1, c1) in self.terms() {
            for (f2, c2) in other.terms() {
                out.add_term(f1.mul(f2), c1 * c2);
            }
        }
        out
    }

    /// Counit: the coefficient of the empty forest.
    pub fn counit(&self) -> Q {
        self.coeff(&Forest::empty())
    }

    /// The degree-`d` homogeneous component (by total vertex count).
    pub fn component(&self, d: usize) -> Elem {
        Elem {
            terms: self
                .terms
                .iter()
                .filter(|(f, _)| f.size() == d)
                .map(|(f, c)| (f.clone(), c.clone()))
                .collect(),
        }
    }

    pub fn max_degree(&self) -> usize {
        self.terms.keys().map(|f| f.size()).max().unwrap_or(0)
    }

    /// True if homogeneous of degree `d` (the zero element qualifies).
    pub fn is_homogeneous(&self, d: usize) -> bool {
        self.terms.keys().all(|f| f.size() == d)
    }

    /// True if every monomial is a single tree.
    pub fn is_tree_combination(&self) -> bool {
        self.terms.keys().all(|f| f.trees().len() == 1)
    }

    /// Smallest tree (canonical order) with nonzero coefficient, for
    /// tree combinations.
    pub fn least_tree(&self) -> Option<&Tree> {
        self.terms.keys().find_map(|f| f.as_single_tree())
    }

    /// Parses the text form produced by `Display`.
    pub fn parse(s: &str) -> Result<Elem> {
        let t = s.trim();
        if t == "0" {
            return Ok(Elem::zero());
        }
        let mut out = Elem::zero();
        for piece in t.split('+') {
            let piece = piece.trim();
            let (coeff, forest) = match piece.split_once('*') {
                // the coefficient is everything before the first '*' only if
                // it parses as a rational; "o*o" is a bare forest
                Some((c, rest)) if parse_q(c).is_ok() => (parse_q(c)?, Forest::parse(rest)?),
                _ => (
                    Q::from_integer(1.into()),
                    Forest::parse(piece).map_err(|_| Error::Parse {
                        pos: 0,
                        msg: format!("bad term {piece:?}"),
                    })?,
                ),
            };
            out.add_term(forest, coeff);
        }
        Ok(out)
    }

    /// JSON form: `[{"coeff": "p/q", "forest": "<text>"}, ...]`.
    pub fn to_json(&self) -> Value {
        Value::Array(
            self.terms
                .iter()
                .map(|(f, c)| json!({"coeff": format_q(c), "forest": f.to_string()}))
                .collect(),
        )
    }

    pub fn from_json(v: &Value) -> Result<Elem> {
        let arr = v.as_array().ok_or_else(|| Error::Parse {
            pos: 0,
            msg: "expected a JSON array of terms".into(),
        })?;
        let mut out = Elem::zero();
        for item in arr {
            let coeff = item.get("coeff").and_then(Value::as_str).ok_or_else(|| {
                Error::Parse {
                    pos: 0,
                    msg: "term missing string field \"coeff\"".into(),
                }
            })?;
            let forest = item.get("forest").and_then(Value::as_str).ok_or_else(|| {
                Error::Parse {
                    pos: 0,
                    msg: "term missing string field \"forest\"".into(),
                }
            })?;
            out.add_term(Forest::parse(forest)?, parse_q(coeff)?);
        }
        Ok(out)
    }
}

impl fmt::Display for Elem {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.terms.is_empty() {
            return f.write_str("0");
        }
        for (k, (forest, c)) in self.terms.iter().enumerate() {
            if k > 0 {
                f.write_str(" + ")?;
            }
            write!(f, "{} * {}", format_q(c), forest)?;
        }
        Ok(())
    }
}

/// An element of the tensor square, keyed by forest pairs.
#[derive(Clone, Debug, PartialEq, Eq, Default)]
pub struct TensorElem {
    terms: BTreeMap<(Forest, Forest), Q>,
}

impl TensorElem {
    pub fn zero() -> TensorElem {
        TensorElem::default()
    }

    pub fn term(l: Forest, r: Forest, c: Q) -> TensorElem {
        let mut out = TensorElem::zero();
        out.add_term(l, r, c);
        out
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn add_term(&mut self, l: Forest, r: Forest, c: Q) {
        if c.is_zero() {
            return;
        }
        use std::collections::btree_map::Entry;
        match self.terms.entry((l, r)) {
            Entry::Occupied(mut o) => {
                *o.get_mut() += c;
                if o.get().is_zero() {
                    o.remove();
                }
            }
            Entry::Vacant(v) => {
                v.insert(c);
            }
        }
    }

    pub fn add(&self, other: &TensorElem) -> TensorElem {
        let mut out = self.clone();
        for ((l, r), c) in other.terms() {
            out.add_term(l.clone(), r.clone(), c.clone());
        }
        out
    }

    pub fn sub(&self, other: &TensorElem) -> TensorElem {
        self.add(&other.scale(&Q::from_integer((-1).into())))
    }

    pub fn scale(&self, c: &Q) -> TensorElem {
        if c.is_zero() {
            return TensorElem::zero();
        }
        TensorElem {
            terms: self
                .terms
                .iter()
                .map(|(k, v)| (k.clone(), v * c))
                .collect(),
        }
    }

    /// Componentwise product of tensors.
    pub fn mul(&self, other: &TensorElem) -> TensorElem {
        let mut out = TensorElem::zero();
        for ((l1, r1), c1) in self.terms() {
            for ((l2, r2), c2) in other.terms() {
                out.add_term(l1.mul(l2), r1.mul(r2), c1 * c2);
            }
        }
        out
    }

    /// The tensor product of two algebra elements.
    pub fn of(left: &Elem, right: &Elem) -> TensorElem {
        let mut out = TensorElem::zero();
        for (l, cl) in left.terms() {
            for (r, cr) in right.terms() {
                out.add_term(l.clone(), r.clone(), cl * cr);
            }
        }
        out
    }

    pub fn coeff(&self, l: &Forest, r: &Forest) -> Q {
        self.terms
            .get(&(l.clone(), r.clone()))
            .cloned()
            .unwrap_or_else(Q::zero)
    }

    pub fn terms(&self) -> impl Iterator<Item = (&(Forest, Forest), &Q)> {
        self.terms.iter()
    }

    /// Restriction to bidegree `(left_size, right_size)`.
    pub fn bidegree(&self, left: usize, right: usize) -> TensorElem {
        TensorElem {
            terms: self
                .terms
                .iter()
                .filter(|((l, r), _)| l.size() == left && r.size() == right)
                .map(|(k, v)| (k.clone(), v.clone()))
                .collect(),
        }
    }

    /// Keeps only tree (x) tree terms.
    pub fn tree_tree_part(&self) -> TensorElem {
        TensorElem {
            terms: self
                .terms
                .iter()
                .filter(|((l, r), _)| l.trees().len() == 1 && r.trees().len() == 1)
                .map(|(k, v)| (k.clone(), v.clone()))
                .collect(),
        }
    }

    /// Applies a linear map to the left leg.
    pub fn map_left(&self, f: impl Fn(&Forest) -> Elem) -> TensorElem {
        let mut out = TensorElem::zero();
        for ((l, r), c) in self.terms() {
            for (fl, cl) in f(l).terms() {
                out.add_term(fl.clone(), r.clone(), c * cl);
            }
        }
        out
    }

    /// Applies a linear map to the right leg.
    pub fn map_right(&self, f: impl Fn(&Forest) -> Elem) -> TensorElem {
        let mut out = TensorElem::zero();
        for ((l, r), c) in self.terms() {
            for (fr, cr) in f(r).terms() {
                out.add_term(l.clone(), fr.clone(), c * cr);
            }
        }
        out
    }

    /// Multiplies the two legs together (the algebra multiplication map).
    pub fn collapse(&self) -> Elem {
        let mut out = Elem::zero();
        for ((l, r), c) in self.terms() {
            out.add_term(l.mul(r), c.clone());
        }
        out
    }

    /// JSON form: `[{"coeff": "p/q", "left": "...", "right": "..."}]`.
    pub fn to_json(&self) -> Value {
        Value::Array(
            self.terms
                .iter()
                .map(|((l, r), c)| {
                    json!({"coeff": format_q(c), "left": l.to_string(), "right": r.to_string()})
                })
                .collect(),
        )
    }
}

impl fmt::Display for TensorElem {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.terms.is_empty() {
            return f.write_str("0");
        }
        for (k, ((l, r), c)) in self.terms.iter().enumerate() {
            if k > 0 {
                f.write_str(" + ")?;
            }
            write!(f, "{} * {} (x) {}", format_q(c), l, r)?;
        }
        Ok(())
    }
}

/// A degree-truncated graded series: component `d` is homogeneous of
/// vertex-degree `d`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Series {
    comps: Vec<Elem>,
}

impl Series {
    /// Zero series truncated at degree `n` (components `0..=n`).
    pub fn zero(n: usize) -> Series {
        Series {
            comps: vec![Elem::zero(); n + 1],
        }
    }

    pub fn from_components(comps: Vec<Elem>) -> Result<Series> {
        for (d, c) in comps.iter().enumerate() {
            if !c.is_homogeneous(d) {
                return Err(Error::Precondition(format!(
                    "series component {d} is not homogeneous of degree {d}"
                )));
            }
        }
        Ok(Series { comps })
    }

    /// Truncation order N (components 0..=N).
    pub fn order(&self) -> usize {
        self.comps.len() - 1
    }

    pub fn component(&self, d: usize) -> &Elem {
        &self.comps[d]
    }

    pub fn set_component(&mut self, d: usize, e: Elem) {
        debug_assert!(e.is_homogeneous(d));
        self.comps[d] = e;
    }

    pub fn add(&self, other: &Series) -> Series {
        let n = self.order().min(other.order());
        Series {
            comps: (0..=n)
                .map(|d| self.comps[d].add(&other.comps[d]))
                .collect(),
        }
    }

    pub fn scale(&self, c: &Q) -> Series {
        Series {
            comps: self.comps.iter().map(|e| e.scale(c)).collect(),
        }
    }

    pub fn mul(&self, other: &Series) -> Series {
        let n = self.order().min(other.order());
        let mut out = Series::zero(n);
        for i in 0..=n {
            if self.comps[i].is_zero() {
                continue;
            }
            for j in 0..=n - i {
                if other.comps[j].is_zero() {
                    continue;
                }
                out.comps[i + j] = out.comps[i + j].add(&self.comps[i].mul(&other.comps[j]));
            }
        }
        out
    }

    /// `exp` of a series with zero constant component.
    pub fn exp(&self) -> Result<Series> {
        if !self.comps[0].is_zero() {
            return Err(Error::Precondition(
                "series exp needs a zero degree-0 component".into(),
            ));
        }
        let n = self.order();
        let mut out = Series::zero(n);
        out.comps[0] = Elem::one();
        let mut power = out.clone(); // self^k
        let mut kfact = Q::from_integer(1.into());
        for k in 1..=n {
            power = power.mul(self);
            kfact *= Q::from_integer((k as i64).into());
            let inv = Q::from_integer(1.into()) / kfact.clone();
            out = out.add(&power.scale(&inv));
        }
        Ok(out)
    }

    /// `log` of a series with constant component equal to the unit.
    pub fn log(&self) -> Result<Series> {
        if self.comps[0] != Elem::one() {
            return Err(Error::Precondition(
                "series log needs degree-0 component equal to 1".into(),
            ));
        }
        let n = self.order();
        let mut y = self.clone();
        y.comps[0] = Elem::zero();
        let mut out = Series::zero(n);
        let mut power = Series::zero(n);
        power.comps[0] = Elem::one();
        for k in 1..=n {
            power = power.mul(&y);
            let sign = if k % 2 == 1 { 1 } else { -1 };
            let c = Q::new(sign.into(), (k as i64).into());
            out = out.add(&power.scale(&c));
        }
        Ok(out)
    }
}
