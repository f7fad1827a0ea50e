//! The structure-constant arrays behind generator sequences.
//!
//! `lambda[i][j]` is the coefficient of `t_j (x) t_i` in `Delta(t_{i+j})`
//! (the convention under which the Connes-Moscovici array is
//! `binom(i+j, j+1)` and the corolla array has leftmost diagonal
//! `1, 2, 3, ...`). Extraction projects the coproduct onto its tree (x) tree
//! part; reconstruction runs the inverse construction
//! `t_n = sum_{|t|=n} mu(t)/s_t t` with `mu` built from the multi-argument
//! coefficients `lambda(i_1, ..., i_k)`.

use std::collections::BTreeMap;
use std::collections::HashMap;
use std::sync::Mutex;

use num_traits::{One, Zero};
use serde_json::{json, Value};

use crate::elem::Elem;
use crate::error::{Error, Result};
use crate::hopf::coproduct;
use crate::rational::{format_q, parse_q, Q};
use crate::seq::Seq;
use crate::tree::{enumerate_trees, Forest, Tree};

/// The doubly indexed rationals `lambda[i][j]` on the window `i + j <= N`.
#[derive(Debug, Default)]
pub struct LambdaArray {
    window: usize,
    vals: BTreeMap<(usize, usize), Q>,
    multi_memo: Mutex<HashMap<Vec<usize>, Q>>,
}

impl Clone for LambdaArray {
    fn clone(&self) -> Self {
        LambdaArray {
            window: self.window,
            vals: self.vals.clone(),
            multi_memo: Mutex::new(HashMap::new()),
        }
    }
}

impl PartialEq for LambdaArray {
    fn eq(&self, other: &Self) -> bool {
        self.window == other.window && self.vals == other.vals
    }
}
impl Eq for LambdaArray {}

impl LambdaArray {
    /// Fills the window `i + j <= n` from a formula.
    pub fn from_fn(n: usize, f: impl Fn(usize, usize) -> Q) -> LambdaArray {
        let mut vals = BTreeMap::new();
        for i in 1..n {
            for j in 1..=n - i {
                let v = f(i, j);
                if !v.is_zero() {
                    vals.insert((i, j), v);
                }
            }
        }
        LambdaArray {
            window: n,
            vals,
            multi_memo: Mutex::new(HashMap::new()),
        }
    }

    /// Window bound N: entries are defined for `i + j <= N`.
    pub fn window(&self) -> usize {
        self.window
    }

    /// `lambda[i][j]`; entries inside the window default to zero.
    pub fn get(&self, i: usize, j: usize) -> Result<Q> {
        if i == 0 || j == 0 || i + j > self.window {
            return Err(Error::Window {
                requested: i + j,
                window: self.window,
            });
        }
        Ok(self.vals.get(&(i, j)).cloned().unwrap_or_else(Q::zero))
    }

    /// Extraction: `lambda[i][j]` is the coefficient of `t_j (x) t_i` in
    /// the coproduct of `t_{i+j}`, read off by dividing the tree (x) tree
    /// block of bidegree `(j, i)` by `t_j (x) t_i` via a witness pair.
    pub fn extract(s: &Seq) -> Result<LambdaArray> {
        let n = s.order();
        let mut vals = BTreeMap::new();
        for total in 2..=n {
            let tree_part = coproduct(s.gen(total)).tree_tree_part();
            for j in 1..total {
                let i = total - j;
                let tj = s.gen(j);
                let ti = s.gen(i);
                let block = tree_part.bidegree(j, i);
                // witness pair: least trees with nonzero coefficient
                let wl = tj.least_tree().ok_or(Error::ZeroGenerator { degree: j })?;
                let wr = ti.least_tree().ok_or(Error::ZeroGenerator { degree: i })?;
                let denom = tj.coeff_of_tree(wl) * ti.coeff_of_tree(wr);
                let lam = block.coeff(
                    &Forest::single(wl.clone()),
                    &Forest::single(wr.clone()),
                ) / denom;
                // the whole block must equal lam * (t_j (x) t_i)
                let mut expect = crate::elem::TensorElem::of(tj, ti).scale(&lam);
                expect = expect.sub(&block);
                if !expect.is_zero() {
                    return Err(Error::NotProportional { i, j });
                }
                if !lam.is_zero() {
                    vals.insert((i, j), lam);
                }
            }
        }
        Ok(LambdaArray {
            window: n,
            vals,
            multi_memo: Mutex::new(HashMap::new()),
        })
    }

    /// Violated pre-Lie triples `(i, j, k)` with all six entries in window.
    pub fn check_prelie(&self) -> Vec<(usize, usize, usize)> {
        let n = self.window;
        let mut bad = Vec::new();
        for i in 1..n {
            for j in 1..n {
                for k in j..n {
                    if i + j + k > n {
                        continue;
                    }
                    let value = |a: usize, b: usize| self.vals.get(&(a, b)).cloned().unwrap_or_else(Q::zero);
                    let lhs = value(i, j) * value(i + j, k) - value(j, k) * value(i, j + k);
                    let rhs = value(i, k) * value(i + k, j) - value(k, j) * value(i, j + k);
                    if lhs != rhs {
                        bad.push((i, j, k));
                    }
                }
            }
        }
        bad
    }

    /// Non-degeneracy: for each `2 <= n <= N`, some `lambda[i][j]` with
    /// `i + j = n` is nonzero. Returns the first failing `n`, if any.
    pub fn nondegeneracy_failure(&self) -> Option<usize> {
        (2..=self.window).find(|&n| {
            (1..n).all(|i| {
                self.vals
                    .get(&(i, n - i))
                    .is_none_or(|v| v.is_zero())
            })
        })
    }

    /// The multi-argument coefficients, computed by the inverse-construction
    /// recursion and memoized on sorted argument lists (they are symmetric).
    pub fn lambda_multi(&self, idx: &[usize]) -> Result<Q> {
        let mut sorted = idx.to_vec();
        sorted.sort_unstable();
        if 1 + sorted.iter().sum::<usize>() > self.window {
            return Err(Error::Window {
                requested: 1 + sorted.iter().sum::<usize>(),
                window: self.window,
            });
        }
        self.lambda_multi_sorted(&sorted)
    }

    fn lambda_multi_sorted(&self, sorted: &[usize]) -> Result<Q> {
        if let Some(hit) = self.multi_memo.lock().unwrap().get(sorted) {
            return Ok(hit.clone());
        }
        let k = sorted.len();
        let value = match k {
            0 => Q::one(),
            1 => self.get(1, sorted[0])?,
            _ => {
                let head = &sorted[..k - 1];
                let last = sorted[k - 1];
                let head_sum: usize = head.iter().sum();
                let mut acc =
                    self.lambda_multi_sorted(head)? * self.get(1 + head_sum, last)?;
                for j in 0..k - 1 {
                    let mut merged = head.to_vec();
                    merged[j] += last;
                    merged.sort_unstable();
                    acc -= self.lambda_multi_sorted(&merged)? * self.get(head[j], last)?;
                }
                acc
            }
        };
        self.multi_memo
            .lock()
            .unwrap()
            .insert(sorted.to_vec(), value.clone());
        Ok(value)
    }

    /// `mu(t)`: product over vertices of `lambda(child subtree sizes)`.
    pub fn mu(&self, t: &Tree) -> Result<Q> {
        if t.size() > self.window {
            return Err(Error::Window {
                requested: t.size(),
                window: self.window,
            });
        }
        let sizes: Vec<usize> = t.children().iter().map(Tree::size).collect();
        let mut acc = self.lambda_multi(&sizes)?;
        for c in t.children() {
            if acc.is_zero() {
                return Ok(acc);
            }
            acc *= self.mu(c)?;
        }
        Ok(acc)
    }

    /// The inverse bijection: `t_n = sum_{|t|=n} mu(t)/s_t t`.
    pub fn reconstruct(&self, n: usize) -> Result<Seq> {
        if n > self.window {
            return Err(Error::Window {
                requested: n,
                window: self.window,
            });
        }
        let violations = self.check_prelie();
        if let Some(&(i, j, k)) = violations.first() {
            return Err(Error::Precondition(format!(
                "pre-Lie relation fails at ({i}, {j}, {k})"
            )));
        }
        if let Some(bad) = self.nondegeneracy_failure() {
            return Err(Error::Degenerate(format!(
                "all lambda entries with i + j = {bad} vanish"
            )));
        }
        let mut gens = Vec::with_capacity(n);
        for deg in 1..=n {
            let mut e = Elem::zero();
            for t in enumerate_trees(deg)?.iter() {
                let m = self.mu(t)?;
                if m.is_zero() {
                    continue;
                }
                e.add_term(
                    Forest::single(t.clone()),
                    m / Q::from_integer(t.symmetry_factor()),
                );
            }
            if e.is_zero() {
                return Err(Error::ZeroGenerator { degree: deg });
            }
            gens.push(e);
        }
        Seq::new(gens, Some("reconstructed".into()))
    }

    /// The leftward diagonal `(lambda[i][j])_i` at fixed `j`.
    pub fn diagonal(&self, j: usize) -> Vec<Q> {
        (1..=self.window.saturating_sub(j))
            .map(|i| self.vals.get(&(i, j)).cloned().unwrap_or_else(Q::zero))
            .collect()
    }

    /// Order verdict for one diagonal via forward differences.
    pub fn diagonal_order(&self, j: usize) -> DiagonalOrder {
        diagonal_order_of(&self.diagonal(j))
    }

    /// Per-diagonal verdicts and the overall strong-order verdict.
    ///
    /// The overall verdict is window-relative: `strong = Some(k)` when the
    /// leftmost diagonal has determined order exactly `k` and every other
    /// diagonal is consistent with a polynomial of degree at most `k` on its
    /// samples (diagonals too short to determine an order cannot refute).
    pub fn strong_order(&self) -> OrderReport {
        let mut per_diagonal = BTreeMap::new();
        let mut window_sizes = BTreeMap::new();
        for j in 1..self.window {
            per_diagonal.insert(j, self.diagonal_order(j));
            window_sizes.insert(j, self.window - j);
        }
        let strong = match per_diagonal.get(&1) {
            Some(DiagonalOrder::Order { k, .. }) => {
                let k = *k;
                let all_fit = (2..self.window)
                    .all(|j| consistent_with_degree(&self.diagonal(j), k));
                if all_fit {
                    Some(k)
                } else {
                    None
                }
            }
            _ => None,
        };
        let leftmost_exact = strong.is_some();
        OrderReport {
            per_diagonal,
            window_sizes,
            strong,
            leftmost_exact,
        }
    }

    /// Adds index-0 row and column of constant value `c` (re-indexed so the
    /// old entry `(i, j)` sits at `(i+1, j+1)`), for the homogeneity test.
    pub fn extend_homogeneous(&self, c: &Q) -> LambdaArray {
        let n = self.window + 2;
        LambdaArray::from_fn(n, |i, j| {
            if i == 1 || j == 1 {
                c.clone()
            } else {
                self.vals
                    .get(&(i - 1, j - 1))
                    .cloned()
                    .unwrap_or_else(Q::zero)
            }
        })
    }

    /// Whether adding constant outer diagonals of value `c` keeps every
    /// leftward diagonal within the array's strong order (the array-level
    /// homogeneity criterion).
    pub fn homogeneity_check(&self, c: &Q) -> bool {
        let Some(k) = self.strong_order().strong else {
            return false;
        };
        let ext = self.extend_homogeneous(c);
        (1..ext.window).all(|j| consistent_with_degree(&ext.diagonal(j), k))
    }

    /// Rows `[lambda[n][1], lambda[n-1][2], ..., lambda[1][n]]`, the layout
    /// of the triangle figures.
    pub fn rows(&self) -> Vec<Vec<Q>> {
        (2..=self.window)
            .map(|total| {
                (1..total)
                    .map(|j| {
                        self.vals
                            .get(&(total - j, j))
                            .cloned()
                            .unwrap_or_else(Q::zero)
                    })
                    .collect()
            })
            .collect()
    }

    pub fn from_rows(rows: &[Vec<Q>]) -> Result<LambdaArray> {
        let n = rows.len() + 1;
        let mut vals = BTreeMap::new();
        for (r, row) in rows.iter().enumerate() {
            let total = r + 2;
            if row.len() != total - 1 {
                return Err(Error::Parse {
                    pos: 0,
                    msg: format!("row {r} must have {} entries", total - 1),
                });
            }
            for (c, v) in row.iter().enumerate() {
                let j = c + 1;
                let i = total - j;
                if !v.is_zero() {
                    vals.insert((i, j), v.clone());
                }
            }
        }
        Ok(LambdaArray {
            window: n,
            vals,
            multi_memo: Mutex::new(HashMap::new()),
        })
    }

    /// JSON: the triangular row list.
    pub fn to_json(&self) -> Value {
        Value::Array(
            self.rows()
                .iter()
                .map(|row| Value::Array(row.iter().map(|v| json!(format_q(v))).collect()))
                .collect(),
        )
    }

    pub fn from_json(v: &Value) -> Result<LambdaArray> {
        let arr = v.as_array().ok_or_else(|| Error::Parse {
            pos: 0,
            msg: "expected a JSON array of rows".into(),
        })?;
        let mut rows = Vec::new();
        for row in arr {
            let row = row.as_array().ok_or_else(|| Error::Parse {
                pos: 0,
                msg: "expected a JSON array row".into(),
            })?;
            let mut out = Vec::new();
            for x in row {
                out.push(parse_q(x.as_str().ok_or_else(|| Error::Parse {
                    pos: 0,
                    msg: "row entries must be rational strings".into(),
                })?)?);
            }
            rows.push(out);
        }
        LambdaArray::from_rows(&rows)
    }

    /// Whitespace triangle in the figures' layout.
    pub fn to_text_triangle(&self) -> String {
        let rows = self.rows();
        let width = rows
            .iter()
            .flatten()
            .map(|v| format_q(v).len())
            .max()
            .unwrap_or(1)
            + 1;
        let maxlen = rows.last().map_or(0, Vec::len);
        let mut out = String::new();
        for row in &rows {
            out.push_str(&" ".repeat((maxlen - row.len()) * width / 2));
            for v in row {
                out.push_str(&format!("{:>width$}", format_q(v), width = width));
            }
            out.push('\n');
        }
        out
    }
}

/// Order verdict for one diagonal.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum DiagonalOrder {
    /// Minimal `k` whose `(k+1)`-st forward differences vanish across the
    /// window; `identically_zero` flags the all-zero diagonal.
    Order { k: usize, identically_zero: bool },
    /// Too few samples, or no admissible `k` fits the window.
    Undetermined,
}

/// Window-relative order from samples. An identically-zero diagonal reports
/// order 0 with the zero flag at any length; otherwise verdict `k` needs
/// `k + 3` samples so the vanishing of the `(k+1)`-st differences is
/// witnessed at least twice.
pub fn diagonal_order_of(samples: &[Q]) -> DiagonalOrder {
    if !samples.is_empty() && samples.iter().all(Zero::is_zero) {
        return DiagonalOrder::Order {
            k: 0,
            identically_zero: true,
        };
    }
    let s = samples.len();
    if s < 3 {
        return DiagonalOrder::Undetermined;
    }
    let mut diffs = samples.to_vec();
    for k in 0..=s - 3 {
        // diffs currently holds the k-th differences; check the (k+1)-st
        let next: Vec<Q> = diffs.windows(2).map(|w| &w[1] - &w[0]).collect();
        if next.iter().all(Zero::is_zero) {
            return DiagonalOrder::Order {
                k,
                identically_zero: false,
            };
        }
        diffs = next;
    }
    DiagonalOrder::Undetermined
}

/// True if the samples agree with some polynomial of degree at most `k` on
/// the whole window, i.e. all computable `(k+1)`-st differences vanish
/// (vacuously true for short windows).
pub fn consistent_with_degree(samples: &[Q], k: usize) -> bool {
    if samples.len() <= k + 1 {
        return true;
    }
    let mut diffs = samples.to_vec();
    for _ in 0..=k {
        diffs = diffs.windows(2).map(|w| &w[1] - &w[0]).collect();
    }
    diffs.iter().all(Zero::is_zero)
}

#[derive(Clone, Debug)]
pub struct OrderReport {
    pub per_diagonal: BTreeMap<usize, DiagonalOrder>,
    pub window_sizes: BTreeMap<usize, usize>,
    /// See `LambdaArray::strong_order` for the verdict rule.
    pub strong: Option<usize>,
    /// Whether the strong verdict is witnessed exactly on the leftmost
    /// diagonal (it always is when `strong` is set).
    pub leftmost_exact: bool,
}
