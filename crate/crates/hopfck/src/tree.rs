//! Canonical unordered rooted trees and forests.
//!
//! A `Tree` stores its children sorted by the canonical key
//! `(size, canonical string)`, so two isomorphic unordered trees have
//! identical representations and compare equal. A `Forest` is a multiset of
//! trees kept sorted by the same key; the empty forest is the algebra unit.
//!
//! Text grammar: `T := "o" | "o[" T ("," T)* "]"`, whitespace ignored;
//! forests are trees joined by `*`, the empty forest prints as `1`.

use std::cmp::Ordering;
use std::collections::HashMap;
use std::fmt;
use std::hash::{Hash, Hasher};
use std::sync::{Arc, Mutex, OnceLock};

use num_bigint::BigInt;
use num_traits::One;

use crate::error::{Error, Result};

#[derive(Clone, Debug)]
pub struct Tree {
    size: usize,
    repr: String,
    children: Vec<Tree>,
}

impl Tree {
    /// The single-vertex tree.
    pub fn leaf() -> Tree {
        Tree {
            size: 1,
            repr: "o".to_string(),
            children: Vec::new(),
        }
    }

    /// Builds a tree from its children, canonicalizing their order.
    pub fn node(mut children: Vec<Tree>) -> Tree {
        children.sort();
        let size = 1 + children.iter().map(|c| c.size).sum::<usize>();
        let repr = if children.is_empty() {
            "o".to_string()
        } else {
            let mut s = String::from("o[");
            for (k, c) in children.iter().enumerate() {
                if k > 0 {
                    s.push(',');
                }
                s.push_str(&c.repr);
            }
            s.push(']');
            s
        };
        Tree {
            size,
            repr,
            children,
        }
    }

    /// Ladder with `n` vertices (`n >= 1`): a path rooted at one end.
    pub fn ladder(n: usize) -> Tree {
        assert!(n >= 1);
        let mut t = Tree::leaf();
        for _ in 1..n {
            t = Tree::node(vec![t]);
        }
        t
    }

    /// Corolla with `n` vertices: all children of the root are leaves.
    pub fn corolla(n: usize) -> Tree {
        assert!(n >= 1);
        Tree::node(vec![Tree::leaf(); n - 1])
    }

    pub fn size(&self) -> usize {
        self.size
    }

    pub fn children(&self) -> &[Tree] {
        &self.children
    }

    pub fn is_leaf(&self) -> bool {
        self.children.is_empty()
    }

    /// Canonical string form.
    pub fn repr(&self) -> &str {
        &self.repr
    }

    /// Parses the grammar `T := "o" | "o[" T ("," T)* "]"`; insensitive to
    /// child order in the input (the result is canonical).
    pub fn parse(s: &str) -> Result<Tree> {
        let mut p = Parser::new(s);
        let t = p.tree()?;
        p.end()?;
        Ok(t)
    }

    /// Number of rooted-tree automorphisms.
    pub fn symmetry_factor(&self) -> BigInt {
        let mut acc = BigInt::one();
        let mut run = 1usize;
        for (k, c) in self.children.iter().enumerate() {
            acc *= c.symmetry_factor();
            if k > 0 && self.children[k - 1] == *c {
                run += 1;
                acc *= BigInt::from(run);
            } else {
                run = 1;
            }
        }
        acc
    }

    /// Tree factorial: product over vertices of the sizes of their subtrees.
    pub fn tree_factorial(&self) -> BigInt {
        let mut acc = BigInt::from(self.size);
        for c in &self.children {
            acc *= c.tree_factorial();
        }
        acc
    }

    /// All admissible cuts: non-empty edge subsets with no two edges on a
    /// common root-to-leaf path. Generated by recursion over edges, not by
    /// filtering all `2^E` subsets.
    pub fn admissible_cuts(&self) -> Vec<Cut> {
        // options per child: cut the edge, or keep it with any
        // admissible-or-empty cut of the child
        let mut cuts = Vec::new();
        let mut removed: Vec<Tree> = Vec::new();
        let mut kept: Vec<Tree> = Vec::new();
        self.cut_rec(0, false, &mut removed, &mut kept, &mut cuts);
        cuts
    }

    fn cut_rec(
        &self,
        child_idx: usize,
        nonempty: bool,
        removed: &mut Vec<Tree>,
        kept: &mut Vec<Tree>,
        out: &mut Vec<Cut>,
    ) {
        if child_idx == self.children.len() {
            if nonempty {
                let id = out.len();
                out.push(Cut {
                    removed_part: Forest::from_trees(removed.clone()),
                    root_part: Tree::node(kept.clone()),
                    edge_subset_id: id,
                });
            }
            return;
        }
        let child = &self.children[child_idx];
        // cut this edge: the whole child subtree moves to the removed part
        removed.push(child.clone());
        self.cut_rec(child_idx + 1, true, removed, kept, out);
        removed.pop();
        // keep this edge, empty sub-cut
        kept.push(child.clone());
        self.cut_rec(child_idx + 1, nonempty, removed, kept, out);
        kept.pop();
        // keep this edge, non-empty sub-cut inside the child
        for sub in child.admissible_cuts() {
            let before = removed.len();
            removed.extend(sub.removed_part.trees().iter().cloned());
            kept.push(sub.root_part);
            self.cut_rec(child_idx + 1, true, removed, kept, out);
            kept.pop();
            removed.truncate(before);
        }
    }
}

impl PartialEq for Tree {
    fn eq(&self, other: &Self) -> bool {
        self.repr == other.repr
    }
}
impl Eq for Tree {}

impl PartialOrd for Tree {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for Tree {
    fn cmp(&self, other: &Self) -> Ordering {
        self.size
            .cmp(&other.size)
            .then_with(|| self.repr.cmp(&other.repr))
    }
}

impl Hash for Tree {
    fn hash<H: Hasher>(&self, state: &mut H) {
        self.repr.hash(state);
    }
}

impl fmt::Display for Tree {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.repr)
    }
}

/// A multiset of trees; the monomials of the Hopf algebra.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Forest {
    trees: Vec<Tree>, // sorted by the canonical key
}

impl Forest {
    /// The empty forest (the unit monomial).
    pub fn empty() -> Forest {
        Forest { trees: Vec::new() }
    }

    pub fn single(t: Tree) -> Forest {
        Forest { trees: vec![t] }
    }

    pub fn from_trees(mut trees: Vec<Tree>) -> Forest {
        trees.sort();
        Forest { trees }
    }

    pub fn trees(&self) -> &[Tree] {
        &self.trees
    }

    pub fn is_empty(&self) -> bool {
        self.trees.is_empty()
    }

    /// Total vertex count.
    pub fn size(&self) -> usize {
        self.trees.iter().map(|t| t.size()).sum()
    }

    /// The single tree of a one-tree forest.
    pub fn as_single_tree(&self) -> Option<&Tree> {
        if self.trees.len() == 1 {
            Some(&self.trees[0])
        } else {
            None
        }
    }

    /// Multiset union (the algebra product on monomials).
    pub fn mul(&self, other: &Forest) -> Forest {
        let mut trees = self.trees.clone();
        trees.extend(other.trees.iter().cloned());
        Forest::from_trees(trees)
    }

    /// Product of the trees' symmetry factors times multiplicity factorials.
    pub fn symmetry_factor(&self) -> BigInt {
        let mut acc = BigInt::one();
        let mut run = 1usize;
        for (k, t) in self.trees.iter().enumerate() {
            acc *= t.symmetry_factor();
            if k > 0 && self.trees[k - 1] == *t {
                run += 1;
                acc *= BigInt::from(run);
            } else {
                run = 1;
            }
        }
        acc
    }

    pub fn tree_factorial(&self) -> BigInt {
        let mut acc = BigInt::one();
        for t in &self.trees {
            acc *= t.tree_factorial();
        }
        acc
    }

    /// Parses `1` or `T ("*" T)*`.
    pub fn parse(s: &str) -> Result<Forest> {
        let mut p = Parser::new(s);
        p.skip_ws();
        if p.peek() == Some(b'1') {
            p.bump();
            p.end()?;
            return Ok(Forest::empty());
        }
        let mut trees = vec![p.tree()?];
        loop {
            p.skip_ws();
            match p.peek() {
                Some(b'*') => {
                    p.bump();
                    trees.push(p.tree()?);
                }
                None => break,
                Some(c) => {
                    return Err(Error::Parse {
                        pos: p.pos,
                        msg: format!("expected '*' or end, found {:?}", c as char),
                    })
                }
            }
        }
        Ok(Forest::from_trees(trees))
    }
}

impl PartialOrd for Forest {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for Forest {
    fn cmp(&self, other: &Self) -> Ordering {
        self.size()
            .cmp(&other.size())
            .then_with(|| self.trees.cmp(&other.trees))
    }
}

impl fmt::Display for Forest {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.trees.is_empty() {
            return f.write_str("1");
        }
        for (k, t) in self.trees.iter().enumerate() {
            if k > 0 {
                f.write_str("*")?;
            }
            f.write_str(t.repr())?;
        }
        Ok(())
    }
}

/// One admissible cut of a tree: the cut-away forest and the root component.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Cut {
    pub removed_part: Forest,
    pub root_part: Tree,
    pub edge_subset_id: usize,
}

// ---------------------------------------------------------------------------
// parsing
// ---------------------------------------------------------------------------

struct Parser<'a> {
    bytes: &'a [u8],
    pos: usize,
}

impl<'a> Parser<'a> {
    fn new(s: &'a str) -> Self {
        Parser {
            bytes: s.as_bytes(),
            pos: 0,
        }
    }

    fn skip_ws(&mut self) {
        while self.pos < self.bytes.len() && self.bytes[self.pos].is_ascii_whitespace() {
            self.pos += 1;
        }
    }

    fn peek(&mut self) -> Option<u8> {
        self.skip_ws();
        self.bytes.get(self.pos).copied()
    }

    fn bump(&mut self) {
        self.pos += 1;
    }

    fn expect(&mut self, c: u8) -> Result<()> {
        match self.peek() {
            Some(x) if x == c => {
                self.bump();
                Ok(())
            }
            found => Err(Error::Parse {
                pos: self.pos,
                msg: format!(
                    "expected {:?}, found {}",
                    c as char,
                    found.map_or("end of input".to_string(), |x| format!("{:?}", x as char))
                ),
            }),
        }
    }

    fn tree(&mut self) -> Result<Tree> {
        self.expect(b'o')?;
        if self.peek() == Some(b'[') {
            self.bump();
            let mut children = vec![self.tree()?];
            loop {
                match self.peek() {
                    Some(b',') => {
                        self.bump();
                        children.push(self.tree()?);
                    }
                    Some(b']') => {
                        self.bump();
                        break;
                    }
                    found => {
                        return Err(Error::Parse {
                            pos: self.pos,
                            msg: format!(
                                "expected ',' or ']', found {}",
                                found.map_or("end of input".to_string(), |x| format!(
                                    "{:?}",
                                    x as char
                                ))
                            ),
                        })
                    }
                }
            }
            Ok(Tree::node(children))
        } else {
            Ok(Tree::leaf())
        }
    }

    fn end(&mut self) -> Result<()> {
        match self.peek() {
            None => Ok(()),
            Some(c) => Err(Error::Parse {
                pos: self.pos,
                msg: format!("trailing input starting with {:?}", c as char),
            }),
        }
    }
}

// ---------------------------------------------------------------------------
// enumeration
// ---------------------------------------------------------------------------

/// Enumeration bound: `HOPFCK_NMAX` env var, default 10.
pub fn enumeration_bound() -> usize {
    static BOUND: OnceLock<usize> = OnceLock::new();
    *BOUND.get_or_init(|| {
        std::env::var("HOPFCK_NMAX")
            .ok()
            .and_then(|s| s.parse().ok())
            .unwrap_or(10)
    })
}

fn tree_table() -> &'static Mutex<HashMap<usize, Arc<Vec<Tree>>>> {
    static TABLE: OnceLock<Mutex<HashMap<usize, Arc<Vec<Tree>>>>> = OnceLock::new();
    TABLE.get_or_init(|| Mutex::new(HashMap::new()))
}

/// All canonical rooted trees with `n` vertices, in canonical order. Memoized.
pub fn enumerate_trees(n: usize) -> Result<Arc<Vec<Tree>>> {
    if n == 0 {
        return Err(Error::Precondition("tree size must be positive".into()));
    }
    let max = enumeration_bound();
    if n > max {
        return Err(Error::BoundExceeded { n, max });
    }
    if let Some(hit) = tree_table().lock().unwrap().get(&n) {
        return Ok(hit.clone());
    }
    let result: Vec<Tree> = if n == 1 {
        vec![Tree::leaf()]
    } else {
        let mut out: Vec<Tree> = enumerate_forests(n - 1)?
            .iter()
            .map(|f| Tree::node(f.trees().to_vec()))
            .collect();
        out.sort();
        out.dedup();
        out
    };
    let arc = Arc::new(result);
    tree_table()
        .lock()
        .unwrap()
        .insert(n, arc.clone());
    Ok(arc)
}

/// All canonical forests (multisets of trees) with total size `n`,
/// in canonical order; `n = 0` yields only the empty forest.
pub fn enumerate_forests(n: usize) -> Result<Vec<Forest>> {
    let mut out = Vec::new();
    let mut acc: Vec<Tree> = Vec::new();
    forests_rec(n, None, &mut acc, &mut out)?;
    out.sort();
    Ok(out)
}

fn forests_rec(
    remaining: usize,
    min_tree: Option<&Tree>,
    acc: &mut Vec<Tree>,
    out: &mut Vec<Forest>,
) -> Result<()> {
    if remaining == 0 {
        out.push(Forest::from_trees(acc.clone()));
        return Ok(());
    }
    for s in 1..=remaining {
        let trees = enumerate_trees(s)?;
        for t in trees.iter() {
            if let Some(m) = min_tree {
                if t < m {
                    continue;
                }
            }
            acc.push(t.clone());
            forests_rec(remaining - s, Some(t), acc, out)?;
            acc.pop();
        }
    }
    Ok(())
}

/// Position of `t` among the canonical trees of its size.
pub fn canonical_rank(t: &Tree) -> Result<usize> {
    let all = enumerate_trees(t.size())?;
    all.iter()
        .position(|u| u == t)
        .ok_or_else(|| Error::Precondition(format!("tree {t} not found in enumeration")))
}
