//! The Hopf-algebra structure: coproduct, counit, antipode, the add-a-root
//! cocycle, the growth operator and the pre-Lie graft product.
//!
//! The coproduct on a tree is the admissible-cut sum
//! `Delta(t) = t (x) 1 + 1 (x) t + sum_c P^c(t) (x) R^c(t)`, extended to
//! forests multiplicatively and to `Elem`s linearly. The antipode follows the
//! recursion `S(t) = -t - sum_c S(P^c(t)) R^c(t)`; the algebra is commutative
//! so S extends as an algebra morphism. Per-tree results are memoized behind
//! a mutex, so everything here is safe to call concurrently.

use std::collections::HashMap;
use std::sync::{Mutex, OnceLock};

use num_traits::One;

use crate::elem::{Elem, TensorElem};
use crate::rational::Q;
use crate::tree::{Forest, Tree};

fn coproduct_table() -> &'static Mutex<HashMap<Tree, TensorElem>> {
    static TABLE: OnceLock<Mutex<HashMap<Tree, TensorElem>>> = OnceLock::new();
    TABLE.get_or_init(|| Mutex::new(HashMap::new()))
}

fn antipode_table() -> &'static Mutex<HashMap<Tree, Elem>> {
    static TABLE: OnceLock<Mutex<HashMap<Tree, Elem>>> = OnceLock::new();
    TABLE.get_or_init(|| Mutex::new(HashMap::new()))
}

fn coproduct_of_tree(t: &Tree) -> TensorElem {
    if let Some(hit) = coproduct_table().lock().unwrap().get(t) {
        return hit.clone();
    }
    let mut out = TensorElem::term(Forest::single(t.clone()), Forest::empty(), Q::one());
    out.add_term(Forest::empty(), Forest::single(t.clone()), Q::one());
    for cut in t.admissible_cuts() {
        out.add_term(cut.removed_part, Forest::single(cut.root_part), Q::one());
    }
    coproduct_table()
        .lock()
        .unwrap()
        .insert(t.clone(), out.clone());
    out
}

fn coproduct_of_forest(f: &Forest) -> TensorElem {
    let mut out = TensorElem::term(Forest::empty(), Forest::empty(), Q::one());
    for t in f.trees() {
        out = out.mul(&coproduct_of_tree(t));
    }
    out
}

/// The coproduct, linear in its argument.
pub fn coproduct(x: &Elem) -> TensorElem {
    let mut out = TensorElem::zero();
    for (f, c) in x.terms() {
        out = out.add(&coproduct_of_forest(f).scale(c));
    }
    out
}

/// Counit: 0 on every non-empty forest.
pub fn counit(x: &Elem) -> Q {
    x.counit()
}

fn antipode_of_tree(t: &Tree) -> Elem {
    if let Some(hit) = antipode_table().lock().unwrap().get(t) {
        return hit.clone();
    }
    let mut out = Elem::from_tree(t.clone()).neg();
    for cut in t.admissible_cuts() {
        let sp = antipode_of_forest(&cut.removed_part);
        let term = sp.mul(&Elem::from_tree(cut.root_part));
        out = out.sub(&term);
    }
    antipode_table()
        .lock()
        .unwrap()
        .insert(t.clone(), out.clone());
    out
}

fn antipode_of_forest(f: &Forest) -> Elem {
    let mut out = Elem::one();
    for t in f.trees() {
        out = out.mul(&antipode_of_tree(t));
    }
    out
}

/// The antipode, extended as an algebra morphism.
pub fn antipode(x: &Elem) -> Elem {
    let mut out = Elem::zero();
    for (f, c) in x.terms() {
        out = out.add(&antipode_of_forest(f).scale(c));
    }
    out
}

/// The add-a-root operator: a forest becomes the tree whose root's children
/// are the forest's roots. Linear.
pub fn bplus(x: &Elem) -> Elem {
    let mut out = Elem::zero();
    for (f, c) in x.terms() {
        out.add_term(
            Forest::single(Tree::node(f.trees().to_vec())),
            c.clone(),
        );
    }
    out
}

/// Sum over vertices of `host` of attaching `scion`'s root as a new child.
pub fn graft_all(host: &Tree, scion: &Tree) -> Elem {
    let mut out = Elem::zero();
    for (t, mult) in graft_forest_at_vertices(host, std::slice::from_ref(scion)) {
        out.add_term(Forest::single(t), Q::from_integer((mult as i64).into()));
    }
    out
}

/// Grafts all roots of `scions` onto one vertex of `host`, summed over the
/// host's vertices; returns (resulting tree, multiplicity) pairs.
fn graft_forest_at_vertices(host: &Tree, scions: &[Tree]) -> Vec<(Tree, usize)> {
    let mut acc: HashMap<Tree, usize> = HashMap::new();
    // graft at the root
    let mut kids = host.children().to_vec();
    kids.extend(scions.iter().cloned());
    *acc.entry(Tree::node(kids)).or_insert(0) += 1;
    // graft inside each child
    for (i, child) in host.children().iter().enumerate() {
        for (g, m) in graft_forest_at_vertices(child, scions) {
            let mut kids = host.children().to_vec();
            kids[i] = g;
            *acc.entry(Tree::node(kids)).or_insert(0) += m;
        }
    }
    acc.into_iter().collect()
}

/// The growth operator: grafts a new leaf at every vertex.
pub fn growth(x: &Elem) -> Elem {
    prelie_graft(x, &Elem::from_tree(Tree::leaf()))
}

/// The pre-Lie graft product on the algebra: on forests,
/// `f . f' = sum over vertices s of f of (f with all roots of f' grafted
/// onto s)`; bilinear. Grafting the empty forest leaves the forest unchanged,
/// so `f . 1 = |f| f` on a forest with `|f|` vertices.
pub fn prelie_graft(x: &Elem, y: &Elem) -> Elem {
    let mut out = Elem::zero();
    for (fx, cx) in x.terms() {
        for (fy, cy) in y.terms() {
            let c = cx * cy;
            // choose the tree of fx and the vertex inside it
            for (i, t) in fx.trees().iter().enumerate() {
                for (g, m) in graft_forest_at_vertices(t, fy.trees()) {
                    let mut trees = fx.trees().to_vec();
                    trees[i] = g;
                    out.add_term(
                        Forest::from_trees(trees),
                        &c * Q::from_integer((m as i64).into()),
                    );
                }
            }
        }
    }
    out
}
