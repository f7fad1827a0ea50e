//! Golden fixture regeneration: the worked sequences, arrays and series the
//! test suite pins down, written as diff-friendly pretty JSON.

use std::fs;
use std::path::Path;

use serde_json::{json, Value};

use hopfck::classify::{self, FamilySpec};
use hopfck::elem::Elem;
use hopfck::error::{Error, Result};
use hopfck::hopf::coproduct;
use hopfck::lambda::LambdaArray;
use hopfck::rational::{format_q, q};
use hopfck::seq::{self, PowerSeries, Seq};
use hopfck::tree::Tree;

fn fixtures() -> Result<Vec<(&'static str, Value)>> {
    let mut out: Vec<(&'static str, Value)> = Vec::new();

    out.push(("cm_sequence.json", seq::family_cm(5).to_json()));
    out.push((
        "cm_lambda.json",
        LambdaArray::extract(&seq::family_cm(8))?.to_json(),
    ));

    let binary = seq::dse_solve(&PowerSeries::new(vec![q(1), q(2), q(1)]), 4)?;
    out.push(("dse_binary.json", binary.to_json()));
    out.push((
        "dse_plane.json",
        seq::dse_solve(&PowerSeries::geometric(4), 4)?.to_json(),
    ));

    let base = Seq::new(
        vec![
            Elem::from_tree(Tree::leaf()),
            Elem::from_tree(Tree::ladder(2)),
        ],
        Some("ladder prefix".into()),
    )?;
    let x = Elem::parse("2 * o[o] + -1 * o*o")?;
    let prelie = seq::family_prelie_ext(&base, &x, 8)?;
    out.push(("prelie_ext_sequence.json", prelie.truncate(5).to_json()));
    out.push((
        "prelie_ext_lambda.json",
        LambdaArray::extract(&prelie)?.to_json(),
    ));

    let z = seq::family_zn(3, &q(2), 5)?;
    out.push(("z3_b2_sequence.json", z.to_json()));
    out.push((
        "z3_b2_lambda.json",
        classify::family_array(&FamilySpec::Z { n: 3, b: q(2) }, 8)?.to_json(),
    ));

    out.push((
        "abc_111_sequence.json",
        seq::family_abc(&q(1), &q(1), &q(1), 5)?.to_json(),
    ));

    out.push((
        "ladders_with_leaves_2_3.json",
        seq::family_ladders_with_leaves(&q(2), &q(3), 5)?.to_json(),
    ));

    let mut corolla_coproducts = Vec::new();
    for n in 2..=6 {
        corolla_coproducts.push(json!({
            "n": n,
            "coproduct": coproduct(&Elem::from_tree(Tree::corolla(n))).to_json(),
        }));
    }
    out.push(("corolla_coproducts.json", Value::Array(corolla_coproducts)));

    for (m, name) in [(2usize, "seq01_an_m2.json"), (3, "seq01_an_m3.json")] {
        let rows: Vec<Value> = (0..=8)
            .map(|n| json!({"n": n, "a_n": format_q(&classify::seq01_an(m, n))}))
            .collect();
        out.push((name, Value::Array(rows)));
    }

    Ok(out)
}

/// Writes every fixture under `dir`; deterministic, so regeneration is a
/// no-op diff when nothing changed.
pub fn regen(dir: &str) -> Result<()> {
    let path = Path::new(dir);
    fs::create_dir_all(path).map_err(io_err)?;
    for (name, value) in fixtures()? {
        let mut text = serde_json::to_string_pretty(&value).expect("fixture serializes");
        text.push('\n');
        fs::write(path.join(name), text).map_err(io_err)?;
    }
    Ok(())
}

/// Compares the fixtures under `dir` against freshly computed values.
/// Returns the mismatching file names.
pub fn check(dir: &str) -> Result<Vec<String>> {
    let path = Path::new(dir);
    let mut bad = Vec::new();
    for (name, value) in fixtures()? {
        let mut text = serde_json::to_string_pretty(&value).expect("fixture serializes");
        text.push('\n');
        match fs::read_to_string(path.join(name)) {
            Ok(found) if found == text => {}
            _ => bad.push(name.to_string()),
        }
    }
    Ok(bad)
}

fn io_err(e: std::io::Error) -> Error {
    Error::Precondition(format!("fixture I/O failed: {e}"))
}
