#![allow(dead_code)]

use dbnsep::model::{parse_model, DbnModel};
use dbnsep::prob::{Scope, Variable};
use rand::Rng;
use rand_chacha::ChaCha8Rng;
use serde_json::json;

pub fn scope(vars: &[(&str, usize)]) -> Scope {
    Scope::new(vars.iter().map(|&(n, c)| Variable::new(n, c).unwrap()).collect()).unwrap()
}

pub fn random_row(rng: &mut ChaCha8Rng, n: usize) -> Vec<f64> {
    let w: Vec<f64> = (0..n).map(|_| rng.gen_range(0.01..1.0)).collect();
    let s: f64 = w.iter().sum();
    w.into_iter().map(|v| v / s).collect()
}

pub fn random_rows(rng: &mut ChaCha8Rng, rows: usize, n: usize) -> Vec<Vec<f64>> {
    (0..rows).map(|_| random_row(rng, n)).collect()
}

/// Rows of `P(child | X-, Y-)` mixing an own-chain table with a cross-chain
/// table; `weight` is the own-chain share.
fn mixed_rows(rng: &mut ChaCha8Rng, cx: usize, cy: usize, child_is_x: bool, weight: f64) -> Vec<Vec<f64>> {
    let (own, other) = if child_is_x { (cx, cy) } else { (cy, cx) };
    let a = random_rows(rng, own, own);
    let b = random_rows(rng, other, own);
    let mut rows = Vec::with_capacity(cx * cy);
    for i in 0..cx {
        for j in 0..cy {
            let (o, t) = if child_is_x { (i, j) } else { (j, i) };
            rows.push((0..own).map(|z| weight * a[o][z] + (1.0 - weight) * b[t][z]).collect());
        }
    }
    rows
}

fn two_chain_doc(
    rng: &mut ChaCha8Rng,
    cx: usize,
    cy: usize,
    tx: Vec<Vec<f64>>,
    ty: Vec<Vec<f64>>,
    joint_prior: bool,
) -> DbnModel {
    let prior = if joint_prior {
        json!({"type": "joint", "table": random_row(rng, cx * cy)})
    } else {
        json!({"type": "product", "tables": {"0": random_row(rng, cx), "1": random_row(rng, cy)}})
    };
    let doc = json!({
        "variables": [{"name": "X", "card": cx}, {"name": "Y", "card": cy}],
        "factorization": [["X"], ["Y"]],
        "transition": [
            {"child": "X", "parents": ["X", "Y"], "table": tx},
            {"child": "Y", "parents": ["X", "Y"], "table": ty},
        ],
        "observations": [
            {"name": "OX", "card": 2, "parents": ["X"], "table": random_rows(rng, cx, 2)},
            {"name": "OY", "card": 3, "parents": ["Y"], "table": random_rows(rng, cy, 3)},
        ],
        "prior": prior,
    });
    parse_model(&doc.to_string()).unwrap()
}

/// Two single-variable factors of cardinality 2 or 3 whose transitions are
/// separable across the factors.
pub fn random_separable_model(rng: &mut ChaCha8Rng, joint_prior: bool) -> DbnModel {
    let cx = rng.gen_range(2..=3);
    let cy = rng.gen_range(2..=3);
    let wx = rng.gen_range(0.0..1.0);
    let wy = rng.gen_range(0.0..1.0);
    let tx = mixed_rows(rng, cx, cy, true, wx);
    let ty = mixed_rows(rng, cx, cy, false, wy);
    two_chain_doc(rng, cx, cy, tx, ty, joint_prior)
}

/// Two chains that never influence each other.
pub fn random_uncoupled_model(rng: &mut ChaCha8Rng) -> DbnModel {
    let cx = rng.gen_range(2..=3);
    let cy = rng.gen_range(2..=3);
    let tx = mixed_rows(rng, cx, cy, true, 1.0);
    let ty = mixed_rows(rng, cx, cy, false, 1.0);
    two_chain_doc(rng, cx, cy, tx, ty, false)
}

/// Two chains with arbitrary (generally non-separable) transitions.
pub fn random_coupled_model(rng: &mut ChaCha8Rng) -> DbnModel {
    let cx = rng.gen_range(2..=3);
    let cy = rng.gen_range(2..=3);
    let tx = random_rows(rng, cx * cy, cx);
    let ty = random_rows(rng, cx * cy, cy);
    two_chain_doc(rng, cx, cy, tx, ty, false)
}
