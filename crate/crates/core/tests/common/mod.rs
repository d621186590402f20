//! Generators and naive reference implementations shared by the property and
//! acceptance tests.
#![allow(dead_code)]

use std::collections::{BTreeSet, HashMap};

use fid_core::oracle::{scm_for_admg, Evaluator, JointTable};
use fid_core::perturb::gen_er_admg_with;
use fid_core::{all_pairs, Admg, Cap, EstimandStatus, Expr, Identifier, MixedGraph, NodeId};
use rand::seq::SliceRandom;
use rand::Rng;

pub const VARS: [&str; 4] = ["a", "b", "c", "d"];

pub fn id(s: &str) -> NodeId {
    NodeId::new(s).unwrap()
}

/// ADMG with 2..=`max_n` nodes, random directed density and up to three
/// bidirected edges.
pub fn random_admg<R: Rng>(rng: &mut R, max_n: usize) -> Admg {
    let n = rng.random_range(2..=max_n);
    let n_bi = rng.random_range(0..=(n * (n - 1) / 2).min(3));
    let p = rng.random_range(0.1..0.9);
    gen_er_admg_with(n, p, n_bi, rng).unwrap()
}

fn random_subset<R: Rng>(rng: &mut R, from: &[NodeId], min: usize) -> Vec<NodeId> {
    let mut v = from.to_vec();
    v.shuffle(rng);
    let k = rng.random_range(min.min(v.len())..=v.len());
    v.truncate(k);
    v
}

/// Random expression over [`VARS`]. Integrals never rebind a variable bound
/// by an enclosing integral.
pub fn random_expr<R: Rng>(rng: &mut R, depth: usize) -> Expr {
    gen(rng, depth, &BTreeSet::new())
}

fn gen<R: Rng>(rng: &mut R, depth: usize, bound: &BTreeSet<NodeId>) -> Expr {
    let all: Vec<NodeId> = VARS.iter().map(|v| id(v)).collect();
    let choice = if depth == 0 { 0 } else { rng.random_range(0..5) };
    match choice {
        0 | 1 => {
            let vars = random_subset(rng, &all, 1);
            let rest: Vec<NodeId> = all.iter().filter(|v| !vars.contains(v)).cloned().collect();
            if rng.random_bool(0.3) && !rest.is_empty() {
                let given = random_subset(rng, &rest, 1);
                Expr::cond(vars, given)
            } else {
                Expr::p(vars)
            }
        }
        2 => {
            let k = rng.random_range(2..=3);
            Expr::product((0..k).map(|_| gen(rng, depth - 1, bound)).collect())
        }
        3 => Expr::fraction(gen(rng, depth - 1, bound), gen(rng, depth - 1, bound)),
        _ => {
            let free: Vec<NodeId> = all.iter().filter(|v| !bound.contains(*v)).cloned().collect();
            if free.is_empty() {
                return gen(rng, depth - 1, bound);
            }
            let vars = random_subset(rng, &free, 1);
            let mut inner = bound.clone();
            inner.extend(vars.iter().cloned());
            Expr::integral(vars, gen(rng, depth - 1, &inner))
        }
    }
}

/// Strictly positive joint table over [`VARS`] from a complete DAG.
pub fn positive_table(seed: u64) -> JointTable {
    let edges: Vec<(&str, &str)> = (0..4).flat_map(|i| ((i + 1)..4).map(move |j| (VARS[i], VARS[j]))).collect();
    let g = Admg::dag(&VARS, &edges).unwrap();
    scm_for_admg(&g, 2, seed).unwrap().observational()
}

/// Largest relative difference between `a` and `b` over every binary
/// assignment of their free variables.
pub fn numeric_gap(a: &Expr, b: &Expr, table: &JointTable) -> f64 {
    let mut free: BTreeSet<NodeId> = a.free_vars();
    free.extend(b.free_vars());
    let free: Vec<NodeId> = free.into_iter().collect();
    let mut ev = Evaluator::new(table);
    let mut worst: f64 = 0.0;
    for bits in 0..(1usize << free.len()) {
        let mut asg: HashMap<NodeId, usize> = HashMap::new();
        for (k, v) in free.iter().enumerate() {
            asg.insert(v.clone(), bits >> k & 1);
        }
        let x = ev.eval(a, &mut asg).unwrap();
        let y = ev.eval(b, &mut asg).unwrap();
        worst = worst.max((x - y).abs() / x.abs().max(y.abs()).max(1.0));
    }
    worst
}

/// m-connection by enumerating simple paths: every collider is an ancestor
/// of `z` (or in it) and no non-collider is in `z`.
pub fn m_connected_by_paths<G: MixedGraph>(g: &G, x: usize, y: usize, z: &[usize]) -> bool {
    let n = g.len();
    let an_z: BTreeSet<usize> = {
        let mut s: BTreeSet<usize> = z.iter().copied().collect();
        let mut stack: Vec<usize> = z.to_vec();
        while let Some(v) = stack.pop() {
            for p in 0..n {
                if g.pa_set(v).contains(p) && s.insert(p) {
                    stack.push(p);
                }
            }
        }
        s
    };
    // edges out of v: (neighbour, arrowhead at v, arrowhead at neighbour)
    let steps = |v: usize| -> Vec<(usize, bool, bool)> {
        let mut out = Vec::new();
        for w in 0..n {
            if g.ch_set(v).contains(w) {
                out.push((w, false, true));
            }
            if g.pa_set(v).contains(w) {
                out.push((w, true, false));
            }
            if g.sib_set(v).contains(w) {
                out.push((w, true, true));
            }
        }
        out
    };
    fn walk(
        v: usize,
        head_in: bool,
        y: usize,
        visited: &mut Vec<bool>,
        z: &[usize],
        an_z: &BTreeSet<usize>,
        steps: &dyn Fn(usize) -> Vec<(usize, bool, bool)>,
    ) -> bool {
        for (w, head_at_v, head_at_w) in steps(v) {
            if visited[w] {
                continue;
            }
            let collider = head_in && head_at_v;
            let ok = if collider { an_z.contains(&v) } else { !z.contains(&v) };
            if !ok {
                continue;
            }
            if w == y {
                return true;
            }
            visited[w] = true;
            if walk(w, head_at_w, y, visited, z, an_z, steps) {
                return true;
            }
            visited[w] = false;
        }
        false
    }
    let mut visited = vec![false; n];
    visited[x] = true;
    // the start node is never tested as a collider or non-collider
    for (w, _, head_at_w) in steps(x) {
        if w == y {
            return true;
        }
        visited[w] = true;
        if walk(w, head_at_w, y, &mut visited, z, &an_z, &steps) {
            return true;
        }
        visited[w] = false;
    }
    false
}

/// Worst errors of the estimands of `g` on a random binary model: total
/// variation from the true interventional distribution, and the largest
/// difference between two estimands of the same pair.
pub fn estimand_errors(g: &Admg, seed: u64) -> (f64, f64) {
    let scm = scm_for_admg(g, 2, seed).unwrap();
    let obs = scm.observational();
    let mut ev = Evaluator::new(&obs);
    let mut ident = Identifier::new(g, Cap::DEFAULT);
    let (mut truth_err, mut pair_err): (f64, f64) = (0.0, 0.0);
    for q in all_pairs(g) {
        let set = ident.identify(&q).unwrap();
        if set.status == EstimandStatus::NotIdentifiable {
            continue;
        }
        // variables other than T and Y may stay free when the kernel does
        // not depend on them; every value must give the same answer
        let mut extra: BTreeSet<NodeId> = set.exprs.iter().flat_map(|e| e.free_vars()).collect();
        extra.remove(&q.treatment);
        extra.remove(&q.outcome);
        let extra: Vec<NodeId> = extra.into_iter().collect();
        for t in 0..2 {
            let truth = scm.interventional(q.treatment.as_str(), t).unwrap();
            let ty = truth.marginal(std::slice::from_ref(&q.outcome)).unwrap();
            for bits in 0..(1usize << extra.len()) {
                let mut a: HashMap<NodeId, usize> = HashMap::new();
                for (k, v) in extra.iter().enumerate() {
                    a.insert(v.clone(), bits >> k & 1);
                }
                a.insert(q.treatment.clone(), t);
                let mut values: Vec<[f64; 2]> = Vec::new();
                for e in &set.exprs {
                    let mut row = [0.0; 2];
                    for (y, slot) in row.iter_mut().enumerate() {
                        a.insert(q.outcome.clone(), y);
                        *slot = ev.eval(e, &mut a).unwrap();
                    }
                    let tv = (row[0] - ty.probs[0]).abs() + (row[1] - ty.probs[1]).abs();
                    truth_err = truth_err.max(tv / 2.0);
                    values.push(row);
                }
                for i in 0..values.len() {
                    for j in (i + 1)..values.len() {
                        let d = (values[i][0] - values[j][0]).abs() + (values[i][1] - values[j][1]).abs();
                        pair_err = pair_err.max(d / 2.0);
                    }
                }
            }
        }
    }
    (truth_err, pair_err)
}
