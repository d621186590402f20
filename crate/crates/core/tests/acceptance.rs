//! Acceptance run: each criterion prints one PASS/FAIL line with the numbers
//! behind it. A failing criterion does not fail the test binary; the verdicts
//! are the output. Panics still fail it, since they mean the harness broke.

mod common;

use std::collections::{BTreeMap, BTreeSet};
use std::time::Instant;

use common::*;
use fid_core::estimand::{canonicalize_traced, is_canonical, try_canonicalize, Firing};
use fid_core::fixing::{fix_graph, is_fixable};
use fid_core::mag::project_checked;
use fid_core::perturb::{apply_edit, gen_er_admg_with, EditType};
use fid_core::sweep::{pearson, run_sweep, Direction, SweepConfig, SweepOutput};
use fid_core::{
    all_pairs, fid_symmetric, identify_all, is_identifiable, verify, Admg, Cadmg, Cap, EstimandStatus, FidOptions,
    MixedGraph, NodeId, PairQuery,
};
use rand::seq::IndexedRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

struct Verdict {
    pass: bool,
    detail: String,
}

fn verdict(pass: bool, detail: String) -> Verdict {
    Verdict { pass, detail }
}

fn c1_oracle_estimands() -> Verdict {
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    let (mut truth, mut pairwise) = (0.0f64, 0.0f64);
    let mut bi_counts = [0usize; 4];
    for i in 0..200u64 {
        let g = random_admg(&mut rng, 5);
        bi_counts[g.bidirected_count()] += 1;
        let (t, p) = estimand_errors(&g, i);
        truth = truth.max(t);
        pairwise = pairwise.max(p);
    }
    verdict(
        truth <= 1e-9 && pairwise <= 1e-9,
        format!(
            "200 graphs (n_bi 0..3: {bi_counts:?}), max TV to truth {truth:.2e}, max pairwise {pairwise:.2e}"
        ),
    )
}

/// Identifiability from the definition: every district of the outcome's
/// ancestors (with the treatment removed) is reachable by some ordering of
/// single fixings, searched without memoization.
fn naive_identifiable(g: &Admg, t: &NodeId, y: &NodeId) -> bool {
    let mut anc: BTreeSet<NodeId> = BTreeSet::from([y.clone()]);
    let mut stack = vec![y.clone()];
    while let Some(v) = stack.pop() {
        for p in g.parents(v.as_str()).unwrap() {
            if p != *t && anc.insert(p.clone()) {
                stack.push(p);
            }
        }
    }
    let mut left = anc.clone();
    let mut districts = Vec::new();
    while let Some(start) = left.iter().next().cloned() {
        let mut d = BTreeSet::from([start.clone()]);
        let mut stack = vec![start];
        while let Some(v) = stack.pop() {
            for s in g.siblings(v.as_str()).unwrap() {
                if anc.contains(&s) && d.insert(s.clone()) {
                    stack.push(s);
                }
            }
        }
        left.retain(|v| !d.contains(v));
        districts.push(d);
    }
    fn reach(c: &Cadmg, keep: &BTreeSet<NodeId>) -> bool {
        let random = c.random_nodes();
        if random == *keep {
            return true;
        }
        random
            .iter()
            .filter(|r| !keep.contains(*r))
            .any(|r| is_fixable(c, r.as_str()).unwrap() && reach(&fix_graph(c, r.as_str()).unwrap(), keep))
    }
    let start = Cadmg::from_admg(g);
    districts.iter().all(|d| reach(&start, d))
}

fn c2_identifiability_oracle() -> Verdict {
    const LABELS: [&str; 4] = ["A", "B", "C", "D"];
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    let (mut graphs, mut queries, mut disagree) = (0usize, 0usize, Vec::new());
    for n in 2..=4usize {
        let pairs: Vec<(usize, usize)> = (0..n).flat_map(|a| ((a + 1)..n).map(move |b| (a, b))).collect();
        // per pair: none / a->b / b->a, times bidirected or not
        let total = 6usize.pow(pairs.len() as u32);
        let mut strata: BTreeMap<usize, Vec<usize>> = BTreeMap::new();
        for code in 0..total {
            let mut c = code;
            let mut edges = 0;
            for _ in &pairs {
                let s = c % 6;
                c /= 6;
                edges += (s % 3 != 0) as usize + (s / 3) as usize;
            }
            strata.entry(edges).or_default().push(code);
        }
        for codes in strata.values() {
            let chosen: Vec<usize> = if codes.len() > 5000 {
                codes.choose_multiple(&mut rng, 5000).copied().collect()
            } else {
                codes.clone()
            };
            for code in chosen {
                let mut c = code;
                let (mut dir, mut bi) = (Vec::new(), Vec::new());
                for &(a, b) in &pairs {
                    let s = c % 6;
                    c /= 6;
                    match s % 3 {
                        1 => dir.push((LABELS[a], LABELS[b])),
                        2 => dir.push((LABELS[b], LABELS[a])),
                        _ => {}
                    }
                    if s / 3 == 1 {
                        bi.push((LABELS[a], LABELS[b]));
                    }
                }
                let Ok(g) = Admg::new(&LABELS[..n], &dir, &bi) else {
                    continue;
                };
                graphs += 1;
                for q in all_pairs(&g) {
                    queries += 1;
                    if is_identifiable(&g, &q).unwrap() != naive_identifiable(&g, &q.treatment, &q.outcome) {
                        disagree.push(format!("{g:?} {q:?}"));
                    }
                }
            }
        }
    }
    let mut detail = format!("{graphs} graphs, {queries} queries, {} disagreements", disagree.len());
    if let Some(first) = disagree.first() {
        detail.push_str(&format!("; first: {first}"));
    }
    verdict(disagree.is_empty(), detail)
}

fn grid_graphs() -> Vec<Admg> {
    let cfg = SweepConfig::default();
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let mut out = Vec::new();
    for &b in &cfg.n_bi {
        for &p in &cfg.p_dir {
            for _ in 0..cfg.graphs_per_cell {
                out.push(gen_er_admg_with(cfg.n_vars, p, b, &mut rng).unwrap());
            }
        }
    }
    out
}

fn random_edits<R: Rng>(g: &Admg, k: usize, rng: &mut R) -> Admg {
    let mut cur = g.clone();
    let mut done = 0;
    while done < k {
        let kind = *EditType::ALL.choose(rng).unwrap();
        if let Some(next) = apply_edit(&cur, kind, rng) {
            cur = next;
            done += 1;
        }
    }
    cur
}

fn sym(a: &Admg, b: &Admg) -> f64 {
    fid_symmetric(a, b, &all_pairs(a), FidOptions::default()).unwrap().normalized
}

fn c3_pre_metric() -> Verdict {
    let opts = FidOptions::default();
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let graphs = grid_graphs();
    let (mut self_nonzero, mut out_of_range, mut asymmetric) = (0, 0, 0);
    for g in &graphs {
        let pairs = all_pairs(g);
        if fid_symmetric(g, g, &pairs, opts).unwrap().total != 0.0 {
            self_nonzero += 1;
        }
        let k = rng.random_range(1..=3);
        let h = random_edits(g, k, &mut rng);
        let gh = fid_symmetric(g, &h, &pairs, opts).unwrap();
        let hg = fid_symmetric(&h, g, &pairs, opts).unwrap();
        let scores = gh.forward.per_pair.iter().chain(&gh.backward.per_pair).map(|s| s.value);
        out_of_range += scores.filter(|v| !(0.0..=1.0).contains(v)).count();
        if gh.total.to_bits() != hg.total.to_bits() || gh.normalized.to_bits() != hg.normalized.to_bits() {
            asymmetric += 1;
        }
    }

    // triangle inequality on the symmetric normalized distance
    let mut violation = None;
    let mut tried = 0;
    while violation.is_none() && tried < 20_000 {
        tried += 1;
        let n = rng.random_range(3..=4);
        let b = rng.random_range(0..=2);
        let a = gen_er_admg_with(n, rng.random_range(0.2..0.8), b, &mut rng).unwrap();
        let mid = random_edits(&a, rng.random_range(1..=2), &mut rng);
        let c = random_edits(&mid, rng.random_range(1..=2), &mut rng);
        let (ab, bc, ac) = (sym(&a, &mid), sym(&mid, &c), sym(&a, &c));
        if ac > ab + bc + 1e-12 {
            violation = Some(format!("d(A,C)={ac:.4} > d(A,B)+d(B,C)={:.4}", ab + bc));
        }
    }
    let pass = self_nonzero == 0 && out_of_range == 0 && asymmetric == 0 && violation.is_some();
    verdict(
        pass,
        format!(
            "{} grid graphs: d(G,G)!=0 in {self_nonzero}, scores outside [0,1]: {out_of_range}, asymmetric: {asymmetric}; triangle violation after {tried} triples: {}",
            graphs.len(),
            violation.unwrap_or_else(|| "none found".into())
        ),
    )
}

const TABLE5: [(EditType, f64); 7] = [
    (EditType::ReverseDir, 0.3357),
    (EditType::DirToBi, 0.1726),
    (EditType::AddDir, 0.1376),
    (EditType::DelDir, 0.1303),
    (EditType::BiToDir, 0.2288),
    (EditType::AddBi, 0.1526),
    (EditType::DelBi, 0.1531),
];

fn c4_table5(out: &SweepOutput, cfg: &SweepConfig) -> Verdict {
    let gh: BTreeMap<EditType, f64> = out
        .edit_type_summary(cfg, Direction::Forward)
        .into_iter()
        .map(|(t, s)| (t, s.map_or(f64::NAN, |s| s.mean)))
        .collect();
    let hg: BTreeMap<EditType, f64> = out
        .edit_type_summary(cfg, Direction::Backward)
        .into_iter()
        .map(|(t, s)| (t, s.map_or(f64::NAN, |s| s.mean)))
        .collect();
    let mut within = true;
    let mut parts = Vec::new();
    for (t, want) in TABLE5 {
        let got = gh[&t];
        let ok = (got - want).abs() <= 0.03;
        within &= ok;
        parts.push(format!("{t} {got:.4}/{:.4} vs {want:.4}{}", hg[&t], if ok { "" } else { "*" }));
    }
    let mut ranked: Vec<(EditType, f64)> = gh.iter().map(|(&t, &v)| (t, v)).collect();
    ranked.sort_by(|a, b| b.1.total_cmp(&a.1));
    let reverse_first = ranked[0].0 == EditType::ReverseDir;
    let del_dir_rank = ranked.iter().position(|(t, _)| *t == EditType::DelDir).unwrap();
    let ranking_ok = reverse_first && del_dir_rank >= ranked.len() - 2;
    let order: Vec<&str> = ranked.iter().map(|(t, _)| t.name()).collect();
    verdict(
        within && ranking_ok,
        format!(
            "gh/hg vs published (* = outside 0.03): {}; ranking {} (reverse first: {reverse_first}, del_dir rank {})",
            parts.join(", "),
            order.join(" > "),
            del_dir_rank + 1
        ),
    )
}

fn spearman(x: &[f64], y: &[f64]) -> f64 {
    fn ranks(v: &[f64]) -> Vec<f64> {
        let mut idx: Vec<usize> = (0..v.len()).collect();
        idx.sort_by(|&a, &b| v[a].total_cmp(&v[b]));
        let mut r = vec![0.0; v.len()];
        let mut i = 0;
        while i < idx.len() {
            let mut j = i;
            while j + 1 < idx.len() && v[idx[j + 1]] == v[idx[i]] {
                j += 1;
            }
            for &k in &idx[i..=j] {
                r[k] = (i + j) as f64 / 2.0;
            }
            i = j + 1;
        }
        r
    }
    pearson(&ranks(x), &ranks(y)).unwrap_or(0.0)
}

fn c5_monotone_in_k(out: &SweepOutput, cfg: &SweepConfig) -> Verdict {
    let ks: Vec<f64> = cfg.k.iter().map(|&k| k as f64).collect();
    let mut pass = true;
    let mut parts = Vec::new();
    for dir in [Direction::Forward, Direction::Backward] {
        let pooled: Vec<f64> = out
            .grouped(&cfg.k, |r| r.k, dir)
            .into_iter()
            .map(|(_, s)| s.map_or(f64::NAN, |s| s.mean))
            .collect();
        let strict = pooled.windows(2).all(|w| w[0] < w[1]);
        let rho = spearman(&ks, &pooled);
        let cells: Vec<f64> = out
            .edit_count_table(cfg, dir)
            .into_iter()
            .map(|(_, _, cols)| {
                let v: Vec<f64> = cols.into_iter().map(|c| c.unwrap_or(f64::NAN)).collect();
                spearman(&ks, &v)
            })
            .collect();
        let mean_cell = cells.iter().sum::<f64>() / cells.len() as f64;
        pass &= strict && rho == 1.0 && mean_cell >= 0.8;
        let means: Vec<String> = pooled.iter().map(|m| format!("{m:.4}")).collect();
        parts.push(format!(
            "{}: means [{}], rho {rho:.2}, mean cell rho {mean_cell:.3}",
            dir.name(),
            means.join(", ")
        ));
    }
    verdict(pass, parts.join("; "))
}

fn c6_near_symmetry(out: &SweepOutput, cfg: &SweepConfig) -> Verdict {
    let gh = out.single_edit_table(cfg, Direction::Forward);
    let hg = out.single_edit_table(cfg, Direction::Backward);
    let (mut cells, mut bad, mut worst) = (0, 0, 0.0f64);
    let mut worst_at = String::new();
    for ((b, p, f), (_, _, r)) in gh.iter().zip(&hg) {
        for (t, (x, y)) in cfg.edit_types.iter().zip(f.iter().zip(r)) {
            let (Some(x), Some(y)) = (x, y) else { continue };
            cells += 1;
            let d = (x - y).abs();
            if d > 0.01 {
                bad += 1;
            }
            if d > worst {
                worst = d;
                worst_at = format!("n_bi={b} p_dir={p} {t}");
            }
        }
    }
    let pooled: Vec<String> = out
        .edit_type_summary(cfg, Direction::Forward)
        .into_iter()
        .zip(out.edit_type_summary(cfg, Direction::Backward))
        .map(|((t, a), (_, b))| format!("{t} {:.4}", (a.map_or(0.0, |s| s.mean) - b.map_or(0.0, |s| s.mean)).abs()))
        .collect();
    verdict(
        bad == 0,
        format!(
            "{bad}/{cells} cells over 0.01, worst {worst:.4} at {worst_at}; pooled per type: {}",
            pooled.join(", ")
        ),
    )
}

fn c7_triangle_vs_chain() -> Verdict {
    let g = Admg::dag(&["x1", "x2", "x3"], &[("x2", "x1"), ("x2", "x3"), ("x1", "x3")]).unwrap();
    let h = Admg::dag(&["x1", "x2", "x3"], &[("x2", "x1"), ("x1", "x3")]).unwrap();
    let q = PairQuery::new("x1", "x3").unwrap();
    let eg = identify_all(&g, &q, Cap::DEFAULT).unwrap();
    let eh = identify_all(&h, &q, Cap::DEFAULT).unwrap();
    let both = eg.status == EstimandStatus::Identified && eh.status == EstimandStatus::Identified;
    let rg: BTreeSet<String> = eg.rendered().into_iter().collect();
    let rh: BTreeSet<String> = eh.rendered().into_iter().collect();
    let shared: Vec<&String> = rg.intersection(&rh).collect();
    let opts = FidOptions::default();
    let d_gh = verify(&g, &h, &q, opts).unwrap().value;
    let d_hg = verify(&h, &g, &q, opts).unwrap().value;
    verdict(
        both && shared.is_empty() && d_gh == 1.0 && d_hg == 1.0,
        format!("both identified: {both}; G: {rg:?}; H: {rh:?}; shared: {shared:?}; score G->H {d_gh}, H->G {d_hg}"),
    )
}

fn c8_mag_projection() -> Verdict {
    let mut rng = ChaCha8Rng::seed_from_u64(8);
    let (mut flagged, mut wrong, mut mislabeled) = (0, 0, 0);
    for _ in 0..200 {
        let g = random_admg(&mut rng, 5);
        let p = project_checked(&g).unwrap();
        let n = g.len();
        let mut same = true;
        for x in 0..n {
            for y in (x + 1)..n {
                let others: Vec<usize> = (0..n).filter(|&v| v != x && v != y).collect();
                for mask in 0..(1usize << others.len()) {
                    let z: Vec<usize> = others.iter().enumerate().filter(|(k, _)| mask >> k & 1 == 1).map(|(_, &v)| v).collect();
                    same &= m_connected_by_paths(&g, x, y, &z) == m_connected_by_paths(&p.mag, x, y, &z);
                }
            }
        }
        match p.equivalent {
            Some(false) => {
                flagged += 1;
                mislabeled += same as usize;
            }
            _ => wrong += !same as usize,
        }
    }
    verdict(
        wrong == 0 && mislabeled == 0,
        format!(
            "200 graphs: flagged non-projectable {flagged} ({:.1}%), unflagged with differing separations {wrong}, flagged but equivalent {mislabeled}",
            flagged as f64 / 2.0
        ),
    )
}

fn c9_canonicalizer() -> Verdict {
    let mut rng = ChaCha8Rng::seed_from_u64(9);
    let (mut not_terminating, mut not_idempotent, mut not_canonical) = (0, 0, 0);
    for _ in 0..10_000 {
        let depth = rng.random_range(1..=4);
        let e = random_expr(&mut rng, depth);
        match try_canonicalize(&e, 100_000) {
            Err(_) => not_terminating += 1,
            Ok(c) => {
                not_canonical += !is_canonical(&c) as usize;
                not_idempotent += (try_canonicalize(&c, 100_000).ok() != Some(c)) as usize;
            }
        }
    }
    let (mut sampled, mut unsound, mut worst) = (0, 0, 0.0f64);
    let mut per_rule: BTreeMap<String, usize> = BTreeMap::new();
    let mut i = 0u64;
    while sampled < 1000 {
        i += 1;
        let e = random_expr(&mut rng, 3);
        let mut firings: Vec<Firing> = Vec::new();
        canonicalize_traced(&e, 100_000, &mut |f| firings.push(f.clone())).unwrap();
        let Some(f) = firings.choose(&mut rng) else { continue };
        sampled += 1;
        *per_rule.entry(format!("{:?}", f.rule)).or_default() += 1;
        let gap = numeric_gap(&f.before, &f.after, &positive_table(i));
        worst = worst.max(gap);
        unsound += (gap > 1e-9) as usize;
    }
    verdict(
        not_terminating + not_idempotent + not_canonical + unsound == 0,
        format!(
            "10000 expressions: non-terminating {not_terminating}, not idempotent {not_idempotent}, not canonical {not_canonical}; {sampled} firings {per_rule:?}: unsound {unsound}, worst relative gap {worst:.2e}"
        ),
    )
}

fn c10_shd_correlation(out: &SweepOutput) -> Verdict {
    let r = out.mag_pearson().unwrap_or(f64::NAN);
    verdict(
        r >= 0.6,
        format!(
            "Pearson r = {r:.3} over {} MAG pairs ({} of {} references discarded)",
            out.mags.iter().filter(|m| !m.timed_out).count(),
            out.mag_discarded,
            out.mag_references
        ),
    )
}

fn main() {
    let start = Instant::now();
    let mut cfg = SweepConfig::default();
    cfg.mag_k = (1..=7).collect();
    let sweep = run_sweep(&cfg).expect("sweep runs");
    println!(
        "sweep: {} instances, {} MAG pairs, {} timed out ({:.1}s)",
        sweep.instances.len(),
        sweep.mags.len(),
        sweep.timed_out(),
        start.elapsed().as_secs_f64()
    );

    let criteria: Vec<(&str, Box<dyn Fn() -> Verdict + '_>)> = vec![
        ("oracle estimand correctness", Box::new(c1_oracle_estimands)),
        ("identifiability oracle equivalence", Box::new(c2_identifiability_oracle)),
        ("pre-metric suite", Box::new(c3_pre_metric)),
        ("edit-type means", Box::new(|| c4_table5(&sweep, &cfg))),
        ("monotonicity in edit count", Box::new(|| c5_monotone_in_k(&sweep, &cfg))),
        ("directional near-symmetry", Box::new(|| c6_near_symmetry(&sweep, &cfg))),
        ("three-node adjustment disagreement", Box::new(c7_triangle_vs_chain)),
        ("MAG projection equivalence", Box::new(c8_mag_projection)),
        ("canonicalizer properties", Box::new(c9_canonicalizer)),
        ("SHD correlation", Box::new(|| c10_shd_correlation(&sweep))),
    ];
    let mut passed = 0;
    for (i, (name, run)) in criteria.iter().enumerate() {
        let t = Instant::now();
        let v = run();
        passed += v.pass as usize;
        println!(
            "criterion {:>2} {name}: {} ({:.1}s) {}",
            i + 1,
            if v.pass { "PASS" } else { "FAIL" },
            t.elapsed().as_secs_f64(),
            v.detail
        );
    }
    println!("acceptance: {passed}/{} criteria passed", criteria.len());
}
