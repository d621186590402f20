//! Random ADMG generation, single-edge edits and structural Hamming distance.

use std::fmt;
use std::str::FromStr;

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{FidError, Result};
use crate::graph::{Admg, GraphCore, MixedGraph};

/// Attempts allowed by [`apply_k_edits`] before giving up.
pub const EDIT_BUDGET: usize = 100_000;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct GenConfig {
    pub n_vars: usize,
    pub p_dir: f64,
    pub n_bi: usize,
    pub seed: u64,
}

/// `X1..Xn`, zero-padded so that label order matches numeric order.
pub fn node_names(n: usize) -> Vec<String> {
    let width = n.to_string().len();
    (1..=n).map(|i| format!("X{i:0width$}")).collect()
}

pub fn gen_er_admg(cfg: &GenConfig) -> Result<Admg> {
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    gen_er_admg_with(cfg.n_vars, cfg.p_dir, cfg.n_bi, &mut rng)
}

/// Random topological order; each forward pair gets a directed edge with
/// probability `p_dir`; exactly `n_bi` distinct pairs get a bidirected edge.
pub fn gen_er_admg_with<R: Rng + ?Sized>(n: usize, p_dir: f64, n_bi: usize, rng: &mut R) -> Result<Admg> {
    if !(0.0..=1.0).contains(&p_dir) {
        return Err(FidError::InvalidArgument(format!("p_dir {p_dir} outside [0, 1]")));
    }
    let max_bi = n * n.saturating_sub(1) / 2;
    if n_bi > max_bi {
        return Err(FidError::InvalidArgument(format!(
            "{n_bi} bidirected edges requested but only {max_bi} pairs exist"
        )));
    }
    let mut core = GraphCore::new(&node_names(n))?;
    let mut order: Vec<usize> = (0..n).collect();
    order.shuffle(rng);
    for i in 0..n {
        for j in (i + 1)..n {
            if rng.random::<f64>() < p_dir {
                core.add_directed(order[i], order[j])?;
            }
        }
    }
    let pairs: Vec<(usize, usize)> = (0..n).flat_map(|a| ((a + 1)..n).map(move |b| (a, b))).collect();
    for k in rand::seq::index::sample(rng, pairs.len(), n_bi) {
        let (a, b) = pairs[k];
        core.add_bidirected(a, b)?;
    }
    Admg::from_core(core)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum EditType {
    ReverseDir,
    DirToBi,
    BiToDir,
    AddDir,
    DelDir,
    AddBi,
    DelBi,
}

impl EditType {
    pub const ALL: [EditType; 7] = [
        EditType::ReverseDir,
        EditType::DirToBi,
        EditType::AddDir,
        EditType::DelDir,
        EditType::BiToDir,
        EditType::AddBi,
        EditType::DelBi,
    ];

    pub fn name(self) -> &'static str {
        match self {
            EditType::ReverseDir => "reverse_dir",
            EditType::DirToBi => "dir_to_bi",
            EditType::BiToDir => "bi_to_dir",
            EditType::AddDir => "add_dir",
            EditType::DelDir => "del_dir",
            EditType::AddBi => "add_bi",
            EditType::DelBi => "del_bi",
        }
    }
}

impl fmt::Display for EditType {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for EditType {
    type Err = FidError;
    fn from_str(s: &str) -> Result<EditType> {
        EditType::ALL
            .into_iter()
            .find(|t| t.name() == s)
            .ok_or_else(|| FidError::Config(format!("unknown edit type `{s}`")))
    }
}

/// A concrete edit: for directed kinds `a -> b` is the edge involved (after
/// the edit for `AddDir` and `BiToDir`); for bidirected kinds `a < b`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct Edit {
    pub kind: EditType,
    pub a: usize,
    pub b: usize,
}

fn creates_cycle(g: &Admg, a: usize, b: usize) -> bool {
    // adding a -> b closes a cycle iff a is reachable from b
    g.de_incl(crate::node::NodeSet::singleton(b)).contains(a)
}

/// Every legal target of `kind` in `g`, in canonical order. For `BiToDir`
/// each acyclic orientation is a separate entry.
pub fn legal_edits(g: &Admg, kind: EditType) -> Vec<Edit> {
    let n = g.len();
    let mut out = Vec::new();
    let e = |a, b| Edit { kind, a, b };
    for a in 0..n {
        for b in 0..n {
            if a == b {
                continue;
            }
            let dir = g.has_directed(a, b);
            let bi = g.has_bidirected_edge(a, b);
            let ok = match kind {
                EditType::ReverseDir => dir && {
                    let without = g.edited(|c| {
                        c.remove_directed(a, b);
                        Ok(())
                    });
                    without.map(|w| !creates_cycle(&w, b, a)).unwrap_or(false)
                },
                EditType::DirToBi => dir,
                EditType::DelDir => dir,
                EditType::AddDir => !dir && !creates_cycle(g, a, b),
                EditType::BiToDir => bi && !creates_cycle(g, a, b),
                EditType::AddBi => a < b && !bi,
                EditType::DelBi => a < b && bi,
            };
            if ok {
                out.push(e(a, b));
            }
        }
    }
    out
}

pub fn apply_target(g: &Admg, edit: Edit) -> Result<Admg> {
    let (a, b) = (edit.a, edit.b);
    g.edited(|c| {
        match edit.kind {
            EditType::ReverseDir => {
                c.remove_directed(a, b);
                c.add_directed(b, a)?;
            }
            EditType::DirToBi => {
                c.remove_directed(a, b);
                c.add_bidirected(a, b)?;
            }
            EditType::BiToDir => {
                c.remove_bidirected(a, b);
                c.add_directed(a, b)?;
            }
            EditType::AddDir => c.add_directed(a, b)?,
            EditType::DelDir => c.remove_directed(a, b),
            EditType::AddBi => c.add_bidirected(a, b)?,
            EditType::DelBi => c.remove_bidirected(a, b),
        }
        Ok(())
    })
}

/// One random edit of the given kind, or `None` when no legal target exists.
/// Targets are uniform; `BiToDir` first picks a bidirected edge with at least
/// one acyclic orientation, then one of those orientations uniformly.
pub fn apply_edit<R: Rng + ?Sized>(g: &Admg, kind: EditType, rng: &mut R) -> Option<Admg> {
    let targets = legal_edits(g, kind);
    if targets.is_empty() {
        return None;
    }
    let pick = if kind == EditType::BiToDir {
        let mut pairs: Vec<(usize, usize)> = targets.iter().map(|e| (e.a.min(e.b), e.a.max(e.b))).collect();
        pairs.sort_unstable();
        pairs.dedup();
        let (x, y) = pairs[rng.random_range(0..pairs.len())];
        let options: Vec<Edit> = targets
            .into_iter()
            .filter(|e| (e.a.min(e.b), e.a.max(e.b)) == (x, y))
            .collect();
        options[rng.random_range(0..options.len())]
    } else {
        targets[rng.random_range(0..targets.len())]
    };
    Some(apply_target(g, pick).expect("legal edit keeps the graph acyclic"))
}

/// Draw edit kinds uniformly from `kinds` and apply them until `k` succeed.
/// Inapplicable draws are skipped and count against [`EDIT_BUDGET`].
pub fn apply_k_edits<R: Rng + ?Sized>(
    g: &Admg,
    k: usize,
    kinds: &[EditType],
    rng: &mut R,
) -> Result<(Admg, Vec<EditType>)> {
    if k == 0 {
        return Err(FidError::InvalidArgument("edit count must be at least 1".into()));
    }
    if kinds.is_empty() {
        return Err(FidError::InvalidArgument("no edit types given".into()));
    }
    let mut cur = g.clone();
    let mut applied = Vec::with_capacity(k);
    for _ in 0..EDIT_BUDGET {
        let kind = kinds[rng.random_range(0..kinds.len())];
        if let Some(next) = apply_edit(&cur, kind, rng) {
            cur = next;
            applied.push(kind);
            if applied.len() == k {
                return Ok((cur, applied));
            }
        }
    }
    Err(FidError::BudgetExhausted(EDIT_BUDGET))
}

/// Number of unordered pairs whose (directed, bidirected) configuration differs.
pub fn shd<G: MixedGraph, H: MixedGraph>(g: &G, h: &H) -> Result<usize> {
    if g.nodes() != h.nodes() {
        return Err(FidError::NodeSetMismatch);
    }
    let n = g.len();
    let mut count = 0;
    for a in 0..n {
        for b in (a + 1)..n {
            let cg = (g.ch_set(a).contains(b), g.ch_set(b).contains(a), g.sib_set(a).contains(b));
            let ch = (h.ch_set(a).contains(b), h.ch_set(b).contains(a), h.sib_set(a).contains(b));
            count += (cg != ch) as usize;
        }
    }
    Ok(count)
}
