//! Fixability, the graph-level fixing operation, valid fixing sequences and
//! reachable / intrinsic sets.
//!
//! Fixing commutes on graphs, so the CADMG reached by any valid sequence
//! depends only on the set of fixed nodes. Set-level searches below memoize on
//! that set.

use std::collections::{BTreeSet, HashMap, HashSet};

use serde::{Deserialize, Serialize};

use crate::error::{FidError, Result};
use crate::graph::{Admg, Cadmg, MixedGraph};
use crate::node::{NodeId, NodeSet};

/// Bound on the number of fixing sequences enumerated per district.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum Cap {
    Limited(usize),
    Unlimited,
}

impl Cap {
    pub const DEFAULT: Cap = Cap::Limited(10_000);

    pub fn limit(self) -> Option<usize> {
        match self {
            Cap::Limited(n) => Some(n),
            Cap::Unlimited => None,
        }
    }
}

impl Default for Cap {
    fn default() -> Self {
        Cap::DEFAULT
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct FixingSequence {
    pub steps: Vec<NodeId>,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SequenceEnumeration {
    pub sequences: Vec<FixingSequence>,
    pub truncated: bool,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct IntrinsicSets {
    pub sets: BTreeSet<BTreeSet<NodeId>>,
}

impl IntrinsicSets {
    pub fn contains(&self, s: &BTreeSet<NodeId>) -> bool {
        self.sets.contains(s)
    }
}

/// A random descendant of `r` in `r`'s district, if any. `r` is fixable
/// exactly when there is none.
pub(crate) fn blocker(g: &Cadmg, r: usize) -> Option<usize> {
    (g.de_set(r) & g.district_set(r)).first()
}

pub fn is_fixable(g: &Cadmg, r: &str) -> Result<bool> {
    let i = g.index(r)?;
    if !g.random_set().contains(i) {
        return Err(FidError::NotRandom(r.to_string()));
    }
    Ok(blocker(g, i).is_none())
}

/// Move `r` to the fixed set and drop every edge with an arrowhead at `r`.
pub fn fix_graph(g: &Cadmg, r: &str) -> Result<Cadmg> {
    let i = g.index(r)?;
    if !g.random_set().contains(i) {
        return Err(FidError::NotRandom(r.to_string()));
    }
    if let Some(c) = blocker(g, i) {
        return Err(FidError::NotFixable {
            node: r.to_string(),
            blocker: g.node(c).to_string(),
        });
    }
    Ok(fix_unchecked(g, i))
}

pub(crate) fn fix_unchecked(g: &Cadmg, r: usize) -> Cadmg {
    let mut core = g.core.clone();
    for p in core.pa[r].iter() {
        core.ch[p].remove(r);
    }
    core.pa[r] = NodeSet::EMPTY;
    for s in core.sib[r].iter() {
        core.sib[s].remove(r);
    }
    core.sib[r] = NodeSet::EMPTY;
    Cadmg {
        core,
        fixed: g.fixed.with(r),
    }
}

/// Nodes fixable after fixing `fixed` in `g` (in canonical order).
pub(crate) fn fixable_after(g: &Admg, fixed: NodeSet) -> NodeSet {
    let reached = Cadmg::reached(g, fixed);
    reached
        .random_set()
        .iter()
        .filter(|&r| blocker(&reached, r).is_none())
        .collect()
}

/// Whether every node of `target` can still be fixed starting from `fixed`.
pub(crate) struct Completion<'g> {
    g: &'g Admg,
    target: NodeSet,
    memo: HashMap<NodeSet, bool>,
}

impl<'g> Completion<'g> {
    pub(crate) fn new(g: &'g Admg, target: NodeSet) -> Self {
        Completion {
            g,
            target,
            memo: HashMap::new(),
        }
    }

    pub(crate) fn possible(&mut self, fixed: NodeSet) -> bool {
        if fixed == self.target {
            return true;
        }
        if let Some(&b) = self.memo.get(&fixed) {
            return b;
        }
        let next = fixable_after(self.g, fixed) & (self.target - fixed);
        let ok = next.iter().any(|r| self.possible(fixed.with(r)));
        self.memo.insert(fixed, ok);
        ok
    }
}

/// Depth-first enumeration (candidates in canonical order) of the orderings
/// of `target` that are sequentially fixable, stopping after `limit`.
/// Returns the sequences as index lists and whether more exist.
pub(crate) fn sequences_idx(g: &Admg, target: NodeSet, limit: Option<usize>) -> (Vec<Vec<usize>>, bool) {
    let mut completion = Completion::new(g, target);
    let mut out = Vec::new();
    let mut truncated = false;
    let mut prefix = Vec::new();
    if completion.possible(NodeSet::EMPTY) {
        dfs(
            g,
            target,
            NodeSet::EMPTY,
            &mut prefix,
            &mut completion,
            limit,
            &mut out,
            &mut truncated,
        );
    }
    (out, truncated)
}

#[allow(clippy::too_many_arguments)]
fn dfs(
    g: &Admg,
    target: NodeSet,
    fixed: NodeSet,
    prefix: &mut Vec<usize>,
    completion: &mut Completion<'_>,
    limit: Option<usize>,
    out: &mut Vec<Vec<usize>>,
    truncated: &mut bool,
) {
    if *truncated {
        return;
    }
    if fixed == target {
        if limit.is_some_and(|l| out.len() >= l) {
            *truncated = true;
        } else {
            out.push(prefix.clone());
        }
        return;
    }
    let next = fixable_after(g, fixed) & (target - fixed);
    for r in next.iter() {
        if !completion.possible(fixed.with(r)) {
            continue;
        }
        prefix.push(r);
        dfs(g, target, fixed.with(r), prefix, completion, limit, out, truncated);
        prefix.pop();
        if *truncated {
            return;
        }
    }
}

/// All valid fixing sequences of `nodes(g) \ keep`. Empty iff `keep` is not
/// reachable; `[[]]` when `keep` is every node.
pub fn valid_fixing_sequences<S: AsRef<str>>(g: &Admg, keep: &[S], cap: Cap) -> Result<SequenceEnumeration> {
    let keep = g.set_of(keep)?;
    let target = g.all_set() - keep;
    let (seqs, truncated) = sequences_idx(g, target, cap.limit());
    Ok(SequenceEnumeration {
        sequences: seqs
            .into_iter()
            .map(|s| FixingSequence {
                steps: s.into_iter().map(|i| g.node(i).clone()).collect(),
            })
            .collect(),
        truncated,
    })
}

/// Number of valid fixing sequences for `target`, saturating.
pub(crate) fn count_sequences(g: &Admg, target: NodeSet) -> u64 {
    fn go(g: &Admg, target: NodeSet, fixed: NodeSet, memo: &mut HashMap<NodeSet, u64>) -> u64 {
        if fixed == target {
            return 1;
        }
        if let Some(&c) = memo.get(&fixed) {
            return c;
        }
        let next = fixable_after(g, fixed) & (target - fixed);
        let c = next
            .iter()
            .fold(0u64, |acc, r| acc.saturating_add(go(g, target, fixed.with(r), memo)));
        memo.insert(fixed, c);
        c
    }
    go(g, target, NodeSet::EMPTY, &mut HashMap::new())
}

/// Fixed sets reachable from `g` by valid fixing sequences (breadth-first over
/// the subset lattice).
pub(crate) fn reachable_fixed_sets(g: &Admg) -> Vec<NodeSet> {
    let mut seen: HashSet<NodeSet> = HashSet::new();
    let mut order = vec![NodeSet::EMPTY];
    seen.insert(NodeSet::EMPTY);
    let mut head = 0;
    while head < order.len() {
        let fixed = order[head];
        head += 1;
        for r in fixable_after(g, fixed).iter() {
            let next = fixed.with(r);
            if seen.insert(next) {
                order.push(next);
            }
        }
    }
    order
}

/// Intrinsic sets as index masks: districts of every reachable CADMG.
pub(crate) fn intrinsic_masks(g: &Admg) -> BTreeSet<NodeSet> {
    let mut out = BTreeSet::new();
    for fixed in reachable_fixed_sets(g) {
        let reached = Cadmg::reached(g, fixed);
        out.extend(reached.district_sets());
    }
    out
}

/// Reachable sets (the random nodes of each reachable CADMG).
pub fn reachable_sets(g: &Admg) -> BTreeSet<BTreeSet<NodeId>> {
    reachable_fixed_sets(g)
        .into_iter()
        .map(|fixed| g.ids(g.all_set() - fixed))
        .collect()
}

pub fn intrinsic_sets(g: &Admg) -> IntrinsicSets {
    IntrinsicSets {
        sets: intrinsic_masks(g).into_iter().map(|s| g.ids(s)).collect(),
    }
}
