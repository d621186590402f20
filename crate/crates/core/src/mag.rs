//! ADMG to MAG projection, Markov equivalence of DAGs, and FID ranges
//! between CPDAGs.

use std::collections::{BTreeSet, HashSet};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;

use crate::distance::{fid, FidOptions};
use crate::error::{FidError, Result};
use crate::graph::{subsets, Admg, Cpdag, GraphCore, Mag, MixedGraph};
use crate::identify::PairQuery;
use crate::node::{NodeId, NodeSet};

/// Largest graph for which [`project_checked`] runs the exhaustive
/// m-separation comparison.
pub const MAX_EQUIVALENCE_CHECK: usize = 12;

pub(crate) fn tail_idx(g: &Admg, v: usize) -> NodeSet {
    let a = g.an_incl(g.pa_set(v)).with(v);
    let d = g.district_within(v, a);
    d.without(v) | g.pa_of(d)
}

/// Nodes that get a directed edge into `v` in the projected MAG.
pub fn tail(g: &Admg, v: &str) -> Result<BTreeSet<NodeId>> {
    Ok(g.ids(tail_idx(g, g.index(v)?)))
}

pub(crate) fn is_head_pair_idx(g: &Admg, v: usize, w: usize) -> bool {
    if v == w || g.an_set(w).contains(v) || g.an_set(v).contains(w) {
        return false;
    }
    let s = g.an_incl(NodeSet::singleton(v).with(w));
    g.district_within(v, s).contains(w)
}

/// Neither is an ancestor of the other and they share a district of the
/// ancestral closure of the pair.
pub fn is_head_pair(g: &Admg, v: &str, w: &str) -> Result<bool> {
    Ok(is_head_pair_idx(g, g.index(v)?, g.index(w)?))
}

pub fn admg_to_mag(g: &Admg) -> Result<Mag> {
    let mut core = GraphCore::from_ids(g.nodes().to_vec())?;
    for v in 0..g.len() {
        for w in tail_idx(g, v).iter() {
            core.add_directed(w, v)?;
        }
        for w in (v + 1)..g.len() {
            if is_head_pair_idx(g, v, w) {
                core.add_bidirected(v, w)?;
            }
        }
    }
    Mag::from_core(core).map_err(|e| FidError::Internal(format!("projection is not ancestral: {e}")))
}

/// Same m-separation verdict for every pair and every conditioning set.
/// Exponential in the node count.
pub fn same_separations<A: MixedGraph, B: MixedGraph>(a: &A, b: &B) -> bool {
    if a.nodes() != b.nodes() {
        return false;
    }
    let n = a.len();
    for x in 0..n {
        for y in (x + 1)..n {
            let rest = a.all_set().without(x).without(y);
            for z in subsets(rest) {
                if a.m_connected_idx(x, y, z) != b.m_connected_idx(x, y, z) {
                    return false;
                }
            }
        }
    }
    true
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Projection {
    pub mag: Mag,
    /// `Some(false)` marks a graph without a Markov equivalent MAG; `None`
    /// when the graph is too large to check.
    pub equivalent: Option<bool>,
}

pub fn project_checked(g: &Admg) -> Result<Projection> {
    let mag = admg_to_mag(g)?;
    let equivalent = (g.len() <= MAX_EQUIVALENCE_CHECK).then(|| same_separations(g, &mag));
    Ok(Projection { mag, equivalent })
}

fn adjacent<G: MixedGraph>(g: &G, a: usize, b: usize) -> bool {
    g.ch_set(a).contains(b) || g.pa_set(a).contains(b) || g.sib_set(a).contains(b)
}

/// Unshielded colliders `a -> b <- c` with `a < c`.
fn v_structures(g: &Admg) -> BTreeSet<(usize, usize, usize)> {
    let mut out = BTreeSet::new();
    for b in 0..g.len() {
        let pa: Vec<usize> = g.pa_set(b).iter().collect();
        for (i, &a) in pa.iter().enumerate() {
            for &c in &pa[i + 1..] {
                if !adjacent(g, a, c) {
                    out.insert((a, b, c));
                }
            }
        }
    }
    out
}

fn require_dag(g: &Admg) -> Result<()> {
    if g.is_dag() {
        Ok(())
    } else {
        Err(FidError::InvalidArgument("expected a DAG without bidirected edges".into()))
    }
}

/// Same skeleton and same v-structures.
pub fn markov_equiv_dags(g: &Admg, h: &Admg) -> Result<bool> {
    require_dag(g)?;
    require_dag(h)?;
    if !g.same_nodes(h) {
        return Err(FidError::NodeSetMismatch);
    }
    for a in 0..g.len() {
        for b in (a + 1)..g.len() {
            if adjacent(g, a, b) != adjacent(h, a, b) {
                return Ok(false);
            }
        }
    }
    Ok(v_structures(g) == v_structures(h))
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ExtensionMode {
    Exact,
    /// `budget` randomized orientations, de-duplicated. Not uniform over the
    /// equivalence class.
    Sample { budget: usize, seed: u64 },
}

struct Orienter<'c> {
    c: &'c Cpdag,
    edges: Vec<(usize, usize)>,
    pa: Vec<NodeSet>,
    /// v-structures present in the CPDAG's directed part
    allowed: BTreeSet<(usize, usize, usize)>,
}

impl<'c> Orienter<'c> {
    fn new(c: &'c Cpdag) -> Self {
        let n = c.nodes.len();
        let mut edges = Vec::new();
        for a in 0..n {
            for b in c.und[a].iter().filter(|&b| b > a) {
                edges.push((a, b));
            }
        }
        let mut o = Orienter {
            c,
            edges,
            pa: c.pa.clone(),
            allowed: BTreeSet::new(),
        };
        for b in 0..n {
            let pa: Vec<usize> = c.pa[b].iter().collect();
            for (i, &a) in pa.iter().enumerate() {
                for &x in &pa[i + 1..] {
                    if !o.skeleton_adjacent(a, x) {
                        o.allowed.insert((a, b, x));
                    }
                }
            }
        }
        o
    }

    fn skeleton_adjacent(&self, a: usize, b: usize) -> bool {
        self.c.ch[a].contains(b) || self.c.pa[a].contains(b) || self.c.und[a].contains(b)
    }

    fn reaches(&self, from: usize, to: usize) -> bool {
        let mut seen = NodeSet::singleton(from);
        let mut stack = vec![from];
        while let Some(v) = stack.pop() {
            if v == to {
                return true;
            }
            for w in (0..self.pa.len()).filter(|&w| self.pa[w].contains(v)) {
                if !seen.contains(w) {
                    seen.insert(w);
                    stack.push(w);
                }
            }
        }
        false
    }

    /// Whether adding `a -> b` keeps the graph acyclic and creates no new
    /// v-structure.
    fn can_add(&self, a: usize, b: usize) -> bool {
        if self.reaches(b, a) {
            return false;
        }
        self.pa[b].iter().all(|p| {
            let key = if p < a { (p, b, a) } else { (a, b, p) };
            self.skeleton_adjacent(p, a) || self.allowed.contains(&key)
        })
    }

    fn to_dag(&self) -> Admg {
        let mut core = GraphCore::from_ids(self.c.nodes.clone()).expect("node list already valid");
        for b in 0..self.pa.len() {
            for a in self.pa[b].iter() {
                core.add_directed(a, b).expect("distinct endpoints");
            }
        }
        Admg::from_core(core).expect("orientation kept acyclic")
    }

    fn all(&mut self, i: usize, out: &mut Vec<Admg>) {
        if i == self.edges.len() {
            out.push(self.to_dag());
            return;
        }
        let (a, b) = self.edges[i];
        for (x, y) in [(a, b), (b, a)] {
            if self.can_add(x, y) {
                self.pa[y].insert(x);
                self.all(i + 1, out);
                self.pa[y].remove(x);
            }
        }
    }

    fn one(&mut self, i: usize, rng: &mut ChaCha8Rng) -> Option<Admg> {
        if i == self.edges.len() {
            return Some(self.to_dag());
        }
        let (a, b) = self.edges[i];
        let order = if rng.random_bool(0.5) { [(a, b), (b, a)] } else { [(b, a), (a, b)] };
        for (x, y) in order {
            if self.can_add(x, y) {
                self.pa[y].insert(x);
                let found = self.one(i + 1, rng);
                self.pa[y].remove(x);
                if found.is_some() {
                    return found;
                }
            }
        }
        None
    }
}

/// DAGs in the equivalence class of `c`. Exact results come in a fixed
/// order; sampled results are de-duplicated in draw order.
pub fn dag_extensions(c: &Cpdag, mode: ExtensionMode) -> Result<Vec<Admg>> {
    let mut o = Orienter::new(c);
    let out = match mode {
        ExtensionMode::Exact => {
            let mut out = Vec::new();
            o.all(0, &mut out);
            out
        }
        ExtensionMode::Sample { budget, seed } => {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let mut seen = HashSet::new();
            let mut out = Vec::new();
            for _ in 0..budget {
                match o.one(0, &mut rng) {
                    Some(d) => {
                        if seen.insert(d.clone()) {
                            out.push(d);
                        }
                    }
                    None => break,
                }
            }
            if budget > 0 && out.is_empty() {
                return Err(FidError::InconsistentCpdag);
            }
            out
        }
    };
    if mode == ExtensionMode::Exact && out.is_empty() {
        return Err(FidError::InconsistentCpdag);
    }
    Ok(out)
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct FidRange {
    pub lo: f64,
    pub hi: f64,
    pub ref_extensions: usize,
    pub cand_extensions: usize,
    /// false when the extensions were sampled
    pub exact: bool,
}

/// Smallest and largest normalized directional FID over extension pairs.
pub fn cpdag_fid_range(
    c1: &Cpdag,
    c2: &Cpdag,
    pairs: &[PairQuery],
    mode: ExtensionMode,
    opts: FidOptions,
) -> Result<FidRange> {
    if !c1.same_nodes(c2) {
        return Err(FidError::NodeSetMismatch);
    }
    let gs = dag_extensions(c1, mode)?;
    let hs = match mode {
        ExtensionMode::Exact => dag_extensions(c2, mode)?,
        ExtensionMode::Sample { budget, seed } => dag_extensions(c2, ExtensionMode::Sample { budget, seed: seed ^ 1 })?,
    };
    let grid: Vec<(usize, usize)> = (0..gs.len()).flat_map(|i| (0..hs.len()).map(move |j| (i, j))).collect();
    let scores: Vec<f64> = grid
        .par_iter()
        .map(|&(i, j)| fid(&gs[i], &hs[j], pairs, opts).map(|r| r.normalized))
        .collect::<Result<_>>()?;
    Ok(FidRange {
        lo: scores.iter().copied().fold(f64::INFINITY, f64::min),
        hi: scores.iter().copied().fold(0.0, f64::max),
        ref_extensions: gs.len(),
        cand_extensions: hs.len(),
        exact: mode == ExtensionMode::Exact,
    })
}
