//! Mixed graphs and the structural queries the rest of the crate relies on.
//!
//! All graph types are immutable values over a sorted node list; node indices
//! therefore follow the canonical (lexicographic) label order. Every
//! transformation returns a new graph.

use std::collections::BTreeSet;

use crate::error::{FidError, Result};
use crate::node::{NodeId, NodeSet, MAX_NODES};

/// Adjacency storage shared by the mixed graph types.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub(crate) struct GraphCore {
    pub(crate) nodes: Vec<NodeId>,
    pub(crate) pa: Vec<NodeSet>,
    pub(crate) ch: Vec<NodeSet>,
    pub(crate) sib: Vec<NodeSet>,
}

impl GraphCore {
    pub(crate) fn new<S: AsRef<str>>(labels: &[S]) -> Result<Self> {
        let mut nodes = labels
            .iter()
            .map(|s| NodeId::new(s.as_ref()))
            .collect::<Result<Vec<_>>>()?;
        Self::from_ids(std::mem::take(&mut nodes))
    }

    pub(crate) fn from_ids(mut nodes: Vec<NodeId>) -> Result<Self> {
        if nodes.len() > MAX_NODES {
            return Err(FidError::TooManyNodes {
                got: nodes.len(),
                max: MAX_NODES,
            });
        }
        nodes.sort();
        for w in nodes.windows(2) {
            if w[0] == w[1] {
                return Err(FidError::DuplicateNode(w[0].to_string()));
            }
        }
        let n = nodes.len();
        Ok(GraphCore {
            nodes,
            pa: vec![NodeSet::EMPTY; n],
            ch: vec![NodeSet::EMPTY; n],
            sib: vec![NodeSet::EMPTY; n],
        })
    }

    pub(crate) fn index(&self, label: &str) -> Result<usize> {
        self.nodes
            .binary_search_by(|n| n.as_str().cmp(label))
            .map_err(|_| FidError::UnknownNode(label.to_string()))
    }

    pub(crate) fn add_directed(&mut self, a: usize, b: usize) -> Result<()> {
        if a == b {
            return Err(FidError::SelfLoop(self.nodes[a].to_string()));
        }
        self.ch[a].insert(b);
        self.pa[b].insert(a);
        Ok(())
    }

    pub(crate) fn remove_directed(&mut self, a: usize, b: usize) {
        self.ch[a].remove(b);
        self.pa[b].remove(a);
    }

    pub(crate) fn add_bidirected(&mut self, a: usize, b: usize) -> Result<()> {
        if a == b {
            return Err(FidError::SelfLoop(self.nodes[a].to_string()));
        }
        self.sib[a].insert(b);
        self.sib[b].insert(a);
        Ok(())
    }

    pub(crate) fn remove_bidirected(&mut self, a: usize, b: usize) {
        self.sib[a].remove(b);
        self.sib[b].remove(a);
    }

    pub(crate) fn add_labelled_edges<S: AsRef<str>>(
        &mut self,
        directed: &[(S, S)],
        bidirected: &[(S, S)],
    ) -> Result<()> {
        for (a, b) in directed {
            let (a, b) = (self.index(a.as_ref())?, self.index(b.as_ref())?);
            self.add_directed(a, b)?;
        }
        for (a, b) in bidirected {
            let (a, b) = (self.index(a.as_ref())?, self.index(b.as_ref())?);
            self.add_bidirected(a, b)?;
        }
        Ok(())
    }

    /// Topological order with ties broken by node index; `Err` names a node on a cycle.
    pub(crate) fn topo(&self) -> std::result::Result<Vec<usize>, usize> {
        let n = self.nodes.len();
        let mut indeg: Vec<usize> = self.pa.iter().map(|p| p.len()).collect();
        let mut ready: BTreeSet<usize> = (0..n).filter(|&i| indeg[i] == 0).collect();
        let mut order = Vec::with_capacity(n);
        while let Some(i) = ready.pop_first() {
            order.push(i);
            for c in self.ch[i].iter() {
                indeg[c] -= 1;
                if indeg[c] == 0 {
                    ready.insert(c);
                }
            }
        }
        if order.len() == n {
            Ok(order)
        } else {
            Err((0..n).find(|&i| indeg[i] > 0).unwrap_or(0))
        }
    }

    pub(crate) fn check_acyclic(&self) -> Result<()> {
        self.topo()
            .map(|_| ())
            .map_err(|i| FidError::Cycle(self.nodes[i].to_string()))
    }

    pub(crate) fn induced(&self, keep: NodeSet) -> GraphCore {
        let map: Vec<usize> = keep.iter().collect();
        let remap = |s: NodeSet| -> NodeSet {
            map.iter()
                .enumerate()
                .filter(|(_, &old)| s.contains(old))
                .map(|(new, _)| new)
                .collect()
        };
        GraphCore {
            nodes: map.iter().map(|&i| self.nodes[i].clone()).collect(),
            pa: map.iter().map(|&i| remap(self.pa[i])).collect(),
            ch: map.iter().map(|&i| remap(self.ch[i])).collect(),
            sib: map.iter().map(|&i| remap(self.sib[i])).collect(),
        }
    }
}

/// Read access to a graph with directed and bidirected edges.
///
/// Implementors provide the adjacency masks; every structural query is
/// derived from them. `random_set` restricts districts (fixed nodes of a
/// CADMG belong to no district).
pub trait MixedGraph {
    fn nodes(&self) -> &[NodeId];
    fn pa_set(&self, i: usize) -> NodeSet;
    fn ch_set(&self, i: usize) -> NodeSet;
    fn sib_set(&self, i: usize) -> NodeSet;

    fn random_set(&self) -> NodeSet {
        self.all_set()
    }

    fn len(&self) -> usize {
        self.nodes().len()
    }

    fn is_empty(&self) -> bool {
        self.nodes().is_empty()
    }

    fn all_set(&self) -> NodeSet {
        NodeSet::full(self.nodes().len())
    }

    fn index(&self, label: &str) -> Result<usize> {
        self.nodes()
            .binary_search_by(|n| n.as_str().cmp(label))
            .map_err(|_| FidError::UnknownNode(label.to_string()))
    }

    fn node(&self, i: usize) -> &NodeId {
        &self.nodes()[i]
    }

    fn ids(&self, s: NodeSet) -> BTreeSet<NodeId> {
        s.iter().map(|i| self.nodes()[i].clone()).collect()
    }

    fn set_of<S: AsRef<str>>(&self, labels: &[S]) -> Result<NodeSet>
    where
        Self: Sized,
    {
        labels.iter().map(|l| self.index(l.as_ref())).collect()
    }

    /// Union of the parents of every member of `s`.
    fn pa_of(&self, s: NodeSet) -> NodeSet {
        s.iter().fold(NodeSet::EMPTY, |acc, i| acc | self.pa_set(i))
    }

    /// Proper ancestors of `i`.
    fn an_set(&self, i: usize) -> NodeSet {
        self.an_incl(self.pa_set(i))
    }

    /// Proper descendants of `i`.
    fn de_set(&self, i: usize) -> NodeSet {
        self.de_incl(self.ch_set(i))
    }

    /// `s` together with all ancestors of its members.
    fn an_incl(&self, s: NodeSet) -> NodeSet {
        let mut out = s;
        let mut frontier = s;
        while let Some(i) = frontier.first() {
            frontier.remove(i);
            let new = self.pa_set(i) - out;
            out |= new;
            frontier |= new;
        }
        out
    }

    /// `s` together with all descendants of its members.
    fn de_incl(&self, s: NodeSet) -> NodeSet {
        let mut out = s;
        let mut frontier = s;
        while let Some(i) = frontier.first() {
            frontier.remove(i);
            let new = self.ch_set(i) - out;
            out |= new;
            frontier |= new;
        }
        out
    }

    fn nd_set(&self, i: usize) -> NodeSet {
        self.all_set() - self.de_set(i).with(i)
    }

    /// Bidirected-connected component of `i` among the nodes of `within`.
    fn district_within(&self, i: usize, within: NodeSet) -> NodeSet {
        if !within.contains(i) {
            return NodeSet::EMPTY;
        }
        let mut out = NodeSet::singleton(i);
        let mut frontier = out;
        while let Some(j) = frontier.first() {
            frontier.remove(j);
            let new = (self.sib_set(j) & within) - out;
            out |= new;
            frontier |= new;
        }
        out
    }

    fn district_set(&self, i: usize) -> NodeSet {
        self.district_within(i, self.random_set())
    }

    /// Districts of the random nodes, ordered by their smallest member.
    fn district_sets(&self) -> Vec<NodeSet> {
        districts_within(self, self.random_set())
    }

    fn parents(&self, x: &str) -> Result<BTreeSet<NodeId>> {
        Ok(self.ids(self.pa_set(self.index(x)?)))
    }

    fn children(&self, x: &str) -> Result<BTreeSet<NodeId>> {
        Ok(self.ids(self.ch_set(self.index(x)?)))
    }

    fn siblings(&self, x: &str) -> Result<BTreeSet<NodeId>> {
        Ok(self.ids(self.sib_set(self.index(x)?)))
    }

    fn ancestors(&self, x: &str) -> Result<BTreeSet<NodeId>> {
        Ok(self.ids(self.an_set(self.index(x)?)))
    }

    fn descendants(&self, x: &str) -> Result<BTreeSet<NodeId>> {
        Ok(self.ids(self.de_set(self.index(x)?)))
    }

    fn non_descendants(&self, x: &str) -> Result<BTreeSet<NodeId>> {
        Ok(self.ids(self.nd_set(self.index(x)?)))
    }

    fn districts(&self) -> Vec<BTreeSet<NodeId>> {
        self.district_sets().into_iter().map(|d| self.ids(d)).collect()
    }

    fn directed_edges(&self) -> Vec<(NodeId, NodeId)> {
        let mut out = Vec::new();
        for a in 0..self.len() {
            for b in self.ch_set(a).iter() {
                out.push((self.node(a).clone(), self.node(b).clone()));
            }
        }
        out
    }

    /// Bidirected edges with endpoints in canonical order.
    fn bidirected_edges(&self) -> Vec<(NodeId, NodeId)> {
        let mut out = Vec::new();
        for a in 0..self.len() {
            for b in self.sib_set(a).iter().filter(|&b| b > a) {
                out.push((self.node(a).clone(), self.node(b).clone()));
            }
        }
        out
    }

    fn has_bidirected(&self) -> bool {
        (0..self.len()).any(|i| !self.sib_set(i).is_empty())
    }

    /// Topological order, ties broken by canonical node order.
    fn topological_order(&self) -> Result<Vec<NodeId>> {
        let n = self.len();
        let mut indeg: Vec<usize> = (0..n).map(|i| self.pa_set(i).len()).collect();
        let mut ready: BTreeSet<usize> = (0..n).filter(|&i| indeg[i] == 0).collect();
        let mut order = Vec::with_capacity(n);
        while let Some(i) = ready.pop_first() {
            order.push(self.node(i).clone());
            for c in self.ch_set(i).iter() {
                indeg[c] -= 1;
                if indeg[c] == 0 {
                    ready.insert(c);
                }
            }
        }
        if order.len() < n {
            let bad = (0..n).find(|&i| indeg[i] > 0).unwrap_or(0);
            return Err(FidError::Cycle(self.node(bad).to_string()));
        }
        Ok(order)
    }

    /// m-connection between `x` and `y` given `z`, by reachability over
    /// (node, arrived-with-arrowhead) states.
    fn m_connected_idx(&self, x: usize, y: usize, z: NodeSet) -> bool {
        let an_z = self.an_incl(z);
        // visited[0]: arrived via a tail, visited[1]: arrived via an arrowhead
        let mut visited = [NodeSet::EMPTY; 2];
        let mut stack: Vec<(usize, bool)> = Vec::new();
        for c in self.ch_set(x).iter() {
            stack.push((c, true));
        }
        for s in self.sib_set(x).iter() {
            stack.push((s, true));
        }
        for p in self.pa_set(x).iter() {
            stack.push((p, false));
        }
        while let Some((v, into)) = stack.pop() {
            if v == y {
                return true;
            }
            let slot = into as usize;
            if visited[slot].contains(v) {
                continue;
            }
            visited[slot].insert(v);
            // leaving through a tail at v: v is a non-collider
            if !z.contains(v) {
                for c in self.ch_set(v).iter() {
                    stack.push((c, true));
                }
            }
            // leaving through an arrowhead at v
            let pass = if into { an_z.contains(v) } else { !z.contains(v) };
            if pass {
                for p in self.pa_set(v).iter() {
                    stack.push((p, false));
                }
                for s in self.sib_set(v).iter() {
                    stack.push((s, true));
                }
            }
        }
        false
    }

    fn m_separated<S: AsRef<str>>(&self, x: &str, y: &str, z: &[S]) -> Result<bool>
    where
        Self: Sized,
    {
        let (xi, yi) = (self.index(x)?, self.index(y)?);
        let zs = self.set_of(z)?;
        if xi == yi || zs.contains(xi) || zs.contains(yi) {
            return Err(FidError::InvalidArgument(format!(
                "m-separation needs distinct x, y outside the conditioning set (x={x}, y={y})"
            )));
        }
        Ok(!self.m_connected_idx(xi, yi, zs))
    }
}

/// Bidirected components of `g` restricted to `within`, ordered by smallest member.
pub(crate) fn districts_within<G: MixedGraph + ?Sized>(g: &G, within: NodeSet) -> Vec<NodeSet> {
    let mut out = Vec::new();
    let mut left = within;
    while let Some(i) = left.first() {
        let d = g.district_within(i, within);
        left = left - d;
        out.push(d);
    }
    out
}

macro_rules! delegate_core {
    ($t:ty) => {
        impl MixedGraph for $t {
            fn nodes(&self) -> &[NodeId] {
                &self.core.nodes
            }
            fn pa_set(&self, i: usize) -> NodeSet {
                self.core.pa[i]
            }
            fn ch_set(&self, i: usize) -> NodeSet {
                self.core.ch[i]
            }
            fn sib_set(&self, i: usize) -> NodeSet {
                self.core.sib[i]
            }
        }
    };
}

/// Acyclic directed mixed graph. Bows (`a -> b` with `a <-> b`) are allowed.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Admg {
    pub(crate) core: GraphCore,
}

delegate_core!(Admg);

impl Admg {
    pub fn new<S: AsRef<str>>(nodes: &[S], directed: &[(S, S)], bidirected: &[(S, S)]) -> Result<Admg> {
        let mut core = GraphCore::new(nodes)?;
        core.add_labelled_edges(directed, bidirected)?;
        Admg::from_core(core)
    }

    pub(crate) fn from_core(core: GraphCore) -> Result<Admg> {
        core.check_acyclic()?;
        Ok(Admg { core })
    }

    /// A DAG over `nodes` (no bidirected edges).
    pub fn dag<S: AsRef<str>>(nodes: &[S], directed: &[(S, S)]) -> Result<Admg> {
        Admg::new(nodes, directed, &[])
    }

    pub fn is_dag(&self) -> bool {
        !self.has_bidirected()
    }

    pub fn has_directed(&self, a: usize, b: usize) -> bool {
        self.core.ch[a].contains(b)
    }

    pub fn has_bidirected_edge(&self, a: usize, b: usize) -> bool {
        self.core.sib[a].contains(b)
    }

    pub fn directed_count(&self) -> usize {
        self.core.ch.iter().map(|c| c.len()).sum()
    }

    pub fn bidirected_count(&self) -> usize {
        self.core.sib.iter().map(|s| s.len()).sum::<usize>() / 2
    }

    pub fn induced_subgraph<S: AsRef<str>>(&self, keep: &[S]) -> Result<Admg> {
        Ok(self.induced(self.set_of(keep)?))
    }

    pub(crate) fn induced(&self, keep: NodeSet) -> Admg {
        Admg {
            core: self.core.induced(keep),
        }
    }

    /// Copy of this graph with `edit` applied to the adjacency, rejected if it
    /// would introduce a directed cycle.
    pub(crate) fn edited(&self, edit: impl FnOnce(&mut GraphCore) -> Result<()>) -> Result<Admg> {
        let mut core = self.core.clone();
        edit(&mut core)?;
        Admg::from_core(core)
    }

    pub fn same_nodes(&self, other: &Admg) -> bool {
        self.core.nodes == other.core.nodes
    }
}

/// Conditional ADMG: nodes split into random and fixed; no arrowhead points
/// into a fixed node.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Cadmg {
    pub(crate) core: GraphCore,
    pub(crate) fixed: NodeSet,
}

impl MixedGraph for Cadmg {
    fn nodes(&self) -> &[NodeId] {
        &self.core.nodes
    }
    fn pa_set(&self, i: usize) -> NodeSet {
        self.core.pa[i]
    }
    fn ch_set(&self, i: usize) -> NodeSet {
        self.core.ch[i]
    }
    fn sib_set(&self, i: usize) -> NodeSet {
        self.core.sib[i]
    }
    fn random_set(&self) -> NodeSet {
        self.all_set() - self.fixed
    }
}

impl Cadmg {
    pub fn new<S: AsRef<str>>(
        random: &[S],
        fixed: &[S],
        directed: &[(S, S)],
        bidirected: &[(S, S)],
    ) -> Result<Cadmg> {
        let labels: Vec<&str> = random.iter().chain(fixed).map(|s| s.as_ref()).collect();
        let mut core = GraphCore::new(&labels)?;
        core.add_labelled_edges(directed, bidirected)?;
        core.check_acyclic()?;
        let fixed_set: NodeSet = fixed
            .iter()
            .map(|f| core.index(f.as_ref()))
            .collect::<Result<_>>()?;
        for w in fixed_set.iter() {
            if !core.pa[w].is_empty() || !core.sib[w].is_empty() {
                return Err(FidError::InvalidGraph(format!(
                    "fixed node `{}` has an incoming arrowhead",
                    core.nodes[w]
                )));
            }
        }
        Ok(Cadmg {
            core,
            fixed: fixed_set,
        })
    }

    /// The CADMG with every node random.
    pub fn from_admg(g: &Admg) -> Cadmg {
        Cadmg {
            core: g.core.clone(),
            fixed: NodeSet::EMPTY,
        }
    }

    /// The graph reached from `g` by fixing every member of `fixed`: arrowheads
    /// into fixed nodes are dropped. Fixability is not checked here.
    pub(crate) fn reached(g: &Admg, fixed: NodeSet) -> Cadmg {
        let mut core = g.core.clone();
        for w in fixed.iter() {
            for p in core.pa[w].iter() {
                core.ch[p].remove(w);
            }
            core.pa[w] = NodeSet::EMPTY;
            for s in core.sib[w].iter() {
                core.sib[s].remove(w);
            }
            core.sib[w] = NodeSet::EMPTY;
        }
        Cadmg { core, fixed }
    }

    pub fn fixed_set(&self) -> NodeSet {
        self.fixed
    }

    pub fn random_nodes(&self) -> BTreeSet<NodeId> {
        self.ids(self.random_set())
    }

    pub fn fixed_nodes(&self) -> BTreeSet<NodeId> {
        self.ids(self.fixed)
    }

    pub fn induced_subgraph<S: AsRef<str>>(&self, keep: &[S]) -> Result<Cadmg> {
        let keep = self.set_of(keep)?;
        let core = self.core.induced(keep);
        let fixed = keep
            .iter()
            .enumerate()
            .filter(|(_, old)| self.fixed.contains(*old))
            .map(|(new, _)| new)
            .collect();
        Ok(Cadmg { core, fixed })
    }
}

/// Maximal ancestral graph (ancestrality is enforced on construction;
/// maximality is checked by [`Mag::is_maximal`]).
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Mag {
    pub(crate) core: GraphCore,
}

delegate_core!(Mag);

impl Mag {
    pub fn new<S: AsRef<str>>(nodes: &[S], directed: &[(S, S)], bidirected: &[(S, S)]) -> Result<Mag> {
        let mut core = GraphCore::new(nodes)?;
        core.add_labelled_edges(directed, bidirected)?;
        Mag::from_core(core)
    }

    pub(crate) fn from_core(core: GraphCore) -> Result<Mag> {
        core.check_acyclic()?;
        let mag = Mag { core };
        for a in 0..mag.len() {
            for b in mag.sib_set(a).iter() {
                if mag.an_set(a).contains(b) {
                    return Err(FidError::InvalidGraph(format!(
                        "arrowhead into ancestor: `{}` <-> `{}`",
                        mag.node(a),
                        mag.node(b)
                    )));
                }
            }
        }
        Ok(mag)
    }

    /// Every non-adjacent pair is m-separated by some subset of the other nodes.
    /// Exhaustive over conditioning sets; intended for small graphs.
    pub fn is_maximal(&self) -> bool {
        let n = self.len();
        for a in 0..n {
            for b in (a + 1)..n {
                let adjacent = self.ch_set(a).contains(b)
                    || self.pa_set(a).contains(b)
                    || self.sib_set(a).contains(b);
                if adjacent {
                    continue;
                }
                let rest = self.all_set().without(a).without(b);
                let separable = subsets(rest).any(|z| !self.m_connected_idx(a, b, z));
                if !separable {
                    return false;
                }
            }
        }
        true
    }

    /// View as an ADMG (every MAG without undirected edges is one).
    pub fn to_admg(&self) -> Admg {
        Admg {
            core: self.core.clone(),
        }
    }
}

/// All subsets of `s`.
pub(crate) fn subsets(s: NodeSet) -> impl Iterator<Item = NodeSet> {
    let full = s.bits();
    let mut cur: Option<u64> = Some(0);
    std::iter::from_fn(move || {
        let c = cur?;
        cur = if c == full { None } else { Some(c.wrapping_sub(full) & full) };
        Some(NodeSet::from_bits(c))
    })
}

/// A DAG over observed and latent nodes.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct DagWithLatents {
    pub(crate) core: GraphCore,
    pub(crate) latent: NodeSet,
}

delegate_core!(DagWithLatents);

impl DagWithLatents {
    pub fn new<S: AsRef<str>>(observed: &[S], latent: &[S], directed: &[(S, S)]) -> Result<Self> {
        let labels: Vec<&str> = observed.iter().chain(latent).map(|s| s.as_ref()).collect();
        let mut core = GraphCore::new(&labels)?;
        core.add_labelled_edges(directed, &[])?;
        core.check_acyclic()?;
        let latent = latent
            .iter()
            .map(|l| core.index(l.as_ref()))
            .collect::<Result<NodeSet>>()?;
        Ok(DagWithLatents { core, latent })
    }

    pub(crate) fn from_parts(core: GraphCore, latent: NodeSet) -> Result<Self> {
        core.check_acyclic()?;
        Ok(DagWithLatents { core, latent })
    }

    pub fn observed_nodes(&self) -> BTreeSet<NodeId> {
        self.ids(self.all_set() - self.latent)
    }

    pub fn latent_nodes(&self) -> BTreeSet<NodeId> {
        self.ids(self.latent)
    }

    pub fn latent_set(&self) -> NodeSet {
        self.latent
    }

    /// Latent projection onto the observed nodes: `a -> b` when a directed path
    /// from `a` to `b` has only latent interior nodes; `a <-> b` when a path
    /// with arrowheads at both ends has only latent non-collider interior nodes
    /// (equivalently, some latent reaches both through latent-only directed paths).
    pub fn latent_project(&self) -> Admg {
        let observed = self.all_set() - self.latent;
        let obs: Vec<usize> = observed.iter().collect();
        let mut core = GraphCore::from_ids(obs.iter().map(|&i| self.core.nodes[i].clone()).collect())
            .expect("observed subset of a valid graph");
        let pos = |i: usize| obs.iter().position(|&o| o == i).expect("observed");

        // latent ancestors reaching each observed node through latent-only paths
        let mut latent_sources = vec![NodeSet::EMPTY; self.len()];
        for &v in &obs {
            let mut seen = NodeSet::EMPTY;
            let mut frontier = self.core.pa[v] & self.latent;
            while let Some(l) = frontier.first() {
                frontier.remove(l);
                if seen.contains(l) {
                    continue;
                }
                seen.insert(l);
                frontier |= (self.core.pa[l] & self.latent) - seen;
            }
            latent_sources[v] = seen;
        }

        for &a in &obs {
            // directed: follow children through latents
            let mut seen = NodeSet::EMPTY;
            let mut frontier = self.core.ch[a];
            while let Some(c) = frontier.first() {
                frontier.remove(c);
                if seen.contains(c) {
                    continue;
                }
                seen.insert(c);
                if self.latent.contains(c) {
                    frontier |= self.core.ch[c] - seen;
                } else {
                    core.add_directed(pos(a), pos(c)).expect("distinct endpoints");
                }
            }
        }
        for (x, &a) in obs.iter().enumerate() {
            for &b in &obs[x + 1..] {
                if latent_sources[a].intersects(latent_sources[b]) {
                    core.add_bidirected(pos(a), pos(b)).expect("distinct endpoints");
                }
            }
        }
        Admg::from_core(core).expect("projection of a DAG is acyclic")
    }
}

/// Completed partially directed acyclic graph.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Cpdag {
    pub(crate) nodes: Vec<NodeId>,
    pub(crate) pa: Vec<NodeSet>,
    pub(crate) ch: Vec<NodeSet>,
    pub(crate) und: Vec<NodeSet>,
}

impl Cpdag {
    pub fn new<S: AsRef<str>>(nodes: &[S], directed: &[(S, S)], undirected: &[(S, S)]) -> Result<Cpdag> {
        let mut core = GraphCore::new(nodes)?;
        core.add_labelled_edges(directed, &[])?;
        core.check_acyclic()?;
        let mut und = vec![NodeSet::EMPTY; core.nodes.len()];
        for (a, b) in undirected {
            let (a, b) = (core.index(a.as_ref())?, core.index(b.as_ref())?);
            if a == b {
                return Err(FidError::SelfLoop(core.nodes[a].to_string()));
            }
            if core.ch[a].contains(b) || core.ch[b].contains(a) {
                return Err(FidError::InvalidGraph(format!(
                    "pair `{}`, `{}` is both directed and undirected",
                    core.nodes[a], core.nodes[b]
                )));
            }
            und[a].insert(b);
            und[b].insert(a);
        }
        Ok(Cpdag {
            nodes: core.nodes,
            pa: core.pa,
            ch: core.ch,
            und,
        })
    }

    /// The CPDAG whose edges are exactly the directed edges of `dag`.
    pub fn from_dag(dag: &Admg) -> Result<Cpdag> {
        if !dag.is_dag() {
            return Err(FidError::InvalidGraph("expected a DAG".into()));
        }
        Ok(Cpdag {
            nodes: dag.core.nodes.clone(),
            pa: dag.core.pa.clone(),
            ch: dag.core.ch.clone(),
            und: vec![NodeSet::EMPTY; dag.len()],
        })
    }

    pub fn nodes(&self) -> &[NodeId] {
        &self.nodes
    }

    pub fn directed_edges(&self) -> Vec<(NodeId, NodeId)> {
        let mut out = Vec::new();
        for a in 0..self.nodes.len() {
            for b in self.ch[a].iter() {
                out.push((self.nodes[a].clone(), self.nodes[b].clone()));
            }
        }
        out
    }

    pub fn undirected_edges(&self) -> Vec<(NodeId, NodeId)> {
        let mut out = Vec::new();
        for a in 0..self.nodes.len() {
            for b in self.und[a].iter().filter(|&b| b > a) {
                out.push((self.nodes[a].clone(), self.nodes[b].clone()));
            }
        }
        out
    }

    pub fn same_nodes(&self, other: &Cpdag) -> bool {
        self.nodes == other.nodes
    }
}
