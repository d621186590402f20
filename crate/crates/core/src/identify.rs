//! Identifiability of `p(y | do(t))` and enumeration of every fixing-based
//! identifying expression.
//!
//! An [`Identifier`] is bound to one graph and memoizes kernel expressions per
//! fixed set, so identifying many pairs of the same graph shares the work.

use std::collections::{BTreeSet, HashMap, HashSet};
use std::fmt;

use serde::Serialize;

use crate::error::{FidError, Result};
use crate::estimand::{canonicalize, fix_kernel_idx, Expr};
use crate::fixing::{blocker, count_sequences, fix_unchecked, intrinsic_masks, sequences_idx, Cap};
use crate::graph::{districts_within, Admg, Cadmg, MixedGraph};
use crate::node::{NodeId, NodeSet};

#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
pub struct PairQuery {
    pub treatment: NodeId,
    pub outcome: NodeId,
}

impl PairQuery {
    pub fn new(treatment: &str, outcome: &str) -> Result<PairQuery> {
        if treatment == outcome {
            return Err(FidError::InvalidArgument(format!(
                "treatment and outcome must differ (both `{treatment}`)"
            )));
        }
        Ok(PairQuery {
            treatment: NodeId::new(treatment)?,
            outcome: NodeId::new(outcome)?,
        })
    }
}

impl fmt::Display for PairQuery {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({}, {})", self.treatment, self.outcome)
    }
}

/// Every ordered pair of distinct nodes, in canonical order.
pub fn all_pairs<G: MixedGraph>(g: &G) -> Vec<PairQuery> {
    let mut out = Vec::new();
    for t in g.nodes() {
        for y in g.nodes() {
            if t != y {
                out.push(PairQuery {
                    treatment: t.clone(),
                    outcome: y.clone(),
                });
            }
        }
    }
    out
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum EstimandStatus {
    NotIdentifiable,
    Degenerate,
    Identified,
}

impl fmt::Display for EstimandStatus {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            EstimandStatus::NotIdentifiable => "not_identifiable",
            EstimandStatus::Degenerate => "degenerate",
            EstimandStatus::Identified => "identified",
        })
    }
}

/// Canonical identifying expressions for one pair, sorted by rendered form.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct EstimandSet {
    pub status: EstimandStatus,
    pub exprs: Vec<Expr>,
    pub truncated: bool,
}

impl EstimandSet {
    pub fn is_identified(&self) -> bool {
        !self.exprs.is_empty()
    }

    pub fn rendered(&self) -> Vec<String> {
        self.exprs.iter().map(Expr::render).collect()
    }
}

fn sorted_unique(exprs: HashSet<Expr>) -> Vec<Expr> {
    let mut keyed: Vec<(String, Expr)> = exprs.into_iter().map(|e| (e.render(), e)).collect();
    keyed.sort_by(|a, b| a.0.cmp(&b.0));
    keyed.into_iter().map(|(_, e)| e).collect()
}

/// `an(y)` in the graph with `t` removed, together with `y`.
pub(crate) fn y_star_idx(g: &Admg, t: usize, y: usize) -> NodeSet {
    let mut out = NodeSet::singleton(y);
    let mut frontier = out;
    while let Some(v) = frontier.first() {
        frontier.remove(v);
        let new = g.pa_set(v).without(t) - out;
        out |= new;
        frontier |= new;
    }
    out
}

pub fn y_star(g: &Admg, q: &PairQuery) -> Result<BTreeSet<NodeId>> {
    let (t, y) = pair_idx(g, q)?;
    Ok(g.ids(y_star_idx(g, t, y)))
}

fn pair_idx(g: &Admg, q: &PairQuery) -> Result<(usize, usize)> {
    let t = g.index(q.treatment.as_str())?;
    let y = g.index(q.outcome.as_str())?;
    if t == y {
        return Err(FidError::InvalidArgument(format!(
            "treatment and outcome must differ (both `{}`)",
            q.treatment
        )));
    }
    Ok((t, y))
}

/// Per-graph identification with memoized kernels.
pub struct Identifier<'g> {
    g: &'g Admg,
    cap: Cap,
    intrinsic: Option<BTreeSet<NodeSet>>,
    kernels: HashMap<NodeSet, Vec<Expr>>,
    factors: HashMap<NodeSet, (Vec<Expr>, bool)>,
    results: HashMap<(usize, usize), EstimandSet>,
}

impl<'g> Identifier<'g> {
    pub fn new(g: &'g Admg, cap: Cap) -> Self {
        Identifier {
            g,
            cap,
            intrinsic: None,
            kernels: HashMap::new(),
            factors: HashMap::new(),
            results: HashMap::new(),
        }
    }

    pub fn graph(&self) -> &'g Admg {
        self.g
    }

    fn intrinsic(&mut self) -> &BTreeSet<NodeSet> {
        let g = self.g;
        self.intrinsic.get_or_insert_with(|| intrinsic_masks(g))
    }

    pub fn is_identifiable(&mut self, q: &PairQuery) -> Result<bool> {
        let (t, y) = pair_idx(self.g, q)?;
        Ok(self.identifiable_idx(t, y))
    }

    fn identifiable_idx(&mut self, t: usize, y: usize) -> bool {
        let ys = y_star_idx(self.g, t, y);
        let ds = districts_within(self.g, ys);
        let intrinsic = self.intrinsic();
        ds.iter().all(|d| intrinsic.contains(d))
    }

    /// Canonical kernels over all valid fixing sequences of `fixed`; empty when
    /// `fixed` is not reachable.
    fn kernels_at(&mut self, fixed: NodeSet) -> Vec<Expr> {
        if let Some(k) = self.kernels.get(&fixed) {
            return k.clone();
        }
        let out = if fixed.is_empty() {
            vec![Expr::p(self.g.nodes().iter().cloned())]
        } else {
            let mut set = HashSet::new();
            for r in fixed.iter() {
                let prev = fixed.without(r);
                let before = self.kernels_at(prev);
                if before.is_empty() {
                    continue;
                }
                let graph = Cadmg::reached(self.g, prev);
                if blocker(&graph, r).is_some() {
                    continue;
                }
                for k in &before {
                    set.insert(fix_kernel_idx(k, &graph, r));
                }
            }
            sorted_unique(set)
        };
        self.kernels.insert(fixed, out.clone());
        out
    }

    /// Distinct kernels obtained by fixing everything outside `district`,
    /// and whether sequence enumeration was truncated by the cap.
    fn district_factors(&mut self, district: NodeSet) -> (Vec<Expr>, bool) {
        if let Some(f) = self.factors.get(&district) {
            return f.clone();
        }
        let target = self.g.all_set() - district;
        let over_cap = match self.cap.limit() {
            Some(l) => count_sequences(self.g, target) > l as u64,
            None => false,
        };
        let out = if over_cap {
            let (seqs, truncated) = sequences_idx(self.g, target, self.cap.limit());
            let mut set = HashSet::new();
            for seq in seqs {
                let mut graph = Cadmg::from_admg(self.g);
                let mut expr = Expr::p(self.g.nodes().iter().cloned());
                for r in seq {
                    expr = fix_kernel_idx(&expr, &graph, r);
                    graph = fix_unchecked(&graph, r);
                }
                set.insert(expr);
            }
            (sorted_unique(set), truncated)
        } else {
            (self.kernels_at(target), false)
        };
        self.factors.insert(district, out.clone());
        out
    }

    pub fn identify(&mut self, q: &PairQuery) -> Result<EstimandSet> {
        let (t, y) = pair_idx(self.g, q)?;
        self.identify_idx(t, y)
    }

    pub(crate) fn identify_idx(&mut self, t: usize, y: usize) -> Result<EstimandSet> {
        if let Some(r) = self.results.get(&(t, y)) {
            return Ok(r.clone());
        }
        let out = self.compute(t, y)?;
        self.results.insert((t, y), out.clone());
        Ok(out)
    }

    fn compute(&mut self, t: usize, y: usize) -> Result<EstimandSet> {
        let g = self.g;
        if !g.de_set(t).contains(y) {
            return Ok(EstimandSet {
                status: EstimandStatus::Degenerate,
                exprs: vec![Expr::p([g.node(y).clone()])],
                truncated: false,
            });
        }
        if !self.identifiable_idx(t, y) {
            return Ok(EstimandSet {
                status: EstimandStatus::NotIdentifiable,
                exprs: Vec::new(),
                truncated: false,
            });
        }
        let ys = y_star_idx(g, t, y);
        let mut truncated = false;
        let mut per_district = Vec::new();
        for d in districts_within(g, ys) {
            let (fs, trunc) = self.district_factors(d);
            if fs.is_empty() {
                return Err(FidError::Internal(format!(
                    "intrinsic district {:?} has no fixing sequence",
                    g.ids(d)
                )));
            }
            truncated |= trunc;
            per_district.push(fs);
        }

        let integrate: Vec<NodeId> = ys.without(y).iter().map(|i| g.node(i).clone()).collect();
        let limit = self.cap.limit().unwrap_or(usize::MAX);
        let mut set = HashSet::new();
        let mut choice = vec![0usize; per_district.len()];
        let mut combos = 0usize;
        loop {
            if combos == limit {
                truncated = true;
                break;
            }
            combos += 1;
            let body = Expr::Product(choice.iter().zip(&per_district).map(|(&c, fs)| fs[c].clone()).collect());
            let e = if integrate.is_empty() {
                body
            } else {
                Expr::integral(integrate.iter().cloned(), body)
            };
            set.insert(canonicalize(&e));

            // advance the odometer
            let mut i = 0;
            while i < choice.len() {
                choice[i] += 1;
                if choice[i] < per_district[i].len() {
                    break;
                }
                choice[i] = 0;
                i += 1;
            }
            if i == choice.len() {
                break;
            }
        }
        Ok(EstimandSet {
            status: EstimandStatus::Identified,
            exprs: sorted_unique(set),
            truncated,
        })
    }
}

pub fn is_identifiable(g: &Admg, q: &PairQuery) -> Result<bool> {
    Identifier::new(g, Cap::DEFAULT).is_identifiable(q)
}

pub fn identify_all(g: &Admg, q: &PairQuery, cap: Cap) -> Result<EstimandSet> {
    Identifier::new(g, cap).identify(q)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn q(t: &str, y: &str) -> PairQuery {
        PairQuery::new(t, y).unwrap()
    }

    fn ids(labels: &[&str]) -> BTreeSet<NodeId> {
        labels.iter().map(|l| NodeId::new(l).unwrap()).collect()
    }

    fn triangle() -> Admg {
        Admg::dag(&["x1", "x2", "x3"], &[("x2", "x1"), ("x2", "x3"), ("x1", "x3")]).unwrap()
    }

    fn chain3() -> Admg {
        Admg::dag(&["x1", "x2", "x3"], &[("x2", "x1"), ("x1", "x3")]).unwrap()
    }

    fn bow() -> Admg {
        Admg::new(&["T", "Y"], &[("T", "Y")], &[("T", "Y")]).unwrap()
    }

    #[test]
    fn y_star_examples() {
        assert_eq!(y_star(&triangle(), &q("x1", "x3")).unwrap(), ids(&["x2", "x3"]));
        assert_eq!(y_star(&chain3(), &q("x1", "x3")).unwrap(), ids(&["x3"]));
        let chain = Admg::dag(&["A", "B"], &[("A", "B")]).unwrap();
        assert_eq!(y_star(&chain, &q("A", "B")).unwrap(), ids(&["B"]));
        assert!(y_star(&chain, &q("A", "Z")).is_err());
        assert!(PairQuery::new("A", "A").is_err());
    }

    #[test]
    fn identifiability_examples() {
        assert!(!is_identifiable(&bow(), &q("T", "Y")).unwrap());
        let c = Admg::new(&["X1", "X2", "X3"], &[("X1", "X2"), ("X2", "X3")], &[("X2", "X3")]).unwrap();
        assert!(is_identifiable(&c, &q("X1", "X3")).unwrap());
        for p in all_pairs(&triangle()) {
            assert!(is_identifiable(&triangle(), &p).unwrap());
        }
    }

    #[test]
    fn triangle_and_chain_estimands() {
        let g = identify_all(&triangle(), &q("x1", "x3"), Cap::DEFAULT).unwrap();
        assert_eq!(g.status, EstimandStatus::Identified);
        assert_eq!(g.rendered(), vec!["int{x2} [ p(x1,x2,x3) * p(x2) / p(x1,x2) ]"]);
        let h = identify_all(&chain3(), &q("x1", "x3"), Cap::DEFAULT).unwrap();
        assert_eq!(h.status, EstimandStatus::Identified);
        assert!(h.rendered().contains(&"p(x1,x2,x3) / p(x1,x2)".to_string()));
    }

    #[test]
    fn degenerate_and_unidentifiable() {
        let chain = Admg::dag(&["A", "B"], &[("A", "B")]).unwrap();
        let d = identify_all(&chain, &q("B", "A"), Cap::DEFAULT).unwrap();
        assert_eq!(d.status, EstimandStatus::Degenerate);
        assert_eq!(d.rendered(), vec!["p(A)"]);
        let n = identify_all(&bow(), &q("T", "Y"), Cap::DEFAULT).unwrap();
        assert_eq!(n.status, EstimandStatus::NotIdentifiable);
        assert!(n.exprs.is_empty());
        // degenerate takes precedence over identifiability
        let d = identify_all(&bow(), &q("Y", "T"), Cap::DEFAULT).unwrap();
        assert_eq!(d.status, EstimandStatus::Degenerate);
    }

    #[test]
    fn backdoor_chain() {
        let chain = Admg::dag(&["A", "B"], &[("A", "B")]).unwrap();
        let s = identify_all(&chain, &q("A", "B"), Cap::DEFAULT).unwrap();
        assert_eq!(s.rendered(), vec!["p(A,B) / p(A)"]);
    }

    #[test]
    fn cap_truncation_is_flagged() {
        let g = Admg::dag(&["A", "B", "C", "D", "E"], &[("A", "E")]).unwrap();
        let s = identify_all(&g, &q("A", "E"), Cap::Limited(3)).unwrap();
        assert!(s.truncated);
        assert!(!identify_all(&g, &q("A", "E"), Cap::Unlimited).unwrap().truncated);
    }
}
