//! The symbolic verifier and the distance aggregates built on it.

use std::collections::HashSet;

use serde::{Deserialize, Serialize};

use crate::error::{FidError, Result};
use crate::estimand::Expr;
use crate::fixing::Cap;
use crate::graph::{Admg, MixedGraph};
use crate::identify::{EstimandSet, EstimandStatus, Identifier, PairQuery};

/// Score for a pair the reference graph identifies but the candidate does not.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum MissPolicy {
    /// Score 1.
    #[default]
    MissIsError,
    /// Score 0.
    MissIsZero,
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct FidOptions {
    pub cap: Cap,
    pub miss_policy: MissPolicy,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct PairScore {
    pub pair: PairQuery,
    pub value: f64,
    pub g_status: EstimandStatus,
    pub h_status: EstimandStatus,
    pub truncated: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct DistanceReport {
    pub reference: String,
    pub candidate: String,
    pub per_pair: Vec<PairScore>,
    pub total: f64,
    pub normalized: f64,
    pub truncated: bool,
}

impl DistanceReport {
    /// Label the two graphs (defaults are `ref` and `cand`).
    pub fn with_names(mut self, reference: &str, candidate: &str) -> Self {
        self.reference = reference.to_string();
        self.candidate = candidate.to_string();
        self
    }

    /// CSV with one row per pair: ref, cand, T, Y, score, g_status, h_status, truncated.
    pub fn write_csv<W: std::io::Write>(&self, w: W) -> Result<()> {
        let mut out = csv::Writer::from_writer(w);
        out.write_record(["ref", "cand", "T", "Y", "score", "g_status", "h_status", "truncated"])?;
        for p in &self.per_pair {
            out.write_record([
                self.reference.as_str(),
                self.candidate.as_str(),
                p.pair.treatment.as_str(),
                p.pair.outcome.as_str(),
                &format!("{:.6}", p.value),
                &p.g_status.to_string(),
                &p.h_status.to_string(),
                &p.truncated.to_string(),
            ])?;
        }
        out.flush()?;
        Ok(())
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SymmetricReport {
    pub forward: DistanceReport,
    pub backward: DistanceReport,
    pub total: f64,
    pub normalized: f64,
}

/// Fraction of the candidate's estimands not shared with the reference.
pub fn score_sets(eg: &EstimandSet, eh: &EstimandSet, q: &PairQuery, policy: MissPolicy) -> f64 {
    let marginal = [Expr::p([q.outcome.clone()])];
    let g_none = eg.exprs.is_empty();
    let h_none = eh.exprs.is_empty();
    if g_none && h_none {
        return 0.0;
    }
    if g_none {
        return 1.0;
    }
    if eh.exprs[..] == marginal[..] && eg.exprs[..] != marginal[..] {
        return 1.0;
    }
    if h_none {
        return match policy {
            MissPolicy::MissIsError => 1.0,
            MissPolicy::MissIsZero => 0.0,
        };
    }
    let g_set: HashSet<&Expr> = eg.exprs.iter().collect();
    let shared = eh.exprs.iter().filter(|e| g_set.contains(e)).count();
    1.0 - shared as f64 / eh.exprs.len() as f64
}

fn check_pair<G: MixedGraph>(g: &G, q: &PairQuery) -> Result<()> {
    g.index(q.treatment.as_str())?;
    g.index(q.outcome.as_str())?;
    if q.treatment == q.outcome {
        return Err(FidError::InvalidArgument(format!("degenerate pair {q}")));
    }
    Ok(())
}

/// Score one pair with memoized identifiers for both graphs.
pub fn verify_with(ig: &mut Identifier<'_>, ih: &mut Identifier<'_>, q: &PairQuery, policy: MissPolicy) -> Result<PairScore> {
    if !ig.graph().same_nodes(ih.graph()) {
        return Err(FidError::NodeSetMismatch);
    }
    let eg = ig.identify(q)?;
    let eh = ih.identify(q)?;
    Ok(PairScore {
        pair: q.clone(),
        value: score_sets(&eg, &eh, q, policy),
        g_status: eg.status,
        h_status: eh.status,
        truncated: eg.truncated || eh.truncated,
    })
}

pub fn verify(g_ref: &Admg, h_cand: &Admg, q: &PairQuery, opts: FidOptions) -> Result<PairScore> {
    verify_with(
        &mut Identifier::new(g_ref, opts.cap),
        &mut Identifier::new(h_cand, opts.cap),
        q,
        opts.miss_policy,
    )
}

/// Directional distance of `ih`'s graph from `ig`'s graph over `pairs`.
pub fn fid_with(
    ig: &mut Identifier<'_>,
    ih: &mut Identifier<'_>,
    pairs: &[PairQuery],
    policy: MissPolicy,
) -> Result<DistanceReport> {
    if !ig.graph().same_nodes(ih.graph()) {
        return Err(FidError::NodeSetMismatch);
    }
    if pairs.is_empty() {
        return Err(FidError::EmptyPairs);
    }
    let mut per_pair = Vec::with_capacity(pairs.len());
    for q in pairs {
        check_pair(ig.graph(), q)?;
        per_pair.push(verify_with(ig, ih, q, policy)?);
    }
    let total: f64 = per_pair.iter().map(|p| p.value).sum();
    Ok(DistanceReport {
        reference: "ref".into(),
        candidate: "cand".into(),
        normalized: total / pairs.len() as f64,
        truncated: per_pair.iter().any(|p| p.truncated),
        total,
        per_pair,
    })
}

pub fn fid(g: &Admg, h: &Admg, pairs: &[PairQuery], opts: FidOptions) -> Result<DistanceReport> {
    fid_with(
        &mut Identifier::new(g, opts.cap),
        &mut Identifier::new(h, opts.cap),
        pairs,
        opts.miss_policy,
    )
}

/// Mean of the two directional distances.
pub fn fid_symmetric(g1: &Admg, g2: &Admg, pairs: &[PairQuery], opts: FidOptions) -> Result<SymmetricReport> {
    let mut i1 = Identifier::new(g1, opts.cap);
    let mut i2 = Identifier::new(g2, opts.cap);
    let forward = fid_with(&mut i1, &mut i2, pairs, opts.miss_policy)?;
    let backward = fid_with(&mut i2, &mut i1, pairs, opts.miss_policy)?;
    Ok(SymmetricReport {
        total: (forward.total + backward.total) / 2.0,
        normalized: (forward.normalized + backward.normalized) / 2.0,
        forward,
        backward,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::identify::all_pairs;

    fn set(status: EstimandStatus, exprs: &[&str]) -> EstimandSet {
        EstimandSet {
            status,
            exprs: exprs.iter().map(|s| Expr::parse(s).unwrap()).collect(),
            truncated: false,
        }
    }

    fn q() -> PairQuery {
        PairQuery::new("t", "y").unwrap()
    }

    use EstimandStatus::*;

    #[test]
    fn verifier_branches() {
        let none = set(NotIdentifiable, &[]);
        let marg = set(Degenerate, &["p(y)"]);
        let two = set(Identified, &["p(t,y) / p(t)", "p(y)"]);
        let other = set(Identified, &["p(t,y) / p(t)", "int{u} [ p(t,u,y) / p(t,u) ]"]);
        let pol = MissPolicy::MissIsError;
        assert_eq!(score_sets(&none, &none, &q(), pol), 0.0);
        assert_eq!(score_sets(&none, &two, &q(), pol), 1.0);
        assert_eq!(score_sets(&two, &marg, &q(), pol), 1.0);
        assert_eq!(score_sets(&marg, &marg, &q(), pol), 0.0);
        assert_eq!(score_sets(&two, &other, &q(), pol), 0.5);
        assert_eq!(score_sets(&two, &none, &q(), MissPolicy::MissIsError), 1.0);
        assert_eq!(score_sets(&two, &none, &q(), MissPolicy::MissIsZero), 0.0);
    }

    #[test]
    fn identical_graphs_have_zero_distance() {
        let g = Admg::new(&["A", "B", "C"], &[("A", "B"), ("B", "C")], &[("A", "C")]).unwrap();
        let r = fid(&g, &g, &all_pairs(&g), FidOptions::default()).unwrap();
        assert_eq!(r.total, 0.0);
        assert_eq!(r.per_pair.len(), 6);
        let s = fid_symmetric(&g, &g, &all_pairs(&g), FidOptions::default()).unwrap();
        assert_eq!(s.total, 0.0);
    }

    #[test]
    fn single_pair_normalized_equals_score() {
        let g = Admg::dag(&["A", "B"], &[("A", "B")]).unwrap();
        let h = Admg::dag(&["A", "B"], &[("B", "A")]).unwrap();
        let pairs = [PairQuery::new("A", "B").unwrap()];
        let r = fid(&g, &h, &pairs, FidOptions::default()).unwrap();
        assert_eq!(r.normalized, r.per_pair[0].value);
        assert_eq!(r.total, 1.0);
    }

    #[test]
    fn errors() {
        let g = Admg::dag(&["A", "B"], &[]).unwrap();
        let h = Admg::dag(&["A", "C"], &[]).unwrap();
        let pairs = all_pairs(&g);
        assert_eq!(fid(&g, &h, &pairs, FidOptions::default()), Err(FidError::NodeSetMismatch));
        assert_eq!(fid(&g, &g, &[], FidOptions::default()), Err(FidError::EmptyPairs));
    }

    #[test]
    fn csv_rows() {
        let g = Admg::dag(&["A", "B"], &[("A", "B")]).unwrap();
        let r = fid(&g, &g, &all_pairs(&g), FidOptions::default()).unwrap();
        let mut buf = Vec::new();
        r.write_csv(&mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        assert_eq!(text.lines().count(), 3);
        assert!(text.starts_with("ref,cand,T,Y,score,g_status,h_status,truncated"));
        assert!(text.contains("ref,cand,A,B,0.000000,identified,identified,false"));
    }
}
