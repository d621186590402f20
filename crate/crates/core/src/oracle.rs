//! Discrete latent-variable models used as numeric ground truth: exact joint
//! and interventional tables, and numeric evaluation of expressions.

use std::collections::HashMap;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{FidError, Result};
use crate::estimand::Expr;
use crate::graph::{Admg, DagWithLatents, GraphCore, MixedGraph};
use crate::node::{NodeId, NodeSet};

/// Smallest probability in any sampled table row.
pub const CPT_FLOOR: f64 = 0.05;

/// A DAG with latents and one conditional probability table per node.
#[derive(Clone, Debug)]
pub struct DiscreteScm {
    pub graph: DagWithLatents,
    /// Cardinality per node index of `graph`.
    pub card: Vec<usize>,
    /// Per node: rows indexed by the parent configuration (parents in
    /// increasing index order, first parent varying fastest), each row a
    /// distribution over the node's values.
    pub cpts: Vec<Vec<Vec<f64>>>,
}

fn parent_row(pa: NodeSet, card: &[usize], values: &[usize]) -> usize {
    let mut row = 0;
    let mut stride = 1;
    for p in pa.iter() {
        row += values[p] * stride;
        stride *= card[p];
    }
    row
}

fn floored_simplex<R: Rng>(k: usize, floor: f64, rng: &mut R) -> Vec<f64> {
    let w: Vec<f64> = (0..k).map(|_| -(1.0 - rng.random::<f64>()).ln()).collect();
    let total: f64 = w.iter().sum();
    let free = 1.0 - floor * k as f64;
    w.into_iter().map(|x| floor + free * x / total).collect()
}

impl DiscreteScm {
    /// Random tables for `graph` with every node of cardinality `card`.
    pub fn random(graph: DagWithLatents, card: usize, seed: u64) -> Result<DiscreteScm> {
        if card < 2 || CPT_FLOOR * card as f64 >= 1.0 {
            return Err(FidError::InvalidArgument(format!(
                "cardinality must be between 2 and {}",
                ((1.0 / CPT_FLOOR) as usize) - 1
            )));
        }
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let n = graph.len();
        let cards = vec![card; n];
        let cpts = (0..n)
            .map(|v| {
                let rows: usize = graph.pa_set(v).iter().map(|p| cards[p]).product();
                (0..rows).map(|_| floored_simplex(cards[v], CPT_FLOOR, &mut rng)).collect()
            })
            .collect();
        Ok(DiscreteScm {
            graph,
            card: cards,
            cpts,
        })
    }

    /// Observed indices of `graph` in order.
    fn observed(&self) -> Vec<usize> {
        (self.graph.all_set() - self.graph.latent_set()).iter().collect()
    }

    /// Joint over the observed nodes, with `intervention` (node index, value)
    /// replacing that node's table by a point mass.
    fn joint(&self, intervention: Option<(usize, usize)>) -> JointTable {
        let n = self.graph.len();
        let obs = self.observed();
        let obs_card: Vec<usize> = obs.iter().map(|&o| self.card[o]).collect();
        let size: usize = obs_card.iter().product();
        let mut probs = vec![0.0; size];
        let order: Vec<usize> = self.graph.core.topo().expect("acyclic");
        let mut values = vec![0usize; n];
        // odometer over every node's value
        loop {
            let mut pr = 1.0;
            for &v in &order {
                let f = match intervention {
                    Some((t, tv)) if t == v => (values[v] == tv) as u8 as f64,
                    _ => self.cpts[v][parent_row(self.graph.pa_set(v), &self.card, &values)][values[v]],
                };
                pr *= f;
                if pr == 0.0 {
                    break;
                }
            }
            if pr != 0.0 {
                let mut idx = 0;
                let mut stride = 1;
                for (k, &o) in obs.iter().enumerate() {
                    idx += values[o] * stride;
                    stride *= obs_card[k];
                }
                probs[idx] += pr;
            }
            let mut i = 0;
            while i < n {
                values[i] += 1;
                if values[i] < self.card[i] {
                    break;
                }
                values[i] = 0;
                i += 1;
            }
            if i == n {
                break;
            }
        }
        JointTable {
            nodes: obs.iter().map(|&o| self.graph.node(o).clone()).collect(),
            card: obs_card,
            probs,
        }
    }

    pub fn observational(&self) -> JointTable {
        self.joint(None)
    }

    /// Joint over the observed nodes other than `t` after setting `t` to `value`.
    pub fn interventional(&self, t: &str, value: usize) -> Result<JointTable> {
        let ti = self.graph.index(t)?;
        if self.graph.latent_set().contains(ti) {
            return Err(FidError::InvalidArgument(format!("`{t}` is latent")));
        }
        if value >= self.card[ti] {
            return Err(FidError::InvalidArgument(format!("value {value} out of range for `{t}`")));
        }
        let full = self.joint(Some((ti, value)));
        let keep: Vec<NodeId> = full.nodes.iter().filter(|n| n.as_str() != t).cloned().collect();
        full.marginal(&keep)
    }
}

/// Canonical latent embedding of `g`: one fresh latent parent per bidirected
/// edge, random tables with the given cardinality.
pub fn scm_for_admg(g: &Admg, card: usize, seed: u64) -> Result<DiscreteScm> {
    let mut labels: Vec<NodeId> = g.nodes().to_vec();
    let mut latent_names = Vec::new();
    for (a, b) in g.bidirected_edges() {
        let mut name = format!("_L.{a}.{b}");
        while labels.iter().any(|l| l.as_str() == name) {
            name.push('_');
        }
        let id = NodeId::new(&name)?;
        labels.push(id.clone());
        latent_names.push((id, a, b));
    }
    let mut core = GraphCore::from_ids(labels)?;
    for (a, b) in g.directed_edges() {
        let (a, b) = (core.index(a.as_str())?, core.index(b.as_str())?);
        core.add_directed(a, b)?;
    }
    let mut latent = NodeSet::EMPTY;
    for (l, a, b) in &latent_names {
        let li = core.index(l.as_str())?;
        latent.insert(li);
        let (ai, bi) = (core.index(a.as_str())?, core.index(b.as_str())?);
        core.add_directed(li, ai)?;
        core.add_directed(li, bi)?;
    }
    let dag = DagWithLatents::from_parts(core, latent)?;
    DiscreteScm::random(dag, card, seed)
}

/// A probability table over named discrete variables. The first node varies
/// fastest in `probs`.
#[derive(Clone, Debug, PartialEq)]
pub struct JointTable {
    pub nodes: Vec<NodeId>,
    pub card: Vec<usize>,
    pub probs: Vec<f64>,
}

impl JointTable {
    fn position(&self, v: &str) -> Result<usize> {
        self.nodes
            .iter()
            .position(|n| n.as_str() == v)
            .ok_or_else(|| FidError::UnknownNode(v.to_string()))
    }

    pub fn cardinality(&self, v: &str) -> Result<usize> {
        Ok(self.card[self.position(v)?])
    }

    /// Marginal table over `keep` (in the given order).
    pub fn marginal(&self, keep: &[NodeId]) -> Result<JointTable> {
        let pos: Vec<usize> = keep.iter().map(|k| self.position(k.as_str())).collect::<Result<_>>()?;
        let card: Vec<usize> = pos.iter().map(|&p| self.card[p]).collect();
        let mut probs = vec![0.0; card.iter().product()];
        let mut values = vec![0usize; self.nodes.len()];
        for &pr in &self.probs {
            let mut idx = 0;
            let mut stride = 1;
            for (k, &p) in pos.iter().enumerate() {
                idx += values[p] * stride;
                stride *= card[k];
            }
            probs[idx] += pr;
            for (i, v) in values.iter_mut().enumerate() {
                *v += 1;
                if *v < self.card[i] {
                    break;
                }
                *v = 0;
            }
        }
        Ok(JointTable {
            nodes: keep.to_vec(),
            card,
            probs,
        })
    }

    /// Probability of an assignment covering every node of the table.
    pub fn get(&self, assignment: &HashMap<NodeId, usize>) -> Result<f64> {
        let mut idx = 0;
        let mut stride = 1;
        for (k, n) in self.nodes.iter().enumerate() {
            let v = *assignment
                .get(n)
                .ok_or_else(|| FidError::Eval(format!("no value for `{n}`")))?;
            idx += v * stride;
            stride *= self.card[k];
        }
        Ok(self.probs[idx])
    }
}

/// Numeric evaluation of expressions against an observational table. Marginal
/// tables are cached per variable set.
pub struct Evaluator<'t> {
    table: &'t JointTable,
    cache: HashMap<Vec<usize>, Vec<f64>>,
}

impl<'t> Evaluator<'t> {
    pub fn new(table: &'t JointTable) -> Self {
        Evaluator {
            table,
            cache: HashMap::new(),
        }
    }

    fn density(&mut self, vars: &[NodeId], assignment: &HashMap<NodeId, usize>) -> Result<f64> {
        let mut pos: Vec<usize> = vars.iter().map(|v| self.table.position(v.as_str())).collect::<Result<_>>()?;
        pos.sort_unstable();
        pos.dedup();
        if pos.len() != vars.len() {
            return Err(FidError::Eval("repeated variable in a density".into()));
        }
        if !self.cache.contains_key(&pos) {
            let keep: Vec<NodeId> = pos.iter().map(|&p| self.table.nodes[p].clone()).collect();
            let m = self.table.marginal(&keep)?;
            self.cache.insert(pos.clone(), m.probs);
        }
        let probs = &self.cache[&pos];
        let mut idx = 0;
        let mut stride = 1;
        for &p in &pos {
            let n = &self.table.nodes[p];
            let v = *assignment
                .get(n)
                .ok_or_else(|| FidError::Eval(format!("no value for `{n}`")))?;
            if v >= self.table.card[p] {
                return Err(FidError::Eval(format!("value {v} out of range for `{n}`")));
            }
            idx += v * stride;
            stride *= self.table.card[p];
        }
        Ok(probs[idx])
    }

    pub fn eval(&mut self, e: &Expr, assignment: &mut HashMap<NodeId, usize>) -> Result<f64> {
        match e {
            Expr::Density { vars, given } => {
                if given.is_empty() {
                    return self.density(vars, assignment);
                }
                let joint: Vec<NodeId> = vars.iter().chain(given).cloned().collect();
                let num = self.density(&joint, assignment)?;
                let den = self.density(given, assignment)?;
                if den == 0.0 {
                    return Err(FidError::Eval(format!("zero marginal in {e}")));
                }
                Ok(num / den)
            }
            Expr::Product(fs) => {
                let mut acc = 1.0;
                for f in fs {
                    acc *= self.eval(f, assignment)?;
                }
                Ok(acc)
            }
            Expr::Fraction(a, b) => {
                let den = self.eval(b, assignment)?;
                if den == 0.0 {
                    return Err(FidError::Eval(format!("zero denominator in {e}")));
                }
                Ok(self.eval(a, assignment)? / den)
            }
            Expr::Integral { vars, body } => {
                let cards: Vec<usize> = vars
                    .iter()
                    .map(|v| self.table.cardinality(v.as_str()))
                    .collect::<Result<_>>()?;
                let saved: Vec<Option<usize>> = vars.iter().map(|v| assignment.get(v).copied()).collect();
                let mut values = vec![0usize; vars.len()];
                let mut total = 0.0;
                let result = loop {
                    for (v, &x) in vars.iter().zip(&values) {
                        assignment.insert(v.clone(), x);
                    }
                    match self.eval(body, assignment) {
                        Ok(x) => total += x,
                        Err(err) => break Err(err),
                    }
                    let mut i = 0;
                    while i < values.len() {
                        values[i] += 1;
                        if values[i] < cards[i] {
                            break;
                        }
                        values[i] = 0;
                        i += 1;
                    }
                    if i == values.len() {
                        break Ok(total);
                    }
                };
                for (v, s) in vars.iter().zip(saved) {
                    match s {
                        Some(x) => assignment.insert(v.clone(), x),
                        None => assignment.remove(v),
                    };
                }
                result
            }
        }
    }
}

/// Evaluate `e` once against `table`.
pub fn eval_expr(e: &Expr, table: &JointTable, assignment: &HashMap<NodeId, usize>) -> Result<f64> {
    Evaluator::new(table).eval(e, &mut assignment.clone())
}
