use super::{canonicalize, Expr};
use crate::error::{FidError, Result};
use crate::fixing::{blocker, fix_unchecked};
use crate::graph::{Admg, Cadmg, MixedGraph};
use crate::node::NodeSet;

/// A kernel expression together with the CADMG it is Markov to.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct KernelState {
    pub expr: Expr,
    pub graph: Cadmg,
}

impl KernelState {
    /// The observational joint over every node of `g`.
    pub fn initial(g: &Admg) -> KernelState {
        KernelState {
            expr: Expr::p(g.nodes().iter().cloned()),
            graph: Cadmg::from_admg(g),
        }
    }
}

fn integrate(g: &Cadmg, vars: NodeSet, e: &Expr) -> Expr {
    if vars.is_empty() {
        e.clone()
    } else {
        Expr::integral(vars.iter().map(|i| g.node(i).clone()), e.clone())
    }
}

/// Kernel fixing of node `r` of `graph` (assumed fixable). A childless node is
/// integrated out; otherwise the kernel is divided by its own conditional of
/// `r` given the non-descendants of `r` (random non-descendants and all fixed
/// nodes). The result is canonical.
pub(crate) fn fix_kernel_idx(expr: &Expr, graph: &Cadmg, r: usize) -> Expr {
    let random = graph.random_set();
    if (graph.ch_set(r) & random).is_empty() {
        return canonicalize(&integrate(graph, NodeSet::singleton(r), expr));
    }
    let de = graph.de_set(r) & random;
    let joint = integrate(graph, de, expr);
    let marginal = integrate(graph, de.with(r), expr);
    canonicalize(&Expr::fraction(expr.clone(), Expr::fraction(joint, marginal)))
}

pub fn fix_kernel(k: &KernelState, r: &str) -> Result<KernelState> {
    let i = k.graph.index(r)?;
    if !k.graph.random_set().contains(i) {
        return Err(FidError::NotRandom(r.to_string()));
    }
    if let Some(c) = blocker(&k.graph, i) {
        return Err(FidError::NotFixable {
            node: r.to_string(),
            blocker: k.graph.node(c).to_string(),
        });
    }
    Ok(KernelState {
        expr: fix_kernel_idx(&k.expr, &k.graph, i),
        graph: fix_unchecked(&k.graph, i),
    })
}
