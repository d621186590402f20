//! Symbolic kernel expressions over the observational distribution, the
//! rewrite system that brings them to canonical form, and kernel-level fixing.

mod kernel;
mod rewrite;
mod text;

use std::collections::BTreeSet;
use std::fmt;

use serde::{Serialize, Serializer};

use crate::error::Result;
use crate::node::NodeId;

pub use kernel::{fix_kernel, KernelState};
pub(crate) use kernel::fix_kernel_idx;
pub use rewrite::{
    apply_at_root, canonicalize, canonicalize_randomized, canonicalize_traced, expr_equal, is_canonical,
    try_canonicalize, Firing, Rule, DEFAULT_STEP_BUDGET, RULES,
};

/// An expression tree. `Density { vars, given }` stands for `p(vars | given)`;
/// the empty density `p()` is the multiplicative unit.
#[derive(Clone, PartialEq, Eq, Hash)]
pub enum Expr {
    Density { vars: Vec<NodeId>, given: Vec<NodeId> },
    Product(Vec<Expr>),
    Fraction(Box<Expr>, Box<Expr>),
    Integral { vars: Vec<NodeId>, body: Box<Expr> },
}

impl Expr {
    pub fn unit() -> Expr {
        Expr::Density {
            vars: Vec::new(),
            given: Vec::new(),
        }
    }

    /// Joint density `p(vars)`.
    pub fn p(vars: impl IntoIterator<Item = NodeId>) -> Expr {
        Expr::Density {
            vars: vars.into_iter().collect(),
            given: Vec::new(),
        }
    }

    /// Conditional density `p(vars | given)`.
    pub fn cond(vars: impl IntoIterator<Item = NodeId>, given: impl IntoIterator<Item = NodeId>) -> Expr {
        Expr::Density {
            vars: vars.into_iter().collect(),
            given: given.into_iter().collect(),
        }
    }

    pub fn product(factors: Vec<Expr>) -> Expr {
        Expr::Product(factors)
    }

    pub fn fraction(num: Expr, den: Expr) -> Expr {
        Expr::Fraction(Box::new(num), Box::new(den))
    }

    pub fn integral(vars: impl IntoIterator<Item = NodeId>, body: Expr) -> Expr {
        Expr::Integral {
            vars: vars.into_iter().collect(),
            body: Box::new(body),
        }
    }

    pub fn parse(s: &str) -> Result<Expr> {
        text::parse(s)
    }

    pub fn render(&self) -> String {
        let mut out = String::new();
        text::render_into(self, &mut out);
        out
    }

    pub fn is_unit(&self) -> bool {
        matches!(self, Expr::Density { vars, given } if vars.is_empty() && given.is_empty())
    }

    /// Whether `v` occurs free (not bound by an enclosing integral).
    pub fn has_free(&self, v: &NodeId) -> bool {
        match self {
            Expr::Density { vars, given } => vars.contains(v) || given.contains(v),
            Expr::Product(fs) => fs.iter().any(|f| f.has_free(v)),
            Expr::Fraction(a, b) => a.has_free(v) || b.has_free(v),
            Expr::Integral { vars, body } => !vars.contains(v) && body.has_free(v),
        }
    }

    pub fn free_vars(&self) -> BTreeSet<NodeId> {
        let mut out = BTreeSet::new();
        self.collect_free(&mut out);
        out
    }

    fn collect_free(&self, out: &mut BTreeSet<NodeId>) {
        match self {
            Expr::Density { vars, given } => out.extend(vars.iter().chain(given).cloned()),
            Expr::Product(fs) => fs.iter().for_each(|f| f.collect_free(out)),
            Expr::Fraction(a, b) => {
                a.collect_free(out);
                b.collect_free(out);
            }
            Expr::Integral { vars, body } => {
                let mut inner = BTreeSet::new();
                body.collect_free(&mut inner);
                out.extend(inner.into_iter().filter(|v| !vars.contains(v)));
            }
        }
    }

    /// Number of tree nodes.
    pub fn size(&self) -> usize {
        match self {
            Expr::Density { .. } => 1,
            Expr::Product(fs) => 1 + fs.iter().map(Expr::size).sum::<usize>(),
            Expr::Fraction(a, b) => 1 + a.size() + b.size(),
            Expr::Integral { body, .. } => 1 + body.size(),
        }
    }
}

impl fmt::Display for Expr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.render())
    }
}

impl fmt::Debug for Expr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.render())
    }
}

impl Serialize for Expr {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.serialize_str(&self.render())
    }
}

impl std::str::FromStr for Expr {
    type Err = crate::error::FidError;
    fn from_str(s: &str) -> Result<Expr> {
        text::parse(s)
    }
}
