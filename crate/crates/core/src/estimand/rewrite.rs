//! Canonicalization as root-local rewrite rules.
//!
//! Each [`Rule`] inspects only the root of a subtree. The deterministic
//! strategy normalizes children first, then tries the rules at the root in
//! [`RULES`] order, re-normalizing after every firing. The randomized strategy
//! fires a random redex anywhere in the tree; both stop when no rule applies.

use std::collections::BTreeSet;

use rand::Rng;

use super::Expr;
use crate::error::{FidError, Result};
use crate::node::NodeId;

/// Rewrite steps allowed per canonicalization before giving up.
pub const DEFAULT_STEP_BUDGET: usize = 1_000_000;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Rule {
    /// `p(a|b)` becomes `p(a,b) / p(b)`.
    CondExpand,
    /// Density and integral variable lists in canonical node order.
    CanonicalOrder,
    /// Splice nested products, drop units, pull fractions to the top of a
    /// product, collapse fractions of fractions.
    Flatten,
    /// Remove one factor shared by numerator and denominator.
    Cancel,
    /// Integrate out variables that occur in a single numerator density,
    /// merge nested integrals, and move integrand factors that do not depend
    /// on the integration variables outside the integral.
    Marginal,
    /// Product factors ordered by their rendered form.
    ProductSort,
}

pub const RULES: [Rule; 6] = [
    Rule::CondExpand,
    Rule::CanonicalOrder,
    Rule::Flatten,
    Rule::Cancel,
    Rule::Marginal,
    Rule::ProductSort,
];

/// One rule application, on the subtree where it fired.
#[derive(Clone, Debug)]
pub struct Firing {
    pub rule: Rule,
    pub before: Expr,
    pub after: Expr,
}

/// Multiplicative factors of `e` (the unit has none).
fn factors(e: &Expr) -> Vec<Expr> {
    match e {
        Expr::Product(fs) => fs.clone(),
        _ if e.is_unit() => Vec::new(),
        _ => vec![e.clone()],
    }
}

fn build(mut fs: Vec<Expr>) -> Expr {
    match fs.len() {
        0 => Expr::unit(),
        1 => fs.pop().expect("one factor"),
        _ => Expr::Product(fs),
    }
}

fn quotient(num: Vec<Expr>, den: Vec<Expr>) -> Expr {
    if den.is_empty() {
        build(num)
    } else {
        Expr::fraction(build(num), build(den))
    }
}

fn sorted(vs: &[NodeId]) -> bool {
    vs.windows(2).all(|w| w[0] <= w[1])
}

pub fn apply_at_root(rule: Rule, e: &Expr) -> Option<Expr> {
    match rule {
        Rule::CondExpand => cond_expand(e),
        Rule::CanonicalOrder => canonical_order(e),
        Rule::Flatten => flatten(e),
        Rule::Cancel => cancel(e),
        Rule::Marginal => marginal(e),
        Rule::ProductSort => product_sort(e),
    }
}

fn cond_expand(e: &Expr) -> Option<Expr> {
    match e {
        Expr::Density { vars, given } if !given.is_empty() => {
            let joint = vars.iter().chain(given).cloned();
            Some(Expr::fraction(Expr::p(joint), Expr::p(given.iter().cloned())))
        }
        _ => None,
    }
}

fn canonical_order(e: &Expr) -> Option<Expr> {
    match e {
        Expr::Density { vars, given } if !sorted(vars) || !sorted(given) => {
            let (mut vars, mut given) = (vars.clone(), given.clone());
            vars.sort();
            given.sort();
            Some(Expr::Density { vars, given })
        }
        Expr::Integral { vars, body } if !sorted(vars) => {
            let mut vars = vars.clone();
            vars.sort();
            Some(Expr::Integral {
                vars,
                body: body.clone(),
            })
        }
        _ => None,
    }
}

fn flatten(e: &Expr) -> Option<Expr> {
    match e {
        Expr::Product(fs) => {
            if fs.iter().any(|f| f.is_unit() || matches!(f, Expr::Product(_))) {
                let mut out = Vec::new();
                for f in fs {
                    out.extend(factors(f));
                }
                return Some(build(out));
            }
            if fs.len() < 2 {
                return Some(build(fs.clone()));
            }
            if fs.iter().any(|f| matches!(f, Expr::Fraction(..))) {
                let (mut num, mut den) = (Vec::new(), Vec::new());
                for f in fs {
                    match f {
                        Expr::Fraction(a, b) => {
                            num.push((**a).clone());
                            den.push((**b).clone());
                        }
                        _ => num.push(f.clone()),
                    }
                }
                return Some(Expr::fraction(build(num), build(den)));
            }
            None
        }
        Expr::Fraction(a, b) => {
            if let Expr::Fraction(a1, a2) = &**a {
                return Some(Expr::fraction(
                    (**a1).clone(),
                    Expr::Product(vec![(**a2).clone(), (**b).clone()]),
                ));
            }
            if let Expr::Fraction(b1, b2) = &**b {
                return Some(Expr::fraction(
                    Expr::Product(vec![(**a).clone(), (**b2).clone()]),
                    (**b1).clone(),
                ));
            }
            if b.is_unit() {
                return Some((**a).clone());
            }
            None
        }
        _ => None,
    }
}

fn cancel(e: &Expr) -> Option<Expr> {
    let Expr::Fraction(a, b) = e else {
        return None;
    };
    let (mut num, mut den) = (factors(a), factors(b));
    for i in 0..num.len() {
        if let Some(j) = den.iter().position(|d| *d == num[i]) {
            num.remove(i);
            den.remove(j);
            return Some(Expr::fraction(build(num), build(den)));
        }
    }
    // volumes sharing variables across the bar
    for i in 0..num.len() {
        let Some(a) = volume_vars(&num[i]) else { continue };
        for j in 0..den.len() {
            let Some(b) = volume_vars(&den[j]) else { continue };
            if !a.iter().any(|v| b.contains(v)) {
                continue;
            }
            let left: Vec<NodeId> = a.iter().filter(|v| !b.contains(v)).cloned().collect();
            let right: Vec<NodeId> = b.iter().filter(|v| !a.contains(v)).cloned().collect();
            num[i] = Expr::integral(left, Expr::unit());
            den[j] = Expr::integral(right, Expr::unit());
            num.retain(|f| volume_vars(f).is_none_or(|vs| !vs.is_empty()));
            den.retain(|f| volume_vars(f).is_none_or(|vs| !vs.is_empty()));
            return Some(Expr::fraction(build(num), build(den)));
        }
    }
    None
}

/// Variables of a volume factor `int{..} [ 1 ]`.
fn volume_vars(f: &Expr) -> Option<&[NodeId]> {
    match f {
        Expr::Integral { vars, body } if body.is_unit() => Some(vars),
        _ => None,
    }
}

fn marginal(e: &Expr) -> Option<Expr> {
    match e {
        Expr::Integral { vars, body } => integral_rewrite(vars, body),
        Expr::Product(fs) => merge_volumes(fs),
        _ => None,
    }
}

fn integral_rewrite(vars: &[NodeId], body: &Expr) -> Option<Expr> {
    if vars.is_empty() {
        return Some(body.clone());
    }
    if let Expr::Integral { vars: inner, body: b } = body {
        if !inner.iter().any(|v| vars.contains(v)) {
            return Some(Expr::integral(vars.iter().chain(inner).cloned(), (**b).clone()));
        }
    }
    // variables the body does not mention split off as a volume factor
    if !body.is_unit() && vars.iter().any(|v| !body.has_free(v)) {
        let (used, unused): (Vec<NodeId>, Vec<NodeId>) = vars.iter().cloned().partition(|v| body.has_free(v));
        return Some(Expr::Product(vec![
            Expr::integral(used, body.clone()),
            Expr::integral(unused, Expr::unit()),
        ]));
    }
    let (mut num, den) = match body {
        Expr::Fraction(n, d) => (factors(n), factors(d)),
        _ => (factors(body), Vec::new()),
    };

    // a variable carried by exactly one numerator factor and no denominator factor
    for v in vars {
        if den.iter().any(|d| d.has_free(v)) {
            continue;
        }
        let mut holders = num.iter().enumerate().filter(|(_, f)| f.has_free(v));
        let (Some((h, _)), None) = (holders.next(), holders.next()) else {
            continue;
        };
        let replaced = match &num[h] {
            Expr::Density { vars: dv, given } if given.is_empty() => Expr::Density {
                vars: dv.iter().filter(|x| *x != v).cloned().collect(),
                given: Vec::new(),
            },
            _ => continue,
        };
        num[h] = replaced;
        let rest = vars.iter().filter(|x| *x != v).cloned();
        return Some(Expr::integral(rest, quotient(num, den)));
    }

    // an integral factor depending on the outer variables is merged into the outer integral
    for h in 0..num.len() {
        let Expr::Integral { vars: ws, body: b } = &num[h] else {
            continue;
        };
        if ws.iter().any(|w| vars.contains(w)) || !vars.iter().any(|v| num[h].has_free(v)) {
            continue;
        }
        let others = num.iter().enumerate().filter(|(k, _)| *k != h).map(|(_, f)| f);
        let mut others = others.chain(&den);
        if others.any(|f| ws.iter().any(|w| f.has_free(w))) {
            continue;
        }
        let (inner_num, inner_den) = match &**b {
            Expr::Fraction(n, d) => (factors(n), factors(d)),
            _ => (factors(b), Vec::new()),
        };
        let all_vars = vars.iter().chain(ws).cloned().collect::<Vec<_>>();
        let mut new_num = num.clone();
        new_num.remove(h);
        new_num.extend(inner_num);
        let mut new_den = den.clone();
        new_den.extend(inner_den);
        return Some(Expr::integral(all_vars, quotient(new_num, new_den)));
    }

    // factors free of every integration variable move outside
    let depends = |f: &Expr| vars.iter().any(|v| f.has_free(v));
    if num.iter().chain(&den).any(|f| !depends(f)) {
        let (dep_num, mut out_num): (Vec<Expr>, Vec<Expr>) = num.into_iter().partition(|f| depends(f));
        let (dep_den, out_den): (Vec<Expr>, Vec<Expr>) = den.into_iter().partition(|f| depends(f));
        out_num.push(Expr::integral(vars.iter().cloned(), quotient(dep_num, dep_den)));
        return Some(quotient(out_num, out_den));
    }
    None
}

/// `int{a} [ 1 ] * int{b} [ 1 ]` over disjoint variables becomes `int{a,b} [ 1 ]`.
fn merge_volumes(fs: &[Expr]) -> Option<Expr> {
    let volume = |f: &Expr| volume_vars(f).map(<[NodeId]>::to_vec);
    for i in 0..fs.len() {
        let Some(a) = volume(&fs[i]) else { continue };
        for j in (i + 1)..fs.len() {
            let Some(b) = volume(&fs[j]) else { continue };
            // volumes only depend on the multiset of their variables; a chain
            // of nested sets is the unique representative
            if a.iter().all(|v| b.contains(v)) || b.iter().all(|v| a.contains(v)) {
                continue;
            }
            let both: Vec<NodeId> = a.iter().filter(|v| b.contains(v)).cloned().collect();
            let mut out: Vec<Expr> = Vec::with_capacity(fs.len());
            for (k, f) in fs.iter().enumerate() {
                if k == i {
                    let union: BTreeSet<NodeId> = a.iter().chain(&b).cloned().collect();
                    out.push(Expr::integral(union, Expr::unit()));
                    if !both.is_empty() {
                        out.push(Expr::integral(both.clone(), Expr::unit()));
                    }
                } else if k != j {
                    out.push(f.clone());
                }
            }
            return Some(build(out));
        }
    }
    None
}

fn product_sort(e: &Expr) -> Option<Expr> {
    let Expr::Product(fs) = e else {
        return None;
    };
    let keys: Vec<String> = fs.iter().map(Expr::render).collect();
    if keys.windows(2).all(|w| w[0] <= w[1]) {
        return None;
    }
    let mut keyed: Vec<(String, Expr)> = keys.into_iter().zip(fs.iter().cloned()).collect();
    keyed.sort_by(|a, b| a.0.cmp(&b.0));
    Some(Expr::Product(keyed.into_iter().map(|(_, f)| f).collect()))
}

type TraceFn<'a> = &'a mut dyn FnMut(&Firing);

struct Normalizer<'a> {
    steps: usize,
    budget: usize,
    trace: Option<TraceFn<'a>>,
}

impl Normalizer<'_> {
    fn normalize(&mut self, e: Expr) -> Result<Expr> {
        let mut cur = self.normalize_children(e)?;
        'outer: loop {
            for rule in RULES {
                if let Some(next) = apply_at_root(rule, &cur) {
                    self.steps += 1;
                    if self.steps > self.budget {
                        return Err(FidError::BudgetExhausted(self.budget));
                    }
                    if let Some(t) = self.trace.as_mut() {
                        t(&Firing {
                            rule,
                            before: cur.clone(),
                            after: next.clone(),
                        });
                    }
                    cur = self.normalize_children(next)?;
                    continue 'outer;
                }
            }
            return Ok(cur);
        }
    }

    fn normalize_children(&mut self, e: Expr) -> Result<Expr> {
        Ok(match e {
            Expr::Density { .. } => e,
            Expr::Product(fs) => Expr::Product(fs.into_iter().map(|f| self.normalize(f)).collect::<Result<_>>()?),
            Expr::Fraction(a, b) => Expr::fraction(self.normalize(*a)?, self.normalize(*b)?),
            Expr::Integral { vars, body } => Expr::integral(vars, self.normalize(*body)?),
        })
    }
}

/// Canonical form of `e`.
///
/// # Panics
/// If the step budget is exhausted, which indicates a non-terminating rule
/// interaction; use [`try_canonicalize`] to observe that as an error.
pub fn canonicalize(e: &Expr) -> Expr {
    try_canonicalize(e, DEFAULT_STEP_BUDGET).expect("canonicalization exceeded its step budget")
}

pub fn try_canonicalize(e: &Expr, budget: usize) -> Result<Expr> {
    Normalizer {
        steps: 0,
        budget,
        trace: None,
    }
    .normalize(e.clone())
}

/// Canonicalize, reporting every rule firing to `trace`.
pub fn canonicalize_traced(e: &Expr, budget: usize, trace: &mut dyn FnMut(&Firing)) -> Result<Expr> {
    Normalizer {
        steps: 0,
        budget,
        trace: Some(trace),
    }
    .normalize(e.clone())
}

fn child_mut(e: &mut Expr, i: usize) -> &mut Expr {
    match e {
        Expr::Product(fs) => &mut fs[i],
        Expr::Fraction(a, b) => {
            if i == 0 {
                a
            } else {
                b
            }
        }
        Expr::Integral { body, .. } => body,
        Expr::Density { .. } => unreachable!("densities have no children"),
    }
}

fn children(e: &Expr) -> Vec<&Expr> {
    match e {
        Expr::Density { .. } => Vec::new(),
        Expr::Product(fs) => fs.iter().collect(),
        Expr::Fraction(a, b) => vec![a, b],
        Expr::Integral { body, .. } => vec![body],
    }
}

fn redexes(e: &Expr, path: &mut Vec<usize>, out: &mut Vec<(Vec<usize>, Rule)>) {
    for rule in RULES {
        if apply_at_root(rule, e).is_some() {
            out.push((path.clone(), rule));
        }
    }
    for (i, c) in children(e).into_iter().enumerate() {
        path.push(i);
        redexes(c, path, out);
        path.pop();
    }
}

/// Rewrite by firing a uniformly chosen redex (position and rule) until none
/// is left. Used to check that the fixed point does not depend on strategy.
pub fn canonicalize_randomized<R: Rng + ?Sized>(e: &Expr, rng: &mut R, budget: usize) -> Result<Expr> {
    let mut cur = e.clone();
    for _ in 0..budget {
        let mut found = Vec::new();
        redexes(&cur, &mut Vec::new(), &mut found);
        if found.is_empty() {
            return Ok(cur);
        }
        let (path, rule) = &found[rng.random_range(0..found.len())];
        let mut node = &mut cur;
        for &i in path {
            node = child_mut(node, i);
        }
        *node = apply_at_root(*rule, node).expect("redex applies");
    }
    Err(FidError::BudgetExhausted(budget))
}

/// No rule applies anywhere in `e`.
pub fn is_canonical(e: &Expr) -> bool {
    RULES.iter().all(|&r| apply_at_root(r, e).is_none()) && children(e).into_iter().all(is_canonical)
}

/// Structural equality of canonical forms. Sound, not complete.
pub fn expr_equal(a: &Expr, b: &Expr) -> bool {
    canonicalize(a) == canonicalize(b)
}
