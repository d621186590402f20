//! Text form of expressions: `p(a,b)`, `p(a|b)`, `1`, `a * b`, `a / b`,
//! `int{v,w} [ body ]`. Products in a denominator and nested fractions are
//! parenthesized so the form parses back unambiguously.

use super::Expr;
use crate::error::{FidError, Result};
use crate::node::NodeId;

pub(super) fn render_into(e: &Expr, out: &mut String) {
    match e {
        Expr::Density { vars, given } => {
            if vars.is_empty() && given.is_empty() {
                out.push('1');
                return;
            }
            out.push_str("p(");
            join(vars, out);
            if !given.is_empty() {
                out.push('|');
                join(given, out);
            }
            out.push(')');
        }
        Expr::Product(fs) => {
            if fs.is_empty() {
                out.push('1');
            }
            for (i, f) in fs.iter().enumerate() {
                if i > 0 {
                    out.push_str(" * ");
                }
                paren_if(f, matches!(f, Expr::Product(_) | Expr::Fraction(..)), out);
            }
        }
        Expr::Fraction(a, b) => {
            paren_if(a, matches!(**a, Expr::Fraction(..)), out);
            out.push_str(" / ");
            paren_if(b, matches!(**b, Expr::Product(_) | Expr::Fraction(..)), out);
        }
        Expr::Integral { vars, body } => {
            out.push_str("int{");
            join(vars, out);
            out.push_str("} [ ");
            render_into(body, out);
            out.push_str(" ]");
        }
    }
}

fn join(vars: &[NodeId], out: &mut String) {
    for (i, v) in vars.iter().enumerate() {
        if i > 0 {
            out.push(',');
        }
        out.push_str(v.as_str());
    }
}

fn paren_if(e: &Expr, wrap: bool, out: &mut String) {
    if wrap {
        out.push('(');
        render_into(e, out);
        out.push(')');
    } else {
        render_into(e, out);
    }
}

pub(super) fn parse(s: &str) -> Result<Expr> {
    let mut p = Parser { s: s.as_bytes(), pos: 0 };
    let e = p.expr()?;
    p.skip_ws();
    if p.pos != p.s.len() {
        return Err(p.error("trailing input"));
    }
    Ok(e)
}

struct Parser<'a> {
    s: &'a [u8],
    pos: usize,
}

fn is_label_byte(b: u8) -> bool {
    b.is_ascii_alphanumeric() || b == b'_' || b == b'.'
}

impl Parser<'_> {
    fn error(&self, msg: &str) -> FidError {
        FidError::Parse {
            line: 1,
            msg: format!("{msg} at column {}", self.pos + 1),
        }
    }

    fn skip_ws(&mut self) {
        while self.pos < self.s.len() && self.s[self.pos].is_ascii_whitespace() {
            self.pos += 1;
        }
    }

    fn peek(&mut self) -> Option<u8> {
        self.skip_ws();
        self.s.get(self.pos).copied()
    }

    fn eat(&mut self, b: u8) -> bool {
        if self.peek() == Some(b) {
            self.pos += 1;
            true
        } else {
            false
        }
    }

    fn expect(&mut self, b: u8) -> Result<()> {
        if self.eat(b) {
            Ok(())
        } else {
            Err(self.error(&format!("expected `{}`", b as char)))
        }
    }

    fn word(&mut self) -> &str {
        self.skip_ws();
        let start = self.pos;
        while self.pos < self.s.len() && is_label_byte(self.s[self.pos]) {
            self.pos += 1;
        }
        std::str::from_utf8(&self.s[start..self.pos]).expect("ascii label bytes")
    }

    fn expr(&mut self) -> Result<Expr> {
        let num = self.product()?;
        if self.eat(b'/') {
            let den = self.product()?;
            return Ok(Expr::fraction(num, den));
        }
        Ok(num)
    }

    fn product(&mut self) -> Result<Expr> {
        let mut fs = vec![self.atom()?];
        while self.eat(b'*') {
            fs.push(self.atom()?);
        }
        Ok(if fs.len() == 1 {
            fs.pop().expect("one factor")
        } else {
            Expr::Product(fs)
        })
    }

    fn atom(&mut self) -> Result<Expr> {
        if self.eat(b'(') {
            let e = self.expr()?;
            self.expect(b')')?;
            return Ok(e);
        }
        let start = self.pos;
        let w = self.word().to_string();
        match w.as_str() {
            "1" => Ok(Expr::unit()),
            "p" => {
                self.expect(b'(')?;
                let vars = self.labels()?;
                let given = if self.eat(b'|') { self.labels()? } else { Vec::new() };
                self.expect(b')')?;
                Ok(Expr::Density { vars, given })
            }
            "int" => {
                self.expect(b'{')?;
                let vars = self.labels()?;
                self.expect(b'}')?;
                self.expect(b'[')?;
                let body = self.expr()?;
                self.expect(b']')?;
                Ok(Expr::integral(vars, body))
            }
            _ => {
                self.pos = start;
                Err(self.error("expected `p(`, `int{`, `1` or `(`"))
            }
        }
    }

    fn labels(&mut self) -> Result<Vec<NodeId>> {
        let mut out = Vec::new();
        if matches!(self.peek(), Some(b) if is_label_byte(b)) {
            loop {
                let w = self.word().to_string();
                out.push(NodeId::new(&w).map_err(|_| self.error("invalid label"))?);
                if !self.eat(b',') {
                    break;
                }
            }
        }
        Ok(out)
    }
}
