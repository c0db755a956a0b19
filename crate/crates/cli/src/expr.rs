//! Automorphism expressions.
//!
//! ```text
//! expr  := term ('*' term)*
//! term  := atom ('^' '-'? digits)*
//! atom  := 'id' | 'lm:' letters | 'haar:' digits? | 'portrait:@' path | '(' expr ')'
//! ```
//!
//! `a * b` applies `b` first. `haar:` without a seed draws from the master
//! seed and the position of the atom in the expression.

use std::fs;

use treeaut::automorphism::stream::derive_seed;
use treeaut::automorphism::PortraitRecord;
use treeaut::{Aut, TreeParams};

use crate::CliError;

pub struct Parser<'a> {
    src: &'a str,
    pos: usize,
    params: TreeParams,
    seed: u64,
    atoms: u64,
}

fn err(msg: impl Into<String>) -> CliError {
    CliError::Parse(msg.into())
}

impl<'a> Parser<'a> {
    pub fn new(src: &'a str, params: TreeParams, seed: u64) -> Self {
        Parser {
            src,
            pos: 0,
            params,
            seed,
            atoms: 0,
        }
    }

    fn rest(&self) -> &'a str {
        &self.src[self.pos..]
    }

    fn skip_ws(&mut self) {
        let trimmed = self.rest().trim_start();
        self.pos = self.src.len() - trimmed.len();
    }

    fn eat(&mut self, token: &str) -> bool {
        self.skip_ws();
        if self.rest().starts_with(token) {
            self.pos += token.len();
            true
        } else {
            false
        }
    }

    fn take_while(&mut self, f: impl Fn(char) -> bool) -> &'a str {
        let rest = self.rest();
        let end = rest.find(|c: char| !f(c)).unwrap_or(rest.len());
        self.pos += end;
        &rest[..end]
    }

    pub fn parse(mut self) -> Result<Aut, CliError> {
        let g = self.expr()?;
        self.skip_ws();
        if !self.rest().is_empty() {
            return Err(err(format!("unexpected {:?} at offset {}", self.rest(), self.pos)));
        }
        Ok(g)
    }

    fn expr(&mut self) -> Result<Aut, CliError> {
        let mut g = self.term()?;
        while self.eat("*") {
            g = g.compose(&self.term()?);
        }
        Ok(g)
    }

    fn term(&mut self) -> Result<Aut, CliError> {
        let mut g = self.atom()?;
        while self.eat("^") {
            self.skip_ws();
            let neg = self.eat("-");
            let digits = self.take_while(|c| c.is_ascii_digit());
            let n: i64 = digits.parse().map_err(|_| err(format!("bad exponent at offset {}", self.pos)))?;
            g = g.pow(if neg { -n } else { n });
        }
        Ok(g)
    }

    fn atom(&mut self) -> Result<Aut, CliError> {
        self.skip_ws();
        self.atoms += 1;
        if self.eat("(") {
            let g = self.expr()?;
            if !self.eat(")") {
                return Err(err(format!("missing ')' at offset {}", self.pos)));
            }
            return Ok(g);
        }
        if self.eat("lm:") {
            let word = self.take_while(|c| c.is_ascii_digit());
            return Ok(Aut::left_mult_str(self.params, word)?);
        }
        if self.eat("haar:") {
            let digits = self.take_while(|c| c.is_ascii_digit());
            let seed = if digits.is_empty() {
                derive_seed(self.seed, self.atoms)
            } else {
                digits.parse().map_err(|_| err(format!("bad seed {digits:?}")))?
            };
            return Ok(Aut::random_stabilizer(self.params, seed));
        }
        if self.eat("portrait:@") {
            let path = self.take_while(|c| !c.is_whitespace() && !"*()^".contains(c));
            let text = fs::read_to_string(path).map_err(|e| err(format!("{path}: {e}")))?;
            let record: PortraitRecord = serde_json::from_str(&text).map_err(|e| err(format!("{path}: {e}")))?;
            if record.k != self.params.k() {
                return Err(err(format!("{path}: portrait has k = {}, expected {}", record.k, self.params.k())));
            }
            return Ok(Aut::from_portrait_record(record)?);
        }
        if self.eat("id") {
            return Ok(Aut::identity(self.params));
        }
        Err(err(format!("expected an automorphism at offset {}: {:?}", self.pos, self.rest())))
    }
}

pub fn parse_expr(src: &str, params: TreeParams, seed: u64) -> Result<Aut, CliError> {
    Parser::new(src, params, seed).parse()
}

#[cfg(test)]
mod tests {
    use super::*;
    use treeaut::Vertex;

    fn p() -> TreeParams {
        TreeParams::default()
    }

    fn v(s: &str) -> Vertex {
        p().parse_vertex(s).unwrap()
    }

    #[test]
    fn products_and_inverses() {
        let g = parse_expr("lm:01", p(), 0).unwrap();
        assert_eq!(g.apply(&Vertex::root()), v("01"));
        let g = parse_expr("lm:0 * lm:1", p(), 0).unwrap();
        assert_eq!(g.apply(&Vertex::root()), v("01"));
        let g = parse_expr("(lm:01)^-1", p(), 0).unwrap();
        assert_eq!(g.apply(&Vertex::root()), v("10"));
        let g = parse_expr("lm:01^2 * id", p(), 0).unwrap();
        assert_eq!(g.apply(&Vertex::root()), v("0101"));
        let h = parse_expr("haar:7", p(), 0).unwrap();
        assert!(h.agree_to_depth(&Aut::random_stabilizer(p(), 7), 5));
        let c = parse_expr("haar:7 * lm:01 * haar:7^-1", p(), 0).unwrap();
        assert_eq!(c.apply(&Vertex::root()), h.apply(&v("01")));
    }

    #[test]
    fn anonymous_haar_follows_the_seed() {
        let a = parse_expr("haar:", p(), 1).unwrap();
        let b = parse_expr("haar:", p(), 2).unwrap();
        let a2 = parse_expr("haar:", p(), 1).unwrap();
        assert!(a.agree_to_depth(&a2, 6));
        assert!(!a.agree_to_depth(&b, 6));
    }

    #[test]
    fn errors() {
        for bad in ["", "lm:3", "lm:00", "foo", "(lm:0", "lm:0 *", "lm:0^x", "portrait:@/nonexistent"] {
            assert!(parse_expr(bad, p(), 0).is_err(), "{bad}");
        }
    }
}
