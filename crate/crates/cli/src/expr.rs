//! Boolean expressions over named generators:
//!
//! ```text
//! expr   := term ('|' term)*
//! term   := factor ('&' factor)*
//! factor := '~' factor | '(' expr ')' | name ['^c'] | '0' | '1'
//! ```

use pba_core::boolean_core::{generator_element, Element};

use crate::document::atom_key;
use crate::error::{CliError, CliResult};

struct Parser<'a> {
    text: &'a str,
    pos: usize,
    names: &'a [String],
}

impl Parser<'_> {
    fn skip_ws(&mut self) {
        while self.text[self.pos..].starts_with(char::is_whitespace) {
            self.pos += self.text[self.pos..].chars().next().unwrap().len_utf8();
        }
    }

    fn eat(&mut self, c: char) -> bool {
        self.skip_ws();
        if self.text[self.pos..].starts_with(c) {
            self.pos += c.len_utf8();
            true
        } else {
            false
        }
    }

    fn error(&self, msg: &str) -> CliError {
        CliError::Parse(format!("expression {:?} at offset {}: {msg}", self.text, self.pos))
    }

    fn expr(&mut self) -> CliResult<Element> {
        let mut acc = self.term()?;
        while self.eat('|') {
            acc = acc.join(&self.term()?)?;
        }
        Ok(acc)
    }

    fn term(&mut self) -> CliResult<Element> {
        let mut acc = self.factor()?;
        while self.eat('&') {
            acc = acc.meet(&self.factor()?)?;
        }
        Ok(acc)
    }

    fn factor(&mut self) -> CliResult<Element> {
        let n = self.names.len();
        if self.eat('~') {
            return Ok(self.factor()?.complement());
        }
        if self.eat('(') {
            let e = self.expr()?;
            if !self.eat(')') {
                return Err(self.error("expected ')'"));
            }
            return self.suffix(e);
        }
        self.skip_ws();
        let rest = &self.text[self.pos..];
        let len = rest.find(|c: char| !(c.is_alphanumeric() || c == '_')).unwrap_or(rest.len());
        if len == 0 {
            return Err(self.error("expected a generator name"));
        }
        let word = &rest[..len];
        self.pos += len;
        let e = match word {
            "0" => Element::zero(n)?,
            "1" => Element::one(n)?,
            _ => match self.names.iter().position(|x| x == word) {
                Some(g) => generator_element(g, n)?,
                None => return Err(self.error(&format!("unknown generator {word:?}"))),
            },
        };
        self.suffix(e)
    }

    fn suffix(&mut self, e: Element) -> CliResult<Element> {
        self.skip_ws();
        if self.text[self.pos..].starts_with("^c") {
            self.pos += 2;
            return Ok(e.complement());
        }
        Ok(e)
    }
}

pub fn parse_element(text: &str, names: &[String]) -> CliResult<Element> {
    let mut p = Parser { text, pos: 0, names };
    let e = p.expr()?;
    p.skip_ws();
    if p.pos != text.len() {
        return Err(p.error("trailing input"));
    }
    Ok(e)
}

/// Atom keys of an element, as in measure documents.
pub fn element_atoms(e: &Element) -> Vec<String> {
    e.atoms().map(|a| atom_key(a, e.arity())).collect()
}
