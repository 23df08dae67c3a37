use super::{Formula, Term};
use crate::error::{Error, Result};
use crate::structure::is_identifier;

#[derive(Debug, Clone, PartialEq)]
enum Tok {
    Open,
    Close,
    Word(String),
}

struct Spanned {
    tok: Tok,
    line: usize,
    col: usize,
}

fn lex(text: &str) -> Vec<Spanned> {
    let mut out = Vec::new();
    for (li, line) in text.lines().enumerate() {
        let chars: Vec<char> = line.chars().collect();
        let mut i = 0;
        while i < chars.len() {
            let c = chars[i];
            if c == ';' {
                break;
            }
            if c.is_whitespace() {
                i += 1;
                continue;
            }
            let (line, col) = (li + 1, i + 1);
            if c == '(' || c == ')' {
                out.push(Spanned {
                    tok: if c == '(' { Tok::Open } else { Tok::Close },
                    line,
                    col,
                });
                i += 1;
                continue;
            }
            let start = i;
            while i < chars.len() && !chars[i].is_whitespace() && chars[i] != '(' && chars[i] != ')'
            {
                i += 1;
            }
            out.push(Spanned {
                tok: Tok::Word(chars[start..i].iter().collect()),
                line,
                col,
            });
        }
    }
    out
}

struct Parser {
    toks: Vec<Spanned>,
    pos: usize,
    end: (usize, usize),
}

fn var_index(w: &str) -> Option<usize> {
    let digits = w.strip_prefix('x')?;
    if digits.is_empty()
        || !digits.bytes().all(|b| b.is_ascii_digit())
        || (digits.len() > 1 && digits.starts_with('0'))
    {
        return None;
    }
    digits.parse().ok()
}

impl Parser {
    fn here(&self) -> (usize, usize) {
        self.toks
            .get(self.pos)
            .map(|t| (t.line, t.col))
            .unwrap_or(self.end)
    }

    fn err<T>(&self, msg: impl Into<String>) -> Result<T> {
        let (l, c) = self.here();
        Err(Error::parse(l, c, msg))
    }

    fn next(&mut self) -> Option<Tok> {
        let t = self.toks.get(self.pos).map(|s| s.tok.clone());
        self.pos += 1;
        t
    }

    fn peek(&self) -> Option<&Tok> {
        self.toks.get(self.pos).map(|s| &s.tok)
    }

    fn expect_close(&mut self) -> Result<()> {
        match self.peek() {
            Some(Tok::Close) => {
                self.pos += 1;
                Ok(())
            }
            Some(_) => self.err("expected `)`"),
            None => self.err("unexpected end of input, expected `)`"),
        }
    }

    fn term(&mut self) -> Result<Term> {
        match self.peek() {
            Some(Tok::Word(w)) => {
                let w = w.clone();
                if let Some(i) = var_index(&w) {
                    self.pos += 1;
                    Ok(Term::Var(i))
                } else if is_identifier(&w) {
                    self.pos += 1;
                    Ok(Term::Const(w))
                } else {
                    self.err(format!("`{w}` is neither a variable nor a constant name"))
                }
            }
            Some(_) => self.err("expected a term"),
            None => self.err("unexpected end of input, expected a term"),
        }
    }

    fn variable(&mut self) -> Result<usize> {
        match self.peek() {
            Some(Tok::Word(w)) => match var_index(w) {
                Some(i) => {
                    self.pos += 1;
                    Ok(i)
                }
                None => self.err(format!("expected a variable `x<n>`, found `{w}`")),
            },
            _ => self.err("expected a variable `x<n>`"),
        }
    }

    fn formula(&mut self) -> Result<Formula> {
        let (line, col) = self.here();
        match self.next() {
            None => Err(Error::parse(
                line,
                col,
                "unexpected end of input, expected a formula",
            )),
            Some(Tok::Close) => Err(Error::parse(line, col, "unexpected `)`")),
            Some(Tok::Word(w)) => match w.as_str() {
                "top" => Ok(Formula::True),
                "bot" => Ok(Formula::False),
                _ => Err(Error::parse(
                    line,
                    col,
                    format!("unexpected `{w}` outside parentheses"),
                )),
            },
            Some(Tok::Open) => {
                let head = match self.next() {
                    Some(Tok::Word(w)) => w,
                    _ => return Err(Error::parse(line, col, "expected an operator after `(`")),
                };
                let f = match head.as_str() {
                    "=" => {
                        let a = self.term()?;
                        let b = self.term()?;
                        Formula::Eq(a, b)
                    }
                    "not" => Formula::not(self.formula()?),
                    "and" | "or" => {
                        let mut parts = Vec::new();
                        while !matches!(self.peek(), Some(Tok::Close) | None) {
                            parts.push(self.formula()?);
                        }
                        if head == "and" {
                            Formula::And(parts)
                        } else {
                            Formula::Or(parts)
                        }
                    }
                    "exists" | "forall" => {
                        let mut vars = vec![self.variable()?];
                        while let Some(Tok::Word(w)) = self.peek() {
                            if var_index(w).is_none() {
                                break;
                            }
                            vars.push(self.variable()?);
                        }
                        let body = self.formula()?;
                        vars.into_iter().rev().fold(body, |acc, v| {
                            if head == "exists" {
                                Formula::exists(v, acc)
                            } else {
                                Formula::forall(v, acc)
                            }
                        })
                    }
                    "top" | "bot" => {
                        return Err(Error::parse(
                            line,
                            col,
                            format!("`{head}` takes no arguments"),
                        ));
                    }
                    rel if is_identifier(rel) => {
                        let mut args = Vec::new();
                        while !matches!(self.peek(), Some(Tok::Close) | None) {
                            args.push(self.term()?);
                        }
                        Formula::Atom(rel.to_string(), args)
                    }
                    other => {
                        return Err(Error::parse(
                            line,
                            col,
                            format!("unknown operator `{other}`"),
                        ))
                    }
                };
                self.expect_close()?;
                Ok(f)
            }
        }
    }
}

/// Parse the s-expression form, e.g. `(exists x1 (and (E x0 x1) (not (= x0 x1))))`.
pub fn parse_formula(text: &str) -> Result<Formula> {
    let toks = lex(text);
    let end = (
        text.lines().count().max(1),
        text.lines().last().map_or(1, |l| l.chars().count() + 1),
    );
    let mut p = Parser { toks, pos: 0, end };
    let f = p.formula()?;
    if p.pos < p.toks.len() {
        return p.err("trailing input after formula");
    }
    Ok(f)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn round_trip() {
        for s in [
            "(exists x0 (and (E x0 x1) (not (= x0 x1))))",
            "top",
            "bot",
            "(forall x2 (or (= x2 c0) (P x2)))",
            "(and)",
            "(or (R x0 x1) (not (R x1 x0)))",
        ] {
            let f = parse_formula(s).unwrap();
            assert_eq!(f.to_string(), s);
            assert_eq!(parse_formula(&f.to_string()).unwrap(), f);
        }
    }

    #[test]
    fn multi_variable_binder() {
        let f = parse_formula("(exists x1 x2 (R x1 x2))").unwrap();
        assert_eq!(f.to_string(), "(exists x1 (exists x2 (R x1 x2)))");
    }

    #[test]
    fn errors_carry_positions() {
        match parse_formula("(and (E x0 x1)\n  (not x0))") {
            Err(Error::Parse { line, column, .. }) => assert_eq!((line, column), (2, 8)),
            other => panic!("{other:?}"),
        }
        assert!(parse_formula("(E x0 x1").is_err());
        assert!(parse_formula("(E x0 x1) top").is_err());
        assert!(parse_formula("(exists y (E y y))").is_err());
    }
}
