//! Text and JSON serialization of structures.
//!
//! ```text
//! structure ARROW
//! domain 2
//! relation R/2
//! (0 1)
//! constant c0 = 0
//! ```

use indexmap::IndexMap;
use serde::{Deserialize, Serialize};

use super::{Signature, Structure, Tuple};
use crate::error::{Error, Result};

#[derive(Serialize, Deserialize)]
struct WireStructure {
    name: String,
    domain: usize,
    relations: Vec<WireRelation>,
    #[serde(default)]
    constants: IndexMap<String, usize>,
}

#[derive(Serialize, Deserialize)]
struct WireRelation {
    name: String,
    arity: usize,
    tuples: Vec<Tuple>,
}

pub fn to_text(s: &Structure) -> String {
    let mut out = format!("structure {}\ndomain {}\n", s.name(), s.size());
    for (sym, rel) in s.signature().relations().iter().zip(s.relations()) {
        out.push_str(&format!("relation {}/{}\n", sym.name, sym.arity));
        if !rel.is_empty() {
            let parts: Vec<String> = rel
                .iter()
                .map(|t| {
                    let inner: Vec<String> = t.iter().map(usize::to_string).collect();
                    format!("({})", inner.join(" "))
                })
                .collect();
            out.push_str(&parts.join(" "));
            out.push('\n');
        }
    }
    for (name, v) in s.signature().constants().iter().zip(s.constants()) {
        out.push_str(&format!("constant {name} = {v}\n"));
    }
    out
}

pub fn to_json(s: &Structure) -> serde_json::Value {
    let wire = WireStructure {
        name: s.name().to_string(),
        domain: s.size(),
        relations: s
            .signature()
            .relations()
            .iter()
            .zip(s.relations())
            .map(|(sym, rel)| WireRelation {
                name: sym.name.clone(),
                arity: sym.arity,
                tuples: rel.to_tuples(),
            })
            .collect(),
        constants: s
            .signature()
            .constants()
            .iter()
            .cloned()
            .zip(s.constants().iter().copied())
            .collect(),
    };
    serde_json::to_value(wire).expect("structure serializes")
}

/// Parse either serialization; JSON is recognised by a leading `{`.
pub fn load_structure(text: &str) -> Result<Structure> {
    if text.trim_start().starts_with('{') {
        let wire: WireStructure = serde_json::from_str(text)
            .map_err(|e| Error::parse(e.line(), e.column(), e.to_string()))?;
        let sig = Signature::new(
            wire.relations.iter().map(|r| (r.name.clone(), r.arity)),
            wire.constants.keys().cloned(),
        )?;
        return Structure::new(
            wire.name,
            sig,
            wire.domain,
            wire.relations.into_iter().map(|r| r.tuples).collect(),
            wire.constants.into_values().collect(),
        );
    }
    TextParser::new(text).parse()
}

#[derive(Debug, Clone, PartialEq)]
enum Tok {
    Word(String),
    Num(usize),
    Open,
    Close,
    Slash,
    Equals,
}

struct TextParser {
    lines: Vec<String>,
    toks: Vec<(Tok, usize, usize)>,
    pos: usize,
}

impl TextParser {
    fn new(text: &str) -> Self {
        TextParser {
            lines: text.lines().map(str::to_string).collect(),
            toks: Vec::new(),
            pos: 0,
        }
    }

    fn parse(mut self) -> Result<Structure> {
        // The header takes the rest of its line as the name.
        let mut header = None;
        let mut body_start = 0;
        for (i, line) in self.lines.iter().enumerate() {
            let content = strip_comment(line).trim();
            if content.is_empty() {
                continue;
            }
            let Some(rest) = content.strip_prefix("structure") else {
                return Err(Error::parse(i + 1, 1, "expected `structure <name>`"));
            };
            let name = rest.trim();
            if name.is_empty() || !rest.starts_with(char::is_whitespace) {
                return Err(Error::parse(i + 1, 1, "expected `structure <name>`"));
            }
            header = Some(name.to_string());
            body_start = i + 1;
            break;
        }
        let name = header.ok_or_else(|| Error::parse(1, 1, "empty input"))?;
        self.tokenize(body_start)?;

        self.expect_word("domain")?;
        let size = self.expect_num()?;
        let mut sig = Signature::default();
        let mut tables: Vec<Vec<Tuple>> = Vec::new();
        let mut consts: Vec<usize> = Vec::new();
        while let Some((tok, line, col)) = self.peek() {
            match tok {
                Tok::Word(w) if w == "relation" => {
                    self.pos += 1;
                    let (rname, l, c) = self.expect_name()?;
                    self.expect(Tok::Slash)?;
                    let arity = self.expect_num()?;
                    sig.push_relation(rname, arity)
                        .map_err(|e| relocate(e, l, c))?;
                    let mut tuples = Vec::new();
                    while let Some((Tok::Open, l, c)) = self.peek() {
                        self.pos += 1;
                        let mut t = Vec::new();
                        loop {
                            match self.next_tok()? {
                                (Tok::Num(v), _, _) => t.push(v),
                                (Tok::Close, _, _) => break,
                                (other, l, c) => {
                                    return Err(Error::parse(
                                        l,
                                        c,
                                        format!("unexpected {other:?} inside a tuple"),
                                    ))
                                }
                            }
                        }
                        if t.len() != arity {
                            return Err(Error::parse(
                                l,
                                c,
                                format!("tuple of length {} for arity {arity}", t.len()),
                            ));
                        }
                        tuples.push(t);
                    }
                    tables.push(tuples);
                }
                Tok::Word(w) if w == "constant" => {
                    self.pos += 1;
                    let (cname, l, c) = self.expect_name()?;
                    self.expect(Tok::Equals)?;
                    let v = self.expect_num()?;
                    sig.push_constant(cname).map_err(|e| relocate(e, l, c))?;
                    consts.push(v);
                }
                other => {
                    return Err(Error::parse(
                        line,
                        col,
                        format!("expected `relation` or `constant`, found {other:?}"),
                    ))
                }
            }
        }
        Structure::new(name, sig, size, tables, consts)
    }

    fn tokenize(&mut self, from: usize) -> Result<()> {
        for (i, line) in self.lines.iter().enumerate().skip(from) {
            let content = strip_comment(line);
            let bytes = content.as_bytes();
            let mut j = 0;
            while j < bytes.len() {
                let c = bytes[j] as char;
                let col = j + 1;
                if c.is_whitespace() {
                    j += 1;
                    continue;
                }
                let single = match c {
                    '(' => Some(Tok::Open),
                    ')' => Some(Tok::Close),
                    '/' => Some(Tok::Slash),
                    '=' => Some(Tok::Equals),
                    _ => None,
                };
                if let Some(t) = single {
                    self.toks.push((t, i + 1, col));
                    j += 1;
                    continue;
                }
                let start = j;
                while j < bytes.len()
                    && !matches!(bytes[j] as char, '(' | ')' | '/' | '=')
                    && !(bytes[j] as char).is_whitespace()
                {
                    j += 1;
                }
                let word = &content[start..j];
                let tok = if word.bytes().all(|b| b.is_ascii_digit()) {
                    Tok::Num(
                        word.parse()
                            .map_err(|_| Error::parse(i + 1, col, "number too large"))?,
                    )
                } else {
                    Tok::Word(word.to_string())
                };
                self.toks.push((tok, i + 1, col));
            }
        }
        Ok(())
    }

    fn peek(&self) -> Option<(Tok, usize, usize)> {
        self.toks.get(self.pos).cloned()
    }

    fn eof_pos(&self) -> (usize, usize) {
        (self.lines.len().max(1), 1)
    }

    fn next_tok(&mut self) -> Result<(Tok, usize, usize)> {
        let t = self.peek().ok_or_else(|| {
            let (l, c) = self.eof_pos();
            Error::parse(l, c, "unexpected end of input")
        })?;
        self.pos += 1;
        Ok(t)
    }

    fn expect(&mut self, want: Tok) -> Result<()> {
        let (t, l, c) = self.next_tok()?;
        if t == want {
            Ok(())
        } else {
            Err(Error::parse(
                l,
                c,
                format!("expected {want:?}, found {t:?}"),
            ))
        }
    }

    fn expect_word(&mut self, w: &str) -> Result<()> {
        self.expect(Tok::Word(w.to_string()))
    }

    fn expect_num(&mut self) -> Result<usize> {
        match self.next_tok()? {
            (Tok::Num(v), _, _) => Ok(v),
            (t, l, c) => Err(Error::parse(
                l,
                c,
                format!("expected a number, found {t:?}"),
            )),
        }
    }

    fn expect_name(&mut self) -> Result<(String, usize, usize)> {
        match self.next_tok()? {
            (Tok::Word(w), l, c) => Ok((w, l, c)),
            (t, l, c) => Err(Error::parse(l, c, format!("expected a name, found {t:?}"))),
        }
    }
}

fn strip_comment(line: &str) -> &str {
    line.split('#').next().unwrap_or("")
}

fn relocate(e: Error, line: usize, column: usize) -> Error {
    match e {
        Error::Invalid(m) => Error::parse(line, column, m),
        other => other,
    }
}
