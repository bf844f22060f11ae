use std::collections::BTreeSet;
use std::fmt;

use super::VerifyError;

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum Ctl {
    True,
    False,
    Atom(String),
    Not(Box<Ctl>),
    And(Box<Ctl>, Box<Ctl>),
    Or(Box<Ctl>, Box<Ctl>),
    Implies(Box<Ctl>, Box<Ctl>),
    EX(Box<Ctl>),
    EF(Box<Ctl>),
    EG(Box<Ctl>),
    EU(Box<Ctl>, Box<Ctl>),
    AX(Box<Ctl>),
    AF(Box<Ctl>),
    AG(Box<Ctl>),
    AU(Box<Ctl>, Box<Ctl>),
}

#[allow(clippy::should_implement_trait)]
impl Ctl {
    pub fn atom(name: &str) -> Ctl {
        Ctl::Atom(name.to_string())
    }
    pub fn not(f: Ctl) -> Ctl {
        Ctl::Not(Box::new(f))
    }
    pub fn and(a: Ctl, b: Ctl) -> Ctl {
        Ctl::And(Box::new(a), Box::new(b))
    }
    pub fn or(a: Ctl, b: Ctl) -> Ctl {
        Ctl::Or(Box::new(a), Box::new(b))
    }
    pub fn implies(a: Ctl, b: Ctl) -> Ctl {
        Ctl::Implies(Box::new(a), Box::new(b))
    }
    pub fn ex(f: Ctl) -> Ctl {
        Ctl::EX(Box::new(f))
    }
    pub fn ef(f: Ctl) -> Ctl {
        Ctl::EF(Box::new(f))
    }
    pub fn eg(f: Ctl) -> Ctl {
        Ctl::EG(Box::new(f))
    }
    pub fn eu(a: Ctl, b: Ctl) -> Ctl {
        Ctl::EU(Box::new(a), Box::new(b))
    }
    pub fn ax(f: Ctl) -> Ctl {
        Ctl::AX(Box::new(f))
    }
    pub fn af(f: Ctl) -> Ctl {
        Ctl::AF(Box::new(f))
    }
    pub fn ag(f: Ctl) -> Ctl {
        Ctl::AG(Box::new(f))
    }
    pub fn au(a: Ctl, b: Ctl) -> Ctl {
        Ctl::AU(Box::new(a), Box::new(b))
    }

    /// The formula behind `AG p` invariants.
    pub fn invariant_body(&self) -> Option<&Ctl> {
        match self {
            Ctl::AG(p) => Some(p),
            _ => None,
        }
    }

    pub fn atoms(&self) -> BTreeSet<&str> {
        let mut out = BTreeSet::new();
        self.collect_atoms(&mut out);
        out
    }

    fn collect_atoms<'a>(&'a self, out: &mut BTreeSet<&'a str>) {
        match self {
            Ctl::True | Ctl::False => {}
            Ctl::Atom(a) => {
                out.insert(a);
            }
            Ctl::Not(f) | Ctl::EX(f) | Ctl::EF(f) | Ctl::EG(f) | Ctl::AX(f) | Ctl::AF(f) | Ctl::AG(f) => {
                f.collect_atoms(out)
            }
            Ctl::And(a, b) | Ctl::Or(a, b) | Ctl::Implies(a, b) | Ctl::EU(a, b) | Ctl::AU(a, b) => {
                a.collect_atoms(out);
                b.collect_atoms(out);
            }
        }
    }

    pub fn depth(&self) -> usize {
        match self {
            Ctl::True | Ctl::False | Ctl::Atom(_) => 0,
            Ctl::Not(f) | Ctl::EX(f) | Ctl::EF(f) | Ctl::EG(f) | Ctl::AX(f) | Ctl::AF(f) | Ctl::AG(f) => 1 + f.depth(),
            Ctl::And(a, b) | Ctl::Or(a, b) | Ctl::Implies(a, b) | Ctl::EU(a, b) | Ctl::AU(a, b) => {
                1 + a.depth().max(b.depth())
            }
        }
    }

    /// Renders with a custom atom printer. `wrap_atoms` parenthesizes atoms
    /// that appear directly under a unary operator.
    pub fn render(&self, atom: &dyn Fn(&str) -> String, wrap_atoms: bool) -> String {
        let mut out = String::new();
        self.render_into(&mut out, 0, atom, wrap_atoms);
        out
    }

    fn render_into(&self, out: &mut String, parent: u8, atom: &dyn Fn(&str) -> String, wrap: bool) {
        const IMPLIES: u8 = 1;
        const OR: u8 = 2;
        const AND: u8 = 3;
        const UNARY: u8 = 4;
        let binary = |out: &mut String, prec: u8, op: &str, a: &Ctl, b: &Ctl, lp: u8, rp: u8| {
            let paren = prec < parent;
            if paren {
                out.push('(');
            }
            a.render_into(out, lp, atom, wrap);
            out.push_str(op);
            b.render_into(out, rp, atom, wrap);
            if paren {
                out.push(')');
            }
        };
        let unary = |out: &mut String, op: &str, f: &Ctl| {
            out.push_str(op);
            f.render_into(out, UNARY, atom, wrap);
        };
        let until = |out: &mut String, q: &str, a: &Ctl, b: &Ctl| {
            out.push_str(q);
            out.push_str(" [");
            a.render_into(out, 0, atom, wrap);
            out.push_str(" U ");
            b.render_into(out, 0, atom, wrap);
            out.push(']');
        };
        match self {
            Ctl::True => out.push_str("TRUE"),
            Ctl::False => out.push_str("FALSE"),
            Ctl::Atom(a) => {
                let text = atom(a);
                if wrap && parent >= UNARY && text.contains(' ') {
                    out.push('(');
                    out.push_str(&text);
                    out.push(')');
                } else {
                    out.push_str(&text);
                }
            }
            Ctl::Not(f) => unary(out, "!", f),
            Ctl::EX(f) => unary(out, "EX ", f),
            Ctl::EF(f) => unary(out, "EF ", f),
            Ctl::EG(f) => unary(out, "EG ", f),
            Ctl::AX(f) => unary(out, "AX ", f),
            Ctl::AF(f) => unary(out, "AF ", f),
            Ctl::AG(f) => unary(out, "AG ", f),
            Ctl::And(a, b) => binary(out, AND, " & ", a, b, AND, AND),
            Ctl::Or(a, b) => binary(out, OR, " | ", a, b, OR, OR),
            Ctl::Implies(a, b) => binary(out, IMPLIES, " -> ", a, b, OR, IMPLIES),
            Ctl::EU(a, b) => until(out, "E", a, b),
            Ctl::AU(a, b) => until(out, "A", a, b),
        }
    }
}

impl fmt::Display for Ctl {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.render(&|a| a.to_string(), false))
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
enum Tok {
    Ident(String),
    Not,
    And,
    Or,
    Implies,
    LParen,
    RParen,
    LBracket,
    RBracket,
    Eq,
}

fn tokenize(text: &str) -> Result<Vec<(usize, Tok)>, VerifyError> {
    let mut toks = Vec::new();
    let bytes = text.as_bytes();
    let mut i = 0;
    while i < bytes.len() {
        let c = bytes[i];
        let start = i;
        let tok = match c {
            b' ' | b'\t' | b'\r' | b'\n' => {
                i += 1;
                continue;
            }
            b'!' => Tok::Not,
            b'&' => Tok::And,
            b'|' => Tok::Or,
            b'(' => Tok::LParen,
            b')' => Tok::RParen,
            b'[' => Tok::LBracket,
            b']' => Tok::RBracket,
            b'=' => Tok::Eq,
            b'-' if bytes.get(i + 1) == Some(&b'>') => {
                i += 1;
                Tok::Implies
            }
            c if c.is_ascii_alphanumeric() || c == b'_' => {
                while i < bytes.len() && (bytes[i].is_ascii_alphanumeric() || bytes[i] == b'_' || bytes[i] == b'.') {
                    i += 1;
                }
                toks.push((start, Tok::Ident(text[start..i].to_string())));
                continue;
            }
            _ => {
                return Err(VerifyError::CtlParse {
                    position: i,
                    msg: format!("unexpected character `{}`", text[i..].chars().next().unwrap_or('?')),
                })
            }
        };
        i += 1;
        toks.push((start, tok));
    }
    Ok(toks)
}

struct Parser {
    toks: Vec<(usize, Tok)>,
    pos: usize,
    end: usize,
}

impl Parser {
    fn peek(&self) -> Option<&Tok> {
        self.toks.get(self.pos).map(|(_, t)| t)
    }

    fn offset(&self) -> usize {
        self.toks.get(self.pos).map_or(self.end, |(o, _)| *o)
    }

    fn error<T>(&self, msg: &str) -> Result<T, VerifyError> {
        Err(VerifyError::CtlParse { position: self.offset(), msg: msg.to_string() })
    }

    fn expect(&mut self, tok: Tok, what: &str) -> Result<(), VerifyError> {
        if self.peek() == Some(&tok) {
            self.pos += 1;
            Ok(())
        } else {
            self.error(&format!("expected {what}"))
        }
    }

    fn implies(&mut self) -> Result<Ctl, VerifyError> {
        let lhs = self.or()?;
        if self.peek() == Some(&Tok::Implies) {
            self.pos += 1;
            return Ok(Ctl::implies(lhs, self.implies()?));
        }
        Ok(lhs)
    }

    fn or(&mut self) -> Result<Ctl, VerifyError> {
        let mut lhs = self.and()?;
        while self.peek() == Some(&Tok::Or) {
            self.pos += 1;
            lhs = Ctl::or(lhs, self.and()?);
        }
        Ok(lhs)
    }

    fn and(&mut self) -> Result<Ctl, VerifyError> {
        let mut lhs = self.unary()?;
        while self.peek() == Some(&Tok::And) {
            self.pos += 1;
            lhs = Ctl::and(lhs, self.unary()?);
        }
        Ok(lhs)
    }

    fn unary(&mut self) -> Result<Ctl, VerifyError> {
        match self.peek().cloned() {
            Some(Tok::Not) => {
                self.pos += 1;
                Ok(Ctl::not(self.unary()?))
            }
            Some(Tok::LParen) => {
                self.pos += 1;
                let f = self.implies()?;
                self.expect(Tok::RParen, "`)`")?;
                Ok(f)
            }
            Some(Tok::Ident(word)) => {
                let op: Option<fn(Ctl) -> Ctl> = match word.as_str() {
                    "EX" => Some(Ctl::ex),
                    "EF" => Some(Ctl::ef),
                    "EG" => Some(Ctl::eg),
                    "AX" => Some(Ctl::ax),
                    "AF" => Some(Ctl::af),
                    "AG" => Some(Ctl::ag),
                    _ => None,
                };
                if let Some(op) = op {
                    self.pos += 1;
                    return Ok(op(self.unary()?));
                }
                if (word == "E" || word == "A") && self.toks.get(self.pos + 1).map(|(_, t)| t) == Some(&Tok::LBracket) {
                    self.pos += 2;
                    let lhs = self.implies()?;
                    match self.peek() {
                        Some(Tok::Ident(u)) if u == "U" => self.pos += 1,
                        _ => return self.error("expected `U`"),
                    }
                    let rhs = self.implies()?;
                    self.expect(Tok::RBracket, "`]`")?;
                    return Ok(if word == "E" { Ctl::eu(lhs, rhs) } else { Ctl::au(lhs, rhs) });
                }
                self.atom()
            }
            Some(_) => self.error("expected a formula"),
            None => self.error("unexpected end of formula"),
        }
    }

    fn atom(&mut self) -> Result<Ctl, VerifyError> {
        let Some(Tok::Ident(name)) = self.peek().cloned() else {
            return self.error("expected an atomic proposition");
        };
        self.pos += 1;
        let value = if self.peek() == Some(&Tok::Eq) {
            self.pos += 1;
            match self.peek().cloned() {
                Some(Tok::Ident(v)) => {
                    self.pos += 1;
                    Some(v)
                }
                _ => return self.error("expected a value after `=`"),
            }
        } else {
            None
        };
        match (name.as_str(), value.as_deref()) {
            ("TRUE", None) => return Ok(Ctl::True),
            ("FALSE", None) => return Ok(Ctl::False),
            _ => {}
        }
        let segments: Vec<&str> = name.split('.').collect();
        if segments.iter().any(|s| s.is_empty()) {
            return self.error("malformed dotted name");
        }
        let last = *segments.last().expect("split yields a segment");
        Ok(match value.as_deref() {
            None | Some("TRUE") => Ctl::atom(last),
            Some("FALSE") => Ctl::not(Ctl::atom(last)),
            Some(v) if last == "plant_state" || last == "ctl_state" => Ctl::Atom(format!("{last}={v}")),
            Some(v) if last == "state" => {
                let owner = if segments.len() > 1 && segments[segments.len() - 2] == "ctl" { "ctl" } else { "plant" };
                Ctl::Atom(format!("{owner}_state={v}"))
            }
            Some(v) => Ctl::Atom(format!("{last}={v}")),
        })
    }
}

/// Parses a single CTL formula.
///
/// Dotted instance paths keep their last segment (`plant.HOME` is `HOME`),
/// `X = TRUE` is `X`, `X = FALSE` is `!X`, and `plant.state = Q1` is the
/// proposition `plant_state=Q1`. A leading `G` is read as `AG`.
pub fn parse_ctl(text: &str) -> Result<Ctl, VerifyError> {
    let mut toks = tokenize(text)?;
    if matches!(toks.first(), Some((_, Tok::Ident(g))) if g == "G") && toks.len() > 1 {
        toks[0].1 = Tok::Ident("AG".into());
    }
    let mut p = Parser { toks, pos: 0, end: text.len() };
    let f = p.implies()?;
    if p.pos != p.toks.len() {
        return p.error("unexpected trailing input");
    }
    Ok(f)
}
