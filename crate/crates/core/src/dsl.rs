//! The `.tdc` text format.
//!
//! ```text
//! complex theta {
//!   vertex v1 genus 0 ;
//!   vertex v2 genus 0 ;
//!   edge e1 v1 v2 length 1 ;
//!   edge e2 v1 v2 length 1 ;
//!   edge e3 v1 v2 length 1 ;
//! }
//! point m = e1(1/2) ;
//! divisor K { 1 at v1 ; 1 at v2 ; }
//! ```
//!
//! Locations are `V`, `E(offset)` measured from the first endpoint, `V[c]`
//! for a coordinate on the component at `V`, or a point alias. `#` starts
//! a comment.

use crate::model::{ComplexSpec, Divisor, EdgeSpec, MetrizedComplex, Point, VertexSpec};
use crate::rational::{format_rational, frac, parse_rational, Rational};
use num_traits::Zero;
use std::collections::BTreeSet;
use std::fmt;
use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("{line}:{column}: {message}")]
pub struct ParseError {
    pub line: usize,
    pub column: usize,
    pub message: String,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Warning {
    pub line: usize,
    pub column: usize,
    pub message: String,
}

impl fmt::Display for Warning {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}:{}: warning: {}", self.line, self.column, self.message)
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ComplexDocument {
    pub complex: MetrizedComplex,
    pub points: Vec<(String, Point)>,
    pub divisors: Vec<(String, Divisor)>,
}

impl ComplexDocument {
    pub fn divisor(&self, name: &str) -> Option<&Divisor> {
        self.divisors.iter().find(|(n, _)| n == name).map(|(_, d)| d)
    }

    pub fn point(&self, name: &str) -> Option<Point> {
        self.points.iter().find(|(n, _)| n == name).map(|(_, p)| *p)
    }

    /// Resolves a location written as in a divisor block.
    pub fn location(&self, text: &str) -> Result<Point, ParseError> {
        let tokens = lex(text)?;
        let mut p = Parser { tokens, pos: 0 };
        let loc = p.location(&self.complex, &self.points)?;
        p.finish()?;
        Ok(loc)
    }
}

#[derive(Debug, Clone, PartialEq)]
enum Tok {
    Word(String),
    Number(String),
    Punct(char),
    End,
}

#[derive(Debug, Clone)]
struct Token {
    tok: Tok,
    line: usize,
    column: usize,
}

fn lex(text: &str) -> Result<Vec<Token>, ParseError> {
    let mut out = Vec::new();
    let mut chars = text.chars().peekable();
    let (mut line, mut column) = (1, 1);
    while let Some(&c) = chars.peek() {
        let (l, col) = (line, column);
        let mut bump = |chars: &mut std::iter::Peekable<std::str::Chars>| {
            let c = chars.next();
            if c == Some('\n') {
                line += 1;
                column = 1;
            } else {
                column += 1;
            }
            c
        };
        if c.is_whitespace() {
            bump(&mut chars);
        } else if c == '#' {
            while chars.peek().is_some_and(|c| *c != '\n') {
                bump(&mut chars);
            }
        } else if c.is_alphabetic() || c == '_' {
            let mut s = String::new();
            while chars.peek().is_some_and(|c| c.is_alphanumeric() || *c == '_') {
                s.push(bump(&mut chars).unwrap());
            }
            out.push(Token { tok: Tok::Word(s), line: l, column: col });
        } else if c.is_ascii_digit() || c == '-' {
            let mut s = String::new();
            s.push(bump(&mut chars).unwrap());
            while chars.peek().is_some_and(|c| c.is_ascii_digit() || *c == '/') {
                s.push(bump(&mut chars).unwrap());
            }
            out.push(Token { tok: Tok::Number(s), line: l, column: col });
        } else if "{};()[]=".contains(c) {
            bump(&mut chars);
            out.push(Token { tok: Tok::Punct(c), line: l, column: col });
        } else {
            return Err(ParseError {
                line: l,
                column: col,
                message: format!("unexpected character `{c}`"),
            });
        }
    }
    out.push(Token { tok: Tok::End, line, column });
    Ok(out)
}

struct Parser {
    tokens: Vec<Token>,
    pos: usize,
}

impl Parser {
    fn peek(&self) -> &Token {
        &self.tokens[self.pos]
    }

    fn error_at(&self, t: &Token, message: impl Into<String>) -> ParseError {
        ParseError {
            line: t.line,
            column: t.column,
            message: message.into(),
        }
    }

    fn error(&self, message: impl Into<String>) -> ParseError {
        self.error_at(self.peek(), message)
    }

    fn next(&mut self) -> Token {
        let t = self.tokens[self.pos].clone();
        if t.tok != Tok::End {
            self.pos += 1;
        }
        t
    }

    fn describe(t: &Tok) -> String {
        match t {
            Tok::Word(w) => format!("`{w}`"),
            Tok::Number(n) => format!("`{n}`"),
            Tok::Punct(c) => format!("`{c}`"),
            Tok::End => "end of input".into(),
        }
    }

    fn word(&mut self, what: &str) -> Result<(String, Token), ParseError> {
        let t = self.next();
        match &t.tok {
            Tok::Word(w) => Ok((w.clone(), t)),
            other => Err(self.error_at(&t, format!("expected {what}, found {}", Self::describe(other)))),
        }
    }

    fn keyword(&mut self, kw: &str) -> Result<(), ParseError> {
        let t = self.next();
        match &t.tok {
            Tok::Word(w) if w == kw => Ok(()),
            other => Err(self.error_at(&t, format!("expected `{kw}`, found {}", Self::describe(other)))),
        }
    }

    fn punct(&mut self, c: char) -> Result<(), ParseError> {
        let t = self.next();
        if t.tok == Tok::Punct(c) {
            Ok(())
        } else {
            Err(self.error_at(&t, format!("expected `{c}`, found {}", Self::describe(&t.tok))))
        }
    }

    fn at_punct(&self, c: char) -> bool {
        self.peek().tok == Tok::Punct(c)
    }

    fn at_word(&self, w: &str) -> bool {
        matches!(&self.peek().tok, Tok::Word(x) if x == w)
    }

    fn number(&mut self) -> Result<(Rational, Token), ParseError> {
        let t = self.next();
        match &t.tok {
            Tok::Number(n) => parse_rational(n)
                .map(|r| (r, t.clone()))
                .map_err(|e| self.error_at(&t, e.to_string())),
            other => Err(self.error_at(&t, format!("expected a number, found {}", Self::describe(other)))),
        }
    }

    fn integer(&mut self) -> Result<i64, ParseError> {
        let (r, t) = self.number()?;
        if r.is_integer() {
            Ok(r.to_integer())
        } else {
            Err(self.error_at(&t, "expected an integer"))
        }
    }

    fn finish(&mut self) -> Result<(), ParseError> {
        if self.peek().tok == Tok::End {
            Ok(())
        } else {
            Err(self.error(format!("unexpected {}", Self::describe(&self.peek().tok))))
        }
    }

    fn location(&mut self, cx: &MetrizedComplex, aliases: &[(String, Point)]) -> Result<Point, ParseError> {
        let (name, t) = self.word("a location")?;
        if self.at_punct('(') {
            self.next();
            let (off, ot) = self.number()?;
            self.punct(')')?;
            let e = cx
                .edge_by_name(&name)
                .ok_or_else(|| self.error_at(&t, format!("undeclared edge `{name}`")))?;
            if off < Rational::zero() || off > cx.length(e) {
                return Err(self.error_at(&ot, format!("offset {} is outside edge `{name}`", format_rational(&off))));
            }
            return Ok(normalize(cx, cx.point_on_edge(e, off)));
        }
        if self.at_punct('[') {
            self.next();
            let (c, ct) = self.number()?;
            self.punct(']')?;
            let v = cx
                .vertex_by_name(&name)
                .ok_or_else(|| self.error_at(&t, format!("undeclared vertex `{name}`")))?;
            if c < Rational::zero() || c >= Rational::from_integer(1) {
                return Err(self.error_at(&ct, "component coordinate must lie in [0, 1)"));
            }
            return Ok(Point::Component(v, c));
        }
        if let Some(v) = cx.vertex_by_name(&name) {
            return Ok(normalize(cx, Point::Vertex(v)));
        }
        if let Some((_, p)) = aliases.iter().find(|(n, _)| *n == name) {
            return Ok(*p);
        }
        Err(self.error_at(&t, format!("undeclared vertex or point `{name}`")))
    }
}

/// A vertex point on an elliptic component is its coordinate 0.
fn normalize(cx: &MetrizedComplex, p: Point) -> Point {
    match p {
        Point::Vertex(v) if cx.genus_of(v) == 1 => Point::Component(v, Rational::zero()),
        other => other,
    }
}

fn parse_complex(p: &mut Parser, warnings: &mut Vec<Warning>) -> Result<MetrizedComplex, ParseError> {
    let start = p.peek().clone();
    p.keyword("complex")?;
    let (name, _) = p.word("a complex name")?;
    p.punct('{')?;
    let mut spec = ComplexSpec {
        name,
        ..Default::default()
    };
    let mut genus: Vec<(String, i64)> = Vec::new();
    while !p.at_punct('}') {
        if p.at_word("vertex") {
            p.next();
            let (id, _) = p.word("a vertex id")?;
            p.keyword("genus")?;
            let gt = p.peek().clone();
            let g = p.integer()?;
            if !(0..=1).contains(&g) {
                return Err(p.error_at(&gt, format!("genus {g} is not supported; use 0 or 1")));
            }
            p.punct(';')?;
            genus.push((id.clone(), g));
            spec.vertices.push(VertexSpec { name: id, genus: g });
        } else if p.at_word("edge") {
            p.next();
            let (id, _) = p.word("an edge id")?;
            let (tail, tt) = p.word("a vertex id")?;
            let (head, ht) = p.word("a vertex id")?;
            for (v, t) in [(&tail, &tt), (&head, &ht)] {
                if !genus.iter().any(|(n, _)| n == v) {
                    return Err(p.error_at(t, format!("undeclared vertex `{v}`")));
                }
            }
            p.keyword("length")?;
            let (length, lt) = p.number()?;
            if length <= Rational::zero() {
                return Err(p.error_at(&lt, "edge length must be positive"));
            }
            let mut nodes = Vec::new();
            while p.at_word("node") {
                let nt = p.next();
                let (v, vt) = p.word("a vertex id")?;
                if v != tail && v != head {
                    return Err(p.error_at(&vt, format!("`{v}` is not an endpoint of `{id}`")));
                }
                p.keyword("at")?;
                let (c, ct) = p.number()?;
                if c < Rational::zero() || c >= Rational::from_integer(1) {
                    return Err(p.error_at(&ct, "node coordinate must lie in [0, 1)"));
                }
                if genus.iter().any(|(n, g)| *n == v && *g == 0) {
                    warnings.push(Warning {
                        line: nt.line,
                        column: nt.column,
                        message: format!("node coordinate on genus-0 vertex `{v}` has no effect"),
                    });
                }
                nodes.push((v, c));
            }
            p.punct(';')?;
            spec.edges.push(EdgeSpec {
                name: id,
                tail,
                head,
                length,
                nodes,
            });
        } else {
            return Err(p.error(format!(
                "expected `vertex`, `edge` or `}}`, found {}",
                Parser::describe(&p.peek().tok)
            )));
        }
    }
    p.punct('}')?;
    MetrizedComplex::build(&spec).map_err(|e| p.error_at(&start, e.to_string()))
}

pub fn parse_with_warnings(text: &str) -> Result<(ComplexDocument, Vec<Warning>), ParseError> {
    let mut p = Parser {
        tokens: lex(text)?,
        pos: 0,
    };
    let mut warnings = Vec::new();
    let complex = parse_complex(&mut p, &mut warnings)?;
    let mut taken: BTreeSet<String> = complex
        .vertex_ids()
        .map(|v| complex.vertex(v).name.clone())
        .chain(complex.edge_ids().map(|e| complex.edge(e).name.clone()))
        .collect();
    let mut points: Vec<(String, Point)> = Vec::new();
    let mut divisors = Vec::new();
    while p.peek().tok != Tok::End {
        if p.at_word("point") {
            p.next();
            let (name, nt) = p.word("a point name")?;
            if !taken.insert(name.clone()) {
                return Err(p.error_at(&nt, format!("duplicate identifier `{name}`")));
            }
            p.punct('=')?;
            let loc = p.location(&complex, &points)?;
            p.punct(';')?;
            points.push((name, loc));
        } else if p.at_word("divisor") {
            p.next();
            let (name, nt) = p.word("a divisor name")?;
            if divisors.iter().any(|(n, _)| *n == name) {
                return Err(p.error_at(&nt, format!("duplicate divisor `{name}`")));
            }
            p.punct('{')?;
            let mut d = Divisor::new();
            while !p.at_punct('}') {
                let coef = p.integer()?;
                p.keyword("at")?;
                let loc = p.location(&complex, &points)?;
                p.punct(';')?;
                d.add_chips(loc, coef);
            }
            p.punct('}')?;
            divisors.push((name, d));
        } else {
            return Err(p.error(format!(
                "expected `point` or `divisor`, found {}",
                Parser::describe(&p.peek().tok)
            )));
        }
    }
    Ok((
        ComplexDocument {
            complex,
            points,
            divisors,
        },
        warnings,
    ))
}

pub fn parse(text: &str) -> Result<ComplexDocument, ParseError> {
    parse_with_warnings(text).map(|(doc, _)| doc)
}

pub fn format_location(cx: &MetrizedComplex, p: &Point) -> String {
    match *p {
        Point::Component(v, c) if cx.genus_of(v) == 1 => {
            format!("{}[{}]", cx.vertex(v).name, format_rational(&frac(c)))
        }
        _ => cx.format_point(p),
    }
}

pub fn print(doc: &ComplexDocument) -> String {
    let cx = &doc.complex;
    let spec = cx.to_spec();
    let mut out = format!("complex {} {{\n", spec.name);
    for v in &spec.vertices {
        out.push_str(&format!("  vertex {} genus {} ;\n", v.name, v.genus));
    }
    for e in &spec.edges {
        out.push_str(&format!(
            "  edge {} {} {} length {}",
            e.name,
            e.tail,
            e.head,
            format_rational(&e.length)
        ));
        for (v, c) in &e.nodes {
            out.push_str(&format!(" node {} at {}", v, format_rational(c)));
        }
        out.push_str(" ;\n");
    }
    out.push_str("}\n");
    for (name, p) in &doc.points {
        out.push_str(&format!("point {} = {} ;\n", name, format_location(cx, p)));
    }
    for (name, d) in &doc.divisors {
        out.push_str(&format!("divisor {name} {{"));
        for (p, c) in d.iter() {
            out.push_str(&format!(" {} at {} ;", c, format_location(cx, p)));
        }
        out.push_str(" }\n");
    }
    out
}
