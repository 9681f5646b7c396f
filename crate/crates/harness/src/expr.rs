//! Graph expressions such as `strong(path(3),path(4))`.
//!
//! ```text
//! expr  := name '(' args ')' | '@' file
//! name  := path | cycle | complete | star | q | empty
//!        | cat | categorical | strong | cart | cartesian | lex | lexicographic
//!        | union | complement
//! ```

use icx_core::{product, Graph, ProductKind};
use thiserror::Error;

#[derive(Debug, Error)]
pub enum ExprError {
    #[error("parse error at byte {pos}: {msg}")]
    Parse { pos: usize, msg: String },
    #[error("{0}")]
    Graph(#[from] icx_core::GraphError),
    #[error("reading {path}: {source}")]
    Io { path: String, source: std::io::Error },
}

enum Arg {
    Int(usize),
    Graph(Graph),
}

struct Parser<'a> {
    src: &'a str,
    pos: usize,
}

impl<'a> Parser<'a> {
    fn err<T>(&self, msg: impl Into<String>) -> Result<T, ExprError> {
        Err(ExprError::Parse { pos: self.pos, msg: msg.into() })
    }

    fn skip_ws(&mut self) {
        while self.src[self.pos..].starts_with(char::is_whitespace) {
            self.pos += 1;
        }
    }

    fn eat(&mut self, c: char) -> bool {
        self.skip_ws();
        if self.src[self.pos..].starts_with(c) {
            self.pos += c.len_utf8();
            true
        } else {
            false
        }
    }

    fn take_while(&mut self, f: impl Fn(char) -> bool) -> &'a str {
        self.skip_ws();
        let start = self.pos;
        while let Some(c) = self.src[self.pos..].chars().next() {
            if !f(c) {
                break;
            }
            self.pos += c.len_utf8();
        }
        &self.src[start..self.pos]
    }

    fn arg(&mut self) -> Result<Arg, ExprError> {
        let digits = self.take_while(|c| c.is_ascii_digit());
        if !digits.is_empty() {
            return match digits.parse() {
                Ok(n) => Ok(Arg::Int(n)),
                Err(_) => self.err("integer too large"),
            };
        }
        self.graph().map(Arg::Graph)
    }

    fn graph(&mut self) -> Result<Graph, ExprError> {
        if self.eat('@') {
            let path = self.take_while(|c| c != ')' && c != ',').trim();
            let text = std::fs::read_to_string(path)
                .map_err(|source| ExprError::Io { path: path.to_string(), source })?;
            return Ok(Graph::from_json(&text)?);
        }
        let name = self.take_while(|c| c.is_ascii_alphanumeric() || c == '_');
        if name.is_empty() {
            return self.err("expected a graph constructor");
        }
        if !self.eat('(') {
            return self.err(format!("expected '(' after {name}"));
        }
        let mut args = Vec::new();
        if !self.eat(')') {
            loop {
                args.push(self.arg()?);
                if self.eat(')') {
                    break;
                }
                if !self.eat(',') {
                    return self.err("expected ',' or ')'");
                }
            }
        }
        self.build(name, args)
    }

    fn build(&self, name: &str, args: Vec<Arg>) -> Result<Graph, ExprError> {
        let kind = match name {
            "cat" | "categorical" => Some(ProductKind::Categorical),
            "strong" => Some(ProductKind::Strong),
            "cart" | "cartesian" => Some(ProductKind::Cartesian),
            "lex" | "lexicographic" => Some(ProductKind::Lexicographic),
            _ => None,
        };
        let mut ints = Vec::new();
        let mut graphs = Vec::new();
        for a in args {
            match a {
                Arg::Int(n) => ints.push(n),
                Arg::Graph(g) => graphs.push(g),
            }
        }
        let shape = (ints.len(), graphs.len());
        if let Some(kind) = kind {
            if shape != (0, 2) {
                return self.err(format!("{name} takes two graphs"));
            }
            return Ok(product(kind, &graphs[0], &graphs[1])?);
        }
        match (name, shape) {
            ("union", (0, 2)) => Ok(graphs[0].disjoint_union(&graphs[1])),
            ("complement", (0, 1)) => Ok(graphs[0].complement()),
            ("path", (1, 0)) => Ok(Graph::path(ints[0])?),
            ("cycle", (1, 0)) => Ok(Graph::cycle(ints[0])?),
            ("complete", (1, 0)) => Ok(Graph::complete(ints[0])),
            ("star", (1, 0)) => Ok(Graph::star(ints[0])),
            ("q", (1, 0)) => Ok(Graph::q_graph(ints[0])),
            ("empty", (1, 0)) => Ok(Graph::empty(ints[0])),
            _ => self.err(format!("unknown constructor or wrong arguments: {name}")),
        }
    }
}

/// Parses a graph expression.
pub fn parse_graph(src: &str) -> Result<Graph, ExprError> {
    let mut p = Parser { src, pos: 0 };
    let g = p.graph()?;
    p.skip_ws();
    if p.pos != src.len() {
        return p.err("trailing input");
    }
    Ok(g)
}
