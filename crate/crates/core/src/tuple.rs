//! Finite nested tuples of labels, and the tuple operations used to build
//! every glue color in both tile-set constructions.
//!
//! A [`TupleValue`] is either a leaf (a label or `⊥`) or an ordered node of
//! children. Glue colors are compared by structural equality only, and the
//! canonical text form (`(a,b)`, `((a,b),(c,d))`, `_` for `⊥`) is injective.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Deserializer, Serialize, Serializer};
use thiserror::Error;

/// A pattern label. Labels are small residues rendered as decimal symbols.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(transparent)]
pub struct Label(pub u16);

impl fmt::Display for Label {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

/// A label or `⊥` (`None`).
pub type Sym = Option<Label>;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum TupleError {
    #[error("expected a tuple, found leaf `{0}`")]
    NotANode(String),
    #[error("expected a flat tuple, found `{0}`")]
    NotFlat(String),
    #[error("cannot shift-insert into the empty tuple")]
    Empty,
    #[error("arity mismatch: {left} vs {right}")]
    ArityMismatch { left: usize, right: usize },
    #[error("malformed tuple text at byte {pos}: {msg}")]
    Parse { pos: usize, msg: String },
}

#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum TupleValue {
    Leaf(Sym),
    Node(Vec<TupleValue>),
}

impl TupleValue {
    pub fn bot() -> Self {
        TupleValue::Leaf(None)
    }

    pub fn label(l: Label) -> Self {
        TupleValue::Leaf(Some(l))
    }

    pub fn sym(s: Sym) -> Self {
        TupleValue::Leaf(s)
    }

    /// Flat tuple of symbols.
    pub fn flat<I: IntoIterator<Item = Sym>>(syms: I) -> Self {
        TupleValue::Node(syms.into_iter().map(TupleValue::Leaf).collect())
    }

    pub fn node(children: Vec<TupleValue>) -> Self {
        TupleValue::Node(children)
    }

    pub fn is_leaf(&self) -> bool {
        matches!(self, TupleValue::Leaf(_))
    }

    /// True for a node whose children are all leaves (including `()`).
    pub fn is_flat(&self) -> bool {
        match self {
            TupleValue::Node(c) => c.iter().all(TupleValue::is_leaf),
            TupleValue::Leaf(_) => false,
        }
    }

    pub fn children(&self) -> Result<&[TupleValue], TupleError> {
        match self {
            TupleValue::Node(c) => Ok(c),
            TupleValue::Leaf(_) => Err(TupleError::NotANode(self.to_string())),
        }
    }

    pub fn arity(&self) -> Result<usize, TupleError> {
        self.children().map(<[_]>::len)
    }

    /// `first(t)`.
    pub fn first(&self) -> Result<&TupleValue, TupleError> {
        self.nth(0)
    }

    /// `second(t)`.
    pub fn second(&self) -> Result<&TupleValue, TupleError> {
        self.nth(1)
    }

    pub fn nth(&self, i: usize) -> Result<&TupleValue, TupleError> {
        let c = self.children()?;
        c.get(i).ok_or(TupleError::ArityMismatch {
            left: c.len(),
            right: i + 1,
        })
    }

    /// Symbols of a flat tuple.
    pub fn syms(&self) -> Result<Vec<Sym>, TupleError> {
        let c = self.children()?;
        c.iter()
            .map(|v| match v {
                TupleValue::Leaf(s) => Ok(*s),
                TupleValue::Node(_) => Err(TupleError::NotFlat(self.to_string())),
            })
            .collect()
    }

    pub fn as_sym(&self) -> Option<Sym> {
        match self {
            TupleValue::Leaf(s) => Some(*s),
            TupleValue::Node(_) => None,
        }
    }

    /// Canonical form with 1-tuple parentheses elided, for legends only.
    pub fn display_compact(&self) -> String {
        let mut s = String::new();
        write_compact(self, &mut s);
        s
    }
}

fn write_compact(v: &TupleValue, out: &mut String) {
    match v {
        TupleValue::Leaf(s) => push_sym(*s, out),
        TupleValue::Node(c) if c.len() == 1 => write_compact(&c[0], out),
        TupleValue::Node(c) => {
            out.push('(');
            for (i, ch) in c.iter().enumerate() {
                if i > 0 {
                    out.push(',');
                }
                write_compact(ch, out);
            }
            out.push(')');
        }
    }
}

fn push_sym(s: Sym, out: &mut String) {
    match s {
        None => out.push('_'),
        Some(l) => out.push_str(&l.0.to_string()),
    }
}

fn require_flat(t: &TupleValue) -> Result<&[TupleValue], TupleError> {
    if !t.is_flat() {
        return match t {
            TupleValue::Leaf(_) => Err(TupleError::NotANode(t.to_string())),
            TupleValue::Node(_) => Err(TupleError::NotFlat(t.to_string())),
        };
    }
    t.children()
}

/// `t · u` on flat tuples.
pub fn concat(t: &TupleValue, u: &TupleValue) -> Result<TupleValue, TupleError> {
    let a = require_flat(t)?;
    let b = require_flat(u)?;
    Ok(TupleValue::Node(a.iter().chain(b).cloned().collect()))
}

/// `Π t`: left-to-right concatenation of a tuple of flat tuples.
pub fn flatten(t: &TupleValue) -> Result<TupleValue, TupleError> {
    let mut out = Vec::new();
    for child in t.children()? {
        out.extend_from_slice(require_flat(child)?);
    }
    Ok(TupleValue::Node(out))
}

/// `t ↦ e = (t₂, …, tₙ, e)`.
pub fn shift_insert(t: &TupleValue, e: &TupleValue) -> Result<TupleValue, TupleError> {
    let c = t.children()?;
    if c.is_empty() {
        return Err(TupleError::Empty);
    }
    let mut out = Vec::with_capacity(c.len());
    out.extend_from_slice(&c[1..]);
    out.push(e.clone());
    Ok(TupleValue::Node(out))
}

/// `t ↾ u = (t₁ ↦ u₁, …, tₙ ↦ uₙ)`.
pub fn deep_shift_insert(t: &TupleValue, u: &TupleValue) -> Result<TupleValue, TupleError> {
    let tc = t.children()?;
    let uc = u.children()?;
    if tc.len() != uc.len() {
        return Err(TupleError::ArityMismatch {
            left: tc.len(),
            right: uc.len(),
        });
    }
    tc.iter()
        .zip(uc)
        .map(|(ti, ui)| shift_insert(ti, ui))
        .collect::<Result<Vec<_>, _>>()
        .map(TupleValue::Node)
}

/// `t ∧ u`: append `uᵢ` to the i-th inner tuple of `t`.
pub fn wedge(t: &TupleValue, u: &TupleValue) -> Result<TupleValue, TupleError> {
    let tc = t.children()?;
    let uc = u.children()?;
    if tc.len() != uc.len() {
        return Err(TupleError::ArityMismatch {
            left: tc.len(),
            right: uc.len(),
        });
    }
    tc.iter()
        .zip(uc)
        .map(|(ti, ui)| {
            let mut inner = require_flat(ti)?.to_vec();
            inner.push(ui.clone());
            Ok(TupleValue::Node(inner))
        })
        .collect::<Result<Vec<_>, _>>()
        .map(TupleValue::Node)
}

impl fmt::Display for TupleValue {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            TupleValue::Leaf(None) => f.write_str("_"),
            TupleValue::Leaf(Some(l)) => write!(f, "{}", l.0),
            TupleValue::Node(c) => {
                f.write_str("(")?;
                for (i, ch) in c.iter().enumerate() {
                    if i > 0 {
                        f.write_str(",")?;
                    }
                    write!(f, "{ch}")?;
                }
                f.write_str(")")
            }
        }
    }
}

struct Parser<'a> {
    bytes: &'a [u8],
    pos: usize,
}

impl Parser<'_> {
    fn err(&self, msg: &str) -> TupleError {
        TupleError::Parse {
            pos: self.pos,
            msg: msg.to_string(),
        }
    }

    fn peek(&self) -> Option<u8> {
        self.bytes.get(self.pos).copied()
    }

    fn value(&mut self) -> Result<TupleValue, TupleError> {
        match self.peek() {
            Some(b'_') => {
                self.pos += 1;
                Ok(TupleValue::bot())
            }
            Some(b'(') => {
                self.pos += 1;
                let mut children = Vec::new();
                if self.peek() == Some(b')') {
                    self.pos += 1;
                    return Ok(TupleValue::Node(children));
                }
                loop {
                    children.push(self.value()?);
                    match self.peek() {
                        Some(b',') => self.pos += 1,
                        Some(b')') => {
                            self.pos += 1;
                            return Ok(TupleValue::Node(children));
                        }
                        _ => return Err(self.err("expected `,` or `)`")),
                    }
                }
            }
            Some(c) if c.is_ascii_digit() => {
                let start = self.pos;
                while self.peek().is_some_and(|c| c.is_ascii_digit()) {
                    self.pos += 1;
                }
                let text = std::str::from_utf8(&self.bytes[start..self.pos]).expect("ascii digits");
                text.parse::<u16>()
                    .map(|v| TupleValue::label(Label(v)))
                    .map_err(|_| self.err("label out of range"))
            }
            _ => Err(self.err("expected `_`, a label, or `(`")),
        }
    }
}

impl FromStr for TupleValue {
    type Err = TupleError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let mut p = Parser {
            bytes: s.as_bytes(),
            pos: 0,
        };
        let v = p.value()?;
        if p.pos != s.len() {
            return Err(p.err("trailing input"));
        }
        Ok(v)
    }
}

impl Serialize for TupleValue {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        serializer.collect_str(self)
    }
}

impl<'de> Deserialize<'de> for TupleValue {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        let s = String::deserialize(deserializer)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}
