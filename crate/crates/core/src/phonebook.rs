//! Name × number phonebook held as one superposition, with forward and
//! inverse lookup by collapse.
//!
//! The book lives in a single reference system of `N + S` noise-bits: name
//! bits are `1..=N`, number digits are `N+1..=N+S`. Entry `i` contributes the
//! product-string `name_i · number_i`. A lookup grounds the inverse wires of
//! the query (the book collapses to one entry), then grounds the other half's
//! `2S` wires one at a time; digit `j` is `v` exactly when grounding wire
//! `(j, v)` kills the survivor.

use std::collections::HashSet;
use std::fmt::Write as _;

use serde::Serialize;

use crate::collapse::{wait_for_live_clock, Bench, SearchOptions, TraceStep};
use crate::error::{Error, Result};
use crate::expr::Expr;
use crate::reference::{ReferenceSystem, WireId};

/// Largest name or number width.
pub const MAX_FIELD_BITS: u32 = 63;

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PhonebookSpec {
    name_bits: u32,
    number_bits: u32,
    entries: Vec<(u64, u64)>,
}

fn bitstring(value: u64, width: u32) -> String {
    (1..=width).map(|k| if (value >> (width - k)) & 1 == 1 { '1' } else { '0' }).collect()
}

fn parse_bits(s: &str) -> Option<(u64, u32)> {
    if s.is_empty() || s.len() > MAX_FIELD_BITS as usize || !s.bytes().all(|b| b == b'0' || b == b'1') {
        return None;
    }
    Some((u64::from_str_radix(s, 2).ok()?, s.len() as u32))
}

impl PhonebookSpec {
    /// Validates widths and name uniqueness. Duplicate numbers are allowed.
    pub fn new(name_bits: u32, number_bits: u32, entries: Vec<(u64, u64)>) -> Result<Self> {
        for (what, w) in [("names", name_bits), ("numbers", number_bits)] {
            if w == 0 || w > MAX_FIELD_BITS {
                return Err(Error::InvalidArgument(format!("{what} width {w} outside 1..={MAX_FIELD_BITS}")));
            }
        }
        let capacity = 1u128 << name_bits;
        if entries.len() as u128 > capacity {
            return Err(Error::TooManyEntries { entries: entries.len(), capacity });
        }
        let mut names = HashSet::new();
        for &(name, number) in &entries {
            if name >> name_bits != 0 || number >> number_bits != 0 {
                return Err(Error::EntryWidth(format!("{name} -> {number}")));
            }
            if !names.insert(name) {
                return Err(Error::DuplicateName(bitstring(name, name_bits)));
            }
        }
        Ok(PhonebookSpec { name_bits, number_bits, entries })
    }

    /// Reads the text format: a `names N; numbers S;` header, then one
    /// `bitstring -> bitstring` entry per line. `#` starts a comment.
    pub fn parse(text: &str) -> Result<Self> {
        let mut widths: (Option<u32>, Option<u32>) = (None, None);
        let mut entries = Vec::new();
        for (lineno, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let bad = |msg: &str| Error::InvalidArgument(format!("phonebook line {}: {msg}", lineno + 1));
            if let Some((name, number)) = line.split_once("->") {
                let (n, s) = match widths {
                    (Some(n), Some(s)) => (n, s),
                    _ => return Err(bad("entry before the `names N; numbers S;` header")),
                };
                let (name, nw) = parse_bits(name.trim()).ok_or_else(|| bad("name is not a bitstring"))?;
                let (number, sw) = parse_bits(number.trim()).ok_or_else(|| bad("number is not a bitstring"))?;
                if nw != n || sw != s {
                    return Err(Error::EntryWidth(format!("line {}: {}", lineno + 1, line)));
                }
                entries.push((name, number));
                continue;
            }
            for stmt in line.split(';').map(str::trim).filter(|s| !s.is_empty()) {
                let (key, value) =
                    stmt.split_once(char::is_whitespace).ok_or_else(|| bad("expected `names N;` or `numbers S;`"))?;
                let value: u32 = value.trim().parse().map_err(|_| bad("width is not an integer"))?;
                match key {
                    "names" => widths.0 = Some(value),
                    "numbers" => widths.1 = Some(value),
                    _ => return Err(bad("expected `names N;` or `numbers S;`")),
                }
            }
        }
        match widths {
            (Some(n), Some(s)) => PhonebookSpec::new(n, s, entries),
            _ => Err(Error::InvalidArgument("phonebook is missing its `names N; numbers S;` header".into())),
        }
    }

    pub fn to_text(&self) -> String {
        let mut out = format!("names {}; numbers {};\n", self.name_bits, self.number_bits);
        for &(name, number) in &self.entries {
            let _ = writeln!(out, "{} -> {}", bitstring(name, self.name_bits), bitstring(number, self.number_bits));
        }
        out
    }

    pub fn name_bits(&self) -> u32 {
        self.name_bits
    }

    pub fn number_bits(&self) -> u32 {
        self.number_bits
    }

    pub fn total_bits(&self) -> u32 {
        self.name_bits + self.number_bits
    }

    pub fn entries(&self) -> &[(u64, u64)] {
        &self.entries
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn distinct_numbers(&self) -> usize {
        self.entries.iter().map(|e| e.1).collect::<HashSet<_>>().len()
    }

    /// One-to-one between names and numbers.
    pub fn is_bijective(&self) -> bool {
        self.distinct_numbers() == self.entries.len()
    }

    pub fn number_of(&self, name: u64) -> Option<u64> {
        self.entries.iter().find(|e| e.0 == name).map(|e| e.1)
    }

    pub fn name_of(&self, number: u64) -> Option<u64> {
        self.entries.iter().find(|e| e.1 == number).map(|e| e.0)
    }

    pub fn name_text(&self, name: u64) -> String {
        bitstring(name, self.name_bits)
    }

    pub fn number_text(&self, number: u64) -> String {
        bitstring(number, self.number_bits)
    }
}

/// The phonebook superposition `Σ_i name_i · number_i`.
#[derive(Clone, Debug)]
pub struct PhonebookExpr {
    spec: PhonebookSpec,
    expr: Expr,
}

impl PhonebookExpr {
    pub fn spec(&self) -> &PhonebookSpec {
        &self.spec
    }

    pub fn expr(&self) -> &Expr {
        &self.expr
    }
}

/// Wires spelling `value` over noise-bits `first..first+width`.
fn field_wires(value: u64, width: u32, first: u32) -> impl Iterator<Item = WireId> {
    (1..=width).map(move |k| WireId::new(first + k - 1, ((value >> (width - k)) & 1) as u8))
}

pub fn build_phonebook(spec: &PhonebookSpec) -> Result<PhonebookExpr> {
    if spec.is_empty() {
        return Err(Error::EmptySum);
    }
    let n = spec.name_bits;
    let terms = spec
        .entries
        .iter()
        .map(|&(name, number)| {
            let wires = field_wires(name, n, 1).chain(field_wires(number, spec.number_bits, n + 1));
            Ok((1, Expr::product(wires.map(Expr::wire).collect())?))
        })
        .collect::<Result<Vec<_>>>()?;
    let expr = match <[_; 1]>::try_from(terms) {
        Ok([(_, single)]) => single,
        Err(terms) => Expr::sum(terms)?,
    };
    Ok(PhonebookExpr { spec: spec.clone(), expr })
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Direction {
    /// Name → number.
    Forward,
    /// Number → name.
    Inverse,
}

/// Switch operations of one lookup: `N + 2S` forward, `S + 2N` inverse.
pub fn switching_cost(name_bits: u32, number_bits: u32, direction: Direction) -> u32 {
    match direction {
        Direction::Forward => name_bits + 2 * number_bits,
        Direction::Inverse => number_bits + 2 * name_bits,
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct LookupOutcome {
    pub direction: Direction,
    /// Recovered number (forward) or name (inverse).
    pub value: u64,
    pub value_text: String,
    pub switch_ops: u32,
    pub clock: u64,
    pub clocks_waited: u64,
    pub trace: Vec<TraceStep>,
}

fn check_system(pb: &PhonebookExpr, system: &ReferenceSystem) -> Result<()> {
    let want = pb.spec.total_bits();
    if system.num_bits() != want {
        return Err(Error::SystemSizeMismatch { expected: want, found: system.num_bits() });
    }
    Ok(())
}

/// Recovered value, switch operations, clock and trace of one lookup.
type Probed = (u64, u32, u64, Vec<TraceStep>);

struct Field {
    first: u32,
    width: u32,
}

fn collapse_and_probe(
    pb: &PhonebookExpr,
    system: &ReferenceSystem,
    key: (u64, &Field),
    probe: &Field,
    opts: &SearchOptions,
) -> Result<Option<Probed>> {
    check_system(pb, system)?;
    let (key_value, key_field) = key;
    if key_value >> key_field.width != 0 {
        return Err(Error::InvalidArgument(format!("query {key_value} wider than {} bits", key_field.width)));
    }
    let t = wait_for_live_clock(&pb.expr, system, opts.start, opts.max_wait)?;
    let mut bench = Bench::new(&pb.expr, system, t);
    bench.observe();
    let mut survivor = None;
    for wire in field_wires(key_value, key_field.width, key_field.first) {
        survivor = Some(bench.ground(wire.inverse())?);
    }
    if survivor.is_some_and(|a| a.is_zero()) {
        return Ok(None);
    }
    let mut value = 0u64;
    for j in 0..probe.width {
        let bit = probe.first + j;
        let mut zeroing = Vec::new();
        for v in 0..=1u8 {
            let wire = WireId::new(bit, v);
            if bench.ground(wire)?.is_zero() {
                zeroing.push(v);
            }
            bench.restore(wire)?;
        }
        match zeroing.as_slice() {
            [v] => value = (value << 1) | *v as u64,
            _ => return Err(Error::ProbeInconsistent { digit: j + 1, zeroing: zeroing.len() }),
        }
    }
    let (ops, trace) = bench.finish()?;
    Ok(Some((value, ops, t, trace)))
}

/// Number stored under `name`.
pub fn lookup(pb: &PhonebookExpr, system: &ReferenceSystem, name: u64, opts: &SearchOptions) -> Result<LookupOutcome> {
    let names = Field { first: 1, width: pb.spec.name_bits };
    let numbers = Field { first: pb.spec.name_bits + 1, width: pb.spec.number_bits };
    let (value, switch_ops, clock, trace) = collapse_and_probe(pb, system, (name, &names), &numbers, opts)?
        .ok_or_else(|| Error::NameAbsent(pb.spec.name_text(name)))?;
    Ok(LookupOutcome {
        direction: Direction::Forward,
        value,
        value_text: pb.spec.number_text(value),
        switch_ops,
        clock,
        clocks_waited: clock - opts.start,
        trace,
    })
}

/// Name holding `number`; the book must be one-to-one.
pub fn inverse_lookup(
    pb: &PhonebookExpr,
    system: &ReferenceSystem,
    number: u64,
    opts: &SearchOptions,
) -> Result<LookupOutcome> {
    if !pb.spec.is_bijective() {
        return Err(Error::NotBijective);
    }
    let names = Field { first: 1, width: pb.spec.name_bits };
    let numbers = Field { first: pb.spec.name_bits + 1, width: pb.spec.number_bits };
    let (value, switch_ops, clock, trace) = collapse_and_probe(pb, system, (number, &numbers), &names, opts)?
        .ok_or_else(|| Error::NumberAbsent(pb.spec.number_text(number)))?;
    Ok(LookupOutcome {
        direction: Direction::Inverse,
        value,
        value_text: pb.spec.name_text(value),
        switch_ops,
        clock,
        clocks_waited: clock - opts.start,
        trace,
    })
}
