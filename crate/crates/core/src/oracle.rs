//! Brute-force ground truth: symbolic expansion into product-strings.
//!
//! Expansion is exponential by nature and capped at [`DEFAULT_ORACLE_LIMIT`]
//! bits. It shares nothing with the DAG evaluator beyond the wire values
//! themselves: products are distributed over sums symbolically and each
//! product-string is then evaluated term by term.

use std::collections::{BTreeMap, HashMap};
use std::fmt::Write as _;

use crate::dyadic::Dyadic;
use crate::error::{Error, Result};
use crate::expr::{Expr, Node};
use crate::pattern::{key_to_bitstring, Pattern, MAX_KEY_BITS};
use crate::reference::{ReferenceSystem, WireId};
use crate::switches::SwitchState;

pub const DEFAULT_ORACLE_LIMIT: u32 = 24;

/// Product-string → coefficient table of a superposition.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Expansion {
    bits: u32,
    terms: BTreeMap<u64, i64>,
    non_canonical: bool,
}

/// Partial monomial: bit `k` is assigned when bit `bits-k` of `assigned` is set.
#[derive(Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
struct Mono {
    assigned: u64,
    values: u64,
}

type Poly = HashMap<Mono, i64>;

struct Expander<'a> {
    bits: u32,
    switches: Option<&'a SwitchState>,
    memo: HashMap<usize, Poly>,
    non_canonical: bool,
}

impl Expander<'_> {
    fn position(&self, wire: WireId) -> u64 {
        1u64 << (self.bits - wire.bit_index())
    }

    fn expand(&mut self, e: &Expr) -> Result<Poly> {
        if let Some(p) = self.memo.get(&e.node_id()) {
            return Ok(p.clone());
        }
        let poly = match e.node() {
            Node::Ref(w) => {
                let mut p = Poly::new();
                if !self.switches.is_some_and(|s| s.is_grounded(*w)) {
                    let bit = self.position(*w);
                    let values = if w.bit_value() == 1 { bit } else { 0 };
                    p.insert(Mono { assigned: bit, values }, 1);
                }
                p
            }
            Node::Sum(terms) => {
                let mut acc = Poly::new();
                for (c, t) in terms {
                    for (m, k) in self.expand(t)? {
                        let add = k.checked_mul(*c).ok_or(Error::CoefficientOverflow)?;
                        let slot = acc.entry(m).or_insert(0);
                        *slot = slot.checked_add(add).ok_or(Error::CoefficientOverflow)?;
                    }
                }
                acc.retain(|_, c| *c != 0);
                acc
            }
            Node::Product(factors) => {
                let mut acc = Poly::from([(Mono { assigned: 0, values: 0 }, 1i64)]);
                for f in factors {
                    let rhs = self.expand(f)?;
                    let mut next = Poly::new();
                    for (a, ca) in &acc {
                        for (b, cb) in &rhs {
                            if a.assigned & b.assigned != 0 {
                                // Repeats a bit index; not a product-string.
                                self.non_canonical = true;
                                continue;
                            }
                            let m = Mono { assigned: a.assigned | b.assigned, values: a.values | b.values };
                            let c = ca.checked_mul(*cb).ok_or(Error::CoefficientOverflow)?;
                            let slot = next.entry(m).or_insert(0);
                            *slot = slot.checked_add(c).ok_or(Error::CoefficientOverflow)?;
                        }
                    }
                    next.retain(|_, c| *c != 0);
                    acc = next;
                    if acc.is_empty() {
                        break;
                    }
                }
                acc
            }
        };
        self.memo.insert(e.node_id(), poly.clone());
        Ok(poly)
    }
}

/// Expands `expr` over an `bits`-bit system with the default size cap.
pub fn expand(expr: &Expr, bits: u32) -> Result<Expansion> {
    expand_with(expr, bits, None, DEFAULT_ORACLE_LIMIT)
}

/// Expands `expr` with the grounded wires of `switches` contributing zero.
pub fn expand_grounded(expr: &Expr, bits: u32, switches: &SwitchState) -> Result<Expansion> {
    expand_with(expr, bits, Some(switches), DEFAULT_ORACLE_LIMIT)
}

pub fn expand_with(expr: &Expr, bits: u32, switches: Option<&SwitchState>, limit: u32) -> Result<Expansion> {
    let limit = limit.min(MAX_KEY_BITS);
    if bits > limit {
        return Err(Error::OracleLimitExceeded { bits, limit });
    }
    if bits == 0 {
        return Err(Error::InvalidBits(0));
    }
    if expr.max_bit() > bits {
        return Err(Error::InvalidWire { wire: WireId::low(expr.max_bit()), bits });
    }
    let mut ex = Expander { bits, switches, memo: HashMap::new(), non_canonical: false };
    let poly = ex.expand(expr)?;
    let full = if bits == 64 { u64::MAX } else { (1u64 << bits) - 1 };
    let mut terms = BTreeMap::new();
    for (m, c) in poly {
        if m.assigned != full {
            let text: String = (1..=bits)
                .map(|k| {
                    let bit = 1u64 << (bits - k);
                    match (m.assigned & bit != 0, m.values & bit != 0) {
                        (false, _) => '*',
                        (true, false) => '0',
                        (true, true) => '1',
                    }
                })
                .collect();
            return Err(Error::IncompleteMonomial(text));
        }
        terms.insert(m.values, c);
    }
    Ok(Expansion { bits, terms, non_canonical: ex.non_canonical })
}

impl Expansion {
    /// Builds an expansion from explicit `(string, coefficient)` pairs; zero
    /// coefficients are dropped, repeated strings accumulate.
    pub fn from_terms(bits: u32, terms: impl IntoIterator<Item = (u64, i64)>) -> Self {
        let mut map = BTreeMap::new();
        for (k, c) in terms {
            *map.entry(k).or_insert(0) += c;
        }
        map.retain(|_, c| *c != 0);
        Expansion { bits, terms: map, non_canonical: false }
    }

    pub fn bits(&self) -> u32 {
        self.bits
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    /// `(string key, coefficient)` in ascending bitstring order.
    pub fn iter(&self) -> impl Iterator<Item = (u64, i64)> + '_ {
        self.terms.iter().map(|(k, c)| (*k, *c))
    }

    pub fn keys(&self) -> impl Iterator<Item = u64> + '_ {
        self.terms.keys().copied()
    }

    /// A monomial used some bit index twice while expanding. Such exprs have
    /// no product-string reading and are excluded from evaluation identities.
    pub fn is_non_canonical(&self) -> bool {
        self.non_canonical
    }

    /// Every coefficient is exactly 1 (a plain set of strings).
    pub fn is_unit(&self) -> bool {
        self.terms.values().all(|&c| c == 1)
    }

    /// Coefficient of a full pattern, 0 if absent or not a full pattern.
    pub fn member(&self, pattern: &Pattern) -> i64 {
        if pattern.num_bits() != self.bits {
            return 0;
        }
        pattern.key().and_then(|k| self.terms.get(&k).copied()).unwrap_or(0)
    }

    pub fn coefficient(&self, key: u64) -> i64 {
        self.terms.get(&key).copied().unwrap_or(0)
    }

    /// Entries agreeing with every assigned bit of `pattern`.
    pub fn surviving(&self, pattern: &Pattern) -> Expansion {
        let terms = self.terms.iter().filter(|(k, _)| pattern.matches_key(**k)).map(|(k, c)| (*k, *c)).collect();
        Expansion { bits: self.bits, terms, non_canonical: self.non_canonical }
    }

    /// `Σ coefficient · Π wire values`, grounded wires reading zero.
    pub fn eval(&self, system: &ReferenceSystem, switches: &SwitchState, t: u64) -> Dyadic {
        let frame = system.frame(t);
        let mut total = Dyadic::zero();
        for (&key, &c) in &self.terms {
            let mut prod = Dyadic::from_i64(c);
            for k in 1..=self.bits {
                let wire = WireId::new(k, ((key >> (self.bits - k)) & 1) as u8);
                if switches.is_grounded(wire) {
                    prod = Dyadic::zero();
                    break;
                }
                prod *= frame.value(wire);
            }
            total += prod;
        }
        total
    }

    /// Golden-file text: one `bitpattern coefficient` line per string.
    pub fn dump(&self) -> String {
        let mut out = String::new();
        for (k, c) in &self.terms {
            let _ = writeln!(out, "{} {c}", key_to_bitstring(*k, self.bits));
        }
        out
    }

    /// Reads the [`Expansion::dump`] format back.
    pub fn parse_dump(text: &str, bits: u32) -> Result<Expansion> {
        let mut terms = Vec::new();
        for line in text.lines().map(str::trim).filter(|l| !l.is_empty()) {
            let (pat, coef) = line
                .split_once(char::is_whitespace)
                .ok_or_else(|| Error::InvalidPattern(format!("bad expansion line {line:?}")))?;
            let p = Pattern::from_bitstring(pat)?;
            if p.num_bits() != bits {
                return Err(Error::InvalidPattern(format!("{pat} is not {bits} bits wide")));
            }
            let c: i64 = coef.trim().parse().map_err(|_| Error::InvalidPattern(format!("bad coefficient {coef:?}")))?;
            terms.push((p.key().expect("full pattern"), c));
        }
        Ok(Expansion::from_terms(bits, terms))
    }
}

/// `member` as a free function.
pub fn member(exp: &Expansion, pattern: &Pattern) -> i64 {
    exp.member(pattern)
}

/// `surviving` as a free function.
pub fn surviving(exp: &Expansion, pattern: &Pattern) -> Expansion {
    exp.surviving(pattern)
}

/// `eval` as a free function.
pub fn eval_via_expansion(exp: &Expansion, system: &ReferenceSystem, switches: &SwitchState, t: u64) -> Dyadic {
    exp.eval(system, switches, t)
}

/// The six two-noise-bit configurations in which each bit value appears in
/// at most one string.
#[derive(Clone, Copy, PartialEq, Eq, Hash, Debug, serde::Serialize, serde::Deserialize)]
pub enum BellClass {
    #[serde(rename = "S01+10")]
    S01Plus10,
    #[serde(rename = "S00+11")]
    S00Plus11,
    S00,
    S01,
    S10,
    S11,
}

impl BellClass {
    pub const ALL: [BellClass; 6] =
        [BellClass::S01Plus10, BellClass::S00Plus11, BellClass::S00, BellClass::S01, BellClass::S10, BellClass::S11];

    /// Strings (as 2-bit keys) making up the class.
    pub fn strings(self) -> &'static [u64] {
        match self {
            BellClass::S01Plus10 => &[0b01, 0b10],
            BellClass::S00Plus11 => &[0b00, 0b11],
            BellClass::S00 => &[0b00],
            BellClass::S01 => &[0b01],
            BellClass::S10 => &[0b10],
            BellClass::S11 => &[0b11],
        }
    }

    /// Class with exactly these strings, if any.
    pub fn from_strings(mut keys: Vec<u64>) -> Option<BellClass> {
        keys.sort_unstable();
        BellClass::ALL.into_iter().find(|c| c.strings() == keys.as_slice())
    }

    pub fn name(self) -> &'static str {
        match self {
            BellClass::S01Plus10 => "S01+10",
            BellClass::S00Plus11 => "S00+11",
            BellClass::S00 => "S00",
            BellClass::S01 => "S01",
            BellClass::S10 => "S10",
            BellClass::S11 => "S11",
        }
    }
}

impl std::fmt::Display for BellClass {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.name())
    }
}

/// Classifies a two-bit expansion, or `None` when it is outside the legal set.
pub fn legal_bell_class(exp: &Expansion) -> Option<BellClass> {
    if exp.bits != 2 || exp.is_empty() || exp.len() > 2 || !exp.is_unit() {
        return None;
    }
    BellClass::from_strings(exp.keys().collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dsl::parse_dsl;
    use crate::expr::{build_parity, build_universe};
    use crate::reference::RtwScheme;
    use crate::switches::ground_inverse;

    const THREE_TERMS: &str = "R1_1*R2_0*R3_1*R4_0 + R1_0*R2_0*R3_1*R4_0 + R1_0*R2_1*R3_1*R4_0";
    const FOUR_TERMS: &str = "R1_1*R2_0*R3_1*R4_0 + R1_0*R2_0*R3_1*R4_0 + R1_0*R2_0*R3_0*R4_0 + R1_0*R2_1*R3_1*R4_0";

    fn ex(text: &str) -> Expansion {
        let s = parse_dsl(text).unwrap();
        expand(&s.expr, s.bits).unwrap()
    }

    #[test]
    fn universe_expands_to_all_strings() {
        let e = expand(&build_universe(3).unwrap(), 3).unwrap();
        assert_eq!(e.len(), 8);
        assert!(e.is_unit());
        let p = Pattern::from_bitstring("101").unwrap();
        assert_eq!(e.member(&p), 1);
    }

    #[test]
    fn odd_cancels_to_odd_strings() {
        let p = build_parity(3).unwrap();
        let odd = expand(&p.odd, 3).unwrap();
        let even = expand(&p.even, 3).unwrap();
        assert_eq!(odd.dump(), "100 1\n101 1\n110 1\n111 1\n");
        assert_eq!(even.dump(), "000 1\n001 1\n010 1\n011 1\n");
    }

    #[test]
    fn conflicting_monomial_is_dropped() {
        let e = ex("bits 1; R1_0*R1_1");
        assert!(e.is_empty());
        assert!(e.is_non_canonical());
    }

    #[test]
    fn membership_on_three_term_list() {
        let e = ex(THREE_TERMS);
        assert_eq!(e.member(&Pattern::from_bitstring("1010").unwrap()), 1);
        assert_eq!(e.member(&Pattern::from_bitstring("1111").unwrap()), 0);
        assert_eq!(e.member(&Pattern::from_bitstring("0010").unwrap()), 1);
    }

    #[test]
    fn survivors() {
        let frag = Pattern::parse_fragments("1=0,2=0,4=0", 4).unwrap();
        assert_eq!(ex(FOUR_TERMS).surviving(&frag).dump(), "0000 1\n0010 1\n");
        assert_eq!(ex(THREE_TERMS).surviving(&frag).dump(), "0010 1\n");
        let e = ex(THREE_TERMS);
        assert_eq!(e.surviving(&Pattern::empty(4)), e);
        let s = ground_inverse(&frag, 4).unwrap();
        let grounded = expand_grounded(&parse_dsl(FOUR_TERMS).unwrap().expr, 4, &s).unwrap();
        assert_eq!(grounded, ex(FOUR_TERMS).surviving(&frag));
    }

    #[test]
    fn eval_matches_dag_on_three_term_list() {
        let s = parse_dsl(THREE_TERMS).unwrap();
        let sys = ReferenceSystem::new(4, RtwScheme::Asymmetric, 3).unwrap();
        let e = expand(&s.expr, 4).unwrap();
        let live = SwitchState::all_live(4);
        for t in 0..100 {
            assert_eq!(e.eval(&sys, &live, t), crate::expr::eval(&s.expr, &sys, &live, t).unwrap());
        }
        assert!(Expansion::from_terms(4, []).eval(&sys, &live, 0).is_zero());
    }

    #[test]
    fn bell_classes() {
        let two = |pairs: &[(u64, i64)]| Expansion::from_terms(2, pairs.iter().copied());
        assert_eq!(legal_bell_class(&two(&[(0b01, 1), (0b10, 1)])), Some(BellClass::S01Plus10));
        assert_eq!(legal_bell_class(&two(&[(0b00, 1), (0b10, 1)])), None);
        assert_eq!(legal_bell_class(&two(&[(0b11, 1)])), Some(BellClass::S11));
        assert_eq!(legal_bell_class(&two(&[(0b11, 2)])), None);
        assert_eq!(legal_bell_class(&two(&[])), None);
        assert_eq!(legal_bell_class(&two(&[(0, 1), (1, 1), (2, 1)])), None);
    }

    #[test]
    fn limits_and_incomplete_monomials() {
        let u = build_universe(3).unwrap();
        assert!(matches!(expand_with(&u, 3, None, 2), Err(Error::OracleLimitExceeded { .. })));
        assert!(matches!(ex_err("bits 2; R1_0"), Error::IncompleteMonomial(s) if s == "0*"));
    }

    fn ex_err(text: &str) -> Error {
        let s = parse_dsl(text).unwrap();
        expand(&s.expr, s.bits).unwrap_err()
    }

    #[test]
    fn dump_roundtrip() {
        let e = ex("bits 2; 2*R1_0*R2_1 - R1_1*R2_1");
        let text = e.dump();
        assert_eq!(text, "01 2\n11 -1\n");
        assert_eq!(Expansion::parse_dump(&text, 2).unwrap(), e);
    }
}
