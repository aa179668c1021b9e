//! Superpositions as immutable expression DAGs over reference wires.
//!
//! A superposition is never stored in expanded form. `U(t)` over `M` bits is
//! a product of `M` two-term sums, and its exponentially many product-strings
//! only exist in the oracle. Subexpressions may be shared by cloning an
//! [`Expr`] handle; evaluation visits each shared node once per call.

use std::collections::{HashMap, HashSet};
use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};
use std::sync::Arc;

use crate::dyadic::Dyadic;
use crate::error::{Error, Result};
use crate::pattern::Pattern;
use crate::reference::{ClockFrame, ReferenceSystem, WireId};
use crate::switches::SwitchState;

/// Node payload of an [`Expr`].
#[derive(Debug)]
pub enum Node {
    Ref(WireId),
    /// `Σ coefficient · expr`, at least one term, no zero coefficients.
    Sum(Vec<(i64, Expr)>),
    /// At least one factor.
    Product(Vec<Expr>),
}

struct ExprNode {
    node: Node,
    max_bit: u32,
}

/// Cheaply clonable handle to an immutable expression node.
#[derive(Clone)]
pub struct Expr(Arc<ExprNode>);

impl Expr {
    pub fn wire(wire: WireId) -> Expr {
        Expr(Arc::new(ExprNode { node: Node::Ref(wire), max_bit: wire.bit_index() }))
    }

    pub fn sum(terms: Vec<(i64, Expr)>) -> Result<Expr> {
        if terms.is_empty() {
            return Err(Error::EmptySum);
        }
        if terms.iter().any(|(c, _)| *c == 0) {
            return Err(Error::ZeroCoefficient);
        }
        let max_bit = terms.iter().map(|(_, e)| e.max_bit()).max().unwrap_or(0);
        Ok(Expr(Arc::new(ExprNode { node: Node::Sum(terms), max_bit })))
    }

    pub fn product(factors: Vec<Expr>) -> Result<Expr> {
        if factors.is_empty() {
            return Err(Error::EmptyProduct);
        }
        let max_bit = factors.iter().map(Expr::max_bit).max().unwrap_or(0);
        Ok(Expr(Arc::new(ExprNode { node: Node::Product(factors), max_bit })))
    }

    pub fn node(&self) -> &Node {
        &self.0.node
    }

    /// Highest bit index referenced anywhere below this node.
    pub fn max_bit(&self) -> u32 {
        self.0.max_bit
    }

    /// Identity of the underlying node; equal for shared handles.
    pub fn node_id(&self) -> usize {
        Arc::as_ptr(&self.0) as usize
    }

    pub fn same_node(&self, other: &Expr) -> bool {
        Arc::ptr_eq(&self.0, &other.0)
    }

    fn maybe_shared(&self) -> bool {
        Arc::strong_count(&self.0) > 1
    }

    /// Visits every distinct node once, children before parents.
    pub fn visit_distinct(&self, mut f: impl FnMut(&Expr)) {
        fn walk(e: &Expr, seen: &mut HashSet<usize>, f: &mut dyn FnMut(&Expr)) {
            if !seen.insert(e.node_id()) {
                return;
            }
            match e.node() {
                Node::Ref(_) => {}
                Node::Sum(terms) => terms.iter().for_each(|(_, t)| walk(t, seen, f)),
                Node::Product(factors) => factors.iter().for_each(|x| walk(x, seen, f)),
            }
            f(e);
        }
        walk(self, &mut HashSet::new(), &mut f);
    }

    /// Elementary algebraic operations in the DAG: `k-1` per `k`-ary sum or
    /// product, shared nodes counted once.
    pub fn op_count(&self) -> usize {
        let mut ops = 0;
        self.visit_distinct(|e| match e.node() {
            Node::Ref(_) => {}
            Node::Sum(t) => ops += t.len() - 1,
            Node::Product(f) => ops += f.len() - 1,
        });
        ops
    }

    /// Distinct sum and product nodes.
    pub fn node_count(&self) -> usize {
        let mut n = 0;
        self.visit_distinct(|e| {
            if !matches!(e.node(), Node::Ref(_)) {
                n += 1
            }
        });
        n
    }
}

impl PartialEq for Expr {
    /// Structural equality; sharing is ignored.
    fn eq(&self, other: &Self) -> bool {
        if self.same_node(other) {
            return true;
        }
        match (self.node(), other.node()) {
            (Node::Ref(a), Node::Ref(b)) => a == b,
            (Node::Sum(a), Node::Sum(b)) => a == b,
            (Node::Product(a), Node::Product(b)) => a == b,
            _ => false,
        }
    }
}

impl Eq for Expr {}

impl fmt::Debug for Expr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Expr({})", crate::dsl::format_dsl(self))
    }
}

impl fmt::Display for Expr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&crate::dsl::format_dsl(self))
    }
}

impl Add for &Expr {
    type Output = Expr;
    fn add(self, rhs: &Expr) -> Expr {
        Expr(Arc::new(ExprNode {
            max_bit: self.max_bit().max(rhs.max_bit()),
            node: Node::Sum(vec![(1, self.clone()), (1, rhs.clone())]),
        }))
    }
}

impl Sub for &Expr {
    type Output = Expr;
    fn sub(self, rhs: &Expr) -> Expr {
        Expr(Arc::new(ExprNode {
            max_bit: self.max_bit().max(rhs.max_bit()),
            node: Node::Sum(vec![(1, self.clone()), (-1, rhs.clone())]),
        }))
    }
}

impl Mul for &Expr {
    type Output = Expr;
    fn mul(self, rhs: &Expr) -> Expr {
        Expr(Arc::new(ExprNode {
            max_bit: self.max_bit().max(rhs.max_bit()),
            node: Node::Product(vec![self.clone(), rhs.clone()]),
        }))
    }
}

impl Neg for &Expr {
    type Output = Expr;
    fn neg(self) -> Expr {
        Expr(Arc::new(ExprNode { max_bit: self.max_bit(), node: Node::Sum(vec![(-1, self.clone())]) }))
    }
}

macro_rules! owned_binop {
    ($tr:ident, $method:ident) => {
        impl $tr for Expr {
            type Output = Expr;
            fn $method(self, rhs: Expr) -> Expr {
                (&self).$method(&rhs)
            }
        }
    };
}

owned_binop!(Add, add);
owned_binop!(Sub, sub);
owned_binop!(Mul, mul);

fn check_bits(num_bits: u32) -> Result<()> {
    if num_bits == 0 {
        Err(Error::InvalidBits(num_bits))
    } else {
        Ok(())
    }
}

/// Product of the `M` wires selected by a full pattern. Always a `Product`
/// node, even for `M = 1`.
pub fn build_product_string(pattern: &Pattern, num_bits: u32) -> Result<Expr> {
    check_bits(num_bits)?;
    pattern.require_full()?;
    if pattern.num_bits() != num_bits {
        return Err(Error::InvalidPattern(format!("pattern has {} bits, system has {num_bits}", pattern.num_bits())));
    }
    Expr::product(pattern.wires().map(Expr::wire).collect())
}

fn bit_factor(k: u32) -> Expr {
    &Expr::wire(WireId::low(k)) + &Expr::wire(WireId::high(k))
}

fn product_or_single(mut factors: Vec<Expr>) -> Result<Expr> {
    if factors.len() == 1 {
        return Ok(factors.pop().expect("one factor"));
    }
    Expr::product(factors)
}

/// `U = Π_k (R_k0 + R_k1)`: all `2^M` product-strings with `2M - 1` operations.
pub fn build_universe(num_bits: u32) -> Result<Expr> {
    check_bits(num_bits)?;
    product_or_single((1..=num_bits).map(bit_factor).collect())
}

/// All strings whose bit 1 is 0: `R_10 · Π_{k≥2} (R_k0 + R_k1)`.
pub fn build_even(num_bits: u32) -> Result<Expr> {
    Ok(build_parity(num_bits)?.even)
}

/// `U - Y_even`.
pub fn build_odd(num_bits: u32) -> Result<Expr> {
    Ok(build_parity(num_bits)?.odd)
}

/// Universe, even and odd superpositions over one set of shared factors.
#[derive(Clone, Debug)]
pub struct ParitySet {
    pub universe: Expr,
    pub even: Expr,
    pub odd: Expr,
}

pub fn build_parity(num_bits: u32) -> Result<ParitySet> {
    check_bits(num_bits)?;
    let factors: Vec<Expr> = (1..=num_bits).map(bit_factor).collect();
    let universe = product_or_single(factors.clone())?;
    let mut even_factors = vec![Expr::wire(WireId::low(1))];
    even_factors.extend(factors[1..].iter().cloned());
    let even = product_or_single(even_factors)?;
    let odd = Expr::sum(vec![(1, universe.clone()), (-1, even.clone())])?;
    Ok(ParitySet { universe, even, odd })
}

/// Exact value of `expr` at clock `t` with the given wires grounded.
pub fn eval(expr: &Expr, system: &ReferenceSystem, switches: &SwitchState, t: u64) -> Result<Dyadic> {
    check_range(expr, system.num_bits())?;
    eval_frame(expr, &system.frame(t), switches)
}

fn check_range(expr: &Expr, num_bits: u32) -> Result<()> {
    if expr.max_bit() > num_bits {
        return Err(Error::InvalidWire { wire: WireId::low(expr.max_bit()), bits: num_bits });
    }
    Ok(())
}

/// Like [`eval`] against an already materialised clock frame.
pub fn eval_frame(expr: &Expr, frame: &ClockFrame, switches: &SwitchState) -> Result<Dyadic> {
    check_range(expr, frame.num_bits())?;
    let mut memo = HashMap::new();
    Ok(eval_node(expr, frame, switches, &mut memo))
}

fn eval_node(expr: &Expr, frame: &ClockFrame, switches: &SwitchState, memo: &mut HashMap<usize, Dyadic>) -> Dyadic {
    let shared = expr.maybe_shared() && !matches!(expr.node(), Node::Ref(_));
    if shared {
        if let Some(v) = memo.get(&expr.node_id()) {
            return v.clone();
        }
    }
    let value = match expr.node() {
        Node::Ref(w) => {
            if switches.is_grounded(*w) {
                Dyadic::zero()
            } else {
                frame.value(*w).clone()
            }
        }
        Node::Sum(terms) => {
            let mut acc = Dyadic::zero();
            for (c, term) in terms {
                let v = eval_node(term, frame, switches, memo);
                if !v.is_zero() {
                    acc += if *c == 1 { v } else { v.scale(*c) };
                }
            }
            acc
        }
        Node::Product(factors) => {
            let mut acc = Dyadic::one();
            for factor in factors {
                acc *= eval_node(factor, frame, switches, memo);
                if acc.is_zero() {
                    break;
                }
            }
            acc
        }
    };
    if shared {
        memo.insert(expr.node_id(), value.clone());
    }
    value
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::reference::RtwScheme;

    fn w(k: u32, v: u8) -> Expr {
        Expr::wire(WireId::new(k, v))
    }

    #[test]
    fn product_string_shape() {
        let e = build_product_string(&Pattern::from_bitstring("1010").unwrap(), 4).unwrap();
        assert_eq!(e, Expr::product(vec![w(1, 1), w(2, 0), w(3, 1), w(4, 0)]).unwrap());
        let one = build_product_string(&Pattern::from_bitstring("0").unwrap(), 1).unwrap();
        assert_eq!(one, Expr::product(vec![w(1, 0)]).unwrap());
        assert!(build_product_string(&Pattern::parse_fragments("1=0", 2).unwrap(), 2).is_err());
    }

    #[test]
    fn product_string_amplitude_when_all_positive() {
        let sys = ReferenceSystem::new(4, RtwScheme::Asymmetric, 31).unwrap();
        let live = SwitchState::all_live(4);
        let t = (0..).find(|&t| sys.wires().all(|wire| sys.wire_value(wire, t).unwrap().signum() > 0)).unwrap();
        for key in 0..16u64 {
            let p = Pattern::from_key(key, 4);
            let zeros = p.assignments().filter(|&(_, v)| v == 0).count() as i64;
            let e = build_product_string(&p, 4).unwrap();
            assert_eq!(eval(&e, &sys, &live, t).unwrap(), Dyadic::pow2(-zeros));
        }
    }

    #[test]
    fn universe_construction_cost() {
        for m in 1..=12 {
            assert_eq!(build_universe(m).unwrap().op_count(), 2 * m as usize - 1);
        }
        assert_eq!(build_universe(1).unwrap(), &w(1, 0) + &w(1, 1));
        assert!(build_universe(0).is_err());
    }

    #[test]
    fn universe_two_bits_stated_draws() {
        // R_10=+1/2, R_11=+1, R_20=-1/2, R_21=-1 gives (3/2)(-3/2).
        let sys = ReferenceSystem::new(2, RtwScheme::Asymmetric, 5).unwrap();
        let want = [(1, 0, 1), (1, 1, 1), (2, 0, -1), (2, 1, -1)];
        let t = (0..)
            .find(|&t| want.iter().all(|&(k, v, s)| sys.wire_value(WireId::new(k, v), t).unwrap().signum() == s))
            .unwrap();
        let u = build_universe(2).unwrap();
        let got = eval(&u, &sys, &SwitchState::all_live(2), t).unwrap();
        assert_eq!(got, Dyadic::new((-9).into(), -2));
    }

    #[test]
    fn even_plus_odd_is_universe() {
        let sys = ReferenceSystem::new(5, RtwScheme::Symmetric, 8).unwrap();
        let p = build_parity(5).unwrap();
        let live = SwitchState::all_live(5);
        for t in 0..500 {
            let u = eval(&p.universe, &sys, &live, t).unwrap();
            let e = eval(&p.even, &sys, &live, t).unwrap();
            let o = eval(&p.odd, &sys, &live, t).unwrap();
            assert_eq!(e + o, u);
        }
        assert_eq!(build_even(1).unwrap(), w(1, 0));
    }

    #[test]
    fn grounded_factor_annihilates() {
        let sys = ReferenceSystem::new(2, RtwScheme::Asymmetric, 1).unwrap();
        let e = &w(1, 0) * &w(2, 1);
        let mut s = SwitchState::all_live(2);
        s.ground(WireId::new(2, 1)).unwrap();
        assert!(eval(&e, &sys, &s, 0).unwrap().is_zero());
        assert!(Expr::sum(vec![]).is_err());
        assert!(Expr::product(vec![]).is_err());
        assert_eq!(Expr::sum(vec![(0, w(1, 0))]).unwrap_err(), Error::ZeroCoefficient);
    }

    #[test]
    fn wire_out_of_range() {
        let sys = ReferenceSystem::new(2, RtwScheme::Asymmetric, 1).unwrap();
        let e = &w(1, 0) * &w(3, 1);
        assert!(matches!(eval(&e, &sys, &SwitchState::all_live(2), 0), Err(Error::InvalidWire { .. })));
    }

    #[test]
    fn shared_nodes_counted_once() {
        let f = &w(1, 0) + &w(1, 1);
        let g = &w(2, 0) + &w(2, 1);
        let a = &f * &g;
        let b = &f * &w(2, 0);
        let top = &a - &b;
        // f, g: 1 op each; a, b: 1 each; top: 1.
        assert_eq!(top.op_count(), 5);
        assert_eq!(top.node_count(), 5);
    }
}
