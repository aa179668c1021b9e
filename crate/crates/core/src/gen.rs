//! Random superpositions for property tests and experiments.

use std::collections::HashMap;

use rand::seq::SliceRandom;
use rand::Rng;

use crate::expr::Expr;
use crate::pattern::Pattern;
use crate::reference::WireId;

/// A uniformly random full pattern.
pub fn random_pattern<R: Rng + ?Sized>(rng: &mut R, bits: u32) -> Pattern {
    let key = if bits == 64 { rng.gen() } else { rng.gen_range(0..1u64 << bits) };
    Pattern::from_key(key, bits)
}

/// Flat sum of `count` distinct random product-strings, coefficient 1 each.
pub fn random_string_set<R: Rng + ?Sized>(rng: &mut R, bits: u32, count: usize) -> Expr {
    let mut keys: Vec<u64> = Vec::with_capacity(count);
    let cap = if bits >= 63 { usize::MAX } else { 1usize << bits };
    while keys.len() < count.min(cap).max(1) {
        let k = random_pattern(rng, bits).key().expect("full");
        if !keys.contains(&k) {
            keys.push(k);
        }
    }
    let terms = keys
        .into_iter()
        .map(|k| {
            let p = Pattern::from_key(k, bits);
            (1, Expr::product(p.wires().map(Expr::wire).collect()).expect("nonempty"))
        })
        .collect();
    Expr::sum(terms).expect("nonempty")
}

/// Random factored superposition whose every monomial assigns each bit in
/// `1..=bits` exactly once (no repeated bit index anywhere). Mixes products
/// over disjoint bit groups, integer-weighted sums, and shared subtrees.
pub fn random_canonical_expr<R: Rng + ?Sized>(rng: &mut R, bits: u32) -> Expr {
    let set: Vec<u32> = (1..=bits).collect();
    let mut g = Generator { rng, cache: HashMap::new() };
    g.over(&set, 0)
}

struct Generator<'a, R: Rng + ?Sized> {
    rng: &'a mut R,
    cache: HashMap<Vec<u32>, Expr>,
}

const COEFFICIENTS: [i64; 6] = [1, 1, 1, -1, 2, -2];

impl<R: Rng + ?Sized> Generator<'_, R> {
    fn coefficient(&mut self) -> i64 {
        *COEFFICIENTS.choose(self.rng).expect("nonempty")
    }

    fn over(&mut self, set: &[u32], depth: u32) -> Expr {
        if let Some(e) = self.cache.get(set) {
            if self.rng.gen_bool(0.25) {
                return e.clone();
            }
        }
        let e = self.fresh(set, depth);
        self.cache.insert(set.to_vec(), e.clone());
        e
    }

    fn fresh(&mut self, set: &[u32], depth: u32) -> Expr {
        if let [k] = set {
            let k = *k;
            return match self.rng.gen_range(0..10) {
                0..=4 => Expr::wire(WireId::new(k, self.rng.gen_range(0..=1))),
                5..=7 => {
                    let (a, b) = (self.coefficient(), self.coefficient());
                    Expr::sum(vec![(a, Expr::wire(WireId::low(k))), (b, Expr::wire(WireId::high(k)))]).expect("valid")
                }
                _ => {
                    let c = self.coefficient();
                    Expr::sum(vec![(c, Expr::wire(WireId::new(k, self.rng.gen_range(0..=1))))]).expect("valid")
                }
            };
        }
        if depth >= 3 || self.rng.gen_bool(0.65) {
            let mut shuffled = set.to_vec();
            shuffled.shuffle(self.rng);
            let parts = self.rng.gen_range(2..=shuffled.len().min(4));
            let mut cuts: Vec<usize> = (1..shuffled.len()).collect();
            cuts.shuffle(self.rng);
            let mut cuts: Vec<usize> = cuts.into_iter().take(parts - 1).collect();
            cuts.sort_unstable();
            let mut factors = Vec::with_capacity(parts);
            let mut from = 0;
            for cut in cuts.into_iter().chain(std::iter::once(shuffled.len())) {
                let mut group = shuffled[from..cut].to_vec();
                group.sort_unstable();
                factors.push(self.over(&group, depth + 1));
                from = cut;
            }
            Expr::product(factors).expect("nonempty")
        } else {
            let n = self.rng.gen_range(2..=3);
            let terms = (0..n).map(|_| (self.coefficient(), self.over(set, depth + 1))).collect();
            Expr::sum(terms).expect("nonempty")
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::oracle::expand;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn generated_exprs_are_canonical() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        for _ in 0..300 {
            let bits = rng.gen_range(1..=10);
            let e = random_canonical_expr(&mut rng, bits);
            let x = expand(&e, bits).unwrap();
            assert!(!x.is_non_canonical());
        }
    }

    #[test]
    fn string_sets() {
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let e = random_string_set(&mut rng, 6, 10);
        let x = expand(&e, 6).unwrap();
        assert_eq!(x.len(), 10);
        assert!(x.is_unit());
    }
}
