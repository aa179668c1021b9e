use inbl_core::gen::{random_canonical_expr, random_pattern, random_string_set};
use inbl_core::oracle::{expand_grounded, BellClass};
use inbl_core::*;
use proptest::prelude::*;
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn system(bits: u32, scheme: RtwScheme, seed: u64) -> ReferenceSystem {
    ReferenceSystem::new(bits, scheme, seed).unwrap()
}

fn random_switches(rng: &mut ChaCha8Rng, bits: u32) -> SwitchState {
    let mut s = SwitchState::all_live(bits);
    let p = rng.gen_range(0.0..0.4);
    for k in 1..=bits {
        for v in 0..=1 {
            if rng.gen_bool(p) {
                s.ground(WireId::new(k, v)).unwrap();
            }
        }
    }
    s
}

fn random_fragment(rng: &mut ChaCha8Rng, bits: u32, density: f64) -> Pattern {
    let mut assignments = Vec::new();
    for k in 1..=bits {
        if rng.gen_bool(density) {
            assignments.push((k, rng.gen_range(0..=1u8)));
        }
    }
    Pattern::from_assignments(bits, assignments).unwrap()
}

fn scheme_strategy() -> impl Strategy<Value = RtwScheme> {
    prop_oneof![Just(RtwScheme::Asymmetric), Just(RtwScheme::Symmetric)]
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(96))]

    #[test]
    fn dag_eval_matches_expansion(seed: u64, bits in 1u32..=10, scheme in scheme_strategy()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let e = random_canonical_expr(&mut rng, bits);
        let x = expand(&e, bits).unwrap();
        prop_assert!(!x.is_non_canonical());
        let sys = system(bits, scheme, rng.gen());
        for _ in 0..8 {
            let sw = random_switches(&mut rng, bits);
            let t = rng.gen_range(0..1u64 << 40);
            prop_assert_eq!(eval(&e, &sys, &sw, t).unwrap(), x.eval(&sys, &sw, t));
        }
    }

    #[test]
    fn survivors_equal_grounded_expansion(seed: u64, bits in 1u32..=10) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let e = random_canonical_expr(&mut rng, bits);
        let full = expand(&e, bits).unwrap();
        let p = random_fragment(&mut rng, bits, 0.5);
        let grounded = expand_grounded(&e, bits, &ground_inverse(&p, bits).unwrap()).unwrap();
        prop_assert_eq!(
            full.surviving(&p).iter().collect::<Vec<_>>(),
            grounded.iter().collect::<Vec<_>>()
        );
    }

    #[test]
    fn grounding_is_order_free_and_idempotent(seed: u64, bits in 1u32..=16) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut wires: Vec<WireId> = (0..rng.gen_range(0..3 * bits))
            .map(|_| WireId::new(rng.gen_range(1..=bits), rng.gen_range(0..=1)))
            .collect();
        let mut a = SwitchState::all_live(bits);
        for &w in &wires {
            a.ground(w).unwrap();
        }
        wires.shuffle(&mut rng);
        let mut b = SwitchState::all_live(bits);
        for &w in wires.iter().chain(wires.iter()) {
            b.ground(w).unwrap();
        }
        prop_assert!(a.same_wiring(&b));
        for &w in &wires {
            prop_assert!(!b.ground(w).unwrap());
        }
        b.restore_all();
        prop_assert!(b.is_all_live());
    }

    #[test]
    fn dsl_roundtrip(seed: u64, bits in 1u32..=10) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let e = random_canonical_expr(&mut rng, bits);
        let text = format_program(bits, &e);
        let parsed = parse_dsl(&text).unwrap();
        prop_assert_eq!(parsed.bits, bits);
        prop_assert_eq!(format_dsl(&parsed.expr), format_dsl(&e));
        prop_assert_eq!(expand(&parsed.expr, bits).unwrap(), expand(&e, bits).unwrap());
    }

    #[test]
    fn full_string_search_is_exact(seed: u64, bits in 1u32..=10) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let e = random_canonical_expr(&mut rng, bits);
        let x = expand(&e, bits).unwrap();
        prop_assume!(!x.is_empty());
        let sys = system(bits, RtwScheme::Asymmetric, rng.gen());
        for _ in 0..4 {
            let q = if rng.gen_bool(0.5) {
                Pattern::from_key(*x.keys().collect::<Vec<_>>().choose(&mut rng).unwrap(), bits)
            } else {
                random_pattern(&mut rng, bits)
            };
            let opts = SearchOptions { start: rng.gen_range(0..1 << 20), ..Default::default() };
            let out = match full_string_search(&e, &sys, &q, &opts) {
                Err(Error::MaxWaitExceeded { .. }) => continue,
                r => r.unwrap(),
            };
            prop_assert_eq!(out.verdict.is_present(), x.member(&q) != 0);
            prop_assert_eq!(out.switch_ops, bits);
            if let Verdict::Present { clock, amplitude } = &out.verdict {
                let live = SwitchState::all_live(bits);
                prop_assert_eq!(amplitude, &x.surviving(&q).eval(&sys, &live, *clock));
            }
        }
    }

    #[test]
    fn fragment_present_is_sound(seed: u64, bits in 2u32..=8, tau in 1u32..=6) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let count = rng.gen_range(1..=(1usize << bits).min(6));
        let e = random_string_set(&mut rng, bits, count);
        let x = expand(&e, bits).unwrap();
        let p = random_fragment(&mut rng, bits, 0.4);
        let sys = system(bits, RtwScheme::Asymmetric, rng.gen());
        let out = fragment_search(&e, &sys, &p, tau, &SearchOptions::default()).unwrap();
        let survivors = x.surviving(&p);
        match out.verdict {
            Verdict::Present { clock, amplitude } => {
                prop_assert!(!survivors.is_empty());
                prop_assert_eq!(amplitude, survivors.eval(&sys, &SwitchState::all_live(bits), clock));
            }
            Verdict::AbsentWithBound { epsilon } => {
                prop_assert_eq!(epsilon, Dyadic::pow2(-(tau as i64)));
                prop_assert_eq!(out.clocks_observed, tau as u64);
            }
            Verdict::Absent => prop_assert!(false, "fragment search never claims exact absence"),
        }
        prop_assert_eq!(out.switch_ops as usize, p.assigned_count());
    }

    #[test]
    fn bell_classes_always_resolve(seed: u64, which in 0usize..6, high in any::<bool>()) {
        let class = BellClass::ALL[which];
        let terms = class
            .strings()
            .iter()
            .map(|&k| (1, build_product_string(&Pattern::from_key(k, 2), 2).unwrap()))
            .collect();
        let e = Expr::sum(terms).unwrap();
        prop_assert_eq!(oracle::legal_bell_class(&expand(&e, 2).unwrap()), Some(class));
        let probe = if high { PartnerProbe::GroundHigh } else { PartnerProbe::GroundLow };
        let sys = system(2, RtwScheme::Asymmetric, seed);
        let out = entangle_discriminate(&e, &sys, &SearchOptions::default(), probe).unwrap();
        prop_assert_eq!(out.class, class);
    }

    #[test]
    fn phonebook_roundtrip(seed: u64, n in 1u32..=6, s in 1u32..=6) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut names: Vec<u64> = (0..1u64 << n).collect();
        names.shuffle(&mut rng);
        names.truncate(rng.gen_range(1..=names.len().min(20)));
        let entries: Vec<(u64, u64)> = names.iter().map(|&m| (m, rng.gen_range(0..1u64 << s))).collect();
        let spec = PhonebookSpec::new(n, s, entries.clone()).unwrap();
        prop_assert_eq!(&PhonebookSpec::parse(&spec.to_text()).unwrap(), &spec);
        let pb = build_phonebook(&spec).unwrap();
        let sys = system(n + s, RtwScheme::Asymmetric, rng.gen());
        for &(name, number) in &entries {
            let out = lookup(&pb, &sys, name, &SearchOptions::default()).unwrap();
            prop_assert_eq!(out.value, number);
            prop_assert_eq!(out.switch_ops, switching_cost(n, s, Direction::Forward));
            if spec.is_bijective() {
                let inv = inverse_lookup(&pb, &sys, number, &SearchOptions::default()).unwrap();
                prop_assert_eq!(inv.value, name);
                prop_assert_eq!(inv.switch_ops, switching_cost(n, s, Direction::Inverse));
            }
        }
    }

    #[test]
    fn expansion_is_linear_in_sums(seed: u64, bits in 1u32..=8, a in -3i64..=3, b in -3i64..=3) {
        prop_assume!(a != 0 && b != 0);
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let (x, y) = (random_canonical_expr(&mut rng, bits), random_canonical_expr(&mut rng, bits));
        let sum = Expr::sum(vec![(a, x.clone()), (b, y.clone())]).unwrap();
        let (ex, ey) = (expand(&x, bits).unwrap(), expand(&y, bits).unwrap());
        let want = oracle::Expansion::from_terms(
            bits,
            ex.iter().map(|(k, c)| (k, a * c)).chain(ey.iter().map(|(k, c)| (k, b * c))),
        );
        prop_assert_eq!(expand(&sum, bits).unwrap().iter().collect::<Vec<_>>(), want.iter().collect::<Vec<_>>());
    }
}

#[test]
fn products_over_disjoint_supports_convolve() {
    let a = parse_dsl("bits 4; (R1_0 + 2*R1_1) * R2_1").unwrap().expr;
    let b = parse_dsl("bits 4; R3_0*R4_0 - R3_1*R4_1").unwrap().expr;
    let ab = expand(&(a.clone() * b.clone()), 4).unwrap();
    // a = {01**: 1, 11**: 2}, b = {**00: 1, **11: -1}
    let want = oracle::Expansion::from_terms(4, [(0b0100, 1), (0b0111, -1), (0b1100, 2), (0b1111, -2)]);
    assert_eq!(ab.iter().collect::<Vec<_>>(), want.iter().collect::<Vec<_>>());
}

#[test]
fn cost_accounting_matches_universe_and_parity() {
    for m in 1..=12 {
        let p = expr::build_parity(m).unwrap();
        assert_eq!(p.universe.op_count(), 2 * m as usize - 1);
        let u = expand(&p.universe, m).unwrap();
        assert_eq!(u.len(), 1 << m);
        let even = expand(&p.even, m).unwrap();
        let odd = expand(&p.odd, m).unwrap();
        assert_eq!(even.len() + odd.len(), 1 << m);
        assert!(even.is_unit() && odd.is_unit());
    }
}
