//! The reference noise system: `2M` independent random telegraph waves.
//!
//! Each noise-bit `k` owns two wires, `R{k}_0` (the Low value) and `R{k}_1`
//! (the High value). Wire values are a pure function of
//! `(master_seed, wire, clock)`, computed by a counter-based generator, so any
//! clock can be replayed without stepping through its predecessors.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::dyadic::Dyadic;
use crate::error::{Error, Result};

const GOLDEN: u64 = 0x9E37_79B9_7F4A_7C15;
const SPLIT_KEY: u64 = 0xD1B5_4A32_D192_ED03;

/// SplitMix64 finaliser. A bijection on `u64`.
pub(crate) fn mix64(mut z: u64) -> u64 {
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Seed for the `index`-th independent trial of an experiment seeded with
/// `seed`. Injective in `index` for a fixed `seed`.
pub fn split_seed(seed: u64, index: u64) -> u64 {
    mix64(mix64(seed) ^ mix64(index ^ SPLIT_KEY))
}

/// One reference wire: the `bit_value` half of noise-bit `bit_index`.
#[derive(Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Debug)]
pub struct WireId {
    bit_index: u32,
    bit_value: u8,
}

impl WireId {
    /// Panics on `bit_index == 0` or `bit_value > 1`; see [`WireId::try_new`].
    pub fn new(bit_index: u32, bit_value: u8) -> Self {
        Self::try_new(bit_index, bit_value).unwrap_or_else(|| panic!("invalid wire R{bit_index}_{bit_value}"))
    }

    pub fn try_new(bit_index: u32, bit_value: u8) -> Option<Self> {
        (bit_index >= 1 && bit_value <= 1).then_some(WireId { bit_index, bit_value })
    }

    pub fn low(bit_index: u32) -> Self {
        Self::new(bit_index, 0)
    }

    pub fn high(bit_index: u32) -> Self {
        Self::new(bit_index, 1)
    }

    pub fn bit_index(self) -> u32 {
        self.bit_index
    }

    pub fn bit_value(self) -> u8 {
        self.bit_value
    }

    /// The other wire of the same noise-bit.
    pub fn inverse(self) -> Self {
        WireId { bit_index: self.bit_index, bit_value: 1 - self.bit_value }
    }

    /// Dense index `2(k-1) + v`.
    pub fn slot(self) -> usize {
        2 * (self.bit_index as usize - 1) + self.bit_value as usize
    }

    pub fn from_slot(slot: usize) -> Self {
        WireId { bit_index: (slot / 2 + 1) as u32, bit_value: (slot % 2) as u8 }
    }
}

impl fmt::Display for WireId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "R{}_{}", self.bit_index, self.bit_value)
    }
}

impl FromStr for WireId {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let bad = || Error::InvalidPattern(format!("not a wire name: {s:?}"));
        let rest = s.strip_prefix('R').ok_or_else(bad)?;
        let (k, v) = rest.split_once('_').ok_or_else(bad)?;
        let k: u32 = k.parse().map_err(|_| bad())?;
        let v: u8 = v.parse().map_err(|_| bad())?;
        WireId::try_new(k, v).ok_or_else(bad)
    }
}

impl Serialize for WireId {
    fn serialize<S: Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        serializer.collect_str(self)
    }
}

impl<'de> Deserialize<'de> for WireId {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> std::result::Result<Self, D::Error> {
        let s = String::deserialize(deserializer)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}

/// Amplitude convention for the telegraph waves.
#[derive(Clone, Copy, PartialEq, Eq, Hash, Debug, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum RtwScheme {
    /// High wires swing `±1`, Low wires `±1/2`; no Universe factor can vanish.
    #[default]
    Asymmetric,
    /// Every wire swings `±1`.
    Symmetric,
}

impl RtwScheme {
    /// Magnitude carried by a wire of the given bit value.
    pub fn magnitude(self, bit_value: u8) -> Dyadic {
        match (self, bit_value) {
            (RtwScheme::Asymmetric, 0) => Dyadic::pow2(-1),
            _ => Dyadic::one(),
        }
    }
}

impl FromStr for RtwScheme {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "asym" | "asymmetric" => Ok(RtwScheme::Asymmetric),
            "sym" | "symmetric" => Ok(RtwScheme::Symmetric),
            _ => Err(Error::InvalidPattern(format!("unknown RTW scheme {s:?}"))),
        }
    }
}

/// Per-clock flip probability `num/den` in `(0, 1]`.
#[derive(Clone, Copy, PartialEq, Eq, Hash, Debug, Serialize, Deserialize)]
pub struct FlipProb {
    num: u64,
    den: u64,
}

impl FlipProb {
    pub const HALF: FlipProb = FlipProb { num: 1, den: 2 };

    pub fn new(num: u64, den: u64) -> Result<Self> {
        if num == 0 || den == 0 || num > den {
            return Err(Error::InvalidFlipProb(format!("{num}/{den}")));
        }
        let g = num_integer::gcd(num, den);
        Ok(FlipProb { num: num / g, den: den / g })
    }

    pub fn num(self) -> u64 {
        self.num
    }

    pub fn den(self) -> u64 {
        self.den
    }

    pub fn as_f64(self) -> f64 {
        self.num as f64 / self.den as f64
    }

    fn is_half(self) -> bool {
        self.num * 2 == self.den
    }

    fn is_one(self) -> bool {
        self.num == self.den
    }

    /// Maps a uniform 64-bit draw to a Bernoulli(num/den) outcome.
    fn hit(self, draw: u64) -> bool {
        ((draw as u128 * self.den as u128) >> 64) < self.num as u128
    }
}

impl Default for FlipProb {
    fn default() -> Self {
        FlipProb::HALF
    }
}

impl fmt::Display for FlipProb {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}/{}", self.num, self.den)
    }
}

impl FromStr for FlipProb {
    type Err = Error;

    /// Accepts `p/q` or a finite decimal such as `0.25`.
    fn from_str(s: &str) -> Result<Self> {
        let bad = || Error::InvalidFlipProb(s.to_owned());
        let s = s.trim();
        if let Some((n, d)) = s.split_once('/') {
            return FlipProb::new(n.trim().parse().map_err(|_| bad())?, d.trim().parse().map_err(|_| bad())?);
        }
        let (int, frac) = s.split_once('.').unwrap_or((s, ""));
        if frac.len() > 18 || !frac.bytes().all(|b| b.is_ascii_digit()) {
            return Err(bad());
        }
        let den = 10u64.pow(frac.len() as u32);
        let int: u64 = if int.is_empty() { 0 } else { int.parse().map_err(|_| bad())? };
        let frac_val: u64 = if frac.is_empty() { 0 } else { frac.parse().map_err(|_| bad())? };
        let num = int.checked_mul(den).and_then(|v| v.checked_add(frac_val)).ok_or_else(bad)?;
        FlipProb::new(num, den)
    }
}

/// Keyed mixing of `(master_seed, wire)` into the wire's private stream seed.
///
/// For a fixed master seed the map is injective over wires, and for a fixed
/// wire it is injective over master seeds.
pub fn derive_wire_seed(master_seed: u64, wire: WireId) -> u64 {
    mix64(mix64(master_seed) ^ (wire.slot() as u64 + 1).wrapping_mul(GOLDEN))
}

fn draw(wire_seed: u64, t: u64) -> u64 {
    mix64(mix64(wire_seed ^ t.wrapping_mul(GOLDEN)).wrapping_add(wire_seed))
}

/// The `2M` reference telegraph waves of an `M`-noise-bit system.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ReferenceSystem {
    num_bits: u32,
    scheme: RtwScheme,
    master_seed: u64,
    flip_prob: FlipProb,
    wire_seeds: Vec<u64>,
}

impl ReferenceSystem {
    pub fn new(num_bits: u32, scheme: RtwScheme, master_seed: u64) -> Result<Self> {
        if num_bits == 0 {
            return Err(Error::InvalidBits(num_bits));
        }
        let wire_seeds =
            (0..2 * num_bits as usize).map(|slot| derive_wire_seed(master_seed, WireId::from_slot(slot))).collect();
        Ok(ReferenceSystem { num_bits, scheme, master_seed, flip_prob: FlipProb::HALF, wire_seeds })
    }

    pub fn with_flip_prob(mut self, flip_prob: FlipProb) -> Self {
        self.flip_prob = flip_prob;
        self
    }

    pub fn num_bits(&self) -> u32 {
        self.num_bits
    }

    pub fn scheme(&self) -> RtwScheme {
        self.scheme
    }

    pub fn master_seed(&self) -> u64 {
        self.master_seed
    }

    pub fn flip_prob(&self) -> FlipProb {
        self.flip_prob
    }

    pub fn wires(&self) -> impl Iterator<Item = WireId> {
        (0..2 * self.num_bits as usize).map(WireId::from_slot)
    }

    pub fn check_wire(&self, wire: WireId) -> Result<()> {
        if wire.bit_index() <= self.num_bits {
            Ok(())
        } else {
            Err(Error::InvalidWire { wire, bits: self.num_bits })
        }
    }

    /// The value of `wire` at clock `t`.
    ///
    /// Constant time for flip probabilities 1/2 and 1; otherwise linear in `t`
    /// (use [`ReferenceSystem::frames`] for sequential scans).
    pub fn wire_value(&self, wire: WireId, t: u64) -> Result<Dyadic> {
        self.check_wire(wire)?;
        Ok(self.signed(wire, self.positive(wire.slot(), t)))
    }

    fn signed(&self, wire: WireId, positive: bool) -> Dyadic {
        let mag = self.scheme.magnitude(wire.bit_value());
        if positive {
            mag
        } else {
            -mag
        }
    }

    fn initial_sign(seed: u64) -> bool {
        draw(seed, 0) >> 63 == 1
    }

    fn positive(&self, slot: usize, t: u64) -> bool {
        let seed = self.wire_seeds[slot];
        if self.flip_prob.is_half() {
            return draw(seed, t) >> 63 == 1;
        }
        let init = Self::initial_sign(seed);
        if self.flip_prob.is_one() {
            return init ^ (t % 2 == 1);
        }
        let flips = (1..=t).filter(|&k| self.flip_prob.hit(draw(seed, k))).count();
        init ^ (flips % 2 == 1)
    }

    /// All wire values at clock `t`.
    pub fn frame(&self, t: u64) -> ClockFrame {
        let signs: Vec<bool> = (0..self.wire_seeds.len()).map(|slot| self.positive(slot, t)).collect();
        self.frame_from_signs(t, &signs)
    }

    fn frame_from_signs(&self, t: u64, signs: &[bool]) -> ClockFrame {
        let values = signs.iter().enumerate().map(|(slot, &p)| self.signed(WireId::from_slot(slot), p)).collect();
        ClockFrame { clock: t, values }
    }

    /// Sequential frames from clock `start`, constant time per step.
    pub fn frames(&self, start: u64) -> Frames<'_> {
        let signs = (0..self.wire_seeds.len()).map(|slot| self.positive(slot, start)).collect();
        Frames { system: self, clock: start, signs }
    }
}

/// Snapshot of every wire at one clock. Draws are frozen for the clock, so
/// any number of switch reconfigurations can be read against one frame.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ClockFrame {
    clock: u64,
    values: Vec<Dyadic>,
}

impl ClockFrame {
    pub fn clock(&self) -> u64 {
        self.clock
    }

    pub fn num_bits(&self) -> u32 {
        (self.values.len() / 2) as u32
    }

    /// Panics if the wire is outside the frame's system.
    pub fn value(&self, wire: WireId) -> &Dyadic {
        &self.values[wire.slot()]
    }
}

/// Iterator over consecutive [`ClockFrame`]s.
pub struct Frames<'a> {
    system: &'a ReferenceSystem,
    clock: u64,
    signs: Vec<bool>,
}

impl Iterator for Frames<'_> {
    type Item = ClockFrame;

    fn next(&mut self) -> Option<ClockFrame> {
        let frame = self.system.frame_from_signs(self.clock, &self.signs);
        let next = self.clock.checked_add(1)?;
        let fp = self.system.flip_prob;
        for (slot, sign) in self.signs.iter_mut().enumerate() {
            let seed = self.system.wire_seeds[slot];
            *sign = if fp.is_half() {
                draw(seed, next) >> 63 == 1
            } else if fp.hit(draw(seed, next)) {
                !*sign
            } else {
                *sign
            };
        }
        self.clock = next;
        Some(frame)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::collections::HashSet;

    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn as_f64(d: &Dyadic) -> f64 {
        d.to_f64()
    }

    #[test]
    fn wire_seeds_are_injective_over_wires() {
        for master in [0u64, 1, 42, u64::MAX] {
            let seeds: HashSet<u64> = (0..4096).map(|s| derive_wire_seed(master, WireId::from_slot(s))).collect();
            assert_eq!(seeds.len(), 4096);
        }
        assert_eq!(derive_wire_seed(7, WireId::new(3, 1)), derive_wire_seed(7, WireId::new(3, 1)));
    }

    #[test]
    fn master_seed_collision_scan() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let wire = WireId::new(5, 0);
        let mut masters = HashSet::new();
        let mut derived = HashSet::new();
        while masters.len() < 1_000_000 {
            let m: u64 = rng.gen();
            if masters.insert(m) {
                derived.insert(derive_wire_seed(m, wire));
            }
        }
        assert_eq!(derived.len(), masters.len());
    }

    #[test]
    fn asymmetric_amplitudes() {
        let sys = ReferenceSystem::new(3, RtwScheme::Asymmetric, 9).unwrap();
        for t in 0..200 {
            for k in 1..=3 {
                let lo = sys.wire_value(WireId::low(k), t).unwrap();
                let hi = sys.wire_value(WireId::high(k), t).unwrap();
                assert_eq!(lo.abs(), Dyadic::pow2(-1));
                assert_eq!(hi.abs(), Dyadic::one());
            }
        }
        let sym = ReferenceSystem::new(2, RtwScheme::Symmetric, 9).unwrap();
        assert_eq!(sym.wire_value(WireId::low(1), 3).unwrap().abs(), Dyadic::one());
    }

    #[test]
    fn invalid_wire_rejected() {
        let sys = ReferenceSystem::new(2, RtwScheme::Asymmetric, 1).unwrap();
        assert!(matches!(sys.wire_value(WireId::low(3), 0), Err(Error::InvalidWire { .. })));
        assert!(ReferenceSystem::new(0, RtwScheme::Asymmetric, 1).is_err());
    }

    #[test]
    fn replay_is_deterministic() {
        let a = ReferenceSystem::new(4, RtwScheme::Asymmetric, 123).unwrap();
        let b = ReferenceSystem::new(4, RtwScheme::Asymmetric, 123).unwrap();
        for t in [0, 1, 17, 1 << 40] {
            assert_eq!(a.frame(t), b.frame(t));
        }
    }

    #[test]
    fn zero_mean_and_pairwise_uncorrelated() {
        let sys = ReferenceSystem::new(3, RtwScheme::Symmetric, 2024).unwrap();
        let t_max = 200_000u64;
        let bound = 5.0 / (t_max as f64).sqrt();
        let mut sums = [0f64; 6];
        let mut cross = [[0f64; 6]; 6];
        for frame in sys.frames(0).take(t_max as usize) {
            let v: Vec<f64> = (0..6).map(|s| as_f64(frame.value(WireId::from_slot(s)))).collect();
            for i in 0..6 {
                sums[i] += v[i];
                for j in i + 1..6 {
                    cross[i][j] += v[i] * v[j];
                }
            }
        }
        for i in 0..6 {
            assert!((sums[i] / t_max as f64).abs() <= bound, "mean of slot {i}");
            for (j, c) in cross[i].iter().enumerate().skip(i + 1) {
                assert!((c / t_max as f64).abs() <= bound, "corr {i},{j}");
            }
        }
    }

    #[test]
    fn sequential_frames_match_random_access() {
        for fp in [FlipProb::HALF, FlipProb::new(1, 1).unwrap(), FlipProb::new(1, 5).unwrap()] {
            let sys = ReferenceSystem::new(2, RtwScheme::Asymmetric, 77).unwrap().with_flip_prob(fp);
            for frame in sys.frames(3).take(300) {
                assert_eq!(frame, sys.frame(frame.clock()));
            }
        }
    }

    #[test]
    fn flip_probability_is_respected() {
        let fp = FlipProb::new(1, 8).unwrap();
        let sys = ReferenceSystem::new(1, RtwScheme::Symmetric, 5).unwrap().with_flip_prob(fp);
        let n = 200_000usize;
        let frames: Vec<_> = sys.frames(0).take(n + 1).collect();
        let flips = frames.windows(2).filter(|w| w[0].value(WireId::low(1)) != w[1].value(WireId::low(1))).count();
        let p = 0.125;
        let sigma = (n as f64 * p * (1.0 - p)).sqrt();
        assert!((flips as f64 - n as f64 * p).abs() <= 5.0 * sigma, "flips {flips}");
    }

    #[test]
    fn flip_prob_parsing() {
        assert_eq!("1/2".parse::<FlipProb>().unwrap(), FlipProb::HALF);
        assert_eq!("0.5".parse::<FlipProb>().unwrap(), FlipProb::HALF);
        assert_eq!("0.25".parse::<FlipProb>().unwrap(), FlipProb::new(1, 4).unwrap());
        assert_eq!("1".parse::<FlipProb>().unwrap(), FlipProb::new(1, 1).unwrap());
        assert!("0".parse::<FlipProb>().is_err());
        assert!("3/2".parse::<FlipProb>().is_err());
    }

    #[test]
    fn wire_names_roundtrip() {
        let w: WireId = "R12_1".parse().unwrap();
        assert_eq!(w, WireId::new(12, 1));
        assert_eq!(w.to_string(), "R12_1");
        assert_eq!(w.inverse(), WireId::new(12, 0));
        assert!("R0_1".parse::<WireId>().is_err());
        assert!("R3_2".parse::<WireId>().is_err());
    }

    #[test]
    fn split_seeds_distinct() {
        let seeds: HashSet<u64> = (0..100_000).map(|i| split_seed(99, i)).collect();
        assert_eq!(seeds.len(), 100_000);
    }
}
