//! Full and partial bit-value assignments.
//!
//! A full pattern names one product-string; a partial one names a fragment.
//! Bit `1` is the leftmost character of the bitstring form, so `1010` means
//! `R1_1 R2_0 R3_1 R4_0`.

use std::fmt;

use crate::error::{Error, Result};
use crate::reference::WireId;

/// Largest system whose full patterns pack into a `u64` key.
pub const MAX_KEY_BITS: u32 = 64;

#[derive(Clone, PartialEq, Eq, Hash, Debug)]
pub struct Pattern {
    bits: Vec<Option<u8>>,
}

impl Pattern {
    /// No bits assigned.
    pub fn empty(num_bits: u32) -> Self {
        Pattern { bits: vec![None; num_bits as usize] }
    }

    /// Parses a full pattern such as `1010`.
    pub fn from_bitstring(s: &str) -> Result<Self> {
        let s = s.trim();
        if s.is_empty() {
            return Err(Error::InvalidPattern("empty bitstring".into()));
        }
        let bits = s
            .chars()
            .map(|c| match c {
                '0' => Ok(Some(0)),
                '1' => Ok(Some(1)),
                _ => Err(Error::InvalidPattern(format!("bad digit {c:?} in {s:?}"))),
            })
            .collect::<Result<_>>()?;
        Ok(Pattern { bits })
    }

    pub fn from_assignments(num_bits: u32, assignments: impl IntoIterator<Item = (u32, u8)>) -> Result<Self> {
        let mut p = Pattern::empty(num_bits);
        for (k, v) in assignments {
            if k == 0 || k > num_bits {
                return Err(Error::InvalidPattern(format!("bit {k} outside 1..={num_bits}")));
            }
            if v > 1 {
                return Err(Error::InvalidPattern(format!("bit value {v} for bit {k}")));
            }
            let slot = &mut p.bits[k as usize - 1];
            if slot.is_some() {
                return Err(Error::InvalidPattern(format!("bit {k} assigned twice")));
            }
            *slot = Some(v);
        }
        Ok(p)
    }

    /// Parses a fragment list such as `1=0,2=0,4=0`.
    pub fn parse_fragments(s: &str, num_bits: u32) -> Result<Self> {
        let mut pairs = Vec::new();
        for item in s.split(',').map(str::trim).filter(|i| !i.is_empty()) {
            let (k, v) =
                item.split_once('=').ok_or_else(|| Error::InvalidPattern(format!("expected k=v, got {item:?}")))?;
            let k = k.trim().parse().map_err(|_| Error::InvalidPattern(format!("bad bit index {k:?}")))?;
            let v = v.trim().parse().map_err(|_| Error::InvalidPattern(format!("bad bit value {v:?}")))?;
            pairs.push((k, v));
        }
        Pattern::from_assignments(num_bits, pairs)
    }

    /// The full pattern packed in `key` (bit `k` at position `num_bits - k`).
    pub fn from_key(key: u64, num_bits: u32) -> Self {
        let bits = (1..=num_bits).map(|k| Some(((key >> (num_bits - k)) & 1) as u8)).collect();
        Pattern { bits }
    }

    pub fn num_bits(&self) -> u32 {
        self.bits.len() as u32
    }

    pub fn is_full(&self) -> bool {
        self.bits.iter().all(Option::is_some)
    }

    pub fn assigned_count(&self) -> usize {
        self.bits.iter().filter(|b| b.is_some()).count()
    }

    pub fn get(&self, bit_index: u32) -> Option<u8> {
        self.bits.get(bit_index.checked_sub(1)? as usize).copied().flatten()
    }

    /// `(bit_index, bit_value)` in ascending index order.
    pub fn assignments(&self) -> impl Iterator<Item = (u32, u8)> + '_ {
        self.bits.iter().enumerate().filter_map(|(i, b)| b.map(|v| (i as u32 + 1, v)))
    }

    /// The wires this pattern keeps live.
    pub fn wires(&self) -> impl Iterator<Item = WireId> + '_ {
        self.assignments().map(|(k, v)| WireId::new(k, v))
    }

    /// The wires that must be grounded to isolate this pattern.
    pub fn inverse_wires(&self) -> impl Iterator<Item = WireId> + '_ {
        self.wires().map(WireId::inverse)
    }

    /// Packed key of a full pattern.
    pub fn key(&self) -> Option<u64> {
        if !self.is_full() || self.num_bits() > MAX_KEY_BITS {
            return None;
        }
        Some(self.bits.iter().fold(0u64, |acc, b| (acc << 1) | b.unwrap_or(0) as u64))
    }

    /// Whether the full string `key` agrees with every assigned bit.
    pub fn matches_key(&self, key: u64) -> bool {
        let m = self.num_bits();
        self.assignments().all(|(k, v)| ((key >> (m - k)) & 1) as u8 == v)
    }

    pub fn require_full(&self) -> Result<()> {
        if self.is_full() {
            Ok(())
        } else {
            Err(Error::PartialPattern { assigned: self.assigned_count(), bits: self.num_bits() })
        }
    }
}

impl fmt::Display for Pattern {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_full() {
            for b in &self.bits {
                write!(f, "{}", b.unwrap_or(0))?;
            }
            return Ok(());
        }
        let parts: Vec<String> = self.assignments().map(|(k, v)| format!("{k}={v}")).collect();
        f.write_str(&parts.join(","))
    }
}

/// Renders `key` as an `num_bits`-character bitstring.
pub fn key_to_bitstring(key: u64, num_bits: u32) -> String {
    (1..=num_bits).map(|k| if (key >> (num_bits - k)) & 1 == 1 { '1' } else { '0' }).collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn bitstring_order_is_left_to_right() {
        let p = Pattern::from_bitstring("1010").unwrap();
        assert!(p.is_full());
        assert_eq!(p.get(1), Some(1));
        assert_eq!(p.get(2), Some(0));
        assert_eq!(p.key(), Some(0b1010));
        assert_eq!(Pattern::from_key(0b1010, 4), p);
        assert_eq!(p.to_string(), "1010");
        let inv: Vec<String> = p.inverse_wires().map(|w| w.to_string()).collect();
        assert_eq!(inv, ["R1_0", "R2_1", "R3_0", "R4_1"]);
    }

    #[test]
    fn fragments() {
        let p = Pattern::parse_fragments("1=0, 2=0,4=0", 4).unwrap();
        assert!(!p.is_full());
        assert_eq!(p.assigned_count(), 3);
        assert_eq!(p.to_string(), "1=0,2=0,4=0");
        assert!(p.matches_key(0b0010));
        assert!(!p.matches_key(0b0011));
        assert!(matches!(p.require_full(), Err(Error::PartialPattern { assigned: 3, bits: 4 })));
    }

    #[test]
    fn invalid_patterns() {
        assert!(Pattern::parse_fragments("1=0,1=1", 4).is_err());
        assert!(Pattern::parse_fragments("5=0", 4).is_err());
        assert!(Pattern::parse_fragments("0=0", 4).is_err());
        assert!(Pattern::parse_fragments("2=2", 4).is_err());
        assert!(Pattern::from_bitstring("10x1").is_err());
        assert!(Pattern::from_bitstring("").is_err());
    }

    #[test]
    fn empty_pattern_matches_everything() {
        let p = Pattern::empty(3);
        assert_eq!(p.assigned_count(), 0);
        assert!((0..8).all(|k| p.matches_key(k)));
        assert_eq!(key_to_bitstring(3, 4), "0011");
    }
}
