//! Grounding switches on the reference wires.

use std::fmt;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::pattern::Pattern;
use crate::reference::WireId;

/// Live/grounded status of every wire, plus an epoch that advances on each
/// actual change. Grounding is idempotent.
#[derive(Clone, PartialEq, Eq, Debug)]
pub struct SwitchState {
    grounded: Vec<bool>,
    epoch: u64,
}

impl SwitchState {
    pub fn all_live(num_bits: u32) -> Self {
        SwitchState { grounded: vec![false; 2 * num_bits as usize], epoch: 0 }
    }

    pub fn num_bits(&self) -> u32 {
        (self.grounded.len() / 2) as u32
    }

    pub fn epoch(&self) -> u64 {
        self.epoch
    }

    fn check(&self, wire: WireId) -> Result<usize> {
        let slot = wire.slot();
        if slot < self.grounded.len() {
            Ok(slot)
        } else {
            Err(Error::InvalidWire { wire, bits: self.num_bits() })
        }
    }

    /// Grounds `wire`; returns whether the state changed.
    pub fn ground(&mut self, wire: WireId) -> Result<bool> {
        self.set(wire, true)
    }

    /// Reconnects `wire` to its reference source; returns whether the state changed.
    pub fn restore(&mut self, wire: WireId) -> Result<bool> {
        self.set(wire, false)
    }

    fn set(&mut self, wire: WireId, grounded: bool) -> Result<bool> {
        let slot = self.check(wire)?;
        if self.grounded[slot] == grounded {
            return Ok(false);
        }
        self.grounded[slot] = grounded;
        self.epoch += 1;
        Ok(true)
    }

    pub fn restore_all(&mut self) {
        if self.grounded.iter().any(|&g| g) {
            self.grounded.iter_mut().for_each(|g| *g = false);
            self.epoch += 1;
        }
    }

    /// Out-of-range wires read as live.
    pub fn is_grounded(&self, wire: WireId) -> bool {
        self.grounded.get(wire.slot()).copied().unwrap_or(false)
    }

    pub fn is_all_live(&self) -> bool {
        !self.grounded.iter().any(|&g| g)
    }

    pub fn grounded_count(&self) -> usize {
        self.grounded.iter().filter(|&&g| g).count()
    }

    pub fn grounded_wires(&self) -> impl Iterator<Item = WireId> + '_ {
        self.grounded.iter().enumerate().filter(|(_, &g)| g).map(|(s, _)| WireId::from_slot(s))
    }

    /// Same grounded set, regardless of epoch.
    pub fn same_wiring(&self, other: &SwitchState) -> bool {
        self.grounded == other.grounded
    }
}

impl fmt::Display for SwitchState {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let names: Vec<String> = self.grounded_wires().map(|w| w.to_string()).collect();
        write!(f, "grounded[{}]", names.join(","))
    }
}

impl Serialize for SwitchState {
    fn serialize<S: serde::Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        serializer.collect_seq(self.grounded_wires())
    }
}

/// Grounds the inverse wire of every assigned bit of `pattern`.
pub fn ground_inverse(pattern: &Pattern, num_bits: u32) -> Result<SwitchState> {
    if pattern.num_bits() != num_bits {
        return Err(Error::InvalidPattern(format!("pattern spans {} bits, system has {num_bits}", pattern.num_bits())));
    }
    let mut state = SwitchState::all_live(num_bits);
    for wire in pattern.inverse_wires() {
        state.ground(wire)?;
    }
    Ok(state)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn names(s: &SwitchState) -> Vec<String> {
        s.grounded_wires().map(|w| w.to_string()).collect()
    }

    #[test]
    fn full_string_grounding() {
        let s = ground_inverse(&Pattern::from_bitstring("1010").unwrap(), 4).unwrap();
        assert_eq!(names(&s), ["R1_0", "R2_1", "R3_0", "R4_1"]);
        assert_eq!(s.grounded_count(), 4);
    }

    #[test]
    fn fragment_grounding() {
        let p = Pattern::parse_fragments("1=0,2=0,4=0", 4).unwrap();
        let s = ground_inverse(&p, 4).unwrap();
        assert_eq!(names(&s), ["R1_1", "R2_1", "R4_1"]);
    }

    #[test]
    fn empty_pattern_leaves_all_live() {
        let s = ground_inverse(&Pattern::empty(4), 4).unwrap();
        assert!(s.is_all_live());
        assert!(ground_inverse(&Pattern::empty(3), 4).is_err());
    }

    #[test]
    fn grounding_is_idempotent_and_epoch_counts_changes() {
        let mut s = SwitchState::all_live(2);
        assert!(s.ground(WireId::new(1, 0)).unwrap());
        assert!(!s.ground(WireId::new(1, 0)).unwrap());
        assert_eq!(s.epoch(), 1);
        assert!(s.restore(WireId::new(1, 0)).unwrap());
        assert_eq!(s.epoch(), 2);
        assert!(s.ground(WireId::new(3, 0)).is_err());
    }
}
