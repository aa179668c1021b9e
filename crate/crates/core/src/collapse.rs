//! Collapse measurement and the search protocols built on it.
//!
//! Every protocol runs on its own [`SwitchState`], starts from all-live
//! wires, waits for a clock at which the superposition is nonzero, and then
//! reconfigures switches freely inside that clock (draws are frozen per
//! clock). All wires are reconnected before a protocol returns.

use serde::Serialize;

use crate::dyadic::Dyadic;
use crate::error::{Error, Result};
use crate::expr::{eval_frame, Expr};
pub use crate::oracle::BellClass;
use crate::pattern::Pattern;
use crate::reference::{ClockFrame, ReferenceSystem, WireId};
use crate::switches::{ground_inverse, SwitchState};

pub const DEFAULT_TAU: u32 = 64;
pub const DEFAULT_MAX_WAIT: u64 = 10_000;

/// Where a protocol starts looking for a live clock, and how long it may wait.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub struct SearchOptions {
    pub start: u64,
    pub max_wait: u64,
}

impl Default for SearchOptions {
    fn default() -> Self {
        SearchOptions { start: 0, max_wait: DEFAULT_MAX_WAIT }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Action {
    /// Read the output at the current switch configuration.
    Observe,
    Ground {
        wire: WireId,
    },
    Restore {
        wire: WireId,
    },
}

/// One protocol step and the output amplitude right after it.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct TraceStep {
    pub clock: u64,
    #[serde(flatten)]
    pub action: Action,
    pub amplitude: Dyadic,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
#[serde(tag = "verdict", rename_all = "snake_case")]
pub enum Verdict {
    /// The output stayed nonzero at `clock` after grounding.
    Present { clock: u64, amplitude: Dyadic },
    /// Exact absence (full-string search).
    Absent,
    /// No nonzero reading in the observation window; error at most `epsilon`.
    AbsentWithBound { epsilon: Dyadic },
}

impl Verdict {
    pub fn is_present(&self) -> bool {
        matches!(self, Verdict::Present { .. })
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct SearchOutcome {
    #[serde(flatten)]
    pub verdict: Verdict,
    pub switch_ops: u32,
    /// First live clock found, where observation started.
    pub live_clock: u64,
    pub clocks_waited: u64,
    pub clocks_observed: u64,
    pub trace: Vec<TraceStep>,
}

/// A protocol run: exclusive switches over frozen draws of one clock.
pub(crate) struct Bench<'a> {
    expr: &'a Expr,
    switches: SwitchState,
    frame: ClockFrame,
    switch_ops: u32,
    trace: Vec<TraceStep>,
}

impl<'a> Bench<'a> {
    pub(crate) fn new(expr: &'a Expr, system: &ReferenceSystem, clock: u64) -> Self {
        Bench {
            expr,
            switches: SwitchState::all_live(system.num_bits()),
            frame: system.frame(clock),
            switch_ops: 0,
            trace: Vec::new(),
        }
    }

    fn read(&self) -> Dyadic {
        eval_frame(self.expr, &self.frame, &self.switches).expect("expression range checked before the run")
    }

    fn record(&mut self, action: Action) -> Dyadic {
        let amplitude = self.read();
        self.trace.push(TraceStep { clock: self.frame.clock(), action, amplitude: amplitude.clone() });
        amplitude
    }

    pub(crate) fn observe(&mut self) -> Dyadic {
        self.record(Action::Observe)
    }

    /// Grounds `wire` (one switch operation) and reads the output.
    pub(crate) fn ground(&mut self, wire: WireId) -> Result<Dyadic> {
        self.switches.ground(wire)?;
        self.switch_ops += 1;
        Ok(self.record(Action::Ground { wire }))
    }

    pub(crate) fn restore(&mut self, wire: WireId) -> Result<Dyadic> {
        self.switches.restore(wire)?;
        Ok(self.record(Action::Restore { wire }))
    }

    fn advance(&mut self, frame: ClockFrame) {
        self.frame = frame;
    }

    pub(crate) fn clock(&self) -> u64 {
        self.frame.clock()
    }

    /// Reconnects every grounded wire and hands back the cost and trace.
    pub(crate) fn finish(mut self) -> Result<(u32, Vec<TraceStep>)> {
        let grounded: Vec<WireId> = self.switches.grounded_wires().collect();
        for wire in grounded {
            self.restore(wire)?;
        }
        debug_assert!(self.switches.is_all_live());
        Ok((self.switch_ops, self.trace))
    }
}

fn check_expr(expr: &Expr, system: &ReferenceSystem) -> Result<()> {
    if expr.max_bit() > system.num_bits() {
        return Err(Error::InvalidWire { wire: WireId::low(expr.max_bit()), bits: system.num_bits() });
    }
    Ok(())
}

fn check_pattern(pattern: &Pattern, system: &ReferenceSystem) -> Result<()> {
    if pattern.num_bits() != system.num_bits() {
        return Err(Error::InvalidPattern(format!(
            "pattern spans {} bits, system has {}",
            pattern.num_bits(),
            system.num_bits()
        )));
    }
    Ok(())
}

/// Smallest `t` in `[start, start + max_wait]` with a nonzero output, all
/// wires live.
pub fn wait_for_live_clock(expr: &Expr, system: &ReferenceSystem, start: u64, max_wait: u64) -> Result<u64> {
    check_expr(expr, system)?;
    let live = SwitchState::all_live(system.num_bits());
    let end = start.saturating_add(max_wait);
    for frame in system.frames(start) {
        if !eval_frame(expr, &frame, &live)?.is_zero() {
            return Ok(frame.clock());
        }
        if frame.clock() >= end {
            break;
        }
    }
    Err(Error::MaxWaitExceeded { from: start, to: end })
}

/// Output at live clock `t` after grounding the inverse wires of `pattern`.
/// Nonzero exactly when the pattern's product-string has a nonzero
/// coefficient, in which case it equals that coefficient times the string's
/// value at `t`.
pub fn collapse_measure(expr: &Expr, system: &ReferenceSystem, pattern: &Pattern, t: u64) -> Result<Dyadic> {
    check_expr(expr, system)?;
    check_pattern(pattern, system)?;
    pattern.require_full()?;
    let frame = system.frame(t);
    if eval_frame(expr, &frame, &SwitchState::all_live(system.num_bits()))?.is_zero() {
        return Err(Error::DeadClock { clock: t });
    }
    let switches = ground_inverse(pattern, system.num_bits())?;
    eval_frame(expr, &frame, &switches)
}

/// Deterministic membership test for one full product-string: `M` switch
/// operations at a single live clock, zero error either way.
pub fn full_string_search(
    expr: &Expr,
    system: &ReferenceSystem,
    pattern: &Pattern,
    opts: &SearchOptions,
) -> Result<SearchOutcome> {
    check_pattern(pattern, system)?;
    pattern.require_full()?;
    let t = wait_for_live_clock(expr, system, opts.start, opts.max_wait)?;
    let mut bench = Bench::new(expr, system, t);
    bench.observe();
    let mut amplitude = Dyadic::zero();
    for wire in pattern.inverse_wires() {
        amplitude = bench.ground(wire)?;
    }
    let verdict = if amplitude.is_zero() { Verdict::Absent } else { Verdict::Present { clock: t, amplitude } };
    let (switch_ops, trace) = bench.finish()?;
    Ok(SearchOutcome { verdict, switch_ops, live_clock: t, clocks_waited: t - opts.start, clocks_observed: 1, trace })
}

/// Fragment membership: ground the inverse wires of the assigned bits once,
/// then watch up to `tau` consecutive clocks from the first live clock.
/// A nonzero reading is a zero-error `Present`; `tau` zero readings give
/// `AbsentWithBound(2^-tau)`.
pub fn fragment_search(
    expr: &Expr,
    system: &ReferenceSystem,
    pattern: &Pattern,
    tau: u32,
    opts: &SearchOptions,
) -> Result<SearchOutcome> {
    check_pattern(pattern, system)?;
    if tau == 0 {
        return Err(Error::InvalidArgument("observation window tau must be at least 1".into()));
    }
    let t0 = wait_for_live_clock(expr, system, opts.start, opts.max_wait)?;
    let mut bench = Bench::new(expr, system, t0);
    bench.observe();
    for wire in pattern.inverse_wires() {
        bench.ground(wire)?;
    }
    let mut verdict = Verdict::AbsentWithBound { epsilon: Dyadic::pow2(-(tau as i64)) };
    let mut observed = 0u64;
    let mut frames = system.frames(t0);
    for i in 0..tau {
        if i > 0 {
            match frames.next() {
                Some(frame) => bench.advance(frame),
                None => break,
            }
        } else {
            frames.next();
        }
        observed += 1;
        let amplitude = bench.observe();
        if !amplitude.is_zero() {
            verdict = Verdict::Present { clock: bench.clock(), amplitude };
            break;
        }
    }
    let (switch_ops, trace) = bench.finish()?;
    Ok(SearchOutcome {
        verdict,
        switch_ops,
        live_clock: t0,
        clocks_waited: t0 - opts.start,
        clocks_observed: observed,
        trace,
    })
}

/// Which bit-2 wire is grounded to resolve the partner of a bit-1 value.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Default, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum PartnerProbe {
    /// Ground `R_20`: a zero output means the partner is 0.
    #[default]
    GroundLow,
    /// Ground `R_21`: a zero output means the partner is 1.
    GroundHigh,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct BellOutcome {
    pub class: BellClass,
    pub clock: u64,
    pub switch_ops: u32,
    pub trace: Vec<TraceStep>,
}

/// Resolves the string carrying value `first` on bit 1, if any, and its
/// bit-2 partner. Leaves the switches as it found them.
fn probe_first_bit(bench: &mut Bench<'_>, first: u8, probe: PartnerProbe) -> Result<Option<u8>> {
    let other = WireId::new(1, 1 - first);
    if bench.ground(other)?.is_zero() {
        bench.restore(other)?;
        return Ok(None);
    }
    let (wire, zero_means) = match probe {
        PartnerProbe::GroundLow => (WireId::new(2, 0), 0),
        PartnerProbe::GroundHigh => (WireId::new(2, 1), 1),
    };
    let partner = if bench.ground(wire)?.is_zero() { zero_means } else { 1 - zero_means };
    bench.restore(wire)?;
    bench.restore(other)?;
    Ok(Some(partner))
}

/// Identifies which of the six legal two-bit configurations `expr` holds,
/// using groundings at a single live clock.
pub fn entangle_discriminate(
    expr: &Expr,
    system: &ReferenceSystem,
    opts: &SearchOptions,
    probe: PartnerProbe,
) -> Result<BellOutcome> {
    if system.num_bits() != 2 {
        return Err(Error::SystemSizeMismatch { expected: 2, found: system.num_bits() });
    }
    let t = wait_for_live_clock(expr, system, opts.start, opts.max_wait)?;
    let mut bench = Bench::new(expr, system, t);
    bench.observe();
    let low = probe_first_bit(&mut bench, 0, probe)?;
    let high = probe_first_bit(&mut bench, 1, probe)?;
    let mut strings = Vec::new();
    if let Some(p) = low {
        strings.push(p as u64);
    }
    if let Some(p) = high {
        strings.push(0b10 | p as u64);
    }
    let found = strings.iter().map(|k| format!("{k:02b}")).collect::<Vec<_>>().join(",");
    let class = BellClass::from_strings(strings).ok_or(Error::IllegalClass(format!("strings [{found}]")))?;
    let (switch_ops, trace) = bench.finish()?;
    Ok(BellOutcome { class, clock: t, switch_ops, trace })
}
