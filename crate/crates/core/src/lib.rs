//! Discrete-clock simulator for instantaneous noise-based logic (INBL).
//!
//! Logic values ride on `2M` independent random telegraph waves (two per
//! noise-bit). Products of one wave per bit are *product-strings*; sums of
//! them are *superpositions*, built here as small factored expression DAGs.
//! Grounding selected reference wires collapses a superposition onto the
//! strings that avoid those wires, which gives:
//!
//! * exact membership of a full string in one clock and `M` switch operations
//!   ([`collapse::full_string_search`]);
//! * fragment search with one-sided error `2^-tau`
//!   ([`collapse::fragment_search`]);
//! * discrimination of two-bit entangled configurations
//!   ([`collapse::entangle_discriminate`]);
//! * forward and inverse phonebook lookup ([`phonebook`]).
//!
//! All amplitudes are exact [`Dyadic`] values. The [`oracle`] module expands
//! superpositions by brute force and is the ground truth for every protocol.

pub mod collapse;
pub mod dsl;
pub mod dyadic;
pub mod error;
pub mod experiments;
pub mod expr;
pub mod gen;
pub mod oracle;
pub mod pattern;
pub mod phonebook;
pub mod reference;
pub mod switches;

pub use collapse::{
    collapse_measure, entangle_discriminate, fragment_search, full_string_search, wait_for_live_clock, BellClass,
    BellOutcome, PartnerProbe, SearchOptions, SearchOutcome, Verdict,
};
pub use dsl::{format_dsl, format_program, parse_dsl, parse_dsl_with_bits, ParseError, Superposition};
pub use dyadic::Dyadic;
pub use error::{Error, Result};
pub use expr::{
    build_even, build_odd, build_parity, build_product_string, build_universe, eval, eval_frame, Expr, Node,
};
pub use oracle::{expand, legal_bell_class, Expansion};
pub use pattern::Pattern;
pub use phonebook::{build_phonebook, inverse_lookup, lookup, switching_cost, Direction, PhonebookExpr, PhonebookSpec};
pub use reference::{derive_wire_seed, split_seed, ClockFrame, FlipProb, ReferenceSystem, RtwScheme, WireId};
pub use switches::{ground_inverse, SwitchState};
