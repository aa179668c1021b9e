//! Statistical experiments over many clocks or many seeded trials.
//!
//! Trials are independent: trial `i` of an experiment seeded with `s` runs on
//! a reference system seeded with [`split_seed`]`(s, i)`. Aggregates are
//! order-independent, so trials run in parallel and still reproduce exactly.

use std::collections::BTreeMap;

use rayon::prelude::*;
use serde::Serialize;

use crate::collapse::{fragment_search, SearchOptions, Verdict};
use crate::dyadic::Dyadic;
use crate::error::{Error, Result};
use crate::expr::{eval_frame, Expr};
use crate::oracle::expand;
use crate::pattern::Pattern;
use crate::phonebook::{switching_cost, Direction};
use crate::reference::{split_seed, ReferenceSystem, RtwScheme};
use crate::switches::SwitchState;

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ZeroStats {
    pub clocks: u64,
    pub zero_clocks: u64,
    pub zero_fraction: f64,
    /// Length of each maximal run of consecutive zero clocks → count. Runs
    /// still open at the end of the window are not counted.
    pub run_histogram: BTreeMap<u64, u64>,
}

/// Zero-amplitude statistics of `expr` over clocks `start..start+clocks`.
pub fn run_zero_stats(expr: &Expr, system: &ReferenceSystem, start: u64, clocks: u64) -> Result<ZeroStats> {
    if clocks == 0 {
        return Err(Error::InvalidArgument("need at least one clock".into()));
    }
    let live = SwitchState::all_live(system.num_bits());
    let mut zero_clocks = 0u64;
    let mut run = 0u64;
    let mut run_histogram = BTreeMap::new();
    for frame in system.frames(start).take(clocks as usize) {
        if eval_frame(expr, &frame, &live)?.is_zero() {
            zero_clocks += 1;
            run += 1;
        } else if run > 0 {
            *run_histogram.entry(run).or_insert(0) += 1;
            run = 0;
        }
    }
    Ok(ZeroStats { clocks, zero_clocks, zero_fraction: zero_clocks as f64 / clocks as f64, run_histogram })
}

/// Weighted least-squares slope of `ln(count)` against run length, over bins
/// holding at least `min_count` runs. `None` with fewer than two such bins.
pub fn log_slope(histogram: &BTreeMap<u64, u64>, min_count: u64) -> Option<f64> {
    let pts: Vec<(f64, f64, f64)> = histogram
        .iter()
        .filter(|(_, &c)| c >= min_count)
        .map(|(&k, &c)| (k as f64, (c as f64).ln(), c as f64))
        .collect();
    if pts.len() < 2 {
        return None;
    }
    let sw: f64 = pts.iter().map(|p| p.2).sum();
    let mx = pts.iter().map(|p| p.2 * p.0).sum::<f64>() / sw;
    let my = pts.iter().map(|p| p.2 * p.1).sum::<f64>() / sw;
    let sxy: f64 = pts.iter().map(|p| p.2 * (p.0 - mx) * (p.1 - my)).sum();
    let sxx: f64 = pts.iter().map(|p| p.2 * (p.0 - mx) * (p.0 - mx)).sum();
    Some(sxy / sxx)
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct CrossCorrelation {
    pub clocks: u64,
    pub sum_ab: Dyadic,
    pub sum_aa: Dyadic,
    pub sum_bb: Dyadic,
    /// `Σab / sqrt(Σa² Σb²)`.
    pub estimate: f64,
}

const CHUNK: u64 = 1 << 14;

/// Normalised zero-lag cross-correlation of two signals over
/// `start..start+clocks`. Sums are exact; only the final ratio is rounded,
/// and a Cauchy-Schwarz equality yields exactly ±1.
pub fn run_crosscorr(
    a: &Expr,
    b: &Expr,
    system: &ReferenceSystem,
    start: u64,
    clocks: u64,
) -> Result<CrossCorrelation> {
    if clocks == 0 {
        return Err(Error::InvalidArgument("need at least one clock".into()));
    }
    let live = SwitchState::all_live(system.num_bits());
    let chunks: Vec<u64> = (0..clocks.div_ceil(CHUNK)).collect();
    let partial = chunks
        .par_iter()
        .map(|&c| {
            let from = start + c * CHUNK;
            let len = CHUNK.min(clocks - c * CHUNK) as usize;
            let mut sums = (Dyadic::zero(), Dyadic::zero(), Dyadic::zero());
            for frame in system.frames(from).take(len) {
                let x = eval_frame(a, &frame, &live)?;
                let y = eval_frame(b, &frame, &live)?;
                sums.0 += &x * &y;
                sums.1 += &x * &x;
                sums.2 += &y * &y;
            }
            Ok(sums)
        })
        .collect::<Result<Vec<_>>>()?;
    let (mut sum_ab, mut sum_aa, mut sum_bb) = (Dyadic::zero(), Dyadic::zero(), Dyadic::zero());
    for (ab, aa, bb) in partial {
        sum_ab += ab;
        sum_aa += aa;
        sum_bb += bb;
    }
    if sum_aa.is_zero() || sum_bb.is_zero() {
        return Err(Error::ZeroVariance);
    }
    let estimate = if &sum_ab * &sum_ab == &sum_aa * &sum_bb {
        sum_ab.signum() as f64
    } else {
        sum_ab.to_f64() / (sum_aa.to_f64().sqrt() * sum_bb.to_f64().sqrt())
    };
    Ok(CrossCorrelation { clocks, sum_ab, sum_aa, sum_bb, estimate })
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SpeedupReport {
    pub bits: u32,
    pub superposition_size: f64,
    pub classical_ratio_formula: &'static str,
    pub classical_ratio: f64,
    pub grover_ratio_formula: &'static str,
    pub grover_ratio: f64,
    pub photon_bound_formula: &'static str,
    pub photon_bound: f64,
    pub name_bits: u32,
    pub number_bits: u32,
    pub phonebook_forward_formula: &'static str,
    pub phonebook_forward_ops: u32,
    pub phonebook_inverse_formula: &'static str,
    pub phonebook_inverse_ops: u32,
}

/// Complexity figures for an `M`-bit search and an `N`/`S` phonebook.
pub fn speedup_report(bits: u32, name_bits: u32, number_bits: u32) -> Result<SpeedupReport> {
    if bits == 0 {
        return Err(Error::InvalidBits(0));
    }
    let m = bits as f64;
    let size = 2f64.powi(bits as i32);
    Ok(SpeedupReport {
        bits,
        superposition_size: size,
        classical_ratio_formula: "2^M/M",
        classical_ratio: size / m,
        grover_ratio_formula: "2^M/M^1.5",
        grover_ratio: size / m.powf(1.5),
        photon_bound_formula: "M*2^M",
        photon_bound: m * size,
        name_bits,
        number_bits,
        phonebook_forward_formula: "N+2S",
        phonebook_forward_ops: switching_cost(name_bits, number_bits, Direction::Forward),
        phonebook_inverse_formula: "S+2N",
        phonebook_inverse_ops: switching_cost(name_bits, number_bits, Direction::Inverse),
    })
}

/// Strings `0011` and `0101` (equal asymmetric magnitude 1/4) plus a decoy
/// `0000`, with the fragment `4=1` that keeps only the pair. The decoy keeps
/// the ungrounded output nonzero at every clock; the surviving pair cancels
/// whenever its two signs disagree, which happens with probability 1/2.
pub fn canceling_pair() -> (Expr, Pattern) {
    let text = "R1_0*R2_0*R3_1*R4_1 + R1_0*R2_1*R3_0*R4_1 + R1_0*R2_0*R3_0*R4_0";
    let expr = crate::dsl::parse_dsl(text).expect("static superposition parses").expr;
    let fragment = Pattern::parse_fragments("4=1", 4).expect("static fragment parses");
    (expr, fragment)
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ErrorScalingRecord {
    pub tau: u32,
    pub trials: u64,
    pub false_negatives: u64,
    pub rate: f64,
    pub expected: f64,
    pub sigma: f64,
    pub deviation_sigmas: f64,
    /// Present verdicts confirmed against the oracle survivor set.
    pub present_confirmed: u64,
    /// Present verdicts the oracle contradicts. Must be zero.
    pub present_wrong: u64,
}

/// Fragment-search false-negative rate over `trials` independent systems at
/// observation window `tau`, on [`canceling_pair`].
pub fn run_error_scaling(seed: u64, tau: u32, trials: u64) -> Result<ErrorScalingRecord> {
    let (expr, fragment) = canceling_pair();
    let survivors = expand(&expr, 4)?.surviving(&fragment);
    let live = SwitchState::all_live(4);
    let tally = (0..trials)
        .into_par_iter()
        .map(|i| {
            let system = ReferenceSystem::new(4, RtwScheme::Asymmetric, split_seed(seed, i))?;
            let out = fragment_search(&expr, &system, &fragment, tau, &SearchOptions::default())?;
            Ok(match out.verdict {
                Verdict::Present { clock, amplitude } => {
                    let ok = !survivors.is_empty() && survivors.eval(&system, &live, clock) == amplitude;
                    if ok {
                        (0u64, 1u64, 0u64)
                    } else {
                        (0, 0, 1)
                    }
                }
                _ => (1, 0, 0),
            })
        })
        .collect::<Result<Vec<_>>>()?;
    let (false_negatives, present_confirmed, present_wrong) =
        tally.iter().fold((0, 0, 0), |acc, t| (acc.0 + t.0, acc.1 + t.1, acc.2 + t.2));
    let expected = 0.5f64.powi(tau as i32);
    let sigma = (expected * (1.0 - expected) / trials as f64).sqrt();
    let rate = false_negatives as f64 / trials as f64;
    Ok(ErrorScalingRecord {
        tau,
        trials,
        false_negatives,
        rate,
        expected,
        sigma,
        deviation_sigmas: (rate - expected).abs() / sigma,
        present_confirmed,
        present_wrong,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::collapse::wait_for_live_clock;
    use crate::dsl::parse_dsl;
    use crate::expr::build_universe;

    fn sym(bits: u32, seed: u64) -> ReferenceSystem {
        ReferenceSystem::new(bits, RtwScheme::Symmetric, seed).unwrap()
    }

    #[test]
    fn asymmetric_universe_never_zero() {
        let s = ReferenceSystem::new(3, RtwScheme::Asymmetric, 1).unwrap();
        let z = run_zero_stats(&build_universe(3).unwrap(), &s, 0, 20_000).unwrap();
        assert_eq!(z.zero_clocks, 0);
        assert!(z.run_histogram.is_empty());
    }

    #[test]
    fn symmetric_single_bit_zero_fraction() {
        let t = 200_000u64;
        let z = run_zero_stats(&build_universe(1).unwrap(), &sym(1, 3), 0, t).unwrap();
        let sigma = (0.25 / t as f64).sqrt();
        assert!((z.zero_fraction - 0.5).abs() <= 3.0 * sigma, "{}", z.zero_fraction);
        let slope = log_slope(&z.run_histogram, 100).unwrap();
        assert!((slope + std::f64::consts::LN_2).abs() <= 0.1 * std::f64::consts::LN_2, "{slope}");
    }

    #[test]
    fn geometric_wait() {
        let u = build_universe(1).unwrap();
        let s = sym(1, 8);
        let trials = 100_000u64;
        let total: u64 = (0..trials).map(|i| wait_for_live_clock(&u, &s, i * 1000, 1000).unwrap() - i * 1000 + 1).sum();
        let mean = total as f64 / trials as f64;
        // Geometric(1/2) on {1, 2, ...}: mean 2, variance 2.
        let sigma = (2.0 / trials as f64).sqrt();
        assert!((mean - 2.0).abs() <= 5.0 * sigma, "{mean}");
    }

    #[test]
    fn self_correlation_is_one() {
        let a = parse_dsl("R1_0*R2_1").unwrap().expr;
        let s = ReferenceSystem::new(2, RtwScheme::Asymmetric, 4).unwrap();
        assert_eq!(run_crosscorr(&a, &a, &s, 0, 10_000).unwrap().estimate, 1.0);
        let neg = parse_dsl("-R1_0*R2_1").unwrap().expr;
        assert_eq!(run_crosscorr(&a, &neg, &s, 0, 10_000).unwrap().estimate, -1.0);
        let b = parse_dsl("R1_1*R2_1").unwrap().expr;
        let c = run_crosscorr(&a, &b, &s, 0, 100_000).unwrap();
        assert!(c.estimate.abs() <= 5.0 / (100_000f64).sqrt());
        let dead = &a - &a;
        assert_eq!(run_crosscorr(&a, &dead, &s, 0, 100).unwrap_err(), Error::ZeroVariance);
    }

    #[test]
    fn string_correlates_with_its_universe() {
        let a = parse_dsl("R1_0*R2_1").unwrap().expr;
        let s = ReferenceSystem::new(2, RtwScheme::Asymmetric, 4).unwrap();
        let c = run_crosscorr(&a, &build_universe(2).unwrap(), &s, 0, 50_000).unwrap();
        assert!(c.estimate > 0.1, "{}", c.estimate);
    }

    #[test]
    fn speedup_figures() {
        let r = speedup_report(4, 8, 8).unwrap();
        assert_eq!(r.classical_ratio, 4.0);
        assert_eq!(r.grover_ratio, 2.0);
        assert_eq!(r.photon_bound, 64.0);
        assert_eq!(r.phonebook_forward_ops, 24);
        assert!(speedup_report(0, 1, 1).is_err());
    }

    #[test]
    fn canceling_pair_shape() {
        let (e, frag) = canceling_pair();
        let survivors = expand(&e, 4).unwrap().surviving(&frag);
        assert_eq!(survivors.dump(), "0011 1\n0101 1\n");
    }

    #[test]
    fn error_scaling_small_run() {
        let r = run_error_scaling(5, 2, 20_000).unwrap();
        assert_eq!(r.present_wrong, 0);
        assert_eq!(r.present_confirmed + r.false_negatives, r.trials);
        assert!(r.deviation_sigmas <= 3.0, "{r:?}");
        assert_eq!(run_error_scaling(5, 2, 1000).unwrap(), run_error_scaling(5, 2, 1000).unwrap());
    }
}
