//! Cyclic thermodynamic bookkeeping.
//!
//! A cycle banks delta * p on average, pays at least the same amount to
//! restore consumed fuel, and pays a Landauer reset cost that depends on
//! what the controller keeps: nothing (reversible), the success bit
//! (measured memory), or the whole transcript.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// What the controller stores across cycles.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum MemoryVariant {
    /// Success bit computed, used, and uncomputed; nothing persists.
    Reversible,
    /// The success bit persists and is blindly erased each cycle.
    MeasuredMemory,
    /// The full transcript persists; its erasure is lower-bounded by the
    /// supplied transcript entropy.
    FullTranscript,
}

/// Binary entropy in bits, with the convention 0 log 0 = 0.
pub fn binary_entropy(p: f64) -> Result<f64> {
    if !(0.0..=1.0).contains(&p) {
        return Err(Error::InvalidParameter(format!(
            "probability {p} outside [0,1]"
        )));
    }
    fn term(q: f64) -> f64 {
        if q <= 0.0 {
            0.0
        } else {
            -q * q.log2()
        }
    }
    Ok(term(p) + term(1.0 - p))
}

/// One cycle's energy ledger, in absolute units and normalized by delta
/// and by kT ln 2.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct LedgerReport {
    pub p: f64,
    pub delta: f64,
    pub kt_ln2: f64,
    pub variant: MemoryVariant,
    /// Supplied transcript entropy in bits (full-transcript variant only).
    pub transcript_entropy: Option<f64>,
    /// Mean banked energy, delta * p.
    pub battery_gain: f64,
    /// Minimum mean fuel-restoration cost; the ideal model gives delta * p.
    pub fuel_cost: f64,
    /// The fuel cost is reported as the floor, not a device figure.
    pub fuel_cost_is_lower_bound: bool,
    /// Minimum heat paid to blindly reset the persistent memory.
    pub reset_cost: f64,
    pub reset_cost_is_lower_bound: bool,
    /// battery_gain - fuel_cost - reset_cost; never positive.
    pub net_work_upper: f64,
    pub battery_gain_over_delta: f64,
    pub fuel_cost_over_delta: f64,
    pub reset_cost_over_kt_ln2: f64,
    /// Blind reset only; erasure assisted by side information is not
    /// credited anywhere in the ledger.
    pub reset_policy: String,
}

/// Assemble the cycle ledger for success rate `p`.
pub fn cycle_report(
    p: f64,
    delta: f64,
    kt_ln2: f64,
    variant: MemoryVariant,
    transcript_entropy: Option<f64>,
) -> Result<LedgerReport> {
    if !(0.0..=1.0).contains(&p) {
        return Err(Error::InvalidParameter(format!(
            "success rate {p} outside [0,1]"
        )));
    }
    if !delta.is_finite() || delta <= 0.0 {
        return Err(Error::InvalidParameter(format!(
            "delta must be positive, got {delta}"
        )));
    }
    if !kt_ln2.is_finite() || kt_ln2 < 0.0 {
        return Err(Error::InvalidParameter(format!(
            "kT ln2 must be nonnegative, got {kt_ln2}"
        )));
    }

    let h2 = binary_entropy(p)?;
    let reset_entropy = match variant {
        MemoryVariant::Reversible => 0.0,
        MemoryVariant::MeasuredMemory => h2,
        MemoryVariant::FullTranscript => {
            let h_t = transcript_entropy.ok_or_else(|| {
                Error::MissingParameter(
                    "full-transcript ledger needs the transcript entropy H(T)".into(),
                )
            })?;
            if h_t < h2 - 1e-12 {
                return Err(Error::InvalidParameter(format!(
                    "transcript entropy {h_t} below the success-bit entropy {h2}"
                )));
            }
            h_t
        }
    };

    let battery_gain = delta * p;
    let fuel_cost = delta * p;
    let reset_cost = kt_ln2 * reset_entropy;
    let net_work_upper = battery_gain - fuel_cost - reset_cost;

    Ok(LedgerReport {
        p,
        delta,
        kt_ln2,
        variant,
        transcript_entropy: match variant {
            MemoryVariant::FullTranscript => transcript_entropy,
            _ => None,
        },
        battery_gain,
        fuel_cost,
        fuel_cost_is_lower_bound: true,
        reset_cost,
        reset_cost_is_lower_bound: true,
        net_work_upper,
        battery_gain_over_delta: p,
        fuel_cost_over_delta: p,
        reset_cost_over_kt_ln2: reset_entropy,
        reset_policy: "blind reset; side-information-assisted reductions are not applied".into(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn entropy_endpoints_and_midpoint() {
        assert_eq!(binary_entropy(0.0).unwrap(), 0.0);
        assert_eq!(binary_entropy(1.0).unwrap(), 0.0);
        assert_eq!(binary_entropy(0.5).unwrap(), 1.0);
        assert!(binary_entropy(-0.1).is_err());
        assert!(binary_entropy(1.1).is_err());
    }

    #[test]
    fn entropy_is_symmetric() {
        for i in 0..=100 {
            let p = i as f64 / 100.0;
            let a = binary_entropy(p).unwrap();
            let b = binary_entropy(1.0 - p).unwrap();
            assert!((a - b).abs() <= 1e-15, "p={p}: {a} vs {b}");
        }
    }

    #[test]
    fn reversible_cycle_balances_exactly() {
        for p in [0.0, 0.25, 0.853553, 1.0] {
            let report = cycle_report(p, 1.0, 1.0, MemoryVariant::Reversible, None).unwrap();
            assert_eq!(report.reset_cost, 0.0);
            assert_eq!(report.net_work_upper, 0.0);
            assert_eq!(report.battery_gain, report.fuel_cost);
        }
    }

    #[test]
    fn measured_memory_pays_the_success_bit_entropy() {
        let report = cycle_report(1.0, 1.0, 1.0, MemoryVariant::MeasuredMemory, None).unwrap();
        assert_eq!(report.net_work_upper, 0.0);

        let p = 0.853553;
        let report = cycle_report(p, 1.0, 1.0, MemoryVariant::MeasuredMemory, None).unwrap();
        let h2 = binary_entropy(p).unwrap();
        assert_eq!(report.net_work_upper, -h2);
        assert_eq!(report.reset_cost_over_kt_ln2, h2);
    }

    #[test]
    fn full_transcript_requires_and_uses_supplied_entropy() {
        assert!(matches!(
            cycle_report(0.5, 1.0, 1.0, MemoryVariant::FullTranscript, None),
            Err(Error::MissingParameter(_))
        ));
        // Below the success-bit entropy is inadmissible.
        assert!(cycle_report(0.5, 1.0, 1.0, MemoryVariant::FullTranscript, Some(0.5)).is_err());
        let report = cycle_report(0.5, 1.0, 1.0, MemoryVariant::FullTranscript, Some(3.0)).unwrap();
        assert_eq!(report.reset_cost, 3.0);
        assert_eq!(report.net_work_upper, -3.0);
        assert_eq!(report.transcript_entropy, Some(3.0));
    }

    #[test]
    fn net_work_is_never_positive_on_the_grid() {
        for i in 0..=100 {
            let p = i as f64 / 100.0;
            let h2 = binary_entropy(p).unwrap();
            for (variant, entropy) in [
                (MemoryVariant::Reversible, None),
                (MemoryVariant::MeasuredMemory, None),
                (MemoryVariant::FullTranscript, Some(h2 + 0.25)),
            ] {
                let report = cycle_report(p, 1.0, 0.7, variant, entropy).unwrap();
                assert!(report.net_work_upper <= 0.0, "p={p} {variant:?}");
                assert!(report.battery_gain - report.fuel_cost <= 1e-12);
            }
        }
    }

    #[test]
    fn transcript_reset_dominates_measured_reset() {
        for i in 0..=20 {
            let p = i as f64 / 20.0;
            let h2 = binary_entropy(p).unwrap();
            let measured = cycle_report(p, 2.0, 1.3, MemoryVariant::MeasuredMemory, None).unwrap();
            for extra in [0.0, 0.1, 2.0] {
                let full =
                    cycle_report(p, 2.0, 1.3, MemoryVariant::FullTranscript, Some(h2 + extra))
                        .unwrap();
                assert!(full.reset_cost >= measured.reset_cost - 1e-15);
            }
        }
    }

    #[test]
    fn parameter_validation() {
        assert!(cycle_report(1.5, 1.0, 1.0, MemoryVariant::Reversible, None).is_err());
        assert!(cycle_report(0.5, 0.0, 1.0, MemoryVariant::Reversible, None).is_err());
        assert!(cycle_report(0.5, 1.0, -1.0, MemoryVariant::Reversible, None).is_err());
    }

    #[test]
    fn report_serializes_with_units() {
        let report = cycle_report(0.75, 2.0, 0.5, MemoryVariant::MeasuredMemory, None).unwrap();
        let json = serde_json::to_string(&report).unwrap();
        assert!(json.contains("\"variant\":\"measured-memory\""));
        assert!(json.contains("\"battery_gain\":1.5"));
        assert!(json.contains("\"battery_gain_over_delta\":0.75"));
        assert!(json.contains("\"reset_policy\""));
    }
}
