//! Finite-statistics certificates from work data.
//!
//! Work bits are Bernoulli trials of the success probability, so a lower
//! confidence bound on the empirical rate certifies nonlocality or
//! post-quantumness when it clears the corresponding game value. Four
//! bound constructions are provided (Hoeffding, the martingale variant,
//! Clopper-Pearson, Wilson) plus inversion of a calibrated readout-error
//! channel.
//!
//! The special functions are self-contained: regularized incomplete beta
//! by continued fraction with the quantile found by bisection, and the
//! inverse normal CDF by rational approximation. Certificates must not
//! fail on edge inputs, so bisection is preferred over Newton iterations.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::games::GameValues;
use crate::transducer::WorkRecord;

// ---------------------------------------------------------------------------
// Special functions
// ---------------------------------------------------------------------------

/// Lanczos approximation (g = 7, 9 terms), valid for positive arguments.
#[allow(clippy::excessive_precision)] // published coefficients kept verbatim
fn ln_gamma(x: f64) -> f64 {
    const COEFFS: [f64; 9] = [
        0.999_999_999_999_809_93,
        676.520_368_121_885_1,
        -1_259.139_216_722_402_8,
        771.323_428_777_653_13,
        -176.615_029_162_140_59,
        12.507_343_278_686_905,
        -0.138_571_095_265_720_12,
        9.984_369_578_019_571_6e-6,
        1.505_632_735_149_311_6e-7,
    ];
    if x < 0.5 {
        return (PI / (PI * x).sin()).ln() - ln_gamma(1.0 - x);
    }
    let x = x - 1.0;
    let mut acc = COEFFS[0];
    for (i, &c) in COEFFS.iter().enumerate().skip(1) {
        acc += c / (x + i as f64);
    }
    let t = x + 7.5;
    0.5 * (2.0 * PI).ln() + (x + 0.5) * t.ln() - t + acc.ln()
}

/// Continued fraction for the incomplete beta (modified Lentz).
fn beta_continued_fraction(a: f64, b: f64, x: f64) -> f64 {
    const MAX_ITER: usize = 2000;
    const EPS: f64 = 1e-15;
    const FPMIN: f64 = 1e-300;

    let qab = a + b;
    let qap = a + 1.0;
    let qam = a - 1.0;

    let mut c = 1.0;
    let mut d = 1.0 - qab * x / qap;
    if d.abs() < FPMIN {
        d = FPMIN;
    }
    d = 1.0 / d;
    let mut h = d;

    for m in 1..=MAX_ITER {
        let m_f = m as f64;
        let m2 = 2.0 * m_f;

        let aa = m_f * (b - m_f) * x / ((qam + m2) * (a + m2));
        d = 1.0 + aa * d;
        if d.abs() < FPMIN {
            d = FPMIN;
        }
        c = 1.0 + aa / c;
        if c.abs() < FPMIN {
            c = FPMIN;
        }
        d = 1.0 / d;
        h *= d * c;

        let aa = -(a + m_f) * (qab + m_f) * x / ((a + m2) * (qap + m2));
        d = 1.0 + aa * d;
        if d.abs() < FPMIN {
            d = FPMIN;
        }
        c = 1.0 + aa / c;
        if c.abs() < FPMIN {
            c = FPMIN;
        }
        d = 1.0 / d;
        let del = d * c;
        h *= del;

        if (del - 1.0).abs() < EPS {
            break;
        }
    }
    h
}

/// Regularized incomplete beta I_x(a, b), with the symmetry switch at
/// x > (a+1)/(a+b+2).
pub fn regularized_incomplete_beta(a: f64, b: f64, x: f64) -> f64 {
    if x <= 0.0 {
        return 0.0;
    }
    if x >= 1.0 {
        return 1.0;
    }
    let ln_front = ln_gamma(a + b) - ln_gamma(a) - ln_gamma(b) + a * x.ln() + b * (-x).ln_1p();
    let front = ln_front.exp();
    if x < (a + 1.0) / (a + b + 2.0) {
        front * beta_continued_fraction(a, b, x) / a
    } else {
        1.0 - front * beta_continued_fraction(b, a, 1.0 - x) / b
    }
}

/// q-quantile of Beta(a, b) by bisection: tolerance 1e-12 on the argument,
/// at most 200 halvings.
pub fn beta_quantile(q: f64, a: f64, b: f64) -> f64 {
    let mut lo = 0.0f64;
    let mut hi = 1.0f64;
    for _ in 0..200 {
        if hi - lo < 1e-12 {
            break;
        }
        let mid = 0.5 * (lo + hi);
        if regularized_incomplete_beta(a, b, mid) < q {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    0.5 * (lo + hi)
}

/// Inverse standard normal CDF by Acklam's rational approximation
/// (absolute error below 1e-8 everywhere).
pub fn inverse_normal_cdf(p: f64) -> Result<f64> {
    if p.is_nan() || p <= 0.0 || p >= 1.0 {
        return Err(Error::InvalidParameter(format!(
            "quantile argument {p} outside (0,1)"
        )));
    }
    const A: [f64; 6] = [
        -3.969_683_028_665_376e1,
        2.209_460_984_245_205e2,
        -2.759_285_104_469_687e2,
        1.383_577_518_672_69e2,
        -3.066_479_806_614_716e1,
        2.506_628_277_459_239,
    ];
    const B: [f64; 5] = [
        -5.447_609_879_822_406e1,
        1.615_858_368_580_409e2,
        -1.556_989_798_598_866e2,
        6.680_131_188_771_972e1,
        -1.328_068_155_288_572e1,
    ];
    const C: [f64; 6] = [
        -7.784_894_002_430_293e-3,
        -3.223_964_580_411_365e-1,
        -2.400_758_277_161_838,
        -2.549_732_539_343_734,
        4.374_664_141_464_968,
        2.938_163_982_698_783,
    ];
    const D: [f64; 4] = [
        7.784_695_709_041_462e-3,
        3.224_671_290_700_398e-1,
        2.445_134_137_142_996,
        3.754_408_661_907_416,
    ];
    const P_LOW: f64 = 0.02425;

    let x = if p < P_LOW {
        let q = (-2.0 * p.ln()).sqrt();
        (((((C[0] * q + C[1]) * q + C[2]) * q + C[3]) * q + C[4]) * q + C[5])
            / ((((D[0] * q + D[1]) * q + D[2]) * q + D[3]) * q + 1.0)
    } else if p <= 1.0 - P_LOW {
        let q = p - 0.5;
        let r = q * q;
        (((((A[0] * r + A[1]) * r + A[2]) * r + A[3]) * r + A[4]) * r + A[5]) * q
            / (((((B[0] * r + B[1]) * r + B[2]) * r + B[3]) * r + B[4]) * r + 1.0)
    } else {
        let q = (-2.0 * (-p).ln_1p()).sqrt();
        -((((((C[0] * q + C[1]) * q + C[2]) * q + C[3]) * q + C[4]) * q + C[5])
            / ((((D[0] * q + D[1]) * q + D[2]) * q + D[3]) * q + 1.0))
    };
    Ok(x)
}

// ---------------------------------------------------------------------------
// Concentration bounds
// ---------------------------------------------------------------------------

/// Hoeffding radius sqrt(ln(1/alpha) / (2n)).
pub fn hoeffding_epsilon(n: u64, alpha: f64) -> Result<f64> {
    if n == 0 {
        return Err(Error::InvalidParameter(
            "sample count must be at least 1".into(),
        ));
    }
    if alpha.is_nan() || alpha <= 0.0 || alpha >= 1.0 {
        return Err(Error::InvalidParameter(format!(
            "alpha {alpha} outside (0,1)"
        )));
    }
    Ok(((1.0 / alpha).ln() / (2.0 * n as f64)).sqrt())
}

/// Hoeffding lower confidence bound max(0, p_hat - epsilon_n(alpha)).
pub fn hoeffding_lower_bound(record: &WorkRecord, alpha: f64) -> Result<f64> {
    let eps = hoeffding_epsilon(record.rounds() as u64, alpha)?;
    Ok((record.p_hat() - eps).max(0.0))
}

/// Martingale (Azuma-Hoeffding) lower confidence bound. The radius is the
/// same number as the Hoeffding bound, but it holds for the time-averaged
/// success probability over the tested rounds, so it tolerates drifting
/// behaviour.
pub fn azuma_lower_bound(record: &WorkRecord, alpha: f64) -> Result<f64> {
    hoeffding_lower_bound(record, alpha)
}

/// A closed interval, for probabilities or for CHSH values.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Interval {
    pub lower: f64,
    pub upper: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Sided {
    One,
    Two,
}

/// Clopper-Pearson interval. One-sided uses level alpha for the lower
/// endpoint and leaves the upper endpoint at 1; two-sided splits alpha.
/// Endpoint conventions: lower = 0 at k = 0, upper = 1 at k = n.
pub fn clopper_pearson(k: u64, n: u64, alpha: f64, sided: Sided) -> Result<Interval> {
    if n == 0 {
        return Err(Error::InvalidParameter(
            "sample count must be at least 1".into(),
        ));
    }
    if k > n {
        return Err(Error::InvalidParameter(format!(
            "successes {k} exceed samples {n}"
        )));
    }
    if alpha.is_nan() || alpha <= 0.0 || alpha >= 1.0 {
        return Err(Error::InvalidParameter(format!(
            "alpha {alpha} outside (0,1)"
        )));
    }
    let q_low = match sided {
        Sided::One => alpha,
        Sided::Two => alpha / 2.0,
    };
    let lower = if k == 0 {
        0.0
    } else {
        beta_quantile(q_low, k as f64, (n - k + 1) as f64)
    };
    let upper = match sided {
        Sided::One => 1.0,
        Sided::Two => {
            if k == n {
                1.0
            } else {
                beta_quantile(1.0 - alpha / 2.0, (k + 1) as f64, (n - k) as f64)
            }
        }
    };
    Ok(Interval { lower, upper })
}

/// Wilson score interval with z = Phi^-1(1 - alpha/2), clamped to [0, 1].
pub fn wilson(k: u64, n: u64, alpha: f64) -> Result<Interval> {
    if n == 0 {
        return Err(Error::InvalidParameter(
            "sample count must be at least 1".into(),
        ));
    }
    if k > n {
        return Err(Error::InvalidParameter(format!(
            "successes {k} exceed samples {n}"
        )));
    }
    if alpha.is_nan() || alpha <= 0.0 || alpha >= 1.0 {
        return Err(Error::InvalidParameter(format!(
            "alpha {alpha} outside (0,1)"
        )));
    }
    let z = inverse_normal_cdf(1.0 - alpha / 2.0)?;
    let n_f = n as f64;
    let p_hat = k as f64 / n_f;
    let z2 = z * z;
    let denominator = 1.0 + z2 / n_f;
    let center = p_hat + z2 / (2.0 * n_f);
    let margin = z * (p_hat * (1.0 - p_hat) / n_f + z2 / (4.0 * n_f * n_f)).sqrt();
    Ok(Interval {
        lower: ((center - margin) / denominator).clamp(0.0, 1.0),
        upper: ((center + margin) / denominator).clamp(0.0, 1.0),
    })
}

/// Map a success-probability interval to a CHSH interval, S = 8(p - 1/2)
/// endpoint by endpoint.
pub fn chsh_interval(p: Interval) -> Interval {
    Interval {
        lower: 8.0 * (p.lower - 0.5),
        upper: 8.0 * (p.upper - 0.5),
    }
}

// ---------------------------------------------------------------------------
// Readout model
// ---------------------------------------------------------------------------

/// Calibrated battery-readout error channel: eta1 is the probability of
/// reporting "charged" on a win, eta0 on a loss. Optional calibration
/// upper bounds feed the conservative inversion.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ReadoutModel {
    pub eta1: f64,
    pub eta0: f64,
    pub eta1_upper: Option<f64>,
    pub eta0_upper: Option<f64>,
}

impl ReadoutModel {
    pub fn exact(eta0: f64, eta1: f64) -> Result<Self> {
        Self::with_upper_bounds(eta0, eta1, None, None)
    }

    pub fn with_upper_bounds(
        eta0: f64,
        eta1: f64,
        eta0_upper: Option<f64>,
        eta1_upper: Option<f64>,
    ) -> Result<Self> {
        if eta0.is_nan() || eta1.is_nan() || eta0 < 0.0 || eta0 >= eta1 || eta1 > 1.0 {
            return Err(Error::InvalidParameter(format!(
                "readout rates need 0 <= eta0 < eta1 <= 1, got eta0={eta0}, eta1={eta1}"
            )));
        }
        for (label, bound) in [("eta0", eta0_upper), ("eta1", eta1_upper)] {
            if let Some(b) = bound {
                if !(0.0..=1.0).contains(&b) {
                    return Err(Error::InvalidParameter(format!(
                        "{label} upper bound {b} outside [0, 1]"
                    )));
                }
            }
        }
        if let (Some(e0), Some(e1)) = (eta0_upper, eta1_upper) {
            if e0 >= e1 {
                return Err(Error::DegenerateCalibration(format!(
                    "eta0 upper bound {e0} is not below eta1 upper bound {e1}"
                )));
            }
        }
        Ok(Self {
            eta1,
            eta0,
            eta1_upper,
            eta0_upper,
        })
    }

    /// Calibration-bounds-only model for certification pipelines that know
    /// nothing beyond the upper bounds: the point rates are left at the
    /// trivial (0, 1) channel and the conservative inversion uses the
    /// bounds.
    pub fn conservative(eta0_upper: f64, eta1_upper: Option<f64>) -> Result<Self> {
        Self::with_upper_bounds(0.0, 1.0, Some(eta0_upper), eta1_upper)
    }

    /// A symmetric work-bit flip channel: eta1 = 1 - eps, eta0 = eps.
    pub fn symmetric_flip(eps: f64) -> Result<Self> {
        if !(0.0..0.5).contains(&eps) {
            return Err(Error::InvalidParameter(format!(
                "symmetric flip rate {eps} outside [0, 0.5)"
            )));
        }
        Self::exact(eps, 1.0 - eps)
    }

    /// The observed charging probability for a true success rate p.
    pub fn observe(&self, p: f64) -> f64 {
        self.eta0 + (self.eta1 - self.eta0) * p
    }
}

/// Invert the readout channel on a lower confidence bound. The exact form
/// divides out the calibrated rates; the conservative form substitutes the
/// calibration upper bounds (eta1 <= 1 when no bound is given), which can
/// only lower the result. Output is truncated to [0, 1].
pub fn readout_invert(p_obs_lower: f64, model: &ReadoutModel, conservative: bool) -> Result<f64> {
    if !(0.0..=1.0).contains(&p_obs_lower) {
        return Err(Error::InvalidParameter(format!(
            "observed bound {p_obs_lower} outside [0,1]"
        )));
    }
    let (e0, e1) = if conservative {
        (
            model.eta0_upper.unwrap_or(model.eta0),
            model.eta1_upper.unwrap_or(1.0),
        )
    } else {
        (model.eta0, model.eta1)
    };
    if e1 - e0 <= 0.0 {
        return Err(Error::DegenerateCalibration(format!(
            "effective rates eta0={e0}, eta1={e1} leave no signal range"
        )));
    }
    let numerator = p_obs_lower - e0;
    if numerator <= 0.0 {
        return Ok(0.0);
    }
    Ok((numerator / (e1 - e0)).clamp(0.0, 1.0))
}

/// Largest symmetric work-bit flip rate that keeps an ideal PR-box signal
/// above the CHSH quantum ceiling: sin^2(pi/8).
pub fn symmetric_flip_threshold() -> f64 {
    (PI / 8.0).sin().powi(2)
}

// ---------------------------------------------------------------------------
// Certificates
// ---------------------------------------------------------------------------

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Method {
    Hoeffding,
    Azuma,
    ClopperPearson,
    Wilson,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Verdict {
    None,
    Nonlocal,
    PostQuantum,
}

#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct Thresholds {
    pub omega_local: f64,
    pub omega_quantum: f64,
    pub quantum_is_exact: bool,
}

/// A self-contained, auditable certificate: every intermediate quantity
/// and the exact thresholds are serialized alongside the verdict.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct CertificateReport {
    pub game: String,
    pub n: u64,
    pub k: u64,
    pub p_hat: f64,
    pub method: Method,
    pub alpha: f64,
    /// Concentration radius (Hoeffding and Azuma methods only).
    pub epsilon: Option<f64>,
    pub p_lower: f64,
    pub p_upper: Option<f64>,
    /// Lower bound after conservative readout inversion.
    pub corrected_p_lower: Option<f64>,
    pub readout: Option<ReadoutModel>,
    pub thresholds: Thresholds,
    pub verdict: Verdict,
    /// CHSH lower bound 8(p_L - 1/2), present for CHSH records.
    pub s_lower: Option<f64>,
    /// True for the martingale method: the bound concerns the
    /// time-averaged success probability.
    pub drift_tolerant: bool,
    pub notes: Vec<String>,
}

impl CertificateReport {
    /// Pretty-printed JSON, the interchange form of a certificate.
    pub fn to_json_pretty(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serializes")
    }
}

/// Issue a certificate for a work record against a game's thresholds.
/// Verdicts use strict comparisons; ties demote to the weaker verdict.
/// Post-quantum verdicts require an exact quantum value.
pub fn certify(
    record: &WorkRecord,
    game_values: &GameValues,
    method: Method,
    alpha: f64,
    model: Option<&ReadoutModel>,
) -> Result<CertificateReport> {
    if record.rounds() == 0 {
        return Err(Error::InvalidParameter(
            "cannot certify an empty record".into(),
        ));
    }
    if game_values.delta_units {
        return Err(Error::InvalidParameter(
            "certification thresholds must be probabilities, not energies".into(),
        ));
    }
    let n = record.rounds() as u64;
    let k = record.ones() as u64;
    let p_hat = record.p_hat();

    let (p_lower, p_upper, epsilon) = match method {
        Method::Hoeffding | Method::Azuma => {
            let eps = hoeffding_epsilon(n, alpha)?;
            ((p_hat - eps).max(0.0), None, Some(eps))
        }
        Method::ClopperPearson => {
            let interval = clopper_pearson(k, n, alpha, Sided::One)?;
            (interval.lower, None, None)
        }
        Method::Wilson => {
            let interval = wilson(k, n, alpha)?;
            (interval.lower, Some(interval.upper), None)
        }
    };

    let corrected_p_lower = match model {
        Some(m) => Some(readout_invert(p_lower, m, true)?),
        None => None,
    };
    let effective = corrected_p_lower.unwrap_or(p_lower);

    let mut notes = Vec::new();
    let verdict = if effective > game_values.quantum && game_values.quantum_is_exact {
        Verdict::PostQuantum
    } else if effective > game_values.local {
        if effective > game_values.quantum && !game_values.quantum_is_exact {
            notes.push(
                "bound exceeds the quantum threshold, but that threshold is itself a lower \
                 bound; post-quantum verdict withheld"
                    .into(),
            );
        }
        Verdict::Nonlocal
    } else {
        Verdict::None
    };

    let drift_tolerant = method == Method::Azuma;
    if drift_tolerant {
        notes.push(
            "martingale bound: the certified quantity is the time-averaged success \
             probability over the tested rounds"
                .into(),
        );
    }

    let s_lower = if record.game_name() == "chsh" {
        Some(8.0 * (effective - 0.5))
    } else {
        None
    };

    Ok(CertificateReport {
        game: record.game_name().to_string(),
        n,
        k,
        p_hat,
        method,
        alpha,
        epsilon,
        p_lower,
        p_upper,
        corrected_p_lower,
        readout: model.copied(),
        thresholds: Thresholds {
            omega_local: game_values.local,
            omega_quantum: game_values.quantum,
            quantum_is_exact: game_values.quantum_is_exact,
        },
        verdict,
        s_lower,
        drift_tolerant,
        notes,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::behaviors::{local_zeros, pr_box, success_probability, tsirelson_behavior};
    use crate::games::make_chsh;
    use crate::rng::CounterRng;
    use crate::transducer::{simulate, Variant};

    /// Independent oracle: upper binomial tail P[X >= k] by direct
    /// summation with a log-factorial table.
    fn binomial_upper_tail_with(ln_fact: &[f64], n: u64, k: u64, p: f64) -> f64 {
        if k == 0 {
            return 1.0;
        }
        let ln_p = p.ln();
        let ln_q = (-p).ln_1p();
        (k..=n)
            .map(|j| {
                let ln_term = ln_fact[n as usize] - ln_fact[j as usize] - ln_fact[(n - j) as usize]
                    + j as f64 * ln_p
                    + (n - j) as f64 * ln_q;
                ln_term.exp()
            })
            .sum()
    }

    fn ln_factorials(n: usize) -> Vec<f64> {
        let mut table = vec![0.0f64; n + 1];
        for i in 1..=n {
            table[i] = table[i - 1] + (i as f64).ln();
        }
        table
    }

    fn binomial_upper_tail(n: u64, k: u64, p: f64) -> f64 {
        binomial_upper_tail_with(&ln_factorials(n as usize), n, k, p)
    }

    #[test]
    fn hoeffding_radius_values() {
        let eps = hoeffding_epsilon(5000, 0.01).unwrap();
        assert_eq!(eps, (100.0f64.ln() / 10_000.0).sqrt());
        assert!((eps - 0.021459).abs() < 1e-6);
        let eps = hoeffding_epsilon(200_000, 0.01).unwrap();
        assert!((eps - 0.003393).abs() < 1e-6);
    }

    #[test]
    fn hoeffding_radius_is_monotone_in_alpha() {
        let loose = hoeffding_epsilon(1000, 0.05).unwrap();
        let tight = hoeffding_epsilon(1000, 0.01).unwrap();
        assert!(tight > loose);
        assert!(hoeffding_epsilon(0, 0.05).is_err());
        assert!(hoeffding_epsilon(10, 0.0).is_err());
        assert!(hoeffding_epsilon(10, 1.0).is_err());
    }

    #[test]
    fn azuma_matches_hoeffding_numerically() {
        let record = simulate(
            &make_chsh(),
            &tsirelson_behavior(),
            2000,
            5,
            Variant::Feedforward,
            1.0,
        )
        .unwrap();
        assert_eq!(
            azuma_lower_bound(&record, 0.01).unwrap(),
            hoeffding_lower_bound(&record, 0.01).unwrap()
        );
    }

    #[test]
    fn tiny_samples_clamp_to_zero() {
        let record = crate::transducer::WorkRecord::from_bits("chsh", 1.0, 0, [1u8]).unwrap();
        assert!(hoeffding_epsilon(1, 0.01).unwrap() >= 0.5);
        assert_eq!(azuma_lower_bound(&record, 0.01).unwrap(), 0.0);
    }

    #[test]
    fn constant_win_record_bound() {
        let record = simulate(
            &make_chsh(),
            &pr_box(),
            10_000,
            2,
            Variant::Feedforward,
            1.0,
        )
        .unwrap();
        let bound = hoeffding_lower_bound(&record, 0.01).unwrap();
        let eps = hoeffding_epsilon(10_000, 0.01).unwrap();
        assert_eq!(bound, 1.0 - eps);
    }

    #[test]
    fn clopper_pearson_endpoint_conventions() {
        for n in [1u64, 10, 100] {
            let i = clopper_pearson(0, n, 0.05, Sided::Two).unwrap();
            assert_eq!(i.lower, 0.0);
            let i = clopper_pearson(n, n, 0.05, Sided::Two).unwrap();
            assert_eq!(i.upper, 1.0);
        }
        assert!(clopper_pearson(5, 4, 0.05, Sided::One).is_err());
    }

    #[test]
    fn clopper_pearson_tail_equation() {
        let interval = clopper_pearson(85, 100, 0.05, Sided::One).unwrap();
        let tail = binomial_upper_tail(100, 85, interval.lower);
        assert!((tail - 0.05).abs() <= 1e-9, "tail {tail}");
    }

    #[test]
    fn clopper_pearson_matches_binomial_oracle_across_n() {
        // Full consistency sweep: every n up to 500, every k, both alphas.
        let ln_fact = ln_factorials(500);
        for alpha in [0.05, 0.01] {
            for n in 1..=500u64 {
                for k in 1..=n {
                    let interval = clopper_pearson(k, n, alpha, Sided::One).unwrap();
                    let tail = binomial_upper_tail_with(&ln_fact, n, k, interval.lower);
                    assert!(
                        (tail - alpha).abs() <= 1e-8,
                        "n={n} k={k} alpha={alpha}: tail {tail}"
                    );
                }
            }
        }
    }

    #[test]
    fn incomplete_beta_matches_binomial_tail_identity() {
        // P[X >= k] = I_p(k, n - k + 1) for X ~ Binomial(n, p).
        for (n, k, p) in [(50u64, 20u64, 0.3), (500, 400, 0.85), (10_000, 8500, 0.84)] {
            let direct = binomial_upper_tail(n, k, p);
            let via_beta = regularized_incomplete_beta(k as f64, (n - k + 1) as f64, p);
            assert!(
                (direct - via_beta).abs() <= 1e-9,
                "n={n} k={k}: {direct} vs {via_beta}"
            );
        }
    }

    #[test]
    fn clopper_pearson_two_sided_coverage() {
        // Empirical coverage over seeded binomial draws stays above
        // 1 - alpha minus 3 sigma of the estimate.
        let alpha = 0.05;
        let n = 200u64;
        let draws = 10_000;
        let slack = 3.0 * (alpha * (1.0 - alpha) / draws as f64).sqrt();
        for (stream, p) in [(0u64, 0.1), (1, 0.5), (2, 0.853553), (3, 0.99)] {
            let mut rng = CounterRng::for_stream(0xC0FFEE, stream);
            let mut covered = 0usize;
            for _ in 0..draws {
                let k = (0..n).filter(|_| rng.next_f64() < p).count() as u64;
                let interval = clopper_pearson(k, n, alpha, Sided::Two).unwrap();
                if interval.lower <= p && p <= interval.upper {
                    covered += 1;
                }
            }
            let coverage = covered as f64 / draws as f64;
            assert!(
                coverage >= 1.0 - alpha - slack,
                "p={p}: coverage {coverage}"
            );
        }
    }

    #[test]
    fn hoeffding_soundness_under_simulation() {
        let alpha = 0.05;
        let n = 1000u64;
        let draws = 10_000;
        let p = 0.853553;
        let slack = 3.0 * (alpha * (1.0 - alpha) / draws as f64).sqrt();
        let mut rng = CounterRng::for_stream(0xFEED, 0);
        let eps = hoeffding_epsilon(n, alpha).unwrap();
        let mut violations = 0usize;
        for _ in 0..draws {
            let k = (0..n).filter(|_| rng.next_f64() < p).count() as u64;
            let p_lower = (k as f64 / n as f64 - eps).max(0.0);
            if p_lower > p {
                violations += 1;
            }
        }
        let rate = violations as f64 / draws as f64;
        assert!(rate <= alpha + slack, "violation rate {rate}");
    }

    #[test]
    fn wilson_center_and_clamping() {
        let i = wilson(50, 100, 0.05).unwrap();
        let midpoint = 0.5 * (i.lower + i.upper);
        assert!((midpoint - 0.5).abs() <= 1e-12);

        let i = wilson(0, 10, 0.05).unwrap();
        assert_eq!(i.lower, 0.0);
        assert!(i.upper > 0.0);

        let i = wilson(10, 10, 0.05).unwrap();
        assert_eq!(i.upper, 1.0);
    }

    #[test]
    fn wilson_tightens_with_n() {
        let i = wilson(853_553, 1_000_000, 0.05).unwrap();
        assert!(i.upper - i.lower < 0.0015);
        let p_hat = 0.853553;
        assert!(p_hat - i.lower < 0.0008);
        assert!((0.5 * (i.lower + i.upper) - p_hat).abs() < 1e-4);
    }

    #[test]
    fn wilson_approaches_p_hat() {
        let narrow = wilson(500_000, 1_000_000, 0.05).unwrap();
        let wide = wilson(50, 100, 0.05).unwrap();
        assert!(narrow.upper - narrow.lower < wide.upper - wide.lower);
    }

    #[test]
    fn inverse_normal_accuracy() {
        // Spot values of Phi^-1 accurate to 1e-8.
        let cases = [
            (0.975, 1.959_963_984_540_054),
            (0.95, 1.644_853_626_951_472_7),
            (0.5, 0.0),
            (0.025, -1.959_963_984_540_054),
        ];
        for (p, expected) in cases {
            let z = inverse_normal_cdf(p).unwrap();
            assert!((z - expected).abs() < 1e-8, "p={p}: {z}");
        }
        assert!(inverse_normal_cdf(0.0).is_err());
        assert!(inverse_normal_cdf(1.0).is_err());
    }

    #[test]
    fn chsh_interval_is_affine() {
        let p = Interval {
            lower: 0.75,
            upper: 1.0,
        };
        let s = chsh_interval(p);
        assert_eq!(s.lower, 2.0);
        assert_eq!(s.upper, 4.0);

        let quantum = (PI / 8.0).cos().powi(2);
        let s = chsh_interval(Interval {
            lower: quantum,
            upper: quantum,
        });
        assert!((s.lower - 2.0 * std::f64::consts::SQRT_2).abs() <= 1e-12);

        let s = chsh_interval(Interval {
            lower: 0.5,
            upper: 0.5,
        });
        assert_eq!(s.lower, 0.0);

        // Round trip p -> S -> p at 1e-15.
        let p0: f64 = 0.8123456789;
        let s = 8.0 * (p0 - 0.5);
        let back = s / 8.0 + 0.5;
        assert!((back - p0).abs() <= 1e-15);
    }

    #[test]
    fn readout_inversion_round_trip() {
        let model = ReadoutModel::exact(0.05, 0.9).unwrap();
        for p in [0.0, 0.3, 0.853553, 1.0] {
            let observed = model.observe(p);
            let recovered = readout_invert(observed, &model, false).unwrap();
            assert!((recovered - p).abs() <= 1e-12, "p={p}: {recovered}");
        }
    }

    #[test]
    fn conservative_inversion_uses_upper_bounds() {
        let model = ReadoutModel::with_upper_bounds(0.0, 0.9, Some(0.05), None).unwrap();
        let p = readout_invert(0.9, &model, true).unwrap();
        assert!((p - (0.9 - 0.05) / 0.95).abs() <= 1e-12);

        // Truncation at zero signal.
        let p = readout_invert(0.04, &model, true).unwrap();
        assert_eq!(p, 0.0);
    }

    #[test]
    fn degenerate_calibration_is_rejected() {
        assert!(ReadoutModel::exact(0.5, 0.5).is_err());
        assert!(ReadoutModel::with_upper_bounds(0.1, 0.9, Some(0.95), Some(0.9)).is_err());
        let model = ReadoutModel::with_upper_bounds(0.1, 0.9, Some(1.0), None).unwrap();
        assert!(matches!(
            readout_invert(0.9, &model, true),
            Err(Error::DegenerateCalibration(_))
        ));
    }

    #[test]
    fn readout_inversion_monotonicity() {
        let base = readout_invert(
            0.9,
            &ReadoutModel::with_upper_bounds(0.0, 0.5, Some(0.05), Some(0.95)).unwrap(),
            true,
        )
        .unwrap();
        let higher_eta0 = readout_invert(
            0.9,
            &ReadoutModel::with_upper_bounds(0.0, 0.5, Some(0.10), Some(0.95)).unwrap(),
            true,
        )
        .unwrap();
        let higher_eta1 = readout_invert(
            0.9,
            &ReadoutModel::with_upper_bounds(0.0, 0.5, Some(0.05), Some(1.0)).unwrap(),
            true,
        )
        .unwrap();
        assert!(higher_eta0 <= base);
        assert!(higher_eta1 <= base);
    }

    #[test]
    fn flip_threshold_value() {
        let threshold = symmetric_flip_threshold();
        assert!((threshold - 0.146447).abs() < 1e-6);
        // A 10% flip keeps an ideal PR signal above the quantum ceiling,
        // a 20% flip does not.
        let quantum = (PI / 8.0).cos().powi(2);
        assert!(1.0 - 0.1 > quantum);
        assert!(1.0 - 0.2 < quantum);
    }

    #[test]
    fn certify_pr_record_is_post_quantum() {
        let game = make_chsh();
        let values = GameValues::compute(&game).unwrap();
        let record = simulate(&game, &pr_box(), 100_000, 3, Variant::Feedforward, 1.0).unwrap();
        let report = certify(&record, &values, Method::Hoeffding, 0.01, None).unwrap();
        assert_eq!(report.verdict, Verdict::PostQuantum);
        assert_eq!(report.p_hat, 1.0);
        assert!(report.s_lower.unwrap() > 2.0 * std::f64::consts::SQRT_2);
        assert!(!report.drift_tolerant);
    }

    #[test]
    fn certify_local_record_gets_no_verdict() {
        let game = make_chsh();
        let values = GameValues::compute(&game).unwrap();
        let record = simulate(
            &game,
            &local_zeros(&game),
            100_000,
            4,
            Variant::Feedforward,
            1.0,
        )
        .unwrap();
        let report = certify(&record, &values, Method::Hoeffding, 0.01, None).unwrap();
        assert_eq!(report.verdict, Verdict::None);
        assert!(report.p_lower < 0.75);
    }

    #[test]
    fn certify_tsirelson_record_rarely_exceeds_quantum() {
        let game = make_chsh();
        let values = GameValues::compute(&game).unwrap();
        let p = success_probability(&game, &tsirelson_behavior()).unwrap();
        let mut false_post_quantum = 0;
        for seed in 0..20 {
            let record = simulate(
                &game,
                &tsirelson_behavior(),
                20_000,
                seed,
                Variant::Feedforward,
                1.0,
            )
            .unwrap();
            let report = certify(&record, &values, Method::Hoeffding, 0.01, None).unwrap();
            if report.verdict == Verdict::PostQuantum {
                false_post_quantum += 1;
            }
            assert!(report.p_lower <= p + 0.05);
        }
        assert_eq!(false_post_quantum, 0);
    }

    #[test]
    fn certify_without_exact_quantum_caps_verdict() {
        let game = make_chsh();
        // Same thresholds, but flagged as a non-exact lower bound.
        let values = GameValues::new(0.75, 0.8535, false, 1.0).unwrap();
        let record = simulate(&game, &pr_box(), 10_000, 1, Variant::Feedforward, 1.0).unwrap();
        let report = certify(&record, &values, Method::Hoeffding, 0.01, None).unwrap();
        assert_eq!(report.verdict, Verdict::Nonlocal);
        assert!(!report.notes.is_empty());
    }

    #[test]
    fn certify_with_azuma_tags_drift_tolerance() {
        let game = make_chsh();
        let values = GameValues::compute(&game).unwrap();
        let record = simulate(&game, &pr_box(), 10_000, 1, Variant::Feedforward, 1.0).unwrap();
        let report = certify(&record, &values, Method::Azuma, 0.01, None).unwrap();
        assert!(report.drift_tolerant);
        assert!(report.notes.iter().any(|n| n.contains("time-averaged")));
        let hoeffding = certify(&record, &values, Method::Hoeffding, 0.01, None).unwrap();
        assert_eq!(report.p_lower, hoeffding.p_lower);
    }

    #[test]
    fn certify_clopper_pearson_is_tighter_at_full_wins() {
        let game = make_chsh();
        let values = GameValues::compute(&game).unwrap();
        let record = simulate(&game, &pr_box(), 100_000, 9, Variant::Feedforward, 1.0).unwrap();
        let hoeffding = certify(&record, &values, Method::Hoeffding, 0.01, None).unwrap();
        let cp = certify(&record, &values, Method::ClopperPearson, 0.01, None).unwrap();
        assert!(cp.p_lower >= hoeffding.p_lower);
        assert_eq!(cp.verdict, Verdict::PostQuantum);
    }

    #[test]
    fn certify_applies_conservative_readout() {
        let game = make_chsh();
        let values = GameValues::compute(&game).unwrap();
        let record = simulate(&game, &pr_box(), 100_000, 5, Variant::Feedforward, 1.0).unwrap();
        let model = ReadoutModel::with_upper_bounds(0.0, 0.99, Some(0.02), None).unwrap();
        let report = certify(&record, &values, Method::Hoeffding, 0.01, Some(&model)).unwrap();
        let corrected = report.corrected_p_lower.unwrap();
        assert!(corrected < report.p_lower);
        assert_eq!(report.verdict, Verdict::PostQuantum);
        let round_trip: CertificateReport =
            serde_json::from_str(&serde_json::to_string(&report).unwrap()).unwrap();
        assert_eq!(round_trip.verdict, report.verdict);
    }
}
