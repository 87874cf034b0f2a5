//! Derived analyses: convex-content bounds, CHSH battery monogamy, and the
//! parameter sweeps behind the standard curves and thresholds.

use std::f64::consts::{PI, SQRT_2};

use serde::{Deserialize, Serialize};

use crate::behaviors::{
    chsh_value, marginalize, noisy_pr, Behavior, MarginalPair, TripartiteBehavior,
};
use crate::error::{Error, Result};
use crate::games::{local_value, make_chained, make_chsh, quantum_value_closed};
use crate::transducer::exact_work_mean;

/// Absolute slack on the monogamy bound check.
pub const MONOGAMY_TOL: f64 = 1e-10;

/// Lower bound on the weight of the stronger class D in any convex
/// decomposition of a behaviour over classes C within D.
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct ContentBound {
    pub p: f64,
    pub omega_c: f64,
    pub omega_d: f64,
    pub q_lower: f64,
}

/// q >= (p - omega_C) / (omega_D - omega_C), clamped to [0, 1].
pub fn content_bound(p: f64, omega_c: f64, omega_d: f64) -> Result<ContentBound> {
    for (label, value) in [("p", p), ("omega_C", omega_c), ("omega_D", omega_d)] {
        if !(0.0..=1.0).contains(&value) {
            return Err(Error::InvalidParameter(format!(
                "{label} = {value} outside [0,1]"
            )));
        }
    }
    if omega_d <= omega_c {
        return Err(Error::InvalidParameter(format!(
            "class values must satisfy omega_D > omega_C, got {omega_d} <= {omega_c}"
        )));
    }
    Ok(ContentBound {
        p,
        omega_c,
        omega_d,
        q_lower: ((p - omega_c) / (omega_d - omega_c)).clamp(0.0, 1.0),
    })
}

/// Battery-units form: accepts the mean banked work and divides out delta.
pub fn content_bound_from_work(
    mean_work: f64,
    delta: f64,
    omega_c: f64,
    omega_d: f64,
) -> Result<ContentBound> {
    if !delta.is_finite() || delta <= 0.0 {
        return Err(Error::InvalidParameter(format!(
            "delta must be positive, got {delta}"
        )));
    }
    content_bound(mean_work / delta, omega_c, omega_d)
}

/// Nonlocal and post-quantum content bounds from a CHSH value.
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct ChshContents {
    pub s: f64,
    /// q_NL >= (S - 2) / 2.
    pub q_nonlocal_lower: f64,
    /// q_postQ >= (S - 2 sqrt 2) / (4 - 2 sqrt 2).
    pub q_post_quantum_lower: f64,
}

pub fn chsh_contents(s: f64) -> Result<ChshContents> {
    if s.is_nan() || s.abs() > 4.0 + 1e-12 {
        return Err(Error::InvalidParameter(format!(
            "CHSH value {s} outside [-4, 4]"
        )));
    }
    let tsirelson = 2.0 * SQRT_2;
    Ok(ChshContents {
        s,
        q_nonlocal_lower: ((s - 2.0) / 2.0).clamp(0.0, 1.0),
        q_post_quantum_lower: ((s - tsirelson) / (4.0 - tsirelson)).clamp(0.0, 1.0),
    })
}

/// Battery monogamy across the AB and AC marginals of a tripartite
/// behaviour: the two mean charges cannot exceed 1.5 delta combined.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct MonogamyReport {
    pub s_ab: f64,
    pub s_ac: f64,
    pub w_ab: f64,
    pub w_ac: f64,
    pub sum_w: f64,
    /// 1.5 delta.
    pub bound: f64,
    pub satisfied: bool,
    pub delta: f64,
    /// True when the E11 term of the respective pair was added rather
    /// than subtracted (exploratory orientation option, default off).
    pub flipped_ab: bool,
    pub flipped_ac: bool,
}

/// Default orientation: the same S = E00 + E01 + E10 - E11 expression on
/// both marginals, inputs as labeled.
pub fn monogamy_check(t: &TripartiteBehavior, delta: f64) -> Result<MonogamyReport> {
    monogamy_check_oriented(t, delta, false, false)
}

/// Orientation-exploring variant: flipping a pair negates its E11 term.
pub fn monogamy_check_oriented(
    t: &TripartiteBehavior,
    delta: f64,
    flip_ab: bool,
    flip_ac: bool,
) -> Result<MonogamyReport> {
    if !delta.is_finite() || delta <= 0.0 {
        return Err(Error::InvalidParameter(format!(
            "delta must be positive, got {delta}"
        )));
    }
    let ab = marginalize(t, MarginalPair::Ab)?;
    let ac = marginalize(t, MarginalPair::Ac)?;
    let s_ab = oriented_chsh(&ab, flip_ab)?;
    let s_ac = oriented_chsh(&ac, flip_ac)?;
    let w_ab = delta * (0.5 + s_ab / 8.0);
    let w_ac = delta * (0.5 + s_ac / 8.0);
    let sum_w = w_ab + w_ac;
    let bound = 1.5 * delta;
    Ok(MonogamyReport {
        s_ab,
        s_ac,
        w_ab,
        w_ac,
        sum_w,
        bound,
        satisfied: sum_w <= bound + MONOGAMY_TOL,
        delta,
        flipped_ab: flip_ab,
        flipped_ac: flip_ac,
    })
}

fn oriented_chsh(behavior: &Behavior, flip_e11: bool) -> Result<f64> {
    if !flip_e11 {
        return chsh_value(behavior);
    }
    let e = |u, v| {
        behavior
            .correlator(u, v)
            .ok_or_else(|| Error::InvalidParameter(format!("missing correlator ({u},{v})")))
    };
    Ok(((e(0, 0)? + e(0, 1)?) + e(1, 0)?) + e(1, 1)?)
}

/// One row of the noisy-PR sweep.
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct NoiseSweepRow {
    pub eps: f64,
    pub s: f64,
    pub work_over_delta: f64,
    /// Strictly above the quantum ceiling 2 sqrt 2.
    pub above_quantum: bool,
}

/// Sweep the mixture (1 - eps) PR + eps local over the grid. The work
/// column is the enumeration oracle's mean, not the affine shortcut.
pub fn sweep_noise(eps_grid: &[f64]) -> Result<Vec<NoiseSweepRow>> {
    let game = make_chsh();
    let quantum_ceiling = 2.0 * SQRT_2;
    let mut rows = Vec::with_capacity(eps_grid.len());
    for &eps in eps_grid {
        let behavior = noisy_pr(eps)?;
        let s = chsh_value(&behavior)?;
        let work_over_delta = exact_work_mean(&game, &behavior, 1.0)?;
        rows.push(NoiseSweepRow {
            eps,
            s,
            work_over_delta,
            above_quantum: s > quantum_ceiling,
        });
    }
    Ok(rows)
}

/// One row of the chained-family sweep.
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct ChainedSweepRow {
    pub n: u32,
    /// From strategy enumeration, not the closed form.
    pub omega_l: f64,
    pub omega_q: f64,
    /// Quantum-to-nonsignalling gap sin^2(pi / (4N)).
    pub gap: f64,
    /// Leading term pi^2 / (16 N^2).
    pub leading_term: f64,
}

pub fn sweep_chained(n_grid: &[u32]) -> Result<Vec<ChainedSweepRow>> {
    let mut rows = Vec::with_capacity(n_grid.len());
    for &n in n_grid {
        let game = make_chained(n)?;
        let omega_l = local_value(&game)?;
        let omega_q = quantum_value_closed(&game).expect("chained games have a closed form");
        let angle = PI / (4.0 * n as f64);
        rows.push(ChainedSweepRow {
            n,
            omega_l,
            omega_q,
            gap: angle.sin().powi(2),
            leading_term: PI * PI / (16.0 * (n as f64) * (n as f64)),
        });
    }
    Ok(rows)
}

/// 12 significant digits, enough to resolve thresholds like 2 - sqrt 2
/// well past every tolerance used here.
fn fmt12(x: f64) -> String {
    format!("{x:.11e}")
}

pub fn noise_rows_to_csv(rows: &[NoiseSweepRow]) -> String {
    let mut out = String::from("eps,S,work_over_delta,above_quantum\n");
    for row in rows {
        out.push_str(&format!(
            "{},{},{},{}\n",
            fmt12(row.eps),
            fmt12(row.s),
            fmt12(row.work_over_delta),
            row.above_quantum
        ));
    }
    out
}

pub fn chained_rows_to_csv(rows: &[ChainedSweepRow]) -> String {
    let mut out = String::from("N,omega_L,omega_Q,gap,leading_term\n");
    for row in rows {
        out.push_str(&format!(
            "{},{},{},{},{}\n",
            row.n,
            fmt12(row.omega_l),
            fmt12(row.omega_q),
            fmt12(row.gap),
            fmt12(row.leading_term)
        ));
    }
    out
}
