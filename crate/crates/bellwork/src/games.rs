//! Finite two-player XOR games and their resource-class values.
//!
//! A game fixes question sets for Alice and Bob, a probability weight for
//! each asked question pair, and a binary predicate the XOR of the answers
//! must hit. `local_value` enumerates every deterministic strategy,
//! `ns_value` is the algebraic cap, and the quantum value comes either from
//! a closed form (CHSH and the chained family) or from an alternating
//! unit-vector ascent that lower-bounds it.

use std::collections::BTreeMap;
use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::rng::CounterRng;

pub type Question = u32;

/// Tolerance on the question-weight sum at construction.
pub const WEIGHT_SUM_TOL: f64 = 1e-12;
/// Looser tolerance applied by the JSON loader before renormalizing.
pub const LOADER_WEIGHT_SUM_TOL: f64 = 1e-9;
/// Default cap on |U| + |V| for deterministic-strategy enumeration.
pub const DEFAULT_ENUMERATION_CAP: usize = 26;
/// Default restart count for the quantum ascent.
pub const DEFAULT_RESTARTS: usize = 32;
/// Default convergence tolerance for the quantum ascent.
pub const DEFAULT_ASCENT_TOL: f64 = 1e-12;
/// Sweep budget for one ascent run.
const MAX_ASCENT_SWEEPS: usize = 10_000;

#[derive(Debug, Clone, PartialEq)]
pub struct XorGame {
    name: String,
    alice_questions: Vec<Question>,
    bob_questions: Vec<Question>,
    weights: BTreeMap<(Question, Question), f64>,
    predicate: BTreeMap<(Question, Question), u8>,
}

impl XorGame {
    /// Build and validate a game. Question sets are deduplicated and kept
    /// sorted; the predicate must cover every pair with positive weight.
    pub fn new(
        name: impl Into<String>,
        alice_questions: Vec<Question>,
        bob_questions: Vec<Question>,
        weights: BTreeMap<(Question, Question), f64>,
        predicate: BTreeMap<(Question, Question), u8>,
    ) -> Result<Self> {
        let mut alice_questions = alice_questions;
        let mut bob_questions = bob_questions;
        alice_questions.sort_unstable();
        alice_questions.dedup();
        bob_questions.sort_unstable();
        bob_questions.dedup();
        if alice_questions.is_empty() || bob_questions.is_empty() {
            return Err(Error::InvalidParameter(
                "question sets must be nonempty".into(),
            ));
        }

        let mut sum = 0.0;
        for (&(u, v), &w) in &weights {
            if !alice_questions.contains(&u) || !bob_questions.contains(&v) {
                return Err(Error::InvalidParameter(format!(
                    "weight on ({u},{v}) outside the question sets"
                )));
            }
            if !w.is_finite() || w < 0.0 {
                return Err(Error::InvalidParameter(format!(
                    "weight on ({u},{v}) is negative or NaN: {w}"
                )));
            }
            sum += w;
        }
        if (sum - 1.0).abs() > WEIGHT_SUM_TOL {
            return Err(Error::InvalidParameter(format!(
                "question weights sum to {sum}, expected 1"
            )));
        }

        for (&(u, v), &f) in &predicate {
            if f > 1 {
                return Err(Error::InvalidParameter(format!(
                    "predicate on ({u},{v}) must be 0 or 1, got {f}"
                )));
            }
            if !alice_questions.contains(&u) || !bob_questions.contains(&v) {
                return Err(Error::InvalidParameter(format!(
                    "predicate on ({u},{v}) outside the question sets"
                )));
            }
        }
        for (&(u, v), &w) in &weights {
            if w > 0.0 && !predicate.contains_key(&(u, v)) {
                return Err(Error::InvalidParameter(format!(
                    "predicate undefined on supported pair ({u},{v})"
                )));
            }
        }

        Ok(Self {
            name: name.into(),
            alice_questions,
            bob_questions,
            weights,
            predicate,
        })
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn alice_questions(&self) -> &[Question] {
        &self.alice_questions
    }

    pub fn bob_questions(&self) -> &[Question] {
        &self.bob_questions
    }

    pub fn weight(&self, u: Question, v: Question) -> f64 {
        self.weights.get(&(u, v)).copied().unwrap_or(0.0)
    }

    pub fn predicate_bit(&self, u: Question, v: Question) -> Option<u8> {
        self.predicate.get(&(u, v)).copied()
    }

    /// Question pairs with positive weight, with their weight and predicate
    /// bit, in lexicographic order.
    pub fn support(&self) -> impl Iterator<Item = ((Question, Question), f64, u8)> + '_ {
        self.weights
            .iter()
            .filter(|&(_, &w)| w > 0.0)
            .map(move |(&(u, v), &w)| ((u, v), w, self.predicate[&(u, v)]))
    }

    /// Parse the spec form documented for the loader:
    /// `{ "name", "alice_questions", "bob_questions", "weights", "predicate" }`.
    /// Duplicate pairs are rejected; weights may sum anywhere in
    /// [1 - 1e-9, 1 + 1e-9] and are renormalized to sum to one.
    pub fn from_json(text: &str) -> Result<Self> {
        let raw: GameJson = serde_json::from_str(text)?;
        let mut weights = BTreeMap::new();
        let mut sum = 0.0;
        for row in &raw.weights {
            if weights.insert((row.u, row.v), row.p).is_some() {
                return Err(Error::Parse(format!(
                    "duplicate weight pair ({},{})",
                    row.u, row.v
                )));
            }
            if !row.p.is_finite() || row.p < 0.0 {
                return Err(Error::Parse(format!(
                    "weight on ({},{}) is negative or NaN",
                    row.u, row.v
                )));
            }
            sum += row.p;
        }
        if (sum - 1.0).abs() > LOADER_WEIGHT_SUM_TOL {
            return Err(Error::Parse(format!(
                "weights sum to {sum}, outside [1-1e-9, 1+1e-9]"
            )));
        }
        for w in weights.values_mut() {
            *w /= sum;
        }
        let mut predicate = BTreeMap::new();
        for row in &raw.predicate {
            if predicate.insert((row.u, row.v), row.f).is_some() {
                return Err(Error::Parse(format!(
                    "duplicate predicate pair ({},{})",
                    row.u, row.v
                )));
            }
        }
        Self::new(
            raw.name,
            raw.alice_questions,
            raw.bob_questions,
            weights,
            predicate,
        )
    }
}

#[derive(Serialize, Deserialize)]
struct GameJson {
    name: String,
    alice_questions: Vec<Question>,
    bob_questions: Vec<Question>,
    weights: Vec<WeightRow>,
    predicate: Vec<PredicateRow>,
}

#[derive(Serialize, Deserialize)]
struct WeightRow {
    u: Question,
    v: Question,
    p: f64,
}

#[derive(Serialize, Deserialize)]
struct PredicateRow {
    u: Question,
    v: Question,
    f: u8,
}

/// The CHSH game: uniform questions on {0,1} x {0,1}, win iff a XOR b = u*v.
pub fn make_chsh() -> XorGame {
    let mut weights = BTreeMap::new();
    let mut predicate = BTreeMap::new();
    for u in 0..2u32 {
        for v in 0..2u32 {
            weights.insert((u, v), 0.25);
            predicate.insert((u, v), (u & v) as u8);
        }
    }
    XorGame::new("chsh", vec![0, 1], vec![0, 1], weights, predicate)
        .expect("CHSH construction is always valid")
}

/// The N-cycle chained game: 2N uniformly weighted edges, all requiring
/// equal outputs except the wrap-around edge (0, N-1).
pub fn make_chained(n: u32) -> Result<XorGame> {
    if n < 2 {
        return Err(Error::InvalidParameter(format!(
            "chained game needs N >= 2, got {n}"
        )));
    }
    let questions: Vec<Question> = (0..n).collect();
    let w = 1.0 / (2.0 * n as f64);
    let mut weights = BTreeMap::new();
    let mut predicate = BTreeMap::new();
    for j in 0..n {
        weights.insert((j, j), w);
        predicate.insert((j, j), 0);
        let next = (j + 1) % n;
        weights.insert((next, j), w);
        predicate.insert((next, j), if j == n - 1 { 1 } else { 0 });
    }
    XorGame::new(
        format!("chained:{n}"),
        questions.clone(),
        questions,
        weights,
        predicate,
    )
}

enum Family {
    Chsh,
    Chained(u32),
}

fn parse_family(name: &str) -> Option<Family> {
    if name == "chsh" {
        return Some(Family::Chsh);
    }
    let n = name.strip_prefix("chained:")?.parse::<u32>().ok()?;
    if n >= 2 {
        Some(Family::Chained(n))
    } else {
        None
    }
}

/// Best deterministic strategy found by exhaustive enumeration.
#[derive(Debug, Clone)]
pub struct LocalStrategy {
    pub value: f64,
    /// Answer bit per Alice question, in sorted question order.
    pub alice_bits: Vec<u8>,
    /// Answer bit per Bob question, in sorted question order.
    pub bob_bits: Vec<u8>,
}

/// Exact local value by enumeration of all 2^(|U|+|V|) deterministic
/// assignments, under the default size cap.
pub fn local_value(game: &XorGame) -> Result<f64> {
    local_value_capped(game, DEFAULT_ENUMERATION_CAP).map(|s| s.value)
}

/// Enumeration with an explicit cap on |U| + |V|. Alice masks vary in the
/// outer loop and Bob masks in the inner loop, bit i addressing the i-th
/// sorted question; the first optimum in that order is reported.
pub fn local_value_capped(game: &XorGame, cap: usize) -> Result<LocalStrategy> {
    let na = game.alice_questions().len();
    let nb = game.bob_questions().len();
    if na + nb > cap {
        return Err(Error::SizeLimit(format!(
            "|U|+|V| = {} exceeds enumeration cap {cap}",
            na + nb
        )));
    }
    let a_index: BTreeMap<Question, usize> = game
        .alice_questions()
        .iter()
        .enumerate()
        .map(|(i, &q)| (q, i))
        .collect();
    let b_index: BTreeMap<Question, usize> = game
        .bob_questions()
        .iter()
        .enumerate()
        .map(|(i, &q)| (q, i))
        .collect();
    let support: Vec<(usize, usize, f64, u8)> = game
        .support()
        .map(|((u, v), w, f)| (a_index[&u], b_index[&v], w, f))
        .collect();

    let mut best_loss = f64::INFINITY;
    let mut best = (0u64, 0u64);
    for a_mask in 0..(1u64 << na) {
        for b_mask in 0..(1u64 << nb) {
            // Accumulate the lost weight rather than the won weight: the
            // optimum then comes out as 1 - (lost mass), which reproduces
            // closed forms like 1 - 1/(2N) without summation error.
            let mut loss = 0.0;
            for &(ia, ib, w, f) in &support {
                let a = ((a_mask >> ia) & 1) as u8;
                let b = ((b_mask >> ib) & 1) as u8;
                if a ^ b != f {
                    loss += w;
                }
            }
            if loss < best_loss {
                best_loss = loss;
                best = (a_mask, b_mask);
            }
        }
    }

    let alice_bits = (0..na).map(|i| ((best.0 >> i) & 1) as u8).collect();
    let bob_bits = (0..nb).map(|i| ((best.1 >> i) & 1) as u8).collect();
    Ok(LocalStrategy {
        value: 1.0 - best_loss,
        alice_bits,
        bob_bits,
    })
}

/// Nonsignalling value of any XOR game. A box answering each asked pair
/// with the two winning output pairs at probability 1/2 each wins always
/// and has uniform marginals; see `behaviors::perfect_ns_box` for the
/// constructive witness.
pub fn ns_value(game: &XorGame) -> f64 {
    let _ = game;
    1.0
}

/// Closed-form quantum value for games tagged as CHSH or chained:N.
/// Returns `None` for untagged games.
pub fn quantum_value_closed(game: &XorGame) -> Option<f64> {
    match parse_family(game.name())? {
        Family::Chsh => Some((PI / 8.0).cos().powi(2)),
        Family::Chained(n) => Some((PI / (4.0 * n as f64)).cos().powi(2)),
    }
}

/// Result of the alternating unit-vector ascent.
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct QuantumLowerBound {
    pub value: f64,
    /// False when the best run hit the sweep budget before the bias
    /// improvement dropped below tolerance.
    pub converged: bool,
}

/// Lower-bound the quantum value by maximizing the bias
/// sum_(u,v) pi(u,v) (-1)^f(u,v) <a_u, b_v> over unit vectors of dimension
/// min(|U|, |V|), with alternating closed-form updates. Half the restarts
/// embed deterministic strategies as +-1 scalars (the enumerated argmax
/// first, so the result is never below the local value); the other half
/// start from seeded random unit vectors.
pub fn quantum_value_lower(game: &XorGame, restarts: usize, tol: f64) -> Result<QuantumLowerBound> {
    if restarts < 1 {
        return Err(Error::InvalidParameter("restarts must be >= 1".into()));
    }
    if !tol.is_finite() || tol <= 0.0 {
        return Err(Error::InvalidParameter(format!(
            "tolerance must be positive, got {tol}"
        )));
    }

    let na = game.alice_questions().len();
    let nb = game.bob_questions().len();
    let dim = na.min(nb);
    let a_index: BTreeMap<Question, usize> = game
        .alice_questions()
        .iter()
        .enumerate()
        .map(|(i, &q)| (q, i))
        .collect();
    let b_index: BTreeMap<Question, usize> = game
        .bob_questions()
        .iter()
        .enumerate()
        .map(|(i, &q)| (q, i))
        .collect();
    let mut cost = vec![vec![0.0f64; nb]; na];
    for ((u, v), w, f) in game.support() {
        cost[a_index[&u]][b_index[&v]] = if f == 0 { w } else { -w };
    }

    let det_count = (restarts / 2).max(1);
    let random_count = restarts - det_count;

    let mut starts: Vec<(u64, u64)> = Vec::new();
    if na + nb <= 63 {
        if let Ok(strategy) = local_value_capped(game, DEFAULT_ENUMERATION_CAP) {
            let a_mask = strategy
                .alice_bits
                .iter()
                .enumerate()
                .fold(0u64, |m, (i, &b)| m | ((b as u64) << i));
            let b_mask = strategy
                .bob_bits
                .iter()
                .enumerate()
                .fold(0u64, |m, (i, &b)| m | ((b as u64) << i));
            starts.push((a_mask, b_mask));
        }
        let total = 1u64 << (na + nb);
        let mut idx = 0u64;
        while starts.len() < det_count && idx < total {
            let candidate = (idx >> nb, idx & ((1 << nb) - 1));
            if !starts.contains(&candidate) {
                starts.push(candidate);
            }
            idx += 1;
        }
    } else {
        starts.push((0, 0));
    }

    let mut best_bias = f64::NEG_INFINITY;
    let mut best_converged = true;

    let embed = |mask: u64, count: usize| -> Vec<Vec<f64>> {
        (0..count)
            .map(|i| {
                let bit = if i < 64 { (mask >> i) & 1 } else { 0 };
                let mut v = vec![0.0; dim];
                v[0] = if bit == 1 { -1.0 } else { 1.0 };
                v
            })
            .collect()
    };

    for &(a_mask, b_mask) in &starts {
        let mut a = embed(a_mask, na);
        let mut b = embed(b_mask, nb);
        let (bias, converged) = ascend(&cost, &mut a, &mut b, tol);
        if bias > best_bias {
            best_bias = bias;
            best_converged = converged;
        }
    }

    for restart in 0..random_count {
        let mut rng = CounterRng::for_stream(0x4245_4C4C, restart as u64);
        let mut a = random_units(&mut rng, na, dim);
        let mut b = random_units(&mut rng, nb, dim);
        let (bias, converged) = ascend(&cost, &mut a, &mut b, tol);
        if bias > best_bias {
            best_bias = bias;
            best_converged = converged;
        }
    }

    Ok(QuantumLowerBound {
        value: 0.5 + 0.5 * best_bias,
        converged: best_converged,
    })
}

fn random_units(rng: &mut CounterRng, count: usize, dim: usize) -> Vec<Vec<f64>> {
    (0..count)
        .map(|_| loop {
            let v: Vec<f64> = (0..dim).map(|_| rng.next_gaussian()).collect();
            if let Some(unit) = normalize(v) {
                return unit;
            }
        })
        .collect()
}

fn normalize(v: Vec<f64>) -> Option<Vec<f64>> {
    let norm = v.iter().map(|x| x * x).sum::<f64>().sqrt();
    if norm > 1e-300 {
        Some(v.into_iter().map(|x| x / norm).collect())
    } else {
        None
    }
}

fn bias_of(cost: &[Vec<f64>], a: &[Vec<f64>], b: &[Vec<f64>]) -> f64 {
    let mut bias = 0.0;
    for (ia, row) in cost.iter().enumerate() {
        for (ib, &c) in row.iter().enumerate() {
            if c != 0.0 {
                bias += c * dot(&a[ia], &b[ib]);
            }
        }
    }
    bias
}

fn dot(x: &[f64], y: &[f64]) -> f64 {
    x.iter().zip(y).map(|(a, b)| a * b).sum()
}

/// One ascent run: alternately set each vector to the normalized weighted
/// sum of the other side. Each half-sweep maximizes the bias over that
/// side, so the bias never decreases.
fn ascend(cost: &[Vec<f64>], a: &mut [Vec<f64>], b: &mut [Vec<f64>], tol: f64) -> (f64, bool) {
    let na = a.len();
    let nb = b.len();
    let dim = a[0].len();
    let mut bias = bias_of(cost, a, b);
    for _ in 0..MAX_ASCENT_SWEEPS {
        for ia in 0..na {
            let mut acc = vec![0.0; dim];
            for ib in 0..nb {
                let c = cost[ia][ib];
                if c != 0.0 {
                    for (k, acc_k) in acc.iter_mut().enumerate() {
                        *acc_k += c * b[ib][k];
                    }
                }
            }
            if let Some(unit) = normalize(acc) {
                a[ia] = unit;
            }
        }
        for ib in 0..nb {
            let mut acc = vec![0.0; dim];
            for (ia, a_vec) in a.iter().enumerate() {
                let c = cost[ia][ib];
                if c != 0.0 {
                    for (k, acc_k) in acc.iter_mut().enumerate() {
                        *acc_k += c * a_vec[k];
                    }
                }
            }
            if let Some(unit) = normalize(acc) {
                b[ib] = unit;
            }
        }
        let next = bias_of(cost, a, b);
        let improvement = next - bias;
        bias = next;
        if improvement < tol {
            return (bias, true);
        }
    }
    (bias, false)
}

/// Local, quantum, and nonsignalling values for one game.
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct GameValues {
    pub local: f64,
    pub quantum: f64,
    /// True when `quantum` is a closed form rather than an ascent lower bound.
    pub quantum_is_exact: bool,
    pub nonsignalling: f64,
    /// True when the three values have been multiplied through by delta.
    pub delta_units: bool,
}

impl GameValues {
    pub fn new(
        local: f64,
        quantum: f64,
        quantum_is_exact: bool,
        nonsignalling: f64,
    ) -> Result<Self> {
        const ORDER_TOL: f64 = 1e-9;
        if !(0.0..=1.0 + ORDER_TOL).contains(&local) {
            return Err(Error::InvalidParameter(format!(
                "local value {local} outside [0,1]"
            )));
        }
        if local > quantum + ORDER_TOL {
            return Err(Error::InvalidParameter(format!(
                "local value {local} exceeds quantum value {quantum}"
            )));
        }
        if quantum_is_exact
            && (quantum > nonsignalling + ORDER_TOL || nonsignalling > 1.0 + ORDER_TOL)
        {
            return Err(Error::InvalidParameter(format!(
                "value ordering violated: quantum {quantum}, nonsignalling {nonsignalling}"
            )));
        }
        Ok(Self {
            local,
            quantum,
            quantum_is_exact,
            nonsignalling,
            delta_units: false,
        })
    }

    /// Compute all three values, preferring the closed-form quantum value
    /// and falling back to the ascent lower bound.
    pub fn compute(game: &XorGame) -> Result<Self> {
        let local = local_value(game)?;
        let (quantum, exact) = match quantum_value_closed(game) {
            Some(q) => (q, true),
            None => (
                quantum_value_lower(game, DEFAULT_RESTARTS, DEFAULT_ASCENT_TOL)?.value,
                false,
            ),
        };
        Self::new(local, quantum, exact, ns_value(game))
    }

    /// The same values as battery ceilings, in absolute energy units.
    pub fn scaled_by(mut self, delta: f64) -> Self {
        self.local *= delta;
        self.quantum *= delta;
        self.nonsignalling *= delta;
        self.delta_units = true;
        self
    }
}
