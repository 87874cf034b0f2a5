//! Bipartite and tripartite behaviours P(a,b|u,v).
//!
//! Behaviours are immutable conditional-probability tables over binary
//! outputs. Constructors cover the standard boxes (PR, perfect
//! nonsignalling, deterministic local, correlator-built, convex mixtures)
//! and evaluation is limited to success probabilities and CHSH values; no
//! state or measurement model is assumed.

use std::collections::BTreeMap;
use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::games::{make_chsh, Question, XorGame};

/// Per-setting normalization tolerance.
pub const ROW_SUM_TOL: f64 = 1e-12;
/// Entries in [-1e-12, 0) are clamped to zero and the row renormalized;
/// anything more negative fails validation.
pub const NEGATIVE_CLAMP_TOL: f64 = 1e-12;
/// Tolerance for nonsignalling marginal checks.
pub const NONSIGNALLING_TOL: f64 = 1e-10;
/// Tolerance on correlator magnitudes.
pub const CORRELATOR_TOL: f64 = 1e-12;

/// Outcome index inside a row: a*2 + b.
#[inline]
fn idx(a: u8, b: u8) -> usize {
    (a * 2 + b) as usize
}

fn sanitize_row(mut row: [f64; 4], label: &str) -> Result<[f64; 4]> {
    let mut clamped = false;
    for p in &mut row {
        if !p.is_finite() {
            return Err(Error::InvalidParameter(format!(
                "non-finite probability at {label}"
            )));
        }
        if *p < 0.0 {
            if *p >= -NEGATIVE_CLAMP_TOL {
                *p = 0.0;
                clamped = true;
            } else {
                return Err(Error::InvalidParameter(format!(
                    "negative probability {p} at {label}"
                )));
            }
        }
    }
    let sum: f64 = row.iter().sum();
    if (sum - 1.0).abs() > ROW_SUM_TOL + 4.0 * NEGATIVE_CLAMP_TOL {
        return Err(Error::InvalidParameter(format!(
            "probabilities at {label} sum to {sum}, expected 1"
        )));
    }
    if clamped {
        for p in &mut row {
            *p /= sum;
        }
    }
    Ok(row)
}

#[derive(Debug, Clone, PartialEq)]
pub struct Behavior {
    alice_questions: Vec<Question>,
    bob_questions: Vec<Question>,
    table: BTreeMap<(Question, Question), [f64; 4]>,
}

impl Behavior {
    /// Build and validate a behaviour. The table must cover the full
    /// question grid; each row is a distribution over (a, b).
    pub fn new(
        alice_questions: Vec<Question>,
        bob_questions: Vec<Question>,
        table: BTreeMap<(Question, Question), [f64; 4]>,
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
        let mut sanitized = BTreeMap::new();
        for &u in &alice_questions {
            for &v in &bob_questions {
                let row = table.get(&(u, v)).ok_or_else(|| {
                    Error::InvalidParameter(format!("behaviour table missing setting ({u},{v})"))
                })?;
                sanitized.insert((u, v), sanitize_row(*row, &format!("setting ({u},{v})"))?);
            }
        }
        if sanitized.len() != table.len() {
            return Err(Error::InvalidParameter(
                "behaviour table has settings outside the question grid".into(),
            ));
        }
        Ok(Self {
            alice_questions,
            bob_questions,
            table: sanitized,
        })
    }

    pub fn alice_questions(&self) -> &[Question] {
        &self.alice_questions
    }

    pub fn bob_questions(&self) -> &[Question] {
        &self.bob_questions
    }

    pub fn row(&self, u: Question, v: Question) -> Option<&[f64; 4]> {
        self.table.get(&(u, v))
    }

    pub fn prob(&self, a: u8, b: u8, u: Question, v: Question) -> Option<f64> {
        self.table.get(&(u, v)).map(|row| row[idx(a, b)])
    }

    /// E(u,v) = sum (-1)^(a xor b) P(a,b|u,v), grouped as
    /// (p00 + p11) - (p01 + p10).
    pub fn correlator(&self, u: Question, v: Question) -> Option<f64> {
        self.table
            .get(&(u, v))
            .map(|row| (row[0] + row[3]) - (row[1] + row[2]))
    }

    /// Alice's marginal P(a|u,v).
    pub fn alice_marginal(&self, a: u8, u: Question, v: Question) -> Option<f64> {
        self.table
            .get(&(u, v))
            .map(|row| row[idx(a, 0)] + row[idx(a, 1)])
    }

    /// Bob's marginal P(b|u,v).
    pub fn bob_marginal(&self, b: u8, u: Question, v: Question) -> Option<f64> {
        self.table
            .get(&(u, v))
            .map(|row| row[idx(0, b)] + row[idx(1, b)])
    }

    /// Check that each party's marginal is independent of the other
    /// party's setting, within `tol`.
    pub fn check_nonsignalling(&self, tol: f64) -> Result<()> {
        for &u in &self.alice_questions {
            let reference = self.bob_questions[0];
            for &v in &self.bob_questions[1..] {
                for a in 0..2 {
                    let base = self.alice_marginal(a, u, reference).unwrap();
                    let other = self.alice_marginal(a, u, v).unwrap();
                    if (base - other).abs() > tol {
                        return Err(Error::InvalidParameter(format!(
                            "Alice's marginal at u={u} depends on Bob's setting: {base} vs {other}"
                        )));
                    }
                }
            }
        }
        for &v in &self.bob_questions {
            let reference = self.alice_questions[0];
            for &u in &self.alice_questions[1..] {
                for b in 0..2 {
                    let base = self.bob_marginal(b, reference, v).unwrap();
                    let other = self.bob_marginal(b, u, v).unwrap();
                    if (base - other).abs() > tol {
                        return Err(Error::InvalidParameter(format!(
                            "Bob's marginal at v={v} depends on Alice's setting: {base} vs {other}"
                        )));
                    }
                }
            }
        }
        Ok(())
    }

    pub fn is_nonsignalling(&self, tol: f64) -> bool {
        self.check_nonsignalling(tol).is_ok()
    }

    /// Parse either the full-table schema or the correlator shorthand.
    pub fn from_json(text: &str) -> Result<Self> {
        let raw: BehaviorJson = serde_json::from_str(text)?;
        match raw {
            BehaviorJson::Table {
                alice_questions,
                bob_questions,
                table,
            } => {
                let mut map = BTreeMap::new();
                for row in table {
                    if map
                        .insert((row.u, row.v), [row.p00, row.p01, row.p10, row.p11])
                        .is_some()
                    {
                        return Err(Error::Parse(format!(
                            "duplicate behaviour row ({},{})",
                            row.u, row.v
                        )));
                    }
                }
                Behavior::new(alice_questions, bob_questions, map)
            }
            BehaviorJson::Correlators { correlators } => {
                let mut entries = BTreeMap::new();
                for row in correlators {
                    if entries.insert((row.u, row.v), row.e).is_some() {
                        return Err(Error::Parse(format!(
                            "duplicate correlator row ({},{})",
                            row.u, row.v
                        )));
                    }
                }
                from_correlators(&CorrelatorTable::new(entries)?)
            }
        }
    }
}

#[derive(Deserialize)]
#[serde(untagged)]
enum BehaviorJson {
    Table {
        alice_questions: Vec<Question>,
        bob_questions: Vec<Question>,
        table: Vec<TableRow>,
    },
    Correlators {
        correlators: Vec<CorrelatorRow>,
    },
}

#[derive(Serialize, Deserialize)]
struct TableRow {
    u: Question,
    v: Question,
    p00: f64,
    p01: f64,
    p10: f64,
    p11: f64,
}

#[derive(Serialize, Deserialize)]
struct CorrelatorRow {
    u: Question,
    v: Question,
    #[serde(rename = "E")]
    e: f64,
}

/// A table of correlators E(u,v) in [-1, 1].
#[derive(Debug, Clone, PartialEq)]
pub struct CorrelatorTable {
    entries: BTreeMap<(Question, Question), f64>,
}

impl CorrelatorTable {
    pub fn new(entries: BTreeMap<(Question, Question), f64>) -> Result<Self> {
        if entries.is_empty() {
            return Err(Error::InvalidParameter("correlator table is empty".into()));
        }
        for (&(u, v), &e) in &entries {
            if !e.is_finite() || e.abs() > 1.0 + CORRELATOR_TOL {
                return Err(Error::InvalidParameter(format!(
                    "correlator E({u},{v}) = {e} outside [-1, 1]"
                )));
            }
        }
        Ok(Self { entries })
    }

    pub fn get(&self, u: Question, v: Question) -> Option<f64> {
        self.entries.get(&(u, v)).copied()
    }
}

/// Reconstruct the unbiased-marginal behaviour
/// P(a,b|u,v) = (1 + (-1)^(a xor b) E(u,v)) / 4.
/// Pairs absent from the table get E = 0 (the uniform row). The result is
/// nonsignalling with uniform marginals by construction.
pub fn from_correlators(correlators: &CorrelatorTable) -> Result<Behavior> {
    let mut alice: Vec<Question> = correlators.entries.keys().map(|&(u, _)| u).collect();
    let mut bob: Vec<Question> = correlators.entries.keys().map(|&(_, v)| v).collect();
    alice.sort_unstable();
    alice.dedup();
    bob.sort_unstable();
    bob.dedup();
    let mut table = BTreeMap::new();
    for &u in &alice {
        for &v in &bob {
            let e = correlators.get(u, v).unwrap_or(0.0).clamp(-1.0, 1.0);
            let same = (1.0 + e) / 4.0;
            let diff = (1.0 - e) / 4.0;
            table.insert((u, v), [same, diff, diff, same]);
        }
    }
    Behavior::new(alice, bob, table)
}

/// The PR box: the CHSH-labeled behaviour winning every CHSH round.
pub fn pr_box() -> Behavior {
    perfect_ns_box(&make_chsh()).expect("CHSH support is total")
}

/// The perfect nonsignalling box for a game: on each supported pair, the
/// two winning output pairs at probability 1/2 each; uniform elsewhere.
pub fn perfect_ns_box(game: &XorGame) -> Result<Behavior> {
    let mut table = BTreeMap::new();
    for &u in game.alice_questions() {
        for &v in game.bob_questions() {
            let row = if game.weight(u, v) > 0.0 {
                let f = game.predicate_bit(u, v).expect("support has a predicate");
                if f == 0 {
                    [0.5, 0.0, 0.0, 0.5]
                } else {
                    [0.0, 0.5, 0.5, 0.0]
                }
            } else {
                [0.25; 4]
            };
            table.insert((u, v), row);
        }
    }
    Behavior::new(
        game.alice_questions().to_vec(),
        game.bob_questions().to_vec(),
        table,
    )
}

/// Point-mass local behaviour from deterministic answer maps. The question
/// sets are taken from the map keys.
pub fn deterministic_local(
    alice_bits: &BTreeMap<Question, u8>,
    bob_bits: &BTreeMap<Question, u8>,
) -> Result<Behavior> {
    if alice_bits.is_empty() || bob_bits.is_empty() {
        return Err(Error::InvalidParameter(
            "answer maps must be nonempty".into(),
        ));
    }
    for (&q, &bit) in alice_bits.iter().chain(bob_bits.iter()) {
        if bit > 1 {
            return Err(Error::InvalidParameter(format!(
                "answer for question {q} must be 0 or 1, got {bit}"
            )));
        }
    }
    let alice: Vec<Question> = alice_bits.keys().copied().collect();
    let bob: Vec<Question> = bob_bits.keys().copied().collect();
    let mut table = BTreeMap::new();
    for (&u, &a) in alice_bits {
        for (&v, &b) in bob_bits {
            let mut row = [0.0; 4];
            row[idx(a, b)] = 1.0;
            table.insert((u, v), row);
        }
    }
    Behavior::new(alice, bob, table)
}

/// The all-zeros deterministic box on a game's question sets.
pub fn local_zeros(game: &XorGame) -> Behavior {
    let alice: BTreeMap<Question, u8> = game.alice_questions().iter().map(|&q| (q, 0)).collect();
    let bob: BTreeMap<Question, u8> = game.bob_questions().iter().map(|&q| (q, 0)).collect();
    deterministic_local(&alice, &bob).expect("game question sets are nonempty")
}

/// Entrywise convex combination of behaviours on identical question sets.
pub fn mix(components: &[Behavior], weights: &[f64]) -> Result<Behavior> {
    if components.is_empty() || components.len() != weights.len() {
        return Err(Error::InvalidParameter(
            "mixture needs matching nonempty component and weight lists".into(),
        ));
    }
    let mut sum = 0.0;
    for &w in weights {
        if !w.is_finite() || w < 0.0 {
            return Err(Error::InvalidParameter(format!(
                "mixture weight {w} is negative or NaN"
            )));
        }
        sum += w;
    }
    if (sum - 1.0).abs() > ROW_SUM_TOL {
        return Err(Error::InvalidParameter(format!(
            "mixture weights sum to {sum}, expected 1"
        )));
    }
    let first = &components[0];
    for c in &components[1..] {
        if c.alice_questions != first.alice_questions || c.bob_questions != first.bob_questions {
            return Err(Error::InvalidParameter(
                "mixture components have mismatched question sets".into(),
            ));
        }
    }
    let mut table = BTreeMap::new();
    for &(u, v) in first.table.keys() {
        let mut row = [0.0; 4];
        for (component, &w) in components.iter().zip(weights) {
            let source = component.table[&(u, v)];
            for (target, &p) in row.iter_mut().zip(&source) {
                *target += w * p;
            }
        }
        table.insert((u, v), row);
    }
    Behavior::new(
        first.alice_questions.clone(),
        first.bob_questions.clone(),
        table,
    )
}

/// The noisy-PR benchmark (1-eps) PR + eps * all-zeros-local on CHSH.
pub fn noisy_pr(eps: f64) -> Result<Behavior> {
    if !(0.0..=1.0).contains(&eps) {
        return Err(Error::InvalidParameter(format!(
            "noise weight {eps} outside [0,1]"
        )));
    }
    mix(&[pr_box(), local_zeros(&make_chsh())], &[1.0 - eps, eps])
}

/// The Tsirelson-optimal CHSH behaviour, built from correlators of
/// magnitude 1/sqrt(2).
pub fn tsirelson_behavior() -> Behavior {
    let c = 1.0 / std::f64::consts::SQRT_2;
    let mut entries = BTreeMap::new();
    entries.insert((0, 0), c);
    entries.insert((0, 1), c);
    entries.insert((1, 0), c);
    entries.insert((1, 1), -c);
    from_correlators(&CorrelatorTable::new(entries).expect("correlators in range"))
        .expect("uniform-marginal reconstruction is valid")
}

/// The chained-game behaviour reaching cos^2(pi/(4N)): correlators of
/// magnitude cos(pi/(2N)) on every edge, negative on the wrap-around edge,
/// E = 0 off support.
pub fn chained_quantum_behavior(n: u32) -> Result<Behavior> {
    if n < 2 {
        return Err(Error::InvalidParameter(format!(
            "chained behaviour needs N >= 2, got {n}"
        )));
    }
    let c = (PI / (2.0 * n as f64)).cos();
    let mut entries = BTreeMap::new();
    for j in 0..n {
        entries.insert((j, j), c);
        let next = (j + 1) % n;
        entries.insert((next, j), if j == n - 1 { -c } else { c });
    }
    from_correlators(&CorrelatorTable::new(entries)?)
}

/// p_succ = sum over the support of pi(u,v) * P[a xor b = f(u,v)].
/// Accumulated as the complement of the lost mass, so a behaviour that
/// wins every supported pair scores exactly one regardless of how the
/// question weights round.
pub fn success_probability(game: &XorGame, behavior: &Behavior) -> Result<f64> {
    let mut lost = 0.0;
    for ((u, v), w, f) in game.support() {
        let row = behavior.row(u, v).ok_or_else(|| {
            Error::InvalidParameter(format!("behaviour does not cover supported pair ({u},{v})"))
        })?;
        let lose = if f == 0 {
            row[1] + row[2]
        } else {
            row[0] + row[3]
        };
        lost += w * lose;
    }
    Ok(1.0 - lost)
}

/// S = E00 + E01 + E10 - E11 on the CHSH question grid.
pub fn chsh_value(behavior: &Behavior) -> Result<f64> {
    if behavior.alice_questions() != [0, 1] || behavior.bob_questions() != [0, 1] {
        return Err(Error::InvalidParameter(
            "CHSH value needs question sets {0,1} x {0,1}".into(),
        ));
    }
    let e = |u, v| behavior.correlator(u, v).unwrap();
    Ok(((e(0, 0) + e(0, 1)) + e(1, 0)) - e(1, 1))
}

/// Which two-party marginal to extract from a tripartite behaviour.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "UPPERCASE")]
pub enum MarginalPair {
    Ab,
    Ac,
}

/// A three-party behaviour on binary settings and outputs, stored as
/// P(a,b,c|x,y,z) with outcome index a*4 + b*2 + c.
#[derive(Debug, Clone, PartialEq)]
pub struct TripartiteBehavior {
    table: BTreeMap<(u8, u8, u8), [f64; 8]>,
}

impl TripartiteBehavior {
    pub fn new(table: BTreeMap<(u8, u8, u8), [f64; 8]>) -> Result<Self> {
        for x in 0..2 {
            for y in 0..2 {
                for z in 0..2 {
                    let row = table.get(&(x, y, z)).ok_or_else(|| {
                        Error::InvalidParameter(format!(
                            "tripartite table missing setting ({x},{y},{z})"
                        ))
                    })?;
                    let mut sum = 0.0;
                    for &p in row {
                        if !p.is_finite() || p < -NEGATIVE_CLAMP_TOL {
                            return Err(Error::InvalidParameter(format!(
                                "invalid probability {p} at setting ({x},{y},{z})"
                            )));
                        }
                        sum += p;
                    }
                    if (sum - 1.0).abs() > ROW_SUM_TOL + 8.0 * NEGATIVE_CLAMP_TOL {
                        return Err(Error::InvalidParameter(format!(
                            "setting ({x},{y},{z}) sums to {sum}, expected 1"
                        )));
                    }
                }
            }
        }
        if table.len() != 8 {
            return Err(Error::InvalidParameter(
                "tripartite table has settings outside {0,1}^3".into(),
            ));
        }
        let behaviour = Self { table };
        behaviour.check_pairwise_nonsignalling(NONSIGNALLING_TOL)?;
        Ok(behaviour)
    }

    fn prob(&self, a: u8, b: u8, c: u8, x: u8, y: u8, z: u8) -> f64 {
        self.table[&(x, y, z)][(a * 4 + b * 2 + c) as usize]
    }

    /// Every two-party joint must be independent of the third party's
    /// setting.
    fn check_pairwise_nonsignalling(&self, tol: f64) -> Result<()> {
        for s0 in 0..2u8 {
            for s1 in 0..2u8 {
                for o0 in 0..2u8 {
                    for o1 in 0..2u8 {
                        let ab0: f64 = (0..2).map(|c| self.prob(o0, o1, c, s0, s1, 0)).sum();
                        let ab1: f64 = (0..2).map(|c| self.prob(o0, o1, c, s0, s1, 1)).sum();
                        if (ab0 - ab1).abs() > tol {
                            return Err(Error::InconsistentMarginal(format!(
                                "AB joint at (x={s0},y={s1}) depends on z: {ab0} vs {ab1}"
                            )));
                        }
                        let ac0: f64 = (0..2).map(|b| self.prob(o0, b, o1, s0, 0, s1)).sum();
                        let ac1: f64 = (0..2).map(|b| self.prob(o0, b, o1, s0, 1, s1)).sum();
                        if (ac0 - ac1).abs() > tol {
                            return Err(Error::InconsistentMarginal(format!(
                                "AC joint at (x={s0},z={s1}) depends on y: {ac0} vs {ac1}"
                            )));
                        }
                        let bc0: f64 = (0..2).map(|a| self.prob(a, o0, o1, 0, s0, s1)).sum();
                        let bc1: f64 = (0..2).map(|a| self.prob(a, o0, o1, 1, s0, s1)).sum();
                        if (bc0 - bc1).abs() > tol {
                            return Err(Error::InconsistentMarginal(format!(
                                "BC joint at (y={s0},z={s1}) depends on x: {bc0} vs {bc1}"
                            )));
                        }
                    }
                }
            }
        }
        Ok(())
    }

    /// Product of a CHSH-labeled two-party behaviour with an independent
    /// third party whose output distribution may depend on z.
    pub fn product(ab: &Behavior, c_given_z: &BTreeMap<u8, [f64; 2]>) -> Result<Self> {
        if ab.alice_questions() != [0, 1] || ab.bob_questions() != [0, 1] {
            return Err(Error::InvalidParameter(
                "product construction needs a CHSH-labeled AB behaviour".into(),
            ));
        }
        for z in 0..2u8 {
            let dist = c_given_z.get(&z).ok_or_else(|| {
                Error::InvalidParameter(format!("missing C distribution for z={z}"))
            })?;
            if dist[0] < 0.0 || dist[1] < 0.0 || (dist[0] + dist[1] - 1.0).abs() > ROW_SUM_TOL {
                return Err(Error::InvalidParameter(format!(
                    "C distribution for z={z} is not a distribution"
                )));
            }
        }
        let mut table = BTreeMap::new();
        for x in 0..2u8 {
            for y in 0..2u8 {
                let row_ab = ab.row(x as Question, y as Question).unwrap();
                for z in 0..2u8 {
                    let dist = c_given_z[&z];
                    let mut row = [0.0; 8];
                    for a in 0..2u8 {
                        for b in 0..2u8 {
                            for c in 0..2u8 {
                                row[(a * 4 + b * 2 + c) as usize] =
                                    row_ab[idx(a, b)] * dist[c as usize];
                            }
                        }
                    }
                    table.insert((x, y, z), row);
                }
            }
        }
        Self::new(table)
    }

    /// Uniform tripartite noise.
    pub fn uniform() -> Self {
        let mut table = BTreeMap::new();
        for x in 0..2 {
            for y in 0..2 {
                for z in 0..2 {
                    table.insert((x, y, z), [0.125; 8]);
                }
            }
        }
        Self::new(table).expect("uniform noise is valid")
    }

    /// Parse the tripartite JSON schema:
    /// `{"tripartite_table": [{"x","y","z","p":[8 probs]}, ...]}`.
    pub fn from_json(text: &str) -> Result<Self> {
        #[derive(Deserialize)]
        struct Raw {
            tripartite_table: Vec<RawRow>,
        }
        #[derive(Deserialize)]
        struct RawRow {
            x: u8,
            y: u8,
            z: u8,
            p: [f64; 8],
        }
        let raw: Raw = serde_json::from_str(text)?;
        let mut table = BTreeMap::new();
        for row in raw.tripartite_table {
            if table.insert((row.x, row.y, row.z), row.p).is_some() {
                return Err(Error::Parse(format!(
                    "duplicate tripartite setting ({},{},{})",
                    row.x, row.y, row.z
                )));
            }
        }
        Self::new(table)
    }
}

/// Trace out the third party at a fixed setting of that party, checking
/// the result does not depend on the traced setting.
pub fn marginalize(t: &TripartiteBehavior, pair: MarginalPair) -> Result<Behavior> {
    let mut table = BTreeMap::new();
    match pair {
        MarginalPair::Ab => {
            for x in 0..2u8 {
                for y in 0..2u8 {
                    let mut row = [0.0; 4];
                    for a in 0..2u8 {
                        for b in 0..2u8 {
                            let at_z0: f64 = (0..2).map(|c| t.prob(a, b, c, x, y, 0)).sum();
                            let at_z1: f64 = (0..2).map(|c| t.prob(a, b, c, x, y, 1)).sum();
                            if (at_z0 - at_z1).abs() > NONSIGNALLING_TOL {
                                return Err(Error::InconsistentMarginal(format!(
                                    "AB marginal at ({x},{y}) depends on z: {at_z0} vs {at_z1}"
                                )));
                            }
                            row[idx(a, b)] = at_z0;
                        }
                    }
                    table.insert((x as Question, y as Question), row);
                }
            }
        }
        MarginalPair::Ac => {
            for x in 0..2u8 {
                for z in 0..2u8 {
                    let mut row = [0.0; 4];
                    for a in 0..2u8 {
                        for c in 0..2u8 {
                            let at_y0: f64 = (0..2).map(|b| t.prob(a, b, c, x, 0, z)).sum();
                            let at_y1: f64 = (0..2).map(|b| t.prob(a, b, c, x, 1, z)).sum();
                            if (at_y0 - at_y1).abs() > NONSIGNALLING_TOL {
                                return Err(Error::InconsistentMarginal(format!(
                                    "AC marginal at ({x},{z}) depends on y: {at_y0} vs {at_y1}"
                                )));
                            }
                            row[idx(a, c)] = at_y0;
                        }
                    }
                    table.insert((x as Question, z as Question), row);
                }
            }
        }
    }
    Behavior::new(vec![0, 1], vec![0, 1], table)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::games::make_chained;
    use crate::rng::CounterRng;

    fn uniform_correlators() -> CorrelatorTable {
        let mut entries = BTreeMap::new();
        for u in 0..2 {
            for v in 0..2 {
                entries.insert((u, v), 0.0);
            }
        }
        CorrelatorTable::new(entries).unwrap()
    }

    #[test]
    fn from_correlators_uniform() {
        let b = from_correlators(&uniform_correlators()).unwrap();
        for u in 0..2 {
            for v in 0..2 {
                assert_eq!(*b.row(u, v).unwrap(), [0.25; 4]);
            }
        }
    }

    #[test]
    fn from_correlators_tsirelson_saturates_tsirelson_bound() {
        let b = tsirelson_behavior();
        let s = chsh_value(&b).unwrap();
        assert!((s - 2.0 * std::f64::consts::SQRT_2).abs() <= 1e-12);
    }

    #[test]
    fn from_correlators_perfect_correlation() {
        let mut entries = BTreeMap::new();
        for u in 0..2 {
            for v in 0..2 {
                entries.insert((u, v), 1.0);
            }
        }
        let b = from_correlators(&CorrelatorTable::new(entries).unwrap()).unwrap();
        for u in 0..2 {
            for v in 0..2 {
                assert_eq!(*b.row(u, v).unwrap(), [0.5, 0.0, 0.0, 0.5]);
            }
        }
    }

    #[test]
    fn correlator_magnitude_is_validated() {
        let mut entries = BTreeMap::new();
        entries.insert((0, 0), 1.5);
        assert!(CorrelatorTable::new(entries).is_err());
    }

    #[test]
    fn pr_box_properties() {
        let pr = pr_box();
        assert_eq!(chsh_value(&pr).unwrap(), 4.0);
        assert_eq!(success_probability(&make_chsh(), &pr).unwrap(), 1.0);
        for u in 0..2 {
            for v in 0..2 {
                for o in 0..2 {
                    assert_eq!(pr.alice_marginal(o, u, v).unwrap(), 0.5);
                    assert_eq!(pr.bob_marginal(o, u, v).unwrap(), 0.5);
                }
            }
        }
    }

    #[test]
    fn perfect_ns_box_matches_pr_on_chsh() {
        let via_game = perfect_ns_box(&make_chsh()).unwrap();
        assert_eq!(via_game, pr_box());
    }

    #[test]
    fn perfect_ns_box_wins_chained_games() {
        for n in [2, 3, 5] {
            let game = make_chained(n).unwrap();
            let b = perfect_ns_box(&game).unwrap();
            assert_eq!(success_probability(&game, &b).unwrap(), 1.0);
            assert!(b.is_nonsignalling(NONSIGNALLING_TOL));
            for &u in game.alice_questions() {
                for &v in game.bob_questions() {
                    assert_eq!(b.alice_marginal(0, u, v).unwrap(), 0.5);
                    assert_eq!(b.bob_marginal(1, u, v).unwrap(), 0.5);
                }
            }
        }
    }

    #[test]
    fn deterministic_all_zeros_chsh() {
        let b = local_zeros(&make_chsh());
        assert_eq!(chsh_value(&b).unwrap(), 2.0);
        assert_eq!(success_probability(&make_chsh(), &b).unwrap(), 0.75);
    }

    #[test]
    fn deterministic_all_zeros_chained() {
        for n in [2u32, 3, 5] {
            let game = make_chained(n).unwrap();
            let b = local_zeros(&game);
            let p = success_probability(&game, &b).unwrap();
            let expected = 1.0 - 1.0 / (2.0 * n as f64);
            assert!((p - expected).abs() <= 1e-12, "N={n}: {p} vs {expected}");
        }
    }

    #[test]
    fn deterministic_identity_strategy() {
        // a(u) = u, b(v) = 0 wins CHSH on 3 of 4 settings.
        let alice: BTreeMap<Question, u8> = [(0, 0), (1, 1)].into();
        let bob: BTreeMap<Question, u8> = [(0, 0), (1, 0)].into();
        let b = deterministic_local(&alice, &bob).unwrap();
        assert_eq!(success_probability(&make_chsh(), &b).unwrap(), 0.75);
    }

    #[test]
    fn deterministic_rejects_bad_bits() {
        let alice: BTreeMap<Question, u8> = [(0, 2)].into();
        let bob: BTreeMap<Question, u8> = [(0, 0)].into();
        assert!(deterministic_local(&alice, &bob).is_err());
    }

    #[test]
    fn mixture_interpolates_chsh_value() {
        for eps in [0.0, 0.2, 0.5, 1.0] {
            let b = noisy_pr(eps).unwrap();
            let s = chsh_value(&b).unwrap();
            assert!((s - (4.0 - 2.0 * eps)).abs() <= 1e-12, "eps={eps}: S={s}");
        }
    }

    #[test]
    fn mixture_identity_weight_is_exact() {
        let pr = pr_box();
        let mixed = mix(&[pr.clone(), local_zeros(&make_chsh())], &[1.0, 0.0]).unwrap();
        assert_eq!(mixed, pr);
    }

    #[test]
    fn mixture_at_noise_threshold_hits_tsirelson_value() {
        let eps = 2.0 - std::f64::consts::SQRT_2;
        let b = noisy_pr(eps).unwrap();
        let s = chsh_value(&b).unwrap();
        assert!((s - 2.0 * std::f64::consts::SQRT_2).abs() <= 1e-15);
        // The strict quantum-ceiling comparison must not fire at the boundary.
        assert!(s <= 2.0 * std::f64::consts::SQRT_2);
    }

    #[test]
    fn mixture_rejects_mismatched_questions() {
        let pr = pr_box();
        let other = local_zeros(&make_chained(3).unwrap());
        assert!(mix(&[pr, other], &[0.5, 0.5]).is_err());
    }

    #[test]
    fn success_probability_examples() {
        let chsh = make_chsh();
        let quantum = (PI / 8.0).cos().powi(2);
        assert!(
            (success_probability(&chsh, &tsirelson_behavior()).unwrap() - quantum).abs() <= 1e-12
        );
        assert_eq!(success_probability(&chsh, &pr_box()).unwrap(), 1.0);
        let uniform = from_correlators(&uniform_correlators()).unwrap();
        assert!((success_probability(&chsh, &uniform).unwrap() - 0.5).abs() <= 1e-15);
    }

    #[test]
    fn success_probability_requires_coverage() {
        let game = make_chained(3).unwrap();
        assert!(success_probability(&game, &pr_box()).is_err());
    }

    #[test]
    fn chsh_value_requires_chsh_grid() {
        let b = local_zeros(&make_chained(3).unwrap());
        assert!(chsh_value(&b).is_err());
    }

    #[test]
    fn chsh_bridge_for_noisy_pr() {
        let b = noisy_pr(0.2).unwrap();
        assert!((chsh_value(&b).unwrap() - 3.6).abs() <= 1e-12);
    }

    #[test]
    fn chained_quantum_behavior_success() {
        for n in [2u32, 3, 6] {
            let game = make_chained(n).unwrap();
            let b = chained_quantum_behavior(n).unwrap();
            let p = success_probability(&game, &b).unwrap();
            let expected = (PI / (4.0 * n as f64)).cos().powi(2);
            assert!((p - expected).abs() <= 1e-12, "N={n}: {p} vs {expected}");
        }
        assert!(chained_quantum_behavior(1).is_err());
    }

    #[test]
    fn chained_edge_correlator_bounded() {
        for n in [2u32, 9, 40] {
            let c = (PI / (2.0 * n as f64)).cos();
            assert!(c <= 1.0);
            assert!(chained_quantum_behavior(n).is_ok());
        }
    }

    #[test]
    fn marginalize_product_recovers_factors() {
        let c_rows: BTreeMap<u8, [f64; 2]> = [(0, [1.0, 0.0]), (1, [1.0, 0.0])].into();
        let t = TripartiteBehavior::product(&pr_box(), &c_rows).unwrap();
        let ab = marginalize(&t, MarginalPair::Ab).unwrap();
        assert_eq!(ab, pr_box());
        let ac = marginalize(&t, MarginalPair::Ac).unwrap();
        assert_eq!(chsh_value(&ac).unwrap(), 0.0);
    }

    #[test]
    fn marginalize_uniform_noise() {
        let t = TripartiteBehavior::uniform();
        for pair in [MarginalPair::Ab, MarginalPair::Ac] {
            let m = marginalize(&t, pair).unwrap();
            for u in 0..2 {
                for v in 0..2 {
                    assert_eq!(m.correlator(u, v).unwrap(), 0.0);
                }
            }
        }
    }

    #[test]
    fn marginalize_rejects_signalling_input() {
        // C's output copies z, which is fine, but make AB depend on z.
        let mut table = BTreeMap::new();
        for x in 0..2 {
            for y in 0..2 {
                for z in 0..2 {
                    let mut row = [0.0; 8];
                    if z == 0 {
                        row[0] = 1.0; // (a,b,c) = (0,0,0)
                    } else {
                        row[4] = 1.0; // (a,b,c) = (1,0,0)
                    }
                    table.insert((x, y, z), row);
                }
            }
        }
        assert!(matches!(
            TripartiteBehavior::new(table),
            Err(Error::InconsistentMarginal(_))
        ));
    }

    #[test]
    fn behaviour_json_both_schemas() {
        let table_form = r#"{
            "alice_questions": [0, 1],
            "bob_questions": [0, 1],
            "table": [
                {"u":0,"v":0,"p00":0.5,"p01":0.0,"p10":0.0,"p11":0.5},
                {"u":0,"v":1,"p00":0.5,"p01":0.0,"p10":0.0,"p11":0.5},
                {"u":1,"v":0,"p00":0.5,"p01":0.0,"p10":0.0,"p11":0.5},
                {"u":1,"v":1,"p00":0.0,"p01":0.5,"p10":0.5,"p11":0.0}
            ]
        }"#;
        let b = Behavior::from_json(table_form).unwrap();
        assert_eq!(b, pr_box());

        let correlator_form = r#"{
            "correlators": [
                {"u":0,"v":0,"E":1.0}, {"u":0,"v":1,"E":1.0},
                {"u":1,"v":0,"E":1.0}, {"u":1,"v":1,"E":-1.0}
            ]
        }"#;
        let b = Behavior::from_json(correlator_form).unwrap();
        assert_eq!(b, pr_box());

        assert!(Behavior::from_json("{\"correlators\": []}").is_err());
    }

    #[test]
    fn clamps_tiny_negative_entries() {
        let mut table = BTreeMap::new();
        table.insert((0, 0), [1.0 + 5e-13, -5e-13, 0.0, 0.0]);
        let b = Behavior::new(vec![0], vec![0], table).unwrap();
        let row = b.row(0, 0).unwrap();
        assert!(row.iter().all(|&p| p >= 0.0));
        assert!((row.iter().sum::<f64>() - 1.0).abs() <= 1e-12);

        let mut bad = BTreeMap::new();
        bad.insert((0, 0), [1.0, -1e-9, 1e-9, 0.0]);
        assert!(Behavior::new(vec![0], vec![0], bad).is_err());
    }

    fn random_chsh_behavior(rng: &mut CounterRng) -> Behavior {
        // Random nonsignalling behaviour via random correlators.
        let mut entries = BTreeMap::new();
        for u in 0..2 {
            for v in 0..2 {
                entries.insert((u, v), 2.0 * rng.next_f64() - 1.0);
            }
        }
        from_correlators(&CorrelatorTable::new(entries).unwrap()).unwrap()
    }

    proptest::proptest! {
        #[test]
        fn success_probability_is_affine(seed in 0u64..200) {
            let mut rng = CounterRng::new(seed);
            let components = vec![
                random_chsh_behavior(&mut rng),
                random_chsh_behavior(&mut rng),
                random_chsh_behavior(&mut rng),
            ];
            let raw: Vec<f64> = (0..3).map(|_| rng.next_f64() + 1e-3).collect();
            let total: f64 = raw.iter().sum();
            let weights: Vec<f64> = raw.iter().map(|w| w / total).collect();
            let mixed = mix(&components, &weights).unwrap();
            let game = make_chsh();
            let direct = success_probability(&game, &mixed).unwrap();
            let convex: f64 = components
                .iter()
                .zip(&weights)
                .map(|(c, &w)| w * success_probability(&game, c).unwrap())
                .sum();
            proptest::prop_assert!((direct - convex).abs() <= 1e-12);
        }

        #[test]
        fn chsh_bridge_identity(seed in 0u64..200) {
            let mut rng = CounterRng::new(seed);
            let b = random_chsh_behavior(&mut rng);
            let p = success_probability(&make_chsh(), &b).unwrap();
            let s = chsh_value(&b).unwrap();
            proptest::prop_assert!((p - (0.5 + s / 8.0)).abs() <= 1e-12);
        }

        #[test]
        fn correlator_built_behaviours_are_nonsignalling(seed in 0u64..200) {
            let mut rng = CounterRng::new(seed);
            let b = random_chsh_behavior(&mut rng);
            proptest::prop_assert!(b.is_nonsignalling(NONSIGNALLING_TOL));
        }
    }
}
