//! Round-level simulation of the battery transducer.
//!
//! Each round samples a question pair and outputs, pads target and guess
//! bits with a fresh uniform bit, and routes one fuel excitation into the
//! battery through an equality-controlled SWAP on an explicit four-register
//! basis state. Register states are classical bits; energies are tracked
//! exactly as delta * (fuel + battery).

use base64::engine::general_purpose::STANDARD as BASE64;
use base64::Engine;
use serde::{Deserialize, Serialize};

use crate::behaviors::Behavior;
use crate::error::{Error, Result};
use crate::games::{Question, XorGame};
use crate::rng::CounterRng;

pub const DEFAULT_DELTA: f64 = 1.0;

/// Bits per base64 line in the NDJSON work-record format.
const BITS_PER_LINE: usize = 4096;

/// The explicit register content of one round: target X, guess G,
/// controller memory M, fuel F, battery W, all degenerate except fuel and
/// battery which carry `delta` per excitation.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RegisterState {
    pub x: u8,
    pub g: u8,
    pub m: u8,
    pub fuel: u8,
    pub battery: u8,
    pub delta: f64,
}

impl RegisterState {
    /// Fresh round state: one fuel excitation, empty battery, blank memory.
    pub fn fresh(x: u8, g: u8, delta: f64) -> Self {
        Self {
            x,
            g,
            m: 0,
            fuel: 1,
            battery: 0,
            delta,
        }
    }

    /// Total explicit energy; logical registers contribute nothing.
    pub fn energy(&self) -> f64 {
        self.delta * (self.fuel + self.battery) as f64
    }
}

/// SWAP fuel and battery when the target and guess bits agree, identity
/// otherwise. Logical bits are untouched and the excitation count is
/// preserved in every branch.
pub fn equality_controlled_swap(s: RegisterState) -> RegisterState {
    if s.x == s.g {
        RegisterState {
            fuel: s.battery,
            battery: s.fuel,
            ..s
        }
    } else {
        s
    }
}

/// SWAP fuel and battery when the memory bit is set.
pub fn memory_controlled_swap(s: RegisterState) -> RegisterState {
    if s.m == 1 {
        RegisterState {
            fuel: s.battery,
            battery: s.fuel,
            ..s
        }
    } else {
        s
    }
}

/// XOR the success bit z = 1 xor x xor g into the memory register. Applying
/// it twice restores the memory, so the same map serves as compute and
/// uncompute phases of the reversible controller.
pub fn toggle_success_memory(s: RegisterState) -> RegisterState {
    let z = 1 ^ (s.x ^ s.g);
    RegisterState { m: s.m ^ z, ..s }
}

/// Which controller realizes the routing.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Variant {
    /// Equality-controlled SWAP conditioned directly on the logical bits.
    Feedforward,
    /// Compute the success bit into memory, swap on the memory bit,
    /// uncompute the memory.
    Reversible,
}

/// Everything observed in one round, including the register states before
/// and after routing.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RoundTranscript {
    pub u: Question,
    pub v: Question,
    pub a: u8,
    pub b: u8,
    /// One-time pad bit, sampled by the referee and never shown to the devices.
    pub r: u8,
    /// Target bit x = f(u,v) xor r.
    pub x: u8,
    /// Guess bit g = a xor b xor r.
    pub g: u8,
    /// Error bit e = g xor x.
    pub e: u8,
    /// Success bit z = 1 - e.
    pub z: u8,
    /// Battery energy gain, measured from the register states.
    pub work: f64,
    pub pre_state: RegisterState,
    pub post_state: RegisterState,
}

/// Route a fully specified transcript through the chosen controller.
#[allow(clippy::too_many_arguments)] // the five transcript bits travel together
pub fn route_transcript(
    game: &XorGame,
    u: Question,
    v: Question,
    a: u8,
    b: u8,
    r: u8,
    delta: f64,
    variant: Variant,
) -> Result<RoundTranscript> {
    let f = game
        .predicate_bit(u, v)
        .ok_or_else(|| Error::InvalidParameter(format!("game predicate undefined on ({u},{v})")))?;
    let x = f ^ r;
    let g = a ^ b ^ r;
    let pre_state = RegisterState::fresh(x, g, delta);
    let post_state = match variant {
        Variant::Feedforward => equality_controlled_swap(pre_state),
        Variant::Reversible => {
            toggle_success_memory(memory_controlled_swap(toggle_success_memory(pre_state)))
        }
    };
    let e = g ^ x;
    let work = delta * (post_state.battery as f64 - pre_state.battery as f64);
    Ok(RoundTranscript {
        u,
        v,
        a,
        b,
        r,
        x,
        g,
        e,
        z: 1 - e,
        work,
        pre_state,
        post_state,
    })
}

fn sample_pair(game: &XorGame, rng: &mut CounterRng) -> (Question, Question) {
    let t = rng.next_f64();
    let mut cumulative = 0.0;
    let mut last = (0, 0);
    for ((u, v), w, _) in game.support() {
        cumulative += w;
        last = (u, v);
        if t < cumulative {
            return (u, v);
        }
    }
    last
}

fn sample_outputs(
    behavior: &Behavior,
    u: Question,
    v: Question,
    rng: &mut CounterRng,
) -> Result<(u8, u8)> {
    let row = behavior.row(u, v).ok_or_else(|| {
        Error::InvalidParameter(format!("behaviour does not cover setting ({u},{v})"))
    })?;
    let t = rng.next_f64();
    let mut cumulative = 0.0;
    let mut last_supported = 0;
    for (i, &p) in row.iter().enumerate() {
        if p > 0.0 {
            last_supported = i;
        }
        cumulative += p;
        if t < cumulative {
            return Ok(((i / 2) as u8, (i % 2) as u8));
        }
    }
    // Row sums to 1 within tolerance; residual float mass lands on the
    // last outcome that has any probability.
    Ok(((last_supported / 2) as u8, (last_supported % 2) as u8))
}

fn run_round_with(
    game: &XorGame,
    behavior: &Behavior,
    rng: &mut CounterRng,
    delta: f64,
    variant: Variant,
) -> Result<RoundTranscript> {
    // Draw order is fixed: question pair, then outputs by inverse CDF on
    // the row, then the pad bit. The pad is sampled after the outputs and
    // never enters the behaviour sampler.
    let (u, v) = sample_pair(game, rng);
    let (a, b) = sample_outputs(behavior, u, v, rng)?;
    let r = rng.next_bit();
    route_transcript(game, u, v, a, b, r, delta, variant)
}

/// One feed-forward round.
pub fn run_round(
    game: &XorGame,
    behavior: &Behavior,
    rng: &mut CounterRng,
    delta: f64,
) -> Result<RoundTranscript> {
    run_round_with(game, behavior, rng, delta, Variant::Feedforward)
}

/// One reversible-controller round. The work bit matches `run_round` on
/// the same sampled transcript and the memory ends blank.
pub fn run_round_reversible(
    game: &XorGame,
    behavior: &Behavior,
    rng: &mut CounterRng,
    delta: f64,
) -> Result<RoundTranscript> {
    run_round_with(game, behavior, rng, delta, Variant::Reversible)
}

/// An ordered sequence of work bits with the metadata needed to replay it.
#[derive(Debug, Clone, PartialEq)]
pub struct WorkRecord {
    game_name: String,
    delta: f64,
    seed: u64,
    rounds: usize,
    /// Work bits packed MSB-first.
    bits: Vec<u8>,
    ones: usize,
}

impl WorkRecord {
    pub fn from_bits(
        game_name: impl Into<String>,
        delta: f64,
        seed: u64,
        bits: impl IntoIterator<Item = u8>,
    ) -> Result<Self> {
        let mut packed = Vec::new();
        let mut rounds = 0usize;
        let mut ones = 0usize;
        for bit in bits {
            if bit > 1 {
                return Err(Error::InvalidParameter(format!(
                    "work bit must be 0 or 1, got {bit}"
                )));
            }
            if rounds.is_multiple_of(8) {
                packed.push(0);
            }
            if bit == 1 {
                *packed.last_mut().unwrap() |= 1 << (7 - rounds % 8);
                ones += 1;
            }
            rounds += 1;
        }
        if rounds == 0 {
            return Err(Error::InvalidParameter(
                "work record must contain at least one round".into(),
            ));
        }
        Ok(Self {
            game_name: game_name.into(),
            delta,
            seed,
            rounds,
            bits: packed,
            ones,
        })
    }

    pub fn game_name(&self) -> &str {
        &self.game_name
    }

    pub fn delta(&self) -> f64 {
        self.delta
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn rounds(&self) -> usize {
        self.rounds
    }

    pub fn ones(&self) -> usize {
        self.ones
    }

    pub fn bit(&self, i: usize) -> u8 {
        (self.bits[i / 8] >> (7 - i % 8)) & 1
    }

    pub fn iter_bits(&self) -> impl Iterator<Item = u8> + '_ {
        (0..self.rounds).map(move |i| self.bit(i))
    }

    /// Total banked energy, delta per winning round.
    pub fn sum_work(&self) -> f64 {
        self.delta * self.ones as f64
    }

    /// Empirical success rate.
    pub fn p_hat(&self) -> f64 {
        self.ones as f64 / self.rounds as f64
    }

    /// NDJSON format: one JSON header line, then the packed bits as
    /// base64 lines of 4096 bits each (the last line covers the remainder,
    /// zero-padded to a byte boundary).
    pub fn to_ndjson(&self) -> String {
        let header = RecordHeader {
            game: self.game_name.clone(),
            delta: self.delta,
            seed: self.seed,
            rounds: self.rounds,
        };
        let mut out = serde_json::to_string(&header).expect("header serializes");
        out.push('\n');
        for chunk in self.bits.chunks(BITS_PER_LINE / 8) {
            out.push_str(&BASE64.encode(chunk));
            out.push('\n');
        }
        out
    }

    pub fn from_ndjson(text: &str) -> Result<Self> {
        let mut lines = text.lines();
        let header_line = lines
            .next()
            .ok_or_else(|| Error::Parse("empty work record".into()))?;
        let header: RecordHeader = serde_json::from_str(header_line)?;
        if header.rounds == 0 {
            return Err(Error::Parse("work record declares zero rounds".into()));
        }
        let mut bits = Vec::new();
        for line in lines {
            if line.is_empty() {
                continue;
            }
            let chunk = BASE64
                .decode(line)
                .map_err(|e| Error::Parse(format!("bad base64 line in work record: {e}")))?;
            bits.extend_from_slice(&chunk);
        }
        let expected = header.rounds.div_ceil(8);
        if bits.len() != expected {
            return Err(Error::Parse(format!(
                "work record carries {} bytes for {} rounds, expected {expected}",
                bits.len(),
                header.rounds
            )));
        }
        let tail_bits = bits.len() * 8 - header.rounds;
        if tail_bits > 0 {
            let mask = (1u8 << tail_bits) - 1;
            if bits.last().unwrap() & mask != 0 {
                return Err(Error::Parse("nonzero padding bits in work record".into()));
            }
        }
        let ones = bits.iter().map(|b| b.count_ones() as usize).sum();
        Ok(Self {
            game_name: header.game,
            delta: header.delta,
            seed: header.seed,
            rounds: header.rounds,
            bits,
            ones,
        })
    }

    /// Plain CSV export: `round,work_bit`.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("round,work_bit\n");
        for (i, bit) in self.iter_bits().enumerate() {
            out.push_str(&format!("{i},{bit}\n"));
        }
        out
    }
}

#[derive(Serialize, Deserialize)]
struct RecordHeader {
    game: String,
    delta: f64,
    seed: u64,
    rounds: usize,
}

/// Simulate `n` independent rounds. Round i draws from the counter stream
/// keyed by (seed, i), so the record does not depend on execution order
/// and any round can be replayed in isolation.
pub fn simulate(
    game: &XorGame,
    behavior: &Behavior,
    n: usize,
    seed: u64,
    variant: Variant,
    delta: f64,
) -> Result<WorkRecord> {
    if n == 0 {
        return Err(Error::InvalidParameter(
            "round count must be at least 1".into(),
        ));
    }
    for ((u, v), _, _) in game.support() {
        if behavior.row(u, v).is_none() {
            return Err(Error::InvalidParameter(format!(
                "behaviour does not cover supported pair ({u},{v})"
            )));
        }
    }
    let mut bits = Vec::with_capacity(n);
    for i in 0..n {
        let mut rng = CounterRng::for_stream(seed, i as u64);
        let transcript = run_round_with(game, behavior, &mut rng, delta, variant)?;
        bits.push(transcript.z);
    }
    WorkRecord::from_bits(game.name(), delta, seed, bits)
}

/// Enumeration oracle for the mean banked work: every transcript
/// (u,v,a,b,r) is routed through the register machinery and its measured
/// battery gain is weighted by pi(u,v) P(a,b|u,v) / 2.
pub fn exact_work_mean(game: &XorGame, behavior: &Behavior, delta: f64) -> Result<f64> {
    let mut mean = 0.0;
    for ((u, v), w, _) in game.support() {
        let row = behavior.row(u, v).ok_or_else(|| {
            Error::InvalidParameter(format!("behaviour does not cover supported pair ({u},{v})"))
        })?;
        for a in 0..2u8 {
            for b in 0..2u8 {
                let p = row[(a * 2 + b) as usize];
                for r in 0..2u8 {
                    let t = route_transcript(game, u, v, a, b, r, delta, Variant::Feedforward)?;
                    mean += w * p * 0.5 * t.work;
                }
            }
        }
    }
    Ok(mean)
}

/// Battery routing for an arbitrary binary predicate over an arbitrary
/// finite transcript distribution: the predicate value is written to the
/// controller memory and drives the fuel-battery SWAP.
pub fn predicate_route<T, F>(distribution: &[(T, f64)], predicate: F, delta: f64) -> Result<f64>
where
    F: Fn(&T) -> bool,
{
    let mut total = 0.0;
    for (_, p) in distribution {
        if !p.is_finite() || *p < 0.0 {
            return Err(Error::InvalidParameter(format!(
                "transcript probability {p} is negative or NaN"
            )));
        }
        total += p;
    }
    if (total - 1.0).abs() > 1e-12 {
        return Err(Error::InvalidParameter(format!(
            "transcript distribution sums to {total}, expected 1"
        )));
    }
    let mut mean = 0.0;
    for (transcript, p) in distribution {
        let mut state = RegisterState::fresh(0, 0, delta);
        state.m = predicate(transcript) as u8;
        let routed = memory_controlled_swap(state);
        mean += p * delta * (routed.battery as f64 - state.battery as f64);
    }
    Ok(mean)
}

/// Exhaustive transcript statistics for the padded logical bits.
#[derive(Debug, Clone, Copy)]
pub struct PadStatistics {
    pub p_x: [f64; 2],
    pub p_g: [f64; 2],
    pub p_e: [f64; 2],
    /// Joint distribution of (x, e).
    pub joint_xe: [[f64; 2]; 2],
    /// Total enumerated mass (1 up to table normalization slack).
    pub total_mass: f64,
}

/// Enumerate all (u,v,a,b,r) transcripts and accumulate the distribution
/// of the padded bits X and G, the error bit E, and the (X,E) joint.
pub fn pad_statistics(game: &XorGame, behavior: &Behavior) -> Result<PadStatistics> {
    let mut p_x = [0.0; 2];
    let mut p_g = [0.0; 2];
    let mut p_e = [0.0; 2];
    let mut joint_xe = [[0.0; 2]; 2];
    let mut total_mass = 0.0;
    for ((u, v), w, f) in game.support() {
        let row = behavior.row(u, v).ok_or_else(|| {
            Error::InvalidParameter(format!("behaviour does not cover supported pair ({u},{v})"))
        })?;
        for a in 0..2u8 {
            for b in 0..2u8 {
                let p = w * row[(a * 2 + b) as usize];
                for r in 0..2u8 {
                    let x = f ^ r;
                    let g = a ^ b ^ r;
                    let e = g ^ x;
                    let mass = p * 0.5;
                    p_x[x as usize] += mass;
                    p_g[g as usize] += mass;
                    p_e[e as usize] += mass;
                    joint_xe[x as usize][e as usize] += mass;
                    total_mass += mass;
                }
            }
        }
    }
    Ok(PadStatistics {
        p_x,
        p_g,
        p_e,
        joint_xe,
        total_mass,
    })
}
