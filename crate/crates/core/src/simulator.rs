//! Monte Carlo cross-check: runs the protocol concretely on sampled
//! randomness and compares observed behavior with the symbolic analysis.
//!
//! Shuffle outcomes are sampled exactly: the rational weights are put
//! over a common denominator and an integer in `0..lcm` is drawn, so no
//! floating-point bias enters the sampling itself.

use std::collections::BTreeMap;

use num_integer::Integer;
use num_traits::ToPrimitive;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use thiserror::Error;

use crate::cards::{Face, Orientation, Sequence};
use crate::dsl::ast::{Action, Protocol};
use crate::engine::{ControlError, Program};
use crate::rational::Rat;
use crate::shuffle::ShuffleSpec;

/// Concrete actions executed before a run is abandoned as non-terminating.
pub const STEP_BUDGET: usize = 1_000_000;

#[derive(Debug, Error, PartialEq, Eq)]
pub enum SimError {
    #[error("{0}")]
    Control(#[from] ControlError),
    #[error("run exceeded the step budget of {0} actions")]
    StepBudget(usize),
    #[error("result cards show {0}, which encodes no bit")]
    BadResult(String),
    #[error("shuffle weights too fine-grained to sample exactly")]
    WeightOverflow,
}

/// Everything observable from one concrete run.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Transcript {
    pub output: u8,
    pub turns: usize,
    pub shuffles: usize,
    /// Entries into goto-target program points, the concrete counterpart
    /// of the branch-passes runtime metric.
    pub passes: usize,
    /// Visible sequence after each turn, keyed by the turn's program
    /// point, in execution order.
    pub observations: Vec<(usize, String)>,
}

fn initial_sequence(ast: &Protocol, a: u8, b: u8) -> Sequence {
    let mut faces = ast.deck.clone();
    for (commitment, bit) in ast.inputs.iter().zip([a, b]) {
        let (p, q) = commitment.positions;
        let (f, g) = if bit == 0 {
            (Face::Club, Face::Heart)
        } else {
            (Face::Heart, Face::Club)
        };
        faces[p - 1] = f;
        faces[q - 1] = g;
    }
    Sequence::face_down(faces)
}

fn sample_shuffle(spec: &ShuffleSpec, rng: &mut ChaCha8Rng) -> Result<usize, SimError> {
    let mut denom: u128 = 1;
    for (_, w) in spec.entries() {
        let d = w.denom().to_u128().ok_or(SimError::WeightOverflow)?;
        denom = denom / denom.gcd(&d) * d;
    }
    let mut weights = Vec::with_capacity(spec.entries().len());
    for (_, w) in spec.entries() {
        let d = w.denom().to_u128().ok_or(SimError::WeightOverflow)?;
        let n = w.numer().to_u128().ok_or(SimError::WeightOverflow)?;
        weights.push(n * (denom / d));
    }
    let mut draw = rng.gen_range(0..denom);
    for (i, w) in weights.iter().enumerate() {
        if draw < *w {
            return Ok(i);
        }
        draw -= w;
    }
    unreachable!("weights sum to the common denominator")
}

/// Execute one run of the protocol on inputs (a, b) with the given RNG.
pub fn run_once(
    ast: &Protocol,
    program: &Program,
    a: u8,
    b: u8,
    rng: &mut ChaCha8Rng,
) -> Result<Transcript, SimError> {
    let mut seq = initial_sequence(ast, a, b);
    let mut transcript = Transcript {
        output: 0,
        turns: 0,
        shuffles: 0,
        passes: 0,
        observations: Vec::new(),
    };
    let (mut pc, crossed) = program.resolve(0, &seq.visible_string())?;
    transcript.passes += crossed.len();
    for _ in 0..STEP_BUDGET {
        match &program.instrs[pc] {
            Action::Shuffle(spec) => {
                let i = sample_shuffle(spec, rng)?;
                seq = spec.entries()[i]
                    .0
                    .apply(&seq)
                    .expect("validated shuffle fits the deck");
                transcript.shuffles += 1;
            }
            Action::Perm(perm) => {
                seq = perm.apply(&seq).expect("validated perm fits the deck");
            }
            Action::Turn(positions) => {
                let positions: Vec<usize> = positions.iter().copied().collect();
                seq = seq.flip(&positions);
                transcript.turns += 1;
                transcript.observations.push((pc, seq.visible_string()));
            }
            Action::Result { x, y } => {
                let pair = (seq.face(*x), seq.face(*y));
                transcript.output = match pair {
                    (Face::Club, Face::Heart) => 0,
                    (Face::Heart, Face::Club) => 1,
                    _ => {
                        return Err(SimError::BadResult(format!("{}{}", pair.0, pair.1)));
                    }
                };
                return Ok(transcript);
            }
            Action::Output { arms, default } => {
                let all_up: Vec<usize> = (1..=seq.len()).collect();
                let revealed = if seq.all_face_down() {
                    seq.flip(&all_up)
                } else {
                    let down: Vec<usize> = (1..=seq.len())
                        .filter(|&p| seq.orientations()[p - 1] == Orientation::FaceDown)
                        .collect();
                    seq.flip(&down)
                };
                let faces = revealed.faces_string();
                transcript.output = arms
                    .iter()
                    .find(|(pat, _)| pat.matches_visible(&faces))
                    .map(|(_, bit)| *bit)
                    .unwrap_or(*default);
                return Ok(transcript);
            }
            Action::Goto(_) | Action::Branch(_) => unreachable!("control resolved by resolve()"),
        }
        let (next, crossed) = program.resolve(pc + 1, &seq.visible_string())?;
        transcript.passes += crossed.len();
        pc = next;
    }
    Err(SimError::StepBudget(STEP_BUDGET))
}

/// Aggregates over many runs for one fixed input pair.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct InputStats {
    pub trials: usize,
    /// Runs producing output 0 / output 1.
    pub outputs: [usize; 2],
    pub total_turns: u64,
    pub total_shuffles: u64,
    pub total_passes: u64,
    pub sq_passes: u64,
    /// How often each (program point, visible sequence) observation
    /// occurred, over all runs.
    pub observations: BTreeMap<(usize, String), usize>,
}

impl InputStats {
    pub fn output_rate(&self, bit: u8) -> f64 {
        self.outputs[bit as usize] as f64 / self.trials as f64
    }

    pub fn mean_turns(&self) -> f64 {
        self.total_turns as f64 / self.trials as f64
    }

    pub fn mean_shuffles(&self) -> f64 {
        self.total_shuffles as f64 / self.trials as f64
    }

    pub fn mean_passes(&self) -> f64 {
        self.total_passes as f64 / self.trials as f64
    }

    /// Empirical frequency of an observation, relative to trials.
    pub fn observation_rate(&self, key: &(usize, String)) -> f64 {
        *self.observations.get(key).unwrap_or(&0) as f64 / self.trials as f64
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct SimSummary {
    pub trials: usize,
    pub seed: u64,
    /// Indexed by input pair: (0,0), (0,1), (1,0), (1,1).
    pub per_input: [InputStats; 4],
}

pub const INPUT_PAIRS: [(u8, u8); 4] = [(0, 0), (0, 1), (1, 0), (1, 1)];

impl SimSummary {
    pub fn stats(&self, a: u8, b: u8) -> &InputStats {
        &self.per_input[(a * 2 + b) as usize]
    }

    /// Largest deviation in observation frequency between any two input
    /// pairs, over all observations that occurred at all. Under the
    /// security property the transcript distribution is identical for
    /// all inputs, so this should shrink like 1/sqrt(trials).
    pub fn transcript_max_deviation(&self) -> f64 {
        let mut keys: Vec<&(usize, String)> = Vec::new();
        for stats in &self.per_input {
            for key in stats.observations.keys() {
                if !keys.contains(&key) {
                    keys.push(key);
                }
            }
        }
        let mut worst: f64 = 0.0;
        for key in keys {
            let rates: Vec<f64> = self
                .per_input
                .iter()
                .map(|s| s.observation_rate(key))
                .collect();
            for i in 0..rates.len() {
                for j in i + 1..rates.len() {
                    worst = worst.max((rates[i] - rates[j]).abs());
                }
            }
        }
        worst
    }

    /// Transcript independence at the 4/sqrt(trials) threshold.
    pub fn transcript_independent(&self) -> bool {
        self.transcript_max_deviation() <= 4.0 / (self.trials as f64).sqrt()
    }
}

/// Run `trials` independent executions for every input pair. Each trial
/// gets its own RNG stream derived from (input, trial), so the estimate
/// is deterministic in `seed` and independent of execution order.
pub fn estimate(ast: &Protocol, trials: usize, seed: u64) -> Result<SimSummary, SimError> {
    let program = Program::flatten(ast);
    let mut per_input: [InputStats; 4] = Default::default();
    for (input_idx, &(a, b)) in INPUT_PAIRS.iter().enumerate() {
        let stats = &mut per_input[input_idx];
        stats.trials = trials;
        for trial in 0..trials {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            rng.set_stream((input_idx as u64) << 48 | trial as u64);
            let t = run_once(ast, &program, a, b, &mut rng)?;
            stats.outputs[t.output as usize] += 1;
            stats.total_turns += t.turns as u64;
            stats.total_shuffles += t.shuffles as u64;
            stats.total_passes += t.passes as u64;
            stats.sq_passes += (t.passes * t.passes) as u64;
            for obs in t.observations {
                *stats.observations.entry(obs).or_insert(0) += 1;
            }
        }
    }
    Ok(SimSummary {
        trials,
        seed,
        per_input,
    })
}

/// Compare simulated output rates against exact expectations: for a
/// correct AND protocol, output 1 occurs never on inputs with a AND b = 0
/// and always on (1,1). Returns the worst absolute deviation.
pub fn output_deviation(summary: &SimSummary) -> f64 {
    let mut worst: f64 = 0.0;
    for &(a, b) in &INPUT_PAIRS {
        let expect = if a == 1 && b == 1 { 1.0 } else { 0.0 };
        worst = worst.max((summary.stats(a, b).output_rate(1) - expect).abs());
    }
    worst
}

/// Exact expected value of a rational as f64, for tolerance comparisons.
pub fn rat_to_f64(r: &Rat) -> f64 {
    r.numer().to_f64().unwrap_or(f64::NAN) / r.denom().to_f64().unwrap_or(f64::NAN)
}

/// Worst deviation between simulated mean passes and the exact expected
/// branch-passes value, over all input pairs.
pub fn passes_deviation(summary: &SimSummary, exact: &Rat) -> f64 {
    let target = rat_to_f64(exact);
    INPUT_PAIRS
        .iter()
        .map(|&(a, b)| (summary.stats(a, b).mean_passes() - target).abs())
        .fold(0.0, f64::max)
}

/// As above for the turn-actions metric.
pub fn turns_deviation(summary: &SimSummary, exact: &Rat) -> f64 {
    let target = rat_to_f64(exact);
    INPUT_PAIRS
        .iter()
        .map(|&(a, b)| (summary.stats(a, b).mean_turns() - target).abs())
        .fold(0.0, f64::max)
}
