//! Two-party protocol execution with exact bit accounting.
//!
//! Alice and Bob are separate [`Party`] state machines, each built from its own
//! input only. The engine alternates turns, hands each party nothing but the
//! other side's last message and its own copy of the public-coin tape, and
//! records every payload. Bob is always the output party; his answer is
//! appended as a final 1-bit Bob-to-Alice message.

use rand::{Rng, RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::bits::BitString;
use crate::error::{Error, Result};
use crate::exec::{derive_seed, Execution as ExecMode};
use crate::oracle::mc_error_estimate;
use crate::protocols::{self, ProtocolKind, ProtocolOptions};
use crate::symfun::{InputPair, SymmetricProfile};

/// Hard stop for runaway schedules.
const MAX_TURNS: usize = 1 << 16;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum Direction {
    AliceToBob,
    BobToAlice,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Message {
    pub direction: Direction,
    pub payload: BitString,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Transcript {
    messages: Vec<Message>,
    seed: u64,
    answered: bool,
}

impl Transcript {
    fn new(seed: u64) -> Self {
        Self {
            messages: Vec::new(),
            seed,
            answered: false,
        }
    }

    /// Zero-length payloads carry no information and are not recorded.
    fn record(&mut self, direction: Direction, payload: BitString) {
        if !payload.is_empty() {
            self.messages.push(Message { direction, payload });
        }
    }

    pub fn messages(&self) -> &[Message] {
        &self.messages
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn bits(&self, direction: Direction) -> usize {
        self.messages
            .iter()
            .filter(|m| m.direction == direction)
            .map(|m| m.payload.len())
            .sum()
    }

    pub fn bits_a_to_b(&self) -> usize {
        self.bits(Direction::AliceToBob)
    }

    pub fn bits_b_to_a(&self) -> usize {
        self.bits(Direction::BobToAlice)
    }

    pub fn total_bits(&self) -> usize {
        self.messages.iter().map(|m| m.payload.len()).sum()
    }

    /// Everything except Bob's final answer bit.
    pub fn content_bits(&self) -> usize {
        self.total_bits() - usize::from(self.answered)
    }

    /// Maximal blocks of same-direction messages; 0 for an empty transcript.
    pub fn rounds(&self) -> usize {
        match self.messages.first() {
            None => 0,
            Some(_) => {
                1 + self
                    .messages
                    .windows(2)
                    .filter(|w| w[0].direction != w[1].direction)
                    .count()
            }
        }
    }

    /// Bob's non-final messages.
    pub fn bob_content(&self) -> impl Iterator<Item = &BitString> {
        let last = self.messages.len().saturating_sub(usize::from(self.answered));
        self.messages[..last]
            .iter()
            .filter(|m| m.direction == Direction::BobToAlice)
            .map(|m| &m.payload)
    }

    pub fn alice_messages(&self) -> impl Iterator<Item = &BitString> {
        self.messages
            .iter()
            .filter(|m| m.direction == Direction::AliceToBob)
            .map(|m| &m.payload)
    }

    pub fn summary(&self) -> TranscriptSummary {
        TranscriptSummary {
            bits_a_to_b: self.bits_a_to_b(),
            bits_b_to_a: self.bits_b_to_a(),
            content_bits: self.content_bits(),
            total_bits: self.total_bits(),
            rounds: self.rounds(),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub struct TranscriptSummary {
    pub bits_a_to_b: usize,
    pub bits_b_to_a: usize,
    pub content_bits: usize,
    pub total_bits: usize,
    pub rounds: usize,
}

/// Shared public-coin randomness. Each party holds its own copy built from the
/// same seed, so both see the same stream as long as they read it in lock-step.
#[derive(Clone, Debug)]
pub struct RandomTape {
    seed: u64,
    position: u64,
    rng: ChaCha8Rng,
}

impl RandomTape {
    pub fn new(seed: u64) -> Self {
        Self {
            seed,
            position: 0,
            rng: ChaCha8Rng::seed_from_u64(seed),
        }
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    /// Number of draws consumed so far.
    pub fn position(&self) -> u64 {
        self.position
    }

    pub fn next_u64(&mut self) -> u64 {
        self.position += 1;
        self.rng.next_u64()
    }

    /// Uniform in `0..bound`.
    pub fn below(&mut self, bound: usize) -> usize {
        self.position += 1;
        self.rng.gen_range(0..bound)
    }
}

pub enum Step {
    Send(BitString),
    Output(bool),
}

pub trait Party {
    /// Take a turn. `incoming` is the other party's previous message (`None`
    /// on Alice's first turn; possibly empty).
    fn step(&mut self, incoming: Option<&BitString>, tape: &mut RandomTape) -> Step;
}

pub trait Protocol: Sync {
    fn name(&self) -> &str;

    fn n(&self) -> usize;

    /// One-way protocols may not send anything from Bob except the final answer.
    fn one_way(&self) -> bool;

    fn alice<'a>(&'a self, x: &'a BitString) -> Box<dyn Party + 'a>;

    fn bob<'a>(&'a self, y: &'a BitString) -> Box<dyn Party + 'a>;
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Execution {
    pub output: bool,
    pub transcript: Transcript,
}

pub fn run_protocol(protocol: &dyn Protocol, pair: &InputPair, seed: u64) -> Result<Execution> {
    if pair.n() != protocol.n() {
        return Err(Error::LengthMismatch {
            expected: protocol.n(),
            actual: pair.n(),
        });
    }
    let violation = |reason| Error::ScheduleViolation {
        protocol: protocol.name().to_string(),
        reason,
    };
    let mut alice = protocol.alice(pair.x());
    let mut bob = protocol.bob(pair.y());
    let mut alice_tape = RandomTape::new(seed);
    let mut bob_tape = RandomTape::new(seed);
    let mut transcript = Transcript::new(seed);
    let mut to_alice: Option<BitString> = None;

    for _ in 0..MAX_TURNS {
        let to_bob = match alice.step(to_alice.as_ref(), &mut alice_tape) {
            Step::Send(payload) => payload,
            Step::Output(_) => return Err(violation("only Bob produces the output")),
        };
        transcript.record(Direction::AliceToBob, to_bob.clone());
        match bob.step(Some(&to_bob), &mut bob_tape) {
            Step::Send(payload) => {
                if protocol.one_way() && !payload.is_empty() {
                    return Err(violation("Bob sent content in a one-way protocol"));
                }
                transcript.record(Direction::BobToAlice, payload.clone());
                to_alice = Some(payload);
            }
            Step::Output(bit) => {
                transcript.record(Direction::BobToAlice, BitString::new(vec![bit]));
                transcript.answered = true;
                return Ok(Execution {
                    output: bit,
                    transcript,
                });
            }
        }
    }
    Err(violation("no output after the turn limit"))
}

/// Outcome of one scored run.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct ProtocolReport {
    pub protocol: String,
    pub output: bool,
    pub truth: bool,
    pub correct: bool,
    pub distance: usize,
    #[serde(flatten)]
    pub summary: TranscriptSummary,
    pub seed: u64,
}

pub fn score(
    protocol: &dyn Protocol,
    pair: &InputPair,
    truth: bool,
    seed: u64,
) -> Result<ProtocolReport> {
    let run = run_protocol(protocol, pair, seed)?;
    Ok(ProtocolReport {
        protocol: protocol.name().to_string(),
        output: run.output,
        truth,
        correct: run.output == truth,
        distance: pair.distance(),
        summary: run.transcript.summary(),
        seed,
    })
}

/// One `(n, weight)` cell of a sweep.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SweepRow {
    pub n: usize,
    pub family: String,
    pub r0: usize,
    pub r1: usize,
    pub r: usize,
    pub protocol: String,
    pub weight: usize,
    pub trials: u64,
    pub success_rate: f64,
    pub mean_bits: f64,
    pub max_bits: u64,
    pub rounds_mean: f64,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SweepSpec<'a> {
    pub protocol: ProtocolKind,
    pub options: ProtocolOptions,
    /// Profile mini-language, instantiated at every `n`.
    pub family: &'a str,
    pub ns: &'a [usize],
    /// `None` runs every weight `0..=n`.
    pub weights: Option<&'a [usize]>,
    pub trials: u64,
    pub seed: u64,
}

/// Monte-Carlo statistics for every `(n, weight)`, sorted by `(n, weight)`.
pub fn sweep(spec: &SweepSpec<'_>, exec: ExecMode) -> Result<Vec<SweepRow>> {
    let mut ns = spec.ns.to_vec();
    ns.sort_unstable();
    ns.dedup();
    let mut rows = Vec::new();
    for n in ns {
        let profile = SymmetricProfile::parse(spec.family, n)?;
        let gap = profile.gap_params();
        let protocol = protocols::build(spec.protocol, &profile, &spec.options)?;
        let mut weights: Vec<usize> = match spec.weights {
            Some(w) => w.iter().copied().filter(|&m| m <= n).collect(),
            None => (0..=n).collect(),
        };
        weights.sort_unstable();
        weights.dedup();
        for m in weights {
            let cell_seed = derive_seed(derive_seed(spec.seed, n as u64, 3), m as u64, 4);
            let stats =
                mc_error_estimate(protocol.as_ref(), &profile, m, spec.trials, cell_seed, exec)?;
            rows.push(SweepRow {
                n,
                family: spec.family.to_string(),
                r0: gap.r0,
                r1: gap.r1,
                r: gap.r,
                protocol: spec.protocol.name().to_string(),
                weight: m,
                trials: stats.trials,
                success_rate: stats.success_rate,
                mean_bits: stats.mean_bits,
                max_bits: stats.max_bits,
                rounds_mean: stats.rounds_mean,
            });
        }
    }
    Ok(rows)
}

#[cfg(test)]
mod tests {
    use super::*;

    /// Alice sends her input; Bob echoes a chosen number of bits back, then answers.
    struct Echo {
        n: usize,
        one_way: bool,
        replies: usize,
    }

    struct EchoAlice<'a>(&'a BitString);
    struct EchoBob {
        left: usize,
    }

    impl Party for EchoAlice<'_> {
        fn step(&mut self, incoming: Option<&BitString>, _: &mut RandomTape) -> Step {
            match incoming {
                None => Step::Send(self.0.clone()),
                Some(_) => Step::Send(BitString::zeros(1)),
            }
        }
    }

    impl Party for EchoBob {
        fn step(&mut self, _: Option<&BitString>, _: &mut RandomTape) -> Step {
            if self.left == 0 {
                Step::Output(true)
            } else {
                self.left -= 1;
                Step::Send(BitString::zeros(2))
            }
        }
    }

    impl Protocol for Echo {
        fn name(&self) -> &str {
            "echo"
        }
        fn n(&self) -> usize {
            self.n
        }
        fn one_way(&self) -> bool {
            self.one_way
        }
        fn alice<'a>(&'a self, x: &'a BitString) -> Box<dyn Party + 'a> {
            Box::new(EchoAlice(x))
        }
        fn bob<'a>(&'a self, _: &'a BitString) -> Box<dyn Party + 'a> {
            Box::new(EchoBob {
                left: self.replies,
            })
        }
    }

    fn pair(n: usize) -> InputPair {
        InputPair::new(BitString::zeros(n), BitString::zeros(n)).unwrap()
    }

    #[test]
    fn bit_accounting_and_rounds() {
        let run = run_protocol(
            &Echo {
                n: 5,
                one_way: false,
                replies: 2,
            },
            &pair(5),
            3,
        )
        .unwrap();
        let t = &run.transcript;
        // A:5, B:2, A:1, B:2, A:1, B:answer
        assert_eq!(t.bits_a_to_b(), 7);
        assert_eq!(t.bits_b_to_a(), 5);
        assert_eq!(t.total_bits(), 12);
        assert_eq!(t.content_bits(), 11);
        assert_eq!(t.rounds(), 6);
        assert_eq!(
            t.total_bits(),
            t.messages().iter().map(|m| m.payload.len()).sum::<usize>()
        );
        assert_eq!(t.bob_content().count(), 2);
    }

    #[test]
    fn one_way_violation_is_reported() {
        let err = run_protocol(
            &Echo {
                n: 3,
                one_way: true,
                replies: 1,
            },
            &pair(3),
            0,
        )
        .unwrap_err();
        assert!(matches!(err, Error::ScheduleViolation { .. }));
        assert!(run_protocol(
            &Echo {
                n: 3,
                one_way: true,
                replies: 0,
            },
            &pair(3),
            0,
        )
        .is_ok());
    }

    #[test]
    fn length_mismatch_is_rejected() {
        let err = run_protocol(
            &Echo {
                n: 4,
                one_way: false,
                replies: 0,
            },
            &pair(3),
            0,
        )
        .unwrap_err();
        assert!(matches!(err, Error::LengthMismatch { .. }));
    }

    #[test]
    fn empty_transcript_has_zero_rounds() {
        assert_eq!(Transcript::new(0).rounds(), 0);
    }

    #[test]
    fn sweep_shapes() {
        let base = SweepSpec {
            protocol: ProtocolKind::Parity,
            options: ProtocolOptions::default(),
            family: "parity",
            ns: &[],
            weights: None,
            trials: 1,
            seed: 4,
        };
        assert!(sweep(&base, ExecMode::Sequential).unwrap().is_empty());

        let one = SweepSpec {
            ns: &[6],
            weights: Some(&[2]),
            ..base.clone()
        };
        let a = sweep(&one, ExecMode::Sequential).unwrap();
        assert_eq!(a.len(), 1);
        assert_eq!(a, sweep(&one, ExecMode::Parallel).unwrap());

        let all = SweepSpec {
            ns: &[5, 3],
            ..base
        };
        let rows = sweep(&all, ExecMode::default()).unwrap();
        let keys: Vec<_> = rows.iter().map(|r| (r.n, r.weight)).collect();
        let mut sorted = keys.clone();
        sorted.sort();
        assert_eq!(keys, sorted);
        assert_eq!(rows.len(), 4 + 6);
    }

    #[test]
    fn tape_is_replayable() {
        let mut a = RandomTape::new(11);
        let mut b = RandomTape::new(11);
        let xs: Vec<_> = (0..50).map(|_| a.below(7)).collect();
        let ys: Vec<_> = (0..50).map(|_| b.below(7)).collect();
        assert_eq!(xs, ys);
        assert_eq!(a.position(), 50);
        assert_ne!(RandomTape::new(12).next_u64(), RandomTape::new(11).next_u64());
    }
}
