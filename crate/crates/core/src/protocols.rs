//! Concrete public-coin protocols.
//!
//! The Hamming-distance test used as a building block is a bucket-parity sketch:
//! a shared random map sends each position to one of `b` buckets, Alice sends the
//! parity of her bits in every bucket, and Bob counts the buckets whose parity
//! differs from his own. A differing bucket needs at least one differing
//! position, so the count never exceeds `|x ^ y|` and the test can only err by
//! answering "<= d" when the truth is "> d". With `b = 2(d+1)^2` two of `d + 1`
//! differing positions collide with probability below 1/4, which is the
//! per-repetition error at `|x ^ y| = d + 1`. Repetitions vote with ANY.
//!
//! Tests against the upper tail `(n - r, n]` run on Alice's complemented input:
//! `|!x ^ y| = n - |x ^ y|`, so every test uses thresholds below `r` and costs
//! `O(r^2)` bits instead of `n`.

use std::str::FromStr;

use serde::Serialize;

use crate::bits::BitString;
use crate::engine::{Party, Protocol, RandomTape, Step, Transcript};
use crate::error::{Error, Result};
use crate::symfun::{GapParams, SymmetricProfile, TrivialClass};

/// `min(2(d+1)^2, n)`.
pub fn default_buckets(n: usize, d: usize) -> usize {
    let d1 = d.saturating_add(1);
    d1.saturating_mul(d1).saturating_mul(2).min(n)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub struct HamConfig {
    pub d: usize,
    pub buckets: usize,
    pub repetitions: usize,
}

impl HamConfig {
    pub fn new(n: usize, d: usize, repetitions: usize) -> Self {
        Self {
            d,
            buckets: default_buckets(n, d),
            repetitions,
        }
    }

    pub fn with_buckets(mut self, buckets: usize) -> Self {
        self.buckets = buckets;
        self
    }

    fn validate(&self) -> Result<()> {
        if self.buckets == 0 || self.repetitions == 0 {
            return Err(Error::Config(
                "buckets and repetitions must be positive".into(),
            ));
        }
        Ok(())
    }

    /// Content bits Alice sends: `repetitions * min(buckets, n)`, or 0 when `d >= n`.
    pub fn message_bits(&self, n: usize) -> usize {
        if self.d >= n {
            0
        } else {
            self.repetitions * self.buckets.min(n)
        }
    }
}

fn bucket_map(n: usize, buckets: usize, tape: &mut RandomTape) -> Vec<usize> {
    if buckets >= n {
        (0..n).collect()
    } else {
        (0..n).map(|_| tape.below(buckets)).collect()
    }
}

fn bucket_parities(input: &BitString, map: &[usize], buckets: usize) -> Vec<bool> {
    let mut parities = vec![false; buckets];
    for (i, &bucket) in map.iter().enumerate() {
        if input.get(i) {
            parities[bucket] ^= true;
        }
    }
    parities
}

/// Alice's side of the Hamming test.
pub fn ham_sketch(input: &BitString, config: &HamConfig, tape: &mut RandomTape) -> BitString {
    let n = input.len();
    let mut out = BitString::default();
    if config.d >= n {
        return out;
    }
    let buckets = config.buckets.min(n);
    for _ in 0..config.repetitions {
        let map = bucket_map(n, buckets, tape);
        for p in bucket_parities(input, &map, buckets) {
            out.push(p);
        }
    }
    out
}

/// Bob's side: `true` means "`|x ^ y| > d`". Consumes the tape exactly like [`ham_sketch`].
pub fn ham_decide(
    input: &BitString,
    config: &HamConfig,
    tape: &mut RandomTape,
    sketch: &[bool],
) -> bool {
    let n = input.len();
    if config.d >= n {
        return false;
    }
    let buckets = config.buckets.min(n);
    debug_assert_eq!(sketch.len(), buckets * config.repetitions);
    let mut above = false;
    for rep in 0..config.repetitions {
        let map = bucket_map(n, buckets, tape);
        let theirs = &sketch[rep * buckets..(rep + 1) * buckets];
        let differing = bucket_parities(input, &map, buckets)
            .iter()
            .zip(theirs)
            .filter(|(a, b)| a != b)
            .count();
        above |= differing > config.d;
    }
    above
}

/// Splits a received payload into consecutive fields.
struct Reader<'a> {
    bits: &'a [bool],
    at: usize,
}

impl<'a> Reader<'a> {
    fn new(bits: &'a BitString) -> Self {
        Self {
            bits: bits.as_slice(),
            at: 0,
        }
    }

    fn take(&mut self, len: usize) -> &'a [bool] {
        let field = &self.bits[self.at..self.at + len];
        self.at += len;
        field
    }

    fn bit(&mut self) -> bool {
        self.take(1)[0]
    }
}

fn single_bit(bit: bool) -> BitString {
    BitString::new(vec![bit])
}

// ---------------------------------------------------------------------------
// Parity and full-send
// ---------------------------------------------------------------------------

/// Alice sends `|x| mod 2`; Bob outputs `|x ^ y| mod 2`.
#[derive(Clone, Debug)]
pub struct ParityProtocol {
    n: usize,
}

impl ParityProtocol {
    pub fn new(n: usize) -> Self {
        Self { n }
    }
}

struct ParityAlice<'a>(&'a BitString);
struct ParityBob<'a>(&'a BitString);

impl Party for ParityAlice<'_> {
    fn step(&mut self, incoming: Option<&BitString>, _: &mut RandomTape) -> Step {
        match incoming {
            None => Step::Send(single_bit(self.0.parity())),
            Some(_) => Step::Send(BitString::default()),
        }
    }
}

impl Party for ParityBob<'_> {
    fn step(&mut self, incoming: Option<&BitString>, _: &mut RandomTape) -> Step {
        let b = incoming.expect("Bob always receives").get(0);
        Step::Output(b ^ self.0.parity())
    }
}

impl Protocol for ParityProtocol {
    fn name(&self) -> &str {
        "parity"
    }
    fn n(&self) -> usize {
        self.n
    }
    fn one_way(&self) -> bool {
        true
    }
    fn alice<'a>(&'a self, x: &'a BitString) -> Box<dyn Party + 'a> {
        Box::new(ParityAlice(x))
    }
    fn bob<'a>(&'a self, y: &'a BitString) -> Box<dyn Party + 'a> {
        Box::new(ParityBob(y))
    }
}

/// Alice sends all of `x`; Bob evaluates `F` exactly.
#[derive(Clone, Debug)]
pub struct FullSendProtocol {
    profile: SymmetricProfile,
}

impl FullSendProtocol {
    pub fn new(profile: SymmetricProfile) -> Self {
        Self { profile }
    }
}

struct FullSendAlice<'a>(&'a BitString);
struct FullSendBob<'a> {
    profile: &'a SymmetricProfile,
    y: &'a BitString,
}

impl Party for FullSendAlice<'_> {
    fn step(&mut self, incoming: Option<&BitString>, _: &mut RandomTape) -> Step {
        match incoming {
            None => Step::Send(self.0.clone()),
            Some(_) => Step::Send(BitString::default()),
        }
    }
}

impl Party for FullSendBob<'_> {
    fn step(&mut self, incoming: Option<&BitString>, _: &mut RandomTape) -> Step {
        let x = incoming.expect("Bob always receives");
        let distance = x.xor(self.y).expect("equal lengths").weight();
        Step::Output(self.profile.value(distance))
    }
}

impl Protocol for FullSendProtocol {
    fn name(&self) -> &str {
        "fullsend"
    }
    fn n(&self) -> usize {
        self.profile.n()
    }
    fn one_way(&self) -> bool {
        true
    }
    fn alice<'a>(&'a self, x: &'a BitString) -> Box<dyn Party + 'a> {
        Box::new(FullSendAlice(x))
    }
    fn bob<'a>(&'a self, y: &'a BitString) -> Box<dyn Party + 'a> {
        Box::new(FullSendBob {
            profile: &self.profile,
            y,
        })
    }
}

// ---------------------------------------------------------------------------
// Hamming distance
// ---------------------------------------------------------------------------

/// One-way test for `|x ^ y| > d` with one-sided error.
#[derive(Clone, Debug)]
pub struct HamProtocol {
    n: usize,
    config: HamConfig,
}

impl HamProtocol {
    pub fn new(n: usize, config: HamConfig) -> Result<Self> {
        config.validate()?;
        Ok(Self { n, config })
    }

    pub fn config(&self) -> &HamConfig {
        &self.config
    }
}

struct HamAlice<'a> {
    config: &'a HamConfig,
    x: &'a BitString,
}

struct HamBob<'a> {
    config: &'a HamConfig,
    y: &'a BitString,
}

impl Party for HamAlice<'_> {
    fn step(&mut self, incoming: Option<&BitString>, tape: &mut RandomTape) -> Step {
        match incoming {
            None => Step::Send(ham_sketch(self.x, self.config, tape)),
            Some(_) => Step::Send(BitString::default()),
        }
    }
}

impl Party for HamBob<'_> {
    fn step(&mut self, incoming: Option<&BitString>, tape: &mut RandomTape) -> Step {
        let sketch = incoming.expect("Bob always receives");
        Step::Output(ham_decide(self.y, self.config, tape, sketch.as_slice()))
    }
}

impl Protocol for HamProtocol {
    fn name(&self) -> &str {
        "ham"
    }
    fn n(&self) -> usize {
        self.n
    }
    fn one_way(&self) -> bool {
        true
    }
    fn alice<'a>(&'a self, x: &'a BitString) -> Box<dyn Party + 'a> {
        Box::new(HamAlice {
            config: &self.config,
            x,
        })
    }
    fn bob<'a>(&'a self, y: &'a BitString) -> Box<dyn Party + 'a> {
        Box::new(HamBob {
            config: &self.config,
            y,
        })
    }
}

// ---------------------------------------------------------------------------
// Symmetric XOR protocols
// ---------------------------------------------------------------------------

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub struct XorProtocolConfig {
    /// Repetitions of each region test.
    pub region_reps: usize,
    /// Multiplier for the per-probe (two-way) and per-candidate (one-way) repetitions.
    pub search_rep_factor: usize,
}

impl Default for XorProtocolConfig {
    fn default() -> Self {
        Self {
            region_reps: 5,
            search_rep_factor: 2,
        }
    }
}

impl XorProtocolConfig {
    fn validate(&self) -> Result<()> {
        if self.region_reps == 0 || self.search_rep_factor == 0 {
            return Err(Error::Config(
                "region_reps and search_rep_factor must be positive".into(),
            ));
        }
        Ok(())
    }

    /// `ceil(factor * log2 log2 max(r, 4))` repetitions per binary-search probe.
    pub fn search_reps(&self, r: usize) -> usize {
        let r = r.max(4) as f64;
        ((self.search_rep_factor as f64 * r.log2().log2()).ceil() as usize).max(1)
    }

    /// `ceil(factor * log2 max(r, 2))` repetitions per one-way candidate test.
    pub fn candidate_reps(&self, r: usize) -> usize {
        let r = r.max(2) as f64;
        ((self.search_rep_factor as f64 * r.log2()).ceil() as usize).max(1)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum Region {
    Low,
    Middle,
    High,
}

/// Everything both parties derive from the public profile before talking.
#[derive(Clone, Debug)]
struct XorPlan {
    profile: SymmetricProfile,
    gap: GapParams,
    config: XorProtocolConfig,
    /// `[r, n - r]` is empty, so one test at `d = r - 1` separates the tails.
    merged: bool,
}

impl XorPlan {
    fn new(profile: SymmetricProfile, config: XorProtocolConfig) -> Result<Self> {
        config.validate()?;
        let gap = profile.gap_params();
        let merged = gap.r > profile.n() - gap.r;
        Ok(Self {
            profile,
            gap,
            config,
            merged,
        })
    }

    fn n(&self) -> usize {
        self.profile.n()
    }

    fn region_test(&self) -> HamConfig {
        HamConfig::new(self.n(), self.gap.r - 1, self.config.region_reps)
    }

    fn region_tests(&self) -> usize {
        if self.merged {
            1
        } else {
            2
        }
    }

    /// `low_above`: the direct test said `|x ^ y| >= r`;
    /// `high_above`: the complemented test said `n - |x ^ y| >= r`.
    fn region(&self, low_above: bool, high_above: Option<bool>) -> Region {
        match high_above {
            None if low_above => Region::High,
            None => Region::Low,
            Some(true) if low_above => Region::Middle,
            Some(true) => Region::Low,
            Some(false) if low_above => Region::High,
            // Both tails claimed; fall back to the lower one.
            Some(false) => Region::Low,
        }
    }

    /// `S` at the least weight in `[r, n - r]` with the given parity, or `S(r)`.
    fn middle_answer(&self, odd: bool) -> bool {
        let (r, n) = (self.gap.r, self.n());
        let k = (r..=n - r).find(|k| (k % 2 == 1) == odd).unwrap_or(r);
        self.profile.value(k)
    }

    /// Answer for a tail distance found in complemented coordinates when `high`.
    fn tail_answer(&self, high: bool, distance: usize) -> bool {
        let m = if high { self.n() - distance } else { distance };
        self.profile.value(m)
    }

    fn trivial_answer(&self, x_parity: bool, y_parity: bool) -> bool {
        match self.gap.trivial_class {
            TrivialClass::Const0 => false,
            TrivialClass::Const1 => true,
            TrivialClass::Parity => x_parity ^ y_parity,
            TrivialClass::NotParity => !(x_parity ^ y_parity),
            TrivialClass::Nontrivial => unreachable!("r > 0 for nontrivial profiles"),
        }
    }

    fn trivial_message(&self, x: &BitString) -> BitString {
        match self.gap.trivial_class {
            TrivialClass::Const0 | TrivialClass::Const1 => BitString::default(),
            _ => single_bit(x.parity()),
        }
    }

    fn trivial_bits(&self) -> usize {
        match self.gap.trivial_class {
            TrivialClass::Const0 | TrivialClass::Const1 => 0,
            _ => 1,
        }
    }
}

/// Interactive protocol: region tests, then parity in the middle or a binary
/// search for the exact distance in a tail.
#[derive(Clone, Debug)]
pub struct SymXorTwoWay {
    plan: XorPlan,
}

impl SymXorTwoWay {
    pub fn new(profile: SymmetricProfile, config: XorProtocolConfig) -> Result<Self> {
        Ok(Self {
            plan: XorPlan::new(profile, config)?,
        })
    }

    pub fn gap(&self) -> &GapParams {
        &self.plan.gap
    }

    fn probe(&self, mid: usize) -> HamConfig {
        let reps = self.plan.config.search_reps(self.plan.gap.r);
        HamConfig::new(self.plan.n(), mid, reps)
    }

    /// Content bits predicted from the phases the transcript went through:
    /// `tests * region_reps * b(r-1) + 1` for the region phase, then, if a tail
    /// was searched, `1 + sum over probes of (reps * b(mid) + 1)`.
    pub fn expected_content_bits(&self, transcript: &Transcript) -> usize {
        let plan = &self.plan;
        if plan.gap.r == 0 {
            return plan.trivial_bits();
        }
        let n = plan.n();
        let mut bits = plan.region_tests() * plan.region_test().message_bits(n) + 1;
        let mut feedback = transcript.bob_content();
        if feedback.next().is_none() {
            return bits;
        }
        bits += 1;
        let (mut lo, mut hi) = (0, plan.gap.r - 1);
        for outcome in feedback {
            let mid = (lo + hi) / 2;
            bits += self.probe(mid).message_bits(n) + 1;
            if outcome.get(0) {
                lo = mid + 1;
            } else {
                hi = mid;
            }
        }
        bits
    }
}

enum TwoWayAliceStage {
    Start,
    AwaitTail,
    Search { lo: usize, hi: usize },
    Done,
}

struct TwoWayAlice<'a> {
    protocol: &'a SymXorTwoWay,
    x: &'a BitString,
    complement: BitString,
    high: bool,
    stage: TwoWayAliceStage,
}

impl TwoWayAlice<'_> {
    fn view(&self) -> &BitString {
        if self.high {
            &self.complement
        } else {
            self.x
        }
    }

    fn send_probe(&mut self, lo: usize, hi: usize, tape: &mut RandomTape) -> Step {
        if lo == hi {
            self.stage = TwoWayAliceStage::Done;
            return Step::Send(BitString::default());
        }
        self.stage = TwoWayAliceStage::Search { lo, hi };
        let config = self.protocol.probe((lo + hi) / 2);
        Step::Send(ham_sketch(self.view(), &config, tape))
    }
}

impl Party for TwoWayAlice<'_> {
    fn step(&mut self, incoming: Option<&BitString>, tape: &mut RandomTape) -> Step {
        let plan = &self.protocol.plan;
        match self.stage {
            TwoWayAliceStage::Start => {
                if plan.gap.r == 0 {
                    self.stage = TwoWayAliceStage::Done;
                    return Step::Send(plan.trivial_message(self.x));
                }
                let region = plan.region_test();
                let mut msg = ham_sketch(self.x, &region, tape);
                if !plan.merged {
                    msg.extend_from(&ham_sketch(&self.complement, &region, tape));
                }
                msg.push(self.x.parity());
                self.stage = TwoWayAliceStage::AwaitTail;
                Step::Send(msg)
            }
            TwoWayAliceStage::AwaitTail => {
                let tail = incoming.expect("Bob replied");
                self.high = tail.get(0);
                self.send_probe(0, plan.gap.r - 1, tape)
            }
            TwoWayAliceStage::Search { lo, hi } => {
                let mid = (lo + hi) / 2;
                let above = incoming.expect("Bob replied").get(0);
                let (lo, hi) = if above { (mid + 1, hi) } else { (lo, mid) };
                self.send_probe(lo, hi, tape)
            }
            TwoWayAliceStage::Done => Step::Send(BitString::default()),
        }
    }
}

enum TwoWayBobStage {
    Start,
    Search { high: bool, lo: usize, hi: usize },
}

struct TwoWayBob<'a> {
    protocol: &'a SymXorTwoWay,
    y: &'a BitString,
    stage: TwoWayBobStage,
}

impl Party for TwoWayBob<'_> {
    fn step(&mut self, incoming: Option<&BitString>, tape: &mut RandomTape) -> Step {
        let plan = &self.protocol.plan;
        let msg = incoming.expect("Bob always receives");
        match self.stage {
            TwoWayBobStage::Start => {
                if plan.gap.r == 0 {
                    let x_parity = !msg.is_empty() && msg.get(0);
                    return Step::Output(plan.trivial_answer(x_parity, self.y.parity()));
                }
                let region = plan.region_test();
                let len = region.message_bits(plan.n());
                let mut reader = Reader::new(msg);
                let low_above = ham_decide(self.y, &region, tape, reader.take(len));
                let high_above = (!plan.merged)
                    .then(|| ham_decide(self.y, &region, tape, reader.take(len)));
                let x_parity = reader.bit();
                let high = match plan.region(low_above, high_above) {
                    Region::Middle => {
                        return Step::Output(plan.middle_answer(x_parity ^ self.y.parity()))
                    }
                    Region::Low => false,
                    Region::High => true,
                };
                if plan.gap.r == 1 {
                    return Step::Output(plan.tail_answer(high, 0));
                }
                self.stage = TwoWayBobStage::Search {
                    high,
                    lo: 0,
                    hi: plan.gap.r - 1,
                };
                Step::Send(single_bit(high))
            }
            TwoWayBobStage::Search { high, lo, hi } => {
                if lo == hi {
                    return Step::Output(plan.tail_answer(high, lo));
                }
                let mid = (lo + hi) / 2;
                let above = ham_decide(self.y, &self.protocol.probe(mid), tape, msg.as_slice());
                let (lo, hi) = if above { (mid + 1, hi) } else { (lo, mid) };
                self.stage = TwoWayBobStage::Search { high, lo, hi };
                Step::Send(single_bit(above))
            }
        }
    }
}

impl Protocol for SymXorTwoWay {
    fn name(&self) -> &str {
        "xor2way"
    }
    fn n(&self) -> usize {
        self.plan.n()
    }
    fn one_way(&self) -> bool {
        false
    }
    fn alice<'a>(&'a self, x: &'a BitString) -> Box<dyn Party + 'a> {
        Box::new(TwoWayAlice {
            protocol: self,
            x,
            complement: x.complement(),
            high: false,
            stage: TwoWayAliceStage::Start,
        })
    }
    fn bob<'a>(&'a self, y: &'a BitString) -> Box<dyn Party + 'a> {
        Box::new(TwoWayBob {
            protocol: self,
            y,
            stage: TwoWayBobStage::Start,
        })
    }
}

/// One-way protocol: Alice sends the parity, the region tests and, for every
/// tail candidate `v`, the tests at `d = v - 1` and `d = v`; Bob decodes alone.
#[derive(Clone, Debug)]
pub struct SymXorOneWay {
    plan: XorPlan,
}

impl SymXorOneWay {
    pub fn new(profile: SymmetricProfile, config: XorProtocolConfig) -> Result<Self> {
        Ok(Self {
            plan: XorPlan::new(profile, config)?,
        })
    }

    pub fn gap(&self) -> &GapParams {
        &self.plan.gap
    }

    /// Candidate tests in send order: for `v` in `0..r`, `d = v - 1` (skipped
    /// at `v = 0`, where it is vacuous) then `d = v`.
    fn candidate_tests(&self) -> Vec<(usize, HamConfig)> {
        let plan = &self.plan;
        let reps = plan.config.candidate_reps(plan.gap.r);
        let n = plan.n();
        let mut tests = Vec::new();
        for v in 0..plan.gap.r {
            if v > 0 {
                tests.push((v, HamConfig::new(n, v - 1, reps)));
            }
            tests.push((v, HamConfig::new(n, v, reps)));
        }
        tests
    }

    /// `1 + tests * region_reps * b(r-1) + 2 * sum_v reps * (b(v-1) + b(v))`.
    pub fn expected_content_bits(&self) -> usize {
        let plan = &self.plan;
        if plan.gap.r == 0 {
            return plan.trivial_bits();
        }
        let n = plan.n();
        let candidates: usize = self
            .candidate_tests()
            .iter()
            .map(|(_, c)| c.message_bits(n))
            .sum();
        1 + plan.region_tests() * plan.region_test().message_bits(n) + 2 * candidates
    }

    /// Smallest `v` whose tests read "> v - 1" and "<= v".
    fn decode_tail(&self, verdicts: &[bool]) -> Option<usize> {
        let mut it = verdicts.iter().copied();
        for v in 0..self.plan.gap.r {
            let above_prev = if v > 0 { it.next().expect("verdict") } else { true };
            let above = it.next().expect("verdict");
            if above_prev && !above {
                return Some(v);
            }
        }
        None
    }
}

struct OneWayAlice<'a> {
    protocol: &'a SymXorOneWay,
    x: &'a BitString,
    sent: bool,
}

impl Party for OneWayAlice<'_> {
    fn step(&mut self, _: Option<&BitString>, tape: &mut RandomTape) -> Step {
        if self.sent {
            return Step::Send(BitString::default());
        }
        self.sent = true;
        let plan = &self.protocol.plan;
        if plan.gap.r == 0 {
            return Step::Send(plan.trivial_message(self.x));
        }
        let complement = self.x.complement();
        let region = plan.region_test();
        let mut msg = single_bit(self.x.parity());
        msg.extend_from(&ham_sketch(self.x, &region, tape));
        if !plan.merged {
            msg.extend_from(&ham_sketch(&complement, &region, tape));
        }
        for view in [self.x, &complement] {
            for (_, config) in self.protocol.candidate_tests() {
                msg.extend_from(&ham_sketch(view, &config, tape));
            }
        }
        Step::Send(msg)
    }
}

struct OneWayBob<'a> {
    protocol: &'a SymXorOneWay,
    y: &'a BitString,
}

impl Party for OneWayBob<'_> {
    fn step(&mut self, incoming: Option<&BitString>, tape: &mut RandomTape) -> Step {
        let plan = &self.protocol.plan;
        let msg = incoming.expect("Bob always receives");
        if plan.gap.r == 0 {
            let x_parity = !msg.is_empty() && msg.get(0);
            return Step::Output(plan.trivial_answer(x_parity, self.y.parity()));
        }
        let n = plan.n();
        let mut reader = Reader::new(msg);
        let x_parity = reader.bit();
        let region = plan.region_test();
        let len = region.message_bits(n);
        let low_above = ham_decide(self.y, &region, tape, reader.take(len));
        let high_above =
            (!plan.merged).then(|| ham_decide(self.y, &region, tape, reader.take(len)));
        let tests = self.protocol.candidate_tests();
        let mut verdicts = [Vec::new(), Vec::new()];
        for tail in &mut verdicts {
            for (_, config) in &tests {
                let len = config.message_bits(n);
                tail.push(ham_decide(self.y, config, tape, reader.take(len)));
            }
        }
        let high = match plan.region(low_above, high_above) {
            Region::Middle => return Step::Output(plan.middle_answer(x_parity ^ self.y.parity())),
            Region::Low => false,
            Region::High => true,
        };
        match self.protocol.decode_tail(&verdicts[usize::from(high)]) {
            Some(v) => Step::Output(plan.tail_answer(high, v)),
            None => Step::Output(plan.profile.value(0)),
        }
    }
}

impl Protocol for SymXorOneWay {
    fn name(&self) -> &str {
        "xor1way"
    }
    fn n(&self) -> usize {
        self.plan.n()
    }
    fn one_way(&self) -> bool {
        true
    }
    fn alice<'a>(&'a self, x: &'a BitString) -> Box<dyn Party + 'a> {
        Box::new(OneWayAlice {
            protocol: self,
            x,
            sent: false,
        })
    }
    fn bob<'a>(&'a self, y: &'a BitString) -> Box<dyn Party + 'a> {
        Box::new(OneWayBob { protocol: self, y })
    }
}

// ---------------------------------------------------------------------------
// Construction by name
// ---------------------------------------------------------------------------

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum ProtocolKind {
    Parity,
    FullSend,
    Ham,
    Xor2Way,
    Xor1Way,
}

impl ProtocolKind {
    pub const ALL: [ProtocolKind; 5] = [
        ProtocolKind::Parity,
        ProtocolKind::FullSend,
        ProtocolKind::Ham,
        ProtocolKind::Xor2Way,
        ProtocolKind::Xor1Way,
    ];

    pub fn name(self) -> &'static str {
        match self {
            ProtocolKind::Parity => "parity",
            ProtocolKind::FullSend => "fullsend",
            ProtocolKind::Ham => "ham",
            ProtocolKind::Xor2Way => "xor2way",
            ProtocolKind::Xor1Way => "xor1way",
        }
    }
}

impl FromStr for ProtocolKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Self::ALL
            .into_iter()
            .find(|k| k.name() == s)
            .ok_or_else(|| Error::UnknownProtocol(s.to_string()))
    }
}

/// Knobs shared by the CLI and the sweep harness.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct ProtocolOptions {
    /// HAM threshold; defaults to `d` of a `threshold:<d>` profile.
    pub d: Option<usize>,
    pub buckets: Option<usize>,
    pub repetitions: Option<usize>,
    pub xor: XorProtocolConfig,
}

pub fn build(
    kind: ProtocolKind,
    profile: &SymmetricProfile,
    options: &ProtocolOptions,
) -> Result<Box<dyn Protocol>> {
    let n = profile.n();
    Ok(match kind {
        ProtocolKind::Parity => Box::new(ParityProtocol::new(n)),
        ProtocolKind::FullSend => Box::new(FullSendProtocol::new(profile.clone())),
        ProtocolKind::Ham => {
            let d = options.d.or_else(|| profile.as_threshold()).ok_or_else(|| {
                Error::Config("ham needs a threshold: pass d or a threshold profile".into())
            })?;
            let mut config = HamConfig::new(n, d, options.repetitions.unwrap_or(1));
            if let Some(b) = options.buckets {
                config = config.with_buckets(b);
            }
            Box::new(HamProtocol::new(n, config)?)
        }
        ProtocolKind::Xor2Way => Box::new(SymXorTwoWay::new(profile.clone(), options.xor)?),
        ProtocolKind::Xor1Way => Box::new(SymXorOneWay::new(profile.clone(), options.xor)?),
    })
}
