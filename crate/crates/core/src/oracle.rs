//! Brute-force references the spectral and protocol code is checked against.
//!
//! Nothing here reuses the Krawtchouk machinery for cross-checks: Fourier
//! coefficients are summed over the whole truth table and ranks come from exact
//! elimination on the full `2^n x 2^n` matrix `[f(x ^ y)]`.

use num_bigint::BigInt;
use num_traits::{One, Zero};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::bits::BitString;
use crate::engine::{run_protocol, Protocol};
use crate::error::{Error, Result};
use crate::exec::{derive_seed, Execution};
use crate::spectral::KrawtchoukTable;
use crate::symfun::{InputPair, SymmetricProfile};

pub const MAX_TABLE_N: usize = 16;
pub const MAX_RANK_N: usize = 10;
pub const MAX_SCAN_N: usize = 22;

fn check_n(what: &'static str, n: usize, max: usize) -> Result<()> {
    if n > max {
        return Err(Error::OutOfRange {
            what,
            value: n,
            max,
        });
    }
    if n == 0 {
        return Err(Error::EmptyInput);
    }
    Ok(())
}

/// Arbitrary `f : {0,1}^n -> {0,1}`, indexed by `x` read as a little-endian mask.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct TruthTable {
    n: usize,
    values: Vec<bool>,
}

impl TruthTable {
    pub fn new(n: usize, values: Vec<bool>) -> Result<Self> {
        check_n("n", n, MAX_TABLE_N)?;
        if values.len() != 1 << n {
            return Err(Error::LengthMismatch {
                expected: 1 << n,
                actual: values.len(),
            });
        }
        Ok(Self { n, values })
    }

    pub fn from_fn(n: usize, f: impl Fn(u64) -> bool) -> Result<Self> {
        check_n("n", n, MAX_TABLE_N)?;
        Self::new(n, (0..1u64 << n).map(f).collect())
    }

    /// `f(x) = S(|x|)`.
    pub fn from_profile(profile: &SymmetricProfile) -> Result<Self> {
        Self::from_fn(profile.n(), |x| profile.value(x.count_ones() as usize))
    }

    pub fn random<R: Rng + ?Sized>(n: usize, rng: &mut R) -> Result<Self> {
        check_n("n", n, MAX_TABLE_N)?;
        Self::new(n, (0..1u64 << n).map(|_| rng.gen()).collect())
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn value(&self, x: u64) -> bool {
        self.values[x as usize]
    }
}

/// `2^n f~(w) = sum_x (-1)^(x . w) f(x)`.
pub fn brute_fourier(table: &TruthTable, w: &BitString) -> Result<i64> {
    if w.len() != table.n {
        return Err(Error::LengthMismatch {
            expected: table.n,
            actual: w.len(),
        });
    }
    Ok(brute_fourier_mask(table, w.to_mask()))
}

pub fn brute_fourier_mask(table: &TruthTable, w: u64) -> i64 {
    (0..1u64 << table.n)
        .filter(|&x| table.value(x))
        .map(|x| if (x & w).count_ones().is_multiple_of(2) { 1 } else { -1 })
        .sum()
}

/// `||f~||_0`: number of characters with a nonzero coefficient.
pub fn fourier_support_size(table: &TruthTable) -> usize {
    (0..1u64 << table.n)
        .filter(|&w| brute_fourier_mask(table, w) != 0)
        .count()
}

/// Exact rank over the rationals of `[f(x ^ y)]_{x,y}`.
pub fn brute_rank(table: &TruthTable) -> Result<usize> {
    check_n("n", table.n, MAX_RANK_N)?;
    let size = 1u64 << table.n;
    let matrix = (0..size)
        .map(|x| (0..size).map(|y| i64::from(table.value(x ^ y))).collect())
        .collect();
    Ok(exact_rank(matrix))
}

/// Exact rank over the rationals.
///
/// Eliminates modulo 31-bit primes: `rank mod p <= rank` always, and a prime
/// can only undercount if it divides some nonzero `r x r` minor. Every minor
/// is bounded by the Hadamard product of row norms `H`, so once the primes
/// used multiply past `H` their maximum is the exact rank. Matrices needing
/// more primes than available go through fraction-free (Bareiss) elimination.
pub fn exact_rank(matrix: Vec<Vec<i64>>) -> usize {
    let full = matrix.len().min(matrix.first().map_or(0, Vec::len));
    let needed = ((hadamard_log2(&matrix) + 32.0) / 30.0).ceil() as usize;
    if needed > MODULAR_RANKS.len() {
        return exact_rank_big(matrix);
    }
    let mut best = 0;
    for rank_mod in &MODULAR_RANKS[..needed] {
        best = best.max(rank_mod(&matrix));
        if best == full {
            break;
        }
    }
    best
}

/// `log2` of the product of row norms (rows of norm below 1 count as 1).
fn hadamard_log2(matrix: &[Vec<i64>]) -> f64 {
    matrix
        .iter()
        .map(|row| {
            let norm2: f64 = row.iter().map(|&v| (v as f64) * (v as f64)).sum();
            0.5 * norm2.max(1.0).log2()
        })
        .sum()
}

/// Primes in `(2^30, 2^31)`, each monomorphized so `% P` compiles to a multiply.
type RankMod = fn(&[Vec<i64>]) -> usize;

const MODULAR_RANKS: [RankMod; 48] = [
    rank_mod::<2147483647>,
    rank_mod::<2147483629>,
    rank_mod::<2147483587>,
    rank_mod::<2147483579>,
    rank_mod::<2147483563>,
    rank_mod::<2147483549>,
    rank_mod::<2147483543>,
    rank_mod::<2147483497>,
    rank_mod::<2147483489>,
    rank_mod::<2147483477>,
    rank_mod::<2147483423>,
    rank_mod::<2147483399>,
    rank_mod::<2147483353>,
    rank_mod::<2147483323>,
    rank_mod::<2147483269>,
    rank_mod::<2147483249>,
    rank_mod::<2147483237>,
    rank_mod::<2147483179>,
    rank_mod::<2147483171>,
    rank_mod::<2147483137>,
    rank_mod::<2147483123>,
    rank_mod::<2147483077>,
    rank_mod::<2147483069>,
    rank_mod::<2147483059>,
    rank_mod::<2147483053>,
    rank_mod::<2147483033>,
    rank_mod::<2147483029>,
    rank_mod::<2147482951>,
    rank_mod::<2147482949>,
    rank_mod::<2147482943>,
    rank_mod::<2147482937>,
    rank_mod::<2147482921>,
    rank_mod::<2147482877>,
    rank_mod::<2147482873>,
    rank_mod::<2147482867>,
    rank_mod::<2147482859>,
    rank_mod::<2147482819>,
    rank_mod::<2147482817>,
    rank_mod::<2147482811>,
    rank_mod::<2147482801>,
    rank_mod::<2147482763>,
    rank_mod::<2147482739>,
    rank_mod::<2147482697>,
    rank_mod::<2147482693>,
    rank_mod::<2147482681>,
    rank_mod::<2147482663>,
    rank_mod::<2147482661>,
    rank_mod::<2147482621>,
];

fn rank_mod<const P: u64>(matrix: &[Vec<i64>]) -> usize {
    let mut a: Vec<Vec<u64>> = matrix
        .iter()
        .map(|row| row.iter().map(|&v| v.rem_euclid(P as i64) as u64).collect())
        .collect();
    let rows = a.len();
    let cols = a.first().map_or(0, Vec::len);
    let mut rank = 0;
    for col in 0..cols {
        if rank == rows {
            break;
        }
        let Some(pivot) = (rank..rows).find(|&i| a[i][col] != 0) else {
            continue;
        };
        a.swap(rank, pivot);
        let (head, tail) = a.split_at_mut(rank + 1);
        let pivot_row = &head[rank];
        let inverse = pow_mod::<P>(pivot_row[col], P - 2);
        for row in tail.iter_mut() {
            if row[col] == 0 {
                continue;
            }
            let factor = P - row[col] * inverse % P;
            for j in col + 1..cols {
                row[j] = (row[j] + factor * pivot_row[j]) % P;
            }
            row[col] = 0;
        }
        rank += 1;
    }
    rank
}

fn pow_mod<const P: u64>(mut base: u64, mut exp: u64) -> u64 {
    let mut acc = 1;
    while exp > 0 {
        if exp & 1 == 1 {
            acc = acc * base % P;
        }
        base = base * base % P;
        exp >>= 1;
    }
    acc
}

/// Fraction-free (Bareiss) elimination: every intermediate entry is a minor of
/// the input, so each division by the previous pivot is exact.
fn exact_rank_big(matrix: Vec<Vec<i64>>) -> usize {
    let mut a: Vec<Vec<BigInt>> = matrix
        .into_iter()
        .map(|row| row.into_iter().map(BigInt::from).collect())
        .collect();
    let rows = a.len();
    let cols = a.first().map_or(0, Vec::len);
    let mut prev = BigInt::one();
    let mut rank = 0;
    for col in 0..cols {
        if rank == rows {
            break;
        }
        let Some(pivot) = (rank..rows).find(|&i| !a[i][col].is_zero()) else {
            continue;
        };
        a.swap(rank, pivot);
        let (head, tail) = a.split_at_mut(rank + 1);
        let pivot_row = &head[rank];
        let p = &pivot_row[col];
        for row in tail.iter_mut() {
            let factor = std::mem::take(&mut row[col]);
            if factor.is_zero() {
                // (p * a_ij - 0) / prev
                for entry in &mut row[col + 1..] {
                    if !entry.is_zero() {
                        *entry = &*entry * p / &prev;
                    }
                }
                continue;
            }
            for j in col + 1..cols {
                let value = &row[j] * p - &factor * &pivot_row[j];
                debug_assert!((&value % &prev).is_zero(), "Bareiss division must be exact");
                row[j] = value / &prev;
            }
        }
        prev = a[rank][col].clone();
        rank += 1;
    }
    rank
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct LemmaScan {
    pub n: usize,
    pub checked: u64,
    pub violations: Vec<String>,
}

impl LemmaScan {
    pub fn violation_count(&self) -> usize {
        self.violations.len()
    }
}

/// Every nontrivial profile at `n` whose spectrum vanishes on the whole window.
pub fn exhaustive_lemma_scan(n: usize, exec: Execution) -> Result<LemmaScan> {
    check_n("n", n, MAX_SCAN_N)?;
    let table = KrawtchoukTable::new(n);
    let total = 1u64 << (n + 1);
    // Chunk the index space so each task amortizes its allocation.
    const CHUNK: u64 = 1 << 12;
    let chunks = total.div_ceil(CHUNK);
    let found = exec.map(chunks, |c| {
        let mut bits = vec![false; n + 1];
        let mut hits = Vec::new();
        let mut checked = 0u64;
        for index in c * CHUNK..((c + 1) * CHUNK).min(total) {
            for (k, bit) in bits.iter_mut().enumerate() {
                *bit = index >> k & 1 == 1;
            }
            if is_trivial_bits(&bits) {
                continue;
            }
            checked += 1;
            if table.window_witness(&bits).is_none() {
                hits.push(index);
            }
        }
        (checked, hits)
    });
    let mut scan = LemmaScan {
        n,
        checked: 0,
        violations: Vec::new(),
    };
    for (checked, hits) in found {
        scan.checked += checked;
        for index in hits {
            scan.violations
                .push(SymmetricProfile::from_index(n, index)?.to_string());
        }
    }
    Ok(scan)
}

fn is_trivial_bits(bits: &[bool]) -> bool {
    bits.windows(3).all(|w| w[0] == w[2])
}

/// Uniform random nontrivial profiles (each bit independent, trivial ones redrawn).
pub fn sampled_lemma_scan(n: usize, samples: u64, seed: u64, exec: Execution) -> Result<LemmaScan> {
    if n < 2 {
        return Err(Error::Config(
            "every profile at n < 2 is trivial; nothing to sample".into(),
        ));
    }
    let table = KrawtchoukTable::new(n);
    let results = exec.map(samples, |i| {
        let mut rng = ChaCha8Rng::seed_from_u64(derive_seed(seed, i, 0));
        let bits = loop {
            let bits: Vec<bool> = (0..=n).map(|_| rng.gen()).collect();
            if !is_trivial_bits(&bits) {
                break bits;
            }
        };
        table
            .window_witness(&bits)
            .is_none()
            .then_some(bits)
    });
    let violations = results
        .into_iter()
        .flatten()
        .map(|bits| SymmetricProfile::new(bits).map(|p| p.to_string()))
        .collect::<Result<Vec<_>>>()?;
    Ok(LemmaScan {
        n,
        checked: samples,
        violations,
    })
}

/// `x` uniform, `y = x` with exactly `m` positions flipped (chosen by a seeded shuffle).
pub fn weight_m_pair<R: Rng + ?Sized>(n: usize, m: usize, rng: &mut R) -> Result<InputPair> {
    if m > n {
        return Err(Error::OutOfRange {
            what: "weight",
            value: m,
            max: n,
        });
    }
    let x = BitString::random(n, rng);
    let mut y = x.clone();
    for i in rand::seq::index::sample(rng, n, m) {
        y.flip(i);
    }
    InputPair::new(x, y)
}

#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize)]
pub struct TrialCounts {
    pub trials: u64,
    pub successes: u64,
    pub content_bits: u64,
    pub max_bits: u64,
    pub rounds: u64,
}

impl TrialCounts {
    pub fn merge(mut self, other: Self) -> Self {
        self.trials += other.trials;
        self.successes += other.successes;
        self.content_bits += other.content_bits;
        self.max_bits = self.max_bits.max(other.max_bits);
        self.rounds += other.rounds;
        self
    }

    pub fn stats(&self) -> TrialStats {
        let t = self.trials.max(1) as f64;
        TrialStats {
            trials: self.trials,
            success_rate: self.successes as f64 / t,
            mean_bits: self.content_bits as f64 / t,
            max_bits: self.max_bits,
            rounds_mean: self.rounds as f64 / t,
        }
    }
}

/// Bit counts exclude Bob's final answer bit.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct TrialStats {
    pub trials: u64,
    pub success_rate: f64,
    pub mean_bits: f64,
    pub max_bits: u64,
    pub rounds_mean: f64,
}

/// One trial of a Monte-Carlo batch: seeds for the inputs and the tape both come from `(seed, trial)`.
pub fn trial_inputs(n: usize, m: usize, seed: u64, trial: u64) -> Result<(InputPair, u64)> {
    let mut rng = ChaCha8Rng::seed_from_u64(derive_seed(seed, trial, 0));
    Ok((weight_m_pair(n, m, &mut rng)?, derive_seed(seed, trial, 1)))
}

/// Success rate and bit usage of `protocol` on pairs at distance exactly `m`.
pub fn mc_error_estimate(
    protocol: &dyn Protocol,
    profile: &SymmetricProfile,
    m: usize,
    trials: u64,
    seed: u64,
    exec: Execution,
) -> Result<TrialStats> {
    let n = profile.n();
    if protocol.n() != n {
        return Err(Error::LengthMismatch {
            expected: n,
            actual: protocol.n(),
        });
    }
    if m > n {
        return Err(Error::OutOfRange {
            what: "weight",
            value: m,
            max: n,
        });
    }
    let truth = profile.value(m);
    let counts = exec.map_reduce(
        trials,
        Ok(TrialCounts::default()),
        |i| {
            let (pair, tape_seed) = trial_inputs(n, m, seed, i)?;
            let run = run_protocol(protocol, &pair, tape_seed)?;
            let bits = run.transcript.content_bits() as u64;
            Ok(TrialCounts {
                trials: 1,
                successes: u64::from(run.output == truth),
                content_bits: bits,
                max_bits: bits,
                rounds: run.transcript.rounds() as u64,
            })
        },
        |a: Result<TrialCounts>, b| Ok(a?.merge(b?)),
    )?;
    Ok(counts.stats())
}
