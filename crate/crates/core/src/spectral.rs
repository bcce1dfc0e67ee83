//! Exact Fourier spectra of symmetric functions.
//!
//! For symmetric `f` the coefficient `f~(w)` depends only on `|w|`, and
//! `2^n f~(1^k 0^(n-k)) = sum_s f_s c(k, s)` with the Krawtchouk coefficient
//! `c(k, s) = sum_t (-1)^t C(k, t) C(n - k, s - t)`. All values are kept as
//! integers scaled by `2^n`, so support and rank are exact zero tests.

use num_bigint::{BigInt, BigUint};
use num_traits::{One, Zero};
use serde::Serialize;

use crate::error::{Error, Result};
use crate::symfun::{SymmetricProfile, TrivialClass};

/// Largest `n` whose scaled coefficients provably fit in `i128` (`|coeff| <= 2^n`).
const SMALL_MAX_N: usize = 120;

/// `C(a, b)`, zero outside `0 <= b <= a`.
pub fn binomial(a: usize, b: usize) -> BigUint {
    if b > a {
        return BigUint::zero();
    }
    let b = b.min(a - b);
    let mut acc = BigUint::one();
    for i in 0..b {
        acc *= a - i;
        acc /= i + 1;
    }
    acc
}

/// Pascal triangle up to row `n`, built once and shared read-only.
#[derive(Clone, Debug)]
pub struct BinomialTable {
    rows: Vec<Vec<BigInt>>,
}

impl BinomialTable {
    pub fn new(n: usize) -> Self {
        let mut rows: Vec<Vec<BigInt>> = Vec::with_capacity(n + 1);
        rows.push(vec![BigInt::one()]);
        for a in 1..=n {
            let prev = &rows[a - 1];
            let mut row = Vec::with_capacity(a + 1);
            row.push(BigInt::one());
            for b in 1..a {
                row.push(&prev[b - 1] + &prev[b]);
            }
            row.push(BigInt::one());
            rows.push(row);
        }
        Self { rows }
    }

    pub fn get(&self, a: usize, b: isize) -> BigInt {
        if b < 0 || a >= self.rows.len() || b as usize > a {
            return BigInt::zero();
        }
        self.rows[a][b as usize].clone()
    }
}

/// `c(k, s) = sum_{t=0}^{k} (-1)^t C(k, t) C(n - k, s - t)`, summed term by term.
pub fn krawtchouk_coefficient(n: usize, k: usize, s: usize) -> Result<BigInt> {
    for (what, value) in [("k", k), ("s", s)] {
        if value > n {
            return Err(Error::OutOfRange { what, value, max: n });
        }
    }
    let table = BinomialTable::new(n);
    Ok(krawtchouk_sum(&table, n, k, s))
}

fn krawtchouk_sum(table: &BinomialTable, n: usize, k: usize, s: usize) -> BigInt {
    (0..=k).fold(BigInt::zero(), |acc, t| {
        let term = table.get(k, t as isize) * table.get(n - k, s as isize - t as isize);
        if t % 2 == 0 {
            acc + term
        } else {
            acc - term
        }
    })
}

/// All `c(k, s)` for one `n`.
///
/// Row `k` holds the coefficients of `(1 - x)^k (1 + x)^(n - k)`, produced from
/// row `k - 1` by multiplying with `(1 - x)` and dividing exactly by `(1 + x)`.
#[derive(Clone, Debug)]
pub struct KrawtchoukTable {
    n: usize,
    rows: Vec<Vec<BigInt>>,
    small: Option<Vec<Vec<i128>>>,
}

impl KrawtchoukTable {
    pub fn new(n: usize) -> Self {
        let binomials = BinomialTable::new(n);
        let mut rows = Vec::with_capacity(n + 1);
        rows.push((0..=n).map(|s| binomials.get(n, s as isize)).collect::<Vec<_>>());
        for k in 1..=n {
            let prev: &Vec<BigInt> = &rows[k - 1];
            // prev * (1 - x), degree n + 1
            let times: Vec<BigInt> = (0..=n + 1)
                .map(|s| {
                    let a = if s <= n { prev[s].clone() } else { BigInt::zero() };
                    let b = if s >= 1 { prev[s - 1].clone() } else { BigInt::zero() };
                    a - b
                })
                .collect();
            let mut row: Vec<BigInt> = Vec::with_capacity(n + 1);
            for s in 0..=n {
                let carry = if s >= 1 { row[s - 1].clone() } else { BigInt::zero() };
                row.push(&times[s] - carry);
            }
            debug_assert_eq!(times[n + 1], row[n], "division by (1 + x) must be exact");
            rows.push(row);
        }
        let small = (n <= SMALL_MAX_N).then(|| {
            rows.iter()
                .map(|row| {
                    row.iter()
                        .map(|c| i128::try_from(c).expect("|c(k, s)| <= 2^n fits i128"))
                        .collect()
                })
                .collect()
        });
        Self { n, rows, small }
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn get(&self, k: usize, s: usize) -> &BigInt {
        &self.rows[k][s]
    }

    pub fn spectrum(&self, profile: &SymmetricProfile) -> WeightSpectrum {
        assert_eq!(profile.n(), self.n, "table built for a different n");
        let coeffs: Vec<BigInt> = self
            .rows
            .iter()
            .map(|row| {
                row.iter()
                    .zip(profile.bits())
                    .filter(|(_, &bit)| bit)
                    .fold(BigInt::zero(), |acc, (c, _)| acc + c)
            })
            .collect();
        WeightSpectrum::from_coeffs(coeffs)
    }

    /// Smallest weight inside the lemma window carrying a nonzero coefficient.
    ///
    /// Same answer as `self.spectrum(profile).lemma_window_check().witness`
    /// without materializing big integers when `n` is small.
    pub fn window_witness(&self, bits: &[bool]) -> Option<usize> {
        assert_eq!(bits.len(), self.n + 1);
        let (lo, hi) = lemma_window(self.n);
        match &self.small {
            Some(rows) => (lo..=hi).find(|&k| {
                rows[k]
                    .iter()
                    .zip(bits)
                    .filter(|(_, &bit)| bit)
                    .map(|(c, _)| *c)
                    .sum::<i128>()
                    != 0
            }),
            None => (lo..=hi).find(|&k| {
                !self.rows[k]
                    .iter()
                    .zip(bits)
                    .filter(|(_, &bit)| bit)
                    .fold(BigInt::zero(), |acc, (c, _)| acc + c)
                    .is_zero()
            }),
        }
    }
}

/// `coeffs[k] = 2^n f~(w)` for any `|w| = k`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct WeightSpectrum {
    pub n: usize,
    pub coeffs: Vec<BigInt>,
    pub support: Vec<usize>,
    pub rank: BigUint,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub struct LemmaWindow {
    pub holds: bool,
    pub witness: Option<usize>,
}

impl WeightSpectrum {
    fn from_coeffs(coeffs: Vec<BigInt>) -> Self {
        let n = coeffs.len() - 1;
        let support: Vec<usize> = (0..=n).filter(|&k| !coeffs[k].is_zero()).collect();
        let mut spectrum = Self {
            n,
            coeffs,
            support,
            rank: BigUint::zero(),
        };
        spectrum.rank = spectrum.rank_of_xor_matrix();
        spectrum
    }

    /// `rank(M_F) = |{w : f~(w) != 0}| = sum_{k in support} C(n, k)`.
    pub fn rank_of_xor_matrix(&self) -> BigUint {
        self.support.iter().map(|&k| binomial(self.n, k)).sum()
    }

    pub fn lemma_window_check(&self) -> LemmaWindow {
        let (lo, hi) = lemma_window(self.n);
        let witness = self.support.iter().copied().find(|&k| lo <= k && k <= hi);
        LemmaWindow {
            holds: witness.is_some(),
            witness,
        }
    }

    /// `sum_k C(n,k) coeffs[k]^2 == 2^n sum_s C(n,s) f_s`.
    pub fn parseval_holds(&self, profile: &SymmetricProfile) -> bool {
        let lhs: BigInt = (0..=self.n)
            .map(|k| BigInt::from(binomial(self.n, k)) * &self.coeffs[k] * &self.coeffs[k])
            .sum();
        let ones: BigInt = (0..=self.n)
            .filter(|&s| profile.value(s))
            .map(|s| BigInt::from(binomial(self.n, s)))
            .sum();
        lhs == (ones << self.n)
    }
}

pub fn weight_spectrum(profile: &SymmetricProfile) -> WeightSpectrum {
    KrawtchoukTable::new(profile.n()).spectrum(profile)
}

/// Inclusive weight window `[ceil(n/8), floor(7n/8)]`.
pub fn lemma_window(n: usize) -> (usize, usize) {
    (n.div_ceil(8), 7 * n / 8)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub struct DeterministicBounds {
    pub lower: u64,
    pub upper: u64,
}

/// `ceil(log2 x)`, with `x = 0` treated as `1`.
pub fn ceil_log2(x: &BigUint) -> u64 {
    if x <= &BigUint::one() {
        return 0;
    }
    let bits = x.bits();
    if (x - 1u32).bits() < bits {
        bits - 1
    } else {
        bits
    }
}

/// Log-rank lower bound and a constructive upper bound on `D(F)`.
///
/// The upper bound is 0 for constants, 1 for (negated) parity, and `n + 1`
/// otherwise: Alice sends `x`, Bob answers with one bit.
pub fn deterministic_bounds(profile: &SymmetricProfile) -> DeterministicBounds {
    let spectrum = weight_spectrum(profile);
    deterministic_bounds_from(profile, &spectrum)
}

pub fn deterministic_bounds_from(
    profile: &SymmetricProfile,
    spectrum: &WeightSpectrum,
) -> DeterministicBounds {
    let upper = match profile.classify() {
        TrivialClass::Const0 | TrivialClass::Const1 => 0,
        TrivialClass::Parity | TrivialClass::NotParity => 1,
        TrivialClass::Nontrivial => profile.n() as u64 + 1,
    };
    DeterministicBounds {
        lower: ceil_log2(&spectrum.rank),
        upper,
    }
}
