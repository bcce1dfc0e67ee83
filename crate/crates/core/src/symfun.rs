//! Symmetric XOR problems `F(x, y) = S(|x ^ y|)`.
//!
//! A [`SymmetricProfile`] stores the predicate `S` on `{0, ..., n}` and is the
//! single source of truth for a problem instance. Everything else in the crate
//! (spectra, gap parameters, protocols) is derived from it.

use std::fmt;

use serde::Serialize;

use crate::bits::BitString;
use crate::error::{Error, Result};

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct SymmetricProfile {
    n: usize,
    bits: Vec<bool>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize)]
pub enum TrivialClass {
    Const0,
    Const1,
    Parity,
    NotParity,
    Nontrivial,
}

impl TrivialClass {
    pub fn is_trivial(self) -> bool {
        self != TrivialClass::Nontrivial
    }
}

impl fmt::Display for TrivialClass {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Debug::fmt(self, f)
    }
}

/// Head/tail lengths outside of which `S` is 2-periodic.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub struct GapParams {
    pub r0: usize,
    pub r1: usize,
    pub r: usize,
    pub trivial_class: TrivialClass,
    /// Set when no pair below the search cap is feasible; the pair is then
    /// reported as `(ceil(n/2), ceil(n/2))`, which constrains nothing.
    pub saturated: bool,
}

impl SymmetricProfile {
    /// Profile from `s[0..=n]`; `n = bits.len() - 1` must be positive.
    pub fn new(bits: Vec<bool>) -> Result<Self> {
        if bits.len() < 2 {
            return Err(Error::EmptyInput);
        }
        Ok(Self {
            n: bits.len() - 1,
            bits,
        })
    }

    pub fn from_fn(n: usize, f: impl Fn(usize) -> bool) -> Result<Self> {
        Self::new((0..=n).map(f).collect())
    }

    /// The `index`-th profile of length `n + 1`, bit `k` of `index` being `s[k]`.
    pub fn from_index(n: usize, index: u64) -> Result<Self> {
        Self::from_fn(n, |k| index >> k & 1 == 1)
    }

    pub fn const0(n: usize) -> Result<Self> {
        Self::from_fn(n, |_| false)
    }

    pub fn const1(n: usize) -> Result<Self> {
        Self::from_fn(n, |_| true)
    }

    pub fn parity(n: usize) -> Result<Self> {
        Self::from_fn(n, |k| k % 2 == 1)
    }

    pub fn not_parity(n: usize) -> Result<Self> {
        Self::from_fn(n, |k| k % 2 == 0)
    }

    /// `s[k] = 1` iff `k > d`.
    pub fn threshold(n: usize, d: usize) -> Result<Self> {
        Self::from_fn(n, |k| k > d)
    }

    /// `s[k] = 1` iff `k == target`.
    pub fn exact(n: usize, target: usize) -> Result<Self> {
        Self::from_fn(n, |k| k == target)
    }

    /// `s[k] = 1` iff `k mod m` is one of `residues`.
    pub fn modular(n: usize, m: usize, residues: &[usize]) -> Result<Self> {
        if m == 0 {
            return Err(Error::Config("modulus must be positive".into()));
        }
        Self::from_fn(n, |k| residues.contains(&(k % m)))
    }

    /// Parse the profile mini-language:
    /// `const0`, `const1`, `parity`, `notparity`, `threshold:<d>`, `exact:<k>`,
    /// `mod:<m>:<r1,r2,...>`, `bits:<n+1 characters>`.
    pub fn parse(spec: &str, n: usize) -> Result<Self> {
        if n == 0 {
            return Err(Error::EmptyInput);
        }
        let bad = |token: &str, reason: &str| Error::ProfileParse {
            token: token.to_string(),
            reason: reason.to_string(),
        };
        let number = |token: &str| -> Result<usize> {
            token
                .trim()
                .parse::<usize>()
                .map_err(|_| bad(token, "expected a non-negative integer"))
        };
        let mut parts = spec.splitn(2, ':');
        let head = parts.next().unwrap_or_default();
        let rest = parts.next();
        match (head, rest) {
            ("const0", None) => Self::const0(n),
            ("const1", None) => Self::const1(n),
            ("parity", None) => Self::parity(n),
            ("notparity", None) => Self::not_parity(n),
            ("threshold", Some(d)) => Self::threshold(n, number(d)?),
            ("exact", Some(k)) => Self::exact(n, number(k)?),
            ("mod", Some(rest)) => {
                let (m, residues) = rest
                    .split_once(':')
                    .ok_or_else(|| bad(rest, "expected mod:<m>:<residues>"))?;
                let m = number(m)?;
                if m == 0 {
                    return Err(bad("0", "modulus must be positive"));
                }
                let residues = residues
                    .split(',')
                    .map(number)
                    .collect::<Result<Vec<_>>>()?;
                Self::modular(n, m, &residues)
            }
            ("bits", Some(bits)) => {
                if bits.len() != n + 1 {
                    return Err(bad(
                        bits,
                        &format!("expected {} characters for n = {n}", n + 1),
                    ));
                }
                let parsed: BitString = bits.parse().map_err(|_| bad(bits, "expected 0/1"))?;
                Self::new(parsed.as_slice().to_vec())
            }
            (
                "const0" | "const1" | "parity" | "notparity" | "threshold" | "exact" | "mod"
                | "bits",
                _,
            ) => Err(bad(spec, "wrong number of arguments")),
            (other, _) => Err(bad(other, "unknown profile kind")),
        }
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn bits(&self) -> &[bool] {
        &self.bits
    }

    /// `S(k)`.
    pub fn value(&self, k: usize) -> bool {
        self.bits[k]
    }

    /// `Some(d)` when `s[k] = 1` exactly for `k > d` (`d = n` for `const0`).
    pub fn as_threshold(&self) -> Option<usize> {
        let d = self.bits.iter().position(|&b| b).map_or(self.n, |first| {
            first.checked_sub(1).unwrap_or(usize::MAX)
        });
        (d != usize::MAX && *self == Self::threshold(self.n, d).ok()?).then_some(d)
    }

    /// `F(x, y) = S(|x ^ y|)`; the ground truth every protocol is scored against.
    pub fn evaluate(&self, pair: &InputPair) -> Result<bool> {
        if pair.n() != self.n {
            return Err(Error::LengthMismatch {
                expected: self.n,
                actual: pair.n(),
            });
        }
        Ok(self.value(pair.distance()))
    }

    pub fn classify(&self) -> TrivialClass {
        let matches = |f: fn(usize) -> bool| (0..=self.n).all(|k| self.bits[k] == f(k));
        if matches(|_| false) {
            TrivialClass::Const0
        } else if matches(|_| true) {
            TrivialClass::Const1
        } else if matches(|k| k % 2 == 1) {
            TrivialClass::Parity
        } else if matches(|k| k % 2 == 0) {
            TrivialClass::NotParity
        } else {
            TrivialClass::Nontrivial
        }
    }

    /// Whether `S(k) = S(k + 2)` for every `k` with `head <= k` and `k + 2 <= n - tail`,
    /// i.e. `S` is 2-periodic on the weights `[head, n - tail]`.
    pub fn is_periodic_between(&self, head: usize, tail: usize) -> bool {
        let Some(top) = self.n.checked_sub(tail) else {
            return true;
        };
        (head..top.saturating_sub(1)).all(|k| self.bits[k] == self.bits[k + 2])
    }

    /// Componentwise-minimal `(r0, r1)`, searched below `floor((n - 1) / 2)`.
    ///
    /// Below that cap the two one-sided conditions overlap, so the minima are
    /// jointly feasible. If even the cap pair fails (only possible for even
    /// `n`, when `S(n/2 - 1) != S(n/2 + 1)`) the result saturates at
    /// `(ceil(n/2), ceil(n/2))`.
    pub fn gap_params(&self) -> GapParams {
        let n = self.n;
        let cap = (n - 1) / 2;
        let trivial_class = self.classify();
        let (r0, r1, saturated) = if self.is_periodic_between(cap, cap) {
            let r0 = (0..=cap)
                .find(|&a| self.is_periodic_between(a, cap))
                .expect("cap pair is feasible");
            let r1 = (0..=cap)
                .find(|&b| self.is_periodic_between(cap, b))
                .expect("cap pair is feasible");
            (r0, r1, false)
        } else {
            let ceil = n.div_ceil(2);
            (ceil, ceil, true)
        };
        assert!(
            self.is_periodic_between(r0, r1),
            "componentwise minima ({r0}, {r1}) are not jointly feasible for {self}"
        );
        GapParams {
            r0,
            r1,
            r: r0.max(r1),
            trivial_class,
            saturated,
        }
    }

    /// `S'(k) = S(n - k)`, the profile seen after one party complements its input.
    pub fn flip(&self) -> Self {
        Self {
            n: self.n,
            bits: self.bits.iter().rev().copied().collect(),
        }
    }

    /// `(S0, S1)` with `S0` keeping the even weights and `S1` the odd ones.
    pub fn parity_decompose(&self) -> (Self, Self) {
        let keep = |odd: bool| Self {
            n: self.n,
            bits: self
                .bits
                .iter()
                .enumerate()
                .map(|(k, &b)| b && (k % 2 == 1) == odd)
                .collect(),
        };
        (keep(false), keep(true))
    }

    /// `|{t : S(t) != S(t + 2)}|`.
    pub fn conjectured_unbounded_measure(&self) -> usize {
        self.bits.windows(3).filter(|w| w[0] != w[2]).count()
    }
}

impl fmt::Display for SymmetricProfile {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str("bits:")?;
        for &b in &self.bits {
            f.write_str(if b { "1" } else { "0" })?;
        }
        Ok(())
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct InputPair {
    x: BitString,
    y: BitString,
}

impl InputPair {
    pub fn new(x: BitString, y: BitString) -> Result<Self> {
        if x.len() != y.len() {
            return Err(Error::LengthMismatch {
                expected: x.len(),
                actual: y.len(),
            });
        }
        if x.is_empty() {
            return Err(Error::EmptyInput);
        }
        Ok(Self { x, y })
    }

    pub fn x(&self) -> &BitString {
        &self.x
    }

    pub fn y(&self) -> &BitString {
        &self.y
    }

    pub fn n(&self) -> usize {
        self.x.len()
    }

    /// `|x ^ y|`.
    pub fn distance(&self) -> usize {
        self.x
            .as_slice()
            .iter()
            .zip(self.y.as_slice())
            .filter(|(a, b)| a != b)
            .count()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn pair(x: &str, y: &str) -> InputPair {
        InputPair::new(x.parse().unwrap(), y.parse().unwrap()).unwrap()
    }

    fn all_profiles(n: usize) -> impl Iterator<Item = SymmetricProfile> {
        (0..1u64 << (n + 1)).map(move |i| SymmetricProfile::from_index(n, i).unwrap())
    }

    /// Smallest feasible coordinates by scanning every pair, no shortcuts.
    fn brute_gap(p: &SymmetricProfile) -> Option<(usize, usize)> {
        let n = p.n();
        let cap = (n - 1) / 2;
        let feasible =
            |a: usize, b: usize| (0..=n).all(|k| k < a || k + 2 > n - b || p.value(k) == p.value(k + 2));
        let pairs: Vec<_> = (0..=cap)
            .flat_map(|a| (0..=cap).map(move |b| (a, b)))
            .filter(|&(a, b)| feasible(a, b))
            .collect();
        let r0 = pairs.iter().map(|p| p.0).min()?;
        let r1 = pairs.iter().map(|p| p.1).min()?;
        assert!(feasible(r0, r1), "minima not jointly feasible for {p}");
        Some((r0, r1))
    }

    #[test]
    fn evaluate_examples() {
        let parity = SymmetricProfile::parity(8).unwrap();
        assert!(!parity.evaluate(&pair("10110010", "10110010")).unwrap());

        let p = SymmetricProfile::parse("bits:0110101", 6).unwrap();
        assert_eq!(p.evaluate(&pair("010011", "101100")).unwrap(), p.value(6));

        let t = SymmetricProfile::threshold(8, 3).unwrap();
        assert!(t.evaluate(&pair("00000000", "00001111")).unwrap());
    }

    #[test]
    fn evaluate_rejects_length_mismatch() {
        let t = SymmetricProfile::threshold(8, 3).unwrap();
        assert!(matches!(
            t.evaluate(&pair("0000", "1111")),
            Err(Error::LengthMismatch { .. })
        ));
        assert!(InputPair::new("01".parse().unwrap(), "011".parse().unwrap()).is_err());
    }

    #[test]
    fn classify_examples() {
        assert_eq!(
            SymmetricProfile::const0(5).unwrap().classify(),
            TrivialClass::Const0
        );
        assert_eq!(
            SymmetricProfile::parity(5).unwrap().classify(),
            TrivialClass::Parity
        );
        assert_eq!(
            SymmetricProfile::not_parity(5).unwrap().classify(),
            TrivialClass::NotParity
        );
        assert_eq!(
            SymmetricProfile::threshold(8, 3).unwrap().classify(),
            TrivialClass::Nontrivial
        );
    }

    #[test]
    fn gap_params_examples() {
        let g = SymmetricProfile::parity(9).unwrap().gap_params();
        assert_eq!((g.r0, g.r1, g.r), (0, 0, 0));

        let g = SymmetricProfile::exact(8, 0).unwrap().gap_params();
        assert_eq!((g.r0, g.r1), (1, 0));
        assert_eq!(brute_gap(&SymmetricProfile::exact(8, 0).unwrap()), Some((1, 0)));

        let t = SymmetricProfile::threshold(16, 3).unwrap();
        let g = t.gap_params();
        assert_eq!((g.r0, g.r1, g.r), (4, 0, 4));
        assert_eq!(brute_gap(&t), Some((4, 0)));
    }

    #[test]
    fn gap_params_matches_brute_force_exhaustively() {
        for n in 1..=11 {
            for p in all_profiles(n) {
                let g = p.gap_params();
                match brute_gap(&p) {
                    Some((r0, r1)) => {
                        assert!(!g.saturated);
                        assert_eq!((g.r0, g.r1), (r0, r1), "{p}");
                    }
                    None => {
                        assert!(g.saturated && n % 2 == 0, "{p}");
                        assert_eq!((g.r0, g.r1), (n.div_ceil(2), n.div_ceil(2)));
                    }
                }
                assert!(p.is_periodic_between(g.r0, g.r1));
                assert!(g.r0 <= n.div_ceil(2) && g.r1 <= n.div_ceil(2));
            }
        }
    }

    #[test]
    fn even_n_saturation() {
        // s[1] != s[3] leaves no feasible pair at or below the cap (n - 1) / 2 = 1.
        let p = SymmetricProfile::parse("bits:01001", 4).unwrap();
        let g = p.gap_params();
        assert!(g.saturated);
        assert_eq!((g.r0, g.r1, g.r), (2, 2, 2));
        let g = SymmetricProfile::parse("mod:4:0", 64).unwrap().gap_params();
        assert_eq!((g.r0, g.r1, g.saturated), (31, 31, false));
    }

    #[test]
    fn flip_swaps_the_equality_gap() {
        let g = SymmetricProfile::exact(8, 8).unwrap().gap_params();
        assert_eq!((g.r0, g.r1), (0, 1));
    }

    #[test]
    fn zero_gap_iff_trivial() {
        for n in 1..=12 {
            for p in all_profiles(n) {
                let g = p.gap_params();
                assert_eq!(g.r == 0, p.classify().is_trivial(), "{p}");
                if g.r == 0 {
                    assert!(matches!(
                        g.trivial_class,
                        TrivialClass::Const0
                            | TrivialClass::Const1
                            | TrivialClass::Parity
                            | TrivialClass::NotParity
                    ));
                }
            }
        }
    }

    #[test]
    fn flip_examples() {
        let p = SymmetricProfile::new(vec![true, false, false]).unwrap();
        assert_eq!(p.flip().bits(), &[false, false, true]);
        for n in 1..=10 {
            for p in all_profiles(n) {
                assert_eq!(p.flip().flip(), p);
                let (g, h) = (p.gap_params(), p.flip().gap_params());
                assert_eq!((g.r0, g.r1), (h.r1, h.r0), "{p}");
            }
        }
    }

    #[test]
    fn parity_decompose_examples() {
        let (s0, s1) = SymmetricProfile::const1(2).unwrap().parity_decompose();
        assert_eq!(s0.bits(), &[true, false, true]);
        assert_eq!(s1.bits(), &[false, true, false]);

        let parity = SymmetricProfile::parity(6).unwrap();
        let (s0, s1) = parity.parity_decompose();
        assert_eq!(s0.classify(), TrivialClass::Const0);
        assert_eq!(s1, parity);

        for p in all_profiles(8) {
            let (s0, s1) = p.parity_decompose();
            for k in 0..=8 {
                assert_eq!(p.value(k), s0.value(k) || s1.value(k));
                assert!(!(s0.value(k) && s1.value(k)));
            }
        }
    }

    #[test]
    fn conjectured_measure_examples() {
        assert_eq!(
            SymmetricProfile::parity(9)
                .unwrap()
                .conjectured_unbounded_measure(),
            0
        );
        assert_eq!(
            SymmetricProfile::exact(8, 0)
                .unwrap()
                .conjectured_unbounded_measure(),
            1
        );
        assert_eq!(
            SymmetricProfile::threshold(16, 3)
                .unwrap()
                .conjectured_unbounded_measure(),
            2
        );
    }

    #[test]
    fn threshold_detection() {
        assert_eq!(SymmetricProfile::threshold(9, 4).unwrap().as_threshold(), Some(4));
        assert_eq!(SymmetricProfile::const0(9).unwrap().as_threshold(), Some(9));
        assert_eq!(SymmetricProfile::const1(9).unwrap().as_threshold(), None);
        assert_eq!(SymmetricProfile::exact(9, 4).unwrap().as_threshold(), None);
    }

    #[test]
    fn parse_mini_language() {
        assert_eq!(
            SymmetricProfile::parse("threshold:3", 8).unwrap(),
            SymmetricProfile::threshold(8, 3).unwrap()
        );
        assert_eq!(
            SymmetricProfile::parse("mod:4:0,3", 9).unwrap().bits(),
            &[true, false, false, true, true, false, false, true, true, false]
        );
        assert_eq!(
            SymmetricProfile::parse("exact:2", 3).unwrap().bits(),
            &[false, false, true, false]
        );
        assert_eq!(
            SymmetricProfile::parse("bits:101", 2).unwrap().bits(),
            &[true, false, true]
        );
        for bad in [
            "threshold",
            "threshold:x",
            "mod:0:1",
            "mod:3",
            "bits:10",
            "bits:1x1",
            "weird",
            "parity:1",
        ] {
            let err = SymmetricProfile::parse(bad, 2).unwrap_err();
            assert!(matches!(err, Error::ProfileParse { .. }), "{bad}: {err}");
        }
        assert!(SymmetricProfile::parse("parity", 0).is_err());
    }
}
