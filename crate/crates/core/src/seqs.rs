//! Finite sequences over the naturals, the pairing and coding functions
//! built on them, and the orders the gadget constructions rely on.
//!
//! [`FinSeq`] orders itself by length first and lexicographically within a
//! length (`s ⪯ t`), so ordered collections of sequences iterate in that
//! order.

use std::cmp::Ordering;
use std::fmt;
use std::str::FromStr;

use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum SeqError {
    #[error("sequence {0} is not binary")]
    NotBinary(FinSeq),
    #[error("length mismatch: {0} vs {1}")]
    LengthMismatch(usize, usize),
    #[error("code of {0} overflows a machine natural")]
    Overflow(FinSeq),
    #[error("cannot parse sequence `{0}`")]
    Parse(String),
}

/// A finite sequence of naturals. Binary sequences are the ones whose items
/// are all 0 or 1.
#[derive(Clone, PartialEq, Eq, Hash, Default)]
pub struct FinSeq(Vec<u64>);

impl FinSeq {
    pub fn new(items: Vec<u64>) -> Self {
        FinSeq(items)
    }

    pub fn empty() -> Self {
        FinSeq(Vec::new())
    }

    /// `0^(n)`
    pub fn zeros(n: usize) -> Self {
        FinSeq(vec![0; n])
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn items(&self) -> &[u64] {
        &self.0
    }

    pub fn get(&self, i: usize) -> Option<u64> {
        self.0.get(i).copied()
    }

    pub fn last(&self) -> Option<u64> {
        self.0.last().copied()
    }

    /// `s⌢n`
    pub fn extended(&self, n: u64) -> FinSeq {
        let mut items = self.0.clone();
        items.push(n);
        FinSeq(items)
    }

    /// `s⌢t`
    pub fn concat(&self, other: &FinSeq) -> FinSeq {
        let mut items = self.0.clone();
        items.extend_from_slice(&other.0);
        FinSeq(items)
    }

    /// `s↾n`; saturates at the full sequence.
    pub fn prefix(&self, n: usize) -> FinSeq {
        FinSeq(self.0[..n.min(self.0.len())].to_vec())
    }

    /// The predecessor `s⁻`, or `None` for the empty sequence.
    pub fn parent(&self) -> Option<FinSeq> {
        if self.0.is_empty() {
            None
        } else {
            Some(self.prefix(self.0.len() - 1))
        }
    }

    /// `self ⊆ other` as sequences.
    pub fn is_prefix_of(&self, other: &FinSeq) -> bool {
        other.0.starts_with(&self.0)
    }

    pub fn is_binary(&self) -> bool {
        self.0.iter().all(|&b| b <= 1)
    }

    pub fn is_all_zero(&self) -> bool {
        self.0.iter().all(|&b| b == 0)
    }

    pub fn max_entry(&self) -> Option<u64> {
        self.0.iter().copied().max()
    }

    /// Number of leading zero entries.
    pub fn leading_zeros(&self) -> usize {
        self.0.iter().take_while(|&&b| b == 0).count()
    }

    /// Renders a binary sequence as a 0/1 string (empty string for `∅`).
    pub fn to_bit_string(&self) -> String {
        self.0.iter().map(|b| if *b == 0 { '0' } else { '1' }).collect()
    }

    pub fn from_bit_string(text: &str) -> Result<FinSeq, SeqError> {
        text.chars()
            .map(|c| match c {
                '0' => Ok(0),
                '1' => Ok(1),
                _ => Err(SeqError::Parse(text.to_string())),
            })
            .collect::<Result<Vec<_>, _>>()
            .map(FinSeq)
    }
}

impl From<Vec<u64>> for FinSeq {
    fn from(items: Vec<u64>) -> Self {
        FinSeq(items)
    }
}

impl From<&[u64]> for FinSeq {
    fn from(items: &[u64]) -> Self {
        FinSeq(items.to_vec())
    }
}

impl Ord for FinSeq {
    fn cmp(&self, other: &Self) -> Ordering {
        self.0
            .len()
            .cmp(&other.0.len())
            .then_with(|| self.0.cmp(&other.0))
    }
}

impl PartialOrd for FinSeq {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl fmt::Display for FinSeq {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str("[")?;
        for (i, item) in self.0.iter().enumerate() {
            if i > 0 {
                f.write_str(",")?;
            }
            write!(f, "{item}")?;
        }
        f.write_str("]")
    }
}

impl fmt::Debug for FinSeq {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Display::fmt(self, f)
    }
}

impl FromStr for FinSeq {
    type Err = SeqError;

    fn from_str(text: &str) -> Result<Self, Self::Err> {
        let inner = text
            .trim()
            .strip_prefix('[')
            .and_then(|t| t.strip_suffix(']'))
            .ok_or_else(|| SeqError::Parse(text.to_string()))?;
        if inner.trim().is_empty() {
            return Ok(FinSeq::empty());
        }
        inner
            .split(',')
            .map(|item| {
                item.trim()
                    .parse::<u64>()
                    .map_err(|_| SeqError::Parse(text.to_string()))
            })
            .collect::<Result<Vec<_>, _>>()
            .map(FinSeq)
    }
}

/// Cantor pairing `(n+m)(n+m+1)/2 + n`, or `None` on overflow.
pub fn checked_pair(n: u64, m: u64) -> Option<u64> {
    let w = n.checked_add(m)?;
    let tri = if w % 2 == 0 {
        (w / 2).checked_mul(w.checked_add(1)?)?
    } else {
        w.checked_mul(w.checked_add(1)? / 2)?
    };
    tri.checked_add(n)
}

/// Cantor pairing. Panics on overflow; truncation bounds keep every caller
/// far below the limit.
pub fn pair(n: u64, m: u64) -> u64 {
    checked_pair(n, m).unwrap_or_else(|| panic!("pair({n}, {m}) overflows u64"))
}

/// Inverse of [`pair`].
pub fn unpair(k: u64) -> (u64, u64) {
    // w = largest with w(w+1)/2 <= k
    let disc = 8 * (k as u128) + 1;
    let mut root = (disc as f64).sqrt() as u128;
    while root * root > disc {
        root -= 1;
    }
    while (root + 1) * (root + 1) <= disc {
        root += 1;
    }
    let w = ((root - 1) / 2) as u64;
    let tri = (w as u128 * (w as u128 + 1) / 2) as u64;
    let n = k - tri;
    (n, w - n)
}

/// Length-then-lex enumeration of binary sequences: `∅, 0, 1, 00, 01, ...`.
pub fn theta(u: &FinSeq) -> Result<u64, SeqError> {
    if !u.is_binary() {
        return Err(SeqError::NotBinary(u.clone()));
    }
    if u.len() >= 63 {
        return Err(SeqError::Overflow(u.clone()));
    }
    let value = u.items().iter().fold(0u64, |acc, &b| (acc << 1) | b);
    Ok((1u64 << u.len()) - 1 + value)
}

/// Sequence code `#`: `#∅ = 0`, `#(s⌢n) = pair(#s, n) + 1`.
pub fn seq_code(s: &FinSeq) -> Result<u64, SeqError> {
    s.items().iter().try_fold(0u64, |acc, &n| {
        checked_pair(acc, n)
            .and_then(|p| p.checked_add(1))
            .ok_or_else(|| SeqError::Overflow(s.clone()))
    })
}

/// Inverse of [`seq_code`].
pub fn seq_decode(code: u64) -> FinSeq {
    let mut items = Vec::new();
    let mut k = code;
    while k > 0 {
        let (prev, n) = unpair(k - 1);
        items.push(n);
        k = prev;
    }
    items.reverse();
    FinSeq(items)
}

/// Pointwise sum of two sequences of equal length.
pub fn seq_add(s: &FinSeq, t: &FinSeq) -> Result<FinSeq, SeqError> {
    if s.len() != t.len() {
        return Err(SeqError::LengthMismatch(s.len(), t.len()));
    }
    Ok(FinSeq(
        s.items()
            .iter()
            .zip(t.items())
            .map(|(a, b)| a + b)
            .collect(),
    ))
}

/// `s ≤ t` pointwise; only defined for equal lengths.
pub fn pointwise_leq(s: &FinSeq, t: &FinSeq) -> Result<bool, SeqError> {
    if s.len() != t.len() {
        return Err(SeqError::LengthMismatch(s.len(), t.len()));
    }
    Ok(s.items().iter().zip(t.items()).all(|(a, b)| a <= b))
}

/// Lexicographic order; a proper prefix precedes its extensions.
pub fn lex_leq(s: &FinSeq, t: &FinSeq) -> bool {
    s.items() <= t.items()
}

/// `s ⪯ t`: shorter first, then lexicographic.
pub fn preceq(s: &FinSeq, t: &FinSeq) -> bool {
    s <= t
}

/// All sequences of length exactly `len` with entries below `branch`, in
/// lexicographic order.
pub fn sequences_of_len(len: usize, branch: u64) -> Vec<FinSeq> {
    let mut out = vec![FinSeq::empty()];
    for _ in 0..len {
        out = out
            .iter()
            .flat_map(|s| (0..branch).map(move |n| s.extended(n)))
            .collect();
    }
    out
}

/// The truncated universe: every sequence of length `<= depth` with entries
/// below `branch`, in `⪯` order.
pub fn sequences_upto(depth: usize, branch: u64) -> Vec<FinSeq> {
    (0..=depth)
        .flat_map(|len| sequences_of_len(len, branch))
        .collect()
}

pub fn binary_sequences_of_len(len: usize) -> Vec<FinSeq> {
    sequences_of_len(len, 2)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn seq(items: &[u64]) -> FinSeq {
        FinSeq::from(items)
    }

    /// Walks the diagonals of ω×ω in the Cantor order.
    fn cantor_enumeration(count: usize) -> Vec<(u64, u64)> {
        let mut out = Vec::new();
        let mut w = 0u64;
        while out.len() < count {
            for n in 0..=w {
                out.push((n, w - n));
            }
            w += 1;
        }
        out.truncate(count);
        out
    }

    #[test]
    fn pair_examples() {
        assert_eq!(pair(0, 0), 0);
        assert_eq!(pair(0, 1), 1);
        assert_eq!(pair(1, 1), 4);
    }

    #[test]
    fn unpair_examples() {
        assert_eq!(unpair(0), (0, 0));
        assert_eq!(unpair(2), (1, 0));
        assert_eq!(unpair(5), (2, 0));
    }

    #[test]
    fn pair_matches_diagonal_walk() {
        for (k, (n, m)) in cantor_enumeration(2000).into_iter().enumerate() {
            assert_eq!(pair(n, m), k as u64);
            assert_eq!(unpair(k as u64), (n, m));
        }
    }

    #[test]
    fn unpair_large_values() {
        for k in [u32::MAX as u64, 1 << 40, (1 << 52) + 12345] {
            let (n, m) = unpair(k);
            assert_eq!(pair(n, m), k);
        }
        assert_eq!(checked_pair(u64::MAX, 1), None);
    }

    #[test]
    fn theta_examples_and_rejection() {
        assert_eq!(theta(&FinSeq::empty()).unwrap(), 0);
        assert_eq!(theta(&seq(&[1])).unwrap(), 2);
        assert_eq!(theta(&seq(&[0, 1])).unwrap(), 4);
        assert!(matches!(theta(&seq(&[2])), Err(SeqError::NotBinary(_))));
    }

    #[test]
    fn theta_is_position_in_length_lex_listing() {
        let listing: Vec<FinSeq> = (0..=6).flat_map(binary_sequences_of_len).collect();
        for (pos, u) in listing.iter().enumerate() {
            assert_eq!(theta(u).unwrap(), pos as u64);
        }
    }

    #[test]
    fn seq_code_examples() {
        assert_eq!(seq_code(&FinSeq::empty()).unwrap(), 0);
        assert_eq!(seq_code(&seq(&[0])).unwrap(), 1);
        assert_eq!(seq_code(&seq(&[0, 0])).unwrap(), 3);
        assert_eq!(seq_decode(3), seq(&[0, 0]));
    }

    #[test]
    fn seq_code_is_bijective_on_small_codes() {
        for k in 0..5000u64 {
            assert_eq!(seq_code(&seq_decode(k)).unwrap(), k);
        }
        for s in sequences_upto(3, 4) {
            assert_eq!(seq_decode(seq_code(&s).unwrap()), s);
        }
    }

    #[test]
    fn seq_code_overflow_is_an_error() {
        let long = FinSeq::new(vec![u32::MAX as u64; 6]);
        assert!(matches!(seq_code(&long), Err(SeqError::Overflow(_))));
    }

    #[test]
    fn seq_add_examples() {
        assert_eq!(seq_add(&seq(&[1, 2]), &seq(&[3, 4])).unwrap(), seq(&[4, 6]));
        assert_eq!(seq_add(&FinSeq::empty(), &FinSeq::empty()).unwrap(), FinSeq::empty());
        assert_eq!(seq_add(&seq(&[0, 0]), &seq(&[5, 7])).unwrap(), seq(&[5, 7]));
        assert!(seq_add(&seq(&[1]), &seq(&[1, 2])).is_err());
    }

    #[test]
    fn order_examples() {
        assert!(preceq(&seq(&[5]), &seq(&[0, 0])));
        assert!(!preceq(&seq(&[0, 1]), &seq(&[0, 0])));
        assert!(pointwise_leq(&seq(&[1, 2]), &seq(&[1, 3])).unwrap());
        assert!(pointwise_leq(&seq(&[1]), &seq(&[1, 3])).is_err());
        assert!(lex_leq(&seq(&[0, 5]), &seq(&[1])));
    }

    #[test]
    fn preceq_is_a_linear_order_on_truncation() {
        let universe = sequences_upto(3, 3);
        for a in &universe {
            assert!(preceq(a, a));
            for b in &universe {
                assert!(preceq(a, b) || preceq(b, a));
                if preceq(a, b) && preceq(b, a) {
                    assert_eq!(a, b);
                }
                for c in &universe {
                    if preceq(a, b) && preceq(b, c) {
                        assert!(preceq(a, c));
                    }
                }
            }
        }
        let mut sorted = universe.clone();
        sorted.sort();
        assert_eq!(sorted, universe);
    }

    #[test]
    fn rendering_round_trips() {
        for s in [FinSeq::empty(), seq(&[3]), seq(&[1, 22, 0])] {
            assert_eq!(s.to_string().parse::<FinSeq>().unwrap(), s);
        }
        assert_eq!(FinSeq::empty().to_string(), "[]");
        assert_eq!(seq(&[0, 1, 1]).to_bit_string(), "011");
        assert_eq!(FinSeq::from_bit_string("011").unwrap(), seq(&[0, 1, 1]));
        assert!(FinSeq::from_bit_string("012").is_err());
    }
}
