//! Identifier encoding and the arrangement predicates the elimination
//! protocol relies on.
//!
//! Bits are indexed from 1, most significant first, so `bit(1)` is the
//! leading bit of an identifier.

use std::fmt;

use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum CodecError {
    #[error("identifier 0 has no binary length and cannot be encoded")]
    InvalidId,
    #[error("bit index {index} outside 1..={len}")]
    OutOfRange { index: usize, len: usize },
    #[error("prefix of {0} bits does not fit in 128 bits")]
    TooWide(usize),
    #[error("no unique minimum identifier")]
    NoUniqueMin,
    #[error("arrangement is empty")]
    EmptyArrangement,
    #[error("bit string must be non-empty, start with 1 and contain only 0/1: {0:?}")]
    Malformed(String),
}

/// A finite bit string that starts with 1.
#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct EncodedId {
    bits: Vec<bool>,
}

impl EncodedId {
    /// The plain binary representation of `value`, without any encoding.
    pub fn from_raw(value: u64) -> Result<Self, CodecError> {
        if value == 0 {
            return Err(CodecError::InvalidId);
        }
        Ok(Self {
            bits: binary_digits(value),
        })
    }

    /// Parses a string such as `"110100"`.
    pub fn parse(s: &str) -> Result<Self, CodecError> {
        let mut bits = Vec::with_capacity(s.len());
        for c in s.chars() {
            match c {
                '0' => bits.push(false),
                '1' => bits.push(true),
                _ => return Err(CodecError::Malformed(s.to_owned())),
            }
        }
        if bits.first() != Some(&true) {
            return Err(CodecError::Malformed(s.to_owned()));
        }
        Ok(Self { bits })
    }

    pub fn bits(&self) -> &[bool] {
        &self.bits
    }

    pub fn len(&self) -> usize {
        self.bits.len()
    }

    pub fn is_empty(&self) -> bool {
        self.bits.is_empty()
    }

    /// `bit(ID, i)` for `1 <= i <= len`.
    pub fn bit(&self, i: usize) -> Result<bool, CodecError> {
        if i == 0 || i > self.len() {
            return Err(CodecError::OutOfRange {
                index: i,
                len: self.len(),
            });
        }
        Ok(self.bits[i - 1])
    }

    /// First `i` bits, as a bit slice.
    pub fn prefix(&self, i: usize) -> &[bool] {
        &self.bits[..i.min(self.len())]
    }

    pub fn ends_with_zero(&self) -> bool {
        self.bits.last() == Some(&false)
    }

    pub fn zero_count(&self) -> usize {
        self.bits.iter().filter(|&&b| !b).count()
    }
}

impl fmt::Display for EncodedId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for &b in &self.bits {
            f.write_str(if b { "1" } else { "0" })?;
        }
        Ok(())
    }
}

impl fmt::Debug for EncodedId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "EncodedId({self})")
    }
}

fn binary_digits(value: u64) -> Vec<bool> {
    let width = 64 - value.leading_zeros() as usize;
    (0..width).rev().map(|k| (value >> k) & 1 == 1).collect()
}

/// Encodes `id` as `1^l 0 . bin(id) . 0` where `l` is the binary length of
/// `id`. The result has `2l + 2` bits.
pub fn encode(id: u64) -> Result<EncodedId, CodecError> {
    if id == 0 {
        return Err(CodecError::InvalidId);
    }
    let digits = binary_digits(id);
    let l = digits.len();
    let mut bits = Vec::with_capacity(2 * l + 2);
    bits.extend(std::iter::repeat_n(true, l));
    bits.push(false);
    bits.extend(digits);
    bits.push(false);
    Ok(EncodedId { bits })
}

/// Integer value of the first `i` bits of `e`.
pub fn prefix_value(e: &EncodedId, i: usize) -> Result<u128, CodecError> {
    if i == 0 || i > e.len() {
        return Err(CodecError::OutOfRange {
            index: i,
            len: e.len(),
        });
    }
    if i > 128 {
        return Err(CodecError::TooWide(i));
    }
    Ok(e.bits[..i]
        .iter()
        .fold(0u128, |acc, &b| (acc << 1) | b as u128))
}

/// Every pair `(short, long)` with `len(short) <= len(long)` satisfies
/// `value(short) <= pref_{len(short)}(long)`.
pub fn is_strongly_prefix_free(ids: &[EncodedId]) -> bool {
    for (a, x) in ids.iter().enumerate() {
        for y in &ids[a + 1..] {
            let (short, long) = if x.len() <= y.len() { (x, y) } else { (y, x) };
            let k = short.len();
            if short.len() == long.len() {
                continue;
            }
            // Equal-width bit strings compare like the integers they denote.
            if short.bits() > long.prefix(k) {
                return false;
            }
        }
    }
    true
}

pub fn is_zero_ended(ids: &[EncodedId]) -> bool {
    ids.iter().all(EncodedId::ends_with_zero)
}

/// Encoded identifiers in ring order; entry `j` belongs to `p_j`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Arrangement {
    ids: Vec<EncodedId>,
}

impl Arrangement {
    pub fn new(ids: Vec<EncodedId>) -> Result<Self, CodecError> {
        if ids.is_empty() {
            return Err(CodecError::EmptyArrangement);
        }
        Ok(Self { ids })
    }

    /// Encodes every raw identifier with [`encode`].
    pub fn encoded(raw: &[u64]) -> Result<Self, CodecError> {
        Self::new(raw.iter().map(|&id| encode(id)).collect::<Result<_, _>>()?)
    }

    /// Uses the plain binary form of each identifier.
    pub fn raw(raw: &[u64]) -> Result<Self, CodecError> {
        Self::new(
            raw.iter()
                .map(|&id| EncodedId::from_raw(id))
                .collect::<Result<_, _>>()?,
        )
    }

    pub fn ids(&self) -> &[EncodedId] {
        &self.ids
    }

    pub fn n(&self) -> usize {
        self.ids.len()
    }

    /// Length of the shortest identifier.
    pub fn min_len(&self) -> usize {
        self.ids.iter().map(EncodedId::len).min().unwrap_or(0)
    }

    /// Active sets for rounds `1..=min_len`, computed with the elimination
    /// recurrence: survivors of round `i` are the bit-0 members when there
    /// are any, otherwise everyone.
    pub fn rounds(&self) -> Vec<ActiveSets> {
        let mut active: Vec<usize> = (0..self.n()).collect();
        let mut out = Vec::with_capacity(self.min_len());
        for i in 1..=self.min_len() {
            let (zero, one): (Vec<usize>, Vec<usize>) =
                active.iter().partition(|&&j| !self.ids[j].bits[i - 1]);
            let next = if zero.is_empty() {
                active.clone()
            } else {
                zero.clone()
            };
            out.push(ActiveSets {
                all: active,
                zero,
                one,
            });
            active = next;
        }
        out
    }
}

/// `A_i` together with its split by the value of bit `i`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ActiveSets {
    pub all: Vec<usize>,
    pub zero: Vec<usize>,
    pub one: Vec<usize>,
}

/// Processes still active at round `i`: those whose first `i - 1` bits are
/// minimal over the arrangement. Split by their `i`-th bit.
pub fn active_sets(a: &Arrangement, i: usize) -> Result<ActiveSets, CodecError> {
    let lmin = a.min_len();
    if i == 0 || i > lmin {
        return Err(CodecError::OutOfRange {
            index: i,
            len: lmin,
        });
    }
    let min_prefix = a
        .ids
        .iter()
        .map(|e| e.prefix(i - 1))
        .min()
        .expect("non-empty");
    let all: Vec<usize> = (0..a.n())
        .filter(|&j| a.ids[j].prefix(i - 1) == min_prefix)
        .collect();
    let (zero, one) = all.iter().partition(|&&j| !a.ids[j].bits[i - 1]);
    Ok(ActiveSets { all, zero, one })
}

/// Whether every bit-1 active process sees a bit-0 active process fewer
/// than `d` active hops away in both directions, at every round in
/// which some bit-0 process exists.
pub fn is_d_scattered(a: &Arrangement, d: usize) -> bool {
    a.rounds().iter().all(|round| round_is_scattered(round, d))
}

fn round_is_scattered(round: &ActiveSets, d: usize) -> bool {
    if round.zero.is_empty() || round.one.is_empty() {
        return true;
    }
    let members = &round.all;
    let m = members.len();
    let is_zero: Vec<bool> = members
        .iter()
        .map(|j| round.zero.binary_search(j).is_ok())
        .collect();
    (0..m).filter(|&pos| !is_zero[pos]).all(|pos| {
        let forward = (1..m).find(|k| is_zero[(pos + k) % m]);
        let backward = (1..m).find(|k| is_zero[(pos + m - k) % m]);
        matches!((forward, backward), (Some(f), Some(b)) if f < d && b < d)
    })
}

/// Index of the process that survives every elimination round.
pub fn min_id_index(a: &Arrangement) -> Result<usize, CodecError> {
    let last = a.rounds().pop().expect("identifiers are non-empty");
    let survivors = if last.zero.is_empty() {
        last.all
    } else {
        last.zero
    };
    match survivors.as_slice() {
        [only] => Ok(*only),
        _ => Err(CodecError::NoUniqueMin),
    }
}
