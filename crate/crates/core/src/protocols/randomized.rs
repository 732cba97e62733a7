//! Anonymous election: every process draws a fixed-length random
//! identifier and runs the elimination protocol on it.

use std::fmt;
use std::str::FromStr;

use num_bigint::BigUint;
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::codec::EncodedId;

use super::{LogElection, ProtocolError};

/// A non-negative rational exponent, so `ceil(c * log2 U)` can be computed
/// exactly with integer arithmetic.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(try_from = "f64", into = "f64")]
pub struct Exponent {
    num: u64,
    den: u64,
}

fn gcd(a: u64, b: u64) -> u64 {
    if b == 0 {
        a
    } else {
        gcd(b, a % b)
    }
}

impl Exponent {
    pub fn new(num: u64, den: u64) -> Result<Self, ProtocolError> {
        if den == 0 {
            return Err(ProtocolError::BadParam(
                "exponent denominator is zero".into(),
            ));
        }
        let g = gcd(num, den).max(1);
        Ok(Self {
            num: num / g,
            den: den / g,
        })
    }

    pub const fn integer(k: u64) -> Self {
        Self { num: k, den: 1 }
    }

    pub fn num(&self) -> u64 {
        self.num
    }

    pub fn den(&self) -> u64 {
        self.den
    }

    pub fn plus(self, k: u64) -> Self {
        Self::new(self.num + k * self.den, self.den).expect("den is non-zero")
    }

    pub fn as_f64(&self) -> f64 {
        self.num as f64 / self.den as f64
    }
}

impl PartialOrd for Exponent {
    fn partial_cmp(&self, other: &Self) -> Option<std::cmp::Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for Exponent {
    fn cmp(&self, other: &Self) -> std::cmp::Ordering {
        (self.num as u128 * other.den as u128).cmp(&(other.num as u128 * self.den as u128))
    }
}

impl FromStr for Exponent {
    type Err = ProtocolError;

    /// Exact parse of a plain decimal such as `3`, `2.5` or `0.125`.
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let bad = || ProtocolError::BadParam(format!("not a non-negative decimal: {s:?}"));
        let (int, frac) = s.split_once('.').unwrap_or((s, ""));
        if int.is_empty() && frac.is_empty() {
            return Err(bad());
        }
        if !int.chars().chain(frac.chars()).all(|c| c.is_ascii_digit()) || frac.len() > 18 {
            return Err(bad());
        }
        let den = 10u64.pow(frac.len() as u32);
        let int: u64 = if int.is_empty() {
            0
        } else {
            int.parse().map_err(|_| bad())?
        };
        let frac: u64 = if frac.is_empty() {
            0
        } else {
            frac.parse().map_err(|_| bad())?
        };
        let num = int
            .checked_mul(den)
            .and_then(|v| v.checked_add(frac))
            .ok_or_else(bad)?;
        Exponent::new(num, den)
    }
}

impl TryFrom<f64> for Exponent {
    type Error = ProtocolError;

    fn try_from(x: f64) -> Result<Self, Self::Error> {
        if !x.is_finite() || x < 0.0 {
            return Err(ProtocolError::BadParam(format!(
                "exponent must be finite and >= 0: {x}"
            )));
        }
        // Display gives the shortest decimal that round-trips, i.e. what the
        // user wrote.
        format!("{x}").parse()
    }
}

impl From<Exponent> for f64 {
    fn from(e: Exponent) -> f64 {
        e.as_f64()
    }
}

impl fmt::Display for Exponent {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.den == 1 {
            write!(f, "{}", self.num)
        } else {
            write!(f, "{}/{}", self.num, self.den)
        }
    }
}

/// `ceil(e * log2(bound))`, exactly.
///
/// `k * den >= log2(bound^num)` holds iff `k * den >= ceil(log2(bound^num))`,
/// and `ceil(log2 x)` is the bit length of `x - 1`.
pub fn ceil_log2_pow(bound: u64, e: Exponent) -> u64 {
    if bound <= 1 || e.num == 0 {
        return 0;
    }
    let x = BigUint::from(bound).pow(e.num as u32);
    let ceil_log = (x - 1u32).bits();
    ceil_log.div_ceil(e.den)
}

/// Parameters of the randomized election.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct RandomizedParams {
    pub bound: u64,
    pub c: Exponent,
    pub c1: Exponent,
    pub c2: Exponent,
}

impl RandomizedParams {
    /// Defaults `c1 = c2 = c + 2`.
    pub fn new(bound: u64, c: Exponent) -> Result<Self, ProtocolError> {
        Self::with_exponents(bound, c, c.plus(2), c.plus(2))
    }

    pub fn with_exponents(
        bound: u64,
        c: Exponent,
        c1: Exponent,
        c2: Exponent,
    ) -> Result<Self, ProtocolError> {
        if bound == 0 {
            return Err(ProtocolError::BadParam("U must be at least 1".into()));
        }
        if c1 < c.plus(2) || c2 < c.plus(2) {
            return Err(ProtocolError::BadParam(format!(
                "c1 = {c1} and c2 = {c2} must both be at least c + 2 = {}",
                c.plus(2)
            )));
        }
        let params = Self { bound, c, c1, c2 };
        if params.id_exponent() > 61 {
            return Err(ProtocolError::BadParam(format!(
                "identifiers of {} bits do not fit in 64 bits",
                params.id_len()
            )));
        }
        Ok(params)
    }

    /// `k = ceil(c1 * log2 U)`; draws are uniform on `0..2^k`.
    pub fn id_exponent(&self) -> u64 {
        ceil_log2_pow(self.bound, self.c1)
    }

    /// Bit length of every drawn identifier, `k + 2`.
    pub fn id_len(&self) -> usize {
        self.id_exponent() as usize + 2
    }

    /// `ceil(c2 * log2 U)`, at least 1.
    pub fn d(&self) -> u64 {
        ceil_log2_pow(self.bound, self.c2).max(1)
    }

    /// Number of distinct identifiers a draw can produce.
    pub fn id_space(&self) -> u64 {
        1u64 << self.id_exponent()
    }

    /// Lower bound `1 - U^-c` on the success probability.
    pub fn success_bound(&self) -> f64 {
        1.0 - (self.bound as f64).powf(-self.c.as_f64())
    }

    /// Clockwise pulses every process sends on a successful run.
    pub fn expected_cw_per_process(&self) -> u64 {
        (2 * self.id_len() as u64 - 1) * self.d()
    }
}

/// `2 * (2^k + draw)`.
pub fn randomized_id_from_draw(params: &RandomizedParams, draw: u64) -> Result<u64, ProtocolError> {
    if draw >= params.id_space() {
        return Err(ProtocolError::BadParam(format!(
            "draw {draw} outside 0..{}",
            params.id_space()
        )));
    }
    Ok(2 * (params.id_space() + draw))
}

pub fn randomized_make_id<R: Rng + ?Sized>(params: &RandomizedParams, rng: &mut R) -> u64 {
    let draw = rng.gen_range(0..params.id_space());
    2 * (params.id_space() + draw)
}

/// Draws an identifier and wraps it, unencoded, in the elimination protocol
/// with `d = ceil(c2 * log2 U)`.
pub fn randomized_election_new<R: Rng + ?Sized>(
    params: &RandomizedParams,
    rng: &mut R,
) -> Result<LogElection, ProtocolError> {
    let id = randomized_make_id(params, rng);
    let bits = EncodedId::from_raw(id).expect("drawn identifiers are positive");
    LogElection::new(bits, params.d())
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn params(bound: u64, c: u64) -> RandomizedParams {
        RandomizedParams::new(bound, Exponent::integer(c)).unwrap()
    }

    #[test]
    fn ids_from_draws() {
        let p = RandomizedParams::with_exponents(
            4,
            Exponent::integer(1),
            Exponent::integer(3),
            Exponent::integer(3),
        )
        .unwrap();
        assert_eq!(p.id_exponent(), 6);
        assert_eq!(randomized_id_from_draw(&p, 0).unwrap(), 128);
        assert_eq!(randomized_id_from_draw(&p, 63).unwrap(), 254);
        assert!(randomized_id_from_draw(&p, 64).is_err());
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        for _ in 0..200 {
            let id = randomized_make_id(&p, &mut rng);
            assert_eq!(id % 2, 0);
            assert_eq!(64 - id.leading_zeros(), 8);
        }
    }

    #[test]
    fn derived_lengths() {
        let p = params(4, 1);
        assert_eq!(p.d(), 6);
        assert_eq!(p.id_len(), 8);
        let p = params(16, 1);
        assert_eq!(p.d(), 12);
        assert_eq!(p.id_exponent(), 12);
        assert_eq!(p.id_len(), 14);
        assert_eq!(p.expected_cw_per_process(), 27 * 12);
    }

    #[test]
    fn exact_ceil_log() {
        assert_eq!(ceil_log2_pow(16, Exponent::integer(3)), 12);
        assert_eq!(ceil_log2_pow(5, Exponent::integer(1)), 3);
        assert_eq!(ceil_log2_pow(8, Exponent::integer(1)), 3);
        assert_eq!(ceil_log2_pow(9, Exponent::integer(1)), 4);
        // 2.5 * log2(3) = 3.96...
        assert_eq!(ceil_log2_pow(3, "2.5".parse().unwrap()), 4);
        // 1.5 * log2(4) = 3 exactly
        assert_eq!(ceil_log2_pow(4, "1.5".parse().unwrap()), 3);
        assert_eq!(ceil_log2_pow(1, Exponent::integer(7)), 0);
        for bound in 1..200u64 {
            for c in 1..5u64 {
                let expected = (c as f64 * (bound as f64).log2() - 1e-9).ceil().max(0.0) as u64;
                assert_eq!(
                    ceil_log2_pow(bound, Exponent::integer(c)),
                    expected,
                    "U={bound} c={c}"
                );
            }
        }
    }

    #[test]
    fn exponent_parsing() {
        assert_eq!("3".parse::<Exponent>().unwrap(), Exponent::integer(3));
        assert_eq!(
            Exponent::try_from(2.5).unwrap(),
            Exponent::new(5, 2).unwrap()
        );
        assert!("-1".parse::<Exponent>().is_err());
        assert!(Exponent::try_from(f64::NAN).is_err());
        assert_eq!(Exponent::integer(1).plus(2), Exponent::integer(3));
    }

    #[test]
    fn exponents_below_c_plus_two_are_rejected() {
        let r = RandomizedParams::with_exponents(
            8,
            Exponent::integer(1),
            Exponent::integer(2),
            Exponent::integer(3),
        );
        assert!(r.is_err());
    }

    #[test]
    fn same_seed_same_machine() {
        let p = params(16, 1);
        let a = randomized_election_new(&p, &mut ChaCha8Rng::seed_from_u64(9)).unwrap();
        let b = randomized_election_new(&p, &mut ChaCha8Rng::seed_from_u64(9)).unwrap();
        assert_eq!(a, b);
        assert_eq!(a.d(), 12);
        assert!(a.id().ends_with_zero());
    }
}
