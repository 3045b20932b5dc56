//! Proof-of-work target representation.
//!
//! Targets are exact 256-bit integers. Everything derived from them
//! (difficulty, per-hash success probability) is `f64`.

use std::fmt;
use std::str::FromStr;

use num_bigint::BigUint;
use num_traits::{One, ToPrimitive, Zero};
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ChainError {
    #[error("compact bits {0:#010x} have a zero mantissa")]
    ZeroMantissa(u32),
    #[error("compact bits {0:#010x} have the sign bit set (negative target)")]
    NegativeMantissa(u32),
    #[error("compact bits {0:#010x}: exponent must lie in [3, 32]")]
    ExponentOutOfRange(u32),
    #[error("target does not fit in 256 bits")]
    Overflow,
    #[error("target must satisfy 0 < target < 2^256")]
    TargetOutOfRange,
    #[error("difficulty must be positive and finite, got {0}")]
    NonPositiveDifficulty(f64),
    #[error("success probability must lie in (0, 1), got {0}")]
    ProbabilityOutOfRange(f64),
    #[error("cannot parse {what} from {input:?}")]
    Parse { what: &'static str, input: String },
}

/// Exact 256-bit proof-of-work target, `0 < value < 2^256`.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Target256(BigUint);

/// 2^-256, built from its bit pattern.
const TWO_POW_MINUS_256: f64 = f64::from_bits(((1023 - 256) as u64) << 52);

impl Target256 {
    pub fn new(value: BigUint) -> Result<Self, ChainError> {
        if value.is_zero() || value.bits() > 256 {
            return Err(ChainError::TargetOutOfRange);
        }
        Ok(Target256(value))
    }

    pub fn from_u64(value: u64) -> Result<Self, ChainError> {
        Self::new(BigUint::from(value))
    }

    /// `2^exp`, for `exp < 256`.
    pub fn pow2(exp: u32) -> Result<Self, ChainError> {
        Self::new(BigUint::one() << exp)
    }

    pub fn from_hex(s: &str) -> Result<Self, ChainError> {
        let digits = strip_hex_prefix(s);
        let value = BigUint::parse_bytes(digits.as_bytes(), 16).ok_or_else(|| ChainError::Parse {
            what: "hex target",
            input: s.to_string(),
        })?;
        Self::new(value)
    }

    pub fn value(&self) -> &BigUint {
        &self.0
    }

    /// Nearest `f64` (round half to even).
    pub fn to_f64(&self) -> f64 {
        biguint_to_f64(&self.0)
    }
}

impl fmt::Display for Target256 {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "0x{:064x}", self.0)
    }
}

impl FromStr for Target256 {
    type Err = ChainError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Self::from_hex(s)
    }
}

fn biguint_to_f64(v: &BigUint) -> f64 {
    let bits = v.bits();
    if bits <= 64 {
        return v.to_u64().expect("fits in u64") as f64;
    }
    let shift = bits - 64;
    let top = (v >> shift).to_u64().expect("64 leading bits");
    // Fold the discarded bits into a sticky bit below the rounding position,
    // so the u64 -> f64 conversion rounds exactly as the full value would.
    let sticky = v.trailing_zeros().is_some_and(|tz| tz < shift);
    (top | sticky as u64) as f64 * 2f64.powi(shift as i32)
}

fn strip_hex_prefix(s: &str) -> &str {
    let s = s.trim();
    s.strip_prefix("0x").or_else(|| s.strip_prefix("0X")).unwrap_or(s)
}

/// Compact ("nBits") target encoding: exponent byte, 3-byte mantissa,
/// `value = mantissa * 256^(exponent - 3)`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct CompactBits(pub u32);

impl CompactBits {
    pub fn exponent(self) -> u32 {
        self.0 >> 24
    }

    pub fn mantissa(self) -> u32 {
        self.0 & 0x00ff_ffff
    }

    pub fn decode(self) -> Result<Target256, ChainError> {
        decode_compact(self)
    }
}

impl fmt::Display for CompactBits {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{:#010x}", self.0)
    }
}

impl FromStr for CompactBits {
    type Err = ChainError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let digits = strip_hex_prefix(s);
        let err = || ChainError::Parse {
            what: "compact bits (8 hex digits)",
            input: s.to_string(),
        };
        if digits.len() != 8 {
            return Err(err());
        }
        u32::from_str_radix(digits, 16).map(CompactBits).map_err(|_| err())
    }
}

pub fn decode_compact(bits: CompactBits) -> Result<Target256, ChainError> {
    let exponent = bits.exponent();
    let mantissa = bits.mantissa();
    if !(3..=32).contains(&exponent) {
        return Err(ChainError::ExponentOutOfRange(bits.0));
    }
    if mantissa & 0x0080_0000 != 0 {
        return Err(ChainError::NegativeMantissa(bits.0));
    }
    if mantissa == 0 {
        return Err(ChainError::ZeroMantissa(bits.0));
    }
    let value = BigUint::from(mantissa) << (8 * (exponent - 3));
    if value.bits() > 256 {
        return Err(ChainError::Overflow);
    }
    Target256::new(value)
}

/// Compact encoding with the exponent floored at 3, so that
/// `decode_compact(encode_compact(t))` is `t` truncated to 3 significant
/// bytes, and `encode_compact(decode_compact(b)) == b` for normalized `b`.
pub fn encode_compact(target: &Target256) -> CompactBits {
    let value = target.value();
    let mut size = value.bits().div_ceil(8) as u32;
    let mut mantissa = if size <= 3 {
        size = 3;
        value.to_u32().expect("at most 3 bytes")
    } else {
        (value >> (8 * (size - 3) as u64)).to_u32().expect("3 bytes")
    };
    if mantissa & 0x0080_0000 != 0 {
        mantissa >>= 8;
        size += 1;
    }
    CompactBits((size << 24) | mantissa)
}

/// Network difficulty `D = T1 / target`.
#[derive(Clone, Copy, Debug, PartialEq, PartialOrd)]
pub struct Difficulty(f64);

impl Difficulty {
    pub fn new(d: f64) -> Result<Self, ChainError> {
        if d.is_finite() && d > 0.0 {
            Ok(Difficulty(d))
        } else {
            Err(ChainError::NonPositiveDifficulty(d))
        }
    }

    pub fn value(self) -> f64 {
        self.0
    }
}

impl FromStr for Difficulty {
    type Err = ChainError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let cleaned: String = s.trim().chars().filter(|c| *c != ',' && *c != '_').collect();
        let d: f64 = cleaned.parse().map_err(|_| ChainError::Parse {
            what: "difficulty",
            input: s.to_string(),
        })?;
        Difficulty::new(d)
    }
}

/// Per-hash success probability `p = target / 2^256`.
#[derive(Clone, Copy, Debug, PartialEq, PartialOrd)]
pub struct HashProbability(f64);

impl HashProbability {
    pub fn new(p: f64) -> Result<Self, ChainError> {
        if p > 0.0 && p < 1.0 {
            Ok(HashProbability(p))
        } else {
            Err(ChainError::ProbabilityOutOfRange(p))
        }
    }

    pub fn value(self) -> f64 {
        self.0
    }
}

pub fn success_probability(target: &Target256) -> HashProbability {
    HashProbability(target.to_f64() * TWO_POW_MINUS_256)
}

/// Chain constants. Only the difficulty-1 target matters here.
#[derive(Clone, Debug, PartialEq)]
pub struct ChainParams {
    pub t1: Target256,
}

impl ChainParams {
    /// Mainnet: `T1 = 0xffff * 256^26` (compact `0x1d00ffff`).
    pub fn mainnet() -> Self {
        ChainParams {
            t1: decode_compact(CompactBits(0x1d00_ffff)).expect("mainnet T1"),
        }
    }

    /// `floor(T1 / d)`, computed exactly: `d` is a dyadic rational
    /// `m * 2^e`, so the quotient is an integer division after shifting.
    pub fn target_from_difficulty(&self, d: Difficulty) -> Result<Target256, ChainError> {
        let (m, e) = decompose(d.value());
        let t1 = self.t1.value();
        let q = if e >= 0 {
            (t1 / m) >> e as u64
        } else {
            (t1 << (-e) as u64) / m
        };
        if q.is_zero() {
            return Err(ChainError::TargetOutOfRange);
        }
        if q.bits() > 256 {
            return Err(ChainError::Overflow);
        }
        Target256::new(q)
    }

    pub fn difficulty_from_target(&self, target: &Target256) -> Difficulty {
        Difficulty(self.t1.to_f64() / target.to_f64())
    }
}

impl Default for ChainParams {
    fn default() -> Self {
        Self::mainnet()
    }
}

/// Split a positive finite `f64` into `(m, e)` with `x = m * 2^e`.
fn decompose(x: f64) -> (u64, i32) {
    let bits = x.to_bits();
    let exp_bits = ((bits >> 52) & 0x7ff) as i32;
    let frac = bits & ((1u64 << 52) - 1);
    if exp_bits == 0 {
        (frac, -1074)
    } else {
        (frac | (1u64 << 52), exp_bits - 1075)
    }
}
