//! Exact probabilities as 64-bit fixed-point fractions.
//!
//! Every probability in the toolkit is a numerator over 2^64. The numerator
//! is held in a `u128` because 1 itself must be representable (numerator
//! 2^64, one past `u64::MAX`). All threshold comparisons against per-site
//! randomness are integer compares, so site classification is reproducible
//! bit for bit across platforms and never depends on float rounding.

use crate::error::{DreError, Result};

/// 2^64 as a u128, the denominator of every stored fraction.
pub const UNIT: u128 = 1 << 64;

/// A probability in [0, 1], stored as an exact numerator over 2^64.
#[derive(Copy, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Debug)]
pub struct Prob(u128);

impl Prob {
    pub const ZERO: Prob = Prob(0);
    pub const ONE: Prob = Prob(UNIT);
    pub const HALF: Prob = Prob(1 << 63);

    pub fn from_numerator(num: u128) -> Result<Prob> {
        if num > UNIT {
            return Err(DreError::InvalidModel(format!(
                "probability numerator {num:#x} exceeds 2^64"
            )));
        }
        Ok(Prob(num))
    }

    /// Parse a decimal string ("0", "1", "0.35", ".5") to the nearest
    /// representable fraction, ties rounding up. At most 19 fractional
    /// digits; the value must lie in [0, 1].
    pub fn from_decimal_str(s: &str) -> Result<Prob> {
        let (digits, scale) = parse_decimal(s)?;
        // digits / 10^scale, both < 2^64, so digits << 64 fits in u128
        let den = 10u128.pow(scale);
        if digits > den {
            return Err(DreError::Parse(format!("probability {s:?} exceeds 1")));
        }
        Ok(Prob(div_round_half_up(digits << 64, den)))
    }

    #[inline]
    pub fn numerator(&self) -> u128 {
        self.0
    }

    pub fn is_zero(&self) -> bool {
        self.0 == 0
    }

    pub fn is_one(&self) -> bool {
        self.0 == UNIT
    }

    pub fn complement(&self) -> Prob {
        Prob(UNIT - self.0)
    }

    pub fn to_f64(&self) -> f64 {
        self.0 as f64 / UNIT as f64
    }

    /// Canonical lowercase-hex form used in digests and golden files.
    pub fn canonical(&self) -> String {
        format!("{:#x}", self.0)
    }
}

impl std::fmt::Display for Prob {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "{}", self.to_f64())
    }
}

/// Convert nonnegative decimal weights into exact fractions summing to
/// exactly one. The weights are normalized by their exact rational sum and
/// the numerators are produced from rounded cumulative sums, so the total
/// is 2^64 regardless of how the individual roundings fall.
pub fn normalize_weights(ws: &[String]) -> Result<Vec<Prob>> {
    if ws.is_empty() {
        return Err(DreError::InvalidModel("empty weight list".into()));
    }
    if ws.len() > 4096 {
        return Err(DreError::Resource(format!("{} weights (cap 4096)", ws.len())));
    }
    let mut parsed = Vec::with_capacity(ws.len());
    let mut max_scale = 0;
    for w in ws {
        let (digits, scale) = parse_decimal(w)?;
        if scale > 12 {
            return Err(DreError::Parse(format!(
                "weight {w:?} has more than 12 fractional digits"
            )));
        }
        max_scale = max_scale.max(scale);
        parsed.push((digits, scale));
    }
    // common denominator 10^max_scale; every term stays far below 2^64
    let mut total: u128 = 0;
    let scaled: Vec<u128> = parsed
        .iter()
        .map(|&(digits, scale)| digits * 10u128.pow(max_scale - scale))
        .collect();
    for &v in &scaled {
        total += v;
    }
    if total == 0 {
        return Err(DreError::InvalidModel("weights sum to zero".into()));
    }
    let mut out = Vec::with_capacity(ws.len());
    let mut prev_cum = 0u128;
    let mut prefix = 0u128;
    for &v in &scaled {
        prefix += v;
        let cum = div_round_half_up(prefix << 64, total);
        out.push(Prob(cum - prev_cum));
        prev_cum = cum;
    }
    debug_assert_eq!(prev_cum, UNIT);
    Ok(out)
}

fn parse_decimal(s: &str) -> Result<(u128, u32)> {
    let s = s.trim();
    let bad = || DreError::Parse(format!("bad decimal {s:?}"));
    if s.is_empty() {
        return Err(bad());
    }
    let (int_part, frac_part) = match s.split_once('.') {
        Some((i, f)) => (i, f),
        None => (s, ""),
    };
    if int_part.is_empty() && frac_part.is_empty() {
        return Err(bad());
    }
    if !int_part.bytes().all(|b| b.is_ascii_digit()) || !frac_part.bytes().all(|b| b.is_ascii_digit()) {
        return Err(bad());
    }
    if frac_part.len() > 19 || int_part.len() > 19 {
        return Err(DreError::Parse(format!("decimal {s:?} has too many digits")));
    }
    let mut digits: u128 = 0;
    for b in int_part.bytes().chain(frac_part.bytes()) {
        digits = digits * 10 + (b - b'0') as u128;
    }
    Ok((digits, frac_part.len() as u32))
}

fn div_round_half_up(n: u128, d: u128) -> u128 {
    let q = n / d;
    let r = n % d;
    if 2 * r >= d {
        q + 1
    } else {
        q
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn endpoints_and_half() {
        assert_eq!(Prob::from_decimal_str("0").unwrap(), Prob::ZERO);
        assert_eq!(Prob::from_decimal_str("1").unwrap(), Prob::ONE);
        assert_eq!(Prob::from_decimal_str("0.5").unwrap(), Prob::HALF);
        assert_eq!(Prob::from_decimal_str(".5").unwrap(), Prob::HALF);
        assert_eq!(Prob::from_decimal_str("1.0").unwrap(), Prob::ONE);
    }

    #[test]
    fn seven_tenths_rounds_half_up() {
        // 7 * 2^64 / 10 = 12912720851596686131.2
        let p = Prob::from_decimal_str("0.7").unwrap();
        assert_eq!(p.numerator(), 12912720851596686131);
        assert_eq!(p.canonical(), "0xb333333333333333");
    }

    #[test]
    fn rejects_out_of_range() {
        assert!(Prob::from_decimal_str("1.5").is_err());
        assert!(Prob::from_decimal_str("-0.5").is_err());
        assert!(Prob::from_decimal_str("").is_err());
        assert!(Prob::from_decimal_str("0.5.5").is_err());
        assert!(Prob::from_numerator(UNIT + 1).is_err());
    }

    #[test]
    fn weights_sum_exactly_to_one() {
        for ws in [
            vec!["0.3".to_string(), "0.7".to_string()],
            vec!["0.1".into(), "0.1".into(), "0.8".into()],
            vec!["1".into(), "1".into(), "1".into()], // normalized thirds
            vec!["0.333333".into(), "0.333333".into(), "0.333334".into()],
        ] {
            let probs = normalize_weights(&ws).unwrap();
            let total: u128 = probs.iter().map(|p| p.numerator()).sum();
            assert_eq!(total, UNIT, "weights {ws:?}");
        }
    }

    #[test]
    fn thirds_are_near_exact() {
        let ws: Vec<String> = vec!["1".into(), "1".into(), "1".into()];
        let probs = normalize_weights(&ws).unwrap();
        for p in &probs {
            let err = (p.to_f64() - 1.0 / 3.0).abs();
            assert!(err < 1e-18, "third off by {err}");
        }
    }
}
