//! Integer arguments: decimal, `a^b`, `1e8`, and sums or differences of those (`2^500+1`).

use num_bigint::{BigInt, BigUint};
use num_traits::{Signed, ToPrimitive};

fn term(t: &str) -> Result<BigInt, String> {
    let t = t.trim();
    if let Some((b, e)) = t.split_once('^') {
        let base: BigInt = b.trim().parse().map_err(|_| format!("bad base {b:?}"))?;
        let exp: u32 = e.trim().parse().map_err(|_| format!("bad exponent {e:?}"))?;
        if exp > 1_000_000 {
            return Err("exponent too large".into());
        }
        return Ok(num_traits::pow(base, exp as usize));
    }
    if let Some((m, e)) = t.split_once(['e', 'E']) {
        let mant: BigInt = m.trim().parse().map_err(|_| format!("bad mantissa {m:?}"))?;
        let exp: u32 = e.trim().parse().map_err(|_| format!("bad exponent {e:?}"))?;
        if exp > 10_000 {
            return Err("exponent too large".into());
        }
        return Ok(mant * num_traits::pow(BigInt::from(10), exp as usize));
    }
    let digits: String = t.chars().filter(|&c| c != '_').collect();
    digits.parse().map_err(|_| format!("bad integer {t:?}"))
}

pub fn parse_bigint(s: &str) -> Result<BigInt, String> {
    let s = s.trim();
    if s.is_empty() {
        return Err("empty number".into());
    }
    let mut total = BigInt::from(0);
    let mut sign = 1;
    let mut start = 0;
    let bytes = s.as_bytes();
    // leading sign belongs to the first term
    let mut i = if bytes[0] == b'-' || bytes[0] == b'+' { 1 } else { 0 };
    if bytes[0] == b'-' {
        sign = -1;
        start = 1;
    } else if bytes[0] == b'+' {
        start = 1;
    }
    while i <= bytes.len() {
        let at_end = i == bytes.len();
        let split = !at_end && (bytes[i] == b'+' || bytes[i] == b'-') && i > start && !matches!(bytes[i - 1], b'e' | b'E' | b'^');
        if at_end || split {
            let v = term(&s[start..i])?;
            total += if sign < 0 { -v } else { v };
            if !at_end {
                sign = if bytes[i] == b'-' { -1 } else { 1 };
                start = i + 1;
            }
        }
        i += 1;
    }
    Ok(total)
}

pub fn parse_biguint(s: &str) -> Result<BigUint, String> {
    let v = parse_bigint(s)?;
    if v.is_negative() {
        return Err(format!("{s:?} must be non-negative"));
    }
    Ok(v.magnitude().clone())
}

pub fn parse_u64(s: &str) -> Result<u64, String> {
    parse_biguint(s)?.to_u64().ok_or_else(|| format!("{s:?} does not fit in 64 bits"))
}

pub fn parse_i128(s: &str) -> Result<i128, String> {
    parse_bigint(s)?.to_i128().ok_or_else(|| format!("{s:?} does not fit in 128 bits"))
}

pub fn parse_i64(s: &str) -> Result<i64, String> {
    parse_bigint(s)?.to_i64().ok_or_else(|| format!("{s:?} does not fit in 64 bits"))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn forms() {
        assert_eq!(parse_u64("1000000").unwrap(), 1_000_000);
        assert_eq!(parse_u64("1e8").unwrap(), 100_000_000);
        assert_eq!(parse_u64("2^40").unwrap(), 1 << 40);
        assert_eq!(parse_i128("-2^10+1").unwrap(), -1023);
        assert_eq!(parse_i128("3^2-2^3").unwrap(), 1);
        assert_eq!(parse_biguint("2^500+1").unwrap().bits(), 501);
        assert!(parse_u64("-5").is_err());
        assert!(parse_u64("x").is_err());
    }
}
