use std::cmp::Ordering;
use std::fmt;
use std::str::FromStr;

use thiserror::Error;

/// Non-negative rational number used for every tolerance and tuning factor
/// (ε, temperatures, deadzone factor) so comparisons stay exact.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct Fraction {
    num: u64,
    den: u64,
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum FractionError {
    #[error(
        "invalid number {0:?}: expected a non-negative decimal like 0.03 or a ratio like 3/100"
    )]
    Invalid(String),
    #[error("denominator must be positive")]
    ZeroDenominator,
    #[error("number {0:?} has too many digits")]
    TooPrecise(String),
}

fn gcd(mut a: u64, mut b: u64) -> u64 {
    while b != 0 {
        (a, b) = (b, a % b);
    }
    a
}

impl Fraction {
    pub const ZERO: Fraction = Fraction { num: 0, den: 1 };
    pub const ONE: Fraction = Fraction { num: 1, den: 1 };

    pub fn new(num: u64, den: u64) -> Result<Self, FractionError> {
        if den == 0 {
            return Err(FractionError::ZeroDenominator);
        }
        let g = gcd(num, den).max(1);
        Ok(Self {
            num: num / g,
            den: den / g,
        })
    }

    pub fn num(self) -> u64 {
        self.num
    }

    pub fn den(self) -> u64 {
        self.den
    }

    pub fn is_zero(self) -> bool {
        self.num == 0
    }

    /// ⌊self · x⌋ for non-negative `x`.
    pub fn mul_floor(self, x: i64) -> i64 {
        ((self.num as i128 * x as i128).div_euclid(self.den as i128)) as i64
    }

    pub fn to_f64(self) -> f64 {
        self.num as f64 / self.den as f64
    }
}

impl PartialOrd for Fraction {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for Fraction {
    fn cmp(&self, other: &Self) -> Ordering {
        (self.num as u128 * other.den as u128).cmp(&(other.num as u128 * self.den as u128))
    }
}

impl FromStr for Fraction {
    type Err = FractionError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let s = s.trim();
        let invalid = || FractionError::Invalid(s.to_string());
        if let Some((n, d)) = s.split_once('/') {
            let num = n.trim().parse::<u64>().map_err(|_| invalid())?;
            let den = d.trim().parse::<u64>().map_err(|_| invalid())?;
            return Fraction::new(num, den);
        }
        let (int, frac) = s.split_once('.').unwrap_or((s, ""));
        if (int.is_empty() && frac.is_empty())
            || !int.bytes().all(|b| b.is_ascii_digit())
            || !frac.bytes().all(|b| b.is_ascii_digit())
        {
            return Err(invalid());
        }
        let frac = frac.trim_end_matches('0');
        if frac.len() > 18 {
            return Err(FractionError::TooPrecise(s.to_string()));
        }
        let den = 10u64.pow(frac.len() as u32);
        let int_part: u64 = if int.is_empty() {
            0
        } else {
            int.parse().map_err(|_| invalid())?
        };
        let frac_part: u64 = if frac.is_empty() {
            0
        } else {
            frac.parse().map_err(|_| invalid())?
        };
        let num = int_part
            .checked_mul(den)
            .and_then(|x| x.checked_add(frac_part))
            .ok_or_else(|| FractionError::TooPrecise(s.to_string()))?;
        Fraction::new(num, den)
    }
}

impl fmt::Display for Fraction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        // Print as a terminating decimal whenever the denominator allows it.
        let mut den = self.den;
        let (mut twos, mut fives) = (0u32, 0u32);
        while den % 2 == 0 {
            den /= 2;
            twos += 1;
        }
        while den % 5 == 0 {
            den /= 5;
            fives += 1;
        }
        if den != 1 {
            return write!(f, "{}/{}", self.num, self.den);
        }
        let digits = twos.max(fives);
        let scale = 10u128.pow(digits);
        let scaled = self.num as u128 * scale / self.den as u128;
        let int = scaled / scale;
        if digits == 0 {
            return write!(f, "{int}");
        }
        let frac = scaled % scale;
        write!(f, "{int}.{frac:0width$}", width = digits as usize)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_decimals_exactly() {
        let eps: Fraction = "0.03".parse().unwrap();
        assert_eq!((eps.num(), eps.den()), (3, 100));
        let t: Fraction = "0.375".parse().unwrap();
        assert_eq!((t.num(), t.den()), (3, 8));
        assert_eq!("1".parse::<Fraction>().unwrap(), Fraction::ONE);
        assert_eq!(
            ".5".parse::<Fraction>().unwrap(),
            Fraction::new(1, 2).unwrap()
        );
        assert_eq!("3/100".parse::<Fraction>().unwrap(), eps);
        assert!("-0.1".parse::<Fraction>().is_err());
        assert!("abc".parse::<Fraction>().is_err());
        assert!("1/0".parse::<Fraction>().is_err());
        assert!(".".parse::<Fraction>().is_err());
    }

    #[test]
    fn display_round_trips() {
        for s in ["0.03", "0.75", "0.375", "0", "2", "1.5"] {
            let f: Fraction = s.parse().unwrap();
            assert_eq!(f.to_string(), s);
        }
        assert_eq!(Fraction::new(1, 3).unwrap().to_string(), "1/3");
    }

    #[test]
    fn ordering_is_exact() {
        let a = Fraction::new(1, 3).unwrap();
        let b = Fraction::new(333_333_333, 1_000_000_000).unwrap();
        assert!(b < a);
        assert_eq!(Fraction::new(2, 4).unwrap(), Fraction::new(1, 2).unwrap());
        assert_eq!(Fraction::new(103, 100).unwrap().mul_floor(50), 51);
    }
}
