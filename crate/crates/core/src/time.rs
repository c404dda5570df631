//! Exact time quantities: decimals, units, durations and intervals.

use std::cmp::Ordering;
use std::fmt;
use std::str::FromStr;

use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum TimeError {
    #[error("{duration} is not an integer multiple of the period {period}")]
    NotDivisible { duration: Duration, period: Duration },
    #[error("cannot convert {from} into {to}")]
    Incompatible { from: Duration, to: Duration },
    #[error("period must be positive")]
    ZeroPeriod,
    #[error("invalid decimal `{0}`")]
    InvalidDecimal(String),
    #[error("negative duration {0}")]
    Negative(Decimal),
    #[error("decimal overflow")]
    Overflow,
}

/// An exact decimal number `mantissa / 10^scale`, kept normalized so that
/// structural equality coincides with numeric equality.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct Decimal {
    mantissa: i128,
    scale: u32,
}

const MAX_SCALE: u32 = 30;

impl Decimal {
    pub const ZERO: Decimal = Decimal { mantissa: 0, scale: 0 };
    pub const ONE: Decimal = Decimal { mantissa: 1, scale: 0 };

    pub fn new(mantissa: i128, scale: u32) -> Self {
        let mut d = Decimal { mantissa, scale };
        d.normalize();
        d
    }

    pub fn from_int(v: i128) -> Self {
        Decimal { mantissa: v, scale: 0 }
    }

    fn normalize(&mut self) {
        if self.mantissa == 0 {
            self.scale = 0;
            return;
        }
        while self.scale > 0 && self.mantissa % 10 == 0 {
            self.mantissa /= 10;
            self.scale -= 1;
        }
    }

    pub fn is_negative(self) -> bool {
        self.mantissa < 0
    }

    pub fn is_zero(self) -> bool {
        self.mantissa == 0
    }

    pub fn is_integer(self) -> bool {
        self.scale == 0
    }

    /// The value as a nonnegative integer, if it is one.
    pub fn to_u64(self) -> Option<u64> {
        if self.scale == 0 {
            u64::try_from(self.mantissa).ok()
        } else {
            None
        }
    }

    /// Nearest double (correctly rounded through the decimal text).
    pub fn to_f64(self) -> f64 {
        self.to_string().parse().expect("decimal text is a valid float")
    }

    fn rescaled(self, scale: u32) -> Result<i128, TimeError> {
        debug_assert!(scale >= self.scale);
        10i128.checked_pow(scale - self.scale).and_then(|p| self.mantissa.checked_mul(p)).ok_or(TimeError::Overflow)
    }

    fn align(self, other: Decimal) -> Result<(i128, i128, u32), TimeError> {
        let scale = self.scale.max(other.scale);
        Ok((self.rescaled(scale)?, other.rescaled(scale)?, scale))
    }

    pub fn checked_add(self, other: Decimal) -> Result<Decimal, TimeError> {
        let (a, b, s) = self.align(other)?;
        Ok(Decimal::new(a.checked_add(b).ok_or(TimeError::Overflow)?, s))
    }

    pub fn checked_sub(self, other: Decimal) -> Result<Decimal, TimeError> {
        let (a, b, s) = self.align(other)?;
        Ok(Decimal::new(a.checked_sub(b).ok_or(TimeError::Overflow)?, s))
    }

    pub fn checked_mul(self, other: Decimal) -> Result<Decimal, TimeError> {
        let m = self.mantissa.checked_mul(other.mantissa).ok_or(TimeError::Overflow)?;
        let s = self.scale + other.scale;
        if s > MAX_SCALE {
            return Err(TimeError::Overflow);
        }
        Ok(Decimal::new(m, s))
    }

    /// `self / other` when the quotient is an exact integer.
    pub fn exact_int_div(self, other: Decimal) -> Option<i128> {
        let (a, b, _) = self.align(other).ok()?;
        if b == 0 || a % b != 0 {
            None
        } else {
            Some(a / b)
        }
    }

    pub fn max(self, other: Decimal) -> Decimal {
        if other > self {
            other
        } else {
            self
        }
    }
}

impl Ord for Decimal {
    fn cmp(&self, other: &Self) -> Ordering {
        match self.align(*other) {
            Ok((a, b, _)) => a.cmp(&b),
            // only reachable for absurd scales; fall back to floats
            Err(_) => self.to_f64().total_cmp(&other.to_f64()),
        }
    }
}

impl PartialOrd for Decimal {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl FromStr for Decimal {
    type Err = TimeError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let bad = || TimeError::InvalidDecimal(s.to_string());
        let (neg, body) = match s.strip_prefix('-') {
            Some(rest) => (true, rest),
            None => (false, s),
        };
        let (int, frac) = match body.split_once('.') {
            Some((i, f)) => (i, f),
            None => (body, ""),
        };
        if int.is_empty()
            || !int.bytes().all(|b| b.is_ascii_digit())
            || !frac.bytes().all(|b| b.is_ascii_digit())
            || (body.contains('.') && frac.is_empty())
        {
            return Err(bad());
        }
        let digits = format!("{int}{frac}");
        let frac = frac.trim_end_matches('0');
        let digits = &digits[..int.len() + frac.len()];
        if frac.len() as u32 > MAX_SCALE {
            return Err(bad());
        }
        let mut m: i128 = digits.parse().map_err(|_| bad())?;
        if neg {
            m = -m;
        }
        Ok(Decimal::new(m, frac.len() as u32))
    }
}

impl fmt::Display for Decimal {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.scale == 0 {
            return write!(f, "{}", self.mantissa);
        }
        let sign = if self.mantissa < 0 { "-" } else { "" };
        let digits = self.mantissa.unsigned_abs().to_string();
        let scale = self.scale as usize;
        let padded =
            if digits.len() <= scale { format!("{}{}", "0".repeat(scale + 1 - digits.len()), digits) } else { digits };
        let (i, frac) = padded.split_at(padded.len() - scale);
        write!(f, "{sign}{i}.{frac}")
    }
}

/// Time units accepted in interval bounds and on the command line.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum TimeUnit {
    S,
    Ms,
    Us,
    Ns,
    /// A bare count of samples.
    Samples,
}

impl TimeUnit {
    pub fn parse(s: &str) -> Option<TimeUnit> {
        match s.to_ascii_lowercase().as_str() {
            "s" => Some(TimeUnit::S),
            "ms" => Some(TimeUnit::Ms),
            "us" => Some(TimeUnit::Us),
            "ns" => Some(TimeUnit::Ns),
            _ => None,
        }
    }

    pub fn suffix(self) -> &'static str {
        match self {
            TimeUnit::S => "s",
            TimeUnit::Ms => "ms",
            TimeUnit::Us => "us",
            TimeUnit::Ns => "ns",
            TimeUnit::Samples => "",
        }
    }

    fn nanos(self) -> Option<i128> {
        match self {
            TimeUnit::S => Some(1_000_000_000),
            TimeUnit::Ms => Some(1_000_000),
            TimeUnit::Us => Some(1_000),
            TimeUnit::Ns => Some(1),
            TimeUnit::Samples => None,
        }
    }
}

impl fmt::Display for TimeUnit {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            TimeUnit::Samples => f.write_str("samples"),
            u => f.write_str(u.suffix()),
        }
    }
}

/// A nonnegative amount of time (or of samples).
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct Duration {
    pub value: Decimal,
    pub unit: TimeUnit,
}

impl Duration {
    pub fn new(value: Decimal, unit: TimeUnit) -> Result<Self, TimeError> {
        if value.is_negative() {
            return Err(TimeError::Negative(value));
        }
        Ok(Duration { value, unit })
    }

    pub fn seconds(value: Decimal) -> Self {
        Duration { value, unit: TimeUnit::S }
    }

    /// The duration in nanoseconds, as an exact decimal.
    fn in_nanos(self) -> Option<Decimal> {
        let n = self.unit.nanos()?;
        self.value.checked_mul(Decimal::from_int(n)).ok()
    }

    /// The duration in seconds, as an exact decimal.
    pub fn in_seconds(self) -> Result<Decimal, TimeError> {
        let ns = self.in_nanos().ok_or(TimeError::Incompatible { from: self, to: Duration::seconds(Decimal::ONE) })?;
        ns.checked_mul(Decimal::new(1, 9))
    }
}

impl fmt::Display for Duration {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.unit {
            TimeUnit::Samples => write!(f, "{} samples", self.value),
            u => write!(f, "{}{}", self.value, u.suffix()),
        }
    }
}

/// Number of periods in `d`, exactly.
pub fn duration_to_samples(d: Duration, period: Duration) -> Result<u64, TimeError> {
    if period.value.is_zero() {
        return Err(TimeError::ZeroPeriod);
    }
    let not_divisible = || TimeError::NotDivisible { duration: d, period };
    let q = match (d.unit, period.unit) {
        (TimeUnit::Samples, _) => d.value.exact_int_div(Decimal::ONE),
        (_, TimeUnit::Samples) => return Err(TimeError::Incompatible { from: d, to: period }),
        _ => {
            let (dn, pn) = (d.in_nanos().ok_or(TimeError::Overflow)?, period.in_nanos().ok_or(TimeError::Overflow)?);
            dn.exact_int_div(pn)
        }
    };
    q.and_then(|q| u64::try_from(q).ok()).ok_or_else(not_divisible)
}

/// A textual interval bound: an exact number with an optional unit suffix.
/// Bounds without a unit are read in the model's default unit.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct TimeBound {
    pub value: Decimal,
    pub unit: Option<TimeUnit>,
}

impl TimeBound {
    pub fn unitless(value: Decimal) -> Self {
        TimeBound { value, unit: None }
    }

    pub fn int(v: u64) -> Self {
        TimeBound::unitless(Decimal::from_int(v as i128))
    }

    pub fn to_duration(self, default_unit: TimeUnit) -> Result<Duration, TimeError> {
        Duration::new(self.value, self.unit.unwrap_or(default_unit))
    }
}

impl fmt::Display for TimeBound {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}{}", self.value, self.unit.map_or("", TimeUnit::suffix))
    }
}

/// `[lo, hi]`, or `[lo, ∞)` when `hi` is `None`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct Interval {
    pub lo: TimeBound,
    pub hi: Option<TimeBound>,
}

impl Interval {
    pub fn unbounded() -> Self {
        Interval { lo: TimeBound::int(0), hi: None }
    }

    pub fn bounded(lo: TimeBound, hi: TimeBound) -> Self {
        Interval { lo, hi: Some(hi) }
    }

    /// Integer interval `[lo, hi]` in bare units.
    pub fn ints(lo: u64, hi: u64) -> Self {
        Interval::bounded(TimeBound::int(lo), TimeBound::int(hi))
    }

    pub fn is_bounded(&self) -> bool {
        self.hi.is_some()
    }

    /// True for the default `[0, ∞)`.
    pub fn is_full(&self) -> bool {
        self.hi.is_none() && self.lo.value.is_zero()
    }

    /// Rewrites both bounds with `f`.
    pub fn try_map<E>(self, mut f: impl FnMut(TimeBound) -> Result<TimeBound, E>) -> Result<Interval, E> {
        Ok(Interval { lo: f(self.lo)?, hi: self.hi.map(&mut f).transpose()? })
    }
}

impl fmt::Display for Interval {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.hi {
            Some(hi) => write!(f, "[{}:{}]", self.lo, hi),
            None => write!(f, "[{}:inf]", self.lo),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn dec(s: &str) -> Decimal {
        s.parse().unwrap()
    }

    fn ms(v: &str) -> Duration {
        Duration::new(dec(v), TimeUnit::Ms).unwrap()
    }

    #[test]
    fn samples_from_durations() {
        assert_eq!(duration_to_samples(ms("500"), ms("100")), Ok(5));
        let zero = Duration::new(dec("0"), TimeUnit::S).unwrap();
        assert_eq!(duration_to_samples(zero, ms("100")), Ok(0));
        assert!(matches!(duration_to_samples(ms("150"), ms("100")), Err(TimeError::NotDivisible { .. })));
    }

    #[test]
    fn samples_across_units() {
        let two_s = Duration::new(dec("2"), TimeUnit::S).unwrap();
        assert_eq!(duration_to_samples(two_s, ms("250")), Ok(8));
        let half = Duration::new(dec("0.5"), TimeUnit::S).unwrap();
        assert_eq!(duration_to_samples(half, ms("100")), Ok(5));
        let bare = Duration::new(dec("7"), TimeUnit::Samples).unwrap();
        assert_eq!(duration_to_samples(bare, ms("100")), Ok(7));
        assert!(matches!(duration_to_samples(ms("1"), bare), Err(TimeError::Incompatible { .. })));
        assert_eq!(duration_to_samples(ms("1"), ms("0")), Err(TimeError::ZeroPeriod));
    }

    #[test]
    fn decimal_text_round_trips() {
        for s in ["0", "5", "1.5", "0.001", "-2.25", "100"] {
            assert_eq!(dec(s).to_string(), s);
        }
        assert_eq!(dec("1.50"), dec("1.5"));
        assert_eq!(dec("0.0").to_string(), "0");
        assert!("1.".parse::<Decimal>().is_err());
        assert!(".5".parse::<Decimal>().is_err());
        assert!("1e3".parse::<Decimal>().is_err());
    }

    #[test]
    fn decimal_arithmetic_is_exact() {
        assert_eq!(dec("0.1").checked_add(dec("0.2")).unwrap(), dec("0.3"));
        assert_eq!(dec("5").checked_sub(dec("0.5")).unwrap(), dec("4.5"));
        assert!(dec("0.3") > dec("0.25"));
        assert_eq!(dec("1.5").exact_int_div(dec("0.5")), Some(3));
        assert_eq!(dec("1.5").exact_int_div(dec("1")), None);
        assert_eq!(dec("0.5").to_f64(), 0.5);
    }

    #[test]
    fn seconds_conversion() {
        assert_eq!(ms("1500").in_seconds().unwrap(), dec("1.5"));
    }
}
