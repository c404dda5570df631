//! Extended reals: robustness values with two symbolic poles.

use std::cmp::Ordering;
use std::fmt;
use std::ops::Neg;

/// A robustness value in ℝ ∪ {+∞, −∞}.
///
/// The poles are kept apart from IEEE infinities: predicate arithmetic is
/// carried out on plain `f64` and only its finite result enters an
/// `ExtReal`. `Finite` never holds NaN, an infinity or negative zero.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum ExtReal {
    NegInf,
    Finite(f64),
    PosInf,
}

impl ExtReal {
    pub const ZERO: ExtReal = ExtReal::Finite(0.0);

    /// Wraps a finite number. Panics on NaN or infinity.
    pub fn finite(x: f64) -> Self {
        assert!(x.is_finite(), "ExtReal::finite called with {x}");
        // collapses -0.0 onto 0.0
        ExtReal::Finite(x + 0.0)
    }

    /// Maps IEEE infinities onto the poles; `None` for NaN.
    pub fn from_f64(x: f64) -> Option<Self> {
        if x.is_nan() {
            None
        } else if x == f64::INFINITY {
            Some(ExtReal::PosInf)
        } else if x == f64::NEG_INFINITY {
            Some(ExtReal::NegInf)
        } else {
            Some(ExtReal::finite(x))
        }
    }

    /// Poles become IEEE infinities. Only for host boundaries and output.
    pub fn to_f64(self) -> f64 {
        match self {
            ExtReal::NegInf => f64::NEG_INFINITY,
            ExtReal::Finite(x) => x,
            ExtReal::PosInf => f64::INFINITY,
        }
    }

    pub fn is_finite(self) -> bool {
        matches!(self, ExtReal::Finite(_))
    }

    pub fn max(self, other: Self) -> Self {
        if other > self {
            other
        } else {
            self
        }
    }

    pub fn min(self, other: Self) -> Self {
        if other < self {
            other
        } else {
            self
        }
    }
}

impl Eq for ExtReal {}

impl PartialOrd for ExtReal {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for ExtReal {
    fn cmp(&self, other: &Self) -> Ordering {
        use ExtReal::*;
        match (self, other) {
            (NegInf, NegInf) | (PosInf, PosInf) => Ordering::Equal,
            (NegInf, _) | (_, PosInf) => Ordering::Less,
            (_, NegInf) | (PosInf, _) => Ordering::Greater,
            (Finite(a), Finite(b)) => a.partial_cmp(b).expect("finite values are never NaN"),
        }
    }
}

impl Neg for ExtReal {
    type Output = ExtReal;

    fn neg(self) -> ExtReal {
        match self {
            ExtReal::NegInf => ExtReal::PosInf,
            ExtReal::PosInf => ExtReal::NegInf,
            ExtReal::Finite(x) => ExtReal::finite(-x),
        }
    }
}

impl From<f64> for ExtReal {
    fn from(x: f64) -> Self {
        ExtReal::finite(x)
    }
}

impl fmt::Display for ExtReal {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ExtReal::NegInf => f.write_str("-inf"),
            ExtReal::PosInf => f.write_str("inf"),
            ExtReal::Finite(x) => write!(f, "{x}"),
        }
    }
}

/// Maximum of a sequence; −∞ when empty.
pub fn ext_max<I: IntoIterator<Item = ExtReal>>(values: I) -> ExtReal {
    values.into_iter().fold(ExtReal::NegInf, ExtReal::max)
}

/// Minimum of a sequence; +∞ when empty.
pub fn ext_min<I: IntoIterator<Item = ExtReal>>(values: I) -> ExtReal {
    values.into_iter().fold(ExtReal::PosInf, ExtReal::min)
}

/// `sign(a)·∞`: +∞ for strictly positive `a`, −∞ otherwise (zero included).
pub fn sign_inf(a: f64) -> ExtReal {
    if a > 0.0 {
        ExtReal::PosInf
    } else {
        ExtReal::NegInf
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn f(x: f64) -> ExtReal {
        ExtReal::finite(x)
    }

    #[test]
    fn max_examples() {
        assert_eq!(ext_max([f(1.0), f(5.0), f(2.0)]), f(5.0));
        assert_eq!(ext_max([]), ExtReal::NegInf);
        assert_eq!(ext_max([ExtReal::PosInf, f(3.0)]), ExtReal::PosInf);
    }

    #[test]
    fn min_examples() {
        assert_eq!(ext_min([f(1.0), f(5.0), f(2.0)]), f(1.0));
        assert_eq!(ext_min([]), ExtReal::PosInf);
        assert_eq!(ext_min([ExtReal::NegInf, f(3.0)]), ExtReal::NegInf);
    }

    #[test]
    fn sign_inf_examples() {
        assert_eq!(sign_inf(2.0), ExtReal::PosInf);
        assert_eq!(sign_inf(-3.0), ExtReal::NegInf);
        assert_eq!(sign_inf(0.0), ExtReal::NegInf);
    }

    #[test]
    fn poles_negate() {
        assert_eq!(-ExtReal::PosInf, ExtReal::NegInf);
        assert_eq!(-ExtReal::NegInf, ExtReal::PosInf);
        assert_eq!(-ExtReal::ZERO, ExtReal::ZERO);
        assert_eq!(format!("{}", -ExtReal::ZERO), "0");
    }

    #[test]
    fn poles_bracket_finite_values() {
        assert!(ExtReal::NegInf < f(-1e300));
        assert!(ExtReal::PosInf > f(1e300));
    }

    #[test]
    fn from_f64_rejects_nan() {
        assert_eq!(ExtReal::from_f64(f64::NAN), None);
        assert_eq!(ExtReal::from_f64(f64::INFINITY), Some(ExtReal::PosInf));
    }

    fn ext() -> impl Strategy<Value = ExtReal> {
        prop_oneof![Just(ExtReal::NegInf), Just(ExtReal::PosInf), (-1e6f64..1e6).prop_map(ExtReal::finite),]
    }

    proptest! {
        #[test]
        fn max_is_associative_with_identity(a in prop::collection::vec(ext(), 0..8),
                                            b in prop::collection::vec(ext(), 0..8)) {
            let all: Vec<_> = a.iter().chain(&b).copied().collect();
            prop_assert_eq!(ext_max(all.clone()), ext_max([ext_max(a.clone()), ext_max(b.clone())]));
            prop_assert_eq!(ext_min(all), ext_min([ext_min(a), ext_min(b)]));
        }

        #[test]
        fn negation_swaps_max_and_min(xs in prop::collection::vec(ext(), 0..8)) {
            prop_assert_eq!(-ext_max(xs.clone()), ext_min(xs.into_iter().map(|x| -x)));
        }

        #[test]
        fn positive_pole_is_min_identity(a in -1e6f64..1e6, x in ext()) {
            if sign_inf(a) == ExtReal::PosInf {
                prop_assert_eq!(ext_min([sign_inf(a), x]), x);
            }
        }
    }
}
