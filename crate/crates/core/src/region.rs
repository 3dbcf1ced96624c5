//! Interval families that tile `(0, 1]` for a fixed number of agents.
//!
//! For each `k >= 0` the bracket `(1/(kn+n+1), 1/(kn+1)]` is split twice:
//!
//! * share family: `D(n,k) = (1/(kn+n+1), (k+2)/(n(k+1)^2+k+2)]` and
//!   `I(n,k) = ((k+2)/(n(k+1)^2+k+2), 1/(kn+1)]`;
//! * guarantee family: `NI(n,k) = (1/((k+1)n+1), (k+2)/((k+1)((k+1)n+1)))`
//!   and `IV(n,k) = [(k+2)/((k+1)((k+1)n+1)), 1/(kn+1)]`.
//!
//! The two increasing pieces have different left endpoints, hence the
//! separate tags.

use std::fmt;

use num_traits::{One, Signed};

use crate::error::{Error, Result};
use crate::rational::{floor_u64, from_u64, Rational};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum RegionTag {
    /// Share family, decreasing piece.
    D,
    /// Share family, increasing piece.
    I,
    /// Guarantee family, flat piece.
    NI,
    /// Guarantee family, increasing piece (closed on the left).
    IV,
}

impl fmt::Display for RegionTag {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            RegionTag::D => "D",
            RegionTag::I => "I",
            RegionTag::NI => "NI",
            RegionTag::IV => "IV",
        };
        f.write_str(s)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct RegionIndex {
    pub k: u64,
    pub tag: RegionTag,
}

/// One end of an interval.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Endpoint {
    pub value: Rational,
    pub closed: bool,
}

impl RegionIndex {
    pub fn new(k: u64, tag: RegionTag) -> Self {
        RegionIndex { k, tag }
    }

    /// `(lower, upper)` endpoints of this region for `n` agents.
    pub fn bounds(&self, n: u64) -> (Endpoint, Endpoint) {
        let k = self.k;
        let open = |value| Endpoint {
            value,
            closed: false,
        };
        let closed = |value| Endpoint {
            value,
            closed: true,
        };
        match self.tag {
            RegionTag::D => (open(bracket_lower(n, k)), closed(share_split(n, k))),
            RegionTag::I => (open(share_split(n, k)), closed(bracket_upper(n, k))),
            RegionTag::NI => (open(bracket_lower(n, k)), open(guarantee_split(n, k))),
            RegionTag::IV => (closed(guarantee_split(n, k)), closed(bracket_upper(n, k))),
        }
    }

    /// Direct interval membership test.
    pub fn contains(&self, n: u64, alpha: &Rational) -> bool {
        let (lo, hi) = self.bounds(n);
        let above = if lo.closed {
            *alpha >= lo.value
        } else {
            *alpha > lo.value
        };
        let below = if hi.closed {
            *alpha <= hi.value
        } else {
            *alpha < hi.value
        };
        above && below
    }
}

impl fmt::Display for RegionIndex {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}(k={})", self.tag, self.k)
    }
}

/// `1/(kn+n+1)`, the open left end of bracket `k`.
pub fn bracket_lower(n: u64, k: u64) -> Rational {
    from_u64(k * n + n + 1).recip()
}

/// `1/(kn+1)`, the closed right end of bracket `k`.
pub fn bracket_upper(n: u64, k: u64) -> Rational {
    from_u64(k * n + 1).recip()
}

/// `(k+2)/(n(k+1)^2+k+2)`, the D/I split point.
pub fn share_split(n: u64, k: u64) -> Rational {
    Rational::new((k + 2).into(), (n * (k + 1) * (k + 1) + k + 2).into())
}

/// `(k+2)/((k+1)((k+1)n+1))`, the NI/IV split point.
pub fn guarantee_split(n: u64, k: u64) -> Rational {
    Rational::new((k + 2).into(), ((k + 1) * ((k + 1) * n + 1)).into())
}

/// Bracket index `floor((1/alpha - 1)/n)`; `alpha` must lie in `(0, 1]`.
pub fn bracket(n: u64, alpha: &Rational) -> u64 {
    let x = (alpha.recip() - Rational::one()) / from_u64(n);
    floor_u64(&x).expect("bracket index fits in u64")
}

fn check_alpha(alpha: &Rational, allow_one: bool) -> Result<()> {
    let ok = alpha.is_positive() && (*alpha < Rational::one() || (allow_one && alpha.is_one()));
    if ok {
        Ok(())
    } else {
        let range = if allow_one { "(0, 1]" } else { "(0, 1)" };
        Err(Error::Domain(format!("alpha = {alpha} is outside {range}")))
    }
}

/// Locates `alpha` in the D/I family for `n >= 2` agents.
pub fn classify_share(n: u64, alpha: &Rational) -> Result<RegionIndex> {
    if n < 2 {
        return Err(Error::Domain(format!("need n >= 2 agents, got {n}")));
    }
    check_alpha(alpha, false)?;
    let k = bracket(n, alpha);
    let tag = if *alpha <= share_split(n, k) {
        RegionTag::D
    } else {
        RegionTag::I
    };
    Ok(RegionIndex { k, tag })
}

/// Locates `alpha` in the NI/IV family. Accepts `alpha = 1` (the closed
/// right end of `IV(n,0)`) and any `n >= 1`.
pub fn classify_guarantee(n: u64, alpha: &Rational) -> Result<RegionIndex> {
    if n < 1 {
        return Err(Error::Domain("need at least one agent".into()));
    }
    check_alpha(alpha, true)?;
    let k = bracket(n, alpha);
    let tag = if *alpha < guarantee_split(n, k) {
        RegionTag::NI
    } else {
        RegionTag::IV
    };
    Ok(RegionIndex { k, tag })
}
