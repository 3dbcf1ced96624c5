//! Closed forms for the worst-case and best-case MinMaxShare over normalized
//! disutilities whose largest object is exactly `alpha`, the monotone
//! guarantee built from them, and the instances that attain each bound.

use std::fmt;

use num_traits::{One, Signed, Zero};

use crate::error::{Error, Result};
use crate::model::{DisutilityVector, Instance};
use crate::rational::{floor_u64, from_u64, min_objects, ratio, Rational};
use crate::region::{classify_guarantee, classify_share, RegionTag};

/// Number of objects in a query.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum ObjectCount {
    Finite(u64),
    Unrestricted,
}

impl fmt::Display for ObjectCount {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ObjectCount::Finite(m) => write!(f, "{m}"),
            ObjectCount::Unrestricted => f.write_str("unrestricted"),
        }
    }
}

/// `(n, m, alpha)` with `n >= 2`, `0 < alpha <= 1` and `m >= ceil(1/alpha)`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ShareQuery {
    n: u64,
    m: ObjectCount,
    alpha: Rational,
}

impl ShareQuery {
    pub fn new(n: u64, m: ObjectCount, alpha: Rational) -> Result<Self> {
        if n < 2 {
            return Err(Error::Domain(format!("need n >= 2 agents, got {n}")));
        }
        if !alpha.is_positive() || alpha > Rational::one() {
            return Err(Error::Domain(format!("alpha = {alpha} is outside (0, 1]")));
        }
        if let ObjectCount::Finite(m) = m {
            let m_min = min_objects(&alpha);
            if m < m_min {
                return Err(Error::Domain(format!(
                    "m = {m} is below ceil(1/alpha) = {m_min}; no normalized vector has largest entry {alpha}"
                )));
            }
        }
        Ok(ShareQuery { n, m, alpha })
    }

    pub fn finite(n: u64, m: u64, alpha: Rational) -> Result<Self> {
        Self::new(n, ObjectCount::Finite(m), alpha)
    }

    pub fn unrestricted(n: u64, alpha: Rational) -> Result<Self> {
        Self::new(n, ObjectCount::Unrestricted, alpha)
    }

    pub fn n(&self) -> u64 {
        self.n
    }

    pub fn m(&self) -> ObjectCount {
        self.m
    }

    pub fn alpha(&self) -> &Rational {
        &self.alpha
    }

    /// The finite object count, or `ceil(2/alpha) - 1` (beyond which the
    /// worst case no longer changes) when unrestricted.
    pub fn concrete_m(&self) -> u64 {
        match self.m {
            ObjectCount::Finite(m) => m,
            ObjectCount::Unrestricted => saturation_point(&self.alpha),
        }
    }
}

/// `ceil(2/alpha) - 1`.
pub fn saturation_point(alpha: &Rational) -> u64 {
    min_objects(&(alpha / Rational::from_integer(2.into()))) - 1
}

/// Worst-case MinMaxShare (Hill's share) for the query.
pub fn hill_share(q: &ShareQuery) -> Rational {
    let alpha = &q.alpha;
    if alpha.is_one() {
        return Rational::one();
    }
    let n = q.n;
    let region = classify_share(n, alpha).expect("validated query");
    let k = region.k;
    let k1 = from_u64(k + 1);

    if n == 2 && k == 1 {
        return two_agent_share(alpha, q.m);
    }

    match region.tag {
        RegionTag::D => {
            let enough = match q.m {
                ObjectCount::Finite(m) => m > k * n + n,
                ObjectCount::Unrestricted => true,
            };
            if enough {
                from_u64(k + 2) / &k1 * (Rational::one() - alpha) / from_u64(n)
            } else {
                k1 * alpha
            }
        }
        _ => k1 * alpha,
    }
}

/// The two-agent bracket `alpha in (1/5, 1/3]`, which has its own pieces.
fn two_agent_share(alpha: &Rational, m: ObjectCount) -> Rational {
    let one = Rational::one();
    let two_alpha = alpha * Rational::from_integer(2.into());
    let three_quarters = (&one - alpha) * ratio(3, 4);
    match m {
        ObjectCount::Finite(3) | ObjectCount::Finite(4) => two_alpha,
        ObjectCount::Finite(5) => {
            if *alpha <= ratio(3, 11) {
                three_quarters
            } else {
                two_alpha
            }
        }
        _ => {
            if *alpha <= ratio(7, 27) {
                three_quarters
            } else if *alpha <= ratio(2, 7) {
                alpha + (&one - alpha) * ratio(2, 5)
            } else {
                two_alpha
            }
        }
    }
}

/// Largest `k` with `k*n*alpha <= 1` when `alpha <= 1/n`.
fn lower_bracket(n: u64, alpha: &Rational) -> u64 {
    floor_u64(&(alpha * from_u64(n)).recip()).expect("fits in u64")
}

/// Best-case MinMaxShare over the same class.
pub fn mms_lower_bound(q: &ShareQuery) -> Rational {
    let (n, alpha) = (q.n, &q.alpha);
    let one_over_n = from_u64(n).recip();
    if *alpha > one_over_n {
        return alpha.clone();
    }
    let k = lower_bracket(n, alpha);
    let exact = (alpha * from_u64(k * n)).is_one();
    let restricted = match q.m {
        ObjectCount::Finite(m) => m < k * n + n,
        ObjectCount::Unrestricted => false,
    };
    if exact || !restricted {
        return one_over_n;
    }
    let m = q.concrete_m();
    let kk = from_u64(k);
    &kk * alpha + (Rational::one() - from_u64(k * n) * alpha) / from_u64(m - k * n)
}

/// Ratio of the worst case to the best case.
pub fn theoretical_ratio(q: &ShareQuery) -> Rational {
    hill_share(q) / mms_lower_bound(q)
}

/// Monotone cover of the unrestricted worst case: the per-agent cap that an
/// allocation can always meet. `alpha = 0` maps to `1/n`.
pub fn guarantee(n: u64, alpha: &Rational) -> Result<Rational> {
    if n < 1 {
        return Err(Error::Domain("need at least one agent".into()));
    }
    if alpha.is_zero() {
        return Ok(from_u64(n).recip());
    }
    let region = classify_guarantee(n, alpha)?;
    let k = region.k;
    Ok(match region.tag {
        RegionTag::NI => Rational::new((k + 2).into(), ((k + 1) * n + 1).into()),
        _ => from_u64(k + 1) * alpha,
    })
}

/// How a witness vector was built.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Construction {
    /// One object at `alpha`, `n(k+1)` equal objects sharing the rest.
    LargePlusEvenSmall,
    /// `ceil(1/alpha) - 1` objects at `alpha`, one remainder, zero padding.
    LargeRunPlusRemainder,
    /// `kn+1` objects at `alpha`, `n-1` equal objects sharing the rest.
    BalancedLarge,
    /// Two agents: one object at `alpha`, four at `(1-alpha)/4`.
    PairFourSmall,
    /// Two agents: one object at `alpha`, five at `(1-alpha)/5`.
    PairFiveSmall,
    /// Two agents: three objects at `alpha`, one at `1 - 3 alpha`.
    PairThreeLarge,
    /// `floor(1/alpha)` objects at `alpha` plus a remainder (`alpha > 1/n`).
    FewLarge,
    /// `kn` objects at `alpha = 1/(kn)`.
    ExactMultiple,
    /// `kn` objects at `alpha`, `n` objects at `1/n - k alpha`.
    EvenFill,
    /// `kn` objects at `alpha`, `m-kn` equal objects sharing the rest.
    RestrictedFill,
}

impl fmt::Display for Construction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            Construction::LargePlusEvenSmall => "large-plus-even-small",
            Construction::LargeRunPlusRemainder => "large-run-plus-remainder",
            Construction::BalancedLarge => "balanced-large",
            Construction::PairFourSmall => "pair-four-small",
            Construction::PairFiveSmall => "pair-five-small",
            Construction::PairThreeLarge => "pair-three-large",
            Construction::FewLarge => "few-large",
            Construction::ExactMultiple => "exact-multiple",
            Construction::EvenFill => "even-fill",
            Construction::RestrictedFill => "restricted-fill",
        };
        f.write_str(s)
    }
}

/// A single normalized vector whose MinMaxShare attains a bound.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct WitnessInstance {
    pub profile: DisutilityVector,
    pub claimed_mms: Rational,
    pub construction: Construction,
}

impl WitnessInstance {
    /// The witness as a one-agent instance.
    pub fn instance(&self) -> Instance {
        Instance::from_vectors(vec![self.profile.clone()]).expect("witness is a valid row")
    }
}

/// Expands `(value, count)` runs and pads with zeros up to `m`.
fn build(runs: &[(Rational, u64)], m: ObjectCount) -> DisutilityVector {
    let mut values: Vec<Rational> = runs
        .iter()
        .flat_map(|(v, c)| std::iter::repeat_n(v.clone(), *c as usize))
        .collect();
    if let ObjectCount::Finite(m) = m {
        debug_assert!(values.len() as u64 <= m, "construction exceeds m");
        values.resize(m as usize, Rational::zero());
    }
    DisutilityVector::normalized(values).expect("witness sums to one")
}

fn large_run_plus_remainder(alpha: &Rational, m: ObjectCount) -> DisutilityVector {
    let run = min_objects(alpha) - 1;
    let rest = Rational::one() - alpha * from_u64(run);
    build(&[(alpha.clone(), run), (rest, 1)], m)
}

/// Instance whose MinMaxShare equals [`hill_share`].
pub fn witness_upper(q: &ShareQuery) -> WitnessInstance {
    let (n, alpha, m) = (q.n, &q.alpha, q.m);
    let claimed_mms = hill_share(q);
    let one = Rational::one();

    let (profile, construction) = if alpha.is_one() {
        (build(&[(one, 1)], m), Construction::LargeRunPlusRemainder)
    } else {
        let region = classify_share(n, alpha).expect("validated query");
        let k = region.k;
        if n == 2 && k == 1 {
            two_agent_witness(alpha, m)
        } else {
            let finite_small = matches!(m, ObjectCount::Finite(m) if m <= k * n + n);
            match (region.tag, m) {
                (RegionTag::D, _) if !finite_small => {
                    let count = n * (k + 1);
                    let small = (&one - alpha) / from_u64(count);
                    (
                        build(&[(alpha.clone(), 1), (small, count)], m),
                        Construction::LargePlusEvenSmall,
                    )
                }
                (RegionTag::I, ObjectCount::Unrestricted) => {
                    let big = k * n + 1;
                    let small = (&one - alpha * from_u64(big)) / from_u64(n - 1);
                    (
                        build(&[(alpha.clone(), big), (small, n - 1)], m),
                        Construction::BalancedLarge,
                    )
                }
                _ => (
                    large_run_plus_remainder(alpha, m),
                    Construction::LargeRunPlusRemainder,
                ),
            }
        }
    };
    WitnessInstance {
        profile,
        claimed_mms,
        construction,
    }
}

fn two_agent_witness(alpha: &Rational, m: ObjectCount) -> (DisutilityVector, Construction) {
    let one = Rational::one();
    let small_four = || {
        (
            build(&[(alpha.clone(), 1), ((&one - alpha) / from_u64(4), 4)], m),
            Construction::PairFourSmall,
        )
    };
    let three_large = || {
        (
            build(&[(alpha.clone(), 3), (&one - alpha * from_u64(3), 1)], m),
            Construction::PairThreeLarge,
        )
    };
    match m {
        ObjectCount::Finite(3) | ObjectCount::Finite(4) => (
            large_run_plus_remainder(alpha, m),
            Construction::LargeRunPlusRemainder,
        ),
        ObjectCount::Finite(5) => {
            if *alpha <= ratio(3, 11) {
                small_four()
            } else {
                three_large()
            }
        }
        _ => {
            if *alpha <= ratio(7, 27) {
                small_four()
            } else if *alpha <= ratio(2, 7) {
                (
                    build(&[(alpha.clone(), 1), ((&one - alpha) / from_u64(5), 5)], m),
                    Construction::PairFiveSmall,
                )
            } else {
                three_large()
            }
        }
    }
}

/// Instance whose MinMaxShare equals [`mms_lower_bound`].
pub fn witness_lower(q: &ShareQuery) -> WitnessInstance {
    let (n, alpha, m) = (q.n, &q.alpha, q.m);
    let claimed_mms = mms_lower_bound(q);
    let one = Rational::one();

    let (profile, construction) = if *alpha > from_u64(n).recip() {
        let run = floor_u64(&alpha.recip()).expect("fits");
        let rest = &one - alpha * from_u64(run);
        (
            build(
                &[
                    (alpha.clone(), run),
                    (rest.clone(), u64::from(!rest.is_zero())),
                ],
                m,
            ),
            Construction::FewLarge,
        )
    } else {
        let k = lower_bracket(n, alpha);
        let kn = k * n;
        let restricted = matches!(m, ObjectCount::Finite(m) if m < kn + n);
        if (alpha * from_u64(kn)).is_one() {
            (
                build(&[(alpha.clone(), kn)], m),
                Construction::ExactMultiple,
            )
        } else if !restricted {
            let fill = from_u64(n).recip() - from_u64(k) * alpha;
            (
                build(&[(alpha.clone(), kn), (fill, n)], m),
                Construction::EvenFill,
            )
        } else {
            let mm = q.concrete_m();
            let fill = (&one - from_u64(kn) * alpha) / from_u64(mm - kn);
            (
                build(&[(alpha.clone(), kn), (fill, mm - kn)], m),
                Construction::RestrictedFill,
            )
        }
    };
    WitnessInstance {
        profile,
        claimed_mms,
        construction,
    }
}
