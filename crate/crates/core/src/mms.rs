//! Exact MinMaxShare: the smallest possible largest bundle over all
//! partitions of the objects into `n` bundles.
//!
//! Values are scaled by the common denominator to integers, zero objects are
//! stripped, and equal objects are grouped so that a bundle receives a count
//! rather than a particular copy. The search is depth-first over groups in
//! non-increasing weight order. At each group the bundles are visited in
//! ascending load order; bundles whose load was equal before the group
//! receive non-increasing counts, which removes bundle relabellings.
//! The incumbent comes from longest-processing-time greedy and the search
//! stops as soon as it meets the trivial lower bound.

use num_bigint::{BigInt, BigUint};
use num_integer::Integer;
use num_traits::{ToPrimitive, Zero};

use crate::error::{Error, Result};
use crate::model::{Allocation, DisutilityVector};
use crate::rational::{common_denominator, Rational};

/// Limits for the exact search.
#[derive(Debug, Clone, Copy)]
pub struct MmsSolver {
    /// Maximum number of objects with nonzero disutility.
    pub max_objects: usize,
    /// Maximum number of search nodes before giving up.
    pub node_limit: u64,
}

impl Default for MmsSolver {
    fn default() -> Self {
        MmsSolver {
            max_objects: 64,
            node_limit: 200_000_000,
        }
    }
}

/// Optimal value with one partition that attains it.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct MmsSolution {
    pub value: Rational,
    pub allocation: Allocation,
}

/// Search state for one run. `T` is the integer type holding scaled loads.
struct Search<'a, T> {
    weights: &'a [T],
    counts: &'a [usize],
    n: usize,
    loads: Vec<T>,
    /// `assign[g][b]`: copies of group `g` in bundle `b` on the current path.
    assign: Vec<Vec<usize>>,
    /// Loads must stay at or below this.
    cap: T,
    lower_bound: T,
    optimize: bool,
    best: Option<(T, Vec<Vec<usize>>)>,
    done: bool,
    suffix: Vec<T>,
    nodes: u64,
    node_limit: u64,
}

impl<T: Integer + Clone + From<u64>> Search<'_, T> {
    fn total_loads(&self) -> T {
        self.loads.iter().cloned().fold(T::zero(), |a, b| a + b)
    }

    fn place_group(&mut self, g: usize) -> Result<()> {
        if self.done {
            return Ok(());
        }
        if g == self.weights.len() {
            let max = self.loads.iter().max().cloned().unwrap_or_else(T::zero);
            if max <= self.cap {
                if self.optimize {
                    self.done = max == self.lower_bound;
                    self.cap = max.clone() - T::one();
                    self.best = Some((max, self.assign.clone()));
                } else {
                    self.best = Some((max, self.assign.clone()));
                    self.done = true;
                }
            }
            return Ok(());
        }

        // Average-load bound over what is left.
        let total = self.total_loads() + self.suffix[g].clone();
        let avg = total.div_ceil(&T::from(self.n as u64));
        if avg > self.cap {
            return Ok(());
        }
        let w = &self.weights[g];
        if *w > self.cap {
            return Ok(());
        }
        let mut order: Vec<usize> = (0..self.n).collect();
        order.sort_by(|&a, &b| self.loads[a].cmp(&self.loads[b]));
        let pre: Vec<T> = order.iter().map(|&b| self.loads[b].clone()).collect();

        // Room for this group in the bundles from each position onwards.
        let count = self.counts[g];
        let room: Vec<usize> = pre
            .iter()
            .map(|l| {
                if *l > self.cap {
                    0
                } else {
                    let free = (self.cap.clone() - l.clone()) / w.clone();
                    free_to_usize(free, count)
                }
            })
            .collect();
        if room.iter().sum::<usize>() < count {
            return Ok(());
        }
        self.distribute(g, &order, &pre, 0, count, usize::MAX)
    }

    fn distribute(
        &mut self,
        g: usize,
        order: &[usize],
        pre: &[T],
        pos: usize,
        remaining: usize,
        prev: usize,
    ) -> Result<()> {
        self.nodes += 1;
        if self.nodes > self.node_limit {
            return Err(Error::Resource(format!(
                "exact MinMaxShare search exceeded {} nodes",
                self.node_limit
            )));
        }
        if self.done {
            return Ok(());
        }
        if remaining == 0 {
            return self.place_group(g + 1);
        }
        if pos == order.len() {
            return Ok(());
        }
        let bin = order[pos];
        let w = self.weights[g].clone();
        let load = self.loads[bin].clone();
        if load > self.cap {
            return Ok(());
        }
        let free = free_to_usize((self.cap.clone() - load.clone()) / w.clone(), remaining);
        let mut hi = free.min(remaining);
        if pos > 0 && pre[pos] == pre[pos - 1] {
            hi = hi.min(prev);
        }
        let last = pos + 1 == order.len();
        let lo = if last { remaining } else { 0 };
        if hi < lo {
            return Ok(());
        }
        for c in (lo..=hi).rev() {
            self.loads[bin] = load.clone() + w.clone() * T::from(c as u64);
            self.assign[g][bin] = c;
            self.distribute(g, order, pre, pos + 1, remaining - c, c)?;
            if self.done {
                break;
            }
        }
        self.loads[bin] = load;
        self.assign[g][bin] = 0;
        Ok(())
    }
}

fn free_to_usize<T: Integer + Clone + From<u64>>(free: T, cap: usize) -> usize {
    // Avoids converting huge values: anything at least `cap` is as good as `cap`.
    if free >= T::from(cap as u64) {
        cap
    } else {
        let mut k = 0usize;
        let mut acc = T::zero();
        while acc.clone() + T::one() <= free {
            acc = acc + T::one();
            k += 1;
        }
        k
    }
}

/// Groups equal weights; returns `(weight, members)` sorted by weight, largest first.
fn group<T: Ord + Clone>(weights: &[(T, usize)]) -> Vec<(T, Vec<usize>)> {
    let mut sorted: Vec<&(T, usize)> = weights.iter().collect();
    sorted.sort_by(|a, b| b.0.cmp(&a.0).then(a.1.cmp(&b.1)));
    let mut groups: Vec<(T, Vec<usize>)> = Vec::new();
    for (w, e) in sorted {
        match groups.last_mut() {
            Some((gw, members)) if gw == w => members.push(*e),
            _ => groups.push((w.clone(), vec![*e])),
        }
    }
    groups
}

enum Goal<T> {
    Optimize,
    Fit(T),
}

/// Runs the search over nonzero `(weight, object)` pairs. `zeros` are
/// appended to the first bundle. Returns the best load and bundles.
fn run<T: Integer + Clone + From<u64>>(
    items: &[(T, usize)],
    zeros: &[usize],
    n: usize,
    goal: Goal<T>,
    node_limit: u64,
) -> Result<Option<(T, Vec<Vec<usize>>)>> {
    let groups = group(items);
    let weights: Vec<T> = groups.iter().map(|(w, _)| w.clone()).collect();
    let counts: Vec<usize> = groups.iter().map(|(_, m)| m.len()).collect();
    let mut suffix = vec![T::zero(); weights.len() + 1];
    for g in (0..weights.len()).rev() {
        suffix[g] = suffix[g + 1].clone() + weights[g].clone() * T::from(counts[g] as u64);
    }
    let total = suffix[0].clone();
    let largest = weights.first().cloned().unwrap_or_else(T::zero);
    let avg = total.div_ceil(&T::from(n as u64));
    let lower_bound = if largest > avg { largest } else { avg };

    let (cap, optimize, best) = match goal {
        Goal::Optimize => {
            let (value, assign) = greedy(&weights, &counts, n);
            if value == lower_bound {
                (value.clone(), true, Some((value, assign)))
            } else {
                (value.clone() - T::one(), true, Some((value, assign)))
            }
        }
        Goal::Fit(cap) => (cap, false, None),
    };

    let mut search = Search {
        weights: &weights,
        counts: &counts,
        n,
        loads: vec![T::zero(); n],
        assign: vec![vec![0; n]; weights.len()],
        done: matches!(&best, Some((v, _)) if *v == lower_bound),
        cap,
        lower_bound,
        optimize,
        best,
        suffix,
        nodes: 0,
        node_limit,
    };
    search.place_group(0)?;

    Ok(search.best.map(|(value, assign)| {
        let mut bundles = vec![Vec::new(); n];
        for (g, (_, members)) in groups.iter().enumerate() {
            let mut it = members.iter();
            for (b, &c) in assign[g].iter().enumerate() {
                bundles[b].extend(it.by_ref().take(c));
            }
        }
        bundles[0].extend_from_slice(zeros);
        (value, bundles)
    }))
}

/// Longest-processing-time greedy: each copy goes to the least loaded bundle.
fn greedy<T: Integer + Clone + From<u64>>(
    weights: &[T],
    counts: &[usize],
    n: usize,
) -> (T, Vec<Vec<usize>>) {
    let mut loads = vec![T::zero(); n];
    let mut assign = vec![vec![0; n]; weights.len()];
    for (g, w) in weights.iter().enumerate() {
        for _ in 0..counts[g] {
            let b = (0..n)
                .min_by(|&a, &b| loads[a].cmp(&loads[b]))
                .expect("n >= 1");
            loads[b] = loads[b].clone() + w.clone();
            assign[g][b] += 1;
        }
    }
    let max = loads.into_iter().max().unwrap_or_else(T::zero);
    (max, assign)
}

/// Scaled integer weights, as `u128` when everything fits.
enum Scaled {
    Small(Vec<(u128, usize)>),
    Big(Vec<(BigUint, usize)>),
}

struct Prepared {
    scaled: Scaled,
    zeros: Vec<usize>,
    denominator: BigInt,
}

impl MmsSolver {
    fn prepare(&self, v: &DisutilityVector, n: usize) -> Result<Prepared> {
        if n == 0 {
            return Err(Error::Domain("need at least one bundle".into()));
        }
        let denominator = common_denominator(v.values());
        let mut big = Vec::new();
        let mut zeros = Vec::new();
        for (e, x) in v.values().iter().enumerate() {
            if x.is_zero() {
                zeros.push(e);
            } else {
                let w = (x * Rational::from_integer(denominator.clone())).to_integer();
                big.push((w.to_biguint().expect("nonnegative"), e));
            }
        }
        if big.len() > self.max_objects {
            return Err(Error::Resource(format!(
                "{} nonzero objects exceed the exact solver limit of {}",
                big.len(),
                self.max_objects
            )));
        }
        let total: BigUint = big.iter().map(|(w, _)| w).sum();
        let scaled = if total.to_u128().is_some_and(|t| t < u128::MAX / 2) {
            Scaled::Small(
                big.into_iter()
                    .map(|(w, e)| (w.to_u128().expect("checked"), e))
                    .collect(),
            )
        } else {
            Scaled::Big(big)
        };
        Ok(Prepared {
            scaled,
            zeros,
            denominator,
        })
    }

    /// Exact MinMaxShare of `v` for `n` bundles with an optimal partition.
    pub fn solve(&self, v: &DisutilityVector, n: usize) -> Result<MmsSolution> {
        let p = self.prepare(v, n)?;
        let (value, bundles) = match &p.scaled {
            Scaled::Small(items) => {
                let (val, b) = run(items, &p.zeros, n, Goal::Optimize, self.node_limit)?
                    .expect("optimization always has an incumbent");
                (BigInt::from(val), b)
            }
            Scaled::Big(items) => {
                let (val, b) = run(items, &p.zeros, n, Goal::Optimize, self.node_limit)?
                    .expect("optimization always has an incumbent");
                (BigInt::from(val), b)
            }
        };
        Ok(MmsSolution {
            value: Rational::new(value, p.denominator),
            allocation: Allocation::from_parts_unchecked(bundles),
        })
    }

    /// Whether some `n`-partition keeps every bundle at or below `threshold`.
    pub fn fits_under(&self, v: &DisutilityVector, n: usize, threshold: &Rational) -> Result<bool> {
        if *threshold >= v.total() {
            return Ok(n >= 1);
        }
        if threshold < &Rational::zero() {
            return Ok(false);
        }
        let p = self.prepare(v, n)?;
        let cap = (threshold * Rational::from_integer(p.denominator.clone()))
            .floor()
            .to_integer()
            .to_biguint()
            .expect("nonnegative");
        let found = match &p.scaled {
            Scaled::Small(items) => {
                let cap = cap.to_u128().unwrap_or(u128::MAX / 2);
                run(items, &p.zeros, n, Goal::Fit(cap), self.node_limit)?.is_some()
            }
            Scaled::Big(items) => {
                run(items, &p.zeros, n, Goal::Fit(cap), self.node_limit)?.is_some()
            }
        };
        Ok(found)
    }

    /// MinMaxShare of integer weights, for callers that already scaled.
    pub fn solve_weights(&self, weights: &[u64], n: usize) -> Result<(u128, Allocation)> {
        if n == 0 {
            return Err(Error::Domain("need at least one bundle".into()));
        }
        let mut items = Vec::new();
        let mut zeros = Vec::new();
        for (e, &w) in weights.iter().enumerate() {
            if w == 0 {
                zeros.push(e);
            } else {
                items.push((u128::from(w), e));
            }
        }
        if items.len() > self.max_objects {
            return Err(Error::Resource(format!(
                "{} nonzero objects exceed the exact solver limit of {}",
                items.len(),
                self.max_objects
            )));
        }
        let (val, bundles) = run(&items, &zeros, n, Goal::Optimize, self.node_limit)?
            .expect("optimization always has an incumbent");
        Ok((val, Allocation::from_parts_unchecked(bundles)))
    }
}

/// [`MmsSolver::solve`] with default limits.
pub fn exact_mms(v: &DisutilityVector, n: usize) -> Result<MmsSolution> {
    MmsSolver::default().solve(v, n)
}

/// [`MmsSolver::fits_under`] with default limits.
pub fn fits_under(v: &DisutilityVector, n: usize, threshold: &Rational) -> Result<bool> {
    MmsSolver::default().fits_under(v, n, threshold)
}

/// Largest object count [`lex_minmax`] will enumerate.
pub const LEX_MAX_OBJECTS: usize = 12;

/// Allocation whose non-increasing bundle-load vector is lexicographically
/// smallest. Among allocations with the same load vector the one whose
/// restricted-growth labelling (first object in bundle 1, each new bundle
/// numbered in order of first appearance) is smallest wins.
pub fn lex_minmax(v: &DisutilityVector, n: usize) -> Result<Allocation> {
    let m = v.len();
    if n == 0 {
        return Err(Error::Domain("need at least one bundle".into()));
    }
    if m > LEX_MAX_OBJECTS {
        return Err(Error::Resource(format!(
            "lexicographic enumeration is limited to {LEX_MAX_OBJECTS} objects, got {m}"
        )));
    }
    let denominator = common_denominator(v.values());
    let weights: Vec<u128> = v
        .values()
        .iter()
        .map(|x| {
            (x * Rational::from_integer(denominator.clone()))
                .to_integer()
                .to_u128()
                .ok_or_else(|| Error::Resource("scaled disutilities overflow u128".into()))
        })
        .collect::<Result<_>>()?;

    struct Enum<'a> {
        weights: &'a [u128],
        n: usize,
        labels: Vec<usize>,
        loads: Vec<u128>,
        best: Option<(Vec<u128>, Vec<usize>)>,
    }

    impl Enum<'_> {
        fn go(&mut self, i: usize, used: usize) {
            if let Some((best, _)) = &self.best {
                if self.loads.iter().max().copied().unwrap_or(0) > best[0] {
                    return;
                }
            }
            if i == self.weights.len() {
                let mut sorted = self.loads.clone();
                sorted.sort_unstable_by(|a, b| b.cmp(a));
                let better = match &self.best {
                    None => true,
                    Some((best, _)) => sorted < *best,
                };
                if better {
                    self.best = Some((sorted, self.labels.clone()));
                }
                return;
            }
            let limit = (used + 1).min(self.n);
            for label in 0..limit {
                self.labels[i] = label;
                self.loads[label] += self.weights[i];
                self.go(i + 1, used.max(label + 1));
                self.loads[label] -= self.weights[i];
            }
        }
    }

    let mut e = Enum {
        weights: &weights,
        n,
        labels: vec![0; m],
        loads: vec![0; n],
        best: None,
    };
    e.go(0, 0);
    let (_, labels) = e.best.expect("at least one partition");
    let mut bundles = vec![Vec::new(); n];
    for (obj, &label) in labels.iter().enumerate() {
        bundles[label].push(obj);
    }
    Allocation::new(bundles, m)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rational::{int, ratio};

    fn vector(xs: &[(i64, i64)]) -> DisutilityVector {
        DisutilityVector::new(xs.iter().map(|&(p, q)| ratio(p, q)).collect()).unwrap()
    }

    #[test]
    fn small_example() {
        let v = vector(&[(3, 10), (1, 4), (1, 4), (1, 5)]);
        let sol = exact_mms(&v, 2).unwrap();
        assert_eq!(sol.value, ratio(1, 2));
        let loads = sol.allocation.loads(&v);
        assert!(loads.iter().all(|l| *l <= ratio(1, 2)));
    }

    #[test]
    fn one_bundle_takes_everything() {
        let v = vector(&[(1, 3), (1, 6), (1, 2)]);
        assert_eq!(exact_mms(&v, 1).unwrap().value, int(1));
    }

    #[test]
    fn as_many_bundles_as_objects() {
        let v = vector(&[(1, 10), (1, 2), (2, 5)]);
        assert_eq!(exact_mms(&v, 3).unwrap().value, ratio(1, 2));
        assert_eq!(exact_mms(&v, 5).unwrap().value, ratio(1, 2));
    }

    #[test]
    fn balanced_large_witness() {
        // Four objects at 1/4 and two zeros among three bundles.
        let v = vector(&[(1, 4), (1, 4), (1, 4), (1, 4), (0, 1), (0, 1)]);
        let sol = exact_mms(&v, 3).unwrap();
        assert_eq!(sol.value, ratio(1, 2));
        assert_eq!(
            sol.allocation.bundles().iter().map(Vec::len).sum::<usize>(),
            6
        );
    }

    #[test]
    fn fits_under_examples() {
        let v = vector(&[(3, 10), (1, 4), (1, 4), (1, 5)]);
        assert!(fits_under(&v, 2, &ratio(1, 2)).unwrap());
        assert!(!fits_under(&v, 2, &ratio(49, 100)).unwrap());
        assert!(fits_under(&v, 2, &int(1)).unwrap());
        assert!(fits_under(&v, 1, &int(3)).unwrap());
    }

    #[test]
    fn guard_rejects_large_inputs() {
        let solver = MmsSolver {
            max_objects: 3,
            ..MmsSolver::default()
        };
        let v = vector(&[(1, 4); 4]);
        assert!(matches!(solver.solve(&v, 2), Err(Error::Resource(_))));
        let tiny = MmsSolver {
            node_limit: 1,
            ..MmsSolver::default()
        };
        // Greedy gives 7/12 here, so the search has to run.
        let v = vector(&[(3, 12), (3, 12), (2, 12), (2, 12), (2, 12)]);
        assert!(matches!(tiny.solve(&v, 2), Err(Error::Resource(_))));
        assert_eq!(exact_mms(&v, 2).unwrap().value, ratio(1, 2));
    }

    #[test]
    fn lex_minmax_examples() {
        let v = vector(&[(1, 2), (1, 4), (1, 4)]);
        let a = lex_minmax(&v, 2).unwrap();
        assert_eq!(a.bundles(), &[vec![0], vec![1, 2]]);

        let v = vector(&[(1, 3), (1, 3), (1, 3)]);
        let a = lex_minmax(&v, 3).unwrap();
        assert_eq!(a.bundles(), &[vec![0], vec![1], vec![2]]);

        // Loads (3/5, 2/5) are reachable several ways; labelling 0011 is smallest.
        let v = vector(&[(2, 5), (1, 5), (1, 5), (1, 5)]);
        let a = lex_minmax(&v, 2).unwrap();
        assert_eq!(a.bundles(), &[vec![0, 1], vec![2, 3]]);
    }

    #[test]
    fn scaled_weights() {
        let (value, alloc) = MmsSolver::default()
            .solve_weights(&[30, 25, 25, 20, 0], 2)
            .unwrap();
        assert_eq!(value, 50);
        assert_eq!(alloc.bundles().iter().map(Vec::len).sum::<usize>(), 5);
    }
}
