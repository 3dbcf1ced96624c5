//! Independent oracles and generators shared by the integration tests.

#![allow(dead_code)]

use hillshare::rational::{from_u64, Rational};
use hillshare::DisutilityVector;
use num_traits::Zero;
use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Min over all `n^m` labelings of the largest bundle.
pub fn brute_force_mms(v: &[Rational], n: usize) -> Rational {
    let m = v.len();
    let mut labels = vec![0usize; m];
    let mut best: Option<Rational> = None;
    loop {
        let mut loads = vec![Rational::zero(); n];
        for (e, &l) in labels.iter().enumerate() {
            loads[l] += &v[e];
        }
        let max = loads.into_iter().max().unwrap_or_else(Rational::zero);
        if best.as_ref().is_none_or(|b| max < *b) {
            best = Some(max);
        }
        // Odometer increment.
        let mut i = 0;
        loop {
            if i == m {
                return best.unwrap_or_else(Rational::zero);
            }
            labels[i] += 1;
            if labels[i] < n {
                break;
            }
            labels[i] = 0;
            i += 1;
        }
    }
}

/// `m` integer weights in `0..=max`, normalized; retries an all-zero draw.
pub fn random_vector(rng: &mut ChaCha8Rng, m: usize, max: u64) -> DisutilityVector {
    loop {
        let w: Vec<u64> = (0..m).map(|_| rng.random_range(0..=max)).collect();
        if w.iter().any(|&x| x > 0) {
            let raw = w.into_iter().map(from_u64).collect();
            return DisutilityVector::new(raw).unwrap().normalize().0;
        }
    }
}

/// All sub-multisets of `bundle`, as sums.
pub fn subset_sums(v: &DisutilityVector, bundle: &[usize]) -> Vec<Rational> {
    (0u32..1 << bundle.len())
        .map(|mask| {
            bundle
                .iter()
                .enumerate()
                .filter(|(b, _)| mask >> b & 1 == 1)
                .map(|(_, &e)| v.get(e).clone())
                .sum()
        })
        .collect()
}

/// Three rows-of-weights families used for heterogeneous instances.
#[derive(Debug, Clone, Copy)]
pub enum Family {
    Segments,
    PowerLaw,
    ManyZeros,
}

pub fn random_row(rng: &mut ChaCha8Rng, m: usize, family: Family) -> Vec<Rational> {
    if let Family::Segments = family {
        let mut cuts: Vec<u64> = (1..m).map(|_| rng.random_range(0..=1_000_000)).collect();
        cuts.push(0);
        cuts.push(1_000_000);
        cuts.sort_unstable();
        return cuts.windows(2).map(|w| from_u64(w[1] - w[0])).collect();
    }
    (0..m)
        .map(|_| match family {
            Family::Segments => unreachable!(),
            Family::PowerLaw => {
                let r: u64 = rng.random_range(1..=60);
                Rational::new(1.into(), (r * r).into())
            }
            Family::ManyZeros => {
                if rng.random_bool(0.6) {
                    Rational::zero()
                } else {
                    from_u64(rng.random_range(1..=100))
                }
            }
        })
        .collect()
}
