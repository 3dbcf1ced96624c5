//! End-to-end acceptance checks, one line per criterion.

mod common;

use std::time::Instant;

use hillshare::allocator::allocate;
use hillshare::experiments::{
    alpha_grid, gen_synthetic, high_ratio_ranges, instance_rng, run_histogram, ArithmeticMode,
    ExperimentConfig,
};
use hillshare::rational::{from_u64, min_objects, ratio, to_fraction, Rational};
use hillshare::region::{bracket_lower, bracket_upper, share_split};
use hillshare::shares::saturation_point;
use hillshare::{
    exact_mms, guarantee, hill_share, lex_minmax, mms_lower_bound, theoretical_ratio,
    witness_lower, witness_upper, Allocation, Construction, Instance, ObjectCount, ShareQuery,
};
use num_traits::{One, Zero};

use common::{brute_force_mms, random_row, random_vector, rng, subset_sums, Family};

type Outcome = Result<String, String>;
type Criterion = (&'static str, fn() -> Outcome);

fn check(cond: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(msg())
    }
}

/// Three interior points of `(lo, hi)` and the closed right end.
fn samples(lo: &Rational, hi: &Rational) -> Vec<Rational> {
    let w = hi - lo;
    let mut pts: Vec<Rational> = (1..=3).map(|j| lo + &w * ratio(j, 4)).collect();
    pts.push(hi.clone());
    pts
}

/// Sample points in every piece of brackets `k = 0..=3`.
fn bracket_grid(n: u64) -> Vec<Rational> {
    let mut pts = Vec::new();
    for k in 0..=3 {
        let (lo, mid, hi) = (bracket_lower(n, k), share_split(n, k), bracket_upper(n, k));
        if n == 2 && k == 1 {
            let cuts = [lo, ratio(7, 27), ratio(3, 11), ratio(2, 7), ratio(1, 4), hi];
            let mut cuts = cuts.to_vec();
            cuts.sort();
            for w in cuts.windows(2) {
                pts.extend(samples(&w[0], &w[1]));
            }
        } else {
            pts.extend(samples(&lo, &mid));
            pts.extend(samples(&mid, &hi));
        }
    }
    pts.sort();
    pts.dedup();
    pts
}

fn object_counts(n: u64, alpha: &Rational) -> Vec<ObjectCount> {
    let k = if alpha.is_one() {
        0
    } else {
        hillshare::region::bracket(n, alpha)
    };
    let lo = min_objects(alpha);
    let mut ms: Vec<u64> = [lo, k * n + n, k * n + n + 1, saturation_point(alpha)]
        .into_iter()
        .filter(|&m| m >= lo)
        .collect();
    ms.sort_unstable();
    ms.dedup();
    let mut out: Vec<ObjectCount> = ms.into_iter().map(ObjectCount::Finite).collect();
    out.push(ObjectCount::Unrestricted);
    out
}

fn criterion_1() -> Outcome {
    let mut cases = 0;
    for n in 2..=5 {
        for alpha in bracket_grid(n) {
            for m in object_counts(n, &alpha) {
                let q = ShareQuery::new(n, m, alpha.clone()).map_err(|e| e.to_string())?;
                let w = witness_upper(&q);
                let mms = exact_mms(&w.profile, n as usize).map_err(|e| e.to_string())?;
                let share = hill_share(&q);
                check(mms.value == share && w.claimed_mms == share, || {
                    format!(
                        "n={n} m={m} alpha={alpha}: witness MMS {} vs share {share}",
                        mms.value
                    )
                })?;
                cases += 1;
            }
        }
    }
    let q = |m, a: Rational| ShareQuery::finite(2, m, a).unwrap();
    check(hill_share(&q(3, ratio(1, 3))) == ratio(2, 3), || {
        "two agents, three objects at 1/3".into()
    })?;
    for a in [ratio(1, 4), ratio(3, 11), ratio(3, 10), ratio(1, 3)] {
        check(hill_share(&q(4, a.clone())) == &a * from_u64(2), || {
            format!("two agents, four objects at {a}")
        })?;
    }
    Ok(format!("{cases} witness instances tight"))
}

fn criterion_2() -> Outcome {
    let mut cases = 0;
    let mut restricted = 0;
    for n in 2..=5 {
        for alpha in bracket_grid(n) {
            for m in object_counts(n, &alpha) {
                let q = ShareQuery::new(n, m, alpha.clone()).map_err(|e| e.to_string())?;
                let w = witness_lower(&q);
                let mms = exact_mms(&w.profile, n as usize).map_err(|e| e.to_string())?;
                let bound = mms_lower_bound(&q);
                check(mms.value == bound, || {
                    format!(
                        "n={n} m={m} alpha={alpha}: MMS {} vs bound {bound}",
                        mms.value
                    )
                })?;
                if w.construction == Construction::RestrictedFill {
                    restricted += 1;
                }
                cases += 1;
            }
        }
    }
    check(restricted > 0, || {
        "restricted branch never exercised".into()
    })?;
    Ok(format!(
        "{cases} instances tight, {restricted} on the restricted branch"
    ))
}

fn criterion_3() -> Outcome {
    let mut cases = 0;
    for n in 2..=3u64 {
        for m in 6..=12u64 {
            for idx in 0..500 {
                let v = gen_synthetic(m, &mut instance_rng(3, n, m, idx), ArithmeticMode::Exact);
                let q = ShareQuery::finite(n, m, v.alpha()).map_err(|e| e.to_string())?;
                let mms = exact_mms(&v, n as usize).map_err(|e| e.to_string())?.value;
                let (lo, hi) = (mms_lower_bound(&q), hill_share(&q));
                check(lo <= mms && mms <= hi, || {
                    format!("n={n} m={m} idx={idx}: {lo} <= {mms} <= {hi} fails")
                })?;
                cases += 1;
            }
        }
    }
    Ok(format!("{cases} random vectors, zero violations"))
}

fn criterion_4() -> Outcome {
    let mut r = rng(4);
    let families = [Family::Segments, Family::PowerLaw, Family::ManyZeros];
    let mut levels = 0;
    for idx in 0..1000 {
        let n = 1 + idx % 6;
        let m = 1 + (idx * 7 + 3) % 40;
        let family = families[idx % 3];
        let rows: Vec<Vec<Rational>> = (0..n).map(|_| random_row(&mut r, m, family)).collect();
        let inst = Instance::normalize(&rows).map_err(|e| e.to_string())?;
        let out = allocate(&inst).map_err(|e| e.to_string())?;
        Allocation::new(out.allocation.bundles().to_vec(), m).map_err(|e| e.to_string())?;
        for (i, v) in inst.profile().iter().enumerate() {
            let cost = v.of(out.allocation.bundle(i));
            let cap = guarantee(n as u64, &v.alpha()).map_err(|e| e.to_string())?;
            check(cost <= cap, || {
                format!("instance {idx} ({family:?}) agent {i}: {cost} > {cap}")
            })?;
        }
        for level in &out.trace.levels {
            check(level.served_cost_bound_holds(), || {
                format!("instance {idx}: served-bundle bound fails at {level:?}")
            })?;
            check(level.region_carry_holds(), || {
                format!("instance {idx}: region mapping fails at {level:?}")
            })?;
            levels += 1;
        }
    }
    Ok(format!("1000 instances, {levels} knife levels checked"))
}

fn criterion_5() -> Outcome {
    for n in 2..=100u64 {
        let ceiling = Rational::new((2 * n).into(), (n + 1).into());
        for alpha in alpha_grid(n, 10_000) {
            let r = theoretical_ratio(&ShareQuery::unrestricted(n, alpha.clone()).unwrap());
            check(r <= ceiling, || {
                format!("n={n} alpha={alpha}: ratio {r} > {ceiling}")
            })?;
        }
    }
    let r = theoretical_ratio(&ShareQuery::unrestricted(2, ratio(1, 3)).unwrap());
    check(r == ratio(4, 3), || format!("n=2 alpha=1/3 gives {r}"))?;
    Ok("n=2..100 on 10000-point grids; n=2, alpha=1/3 gives 4/3".into())
}

fn criterion_6() -> Outcome {
    let threshold = ratio(4, 3);
    for n in 3..=20u64 {
        let ranges = high_ratio_ranges(n);
        let mut hit = vec![false; ranges.len()];
        for alpha in alpha_grid(n, 10_000) {
            let r = theoretical_ratio(&ShareQuery::unrestricted(n, alpha.clone()).unwrap());
            if r <= threshold {
                continue;
            }
            let inside = ranges.iter().position(|(a, b)| *a < alpha && alpha < *b);
            match inside {
                Some(j) => hit[j] = true,
                None => return Err(format!("n={n} alpha={alpha}: ratio {r} outside ranges")),
            }
        }
        check(hit.iter().all(|&h| h), || format!("n={n}: an empty range"))?;
    }
    Ok("n=3..20 contained, every range populated".into())
}

fn criterion_7() -> Outcome {
    let eps = Rational::new(1.into(), num_traits::pow(num_bigint::BigInt::from(10), 40));
    let tol = &eps * from_u64(100);
    let continuous = |n: u64, m: ObjectCount, e: &Rational| -> Result<Rational, String> {
        let at = |a: Rational| hill_share(&ShareQuery::new(n, m, a).unwrap());
        let v = at(e.clone());
        for side in [e - &eps, e + &eps] {
            if side <= Rational::zero() || side >= Rational::one() {
                continue;
            }
            if let ObjectCount::Finite(mm) = m {
                if min_objects(&side) > mm {
                    continue;
                }
            }
            let d = at(side.clone()) - &v;
            check(d.clone() * d.clone() <= &tol * &tol, || {
                format!("n={n} m={m}: jump of {d} at {e}")
            })?;
        }
        Ok(v)
    };
    let u = ObjectCount::Unrestricted;
    let anchors = [
        (ratio(7, 27), ratio(5, 9)),
        (ratio(2, 7), ratio(4, 7)),
        (ratio(1, 3), ratio(2, 3)),
    ];
    for (a, want) in &anchors {
        let v = continuous(2, u, a)?;
        check(v == *want, || format!("two agents at {a}: {v}"))?;
    }
    continuous(2, ObjectCount::Finite(5), &ratio(3, 11))?;
    let mut count = 0;
    for k in 0..=4 {
        for e in [bracket_lower(3, k), share_split(3, k), bracket_upper(3, k)] {
            if e < Rational::one() {
                continuous(3, u, &e)?;
                count += 1;
            }
        }
    }
    Ok(format!(
        "two agents: {}; {count} three-agent endpoints continuous",
        anchors
            .iter()
            .map(|(a, v)| format!("{}->{}", to_fraction(a), to_fraction(v)))
            .collect::<Vec<_>>()
            .join(" ")
    ))
}

fn criterion_8() -> Outcome {
    let mut alphas: Vec<Rational> = (1..120).map(|j| ratio(j, 120)).collect();
    for n in 2..=7 {
        for k in 0..=3 {
            alphas.extend([bracket_lower(n, k), share_split(n, k)]);
        }
    }
    alphas.extend([ratio(7, 27), ratio(2, 7), ratio(3, 11)]);
    alphas.sort();
    alphas.dedup();
    let mut checks = 0u64;
    for alpha in &alphas {
        let lo = min_objects(alpha);
        let sat = saturation_point(alpha);
        let mut counts: Vec<ObjectCount> = (lo..=sat + 3).map(ObjectCount::Finite).collect();
        counts.push(ObjectCount::Unrestricted);
        for n in 2..=8u64 {
            let share = |n, m| hill_share(&ShareQuery::new(n, m, alpha.clone()).unwrap());
            let series: Vec<Rational> = counts.iter().map(|&m| share(n, m)).collect();
            for (i, w) in series.windows(2).enumerate() {
                let m = lo + i as u64;
                let ok = if m < sat { w[0] <= w[1] } else { w[0] == w[1] };
                check(ok, || {
                    format!("n={n} alpha={alpha}: m={m} -> {} then {}", w[0], w[1])
                })?;
                checks += 1;
            }
            if n < 8 {
                for &m in &counts {
                    let (a, b) = (share(n, m), share(n + 1, m));
                    check(a >= b, || format!("alpha={alpha} m={m}: n={n} {a} < {b}"))?;
                    checks += 1;
                }
            }
        }
    }
    Ok(format!("{} alphas, {checks} comparisons", alphas.len()))
}

fn criterion_9() -> Outcome {
    let cfg = |n| ExperimentConfig {
        n,
        m_values: vec![8, 9, 10],
        instances_per_setting: 100,
        seed: 42,
        arithmetic: ArithmeticMode::Float,
    };
    let mut parts = Vec::new();
    for n in [6, 7] {
        let h = run_histogram(&cfg(n)).map_err(|e| e.to_string())?;
        let low = h.fraction_below_bucket(0);
        let max = h.max_ratio().cloned().unwrap_or_else(Rational::one);
        check(low >= 0.7, || format!("n={n}: only {low:.3} in [1.0,1.1)"))?;
        check(max < ratio(8, 5), || format!("n={n}: ratio {max} >= 1.6"))?;
        parts.push(format!("n={n}: {:.0}% in [1.0,1.1)", low * 100.0));
    }
    let h = run_histogram(&cfg(2)).map_err(|e| e.to_string())?;
    let max = h.max_ratio().cloned().unwrap_or_else(Rational::one);
    check(max < ratio(3, 2), || format!("n=2: ratio {max} >= 1.5"))?;
    parts.push(format!("n=2 max {:.3}", hillshare::rational::to_f64(&max)));
    Ok(parts.join(", "))
}

fn criterion_10() -> Outcome {
    let mut r = rng(10);
    for idx in 0..200 {
        let n = 1 + idx % 3;
        let m = 1 + (idx / 3) % 8;
        let v = random_vector(&mut r, m, 12);
        let fast = exact_mms(&v, n).map_err(|e| e.to_string())?.value;
        let slow = brute_force_mms(v.values(), n);
        check(fast == slow, || {
            format!("{:?} n={n}: {fast} vs {slow}", v.values())
        })?;
    }
    let mut pairs = 0u64;
    for idx in 0..100 {
        let n = 2 + idx % 3;
        let m = 4 + idx % 7;
        let v = random_vector(&mut r, m, 15);
        let a = lex_minmax(&v, n).map_err(|e| e.to_string())?;
        let mut order: Vec<usize> = (0..n).collect();
        order.sort_by_key(|&x| std::cmp::Reverse(v.of(a.bundle(x))));
        let first = a.bundle(order[0]);
        let load1 = v.of(first);
        let s1 = subset_sums(&v, first);
        for &j in &order[1..] {
            let loadj = v.of(a.bundle(j));
            for sj in subset_sums(&v, a.bundle(j)) {
                for x in &s1 {
                    if *x > sj {
                        check(x - &sj >= &load1 - &loadj, || {
                            format!("exchange property fails on {:?}", v.values())
                        })?;
                    }
                    if &loadj - &sj + x < load1 {
                        check(sj >= *x, || {
                            format!("contrapositive fails on {:?}", v.values())
                        })?;
                    }
                    pairs += 1;
                }
            }
        }
    }
    Ok(format!(
        "200 oracle matches, {pairs} subset pairs on 100 instances"
    ))
}

fn main() {
    let criteria: [Criterion; 10] = [
        ("worst-case share tightness", criterion_1),
        ("best-case share tightness", criterion_2),
        ("sandwich on random vectors", criterion_3),
        ("heterogeneous guarantee", criterion_4),
        ("ratio ceiling", criterion_5),
        ("high-ratio ranges", criterion_6),
        ("continuity anchors", criterion_7),
        ("monotonicity in n and m", criterion_8),
        ("random ratio histogram", criterion_9),
        ("oracle cross-validation", criterion_10),
    ];
    let mut failed = 0;
    for (i, (name, f)) in criteria.iter().enumerate() {
        let start = Instant::now();
        let result = f();
        let secs = start.elapsed().as_secs_f64();
        match result {
            Ok(detail) => println!("criterion {:>2} PASS  {name}: {detail} ({secs:.1}s)", i + 1),
            Err(detail) => {
                failed += 1;
                println!("criterion {:>2} FAIL  {name}: {detail} ({secs:.1}s)", i + 1);
            }
        }
    }
    if failed > 0 {
        println!("{failed} criteria failed");
        std::process::exit(1);
    }
}
