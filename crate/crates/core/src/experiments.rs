//! Random instances, worst-case-share to MinMaxShare ratio histograms, and
//! plot-ready curves of the closed forms.
//!
//! Sampling: `m-1` cut points in `[0, 1]` on a grid of `10^9`; the `m`
//! segment lengths form the vector. Each instance gets its own ChaCha8
//! stream derived from `(seed, n, m, index)`, so runs are reproducible and
//! independent of evaluation order.

use std::fmt::Write as _;
use std::path::Path;

use num_traits::{One, Zero};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::csv::read_rows;
use crate::error::{Error, Result};
use crate::mms::{exact_mms, MmsSolver};
use crate::model::DisutilityVector;
use crate::rational::{from_u64, ratio, to_decimal, to_f64, to_fraction, Rational};
use crate::region::{bracket_lower, bracket_upper, guarantee_split, share_split};
use crate::shares::{guarantee, hill_share, mms_lower_bound, ObjectCount, ShareQuery};

/// Resolution of sampled cut points.
pub const GRID: u64 = 1_000_000_000;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ArithmeticMode {
    /// Integer cut points, exact rationals throughout.
    Exact,
    /// `f64` cut points snapped to the grid; MinMaxShare on scaled integers.
    Float,
}

impl std::fmt::Display for ArithmeticMode {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            ArithmeticMode::Exact => "exact",
            ArithmeticMode::Float => "float",
        })
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ExperimentConfig {
    pub n: u64,
    pub m_values: Vec<u64>,
    pub instances_per_setting: u64,
    pub seed: u64,
    pub arithmetic: ArithmeticMode,
}

impl ExperimentConfig {
    pub fn validate(&self) -> Result<()> {
        if self.n < 2 {
            return Err(Error::Domain(format!("need n >= 2 agents, got {}", self.n)));
        }
        if let Some(m) = self.m_values.iter().find(|&&m| m == 0) {
            return Err(Error::Domain(format!("m = {m}: need at least one object")));
        }
        Ok(())
    }

    /// Header comment line shared by every output of this run.
    pub fn header(&self, kind: &str) -> String {
        let ms: Vec<String> = self.m_values.iter().map(u64::to_string).collect();
        format!(
            "# {kind} n={} m={} count={} seed={} arithmetic={} rng=chacha8",
            self.n,
            ms.join(";"),
            self.instances_per_setting,
            self.seed,
            self.arithmetic
        )
    }
}

/// Generator for instance `index` of setting `(n, m)`.
pub fn instance_rng(seed: u64, n: u64, m: u64, index: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream((n << 48) ^ (m << 32) ^ index);
    rng
}

/// Segment lengths, in units of `1/GRID`, of `m-1` sorted cuts.
pub fn gen_weights<R: Rng>(m: u64, rng: &mut R, mode: ArithmeticMode) -> Vec<u64> {
    let cuts: Vec<u64> = (1..m)
        .map(|_| match mode {
            ArithmeticMode::Exact => rng.random_range(0..=GRID),
            ArithmeticMode::Float => (rng.random::<f64>() * GRID as f64).round() as u64,
        })
        .collect();
    segments(cuts)
}

/// Lengths of the `m` pieces that sorted `cuts` make of `[0, GRID]`.
pub fn segments(mut cuts: Vec<u64>) -> Vec<u64> {
    cuts.sort_unstable();
    let mut prev = 0;
    let mut weights: Vec<u64> = cuts
        .iter()
        .map(|&c| {
            let w = c - prev;
            prev = c;
            w
        })
        .collect();
    weights.push(GRID - prev);
    weights
}

fn weights_to_vector(weights: &[u64]) -> DisutilityVector {
    let g = from_u64(GRID);
    DisutilityVector::normalized(weights.iter().map(|&w| from_u64(w) / &g).collect())
        .expect("segments sum to one")
}

/// A normalized vector of `m` random segment lengths.
pub fn gen_synthetic<R: Rng>(m: u64, rng: &mut R, mode: ArithmeticMode) -> DisutilityVector {
    weights_to_vector(&gen_weights(m, rng, mode))
}

/// Largest entry, worst-case share, MinMaxShare and their ratio.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct InstanceRecord {
    pub n: u64,
    pub m: u64,
    pub alpha: Rational,
    pub hill_share: Rational,
    pub mms: Rational,
    pub ratio: Rational,
}

pub fn instance_ratio(v: &DisutilityVector, n: u64) -> Result<InstanceRecord> {
    let (v, _) = v.normalize();
    if v.is_zero() {
        return Err(Error::Domain("an all-zero vector has no ratio".into()));
    }
    let mms = exact_mms(&v, n as usize)?.value;
    record(&v, n, mms)
}

fn record(v: &DisutilityVector, n: u64, mms: Rational) -> Result<InstanceRecord> {
    let alpha = v.alpha();
    let m = v.len() as u64;
    let hill = hill_share(&ShareQuery::finite(n, m, alpha.clone())?);
    Ok(InstanceRecord {
        n,
        m,
        ratio: &hill / &mms,
        alpha,
        hill_share: hill,
        mms,
    })
}

/// Bucket `[1 + i/10, 1 + (i+1)/10)` holding `ratio >= 1`.
pub fn bucket_index(ratio: &Rational) -> usize {
    let tenths = (ratio * from_u64(10)).floor().to_integer();
    let i = tenths - num_bigint::BigInt::from(10);
    i.try_into().unwrap_or(0)
}

/// Counts per bucket for each `m`, plus every record.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RatioHistogram {
    pub n: u64,
    /// `(m, counts)`; `counts[i]` is bucket `[1 + i/10, 1 + (i+1)/10)`.
    pub counts: Vec<(u64, Vec<u64>)>,
    pub records: Vec<InstanceRecord>,
}

impl RatioHistogram {
    pub fn total(&self) -> u64 {
        self.counts.iter().flat_map(|(_, c)| c).sum()
    }

    /// Share of all instances whose ratio is below `1 + (i+1)/10`.
    pub fn fraction_below_bucket(&self, i: usize) -> f64 {
        let total = self.total();
        if total == 0 {
            return 0.0;
        }
        let low: u64 = self
            .counts
            .iter()
            .map(|(_, c)| c.iter().take(i + 1).sum::<u64>())
            .sum();
        low as f64 / total as f64
    }

    pub fn max_ratio(&self) -> Option<&Rational> {
        self.records.iter().map(|r| &r.ratio).max()
    }
}

pub fn run_histogram(cfg: &ExperimentConfig) -> Result<RatioHistogram> {
    cfg.validate()?;
    let solver = MmsSolver::default();
    let mut counts = Vec::new();
    let mut records = Vec::new();
    for &m in &cfg.m_values {
        let mut buckets: Vec<u64> = Vec::new();
        for idx in 0..cfg.instances_per_setting {
            let mut rng = instance_rng(cfg.seed, cfg.n, m, idx);
            let weights = gen_weights(m, &mut rng, cfg.arithmetic);
            let v = weights_to_vector(&weights);
            let rec = match cfg.arithmetic {
                ArithmeticMode::Exact => instance_ratio(&v, cfg.n)?,
                ArithmeticMode::Float => {
                    let (value, _) = solver.solve_weights(&weights, cfg.n as usize)?;
                    let mms = Rational::new(value.into(), GRID.into());
                    record(&v, cfg.n, mms)?
                }
            };
            let b = bucket_index(&rec.ratio);
            if buckets.len() <= b {
                buckets.resize(b + 1, 0);
            }
            buckets[b] += 1;
            log::debug!("n={} m={m} idx={idx} ratio={}", cfg.n, rec.ratio);
            records.push(rec);
        }
        counts.push((m, buckets));
    }
    Ok(RatioHistogram {
        n: cfg.n,
        counts,
        records,
    })
}

/// `n,m,bucket_lo,bucket_hi,count`, one line per nonempty bucket.
pub fn histogram_csv(h: &RatioHistogram, header: &str) -> String {
    let mut out = format!("{header}\nn,m,bucket_lo,bucket_hi,count\n");
    for (m, buckets) in &h.counts {
        for (i, &c) in buckets.iter().enumerate() {
            if c == 0 {
                continue;
            }
            let lo = ratio(10 + i as i64, 10);
            let hi = ratio(11 + i as i64, 10);
            let _ = writeln!(
                out,
                "{},{m},{},{},{c}",
                h.n,
                to_decimal(&lo, 1),
                to_decimal(&hi, 1)
            );
        }
    }
    out
}

pub fn records_csv(h: &RatioHistogram, header: &str) -> String {
    let mut out = format!("{header}\nn,m,alpha,hill_share,mms,ratio,ratio_decimal\n");
    for r in &h.records {
        let _ = writeln!(
            out,
            "{},{},{},{},{},{},{}",
            r.n,
            r.m,
            to_fraction(&r.alpha),
            to_fraction(&r.hill_share),
            to_fraction(&r.mms),
            to_fraction(&r.ratio),
            to_decimal(&r.ratio, 12)
        );
    }
    out
}

/// One row of a curve table.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CurveRow {
    pub alpha: Rational,
    pub delta_upper: Rational,
    pub delta_lower: Rational,
    pub guarantee: Rational,
    pub ratio: Rational,
}

/// Closed forms on each grid point. Points with no valid query are skipped.
pub fn curve_samples(n: u64, grid: &[Rational], m: ObjectCount) -> Vec<CurveRow> {
    grid.iter()
        .filter_map(|alpha| {
            let q = match ShareQuery::new(n, m, alpha.clone()) {
                Ok(q) => q,
                Err(e) => {
                    log::warn!("skipping alpha = {alpha}: {e}");
                    return None;
                }
            };
            let delta_upper = hill_share(&q);
            let delta_lower = mms_lower_bound(&q);
            Some(CurveRow {
                ratio: &delta_upper / &delta_lower,
                guarantee: guarantee(n, alpha).expect("alpha validated"),
                alpha: alpha.clone(),
                delta_upper,
                delta_lower,
            })
        })
        .collect()
}

pub fn curve_csv(rows: &[CurveRow], header: &str) -> String {
    let mut out =
        format!("{header}\nalpha_fraction,alpha_decimal,delta_upper,delta_lower,guarantee,ratio\n");
    for r in rows {
        let _ = writeln!(
            out,
            "{},{},{},{},{},{}",
            to_fraction(&r.alpha),
            to_decimal(&r.alpha, 12),
            to_fraction(&r.delta_upper),
            to_fraction(&r.delta_lower),
            to_fraction(&r.guarantee),
            to_fraction(&r.ratio)
        );
    }
    out
}

/// Every region endpoint in `(0, 1]` for `n` agents down to `1/(kn+n+1)`.
pub fn region_endpoints(n: u64, max_k: u64) -> Vec<Rational> {
    let mut pts = Vec::new();
    for k in 0..=max_k {
        pts.extend([
            bracket_lower(n, k),
            share_split(n, k),
            guarantee_split(n, k),
            bracket_upper(n, k),
        ]);
    }
    pts
}

/// `j/points` for `0 < j < points` merged with the region endpoints that
/// are at least `1/points`, sorted and deduplicated.
pub fn alpha_grid(n: u64, points: u64) -> Vec<Rational> {
    let mut grid: Vec<Rational> = (1..points)
        .map(|j| Rational::new(j.into(), points.into()))
        .collect();
    let floor = Rational::new(1.into(), points.into());
    let max_k = points / n + 1;
    grid.extend(
        region_endpoints(n, max_k)
            .into_iter()
            .filter(|a| *a >= floor && *a < Rational::one()),
    );
    if n == 2 {
        // Extra breakpoints of the two-agent worst case with six or more objects.
        grid.extend([ratio(7, 27), ratio(2, 7)]);
    }
    grid.sort();
    grid.dedup();
    grid
}

/// Open intervals of `alpha` outside which the unrestricted ratio is at
/// most `4/3`.
pub fn high_ratio_ranges(n: u64) -> Vec<(Rational, Rational)> {
    match n {
        0..=2 => Vec::new(),
        3 => vec![(ratio(2, 9), ratio(1, 3))],
        4 => vec![(ratio(1, 6), ratio(3, 11))],
        5 => vec![(ratio(4, 45), ratio(1, 9)), (ratio(2, 15), ratio(3, 13))],
        _ => vec![(
            Rational::new(4.into(), (9 * n).into()),
            Rational::new(3.into(), (2 * n + 3).into()),
        )],
    }
}

/// Total length of [`high_ratio_ranges`].
pub fn high_ratio_measure(n: u64) -> Rational {
    high_ratio_ranges(n)
        .iter()
        .map(|(a, b)| b - a)
        .fold(Rational::zero(), |s, w| s + w)
}

/// Normalized rows of an instance file. All-zero rows are dropped.
pub fn ingest_csv(path: impl AsRef<Path>) -> Result<Vec<DisutilityVector>> {
    let path = path.as_ref();
    let rows = read_rows(path)?;
    if rows.is_empty() {
        log::warn!("{} contains no rows", path.display());
    }
    let mut out = Vec::with_capacity(rows.len());
    for (i, row) in rows.into_iter().enumerate() {
        let (v, total) = DisutilityVector::new(row)?.normalize();
        if total.is_zero() {
            log::warn!("row {} sums to zero; skipped", i + 1);
            continue;
        }
        out.push(v);
    }
    Ok(out)
}

/// Records for vectors from a file, each split among `n` agents.
pub fn ingest_records(vectors: &[DisutilityVector], n: u64) -> Result<Vec<InstanceRecord>> {
    vectors.iter().map(|v| instance_ratio(v, n)).collect()
}

/// `f64` view of a record's ratio, for quick summaries.
pub fn ratio_f64(r: &InstanceRecord) -> f64 {
    to_f64(&r.ratio)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rational::int;

    #[test]
    fn synthetic_shapes() {
        let mut rng = instance_rng(1, 2, 1, 0);
        let v = gen_synthetic(1, &mut rng, ArithmeticMode::Exact);
        assert_eq!(v.values(), &[int(1)]);

        let mut rng = instance_rng(7, 3, 9, 4);
        let v = gen_synthetic(9, &mut rng, ArithmeticMode::Float);
        assert_eq!(v.len(), 9);
        assert_eq!(v.total(), int(1));
    }

    #[test]
    fn single_cut() {
        assert_eq!(segments(vec![300_000_000]), vec![300_000_000, 700_000_000]);
        assert_eq!(segments(vec![]), vec![GRID]);
        assert_eq!(segments(vec![9, 3]), vec![3, 6, GRID - 9]);
    }

    #[test]
    fn same_seed_same_vectors() {
        for mode in [ArithmeticMode::Exact, ArithmeticMode::Float] {
            let a = gen_synthetic(10, &mut instance_rng(42, 6, 10, 3), mode);
            let b = gen_synthetic(10, &mut instance_rng(42, 6, 10, 3), mode);
            let c = gen_synthetic(10, &mut instance_rng(42, 6, 10, 4), mode);
            assert_eq!(a, b);
            assert_ne!(a, c);
        }
    }

    #[test]
    fn ratio_example() {
        let v = DisutilityVector::new(vec![ratio(3, 10), ratio(1, 4), ratio(1, 4), ratio(1, 5)])
            .unwrap();
        let r = instance_ratio(&v, 2).unwrap();
        assert_eq!(r.hill_share, ratio(3, 5));
        assert_eq!(r.mms, ratio(1, 2));
        assert_eq!(r.ratio, ratio(6, 5));
    }

    #[test]
    fn buckets() {
        assert_eq!(bucket_index(&int(1)), 0);
        assert_eq!(bucket_index(&ratio(109, 100)), 0);
        assert_eq!(bucket_index(&ratio(11, 10)), 1);
        assert_eq!(bucket_index(&ratio(4, 3)), 3);
    }

    #[test]
    fn empty_histogram() {
        let cfg = ExperimentConfig {
            n: 2,
            m_values: vec![5],
            instances_per_setting: 0,
            seed: 1,
            arithmetic: ArithmeticMode::Exact,
        };
        let h = run_histogram(&cfg).unwrap();
        assert_eq!(h.total(), 0);
        assert!(h.records.is_empty());
        assert_eq!(histogram_csv(&h, "#").lines().count(), 2);
    }

    #[test]
    fn modes_agree_on_grid_vectors() {
        let cfg = |arithmetic| ExperimentConfig {
            n: 3,
            m_values: vec![7],
            instances_per_setting: 20,
            seed: 5,
            arithmetic,
        };
        let h = run_histogram(&cfg(ArithmeticMode::Float)).unwrap();
        for r in &h.records {
            assert!(r.ratio >= int(1));
        }
        let e = run_histogram(&cfg(ArithmeticMode::Exact)).unwrap();
        assert_eq!(e.total(), 20);
    }

    #[test]
    fn curve_rows() {
        let rows = curve_samples(
            2,
            &[ratio(1, 3), ratio(3, 5), ratio(0, 1), ratio(3, 2)],
            ObjectCount::Unrestricted,
        );
        assert_eq!(rows.len(), 2);
        assert_eq!(
            rows[0],
            CurveRow {
                alpha: ratio(1, 3),
                delta_upper: ratio(2, 3),
                delta_lower: ratio(1, 2),
                guarantee: ratio(2, 3),
                ratio: ratio(4, 3),
            }
        );
        let r = &rows[1];
        assert_eq!(
            (&r.delta_upper, &r.delta_lower, &r.guarantee, &r.ratio),
            (&ratio(3, 5), &ratio(3, 5), &ratio(2, 3), &int(1))
        );
        let text = curve_csv(&rows, "# curve n=2");
        assert!(text.contains("1/3,0.333333333333,2/3,1/2,2/3,4/3"));
    }

    #[test]
    fn grid_contains_endpoints() {
        let g = alpha_grid(2, 100);
        assert!(g.contains(&ratio(7, 27)));
        assert!(g.contains(&ratio(3, 11)));
        assert!(g.contains(&ratio(1, 3)));
        assert!(g.windows(2).all(|w| w[0] < w[1]));
    }

    #[test]
    fn ingest() {
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("a.csv");
        std::fs::write(
            &p,
            "object_1,object_2,object_3\n1,1,2\n1/3,1/3,1/3\n0,0,0\n",
        )
        .unwrap();
        let vs = ingest_csv(&p).unwrap();
        assert_eq!(vs.len(), 2);
        assert_eq!(vs[0].values(), &[ratio(1, 4), ratio(1, 4), ratio(1, 2)]);
        assert_eq!(vs[1].values(), vec![ratio(1, 3); 3].as_slice());
        let empty = dir.path().join("e.csv");
        std::fs::write(&empty, "").unwrap();
        assert!(ingest_csv(&empty).unwrap().is_empty());
    }
}
