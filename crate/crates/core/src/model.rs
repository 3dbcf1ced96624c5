//! Disutility vectors, instances and allocations.

use num_traits::{One, Zero};

use crate::error::{Error, Result};
use crate::rational::{is_nonnegative, Rational};

/// Additive disutility over `m` objects, one entry per object.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DisutilityVector {
    values: Vec<Rational>,
    normalized: bool,
}

impl DisutilityVector {
    /// Raw (unnormalized) vector. Rejects negative entries.
    pub fn new(values: Vec<Rational>) -> Result<Self> {
        if let Some(pos) = values.iter().position(|v| !is_nonnegative(v)) {
            return Err(Error::Validation(format!(
                "object {} has negative disutility {}",
                pos + 1,
                values[pos]
            )));
        }
        Ok(DisutilityVector {
            values,
            normalized: false,
        })
    }

    /// A vector that must already sum to exactly one.
    pub fn normalized(values: Vec<Rational>) -> Result<Self> {
        let mut v = Self::new(values)?;
        if !v.total().is_one() {
            return Err(Error::Validation(format!(
                "disutilities sum to {}, expected 1",
                v.total()
            )));
        }
        v.normalized = true;
        Ok(v)
    }

    /// Divides by the total. Returns the scaled vector and the original
    /// total; an all-zero vector is returned unchanged with total zero.
    pub fn normalize(&self) -> (DisutilityVector, Rational) {
        let total = self.total();
        if total.is_zero() {
            return (self.clone(), total);
        }
        let values = self.values.iter().map(|v| v / &total).collect();
        (
            DisutilityVector {
                values,
                normalized: true,
            },
            total,
        )
    }

    pub fn values(&self) -> &[Rational] {
        &self.values
    }

    pub fn into_values(self) -> Vec<Rational> {
        self.values
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn is_normalized(&self) -> bool {
        self.normalized
    }

    pub fn is_zero(&self) -> bool {
        self.values.iter().all(Zero::is_zero)
    }

    pub fn total(&self) -> Rational {
        self.values.iter().sum()
    }

    /// Largest single-object disutility (zero for an empty vector).
    pub fn alpha(&self) -> Rational {
        self.values
            .iter()
            .max()
            .cloned()
            .unwrap_or_else(Rational::zero)
    }

    /// Disutility of a bundle of object indices.
    pub fn of(&self, bundle: &[usize]) -> Rational {
        bundle.iter().map(|&e| &self.values[e]).sum()
    }

    pub fn get(&self, e: usize) -> &Rational {
        &self.values[e]
    }
}

/// `n` agents with disutility rows over the same `m` objects.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Instance {
    profile: Vec<DisutilityVector>,
    scale_factors: Vec<Rational>,
}

impl Instance {
    /// Normalizes every row of a raw matrix. Rows summing to zero stay all
    /// zero and are recorded with scale factor zero.
    pub fn normalize(raw: &[Vec<Rational>]) -> Result<Self> {
        let rows = raw
            .iter()
            .map(|row| DisutilityVector::new(row.clone()))
            .collect::<Result<Vec<_>>>()?;
        Self::from_vectors(rows)
    }

    pub fn from_vectors(rows: Vec<DisutilityVector>) -> Result<Self> {
        if rows.is_empty() {
            return Err(Error::Validation(
                "an instance needs at least one agent".into(),
            ));
        }
        let m = rows[0].len();
        if let Some(i) = rows.iter().position(|r| r.len() != m) {
            return Err(Error::Validation(format!(
                "agent {} has {} objects, expected {m}",
                i + 1,
                rows[i].len()
            )));
        }
        let (profile, scale_factors) = rows.iter().map(DisutilityVector::normalize).unzip();
        Ok(Instance {
            profile,
            scale_factors,
        })
    }

    pub(crate) fn from_parts(profile: Vec<DisutilityVector>, scale_factors: Vec<Rational>) -> Self {
        Instance {
            profile,
            scale_factors,
        }
    }

    /// `n` copies of one vector.
    pub fn unanimous(v: &DisutilityVector, n: usize) -> Result<Self> {
        Self::from_vectors(vec![v.clone(); n.max(1)])
    }

    pub fn n(&self) -> usize {
        self.profile.len()
    }

    pub fn m(&self) -> usize {
        self.profile[0].len()
    }

    pub fn profile(&self) -> &[DisutilityVector] {
        &self.profile
    }

    pub fn agent(&self, i: usize) -> &DisutilityVector {
        &self.profile[i]
    }

    pub fn scale_factors(&self) -> &[Rational] {
        &self.scale_factors
    }

    /// True when agent `i`'s original row was all zero.
    pub fn is_zero_agent(&self, i: usize) -> bool {
        self.scale_factors[i].is_zero()
    }
}

/// Partition of objects `0..m` into `n` possibly empty bundles.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Allocation {
    bundles: Vec<Vec<usize>>,
}

impl Allocation {
    /// Builds and checks an allocation of `m` objects.
    pub fn new(mut bundles: Vec<Vec<usize>>, m: usize) -> Result<Self> {
        let mut seen = vec![false; m];
        for (i, bundle) in bundles.iter_mut().enumerate() {
            bundle.sort_unstable();
            for &e in bundle.iter() {
                if e >= m {
                    return Err(Error::Validation(format!(
                        "bundle {} contains object {} but there are only {m} objects",
                        i + 1,
                        e + 1
                    )));
                }
                if std::mem::replace(&mut seen[e], true) {
                    return Err(Error::Validation(format!(
                        "object {} is assigned twice",
                        e + 1
                    )));
                }
            }
        }
        if let Some(e) = seen.iter().position(|s| !s) {
            return Err(Error::Validation(format!("object {} is unassigned", e + 1)));
        }
        Ok(Allocation { bundles })
    }

    pub(crate) fn from_parts_unchecked(mut bundles: Vec<Vec<usize>>) -> Self {
        for b in &mut bundles {
            b.sort_unstable();
        }
        Allocation { bundles }
    }

    pub fn n(&self) -> usize {
        self.bundles.len()
    }

    pub fn bundles(&self) -> &[Vec<usize>] {
        &self.bundles
    }

    pub fn bundle(&self, i: usize) -> &[usize] {
        &self.bundles[i]
    }

    pub fn into_bundles(self) -> Vec<Vec<usize>> {
        self.bundles
    }

    /// Bundle loads under a single disutility vector.
    pub fn loads(&self, v: &DisutilityVector) -> Vec<Rational> {
        self.bundles.iter().map(|b| v.of(b)).collect()
    }
}

/// Sorts a vector non-increasingly. The permutation maps each sorted
/// position to the original object index; ties keep original order.
pub fn order_vector(v: &DisutilityVector) -> (DisutilityVector, Vec<usize>) {
    let mut perm: Vec<usize> = (0..v.len()).collect();
    perm.sort_by(|&a, &b| v.values[b].cmp(&v.values[a]));
    let values = perm.iter().map(|&e| v.values[e].clone()).collect();
    (
        DisutilityVector {
            values,
            normalized: v.normalized,
        },
        perm,
    )
}
