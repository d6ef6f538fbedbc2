use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::scalar::Real;

/// Finite-support input distribution: strictly increasing mass-point
/// locations paired with probabilities that sum to one.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "PmfRepr<T>", into = "PmfRepr<T>")]
#[serde(bound(
    serialize = "T: Real + Serialize",
    deserialize = "T: Real + Deserialize<'de>"
))]
pub struct FinitePmf<T> {
    locations: Vec<T>,
    probabilities: Vec<T>,
}

#[derive(Serialize, Deserialize)]
struct PmfRepr<T> {
    locations: Vec<T>,
    probabilities: Vec<T>,
}

impl<T: Real> TryFrom<PmfRepr<T>> for FinitePmf<T> {
    type Error = Error<T>;

    fn try_from(r: PmfRepr<T>) -> Result<Self, T> {
        FinitePmf::new(r.locations, r.probabilities)
    }
}

impl<T> From<FinitePmf<T>> for PmfRepr<T> {
    fn from(p: FinitePmf<T>) -> Self {
        PmfRepr {
            locations: p.locations,
            probabilities: p.probabilities,
        }
    }
}

/// Tolerance on `|sum(p) - 1|`: 1e-12, widened to the type's resolution.
fn sum_tolerance<T: Real>(n: usize) -> T {
    T::tol(1e-12, 4.0 * (n.max(1) as f64))
}

impl<T: Real> FinitePmf<T> {
    pub fn new(locations: Vec<T>, probabilities: Vec<T>) -> Result<Self, T> {
        check_locations(&locations)?;
        if probabilities.len() != locations.len() {
            return Err(Error::InvalidPmf(format!(
                "{} locations but {} probabilities",
                locations.len(),
                probabilities.len()
            )));
        }
        if let Some(p) = probabilities
            .iter()
            .find(|p| !p.is_finite() || **p < T::zero())
        {
            return Err(Error::InvalidPmf(format!(
                "probability {p:?} is not in [0, inf)"
            )));
        }
        let sum = probabilities.iter().fold(T::zero(), |a, &p| a + p);
        if (sum - T::one()).abs() > sum_tolerance(probabilities.len()) {
            return Err(Error::InvalidPmf(format!("probabilities sum to {sum:?}")));
        }
        Ok(Self {
            locations,
            probabilities,
        })
    }

    /// Like [`FinitePmf::new`] but rescales nonnegative weights to sum to one.
    pub fn normalized(locations: Vec<T>, weights: Vec<T>) -> Result<Self, T> {
        let sum = weights.iter().fold(T::zero(), |a, &p| a + p);
        if !(sum > T::zero()) || !sum.is_finite() {
            return Err(Error::InvalidPmf(format!("weights sum to {sum:?}")));
        }
        let probabilities = weights.into_iter().map(|w| w / sum).collect();
        Self::new(locations, probabilities)
    }

    pub fn point_mass(x: T) -> Self {
        Self {
            locations: vec![x],
            probabilities: vec![T::one()],
        }
    }

    /// Equiprobable distribution over `locations`.
    pub fn uniform(locations: Vec<T>) -> Result<Self, T> {
        check_locations(&locations)?;
        let p = T::one() / T::from_usize(locations.len()).unwrap();
        let probabilities = vec![p; locations.len()];
        Ok(Self {
            locations,
            probabilities,
        })
    }

    /// Builds a distribution that is symmetric about zero from its
    /// nonnegative half. `magnitudes` are the strictly increasing positive
    /// locations; `center` carries the probability placed at zero (odd
    /// cardinality) or `None` (even cardinality). `half_probs[i]` is the
    /// probability of each of `±magnitudes[i]`.
    pub fn symmetric(magnitudes: &[T], half_probs: &[T], center: Option<T>) -> Result<Self, T> {
        if magnitudes.len() != half_probs.len() {
            return Err(Error::InvalidPmf("half-support length mismatch".into()));
        }
        let mut locations = Vec::with_capacity(2 * magnitudes.len() + 1);
        let mut probabilities = Vec::with_capacity(locations.capacity());
        for (m, p) in magnitudes.iter().zip(half_probs).rev() {
            locations.push(-*m);
            probabilities.push(*p);
        }
        if let Some(c) = center {
            locations.push(T::zero());
            probabilities.push(c);
        }
        for (m, p) in magnitudes.iter().zip(half_probs) {
            locations.push(*m);
            probabilities.push(*p);
        }
        Self::new(locations, probabilities)
    }

    /// Skips validation. Callers guarantee the invariants.
    pub(crate) fn from_parts_unchecked(locations: Vec<T>, probabilities: Vec<T>) -> Self {
        debug_assert_eq!(locations.len(), probabilities.len());
        Self {
            locations,
            probabilities,
        }
    }

    pub fn locations(&self) -> &[T] {
        &self.locations
    }

    pub fn probabilities(&self) -> &[T] {
        &self.probabilities
    }

    pub fn cardinality(&self) -> usize {
        self.locations.len()
    }

    pub fn into_parts(self) -> (Vec<T>, Vec<T>) {
        (self.locations, self.probabilities)
    }

    pub fn iter(&self) -> impl Iterator<Item = (T, T)> + '_ {
        self.locations
            .iter()
            .copied()
            .zip(self.probabilities.iter().copied())
    }

    /// Second moment `sum p_i x_i^2`.
    pub fn power(&self) -> T {
        self.iter().fold(T::zero(), |a, (x, p)| a + p * x * x)
    }

    pub fn mean(&self) -> T {
        self.iter().fold(T::zero(), |a, (x, p)| a + p * x)
    }

    pub fn variance(&self) -> T {
        let m = self.mean();
        (self.power() - m * m).max(T::zero())
    }

    /// Entropy in bits, with `0 log 0 = 0`.
    pub fn entropy(&self) -> T {
        -self
            .probabilities
            .iter()
            .filter(|p| **p > T::zero())
            .fold(T::zero(), |a, &p| a + p * p.log2())
    }

    pub fn min_location(&self) -> T {
        self.locations[0]
    }

    pub fn max_location(&self) -> T {
        *self.locations.last().unwrap()
    }

    /// True when `x_i = -x_mirror` and `p_i = p_mirror` within `tol`.
    pub fn is_symmetric(&self, tol: T) -> bool {
        let n = self.cardinality();
        (0..n / 2 + n % 2).all(|i| {
            let m = n - 1 - i;
            (self.locations[i] + self.locations[m]).abs() <= tol
                && (self.probabilities[i] - self.probabilities[m]).abs() <= tol
        })
    }

    /// Largest `|x_i + x_mirror|` and `|p_i - p_mirror|` over mirrored pairs.
    pub fn asymmetry(&self) -> (T, T) {
        let n = self.cardinality();
        (0..n / 2).fold((T::zero(), T::zero()), |(dl, dp), i| {
            let m = n - 1 - i;
            (
                dl.max((self.locations[i] + self.locations[m]).abs()),
                dp.max((self.probabilities[i] - self.probabilities[m]).abs()),
            )
        })
    }

    /// Removes mass points whose probability is below `threshold` and
    /// renormalizes. The heaviest point always survives.
    pub fn pruned(&self, threshold: T) -> Self {
        let heaviest = self.probabilities.iter().enumerate().fold(0, |b, (i, p)| {
            if *p > self.probabilities[b] {
                i
            } else {
                b
            }
        });
        let keep: Vec<usize> = (0..self.cardinality())
            .filter(|&i| i == heaviest || self.probabilities[i] >= threshold)
            .collect();
        let sum = keep
            .iter()
            .fold(T::zero(), |a, &i| a + self.probabilities[i]);
        Self {
            locations: keep.iter().map(|&i| self.locations[i]).collect(),
            probabilities: keep.iter().map(|&i| self.probabilities[i] / sum).collect(),
        }
    }

    /// Same locations with new probabilities.
    pub fn with_probabilities(&self, probabilities: Vec<T>) -> Result<Self, T> {
        Self::new(self.locations.clone(), probabilities)
    }

    /// Converts to another scalar type.
    pub fn cast<U: Real>(&self) -> FinitePmf<U> {
        let conv = |v: &T| U::lit(v.to_f64_lossy());
        let locations = self.locations.iter().map(conv).collect();
        let weights: Vec<U> = self.probabilities.iter().map(conv).collect();
        let sum = weights.iter().fold(U::zero(), |a, &p| a + p);
        FinitePmf {
            locations,
            probabilities: weights.into_iter().map(|p| p / sum).collect(),
        }
    }
}

pub(crate) fn check_locations<T: Real>(locations: &[T]) -> Result<(), T> {
    if locations.is_empty() {
        return Err(Error::InvalidPmf("cardinality must be at least 1".into()));
    }
    if let Some(x) = locations.iter().find(|x| !x.is_finite()) {
        return Err(Error::InvalidPmf(format!("location {x:?} is not finite")));
    }
    if let Some(w) = locations.windows(2).find(|w| !(w[0] < w[1])) {
        return Err(Error::InvalidPmf(format!(
            "locations must be strictly increasing ({:?} then {:?})",
            w[0], w[1]
        )));
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn moments_of_bpsk() {
        let p = FinitePmf::new(vec![-1.0, 1.0], vec![0.5, 0.5]).unwrap();
        assert_eq!(p.power(), 1.0);
        assert_eq!(p.entropy(), 1.0);
        assert_eq!(p.mean(), 0.0);
    }

    #[test]
    fn moments_of_point_mass() {
        let p = FinitePmf::point_mass(0.0_f64);
        assert_eq!(p.power(), 0.0);
        assert_eq!(p.entropy(), 0.0);
    }

    #[test]
    fn moments_of_ternary() {
        let p = FinitePmf::new(vec![-1.0_f64, 0.0, 1.0], vec![0.25, 0.5, 0.25]).unwrap();
        assert!((p.power() - 0.5).abs() < 1e-15);
        assert!((p.entropy() - 1.5).abs() < 1e-15);
    }

    #[test]
    fn zero_probability_contributes_no_entropy() {
        let p = FinitePmf::new(vec![-1.0, 0.0, 1.0], vec![0.5, 0.0, 0.5]).unwrap();
        assert_eq!(p.entropy(), 1.0);
    }

    #[test]
    fn rejects_bad_input() {
        assert!(FinitePmf::<f64>::new(vec![], vec![]).is_err());
        assert!(FinitePmf::new(vec![1.0, 1.0], vec![0.5, 0.5]).is_err());
        assert!(FinitePmf::new(vec![1.0, 0.0], vec![0.5, 0.5]).is_err());
        assert!(FinitePmf::new(vec![0.0, 1.0], vec![0.6, 0.5]).is_err());
        assert!(FinitePmf::new(vec![0.0, 1.0], vec![1.5, -0.5]).is_err());
        assert!(FinitePmf::new(vec![0.0, f64::NAN], vec![0.5, 0.5]).is_err());
        assert!(FinitePmf::new(vec![0.0], vec![0.5, 0.5]).is_err());
    }

    #[test]
    fn symmetric_builder_orders_points() {
        let p = FinitePmf::symmetric(&[0.5, 1.0], &[0.2, 0.1], Some(0.4)).unwrap();
        assert_eq!(p.locations(), &[-1.0, -0.5, 0.0, 0.5, 1.0]);
        assert!(p.is_symmetric(0.0));
    }

    #[test]
    fn pruning_renormalizes() {
        let p = FinitePmf::new(
            vec![-1.0_f64, 0.0, 1.0],
            vec![0.5 - 5e-11, 1e-10, 0.5 - 5e-11],
        )
        .unwrap();
        let q = p.pruned(1e-9);
        assert_eq!(q.locations(), &[-1.0, 1.0]);
        assert!((q.probabilities()[0] - 0.5).abs() < 1e-15);
    }

    #[test]
    fn serde_rejects_invalid_pmf() {
        let bad = r#"{"locations":[1.0,0.0],"probabilities":[0.5,0.5]}"#;
        assert!(serde_json::from_str::<FinitePmf<f64>>(bad).is_err());
        let good = r#"{"locations":[0.0,1.0],"probabilities":[0.5,0.5]}"#;
        let p: FinitePmf<f64> = serde_json::from_str(good).unwrap();
        assert_eq!(p.cardinality(), 2);
    }
}
