use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Strictly increasing sample indices of detected fiducials.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(try_from = "Vec<usize>", into = "Vec<usize>")]
pub struct PeakList(Vec<usize>);

impl PeakList {
    pub fn new(indices: Vec<usize>) -> Result<Self> {
        if let Some(w) = indices.windows(2).find(|w| w[1] <= w[0]) {
            return Err(Error::NonIncreasing(w[0], w[1]));
        }
        Ok(Self(indices))
    }

    /// Sorts and drops duplicates.
    pub fn from_unsorted(mut indices: Vec<usize>) -> Self {
        indices.sort_unstable();
        indices.dedup();
        Self(indices)
    }

    pub fn as_slice(&self) -> &[usize] {
        &self.0
    }

    pub fn into_vec(self) -> Vec<usize> {
        self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = usize> + '_ {
        self.0.iter().copied()
    }

    /// Consecutive differences `p[i+1] - p[i]`.
    pub fn intervals(&self) -> Vec<usize> {
        self.0.windows(2).map(|w| w[1] - w[0]).collect()
    }
}

impl TryFrom<Vec<usize>> for PeakList {
    type Error = Error;

    fn try_from(v: Vec<usize>) -> Result<Self> {
        Self::new(v)
    }
}

impl From<PeakList> for Vec<usize> {
    fn from(p: PeakList) -> Self {
        p.0
    }
}

impl std::ops::Deref for PeakList {
    type Target = [usize];

    fn deref(&self) -> &[usize] {
        &self.0
    }
}

/// Median of a non-empty slice (mean of the two middle values for even length).
pub(crate) fn median(values: &[f64]) -> f64 {
    let mut v = values.to_vec();
    v.sort_by(f64::total_cmp);
    let n = v.len();
    if n % 2 == 1 {
        v[n / 2]
    } else {
        0.5 * (v[n / 2 - 1] + v[n / 2])
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rejects_non_increasing() {
        assert!(PeakList::new(vec![1, 2, 2]).is_err());
        assert!(PeakList::new(vec![3, 1]).is_err());
        assert_eq!(
            PeakList::new(vec![1, 5, 9]).unwrap().intervals(),
            vec![4, 4]
        );
    }

    #[test]
    fn median_even_odd() {
        assert_eq!(median(&[3.0, 1.0, 2.0]), 2.0);
        assert_eq!(median(&[150.0, 850.0, 1000.0]), 850.0);
        assert_eq!(median(&[1000.0, 500.0, 500.0, 1000.0]), 750.0);
    }
}
