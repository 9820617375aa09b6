//! Partition combinatorics: enumeration, shifted partitions, dimensions of
//! the irreducible `S_n` representations and Bethe level counts.

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::{Error, Result};

/// A partition of `n`, stored with optional zero padding.
///
/// Two partitions compare equal when their nonzero parts agree, so `(2, 1)`
/// and `(2, 1, 0)` are the same partition viewed with a different number of
/// rows.
#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(try_from = "Vec<usize>", into = "Vec<usize>")]
pub struct Partition {
    parts: Vec<usize>,
}

impl Partition {
    /// Builds a partition from weakly decreasing parts. Trailing zeros are
    /// kept as padding.
    pub fn new(parts: Vec<usize>) -> Result<Self> {
        if parts.windows(2).any(|w| w[0] < w[1]) {
            return Err(Error::InvalidPartition(format!(
                "parts {parts:?} are not weakly decreasing"
            )));
        }
        if parts.iter().all(|&p| p == 0) {
            return Err(Error::InvalidPartition("partition of zero".into()));
        }
        Ok(Self { parts })
    }

    /// Parses a comma separated list such as `"2,1,1"`.
    pub fn parse(text: &str) -> Result<Self> {
        let parts = text
            .split(',')
            .map(|s| s.trim())
            .filter(|s| !s.is_empty())
            .map(|s| {
                s.parse::<usize>()
                    .map_err(|_| Error::InvalidPartition(format!("bad part {s:?}")))
            })
            .collect::<Result<Vec<_>>>()?;
        Self::new(parts)
    }

    /// The weight `|λ|`.
    pub fn weight(&self) -> usize {
        self.parts.iter().sum()
    }

    /// Number of nonzero parts.
    pub fn length(&self) -> usize {
        self.parts.iter().take_while(|&&p| p > 0).count()
    }

    /// Nonzero parts.
    pub fn nonzero_parts(&self) -> &[usize] {
        &self.parts[..self.length()]
    }

    /// The stored parts, including padding.
    pub fn parts(&self) -> &[usize] {
        &self.parts
    }

    /// Part `i` (zero based), zero beyond the stored length.
    pub fn part(&self, i: usize) -> usize {
        self.parts.get(i).copied().unwrap_or(0)
    }

    /// The parts padded (or trimmed of zeros) to exactly `len` entries.
    pub fn padded(&self, len: usize) -> Result<Vec<usize>> {
        if self.length() > len {
            return Err(Error::TooManyParts {
                parts: self.length(),
                max: len,
            });
        }
        Ok((0..len).map(|i| self.part(i)).collect())
    }

    /// Shifted partition `λ̃_i = λ_i + n − i`, with `λ` padded to `n = |λ|`
    /// rows.
    pub fn shifted(&self) -> ShiftedPartition {
        let n = self.weight();
        ShiftedPartition {
            entries: (0..n).map(|i| self.part(i) + n - 1 - i).collect(),
        }
    }

    /// Dimension `d_λ` of the irreducible `S_n` representation, by the
    /// hook-length formula in exact integer arithmetic.
    ///
    /// Exact for weights up to 34 (the factorial must fit in `u128`).
    pub fn irrep_dimension(&self) -> u64 {
        let n = self.weight();
        let parts = self.nonzero_parts();
        let mut hooks: u128 = 1;
        for (row, &len) in parts.iter().enumerate() {
            for col in 0..len {
                let arm = len - col - 1;
                let leg = parts[row + 1..].iter().filter(|&&p| p > col).count();
                hooks *= (arm + leg + 1) as u128;
            }
        }
        let factorial = (1..=n as u128).try_fold(1u128, |acc, k| acc.checked_mul(k));
        let factorial = factorial.expect("partition weight too large for exact hook-length count");
        u64::try_from(factorial / hooks).expect("dimension exceeds u64")
    }

    /// Bethe level counts `l_a = Σ_{b>a} λ_b`, `a = 1..N−1`.
    pub fn bethe_levels(&self, rows: usize) -> Result<BetheLevels> {
        if rows == 0 {
            return Err(Error::InvalidInput("number of rows must be positive".into()));
        }
        let padded = self.padded(rows)?;
        let levels: Vec<usize> = (1..rows).map(|a| padded[a..].iter().sum()).collect();
        let total = levels.iter().sum();
        Ok(BetheLevels { levels, total })
    }
}

impl PartialEq for Partition {
    fn eq(&self, other: &Self) -> bool {
        self.nonzero_parts() == other.nonzero_parts()
    }
}

impl Eq for Partition {}

impl std::hash::Hash for Partition {
    fn hash<H: std::hash::Hasher>(&self, state: &mut H) {
        self.nonzero_parts().hash(state);
    }
}

impl TryFrom<Vec<usize>> for Partition {
    type Error = Error;

    fn try_from(parts: Vec<usize>) -> Result<Self> {
        Self::new(parts)
    }
}

impl From<Partition> for Vec<usize> {
    fn from(p: Partition) -> Self {
        p.nonzero_parts().to_vec()
    }
}

impl fmt::Display for Partition {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<String> = self.nonzero_parts().iter().map(|p| p.to_string()).collect();
        write!(f, "({})", parts.join(","))
    }
}

/// `λ̃_i = λ_i + n − i`, strictly decreasing and nonnegative.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ShiftedPartition {
    pub entries: Vec<usize>,
}

impl ShiftedPartition {
    pub fn contains(&self, value: usize) -> bool {
        self.entries.contains(&value)
    }

    /// `Π_{i<j} (λ̃_j − λ̃_i)`, the constant in front of the Wronskian.
    pub fn vandermonde(&self) -> f64 {
        let e = &self.entries;
        let mut prod = 1.0;
        for i in 0..e.len() {
            for j in i + 1..e.len() {
                prod *= e[j] as f64 - e[i] as f64;
            }
        }
        prod
    }
}

/// Number of Bethe variables on each level.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct BetheLevels {
    /// `l_1, …, l_{N−1}`.
    pub levels: Vec<usize>,
    /// `l = l_1 + … + l_{N−1}`.
    pub total: usize,
}

/// All partitions of `n` with at most `max_parts` nonzero parts, in
/// reverse-lexicographic order.
pub fn enumerate_partitions(n: usize, max_parts: usize) -> Vec<Partition> {
    fn go(remaining: usize, cap: usize, slots: usize, prefix: &mut Vec<usize>, out: &mut Vec<Partition>) {
        if remaining == 0 {
            out.push(Partition { parts: prefix.clone() });
            return;
        }
        if slots == 0 {
            return;
        }
        for part in (1..=cap.min(remaining)).rev() {
            prefix.push(part);
            go(remaining - part, part, slots - 1, prefix, out);
            prefix.pop();
        }
    }

    let mut out = Vec::new();
    if n > 0 && max_parts > 0 {
        go(n, n, max_parts, &mut Vec::new(), &mut out);
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    fn p(parts: &[usize]) -> Partition {
        Partition::new(parts.to_vec()).unwrap()
    }

    /// Counts standard Young tableaux by placing 1..n one cell at a time.
    fn count_syt(shape: &[usize]) -> u64 {
        fn place(filled: &mut Vec<usize>, shape: &[usize], left: usize) -> u64 {
            if left == 0 {
                return 1;
            }
            let mut total = 0;
            for row in 0..shape.len() {
                let can_extend = filled[row] < shape[row] && (row == 0 || filled[row - 1] > filled[row]);
                if can_extend {
                    filled[row] += 1;
                    total += place(filled, shape, left - 1);
                    filled[row] -= 1;
                }
            }
            total
        }
        let n = shape.iter().sum();
        place(&mut vec![0; shape.len()], shape, n)
    }

    #[test]
    fn enumerates_small_cases() {
        assert_eq!(enumerate_partitions(3, 3), vec![p(&[3]), p(&[2, 1]), p(&[1, 1, 1])]);
        assert_eq!(enumerate_partitions(4, 2), vec![p(&[4]), p(&[3, 1]), p(&[2, 2])]);
        assert_eq!(enumerate_partitions(1, 5), vec![p(&[1])]);
        assert_eq!(enumerate_partitions(6, 6).len(), 11);
    }

    #[test]
    fn shifted_examples() {
        assert_eq!(p(&[2, 0]).shifted().entries, vec![3, 0]);
        assert_eq!(p(&[2, 1]).shifted().entries, vec![4, 2, 0]);
        assert_eq!(p(&[1, 1]).shifted().entries, vec![2, 1]);
    }

    #[test]
    fn dimensions_match_tableau_count() {
        assert_eq!(p(&[4]).irrep_dimension(), 1);
        assert_eq!(p(&[2, 1]).irrep_dimension(), 2);
        assert_eq!(p(&[3, 1]).irrep_dimension(), 3);
        for n in 1..=8 {
            for lam in enumerate_partitions(n, n) {
                assert_eq!(lam.irrep_dimension(), count_syt(lam.nonzero_parts()), "{lam}");
            }
        }
    }

    #[test]
    fn squares_of_dimensions_sum_to_factorial() {
        let mut factorial = 1u64;
        for n in 1..=8u64 {
            factorial *= n;
            let sum: u64 = enumerate_partitions(n as usize, n as usize)
                .iter()
                .map(|l| l.irrep_dimension().pow(2))
                .sum();
            assert_eq!(sum, factorial);
        }
    }

    #[test]
    fn bethe_level_examples() {
        let l = p(&[1, 1]).bethe_levels(2).unwrap();
        assert_eq!((l.levels, l.total), (vec![1], 1));
        let l = p(&[2, 1]).bethe_levels(3).unwrap();
        assert_eq!((l.levels, l.total), (vec![1, 0], 1));
        let l = p(&[1, 1, 1]).bethe_levels(3).unwrap();
        assert_eq!((l.levels, l.total), (vec![2, 1], 3));
        assert!(matches!(
            p(&[1, 1, 1]).bethe_levels(2),
            Err(Error::TooManyParts { parts: 3, max: 2 })
        ));
    }

    #[test]
    fn extra_row_adds_a_zero_level() {
        for lam in enumerate_partitions(6, 6) {
            let rows = lam.length();
            let a = lam.bethe_levels(rows).unwrap();
            let b = lam.bethe_levels(rows + 1).unwrap();
            assert_eq!(&b.levels[..a.levels.len()], &a.levels[..]);
            assert_eq!(*b.levels.last().unwrap(), 0);
            assert_eq!(a.total, b.total);
        }
    }

    #[test]
    fn padding_is_inert() {
        assert_eq!(p(&[2, 1, 0, 0]), p(&[2, 1]));
        assert_ne!(p(&[2, 1]), p(&[1, 1, 1]));
        assert_eq!(serde_json::to_string(&p(&[2, 1, 0])).unwrap(), "[2,1]");
        let back: Partition = serde_json::from_str("[3,1]").unwrap();
        assert_eq!(back, p(&[3, 1]));
        assert!(serde_json::from_str::<Partition>("[1,2]").is_err());
    }

    #[test]
    fn rejects_increasing_parts() {
        assert!(Partition::new(vec![1, 2]).is_err());
        assert!(Partition::parse("2,x").is_err());
        assert_eq!(Partition::parse("3, 1").unwrap(), p(&[3, 1]));
    }

    proptest::proptest! {
        #[test]
        fn shifted_is_strictly_decreasing(n in 1usize..9, pick in 0usize..100) {
            let all = enumerate_partitions(n, n);
            let lam = &all[pick % all.len()];
            let s = lam.shifted().entries;
            proptest::prop_assert_eq!(s.len(), n);
            proptest::prop_assert!(s.windows(2).all(|w| w[0] > w[1]));
        }
    }
}
