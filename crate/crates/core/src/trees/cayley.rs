use num_bigint::BigUint;
use num_traits::One;

use super::{enumerate_rooted_trees, TreeError};

fn factorial(n: usize) -> BigUint {
    (1..=n).fold(BigUint::one(), |acc, k| acc * BigUint::from(k))
}

/// Number of trees on {0..n} with vertex degrees `degrees[i] = d_i`:
/// (n-1)! / Π (d_i - 1)!.
pub fn cayley_degree_count(degrees: &[usize]) -> Result<BigUint, TreeError> {
    if degrees.is_empty() {
        return Err(TreeError::InvalidDegreeSequence("empty".into()));
    }
    let n = degrees.len() - 1;
    if n == 0 {
        return if degrees[0] == 0 {
            Ok(BigUint::one())
        } else {
            Err(TreeError::InvalidDegreeSequence("single vertex must have degree 0".into()))
        };
    }
    let sum: usize = degrees.iter().sum();
    if sum != 2 * n {
        return Err(TreeError::InvalidDegreeSequence(format!(
            "degrees sum to {sum}, expected {}",
            2 * n
        )));
    }
    if let Some(i) = degrees.iter().position(|&d| d == 0) {
        return Err(TreeError::InvalidDegreeSequence(format!("vertex {i} has degree 0")));
    }
    let denom = degrees
        .iter()
        .fold(BigUint::one(), |acc, &d| acc * factorial(d - 1));
    Ok(factorial(n - 1) / denom)
}

/// Brute-force count over all enumerated trees.
pub fn count_trees_with_degrees(degrees: &[usize]) -> Result<u64, TreeError> {
    let n = degrees.len().saturating_sub(1);
    let trees = enumerate_rooted_trees(n)?;
    Ok(trees
        .iter()
        .filter(|t| t.degrees().values().copied().eq(degrees.iter().copied()))
        .count() as u64)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn examples() {
        assert_eq!(cayley_degree_count(&[1, 2, 1]).unwrap(), BigUint::from(1u32));
        assert_eq!(cayley_degree_count(&[3, 1, 1, 1]).unwrap(), BigUint::from(1u32));
        assert_eq!(cayley_degree_count(&[2, 2, 1, 1]).unwrap(), BigUint::from(2u32));
        assert_eq!(count_trees_with_degrees(&[2, 2, 1, 1]).unwrap(), 2);
    }

    #[test]
    fn invalid_sequences() {
        assert!(matches!(
            cayley_degree_count(&[1, 1, 1]),
            Err(TreeError::InvalidDegreeSequence(_))
        ));
        assert!(matches!(
            cayley_degree_count(&[0, 2, 2]),
            Err(TreeError::InvalidDegreeSequence(_))
        ));
    }

    #[test]
    fn matches_brute_force_for_all_sequences() {
        for n in 1..=5usize {
            let trees = enumerate_rooted_trees(n).unwrap();
            let mut seen = std::collections::BTreeMap::new();
            for t in &trees {
                let d: Vec<usize> = t.degrees().values().copied().collect();
                *seen.entry(d).or_insert(0u64) += 1;
            }
            for (d, count) in seen {
                assert_eq!(cayley_degree_count(&d).unwrap(), BigUint::from(count));
            }
        }
    }
}
