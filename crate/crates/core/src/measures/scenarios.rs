use super::LabelMatrix;
use crate::error::{Error, Result};
use rand::seq::index;
use rand::{RngExt, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn require_undiffused(y: &LabelMatrix) -> Result<()> {
    if y.is_undiffused() {
        Ok(())
    } else {
        Err(Error::param("label scenarios apply to raw labels, not diffused measures"))
    }
}

/// Reassigns `round(fraction · m)` labeled nodes to a uniformly random wrong
/// class. A row's true class is its primary class; the corrupted row becomes
/// one-hot on the new class.
pub fn corrupt_labels(y: &LabelMatrix, fraction: f64, seed: u64) -> Result<LabelMatrix> {
    if !(0.0..=1.0).contains(&fraction) {
        return Err(Error::param(format!("corruption fraction must lie in [0, 1], got {fraction}")));
    }
    let k = y.class_count();
    if k < 2 {
        return Err(Error::param("corruption needs at least two classes"));
    }
    require_undiffused(y)?;
    let labeled = y.labeled();
    let count = (fraction * labeled.len() as f64).round() as usize;
    if count == 0 {
        return Ok(y.clone());
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut picked = index::sample(&mut rng, labeled.len(), count).into_vec();
    picked.sort_unstable();

    let mut rows: Vec<(usize, Vec<usize>)> = labeled.iter().map(|&v| (v, y.candidates(v))).collect();
    for idx in picked {
        let node = labeled[idx];
        let truth = y.primary_class(node);
        let mut wrong = rng.random_range(0..k - 1);
        if wrong >= truth {
            wrong += 1;
        }
        rows[idx].1 = vec![wrong];
    }
    LabelMatrix::from_candidates(y.node_count(), k, &rows)
}

/// Replaces each labeled row by a uniform distribution over a candidate set
/// of `set_size` classes: the true class plus distractors drawn from the same
/// superclass. `superclass_of[c]` is the superclass of class `c`.
pub fn partial_labels(y: &LabelMatrix, superclass_of: &[usize], set_size: usize, seed: u64) -> Result<LabelMatrix> {
    let k = y.class_count();
    Error::check_len(k, superclass_of.len())?;
    if set_size == 0 {
        return Err(Error::param("candidate set size must be at least 1"));
    }
    require_undiffused(y)?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut rows = Vec::with_capacity(y.labeled().len());
    for &node in y.labeled() {
        let truth = y.primary_class(node);
        let pool: Vec<usize> = (0..k).filter(|&c| c != truth && superclass_of[c] == superclass_of[truth]).collect();
        if set_size > pool.len() + 1 {
            return Err(Error::param(format!(
                "candidate set size {set_size} exceeds superclass {} of size {}",
                superclass_of[truth],
                pool.len() + 1
            )));
        }
        let mut cands = vec![truth];
        cands.extend(index::sample(&mut rng, pool.len(), set_size - 1).into_iter().map(|i| pool[i]));
        cands.sort_unstable();
        rows.push((node, cands));
    }
    LabelMatrix::from_candidates(y.node_count(), k, &rows)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn labels(m: usize, k: usize) -> LabelMatrix {
        let pairs: Vec<(usize, usize)> = (0..m).map(|i| (i, i % k)).collect();
        LabelMatrix::from_labels(m + 5, k, &pairs).unwrap()
    }

    fn changed_rows(a: &LabelMatrix, b: &LabelMatrix) -> usize {
        (0..a.node_count()).filter(|&v| a.row(v) != b.row(v)).count()
    }

    #[test]
    fn zero_fraction_is_identity() {
        let y = labels(10, 3);
        assert_eq!(corrupt_labels(&y, 0.0, 1).unwrap(), y);
    }

    #[test]
    fn full_corruption_flips_every_binary_label() {
        let y = labels(10, 2);
        let c = corrupt_labels(&y, 1.0, 9).unwrap();
        for &v in y.labeled() {
            assert_ne!(y.primary_class(v), c.primary_class(v));
        }
    }

    #[test]
    fn exact_count_and_determinism() {
        let y = labels(10, 4);
        let a = corrupt_labels(&y, 0.4, 42).unwrap();
        let b = corrupt_labels(&y, 0.4, 42).unwrap();
        assert_eq!(changed_rows(&y, &a), 4);
        assert_eq!(a, b);
        for &v in y.labeled() {
            assert_eq!(a.row(v).iter().sum::<f64>(), 1.0);
        }
    }

    #[test]
    fn corruption_errors() {
        assert!(corrupt_labels(&labels(4, 1), 0.5, 0).is_err());
        assert!(corrupt_labels(&labels(4, 2), 1.5, 0).is_err());
    }

    #[test]
    fn partial_set_size_one_is_identity() {
        let y = labels(8, 4);
        assert_eq!(partial_labels(&y, &[0, 0, 1, 1], 1, 3).unwrap(), y);
    }

    #[test]
    fn partial_full_superclass_is_uniform() {
        let y = labels(6, 6);
        let sup = [0, 0, 0, 1, 1, 1];
        let p = partial_labels(&y, &sup, 3, 3).unwrap();
        for &v in y.labeled() {
            let s = sup[y.primary_class(v)];
            for c in 0..6 {
                let expected = if sup[c] == s { 1.0 / 3.0 } else { 0.0 };
                assert!((p.row(v)[c] - expected).abs() < 1e-15);
            }
        }
    }

    #[test]
    fn partial_pairs_contain_truth() {
        let y = labels(12, 6);
        let sup = [0, 0, 0, 1, 1, 1];
        let p = partial_labels(&y, &sup, 2, 17).unwrap();
        for &v in y.labeled() {
            let row = p.row(v);
            let halves: Vec<usize> = (0..6).filter(|&c| row[c] == 0.5).collect();
            assert_eq!(halves.len(), 2);
            assert!(halves.contains(&y.primary_class(v)));
            assert_eq!(row.iter().filter(|&&x| x != 0.0).count(), 2);
        }
        assert_eq!(p, partial_labels(&y, &sup, 2, 17).unwrap());
    }

    #[test]
    fn partial_set_too_large() {
        let y = labels(4, 4);
        assert!(partial_labels(&y, &[0, 0, 1, 1], 3, 0).is_err());
        assert!(partial_labels(&y, &[0, 0, 1, 1], 0, 0).is_err());
        assert!(partial_labels(&y, &[0, 0, 1], 1, 0).is_err());
    }
}
