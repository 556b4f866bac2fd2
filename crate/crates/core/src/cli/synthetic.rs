//! Synthetic Gaussian-blob datasets for smoke tests and demos.

use crate::error::{Error, Result};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};

/// `counts[c]` points around center `separation · e_c` in `dim ≥ k`
/// dimensions with isotropic standard deviation `spread`. Returns features
/// and class labels, grouped by class.
pub fn gaussian_blobs(counts: &[usize], dim: usize, separation: f64, spread: f64, seed: u64) -> Result<(Vec<Vec<f64>>, Vec<usize>)> {
    if dim < counts.len() {
        return Err(Error::param(format!("need dim ≥ {} classes, got {dim}", counts.len())));
    }
    let noise = Normal::new(0.0, spread).map_err(|e| Error::param(e.to_string()))?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut features = Vec::new();
    let mut labels = Vec::new();
    for (c, &count) in counts.iter().enumerate() {
        for _ in 0..count {
            let mut x: Vec<f64> = (0..dim).map(|_| noise.sample(&mut rng)).collect();
            x[c] += separation;
            features.push(x);
            labels.push(c);
        }
    }
    Ok((features, labels))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn shapes_and_determinism() {
        let (x, y) = gaussian_blobs(&[3, 2], 4, 5.0, 0.1, 9).unwrap();
        assert_eq!((x.len(), x[0].len()), (5, 4));
        assert_eq!(y, vec![0, 0, 0, 1, 1]);
        assert_eq!(gaussian_blobs(&[3, 2], 4, 5.0, 0.1, 9).unwrap().0, x);
        assert!(x[0][0] > 4.0 && x[4][1] > 4.0);
        assert!(gaussian_blobs(&[1, 1, 1], 2, 1.0, 0.1, 0).is_err());
    }
}
