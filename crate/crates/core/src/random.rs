//! Seeded random psd matrices and vectors.
//!
//! Every stream is a ChaCha8 generator keyed by `(seed, stream)`, so work
//! split across threads by stream index is reproducible.

use nalgebra::DMatrix;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use crate::linalg::PsdMatrix;

pub type StreamRng = ChaCha8Rng;

pub fn rng_for(seed: u64, stream: u64) -> StreamRng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    rng
}

pub fn gaussian_matrix<R: Rng + ?Sized>(rng: &mut R, rows: usize, cols: usize) -> DMatrix<f64> {
    DMatrix::from_fn(rows, cols, |_, _| rng.sample::<f64, _>(StandardNormal))
}

/// `G G^T` for an `m x rank` standard Gaussian `G`.
pub fn random_psd<R: Rng + ?Sized>(rng: &mut R, m: usize, rank: usize) -> PsdMatrix {
    let g = gaussian_matrix(rng, m, rank);
    PsdMatrix::from_psd_unchecked(&g * g.transpose())
}

/// Full-rank psd matrix with a random rank between 1 and `m`.
pub fn random_psd_any_rank<R: Rng + ?Sized>(rng: &mut R, m: usize) -> PsdMatrix {
    let rank = rng.random_range(1..=m);
    random_psd(rng, m, rank)
}

pub fn random_unit_vector<R: Rng + ?Sized>(rng: &mut R, m: usize) -> Vec<f64> {
    loop {
        let v: Vec<f64> = (0..m).map(|_| rng.sample::<f64, _>(StandardNormal)).collect();
        let norm = v.iter().map(|x| x * x).sum::<f64>().sqrt();
        if norm > 1e-12 {
            return v.into_iter().map(|x| x / norm).collect();
        }
    }
}

/// Random symmetric (not necessarily psd) matrix.
pub fn random_symmetric<R: Rng + ?Sized>(rng: &mut R, m: usize) -> DMatrix<f64> {
    let g = gaussian_matrix(rng, m, m);
    (&g + g.transpose()) * 0.5
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::{is_psd, Tolerance};

    #[test]
    fn streams_are_reproducible_and_distinct() {
        let a = gaussian_matrix(&mut rng_for(7, 3), 3, 3);
        let b = gaussian_matrix(&mut rng_for(7, 3), 3, 3);
        let c = gaussian_matrix(&mut rng_for(7, 4), 3, 3);
        assert_eq!(a, b);
        assert_ne!(a, c);
    }

    #[test]
    fn random_psd_is_psd() {
        let mut rng = rng_for(0, 0);
        for m in 1..6 {
            let p = random_psd_any_rank(&mut rng, m);
            assert!(is_psd(p.as_matrix(), &Tolerance::default()).unwrap());
        }
    }
}
