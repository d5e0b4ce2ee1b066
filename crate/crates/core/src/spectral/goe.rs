use faer::Mat;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

use crate::error::{Error, Result};

/// Draws a `d × d` matrix from the Gaussian orthogonal ensemble:
/// off-diagonal entries `N(0, 1)`, diagonal entries `N(0, 2)`.
///
/// The upper triangle is filled row by row from a ChaCha8 stream, so a
/// given seed always produces the same matrix.
pub fn sample_goe(d: usize, seed: u64) -> Result<Mat<f64>> {
    if d < 2 {
        return Err(Error::Argument(format!("GOE dimension {d} must be >= 2")));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut m = Mat::<f64>::zeros(d, d);
    let sqrt2 = std::f64::consts::SQRT_2;
    for i in 0..d {
        for j in i..d {
            let x: f64 = StandardNormal.sample(&mut rng);
            if i == j {
                m[(i, i)] = sqrt2 * x;
            } else {
                m[(i, j)] = x;
                m[(j, i)] = x;
            }
        }
    }
    Ok(m)
}
