//! Shared fixtures for the criterion benches.

use plsaddle::nalgebra::DVector;
use plsaddle::problem::{make_experiment_6d, SaddleProblem};
use plsaddle::sample_uniform;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// The experiment problem with a reproducible start in the radius-5 box.
pub fn experiment_start(seed: u64) -> (SaddleProblem, DVector<f64>, DVector<f64>) {
    let p = make_experiment_6d();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let x0 = sample_uniform(p.dim_x(), 5.0, &mut rng);
    let y0 = sample_uniform(p.dim_y(), 5.0, &mut rng);
    (p, x0, y0)
}
