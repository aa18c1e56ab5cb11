//! Top-down simulation of the field by binomial thinning.
//!
//! The generator is ChaCha8 (`rand_chacha`) seeded with `seed_from_u64`.
//! Poisson and binomial variates use sequential inversion of one uniform
//! each, so a seed reproduces the same draws on every platform.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::model::MpmrfModel;

/// Streaming sampler; each call to [`Sampler::draw`] fills one vector `N`.
pub struct Sampler<'a> {
    model: &'a MpmrfModel,
    order: Vec<usize>,
    parent: Vec<Option<(usize, f64)>>,
    rng: ChaCha8Rng,
}

impl<'a> Sampler<'a> {
    pub fn new(model: &'a MpmrfModel, root: usize, seed: u64) -> Result<Self> {
        let rooted = model.tree().root_at(root)?;
        let parent = (1..=model.d())
            .map(|v| rooted.parent(v).map(|p| (p, model.alpha(p, v).expect("tree edge"))))
            .collect();
        Ok(Sampler {
            model,
            order: rooted.preorder().to_vec(),
            parent,
            rng: ChaCha8Rng::seed_from_u64(seed),
        })
    }

    /// Writes one draw into `out[v - 1]`.
    pub fn draw(&mut self, out: &mut [u64]) {
        let lambda = self.model.lambda();
        for &v in &self.order {
            out[v - 1] = match self.parent[v - 1] {
                None => poisson(&mut self.rng, lambda),
                Some((p, a)) => {
                    let inherited = binomial(&mut self.rng, out[p - 1], a);
                    poisson(&mut self.rng, lambda * (1.0 - a)) + inherited
                }
            };
        }
    }
}

impl MpmrfModel {
    /// `n` draws of `N`, each a vector indexed by `v - 1`.
    pub fn sample(&self, root: usize, seed: u64, n: usize) -> Result<Vec<Vec<u64>>> {
        if n == 0 {
            return Err(Error::Parameter("n must be at least 1".into()));
        }
        let mut sampler = Sampler::new(self, root, seed)?;
        Ok((0..n)
            .map(|_| {
                let mut row = vec![0; self.d()];
                sampler.draw(&mut row);
                row
            })
            .collect())
    }

    pub fn sampler(&self, root: usize, seed: u64) -> Result<Sampler<'_>> {
        Sampler::new(self, root, seed)
    }
}

fn poisson(rng: &mut ChaCha8Rng, mean: f64) -> u64 {
    if mean <= 0.0 {
        return 0;
    }
    let u: f64 = rng.gen();
    let mut p = (-mean).exp();
    let mut cdf = p;
    let mut k = 0u64;
    while u > cdf && p > 0.0 {
        k += 1;
        p *= mean / k as f64;
        cdf += p;
    }
    k
}

fn binomial(rng: &mut ChaCha8Rng, n: u64, prob: f64) -> u64 {
    if n == 0 || prob <= 0.0 {
        return 0;
    }
    if prob >= 1.0 {
        return n;
    }
    if prob > 0.5 {
        return n - binomial(rng, n, 1.0 - prob);
    }
    if n > 1000 {
        return (0..n).filter(|_| rng.gen::<f64>() < prob).count() as u64;
    }
    let u: f64 = rng.gen();
    let ratio = prob / (1.0 - prob);
    let mut p = (1.0 - prob).powi(n as i32);
    let mut cdf = p;
    let mut k = 0u64;
    while u > cdf && k < n {
        p *= ratio * (n - k) as f64 / (k + 1) as f64;
        k += 1;
        cdf += p;
    }
    k
}
