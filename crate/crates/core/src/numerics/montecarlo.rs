//! Seeded, counter-addressed random streams and order-independent merging of
//! Monte-Carlo batches.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha12Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

/// One reproducible stream: the same `(seed, stream)` pair always yields the
/// same sequence, independently of how many other streams were drawn.
pub struct SampleStream {
    rng: ChaCha12Rng,
}

impl SampleStream {
    pub fn new(seed: u64, stream: u64) -> Self {
        let mut rng = ChaCha12Rng::seed_from_u64(seed);
        rng.set_stream(stream);
        SampleStream { rng }
    }

    pub fn uniform(&mut self) -> f64 {
        self.rng.random::<f64>()
    }

    pub fn normal(&mut self) -> f64 {
        StandardNormal.sample(&mut self.rng)
    }

    pub fn index(&mut self, len: usize) -> usize {
        self.rng.random_range(0..len)
    }

    /// Uniform point on the unit sphere `S^{dim-1}`, written into `out`.
    pub fn unit_vector(&mut self, out: &mut [f64]) {
        loop {
            let mut s = 0.0;
            for v in out.iter_mut() {
                *v = self.normal();
                s += *v * *v;
            }
            if s > 1e-300 {
                let inv = 1.0 / crate::math::Real::sqrt(s);
                out.iter_mut().for_each(|v| *v *= inv);
                return;
            }
        }
    }
}

/// Mean with standard error.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MonteCarloEstimate {
    pub value: f64,
    pub stderr: f64,
    pub samples: u64,
}

/// Running mean / second moment (Welford), mergeable with Chan's formula.
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct Moments {
    pub count: u64,
    pub mean: f64,
    pub m2: f64,
}

impl Moments {
    pub fn push(&mut self, x: f64) {
        self.count += 1;
        let d = x - self.mean;
        self.mean += d / self.count as f64;
        self.m2 += d * (x - self.mean);
    }

    pub fn merge(&mut self, other: &Moments) {
        if other.count == 0 {
            return;
        }
        if self.count == 0 {
            *self = *other;
            return;
        }
        let n = (self.count + other.count) as f64;
        let d = other.mean - self.mean;
        let (na, nb) = (self.count as f64, other.count as f64);
        self.mean += d * nb / n;
        self.m2 += other.m2 + d * d * na * nb / n;
        self.count += other.count;
    }

    pub fn estimate(&self) -> MonteCarloEstimate {
        let var = if self.count > 1 {
            self.m2 / (self.count - 1) as f64
        } else {
            f64::INFINITY
        };
        MonteCarloEstimate {
            value: self.mean,
            stderr: crate::math::Real::sqrt(var / self.count.max(1) as f64),
            samples: self.count,
        }
    }
}

/// Batched estimator of `E[sample(stream)]`. Batch `k` always draws from
/// stream `k`, and batches are merged in index order, so the result depends
/// only on the seed and the stopping rule.
pub fn mean_until<F: FnMut(&mut SampleStream) -> f64>(
    mut sample: F,
    seed: u64,
    batch: usize,
    rel_target: f64,
    abs_target: f64,
    max_samples: u64,
) -> MonteCarloEstimate {
    let mut total = Moments::default();
    let mut k = 0u64;
    loop {
        let mut stream = SampleStream::new(seed, k);
        let mut m = Moments::default();
        for _ in 0..batch {
            m.push(sample(&mut stream));
        }
        total.merge(&m);
        k += 1;
        let est = total.estimate();
        let done = est.stderr <= (rel_target * est.value.abs()).max(abs_target);
        if (done && k >= 4) || total.count >= max_samples {
            return est;
        }
    }
}
