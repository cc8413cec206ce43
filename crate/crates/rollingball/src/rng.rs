//! Counter-based deterministic random streams.
//!
//! Every stochastic estimator in the crate derives the randomness of sample
//! `i` purely from `(seed, i)`, so a sample's value does not depend on how
//! samples are partitioned across workers. The generator is SplitMix64 used
//! as a hash of the counter, which is statistically adequate for Monte Carlo
//! at the scales used here.

/// One SplitMix64 scramble step.
#[inline]
fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9e3779b97f4a7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58476d1ce4e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d049bb133111eb);
    z ^ (z >> 31)
}

/// Stream of f64 values attached to one `(seed, counter)` pair.
#[derive(Debug, Clone)]
pub struct SampleStream {
    state: u64,
}

impl SampleStream {
    /// Stream for sample `index` of the estimator identified by `seed`.
    pub fn new(seed: u64, index: u64) -> Self {
        // Two scramble rounds decorrelate (seed, index) lattices.
        let state = splitmix64(splitmix64(seed ^ 0x6a09e667f3bcc909).wrapping_add(index));
        SampleStream { state }
    }

    pub fn next_u64(&mut self) -> u64 {
        self.state = splitmix64(self.state);
        self.state
    }

    /// Uniform in [0, 1).
    pub fn next_f64(&mut self) -> f64 {
        (self.next_u64() >> 11) as f64 * (1.0 / (1u64 << 53) as f64)
    }

    /// Uniform in [lo, hi).
    pub fn next_range(&mut self, lo: f64, hi: f64) -> f64 {
        lo + (hi - lo) * self.next_f64()
    }

    /// Standard normal via Box-Muller.
    pub fn next_gaussian(&mut self) -> f64 {
        let u1 = self.next_f64().max(1e-18);
        let u2 = self.next_f64();
        (-2.0 * u1.ln()).sqrt() * (2.0 * std::f64::consts::PI * u2).cos()
    }

    /// Uniform direction on the unit sphere of R^n.
    pub fn next_unit_vector(&mut self, n: usize) -> crate::geometry::Vector {
        loop {
            let v: Vec<f64> = (0..n).map(|_| self.next_gaussian()).collect();
            let nrm = v.iter().map(|x| x * x).sum::<f64>().sqrt();
            if nrm > 1e-9 {
                return crate::geometry::Vector(v.into_iter().map(|x| x / nrm).collect());
            }
        }
    }
}

/// Sequential convenience stream for tests and non-estimator randomness.
#[derive(Debug, Clone)]
pub struct SeqRng {
    counter: u64,
    seed: u64,
}

impl SeqRng {
    pub fn new(seed: u64) -> Self {
        SeqRng { counter: 0, seed }
    }

    pub fn next_f64(&mut self) -> f64 {
        self.counter += 1;
        SampleStream::new(self.seed, self.counter).next_f64()
    }

    pub fn next_range(&mut self, lo: f64, hi: f64) -> f64 {
        lo + (hi - lo) * self.next_f64()
    }

    pub fn next_gaussian(&mut self) -> f64 {
        self.counter += 1;
        SampleStream::new(self.seed, self.counter).next_gaussian()
    }

    pub fn next_unit_vector(&mut self, n: usize) -> crate::geometry::Vector {
        self.counter += 1;
        SampleStream::new(self.seed, self.counter).next_unit_vector(n)
    }
}
