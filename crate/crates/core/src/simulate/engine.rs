use std::f64::consts::PI;

use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::Point2;

/// Disk-shaped observation window.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SimWindow {
    pub center: Point2,
    pub radius: f64,
}

impl SimWindow {
    pub fn disk(center: Point2, radius: f64) -> Result<Self> {
        if !(radius > 0.0 && radius.is_finite()) || !center.is_finite() {
            return Err(Error::invalid(format!("window radius must be > 0, got {radius}")));
        }
        Ok(Self { center, radius })
    }

    /// Disk of radius `30/√λ_a` around the origin.
    pub fn default_for(lambda_a: f64) -> Self {
        Self {
            center: Point2::ORIGIN,
            radius: 30.0 / lambda_a.sqrt(),
        }
    }

    pub fn area(&self) -> f64 {
        PI * self.radius * self.radius
    }

    pub fn contains(&self, p: Point2) -> bool {
        p.dist_sq(self.center) <= self.radius * self.radius
    }

    pub fn scaled(&self, factor: f64) -> Self {
        Self {
            center: self.center,
            radius: self.radius * factor,
        }
    }

    pub fn sample_point<R: Rng + ?Sized>(&self, rng: &mut R) -> Point2 {
        let r = self.radius * rng.random::<f64>().sqrt();
        let t = 2.0 * PI * rng.random::<f64>();
        self.center + Point2::polar(r, t)
    }
}

/// Master seed plus trial count. Trial `i` draws from ChaCha8 stream `i`
/// of the master seed, so any subset of trials can run in any order.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct TrialPlan {
    pub master_seed: u64,
    pub trials: usize,
}

impl TrialPlan {
    pub fn new(master_seed: u64, trials: usize) -> Self {
        Self { master_seed, trials }
    }

    pub fn rng(&self, trial: u64) -> ChaCha8Rng {
        let mut rng = ChaCha8Rng::seed_from_u64(self.master_seed);
        rng.set_stream(trial);
        rng
    }

    fn require(&self, min: usize) -> Result<()> {
        if self.trials < min {
            return Err(Error::invalid(format!("need at least {min} trials, got {}", self.trials)));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EstimateWithError {
    pub mean: f64,
    /// Sample standard deviation over `√trials`.
    pub stderr: f64,
    pub trials: usize,
}

impl EstimateWithError {
    /// `|mean - reference|` in units of the standard error.
    pub fn z_score(&self, reference: f64) -> f64 {
        let d = self.mean - reference;
        if self.stderr == 0.0 {
            if d == 0.0 {
                0.0
            } else {
                f64::INFINITY
            }
        } else {
            d.abs() / self.stderr
        }
    }
}

/// Streaming mean and variance with the pairwise merge of Chan et al.
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct MeanAccumulator {
    n: u64,
    mean: f64,
    m2: f64,
}

impl MeanAccumulator {
    pub fn push(&mut self, x: f64) {
        self.n += 1;
        let d = x - self.mean;
        self.mean += d / self.n as f64;
        self.m2 += d * (x - self.mean);
    }

    pub fn merge(&mut self, other: &MeanAccumulator) {
        if other.n == 0 {
            return;
        }
        if self.n == 0 {
            *self = *other;
            return;
        }
        let n = self.n + other.n;
        let d = other.mean - self.mean;
        let (na, nb) = (self.n as f64, other.n as f64);
        self.mean += d * nb / n as f64;
        self.m2 += other.m2 + d * d * na * nb / n as f64;
        self.n = n;
    }

    pub fn count(&self) -> u64 {
        self.n
    }

    pub fn estimate(&self) -> Result<EstimateWithError> {
        if self.n < 2 {
            return Err(Error::invalid("an estimate needs at least 2 samples"));
        }
        let n = self.n as f64;
        let var = (self.m2 / (n - 1.0)).max(0.0);
        Ok(EstimateWithError {
            mean: self.mean,
            stderr: (var / n).sqrt(),
            trials: self.n as usize,
        })
    }
}

const BATCH: usize = 64;

/// Runs `plan.trials` trials, each writing `width` outputs, and returns the
/// per-output estimates. Batches run in parallel and are merged in index
/// order, so the result does not depend on the thread count.
pub fn run_trials<F>(plan: &TrialPlan, width: usize, trial: F) -> Result<Vec<EstimateWithError>>
where
    F: Fn(&mut ChaCha8Rng, &mut [f64]) -> Result<()> + Sync,
{
    plan.require(2)?;
    let batches = plan.trials.div_ceil(BATCH);
    let partial: Vec<Result<Vec<MeanAccumulator>>> = (0..batches)
        .into_par_iter()
        .map(|b| {
            let mut acc = vec![MeanAccumulator::default(); width];
            let mut out = vec![0.0; width];
            for t in b * BATCH..((b + 1) * BATCH).min(plan.trials) {
                let mut rng = plan.rng(t as u64);
                out.iter_mut().for_each(|v| *v = 0.0);
                trial(&mut rng, &mut out)?;
                for (a, v) in acc.iter_mut().zip(&out) {
                    a.push(*v);
                }
            }
            Ok(acc)
        })
        .collect();
    let mut total = vec![MeanAccumulator::default(); width];
    for batch in partial {
        for (t, a) in total.iter_mut().zip(batch?) {
            t.merge(&a);
        }
    }
    total.iter().map(MeanAccumulator::estimate).collect()
}

pub(crate) fn require_trials(plan: &TrialPlan, min: usize) -> Result<()> {
    plan.require(min)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::{prop_assert, proptest};
    use rand::Rng;

    #[test]
    fn window_points_stay_inside_and_fill_uniformly() {
        let w = SimWindow::disk(Point2::new(1.0, -2.0), 3.0).unwrap();
        let mut rng = TrialPlan::new(1, 1).rng(0);
        let mut inner = 0usize;
        let n = 200_000;
        for _ in 0..n {
            let p = w.sample_point(&mut rng);
            assert!(w.contains(p));
            if p.dist(w.center) < 1.5 {
                inner += 1;
            }
        }
        // quarter of the area lies within half the radius
        let frac = inner as f64 / n as f64;
        let se = (0.25 * 0.75 / n as f64).sqrt();
        assert!((frac - 0.25).abs() < 4.0 * se, "{frac}");
    }

    #[test]
    fn streams_are_reproducible_and_distinct() {
        let plan = TrialPlan::new(42, 10);
        let a: f64 = plan.rng(3).random();
        let b: f64 = plan.rng(3).random();
        let c: f64 = plan.rng(4).random();
        assert_eq!(a.to_bits(), b.to_bits());
        assert_ne!(a, c);
    }

    #[test]
    fn run_trials_is_thread_count_invariant() {
        let plan = TrialPlan::new(7, 1000);
        let f = |rng: &mut ChaCha8Rng, out: &mut [f64]| {
            out[0] = rng.random::<f64>();
            out[1] = out[0] * out[0];
            Ok(())
        };
        let one = rayon::ThreadPoolBuilder::new().num_threads(1).build().unwrap();
        let four = rayon::ThreadPoolBuilder::new().num_threads(4).build().unwrap();
        let a = one.install(|| run_trials(&plan, 2, f)).unwrap();
        let b = four.install(|| run_trials(&plan, 2, f)).unwrap();
        for (x, y) in a.iter().zip(&b) {
            assert_eq!(x.mean.to_bits(), y.mean.to_bits());
            assert_eq!(x.stderr.to_bits(), y.stderr.to_bits());
        }
        assert!((a[0].mean - 0.5).abs() < 4.0 * a[0].stderr);
        assert!((a[1].mean - 1.0 / 3.0).abs() < 4.0 * a[1].stderr);
    }

    #[test]
    fn estimates_need_two_samples() {
        let mut acc = MeanAccumulator::default();
        acc.push(1.0);
        assert!(acc.estimate().is_err());
        assert!(run_trials(&TrialPlan::new(0, 1), 1, |_, _| Ok(())).is_err());
    }

    proptest! {
        #[test]
        fn merge_matches_sequential(xs in proptest::collection::vec(-1e3f64..1e3, 2..60), cut in 0usize..60) {
            let cut = cut.min(xs.len());
            let mut whole = MeanAccumulator::default();
            xs.iter().for_each(|&x| whole.push(x));
            let (mut a, mut b) = (MeanAccumulator::default(), MeanAccumulator::default());
            xs[..cut].iter().for_each(|&x| a.push(x));
            xs[cut..].iter().for_each(|&x| b.push(x));
            a.merge(&b);
            let (w, m) = (whole.estimate().unwrap(), a.estimate().unwrap());
            prop_assert!((w.mean - m.mean).abs() <= 1e-9 * (1.0 + w.mean.abs()));
            prop_assert!((w.stderr - m.stderr).abs() <= 1e-8 * (1.0 + w.stderr));
            let mean = xs.iter().sum::<f64>() / xs.len() as f64;
            let var = xs.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (xs.len() - 1) as f64;
            prop_assert!((w.stderr - (var / xs.len() as f64).sqrt()).abs() <= 1e-8 * (1.0 + w.stderr));
        }
    }
}
