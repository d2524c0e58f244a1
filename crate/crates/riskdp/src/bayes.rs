//! Dirichlet beliefs over transition kernels.
//!
//! Each `(s, a)` row carries an independent Dirichlet distribution; observing
//! transition counts adds them to the parameters. Rows are sampled through
//! gamma variates (shape `alpha`, rate 1, normalized), drawn from a dedicated
//! RNG substream per `(s, a)` so sampling order never matters.

use rand::Rng;
use rand_distr::{Distribution, Gamma};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::mdp::{sample_index, TransitionCounts, TransitionKernel};
use crate::risk::{beta_eval, OuterRiskSpec};
use crate::rng::stream;

/// Per-(s, a) Dirichlet parameter table `alpha(s' | s, a)`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DirichletPosterior {
    n_states: usize,
    n_actions: usize,
    alpha: Vec<f64>,
}

/// Floor applied to zero prior entries so parameters stay strictly positive.
pub const PRIOR_FLOOR: f64 = 1e-6;

impl DirichletPosterior {
    /// The complete-ignorance prior `alpha(s'|s,a) = 1/|S|` everywhere.
    pub fn uniform_prior(n_states: usize, n_actions: usize) -> Self {
        Self {
            n_states,
            n_actions,
            alpha: vec![1.0 / n_states as f64; n_states * n_actions * n_states],
        }
    }

    /// An informative prior proportional to a given pmf table, scaled by
    /// `mass`. Zero pmf entries are floored at [`PRIOR_FLOOR`].
    pub fn informative_prior(pmf_per_sa: &TransitionKernel, mass: f64) -> Result<Self> {
        if !mass.is_finite() || mass <= 0.0 {
            return Err(Error::DimensionMismatch {
                context: format!("prior mass must be positive, got {mass}"),
            });
        }
        let n_states = pmf_per_sa.n_states();
        let n_actions = pmf_per_sa.n_actions();
        let mut alpha = Vec::with_capacity(n_states * n_actions * n_states);
        for s in 0..n_states {
            for a in 0..n_actions {
                for &p in pmf_per_sa.row(s, a) {
                    alpha.push((mass * p).max(PRIOR_FLOOR));
                }
            }
        }
        Ok(Self {
            n_states,
            n_actions,
            alpha,
        })
    }

    /// Builds a posterior from a raw parameter table; every entry must be
    /// strictly positive.
    pub fn from_alpha(n_states: usize, n_actions: usize, alpha: Vec<f64>) -> Result<Self> {
        if alpha.len() != n_states * n_actions * n_states {
            return Err(Error::DimensionMismatch {
                context: format!(
                    "alpha table has {} entries, expected {}",
                    alpha.len(),
                    n_states * n_actions * n_states
                ),
            });
        }
        if let Some(bad) = alpha.iter().find(|a| !(**a > 0.0 && a.is_finite())) {
            return Err(Error::DimensionMismatch {
                context: format!("Dirichlet parameters must be positive and finite, got {bad}"),
            });
        }
        Ok(Self {
            n_states,
            n_actions,
            alpha,
        })
    }

    pub fn n_states(&self) -> usize {
        self.n_states
    }

    pub fn n_actions(&self) -> usize {
        self.n_actions
    }

    pub fn row(&self, s: usize, a: usize) -> &[f64] {
        let base = (s * self.n_actions + a) * self.n_states;
        &self.alpha[base..base + self.n_states]
    }

    /// Total parameter mass of one row.
    pub fn row_mass(&self, s: usize, a: usize) -> f64 {
        self.row(s, a).iter().sum()
    }

    /// `min_{s,a} sum_{s'} alpha(s'|s,a)`, the confidence constant.
    pub fn min_row_mass(&self) -> f64 {
        (0..self.n_states)
            .flat_map(|s| (0..self.n_actions).map(move |a| (s, a)))
            .map(|(s, a)| self.row_mass(s, a))
            .fold(f64::INFINITY, f64::min)
    }

    /// `max_{s,a} sum_{s'} alpha(s'|s,a)`.
    pub fn max_row_mass(&self) -> f64 {
        (0..self.n_states)
            .flat_map(|s| (0..self.n_actions).map(move |a| (s, a)))
            .map(|(s, a)| self.row_mass(s, a))
            .fold(0.0, f64::max)
    }

    /// Conjugate update: `alpha' = alpha + counts`, elementwise. The input is
    /// left unmodified.
    pub fn posterior_update(&self, counts: &TransitionCounts) -> Self {
        assert_eq!(counts.n_states(), self.n_states, "state count mismatch");
        assert_eq!(counts.n_actions(), self.n_actions, "action count mismatch");
        let mut next = self.clone();
        for s in 0..self.n_states {
            for a in 0..self.n_actions {
                let base = (s * self.n_actions + a) * self.n_states;
                for (i, &c) in counts.row(s, a).iter().enumerate() {
                    next.alpha[base + i] += c as f64;
                }
            }
        }
        next
    }

    /// Posterior mean kernel: row `(s,a)` is `alpha(.|s,a) / sum alpha`.
    pub fn posterior_mean(&self) -> TransitionKernel {
        let mut probs = Vec::with_capacity(self.alpha.len());
        for s in 0..self.n_states {
            for a in 0..self.n_actions {
                let row = self.row(s, a);
                let mass: f64 = row.iter().sum();
                probs.extend(row.iter().map(|x| x / mass));
            }
        }
        TransitionKernel::new(self.n_states, self.n_actions, probs)
            .expect("posterior mean rows are stochastic")
    }

    /// Draws one row of the kernel into `out` from the Dirichlet at `(s, a)`.
    pub(crate) fn sample_row_into(&self, s: usize, a: usize, rng: &mut impl Rng, out: &mut [f64]) {
        let row = self.row(s, a);
        let mut sum = 0.0;
        for (o, &shape) in out.iter_mut().zip(row) {
            let g = Gamma::new(shape, 1.0).expect("positive shape").sample(rng);
            *o = g;
            sum += g;
        }
        if sum > 0.0 && sum.is_finite() {
            out.iter_mut().for_each(|x| *x /= sum);
        } else {
            // All gamma draws underflowed (possible when every shape is
            // tiny); the limiting law is a categorical corner pick with
            // weights proportional to alpha.
            let mass: f64 = row.iter().sum();
            let weights: Vec<f64> = row.iter().map(|x| x / mass).collect();
            let ix = sample_index(&weights, rng);
            out.iter_mut().for_each(|x| *x = 0.0);
            out[ix] = 1.0;
        }
    }

    /// Draws `n` i.i.d. kernels. Every output row passes kernel validation;
    /// bit-identical for a given seed regardless of evaluation order.
    pub fn sample_kernels(&self, n: usize, seed: u64) -> Vec<TransitionKernel> {
        let template =
            TransitionKernel::new_unchecked(self.n_states, self.n_actions, vec![
                0.0;
                self.n_states * self.n_actions * self.n_states
            ])
            .expect("sized table");
        let mut kernels = vec![template; n];
        for s in 0..self.n_states {
            for a in 0..self.n_actions {
                let mut rng = stream(seed, "dirichlet", &[s as u64, a as u64]);
                for kernel in kernels.iter_mut() {
                    self.sample_row_into(s, a, &mut rng, kernel.row_mut(s, a));
                }
            }
        }
        kernels
    }
}

/// A frozen set of `n` posterior kernel draws, stored per `(s, a)` block for
/// reuse across every value-iteration sweep within a stage.
///
/// Draws are bit-identical to [`DirichletPosterior::sample_kernels`] with the
/// same seed: `set.row(s, a, i) == kernels[i].row(s, a)`.
#[derive(Clone, Debug)]
pub struct KernelSampleSet {
    n: usize,
    n_states: usize,
    n_actions: usize,
    /// Layout: `[(s, a) block][draw i][s']`.
    data: Vec<f64>,
}

impl KernelSampleSet {
    pub fn draw(post: &DirichletPosterior, n: usize, seed: u64) -> Self {
        let (ns, na) = (post.n_states(), post.n_actions());
        let mut data = vec![0.0; ns * na * n * ns];
        for s in 0..ns {
            for a in 0..na {
                let mut rng = stream(seed, "dirichlet", &[s as u64, a as u64]);
                let block = (s * na + a) * n * ns;
                for i in 0..n {
                    let out = &mut data[block + i * ns..block + (i + 1) * ns];
                    post.sample_row_into(s, a, &mut rng, out);
                }
            }
        }
        Self {
            n,
            n_states: ns,
            n_actions: na,
            data,
        }
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn n_states(&self) -> usize {
        self.n_states
    }

    pub fn n_actions(&self) -> usize {
        self.n_actions
    }

    /// The `i`-th sampled row at `(s, a)`.
    pub fn row(&self, s: usize, a: usize, i: usize) -> &[f64] {
        let block = (s * self.n_actions + a) * self.n * self.n_states;
        &self.data[block + i * self.n_states..block + (i + 1) * self.n_states]
    }
}

/// Outer-risk values of the posterior's L1 deviation from a reference
/// kernel, per `(s, a)`, estimated by Monte Carlo.
#[derive(Clone, Debug, Serialize)]
pub struct PosteriorAccuracy {
    n_states: usize,
    n_actions: usize,
    /// `beta( sum_{s'} |p(s'|s,a) - ref(s'|s,a)| )` per `(s, a)`.
    pub per_sa: Vec<f64>,
    /// Maximum entry of `per_sa`.
    pub max_value: f64,
    /// Monte Carlo sample count used per row.
    pub mc_samples: usize,
}

impl PosteriorAccuracy {
    pub fn get(&self, s: usize, a: usize) -> f64 {
        self.per_sa[s * self.n_actions + a]
    }
}

/// Monte Carlo estimate of the accuracy functional: per `(s, a)`, sample `n`
/// rows, take the L1 distance to the reference row, and apply the outer risk
/// measure to the sample.
pub fn posterior_l1_accuracy(
    post: &DirichletPosterior,
    reference: &TransitionKernel,
    outer: &OuterRiskSpec,
    n: usize,
    seed: u64,
) -> Result<PosteriorAccuracy> {
    assert!(n >= 2, "accuracy estimate needs at least two samples");
    let (ns, na) = (post.n_states(), post.n_actions());
    let mut per_sa = Vec::with_capacity(ns * na);
    let mut row_buf = vec![0.0; ns];
    let mut deviations = vec![0.0; n];
    for s in 0..ns {
        for a in 0..na {
            let mut rng = stream(seed, "accuracy", &[s as u64, a as u64]);
            let reference_row = reference.row(s, a);
            for d in deviations.iter_mut() {
                post.sample_row_into(s, a, &mut rng, &mut row_buf);
                *d = row_buf
                    .iter()
                    .zip(reference_row)
                    .map(|(p, q)| (p - q).abs())
                    .sum();
            }
            per_sa.push(beta_eval(outer, &deviations)?);
        }
    }
    let max_value = per_sa.iter().cloned().fold(0.0, f64::max);
    Ok(PosteriorAccuracy {
        n_states: ns,
        n_actions: na,
        per_sa,
        max_value,
        mc_samples: n,
    })
}
