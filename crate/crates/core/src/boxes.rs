//! Bipartite boxes with binary inputs `x, y` and binary outputs `a, b`.
//!
//! The `S^p` family is
//!
//! ```text
//! P(a, b | x, y) = [a ⊕ b = x·y] · (p if a = 0 else 1 - p),   1/2 ≤ p ≤ 1
//! ```
//!
//! so the outputs always satisfy `a ⊕ b = x·y` and Alice's output is biased
//! towards 0 with weight `p`. `p = 1` is the deterministic one-cbit box,
//! `p = 1/2` the PR box, and every member is the mixture
//! `(2p - 1)·S¹ᶜᵇⁱᵗ + 2(1 - p)·PR`.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::rng::Stream;
use crate::Bit;

/// Row normalization tolerance for [`BoxTable`].
pub const NORMALIZATION_TOL: f64 = 1e-12;

/// Bias weight of the `a = 0` branch of an `S^p` box, `1/2 ≤ p ≤ 1`.
#[derive(Clone, Copy, Debug, PartialEq, PartialOrd, Serialize)]
#[serde(transparent)]
pub struct SpParameter(f64);

impl SpParameter {
    pub const PR_BOX: SpParameter = SpParameter(0.5);
    pub const ONE_CBIT: SpParameter = SpParameter(1.0);

    pub fn new(p: f64) -> Result<Self> {
        // NaN fails both comparisons.
        if (0.5..=1.0).contains(&p) {
            Ok(Self(p))
        } else {
            Err(Error::domain("p", p, "[1/2, 1]"))
        }
    }

    #[inline]
    pub fn value(self) -> f64 {
        self.0
    }
}

impl TryFrom<f64> for SpParameter {
    type Error = Error;

    fn try_from(p: f64) -> Result<Self> {
        Self::new(p)
    }
}

/// Exact conditional distribution `P(a, b | x, y)` over binary inputs and outputs.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct BoxTable {
    probs: [f64; 16],
}

#[inline]
fn index(x: Bit, y: Bit, a: Bit, b: Bit) -> usize {
    debug_assert!(x <= 1 && y <= 1 && a <= 1 && b <= 1);
    ((x as usize) << 3) | ((y as usize) << 2) | ((a as usize) << 1) | b as usize
}

const BITS: [Bit; 2] = [0, 1];

impl BoxTable {
    /// Builds a table from a closure `f(x, y, a, b)`, checking every invariant.
    pub fn from_fn(mut f: impl FnMut(Bit, Bit, Bit, Bit) -> f64) -> Result<Self> {
        let mut probs = [0.0; 16];
        for x in BITS {
            for y in BITS {
                for a in BITS {
                    for b in BITS {
                        probs[index(x, y, a, b)] = f(x, y, a, b);
                    }
                }
            }
        }
        Self::new(probs)
    }

    /// `probs` is indexed by `x·8 + y·4 + a·2 + b`.
    pub fn new(probs: [f64; 16]) -> Result<Self> {
        if let Some(&bad) = probs.iter().find(|v| !(0.0..=1.0).contains(*v)) {
            return Err(Error::domain("box entry", bad, "[0, 1]"));
        }
        for row in probs.chunks_exact(4) {
            let total: f64 = row.iter().sum();
            if (total - 1.0).abs() > NORMALIZATION_TOL {
                return Err(Error::domain("box row sum", total, "1 ± 1e-12"));
            }
        }
        Ok(Self { probs })
    }

    /// Deterministic box with `a = 0` and `b = x·y`.
    pub fn one_cbit() -> Self {
        Self::from_fn(|x, y, a, b| if a == 0 && b == x & y { 1.0 } else { 0.0 })
            .expect("one-cbit table is valid")
    }

    /// PR box: `a ⊕ b = x·y` with uniform marginals.
    pub fn pr_box() -> Self {
        Self::from_fn(|x, y, a, b| if a ^ b == x & y { 0.5 } else { 0.0 })
            .expect("PR table is valid")
    }

    /// Every entry 1/4.
    pub fn white_noise() -> Self {
        Self { probs: [0.25; 16] }
    }

    /// Convex combination `Σ wᵢ·tableᵢ`. Weights must be nonnegative and sum to 1.
    pub fn mixture(parts: &[(f64, &BoxTable)]) -> Result<Self> {
        if parts.iter().any(|(w, _)| w.is_nan() || *w < 0.0) {
            return Err(Error::Distribution("negative mixture weight".into()));
        }
        let mut probs = [0.0; 16];
        for (w, t) in parts {
            for (acc, v) in probs.iter_mut().zip(t.probs.iter()) {
                *acc += w * v;
            }
        }
        Self::new(probs)
    }

    #[inline]
    pub fn get(&self, x: Bit, y: Bit, a: Bit, b: Bit) -> f64 {
        self.probs[index(x, y, a, b)]
    }

    pub fn entries(&self) -> &[f64; 16] {
        &self.probs
    }

    /// Bob's marginal `P(b | x, y)`.
    pub fn bob_marginal(&self, x: Bit, y: Bit, b: Bit) -> f64 {
        self.get(x, y, 0, b) + self.get(x, y, 1, b)
    }

    /// Alice's marginal `P(a | x, y)`.
    pub fn alice_marginal(&self, x: Bit, y: Bit, a: Bit) -> f64 {
        self.get(x, y, a, 0) + self.get(x, y, a, 1)
    }

    /// Largest entrywise difference to another table.
    pub fn max_abs_diff(&self, other: &BoxTable) -> f64 {
        self.probs
            .iter()
            .zip(other.probs.iter())
            .map(|(u, v)| (u - v).abs())
            .fold(0.0, f64::max)
    }

    /// How far each party's marginal moves with the other party's input.
    pub fn signaling_deviation(&self) -> SignalingDeviation {
        let mut alice_to_bob: f64 = 0.0;
        let mut bob_to_alice: f64 = 0.0;
        for v in BITS {
            for input in BITS {
                alice_to_bob = alice_to_bob
                    .max((self.bob_marginal(0, input, v) - self.bob_marginal(1, input, v)).abs());
                bob_to_alice = bob_to_alice.max(
                    (self.alice_marginal(input, 0, v) - self.alice_marginal(input, 1, v)).abs(),
                );
            }
        }
        SignalingDeviation {
            alice_to_bob,
            bob_to_alice,
        }
    }

    /// Correlator `E(x, y) = P(a = b | x, y) - P(a ≠ b | x, y)`.
    pub fn correlator(&self, x: Bit, y: Bit) -> f64 {
        self.get(x, y, 0, 0) + self.get(x, y, 1, 1) - self.get(x, y, 0, 1) - self.get(x, y, 1, 0)
    }

    /// `E(0,0) + E(0,1) + E(1,0) - E(1,1)`.
    pub fn chsh_value(&self) -> f64 {
        self.correlator(0, 0) + self.correlator(0, 1) + self.correlator(1, 0)
            - self.correlator(1, 1)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct SignalingDeviation {
    pub alice_to_bob: f64,
    pub bob_to_alice: f64,
}

/// Coefficients of `S^p = w_cbit·S¹ᶜᵇⁱᵗ + w_pr·PR`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct Decomposition {
    pub weight_cbit: f64,
    pub weight_pr: f64,
}

impl Decomposition {
    pub fn reconstruct(&self) -> BoxTable {
        BoxTable::mixture(&[
            (self.weight_cbit, &BoxTable::one_cbit()),
            (self.weight_pr, &BoxTable::pr_box()),
        ])
        .expect("decomposition weights form a convex combination")
    }
}

pub fn sp_box_probability(p: SpParameter, x: Bit, y: Bit, a: Bit, b: Bit) -> f64 {
    let delta_ab = a ^ b ^ 1;
    let support = ((x & y) ^ delta_ab) as f64;
    let bias = ((a ^ 1) as f64) * p.value() + (a as f64) * (1.0 - p.value());
    support * bias
}

pub fn sp_box_table(p: SpParameter) -> BoxTable {
    BoxTable::from_fn(|x, y, a, b| sp_box_probability(p, x, y, a, b))
        .expect("S^p rows are normalized for p in [1/2, 1]")
}

pub fn decompose(p: SpParameter) -> Decomposition {
    Decomposition {
        weight_cbit: 2.0 * p.value() - 1.0,
        weight_pr: 2.0 * (1.0 - p.value()),
    }
}

/// Draws `(a, b)` from `S^p` for inputs `(x, y)`. Consumes exactly one variate.
#[inline]
pub fn sample_sp_box(p: SpParameter, x: Bit, y: Bit, rng: &mut Stream) -> (Bit, Bit) {
    let u = rng.uniform();
    let a: Bit = if u < p.value() { 0 } else { 1 };
    (a, a ^ (x & y))
}
