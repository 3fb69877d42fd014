//! Seeded Monte Carlo estimation of the simulated singlet correlation.
//!
//! Each experiment cell owns one random stream, and round `k` of the cell
//! starts at variate `k·ROUND_VARIATES` of that stream. Work is split into
//! fixed-size chunks that seek directly to their first round and reduce by
//! integer sums, so results do not depend on the number of worker threads.

use rayon::prelude::*;
use serde::Serialize;

use crate::boxes::{sample_sp_box, SpParameter};
use crate::error::{Error, Result};
use crate::info::entropy2;
use crate::protocol::{
    alice_input, bob_input, run_round_with, sample_hidden_pair, sample_unit_vector, sign_bit,
    Fault, RoundTranscript, UnitVector, ROUND_VARIATES,
};
use crate::rng::{domain, Stream};
use crate::Bit;

/// Rounds per parallel work item.
pub const CHUNK_ROUNDS: u64 = 1 << 16;

/// Per-cell acceptance bound on |z|.
pub const CELL_Z_LIMIT: f64 = 4.0;
/// Cells with |z| above this count against [`EXCESS_FRACTION_BUDGET`].
pub const EXCESS_Z: f64 = 3.0;
pub const EXCESS_FRACTION_BUDGET: f64 = 0.02;
/// Bound on |z| of the difference between two p values at one angle.
pub const PAIRWISE_Z_LIMIT: f64 = 4.0;

/// `(1 + A·B) / 2`, the singlet value of `E[v(A) ⊕ v(B)]`.
pub fn singlet_target(a_setting: &UnitVector, b_setting: &UnitVector) -> f64 {
    0.5 * (1.0 + a_setting.dot_unit(b_setting))
}

/// `(mean - target) / std_error`, with a zero error treated as exact.
fn z_score(mean: f64, target: f64, std_error: f64) -> f64 {
    let diff = mean - target;
    if std_error > 0.0 {
        diff / std_error
    } else if diff == 0.0 {
        0.0
    } else {
        diff.signum() * f64::INFINITY
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct CorrelationEstimate {
    /// Fraction of rounds with `v(A) ⊕ v(B) = 1`.
    pub mean: f64,
    pub std_error: f64,
    pub n_rounds: u64,
    pub target: f64,
}

impl CorrelationEstimate {
    fn from_count(ones: u64, n: u64, target: f64) -> Self {
        let mean = ones as f64 / n as f64;
        Self {
            mean,
            std_error: (mean * (1.0 - mean) / n as f64).sqrt(),
            n_rounds: n,
            target,
        }
    }

    pub fn z_score(&self) -> f64 {
        z_score(self.mean, self.target, self.std_error)
    }
}

/// How measurement settings are laid out for a given angle between them.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, clap::ValueEnum, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Geometry {
    /// `A = ẑ`, `B` rotated towards `x̂` in the x-z plane.
    #[default]
    Plane,
    /// `A` uniform on the sphere, `B` in a uniformly oriented plane through `A`.
    RandomFrame,
}

impl Geometry {
    /// Settings for `angle` radians, drawn from the geometry stream of `cell` when random.
    pub fn settings(self, angle: f64, seed: u64, cell: u64) -> (UnitVector, UnitVector) {
        match self {
            Geometry::Plane => (UnitVector::Z, UnitVector::from_angles(angle, 0.0)),
            Geometry::RandomFrame => {
                let mut rng = Stream::new(seed, domain::stream(domain::GEOMETRY, cell));
                let a = sample_unit_vector(&mut rng);
                let perp = loop {
                    let w = sample_unit_vector(&mut rng).components();
                    let along = a.dot(&w);
                    let c = a.components();
                    let r = [
                        w[0] - along * c[0],
                        w[1] - along * c[1],
                        w[2] - along * c[2],
                    ];
                    // reject draws too close to ±A to normalize accurately
                    if r.iter().map(|v| v * v).sum::<f64>() > 1e-2 {
                        break UnitVector::normalized(r[0], r[1], r[2])
                            .expect("projection is nonzero");
                    }
                };
                let (s, c) = angle.sin_cos();
                let (av, pv) = (a.components(), perp.components());
                let b = UnitVector::normalized(
                    c * av[0] + s * pv[0],
                    c * av[1] + s * pv[1],
                    c * av[2] + s * pv[2],
                )
                .expect("combination of orthonormal vectors is nonzero");
                (a, b)
            }
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SweepRow {
    pub p: f64,
    pub angle_rad: f64,
    pub estimate: CorrelationEstimate,
    pub z: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SweepResult {
    pub rows: Vec<SweepRow>,
}

impl SweepResult {
    pub fn max_abs_z(&self) -> f64 {
        self.rows.iter().map(|r| r.z.abs()).fold(0.0, f64::max)
    }

    pub fn excess_fraction(&self) -> f64 {
        let excess = self
            .rows
            .iter()
            .filter(|r| r.z.is_nan() || r.z.abs() > EXCESS_Z)
            .count();
        excess as f64 / self.rows.len().max(1) as f64
    }

    /// Largest |z| of the difference between any two p values at a common angle.
    pub fn max_pairwise_z(&self) -> f64 {
        let mut worst: f64 = 0.0;
        for (i, r) in self.rows.iter().enumerate() {
            for s in &self.rows[i + 1..] {
                if s.angle_rad != r.angle_rad || s.p == r.p {
                    continue;
                }
                let (e, f) = (&r.estimate, &s.estimate);
                let se = (e.std_error.powi(2) + f.std_error.powi(2)).sqrt();
                worst = worst.max(z_score(e.mean, f.mean, se).abs());
            }
        }
        worst
    }

    /// Every cell within [`CELL_Z_LIMIT`] and at most
    /// [`EXCESS_FRACTION_BUDGET`] of the cells beyond [`EXCESS_Z`].
    pub fn accepted(&self) -> bool {
        self.max_abs_z() <= CELL_Z_LIMIT && self.excess_fraction() <= EXCESS_FRACTION_BUDGET
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct SweepConfig {
    pub p_values: Vec<SpParameter>,
    pub angles: Vec<f64>,
    pub n_per_cell: u64,
    pub seed: u64,
    pub geometry: Geometry,
    pub fault: Option<Fault>,
}

impl SweepConfig {
    pub fn new(p_values: Vec<SpParameter>, angles: Vec<f64>, n_per_cell: u64, seed: u64) -> Self {
        Self {
            p_values,
            angles,
            n_per_cell,
            seed,
            geometry: Geometry::Plane,
            fault: None,
        }
    }

    /// Cells in p-major order: `(cell index, p, angle)`.
    pub fn cells(&self) -> Vec<(u64, SpParameter, f64)> {
        let mut out = Vec::with_capacity(self.p_values.len() * self.angles.len());
        for &p in &self.p_values {
            for &angle in &self.angles {
                out.push((out.len() as u64, p, angle));
            }
        }
        out
    }
}

/// Per-round identity audit.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct IdentityCheck {
    pub p: f64,
    pub rounds: u64,
    pub box_law_violations: u64,
    pub parity_violations: u64,
}

impl IdentityCheck {
    pub fn holds(&self) -> bool {
        self.box_law_violations == 0 && self.parity_violations == 0
    }
}

/// Variates per identity-audit round: two random settings, then a protocol round.
const IDENTITY_ROUND_VARIATES: u64 = 2 * crate::protocol::VECTOR_VARIATES + ROUND_VARIATES;

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct BiasRow {
    pub index: u64,
    pub x: Bit,
    pub y: Bit,
    /// Rounds with `v(A) = sgn(A·λ₁)`.
    pub matches: u64,
    pub n: u64,
    pub frequency: f64,
    pub deviation: f64,
    pub z: f64,
    pub empirical_entropy: f64,
    pub expected_entropy: f64,
    /// Largest `|H(q) - H(p)|` for `q` within 4σ of `p`.
    pub entropy_tolerance: f64,
}

impl BiasRow {
    pub fn passed(&self) -> bool {
        self.z.abs() <= CELL_Z_LIMIT
            && (self.empirical_entropy - self.expected_entropy).abs() <= self.entropy_tolerance
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct BiasReport {
    pub p: f64,
    pub rows: Vec<BiasRow>,
}

impl BiasReport {
    pub fn passed(&self) -> bool {
        self.rows.iter().all(BiasRow::passed)
    }

    pub fn max_abs_z(&self) -> f64 {
        self.rows.iter().map(|r| r.z.abs()).fold(0.0, f64::max)
    }
}

/// `max |H(q) - H(p)|` over `q ∈ [p - w, p + w] ∩ [0, 1]`.
fn entropy_band(p: f64, w: f64) -> f64 {
    let (lo, hi) = ((p - w).max(0.0), (p + w).min(1.0));
    let hp = entropy2(p);
    let mut worst = (entropy2(lo) - hp).abs().max((entropy2(hi) - hp).abs());
    if lo <= 0.5 && 0.5 <= hi {
        worst = worst.max(1.0 - hp);
    }
    worst
}

/// Parallel executor with a fixed worker count.
pub struct MonteCarlo {
    pool: rayon::ThreadPool,
}

impl MonteCarlo {
    pub fn new(workers: usize) -> Result<Self> {
        let pool = rayon::ThreadPoolBuilder::new()
            .num_threads(workers.max(1))
            .build()
            .map_err(|e| Error::Io(std::io::Error::other(e)))?;
        Ok(Self { pool })
    }

    pub fn workers(&self) -> usize {
        self.pool.current_num_threads()
    }

    fn require_rounds(n: u64) -> Result<()> {
        if n == 0 {
            return Err(Error::domain("rounds", 0.0, "n ≥ 1"));
        }
        Ok(())
    }

    /// Counts rounds with odd outcome parity in one stream. Must run inside the pool.
    fn count_parity(
        p: SpParameter,
        a: &UnitVector,
        b: &UnitVector,
        n: u64,
        seed: u64,
        stream: u64,
        fault: Option<Fault>,
    ) -> u64 {
        let chunks = n.div_ceil(CHUNK_ROUNDS);
        (0..chunks)
            .into_par_iter()
            .map(|c| {
                let start = c * CHUNK_ROUNDS;
                let end = n.min(start + CHUNK_ROUNDS);
                let mut rng = Stream::at_variate(seed, stream, start * ROUND_VARIATES);
                (start..end)
                    .map(|_| run_round_with(p, a, b, &mut rng, fault).parity() as u64)
                    .sum::<u64>()
            })
            .sum()
    }

    /// `n` protocol rounds at fixed settings.
    pub fn estimate_correlation(
        &self,
        p: SpParameter,
        a_setting: &UnitVector,
        b_setting: &UnitVector,
        n: u64,
        seed: u64,
    ) -> Result<CorrelationEstimate> {
        self.estimate_correlation_with(p, a_setting, b_setting, n, seed, None)
    }

    pub fn estimate_correlation_with(
        &self,
        p: SpParameter,
        a_setting: &UnitVector,
        b_setting: &UnitVector,
        n: u64,
        seed: u64,
        fault: Option<Fault>,
    ) -> Result<CorrelationEstimate> {
        Self::require_rounds(n)?;
        let stream = domain::stream(domain::CORRELATION, 0);
        let ones = self
            .pool
            .install(|| Self::count_parity(p, a_setting, b_setting, n, seed, stream, fault));
        Ok(CorrelationEstimate::from_count(
            ones,
            n,
            singlet_target(a_setting, b_setting),
        ))
    }

    /// One estimate per `(p, angle)` cell.
    pub fn sweep(&self, config: &SweepConfig) -> Result<SweepResult> {
        if config.p_values.is_empty() || config.angles.is_empty() {
            return Err(Error::Grid {
                spec: format!(
                    "{} p values × {} angles",
                    config.p_values.len(),
                    config.angles.len()
                ),
                message: "sweep grids must be nonempty".into(),
            });
        }
        Self::require_rounds(config.n_per_cell)?;
        let cells = config.cells();
        let rows = self.pool.install(|| {
            cells
                .par_iter()
                .map(|&(cell, p, angle)| {
                    let (a, b) = config.geometry.settings(angle, config.seed, cell);
                    let stream = domain::stream(domain::CORRELATION, cell + 1);
                    let ones = Self::count_parity(
                        p,
                        &a,
                        &b,
                        config.n_per_cell,
                        config.seed,
                        stream,
                        config.fault,
                    );
                    // exact target from the nominal angle, not the rounded settings
                    let target = 0.5 * (1.0 + angle.cos());
                    let estimate = CorrelationEstimate::from_count(ones, config.n_per_cell, target);
                    SweepRow {
                        p: p.value(),
                        angle_rad: angle,
                        z: estimate.z_score(),
                        estimate,
                    }
                })
                .collect()
        });
        Ok(SweepResult { rows })
    }

    /// Replays the first `count` rounds of a sweep cell, for audit dumps.
    pub fn cell_transcripts(
        &self,
        config: &SweepConfig,
        cell: u64,
        count: u64,
    ) -> Vec<RoundTranscript> {
        let Some(&(_, p, angle)) = config.cells().get(cell as usize) else {
            return Vec::new();
        };
        let (a, b) = config.geometry.settings(angle, config.seed, cell);
        let mut rng = Stream::new(config.seed, domain::stream(domain::CORRELATION, cell + 1));
        (0..count.min(config.n_per_cell))
            .map(|_| run_round_with(p, &a, &b, &mut rng, config.fault))
            .collect()
    }

    /// Runs `n` rounds with fresh random settings each round and checks the
    /// box law and the outcome-parity identity on every transcript.
    pub fn check_round_identities(
        &self,
        p: SpParameter,
        n: u64,
        seed: u64,
        fault: Option<Fault>,
    ) -> Result<IdentityCheck> {
        Self::require_rounds(n)?;
        let stream = domain::stream(domain::IDENTITY, 0);
        let chunks = n.div_ceil(CHUNK_ROUNDS);
        let (box_law_violations, parity_violations) = self.pool.install(|| {
            (0..chunks)
                .into_par_iter()
                .map(|c| {
                    let start = c * CHUNK_ROUNDS;
                    let end = n.min(start + CHUNK_ROUNDS);
                    let mut rng = Stream::at_variate(seed, stream, start * IDENTITY_ROUND_VARIATES);
                    let mut bad = (0u64, 0u64);
                    for _ in start..end {
                        let a = sample_unit_vector(&mut rng);
                        let b = sample_unit_vector(&mut rng);
                        let t = run_round_with(p, &a, &b, &mut rng, fault);
                        bad.0 += !t.box_law_holds() as u64;
                        bad.1 += !t.parity_identity_holds() as u64;
                    }
                    bad
                })
                .reduce(|| (0, 0), |x, y| (x.0 + y.0, x.1 + y.1))
        });
        Ok(IdentityCheck {
            p: p.value(),
            rounds: n,
            box_law_violations,
            parity_violations,
        })
    }

    /// For each of `n_lambda` fixed hidden pairs (with random settings),
    /// repeats the box draw `n_rounds_per_lambda` times and measures how often
    /// Alice's outcome equals `sgn(A·λ₁)`, which should happen with probability `p`.
    pub fn conditional_bias_test(
        &self,
        p: SpParameter,
        n_lambda: u64,
        n_rounds_per_lambda: u64,
        seed: u64,
    ) -> Result<BiasReport> {
        Self::require_rounds(n_lambda)?;
        Self::require_rounds(n_rounds_per_lambda)?;
        let n = n_rounds_per_lambda;
        let sigma = (p.value() * (1.0 - p.value()) / n as f64).sqrt();
        let rows = self.pool.install(|| {
            (0..n_lambda)
                .into_par_iter()
                .map(|i| {
                    let mut setup = Stream::new(seed, domain::stream(domain::BIAS_SETUP, i));
                    let hidden = sample_hidden_pair(&mut setup);
                    let a_setting = sample_unit_vector(&mut setup);
                    let b_setting = sample_unit_vector(&mut setup);
                    let x = alice_input(&a_setting, &hidden);
                    let y = bob_input(&b_setting, &hidden);
                    let reference = sign_bit(a_setting.dot_unit(&hidden.lambda1));

                    let mut draws = Stream::new(seed, domain::stream(domain::BIAS_DRAWS, i));
                    let matches = (0..n)
                        .filter(|_| {
                            let (a, _) = sample_sp_box(p, x, y, &mut draws);
                            crate::protocol::alice_output(a, &a_setting, &hidden) == reference
                        })
                        .count() as u64;
                    let frequency = matches as f64 / n as f64;
                    let deviation = frequency - p.value();
                    BiasRow {
                        index: i,
                        x,
                        y,
                        matches,
                        n,
                        frequency,
                        deviation,
                        z: z_score(frequency, p.value(), sigma),
                        empirical_entropy: entropy2(frequency),
                        expected_entropy: entropy2(p.value()),
                        entropy_tolerance: entropy_band(p.value(), CELL_Z_LIMIT * sigma),
                    }
                })
                .collect()
        });
        Ok(BiasReport { p: p.value(), rows })
    }
}

impl Default for MonteCarlo {
    fn default() -> Self {
        let workers = std::thread::available_parallelism().map_or(1, |n| n.get());
        Self::new(workers).expect("thread pool")
    }
}
