//! Information quantities for the `S^p` family and related models.
//!
//! All results are in bits.

use std::f64::consts::LN_2;

use rand_distr::{Binomial, Distribution};
use serde::Serialize;

use crate::boxes::{sample_sp_box, sp_box_table, BoxTable, SpParameter};
use crate::error::{Error, Result};
use crate::quadrature::tanh_sinh;
use crate::rng::{domain, Stream};
use crate::Bit;

/// Tolerance on probability and weight sums.
pub const SUM_TOL: f64 = 1e-12;

/// Below this purity the averaged entropy uses `1 - μ²/(6 ln 2)`.
pub const LEGGETT_SERIES_THRESHOLD: f64 = 1e-4;

/// Convergence tolerance of the input-distribution search in [`max_mutual_information`].
pub const CAPACITY_SEARCH_TOL: f64 = 1e-10;

/// Bootstrap resamples used by [`estimate_channel_information`].
pub const BOOTSTRAP_RESAMPLES: usize = 400;

/// `-q log₂ q - (1-q) log₂(1-q)` with `0·log 0 = 0`.
pub fn binary_entropy(q: f64) -> Result<f64> {
    if !(0.0..=1.0).contains(&q) {
        return Err(Error::domain("probability", q, "[0, 1]"));
    }
    Ok(entropy2(q))
}

#[inline]
fn xlog2x(v: f64) -> f64 {
    if v > 0.0 {
        v * v.log2()
    } else {
        0.0
    }
}

#[inline]
pub(crate) fn entropy2(q: f64) -> f64 {
    -xlog2x(q) - xlog2x(1.0 - q)
}

/// Local output randomness `R(p) = H(p)`.
pub fn randomness(p: SpParameter) -> f64 {
    entropy2(p.value())
}

/// Communication capacity `C(p) = 1 - H(p)`, closed form.
pub fn capacity(p: SpParameter) -> f64 {
    1.0 - entropy2(p.value())
}

/// Mutual information between the row and column variables of a 2×2 joint
/// distribution, `I = H(row) + H(col) - H(row, col)`.
pub fn mutual_information(joint: &[[f64; 2]; 2]) -> Result<f64> {
    let flat = joint.iter().flatten();
    if let Some(&bad) = flat.clone().find(|v| v.is_nan() || **v < 0.0) {
        return Err(Error::domain("joint probability", bad, "[0, 1]"));
    }
    let total: f64 = flat.sum();
    if (total - 1.0).abs() > SUM_TOL {
        return Err(Error::domain("joint total", total, "1 ± 1e-12"));
    }
    let row0 = joint[0][0] + joint[0][1];
    let col0 = joint[0][0] + joint[1][0];
    let h_joint: f64 = -joint.iter().flatten().map(|&v| xlog2x(v)).sum::<f64>();
    Ok((entropy2(row0) + entropy2(col0) - h_joint).max(0.0))
}

/// Joint distribution of Alice's input `x` (rows) and Bob's output `b`
/// (columns) when Bob feeds `y` and Alice picks `x = 0` with probability `q`.
pub fn induced_channel(table: &BoxTable, y: Bit, q: f64) -> [[f64; 2]; 2] {
    let mut joint = [[0.0; 2]; 2];
    for (x, px) in [(0, q), (1, 1.0 - q)] {
        for b in [0, 1] {
            joint[x as usize][b as usize] = px * table.bob_marginal(x, y, b);
        }
    }
    joint
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct ChannelOptimum {
    /// Maximizing `P(x = 0)`.
    pub input_prob: f64,
    pub information: f64,
}

/// Maximizes `I(x : b)` over Alice's input distribution for Bob input `y` by
/// golden-section search on `P(x = 0)`. The objective is concave in the input
/// distribution, so the search converges to the global maximum.
pub fn max_mutual_information(table: &BoxTable, y: Bit) -> ChannelOptimum {
    let info = |q: f64| {
        mutual_information(&induced_channel(table, y, q.clamp(0.0, 1.0)))
            .expect("induced channel is a distribution")
    };
    let inv_phi = (5f64.sqrt() - 1.0) / 2.0;
    let (mut lo, mut hi) = (0.0f64, 1.0f64);
    let mut c = hi - inv_phi * (hi - lo);
    let mut d = lo + inv_phi * (hi - lo);
    let (mut fc, mut fd) = (info(c), info(d));
    while hi - lo > CAPACITY_SEARCH_TOL {
        if fc >= fd {
            hi = d;
            d = c;
            fd = fc;
            c = hi - inv_phi * (hi - lo);
            fc = info(c);
        } else {
            lo = c;
            c = d;
            fc = fd;
            d = lo + inv_phi * (hi - lo);
            fd = info(d);
        }
    }
    let q = 0.5 * (lo + hi);
    ChannelOptimum {
        input_prob: q,
        information: info(q),
    }
}

/// Capacity of `S^p` computed on the exact induced channel for Bob input 1.
pub fn capacity_via_channel(p: SpParameter) -> ChannelOptimum {
    max_mutual_information(&sp_box_table(p), 1)
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct ComplementarityReport {
    pub p: f64,
    pub randomness: f64,
    pub capacity: f64,
    pub total: f64,
}

pub fn complementarity(p: SpParameter) -> ComplementarityReport {
    let randomness = randomness(p);
    let capacity = capacity(p);
    ComplementarityReport {
        p: p.value(),
        randomness,
        capacity,
        total: randomness + capacity,
    }
}

/// Discrete distribution over box parameters.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct EnsembleDistribution {
    atoms: Vec<(SpParameter, f64)>,
}

impl EnsembleDistribution {
    pub fn new(atoms: Vec<(SpParameter, f64)>) -> Result<Self> {
        if atoms.is_empty() {
            return Err(Error::Distribution("no atoms".into()));
        }
        if let Some((_, w)) = atoms.iter().find(|(_, w)| !(*w >= 0.0 && w.is_finite())) {
            return Err(Error::Distribution(format!(
                "weight {w} is not a nonnegative number"
            )));
        }
        let total: f64 = atoms.iter().map(|(_, w)| w).sum();
        if (total - 1.0).abs() > SUM_TOL {
            return Err(Error::Distribution(format!(
                "weights sum to {total}, expected 1"
            )));
        }
        Ok(Self { atoms })
    }

    /// Parses `p weight` pairs, one per line. `#` starts a comment.
    pub fn parse(text: &str) -> Result<Self> {
        let mut atoms = Vec::new();
        for (i, raw) in text.lines().enumerate() {
            let line_no = i + 1;
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let err = |message: String| Error::Parse {
                line: line_no,
                message,
            };
            let fields: Vec<&str> = line.split_whitespace().collect();
            let [p, w] = fields[..] else {
                return Err(err(format!("expected `p weight`, found `{line}`")));
            };
            let p: f64 = p.parse().map_err(|_| err(format!("bad p `{p}`")))?;
            let w: f64 = w.parse().map_err(|_| err(format!("bad weight `{w}`")))?;
            let p = SpParameter::new(p).map_err(|e| err(e.to_string()))?;
            if !(w >= 0.0 && w.is_finite()) {
                return Err(err(format!("weight {w} is not a nonnegative number")));
            }
            atoms.push((p, w));
        }
        if atoms.is_empty() {
            return Err(Error::Parse {
                line: text.lines().count().max(1),
                message: "no `p weight` entries".into(),
            });
        }
        Self::new(atoms)
    }

    pub fn atoms(&self) -> &[(SpParameter, f64)] {
        &self.atoms
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct EnsembleAverages {
    pub avg_randomness: f64,
    pub avg_capacity: f64,
    pub total: f64,
}

pub fn ensemble_averages(dist: &EnsembleDistribution) -> EnsembleAverages {
    let (mut avg_randomness, mut avg_capacity) = (0.0, 0.0);
    for &(p, w) in dist.atoms() {
        avg_randomness += w * randomness(p);
        avg_capacity += w * capacity(p);
    }
    EnsembleAverages {
        avg_randomness,
        avg_capacity,
        total: avg_randomness + avg_capacity,
    }
}

/// Bloch-vector length `μ ∈ [0, 1]` of a local qubit state.
#[derive(Clone, Copy, Debug, PartialEq, PartialOrd, Serialize)]
#[serde(transparent)]
pub struct PolarizationPurity(f64);

impl PolarizationPurity {
    pub fn new(mu: f64) -> Result<Self> {
        if (0.0..=1.0).contains(&mu) {
            Ok(Self(mu))
        } else {
            Err(Error::domain("mu", mu, "[0, 1]"))
        }
    }

    pub fn value(self) -> f64 {
        self.0
    }
}

/// Output entropy averaged uniformly over measurement directions for a state
/// of purity `μ`:
///
/// ```text
/// R(μ) = 1 - [(1+μ)² ln(1+μ) - (1-μ)² ln(1-μ) - 2μ] / (4μ ln 2)
/// ```
pub fn leggett_average_entropy(mu: PolarizationPurity) -> f64 {
    let mu = mu.value();
    if mu < LEGGETT_SERIES_THRESHOLD {
        return 1.0 - mu * mu / (6.0 * LN_2);
    }
    let plus = (1.0 + mu).powi(2) * mu.ln_1p();
    let minus = if mu == 1.0 {
        0.0
    } else {
        (1.0 - mu).powi(2) * (-mu).ln_1p()
    };
    1.0 - (plus - minus - 2.0 * mu) / (4.0 * mu * LN_2)
}

/// The same average by direct quadrature over the polar angle,
/// `∫₀^π H((1 + μ cos θ)/2) · sin θ / 2 dθ`.
pub fn leggett_average_entropy_quadrature(mu: PolarizationPurity) -> f64 {
    let mu = mu.value();
    tanh_sinh(
        |theta| entropy2(0.5 * (1.0 + mu * theta.cos())) * 0.5 * theta.sin(),
        0.0,
        std::f64::consts::PI,
        1e-13,
    )
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct ConeCost {
    pub theta: f64,
    /// `cos²(θ/2)`
    pub bias: f64,
    /// `1 - H(cos²(θ/2))` bits
    pub cost: f64,
}

impl ConeCost {
    /// Box parameter that realizes this cost. For `θ > π/2` the bias falls
    /// below 1/2 and the equivalent box `S^{1-bias}` is returned.
    pub fn box_parameter(&self) -> SpParameter {
        SpParameter::new(self.bias.max(1.0 - self.bias)).expect("max(q, 1-q) lies in [1/2, 1]")
    }
}

/// Communication cost of simulating measurements restricted to cones of
/// half-angle `theta` about the local polarization directions.
pub fn cone_simulation_cost(theta: f64) -> Result<ConeCost> {
    if !(0.0..=std::f64::consts::PI).contains(&theta) {
        return Err(Error::domain("theta", theta, "[0, π]"));
    }
    // cos²(θ/2) = (1 + cos θ)/2; this form is exact at θ = π/2.
    let bias = (0.5 * (1.0 + theta.cos())).clamp(0.0, 1.0);
    Ok(ConeCost {
        theta,
        bias,
        cost: 1.0 - entropy2(bias),
    })
}

/// Plug-in estimate of `I(x : b)` from sampled box uses.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct InformationEstimate {
    pub estimate: f64,
    /// Bootstrap standard error over [`BOOTSTRAP_RESAMPLES`] multinomial resamples.
    pub std_error: f64,
    pub n: u64,
    /// Counts indexed `[x][b]`.
    pub counts: [[u64; 2]; 2],
}

fn plug_in_information(counts: &[[u64; 2]; 2]) -> f64 {
    let n: u64 = counts.iter().flatten().sum();
    let joint = counts.map(|row| row.map(|c| c as f64 / n as f64));
    mutual_information(&joint).unwrap_or_else(|_| {
        // rounding in the normalization; renormalize
        let total: f64 = joint.iter().flatten().sum();
        mutual_information(&joint.map(|row| row.map(|v| v / total))).unwrap_or(0.0)
    })
}

/// Samples `n` uses of `S^p` with uniform Alice input and Bob input `y`, then
/// reports the plug-in mutual information with a bootstrap standard error.
pub fn estimate_channel_information(
    p: SpParameter,
    y: Bit,
    n: u64,
    seed: u64,
) -> InformationEstimate {
    let mut rng = Stream::new(seed, domain::stream(domain::CHANNEL, y as u64));
    let mut counts = [[0u64; 2]; 2];
    for _ in 0..n {
        let x: Bit = if rng.uniform() < 0.5 { 0 } else { 1 };
        let (_, b) = sample_sp_box(p, x, y, &mut rng);
        counts[x as usize][b as usize] += 1;
    }
    let estimate = plug_in_information(&counts);

    let mut boot = Stream::new(seed, domain::stream(domain::BOOTSTRAP, y as u64));
    let probs: Vec<f64> = counts
        .iter()
        .flatten()
        .map(|&c| c as f64 / n as f64)
        .collect();
    let mut replicates = Vec::with_capacity(BOOTSTRAP_RESAMPLES);
    for _ in 0..BOOTSTRAP_RESAMPLES {
        // multinomial(n, probs) as a chain of conditional binomials
        let mut remaining = n;
        let mut mass = 1.0;
        let mut cells = [0u64; 4];
        for (i, &pi) in probs.iter().enumerate() {
            if i == 3 || remaining == 0 {
                cells[i] = remaining;
                remaining = 0;
                continue;
            }
            let cond = if mass > 0.0 {
                (pi / mass).clamp(0.0, 1.0)
            } else {
                0.0
            };
            let draw = Binomial::new(remaining, cond)
                .expect("probability in [0, 1]")
                .sample(&mut boot);
            cells[i] = draw;
            remaining -= draw;
            mass -= pi;
        }
        replicates.push(plug_in_information(&[
            [cells[0], cells[1]],
            [cells[2], cells[3]],
        ]));
    }
    let mean = replicates.iter().sum::<f64>() / replicates.len() as f64;
    let var =
        replicates.iter().map(|r| (r - mean).powi(2)).sum::<f64>() / (replicates.len() - 1) as f64;

    InformationEstimate {
        estimate,
        std_error: var.sqrt(),
        n,
        counts,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sp(p: f64) -> SpParameter {
        SpParameter::new(p).unwrap()
    }

    fn mu(m: f64) -> PolarizationPurity {
        PolarizationPurity::new(m).unwrap()
    }

    // H(0.75) = 2 - (3/4)·log₂3, evaluated to 20 digits.
    const H_THREE_QUARTERS: f64 = 0.811_278_124_459_132_9;

    #[test]
    fn entropy_examples() {
        assert_eq!(binary_entropy(0.5).unwrap(), 1.0);
        assert_eq!(binary_entropy(1.0).unwrap(), 0.0);
        assert_eq!(binary_entropy(0.0).unwrap(), 0.0);
        assert!((binary_entropy(0.75).unwrap() - H_THREE_QUARTERS).abs() < 1e-15);
        assert!((binary_entropy(0.75).unwrap() - 0.811278).abs() < 1e-6);
        assert!(binary_entropy(-0.1).is_err());
        assert!(binary_entropy(1.1).is_err());
        assert!(binary_entropy(f64::NAN).is_err());
    }

    #[test]
    fn randomness_and_capacity_examples() {
        assert_eq!(randomness(sp(0.5)), 1.0);
        assert_eq!(randomness(sp(1.0)), 0.0);
        assert!((randomness(sp(0.75)) - 0.811278).abs() < 1e-6);
        assert_eq!(capacity(sp(1.0)), 1.0);
        assert_eq!(capacity(sp(0.5)), 0.0);
        assert!((capacity(sp(0.75)) - 0.188722).abs() < 1e-6);
    }

    #[test]
    fn mutual_information_examples() {
        assert_eq!(
            mutual_information(&[[0.25, 0.25], [0.25, 0.25]]).unwrap(),
            0.0
        );
        assert!((mutual_information(&[[0.5, 0.0], [0.0, 0.5]]).unwrap() - 1.0).abs() < 1e-15);
        // uniform x, b = x ⊕ a, P(a = 0) = 0.75
        let joint = [[0.375, 0.125], [0.125, 0.375]];
        let i = mutual_information(&joint).unwrap();
        assert!((i - (1.0 - H_THREE_QUARTERS)).abs() < 1e-12);
        assert!((i - 0.188722).abs() < 1e-6);
        assert!(mutual_information(&[[0.5, 0.5], [0.5, 0.0]]).is_err());
        assert!(mutual_information(&[[-0.1, 0.6], [0.25, 0.25]]).is_err());
    }

    #[test]
    fn capacity_search_matches_closed_form() {
        for p in [0.5, 0.6, 0.75, 0.9, 0.99, 1.0] {
            let opt = capacity_via_channel(sp(p));
            assert!((opt.information - capacity(sp(p))).abs() < 1e-9, "p = {p}");
            if p > 0.5 {
                assert!(
                    (opt.input_prob - 0.5).abs() < 1e-4,
                    "p = {p}: q = {}",
                    opt.input_prob
                );
            }
            let zero = max_mutual_information(&sp_box_table(sp(p)), 0);
            assert!(zero.information.abs() < 1e-12);
        }
    }

    #[test]
    fn complementarity_examples() {
        let r = complementarity(sp(1.0));
        assert_eq!((r.randomness, r.capacity, r.total), (0.0, 1.0, 1.0));
        let r = complementarity(sp(0.5));
        assert_eq!((r.randomness, r.capacity, r.total), (1.0, 0.0, 1.0));
        assert!((complementarity(sp(0.85)).total - 1.0).abs() <= 1e-12);
    }

    #[test]
    fn ensemble_examples() {
        let single = EnsembleDistribution::new(vec![(sp(1.0), 1.0)]).unwrap();
        let e = ensemble_averages(&single);
        assert_eq!((e.avg_randomness, e.avg_capacity, e.total), (0.0, 1.0, 1.0));
        let two = EnsembleDistribution::new(vec![(sp(0.5), 0.5), (sp(1.0), 0.5)]).unwrap();
        let e = ensemble_averages(&two);
        assert_eq!((e.avg_randomness, e.avg_capacity, e.total), (0.5, 0.5, 1.0));
        assert!(EnsembleDistribution::new(vec![(sp(0.5), 0.4)]).is_err());
        assert!(EnsembleDistribution::new(vec![(sp(0.5), 1.5), (sp(0.6), -0.5)]).is_err());
        assert!(EnsembleDistribution::new(vec![]).is_err());
    }

    #[test]
    fn weights_file_parsing() {
        let d = EnsembleDistribution::parse("# rho(p)\n0.5 0.5\n\n1.0 0.5  # cbit\n").unwrap();
        assert_eq!(d.atoms().len(), 2);
        match EnsembleDistribution::parse("") {
            Err(Error::Parse { .. }) => {}
            other => panic!("{other:?}"),
        }
        match EnsembleDistribution::parse("0.5 0.5\n0.7\n") {
            Err(Error::Parse { line: 2, .. }) => {}
            other => panic!("{other:?}"),
        }
        match EnsembleDistribution::parse("0.5 0.5\n0.3 0.5\n") {
            Err(Error::Parse { line: 2, .. }) => {}
            other => panic!("{other:?}"),
        }
        match EnsembleDistribution::parse("0.5 x\n") {
            Err(Error::Parse { line: 1, .. }) => {}
            other => panic!("{other:?}"),
        }
        assert!(matches!(
            EnsembleDistribution::parse("0.5 0.3\n"),
            Err(Error::Distribution(_))
        ));
    }

    #[test]
    fn leggett_examples() {
        assert_eq!(leggett_average_entropy(mu(0.0)), 1.0);
        let r1 = leggett_average_entropy(mu(1.0));
        assert!((r1 - 1.0 / (2.0 * LN_2)).abs() < 1e-15);
        assert!((r1 - 0.721348).abs() < 1e-6);
        assert!(PolarizationPurity::new(1.01).is_err());
        assert!(PolarizationPurity::new(-0.01).is_err());
    }

    #[test]
    fn leggett_series_branch_is_continuous() {
        let below = leggett_average_entropy(mu(LEGGETT_SERIES_THRESHOLD * (1.0 - 1e-9)));
        let above = leggett_average_entropy(mu(LEGGETT_SERIES_THRESHOLD));
        assert!((below - above).abs() < 1e-13);
    }

    #[test]
    fn library_quadrature_matches_closed_form() {
        for m in [0.0, 0.05, 0.3, 0.5, 0.8, 1.0] {
            let d = leggett_average_entropy_quadrature(mu(m)) - leggett_average_entropy(mu(m));
            assert!(d.abs() < 1e-10, "mu = {m}: {d}");
        }
    }

    #[test]
    fn cone_examples() {
        use std::f64::consts::{FRAC_PI_2, FRAC_PI_3};
        let c = cone_simulation_cost(FRAC_PI_2).unwrap();
        assert_eq!((c.cost, c.bias), (0.0, 0.5));
        let c = cone_simulation_cost(0.0).unwrap();
        assert_eq!((c.cost, c.bias), (1.0, 1.0));
        let c = cone_simulation_cost(FRAC_PI_3).unwrap();
        assert!((c.bias - 0.75).abs() < 1e-12);
        assert!((c.cost - 0.188722).abs() < 1e-6);
        let c = cone_simulation_cost(2.0 * FRAC_PI_3).unwrap();
        assert!((c.bias - 0.25).abs() < 1e-12);
        assert!((c.box_parameter().value() - 0.75).abs() < 1e-12);
        assert!(cone_simulation_cost(-0.1).is_err());
        assert!(cone_simulation_cost(3.2).is_err());
    }

    #[test]
    fn empirical_information_near_capacity() {
        for p in [0.6, 0.75, 0.9] {
            let est = estimate_channel_information(sp(p), 1, 1_000_000, 17);
            let target = capacity(sp(p));
            assert!(
                (est.estimate - target).abs() <= 4.0 * est.std_error,
                "p = {p}: {} vs {target} ± {}",
                est.estimate,
                est.std_error
            );
        }
    }
}
