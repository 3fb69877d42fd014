//! Command-line surface.
//!
//! Every command renders its primary output into a string that depends only
//! on the flags and the seed (never on the worker count), so it can be
//! compared byte for byte between runs. Exit codes: 0 success, 1 statistical
//! failure, 2 usage or domain error.
//!
//! CSV column orders:
//!
//! | command         | columns                                          |
//! |-----------------|--------------------------------------------------|
//! | box-table       | `x,y,a,b,probability`, then `alice_to_bob,bob_to_alice,chsh` |
//! | simulate, sweep | `p,angle_rad,n,mean,std_error,target,z`          |
//! | complementarity | `p,randomness,capacity,total`                    |
//! | ensemble        | `avg_randomness,avg_capacity,total`              |
//! | leggett         | `mu,entropy,quadrature,abs_diff`                 |
//! | cone-cost       | `theta_rad,p,cost`                               |
//! | verify          | `check,status,detail`                            |
//!
//! JSON output is a single object with `"schema": 1` and `"command"` fields.

use std::fmt::Write as _;
use std::io::Write as _;
use std::path::PathBuf;

use clap::{Parser, Subcommand, ValueEnum};
use serde::Serialize;
use serde_json::json;

use crate::boxes::{decompose, sp_box_table, BoxTable, SpParameter};
use crate::error::{Error, Result};
use crate::harness::{
    Geometry, MonteCarlo, SweepConfig, SweepResult, CELL_Z_LIMIT, PAIRWISE_Z_LIMIT,
};
use crate::info::{
    capacity, capacity_via_channel, complementarity, cone_simulation_cost, ensemble_averages,
    leggett_average_entropy, leggett_average_entropy_quadrature, max_mutual_information,
    randomness, EnsembleDistribution, PolarizationPurity,
};
use crate::protocol::Fault;
use crate::rng::{domain, Stream};

pub const SCHEMA_VERSION: u32 = 1;

/// Environment variable that overrides the default seed.
pub const SEED_ENV: &str = "SPBOX_SEED";

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, ValueEnum)]
pub enum OutputFormat {
    #[default]
    Csv,
    Json,
}

#[derive(Debug, Parser)]
#[command(name = "spbox", version, about = "Singlet simulation with S^p boxes")]
pub struct RunConfig {
    #[command(subcommand)]
    pub command: Command,

    #[arg(long, global = true, value_enum, default_value_t = OutputFormat::Csv)]
    pub format: OutputFormat,

    /// Write primary output here instead of stdout.
    #[arg(long, global = true)]
    pub output: Option<PathBuf>,

    /// Worker threads for Monte Carlo commands (results do not depend on it).
    #[arg(long, global = true)]
    pub workers: Option<usize>,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Print the S^p table with signaling and CHSH diagnostics.
    BoxTable {
        #[arg(long)]
        p: f64,
    },
    /// Estimate E[v(A) ⊕ v(B)] at one angle.
    Simulate {
        #[arg(long)]
        p: f64,
        /// Angle between A and B, degrees.
        #[arg(long, default_value_t = 0.0)]
        angle: f64,
        #[arg(long, default_value_t = 1_000_000)]
        rounds: u64,
        #[arg(long, env = SEED_ENV, default_value_t = 42)]
        seed: u64,
        #[arg(long, value_enum, default_value_t = Geometry::Plane)]
        geometry: Geometry,
    },
    /// Estimate the correlation over a grid of p values and angles.
    Sweep {
        /// p values: `a,b,c` or `start:stop:step`.
        #[arg(long, default_value = "0.5,0.75,1.0")]
        p: String,
        /// Angles in degrees: `a,b,c` or `start:stop:step` (inclusive).
        #[arg(long, default_value = "0:180:30")]
        angles: String,
        #[arg(long, default_value_t = 1_000_000)]
        rounds: u64,
        #[arg(long, env = SEED_ENV, default_value_t = 42)]
        seed: u64,
        #[arg(long, value_enum, default_value_t = Geometry::Plane)]
        geometry: Geometry,
        /// JSON-lines transcript dump for cells beyond the |z| limit.
        #[arg(long)]
        dump_transcripts: Option<PathBuf>,
        /// Rounds replayed per dumped cell.
        #[arg(long, default_value_t = 1000)]
        dump_rounds: u64,
        /// Break the protocol on purpose (debugging the acceptance machinery).
        #[arg(long, value_enum)]
        inject_fault: Option<Fault>,
    },
    /// Tabulate R(p), C(p) and R + C.
    Complementarity {
        #[arg(long, default_value = "0.5:1:0.005")]
        p: String,
    },
    /// Average R and C over a weights file of `p weight` lines.
    Ensemble {
        #[arg(long)]
        weights: PathBuf,
    },
    /// Average output entropy of a state with purity μ, with a quadrature cross-check.
    Leggett {
        #[arg(long, default_value = "0:1:0.1")]
        mu: String,
    },
    /// Communication cost for cone-restricted measurements.
    ConeCost {
        /// Cone half-angles in degrees.
        #[arg(long, default_value = "0:180:15")]
        theta: String,
    },
    /// Run every check at reduced sample size.
    Verify {
        #[arg(long, env = SEED_ENV, default_value_t = 42)]
        seed: u64,
        #[arg(long, default_value_t = 100_000)]
        rounds: u64,
        /// Break the protocol on purpose; the correlation checks must then fail.
        #[arg(long, value_enum)]
        inject_fault: Option<Fault>,
    },
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Status {
    Success,
    StatisticalFailure,
}

impl Status {
    pub fn code(self) -> u8 {
        match self {
            Status::Success => 0,
            Status::StatisticalFailure => 1,
        }
    }

    fn from_pass(pass: bool) -> Self {
        if pass {
            Status::Success
        } else {
            Status::StatisticalFailure
        }
    }
}

#[derive(Debug)]
pub struct CommandOutput {
    pub body: String,
    pub status: Status,
}

/// Parses a `start:stop:step` (inclusive) or comma-separated list.
pub fn parse_grid(spec: &str) -> Result<Vec<f64>> {
    let err = |message: &str| Error::Grid {
        spec: spec.to_string(),
        message: message.to_string(),
    };
    let num = |s: &str| -> Result<f64> {
        let v: f64 = s
            .trim()
            .parse()
            .map_err(|_| err(&format!("`{s}` is not a number")))?;
        if v.is_finite() {
            Ok(v)
        } else {
            Err(err("values must be finite"))
        }
    };
    if spec.contains(':') {
        let parts: Vec<&str> = spec.split(':').collect();
        let [start, stop, step] = parts[..] else {
            return Err(err("expected start:stop:step"));
        };
        let (start, stop, step) = (num(start)?, num(stop)?, num(step)?);
        if step <= 0.0 || stop < start {
            return Err(err("need step > 0 and stop ≥ start"));
        }
        let intervals = ((stop - start) / step).round();
        if intervals > 1e7 {
            return Err(err("grid too large"));
        }
        let n = intervals as u64;
        if (start + n as f64 * step - stop).abs() > 1e-9 * step.max(1.0) {
            return Err(err("step does not divide the range"));
        }
        Ok((0..=n)
            .map(|i| {
                if i == n {
                    stop
                } else {
                    start + i as f64 * step
                }
            })
            .collect())
    } else {
        let values: Vec<f64> = spec.split(',').map(num).collect::<Result<_>>()?;
        if values.is_empty() {
            return Err(err("empty grid"));
        }
        Ok(values)
    }
}

fn p_grid(spec: &str) -> Result<Vec<SpParameter>> {
    parse_grid(spec)?
        .into_iter()
        .map(SpParameter::new)
        .collect()
}

fn angle_grid(spec: &str) -> Result<Vec<f64>> {
    parse_grid(spec)?
        .into_iter()
        .map(|deg| {
            if (0.0..=180.0).contains(&deg) {
                Ok(deg.to_radians())
            } else {
                Err(Error::domain("angle (degrees)", deg, "[0, 180]"))
            }
        })
        .collect()
}

fn to_json(value: serde_json::Value) -> Result<String> {
    let mut s = serde_json::to_string_pretty(&value)?;
    s.push('\n');
    Ok(s)
}

fn csv_rows<R: Serialize>(header: &[&str], rows: impl IntoIterator<Item = R>) -> Result<String> {
    let mut w = csv::WriterBuilder::new()
        .has_headers(false)
        .from_writer(Vec::new());
    w.write_record(header)?;
    for row in rows {
        w.serialize(row)?;
    }
    let bytes = w.into_inner().map_err(|e| Error::Io(e.into_error()))?;
    Ok(String::from_utf8(bytes).expect("csv output is utf-8"))
}

fn sweep_csv(result: &SweepResult) -> Result<String> {
    csv_rows(
        &["p", "angle_rad", "n", "mean", "std_error", "target", "z"],
        result.rows.iter().map(|r| {
            (
                r.p,
                r.angle_rad,
                r.estimate.n_rounds,
                r.estimate.mean,
                r.estimate.std_error,
                r.estimate.target,
                r.z,
            )
        }),
    )
}

fn sweep_accepted(result: &SweepResult) -> bool {
    result.accepted() && result.max_pairwise_z() <= PAIRWISE_Z_LIMIT
}

fn monte_carlo(config: &RunConfig) -> Result<MonteCarlo> {
    match config.workers {
        Some(0) => Err(Error::domain("workers", 0.0, "≥ 1")),
        Some(n) => MonteCarlo::new(n),
        None => Ok(MonteCarlo::default()),
    }
}

/// Runs a command and renders its primary output.
pub fn execute(config: &RunConfig) -> Result<CommandOutput> {
    let format = config.format;
    let done = |body: String| CommandOutput {
        body,
        status: Status::Success,
    };
    match &config.command {
        Command::BoxTable { p } => {
            let p = SpParameter::new(*p)?;
            box_table(p, format).map(done)
        }
        Command::Simulate {
            p,
            angle,
            rounds,
            seed,
            geometry,
        } => {
            let p = SpParameter::new(*p)?;
            let angles = angle_grid(&angle.to_string())?;
            let mut sweep = SweepConfig::new(vec![p], angles, *rounds, *seed);
            sweep.geometry = *geometry;
            let result = monte_carlo(config)?.sweep(&sweep)?;
            let pass = result.max_abs_z() <= CELL_Z_LIMIT;
            Ok(CommandOutput {
                body: render_sweep(&result, &sweep, format, "simulate")?,
                status: Status::from_pass(pass),
            })
        }
        Command::Sweep {
            p,
            angles,
            rounds,
            seed,
            geometry,
            dump_transcripts,
            dump_rounds,
            inject_fault,
        } => {
            let mut sweep = SweepConfig::new(p_grid(p)?, angle_grid(angles)?, *rounds, *seed);
            sweep.geometry = *geometry;
            sweep.fault = *inject_fault;
            let mc = monte_carlo(config)?;
            let result = mc.sweep(&sweep)?;
            if let Some(path) = dump_transcripts {
                dump_failed_cells(&mc, &sweep, &result, *dump_rounds, path)?;
            }
            Ok(CommandOutput {
                body: render_sweep(&result, &sweep, format, "sweep")?,
                status: Status::from_pass(sweep_accepted(&result)),
            })
        }
        Command::Complementarity { p } => {
            let rows: Vec<_> = p_grid(p)?.into_iter().map(complementarity).collect();
            let body = match format {
                OutputFormat::Csv => csv_rows(&["p", "randomness", "capacity", "total"], &rows)?,
                OutputFormat::Json => to_json(json!({
                    "schema": SCHEMA_VERSION,
                    "command": "complementarity",
                    "rows": rows,
                }))?,
            };
            Ok(done(body))
        }
        Command::Ensemble { weights } => {
            let text = std::fs::read_to_string(weights)?;
            let dist = EnsembleDistribution::parse(&text)?;
            let avg = ensemble_averages(&dist);
            let body = match format {
                OutputFormat::Csv => csv_rows(
                    &["avg_randomness", "avg_capacity", "total"],
                    [(avg.avg_randomness, avg.avg_capacity, avg.total)],
                )?,
                OutputFormat::Json => to_json(json!({
                    "schema": SCHEMA_VERSION,
                    "command": "ensemble",
                    "atoms": dist.atoms(),
                    "averages": avg,
                }))?,
            };
            Ok(done(body))
        }
        Command::Leggett { mu } => {
            let rows = parse_grid(mu)?
                .into_iter()
                .map(|m| {
                    let purity = PolarizationPurity::new(m)?;
                    let closed = leggett_average_entropy(purity);
                    let quad = leggett_average_entropy_quadrature(purity);
                    Ok((m, closed, quad, (closed - quad).abs()))
                })
                .collect::<Result<Vec<_>>>()?;
            let body = match format {
                OutputFormat::Csv => csv_rows(&["mu", "entropy", "quadrature", "abs_diff"], &rows)?,
                OutputFormat::Json => to_json(json!({
                    "schema": SCHEMA_VERSION,
                    "command": "leggett",
                    "rows": rows.iter().map(|(m, e, q, d)| json!({
                        "mu": m, "entropy": e, "quadrature": q, "abs_diff": d,
                    })).collect::<Vec<_>>(),
                }))?,
            };
            Ok(done(body))
        }
        Command::ConeCost { theta } => {
            let rows = angle_grid(theta)?
                .into_iter()
                .map(cone_simulation_cost)
                .collect::<Result<Vec<_>>>()?;
            let body = match format {
                OutputFormat::Csv => csv_rows(
                    &["theta_rad", "p", "cost"],
                    rows.iter().map(|c| (c.theta, c.bias, c.cost)),
                )?,
                OutputFormat::Json => to_json(json!({
                    "schema": SCHEMA_VERSION,
                    "command": "cone-cost",
                    "rows": rows.iter().map(|c| json!({
                        "theta_rad": c.theta, "p": c.bias, "cost": c.cost,
                    })).collect::<Vec<_>>(),
                }))?,
            };
            Ok(done(body))
        }
        Command::Verify {
            seed,
            rounds,
            inject_fault,
        } => {
            if *rounds == 0 {
                return Err(Error::domain("rounds", 0.0, "n ≥ 1"));
            }
            let checks = verify(&monte_carlo(config)?, *seed, *rounds, *inject_fault)?;
            let pass = checks.iter().all(|c| c.passed);
            let body = match format {
                OutputFormat::Csv => csv_rows(
                    &["check", "status", "detail"],
                    checks
                        .iter()
                        .map(|c| (c.name, if c.passed { "PASS" } else { "FAIL" }, &c.detail)),
                )?,
                OutputFormat::Json => to_json(json!({
                    "schema": SCHEMA_VERSION,
                    "command": "verify",
                    "seed": seed,
                    "rounds": rounds,
                    "passed": pass,
                    "checks": checks,
                }))?,
            };
            Ok(CommandOutput {
                body,
                status: Status::from_pass(pass),
            })
        }
    }
}

/// Executes and writes the output. Returns the process exit status.
pub fn run(config: &RunConfig) -> Result<Status> {
    let out = execute(config)?;
    match &config.output {
        Some(path) => std::fs::write(path, &out.body)?,
        None => {
            let mut stdout = std::io::stdout().lock();
            stdout.write_all(out.body.as_bytes())?;
            stdout.flush()?;
        }
    }
    Ok(out.status)
}

fn box_table(p: SpParameter, format: OutputFormat) -> Result<String> {
    let table = sp_box_table(p);
    let signaling = table.signaling_deviation();
    let chsh = table.chsh_value();
    let mut entries = Vec::with_capacity(16);
    for x in 0u8..2 {
        for y in 0u8..2 {
            for a in 0u8..2 {
                for b in 0u8..2 {
                    entries.push((x, y, a, b, table.get(x, y, a, b)));
                }
            }
        }
    }
    match format {
        OutputFormat::Csv => {
            let mut s = csv_rows(&["x", "y", "a", "b", "probability"], &entries)?;
            s.push('\n');
            s += &csv_rows(
                &["alice_to_bob", "bob_to_alice", "chsh"],
                [(signaling.alice_to_bob, signaling.bob_to_alice, chsh)],
            )?;
            Ok(s)
        }
        OutputFormat::Json => to_json(json!({
            "schema": SCHEMA_VERSION,
            "command": "box-table",
            "p": p,
            "table": entries.iter().map(|(x, y, a, b, v)| json!({
                "x": x, "y": y, "a": a, "b": b, "probability": v,
            })).collect::<Vec<_>>(),
            "signaling": signaling,
            "chsh": chsh,
        })),
    }
}

fn render_sweep(
    result: &SweepResult,
    sweep: &SweepConfig,
    format: OutputFormat,
    command: &str,
) -> Result<String> {
    match format {
        OutputFormat::Csv => sweep_csv(result),
        OutputFormat::Json => to_json(json!({
            "schema": SCHEMA_VERSION,
            "command": command,
            "seed": sweep.seed,
            "geometry": sweep.geometry,
            "rows": result.rows.iter().map(|r| json!({
                "p": r.p,
                "angle_rad": r.angle_rad,
                "n": r.estimate.n_rounds,
                "mean": r.estimate.mean,
                "std_error": r.estimate.std_error,
                "target": r.estimate.target,
                "z": r.z,
            })).collect::<Vec<_>>(),
            "summary": {
                "max_abs_z": result.max_abs_z(),
                "excess_fraction": result.excess_fraction(),
                "max_pairwise_z": result.max_pairwise_z(),
                "accepted": sweep_accepted(result),
            },
        })),
    }
}

fn dump_failed_cells(
    mc: &MonteCarlo,
    sweep: &SweepConfig,
    result: &SweepResult,
    rounds: u64,
    path: &PathBuf,
) -> Result<()> {
    let mut out = std::io::BufWriter::new(std::fs::File::create(path)?);
    for (cell, row) in result.rows.iter().enumerate() {
        if row.z.abs() <= CELL_Z_LIMIT {
            continue;
        }
        for t in mc.cell_transcripts(sweep, cell as u64, rounds) {
            serde_json::to_writer(&mut out, &t)?;
            out.write_all(b"\n")?;
        }
    }
    out.flush()?;
    Ok(())
}

#[derive(Clone, Debug, Serialize)]
pub struct Check {
    pub name: &'static str,
    pub passed: bool,
    pub detail: String,
}

fn check(name: &'static str, passed: bool, detail: String) -> Check {
    Check {
        name,
        passed,
        detail,
    }
}

/// Random discrete distribution over `[1/2, 1]` with 1..=8 atoms.
fn random_ensemble(rng: &mut Stream) -> EnsembleDistribution {
    let k = 1 + (rng.uniform() * 8.0) as usize;
    let raw: Vec<(SpParameter, f64)> = (0..k)
        .map(|_| {
            let p = SpParameter::new(0.5 + 0.5 * rng.uniform()).expect("in range");
            (p, rng.uniform() + 1e-3)
        })
        .collect();
    let total: f64 = raw.iter().map(|(_, w)| w).sum();
    EnsembleDistribution::new(raw.into_iter().map(|(p, w)| (p, w / total)).collect())
        .expect("normalized weights")
}

fn verify(mc: &MonteCarlo, seed: u64, rounds: u64, fault: Option<Fault>) -> Result<Vec<Check>> {
    let mut checks = Vec::new();
    let headline = [0.5, 0.75, 1.0].map(|p| SpParameter::new(p).expect("in range"));

    // Singlet reproduction and p-independence.
    let mut sweep = SweepConfig::new(headline.to_vec(), angle_grid("0:180:30")?, rounds, seed);
    sweep.fault = fault;
    let result = mc.sweep(&sweep)?;
    checks.push(check(
        "singlet-correlation",
        result.accepted(),
        format!(
            "cells={} max|z|={:.3} frac(|z|>3)={:.3}",
            result.rows.len(),
            result.max_abs_z(),
            result.excess_fraction()
        ),
    ));
    checks.push(check(
        "p-independence",
        result.max_pairwise_z() <= PAIRWISE_Z_LIMIT,
        format!("max pairwise |z|={:.3}", result.max_pairwise_z()),
    ));

    // Per-round identities.
    let mut detail = String::new();
    let mut ok = true;
    for p in headline {
        let id = mc.check_round_identities(p, rounds, seed, fault)?;
        ok &= id.holds();
        let _ = write!(
            detail,
            "p={}: box {} / parity {} of {}; ",
            id.p, id.box_law_violations, id.parity_violations, id.rounds
        );
    }
    checks.push(check(
        "round-identities",
        ok,
        detail.trim_end_matches("; ").into(),
    ));

    // Complementarity on a 1001-point grid, plus the channel route.
    let grid: Vec<SpParameter> = (0..=1000)
        .map(|i| SpParameter::new(0.5 + 0.5 * i as f64 / 1000.0).expect("in range"))
        .collect();
    let worst_total = grid
        .iter()
        .map(|&p| (randomness(p) + capacity(p) - 1.0).abs())
        .fold(0.0, f64::max);
    checks.push(check(
        "complementarity",
        worst_total <= 1e-12,
        format!("max|R+C-1|={worst_total:e}"),
    ));
    let (mut worst_channel, mut worst_zero) = (0.0f64, 0.0f64);
    for &p in &grid {
        worst_channel =
            worst_channel.max((capacity_via_channel(p).information - capacity(p)).abs());
        worst_zero = worst_zero.max(
            max_mutual_information(&sp_box_table(p), 0)
                .information
                .abs(),
        );
    }
    checks.push(check(
        "channel-capacity",
        worst_channel <= 1e-9 && worst_zero <= 1e-12,
        format!("max|C-maxI|={worst_channel:e} max I(y=0)={worst_zero:e}"),
    ));

    // Ensemble averages.
    let mut rng = Stream::new(seed, domain::stream(domain::BOX_SAMPLES, 0));
    let worst_ensemble = (0..100)
        .map(|_| (ensemble_averages(&random_ensemble(&mut rng)).total - 1.0).abs())
        .fold(0.0, f64::max);
    checks.push(check(
        "ensemble",
        worst_ensemble <= 1e-12,
        format!("max|avgR+avgC-1|={worst_ensemble:e}"),
    ));

    // Extreme members and the mixture decomposition.
    let cbit = sp_box_table(SpParameter::ONE_CBIT);
    let pr = sp_box_table(SpParameter::PR_BOX);
    let s1 = cbit.signaling_deviation();
    let s0 = pr.signaling_deviation();
    let worst_mix = (0..50)
        .map(|_| {
            let p = SpParameter::new(0.5 + 0.5 * rng.uniform()).expect("in range");
            decompose(p).reconstruct().max_abs_diff(&sp_box_table(p))
        })
        .fold(0.0, f64::max);
    let extremes_ok = cbit == BoxTable::one_cbit()
        && (s1.alice_to_bob, s1.bob_to_alice) == (1.0, 0.0)
        && pr == BoxTable::pr_box()
        && (s0.alice_to_bob, s0.bob_to_alice) == (0.0, 0.0)
        && pr.chsh_value() == 4.0
        && worst_mix <= 1e-15;
    checks.push(check(
        "extreme-boxes",
        extremes_ok,
        format!(
            "cbit signaling=({},{}) PR signaling=({},{}) PR chsh={} mix err={worst_mix:e}",
            s1.alice_to_bob,
            s1.bob_to_alice,
            s0.alice_to_bob,
            s0.bob_to_alice,
            pr.chsh_value()
        ),
    ));

    // Averaged entropy for mixed states.
    let mut worst_quad: f64 = 0.0;
    let mut below_one = true;
    for i in 1..=10 {
        let mu = PolarizationPurity::new(i as f64 / 10.0).expect("in range");
        let closed = leggett_average_entropy(mu);
        worst_quad = worst_quad.max((closed - leggett_average_entropy_quadrature(mu)).abs());
        below_one &= closed < 1.0;
    }
    let r1 = leggett_average_entropy(PolarizationPurity::new(1.0).expect("in range"));
    let r1_err = (r1 - 1.0 / (2.0 * std::f64::consts::LN_2)).abs();
    let small = 1e-3;
    let series_err = (leggett_average_entropy(PolarizationPurity::new(small).expect("in range"))
        - (1.0 - small * small / (6.0 * std::f64::consts::LN_2)))
        .abs();
    checks.push(check(
        "leggett-entropy",
        worst_quad <= 1e-8 && r1_err <= 1e-6 && below_one && series_err <= 1e-10,
        format!("quad err={worst_quad:e} R(1) err={r1_err:e} series err={series_err:e}"),
    ));

    // Cone cost and simulation at the implied box.
    let c90 = cone_simulation_cost(90f64.to_radians())?;
    let c0 = cone_simulation_cost(0.0)?;
    let c60 = cone_simulation_cost(60f64.to_radians())?;
    let p60 = c60.box_parameter();
    let cost_err = (c60.cost - capacity(SpParameter::new(0.75).expect("in range"))).abs();
    let mut cone_sweep = SweepConfig::new(vec![p60], angle_grid("0:180:30")?, rounds, seed ^ 0x60);
    cone_sweep.fault = fault;
    let cone_result = mc.sweep(&cone_sweep)?;
    checks.push(check(
        "cone-cost",
        c90.cost == 0.0
            && c0.cost == 1.0
            && (c60.bias - 0.75).abs() <= 1e-9
            && cost_err <= 1e-9
            && cone_result.accepted(),
        format!(
            "cost(90)={} cost(0)={} p(60)={} cost err={cost_err:e} sim max|z|={:.3}",
            c90.cost,
            c0.cost,
            c60.bias,
            cone_result.max_abs_z()
        ),
    ));

    // Conditional bias at fixed hidden pairs.
    let mut ok = true;
    let mut detail = String::new();
    for p in headline {
        let report = mc.conditional_bias_test(p, 20, rounds, seed)?;
        ok &= report.passed();
        let _ = write!(detail, "p={}: max|z|={:.3}; ", report.p, report.max_abs_z());
    }
    checks.push(check(
        "conditional-bias",
        ok,
        detail.trim_end_matches("; ").into(),
    ));

    Ok(checks)
}
