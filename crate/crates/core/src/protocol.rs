//! Singlet simulation with shared random vectors and one `S^p` box per round.
//!
//! Alice and Bob share two independent uniform unit vectors `λ₁, λ₂`. For
//! measurement directions `A` (Alice) and `B` (Bob):
//!
//! ```text
//! x    = sgn(A·λ₁) ⊕ sgn(A·λ₂)            Alice's box input
//! v(A) = a ⊕ sgn(A·λ₁)                    Alice's announced outcome
//! y    = sgn(B·λ₊) ⊕ sgn(B·λ₋)            Bob's box input, λ± = λ₁ ± λ₂
//! v(B) = b ⊕ sgn(B·λ₊) ⊕ 1                Bob's announced outcome
//! ```
//!
//! with `sgn(z) = 1` for `z ≥ 0` and 0 otherwise. Since every `S^p` box obeys
//! `a ⊕ b = x·y`, the outcome parity does not depend on `p`.

use std::f64::consts::TAU;

use serde::{Serialize, Serializer};

use crate::boxes::{sample_sp_box, SpParameter};
use crate::error::{Error, Result};
use crate::rng::Stream;
use crate::Bit;

/// Norm tolerance for [`UnitVector::new`].
pub const UNIT_NORM_TOL: f64 = 1e-9;

/// Variates drawn by [`sample_unit_vector`].
pub const VECTOR_VARIATES: u64 = 2;
/// Variates drawn by [`sample_hidden_pair`].
pub const PAIR_VARIATES: u64 = 2 * VECTOR_VARIATES;
/// Variates drawn by [`run_round`]: the hidden pair, then one box draw.
pub const ROUND_VARIATES: u64 = PAIR_VARIATES + 1;

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct UnitVector([f64; 3]);

impl UnitVector {
    pub const Z: UnitVector = UnitVector([0.0, 0.0, 1.0]);

    pub fn new(x: f64, y: f64, z: f64) -> Result<Self> {
        let norm = (x * x + y * y + z * z).sqrt();
        if (norm - 1.0).abs() > UNIT_NORM_TOL {
            return Err(Error::domain("unit vector norm", norm, "1 ± 1e-9"));
        }
        Ok(Self([x, y, z]))
    }

    /// Rescales any nonzero finite vector to unit length.
    pub fn normalized(x: f64, y: f64, z: f64) -> Result<Self> {
        let norm = (x * x + y * y + z * z).sqrt();
        if !(norm > 0.0 && norm.is_finite()) {
            return Err(Error::domain("vector norm", norm, "(0, ∞)"));
        }
        Ok(Self([x / norm, y / norm, z / norm]))
    }

    /// Direction at polar angle `theta` from +z, azimuth `phi`.
    pub fn from_angles(theta: f64, phi: f64) -> Self {
        let (st, ct) = theta.sin_cos();
        let (sp, cp) = phi.sin_cos();
        Self([st * cp, st * sp, ct])
    }

    pub fn components(&self) -> [f64; 3] {
        self.0
    }

    pub fn neg(&self) -> Self {
        Self([-self.0[0], -self.0[1], -self.0[2]])
    }

    #[inline]
    pub fn dot(&self, v: &[f64; 3]) -> f64 {
        self.0[0] * v[0] + self.0[1] * v[1] + self.0[2] * v[2]
    }

    pub fn dot_unit(&self, other: &UnitVector) -> f64 {
        self.dot(&other.0)
    }

    pub fn norm(&self) -> f64 {
        self.dot(&self.0).sqrt()
    }
}

impl Serialize for UnitVector {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        self.0.serialize(s)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct HiddenVariablePair {
    pub lambda1: UnitVector,
    pub lambda2: UnitVector,
}

impl HiddenVariablePair {
    /// `λ₁ + λ₂`, not normalized.
    pub fn plus(&self) -> [f64; 3] {
        let (a, b) = (self.lambda1.0, self.lambda2.0);
        [a[0] + b[0], a[1] + b[1], a[2] + b[2]]
    }

    /// `λ₁ - λ₂`, not normalized.
    pub fn minus(&self) -> [f64; 3] {
        let (a, b) = (self.lambda1.0, self.lambda2.0);
        [a[0] - b[0], a[1] - b[1], a[2] - b[2]]
    }
}

/// One executed round. Serializes as a JSON-lines audit record.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct RoundTranscript {
    #[serde(flatten)]
    pub hidden: HiddenVariablePair,
    #[serde(rename = "A")]
    pub a_setting: UnitVector,
    #[serde(rename = "B")]
    pub b_setting: UnitVector,
    pub x: Bit,
    pub y: Bit,
    pub a: Bit,
    pub b: Bit,
    #[serde(rename = "vA")]
    pub v_a: Bit,
    #[serde(rename = "vB")]
    pub v_b: Bit,
}

impl RoundTranscript {
    /// `a ⊕ b = x·y`.
    pub fn box_law_holds(&self) -> bool {
        self.a ^ self.b == self.x & self.y
    }

    /// `v_a ⊕ v_b = x·y ⊕ sgn(A·λ₁) ⊕ sgn(B·λ₊) ⊕ 1`, recomputed from the stored geometry.
    pub fn parity_identity_holds(&self) -> bool {
        let rhs = (self.x & self.y)
            ^ sign_bit(self.a_setting.dot_unit(&self.hidden.lambda1))
            ^ sign_bit(self.b_setting.dot(&self.hidden.plus()))
            ^ 1;
        self.v_a ^ self.v_b == rhs
    }

    /// Outcome parity `v(A) ⊕ v(B)`.
    pub fn parity(&self) -> Bit {
        self.v_a ^ self.v_b
    }
}

/// Deliberate protocol defects, used to check that the verification machinery notices.
#[derive(Clone, Copy, Debug, PartialEq, Eq, clap::ValueEnum)]
pub enum Fault {
    /// Bob omits the trailing `⊕ 1` of his output rule.
    DropBobFlip,
}

/// `1` if `z ≥ 0`, `0` if `z < 0`.
pub fn sgn(z: f64) -> Result<Bit> {
    if !z.is_finite() {
        return Err(Error::domain("sgn argument", z, "finite reals"));
    }
    Ok(sign_bit(z))
}

#[inline]
pub(crate) fn sign_bit(z: f64) -> Bit {
    (z >= 0.0) as Bit
}

/// Uniform direction on the sphere: `z = 1 - 2u₁`, azimuth `2πu₂`.
/// Rejection-free, exactly [`VECTOR_VARIATES`] variates.
pub fn sample_unit_vector(rng: &mut Stream) -> UnitVector {
    let z = 1.0 - 2.0 * rng.uniform();
    let phi = TAU * rng.uniform();
    let r = (1.0 - z * z).max(0.0).sqrt();
    let (s, c) = phi.sin_cos();
    UnitVector([r * c, r * s, z])
}

pub fn sample_hidden_pair(rng: &mut Stream) -> HiddenVariablePair {
    let lambda1 = sample_unit_vector(rng);
    let lambda2 = sample_unit_vector(rng);
    HiddenVariablePair { lambda1, lambda2 }
}

pub fn alice_input(a_setting: &UnitVector, hidden: &HiddenVariablePair) -> Bit {
    sign_bit(a_setting.dot_unit(&hidden.lambda1)) ^ sign_bit(a_setting.dot_unit(&hidden.lambda2))
}

pub fn alice_output(a: Bit, a_setting: &UnitVector, hidden: &HiddenVariablePair) -> Bit {
    a ^ sign_bit(a_setting.dot_unit(&hidden.lambda1))
}

pub fn bob_input(b_setting: &UnitVector, hidden: &HiddenVariablePair) -> Bit {
    sign_bit(b_setting.dot(&hidden.plus())) ^ sign_bit(b_setting.dot(&hidden.minus()))
}

pub fn bob_output(b: Bit, b_setting: &UnitVector, hidden: &HiddenVariablePair) -> Bit {
    b ^ sign_bit(b_setting.dot(&hidden.plus())) ^ 1
}

/// Round with the box outputs supplied by the caller.
pub fn complete_round(
    hidden: HiddenVariablePair,
    a_setting: &UnitVector,
    b_setting: &UnitVector,
    box_outputs: impl FnOnce(Bit, Bit) -> (Bit, Bit),
    fault: Option<Fault>,
) -> RoundTranscript {
    let x = alice_input(a_setting, &hidden);
    let y = bob_input(b_setting, &hidden);
    let (a, b) = box_outputs(x, y);
    let v_a = alice_output(a, a_setting, &hidden);
    let mut v_b = bob_output(b, b_setting, &hidden);
    if fault == Some(Fault::DropBobFlip) {
        v_b ^= 1;
    }
    RoundTranscript {
        hidden,
        a_setting: *a_setting,
        b_setting: *b_setting,
        x,
        y,
        a,
        b,
        v_a,
        v_b,
    }
}

pub fn run_round(
    p: SpParameter,
    a_setting: &UnitVector,
    b_setting: &UnitVector,
    rng: &mut Stream,
) -> RoundTranscript {
    run_round_with(p, a_setting, b_setting, rng, None)
}

pub fn run_round_with(
    p: SpParameter,
    a_setting: &UnitVector,
    b_setting: &UnitVector,
    rng: &mut Stream,
    fault: Option<Fault>,
) -> RoundTranscript {
    let hidden = sample_hidden_pair(rng);
    complete_round(
        hidden,
        a_setting,
        b_setting,
        |x, y| sample_sp_box(p, x, y, rng),
        fault,
    )
}
