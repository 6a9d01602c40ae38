//! Weak values in a pre/post-selected (two-state-vector) context, and the
//! exact, non-perturbative relation between a weak value and the pointer
//! polarization after a coupling exp(−iγ M₂⊗σ_y):
//!
//! ```text
//! ⟨σ_x⟩ = sin2γ · Re w / (cos²γ + sin²γ |w|²)
//! ⟨σ_y⟩ = sin2γ · Im w / (cos²γ + sin²γ |w|²)
//! ```
//!
//! The readouts are obtained from port intensities as (I₊ − I₋)/(I₊ + I₋)
//! and (I_R − I_L)/(I_R + I_L), and [`invert_pointer`] maps them back to w.

use std::f64::consts::{FRAC_1_SQRT_2, FRAC_PI_2};

use serde::{Deserialize, Serialize};

use crate::algebra::{Basis, Complex, LinearOp, StateVector};
use crate::expsim::DetectorRecord;
use crate::{tol, Error, Result};

/// Pre-selected path state cos θ |U⟩ + sin θ |D⟩.
pub fn pre_selected(theta: f64) -> StateVector {
    StateVector::from_real(Basis::path(), &[theta.cos(), theta.sin()]).expect("finite angle")
}

/// Post-selection port: |±m₃⟩ = (|U⟩ ± |D⟩)/√2, read at detectors D2 / D3.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PostPort {
    PlusM3,
    MinusM3,
}

impl PostPort {
    pub const BOTH: [PostPort; 2] = [PostPort::PlusM3, PostPort::MinusM3];

    pub fn state(self) -> StateVector {
        let sign = match self {
            PostPort::PlusM3 => 1.0,
            PostPort::MinusM3 => -1.0,
        };
        StateVector::from_real(Basis::path(), &[FRAC_1_SQRT_2, sign * FRAC_1_SQRT_2]).unwrap()
    }

    pub fn detector(self) -> &'static str {
        match self {
            PostPort::PlusM3 => "D2",
            PostPort::MinusM3 => "D3",
        }
    }

    pub fn short_name(self) -> &'static str {
        match self {
            PostPort::PlusM3 => "plus",
            PostPort::MinusM3 => "minus",
        }
    }
}

/// Final observable M₃ = 2|+m₃⟩⟨+m₃| − I.
pub fn final_observable() -> LinearOp {
    LinearOp::projector(&PostPort::PlusM3.state())
        .unwrap()
        .scale(Complex::new(2.0, 0.0))
        .sub(&LinearOp::identity(Basis::path()))
        .unwrap()
}

#[derive(Debug, Clone, PartialEq)]
pub struct TwoStateVector {
    pre: StateVector,
    post: StateVector,
    overlap: Complex,
}

impl TwoStateVector {
    pub fn new(pre: StateVector, post: StateVector) -> Result<Self> {
        for s in [&pre, &post] {
            if !s.is_normalized() {
                return Err(Error::NotNormalized(s.norm_sqr()));
            }
        }
        let overlap = post.inner(&pre)?;
        Ok(TwoStateVector { pre, post, overlap })
    }

    /// The bench context: pre-selection at θ, post-selection at `port`.
    pub fn bench(theta: f64, port: PostPort) -> Self {
        TwoStateVector::new(pre_selected(theta), port.state()).expect("normalized states")
    }

    pub fn pre(&self) -> &StateVector {
        &self.pre
    }

    pub fn post(&self) -> &StateVector {
        &self.post
    }

    /// ⟨post|pre⟩.
    pub fn overlap(&self) -> Complex {
        self.overlap
    }

    /// ⟨pre|post⟩⟨post|obs|pre⟩ = p·w, finite even when the overlap vanishes.
    pub fn weighted_weak_value(&self, obs: &LinearOp) -> Result<Complex> {
        let num = self.post.inner(&obs.apply(&self.pre)?)?;
        Ok(self.overlap.conj() * num)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct WeakValue(Complex);

impl WeakValue {
    pub fn new(value: Complex) -> Result<Self> {
        if value.re.is_finite() && value.im.is_finite() {
            Ok(WeakValue(value))
        } else {
            Err(Error::NonFinite("weak value"))
        }
    }

    pub fn real(value: f64) -> Self {
        WeakValue::new(Complex::new(value, 0.0)).expect("finite weak value")
    }

    pub fn value(&self) -> Complex {
        self.0
    }

    pub fn re(&self) -> f64 {
        self.0.re
    }

    pub fn im(&self) -> f64 {
        self.0.im
    }

    pub fn norm(&self) -> f64 {
        self.0.norm()
    }

    /// Real part outside the eigenvalue range [−1, 1] of a ±1 observable.
    pub fn is_anomalous(&self) -> bool {
        self.0.re.abs() > 1.0
    }
}

/// Coupling strength γ (radians), |γ| < π/2.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Coupling {
    gamma: f64,
}

impl Coupling {
    pub fn new(gamma: f64) -> Result<Self> {
        if !gamma.is_finite() {
            return Err(Error::NonFinite("coupling"));
        }
        if gamma.abs() >= FRAC_PI_2 {
            return Err(Error::CouplingOutOfRange(gamma));
        }
        Ok(Coupling { gamma })
    }

    pub fn degrees(gamma_deg: f64) -> Result<Self> {
        Coupling::new(gamma_deg.to_radians())
    }

    pub fn gamma(&self) -> f64 {
        self.gamma
    }
}

/// Pointer expectation values (⟨σ_x⟩, ⟨σ_y⟩) conditioned on post-selection.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PointerReadout {
    pub sx: f64,
    pub sy: f64,
    /// Set when a noisy ratio fell outside [−1, 1] and was clamped.
    pub clamped: bool,
}

impl PointerReadout {
    pub fn new(sx: f64, sy: f64) -> Self {
        PointerReadout {
            sx,
            sy,
            clamped: false,
        }
    }

    pub fn radius(&self) -> f64 {
        self.sx.hypot(self.sy)
    }
}

/// ⟨post|obs|pre⟩ / ⟨post|pre⟩ with the default overlap threshold.
pub fn weak_value(obs: &LinearOp, ctx: &TwoStateVector) -> Result<WeakValue> {
    weak_value_with_threshold(obs, ctx, tol::OVERLAP)
}

pub fn weak_value_with_threshold(
    obs: &LinearOp,
    ctx: &TwoStateVector,
    min_overlap: f64,
) -> Result<WeakValue> {
    let ov = ctx.overlap();
    if ov.norm() <= min_overlap {
        return Err(Error::OrthogonalPostselection(ov.norm()));
    }
    let num = ctx.post.inner(&obs.apply(&ctx.pre)?)?;
    WeakValue::new(num / ov)
}

/// |⟨post|pre⟩|².
pub fn postselect_prob(ctx: &TwoStateVector) -> f64 {
    ctx.overlap().norm_sqr().min(1.0)
}

/// N-fold amplified post-selection probability, capped at 1.
pub fn amplified_prob(p: f64, n_factor: u32) -> f64 {
    (f64::from(n_factor) * p).min(1.0)
}

/// Exact pointer readout for weak value `w` at coupling `c`.
pub fn pointer_expectations(w: WeakValue, c: Coupling) -> PointerReadout {
    let (s, co) = c.gamma.sin_cos();
    let s2g = (2.0 * c.gamma).sin();
    let den = co * co + s * s * w.0.norm_sqr();
    if den == 0.0 {
        // |γ| < π/2 keeps cos γ > 0
        return PointerReadout::new(0.0, 0.0);
    }
    PointerReadout::new(s2g * w.0.re / den, s2g * w.0.im / den)
}

fn clamp_ratio(x: f64, clamped: &mut bool) -> f64 {
    if x > 1.0 {
        *clamped = true;
        1.0
    } else if x < -1.0 {
        *clamped = true;
        -1.0
    } else {
        x
    }
}

/// Readout from the four analyzer intensities, ratios clamped to [−1, 1].
pub fn expectations_from_intensities(rec: &DetectorRecord) -> Result<PointerReadout> {
    let sx_den = rec.i_plus + rec.i_minus;
    let sy_den = rec.i_r + rec.i_l;
    if sx_den.is_nan() || sx_den <= 0.0 {
        return Err(Error::ZeroIntensity("σ_x"));
    }
    if sy_den.is_nan() || sy_den <= 0.0 {
        return Err(Error::ZeroIntensity("σ_y"));
    }
    let mut clamped = false;
    let sx = clamp_ratio((rec.i_plus - rec.i_minus) / sx_den, &mut clamped);
    let sy = clamp_ratio((rec.i_r - rec.i_l) / sy_den, &mut clamped);
    Ok(PointerReadout { sx, sy, clamped })
}

/// Inversion branch singled out by the pointer's H/V intensities: the weak
/// root holds exactly when cos γ |⟨f|i⟩| ≥ |sin γ ⟨f|M|i⟩|, i.e. I_H ≥ I_V.
pub fn branch_from_intensities(rec: &DetectorRecord) -> Branch {
    if rec.i_h >= rec.i_v {
        Branch::Weak
    } else {
        Branch::Strong
    }
}

/// Post-selection probability |⟨f|i⟩|² from the H-analyzer intensity.
///
/// The coupling leaves cos γ ⟨f|i⟩ on the pointer's H component, while the
/// port as a whole carries |⟨f|i⟩|²(cos²γ + sin²γ|w|²).
pub fn postselect_from_intensities(rec: &DetectorRecord, c: Coupling) -> Result<f64> {
    if rec.reference.is_nan() || rec.reference <= 0.0 {
        return Err(Error::ZeroIntensity("reference"));
    }
    let cos = c.gamma.cos();
    Ok(rec.i_h / rec.reference / (cos * cos))
}

/// Which root of the quadratic in |w| to return.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
pub enum Branch {
    /// |w| ≤ |cot γ|.
    #[default]
    Weak,
    /// |w| ≥ |cot γ|.
    Strong,
    Both,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Inversion {
    One(WeakValue),
    Two { weak: WeakValue, strong: WeakValue },
}

impl Inversion {
    /// The weak-branch root (the only root when there is one).
    pub fn weak(&self) -> WeakValue {
        match *self {
            Inversion::One(w) | Inversion::Two { weak: w, .. } => w,
        }
    }

    pub fn strong(&self) -> WeakValue {
        match *self {
            Inversion::One(w) | Inversion::Two { strong: w, .. } => w,
        }
    }
}

/// Recovers the weak value from a pointer readout.
///
/// With r = √(sx² + sy²) the modulus solves r sin²γ |w|² − |sin2γ| |w| + r cos²γ = 0,
/// so |w| = |cot γ| (1 ± √(1 − r²)) / r; the phase follows (sx, sy), with the
/// sign of sin 2γ carried through. r = 0 gives w = 0 and r = 1 the double
/// root |cot γ|.
pub fn invert_pointer(r: PointerReadout, c: Coupling, branch: Branch) -> Result<Inversion> {
    if c.gamma == 0.0 {
        return Err(Error::ZeroCoupling);
    }
    if !(r.sx.is_finite() && r.sy.is_finite()) {
        return Err(Error::NonFinite("pointer readout"));
    }
    let mut radius = r.radius();
    if radius > 1.0 + tol::READOUT {
        return Err(Error::NoRealRoot(radius));
    }
    if radius == 0.0 {
        // the strong root runs off to infinity: orthogonal post-selection
        return match branch {
            Branch::Strong => Err(Error::OrthogonalPostselection(0.0)),
            _ => Ok(Inversion::One(WeakValue::real(0.0))),
        };
    }
    radius = radius.min(1.0);
    let cot = (c.gamma.cos() / c.gamma.sin()).abs();
    let sign = (2.0 * c.gamma).sin().signum();
    let root = (1.0 - radius * radius).sqrt();
    let unit = Complex::new(r.sx, r.sy) * (sign / r.radius());
    let weak = WeakValue::new(unit * (cot * radius / (1.0 + root)))?;
    if root == 0.0 {
        return Ok(Inversion::One(weak));
    }
    let strong = WeakValue::new(unit * (cot * (1.0 + root) / radius))?;
    Ok(match branch {
        Branch::Weak => Inversion::One(weak),
        Branch::Strong => Inversion::One(strong),
        Branch::Both => Inversion::Two { weak, strong },
    })
}
