//! Jones-calculus elements of the interference bench.
//!
//! Single-beam elements act on the polarization basis {H, V}. The
//! interferometer itself lives on the composite path⊗polarization basis
//! (U,H), (U,V), (D,H), (D,V); [`on_arm`] lifts a polarization element onto
//! one arm (or both), and [`beam_displacer`] routes polarization between arms.
//!
//! Conventions, fixed project-wide:
//!
//! - half-wave plate at fast-axis angle α: `[[cos2α, sin2α], [sin2α, −cos2α]]`;
//! - quarter-wave plate at α: `e^{−iπ/4} [[cos²α + i sin²α, (1−i) sinα cosα],
//!   [(1−i) sinα cosα, sin²α + i cos²α]]`;
//! - the beam displacer sends H to the upper arm U and leaves V where it is;
//! - the two arms accumulate no relative phase (calibrated interferometer).
//!
//! # Weak-interaction frame
//!
//! The plate pair H3 (γ/2, upper arm) and H4 (−γ/2, lower arm) realizes
//!
//! ```text
//! on_arm(hwp(γ/2), upper) · on_arm(hwp(−γ/2), lower) = exp(−iγ M₂⊗σ_y) · (I ⊗ σ_z)
//! ```
//!
//! where M₂ = |U⟩⟨U| − |D⟩⟨D|. The frame operator `I ⊗ σ_z` ([`weak_interaction_frame`])
//! fixes |H⟩ and flips the sign of |V⟩, so on the pointer-|H⟩ sector the plate
//! pair and the ideal coupling act identically.

mod bench;

pub use bench::{BenchElement, BenchLayout, Detection, DEFAULT_DISPLACEMENT_MM};

use std::f64::consts::{FRAC_1_SQRT_2, FRAC_PI_4, FRAC_PI_8, PI};

use serde::{Deserialize, Serialize};

use crate::algebra::{labels, Basis, Complex, LinearOp, StateVector};
use crate::Result;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum PlateKind {
    Half,
    Quarter,
}

/// Wave plate with its fast axis measured from horizontal, normalized to [0, π).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct WavePlate {
    kind: PlateKind,
    axis_angle: f64,
}

impl WavePlate {
    pub fn new(kind: PlateKind, axis_angle: f64) -> Self {
        let mut a = axis_angle.rem_euclid(PI);
        // rem_euclid can round up to exactly π for tiny negative inputs
        if a >= PI {
            a = 0.0;
        }
        WavePlate {
            kind,
            axis_angle: a,
        }
    }

    pub fn half(axis_angle: f64) -> Self {
        WavePlate::new(PlateKind::Half, axis_angle)
    }

    pub fn quarter(axis_angle: f64) -> Self {
        WavePlate::new(PlateKind::Quarter, axis_angle)
    }

    pub fn kind(&self) -> PlateKind {
        self.kind
    }

    pub fn axis_angle(&self) -> f64 {
        self.axis_angle
    }

    pub fn operator(&self) -> LinearOp {
        match self.kind {
            PlateKind::Half => hwp(self.axis_angle),
            PlateKind::Quarter => qwp(self.axis_angle),
        }
    }
}

/// Which interferometer arm(s) an element sits in.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Arm {
    Upper,
    Lower,
    Both,
}

impl Arm {
    pub fn keyword(self) -> &'static str {
        match self {
            Arm::Upper => "upper",
            Arm::Lower => "lower",
            Arm::Both => "both",
        }
    }
}

/// A wave plate placed on the bench.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ElementPlacement {
    pub plate: WavePlate,
    pub arm: Arm,
}

impl ElementPlacement {
    pub fn new(plate: WavePlate, arm: Arm) -> Self {
        ElementPlacement { plate, arm }
    }

    /// The placement lifted onto the path⊗polarization space.
    pub fn operator(&self) -> LinearOp {
        on_arm(&self.plate.operator(), self.arm).expect("wave plates are 2×2 on {H,V}")
    }
}

/// Half-wave plate Jones matrix.
pub fn hwp(axis_angle: f64) -> LinearOp {
    let (s, c) = (2.0 * axis_angle).sin_cos();
    LinearOp::from_real_rows(Basis::polarization(), [[c, s], [s, -c]]).expect("finite angle")
}

/// Quarter-wave plate Jones matrix.
pub fn qwp(axis_angle: f64) -> LinearOp {
    let (s, c) = axis_angle.sin_cos();
    let i = Complex::i();
    let one = Complex::new(1.0, 0.0);
    let off = (one - i) * (s * c);
    let phase = Complex::from_polar(1.0, -FRAC_PI_4);
    LinearOp::from_rows(
        Basis::polarization(),
        [
            [(c * c + i * (s * s)) * phase, off * phase],
            [off * phase, (s * s + i * (c * c)) * phase],
        ],
    )
    .expect("finite angle")
}

/// Lifts a polarization element onto the composite space:
/// `P_arm ⊗ element + P_other ⊗ I`, or `I ⊗ element` for [`Arm::Both`].
pub fn on_arm(element: &LinearOp, arm: Arm) -> Result<LinearOp> {
    if element.basis() != &Basis::polarization() {
        return Err(crate::Error::BasisMismatch(format!(
            "arm placement needs a polarization element, got {}",
            element.basis()
        )));
    }
    let path = Basis::path();
    let up = LinearOp::projector(&StateVector::basis_state(path.clone(), labels::U)?)?;
    let down = LinearOp::projector(&StateVector::basis_state(path.clone(), labels::D)?)?;
    let id = LinearOp::identity(Basis::polarization());
    match arm {
        Arm::Both => Ok(LinearOp::identity(path).tensor(element)),
        Arm::Upper => up.tensor(element).add(&down.tensor(&id)),
        Arm::Lower => up.tensor(&id).add(&down.tensor(element)),
    }
}

/// Beam displacer on the path⊗polarization space: the H component of the
/// lower arm is displaced into the upper arm and V passes straight through.
/// The (U,H) mode is routed back to (D,H) so the operator is a permutation,
/// hence unitary; on the bench that mode is never populated at a displacer.
pub fn beam_displacer() -> LinearOp {
    LinearOp::from_real_rows(
        Basis::path_polarization(),
        [
            [0.0, 0.0, 1.0, 0.0],
            [0.0, 1.0, 0.0, 0.0],
            [1.0, 0.0, 0.0, 0.0],
            [0.0, 0.0, 0.0, 1.0],
        ],
    )
    .expect("static matrix")
}

/// Port amplitudes of a polarizing beam splitter: (transmitted H, reflected V).
pub fn pbs_split(s: &StateVector) -> Result<(Complex, Complex)> {
    if s.basis() != &Basis::polarization() {
        return Err(crate::Error::BasisMismatch(format!(
            "beam splitter input must be on {{H,V}}, got {}",
            s.basis()
        )));
    }
    Ok((s.amplitudes()[0], s.amplitudes()[1]))
}

/// `I ⊗ |pol⟩⟨pol|` on the composite space: keeps one polarization in both arms.
pub fn polarization_filter(pol: &str) -> Result<LinearOp> {
    let p = LinearOp::projector(&StateVector::basis_state(Basis::polarization(), pol)?)?;
    Ok(LinearOp::identity(Basis::path()).tensor(&p))
}

/// Path observable M₂ = |U⟩⟨U| − |D⟩⟨D|.
pub fn path_observable() -> LinearOp {
    LinearOp::pauli_z(Basis::path()).expect("static matrix")
}

/// Local polarization frame relating the H3/H4 plate pair to exp(−iγ M₂⊗σ_y).
pub fn weak_interaction_frame() -> LinearOp {
    LinearOp::identity(Basis::path()).tensor(&LinearOp::pauli_z(Basis::polarization()).unwrap())
}

/// Ideal coupling exp(−iγ M₂⊗σ_y).
pub fn weak_interaction(gamma: f64) -> LinearOp {
    let sy = LinearOp::pauli_y(Basis::polarization()).unwrap();
    path_observable()
        .tensor(&sy)
        .exp_involution(gamma)
        .expect("M₂⊗σ_y is an involution")
}

/// Pointer-analysis outcomes. `R` is the +1 eigenstate of σ_y, (|H⟩ + i|V⟩)/√2,
/// so that ⟨σ_y⟩ = (I_R − I_L)/(I_R + I_L). `H` and `V` read the pointer in
/// its own basis, which fixes the post-selection rate and the inversion branch.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum PointerOutcome {
    Plus,
    Minus,
    R,
    L,
    H,
    V,
}

impl PointerOutcome {
    pub const ALL: [PointerOutcome; 6] = [
        PointerOutcome::Plus,
        PointerOutcome::Minus,
        PointerOutcome::R,
        PointerOutcome::L,
        PointerOutcome::H,
        PointerOutcome::V,
    ];

    /// Polarization state selected by this outcome.
    pub fn state(self) -> StateVector {
        let h = FRAC_1_SQRT_2;
        let amps = match self {
            PointerOutcome::Plus => [Complex::new(h, 0.0), Complex::new(h, 0.0)],
            PointerOutcome::Minus => [Complex::new(h, 0.0), Complex::new(-h, 0.0)],
            PointerOutcome::R => [Complex::new(h, 0.0), Complex::new(0.0, h)],
            PointerOutcome::L => [Complex::new(h, 0.0), Complex::new(0.0, -h)],
            PointerOutcome::H => [Complex::new(1.0, 0.0), Complex::new(0.0, 0.0)],
            PointerOutcome::V => [Complex::new(0.0, 0.0), Complex::new(1.0, 0.0)],
        };
        StateVector::new(Basis::polarization(), amps.to_vec()).unwrap()
    }

    /// Q1 and H5 settings that rotate this outcome onto the transmitted (H)
    /// port of the analyzer PBS. Q1 sits at π/4 for the diagonal and circular
    /// bases and at 0 for H/V.
    pub fn analyzer_plates(self) -> (WavePlate, WavePlate) {
        let (q1, h5) = match self {
            PointerOutcome::Plus => (FRAC_PI_4, FRAC_PI_8),
            PointerOutcome::Minus => (FRAC_PI_4, -FRAC_PI_8),
            PointerOutcome::R => (FRAC_PI_4, 0.0),
            PointerOutcome::L => (FRAC_PI_4, FRAC_PI_4),
            PointerOutcome::H => (0.0, 0.0),
            PointerOutcome::V => (0.0, FRAC_PI_4),
        };
        (WavePlate::quarter(q1), WavePlate::half(h5))
    }

    /// Analyzer optics (H5 · Q1) on a single beam.
    pub fn analyzer_operator(self) -> LinearOp {
        let (q1, h5) = self.analyzer_plates();
        h5.operator().compose(&q1.operator()).unwrap()
    }
}
