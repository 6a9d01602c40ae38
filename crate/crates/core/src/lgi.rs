//! Leggett-Garg quantities.
//!
//! The n-time combination for dichotomic observables is
//! Kₙ = ⟨M₁M₂⟩ + ⟨M₂M₃⟩ + … + ⟨Mₙ₋₁Mₙ⟩ − ⟨M₁Mₙ⟩. For three times with the
//! first outcome fixed to +1 by preparation, the signed form
//! `1 − m₂⟨M₂⟩ − m₂m₃⟨M₂M₃⟩ + m₃⟨M₃⟩ ≥ 0` splits into the four two-time
//! inequalities collected in [`KQuadruple`].

use std::f64::consts::{FRAC_PI_2, PI};

use serde::{Deserialize, Serialize};

use crate::algebra::{Basis, Complex, LinearOp, StateVector};
use crate::weakmeas::WeakValue;
use crate::{tol, Error, Result};

/// Largest n accepted by the brute-force bound enumeration.
pub const MAX_TIMES: usize = 24;

/// ⟨M₂⟩, ⟨M₃⟩ and ⟨M₂M₃⟩ with M₁ absorbed into the preparation.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CorrelationSet {
    pub m2: f64,
    pub m3: f64,
    pub m23: f64,
}

impl CorrelationSet {
    pub fn new(m2: f64, m3: f64, m23: f64) -> Result<Self> {
        for (name, v) in [("⟨M₂⟩", m2), ("⟨M₃⟩", m3), ("⟨M₂M₃⟩", m23)] {
            if !v.is_finite() || v.abs() > 1.0 + tol::NORM {
                return Err(Error::Malformed(format!("{name} = {v} outside [−1, 1]")));
            }
        }
        Ok(CorrelationSet { m2, m3, m23 })
    }
}

/// ⟨MᵢMⱼ⟩ = Σ mᵢmⱼ P(mᵢ, mⱼ) from a joint table indexed by outcome
/// (0 ↦ +1, 1 ↦ −1).
pub fn correlator(joint: &[[f64; 2]; 2]) -> f64 {
    joint[0][0] - joint[0][1] - joint[1][0] + joint[1][1]
}

/// The four two-time inequalities K₃₁ … K₃₄ (each ≥ 0 under macrorealism).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct KQuadruple {
    pub k31: f64,
    pub k32: f64,
    pub k33: f64,
    pub k34: f64,
}

impl KQuadruple {
    pub const NAMES: [&'static str; 4] = ["k31", "k32", "k33", "k34"];

    pub fn as_array(&self) -> [f64; 4] {
        [self.k31, self.k32, self.k33, self.k34]
    }

    pub fn from_array(k: [f64; 4]) -> Self {
        KQuadruple {
            k31: k[0],
            k32: k[1],
            k33: k[2],
            k34: k[3],
        }
    }

    pub fn sum(&self) -> f64 {
        self.as_array().iter().sum()
    }

    /// Names and values of the inequalities that are negative by more than `slack`.
    pub fn violations(&self, slack: f64) -> Vec<(&'static str, f64)> {
        Self::NAMES
            .into_iter()
            .zip(self.as_array())
            .filter(|&(_, k)| k < -slack)
            .collect()
    }

    pub fn max_abs_diff(&self, other: &KQuadruple) -> f64 {
        self.as_array()
            .iter()
            .zip(other.as_array())
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max)
    }
}

/// Classical range of Kₙ.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BoundPair {
    pub lower: f64,
    pub upper: f64,
    pub n: usize,
}

/// `1 − m₂⟨M₂⟩ − m₂m₃⟨M₂M₃⟩ + m₃⟨M₃⟩` for outcome signs m₂, m₃ = ±1.
pub fn k3_signed(c: &CorrelationSet, m2: f64, m3: f64) -> f64 {
    1.0 - m2 * c.m2 - m2 * m3 * c.m23 + m3 * c.m3
}

pub fn k3_from_correlations(c: &CorrelationSet) -> KQuadruple {
    KQuadruple {
        k31: k3_signed(c, 1.0, 1.0),
        k32: k3_signed(c, -1.0, 1.0),
        k33: k3_signed(c, 1.0, -1.0),
        k34: k3_signed(c, -1.0, -1.0),
    }
}

/// K₃ᵢ = 2p(1 ∓ Re w) per post-selection branch.
///
/// A branch with zero probability contributes 0 whatever its (undefined)
/// weak value; pass any finite placeholder.
pub fn k3_from_weak(
    p_plus: f64,
    p_minus: f64,
    w_plus: WeakValue,
    w_minus: WeakValue,
) -> Result<KQuadruple> {
    if !(p_plus.is_finite() && p_minus.is_finite())
        || (p_plus + p_minus - 1.0).abs() > 1e-9
        || p_plus < -1e-12
        || p_minus < -1e-12
    {
        return Err(Error::InconsistentProbabilities(p_plus, p_minus));
    }
    for w in [w_plus, w_minus] {
        if w.im().abs() > 1e-9 {
            return Err(Error::ComplexWeakValue(w.im()));
        }
    }
    let branch = |p: f64, w: f64| {
        if p == 0.0 {
            (0.0, 0.0)
        } else {
            (2.0 * p * (1.0 - w), 2.0 * p * (1.0 + w))
        }
    };
    let (k31, k32) = branch(p_plus, w_plus.re());
    let (k33, k34) = branch(p_minus, w_minus.re());
    Ok(KQuadruple { k31, k32, k33, k34 })
}

/// Closed-form quadruple for the bench states at preparation angle θ.
pub fn k3_closed_form(theta: f64) -> KQuadruple {
    let (s, c) = theta.sin_cos();
    KQuadruple {
        k31: 2.0 * s * (c + s),
        k32: 2.0 * c * (c + s),
        k33: 2.0 * s * (s - c),
        k34: 2.0 * c * (c - s),
    }
}

/// Kₙ from a two-time correlator function `corr(i, j)`, times 1-based.
pub fn kn_from_correlators(n: usize, corr: impl Fn(usize, usize) -> f64) -> f64 {
    (1..n).map(|i| corr(i, i + 1)).sum::<f64>() - corr(1, n)
}

fn check_times(n: usize) -> Result<()> {
    if (3..=MAX_TIMES).contains(&n) {
        Ok(())
    } else {
        Err(Error::InvalidConfig(format!(
            "number of measurement times must be in 3..={MAX_TIMES}, got {n}"
        )))
    }
}

/// Classical range of Kₙ by enumerating all 2ⁿ deterministic sign assignments.
pub fn classical_bounds(n: usize) -> Result<BoundPair> {
    check_times(n)?;
    let (mut lower, mut upper) = (i64::MAX, i64::MIN);
    for mask in 0u32..(1u32 << n) {
        let sign = |i: usize| if mask >> (i - 1) & 1 == 1 { -1i64 } else { 1 };
        let k: i64 = (1..n).map(|i| sign(i) * sign(i + 1)).sum::<i64>() - sign(1) * sign(n);
        lower = lower.min(k);
        upper = upper.max(k);
    }
    Ok(BoundPair {
        lower: lower as f64,
        upper: upper as f64,
        n,
    })
}

/// Odd n: [−n, n−2]; even n: [−(n−2), n−2].
pub fn classical_bounds_closed_form(n: usize) -> Result<BoundPair> {
    check_times(n)?;
    let nf = n as f64;
    let lower = if n % 2 == 1 { -nf } else { -(nf - 2.0) };
    Ok(BoundPair {
        lower,
        upper: nf - 2.0,
        n,
    })
}

/// n·cos(π/n).
pub fn luders_bound(n: usize) -> f64 {
    let nf = n as f64;
    nf * (PI / nf).cos()
}

fn qubit_basis() -> Basis {
    Basis::new(["up", "down"]).expect("static basis")
}

/// ±1 projectors (I ± A)/2 of a dichotomic observable.
fn spectral_projectors(obs: &LinearOp) -> [(f64, LinearOp); 2] {
    let id = LinearOp::identity(obs.basis().clone());
    let half = Complex::new(0.5, 0.0);
    [
        (1.0, id.add(obs).unwrap().scale(half)),
        (-1.0, id.sub(obs).unwrap().scale(half)),
    ]
}

fn check_dichotomic(obs: &LinearOp) -> Result<()> {
    let d = obs.involution_defect();
    if d > tol::OPERATOR {
        return Err(Error::NotInvolutory(d));
    }
    let h = obs.distance(&obs.adjoint());
    if h > tol::OPERATOR {
        return Err(Error::NotHermitian(h));
    }
    Ok(())
}

/// Joint outcome probabilities of measuring `first` then `second` on `state`,
/// with Lüders update in between. Indexed by outcome (0 ↦ +1, 1 ↦ −1).
pub fn sequential_joint(
    state: &StateVector,
    first: &LinearOp,
    second: &LinearOp,
) -> Result<[[f64; 2]; 2]> {
    check_dichotomic(first)?;
    check_dichotomic(second)?;
    let mut joint = [[0.0; 2]; 2];
    for (a, (_, pa)) in spectral_projectors(first).iter().enumerate() {
        let collapsed = pa.apply(state)?;
        for (b, (_, qb)) in spectral_projectors(second).iter().enumerate() {
            joint[a][b] = qb.apply(&collapsed)?.norm_sqr();
        }
    }
    Ok(joint)
}

/// Correlations of the three-time scenario from sequential projective
/// measurements. ⟨M₃⟩ is taken without an intermediate t₂ measurement.
pub fn sequential_correlators(
    pre: &StateVector,
    obs2: &LinearOp,
    obs3: &LinearOp,
) -> Result<CorrelationSet> {
    check_dichotomic(obs2)?;
    check_dichotomic(obs3)?;
    let m2 = obs2.expectation(pre)?.re;
    let m3 = obs3.expectation(pre)?.re;
    let m23 = correlator(&sequential_joint(pre, obs2, obs3)?);
    CorrelationSet::new(m2, m3, m23)
}

/// Kₙ for a qubit measured in σ_z at n equally spaced times, rotated by φ
/// about y between neighbouring times. Each correlator is obtained from its
/// own run of two sequential Lüders measurements, averaged over the two σ_z
/// eigenstates as initial states (equivalent to a maximally mixed start).
pub fn quantum_kn_precession(n: usize, phi: f64) -> Result<f64> {
    check_times(n)?;
    let basis = qubit_basis();
    let sz = LinearOp::pauli_z(basis.clone())?;
    let sy = LinearOp::pauli_y(basis.clone())?;
    let step = sy.exp_involution(phi / 2.0)?;
    let mut powers = vec![LinearOp::identity(basis.clone())];
    for k in 1..n {
        powers.push(step.compose(&powers[k - 1])?);
    }
    let starts = [
        StateVector::basis_state(basis.clone(), "up")?,
        StateVector::basis_state(basis, "down")?,
    ];
    let projectors = spectral_projectors(&sz);
    let corr = |i: usize, j: usize| -> f64 {
        let mut total = 0.0;
        for start in &starts {
            let at_i = powers[i - 1].apply(start).unwrap();
            for (a, pa) in &projectors {
                let after = powers[j - i].apply(&pa.apply(&at_i).unwrap()).unwrap();
                for (b, pb) in &projectors {
                    total += a * b * pb.apply(&after).unwrap().norm_sqr();
                }
            }
        }
        total / starts.len() as f64
    };
    Ok(kn_from_correlators(n, corr))
}

/// (n − 1) cos φ − cos((n − 1) φ).
pub fn kn_precession_closed_form(n: usize, phi: f64) -> f64 {
    let m = (n - 1) as f64;
    m * phi.cos() - (m * phi).cos()
}

/// Maximizes [`quantum_kn_precession`] over φ ∈ [0, π]. Returns (φ*, Kₙ(φ*)).
pub fn maximize_precession(n: usize) -> Result<(f64, f64)> {
    check_times(n)?;
    Ok(maximize(
        |phi| quantum_kn_precession(n, phi).expect("n validated"),
        0.0,
        PI,
    ))
}

/// Minimum of one closed-form two-time quantity over θ ∈ [0, π/2].
/// `index` 0…3 selects K₃₁ … K₃₄. Returns (θ*, K(θ*)).
pub fn minimize_closed_form(index: usize) -> (f64, f64) {
    let (theta, neg) = maximize(|t| -k3_closed_form(t).as_array()[index], 0.0, FRAC_PI_2);
    (theta, -neg)
}

/// Maximum of `f` on [lo, hi]: 720-point grid search, then golden-section
/// refinement around the best grid point.
pub fn maximize(f: impl Fn(f64) -> f64, lo: f64, hi: f64) -> (f64, f64) {
    let grid = 720;
    let h = (hi - lo) / grid as f64;
    let best = (0..=grid)
        .map(|k| lo + k as f64 * h)
        .max_by(|&a, &b| f(a).total_cmp(&f(b)))
        .unwrap();
    let (mut a, mut b) = ((best - h).max(lo), (best + h).min(hi));
    let ratio = (5f64.sqrt() - 1.0) / 2.0;
    let mut x1 = b - ratio * (b - a);
    let mut x2 = a + ratio * (b - a);
    let (mut f1, mut f2) = (f(x1), f(x2));
    while b - a > 1e-10 {
        if f1 < f2 {
            a = x1;
            x1 = x2;
            f1 = f2;
            x2 = a + ratio * (b - a);
            f2 = f(x2);
        } else {
            b = x2;
            x2 = x1;
            f2 = f1;
            x1 = b - ratio * (b - a);
            f1 = f(x1);
        }
    }
    let x = 0.5 * (a + b);
    (x, f(x))
}
