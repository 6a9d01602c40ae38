//! Dense complex linear algebra over small labeled bases.
//!
//! Every state and operator carries its [`Basis`]: an ordered list of
//! symbolic [`Label`]s. Operations check that bases agree instead of silently
//! reordering, and tensor products build ordered-pair labels with the first
//! operand as the slow index. Dimensions are tiny (2 and 4 in practice) so
//! everything is stored as flat `Vec<Complex>` in row-major order.

use std::fmt;
use std::sync::Arc;

pub use num_complex::Complex64 as Complex;

use crate::{tol, Error, Result};

/// Canonical symbols for the bases used on the bench.
pub mod labels {
    /// Upper interferometer arm.
    pub const U: &str = "U";
    /// Lower interferometer arm.
    pub const D: &str = "D";
    /// Horizontal polarization.
    pub const H: &str = "H";
    /// Vertical polarization.
    pub const V: &str = "V";
}

const ZERO: Complex = Complex::new(0.0, 0.0);
const ONE: Complex = Complex::new(1.0, 0.0);

/// A basis element name: either a symbol or an ordered pair produced by a
/// tensor product.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum Label {
    Sym(String),
    Pair(Box<Label>, Box<Label>),
}

impl Label {
    pub fn sym(name: impl Into<String>) -> Self {
        Label::Sym(name.into())
    }

    pub fn pair(a: Label, b: Label) -> Self {
        Label::Pair(Box::new(a), Box::new(b))
    }

    /// The leaf symbols in order, ignoring grouping.
    pub fn leaves(&self) -> Vec<&str> {
        match self {
            Label::Sym(s) => vec![s.as_str()],
            Label::Pair(a, b) => {
                let mut out = a.leaves();
                out.extend(b.leaves());
                out
            }
        }
    }
}

impl fmt::Display for Label {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Label::Sym(s) => f.write_str(s),
            Label::Pair(a, b) => write!(f, "({a},{b})"),
        }
    }
}

impl From<&str> for Label {
    fn from(s: &str) -> Self {
        Label::sym(s)
    }
}

/// Ordered, duplicate-free list of labels. Cheap to clone.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Basis(Arc<[Label]>);

impl Basis {
    pub fn new<L: Into<Label>>(labels: impl IntoIterator<Item = L>) -> Result<Self> {
        let labels: Vec<Label> = labels.into_iter().map(Into::into).collect();
        if labels.is_empty() {
            return Err(Error::Malformed(
                "basis must have at least one label".into(),
            ));
        }
        for (i, l) in labels.iter().enumerate() {
            if labels[..i].contains(l) {
                return Err(Error::Malformed(format!("duplicate basis label {l}")));
            }
        }
        Ok(Basis(labels.into()))
    }

    /// Path basis {U, D}.
    pub fn path() -> Self {
        Basis::new([labels::U, labels::D]).expect("static basis")
    }

    /// Polarization basis {H, V}.
    pub fn polarization() -> Self {
        Basis::new([labels::H, labels::V]).expect("static basis")
    }

    /// Composite path⊗polarization basis: (U,H), (U,V), (D,H), (D,V).
    pub fn path_polarization() -> Self {
        Basis::path().tensor(&Basis::polarization())
    }

    pub fn dim(&self) -> usize {
        self.0.len()
    }

    pub fn labels(&self) -> &[Label] {
        &self.0
    }

    pub fn index_of(&self, label: &Label) -> Option<usize> {
        self.0.iter().position(|l| l == label)
    }

    /// Row-major product basis, `self` as the slow index.
    pub fn tensor(&self, other: &Basis) -> Basis {
        let labels: Vec<Label> = self
            .0
            .iter()
            .flat_map(|a| {
                other
                    .0
                    .iter()
                    .map(move |b| Label::pair(a.clone(), b.clone()))
            })
            .collect();
        Basis(labels.into())
    }

    /// True when both bases list the same leaf symbols in the same order,
    /// whatever the pair grouping.
    pub fn same_up_to_regrouping(&self, other: &Basis) -> bool {
        self.dim() == other.dim()
            && self
                .0
                .iter()
                .zip(other.0.iter())
                .all(|(a, b)| a.leaves() == b.leaves())
    }

    fn check_same(&self, other: &Basis, what: &str) -> Result<()> {
        if self == other {
            Ok(())
        } else {
            Err(Error::BasisMismatch(format!("{what}: {self} vs {other}")))
        }
    }
}

impl fmt::Display for Basis {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str("{")?;
        for (i, l) in self.0.iter().enumerate() {
            if i > 0 {
                f.write_str(", ")?;
            }
            write!(f, "{l}")?;
        }
        f.write_str("}")
    }
}

fn all_finite(values: &[Complex]) -> bool {
    values.iter().all(|z| z.re.is_finite() && z.im.is_finite())
}

/// Pure state as an amplitude vector over a labeled basis.
#[derive(Debug, Clone, PartialEq)]
pub struct StateVector {
    basis: Basis,
    amps: Vec<Complex>,
}

impl StateVector {
    pub fn new(basis: Basis, amps: Vec<Complex>) -> Result<Self> {
        if amps.len() != basis.dim() {
            return Err(Error::Malformed(format!(
                "{} amplitudes for a {}-dimensional basis",
                amps.len(),
                basis.dim()
            )));
        }
        if !all_finite(&amps) {
            return Err(Error::NonFinite("state amplitudes"));
        }
        Ok(StateVector { basis, amps })
    }

    pub fn from_real(basis: Basis, amps: &[f64]) -> Result<Self> {
        StateVector::new(basis, amps.iter().map(|&a| Complex::new(a, 0.0)).collect())
    }

    /// The basis vector for `label`.
    pub fn basis_state(basis: Basis, label: impl Into<Label>) -> Result<Self> {
        let label = label.into();
        let idx = basis
            .index_of(&label)
            .ok_or_else(|| Error::BasisMismatch(format!("label {label} not in {basis}")))?;
        let mut amps = vec![ZERO; basis.dim()];
        amps[idx] = ONE;
        Ok(StateVector { basis, amps })
    }

    pub fn basis(&self) -> &Basis {
        &self.basis
    }

    pub fn amplitudes(&self) -> &[Complex] {
        &self.amps
    }

    pub fn amplitude(&self, label: &Label) -> Option<Complex> {
        self.basis.index_of(label).map(|i| self.amps[i])
    }

    pub fn dim(&self) -> usize {
        self.amps.len()
    }

    pub fn norm_sqr(&self) -> f64 {
        self.amps.iter().map(|z| z.norm_sqr()).sum()
    }

    pub fn norm(&self) -> f64 {
        self.norm_sqr().sqrt()
    }

    pub fn is_normalized(&self) -> bool {
        (self.norm_sqr() - 1.0).abs() <= tol::NORM
    }

    /// Rescales to unit norm; fails on the zero vector.
    pub fn normalized(&self) -> Result<Self> {
        let n = self.norm();
        if n == 0.0 {
            return Err(Error::NotNormalized(0.0));
        }
        Ok(self.scale(Complex::new(1.0 / n, 0.0)))
    }

    pub fn scale(&self, k: Complex) -> Self {
        StateVector {
            basis: self.basis.clone(),
            amps: self.amps.iter().map(|a| a * k).collect(),
        }
    }

    pub fn add(&self, other: &StateVector) -> Result<Self> {
        self.basis.check_same(&other.basis, "add")?;
        Ok(StateVector {
            basis: self.basis.clone(),
            amps: self
                .amps
                .iter()
                .zip(&other.amps)
                .map(|(a, b)| a + b)
                .collect(),
        })
    }

    pub fn sub(&self, other: &StateVector) -> Result<Self> {
        self.add(&other.scale(-ONE))
    }

    /// ⟨self|other⟩, conjugating `self`.
    pub fn inner(&self, other: &StateVector) -> Result<Complex> {
        self.basis.check_same(&other.basis, "inner product")?;
        Ok(self
            .amps
            .iter()
            .zip(&other.amps)
            .map(|(a, b)| a.conj() * b)
            .sum())
    }

    pub fn tensor(&self, other: &StateVector) -> StateVector {
        let amps = self
            .amps
            .iter()
            .flat_map(|a| other.amps.iter().map(move |b| a * b))
            .collect();
        StateVector {
            basis: self.basis.tensor(&other.basis),
            amps,
        }
    }

    /// Same physical state: |⟨a|b⟩| = ‖a‖‖b‖ and equal norms, within `tol`.
    pub fn equal_up_to_phase(&self, other: &StateVector, tol: f64) -> bool {
        match self.inner(other) {
            Ok(ov) => {
                let (na, nb) = (self.norm(), other.norm());
                (na - nb).abs() <= tol && (ov.norm() - na * nb).abs() <= tol
            }
            Err(_) => false,
        }
    }

    /// Largest entrywise deviation from `other`; infinite on basis mismatch.
    pub fn distance(&self, other: &StateVector) -> f64 {
        if self.basis != other.basis {
            return f64::INFINITY;
        }
        self.amps
            .iter()
            .zip(&other.amps)
            .map(|(a, b)| (a - b).norm())
            .fold(0.0, f64::max)
    }
}

/// Square complex matrix acting on a labeled basis.
#[derive(Debug, Clone, PartialEq)]
pub struct LinearOp {
    basis: Basis,
    entries: Vec<Complex>,
}

impl LinearOp {
    /// `entries` in row-major order.
    pub fn new(basis: Basis, entries: Vec<Complex>) -> Result<Self> {
        let n = basis.dim();
        if entries.len() != n * n {
            return Err(Error::Malformed(format!(
                "{} entries for a {n}×{n} operator",
                entries.len()
            )));
        }
        if !all_finite(&entries) {
            return Err(Error::NonFinite("operator entries"));
        }
        Ok(LinearOp { basis, entries })
    }

    pub fn from_rows<const N: usize>(basis: Basis, rows: [[Complex; N]; N]) -> Result<Self> {
        LinearOp::new(basis, rows.iter().flatten().copied().collect())
    }

    pub fn from_real_rows<const N: usize>(basis: Basis, rows: [[f64; N]; N]) -> Result<Self> {
        LinearOp::new(
            basis,
            rows.iter()
                .flatten()
                .map(|&x| Complex::new(x, 0.0))
                .collect(),
        )
    }

    pub fn identity(basis: Basis) -> Self {
        let n = basis.dim();
        let mut entries = vec![ZERO; n * n];
        for i in 0..n {
            entries[i * n + i] = ONE;
        }
        LinearOp { basis, entries }
    }

    pub fn zero(basis: Basis) -> Self {
        let n = basis.dim();
        LinearOp {
            basis,
            entries: vec![ZERO; n * n],
        }
    }

    pub fn diagonal(basis: Basis, diag: &[Complex]) -> Result<Self> {
        let n = basis.dim();
        if diag.len() != n {
            return Err(Error::Malformed("diagonal length".into()));
        }
        let mut op = LinearOp::zero(basis);
        for (i, d) in diag.iter().enumerate() {
            op.entries[i * n + i] = *d;
        }
        if !all_finite(&op.entries) {
            return Err(Error::NonFinite("operator entries"));
        }
        Ok(op)
    }

    /// Pauli X on a two-dimensional basis.
    pub fn pauli_x(basis: Basis) -> Result<Self> {
        LinearOp::from_real_rows(basis, [[0.0, 1.0], [1.0, 0.0]])
    }

    /// Pauli Y on a two-dimensional basis.
    pub fn pauli_y(basis: Basis) -> Result<Self> {
        let i = Complex::i();
        LinearOp::from_rows(basis, [[ZERO, -i], [i, ZERO]])
    }

    /// Pauli Z on a two-dimensional basis.
    pub fn pauli_z(basis: Basis) -> Result<Self> {
        LinearOp::from_real_rows(basis, [[1.0, 0.0], [0.0, -1.0]])
    }

    /// |a⟩⟨b|.
    pub fn outer(a: &StateVector, b: &StateVector) -> Result<Self> {
        a.basis.check_same(&b.basis, "outer product")?;
        let entries = a
            .amps
            .iter()
            .flat_map(|x| b.amps.iter().map(move |y| x * y.conj()))
            .collect();
        Ok(LinearOp {
            basis: a.basis.clone(),
            entries,
        })
    }

    /// |s⟩⟨s| for a normalized `s`.
    pub fn projector(s: &StateVector) -> Result<Self> {
        if !s.is_normalized() {
            return Err(Error::NotNormalized(s.norm_sqr()));
        }
        LinearOp::outer(s, s)
    }

    pub fn basis(&self) -> &Basis {
        &self.basis
    }

    pub fn dim(&self) -> usize {
        self.basis.dim()
    }

    pub fn entries(&self) -> &[Complex] {
        &self.entries
    }

    pub fn entry(&self, row: usize, col: usize) -> Complex {
        self.entries[row * self.dim() + col]
    }

    pub fn adjoint(&self) -> Self {
        let n = self.dim();
        let mut entries = vec![ZERO; n * n];
        for r in 0..n {
            for c in 0..n {
                entries[c * n + r] = self.entries[r * n + c].conj();
            }
        }
        LinearOp {
            basis: self.basis.clone(),
            entries,
        }
    }

    /// Matrix product `self · other`.
    pub fn compose(&self, other: &LinearOp) -> Result<Self> {
        self.basis.check_same(&other.basis, "operator product")?;
        Ok(self.compose_unchecked(other))
    }

    fn compose_unchecked(&self, other: &LinearOp) -> Self {
        let n = self.dim();
        let mut entries = vec![ZERO; n * n];
        for r in 0..n {
            for k in 0..n {
                let a = self.entries[r * n + k];
                if a == ZERO {
                    continue;
                }
                for c in 0..n {
                    entries[r * n + c] += a * other.entries[k * n + c];
                }
            }
        }
        LinearOp {
            basis: self.basis.clone(),
            entries,
        }
    }

    pub fn add(&self, other: &LinearOp) -> Result<Self> {
        self.basis.check_same(&other.basis, "operator sum")?;
        Ok(LinearOp {
            basis: self.basis.clone(),
            entries: self
                .entries
                .iter()
                .zip(&other.entries)
                .map(|(a, b)| a + b)
                .collect(),
        })
    }

    pub fn sub(&self, other: &LinearOp) -> Result<Self> {
        self.add(&other.scale(-ONE))
    }

    pub fn scale(&self, k: Complex) -> Self {
        LinearOp {
            basis: self.basis.clone(),
            entries: self.entries.iter().map(|a| a * k).collect(),
        }
    }

    pub fn apply(&self, s: &StateVector) -> Result<StateVector> {
        self.basis.check_same(&s.basis, "apply")?;
        let n = self.dim();
        let amps = (0..n)
            .map(|r| (0..n).map(|c| self.entries[r * n + c] * s.amps[c]).sum())
            .collect();
        Ok(StateVector {
            basis: s.basis.clone(),
            amps,
        })
    }

    /// ⟨s|self|s⟩.
    pub fn expectation(&self, s: &StateVector) -> Result<Complex> {
        s.inner(&self.apply(s)?)
    }

    /// Kronecker product, `self` as the slow index.
    pub fn tensor(&self, other: &LinearOp) -> LinearOp {
        let (n, m) = (self.dim(), other.dim());
        let dim = n * m;
        let mut entries = vec![ZERO; dim * dim];
        for r1 in 0..n {
            for c1 in 0..n {
                let a = self.entries[r1 * n + c1];
                for r2 in 0..m {
                    for c2 in 0..m {
                        entries[(r1 * m + r2) * dim + (c1 * m + c2)] =
                            a * other.entries[r2 * m + c2];
                    }
                }
            }
        }
        LinearOp {
            basis: self.basis.tensor(&other.basis),
            entries,
        }
    }

    /// Largest entrywise deviation from `other`; infinite on basis mismatch.
    pub fn distance(&self, other: &LinearOp) -> f64 {
        if self.basis != other.basis {
            return f64::INFINITY;
        }
        self.entries
            .iter()
            .zip(&other.entries)
            .map(|(a, b)| (a - b).norm())
            .fold(0.0, f64::max)
    }

    fn identity_defect(&self, m: &LinearOp) -> f64 {
        m.distance(&LinearOp::identity(self.basis.clone()))
    }

    /// ‖O†O − I‖ (max entry).
    pub fn unitarity_defect(&self) -> f64 {
        self.identity_defect(&self.adjoint().compose_unchecked(self))
    }

    /// ‖O² − I‖ (max entry).
    pub fn involution_defect(&self) -> f64 {
        self.identity_defect(&self.compose_unchecked(self))
    }

    pub fn is_unitary(&self) -> bool {
        self.unitarity_defect() <= tol::OPERATOR
    }

    pub fn is_involutory(&self) -> bool {
        self.involution_defect() <= tol::OPERATOR
    }

    pub fn is_hermitian(&self) -> bool {
        self.distance(&self.adjoint()) <= tol::OPERATOR
    }

    /// exp(−iγA) for an involution A: cos γ · I − i sin γ · A.
    pub fn exp_involution(&self, gamma: f64) -> Result<Self> {
        let defect = self.involution_defect();
        if defect > tol::OPERATOR {
            return Err(Error::NotInvolutory(defect));
        }
        if !gamma.is_finite() {
            return Err(Error::NonFinite("rotation angle"));
        }
        let id = LinearOp::identity(self.basis.clone());
        Ok(id
            .scale(Complex::new(gamma.cos(), 0.0))
            .add(&self.scale(Complex::new(0.0, -gamma.sin())))
            .expect("same basis"))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::{FRAC_1_SQRT_2, FRAC_PI_2};

    fn ket(label: &str) -> StateVector {
        StateVector::basis_state(Basis::path(), label).unwrap()
    }

    fn m2() -> LinearOp {
        LinearOp::pauli_z(Basis::path()).unwrap()
    }

    fn zy() -> LinearOp {
        m2().tensor(&LinearOp::pauli_y(Basis::polarization()).unwrap())
    }

    #[test]
    fn tensor_of_basis_states() {
        let pol = StateVector::basis_state(Basis::polarization(), "H").unwrap();
        let s = ket("U").tensor(&pol);
        let names: Vec<String> = s.basis().labels().iter().map(|l| l.to_string()).collect();
        assert_eq!(names, ["(U,H)", "(U,V)", "(D,H)", "(D,V)"]);
        let re: Vec<f64> = s.amplitudes().iter().map(|z| z.re).collect();
        assert_eq!(re, [1.0, 0.0, 0.0, 0.0]);
    }

    #[test]
    fn identity_tensor_identity() {
        let i2 = LinearOp::identity(Basis::path());
        let i4 = i2.tensor(&LinearOp::identity(Basis::polarization()));
        assert_eq!(i4, LinearOp::identity(Basis::path_polarization()));
    }

    #[test]
    fn composite_involution_squares_to_identity() {
        let a = zy();
        let sq = a.compose(&a).unwrap();
        assert!(sq.distance(&LinearOp::identity(a.basis().clone())) < 1e-15);
    }

    #[test]
    fn apply_examples() {
        let plus = ket("U").add(&ket("D")).unwrap().scale(FRAC_1_SQRT_2.into());
        let minus = ket("U").sub(&ket("D")).unwrap().scale(FRAC_1_SQRT_2.into());
        assert_eq!(m2().apply(&ket("U")).unwrap(), ket("U"));
        assert!(m2().apply(&plus).unwrap().distance(&minus) < 1e-15);
        let id = LinearOp::identity(Basis::path());
        assert_eq!(id.apply(&plus).unwrap(), plus);
    }

    #[test]
    fn apply_rejects_mismatched_basis() {
        let pol = StateVector::basis_state(Basis::polarization(), "H").unwrap();
        assert!(matches!(m2().apply(&pol), Err(Error::BasisMismatch(_))));
        assert!(matches!(ket("U").inner(&pol), Err(Error::BasisMismatch(_))));
    }

    #[test]
    fn inner_examples() {
        assert_eq!(ket("U").inner(&ket("U")).unwrap(), ONE);
        assert_eq!(ket("U").inner(&ket("D")).unwrap(), ZERO);
        let t = 15f64.to_radians();
        let psi = StateVector::from_real(Basis::path(), &[t.cos(), t.sin()]).unwrap();
        let plus = StateVector::from_real(Basis::path(), &[FRAC_1_SQRT_2, FRAC_1_SQRT_2]).unwrap();
        let ov = plus.inner(&psi).unwrap();
        assert!((ov.re - 0.866_025_403_784_438_5).abs() < 1e-12);
        assert_eq!(ov.im, 0.0);
    }

    #[test]
    fn exp_involution_examples() {
        let a = zy();
        let e0 = a.exp_involution(0.0).unwrap();
        assert!(e0.distance(&LinearOp::identity(a.basis().clone())) < 1e-15);
        let e90 = a.exp_involution(FRAC_PI_2).unwrap();
        assert!(e90.distance(&a.scale(-Complex::i())) < 1e-15);
        let u = a.exp_involution(12f64.to_radians()).unwrap();
        assert!(u.unitarity_defect() < 1e-12);
    }

    #[test]
    fn exp_involution_rejects_non_involution() {
        let a = m2().scale(Complex::new(2.0, 0.0));
        assert!(matches!(
            a.exp_involution(0.3),
            Err(Error::NotInvolutory(_))
        ));
    }

    #[test]
    fn projector_examples() {
        let p = LinearOp::projector(&ket("U")).unwrap();
        assert_eq!(
            p,
            LinearOp::from_real_rows(Basis::path(), [[1.0, 0.0], [0.0, 0.0]]).unwrap()
        );
        let plus = StateVector::from_real(Basis::path(), &[FRAC_1_SQRT_2, FRAC_1_SQRT_2]).unwrap();
        let pp = LinearOp::projector(&plus).unwrap();
        let m3 = pp
            .scale(Complex::new(2.0, 0.0))
            .sub(&LinearOp::identity(Basis::path()))
            .unwrap();
        assert!(m3.distance(&LinearOp::pauli_x(Basis::path()).unwrap()) < 1e-15);
        assert!(pp.compose(&pp).unwrap().distance(&pp) < 1e-15);
        assert!(pp.is_hermitian());
    }

    #[test]
    fn projector_rejects_unnormalized() {
        let s = StateVector::from_real(Basis::path(), &[1.0, 1.0]).unwrap();
        assert!(matches!(
            LinearOp::projector(&s),
            Err(Error::NotNormalized(_))
        ));
    }

    #[test]
    fn constructors_reject_non_finite_and_bad_shapes() {
        assert!(matches!(
            StateVector::from_real(Basis::path(), &[f64::NAN, 0.0]),
            Err(Error::NonFinite(_))
        ));
        assert!(StateVector::from_real(Basis::path(), &[1.0]).is_err());
        assert!(LinearOp::new(Basis::path(), vec![ONE; 3]).is_err());
        assert!(Basis::new(["U", "U"]).is_err());
        assert!(Basis::new(Vec::<&str>::new()).is_err());
    }

    #[test]
    fn global_phase_helper() {
        let s = ket("U").add(&ket("D")).unwrap().normalized().unwrap();
        let phased = s.scale(Complex::from_polar(1.0, 0.7));
        assert!(s.equal_up_to_phase(&phased, 1e-12));
        assert!(!s.equal_up_to_phase(&ket("U"), 1e-12));
    }

    #[test]
    fn tensor_associative_up_to_regrouping() {
        let a = LinearOp::pauli_x(Basis::path()).unwrap();
        let b = LinearOp::pauli_y(Basis::polarization()).unwrap();
        let c = LinearOp::pauli_z(Basis::new(["0", "1"]).unwrap()).unwrap();
        let left = a.tensor(&b).tensor(&c);
        let right = a.tensor(&b.tensor(&c));
        assert_ne!(left.basis(), right.basis());
        assert!(left.basis().same_up_to_regrouping(right.basis()));
        assert_eq!(left.entries(), right.entries());
    }
}
