//! Jones calculus for the polarization chain.
//!
//! Bob prepares one of four linear states with two sources and a Pockels cell
//! (PC1), Alice flips it orthogonally with two serial Pockels cells (PC2 and
//! PC3) to encode bit 1, and Bob's measurement Pockels cell (PC4) plus a
//! Wollaston prism routes the returning photon to SPCM1 (H) or SPCM2 (V).
//!
//! Vectors are kept normalized and compared up to a global complex scalar;
//! matrices are only ever required to be unitary up to a positive scalar, so
//! the unnormalized textbook forms (`[[1,-1],[-1,-1]]`, ...) compare equal to
//! the half-wave-plate matrices produced here.

use std::f64::consts::{FRAC_1_SQRT_2, FRAC_PI_4, FRAC_PI_8};
use std::fmt;
use std::ops::Mul;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Norm below which a matrix-vector product is treated as the zero vector.
pub const ZERO_NORM: f64 = 1e-12;

/// Tolerance used for unitarity and phase-equivalence checks.
pub const UNITARY_TOL: f64 = 1e-10;

/// PC1 orientation: maps H to A and V to D when triggered.
pub const PC1_ORIENTATION: f64 = -FRAC_PI_8;
/// PC2 orientation: flips the rectilinear basis.
pub const PC2_ORIENTATION: f64 = FRAC_PI_4;
/// PC3 orientation: flips the diagonal basis.
pub const PC3_ORIENTATION: f64 = 0.0;
/// PC4 orientation: rotates D to H and A to V when triggered.
pub const PC4_ORIENTATION: f64 = FRAC_PI_8;

const fn c(re: f64) -> Complex64 {
    Complex64::new(re, 0.0)
}

/// Normalized Jones vector `(a, b)` over the H/V basis.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct JonesVector {
    a: Complex64,
    b: Complex64,
}

impl JonesVector {
    /// Normalizes `(a, b)`. Fails for the zero vector.
    pub fn new(a: Complex64, b: Complex64) -> Result<Self> {
        let norm = (a.norm_sqr() + b.norm_sqr()).sqrt();
        if !(norm >= ZERO_NORM) {
            return Err(Error::ZeroOutput { norm });
        }
        Ok(Self {
            a: a / norm,
            b: b / norm,
        })
    }

    pub fn from_real(a: f64, b: f64) -> Result<Self> {
        Self::new(c(a), c(b))
    }

    pub fn a(&self) -> Complex64 {
        self.a
    }

    pub fn b(&self) -> Complex64 {
        self.b
    }

    /// `⟨self|other⟩`
    pub fn inner(&self, other: &JonesVector) -> Complex64 {
        self.a.conj() * other.a + self.b.conj() * other.b
    }

    /// The same ray multiplied by a global phase `e^{iφ}`.
    pub fn with_phase(&self, phi: f64) -> JonesVector {
        let p = Complex64::from_polar(1.0, phi);
        JonesVector {
            a: self.a * p,
            b: self.b * p,
        }
    }

    /// True iff `|⟨self|other⟩| ≥ 1 − tol`, i.e. both describe the same
    /// polarization regardless of global phase.
    pub fn equal_up_to_phase(&self, other: &JonesVector, tol: f64) -> bool {
        self.inner(other).norm() >= 1.0 - tol
    }
}

/// Free-function form of [`JonesVector::equal_up_to_phase`].
pub fn equal_up_to_phase(u: &JonesVector, v: &JonesVector, tol: f64) -> bool {
    u.equal_up_to_phase(v, tol)
}

/// The four linear polarization states used for encoding.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum NamedState {
    H,
    V,
    D,
    A,
}

impl NamedState {
    pub const ALL: [NamedState; 4] = [NamedState::H, NamedState::V, NamedState::D, NamedState::A];

    pub fn vector(self) -> JonesVector {
        let (a, b) = match self {
            NamedState::H => (1.0, 0.0),
            NamedState::V => (0.0, 1.0),
            NamedState::D => (FRAC_1_SQRT_2, FRAC_1_SQRT_2),
            NamedState::A => (FRAC_1_SQRT_2, -FRAC_1_SQRT_2),
        };
        JonesVector { a: c(a), b: c(b) }
    }

    /// The named state equal to `v` up to phase, if any.
    pub fn identify(v: &JonesVector, tol: f64) -> Option<NamedState> {
        Self::ALL
            .into_iter()
            .find(|s| s.vector().equal_up_to_phase(v, tol))
    }

    pub fn orthogonal(self) -> NamedState {
        match self {
            NamedState::H => NamedState::V,
            NamedState::V => NamedState::H,
            NamedState::D => NamedState::A,
            NamedState::A => NamedState::D,
        }
    }
}

impl fmt::Display for NamedState {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Debug::fmt(self, f)
    }
}

/// 2×2 complex matrix stored row-major: `[m00, m01, m10, m11]`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct JonesMatrix(pub [Complex64; 4]);

impl JonesMatrix {
    pub const IDENTITY: JonesMatrix = JonesMatrix([c(1.0), c(0.0), c(0.0), c(1.0)]);

    pub fn from_real(m: [[f64; 2]; 2]) -> JonesMatrix {
        JonesMatrix([c(m[0][0]), c(m[0][1]), c(m[1][0]), c(m[1][1])])
    }

    pub fn adjoint(&self) -> JonesMatrix {
        let [m00, m01, m10, m11] = self.0;
        JonesMatrix([m00.conj(), m10.conj(), m01.conj(), m11.conj()])
    }

    pub fn scale(&self, s: Complex64) -> JonesMatrix {
        JonesMatrix(self.0.map(|x| x * s))
    }

    fn frobenius_sqr(&self) -> f64 {
        self.0.iter().map(|x| x.norm_sqr()).sum()
    }

    /// Unnormalized product `M·v`.
    pub fn mul_vec(&self, v: &JonesVector) -> (Complex64, Complex64) {
        let [m00, m01, m10, m11] = self.0;
        (m00 * v.a + m01 * v.b, m10 * v.a + m11 * v.b)
    }

    /// Normalized `M·v`. A (near) zero result means the matrix was not unitary.
    pub fn apply(&self, v: &JonesVector) -> Result<JonesVector> {
        let (a, b) = self.mul_vec(v);
        JonesVector::new(a, b)
    }

    /// Checks `M†M = cI` with `c > 0`. The tolerance is relative to `c`.
    pub fn is_unitary_up_to_scalar(&self, tol: f64) -> bool {
        let g = self.adjoint() * *self;
        let scale = g.0[0].re;
        if !(scale > 0.0) {
            return false;
        }
        let [g00, g01, g10, g11] = g.0;
        (g00 - scale).norm() <= tol * scale
            && (g11 - scale).norm() <= tol * scale
            && g01.norm() <= tol * scale
            && g10.norm() <= tol * scale
    }

    /// True iff `self = s·other` for some nonzero complex `s`.
    pub fn equal_up_to_scalar(&self, other: &JonesMatrix, tol: f64) -> bool {
        let na = self.frobenius_sqr().sqrt();
        let nb = other.frobenius_sqr().sqrt();
        if na < ZERO_NORM || nb < ZERO_NORM {
            return false;
        }
        // Cauchy-Schwarz on the flattened entries: |⟨A,B⟩| = ‖A‖‖B‖ iff parallel.
        let overlap: Complex64 = self
            .0
            .iter()
            .zip(other.0.iter())
            .map(|(x, y)| x.conj() * y)
            .sum();
        overlap.norm() / (na * nb) >= 1.0 - tol
    }
}

impl Mul for JonesMatrix {
    type Output = JonesMatrix;

    fn mul(self, rhs: JonesMatrix) -> JonesMatrix {
        let [a00, a01, a10, a11] = self.0;
        let [b00, b01, b10, b11] = rhs.0;
        JonesMatrix([
            a00 * b00 + a01 * b10,
            a00 * b01 + a01 * b11,
            a10 * b00 + a11 * b10,
            a10 * b01 + a11 * b11,
        ])
    }
}

/// Half-wave plate with fast axis at `theta` radians: `[[cos2θ, sin2θ], [sin2θ, −cos2θ]]`.
pub fn hwp_matrix(theta: f64) -> JonesMatrix {
    let (s, co) = (2.0 * theta).sin_cos();
    JonesMatrix::from_real([[co, s], [s, -co]])
}

/// A Pockels cell driven at half-wave voltage acts as a half-wave plate at
/// its mounting angle; idle, it is the identity.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PockelsCell {
    pub orientation: f64,
    pub triggered: bool,
}

impl PockelsCell {
    pub fn new(orientation: f64, triggered: bool) -> Self {
        Self {
            orientation,
            triggered,
        }
    }

    pub fn matrix(&self) -> JonesMatrix {
        pockels_matrix(*self)
    }
}

pub fn pockels_matrix(cell: PockelsCell) -> JonesMatrix {
    if cell.triggered {
        hwp_matrix(cell.orientation)
    } else {
        JonesMatrix::IDENTITY
    }
}

/// Alice's flipper: PC3·PC2 when triggered, identity otherwise.
pub fn flipper_matrix(triggered: bool) -> JonesMatrix {
    let pc2 = PockelsCell::new(PC2_ORIENTATION, triggered).matrix();
    let pc3 = PockelsCell::new(PC3_ORIENTATION, triggered).matrix();
    pc3 * pc2
}

/// Wollaston prism projection: `(P(SPCM1), P(SPCM2)) = (|⟨H|v⟩|², |⟨V|v⟩|²)`.
pub fn measurement_probs(v: &JonesVector) -> (f64, f64) {
    (v.a.norm_sqr(), v.b.norm_sqr())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Source {
    /// Emits H.
    Src1,
    /// Emits V.
    Src2,
}

impl Source {
    pub fn state(self) -> NamedState {
        match self {
            Source::Src1 => NamedState::H,
            Source::Src2 => NamedState::V,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Detector {
    /// H output of the Wollaston prism.
    Spcm1,
    /// V output of the Wollaston prism.
    Spcm2,
}

impl Detector {
    pub fn other(self) -> Detector {
        match self {
            Detector::Spcm1 => Detector::Spcm2,
            Detector::Spcm2 => Detector::Spcm1,
        }
    }
}

/// End-to-end fate of one source/PC1/flipper setting.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Trace {
    pub prepared: NamedState,
    pub returned: NamedState,
    pub detector: Detector,
    /// Probability of reaching SPCM1; 0 or 1 for an ideal chain.
    pub p_spcm1: f64,
}

/// Pockels-cell mounting angles of the whole setup.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Chain {
    pub pc1_orientation: f64,
    pub pc4_orientation: f64,
}

impl Default for Chain {
    fn default() -> Self {
        Self {
            pc1_orientation: PC1_ORIENTATION,
            pc4_orientation: PC4_ORIENTATION,
        }
    }
}

impl Chain {
    /// Source → PC1 → flipper → PC4 (triggered with PC1) → Wollaston.
    pub fn trace(&self, source: Source, pc1_on: bool, flipper_on: bool) -> Result<Trace> {
        let pc1 = PockelsCell::new(self.pc1_orientation, pc1_on);
        let pc4 = PockelsCell::new(self.pc4_orientation, pc1_on);

        let prepared_v = pc1.matrix().apply(&source.state().vector())?;
        let returned_v = flipper_matrix(flipper_on).apply(&prepared_v)?;
        let measured_v = pc4.matrix().apply(&returned_v)?;

        let prepared = NamedState::identify(&prepared_v, UNITARY_TOL)
            .ok_or_else(|| Error::InvalidParams("PC1 does not prepare a linear state".into()))?;
        let returned = NamedState::identify(&returned_v, UNITARY_TOL)
            .ok_or_else(|| Error::InvalidParams("flipper output is not a linear state".into()))?;
        let (p1, _) = measurement_probs(&measured_v);
        let detector = if p1 >= 0.5 {
            Detector::Spcm1
        } else {
            Detector::Spcm2
        };
        Ok(Trace {
            prepared,
            returned,
            detector,
            p_spcm1: p1,
        })
    }
}

/// [`Chain::trace`] with the default mounting angles.
pub fn trace_state(source: Source, pc1_on: bool, flipper_on: bool) -> Trace {
    Chain::default()
        .trace(source, pc1_on, flipper_on)
        .expect("default chain maps linear states to linear states")
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    use proptest::prelude::*;

    fn m1() -> JonesMatrix {
        JonesMatrix::from_real([[1.0, -1.0], [-1.0, -1.0]])
    }
    fn m2() -> JonesMatrix {
        JonesMatrix::from_real([[0.0, 1.0], [1.0, 0.0]])
    }
    fn m3() -> JonesMatrix {
        JonesMatrix::from_real([[1.0, 0.0], [0.0, -1.0]])
    }
    fn m4() -> JonesMatrix {
        JonesMatrix::from_real([[1.0, 1.0], [1.0, -1.0]])
    }
    fn m23() -> JonesMatrix {
        JonesMatrix::from_real([[0.0, -1.0], [1.0, 0.0]])
    }

    fn close(a: &JonesMatrix, b: &JonesMatrix) -> bool {
        a.0.iter().zip(b.0.iter()).all(|(x, y)| (x - y).norm() < 1e-12)
    }

    #[test]
    fn hwp_reference_angles() {
        assert!(close(&hwp_matrix(0.0), &m3()));
        assert!(close(&hwp_matrix(FRAC_PI_4), &m2()));
        let s = FRAC_1_SQRT_2;
        assert!(close(
            &hwp_matrix(-FRAC_PI_8),
            &JonesMatrix::from_real([[s, -s], [-s, -s]])
        ));
        assert!(hwp_matrix(-FRAC_PI_8).equal_up_to_scalar(&m1(), 1e-12));
    }

    #[test]
    fn pockels_cell_idle_is_identity() {
        let cell = PockelsCell::new(FRAC_PI_8, false);
        assert_eq!(cell.matrix(), JonesMatrix::IDENTITY);
        assert!(PockelsCell::new(FRAC_PI_8, true)
            .matrix()
            .equal_up_to_scalar(&m4(), 1e-12));
        assert!(close(&PockelsCell::new(FRAC_PI_4, true).matrix(), &m2()));
    }

    #[test]
    fn flipper_matches_m23() {
        assert_eq!(flipper_matrix(false), JonesMatrix::IDENTITY);
        assert!(flipper_matrix(true).equal_up_to_scalar(&m23(), 1e-12));
        let h = NamedState::H.vector();
        let a = NamedState::A.vector();
        let f = flipper_matrix(true);
        assert!(f.apply(&h).unwrap().equal_up_to_phase(&NamedState::V.vector(), 1e-12));
        assert!(f.apply(&a).unwrap().equal_up_to_phase(&NamedState::D.vector(), 1e-12));
    }

    #[test]
    fn apply_examples() {
        let v = NamedState::V.vector();
        assert!(JonesMatrix::IDENTITY.apply(&v).unwrap().equal_up_to_phase(&v, 1e-12));
        // The printed M1 sends H to (1, -1), the anti-diagonal state, and V to D.
        let out = m1().apply(&NamedState::H.vector()).unwrap();
        assert_eq!(NamedState::identify(&out, 1e-10), Some(NamedState::A));
        let out = m1().apply(&NamedState::V.vector()).unwrap();
        assert_eq!(NamedState::identify(&out, 1e-10), Some(NamedState::D));
        let out = m4().apply(&NamedState::A.vector()).unwrap();
        assert_eq!(NamedState::identify(&out, 1e-10), Some(NamedState::V));
        let out = m4().apply(&NamedState::D.vector()).unwrap();
        assert_eq!(NamedState::identify(&out, 1e-10), Some(NamedState::H));
    }

    #[test]
    fn apply_rejects_annihilating_matrix() {
        let proj = JonesMatrix::from_real([[1.0, 0.0], [0.0, 0.0]]);
        let err = proj.apply(&NamedState::V.vector()).unwrap_err();
        assert!(matches!(err, Error::ZeroOutput { .. }));
        assert!(JonesVector::from_real(0.0, 0.0).is_err());
    }

    #[test]
    fn phase_equality() {
        let h = NamedState::H.vector();
        assert!(equal_up_to_phase(&h, &h.with_phase(PI / 3.0), 1e-12));
        assert!(!equal_up_to_phase(&h, &NamedState::V.vector(), 1e-12));
        let d = NamedState::D.vector();
        assert!(equal_up_to_phase(&d, &d.with_phase(PI), 1e-12));
    }

    #[test]
    fn named_states_geometry() {
        let [h, v, d, a] = NamedState::ALL.map(NamedState::vector);
        assert!(h.inner(&v).norm() < 1e-15);
        assert!(d.inner(&a).norm() < 1e-15);
        assert!((h.inner(&d).norm_sqr() - 0.5).abs() < 1e-15);
    }

    #[test]
    fn wollaston_probabilities() {
        assert_eq!(measurement_probs(&NamedState::H.vector()), (1.0, 0.0));
        let (p1, p2) = measurement_probs(&NamedState::D.vector());
        assert!((p1 - 0.5).abs() < 1e-15 && (p2 - 0.5).abs() < 1e-15);
        let out = m4().apply(&NamedState::A.vector()).unwrap();
        let (p1, p2) = measurement_probs(&out);
        assert!(p1.abs() < 1e-15 && (p2 - 1.0).abs() < 1e-15);
    }

    #[test]
    fn pc2_pc3_commute_up_to_scalar() {
        let pc2 = hwp_matrix(PC2_ORIENTATION);
        let pc3 = hwp_matrix(PC3_ORIENTATION);
        assert!((pc2 * pc3).equal_up_to_scalar(&(pc3 * pc2), 1e-12));
    }

    #[test]
    fn flipper_is_orthogonal_on_named_states() {
        let f = flipper_matrix(true);
        for s in NamedState::ALL {
            let out = f.apply(&s.vector()).unwrap();
            assert!(s.vector().inner(&out).norm() < 1e-10, "{s}");
            assert_eq!(NamedState::identify(&out, 1e-10), Some(s.orthogonal()));
        }
    }

    #[test]
    fn trace_examples() {
        let t = trace_state(Source::Src1, false, false);
        assert_eq!((t.prepared, t.returned, t.detector), (NamedState::H, NamedState::H, Detector::Spcm1));
        let t = trace_state(Source::Src2, false, true);
        assert_eq!((t.prepared, t.returned, t.detector), (NamedState::V, NamedState::H, Detector::Spcm1));
        let t = trace_state(Source::Src1, true, true);
        assert_eq!((t.prepared, t.returned, t.detector), (NamedState::A, NamedState::D, Detector::Spcm1));
    }

    #[test]
    fn pc4_sign_choice_swaps_detectors_but_not_decoding() {
        let alt = Chain {
            pc1_orientation: PC1_ORIENTATION,
            pc4_orientation: -FRAC_PI_8,
        };
        for source in [Source::Src1, Source::Src2] {
            for pc1 in [false, true] {
                let ref0 = trace_state(source, pc1, false);
                let ref1 = trace_state(source, pc1, true);
                let alt0 = alt.trace(source, pc1, false).unwrap();
                let alt1 = alt.trace(source, pc1, true).unwrap();
                // Bit = whether the click is on the flipper-off detector.
                assert_eq!(ref0.detector == ref1.detector, alt0.detector == alt1.detector);
                assert_ne!(alt0.detector, alt1.detector);
                assert!(alt0.p_spcm1 == 0.0 || alt0.p_spcm1 > 1.0 - 1e-12 || alt0.p_spcm1 < 1e-12);
            }
        }
    }

    fn arb_vector() -> impl Strategy<Value = JonesVector> {
        (-1.0f64..1.0, -1.0f64..1.0, -1.0f64..1.0, -1.0f64..1.0)
            .prop_filter("nonzero", |(a, b, c, d)| a * a + b * b + c * c + d * d > 1e-6)
            .prop_map(|(a, b, c, d)| {
                JonesVector::new(Complex64::new(a, b), Complex64::new(c, d)).unwrap()
            })
    }

    proptest! {
        #[test]
        fn hwp_is_unitary_and_involutive(theta in -10.0f64..10.0) {
            let m = hwp_matrix(theta);
            prop_assert!(m.is_unitary_up_to_scalar(UNITARY_TOL));
            prop_assert!((m * m).equal_up_to_scalar(&JonesMatrix::IDENTITY, UNITARY_TOL));
        }

        #[test]
        fn module_matrices_are_unitary(theta in -10.0f64..10.0, on: bool) {
            prop_assert!(pockels_matrix(PockelsCell::new(theta, on)).is_unitary_up_to_scalar(UNITARY_TOL));
            prop_assert!(flipper_matrix(on).is_unitary_up_to_scalar(UNITARY_TOL));
        }

        #[test]
        fn double_flip_restores_any_state(v in arb_vector()) {
            let f = flipper_matrix(true);
            let back = f.apply(&f.apply(&v).unwrap()).unwrap();
            prop_assert!(back.equal_up_to_phase(&v, UNITARY_TOL));
        }

        #[test]
        fn probabilities_sum_to_one(v in arb_vector()) {
            let (p1, p2) = measurement_probs(&v);
            prop_assert!((p1 + p2 - 1.0).abs() < 1e-12);
        }

        #[test]
        fn global_phase_is_invisible(v in arb_vector(), phi in -10.0f64..10.0) {
            prop_assert!(v.equal_up_to_phase(&v.with_phase(phi), 1e-12));
        }
    }
}
