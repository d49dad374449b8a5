//! Collision terms: classical biased-bit, degenerate two-bit, and two-qubit
//! quantum, plus the site-local collide and collide-then-stream steps.
//!
//! All collision terms transfer probability between the two channels of one
//! site, `p_+' = p_+ + Ω`, `p_-' = p_- - Ω`, so the site density is conserved
//! identically. Each rule also maps \[0,1\]² into itself, which is why a range
//! violation after a collide aborts instead of being clamped away.

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::field::{OccupancyField, RANGE_TOL};

/// Tolerance for the unitarity and internal-consistency checks of the
/// quantum gate path.
pub const UNITARITY_TOL: f64 = 1e-12;

/// Site-local collision dynamics.
///
/// `Quantum` is parametrised by the three Euler angles of the conservative
/// two-qubit gate; its effective nonlinearity parameter is
/// `alpha_eff = cot(theta) * cos(zeta - xi)`, the counterpart of the
/// classical random-bit occupation probability `alpha`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum CollisionModel {
    /// Classical three-bit rule: a lone particle is routed rightward with
    /// probability `(1+alpha)/2`, where `alpha` is the occupation
    /// probability of the biasing random bit.
    ClassicalBl { alpha: f64 },
    /// Degenerate two-bit rule (the `alpha = 1` special case): a lone
    /// particle always exits rightward.
    TwoBit,
    /// Two-qubit unitary collision with Euler angles in radians.
    Quantum { theta: f64, zeta: f64, xi: f64 },
}

impl CollisionModel {
    pub fn validate(&self) -> Result<()> {
        match *self {
            CollisionModel::ClassicalBl { alpha } => {
                if !(0.0..=1.0).contains(&alpha) {
                    return Err(Error::InvalidInput {
                        what: "model.alpha",
                        value: alpha,
                        expected: "in [0, 1]",
                    });
                }
            }
            CollisionModel::TwoBit => {}
            CollisionModel::Quantum { theta, zeta, xi } => {
                for (what, v) in [
                    ("model.theta", theta),
                    ("model.zeta", zeta),
                    ("model.xi", xi),
                ] {
                    if !v.is_finite() {
                        return Err(Error::InvalidInput {
                            what,
                            value: v,
                            expected: "finite",
                        });
                    }
                }
                if theta.sin().abs() < 1e-12 {
                    return Err(Error::InvalidInput {
                        what: "model.theta",
                        value: theta,
                        expected: "not a multiple of pi (alpha_eff = cot(theta)cos(zeta-xi) must be finite)",
                    });
                }
            }
        }
        Ok(())
    }

    /// The nonlinearity parameter entering equilibria and transport:
    /// `alpha` itself for the classical model, 1 for the two-bit model,
    /// `cot(theta) cos(zeta - xi)` for the quantum model.
    pub fn alpha_eff(&self) -> f64 {
        match *self {
            CollisionModel::ClassicalBl { alpha } => alpha,
            CollisionModel::TwoBit => 1.0,
            CollisionModel::Quantum { theta, zeta, xi } => {
                (theta.cos() / theta.sin()) * (zeta - xi).cos()
            }
        }
    }

    /// Collision term at one site. Inputs are expected in [0,1].
    #[inline]
    pub(crate) fn omega_raw(&self, p_plus: f64, p_minus: f64) -> f64 {
        match *self {
            CollisionModel::ClassicalBl { alpha } => omega_classical_raw(p_plus, p_minus, alpha),
            CollisionModel::TwoBit => (1.0 - p_plus) * p_minus,
            CollisionModel::Quantum { theta, zeta, xi } => {
                omega_quantum_closed_raw(p_plus, p_minus, theta, zeta, xi)
            }
        }
    }

    /// Validated collision term at one site.
    pub fn omega(&self, p_plus: f64, p_minus: f64) -> Result<f64> {
        self.validate()?;
        check_probability("p_plus", p_plus)?;
        check_probability("p_minus", p_minus)?;
        Ok(self.omega_raw(p_plus, p_minus))
    }

    pub fn name(&self) -> &'static str {
        match self {
            CollisionModel::ClassicalBl { .. } => "classical",
            CollisionModel::TwoBit => "twobit",
            CollisionModel::Quantum { .. } => "quantum",
        }
    }
}

fn check_probability(what: &'static str, p: f64) -> Result<()> {
    if !(0.0..=1.0).contains(&p) {
        return Err(Error::InvalidInput {
            what,
            value: p,
            expected: "in [0, 1]",
        });
    }
    Ok(())
}

#[inline]
fn omega_classical_raw(p_plus: f64, p_minus: f64, alpha: f64) -> f64 {
    0.5 * (p_minus - p_plus) + 0.5 * alpha * (p_plus + p_minus - 2.0 * p_plus * p_minus)
}

/// Classical collision term
/// `Ω = (p_- - p_+)/2 + (alpha/2)(p_+ + p_- - 2 p_+ p_-)`.
///
/// Equivalent to routing a lone particle rightward with probability
/// `(1+alpha)/2`:
/// `Ω = (1+alpha)/2 (1-p_+) p_-  -  (1-alpha)/2 p_+ (1-p_-)`.
pub fn omega_classical(p_plus: f64, p_minus: f64, alpha: f64) -> Result<f64> {
    check_probability("p_plus", p_plus)?;
    check_probability("p_minus", p_minus)?;
    check_probability("alpha", alpha)?;
    Ok(omega_classical_raw(p_plus, p_minus, alpha))
}

/// Two-bit collision term `Ω = (1 - p_+) p_-`.
pub fn omega_twobit(p_plus: f64, p_minus: f64) -> Result<f64> {
    check_probability("p_plus", p_plus)?;
    check_probability("p_minus", p_minus)?;
    Ok((1.0 - p_plus) * p_minus)
}

/// Conservative two-qubit collision gate in the basis |11⟩, |10⟩, |01⟩, |00⟩.
///
/// Only the |10⟩/|01⟩ block acts; the |11⟩ and |00⟩ rows and columns are
/// identity, which is what makes the gate number-conserving.
#[derive(Debug, Clone, PartialEq)]
pub struct UnitaryGate {
    m: [[Complex64; 4]; 4],
}

impl UnitaryGate {
    /// Wrap an arbitrary matrix, enforcing unitarity and the conservative
    /// block structure.
    pub fn new(m: [[Complex64; 4]; 4]) -> Result<Self> {
        let gate = Self { m };
        let defect = gate.unitarity_defect();
        if defect.is_nan() || defect >= UNITARITY_TOL {
            return Err(Error::NotUnitary {
                defect,
                tol: UNITARITY_TOL,
            });
        }
        for k in 0..4 {
            for idx in [0usize, 3] {
                let expect_row = if k == idx { 1.0 } else { 0.0 };
                if (gate.m[idx][k] - expect_row).norm() > UNITARITY_TOL
                    || (gate.m[k][idx] - expect_row).norm() > UNITARITY_TOL
                {
                    return Err(Error::InvalidInput {
                        what: "gate block structure",
                        value: gate.m[idx][k].norm(),
                        expected: "identity rows/columns 0 and 3",
                    });
                }
            }
        }
        Ok(gate)
    }

    /// Gate with central block
    /// `[[e^{i xi} cos θ, e^{i zeta} sin θ], [-e^{-i zeta} sin θ, e^{-i xi} cos θ]]`;
    /// unitary for all angles.
    pub fn from_angles(theta: f64, zeta: f64, xi: f64) -> Self {
        let (s, c) = theta.sin_cos();
        let zero = Complex64::new(0.0, 0.0);
        let one = Complex64::new(1.0, 0.0);
        let eix = Complex64::from_polar(1.0, xi);
        let eiz = Complex64::from_polar(1.0, zeta);
        let m = [
            [one, zero, zero, zero],
            [zero, eix * c, eiz * s, zero],
            [zero, -eiz.conj() * s, eix.conj() * c, zero],
            [zero, zero, zero, one],
        ];
        Self { m }
    }

    pub fn matrix(&self) -> &[[Complex64; 4]; 4] {
        &self.m
    }

    /// Max-norm of `U†U - I`.
    pub fn unitarity_defect(&self) -> f64 {
        let mut worst: f64 = 0.0;
        for i in 0..4 {
            for j in 0..4 {
                let mut s = Complex64::new(0.0, 0.0);
                for k in 0..4 {
                    s += self.m[k][i].conj() * self.m[k][j];
                }
                let expect = if i == j { 1.0 } else { 0.0 };
                worst = worst.max((s - expect).norm());
            }
        }
        worst
    }

    pub fn determinant(&self) -> Complex64 {
        // Rows/columns 0 and 3 are identity, so the determinant reduces to
        // the central 2x2 block.
        self.m[1][1] * self.m[2][2] - self.m[1][2] * self.m[2][1]
    }

    /// Apply the gate to a 4-amplitude state vector.
    pub fn apply(&self, psi: &[Complex64; 4]) -> [Complex64; 4] {
        let mut out = [Complex64::new(0.0, 0.0); 4];
        for (i, row) in self.m.iter().enumerate() {
            for (j, u) in row.iter().enumerate() {
                out[i] += u * psi[j];
            }
        }
        out
    }
}

impl std::fmt::Display for UnitaryGate {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        for row in &self.m {
            for (j, v) in row.iter().enumerate() {
                if j > 0 {
                    write!(f, "  ")?;
                }
                write!(f, "{:+.6}{:+.6}i", v.re, v.im)?;
            }
            writeln!(f)?;
        }
        Ok(())
    }
}

/// Alias for [`UnitaryGate::from_angles`], matching the name used in the
/// experiment tooling.
pub fn build_unitary(theta: f64, zeta: f64, xi: f64) -> UnitaryGate {
    UnitaryGate::from_angles(theta, zeta, xi)
}

/// Quantum collision term obtained the long way round: encode the two
/// occupation probabilities as a product state
/// `|ψ⟩ = (√p_+ |1⟩ + √(1-p_+) |0⟩) ⊗ (√p_- |1⟩ + √(1-p_-) |0⟩)`
/// (internal phases ignored), apply the gate, and read off
/// `Ω = ⟨ψ'|n̂₁|ψ'⟩ - p_+` from the first qubit's number operator.
///
/// The matching change of the second qubit, `⟨ψ'|n̂₂|ψ'⟩ - p_- = -Ω`, is
/// checked internally; it holds because of the gate's block structure.
/// This function is the ground truth the closed form is tested against.
pub fn omega_quantum_expect(p_plus: f64, p_minus: f64, gate: &UnitaryGate) -> Result<f64> {
    check_probability("p_plus", p_plus)?;
    check_probability("p_minus", p_minus)?;
    let defect = gate.unitarity_defect();
    if defect.is_nan() || defect >= UNITARITY_TOL {
        return Err(Error::NotUnitary {
            defect,
            tol: UNITARITY_TOL,
        });
    }

    let a = p_plus.sqrt();
    let na = (1.0 - p_plus).sqrt();
    let b = p_minus.sqrt();
    let nb = (1.0 - p_minus).sqrt();
    // basis order |11>, |10>, |01>, |00>
    let psi = [
        Complex64::new(a * b, 0.0),
        Complex64::new(a * nb, 0.0),
        Complex64::new(na * b, 0.0),
        Complex64::new(na * nb, 0.0),
    ];
    let psi2 = gate.apply(&psi);
    let pr: Vec<f64> = psi2.iter().map(|z| z.norm_sqr()).collect();
    // n1 occupies basis states |11>, |10>; n2 occupies |11>, |01>
    let p_plus_new = pr[0] + pr[1];
    let p_minus_new = pr[0] + pr[2];
    let omega = p_plus_new - p_plus;
    let omega_minus = p_minus - p_minus_new;
    assert!(
        (omega - omega_minus).abs() < 1e-12,
        "number-operator bookkeeping violated conservation: {omega} vs {omega_minus}"
    );
    Ok(omega)
}

#[inline]
fn omega_quantum_closed_raw(p_plus: f64, p_minus: f64, theta: f64, zeta: f64, xi: f64) -> f64 {
    let s = theta.sin();
    let root = (p_plus * (1.0 - p_plus)).max(0.0) * (p_minus * (1.0 - p_minus)).max(0.0);
    s * s * (p_minus - p_plus) + (2.0 * theta).sin() * (zeta - xi).cos() * root.sqrt()
}

/// Closed-form quantum collision term
/// `Ω = sin²θ (p_- - p_+) + sin 2θ cos(ζ-ξ) √(p_+(1-p_+) p_-(1-p_-))`,
/// equal to [`omega_quantum_expect`] for the gate with the same angles.
pub fn omega_quantum_closed(
    p_plus: f64,
    p_minus: f64,
    theta: f64,
    zeta: f64,
    xi: f64,
) -> Result<f64> {
    check_probability("p_plus", p_plus)?;
    check_probability("p_minus", p_minus)?;
    Ok(omega_quantum_closed_raw(p_plus, p_minus, theta, zeta, xi))
}

/// Apply the collision term at every site: `p_+' = p_+ + Ω`, `p_-' = p_- - Ω`.
///
/// Per-site density is conserved to round-off by construction. If an updated
/// probability leaves \[0,1\] by more than `1e-12` the call aborts; smaller
/// round-off excursions are snapped back onto the interval.
pub fn collide(field: &OccupancyField, model: &CollisionModel) -> Result<OccupancyField> {
    model.validate()?;
    let n = field.n_sites();
    let mut plus = Vec::with_capacity(n);
    let mut minus = Vec::with_capacity(n);
    for site in 0..n {
        let p = field.plus()[site];
        let m = field.minus()[site];
        let omega = model.omega_raw(p, m);
        let p2 = p + omega;
        let m2 = m - omega;
        if !(-RANGE_TOL..=1.0 + RANGE_TOL).contains(&p2) || p2.is_nan() {
            return Err(Error::RangeViolation {
                site,
                channel: "p_plus",
                value: p2,
            });
        }
        if !(-RANGE_TOL..=1.0 + RANGE_TOL).contains(&m2) || m2.is_nan() {
            return Err(Error::RangeViolation {
                site,
                channel: "p_minus",
                value: m2,
            });
        }
        plus.push(p2.clamp(0.0, 1.0));
        minus.push(m2.clamp(0.0, 1.0));
    }
    OccupancyField::new(plus, minus)
}

/// One mesoscopic time step: collide, then stream.
pub fn step(field: &OccupancyField, model: &CollisionModel) -> Result<OccupancyField> {
    Ok(collide(field, model)?.stream())
}

/// Advance `n_steps` mesoscopic steps.
pub fn evolve(
    field: &OccupancyField,
    model: &CollisionModel,
    n_steps: usize,
) -> Result<OccupancyField> {
    let mut f = field.clone();
    for _ in 0..n_steps {
        f = step(&f, model)?;
    }
    Ok(f)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::CounterRng;
    use proptest::prelude::*;

    #[test]
    fn classical_symmetric_case_collapses() {
        for p in [0.1, 0.5, 0.9] {
            for alpha in [0.0, 0.3, 1.0] {
                let w = omega_classical(p, p, alpha).unwrap();
                assert!((w - alpha * p * (1.0 - p)).abs() < 1e-15);
            }
        }
        assert!((omega_classical(0.5, 0.5, 0.6).unwrap() - 0.15).abs() < 1e-15);
    }

    #[test]
    fn classical_alpha_zero_is_pure_relaxation() {
        let w = omega_classical(0.8, 0.2, 0.0).unwrap();
        assert!((w - (-0.3)).abs() < 1e-15);
    }

    #[test]
    fn classical_rejects_out_of_range() {
        assert!(omega_classical(1.2, 0.0, 0.5).is_err());
        assert!(omega_classical(0.5, -0.1, 0.5).is_err());
        assert!(omega_classical(0.5, 0.5, 1.5).is_err());
    }

    #[test]
    fn twobit_examples() {
        assert_eq!(omega_twobit(1.0, 0.3).unwrap(), 0.0);
        assert_eq!(omega_twobit(0.0, 1.0).unwrap(), 1.0);
        assert_eq!(omega_twobit(0.5, 0.5).unwrap(), 0.25);
    }

    #[test]
    fn gate_theta_zero_is_phase_diagonal() {
        let g = build_unitary(0.0, 0.7, 0.4);
        let m = g.matrix();
        assert!((m[1][1] - Complex64::from_polar(1.0, 0.4)).norm() < 1e-15);
        assert!((m[2][2] - Complex64::from_polar(1.0, -0.4)).norm() < 1e-15);
        assert!(m[1][2].norm() < 1e-15 && m[2][1].norm() < 1e-15);
        // the debug table prints one row per basis state
        assert_eq!(format!("{g}").lines().count(), 4);
    }

    #[test]
    fn gate_theta_half_pi_is_signed_swap() {
        let g = build_unitary(std::f64::consts::FRAC_PI_2, 0.0, 0.0);
        let m = g.matrix();
        assert!((m[1][2] - 1.0).norm() < 1e-15);
        assert!((m[2][1] + 1.0).norm() < 1e-15);
        assert!(m[1][1].norm() < 1e-15 && m[2][2].norm() < 1e-15);
    }

    #[test]
    fn gate_rejects_non_unitary_and_non_conservative() {
        let mut m = *build_unitary(0.3, 0.1, 0.2).matrix();
        m[1][1] *= 1.5;
        assert!(matches!(UnitaryGate::new(m), Err(Error::NotUnitary { .. })));

        // unitary but mixes |11> with |00>: a swap of rows 0 and 3
        let z = Complex64::new(0.0, 0.0);
        let one = Complex64::new(1.0, 0.0);
        let swap03 = [
            [z, z, z, one],
            [z, one, z, z],
            [z, z, one, z],
            [one, z, z, z],
        ];
        assert!(UnitaryGate::new(swap03).is_err());
    }

    #[test]
    fn expect_identity_gate_gives_zero() {
        let g = build_unitary(0.0, 0.0, 0.0);
        for (p, m) in [(0.3, 0.9), (0.0, 1.0), (0.5, 0.5)] {
            assert!(omega_quantum_expect(p, m, &g).unwrap().abs() < 1e-15);
        }
    }

    #[test]
    fn expect_full_swap_exchanges_occupations() {
        let g = build_unitary(std::f64::consts::FRAC_PI_2, 0.0, 0.0);
        let w = omega_quantum_expect(0.8, 0.3, &g).unwrap();
        assert!((w - (-0.5)).abs() < 1e-12);
    }

    #[test]
    fn closed_form_boundary_cases() {
        // square-root factor vanishes on the boundary of [0,1]^2
        let th = std::f64::consts::FRAC_PI_2;
        for (p, m) in [(0.0, 0.4), (1.0, 0.4), (0.3, 0.0), (0.3, 1.0)] {
            let w = omega_quantum_closed(p, m, th, 0.0, 0.0).unwrap();
            assert!((w - (m - p)).abs() < 1e-12);
        }
    }

    #[test]
    fn collide_conserves_site_density_and_twobit_fixed_point() {
        let f = OccupancyField::new(vec![1.0, 0.2, 0.7], vec![0.5, 0.9, 0.1]).unwrap();
        let out = collide(&f, &CollisionModel::TwoBit).unwrap();
        // site 0 has p_+ = 1: omega = 0, unchanged
        assert_eq!(out.plus()[0], 1.0);
        assert_eq!(out.minus()[0], 0.5);
        for i in 0..3 {
            let before = f.plus()[i] + f.minus()[i];
            let after = out.plus()[i] + out.minus()[i];
            assert!((before - after).abs() < 1e-15);
        }
    }

    #[test]
    fn uniform_equilibrium_is_a_fixed_point_of_step() {
        let model = CollisionModel::Quantum {
            theta: 0.9,
            zeta: 0.2,
            xi: 0.0,
        };
        let eq = crate::theory::equilibrium(&model, 1.2).unwrap();
        let f = OccupancyField::uniform(32, eq.d_plus, eq.d_minus).unwrap();
        let g = step(&f, &model).unwrap();
        for i in 0..32 {
            assert!((g.plus()[i] - f.plus()[i]).abs() < 1e-10);
            assert!((g.minus()[i] - f.minus()[i]).abs() < 1e-10);
        }
    }

    #[test]
    fn closed_form_trajectory_tracks_expectation_value_trajectory() {
        // integrate 40 steps twice: once with the production closed form,
        // once colliding every site through the gate expectation values
        let (theta, zeta, xi) = (1.1, 0.4, 0.1);
        let model = CollisionModel::Quantum { theta, zeta, xi };
        let gate = build_unitary(theta, zeta, xi);
        let n = 64;
        let plus: Vec<f64> = (0..n)
            .map(|i| 0.5 + 0.3 * (2.0 * std::f64::consts::PI * i as f64 / n as f64).sin())
            .collect();
        let minus: Vec<f64> = (0..n)
            .map(|i| 0.5 - 0.2 * (4.0 * std::f64::consts::PI * i as f64 / n as f64).cos())
            .collect();
        let mut fast = OccupancyField::new(plus, minus).unwrap();
        let mut slow = fast.clone();
        for _ in 0..40 {
            fast = step(&fast, &model).unwrap();
            let mut p2 = Vec::with_capacity(n);
            let mut m2 = Vec::with_capacity(n);
            for i in 0..n {
                let w = omega_quantum_expect(slow.plus()[i], slow.minus()[i], &gate).unwrap();
                p2.push(slow.plus()[i] + w);
                m2.push(slow.minus()[i] - w);
            }
            slow = OccupancyField::new(p2, m2).unwrap().stream();
        }
        for i in 0..n {
            assert!((fast.plus()[i] - slow.plus()[i]).abs() < 1e-10);
            assert!((fast.minus()[i] - slow.minus()[i]).abs() < 1e-10);
        }
    }

    #[test]
    fn quantum_theta_quarter_pi_matches_classical_linear_part() {
        // sin^2(pi/4) = 1/2, so the linear part coincides with the
        // classical relaxation term and the square root enters with
        // coefficient sin(pi/2) = 1.
        let rng = CounterRng::new(11);
        for i in 0..200u64 {
            let p = rng.uniform(i, 0);
            let m = rng.uniform(i, 1);
            let w = omega_quantum_closed(p, m, std::f64::consts::FRAC_PI_4, 0.0, 0.0).unwrap();
            let expect = 0.5 * (m - p) + (p * (1.0 - p) * m * (1.0 - m)).sqrt();
            assert!((w - expect).abs() < 1e-14);
        }
    }

    proptest! {
        #[test]
        fn unitarity_for_all_angles(theta in -7.0f64..7.0, zeta in -7.0f64..7.0, xi in -7.0f64..7.0) {
            let g = build_unitary(theta, zeta, xi);
            prop_assert!(g.unitarity_defect() < 1e-12);
            prop_assert!((g.determinant().norm() - 1.0).abs() < 1e-12);
        }

        #[test]
        fn closed_form_matches_expectation(p in 0.0f64..=1.0, m in 0.0f64..=1.0,
                                           theta in -7.0f64..7.0, zeta in -7.0f64..7.0, xi in -7.0f64..7.0) {
            let gate = build_unitary(theta, zeta, xi);
            let a = omega_quantum_expect(p, m, &gate).unwrap();
            let b = omega_quantum_closed(p, m, theta, zeta, xi).unwrap();
            prop_assert!((a - b).abs() < 1e-12, "expect {} vs closed {}", a, b);
        }

        #[test]
        fn closed_form_depends_only_on_angle_difference(p in 0.0f64..=1.0, m in 0.0f64..=1.0,
                                                        theta in -7.0f64..7.0, zeta in -7.0f64..7.0,
                                                        xi in -7.0f64..7.0, shift in -7.0f64..7.0) {
            let a = omega_quantum_closed(p, m, theta, zeta, xi).unwrap();
            let b = omega_quantum_closed(p, m, theta, zeta + shift, xi + shift).unwrap();
            prop_assert!((a - b).abs() < 1e-12);
        }

        #[test]
        fn classical_raw_equals_routing_identity(p in 0.0f64..=1.0, m in 0.0f64..=1.0, alpha in 0.0f64..=1.0) {
            let direct = omega_classical(p, m, alpha).unwrap();
            let routed = 0.5 * (1.0 + alpha) * (1.0 - p) * m - 0.5 * (1.0 - alpha) * p * (1.0 - m);
            prop_assert!((direct - routed).abs() < 1e-14);
        }

        #[test]
        fn all_models_preserve_unit_interval(p in 0.0f64..=1.0, m in 0.0f64..=1.0,
                                             alpha in 0.0f64..=1.0, theta in -7.0f64..7.0,
                                             zeta in -7.0f64..7.0, xi in -7.0f64..7.0) {
            for model in [
                CollisionModel::ClassicalBl { alpha },
                CollisionModel::TwoBit,
                CollisionModel::Quantum { theta, zeta, xi },
            ] {
                if model.validate().is_err() {
                    continue; // theta at a multiple of pi
                }
                let w = model.omega_raw(p, m);
                prop_assert!(p + w >= -1e-12 && p + w <= 1.0 + 1e-12, "{:?}: p' = {}", model, p + w);
                prop_assert!(m - w >= -1e-12 && m - w <= 1.0 + 1e-12, "{:?}: m' = {}", model, m - w);
                // site density conserved identically
                prop_assert!(((p + w) + (m - w) - (p + m)).abs() < 1e-15);
            }
        }
    }
}
