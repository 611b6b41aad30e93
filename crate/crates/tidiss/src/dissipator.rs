//! Jump-operator families: translation-invariant jumps `e^{-iκx} f(p)`, the
//! isotropic pair, and the quantum-optical-master-equation baseline.

use num_complex::Complex64 as C64;

use crate::fock::{displacement_phase, func_of_hermitian, CanonicalOps, Operator};
use crate::profile::MomentumProfile;
use crate::{Error, Result, UnitSystem};

/// One translation-invariant jump term `A = e^{-iκx} f(p)`.
#[derive(Clone, Debug, PartialEq)]
pub struct JumpSpec {
    pub kappa: f64,
    pub profile: MomentumProfile,
}

impl JumpSpec {
    pub fn new(kappa: f64, profile: MomentumProfile) -> Result<Self> {
        if !kappa.is_finite() {
            return Err(Error::NonFiniteInput("kappa"));
        }
        profile.validate()?;
        Ok(Self { kappa, profile })
    }
}

/// Optional unitary drift `L_aux = -i[κ_aux·x + f_aux(p), ·]`, folded into the
/// Hamiltonian as `H → H + ħ(κ_aux·x + f_aux(p))`.
#[derive(Clone, Debug, PartialEq)]
pub struct DriftSpec {
    pub kappa_aux: f64,
    pub f_aux: MomentumProfile,
}

/// A full translation-invariant dissipator: jump terms, optional drift and an
/// overall rate Γ multiplying the whole dissipator.
#[derive(Clone, Debug, PartialEq)]
pub struct DissipatorSpec {
    pub jumps: Vec<JumpSpec>,
    pub drift: Option<DriftSpec>,
    pub rate: f64,
}

impl DissipatorSpec {
    pub fn new(jumps: Vec<JumpSpec>, rate: f64) -> Result<Self> {
        if !(rate.is_finite() && rate >= 0.0) {
            return Err(Error::Config(format!("overall rate {rate} must be >= 0")));
        }
        Ok(Self {
            jumps,
            drift: None,
            rate,
        })
    }

    /// Builds the jump matrices on the given canonical operators.
    pub fn jump_operators(&self, ops: &CanonicalOps, units: &UnitSystem) -> Result<Vec<Operator>> {
        self.jumps
            .iter()
            .map(|j| jump_operator(j, ops, units))
            .collect()
    }

    /// Drift contribution to the Hamiltonian, `ħ(κ_aux·x + f_aux(p))`.
    pub fn drift_hamiltonian(&self, ops: &CanonicalOps, units: &UnitSystem) -> Result<Option<Operator>> {
        match &self.drift {
            None => Ok(None),
            Some(d) => {
                let xterm = ops.x.scale(C64::new(units.hbar() * d.kappa_aux, 0.0));
                let pterm = func_of_hermitian(&ops.p, |u| {
                    C64::new(units.hbar() * d.f_aux.eval(u, units), 0.0)
                })?;
                Ok(Some(&xterm + &pterm))
            }
        }
    }
}

/// Builds `A = e^{-iκx}·f(p)` via spectral calculus.
pub fn jump_operator(spec: &JumpSpec, ops: &CanonicalOps, units: &UnitSystem) -> Result<Operator> {
    let phase = displacement_phase(&ops.x, spec.kappa)?;
    let fp = func_of_hermitian(&ops.p, |u| C64::new(spec.profile.eval(u, units), 0.0))?;
    Ok(phase.dot(&fp))
}

/// The isotropic pair of Eq.-(11) form: `A± = e^{∓iκx} f(±p)`.
pub fn isotropic_pair(kappa: f64, profile: MomentumProfile) -> Result<[JumpSpec; 2]> {
    if !(kappa.is_finite() && kappa >= 0.0) {
        return Err(Error::Config(format!("isotropic pair requires kappa >= 0, got {kappa}")));
    }
    let plus = JumpSpec::new(kappa, profile.clone())?;
    let minus = JumpSpec::new(-kappa, profile.reflected())?;
    Ok([plus, minus])
}

/// Isotropic translation-invariant dissipator `Γ·(D_{A+} + D_{A-})`.
pub fn isotropic_dissipator(kappa: f64, profile: MomentumProfile, rate: f64) -> Result<DissipatorSpec> {
    let [plus, minus] = isotropic_pair(kappa, profile)?;
    DissipatorSpec::new(vec![plus, minus], rate)
}

/// Quantum optical master equation baseline: thermal ladder jumps.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct QomeSpec {
    pub gamma: f64,
    pub theta: f64,
}

impl QomeSpec {
    pub fn new(gamma: f64, theta: f64) -> Result<Self> {
        if !(gamma.is_finite() && gamma >= 0.0) {
            return Err(Error::Config(format!("QOME rate {gamma} must be >= 0")));
        }
        if !(theta.is_finite() && theta >= 0.0) {
            return Err(Error::Config(format!("QOME temperature {theta} must be >= 0")));
        }
        Ok(Self { gamma, theta })
    }
}

/// `L1 = √(2Γω)(1-e^{-ħω/θ})^{-1/2}·a` and `L2 = √(2Γω)(e^{ħω/θ}-1)^{-1/2}·a†`.
/// At θ = 0 the Bose factors give `L1 = √(2Γω)·a` and `L2 = 0`.
pub fn qome_jumps(spec: &QomeSpec, ops: &CanonicalOps, units: &UnitSystem) -> Result<Vec<Operator>> {
    let dim = ops.a.dim();
    let g2w = 2.0 * spec.gamma * units.omega();
    if spec.theta == 0.0 {
        return Ok(vec![
            ops.a.scale(C64::new(g2w.sqrt(), 0.0)),
            Operator::zeros(dim)?,
        ]);
    }
    let u = units.hbar() * units.omega() / spec.theta;
    let l1 = (g2w / (1.0 - (-u).exp())).sqrt();
    let l2 = (g2w / (u.exp() - 1.0)).sqrt();
    Ok(vec![
        ops.a.scale(C64::new(l1, 0.0)),
        ops.a_dag.scale(C64::new(l2, 0.0)),
    ])
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fock::{build_canonical_operators, DensityMatrix};
    use crate::liouvillian::Lindblad;
    use crate::profile::optimal_profile;

    fn setup(dim: usize) -> (UnitSystem, CanonicalOps) {
        let u = UnitSystem::default();
        let ops = build_canonical_operators(&u, dim).unwrap();
        (u, ops)
    }

    #[test]
    fn scalar_jump_generates_no_dissipation() {
        let (u, ops) = setup(12);
        let spec = JumpSpec::new(0.0, MomentumProfile::Constant { c: 2.0 }).unwrap();
        let a = jump_operator(&spec, &ops, &u).unwrap();
        assert!((&a - &Operator::identity(12).unwrap().scale(C64::new(2.0, 0.0))).max_abs() < 1e-12);
        let h = Operator::zeros(12).unwrap();
        let lind = Lindblad::new(h, vec![a], 1.0).unwrap();
        let rho = DensityMatrix::fock_state(12, 3).unwrap();
        assert!(lind.apply(rho.op()).max_abs() < 1e-12);
    }

    #[test]
    fn constant_profile_jump_is_unitary() {
        let (u, ops) = setup(30);
        let spec = JumpSpec::new(1.0, MomentumProfile::Constant { c: 1.0 }).unwrap();
        let a = jump_operator(&spec, &ops, &u).unwrap();
        assert!((&a.dagger().dot(&a) - &Operator::identity(30).unwrap()).max_abs() < 1e-9);
    }

    #[test]
    fn exponential_jump_ground_state_moment() {
        // <0| A†A |0> = <0| e^{2·(1/2)·p} |0> = exp((2λ')²<p²>/2) with λ'=1/2, <p²>=1/2
        let (u, ops) = setup(40);
        let spec = JumpSpec::new(
            0.5,
            MomentumProfile::OptimalExp { c: 1.0, lambda: 0.5 },
        )
        .unwrap();
        let a = jump_operator(&spec, &ops, &u).unwrap();
        let ground = DensityMatrix::fock_state(40, 0).unwrap();
        let val = ground.expect(&a.dagger().dot(&a));
        let expected = (0.25f64).exp(); // Gaussian moment: exp(lambda^2 <p^2>/... ) = e^{1/4}
        assert!((val - expected).abs() < 1e-6, "{val} vs {expected}");
    }

    #[test]
    fn isotropic_pair_symmetry() {
        let (u, ops) = setup(24);
        let profile = MomentumProfile::DopplerLorentz { c1: 1.0, c2: 1.0, c3: 0.0 }; // even
        let [plus, minus] = isotropic_pair(0.0, profile).unwrap();
        let ap = jump_operator(&plus, &ops, &u).unwrap();
        let am = jump_operator(&minus, &ops, &u).unwrap();
        assert!((&ap - &am).max_abs() < 1e-10);
    }

    #[test]
    fn isotropic_pair_swaps_under_parity() {
        // parity in the Fock basis: P[n,n] = (-1)^n; P x P = -x, P p P = -p
        let (u, ops) = setup(30);
        let profile = MomentumProfile::OptimalExp { c: 1.0, lambda: 0.4 };
        let [plus, minus] = isotropic_pair(0.6, profile).unwrap();
        let ap = jump_operator(&plus, &ops, &u).unwrap();
        let am = jump_operator(&minus, &ops, &u).unwrap();
        let parity = func_of_hermitian(&ops.a_dag.dot(&ops.a), |n| {
            C64::new(if (n.round() as i64) % 2 == 0 { 1.0 } else { -1.0 }, 0.0)
        })
        .unwrap();
        let swapped = parity.dot(&ap).dot(&parity);
        assert!((&swapped - &am).max_abs() < 1e-8);
    }

    #[test]
    fn isotropic_pair_cools_positive_momentum() {
        // net friction -ħκ(<f(p)²> - <f(-p)²>) < 0 on a state with <p> > 0
        let (u, ops) = setup(40);
        let profile = optimal_profile(0.0, 0.5, &u, 1.0).unwrap();
        let [plus, minus] = isotropic_pair(0.5, profile).unwrap();
        // displaced-in-momentum thermal-ish state: e^{-i x} |0> has <p> = 1 > 0
        let shift = displacement_phase(&ops.x, -1.0).unwrap();
        let mut psi = ndarray::Array1::zeros(40);
        psi[0] = C64::new(1.0, 0.0);
        let moved = shift.data().dot(&psi);
        let rho = DensityMatrix::from_pure(&moved).unwrap();
        assert!(rho.expect(&ops.p) > 0.5);
        let mut friction = 0.0;
        for j in [&plus, &minus] {
            let f2 = func_of_hermitian(&ops.p, |p| {
                let f = j.profile.eval(p, &u);
                C64::new(f * f, 0.0)
            })
            .unwrap();
            friction += -u.hbar() * j.kappa * rho.expect(&f2);
        }
        assert!(friction < 0.0, "friction {friction}");
    }

    #[test]
    fn qome_zero_temperature() {
        let (u, ops) = setup(16);
        let spec = QomeSpec::new(1.0, 0.0).unwrap();
        let jumps = qome_jumps(&spec, &ops, &u).unwrap();
        let expected = ops.a.scale(C64::new(2.0f64.sqrt(), 0.0));
        assert!((&jumps[0] - &expected).max_abs() < 1e-12);
        assert!(jumps[1].max_abs() == 0.0);
    }

    #[test]
    fn qome_detailed_balance_ratio() {
        let (u, ops) = setup(16);
        let theta = 1.0 / 2.0f64.ln();
        let spec = QomeSpec::new(0.3, theta).unwrap();
        let jumps = qome_jumps(&spec, &ops, &u).unwrap();
        let l1 = jumps[0].data()[[0, 1]].norm();
        let l2 = jumps[1].data()[[1, 0]].norm();
        assert!(((l2 / l1).powi(2) - 0.5).abs() < 1e-12);
    }

    #[test]
    fn qome_bose_prefactor_identity() {
        // |l1|² - |l2|² = 2Γω for any θ > 0
        let (u, ops) = setup(16);
        for theta in [0.1, 0.7, 3.0] {
            let spec = QomeSpec::new(0.4, theta).unwrap();
            let jumps = qome_jumps(&spec, &ops, &u).unwrap();
            let l1 = jumps[0].data()[[0, 1]].norm_sqr();
            let l2 = jumps[1].data()[[1, 0]].norm_sqr();
            assert!((l1 - l2 - 0.8).abs() < 1e-12, "theta={theta}");
        }
    }

    #[test]
    fn translation_covariance_of_jumps() {
        // D(s)† A D(s) = e^{-iκs} A with D(s) = e^{-isp/ħ}, on the interior block
        let (u, ops) = setup(40);
        let spec = JumpSpec::new(
            0.5,
            MomentumProfile::OptimalExp { c: 1.0, lambda: 0.3 },
        )
        .unwrap();
        let a = jump_operator(&spec, &ops, &u).unwrap();
        let s = 0.8;
        let d = func_of_hermitian(&ops.p, |p| C64::from_polar(1.0, -s * p / u.hbar())).unwrap();
        let moved = d.dagger().dot(&a).dot(&d);
        let expected = a.scale(C64::from_polar(1.0, -spec.kappa * s));
        let diff = &moved - &expected;
        let dim = a.dim();
        let mut max = 0.0f64;
        for i in 0..dim - 20 {
            for j in 0..dim - 20 {
                max = max.max(diff.data()[[i, j]].norm());
            }
        }
        assert!(max < 1e-10, "interior deviation {max}");
    }
}
