//! Lindblad generators: matrix-free application, dense superoperator
//! assembly, steady-state solvers and time propagation.
//!
//! Vectorization is row-major: `vec(ρ)[i·D + j] = ρ[i,j]`, so
//! `AρB ↦ (A ⊗ Bᵀ)·vec(ρ)`.

use ndarray::linalg::kron;
use ndarray::Array1;
use ndarray_linalg::{Eig, Factorize, Solve};
use num_complex::Complex64 as C64;

use crate::dissipator::{qome_jumps, DissipatorSpec, QomeSpec};
use crate::fock::{build_hamiltonian, CanonicalOps, CMat, DensityMatrix, Operator};
use crate::{Error, Result, UnitSystem};

const I: C64 = C64::new(0.0, 1.0);

struct JumpMatrices {
    l: CMat,
    l_dag: CMat,
    /// `L†L`, precomputed once.
    ll: CMat,
}

/// A Lindblad generator `L[ρ] = -i[H,ρ] + Γ·Σ_k D_{L_k}[ρ]` in natural units
/// (`ħ = 1`).
pub struct Lindblad {
    h: Operator,
    jumps: Vec<JumpMatrices>,
    rate: f64,
    dim: usize,
}

/// Steady state together with its quality certificates.
pub struct SteadyStateResult {
    pub rho: DensityMatrix,
    /// `‖L[ρ]‖_max` evaluated matrix-free on the returned state.
    pub residual_norm: f64,
    /// `-max Re λ` over non-stationary eigenvalues; only the dense
    /// eigendecomposition route computes it.
    pub spectral_gap: Option<f64>,
}

impl Lindblad {
    pub fn new(h: Operator, jumps: Vec<Operator>, rate: f64) -> Result<Self> {
        let dim = h.dim();
        if !h.is_hermitian(1e-8) {
            return Err(Error::NotHermitian(h.herm_deviation()));
        }
        if !(rate.is_finite() && rate >= 0.0) {
            return Err(Error::Config(format!("Lindblad rate {rate} must be >= 0")));
        }
        let jumps = jumps
            .into_iter()
            .map(|op| {
                if op.dim() != dim {
                    return Err(Error::DimensionMismatch(op.dim(), dim));
                }
                let l_dag = op.dagger().into_data();
                let l = op.into_data();
                let ll = l_dag.dot(&l);
                Ok(JumpMatrices { l, l_dag, ll })
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(Self { h, jumps, rate, dim })
    }

    /// Generator for a translation-invariant dissipator on the (possibly
    /// displaced) oscillator, with any drift folded into the Hamiltonian.
    pub fn for_dissipator(
        spec: &DissipatorSpec,
        ops: &CanonicalOps,
        units: &UnitSystem,
        displacement: f64,
    ) -> Result<Self> {
        let mut h = build_hamiltonian(ops, units, displacement)?;
        if let Some(drift) = spec.drift_hamiltonian(ops, units)? {
            h = &h + &drift;
        }
        Self::new(h, spec.jump_operators(ops, units)?, spec.rate)
    }

    /// Generator for the quantum-optical baseline.
    pub fn for_qome(
        spec: &QomeSpec,
        ops: &CanonicalOps,
        units: &UnitSystem,
        displacement: f64,
    ) -> Result<Self> {
        let h = build_hamiltonian(ops, units, displacement)?;
        Self::new(h, qome_jumps(spec, ops, units)?, 1.0)
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn hamiltonian(&self) -> &Operator {
        &self.h
    }

    /// `L[ρ]` without ever forming the `D²×D²` matrix.
    pub fn apply(&self, rho: &Operator) -> Operator {
        let r = rho.data();
        let h = self.h.data();
        let mut out = (h.dot(r) - r.dot(h)).mapv(|z| -I * z);
        for j in &self.jumps {
            let sandwich = j.l.dot(r).dot(&j.l_dag);
            let anti = j.ll.dot(r) + r.dot(&j.ll);
            out = out + (sandwich - anti.mapv(|z| z * 0.5)).mapv(|z| z * self.rate);
        }
        Operator::new(out).expect("generator output stays square and finite")
    }

    /// Dense `D²×D²` matrix of the generator in row-major vectorization.
    pub fn superoperator(&self) -> Superoperator {
        let d = self.dim;
        let eye = CMat::eye(d);
        let h = self.h.data();
        let mut s = kron(h, &eye) - kron(&eye, &h.t().to_owned());
        s.mapv_inplace(|z| -I * z);
        for j in &self.jumps {
            let lconj = j.l.mapv(|z| z.conj());
            let mut diss = kron(&j.l, &lconj);
            diss = diss
                - (kron(&j.ll, &eye) + kron(&eye, &j.ll.t().to_owned())).mapv(|z| z * 0.5);
            s = s + diss.mapv(|z| z * self.rate);
        }
        Superoperator { dim: d, data: s }
    }

    /// Choi matrix of the jump part alone: `Γ·Σ_k vec(L_k)·vec(L_k)†`.
    pub fn jump_choi(&self) -> CMat {
        let d2 = self.dim * self.dim;
        let mut c = CMat::zeros((d2, d2));
        for j in &self.jumps {
            let v: Array1<C64> = Array1::from_iter(j.l.iter().cloned());
            for a in 0..d2 {
                for b in 0..d2 {
                    c[[a, b]] += v[a] * v[b].conj() * self.rate;
                }
            }
        }
        c
    }

    /// Steady state by full dense eigendecomposition. Reports the spectral
    /// gap and fails hard on a degenerate null space.
    pub fn steady_state(&self) -> Result<SteadyStateResult> {
        let s = self.superoperator();
        let (vals, vecs) = s.data.eig()?;
        let scale = vals.iter().map(|z| z.norm()).fold(0.0, f64::max).max(1.0);
        let tol = 1e-10;
        let mut null_idx = Vec::new();
        for (k, v) in vals.iter().enumerate() {
            if v.norm() < tol * scale {
                null_idx.push(k);
            }
        }
        match null_idx.len() {
            1 => {}
            n => return Err(Error::DegenerateNullSpace { count: n, tol }),
        }
        let gap = vals
            .iter()
            .enumerate()
            .filter(|(k, _)| *k != null_idx[0])
            .map(|(_, v)| -v.re)
            .fold(f64::INFINITY, f64::min);
        let rho = self.normalize_null_vector(&vecs.column(null_idx[0]).to_owned())?;
        let residual_norm = self.apply(rho.op()).max_abs();
        Ok(SteadyStateResult {
            rho,
            residual_norm,
            spectral_gap: Some(gap.max(0.0)),
        })
    }

    /// Steady state by shift-inverted inverse iteration. Much faster than the
    /// dense eigensolver and accurate to machine precision, but it cannot
    /// certify uniqueness or report a gap.
    pub fn steady_state_iterative(&self, seed: Option<&DensityMatrix>) -> Result<SteadyStateResult> {
        let s = self.superoperator();
        let d = self.dim;
        let d2 = d * d;
        // shift scale from the diagonal so the LU stays well conditioned
        let scale = s
            .data
            .diag()
            .iter()
            .map(|z| z.norm())
            .fold(0.0, f64::max)
            .max(1.0);
        let mut shifted = s.data;
        for k in 0..d2 {
            shifted[[k, k]] -= C64::new(1e-12 * scale, 0.0);
        }
        let lu = shifted.factorize()?;

        let mut v: Array1<C64> = match seed {
            Some(rho) => Array1::from_iter(rho.data().iter().cloned()),
            None => {
                let mut ident = Array1::zeros(d2);
                for i in 0..d {
                    ident[i * d + i] = C64::new(1.0 / d as f64, 0.0);
                }
                ident
            }
        };

        let tol = 1e-9;
        let max_iters = 30;
        let mut best: Option<(f64, DensityMatrix)> = None;
        for it in 0..max_iters {
            v = lu.solve(&v)?;
            let norm = v.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
            if !(norm.is_finite() && norm > 0.0) {
                return Err(Error::SteadyStateNotConverged {
                    residual: f64::INFINITY,
                    iterations: it + 1,
                });
            }
            v.mapv_inplace(|z| z / norm);
            let rho = self.normalize_null_vector(&v)?;
            let res = self.apply(rho.op()).max_abs();
            let improved = best.as_ref().map_or(true, |(r, _)| res < *r);
            if improved {
                best = Some((res, rho));
            }
            if res < tol {
                break;
            }
            if !improved && it > 2 {
                break; // stagnated at the attainable precision
            }
        }
        let (residual_norm, rho) = best.expect("at least one iterate recorded");
        if residual_norm >= tol {
            return Err(Error::SteadyStateNotConverged {
                residual: residual_norm,
                iterations: max_iters,
            });
        }
        Ok(SteadyStateResult {
            rho,
            residual_norm,
            spectral_gap: None,
        })
    }

    fn normalize_null_vector(&self, v: &Array1<C64>) -> Result<DensityMatrix> {
        let d = self.dim;
        let mut m = CMat::zeros((d, d));
        for i in 0..d {
            for j in 0..d {
                m[[i, j]] = v[i * d + j];
            }
        }
        // rotate the overall phase onto a positive trace, then Hermitize
        let tr = m.diag().sum();
        if tr.norm() < 1e-14 {
            return Err(Error::InvalidDensityMatrix(
                "null vector is traceless; not a state".into(),
            ));
        }
        let phase = tr / tr.norm();
        m.mapv_inplace(|z| z / phase);
        let herm = (&m + &m.t().mapv(|z| z.conj())).mapv(|z| z * 0.5);
        DensityMatrix::new(Operator::new(herm)?)
    }

    /// Adaptive Dormand–Prince RK45 propagation of `ρ̇ = L[ρ]` to `t_final`.
    pub fn propagate(&self, rho0: &DensityMatrix, t_final: f64, rtol: f64, atol: f64) -> Result<DensityMatrix> {
        if !(t_final.is_finite() && t_final >= 0.0) {
            return Err(Error::NonFiniteInput("t_final"));
        }
        let mut y = rho0.data().clone();
        let mut t = 0.0;
        let mut dt = (t_final / 100.0).max(1e-6);
        let f = |m: &CMat| -> CMat {
            self.apply(&Operator::new(m.clone()).expect("finite state"))
                .into_data()
        };
        // Dormand–Prince 5(4) tableau
        const A: [[f64; 6]; 6] = [
            [1.0 / 5.0, 0.0, 0.0, 0.0, 0.0, 0.0],
            [3.0 / 40.0, 9.0 / 40.0, 0.0, 0.0, 0.0, 0.0],
            [44.0 / 45.0, -56.0 / 15.0, 32.0 / 9.0, 0.0, 0.0, 0.0],
            [19372.0 / 6561.0, -25360.0 / 2187.0, 64448.0 / 6561.0, -212.0 / 729.0, 0.0, 0.0],
            [9017.0 / 3168.0, -355.0 / 33.0, 46732.0 / 5247.0, 49.0 / 176.0, -5103.0 / 18656.0, 0.0],
            [35.0 / 384.0, 0.0, 500.0 / 1113.0, 125.0 / 192.0, -2187.0 / 6784.0, 11.0 / 84.0],
        ];
        const B5: [f64; 7] = [
            35.0 / 384.0, 0.0, 500.0 / 1113.0, 125.0 / 192.0, -2187.0 / 6784.0, 11.0 / 84.0, 0.0,
        ];
        const B4: [f64; 7] = [
            5179.0 / 57600.0, 0.0, 7571.0 / 16695.0, 393.0 / 640.0,
            -92097.0 / 339200.0, 187.0 / 2100.0, 1.0 / 40.0,
        ];
        while t < t_final {
            dt = dt.min(t_final - t);
            let mut k: Vec<CMat> = Vec::with_capacity(7);
            k.push(f(&y));
            for stage in 0..6 {
                let mut arg = y.clone();
                for (j, kj) in k.iter().enumerate() {
                    let c = A[stage][j] * dt;
                    if c != 0.0 {
                        arg = arg + kj.mapv(|z| z * c);
                    }
                }
                k.push(f(&arg));
            }
            let mut y5 = y.clone();
            let mut err = CMat::zeros(y.dim());
            for (j, kj) in k.iter().enumerate() {
                if B5[j] != 0.0 {
                    y5 = y5 + kj.mapv(|z| z * (B5[j] * dt));
                }
                let diff = (B5[j] - B4[j]) * dt;
                if diff != 0.0 {
                    err = err + kj.mapv(|z| z * diff);
                }
            }
            let err_norm = err.iter().map(|z| z.norm()).fold(0.0, f64::max);
            let y_norm = y.iter().map(|z| z.norm()).fold(0.0, f64::max);
            let tol = atol + rtol * y_norm;
            if err_norm <= tol {
                t += dt;
                y = y5;
            }
            let factor = if err_norm > 0.0 {
                0.9 * (tol / err_norm).powf(0.2)
            } else {
                5.0
            };
            dt *= factor.clamp(0.2, 5.0);
            if dt < 1e-14 * t_final.max(1.0) {
                return Err(Error::StepSizeUnderflow { t_reached: t, dt });
            }
        }
        DensityMatrix::new(Operator::new(y)?)
    }
}

/// Dense generator matrix, `D²×D²`, row-major vectorization.
pub struct Superoperator {
    dim: usize,
    data: CMat,
}

impl Superoperator {
    /// Underlying Fock dimension `D` (the matrix is `D²×D²`).
    pub fn fock_dim(&self) -> usize {
        self.dim
    }

    pub fn data(&self) -> &CMat {
        &self.data
    }

    /// Choi reshuffle `C[i·D+j, k·D+l] = S[i·D+k, j·D+l]`.
    pub fn choi(&self) -> CMat {
        let d = self.dim;
        let mut c = CMat::zeros((d * d, d * d));
        for i in 0..d {
            for j in 0..d {
                for k in 0..d {
                    for l in 0..d {
                        c[[i * d + j, k * d + l]] = self.data[[i * d + k, j * d + l]];
                    }
                }
            }
        }
        c
    }

    /// `vec(I)ᵀ·S`, which must vanish for a trace-preserving generator.
    pub fn trace_defect(&self) -> f64 {
        let d = self.dim;
        let mut max = 0.0f64;
        for col in 0..d * d {
            let mut acc = C64::new(0.0, 0.0);
            for i in 0..d {
                acc += self.data[[i * d + i, col]];
            }
            max = max.max(acc.norm());
        }
        max
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fock::build_canonical_operators;
    use ndarray_linalg::Eigh;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn setup(dim: usize) -> (UnitSystem, CanonicalOps) {
        let u = UnitSystem::default();
        (u, build_canonical_operators(&u, dim).unwrap())
    }

    fn random_herm(dim: usize, seed: u64) -> Operator {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut m = CMat::zeros((dim, dim));
        for i in 0..dim {
            for j in 0..dim {
                m[[i, j]] = C64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0));
            }
        }
        let h = (&m + &m.t().mapv(|z| z.conj())).mapv(|z| z * 0.5);
        Operator::new(h).unwrap()
    }

    fn random_general(dim: usize, seed: u64) -> Operator {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut m = CMat::zeros((dim, dim));
        for i in 0..dim {
            for j in 0..dim {
                m[[i, j]] = C64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0));
            }
        }
        Operator::new(m).unwrap()
    }

    fn qome_lindblad(dim: usize, gamma: f64, theta: f64) -> Lindblad {
        let (u, ops) = setup(dim);
        Lindblad::for_qome(&QomeSpec::new(gamma, theta).unwrap(), &ops, &u, 0.0).unwrap()
    }

    /// Geometric thermal populations on the truncated space, renormalized.
    fn truncated_thermal(dim: usize, theta: f64) -> DensityMatrix {
        let q = (-1.0 / theta).exp();
        let mut m = CMat::zeros((dim, dim));
        let norm: f64 = (0..dim).map(|n| q.powi(n as i32)).sum();
        for n in 0..dim {
            m[[n, n]] = C64::new(q.powi(n as i32) / norm, 0.0);
        }
        DensityMatrix::new(Operator::new(m).unwrap()).unwrap()
    }

    #[test]
    fn superoperator_matches_direct_application() {
        let dim = 6;
        let h = random_herm(dim, 1);
        let l1 = random_general(dim, 2);
        let l2 = random_general(dim, 3);
        let lind = Lindblad::new(h, vec![l1, l2], 0.7).unwrap();
        let s = lind.superoperator();
        let rho = random_general(dim, 4);
        let direct = lind.apply(&rho);
        let v = Array1::from_iter(rho.data().iter().cloned());
        let sv = s.data().dot(&v);
        let mut max = 0.0f64;
        for i in 0..dim {
            for j in 0..dim {
                max = max.max((sv[i * dim + j] - direct.data()[[i, j]]).norm());
            }
        }
        assert!(max < 1e-12, "vectorization mismatch {max}");
    }

    #[test]
    fn decay_jump_on_first_excited_state() {
        // D_a[|1><1|] = |0><0| - |1><1|
        let (_, ops) = setup(5);
        let h = Operator::zeros(5).unwrap();
        let lind = Lindblad::new(h, vec![ops.a.clone()], 1.0).unwrap();
        let rho = DensityMatrix::fock_state(5, 1).unwrap();
        let out = lind.apply(rho.op());
        let mut expected = CMat::zeros((5, 5));
        expected[[0, 0]] = C64::new(1.0, 0.0);
        expected[[1, 1]] = C64::new(-1.0, 0.0);
        assert!((&out - &Operator::new(expected).unwrap()).max_abs() < 1e-14);
    }

    #[test]
    fn generator_preserves_trace_and_hermiticity() {
        let dim = 8;
        let h = random_herm(dim, 10);
        let l = random_general(dim, 11);
        let lind = Lindblad::new(h, vec![l], 1.3).unwrap();
        let rho = random_herm(dim, 12);
        let out = lind.apply(&rho);
        assert!(out.trace().norm() < 1e-12);
        assert!(out.herm_deviation() < 1e-12);
    }

    #[test]
    fn superoperator_trace_defect_vanishes() {
        let dim = 7;
        let lind = Lindblad::new(random_herm(dim, 20), vec![random_general(dim, 21)], 0.5).unwrap();
        assert!(lind.superoperator().trace_defect() < 1e-12);
    }

    #[test]
    fn jump_choi_matches_reshuffle_and_is_psd() {
        let dim = 5;
        let lind = Lindblad::new(
            Operator::zeros(dim).unwrap(),
            vec![random_general(dim, 30), random_general(dim, 31)],
            0.8,
        )
        .unwrap();
        // dissipator-only generator without the anticommutator: build a
        // jump-only Lindblad whose sandwich part is exactly the Choi source
        let direct = lind.jump_choi();
        // reshuffle of the sandwich-only superoperator
        let d2 = dim * dim;
        let eye = CMat::eye(dim);
        let mut s = CMat::zeros((d2, d2));
        for j in &lind.jumps {
            let lconj = j.l.mapv(|z| z.conj());
            s = s + kron(&j.l, &lconj).mapv(|z| z * lind.rate);
        }
        let _ = eye;
        let sup = Superoperator { dim, data: s };
        let resh = sup.choi();
        let mut max = 0.0f64;
        for a in 0..d2 {
            for b in 0..d2 {
                max = max.max((resh[[a, b]] - direct[[a, b]]).norm());
            }
        }
        assert!(max < 1e-12, "choi mismatch {max}");
        let herm = (&direct + &direct.t().mapv(|z| z.conj())).mapv(|z| z * 0.5);
        let (vals, _) = herm.eigh(ndarray_linalg::UPLO::Lower).unwrap();
        assert!(vals.iter().all(|v| *v > -1e-10), "choi not PSD");
    }

    #[test]
    fn qome_thermal_state_is_stationary() {
        let dim = 14;
        let theta = 0.5;
        let lind = qome_lindblad(dim, 0.2, theta);
        let thermal = truncated_thermal(dim, theta);
        // detailed balance holds exactly on the truncated geometric state
        assert!(lind.apply(thermal.op()).max_abs() < 1e-12);
    }

    #[test]
    fn dense_steady_state_recovers_thermal() {
        let dim = 12;
        let theta = 0.8;
        let lind = qome_lindblad(dim, 0.1, theta);
        let result = lind.steady_state().unwrap();
        let thermal = truncated_thermal(dim, theta);
        assert!((result.rho.op() - thermal.op()).max_abs() < 1e-9);
        assert!(result.residual_norm < 1e-10);
        let gap = result.spectral_gap.unwrap();
        assert!(gap > 0.0);
        // slowest decay of the damped oscillator is Γω (amplitude channel)
        assert!((gap - 0.1).abs() < 0.02, "gap {gap}");
    }

    #[test]
    fn iterative_steady_state_agrees_with_dense() {
        let dim = 12;
        let lind = qome_lindblad(dim, 0.15, 1.0);
        let dense = lind.steady_state().unwrap();
        let iter = lind.steady_state_iterative(None).unwrap();
        assert!((dense.rho.op() - iter.rho.op()).max_abs() < 1e-9);
        assert!(iter.residual_norm < 1e-10);
        assert!(iter.spectral_gap.is_none());
    }

    #[test]
    fn purely_unitary_generator_has_degenerate_null_space() {
        let (u, ops) = setup(6);
        let h = build_hamiltonian(&ops, &u, 0.0).unwrap();
        let lind = Lindblad::new(h, vec![], 1.0).unwrap();
        match lind.steady_state() {
            Err(Error::DegenerateNullSpace { count, .. }) => assert!(count > 1),
            other => panic!("expected degeneracy, got {:?}", other.map(|r| r.residual_norm)),
        }
    }

    #[test]
    fn unitary_revival_after_full_period() {
        let (u, ops) = setup(25);
        let h = build_hamiltonian(&ops, &u, 0.0).unwrap();
        let lind = Lindblad::new(h, vec![], 1.0).unwrap();
        let shift = crate::fock::displacement_phase(&ops.p, 0.7).unwrap();
        let mut psi = Array1::zeros(25);
        psi[0] = C64::new(1.0, 0.0);
        let rho0 = DensityMatrix::from_pure(&shift.data().dot(&psi)).unwrap();
        let rho_t = lind
            .propagate(&rho0, 2.0 * std::f64::consts::PI, 1e-10, 1e-12)
            .unwrap();
        assert!((rho_t.op() - rho0.op()).max_abs() < 1e-6);
    }

    #[test]
    fn zero_temperature_decay_reaches_ground_state() {
        let dim = 10;
        let lind = qome_lindblad(dim, 0.5, 0.0);
        let rho0 = DensityMatrix::fock_state(dim, 1).unwrap();
        let rho_t = lind.propagate(&rho0, 20.0, 1e-8, 1e-10).unwrap();
        let ground = DensityMatrix::fock_state(dim, 0).unwrap();
        assert!((rho_t.op() - ground.op()).max_abs() < 1e-6);
    }

    #[test]
    fn energy_relaxes_at_twice_gamma_omega() {
        // <H>(t) - E_ss decays as e^{-2Γω t}
        let dim = 12;
        let gamma = 0.1;
        let (u, ops) = setup(dim);
        let lind = qome_lindblad(dim, gamma, 0.0);
        let h = build_hamiltonian(&ops, &u, 0.0).unwrap();
        let rho0 = DensityMatrix::fock_state(dim, 2).unwrap();
        let e0 = rho0.expect(&h) - 0.5;
        let t = 3.0;
        let rho_t = lind.propagate(&rho0, t, 1e-9, 1e-11).unwrap();
        let et = rho_t.expect(&h) - 0.5;
        let measured = -(et / e0).ln() / t;
        let expected = 2.0 * gamma; // 2Γω with ω = 1
        assert!(
            (measured - expected).abs() / expected < 0.02,
            "rate {measured} vs {expected}"
        );
    }
}
