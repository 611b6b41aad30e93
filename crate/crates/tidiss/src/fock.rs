//! Truncated-Fock-space operator algebra.
//!
//! Canonical operators are built in the number basis; functions of Hermitian
//! operators (including the displacement phases `e^{-iκx}`) go through a full
//! eigendecomposition rather than series expansions, so exponentially growing
//! profiles stay exact on the truncated space.

use ndarray::{Array1, Array2};
use ndarray_linalg::{Eigh, UPLO};
use num_complex::Complex64 as C64;
use std::ops::{Add, Mul, Sub};

use crate::{Error, Result, UnitSystem};

pub type CMat = Array2<C64>;

/// Dense complex operator on a truncated Fock space.
#[derive(Clone, Debug, PartialEq)]
pub struct Operator {
    data: CMat,
}

impl Operator {
    pub fn new(data: CMat) -> Result<Self> {
        let (r, c) = data.dim();
        if r != c {
            return Err(Error::DimensionMismatch(r, c));
        }
        if r < 2 {
            return Err(Error::DimensionTooSmall(r));
        }
        if data.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
            return Err(Error::NonFinite);
        }
        Ok(Self { data })
    }

    pub fn zeros(dim: usize) -> Result<Self> {
        Self::new(CMat::zeros((dim, dim)))
    }

    pub fn identity(dim: usize) -> Result<Self> {
        Self::new(CMat::eye(dim))
    }

    pub fn dim(&self) -> usize {
        self.data.nrows()
    }

    pub fn data(&self) -> &CMat {
        &self.data
    }

    pub fn into_data(self) -> CMat {
        self.data
    }

    /// Conjugate transpose.
    pub fn dagger(&self) -> Operator {
        Operator {
            data: self.data.t().mapv(|z| z.conj()),
        }
    }

    pub fn dot(&self, other: &Operator) -> Operator {
        Operator {
            data: self.data.dot(&other.data),
        }
    }

    pub fn scale(&self, s: C64) -> Operator {
        Operator {
            data: self.data.mapv(|z| z * s),
        }
    }

    pub fn trace(&self) -> C64 {
        self.data.diag().sum()
    }

    pub fn max_abs(&self) -> f64 {
        self.data.iter().map(|z| z.norm()).fold(0.0, f64::max)
    }

    /// `‖A - A†‖_max`.
    pub fn herm_deviation(&self) -> f64 {
        let n = self.dim();
        let mut dev: f64 = 0.0;
        for i in 0..n {
            for j in 0..n {
                dev = dev.max((self.data[[i, j]] - self.data[[j, i]].conj()).norm());
            }
        }
        dev
    }

    pub fn is_hermitian(&self, tol: f64) -> bool {
        self.herm_deviation() < tol
    }

    /// `Tr[A ρ]` for an arbitrary operator weight.
    pub fn expectation(&self, rho: &Operator) -> C64 {
        // Tr[A rho] = sum_{ij} A[i,j] rho[j,i]
        let n = self.dim();
        let mut acc = C64::new(0.0, 0.0);
        for i in 0..n {
            for j in 0..n {
                acc += self.data[[i, j]] * rho.data[[j, i]];
            }
        }
        acc
    }

    /// Eigendecomposition of a Hermitian operator; returns ascending
    /// eigenvalues and the unitary of eigenvectors (columns).
    pub fn eigh(&self) -> Result<(Array1<f64>, CMat)> {
        let dev = self.herm_deviation();
        if dev >= 1e-10 {
            return Err(Error::NotHermitian(dev));
        }
        let sym = (&self.data + &self.data.t().mapv(|z| z.conj())).mapv(|z| z * 0.5);
        let (vals, vecs) = sym.eigh(UPLO::Lower)?;
        // Some LAPACK bindings diagonalize the conjugate of a row-major
        // complex matrix and hand back conjugated eigenvectors (harmless for
        // real-symmetric input, wrong otherwise). Check the residual
        // A·V - V·Λ and repair if conjugation fixes it.
        let residual = |v: &CMat| -> f64 {
            let av = sym.dot(v);
            let mut worst = 0.0f64;
            for ((i, j), z) in av.indexed_iter() {
                worst = worst.max((z - v[[i, j]] * vals[j]).norm());
            }
            worst
        };
        let scale = self.max_abs().max(1.0);
        let direct = residual(&vecs);
        if direct <= 1e-8 * scale {
            return Ok((vals, vecs));
        }
        let conj = vecs.mapv(|z| z.conj());
        if residual(&conj) < direct {
            Ok((vals, conj))
        } else {
            Ok((vals, vecs))
        }
    }
}

impl Add for &Operator {
    type Output = Operator;
    fn add(self, rhs: &Operator) -> Operator {
        Operator {
            data: &self.data + &rhs.data,
        }
    }
}

impl Sub for &Operator {
    type Output = Operator;
    fn sub(self, rhs: &Operator) -> Operator {
        Operator {
            data: &self.data - &rhs.data,
        }
    }
}

impl Mul for &Operator {
    type Output = Operator;
    fn mul(self, rhs: &Operator) -> Operator {
        self.dot(rhs)
    }
}

impl Mul<f64> for &Operator {
    type Output = Operator;
    fn mul(self, s: f64) -> Operator {
        self.scale(C64::new(s, 0.0))
    }
}

/// Hermitian, unit-trace, positive-semidefinite specialization of [`Operator`].
///
/// Construction symmetrizes the input, clips eigenvalues in `[-1e-8, 0)` to
/// zero and renormalizes. Anything more negative is a hard error: that is a
/// genuine positivity violation, not roundoff.
#[derive(Clone, Debug)]
pub struct DensityMatrix {
    op: Operator,
}

pub const POSITIVITY_CLIP: f64 = 1e-8;

impl DensityMatrix {
    pub fn new(op: Operator) -> Result<Self> {
        let dev = op.herm_deviation();
        if dev >= 1e-8 {
            return Err(Error::InvalidDensityMatrix(format!(
                "not Hermitian (max deviation {dev:.3e})"
            )));
        }
        let (vals, vecs) = op.eigh().map_err(|_| {
            Error::InvalidDensityMatrix(format!("not Hermitian (max deviation {dev:.3e})"))
        })?;
        let min = vals.iter().cloned().fold(f64::INFINITY, f64::min);
        if min < -POSITIVITY_CLIP {
            return Err(Error::InvalidDensityMatrix(format!(
                "negative eigenvalue {min:.3e} below clip tolerance"
            )));
        }
        let clipped = vals.mapv(|v| v.max(0.0));
        let total: f64 = clipped.sum();
        if !(total.is_finite() && total > 0.0) {
            return Err(Error::InvalidDensityMatrix(format!(
                "trace {total:.3e} is not positive"
            )));
        }
        let dim = op.dim();
        let mut data = CMat::zeros((dim, dim));
        for (k, w) in clipped.iter().enumerate() {
            if *w == 0.0 {
                continue;
            }
            let w = *w / total;
            let col = vecs.column(k);
            for i in 0..dim {
                for j in 0..dim {
                    data[[i, j]] += col[i] * col[j].conj() * w;
                }
            }
        }
        Ok(Self {
            op: Operator { data },
        })
    }

    /// Projector onto a (not necessarily normalized) state vector.
    pub fn from_pure(psi: &Array1<C64>) -> Result<Self> {
        let norm2: f64 = psi.iter().map(|z| z.norm_sqr()).sum();
        if !(norm2.is_finite() && norm2 > 0.0) {
            return Err(Error::InvalidDensityMatrix("zero state vector".into()));
        }
        let dim = psi.len();
        let mut data = CMat::zeros((dim, dim));
        for i in 0..dim {
            for j in 0..dim {
                data[[i, j]] = psi[i] * psi[j].conj() / norm2;
            }
        }
        Ok(Self {
            op: Operator::new(data)?,
        })
    }

    /// Fock-number basis state |n><n|.
    pub fn fock_state(dim: usize, n: usize) -> Result<Self> {
        let mut psi = Array1::zeros(dim);
        psi[n] = C64::new(1.0, 0.0);
        Self::from_pure(&psi)
    }

    pub fn op(&self) -> &Operator {
        &self.op
    }

    pub fn dim(&self) -> usize {
        self.op.dim()
    }

    pub fn data(&self) -> &CMat {
        self.op.data()
    }

    pub fn purity(&self) -> f64 {
        self.op.dot(&self.op).trace().re
    }

    /// Real expectation value of a Hermitian observable.
    pub fn expect(&self, obs: &Operator) -> f64 {
        obs.expectation(&self.op).re
    }
}

/// Ladder, position and momentum operators on a `dim`-dimensional Fock space.
#[derive(Clone, Debug)]
pub struct CanonicalOps {
    pub a: Operator,
    pub a_dag: Operator,
    pub x: Operator,
    pub p: Operator,
}

/// Builds `a`, `a†`, `x = √(ħ/2mω)(a+a†)` and `p = i√(mħω/2)(a†−a)`.
pub fn build_canonical_operators(units: &UnitSystem, dim: usize) -> Result<CanonicalOps> {
    if dim < 2 {
        return Err(Error::DimensionTooSmall(dim));
    }
    let mut a = CMat::zeros((dim, dim));
    for n in 1..dim {
        a[[n - 1, n]] = C64::new((n as f64).sqrt(), 0.0);
    }
    let a = Operator::new(a)?;
    let a_dag = a.dagger();
    let xs = (units.hbar() / (2.0 * units.mass() * units.omega())).sqrt();
    let ps = (units.mass() * units.hbar() * units.omega() / 2.0).sqrt();
    let x = (&a + &a_dag).scale(C64::new(xs, 0.0));
    let p = (&a_dag - &a).scale(C64::new(0.0, ps));
    Ok(CanonicalOps { a, a_dag, x, p })
}

/// Harmonic Hamiltonian `p²/2m + mω²(x − Δx0)²/2`.
pub fn build_hamiltonian(ops: &CanonicalOps, units: &UnitSystem, displacement: f64) -> Result<Operator> {
    if !displacement.is_finite() {
        return Err(Error::NonFiniteInput("displacement"));
    }
    let dim = ops.x.dim();
    let shift = &ops.x - &Operator::identity(dim)?.scale(C64::new(displacement, 0.0));
    let kinetic = ops.p.dot(&ops.p).scale(C64::new(1.0 / (2.0 * units.mass()), 0.0));
    let potential = shift
        .dot(&shift)
        .scale(C64::new(units.mass() * units.omega().powi(2) / 2.0, 0.0));
    Ok(&kinetic + &potential)
}

/// Spectral calculus: `f(A) = V f(Λ) V†` for Hermitian `A`.
pub fn func_of_hermitian<F>(a: &Operator, f: F) -> Result<Operator>
where
    F: Fn(f64) -> C64,
{
    let (vals, vecs) = a.eigh()?;
    let dim = a.dim();
    let fvals: Array1<C64> = vals.mapv(f);
    if fvals.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
        return Err(Error::NonFinite);
    }
    // V diag(f) V†
    let mut scaled = vecs.clone();
    for (mut col, fv) in scaled.columns_mut().into_iter().zip(fvals.iter()) {
        col.mapv_inplace(|z| z * fv);
    }
    let result = scaled.dot(&vecs.t().mapv(|z| z.conj()));
    debug_assert_eq!(result.nrows(), dim);
    Operator::new(result)
}

/// The unitary `e^{-iκx}` via spectral calculus on the truncated `x`.
pub fn displacement_phase(x: &Operator, kappa: f64) -> Result<Operator> {
    if !kappa.is_finite() {
        return Err(Error::NonFiniteInput("kappa"));
    }
    func_of_hermitian(x, |u| C64::from_polar(1.0, -kappa * u))
}
