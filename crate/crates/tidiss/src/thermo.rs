//! Thermal states, Bures distance and phase-space representations.

use ndarray::{Array1, Array2};
use num_complex::Complex64 as C64;

use crate::fock::{CMat, DensityMatrix, Operator};
use crate::{Error, Result, UnitSystem};

/// Gibbs state `e^{-H/θ}/Z` of a Hermitian Hamiltonian. At `θ = 0` this is
/// the ground-state projector; a degenerate ground level is a hard error.
pub fn thermal_state(h: &Operator, theta: f64, _units: &UnitSystem) -> Result<DensityMatrix> {
    if !(theta.is_finite() && theta >= 0.0) {
        return Err(Error::Config(format!("temperature {theta} must be >= 0")));
    }
    let (vals, vecs) = h.eigh()?;
    let dim = h.dim();
    let e0 = vals[0];
    if theta == 0.0 {
        let gap = vals[1] - e0;
        if gap < 1e-10 * e0.abs().max(1.0) {
            return Err(Error::DegenerateGroundState(gap));
        }
        return DensityMatrix::from_pure(&vecs.column(0).to_owned());
    }
    // subtract the ground energy before exponentiating to avoid underflow
    let weights: Array1<f64> = vals.mapv(|e| (-(e - e0) / theta).exp());
    let z: f64 = weights.sum();
    let mut data = CMat::zeros((dim, dim));
    for (k, w) in weights.iter().enumerate() {
        let w = w / z;
        if w == 0.0 {
            continue;
        }
        let col = vecs.column(k);
        for i in 0..dim {
            for j in 0..dim {
                data[[i, j]] += col[i] * col[j].conj() * w;
            }
        }
    }
    DensityMatrix::new(Operator::new(data)?)
}

/// Geometric Gibbs state `∝ Σ_n e^{-ħωn/θ}|n⟩⟨n|` in the number basis: the
/// detailed-balance fixed point of a truncated thermal ladder. Unlike
/// [`thermal_state`] of the truncated quadrature Hamiltonian, its
/// populations are exact at every level including the edge.
pub fn number_gibbs(dim: usize, theta: f64, units: &UnitSystem) -> Result<DensityMatrix> {
    if dim < 2 {
        return Err(Error::DimensionTooSmall(dim));
    }
    if !(theta.is_finite() && theta >= 0.0) {
        return Err(Error::Config(format!("temperature {theta} must be >= 0")));
    }
    let mut data = CMat::zeros((dim, dim));
    if theta == 0.0 {
        data[[0, 0]] = C64::new(1.0, 0.0);
    } else {
        let ratio = (-units.hbar() * units.omega() / theta).exp();
        let mut w = 1.0;
        for n in 0..dim {
            data[[n, n]] = C64::new(w, 0.0);
            w *= ratio;
        }
    }
    DensityMatrix::new(Operator::new(data)?)
}

/// Uhlmann fidelity `F = (Tr √(√ρ σ √ρ))²`; eigenvalues are clipped at zero
/// before the square roots.
pub fn fidelity(rho: &DensityMatrix, sigma: &DensityMatrix) -> Result<f64> {
    if rho.dim() != sigma.dim() {
        return Err(Error::DimensionMismatch(rho.dim(), sigma.dim()));
    }
    let (vals, vecs) = rho.op().eigh()?;
    let dim = rho.dim();
    let mut sqrt_rho = CMat::zeros((dim, dim));
    for (k, v) in vals.iter().enumerate() {
        let s = v.max(0.0).sqrt();
        if s == 0.0 {
            continue;
        }
        let col = vecs.column(k);
        for i in 0..dim {
            for j in 0..dim {
                sqrt_rho[[i, j]] += col[i] * col[j].conj() * s;
            }
        }
    }
    let m = sqrt_rho.dot(sigma.data()).dot(&sqrt_rho);
    let herm = (&m + &m.t().mapv(|z| z.conj())).mapv(|z| z * 0.5);
    let (mv, _) = Operator::new(herm)?.eigh()?;
    let root_sum: f64 = mv.iter().map(|v| v.max(0.0).sqrt()).sum();
    Ok((root_sum * root_sum).min(1.0))
}

/// Bures distance `D_B = √(2(1 - √F))`.
pub fn bures_distance(rho: &DensityMatrix, sigma: &DensityMatrix) -> Result<f64> {
    let f = fidelity(rho, sigma)?;
    Ok((2.0 * (1.0 - f.sqrt())).max(0.0).sqrt())
}

/// Normalized Hermite functions `φ_0..φ_{n_max-1}` at dimensionless `ξ`,
/// via the stabilized recurrence
/// `φ_n = ξ√(2/n)·φ_{n-1} − √((n−1)/n)·φ_{n-2}`.
fn hermite_functions(n_max: usize, xi: f64) -> Vec<f64> {
    let mut out = Vec::with_capacity(n_max);
    let phi0 = std::f64::consts::PI.powf(-0.25) * (-xi * xi / 2.0).exp();
    out.push(phi0);
    if n_max > 1 {
        out.push(xi * std::f64::consts::SQRT_2 * phi0);
    }
    for n in 2..n_max {
        let nf = n as f64;
        let next = xi * (2.0 / nf).sqrt() * out[n - 1] - ((nf - 1.0) / nf).sqrt() * out[n - 2];
        out.push(next);
    }
    out
}

/// Position-representation eigenfunctions `⟨x|n⟩ = φ_n(x/s)/√s`.
fn position_wavefunctions(n_max: usize, x: f64, units: &UnitSystem) -> Vec<f64> {
    let s = units.x_scale();
    hermite_functions(n_max, x / s)
        .into_iter()
        .map(|v| v / s.sqrt())
        .collect()
}

/// Momentum-representation eigenfunctions `⟨p|n⟩ = (−i)^n φ_n(p/s_p)/√s_p`.
fn momentum_wavefunctions(n_max: usize, p: f64, units: &UnitSystem) -> Vec<C64> {
    let s = units.p_scale();
    let phases = [
        C64::new(1.0, 0.0),
        C64::new(0.0, -1.0),
        C64::new(-1.0, 0.0),
        C64::new(0.0, 1.0),
    ];
    hermite_functions(n_max, p / s)
        .into_iter()
        .enumerate()
        .map(|(n, v)| phases[n % 4] * v / s.sqrt())
        .collect()
}

/// Wigner function `W[ix, ip]` on the tensor grid, by the trapezoid rule on
/// `W(x,p) = (1/πħ)∫⟨x+y|ρ|x−y⟩e^{−2ipy/ħ}dy` (exponentially accurate for
/// smooth integrands).
///
/// Fails with [`Error::GridCoverage`] if the grid misses more than `1e-3` of
/// the state's mass.
pub fn wigner(
    rho: &DensityMatrix,
    x_grid: &[f64],
    p_grid: &[f64],
    units: &UnitSystem,
) -> Result<Array2<f64>> {
    if x_grid.len() < 2 || p_grid.len() < 2 {
        return Err(Error::Config("Wigner grids need at least 2 points".into()));
    }
    let dim = rho.dim();
    let hbar = units.hbar();
    let xs = units.x_scale();
    // y range covers the truncated-space support; dy oversamples the fastest
    // oscillation e^{-2ip_max y/ħ} by 4x
    let support = xs * (2.0 * dim as f64 + 1.0).sqrt() + 2.0 * xs;
    let p_max = p_grid.iter().fold(0.0f64, |m, p| m.max(p.abs())).max(units.p_scale());
    let dy = (std::f64::consts::PI * hbar / (2.0 * p_max) / 4.0).min(xs / 4.0);
    let ny = (2.0 * support / dy).ceil() as usize + 1;
    let y_grid: Vec<f64> = (0..ny).map(|k| -support + k as f64 * dy).collect();

    let mut w = Array2::zeros((x_grid.len(), p_grid.len()));
    let r = rho.data();
    for (ix, &x) in x_grid.iter().enumerate() {
        // ψ-vector contractions at x±y, reused across the p loop
        let mut kernel: Vec<C64> = Vec::with_capacity(ny);
        for &y in &y_grid {
            let left = position_wavefunctions(dim, x + y, units);
            let right = position_wavefunctions(dim, x - y, units);
            let mut acc = C64::new(0.0, 0.0);
            for m in 0..dim {
                if left[m] == 0.0 {
                    continue;
                }
                for n in 0..dim {
                    acc += C64::new(left[m] * right[n], 0.0) * r[[m, n]];
                }
            }
            kernel.push(acc);
        }
        for (ip, &p) in p_grid.iter().enumerate() {
            let mut acc = C64::new(0.0, 0.0);
            for (k, &y) in y_grid.iter().enumerate() {
                let weight = if k == 0 || k == ny - 1 { 0.5 } else { 1.0 };
                acc += kernel[k] * C64::from_polar(weight, -2.0 * p * y / hbar);
            }
            w[[ix, ip]] = (acc * dy / (std::f64::consts::PI * hbar)).re;
        }
    }

    let mass = trapezoid_2d(&w, x_grid, p_grid);
    let defect = (mass - 1.0).abs();
    if defect > 1e-3 {
        return Err(Error::GridCoverage(defect));
    }
    Ok(w)
}

/// Momentum marginal `n(p) = ⟨p|ρ|p⟩`, evaluated exactly from momentum
/// wavefunctions rather than by integrating a Wigner grid.
pub fn momentum_marginal(rho: &DensityMatrix, p_grid: &[f64], units: &UnitSystem) -> Array1<f64> {
    let dim = rho.dim();
    let r = rho.data();
    let mut out = Array1::zeros(p_grid.len());
    for (ip, &p) in p_grid.iter().enumerate() {
        let psi = momentum_wavefunctions(dim, p, units);
        let mut acc = C64::new(0.0, 0.0);
        for m in 0..dim {
            for n in 0..dim {
                acc += psi[m] * r[[m, n]] * psi[n].conj();
            }
        }
        out[ip] = acc.re;
    }
    out
}

/// Blokhintsev function `B(p,λ) = ∫e^{iλx}W(x,p)dx = ⟨p−ħλ/2|ρ|p+ħλ/2⟩`,
/// evaluated in closed form through the momentum representation.
pub fn blokhintsev(
    rho: &DensityMatrix,
    p_grid: &[f64],
    lambda_grid: &[f64],
    units: &UnitSystem,
) -> Array2<C64> {
    let dim = rho.dim();
    let r = rho.data();
    let hbar = units.hbar();
    let mut b = Array2::zeros((p_grid.len(), lambda_grid.len()));
    for (ip, &p) in p_grid.iter().enumerate() {
        for (il, &lam) in lambda_grid.iter().enumerate() {
            let bra = momentum_wavefunctions(dim, p - hbar * lam / 2.0, units);
            let ket = momentum_wavefunctions(dim, p + hbar * lam / 2.0, units);
            let mut acc = C64::new(0.0, 0.0);
            for m in 0..dim {
                for n in 0..dim {
                    acc += bra[m] * r[[m, n]] * ket[n].conj();
                }
            }
            b[[ip, il]] = acc;
        }
    }
    b
}

/// Symmetric λ-grid sized to the state: spacing `2π/x_range` for an x-range
/// of a few position standard deviations, capped at `λ_max ≈ 4.5/σ_x` where
/// the Blokhintsev function has decayed below positivity-test noise.
pub fn default_lambda_grid(rho: &DensityMatrix, units: &UnitSystem, half_points: usize) -> Result<Vec<f64>> {
    let dim = rho.dim();
    let ops = crate::fock::build_canonical_operators(units, dim)?;
    let x2 = rho.expect(&ops.x.dot(&ops.x));
    let x1 = rho.expect(&ops.x);
    let var = (x2 - x1 * x1).max(1e-12);
    let lam_max = 4.5 / var.sqrt();
    let n = half_points.max(1);
    let mut grid = Vec::with_capacity(2 * n + 1);
    for k in 0..=2 * n {
        grid.push(lam_max * (k as f64 - n as f64) / n as f64);
    }
    Ok(grid)
}

/// Structural conditions a momentum-diagonal stationary state must satisfy,
/// evaluated on a Blokhintsev grid whose λ axis is symmetric about 0.
#[derive(Clone, Copy, Debug)]
pub struct Theorem2Report {
    /// `Re B ≥ −tol` everywhere and `|Im B| ≤ tol`.
    pub positive: bool,
    /// `B(p,λ) = B(p,−λ)` up to `tol`.
    pub even_in_lambda: bool,
    /// The global maximum of `Re B` sits on the λ = 0 column, exceeding the
    /// off-origin maximum (one grid cell around the origin excluded).
    pub strict_max_at_origin: bool,
    pub min_real: f64,
    pub max_imag: f64,
}

pub fn theorem2_conditions(b: &Array2<C64>, lambda_grid: &[f64], tol: f64) -> Result<Theorem2Report> {
    let nl = lambda_grid.len();
    if b.ncols() != nl {
        return Err(Error::DimensionMismatch(b.ncols(), nl));
    }
    let i0 = lambda_grid
        .iter()
        .position(|l| l.abs() < 1e-12)
        .ok_or_else(|| Error::Config("lambda grid must contain 0".into()))?;
    for k in 0..nl {
        let mirror = nl - 1 - k;
        if (lambda_grid[k] + lambda_grid[mirror]).abs() > 1e-9 {
            return Err(Error::Config("lambda grid must be symmetric about 0".into()));
        }
    }

    let mut min_real = f64::INFINITY;
    let mut max_imag = 0.0f64;
    let mut even_dev = 0.0f64;
    let mut max_origin = f64::NEG_INFINITY;
    let mut max_off = f64::NEG_INFINITY;
    for ip in 0..b.nrows() {
        for il in 0..nl {
            let v = b[[ip, il]];
            min_real = min_real.min(v.re);
            max_imag = max_imag.max(v.im.abs());
            let mirror = nl - 1 - il;
            even_dev = even_dev.max((v - b[[ip, mirror]].conj()).norm());
            if il == i0 {
                max_origin = max_origin.max(v.re);
            } else if il.abs_diff(i0) >= 2 {
                max_off = max_off.max(v.re);
            }
        }
    }
    Ok(Theorem2Report {
        positive: min_real > -tol && max_imag < tol,
        even_in_lambda: even_dev < tol,
        strict_max_at_origin: max_origin > max_off + tol,
        min_real,
        max_imag,
    })
}

/// Trapezoid quadrature on a tensor grid (non-uniform spacing allowed).
pub fn trapezoid_2d(f: &Array2<f64>, x_grid: &[f64], p_grid: &[f64]) -> f64 {
    let mut over_p = vec![0.0; x_grid.len()];
    for (ix, row) in over_p.iter_mut().enumerate() {
        *row = trapezoid(&(0..p_grid.len()).map(|ip| f[[ix, ip]]).collect::<Vec<_>>(), p_grid);
    }
    trapezoid(&over_p, x_grid)
}

pub fn trapezoid(values: &[f64], grid: &[f64]) -> f64 {
    values
        .windows(2)
        .zip(grid.windows(2))
        .map(|(v, g)| 0.5 * (v[0] + v[1]) * (g[1] - g[0]))
        .sum()
}
