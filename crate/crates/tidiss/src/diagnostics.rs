//! Physical consistency diagnostics: semiclassical friction/diffusion,
//! Fokker–Planck stationary distributions and exact-identity checks against
//! the dense generator.

use num_complex::Complex64 as C64;

use crate::dissipator::{DissipatorSpec, JumpSpec};
use crate::fock::{build_canonical_operators, build_hamiltonian, func_of_hermitian};
use crate::liouvillian::Lindblad;
use crate::profile::optimal_profile;
use crate::thermo::{thermal_state, trapezoid};
use crate::{Error, Result, UnitSystem};

/// Semiclassical friction `F(p) = -Γ·Σ_k ħκ_k|f_k(p)|²`.
pub fn friction_curve(spec: &DissipatorSpec, p_grid: &[f64], units: &UnitSystem) -> Vec<f64> {
    p_grid
        .iter()
        .map(|&p| {
            -spec.rate
                * units.hbar()
                * spec
                    .jumps
                    .iter()
                    .map(|j| {
                        let f = j.profile.eval(p, units);
                        j.kappa * f * f
                    })
                    .sum::<f64>()
        })
        .collect()
}

/// Momentum diffusion `D(p) = Γ·(ħ²/2)·Σ_k |f_k(p)|²κ_k²`.
pub fn diffusion_curve(spec: &DissipatorSpec, p_grid: &[f64], units: &UnitSystem) -> Vec<f64> {
    let h2 = units.hbar() * units.hbar() / 2.0;
    p_grid
        .iter()
        .map(|&p| {
            spec.rate
                * h2
                * spec
                    .jumps
                    .iter()
                    .map(|j| {
                        let f = j.profile.eval(p, units);
                        j.kappa * j.kappa * f * f
                    })
                    .sum::<f64>()
        })
        .collect()
}

/// Stationary momentum distribution of the Fokker–Planck limit,
/// `ϖ(p) ∝ (1/D(p))·exp(∫ F/D dq)`, normalized on the grid.
///
/// Fails if the diffusion coefficient is not strictly positive anywhere on
/// the grid (the FP steady state is then undefined there).
pub fn fp_stationary_momentum(
    spec: &DissipatorSpec,
    p_grid: &[f64],
    units: &UnitSystem,
) -> Result<Vec<f64>> {
    if p_grid.len() < 3 {
        return Err(Error::Config("FP grid needs at least 3 points".into()));
    }
    let f = friction_curve(spec, p_grid, units);
    let d = diffusion_curve(spec, p_grid, units);
    for (&p, &dv) in p_grid.iter().zip(d.iter()) {
        if dv <= 0.0 {
            return Err(Error::NonPositiveDiffusion(p));
        }
    }
    // cumulative ∫ F/D by trapezoid; the lower limit only shifts the
    // normalization constant
    let mut log_w = Vec::with_capacity(p_grid.len());
    let mut acc = 0.0;
    log_w.push(acc);
    for k in 1..p_grid.len() {
        let ratio0 = f[k - 1] / d[k - 1];
        let ratio1 = f[k] / d[k];
        acc += 0.5 * (ratio0 + ratio1) * (p_grid[k] - p_grid[k - 1]);
        log_w.push(acc);
    }
    let max_log = log_w.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    let mut w: Vec<f64> = log_w
        .iter()
        .zip(d.iter())
        .map(|(l, dv)| (l - max_log).exp() / dv)
        .collect();
    let norm = trapezoid(&w, p_grid);
    if !(norm.is_finite() && norm > 0.0) {
        return Err(Error::NonFinite);
    }
    for v in &mut w {
        *v /= norm;
    }
    Ok(w)
}

/// Max over the lower half of the spectrum of `|⟨n|L[ρ_θ]|n⟩|`: the
/// thermal-population conservation defect of a dissipator at temperature θ.
/// (Zero for all `n` is equivalent to `d⟨e^{-αH}⟩/dt = 0` for all α.)
pub fn population_constraint_residual(
    spec: &DissipatorSpec,
    theta: f64,
    dim: usize,
    units: &UnitSystem,
) -> Result<f64> {
    let ops = build_canonical_operators(units, dim)?;
    let h = build_hamiltonian(&ops, units, 0.0)?;
    let rho = thermal_state(&h, theta, units)?;
    let lind = Lindblad::for_dissipator(spec, &ops, units, 0.0)?;
    let out = lind.apply(rho.op());
    let mut max = 0.0f64;
    for n in 0..=dim / 2 {
        max = max.max(out.data()[[n, n]].norm());
    }
    Ok(max)
}

/// Result of comparing the numerical energy flow against the closed-form
/// rate coefficient.
#[derive(Clone, Copy, Debug)]
pub struct RateReport {
    /// `Tr[H·L_rel[ρ_{θ'}]]` from the dense generator.
    pub raw_rate: f64,
    /// `⟨H⟩_θ − ⟨H⟩_{θ'}` on the truncated space.
    pub energy_gap: f64,
    /// Closed form `γ̃ = 2ωβħ²κλ·exp(βħ²λ²·coth(ħω/2θ'))`.
    pub gamma_en_closed: f64,
    /// `ω·raw/(c²·gap)`; `None` when the gap vanishes (θ' = θ).
    pub gamma_en_numeric: Option<f64>,
    pub relative_error: Option<f64>,
}

/// Closed-form energy-rate coefficient
/// `γ̃^en(θ',θ) = 2ωβħ²κλ·exp(βħ²λ²·coth(ħω/2θ'))` with `λ = κ·tanh(ħω/4θ)`
/// (both hyperbolic factors saturate to 1 at zero temperature).
pub fn gamma_en_closed(theta_prime: f64, theta: f64, kappa: f64, units: &UnitSystem) -> f64 {
    let (b, hb, w) = (units.beta(), units.hbar(), units.omega());
    let lambda = if theta == 0.0 {
        kappa
    } else {
        kappa * (hb * w / (4.0 * theta)).tanh()
    };
    let coth = if theta_prime == 0.0 {
        1.0
    } else {
        1.0 / (hb * w / (2.0 * theta_prime)).tanh()
    };
    2.0 * w * b * hb * hb * kappa * lambda * (b * hb * hb * lambda * lambda * coth).exp()
}

/// Single-jump energy-flow check: the state at temperature `θ'` evolves
/// under the dissipator optimized for temperature `θ` (amplitude `c`).
pub fn energy_rate_check(
    theta_prime: f64,
    theta: f64,
    kappa: f64,
    c: f64,
    dim: usize,
    units: &UnitSystem,
) -> Result<RateReport> {
    let ops = build_canonical_operators(units, dim)?;
    let h = build_hamiltonian(&ops, units, 0.0)?;
    let profile = optimal_profile(theta, kappa, units, c)?;
    let spec = DissipatorSpec::new(vec![JumpSpec::new(kappa, profile)?], 1.0)?;
    let lind = Lindblad::for_dissipator(&spec, &ops, units, 0.0)?;

    let rho_prime = thermal_state(&h, theta_prime, units)?;
    let rho_target = thermal_state(&h, theta, units)?;
    let raw_rate = h.expectation(&lind.apply(rho_prime.op())).re;
    let energy_gap = rho_target.expect(&h) - rho_prime.expect(&h);

    let closed = gamma_en_closed(theta_prime, theta, kappa, units);
    let (gamma_en_numeric, relative_error) = if energy_gap.abs() < 1e-9 {
        (None, None)
    } else {
        let num = units.omega() * raw_rate / (c * c * energy_gap);
        let rel = (num - closed).abs() / closed.abs();
        (Some(num), Some(rel))
    };
    Ok(RateReport {
        raw_rate,
        energy_gap,
        gamma_en_closed: closed,
        gamma_en_numeric,
        relative_error,
    })
}

/// `d⟨x²⟩/dt = Tr[x²·L[ρ_θ]]` from the dense generator. The unitary part
/// drops out because `[H, ρ_θ] = 0`.
pub fn position_diffusion_rate(
    spec: &DissipatorSpec,
    theta: f64,
    dim: usize,
    units: &UnitSystem,
) -> Result<f64> {
    let ops = build_canonical_operators(units, dim)?;
    let h = build_hamiltonian(&ops, units, 0.0)?;
    let rho = thermal_state(&h, theta, units)?;
    let lind = Lindblad::for_dissipator(spec, &ops, units, 0.0)?;
    let x2 = ops.x.dot(&ops.x);
    Ok(x2.expectation(&lind.apply(rho.op())).re)
}

/// Closed-form counterpart `ħ²·Γ·Σ_k ⟨f_k'(p)²⟩_θ`, valid for smooth
/// profiles (the derivative of a clipped profile ignores its jump).
pub fn position_diffusion_analytic(
    spec: &DissipatorSpec,
    theta: f64,
    dim: usize,
    units: &UnitSystem,
) -> Result<f64> {
    let ops = build_canonical_operators(units, dim)?;
    let h = build_hamiltonian(&ops, units, 0.0)?;
    let rho = thermal_state(&h, theta, units)?;
    let mut total = 0.0;
    for j in &spec.jumps {
        let d2 = func_of_hermitian(&ops.p, |p| {
            let d = j.profile.derivative(p, units);
            C64::new(d * d, 0.0)
        })?;
        total += rho.expect(&d2);
    }
    Ok(units.hbar() * units.hbar() * spec.rate * total)
}
