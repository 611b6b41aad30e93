//! Momentum-profile families for translation-invariant jump operators.

use crate::{Error, Result, UnitSystem};

/// Real-valued momentum profile `f(p)` of a jump operator `e^{-iκx} f(p)`.
///
/// `OptimalExp` is `f(p) = c·e^{βħλp}`; it conserves thermal populations when
/// `λ = κ·tanh(ħω/4θ)`. `Clipped` zeroes the base profile on the half-line
/// `p·sign < 0` (the boundary `p = 0` belongs to the pass region).
#[derive(Clone, Debug, PartialEq)]
pub enum MomentumProfile {
    Constant {
        c: f64,
    },
    OptimalExp {
        c: f64,
        lambda: f64,
    },
    DopplerLorentz {
        c1: f64,
        c2: f64,
        c3: f64,
    },
    Clipped {
        base: Box<MomentumProfile>,
        sign: f64,
    },
    Tabulated {
        p: Vec<f64>,
        values: Vec<f64>,
    },
}

impl MomentumProfile {
    pub fn validate(&self) -> Result<()> {
        match self {
            MomentumProfile::Constant { c } => {
                if !c.is_finite() {
                    return Err(Error::InvalidProfile("non-finite amplitude".into()));
                }
            }
            MomentumProfile::OptimalExp { c, lambda } => {
                if !(c.is_finite() && *c >= 0.0) {
                    return Err(Error::InvalidProfile(format!("amplitude c = {c} must be >= 0")));
                }
                if !lambda.is_finite() {
                    return Err(Error::InvalidProfile("non-finite lambda".into()));
                }
            }
            MomentumProfile::DopplerLorentz { c1, c2, c3 } => {
                if ![c1, c2, c3].iter().all(|v| v.is_finite()) {
                    return Err(Error::InvalidProfile("non-finite Lorentzian parameter".into()));
                }
                if *c2 == 0.0 {
                    return Err(Error::InvalidProfile(
                        "c2 = 0 puts the Lorentzian pole on the real axis".into(),
                    ));
                }
            }
            MomentumProfile::Clipped { base, sign } => {
                if *sign != 1.0 && *sign != -1.0 {
                    return Err(Error::InvalidProfile(format!("clip sign must be ±1, got {sign}")));
                }
                base.validate()?;
            }
            MomentumProfile::Tabulated { p, values } => {
                if p.len() != values.len() || p.len() < 2 {
                    return Err(Error::InvalidProfile(
                        "tabulated profile needs matching grids of length >= 2".into(),
                    ));
                }
                if !p.windows(2).all(|w| w[1] > w[0]) {
                    return Err(Error::InvalidProfile("tabulated grid must be increasing".into()));
                }
                if p.iter().chain(values.iter()).any(|v| !v.is_finite()) {
                    return Err(Error::InvalidProfile("non-finite tabulated entry".into()));
                }
            }
        }
        Ok(())
    }

    /// Evaluates `f(p)`.
    pub fn eval(&self, p: f64, units: &UnitSystem) -> f64 {
        match self {
            MomentumProfile::Constant { c } => *c,
            MomentumProfile::OptimalExp { c, lambda } => {
                c * (units.beta() * units.hbar() * lambda * p).exp()
            }
            MomentumProfile::DopplerLorentz { c1, c2, c3 } => {
                c1 / (c2 * c2 + (p - c3) * (p - c3)).sqrt()
            }
            MomentumProfile::Clipped { base, sign } => {
                if p * sign < 0.0 {
                    0.0
                } else {
                    base.eval(p, units)
                }
            }
            MomentumProfile::Tabulated { p: grid, values } => interp_linear(grid, values, p),
        }
    }

    /// Analytic derivative `f'(p)`; tabulated profiles fall back to central
    /// differences on their own grid.
    pub fn derivative(&self, p: f64, units: &UnitSystem) -> f64 {
        match self {
            MomentumProfile::Constant { .. } => 0.0,
            MomentumProfile::OptimalExp { c, lambda } => {
                let mu = units.beta() * units.hbar() * lambda;
                c * mu * (mu * p).exp()
            }
            MomentumProfile::DopplerLorentz { c1, c2, c3 } => {
                let g = c2 * c2 + (p - c3) * (p - c3);
                -c1 * (p - c3) * g.powf(-1.5)
            }
            MomentumProfile::Clipped { base, sign } => {
                // derivative of the passed branch; the jump at p = 0 is
                // deliberately ignored here (the Liouvillian route sees it)
                if p * sign < 0.0 {
                    0.0
                } else {
                    base.derivative(p, units)
                }
            }
            MomentumProfile::Tabulated { p: grid, values } => {
                let h = (grid[grid.len() - 1] - grid[0]) / (grid.len() as f64 - 1.0) / 2.0;
                (interp_linear(grid, values, p + h) - interp_linear(grid, values, p - h)) / (2.0 * h)
            }
        }
    }

    /// The profile of the parity image, `f(-p)` expressed in the same family.
    pub fn reflected(&self) -> MomentumProfile {
        match self {
            MomentumProfile::Constant { c } => MomentumProfile::Constant { c: *c },
            MomentumProfile::OptimalExp { c, lambda } => MomentumProfile::OptimalExp {
                c: *c,
                lambda: -lambda,
            },
            MomentumProfile::DopplerLorentz { c1, c2, c3 } => MomentumProfile::DopplerLorentz {
                c1: *c1,
                c2: *c2,
                c3: -c3,
            },
            MomentumProfile::Clipped { base, sign } => MomentumProfile::Clipped {
                base: Box::new(base.reflected()),
                sign: -sign,
            },
            MomentumProfile::Tabulated { p, values } => {
                let mut rp: Vec<f64> = p.iter().rev().map(|v| -v).collect();
                let rv: Vec<f64> = values.iter().rev().cloned().collect();
                // keep strict monotonicity for degenerate single-point edge cases
                rp.dedup();
                MomentumProfile::Tabulated { p: rp, values: rv }
            }
        }
    }
}

fn interp_linear(grid: &[f64], values: &[f64], p: f64) -> f64 {
    let n = grid.len();
    if p <= grid[0] {
        return values[0];
    }
    if p >= grid[n - 1] {
        return values[n - 1];
    }
    let idx = grid.partition_point(|g| *g <= p).min(n - 1);
    let (g0, g1) = (grid[idx - 1], grid[idx]);
    let t = (p - g0) / (g1 - g0);
    values[idx - 1] * (1.0 - t) + values[idx] * t
}

/// Thermal-population-conserving exponential profile: `λ = κ·tanh(ħω/4θ)`,
/// saturating to `λ = κ` at `θ = 0`.
pub fn optimal_profile(theta: f64, kappa: f64, units: &UnitSystem, c: f64) -> Result<MomentumProfile> {
    if !(theta.is_finite() && theta >= 0.0) {
        return Err(Error::InvalidProfile(format!("temperature {theta} must be >= 0")));
    }
    if !kappa.is_finite() {
        return Err(Error::NonFiniteInput("kappa"));
    }
    let lambda = if theta == 0.0 {
        kappa
    } else {
        kappa * (units.hbar() * units.omega() / (4.0 * theta)).tanh()
    };
    let profile = MomentumProfile::OptimalExp { c, lambda };
    profile.validate()?;
    Ok(profile)
}

/// Lorentzian profile matching value, slope and curvature of an exponential
/// profile at `p = 0`.
///
/// With exponent coefficient `μ = βħλ`, the unique solution is
/// `c3 = c2 = 1/(2μ)` and `c1 = c/(√2·μ)`; the closed form is re-verified
/// against the defining conditions by finite differences before returning.
pub fn doppler_fit(opt: &MomentumProfile, units: &UnitSystem) -> Result<MomentumProfile> {
    let (c, lambda) = match opt {
        MomentumProfile::OptimalExp { c, lambda } => (*c, *lambda),
        _ => {
            return Err(Error::InvalidProfile(
                "doppler_fit expects an OptimalExp profile".into(),
            ))
        }
    };
    if lambda == 0.0 {
        // the exponential degenerates to a constant; no finite Lorentzian
        // matches a flat profile except the constant itself
        return Ok(MomentumProfile::Constant { c });
    }
    let mu = units.beta() * units.hbar() * lambda;
    let fit = MomentumProfile::DopplerLorentz {
        c1: c / (std::f64::consts::SQRT_2 * mu),
        c2: 1.0 / (2.0 * mu),
        c3: 1.0 / (2.0 * mu),
    };
    // post-hoc verification of the matching conditions
    let h = 1e-4 / mu.abs().max(1.0);
    let d = |f: &MomentumProfile, p: f64| f.eval(p, units);
    let scale = c.abs().max(1e-300);
    let r0 = (d(&fit, 0.0) - d(opt, 0.0)).abs() / scale;
    let r1 = ((d(&fit, h) - d(&fit, -h)) - (d(opt, h) - d(opt, -h))).abs() / (2.0 * h) / scale;
    let r2 = ((d(&fit, h) - 2.0 * d(&fit, 0.0) + d(&fit, -h))
        - (d(opt, h) - 2.0 * d(opt, 0.0) + d(opt, -h)))
        .abs()
        / (h * h)
        / scale;
    if r0.max(r1).max(r2) >= 1e-6 {
        return Err(Error::InvalidProfile(format!(
            "doppler fit failed verification: residuals {r0:.2e}, {r1:.2e}, {r2:.2e}"
        )));
    }
    Ok(fit)
}

/// Classical clipping rule: zero where `p·κ < 0`, untouched otherwise.
pub fn clip_profile(base: MomentumProfile, kappa: f64) -> MomentumProfile {
    if let MomentumProfile::Clipped { sign, .. } = &base {
        // idempotent for a matching sign
        if (kappa >= 0.0 && *sign == 1.0) || (kappa < 0.0 && *sign == -1.0) {
            return base;
        }
    }
    MomentumProfile::Clipped {
        base: Box::new(base),
        sign: if kappa >= 0.0 { 1.0 } else { -1.0 },
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn units() -> UnitSystem {
        UnitSystem::default()
    }

    #[test]
    fn optimal_lambda_limits() {
        let u = units();
        let hot = optimal_profile(1e12, 0.5 * u.kappa0(), &u, 1.0).unwrap();
        match hot {
            MomentumProfile::OptimalExp { lambda, .. } => assert!(lambda.abs() < 1e-10),
            _ => unreachable!(),
        }
        let cold = optimal_profile(0.0, 0.5 * u.kappa0(), &u, 1.0).unwrap();
        match cold {
            MomentumProfile::OptimalExp { lambda, .. } => {
                assert_eq!(lambda, 0.5 * u.kappa0());
            }
            _ => unreachable!(),
        }
    }

    #[test]
    fn optimal_lambda_at_quarter_hbar_omega() {
        let u = units();
        let p = optimal_profile(0.25, u.kappa0(), &u, 1.0).unwrap();
        match p {
            MomentumProfile::OptimalExp { lambda, .. } => {
                assert!((lambda - 1.0f64.tanh() * u.kappa0()).abs() < 1e-12);
            }
            _ => unreachable!(),
        }
    }

    #[test]
    fn doppler_fit_closed_form() {
        let u = units();
        let opt = MomentumProfile::OptimalExp { c: 1.0, lambda: 0.5 };
        match doppler_fit(&opt, &u).unwrap() {
            MomentumProfile::DopplerLorentz { c1, c2, c3 } => {
                assert!((c3 - 1.0).abs() < 1e-12);
                assert!((c2 - 1.0).abs() < 1e-12);
                assert!((c1 - std::f64::consts::SQRT_2).abs() < 1e-12);
            }
            other => panic!("unexpected fit {other:?}"),
        }
    }

    #[test]
    fn doppler_fit_amplitude_linearity() {
        let u = units();
        let f1 = doppler_fit(&MomentumProfile::OptimalExp { c: 1.0, lambda: 1.0 }, &u).unwrap();
        let f2 = doppler_fit(&MomentumProfile::OptimalExp { c: 2.0, lambda: 1.0 }, &u).unwrap();
        match (f1, f2) {
            (
                MomentumProfile::DopplerLorentz { c1: a1, c2: b1, c3: d1 },
                MomentumProfile::DopplerLorentz { c1: a2, c2: b2, c3: d2 },
            ) => {
                assert!((a2 - 2.0 * a1).abs() < 1e-12);
                assert_eq!(b1, b2);
                assert_eq!(d1, d2);
            }
            _ => unreachable!(),
        }
    }

    #[test]
    fn doppler_fit_matches_value_at_zero() {
        let u = units();
        for lambda in [0.2, 0.5, 1.3] {
            let opt = MomentumProfile::OptimalExp { c: 0.7, lambda };
            let fit = doppler_fit(&opt, &u).unwrap();
            assert!((fit.eval(0.0, &u) - opt.eval(0.0, &u)).abs() < 1e-12);
        }
    }

    #[test]
    fn doppler_fit_degenerate_lambda_returns_constant() {
        let u = units();
        let fit = doppler_fit(&MomentumProfile::OptimalExp { c: 2.0, lambda: 0.0 }, &u).unwrap();
        assert_eq!(fit, MomentumProfile::Constant { c: 2.0 });
    }

    #[test]
    fn clip_pointwise() {
        let u = units();
        let c = clip_profile(MomentumProfile::Constant { c: 3.0 }, 1.0);
        assert_eq!(c.eval(-1.0, &u), 0.0);
        assert_eq!(c.eval(1.0, &u), 3.0);
        assert_eq!(c.eval(0.0, &u), 3.0); // boundary assigned to the pass region
    }

    #[test]
    fn clip_exponential_grid() {
        let u = units();
        let f = clip_profile(MomentumProfile::OptimalExp { c: 1.0, lambda: 0.5 }, 0.5);
        let expected = [0.0, 0.0, 1.0, (0.5f64).exp()];
        for (p, e) in [-2.0, -1.0, 0.0, 1.0].iter().zip(expected) {
            assert!((f.eval(*p, &u) - e).abs() < 1e-12);
        }
    }

    #[test]
    fn clip_is_idempotent() {
        let base = MomentumProfile::OptimalExp { c: 1.0, lambda: 0.3 };
        let once = clip_profile(base.clone(), 0.7);
        let twice = clip_profile(once.clone(), 0.7);
        assert_eq!(once, twice);
    }

    #[test]
    fn reflection_matches_pointwise() {
        let u = units();
        let profiles = [
            MomentumProfile::OptimalExp { c: 1.3, lambda: 0.4 },
            MomentumProfile::DopplerLorentz { c1: 1.0, c2: 0.5, c3: 0.8 },
            clip_profile(MomentumProfile::OptimalExp { c: 1.0, lambda: 0.4 }, 1.0),
        ];
        for f in profiles {
            let r = f.reflected();
            for p in [-2.0, -0.5, 0.3, 1.7] {
                assert!(
                    (r.eval(p, &u) - f.eval(-p, &u)).abs() < 1e-12,
                    "{f:?} at {p}"
                );
            }
        }
    }

    #[test]
    fn doppler_derivative_matching_by_finite_differences() {
        let u = units();
        let opt = MomentumProfile::OptimalExp { c: 1.0, lambda: 0.5 };
        let fit = doppler_fit(&opt, &u).unwrap();
        let h = 1e-5;
        for order in 0..=2 {
            let d = |f: &MomentumProfile| match order {
                0 => f.eval(0.0, &u),
                1 => (f.eval(h, &u) - f.eval(-h, &u)) / (2.0 * h),
                _ => (f.eval(h, &u) - 2.0 * f.eval(0.0, &u) + f.eval(-h, &u)) / (h * h),
            };
            assert!((d(&fit) - d(&opt)).abs() < 1e-8, "order {order}");
        }
    }

    #[test]
    fn rejects_lorentzian_pole_on_axis() {
        assert!(MomentumProfile::DopplerLorentz { c1: 1.0, c2: 0.0, c3: 0.0 }
            .validate()
            .is_err());
    }
}
