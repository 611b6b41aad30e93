//! Declarative experiment runner: figure sweeps, single-point steady-state
//! runs, diagnostics and generic parameter sweeps, all emitting
//! [`ResultTable`]s with per-row convergence flags.

use rayon::prelude::*;

use crate::config::{ExperimentConfig, ExperimentKind, ModelKind, ProfileVariant};
use crate::diagnostics::{
    energy_rate_check, gamma_en_closed, population_constraint_residual,
    position_diffusion_analytic, position_diffusion_rate,
};
use crate::dissipator::{isotropic_pair, DissipatorSpec, JumpSpec, QomeSpec};
use crate::fock::{build_canonical_operators, build_hamiltonian, CMat, DensityMatrix, Operator};
use crate::liouvillian::Lindblad;
use crate::plot::Series;
use crate::profile::{clip_profile, doppler_fit, optimal_profile, MomentumProfile};
use crate::table::{ResultTable, Value};
use crate::thermo::{bures_distance, thermal_state};
use crate::{Error, Result, UnitSystem};

/// Cross-truncation agreement threshold of the dim/dim+10 protocol.
pub const CONVERGENCE_DB: f64 = 1e-4;

/// Either dissipator family, ready to instantiate at any truncation.
#[derive(Clone, Debug)]
pub enum ModelSpec {
    Ti(DissipatorSpec),
    Qome(QomeSpec),
}

impl ModelSpec {
    fn lindblad(&self, dim: usize, dx0: f64, units: &UnitSystem) -> Result<Lindblad> {
        let ops = build_canonical_operators(units, dim)?;
        match self {
            ModelSpec::Ti(spec) => Lindblad::for_dissipator(spec, &ops, units, dx0),
            ModelSpec::Qome(spec) => Lindblad::for_qome(spec, &ops, units, dx0),
        }
    }
}

/// Amplitude convention of the figure sweeps: `c = ω/√(γ̃^en(θ,θ))`.
pub fn figure_amplitude(theta: f64, kappa: f64, units: &UnitSystem) -> Result<f64> {
    let g = gamma_en_closed(theta, theta, kappa, units);
    if !(g.is_finite() && g > 0.0) {
        return Err(Error::ZeroDecayRate);
    }
    Ok(units.omega() / g.sqrt())
}

/// Isotropic-pair dissipator for a figure variant at temperature `θ` and
/// recoil `κ` (absolute units), with amplitude `c` and overall rate Γ.
/// Clipping is applied per jump against that jump's own recoil sign.
pub fn build_ti_dissipator(
    variant: ProfileVariant,
    theta: f64,
    kappa: f64,
    c: f64,
    rate: f64,
    units: &UnitSystem,
) -> Result<DissipatorSpec> {
    if kappa == 0.0 {
        return Err(Error::ZeroDecayRate);
    }
    let base = optimal_profile(theta, kappa, units, c)?;
    let profile = match variant {
        ProfileVariant::Optimal | ProfileVariant::Clipped => base,
        ProfileVariant::Doppler => doppler_fit(&base, units)?,
    };
    let [plus, minus] = isotropic_pair(kappa, profile)?;
    let jumps = if variant == ProfileVariant::Clipped {
        vec![
            JumpSpec::new(plus.kappa, clip_profile(plus.profile, plus.kappa))?,
            JumpSpec::new(minus.kappa, clip_profile(minus.profile, minus.kappa))?,
        ]
    } else {
        vec![plus, minus]
    };
    DissipatorSpec::new(jumps, rate)
}

/// Matched QOME rate: equates the translation-invariant energy-relaxation
/// coefficient `Γ_ti·Σ_k c_k²·γ̃_k(θ,θ)/ω` with the QOME coefficient `2Γω`,
/// so `Γ_qome = Γ_ti·Σ_k c_k²·γ̃_k(θ,θ)/(2ω²)`.
pub fn match_rates(spec: &DissipatorSpec, theta: f64, units: &UnitSystem) -> Result<f64> {
    let mut sum = 0.0;
    for j in &spec.jumps {
        let c = match &j.profile {
            MomentumProfile::OptimalExp { c, .. } => *c,
            other => {
                return Err(Error::InvalidProfile(format!(
                    "rate matching needs exponential profiles, got {other:?}"
                )))
            }
        };
        sum += c * c * gamma_en_closed(theta, theta, j.kappa.abs(), units);
    }
    if !(sum.is_finite() && sum > 0.0) {
        return Err(Error::ZeroDecayRate);
    }
    Ok(spec.rate * sum / (2.0 * units.omega() * units.omega()))
}

/// One steady-state measurement with its convergence certificate.
#[derive(Clone, Copy, Debug)]
pub struct PointResult {
    pub bures: f64,
    pub residual: f64,
    /// dim/dim+10 protocol: Bures distance between the two truncations
    /// below [`CONVERGENCE_DB`].
    pub converged: bool,
}

fn embed(rho: &DensityMatrix, dim: usize) -> Result<DensityMatrix> {
    let small = rho.dim();
    let mut m = CMat::zeros((dim, dim));
    for i in 0..small {
        for j in 0..small {
            m[[i, j]] = rho.data()[[i, j]];
        }
    }
    DensityMatrix::new(Operator::new(m)?)
}

fn solve_at(
    model: &ModelSpec,
    dim: usize,
    dx0: f64,
    theta: f64,
    units: &UnitSystem,
) -> Result<(DensityMatrix, f64)> {
    let ops = build_canonical_operators(units, dim)?;
    let h = build_hamiltonian(&ops, units, dx0)?;
    let seed = thermal_state(&h, theta, units)?;
    let lind = model.lindblad(dim, dx0, units)?;
    let result = lind.steady_state_iterative(Some(&seed))?;
    Ok((result.rho, result.residual_norm))
}

/// Steady state at `dim`, re-solved at `dim+10` for the convergence flag;
/// Bures distance is measured against the displaced thermal target.
pub fn steady_point(
    model: &ModelSpec,
    dim: usize,
    dx0: f64,
    theta: f64,
    units: &UnitSystem,
) -> Result<PointResult> {
    let (rho, residual) = solve_at(model, dim, dx0, theta, units)?;
    let (rho_up, _) = solve_at(model, dim + 10, dx0, theta, units)?;
    let cross = bures_distance(&embed(&rho, dim + 10)?, &rho_up)?;
    let ops = build_canonical_operators(units, dim)?;
    let h = build_hamiltonian(&ops, units, dx0)?;
    let target = thermal_state(&h, theta, units)?;
    Ok(PointResult {
        bures: bures_distance(&rho, &target)?,
        residual,
        converged: cross < CONVERGENCE_DB,
    })
}

fn with_pool<R: Send>(workers: usize, job: impl FnOnce() -> R + Send) -> Result<R> {
    if workers == 0 {
        return Ok(job());
    }
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(workers)
        .build()
        .map_err(|e| Error::Config(e.to_string()))?;
    Ok(pool.install(job))
}

fn echo_config(table: &mut ResultTable, cfg: &ExperimentConfig) {
    table.push_metadata("experiment", cfg.experiment.name());
    table.push_metadata("omega", cfg.omega);
    table.push_metadata("dim", cfg.dim);
}

/// Rows: `model, theta, dx0, bures, converged`. The translation-invariant
/// model is displacement-covariant, the QOME (built on the undisplaced
/// ladder operator) is not.
pub fn run_fig1a(cfg: &ExperimentConfig) -> Result<ResultTable> {
    let units = cfg.units()?;
    let kappa = cfg.kappa * units.kappa0();
    let rate = cfg.gamma * units.omega();

    struct Job {
        model: &'static str,
        theta_rel: f64,
        dx0_rel: f64,
    }
    let mut jobs = Vec::new();
    for model in ["ti", "qome"] {
        for &theta_rel in &cfg.theta_grid {
            for &dx0_rel in &cfg.dx0_grid {
                jobs.push(Job {
                    model,
                    theta_rel,
                    dx0_rel,
                });
            }
        }
    }

    let dim = cfg.dim;
    let results: Vec<Result<PointResult>> = with_pool(cfg.workers, || {
        jobs.par_iter()
            .map(|job| {
                let theta = job.theta_rel * units.hbar() * units.omega();
                let dx0 = job.dx0_rel * units.x_scale();
                let c = figure_amplitude(theta, kappa, &units)?;
                let ti = build_ti_dissipator(ProfileVariant::Optimal, theta, kappa, c, rate, &units)?;
                let model = if job.model == "ti" {
                    ModelSpec::Ti(ti)
                } else {
                    let gamma_q = match_rates(&ti, theta, &units)?;
                    ModelSpec::Qome(QomeSpec::new(gamma_q / units.omega(), theta)?)
                };
                steady_point(&model, dim, dx0, theta, &units)
            })
            .collect()
    })?;

    let mut table = ResultTable::new(&["model", "theta", "dx0", "bures", "converged"]);
    echo_config(&mut table, cfg);
    table.push_metadata("kappa", cfg.kappa);
    table.push_metadata("gamma", cfg.gamma);
    for (job, res) in jobs.iter().zip(results) {
        let prefix = vec![
            Value::Text(job.model.to_string()),
            job.theta_rel.into(),
            job.dx0_rel.into(),
        ];
        push_point(&mut table, prefix, res)?;
    }
    Ok(table)
}

/// Rows: `kappa, theta, bures, converged` for the optimal-profile model.
pub fn run_fig1b(cfg: &ExperimentConfig) -> Result<ResultTable> {
    let units = cfg.units()?;
    let rate = cfg.gamma * units.omega();

    let mut jobs = Vec::new();
    for &kappa_rel in &cfg.kappa_grid {
        for &theta_rel in &cfg.theta_grid {
            jobs.push((kappa_rel, theta_rel));
        }
    }
    let dim = cfg.dim;
    let results: Vec<Result<PointResult>> = with_pool(cfg.workers, || {
        jobs.par_iter()
            .map(|&(kappa_rel, theta_rel)| {
                let kappa = kappa_rel * units.kappa0();
                let theta = theta_rel * units.hbar() * units.omega();
                let c = figure_amplitude(theta, kappa, &units)?;
                let ti = build_ti_dissipator(ProfileVariant::Optimal, theta, kappa, c, rate, &units)?;
                steady_point(&ModelSpec::Ti(ti), dim, 0.0, theta, &units)
            })
            .collect()
    })?;

    let mut table = ResultTable::new(&["kappa", "theta", "bures", "converged"]);
    echo_config(&mut table, cfg);
    table.push_metadata("gamma", cfg.gamma);
    for (&(kappa_rel, theta_rel), res) in jobs.iter().zip(results) {
        push_point(&mut table, vec![kappa_rel.into(), theta_rel.into()], res)?;
    }
    Ok(table)
}

/// Rows: `variant, kappa, Gamma, bures, converged` at the configured θ
/// (default 0) for the optimal, clipped and Doppler-fit profiles.
pub fn run_fig2a(cfg: &ExperimentConfig) -> Result<ResultTable> {
    let units = cfg.units()?;
    let theta = cfg.theta * units.hbar() * units.omega();

    let variants = [
        ProfileVariant::Optimal,
        ProfileVariant::Clipped,
        ProfileVariant::Doppler,
    ];
    let mut jobs = Vec::new();
    for &variant in &variants {
        for &kappa_rel in &cfg.kappa_grid {
            for &gamma_rel in &cfg.gamma_grid {
                jobs.push((variant, kappa_rel, gamma_rel));
            }
        }
    }
    let dim = cfg.dim;
    let results: Vec<Result<PointResult>> = with_pool(cfg.workers, || {
        jobs.par_iter()
            .map(|&(variant, kappa_rel, gamma_rel)| {
                let kappa = kappa_rel * units.kappa0();
                let rate = gamma_rel * units.omega();
                let c = figure_amplitude(theta, kappa, &units)?;
                let ti = build_ti_dissipator(variant, theta, kappa, c, rate, &units)?;
                steady_point(&ModelSpec::Ti(ti), dim, 0.0, theta, &units)
            })
            .collect()
    })?;

    let mut table = ResultTable::new(&["variant", "kappa", "Gamma", "bures", "converged"]);
    echo_config(&mut table, cfg);
    table.push_metadata("theta", cfg.theta);
    for (&(variant, kappa_rel, gamma_rel), res) in jobs.iter().zip(results) {
        let prefix = vec![
            Value::Text(variant.name().to_string()),
            kappa_rel.into(),
            gamma_rel.into(),
        ];
        push_point(&mut table, prefix, res)?;
    }
    Ok(table)
}

/// Generic sweep over `kappa_grid × gamma_grid` for the configured variant.
pub fn run_sweep(cfg: &ExperimentConfig) -> Result<ResultTable> {
    let units = cfg.units()?;
    let theta = cfg.theta * units.hbar() * units.omega();
    let variant = cfg.variant;

    let mut jobs = Vec::new();
    for &kappa_rel in &cfg.kappa_grid {
        for &gamma_rel in &cfg.gamma_grid {
            jobs.push((kappa_rel, gamma_rel));
        }
    }
    let dim = cfg.dim;
    let results: Vec<Result<PointResult>> = with_pool(cfg.workers, || {
        jobs.par_iter()
            .map(|&(kappa_rel, gamma_rel)| {
                let kappa = kappa_rel * units.kappa0();
                let rate = gamma_rel * units.omega();
                let c = figure_amplitude(theta, kappa, &units)?;
                let ti = build_ti_dissipator(variant, theta, kappa, c, rate, &units)?;
                steady_point(&ModelSpec::Ti(ti), dim, 0.0, theta, &units)
            })
            .collect()
    })?;

    let mut table = ResultTable::new(&["kappa", "Gamma", "theta", "bures", "residual", "converged"]);
    echo_config(&mut table, cfg);
    table.push_metadata("variant", variant.name());
    for (&(kappa_rel, gamma_rel), res) in jobs.iter().zip(results) {
        match res {
            Ok(p) => table.push_row(vec![
                kappa_rel.into(),
                gamma_rel.into(),
                cfg.theta.into(),
                p.bures.into(),
                p.residual.into(),
                p.converged.into(),
            ])?,
            Err(_) => table.push_failed_row(vec![
                kappa_rel.into(),
                gamma_rel.into(),
                cfg.theta.into(),
                f64::NAN.into(),
                f64::NAN.into(),
                false.into(),
            ])?,
        }
    }
    Ok(table)
}

/// Single steady-state run; the dense eigensolver route (with spectral gap)
/// is used up to dim 45, shifted inverse iteration above.
pub fn run_steady(cfg: &ExperimentConfig) -> Result<ResultTable> {
    let units = cfg.units()?;
    let theta = cfg.theta * units.hbar() * units.omega();
    let kappa = cfg.kappa * units.kappa0();
    let rate = cfg.gamma * units.omega();

    let model = match cfg.model {
        ModelKind::Qome => ModelSpec::Qome(QomeSpec::new(cfg.gamma, theta)?),
        ModelKind::Ti => {
            let spec = if let Some(p) = &cfg.profile {
                let [plus, minus] = isotropic_pair(kappa, p.to_profile()?)?;
                DissipatorSpec::new(vec![plus, minus], rate)?
            } else {
                let c = figure_amplitude(theta, kappa, &units)?;
                build_ti_dissipator(cfg.variant, theta, kappa, c, rate, &units)?
            };
            ModelSpec::Ti(spec)
        }
    };

    let dim = cfg.dim;
    let lind = model.lindblad(dim, 0.0, &units)?;
    let (rho, residual, gap) = if dim <= 45 {
        let r = lind.steady_state()?;
        (r.rho, r.residual_norm, r.spectral_gap)
    } else {
        let ops = build_canonical_operators(&units, dim)?;
        let h = build_hamiltonian(&ops, &units, 0.0)?;
        let seed = thermal_state(&h, theta, &units)?;
        let r = lind.steady_state_iterative(Some(&seed))?;
        (r.rho, r.residual_norm, None)
    };
    let (rho_up, _) = solve_at(&model, dim + 10, 0.0, theta, &units)?;
    let converged = bures_distance(&embed(&rho, dim + 10)?, &rho_up)? < CONVERGENCE_DB;

    let ops = build_canonical_operators(&units, dim)?;
    let h = build_hamiltonian(&ops, &units, 0.0)?;
    let target = thermal_state(&h, theta, &units)?;

    let mut table = ResultTable::new(&[
        "model", "variant", "theta", "kappa", "gamma", "bures", "residual", "gap", "energy",
        "purity", "converged",
    ]);
    echo_config(&mut table, cfg);
    table.push_row(vec![
        Value::Text(format!("{:?}", cfg.model).to_lowercase()),
        Value::Text(cfg.variant.name().to_string()),
        cfg.theta.into(),
        cfg.kappa.into(),
        cfg.gamma.into(),
        bures_distance(&rho, &target)?.into(),
        residual.into(),
        gap.unwrap_or(f64::NAN).into(),
        rho.expect(&h).into(),
        rho.purity().into(),
        converged.into(),
    ])?;
    Ok(table)
}

/// Consistency report: closed-form energy rates vs the Liouvillian route,
/// population-constraint residuals, and the position-diffusion identity.
/// Rows: `name, closed_form, numeric, rel_error, dim, pass`.
pub fn run_diagnose(cfg: &ExperimentConfig) -> Result<ResultTable> {
    let units = cfg.units()?;
    let kappa = cfg.kappa * units.kappa0();
    let hw = units.hbar() * units.omega();
    let dim = cfg.dim;

    let mut table = ResultTable::new(&["name", "closed_form", "numeric", "rel_error", "dim", "pass"]);
    echo_config(&mut table, cfg);
    table.push_metadata("kappa", cfg.kappa);

    // energy-rate coefficient at the three reference temperature pairs
    for (tp_rel, t_rel) in [(0.0, 0.0), (2.0, 1.0), (0.5, 1.0)] {
        let report = energy_rate_check(tp_rel * hw, t_rel * hw, kappa, 1.0, dim, &units)?;
        let name = format!("gamma_en({tp_rel},{t_rel})");
        match (report.gamma_en_numeric, report.relative_error) {
            (Some(num), Some(rel)) => table.push_row(vec![
                Value::Text(name),
                report.gamma_en_closed.into(),
                num.into(),
                rel.into(),
                Value::Int(dim as i64),
                (rel < 1e-4).into(),
            ])?,
            // θ' = θ: the raw rate itself must vanish
            _ => table.push_row(vec![
                Value::Text(name),
                report.gamma_en_closed.into(),
                report.raw_rate.into(),
                f64::NAN.into(),
                Value::Int(dim as i64),
                (report.raw_rate.abs() < 1e-8).into(),
            ])?,
        }
    }

    let theta = cfg.theta * hw;
    let c = figure_amplitude(theta, kappa, &units)?;
    let optimal = build_ti_dissipator(ProfileVariant::Optimal, theta, kappa, c, 1.0, &units)?;
    let clipped = build_ti_dissipator(ProfileVariant::Clipped, theta, kappa, c, 1.0, &units)?;

    let r_opt = population_constraint_residual(&optimal, theta, dim, &units)?;
    table.push_row(vec![
        Value::Text("population_residual_optimal".into()),
        0.0.into(),
        r_opt.into(),
        f64::NAN.into(),
        Value::Int(dim as i64),
        (r_opt < 1e-6).into(),
    ])?;
    let r_clip = population_constraint_residual(&clipped, theta, dim, &units)?;
    table.push_row(vec![
        Value::Text("population_residual_clipped".into()),
        0.0.into(),
        r_clip.into(),
        f64::NAN.into(),
        Value::Int(dim as i64),
        (r_clip > 1e-3).into(), // the clipped profile is expected to violate
    ])?;

    let numeric = position_diffusion_rate(&optimal, theta, dim, &units)?;
    let analytic = position_diffusion_analytic(&optimal, theta, dim, &units)?;
    let rel = (numeric - analytic).abs() / analytic.abs();
    table.push_row(vec![
        Value::Text("position_diffusion".into()),
        analytic.into(),
        numeric.into(),
        rel.into(),
        Value::Int(dim as i64),
        (rel < 1e-4 && numeric > 0.0).into(),
    ])?;

    Ok(table)
}

fn push_point(table: &mut ResultTable, mut prefix: Vec<Value>, res: Result<PointResult>) -> Result<()> {
    match res {
        Ok(p) => {
            prefix.push(p.bures.into());
            prefix.push(p.converged.into());
            table.push_row(prefix)
        }
        Err(_) => {
            prefix.push(f64::NAN.into());
            prefix.push(false.into());
            table.push_failed_row(prefix)
        }
    }
}

pub fn run(cfg: &ExperimentConfig) -> Result<ResultTable> {
    match cfg.experiment {
        ExperimentKind::Fig1a => run_fig1a(cfg),
        ExperimentKind::Fig1b => run_fig1b(cfg),
        ExperimentKind::Fig2a => run_fig2a(cfg),
        ExperimentKind::Steady => run_steady(cfg),
        ExperimentKind::Diagnose => run_diagnose(cfg),
        ExperimentKind::Sweep => run_sweep(cfg),
    }
}

/// Figure-appropriate plot series: the measurement against its natural x
/// axis, one series per remaining key combination.
pub fn plot_series(cfg: &ExperimentConfig, table: &ResultTable) -> Vec<Series> {
    let (x_col, key_cols) = match cfg.experiment {
        ExperimentKind::Fig1a => ("dx0", vec!["model", "theta"]),
        ExperimentKind::Fig1b => ("theta", vec!["kappa"]),
        ExperimentKind::Fig2a => ("kappa", vec!["variant", "Gamma"]),
        ExperimentKind::Sweep => ("kappa", vec!["Gamma"]),
        _ => return Vec::new(),
    };
    group_series(table, x_col, "bures", &key_cols)
}

fn group_series(table: &ResultTable, x_col: &str, y_col: &str, key_cols: &[&str]) -> Vec<Series> {
    let cols = table.columns();
    let idx = |name: &str| cols.iter().position(|c| c == name);
    let (Some(xi), Some(yi)) = (idx(x_col), idx(y_col)) else {
        return Vec::new();
    };
    let key_idx: Vec<usize> = key_cols.iter().filter_map(|k| idx(k)).collect();
    let mut series: Vec<Series> = Vec::new();
    for row in table.rows() {
        let label = key_idx
            .iter()
            .map(|&k| format!("{}={}", cols[k], render_cell(&row[k])))
            .collect::<Vec<_>>()
            .join(", ");
        let x = cell_num(&row[xi]);
        let y = cell_num(&row[yi]);
        match series.iter_mut().find(|s| s.label == label) {
            Some(s) => s.points.push((x, y)),
            None => series.push(Series {
                label,
                points: vec![(x, y)],
            }),
        }
    }
    for s in &mut series {
        s.points
            .sort_by(|a, b| a.0.partial_cmp(&b.0).unwrap_or(std::cmp::Ordering::Equal));
    }
    series
}

fn cell_num(v: &Value) -> f64 {
    match v {
        Value::Num(x) => *x,
        Value::Int(x) => *x as f64,
        _ => f64::NAN,
    }
}

fn render_cell(v: &Value) -> String {
    match v {
        Value::Text(s) => s.clone(),
        Value::Num(x) => format!("{x}"),
        Value::Int(x) => format!("{x}"),
        Value::Bool(x) => format!("{x}"),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::config::ExperimentConfig;

    fn units() -> UnitSystem {
        UnitSystem::default()
    }

    #[test]
    fn matched_rate_is_half_for_unit_energy_amplitude() {
        // single jump with c = ω/√γ̃ gives Γ_qome = 1/2
        let u = units();
        let kappa = 0.5;
        let c = figure_amplitude(0.0, kappa, &u).unwrap();
        let spec = DissipatorSpec::new(
            vec![JumpSpec::new(kappa, optimal_profile(0.0, kappa, &u, c).unwrap()).unwrap()],
            1.0,
        )
        .unwrap();
        let g = match_rates(&spec, 0.0, &u).unwrap();
        assert!((g - 0.5).abs() < 1e-12, "{g}");
    }

    #[test]
    fn matched_rate_is_quadratic_in_amplitude() {
        let u = units();
        let mk = |c: f64| {
            DissipatorSpec::new(
                vec![JumpSpec::new(0.4, optimal_profile(1.0, 0.4, &u, c).unwrap()).unwrap()],
                1.0,
            )
            .unwrap()
        };
        let g1 = match_rates(&mk(1.0), 1.0, &u).unwrap();
        let g2 = match_rates(&mk(2.0), 1.0, &u).unwrap();
        assert!((g2 - 4.0 * g1).abs() < 1e-12);
    }

    #[test]
    fn isotropic_pair_matches_its_rate() {
        // with c = ω/√γ̃ the pair gives Γ_qome = Γ_ti
        let u = units();
        let c = figure_amplitude(0.0, 0.5, &u).unwrap();
        let ti = build_ti_dissipator(ProfileVariant::Optimal, 0.0, 0.5, c, 0.1, &u).unwrap();
        let g = match_rates(&ti, 0.0, &u).unwrap();
        assert!((g - 0.1).abs() < 1e-12, "{g}");
    }

    #[test]
    fn zero_recoil_is_rejected() {
        let u = units();
        assert!(matches!(
            build_ti_dissipator(ProfileVariant::Optimal, 0.0, 0.0, 1.0, 1.0, &u),
            Err(Error::ZeroDecayRate)
        ));
        assert!(figure_amplitude(0.0, 0.0, &u).is_err());
    }

    #[test]
    fn figure_amplitude_closed_form() {
        let u = units();
        // γ̃(0,0) = 2κ²e^{κ²} at κ = 0.5 → 0.5·e^{0.25}
        let c = figure_amplitude(0.0, 0.5, &u).unwrap();
        assert!((c - 1.0 / (0.5f64 * (0.25f64).exp()).sqrt()).abs() < 1e-12);
    }

    #[test]
    fn matched_models_relax_energy_at_equal_rates() {
        // instantaneous d<H>/dt from a perturbed thermal state agrees within
        // 5% between the TI model and its rate-matched QOME
        let u = units();
        let dim = 40;
        let theta = 1.0;
        let theta_perturbed = 1.25;
        let c = figure_amplitude(theta, 0.3, &u).unwrap();
        let ti = build_ti_dissipator(ProfileVariant::Optimal, theta, 0.3, c, 0.1, &u).unwrap();
        let gq = match_rates(&ti, theta, &u).unwrap();
        let ops = build_canonical_operators(&u, dim).unwrap();
        let h = build_hamiltonian(&ops, &u, 0.0).unwrap();
        let rho = thermal_state(&h, theta_perturbed, &u).unwrap();
        let l_ti = Lindblad::for_dissipator(&ti, &ops, &u, 0.0).unwrap();
        let l_q = Lindblad::for_qome(&QomeSpec::new(gq, theta).unwrap(), &ops, &u, 0.0).unwrap();
        let r_ti = h.expectation(&l_ti.apply(rho.op())).re;
        let r_q = h.expectation(&l_q.apply(rho.op())).re;
        assert!(r_ti < 0.0 && r_q < 0.0, "{r_ti} {r_q}");
        assert!((r_ti - r_q).abs() / r_q.abs() < 0.05, "{r_ti} vs {r_q}");
    }

    #[test]
    fn steady_point_on_qome_reproduces_thermal() {
        let u = units();
        let model = ModelSpec::Qome(QomeSpec::new(0.1, 1.0).unwrap());
        // the Bures distance is tail-sensitive: it shrinks from ~1e-2 at
        // dim 20 to ~4e-7 at dim 60 as the truncated Gibbs tail closes
        let p = steady_point(&model, 40, 0.0, 1.0, &u).unwrap();
        assert!(p.bures < 1e-4, "bures {}", p.bures);
        assert!(p.residual < 1e-10);
        assert!(p.converged);
    }

    #[test]
    fn fig1b_marks_zero_kappa_as_failed_row() {
        let cfg = ExperimentConfig::from_toml(
            "experiment = \"fig1b\"\ndim = 16\nkappa_grid = [0.0, 0.5]\ntheta_grid = [1.0]",
        )
        .unwrap();
        let table = run_fig1b(&cfg).unwrap();
        assert_eq!(table.rows().len(), 2);
        assert_eq!(table.failures(), 1);
        let bures = table.numeric_column("bures").unwrap();
        assert!(bures[0].is_nan());
        assert!(bures[1].is_finite());
    }

    #[test]
    fn fig2a_mini_sweep_trends() {
        let cfg = ExperimentConfig::from_toml(
            "experiment = \"fig2a\"\ndim = 24\nkappa_grid = [0.3, 0.6]\ngamma_grid = [0.1]",
        )
        .unwrap();
        let table = run_fig2a(&cfg).unwrap();
        assert_eq!(
            table.columns(),
            &["variant", "kappa", "Gamma", "bures", "converged"]
        );
        assert_eq!(table.rows().len(), 6);
        assert_eq!(table.failures(), 0);
        let bures = table.numeric_column("bures").unwrap();
        // rows are variant-major: optimal(0.3, 0.6), clipped(...), doppler(...)
        assert!(bures[0] < bures[1], "optimal not increasing in kappa");
        assert!(bures[2] > bures[0], "clipped not worse than optimal");
        assert!(bures[3] > bures[1]);
    }

    #[test]
    fn fig1a_ti_rows_are_displacement_flat() {
        let cfg = ExperimentConfig::from_toml(
            "experiment = \"fig1a\"\ndim = 30\ntheta_grid = [0.0]\ndx0_grid = [0.0, 0.4, 0.8]\nkappa = 0.5\ngamma = 0.1",
        )
        .unwrap();
        let table = run_fig1a(&cfg).unwrap();
        let bures = table.numeric_column("bures").unwrap();
        // first three rows are the TI model across dx0
        let spread = (bures[0] - bures[2]).abs().max((bures[0] - bures[1]).abs());
        assert!(spread < 1e-5, "TI spread {spread}");
        // QOME rows strictly increase with displacement
        assert!(bures[3] < bures[4] && bures[4] < bures[5], "{bures:?}");
    }

    #[test]
    fn diagnose_rows_all_pass() {
        // the hot-state (2ħω) energy-rate check needs ~70 levels to converge
        let cfg = ExperimentConfig::from_toml("experiment = \"diagnose\"\ndim = 70\ntheta = 1.0")
            .unwrap();
        let table = run_diagnose(&cfg).unwrap();
        assert_eq!(table.rows().len(), 6);
        for row in table.rows() {
            assert_eq!(row.last(), Some(&Value::Bool(true)), "{row:?}");
        }
    }

    #[test]
    fn plot_series_grouping() {
        let cfg = ExperimentConfig::from_toml(
            "experiment = \"fig2a\"\ndim = 20\nkappa_grid = [0.4, 0.6]\ngamma_grid = [0.1]",
        )
        .unwrap();
        let table = run_fig2a(&cfg).unwrap();
        let series = plot_series(&cfg, &table);
        assert_eq!(series.len(), 3); // one per variant at the single Γ
        assert!(series.iter().all(|s| s.points.len() == 2));
        assert!(series[0].label.contains("variant=optimal"));
    }
}
