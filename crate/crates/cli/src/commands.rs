//! One function per subcommand: typed config in, table and JSON verdict out.

use std::f64::consts::PI;

use cvcl_core::channels::{apply_dephasing, apply_step_projector, empirical_kernel};
use cvcl_core::dynamics::{
    coherence_time_series, delta_crel_bound_taylor_coefficient, kappa, validity_flags,
    NewtonianScenario, MIN_LOCALIZATION_RATIO,
};
use cvcl_core::free_ops::{
    apply_instrument, build_counterexample_instrument, check_dephasing_covariance,
    counterexample_input, symmetric_support_width, verify_c2_monotonicity_violation,
    verify_crel_monotonicity, verify_strong_monotonicity, CovarianceMode, Measure,
};
use cvcl_core::linalg::frobenius_distance;
use cvcl_core::measures::{
    c2_epsilon, c2_epsilon_gaussian_closed_form, c2_g, c2_gaussian_closed_form, c_rel_g, crel_jensen_bound,
};
use cvcl_core::witness::{
    c2_two_packet, certify, full_grid_crosscheck, witness_bound, x_theta_expectation,
    TwoPacketState,
};
use cvcl_core::{
    c64, gaussian_kernel, kernel_from_kicks, DensityMatrix, DephasingKernel, GaussianParams, Grid,
    KernelModel, KickDistribution, UnitSystem, Units, WaveFunction,
};
use serde_json::json;

use crate::config::{key, ConfigError, KeySpec, Kind, Resolved};
use crate::CliError;
use crate::output::{json_real, Table};

pub struct Outcome {
    pub table: Table,
    pub verdict: serde_json::Value,
    /// (x column, y column) for `--plot`.
    pub plot: Option<(&'static str, &'static str)>,
}

const UNITS: Kind = Kind::Choice(&["si", "natural"]);
const KERNEL_KIND: Kind = Kind::Choice(&["gaussian", "identity"]);

fn units(r: &Resolved) -> Units {
    match r.choice("units") {
        "natural" => Units::new(UnitSystem::Natural),
        _ => Units::new(UnitSystem::Si),
    }
}

fn flag(b: bool) -> f64 {
    if b {
        1.0
    } else {
        0.0
    }
}

pub const MEASURE_KEYS: &[KeySpec] = &[
    key("kernel.kind", KERNEL_KIND, "gaussian"),
    key("kernel.ell_g", Kind::Positive, "20e-6"),
    key(
        "sweep.sigma_over_ell",
        Kind::PositiveList,
        "0.1,0.2,0.3,0.4,0.5,0.6,0.7,0.8,0.9,1.0,1.1,1.2,1.3,1.4,1.5,1.6,1.7,1.8,1.9,2.0,2.1,2.2,2.3,2.4,2.5,2.6,2.7,2.8,2.9,3.0",
    ),
    key("grid.n_points", Kind::Count, "512"),
    key("seed", Kind::Seed, "0"),
];

/// Pure Gaussian packets swept in σ/ℓ_g: lattice measures against closed forms.
pub fn measure(r: &Resolved) -> Result<Outcome, CliError> {
    let ell = r.real("kernel.ell_g");
    let identity = r.choice("kernel.kind") == "identity";
    let n = r.count("grid.n_points");
    let mut table = Table::new(vec![
        "sigma",
        "ell_g",
        "c2_numeric",
        "c2_closed",
        "crel_numeric",
        "crel_bound",
    ]);
    table.may_diverge.push("crel_numeric");
    let mut max_c2_error = 0.0f64;
    let mut bound_holds = true;
    for &ratio in r.reals("sweep.sigma_over_ell") {
        let sigma = ratio * ell;
        let params = GaussianParams::new(0.0, sigma)?;
        let grid = params.fitted_grid(n)?;
        let rho = DensityMatrix::pure(&WaveFunction::gaussian(grid, params)?);
        let kernel = if identity {
            DephasingKernel::identity(grid)
        } else {
            gaussian_kernel(grid, ell)?
        };
        let c2 = c2_g(&rho, &kernel)?.value;
        let crel = c_rel_g(&rho, &kernel)?.value;
        let (c2_closed, bound) = if identity {
            (0.0, 0.0)
        } else {
            (c2_gaussian_closed_form(sigma, ell)?, crel_jensen_bound(sigma, ell)?)
        };
        max_c2_error = max_c2_error.max((c2 - c2_closed).abs());
        bound_holds &= crel >= bound - 1e-8;
        table.push(vec![sigma, ell, c2, c2_closed, crel, bound]);
    }
    Ok(Outcome {
        verdict: json!({
            "rows": table.rows.len(),
            "max_c2_abs_error": json_real(max_c2_error),
            "crel_above_jensen_bound": bound_holds,
        }),
        table,
        plot: Some(("sigma", "c2_numeric")),
    })
}

pub const DYNAMICS_KEYS: &[KeySpec] = &[
    key("scenario.m", Kind::Positive, "1e-14"),
    key("scenario.source_mass", Kind::NonNegative, "1e-14"),
    key("scenario.x0", Kind::Positive, "200e-6"),
    key("scenario.sigma0", Kind::Positive, "10e-6"),
    key("scenario.ell_g", Kind::Positive, "20e-6"),
    key("scenario.t_max", Kind::NonNegative, "1.0"),
    key("scenario.n_steps", Kind::Count, "101"),
    key("units", UNITS, "si"),
    key("seed", Kind::Seed, "0"),
];

pub fn scenario(r: &Resolved) -> NewtonianScenario {
    NewtonianScenario {
        m: r.real("scenario.m"),
        source_mass: r.real("scenario.source_mass"),
        x0: r.real("scenario.x0"),
        sigma0: r.real("scenario.sigma0"),
        ell_g: r.real("scenario.ell_g"),
        t_max: r.real("scenario.t_max"),
        n_steps: r.count("scenario.n_steps"),
        units: units(r),
    }
}

/// Rejects a scenario the same way the library would, but names the config key.
fn check_scenario(s: &NewtonianScenario) -> Result<(), ConfigError> {
    let bad = |k: &str, m: String| ConfigError {
        key: Some(k.to_string()),
        message: m,
    };
    if s.x0 / s.sigma0 < MIN_LOCALIZATION_RATIO {
        return Err(bad(
            "scenario.sigma0",
            format!("x0/sigma0 = {} is below {MIN_LOCALIZATION_RATIO}", s.x0 / s.sigma0),
        ));
    }
    if s.n_steps < 2 {
        return Err(bad("scenario.n_steps", "must be at least 2".into()));
    }
    Ok(())
}

/// Width and coherence time series of the packet near a point mass.
pub fn dynamics(r: &Resolved) -> Result<Outcome, CliError> {
    let s = scenario(r);
    check_scenario(&s)?;
    let rows = coherence_time_series(&s)?;
    let mut table = Table::new(vec!["t", "sigma_t", "c2", "crel_bound", "delta_crel_bound"]);
    for row in &rows {
        table.push(vec![
            row.t,
            row.sigma_t,
            row.c2,
            row.crel_bound,
            row.delta_crel_bound,
        ]);
    }
    let monotone = rows
        .windows(2)
        .all(|p| p[1].delta_crel_bound >= p[0].delta_crel_bound);
    let flags = validity_flags(&s);
    let last = rows.last().expect("at least one row");
    Ok(Outcome {
        verdict: json!({
            "kappa": json_real(kappa(&s)),
            "taylor_coefficient": json_real(delta_crel_bound_taylor_coefficient(&s)),
            "delta_crel_bound_final": json_real(last.delta_crel_bound),
            "delta_monotone": monotone,
            "delta_nonnegative": rows.iter().all(|r| r.delta_crel_bound >= 0.0),
            "kappa_t_max": json_real(flags.kappa_t_max),
            "x0_over_sigma0": json_real(flags.x0_over_sigma0),
            "final_width_over_x0": json_real(flags.final_width_over_x0),
            "well_localized": flags.well_localized,
        }),
        table,
        plot: Some(("t", "delta_crel_bound")),
    })
}

pub const COUNTEREXAMPLE_KEYS: &[KeySpec] = &[
    key("grid.x_min", Kind::Real, "-10"),
    key("grid.x_max", Kind::Real, "10"),
    key("grid.n_points", Kind::Count, "401"),
    key("phi.kind", Kind::Choice(&["bump", "gaussian"]), "bump"),
    key("phi.width", Kind::Positive, "1.0"),
    key("shift.a", Kind::Real, "-5"),
    key("shift.b", Kind::Real, "5"),
    key("kernel.ell_g", Kind::Positive, "0.5"),
    key("seed", Kind::Seed, "0"),
];

/// Translation/projection instrument that doubles the Hilbert–Schmidt loss.
pub fn counterexample(r: &Resolved) -> Result<Outcome, CliError> {
    let grid = Grid::new(r.real("grid.x_min"), r.real("grid.x_max"), r.count("grid.n_points"))?;
    let width = r.real("phi.width");
    let phi = match r.choice("phi.kind") {
        "gaussian" => WaveFunction::gaussian(grid, GaussianParams::new(0.0, width)?)?
            .truncated(-6.0 * width, 6.0 * width)?,
        _ => WaveFunction::bump(grid, 0.0, width)?,
    };
    let (a, b) = (r.real("shift.a"), r.real("shift.b"));
    let kernel = gaussian_kernel(grid, r.real("kernel.ell_g"))?;
    let violation = verify_c2_monotonicity_violation(&phi, a, b, &kernel).map_err(|e| match e {
        cvcl_core::Error::OffLattice { name, value } => CliError::Config(ConfigError {
            key: Some(format!("shift.{name}")),
            message: format!("{value} is not a multiple of the lattice spacing {}", grid.dx()),
        }),
        cvcl_core::Error::Overlap(o) => CliError::Config(ConfigError {
            key: Some("shift.b".into()),
            message: format!("shifted copies overlap ({o:e})"),
        }),
        other => other.into(),
    })?;
    let input = counterexample_input(&phi, a, b)?;
    let instrument =
        build_counterexample_instrument(grid, symmetric_support_width(&phi).max(grid.dx()), a, b)?;
    let outcome = apply_instrument(&input, &instrument)?;
    let crel = verify_crel_monotonicity(&input, &instrument, &kernel)?;
    let strong_crel = verify_strong_monotonicity(&input, &instrument, &kernel, Measure::Crel)?;
    let strong_c2 = verify_strong_monotonicity(&input, &instrument, &kernel, Measure::C2)?;
    let branch_defect = check_dephasing_covariance(
        &instrument,
        &kernel,
        std::slice::from_ref(&input),
        CovarianceMode::Branchwise,
    )?;

    let mut table = Table::new(vec!["branch", "occurred", "probability", "c2_post", "crel_post"]);
    table.may_diverge.push("crel_post");
    for (k, (p, post)) in outcome
        .probabilities
        .iter()
        .zip(&outcome.post_states)
        .enumerate()
    {
        let (c2, crel) = match post {
            Some(state) => (c2_g(state, &kernel)?.value, c_rel_g(state, &kernel)?.value),
            None => (0.0, 0.0),
        };
        table.push(vec![k as f64, flag(post.is_some()), *p, c2, crel]);
    }
    Ok(Outcome {
        verdict: json!({
            "c2_phi": json_real(violation.c2_phi),
            "c2_in": json_real(violation.c2_in),
            "c2_out": json_real(violation.c2_out),
            "ratio": json_real(violation.ratio),
            "violates_monotonicity": !violation.degenerate && violation.c2_out > violation.c2_in,
            "c2_strong_lhs": json_real(strong_c2.lhs),
            "c2_strong_rhs": json_real(strong_c2.rhs),
            "c2_strong_holds": strong_c2.holds,
            "crel_before": json_real(crel.before),
            "crel_after": json_real(crel.after),
            "crel_monotone": crel.holds,
            "crel_strong_lhs": json_real(strong_crel.lhs),
            "crel_strong_rhs": json_real(strong_crel.rhs),
            "crel_strong_holds": strong_crel.holds,
            "covariance_defect_branchwise": json_real(branch_defect),
            "completeness_residual": json_real(instrument.completeness_residual()),
        }),
        table,
        plot: None,
    })
}

pub const WITNESS_KEYS: &[KeySpec] = &[
    key("sector.p", Kind::NonNegative, "0.5"),
    key("sector.c_abs", Kind::NonNegative, "0.5"),
    key("sector.c_phase", Kind::Real, "0"),
    key("sector.d", Kind::Positive, "60e-6"),
    key("sector.packet_width", Kind::Positive, "1e-6"),
    key("kernel.ell_g", Kind::Positive, "20e-6"),
    key("witness.c0", Kind::Positive, "0.4"),
    key("theta.count", Kind::Count, "360"),
    key("crosscheck.points_per_width", Kind::Count, "5"),
    key("seed", Kind::Seed, "0"),
];

/// θ scan of the threshold witness on a two-packet state, plus the grid check.
pub fn witness(r: &Resolved) -> Result<Outcome, CliError> {
    let c = c64::from_polar(r.real("sector.c_abs"), r.real("sector.c_phase"));
    let state = TwoPacketState::new(
        r.real("sector.p"),
        c,
        r.real("sector.d"),
        r.real("sector.packet_width"),
    )?;
    let model = KernelModel::Gaussian {
        ell_g: r.real("kernel.ell_g"),
    };
    let g = model.value(state.d);
    let c0 = r.real("witness.c0");
    let count = r.count("theta.count").max(1);
    let mut table = Table::new(vec!["theta", "x_theta", "witness_value", "certified"]);
    let mut best = f64::NEG_INFINITY;
    let mut certified_any = false;
    for i in 0..count {
        // the scan starts on arg(c), where the expectation peaks
        let theta = c.arg() + 2.0 * PI * i as f64 / count as f64;
        let x = x_theta_expectation(&state, theta);
        let cert = certify(&state, theta, c0, g)?;
        best = best.max(x);
        certified_any |= cert.certified;
        table.push(vec![theta, x, cert.witness_value, flag(cert.certified)]);
    }
    let check = full_grid_crosscheck(&state, &model, r.count("crosscheck.points_per_width"))?;
    Ok(Outcome {
        verdict: json!({
            "g_at_d": json_real(g.re),
            "c2_sector": json_real(c2_two_packet(&state, g)?),
            "witness_bound": json_real(witness_bound(c0, g)?),
            "max_x_theta": json_real(best),
            "two_abs_c": json_real(2.0 * c.norm()),
            "certified": certified_any,
            "crosscheck": {
                "c2_grid": json_real(check.c2_grid),
                "c2_sector": json_real(check.c2_sector),
                "rel_error": json_real(check.rel_error),
                "overlap": json_real(check.overlap),
                "overlap_warning": check.overlap_warning,
                "width_to_coherence_length": check.width_to_coherence_length.map(json_real),
                "width_to_separation": json_real(check.width_to_separation),
                "n_points": check.n_points,
            },
        }),
        table,
        plot: Some(("theta", "witness_value")),
    })
}

pub const MC_KEYS: &[KeySpec] = &[
    key("kernel.ell_g", Kind::Positive, "20e-6"),
    key("state.sigma", Kind::Positive, "20e-6"),
    key("grid.n_points", Kind::Count, "121"),
    key("mc.samples", Kind::CountList, "1000,10000,100000"),
    key("units", UNITS, "si"),
    key("seed", Kind::Seed, "42"),
];

/// Sampled random-kick channel against the exact Gaussian kernel.
pub fn mc_check(r: &Resolved) -> Result<Outcome, CliError> {
    let u = units(r);
    let ell = r.real("kernel.ell_g");
    let sigma = r.real("state.sigma");
    let params = GaussianParams::new(0.0, sigma)?;
    let grid = params.fitted_grid(r.count("grid.n_points"))?;
    let rho = DensityMatrix::pure(&WaveFunction::gaussian(grid, params)?);
    let kicks = KickDistribution::gaussian(u.hbar / ell)?;
    let exact = apply_dephasing(&rho, &kernel_from_kicks(grid, &kicks, &u))?;
    let c2 = c2_g(&rho, &kernel_from_kicks(grid, &kicks, &u))?.value;
    let seed = r.seed("seed");
    let mut table = Table::new(vec!["n_samples", "frobenius_error", "expected_error"]);
    let mut errors = Vec::new();
    for &n in r.counts("mc.samples") {
        let sampled = apply_dephasing(&rho, &empirical_kernel(grid, &kicks, n, seed, &u)?)?;
        let err = frobenius_distance(sampled.entries(), exact.entries());
        errors.push(err);
        table.push(vec![n as f64, err, (c2 / n as f64).sqrt()]);
    }
    let ratios: Vec<serde_json::Value> = errors.windows(2).map(|w| json_real(w[0] / w[1])).collect();
    Ok(Outcome {
        verdict: json!({
            "seed": seed,
            "c2": json_real(c2),
            "final_error": json_real(*errors.last().expect("non-empty sample list")),
            "successive_error_ratios": ratios,
        }),
        table,
        plot: Some(("n_samples", "frobenius_error")),
    })
}

pub const STEPMASK_KEYS: &[KeySpec] = &[
    key("state.sigma", Kind::Positive, "10e-6"),
    key("grid.n_points", Kind::Count, "513"),
    key("mask.epsilon_over_sigma", Kind::PositiveList, "0.5,1,2,4"),
    key("seed", Kind::Seed, "0"),
];

/// Finite-resolution diagnostic and the positivity of the masked state.
pub fn stepmask(r: &Resolved) -> Result<Outcome, CliError> {
    let sigma = r.real("state.sigma");
    let params = GaussianParams::new(0.0, sigma)?;
    let grid = params.fitted_grid(r.count("grid.n_points"))?;
    let rho = DensityMatrix::pure(&WaveFunction::gaussian(grid, params)?);
    let mut table = Table::new(vec![
        "epsilon",
        "c2_epsilon",
        "erf_closed_form",
        "min_eigenvalue",
        "idempotent",
    ]);
    let mut negative = false;
    let mut idempotent_all = true;
    let mut max_error = 0.0f64;
    for &ratio in r.reals("mask.epsilon_over_sigma") {
        let eps = ratio * sigma;
        let once = apply_step_projector(&rho, eps)?;
        let twice = once.project(eps)?;
        let idempotent = frobenius_distance(once.entries(), twice.entries()) == 0.0;
        let min = once.min_eigenvalue()?;
        let value = c2_epsilon(&rho, eps)?;
        let closed = c2_epsilon_gaussian_closed_form(sigma, eps)?;
        max_error = max_error.max((value - closed).abs());
        negative |= min < -1e-6;
        idempotent_all &= idempotent;
        table.push(vec![eps, value, closed, min, flag(idempotent)]);
    }
    Ok(Outcome {
        verdict: json!({
            "idempotent": idempotent_all,
            "negative_eigenvalue_found": negative,
            "max_abs_error_vs_erf": json_real(max_error),
            "lattice_spacing": json_real(grid.dx()),
        }),
        table,
        plot: Some(("epsilon", "c2_epsilon")),
    })
}
