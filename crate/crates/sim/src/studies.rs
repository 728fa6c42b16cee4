//! The three asymptotic studies and the interface decoupling test.
//!
//! Every study checks its preconditions on the configured data first and
//! refuses to run with a message naming the violated condition. Runs for
//! different parameter values are independent and execute in parallel; the
//! table is assembled afterwards in the configured parameter order.

use adhesive_plate_core::assembly::{AssembledForms, ModelVariant};
use adhesive_plate_core::assembly::{slab_field, slab_quadrature};
use adhesive_plate_core::energetics::{AdhesionField, ModelParams};
use adhesive_plate_core::kl::KlProjector;
use adhesive_plate_core::mesh::{SlabMesh, PLATE_NODE_DOFS};
use adhesive_plate_core::sparse::{BandedCholesky, CooBuilder, CsrMatrix, DofSubset};
use adhesive_plate_core::stepper::{
    interface_force, verify_energy_balance, verify_semistability, Trajectory, BALANCE_TOLERANCE,
    SEMISTABILITY_TOLERANCE,
};
use adhesive_plate_core::tensor::{check_planar_condition, SymTensor4};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::config::{FamilyConfig, RunConfig, ViscosityRule};
use crate::error::{ConfigError, SimError};
use crate::problem::{Problem, RunSpec};
use crate::report::StudyReport;

/// Growth factor allowed for the scaling diagnostics over the family.
pub const DIAGNOSTIC_GROWTH_LIMIT: f64 = 2.0;
/// Absolute slack of the boundedness check, for columns that vanish at
/// the largest thickness.
pub const DIAGNOSTIC_FLOOR: f64 = 1e-10;
/// Accepted range of the residual ratio under halving of the time step.
pub const FIRST_ORDER_RATIO: (f64, f64) = (1.5, 3.0);

fn spec(
    cfg: &RunConfig,
    variant: ModelVariant,
    params: ModelParams,
    viscosity: SymTensor4,
    damping_weight: f64,
) -> Result<RunSpec, SimError> {
    Ok(RunSpec {
        variant,
        params,
        elasticity: cfg.material.elasticity.tensor()?,
        viscosity,
        damping_weight,
        scheme: cfg.scheme.scheme(variant),
    })
}

fn simulate(cfg: &RunConfig, spec: &RunSpec) -> Result<(Problem, Trajectory), SimError> {
    let problem = Problem::build(cfg, spec)?;
    let trajectory = problem.run()?;
    Ok((problem, trajectory))
}

fn relative_balance(t: &Trajectory) -> f64 {
    let b = verify_energy_balance(t);
    if b.scale > 0.0 {
        b.max_abs / b.scale
    } else {
        b.max_abs
    }
}

fn strictly_decreasing(values: &[f64]) -> bool {
    values.windows(2).all(|w| w[1] < w[0])
}

fn non_increasing(values: &[f64]) -> bool {
    values.windows(2).all(|w| w[1] <= w[0])
}

fn list(values: &[f64]) -> String {
    values.iter().map(|v| format!("{v:.6e}")).collect::<Vec<_>>().join(", ")
}

/// `(rᵀ K⁻¹ r)^{1/2}` on the free dofs: the norm of a force in the dual of
/// the energy norm.
struct DualNorm {
    free: DofSubset,
    factor: BandedCholesky,
}

impl DualNorm {
    fn new(forms: &AssembledForms) -> Result<Self, SimError> {
        let free = DofSubset::from_mask(&forms.free);
        let factor = BandedCholesky::factor(&free.restrict_matrix(&forms.stiffness))?;
        Ok(DualNorm { free, factor })
    }

    fn norm(&self, r: &[f64]) -> f64 {
        let rf = self.free.restrict(r);
        let x = self.factor.solve(&rf);
        rf.iter().zip(&x).map(|(a, b)| a * b).sum::<f64>().max(0.0).sqrt()
    }
}

/// `M a + K u + N(u, z) − F`, with `F` the load at `t` for damping factor
/// `damping_factor` in front of the lift rate.
fn momentum_residual(
    problem: &Problem,
    params: &ModelParams,
    t: f64,
    u: &[f64],
    a: &[f64],
    z: &AdhesionField,
    damping_factor: f64,
) -> Vec<f64> {
    let forms = &problem.forms;
    let mut r = interface_force(forms, params, z, u);
    forms.mass.mul_vec_add(1.0, a, &mut r);
    forms.stiffness.mul_vec_add(1.0, u, &mut r);
    let load = problem.loads.load_derivative_with_damping(0, t, damping_factor);
    r.iter_mut().zip(&load).for_each(|(ri, f)| *ri -= f);
    r
}

// ---------------------------------------------------------------------------
// Vanishing viscosity

/// Columns of the vanishing-viscosity table.
pub const NU_COLUMNS: [&str; 4] = ["viscous_dissipation", "distance_to_next", "undamped_residual", "balance_rel"];

/// Runs the damped slab with damping tensor `ν · material.viscosity` for
/// each configured `ν`, and a direct run without viscosity.
///
/// Per `ν` the table holds the viscous energy dissipated up to the final
/// time, the largest energy-norm distance `(Δuᵀ K Δu + Δvᵀ M Δv)^{1/2}` to
/// the next level, the time integral of the dual norm of the undamped
/// momentum residual, and the relative balance residual.
pub fn study_nu_to_zero(cfg: &RunConfig) -> Result<StudyReport, SimError> {
    let Some(study) = &cfg.nu_study else {
        return Err(ConfigError::field("nu_study", "section required for the vanishing-viscosity study").into());
    };
    if !strictly_decreasing(&study.values) {
        return Err(ConfigError::field("nu_study.values", "must be strictly decreasing").into());
    }
    let base = cfg.material.viscosity.tensor()?;
    let runs: Vec<(Problem, Trajectory)> = study
        .values
        .par_iter()
        .map(|&nu| simulate(cfg, &spec(cfg, ModelVariant::Physical3D, cfg.params, base.scaled(nu), 1.0)?))
        .collect::<Result<_, _>>()?;
    let undamped = simulate(cfg, &spec(cfg, ModelVariant::Physical3D, cfg.params, base, 0.0)?)?;

    let forms = &runs[0].0.forms;
    let dual = DualNorm::new(forms)?;
    let dt = cfg.scheme.dt;
    let undamped_residual = |(problem, traj): &(Problem, Trajectory)| -> f64 {
        let norms: Vec<f64> = traj
            .states
            .iter()
            .map(|s| dual.norm(&momentum_residual(problem, &problem.params, s.t, &s.u, &s.a, &s.z, 0.0)))
            .collect();
        dt * norms.windows(2).map(|w| 0.5 * (w[0] + w[1])).sum::<f64>()
    };

    let mut report = StudyReport::new("nu_study", "nu", &NU_COLUMNS);
    let mut dissipation = Vec::new();
    let mut residuals = Vec::new();
    for (k, (&nu, run)) in study.values.iter().zip(&runs).enumerate() {
        let traj = &run.1;
        let v_cum = traj.records.last().map_or(0.0, |r| r.viscous_cum);
        let distance = runs.get(k + 1).map(|next| energy_distance(forms, traj, &next.1));
        let residual = undamped_residual(run);
        dissipation.push(v_cum);
        residuals.push(residual);
        report.push_row(nu, vec![Some(v_cum), distance, Some(residual), Some(relative_balance(traj))]);
    }

    let balance = verify_energy_balance(&undamped.1);
    let excess = if balance.scale > 0.0 { balance.max_excess / balance.scale } else { balance.max_excess };
    report.push_scalar("undamped_run_max_excess_rel", excess);
    report.push_scalar("undamped_run_residual", undamped_residual(&undamped));
    report.push_check(
        "viscous_dissipation_strictly_decreasing",
        strictly_decreasing(&dissipation),
        list(&dissipation),
    );
    report.push_check("undamped_residual_decreasing", strictly_decreasing(&residuals), list(&residuals));
    report.push_check(
        "undamped_inequality_certified",
        balance.passed && balance.one_sided,
        format!("max excess {:.3e} of energy scale {:.3e}", balance.max_excess, balance.scale),
    );
    Ok(report)
}

/// `max_n (Δuᵀ K Δu + Δvᵀ M Δv)^{1/2}` between two runs on the same forms.
pub fn energy_distance(forms: &AssembledForms, a: &Trajectory, b: &Trajectory) -> f64 {
    a.states
        .iter()
        .zip(&b.states)
        .map(|(x, y)| {
            let du: Vec<f64> = x.u.iter().zip(&y.u).map(|(p, q)| p - q).collect();
            let dv: Vec<f64> = x.v.iter().zip(&y.v).map(|(p, q)| p - q).collect();
            (forms.stiffness.quadratic(&du) + forms.mass.quadratic(&dv)).max(0.0).sqrt()
        })
        .fold(0.0, f64::max)
}

// ---------------------------------------------------------------------------
// Thickness families

fn family(cfg: &RunConfig) -> Result<&FamilyConfig, SimError> {
    let f = cfg
        .family
        .as_ref()
        .ok_or_else(|| ConfigError::field("family", "section required for the thickness studies"))?;
    f.validate()?;
    for &eps in &f.eps_list {
        f.params_at(&cfg.params, eps)
            .validate()
            .map_err(|e| ConfigError::field("family", format!("parameters at eps = {eps}: {e}")))?;
    }
    f.limit_params(&cfg.params)
        .validate()
        .map_err(|e| ConfigError::field("family", format!("limit parameters: {e}")))?;
    Ok(f)
}

/// Checks the preconditions of the undamped thickness limit.
pub fn validate_undamped_family(cfg: &RunConfig) -> Result<&FamilyConfig, SimError> {
    let f = family(cfg)?;
    if f.viscosity_rule != ViscosityRule::Vanishing {
        return Err(SimError::Hypothesis(
            "the undamped limit needs the vanishing viscosity rule D_eps = eps^delta D*".into(),
        ));
    }
    if !(f.b.limit > 0.0) {
        return Err(SimError::Hypothesis(format!(
            "the undamped limit needs a positive limit perimeter coefficient, got b = {}",
            f.b.limit
        )));
    }
    if f.nu.limit != 0.0 {
        return Err(SimError::Hypothesis(format!(
            "the undamped limit needs the non-interpenetration weight to vanish, got nu = {}",
            f.nu.limit
        )));
    }
    Ok(f)
}

/// Checks the preconditions of the damped thickness limit.
pub fn validate_damped_family(cfg: &RunConfig) -> Result<&FamilyConfig, SimError> {
    let f = family(cfg)?;
    if f.viscosity_rule != ViscosityRule::InverseThickness {
        return Err(SimError::Hypothesis("the damped limit needs the viscosity rule D_eps = D / eps".into()));
    }
    if !(f.nu.limit > 0.0) {
        return Err(SimError::Hypothesis(format!(
            "the damped limit needs a positive non-interpenetration weight, got nu = {}",
            f.nu.limit
        )));
    }
    let planar = "the planarity condition T_i3kl = 0 for in-plane kl";
    if !check_planar_condition(&cfg.material.elasticity.tensor()?) {
        return Err(SimError::Hypothesis(format!("the elasticity tensor violates {planar}")));
    }
    if !check_planar_condition(&cfg.material.viscosity.tensor()?) {
        return Err(SimError::Hypothesis(format!("the viscosity tensor violates {planar}")));
    }
    Ok(f)
}

/// Columns of the scaling table, one per a-priori bound on the rescaled
/// solutions. Each is the largest value over the run of
///
/// * `‖∂3 u3‖ / eps²`,
/// * `‖∂1 u3 + ∂3 u1‖ / eps` and `‖∂2 u3 + ∂3 u2‖ / eps`,
/// * `eps ‖v1‖`, `eps ‖v2‖` and `‖v3‖`,
///
/// all `L²` norms over the reference slab of the total displacement `u`
/// and velocity `v`, Dirichlet lift included.
pub const SCALING_COLUMNS: [&str; 6] =
    ["d3u3_over_eps2", "shear13_over_eps", "shear23_over_eps", "eps_v1", "eps_v2", "v3"];

/// The [`SCALING_COLUMNS`] of a rescaled-slab run.
pub fn scaling_diagnostics(problem: &Problem, trajectory: &Trajectory, eps: f64) -> Result<[f64; 6], SimError> {
    let mesh = problem
        .geometry
        .slab()
        .ok_or_else(|| SimError::Hypothesis("scaling diagnostics need a slab run".into()))?;
    let quad = slab_quadrature(mesh);
    let mut out = [0.0f64; 6];
    for s in &trajectory.states {
        let lift = problem.loads.lift_at(0, s.t);
        let lift_rate = problem.loads.lift_at(1, s.t);
        let u: Vec<f64> = s.u.iter().zip(&lift).map(|(a, b)| a + b).collect();
        let v: Vec<f64> = s.v.iter().zip(&lift_rate).map(|(a, b)| a + b).collect();
        let sq = squared_norms(mesh, &quad, &u, &v);
        let row = [
            sq[0].sqrt() / (eps * eps),
            sq[1].sqrt() / eps,
            sq[2].sqrt() / eps,
            eps * sq[3].sqrt(),
            eps * sq[4].sqrt(),
            sq[5].sqrt(),
        ];
        for (o, r) in out.iter_mut().zip(row) {
            *o = o.max(r);
        }
    }
    Ok(out)
}

fn squared_norms(mesh: &SlabMesh, quad: &[(usize, [f64; 3], f64)], u: &[f64], v: &[f64]) -> [f64; 6] {
    let mut sq = [0.0; 6];
    for (cell, local, w) in quad {
        let (_, g) = slab_field(mesh, u, *cell, local);
        let (vel, _) = slab_field(mesh, v, *cell, local);
        let terms = [g[2][2], g[2][0] + g[0][2], g[2][1] + g[1][2], vel[0], vel[1], vel[2]];
        for (s, t) in sq.iter_mut().zip(terms) {
            *s += w * t * t;
        }
    }
    sq
}

/// Distances between a slab run and a plate run on the same time grid,
/// measured between `L(P u_n)` and `L p_n` with `P` the Kirchhoff-Love
/// projection and all norms `L²` over the slab.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct KlDistances {
    /// `max_n ‖L(P u_n) − L p_n‖`.
    pub sup: f64,
    /// `max_n ‖Σ_{k ≤ n} dt (L(P u_k) − L p_k)‖`, the distance of the time
    /// integrals. Weak-* convergence in time makes this quantity tend to
    /// zero, while the sup distance stays of the size of any jump whose
    /// timing differs between the two runs.
    pub integrated: f64,
}

pub fn kl_distances(projector: &KlProjector, slab: &Trajectory, plate: &Trajectory, dt: f64) -> KlDistances {
    let mut sup = 0.0f64;
    let mut integrated = 0.0f64;
    let mut sum: Option<Vec<f64>> = None;
    for (s, p) in slab.states.iter().zip(&plate.states) {
        let diff: Vec<f64> = projector.project(&s.u).iter().zip(&p.u).map(|(a, b)| a - b).collect();
        let zero = vec![0.0; diff.len()];
        sup = sup.max(projector.plate_l2_distance(&diff, &zero));
        let acc = sum.get_or_insert_with(|| zero.clone());
        acc.iter_mut().zip(&diff).for_each(|(a, d)| *a += dt * d);
        integrated = integrated.max(projector.plate_l2_distance(acc, &zero));
    }
    KlDistances { sup, integrated }
}

/// Relative dual norms of the undamped plate momentum residual along the
/// projected slab trajectory, with accelerations from second differences.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LimitResidual {
    /// `max_n ‖r_n‖_* / max_n ‖F_n‖_*`.
    pub sup: f64,
    /// `max_n ‖Σ_{k ≤ n} dt r_k‖_* / (T max_n ‖F_n‖_*)`.
    pub integrated: f64,
}

pub fn limit_residual(plate: &Problem, projector: &KlProjector, slab: &Trajectory, dt: f64) -> Result<LimitResidual, SimError> {
    let dual = DualNorm::new(&plate.forms)?;
    let p: Vec<Vec<f64>> = slab.states.iter().map(|s| projector.project(&s.u)).collect();
    let mut sup = 0.0f64;
    let mut integrated = 0.0f64;
    let mut load_scale = 0.0f64;
    let mut sum = vec![0.0; plate.forms.ndof];
    for n in 1..p.len().saturating_sub(1) {
        let s = &slab.states[n];
        let a: Vec<f64> = (0..p[n].len()).map(|i| (p[n + 1][i] - 2.0 * p[n][i] + p[n - 1][i]) / (dt * dt)).collect();
        let r = momentum_residual(plate, &plate.params, s.t, &p[n], &a, &s.z, 0.0);
        sup = sup.max(dual.norm(&r));
        sum.iter_mut().zip(&r).for_each(|(acc, ri)| *acc += dt * ri);
        integrated = integrated.max(dual.norm(&sum));
        load_scale = load_scale.max(dual.norm(&plate.loads.load(s.t)));
    }
    let horizon = dt * p.len().saturating_sub(1) as f64;
    if load_scale > 0.0 && horizon > 0.0 {
        Ok(LimitResidual { sup: sup / load_scale, integrated: integrated / (horizon * load_scale) })
    } else {
        Ok(LimitResidual { sup, integrated })
    }
}

// ---------------------------------------------------------------------------
// Undamped thickness limit

pub const DIMRED_UNDAMPED_COLUMNS: [&str; 11] = [
    "d3u3_over_eps2",
    "shear13_over_eps",
    "shear23_over_eps",
    "eps_v1",
    "eps_v2",
    "v3",
    "kl_distance",
    "kl_distance_sup",
    "limit_residual",
    "limit_residual_sup",
    "balance_rel",
];

/// Rescaled slab runs along the family with viscosity `eps^delta D*`,
/// compared with a direct run of the undamped plate limit.
///
/// `kl_distance` and `limit_residual` are the time-integrated measures of
/// [`KlDistances`] and [`LimitResidual`]; the `_sup` columns hold the
/// pointwise-in-time ones, whose monotonicity is reported but not required.
pub fn study_dimred_undamped(cfg: &RunConfig) -> Result<StudyReport, SimError> {
    let f = validate_undamped_family(cfg)?;
    let d_star = cfg.material.viscosity.tensor()?;
    let runs: Vec<(Problem, Trajectory)> = f
        .eps_list
        .par_iter()
        .map(|&eps| {
            let variant = ModelVariant::Rescaled3D { eps };
            let params = f.params_at(&cfg.params, eps);
            simulate(cfg, &spec(cfg, variant, params, d_star.scaled(eps.powf(f.delta)), eps)?)
        })
        .collect::<Result<_, _>>()?;
    let limit = simulate(cfg, &spec(cfg, ModelVariant::LimitUndamped, f.limit_params(&cfg.params), d_star, 1.0)?)?;
    let projector = projector_for(&runs[0].0, &limit.0)?;
    let dt = cfg.scheme.dt;

    let mut report = StudyReport::new("dimred_undamped", "eps", &DIMRED_UNDAMPED_COLUMNS);
    let mut table = Vec::new();
    let mut distances = Vec::new();
    let mut sup_distances = Vec::new();
    let mut residuals = Vec::new();
    for (&eps, (problem, traj)) in f.eps_list.iter().zip(&runs) {
        let diag = scaling_diagnostics(problem, traj, eps)?;
        let distance = kl_distances(&projector, traj, &limit.1, dt);
        let residual = limit_residual(&limit.0, &projector, traj, dt)?;
        let mut row: Vec<Option<f64>> = diag.iter().copied().map(Some).collect();
        row.extend([distance.integrated, distance.sup, residual.integrated, residual.sup, relative_balance(traj)].map(Some));
        report.push_row(eps, row);
        table.push(diag);
        distances.push(distance.integrated);
        sup_distances.push(distance.sup);
        residuals.push(residual.integrated);
    }
    if let Some(&last) = residuals.last() {
        report.push_scalar("limit_residual_smallest_eps", last);
    }
    for (k, name) in SCALING_COLUMNS.iter().enumerate() {
        let column: Vec<f64> = table.iter().map(|r| r[k]).collect();
        let bound = DIAGNOSTIC_GROWTH_LIMIT * column[0] + DIAGNOSTIC_FLOOR;
        report.push_check(&format!("{name}_bounded"), column.iter().all(|&v| v <= bound), list(&column));
    }
    report.push_check("kl_distance_non_increasing", non_increasing(&distances), list(&distances));
    report.push_note("kl_distance_sup_non_increasing", non_increasing(&sup_distances), list(&sup_distances));
    report.push_note("limit_residual_non_increasing", non_increasing(&residuals), list(&residuals));
    Ok(report)
}

fn projector_for(slab: &Problem, plate: &Problem) -> Result<KlProjector, SimError> {
    match (slab.geometry.slab(), plate.geometry.plate()) {
        (Some(s), Some(p)) => Ok(KlProjector::new(p, s)?),
        _ => Err(SimError::Hypothesis("projection needs a slab run and a plate run".into())),
    }
}

// ---------------------------------------------------------------------------
// Damped thickness limit

pub const DIMRED_DAMPED_COLUMNS: [&str; 5] =
    ["viscous_dissipation", "kl_distance", "kl_distance_sup", "balance_rel", "min_semistability_margin_rel"];

/// Smallest semistability margin over all states of a run, relative to its
/// energy scale, against `competitors` random competitors per state.
pub fn min_semistability_margin(problem: &Problem, trajectory: &Trajectory, competitors: usize, seed: u64) -> Result<f64, SimError> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let scale = trajectory.energy_scale();
    let mut worst = f64::INFINITY;
    for s in &trajectory.states {
        worst = worst.min(verify_semistability(&problem.forms, &problem.params, s, competitors, &mut rng)?);
    }
    Ok(if scale > 0.0 { worst / scale } else { worst })
}

/// Rescaled slab runs along the family with viscosity `D / eps`, compared
/// with a direct run of the damped plate limit. The limit run is repeated
/// with half the time step to measure the order of its balance residual.
pub fn study_dimred_damped(cfg: &RunConfig, seed: u64) -> Result<StudyReport, SimError> {
    let f = validate_damped_family(cfg)?;
    let d = cfg.material.viscosity.tensor()?;
    let competitors = cfg.scheme.competitor_count;
    let runs: Vec<((Problem, Trajectory), f64)> = f
        .eps_list
        .par_iter()
        .enumerate()
        .map(|(k, &eps)| {
            let variant = ModelVariant::Rescaled3D { eps };
            let params = f.params_at(&cfg.params, eps);
            let run = simulate(cfg, &spec(cfg, variant, params, d.scaled(1.0 / eps), eps)?)?;
            let margin = min_semistability_margin(&run.0, &run.1, competitors, seed.wrapping_add(k as u64 + 1))?;
            Ok((run, margin))
        })
        .collect::<Result<_, SimError>>()?;
    let limit_spec = spec(cfg, ModelVariant::LimitDamped, f.limit_params(&cfg.params), d, 1.0)?;
    let half = limit_spec.clone().with_dt(0.5 * cfg.scheme.dt);
    let (limit, limit_half) = rayon::join(|| simulate(cfg, &limit_spec), || simulate(cfg, &half));
    let (limit, limit_half) = (limit?, limit_half?);
    let projector = projector_for(&runs[0].0 .0, &limit.0)?;

    let mut report = StudyReport::new("dimred_damped", "eps", &DIMRED_DAMPED_COLUMNS);
    let mut distances = Vec::new();
    let mut sup_distances = Vec::new();
    let mut margins = Vec::new();
    for (&eps, ((_, traj), margin)) in f.eps_list.iter().zip(&runs) {
        let v_cum = traj.records.last().map_or(0.0, |r| r.viscous_cum);
        let distance = kl_distances(&projector, traj, &limit.1, cfg.scheme.dt);
        distances.push(distance.integrated);
        sup_distances.push(distance.sup);
        margins.push(*margin);
        report.push_row(
            eps,
            [v_cum, distance.integrated, distance.sup, relative_balance(traj), *margin].map(Some).to_vec(),
        );
    }

    let coarse = verify_energy_balance(&limit.1);
    let fine = verify_energy_balance(&limit_half.1);
    let ratio = if fine.max_abs > 0.0 { coarse.max_abs / fine.max_abs } else { f64::INFINITY };
    let limit_margin = min_semistability_margin(&limit.0, &limit.1, competitors, seed)?;
    margins.push(limit_margin);
    report.push_scalar("limit_balance_rel", relative_balance(&limit.1));
    report.push_scalar("limit_balance_rel_half_dt", relative_balance(&limit_half.1));
    report.push_scalar("limit_balance_ratio", ratio);
    report.push_scalar("limit_min_semistability_margin_rel", limit_margin);
    report.push_note(
        "limit_balance_within_tolerance",
        coarse.passed && !coarse.one_sided,
        format!("max residual {:.3e}, tolerance {:.1e} of scale {:.3e}", coarse.max_abs, BALANCE_TOLERANCE, coarse.scale),
    );
    report.push_check(
        "limit_balance_first_order",
        (FIRST_ORDER_RATIO.0..=FIRST_ORDER_RATIO.1).contains(&ratio),
        format!("residual ratio under dt halving {ratio:.3}"),
    );
    report.push_check(
        "semistability_all_steps",
        margins.iter().all(|&m| m >= -SEMISTABILITY_TOLERANCE),
        list(&margins),
    );
    report.push_check("kl_distance_non_increasing", non_increasing(&distances), list(&distances));
    report.push_note("kl_distance_sup_non_increasing", non_increasing(&sup_distances), list(&sup_distances));
    Ok(report)
}

// ---------------------------------------------------------------------------
// Decoupling

/// Frobenius norms of the adhesive interface form `κ Jᵀ diag(z A) J` of a
/// plate model.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CouplingNorms {
    /// Block coupling in-plane dofs with deflection dofs.
    pub cross: f64,
    pub total: f64,
}

/// Assembles the adhesive interface form of plate `forms` for adhesion `z`
/// and measures its coupling between the in-plane and deflection dofs.
pub fn decoupling_test(forms: &AssembledForms, params: &ModelParams, z: &AdhesionField) -> Result<CouplingNorms, SimError> {
    if !forms.variant.is_plate() {
        return Err(SimError::Hypothesis("the decoupling test needs plate forms".into()));
    }
    if z.len() != forms.n_cells() {
        return Err(SimError::Core(adhesive_plate_core::Error::GridMismatch(format!(
            "adhesion field has {} cells, interface has {}",
            z.len(),
            forms.n_cells()
        ))));
    }
    let jm = &forms.jump;
    let weights = forms.interface.jump_weights;
    let mut b = CooBuilder::new(forms.ndof, forms.ndof);
    for c in 0..z.len() {
        let cell_weight = params.kappa * z.values[c] * z.cell_areas[c];
        if cell_weight == 0.0 {
            continue;
        }
        for (i, w) in weights.iter().enumerate() {
            let row = 3 * c + i;
            for p in jm.row_ptr[row]..jm.row_ptr[row + 1] {
                for q in jm.row_ptr[row]..jm.row_ptr[row + 1] {
                    b.push(jm.col_idx[p], jm.col_idx[q], cell_weight * w * jm.values[p] * jm.values[q]);
                }
            }
        }
    }
    let form: CsrMatrix = b.build();
    let in_plane = |dof: usize| dof % PLATE_NODE_DOFS < 2;
    Ok(CouplingNorms {
        cross: form.block_norm(|i, j| in_plane(i) != in_plane(j)),
        total: form.block_norm(|_, _| true),
    })
}
