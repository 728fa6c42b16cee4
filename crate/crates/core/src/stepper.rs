//! Staggered time stepping for the adhesive-contact system and a-posteriori
//! certification of the computed trajectories.
//!
//! A step updates the adhesion field by the exact semistable minimization
//! at the current jump, then advances displacement and velocity by the
//! Newmark scheme with the adhesion frozen, and finally updates the adhesion
//! again at the new jump. Every recorded state is therefore post-update: its
//! adhesion field is semistable at its own displacement, and the first
//! update of the next step leaves it unchanged. Whenever an update changes
//! `z`, the acceleration on the massive dofs is re-equilibrated so that the
//! momentum balance at that time holds with the new adhesion.
//!
//! With the trapezoidal rule the discrete energy identity is exact for the
//! quadratic parts of the energy; the residual of the energy-dissipation
//! balance comes from the adhesion updates, each of which can only lower
//! the total energy by at most one step's worth of adhesive drive.

use alloc::format;
use alloc::vec;
use alloc::vec::Vec;

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::assembly::{AssembledForms, ModelVariant};
use crate::energetics::{
    dissipation_r, dot, surface_terms, yosida_pair, AdhesionField, Dissipation, InterfaceModel,
    LoadData, ModelParams,
};
use crate::mincut::BinaryLabeling;
use crate::sparse::{BandedCholesky, CooBuilder, CsrMatrix, DofSubset};
use crate::{Error, Result};

/// Newmark parameters.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Newmark {
    pub beta: f64,
    pub gamma: f64,
}

impl Newmark {
    /// Trapezoidal rule, the only choice free of numerical dissipation.
    pub const AVERAGE_ACCELERATION: Newmark = Newmark { beta: 0.25, gamma: 0.5 };
}

impl Default for Newmark {
    fn default() -> Self {
        Newmark::AVERAGE_ACCELERATION
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SchemeConfig {
    pub dt: f64,
    pub t_final: f64,
    pub variant: ModelVariant,
    #[serde(default)]
    pub newmark: Newmark,
    /// Relative residual accepted by the nonlinear momentum solve.
    pub solver_tol: f64,
    /// Number of random competitors used by the semistability audit.
    pub competitor_count: usize,
    pub max_newton_iterations: usize,
}

impl SchemeConfig {
    pub fn new(dt: f64, t_final: f64, variant: ModelVariant) -> Self {
        SchemeConfig {
            dt,
            t_final,
            variant,
            newmark: Newmark::AVERAGE_ACCELERATION,
            solver_tol: 1e-10,
            competitor_count: 100,
            max_newton_iterations: 50,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.dt > 0.0) || !self.dt.is_finite() {
            return Err(Error::Config(format!("dt must be positive, got {}", self.dt)));
        }
        if !(self.t_final > 0.0) || !self.t_final.is_finite() {
            return Err(Error::Config(format!("t_final must be positive, got {}", self.t_final)));
        }
        if !(self.solver_tol > 0.0 && self.solver_tol < 1.0) {
            return Err(Error::Config(format!("solver_tol must lie in (0, 1), got {}", self.solver_tol)));
        }
        let Newmark { beta, gamma } = self.newmark;
        if !(beta > 0.0) || !(gamma >= 0.5) {
            return Err(Error::Config(format!("Newmark parameters beta = {beta}, gamma = {gamma} are not stable")));
        }
        if self.max_newton_iterations == 0 {
            return Err(Error::Config("max_newton_iterations must be at least 1".into()));
        }
        Ok(())
    }

    /// Number of steps covering `[0, t_final]`.
    pub fn n_steps(&self) -> usize {
        libm::round(self.t_final / self.dt) as usize
    }
}

/// Running tallies along a trajectory.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct Cumulative {
    /// `∫ 2V(u̇) dt`, the energy dissipated by viscosity.
    pub viscous_dissipated: f64,
    /// Total variation of the rate-independent dissipation, `a1 ∫ (z(0) − z(t))`.
    pub rate_independent_dissipated: f64,
    /// `∫ ∂_t E dt = −∫ Ḟ · u dt`.
    pub load_work: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SystemState {
    pub t: f64,
    pub u: Vec<f64>,
    pub v: Vec<f64>,
    /// Newmark acceleration; zero on dofs without mass.
    pub a: Vec<f64>,
    pub z: AdhesionField,
    pub cumulative: Cumulative,
}

/// Energies of one trajectory point; the trajectory CSV columns.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EnergyRecord {
    pub t: f64,
    pub kinetic: f64,
    pub viscous_cum: f64,
    pub rate_independent_cum: f64,
    pub bulk: f64,
    pub surface: f64,
    pub total: f64,
    pub power_cum: f64,
    pub balance_residual: f64,
}

impl EnergyRecord {
    /// `K + V + R + E − (E₀ + W)` for the initial mechanical energy
    /// `reference = K₀ + E₀`.
    pub fn residual_against(&self, reference: f64) -> f64 {
        self.kinetic + self.viscous_cum + self.rate_independent_cum + self.total - (reference + self.power_cum)
    }

    /// Size of the mechanical energy at this point, `K + |E_bulk| + |E_surf|`.
    pub fn magnitude(&self) -> f64 {
        self.kinetic + self.bulk.abs() + self.surface.abs()
    }
}

/// Peak of [`EnergyRecord::magnitude`] over a run; the reference scale of
/// every relative certification tolerance.
pub fn energy_scale(records: &[EnergyRecord]) -> f64 {
    records.iter().map(EnergyRecord::magnitude).fold(0.0, f64::max)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Trajectory {
    pub variant: ModelVariant,
    /// Only the one-sided energy inequality is expected (no viscosity).
    pub one_sided: bool,
    pub records: Vec<EnergyRecord>,
    pub states: Vec<SystemState>,
}

impl Trajectory {
    pub fn times(&self) -> Vec<f64> {
        self.records.iter().map(|r| r.t).collect()
    }

    pub fn energy_scale(&self) -> f64 {
        energy_scale(&self.records)
    }
}

// ---------------------------------------------------------------------------
// Adhesion update

/// Exact minimizer of
/// `z̃ ↦ (κ/2)∫z̃ Q(⟦u⟧) − a0∫z̃ + b P(z̃) + a1∫(z_prev − z̃)` over `z̃ ≤ z_prev`.
///
/// With `b = 0` the functional is cellwise affine and the threshold rule is
/// exact; with `b > 0` the binary problem is solved by a minimum cut.
/// Threshold ties keep `z_prev`.
pub fn semistable_update_z(
    z_prev: &AdhesionField,
    jumps: &[[f64; 3]],
    p: &ModelParams,
    model: &InterfaceModel,
) -> Result<AdhesionField> {
    if jumps.len() != z_prev.len() {
        return Err(Error::GridMismatch(format!(
            "{} jump samples for {} adhesion cells",
            jumps.len(),
            z_prev.len()
        )));
    }
    let binary = p.b > 0.0;
    z_prev.check_admissible(binary)?;
    let drive = |c: usize| 0.5 * p.kappa * model.adhesive_quadratic(&jumps[c]);
    if !binary {
        let values = (0..z_prev.len())
            .map(|c| if drive(c) > p.a0 + p.a1 { 0.0 } else { z_prev.values[c] })
            .collect();
        return Ok(z_prev.with_values(values));
    }

    // Cells already debonded are pinned to 0; only the others are labelled.
    let n = z_prev.len();
    let free: Vec<usize> = (0..n).filter(|&c| z_prev.values[c] != 0.0).collect();
    let mut local = vec![usize::MAX; n];
    for (k, &c) in free.iter().enumerate() {
        local[c] = k;
    }
    let mut problem = BinaryLabeling::new(free.len());
    for (k, &c) in free.iter().enumerate() {
        let area = z_prev.cell_areas[c];
        problem.add_unary(k, 1, area * (drive(c) - p.a0));
        problem.add_unary(k, 0, area * p.a1);
    }
    for (i, j, len) in z_prev.edges() {
        let w = p.b * len;
        match (local[i], local[j]) {
            (usize::MAX, usize::MAX) => {}
            (ki, usize::MAX) => problem.add_unary(ki, 1, w),
            (usize::MAX, kj) => problem.add_unary(kj, 1, w),
            (ki, kj) => problem.add_pair(ki, kj, w),
        }
    }
    let labels = problem.minimize();
    let mut values = vec![0.0; n];
    for (k, &c) in free.iter().enumerate() {
        values[c] = f64::from(labels[k]);
    }
    Ok(z_prev.with_values(values))
}

/// Semistable initial adhesion: one update of `z_candidate` at the jump of `u0`.
pub fn project_initial_z(
    forms: &AssembledForms,
    u0: &[f64],
    z_candidate: &AdhesionField,
    p: &ModelParams,
) -> Result<AdhesionField> {
    semistable_update_z(z_candidate, &forms.jumps(u0), p, &forms.interface)
}

// ---------------------------------------------------------------------------
// Interface forces

/// `ν P α_λ(P⟦u⟧)` per unit area, with `P` the cone-argument map.
fn cone_force(jump: &[f64; 3], p: &ModelParams, model: &InterfaceModel) -> [f64; 3] {
    if p.nu == 0.0 {
        return [0.0; 3];
    }
    let (alpha, _) = yosida_pair(&model.cone_argument(jump), &p.n_interface, p.lambda_yosida);
    let mut g = [p.nu * alpha[0], p.nu * alpha[1], p.nu * alpha[2]];
    if model.cone_in_plane {
        g[2] = 0.0;
    }
    g
}

fn cone_active(jump: &[f64; 3], p: &ModelParams, model: &InterfaceModel) -> bool {
    let arg = model.cone_argument(jump);
    p.nu > 0.0 && arg[0] * p.n_interface[0] + arg[1] * p.n_interface[1] + arg[2] * p.n_interface[2] < 0.0
}

/// Gradient of the interface energy with respect to the dofs.
pub fn interface_force(forms: &AssembledForms, p: &ModelParams, z: &AdhesionField, u: &[f64]) -> Vec<f64> {
    let model = &forms.interface;
    let jumps = forms.jumps(u);
    let mut traction = vec![0.0; 3 * jumps.len()];
    for (c, j) in jumps.iter().enumerate() {
        let area = z.cell_areas[c];
        let cone = cone_force(j, p, model);
        for i in 0..3 {
            traction[3 * c + i] = area * (p.kappa * z.values[c] * model.jump_weights[i] * j[i] + cone[i]);
        }
    }
    forms.jump.mul_transpose_vec(&traction)
}

/// `Jᵀ B J` for the linearized interface force with the given active cone cells.
fn interface_tangent(forms: &AssembledForms, p: &ModelParams, z: &AdhesionField, active: &[bool]) -> CsrMatrix {
    let model = &forms.interface;
    let jm = &forms.jump;
    let mut b = CooBuilder::new(forms.ndof, forms.ndof);
    let mut pn = p.n_interface;
    if model.cone_in_plane {
        pn[2] = 0.0;
    }
    for c in 0..z.len() {
        let area = z.cell_areas[c];
        let mut block = [[0.0; 3]; 3];
        for (i, row) in block.iter_mut().enumerate() {
            row[i] = area * p.kappa * z.values[c] * model.jump_weights[i];
        }
        if active[c] {
            let w = area * p.nu * 2.0 / p.lambda_yosida;
            for i in 0..3 {
                for k in 0..3 {
                    block[i][k] += w * pn[i] * pn[k];
                }
            }
        }
        for i in 0..3 {
            for k in 0..3 {
                if block[i][k] == 0.0 {
                    continue;
                }
                let (ri, rk) = (3 * c + i, 3 * c + k);
                for pi in jm.row_ptr[ri]..jm.row_ptr[ri + 1] {
                    for pk in jm.row_ptr[rk]..jm.row_ptr[rk + 1] {
                        b.push(jm.col_idx[pi], jm.col_idx[pk], jm.values[pi] * block[i][k] * jm.values[pk]);
                    }
                }
            }
        }
    }
    b.build()
}

// ---------------------------------------------------------------------------
// Simulator

#[derive(Debug, Clone, PartialEq)]
struct FactorKey {
    z: Vec<u64>,
    active: Vec<bool>,
}

const FACTOR_CACHE_SIZE: usize = 8;

/// Newmark coefficients for the displacement form of the scheme.
#[derive(Debug, Clone, Copy)]
struct Coefficients {
    c0: f64,
    c1: f64,
    c2: f64,
    c3: f64,
    c4: f64,
    c5: f64,
}

impl Coefficients {
    fn new(n: Newmark, dt: f64) -> Self {
        let Newmark { beta, gamma } = n;
        Coefficients {
            c0: 1.0 / (beta * dt * dt),
            c1: gamma / (beta * dt),
            c2: 1.0 / (beta * dt),
            c3: 1.0 / (2.0 * beta) - 1.0,
            c4: gamma / beta - 1.0,
            c5: dt * (gamma / (2.0 * beta) - 1.0),
        }
    }
}

/// Advances one discretized model in time.
///
/// Factorizations of the effective Newmark matrix are cached by adhesion
/// field and active cone set, which change only at a few steps of a run.
pub struct Simulator<'a> {
    pub forms: &'a AssembledForms,
    pub loads: &'a LoadData,
    pub params: ModelParams,
    pub config: SchemeConfig,
    free: DofSubset,
    coeffs: Coefficients,
    effective: CsrMatrix,
    cache: Vec<(FactorKey, BandedCholesky)>,
    /// Mass matrix factor on the free dofs that carry mass.
    massive: Option<(DofSubset, BandedCholesky)>,
    /// Damping matrix factor on the free dofs without mass but with damping.
    rate_rows: Option<(DofSubset, BandedCholesky)>,
}

impl<'a> Simulator<'a> {
    pub fn new(forms: &'a AssembledForms, loads: &'a LoadData, params: ModelParams, config: SchemeConfig) -> Result<Self> {
        params.validate()?;
        config.validate()?;
        if config.variant != forms.variant {
            return Err(Error::Config(format!(
                "scheme variant {:?} does not match assembled forms {:?}",
                config.variant, forms.variant
            )));
        }
        if loads.force.len() != forms.ndof {
            return Err(Error::GridMismatch(format!(
                "load vector has {} entries for {} dofs",
                loads.force.len(),
                forms.ndof
            )));
        }
        let coeffs = Coefficients::new(config.newmark, config.dt);
        let effective = CsrMatrix::linear_combination(&[
            (coeffs.c0, &forms.mass),
            (coeffs.c1, &forms.damping),
            (1.0, &forms.stiffness),
        ]);
        let massive = restricted_factor(&forms.mass, |i| forms.free[i] && forms.mass.get(i, i) > 0.0)?;
        let rate_rows = restricted_factor(&forms.damping, |i| {
            forms.free[i] && forms.mass.get(i, i) == 0.0 && forms.damping.get(i, i) > 0.0
        })?;
        Ok(Simulator {
            forms,
            loads,
            params,
            config,
            free: DofSubset::from_mask(&forms.free),
            coeffs,
            effective,
            cache: Vec::new(),
            massive,
            rate_rows,
        })
    }

    /// Jump samples of `u` at the interface cell midpoints.
    pub fn jumps(&self, u: &[f64]) -> Vec<[f64; 3]> {
        self.forms.jumps(u)
    }

    /// Initial state at `t = 0` with a semistable adhesion field and the
    /// acceleration obtained from the momentum balance on the massive dofs.
    pub fn initial_state(&self, u0: Vec<f64>, v0: Vec<f64>, z_candidate: &AdhesionField) -> Result<SystemState> {
        let n = self.forms.ndof;
        if u0.len() != n || v0.len() != n {
            return Err(Error::GridMismatch(format!("initial data must have {n} entries")));
        }
        if z_candidate.len() != self.forms.n_cells() {
            return Err(Error::GridMismatch(format!(
                "adhesion field has {} cells, interface has {}",
                z_candidate.len(),
                self.forms.n_cells()
            )));
        }
        let z = project_initial_z(self.forms, &u0, z_candidate, &self.params)?;
        let mut r = self.loads.load(0.0);
        self.forms.damping.mul_vec_add(-1.0, &v0, &mut r);
        self.forms.stiffness.mul_vec_add(-1.0, &u0, &mut r);
        let nforce = interface_force(self.forms, &self.params, &z, &u0);
        r.iter_mut().zip(&nforce).for_each(|(ri, ni)| *ri -= ni);

        let a = self.solve_mass(&r);
        Ok(SystemState { t: 0.0, u: u0, v: v0, a, z, cumulative: Cumulative::default() })
    }

    /// `M⁻¹ r` on the massive dofs, zero elsewhere.
    fn solve_mass(&self, r: &[f64]) -> Vec<f64> {
        match &self.massive {
            Some((subset, factor)) => subset.extend(&factor.solve(&subset.restrict(r))),
            None => vec![0.0; r.len()],
        }
    }

    /// Adhesion update at the displacement of `state`. On a change the
    /// dissipation is tallied and the momentum balance restored at fixed
    /// displacement: through the rate on damped dofs without mass, then
    /// through the acceleration on the massive dofs.
    fn update_adhesion(&self, state: &mut SystemState) -> Result<()> {
        let z = semistable_update_z(&state.z, &self.jumps(&state.u), &self.params, &self.forms.interface)?;
        if z == state.z {
            return Ok(());
        }
        match dissipation_r(&state.z, &z, self.params.a1)? {
            Dissipation::Finite(r) => state.cumulative.rate_independent_dissipated += r,
            Dissipation::Inadmissible => {
                return Err(Error::Constraint("adhesion update increased z".into()));
            }
        }
        let old = interface_force(self.forms, &self.params, &state.z, &state.u);
        let new = interface_force(self.forms, &self.params, &z, &state.u);
        let mut change: Vec<f64> = old.iter().zip(&new).map(|(o, n)| o - n).collect();
        if let Some((subset, factor)) = &self.rate_rows {
            let dv = subset.extend(&factor.solve(&subset.restrict(&change)));
            self.forms.damping.mul_vec_add(-1.0, &dv, &mut change);
            state.v.iter_mut().zip(&dv).for_each(|(v, d)| *v += d);
        }
        let correction = self.solve_mass(&change);
        state.a.iter_mut().zip(&correction).for_each(|(a, c)| *a += c);
        state.z = z;
        Ok(())
    }

    fn factor_for(&mut self, z: &AdhesionField, active: &[bool]) -> Result<usize> {
        let key = FactorKey { z: z.values.iter().map(|v| v.to_bits()).collect(), active: active.to_vec() };
        if let Some(pos) = self.cache.iter().position(|(k, _)| *k == key) {
            return Ok(pos);
        }
        let tangent = interface_tangent(self.forms, &self.params, z, active);
        let full = CsrMatrix::linear_combination(&[(1.0, &self.effective), (1.0, &tangent)]);
        let factor = BandedCholesky::factor(&self.free.restrict_matrix(&full))?;
        if self.cache.len() == FACTOR_CACHE_SIZE {
            self.cache.remove(0);
        }
        self.cache.push((key, factor));
        Ok(self.cache.len() - 1)
    }

    /// Newmark solve for `(u, v, a)` at `t + dt` with the adhesion frozen
    /// at `z`; the cone penalty is handled by semi-smooth Newton iteration
    /// on its active set.
    pub fn momentum_step(&mut self, state: &SystemState, z: &AdhesionField) -> Result<(Vec<f64>, Vec<f64>, Vec<f64>)> {
        let Coefficients { c0, c1, c2, c3, c4, c5 } = self.coeffs;
        let dt = self.config.dt;
        let n = self.forms.ndof;
        let t1 = next_time(state.t, dt);
        let mut rhs = self.loads.load(t1);
        let inertia: Vec<f64> = (0..n).map(|i| c0 * state.u[i] + c2 * state.v[i] + c3 * state.a[i]).collect();
        let viscous: Vec<f64> = (0..n).map(|i| c1 * state.u[i] + c4 * state.v[i] + c5 * state.a[i]).collect();
        self.forms.mass.mul_vec_add(1.0, &inertia, &mut rhs);
        self.forms.damping.mul_vec_add(1.0, &viscous, &mut rhs);
        let rhs_free = self.free.restrict(&rhs);
        let rhs_norm = norm(&rhs_free);

        let model = self.forms.interface;
        let mut active: Vec<bool> =
            self.jumps(&state.u).iter().map(|j| cone_active(j, &self.params, &model)).collect();
        let mut last_residual = f64::INFINITY;
        for _ in 0..self.config.max_newton_iterations {
            let slot = self.factor_for(z, &active)?;
            let u = self.free.extend(&self.cache[slot].1.solve(&rhs_free));
            let next: Vec<bool> = self.jumps(&u).iter().map(|j| cone_active(j, &self.params, &model)).collect();
            let mut residual = self.effective.mul_vec(&u);
            let nforce = interface_force(self.forms, &self.params, z, &u);
            for i in 0..n {
                residual[i] += nforce[i] - rhs[i];
            }
            let r = norm(&self.free.restrict(&residual));
            let reference = rhs_norm.max(norm(&self.free.restrict(&self.effective.mul_vec(&u))));
            last_residual = if reference > 0.0 { r / reference } else { r };
            // The residual uses the exact interface force, so a small one
            // certifies the step even if the active set still flips for
            // cells sitting on the cone boundary.
            if last_residual <= self.config.solver_tol {
                let a: Vec<f64> = (0..n).map(|i| c0 * (u[i] - state.u[i]) - c2 * state.v[i] - c3 * state.a[i]).collect();
                let gamma = self.config.newmark.gamma;
                let v: Vec<f64> = (0..n).map(|i| state.v[i] + dt * ((1.0 - gamma) * state.a[i] + gamma * a[i])).collect();
                return Ok((u, v, a));
            }
            active = next;
        }
        Err(Error::NonConvergence { iterations: self.config.max_newton_iterations, residual: last_residual })
    }

    /// One staggered step from `state`, see the module documentation.
    pub fn step(&mut self, state: &SystemState) -> Result<SystemState> {
        let mut current = state.clone();
        self.update_adhesion(&mut current)?;
        let (u, v, a) = self.momentum_step(&current, &current.z)?;
        let dt = self.config.dt;
        let mut cumulative = current.cumulative;
        let vbar: Vec<f64> = v.iter().zip(&current.v).map(|(a, b)| 0.5 * (a + b)).collect();
        cumulative.viscous_dissipated += dt * self.forms.damping.quadratic(&vbar);
        cumulative.load_work += load_work_increment(self.loads, current.t, dt, &current.u, &u);
        let t = next_time(current.t, dt);
        let mut next = SystemState { t, u, v, a, z: current.z, cumulative };
        self.update_adhesion(&mut next)?;
        Ok(next)
    }

    /// Energies of `state` without the balance residual.
    pub fn energies(&self, state: &SystemState) -> Result<EnergyRecord> {
        let kinetic = 0.5 * self.forms.mass.quadratic(&state.v);
        let load = self.loads.load(state.t);
        let bulk = 0.5 * self.forms.stiffness.quadratic(&state.u) - dot(&load, &state.u);
        let surface = surface_terms(&self.jumps(&state.u), &state.z, &self.params, &self.forms.interface)?.total();
        Ok(EnergyRecord {
            t: state.t,
            kinetic,
            viscous_cum: state.cumulative.viscous_dissipated,
            rate_independent_cum: state.cumulative.rate_independent_dissipated,
            bulk,
            surface,
            total: bulk + surface,
            power_cum: state.cumulative.load_work,
            balance_residual: 0.0,
        })
    }

    /// Runs `config.n_steps()` steps from `initial`.
    pub fn run(&mut self, initial: SystemState) -> Result<Trajectory> {
        let steps = self.config.n_steps();
        let first = self.energies(&initial)?;
        let reference = first.kinetic + first.total;
        let mut records = vec![first];
        let mut states = Vec::with_capacity(steps + 1);
        states.push(initial);
        for _ in 0..steps {
            let next = self.step(states.last().expect("initial state present"))?;
            let mut rec = self.energies(&next)?;
            rec.balance_residual = rec.residual_against(reference);
            records.push(rec);
            states.push(next);
        }
        Ok(Trajectory {
            variant: self.config.variant,
            one_sided: !self.forms.is_damped() || self.config.variant == ModelVariant::LimitUndamped,
            records,
            states,
        })
    }
}

/// The grid time after `t`, computed from the step index so that long runs
/// do not accumulate rounding in the time variable.
pub fn next_time(t: f64, dt: f64) -> f64 {
    (libm::round(t / dt) + 1.0) * dt
}

/// Factor of `a` restricted to the dofs selected by `keep`, if any.
fn restricted_factor(a: &CsrMatrix, keep: impl Fn(usize) -> bool) -> Result<Option<(DofSubset, BandedCholesky)>> {
    let mask: Vec<bool> = (0..a.rows).map(keep).collect();
    let subset = DofSubset::from_mask(&mask);
    if subset.is_empty() {
        return Ok(None);
    }
    let factor = BandedCholesky::factor(&subset.restrict_matrix(a))?;
    Ok(Some((subset, factor)))
}

fn norm(x: &[f64]) -> f64 {
    libm::sqrt(dot(x, x))
}

/// Work of the loads over one step, `−(F(t + dt) − F(t)) · ū` with `ū`
/// the mean of the end-point displacements. This is the quadrature of
/// `−∫ Ḟ · u` that matches the trapezoidal energy identity.
pub fn load_work_increment(loads: &LoadData, t: f64, dt: f64, u0: &[f64], u1: &[f64]) -> f64 {
    let f0 = loads.load(t);
    let f1 = loads.load(next_time(t, dt));
    -(0..u0.len()).map(|i| (f1[i] - f0[i]) * 0.5 * (u0[i] + u1[i])).sum::<f64>()
}

// ---------------------------------------------------------------------------
// Certification

/// Relative tolerance of the one-sided check for runs without viscosity.
pub const ONE_SIDED_TOLERANCE: f64 = 1e-6;
/// Default relative tolerance of the two-sided balance check.
pub const BALANCE_TOLERANCE: f64 = 1e-3;
/// Relative tolerance of the semistability audit.
pub const SEMISTABILITY_TOLERANCE: f64 = 1e-9;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BalanceCheck {
    pub residuals: Vec<f64>,
    pub max_abs: f64,
    /// Largest positive residual; the only one-sided violation.
    pub max_excess: f64,
    pub scale: f64,
    pub one_sided: bool,
    pub tolerance: f64,
    pub passed: bool,
}

/// Checks the discrete energy-dissipation balance of recorded energies.
///
/// Two-sided runs pass when `max |residual| ≤ tolerance · scale`; one-sided
/// runs when every residual is `≤ tolerance · scale`.
pub fn check_balance(records: &[EnergyRecord], one_sided: bool, tolerance: f64) -> BalanceCheck {
    // Recomputed from the energy columns, so a tampered or inconsistent
    // trajectory file cannot certify itself through its residual column.
    let reference = records.first().map_or(0.0, |r| r.kinetic + r.total);
    let residuals: Vec<f64> = records.iter().map(|r| r.residual_against(reference)).collect();
    let max_abs = residuals.iter().map(|r| r.abs()).fold(0.0, f64::max);
    let max_excess = residuals.iter().copied().fold(0.0, f64::max);
    let scale = energy_scale(records);
    let bound = tolerance * scale;
    let passed = if one_sided { max_excess <= bound } else { max_abs <= bound };
    BalanceCheck { residuals, max_abs, max_excess, scale, one_sided, tolerance, passed }
}

/// [`check_balance`] with the default tolerance for the trajectory's kind.
pub fn verify_energy_balance(trajectory: &Trajectory) -> BalanceCheck {
    let tol = if trajectory.one_sided { ONE_SIDED_TOLERANCE } else { BALANCE_TOLERANCE };
    check_balance(&trajectory.records, trajectory.one_sided, tol)
}

/// `[E(t,u,z̃) + R(z̃ − z)] − E(t,u,z)` for one competitor `z̃ ≤ z`; the bulk
/// part of the energy cancels.
pub fn semistability_margin(
    forms: &AssembledForms,
    p: &ModelParams,
    u: &[f64],
    z: &AdhesionField,
    competitor: &AdhesionField,
) -> Result<f64> {
    let jumps = forms.jumps(u);
    let r = match dissipation_r(z, competitor, p.a1)? {
        Dissipation::Finite(r) => r,
        Dissipation::Inadmissible => {
            return Err(Error::Constraint("competitor exceeds the current adhesion".into()));
        }
    };
    let before = surface_terms(&jumps, z, p, &forms.interface)?.total();
    let after = surface_terms(&jumps, competitor, p, &forms.interface)?.total();
    Ok(after + r - before)
}

/// Minimum semistability margin of `state` over random admissible
/// competitors and the exact minimizer.
///
/// Competitors debond random subsets of the bonded cells, with the subset
/// density itself random; when `b = 0` every other competitor instead
/// reduces a random subset by random fractions.
pub fn verify_semistability<R: Rng + ?Sized>(
    forms: &AssembledForms,
    p: &ModelParams,
    state: &SystemState,
    n_competitors: usize,
    rng: &mut R,
) -> Result<f64> {
    let z = &state.z;
    let bonded: Vec<usize> = (0..z.len()).filter(|&c| z.values[c] > 0.0).collect();
    if bonded.is_empty() {
        return Ok(0.0);
    }
    let exact = semistable_update_z(z, &forms.jumps(&state.u), p, &forms.interface)?;
    let mut margin = semistability_margin(forms, p, &state.u, z, &exact)?;
    for k in 0..n_competitors {
        let density: f64 = rng.random();
        let fractional = p.b == 0.0 && k % 2 == 1;
        let mut values = z.values.clone();
        for &c in &bonded {
            if rng.random::<f64>() < density {
                values[c] = if fractional { z.values[c] * (1.0 - rng.random::<f64>()) } else { 0.0 };
            }
        }
        margin = margin.min(semistability_margin(forms, p, &state.u, z, &z.with_values(values))?);
    }
    Ok(margin)
}

/// Number of cellwise violations along `states` of `0 ≤ z ≤ 1` and of
/// `z(t_{n+1}) ≤ z(t_n)`.
pub fn adhesion_violations(states: &[SystemState]) -> usize {
    let bounds: usize = states
        .iter()
        .map(|s| s.z.values.iter().filter(|&&v| !(0.0..=1.0).contains(&v)).count())
        .sum();
    let growth: usize = states
        .windows(2)
        .map(|w| w[0].z.values.iter().zip(&w[1].z.values).filter(|(old, new)| new > old).count())
        .sum();
    bounds + growth
}
