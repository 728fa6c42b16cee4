//! Turns a configuration into assembled forms, loads and an initial state.

use adhesive_plate_core::assembly::{
    assemble_plate_forms, assemble_slab_forms, plate_inplane_interpolant, plate_uniform_force,
    slab_interpolant, slab_uniform_force, AssembledForms, ModelVariant,
};
use adhesive_plate_core::energetics::{AdhesionField, LoadData, ModelParams};
use adhesive_plate_core::mesh::{build_plate_mesh, build_slab_mesh, PlateMesh, SlabMesh, PLATE_NODE_DOFS};
use adhesive_plate_core::stepper::{SchemeConfig, Simulator, Trajectory};
use adhesive_plate_core::tensor::SymTensor4;

use crate::config::{LoadsConfig, RunConfig};
use crate::error::SimError;

#[derive(Debug, Clone)]
pub enum Geometry {
    Slab(SlabMesh),
    /// Plate mesh and the number of interface cells through the thickness.
    Plate(PlateMesh, usize),
}

impl Geometry {
    pub fn slab(&self) -> Option<&SlabMesh> {
        match self {
            Geometry::Slab(m) => Some(m),
            Geometry::Plate(..) => None,
        }
    }

    pub fn plate(&self) -> Option<&PlateMesh> {
        match self {
            Geometry::Plate(m, _) => Some(m),
            Geometry::Slab(_) => None,
        }
    }
}

/// Everything that distinguishes one run of a study from another.
#[derive(Debug, Clone)]
pub struct RunSpec {
    pub variant: ModelVariant,
    pub params: ModelParams,
    pub elasticity: SymTensor4,
    /// Viscosity tensor entering the damping form.
    pub viscosity: SymTensor4,
    /// Factor in front of the damping form (`eps` for the rescaled slab).
    pub damping_weight: f64,
    pub scheme: SchemeConfig,
}

impl RunSpec {
    /// The run described by the configuration alone. The rescaled slab
    /// uses the configured viscosity as its thickness-dependent tensor.
    pub fn from_config(cfg: &RunConfig) -> Result<Self, SimError> {
        let variant = cfg.scheme.variant()?;
        Ok(RunSpec {
            variant,
            params: cfg.params,
            elasticity: cfg.material.elasticity.tensor()?,
            viscosity: cfg.material.viscosity.tensor()?,
            damping_weight: variant.eps(),
            scheme: cfg.scheme.scheme(variant),
        })
    }

    pub fn with_dt(mut self, dt: f64) -> Self {
        self.scheme.dt = dt;
        self
    }
}

/// An assembled run ready to be simulated.
#[derive(Debug, Clone)]
pub struct Problem {
    pub geometry: Geometry,
    pub forms: AssembledForms,
    pub loads: LoadData,
    pub params: ModelParams,
    pub scheme: SchemeConfig,
    pub z0: AdhesionField,
}

/// Mid-surface data of the Dirichlet lift at `(x1, x2)`: the in-plane
/// displacement `ū1`, the deflection `w` and its slope `∂1 w`.
pub fn pull_midsurface(loads: &LoadsConfig, x1: f64, x2: f64) -> (f64, f64, f64) {
    let a = loads.pull_amplitude;
    let h = loads.pull_rotation;
    (a * 0.5 * x1 * (1.0 + loads.pull_gradient * (x2 - 0.5)), a * h * 0.5 * x1 * x1, a * h * x1)
}

/// The Dirichlet lift `W(x) = (ū1 − x3 ∂1 w, 0, w)`.
pub fn pull_field(loads: &LoadsConfig, x: &[f64; 3]) -> [f64; 3] {
    let (u1, w, slope) = pull_midsurface(loads, x[0], x[1]);
    [u1 - x[2] * slope, 0.0, w]
}

fn plate_pull(plate: &PlateMesh, loads: &LoadsConfig) -> Vec<f64> {
    let mut lift = plate_inplane_interpolant(plate, |x| [pull_midsurface(loads, x[0], x[1]).0, 0.0]);
    for (n, x) in plate.nodes.iter().enumerate() {
        let (_, w, slope) = pull_midsurface(loads, x[0], x[1]);
        lift[PLATE_NODE_DOFS * n + 2] = w;
        lift[PLATE_NODE_DOFS * n + 3] = slope;
    }
    lift
}

impl Problem {
    pub fn build(cfg: &RunConfig, spec: &RunSpec) -> Result<Self, SimError> {
        let m = cfg.mesh;
        let l = &cfg.loads;
        let (geometry, forms, force, lift) = if spec.variant.is_plate() {
            let plate = build_plate_mesh(m.nx, m.ny)?;
            let forms =
                assemble_plate_forms(&plate, m.nz, &spec.elasticity, &spec.viscosity, spec.params.rho, spec.variant)?;
            let force = plate_uniform_force(&plate, &l.force);
            let lift = plate_pull(&plate, l);
            (Geometry::Plate(plate, m.nz), forms, force, lift)
        } else {
            let slab = build_slab_mesh(m.nx, m.ny, m.nz)?;
            let forms = assemble_slab_forms(
                &slab,
                &spec.elasticity,
                &spec.viscosity,
                spec.params.rho,
                spec.damping_weight,
                spec.variant,
            )?;
            let force = slab_uniform_force(&slab, &l.force);
            let lift = slab_interpolant(&slab, |x| pull_field(l, x));
            (Geometry::Slab(slab), forms, force, lift)
        };
        let loads = LoadData::new(
            force,
            l.force_profile(),
            lift,
            l.pull_profile(),
            &forms.mass,
            &forms.stiffness,
            &forms.damping,
        );
        let (ny, nz) = forms.interface_dims;
        let z0 = AdhesionField::uniform(1.0, (ny, nz), forms.interface_cell_size);
        Ok(Problem { geometry, forms, loads, params: spec.params, scheme: spec.scheme, z0 })
    }

    pub fn simulator(&self) -> Result<Simulator<'_>, SimError> {
        Ok(Simulator::new(&self.forms, &self.loads, self.params, self.scheme)?)
    }

    /// Runs from rest with a fully bonded interface.
    pub fn run(&self) -> Result<Trajectory, SimError> {
        let mut sim = self.simulator()?;
        let n = self.forms.ndof;
        let initial = sim.initial_state(vec![0.0; n], vec![0.0; n], &self.z0)?;
        Ok(sim.run(initial)?)
    }
}
