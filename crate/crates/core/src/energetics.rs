//! Scalar functionals of the adhesive-contact system: kinetic energy, viscous
//! and rate-independent dissipation, bulk and interface energies, and the
//! power of external loads.

use alloc::format;
use alloc::vec;
use alloc::vec::Vec;

use serde::{Deserialize, Serialize};

use crate::sparse::CsrMatrix;
use crate::tensor::{Strain3, SymTensor4};
use crate::{Error, Result};

/// Material and interface parameters shared by all model variants.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ModelParams {
    /// Adhesive stiffness.
    pub kappa: f64,
    /// Yosida parameter of the non-interpenetration penalty.
    pub lambda_yosida: f64,
    /// Adhesion energy gained per bonded area.
    pub a0: f64,
    /// Energy dissipated per debonded area.
    pub a1: f64,
    /// Perimeter coefficient; `b > 0` forces binary adhesion values.
    pub b: f64,
    /// Weight of the non-interpenetration penalty.
    pub nu: f64,
    /// Mass density.
    pub rho: f64,
    /// Unit normal of the interface, oriented from the plus to the minus side.
    pub n_interface: [f64; 3],
}

impl ModelParams {
    /// Checks every invariant and names the first offending field.
    pub fn validate(&self) -> Result<()> {
        let positive = [
            ("kappa", self.kappa),
            ("lambda_yosida", self.lambda_yosida),
            ("a0", self.a0),
            ("a1", self.a1),
            ("rho", self.rho),
        ];
        for (name, value) in positive {
            if !(value > 0.0) || !value.is_finite() {
                return Err(Error::Config(format!("{name} must be positive and finite, got {value}")));
            }
        }
        for (name, value) in [("b", self.b), ("nu", self.nu)] {
            if !(value >= 0.0) || !value.is_finite() {
                return Err(Error::Config(format!("{name} must be non-negative and finite, got {value}")));
            }
        }
        let n = self.n_interface;
        let len = libm::sqrt(n[0] * n[0] + n[1] * n[1] + n[2] * n[2]);
        if (len - 1.0).abs() > 1e-12 {
            return Err(Error::Config(format!("n_interface must be a unit vector, |n| = {len}")));
        }
        Ok(())
    }
}

/// Piecewise-constant adhesion values on the interface cell grid.
///
/// Cell `(j, k)` (along the interface line, through the thickness) is stored
/// at index `j * grid_dims.1 + k`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AdhesionField {
    pub values: Vec<f64>,
    pub cell_areas: Vec<f64>,
    pub grid_dims: (usize, usize),
    /// Cell edge lengths `(along the interface line, through the thickness)`.
    pub cell_size: (f64, f64),
}

impl AdhesionField {
    /// Uniform field on a `dims` grid of cells with the given edge lengths.
    pub fn uniform(value: f64, grid_dims: (usize, usize), cell_size: (f64, f64)) -> Self {
        let n = grid_dims.0 * grid_dims.1;
        AdhesionField {
            values: vec![value; n],
            cell_areas: vec![cell_size.0 * cell_size.1; n],
            grid_dims,
            cell_size,
        }
    }

    pub fn with_values(&self, values: Vec<f64>) -> Self {
        AdhesionField { values, ..self.clone() }
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn index(&self, j: usize, k: usize) -> usize {
        j * self.grid_dims.1 + k
    }

    pub fn is_binary(&self) -> bool {
        self.values.iter().all(|&z| z == 0.0 || z == 1.0)
    }

    /// Values in `[0, 1]`, and binary when `binary_required`.
    pub fn check_admissible(&self, binary_required: bool) -> Result<()> {
        if let Some((i, z)) = self.values.iter().enumerate().find(|(_, z)| !(**z >= 0.0 && **z <= 1.0)) {
            return Err(Error::Constraint(format!("adhesion value {z} at cell {i} outside [0, 1]")));
        }
        if binary_required && !self.is_binary() {
            return Err(Error::Constraint(
                "adhesion must be binary (0 or 1) when the perimeter coefficient b > 0".into(),
            ));
        }
        Ok(())
    }

    pub fn same_grid(&self, other: &AdhesionField) -> bool {
        self.grid_dims == other.grid_dims && self.cell_areas == other.cell_areas
    }

    /// `∫ z` over the interface.
    pub fn integral(&self) -> f64 {
        self.values.iter().zip(&self.cell_areas).map(|(z, a)| z * a).sum()
    }

    /// Interior grid edges as `(cell_a, cell_b, edge_length)`.
    pub fn edges(&self) -> Vec<(usize, usize, f64)> {
        let (nj, nk) = self.grid_dims;
        let mut out = Vec::new();
        for j in 0..nj {
            for k in 0..nk {
                if j + 1 < nj {
                    // Neighbours along the interface line share an edge running
                    // through the thickness.
                    out.push((self.index(j, k), self.index(j + 1, k), self.cell_size.1));
                }
                if k + 1 < nk {
                    out.push((self.index(j, k), self.index(j, k + 1), self.cell_size.0));
                }
            }
        }
        out
    }
}

/// Value of the rate-independent dissipation of an adhesion update.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum Dissipation {
    Finite(f64),
    /// Some cell increased its adhesion; the update is not admissible.
    Inadmissible,
}

impl Dissipation {
    pub fn finite(self) -> Option<f64> {
        match self {
            Dissipation::Finite(v) => Some(v),
            Dissipation::Inadmissible => None,
        }
    }
}

/// Yosida penalty of the half-space `{v · n ≥ 0}` and its gradient.
///
/// Returns `(alpha, alpha_hat)` with `alpha_hat = min(v·n, 0)² / lambda` and
/// `alpha = (2 / lambda) min(v·n, 0) n`.
pub fn yosida_pair(v: &[f64; 3], n: &[f64; 3], lambda: f64) -> ([f64; 3], f64) {
    let g = (v[0] * n[0] + v[1] * n[1] + v[2] * n[2]).min(0.0);
    let factor = 2.0 * g / lambda;
    ([factor * n[0], factor * n[1], factor * n[2]], g * g / lambda)
}

/// `½ vᵀ M v` with the assembled (component-weighted) mass matrix.
pub fn kinetic(mass: &CsrMatrix, velocity: &[f64]) -> f64 {
    0.5 * mass.quadratic(velocity)
}

/// `(eps_weight / 2) Σ_q w_q D e_q : e_q` over quadrature samples
/// `(w_q, e_q)` of the (rescaled) strain rate.
pub fn viscous_dissipation<'a>(
    d: &SymTensor4,
    strain_rate_samples: impl IntoIterator<Item = (f64, &'a Strain3)>,
    eps_weight: f64,
) -> f64 {
    let total: f64 = strain_rate_samples
        .into_iter()
        .map(|(w, e)| w * d.apply(e).ddot(e))
        .sum();
    0.5 * eps_weight * total
}

/// `a1 ∫ (z_old − z_new)` for a monotone update, `Inadmissible` otherwise.
pub fn dissipation_r(z_old: &AdhesionField, z_new: &AdhesionField, a1: f64) -> Result<Dissipation> {
    if !z_old.same_grid(z_new) {
        return Err(Error::GridMismatch("adhesion fields live on different grids".into()));
    }
    let mut total = 0.0;
    for ((old, new), area) in z_old.values.iter().zip(&z_new.values).zip(&z_old.cell_areas) {
        if new > old {
            return Ok(Dissipation::Inadmissible);
        }
        total += area * (old - new);
    }
    Ok(Dissipation::Finite(a1 * total))
}

/// Grid total variation `Σ_edges length · |z_a − z_b|`.
pub fn perimeter(z: &AdhesionField, binary_required: bool) -> Result<f64> {
    if binary_required && !z.is_binary() {
        return Err(Error::Constraint("perimeter requires binary adhesion values when b > 0".into()));
    }
    Ok(z.edges().iter().map(|&(a, b, len)| len * (z.values[a] - z.values[b]).abs()).sum())
}

/// How the interface terms read the displacement jump.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct InterfaceModel {
    /// Penalize only the in-plane part `(⟦u1⟧, ⟦u2⟧, 0)` of the jump.
    pub cone_in_plane: bool,
    /// Component weights of the adhesive quadratic `Σ_i w_i ⟦u_i⟧²`.
    pub jump_weights: [f64; 3],
}

impl InterfaceModel {
    /// Full jump in both terms (physical slab).
    pub const PHYSICAL: InterfaceModel = InterfaceModel { cone_in_plane: false, jump_weights: [1.0; 3] };
    /// In-plane cone argument, isotropic adhesive quadratic (rescaled slab and plate limits).
    pub const RESCALED: InterfaceModel = InterfaceModel { cone_in_plane: true, jump_weights: [1.0; 3] };

    /// Physical thin slab of thickness `eps` expressed on the reference
    /// interface, where the transverse jump enters with weight `eps²`.
    pub fn thin_physical(eps: f64) -> InterfaceModel {
        InterfaceModel { cone_in_plane: false, jump_weights: [1.0, 1.0, eps * eps] }
    }

    pub fn cone_argument(&self, jump: &[f64; 3]) -> [f64; 3] {
        if self.cone_in_plane {
            [jump[0], jump[1], 0.0]
        } else {
            *jump
        }
    }

    pub fn adhesive_quadratic(&self, jump: &[f64; 3]) -> f64 {
        (0..3).map(|i| self.jump_weights[i] * jump[i] * jump[i]).sum()
    }
}

/// Individual interface energy contributions.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct SurfaceTerms {
    /// `ν ∫ α̂_λ(cone argument)`.
    pub cone: f64,
    /// `(κ/2) ∫ z Q(⟦u⟧)`.
    pub adhesive: f64,
    /// `a0 ∫ z` (enters the energy with a minus sign).
    pub adhesion_gain: f64,
    /// `b · P(Z)`.
    pub perimeter: f64,
}

impl SurfaceTerms {
    pub fn total(&self) -> f64 {
        self.cone + self.adhesive - self.adhesion_gain + self.perimeter
    }

    pub fn magnitude(&self) -> f64 {
        self.cone.abs() + self.adhesive.abs() + self.adhesion_gain.abs() + self.perimeter.abs()
    }
}

/// Interface energy with midpoint quadrature per cell; `jumps[c]` is the
/// jump at the midpoint of cell `c`.
pub fn surface_terms(
    jumps: &[[f64; 3]],
    z: &AdhesionField,
    p: &ModelParams,
    model: &InterfaceModel,
) -> Result<SurfaceTerms> {
    if jumps.len() != z.len() {
        return Err(Error::GridMismatch(format!(
            "{} jump samples for {} adhesion cells",
            jumps.len(),
            z.len()
        )));
    }
    let binary = p.b > 0.0;
    z.check_admissible(binary)?;
    let mut terms = SurfaceTerms::default();
    for ((jump, &zc), &area) in jumps.iter().zip(&z.values).zip(&z.cell_areas) {
        if p.nu > 0.0 {
            let (_, hat) = yosida_pair(&model.cone_argument(jump), &p.n_interface, p.lambda_yosida);
            terms.cone += p.nu * area * hat;
        }
        terms.adhesive += 0.5 * p.kappa * area * zc * model.adhesive_quadratic(jump);
        terms.adhesion_gain += p.a0 * area * zc;
    }
    if binary {
        terms.perimeter = p.b * perimeter(z, true)?;
    }
    Ok(terms)
}

/// Total interface energy, see [`surface_terms`].
pub fn surface_energy(
    jumps: &[[f64; 3]],
    z: &AdhesionField,
    p: &ModelParams,
    model: &InterfaceModel,
) -> Result<f64> {
    Ok(surface_terms(jumps, z, p, model)?.total())
}

/// `½ uᵀ K u − F · u`.
pub fn bulk_energy(stiffness: &CsrMatrix, u: &[f64], load: &[f64]) -> f64 {
    0.5 * stiffness.quadratic(u) - dot(load, u)
}

pub fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

/// Polynomial time profile `Σ_k coeffs[k] t^k`.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct Profile {
    pub coeffs: Vec<f64>,
}

impl Profile {
    pub fn zero() -> Self {
        Profile { coeffs: Vec::new() }
    }

    pub fn new(coeffs: Vec<f64>) -> Self {
        Profile { coeffs }
    }

    /// Value of the `order`-th time derivative at `t`.
    pub fn derivative(&self, order: usize, t: f64) -> f64 {
        let mut s = 0.0;
        let mut power = 1.0;
        for k in order..self.coeffs.len() {
            let falling: f64 = (0..order).map(|m| (k - m) as f64).product();
            s += self.coeffs[k] * falling * power;
            power *= t;
        }
        s
    }

    pub fn value(&self, t: f64) -> f64 {
        self.derivative(0, t)
    }

    pub fn is_static(&self) -> bool {
        self.coeffs.iter().skip(1).all(|&c| c == 0.0)
    }
}

/// Assembled loading: a volume force `g(t) f` and a Dirichlet lift `s(t) W`.
///
/// The lift enters the homogeneous problem through
/// `F(t) = g f − s K W − s' C W − s'' M W`, precomputed here from the forms
/// of the active model variant.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LoadData {
    pub force: Vec<f64>,
    pub force_profile: Profile,
    pub lift: Vec<f64>,
    pub lift_profile: Profile,
    k_lift: Vec<f64>,
    c_lift: Vec<f64>,
    m_lift: Vec<f64>,
}

impl LoadData {
    pub fn new(
        force: Vec<f64>,
        force_profile: Profile,
        lift: Vec<f64>,
        lift_profile: Profile,
        mass: &CsrMatrix,
        stiffness: &CsrMatrix,
        damping: &CsrMatrix,
    ) -> Self {
        LoadData {
            k_lift: stiffness.mul_vec(&lift),
            c_lift: damping.mul_vec(&lift),
            m_lift: mass.mul_vec(&lift),
            force,
            force_profile,
            lift,
            lift_profile,
        }
    }

    /// No loading on a system with `ndof` unknowns.
    pub fn none(ndof: usize) -> Self {
        LoadData {
            force: vec![0.0; ndof],
            force_profile: Profile::zero(),
            lift: vec![0.0; ndof],
            lift_profile: Profile::zero(),
            k_lift: vec![0.0; ndof],
            c_lift: vec![0.0; ndof],
            m_lift: vec![0.0; ndof],
        }
    }

    /// `order`-th time derivative of `F(t)`.
    pub fn load_derivative(&self, order: usize, t: f64) -> Vec<f64> {
        self.load_derivative_with_damping(order, t, 1.0)
    }

    /// As [`load_derivative`](Self::load_derivative) with the viscous loading
    /// term scaled by `damping_factor`; `0` gives the loading of the
    /// undamped system with the same data.
    pub fn load_derivative_with_damping(&self, order: usize, t: f64, damping_factor: f64) -> Vec<f64> {
        let g = self.force_profile.derivative(order, t);
        let s0 = self.lift_profile.derivative(order, t);
        let s1 = self.lift_profile.derivative(order + 1, t) * damping_factor;
        let s2 = self.lift_profile.derivative(order + 2, t);
        (0..self.force.len())
            .map(|i| g * self.force[i] - s0 * self.k_lift[i] - s1 * self.c_lift[i] - s2 * self.m_lift[i])
            .collect()
    }

    pub fn load(&self, t: f64) -> Vec<f64> {
        self.load_derivative(0, t)
    }

    /// Dirichlet datum `s(t) W` and its first `order` derivatives.
    pub fn lift_at(&self, order: usize, t: f64) -> Vec<f64> {
        let s = self.lift_profile.derivative(order, t);
        self.lift.iter().map(|w| s * w).collect()
    }
}

/// Power of the loads `∂_t E(t, u, z) = −Ḟ(t) · u`.
pub fn power_of_loads(t: f64, u: &[f64], loads: &LoadData) -> f64 {
    -dot(&loads.load_derivative(1, t), u)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn params() -> ModelParams {
        ModelParams {
            kappa: 2.0,
            lambda_yosida: 0.5,
            a0: 1.0,
            a1: 1.0,
            b: 0.0,
            nu: 0.0,
            rho: 1.0,
            n_interface: [1.0, 0.0, 0.0],
        }
    }

    #[test]
    fn yosida_examples() {
        let n = [1.0, 0.0, 0.0];
        assert_eq!(yosida_pair(&[3.0, -1.0, 2.0], &n, 0.5), ([0.0; 3], 0.0));
        let (alpha, hat) = yosida_pair(&[-2.0, 1.0, 0.0], &n, 0.5);
        assert_eq!(hat, 8.0);
        assert_eq!(alpha, [-8.0, 0.0, 0.0]);
    }

    #[test]
    fn validation_names_field() {
        let mut p = params();
        p.kappa = 0.0;
        let msg = alloc::string::ToString::to_string(&p.validate().unwrap_err());
        assert!(msg.contains("kappa"));
        let mut p = params();
        p.n_interface = [1.0, 1.0, 0.0];
        assert!(p.validate().is_err());
        assert!(params().validate().is_ok());
    }

    #[test]
    fn dissipation_cases() {
        let z = AdhesionField::uniform(1.0, (2, 2), (0.5, 0.5));
        assert_eq!(dissipation_r(&z, &z, 2.0).unwrap(), Dissipation::Finite(0.0));
        let mut v = z.values.clone();
        v[1] = 0.0;
        assert_eq!(dissipation_r(&z, &z.with_values(v), 2.0).unwrap(), Dissipation::Finite(0.5));
        let low = AdhesionField::uniform(0.5, (2, 2), (0.5, 0.5));
        let mut v = low.values.clone();
        v[3] += 1e-9;
        assert_eq!(dissipation_r(&low, &low.with_values(v), 2.0).unwrap(), Dissipation::Inadmissible);
    }

    #[test]
    fn perimeter_examples() {
        let h = 0.25;
        let z = AdhesionField::uniform(1.0, (4, 4), (h, h));
        assert_eq!(perimeter(&z, true).unwrap(), 0.0);
        let mut block = vec![0.0; 16];
        for (j, k) in [(1, 1), (1, 2), (2, 1), (2, 2)] {
            block[z.index(j, k)] = 1.0;
        }
        assert!((perimeter(&z.with_values(block), true).unwrap() - 8.0 * h).abs() < 1e-15);
        let mut single = vec![0.0; 16];
        single[z.index(1, 2)] = 1.0;
        assert!((perimeter(&z.with_values(single), true).unwrap() - 4.0 * h).abs() < 1e-15);
        assert!(perimeter(&z.with_values(vec![0.5; 16]), true).is_err());
    }

    #[test]
    fn surface_energy_single_cell() {
        let z = AdhesionField::uniform(1.0, (1, 1), (1.0, 1.0));
        let e = surface_energy(&[[1.0, 1.0, 1.0]], &z, &params(), &InterfaceModel::PHYSICAL).unwrap();
        assert!((e - 2.0).abs() < 1e-15);
        let z0 = AdhesionField::uniform(0.0, (1, 1), (1.0, 1.0));
        let e0 = surface_energy(&[[0.5, 0.0, 0.0]], &z0, &params(), &InterfaceModel::PHYSICAL).unwrap();
        assert_eq!(e0, 0.0);
    }

    #[test]
    fn profile_derivatives() {
        let p = Profile::new(alloc::vec![1.0, 2.0, 3.0, 4.0]);
        let t = 0.5;
        assert!((p.value(t) - (1.0 + 1.0 + 0.75 + 0.5)).abs() < 1e-15);
        assert!((p.derivative(1, t) - (2.0 + 3.0 + 3.0)).abs() < 1e-15);
        assert!((p.derivative(2, t) - (6.0 + 12.0)).abs() < 1e-15);
        assert!((p.derivative(3, t) - 24.0).abs() < 1e-15);
        assert_eq!(p.derivative(4, t), 0.0);
        assert!(Profile::new(alloc::vec![3.0]).is_static());
    }
}
