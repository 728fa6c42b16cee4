//! Finite-element bases, assembled bilinear forms and interface jump maps.
//!
//! The meshes are uniform, so every element shares one reference element
//! matrix; assembly scatters that matrix through the cell connectivity.

use alloc::vec;
use alloc::vec::Vec;

use serde::{Deserialize, Serialize};

use crate::energetics::InterfaceModel;
use crate::mesh::{PlateMesh, SlabMesh, PLATE_NODE_DOFS, X3_RANGE};
use crate::quadrature::{GAUSS2, GAUSS4};
use crate::sparse::{CooBuilder, CsrMatrix};
use crate::tensor::{
    planar_restriction, reduced_tensor, rescale_strain_unchecked, ReducedTensor, Strain2, Strain3,
    SymTensor4,
};
use crate::{Error, Result};

/// Which system the forms discretize.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", tag = "kind")]
pub enum ModelVariant {
    /// Physical slab with the symmetrized gradient.
    Physical3D,
    /// Slab in rescaled coordinates with thickness parameter `eps`.
    Rescaled3D { eps: f64 },
    /// Kirchhoff-Love limit without viscosity.
    LimitUndamped,
    /// Kirchhoff-Love limit with reduced viscosity.
    LimitDamped,
}

impl ModelVariant {
    pub fn eps(&self) -> f64 {
        match self {
            ModelVariant::Rescaled3D { eps } => *eps,
            _ => 1.0,
        }
    }

    pub fn is_plate(&self) -> bool {
        matches!(self, ModelVariant::LimitUndamped | ModelVariant::LimitDamped)
    }

    pub fn interface_model(&self) -> InterfaceModel {
        match self {
            ModelVariant::Physical3D => InterfaceModel::PHYSICAL,
            _ => InterfaceModel::RESCALED,
        }
    }
}

/// Matrices and interface maps of one discretized model.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AssembledForms {
    pub variant: ModelVariant,
    pub ndof: usize,
    pub mass: CsrMatrix,
    pub stiffness: CsrMatrix,
    pub damping: CsrMatrix,
    /// Rows `3c..3c+3` give the jump at the midpoint of interface cell `c`.
    pub jump: CsrMatrix,
    pub interface_dims: (usize, usize),
    pub interface_cell_size: (f64, f64),
    /// Thickness coordinate of each interface cell midpoint.
    pub interface_x3: Vec<f64>,
    pub free: Vec<bool>,
    pub interface: InterfaceModel,
}

impl AssembledForms {
    pub fn n_cells(&self) -> usize {
        self.interface_dims.0 * self.interface_dims.1
    }

    pub fn cell_area(&self) -> f64 {
        self.interface_cell_size.0 * self.interface_cell_size.1
    }

    /// Jump samples `⟦u⟧` per interface cell.
    pub fn jumps(&self, u: &[f64]) -> Vec<[f64; 3]> {
        let flat = self.jump.mul_vec(u);
        flat.chunks_exact(3).map(|c| [c[0], c[1], c[2]]).collect()
    }

    pub fn is_damped(&self) -> bool {
        self.damping.values.iter().any(|&v| v != 0.0)
    }
}

// ---------------------------------------------------------------------------
// Reference bases

/// Trilinear shape values and local-coordinate gradients at `s ∈ [0,1]³`.
pub fn hex_shape(s: &[f64; 3]) -> ([f64; 8], [[f64; 3]; 8]) {
    let mut n = [0.0; 8];
    let mut dn = [[0.0; 3]; 8];
    for a in 0..8 {
        let bits = [a & 1, (a >> 1) & 1, (a >> 2) & 1];
        let f: [f64; 3] = core::array::from_fn(|d| if bits[d] == 1 { s[d] } else { 1.0 - s[d] });
        let df: [f64; 3] = core::array::from_fn(|d| if bits[d] == 1 { 1.0 } else { -1.0 });
        n[a] = f[0] * f[1] * f[2];
        dn[a] = [df[0] * f[1] * f[2], f[0] * df[1] * f[2], f[0] * f[1] * df[2]];
    }
    (n, dn)
}

/// Bilinear shape values and local gradients at `s ∈ [0,1]²`.
pub fn quad_shape(s: &[f64; 2]) -> ([f64; 4], [[f64; 2]; 4]) {
    let mut n = [0.0; 4];
    let mut dn = [[0.0; 2]; 4];
    for a in 0..4 {
        let bits = [a & 1, (a >> 1) & 1];
        let f: [f64; 2] = core::array::from_fn(|d| if bits[d] == 1 { s[d] } else { 1.0 - s[d] });
        let df: [f64; 2] = core::array::from_fn(|d| if bits[d] == 1 { 1.0 } else { -1.0 });
        n[a] = f[0] * f[1];
        dn[a] = [df[0] * f[1], f[0] * df[1]];
    }
    (n, dn)
}

/// Cubic Hermite basis on an interval of length `h`, at local `s ∈ [0,1]`.
///
/// Entry `[node][kind]` with `kind = 0` for the value function and `1` for
/// the slope function, each as `(value, d/dx, d²/dx²)` in physical units.
pub fn hermite_1d(s: f64, h: f64) -> [[[f64; 3]; 2]; 2] {
    let (s2, s3) = (s * s, s * s * s);
    [
        [
            [1.0 - 3.0 * s2 + 2.0 * s3, (-6.0 * s + 6.0 * s2) / h, (-6.0 + 12.0 * s) / (h * h)],
            [h * (s - 2.0 * s2 + s3), 1.0 - 4.0 * s + 3.0 * s2, (-4.0 + 6.0 * s) / h],
        ],
        [
            [3.0 * s2 - 2.0 * s3, (6.0 * s - 6.0 * s2) / h, (6.0 - 12.0 * s) / (h * h)],
            [h * (-s2 + s3), -2.0 * s + 3.0 * s2, (-2.0 + 6.0 * s) / h],
        ],
    ]
}

/// Bogner-Fox-Schmit basis of one rectangle at local `s ∈ [0,1]²`.
///
/// Function `4 a + k` belongs to corner `a = ix + 2 iy` and dof kind
/// `k ∈ {w, ∂1 w, ∂2 w, ∂12 w}`. Each entry is `(value, gradient, Hessian)`.
pub fn bfs_shape(s: &[f64; 2], h: &[f64; 2]) -> [(f64, [f64; 2], [[f64; 2]; 2]); 16] {
    let hx = hermite_1d(s[0], h[0]);
    let hy = hermite_1d(s[1], h[1]);
    let mut out = [(0.0, [0.0; 2], [[0.0; 2]; 2]); 16];
    for a in 0..4 {
        let (ix, iy) = (a & 1, a >> 1);
        for k in 0..4 {
            let (kx, ky) = (k & 1, k >> 1);
            let fx = hx[ix][kx];
            let fy = hy[iy][ky];
            out[4 * a + k] = (
                fx[0] * fy[0],
                [fx[1] * fy[0], fx[0] * fy[1]],
                [[fx[2] * fy[0], fx[1] * fy[1]], [fx[1] * fy[1], fx[0] * fy[2]]],
            );
        }
    }
    out
}

/// Mandel vector of `Λ_eps(sym(e_i ⊗ g))`, the rescaled strain of a scalar
/// shape function with physical gradient `g` in displacement component `i`.
fn unit_strain(i: usize, g: &[f64; 3], eps: f64) -> [f64; 6] {
    let mut m = [[0.0; 3]; 3];
    m[i] = *g;
    rescale_strain_unchecked(&Strain3::sym(&m), eps).mandel()
}

fn mandel_form(t: &SymTensor4) -> [[f64; 6]; 6] {
    t.mandel()
}

fn quad6(a: &[f64; 6], m: &[[f64; 6]; 6], b: &[f64; 6]) -> f64 {
    let mut s = 0.0;
    for p in 0..6 {
        if a[p] == 0.0 {
            continue;
        }
        for q in 0..6 {
            s += a[p] * m[p][q] * b[q];
        }
    }
    s
}

/// Gauss points on the reference hexahedron as `(local, weight)`.
fn hex_points() -> Vec<([f64; 3], f64)> {
    let mut pts = Vec::with_capacity(8);
    for &(x, wx) in &GAUSS2 {
        for &(y, wy) in &GAUSS2 {
            for &(z, wz) in &GAUSS2 {
                pts.push(([x, y, z], wx * wy * wz));
            }
        }
    }
    pts
}

fn rect_points_4() -> Vec<([f64; 2], f64)> {
    let mut pts = Vec::with_capacity(16);
    for &(x, wx) in &GAUSS4 {
        for &(y, wy) in &GAUSS4 {
            pts.push(([x, y], wx * wy));
        }
    }
    pts
}

/// Element matrix of `∫ T Λ_eps e(u) : Λ_eps e(v)` on one slab cell, local
/// dof `3 a + i`.
pub fn slab_element_form(t: &SymTensor4, cell_size: &[f64; 3], eps: f64) -> Vec<f64> {
    let tm = mandel_form(t);
    let vol: f64 = cell_size.iter().product();
    let mut ke = vec![0.0; 24 * 24];
    for (s, w) in hex_points() {
        let (_, dn) = hex_shape(&s);
        let strains: Vec<[f64; 6]> = (0..24)
            .map(|p| {
                let (a, i) = (p / 3, p % 3);
                let g = [dn[a][0] / cell_size[0], dn[a][1] / cell_size[1], dn[a][2] / cell_size[2]];
                unit_strain(i, &g, eps)
            })
            .collect();
        for p in 0..24 {
            for q in 0..24 {
                ke[p * 24 + q] += w * vol * quad6(&strains[p], &tm, &strains[q]);
            }
        }
    }
    ke
}

/// Element mass matrix with component weights, local dof `3 a + i`.
pub fn slab_element_mass(rho: f64, weights: &[f64; 3], cell_size: &[f64; 3]) -> Vec<f64> {
    let vol: f64 = cell_size.iter().product();
    let mut me = vec![0.0; 24 * 24];
    for (s, w) in hex_points() {
        let (n, _) = hex_shape(&s);
        for a in 0..8 {
            for b in 0..8 {
                for i in 0..3 {
                    me[(3 * a + i) * 24 + 3 * b + i] += w * vol * rho * weights[i] * n[a] * n[b];
                }
            }
        }
    }
    me
}

fn scatter_slab(mesh: &SlabMesh, ke: &[f64]) -> CsrMatrix {
    let mut b = CooBuilder::new(mesh.ndof(), mesh.ndof());
    for cell in &mesh.cells {
        for p in 0..24 {
            let gp = 3 * cell[p / 3] + p % 3;
            for q in 0..24 {
                let gq = 3 * cell[q / 3] + q % 3;
                b.push(gp, gq, ke[p * 24 + q]);
            }
        }
    }
    b.build()
}

/// Jump map of the slab: `⟦u⟧ = u₊ − u₋` averaged over the four corners of
/// each interface face, i.e. the bilinear trace at the face midpoint.
pub fn slab_jump_operator(mesh: &SlabMesh) -> CsrMatrix {
    let (ny, nz) = mesh.interface_dims();
    let mut b = CooBuilder::new(3 * ny * nz, mesh.ndof());
    let half = mesh.nx / 2;
    for j in 0..ny {
        for k in 0..nz {
            let c = j * nz + k;
            for (dj, dk) in [(0, 0), (1, 0), (0, 1), (1, 1)] {
                let minus = mesh.node_index(half, j + dj, k + dk, false);
                let plus = mesh.node_index(half, j + dj, k + dk, true);
                for i in 0..3 {
                    b.push(3 * c + i, 3 * plus + i, 0.25);
                    b.push(3 * c + i, 3 * minus + i, -0.25);
                }
            }
        }
    }
    b.build()
}

/// Assembles the slab forms for [`ModelVariant::Physical3D`] or
/// [`ModelVariant::Rescaled3D`].
///
/// The damping matrix is `damping_weight · ∫ D Λ_eps e(u) : Λ_eps e(v)`; the
/// rescaled system uses `damping_weight = eps` with `d` the rescaled
/// viscosity.
pub fn assemble_slab_forms(
    mesh: &SlabMesh,
    c: &SymTensor4,
    d: &SymTensor4,
    rho: f64,
    damping_weight: f64,
    variant: ModelVariant,
) -> Result<AssembledForms> {
    let eps = match variant {
        ModelVariant::Physical3D => 1.0,
        ModelVariant::Rescaled3D { eps } if eps > 0.0 => eps,
        ModelVariant::Rescaled3D { eps } => {
            return Err(Error::Domain(alloc::format!("thickness parameter eps = {eps} must be positive")))
        }
        _ => return Err(Error::Domain("plate variants need a plate mesh".into())),
    };
    let c = c.validated()?;
    let d = d.validated()?;
    let weights = [eps * eps, eps * eps, 1.0];
    let stiffness = scatter_slab(mesh, &slab_element_form(&c, &mesh.cell_size, eps));
    let damping = if damping_weight == 0.0 {
        CsrMatrix::zeros(mesh.ndof(), mesh.ndof())
    } else {
        let mut de = slab_element_form(&d, &mesh.cell_size, eps);
        de.iter_mut().for_each(|v| *v *= damping_weight);
        scatter_slab(mesh, &de)
    };
    let mass = scatter_slab(mesh, &slab_element_mass(rho, &weights, &mesh.cell_size));
    let (ny, nz) = mesh.interface_dims();
    let interface_x3 = (0..ny * nz).map(|c| mesh.interface_midpoint(c / nz, c % nz).1).collect();
    Ok(AssembledForms {
        variant,
        ndof: mesh.ndof(),
        mass,
        stiffness,
        damping,
        jump: slab_jump_operator(mesh),
        interface_dims: (ny, nz),
        interface_cell_size: mesh.interface_cell_size(),
        interface_x3,
        free: mesh.free_mask(),
        interface: variant.interface_model(),
    })
}

/// `∫ ∇u_i · ∇v_i` for one displacement component of the slab.
pub fn slab_component_gradient_form(mesh: &SlabMesh, component: usize) -> CsrMatrix {
    let vol = mesh.cell_volume();
    let h = mesh.cell_size;
    let mut ke = vec![0.0; 24 * 24];
    for (s, w) in hex_points() {
        let (_, dn) = hex_shape(&s);
        for a in 0..8 {
            for b in 0..8 {
                let g: f64 = (0..3).map(|d| dn[a][d] * dn[b][d] / (h[d] * h[d])).sum();
                ke[(3 * a + component) * 24 + 3 * b + component] += w * vol * g;
            }
        }
    }
    scatter_slab(mesh, &ke)
}

/// Displacement and gradient `G_ij = ∂_j u_i` of a slab field inside `cell`.
pub fn slab_field(mesh: &SlabMesh, u: &[f64], cell: usize, local: &[f64; 3]) -> ([f64; 3], [[f64; 3]; 3]) {
    let (n, dn) = hex_shape(local);
    let mut val = [0.0; 3];
    let mut grad = [[0.0; 3]; 3];
    for (a, &node) in mesh.cells[cell].iter().enumerate() {
        for i in 0..3 {
            let ua = u[3 * node + i];
            val[i] += n[a] * ua;
            for d in 0..3 {
                grad[i][d] += dn[a][d] / mesh.cell_size[d] * ua;
            }
        }
    }
    (val, grad)
}

/// Physical position of a local point of a slab cell.
pub fn slab_point(mesh: &SlabMesh, cell: usize, local: &[f64; 3]) -> [f64; 3] {
    let o = mesh.cell_origin[cell];
    core::array::from_fn(|d| o[d] + local[d] * mesh.cell_size[d])
}

/// Quadrature points of the slab as `(cell, local, weight × volume)`.
pub fn slab_quadrature(mesh: &SlabMesh) -> Vec<(usize, [f64; 3], f64)> {
    let vol = mesh.cell_volume();
    let pts = hex_points();
    let mut out = Vec::with_capacity(mesh.cells.len() * pts.len());
    for cell in 0..mesh.cells.len() {
        for (s, w) in &pts {
            out.push((cell, *s, w * vol));
        }
    }
    out
}

/// Nodal interpolant of a vector field on the slab.
pub fn slab_interpolant(mesh: &SlabMesh, f: impl Fn(&[f64; 3]) -> [f64; 3]) -> Vec<f64> {
    let mut u = vec![0.0; mesh.ndof()];
    for (n, x) in mesh.nodes.iter().enumerate() {
        let v = f(x);
        u[3 * n..3 * n + 3].copy_from_slice(&v);
    }
    u
}

/// Consistent load vector `∫ f · v` of a spatially uniform volume force.
pub fn slab_uniform_force(mesh: &SlabMesh, f: &[f64; 3]) -> Vec<f64> {
    let mut out = vec![0.0; mesh.ndof()];
    let share = mesh.cell_volume() / 8.0;
    for cell in &mesh.cells {
        for &node in cell {
            for i in 0..3 {
                out[3 * node + i] += share * f[i];
            }
        }
    }
    out
}

// ---------------------------------------------------------------------------
// Plate

/// Element matrix on one plate cell, local dof `6 a + k`:
/// `∫ R e(ū) : e(v̄) + (1/12) ∫ R ∇²w : ∇²v` (the thickness integral of the
/// Kirchhoff-Love strain over `(−½, ½)`).
pub fn plate_element_form(r: &ReducedTensor, cell_size: &[f64; 2]) -> Vec<f64> {
    const N: usize = 4 * PLATE_NODE_DOFS;
    let area = cell_size[0] * cell_size[1];
    let mut ke = vec![0.0; N * N];
    for (s, w) in rect_points_4() {
        let (_, dn) = quad_shape(&s);
        let bfs = bfs_shape(&s, cell_size);
        let mut strains: [Strain2; N] = [Strain2::ZERO; N];
        for a in 0..4 {
            let g = [dn[a][0] / cell_size[0], dn[a][1] / cell_size[1]];
            strains[PLATE_NODE_DOFS * a] = Strain2::new(g[0], 0.0, 0.5 * g[1]);
            strains[PLATE_NODE_DOFS * a + 1] = Strain2::new(0.0, g[1], 0.5 * g[0]);
        }
        let mut curvatures: [Strain2; N] = [Strain2::ZERO; N];
        for a in 0..4 {
            for k in 0..4 {
                let hess = bfs[4 * a + k].2;
                curvatures[PLATE_NODE_DOFS * a + 2 + k] = Strain2 { m: hess };
            }
        }
        for p in 0..N {
            let rp = r.apply(&strains[p]);
            let rc = r.apply(&curvatures[p]);
            for q in 0..N {
                let v = rp.ddot(&strains[q]) + rc.ddot(&curvatures[q]) / 12.0;
                ke[p * N + q] += w * area * v;
            }
        }
    }
    ke
}

/// Element mass `ρ ∫ w v` on the deflection dofs only.
pub fn plate_element_mass(rho: f64, cell_size: &[f64; 2]) -> Vec<f64> {
    const N: usize = 4 * PLATE_NODE_DOFS;
    let area = cell_size[0] * cell_size[1];
    let mut me = vec![0.0; N * N];
    for (s, w) in rect_points_4() {
        let bfs = bfs_shape(&s, cell_size);
        for a in 0..4 {
            for k in 0..4 {
                for b in 0..4 {
                    for l in 0..4 {
                        let p = PLATE_NODE_DOFS * a + 2 + k;
                        let q = PLATE_NODE_DOFS * b + 2 + l;
                        me[p * N + q] += w * area * rho * bfs[4 * a + k].0 * bfs[4 * b + l].0;
                    }
                }
            }
        }
    }
    me
}

fn scatter_plate(mesh: &PlateMesh, ke: &[f64]) -> CsrMatrix {
    const N: usize = 4 * PLATE_NODE_DOFS;
    let mut b = CooBuilder::new(mesh.ndof(), mesh.ndof());
    for cell in &mesh.cells {
        for p in 0..N {
            let gp = PLATE_NODE_DOFS * cell[p / PLATE_NODE_DOFS] + p % PLATE_NODE_DOFS;
            for q in 0..N {
                let gq = PLATE_NODE_DOFS * cell[q / PLATE_NODE_DOFS] + q % PLATE_NODE_DOFS;
                b.push(gp, gq, ke[p * N + q]);
            }
        }
    }
    b.build()
}

/// Jump map of the plate model on an `ny × nz` interface grid:
/// `⟦u⟧ = (⟦ū1⟧ − x3 ⟦∂1 w⟧, ⟦ū2⟧ − x3 ⟦∂2 w⟧, ⟦w⟧)` at cell midpoints.
pub fn plate_jump_operator(mesh: &PlateMesh, nz: usize) -> CsrMatrix {
    let ny = mesh.ny;
    let hy = mesh.cell_size[1];
    let hz = (X3_RANGE.1 - X3_RANGE.0) / nz as f64;
    let herm = hermite_1d(0.5, hy);
    let half = mesh.nx / 2;
    let mut b = CooBuilder::new(3 * ny * nz, mesh.ndof());
    for j in 0..ny {
        for k in 0..nz {
            let c = j * nz + k;
            let x3 = X3_RANGE.0 + (k as f64 + 0.5) * hz;
            for (side, sign) in [(true, 1.0), (false, -1.0)] {
                for e in 0..2 {
                    let node = mesh.node_index(half, j + e, side);
                    let base = PLATE_NODE_DOFS * node;
                    let lin = 0.5;
                    let value_w = herm[e][0][0];
                    let value_slope = herm[e][1][0];
                    // In-plane components: membrane part.
                    b.push(3 * c, base, sign * lin);
                    b.push(3 * c + 1, base + 1, sign * lin);
                    // −x3 ∂1 w along the edge, Hermite in x2 from (∂1 w, ∂12 w).
                    b.push(3 * c, base + 3, -sign * x3 * value_w);
                    b.push(3 * c, base + 5, -sign * x3 * value_slope);
                    // −x3 ∂2 w: derivative along the edge of the Hermite trace.
                    b.push(3 * c + 1, base + 2, -sign * x3 * herm[e][0][1]);
                    b.push(3 * c + 1, base + 4, -sign * x3 * herm[e][1][1]);
                    // Deflection trace from (w, ∂2 w).
                    b.push(3 * c + 2, base + 2, sign * value_w);
                    b.push(3 * c + 2, base + 4, sign * value_slope);
                }
            }
        }
    }
    b.build()
}

/// Assembles the plate forms for [`ModelVariant::LimitUndamped`] or
/// [`ModelVariant::LimitDamped`] on an interface grid with `nz` cells
/// through the thickness.
///
/// The elastic form uses the reduced tensor of `c`; the damped limit uses
/// the planar restriction of `d` as reduced viscosity.
pub fn assemble_plate_forms(
    mesh: &PlateMesh,
    nz: usize,
    c: &SymTensor4,
    d: &SymTensor4,
    rho: f64,
    variant: ModelVariant,
) -> Result<AssembledForms> {
    if !variant.is_plate() {
        return Err(Error::Domain("slab variants need a slab mesh".into()));
    }
    if nz == 0 {
        return Err(Error::Config("nz must be at least 1".into()));
    }
    let c = c.validated()?;
    let reduced_c = reduced_tensor(&c)?;
    let stiffness = scatter_plate(mesh, &plate_element_form(&reduced_c, &mesh.cell_size));
    let damping = match variant {
        ModelVariant::LimitDamped => {
            let d = d.validated()?;
            scatter_plate(mesh, &plate_element_form(&planar_restriction(&d), &mesh.cell_size))
        }
        _ => CsrMatrix::zeros(mesh.ndof(), mesh.ndof()),
    };
    let mass = scatter_plate(mesh, &plate_element_mass(rho, &mesh.cell_size));
    let hz = (X3_RANGE.1 - X3_RANGE.0) / nz as f64;
    let interface_x3 = (0..mesh.ny * nz)
        .map(|c| X3_RANGE.0 + ((c % nz) as f64 + 0.5) * hz)
        .collect();
    Ok(AssembledForms {
        variant,
        ndof: mesh.ndof(),
        mass,
        stiffness,
        damping,
        jump: plate_jump_operator(mesh, nz),
        interface_dims: (mesh.ny, nz),
        interface_cell_size: (mesh.cell_size[1], hz),
        interface_x3,
        free: mesh.free_mask(),
        interface: variant.interface_model(),
    })
}

/// Consistent load of a uniform volume force on the plate: the thickness
/// average of `f · (ū − x3 ∇w, w)` leaves `∫ f_α ū_α + f3 w`.
pub fn plate_uniform_force(mesh: &PlateMesh, f: &[f64; 3]) -> Vec<f64> {
    const N: usize = 4 * PLATE_NODE_DOFS;
    let area = mesh.cell_size[0] * mesh.cell_size[1];
    let mut fe = [0.0; N];
    for (s, w) in rect_points_4() {
        let (n, _) = quad_shape(&s);
        let bfs = bfs_shape(&s, &mesh.cell_size);
        for a in 0..4 {
            fe[PLATE_NODE_DOFS * a] += w * area * f[0] * n[a];
            fe[PLATE_NODE_DOFS * a + 1] += w * area * f[1] * n[a];
            for k in 0..4 {
                fe[PLATE_NODE_DOFS * a + 2 + k] += w * area * f[2] * bfs[4 * a + k].0;
            }
        }
    }
    let mut out = vec![0.0; mesh.ndof()];
    for cell in &mesh.cells {
        for p in 0..N {
            out[PLATE_NODE_DOFS * cell[p / PLATE_NODE_DOFS] + p % PLATE_NODE_DOFS] += fe[p];
        }
    }
    out
}

/// Plate dofs of an in-plane field `ū` (bilinear nodal interpolant) with
/// zero deflection.
pub fn plate_inplane_interpolant(mesh: &PlateMesh, f: impl Fn(&[f64; 2]) -> [f64; 2]) -> Vec<f64> {
    let mut u = vec![0.0; mesh.ndof()];
    for (n, x) in mesh.nodes.iter().enumerate() {
        let v = f(x);
        u[PLATE_NODE_DOFS * n] = v[0];
        u[PLATE_NODE_DOFS * n + 1] = v[1];
    }
    u
}

/// Evaluates the plate fields inside `cell` at local `s`: returns
/// `(ū, ∇ū, w, ∇w, ∇²w)`.
#[allow(clippy::type_complexity)]
pub fn plate_field(
    mesh: &PlateMesh,
    p: &[f64],
    cell: usize,
    s: &[f64; 2],
) -> ([f64; 2], [[f64; 2]; 2], f64, [f64; 2], [[f64; 2]; 2]) {
    let (n, dn) = quad_shape(s);
    let bfs = bfs_shape(s, &mesh.cell_size);
    let mut ubar = [0.0; 2];
    let mut gbar = [[0.0; 2]; 2];
    let mut w = 0.0;
    let mut gw = [0.0; 2];
    let mut hw = [[0.0; 2]; 2];
    for (a, &node) in mesh.cells[cell].iter().enumerate() {
        let base = PLATE_NODE_DOFS * node;
        for i in 0..2 {
            ubar[i] += n[a] * p[base + i];
            for d in 0..2 {
                gbar[i][d] += dn[a][d] / mesh.cell_size[d] * p[base + i];
            }
        }
        for k in 0..4 {
            let (v, g, h) = bfs[4 * a + k];
            let coef = p[base + 2 + k];
            w += v * coef;
            for d in 0..2 {
                gw[d] += g[d] * coef;
                for e in 0..2 {
                    hw[d][e] += h[d][e] * coef;
                }
            }
        }
    }
    (ubar, gbar, w, gw, hw)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mesh::{build_plate_mesh, build_slab_mesh};
    use crate::tensor::make_isotropic;

    #[test]
    fn hermite_basis_interpolates_nodal_data() {
        let h = 0.7;
        let at0 = hermite_1d(0.0, h);
        let at1 = hermite_1d(1.0, h);
        assert_eq!(at0[0][0][0], 1.0);
        assert_eq!(at0[0][1][1], 1.0);
        assert_eq!(at1[1][0][0], 1.0);
        assert!((at1[1][1][1] - 1.0).abs() < 1e-15);
        assert!(at0[1][0][0].abs() < 1e-15 && at1[0][0][0].abs() < 1e-15);
    }

    #[test]
    fn slab_matrices_are_symmetric() {
        let mesh = build_slab_mesh(2, 2, 2).unwrap();
        let c = make_isotropic(1.0, 1.0).unwrap();
        for variant in [ModelVariant::Physical3D, ModelVariant::Rescaled3D { eps: 0.3 }] {
            let f = assemble_slab_forms(&mesh, &c, &c, 1.0, 0.5, variant).unwrap();
            assert!(f.stiffness.asymmetry() < 1e-12);
            assert!(f.damping.asymmetry() < 1e-12);
            assert!(f.mass.asymmetry() < 1e-12);
        }
    }

    #[test]
    fn jump_of_continuous_and_shifted_fields() {
        let mesh = build_slab_mesh(4, 2, 2).unwrap();
        let jump = slab_jump_operator(&mesh);
        let cont = slab_interpolant(&mesh, |x| [x[0] + x[1], x[2] * x[1], 1.0]);
        assert!(jump.mul_vec(&cont).iter().all(|v| v.abs() < 1e-15));
        let shifted = slab_interpolant(&mesh, |x| if x[0] > 0.0 { [1.0, 0.0, 0.0] } else { [0.0; 3] });
        let mut u = shifted;
        for &(_, plus) in &mesh.interface_pairs {
            u[3 * plus] = 1.0;
        }
        for c in jump.mul_vec(&u).chunks(3) {
            assert!((c[0] - 1.0).abs() < 1e-15 && c[1] == 0.0 && c[2] == 0.0);
        }
    }

    #[test]
    fn plate_variants_reject_slab_meshes() {
        let mesh = build_slab_mesh(2, 1, 1).unwrap();
        let c = make_isotropic(1.0, 1.0).unwrap();
        assert!(assemble_slab_forms(&mesh, &c, &c, 1.0, 1.0, ModelVariant::LimitDamped).is_err());
        let plate = build_plate_mesh(2, 1).unwrap();
        assert!(assemble_plate_forms(&plate, 2, &c, &c, 1.0, ModelVariant::Physical3D).is_err());
    }
}
