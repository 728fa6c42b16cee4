//! Structured meshes of the cut slab `Ω \ Γ_C` and the cut plate `ω \ γ_C`.
//!
//! Both meshes cover `x1 ∈ (−1, 1)`, `x2 ∈ (0, 1)`; the slab adds the
//! thickness coordinate `x3 ∈ (−½, ½)`. The interface sits on the mesh plane
//! `x1 = 0` and its nodes are duplicated: the original sheet belongs to the
//! minus side `x1 < 0`, the copy to the plus side `x1 > 0`. Nodes are
//! numbered sheet by sheet in `x1`, with the copy sheet placed right after the
//! original so matrices keep a narrow band. The Dirichlet boundary is
//! `x1 = ±1`.

use alloc::format;
use alloc::vec::Vec;

use serde::{Deserialize, Serialize};

use crate::{Error, Result};

/// Domain extents shared by both meshes.
pub const X1_RANGE: (f64, f64) = (-1.0, 1.0);
pub const X2_RANGE: (f64, f64) = (0.0, 1.0);
pub const X3_RANGE: (f64, f64) = (-0.5, 0.5);

/// Index of the node sheet holding grid column `i` on side `plus`.
fn sheet_of(nx: usize, i: usize, plus: bool) -> usize {
    let half = nx / 2;
    if i < half || (i == half && !plus) {
        i
    } else {
        i + 1
    }
}

fn check_counts(nx: usize, others: &[(&str, usize)]) -> Result<()> {
    if nx < 2 || nx % 2 != 0 {
        return Err(Error::Config(format!("nx = {nx} must be even and at least 2")));
    }
    for &(name, n) in others {
        if n < 1 {
            return Err(Error::Config(format!("{name} = {n} must be at least 1")));
        }
    }
    Ok(())
}

/// Trilinear hexahedral mesh of the cut slab.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SlabMesh {
    pub nx: usize,
    pub ny: usize,
    pub nz: usize,
    pub nodes: Vec<[f64; 3]>,
    /// Corner nodes per cell, local index `ix + 2 iy + 4 iz`.
    pub cells: Vec<[usize; 8]>,
    /// Lower corner of each cell.
    pub cell_origin: Vec<[f64; 3]>,
    pub cell_size: [f64; 3],
    pub dirichlet_nodes: Vec<usize>,
    /// `(minus, plus)` node pairs on the interface, ordered by `(j, k)`.
    pub interface_pairs: Vec<(usize, usize)>,
}

impl SlabMesh {
    pub fn sheet_len(&self) -> usize {
        (self.ny + 1) * (self.nz + 1)
    }

    pub fn node_index(&self, i: usize, j: usize, k: usize, plus: bool) -> usize {
        sheet_of(self.nx, i, plus) * self.sheet_len() + j * (self.nz + 1) + k
    }

    pub fn ndof(&self) -> usize {
        3 * self.nodes.len()
    }

    pub fn cell_index(&self, i: usize, j: usize, k: usize) -> usize {
        (i * self.ny + j) * self.nz + k
    }

    pub fn cell_volume(&self) -> f64 {
        self.cell_size.iter().product()
    }

    /// Interface grid `(cells along x2, cells through x3)`.
    pub fn interface_dims(&self) -> (usize, usize) {
        (self.ny, self.nz)
    }

    /// Interface cell edge lengths `(along x2, through x3)`.
    pub fn interface_cell_size(&self) -> (f64, f64) {
        (self.cell_size[1], self.cell_size[2])
    }

    /// Midpoint `(x2, x3)` of interface cell `(j, k)`.
    pub fn interface_midpoint(&self, j: usize, k: usize) -> (f64, f64) {
        (
            X2_RANGE.0 + (j as f64 + 0.5) * self.cell_size[1],
            X3_RANGE.0 + (k as f64 + 0.5) * self.cell_size[2],
        )
    }

    /// Free-dof mask: every component of every Dirichlet node is pinned.
    pub fn free_mask(&self) -> Vec<bool> {
        let mut free = alloc::vec![true; self.ndof()];
        for &n in &self.dirichlet_nodes {
            for c in 0..3 {
                free[3 * n + c] = false;
            }
        }
        free
    }

    /// The cell containing a point strictly inside a cell, or on the given
    /// side of the interface when `x1 = 0`.
    pub fn locate(&self, x: &[f64; 3], plus_side: bool) -> Option<(usize, [f64; 3])> {
        let mut idx = [0usize; 3];
        let mut local = [0.0; 3];
        let lower = [X1_RANGE.0, X2_RANGE.0, X3_RANGE.0];
        let counts = [self.nx, self.ny, self.nz];
        for d in 0..3 {
            let s = (x[d] - lower[d]) / self.cell_size[d];
            if s < -1e-12 || s > counts[d] as f64 + 1e-12 {
                return None;
            }
            let mut c = libm::floor(s) as isize;
            if d == 0 && x[0].abs() < 1e-14 {
                c = if plus_side { (self.nx / 2) as isize } else { (self.nx / 2) as isize - 1 };
            }
            let c = c.clamp(0, counts[d] as isize - 1) as usize;
            idx[d] = c;
            local[d] = s - c as f64;
        }
        Some((self.cell_index(idx[0], idx[1], idx[2]), local))
    }
}

/// Builds the cut slab mesh with `nx × ny × nz` cells.
pub fn build_slab_mesh(nx: usize, ny: usize, nz: usize) -> Result<SlabMesh> {
    check_counts(nx, &[("ny", ny), ("nz", nz)])?;
    let h = [
        (X1_RANGE.1 - X1_RANGE.0) / nx as f64,
        (X2_RANGE.1 - X2_RANGE.0) / ny as f64,
        (X3_RANGE.1 - X3_RANGE.0) / nz as f64,
    ];
    let sheets = nx + 2;
    let sheet_len = (ny + 1) * (nz + 1);
    let mut nodes = Vec::with_capacity(sheets * sheet_len);
    for s in 0..sheets {
        let i = if s <= nx / 2 { s } else { s - 1 };
        for j in 0..=ny {
            for k in 0..=nz {
                nodes.push([
                    X1_RANGE.0 + i as f64 * h[0],
                    X2_RANGE.0 + j as f64 * h[1],
                    X3_RANGE.0 + k as f64 * h[2],
                ]);
            }
        }
    }
    let mut mesh = SlabMesh {
        nx,
        ny,
        nz,
        nodes,
        cells: Vec::with_capacity(nx * ny * nz),
        cell_origin: Vec::with_capacity(nx * ny * nz),
        cell_size: h,
        dirichlet_nodes: Vec::new(),
        interface_pairs: Vec::new(),
    };
    for i in 0..nx {
        // Cells left of the interface use the minus copy of column nx/2,
        // cells right of it the plus copy.
        let plus = i >= nx / 2;
        for j in 0..ny {
            for k in 0..nz {
                let mut corners = [0usize; 8];
                for (a, corner) in corners.iter_mut().enumerate() {
                    let (di, dj, dk) = (a & 1, (a >> 1) & 1, (a >> 2) & 1);
                    *corner = mesh.node_index(i + di, j + dj, k + dk, plus);
                }
                mesh.cells.push(corners);
                mesh.cell_origin.push([
                    X1_RANGE.0 + i as f64 * h[0],
                    X2_RANGE.0 + j as f64 * h[1],
                    X3_RANGE.0 + k as f64 * h[2],
                ]);
            }
        }
    }
    for j in 0..=ny {
        for k in 0..=nz {
            mesh.dirichlet_nodes.push(mesh.node_index(0, j, k, false));
            mesh.dirichlet_nodes.push(mesh.node_index(nx, j, k, true));
            mesh.interface_pairs.push((mesh.node_index(nx / 2, j, k, false), mesh.node_index(nx / 2, j, k, true)));
        }
    }
    mesh.dirichlet_nodes.sort_unstable();
    Ok(mesh)
}

/// Dofs per plate node: `(ū1, ū2, w, ∂1 w, ∂2 w, ∂12 w)`.
pub const PLATE_NODE_DOFS: usize = 6;

/// Rectangular plate mesh of the cut mid-surface with bilinear in-plane and
/// bicubic Hermite deflection fields sharing the nodes.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PlateMesh {
    pub nx: usize,
    pub ny: usize,
    pub nodes: Vec<[f64; 2]>,
    /// Corner nodes per cell, local index `ix + 2 iy`.
    pub cells: Vec<[usize; 4]>,
    pub cell_origin: Vec<[f64; 2]>,
    pub cell_size: [f64; 2],
    pub dirichlet_nodes: Vec<usize>,
    /// `(minus, plus)` node pairs on the interface line, ordered by `j`.
    pub interface_pairs: Vec<(usize, usize)>,
}

impl PlateMesh {
    pub fn node_index(&self, i: usize, j: usize, plus: bool) -> usize {
        sheet_of(self.nx, i, plus) * (self.ny + 1) + j
    }

    pub fn ndof(&self) -> usize {
        PLATE_NODE_DOFS * self.nodes.len()
    }

    pub fn cell_index(&self, i: usize, j: usize) -> usize {
        i * self.ny + j
    }

    /// Every dof of a Dirichlet node is pinned: a Kirchhoff-Love field that
    /// vanishes on the whole clamped face has zero deflection, zero slopes
    /// and zero in-plane displacement there.
    pub fn free_mask(&self) -> Vec<bool> {
        let mut free = alloc::vec![true; self.ndof()];
        for &n in &self.dirichlet_nodes {
            for c in 0..PLATE_NODE_DOFS {
                free[PLATE_NODE_DOFS * n + c] = false;
            }
        }
        free
    }
}

/// Builds the cut plate mesh with `nx × ny` cells.
pub fn build_plate_mesh(nx: usize, ny: usize) -> Result<PlateMesh> {
    check_counts(nx, &[("ny", ny)])?;
    let h = [(X1_RANGE.1 - X1_RANGE.0) / nx as f64, (X2_RANGE.1 - X2_RANGE.0) / ny as f64];
    let mut nodes = Vec::with_capacity((nx + 2) * (ny + 1));
    for s in 0..nx + 2 {
        let i = if s <= nx / 2 { s } else { s - 1 };
        for j in 0..=ny {
            nodes.push([X1_RANGE.0 + i as f64 * h[0], X2_RANGE.0 + j as f64 * h[1]]);
        }
    }
    let mut mesh = PlateMesh {
        nx,
        ny,
        nodes,
        cells: Vec::with_capacity(nx * ny),
        cell_origin: Vec::with_capacity(nx * ny),
        cell_size: h,
        dirichlet_nodes: Vec::new(),
        interface_pairs: Vec::new(),
    };
    for i in 0..nx {
        let plus = i >= nx / 2;
        for j in 0..ny {
            let mut corners = [0usize; 4];
            for (a, corner) in corners.iter_mut().enumerate() {
                *corner = mesh.node_index(i + (a & 1), j + (a >> 1), plus);
            }
            mesh.cells.push(corners);
            mesh.cell_origin.push([X1_RANGE.0 + i as f64 * h[0], X2_RANGE.0 + j as f64 * h[1]]);
        }
    }
    for j in 0..=ny {
        mesh.dirichlet_nodes.push(mesh.node_index(0, j, false));
        mesh.dirichlet_nodes.push(mesh.node_index(nx, j, true));
        mesh.interface_pairs.push((mesh.node_index(nx / 2, j, false), mesh.node_index(nx / 2, j, true)));
    }
    mesh.dirichlet_nodes.sort_unstable();
    Ok(mesh)
}
