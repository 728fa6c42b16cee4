//! Oracles for the out-of-plane reduction: a derivative-free minimizer of the
//! elastic energy over the out-of-plane strain components, the closed-form
//! plane-stress tensor of an isotropic material, and the behaviour of the
//! reduction on planar tensors and Kirchhoff-Love fields.

use adhesive_plate_core::kl::KlDisplacement;
use adhesive_plate_core::mesh::build_plate_mesh;
use adhesive_plate_core::tensor::{
    apply_m, make_isotropic, mve_evolve, out_of_plane_minimizer, reduced_tensor, Strain2, StrainTrajectory,
    SymTensor4,
};
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

const SQRT2: f64 = std::f64::consts::SQRT_2;

/// Isotropic energy density `½ (λ tr(E)² + 2μ E : E)` of the completion of a
/// planar strain given in Mandel form `(11, 22, 12)` by `eta = (13, 23, 33)`.
fn isotropic_energy(lame: f64, mu: f64, planar: &[f64; 3], eta: &[f64; 3]) -> f64 {
    let e12 = planar[2] / SQRT2;
    let e = [[planar[0], e12, eta[0]], [e12, planar[1], eta[1]], [eta[0], eta[1], eta[2]]];
    let tr = e[0][0] + e[1][1] + e[2][2];
    let ee: f64 = e.iter().flatten().map(|v| v * v).sum();
    0.5 * (lame * tr * tr + 2.0 * mu * ee)
}

/// Minimum over `eta ∈ ℝ³` by a shrinking 9×9×9 grid search.
fn grid_minimum(f: impl Fn(&[f64; 3]) -> f64) -> f64 {
    let mut center = [0.0; 3];
    let mut radius = 4.0;
    let mut best = f(&center);
    for _ in 0..80 {
        let h = radius / 4.0;
        let start = center;
        for i in -4..=4 {
            for j in -4..=4 {
                for k in -4..=4 {
                    let p = [start[0] + i as f64 * h, start[1] + j as f64 * h, start[2] + k as f64 * h];
                    let v = f(&p);
                    if v < best {
                        best = v;
                        center = p;
                    }
                }
            }
        }
        radius *= 0.5;
    }
    best
}

/// Reduced tensor in Mandel form recovered from minimized energies by
/// polarization: `R_aa = 2 Q(e_a)`, `R_ab = Q(e_a + e_b) − Q(e_a) − Q(e_b)`.
fn brute_force_reduced(lame: f64, mu: f64) -> [[f64; 3]; 3] {
    let q = |v: [f64; 3]| grid_minimum(|eta| isotropic_energy(lame, mu, &v, eta));
    let unit = |a: usize| {
        let mut v = [0.0; 3];
        v[a] = 1.0;
        v
    };
    let mut r = [[0.0; 3]; 3];
    for a in 0..3 {
        r[a][a] = 2.0 * q(unit(a));
        for b in 0..a {
            let mut sum = unit(a);
            sum[b] = 1.0;
            r[a][b] = q(sum) - q(unit(a)) - q(unit(b));
            r[b][a] = r[a][b];
        }
    }
    r
}

/// Plane-stress tensor of an isotropic material: `2μ Ξ + λ* tr(Ξ) I` with
/// `λ* = 2μλ / (λ + 2μ)`.
fn plane_stress(lame: f64, mu: f64) -> [[f64; 3]; 3] {
    let ls = 2.0 * mu * lame / (lame + 2.0 * mu);
    [[2.0 * mu + ls, ls, 0.0], [ls, 2.0 * mu + ls, 0.0], [0.0, 0.0, 2.0 * mu]]
}

fn max_rel_diff(a: &[[f64; 3]; 3], b: &[[f64; 3]; 3]) -> f64 {
    let scale = b.iter().flatten().fold(0.0f64, |m, v| m.max(v.abs()));
    a.iter().flatten().zip(b.iter().flatten()).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max) / scale
}

#[test]
fn isotropic_reduction_matches_grid_minimizer_and_plane_stress() {
    for (lame, mu) in [(1.0, 1.0), (2.0, 1.0), (1.0, 3.0)] {
        let c = make_isotropic(lame, mu).unwrap();
        let r = reduced_tensor(&c).unwrap().voigt3;
        let oracle = brute_force_reduced(lame, mu);
        let closed = plane_stress(lame, mu);
        assert!(max_rel_diff(&r, &oracle) < 1e-8, "({lame}, {mu}): {r:?} vs grid {oracle:?}");
        assert!(max_rel_diff(&r, &closed) < 1e-10, "({lame}, {mu}): {r:?} vs closed form {closed:?}");
    }
}

#[test]
fn reduced_energy_never_exceeds_unrelaxed_energy() {
    let c = make_isotropic(2.0, 1.0).unwrap();
    let r = reduced_tensor(&c).unwrap();
    let xi = Strain2::new(0.3, -0.7, 0.2);
    let relaxed = 0.5 * r.energy_density2(&xi);
    let frozen = isotropic_energy(2.0, 1.0, &xi.mandel(), &[0.0; 3]);
    assert!(relaxed <= frozen);
    let eta = out_of_plane_minimizer(&c, &xi).unwrap();
    assert!((isotropic_energy(2.0, 1.0, &xi.mandel(), &eta) - relaxed).abs() < 1e-14);
}

/// Random symmetric positive definite Mandel matrix `BᵀB + shift·I`.
fn random_spd<R: Rng>(rng: &mut R, shift: f64) -> [[f64; 6]; 6] {
    let b: [[f64; 6]; 6] = std::array::from_fn(|_| std::array::from_fn(|_| rng.random_range(-1.0..1.0)));
    std::array::from_fn(|i| {
        std::array::from_fn(|j| (0..6).map(|k| b[k][i] * b[k][j]).sum::<f64>() + if i == j { shift } else { 0.0 })
    })
}

/// Mandel indices of the in-plane pairs `11, 22, 12`.
const PLANAR_MANDEL: [usize; 3] = [0, 1, 5];

/// A random tensor whose planar and out-of-plane Mandel blocks decouple, so
/// that `T_i3kl = 0` for in-plane `kl`.
fn random_planar_tensor<R: Rng>(rng: &mut R) -> SymTensor4 {
    let mut m = random_spd(rng, 0.2);
    for &p in &PLANAR_MANDEL {
        for q in [2, 3, 4] {
            m[p][q] = 0.0;
            m[q][p] = 0.0;
        }
    }
    SymTensor4::from_mandel(&m)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(100))]

    #[test]
    fn reduced_stress_has_no_out_of_plane_part(seed in any::<u64>(), x in prop::array::uniform3(-2.0f64..2.0)) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let c = SymTensor4::from_mandel(&random_spd(&mut rng, 0.1)).validated().unwrap();
        let xi = Strain2::new(x[0], x[1], x[2]);
        let stress = c.apply(&apply_m(&c, &xi).unwrap());
        for i in 0..3 {
            prop_assert!(stress.m[i][2].abs() <= 1e-12 * (1.0 + stress.norm()), "entry ({i},3) = {:e}", stress.m[i][2]);
        }
    }

    #[test]
    fn reduction_is_linear(seed in any::<u64>(), s in -3.0f64..3.0) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let c = SymTensor4::from_mandel(&random_spd(&mut rng, 0.1));
        let a = Strain2::new(rng.random(), rng.random(), rng.random());
        let b = Strain2::new(rng.random(), rng.random(), rng.random());
        let lhs = apply_m(&c, &a.add(&b.scaled(s))).unwrap();
        let rhs = apply_m(&c, &a).unwrap().add(&apply_m(&c, &b).unwrap().scaled(s));
        prop_assert!(lhs.add(&rhs.scaled(-1.0)).norm() < 1e-10 * (1.0 + rhs.norm()));
    }
}

/// Independent uniform values for every plate dof, clamped ones included;
/// the lift is evaluated cellwise, so boundary values do not matter here.
fn random_plate_dofs<R: Rng>(rng: &mut R, n: usize) -> Vec<f64> {
    (0..n).map(|_| rng.random_range(-1.0..1.0)).collect()
}

#[test]
fn planar_tensors_act_trivially_on_kirchhoff_love_strains() {
    let plate = build_plate_mesh(4, 3).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    for _ in 0..20 {
        let c = random_planar_tensor(&mut rng).validated().unwrap();
        let d = random_planar_tensor(&mut rng).validated().unwrap();
        let p0 = random_plate_dofs(&mut rng, plate.ndof());
        let p1 = random_plate_dofs(&mut rng, plate.ndof());
        let cell = rng.random_range(0..plate.cells.len());
        let s = [rng.random::<f64>(), rng.random::<f64>()];
        let x3 = rng.random_range(-0.5..0.5);

        let lift = KlDisplacement { plate: &plate, dofs: &p0 };
        let e = lift.strain(cell, &s, x3);
        for i in 0..3 {
            assert!(e.m[i][2].abs() < 1e-12, "lifted field has transverse strain {:e}", e.m[i][2]);
        }
        let m = apply_m(&c, &e.planar()).unwrap();
        assert!(m.add(&e.scaled(-1.0)).norm() <= 1e-8 * (1.0 + e.norm()));

        // v(t) = p0 + sin(t) p1 sampled on a time grid.
        let times: Vec<f64> = (0..=40).map(|n| n as f64 * 0.05).collect();
        let strains: Vec<_> = times
            .iter()
            .map(|&t| {
                let p: Vec<f64> = p0.iter().zip(&p1).map(|(a, b)| a + t.sin() * b).collect();
                KlDisplacement { plate: &plate, dofs: &p }.strain(cell, &s, x3)
            })
            .collect();
        let planar = StrainTrajectory::new(times.clone(), strains.iter().map(|e| e.planar()).collect()).unwrap();
        let out = mve_evolve(&c, &d, &planar, None).unwrap();
        for (got, want) in out.strains.values().iter().zip(&strains) {
            assert!(got.add(&want.scaled(-1.0)).norm() <= 1e-8 * (1.0 + want.norm()));
        }
    }
}

#[test]
fn viscoelastic_reduction_relaxes_to_the_elastic_minimizer() {
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    let c = SymTensor4::from_mandel(&random_spd(&mut rng, 0.5));
    let d = SymTensor4::from_mandel(&random_spd(&mut rng, 0.5)).scaled(0.02);
    let xi = Strain2::new(0.4, -0.1, 0.3);
    let times: Vec<f64> = (0..=4000).map(|n| n as f64 * 0.01).collect();
    let path = StrainTrajectory::new(times.clone(), vec![xi; times.len()]).unwrap();
    let out = mve_evolve(&c, &d, &path, Some([1.0, -1.0, 0.5])).unwrap();
    let last = out.strains.values().last().unwrap();
    let elastic = apply_m(&c, &xi).unwrap();
    assert!(last.add(&elastic.scaled(-1.0)).norm() < 1e-8, "{last:?} vs {elastic:?}");
    assert!(out.midpoint_residuals.iter().all(|r| *r < 1e-8));
}
