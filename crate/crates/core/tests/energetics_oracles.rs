//! Finite-difference and quadrature oracles for the energy functionals.

use adhesive_plate_core::assembly::{assemble_slab_forms, slab_uniform_force, ModelVariant};
use adhesive_plate_core::energetics::{
    power_of_loads, surface_terms, yosida_pair, AdhesionField, LoadData, ModelParams, Profile,
};
use adhesive_plate_core::mesh::build_slab_mesh;
use adhesive_plate_core::quadrature::GAUSS4;
use adhesive_plate_core::stepper::{interface_force, load_work_increment};
use adhesive_plate_core::tensor::make_isotropic;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn central_difference(f: impl Fn(&[f64; 3]) -> f64, x: &[f64; 3], h: f64) -> [f64; 3] {
    std::array::from_fn(|i| {
        let mut plus = *x;
        let mut minus = *x;
        plus[i] += h;
        minus[i] -= h;
        (f(&plus) - f(&minus)) / (2.0 * h)
    })
}

fn random_unit<R: Rng>(rng: &mut R) -> [f64; 3] {
    loop {
        let v: [f64; 3] = std::array::from_fn(|_| rng.random_range(-1.0..1.0));
        let n = (v[0] * v[0] + v[1] * v[1] + v[2] * v[2]).sqrt();
        if n > 0.1 {
            return v.map(|c| c / n);
        }
    }
}

#[test]
fn yosida_gradient_matches_central_differences() {
    let mut rng = ChaCha8Rng::seed_from_u64(31);
    for k in 0..100 {
        let n = random_unit(&mut rng);
        let lambda = rng.random_range(0.2..5.0);
        let mut v: [f64; 3] = std::array::from_fn(|_| rng.random_range(-2.0..2.0));
        if k % 2 == 1 {
            // Move to within 1e-3 of the cone boundary `v · n = 0`.
            let s = v[0] * n[0] + v[1] * n[1] + v[2] * n[2];
            let target = rng.random_range(-1e-3..1e-3);
            for i in 0..3 {
                v[i] += (target - s) * n[i];
            }
        }
        let (alpha, _) = yosida_pair(&v, &n, lambda);
        let fd = central_difference(|x| yosida_pair(x, &n, lambda).1, &v, 1e-7);
        for i in 0..3 {
            assert!(
                (alpha[i] - fd[i]).abs() <= 1e-6 * (1.0 + alpha[i].abs()),
                "point {k}: component {i} gradient {} vs difference {}",
                alpha[i],
                fd[i]
            );
        }
    }
}

#[test]
fn interface_force_is_the_gradient_of_the_surface_energy() {
    let mesh = build_slab_mesh(4, 2, 2).unwrap();
    let c = make_isotropic(1.0, 1.0).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(8);
    for variant in [ModelVariant::Physical3D, ModelVariant::Rescaled3D { eps: 0.5 }] {
        let forms = assemble_slab_forms(&mesh, &c, &c, 1.0, 1.0, variant).unwrap();
        let p = ModelParams {
            kappa: 2.5,
            lambda_yosida: 0.3,
            a0: 1.0,
            a1: 1.0,
            b: 0.0,
            nu: 1.7,
            rho: 1.0,
            n_interface: [1.0, 0.0, 0.0],
        };
        let (nj, nk) = forms.interface_dims;
        let z = AdhesionField::uniform(1.0, (nj, nk), forms.interface_cell_size)
            .with_values((0..nj * nk).map(|_| rng.random()).collect());
        let u: Vec<f64> = (0..forms.ndof).map(|_| rng.random_range(-0.5..0.5)).collect();
        let energy = |u: &[f64]| surface_terms(&forms.jumps(u), &z, &p, &forms.interface).unwrap().total();
        let g = interface_force(&forms, &p, &z, &u);
        let h = 1e-6;
        for dof in (0..forms.ndof).step_by(5) {
            let mut plus = u.clone();
            let mut minus = u.clone();
            plus[dof] += h;
            minus[dof] -= h;
            let fd = (energy(&plus) - energy(&minus)) / (2.0 * h);
            assert!((g[dof] - fd).abs() < 1e-6 * (1.0 + fd.abs()), "{variant:?} dof {dof}: {} vs {fd}", g[dof]);
        }
    }
}

#[test]
fn load_power_integrates_to_the_work_increment() {
    let mesh = build_slab_mesh(2, 1, 1).unwrap();
    let c = make_isotropic(0.5, 1.0).unwrap();
    let forms = assemble_slab_forms(&mesh, &c, &c, 2.0, 0.3, ModelVariant::Physical3D).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let lift: Vec<f64> = (0..forms.ndof).map(|_| rng.random()).collect();
    let loads = LoadData::new(
        slab_uniform_force(&mesh, &[0.1, -0.2, 0.3]),
        Profile::new(vec![0.5, -1.0, 2.0]),
        lift,
        Profile::new(vec![0.0, 1.0, -0.5, 0.25]),
        &forms.mass,
        &forms.stiffness,
        &forms.damping,
    );
    let u: Vec<f64> = (0..forms.ndof).map(|_| rng.random_range(-1.0..1.0)).collect();
    let (t, dt) = (0.3, 0.1);
    // The rule lives on [0, 1]; its degree covers the cubic lift profile.
    let integral: f64 = GAUSS4.iter().map(|&(x, w)| dt * w * power_of_loads(t + dt * x, &u, &loads)).sum();
    let increment = load_work_increment(&loads, t, dt, &u, &u);
    assert!((integral - increment).abs() < 1e-12 * (1.0 + increment.abs()), "{integral} vs {increment}");

    // The time derivative of the load agrees with a difference quotient.
    let h = 1e-6;
    let fd: Vec<f64> = loads.load(t + h).iter().zip(loads.load(t - h)).map(|(a, b)| (a - b) / (2.0 * h)).collect();
    for (a, b) in loads.load_derivative(1, t).iter().zip(&fd) {
        assert!((a - b).abs() < 1e-6 * (1.0 + a.abs()));
    }
}
