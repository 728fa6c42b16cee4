//! Acceptance suite: one PASS/FAIL line per criterion, with the measured
//! quantity, the pinned tolerance and the runtime. Exits non-zero if any
//! criterion fails.

use std::path::PathBuf;
use std::process::ExitCode;
use std::time::{Duration, Instant};

use adhesive_plate::config::RunConfig;
use adhesive_plate::simulate::simulate;
use adhesive_plate::studies::{decoupling_test, study_dimred_undamped, study_nu_to_zero};
use adhesive_plate_core::assembly::{assemble_plate_forms, ModelVariant};
use adhesive_plate_core::energetics::{yosida_pair, AdhesionField, InterfaceModel, ModelParams};
use adhesive_plate_core::kl::KlDisplacement;
use adhesive_plate_core::korn::korn_check;
use adhesive_plate_core::mesh::{build_plate_mesh, build_slab_mesh};
use adhesive_plate_core::stepper::semistable_update_z;
use adhesive_plate_core::tensor::{
    apply_m, make_isotropic, mve_evolve, reduced_tensor, Strain2, StrainTrajectory, SymTensor4,
};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

const SEED: u64 = 0;

struct Outcome {
    passed: bool,
    detail: String,
}

fn outcome(passed: bool, detail: impl Into<String>) -> Outcome {
    Outcome { passed, detail: detail.into() }
}

fn config(name: &str) -> RunConfig {
    let path: PathBuf = [env!("CARGO_MANIFEST_DIR"), "..", "..", "configs", name].iter().collect();
    RunConfig::from_path(&path).unwrap_or_else(|e| panic!("{}: {e}", path.display()))
}

fn random_spd(rng: &mut ChaCha8Rng, shift: f64) -> [[f64; 6]; 6] {
    let b: [[f64; 6]; 6] = std::array::from_fn(|_| std::array::from_fn(|_| rng.random_range(-1.0..1.0)));
    std::array::from_fn(|i| {
        std::array::from_fn(|j| (0..6).map(|k| b[k][i] * b[k][j]).sum::<f64>() + if i == j { shift } else { 0.0 })
    })
}

// 1 ---------------------------------------------------------------------------

/// Minimum over `eta` of the isotropic energy of `[[x11, x12, η1], [x12, x22, η2], [η1, η2, η3]]`
/// with planar Mandel input `(11, 22, √2·12)`, by a shrinking grid search.
fn minimized_energy(lame: f64, mu: f64, planar: [f64; 3]) -> f64 {
    let energy = |eta: &[f64; 3]| {
        let e12 = planar[2] / std::f64::consts::SQRT_2;
        let e = [[planar[0], e12, eta[0]], [e12, planar[1], eta[1]], [eta[0], eta[1], eta[2]]];
        let tr = e[0][0] + e[1][1] + e[2][2];
        0.5 * (lame * tr * tr + 2.0 * mu * e.iter().flatten().map(|v| v * v).sum::<f64>())
    };
    let (mut center, mut radius) = ([0.0; 3], 4.0);
    let mut best = energy(&center);
    for _ in 0..80 {
        let start = center;
        let h = radius / 4.0;
        for i in -4..=4 {
            for j in -4..=4 {
                for k in -4..=4 {
                    let p = [start[0] + i as f64 * h, start[1] + j as f64 * h, start[2] + k as f64 * h];
                    let v = energy(&p);
                    if v < best {
                        (best, center) = (v, p);
                    }
                }
            }
        }
        radius *= 0.5;
    }
    best
}

fn tensor_reduction() -> Outcome {
    let (mut grid_err, mut closed_err) = (0.0f64, 0.0f64);
    for (lame, mu) in [(1.0, 1.0), (2.0, 1.0), (1.0, 3.0)] {
        let r = reduced_tensor(&make_isotropic(lame, mu).unwrap()).unwrap().voigt3;
        let unit = |a: usize| std::array::from_fn(|i| if i == a { 1.0 } else { 0.0 });
        let q = |v: [f64; 3]| minimized_energy(lame, mu, v);
        let mut grid = [[0.0; 3]; 3];
        for a in 0..3 {
            grid[a][a] = 2.0 * q(unit(a));
            for b in 0..a {
                let mut s = unit(a);
                s[b] = 1.0;
                grid[a][b] = q(s) - q(unit(a)) - q(unit(b));
                grid[b][a] = grid[a][b];
            }
        }
        let ls = 2.0 * mu * lame / (lame + 2.0 * mu);
        let closed = [[2.0 * mu + ls, ls, 0.0], [ls, 2.0 * mu + ls, 0.0], [0.0, 0.0, 2.0 * mu]];
        let scale = 2.0 * mu + ls;
        for a in 0..3 {
            for b in 0..3 {
                grid_err = grid_err.max((r[a][b] - grid[a][b]).abs() / scale);
                closed_err = closed_err.max((r[a][b] - closed[a][b]).abs() / scale);
            }
        }
    }
    outcome(
        grid_err <= 1e-8 && closed_err <= 1e-10,
        format!("grid oracle rel {grid_err:.1e} (<= 1e-8), plane stress rel {closed_err:.1e} (<= 1e-10)"),
    )
}

// 2 ---------------------------------------------------------------------------

fn planarity() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(SEED + 2);
    let mut worst = 0.0f64;
    for _ in 0..100 {
        let c = SymTensor4::from_mandel(&random_spd(&mut rng, 0.1)).validated().unwrap();
        let xi = Strain2::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0));
        let s = c.apply(&apply_m(&c, &xi).unwrap());
        worst = (0..3).map(|i| s.m[i][2].abs()).fold(worst, f64::max);
    }
    outcome(worst <= 1e-12, format!("max |(C M Xi)_i3| = {worst:.1e} over 100 samples (<= 1e-12)"))
}

// 3 ---------------------------------------------------------------------------

fn planar_tensor(rng: &mut ChaCha8Rng) -> SymTensor4 {
    let mut m = random_spd(rng, 0.2);
    for p in [0, 1, 5] {
        for q in [2, 3, 4] {
            m[p][q] = 0.0;
            m[q][p] = 0.0;
        }
    }
    SymTensor4::from_mandel(&m)
}

fn kl_identification() -> Outcome {
    let plate = build_plate_mesh(4, 3).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(SEED + 3);
    let (mut m_err, mut ve_err) = (0.0f64, 0.0f64);
    for _ in 0..20 {
        let c = planar_tensor(&mut rng);
        let d = planar_tensor(&mut rng);
        let p0: Vec<f64> = (0..plate.ndof()).map(|_| rng.random_range(-1.0..1.0)).collect();
        let p1: Vec<f64> = (0..plate.ndof()).map(|_| rng.random_range(-1.0..1.0)).collect();
        let cell = rng.random_range(0..plate.cells.len());
        let s = [rng.random::<f64>(), rng.random::<f64>()];
        let x3 = rng.random_range(-0.5..0.5);
        let strain_at = |t: f64| {
            let p: Vec<f64> = p0.iter().zip(&p1).map(|(a, b)| a + t.cos() * b).collect();
            KlDisplacement { plate: &plate, dofs: &p }.strain(cell, &s, x3)
        };
        let e = strain_at(0.0);
        m_err = m_err.max(apply_m(&c, &e.planar()).unwrap().add(&e.scaled(-1.0)).norm());
        let times: Vec<f64> = (0..=50).map(|n| n as f64 * 0.04).collect();
        let full: Vec<_> = times.iter().map(|&t| strain_at(t)).collect();
        let planar = StrainTrajectory::new(times, full.iter().map(|e| e.planar()).collect()).unwrap();
        let out = mve_evolve(&c, &d, &planar, None).unwrap();
        for (got, want) in out.strains.values().iter().zip(&full) {
            ve_err = ve_err.max(got.add(&want.scaled(-1.0)).norm());
        }
    }
    outcome(
        m_err <= 1e-8 && ve_err <= 1e-8,
        format!("|M e_plan - e| = {m_err:.1e}, |M_VE - e| = {ve_err:.1e} over 20 lifts (<= 1e-8)"),
    )
}

// 4 ---------------------------------------------------------------------------

fn adhesion_params(b: f64) -> ModelParams {
    ModelParams { kappa: 3.0, lambda_yosida: 0.1, a0: 0.4, a1: 0.6, b, nu: 0.0, rho: 1.0, n_interface: [1.0, 0.0, 0.0] }
}

fn incremental_energy(z: &AdhesionField, prev: &AdhesionField, jumps: &[[f64; 3]], p: &ModelParams) -> f64 {
    let (nj, nk) = z.grid_dims;
    let (hj, hk) = z.cell_size;
    let mut e = 0.0;
    for c in 0..z.len() {
        let q: f64 = jumps[c].iter().map(|v| v * v).sum();
        e += hj * hk * (0.5 * p.kappa * z.values[c] * q - p.a0 * z.values[c] + p.a1 * (prev.values[c] - z.values[c]));
    }
    for j in 0..nj {
        for k in 0..nk {
            let v = z.values[j * nk + k];
            if j + 1 < nj {
                e += p.b * hk * (v - z.values[(j + 1) * nk + k]).abs();
            }
            if k + 1 < nk {
                e += p.b * hj * (v - z.values[j * nk + k + 1]).abs();
            }
        }
    }
    e
}

fn semistable_update() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(SEED + 4);
    let (mut cut_mismatch, mut threshold_mismatch) = (0, 0);
    for instance in 0..100 {
        let binary = instance < 50;
        let dims = (rng.random_range(1..=4), rng.random_range(1..=4));
        let size = (rng.random_range(0.1..1.0), rng.random_range(0.1..1.0));
        let n = dims.0 * dims.1;
        let values = (0..n)
            .map(|_| match (rng.random::<f64>() < 0.2, binary) {
                (true, _) => 0.0,
                (false, true) => 1.0,
                (false, false) => rng.random_range(0.05..=1.0),
            })
            .collect();
        let z = AdhesionField::uniform(1.0, dims, size).with_values(values);
        let jumps: Vec<[f64; 3]> = (0..n).map(|_| std::array::from_fn(|_| rng.random_range(-0.8..0.8))).collect();
        let p = adhesion_params(if binary { rng.random_range(0.05..0.5) } else { 0.0 });
        let got = semistable_update_z(&z, &jumps, &p, &InterfaceModel::RESCALED).unwrap();
        if binary {
            let bonded: Vec<usize> = (0..n).filter(|&c| z.values[c] == 1.0).collect();
            let mut best = (f64::INFINITY, z.clone());
            for mask in 0u32..(1 << bonded.len()) {
                let mut v = vec![0.0; n];
                for (bit, &c) in bonded.iter().enumerate() {
                    v[c] = f64::from((mask >> bit) & 1);
                }
                let cand = z.with_values(v);
                let e = incremental_energy(&cand, &z, &jumps, &p);
                if e < best.0 {
                    best = (e, cand);
                }
            }
            cut_mismatch += usize::from(got.values != best.1.values);
        } else {
            for c in 0..n {
                let single = |v: f64| {
                    let f = AdhesionField::uniform(v, (1, 1), size);
                    incremental_energy(&f, &AdhesionField::uniform(z.values[c], (1, 1), size), &jumps[c..=c], &p)
                };
                let want = if single(0.0) < single(z.values[c]) { 0.0 } else { z.values[c] };
                threshold_mismatch += usize::from(got.values[c] != want);
            }
        }
    }
    outcome(
        cut_mismatch == 0 && threshold_mismatch == 0,
        format!("min-cut mismatches {cut_mismatch}/50 instances, threshold mismatches {threshold_mismatch} cells"),
    )
}

// 5, 6, 7 ---------------------------------------------------------------------

struct ReferenceRuns {
    violations: usize,
    steps: usize,
    residual: f64,
    scale: f64,
    residual_half: f64,
    min_margin: f64,
    audits: usize,
    competitors: usize,
    elapsed: Duration,
}

fn reference_runs() -> ReferenceRuns {
    let start = Instant::now();
    let cfg = config("reference.toml");
    let (_, traj, cert) = simulate(&cfg, SEED).unwrap();
    let mut half = cfg.clone();
    half.scheme.dt *= 0.5;
    let (_, _, cert_half) = simulate(&half, SEED).unwrap();
    let semi = cert.semistability.expect("simulate audits semistability");
    ReferenceRuns {
        violations: cert.adhesion_violations.unwrap_or(usize::MAX),
        steps: traj.states.len() - 1,
        residual: cert.balance.max_abs_residual,
        scale: cert.balance.energy_scale,
        residual_half: cert_half.balance.max_abs_residual,
        min_margin: semi.min_margin,
        audits: semi.audit_times.len(),
        competitors: semi.competitors,
        elapsed: start.elapsed(),
    }
}

// 8, 9 ------------------------------------------------------------------------

fn study_outcome(report: &adhesive_plate::report::StudyReport) -> Outcome {
    let failed: Vec<&str> = report.checks.iter().filter(|c| c.required && !c.passed).map(|c| c.name.as_str()).collect();
    let required = report.checks.iter().filter(|c| c.required).count();
    let detail = if failed.is_empty() {
        format!("{required} required checks passed")
    } else {
        format!("failed: {}", failed.join(", "))
    };
    outcome(failed.is_empty(), detail)
}

// 10 --------------------------------------------------------------------------

fn korn() -> Outcome {
    let mesh = build_slab_mesh(4, 2, 2).unwrap();
    let d = make_isotropic(0.0, 1.0).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(SEED + 10);
    let mut ratios = Vec::new();
    for eps in [1.0, 0.5, 0.25, 0.125] {
        ratios.push(korn_check(&mesh, &d, eps, 200, &mut rng).unwrap().min_ratio);
    }
    let min = ratios.iter().copied().fold(f64::INFINITY, f64::min);
    let shown: Vec<String> = ratios.iter().map(|r| format!("{r:.3e}")).collect();
    outcome(min >= 1e-4, format!("min ratio {min:.3e} (>= 1e-4); per eps [{}]", shown.join(", ")))
}

// 11 --------------------------------------------------------------------------

fn yosida() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(SEED + 11);
    let mut worst = 0.0f64;
    for k in 0..100 {
        let n = loop {
            let v: [f64; 3] = std::array::from_fn(|_| rng.random_range(-1.0..1.0));
            let len = v.iter().map(|c| c * c).sum::<f64>().sqrt();
            if len > 0.1 {
                break v.map(|c| c / len);
            }
        };
        let lambda = rng.random_range(0.2..5.0);
        let mut v: [f64; 3] = std::array::from_fn(|_| rng.random_range(-2.0..2.0));
        if k % 2 == 1 {
            let s: f64 = (0..3).map(|i| v[i] * n[i]).sum();
            let target = rng.random_range(-1e-3..1e-3);
            (0..3).for_each(|i| v[i] += (target - s) * n[i]);
        }
        let (alpha, _) = yosida_pair(&v, &n, lambda);
        let h = 1e-7;
        for i in 0..3 {
            let (mut plus, mut minus) = (v, v);
            plus[i] += h;
            minus[i] -= h;
            let fd = (yosida_pair(&plus, &n, lambda).1 - yosida_pair(&minus, &n, lambda).1) / (2.0 * h);
            worst = worst.max((alpha[i] - fd).abs() / (1.0 + alpha[i].abs()));
        }
    }
    outcome(worst <= 1e-6, format!("max gradient error {worst:.1e} over 100 points (<= 1e-6)"))
}

// 12 --------------------------------------------------------------------------

fn decoupling() -> Outcome {
    let plate = build_plate_mesh(8, 4).unwrap();
    let nz = 4;
    let c = make_isotropic(0.0, 1.0).unwrap();
    let forms = assemble_plate_forms(&plate, nz, &c, &c, 1.0, ModelVariant::LimitUndamped).unwrap();
    let params = adhesion_params(0.0);
    let z = AdhesionField::uniform(1.0, forms.interface_dims, forms.interface_cell_size);
    let mut rng = ChaCha8Rng::seed_from_u64(SEED + 12);
    let along_line: Vec<f64> = (0..plate.ny).map(|_| rng.random()).collect();
    let varying = z.with_values((0..z.len()).map(|c| along_line[c / nz]).collect());
    let upper = z.with_values((0..z.len()).map(|c| if forms.interface_x3[c] > 0.0 { 1.0 } else { 0.0 }).collect());
    let independent = [&z, &varying].map(|f| decoupling_test(&forms, &params, f).unwrap().cross);
    let cross_independent = independent.iter().copied().fold(0.0, f64::max);
    let cross_upper = decoupling_test(&forms, &params, &upper).unwrap().cross;
    outcome(
        cross_independent <= 1e-12 && cross_upper > 0.0,
        format!("x3-independent z: {cross_independent:.1e} (<= 1e-12); z = 1{{x3 > 0}}: {cross_upper:.3e} (> 0)"),
    )
}

// -----------------------------------------------------------------------------

fn report(number: usize, name: &str, limit: Option<Duration>, run: impl FnOnce() -> Outcome) -> bool {
    let start = Instant::now();
    let out = run();
    report_timed(number, name, limit, start.elapsed(), out)
}

fn report_timed(number: usize, name: &str, limit: Option<Duration>, elapsed: Duration, out: Outcome) -> bool {
    let in_time = limit.is_none_or(|l| elapsed <= l);
    let passed = out.passed && in_time;
    let budget = limit.map_or(String::new(), |l| format!(" of {} s", l.as_secs()));
    println!(
        "[{}] {number:>2} {name}: {}; {:.2} s{budget}",
        if passed { "PASS" } else { "FAIL" },
        out.detail,
        elapsed.as_secs_f64()
    );
    passed
}

fn main() -> ExitCode {
    // Nothing else is parsed: the binary also receives libtest flags.
    let secs = Duration::from_secs;
    let mut results = Vec::new();
    results.push(report(1, "tensor reduction oracle", Some(secs(1)), tensor_reduction));
    results.push(report(2, "planarity of the reduced stress", None, planarity));
    results.push(report(3, "Kirchhoff-Love identification", None, kl_identification));
    results.push(report(4, "semistable update exactness", None, semistable_update));

    let reference = reference_runs();
    results.push(report_timed(
        5,
        "unidirectionality and admissibility",
        None,
        reference.elapsed,
        outcome(reference.violations == 0 && reference.steps == 100, format!("{} violations over {} steps", reference.violations, reference.steps)),
    ));
    let rel = reference.residual / reference.scale;
    let ratio = reference.residual / reference.residual_half;
    results.push(report_timed(
        6,
        "discrete energy-dissipation balance",
        Some(secs(60)),
        reference.elapsed,
        outcome(
            rel <= 1e-3 && (1.5..=3.0).contains(&ratio),
            format!("max residual {rel:.2e} of energy scale (<= 1e-3), halving dt divides it by {ratio:.2} (in [1.5, 3])"),
        ),
    ));
    let margin_rel = reference.min_margin / reference.scale;
    results.push(report_timed(
        7,
        "semistability audit",
        None,
        reference.elapsed,
        outcome(
            reference.audits == 10 && reference.competitors == 100 && margin_rel >= -1e-9,
            format!(
                "min margin {margin_rel:.2e} of energy scale (>= -1e-9) at {} times, {} competitors",
                reference.audits, reference.competitors
            ),
        ),
    ));

    results.push(report(8, "vanishing viscosity study", Some(secs(300)), || {
        study_outcome(&study_nu_to_zero(&config("nu_study.toml")).unwrap())
    }));
    results.push(report(9, "dimension-reduction diagnostics", Some(secs(600)), || {
        study_outcome(&study_dimred_undamped(&config("dimred_undamped.toml")).unwrap())
    }));
    results.push(report(10, "Korn check", None, korn));
    results.push(report(11, "Yosida gradient", None, yosida));
    results.push(report(12, "decoupling", None, decoupling));

    let passed = results.iter().filter(|&&p| p).count();
    println!("{passed}/{} acceptance criteria passed", results.len());
    if passed == results.len() {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
