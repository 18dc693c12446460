//! End-to-end acceptance checks, one test per criterion. Each prints a
//! single verdict line; run with `--nocapture` to see them all.

use std::time::Instant;

use fatigue_core::md::{
    build_rve, compute_forces, relax, step_velocity_verlet, total_energy, virial_stress,
    AtomSystem, CrackKind, CrackSpec, Group, NeighborList, PairPotential, RelaxParams, RveParams,
    SimBox, Species,
};
use fatigue_core::paris::{fit_paris, GrowthPoint, ParisConstants, UnitSystem};
use fatigue_core::pipeline::{run_pipeline, PipelineConfig, RunManifest};
use fatigue_core::vision::{
    binarize_median, crack_length, skeletonize, ContourRaster, MouthEdge, SkeletonParams,
};
use fatigue_core::xfem::{
    hoop_stress_derivative, interaction_integral, kink_angle, run_fatigue, sent_k1, solve_plate,
    Crack, FatigueConfig, Material, Mesh, PlateProblem,
};

fn verdict(n: usize, name: &str, ok: bool, detail: &str) {
    println!(
        "criterion {n} ({name}): {} [{detail}]",
        if ok { "pass" } else { "FAIL" }
    );
    assert!(ok, "criterion {n} ({name}) failed: {detail}");
}

#[test]
fn criterion_1_paris_fit_round_trip() {
    let t0 = Instant::now();
    let (c_true, m_true) = (1.43e-11, 2.75);
    let points: Vec<GrowthPoint> = (0..40)
        .map(|i| {
            let dk = 200.0 + 25.0 * i as f64;
            GrowthPoint {
                delta_k: dk,
                dadn: c_true * dk.powf(m_true),
            }
        })
        .collect();
    let fit = fit_paris(&points, UnitSystem::MpaSqrtMm).unwrap();
    let err_c = (fit.c - c_true).abs() / c_true;
    let err_m = (fit.m - m_true).abs() / m_true;
    let dt = t0.elapsed();
    verdict(
        1,
        "paris-fit round trip",
        err_c < 1e-6 && err_m < 1e-6 && dt.as_secs_f64() < 1.0,
        &format!("rel err C {err_c:.2e}, m {err_m:.2e}, {dt:?}"),
    );
}

#[test]
fn criterion_2_kink_angle() {
    let pure_opening = kink_angle(1.0, 0.0);
    let pure_sliding = kink_angle(0.0, 1.0).to_degrees();
    let mut worst_deriv: f64 = 0.0;
    for (k1, k2) in [
        (1.0, 0.0),
        (1.0, 0.3),
        (1.0, -0.8),
        (0.2, 1.0),
        (0.0, 1.0),
        (3.0, 0.5),
    ] {
        let theta = kink_angle(k1, k2);
        let mag = (k1 * k1 + k2 * k2).sqrt();
        worst_deriv = worst_deriv.max(hoop_stress_derivative(k1, k2, theta).abs() / mag);
    }
    let ok = pure_opening == 0.0 && (pure_sliding + 70.53).abs() < 0.01 && worst_deriv < 1e-6;
    verdict(
        2,
        "kink angle",
        ok,
        &format!(
            "theta(KII=0) = {pure_opening}, theta(KI=0) = {pure_sliding:.3} deg, \
             max |d sigma_tt / d theta| = {worst_deriv:.2e}"
        ),
    );
}

#[test]
fn criterion_3_xfem_sif_convergence() {
    let reference = sent_k1(50.0, 10.0, 60.0);
    let mut errs = Vec::new();
    let mut slowest = 0.0f64;
    for h in [4.0, 2.0, 1.0] {
        let t0 = Instant::now();
        let mesh = Mesh::rectangle(60.0, 120.0, h).unwrap();
        let y = (mesh.ny / 2) as f64 * mesh.dy + 0.5 * mesh.dy;
        let sol = solve_plate(&PlateProblem {
            mesh,
            crack: Crack::edge(10.0, y),
            material: Material::steel(),
            sigma_mpa: 50.0,
        })
        .unwrap();
        slowest = slowest.max(t0.elapsed().as_secs_f64());
        errs.push((interaction_integral(&sol).k1 - reference).abs() / reference);
    }
    let ok = errs[2] < 0.03 && errs[0] > errs[1] && errs[1] > errs[2] && slowest < 30.0;
    verdict(
        3,
        "xfem sif accuracy",
        ok,
        &format!(
            "errors {:.4} / {:.4} / {:.4} at 4/2/1 mm, slowest solve {slowest:.1} s",
            errs[0], errs[1], errs[2]
        ),
    );
}

#[test]
fn criterion_4_life_prediction() {
    let t0 = Instant::now();
    let paris = ParisConstants::new(1.4299e-11, 2.9041, UnitSystem::MpaSqrtMm);
    let outcome = run_fatigue(&FatigueConfig::reference_plate(paris), None).unwrap();
    let dt = t0.elapsed().as_secs_f64();
    let life = outcome.cycles_to_failure;
    let within = (life - 65_000.0).abs() / 65_000.0 <= 0.20;
    let a: Vec<f64> = outcome.steps.iter().map(|s| s.a).collect();
    let n: Vec<f64> = outcome.steps.iter().map(|s| s.cycles).collect();
    let increasing = a.windows(2).all(|w| w[1] > w[0]);
    // equal crack increments per step, so concave-up a(N) means the cycle
    // cost of each successive increment shrinks
    let dn: Vec<f64> = n.windows(2).map(|w| w[1] - w[0]).collect();
    let concave = dn.windows(2).all(|w| w[1] < w[0]);
    verdict(
        4,
        "life prediction",
        within && increasing && concave && dt < 300.0,
        &format!("life {life:.0} cycles, {} steps, {dt:.0} s", a.len()),
    );
}

fn nve_system() -> (AtomSystem, PairPotential) {
    let params = RveParams {
        box_dims: [34.2, 34.2, 8.55],
        lattice_constant: 2.85,
        c_fraction: 0.0,
        vacancy_fraction: 0.0,
        crack: CrackSpec {
            length: 8.0,
            kind: CrackKind::Blunt,
        },
        seed: 11,
        fixed_planes: 3,
    };
    (build_rve(&params).unwrap(), PairPotential::fe_default())
}

fn random_cluster(seed: u64) -> AtomSystem {
    use rand::Rng;
    use rand_chacha::rand_core::SeedableRng;
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
    let mut positions: Vec<[f64; 3]> = Vec::new();
    while positions.len() < 8 {
        let p = [
            rng.gen_range(2.0..10.0),
            rng.gen_range(2.0..10.0),
            rng.gen_range(2.0..10.0),
        ];
        let far = positions.iter().all(|q: &[f64; 3]| {
            let d2 = (0..3).map(|k| (p[k] - q[k]).powi(2)).sum::<f64>();
            d2 > 2.0f64.powi(2)
        });
        if far {
            positions.push(p);
        }
    }
    let n = positions.len();
    AtomSystem {
        positions,
        velocities: vec![[0.0; 3]; n],
        species: vec![Species::Fe; n],
        group: vec![Group::Mobile; n],
        sim_box: SimBox {
            lo: [0.0; 3],
            hi: [12.0; 3],
            periodic_z: false,
        },
        lattice_constant: 2.85,
        seam: None,
    }
}

#[test]
fn criterion_5_md_property_suite() {
    let t0 = Instant::now();

    // conservation: 10k undamped steps after a light thermalization
    let (mut sys, pot) = nve_system();
    let mut nb = NeighborList::build(&sys, pot.r_cut, 0.5 * pot.r0);
    let _ = relax(
        &mut sys,
        &pot,
        &mut nb,
        RelaxParams {
            tolerance: 0.05,
            max_steps: 2000,
            dt: 0.002,
        },
    );
    sys.thermalize(20.0, 5);
    nb.ensure(&sys);
    let e0 = total_energy(&sys, &pot, &nb).unwrap();
    let (mut forces, _) = compute_forces(&sys, &pot, &nb).unwrap();
    for _ in 0..10_000 {
        step_velocity_verlet(&mut sys, &pot, 0.001, &mut nb, &mut forces).unwrap();
    }
    nb.ensure(&sys);
    let e1 = total_energy(&sys, &pot, &nb).unwrap();
    let drift = (e1 - e0).abs() / e0.abs();

    // forces against finite differences of the energy, random clusters
    let mut worst_fd: f64 = 0.0;
    let mut worst_sum: f64 = 0.0;
    for seed in 0..20 {
        let mut cluster = random_cluster(seed);
        let mut cnb = NeighborList::build(&cluster, pot.r_cut, 0.5 * pot.r0);
        let (f, _) = compute_forces(&cluster, &pot, &cnb).unwrap();
        let fmax = f
            .iter()
            .map(|v| (v[0] * v[0] + v[1] * v[1] + v[2] * v[2]).sqrt())
            .fold(0.0, f64::max);
        for d in 0..3 {
            worst_sum = worst_sum.max(f.iter().map(|v| v[d]).sum::<f64>().abs());
        }
        let h = 1e-5;
        for i in [0usize, 3, 7] {
            for d in 0..3 {
                let orig = cluster.positions[i][d];
                cluster.positions[i][d] = orig + h;
                cnb.ensure(&cluster);
                let (_, ep) = compute_forces(&cluster, &pot, &cnb).unwrap();
                cluster.positions[i][d] = orig - h;
                cnb.ensure(&cluster);
                let (_, em) = compute_forces(&cluster, &pot, &cnb).unwrap();
                cluster.positions[i][d] = orig;
                cnb.ensure(&cluster);
                let fd = -(ep - em) / (2.0 * h);
                worst_fd = worst_fd.max((fd - f[i][d]).abs() / fmax.max(1e-12));
            }
        }
    }

    // two-atom virial against a by-hand evaluation of the pair formula
    let sep = 2.4;
    let mut pair = random_cluster(0);
    pair.positions.truncate(2);
    pair.velocities.truncate(2);
    pair.species.truncate(2);
    pair.group.truncate(2);
    pair.positions[0] = [4.0, 6.0, 6.0];
    pair.positions[1] = [4.0 + sep, 6.0, 6.0];
    pair.velocities = vec![[0.0; 3]; 2];
    let pnb = NeighborList::build(&pair, pot.r_cut, 0.5 * pot.r0);
    let stress = virial_stress(&pair, &pot, &pnb).unwrap();
    // independent Morse derivative with the shifted-force correction
    let (alpha, depth, r0, rc) = (3.0, 0.4174, 2.5245619775, 4.5);
    let du = |r: f64| {
        let e = (-alpha * (r - r0)).exp();
        2.0 * depth * alpha * e * (1.0 - e)
    };
    let du_shifted = du(sep) - du(rc);
    let volume = 2.85f64.powi(3) / 2.0;
    let expected_xx = 0.5 * sep * du_shifted / volume;
    let virial_err = (stress.per_atom[0][0] - expected_xx)
        .abs()
        .max((stress.per_atom[1][0] - expected_xx).abs());

    let dt = t0.elapsed().as_secs_f64();
    let ok = drift < 1e-4 && worst_fd < 1e-6 && worst_sum < 1e-10 && virial_err < 1e-10 && dt < 120.0;
    verdict(
        5,
        "md property suite",
        ok,
        &format!(
            "drift {drift:.2e}, fd {worst_fd:.2e}, sum(f) {worst_sum:.2e}, \
             virial {virial_err:.2e}, {dt:.0} s"
        ),
    );
}

#[test]
fn criterion_6_micro_to_constants() {
    let t0 = Instant::now();
    let dir = tempfile::tempdir().unwrap();
    let base = PipelineConfig::preset("ci", 1).unwrap();

    let mut read = |cfg: &PipelineConfig, sub: &str| {
        let root = dir.path().join(sub);
        std::fs::create_dir_all(&root).unwrap();
        fatigue_core::pipeline::stage_md(cfg, &root).unwrap();
        fatigue_core::pipeline::stage_extract(cfg, &root).unwrap();
        fatigue_core::pipeline::stage_fit(cfg, &root).unwrap();
        let constants = fatigue_core::pipeline::load_paris(&root.join("fit/paris.json")).unwrap();
        let points = std::fs::read_to_string(root.join("fit/growth_points.csv")).unwrap();
        (constants, points.lines().count().saturating_sub(1))
    };

    let (pure, n_pure) = read(&base, "pure");
    let mut defected = base.clone();
    defected.rve.c_fraction = 0.01;
    defected.rve.vacancy_fraction = 0.005;
    let (def, _) = read(&defected, "defected");

    let dt = t0.elapsed().as_secs_f64();
    let ok = n_pure >= 5
        && (1.0..=4.0).contains(&pure.m)
        && pure.c > 0.0
        && (pure.m != def.m || pure.c != def.c)
        && dt < 600.0;
    verdict(
        6,
        "micro-to-constants",
        ok,
        &format!(
            "{n_pure} points, pure m {:.3} C {:.3e}; defected m {:.3} C {:.3e}; {dt:.0} s",
            pure.m, pure.c, def.m, def.c
        ),
    );
}

#[test]
fn criterion_7_crack_extraction() {
    let t0 = Instant::now();

    // 100 px straight strip, 3 px thick so the median filter keeps it
    let mut strip = ContourRaster::new(120, 40, 1.0, (0.0, 0.0));
    for x in 0..100 {
        for y in 19..22 {
            strip.set(x, y, 255);
        }
    }
    let binary = binarize_median(&strip, 128, 3);
    let skel = skeletonize(&binary, SkeletonParams::default()).unwrap();
    let (strip_len, _) = crack_length(&skel, MouthEdge::Left).unwrap();

    // L-shape: 60 px along x, then 30 px up
    let mut ell = ContourRaster::new(120, 60, 1.0, (0.0, 0.0));
    for x in 0..60 {
        for y in 9..12 {
            ell.set(x, y, 255);
        }
    }
    for y in 9..40 {
        for x in 58..61 {
            ell.set(x, y, 255);
        }
    }
    let ell_binary = binarize_median(&ell, 128, 3);
    let ell_skel = skeletonize(&ell_binary, SkeletonParams::default()).unwrap();
    let (ell_len, _) = crack_length(&ell_skel, MouthEdge::Left).unwrap();

    // idempotence on the already-thinned grid
    let again = skeletonize(&skel.grid, SkeletonParams::default()).unwrap();
    let set_a: Vec<_> = skel.grid.iter_set().collect();
    let set_b: Vec<_> = again.grid.iter_set().collect();

    // 1% salt over the strip image
    use rand::Rng;
    use rand_chacha::rand_core::SeedableRng;
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(17);
    let mut salted = strip.clone();
    for _ in 0..(120 * 40 / 100) {
        let x = rng.gen_range(0..120);
        let y = rng.gen_range(0..40);
        salted.set(x, y, 255);
    }
    let cleaned = binarize_median(&salted, 128, 3);
    let stray = cleaned
        .iter_set()
        .filter(|&(x, y)| !(x < 101 && (18..23).contains(&y)))
        .count();

    let dt = t0.elapsed().as_secs_f64();
    let ok = (strip_len - 100.0).abs() <= 2.0
        && (ell_len - 90.0).abs() <= 3.0
        && set_a == set_b
        && stray == 0
        && dt < 5.0;
    verdict(
        7,
        "crack extraction",
        ok,
        &format!(
            "strip {strip_len:.1}/100 px, L {ell_len:.1}/90 px, idempotent {}, \
             stray {stray}, {dt:.2} s",
            set_a == set_b
        ),
    );
}

#[test]
fn criterion_8_determinism() {
    let cfg = PipelineConfig::preset("ci", 42).unwrap();
    let dir = tempfile::tempdir().unwrap();
    let (run_a, run_b) = (dir.path().join("a"), dir.path().join("b"));
    run_pipeline(&cfg, &run_a).unwrap();
    run_pipeline(&cfg, &run_b).unwrap();

    let life_a = std::fs::read(run_a.join("macro/life_curve.csv")).unwrap();
    let life_b = std::fs::read(run_b.join("macro/life_curve.csv")).unwrap();
    let man_a = RunManifest::load(&run_a.join("manifest.json")).unwrap();
    let man_b = RunManifest::load(&run_b.join("manifest.json")).unwrap();
    let digests = |m: &RunManifest| {
        m.stages
            .iter()
            .map(|s| (s.name.clone(), s.inputs.clone(), s.outputs.clone()))
            .collect::<Vec<_>>()
    };
    let ok = life_a == life_b
        && man_a.config_digest == man_b.config_digest
        && digests(&man_a) == digests(&man_b);
    verdict(
        8,
        "determinism",
        ok,
        &format!(
            "life curve {} bytes, {} stages",
            life_a.len(),
            man_a.stages.len()
        ),
    );
}
