//! Acceptance gate. Runs without the libtest harness so every criterion
//! prints one PASS/FAIL line; exits non-zero if any criterion fails.

mod common;

use std::collections::BTreeMap;
use std::f64::consts::PI;
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::process::ExitCode;
use std::time::{Duration, Instant};

use common::*;
use morphfab_core::electronics::{
    candidate_orientations, place_electronics, test_containment, ElectronicsSpec, OrientationLevel,
};
use morphfab_core::fixtures;
use morphfab_core::mesh::{
    intersection_volume, make_box, marching_cubes, signed_distance, sweep_tube, SurfacePath, Vec3, VolumeField,
};
use morphfab_core::motor::{
    balance_objective, motor_score, scan_lattice, scan_motor_offset, Configuration, MotorSolverParams, MotorSpec,
};
use morphfab_core::pipeline::{
    batch_run, export_run, run_pipeline, PipelineConfig, PipelineRun, ReasonCode, Stage, StageStatus,
};
use morphfab_core::score::{
    aggregate, render_stage_table, score_cable, score_installability, BatchStats, ScoreTerms, ScoringParams,
};
use morphfab_core::voxel::MorphologySpec;
use morphfab_core::wire::path_metrics;
use nalgebra::Matrix3;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

type Check = Result<String, String>;
type Criterion = (&'static str, fn() -> Check);

fn ensure(cond: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(msg())
    }
}

fn within_budget(elapsed: Duration, budget: Duration) -> Result<(), String> {
    ensure(elapsed < budget, || format!("took {elapsed:.1?}, budget {budget:?}"))
}

fn relative_error(value: f64, expected: f64) -> f64 {
    (value - expected).abs() / expected.abs()
}

fn geometry_kernel() -> Check {
    let start = Instant::now();
    // closed surfaces from analytic occupancy
    let ball = VolumeField::from_fn(lattice([24, 24, 24], 1.0), |p| {
        f64::from((p - Vec3::repeat(12.0)).norm() <= 9.0)
    });
    let cube = VolumeField::from_fn(lattice([20, 20, 20], 1.0), |p| {
        f64::from((0..3).all(|a| (4.0..16.0).contains(&p[a])))
    });
    let torus = VolumeField::from_fn(lattice([32, 32, 16], 1.0), |p| {
        let q = p - Vec3::new(16.0, 16.0, 8.0);
        let ring = (q.x.hypot(q.y) - 9.0).hypot(q.z);
        f64::from(ring <= 4.0)
    });
    for (name, field, chi) in [("ball", &ball, 2), ("cube", &cube, 2), ("torus", &torus, 0)] {
        let mesh = marching_cubes(field, 0.5).map_err(|e| format!("{name}: {e}"))?;
        ensure(mesh.is_watertight(), || format!("{name} not watertight"))?;
        ensure(mesh.is_consistently_oriented(), || format!("{name} not consistently oriented"))?;
        let found = mesh.euler_characteristic();
        ensure(found == chi, || format!("{name}: Euler characteristic {found}, expected {chi}"))?;
    }

    // SDF against exhaustive search on small random grids
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    let mut worst: f64 = 0.0;
    for dims in [[16, 16, 16], [9, 13, 7], [16, 5, 11]] {
        let cell = rng.random_range(0.5..2.0);
        let field = VolumeField::from_fn(lattice(dims, cell), |_| 0.0);
        let mut field = field;
        for v in field.values.iter_mut() {
            *v = f64::from(rng.random_bool(0.35));
        }
        let fast = signed_distance(&field).map_err(|e| e.to_string())?;
        let slow = brute_force_sdf(&field);
        for (a, b) in fast.values.iter().zip(&slow) {
            worst = worst.max((a - b).abs());
        }
    }
    ensure(worst <= 1e-9, || format!("SDF differs from brute force by {worst:e}"))?;

    // overlapping cubes
    let half = Vec3::repeat(10.0);
    let a = make_box(&half).map_err(|e| e.to_string())?;
    let shift = Vec3::new(5.0, 3.0, 2.0);
    let b = a.translated(&shift);
    let analytic: f64 = (0..3).map(|k| 20.0 - shift[k]).product();
    let measured = intersection_volume(&a, &b, 1.0).map_err(|e| e.to_string())?;
    let cube_err = relative_error(measured, analytic);
    ensure(cube_err < 0.10, || format!("cube intersection {measured} vs {analytic}"))?;

    // straight tube is a capsule
    let (radius, length) = (3.0, 40.0);
    let path = SurfacePath::new(vec![Vec3::zeros(), Vec3::new(length, 0.0, 0.0)], "tube");
    let tube = sweep_tube(&path, radius, 0.5);
    let capsule = PI * radius * radius * length + 4.0 / 3.0 * PI * radius.powi(3);
    let tube_err = relative_error(tube.occupied_volume(), capsule);
    ensure(tube_err < 0.10, || format!("capsule volume {} vs {capsule}", tube.occupied_volume()))?;

    let elapsed = start.elapsed();
    within_budget(elapsed, Duration::from_secs(60))?;
    Ok(format!(
        "χ ball/cube/torus = 2/2/0, SDF max err {worst:.1e}, cube overlap err {:.1}%, capsule err {:.1}%, {elapsed:.1?}",
        100.0 * cube_err,
        100.0 * tube_err
    ))
}

fn motor_solver() -> Check {
    let start = Instant::now();
    let spec = MotorSpec::default();
    let params = MotorSolverParams::default();
    let slabs = two_slab(1.0);
    let step = 2.5;
    let scan_params = MotorSolverParams { scan_step: Some(step), ..params };
    let placement = scan_motor_offset(&slabs.a, &slabs.b, &slabs.joint, (0, 1), &spec, &scan_params, 2.5)
        .map_err(|e| e.to_string())?;

    // exhaustive argmax on a lattice ten times finer
    let range = scan_params.resolved_range(&spec);
    let mut best: Option<(f64, f64, Configuration)> = None;
    for configuration in Configuration::ALL {
        for delta in scan_lattice(range, step / 10.0) {
            let (v_h, v_c) = attachment_volumes(&slabs, configuration, delta, &spec);
            let score = oracle_score(v_h, v_c, &params);
            if score > 0.0 && best.is_none_or(|(s, _, _)| score > s) {
                best = Some((score, delta, configuration));
            }
        }
    }
    let (fine_score, fine_delta, fine_config) = best.ok_or("brute force found no feasible offset")?;
    ensure(placement.configuration == fine_config, || {
        format!("configuration {:?} vs brute force {fine_config:?}", placement.configuration)
    })?;
    let gap = (placement.offset - fine_delta).abs();
    ensure(gap <= step + 1e-9, || format!("δ* = {} vs brute force {fine_delta} (step {step})", placement.offset))?;

    // the indicator, on every sample of the scan and on random pairs
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let mut pointwise = 0;
    for s in &placement.curves {
        if s.v_h.min(s.v_c) < params.tau {
            ensure(s.score == 0.0, || format!("sample at δ={} scored {} below tau", s.delta, s.score))?;
            pointwise += 1;
        }
    }
    for _ in 0..1000 {
        let v_h = rng.random_range(0.0..2.0 * params.tau);
        let v_c = rng.random_range(0.0..2.0 * params.tau);
        let s = motor_score(v_h, v_c, params.tau, params.balance_weight);
        if v_h.min(v_c) < params.tau {
            ensure(s == 0.0, || format!("S({v_h}, {v_c}) = {s} below tau"))?;
            pointwise += 1;
        } else {
            ensure(s > 0.0, || format!("S({v_h}, {v_c}) = 0 above tau"))?;
        }
    }

    // symmetry and monotonicity of the balance objective
    for _ in 0..1000 {
        let v_h = rng.random_range(0.0..1e5);
        let v_c = rng.random_range(0.0..1e5);
        let bump = rng.random_range(0.0..1e4);
        let alpha = params.balance_weight;
        let g = balance_objective(v_h, v_c, alpha);
        ensure((g - balance_objective(v_c, v_h, alpha)).abs() <= 1e-9 * g.max(1.0), || {
            format!("g not symmetric at ({v_h}, {v_c})")
        })?;
        ensure(balance_objective(v_h + bump, v_c, alpha) >= g, || format!("g decreases in V_h at ({v_h}, {v_c})"))?;
        ensure(balance_objective(v_h, v_c + bump, alpha) >= g, || format!("g decreases in V_c at ({v_h}, {v_c})"))?;
    }

    let elapsed = start.elapsed();
    within_budget(elapsed, Duration::from_secs(30))?;
    Ok(format!(
        "δ* = {:.2} mm vs brute force {fine_delta:.2} mm (S {:.0} vs {fine_score:.0}), {pointwise} sub-τ samples zero, g checked on 1000 pairs, {elapsed:.1?}",
        placement.offset, placement.score
    ))
}

fn stage_failure(run: &PipelineRun) -> Option<(Stage, ReasonCode)> {
    run.reports.iter().find_map(|r| match &r.status {
        StageStatus::Failure { reason, .. } => Some((r.stage, *reason)),
        StageStatus::Success => None,
    })
}

fn electronics_solver() -> Check {
    let start = Instant::now();
    // containment is monotone in clearance
    let part = box_field(Vec3::new(40.0, 30.0, 20.0), Vec3::new(40.0, 30.0, 20.0), Matrix3::identity(), 1.0);
    let sdf = signed_distance(&part).map_err(|e| e.to_string())?;
    let rotations = candidate_orientations(OrientationLevel::Fine);
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let clearances: Vec<f64> = (0..=20).map(|k| 10.0 - 0.5 * f64::from(k)).collect();
    let mut flips = 0;
    for _ in 0..200 {
        let extents = Vec3::new(rng.random_range(5.0..50.0), rng.random_range(5.0..40.0), rng.random_range(3.0..25.0));
        let rotation = rotations[rng.random_range(0..rotations.len())];
        let center = Vec3::new(rng.random_range(20.0..60.0), rng.random_range(15.0..45.0), rng.random_range(10.0..30.0));
        let mut seen_true = false;
        for &c in &clearances {
            let fits = test_containment(&sdf, &extents, &rotation, &center, c);
            ensure(fits || !seen_true, || format!("containment lost when clearance dropped to {c}"))?;
            if fits && !seen_true {
                flips += 1;
            }
            seen_true |= fits;
        }
    }
    ensure(flips > 0, || "no sampled pose ever fit; monotonicity untested".into())?;

    // the coarse set is the rotation group of the cube
    let group = candidate_orientations(OrientationLevel::Coarse);
    ensure(group.len() == 24, || format!("{} coarse rotations", group.len()))?;
    let find = |m: &Matrix3<f64>| group.iter().position(|g| (g - m).abs().max() < 1e-9);
    for r in &group {
        ensure((r * r.transpose() - Matrix3::identity()).abs().max() < 1e-9, || "rotation not orthonormal".into())?;
        ensure((r.determinant() - 1.0).abs() < 1e-9, || "rotation with det != 1".into())?;
        for s in &group {
            ensure(find(&(r * s)).is_some(), || "coarse set not closed under composition".into())?;
        }
    }
    for (i, r) in group.iter().enumerate() {
        ensure(find(r) == Some(i), || "duplicate coarse rotation".into())?;
    }
    ensure(find(&Matrix3::identity()).is_some(), || "identity missing".into())?;

    // a solid slab hosts both boxes at its center of mass
    let slab = box_part("rigid_0", Vec3::new(0.0, 0.0, 0.0), Vec3::new(80.0, 60.0, 30.0), 2.5);
    let small = box_part("rigid_1", Vec3::new(0.0, 100.0, 0.0), Vec3::new(20.0, 20.0, 20.0), 2.5);
    let com = slab.field.occupied_centroid().ok_or("empty slab")?;
    let parts = single_part_map(vec![slab, small]);
    let placed = place_electronics(&parts, &ElectronicsSpec::default()).map_err(|e| e.to_string())?;
    ensure(placed.placements.len() == 2, || format!("{} placements", placed.placements.len()))?;
    for p in &placed.placements {
        ensure(p.segment == 0, || format!("{} placed on segment {}", p.component, p.segment))?;
        ensure((p.position - com).norm() < 1e-9, || format!("{} anchor {:?} is not the CoM {com:?}", p.component, p.position))?;
    }

    // thin limbs cannot host the controller
    let run = run_pipeline(&fixtures::thin_limb(), &PipelineConfig::default()).map_err(|e| e.to_string())?;
    let failure = stage_failure(&run);
    ensure(matches!(failure, Some((Stage::Electronics, _))), || format!("thin limb ended with {failure:?}"))?;

    let elapsed = start.elapsed();
    within_budget(elapsed, Duration::from_secs(30))?;
    Ok(format!(
        "monotone over 200 poses x 21 clearances, 24 rotations form a group, slab anchors at CoM, thin limb fails at {} ({}), {elapsed:.1?}",
        Stage::Electronics,
        failure.map_or("", |(_, r)| r.as_str())
    ))
}

fn wire_solver() -> Check {
    let start = Instant::now();
    let config = PipelineConfig::default();
    let mut routes = 0;
    let mut slack = f64::INFINITY;
    let named: [(&str, MorphologySpec); 5] = [
        ("tripod", fixtures::tripod()),
        ("quadruped", fixtures::quadruped()),
        ("block_and_bar", fixtures::block_and_bar()),
        ("chain", fixtures::chain()),
        ("single_block", fixtures::single_block()),
    ];
    for (name, spec) in &named {
        let run = run_pipeline(spec, &config).map_err(|e| e.to_string())?;
        ensure(run.is_blueprint(), || format!("{name} did not complete: {:?}", stage_failure(&run)))?;
        for r in &run.wires.as_ref().ok_or("no wire solution")?.routes {
            let straight = (r.start.position - r.end.position).norm();
            ensure(r.length >= straight - 1e-9, || format!("{name} joint {}: {} < {straight}", r.joint, r.length))?;
            slack = slack.min(r.length - straight);
            routes += 1;
        }
    }

    let radius = 10.0;
    let mut worst: f64 = 0.0;
    for n in [32, 48, 64, 128, 256] {
        let pts = (0..=n)
            .map(|k| {
                let t = 2.0 * PI * f64::from(k) / f64::from(n);
                Vec3::new(radius * t.cos(), radius * t.sin(), 0.0)
            })
            .collect();
        let (_, kappa) = path_metrics(&SurfacePath::new(pts, "circle"));
        worst = worst.max(relative_error(kappa, 1.0 / radius));
    }
    ensure(worst < 0.05, || format!("circle curvature off by {:.2}%", 100.0 * worst))?;

    let mut no_bridge = config.clone();
    no_bridge.wire.bridge_voxels = 0.0;
    let run = run_pipeline(&fixtures::chain(), &no_bridge).map_err(|e| e.to_string())?;
    let failure = stage_failure(&run);
    ensure(failure == Some((Stage::Wire, ReasonCode::DisconnectedRoute)), || {
        format!("unbridged chain ended with {failure:?}")
    })?;

    let elapsed = start.elapsed();
    within_budget(elapsed, Duration::from_secs(30))?;
    Ok(format!(
        "{routes} routes on 5 fixtures all ≥ straight line (min slack {slack:.2} mm), circle κ err {:.2}%, unbridged chain fails at wire, {elapsed:.1?}",
        100.0 * worst
    ))
}

fn scoring() -> Check {
    let params = ScoringParams::default();
    let at_origin = score_cable(0.0, 0.0, &params);
    ensure(at_origin == 1.0 + params.cable_alpha, || format!("S_cable(0,0) = {at_origin}"))?;
    let lambda = params.inst_lambda;
    for (volume, expected) in [(0.0, 1.0), (lambda, (-1.0f64).exp()), (2.0 * lambda, (-2.0f64).exp()), (0.5 * lambda, (-0.5f64).exp())] {
        let found = score_installability(volume, lambda);
        ensure((found - expected).abs() <= 1e-12, || format!("installability({volume}) = {found}, expected {expected}"))?;
    }

    let mut rng = ChaCha8Rng::seed_from_u64(17);
    for _ in 0..1000 {
        let mut raw = [0.0f64; 5];
        raw[0] = rng.random_range(0.0..12000.0);
        raw[1] = rng.random_range(0.0..35.0);
        raw[2] = rng.random_range(0.0..1.6);
        raw[3] = rng.random_range(0.0..1.0);
        raw[4] = rng.random_range(0.0..1.0);
        let term = rng.random_range(0..5);
        let mut bumped = raw;
        bumped[term] += rng.random_range(0.0..[500.0, 3.0, 0.2, 0.1, 0.1][term]);
        if term >= 3 {
            bumped[term] = bumped[term].min(1.0);
        }
        let terms = |r: [f64; 5]| ScoreTerms { s_motor: r[0], s_elec: r[1], s_cable: r[2], s_elec_inst: r[3], s_body_inst: r[4] };
        let before = aggregate(terms(raw), &params).s_mfg;
        let after = aggregate(terms(bumped), &params).s_mfg;
        ensure(after >= before, || format!("raising term {term} lowered s_mfg: {raw:?} -> {bumped:?}"))?;
    }

    let batch_start = Instant::now();
    let designs: Vec<(String, MorphologySpec)> = (0..50).map(|s| (format!("gen_{s:02}"), fixtures::generate(s, 64))).collect();
    let result = batch_run(&designs, &PipelineConfig::default(), 1).map_err(|e| e.to_string())?;
    let batch_time = batch_start.elapsed();
    let s = &result.stats;
    ensure(s.n_tot == 50, || format!("n_tot = {}", s.n_tot))?;
    ensure(s.n_tot == s.n_succ + s.n_fail_motor + s.n_fail_elec + s.n_fail_cable, || format!("partition broken: {s:?}"))?;
    ensure(s.histogram.counts.iter().sum::<usize>() == s.n_succ, || "histogram does not count every success".into())?;
    within_budget(batch_time, Duration::from_secs(120))?;

    let table = render_stage_table(&BatchStats::from_counts(10000, 1076, 2215, 13).map_err(|e| e.to_string())?);
    for expected in ["89.24%", "77.85%", "99.87%", "66.96%"] {
        ensure(table.contains(expected), || format!("table lacks {expected}:\n{table}"))?;
    }

    Ok(format!(
        "S_cable(0,0) = {at_origin}, e⁻¹ at V = λ, aggregate monotone on 1000 bumps, 50-design batch {} = {} + {} + {} + {} in {batch_time:.1?}, table renders 89.24/77.85/99.87/66.96",
        s.n_tot, s.n_succ, s.n_fail_motor, s.n_fail_elec, s.n_fail_cable
    ))
}

fn blueprint_bytes(run: &PipelineRun, config: &PipelineConfig) -> Result<BTreeMap<String, Vec<u8>>, String> {
    let dir = tempfile::tempdir().map_err(|e| e.to_string())?;
    export_run(run, config, dir.path()).map_err(|e| e.to_string())?;
    let mut files = BTreeMap::new();
    for entry in std::fs::read_dir(dir.path()).map_err(|e| e.to_string())? {
        let path = entry.map_err(|e| e.to_string())?.path();
        let name = path.file_name().unwrap().to_string_lossy().into_owned();
        files.insert(name, std::fs::read(&path).map_err(|e| e.to_string())?);
    }
    Ok(files)
}

fn determinism() -> Check {
    let start = Instant::now();
    let spec = fixtures::tripod();
    let config = PipelineConfig::default();
    let run_with = |threads: usize| -> Result<BTreeMap<String, Vec<u8>>, String> {
        let pool = rayon::ThreadPoolBuilder::new().num_threads(threads).build().map_err(|e| e.to_string())?;
        let run = pool.install(|| run_pipeline(&spec, &config)).map_err(|e| e.to_string())?;
        ensure(run.is_blueprint(), || format!("tripod failed: {:?}", stage_failure(&run)))?;
        blueprint_bytes(&run, &config)
    };
    let first = run_with(1)?;
    let again = run_with(1)?;
    let wide = run_with(8)?;
    let stl = first.keys().filter(|k| k.ends_with(".stl")).count();
    ensure(stl == 5, || format!("{stl} STL files: {:?}", first.keys().collect::<Vec<_>>()))?;
    ensure(first.contains_key("report.json"), || "report.json missing".into())?;
    for (label, other) in [("rerun", &again), ("8 threads", &wide)] {
        ensure(first.keys().eq(other.keys()), || format!("{label}: different file set"))?;
        for (name, bytes) in &first {
            ensure(&other[name] == bytes, || format!("{label}: {name} differs"))?;
        }
    }
    let elapsed = start.elapsed();
    within_budget(elapsed, Duration::from_secs(300))?;
    Ok(format!("{} files byte-identical across reruns and 1 vs 8 threads ({stl} STL), {elapsed:.1?}", first.len()))
}

fn main() -> ExitCode {
    let criteria: [Criterion; 6] = [
        ("geometry kernel", geometry_kernel),
        ("motor solver", motor_solver),
        ("electronics solver", electronics_solver),
        ("wire solver", wire_solver),
        ("scoring", scoring),
        ("end-to-end determinism", determinism),
    ];
    let mut failed = 0;
    for (name, check) in criteria {
        let outcome = catch_unwind(AssertUnwindSafe(check)).unwrap_or_else(|panic| {
            let msg = panic
                .downcast_ref::<String>()
                .cloned()
                .or_else(|| panic.downcast_ref::<&str>().map(|s| s.to_string()))
                .unwrap_or_default();
            Err(format!("panicked: {msg}"))
        });
        match outcome {
            Ok(detail) => println!("PASS  {name}: {detail}"),
            Err(detail) => {
                failed += 1;
                println!("FAIL  {name}: {detail}");
            }
        }
    }
    println!("acceptance: {} passed, {failed} failed", criteria.len() - failed);
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
