//! The four pipeline stages and the orchestration that chains them.
//!
//! Every stage reads files written by the previous one rather than
//! passing values in memory, so a user can drop in a replacement for any
//! intermediate artifact and rerun from there.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::path::Path;
use std::time::Instant;

use super::config::{MacroSection, PipelineConfig};
use super::manifest::{
    digest_bytes, digest_file, outputs_intact, RunManifest, StageRecord, StageStatus,
};
use super::PipelineError;
use crate::md::{
    build_rve, relax, run_cyclic_loading, virial_stress, write_xyz_extended, CrackSpec,
    EmitParams, LoadProgram, MdError, NeighborList, PairPotential, RelaxParams, RveParams,
};
use crate::paris::{
    fit_paris, growth_points, CycleSample, DeltaKWindow, ParisConstants, UnitSystem,
};
use crate::vision::{
    binarize_median, mask_extent, skeletonize, ContourRaster, MouthEdge, SkeletonParams,
};
use crate::xfem::{run_fatigue, write_vtk, FatigueConfig, Material};

/// Å → mm.
const ANGSTROM_TO_MM: f64 = 1e-7;
/// GPa → MPa.
const GPA_TO_MPA: f64 = 1e3;

fn err_md(e: impl std::fmt::Display) -> PipelineError {
    PipelineError::stage("md_rve", e)
}

/// Run the cyclic micro model; writes `md/cycles.csv`, one raster PNG
/// per emitted cycle and the final snapshot.
pub fn stage_md(cfg: &PipelineConfig, root: &Path) -> Result<Vec<String>, PipelineError> {
    let dir = root.join("md");
    std::fs::create_dir_all(&dir)?;
    let params = RveParams {
        box_dims: cfg.rve.box_dims,
        lattice_constant: cfg.rve.lattice_constant,
        c_fraction: cfg.rve.c_fraction,
        vacancy_fraction: cfg.rve.vacancy_fraction,
        crack: CrackSpec {
            length: cfg.rve.crack_length,
            kind: cfg.rve.crack_kind,
        },
        seed: cfg.run.seed,
        fixed_planes: cfg.rve.fixed_planes,
    };
    let mut system = build_rve(&params).map_err(err_md)?;
    let potential = PairPotential::fe_default();
    let mut neighbors = NeighborList::build(&system, potential.r_cut, 0.5 * potential.r0);
    match relax(
        &mut system,
        &potential,
        &mut neighbors,
        RelaxParams {
            tolerance: 0.05,
            max_steps: 2000,
            dt: 0.002,
        },
    ) {
        Ok(_) | Err(MdError::RelaxationFailed { .. }) => {}
        Err(e) => return Err(err_md(e)),
    }

    let mut program = LoadProgram::ramp_power(
        cfg.load.peak_start,
        cfg.load.peak_end,
        cfg.load.cycles,
        cfg.load.load_ratio,
        cfg.load.peak_exponent,
    );
    program.strain_rate_per_ps = cfg.load.strain_rate_per_ps;
    program.dt = cfg.load.dt;
    program.temperature_k = cfg.rve.temperature_k;
    program.seed = cfg.run.seed;
    let mut emit = EmitParams::for_lattice(cfg.rve.lattice_constant);
    emit.every = cfg.load.emit_every;
    emit.resolution = cfg.extract.resolution;
    emit.disc_radius = cfg.extract.disc_radius;
    emit.median_window = cfg.extract.median_window;
    emit.binarize_threshold = cfg.extract.binarize_threshold;
    emit.keep_rasters = true;
    let records =
        run_cyclic_loading(&mut system, &potential, &program, &emit).map_err(err_md)?;

    let mut outputs = Vec::new();
    let mut csv = String::from(
        "cycle,peak_strain,sigma_y_tip_GPa,crack_len_A,sigma_y_min_GPa,\
         sigma_y_far_GPa,sigma_y_far_min_GPa\n",
    );
    for r in &records {
        let len = r
            .crack_length
            .map(|v| format!("{v:.9e}"))
            .unwrap_or_else(|| "nan".into());
        let _ = writeln!(
            csv,
            "{},{:.9e},{:.9e},{},{:.9e},{:.9e},{:.9e}",
            r.cycle,
            r.peak_strain,
            r.sigma_yy_peak_gpa,
            len,
            r.sigma_yy_valley_gpa,
            r.sigma_far_peak_gpa,
            r.sigma_far_valley_gpa
        );
        if let Some(raster) = &r.raster {
            let rel = format!("md/raster_{:04}.png", r.cycle);
            raster
                .save(&root.join(&rel))
                .map_err(err_md)?;
            outputs.push(rel);
        }
    }
    std::fs::write(dir.join("cycles.csv"), csv)?;
    outputs.push("md/cycles.csv".into());

    neighbors.ensure(&system);
    let stress = virial_stress(&system, &potential, &neighbors).map_err(err_md)?;
    write_xyz_extended(&dir.join("final.xyz"), &system, &stress.von_mises).map_err(err_md)?;
    outputs.push("md/final.xyz".into());
    outputs.sort();
    Ok(outputs)
}

/// Measure crack length on every raster; writes `extract/lengths.csv`
/// and a skeleton overlay per frame. Rasters are processed one at a
/// time.
pub fn stage_extract(cfg: &PipelineConfig, root: &Path) -> Result<Vec<String>, PipelineError> {
    let stage = "crack_vision";
    let dir = root.join("extract");
    std::fs::create_dir_all(&dir)?;
    let mut frames: Vec<(u64, std::path::PathBuf)> = Vec::new();
    for entry in std::fs::read_dir(root.join("md"))? {
        let path = entry?.path();
        let name = path.file_name().and_then(|n| n.to_str()).unwrap_or("");
        if let Some(num) = name
            .strip_prefix("raster_")
            .and_then(|s| s.strip_suffix(".png"))
        {
            if let Ok(frame) = num.parse::<u64>() {
                frames.push((frame, path));
            }
        }
    }
    frames.sort();
    if frames.is_empty() {
        return Err(PipelineError::stage(stage, "no rasters found under md/"));
    }

    let mut outputs = Vec::new();
    let mut csv = String::from("frame,crack_len_A,tip_x_A,tip_y_A\n");
    let mut measured = 0usize;
    for (frame, path) in &frames {
        let raster = ContourRaster::load(path, cfg.extract.resolution, (0.0, 0.0))
            .map_err(|e| PipelineError::stage(stage, e))?;
        let binary = binarize_median(
            &raster,
            cfg.extract.binarize_threshold,
            cfg.extract.median_window,
        );
        // reach of the whole mask: robust on fragmented late-life frames
        // where the largest skeleton component misses half the crack
        let (len, tip) = match mask_extent(&binary, MouthEdge::Left) {
            Ok(v) => v,
            Err(_) => continue,
        };
        let _ = writeln!(csv, "{frame},{len:.9e},{:.9e},{:.9e}", tip.0, tip.1);
        measured += 1;
        if let Ok(skel) = skeletonize(&binary, SkeletonParams::default()) {
            let rel = format!("extract/overlay_{frame:04}.png");
            skel.save_overlay(&raster, &root.join(&rel))
                .map_err(|e| PipelineError::stage(stage, e))?;
            outputs.push(rel);
        }
    }
    if measured == 0 {
        return Err(PipelineError::stage(stage, "no frame yielded a crack skeleton"));
    }
    std::fs::write(dir.join("lengths.csv"), csv)?;
    outputs.push("extract/lengths.csv".into());
    outputs.sort();
    Ok(outputs)
}

fn parse_csv(path: &Path, stage: &str) -> Result<Vec<Vec<String>>, PipelineError> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| PipelineError::stage(stage, format!("{path:?}: {e}")))?;
    Ok(text
        .lines()
        .skip(1)
        .filter(|l| !l.trim().is_empty())
        .map(|l| l.split(',').map(|f| f.trim().to_string()).collect())
        .collect())
}

fn field<T: std::str::FromStr>(row: &[String], idx: usize, stage: &str) -> Result<T, PipelineError> {
    row.get(idx)
        .and_then(|f| f.parse().ok())
        .ok_or_else(|| PipelineError::stage(stage, format!("bad CSV field {idx} in {row:?}")))
}

/// Join stresses and lengths into cycle samples and fit the growth law;
/// writes `fit/paris.json` and the regression points.
pub fn stage_fit(cfg: &PipelineConfig, root: &Path) -> Result<Vec<String>, PipelineError> {
    let stage = "paris_fit";
    let dir = root.join("fit");
    std::fs::create_dir_all(&dir)?;

    let mut stresses: BTreeMap<u64, (f64, f64)> = BTreeMap::new();
    for row in parse_csv(&root.join("md/cycles.csv"), stage)? {
        let cycle: u64 = field(&row, 0, stage)?;
        // ΔK is a far-field quantity: use the remote stress columns, not
        // the tip samples, which saturate once the tip yields
        let peak: f64 = field(&row, 5, stage)?;
        let valley: f64 = field(&row, 6, stage)?;
        stresses.insert(cycle, (peak, valley));
    }
    let mut samples = Vec::new();
    for row in parse_csv(&root.join("extract/lengths.csv"), stage)? {
        let frame: u64 = field(&row, 0, stage)?;
        let len_a: f64 = field(&row, 1, stage)?;
        if let Some(&(peak, valley)) = stresses.get(&frame) {
            let sigma_max = peak * GPA_TO_MPA;
            samples.push(CycleSample {
                cycle: frame as f64,
                crack_length: len_a * ANGSTROM_TO_MM,
                sigma_max,
                // compressive valleys close the crack and do not drive it
                sigma_min: (valley * GPA_TO_MPA).clamp(0.0, sigma_max.max(0.0)),
            });
        }
    }
    samples.sort_by(|a, b| a.cycle.partial_cmp(&b.cycle).unwrap());

    let window = DeltaKWindow {
        min: cfg.fit.window_min.unwrap_or(0.0),
        max: cfg.fit.window_max.unwrap_or(f64::INFINITY),
    };
    let points = growth_points(&samples, window)
        .map_err(|e| PipelineError::stage(stage, format!("no growth points: {e}")))?;
    let constants = fit_paris(&points, UnitSystem::MpaSqrtMm)
        .map_err(|e| PipelineError::stage(stage, e))?;

    let mut pts_csv = String::from("delta_k,dadn\n");
    for p in &points {
        let _ = writeln!(pts_csv, "{:.9e},{:.9e}", p.delta_k, p.dadn);
    }
    std::fs::write(dir.join("growth_points.csv"), pts_csv)?;
    std::fs::write(
        dir.join("paris.json"),
        serde_json::to_string_pretty(&constants).expect("constants serialize"),
    )?;
    Ok(vec![
        "fit/growth_points.csv".into(),
        "fit/paris.json".into(),
    ])
}

pub fn load_paris(path: &Path) -> Result<ParisConstants, PipelineError> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| PipelineError::stage("xfem_core", format!("{path:?}: {e}")))?;
    serde_json::from_str(&text).map_err(|e| PipelineError::stage("xfem_core", e))
}

/// Macro life prediction; writes the life curve, the crack path and
/// field snapshots.
pub fn stage_macro(cfg: &MacroSection, root: &Path) -> Result<Vec<String>, PipelineError> {
    let stage = "xfem_core";
    let dir = root.join("macro");
    std::fs::create_dir_all(&dir)?;
    let paris = match &cfg.constants {
        Some(c) => ParisConstants::new(c.c, c.m, c.unit_system()?),
        None => load_paris(&root.join("fit/paris.json"))?,
    };
    let fatigue = FatigueConfig {
        width: cfg.width,
        height: cfg.height,
        a0: cfg.a0,
        elem_size: cfg.elem_size,
        material: Material {
            youngs_mpa: cfg.youngs_mpa,
            poisson: cfg.poisson,
        },
        sigma_max_mpa: cfg.sigma_max_mpa,
        sigma_min_mpa: cfg.sigma_min_mpa,
        paris,
        da: cfg.da,
        max_steps: cfg.max_steps,
    };

    let mut outputs: Vec<String> = Vec::new();
    let mut targets = cfg.snapshots.clone();
    targets.sort_by(|a, b| a.partial_cmp(b).unwrap());
    let mut next_target = 0usize;
    let mut snapshot_err = None;
    let mut last_solution = None;
    let mut on_step = |_step: usize, cycles: f64, sol: &crate::xfem::Solution| {
        while next_target < targets.len() && cycles >= targets[next_target] {
            let rel = format!("macro/snapshot_{:.0}.vtk", targets[next_target]);
            if let Err(e) = write_vtk(sol, &root.join(&rel)) {
                snapshot_err = Some(e);
            } else {
                outputs.push(rel);
            }
            next_target += 1;
        }
        last_solution = Some(sol.clone());
    };
    let outcome =
        run_fatigue(&fatigue, Some(&mut on_step)).map_err(|e| PipelineError::stage(stage, e))?;
    if let Some(e) = snapshot_err {
        return Err(PipelineError::stage(stage, e));
    }
    if let Some(sol) = &last_solution {
        write_vtk(sol, &root.join("macro/final.vtk"))
            .map_err(|e| PipelineError::stage(stage, e))?;
        outputs.push("macro/final.vtk".into());
    }

    let mut life = String::from("step,N,a_mm,dK,K_I,K_II,theta_deg\n");
    for s in &outcome.steps {
        let _ = writeln!(
            life,
            "{},{:.9e},{:.9e},{:.9e},{:.9e},{:.9e},{:.9e}",
            s.step, s.cycles, s.a, s.delta_k, s.k1_fem, s.k2_fem, s.kink_deg
        );
    }
    std::fs::write(dir.join("life_curve.csv"), life)?;
    outputs.push("macro/life_curve.csv".into());

    let mut path_csv = String::from("x_mm,y_mm\n");
    for p in &outcome.path {
        let _ = writeln!(path_csv, "{:.9e},{:.9e}", p[0], p[1]);
    }
    std::fs::write(dir.join("crack_path.csv"), path_csv)?;
    outputs.push("macro/crack_path.csv".into());

    std::fs::write(
        dir.join("outcome.json"),
        serde_json::to_string_pretty(&outcome).expect("outcome serializes"),
    )?;
    outputs.push("macro/outcome.json".into());
    outputs.sort();
    Ok(outputs)
}

fn run_stage(
    man: &mut RunManifest,
    prev: Option<&RunManifest>,
    root: &Path,
    name: &str,
    inputs: BTreeMap<String, String>,
    exec: impl FnOnce() -> Result<Vec<String>, PipelineError>,
) -> Result<(), PipelineError> {
    if let Some(old) = prev.and_then(|p| p.stage(name)) {
        if old.status != StageStatus::Provided && old.inputs == inputs && outputs_intact(old, root)
        {
            man.stages.push(StageRecord {
                name: name.into(),
                status: StageStatus::Cached,
                inputs,
                outputs: old.outputs.clone(),
                wall_ms: 0,
            });
            return Ok(());
        }
    }
    let start = Instant::now();
    let outputs = exec()?;
    let mut digests = BTreeMap::new();
    for rel in outputs {
        let d = digest_file(&root.join(&rel))?;
        digests.insert(rel, d);
    }
    man.stages.push(StageRecord {
        name: name.into(),
        status: StageStatus::Ran,
        inputs,
        outputs: digests,
        wall_ms: start.elapsed().as_millis(),
    });
    Ok(())
}

fn provided_stage(
    man: &mut RunManifest,
    root: &Path,
    name: &str,
    outputs: &[&str],
) -> Result<(), PipelineError> {
    let mut digests = BTreeMap::new();
    for rel in outputs {
        if root.join(rel).exists() {
            digests.insert(rel.to_string(), digest_file(&root.join(rel))?);
        }
    }
    man.stages.push(StageRecord {
        name: name.into(),
        status: StageStatus::Provided,
        inputs: BTreeMap::new(),
        outputs: digests,
        wall_ms: 0,
    });
    Ok(())
}

fn stage_outputs(man: &RunManifest, name: &str) -> BTreeMap<String, String> {
    man.stage(name)
        .map(|s| s.outputs.clone())
        .unwrap_or_default()
}

/// Execute all four stages under `out_dir`, reusing cached artifacts
/// where digests prove them current, and write `manifest.json`.
pub fn run_pipeline(cfg: &PipelineConfig, out_dir: &Path) -> Result<RunManifest, PipelineError> {
    cfg.validate()?;
    std::fs::create_dir_all(out_dir)?;
    let cfg_toml = cfg.to_toml();
    std::fs::write(out_dir.join("config.toml"), &cfg_toml)?;
    let prev = RunManifest::load(&out_dir.join("manifest.json"));
    let mut man = RunManifest::new(cfg.run.seed, digest_bytes(cfg_toml.as_bytes()));

    let d_micro = digest_bytes(
        format!("{:?}|{:?}|{:?}|{}", cfg.rve, cfg.load, cfg.extract, cfg.run.seed).as_bytes(),
    );
    let d_extract = digest_bytes(format!("{:?}", cfg.extract).as_bytes());
    let d_fit = digest_bytes(format!("{:?}", cfg.fit).as_bytes());
    let d_macro = digest_bytes(format!("{:?}", cfg.macro_).as_bytes());

    // user-supplied downstream artifacts skip everything before them
    let have_md = out_dir.join("md/cycles.csv").exists();
    let paris_provided =
        out_dir.join("fit/paris.json").exists() && !have_md && cfg.macro_.constants.is_none();
    let lengths_provided = out_dir.join("extract/lengths.csv").exists() && !have_md;

    if paris_provided {
        provided_stage(&mut man, out_dir, "md_rve", &[])?;
        provided_stage(&mut man, out_dir, "crack_vision", &[])?;
        provided_stage(&mut man, out_dir, "paris_fit", &["fit/paris.json"])?;
    } else if lengths_provided {
        provided_stage(&mut man, out_dir, "md_rve", &[])?;
        provided_stage(&mut man, out_dir, "crack_vision", &["extract/lengths.csv"])?;
    } else {
        run_stage(
            &mut man,
            prev.as_ref(),
            out_dir,
            "md_rve",
            BTreeMap::from([("config".to_string(), d_micro.clone())]),
            || stage_md(cfg, out_dir),
        )?;
        let mut in_extract = stage_outputs(&man, "md_rve");
        in_extract.insert("config".into(), d_extract.clone());
        run_stage(
            &mut man,
            prev.as_ref(),
            out_dir,
            "crack_vision",
            in_extract,
            || stage_extract(cfg, out_dir),
        )?;
    }
    if !paris_provided {
        let mut in_fit = stage_outputs(&man, "crack_vision");
        in_fit.extend(stage_outputs(&man, "md_rve"));
        in_fit.insert("config".into(), d_fit.clone());
        run_stage(&mut man, prev.as_ref(), out_dir, "paris_fit", in_fit, || {
            stage_fit(cfg, out_dir)
        })?;
    }
    let mut in_macro = stage_outputs(&man, "paris_fit");
    in_macro.insert("config".into(), d_macro);
    run_stage(&mut man, prev.as_ref(), out_dir, "xfem_core", in_macro, || {
        stage_macro(&cfg.macro_, out_dir)
    })?;

    man.save(&out_dir.join("manifest.json"))?;
    Ok(man)
}

/// One row of the micro-constants comparison table.
#[derive(Debug, Clone, serde::Serialize)]
pub struct CompareRow {
    pub model: String,
    pub material: String,
    pub crack_kind: String,
    pub m: Option<f64>,
    pub c: Option<f64>,
    pub r_squared: Option<f64>,
    pub error: Option<String>,
}

/// The four canonical micro variants: {pure, defected} × {blunt, sharp}.
pub fn standard_variants(base: &PipelineConfig) -> Vec<(String, PipelineConfig)> {
    let mut out = Vec::new();
    for (model, defected, kind) in [
        ("A", false, crate::md::CrackKind::Blunt),
        ("B", false, crate::md::CrackKind::Sharp),
        ("C", true, crate::md::CrackKind::Blunt),
        ("D", true, crate::md::CrackKind::Sharp),
    ] {
        let mut cfg = base.clone();
        cfg.run.name = format!("{}-{model}", base.run.name);
        cfg.rve.crack_kind = kind;
        if defected {
            cfg.rve.c_fraction = 0.01;
            cfg.rve.vacancy_fraction = 0.005;
        }
        out.push((format!("model_{model}"), cfg));
    }
    out
}

/// Run the micro half (md → extract → fit) for each variant and emit a
/// constants table. Per-variant failures become table rows; the run
/// continues.
pub fn compare_models(
    variants: &[(String, PipelineConfig)],
    out_root: &Path,
) -> Result<Vec<CompareRow>, PipelineError> {
    std::fs::create_dir_all(out_root)?;
    let mut rows = Vec::new();
    for (name, cfg) in variants {
        let root = out_root.join(name);
        std::fs::create_dir_all(&root)?;
        let material = if cfg.rve.c_fraction > 0.0 || cfg.rve.vacancy_fraction > 0.0 {
            "defected"
        } else {
            "pure Fe"
        };
        let crack_kind = format!("{:?}", cfg.rve.crack_kind).to_lowercase();
        let result = stage_md(cfg, &root)
            .and_then(|_| stage_extract(cfg, &root))
            .and_then(|_| stage_fit(cfg, &root))
            .and_then(|_| load_paris(&root.join("fit/paris.json")));
        let row = match result {
            Ok(p) => CompareRow {
                model: name.clone(),
                material: material.into(),
                crack_kind,
                m: Some(p.m),
                c: Some(p.c),
                r_squared: p.diagnostics.map(|d| d.r_squared),
                error: None,
            },
            Err(e) => CompareRow {
                model: name.clone(),
                material: material.into(),
                crack_kind,
                m: None,
                c: None,
                r_squared: None,
                error: Some(e.to_string()),
            },
        };
        rows.push(row);
    }
    let mut csv = String::from("model,material,crack_kind,m,C,r_squared,status\n");
    for r in &rows {
        let fmt = |v: Option<f64>| v.map(|x| format!("{x:.9e}")).unwrap_or_default();
        let _ = writeln!(
            csv,
            "{},{},{},{},{},{},{}",
            r.model,
            r.material,
            r.crack_kind,
            fmt(r.m),
            fmt(r.c),
            fmt(r.r_squared),
            r.error.clone().unwrap_or_else(|| "ok".into())
        );
    }
    std::fs::write(out_root.join("compare.csv"), csv)?;
    Ok(rows)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::paris::ParisConstants;

    fn tiny_config(seed: u64) -> PipelineConfig {
        let mut cfg = PipelineConfig::ci(seed);
        cfg.rve.box_dims = [45.0, 45.0, 5.7];
        cfg.rve.crack_length = 15.0;
        cfg.load.cycles = 4;
        cfg.load.peak_start = 0.015;
        cfg.load.peak_end = 0.04;
        cfg.load.strain_rate_per_ps = 0.08;
        cfg.macro_.elem_size = 4.0;
        cfg.macro_.da = 2.0;
        cfg
    }

    #[test]
    fn md_and_extract_stages_produce_artifacts() {
        let dir = tempfile::tempdir().unwrap();
        let cfg = tiny_config(5);
        let md_out = stage_md(&cfg, dir.path()).unwrap();
        assert!(md_out.iter().any(|p| p == "md/cycles.csv"));
        assert!(md_out.iter().any(|p| p.starts_with("md/raster_")));
        let ex_out = stage_extract(&cfg, dir.path()).unwrap();
        assert!(ex_out.iter().any(|p| p == "extract/lengths.csv"));
        let rows = parse_csv(&dir.path().join("extract/lengths.csv"), "t").unwrap();
        assert!(!rows.is_empty());
    }

    #[test]
    fn fit_stage_recovers_synthetic_constants() {
        let dir = tempfile::tempdir().unwrap();
        let cfg = tiny_config(1);
        std::fs::create_dir_all(dir.path().join("md")).unwrap();
        std::fs::create_dir_all(dir.path().join("extract")).unwrap();
        // forward-generate samples from a known power law in MPa·√mm
        let truth = ParisConstants::new(2e-10, 2.5, UnitSystem::MpaSqrtMm);
        let sigma_gpa = 3.0;
        let mut a_mm = 2e-5;
        let mut cyc = String::from(
            "cycle,peak_strain,sigma_y_tip_GPa,crack_len_A,sigma_y_min_GPa,\
             sigma_y_far_GPa,sigma_y_far_min_GPa\n",
        );
        let mut len = String::from("frame,crack_len_A,tip_x_A,tip_y_A\n");
        for n in 0..12u64 {
            cyc.push_str(&format!("{n},1e-2,{sigma_gpa},nan,0.0,{sigma_gpa},0.0\n"));
            len.push_str(&format!("{n},{:.9e},0,0\n", a_mm / super::ANGSTROM_TO_MM));
            let dk = crate::paris::stress_intensity(sigma_gpa * 1e3, a_mm).unwrap();
            a_mm += truth.rate(dk);
        }
        std::fs::write(dir.path().join("md/cycles.csv"), cyc).unwrap();
        std::fs::write(dir.path().join("extract/lengths.csv"), len).unwrap();
        stage_fit(&cfg, dir.path()).unwrap();
        let fitted = load_paris(&dir.path().join("fit/paris.json")).unwrap();
        assert!((fitted.m - truth.m).abs() < 0.05, "m = {}", fitted.m);
        assert!((fitted.c.log10() - truth.c.log10()).abs() < 0.2);
    }

    #[test]
    fn provided_paris_skips_micro_and_macro_caches() {
        let dir = tempfile::tempdir().unwrap();
        let mut cfg = tiny_config(9);
        cfg.macro_.constants = None;
        std::fs::create_dir_all(dir.path().join("fit")).unwrap();
        let constants = ParisConstants::new(1.4299e-11, 2.9041, UnitSystem::MpaSqrtMm);
        std::fs::write(
            dir.path().join("fit/paris.json"),
            serde_json::to_string_pretty(&constants).unwrap(),
        )
        .unwrap();
        let man = run_pipeline(&cfg, dir.path()).unwrap();
        assert_eq!(man.stage("md_rve").unwrap().status, StageStatus::Provided);
        assert_eq!(man.stage("paris_fit").unwrap().status, StageStatus::Provided);
        assert_eq!(man.stage("xfem_core").unwrap().status, StageStatus::Ran);
        let life1 = std::fs::read(dir.path().join("macro/life_curve.csv")).unwrap();
        assert!(!life1.is_empty());

        // rerun: macro digests match, stage is cached, bytes unchanged
        let man2 = run_pipeline(&cfg, dir.path()).unwrap();
        assert_eq!(man2.stage("xfem_core").unwrap().status, StageStatus::Cached);
        let life2 = std::fs::read(dir.path().join("macro/life_curve.csv")).unwrap();
        assert_eq!(life1, life2);
        assert_eq!(
            man.stage("xfem_core").unwrap().outputs,
            man2.stage("xfem_core").unwrap().outputs
        );
    }

    #[test]
    fn zero_amplitude_halts_at_fit() {
        let dir = tempfile::tempdir().unwrap();
        let mut cfg = tiny_config(3);
        cfg.load.peak_start = 0.0;
        cfg.load.peak_end = 0.0;
        let err = run_pipeline(&cfg, dir.path()).unwrap_err();
        match err {
            PipelineError::Stage { stage, message } => {
                assert_eq!(stage, "paris_fit");
                assert!(message.contains("no growth points"), "{message}");
            }
            other => panic!("unexpected error {other}"),
        }
    }
}
