//! The six subcommands. Each one loads scenes, does its work, writes its
//! artifacts plus a `manifest-<subcommand>.json` with every resolved setting,
//! and prints a short human summary to stdout.

use std::path::PathBuf;

use pedforce::export::{
    build_force_records, build_sim_records, counts_csv, force_records_csv, groups_csv_rows,
    metrics_csv, sim_records_csv, write_json_pretty, write_jsonl, write_text, RunManifest,
    GROUPS_CSV_HEADER,
};
use pedforce::{
    detect_groups, evaluate, force_sequences, parse_scene, synthetic, validate_counts,
    window_scene, Error, EvalOptions, Frame, GoalMode, GoalSource, GroupAssignment, NeighborMode,
    Predictor, Result, Scene, SocialForcePredictor, TrajectoryWindow,
};

use crate::settings::Settings;

const HISTORY: usize = 7;
const HORIZON: usize = 12;
const FRAME_DT: f64 = 0.4;

pub fn run(subcommand: &str, settings: &Settings) -> Result<()> {
    std::fs::create_dir_all(&settings.out)?;
    match subcommand {
        "ingest" => ingest(settings),
        "groups" => groups(settings),
        "features" => features(settings),
        "simulate" => simulate(settings),
        "evaluate" => run_evaluate(settings),
        "report" => report(settings),
        other => Err(Error::contract(format!("unknown subcommand `{other}`"))),
    }
}

fn manifest(settings: &Settings, subcommand: &str) -> RunManifest {
    let mut m = RunManifest::new(subcommand, settings.seed);
    m.set(
        "dataset-dir",
        settings
            .dataset_dir
            .as_deref()
            .map_or_else(|| "<bundled synthetic>".to_string(), |d| d.display().to_string()),
    );
    m.set("subset", settings.subsets.join(","));
    m.set("format", settings.format_spec());
    m.set("tau", settings.params.tau);
    m.set("v0", settings.params.v0_default);
    m.set("V0", settings.params.v0_amplitude);
    m.set("sigma-v", settings.params.sigma_v);
    m.set("two-eps-deg", settings.params.two_epsilon_deg);
    m.set("c", settings.params.c);
    m.set("fov-on-source", settings.params.fov_on_source);
    m.set("eps", settings.grouping.eps);
    m.set("min-pts", settings.grouping.min_pts);
    m.set("sigma", settings.grouping.sigma);
    m.set("K", settings.k);
    m.set("gamma", settings.gamma);
    m.set("seed", settings.seed);
    m.set("goal", match settings.goal_mode {
        GoalMode::Oracle => "oracle",
        GoalMode::Extrapolate => "extrapolate",
    });
    m.set("unordered-nc", settings.unordered_nc);
    m.set("joint", settings.joint);
    m.set("substeps", settings.substeps);
    m.set("stride", settings.stride);
    m.set("history", HISTORY);
    m.set("horizon", HORIZON);
    m.set("dt", FRAME_DT);
    m.set("out", settings.out.display().to_string());
    m
}

fn write_manifest(settings: &Settings, subcommand: &str) -> Result<PathBuf> {
    let path = settings.out.join(format!("manifest-{subcommand}.json"));
    write_json_pretty(&path, &manifest(settings, subcommand))?;
    Ok(path)
}

fn load_scenes(settings: &Settings) -> Result<Vec<Scene>> {
    match &settings.dataset_dir {
        Some(dir) => {
            let names: Vec<String> = if settings.subsets.is_empty() {
                let mut found: Vec<String> = std::fs::read_dir(dir)
                    .map_err(|e| {
                        Error::config("dataset-dir", format!("cannot read {}: {e}", dir.display()))
                    })?
                    .filter_map(|entry| {
                        let path = entry.ok()?.path();
                        if path.extension()? == "txt" {
                            Some(path.file_stem()?.to_string_lossy().into_owned())
                        } else {
                            None
                        }
                    })
                    .collect();
                found.sort();
                if found.is_empty() {
                    return Err(Error::config(
                        "dataset-dir",
                        format!("no .txt trajectory files under {}", dir.display()),
                    ));
                }
                found
            } else {
                settings.subsets.clone()
            };
            names
                .iter()
                .map(|name| {
                    let path = dir.join(format!("{name}.txt"));
                    let text = std::fs::read_to_string(&path).map_err(|e| {
                        Error::config("subset", format!("cannot read {}: {e}", path.display()))
                    })?;
                    parse_scene(&text, &settings.format, name, FRAME_DT)
                })
                .collect()
        }
        None => {
            eprintln!("note: no --dataset-dir given; using bundled synthetic subsets");
            let mut scenes = synthetic::fixture_subsets();
            if !settings.subsets.is_empty() {
                scenes.retain(|s| settings.subsets.iter().any(|n| n == &s.name));
                if scenes.is_empty() {
                    return Err(Error::config(
                        "subset",
                        format!(
                            "none of the requested subsets match the bundled names {:?}",
                            synthetic::SUBSET_NAMES
                        ),
                    ));
                }
            }
            Ok(scenes)
        }
    }
}

fn windows_of(settings: &Settings, scene: &Scene) -> Vec<TrajectoryWindow> {
    window_scene(scene, HISTORY, HORIZON, settings.stride)
}

fn observed_frames(window: &TrajectoryWindow) -> Vec<Frame> {
    (0..window.observed.len()).map(|t| window.frame_at(t)).collect()
}

fn group_assignment(settings: &Settings, window: &TrajectoryWindow) -> GroupAssignment {
    let frames = observed_frames(window);
    detect_groups(&frames, settings.grouping.eps, settings.grouping.min_pts, settings.grouping.sigma)
}

fn predictor(settings: &Settings) -> SocialForcePredictor {
    SocialForcePredictor {
        params: settings.params,
        goal: GoalSource { mode: settings.goal_mode, ..GoalSource::default() },
        k: settings.k,
        seed: settings.seed,
        neighbor_mode: if settings.joint { NeighborMode::Joint } else { NeighborMode::Replay },
        substeps: settings.substeps,
        grouping: Some(settings.grouping),
    }
}

fn ingest(settings: &Settings) -> Result<()> {
    let scenes = load_scenes(settings)?;
    let checks = validate_counts(&scenes, HISTORY, HORIZON, settings.stride);
    println!("{:<10} {:>8} {:>9} {:>10}", "subset", "windows", "expected", "deviation");
    for check in &checks {
        let expected = check.expected.map_or_else(|| "-".into(), |e| e.to_string());
        let deviation = check.deviation_pct.map_or_else(|| "-".into(), |d| format!("{d:+.1}%"));
        println!("{:<10} {:>8} {:>9} {:>10}", check.subset, check.count, expected, deviation);
    }
    write_text(&settings.out.join("counts.csv"), &counts_csv(&checks))?;
    write_manifest(settings, "ingest")?;
    Ok(())
}

fn groups(settings: &Settings) -> Result<()> {
    let scenes = load_scenes(settings)?;
    let mut csv = String::from(GROUPS_CSV_HEADER);
    let mut windows_seen = 0usize;
    let mut grouped_pairs = 0usize;
    for scene in &scenes {
        for window in windows_of(settings, scene) {
            let assignment = group_assignment(settings, &window);
            grouped_pairs += assignment.pairs().count();
            groups_csv_rows(&mut csv, &window.scene, window.id, &assignment);
            windows_seen += 1;
        }
    }
    write_text(&settings.out.join("groups.csv"), &csv)?;
    write_manifest(settings, "groups")?;
    println!("{windows_seen} windows scanned, {grouped_pairs} grouped pairs");
    Ok(())
}

fn features(settings: &Settings) -> Result<()> {
    let scenes = load_scenes(settings)?;
    let mut all_records = Vec::new();
    for scene in &scenes {
        let windows = windows_of(settings, scene);
        let assignments: Vec<GroupAssignment> =
            windows.iter().map(|w| group_assignment(settings, w)).collect();
        let sequences = force_sequences(&windows, &assignments, &settings.params)?;
        all_records.extend(build_force_records(&windows, &sequences));
    }
    write_jsonl(&settings.out.join("features.jsonl"), &all_records)?;
    write_text(&settings.out.join("features.csv"), &force_records_csv(&all_records))?;
    write_manifest(settings, "features")?;
    println!("{} force records written", all_records.len());
    Ok(())
}

fn simulate(settings: &Settings) -> Result<()> {
    let scenes = load_scenes(settings)?;
    let model = predictor(settings);
    let mut all_records = Vec::new();
    for scene in &scenes {
        for window in windows_of(settings, scene) {
            let pred = model.predict(&window)?;
            all_records.extend(build_sim_records(&window, &pred));
        }
    }
    write_jsonl(&settings.out.join("simulate.jsonl"), &all_records)?;
    write_text(&settings.out.join("simulate.csv"), &sim_records_csv(&all_records))?;
    write_manifest(settings, "simulate")?;
    println!("{} predicted positions written", all_records.len());
    Ok(())
}

fn run_evaluate(settings: &Settings) -> Result<()> {
    let scenes = load_scenes(settings)?;
    let model = predictor(settings);
    let options = EvalOptions {
        history: HISTORY,
        horizon: HORIZON,
        stride: settings.stride,
        gamma: settings.gamma,
        unordered: settings.unordered_nc,
    };
    let reports = scenes
        .iter()
        .map(|scene| evaluate(scene, &model, &options))
        .collect::<Result<Vec<_>>>()?;
    println!("{:<10} {:>9} {:>9} {:>6} {:>8}", "subset", "ade_k", "fde_k", "nc", "windows");
    for r in &reports {
        println!(
            "{:<10} {:>9.4} {:>9.4} {:>6} {:>8}",
            r.subset, r.ade_k, r.fde_k, r.nc, r.num_windows
        );
    }
    write_text(&settings.out.join("metrics.csv"), &metrics_csv(&reports))?;
    write_json_pretty(&settings.out.join("metrics.json"), &reports)?;
    write_manifest(settings, "evaluate")?;
    Ok(())
}

/// Pivot the `evaluate` output into one row per metric with a subset column
/// each plus an average column.
fn report(settings: &Settings) -> Result<()> {
    let path = settings.out.join("metrics.csv");
    let text = std::fs::read_to_string(&path).map_err(|e| {
        Error::config("out", format!("cannot read {} (run `evaluate` first): {e}", path.display()))
    })?;
    let rows = parse_metrics_csv(&text)?;
    if rows.is_empty() {
        return Err(Error::contract("metrics.csv holds no data rows"));
    }

    let mut table = String::new();
    table.push_str("metric");
    for row in &rows {
        table.push(',');
        table.push_str(&row.subset);
    }
    table.push_str(",avg\n");
    for (metric, values) in [
        ("ade_k", rows.iter().map(|r| r.ade_k).collect::<Vec<_>>()),
        ("fde_k", rows.iter().map(|r| r.fde_k).collect::<Vec<_>>()),
        ("nc", rows.iter().map(|r| r.nc).collect::<Vec<_>>()),
    ] {
        table.push_str(metric);
        for v in &values {
            table.push(',');
            table.push_str(&v.to_string());
        }
        let avg = values.iter().sum::<f64>() / values.len() as f64;
        table.push(',');
        table.push_str(&avg.to_string());
        table.push('\n');
    }
    print!("{table}");
    write_text(&settings.out.join("report.csv"), &table)?;
    write_manifest(settings, "report")?;
    Ok(())
}

struct MetricsRow {
    subset: String,
    ade_k: f64,
    fde_k: f64,
    nc: f64,
}

fn parse_metrics_csv(text: &str) -> Result<Vec<MetricsRow>> {
    let mut rows = Vec::new();
    for line in text.lines().skip(1) {
        if line.trim().is_empty() {
            continue;
        }
        let fields: Vec<&str> = line.split(',').collect();
        if fields.len() != 7 {
            return Err(Error::contract(format!("malformed metrics row `{line}`")));
        }
        let number = |i: usize| -> Result<f64> {
            fields[i]
                .parse()
                .map_err(|_| Error::contract(format!("bad number `{}` in metrics row", fields[i])))
        };
        rows.push(MetricsRow {
            subset: fields[0].to_string(),
            ade_k: number(1)?,
            fde_k: number(2)?,
            nc: number(3)?,
        });
    }
    Ok(rows)
}
