use anyhow::{bail, Context, Result};
use std::collections::BTreeMap;
use std::path::{Path, PathBuf};
use tacsim_core::canonical::sha256_hex;
use tacsim_core::opponents::OpponentConfig;
use tacsim_core::scenario::load_scenario;
use tacsim_core::sim::export::{event_log_jsonl, trajectory_csv};
use tacsim_core::sim::{run_rollout, RolloutRecord, SeedInfo};
use tacsim_core::{templates, CandidatePlan, Intent, Scenario};
use tacsim_planner::generate_candidates;
use tacsim_verify::dataset::{build_prediction_dataset, manifest as dataset_manifest, to_jsonl};
use tacsim_verify::harness::monte_carlo_verify;
use tacsim_verify::plot::{overlay_csv, overlay_svg};
use tacsim_verify::{rank_and_report, static_score, ReportConfig};

use crate::config::{Config, OpponentKind};
use crate::manifest::{RunOutput, SeedProtocol, MANIFEST_FILE};
use crate::{Cli, Command, RolloutArgs, TemplateKind};

pub fn run(cli: Cli) -> Result<()> {
    let config = Config::load(cli.config.as_deref())?;
    match cli.command {
        Command::Template { kind, count, out } => template(&config, kind, count, &out),
        Command::Plan { scenario, intent, candidates, ablate, out } => {
            let scenario = read_scenario(&scenario)?;
            let intent = match intent {
                Some(path) => Intent::load(&path).with_context(|| format!("cannot load intent {}", path.display()))?,
                None => Intent::destroy(&scenario.core_target_id),
            };
            let mut cfg = config.planner_config();
            if ablate.is_some() {
                cfg.ablation = ablate;
            }
            let n = candidates.unwrap_or(config.plan.candidates);
            let plans = generate_candidates(&intent, &scenario, n, &cfg)?;
            let mut run = RunOutput::create(&out, "plan", &config)?;
            run.manifest_mut().scenario_digests.insert(scenario.name.clone(), scenario.digest());
            for plan in &plans {
                run.write(&format!("plans/{}.json", plan.plan_id), pretty(plan)?)?;
                run.manifest_mut().plan_digests.insert(plan.plan_id.clone(), plan.digest());
                println!("{}\t{} actions\t{}", plan.plan_id, plan.actions.len(), run.dir().join("plans").join(format!("{}.json", plan.plan_id)).display());
            }
            run.finish()?;
            Ok(())
        }
        Command::Verify { plans, scenario, seeds, opponent, workers, out } => {
            let plans = read_plans(&plans)?;
            let scenarios = read_scenarios(&scenario)?;
            let seeds = match seeds {
                Some(s) => s.0,
                None => config_seeds(&config)?,
            };
            let opponent = opponent_config(&config, opponent)?;
            let report_config = ReportConfig {
                opponent: opponent.clone(),
                seeds: seeds.clone(),
                weights: config.metrics,
                rubric_weights: config.rubric,
                workers: workers.unwrap_or(config.verify.workers),
            };
            let just_plans: Vec<CandidatePlan> = plans.iter().map(|(_, p)| p.clone()).collect();
            let just_scenarios: Vec<Scenario> = scenarios.iter().map(|(_, s)| s.clone()).collect();
            let report = rank_and_report(&just_plans, &just_scenarios, &report_config)?;

            let mut run = RunOutput::create(&out, "verify", &config)?;
            let text = report.render_text();
            run.write("report.json", report.to_json() + "\n")?;
            run.write("report.txt", &text)?;
            for (path, plan) in &plans {
                run.write(&format!("inputs/plans/{}", file_name(path)?), std::fs::read(path)?)?;
                run.manifest_mut().plan_digests.insert(plan.plan_id.clone(), plan.digest());
            }
            for (path, s) in &scenarios {
                run.write(&format!("inputs/scenarios/{}", file_name(path)?), std::fs::read(path)?)?;
                run.manifest_mut().scenario_digests.insert(s.name.clone(), s.digest());
            }
            run.manifest_mut().opponent = Some(opponent.name().to_string());
            run.manifest_mut().seed_protocol = Some(SeedProtocol::new(seeds));
            run.finish()?;
            print!("{text}");
            Ok(())
        }
        Command::Simulate { rollout, out } => {
            let (plan, scenario, opponent, record) = simulate_one(&config, &rollout)?;
            let mut run = RunOutput::create(&out, "simulate", &config)?;
            run.write("record.json", pretty(&record)?)?;
            run.write("events.jsonl", event_log_jsonl(&record.events))?;
            run.write("trajectory.csv", trajectory_csv(&record))?;
            describe_rollout(&mut run, &plan, &scenario, &opponent, rollout.seed);
            run.finish()?;
            println!("outcome {:?} at tick {}; log hash {}", record.outcome, record.end_tick, record.log_hash);
            Ok(())
        }
        Command::Replay { log, hash, record, plan, scenario, seed, opponent } => {
            replay(&config, &log, hash, record.as_deref(), plan.zip(scenario), seed, opponent)
        }
        Command::ExportDataset { records, plan, scenario, seeds, opponent, workers, out } => {
            let mut run = RunOutput::create(&out, "export-dataset", &config)?;
            let records: Vec<RolloutRecord> = match plan.zip(scenario) {
                Some((plan_path, scenario_path)) => {
                    let plan = read_plan(&plan_path)?;
                    let scenario = read_scenario(&scenario_path)?;
                    let seeds = match seeds {
                        Some(s) => s.0,
                        None => config_seeds(&config)?,
                    };
                    let opponent = opponent_config(&config, opponent)?;
                    let verified = monte_carlo_verify(&plan, &scenario, &opponent, &seeds, workers.unwrap_or(config.verify.workers))?;
                    for fault in &verified.faults {
                        eprintln!("warning: seed {} skipped: {}", fault.seed, fault.message);
                    }
                    describe_rollout(&mut run, &plan, &scenario, &opponent, 0);
                    run.manifest_mut().seed_protocol = Some(SeedProtocol::new(seeds));
                    verified.records
                }
                None => {
                    if records.is_empty() {
                        bail!("give --records, or --plan with --scenario");
                    }
                    records
                        .iter()
                        .map(|p| -> Result<RolloutRecord> {
                            let text = std::fs::read_to_string(p).with_context(|| format!("cannot read {}", p.display()))?;
                            serde_json::from_str(&text).with_context(|| format!("invalid rollout record {}", p.display()))
                        })
                        .collect::<Result<_>>()?
                }
            };
            let dataset = build_prediction_dataset(&records, &config.dataset)?;
            let jsonl = to_jsonl(&dataset.samples);
            run.write("dataset.jsonl", &jsonl)?;
            let summary = dataset_manifest(&records, &dataset, &config.dataset, &config.eva);
            run.write("dataset_manifest.json", pretty(&summary)?)?;
            run.finish()?;
            println!("{} samples from {} rollouts ({} too short)", dataset.samples.len(), records.len(), dataset.skipped);
            Ok(())
        }
        Command::Score { plans, scenario } => {
            let scenario = read_scenario(&scenario)?;
            let scores: BTreeMap<String, _> = read_plans(&plans)?
                .into_iter()
                .map(|(_, plan)| (plan.plan_id.clone(), static_score(&plan, &scenario, &config.rubric)))
                .collect();
            println!("{}", serde_json::to_string_pretty(&scores)?);
            Ok(())
        }
        Command::Plot { rollout, out } => {
            let (plan, scenario, opponent, record) = simulate_one(&config, &rollout)?;
            let mut run = RunOutput::create(&out, "plot", &config)?;
            let svg = run.write("overlay.svg", overlay_svg(&plan, &record, &scenario))?;
            run.write("overlay.csv", overlay_csv(&plan, &record))?;
            describe_rollout(&mut run, &plan, &scenario, &opponent, rollout.seed);
            run.finish()?;
            println!("{}", svg.display());
            Ok(())
        }
    }
}

fn template(config: &Config, kind: TemplateKind, count: usize, out: &Path) -> Result<()> {
    let scenarios = match kind {
        TemplateKind::Easy => vec![templates::easy()],
        TemplateKind::Difficult => vec![templates::difficult()],
        TemplateKind::Suite => templates::suite(count),
    };
    let mut run = RunOutput::create(out, "template", config)?;
    for s in &scenarios {
        let path = run.write(&format!("scenarios/{}.json", s.name), pretty(s)?)?;
        run.manifest_mut().scenario_digests.insert(s.name.clone(), s.digest());
        println!("{}", path.display());
    }
    run.finish()?;
    Ok(())
}

fn replay(
    config: &Config,
    log: &Path,
    hash: Option<String>,
    record: Option<&Path>,
    rerun: Option<(PathBuf, PathBuf)>,
    seed: u64,
    opponent: Option<OpponentKind>,
) -> Result<()> {
    let bytes = std::fs::read(log).with_context(|| format!("cannot read log {}", log.display()))?;
    let actual = sha256_hex(&bytes);
    let mut checked = false;

    let expected = match (hash, record) {
        (Some(h), _) => Some(h.trim().to_ascii_lowercase()),
        (None, Some(path)) => {
            let text = std::fs::read_to_string(path).with_context(|| format!("cannot read {}", path.display()))?;
            let rec: RolloutRecord = serde_json::from_str(&text).with_context(|| format!("invalid rollout record {}", path.display()))?;
            Some(rec.log_hash)
        }
        (None, None) => None,
    };
    if let Some(expected) = expected {
        if expected != actual {
            bail!("log hash mismatch: expected {expected}, log has {actual}");
        }
        checked = true;
    }
    if let Some((plan, scenario)) = rerun {
        let args = RolloutArgs { plan, scenario, seed, opponent };
        let (_, _, _, record) = simulate_one(config, &args)?;
        let regenerated = event_log_jsonl(&record.events);
        if regenerated.as_bytes() != bytes.as_slice() {
            bail!("re-run diverges from the log: re-run hash {}, log has {actual}", record.log_hash);
        }
        checked = true;
    }
    if !checked {
        bail!("nothing to compare against: give --hash, --record, or --plan with --scenario");
    }
    println!("hash OK {actual}");
    Ok(())
}

fn simulate_one(config: &Config, args: &RolloutArgs) -> Result<(CandidatePlan, Scenario, OpponentConfig, RolloutRecord)> {
    let plan = read_plan(&args.plan)?;
    let scenario = read_scenario(&args.scenario)?;
    let opponent = opponent_config(config, args.opponent)?;
    let mut policy = opponent.build();
    let record = run_rollout(&scenario, &plan, policy.as_mut(), SeedInfo::from_seed(args.seed))?;
    Ok((plan, scenario, opponent, record))
}

fn describe_rollout(run: &mut RunOutput, plan: &CandidatePlan, scenario: &Scenario, opponent: &OpponentConfig, seed: u64) {
    let m = run.manifest_mut();
    m.plan_digests.insert(plan.plan_id.clone(), plan.digest());
    m.scenario_digests.insert(scenario.name.clone(), scenario.digest());
    m.opponent = Some(opponent.name().to_string());
    if m.seed_protocol.is_none() {
        m.seed_protocol = Some(SeedProtocol::new(vec![seed]));
    }
}

fn opponent_config(config: &Config, kind: Option<OpponentKind>) -> Result<OpponentConfig> {
    config.opponent_config(kind.unwrap_or(config.verify.opponent))
}

fn config_seeds(config: &Config) -> Result<Vec<u64>> {
    crate::config::parse_seeds(&config.verify.seeds).map_err(|e| anyhow::anyhow!("verify.seeds in config: {e}"))
}

fn pretty<T: serde::Serialize>(value: &T) -> Result<String> {
    Ok(serde_json::to_string_pretty(value)? + "\n")
}

fn file_name(path: &Path) -> Result<String> {
    path.file_name().map(|n| n.to_string_lossy().into_owned()).with_context(|| format!("{} has no file name", path.display()))
}

fn read_plan(path: &Path) -> Result<CandidatePlan> {
    CandidatePlan::load(path).with_context(|| format!("cannot load plan {}", path.display()))
}

fn read_scenario(path: &Path) -> Result<Scenario> {
    load_scenario(path).with_context(|| format!("cannot load scenario {}", path.display()))
}

/// Files as given, and the `*.json` files of directories in name order
/// (run manifests excluded).
fn expand(paths: &[PathBuf]) -> Result<Vec<PathBuf>> {
    let mut out = Vec::new();
    for path in paths {
        if path.is_dir() {
            let mut files: Vec<PathBuf> = std::fs::read_dir(path)
                .with_context(|| format!("cannot list {}", path.display()))?
                .filter_map(|e| e.ok().map(|e| e.path()))
                .filter(|p| p.is_file() && p.extension().is_some_and(|x| x == "json"))
                .filter(|p| p.file_name().is_some_and(|n| n != MANIFEST_FILE))
                .collect();
            files.sort();
            if files.is_empty() {
                bail!("no .json files in {}", path.display());
            }
            out.extend(files);
        } else {
            out.push(path.clone());
        }
    }
    Ok(out)
}

fn read_plans(paths: &[PathBuf]) -> Result<Vec<(PathBuf, CandidatePlan)>> {
    let mut seen = BTreeMap::new();
    let mut out = Vec::new();
    for path in expand(paths)? {
        let plan = read_plan(&path)?;
        if let Some(other) = seen.insert(plan.plan_id.clone(), path.clone()) {
            bail!("plan id {} appears in both {} and {}", plan.plan_id, other.display(), path.display());
        }
        out.push((path, plan));
    }
    Ok(out)
}

fn read_scenarios(paths: &[PathBuf]) -> Result<Vec<(PathBuf, Scenario)>> {
    let mut seen = BTreeMap::new();
    let mut out = Vec::new();
    for path in expand(paths)? {
        let s = read_scenario(&path)?;
        if let Some(other) = seen.insert(s.name.clone(), path.clone()) {
            bail!("scenario name {} appears in both {} and {}", s.name, other.display(), path.display());
        }
        out.push((path, s));
    }
    Ok(out)
}
