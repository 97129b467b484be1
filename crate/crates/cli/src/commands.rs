use std::collections::BTreeMap;
use std::path::Path;
use std::time::Duration;

use anyhow::{anyhow, Context};
use junction_core::controller::{
    MockController, ReferenceController, RemoteConfig, RemoteController, ReplayController, TrafficController,
    UnparseablePolicy,
};
use junction_core::eval::{evaluate_corpus, rows_csv, summary_json, summary_table, EvalConfig, EvalError, EvalSummary};
use junction_core::fsutil::{read_to_string, write_atomic};
use junction_core::layout::{default_layout, parse_layout, IntersectionLayout};
use junction_core::oracle::{analyze, emit_analysis, parse_analysis, render_report, OracleConfig};
use junction_core::promptkit::{build_bundle, labeled_bundle, split_dataset, to_jsonl, ChatRecord, PromptBundle};
use junction_core::scenario::{
    dataset_to_jsonl, describe_scenario, generate_dataset, parse_dataset, parse_scenario, GenParams, GenerationError,
    LabeledScenario, Scenario,
};

use crate::manifest::{config_hash, sha256_hex, sibling_manifest, GenerationConfig, Manifest, SplitCounts, MANIFEST_FILE};
use crate::{
    failed, invalid, Cli, CliResult, Command, DetectArgs, EvaluateArgs, ExportArgs, GenerateArgs, GlobalOpts, Ratios,
    UnparseableArg,
};

const DATASET_FILE: &str = "dataset.jsonl";
const SPLIT_NAMES: [&str; 3] = ["train", "validation", "test"];

pub fn run(cli: Cli) -> CliResult<()> {
    let g = &cli.global;
    match cli.command {
        Command::Generate(args) => generate(g, args),
        Command::Detect(args) => detect(g, args),
        Command::Describe { file } => {
            println!("{}", describe_scenario(&load_scenario(g, &file)?));
            Ok(())
        }
        Command::Prompt { file, json } => prompt(g, &file, json),
        Command::Export(args) => export(g, args),
        Command::Evaluate(args) => evaluate(g, args),
        Command::Report { file } => report(&file),
    }
}

fn oracle_config(g: &GlobalOpts) -> CliResult<OracleConfig> {
    let cfg = OracleConfig { time_window_s: g.window, tie_epsilon_s: g.tie_eps, clearance_gap_s: g.gap };
    cfg.validate().map_err(invalid)?;
    Ok(cfg)
}

fn layout(g: &GlobalOpts) -> CliResult<IntersectionLayout> {
    match &g.layout {
        None => Ok(default_layout()),
        Some(path) => {
            let text = read_to_string(path).map_err(failed)?;
            parse_layout(&text).with_context(|| format!("layout {}", path.display())).map_err(invalid)
        }
    }
}

fn read_input(path: &Path) -> CliResult<String> {
    read_to_string(path).map_err(failed)
}

fn load_scenario(g: &GlobalOpts, path: &Path) -> CliResult<Scenario> {
    let text = read_input(path)?;
    parse_scenario(&text, &layout(g)?).with_context(|| format!("scenario {}", path.display())).map_err(invalid)
}

fn load_dataset(path: &Path, layout: &IntersectionLayout) -> CliResult<Vec<LabeledScenario>> {
    let text = read_input(path)?;
    parse_dataset(&text, layout).with_context(|| format!("dataset {}", path.display())).map_err(invalid)
}

fn write_file(dir: &Path, name: &str, bytes: &[u8]) -> CliResult<()> {
    write_atomic(&dir.join(name), bytes).map_err(failed)
}

fn ensure_dir(dir: &Path) -> CliResult<()> {
    std::fs::create_dir_all(dir).with_context(|| format!("creating {}", dir.display())).map_err(failed)
}

fn ratios(r: Ratios) -> (f64, f64, f64) {
    (r.0, r.1, r.2)
}

fn generate(g: &GlobalOpts, args: GenerateArgs) -> CliResult<()> {
    let layout = layout(g)?;
    let oracle = oracle_config(g)?;
    let seed = g.seed.unwrap_or(0);
    let params = GenParams {
        vehicle_count: (args.vehicles.0, args.vehicles.1),
        speed_kmh: (args.speed.0, args.speed.1),
        distance_m: (args.distance.0, args.distance.1),
        conflict_balance: args.balance,
        seed,
    };
    let items = generate_dataset(&params, args.count, &layout, &oracle).map_err(|e| match e {
        GenerationError::InvalidParams(_) => invalid(e),
        GenerationError::BalanceUnattainable { .. } => failed(e),
    })?;

    ensure_dir(&args.out)?;
    let mut files = BTreeMap::new();
    let dataset = dataset_to_jsonl(&items);
    write_file(&args.out, DATASET_FILE, dataset.as_bytes())?;
    files.insert(DATASET_FILE.to_owned(), sha256_hex(dataset.as_bytes()));

    let positives = items.iter().filter(|i| i.analysis.has_conflict()).count();
    let mut split_counts = None;
    if let Some(r) = args.split {
        let split = split_dataset(items, ratios(r), seed).map_err(invalid)?;
        split_counts =
            Some(SplitCounts { train: split.train.len(), validation: split.validation.len(), test: split.test.len() });
        for (name, part) in SPLIT_NAMES.iter().zip([&split.train, &split.validation, &split.test]) {
            let file = format!("{name}.jsonl");
            let text = dataset_to_jsonl(part);
            write_file(&args.out, &file, text.as_bytes())?;
            files.insert(file, sha256_hex(text.as_bytes()));
        }
    }

    let config =
        GenerationConfig { params, count: args.count, oracle, layout: layout.to_document(), split: args.split.map(ratios) };
    let manifest = Manifest {
        tool: env!("CARGO_PKG_NAME").to_owned(),
        version: env!("CARGO_PKG_VERSION").to_owned(),
        config_hash: config_hash(&config),
        seed,
        config,
        count: args.count,
        positives,
        positive_fraction: positives as f64 / args.count as f64,
        files,
        split_counts,
    };
    let text = serde_json::to_string_pretty(&manifest).expect("manifest serializes") + "\n";
    write_file(&args.out, MANIFEST_FILE, text.as_bytes())?;
    eprintln!(
        "wrote {} scenarios ({positives} with conflicts) to {}",
        args.count,
        args.out.join(DATASET_FILE).display()
    );
    Ok(())
}

fn detect(g: &GlobalOpts, args: DetectArgs) -> CliResult<()> {
    let scenario = load_scenario(g, &args.file)?;
    let analysis = analyze(&scenario, &oracle_config(g)?);
    let doc = emit_analysis(&analysis) + "\n";
    let text = render_report(&analysis);
    match args.out {
        Some(dir) => {
            ensure_dir(&dir)?;
            write_file(&dir, "analysis.json", doc.as_bytes())?;
            write_file(&dir, "report.txt", text.as_bytes())?;
        }
        None => print!("{doc}\n{text}"),
    }
    Ok(())
}

fn prompt(g: &GlobalOpts, file: &Path, json: bool) -> CliResult<()> {
    let layout = layout(g)?;
    let scenario = load_scenario(g, file)?;
    let bundle = build_bundle(&scenario, &layout, &oracle_config(g)?);
    if json {
        println!("{}", serde_json::to_string_pretty(&ChatRecord::from(&bundle)).expect("chat record serializes"));
    } else {
        println!("{}\n\n{}", bundle.system_text, bundle.user_text);
    }
    Ok(())
}

fn export(g: &GlobalOpts, args: ExportArgs) -> CliResult<()> {
    let layout = layout(g)?;
    let items = load_dataset(&args.dataset, &layout)?;
    ensure_dir(&args.out)?;
    let bundles = |part: &[LabeledScenario]| -> Vec<PromptBundle> {
        part.iter().map(|item| labeled_bundle(item, &layout)).collect()
    };
    match args.split {
        None => write_file(&args.out, "chat.jsonl", to_jsonl(&bundles(&items)).as_bytes())?,
        Some(r) => {
            let split = split_dataset(items, ratios(r), g.seed.unwrap_or(0)).map_err(invalid)?;
            for (name, part) in SPLIT_NAMES.iter().zip([&split.train, &split.validation, &split.test]) {
                write_file(&args.out, &format!("{name}.chat.jsonl"), to_jsonl(&bundles(part)).as_bytes())?;
                eprintln!("{name}: {} records", part.len());
            }
        }
    }
    Ok(())
}

/// Warns (and carries on) when the dataset has drifted from its manifest.
fn check_manifest(dataset: &Path, bytes: &[u8], seed: Option<u64>) {
    let Some(manifest) = sibling_manifest(dataset) else { return };
    if let Some(seed) = seed.filter(|s| *s != manifest.seed) {
        eprintln!("warning: --seed {seed} differs from the manifest seed {}", manifest.seed);
    }
    let name = dataset.file_name().and_then(|n| n.to_str()).unwrap_or_default();
    match manifest.files.get(name) {
        Some(hash) if *hash != sha256_hex(bytes) => {
            eprintln!("warning: {name} does not match the hash recorded in its manifest")
        }
        Some(_) => {}
        None => eprintln!("warning: {name} is not listed in the adjacent manifest"),
    }
}

fn controller_for(args: &EvaluateArgs) -> CliResult<(Box<dyn TrafficController>, String)> {
    let model = args.model.clone().unwrap_or_else(|| RemoteConfig::default().model);
    let spec = args.controller.as_str();
    if spec == "reference" {
        return Ok((Box::new(ReferenceController::default()), "reference".into()));
    }
    if let Some(path) = spec.strip_prefix("mock:") {
        let text = read_input(Path::new(path))?;
        // a JSON array of responses cycles; anything else is one fixed response
        let script = match serde_json::from_str::<Vec<String>>(&text) {
            Ok(list) => list,
            Err(_) => vec![text],
        };
        return Ok((Box::new(MockController::new(script).map_err(invalid)?), "mock".into()));
    }
    if spec == "remote" {
        if let Some(path) = &args.replay {
            let replay = ReplayController::from_text(&read_input(path)?)
                .with_context(|| format!("transcript {}", path.display()))
                .map_err(invalid)?;
            let model = replay.model().to_owned();
            return Ok((Box::new(replay), model));
        }
        if !(args.timeout_secs.is_finite() && args.timeout_secs > 0.0) {
            return Err(invalid(anyhow!("--timeout-secs must be positive")));
        }
        let defaults = RemoteConfig::default();
        let cfg = RemoteConfig {
            endpoint: args.endpoint.clone().unwrap_or(defaults.endpoint.clone()),
            model: model.clone(),
            timeout: Duration::from_secs_f64(args.timeout_secs),
            max_concurrency: args.concurrency,
            max_retries: args.retries,
            ..defaults
        };
        return Ok((Box::new(RemoteController::new(cfg).map_err(invalid)?), model));
    }
    Err(invalid(anyhow!("unknown controller {spec:?}; expected reference, mock:<file> or remote")))
}

fn evaluate(g: &GlobalOpts, args: EvaluateArgs) -> CliResult<()> {
    let layout = layout(g)?;
    let text = read_input(&args.dataset)?;
    check_manifest(&args.dataset, text.as_bytes(), g.seed);
    let corpus = parse_dataset(&text, &layout)
        .with_context(|| format!("dataset {}", args.dataset.display()))
        .map_err(invalid)?;
    let (controller, model) = controller_for(&args)?;
    let cfg = EvalConfig {
        oracle: oracle_config(g)?,
        unparseable: match args.unparseable {
            UnparseableArg::Negative => UnparseablePolicy::Negative,
            UnparseableArg::Exclude => UnparseablePolicy::Exclude,
        },
    };
    let run = evaluate_corpus(controller.as_ref(), &corpus, &layout, &cfg, &model).map_err(|e| match e {
        EvalError::EmptyCorpus => invalid(e),
        other => failed(other),
    })?;

    ensure_dir(&args.out)?;
    write_file(&args.out, "summary.json", (summary_json(&run.summary) + "\n").as_bytes())?;
    let table = summary_table(&run.summary);
    write_file(&args.out, "summary.txt", table.as_bytes())?;
    write_file(&args.out, "rows.csv", rows_csv(&run.rows).as_bytes())?;
    write_file(&args.out, "transcript.jsonl", junction_core::controller::to_transcript(&run.transcript).as_bytes())?;
    print!("{table}");
    Ok(())
}

fn report(file: &Path) -> CliResult<()> {
    let text = read_input(file)?;
    if let Ok(summary) = serde_json::from_str::<EvalSummary>(&text) {
        print!("{}", summary_table(&summary));
        return Ok(());
    }
    let analysis = parse_analysis(&text)
        .with_context(|| format!("{} is neither an evaluation summary nor an analysis document", file.display()))
        .map_err(invalid)?;
    print!("{}", render_report(&analysis));
    Ok(())
}
