use std::io::{BufRead, Write};
use std::path::{Path, PathBuf};

use polarscope_core::agents::{
    apply_resolutions, read_review_file, run_triplet_pipeline_with, write_review_file, FileReviewer, PipelineOutput,
    ReviewMode, Reviewer, TerminalReviewer,
};
use polarscope_core::coi::coi_with;
use polarscope_core::dot::export_dot_with_header;
use polarscope_core::eval::{load_dataset, run_zero_shot_eval, EvalOptions};
use polarscope_core::model::{read_comments, slice_by_time, Comment};
use polarscope_core::{build_csn, coi_series, SeriesPoint};
use serde::{Deserialize, Serialize};

use crate::artifacts::{
    read_csn, read_triplets, to_json, write_atomic, write_csn, write_json, write_triplets, BackgroundFile,
    TripletsFile, TripletsHeader, TRIPLETS_FORMAT,
};
use crate::{CliError, Command, Settings};

pub const TRIPLETS_FILE: &str = "triplets.jsonl";
pub const BACKGROUND_FILE: &str = "background.json";
pub const REVIEW_FILE: &str = "review.jsonl";

pub fn dispatch(
    command: &Command,
    settings: &Settings,
    input: &mut dyn BufRead,
    output: &mut dyn Write,
) -> Result<(), CliError> {
    match command {
        Command::Analyze { input: path, out, strict } => {
            let path = required(path.as_ref().or(settings.run.paths.input.as_ref()), "--input")?;
            let dir = out.clone().or_else(|| settings.run.paths.output.clone()).unwrap_or_else(|| ".".into());
            analyze(settings, path, &dir, *strict, input, output)
        }
        Command::BuildCsn { triplets, out } => build(settings, triplets, out, output),
        Command::Coi { csn, out, json } => coi(settings, csn, out.as_deref(), *json, output),
        Command::Series {
            input: path,
            out,
            strict,
            json,
        } => {
            let path = required(path.as_ref().or(settings.run.paths.input.as_ref()), "--input")?;
            series(settings, path, out.as_deref(), *strict, *json, output)
        }
        Command::Eval {
            dataset,
            files,
            limit,
            out,
            json,
            stop_after,
        } => {
            let mut records = Vec::new();
            for f in files {
                records.extend(load_dataset(f, *dataset)?);
            }
            let options = EvalOptions {
                limit: *limit,
                checkpoint: settings.run.paths.checkpoint.clone(),
                stop_after: *stop_after,
                config_hash: Some(settings.hash.clone()),
            };
            let report = run_zero_shot_eval(&records, &settings.system()?, settings.run.tau, &options)?;
            if let Some(p) = out {
                write_json(p, &report)?;
            }
            if *json {
                output.write_all(to_json(&report).as_bytes())?;
            } else {
                output.write_all(report.render_table().as_bytes())?;
            }
            Ok(())
        }
        Command::ExportDot { csn, out } => {
            let (network, hash) = read_csn(csn)?;
            settings.check_hash(csn, hash.as_deref())?;
            let dot = export_dot_with_header(&network, Some(&format!("config_hash {}", settings.hash)));
            match out {
                Some(p) => write_atomic(p, dot.as_bytes()),
                None => Ok(output.write_all(dot.as_bytes())?),
            }
        }
        Command::Review { queue, triplets, apply } => review(settings, queue, triplets, *apply, input, output),
    }
}

fn required<'a>(path: Option<&'a PathBuf>, flag: &str) -> Result<&'a PathBuf, CliError> {
    path.ok_or_else(|| CliError::Usage(format!("{flag} is required (or set it under [paths] in the config)")))
}

fn load_comments(path: &Path, strict: bool, output: &mut dyn Write) -> Result<Vec<Comment>, CliError> {
    let report = read_comments(path, strict)?;
    for bad in &report.skipped {
        writeln!(output, "ignored {} line {}: {}", path.display(), bad.line, bad.message)?;
    }
    Ok(report.comments)
}

fn analyze(
    settings: &Settings,
    path: &Path,
    dir: &Path,
    strict: bool,
    input: &mut dyn BufRead,
    output: &mut dyn Write,
) -> Result<(), CliError> {
    let comments = load_comments(path, strict, output)?;
    let system = settings.system()?;
    let review_path = settings.run.paths.review_file.clone().unwrap_or_else(|| dir.join(REVIEW_FILE));
    std::fs::create_dir_all(dir)?;
    let out: PipelineOutput = match settings.run.review_mode {
        ReviewMode::File => run_triplet_pipeline_with(&comments, &system, &mut FileReviewer::create(&review_path)?)?,
        ReviewMode::Interactive => {
            let mut reviewer = TerminalReviewer::new(&mut *input, &mut *output);
            let out = run_triplet_pipeline_with(&comments, &system, &mut reviewer)?;
            // Whatever was skipped or never asked can still be reviewed later.
            write_review_file(&review_path, &out.unresolved)?;
            out
        }
    };
    let file = TripletsFile {
        header: TripletsHeader {
            format: TRIPLETS_FORMAT.into(),
            config_hash: settings.hash.clone(),
            seed: settings.run.seed,
            comments: comments.len(),
            subgroups: out.background.subgroups.clone(),
            skipped: out.skipped.skipped.clone(),
        },
        triplets: out.triplets,
    };
    write_triplets(&dir.join(TRIPLETS_FILE), &file)?;
    write_json(
        &dir.join(BACKGROUND_FILE),
        &BackgroundFile {
            config_hash: settings.hash.clone(),
            background: out.background,
        },
    )?;
    writeln!(
        output,
        "analysed {} comments: {} triplets, {} skipped, {} awaiting review, {} subgroups",
        comments.len(),
        file.triplets.len(),
        file.header.skipped.len(),
        out.unresolved.len(),
        file.header.subgroups.len()
    )?;
    Ok(())
}

fn build(settings: &Settings, path: &Path, out: &Path, output: &mut dyn Write) -> Result<(), CliError> {
    let file = read_triplets(path)?;
    settings.check_hash(path, Some(&file.header.config_hash))?;
    if file.triplets.len() + file.header.skipped.len() != file.header.comments {
        return Err(CliError::Input {
            path: path.display().to_string(),
            message: format!(
                "{} triplets and {} skipped do not account for {} comments",
                file.triplets.len(),
                file.header.skipped.len(),
                file.header.comments
            ),
        });
    }
    let csn = build_csn(&file.triplets, &file.header.subgroups, settings.run.seed)?;
    write_csn(out, &csn, &settings.hash)?;
    writeln!(
        output,
        "network: {} subgroups, {} edges, {} comments",
        csn.len(),
        csn.iter_edges().count(),
        csn.total_comments
    )?;
    Ok(())
}

fn coi(settings: &Settings, path: &Path, out: Option<&Path>, json: bool, output: &mut dyn Write) -> Result<(), CliError> {
    let (csn, hash) = read_csn(path)?;
    settings.check_hash(path, hash.as_deref())?;
    let mut report = coi_with(&csn, settings.run.missing_cohesion)?;
    report.config_hash = Some(settings.hash.clone());
    if let Some(p) = out {
        write_json(p, &report)?;
    }
    if json {
        output.write_all(to_json(&report).as_bytes())?;
    } else {
        output.write_all(report.render_table().as_bytes())?;
    }
    Ok(())
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SeriesDocument {
    pub config_hash: String,
    pub window: String,
    pub points: Vec<SeriesPoint>,
}

fn series(
    settings: &Settings,
    path: &Path,
    out: Option<&Path>,
    strict: bool,
    json: bool,
    output: &mut dyn Write,
) -> Result<(), CliError> {
    let comments = load_comments(path, strict, output)?;
    let window = chrono::Duration::from_std(settings.window).map_err(|e| CliError::Config(e.to_string()))?;
    let slices = slice_by_time(&comments, window)?;
    let doc = SeriesDocument {
        config_hash: settings.hash.clone(),
        window: settings.run.window.clone(),
        points: coi_series(&slices, &settings.system()?, settings.run.missing_cohesion),
    };
    if let Some(p) = out {
        write_json(p, &doc)?;
    }
    if json {
        output.write_all(to_json(&doc).as_bytes())?;
        return Ok(());
    }
    writeln!(output, "{:<25}  {:<25}  {:>8}  {:>10}", "start", "end", "comments", "COI")?;
    for p in &doc.points {
        let value = match (&p.report, &p.error) {
            (Some(r), _) => format!("{:.6}", r.total),
            (None, Some(_)) => "failed".into(),
            (None, None) => "-".into(),
        };
        writeln!(
            output,
            "{:<25}  {:<25}  {:>8}  {:>10}",
            p.bounds.start.to_rfc3339(),
            p.bounds.end.to_rfc3339(),
            p.comments,
            value
        )?;
    }
    for p in doc.points.iter().filter(|p| p.error.is_some()) {
        writeln!(output, "slice {}: {}", p.bounds.start.to_rfc3339(), p.error.as_deref().unwrap_or(""))?;
    }
    Ok(())
}

fn review(
    settings: &Settings,
    queue: &Path,
    triplets_path: &Path,
    apply: bool,
    input: &mut dyn BufRead,
    output: &mut dyn Write,
) -> Result<(), CliError> {
    let mut file = read_triplets(triplets_path)?;
    settings.check_hash(triplets_path, Some(&file.header.config_hash))?;
    let items = read_review_file(queue)?;
    let max = settings.run.max_subgroups;
    let mut roster = file.header.subgroups.clone();
    if apply {
        let summary = apply_resolutions(&items, &mut file.triplets, &mut roster, max)?;
        file.header.subgroups = roster;
        write_triplets(triplets_path, &file)?;
        let remaining: Vec<_> = items.into_iter().filter(|i| i.resolution.is_none()).collect();
        write_review_file(queue, &remaining)?;
        writeln!(
            output,
            "{}",
            serde_json::to_string(&summary).expect("summary serializes")
        )?;
        return Ok(());
    }
    let (done, open): (Vec<_>, Vec<_>) = items.into_iter().partition(|i| i.resolution.is_some());
    let asked = open.len();
    let answered = TerminalReviewer::new(&mut *input, &mut *output).review(open, &mut roster, max)?;
    let resolved = answered.iter().filter(|i| i.resolution.is_some()).count();
    let all: Vec<_> = done.into_iter().chain(answered).collect();
    write_review_file(queue, &all)?;
    writeln!(output, "resolved {resolved} of {asked}; run `review --apply` to merge")?;
    Ok(())
}
