use std::fs;
use std::path::{Path, PathBuf};

use anyhow::{Context, Result};
use bpmnkit::compliance::{validate, ComplianceReport};
use bpmnkit::llm::{
    correct_model, generate_description, reconstruct, translate_model, write_run_dir,
    CorrectionState, LlmClient, LlmError, ReconstructOptions, TranslateOptions,
};
use bpmnkit::report::{
    evaluate_pair, load_results, render_report, write_result, CorpusManifest, ManifestEntry,
    ModelStatus, PairResult, PairSpec, ReportFormat,
};
use bpmnkit::similarity::CompareOptions;
use bpmnkit::xml::serialize;
use rayon::prelude::*;

use super::commands::{load_document, report_from, warn_all, write_file};
use super::{BatchStage, Settings, EXIT_FAILURE, EXIT_OK};

/// Changes to apply to one manifest entry after a stage ran.
#[derive(Default)]
struct Update {
    model_path: Option<PathBuf>,
    status: Option<ModelStatus>,
    description_path: Option<PathBuf>,
    reconstruction_path: Option<PathBuf>,
    last_report: Option<ComplianceReport>,
    warnings: Vec<String>,
}

fn eligible(stage: BatchStage, status: ModelStatus) -> bool {
    match stage {
        BatchStage::Translate => status == ModelStatus::Raw,
        BatchStage::Correct => status <= ModelStatus::Translated,
        BatchStage::Describe => status == ModelStatus::Compliant,
        BatchStage::Reconstruct => status == ModelStatus::Described,
        BatchStage::Evaluate => status == ModelStatus::Reconstructed,
    }
}

fn pool(jobs: usize) -> Result<rayon::ThreadPool> {
    rayon::ThreadPoolBuilder::new()
        .num_threads(jobs.max(1))
        .build()
        .context("starting worker pool")
}

/// Stores `p` relative to the manifest directory when it lies inside it.
fn relative(base: &Path, p: &Path) -> PathBuf {
    p.strip_prefix(base)
        .ok()
        .filter(|r| !base.as_os_str().is_empty() && !r.as_os_str().is_empty())
        .map(Path::to_path_buf)
        .unwrap_or_else(|| p.to_path_buf())
}

pub(super) fn run_stage(
    manifest_path: &Path,
    stage: BatchStage,
    out: Option<&Path>,
    limit: usize,
    compare_opts: &CompareOptions,
    settings: &Settings,
) -> Result<i32> {
    let mut manifest = CorpusManifest::load(manifest_path)?;
    let out_dir = out
        .map(Path::to_path_buf)
        .unwrap_or_else(|| manifest.base_dir.clone());
    for e in manifest.entries.iter().filter(|e| e.stale) {
        eprintln!("warning: skipping stale entry {}", e.pair_id());
    }
    if stage == BatchStage::Evaluate {
        return evaluate(&manifest, &out_dir, compare_opts, settings);
    }

    let work: Vec<(usize, ManifestEntry)> = manifest
        .entries
        .iter()
        .enumerate()
        .filter(|(_, e)| !e.stale && eligible(stage, e.status))
        .map(|(i, e)| (i, e.clone()))
        .collect();
    if work.is_empty() {
        eprintln!("nothing to do for this stage");
        return Ok(EXIT_OK);
    }
    let llm = settings.llm_client()?;
    let results: Vec<(usize, String, Result<Update>)> = pool(settings.jobs)?.install(|| {
        work.par_iter()
            .map(|(i, entry)| {
                let id = entry.pair_id();
                let model = manifest.resolve(&entry.model_path);
                let r = run_entry(stage, &id, &model, entry, &manifest, &out_dir, limit, &llm);
                (*i, id, r)
            })
            .collect()
    });

    let base = manifest.base_dir.clone();
    let mut failures = 0usize;
    for (i, id, result) in results {
        match result {
            Ok(update) => {
                for w in &update.warnings {
                    eprintln!("warning: {id}: {w}");
                }
                let entry = &mut manifest.entries[i];
                if let Some(p) = update.model_path {
                    entry.model_path = relative(&base, &p);
                }
                if let Some(p) = update.description_path {
                    entry.description_path = Some(relative(&base, &p));
                }
                if let Some(p) = update.reconstruction_path {
                    entry.reconstruction_path = Some(relative(&base, &p));
                }
                if let Some(s) = update.status {
                    entry.status = s;
                }
                if update.last_report.is_some() {
                    entry.last_report = update.last_report;
                }
            }
            Err(e) => {
                failures += 1;
                eprintln!("error: {id}: {e:#}");
            }
        }
    }
    manifest.save(manifest_path)?;
    eprintln!("{} processed, {} failed", work.len() - failures, failures);
    Ok(if failures == 0 { EXIT_OK } else { EXIT_FAILURE })
}

#[allow(clippy::too_many_arguments)]
fn run_entry(
    stage: BatchStage,
    id: &str,
    model: &Path,
    entry: &ManifestEntry,
    manifest: &CorpusManifest,
    out_dir: &Path,
    limit: usize,
    llm: &LlmClient,
) -> Result<Update> {
    let mut update = Update::default();
    match stage {
        BatchStage::Translate => {
            let doc = load_document(model)?;
            let t = translate_model(&doc, llm, &TranslateOptions::default())?;
            let path = out_dir.join("translated").join(format!("{id}.bpmn"));
            write_file(&path, &serialize(&t.document))?;
            update.warnings = t.warnings;
            update.model_path = Some(path);
            update.status = Some(ModelStatus::Translated);
        }
        BatchStage::Correct => {
            let doc = load_document(model)?;
            let report = validate(&doc);
            if report.compliant {
                update.status = Some(ModelStatus::Compliant);
            } else {
                let mut state = CorrectionState::with_limit(limit);
                let outcome = correct_model(&doc, llm, &mut state)?;
                let path = out_dir.join("corrected").join(format!("{id}.bpmn"));
                write_file(&path, &serialize(&outcome.document))?;
                update.warnings = outcome.warnings;
                update.model_path = Some(path);
                if outcome.report.compliant {
                    update.status = Some(ModelStatus::Compliant);
                } else {
                    update.warnings.push(format!(
                        "still non-compliant after {} rounds ({} errors)",
                        outcome.iterations,
                        outcome.report.error_count()
                    ));
                }
                update.last_report = Some(outcome.report);
                return Ok(update);
            }
            update.last_report = Some(report);
        }
        BatchStage::Describe => {
            let doc = load_document(model)?;
            let text = generate_description(&doc, llm)?;
            let path = out_dir.join("descriptions").join(format!("{id}.txt"));
            write_file(&path, text.as_bytes())?;
            update.description_path = Some(path);
            update.status = Some(ModelStatus::Described);
        }
        BatchStage::Reconstruct => {
            let desc_path = entry
                .description_path
                .as_deref()
                .map(|p| manifest.resolve(p))
                .context("entry has no description")?;
            let text = fs::read_to_string(&desc_path)
                .with_context(|| format!("reading {}", desc_path.display()))?;
            let opts = ReconstructOptions {
                correction_limit: limit,
                ..ReconstructOptions::default()
            };
            let run_dir = out_dir.join("runs").join(id);
            match reconstruct(&text, llm, &opts) {
                Ok(run) => {
                    write_run_dir(&run_dir, &run)?;
                    let path = out_dir.join("reconstructions").join(format!("{id}.bpmn"));
                    write_file(&path, &serialize(&run.document))?;
                    update.reconstruction_path = Some(path);
                    update.status = Some(ModelStatus::Reconstructed);
                }
                Err(LlmError::ReconstructionNonCompliant(run)) => {
                    write_run_dir(&run_dir, &run)?;
                    update.warnings.push(format!(
                        "reconstruction is non-compliant ({} errors); see {}",
                        run.report.error_count(),
                        run_dir.display()
                    ));
                }
                Err(e) => return Err(e.into()),
            }
        }
        BatchStage::Evaluate => unreachable!("evaluation is handled separately"),
    }
    Ok(update)
}

/// Scores every reconstructed entry, skipping pairs whose result file already
/// exists, then writes `summary.json` and `summary.csv`.
fn evaluate(
    manifest: &CorpusManifest,
    out_dir: &Path,
    opts: &CompareOptions,
    settings: &Settings,
) -> Result<i32> {
    let results_dir = out_dir.join("results");
    let descriptions = manifest
        .entries
        .iter()
        .filter(|e| e.description_path.is_some() || e.status >= ModelStatus::Described)
        .count();
    let pairs: Vec<PairSpec> = manifest
        .entries
        .iter()
        .filter(|e| !e.stale && eligible(BatchStage::Evaluate, e.status))
        .filter_map(|e| {
            let recon = e.reconstruction_path.as_deref()?;
            Some(PairSpec {
                id: e.pair_id(),
                ground_truth: manifest.resolve(&e.model_path),
                reconstruction: manifest.resolve(recon),
            })
        })
        .collect();
    let pending: Vec<&PairSpec> = pairs
        .iter()
        .filter(|p| !results_dir.join(format!("{}.json", p.id)).exists())
        .collect();
    eprintln!(
        "{} pairs, {} already scored",
        pairs.len(),
        pairs.len() - pending.len()
    );

    if !pending.is_empty() {
        let embed = settings.embedder()?;
        let fresh: Vec<PairResult> = pool(settings.jobs)?.install(|| {
            pending
                .par_iter()
                .map(|p| evaluate_pair(p, embed.as_ref(), opts))
                .collect()
        });
        for r in &fresh {
            write_result(&results_dir, r)?;
        }
    }

    let wanted: std::collections::BTreeSet<&str> = pairs.iter().map(|p| p.id.as_str()).collect();
    let results: Vec<PairResult> = if results_dir.exists() {
        load_results(&results_dir)?
            .into_iter()
            .filter(|r| wanted.contains(r.model_id()))
            .collect()
    } else {
        Vec::new()
    };
    let report = report_from(results, Some(descriptions.max(pairs.len())));
    warn_all(
        &report
            .errors
            .iter()
            .map(|e| format!("{}: {}", e.model_id, e.error))
            .collect::<Vec<_>>(),
    );
    write_file(
        &out_dir.join("summary.json"),
        &render_report(&report, ReportFormat::Json),
    )?;
    write_file(
        &out_dir.join("summary.csv"),
        &render_report(&report, ReportFormat::Csv),
    )?;
    print!(
        "{}",
        String::from_utf8_lossy(&render_report(&report, ReportFormat::Csv))
    );
    Ok(EXIT_OK)
}
