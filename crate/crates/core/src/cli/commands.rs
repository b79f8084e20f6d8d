use std::fs;
use std::io::Write;
use std::path::Path;

use anyhow::{Context, Result};
use bpmnkit::compliance::validate_bytes;
use bpmnkit::llm::{
    correct_model, generate_description, reconstruct, translate_model, write_run_dir,
    CorrectionState, LlmError, ReconstructOptions, TranslateOptions,
};
use bpmnkit::model::build_graph;
use bpmnkit::report::{load_results, render_report, EvaluationReport, PairResult, ReportFormat};
use bpmnkit::similarity::{compare, CompareOptions, TypeMode};
use bpmnkit::xml::{self, serialize, BpmnDocument, ExtractOptions};

use super::{
    corpus, Command, FormatArg, Settings, TypeModeArg, UsageError, EXIT_NON_COMPLIANT, EXIT_OK,
};

pub(super) fn dispatch(command: Command, settings: &Settings) -> Result<i32> {
    match command {
        Command::Validate { file } => {
            let bytes = read(&file)?;
            let report = validate_bytes(&bytes);
            println!("{}", report.to_json());
            Ok(if report.compliant {
                EXIT_OK
            } else {
                EXIT_NON_COMPLIANT
            })
        }
        Command::Translate {
            file,
            output,
            language,
            threshold,
            attributes,
            no_documentation,
        } => {
            if !(0.0..=1.0).contains(&threshold) {
                return Err(
                    UsageError(format!("--threshold must lie in [0, 1], got {threshold}")).into(),
                );
            }
            let doc = load_document(&file)?;
            let extract = if attributes.is_empty() {
                ExtractOptions {
                    documentation: !no_documentation,
                    ..ExtractOptions::default()
                }
            } else {
                ExtractOptions::with_attributes(attributes, !no_documentation)
            };
            let opts = TranslateOptions {
                target_language: language,
                threshold,
                extract,
                ..TranslateOptions::default()
            };
            let llm = settings.llm_client()?;
            let t = translate_model(&doc, &llm, &opts)?;
            warn_all(&t.warnings);
            write_file(&output, &serialize(&t.document))?;
            eprintln!("translated {} of {} strings", t.replaced, t.mapping.len());
            Ok(EXIT_OK)
        }
        Command::Correct {
            file,
            output,
            limit,
            window,
            simple_threshold,
            log,
        } => {
            let doc = load_document(&file)?;
            let llm = settings.llm_client()?;
            let mut state = CorrectionState {
                limit,
                window,
                simple_threshold,
                ..CorrectionState::default()
            };
            let outcome = correct_model(&doc, &llm, &mut state)?;
            warn_all(&outcome.warnings);
            write_file(&output, &serialize(&outcome.document))?;
            if let Some(path) = log {
                let mut text = String::new();
                for entry in &outcome.log {
                    text.push_str(&serde_json::to_string(entry)?);
                    text.push('\n');
                }
                write_file(&path, text.as_bytes())?;
            }
            println!("{}", outcome.report.to_json());
            Ok(if outcome.report.compliant {
                EXIT_OK
            } else {
                EXIT_NON_COMPLIANT
            })
        }
        Command::Describe { file, output } => {
            let doc = load_document(&file)?;
            let llm = settings.llm_client()?;
            let text = generate_description(&doc, &llm)?;
            match output {
                Some(path) => write_file(&path, text.as_bytes())?,
                None => println!("{text}"),
            }
            Ok(EXIT_OK)
        }
        Command::Reconstruct {
            description,
            output,
            run_dir,
            limit,
            max_retries,
            no_layout,
        } => {
            let text = fs::read_to_string(&description)
                .with_context(|| format!("reading {}", description.display()))?;
            let llm = settings.llm_client()?;
            let opts = ReconstructOptions {
                max_retries,
                correction_limit: limit,
                layout: !no_layout,
                ..ReconstructOptions::default()
            };
            let (run, compliant) = match reconstruct(&text, &llm, &opts) {
                Ok(run) => (run, true),
                Err(LlmError::ReconstructionNonCompliant(run)) => (*run, false),
                Err(e) => return Err(e.into()),
            };
            if let Some(dir) = run_dir {
                write_run_dir(&dir, &run)?;
            }
            write_file(&output, &serialize(&run.document))?;
            println!("{}", run.report.to_json());
            Ok(if compliant {
                EXIT_OK
            } else {
                EXIT_NON_COMPLIANT
            })
        }
        Command::Compare {
            first,
            second,
            no_context,
            type_mode,
        } => {
            let a = build_graph(&load_document(&first)?)
                .with_context(|| first.display().to_string())?;
            let b = build_graph(&load_document(&second)?)
                .with_context(|| second.display().to_string())?;
            let embed = settings.embedder()?;
            let breakdown = compare(
                &a.graph,
                &b.graph,
                embed.as_ref(),
                &compare_options(no_context, type_mode),
            )?;
            println!("{}", serde_json::to_string_pretty(&breakdown)?);
            Ok(EXIT_OK)
        }
        Command::Batch {
            manifest,
            stage,
            out,
            limit,
            no_context,
            type_mode,
        } => corpus::run_stage(
            &manifest,
            stage,
            out.as_deref(),
            limit,
            &compare_options(no_context, type_mode),
            settings,
        ),
        Command::Report {
            results_dir,
            output,
            format,
            descriptions,
        } => {
            let format = match (format, &output) {
                (Some(FormatArg::Json), _) => ReportFormat::Json,
                (Some(FormatArg::Csv), _) => ReportFormat::Csv,
                (None, Some(path)) => ReportFormat::from_path(path).ok_or_else(|| {
                    UsageError(format!(
                        "cannot infer report format from {}; use --format json|csv",
                        path.display()
                    ))
                })?,
                (None, None) => ReportFormat::Json,
            };
            let results = load_results(&results_dir)?;
            let report = report_from(results, descriptions);
            let bytes = render_report(&report, format);
            match output {
                Some(path) => write_file(&path, &bytes)?,
                None => std::io::stdout().write_all(&bytes)?,
            }
            Ok(EXIT_OK)
        }
    }
}

pub(super) fn report_from(
    results: Vec<PairResult>,
    descriptions: Option<usize>,
) -> EvaluationReport {
    let mut scores = Vec::new();
    let mut errors = Vec::new();
    for r in results {
        match r {
            PairResult::Scored(s) => scores.push(s),
            PairResult::Failed(e) => errors.push(e),
        }
    }
    EvaluationReport::from_results(scores, errors, descriptions)
}

fn compare_options(no_context: bool, type_mode: TypeModeArg) -> CompareOptions {
    CompareOptions {
        context: !no_context,
        type_mode: match type_mode {
            TypeModeArg::Category => TypeMode::Category,
            TypeModeArg::Tag => TypeMode::Tag,
        },
    }
}

fn read(path: &Path) -> Result<Vec<u8>> {
    fs::read(path).with_context(|| format!("reading {}", path.display()))
}

pub(super) fn load_document(path: &Path) -> Result<BpmnDocument> {
    let bytes = read(path)?;
    xml::parse(&bytes).with_context(|| format!("parsing {}", path.display()))
}

pub(super) fn write_file(path: &Path, bytes: &[u8]) -> Result<()> {
    if let Some(parent) = path.parent().filter(|p| !p.as_os_str().is_empty()) {
        fs::create_dir_all(parent).with_context(|| format!("creating {}", parent.display()))?;
    }
    fs::write(path, bytes).with_context(|| format!("writing {}", path.display()))
}

pub(super) fn warn_all(warnings: &[String]) {
    for w in warnings {
        eprintln!("warning: {w}");
    }
}
