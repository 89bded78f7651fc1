//! `motamot`: run the lexicon pipeline stage by stage, manage a store and serve it.

mod report;

use std::fs;
use std::net::SocketAddr;
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::sync::Arc;

use anyhow::{anyhow, Context as _};
use clap::{Args, Parser, Subcommand};
use motamot_core::ingest::{tag_volume, TaggedVolume};
use motamot_core::model::{read_volume_root, AxieVolume, Volume, AXIE_LANG};
use motamot_core::pipeline::{run_pipeline, PipelineError};
use motamot_core::reify::{check_integrity, reify_links, sort_volume, KHMER_LANG};
use motamot_core::restructure::{
    enrich_from_supplement, restructure_volume, validate_lmf_shape, SupplementLexicon, FRENCH_LANG,
};
use motamot_core::store::{Store, VolumeDescriptor, VolumeHandle};
use motamot_core::translit::{transliterate_traced, transliterate_volume, RuleSet};
use motamot_core::xml;
use motamot_server::{AppState, ServerConfig};

use report::{Failure, Issue, Report};

pub const TAGGED_FILE: &str = "tagged.xml";
pub const DEFAULT_DICT: &str = "motamot";

#[derive(Debug, Parser)]
#[command(
    name = "motamot",
    version,
    about = "French–Khmer pivot lexicon toolkit"
)]
struct Cli {
    /// Where the JSON error report goes when a command fails.
    #[arg(long, global = true, default_value = "motamot-error.json")]
    report: PathBuf,
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Tag a raw source file into a tagged volume.
    Ingest(InOut),
    /// Turn a tagged volume into a French entry volume.
    Restructure {
        #[command(flatten)]
        io: InOut,
        #[arg(long, default_value = DEFAULT_DICT)]
        name: String,
    },
    /// Fill head blocks from a supplementary lexicon.
    Enrich {
        #[command(flatten)]
        io: InOut,
        #[arg(long)]
        supp: PathBuf,
    },
    /// Reify translations into axie and Khmer volumes; `--out` is a directory.
    Reify(InOut),
    /// Transliterate IPA strings, or fill the script forms of a Khmer volume.
    Translit {
        #[arg(long = "in")]
        input: Option<PathBuf>,
        #[arg(long)]
        out: Option<PathBuf>,
        #[arg(long)]
        rules: Option<PathBuf>,
        /// Print every stage.
        #[arg(long)]
        trace: bool,
        text: Vec<String>,
    },
    /// Import volume files into a store.
    Import {
        #[command(flatten)]
        store: StoreArgs,
        #[arg(long, default_value = DEFAULT_DICT)]
        dict: String,
        /// JSON volume descriptor; applies to the file of its language.
        #[arg(long)]
        descriptor: Option<PathBuf>,
        #[arg(required = true)]
        files: Vec<PathBuf>,
    },
    /// Export a dictionary, or one volume of it, from a store.
    Export {
        #[command(flatten)]
        store: StoreArgs,
        #[arg(long, default_value = DEFAULT_DICT)]
        dict: String,
        #[arg(long)]
        lang: Option<String>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Serve the REST interface until interrupted.
    Serve {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        listen: Option<SocketAddr>,
        #[arg(long)]
        data: Option<PathBuf>,
    },
    /// Check the three volumes in a directory for consistency.
    Check {
        #[arg(long = "in")]
        input: PathBuf,
    },
    /// Run every stage; `--out` is a directory.
    Pipeline {
        #[command(flatten)]
        io: InOut,
        #[arg(long)]
        supp: PathBuf,
        #[arg(long)]
        rules: Option<PathBuf>,
        #[arg(long, default_value = DEFAULT_DICT)]
        name: String,
    },
}

#[derive(Debug, Args)]
struct InOut {
    #[arg(long = "in")]
    input: PathBuf,
    #[arg(long)]
    out: PathBuf,
}

#[derive(Debug, Args)]
struct StoreArgs {
    /// Store directory.
    #[arg(long, conflicts_with = "config", required_unless_present = "config")]
    data: Option<PathBuf>,
    /// Server configuration naming the store directory.
    #[arg(long)]
    config: Option<PathBuf>,
}

impl StoreArgs {
    fn dir(&self) -> Result<PathBuf, Failure> {
        match (&self.data, &self.config) {
            (Some(d), _) => Ok(d.clone()),
            (None, Some(c)) => Ok(ServerConfig::load(c).map_err(Failure::usage)?.data_dir),
            (None, None) => Err(Failure::usage(anyhow!("--data or --config is required"))),
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    tracing_subscriber::fmt()
        .with_writer(std::io::stderr)
        .init();
    let name = command_name(&cli.command);
    match run(cli.command) {
        Ok(()) => ExitCode::SUCCESS,
        Err(failure) => {
            eprintln!("error: {failure}");
            let report = Report::from_failure(name, &failure);
            if let Err(e) = report.write(&cli.report) {
                eprintln!("error: cannot write report {}: {e:#}", cli.report.display());
            }
            ExitCode::from(failure.exit_code())
        }
    }
}

fn command_name(c: &Command) -> &'static str {
    match c {
        Command::Ingest(_) => "ingest",
        Command::Restructure { .. } => "restructure",
        Command::Enrich { .. } => "enrich",
        Command::Reify(_) => "reify",
        Command::Translit { .. } => "translit",
        Command::Import { .. } => "import",
        Command::Export { .. } => "export",
        Command::Serve { .. } => "serve",
        Command::Check { .. } => "check",
        Command::Pipeline { .. } => "pipeline",
    }
}

fn run(command: Command) -> Result<(), Failure> {
    match command {
        Command::Ingest(io) => ingest(&io),
        Command::Restructure { io, name } => {
            let tagged = TaggedVolume::from_xml(&read_input(&io.input)?)
                .map_err(|e| Failure::stage("restructure", e))?;
            let volume =
                restructure_volume(&tagged, &name).map_err(|e| Failure::stage("restructure", e))?;
            write_output(&io.out, &volume.to_document().to_xml())
        }
        Command::Enrich { io, supp } => {
            let volume = read_volume(&io.input)?;
            let supp = read_supplement(&supp)?;
            let (enriched, stats) = enrich_from_supplement(&volume, &supp);
            eprintln!(
                "enriched {} entries, {} feminine forms, homonyms left without pos: {:?}",
                stats.enriched, stats.fem_forms, stats.homonyms_flagged
            );
            write_output(&io.out, &enriched.to_document().to_xml())
        }
        Command::Reify(io) => {
            let french = read_volume(&io.input)?;
            let out = reify_links(&french).map_err(|e| Failure::stage("reify", e))?;
            warn_all(&out.report);
            write_volumes(&io.out, &out.french, &out.axies, &out.khmer)
        }
        Command::Translit {
            input,
            out,
            rules,
            trace,
            text,
        } => translit(input, out, rules.as_deref(), trace, &text),
        Command::Import {
            store,
            dict,
            descriptor,
            files,
        } => import(&store, &dict, descriptor.as_deref(), &files),
        Command::Export {
            store,
            dict,
            lang,
            out,
        } => {
            let store = Store::open_dir(store.dir()?).map_err(|e| Failure::stage("export", e))?;
            let xml = match lang {
                Some(lang) => store.export_volume(&VolumeHandle::new(dict, lang)),
                None => store.export_dictionary(&dict),
            }
            .map_err(|e| Failure::stage("export", e))?;
            match out {
                Some(path) => write_output(&path, &xml),
                None => {
                    print!("{xml}");
                    Ok(())
                }
            }
        }
        Command::Serve {
            config,
            listen,
            data,
        } => serve(&config, listen, data),
        Command::Check { input } => check(&input),
        Command::Pipeline {
            io,
            supp,
            rules,
            name,
        } => pipeline(&io, &supp, rules.as_deref(), &name),
    }
}

fn ingest(io: &InOut) -> Result<(), Failure> {
    let source = read_input(&io.input)?;
    let outcome = tag_volume(source.lines());
    write_output(&io.out, &outcome.volume.to_xml())?;
    if outcome.errors.is_empty() {
        return Ok(());
    }
    Err(Failure::validation(
        "ingest",
        outcome
            .errors
            .iter()
            .map(|e| Issue::at_line(e.line, e.error.to_string()))
            .collect(),
    ))
}

fn translit(
    input: Option<PathBuf>,
    out: Option<PathBuf>,
    rules: Option<&Path>,
    trace: bool,
    text: &[String],
) -> Result<(), Failure> {
    let rules = load_rules(rules)?;
    match (input, out) {
        (Some(input), Some(out)) if text.is_empty() => {
            let mut khmer = read_volume(&input)?;
            warn_all(&transliterate_volume(&mut khmer, &rules));
            write_output(&out, &sort_volume(&khmer).to_document().to_xml())
        }
        (None, None) if !text.is_empty() => {
            let mut issues = Vec::new();
            for t in text {
                match transliterate_traced(t, &rules) {
                    Ok((tr, report)) => {
                        if trace {
                            println!("{tr}");
                        } else {
                            println!("{}", tr.khmer);
                        }
                        if !report.is_complete() {
                            issues.push(Issue::new(format!(
                                "{t}: passed through {:?}, unknown symbols {:?}",
                                report.passthrough, report.unknown_symbols
                            )));
                        }
                    }
                    Err(e) => issues.push(Issue::new(format!("{t}: {e}"))),
                }
            }
            if issues.is_empty() {
                Ok(())
            } else {
                Err(Failure::validation("translit", issues))
            }
        }
        _ => Err(Failure::usage(anyhow!(
            "give either text arguments or both --in and --out"
        ))),
    }
}

fn import(
    store: &StoreArgs,
    dict: &str,
    descriptor: Option<&Path>,
    files: &[PathBuf],
) -> Result<(), Failure> {
    let custom: Option<VolumeDescriptor> = descriptor
        .map(|p| {
            serde_json::from_str(&read_input(p)?)
                .with_context(|| format!("bad descriptor {}", p.display()))
                .map_err(Failure::usage)
        })
        .transpose()?;
    let store = Store::open_dir(store.dir()?).map_err(|e| Failure::stage("import", e))?;
    for file in files {
        let src = read_input(file)?;
        let doc = xml::parse(&src)
            .map_err(|e| Failure::stage("import", anyhow!("{}: {e}", file.display())))?;
        let (_, lang) = read_volume_root(&doc.root)
            .map_err(|e| Failure::stage("import", anyhow!("{}: {e}", file.display())))?;
        let descriptor = match &custom {
            Some(d) if d.language == lang => VolumeDescriptor {
                name: dict.to_owned(),
                ..d.clone()
            },
            _ => VolumeDescriptor::new(dict, &lang),
        };
        let handle = store
            .import_volume(&src, descriptor)
            .map_err(|e| Failure::stage("import", anyhow!("{}: {e}", file.display())))?;
        eprintln!(
            "imported {} as {}/{}",
            file.display(),
            handle.dict,
            handle.lang
        );
    }
    Ok(())
}

fn serve(config: &Path, listen: Option<SocketAddr>, data: Option<PathBuf>) -> Result<(), Failure> {
    let mut config = ServerConfig::load(config).map_err(Failure::usage)?;
    if let Some(l) = listen {
        config.listen = l;
    }
    if let Some(d) = data {
        config.data_dir = d;
    }
    let runtime = tokio::runtime::Runtime::new().map_err(|e| Failure::stage("serve", e))?;
    runtime.block_on(async move {
        let store =
            Arc::new(Store::open_dir(&config.data_dir).map_err(|e| Failure::stage("serve", e))?);
        let listener = tokio::net::TcpListener::bind(config.listen)
            .await
            .with_context(|| format!("cannot bind {}", config.listen))
            .map_err(Failure::usage)?;
        let shutdown = async {
            let _ = tokio::signal::ctrl_c().await;
        };
        motamot_server::serve_listener(listener, AppState::new(store, config), shutdown)
            .await
            .map_err(|e| Failure::stage("serve", e))
    })
}

fn check(dir: &Path) -> Result<(), Failure> {
    let (french, axies, khmer) = read_volumes(dir)?;
    let mut issues: Vec<Issue> = check_integrity(&french, &axies, &khmer)
        .into_iter()
        .map(Issue::new)
        .collect();
    for entry in french.entries.iter().chain(&khmer.entries) {
        for v in validate_lmf_shape(&entry.to_element()) {
            issues.push(Issue::new(format!("{}: {v}", entry.id)));
        }
    }
    if issues.is_empty() {
        eprintln!(
            "{} French entries, {} axies, {} Khmer entries: consistent",
            french.entries.len(),
            axies.axies.len(),
            khmer.entries.len()
        );
        Ok(())
    } else {
        for i in &issues {
            println!("{}", i.message);
        }
        Err(Failure::validation("check", issues))
    }
}

fn pipeline(io: &InOut, supp: &Path, rules: Option<&Path>, name: &str) -> Result<(), Failure> {
    let source = read_input(&io.input)?;
    let supp = read_supplement(supp)?;
    let rules = load_rules(rules)?;
    let out = run_pipeline(&source, &supp, &rules, name).map_err(|e| match e {
        PipelineError::Ingest(errors) => Failure::validation(
            "ingest",
            errors
                .iter()
                .map(|e| Issue::at_line(e.line, e.error.to_string()))
                .collect(),
        ),
        PipelineError::Restructure(e) => Failure::stage("restructure", e),
        PipelineError::Reify(e) => Failure::stage("reify", e),
    })?;
    warn_all(&out.warnings);
    create_dir(&io.out)?;
    write_output(&io.out.join(TAGGED_FILE), &out.tagged.to_xml())?;
    write_volumes(&io.out, &out.french, &out.axies, &out.khmer)?;
    if out.violations.is_empty() {
        Ok(())
    } else {
        Err(Failure::validation(
            "check",
            out.violations.into_iter().map(Issue::new).collect(),
        ))
    }
}

fn volume_file(dir: &Path, lang: &str) -> PathBuf {
    dir.join(format!("{lang}.xml"))
}

fn write_volumes(
    dir: &Path,
    french: &Volume,
    axies: &AxieVolume,
    khmer: &Volume,
) -> Result<(), Failure> {
    create_dir(dir)?;
    write_output(
        &volume_file(dir, FRENCH_LANG),
        &french.to_document().to_xml(),
    )?;
    write_output(&volume_file(dir, AXIE_LANG), &axies.to_document().to_xml())?;
    write_output(&volume_file(dir, KHMER_LANG), &khmer.to_document().to_xml())
}

fn read_volumes(dir: &Path) -> Result<(Volume, AxieVolume, Volume), Failure> {
    let axi_path = volume_file(dir, AXIE_LANG);
    let axi_doc = xml::parse(&read_input(&axi_path)?)
        .map_err(|e| Failure::stage("check", anyhow!("{}: {e}", axi_path.display())))?;
    let axies = AxieVolume::from_document(&axi_doc)
        .map_err(|e| Failure::stage("check", anyhow!("{}: {e}", axi_path.display())))?;
    Ok((
        read_volume(&volume_file(dir, FRENCH_LANG))?,
        axies,
        read_volume(&volume_file(dir, KHMER_LANG))?,
    ))
}

fn read_volume(path: &Path) -> Result<Volume, Failure> {
    let src = read_input(path)?;
    let doc =
        xml::parse(&src).map_err(|e| Failure::stage("read", anyhow!("{}: {e}", path.display())))?;
    Volume::from_document(&doc)
        .map_err(|e| Failure::stage("read", anyhow!("{}: {e}", path.display())))
}

fn read_supplement(path: &Path) -> Result<SupplementLexicon, Failure> {
    SupplementLexicon::parse(&read_input(path)?)
        .map_err(|e| Failure::stage("enrich", anyhow!("{}: {e}", path.display())))
}

fn load_rules(dir: Option<&Path>) -> Result<RuleSet, Failure> {
    match dir {
        Some(d) => RuleSet::from_dir(d).map_err(|e| Failure::stage("translit", e)),
        None => Ok(RuleSet::bundled()),
    }
}

fn warn_all(warnings: &[String]) {
    for w in warnings {
        eprintln!("warning: {w}");
    }
}

fn read_input(path: &Path) -> Result<String, Failure> {
    fs::read_to_string(path)
        .with_context(|| format!("cannot read {}", path.display()))
        .map_err(Failure::usage)
}

fn create_dir(dir: &Path) -> Result<(), Failure> {
    fs::create_dir_all(dir)
        .with_context(|| format!("cannot create {}", dir.display()))
        .map_err(|e| Failure::stage("write", e))
}

fn write_output(path: &Path, content: &str) -> Result<(), Failure> {
    fs::write(path, content)
        .with_context(|| format!("cannot write {}", path.display()))
        .map_err(|e| Failure::stage("write", e))
}
