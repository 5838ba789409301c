use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use codecity::agent::{analyze_tree, emit_snapshot_document, read_changed_paths, DEFAULT_GLOB};
use codecity::ci::{self, CiContext, CiFlags, JobError, LinkJob};
use codecity::model::CommitRef;
use codecity::service::{self, GhsConfig, ServiceConfig};

#[derive(Parser)]
#[command(name = "codecity", version, about = "Software-city code review toolkit")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Analyze a source tree and write its structure document
    Analyze {
        #[arg(long)]
        root: PathBuf,
        #[arg(long)]
        app: String,
        #[arg(long)]
        commit: String,
        #[arg(long, default_value = ci::DEFAULT_BRANCH)]
        branch: String,
        #[arg(long)]
        parent: Option<String>,
        /// Include glob, repeatable
        #[arg(long = "include", default_value = DEFAULT_GLOB)]
        include: Vec<String>,
        /// `git diff --name-status` output; reported only, the tree is always analyzed in full
        #[arg(long)]
        changed_list: Option<PathBuf>,
        /// Output file, stdout when absent
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Analyze a source tree and push it to the review service
    CiAnalyze {
        #[arg(long)]
        root: PathBuf,
        #[arg(long)]
        app: String,
        #[arg(long)]
        commit: Option<String>,
        #[arg(long)]
        branch: Option<String>,
        #[arg(long)]
        api: Option<String>,
    },
    /// Replay a span fixture against the review service
    CiReplay {
        #[arg(long)]
        fixture: PathBuf,
        #[arg(long)]
        app: String,
        #[arg(long)]
        commit: Option<String>,
        #[arg(long, default_value_t = 1.0)]
        time_scale: f64,
        #[arg(long)]
        api: Option<String>,
    },
    /// Insert or refresh the comparison link in a change request description
    CiLink {
        #[arg(long)]
        app: String,
        #[arg(long)]
        base: String,
        #[arg(long)]
        target: String,
        #[arg(long)]
        ghs_url: String,
        #[arg(long)]
        project: String,
        #[arg(long)]
        cr: String,
        #[arg(long, default_value = ci::DEFAULT_TOKEN_ENV)]
        token_env: String,
        #[arg(long)]
        frontend_url: Option<String>,
        #[arg(long)]
        base_window: Option<u64>,
        #[arg(long)]
        target_window: Option<u64>,
    },
    /// Run the review service
    Serve,
}

fn analyze(
    root: PathBuf,
    commit_ref: Result<CommitRef, String>,
    include: Vec<String>,
    changed_list: Option<PathBuf>,
    out: Option<PathBuf>,
) -> Result<(), JobError> {
    let commit_ref = commit_ref.map_err(JobError::Usage)?;
    if let Some(path) = changed_list {
        let text = std::fs::read_to_string(&path).map_err(|source| JobError::Io { path: path.clone(), source })?;
        let changed = read_changed_paths(&text).map_err(|e| JobError::Usage(e.to_string()))?;
        log::info!("{} changed paths listed; analyzing the full tree", changed.len());
    }
    let analysis = analyze_tree(&root, &include, commit_ref).map_err(JobError::Analysis)?;
    for w in &analysis.snapshot.warnings {
        log::warn!("{}: {}", w.path, w.reason);
    }
    let bytes = emit_snapshot_document(&analysis.snapshot);
    match out {
        Some(path) => std::fs::write(&path, bytes).map_err(|source| JobError::Io { path, source }),
        None => {
            use std::io::Write;
            let mut stdout = std::io::stdout().lock();
            stdout.write_all(&bytes).and_then(|_| stdout.write_all(b"\n")).map_err(|source| JobError::Io { path: "<stdout>".into(), source })
        }
    }
}

fn report<T: std::fmt::Debug>(r: Result<T, JobError>) -> ExitCode {
    match &r {
        Ok(v) => log::info!("{v:?}"),
        Err(e) => eprintln!("codecity: {e}"),
    }
    ExitCode::from(ci::exit_code(&r) as u8)
}

#[tokio::main]
async fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("info")).init();
    let cli = Cli::parse();
    let client = reqwest::Client::new();
    match cli.command {
        Command::Analyze { root, app, commit, branch, parent, include, changed_list, out } => {
            let cref = CommitRef::new(app, branch, commit, parent).map_err(|e| e.to_string());
            report(tokio::task::spawn_blocking(move || analyze(root, cref, include, changed_list, out)).await.expect("analysis task"))
        }
        Command::CiAnalyze { root, app, commit, branch, api } => {
            let flags = CiFlags { application: app, commit, branch, api_url: api };
            let r = match CiContext::resolve(&flags, ci::process_env) {
                Ok(ctx) => ci::run_analyze_job(&client, &ctx, &root).await,
                Err(e) => Err(e),
            };
            report(r)
        }
        Command::CiReplay { fixture, app, commit, time_scale, api } => {
            let flags = CiFlags { application: app, commit, branch: None, api_url: api };
            let r = match CiContext::resolve(&flags, ci::process_env) {
                Ok(ctx) => ci::run_trace_replay(&client, &ctx, &fixture, time_scale).await,
                Err(e) => Err(e),
            };
            report(r)
        }
        Command::CiLink { app, base, target, ghs_url, project, cr, token_env, frontend_url, base_window, target_window } => {
            let job = LinkJob {
                application: app,
                base,
                target,
                base_window,
                target_window,
                frontend_url,
                ghs: GhsConfig { base_url: ghs_url, project_id: project, cr_id: cr, token_env_var: token_env },
            };
            report(ci::run_link_job(&client, &job, ci::process_env).await.map(|_| "description updated"))
        }
        Command::Serve => {
            let r = match ServiceConfig::from_env(ci::process_env) {
                Ok(config) => service::serve(&config).await,
                Err(e) => Err(e),
            };
            match r {
                Ok(()) => ExitCode::SUCCESS,
                Err(e) => {
                    eprintln!("codecity: {e}");
                    ExitCode::from(1)
                }
            }
        }
    }
}
