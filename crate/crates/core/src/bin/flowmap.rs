use anyhow::{bail, Context, Result};
use clap::{Parser, Subcommand};
use flowmap::contracts::InjectionKind;
use flowmap::mapping::{load_ground_truth, Decision, Suggestion};
use flowmap::pm::{extract_pm_dir, save_pm};
use flowmap::workbench::{CheckKind, CreateSession, ServiceError, SessionStore};
use std::path::PathBuf;
use std::process::ExitCode;

/// `println!` that stops quietly when stdout is closed (e.g. piped into `head`).
macro_rules! say {
    ($($arg:tt)*) => {{
        use std::io::Write as _;
        if writeln!(std::io::stdout().lock(), $($arg)*).is_err() {
            std::process::exit(0);
        }
    }};
}

/// Maps security data flow diagrams onto code and checks the code against them.
#[derive(Parser)]
#[command(name = "flowmap", version)]
struct Cli {
    /// Session root (defaults to $FLOWMAP_HOME, then ./.flowmap).
    #[arg(long, global = true)]
    home: Option<PathBuf>,
    /// Print JSON instead of text.
    #[arg(long, global = true)]
    json: bool,
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Extract the program model of a corpus.
    Extract {
        corpus: PathBuf,
        #[arg(short, long)]
        output: Option<PathBuf>,
    },
    #[command(subcommand)]
    Session(SessionCmd),
    /// Show the current suggestions.
    Suggest { session: String },
    /// Accept, reject or tolerate a mapping entry.
    Decide { session: String, entry: String, decision: String },
    /// Map a design element (`model/element`) to a program element id.
    Map { session: String, dfd: String, pm: String },
    /// Run one automated mapping iteration.
    Iterate { session: String },
    /// Run a compliance check: contracts, crypto, design or taint.
    Check {
        session: String,
        kind: String,
        #[arg(long)]
        mode: Option<String>,
    },
    /// Score the mapping against a ground truth.
    Eval {
        session: String,
        #[arg(long = "ground-truth")]
        ground_truth: PathBuf,
    },
    /// Inject contracts one at a time and score the checks.
    Inject {
        session: String,
        #[arg(long, default_value = "enc,dec,fwd,join")]
        kinds: String,
    },
    /// Serve the HTTP API.
    Serve {
        #[arg(long, default_value_t = 8080)]
        port: u16,
        #[arg(long, default_value = "127.0.0.1")]
        host: std::net::IpAddr,
    },
}

#[derive(Subcommand)]
enum SessionCmd {
    /// Create a session from a corpus and one or more SecDFD files.
    New {
        corpus: PathBuf,
        #[arg(required = true)]
        models: Vec<PathBuf>,
        #[arg(long)]
        crypto: Option<PathBuf>,
        #[arg(long)]
        sources: Option<PathBuf>,
        #[arg(long)]
        sinks: Option<PathBuf>,
    },
    /// List stored sessions.
    List,
}

fn print_suggestions(v: &[Suggestion]) {
    let mut group = None;
    for s in v {
        if group != Some(&s.dfd_element) {
            say!("{}", s.dfd_element);
            group = Some(&s.dfd_element);
        }
        say!(
            "  {:<6} {:.3} {:<19} {:<12} {}",
            s.entry,
            s.score,
            format!("{:?}", s.kind),
            format!("{:?}", s.state),
            s.pm_element
        );
    }
}

fn json_out(v: &impl serde::Serialize) -> Result<()> {
    say!("{}", serde_json::to_string_pretty(v)?);
    Ok(())
}

fn run(cli: Cli) -> Result<ExitCode> {
    let store = cli.home.clone().map_or_else(SessionStore::from_env, SessionStore::new);
    match cli.cmd {
        Cmd::Extract { corpus, output } => {
            let pm = extract_pm_dir(&corpus).with_context(|| format!("extracting {}", corpus.display()))?;
            let bytes = save_pm(&pm);
            match output {
                Some(p) => std::fs::write(&p, bytes).with_context(|| format!("writing {}", p.display()))?,
                None => say!("{}", String::from_utf8(bytes)?),
            }
        }
        Cmd::Session(SessionCmd::New {
            corpus,
            models,
            crypto,
            sources,
            sinks,
        }) => {
            let s = store.create(&CreateSession {
                corpus,
                models,
                crypto,
                sources,
                sinks,
            })?;
            if cli.json {
                json_out(&s.meta)?;
            } else {
                say!("{}", s.meta.id);
            }
        }
        Cmd::Session(SessionCmd::List) => {
            let all = store.list()?;
            if cli.json {
                json_out(&all)?;
            } else {
                for m in all {
                    say!("{}  {}  {}", m.id, m.corpus, m.models.join(" "));
                }
            }
        }
        Cmd::Suggest { session } => {
            let v = store.open(&session)?.suggestions();
            if cli.json {
                json_out(&v)?;
            } else {
                print_suggestions(&v);
            }
        }
        Cmd::Decide { session, entry, decision } => {
            let d: Decision = decision.parse().map_err(anyhow::Error::msg)?;
            let v = store.update(&session, |s| s.decide(&entry, d))?;
            if cli.json {
                json_out(&v)?;
            }
        }
        Cmd::Map { session, dfd, pm } => {
            let id = store.update(&session, |s| s.map(&dfd, &pm))?;
            say!("{id}");
        }
        Cmd::Iterate { session } => {
            let v = store.update(&session, |s| Ok(s.iterate()))?;
            if cli.json {
                json_out(&v)?;
            } else {
                print_suggestions(&v);
            }
        }
        Cmd::Check { session, kind, mode } => {
            let kind = CheckKind::parse(&kind, mode.as_deref()).map_err(anyhow::Error::msg)?;
            let report = store.update(&session, |s| s.check(kind))?;
            if cli.json {
                json_out(&report)?;
            } else {
                for f in &report.findings {
                    say!("{} {:<24} {}", f.id, f.kind, f.message);
                }
                say!("{}: {} finding(s)", report.check, report.findings.len());
            }
            if !report.findings.is_empty() {
                return Ok(ExitCode::from(2));
            }
        }
        Cmd::Eval { session, ground_truth } => {
            let bytes = std::fs::read(&ground_truth).with_context(|| format!("reading {}", ground_truth.display()))?;
            let gt = load_ground_truth(&bytes)?;
            let r = store.open(&session)?.evaluate(&gt);
            if cli.json {
                json_out(&r)?;
            } else {
                let pct = |x: Option<f64>| x.map_or("n/a".to_string(), |v| format!("{:.1}%", v * 100.0));
                say!("TP {}  FP {}  FN {}  precision {}  recall {}", r.tp, r.fp, r.fn_, pct(r.precision), pct(r.recall));
            }
        }
        Cmd::Inject { session, kinds } => {
            let kinds = InjectionKind::parse_list(&kinds).map_err(anyhow::Error::msg)?;
            if kinds.is_empty() {
                bail!("no contract kinds given");
            }
            let r = store.open(&session)?.inject(&kinds)?;
            if cli.json {
                json_out(&r)?;
            } else {
                for o in &r.outcomes {
                    let c = &o.contract;
                    say!(
                        "{:<5} {}/{} {} in {} out {}",
                        if o.detected { "TP" } else { "FN" },
                        o.model,
                        o.process,
                        c.kind.keyword(),
                        c.in_assets.join(","),
                        c.out_assets.join(",")
                    );
                }
                say!("TP {}  FP {}  FN {}", r.tp, r.fp, r.fn_);
            }
        }
        Cmd::Serve { port, host } => {
            let addr = std::net::SocketAddr::new(host, port);
            let rt = tokio::runtime::Runtime::new()?;
            eprintln!("listening on http://{addr}/api/v1");
            rt.block_on(flowmap::workbench::server::serve(store, addr))?;
        }
    }
    Ok(ExitCode::SUCCESS)
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(code) => code,
        Err(e) => {
            match e.downcast_ref::<ServiceError>() {
                Some(ServiceError::Parse(files)) => {
                    eprintln!("error: {e}");
                    for f in files {
                        eprintln!("  {}: {}", f.file, f.message);
                    }
                }
                _ => eprintln!("error: {e:#}"),
            }
            ExitCode::from(1)
        }
    }
}
