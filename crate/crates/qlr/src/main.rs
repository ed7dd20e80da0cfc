use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use qlr::checks::{run_suite, Suite};
use qlr::config::ConfigBuilder;
use qlr::document::ResultDocument;
use qlr::fixtures::fixture_dir;
use qlr::pipeline;
use qlr::resources::resource_table;
use qlr::spectrum::{spectrum, BroadeningArg, SpectrumOptions};
use qlr_core::qlr::{Method, MethodId};

#[derive(Parser)]
#[command(name = "qlr", version, about = "Linear-response excited states on an emulated oo-UCC ground state")]
struct Cli {
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Ground state, response for every method, result document and spectra.
    Run(RunArgs),
    /// Broadened absorption spectrum from an existing result document.
    Spectrum(SpectrumArgs),
    /// Measurement-cost table per method.
    Resources(ResourcesArgs),
    /// Self-check suites on the bundled fixtures.
    Check(CheckArgs),
}

#[derive(Args)]
struct RunArgs {
    /// Key-value file with the same keys as the long flags; flags override it.
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long)]
    fcidump: Option<String>,
    #[arg(long)]
    dipoles: Option<String>,
    /// n,o
    #[arg(long)]
    active: Option<String>,
    /// sd, sdt, sdtq or full
    #[arg(long)]
    rank: Option<String>,
    #[arg(long = "method")]
    methods: Vec<String>,
    #[arg(long)]
    herm: bool,
    #[arg(long)]
    broadening: Option<String>,
    #[arg(long)]
    width_ev: Option<String>,
    #[arg(long)]
    points: Option<String>,
    #[arg(long)]
    out: Option<String>,
    #[arg(long)]
    grad_tol: Option<String>,
    #[arg(long)]
    energy_tol: Option<String>,
    #[arg(long)]
    max_iter: Option<String>,
    #[arg(long)]
    fd_step: Option<String>,
    #[arg(long)]
    analytic_theta: bool,
    #[arg(long)]
    kappa_kick: Option<String>,
    #[arg(long)]
    seed: Option<String>,
}

#[derive(Args)]
struct SpectrumArgs {
    #[arg(long)]
    result: PathBuf,
    /// Defaults to every method in the document.
    #[arg(long = "method")]
    methods: Vec<String>,
    #[arg(long, default_value = "lorentzian")]
    broadening: BroadeningArg,
    #[arg(long, default_value_t = 0.2)]
    width_ev: f64,
    #[arg(long, default_value_t = 2000)]
    points: usize,
    /// Output directory; the table goes to stdout when absent and one method is selected.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct ResourcesArgs {
    #[arg(long = "method")]
    methods: Vec<String>,
    #[arg(long)]
    herm: bool,
}

#[derive(Args)]
struct CheckArgs {
    #[arg(long, default_value = "fast")]
    suite: Suite,
    #[arg(long)]
    fast: bool,
    #[arg(long)]
    fixtures: Option<PathBuf>,
}

fn builder_from(a: &RunArgs) -> Result<ConfigBuilder, String> {
    let mut b = ConfigBuilder::default();
    if let Some(p) = &a.config {
        let text = std::fs::read_to_string(p).map_err(|e| format!("config {}: {e}", p.display()))?;
        b.apply_text(&text).map_err(|e| format!("config {}: {e}", p.display()))?;
    }
    let mut flags = ConfigBuilder::default();
    let pairs = [
        ("fcidump", &a.fcidump),
        ("dipoles", &a.dipoles),
        ("active", &a.active),
        ("rank", &a.rank),
        ("broadening", &a.broadening),
        ("width-ev", &a.width_ev),
        ("points", &a.points),
        ("out", &a.out),
        ("grad-tol", &a.grad_tol),
        ("energy-tol", &a.energy_tol),
        ("max-iter", &a.max_iter),
        ("fd-step", &a.fd_step),
        ("kappa-kick", &a.kappa_kick),
        ("seed", &a.seed),
    ];
    for (k, v) in pairs {
        if let Some(v) = v {
            flags.set(k, v).map_err(|e| e.to_string())?;
        }
    }
    for m in &a.methods {
        flags.set("method", m).map_err(|e| e.to_string())?;
    }
    if a.herm {
        flags.herm = Some(true);
    }
    if a.analytic_theta {
        flags.analytic_theta = Some(true);
    }
    b.merge(flags);
    Ok(b)
}

fn cmd_run(a: &RunArgs) -> Result<ExitCode, String> {
    let cfg = builder_from(a)?.build().map_err(|e| format!("configuration: {e}"))?;
    let out = pipeline::run(&cfg).map_err(|e| e.to_string())?;
    let doc = &out.document;
    println!("E0 = {:.10} Eh  (converged: {}, {} iterations)", doc.ground_state.energy_hartree, doc.ground_state.converged, doc.ground_state.iterations);
    for m in &doc.methods {
        println!("{}: {} states", m.method, m.states.len());
        for s in m.states.iter().take(10) {
            println!("  {:>10.5} eV  f = {:.6}", s.omega_ev, s.oscillator_strength);
        }
    }
    let dir = cfg.out.clone().unwrap_or_else(|| PathBuf::from("."));
    for p in out.write(&dir).map_err(|e| format!("writing {}: {e}", dir.display()))? {
        log::info!("wrote {}", p.display());
    }
    Ok(ExitCode::from(out.exit_code() as u8))
}

fn cmd_spectrum(a: &SpectrumArgs) -> Result<ExitCode, String> {
    let text = std::fs::read_to_string(&a.result).map_err(|e| format!("{}: {e}", a.result.display()))?;
    let doc = ResultDocument::from_json(&text).map_err(|e| format!("{}: {e}", a.result.display()))?;
    let names: Vec<String> = if a.methods.is_empty() { doc.methods.iter().map(|m| m.method.clone()).collect() } else { a.methods.clone() };
    if a.out.is_none() && names.len() != 1 {
        return Err("--out is required when more than one method is selected".into());
    }
    let opts = SpectrumOptions { kind: a.broadening.0, width_ev: a.width_ev, points: a.points };
    for name in &names {
        let m = doc.method(name).ok_or_else(|| format!("method '{name}' not in {}", a.result.display()))?;
        let curve = spectrum(&m.peaks_ev(), &opts).map_err(|e| format!("{name}: {e}"))?;
        match &a.out {
            Some(dir) => write_csv(dir, name, &curve.to_csv())?,
            None => print!("{}", curve.to_csv()),
        }
    }
    Ok(ExitCode::SUCCESS)
}

fn write_csv(dir: &Path, name: &str, csv: &str) -> Result<(), String> {
    std::fs::create_dir_all(dir).map_err(|e| e.to_string())?;
    let p = dir.join(format!("spectrum_{name}.csv"));
    std::fs::write(&p, csv).map_err(|e| format!("{}: {e}", p.display()))
}

fn cmd_resources(a: &ResourcesArgs) -> Result<ExitCode, String> {
    let mut ids = Vec::new();
    let names: Vec<String> = if a.methods.is_empty() { Method::ALL.iter().map(|m| m.name().to_string()).collect() } else { a.methods.clone() };
    for n in names.iter().flat_map(|n| n.split(',')).map(str::trim).filter(|n| !n.is_empty()) {
        let id: MethodId = n.parse().map_err(|e: qlr_core::Error| e.to_string())?;
        let id = if a.herm { MethodId::new(id.method, true).unwrap_or(id) } else { id };
        ids.push(id);
    }
    print!("{}", resource_table(&ids));
    Ok(ExitCode::SUCCESS)
}

fn cmd_check(a: &CheckArgs) -> Result<ExitCode, String> {
    let suite = if a.fast { Suite::Fast } else { a.suite };
    let dir = a.fixtures.clone().unwrap_or_else(fixture_dir);
    let report = run_suite(suite, &dir).map_err(|e| e.to_string())?;
    print!("{}", report.render());
    Ok(if report.passed() { ExitCode::SUCCESS } else { ExitCode::FAILURE })
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();
    let r = match &cli.cmd {
        Cmd::Run(a) => cmd_run(a),
        Cmd::Spectrum(a) => cmd_spectrum(a),
        Cmd::Resources(a) => cmd_resources(a),
        Cmd::Check(a) => cmd_check(a),
    };
    r.unwrap_or_else(|e| {
        eprintln!("error: {e}");
        ExitCode::FAILURE
    })
}
