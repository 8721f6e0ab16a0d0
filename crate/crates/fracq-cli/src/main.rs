//! `fracq`: command-line front end for the fracq-core library.
//!
//! Every subcommand reads an optional JSON config file plus `--set key=value`
//! overrides, runs its checks, prints one JSON report on stdout, and exits
//! with 0 (all checks passed), 1 (some check failed), or 2 (configuration or
//! usage error). Reports are deterministic: the same configuration and seed
//! produce byte-identical output.

use clap::{Arg, ArgAction, ArgMatches, Command};

mod commands;
mod config;
mod report;

use config::{Cfg, CliErr, CliResult};
use report::Report;

fn subcommand(name: &'static str, about: &'static str) -> Command {
    Command::new(name)
        .about(about)
        .arg(
            Arg::new("config")
                .long("config")
                .value_name("PATH")
                .help("JSON configuration file (its \"command\" field must match)"),
        )
        .arg(
            Arg::new("set")
                .long("set")
                .value_name("KEY=VALUE")
                .action(ArgAction::Append)
                .help("override one configuration key by dotted path, e.g. bubble.lambda=2"),
        )
}

fn cli() -> Command {
    Command::new("fracq")
        .version(env!("CARGO_PKG_VERSION"))
        .about("fractional Q-curvature toolbox: kernel checks, model solutions, blow-up experiments")
        .subcommand_required(true)
        .arg_required_else_help(true)
        .subcommand(subcommand(
            "verify-kernels",
            "check kernel normalizations and the boundary-operator constants",
        ))
        .subcommand(subcommand(
            "verify-bessel",
            "check the Bessel-function identities on fixed parameter sweeps",
        ))
        .subcommand(subcommand(
            "bubble",
            "evaluate the model solution: equation residual, total curvature, radial profile",
        ))
        .subcommand(subcommand(
            "blowup",
            "run the blow-up construction (growth-profile or scaled-bubble mode)",
        ))
        .subcommand(subcommand(
            "relation",
            "compare the extension-trace and spectral routes for the operator on one field",
        ))
        .subcommand(subcommand(
            "pizzetti",
            "test the solid mean-value identity for biharmonic polynomials",
        ))
        .subcommand(subcommand(
            "brezis-merle",
            "probe the integrability dichotomy for exponentials of log potentials",
        ))
        .subcommand(subcommand(
            "scan",
            "measure local curvature mass around candidate points for a field family",
        ))
}

fn main() {
    let matches = cli().get_matches();
    let (name, sub) = matches.subcommand().expect("subcommand is required");
    match run(name, sub) {
        Ok(rep) => {
            println!("{}", rep.to_json_string());
            std::process::exit(if rep.all_pass() { 0 } else { 1 });
        }
        Err(e) => {
            eprintln!("fracq: {e}");
            std::process::exit(2);
        }
    }
}

fn run(name: &str, matches: &ArgMatches) -> CliResult<Report> {
    init_threads()?;
    let sets = matches.get_many::<String>("set").into_iter().flatten();
    let cfg = Cfg::load(name, matches.get_one::<String>("config"), sets)?;
    match name {
        "verify-kernels" => commands::kernels::run(&cfg),
        "verify-bessel" => commands::bessel::run(&cfg),
        "bubble" => commands::bubble::run(&cfg),
        "blowup" => commands::blowup::run(&cfg),
        "relation" => commands::relation::run(&cfg),
        "pizzetti" => commands::pizzetti::run(&cfg),
        "brezis-merle" => commands::brezis_merle::run(&cfg),
        "scan" => commands::scan::run(&cfg),
        other => Err(CliErr(format!("unknown command {other:?}"))),
    }
}

/// `FRACQ_THREADS` caps the worker-thread pool: unset or 0 means automatic,
/// a positive integer pins the pool size (useful for reproducing reports on
/// machines with different core counts).
fn init_threads() -> CliResult<()> {
    let Some(raw) = std::env::var_os("FRACQ_THREADS") else {
        return Ok(());
    };
    let raw = raw
        .into_string()
        .map_err(|_| CliErr("FRACQ_THREADS is not valid UTF-8".into()))?;
    let n: usize = raw.trim().parse().map_err(|_| {
        CliErr(format!(
            "FRACQ_THREADS must be a nonnegative integer (0 = automatic), got {raw:?}"
        ))
    })?;
    if n == 0 {
        return Ok(());
    }
    rayon::ThreadPoolBuilder::new()
        .num_threads(n)
        .build_global()
        .map_err(|e| CliErr(format!("FRACQ_THREADS: {e}")))
}
