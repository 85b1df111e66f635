use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::{anyhow, Result};
use clap::{Parser, Subcommand, ValueEnum};

use fraccancel::analysis::NuChoice;
use fraccancel::realize::ExportForm;
use fraccancel_cli::commands;
use fraccancel_cli::run::{ilt_params, parse_nu, resolve_scenario};
use fraccancel_cli::server;

#[derive(Parser)]
#[command(name = "fraccancel", version, about = "Fractional-order cancellation of non-minimum-phase zeros")]
struct Cli {
    /// Minimum number of inversion terms per time point.
    #[arg(long, global = true, env = "FRACCANCEL_ILT_TERMS")]
    ilt_terms: Option<usize>,

    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Step response of one loop as CSV (t, y, u) with a metrics footer.
    Simulate {
        /// Built-in scenario name or TOML file.
        #[arg(long)]
        scenario: String,
        /// Canceller order: `20`, or `4:5:6` per zero.
        #[arg(long, value_parser = parse_nu_arg)]
        nu: Option<NuChoice>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Metrics and margins for several canceller orders, one CSV row each.
    Sweep {
        #[arg(long)]
        scenario: String,
        /// Comma-separated orders, e.g. `4,5,6` or `4:5:6,6:6:6`.
        #[arg(long, value_delimiter = ',', value_parser = parse_nu_arg)]
        nus: Option<Vec<NuChoice>>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Right-half-plane real zeros of a registry plant.
    Zeros {
        #[arg(long)]
        plant: String,
    },
    /// Gain and phase margins of the open loop.
    Margins {
        #[arg(long)]
        scenario: String,
        #[arg(long, value_parser = parse_nu_arg)]
        nu: Option<NuChoice>,
        /// Add a row for the same loop without the canceller.
        #[arg(long)]
        compare_baseline: bool,
    },
    /// Integer-order rational fit of the canceller, exported as text.
    Realize {
        #[arg(long)]
        scenario: String,
        #[arg(long, value_parser = parse_nu_arg)]
        nu: Option<NuChoice>,
        #[arg(long)]
        order: usize,
        /// `lo,hi` in rad/s; defaults to two decades around the zeros.
        #[arg(long, value_parser = parse_band)]
        band: Option<(f64, f64)>,
        #[arg(long, value_enum, default_value_t = Form::Tf)]
        form: Form,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// HTTP service.
    Serve {
        #[arg(long, default_value_t = format!("127.0.0.1:{}", server::DEFAULT_PORT))]
        bind: String,
    },
}

#[derive(Clone, Copy, ValueEnum)]
enum Form {
    Tf,
    Zpk,
}

fn parse_nu_arg(s: &str) -> Result<NuChoice, String> {
    parse_nu(s).map_err(|e| e.to_string())
}

fn parse_band(s: &str) -> Result<(f64, f64), String> {
    let (lo, hi) = s.split_once(',').ok_or("expected `lo,hi`")?;
    let p = |v: &str| v.trim().parse::<f64>().map_err(|e| format!("`{v}`: {e}"));
    Ok((p(lo)?, p(hi)?))
}

fn run(cli: Cli) -> Result<i32> {
    let params = ilt_params(cli.ilt_terms)?;
    match cli.command {
        Command::Simulate { scenario, nu, out } => {
            commands::cmd_simulate(resolve_scenario(&scenario)?, nu, out.as_deref(), &params)
        }
        Command::Sweep { scenario, nus, out } => {
            commands::cmd_sweep(resolve_scenario(&scenario)?, nus, out.as_deref(), &params)
        }
        Command::Zeros { plant } => {
            print!("{}", commands::cmd_zeros(&plant)?);
            Ok(commands::EXIT_OK)
        }
        Command::Margins {
            scenario,
            nu,
            compare_baseline,
        } => {
            let (text, code) =
                commands::cmd_margins(resolve_scenario(&scenario)?, nu, compare_baseline)?;
            print!("{text}");
            Ok(code)
        }
        Command::Realize {
            scenario,
            nu,
            order,
            band,
            form,
            out,
        } => {
            let form = match form {
                Form::Tf => ExportForm::TfCoeffs,
                Form::Zpk => ExportForm::Zpk,
            };
            commands::cmd_realize(resolve_scenario(&scenario)?, nu, order, band, form, out.as_deref())
        }
        Command::Serve { bind } => {
            let rt = tokio::runtime::Runtime::new()?;
            rt.block_on(server::serve(&bind, params))
                .map_err(|e| anyhow!("serve: {e}"))?;
            Ok(commands::EXIT_OK)
        }
    }
}

fn main() -> ExitCode {
    // usage errors exit 1; 2 is reserved for unstable loops
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { 1 } else { 0 });
        }
    };
    match run(cli) {
        Ok(code) => ExitCode::from(code as u8),
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(1)
        }
    }
}
