use std::path::PathBuf;
use std::process::ExitCode;

use clap::Parser;

use ltsdg::config::{build, parse_pairs, Invocation};
use ltsdg::runner::{convergence_study, errors_csv, run_case, write_outputs};
use ltsdg::Error;

/// RKDG solver with predictor-corrector local time stepping for 1D
/// conservation laws. Flags override values read from `--config`.
#[derive(Parser, Debug)]
#[command(name = "ltsdg", version)]
struct Cli {
    /// Key-value config file.
    #[arg(long)]
    config: Option<PathBuf>,
    /// advection_smooth, advection_step, burgers, sod, lax or blast.
    #[arg(long)]
    case: Option<String>,
    #[arg(long)]
    order: Option<String>,
    /// Coarse cell size; fractions such as 1/40 are accepted.
    #[arg(long)]
    dx_coarse: Option<String>,
    /// Sub-intervals as lo:hi:M,lo:hi:M,...
    #[arg(long, allow_hyphen_values = true)]
    regions: Option<String>,
    /// Ratio M of the refined region(s) of the case layout.
    #[arg(long)]
    ratio: Option<String>,
    /// Euler tube layout: two or three subdomains.
    #[arg(long)]
    layout: Option<String>,
    #[arg(long)]
    t_end: Option<String>,
    #[arg(long)]
    cfl: Option<String>,
    #[arg(long)]
    limiter_cm: Option<String>,
    /// lax_friedrichs, godunov or engquist_osher.
    #[arg(long)]
    flux: Option<String>,
    /// lts, gts-coarse or gts-fine.
    #[arg(long)]
    stepping: Option<String>,
    /// Comma separated snapshot times.
    #[arg(long)]
    snapshots: Option<String>,
    /// Output directory.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Run a convergence sweep over these coarse sizes.
    #[arg(long)]
    dx_list: Option<String>,
    /// Ratios for the sweep.
    #[arg(long)]
    ratios: Option<String>,
    /// Any other setting as key=value.
    #[arg(long = "set", value_name = "KEY=VALUE")]
    set: Vec<String>,
}

impl Cli {
    fn pairs(&self) -> Result<Vec<(String, String)>, Error> {
        let mut pairs = match &self.config {
            Some(path) => parse_pairs(&std::fs::read_to_string(path).map_err(|e| Error::Config(format!("{}: {e}", path.display())))?)?,
            None => Vec::new(),
        };
        let flags = [
            ("case", &self.case),
            ("order", &self.order),
            ("dx_coarse", &self.dx_coarse),
            ("regions", &self.regions),
            ("ratio", &self.ratio),
            ("layout", &self.layout),
            ("t_end", &self.t_end),
            ("cfl", &self.cfl),
            ("limiter_cm", &self.limiter_cm),
            ("flux", &self.flux),
            ("stepping", &self.stepping),
            ("snapshots", &self.snapshots),
            ("dx_list", &self.dx_list),
            ("ratios", &self.ratios),
        ];
        for (k, v) in flags {
            if let Some(v) = v {
                pairs.push((k.to_string(), v.clone()));
            }
        }
        if let Some(out) = &self.out {
            pairs.push(("out".into(), out.display().to_string()));
        }
        for s in &self.set {
            let (k, v) = s.split_once('=').ok_or_else(|| Error::Config(format!("--set expects KEY=VALUE, got '{s}'")))?;
            pairs.push((k.to_string(), v.to_string()));
        }
        Ok(pairs)
    }
}

fn is_config_error(e: &Error) -> bool {
    matches!(e, Error::Config(_) | Error::Mesh(_) | Error::Unsupported(_))
}

fn execute(inv: &Invocation) -> Result<(), Error> {
    let cfg = &inv.config;
    let out = cfg.out.clone().unwrap_or_else(|| PathBuf::from("out"));
    if let Some(sweep) = &inv.sweep {
        let rows = convergence_study(cfg, &sweep.dxs, &sweep.ratios)?;
        std::fs::create_dir_all(&out)?;
        let text = errors_csv(cfg, &rows);
        std::fs::write(out.join("errors.csv"), &text)?;
        print!("{text}");
        return Ok(());
    }
    let result = run_case(cfg)?;
    write_outputs(&result, &out)?;
    let r = &result.report;
    println!("{} {}: {} steps to t = {}", cfg.case, r.scheme, result.steps, r.time);
    println!("mesh: {}", r.mesh);
    if let Some(e) = r.rel_l1_error {
        let shown: Vec<String> = e[..r.nvar].iter().map(|x| format!("{x:.6e}")).collect();
        println!("relative L1 error: {}", shown.join(" "));
    }
    let drift: Vec<String> = result.max_relative_mass_drift()[..r.nvar].iter().map(|x| format!("{x:.3e}")).collect();
    println!("max relative mass drift: {}", drift.join(" "));
    println!("outputs in {}", out.display());
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let inv = match cli.pairs().and_then(|p| build(&p)) {
        Ok(inv) => inv,
        Err(e) => {
            eprintln!("error: {e}");
            return ExitCode::from(1);
        }
    };
    match execute(&inv) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(if is_config_error(&e) { 1 } else { 2 })
        }
    }
}
