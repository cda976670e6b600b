use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use serde_json::json;

use semispec::config::{BcChoice, Member, RunConfig};
use semispec::harness::{self, VerificationReport};
use semispec::scaling;
use semispec::shooting;
use semispec::spectral::{self, find_eigenvalues};
use semispec::wkb;
use semispec::Error;

#[derive(Parser)]
#[command(
    name = "semispec",
    version,
    about = "Spectra and spacing checks for -h^2 u'' + x^gamma W(x) u on the half-line"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
    /// TOML run configuration.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Output directory (overrides output.dir).
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// Single semiclassical parameter replacing h_list.
    #[arg(long, global = true)]
    h: Option<f64>,
    /// dirichlet, neumann or both.
    #[arg(long, global = true)]
    bc: Option<String>,
    /// Worker threads; SEMISPEC_JOBS takes precedence.
    #[arg(long, global = true)]
    jobs: Option<usize>,
}

#[derive(Subcommand, Clone, Copy)]
enum Command {
    /// Eigenvalues per potential, h and boundary condition.
    Spectrum,
    /// Normalized spacing ratios.
    SpacingScan,
    /// WKB coefficient fits and residuals.
    WkbCompare,
    /// Decay, tail mass and Cauchy-decay checks.
    AgmonCheck,
    /// Bottom-of-well convergence and three-regime spacing sweep.
    RegimeScan,
    /// Every check; exits 1 if any fails.
    VerifyAll,
}

/// Files produced by a run, written only after every computation succeeded.
struct Outputs {
    files: Vec<(String, String)>,
    pass: bool,
}

impl Outputs {
    fn new() -> Self {
        Self {
            files: Vec::new(),
            pass: true,
        }
    }

    fn add(&mut self, name: impl Into<String>, body: String) {
        self.files.push((name.into(), body));
    }

    fn report(&mut self, stem: &str, report: &VerificationReport) {
        self.pass &= report.pass;
        self.add(format!("{stem}.json"), report.to_json());
        self.add(format!("{stem}.csv"), report.to_csv());
    }

    fn write(&self, dir: &Path) -> Result<(), Error> {
        let io = |e: std::io::Error| Error::Config(format!("cannot write to {}: {e}", dir.display()));
        std::fs::create_dir_all(dir).map_err(io)?;
        for (name, body) in &self.files {
            std::fs::write(dir.join(name), body).map_err(io)?;
        }
        Ok(())
    }
}

fn exit_code(e: &Error) -> u8 {
    match e {
        Error::Config(_) => 2,
        Error::Admissibility(_) | Error::Window { .. } => 3,
        _ => 4,
    }
}

fn kind(e: &Error) -> &'static str {
    match e {
        Error::Config(_) => "config",
        Error::Admissibility(_) | Error::Window { .. } => "admissibility",
        _ => "numerical",
    }
}

fn load(cli: &Cli) -> Result<RunConfig, Error> {
    let path = cli
        .config
        .as_ref()
        .ok_or_else(|| Error::Config("--config <path> is required".into()))?;
    let mut cfg = RunConfig::from_path(path)?;
    if let Some(h) = cli.h {
        cfg.h_list = vec![h];
    }
    if let Some(bc) = &cli.bc {
        cfg.bc = bc.parse::<BcChoice>()?;
    }
    if let Some(out) = &cli.out {
        cfg.output.dir = out.display().to_string();
    }
    Ok(cfg)
}

fn jobs(cli: &Cli) -> Result<Option<usize>, Error> {
    match std::env::var("SEMISPEC_JOBS") {
        Ok(v) => v
            .trim()
            .parse::<usize>()
            .map(Some)
            .map_err(|_| Error::Config(format!("SEMISPEC_JOBS = {v:?} is not a thread count"))),
        Err(_) => Ok(cli.jobs),
    }
}

fn spectrum(cfg: &RunConfig, members: &[Member], out: &mut Outputs) -> Result<(), Error> {
    let opts = cfg.spectral_options();
    let mut entries = Vec::new();
    for m in members {
        for &h in &cfg.h_list {
            for bc in cfg.bc.list() {
                let s = find_eigenvalues(&m.potential, m.window, h, bc, &opts)?;
                entries.push(json!({
                    "potential": m.name, "h": h, "bc": bc, "window": [m.window.lo, m.window.hi],
                    "eigenvalues": s.eigenvalues, "spacing": s.spacing,
                }));
            }
        }
    }
    out.add("spectrum.json", serde_json::to_string_pretty(&entries).unwrap());
    Ok(())
}

fn spacing_scan(cfg: &RunConfig, members: &[Member], out: &mut Outputs) -> Result<(), Error> {
    let opts = cfg.spectral_options();
    for m in members {
        let mut rows = Vec::new();
        for bc in cfg.bc.list() {
            rows.extend(spectral::spacing_scan(&m.potential, m.window, &cfg.h_list, bc, &opts)?);
        }
        out.add(format!("spacing_{}.csv", m.name), spectral::spacing_csv(&rows));
    }
    Ok(())
}

fn wkb_compare(cfg: &RunConfig, members: &[Member], out: &mut Outputs) -> Result<(), Error> {
    let so = cfg.spectral_options().shooting;
    for m in members {
        let mut csv = String::from(wkb::FIT_CSV_HEADER);
        csv.push('\n');
        for &h in &cfg.h_list {
            for e in harness::sample_energies(m.window, cfg.wkb.energies) {
                let fit = wkb::fit_at(&m.potential, e, h, &so)?;
                csv.push_str(&wkb::fit_csv_row(&fit));
                csv.push('\n');
            }
            let mid = 0.5 * (m.window.lo + m.window.hi);
            let g = shooting::integrate_g(&m.potential, mid, h, &so)?;
            out.add(format!("g_{}_h{h:e}.csv", m.name), g.to_csv());
        }
        out.add(format!("wkb_{}.csv", m.name), csv);
    }
    Ok(())
}

fn agmon_check(cfg: &RunConfig, members: &[Member], out: &mut Outputs) -> Result<(), Error> {
    let so = cfg.spectral_options().shooting;
    let mut checks = Vec::new();
    let mut mass = Vec::new();
    for m in members {
        let o = harness::agmon_suite(m, &cfg.h_list, cfg.agmon.eta, cfg.agmon.energies, &so)?;
        checks.extend(o.checks);
        mass.extend(o.mass);
        let mid = 0.5 * (m.window.lo + m.window.hi);
        for &h in &cfg.h_list {
            let g = shooting::integrate_g(&m.potential, mid, h, &so)?;
            out.add(format!("g_{}_h{h:e}.csv", m.name), g.to_csv());
        }
    }
    if cfg.h_list.len() >= 2 {
        checks.push(harness::mass_lower_bound_check(&mass));
    }
    out.report("agmon", &VerificationReport::new(checks));
    Ok(())
}

fn regime_scan(cfg: &RunConfig, members: &[Member], out: &mut Outputs) -> Result<(), Error> {
    let opts = cfg.spectral_options();
    let mut checks = Vec::new();
    let mut spacing = Vec::new();
    let mut csv = String::from("potential,regime,h,E,bc,d_h,ratio\n");
    for m in members {
        for bc in cfg.bc.list() {
            let r = scaling::bottom_check(&m.potential, bc, &cfg.h_list, cfg.regime.bottom_count, &opts)?;
            checks.push(harness::bottom_model_check(&m.name, &r));
            out.add(format!("bottom_{}_{}.csv", m.name, bc), r.to_csv());
        }
        let o = harness::spacing_suite(m, &cfg.h_list, cfg.regime.bottom_count, &opts)?;
        checks.extend(o.checks);
        for s in &o.spacing {
            let r = &s.row;
            csv.push_str(&format!(
                "{},{},{:e},{:e},{},{:e},{:e}\n",
                s.potential, s.regime, r.h, r.e, r.bc, r.d_h, r.ratio
            ));
        }
        spacing.extend(o.spacing);
    }
    checks.push(harness::spacing_law_check(&spacing));
    out.add("regime_spacing.csv", csv);
    out.report("regime", &VerificationReport::new(checks));
    Ok(())
}

fn run(cli: &Cli) -> Result<bool, Error> {
    let cfg = load(cli)?;
    let members = cfg.members()?;
    let mut out = Outputs::new();
    match cli.command {
        Command::Spectrum => spectrum(&cfg, &members, &mut out)?,
        Command::SpacingScan => spacing_scan(&cfg, &members, &mut out)?,
        Command::WkbCompare => wkb_compare(&cfg, &members, &mut out)?,
        Command::AgmonCheck => agmon_check(&cfg, &members, &mut out)?,
        Command::RegimeScan => regime_scan(&cfg, &members, &mut out)?,
        Command::VerifyAll => out.report("report", &harness::verify_all(&cfg)?),
    }
    out.write(Path::new(&cfg.output.dir))?;
    Ok(out.pass)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = jobs(&cli).and_then(|n| {
        if let Some(n) = n {
            // fails only if a pool already exists, which cannot happen here
            let _ = rayon::ThreadPoolBuilder::new().num_threads(n).build_global();
        }
        run(&cli)
    });
    match result {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => {
            eprintln!("semispec: status=fail reason=one or more checks failed");
            ExitCode::from(1)
        }
        Err(e) => {
            let reason = e.to_string().replace('\n', " ");
            eprintln!("semispec: status=error kind={} reason={reason}", kind(&e));
            ExitCode::from(exit_code(&e))
        }
    }
}
