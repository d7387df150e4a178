//! Thin command-line front end over the `spinsim` library. All simulation
//! logic lives in the library; this binary only does file plumbing.

use std::fs;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use num_complex::Complex64 as C64;
use spinsim::algebra::{expand_product_basis, CMat, DensityMatrix};
use spinsim::measure::{fid_to_csv, spectrum_to_csv, Fid};
use spinsim::program::PulseProgram;
use spinsim::{liquid_hamiltonian, SpinSystem};

#[derive(Parser)]
#[command(name = "spinsim", version, about = "NMR spin-dynamics simulator and pulse-sequence compiler")]
struct Cli {
    #[command(subcommand)]
    command: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Compile a pulse program, evolve an initial state, and write the FID
    /// (if the program acquires) or the final state.
    Simulate(SimulateArgs),
    /// Print the average-Hamiltonian report for a pulse program.
    Aht(AhtArgs),
    /// Fourier-transform a FID file into a spectrum with peak picking.
    Spectrum(SpectrumArgs),
    /// Run the state-tomography round trip on a seeded random state.
    Tomo(TomoArgs),
    /// Library sequence utilities.
    Seq(SeqArgs),
    /// Run the full acceptance suite; exit 0 iff every criterion passes.
    Verify,
}

#[derive(Args)]
struct SimulateArgs {
    /// Spin-system config file ([spins]/[j]/[dipolar] sections)
    #[arg(long)]
    system: PathBuf,
    /// Pulse-program file
    #[arg(long)]
    program: PathBuf,
    /// Initial state: "thermal:<eps>", "pseudo-pure:<eps>", or "file:<path>"
    #[arg(long, default_value = "thermal:1e-5")]
    initial_state: String,
    /// Output file (FID or state, comma-separated values)
    #[arg(long)]
    output: PathBuf,
    /// RNG seed; outputs are byte-identical for identical inputs and seed
    #[arg(long, default_value_t = 0)]
    seed: u64,
}

#[derive(Args)]
struct AhtArgs {
    #[arg(long)]
    system: PathBuf,
    #[arg(long)]
    program: PathBuf,
    /// Magnus order: 0 or 1
    #[arg(long, default_value_t = 1)]
    order: usize,
    /// Optional machine-readable dump of the interval table
    #[arg(long)]
    csv: Option<PathBuf>,
}

#[derive(Args)]
struct SpectrumArgs {
    /// FID file written by `simulate`
    #[arg(long)]
    fid: PathBuf,
    #[arg(long, default_value_t = 65536)]
    zerofill: usize,
    #[arg(long, default_value_t = 0.5)]
    line_broaden_hz: f64,
    #[arg(long)]
    output: PathBuf,
    /// Also print peaks above this fraction of the tallest one
    #[arg(long, default_value_t = 0.1)]
    peak_threshold: f64,
}

#[derive(Args)]
struct TomoArgs {
    #[arg(long)]
    system: PathBuf,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long, default_value_t = 1024)]
    npoints: usize,
    #[arg(long, default_value_t = 1e-4)]
    dwell_s: f64,
}

#[derive(Args)]
struct SeqArgs {
    #[command(subcommand)]
    command: SeqCmd,
}

#[derive(Subcommand)]
enum SeqCmd {
    /// Write a library sequence as pulse-program text.
    Export {
        /// One of: noop, decouple, cnot, pseudo-pure, wahuha
        name: String,
        /// Spin system (needed for cnot and pseudo-pure)
        #[arg(long)]
        system: Option<PathBuf>,
        /// Free-evolution interval for noop/decouple/wahuha
        #[arg(long, default_value_t = 1e-3)]
        tau_s: f64,
        #[arg(long)]
        output: Option<PathBuf>,
    },
}

/// Exit 2 for input-file problems (the diagnostics carry file/line anchors),
/// exit 1 for everything else.
enum CliError {
    Input(String),
    Other(String),
}

impl CliError {
    fn code(&self) -> ExitCode {
        match self {
            CliError::Input(_) => ExitCode::from(2),
            CliError::Other(_) => ExitCode::from(1),
        }
    }
    fn msg(&self) -> &str {
        match self {
            CliError::Input(m) | CliError::Other(m) => m,
        }
    }
}

fn main() -> ExitCode {
    // SPINSIM_THREADS caps parallelism; the current build is single-threaded,
    // so any positive value is accepted and a cap of 0 is rejected.
    if let Ok(v) = std::env::var("SPINSIM_THREADS") {
        match v.parse::<usize>() {
            Ok(n) if n >= 1 => {}
            _ => {
                eprintln!("SPINSIM_THREADS must be a positive integer, got '{v}'");
                return ExitCode::from(2);
            }
        }
    }
    let cli = Cli::parse();
    let result = match cli.command {
        Cmd::Simulate(a) => cmd_simulate(a),
        Cmd::Aht(a) => cmd_aht(a),
        Cmd::Spectrum(a) => cmd_spectrum(a),
        Cmd::Tomo(a) => cmd_tomo(a),
        Cmd::Seq(a) => match a.command {
            SeqCmd::Export { name, system, tau_s, output } => cmd_seq_export(&name, system, tau_s, output),
        },
        Cmd::Verify => cmd_verify(),
    };
    match result {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {}", e.msg());
            e.code()
        }
    }
}

fn load_system(path: &PathBuf) -> Result<SpinSystem, CliError> {
    let text = fs::read_to_string(path)
        .map_err(|e| CliError::Input(format!("{}: {e}", path.display())))?;
    SpinSystem::parse(&text, &path.display().to_string()).map_err(|e| CliError::Input(e.to_string()))
}

fn load_program(path: &PathBuf) -> Result<PulseProgram, CliError> {
    let text = fs::read_to_string(path)
        .map_err(|e| CliError::Input(format!("{}: {e}", path.display())))?;
    spinsim::parse(&text).map_err(|e| CliError::Input(format!("{}:{e}", path.display())))
}

fn load_state(spec: &str, n: usize, sys: &SpinSystem) -> Result<DensityMatrix, CliError> {
    if let Some(eps) = spec.strip_prefix("thermal:") {
        let eps: f64 = eps.parse().map_err(|_| CliError::Input(format!("bad epsilon '{eps}'")))?;
        if eps <= 0.0 {
            return Err(CliError::Input("epsilon must be positive".into()));
        }
        return Ok(DensityMatrix::thermal(n, eps));
    }
    if let Some(eps) = spec.strip_prefix("pseudo-pure:") {
        let eps: f64 = eps.parse().map_err(|_| CliError::Input(format!("bad epsilon '{eps}'")))?;
        let h = liquid_hamiltonian(sys).map_err(|e| CliError::Other(e.to_string()))?;
        let prog = spinsim::seqlib::pseudo_pure_sequence(sys)
            .map_err(|e| CliError::Other(e.to_string()))?;
        let segs = spinsim::compile(&prog, sys, &h).map_err(|e| CliError::Other(e.to_string()))?;
        let rho0 = spinsim::seqlib::single_spin_thermal(n, eps);
        return spinsim::evolve(&rho0, &segs, None).map_err(|e| CliError::Other(e.to_string()));
    }
    if let Some(path) = spec.strip_prefix("file:") {
        let text = fs::read_to_string(path).map_err(|e| CliError::Input(format!("{path}: {e}")))?;
        let dim = 1usize << n;
        let mut entries = Vec::new();
        for (lineno, line) in text.lines().enumerate() {
            let line = line.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let mut parts = line.split(',');
            let re: f64 = parts
                .next()
                .and_then(|s| s.trim().parse().ok())
                .ok_or_else(|| CliError::Input(format!("{path}:{}: bad entry", lineno + 1)))?;
            let im: f64 = parts
                .next()
                .and_then(|s| s.trim().parse().ok())
                .ok_or_else(|| CliError::Input(format!("{path}:{}: bad entry", lineno + 1)))?;
            entries.push(C64::new(re, im));
        }
        if entries.len() != dim * dim {
            return Err(CliError::Input(format!(
                "{path}: expected {} entries (row-major {dim}x{dim}), got {}",
                dim * dim,
                entries.len()
            )));
        }
        let m = CMat::from_row_slice(dim, dim, &entries);
        return DensityMatrix::new(m).map_err(|e| CliError::Input(format!("{path}: {e}")));
    }
    Err(CliError::Input(format!(
        "initial state '{spec}' not understood; use thermal:<eps>, pseudo-pure:<eps>, or file:<path>"
    )))
}

fn cmd_simulate(a: SimulateArgs) -> Result<ExitCode, CliError> {
    let sys = load_system(&a.system)?;
    let prog = load_program(&a.program)?;
    let n = sys.spins().len();
    let h = liquid_hamiltonian(&sys).map_err(|e| CliError::Other(e.to_string()))?;
    let rho0 = load_state(&a.initial_state, n, &sys)?;
    let _ = a.seed; // simulation is deterministic; the seed is part of the contract only

    // split at the first acquire: evolve the prefix, then acquire if present
    let acq = prog.events.iter().find_map(|e| match e {
        spinsim::Event::Acquire { npoints, dwell_s, decouple } => {
            Some((*npoints, *dwell_s, decouple.clone()))
        }
        _ => None,
    });
    let prefix = PulseProgram {
        events: prog
            .events
            .iter()
            .take_while(|e| !matches!(e, spinsim::Event::Acquire { .. }))
            .cloned()
            .collect(),
    };
    let segs = spinsim::compile(&prefix, &sys, &h).map_err(|e| {
        CliError::Input(format!("{}:{e}", a.program.display()))
    })?;
    let rho = spinsim::evolve(&rho0, &segs, None).map_err(|e| CliError::Other(e.to_string()))?;

    if let Some((np, dwell, decouple)) = acq {
        let dec: Vec<usize> = decouple
            .iter()
            .map(|l| sys.index_of(l).map_err(|e| CliError::Input(e.to_string())))
            .collect::<Result<_, _>>()?;
        let fid = spinsim::measure::acquire(&rho, &sys, &h, np, dwell, None, &dec)
            .map_err(|e| CliError::Other(e.to_string()))?;
        fs::write(&a.output, fid_to_csv(&fid))
            .map_err(|e| CliError::Other(format!("{}: {e}", a.output.display())))?;
        println!("wrote {} FID points to {}", np, a.output.display());
    } else {
        let dim = 1usize << n;
        let mut out = String::from("# final density matrix, row-major re,im\n");
        for r in 0..dim {
            for c in 0..dim {
                let z = rho.matrix()[(r, c)];
                out.push_str(&format!("{:.17e},{:.17e}\n", z.re, z.im));
            }
        }
        fs::write(&a.output, out)
            .map_err(|e| CliError::Other(format!("{}: {e}", a.output.display())))?;
        println!("wrote final state to {}", a.output.display());
    }
    Ok(ExitCode::SUCCESS)
}

fn cmd_aht(a: AhtArgs) -> Result<ExitCode, CliError> {
    let sys = load_system(&a.system)?;
    let prog = load_program(&a.program)?;
    let h = liquid_hamiltonian(&sys).map_err(|e| CliError::Other(e.to_string()))?;
    let frames = spinsim::aht::toggling_frames(&prog, &sys, &h)
        .map_err(|e| CliError::Input(format!("{}: {e}", a.program.display())))?;
    let report = spinsim::aht::magnus(&frames, a.order).map_err(|e| CliError::Other(e.to_string()))?;

    println!("cycle time   {:.6e} s", report.cycle_s);
    println!("cyclic       {}", report.cyclic);
    println!("residual     {:.3e}", report.residual_norm);
    println!("\ninterval  duration_s     toggled terms");
    for (i, (dur, terms)) in report.intervals.iter().enumerate() {
        let rendered: Vec<String> = terms
            .iter()
            .map(|(ps, c)| format!("{:+.4e}·{}", c.re, ps.render()))
            .collect();
        println!("{i:>8}  {dur:<12.6e}  {}", rendered.join("  "));
    }
    println!("\nzeroth-order average:");
    for (ps, c) in &report.h0_terms {
        println!("  {:+.6e}·{}", c.re, ps.render());
    }
    if a.order >= 1 {
        println!("first-order correction:");
        if report.h1_terms.is_empty() {
            println!("  (zero)");
        }
        for (ps, c) in &report.h1_terms {
            println!("  ({:+.6e}{:+.6e}i)·{}", c.re, c.im, ps.render());
        }
    }
    if let Some(path) = a.csv {
        let mut out = String::from("# interval,duration_s,term,re,im\n");
        for (i, (dur, terms)) in report.intervals.iter().enumerate() {
            for (ps, c) in terms {
                out.push_str(&format!("{i},{dur:.17e},{},{:.17e},{:.17e}\n", ps.render(), c.re, c.im));
            }
        }
        fs::write(&path, out).map_err(|e| CliError::Other(format!("{}: {e}", path.display())))?;
    }
    Ok(ExitCode::SUCCESS)
}

fn parse_fid_csv(text: &str, path: &str) -> Result<Fid, CliError> {
    let mut dwell = None;
    let mut channel = String::from("13C");
    let mut samples = Vec::new();
    for (lineno, line) in text.lines().enumerate() {
        let line = line.trim();
        if let Some(rest) = line.strip_prefix("# dwell_s=") {
            dwell = rest.trim().parse::<f64>().ok();
        } else if let Some(rest) = line.strip_prefix("# channel=") {
            channel = rest.trim().to_string();
        } else if line.is_empty() || line.starts_with('#') {
            continue;
        } else {
            let mut parts = line.split(',');
            let bad = || CliError::Input(format!("{path}:{}: bad sample", lineno + 1));
            let re: f64 = parts.next().and_then(|s| s.trim().parse().ok()).ok_or_else(bad)?;
            let im: f64 = parts.next().and_then(|s| s.trim().parse().ok()).ok_or_else(bad)?;
            samples.push(C64::new(re, im));
        }
    }
    let dwell = dwell.ok_or_else(|| CliError::Input(format!("{path}: missing '# dwell_s=' header")))?;
    Ok(Fid { samples, dwell_s: dwell, channel })
}

fn cmd_spectrum(a: SpectrumArgs) -> Result<ExitCode, CliError> {
    let text = fs::read_to_string(&a.fid)
        .map_err(|e| CliError::Input(format!("{}: {e}", a.fid.display())))?;
    let fid = parse_fid_csv(&text, &a.fid.display().to_string())?;
    let spec = spinsim::measure::spectrum(&fid, a.zerofill, a.line_broaden_hz);
    fs::write(&a.output, spectrum_to_csv(&spec))
        .map_err(|e| CliError::Other(format!("{}: {e}", a.output.display())))?;
    let peaks = spinsim::measure::peak_pick(&spec, a.peak_threshold);
    println!("wrote spectrum to {}", a.output.display());
    println!("peaks ({}):", peaks.len());
    for (f, amp) in peaks {
        println!("  {f:>12.2} Hz  {amp:.4e}");
    }
    Ok(ExitCode::SUCCESS)
}

fn cmd_tomo(a: TomoArgs) -> Result<ExitCode, CliError> {
    use rand::{Rng, SeedableRng};
    let sys = load_system(&a.system)?;
    let proto = spinsim::tomo::TomographyProtocol::new(&sys, a.npoints, a.dwell_s)
        .map_err(|e| CliError::Input(e.to_string()))?;
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(a.seed);
    let mut g = CMat::zeros(8, 8);
    for r in 0..8 {
        for c in 0..8 {
            g[(r, c)] = C64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0));
        }
    }
    let p = &g * g.adjoint();
    let tr = p.trace().re;
    let rho = DensityMatrix::new(p / C64::new(tr, 0.0)).map_err(|e| CliError::Other(e.to_string()))?;
    let rec = proto.run(&rho).map_err(|e| CliError::Other(e.to_string()))?;
    let err = spinsim::algebra::max_norm(&(rec.matrix() - rho.matrix()));
    println!("seed {}: tomography round-trip max-norm error {err:.3e}", a.seed);
    println!("reconstructed product-operator coefficients (|c| > 1e-6):");
    let terms = expand_product_basis(rec.matrix()).map_err(|e| CliError::Other(e.to_string()))?;
    for (ps, c) in terms {
        if c.norm() > 1e-6 {
            println!("  {:+.6}{:+.6}i · {}", c.re, c.im, ps.render());
        }
    }
    Ok(ExitCode::SUCCESS)
}

fn cmd_seq_export(
    name: &str,
    system: Option<PathBuf>,
    tau_s: f64,
    output: Option<PathBuf>,
) -> Result<ExitCode, CliError> {
    let sys = match &system {
        Some(p) => Some(load_system(p)?),
        None => None,
    };
    let need_sys = || {
        sys.clone()
            .ok_or_else(|| CliError::Input(format!("sequence '{name}' needs --system")))
    };
    let prog = match name {
        "noop" => spinsim::seqlib::noop_sequence(tau_s),
        "decouple" => spinsim::seqlib::decouple_sequence("c", tau_s),
        "wahuha" => spinsim::seqlib::wahuha_sequence(tau_s),
        "cnot" => {
            let s = need_sys()?;
            let labels: Vec<String> = s.spins().iter().map(|sp| sp.label.clone()).collect();
            spinsim::seqlib::cnot_sequence(&labels[0], &labels[1], &s)
                .map_err(|e| CliError::Other(e.to_string()))?
        }
        "pseudo-pure" => spinsim::seqlib::pseudo_pure_sequence(&need_sys()?)
            .map_err(|e| CliError::Other(e.to_string()))?,
        other => {
            return Err(CliError::Input(format!(
                "unknown sequence '{other}'; available: noop, decouple, cnot, pseudo-pure, wahuha"
            )))
        }
    };
    let text = prog.render();
    match output {
        Some(path) => {
            fs::write(&path, &text).map_err(|e| CliError::Other(format!("{}: {e}", path.display())))?;
            println!("wrote {name} to {}", path.display());
        }
        None => print!("{text}"),
    }
    Ok(ExitCode::SUCCESS)
}

fn cmd_verify() -> Result<ExitCode, CliError> {
    let outcomes = spinsim::verify::run_acceptance();
    print!("{}", spinsim::verify::render_report(&outcomes));
    if outcomes.iter().all(|o| o.passed) {
        Ok(ExitCode::SUCCESS)
    } else {
        Ok(ExitCode::from(1))
    }
}
