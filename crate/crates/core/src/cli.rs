//! `beamfocus` command line: `run`, `sweep` and `beampattern`.
//!
//! Exit codes: 0 on success, 2 on usage errors (bad flags, unreadable or
//! invalid scenario), 1 when a run fails.

use std::ffi::OsString;
use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};

use clap::{Parser, Subcommand};

use crate::analogapprox::write_eta_trace_csv;
use crate::beamforming::{beampattern, write_beampattern_csv, PolarRaster};
use crate::error::{Error, Result};
use crate::experiments::{sweep, write_sweep_csv, Method, Runner, SweepParam, SweepSpec};
use crate::scenario::ScenarioConfig;
use crate::semidigital::write_ao_trace_csv;

#[derive(Parser, Debug)]
#[command(name = "beamfocus", version, about = "Secure near-field wideband beamfocusing simulator")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Run one method and print its secrecy report.
    Run {
        /// Scenario file, or `default` / `desk` for the built-in scenarios.
        scenario: String,
        #[arg(long)]
        method: String,
        /// Also print the iteration traces as CSV.
        #[arg(long)]
        trace: bool,
        /// Write the per-carrier report CSV here.
        #[arg(long)]
        report: Option<PathBuf>,
    },
    /// Sweep one parameter over several methods and write a CSV.
    Sweep {
        scenario: String,
        /// NT, chi (seconds), B (hertz) or P (dBm).
        #[arg(long)]
        param: String,
        /// Comma-separated values.
        #[arg(long, value_delimiter = ',', required = true)]
        values: Vec<f64>,
        /// Comma-separated method names.
        #[arg(long, value_delimiter = ',', required = true)]
        methods: Vec<String>,
        #[arg(long)]
        out: PathBuf,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Write 0 in the wall_s column so reruns are byte-identical.
        #[arg(long)]
        no_timing: bool,
    },
    /// Export the beampattern of a method over a polar raster.
    Beampattern {
        scenario: String,
        #[arg(long)]
        method: String,
        #[arg(long)]
        out: PathBuf,
        /// Raster size as RANGExANGLE cells.
        #[arg(long, default_value = "200x200")]
        resolution: String,
    },
}

/// Errors that map to exit code 2.
fn usage(e: &Error) -> bool {
    matches!(e, Error::InvalidArgument(_) | Error::Parse(_) | Error::UnknownMethod(_))
}

fn load_scenario(arg: &str) -> std::result::Result<ScenarioConfig, (i32, String)> {
    let path = Path::new(arg);
    let cfg = if path.exists() {
        ScenarioConfig::load(path)
    } else {
        match arg {
            "default" => Ok(ScenarioConfig::standard()),
            "desk" => Ok(ScenarioConfig::desk()),
            _ => return Err((2, format!("scenario file `{arg}` not found"))),
        }
    };
    let cfg = cfg.and_then(|c| c.validate().map(|_| c)).map_err(|e| (2, e.to_string()))?;
    Ok(cfg)
}

fn parse_resolution(s: &str) -> Option<(usize, usize)> {
    let (a, b) = s.split_once(['x', 'X'])?;
    Some((a.trim().parse().ok()?, b.trim().parse().ok()?))
}

fn create(path: &Path) -> Result<BufWriter<File>> {
    File::create(path).map(BufWriter::new).map_err(|source| Error::Io { path: path.to_path_buf(), source })
}

fn io_at(path: &Path) -> impl Fn(std::io::Error) -> Error + '_ {
    move |source| Error::Io { path: path.to_path_buf(), source }
}

fn code_of(e: Error) -> (i32, String) {
    (if usage(&e) { 2 } else { 1 }, e.to_string())
}

fn execute(cli: Cli) -> std::result::Result<(), (i32, String)> {
    match cli.command {
        Command::Run { scenario, method, trace, report } => {
            let cfg = load_scenario(&scenario)?;
            let method: Method = method.parse().map_err(code_of)?;
            let run = Runner::new(cfg).and_then(|mut r| r.run(method)).map_err(code_of)?;
            println!("{}: {}", method, run.report.summary());
            for n in &run.notes {
                println!("note: {n}");
            }
            if let Some(p) = report {
                let mut f = create(&p).map_err(code_of)?;
                run.report.write_csv(&mut f).and_then(|_| f.flush()).map_err(io_at(&p)).map_err(code_of)?;
            }
            if trace {
                let stdout = std::io::stdout();
                let mut out = stdout.lock();
                let res = (|| -> std::io::Result<()> {
                    if !run.ao_trace.is_empty() {
                        write_ao_trace_csv(&mut out, &run.ao_trace)?;
                    }
                    if !run.eta_trace.is_empty() {
                        write_eta_trace_csv(&mut out, &run.eta_trace)?;
                    }
                    Ok(())
                })();
                res.map_err(|e| (1, e.to_string()))?;
            }
            Ok(())
        }
        Command::Sweep { scenario, param, values, methods, out, seed, no_timing } => {
            let cfg = load_scenario(&scenario)?;
            let param: SweepParam = param.parse().map_err(code_of)?;
            let methods = methods.iter().map(|m| m.parse()).collect::<Result<Vec<Method>>>().map_err(code_of)?;
            let spec = SweepSpec { param, values, methods, seed };
            let rows = sweep(&spec, &cfg).map_err(code_of)?;
            let mut f = create(&out).map_err(code_of)?;
            write_sweep_csv(&mut f, &rows, !no_timing).and_then(|_| f.flush()).map_err(io_at(&out)).map_err(code_of)?;
            println!("wrote {} rows to {}", rows.len(), out.display());
            Ok(())
        }
        Command::Beampattern { scenario, method, out, resolution } => {
            let cfg = load_scenario(&scenario)?;
            let method: Method = method.parse().map_err(code_of)?;
            let res = parse_resolution(&resolution)
                .filter(|&(a, b)| a > 0 && b > 0)
                .ok_or_else(|| (2, format!("resolution `{resolution}` is not of the form RxC")))?;
            let mut runner = Runner::new(cfg.clone()).map_err(code_of)?;
            let run = runner.run(method).map_err(code_of)?;
            let geometry = cfg.geometry().map_err(code_of)?;
            let grid = cfg.grid().map_err(code_of)?;
            let raster = PolarRaster::new(geometry.rayleigh_distance(cfg.carrier_hz), (0.001, 0.05), (40.0, 90.0), res)
                .map_err(code_of)?;
            let positions = raster.positions().map_err(code_of)?;
            let pattern = beampattern(&geometry, &positions, grid.carriers(), &run.beams).map_err(code_of)?;
            let mut f = create(&out).map_err(code_of)?;
            write_beampattern_csv(&mut f, &raster, &pattern).and_then(|_| f.flush()).map_err(io_at(&out)).map_err(code_of)?;
            println!("wrote {} cells x {} layers to {}", raster.cells.len(), grid.len() + 1, out.display());
            Ok(())
        }
    }
}

/// Parses `args` (including the program name) and runs the command.
pub fn cli_main<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 2 } else { 0 };
            let _ = e.print();
            return code;
        }
    };
    match execute(cli) {
        Ok(()) => 0,
        Err((code, msg)) => {
            eprintln!("error: {msg}");
            if code == 2 {
                eprintln!("usage: beamfocus <run|sweep|beampattern> <scenario> [options]  (see --help)");
            }
            code
        }
    }
}
