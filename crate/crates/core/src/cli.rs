//! Command-line front end: calibration runs, closed-loop flights, scripted
//! trimming, log metrics, and preset dumps.
//!
//! Exit codes: 0 on success, 1 when a scenario fails (crash, estimation
//! failure, infeasible trim, ...), 2 on usage errors.

use std::path::{Path, PathBuf};

use clap::{Parser, Subcommand};

use crate::error::{Error, Result};
use crate::estimation::EstimateReport;
use crate::harness::{
    metrics_from_logs, render_report, run_calibration, run_scenario, scenario_vehicle,
    scripted_trim, GainProfile, PlanKind, Scenario,
};
use crate::vehicle::{assemble_vehicle, hardware_list, preset, Platform, VehicleFile};

#[derive(Parser)]
#[command(
    name = "modrotor",
    version,
    about = "Simulation, estimation, and control for modular multirotors"
)]
struct Cli {
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Simulate a hand-shaken calibration recording and run the
    /// configuration estimator on it.
    Calibrate {
        /// Platform preset (A-F).
        #[arg(long, default_value = "A")]
        platform: String,
        /// Vehicle description file; overrides the preset.
        #[arg(long)]
        vehicle: Option<PathBuf>,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// IMU sample rate, Hz.
        #[arg(long, default_value_t = 50.0)]
        rate: f64,
        /// Recording length, s.
        #[arg(long, default_value_t = 8.0)]
        duration: f64,
        /// Disable sensor noise (and the low-pass prefilter).
        #[arg(long)]
        no_noise: bool,
        /// Directory for calibration.csv and estimate.toml.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Run a full scenario: calibration, optional trimming, and a
    /// closed-loop flight.
    Fly {
        /// Scenario file (TOML); flags below override its fields.
        #[arg(long)]
        scenario: Option<PathBuf>,
        #[arg(long)]
        platform: Option<String>,
        /// Vehicle description file; overrides the preset.
        #[arg(long)]
        vehicle: Option<PathBuf>,
        #[arg(long)]
        seed: Option<u64>,
        #[arg(long, value_enum)]
        plan: Option<PlanKind>,
        #[arg(long, value_enum)]
        gains: Option<GainProfile>,
        /// Flight time for the hover plan, s.
        #[arg(long)]
        duration: Option<f64>,
        /// Start from the ground-truth configuration matrix instead of the
        /// calibration pipeline.
        #[arg(long)]
        truth_a: bool,
        /// Freeze the configuration-matrix estimate (no adaptation).
        #[arg(long)]
        no_adaptation: bool,
        /// Run the scripted trimming loop before takeoff.
        #[arg(long)]
        trim: bool,
        /// Directory for flight.csv, controller.csv, report.txt, ...
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Scripted pre-takeoff trimming: report the imbalance norm per step.
    Trim {
        #[arg(long, default_value = "A")]
        platform: String,
        #[arg(long)]
        vehicle: Option<PathBuf>,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Fractional trim step.
        #[arg(long, default_value_t = 0.02)]
        delta: f64,
        /// Trim the ground-truth matrix instead of a calibration estimate.
        #[arg(long)]
        truth_a: bool,
        /// Corrupt the roll/pitch rows by this factor on half the columns
        /// first (demonstration of recovering a bad estimate).
        #[arg(long)]
        corrupt: Option<f64>,
    },
    /// Recompute window statistics from a flight/setpoint log pair.
    Metrics {
        #[arg(long)]
        flight: PathBuf,
        #[arg(long)]
        setpoint: PathBuf,
        /// Window start, s.
        #[arg(long, default_value_t = 20.0)]
        start: f64,
        /// Window end, s.
        #[arg(long, default_value_t = 50.0)]
        end: f64,
    },
    /// Print a platform preset as a vehicle description file.
    PresetDump {
        #[arg(long, default_value = "A")]
        platform: String,
        /// Write to a file instead of stdout.
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

/// Parses `std::env::args` and runs; returns the process exit code.
pub fn run_cli() -> i32 {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { 2 } else { 0 };
        }
    };
    match execute(cli) {
        Ok(()) => 0,
        Err(CliError::Usage(msg)) => {
            eprintln!("error: {msg}");
            2
        }
        Err(CliError::Failure(e)) => {
            eprintln!("error: {e}");
            1
        }
    }
}

enum CliError {
    Usage(String),
    Failure(Error),
}

/// Input loading and argument validation problems are usage errors.
fn usage<T>(r: Result<T>) -> std::result::Result<T, CliError> {
    r.map_err(|e| CliError::Usage(e.to_string()))
}

fn failure<T>(r: Result<T>) -> std::result::Result<T, CliError> {
    r.map_err(CliError::Failure)
}

fn execute(cli: Cli) -> std::result::Result<(), CliError> {
    match cli.cmd {
        Cmd::Calibrate { platform, vehicle, seed, rate, duration, no_noise, out } => {
            let sc = Scenario {
                platform,
                vehicle: vehicle.map(path_string),
                seed,
                calibration_rate: rate,
                calibration_duration: duration,
                calibration_noise: !no_noise,
                ..Default::default()
            };
            let (payload, modules) = usage(scenario_vehicle(&sc))?;
            let truth = usage(assemble_vehicle(&payload, &modules))?;
            let est = failure(run_calibration(
                &sc,
                &truth,
                &hardware_list(&modules),
                out.as_deref(),
            ))?;
            println!("{}", failure(EstimateReport::from_estimate(&est).to_toml())?);
            let r_gc = truth.imu_positions_from_gc();
            let rmse = (est
                .arms
                .iter()
                .zip(&r_gc)
                .map(|(a, b)| (a - b).norm_squared())
                .sum::<f64>()
                / r_gc.len() as f64)
                .sqrt();
            println!("# arm RMSE vs truth: {rmse:.6} m");
            Ok(())
        }
        Cmd::Fly {
            scenario,
            platform,
            vehicle,
            seed,
            plan,
            gains,
            duration,
            truth_a,
            no_adaptation,
            trim,
            out,
        } => {
            let mut sc = match scenario {
                Some(path) => {
                    let text = usage(std::fs::read_to_string(&path).map_err(Error::Io))?;
                    usage(Scenario::from_toml(&text))?
                }
                None => Scenario::default(),
            };
            if let Some(p) = platform {
                sc.platform = p;
            }
            if let Some(v) = vehicle {
                sc.vehicle = Some(path_string(v));
            }
            if let Some(s) = seed {
                sc.seed = s;
            }
            if let Some(p) = plan {
                sc.plan = p;
            }
            if let Some(g) = gains {
                sc.gains = g;
            }
            if let Some(d) = duration {
                sc.duration = d;
            }
            if truth_a {
                sc.initial_a = crate::harness::InitialA::Truth;
            }
            if no_adaptation {
                sc.adaptation = false;
            }
            if trim {
                sc.trim = true;
            }
            usage(sc.platform.parse::<Platform>().map(|_| ()))?;
            if let Some(dir) = &out {
                usage(std::fs::create_dir_all(dir).map_err(Error::Io))?;
                usage(
                    std::fs::write(Path::new(dir).join("scenario.toml"), usage(sc.to_toml())?)
                        .map_err(Error::Io),
                )?;
            }
            let report = failure(run_scenario(&sc, out.as_deref()))?;
            print!("{}", render_report(&report));
            if report.flags.arena_exit.is_some() || report.flags.crashed.is_some() {
                return Err(CliError::Failure(Error::ScenarioFailed {
                    phase: "flight".into(),
                    reason: "vehicle crashed or left the arena".into(),
                }));
            }
            Ok(())
        }
        Cmd::Trim { platform, vehicle, seed, delta, truth_a, corrupt } => {
            let sc = Scenario {
                platform,
                vehicle: vehicle.map(path_string),
                seed,
                ..Default::default()
            };
            let (payload, modules) = usage(scenario_vehicle(&sc))?;
            let truth = usage(assemble_vehicle(&payload, &modules))?;
            let mut a_hat = if truth_a {
                truth.a.clone()
            } else {
                failure(run_calibration(&sc, &truth, &hardware_list(&modules), None))?.a
            };
            if let Some(factor) = corrupt {
                for j in 0..a_hat.ncols() / 2 {
                    a_hat[(1, j)] *= factor;
                    a_hat[(2, j)] *= factor;
                }
            }
            let norms = failure(scripted_trim(&mut a_hat, &truth, delta, 0.1, 50))?;
            for (i, n) in norms.iter().enumerate() {
                println!("step {i:2}: |wdot| = {n:.4} rad/s^2");
            }
            Ok(())
        }
        Cmd::Metrics { flight, setpoint, start, end } => {
            let f = usage(std::fs::read_to_string(&flight).map_err(Error::Io))?;
            let s = usage(std::fs::read_to_string(&setpoint).map_err(Error::Io))?;
            let w = failure(metrics_from_logs(&f, &s, start, end))?;
            println!(
                "window [{:.1}, {:.1}] s, {} samples\nmean error (m):   {:+.4} {:+.4} {:+.4}\nstd (m):          {:.4} {:.4} {:.4}\nmean |error| (m): {:.4} {:.4} {:.4}",
                w.start, w.end, w.samples,
                w.mean.x, w.mean.y, w.mean.z,
                w.std.x, w.std.y, w.std.z,
                w.mean_abs.x, w.mean_abs.y, w.mean_abs.z,
            );
            Ok(())
        }
        Cmd::PresetDump { platform, out } => {
            let p: Platform = usage(platform.parse())?;
            let (payload, modules) = preset(p);
            let text = usage(VehicleFile::from_parts(&payload, &modules).to_toml())?;
            match out {
                Some(path) => usage(std::fs::write(path, text).map_err(Error::Io))?,
                None => print!("{text}"),
            }
            Ok(())
        }
    }
}

fn path_string(p: PathBuf) -> String {
    p.to_string_lossy().into_owned()
}
