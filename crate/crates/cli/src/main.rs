//! `tuner`: analyze recordings, tune live, or host the browser session service.
//!
//! Exit status is 0 on success, 1 for usage and environment errors and 2
//! when no signal was detected.

mod report;

use std::fs;
use std::io::{self, Write};
use std::net::{IpAddr, Ipv4Addr, SocketAddr};
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::sync::atomic::{AtomicBool, Ordering};
use std::sync::Arc;
use std::time::Duration;

use clap::{Args, Parser, Subcommand, ValueEnum};
use tuner_core::audio::{self, CaptureGate, CaptureSource, CommandSource, FixtureSource};
use tuner_core::{GuitarString, Tuner64, TunerError, TurnCalibration64};
use tuner_service::{AppState, ServiceConfig};

use crate::report::{write_spectrum, CliReport};

const LIVE_CAPTURE_SECONDS: f64 = 2.0;

#[derive(Debug, Parser)]
#[command(
    name = "tuner",
    version,
    about = "Guitar tuner based on a harmonic-sum spectrum"
)]
struct Cli {
    /// More log output on stderr (repeat for more).
    #[arg(short, long, global = true, action = clap::ArgAction::Count)]
    verbose: u8,

    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Analyze a 16-bit mono WAV recording of one string.
    Analyze(AnalyzeArgs),
    /// Capture from the default input in a loop and advise after every take.
    Live(LiveArgs),
    /// Run the WebSocket session service for the browser UI.
    Serve(ServeArgs),
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum Format {
    Text,
    Structured,
}

#[derive(Debug, Args)]
struct Tuning {
    /// String name (E2 A2 D3 G3 B3 E4) or number (6 = low E .. 1 = high E).
    #[arg(short, long, value_parser = parse_string)]
    string: GuitarString,

    /// TOML file overriding peg rates, e.g. `6 = 0.021`.
    #[arg(long, value_name = "PATH")]
    calibration: Option<PathBuf>,

    #[arg(long, value_enum, default_value_t = Format::Text)]
    format: Format,
}

#[derive(Debug, Args)]
struct AnalyzeArgs {
    #[arg(short, long, value_name = "PATH")]
    input: PathBuf,

    #[command(flatten)]
    tuning: Tuning,

    /// Directory receiving raw_spectrum.txt and harmonic_sum_spectrum.txt.
    #[arg(long, value_name = "DIR")]
    save_spectra: Option<PathBuf>,
}

#[derive(Debug, Args)]
struct LiveArgs {
    #[command(flatten)]
    tuning: Tuning,

    /// Recorder program writing WAV to stdout.
    #[arg(long, default_value = "arecord")]
    recorder: PathBuf,

    /// Capture device passed to the recorder.
    #[arg(long, default_value = "default")]
    device: String,

    /// Replay a WAV file instead of recording.
    #[arg(long, value_name = "PATH", conflicts_with_all = ["recorder", "device"])]
    fixture: Option<PathBuf>,

    /// Stop after this many takes.
    #[arg(long)]
    cycles: Option<u32>,
}

#[derive(Debug, Args)]
struct ServeArgs {
    #[arg(long, default_value_t = 8080)]
    port: u16,

    #[arg(long, default_value_t = IpAddr::V4(Ipv4Addr::LOCALHOST))]
    bind: IpAddr,

    /// Answer every test from this WAV file instead of the microphone.
    #[arg(long, value_name = "PATH")]
    fixture: Option<PathBuf>,

    /// Directory of UI assets to serve at `/`.
    #[arg(long, value_name = "DIR")]
    assets: Option<PathBuf>,

    #[arg(long, value_name = "PATH")]
    calibration: Option<PathBuf>,

    #[arg(long, default_value = "arecord")]
    recorder: PathBuf,

    #[arg(long, default_value = "default")]
    device: String,
}

fn parse_string(id: &str) -> Result<GuitarString, String> {
    id.parse::<GuitarString>().map_err(|e| e.to_string())
}

#[derive(Debug)]
struct Failure {
    message: String,
    code: u8,
}

impl Failure {
    fn env(message: impl Into<String>) -> Self {
        Self {
            message: message.into(),
            code: 1,
        }
    }
}

impl From<TunerError> for Failure {
    fn from(e: TunerError) -> Self {
        let code = if matches!(e, TunerError::NoSignal) {
            2
        } else {
            1
        };
        Self {
            message: e.to_string(),
            code,
        }
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { 1 } else { 0 });
        }
    };
    let level = match cli.verbose {
        0 => "warn",
        1 => "info",
        _ => "debug",
    };
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or(level)).init();

    let outcome = match cli.command {
        Command::Analyze(args) => analyze(args),
        Command::Live(args) => live(args),
        Command::Serve(args) => serve(args),
    };
    match outcome {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            eprintln!("error: {}", f.message);
            ExitCode::from(f.code)
        }
    }
}

fn load_tuner(calibration: Option<&Path>) -> Result<Tuner64, Failure> {
    Ok(match calibration {
        Some(path) => Tuner64::with_calibration(
            TurnCalibration64::load(path)
                .map_err(|e| Failure::env(format!("calibration {}: {e}", path.display())))?,
        ),
        None => Tuner64::default(),
    })
}

fn print_report(report: &CliReport, format: Format) {
    match format {
        Format::Text => print!("{}", report.to_text()),
        Format::Structured => println!("{}", report.to_structured()),
    }
    let _ = io::stdout().flush();
}

fn analyze(args: AnalyzeArgs) -> Result<(), Failure> {
    let tuner = load_tuner(args.tuning.calibration.as_deref())?;
    let bytes = fs::read(&args.input)
        .map_err(|e| Failure::env(format!("cannot read {}: {e}", args.input.display())))?;
    let buffer = audio::read_wav::<f64>(&bytes)
        .map_err(|e| Failure::env(format!("{}: {e}", args.input.display())))?;
    let analysis = tuner.analyze(&buffer, args.tuning.string)?;

    if let Some(dir) = &args.save_spectra {
        let save = || -> io::Result<()> {
            fs::create_dir_all(dir)?;
            write_spectrum(
                &dir.join("raw_spectrum.txt"),
                &analysis.estimate.raw_spectrum,
            )?;
            write_spectrum(
                &dir.join("harmonic_sum_spectrum.txt"),
                &analysis.estimate.harmonic_sum_spectrum,
            )
        };
        save()
            .map_err(|e| Failure::env(format!("cannot save spectra to {}: {e}", dir.display())))?;
    }
    print_report(&CliReport::from(&analysis.advice), args.tuning.format);
    Ok(())
}

fn live(args: LiveArgs) -> Result<(), Failure> {
    let tuner = load_tuner(args.tuning.calibration.as_deref())?;
    let source: Box<dyn CaptureSource> = match &args.fixture {
        Some(path) => Box::new(FixtureSource::new(path)),
        None => Box::new(CommandSource::new(&args.recorder, &args.device)),
    };
    if !source.is_available() {
        return Err(Failure::env(format!(
            "capture device unavailable ({})",
            source.describe()
        )));
    }

    let interrupted = Arc::new(AtomicBool::new(false));
    let flag = interrupted.clone();
    ctrlc::set_handler(move || flag.store(true, Ordering::SeqCst))
        .map_err(|e| Failure::env(format!("cannot install interrupt handler: {e}")))?;

    let mut takes = 0;
    while !interrupted.load(Ordering::SeqCst) {
        println!("PLAY");
        let _ = io::stdout().flush();
        let captured =
            audio::capture::<f64>(source.as_ref(), LIVE_CAPTURE_SECONDS, &tuner.analysis);
        if interrupted.load(Ordering::SeqCst) {
            break;
        }
        let buffer = captured?;
        println!("STOP");
        match tuner.analyze(&buffer, args.tuning.string) {
            Ok(analysis) => print_report(&CliReport::from(&analysis.advice), args.tuning.format),
            Err(TunerError::NoSignal) => eprintln!("no signal detected"),
            Err(e) => return Err(e.into()),
        }
        takes += 1;
        if args.cycles.is_some_and(|n| takes >= n) {
            break;
        }
    }
    Ok(())
}

fn serve(args: ServeArgs) -> Result<(), Failure> {
    let tuner = load_tuner(args.calibration.as_deref())?;
    let source: Arc<dyn CaptureSource> = match &args.fixture {
        Some(path) => Arc::new(FixtureSource::new(path)),
        None => Arc::new(CommandSource::new(&args.recorder, &args.device)),
    };
    let config = ServiceConfig {
        assets_dir: args.assets.clone(),
        tuner,
        ..ServiceConfig::default()
    };
    let state = AppState::with_gate(source, CaptureGate::global().clone(), config);

    let runtime = tokio::runtime::Builder::new_multi_thread()
        .enable_all()
        .build()
        .map_err(|e| Failure::env(format!("cannot start runtime: {e}")))?;
    let result = runtime.block_on(async {
        let addr = SocketAddr::new(args.bind, args.port);
        let listener = tuner_service::bind(addr)
            .await
            .map_err(|e| Failure::env(format!("cannot listen on {addr}: {e}")))?;
        let local = listener.local_addr().unwrap_or(addr);
        println!("listening on http://{local}");
        let _ = io::stdout().flush();
        tuner_service::serve(listener, state, tuner_service::shutdown_signal())
            .await
            .map_err(|e| Failure::env(format!("service failed: {e}")))
    });
    runtime.shutdown_timeout(Duration::from_secs(1));
    result
}
