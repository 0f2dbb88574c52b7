use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::process::ExitCode;

use relaysim::cli::{emit_results, parse_args, RunManifest, UsageError};
use relaysim::engine::{run_sweep_detailed, TrialConfig};

fn main() -> ExitCode {
    let request = match parse_args(std::env::args_os()) {
        Ok(r) => r,
        Err(UsageError::Display(text)) => {
            print!("{text}");
            return ExitCode::SUCCESS;
        }
        Err(UsageError::Invalid(text)) => {
            eprintln!("{text}");
            return ExitCode::from(2);
        }
    };

    let mut manifest = RunManifest::new(&request);
    let mut records = Vec::new();
    for &scheme in &request.schemes {
        let base = TrialConfig {
            scheme,
            ..request.base.clone()
        };
        eprintln!(
            "running {scheme}: {} points x {} packets",
            request.snr_points_db.len(),
            request.packets_per_point
        );
        let progress = |p: &relaysim::engine::PointSummary| {
            eprintln!(
                "  {scheme} {:>6} dB  ber {:.3e}  ({} errors / {} bits)",
                p.record.snr_db,
                p.record.ber(),
                p.record.bit_errors,
                p.record.bits
            );
        };
        match run_sweep_detailed::<f64>(
            &base,
            &request.snr_points_db,
            request.packets_per_point,
            request.jobs,
            &progress,
        ) {
            Ok(points) => records.extend(points.into_iter().map(|p| p.record)),
            Err(e) => {
                eprintln!("error: {e}");
                return ExitCode::FAILURE;
            }
        }
    }
    manifest.finish();

    let written = match &request.output {
        Some(path) => File::create(path).map_err(relaysim::Error::from).and_then(|f| {
            let mut w = BufWriter::new(f);
            emit_results(&records, request.format, &manifest, &mut w)?;
            w.flush()?;
            Ok(())
        }),
        None => {
            let stdout = io::stdout();
            let mut lock = stdout.lock();
            emit_results(&records, request.format, &manifest, &mut lock)
        }
    };
    if let Err(e) = written {
        eprintln!("error: {e}");
        return ExitCode::FAILURE;
    }
    ExitCode::SUCCESS
}
