//! Command-line parsing and result emission.

use std::io::Write;
use std::path::PathBuf;

use clap::{Parser, ValueEnum};
use serde::{Deserialize, Serialize};

use crate::engine::{BerRecord, PersistV, PowerConfig, SchemeKind, TrialConfig};
use crate::error::Result;

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum SchemeArg {
    Brs,
    Stc,
    Rstc,
    Abaro,
    All,
}

impl SchemeArg {
    fn expand(self) -> Vec<SchemeKind> {
        match self {
            SchemeArg::Brs => vec![SchemeKind::NoBufferBrs],
            SchemeArg::Stc => vec![SchemeKind::BufferStc],
            SchemeArg::Rstc => vec![SchemeKind::BufferRstc],
            SchemeArg::Abaro => vec![SchemeKind::BufferAbaro],
            SchemeArg::All => SchemeKind::ALL.to_vec(),
        }
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, ValueEnum, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum OutputFormat {
    #[default]
    Csv,
    Json,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
enum PersistArg {
    Point,
    Packet,
}

/// BER-vs-SNR sweeps for buffer-aided cooperative relaying with adjustable
/// Alamouti codes.
#[derive(Debug, Parser)]
#[command(name = "relaysim", version)]
struct Args {
    /// Scheme to simulate; `all` runs the four schemes under one manifest.
    #[arg(long, value_enum, default_value = "abaro")]
    scheme: SchemeArg,
    /// Number of relays.
    #[arg(long, default_value_t = 2)]
    relays: usize,
    /// Antennas per node.
    #[arg(long, default_value_t = 2)]
    antennas: usize,
    /// Symbols per packet.
    #[arg(long, default_value_t = 100)]
    packet: usize,
    /// Relay buffer capacity in symbol groups [default: packet / antennas].
    #[arg(long)]
    buffer_groups: Option<usize>,
    /// SNR points in dB: a single value or `start:step:stop`.
    #[arg(long, default_value = "0:2:20")]
    snr: String,
    #[arg(long, default_value_t = 1000)]
    packets_per_point: usize,
    /// Step size of the code-vector adaptation.
    #[arg(long, default_value_t = 0.01)]
    mu: f64,
    /// Frobenius budget of the code vector.
    #[arg(long, default_value_t = 1.0)]
    pv: f64,
    /// Use the model constant inside the adaptation residual.
    #[arg(long)]
    consistent_constants: bool,
    /// Reset the adaptive code vector per SNR point or per packet.
    #[arg(long, value_enum, default_value = "point")]
    persist_v: PersistArg,
    #[arg(long, default_value_t = 1)]
    seed: u64,
    /// Worker threads.
    #[arg(long, default_value_t = 1)]
    jobs: usize,
    #[arg(long, value_enum, default_value = "csv")]
    format: OutputFormat,
    /// Write results here instead of standard output.
    #[arg(long)]
    output: Option<PathBuf>,
}

/// A validated sweep request.
#[derive(Clone, Debug, PartialEq)]
pub struct SweepRequest {
    pub base: TrialConfig,
    pub schemes: Vec<SchemeKind>,
    pub snr_points_db: Vec<f64>,
    pub packets_per_point: usize,
    pub jobs: usize,
    pub format: OutputFormat,
    pub output: Option<PathBuf>,
}

#[derive(Debug)]
pub enum UsageError {
    /// Help or version output requested; not a failure.
    Display(String),
    Invalid(String),
}

impl std::fmt::Display for UsageError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            UsageError::Display(s) | UsageError::Invalid(s) => f.write_str(s),
        }
    }
}

/// Parses `start:step:stop` (stop included when hit exactly) or one value.
pub fn parse_snr_range(range: &str) -> std::result::Result<Vec<f64>, String> {
    let parts: Vec<&str> = range.split(':').map(str::trim).collect();
    let num = |s: &str| {
        s.parse::<f64>()
            .ok()
            .filter(|x| x.is_finite())
            .ok_or_else(|| format!("invalid SNR value `{s}`"))
    };
    match parts.as_slice() {
        [single] => Ok(vec![num(single)?]),
        [start, step, stop] => {
            let (start, step, stop) = (num(start)?, num(step)?, num(stop)?);
            if step <= 0.0 {
                return Err("SNR step must be positive".into());
            }
            if stop < start {
                return Err("SNR stop must not be below start".into());
            }
            let count = ((stop - start) / step + 1e-9).floor() as usize;
            Ok((0..=count)
                .map(|i| ((start + i as f64 * step) * 1e9).round() / 1e9)
                .collect())
        }
        _ => Err(format!("SNR must be `value` or `start:step:stop`, got `{range}`")),
    }
}

/// Parses and validates `argv` (including the program name), listing every
/// violated constraint on failure.
pub fn parse_args<I, S>(argv: I) -> std::result::Result<SweepRequest, UsageError>
where
    I: IntoIterator<Item = S>,
    S: Into<std::ffi::OsString> + Clone,
{
    let args = Args::try_parse_from(argv).map_err(|e| match e.kind() {
        clap::error::ErrorKind::DisplayHelp | clap::error::ErrorKind::DisplayVersion => {
            UsageError::Display(e.to_string())
        }
        _ => UsageError::Invalid(e.to_string()),
    })?;

    let mut problems = Vec::new();
    let snr_points_db = parse_snr_range(&args.snr).unwrap_or_else(|e| {
        problems.push(e);
        Vec::new()
    });
    let schemes = args.scheme.expand();
    let base = TrialConfig {
        n_antennas: args.antennas,
        n_relays: args.relays,
        packet_symbols: args.packet,
        buffer_capacity_groups: args
            .buffer_groups
            .unwrap_or(args.packet / args.antennas.max(1)),
        snr_db: snr_points_db.first().copied().unwrap_or(0.0),
        scheme: schemes[0],
        mu: args.mu,
        seed: args.seed,
        powers: PowerConfig {
            p_v: args.pv,
            ..PowerConfig::default()
        },
        consistent_constants: args.consistent_constants,
        persist_v: match args.persist_v {
            PersistArg::Point => PersistV::Point,
            PersistArg::Packet => PersistV::Packet,
        },
    };
    problems.extend(base.violations());
    if args.packets_per_point == 0 {
        problems.push("packets_per_point must be at least 1".into());
    }
    if args.jobs == 0 {
        problems.push("jobs must be at least 1".into());
    }
    if !problems.is_empty() {
        return Err(UsageError::Invalid(format!("error: {}", problems.join("\nerror: "))));
    }

    Ok(SweepRequest {
        base,
        schemes,
        snr_points_db,
        packets_per_point: args.packets_per_point,
        jobs: args.jobs,
        format: args.format,
        output: args.output,
    })
}

/// Everything needed to rerun a sweep bit for bit.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RunManifest {
    /// Base configuration; `scheme` and `snr_db` vary per record.
    pub config: TrialConfig,
    pub schemes: Vec<SchemeKind>,
    pub snr_points_db: Vec<f64>,
    pub packets_per_point: usize,
    pub tool_version: String,
    pub started: String,
    pub finished: String,
    pub seed: u64,
    /// The unbuffered baseline is a max-min best-relay scheme.
    pub baseline: String,
}

impl RunManifest {
    pub fn new(request: &SweepRequest) -> Self {
        Self {
            config: request.base.clone(),
            schemes: request.schemes.clone(),
            snr_points_db: request.snr_points_db.clone(),
            packets_per_point: request.packets_per_point,
            tool_version: env!("CARGO_PKG_VERSION").to_string(),
            started: timestamp(),
            finished: String::new(),
            seed: request.base.seed,
            baseline: "brs: max-min best-relay selection, AF, Alamouti with identity code"
                .into(),
        }
    }

    pub fn finish(&mut self) {
        self.finished = timestamp();
    }
}

fn timestamp() -> String {
    chrono::Utc::now().to_rfc3339_opts(chrono::SecondsFormat::Secs, true)
}

pub const CSV_HEADER: &str = "scheme,snr_db,packets,bits,bit_errors,ber";

/// One CSV row; BER with six significant digits.
pub fn csv_row(r: &BerRecord) -> String {
    format!(
        "{},{},{},{},{},{:.5e}",
        r.scheme.label(),
        r.snr_db,
        r.packets,
        r.bits,
        r.bit_errors,
        r.ber()
    )
}

#[derive(Debug, Serialize, Deserialize)]
pub struct JsonReport {
    pub manifest: RunManifest,
    pub records: Vec<JsonRecord>,
}

#[derive(Debug, PartialEq, Serialize, Deserialize)]
pub struct JsonRecord {
    #[serde(flatten)]
    pub record: BerRecord,
    pub ber: f64,
}

pub fn emit_results(
    records: &[BerRecord],
    format: OutputFormat,
    manifest: &RunManifest,
    sink: &mut dyn Write,
) -> Result<()> {
    match format {
        OutputFormat::Csv => {
            writeln!(sink, "{CSV_HEADER}")?;
            for r in records {
                writeln!(sink, "{}", csv_row(r))?;
            }
        }
        OutputFormat::Json => {
            let report = JsonReport {
                manifest: manifest.clone(),
                records: records
                    .iter()
                    .map(|r| JsonRecord {
                        record: r.clone(),
                        ber: r.ber(),
                    })
                    .collect(),
            };
            serde_json::to_writer_pretty(&mut *sink, &report)?;
            writeln!(sink)?;
        }
    }
    sink.flush()?;
    Ok(())
}

/// Reads records back from a JSON report.
pub fn read_json_records(text: &str) -> Result<(RunManifest, Vec<BerRecord>)> {
    let report: JsonReport = serde_json::from_str(text)?;
    Ok((report.manifest, report.records.into_iter().map(|r| r.record).collect()))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn argv(s: &str) -> Vec<String> {
        std::iter::once("relaysim".to_string())
            .chain(s.split_whitespace().map(String::from))
            .collect()
    }

    fn invalid(s: &str) -> String {
        match parse_args(argv(s)) {
            Err(UsageError::Invalid(msg)) => msg,
            other => panic!("expected usage error, got {other:?}"),
        }
    }

    #[test]
    fn happy_path() {
        let req = parse_args(argv(
            "--scheme abaro --relays 2 --antennas 2 --packet 100 --snr 0:2:20 \
             --packets-per-point 2000 --mu 0.01 --seed 7",
        ))
        .unwrap();
        assert_eq!(req.schemes, vec![SchemeKind::BufferAbaro]);
        assert_eq!(req.snr_points_db.len(), 11);
        assert_eq!(req.snr_points_db[10], 20.0);
        assert_eq!(req.packets_per_point, 2000);
        assert_eq!(req.base.seed, 7);
        assert_eq!(req.base.buffer_capacity_groups, 50);
        assert_eq!(req.base.mu, 0.01);
    }

    #[test]
    fn indivisible_packet_is_rejected() {
        let msg = invalid("--packet 101 --antennas 2");
        assert!(msg.contains("packet_symbols must be divisible by n_antennas"), "{msg}");
    }

    #[test]
    fn every_violation_is_listed() {
        let msg = invalid("--packet 101 --relays 0 --snr 5:0:1 --jobs 0");
        for needle in ["divisible", "n_relays", "step", "jobs"] {
            assert!(msg.contains(needle), "missing {needle} in {msg}");
        }
        assert!(invalid("--bogus 3").contains("--bogus"));
        assert!(invalid("--scheme turbo").contains("turbo"));
        assert!(invalid("--pv 0").contains("p_v"));
    }

    #[test]
    fn all_expands_to_four_schemes() {
        let req = parse_args(argv("--scheme all")).unwrap();
        assert_eq!(req.schemes, SchemeKind::ALL.to_vec());
    }

    #[test]
    fn snr_ranges() {
        assert_eq!(parse_snr_range("0:2:20").unwrap().len(), 11);
        assert_eq!(parse_snr_range("0:3:10").unwrap(), vec![0.0, 3.0, 6.0, 9.0]);
        assert_eq!(parse_snr_range("0:0.1:0.3").unwrap(), vec![0.0, 0.1, 0.2, 0.3]);
        assert_eq!(parse_snr_range("7.5").unwrap(), vec![7.5]);
        assert!(parse_snr_range("1:2").is_err());
        assert!(parse_snr_range("a:1:2").is_err());
    }

    fn record() -> BerRecord {
        BerRecord {
            scheme: SchemeKind::BufferAbaro,
            snr_db: 10.0,
            packets: 2000,
            bits: 200_000,
            bit_errors: 142,
        }
    }

    fn manifest() -> RunManifest {
        RunManifest::new(&parse_args(argv("--scheme all --snr 10")).unwrap())
    }

    #[test]
    fn csv_formatting() {
        assert_eq!(csv_row(&record()), "abaro,10,2000,200000,142,7.10000e-4");
        let mut out = Vec::new();
        emit_results(&[], OutputFormat::Csv, &manifest(), &mut out).unwrap();
        assert_eq!(String::from_utf8(out).unwrap(), format!("{CSV_HEADER}\n"));
    }

    #[test]
    fn json_round_trip() {
        let records = vec![
            record(),
            BerRecord { scheme: SchemeKind::NoBufferBrs, snr_db: 2.5, packets: 3, bits: 300, bit_errors: 0 },
        ];
        let mut m = manifest();
        m.finish();
        let mut out = Vec::new();
        emit_results(&records, OutputFormat::Json, &m, &mut out).unwrap();
        let (back_manifest, back) = read_json_records(std::str::from_utf8(&out).unwrap()).unwrap();
        assert_eq!(back, records);
        assert_eq!(back_manifest, m);
    }

    #[test]
    fn write_failure_surfaces() {
        struct Broken;
        impl Write for Broken {
            fn write(&mut self, _: &[u8]) -> std::io::Result<usize> {
                Err(std::io::Error::other("disk full"))
            }
            fn flush(&mut self) -> std::io::Result<()> {
                Ok(())
            }
        }
        assert!(emit_results(&[record()], OutputFormat::Csv, &manifest(), &mut Broken).is_err());
    }
}
