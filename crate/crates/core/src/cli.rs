//! The `permex` command line.

use std::ffi::OsString;
use std::fmt;
use std::fs::File;
use std::io::{BufReader, Read, Write};
use std::path::{Path, PathBuf};
use std::sync::Arc;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;

use crate::analysis::{self, Analyzer, Comparison, RandomnessReport};
use crate::bits::BitStream;
use crate::codecs::{self, ppm, wav};
use crate::error::Error;
use crate::keyfile;
use crate::perm::{generate_set, PermutationSet, ShuffleMode};
use crate::source::EntropySource;
use crate::transform::{self, KeyTrace, StreamExpander, StreamInverter, TailPolicy};

const IO_BUFFER: usize = 1 << 20;

/// Error categories, each with its own exit code.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Category {
    Config,
    Io,
    Format,
    EntropyExhausted,
}

impl Category {
    pub fn exit_code(self) -> i32 {
        match self {
            Category::Config => 2,
            Category::Io => 3,
            Category::Format => 4,
            Category::EntropyExhausted => 5,
        }
    }

    pub fn as_str(self) -> &'static str {
        match self {
            Category::Config => "config",
            Category::Io => "io",
            Category::Format => "format",
            Category::EntropyExhausted => "entropy-exhausted",
        }
    }
}

#[derive(Debug)]
pub struct CliError {
    pub category: Category,
    pub message: String,
}

impl CliError {
    fn config(message: impl Into<String>) -> Self {
        Self {
            category: Category::Config,
            message: message.into(),
        }
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "error[{}]: {}", self.category.as_str(), self.message)
    }
}

impl From<Error> for CliError {
    fn from(e: Error) -> Self {
        let category = if e.is_exhaustion() {
            Category::EntropyExhausted
        } else {
            match e {
                Error::Io(_) => Category::Io,
                Error::Contract(_) => Category::Config,
                _ => Category::Format,
            }
        };
        Self {
            category,
            message: e.to_string(),
        }
    }
}

impl From<std::io::Error> for CliError {
    fn from(e: std::io::Error) -> Self {
        Error::from(e).into()
    }
}

type CliResult<T = ()> = Result<T, CliError>;

#[derive(Debug, Parser)]
#[command(name = "permex", version, about = "Entropy expansion with random bit-block permutations")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Generate a permutation set and store it as a key file
    Keygen(KeygenArgs),
    /// Expand the entropy of a file and write the inverting key
    Expand(ExpandArgs),
    /// Undo an expansion with its key file
    Invert(InvertArgs),
    /// Print the randomness report of a file
    Analyze(AnalyzeArgs),
    /// Entropy over a grid of block sizes, map counts and repetitions
    Sweep(SweepArgs),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Default)]
pub enum Format {
    /// Every byte of the file
    #[default]
    Bytes,
    /// Samples of a P6/P7 portable pixmap
    Image,
    /// Samples of a 16-bit PCM WAVE file
    Audio,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Default)]
pub enum Tail {
    #[default]
    Identity,
    Drop,
    Pad,
}

impl From<Tail> for TailPolicy {
    fn from(t: Tail) -> Self {
        match t {
            Tail::Identity => TailPolicy::IdentityPass,
            Tail::Drop => TailPolicy::Drop,
            Tail::Pad => TailPolicy::PadZero,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Default)]
pub enum Mode {
    #[default]
    Unbiased,
    PaperLiteral,
}

impl From<Mode> for ShuffleMode {
    fn from(m: Mode) -> Self {
        match m {
            Mode::Unbiased => ShuffleMode::Unbiased,
            Mode::PaperLiteral => ShuffleMode::PaperLiteral,
        }
    }
}

#[derive(Debug, Clone, Args)]
pub struct SourceArgs {
    /// Raw entropy file (e.g. QRNG output)
    #[arg(long, value_name = "PATH", conflicts_with_all = ["system", "seed"])]
    pub entropy_file: Option<PathBuf>,
    /// Reuse the entropy file from the start when exhausted (insecure)
    #[arg(long, requires = "entropy_file")]
    pub cycle: bool,
    /// Operating system entropy (the default)
    #[arg(long, conflicts_with = "seed")]
    pub system: bool,
    /// Deterministic ChaCha20 stream keyed by up to 32 hex-encoded bytes
    #[arg(long, value_name = "HEX")]
    pub seed: Option<String>,
}

impl SourceArgs {
    fn open(&self) -> CliResult<EntropySource> {
        if let Some(path) = &self.entropy_file {
            Ok(EntropySource::from_entropy_file(path, self.cycle)?)
        } else if let Some(seed) = &self.seed {
            Ok(EntropySource::seeded_hex(seed)?)
        } else {
            Ok(EntropySource::system())
        }
    }
}

#[derive(Debug, Clone, Args)]
pub struct MatrixArgs {
    /// Block size N in bits (power of two, at least 8)
    #[arg(long = "size", default_value_t = 256)]
    pub size: usize,
    /// Number of matrices m (power of two)
    #[arg(long = "count", default_value_t = 16)]
    pub count: usize,
    /// Shuffle variant used to generate matrices
    #[arg(long, value_enum, default_value_t = Mode::Unbiased)]
    pub mode: Mode,
}

#[derive(Debug, Args)]
pub struct KeygenArgs {
    #[command(flatten)]
    pub matrix: MatrixArgs,
    #[command(flatten)]
    pub source: SourceArgs,
    /// Key file to write
    #[arg(long, value_name = "PATH")]
    pub key: PathBuf,
}

#[derive(Debug, Args)]
pub struct ExpandArgs {
    /// File to transform
    pub input: PathBuf,
    /// Transformed file to write
    #[arg(short, long, value_name = "PATH")]
    pub output: PathBuf,
    /// Key file to write
    #[arg(long, value_name = "PATH")]
    pub key: PathBuf,
    /// Reuse the matrices of a key file made by `keygen`
    #[arg(long, value_name = "PATH")]
    pub set: Option<PathBuf>,
    /// Write the before/after report as JSON
    #[arg(long, value_name = "PATH")]
    pub report: Option<PathBuf>,
    /// Print JSON instead of tables
    #[arg(long)]
    pub json: bool,
    #[arg(long, value_enum, default_value_t = Format::Bytes)]
    pub format: Format,
    #[arg(long, value_enum, default_value_t = Tail::Identity)]
    pub tail: Tail,
    #[command(flatten)]
    pub matrix: MatrixArgs,
    #[command(flatten)]
    pub source: SourceArgs,
}

#[derive(Debug, Args)]
pub struct InvertArgs {
    /// Transformed file
    pub input: PathBuf,
    /// Restored file to write
    #[arg(short, long, value_name = "PATH")]
    pub output: PathBuf,
    /// Key file written by `expand`
    #[arg(long, value_name = "PATH")]
    pub key: PathBuf,
    #[arg(long, value_enum, default_value_t = Format::Bytes)]
    pub format: Format,
}

#[derive(Debug, Args)]
pub struct AnalyzeArgs {
    pub input: PathBuf,
    #[arg(long, value_enum, default_value_t = Format::Bytes)]
    pub format: Format,
    /// Print JSON instead of a table
    #[arg(long)]
    pub json: bool,
    /// Also print stable key=value lines
    #[arg(long, conflicts_with = "json")]
    pub kv: bool,
    /// Write the report as JSON
    #[arg(long, value_name = "PATH")]
    pub report: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct SweepArgs {
    pub input: PathBuf,
    #[arg(long, value_enum, default_value_t = Format::Bytes)]
    pub format: Format,
    /// Comma-separated block sizes
    #[arg(long, value_delimiter = ',', default_value = "256")]
    pub sizes: Vec<usize>,
    /// Comma-separated matrix counts
    #[arg(long, value_delimiter = ',', default_value = "16")]
    pub counts: Vec<usize>,
    /// Successive applications per grid point
    #[arg(long, default_value_t = 1)]
    pub repeat: usize,
    #[arg(long, value_enum, default_value_t = Tail::Identity)]
    pub tail: Tail,
    #[arg(long, value_enum, default_value_t = Mode::Unbiased)]
    pub mode: Mode,
    /// Print JSON instead of a table
    #[arg(long)]
    pub json: bool,
    /// Write the table as JSON
    #[arg(long, value_name = "PATH")]
    pub report: Option<PathBuf>,
    #[command(flatten)]
    pub source: SourceArgs,
}

fn check_matrix(size: usize, count: usize) -> CliResult {
    if size < 8 || !size.is_power_of_two() {
        return Err(CliError::config(format!("--size {size} must be a power of two >= 8")));
    }
    if count == 0 || !count.is_power_of_two() {
        return Err(CliError::config(format!("--count {count} must be a power of two >= 1")));
    }
    Ok(())
}

fn same_file(a: &Path, b: &Path) -> bool {
    match (a.canonicalize(), b.canonicalize()) {
        (Ok(x), Ok(y)) => x == y,
        _ => {
            let abs = |p: &Path| std::path::absolute(p).unwrap_or_else(|_| p.to_path_buf());
            abs(a) == abs(b)
        }
    }
}

fn check_distinct(paths: &[(&str, &Path)]) -> CliResult {
    for (i, (na, a)) in paths.iter().enumerate() {
        for (nb, b) in &paths[i + 1..] {
            if same_file(a, b) {
                return Err(CliError::config(format!(
                    "{na} and {nb} refer to the same path {}",
                    a.display()
                )));
            }
        }
    }
    Ok(())
}

fn write_json<T: Serialize>(path: &Path, value: &T) -> CliResult {
    let mut text = serde_json::to_string_pretty(value).expect("report serializes");
    text.push('\n');
    keyfile::write_atomic(path, text.as_bytes())?;
    Ok(())
}

/// Machine-readable summary of one expansion.
#[derive(Debug, Serialize)]
pub struct ExpandReport {
    pub format: String,
    pub block_size: usize,
    pub count: usize,
    pub tail: String,
    pub input_bits: u64,
    pub output_bits: u64,
    pub chunks: u64,
    pub entropy_bits_consumed: u64,
    pub before: RandomnessReport,
    pub after: RandomnessReport,
    pub comparison: Comparison,
}

impl fmt::Display for ExpandReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(
            f,
            "expanded {} bits -> {} bits with {} matrices of size {} ({} chunks, tail {}, {} entropy bits)",
            self.input_bits,
            self.output_bits,
            self.count,
            self.block_size,
            self.chunks,
            self.tail,
            self.entropy_bits_consumed
        )?;
        writeln!(f, "\nbefore:\n{}", self.before)?;
        writeln!(f, "\nafter:\n{}", self.after)?;
        write!(f, "\n{}", self.comparison)
    }
}

fn load_or_generate_set(
    set_path: Option<&Path>,
    matrix: &MatrixArgs,
    source: &mut EntropySource,
) -> CliResult<Arc<PermutationSet>> {
    match set_path {
        Some(path) => {
            let trace = keyfile::load(path)?;
            let set = trace.set;
            if set.block_size() < 8 {
                return Err(CliError::config("key set block size must be at least 8"));
            }
            Ok(set)
        }
        None => {
            check_matrix(matrix.size, matrix.count)?;
            Ok(Arc::new(generate_set(
                matrix.size,
                matrix.count,
                source,
                matrix.mode.into(),
            )?))
        }
    }
}

fn cmd_keygen(args: &KeygenArgs) -> CliResult {
    check_matrix(args.matrix.size, args.matrix.count)?;
    let mut source = args.source.open()?;
    let set = generate_set(args.matrix.size, args.matrix.count, &mut source, args.matrix.mode.into())?;
    let trace = KeyTrace {
        set: Arc::new(set),
        selections: Vec::new(),
        tail: TailPolicy::IdentityPass,
        original_length: 0,
    };
    keyfile::save(&trace, &args.key)?;
    println!(
        "wrote {} matrices of size {} to {} ({} entropy bits)",
        args.matrix.count,
        args.matrix.size,
        args.key.display(),
        source.position()
    );
    Ok(())
}

fn expand_bytes(
    args: &ExpandArgs,
    set: &Arc<PermutationSet>,
    source: &mut EntropySource,
) -> CliResult<(Vec<KeyTrace>, Analyzer, Analyzer)> {
    let mut reader = BufReader::with_capacity(IO_BUFFER, File::open(&args.input)?);
    let dir = match args.output.parent() {
        Some(p) if !p.as_os_str().is_empty() => p,
        _ => Path::new("."),
    };
    let mut tmp = tempfile::NamedTempFile::new_in(dir)?;
    let mut before = Analyzer::new();
    let mut after = Analyzer::new();
    let mut expander = StreamExpander::new(Arc::clone(set), source, args.tail.into())?;
    let mut buf = vec![0u8; IO_BUFFER];
    let mut out = Vec::with_capacity(IO_BUFFER + set.block_size());
    loop {
        let n = reader.read(&mut buf)?;
        if n == 0 {
            break;
        }
        before.update(&buf[..n]);
        out.clear();
        expander.update(&buf[..n], &mut out)?;
        after.update(&out);
        tmp.write_all(&out)?;
    }
    out.clear();
    let trace = expander.finish(&mut out)?;
    after.update(&out);
    tmp.write_all(&out)?;
    tmp.as_file().sync_all()?;
    tmp.persist(&args.output).map_err(|e| Error::from(e.error))?;
    Ok((vec![trace], before, after))
}

fn expand_image(
    args: &ExpandArgs,
    set: &Arc<PermutationSet>,
    source: &mut EntropySource,
) -> CliResult<(Vec<KeyTrace>, Analyzer, Analyzer)> {
    if args.tail != Tail::Identity {
        return Err(CliError::config("images need --tail identity to keep their dimensions"));
    }
    let (image, kind) = ppm::read(&args.input)?;
    let (bits, trace) = transform::expand(&codecs::image_to_bits(&image), set, source, args.tail.into())?;
    let out = codecs::bits_to_image(&bits, image.width, image.height, image.channels)?;
    keyfile::write_atomic(&args.output, &ppm::encode(&out, kind))?;
    let mut before = Analyzer::new();
    before.update(&image.samples);
    let mut after = Analyzer::new();
    after.update(&out.samples);
    Ok((vec![trace], before, after))
}

fn expand_audio(
    args: &ExpandArgs,
    set: &Arc<PermutationSet>,
    source: &mut EntropySource,
) -> CliResult<(Vec<KeyTrace>, Analyzer, Analyzer)> {
    let audio = wav::read(&args.input)?;
    let (left, right) = codecs::audio_to_bits(&audio);
    let mut before = Analyzer::new();
    let mut after = Analyzer::new();
    let mut traces = Vec::new();
    let mut outputs = Vec::new();
    for channel in std::iter::once(&left).chain(right.as_ref()) {
        let (bits, trace) = transform::expand(channel, set, source, args.tail.into())?;
        before.update(channel.as_packed());
        after.update(bits.as_packed());
        traces.push(trace);
        outputs.push(bits);
    }
    let out = codecs::bits_to_audio(audio.sample_rate, &outputs[0], outputs.get(1))?;
    keyfile::write_atomic(&args.output, &wav::encode(&out))?;
    Ok((traces, before, after))
}

fn cmd_expand(args: &ExpandArgs) -> CliResult {
    let mut paths = vec![("input", args.input.as_path()), ("output", args.output.as_path()), ("key", args.key.as_path())];
    if let Some(r) = &args.report {
        paths.push(("report", r.as_path()));
    }
    check_distinct(&paths)?;
    if let Some(set) = &args.set {
        check_distinct(&[("set", set.as_path()), ("output", args.output.as_path())])?;
    }
    let mut source = args.source.open()?;
    let set = load_or_generate_set(args.set.as_deref(), &args.matrix, &mut source)?;
    let (traces, before, after) = match args.format {
        Format::Bytes => expand_bytes(args, &set, &mut source)?,
        Format::Image => expand_image(args, &set, &mut source)?,
        Format::Audio => expand_audio(args, &set, &mut source)?,
    };
    keyfile::save_many(&traces, &args.key)?;

    let before = before.finish()?;
    let after = after.finish()?;
    let report = ExpandReport {
        format: format!("{:?}", args.format).to_lowercase(),
        block_size: set.block_size(),
        count: set.count(),
        tail: TailPolicy::from(args.tail).to_string(),
        input_bits: traces.iter().map(|t| t.original_length).sum(),
        output_bits: traces.iter().map(KeyTrace::output_length).sum(),
        chunks: traces.iter().map(|t| t.selections.len() as u64).sum(),
        entropy_bits_consumed: source.position(),
        comparison: analysis::compare(&before, &after),
        before,
        after,
    };
    if let Some(path) = &args.report {
        write_json(path, &report)?;
    }
    if args.json {
        println!("{}", serde_json::to_string_pretty(&report).expect("report serializes"));
    } else {
        println!("{report}");
    }
    Ok(())
}

fn key_for(path: &Path) -> CliResult<Vec<KeyTrace>> {
    let traces = keyfile::load_many(path)?;
    Ok(traces)
}

fn cmd_invert(args: &InvertArgs) -> CliResult {
    check_distinct(&[
        ("input", args.input.as_path()),
        ("output", args.output.as_path()),
        ("key", args.key.as_path()),
    ])?;
    let traces = key_for(&args.key)?;
    match args.format {
        Format::Bytes => {
            let [trace] = traces.as_slice() else {
                return Err(CliError {
                    category: Category::Format,
                    message: format!("byte key must hold one record, found {}", traces.len()),
                });
            };
            let mut reader = BufReader::with_capacity(IO_BUFFER, File::open(&args.input)?);
            let mut inverter = StreamInverter::new(trace)?;
            let mut buf = vec![0u8; IO_BUFFER];
            let mut out = Vec::with_capacity(IO_BUFFER);
            loop {
                let n = reader.read(&mut buf)?;
                if n == 0 {
                    break;
                }
                inverter.update(&buf[..n], &mut out)?;
            }
            inverter.finish()?;
            keyfile::write_atomic(&args.output, &out)?;
        }
        Format::Image => {
            let (image, kind) = ppm::read(&args.input)?;
            let [trace] = traces.as_slice() else {
                return Err(CliError::config("image key must hold one record"));
            };
            let bits = transform::invert(&codecs::image_to_bits(&image), trace)?;
            let out = codecs::bits_to_image(&bits, image.width, image.height, image.channels)?;
            keyfile::write_atomic(&args.output, &ppm::encode(&out, kind))?;
        }
        Format::Audio => {
            let audio = wav::read(&args.input)?;
            let (left, right) = codecs::audio_to_bits(&audio);
            let channels: Vec<&BitStream> = std::iter::once(&left).chain(right.as_ref()).collect();
            if channels.len() != traces.len() {
                return Err(CliError {
                    category: Category::Format,
                    message: format!(
                        "audio has {} channels but the key holds {} records",
                        channels.len(),
                        traces.len()
                    ),
                });
            }
            let restored = channels
                .iter()
                .zip(&traces)
                .map(|(bits, trace)| transform::invert(bits, trace))
                .collect::<Result<Vec<_>, _>>()?;
            let out = codecs::bits_to_audio(audio.sample_rate, &restored[0], restored.get(1))?;
            keyfile::write_atomic(&args.output, &wav::encode(&out))?;
        }
    }
    println!("restored {}", args.output.display());
    Ok(())
}

/// Payload bytes of a file under a format.
pub fn payload_bytes(path: &Path, format: Format) -> CliResult<Vec<u8>> {
    Ok(match format {
        Format::Bytes => std::fs::read(path)?,
        Format::Image => ppm::read(path)?.0.samples,
        Format::Audio => {
            let audio = wav::read(path)?;
            let (left, right) = codecs::audio_to_bits(&audio);
            let mut bytes = left.into_bytes()?;
            if let Some(r) = right {
                bytes.extend(r.into_bytes()?);
            }
            bytes
        }
    })
}

fn cmd_analyze(args: &AnalyzeArgs) -> CliResult {
    let report = match args.format {
        Format::Bytes => {
            let mut reader = BufReader::with_capacity(IO_BUFFER, File::open(&args.input)?);
            let mut a = Analyzer::new();
            let mut buf = vec![0u8; IO_BUFFER];
            loop {
                let n = reader.read(&mut buf)?;
                if n == 0 {
                    break;
                }
                a.update(&buf[..n]);
            }
            a.finish()?
        }
        format => analysis::analyze(&payload_bytes(&args.input, format)?)?,
    };
    if let Some(path) = &args.report {
        write_json(path, &report)?;
    }
    if args.json {
        println!("{}", serde_json::to_string_pretty(&report).expect("report serializes"));
    } else if args.kv {
        print!("{}", report.to_key_value());
    } else {
        println!("{report}");
    }
    Ok(())
}

/// One row of a sweep: entropy after `pass` applications.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SweepRow {
    pub size: usize,
    pub count: usize,
    pub pass: usize,
    pub entropy: f64,
}

/// Runs the grid: a fresh set per (size, count) point, then `repeat`
/// applications, recording entropy after each. Pass 0 is the input.
pub fn sweep(
    input: &BitStream,
    sizes: &[usize],
    counts: &[usize],
    repeat: usize,
    tail: TailPolicy,
    mode: ShuffleMode,
    source: &mut EntropySource,
) -> crate::Result<Vec<SweepRow>> {
    if sizes.is_empty() || counts.is_empty() || repeat == 0 {
        return Err(Error::Contract("sweep axes must be non-empty and repeat >= 1".into()));
    }
    let entropy = |bits: &BitStream| analysis::shannon_entropy(bits.as_packed());
    let base = entropy(input)?;
    let mut rows = Vec::new();
    for &size in sizes {
        for &count in counts {
            let set = Arc::new(generate_set(size, count, source, mode)?);
            rows.push(SweepRow { size, count, pass: 0, entropy: base });
            let mut current = input.clone();
            for pass in 1..=repeat {
                current = transform::expand(&current, &set, source, tail)?.0;
                rows.push(SweepRow { size, count, pass, entropy: entropy(&current)? });
            }
        }
    }
    Ok(rows)
}

fn cmd_sweep(args: &SweepArgs) -> CliResult {
    for &size in &args.sizes {
        for &count in &args.counts {
            check_matrix(size, count)?;
        }
    }
    if args.repeat == 0 {
        return Err(CliError::config("--repeat must be at least 1"));
    }
    let bits = BitStream::from_bytes(payload_bytes(&args.input, args.format)?);
    let mut source = args.source.open()?;
    let rows = sweep(
        &bits,
        &args.sizes,
        &args.counts,
        args.repeat,
        args.tail.into(),
        args.mode.into(),
        &mut source,
    )?;
    if let Some(path) = &args.report {
        write_json(path, &rows)?;
    }
    if args.json {
        println!("{}", serde_json::to_string_pretty(&rows).expect("rows serialize"));
    } else {
        println!("size\tcount\tpass\tentropy");
        for r in &rows {
            println!("{}\t{}\t{}\t{:.6}", r.size, r.count, r.pass, r.entropy);
        }
    }
    Ok(())
}

pub fn run(cli: &Cli) -> CliResult {
    match &cli.command {
        Command::Keygen(a) => cmd_keygen(a),
        Command::Expand(a) => cmd_expand(a),
        Command::Invert(a) => cmd_invert(a),
        Command::Analyze(a) => cmd_analyze(a),
        Command::Sweep(a) => cmd_sweep(a),
    }
}

/// Parses `args` and runs; returns the process exit code.
pub fn main_with<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { Category::Config.exit_code() } else { 0 };
        }
    };
    match run(&cli) {
        Ok(()) => 0,
        Err(e) => {
            eprintln!("permex: {e}");
            e.category.exit_code()
        }
    }
}

pub fn main() -> i32 {
    main_with(std::env::args_os())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_flags() {
        let cli = Cli::try_parse_from([
            "permex", "expand", "in.txt", "-o", "out.bin", "--key", "k.pxk", "--size", "1024",
            "--count", "4", "--tail", "pad", "--seed", "abcd", "--format", "image",
        ])
        .unwrap();
        let Command::Expand(a) = cli.command else { panic!() };
        assert_eq!(a.matrix.size, 1024);
        assert_eq!(a.matrix.count, 4);
        assert_eq!(a.tail, Tail::Pad);
        assert_eq!(a.format, Format::Image);
        assert_eq!(a.source.seed.as_deref(), Some("abcd"));
    }

    #[test]
    fn sources_are_exclusive() {
        assert!(Cli::try_parse_from(["permex", "keygen", "--key", "k", "--seed", "00", "--system"]).is_err());
        assert!(Cli::try_parse_from(["permex", "keygen", "--key", "k", "--cycle"]).is_err());
        assert!(Cli::try_parse_from(["permex", "keygen", "--key", "k", "--entropy-file", "e", "--cycle"]).is_ok());
        assert!(Cli::try_parse_from(["permex", "keygen", "--key", "k", "--entropy-file", "e", "--seed", "0"]).is_err());
    }

    #[test]
    fn sweep_lists() {
        let cli = Cli::try_parse_from(["permex", "sweep", "f", "--sizes", "32,128,512", "--repeat", "5"]).unwrap();
        let Command::Sweep(a) = cli.command else { panic!() };
        assert_eq!(a.sizes, vec![32, 128, 512]);
        assert_eq!(a.counts, vec![16]);
        assert_eq!(a.repeat, 5);
    }

    #[test]
    fn matrix_checks() {
        assert!(check_matrix(256, 16).is_ok());
        assert!(check_matrix(4, 16).is_err());
        assert!(check_matrix(300, 16).is_err());
        assert!(check_matrix(256, 3).is_err());
    }

    #[test]
    fn error_categories() {
        let e: CliError = Error::Exhausted { consumed: 1, requested: 2, capacity: 1 }.into();
        assert_eq!(e.category, Category::EntropyExhausted);
        let e: CliError = Error::ChunkSelection {
            chunk: 3,
            source: Box::new(Error::Exhausted { consumed: 1, requested: 2, capacity: 1 }),
        }
        .into();
        assert_eq!(e.category.exit_code(), 5);
        let e: CliError = Error::Format("x".into()).into();
        assert_eq!(e.category, Category::Format);
        let e: CliError = std::io::Error::other("x").into();
        assert_eq!(e.category, Category::Io);
    }

    #[test]
    fn sweep_is_deterministic() {
        let input = BitStream::from_bytes(b"the same few words again and again, the same few words".repeat(40));
        let run = || {
            let mut src = EntropySource::seeded(b"sweep").unwrap();
            sweep(&input, &[32, 64], &[2, 4], 2, TailPolicy::IdentityPass, ShuffleMode::Unbiased, &mut src).unwrap()
        };
        let rows = run();
        assert_eq!(rows.len(), 2 * 2 * 3);
        assert_eq!(rows, run());
        assert!(rows.iter().filter(|r| r.pass > 0).all(|r| r.entropy > rows[0].entropy));
    }
}
