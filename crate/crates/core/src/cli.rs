// SPDX-License-Identifier: Apache-2.0

//! Command-line front end.
//!
//! Every subcommand is a `cmd_*` function taking its parsed arguments and
//! a writer for standard output, so the commands can be driven from tests
//! without spawning a process.

use std::io::Write;
use std::path::{Path, PathBuf};
use std::time::{SystemTime, UNIX_EPOCH};

use clap::{Args, Parser, Subcommand};

use crate::analytics::{block_stability, threshold_sweep};
use crate::bits::{parse_hex_dump, to_hex_dump, BitVector};
use crate::enroll::{
    build_mask, EnrollParams, DEFAULT_BLOCK_BITS, DEFAULT_TARGET_LEN, DEFAULT_THRESHOLD,
};
use crate::error::{Error, Result};
use crate::fsutil;
use crate::keygen::{
    apply_mask, generate_key, generate_key_with_rng, reproduce_key_with_fingerprint, KeyMaterial,
};
use crate::registry::{resolve, Registry, RegistryEntry};
use crate::sim::{Calibration, Condition, ConditionKind, DeviceModel, DEFAULT_NUM_BITS};

#[derive(Debug, Parser)]
#[command(
    name = "srampuf",
    version,
    about = "SRAM power-up PUF enrollment and key generation"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Write simulated power-up dumps, one file per sample
    Simulate(SimulateArgs),
    /// Select stable positions from a directory of dumps and register the mask
    Enroll(EnrollArgs),
    /// Generate helper data for an enrolled device
    Genkey(GenkeyArgs),
    /// Reproduce the key of an enrolled device from a fresh dump
    Reproduce(ReproduceArgs),
    /// Per-block stability CSV
    Stats(StatsArgs),
    /// Threshold sweep CSV
    Sweep(SweepArgs),
    /// Copy a dump with chosen bits inverted
    Flip(FlipArgs),
    /// Print the default simulator calibration
    GenConfig(GenConfigArgs),
}

#[derive(Debug, Args)]
pub struct SimulateArgs {
    /// Calibration file; defaults apply to missing keys
    #[arg(long)]
    pub config: Option<PathBuf>,
    #[arg(long, default_value_t = 1)]
    pub device_seed: u64,
    /// NTNA, HTNA or NTWA
    #[arg(long, default_value = "NTNA")]
    pub condition: ConditionKind,
    /// Override the condition's noise multiplier
    #[arg(long)]
    pub multiplier: Option<f64>,
    #[arg(long, short = 'n', default_value_t = 300)]
    pub count: usize,
    /// Sample seed of the first dump; later dumps use consecutive seeds
    #[arg(long, default_value_t = 0)]
    pub seed0: u64,
    #[arg(long, default_value_t = DEFAULT_NUM_BITS)]
    pub bits: usize,
    #[arg(long, short = 'o')]
    pub out: PathBuf,
}

#[derive(Debug, Args)]
pub struct EnrollArgs {
    /// Directory of `.hex` dumps
    #[arg(long)]
    pub dumps: PathBuf,
    #[arg(long)]
    pub registry: PathBuf,
    #[arg(long)]
    pub device_id: String,
    #[arg(long, short = 't', default_value_t = DEFAULT_THRESHOLD)]
    pub threshold: u32,
    #[arg(long, default_value_t = DEFAULT_TARGET_LEN)]
    pub target_len: usize,
    #[arg(long, default_value_t = DEFAULT_BLOCK_BITS)]
    pub block_len: usize,
    #[arg(long, default_value_t = 0)]
    pub base_offset: usize,
    /// Consecutive windows enrollment may draw from (default: all)
    #[arg(long)]
    pub max_windows: Option<usize>,
}

#[derive(Debug, Args)]
pub struct GenkeyArgs {
    #[arg(long)]
    pub dump: PathBuf,
    #[arg(long)]
    pub registry: PathBuf,
    #[arg(long)]
    pub device_id: String,
    /// Seed for the random codeword (default: operating-system randomness)
    #[arg(long)]
    pub seed: Option<u64>,
    /// Print the derived key on standard output
    #[arg(long)]
    pub debug_key: bool,
}

#[derive(Debug, Args)]
pub struct ReproduceArgs {
    #[arg(long)]
    pub dump: PathBuf,
    #[arg(long)]
    pub registry: PathBuf,
    #[arg(long)]
    pub device_id: String,
    /// Print the reproduced key on standard output
    #[arg(long)]
    pub debug_key: bool,
}

#[derive(Debug, Args)]
pub struct StatsArgs {
    #[arg(long)]
    pub dumps: PathBuf,
    #[arg(long, default_value_t = DEFAULT_BLOCK_BITS)]
    pub block_len: usize,
    /// Write the CSV here instead of standard output
    #[arg(long, short = 'o')]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct SweepArgs {
    /// Directory of enrollment dumps
    #[arg(long)]
    pub enroll: PathBuf,
    /// Test set as LABEL=DIR; repeatable
    #[arg(long = "test", value_parser = parse_test_set, required = true)]
    pub tests: Vec<(String, PathBuf)>,
    #[arg(long, default_value_t = 1)]
    pub t_min: u32,
    #[arg(long, default_value_t = 5)]
    pub t_max: u32,
    #[arg(long, default_value_t = DEFAULT_BLOCK_BITS)]
    pub block_len: usize,
    #[arg(long, short = 'o')]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct FlipArgs {
    #[arg(long, short = 'i')]
    pub input: PathBuf,
    #[arg(long, short = 'o')]
    pub output: PathBuf,
    /// Absolute bit index to invert; repeatable
    #[arg(long = "bit")]
    pub bits: Vec<usize>,
    /// Index into the device's masked response to invert; repeatable
    #[arg(long = "masked", requires_all = ["registry", "device_id"])]
    pub masked: Vec<usize>,
    #[arg(long)]
    pub registry: Option<PathBuf>,
    #[arg(long)]
    pub device_id: Option<String>,
}

#[derive(Debug, Args)]
pub struct GenConfigArgs {
    #[arg(long, short = 'o')]
    pub out: Option<PathBuf>,
}

fn parse_test_set(s: &str) -> std::result::Result<(String, PathBuf), String> {
    match s.split_once('=') {
        Some((label, dir)) if !label.is_empty() && !dir.is_empty() => {
            Ok((label.to_string(), dir.into()))
        }
        _ => Err(format!("expected LABEL=DIR, got {s:?}")),
    }
}

pub fn run(cli: Cli, out: &mut dyn Write) -> Result<()> {
    match cli.command {
        Command::Simulate(a) => cmd_simulate(&a, out).map(|_| ()),
        Command::Enroll(a) => cmd_enroll(&a, out).map(|_| ()),
        Command::Genkey(a) => cmd_genkey(&a, out).map(|_| ()),
        Command::Reproduce(a) => cmd_reproduce(&a, out).map(|_| ()),
        Command::Stats(a) => cmd_stats(&a, out),
        Command::Sweep(a) => cmd_sweep(&a, out),
        Command::Flip(a) => cmd_flip(&a, out),
        Command::GenConfig(a) => cmd_gen_config(&a, out),
    }
}

/// File name of sample `k` written by `simulate`.
pub fn sample_file_name(k: usize) -> String {
    format!("sample_{k:05}.hex")
}

pub fn read_dump(path: &Path) -> Result<BitVector> {
    let text = std::fs::read_to_string(path).map_err(|e| {
        Error::Io(std::io::Error::new(
            e.kind(),
            format!("{}: {e}", path.display()),
        ))
    })?;
    parse_hex_dump(&text).map_err(|e| match e {
        Error::DumpParse { line, message } => Error::DumpParse {
            line,
            message: format!("{}: {message}", path.display()),
        },
        other => other,
    })
}

/// All `.hex` files of `dir` in name order. Every dump must have the same
/// length.
pub fn read_dump_dir(dir: &Path) -> Result<Vec<BitVector>> {
    let mut paths: Vec<PathBuf> = std::fs::read_dir(dir)
        .map_err(|e| {
            Error::Io(std::io::Error::new(
                e.kind(),
                format!("{}: {e}", dir.display()),
            ))
        })?
        .filter_map(|entry| entry.ok().map(|e| e.path()))
        .filter(|p| p.extension().is_some_and(|x| x == "hex"))
        .collect();
    paths.sort();
    let dumps: Vec<BitVector> = paths.iter().map(|p| read_dump(p)).collect::<Result<_>>()?;
    if let Some(first) = dumps.first() {
        if let Some(bad) = dumps.iter().position(|d| d.len() != first.len()) {
            return Err(Error::usage(format!(
                "{} has {} bits, {} has {}",
                paths[bad].display(),
                dumps[bad].len(),
                paths[0].display(),
                first.len()
            )));
        }
    }
    Ok(dumps)
}

fn now_unix() -> u64 {
    SystemTime::now()
        .duration_since(UNIX_EPOCH)
        .map_or(0, |d| d.as_secs())
}

fn write_report(out_path: Option<&Path>, csv: &str, out: &mut dyn Write) -> Result<()> {
    match out_path {
        Some(p) => fsutil::write_atomic(p, csv.as_bytes()),
        None => Ok(out.write_all(csv.as_bytes())?),
    }
}

fn print_key(key: &KeyMaterial, out: &mut dyn Write) -> Result<()> {
    writeln!(out, "key1 {}", hex::encode(key.key1()))?;
    writeln!(out, "key2 {}", hex::encode(key.key2()))?;
    Ok(())
}

/// Returns the paths written.
pub fn cmd_simulate(args: &SimulateArgs, out: &mut dyn Write) -> Result<Vec<PathBuf>> {
    let cal = match &args.config {
        Some(p) => Calibration::load(p)?,
        None => Calibration::default(),
    };
    let condition = match args.multiplier {
        Some(m) => Condition::with_multiplier(args.condition, m)?,
        None => cal.condition(args.condition),
    };
    if args.bits % 32 != 0 {
        return Err(Error::usage("--bits must be a multiple of 32"));
    }
    let device = DeviceModel::new(args.device_seed, args.bits, &cal)?;
    let samples = device.collect_samples(&condition, args.count, args.seed0)?;
    std::fs::create_dir_all(&args.out)?;
    let mut written = Vec::with_capacity(samples.len());
    for (k, s) in samples.iter().enumerate() {
        let path = args.out.join(sample_file_name(k));
        fsutil::write_atomic(&path, to_hex_dump(s)?.as_bytes())?;
        written.push(path);
    }
    writeln!(
        out,
        "wrote {} {} dumps of {} bits for {} to {}",
        written.len(),
        condition.kind,
        args.bits,
        device.device_id(),
        args.out.display()
    )?;
    Ok(written)
}

pub fn cmd_enroll(args: &EnrollArgs, out: &mut dyn Write) -> Result<RegistryEntry> {
    let mut registry = Registry::load(&args.registry)?;
    if registry.get(&args.device_id).is_ok() {
        return Err(Error::DuplicateDevice(args.device_id.clone()));
    }
    let dumps = read_dump_dir(&args.dumps)?;
    if dumps.len() < 2 {
        return Err(Error::usage(format!(
            "enrollment needs at least 2 dumps, found {} in {}",
            dumps.len(),
            args.dumps.display()
        )));
    }
    let params = EnrollParams {
        base_offset: args.base_offset,
        window_length: args.block_len,
        max_windows: args.max_windows,
        threshold: args.threshold,
        target_len: args.target_len,
    };
    let mask = build_mask(&dumps, &params, &args.device_id)?;
    let mask_file = format!("{}.mask.toml", args.device_id);
    let fp = mask.save(&resolve(&args.registry, &mask_file))?;
    let entry = RegistryEntry::for_mask(&mask, &mask_file, &fp, now_unix());
    registry.insert(entry.clone())?;
    registry.save(&args.registry)?;
    writeln!(
        out,
        "enrolled {} from {} dumps: {} positions over {} window(s), mask {}",
        args.device_id,
        dumps.len(),
        mask.positions.len(),
        mask.windows,
        fp
    )?;
    Ok(entry)
}

/// Returns the key so callers (tests) can compare; it is printed only with
/// `--debug-key`.
pub fn cmd_genkey(args: &GenkeyArgs, out: &mut dyn Write) -> Result<KeyMaterial> {
    let mut registry = Registry::load(&args.registry)?;
    let (mask, mask_fp) = registry.load_mask(&args.registry, &args.device_id)?;
    let raw = read_dump(&args.dump)?;
    let (helper, key) = match args.seed {
        Some(seed) => generate_key(&raw, &mask, seed)?,
        None => generate_key_with_rng(&raw, &mask, &mut rand::rng())?,
    };
    debug_assert_eq!(helper.mask_fingerprint, mask_fp);
    let helper_file = format!("{}.helper.toml", args.device_id);
    let text = helper.to_text();
    fsutil::write_atomic(&resolve(&args.registry, &helper_file), text.as_bytes())?;
    let entry = registry.get_mut(&args.device_id)?;
    entry.helper_file = Some(helper_file);
    entry.helper_fingerprint = Some(fsutil::fingerprint(text.as_bytes()));
    registry.save(&args.registry)?;
    writeln!(out, "helper data written for {}", args.device_id)?;
    if args.debug_key {
        print_key(&key, out)?;
    }
    Ok(key)
}

pub fn cmd_reproduce(args: &ReproduceArgs, out: &mut dyn Write) -> Result<KeyMaterial> {
    let registry = Registry::load(&args.registry)?;
    let (mask, mask_fp) = registry.load_mask(&args.registry, &args.device_id)?;
    let helper = registry.load_helper(&args.registry, &args.device_id)?;
    let raw = read_dump(&args.dump)?;
    let key = reproduce_key_with_fingerprint(&raw, &mask, &mask_fp, &helper)?;
    writeln!(out, "key reproduced for {}", args.device_id)?;
    if args.debug_key {
        print_key(&key, out)?;
    }
    Ok(key)
}

pub fn cmd_stats(args: &StatsArgs, out: &mut dyn Write) -> Result<()> {
    let dumps = read_dump_dir(&args.dumps)?;
    if dumps.len() < 2 {
        return Err(Error::usage("stats needs at least 2 dumps"));
    }
    let stats = block_stability(&dumps, args.block_len)?;
    write_report(args.out.as_deref(), &stats.to_csv(), out)
}

pub fn cmd_sweep(args: &SweepArgs, out: &mut dyn Write) -> Result<()> {
    if args.t_min == 0 || args.t_min > args.t_max {
        return Err(Error::usage("need 1 <= t-min <= t-max"));
    }
    let enroll = read_dump_dir(&args.enroll)?;
    if enroll.len() < 2 {
        return Err(Error::usage("sweep needs at least 2 enrollment dumps"));
    }
    let tests = args
        .tests
        .iter()
        .map(|(label, dir)| Ok((label.clone(), read_dump_dir(dir)?)))
        .collect::<Result<Vec<_>>>()?;
    let report = threshold_sweep(&enroll, &tests, args.t_min..=args.t_max, args.block_len)?;
    write_report(args.out.as_deref(), &report.to_csv(), out)
}

pub fn cmd_flip(args: &FlipArgs, out: &mut dyn Write) -> Result<()> {
    let mut raw = read_dump(&args.input)?;
    let mut targets = args.bits.clone();
    if !args.masked.is_empty() {
        let (registry_path, device_id) = match (&args.registry, &args.device_id) {
            (Some(r), Some(d)) => (r, d),
            _ => return Err(Error::usage("--masked needs --registry and --device-id")),
        };
        let registry = Registry::load(registry_path)?;
        let (mask, _) = registry.load_mask(registry_path, device_id)?;
        apply_mask(&raw, &mask)?;
        for &j in &args.masked {
            let p = mask.positions.get(j).ok_or_else(|| {
                Error::usage(format!(
                    "masked index {j} out of range 0..{}",
                    mask.positions.len()
                ))
            })?;
            targets.push(mask.base_offset + p);
        }
    }
    for &i in &targets {
        if i >= raw.len() {
            return Err(Error::usage(format!(
                "bit {i} outside a {}-bit dump",
                raw.len()
            )));
        }
        raw.flip(i);
    }
    fsutil::write_atomic(&args.output, to_hex_dump(&raw)?.as_bytes())?;
    writeln!(
        out,
        "flipped {} bit(s) into {}",
        targets.len(),
        args.output.display()
    )?;
    Ok(())
}

pub fn cmd_gen_config(args: &GenConfigArgs, out: &mut dyn Write) -> Result<()> {
    let text = Calibration::default().to_toml();
    write_report(args.out.as_deref(), &text, out)
}
