//! Command line front end for the delay-Doppler baseband simulator.
//!
//! Four subcommands:
//!
//! - `run <spec.json>` executes a seeded experiment and optionally emits
//!   its JSON summary and CSV curves to a directory,
//! - `modem` pushes one random frame through a chosen transceiver chain
//!   and reports the loopback error,
//! - `effch` computes the effective delay-Doppler channel operator and
//!   writes it in the binary grid format with a JSON sidecar,
//! - `selftest` runs the built-in acceptance criteria and exits nonzero
//!   unless every one of them passes.
//!
//! The environment variable `OTFS_SEED` overrides the seed of any
//! experiment spec passed to `run`.

use std::fs::File;
use std::io::BufWriter;
use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};
use clap::{Parser, Subcommand, ValueEnum};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use otfs::acceptance;
use otfs::channel::{default_cp_len, ChannelSpec};
use otfs::config::OtfsConfig;
use otfs::detection::{map_bits, Constellation};
use otfs::effective::{build_analytic, closed_form_operator, probe_operator};
use otfs::experiment::{self, ExperimentSpec};
use otfs::grid::{write_complex_matrix, DdGrid};
use otfs::modem::{demodulate, modulate, ofdm_demodulate, ofdm_modulate, ModemArch};
use otfs::pulses::Pulse;
use otfs::transforms::{isfft, sfft};

#[derive(Parser)]
#[command(
    name = "otfs",
    version,
    about = "Delay-Doppler (OTFS) baseband simulation workbench",
    propagate_version = true
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

/// Transceiver selection on the command line; `ofdm` picks the
/// independent multicarrier reference modem.
#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum ArchArg {
    Sfft,
    Dzt,
    Ofdm,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum MethodArg {
    /// Assemble the operator from per-path cross-ambiguity tables.
    Analytic,
    /// Probe the full simulation chain with unit impulses.
    Probe,
    /// Twisted-shift closed form; needs every path on the sample grid.
    ClosedForm,
}

impl MethodArg {
    fn name(&self) -> &'static str {
        match self {
            MethodArg::Analytic => "analytic",
            MethodArg::Probe => "probe",
            MethodArg::ClosedForm => "closed-form",
        }
    }
}

impl ArchArg {
    fn name(&self) -> &'static str {
        match self {
            ArchArg::Sfft => "sfft",
            ArchArg::Dzt => "dzt",
            ArchArg::Ofdm => "ofdm",
        }
    }
}

#[derive(Subcommand)]
enum Command {
    /// Run an experiment described by a JSON spec file.
    Run {
        /// Path to the experiment spec (JSON).
        spec: PathBuf,
        /// Directory for the JSON summary and CSV curves.
        #[arg(long)]
        out: Option<PathBuf>,
        /// Print the full result bundle as JSON on stdout.
        #[arg(long)]
        json: bool,
    },
    /// Push one random QPSK frame through a modem chain and report the
    /// loopback error.
    Modem {
        #[arg(long, value_enum, default_value_t = ArchArg::Sfft)]
        arch: ArchArg,
        /// Filter descriptor: `rect` or `rc:<beta>`.
        #[arg(long, default_value = "rect")]
        pulse: String,
        /// Delay bins / subcarriers.
        #[arg(long)]
        m: usize,
        /// Doppler bins / slots.
        #[arg(long)]
        n: usize,
        /// Subcarrier spacing in Hz.
        #[arg(long, default_value_t = 15e3)]
        delta_f: f64,
        /// Oversampling factor.
        #[arg(long, default_value_t = 1)]
        q: usize,
        /// Cyclic prefix length in samples.
        #[arg(long, default_value_t = 0)]
        cp: usize,
        #[arg(long, default_value_t = 1)]
        seed: u64,
        /// Write `<prefix>-input.bin`, `<prefix>-output.bin`, and
        /// `<prefix>-waveform.bin` in the binary grid format.
        #[arg(long)]
        dump: Option<PathBuf>,
    },
    /// Compute the effective delay-Doppler channel operator.
    Effch {
        #[arg(long)]
        m: usize,
        #[arg(long)]
        n: usize,
        #[arg(long, default_value_t = 15e3)]
        delta_f: f64,
        /// Channel spec file (JSON).
        #[arg(long, conflicts_with = "preset", required_unless_present = "preset")]
        channel: Option<PathBuf>,
        /// Named channel preset.
        #[arg(long)]
        preset: Option<String>,
        #[arg(long, default_value = "rect")]
        pulse: String,
        #[arg(long, value_enum, default_value_t = MethodArg::Analytic)]
        method: MethodArg,
        /// Architecture probed by `--method probe` and `--compare`.
        #[arg(long, value_enum, default_value_t = ArchArg::Sfft)]
        arch: ArchArg,
        /// Cyclic prefix length; defaults to the shortest one covering
        /// the channel's delay spread.
        #[arg(long)]
        cp: Option<usize>,
        /// Output file for the flattened operator (binary grid format).
        #[arg(long)]
        out: PathBuf,
        /// Also probe the simulation chain and report the largest
        /// entrywise deviation.
        #[arg(long)]
        compare: bool,
    },
    /// Run the built-in acceptance criteria; exit 0 only if all pass.
    Selftest,
}

fn main() -> Result<()> {
    env_logger::init();
    let code = match Cli::parse().command {
        Command::Run { spec, out, json } => cmd_run(&spec, out.as_deref(), json)?,
        Command::Modem {
            arch,
            pulse,
            m,
            n,
            delta_f,
            q,
            cp,
            seed,
            dump,
        } => cmd_modem(arch, &pulse, m, n, delta_f, q, cp, seed, dump.as_deref())?,
        Command::Effch {
            m,
            n,
            delta_f,
            channel,
            preset,
            pulse,
            method,
            arch,
            cp,
            out,
            compare,
        } => cmd_effch(
            m,
            n,
            delta_f,
            channel.as_deref(),
            preset.as_deref(),
            &pulse,
            method,
            arch,
            cp,
            &out,
            compare,
        )?,
        Command::Selftest => cmd_selftest(),
    };
    std::process::exit(code);
}

// ----------------------------------------------------------------------
// run
// ----------------------------------------------------------------------

fn cmd_run(spec_path: &Path, out: Option<&Path>, json: bool) -> Result<i32> {
    let text = std::fs::read_to_string(spec_path)
        .with_context(|| format!("reading spec {}", spec_path.display()))?;
    let mut spec = ExperimentSpec::from_json(&text)
        .with_context(|| format!("parsing spec {}", spec_path.display()))?;
    if let Ok(var) = std::env::var("OTFS_SEED") {
        let seed: u64 = var
            .parse()
            .with_context(|| format!("OTFS_SEED must be an unsigned integer, got '{var}'"))?;
        eprintln!("OTFS_SEED={seed} overrides spec seed {}", spec.seed);
        spec.seed = seed;
    }
    let bundle = experiment::run(&spec).context("running experiment")?;
    for v in &bundle.verdicts {
        println!(
            "{} {}: measured {:.6e} vs threshold {:.6e}",
            if v.passed { "PASS" } else { "FAIL" },
            v.name,
            v.measured,
            v.threshold
        );
    }
    for (name, value) in &bundle.metrics {
        println!("metric {name} = {value}");
    }
    if json {
        println!(
            "{}",
            serde_json::to_string_pretty(&bundle).expect("bundle serialization cannot fail")
        );
    }
    if let Some(dir) = out {
        for f in experiment::emit(&bundle, dir).context("emitting result files")? {
            println!("wrote {}", f.display());
        }
    }
    Ok(if bundle.passed { 0 } else { 2 })
}

// ----------------------------------------------------------------------
// modem
// ----------------------------------------------------------------------

#[allow(clippy::too_many_arguments)]
fn cmd_modem(
    arch: ArchArg,
    pulse: &str,
    m: usize,
    n: usize,
    delta_f: f64,
    q: usize,
    cp: usize,
    seed: u64,
    dump: Option<&Path>,
) -> Result<i32> {
    let cfg = OtfsConfig {
        m,
        n,
        delta_f,
        slot_duration: 1.0 / delta_f,
        carrier_freq: 0.0,
        cp_len: cp,
        oversampling: q,
    }
    .validate()?;
    let g = Pulse::parse(pulse, cfg.slot_duration)?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let bits: Vec<bool> = (0..2 * cfg.grid_len()).map(|_| rng.random()).collect();
    let x = map_bits(&bits, Constellation::Qpsk, m, n)?;
    let (s, y) = match arch {
        ArchArg::Sfft => {
            let s = modulate(ModemArch::Sfft, &x, &g, &cfg)?;
            let y = demodulate(ModemArch::Sfft, &s, &g, &cfg)?;
            (s, y)
        }
        ArchArg::Dzt => {
            let s = modulate(ModemArch::Dzt, &x, &g, &cfg)?;
            let y = demodulate(ModemArch::Dzt, &s, &g, &cfg)?;
            (s, y)
        }
        ArchArg::Ofdm => {
            if !g.is_rectangular() {
                bail!("the OFDM reference modem only supports the rectangular filter");
            }
            let s = ofdm_modulate(&isfft(&x), &cfg)?;
            let y = sfft(&ofdm_demodulate(&s, &cfg)?);
            (s, y)
        }
    };
    let err = y.max_abs_diff(&x);
    println!(
        "modem {} ({m} x {n}, Q = {q}, cp = {cp}, pulse = {pulse}): \
         {} samples, loopback max abs error = {err:.3e}",
        arch.name(),
        s.samples.len()
    );
    if let Some(prefix) = dump {
        dump_grid(&with_suffix(prefix, "-input.bin"), &x)?;
        dump_grid(&with_suffix(prefix, "-output.bin"), &y)?;
        let path = with_suffix(prefix, "-waveform.bin");
        let file = File::create(&path).with_context(|| format!("creating {}", path.display()))?;
        write_complex_matrix(&mut BufWriter::new(file), 1, s.samples.len(), &s.samples)?;
        println!("wrote {}", path.display());
    }
    Ok(0)
}

fn with_suffix(prefix: &Path, suffix: &str) -> PathBuf {
    let mut name = prefix.as_os_str().to_os_string();
    name.push(suffix);
    PathBuf::from(name)
}

fn dump_grid(path: &Path, grid: &DdGrid) -> Result<()> {
    let file = File::create(path).with_context(|| format!("creating {}", path.display()))?;
    grid.write_to(&mut BufWriter::new(file))?;
    println!("wrote {}", path.display());
    Ok(())
}

// ----------------------------------------------------------------------
// effch
// ----------------------------------------------------------------------

#[allow(clippy::too_many_arguments)]
fn cmd_effch(
    m: usize,
    n: usize,
    delta_f: f64,
    channel: Option<&Path>,
    preset: Option<&str>,
    pulse: &str,
    method: MethodArg,
    arch: ArchArg,
    cp: Option<usize>,
    out: &Path,
    compare: bool,
) -> Result<i32> {
    let mut cfg = OtfsConfig::new(m, n, delta_f)?;
    let ch = match (channel, preset) {
        (Some(path), None) => {
            let text = std::fs::read_to_string(path)
                .with_context(|| format!("reading channel {}", path.display()))?;
            ChannelSpec::from_json(&text)
                .with_context(|| format!("parsing channel {}", path.display()))?
        }
        (None, Some(name)) => ChannelSpec::preset(name, &cfg)?,
        _ => bail!("exactly one of --channel and --preset is required"),
    };
    cfg.cp_len = cp.unwrap_or_else(|| default_cp_len(&ch, &cfg));
    let cfg = cfg.validate()?;
    let g = Pulse::parse(pulse, cfg.slot_duration)?;
    let arch = match arch {
        ArchArg::Sfft => ModemArch::Sfft,
        ArchArg::Dzt => ModemArch::Dzt,
        ArchArg::Ofdm => bail!("effch probes the sfft or dzt chain, not the OFDM reference"),
    };
    let op = match method {
        MethodArg::Analytic => build_analytic(&ch, &g, &g, &cfg)?,
        MethodArg::Probe => probe_operator(arch, Some(&ch), &g, &g, &cfg)?,
        MethodArg::ClosedForm => {
            if !g.is_rectangular() {
                bail!("the closed form assumes rectangular filters");
            }
            closed_form_operator(&ch, &cfg)?
        }
    };
    let file = File::create(out).with_context(|| format!("creating {}", out.display()))?;
    op.write_to(&mut BufWriter::new(file))?;
    println!(
        "wrote {} ({1} x {1} operator, method {2})",
        out.display(),
        cfg.grid_len(),
        method.name()
    );

    let mut max_err: Option<f64> = None;
    if compare {
        let probed = probe_operator(arch, Some(&ch), &g, &g, &cfg)?;
        let err = op.max_abs_diff(&probed);
        println!("max abs deviation from probed chain = {err:.3e}");
        max_err = Some(err);
    }
    let sidecar = serde_json::json!({
        "m": cfg.m,
        "n": cfg.n,
        "delta_f": cfg.delta_f,
        "cp_len": cfg.cp_len,
        "filter": pulse,
        "method": method.name(),
        "arch": format!("{arch}"),
        "channel": ch,
        "max_abs_error_vs_probe": max_err,
    });
    let sidecar_path = with_suffix(out, ".json");
    std::fs::write(
        &sidecar_path,
        format!("{:#}\n", sidecar),
    )
    .with_context(|| format!("writing {}", sidecar_path.display()))?;
    println!("wrote {}", sidecar_path.display());
    Ok(0)
}

// ----------------------------------------------------------------------
// selftest
// ----------------------------------------------------------------------

fn cmd_selftest() -> i32 {
    let results = acceptance::run_all();
    for r in &results {
        println!("{}", r.line());
    }
    let failed = results.iter().filter(|r| !r.passed).count();
    if failed > 0 {
        println!("{failed} of {} criteria FAILED", results.len());
        1
    } else {
        println!("all {} criteria passed", results.len());
        0
    }
}
