//! Seeded, reproducible link-level experiments with file emission.
//!
//! An [`ExperimentSpec`] (usually parsed from JSON) names one of six
//! experiment kinds, the frame geometry, and everything needed to
//! reproduce the run bit-for-bit: channel (inline or preset), filter,
//! constellation, SNR grid, trial count, and a mandatory seed. [`run`]
//! executes it and returns a [`ResultBundle`] of verdicts (each with the
//! measured value *and* the threshold it was judged against), metrics,
//! and BER curves; [`emit`] writes the bundle as a JSON summary plus one
//! CSV per curve, byte-stable for identical inputs.
//!
//! SNR convention: `snr_grid_db` is Eb/N0 at the delay-Doppler symbol
//! level. Constellations are unit-energy and the critically sampled
//! chains are unitary, so the per-component complex noise variance is
//! `sigma^2 = 1 / (bits_per_symbol * 10^(EbN0_dB / 10))` — recorded in
//! every emitted JSON so the convention travels with the data.

use std::collections::BTreeMap;
use std::io::Write as _;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::channel::{add_awgn, apply_channel, ChannelSpec};
use crate::config::{coherence_time, max_doppler_with_c, OtfsConfig, NOMINAL_SPEED_OF_LIGHT};
use crate::detection::{
    ber_count, demap_symbols, map_bits, noise_variance_for_ebn0, qpsk_awgn_ber, Constellation,
    MmseEqualizer,
};
use crate::effective::{build_analytic, closed_form_operator, probe_operator};
use crate::error::{Error, Result};
use crate::grid::DdGrid;
use crate::modem::{demodulate, modulate, ofdm_demodulate, ofdm_modulate, ModemArch};
use crate::pulses::Pulse;
use crate::transforms::isfft;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

// ----------------------------------------------------------------------
// Specification
// ----------------------------------------------------------------------

/// The experiment families the harness can run.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum ExperimentKind {
    /// Modulate-demodulate round trip without a channel.
    #[serde(rename = "loopback")]
    Loopback,
    /// Multicarrier vs. Zak architecture on identical frames and channel.
    #[serde(rename = "equivalence")]
    Equivalence,
    /// Analytic effective channel vs. the probed ground truth (and the
    /// closed form, when every path is on-grid).
    #[serde(rename = "effch-compare")]
    EffchCompare,
    /// Single-slot frames against the independent OFDM reference modem.
    #[serde(rename = "ofdm-degenerate")]
    OfdmDegenerate,
    /// Monte-Carlo bit error rate over an Eb/N0 grid.
    #[serde(rename = "ber-sweep")]
    BerSweep,
    /// Mobility arithmetic: maximum Doppler shift and coherence time.
    #[serde(rename = "doppler-example")]
    DopplerExample,
}

impl ExperimentKind {
    /// Spec-file name, also used for emitted file names.
    pub fn name(&self) -> &'static str {
        match self {
            ExperimentKind::Loopback => "loopback",
            ExperimentKind::Equivalence => "equivalence",
            ExperimentKind::EffchCompare => "effch-compare",
            ExperimentKind::OfdmDegenerate => "ofdm-degenerate",
            ExperimentKind::BerSweep => "ber-sweep",
            ExperimentKind::DopplerExample => "doppler-example",
        }
    }
}

/// Channel reference: a named preset string or an inline definition.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum ChannelRef {
    /// Name accepted by [`ChannelSpec::preset`].
    Preset(String),
    /// Full inline channel in the standard JSON form.
    Inline(ChannelSpec),
}

impl ChannelRef {
    fn resolve(&self, cfg: &OtfsConfig) -> Result<ChannelSpec> {
        match self {
            ChannelRef::Preset(name) => ChannelSpec::preset(name, cfg),
            ChannelRef::Inline(ch) => Ok(ch.clone()),
        }
    }
}

/// Carrier/velocity input for the mobility experiment.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MobilitySpec {
    /// Carrier frequency in Hz.
    pub carrier_freq_hz: f64,
    /// Relative speed in km/h.
    pub speed_kmh: f64,
    /// Propagation speed in m/s; the nominal 3e8 when omitted.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub speed_of_light: Option<f64>,
}

fn default_pulse() -> String {
    "rect".to_string()
}

fn default_trials() -> usize {
    10
}

fn default_constellation() -> Constellation {
    Constellation::Qpsk
}

/// Complete description of one reproducible experiment.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentSpec {
    pub kind: ExperimentKind,
    /// Frame geometry; validated on [`run`].
    pub config: OtfsConfig,
    /// Random seed — mandatory so no run is accidentally irreproducible.
    pub seed: u64,
    /// Channel, by preset name or inline; omitted means a direct wire.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub channel: Option<ChannelRef>,
    /// Filter descriptor, e.g. `"rect"` or `"rc:0.25"`.
    #[serde(default = "default_pulse")]
    pub pulse: String,
    /// Transceiver architecture where one must be chosen.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub arch: Option<ModemArch>,
    /// Eb/N0 grid in dB for `ber-sweep`.
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub snr_grid_db: Vec<f64>,
    /// Frames per measurement point.
    #[serde(default = "default_trials")]
    pub trials: usize,
    #[serde(default = "default_constellation")]
    pub constellation: Constellation,
    /// Inputs for `doppler-example`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub mobility: Option<MobilitySpec>,
}

impl ExperimentSpec {
    /// Parses a spec from JSON, rejecting unknown keys.
    pub fn from_json(text: &str) -> Result<Self> {
        Ok(serde_json::from_str(text)?)
    }
}

// ----------------------------------------------------------------------
// Results
// ----------------------------------------------------------------------

/// One pass/fail judgment with the number it was based on.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Verdict {
    pub name: String,
    pub measured: f64,
    pub threshold: f64,
    pub passed: bool,
}

impl Verdict {
    fn at_most(name: &str, measured: f64, threshold: f64) -> Self {
        Verdict {
            name: name.to_string(),
            measured,
            threshold,
            passed: measured.is_finite() && measured <= threshold,
        }
    }
}

/// One BER measurement point.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BerPoint {
    pub snr_db: f64,
    pub ber: f64,
    pub errors: usize,
    pub bits: usize,
}

/// A labeled BER curve, one CSV on emission.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BerCurve {
    pub label: String,
    pub points: Vec<BerPoint>,
}

/// Reproducibility context embedded in every bundle.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Provenance {
    pub seed: u64,
    pub library_version: String,
    pub snr_definition: String,
    /// Echo of the spec that produced the results.
    pub spec: ExperimentSpec,
}

/// Everything [`run`] measured, ready for emission.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ResultBundle {
    pub experiment: String,
    pub passed: bool,
    pub verdicts: Vec<Verdict>,
    /// Scalar measurements keyed by name (sorted on emission).
    pub metrics: BTreeMap<String, f64>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub curves: Vec<BerCurve>,
    pub provenance: Provenance,
}

const SNR_DEFINITION: &str = "Eb/N0 at the delay-Doppler symbol level; per-component complex \
     noise variance sigma^2 = 1 / (bits_per_symbol * 10^(EbN0_dB/10)) for unit-energy \
     constellations";

// ----------------------------------------------------------------------
// Runner
// ----------------------------------------------------------------------

/// Executes the experiment described by `spec`. Deterministic: the same
/// spec (including seed) always produces the same bundle.
pub fn run(spec: &ExperimentSpec) -> Result<ResultBundle> {
    let cfg = spec.config.clone().validate()?;
    if spec.trials == 0 {
        return Err(Error::InvalidSpec(
            "trials = 0 describes an empty experiment".into(),
        ));
    }
    let mut verdicts = Vec::new();
    let mut metrics = BTreeMap::new();
    let mut curves = Vec::new();
    match spec.kind {
        ExperimentKind::Loopback => run_loopback(spec, &cfg, &mut verdicts, &mut metrics)?,
        ExperimentKind::Equivalence => run_equivalence(spec, &cfg, &mut verdicts, &mut metrics)?,
        ExperimentKind::EffchCompare => {
            run_effch_compare(spec, &cfg, &mut verdicts, &mut metrics)?
        }
        ExperimentKind::OfdmDegenerate => {
            run_ofdm_degenerate(spec, &cfg, &mut verdicts, &mut metrics)?
        }
        ExperimentKind::BerSweep => {
            run_ber_sweep(spec, &cfg, &mut verdicts, &mut metrics, &mut curves)?
        }
        ExperimentKind::DopplerExample => {
            run_doppler_example(spec, &cfg, &mut metrics)?
        }
    }
    Ok(ResultBundle {
        experiment: spec.kind.name().to_string(),
        passed: verdicts.iter().all(|v| v.passed),
        verdicts,
        metrics,
        curves,
        provenance: Provenance {
            seed: spec.seed,
            library_version: env!("CARGO_PKG_VERSION").to_string(),
            snr_definition: SNR_DEFINITION.to_string(),
            spec: spec.clone(),
        },
    })
}

fn resolve_channel(spec: &ExperimentSpec, cfg: &OtfsConfig) -> Result<Option<ChannelSpec>> {
    spec.channel
        .as_ref()
        .map(|c| c.resolve(cfg))
        .transpose()
}

fn random_frame_bits(rng: &mut ChaCha8Rng, cfg: &OtfsConfig, map: Constellation) -> Vec<bool> {
    (0..cfg.grid_len() * map.bits_per_symbol())
        .map(|_| rng.random())
        .collect()
}

fn random_frame(rng: &mut ChaCha8Rng, cfg: &OtfsConfig, map: Constellation) -> Result<DdGrid> {
    let bits = random_frame_bits(rng, cfg, map);
    map_bits(&bits, map, cfg.m, cfg.n)
}

fn run_loopback(
    spec: &ExperimentSpec,
    cfg: &OtfsConfig,
    verdicts: &mut Vec<Verdict>,
    metrics: &mut BTreeMap<String, f64>,
) -> Result<()> {
    let g = Pulse::parse(&spec.pulse, cfg.slot_duration)?;
    let arch = spec.arch.unwrap_or(ModemArch::Sfft);
    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
    let mut worst = 0.0f64;
    for _ in 0..spec.trials {
        let x = random_frame(&mut rng, cfg, spec.constellation)?;
        let y = demodulate(arch, &modulate(arch, &x, &g, cfg)?, &g, cfg)?;
        worst = worst.max(y.max_abs_diff(&x));
    }
    metrics.insert("max_abs_error".into(), worst);
    verdicts.push(Verdict::at_most("loopback-max-abs-error", worst, 1e-9));
    Ok(())
}

fn run_equivalence(
    spec: &ExperimentSpec,
    cfg: &OtfsConfig,
    verdicts: &mut Vec<Verdict>,
    metrics: &mut BTreeMap<String, f64>,
) -> Result<()> {
    let g = Pulse::parse(&spec.pulse, cfg.slot_duration)?;
    let ch = resolve_channel(spec, cfg)?;
    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
    let mut worst = 0.0f64;
    for _ in 0..spec.trials {
        let x = random_frame(&mut rng, cfg, spec.constellation)?;
        let mut outputs = Vec::with_capacity(2);
        for arch in [ModemArch::Sfft, ModemArch::Dzt] {
            let s = modulate(arch, &x, &g, cfg)?;
            let r = match &ch {
                Some(ch) => apply_channel(&s, ch, cfg, 0.0)?,
                None => s,
            };
            outputs.push(demodulate(arch, &r, &g, cfg)?);
        }
        worst = worst.max(outputs[0].max_abs_diff(&outputs[1]));
    }
    metrics.insert("max_abs_error".into(), worst);
    verdicts.push(Verdict::at_most(
        "architecture-equivalence-max-abs-error",
        worst,
        1e-9,
    ));
    Ok(())
}

fn run_effch_compare(
    spec: &ExperimentSpec,
    cfg: &OtfsConfig,
    verdicts: &mut Vec<Verdict>,
    metrics: &mut BTreeMap<String, f64>,
) -> Result<()> {
    let g = Pulse::parse(&spec.pulse, cfg.slot_duration)?;
    let ch = resolve_channel(spec, cfg)?.ok_or_else(|| {
        Error::InvalidSpec("effch-compare needs a channel (inline or preset)".into())
    })?;
    let arch = spec.arch.unwrap_or(ModemArch::Sfft);
    let probed = probe_operator(arch, Some(&ch), &g, &g, cfg)?;
    let analytic = build_analytic(&ch, &g, &g, cfg)?;
    let err_analytic = analytic.rel_frobenius_error(&probed);
    metrics.insert("analytic_vs_probe_rel_frobenius".into(), err_analytic);
    verdicts.push(Verdict::at_most(
        "analytic-vs-probe-rel-frobenius",
        err_analytic,
        1e-6,
    ));
    // The closed form only exists on the integer grid; include it when
    // the channel qualifies.
    if let Ok(closed) = closed_form_operator(&ch, cfg) {
        let err_closed = closed.rel_frobenius_error(&probed);
        metrics.insert("closed_form_vs_probe_rel_frobenius".into(), err_closed);
        verdicts.push(Verdict::at_most(
            "closed-form-vs-probe-rel-frobenius",
            err_closed,
            1e-9,
        ));
    }
    Ok(())
}

fn run_ofdm_degenerate(
    spec: &ExperimentSpec,
    cfg: &OtfsConfig,
    verdicts: &mut Vec<Verdict>,
    metrics: &mut BTreeMap<String, f64>,
) -> Result<()> {
    if cfg.n != 1 {
        return Err(Error::InvalidSpec(format!(
            "ofdm-degenerate requires N = 1 (single-slot frames), got N = {}",
            cfg.n
        )));
    }
    let g = Pulse::parse(&spec.pulse, cfg.slot_duration)?;
    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
    let mut worst = 0.0f64;
    for _ in 0..spec.trials {
        let x = random_frame(&mut rng, cfg, spec.constellation)?;
        let tf = isfft(&x);
        let s_grid = modulate(ModemArch::Sfft, &x, &g, cfg)?;
        let s_ofdm = ofdm_modulate(&tf, cfg)?;
        let wave_err = s_grid
            .samples
            .iter()
            .zip(&s_ofdm.samples)
            .map(|(a, b)| (a - b).norm())
            .fold(0.0, f64::max);
        let tf_err = ofdm_demodulate(&s_grid, cfg)?.max_abs_diff(&tf);
        worst = worst.max(wave_err).max(tf_err);
    }
    metrics.insert("max_abs_error".into(), worst);
    verdicts.push(Verdict::at_most("ofdm-degeneracy-max-abs-error", worst, 1e-12));
    Ok(())
}

fn run_ber_sweep(
    spec: &ExperimentSpec,
    cfg: &OtfsConfig,
    verdicts: &mut Vec<Verdict>,
    metrics: &mut BTreeMap<String, f64>,
    curves: &mut Vec<BerCurve>,
) -> Result<()> {
    if spec.snr_grid_db.is_empty() {
        return Err(Error::InvalidSpec(
            "ber-sweep needs a nonempty snr_grid_db".into(),
        ));
    }
    let g = Pulse::parse(&spec.pulse, cfg.slot_duration)?;
    let arch = spec.arch.unwrap_or(ModemArch::Sfft);
    let map = spec.constellation;
    let ch = resolve_channel(spec, cfg)?;
    // Ground-truth operator for the equalizer, probed once.
    let h = probe_operator(arch, ch.as_ref(), &g, &g, cfg)?;
    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
    let mut points = Vec::with_capacity(spec.snr_grid_db.len());
    for &snr_db in &spec.snr_grid_db {
        let sigma2 = noise_variance_for_ebn0(snr_db, map);
        let equalizer = MmseEqualizer::new(&h, sigma2)?;
        let mut errors = 0usize;
        let mut bits_total = 0usize;
        for _ in 0..spec.trials {
            let bits = random_frame_bits(&mut rng, cfg, map);
            let noise_seed: u64 = rng.random();
            let x = map_bits(&bits, map, cfg.m, cfg.n)?;
            let s = modulate(arch, &x, &g, cfg)?;
            let r = match &ch {
                Some(ch) => apply_channel(&s, ch, cfg, 0.0)?,
                None => s,
            };
            let r = add_awgn(&r, sigma2, noise_seed);
            let y = demodulate(arch, &r, &g, cfg)?;
            let xh = equalizer.equalize(&y)?;
            let stats = ber_count(&bits, &demap_symbols(&xh, map))?;
            errors += stats.errors;
            bits_total += stats.total;
        }
        points.push(BerPoint {
            snr_db,
            ber: errors as f64 / bits_total as f64,
            errors,
            bits: bits_total,
        });
    }
    // Over a direct wire the BPSK/QPSK error rate has a closed form;
    // judge the measurement against it within 3 binomial sigma.
    if ch.is_none() && matches!(map, Constellation::Bpsk | Constellation::Qpsk) {
        for p in &points {
            let theory = qpsk_awgn_ber(p.snr_db);
            let sigma = (theory * (1.0 - theory) / p.bits as f64).sqrt();
            verdicts.push(Verdict::at_most(
                &format!("awgn-ber-vs-theory-{}db", p.snr_db),
                (p.ber - theory).abs(),
                3.0 * sigma,
            ));
        }
    }
    if let Some(p) = points.first() {
        metrics.insert("first_point_ber".into(), p.ber);
    }
    curves.push(BerCurve {
        label: format!("{}-{}", map.name(), arch),
        points,
    });
    Ok(())
}

fn run_doppler_example(
    spec: &ExperimentSpec,
    cfg: &OtfsConfig,
    metrics: &mut BTreeMap<String, f64>,
) -> Result<()> {
    let mob = spec.mobility.ok_or_else(|| {
        Error::InvalidSpec("doppler-example needs a mobility section".into())
    })?;
    let speed_mps = mob.speed_kmh / 3.6;
    let c = mob.speed_of_light.unwrap_or(NOMINAL_SPEED_OF_LIGHT);
    let nu_max = max_doppler_with_c(mob.carrier_freq_hz, speed_mps, c);
    metrics.insert("nu_max_hz".into(), nu_max);
    metrics.insert("coherence_time_s".into(), coherence_time(nu_max)?);
    metrics.insert(
        "doppler_grid_bins".into(),
        nu_max * cfg.n as f64 * cfg.slot_duration,
    );
    Ok(())
}

// ----------------------------------------------------------------------
// Emission
// ----------------------------------------------------------------------

fn io_with_path(path: &Path) -> impl Fn(std::io::Error) -> Error + '_ {
    move |e| Error::Io(std::io::Error::new(e.kind(), format!("{}: {e}", path.display())))
}

/// Writes `<dir>/<experiment>.json` plus `<dir>/<experiment>-<label>.csv`
/// per curve (header `snr_db,ber,errors,bits`). Returns the paths
/// written. Output bytes depend only on the bundle contents.
pub fn emit(bundle: &ResultBundle, dir: &Path) -> Result<Vec<PathBuf>> {
    std::fs::create_dir_all(dir).map_err(io_with_path(dir))?;
    let mut written = Vec::new();
    let json_path = dir.join(format!("{}.json", bundle.experiment));
    let mut text =
        serde_json::to_string_pretty(bundle).expect("result serialization cannot fail");
    text.push('\n');
    std::fs::write(&json_path, text).map_err(io_with_path(&json_path))?;
    written.push(json_path);
    for curve in &bundle.curves {
        let slug: String = curve
            .label
            .chars()
            .map(|c| if c.is_ascii_alphanumeric() { c.to_ascii_lowercase() } else { '-' })
            .collect();
        let csv_path = dir.join(format!("{}-{slug}.csv", bundle.experiment));
        let mut out = Vec::new();
        writeln!(out, "snr_db,ber,errors,bits").expect("in-memory write");
        for p in &curve.points {
            writeln!(out, "{},{},{},{}", p.snr_db, p.ber, p.errors, p.bits)
                .expect("in-memory write");
        }
        std::fs::write(&csv_path, out).map_err(io_with_path(&csv_path))?;
        written.push(csv_path);
    }
    Ok(written)
}
