//! Scenario configuration and the experiments behind the CLI.
//!
//! Configuration is a flat TOML file whose keys mirror the CLI flags:
//!
//! ```toml
//! N = 16            # elements
//! delta = 0.025     # element spacing, m
//! v = 5.0           # platform speed, m/s
//! Ts = 1e-3         # symbol duration, s
//! L = 1000          # symbols
//! lambda = 0.05     # wavelength, m
//! x = 10.0          # target, m
//! y = 0.0
//! b_re = 1.0        # reflection coefficient
//! b_im = 0.0
//! P0_dbm = 30.0     # transmit power
//! sigma2_dbm = -70.0
//! scheme = "sem"    # sem, isotropic, or a comma list / "all"
//! arch = "all"      # moving, fixed, extended, or a comma list / "all"
//! axis = "power"    # power (dBm), symbols (L) or antennas (N)
//! values = [0, 10, 20]
//! seed = 1
//! out = "sweep.csv"
//! trials = 100
//! realizations = 10
//! region = [5, 15, -5, 5]
//! resolution = 0.04
//! refine = true
//! ```
//!
//! Every CSV starts with `#` comment lines holding the tool version, the
//! command, the fully resolved configuration in the same `key = value`
//! syntax and the aperture diagnostics. Saving the configuration lines of a
//! preamble as a file and rerunning the command reproduces the output.

use std::fmt;
use std::fs;
use std::io::{self, Write};
use std::path::{Path, PathBuf};
use std::str::FromStr;

use serde::Deserialize;

use crate::crb::{self, approx};
use crate::error::{Error, Result};
use crate::estimate::{
    self, fmt_f64, EstimateResult, LikelihoodMap, MonteCarloResult, MonteCarloSpec, Region, SearchSpec,
};
use crate::geometry::{self, dbm_to_watts, watts_to_dbm, Architecture, ArrayConfig, Scene};
use crate::rng;
use crate::simulate::{self, Components};
use crate::waveform::{self, Scheme};
use crate::C64;

/// Configuration values as written in a file or given as flags; every key
/// is optional.
#[derive(Debug, Clone, Default, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RawConfig {
    #[serde(rename = "N")]
    pub n: Option<usize>,
    pub delta: Option<f64>,
    pub v: Option<f64>,
    #[serde(rename = "Ts")]
    pub ts: Option<f64>,
    #[serde(rename = "L")]
    pub l: Option<usize>,
    pub lambda: Option<f64>,
    pub x: Option<f64>,
    pub y: Option<f64>,
    pub b_re: Option<f64>,
    pub b_im: Option<f64>,
    #[serde(rename = "P0_dbm")]
    pub p0_dbm: Option<f64>,
    pub sigma2_dbm: Option<f64>,
    pub scheme: Option<String>,
    pub arch: Option<String>,
    pub axis: Option<String>,
    pub values: Option<Vec<f64>>,
    pub seed: Option<u64>,
    pub out: Option<PathBuf>,
    pub trials: Option<usize>,
    pub realizations: Option<usize>,
    pub region: Option<[f64; 4]>,
    pub resolution: Option<f64>,
    pub refine: Option<bool>,
}

macro_rules! overlay {
    ($base:ident, $top:ident, $($field:ident),*) => {
        RawConfig { $($field: $top.$field.or($base.$field)),* }
    };
}

impl RawConfig {
    pub fn parse(text: &str) -> Result<Self> {
        toml::from_str(text).map_err(|e| Error::Config(e.to_string().trim_end().to_owned()))
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text =
            fs::read_to_string(path).map_err(|e| Error::Config(format!("cannot read {}: {e}", path.display())))?;
        Self::parse(&text).map_err(|e| match e {
            Error::Config(msg) => Error::Config(format!("{}: {msg}", path.display())),
            other => other,
        })
    }

    /// Values from `top` win over values from `self`.
    pub fn overlaid(self, top: RawConfig) -> RawConfig {
        let base = self;
        overlay!(
            base,
            top,
            n,
            delta,
            v,
            ts,
            l,
            lambda,
            x,
            y,
            b_re,
            b_im,
            p0_dbm,
            sigma2_dbm,
            scheme,
            arch,
            axis,
            values,
            seed,
            out,
            trials,
            realizations,
            region,
            resolution,
            refine
        )
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SweepAxis {
    /// Transmit power in dBm.
    Power,
    /// Number of symbols `L`.
    Symbols,
    /// Number of elements `N`.
    Antennas,
}

impl SweepAxis {
    pub fn as_str(self) -> &'static str {
        match self {
            SweepAxis::Power => "power",
            SweepAxis::Symbols => "symbols",
            SweepAxis::Antennas => "antennas",
        }
    }

    pub fn default_values(self) -> Vec<f64> {
        match self {
            SweepAxis::Power => (0..=10).map(|i| 5.0 * i as f64).collect(),
            SweepAxis::Symbols => vec![100.0, 200.0, 500.0, 1000.0, 2000.0, 5000.0],
            SweepAxis::Antennas => vec![4.0, 8.0, 16.0, 32.0, 64.0, 128.0],
        }
    }
}

impl fmt::Display for SweepAxis {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for SweepAxis {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "power" | "p0" => Ok(SweepAxis::Power),
            "symbols" | "l" => Ok(SweepAxis::Symbols),
            "antennas" | "n" => Ok(SweepAxis::Antennas),
            other => Err(Error::Config(format!("unknown sweep axis '{other}'"))),
        }
    }
}

fn parse_list<T: FromStr<Err = Error> + Copy>(text: &str, all: &[T]) -> Result<Vec<T>> {
    if text.trim().eq_ignore_ascii_case("all") {
        return Ok(all.to_vec());
    }
    let items = text
        .split(',')
        .filter(|s| !s.trim().is_empty())
        .map(T::from_str)
        .collect::<Result<Vec<T>>>()?;
    if items.is_empty() {
        return Err(Error::Config(format!("empty list '{text}'")));
    }
    Ok(items)
}

/// Fully resolved and validated configuration.
#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentConfig {
    pub array: ArrayConfig,
    pub scene: Scene,
    pub schemes: Vec<Scheme>,
    pub architectures: Vec<Architecture>,
    pub axis: SweepAxis,
    /// Explicit sweep values; `None` selects the axis defaults.
    pub values: Option<Vec<f64>>,
    pub seed: u64,
    pub out: Option<PathBuf>,
    pub trials: usize,
    pub realizations: usize,
    pub region: Region,
    pub resolution: f64,
    pub refine: bool,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        Self::resolve(RawConfig::default()).expect("defaults are valid")
    }
}

fn keyed<T>(key: &str, r: Result<T>) -> Result<T> {
    r.map_err(|e| match e {
        Error::Config(msg) => Error::Config(format!("{key}: {msg}")),
        other => Error::Config(format!("{key}: {other}")),
    })
}

impl ExperimentConfig {
    /// Fills unset keys with the reference scenario and validates the result.
    pub fn resolve(raw: RawConfig) -> Result<Self> {
        let da = ArrayConfig::default_scenario();
        let ds = Scene::default_scenario();
        let array = keyed(
            "N, delta, v, Ts, L",
            ArrayConfig::new(
                raw.n.unwrap_or(da.n_elements()),
                raw.delta.unwrap_or(da.spacing()),
                raw.v.unwrap_or(da.speed()),
                raw.ts.unwrap_or(da.symbol_duration()),
                raw.l.unwrap_or(da.n_symbols()),
            ),
        )?;
        let scene = keyed(
            "x, y, b_re, b_im, P0_dbm, sigma2_dbm, lambda",
            Scene::new(
                raw.x.unwrap_or(ds.target_x()),
                raw.y.unwrap_or(ds.target_y()),
                C64::new(
                    raw.b_re.unwrap_or(ds.reflection().re),
                    raw.b_im.unwrap_or(ds.reflection().im),
                ),
                raw.sigma2_dbm.map(dbm_to_watts).unwrap_or(ds.noise_power()),
                raw.p0_dbm.map(dbm_to_watts).unwrap_or(ds.tx_power()),
                raw.lambda.unwrap_or(ds.wavelength()),
            ),
        )?;
        let schemes = keyed(
            "scheme",
            parse_list(raw.scheme.as_deref().unwrap_or("sem"), &Scheme::ALL),
        )?;
        let architectures = keyed(
            "arch",
            parse_list(raw.arch.as_deref().unwrap_or("all"), &Architecture::ALL),
        )?;
        let axis = keyed("axis", SweepAxis::from_str(raw.axis.as_deref().unwrap_or("power")))?;
        if let Some(values) = &raw.values {
            if values.is_empty() {
                return Err(Error::Config("values: empty list".into()));
            }
        }
        let region = match raw.region {
            Some([x0, x1, y0, y1]) => keyed("region", Region::new(x0, x1, y0, y1))?,
            None => Region::default_search(),
        };
        let resolution = raw.resolution.unwrap_or(0.04);
        if !(resolution > 0.0 && resolution.is_finite()) {
            return Err(Error::Config(format!("resolution: must be positive, got {resolution}")));
        }
        let trials = raw.trials.unwrap_or(100);
        if trials == 0 {
            return Err(Error::Config("trials: must be at least 1".into()));
        }
        let realizations = raw.realizations.unwrap_or(10);
        if realizations == 0 {
            return Err(Error::Config("realizations: must be at least 1".into()));
        }
        Ok(Self {
            array,
            scene,
            schemes,
            architectures,
            axis,
            values: raw.values,
            seed: raw.seed.unwrap_or(1),
            out: raw.out,
            trials,
            realizations,
            region,
            resolution,
            refine: raw.refine.unwrap_or(true),
        })
    }

    /// Layers `flags` over the optional file at `path`, then resolves.
    pub fn from_sources(path: Option<&Path>, flags: RawConfig) -> Result<Self> {
        let file = match path {
            Some(p) => RawConfig::load(p)?,
            None => RawConfig::default(),
        };
        Self::resolve(file.overlaid(flags))
    }

    pub fn sweep_values(&self) -> Vec<f64> {
        self.values.clone().unwrap_or_else(|| self.axis.default_values())
    }

    pub fn search(&self) -> SearchSpec {
        SearchSpec {
            region: self.region,
            resolution: self.resolution,
            refine: self.refine,
        }
    }

    /// The configuration in file syntax, one `key = value` per line.
    pub fn to_lines(&self) -> Vec<String> {
        let a = &self.array;
        let s = &self.scene;
        let list = |items: Vec<&str>| format!("{:?}", items.join(","));
        let floats = |v: &[f64]| format!("[{}]", v.iter().map(|x| fmt_f64(*x)).collect::<Vec<_>>().join(", "));
        let r = &self.region;
        let mut lines = vec![
            format!("N = {}", a.n_elements()),
            format!("delta = {}", fmt_f64(a.spacing())),
            format!("v = {}", fmt_f64(a.speed())),
            format!("Ts = {}", fmt_f64(a.symbol_duration())),
            format!("L = {}", a.n_symbols()),
            format!("lambda = {}", fmt_f64(s.wavelength())),
            format!("x = {}", fmt_f64(s.target_x())),
            format!("y = {}", fmt_f64(s.target_y())),
            format!("b_re = {}", fmt_f64(s.reflection().re)),
            format!("b_im = {}", fmt_f64(s.reflection().im)),
            format!("P0_dbm = {}", fmt_f64(watts_to_dbm(s.tx_power()))),
            format!("sigma2_dbm = {}", fmt_f64(watts_to_dbm(s.noise_power()))),
            format!("scheme = {}", list(self.schemes.iter().map(|s| s.as_str()).collect())),
            format!(
                "arch = {}",
                list(self.architectures.iter().map(|a| a.as_str()).collect())
            ),
            format!("axis = {:?}", self.axis.as_str()),
            format!("values = {}", floats(&self.sweep_values())),
            format!("seed = {}", self.seed),
        ];
        if let Some(out) = &self.out {
            lines.push(format!("out = {:?}", out.display().to_string()));
        }
        lines.extend([
            format!("trials = {}", self.trials),
            format!("realizations = {}", self.realizations),
            format!("region = {}", floats(&[r.x_min, r.x_max, r.y_min, r.y_max])),
            format!("resolution = {}", fmt_f64(self.resolution)),
            format!("refine = {}", self.refine),
        ]);
        lines
    }
}

/// Rayleigh distances of the fixed (`N delta`) and extended (`L T_s v`) apertures.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Diagnostics {
    pub array_size: f64,
    pub platform_size: f64,
    pub rayleigh_fixed: f64,
    pub rayleigh_extended: Option<f64>,
}

pub fn diagnostics(cfg: &ExperimentConfig) -> Result<Diagnostics> {
    let lambda = cfg.scene.wavelength();
    let array_size = geometry::array_size(&cfg.array);
    let platform_size = geometry::platform_size(&cfg.array);
    Ok(Diagnostics {
        array_size,
        platform_size,
        rayleigh_fixed: geometry::rayleigh_distance(array_size, lambda)?,
        rayleigh_extended: geometry::rayleigh_distance(platform_size, lambda).ok(),
    })
}

fn write_preamble<W: Write>(w: &mut W, command: &str, cfg: &ExperimentConfig, extra: &[(&str, String)]) -> Result<()> {
    writeln!(w, "# {} {}", env!("CARGO_PKG_NAME"), env!("CARGO_PKG_VERSION"))?;
    writeln!(w, "# command = {command:?}")?;
    for line in cfg.to_lines() {
        writeln!(w, "# {line}")?;
    }
    let d = diagnostics(cfg)?;
    writeln!(w, "# rayleigh_fixed_m = {}", fmt_f64(d.rayleigh_fixed))?;
    if let Some(r) = d.rayleigh_extended {
        writeln!(w, "# rayleigh_extended_m = {}", fmt_f64(r))?;
    }
    for (k, v) in extra {
        writeln!(w, "# {k} = {v}")?;
    }
    Ok(())
}

/// Writes to `path`, or to standard output when `path` is `None`.
pub fn open_output(path: Option<&Path>) -> Result<Box<dyn Write>> {
    Ok(match path {
        Some(p) => {
            let file = fs::File::create(p).map_err(|e| io::Error::new(e.kind(), format!("{}: {e}", p.display())))?;
            Box::new(io::BufWriter::new(file))
        }
        None => Box::new(io::BufWriter::new(io::stdout())),
    })
}

/// CRB quantities of one sweep row.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RowValues {
    pub crb_m2: f64,
    pub rmse_lb_m: f64,
    pub alpha: f64,
    pub g_xx: f64,
    pub g_yy: f64,
    /// Mean and standard deviation over isotropic moving-array realizations.
    pub realizations: Option<(f64, f64)>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepRow {
    pub axis_value: f64,
    pub architecture: Architecture,
    pub scheme: Scheme,
    pub outcome: std::result::Result<RowValues, String>,
}

fn apply_axis(axis: SweepAxis, value: f64, array: &ArrayConfig, scene: &Scene) -> Result<(ArrayConfig, Scene)> {
    let count = || -> Result<usize> {
        if value >= 1.0 && value.fract() == 0.0 && value <= u32::MAX as f64 {
            Ok(value as usize)
        } else {
            Err(Error::Config(format!(
                "values: {axis} sweep needs positive integers, got {value}"
            )))
        }
    };
    match axis {
        SweepAxis::Power => {
            if !value.is_finite() {
                return Err(Error::Config(format!("values: power must be finite, got {value}")));
            }
            Ok((*array, (*scene).with_tx_power(dbm_to_watts(value))?))
        }
        SweepAxis::Symbols => Ok(((*array).with_symbols(count()?)?, *scene)),
        SweepAxis::Antennas => Ok(((*array).with_elements(count()?)?, *scene)),
    }
}

fn row_values(
    arch: Architecture,
    scheme: Scheme,
    array: &ArrayConfig,
    scene: &Scene,
    seed: u64,
    realizations: usize,
) -> Result<RowValues> {
    let report = crb::crb(arch, scheme, array, scene, seed)?;
    let spread = if arch == Architecture::Moving && scheme == Scheme::Isotropic {
        let mut values = vec![report.crb_position];
        for r in 1..realizations {
            let s = rng::child_seed(seed, r as u64);
            values.push(crb::crb(arch, scheme, array, scene, s)?.crb_position);
        }
        let n = values.len() as f64;
        let mean = values.iter().sum::<f64>() / n;
        let var = if values.len() > 1 {
            values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (n - 1.0)
        } else {
            0.0
        };
        Some((mean, var.sqrt()))
    } else {
        None
    };
    Ok(RowValues {
        crb_m2: report.crb_position,
        rmse_lb_m: report.rmse_lower_bound(),
        alpha: report.gterms.alpha,
        g_xx: report.gterms.g_xx,
        g_yy: report.gterms.g_yy,
        realizations: spread,
    })
}

/// One row per (value, architecture, scheme), in that nesting order.
/// Failing rows carry their error instead of aborting the sweep.
pub fn run_crb_sweep(cfg: &ExperimentConfig) -> Result<Vec<SweepRow>> {
    let values = cfg.sweep_values();
    let scenes = values
        .iter()
        .map(|&v| apply_axis(cfg.axis, v, &cfg.array, &cfg.scene))
        .collect::<Result<Vec<_>>>()?;
    let mut rows = Vec::new();
    for (&value, (array, scene)) in values.iter().zip(&scenes) {
        for &arch in &cfg.architectures {
            for &scheme in &cfg.schemes {
                let outcome =
                    row_values(arch, scheme, array, scene, cfg.seed, cfg.realizations).map_err(|e| e.to_string());
                rows.push(SweepRow {
                    axis_value: value,
                    architecture: arch,
                    scheme,
                    outcome,
                });
            }
        }
    }
    Ok(rows)
}

pub fn write_sweep_csv<W: Write>(mut w: W, cfg: &ExperimentConfig, rows: &[SweepRow]) -> Result<()> {
    write_preamble(&mut w, "crb-sweep", cfg, &[])?;
    let mut out = csv::Writer::from_writer(w);
    out.write_record([
        "axis_value",
        "architecture",
        "scheme",
        "crb_m2",
        "rmse_lb_m",
        "alpha",
        "g_xx",
        "g_yy",
        "crb_mean_m2",
        "crb_std_m2",
        "status",
    ])?;
    for row in rows {
        let mut record = vec![
            fmt_f64(row.axis_value),
            row.architecture.to_string(),
            row.scheme.to_string(),
        ];
        match &row.outcome {
            Ok(v) => {
                record.extend([v.crb_m2, v.rmse_lb_m, v.alpha, v.g_xx, v.g_yy].map(fmt_f64));
                match v.realizations {
                    Some((mean, std)) => record.extend([fmt_f64(mean), fmt_f64(std)]),
                    None => record.extend([String::new(), String::new()]),
                }
                record.push("ok".into());
            }
            Err(msg) => {
                record.extend(std::iter::repeat_n(String::new(), 7));
                record.push(format!("error: {msg}"));
            }
        }
        out.write_record(&record)?;
    }
    out.flush()?;
    Ok(())
}

/// Map and estimate for one architecture.
#[derive(Debug, Clone, PartialEq)]
pub struct MapOutput {
    pub architecture: Architecture,
    pub scheme: Scheme,
    pub map: LikelihoodMap,
    pub estimate: EstimateResult,
}

impl MapOutput {
    pub fn summary(&self) -> String {
        let (gx, gy) = self.map.argmax;
        let (rx, ry) = self.estimate.position;
        format!(
            "{} {}: grid argmax ({gx:.4}, {gy:.4}) m, refined estimate ({rx:.6}, {ry:.6}) m, b~ = {:.6}{:+.6}j",
            self.architecture, self.scheme, self.estimate.reflection.re, self.estimate.reflection.im
        )
    }
}

/// One seeded observation and its concentrated log-likelihood map.
pub fn run_likelihood_map(cfg: &ExperimentConfig, arch: Architecture) -> Result<MapOutput> {
    let scheme = cfg.schemes[0];
    let ws = waveform::transmission(arch, scheme, &cfg.array, &cfg.scene, cfg.seed)?;
    let layout = arch.layout(&cfg.array);
    let obs = simulate::synthesize_on(&layout, &cfg.scene, &ws, cfg.seed, Components::SignalAndNoise)?;
    let lik = estimate::Likelihood::new(&layout, cfg.scene.wavelength(), &ws, &obs)?;
    let (map, estimate) = estimate::locate(&lik, &cfg.search())?;
    Ok(MapOutput {
        architecture: arch,
        scheme,
        map,
        estimate,
    })
}

pub fn write_map_csv<W: Write>(mut w: W, cfg: &ExperimentConfig, out: &MapOutput) -> Result<()> {
    let (gx, gy) = out.map.argmax;
    let (rx, ry) = out.estimate.position;
    write_preamble(
        &mut w,
        "likelihood-map",
        cfg,
        &[
            ("map_architecture", format!("{:?}", out.architecture.as_str())),
            ("map_scheme", format!("{:?}", out.scheme.as_str())),
            ("argmax", format!("[{}, {}]", fmt_f64(gx), fmt_f64(gy))),
            ("estimate", format!("[{}, {}]", fmt_f64(rx), fmt_f64(ry))),
            (
                "b_tilde",
                format!(
                    "[{}, {}]",
                    fmt_f64(out.estimate.reflection.re),
                    fmt_f64(out.estimate.reflection.im)
                ),
            ),
        ],
    )?;
    out.map.write_csv(w)
}

/// Seeded ML trials for the first configured architecture and scheme.
pub fn run_monte_carlo(cfg: &ExperimentConfig) -> Result<MonteCarloResult> {
    let spec = MonteCarloSpec {
        architecture: cfg.architectures[0],
        scheme: cfg.schemes[0],
        trials: cfg.trials,
        seed: cfg.seed,
        search: cfg.search(),
        noiseless: false,
    };
    estimate::monte_carlo_rmse(&cfg.array, &cfg.scene, &spec)
}

/// Per-trial rows, then an `aggregate` row with the RMSE in `err_m` and a
/// `bound` row with the root of the CRB.
pub fn write_monte_carlo_csv<W: Write>(mut w: W, cfg: &ExperimentConfig, result: &MonteCarloResult) -> Result<()> {
    write_preamble(
        &mut w,
        "monte-carlo",
        cfg,
        &[
            ("mc_architecture", format!("{:?}", cfg.architectures[0].as_str())),
            ("mc_scheme", format!("{:?}", cfg.schemes[0].as_str())),
        ],
    )?;
    let mut out = csv::Writer::from_writer(w);
    out.write_record(["trial", "seed", "x_hat", "y_hat", "err_m"])?;
    for t in &result.trials {
        out.write_record([
            t.trial.to_string(),
            t.seed.to_string(),
            fmt_f64(t.x_hat),
            fmt_f64(t.y_hat),
            fmt_f64(t.error),
        ])?;
    }
    let seed = cfg.seed.to_string();
    out.write_record(["aggregate", seed.as_str(), "", "", fmt_f64(result.rmse).as_str()])?;
    out.write_record(["bound", seed.as_str(), "", "", fmt_f64(result.crb_rmse).as_str()])?;
    out.flush()?;
    Ok(())
}

/// Ratio of the moving-array and extended-array SEM bounds at one range.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RatioPoint {
    pub distance_over_platform: f64,
    pub x: f64,
    pub crb_moving: f64,
    pub crb_extended: f64,
    pub ratio: f64,
}

pub const RATIO_MULTIPLES: [f64; 7] = [1.0, 3.0, 10.0, 30.0, 100.0, 300.0, 1000.0];

/// SEM bound ratio at a target on the track's perpendicular bisector, at
/// ranges that are multiples of the platform size.
pub fn ratio_check(cfg: &ExperimentConfig, multiples: &[f64]) -> Result<Vec<RatioPoint>> {
    let size = geometry::platform_size(&cfg.array);
    if !(size > 0.0) {
        return Err(Error::Config("ratio check needs a moving platform (v > 0)".into()));
    }
    multiples
        .iter()
        .map(|&m| {
            let scene = cfg.scene.with_target(m * size, size / 2.0)?;
            let crb_moving = crb::crb(Architecture::Moving, Scheme::Sem, &cfg.array, &scene, cfg.seed)?.crb_position;
            let crb_extended =
                crb::crb(Architecture::Extended, Scheme::Sem, &cfg.array, &scene, cfg.seed)?.crb_position;
            Ok(RatioPoint {
                distance_over_platform: m,
                x: m * size,
                crb_moving,
                crb_extended,
                ratio: crb_moving / crb_extended,
            })
        })
        .collect()
}

pub fn write_ratio_csv<W: Write>(mut w: W, cfg: &ExperimentConfig, points: &[RatioPoint]) -> Result<()> {
    let n = cfg.array.n_elements() as f64;
    let l = cfg.array.n_symbols() as f64;
    let square = approx::asymptotic_ratio(&cfg.array);
    let linear = l * l / (4.0 * n);
    write_preamble(
        &mut w,
        "ratio-check",
        cfg,
        &[
            ("ratio_l2_over_4n2", fmt_f64(square)),
            ("ratio_l2_over_4n", fmt_f64(linear)),
        ],
    )?;
    let mut out = csv::Writer::from_writer(w);
    out.write_record([
        "distance_over_platform",
        "x_m",
        "crb_moving_m2",
        "crb_extended_m2",
        "ratio",
        "ratio_over_l2_4n2",
        "ratio_over_l2_4n",
    ])?;
    for p in points {
        out.write_record(
            [
                p.distance_over_platform,
                p.x,
                p.crb_moving,
                p.crb_extended,
                p.ratio,
                p.ratio / square,
                p.ratio / linear,
            ]
            .map(fmt_f64),
        )?;
    }
    out.flush()?;
    Ok(())
}

/// Process exit status for an error: 2 configuration, 3 numerical
/// degeneracy, 4 I/O.
pub fn exit_code(err: &Error) -> i32 {
    match err {
        Error::Config(_) | Error::Contract(_) | Error::Domain(_) | Error::Index { .. } => 2,
        Error::Singular { .. } | Error::Degenerate(_) => 3,
        Error::Io(_) | Error::Csv(_) => 4,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn empty_file_gives_reference_scenario() {
        let cfg = ExperimentConfig::resolve(RawConfig::parse("").unwrap()).unwrap();
        assert_eq!(cfg.array, ArrayConfig::default_scenario());
        assert_eq!(cfg.scene, Scene::default_scenario());
        assert_eq!(cfg.architectures, Architecture::ALL.to_vec());
        assert_eq!(cfg.schemes, vec![Scheme::Sem]);
    }

    #[test]
    fn power_in_dbm() {
        let cfg = ExperimentConfig::resolve(RawConfig::parse("P0_dbm = 40").unwrap()).unwrap();
        assert!((cfg.scene.tx_power() - 10.0).abs() < 1e-12);
    }

    #[test]
    fn invalid_and_unknown_keys_are_rejected() {
        let err = ExperimentConfig::resolve(RawConfig::parse("N = 0").unwrap()).unwrap_err();
        assert!(matches!(err, Error::Config(ref m) if m.contains('N')), "{err}");
        let err = RawConfig::parse("delta = 0.02\nspeed = 3").unwrap_err();
        let msg = err.to_string();
        assert!(msg.contains("speed") && msg.contains("line 2"), "{msg}");
        assert!(RawConfig::parse("N = \"sixteen\"").is_err());
        assert!(ExperimentConfig::resolve(RawConfig::parse("arch = \"circular\"").unwrap()).is_err());
        assert_eq!(exit_code(&err), 2);
    }

    #[test]
    fn flags_override_file() {
        let file = RawConfig::parse("N = 8\nL = 64\nseed = 3").unwrap();
        let flags = RawConfig {
            l: Some(32),
            ..RawConfig::default()
        };
        let cfg = ExperimentConfig::resolve(file.overlaid(flags)).unwrap();
        assert_eq!(cfg.array.n_elements(), 8);
        assert_eq!(cfg.array.n_symbols(), 32);
        assert_eq!(cfg.seed, 3);
    }

    #[test]
    fn preamble_round_trips() {
        let raw =
            RawConfig::parse("N = 4\nL = 50\nx = 3.3\nscheme = \"all\"\narch = \"moving,extended\"\nvalues = [1, 2]")
                .unwrap();
        let cfg = ExperimentConfig::resolve(raw).unwrap();
        let again = ExperimentConfig::resolve(RawConfig::parse(&cfg.to_lines().join("\n")).unwrap()).unwrap();
        assert_eq!(cfg, again);
    }

    #[test]
    fn sweep_rows_and_errors() {
        let raw =
            RawConfig::parse("N = 4\nL = 40\naxis = \"antennas\"\nvalues = [1, 4]\nscheme = \"all\"\narch = \"fixed\"")
                .unwrap();
        let cfg = ExperimentConfig::resolve(raw).unwrap();
        let rows = run_crb_sweep(&cfg).unwrap();
        assert_eq!(rows.len(), 4);
        assert!(rows[0].outcome.is_err());
        assert!(rows[2].outcome.is_ok());
        let mut buf = Vec::new();
        write_sweep_csv(&mut buf, &cfg, &rows).unwrap();
        let text = String::from_utf8(buf).unwrap();
        assert!(text
            .lines()
            .any(|l| l.starts_with("axis_value,architecture,scheme,crb_m2,rmse_lb_m,alpha,g_xx,g_yy")));
        assert!(text.contains("error: "));
        let bad = RawConfig::parse("axis = \"symbols\"\nvalues = [10.5]").unwrap();
        assert!(run_crb_sweep(&ExperimentConfig::resolve(bad).unwrap()).is_err());
    }

    #[test]
    fn isotropic_moving_rows_carry_spread() {
        let raw = RawConfig::parse(
            "N = 4\nL = 40\nvalues = [30]\nscheme = \"isotropic\"\narch = \"moving\"\nrealizations = 4",
        )
        .unwrap();
        let rows = run_crb_sweep(&ExperimentConfig::resolve(raw).unwrap()).unwrap();
        let v = rows[0].outcome.as_ref().unwrap();
        let (mean, std) = v.realizations.unwrap();
        assert!(mean > 0.0 && std > 0.0);
    }

    #[test]
    fn diagnostics_at_reference_scenario() {
        let d = diagnostics(&ExperimentConfig::default()).unwrap();
        assert!((d.rayleigh_fixed - 6.4).abs() < 1e-12);
        assert!((d.rayleigh_extended.unwrap() - 1000.0).abs() < 1e-9);
    }
}
