//! Received-signal synthesis, `r_l = b a_l a_l^T s_l + z_l`.
//!
//! Noise for symbol `l` is drawn from substream `l` of the `(seed, noise)`
//! stream, so observations are reproducible symbol by symbol.

use std::io::{BufRead, Write};

use crate::channel::{self, dot_t};
use crate::error::{Error, Result};
use crate::geometry::{Architecture, ArrayConfig, Layout, Scene};
use crate::rng::{self, Domain};
use crate::waveform::{Scheme, WaveformSet};
use crate::C64;

/// Which parts of the model go into a synthesized observation.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Components {
    SignalAndNoise,
    /// Noise switched off without touching `sigma^2` (which estimators and
    /// bounds still use).
    SignalOnly,
    NoiseOnly,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Observation {
    pub per_symbol: Vec<Vec<C64>>,
    pub seed: u64,
}

impl Observation {
    /// `[r_1^T, ..., r_L^T]^T`
    pub fn stacked(&self) -> Vec<C64> {
        self.per_symbol.iter().flatten().copied().collect()
    }

    pub fn n_symbols(&self) -> usize {
        self.per_symbol.len()
    }

    pub fn dimension(&self) -> usize {
        self.per_symbol.first().map_or(0, Vec::len)
    }

    /// Multiply every sample by `c`.
    pub fn scaled(&self, c: C64) -> Self {
        Self {
            per_symbol: self
                .per_symbol
                .iter()
                .map(|r| r.iter().map(|z| z * c).collect())
                .collect(),
            seed: self.seed,
        }
    }
}

fn check(layout: &Layout, ws: &WaveformSet) -> Result<()> {
    if ws.n_symbols() != layout.n_symbols() || ws.symbols.iter().any(|s| s.len() != layout.n_elements()) {
        return Err(Error::Contract(format!(
            "waveforms ({} x {}) do not match the layout ({} x {})",
            ws.n_symbols(),
            ws.dimension(),
            layout.n_symbols(),
            layout.n_elements()
        )));
    }
    Ok(())
}

fn noiseless_symbol(positions: &[f64], scene: &Scene, s: &[C64]) -> Vec<C64> {
    let a = channel::steering_at(positions, scene.target_x(), scene.target_y(), scene.wavelength());
    let gain = scene.reflection() * dot_t(&a, s);
    a.iter().map(|z| z * gain).collect()
}

/// Observation of `scene` through `layout` with transmit waveforms `ws`.
pub fn synthesize_on(
    layout: &Layout,
    scene: &Scene,
    ws: &WaveformSet,
    seed: u64,
    components: Components,
) -> Result<Observation> {
    check(layout, ws)?;
    let m = layout.n_elements();
    // stationary layouts share one steering vector
    let shared = layout.is_stationary().then(|| {
        channel::steering_at(
            layout.positions(0),
            scene.target_x(),
            scene.target_y(),
            scene.wavelength(),
        )
    });
    let per_symbol = ws
        .symbols
        .iter()
        .enumerate()
        .map(|(l, s)| {
            let mut r = match components {
                Components::NoiseOnly => vec![C64::new(0.0, 0.0); m],
                _ => match &shared {
                    Some(a) => {
                        let gain = scene.reflection() * dot_t(a, s);
                        a.iter().map(|z| z * gain).collect()
                    }
                    None => noiseless_symbol(layout.positions(l), scene, s),
                },
            };
            if components != Components::SignalOnly {
                let mut g = rng::substream(seed, Domain::Noise, 0, l as u64);
                for z in r.iter_mut() {
                    *z += rng::cscg(&mut g, scene.noise_power());
                }
            }
            r
        })
        .collect();
    Ok(Observation { per_symbol, seed })
}

/// Noisy moving-array observation.
pub fn synthesize(cfg: &ArrayConfig, scene: &Scene, ws: &WaveformSet, seed: u64) -> Result<Observation> {
    synthesize_on(
        &Architecture::Moving.layout(cfg),
        scene,
        ws,
        seed,
        Components::SignalAndNoise,
    )
}

/// Noiseless stacked mean `mu = [(b A_1 s_1)^T, ..., (b A_L s_L)^T]^T` of the moving array.
pub fn mean_vector(cfg: &ArrayConfig, scene: &Scene, ws: &WaveformSet) -> Result<Vec<C64>> {
    mean_vector_on(&Architecture::Moving.layout(cfg), scene, ws)
}

pub fn mean_vector_on(layout: &Layout, scene: &Scene, ws: &WaveformSet) -> Result<Vec<C64>> {
    Ok(synthesize_on(layout, scene, ws, 0, Components::SignalOnly)?.stacked())
}

/// Everything needed to regenerate and re-estimate an observation.
#[derive(Debug, Clone, PartialEq)]
pub struct ObservationRecord {
    pub cfg: ArrayConfig,
    pub scene: Scene,
    pub architecture: Architecture,
    pub scheme: Scheme,
    pub observation: Observation,
}

const MAGIC: &str = "moving-array observation v1";

/// Write a record: a UTF-8 header of `key = value` lines, a blank line, then
/// `L x M` complex samples in symbol-major order as interleaved
/// little-endian f64 `(re, im)` pairs.
pub fn write_observation<W: Write>(mut w: W, rec: &ObservationRecord) -> Result<()> {
    let c = &rec.cfg;
    let s = &rec.scene;
    let o = &rec.observation;
    writeln!(w, "{MAGIC}")?;
    let fields: [(&str, String); 18] = [
        ("architecture", rec.architecture.to_string()),
        ("scheme", rec.scheme.to_string()),
        ("n_elements", c.n_elements().to_string()),
        ("spacing", format!("{:?}", c.spacing())),
        ("speed", format!("{:?}", c.speed())),
        ("symbol_duration", format!("{:?}", c.symbol_duration())),
        ("n_symbols", c.n_symbols().to_string()),
        ("target_x", format!("{:?}", s.target_x())),
        ("target_y", format!("{:?}", s.target_y())),
        ("b_re", format!("{:?}", s.reflection().re)),
        ("b_im", format!("{:?}", s.reflection().im)),
        ("noise_power", format!("{:?}", s.noise_power())),
        ("tx_power", format!("{:?}", s.tx_power())),
        ("wavelength", format!("{:?}", s.wavelength())),
        ("seed", o.seed.to_string()),
        ("rows", o.n_symbols().to_string()),
        ("cols", o.dimension().to_string()),
        ("encoding", "f64le-interleaved".to_string()),
    ];
    for (k, v) in fields {
        writeln!(w, "{k} = {v}")?;
    }
    writeln!(w)?;
    for r in &o.per_symbol {
        for z in r {
            w.write_all(&z.re.to_le_bytes())?;
            w.write_all(&z.im.to_le_bytes())?;
        }
    }
    Ok(())
}

pub fn read_observation<R: BufRead>(mut r: R) -> Result<ObservationRecord> {
    let bad = |msg: String| Error::Contract(format!("observation file: {msg}"));
    let mut line = String::new();
    r.read_line(&mut line)?;
    if line.trim_end() != MAGIC {
        return Err(bad(format!("unexpected header '{}'", line.trim_end())));
    }
    let mut header = std::collections::HashMap::new();
    loop {
        line.clear();
        if r.read_line(&mut line)? == 0 {
            return Err(bad("truncated header".into()));
        }
        let t = line.trim_end();
        if t.is_empty() {
            break;
        }
        let (k, v) = t
            .split_once(" = ")
            .ok_or_else(|| bad(format!("malformed line '{t}'")))?;
        header.insert(k.to_string(), v.to_string());
    }
    let get = |k: &str| header.get(k).ok_or_else(|| bad(format!("missing key '{k}'")));
    let num = |k: &str| -> Result<f64> { get(k)?.parse().map_err(|_| bad(format!("bad number for '{k}'"))) };
    let int = |k: &str| -> Result<u64> { get(k)?.parse().map_err(|_| bad(format!("bad integer for '{k}'"))) };

    let cfg = ArrayConfig::new(
        int("n_elements")? as usize,
        num("spacing")?,
        num("speed")?,
        num("symbol_duration")?,
        int("n_symbols")? as usize,
    )?;
    let scene = Scene::new(
        num("target_x")?,
        num("target_y")?,
        C64::new(num("b_re")?, num("b_im")?),
        num("noise_power")?,
        num("tx_power")?,
        num("wavelength")?,
    )?;
    let architecture = get("architecture")?.parse()?;
    let scheme = get("scheme")?.parse()?;
    let rows = int("rows")? as usize;
    let cols = int("cols")? as usize;
    let mut buf = [0u8; 16];
    let mut per_symbol = Vec::with_capacity(rows);
    for _ in 0..rows {
        let mut row = Vec::with_capacity(cols);
        for _ in 0..cols {
            r.read_exact(&mut buf)?;
            let re = f64::from_le_bytes(buf[..8].try_into().expect("8 bytes"));
            let im = f64::from_le_bytes(buf[8..].try_into().expect("8 bytes"));
            row.push(C64::new(re, im));
        }
        per_symbol.push(row);
    }
    Ok(ObservationRecord {
        cfg,
        scene,
        architecture,
        scheme,
        observation: Observation {
            per_symbol,
            seed: int("seed")?,
        },
    })
}
