// SPDX-License-Identifier: Apache-2.0

//! CSV and JSON writers.
//!
//! Numbers carry 12 significant digits and absent values are written as an
//! empty CSV field or JSON `null`. Output contains no timestamps or host
//! details, so identical inputs give byte-identical files.

use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::Path;

use rand::seq::index::sample;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::Serialize;
use serde_json::{json, Value};

use super::{CriticalPoints, Format, SweepConfig, SweepError, SweepRow};

pub const ROW_COLUMNS: [&str; 11] = [
    "V", "eps", "I_E_H", "I_M_H", "J_H", "J_C", "sigma", "eta_norm", "phi_norm", "zeta", "regime",
];

pub const CRITICAL_COLUMNS: [&str; 10] = [
    "eps",
    "V",
    "V_eta0",
    "V_phi0",
    "V_etamax",
    "V_phimax",
    "eta_max_norm",
    "phi_max_norm",
    "eps_eta0",
    "eps_phi0",
];

const UNITS: [(&str, &str); 5] = [
    ("energy", "meV"),
    ("voltage", "mV"),
    ("beta", "1/meV"),
    ("rates", "Gamma (hbar = k_B = e = 1)"),
    ("normalization", "eta_norm = eta/eta_C, phi_norm = phi/phi_C"),
];

const SPOT_FRACTION: f64 = 0.01;
const SPOT_SEED: u64 = 0x5eed_0d0d;

/// 12 significant digits in scientific notation.
pub fn format_number(x: f64) -> String {
    if x.is_finite() {
        format!("{x:.11e}")
    } else {
        x.to_string()
    }
}

fn rounded(x: f64) -> Value {
    if x.is_finite() {
        // round-trips through the CSV representation so both formats agree
        json!(format_number(x).parse::<f64>().unwrap_or(x))
    } else {
        Value::Null
    }
}

fn opt(x: Option<f64>) -> Value {
    x.map(rounded).unwrap_or(Value::Null)
}

fn opt_csv(x: Option<f64>) -> String {
    x.map(format_number).unwrap_or_default()
}

fn metadata(cfg: &SweepConfig, kind: &str) -> Value {
    let config: serde_json::Map<String, Value> =
        cfg.entries().into_iter().map(|(k, v)| (k.to_string(), Value::String(v))).collect();
    let units: serde_json::Map<String, Value> =
        UNITS.iter().map(|(k, v)| (k.to_string(), Value::String(v.to_string()))).collect();
    json!({
        "tool": env!("CARGO_PKG_NAME"),
        "version": env!("CARGO_PKG_VERSION"),
        "kind": kind,
        "units": units,
        "config": config,
    })
}

fn csv_preamble<W: Write>(w: &mut W, cfg: &SweepConfig, kind: &str) -> io::Result<()> {
    writeln!(w, "# {} {} ({kind})", env!("CARGO_PKG_NAME"), env!("CARGO_PKG_VERSION"))?;
    for (k, v) in UNITS {
        writeln!(w, "# unit.{k} = {v}")?;
    }
    for (k, v) in cfg.entries() {
        writeln!(w, "# config.{k} = {v}")?;
    }
    Ok(())
}

#[derive(Serialize)]
struct JsonRow {
    #[serde(rename = "V")]
    voltage: Value,
    eps: Value,
    #[serde(rename = "I_E_H")]
    i_energy_hot: Value,
    #[serde(rename = "I_M_H")]
    i_matter_hot: Value,
    #[serde(rename = "J_H")]
    j_hot: Value,
    #[serde(rename = "J_C")]
    j_cold: Value,
    sigma: Value,
    eta_norm: Value,
    phi_norm: Value,
    zeta: Value,
    regime: &'static str,
}

impl From<&SweepRow> for JsonRow {
    fn from(r: &SweepRow) -> Self {
        Self {
            voltage: rounded(r.voltage),
            eps: rounded(r.eps),
            i_energy_hot: rounded(r.i_energy_hot),
            i_matter_hot: rounded(r.i_matter_hot),
            j_hot: rounded(r.j_hot),
            j_cold: rounded(r.j_cold),
            sigma: rounded(r.sigma),
            eta_norm: opt(r.eta_norm),
            phi_norm: opt(r.phi_norm),
            zeta: opt(r.zeta),
            regime: r.regime.tag(),
        }
    }
}

pub fn write_rows<W: Write>(w: &mut W, rows: &[SweepRow], cfg: &SweepConfig, format: Format, kind: &str) -> io::Result<()> {
    match format {
        Format::Csv => {
            csv_preamble(w, cfg, kind)?;
            writeln!(w, "{}", ROW_COLUMNS.join(","))?;
            for r in rows {
                let fields = [
                    format_number(r.voltage),
                    format_number(r.eps),
                    format_number(r.i_energy_hot),
                    format_number(r.i_matter_hot),
                    format_number(r.j_hot),
                    format_number(r.j_cold),
                    format_number(r.sigma),
                    opt_csv(r.eta_norm),
                    opt_csv(r.phi_norm),
                    opt_csv(r.zeta),
                    r.regime.tag().to_string(),
                ];
                writeln!(w, "{}", fields.join(","))?;
            }
        }
        Format::Json => {
            let rows: Vec<JsonRow> = rows.iter().map(JsonRow::from).collect();
            let doc = json!({ "metadata": metadata(cfg, kind), "rows": rows });
            serde_json::to_writer_pretty(&mut *w, &doc)?;
            writeln!(w)?;
        }
    }
    Ok(())
}

pub fn write_critical<W: Write>(
    w: &mut W,
    points: &[CriticalPoints],
    cfg: &SweepConfig,
    format: Format,
) -> io::Result<()> {
    let values = |c: &CriticalPoints| {
        [
            c.eps,
            c.voltage,
            c.v_eta0,
            c.v_phi0,
            c.v_etamax,
            c.v_phimax,
            c.eta_max_norm,
            c.phi_max_norm,
            c.eps_eta0,
            c.eps_phi0,
        ]
    };
    match format {
        Format::Csv => {
            csv_preamble(w, cfg, "critical")?;
            writeln!(w, "{}", CRITICAL_COLUMNS.join(","))?;
            for c in points {
                let fields: Vec<String> = values(c).into_iter().map(opt_csv).collect();
                writeln!(w, "{}", fields.join(","))?;
            }
        }
        Format::Json => {
            let rows: Vec<Value> = points
                .iter()
                .map(|c| {
                    let obj: serde_json::Map<String, Value> = CRITICAL_COLUMNS
                        .iter()
                        .zip(values(c))
                        .map(|(k, v)| (k.to_string(), opt(v)))
                        .collect();
                    Value::Object(obj)
                })
                .collect();
            let doc = json!({ "metadata": metadata(cfg, "critical"), "rows": rows });
            serde_json::to_writer_pretty(&mut *w, &doc)?;
            writeln!(w)?;
        }
    }
    Ok(())
}

fn check_row(r: &SweepRow, cfg: &SweepConfig) -> Result<(), String> {
    if !(r.sigma >= -1e-12) {
        return Err(format!("negative entropy production {:e}", r.sigma));
    }
    if !(r.energy_imbalance.abs() <= 1e-11 && r.matter_imbalance.abs() <= 1e-11) {
        return Err(format!(
            "currents not conserved (energy {:e}, matter {:e})",
            r.energy_imbalance, r.matter_imbalance
        ));
    }
    let heat_form = -cfg.beta_hot * r.j_hot - cfg.beta_cold * r.j_cold;
    if (heat_form - r.sigma).abs() > 1e-10 * r.sigma.abs().max(1e-6) {
        return Err(format!("sigma {:e} inconsistent with heat currents {:e}", r.sigma, heat_form));
    }
    Ok(())
}

/// Checks a deterministic 1% sample of rows (at least one).
pub fn spot_check(rows: &[SweepRow], cfg: &SweepConfig) -> Result<(), SweepError> {
    if rows.is_empty() {
        return Ok(());
    }
    let count = ((rows.len() as f64 * SPOT_FRACTION).ceil() as usize).clamp(1, rows.len());
    let mut rng = ChaCha8Rng::seed_from_u64(SPOT_SEED);
    for i in sample(&mut rng, rows.len(), count) {
        let r = &rows[i];
        check_row(r, cfg).map_err(|reason| SweepError::RowCheck {
            voltage: r.voltage,
            eps: r.eps,
            reason,
        })?;
    }
    Ok(())
}

/// Spot-checks the rows and writes them to `path`, or stdout when `None`.
pub fn emit(rows: &[SweepRow], cfg: &SweepConfig, format: Format, path: Option<&Path>, kind: &str) -> Result<(), SweepError> {
    spot_check(rows, cfg)?;
    let display = path.map(Path::to_path_buf).unwrap_or_else(|| "<stdout>".into());
    let io_err = |source| SweepError::Io {
        path: display.clone(),
        source,
    };
    match path {
        Some(p) => {
            let mut w = BufWriter::new(File::create(p).map_err(io_err)?);
            write_rows(&mut w, rows, cfg, format, kind).map_err(io_err)?;
            w.flush().map_err(io_err)
        }
        None => {
            let stdout = io::stdout();
            let mut w = BufWriter::new(stdout.lock());
            write_rows(&mut w, rows, cfg, format, kind).map_err(io_err)?;
            w.flush().map_err(io_err)
        }
    }
}
