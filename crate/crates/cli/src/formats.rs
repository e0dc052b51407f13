//! File formats: far-field CSV, indicator CSV, JSON records and PGM heatmaps.
//!
//! Numbers are written with 17 significant digits so every file reads back
//! to the exact in-memory values.

use crate::error::CliError;
use elastic_esm::elastic::{uniform_angles, ElasticFarField, Material};
use elastic_esm::esm::{IndicatorField, SamplingGrid};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use std::collections::BTreeMap;
use std::fmt::Write as _;

/// Tolerance on stored angles against the uniform grid.
const ANGLE_TOL: f64 = 1e-12;

fn num(v: f64) -> String {
    format!("{v:.16e}")
}

#[derive(Debug, Clone, PartialEq)]
pub struct FarFieldFile {
    pub material: Material,
    /// Comment metadata other than `M` and the material, in file order.
    pub meta: Vec<(String, String)>,
    pub data: ElasticFarField,
}

impl FarFieldFile {
    pub fn to_csv(&self) -> String {
        let mut s = String::new();
        let m = &self.material;
        let _ = writeln!(s, "# elastic far field");
        let _ = writeln!(s, "# M: {}", self.data.len());
        let _ = writeln!(s, "# lambda: {}", num(m.lambda));
        let _ = writeln!(s, "# mu: {}", num(m.mu));
        let _ = writeln!(s, "# omega: {}", num(m.omega));
        for (k, v) in &self.meta {
            let _ = writeln!(s, "# {k}: {v}");
        }
        let _ = writeln!(s, "# columns: j,theta,re_up,im_up,re_us,im_us");
        for (j, theta) in uniform_angles(self.data.len()).into_iter().enumerate() {
            let (p, q) = (self.data.up[j], self.data.us[j]);
            let _ = writeln!(
                s,
                "{},{},{},{},{},{}",
                j + 1,
                num(theta),
                num(p.re),
                num(p.im),
                num(q.re),
                num(q.im)
            );
        }
        s
    }

    pub fn parse(text: &str, path: &str) -> Result<Self, CliError> {
        let err = |line: usize, msg: String| CliError::Parse {
            path: path.to_string(),
            line,
            msg,
        };
        let mut header: BTreeMap<String, (usize, String)> = BTreeMap::new();
        let mut meta = Vec::new();
        let mut rows: Vec<(usize, usize, [f64; 5])> = Vec::new();
        for (i, raw) in text.lines().enumerate() {
            let line_no = i + 1;
            let line = raw.trim();
            if line.is_empty() {
                continue;
            }
            if let Some(comment) = line.strip_prefix('#') {
                if let Some((k, v)) = comment.split_once(':') {
                    let (k, v) = (k.trim().to_string(), v.trim().to_string());
                    if !matches!(k.as_str(), "M" | "lambda" | "mu" | "omega" | "columns") {
                        meta.push((k.clone(), v.clone()));
                    }
                    header.insert(k, (line_no, v));
                }
                continue;
            }
            let fields: Vec<&str> = line.split(',').map(str::trim).collect();
            if fields.len() != 6 {
                return Err(err(
                    line_no,
                    format!("expected 6 columns, found {}", fields.len()),
                ));
            }
            let j: usize = fields[0]
                .parse()
                .map_err(|_| err(line_no, format!("bad index {:?}", fields[0])))?;
            let mut vals = [0.0f64; 5];
            for (slot, f) in vals.iter_mut().zip(&fields[1..]) {
                *slot = f
                    .parse()
                    .map_err(|_| err(line_no, format!("bad number {f:?}")))?;
                if !slot.is_finite() {
                    return Err(err(line_no, format!("non-finite value {f:?}")));
                }
            }
            rows.push((line_no, j, vals));
        }
        let get = |key: &str| -> Result<(usize, f64), CliError> {
            let (line, v) = header
                .get(key)
                .ok_or_else(|| err(0, format!("missing header '# {key}: ...'")))?;
            v.parse::<f64>()
                .map(|x| (*line, x))
                .map_err(|_| err(*line, format!("bad value for {key}: {v:?}")))
        };
        let (m_line, m_val) = get("M")?;
        if m_val.fract() != 0.0 || m_val < 1.0 {
            return Err(err(m_line, format!("bad M {m_val}")));
        }
        let m = m_val as usize;
        let (l_line, lambda) = get("lambda")?;
        let (_, mu) = get("mu")?;
        let (_, omega) = get("omega")?;
        let material = Material::new(lambda, mu, omega).map_err(|e| err(l_line, e.to_string()))?;
        if rows.len() != m {
            let line = rows.last().map_or(m_line, |r| r.0);
            return Err(err(
                line,
                format!("expected {m} data rows, found {}", rows.len()),
            ));
        }
        let angles = uniform_angles(m);
        let mut up = Vec::with_capacity(m);
        let mut us = Vec::with_capacity(m);
        for (k, (line, j, v)) in rows.into_iter().enumerate() {
            if j != k + 1 {
                return Err(err(line, format!("expected index {}, found {j}", k + 1)));
            }
            if (v[0] - angles[k]).abs() > ANGLE_TOL {
                return Err(err(
                    line,
                    format!("angle {} is not 2 pi ({j} - 1) / {m}", v[0]),
                ));
            }
            up.push(Complex64::new(v[1], v[2]));
            us.push(Complex64::new(v[3], v[4]));
        }
        Ok(Self {
            material,
            meta,
            data: ElasticFarField::new(up, us)?,
        })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MaterialRecord {
    pub lambda: f64,
    pub mu: f64,
    pub omega: f64,
}

impl From<&Material> for MaterialRecord {
    fn from(m: &Material) -> Self {
        Self {
            lambda: m.lambda,
            mu: m.mu,
            omega: m.omega,
        }
    }
}

/// Sidecar of a generated far-field dataset.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DatasetMeta {
    pub shape: String,
    pub bc: String,
    pub sigma: Option<f64>,
    pub material: MaterialRecord,
    pub incidence_theta: f64,
    pub ap: [f64; 2],
    #[serde(rename = "as")]
    pub a_s: [f64; 2],
    pub m: usize,
    pub residual: f64,
    pub condition: f64,
    pub n_sources: usize,
    pub n_collocation: usize,
    pub noise: f64,
    pub seed: u64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct InversionRecord {
    pub z_star: [f64; 2],
    pub radius: f64,
    pub min_raw_norm: f64,
    pub mode: String,
    pub alpha: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LevelRecord {
    pub level: usize,
    #[serde(rename = "R")]
    pub radius: f64,
    pub z: [f64; 2],
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MultilevelRecord {
    pub levels: Vec<LevelRecord>,
    pub z_final: [f64; 2],
    #[serde(rename = "R_final")]
    pub r_final: f64,
}

/// Indicator values as a CSV matrix: one line per grid row (increasing `y`).
pub fn indicator_csv(field: &IndicatorField) -> String {
    let g = &field.grid;
    let mut s = String::new();
    let _ = writeln!(s, "# indicator");
    let _ = writeln!(
        s,
        "# grid: {},{},{},{},{}",
        num(g.x_min),
        num(g.x_max()),
        num(g.y_min),
        num(g.y_max()),
        num(g.step)
    );
    let _ = writeln!(s, "# shape: {} rows x {} columns", g.ny, g.nx);
    for row in field.values.chunks(g.nx) {
        let line: Vec<String> = row.iter().map(|v| num(*v)).collect();
        let _ = writeln!(s, "{}", line.join(","));
    }
    s
}

/// Reads back the value matrix of [`indicator_csv`].
pub fn parse_indicator_csv(text: &str, path: &str) -> Result<Vec<Vec<f64>>, CliError> {
    let mut rows = Vec::new();
    for (i, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let row = line
            .split(',')
            .map(|f| f.trim().parse::<f64>())
            .collect::<Result<Vec<_>, _>>()
            .map_err(|e| CliError::Parse {
                path: path.to_string(),
                line: i + 1,
                msg: e.to_string(),
            })?;
        rows.push(row);
    }
    Ok(rows)
}

/// 8-bit binary PGM, top row at the largest `y`, dark for small indicator values.
pub fn pgm(field: &IndicatorField) -> Vec<u8> {
    let g = &field.grid;
    let min = field.values.iter().copied().fold(f64::INFINITY, f64::min);
    let span = 1.0 - min;
    let mut out = format!("P5\n{} {}\n255\n", g.nx, g.ny).into_bytes();
    for row in (0..g.ny).rev() {
        for v in &field.values[row * g.nx..(row + 1) * g.nx] {
            let t = if span > 0.0 { (v - min) / span } else { 0.0 };
            out.push((255.0 * t).round().clamp(0.0, 255.0) as u8);
        }
    }
    out
}

/// Parses `a,b,...` into exactly `n` numbers.
pub fn parse_list(s: &str, n: usize, what: &str) -> Result<Vec<f64>, CliError> {
    let vals = s
        .split(',')
        .map(|f| f.trim().parse::<f64>())
        .collect::<Result<Vec<_>, _>>()
        .map_err(|_| CliError::Config(format!("bad {what} {s:?}")))?;
    if vals.len() != n {
        return Err(CliError::Config(format!(
            "{what} needs {n} comma-separated numbers, got {s:?}"
        )));
    }
    Ok(vals)
}

pub fn parse_grid(s: &str) -> Result<SamplingGrid, CliError> {
    let v = parse_list(s, 5, "grid")?;
    Ok(SamplingGrid::new(v[0], v[1], v[2], v[3], v[4])?)
}
