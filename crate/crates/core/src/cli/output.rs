use std::fs;
use std::io::Write;
use std::path::Path;

use serde::Serialize;

use crate::error::{BresseError, Result};
use crate::timedomain::EnergySeries;

/// 17 significant digits, enough to round-trip any `f64`.
pub fn fmt(v: f64) -> String {
    format!("{v:.16e}")
}

pub fn write_csv<I>(path: &Path, header: &[&str], rows: I) -> Result<()>
where
    I: IntoIterator<Item = Vec<String>>,
{
    let mut out = String::new();
    out.push_str(&header.join(","));
    out.push('\n');
    for row in rows {
        debug_assert_eq!(row.len(), header.len());
        out.push_str(&row.join(","));
        out.push('\n');
    }
    fs::write(path, out).map_err(|e| BresseError::io(path, e))
}

pub fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<()> {
    let mut f = fs::File::create(path).map_err(|e| BresseError::io(path, e))?;
    serde_json::to_writer_pretty(&mut f, value)
        .map_err(|e| BresseError::io(path, e.into()))?;
    writeln!(f).map_err(|e| BresseError::io(path, e))
}

pub fn write_energy_csv(path: &Path, s: &EnergySeries, stride: usize) -> Result<()> {
    // balance residual reported per sample as the worst step since the last one
    let worst: Vec<f64> = (0..s.times.len())
        .map(|i| {
            if i == 0 {
                return 0.0;
            }
            let hi = (i * stride).min(s.residuals.len());
            let lo = ((i - 1) * stride).min(hi);
            s.residuals[lo..hi].iter().copied().fold(0.0, f64::max)
        })
        .collect();
    write_csv(
        path,
        &["t", "E", "kinetic", "potential", "balance_residual"],
        (0..s.times.len()).map(|i| {
            vec![
                fmt(s.times[i]),
                fmt(s.energies[i]),
                fmt(s.kinetic[i]),
                fmt(s.potential[i]),
                fmt(worst[i]),
            ]
        }),
    )
}

/// Reads back the sampled part of an `energy.csv`.
pub fn read_energy_csv(path: &Path) -> Result<EnergySeries> {
    let text = fs::read_to_string(path).map_err(|e| BresseError::io(path, e))?;
    let bad = |message: String| BresseError::MalformedInput {
        path: path.display().to_string(),
        message,
    };
    let mut lines = text.lines();
    let header = lines.next().ok_or_else(|| bad("empty file".into()))?;
    let cols: Vec<&str> = header.split(',').collect();
    let find = |name: &str| {
        cols.iter()
            .position(|c| c.trim() == name)
            .ok_or_else(|| bad(format!("missing column `{name}`")))
    };
    let (it, ie, ik, ip) = (find("t")?, find("E")?, find("kinetic")?, find("potential")?);
    let mut s = EnergySeries {
        times: vec![],
        energies: vec![],
        kinetic: vec![],
        potential: vec![],
        residuals: vec![],
        initial_domain_norm: f64::NAN,
    };
    for (n, line) in lines.enumerate() {
        if line.trim().is_empty() {
            continue;
        }
        let fields: Vec<&str> = line.split(',').collect();
        let get = |i: usize| -> Result<f64> {
            fields
                .get(i)
                .and_then(|f| f.trim().parse::<f64>().ok())
                .ok_or_else(|| bad(format!("row {}: bad number in column {}", n + 2, i + 1)))
        };
        s.times.push(get(it)?);
        s.energies.push(get(ie)?);
        s.kinetic.push(get(ik)?);
        s.potential.push(get(ip)?);
    }
    if s.times.windows(2).any(|w| !(w[1] > w[0])) {
        return Err(bad("times are not strictly increasing".into()));
    }
    Ok(s)
}
