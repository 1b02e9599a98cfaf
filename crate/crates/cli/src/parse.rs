//! Text forms of spectra, transforms, channels and index lists.

use std::path::Path;

use erasure_mmse::{
    make_dft, random_unitary, CMatrix, ChannelSpec, SamplingPattern, Spectrum, UnitaryTransform,
    C64,
};
use serde::{Deserialize, Serialize};

use crate::error::CliError;

/// A decimal or a ratio such as `2/6`.
pub fn number(field: &str, text: &str) -> Result<f64, CliError> {
    let t = text.trim();
    let parsed = match t.split_once('/') {
        Some((a, b)) => match (a.trim().parse::<f64>(), b.trim().parse::<f64>()) {
            (Ok(a), Ok(b)) if b != 0.0 => Some(a / b),
            _ => None,
        },
        None => t.parse::<f64>().ok(),
    };
    parsed.ok_or_else(|| CliError::field(field, format!("cannot parse '{t}' as a number")))
}

fn index(field: &str, text: &str) -> Result<usize, CliError> {
    text.trim()
        .parse()
        .map_err(|_| CliError::field(field, format!("cannot parse '{}' as an index", text.trim())))
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Preset {
    Explicit,
    Flat,
    Bandpass(usize),
    Geometric(f64),
}

/// `flat`, `bandpass:B`, `geometric:R`, or comma-separated eigenvalues.
pub fn spectrum(text: &str, n: Option<usize>, power: f64) -> Result<(Spectrum, Preset), CliError> {
    let need_n = || n.ok_or_else(|| CliError::field("n", "required with a spectrum preset"));
    let t = text.trim();
    let (head, arg) = t.split_once(':').map_or((t, None), |(h, a)| (h, Some(a)));
    let (spec, preset) = match (head, arg) {
        ("flat", None) => (Spectrum::flat(need_n()?, power), Preset::Flat),
        ("bandpass", Some(b)) => {
            let b = index("spectrum", b)?;
            (Spectrum::bandpass(need_n()?, b, power), Preset::Bandpass(b))
        }
        ("geometric", Some(r)) => {
            let r = number("spectrum", r)?;
            (
                Spectrum::geometric(need_n()?, r, power),
                Preset::Geometric(r),
            )
        }
        _ => {
            let values = t
                .split(',')
                .map(|v| number("spectrum", v))
                .collect::<Result<Vec<_>, _>>()?;
            if let Some(n) = n {
                if n != values.len() {
                    return Err(CliError::field(
                        "spectrum",
                        format!("{} values given but n = {n}", values.len()),
                    ));
                }
            }
            (Spectrum::new(values), Preset::Explicit)
        }
    };
    Ok((spec.map_err(|e| CliError::field("spectrum", e))?, preset))
}

#[derive(Debug, Serialize, Deserialize)]
struct MatrixFile {
    re: Vec<Vec<f64>>,
    #[serde(default)]
    im: Vec<Vec<f64>>,
}

/// `dft`, `identity`, `haar:SEED`, `counterexample` or `file:PATH`.
pub fn transform(text: &str, n: usize) -> Result<UnitaryTransform, CliError> {
    let t = text.trim();
    let u = match t.split_once(':') {
        None if t == "dft" => make_dft(n),
        None if t == "identity" => UnitaryTransform::identity(n),
        None if t == "counterexample" => {
            if n != 3 {
                return Err(CliError::field(
                    "transform",
                    format!("counterexample is 3x3, n = {n}"),
                ));
            }
            Ok(UnitaryTransform::counterexample())
        }
        Some(("haar", seed)) => {
            let seed = seed
                .trim()
                .parse::<u64>()
                .map_err(|_| CliError::field("transform", format!("bad seed '{seed}'")))?;
            random_unitary(n, seed)
        }
        Some(("file", path)) => return load_transform(Path::new(path), n),
        _ => {
            return Err(CliError::field(
                "transform",
                format!("unknown transform '{t}'"),
            ))
        }
    };
    u.map_err(|e| CliError::field("transform", e))
}

fn load_transform(path: &Path, n: usize) -> Result<UnitaryTransform, CliError> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| CliError::field("transform", format!("{}: {e}", path.display())))?;
    let file: MatrixFile = serde_json::from_str(&text)
        .map_err(|e| CliError::field("transform", format!("{}: {e}", path.display())))?;
    let square = |m: &Vec<Vec<f64>>| m.len() == n && m.iter().all(|r| r.len() == n);
    if !square(&file.re) || !(file.im.is_empty() || square(&file.im)) {
        return Err(CliError::field(
            "transform",
            format!("{} is not {n}x{n}", path.display()),
        ));
    }
    let m = CMatrix::from_fn(n, n, |i, j| {
        C64::new(file.re[i][j], file.im.get(i).map_or(0.0, |r| r[j]))
    });
    UnitaryTransform::new(m).map_err(|e| CliError::field("transform", e))
}

pub fn save_transform(u: &UnitaryTransform, path: &Path) -> Result<(), CliError> {
    let m = u.matrix();
    let rows = |f: fn(&C64) -> f64| -> Vec<Vec<f64>> {
        (0..m.nrows())
            .map(|i| (0..m.ncols()).map(|j| f(&m[(i, j)])).collect())
            .collect()
    };
    let file = MatrixFile {
        re: rows(|z| z.re),
        im: rows(|z| z.im),
    };
    let text = serde_json::to_string_pretty(&file).map_err(|e| CliError::Io(e.to_string()))?;
    std::fs::write(path, text + "\n").map_err(|e| CliError::Io(format!("{}: {e}", path.display())))
}

/// `scalar`, `bernoulli:P`, `uniform:M` or `replacement:M`.
pub fn channel(text: &str, noise_power: f64) -> Result<ChannelSpec, CliError> {
    let t = text.trim();
    let spec = match t.split_once(':') {
        None if t == "scalar" => ChannelSpec::scalar(noise_power),
        Some(("bernoulli", p)) => ChannelSpec::bernoulli(number("channel", p)?, noise_power),
        Some(("uniform", m)) => ChannelSpec::uniform(index("channel", m)?, noise_power),
        Some(("replacement", m)) => {
            ChannelSpec::with_replacement(index("channel", m)?, noise_power)
        }
        _ => return Err(CliError::field("channel", format!("unknown channel '{t}'"))),
    };
    spec.map_err(|e| CliError::field("channel", e))
}

/// Patterns separated by `;`, indices by `,`. A lone `-` is the empty pattern.
pub fn patterns(field: &str, text: &str, n: usize) -> Result<Vec<SamplingPattern>, CliError> {
    text.split(';')
        .map(|p| {
            let p = p.trim();
            let idx = if p == "-" || p.is_empty() {
                Vec::new()
            } else {
                p.split(',')
                    .map(|i| index(field, i))
                    .collect::<Result<Vec<_>, _>>()?
            };
            if let Some(&bad) = idx.iter().find(|&&i| i >= n) {
                return Err(CliError::field(
                    field,
                    format!("index {bad} out of range for n = {n}"),
                ));
            }
            SamplingPattern::subset(idx).map_err(|e| CliError::field(field, e))
        })
        .collect()
}

pub fn indices(field: &str, text: &str) -> Result<Vec<usize>, CliError> {
    text.split(',').map(|i| index(field, i)).collect()
}

/// `start:stop:step` or a comma-separated list.
pub fn grid(field: &str, text: &str) -> Result<Vec<f64>, CliError> {
    let parts: Vec<&str> = text.split(':').collect();
    if parts.len() == 3 {
        let (a, b, s) = (
            number(field, parts[0])?,
            number(field, parts[1])?,
            number(field, parts[2])?,
        );
        if s <= 0.0 || s.is_nan() || b < a {
            return Err(CliError::field(
                field,
                "need start <= stop and a positive step",
            ));
        }
        let count = ((b - a) / s + 1e-9).floor() as usize + 1;
        return Ok((0..count).map(|i| a + i as f64 * s).collect());
    }
    text.split(',').map(|v| number(field, v)).collect()
}

pub fn pattern_text(p: &SamplingPattern) -> String {
    p.indices()
        .iter()
        .map(|i| i.to_string())
        .collect::<Vec<_>>()
        .join(" ")
}
