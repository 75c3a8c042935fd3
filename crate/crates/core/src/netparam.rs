//! Frequency-sampled multiport network data.
//!
//! Frequencies are stored as angular frequency (rad/s) throughout; the unit
//! the data arrived in is kept only so that it can be written back out.
//! Touchstone v1 files (RI/MA/DB, scalar real reference) are supported for
//! input and output, and every sample can be converted among scattering,
//! impedance and admittance form.

use std::f64::consts::PI;
use std::fmt::Write as _;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{self, CMatrix};

/// Relative tolerance of the transpose-symmetry check on stored samples.
pub const RECIPROCITY_TOLERANCE: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum FrequencyUnit {
    Hz,
    KHz,
    MHz,
    GHz,
}

impl FrequencyUnit {
    pub fn scale(self) -> f64 {
        match self {
            FrequencyUnit::Hz => 1.0,
            FrequencyUnit::KHz => 1e3,
            FrequencyUnit::MHz => 1e6,
            FrequencyUnit::GHz => 1e9,
        }
    }

    pub fn label(self) -> &'static str {
        match self {
            FrequencyUnit::Hz => "Hz",
            FrequencyUnit::KHz => "kHz",
            FrequencyUnit::MHz => "MHz",
            FrequencyUnit::GHz => "GHz",
        }
    }

    fn parse(token: &str) -> Option<Self> {
        match token.to_ascii_uppercase().as_str() {
            "HZ" => Some(FrequencyUnit::Hz),
            "KHZ" => Some(FrequencyUnit::KHz),
            "MHZ" => Some(FrequencyUnit::MHz),
            "GHZ" => Some(FrequencyUnit::GHz),
            _ => None,
        }
    }
}

/// Strictly increasing list of positive angular frequencies.
#[derive(Debug, Clone, PartialEq)]
pub struct FrequencyGrid {
    omegas: Vec<f64>,
    // Frequencies in `unit` as they were read, kept so that writing a
    // parsed file back out reproduces the same numbers.
    values: Vec<f64>,
    unit: FrequencyUnit,
}

impl FrequencyGrid {
    pub fn from_omegas(omegas: Vec<f64>, unit: FrequencyUnit) -> Result<Self> {
        let values = omegas
            .iter()
            .map(|w| w / (2.0 * PI) / unit.scale())
            .collect();
        Self::checked(omegas, values, unit)
    }

    /// Builds a grid from frequencies expressed in `unit`.
    pub fn from_frequencies(values: Vec<f64>, unit: FrequencyUnit) -> Result<Self> {
        let omegas = values.iter().map(|f| 2.0 * PI * f * unit.scale()).collect();
        Self::checked(omegas, values, unit)
    }

    fn checked(omegas: Vec<f64>, values: Vec<f64>, unit: FrequencyUnit) -> Result<Self> {
        if omegas.is_empty() {
            return Err(Error::Grid("at least one frequency is required".into()));
        }
        for (i, w) in omegas.iter().enumerate() {
            if !w.is_finite() || *w <= 0.0 {
                return Err(Error::Grid(format!(
                    "point {i} is not a positive frequency"
                )));
            }
            if i > 0 && *w <= omegas[i - 1] {
                return Err(Error::Grid(format!(
                    "frequencies must be strictly increasing (point {i})"
                )));
            }
        }
        Ok(Self {
            omegas,
            values,
            unit,
        })
    }

    pub fn omegas(&self) -> &[f64] {
        &self.omegas
    }

    /// Frequencies in the grid's own unit.
    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn unit(&self) -> FrequencyUnit {
        self.unit
    }

    pub fn len(&self) -> usize {
        self.omegas.len()
    }

    pub fn is_empty(&self) -> bool {
        self.omegas.is_empty()
    }

    pub fn first(&self) -> f64 {
        self.omegas[0]
    }

    pub fn last(&self) -> f64 {
        self.omegas[self.omegas.len() - 1]
    }

    fn range_error(&self, omega: f64) -> Error {
        Error::OutOfRange {
            omega,
            lower: self.first(),
            upper: self.last(),
        }
    }

    /// Index `i` with `omegas[i] <= omega <= omegas[i + 1]`.
    fn interval(&self, omega: f64) -> Result<usize> {
        if !(omega >= self.first() && omega <= self.last()) {
            return Err(self.range_error(omega));
        }
        let i = self.omegas.partition_point(|w| *w <= omega);
        Ok(i.saturating_sub(1).min(self.len().saturating_sub(2)))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum ParamKind {
    Scattering,
    Impedance,
    Admittance,
}

impl ParamKind {
    pub fn letter(self) -> char {
        match self {
            ParamKind::Scattering => 'S',
            ParamKind::Impedance => 'Z',
            ParamKind::Admittance => 'Y',
        }
    }
}

/// Number format of Touchstone data pairs.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DataFormat {
    RealImag,
    MagAngle,
    DbAngle,
}

impl DataFormat {
    fn label(self) -> &'static str {
        match self {
            DataFormat::RealImag => "RI",
            DataFormat::MagAngle => "MA",
            DataFormat::DbAngle => "DB",
        }
    }

    fn decode(self, x: f64, y: f64) -> Complex64 {
        match self {
            DataFormat::RealImag => Complex64::new(x, y),
            DataFormat::MagAngle => Complex64::from_polar(x, y.to_radians()),
            DataFormat::DbAngle => Complex64::from_polar(10f64.powf(x / 20.0), y.to_radians()),
        }
    }

    fn encode(self, z: Complex64) -> (f64, f64) {
        match self {
            DataFormat::RealImag => (z.re, z.im),
            DataFormat::MagAngle => (z.norm(), z.arg().to_degrees()),
            DataFormat::DbAngle => (20.0 * z.norm().log10(), z.arg().to_degrees()),
        }
    }
}

/// Frequency-sampled `P x P` network matrices of one representation.
#[derive(Debug, Clone, PartialEq)]
pub struct MultiportNetwork {
    grid: FrequencyGrid,
    ports: usize,
    samples: Vec<CMatrix>,
    kind: ParamKind,
    reference: Vec<f64>,
}

impl MultiportNetwork {
    pub fn new(
        grid: FrequencyGrid,
        kind: ParamKind,
        reference: Vec<f64>,
        samples: Vec<CMatrix>,
    ) -> Result<Self> {
        if samples.len() != grid.len() {
            return Err(Error::Dimension {
                expected: grid.len(),
                found: samples.len(),
            });
        }
        let ports = reference.len();
        if ports == 0 {
            return Err(Error::Network("network needs at least one port".into()));
        }
        if reference.iter().any(|r| !r.is_finite() || *r <= 0.0) {
            return Err(Error::Network(
                "reference resistances must be positive".into(),
            ));
        }
        for (sample, omega) in samples.iter().zip(grid.omegas()) {
            if sample.nrows() != ports || sample.ncols() != ports {
                return Err(Error::Dimension {
                    expected: ports,
                    found: sample.nrows().max(sample.ncols()),
                });
            }
            if sample
                .iter()
                .any(|z| !z.re.is_finite() || !z.im.is_finite())
            {
                return Err(Error::Network(format!(
                    "non-finite entry at omega = {omega:.6e} rad/s"
                )));
            }
            let defect = linalg::symmetry_defect(sample);
            if defect > RECIPROCITY_TOLERANCE {
                return Err(Error::Network(format!(
                    "sample at omega = {omega:.6e} rad/s is not reciprocal \
                     (relative asymmetry {defect:.2e})"
                )));
            }
        }
        Ok(Self {
            grid,
            ports,
            samples,
            kind,
            reference,
        })
    }

    pub fn grid(&self) -> &FrequencyGrid {
        &self.grid
    }

    pub fn ports(&self) -> usize {
        self.ports
    }

    pub fn kind(&self) -> ParamKind {
        self.kind
    }

    pub fn reference(&self) -> &[f64] {
        &self.reference
    }

    pub fn samples(&self) -> &[CMatrix] {
        &self.samples
    }

    fn converted(&self, kind: ParamKind) -> Result<Self> {
        if kind == self.kind {
            return Ok(self.clone());
        }
        let samples = self
            .samples
            .iter()
            .zip(self.grid.omegas())
            .map(|(m, &omega)| convert(m, self.kind, kind, &self.reference, omega))
            .collect::<Result<Vec<_>>>()?;
        Self::new(self.grid.clone(), kind, self.reference.clone(), samples)
    }

    pub fn to_admittance(&self) -> Result<Self> {
        self.converted(ParamKind::Admittance)
    }

    pub fn to_impedance(&self) -> Result<Self> {
        self.converted(ParamKind::Impedance)
    }

    pub fn to_scattering(&self) -> Result<Self> {
        self.converted(ParamKind::Scattering)
    }

    /// Matrix at `omega`: the stored sample on grid points, otherwise
    /// entrywise cubic Hermite interpolation in omega.
    pub fn sample_at(&self, omega: f64) -> Result<CMatrix> {
        let omegas = self.grid.omegas();
        if let Ok(k) = omegas.binary_search_by(|w| w.total_cmp(&omega)) {
            return Ok(self.samples[k].clone());
        }
        let i = self.grid.interval(omega)?;
        if self.grid.len() < 2 {
            return Err(self.grid.range_error(omega));
        }
        let h = omegas[i + 1] - omegas[i];
        let t = (omega - omegas[i]) / h;
        let t2 = t * t;
        let t3 = t2 * t;
        let h00 = 2.0 * t3 - 3.0 * t2 + 1.0;
        let h10 = t3 - 2.0 * t2 + t;
        let h01 = -2.0 * t3 + 3.0 * t2;
        let h11 = t3 - t2;
        let m0 = self.node_slope(i);
        let m1 = self.node_slope(i + 1);
        Ok(&self.samples[i] * c(h00)
            + m0 * c(h10 * h)
            + &self.samples[i + 1] * c(h01)
            + m1 * c(h11 * h))
    }

    /// Three-point slope estimate at grid node `k`, exact for quadratics.
    fn node_slope(&self, k: usize) -> CMatrix {
        let w = self.grid.omegas();
        let p = &self.samples;
        let n = w.len();
        if n == 2 {
            return (&p[1] - &p[0]) * c(1.0 / (w[1] - w[0]));
        }
        let (a, b, cc, [ca, cb, ccc]) = if k == 0 {
            let h0 = w[1] - w[0];
            let h1 = w[2] - w[1];
            (
                0,
                1,
                2,
                [
                    -(2.0 * h0 + h1) / (h0 * (h0 + h1)),
                    (h0 + h1) / (h0 * h1),
                    -h0 / (h1 * (h0 + h1)),
                ],
            )
        } else if k == n - 1 {
            let h0 = w[n - 2] - w[n - 3];
            let h1 = w[n - 1] - w[n - 2];
            (
                n - 3,
                n - 2,
                n - 1,
                [
                    h1 / (h0 * (h0 + h1)),
                    -(h0 + h1) / (h0 * h1),
                    (2.0 * h1 + h0) / (h1 * (h0 + h1)),
                ],
            )
        } else {
            let h0 = w[k] - w[k - 1];
            let h1 = w[k + 1] - w[k];
            (
                k - 1,
                k,
                k + 1,
                [
                    -h1 / (h0 * (h0 + h1)),
                    (h1 - h0) / (h0 * h1),
                    h0 / (h1 * (h0 + h1)),
                ],
            )
        };
        &p[a] * c(ca) + &p[b] * c(cb) + &p[cc] * c(ccc)
    }

    /// Local grid spacing around `omega`: the smaller neighbouring interval
    /// on grid nodes, the containing interval elsewhere.
    pub fn local_spacing(&self, omega: f64) -> Result<f64> {
        let w = self.grid.omegas();
        if w.len() < 2 {
            return Err(Error::Grid("derivatives need at least two samples".into()));
        }
        if let Ok(k) = w.binary_search_by(|x| x.total_cmp(&omega)) {
            let left = if k > 0 {
                w[k] - w[k - 1]
            } else {
                f64::INFINITY
            };
            let right = if k + 1 < w.len() {
                w[k + 1] - w[k]
            } else {
                f64::INFINITY
            };
            return Ok(left.min(right));
        }
        let i = self.grid.interval(omega)?;
        Ok(w[i + 1] - w[i])
    }

    /// Central difference of the interpolant with step equal to the local
    /// grid spacing. Both stencil points must lie inside the grid.
    pub fn derivative_at(&self, omega: f64) -> Result<CMatrix> {
        let h = self.local_spacing(omega)?;
        self.derivative_with_step(omega, h)
    }

    pub fn derivative_with_step(&self, omega: f64, h: f64) -> Result<CMatrix> {
        if omega - h < self.grid.first() || omega + h > self.grid.last() {
            return Err(Error::Invalid(format!(
                "omega = {omega:.6e} rad/s needs an interior grid point for a central difference"
            )));
        }
        let up = self.sample_at(omega + h)?;
        let down = self.sample_at(omega - h)?;
        Ok((up - down) * c(0.5 / h))
    }

    /// Second derivative by a three-point stencil on the interpolant.
    pub fn second_derivative_at(&self, omega: f64) -> Result<CMatrix> {
        let h = self.local_spacing(omega)?;
        if omega - h < self.grid.first() || omega + h > self.grid.last() {
            return Err(Error::Invalid(format!(
                "omega = {omega:.6e} rad/s needs an interior grid point for a central difference"
            )));
        }
        let up = self.sample_at(omega + h)?;
        let mid = self.sample_at(omega)?;
        let down = self.sample_at(omega - h)?;
        Ok((up + down - mid * c(2.0)) * c(1.0 / (h * h)))
    }

    fn entry_label(&self, i: usize, j: usize) -> String {
        let letter = self.kind.letter();
        if self.ports > 9 {
            format!("{letter}{}_{}", i + 1, j + 1)
        } else {
            format!("{letter}{}{}", i + 1, j + 1)
        }
    }

    /// CSV with an `omega` column and real/imaginary columns per entry,
    /// rows in row-major entry order.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("omega");
        for i in 0..self.ports {
            for j in 0..self.ports {
                let label = self.entry_label(i, j);
                let _ = write!(out, ",{label}_re,{label}_im");
            }
        }
        out.push('\n');
        for (omega, m) in self.grid.omegas().iter().zip(&self.samples) {
            let _ = write!(out, "{omega:?}");
            for i in 0..self.ports {
                for j in 0..self.ports {
                    let z = m[(i, j)];
                    let _ = write!(out, ",{:?},{:?}", z.re, z.im);
                }
            }
            out.push('\n');
        }
        out
    }

    /// Serializes to Touchstone v1. All ports must share one reference.
    pub fn to_touchstone(&self, format: DataFormat) -> Result<String> {
        let r = self.reference[0];
        if self.reference.iter().any(|x| *x != r) {
            return Err(Error::Network(
                "Touchstone v1 needs a single reference resistance for all ports".into(),
            ));
        }
        let mut out = String::new();
        let _ = writeln!(out, "! {}-port network written by portq", self.ports);
        let _ = writeln!(
            out,
            "# {} {} {} R {r:?}",
            self.grid.unit().label(),
            self.kind.letter(),
            format.label()
        );
        let normalize = |z: Complex64| match self.kind {
            ParamKind::Scattering => z,
            ParamKind::Impedance => z / r,
            ParamKind::Admittance => z * r,
        };
        for (f, m) in self.grid.values().iter().zip(&self.samples) {
            let entries = touchstone_order(self.ports);
            let _ = write!(out, "{f:?}");
            for (i, j) in entries {
                // rows of three or more ports start a new line and wrap after four pairs
                if self.ports >= 3 && ((j == 0 && i > 0) || (j > 0 && j % 4 == 0)) {
                    out.push('\n');
                }
                let (x, y) = format.encode(normalize(m[(i, j)]));
                let _ = write!(out, " {x:?} {y:?}");
            }
            out.push('\n');
        }
        Ok(out)
    }
}

#[inline]
fn c(x: f64) -> Complex64 {
    Complex64::new(x, 0.0)
}

/// Entry order of Touchstone v1 records: column-major for two ports,
/// row-major otherwise.
fn touchstone_order(ports: usize) -> Vec<(usize, usize)> {
    if ports == 2 {
        vec![(0, 0), (1, 0), (0, 1), (1, 1)]
    } else {
        (0..ports)
            .flat_map(|i| (0..ports).map(move |j| (i, j)))
            .collect()
    }
}

fn sqrt_reference(reference: &[f64]) -> Vec<f64> {
    reference.iter().map(|r| r.sqrt()).collect()
}

fn scale_rows_cols(m: &CMatrix, d: &[f64]) -> CMatrix {
    CMatrix::from_fn(m.nrows(), m.ncols(), |i, j| m[(i, j)] * (d[i] * d[j]))
}

/// Converts one sample matrix between representations.
pub fn convert(
    m: &CMatrix,
    from: ParamKind,
    to: ParamKind,
    reference: &[f64],
    omega: f64,
) -> Result<CMatrix> {
    let n = m.nrows();
    let id = CMatrix::identity(n, n);
    let root = sqrt_reference(reference);
    let inv_root: Vec<f64> = root.iter().map(|x| 1.0 / x).collect();
    let out = match (from, to) {
        (a, b) if a == b => m.clone(),
        (ParamKind::Scattering, ParamKind::Impedance) => {
            // Z = F (I + S)(I - S)^-1 F with F = diag(sqrt R)
            let x = right_divide(&(&id + m), &(&id - m), omega)?;
            scale_rows_cols(&x, &root)
        }
        (ParamKind::Scattering, ParamKind::Admittance) => {
            let x = right_divide(&(&id - m), &(&id + m), omega)?;
            scale_rows_cols(&x, &inv_root)
        }
        (ParamKind::Impedance, ParamKind::Scattering) => {
            let zn = scale_rows_cols(m, &inv_root);
            right_divide(&(&zn - &id), &(&zn + &id), omega)?
        }
        (ParamKind::Admittance, ParamKind::Scattering) => {
            let yn = scale_rows_cols(m, &root);
            right_divide(&(&id - &yn), &(&id + &yn), omega)?
        }
        (ParamKind::Impedance, ParamKind::Admittance)
        | (ParamKind::Admittance, ParamKind::Impedance) => linalg::inverse(m, omega)?,
        _ => unreachable!(),
    };
    Ok(out)
}

/// `A B^-1`, computed as `(B^T \ A^T)^T`.
fn right_divide(a: &CMatrix, b: &CMatrix, omega: f64) -> Result<CMatrix> {
    Ok(linalg::solve(&b.transpose(), &a.transpose(), omega)?.transpose())
}

struct OptionLine {
    unit: FrequencyUnit,
    kind: ParamKind,
    format: DataFormat,
    reference: f64,
}

impl Default for OptionLine {
    fn default() -> Self {
        Self {
            unit: FrequencyUnit::GHz,
            kind: ParamKind::Scattering,
            format: DataFormat::MagAngle,
            reference: 50.0,
        }
    }
}

fn parse_option_line(body: &str, line: usize) -> Result<OptionLine> {
    let mut opts = OptionLine::default();
    let mut tokens = body.split_whitespace();
    let bad = |message: String| Error::Parse { line, message };
    while let Some(tok) = tokens.next() {
        let upper = tok.to_ascii_uppercase();
        if let Some(unit) = FrequencyUnit::parse(tok) {
            opts.unit = unit;
            continue;
        }
        match upper.as_str() {
            "S" => opts.kind = ParamKind::Scattering,
            "Y" => opts.kind = ParamKind::Admittance,
            "Z" => opts.kind = ParamKind::Impedance,
            "G" | "H" => {
                return Err(bad(format!("unsupported parameter type '{tok}'")));
            }
            "RI" => opts.format = DataFormat::RealImag,
            "MA" => opts.format = DataFormat::MagAngle,
            "DB" => opts.format = DataFormat::DbAngle,
            "R" => {
                let value = tokens
                    .next()
                    .ok_or_else(|| bad("option 'R' needs a value".into()))?;
                let r: f64 = value
                    .parse()
                    .map_err(|_| bad(format!("malformed reference resistance '{value}'")))?;
                if !(r.is_finite() && r > 0.0) {
                    return Err(bad(format!(
                        "reference resistance must be positive, got {r}"
                    )));
                }
                opts.reference = r;
            }
            _ => {
                return Err(bad(format!(
                    "unsupported format code '{tok}' in option line"
                )))
            }
        }
    }
    Ok(opts)
}

/// Infers the port count from the number of values on the first data line.
fn infer_ports(first_line_tokens: usize, line: usize) -> Result<usize> {
    match first_line_tokens {
        3 => Ok(1),
        9 => Ok(2),
        7 => Ok(3),
        n => Err(Error::Parse {
            line,
            message: format!("cannot infer port count from {n} values; pass it explicitly"),
        }),
    }
}

/// Parses Touchstone v1 text. `ports` is required for four or more ports
/// (it is implied by the `.sNp` extension when reading files).
pub fn parse_touchstone(text: &str, ports: Option<usize>) -> Result<MultiportNetwork> {
    let mut options: Option<OptionLine> = None;
    // (line number, value, starts a line)
    let mut tokens: Vec<(usize, f64, bool)> = Vec::new();
    let mut first_data_line: Option<(usize, usize)> = None;

    for (idx, raw) in text.lines().enumerate() {
        let line = idx + 1;
        let content = raw.split('!').next().unwrap_or("").trim();
        if content.is_empty() {
            continue;
        }
        if let Some(body) = content.strip_prefix('#') {
            if options.is_none() {
                options = Some(parse_option_line(body, line)?);
            }
            continue;
        }
        if content.starts_with('[') {
            return Err(Error::Parse {
                line,
                message: "Touchstone v2 keywords are not supported".into(),
            });
        }
        let mut count = 0;
        for (k, tok) in content.split_whitespace().enumerate() {
            let value: f64 = tok.parse().map_err(|_| Error::Parse {
                line,
                message: format!("malformed number '{tok}'"),
            })?;
            tokens.push((line, value, k == 0));
            count += 1;
        }
        if first_data_line.is_none() {
            first_data_line = Some((line, count));
        }
    }

    let opts = options.unwrap_or_default();
    let (first_line, first_count) = first_data_line.ok_or(Error::Parse {
        line: 0,
        message: "no data records".into(),
    })?;
    let ports = match ports {
        Some(0) => {
            return Err(Error::Parse {
                line: first_line,
                message: "port count must be positive".into(),
            })
        }
        Some(p) => p,
        None => infer_ports(first_count, first_line)?,
    };
    let record_len = 1 + 2 * ports * ports;
    let order = touchstone_order(ports);

    let mut freqs = Vec::new();
    let mut samples = Vec::new();
    for chunk in tokens.chunks(record_len) {
        let (line, freq, line_start) = chunk[0];
        if !line_start {
            return Err(Error::Parse {
                line,
                message: format!(
                    "wrong token count: record does not start a line (expected {record_len} values per record)"
                ),
            });
        }
        if chunk.len() != record_len {
            return Err(Error::Parse {
                line,
                message: format!(
                    "wrong token count: expected {record_len} values per record, found {}",
                    chunk.len()
                ),
            });
        }
        if ports <= 2 && chunk.iter().any(|t| t.0 != line) {
            return Err(Error::Parse {
                line,
                message: format!("wrong token count: expected {record_len} values on this line"),
            });
        }
        if let Some(prev) = freqs.last() {
            if freq <= *prev {
                return Err(Error::Parse {
                    line,
                    message: format!("frequency {freq} is not above the previous {prev}"),
                });
            }
        }
        if !(freq > 0.0 && freq.is_finite()) {
            return Err(Error::Parse {
                line,
                message: format!("frequency {freq} must be positive"),
            });
        }
        let mut m = CMatrix::zeros(ports, ports);
        for (k, &(i, j)) in order.iter().enumerate() {
            let z = opts.format.decode(chunk[1 + 2 * k].1, chunk[2 + 2 * k].1);
            m[(i, j)] = match opts.kind {
                ParamKind::Scattering => z,
                ParamKind::Impedance => z * opts.reference,
                ParamKind::Admittance => z / opts.reference,
            };
        }
        freqs.push(freq);
        samples.push(m);
    }

    let grid = FrequencyGrid::from_frequencies(freqs, opts.unit).map_err(|e| Error::Parse {
        line: first_line,
        message: e.to_string(),
    })?;
    MultiportNetwork::new(grid, opts.kind, vec![opts.reference; ports], samples)
}

/// Port count implied by a `.sNp` file name.
pub fn ports_from_extension(path: &std::path::Path) -> Option<usize> {
    let ext = path.extension()?.to_str()?.to_ascii_lowercase();
    let digits = ext.strip_prefix('s')?.strip_suffix('p')?;
    digits.parse().ok().filter(|p| *p > 0)
}

pub fn read_touchstone(path: &std::path::Path) -> Result<MultiportNetwork> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| Error::Invalid(format!("cannot read {}: {e}", path.display())))?;
    parse_touchstone(&text, ports_from_extension(path))
}
