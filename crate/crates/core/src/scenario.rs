//! End-to-end pipelines: build a model, synthesize the match at omega0,
//! evaluate every Q variant and sweep TARC for the swept bandwidth.

use std::str::FromStr;

use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::error::{Error, Result};
use crate::linalg::{self, CMatrix};
use crate::matching::{self, ElementKind, MatchingState};
use crate::momwire::{self, LossModel, WireArrayGeometry, SPEED_OF_LIGHT};
use crate::netparam::{DataFormat, FrequencyGrid, FrequencyUnit, MultiportNetwork, ParamKind};
use crate::portreduce::{PortExcitation, PortReduction};
use crate::qcore::{self, BandEdges, QReport, TarcCurve};

/// Relative step for second admittance derivatives taken from the first.
pub const SECOND_DERIVATIVE_STEP: f64 = 1e-4;

pub const DEFAULT_GAMMA_MAX: f64 = 0.2;

/// Widest span tried when a band edge falls outside the requested sweep.
pub const MAX_SPAN: f64 = 0.5;

#[derive(Debug, Clone, PartialEq)]
pub enum Feeding {
    InPhase,
    OutOfPhase,
    Triangle,
    Binomial,
    Chebyshev,
    Custom(Vec<Complex64>),
}

impl Feeding {
    pub fn values(&self) -> Vec<Complex64> {
        let real = |v: &[f64]| v.iter().map(|x| Complex64::new(*x, 0.0)).collect();
        match self {
            Feeding::InPhase => real(&[1.0, 1.0]),
            Feeding::OutOfPhase => real(&[1.0, -1.0]),
            Feeding::Triangle => real(&[1.0, 2.0, 3.0, 2.0, 1.0]),
            Feeding::Binomial => real(&[1.0, 4.0, 6.0, 4.0, 1.0]),
            Feeding::Chebyshev => real(&[1.0, 1.61, 1.94, 1.61, 1.0]),
            Feeding::Custom(v) => v.clone(),
        }
    }

    pub fn excitation(&self) -> Result<PortExcitation> {
        PortExcitation::from_complex(&self.values())
    }

    pub fn name(&self) -> &'static str {
        match self {
            Feeding::InPhase => "in-phase",
            Feeding::OutOfPhase => "out-of-phase",
            Feeding::Triangle => "triangle",
            Feeding::Binomial => "binomial",
            Feeding::Chebyshev => "chebyshev",
            Feeding::Custom(_) => "custom",
        }
    }
}

impl FromStr for Feeding {
    type Err = Error;

    /// Named feedings, or a comma separated vector whose entries are real
    /// numbers or `re+imj` / `re-imj` complex literals.
    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "in-phase" | "inphase" => return Ok(Feeding::InPhase),
            "out-of-phase" | "outofphase" => return Ok(Feeding::OutOfPhase),
            "triangle" => return Ok(Feeding::Triangle),
            "binomial" => return Ok(Feeding::Binomial),
            "chebyshev" | "dolph-chebyshev" => return Ok(Feeding::Chebyshev),
            _ => {}
        }
        let values = s
            .split(',')
            .map(parse_complex)
            .collect::<Result<Vec<_>>>()?;
        Ok(Feeding::Custom(values))
    }
}

/// Parses `1.5`, `-2j`, `0.3+0.4j`, `1e-3-2e-2j`.
pub fn parse_complex(text: &str) -> Result<Complex64> {
    let t = text.trim().replace(' ', "");
    let bad = || Error::Invalid(format!("cannot parse complex value '{text}'"));
    if t.is_empty() {
        return Err(bad());
    }
    let Some(body) = t.strip_suffix('j').or_else(|| t.strip_suffix('i')) else {
        return t
            .parse::<f64>()
            .map(|re| Complex64::new(re, 0.0))
            .map_err(|_| bad());
    };
    // split at the last sign that is not part of an exponent
    let bytes = body.as_bytes();
    let split = (1..bytes.len())
        .rev()
        .find(|&k| (bytes[k] == b'+' || bytes[k] == b'-') && !matches!(bytes[k - 1], b'e' | b'E'));
    let (re, im) = match split {
        Some(k) => (&body[..k], &body[k..]),
        None => ("0", body),
    };
    let im = match im {
        "" | "+" => "1",
        "-" => "-1",
        other => other,
    };
    let re: f64 = re.parse().map_err(|_| bad())?;
    let im: f64 = im.parse().map_err(|_| bad())?;
    Ok(Complex64::new(re, im))
}

/// Frequency span `omega0 (1 +- span)` sampled at `points` (odd) points.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SweepSpec {
    pub span: f64,
    pub points: usize,
}

impl Default for SweepSpec {
    fn default() -> Self {
        Self {
            span: 0.1,
            points: 201,
        }
    }
}

impl SweepSpec {
    pub fn new(span: f64, points: usize) -> Result<Self> {
        let s = Self { span, points };
        s.validate()?;
        Ok(s)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.span > 0.0 && self.span <= 0.5) {
            return Err(Error::Invalid(format!(
                "span {} is not in (0, 0.5]",
                self.span
            )));
        }
        if self.points < 21 || self.points % 2 == 0 {
            return Err(Error::Invalid(format!(
                "sweep needs an odd number of at least 21 points, got {}",
                self.points
            )));
        }
        Ok(())
    }

    /// Grid with omega0 exactly at the centre.
    pub fn omegas(&self, omega0: f64) -> Vec<f64> {
        let half = (self.points / 2) as i64;
        (-half..=half)
            .map(|k| {
                if k == 0 {
                    omega0
                } else {
                    omega0 * (1.0 + self.span * k as f64 / half as f64)
                }
            })
            .collect()
    }
}

/// Dipole dimensions relative to the design wavelength.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DipoleDesign {
    /// Design frequency in Hz.
    pub f0: f64,
    pub length_over_lambda: f64,
    pub radius_over_lambda: f64,
    pub segments: usize,
}

impl Default for DipoleDesign {
    fn default() -> Self {
        Self {
            f0: SPEED_OF_LIGHT,
            length_over_lambda: 0.5,
            radius_over_lambda: 1e-3,
            segments: 32,
        }
    }
}

impl DipoleDesign {
    pub fn lambda0(&self) -> f64 {
        SPEED_OF_LIGHT / self.f0
    }

    pub fn omega0(&self) -> f64 {
        2.0 * std::f64::consts::PI * self.f0
    }

    pub fn row(&self, count: usize, d_over_lambda: f64) -> Result<WireArrayGeometry> {
        let l = self.lambda0();
        WireArrayGeometry::dipole_row(
            count,
            d_over_lambda * l,
            self.length_over_lambda * l,
            self.radius_over_lambda * l,
            self.segments,
        )
    }
}

/// Port-level data at one frequency.
#[derive(Debug, Clone)]
pub struct PortPoint {
    pub omega: f64,
    pub y0: CMatrix,
    pub dy0: CMatrix,
    /// Reduced stored-energy matrix; absent for sampled data.
    pub w: Option<CMatrix>,
    /// Reduced loss matrix `(Y D P)^H R_L (Y D P)`; absent when lossless.
    pub loss: Option<CMatrix>,
    /// Basis-level radiation Q for the feeding, when a solver is behind the data.
    pub q_rad_mom: Option<f64>,
}

/// Anything that yields port admittances and their derivatives.
pub trait AntennaModel: Sync {
    fn port_count(&self) -> usize;

    /// Port admittance and reduced loss matrix for sweeps.
    fn admittance(&self, omega: f64) -> Result<(CMatrix, Option<CMatrix>)>;

    /// Everything needed for the Q-factors at `omega`.
    fn point(&self, omega: f64, v: &PortExcitation) -> Result<PortPoint>;

    fn second_derivative(&self, omega: f64) -> Result<CMatrix>;

    /// Valid frequency range, if limited.
    fn range(&self) -> Option<(f64, f64)> {
        None
    }

    fn provenance(&self) -> Provenance;
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Provenance {
    pub source: String,
    pub hash: String,
    pub derivative_method: String,
}

/// Method-of-moments model of a wire array with optional loss.
#[derive(Debug, Clone)]
pub struct MomModel {
    geometry: WireArrayGeometry,
    loss: LossModel,
    reduction: PortReduction,
}

impl MomModel {
    pub fn new(geometry: WireArrayGeometry) -> Self {
        Self::with_loss(geometry, LossModel::lossless())
    }

    pub fn with_loss(geometry: WireArrayGeometry, loss: LossModel) -> Self {
        let reduction = PortReduction::from_geometry(&geometry);
        Self {
            geometry,
            loss,
            reduction,
        }
    }

    pub fn geometry(&self) -> &WireArrayGeometry {
        &self.geometry
    }

    pub fn loss(&self) -> &LossModel {
        &self.loss
    }

    pub fn reduction(&self) -> &PortReduction {
        &self.reduction
    }

    fn reduced_loss(&self, system: &momwire::MoMSystem) -> Result<Option<CMatrix>> {
        match self.loss.matrix() {
            None => Ok(None),
            Some(r) => {
                let rc = r.map(|x| Complex64::new(x, 0.0));
                Ok(Some(self.reduction.reduce_matrix(&rc, system, &self.loss)?))
            }
        }
    }

    /// Radiation efficiency `P_rad / (P_rad + P_loss)` for a feeding.
    pub fn radiation_efficiency(&self, omega: f64, v: &PortExcitation) -> Result<f64> {
        let system = momwire::assemble(&self.geometry, omega)?;
        let current = self.reduction.excited_current(&system, &self.loss, v)?;
        let p = momwire::powers(&system, &self.loss, &current)?;
        Ok(p.radiated / (p.radiated + p.loss))
    }

    /// Sampled port network over `omegas`, as admittance parameters.
    pub fn network(&self, omegas: &[f64]) -> Result<MultiportNetwork> {
        let samples = omegas
            .par_iter()
            .map(|&w| self.admittance(w).map(|(y, _)| y))
            .collect::<Result<Vec<_>>>()?;
        let grid = FrequencyGrid::from_omegas(omegas.to_vec(), FrequencyUnit::Hz)?;
        MultiportNetwork::new(
            grid,
            ParamKind::Admittance,
            vec![50.0; self.port_count()],
            samples,
        )
    }
}

impl AntennaModel for MomModel {
    fn port_count(&self) -> usize {
        self.reduction.port_count()
    }

    fn admittance(&self, omega: f64) -> Result<(CMatrix, Option<CMatrix>)> {
        let system = momwire::assemble(&self.geometry, omega)?;
        let y0 = self.reduction.port_admittance(&system, &self.loss)?;
        Ok((y0, self.reduced_loss(&system)?))
    }

    fn point(&self, omega: f64, v: &PortExcitation) -> Result<PortPoint> {
        let system = momwire::assemble(&self.geometry, omega)?;
        let dz = momwire::impedance_derivative(&self.geometry, omega)?;
        let y0 = self.reduction.port_admittance(&system, &self.loss)?;
        let dy0 = self
            .reduction
            .port_admittance_derivative(&system, &dz, &self.loss)?;
        let w =
            self.reduction
                .reduce_matrix(&qcore::stored_energy_matrix(&dz), &system, &self.loss)?;
        let current = self.reduction.excited_current(&system, &self.loss, v)?;
        let q_rad_mom = qcore::q_rad_mom(&system, &dz, &current)?;
        Ok(PortPoint {
            omega,
            y0,
            dy0,
            w: Some(w),
            loss: self.reduced_loss(&system)?,
            q_rad_mom: Some(q_rad_mom),
        })
    }

    fn second_derivative(&self, omega: f64) -> Result<CMatrix> {
        let h = SECOND_DERIVATIVE_STEP * omega;
        let derivative = |w: f64| -> Result<CMatrix> {
            let system = momwire::assemble(&self.geometry, w)?;
            let dz = momwire::impedance_derivative(&self.geometry, w)?;
            self.reduction
                .port_admittance_derivative(&system, &dz, &self.loss)
        };
        let up = derivative(omega + h)?;
        let down = derivative(omega - h)?;
        Ok((up - down) / Complex64::new(2.0 * h, 0.0))
    }

    fn provenance(&self) -> Provenance {
        let mut hash = self.geometry.content_hash();
        if let Some(r) = self.loss.matrix() {
            let mut h = Sha256::new();
            h.update(hash.as_bytes());
            for x in r.iter() {
                h.update(x.to_le_bytes());
            }
            hash = hex(&h.finalize());
        }
        Provenance {
            source: "method of moments".into(),
            hash,
            derivative_method: format!(
                "analytic reduction of dZ/domega; dZ/domega by Richardson-extrapolated central \
                 differences with relative steps {:e} and {:e}",
                momwire::DERIVATIVE_STEP,
                0.5 * momwire::DERIVATIVE_STEP
            ),
        }
    }
}

fn hex(bytes: &[u8]) -> String {
    bytes.iter().map(|b| format!("{b:02x}")).collect()
}

/// Port data sampled on a frequency grid, e.g. from a Touchstone file.
#[derive(Debug, Clone)]
pub struct NetworkModel {
    admittance: MultiportNetwork,
    hash: String,
}

impl NetworkModel {
    pub fn new(network: &MultiportNetwork, source_bytes: &[u8]) -> Result<Self> {
        let hash = hex(&Sha256::digest(source_bytes));
        Ok(Self {
            admittance: network.to_admittance()?,
            hash,
        })
    }

    pub fn from_touchstone(text: &str, ports: Option<usize>) -> Result<Self> {
        let net = crate::netparam::parse_touchstone(text, ports)?;
        Self::new(&net, text.as_bytes())
    }

    pub fn network(&self) -> &MultiportNetwork {
        &self.admittance
    }
}

impl AntennaModel for NetworkModel {
    fn port_count(&self) -> usize {
        self.admittance.ports()
    }

    fn admittance(&self, omega: f64) -> Result<(CMatrix, Option<CMatrix>)> {
        Ok((self.admittance.sample_at(omega)?, None))
    }

    fn point(&self, omega: f64, _v: &PortExcitation) -> Result<PortPoint> {
        Ok(PortPoint {
            omega,
            y0: self.admittance.sample_at(omega)?,
            dy0: self.admittance.derivative_at(omega)?,
            w: None,
            loss: None,
            q_rad_mom: None,
        })
    }

    fn second_derivative(&self, omega: f64) -> Result<CMatrix> {
        self.admittance.second_derivative_at(omega)
    }

    fn range(&self) -> Option<(f64, f64)> {
        let g = self.admittance.grid();
        Some((g.first(), g.last()))
    }

    fn provenance(&self) -> Provenance {
        Provenance {
            source: "touchstone".into(),
            hash: self.hash.clone(),
            derivative_method: "sampled-data finite difference".into(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MatchSummary {
    pub line_resistance: Vec<f64>,
    pub susceptance: Vec<f64>,
    pub kinds: Vec<ElementKind>,
    /// Farad for capacitors, henry for inductors.
    pub element_values: Vec<f64>,
}

impl MatchSummary {
    pub fn from_state(m: &MatchingState) -> Self {
        Self {
            line_resistance: m.line_resistance().to_vec(),
            susceptance: m.susceptance_at(m.omega_ref()),
            kinds: m.kinds().to_vec(),
            element_values: m.element_values(),
        }
    }
}

/// One row of the TARC plot data.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TarcSample {
    pub omega: f64,
    pub f_hz: f64,
    pub tarc: f64,
    pub tarc_approx: f64,
    pub efficiency: f64,
}

/// Matching efficiency and total efficiency of one sweep point.
fn sweep_point(
    model: &dyn AntennaModel,
    matching: &MatchingState,
    v: &PortExcitation,
    omega: f64,
) -> Result<(f64, f64)> {
    let (y0, loss) = model.admittance(omega)?;
    let waves = matching::waves(&y0, matching, omega, v)?;
    let loss_power = match &loss {
        Some(l) => 0.5 * linalg::quadratic(l, v.vector()).re,
        None => 0.0,
    };
    let eta = matching::total_efficiency(&waves, loss_power)?;
    let tarc = matching::tarc_lossy(&waves, loss_power)?;
    Ok((tarc, eta))
}

/// TARC with the match held fixed, evaluated on `omegas` in parallel.
pub fn tarc_sweep(
    model: &dyn AntennaModel,
    matching: &MatchingState,
    v: &PortExcitation,
    omegas: &[f64],
) -> Result<Vec<(f64, f64)>> {
    omegas
        .par_iter()
        .map(|&w| sweep_point(model, matching, v, w))
        .collect()
}

/// Full analysis of one feeding.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Analysis {
    pub name: String,
    pub feeding: Vec<[f64; 2]>,
    pub provenance: Provenance,
    pub matching: MatchSummary,
    pub report: QReport,
    /// Radiation Q from the basis currents, when a solver is behind the data.
    pub q_rad_mom: Option<f64>,
    /// Radiation Q using `-Im(dy0/domega)` for the stored energy; unclamped.
    pub q_rad_admittance: f64,
    /// Second derivative of the matching efficiency at omega0.
    pub eta_second_derivative: f64,
    #[serde(skip)]
    pub curve: Vec<TarcSample>,
    pub notes: Vec<String>,
    #[serde(skip)]
    pub state: Option<MatchingState>,
}

impl Analysis {
    pub fn tarc_curve(&self) -> Result<TarcCurve> {
        TarcCurve::new(
            self.curve.iter().map(|s| s.omega).collect(),
            self.curve.iter().map(|s| s.tarc).collect(),
        )
    }

    /// CSV with columns `omega,f_hz,tarc,tarc_approx,efficiency`.
    pub fn curve_csv(&self) -> String {
        let mut out = String::from("omega,f_hz,tarc,tarc_approx,efficiency\n");
        for s in &self.curve {
            out.push_str(&format!(
                "{:?},{:?},{:?},{:?},{:?}\n",
                s.omega, s.f_hz, s.tarc, s.tarc_approx, s.efficiency
            ));
        }
        out
    }
}

/// Band edges from a sweep, refining the span around omega0 when too few
/// samples fall inside the band.
fn swept_band(
    model: &dyn AntennaModel,
    matching: &MatchingState,
    v: &PortExcitation,
    omega0: f64,
    gamma_max: f64,
    sweep: &SweepSpec,
    first: &TarcCurve,
) -> Result<(BandEdges, TarcCurve)> {
    let mut curve = first.clone();
    let mut span = sweep.span;
    for _ in 0..4 {
        span = match qcore::fbw_sweep(&curve, omega0, gamma_max) {
            Err(Error::Undersampled { .. }) => span / 4.0,
            Err(Error::Unbracketed { .. }) if span < MAX_SPAN && model.range().is_none() => {
                (2.0 * span).min(MAX_SPAN)
            }
            other => return other.map(|e| (e, curve)),
        };
        let omegas = clip(SweepSpec { span, ..*sweep }.omegas(omega0), model.range());
        let values = tarc_sweep(model, matching, v, &omegas)?;
        curve = TarcCurve::new(omegas, values.into_iter().map(|(t, _)| t).collect())?;
    }
    qcore::fbw_sweep(&curve, omega0, gamma_max).map(|e| (e, curve))
}

fn clip(omegas: Vec<f64>, range: Option<(f64, f64)>) -> Vec<f64> {
    match range {
        None => omegas,
        Some((lo, hi)) => omegas
            .into_iter()
            .filter(|w| *w >= lo && *w <= hi)
            .collect(),
    }
}

/// Synthesizes the match at `omega0`, evaluates every Q and sweeps TARC.
pub fn analyze_point(
    name: &str,
    model: &dyn AntennaModel,
    v: &PortExcitation,
    omega0: f64,
    gamma_max: f64,
    sweep: &SweepSpec,
) -> Result<Analysis> {
    sweep.validate()?;
    v.require_nonzero()?;
    if v.len() != model.port_count() {
        return Err(Error::Dimension {
            expected: model.port_count(),
            found: v.len(),
        });
    }
    let point = model.point(omega0, v)?;
    let state = matching::synthesize_match(&point.y0, v, omega0)?;
    let mut notes = Vec::new();

    let q_tarc = qcore::q_tarc(&point.y0, &point.dy0, &state, v, omega0)?;
    let q_zm = qcore::q_zm(&point.y0, &point.dy0, v, omega0)?;
    let q_z = if model.port_count() == 1 {
        Some(qcore::q_z(&point.y0, &point.dy0, &state, omega0)?)
    } else {
        None
    };
    let eta2 = qcore::eta_second_derivative(&point.y0, &point.dy0, None, &state, v, omega0)?;
    let radiating = match &point.loss {
        Some(l) => &point.y0 - l,
        None => point.y0.clone(),
    };
    let q_rad_admittance = qcore::q_rad_port_from_admittance(&radiating, &point.dy0, v, omega0)?;
    let q_rad = match &point.w {
        Some(w) => Some(qcore::q_rad_port(&radiating, w, v, omega0)?),
        None if q_rad_admittance >= 0.0 => {
            notes.push(
                "radiation Q uses -Im(dy0/domega) as the stored-energy matrix (no solver data)"
                    .into(),
            );
            Some(q_rad_admittance)
        }
        None => {
            notes.push(format!(
                "radiation Q unavailable: the admittance-derivative estimate is negative \
                 ({q_rad_admittance:.4}), the data are away from resonance"
            ));
            None
        }
    };

    let omegas = clip(sweep.omegas(omega0), model.range());
    let swept = tarc_sweep(model, &state, v, &omegas)?;
    let center = omegas
        .iter()
        .position(|w| *w == omega0)
        .map(|k| swept[k])
        .map_or_else(|| sweep_point(model, &state, v, omega0), Ok)?;
    let eta_max = center.1;
    if !(eta_max > 0.0 && eta_max <= 1.0 + 1e-12) {
        return Err(Error::Nonphysical(format!(
            "efficiency {eta_max} at omega0"
        )));
    }
    let eta_max = eta_max.min(1.0);
    let curve: Vec<TarcSample> = omegas
        .iter()
        .zip(&swept)
        .map(|(&w, &(tarc, eta))| TarcSample {
            omega: w,
            f_hz: qcore::hertz(w),
            tarc,
            tarc_approx: qcore::tarc_approx(q_tarc, omega0, w, eta_max),
            efficiency: eta,
        })
        .collect();
    let tarc_curve = TarcCurve::new(
        curve.iter().map(|s| s.omega).collect(),
        curve.iter().map(|s| s.tarc).collect(),
    )?;

    let f_predicted = qcore::fbw_predict(q_tarc, gamma_max)?;
    let (mut f_swept, mut q_fbw, mut double, mut minus, mut plus) = (None, None, None, None, None);
    match swept_band(model, &state, v, omega0, gamma_max, sweep, &tarc_curve) {
        Ok((edges, used)) => {
            f_swept = Some(edges.fractional_bandwidth);
            q_fbw = Some(qcore::q_fbw(edges.fractional_bandwidth, gamma_max)?);
            double = Some(qcore::is_double_resonance(&used, &edges, omega0, gamma_max));
            minus = Some(edges.omega_minus);
            plus = Some(edges.omega_plus);
        }
        Err(e) => notes.push(format!("swept bandwidth unavailable: {e}")),
    }

    let report = QReport {
        omega0,
        f0_hz: qcore::hertz(omega0),
        q_rad,
        q_tarc,
        q_zm,
        q_z,
        gamma_max,
        f_predicted,
        f_swept,
        omega_minus: minus,
        omega_plus: plus,
        f_minus_hz: minus.map(qcore::hertz),
        f_plus_hz: plus.map(qcore::hertz),
        q_fbw,
        double_resonance: double,
        eta_max,
    };
    report.validate()?;
    Ok(Analysis {
        name: name.to_string(),
        feeding: v.vector().iter().map(|c| [c.re, c.im]).collect(),
        provenance: model.provenance(),
        matching: MatchSummary::from_state(&state),
        report,
        q_rad_mom: point.q_rad_mom,
        q_rad_admittance,
        eta_second_derivative: eta2,
        curve,
        notes,
        state: Some(state),
    })
}

/// Two parallel half-wave dipoles spaced `d_over_lambda` wavelengths.
pub fn cmd_dipoles2(
    d_over_lambda: f64,
    feeding: &Feeding,
    gamma_max: f64,
    sweep: &SweepSpec,
    design: &DipoleDesign,
) -> Result<Analysis> {
    if !(0.05..=2.0).contains(&d_over_lambda) {
        return Err(Error::Invalid(format!(
            "spacing {d_over_lambda} wavelengths is outside [0.05, 2]"
        )));
    }
    let v = feeding.excitation()?;
    if v.len() != 2 {
        return Err(Error::Dimension {
            expected: 2,
            found: v.len(),
        });
    }
    let model = MomModel::new(design.row(2, d_over_lambda)?);
    let name = format!("dipoles2 d={d_over_lambda} {}", feeding.name());
    analyze_point(&name, &model, &v, design.omega0(), gamma_max, sweep)
}

/// Five equidistant parallel half-wave dipoles.
pub fn cmd_dipoles5(
    d_over_lambda: f64,
    feeding: &Feeding,
    gamma_max: f64,
    sweep: &SweepSpec,
    design: &DipoleDesign,
) -> Result<Analysis> {
    if !(0.05..=1.0).contains(&d_over_lambda) {
        return Err(Error::Invalid(format!(
            "spacing {d_over_lambda} wavelengths is outside [0.05, 1]"
        )));
    }
    let v = feeding.excitation()?;
    if v.len() != 5 {
        return Err(Error::Dimension {
            expected: 5,
            found: v.len(),
        });
    }
    let model = MomModel::new(design.row(5, d_over_lambda)?);
    let name = format!("dipoles5 d={d_over_lambda} {}", feeding.name());
    analyze_point(&name, &model, &v, design.omega0(), gamma_max, sweep)
}

/// Analysis of sampled port data at `f0` (Hz).
pub fn cmd_analyze(
    model: &NetworkModel,
    feeding: &Feeding,
    f0: f64,
    gamma_max: f64,
    sweep: &SweepSpec,
) -> Result<Analysis> {
    let v = feeding.excitation()?;
    let omega0 = 2.0 * std::f64::consts::PI * f0;
    analyze_point("analyze", model, &v, omega0, gamma_max, sweep)
}

/// Which array a parameter sweep varies.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ArrayKind {
    Dipoles2,
    Dipoles5,
}

impl FromStr for ArrayKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "dipoles2" => Ok(ArrayKind::Dipoles2),
            "dipoles5" => Ok(ArrayKind::Dipoles5),
            other => Err(Error::Invalid(format!("unknown array '{other}'"))),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepRow {
    pub d_over_lambda: f64,
    pub report: Option<QReport>,
    pub error: Option<String>,
}

/// Q-vs-spacing rows, evaluated concurrently and returned in input order.
pub fn cmd_sweep(
    kind: ArrayKind,
    spacings: &[f64],
    feeding: &Feeding,
    gamma_max: f64,
    sweep: &SweepSpec,
    design: &DipoleDesign,
) -> Vec<SweepRow> {
    spacings
        .par_iter()
        .map(|&d| {
            let r = match kind {
                ArrayKind::Dipoles2 => cmd_dipoles2(d, feeding, gamma_max, sweep, design),
                ArrayKind::Dipoles5 => cmd_dipoles5(d, feeding, gamma_max, sweep, design),
            };
            match r {
                Ok(a) => SweepRow {
                    d_over_lambda: d,
                    report: Some(a.report),
                    error: None,
                },
                Err(e) => SweepRow {
                    d_over_lambda: d,
                    report: None,
                    error: Some(e.to_string()),
                },
            }
        })
        .collect()
}

/// `n` evenly spaced values on `[lo, hi]`; empty when `n = 0`.
pub fn linspace(lo: f64, hi: f64, n: usize) -> Vec<f64> {
    match n {
        0 => Vec::new(),
        1 => vec![lo],
        _ => (0..n)
            .map(|k| lo + (hi - lo) * k as f64 / (n - 1) as f64)
            .collect(),
    }
}

fn opt(x: Option<f64>) -> String {
    x.map(|v| format!("{v:?}")).unwrap_or_default()
}

/// CSV with columns
/// `d_over_lambda,q_rad,q_tarc,q_zm,q_fbw,f_predicted,f_swept,double_resonance,error`.
pub fn sweep_csv(rows: &[SweepRow]) -> String {
    let mut out = String::from(
        "d_over_lambda,q_rad,q_tarc,q_zm,q_fbw,f_predicted,f_swept,double_resonance,error\n",
    );
    for row in rows {
        match &row.report {
            Some(r) => out.push_str(&format!(
                "{:?},{},{:?},{:?},{},{:?},{},{},\n",
                row.d_over_lambda,
                opt(r.q_rad),
                r.q_tarc,
                r.q_zm,
                opt(r.q_fbw),
                r.f_predicted,
                opt(r.f_swept),
                r.double_resonance
                    .map(|b| b.to_string())
                    .unwrap_or_default(),
            )),
            None => out.push_str(&format!(
                "{:?},,,,,,,,\"{}\"\n",
                row.d_over_lambda,
                row.error.clone().unwrap_or_default().replace('"', "'")
            )),
        }
    }
    out
}

/// Predicted and swept bandwidth at several TARC limits.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FbwRow {
    pub gamma_max: f64,
    pub f_predicted: f64,
    pub f_swept: Option<f64>,
    pub relative_error: Option<f64>,
}

pub fn fbw_table(analysis: &Analysis, gammas: &[f64]) -> Result<Vec<FbwRow>> {
    let curve = analysis.tarc_curve()?;
    let omega0 = analysis.report.omega0;
    gammas
        .iter()
        .map(|&g| {
            let f_predicted = qcore::fbw_predict(analysis.report.q_tarc, g)?;
            let f_swept = qcore::fbw_sweep(&curve, omega0, g)
                .ok()
                .map(|e| e.fractional_bandwidth);
            Ok(FbwRow {
                gamma_max: g,
                f_predicted,
                f_swept,
                relative_error: f_swept.map(|s| (f_predicted - s).abs() / s),
            })
        })
        .collect()
}

/// CSV with columns `gamma_max,f_predicted,f_swept,relative_error`.
pub fn fbw_csv(rows: &[FbwRow]) -> String {
    let mut out = String::from("gamma_max,f_predicted,f_swept,relative_error\n");
    for r in rows {
        out.push_str(&format!(
            "{:?},{:?},{},{}\n",
            r.gamma_max,
            r.f_predicted,
            opt(r.f_swept),
            opt(r.relative_error)
        ));
    }
    out
}

/// Touchstone (S parameters, 50 ohm, real/imaginary) of a solver model
/// sampled on the sweep grid.
pub fn export_touchstone(model: &MomModel, omega0: f64, sweep: &SweepSpec) -> Result<String> {
    let net = model.network(&sweep.omegas(omega0))?;
    net.to_scattering()?.to_touchstone(DataFormat::RealImag)
}

/// Distributed resistance per length that gives radiation efficiency
/// `target` at `omega` for the feeding `v`.
pub fn calibrate_ohmic_loss(
    geometry: &WireArrayGeometry,
    v: &PortExcitation,
    omega: f64,
    target: f64,
) -> Result<(LossModel, f64)> {
    if !(target > 0.0 && target < 1.0) {
        return Err(Error::Invalid(format!(
            "target efficiency {target} is not in (0, 1)"
        )));
    }
    let want = 1.0 / target - 1.0;
    let mut r = 1.0;
    for _ in 0..50 {
        let loss = LossModel::ohmic(geometry, r)?;
        let eta =
            MomModel::with_loss(geometry.clone(), loss.clone()).radiation_efficiency(omega, v)?;
        let have = 1.0 / eta - 1.0;
        if ((eta - target) / (1.0 - target)).abs() < 1e-12 {
            return Ok((loss, r));
        }
        r *= want / have;
    }
    Err(Error::Loss("loss calibration did not converge".into()))
}
