//! Python bindings for portq.

use num_complex::Complex64;
use portq::linalg::CMatrix;
use portq::matching::{self, MatchingState};
use portq::portreduce::PortExcitation;
use portq::qcore;
use portq::scenario::{
    self, AntennaModel, DipoleDesign, Feeding, MomModel, NetworkModel, SweepSpec,
};
use pyo3::exceptions::PyValueError;
use pyo3::prelude::*;

fn err(e: portq::Error) -> PyErr {
    PyValueError::new_err(e.to_string())
}

fn to_matrix(rows: Vec<Vec<Complex64>>) -> PyResult<CMatrix> {
    let n = rows.len();
    if n == 0 || rows.iter().any(|r| r.len() != n) {
        return Err(PyValueError::new_err("expected a non-empty square matrix"));
    }
    Ok(CMatrix::from_fn(n, n, |i, j| rows[i][j]))
}

fn from_matrix(m: &CMatrix) -> Vec<Vec<Complex64>> {
    (0..m.nrows())
        .map(|i| m.row(i).iter().copied().collect())
        .collect()
}

fn excitation(v: Vec<Complex64>) -> PyResult<PortExcitation> {
    PortExcitation::from_complex(&v).map_err(err)
}

#[derive(FromPyObject)]
enum FeedingArg {
    Name(String),
    Values(Vec<Complex64>),
}

impl From<&str> for FeedingArg {
    fn from(s: &str) -> Self {
        FeedingArg::Name(s.to_string())
    }
}

impl FeedingArg {
    fn feeding(self) -> PyResult<Feeding> {
        match self {
            FeedingArg::Name(s) => s.parse().map_err(err),
            FeedingArg::Values(v) => Ok(Feeding::Custom(v)),
        }
    }
}

fn sweep_spec(span: f64, points: usize) -> PyResult<SweepSpec> {
    SweepSpec::new(span, points).map_err(err)
}

/// Series-element match: line resistances and tuning susceptances.
#[pyclass(name = "MatchingState", frozen, from_py_object)]
#[derive(Clone)]
struct PyMatchingState(MatchingState);

#[pymethods]
impl PyMatchingState {
    #[new]
    fn new(line_resistance: Vec<f64>, susceptance: Vec<f64>, omega_ref: f64) -> PyResult<Self> {
        MatchingState::new(line_resistance, susceptance, omega_ref)
            .map(Self)
            .map_err(err)
    }

    #[getter]
    fn line_resistance(&self) -> Vec<f64> {
        self.0.line_resistance().to_vec()
    }

    #[getter]
    fn susceptance(&self) -> Vec<f64> {
        self.0.susceptance_at(self.0.omega_ref())
    }

    #[getter]
    fn kinds(&self) -> Vec<&'static str> {
        self.0
            .kinds()
            .iter()
            .map(|k| match k {
                matching::ElementKind::Capacitor => "capacitor",
                matching::ElementKind::Inductor => "inductor",
            })
            .collect()
    }

    #[getter]
    fn element_values(&self) -> Vec<f64> {
        self.0.element_values()
    }

    /// TARC of the matched network driven by `v` at `omega`, given `y0` there.
    fn tarc(&self, y0: Vec<Vec<Complex64>>, v: Vec<Complex64>, omega: f64) -> PyResult<f64> {
        let waves =
            matching::waves(&to_matrix(y0)?, &self.0, omega, &excitation(v)?).map_err(err)?;
        matching::tarc(&waves).map_err(err)
    }

    fn __repr__(&self) -> String {
        format!(
            "MatchingState(line_resistance={:?}, kinds={:?})",
            self.0.line_resistance(),
            self.kinds()
        )
    }
}

/// Port quantities of a model at one frequency.
#[pyclass(name = "PortPoint", frozen, get_all)]
struct PyPortPoint {
    omega: f64,
    y0: Vec<Vec<Complex64>>,
    dy0: Vec<Vec<Complex64>>,
    q_rad: Option<f64>,
}

/// Parallel thin-wire dipole row solved with the method of moments.
#[pyclass(name = "DipoleArray", frozen)]
struct PyDipoleArray {
    model: MomModel,
    design: DipoleDesign,
}

#[pymethods]
impl PyDipoleArray {
    #[new]
    #[pyo3(signature = (count, d_over_lambda, segments=32, f0=None))]
    fn new(count: usize, d_over_lambda: f64, segments: usize, f0: Option<f64>) -> PyResult<Self> {
        let mut design = DipoleDesign {
            segments,
            ..DipoleDesign::default()
        };
        if let Some(f) = f0 {
            design.f0 = f;
        }
        let model = MomModel::new(design.row(count, d_over_lambda).map_err(err)?);
        Ok(Self { model, design })
    }

    #[getter]
    fn omega0(&self) -> f64 {
        self.design.omega0()
    }

    #[getter]
    fn port_count(&self) -> usize {
        self.model.port_count()
    }

    fn admittance(&self, omega: f64) -> PyResult<Vec<Vec<Complex64>>> {
        let (y0, _) = self.model.admittance(omega).map_err(err)?;
        Ok(from_matrix(&y0))
    }

    fn point(&self, omega: f64, v: Vec<Complex64>) -> PyResult<PyPortPoint> {
        let p = self.model.point(omega, &excitation(v)?).map_err(err)?;
        Ok(PyPortPoint {
            omega: p.omega,
            y0: from_matrix(&p.y0),
            dy0: from_matrix(&p.dy0),
            q_rad: p.q_rad_mom,
        })
    }

    /// Touchstone S parameters over `omega0 (1 +- span)`.
    #[pyo3(signature = (span=0.1, points=201))]
    fn touchstone(&self, span: f64, points: usize) -> PyResult<String> {
        scenario::export_touchstone(
            &self.model,
            self.design.omega0(),
            &sweep_spec(span, points)?,
        )
        .map_err(err)
    }

    #[pyo3(signature = (feeding, gamma_max=0.2, span=0.1, points=201))]
    fn analyze(
        &self,
        feeding: FeedingArg,
        gamma_max: f64,
        span: f64,
        points: usize,
    ) -> PyResult<PyAnalysis> {
        let v = feeding.feeding()?.excitation().map_err(err)?;
        scenario::analyze_point(
            "array",
            &self.model,
            &v,
            self.design.omega0(),
            gamma_max,
            &sweep_spec(span, points)?,
        )
        .map(PyAnalysis)
        .map_err(err)
    }
}

/// Sampled port data read from Touchstone text.
#[pyclass(name = "Network", frozen)]
struct PyNetwork(NetworkModel);

#[pymethods]
impl PyNetwork {
    #[staticmethod]
    #[pyo3(signature = (text, ports=None))]
    fn from_touchstone(text: &str, ports: Option<usize>) -> PyResult<Self> {
        NetworkModel::from_touchstone(text, ports)
            .map(Self)
            .map_err(err)
    }

    #[getter]
    fn port_count(&self) -> usize {
        self.0.port_count()
    }

    fn admittance(&self, omega: f64) -> PyResult<Vec<Vec<Complex64>>> {
        let (y0, _) = self.0.admittance(omega).map_err(err)?;
        Ok(from_matrix(&y0))
    }

    #[pyo3(signature = (feeding, f0, gamma_max=0.2, span=0.1, points=201))]
    fn analyze(
        &self,
        feeding: FeedingArg,
        f0: f64,
        gamma_max: f64,
        span: f64,
        points: usize,
    ) -> PyResult<PyAnalysis> {
        scenario::cmd_analyze(
            &self.0,
            &feeding.feeding()?,
            f0,
            gamma_max,
            &sweep_spec(span, points)?,
        )
        .map(PyAnalysis)
        .map_err(err)
    }
}

/// Result of one analysis: Q values, bandwidths and the TARC curve.
#[pyclass(name = "Analysis", frozen)]
struct PyAnalysis(scenario::Analysis);

#[pymethods]
impl PyAnalysis {
    #[getter]
    fn q_tarc(&self) -> f64 {
        self.0.report.q_tarc
    }

    #[getter]
    fn q_zm(&self) -> f64 {
        self.0.report.q_zm
    }

    #[getter]
    fn q_z(&self) -> Option<f64> {
        self.0.report.q_z
    }

    #[getter]
    fn q_rad(&self) -> Option<f64> {
        self.0.report.q_rad
    }

    #[getter]
    fn f_predicted(&self) -> f64 {
        self.0.report.f_predicted
    }

    #[getter]
    fn f_swept(&self) -> Option<f64> {
        self.0.report.f_swept
    }

    #[getter]
    fn q_fbw(&self) -> Option<f64> {
        self.0.report.q_fbw
    }

    #[getter]
    fn double_resonance(&self) -> Option<bool> {
        self.0.report.double_resonance
    }

    #[getter]
    fn notes(&self) -> Vec<String> {
        self.0.notes.clone()
    }

    #[getter]
    fn matching(&self) -> Option<PyMatchingState> {
        self.0.state.clone().map(PyMatchingState)
    }

    /// `(omega, tarc, tarc_approx)` per sweep sample.
    fn curve(&self) -> Vec<(f64, f64, f64)> {
        self.0
            .curve
            .iter()
            .map(|s| (s.omega, s.tarc, s.tarc_approx))
            .collect()
    }

    fn to_json(&self) -> PyResult<String> {
        serde_json::to_string(&self.0).map_err(|e| PyValueError::new_err(e.to_string()))
    }

    fn __repr__(&self) -> String {
        let f = match self.0.report.f_swept {
            Some(f) => format!("{f:.5}"),
            None => "None".into(),
        };
        format!(
            "Analysis(name={:?}, q_tarc={:.4}, q_zm={:.4}, f_swept={f})",
            self.0.name, self.0.report.q_tarc, self.0.report.q_zm
        )
    }
}

#[pyfunction]
fn synthesize_match(
    y0: Vec<Vec<Complex64>>,
    v: Vec<Complex64>,
    omega0: f64,
) -> PyResult<PyMatchingState> {
    matching::synthesize_match(&to_matrix(y0)?, &excitation(v)?, omega0)
        .map(PyMatchingState)
        .map_err(err)
}

#[pyfunction]
fn q_tarc(
    y0: Vec<Vec<Complex64>>,
    dy0: Vec<Vec<Complex64>>,
    matching: &PyMatchingState,
    v: Vec<Complex64>,
    omega0: f64,
) -> PyResult<f64> {
    qcore::q_tarc(
        &to_matrix(y0)?,
        &to_matrix(dy0)?,
        &matching.0,
        &excitation(v)?,
        omega0,
    )
    .map_err(err)
}

#[pyfunction]
fn q_zm(
    y0: Vec<Vec<Complex64>>,
    dy0: Vec<Vec<Complex64>>,
    v: Vec<Complex64>,
    omega0: f64,
) -> PyResult<f64> {
    qcore::q_zm(&to_matrix(y0)?, &to_matrix(dy0)?, &excitation(v)?, omega0).map_err(err)
}

#[pyfunction]
fn eta_second_derivative(
    y0: Vec<Vec<Complex64>>,
    dy0: Vec<Vec<Complex64>>,
    matching: &PyMatchingState,
    v: Vec<Complex64>,
    omega0: f64,
) -> PyResult<f64> {
    qcore::eta_second_derivative(
        &to_matrix(y0)?,
        &to_matrix(dy0)?,
        None,
        &matching.0,
        &excitation(v)?,
        omega0,
    )
    .map_err(err)
}

#[pyfunction]
#[pyo3(signature = (q, omega0, omega, eta_max=1.0))]
fn tarc_approx(q: f64, omega0: f64, omega: f64, eta_max: f64) -> f64 {
    qcore::tarc_approx(q, omega0, omega, eta_max)
}

#[pyfunction]
fn fbw_predict(q: f64, gamma_max: f64) -> PyResult<f64> {
    qcore::fbw_predict(q, gamma_max).map_err(err)
}

#[pyfunction]
fn q_fbw(fractional_bandwidth: f64, gamma_max: f64) -> PyResult<f64> {
    qcore::q_fbw(fractional_bandwidth, gamma_max).map_err(err)
}

#[pyfunction]
#[pyo3(signature = (d_over_lambda, feeding="in-phase".into(), gamma_max=0.2))]
fn dipoles2(d_over_lambda: f64, feeding: FeedingArg, gamma_max: f64) -> PyResult<PyAnalysis> {
    scenario::cmd_dipoles2(
        d_over_lambda,
        &feeding.feeding()?,
        gamma_max,
        &SweepSpec::default(),
        &DipoleDesign::default(),
    )
    .map(PyAnalysis)
    .map_err(err)
}

#[pyfunction]
#[pyo3(signature = (d_over_lambda, feeding="triangle".into(), gamma_max=0.2))]
fn dipoles5(d_over_lambda: f64, feeding: FeedingArg, gamma_max: f64) -> PyResult<PyAnalysis> {
    scenario::cmd_dipoles5(
        d_over_lambda,
        &feeding.feeding()?,
        gamma_max,
        &SweepSpec::default(),
        &DipoleDesign::default(),
    )
    .map(PyAnalysis)
    .map_err(err)
}

#[pymodule]
fn portq_py(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_class::<PyMatchingState>()?;
    m.add_class::<PyPortPoint>()?;
    m.add_class::<PyDipoleArray>()?;
    m.add_class::<PyNetwork>()?;
    m.add_class::<PyAnalysis>()?;
    m.add_function(wrap_pyfunction!(synthesize_match, m)?)?;
    m.add_function(wrap_pyfunction!(q_tarc, m)?)?;
    m.add_function(wrap_pyfunction!(q_zm, m)?)?;
    m.add_function(wrap_pyfunction!(eta_second_derivative, m)?)?;
    m.add_function(wrap_pyfunction!(tarc_approx, m)?)?;
    m.add_function(wrap_pyfunction!(fbw_predict, m)?)?;
    m.add_function(wrap_pyfunction!(q_fbw, m)?)?;
    m.add_function(wrap_pyfunction!(dipoles2, m)?)?;
    m.add_function(wrap_pyfunction!(dipoles5, m)?)?;
    Ok(())
}
