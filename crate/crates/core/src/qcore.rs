//! Q-factors and bandwidth: radiation Q at basis and port level, the TARC
//! Q-factor and its second-derivative form, the port-quantity Q, the single
//! port Q, first-order TARC curves and swept bandwidth.

use nalgebra::{DMatrix, SymmetricEigen};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{BandSide, Error, Result};
use crate::linalg::{self, CMatrix, CVector};
use crate::matching::{self, MatchingState};
use crate::momwire::MoMSystem;
use crate::portreduce::PortExcitation;

/// Residual `|b|/|a|` below which a state counts as matched.
pub const MATCH_TOLERANCE: f64 = 1e-8;

/// Bisection tolerance on band edges, relative to omega0.
pub const EDGE_TOLERANCE: f64 = 1e-10;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct StoredEnergies {
    pub w_m: f64,
    pub w_e: f64,
    pub p_rad: f64,
    pub p_react: f64,
    /// Set when `W_m + W_e < 0`, i.e. the stored-energy form is not
    /// positive for this current.
    pub indefinite: bool,
}

/// Port matrix argument `W = Im(dZ/domega)` as a complex matrix.
pub fn stored_energy_matrix(dz: &CMatrix) -> CMatrix {
    linalg::imag_part(dz)
}

fn check_square(m: &CMatrix, n: usize) -> Result<()> {
    if m.nrows() != n || m.ncols() != n {
        return Err(Error::Dimension {
            expected: n,
            found: m.nrows(),
        });
    }
    Ok(())
}

/// `W_m = I^H (omega W + X) I / (8 omega)`, `W_e = I^H (omega W - X) I / (8 omega)`.
pub fn stored_energies(
    system: &MoMSystem,
    dz: &CMatrix,
    current: &CVector,
) -> Result<StoredEnergies> {
    let n = system.basis_count();
    check_square(dz, n)?;
    if current.len() != n {
        return Err(Error::Dimension {
            expected: n,
            found: current.len(),
        });
    }
    let omega = system.omega();
    let w = linalg::quadratic(&stored_energy_matrix(dz), current).re;
    let zf = linalg::quadratic(system.impedance(), current);
    let (r, x) = (zf.re, zf.im);
    let w_m = (omega * w + x) / (8.0 * omega);
    let w_e = (omega * w - x) / (8.0 * omega);
    Ok(StoredEnergies {
        w_m,
        w_e,
        p_rad: 0.5 * r,
        p_react: 0.5 * x,
        indefinite: w_m + w_e < 0.0,
    })
}

fn radiation_q(omega: f64, w: f64, g: f64, b: f64) -> Result<f64> {
    if !(g > 0.0) {
        return Err(Error::Nonphysical(format!(
            "radiated power form {g:.3e} is not positive"
        )));
    }
    Ok((0.5 * omega * w / g + 0.5 * b.abs() / g).max(0.0))
}

/// `Q_rad = 2 omega max(W_m, W_e) / P_rad` from a basis current.
pub fn q_rad_mom(system: &MoMSystem, dz: &CMatrix, current: &CVector) -> Result<f64> {
    let e = stored_energies(system, dz, current)?;
    let w = linalg::quadratic(&stored_energy_matrix(dz), current).re;
    radiation_q(system.omega(), w, 2.0 * e.p_rad, 2.0 * e.p_react)
}

/// Port-level radiation Q with `w` the reduced stored-energy matrix
/// `(Y D P)^H W (Y D P)`.
pub fn q_rad_port(y0: &CMatrix, w: &CMatrix, v: &PortExcitation, omega: f64) -> Result<f64> {
    let n = y0.nrows();
    check_square(y0, n)?;
    check_square(w, n)?;
    check_excitation(v, n)?;
    let y = linalg::quadratic(y0, v.vector());
    let wf = linalg::quadratic(w, v.vector()).re;
    radiation_q(omega, wf, y.re, y.im)
}

/// Port-level radiation Q with `w` replaced by `-Im(dy0/domega)`. This is
/// the admittance-derivative approximation; it agrees with [`q_rad_port`]
/// only near resonance and is returned unclamped, so away from resonance
/// it can be negative.
pub fn q_rad_port_from_admittance(
    y0: &CMatrix,
    dy0: &CMatrix,
    v: &PortExcitation,
    omega: f64,
) -> Result<f64> {
    let n = y0.nrows();
    check_square(dy0, n)?;
    check_excitation(v, n)?;
    let y = linalg::quadratic(y0, v.vector());
    if !(y.re > 0.0) {
        return Err(Error::Nonphysical(format!(
            "radiated power form {:.3e} is not positive",
            y.re
        )));
    }
    let w = -linalg::quadratic(&linalg::imag_part(dy0), v.vector()).re;
    Ok(0.5 * omega * w / y.re + 0.5 * y.im.abs() / y.re)
}

fn check_excitation(v: &PortExcitation, n: usize) -> Result<()> {
    if v.len() != n {
        return Err(Error::Dimension {
            expected: n,
            found: v.len(),
        });
    }
    Ok(())
}

fn diag_mul(d: &[f64], x: &CVector) -> CVector {
    CVector::from_iterator(x.len(), x.iter().zip(d).map(|(x, d)| x * *d))
}

/// Second derivative of the matching efficiency `1 - |b|^2/|a|^2` at
/// `omega0`, both terms of the closed form. `ddy0` is only required when the
/// state is not matched.
pub fn eta_second_derivative(
    y0: &CMatrix,
    dy0: &CMatrix,
    ddy0: Option<&CMatrix>,
    matching: &MatchingState,
    v: &PortExcitation,
    omega0: f64,
) -> Result<f64> {
    let n = y0.nrows();
    check_square(dy0, n)?;
    check_excitation(v, n)?;
    let waves = matching::waves(y0, matching, omega0, v)?;
    let den = waves.a.norm_squared();
    if !(den > 0.0) {
        return Err(Error::Nonphysical("incident power form is zero".into()));
    }
    let lam = matching.lambda();
    let dy = matching.loaded_admittance_derivative(dy0, omega0)?;
    let dyv = &dy * v.vector();
    let first = -0.5 * diag_mul(&lam, &dyv).norm_squared() / den;

    let residual = matching::reflection_residual(&waves);
    let ddy = match ddy0 {
        Some(m) => {
            check_square(m, n)?;
            m.clone()
        }
        None if residual <= MATCH_TOLERANCE => CMatrix::zeros(n, n),
        None => {
            return Err(Error::Invalid(
                "unmatched state needs the second admittance derivative".into(),
            ))
        }
    };
    let ddy = matching.loaded_admittance_second_derivative(&ddy, omega0)?;
    // Lambda (Lambda^-1 - Lambda Y) v = 2 Lambda b
    let tail = diag_mul(&lam, &waves.b) * Complex64::new(2.0, 0.0);
    let second = 0.5 * (ddy * v.vector()).dotc(&tail).re / den;
    Ok(first + second)
}

/// Matched-state TARC Q-factor `(omega0/2) |Lambda Y' v| / |K_i v|`.
pub fn q_tarc(
    y0: &CMatrix,
    dy0: &CMatrix,
    matching: &MatchingState,
    v: &PortExcitation,
    omega0: f64,
) -> Result<f64> {
    let n = y0.nrows();
    check_square(dy0, n)?;
    check_excitation(v, n)?;
    let waves = matching::waves(y0, matching, omega0, v)?;
    let a = waves.a.norm();
    if !(a > 0.0) {
        return Err(Error::Nonphysical("incident power form is zero".into()));
    }
    let residual = matching::reflection_residual(&waves);
    if residual > MATCH_TOLERANCE {
        return Err(Error::Unmatched { residual });
    }
    let dy = matching.loaded_admittance_derivative(dy0, omega0)?;
    let num = diag_mul(&matching.lambda(), &(dy * v.vector())).norm();
    Ok(0.5 * omega0 * num / a)
}

/// `sqrt(-omega0^2/2 * eta'')`, the derivative form of the TARC Q-factor.
pub fn q_from_eta_second_derivative(eta2: f64, omega0: f64) -> f64 {
    (-0.5 * omega0 * omega0 * eta2).max(0.0).sqrt()
}

/// Port-quantity Q:
/// `omega0 |v^H g0' v + j (v^H b0' v + |v^H b0 v| / omega0)| / (2 v^H g0 v)`.
pub fn q_zm(y0: &CMatrix, dy0: &CMatrix, v: &PortExcitation, omega0: f64) -> Result<f64> {
    let n = y0.nrows();
    check_square(dy0, n)?;
    check_excitation(v, n)?;
    let y = linalg::quadratic(y0, v.vector());
    let dy = linalg::quadratic(dy0, v.vector());
    if !(y.re > 0.0) {
        return Err(Error::Nonphysical(format!(
            "conductance form {:.3e} is not positive",
            y.re
        )));
    }
    let num = Complex64::new(dy.re, dy.im + y.im.abs() / omega0);
    Ok(omega0 * num.norm() / (2.0 * y.re))
}

/// Single-port `Q_Z = omega0 |Z'| / (2 R)` of the tuned input impedance
/// `1 / (y0 + j B_L)`.
pub fn q_z(y0: &CMatrix, dy0: &CMatrix, matching: &MatchingState, omega0: f64) -> Result<f64> {
    if y0.nrows() != 1 {
        return Err(Error::Dimension {
            expected: 1,
            found: y0.nrows(),
        });
    }
    check_square(dy0, 1)?;
    let y = matching.loaded_admittance(y0, omega0)?[(0, 0)];
    let dy = matching.loaded_admittance_derivative(dy0, omega0)?[(0, 0)];
    let z = 1.0 / y;
    let dz = -dy / (y * y);
    if !(z.re > 0.0) {
        return Err(Error::Nonphysical(
            "input resistance is not positive".into(),
        ));
    }
    Ok(omega0 * dz.norm() / (2.0 * z.re))
}

/// First-order TARC near omega0. With `eta_max = 1` this is
/// `Q |omega - omega0| / omega0`; otherwise the dissipated fraction adds
/// under the root and the mismatch term is weighted by `eta_max`.
pub fn tarc_approx(q: f64, omega0: f64, omega: f64, eta_max: f64) -> f64 {
    let delta = (omega - omega0).abs() / omega0;
    if eta_max >= 1.0 {
        return (q * delta).clamp(0.0, 1.0);
    }
    let g2 = 1.0 - eta_max + eta_max * q * q * delta * delta;
    g2.clamp(0.0, 1.0).sqrt()
}

/// `F = 2 Gamma_max / Q`.
pub fn fbw_predict(q: f64, gamma_max: f64) -> Result<f64> {
    if !(gamma_max > 0.0 && gamma_max < 1.0) {
        return Err(Error::Invalid(format!(
            "TARC limit {gamma_max} is not in (0, 1)"
        )));
    }
    if q == 0.0 {
        return Err(Error::UnboundedBandwidth);
    }
    if !(q > 0.0 && q.is_finite()) {
        return Err(Error::Invalid(format!("Q = {q} is not a positive number")));
    }
    Ok(2.0 * gamma_max / q)
}

/// `Q_FBW = 2 Gamma_max / F`.
pub fn q_fbw(fractional_bandwidth: f64, gamma_max: f64) -> Result<f64> {
    if !(fractional_bandwidth > 0.0) {
        return Err(Error::Invalid(
            "fractional bandwidth must be positive".into(),
        ));
    }
    Ok(2.0 * gamma_max / fractional_bandwidth)
}

/// TARC sampled on an increasing frequency grid, interpolated by cubic
/// Hermite segments with three-point tangents.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TarcCurve {
    omegas: Vec<f64>,
    values: Vec<f64>,
}

impl TarcCurve {
    pub fn new(omegas: Vec<f64>, values: Vec<f64>) -> Result<Self> {
        if omegas.len() != values.len() {
            return Err(Error::Dimension {
                expected: omegas.len(),
                found: values.len(),
            });
        }
        if omegas.len() < 3 {
            return Err(Error::Grid(
                "a TARC curve needs at least three samples".into(),
            ));
        }
        if omegas.iter().chain(&values).any(|x| !x.is_finite()) {
            return Err(Error::Grid("TARC samples must be finite".into()));
        }
        if omegas.windows(2).any(|w| w[1] <= w[0]) {
            return Err(Error::Grid("frequencies must increase strictly".into()));
        }
        Ok(Self { omegas, values })
    }

    pub fn omegas(&self) -> &[f64] {
        &self.omegas
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    fn slope(&self, k: usize) -> f64 {
        let w = &self.omegas;
        let p = &self.values;
        let n = w.len();
        let (i, h0, h1) = if k == 0 {
            (1, w[1] - w[0], w[2] - w[1])
        } else if k == n - 1 {
            (n - 2, w[n - 2] - w[n - 3], w[n - 1] - w[n - 2])
        } else {
            (k, w[k] - w[k - 1], w[k + 1] - w[k])
        };
        // derivative of the parabola through i-1, i, i+1 evaluated at k
        let d0 = (p[i] - p[i - 1]) / h0;
        let d1 = (p[i + 1] - p[i]) / h1;
        let curv = (d1 - d0) / (h0 + h1);
        d0 + curv * (2.0 * w[k] - w[i - 1] - w[i])
    }

    pub fn value_at(&self, omega: f64) -> Result<f64> {
        let w = &self.omegas;
        let n = w.len();
        if !(omega >= w[0] && omega <= w[n - 1]) {
            return Err(Error::OutOfRange {
                omega,
                lower: w[0],
                upper: w[n - 1],
            });
        }
        let i = match w.binary_search_by(|x| x.total_cmp(&omega)) {
            Ok(k) => return Ok(self.values[k]),
            Err(k) => k - 1,
        };
        let h = w[i + 1] - w[i];
        let t = (omega - w[i]) / h;
        let t2 = t * t;
        let t3 = t2 * t;
        Ok((2.0 * t3 - 3.0 * t2 + 1.0) * self.values[i]
            + (t3 - 2.0 * t2 + t) * h * self.slope(i)
            + (-2.0 * t3 + 3.0 * t2) * self.values[i + 1]
            + (t3 - t2) * h * self.slope(i + 1))
    }

    /// Indices of interior samples lower than both neighbours.
    pub fn local_minima(&self) -> Vec<usize> {
        let v = &self.values;
        (1..v.len() - 1)
            .filter(|&k| v[k] < v[k - 1] && v[k] <= v[k + 1])
            .collect()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BandEdges {
    pub fractional_bandwidth: f64,
    pub omega_minus: f64,
    pub omega_plus: f64,
}

/// Band edges where the interpolated TARC first reaches `gamma_max` on each
/// side of `omega0`.
pub fn fbw_sweep(curve: &TarcCurve, omega0: f64, gamma_max: f64) -> Result<BandEdges> {
    let t0 = curve.value_at(omega0)?;
    if t0 >= gamma_max {
        return Err(Error::EmptyBand {
            tarc: t0,
            limit: gamma_max,
        });
    }
    let w = curve.omegas();
    let v = curve.values();
    let f = |x: f64| curve.value_at(x).map(|t| t - gamma_max);

    let mut upper = None;
    let mut prev = omega0;
    for k in (0..w.len()).filter(|&k| w[k] > omega0) {
        if v[k] >= gamma_max {
            upper = Some(bisect(&f, prev, w[k], omega0)?);
            break;
        }
        prev = w[k];
    }
    let upper = upper.ok_or(Error::Unbracketed {
        side: BandSide::Upper,
    })?;

    let mut lower = None;
    let mut prev = omega0;
    for k in (0..w.len()).rev().filter(|&k| w[k] < omega0) {
        if v[k] >= gamma_max {
            lower = Some(bisect(&f, prev, w[k], omega0)?);
            break;
        }
        prev = w[k];
    }
    let lower = lower.ok_or(Error::Unbracketed {
        side: BandSide::Lower,
    })?;

    let inside = w.iter().filter(|&&x| x > lower && x < upper).count();
    if inside < 3 {
        return Err(Error::Undersampled { samples: inside });
    }
    Ok(BandEdges {
        fractional_bandwidth: (upper - lower) / omega0,
        omega_minus: lower,
        omega_plus: upper,
    })
}

/// Bisection between `inside` (below the limit) and `outside` (at or above).
fn bisect(f: &impl Fn(f64) -> Result<f64>, inside: f64, outside: f64, omega0: f64) -> Result<f64> {
    let (mut lo, mut hi) = (inside, outside);
    // run to machine resolution; EDGE_TOLERANCE is the guaranteed bound
    while (hi - lo).abs() > 1e-3 * EDGE_TOLERANCE * omega0 {
        let mid = 0.5 * (lo + hi);
        if mid == lo || mid == hi {
            break;
        }
        if f(mid)? >= 0.0 {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    Ok(0.5 * (lo + hi))
}

/// Two closely spaced resonances: band edges off-centre by more than a fifth
/// of the band, or more than one local TARC minimum below the limit inside
/// the band.
pub fn is_double_resonance(
    curve: &TarcCurve,
    edges: &BandEdges,
    omega0: f64,
    gamma_max: f64,
) -> bool {
    let offset = (edges.omega_plus + edges.omega_minus - 2.0 * omega0).abs() / omega0;
    if offset > 0.2 * edges.fractional_bandwidth {
        return true;
    }
    let w = curve.omegas();
    let v = curve.values();
    curve
        .local_minima()
        .into_iter()
        .filter(|&k| w[k] > edges.omega_minus && w[k] < edges.omega_plus && v[k] < gamma_max)
        .count()
        > 1
}

/// Real eigenvectors of `Re(y0)`, ordered by increasing eigenvalue.
pub fn conductance_eigenvectors(y0: &CMatrix) -> Vec<PortExcitation> {
    let g: DMatrix<f64> = y0.map(|x| x.re);
    let eig = SymmetricEigen::new(g);
    let mut order: Vec<usize> = (0..eig.eigenvalues.len()).collect();
    order.sort_by(|&a, &b| eig.eigenvalues[a].total_cmp(&eig.eigenvalues[b]));
    order
        .into_iter()
        .map(|k| {
            let col: Vec<f64> = eig.eigenvectors.column(k).iter().copied().collect();
            PortExcitation::from_real(&col).expect("finite eigenvector")
        })
        .collect()
}

/// Feeding `v` that is an eigenvector of `Lambda^2 Y'` for the match it
/// synthesizes itself, found by inverse iteration with Rayleigh shifts and
/// the match re-synthesized every step. Returns the feeding, its match and
/// the final relative eigen-residual.
pub fn matched_eigen_feeding(
    y0: &CMatrix,
    dy0: &CMatrix,
    omega0: f64,
    start: &PortExcitation,
    max_iter: usize,
) -> Result<(PortExcitation, MatchingState, f64)> {
    let n = y0.nrows();
    check_square(dy0, n)?;
    check_excitation(start, n)?;
    start.require_nonzero()?;
    let operator = |v: &PortExcitation| -> Result<(CMatrix, MatchingState)> {
        let m = matching::synthesize_match(y0, v, omega0)?;
        let dy = m.loaded_admittance_derivative(dy0, omega0)?;
        let r0 = m.line_resistance().to_vec();
        let a = CMatrix::from_fn(n, n, |i, j| dy[(i, j)] * r0[i]);
        Ok((a, m))
    };
    let residual_of = |a: &CMatrix, v: &CVector| -> (Complex64, f64) {
        let av = a * v;
        let mu = v.dotc(&av) / v.dotc(v);
        let r = (&av - v * mu).norm() / av.norm().max(f64::MIN_POSITIVE);
        (mu, r)
    };
    let mut v = start.vector().clone();
    let mut best = f64::INFINITY;
    for _ in 0..max_iter {
        let (a, _) = operator(&PortExcitation::new(v.clone())?)?;
        let (mu, r) = residual_of(&a, &v);
        best = r;
        if r < 1e-14 {
            break;
        }
        let shifted = &a - CMatrix::identity(n, n) * mu;
        let target = match shifted.lu().solve(&v) {
            Some(x) if x.iter().all(|c| c.re.is_finite() && c.im.is_finite()) => normalize_phase(x),
            _ => break,
        };
        // damp the step while the iterate has a port that cannot be matched
        let mut t = 1.0;
        let mut accepted = None;
        for _ in 0..30 {
            let trial = normalize_phase(&v + (&target - &v) * Complex64::new(t, 0.0));
            if operator(&PortExcitation::new(trial.clone())?).is_ok() {
                accepted = Some(trial);
                break;
            }
            t *= 0.5;
        }
        match accepted {
            Some(next) => v = next,
            None => break,
        }
    }
    let feeding = PortExcitation::new(v)?;
    let (a, m) = operator(&feeding)?;
    let (_, r) = residual_of(&a, feeding.vector());
    Ok((feeding, m, r.min(best)))
}

/// Eigenvector of a general complex matrix nearest to `start`, by inverse
/// iteration with Rayleigh-quotient shifts. Returns the vector, its
/// eigenvalue and the relative residual `|A x - mu x| / |A x|`.
pub fn eigenvector_near(
    a: &CMatrix,
    start: &CVector,
    max_iter: usize,
) -> (CVector, Complex64, f64) {
    let n = a.nrows();
    let rayleigh = |x: &CVector| -> (Complex64, f64) {
        let ax = a * x;
        let mu = x.dotc(&ax) / x.dotc(x);
        (mu, (&ax - x * mu).norm() / ax.norm().max(f64::MIN_POSITIVE))
    };
    let mut x = normalize_phase(start.clone());
    let (mut mu, mut r) = rayleigh(&x);
    for _ in 0..max_iter {
        if r < 1e-14 {
            break;
        }
        let shifted = a - CMatrix::identity(n, n) * mu;
        match shifted.lu().solve(&x) {
            Some(next) if next.iter().all(|c| c.re.is_finite() && c.im.is_finite()) => {
                x = normalize_phase(next);
            }
            _ => break,
        }
        (mu, r) = rayleigh(&x);
    }
    (x, mu, r)
}

/// Scales `x` so that its largest entry is real and equal to one.
fn normalize_phase(x: CVector) -> CVector {
    let pivot = x.iter().copied().fold(Complex64::new(0.0, 0.0), |best, c| {
        if c.norm() > best.norm() {
            c
        } else {
            best
        }
    });
    if pivot.norm() == 0.0 {
        return x;
    }
    x.map(|c| c / pivot)
}

/// Q values at one frequency plus the bandwidth comparison.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct QReport {
    pub omega0: f64,
    pub f0_hz: f64,
    /// Absent for sampled data when the admittance-derivative estimate is
    /// negative.
    pub q_rad: Option<f64>,
    pub q_tarc: f64,
    pub q_zm: f64,
    pub q_z: Option<f64>,
    pub gamma_max: f64,
    pub f_predicted: f64,
    pub f_swept: Option<f64>,
    pub omega_minus: Option<f64>,
    pub omega_plus: Option<f64>,
    pub f_minus_hz: Option<f64>,
    pub f_plus_hz: Option<f64>,
    pub q_fbw: Option<f64>,
    pub double_resonance: Option<bool>,
    pub eta_max: f64,
}

impl QReport {
    /// Checks the sign and range invariants of every field.
    pub fn validate(&self) -> Result<()> {
        let qs = [
            self.q_rad,
            Some(self.q_tarc),
            Some(self.q_zm),
            self.q_z,
            self.q_fbw,
        ];
        if qs.iter().flatten().any(|q| !(*q >= 0.0)) {
            return Err(Error::Nonphysical("negative or undefined Q value".into()));
        }
        if [Some(self.f_predicted), self.f_swept]
            .iter()
            .flatten()
            .any(|f| !(*f >= 0.0))
        {
            return Err(Error::Nonphysical("negative fractional bandwidth".into()));
        }
        if !(self.eta_max > 0.0 && self.eta_max <= 1.0) {
            return Err(Error::Nonphysical(format!(
                "efficiency {} is not in (0, 1]",
                self.eta_max
            )));
        }
        Ok(())
    }
}

/// Hz for an angular frequency.
pub fn hertz(omega: f64) -> f64 {
    omega / (2.0 * std::f64::consts::PI)
}
