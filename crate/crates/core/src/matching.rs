//! Feeding environment: real line resistances with one shunt tuning element
//! per port, the incident/reflected power waves they define, and TARC.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{CMatrix, CVector, J};
use crate::portreduce::PortExcitation;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ElementKind {
    Capacitor,
    Inductor,
}

/// Line resistances `R0` and shunt susceptances `B_L` fixed at `omega_ref`.
#[derive(Debug, Clone, PartialEq)]
pub struct MatchingState {
    line_resistance: Vec<f64>,
    susceptance: Vec<f64>,
    kinds: Vec<ElementKind>,
    omega_ref: f64,
}

impl MatchingState {
    /// Element kinds follow the sign of `B_L`: nonnegative is a capacitor.
    pub fn new(line_resistance: Vec<f64>, susceptance: Vec<f64>, omega_ref: f64) -> Result<Self> {
        if line_resistance.len() != susceptance.len() {
            return Err(Error::Dimension {
                expected: line_resistance.len(),
                found: susceptance.len(),
            });
        }
        if !(omega_ref > 0.0 && omega_ref.is_finite()) {
            return Err(Error::Invalid(
                "reference frequency must be positive".into(),
            ));
        }
        for (p, r) in line_resistance.iter().enumerate() {
            if !(*r > 0.0 && r.is_finite()) {
                return Err(Error::Invalid(format!(
                    "port {p}: line resistance must be positive"
                )));
            }
        }
        if susceptance.iter().any(|b| !b.is_finite()) {
            return Err(Error::Invalid("tuning susceptances must be finite".into()));
        }
        let kinds = susceptance
            .iter()
            .map(|b| {
                if *b >= 0.0 {
                    ElementKind::Capacitor
                } else {
                    ElementKind::Inductor
                }
            })
            .collect();
        Ok(Self {
            line_resistance,
            susceptance,
            kinds,
            omega_ref,
        })
    }

    /// Plain reference lines with no tuning elements.
    pub fn unloaded(line_resistance: Vec<f64>, omega_ref: f64) -> Result<Self> {
        let n = line_resistance.len();
        Self::new(line_resistance, vec![0.0; n], omega_ref)
    }

    pub fn port_count(&self) -> usize {
        self.line_resistance.len()
    }

    pub fn line_resistance(&self) -> &[f64] {
        &self.line_resistance
    }

    pub fn kinds(&self) -> &[ElementKind] {
        &self.kinds
    }

    pub fn omega_ref(&self) -> f64 {
        self.omega_ref
    }

    /// Capacitance (F) or inductance (H) of each tuning element; an
    /// inductor with zero susceptance cannot occur, a zero capacitor is 0 F.
    pub fn element_values(&self) -> Vec<f64> {
        self.susceptance
            .iter()
            .zip(&self.kinds)
            .map(|(b, kind)| match kind {
                ElementKind::Capacitor => b / self.omega_ref,
                ElementKind::Inductor => -1.0 / (self.omega_ref * b),
            })
            .collect()
    }

    /// `B_L(omega)`: `omega C` for capacitors, `-1 / (omega L)` for inductors.
    pub fn susceptance_at(&self, omega: f64) -> Vec<f64> {
        let ratio = omega / self.omega_ref;
        self.susceptance
            .iter()
            .zip(&self.kinds)
            .map(|(b, kind)| match kind {
                ElementKind::Capacitor => b * ratio,
                ElementKind::Inductor => b / ratio,
            })
            .collect()
    }

    pub fn susceptance_derivative_at(&self, omega: f64) -> Vec<f64> {
        self.susceptance
            .iter()
            .zip(&self.kinds)
            .map(|(b, kind)| match kind {
                ElementKind::Capacitor => b / self.omega_ref,
                ElementKind::Inductor => -b * self.omega_ref / (omega * omega),
            })
            .collect()
    }

    pub fn susceptance_second_derivative_at(&self, omega: f64) -> Vec<f64> {
        self.susceptance
            .iter()
            .zip(&self.kinds)
            .map(|(b, kind)| match kind {
                ElementKind::Capacitor => 0.0,
                ElementKind::Inductor => 2.0 * b * self.omega_ref / (omega * omega * omega),
            })
            .collect()
    }

    fn check(&self, n: usize) -> Result<()> {
        if self.port_count() != n {
            return Err(Error::Dimension {
                expected: self.port_count(),
                found: n,
            });
        }
        Ok(())
    }

    fn add_diagonal(m: &CMatrix, values: &[f64]) -> CMatrix {
        let mut out = m.clone();
        for (p, b) in values.iter().enumerate() {
            out[(p, p)] += J * *b;
        }
        out
    }

    /// `Y = y0 + j B_L(omega)`.
    pub fn loaded_admittance(&self, y0: &CMatrix, omega: f64) -> Result<CMatrix> {
        self.check(y0.nrows())?;
        Ok(Self::add_diagonal(y0, &self.susceptance_at(omega)))
    }

    /// `Y' = y0' + j B_L'(omega)`.
    pub fn loaded_admittance_derivative(&self, dy0: &CMatrix, omega: f64) -> Result<CMatrix> {
        self.check(dy0.nrows())?;
        Ok(Self::add_diagonal(
            dy0,
            &self.susceptance_derivative_at(omega),
        ))
    }

    pub fn loaded_admittance_second_derivative(
        &self,
        ddy0: &CMatrix,
        omega: f64,
    ) -> Result<CMatrix> {
        self.check(ddy0.nrows())?;
        Ok(Self::add_diagonal(
            ddy0,
            &self.susceptance_second_derivative_at(omega),
        ))
    }

    /// Diagonal of `Lambda`, `sqrt(R0)`.
    pub fn lambda(&self) -> Vec<f64> {
        self.line_resistance.iter().map(|r| r.sqrt()).collect()
    }

    /// `K_i = (Lambda^-1 + Lambda Y) / 2`.
    pub fn incident_operator(&self, y0: &CMatrix, omega: f64) -> Result<CMatrix> {
        let y = self.loaded_admittance(y0, omega)?;
        let lam = self.lambda();
        Ok(CMatrix::from_fn(y.nrows(), y.ncols(), |i, j| {
            let inv = if i == j { 1.0 / lam[i] } else { 0.0 };
            (y[(i, j)] * lam[i] + inv) * 0.5
        }))
    }

    /// `K_r = (Lambda^-1 - Lambda Y) / 2`.
    pub fn reflected_operator(&self, y0: &CMatrix, omega: f64) -> Result<CMatrix> {
        let y = self.loaded_admittance(y0, omega)?;
        let lam = self.lambda();
        Ok(CMatrix::from_fn(y.nrows(), y.ncols(), |i, j| {
            let inv = if i == j { 1.0 / lam[i] } else { 0.0 };
            (-y[(i, j)] * lam[i] + inv) * 0.5
        }))
    }
}

/// Incident and reflected power waves (sqrt W).
#[derive(Debug, Clone, PartialEq)]
pub struct WavePair {
    pub a: CVector,
    pub b: CVector,
}

impl WavePair {
    pub fn incident_power(&self) -> f64 {
        0.5 * self.a.norm_squared()
    }

    pub fn reflected_power(&self) -> f64 {
        0.5 * self.b.norm_squared()
    }
}

pub fn waves(
    y0: &CMatrix,
    matching: &MatchingState,
    omega: f64,
    v: &PortExcitation,
) -> Result<WavePair> {
    if v.len() != y0.nrows() {
        return Err(Error::Dimension {
            expected: y0.nrows(),
            found: v.len(),
        });
    }
    let a = matching.incident_operator(y0, omega)? * v.vector();
    let b = matching.reflected_operator(y0, omega)? * v.vector();
    Ok(WavePair { a, b })
}

/// Chooses `R0 = 1 / Re(y_in)` and `B_L = -Im(y_in)` per port, with the
/// active input admittance `y_in,p = (y0 v)_p / v_p`, so that `b = 0` at
/// `omega0` for this excitation.
pub fn synthesize_match(y0: &CMatrix, v: &PortExcitation, omega0: f64) -> Result<MatchingState> {
    if v.len() != y0.nrows() {
        return Err(Error::Dimension {
            expected: y0.nrows(),
            found: v.len(),
        });
    }
    let current = y0 * v.vector();
    let mut r0 = Vec::with_capacity(v.len());
    let mut bl = Vec::with_capacity(v.len());
    for (p, (i, vp)) in current.iter().zip(v.vector().iter()).enumerate() {
        if vp.norm() == 0.0 {
            return Err(Error::Synthesis {
                port: p,
                reason: "port voltage is zero".into(),
            });
        }
        let y_in = i / vp;
        if !(y_in.re > 0.0) {
            return Err(Error::Synthesis {
                port: p,
                reason: format!("active input conductance {:.4e} S is not positive", y_in.re),
            });
        }
        r0.push(1.0 / y_in.re);
        bl.push(-y_in.im);
    }
    MatchingState::new(r0, bl, omega0)
}

/// Active input admittances `(y0 v)_p / v_p`.
pub fn active_admittances(y0: &CMatrix, v: &PortExcitation) -> Vec<Complex64> {
    let current = y0 * v.vector();
    current
        .iter()
        .zip(v.vector().iter())
        .map(|(i, vp)| i / vp)
        .collect()
}

/// Total efficiency `1 - |b|^2/|a|^2 - P_loss/P_in`.
pub fn total_efficiency(waves: &WavePair, loss_power: f64) -> Result<f64> {
    let pin = waves.incident_power();
    if !(pin > 0.0) {
        return Err(Error::Nonphysical("incident power is zero".into()));
    }
    Ok(1.0 - waves.reflected_power() / pin - loss_power / pin)
}

/// TARC of a lossless antenna.
pub fn tarc(waves: &WavePair) -> Result<f64> {
    tarc_lossy(waves, 0.0)
}

/// `sqrt(1 - eta)` with the dissipated power counted against efficiency,
/// clamped to `[0, 1]`.
pub fn tarc_lossy(waves: &WavePair, loss_power: f64) -> Result<f64> {
    let eta = total_efficiency(waves, loss_power)?;
    Ok((1.0 - eta).clamp(0.0, 1.0).sqrt())
}

/// `|b| / |a|` residual used to decide whether a state is matched.
pub fn reflection_residual(waves: &WavePair) -> f64 {
    let a = waves.a.norm();
    if a == 0.0 {
        return 0.0;
    }
    waves.b.norm() / a
}
