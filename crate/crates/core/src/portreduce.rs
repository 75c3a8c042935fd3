//! Port-level view of the basis-function system.
//!
//! The voltage vector is `V = D P v` where `P` (N x ports) selects the
//! basis function carrying each port and `D` restores the segment-length
//! scaling of that function. A bilinear form in the current,
//! `I^H M I`, becomes `v^H m v` with `m = P^T D^T Y^H M Y D P`.

use nalgebra::DMatrix;
use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::linalg::{self, CMatrix, CVector};
use crate::momwire::{LossModel, MoMSystem, WireArrayGeometry};

/// Complex port voltages, fixed over frequency.
#[derive(Debug, Clone, PartialEq)]
pub struct PortExcitation(CVector);

impl PortExcitation {
    pub fn new(v: CVector) -> Result<Self> {
        if v.is_empty() {
            return Err(Error::Invalid("excitation needs at least one port".into()));
        }
        if v.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
            return Err(Error::Invalid("excitation has non-finite entries".into()));
        }
        Ok(Self(v))
    }

    pub fn from_real(values: &[f64]) -> Result<Self> {
        Self::new(CVector::from_iterator(
            values.len(),
            values.iter().map(|x| Complex64::new(*x, 0.0)),
        ))
    }

    pub fn from_complex(values: &[Complex64]) -> Result<Self> {
        Self::new(CVector::from_column_slice(values))
    }

    pub fn vector(&self) -> &CVector {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn scaled(&self, c: Complex64) -> Self {
        Self(&self.0 * c)
    }

    /// Errors unless `||v|| > 0`, which every Q-factor needs.
    pub fn require_nonzero(&self) -> Result<()> {
        if self.0.norm() > 0.0 {
            Ok(())
        } else {
            Err(Error::Nonphysical("excitation vector is zero".into()))
        }
    }
}

/// Indexing matrix `P` and unit-fixing diagonal `D`.
#[derive(Debug, Clone, PartialEq)]
pub struct PortReduction {
    rows: Vec<usize>,
    diag: Vec<f64>,
}

impl PortReduction {
    pub fn new(basis_count: usize, rows: Vec<usize>, diag: Vec<f64>) -> Result<Self> {
        if rows.is_empty() {
            return Err(Error::Invalid("at least one port is required".into()));
        }
        if diag.len() != basis_count {
            return Err(Error::Dimension {
                expected: basis_count,
                found: diag.len(),
            });
        }
        for (p, &r) in rows.iter().enumerate() {
            if r >= basis_count {
                return Err(Error::Invalid(format!("port {p} row {r} out of range")));
            }
            if rows[..p].contains(&r) {
                return Err(Error::Invalid(format!(
                    "port {p} shares row {r} with another port"
                )));
            }
        }
        if diag.iter().any(|d| !(*d > 0.0 && d.is_finite())) {
            return Err(Error::Invalid(
                "D must have positive diagonal entries".into(),
            ));
        }
        Ok(Self { rows, diag })
    }

    /// `D` holds the feed segment length on port rows and 1 elsewhere.
    pub fn from_geometry(geometry: &WireArrayGeometry) -> Self {
        let n = geometry.basis_count();
        let rows = geometry.port_rows();
        let lengths = geometry.basis_lengths();
        let mut diag = vec![1.0; n];
        for &r in &rows {
            diag[r] = lengths[r];
        }
        Self::new(n, rows, diag).expect("geometry yields a valid reduction")
    }

    pub fn port_count(&self) -> usize {
        self.rows.len()
    }

    pub fn basis_count(&self) -> usize {
        self.diag.len()
    }

    pub fn port_rows(&self) -> &[usize] {
        &self.rows
    }

    pub fn indexing_matrix(&self) -> DMatrix<f64> {
        let mut p = DMatrix::zeros(self.basis_count(), self.port_count());
        for (col, &row) in self.rows.iter().enumerate() {
            p[(row, col)] = 1.0;
        }
        p
    }

    pub fn unit_matrix(&self) -> DMatrix<f64> {
        DMatrix::from_diagonal(&nalgebra::DVector::from_column_slice(&self.diag))
    }

    /// `D P` as a complex N x ports matrix.
    fn feed_matrix(&self) -> CMatrix {
        let mut dp = CMatrix::zeros(self.basis_count(), self.port_count());
        for (col, &row) in self.rows.iter().enumerate() {
            dp[(row, col)] = Complex64::new(self.diag[row], 0.0);
        }
        dp
    }

    fn check_ports(&self, v: &PortExcitation) -> Result<()> {
        if v.len() != self.port_count() {
            return Err(Error::Dimension {
                expected: self.port_count(),
                found: v.len(),
            });
        }
        Ok(())
    }

    fn check_system(&self, system: &MoMSystem) -> Result<()> {
        if system.basis_count() != self.basis_count() {
            return Err(Error::Dimension {
                expected: self.basis_count(),
                found: system.basis_count(),
            });
        }
        Ok(())
    }

    /// `V = D P v`.
    pub fn expand_voltage(&self, v: &PortExcitation) -> Result<CVector> {
        self.check_ports(v)?;
        let mut out = CVector::zeros(self.basis_count());
        for (p, &row) in self.rows.iter().enumerate() {
            out[row] = v.vector()[p] * self.diag[row];
        }
        Ok(out)
    }

    /// Physical current through each port, `(D P)^T I`.
    pub fn port_currents(&self, current: &CVector) -> Result<CVector> {
        if current.len() != self.basis_count() {
            return Err(Error::Dimension {
                expected: self.basis_count(),
                found: current.len(),
            });
        }
        Ok(CVector::from_iterator(
            self.port_count(),
            self.rows.iter().map(|&r| current[r] * self.diag[r]),
        ))
    }

    /// `Y D P` with `Y = (Z + R_L)^-1`, one solved column per port.
    pub fn port_currents_basis(&self, system: &MoMSystem, loss: &LossModel) -> Result<CMatrix> {
        self.check_system(system)?;
        let a = loss.loaded(system.impedance())?;
        linalg::solve(&a, &self.feed_matrix(), system.omega())
    }

    /// `y0 = P^T D^T (Z + R_L)^-1 D P`.
    pub fn port_admittance(&self, system: &MoMSystem, loss: &LossModel) -> Result<CMatrix> {
        let ydp = self.port_currents_basis(system, loss)?;
        Ok(linalg::symmetrize(&(self.feed_matrix().transpose() * ydp)))
    }

    /// `dy0/domega = -P^T D^T Y (dZ/domega) Y D P`. The left factor is the
    /// plain transpose of `Y D P`; `Y` is complex symmetric, not Hermitian.
    pub fn port_admittance_derivative(
        &self,
        system: &MoMSystem,
        dz: &CMatrix,
        loss: &LossModel,
    ) -> Result<CMatrix> {
        if dz.nrows() != self.basis_count() || dz.ncols() != self.basis_count() {
            return Err(Error::Dimension {
                expected: self.basis_count(),
                found: dz.nrows(),
            });
        }
        let ydp = self.port_currents_basis(system, loss)?;
        let d = -(ydp.transpose() * dz * &ydp);
        Ok(linalg::symmetrize(&d))
    }

    /// Port matrix `m = (Y D P)^H M (Y D P)` of a basis-level matrix.
    pub fn reduce_matrix(
        &self,
        m: &CMatrix,
        system: &MoMSystem,
        loss: &LossModel,
    ) -> Result<CMatrix> {
        if m.nrows() != self.basis_count() || m.ncols() != self.basis_count() {
            return Err(Error::Dimension {
                expected: self.basis_count(),
                found: m.nrows(),
            });
        }
        let ydp = self.port_currents_basis(system, loss)?;
        Ok(ydp.adjoint() * m * ydp)
    }

    /// Basis current `I = (Z + R_L)^-1 D P v`.
    pub fn excited_current(
        &self,
        system: &MoMSystem,
        loss: &LossModel,
        v: &PortExcitation,
    ) -> Result<CVector> {
        self.check_system(system)?;
        let voltage = self.expand_voltage(v)?;
        crate::momwire::solve_current(system, loss, &voltage)
    }

    /// `v^H m v`, evaluated as `I^H M I` from the solved current.
    pub fn reduce_bilinear(
        &self,
        m: &CMatrix,
        system: &MoMSystem,
        loss: &LossModel,
        v: &PortExcitation,
    ) -> Result<Complex64> {
        if m.nrows() != self.basis_count() || m.ncols() != self.basis_count() {
            return Err(Error::Dimension {
                expected: self.basis_count(),
                found: m.nrows(),
            });
        }
        let current = self.excited_current(system, loss, v)?;
        Ok(linalg::quadratic(m, &current))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::momwire::{self, omega_for_wavelength};
    use approx::assert_relative_eq;

    fn two_dipoles(d: f64) -> (WireArrayGeometry, MoMSystem, PortReduction) {
        let g = WireArrayGeometry::dipole_row(2, d, 0.5, 1e-3, 20).unwrap();
        let sys = momwire::assemble(&g, omega_for_wavelength(1.0)).unwrap();
        let red = PortReduction::from_geometry(&g);
        (g, sys, red)
    }

    #[test]
    fn unit_excitation_lands_on_port_row() {
        let (g, _, red) = two_dipoles(0.2);
        let v = PortExcitation::from_real(&[1.0, 0.0]).unwrap();
        let big_v = red.expand_voltage(&v).unwrap();
        let rows = g.port_rows();
        let len = g.wires()[0].segment_length();
        for (i, x) in big_v.iter().enumerate() {
            let expect = if i == rows[0] { len } else { 0.0 };
            assert_eq!(*x, Complex64::new(expect, 0.0));
        }
        let v = PortExcitation::from_real(&[1.0, -1.0]).unwrap();
        let big_v = red.expand_voltage(&v).unwrap();
        assert_eq!(big_v[rows[0]].re, len);
        assert_eq!(big_v[rows[1]].re, -g.wires()[1].segment_length());
        assert_eq!(big_v.iter().filter(|z| z.norm() > 0.0).count(), 2);
    }

    #[test]
    fn literal_matrices_match_the_fast_path() {
        let (_, sys, red) = two_dipoles(0.2);
        let p = red.indexing_matrix();
        let d = red.unit_matrix();
        for col in 0..p.ncols() {
            assert_eq!(p.column(col).sum(), 1.0);
        }
        let dp = (d * p).map(|x| Complex64::new(x, 0.0));
        let y = linalg::inverse(sys.impedance(), sys.omega()).unwrap();
        let literal = dp.transpose() * y * &dp;
        let y0 = red.port_admittance(&sys, &LossModel::lossless()).unwrap();
        assert!((literal - &y0).norm() < 1e-10 * y0.norm());
    }

    #[test]
    fn expand_then_reduce_is_an_identity() {
        let (_, sys, red) = two_dipoles(0.15);
        let n = sys.basis_count();
        let m = CMatrix::from_fn(n, n, |i, j| {
            Complex64::new((i as f64 * 0.3 + j as f64).sin(), (i * j) as f64 * 1e-3)
        });
        let v =
            PortExcitation::from_complex(&[Complex64::new(1.0, 0.5), Complex64::new(-0.2, 2.0)])
                .unwrap();
        let loss = LossModel::lossless();
        let direct = red.reduce_bilinear(&m, &sys, &loss, &v).unwrap();
        let reduced = red.reduce_matrix(&m, &sys, &loss).unwrap();
        let via_port = linalg::quadratic(&reduced, v.vector());
        assert!((direct - via_port).norm() < 1e-12 * direct.norm());
    }

    #[test]
    fn single_port_admittance_is_inverse_input_impedance() {
        let g = WireArrayGeometry::parallel_dipoles(&[[0.0, 0.0]], 0.5, 1e-3, 20).unwrap();
        let sys = momwire::assemble(&g, omega_for_wavelength(1.0)).unwrap();
        let red = PortReduction::from_geometry(&g);
        let loss = LossModel::lossless();
        let y0 = red.port_admittance(&sys, &loss).unwrap()[(0, 0)];
        let v = PortExcitation::from_real(&[1.0]).unwrap();
        let current = red.excited_current(&sys, &loss, &v).unwrap();
        let feed = red.port_currents(&current).unwrap()[0];
        // 1 V across the gap drives I = 1/Z_in = y0
        assert!((feed - y0).norm() < 1e-12 * y0.norm());
        let zin = 1.0 / y0;
        assert!(zin.re > 60.0 && zin.re < 90.0);
    }

    #[test]
    fn identical_dipoles_have_symmetric_port_admittance() {
        let (_, sys, red) = two_dipoles(0.125);
        let y0 = red.port_admittance(&sys, &LossModel::lossless()).unwrap();
        let scale = y0.norm();
        assert!((y0[(0, 0)] - y0[(1, 1)]).norm() < 1e-10 * scale);
        assert!((y0[(0, 1)] - y0[(1, 0)]).norm() < 1e-12 * scale);
        let g0 = y0.map(|z| z.re);
        assert!(linalg::min_eigenvalue(&g0) >= -1e-10 * g0.amax());
    }

    #[test]
    fn radiated_power_is_a_reduced_form() {
        let (_, sys, red) = two_dipoles(0.3);
        let loss = LossModel::lossless();
        let v = PortExcitation::from_real(&[1.0, 0.7]).unwrap();
        let r = linalg::real_part(sys.impedance());
        let form = red.reduce_bilinear(&r, &sys, &loss, &v).unwrap();
        let current = red.excited_current(&sys, &loss, &v).unwrap();
        let p = momwire::powers(&sys, &loss, &current).unwrap();
        assert_relative_eq!(form.re, 2.0 * p.radiated, max_relative = 1e-12);
        assert!(form.im.abs() < 1e-10 * form.re.abs());
    }

    #[test]
    fn identity_form_scales_quadratically() {
        let (_, sys, red) = two_dipoles(0.3);
        let loss = LossModel::lossless();
        let id = CMatrix::identity(sys.basis_count(), sys.basis_count());
        let v = PortExcitation::from_real(&[1.0, 0.7]).unwrap();
        let c = Complex64::new(-1.5, 0.4);
        let a = red.reduce_bilinear(&id, &sys, &loss, &v).unwrap();
        let b = red.reduce_bilinear(&id, &sys, &loss, &v.scaled(c)).unwrap();
        assert_relative_eq!(b.re, c.norm_sqr() * a.re, max_relative = 1e-12);
    }

    #[test]
    fn invalid_reductions_are_rejected() {
        assert!(PortReduction::new(4, vec![1, 1], vec![1.0; 4]).is_err());
        assert!(PortReduction::new(4, vec![5], vec![1.0; 4]).is_err());
        assert!(PortReduction::new(4, vec![1], vec![1.0, 0.0, 1.0, 1.0]).is_err());
        let red = PortReduction::new(4, vec![1, 2], vec![1.0; 4]).unwrap();
        let v = PortExcitation::from_real(&[1.0]).unwrap();
        assert!(matches!(
            red.expand_voltage(&v),
            Err(Error::Dimension { .. })
        ));
    }
}
