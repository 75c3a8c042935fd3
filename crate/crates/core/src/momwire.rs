//! Thin-wire method of moments for arrays of parallel straight dipoles.
//!
//! Each wire is split into equal segments; overlapping triangle functions
//! peak at the interior segment boundaries and are tested with themselves
//! (Galerkin) using the reduced thin-wire kernel. Every triangle is scaled by
//! its segment length, so a delta-gap voltage `v` at a feed node produces the
//! excitation entry `segment_length * v`, and the physical current through
//! the node is `segment_length * I_n`. That scaling is what the port
//! reduction's diagonal `D` undoes.

use std::collections::HashMap;
use std::f64::consts::PI;

use nalgebra::DMatrix;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::error::{Error, Result};
use crate::linalg::{self, CMatrix, CVector, J};

pub const SPEED_OF_LIGHT: f64 = 299_792_458.0;
pub const MU0: f64 = 1.256_637_062_12e-6;

pub fn eps0() -> f64 {
    1.0 / (MU0 * SPEED_OF_LIGHT * SPEED_OF_LIGHT)
}

pub fn wavelength(omega: f64) -> f64 {
    2.0 * PI * SPEED_OF_LIGHT / omega
}

pub fn omega_for_wavelength(lambda: f64) -> f64 {
    2.0 * PI * SPEED_OF_LIGHT / lambda
}

/// Relative step of the central difference used for `dZ/domega`.
pub const DERIVATIVE_STEP: f64 = 1e-5;

const FAR_POINTS: usize = 4;
const NEAR_POINTS: usize = 16;
/// Segment pairs whose centres are closer than this many segment lengths
/// get singularity extraction and the higher-order rule.
const NEAR_DISTANCE: f64 = 1.5;

/// One straight wire. `port_segment` is the interior segment boundary
/// (`1..segments`) whose triangle function carries the delta gap.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Wire {
    pub length: f64,
    pub radius: f64,
    pub center: [f64; 3],
    pub axis: [f64; 3],
    pub segments: usize,
    pub port_segment: usize,
}

impl Wire {
    pub fn segment_length(&self) -> f64 {
        self.length / self.segments as f64
    }

    pub fn basis_count(&self) -> usize {
        self.segments - 1
    }
}

/// Array of parallel thin wires, one port per wire.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WireArrayGeometry {
    wires: Vec<Wire>,
}

fn dot(a: [f64; 3], b: [f64; 3]) -> f64 {
    a[0] * b[0] + a[1] * b[1] + a[2] * b[2]
}

fn sub(a: [f64; 3], b: [f64; 3]) -> [f64; 3] {
    [a[0] - b[0], a[1] - b[1], a[2] - b[2]]
}

fn norm(a: [f64; 3]) -> f64 {
    dot(a, a).sqrt()
}

impl WireArrayGeometry {
    pub fn new(mut wires: Vec<Wire>) -> Result<Self> {
        if wires.is_empty() {
            return Err(Error::Geometry("at least one wire is required".into()));
        }
        for (i, w) in wires.iter_mut().enumerate() {
            if !(w.length > 0.0 && w.length.is_finite()) {
                return Err(Error::Geometry(format!(
                    "wire {i}: length must be positive"
                )));
            }
            if !(w.radius > 0.0 && w.radius < w.length / 50.0) {
                return Err(Error::Geometry(format!(
                    "wire {i}: radius must be positive and below length/50"
                )));
            }
            if w.segments < 10 || w.segments % 2 != 0 {
                return Err(Error::Geometry(format!(
                    "wire {i}: segment count must be even and at least 10"
                )));
            }
            if w.port_segment == 0 || w.port_segment >= w.segments {
                return Err(Error::Geometry(format!(
                    "wire {i}: port must sit on an interior segment boundary (1..{})",
                    w.segments
                )));
            }
            let n = norm(w.axis);
            if !(n > 0.0 && n.is_finite()) {
                return Err(Error::Geometry(format!("wire {i}: axis must be nonzero")));
            }
            w.axis = [w.axis[0] / n, w.axis[1] / n, w.axis[2] / n];
        }
        let axis = wires[0].axis;
        for (i, w) in wires.iter().enumerate().skip(1) {
            if norm(sub(w.axis, axis)) > 1e-9 {
                return Err(Error::Geometry(format!(
                    "wire {i}: all wires must share one axis direction"
                )));
            }
        }
        let geometry = Self { wires };
        for i in 0..geometry.wires.len() {
            for j in (i + 1)..geometry.wires.len() {
                let gap = geometry.gap(i, j);
                let radius = geometry.wires[i].radius.max(geometry.wires[j].radius);
                if !(radius < gap / 4.0) {
                    return Err(Error::Geometry(format!(
                        "wires {i} and {j}: radius must be below a quarter of the gap ({gap:.4e} m)"
                    )));
                }
            }
        }
        Ok(geometry)
    }

    /// `positions` are the transverse (x, y) wire positions; every wire runs
    /// along z, is centre-fed and has the same length, radius and segment
    /// count.
    pub fn parallel_dipoles(
        positions: &[[f64; 2]],
        length: f64,
        radius: f64,
        segments: usize,
    ) -> Result<Self> {
        let wires = positions
            .iter()
            .map(|p| Wire {
                length,
                radius,
                center: [p[0], p[1], 0.0],
                axis: [0.0, 0.0, 1.0],
                segments,
                port_segment: segments / 2,
            })
            .collect();
        Self::new(wires)
    }

    /// Side-by-side row of dipoles along x with spacing `spacing`.
    pub fn dipole_row(
        count: usize,
        spacing: f64,
        length: f64,
        radius: f64,
        segments: usize,
    ) -> Result<Self> {
        let offset = 0.5 * spacing * (count as f64 - 1.0);
        let positions: Vec<[f64; 2]> = (0..count)
            .map(|k| [k as f64 * spacing - offset, 0.0])
            .collect();
        Self::parallel_dipoles(&positions, length, radius, segments)
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let raw: WireArrayGeometry = serde_json::from_str(text)
            .map_err(|e| Error::Geometry(format!("malformed geometry JSON: {e}")))?;
        Self::new(raw.wires)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("geometry serializes")
    }

    /// SHA-256 of the compact JSON form.
    pub fn content_hash(&self) -> String {
        let text = serde_json::to_string(self).expect("geometry serializes");
        let digest = Sha256::digest(text.as_bytes());
        digest.iter().map(|b| format!("{b:02x}")).collect()
    }

    pub fn wires(&self) -> &[Wire] {
        &self.wires
    }

    pub fn axis(&self) -> [f64; 3] {
        self.wires[0].axis
    }

    pub fn port_count(&self) -> usize {
        self.wires.len()
    }

    pub fn basis_count(&self) -> usize {
        self.wires.iter().map(Wire::basis_count).sum()
    }

    fn basis_offsets(&self) -> Vec<usize> {
        let mut offsets = Vec::with_capacity(self.wires.len());
        let mut acc = 0;
        for w in &self.wires {
            offsets.push(acc);
            acc += w.basis_count();
        }
        offsets
    }

    /// Basis index of each port, in wire order.
    pub fn port_rows(&self) -> Vec<usize> {
        self.basis_offsets()
            .iter()
            .zip(&self.wires)
            .map(|(off, w)| off + w.port_segment - 1)
            .collect()
    }

    /// Segment length of the wire owning each basis function.
    pub fn basis_lengths(&self) -> Vec<f64> {
        self.wires
            .iter()
            .flat_map(|w| std::iter::repeat_n(w.segment_length(), w.basis_count()))
            .collect()
    }

    fn axial(&self, w: &Wire) -> f64 {
        dot(w.center, self.axis())
    }

    fn transverse(&self, w: &Wire) -> [f64; 3] {
        let a = self.axis();
        let s = dot(w.center, a);
        sub(w.center, [a[0] * s, a[1] * s, a[2] * s])
    }

    fn gap(&self, i: usize, j: usize) -> f64 {
        let (a, b) = (&self.wires[i], &self.wires[j]);
        let rho = norm(sub(self.transverse(a), self.transverse(b)));
        let (a0, a1) = (
            self.axial(a) - a.length / 2.0,
            self.axial(a) + a.length / 2.0,
        );
        let (b0, b1) = (
            self.axial(b) - b.length / 2.0,
            self.axial(b) + b.length / 2.0,
        );
        let along = (b0 - a1).max(a0 - b1).max(0.0);
        rho.hypot(along)
    }

    /// Smallest distance between two wires, infinite for a single wire.
    pub fn smallest_gap(&self) -> f64 {
        let mut best = f64::INFINITY;
        for i in 0..self.wires.len() {
            for j in (i + 1)..self.wires.len() {
                best = best.min(self.gap(i, j));
            }
        }
        best
    }

    /// Enforces `segment length < lambda / 10` at `omega`.
    pub fn check_frequency(&self, omega: f64) -> Result<()> {
        if !(omega > 0.0 && omega.is_finite()) {
            return Err(Error::Invalid(format!(
                "omega must be positive, got {omega}"
            )));
        }
        let limit = wavelength(omega) / 10.0;
        for (i, w) in self.wires.iter().enumerate() {
            let seg = w.segment_length();
            if seg >= limit {
                let mut suggested = (w.length / limit).floor() as usize + 1;
                suggested = suggested.max(10);
                if suggested % 2 == 1 {
                    suggested += 1;
                }
                return Err(Error::SegmentTooCoarse {
                    wire: i,
                    segment: seg,
                    limit,
                    suggested,
                });
            }
        }
        Ok(())
    }

    fn mesh(&self) -> Mesh {
        let mut segments = Vec::new();
        let mut basis = Vec::new();
        for (wi, w) in self.wires.iter().enumerate() {
            let first_seg = segments.len();
            let delta = w.segment_length();
            let centre = self.axial(w);
            let transverse = self.transverse(w);
            for k in 0..w.segments {
                let start = centre - w.length / 2.0 + k as f64 * delta;
                segments.push(Segment {
                    wire: wi,
                    start,
                    length: delta,
                    transverse,
                    radius: w.radius,
                });
            }
            for node in 1..w.segments {
                basis.push(Basis {
                    rising: first_seg + node - 1,
                    falling: first_seg + node,
                    scale: delta,
                });
            }
        }
        Mesh { segments, basis }
    }
}

struct Segment {
    wire: usize,
    start: f64,
    length: f64,
    transverse: [f64; 3],
    radius: f64,
}

impl Segment {
    fn centre(&self) -> f64 {
        self.start + 0.5 * self.length
    }
}

struct Basis {
    rising: usize,
    falling: usize,
    scale: f64,
}

struct Mesh {
    segments: Vec<Segment>,
    basis: Vec<Basis>,
}

/// Integrals of the kernel over one segment pair: `shape[i][j]` weights by
/// the rising (0) / falling (1) linear function on each segment, `plain` is
/// the unweighted double integral.
#[derive(Clone, Copy, Default)]
struct PairIntegrals {
    shape: [[Complex64; 2]; 2],
    plain: Complex64,
}

impl PairIntegrals {
    fn transposed(&self) -> Self {
        Self {
            shape: [
                [self.shape[0][0], self.shape[1][0]],
                [self.shape[0][1], self.shape[1][1]],
            ],
            plain: self.plain,
        }
    }
}

struct Quadrature {
    far: (Vec<f64>, Vec<f64>),
    near: (Vec<f64>, Vec<f64>),
}

impl Quadrature {
    fn new() -> Self {
        Self {
            far: linalg::gauss_legendre(FAR_POINTS),
            near: linalg::gauss_legendre(NEAR_POINTS),
        }
    }
}

/// Maps reference nodes onto `[a, a + len]`.
fn mapped(rule: &(Vec<f64>, Vec<f64>), a: f64, len: f64) -> impl Iterator<Item = (f64, f64)> + '_ {
    rule.0
        .iter()
        .zip(&rule.1)
        .map(move |(x, w)| (a + 0.5 * len * (x + 1.0), 0.5 * len * w))
}

/// Reduced-kernel distance: the radius on one wire, the axis separation
/// (at least the radius) between wires.
fn pair_distance(s: &Segment, t: &Segment) -> f64 {
    if s.wire == t.wire {
        s.radius
    } else {
        norm(sub(s.transverse, t.transverse)).max(s.radius.max(t.radius))
    }
}

fn pair_integrals(s: &Segment, t: &Segment, k: f64, quad: &Quadrature) -> PairIntegrals {
    let rho = pair_distance(s, t);
    let centre_distance = (s.centre() - t.centre()).hypot(rho);
    let near = centre_distance < NEAR_DISTANCE * s.length.max(t.length);
    let (t0, t1) = (t.start, t.start + t.length);
    let mut out = PairIntegrals::default();
    let inv4pi = 1.0 / (4.0 * PI);

    let rule = if near { &quad.near } else { &quad.far };
    for (z, wz) in mapped(rule, s.start, s.length) {
        let up_s = (z - s.start) / s.length;
        let shape_s = [up_s, 1.0 - up_s];

        // inner integral over t of (linear function) * kernel
        let mut inner = [Complex64::new(0.0, 0.0); 2];
        let mut inner_plain = Complex64::new(0.0, 0.0);
        for (zp, wzp) in mapped(rule, t0, t.length) {
            let r = (z - zp).hypot(rho);
            let kernel = if near {
                // smooth remainder; the 1/R part is integrated exactly below
                if k * r < 1e-6 {
                    Complex64::new(-0.5 * k * k * r, -k) * inv4pi
                } else {
                    (Complex64::from_polar(1.0, -k * r) - 1.0) / r * inv4pi
                }
            } else {
                Complex64::from_polar(1.0, -k * r) / r * inv4pi
            };
            let up_t = (zp - t0) / t.length;
            inner[0] += kernel * (up_t * wzp);
            inner[1] += kernel * ((1.0 - up_t) * wzp);
            inner_plain += kernel * wzp;
        }
        if near {
            // int dz'/R and int (z' - z) dz'/R over [t0, t1]
            let j0 = ((t1 - z) / rho).asinh() - ((t0 - z) / rho).asinh();
            let j1 = (t1 - z).hypot(rho) - (t0 - z).hypot(rho);
            let up = (j1 + (z - t0) * j0) / t.length;
            let down = ((t1 - z) * j0 - j1) / t.length;
            inner[0] += up * inv4pi;
            inner[1] += down * inv4pi;
            inner_plain += j0 * inv4pi;
        }
        for i in 0..2 {
            for j in 0..2 {
                out.shape[i][j] += inner[j] * (shape_s[i] * wz);
            }
        }
        out.plain += inner_plain * wz;
    }
    out
}

/// Assembled impedance matrix at one frequency.
#[derive(Debug, Clone)]
pub struct MoMSystem {
    geometry: WireArrayGeometry,
    omega: f64,
    z: CMatrix,
}

impl MoMSystem {
    pub fn geometry(&self) -> &WireArrayGeometry {
        &self.geometry
    }

    pub fn omega(&self) -> f64 {
        self.omega
    }

    pub fn impedance(&self) -> &CMatrix {
        &self.z
    }

    pub fn basis_count(&self) -> usize {
        self.z.nrows()
    }

    /// Radiation part `R = Re Z`.
    pub fn resistance(&self) -> DMatrix<f64> {
        self.z.map(|z| z.re)
    }

    /// Reactance part `X = Im Z`.
    pub fn reactance(&self) -> DMatrix<f64> {
        self.z.map(|z| z.im)
    }
}

/// Galerkin impedance matrix of `geometry` at angular frequency `omega`.
pub fn assemble(geometry: &WireArrayGeometry, omega: f64) -> Result<MoMSystem> {
    geometry.check_frequency(omega)?;
    let z = assemble_matrix(geometry, omega);
    if z.iter().any(|v| !v.re.is_finite() || !v.im.is_finite()) {
        return Err(Error::Geometry(
            "assembled matrix has non-finite entries".into(),
        ));
    }
    Ok(MoMSystem {
        geometry: geometry.clone(),
        omega,
        z,
    })
}

fn assemble_matrix(geometry: &WireArrayGeometry, omega: f64) -> CMatrix {
    let mesh = geometry.mesh();
    let k = omega / SPEED_OF_LIGHT;
    let quad = Quadrature::new();
    let nseg = mesh.segments.len();

    // segment pairs repeat along a wire and between equally spaced wires
    let mut cache: HashMap<[u64; 4], PairIntegrals> = HashMap::new();
    let mut pairs = vec![PairIntegrals::default(); nseg * nseg];
    for s in 0..nseg {
        for t in s..nseg {
            let (a, b) = (&mesh.segments[s], &mesh.segments[t]);
            let key = [
                pair_distance(a, b).to_bits(),
                (b.start - a.start).to_bits(),
                a.length.to_bits(),
                b.length.to_bits(),
            ];
            let p = *cache
                .entry(key)
                .or_insert_with(|| pair_integrals(a, b, k, &quad));
            pairs[t * nseg + s] = p.transposed();
            pairs[s * nseg + t] = p;
        }
    }

    let magnetic = J * (omega * MU0);
    let electric = -J / (omega * eps0());
    let n = mesh.basis.len();
    let mut z = CMatrix::zeros(n, n);
    for m in 0..n {
        let bm = &mesh.basis[m];
        // (segment, shape index, slope sign)
        let parts_m = [(bm.rising, 0usize, 1.0), (bm.falling, 1usize, -1.0)];
        for nn in m..n {
            let bn = &mesh.basis[nn];
            let parts_n = [(bn.rising, 0usize, 1.0), (bn.falling, 1usize, -1.0)];
            let mut acc = Complex64::new(0.0, 0.0);
            for &(s, i, sign_s) in &parts_m {
                let len_s = mesh.segments[s].length;
                for &(t, j, sign_t) in &parts_n {
                    let p = &pairs[s * nseg + t];
                    let len_t = mesh.segments[t].length;
                    acc += magnetic * p.shape[i][j]
                        + electric * p.plain * (sign_s * sign_t / (len_s * len_t));
                }
            }
            z[(m, nn)] = acc * (bm.scale * bn.scale);
        }
    }
    linalg::symmetrize_from_upper(&mut z);
    z
}

/// `dZ/domega` by Richardson-extrapolated central differences with relative
/// steps [`DERIVATIVE_STEP`] and half of it.
pub fn impedance_derivative(geometry: &WireArrayGeometry, omega: f64) -> Result<CMatrix> {
    impedance_derivative_with_step(geometry, omega, DERIVATIVE_STEP, true)
}

pub fn impedance_derivative_with_step(
    geometry: &WireArrayGeometry,
    omega: f64,
    step: f64,
    richardson: bool,
) -> Result<CMatrix> {
    let central = |h: f64| -> Result<CMatrix> {
        let up = assemble(geometry, omega * (1.0 + h))?;
        let down = assemble(geometry, omega * (1.0 - h))?;
        Ok((up.z - down.z) / Complex64::new(2.0 * omega * h, 0.0))
    };
    let coarse = central(step)?;
    let d = if richardson {
        let fine = central(0.5 * step)?;
        (fine * Complex64::new(4.0, 0.0) - coarse) / Complex64::new(3.0, 0.0)
    } else {
        coarse
    };
    Ok(linalg::symmetrize(&d))
}

/// Ohmic or synthetic loss matrix `R_L` in the basis of the solver.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct LossModel {
    matrix: Option<DMatrix<f64>>,
}

impl LossModel {
    pub fn lossless() -> Self {
        Self { matrix: None }
    }

    pub fn from_matrix(matrix: DMatrix<f64>) -> Result<Self> {
        if matrix.nrows() != matrix.ncols() {
            return Err(Error::Loss("loss matrix must be square".into()));
        }
        let scale = matrix.iter().fold(0.0f64, |acc, x| acc.max(x.abs()));
        if matrix.iter().any(|x| !x.is_finite()) {
            return Err(Error::Loss("loss matrix has non-finite entries".into()));
        }
        let asym = (&matrix - matrix.transpose()).amax();
        if asym > 1e-12 * scale.max(f64::MIN_POSITIVE) {
            return Err(Error::Loss("loss matrix must be symmetric".into()));
        }
        let min_eig = linalg::min_eigenvalue(&matrix);
        if min_eig < -1e-12 * scale {
            return Err(Error::Loss(format!(
                "loss matrix must be positive semidefinite (eigenvalue {min_eig:.3e})"
            )));
        }
        Ok(Self {
            matrix: Some(matrix),
        })
    }

    /// Distributed series resistance `resistance_per_length` (ohm/m) along
    /// every wire: `R_L,mn = r * int f_m f_n dz` for the scaled triangles.
    pub fn ohmic(geometry: &WireArrayGeometry, resistance_per_length: f64) -> Result<Self> {
        if !(resistance_per_length >= 0.0 && resistance_per_length.is_finite()) {
            return Err(Error::Loss(
                "resistance per length must be nonnegative".into(),
            ));
        }
        let n = geometry.basis_count();
        let mut m = DMatrix::zeros(n, n);
        let mut offset = 0;
        for w in geometry.wires() {
            let d = w.segment_length();
            let scale = resistance_per_length * d * d;
            for i in 0..w.basis_count() {
                m[(offset + i, offset + i)] = scale * 2.0 * d / 3.0;
                if i + 1 < w.basis_count() {
                    m[(offset + i, offset + i + 1)] = scale * d / 6.0;
                    m[(offset + i + 1, offset + i)] = scale * d / 6.0;
                }
            }
            offset += w.basis_count();
        }
        Self::from_matrix(m)
    }

    pub fn matrix(&self) -> Option<&DMatrix<f64>> {
        self.matrix.as_ref()
    }

    pub fn is_lossless(&self) -> bool {
        self.matrix.is_none()
    }

    fn check(&self, n: usize) -> Result<()> {
        match &self.matrix {
            Some(m) if m.nrows() != n => Err(Error::Dimension {
                expected: n,
                found: m.nrows(),
            }),
            _ => Ok(()),
        }
    }

    /// `Z + R_L`.
    pub fn loaded(&self, z: &CMatrix) -> Result<CMatrix> {
        self.check(z.nrows())?;
        Ok(match &self.matrix {
            None => z.clone(),
            Some(r) => z + r.map(|x| Complex64::new(x, 0.0)),
        })
    }

    fn quadratic(&self, current: &CVector) -> f64 {
        match &self.matrix {
            None => 0.0,
            Some(r) => {
                let rc = r.map(|x| Complex64::new(x, 0.0));
                linalg::quadratic(&rc, current).re
            }
        }
    }
}

/// `I = (Z + R_L)^-1 V`.
pub fn solve_current(system: &MoMSystem, loss: &LossModel, voltage: &CVector) -> Result<CVector> {
    let n = system.basis_count();
    if voltage.len() != n {
        return Err(Error::Dimension {
            expected: n,
            found: voltage.len(),
        });
    }
    let a = loss.loaded(&system.z)?;
    linalg::solve_vec(&a, voltage, system.omega)
}

/// Cycle-mean powers carried by a current vector.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Powers {
    pub radiated: f64,
    pub reactive: f64,
    pub loss: f64,
}

pub fn powers(system: &MoMSystem, loss: &LossModel, current: &CVector) -> Result<Powers> {
    let n = system.basis_count();
    if current.len() != n {
        return Err(Error::Dimension {
            expected: n,
            found: current.len(),
        });
    }
    loss.check(n)?;
    let form = linalg::quadratic(&system.z, current);
    // I^H Z I = I^H R I + j I^H X I with both forms real for symmetric R, X
    Ok(Powers {
        radiated: 0.5 * form.re,
        reactive: 0.5 * form.im,
        loss: 0.5 * loss.quadratic(current),
    })
}
