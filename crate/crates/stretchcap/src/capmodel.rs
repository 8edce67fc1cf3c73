//! Capacitance <-> geometry physics.
//!
//! A sensor cell behaves as a plate capacitor: `C = eps_r * eps_0 * A / d`.
//! Under volume-conserving stretch the capacitance ratio equals the squared
//! area ratio, and a cell of non-negligible size is modeled per triangle:
//! `C_j / C0_j = (1 / A0_j) * sum_i A_i^2 / A0_i` over the faces of the cell.

use std::path::Path;

use nalgebra::{DVector, Point3};
use rand::Rng;
use rand_distr::{Distribution, Normal};
use thiserror::Error;

use crate::layout::{SensorCell, SensorMesh};

#[derive(Debug, Error)]
pub enum CapModelError {
    #[error("{name} must be strictly positive, got {value}")]
    NonPositive { name: &'static str, value: f64 },
    #[error("meshes disagree in {0} count")]
    ConnectivityMismatch(&'static str),
    #[error("cell {0} has zero total rest area")]
    ZeroRestArea(usize),
    #[error("face {face} is flipped (signed area {area} mm^2)")]
    FlippedFace { face: usize, area: f64 },
    #[error("noise sigma must be non-negative, got {0}")]
    BadNoise(f64),
    #[error("trace file: {0}")]
    Trace(#[from] crate::pipeline::FrameCsvError),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

fn positive(name: &'static str, value: f64) -> Result<f64, CapModelError> {
    if value > 0.0 && value.is_finite() {
        Ok(value)
    } else {
        Err(CapModelError::NonPositive { name, value })
    }
}

/// Plate-capacitor constants. Units: `epsilon_0` in F/mm, `d0` in mm.
#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct CapacitorParams {
    pub epsilon_r: f64,
    pub epsilon_0: f64,
    pub d0: f64,
}

impl Default for CapacitorParams {
    /// Vacuum-permittivity defaults with the two-tape dielectric thickness
    /// (2 x 65 um). Silicone dielectrics sit around eps_r ~ 3; override when
    /// absolute farads matter.
    fn default() -> Self {
        Self {
            epsilon_r: 1.0,
            epsilon_0: 8.854e-15,
            d0: 0.13,
        }
    }
}

impl CapacitorParams {
    pub fn validate(&self) -> Result<(), CapModelError> {
        positive("epsilon_r", self.epsilon_r)?;
        positive("epsilon_0", self.epsilon_0)?;
        positive("d0", self.d0)?;
        Ok(())
    }
}

/// One cell's reading: the dimensionless ratio `C / C0` and, when the rest
/// capacitance is known, the absolute value in farads.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CellReading {
    pub cell: usize,
    pub ratio: f64,
    pub capacitance: Option<f64>,
}

/// `C = eps_r * eps_0 * area / d0` for a rest-state plate of `area` mm^2.
pub fn plate_capacitance(params: &CapacitorParams, area: f64) -> Result<f64, CapModelError> {
    params.validate()?;
    let area = positive("area", area)?;
    Ok(params.epsilon_r * params.epsilon_0 * area / params.d0)
}

/// Fills in rest capacitances computed from each cell's overlap area,
/// leaving measured values untouched.
pub fn compute_rest_capacitances(
    cells: &mut [SensorCell],
    params: &CapacitorParams,
) -> Result<(), CapModelError> {
    for cell in cells.iter_mut() {
        if matches!(cell.rest_capacitance, Some(crate::layout::RestCapacitance::Measured(_))) {
            continue;
        }
        let c = plate_capacitance(params, cell.rest_area)?;
        cell.rest_capacitance = Some(crate::layout::RestCapacitance::FromGeometry(c));
    }
    Ok(())
}

/// Predicted capacitance ratio under Poisson-matched uniaxial stretch:
/// `C / C0 = l / l0`.
pub fn uniaxial_ratio(l: f64, l0: f64) -> Result<f64, CapModelError> {
    let l = positive("l", l)?;
    let l0 = positive("l0", l0)?;
    Ok(l / l0)
}

/// Area ratio to capacitance ratio under volume conservation: `a -> a^2`.
pub fn area_ratio_to_cap_ratio(a: f64) -> Result<f64, CapModelError> {
    let a = positive("area ratio", a)?;
    Ok(a * a)
}

/// Inverse of [`area_ratio_to_cap_ratio`]: `c -> sqrt(c)`.
pub fn cap_ratio_to_area_ratio(c: f64) -> Result<f64, CapModelError> {
    let c = positive("capacitance ratio", c)?;
    Ok(c.sqrt())
}

fn face_area_3d(positions: &[Point3<f64>], face: &[usize; 3]) -> f64 {
    let (a, b, c) = (&positions[face[0]], &positions[face[1]], &positions[face[2]]);
    0.5 * (b - a).cross(&(c - a)).norm()
}

fn face_area_signed_2d(positions: &[Point3<f64>], face: &[usize; 3]) -> f64 {
    let (a, b, c) = (&positions[face[0]], &positions[face[1]], &positions[face[2]]);
    0.5 * ((b.x - a.x) * (c.y - a.y) - (b.y - a.y) * (c.x - a.x))
}

fn meshes_flat(rest: &SensorMesh, deformed: &[Point3<f64>]) -> bool {
    rest.vertices.iter().all(|p| p.z == 0.0) && deformed.iter().all(|p| p.z == 0.0)
}

fn check_connectivity(mesh: &SensorMesh, deformed: &[Point3<f64>]) -> Result<(), CapModelError> {
    if deformed.len() != mesh.vertices.len() {
        return Err(CapModelError::ConnectivityMismatch("vertex"));
    }
    Ok(())
}

/// Per-triangle forward model for one cell. Rest areas are taken from the
/// rest mesh's own geometry, so an undeformed frame yields exactly 1.
///
/// Degenerate deformed triangles contribute zero; in-plane deformations with
/// an inverted triangle are rejected.
pub fn cell_capacitance_nonuniform(
    mesh_rest: &SensorMesh,
    deformed: &[Point3<f64>],
    cell: usize,
) -> Result<f64, CapModelError> {
    check_connectivity(mesh_rest, deformed)?;
    let faces = mesh_rest.faces_of_cell(cell);
    let flat = meshes_flat(mesh_rest, deformed);
    let mut rest_total = 0.0;
    let mut sum = 0.0;
    for &f in &faces {
        let rest_area = mesh_rest.rest_face_areas[f];
        rest_total += rest_area;
        if flat {
            let signed = face_area_signed_2d(deformed, &mesh_rest.faces[f]);
            if signed < -1e-12 * rest_area {
                return Err(CapModelError::FlippedFace {
                    face: f,
                    area: signed,
                });
            }
        }
        let area = face_area_3d(deformed, &mesh_rest.faces[f]);
        if rest_area > 0.0 {
            sum += area * area / rest_area;
        }
    }
    if rest_total <= 0.0 {
        return Err(CapModelError::ZeroRestArea(cell));
    }
    Ok(sum / rest_total)
}

/// Noise model for simulated readings: multiplicative log-normal on ratios.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ReadingNoise {
    pub sigma: f64,
}

impl ReadingNoise {
    pub const NONE: Self = Self { sigma: 0.0 };

    /// Half the average relative hardware error reported for the forward
    /// model; a plausible preset, not ground truth.
    pub const HARDWARE_PRESET: Self = Self { sigma: 0.077 / 2.0 };
}

/// The full cell-reading vector `C_c` for one deformed frame.
pub fn forward_capacitances<R: Rng + ?Sized>(
    mesh_rest: &SensorMesh,
    deformed: &[Point3<f64>],
    cells: &[SensorCell],
    noise: ReadingNoise,
    rng: &mut R,
) -> Result<Vec<CellReading>, CapModelError> {
    if noise.sigma < 0.0 {
        return Err(CapModelError::BadNoise(noise.sigma));
    }
    let normal = if noise.sigma > 0.0 {
        Some(Normal::new(0.0, noise.sigma).expect("valid sigma"))
    } else {
        None
    };
    let mut readings = Vec::with_capacity(cells.len());
    for cell in cells {
        let mut ratio = cell_capacitance_nonuniform(mesh_rest, deformed, cell.id)?;
        if let Some(n) = &normal {
            ratio *= n.sample(rng).exp();
        }
        let capacitance = cell
            .rest_capacitance
            .as_ref()
            .map(|c0| c0.farads() * ratio);
        readings.push(CellReading {
            cell: cell.id,
            ratio,
            capacitance,
        });
    }
    Ok(readings)
}

pub fn readings_to_vector(readings: &[CellReading]) -> DVector<f64> {
    DVector::from_iterator(readings.len(), readings.iter().map(|r| r.ratio))
}

/// Writes a capacitance trace: header `frame,cell_0,...,cell_{s-1}`, one row
/// of dimensionless ratios per frame.
pub fn write_cell_trace(path: &Path, frames: &[DVector<f64>]) -> Result<(), CapModelError> {
    crate::pipeline::write_frame_csv(path, |c| format!("cell_{c}"), frames)
        .map_err(CapModelError::from)
}

pub fn read_cell_trace(path: &Path) -> Result<Vec<DVector<f64>>, CapModelError> {
    crate::pipeline::read_frame_csv(path).map_err(CapModelError::from)
}
