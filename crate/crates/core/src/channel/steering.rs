use std::f64::consts::PI;

use nalgebra::DVector;

use crate::{Error, Result, C64};

/// Array lattice. Elements sit on integer lattice points scaled by the
/// spacing: linear arrays along x, planar arrays in the x-y plane with the
/// flattened index `col + row * cols`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ArrayGeometry {
    Linear { elements: usize },
    Planar { rows: usize, cols: usize },
}

impl ArrayGeometry {
    pub fn len(&self) -> usize {
        match *self {
            ArrayGeometry::Linear { elements } => elements,
            ArrayGeometry::Planar { rows, cols } => rows * cols,
        }
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// Lattice position of element `index` (before spacing is applied).
    pub fn position(&self, index: usize) -> [f64; 3] {
        match *self {
            ArrayGeometry::Linear { .. } => [index as f64, 0.0, 0.0],
            ArrayGeometry::Planar { cols, .. } => {
                [(index % cols) as f64, (index / cols) as f64, 0.0]
            }
        }
    }
}

/// Plane-wave response `exp(j 2π spacing ⟨position, direction⟩)` per element.
///
/// `spacing` is in wavelengths; `direction` must be a unit vector.
pub fn steering_vector(
    geometry: ArrayGeometry,
    direction: [f64; 3],
    spacing: f64,
) -> Result<DVector<C64>> {
    let norm = direction.iter().map(|d| d * d).sum::<f64>().sqrt();
    if (norm - 1.0).abs() > 1e-9 {
        return Err(Error::contract(format!(
            "steering direction must be a unit vector, |d| = {norm}"
        )));
    }
    Ok(DVector::from_fn(geometry.len(), |i, _| {
        let p = geometry.position(i);
        let proj = p[0] * direction[0] + p[1] * direction[1] + p[2] * direction[2];
        C64::from_polar(1.0, 2.0 * PI * spacing * proj)
    }))
}
