//! Layered crustal model and depth-dependent basin velocity profiles.

use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CrustalLayer {
    /// Depth of the layer top, m.
    pub depth_top: f64,
    /// Density, kg/m³.
    pub rho: f64,
    pub vp: f64,
    pub vs: f64,
    pub qp: f64,
    pub qs: f64,
}

impl CrustalLayer {
    fn validate(&self) -> Result<()> {
        let ok = self.vp > self.vs
            && self.vs > 0.0
            && self.rho > 0.0
            && self.qp > 0.0
            && self.qs > 0.0
            && self.depth_top >= 0.0;
        if !ok {
            return Err(Error::InvalidParameter(format!(
                "invalid crustal layer at depth {}: need vp > vs > 0, rho > 0, q > 0",
                self.depth_top
            )));
        }
        Ok(())
    }
}

/// Ordered stack of layers, shallowest first.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "Vec<CrustalLayer>", into = "Vec<CrustalLayer>")]
pub struct CrustalModel {
    layers: Vec<CrustalLayer>,
}

const fn layer(depth_top: f64, rho: f64, vp: f64, vs: f64) -> CrustalLayer {
    CrustalLayer {
        depth_top,
        rho,
        vp,
        vs,
        qp: 400.0,
        qs: 180.0,
    }
}

/// Regional crustal bedrock model shipped as the default.
///
/// The 1197 m row (Vp = 1967 m/s) is a low-velocity layer and is kept
/// unchanged.
pub const DEFAULT_LAYERS: [CrustalLayer; 7] = [
    layer(0.0, 2500.0, 3366.0, 2047.0),
    layer(628.0, 2600.0, 5995.0, 3645.0),
    layer(1197.0, 2300.0, 1967.0, 1200.0),
    layer(1416.0, 2500.0, 3831.0, 2291.0),
    layer(2026.0, 2500.0, 3908.0, 2314.0),
    layer(2194.0, 2600.0, 5819.0, 3457.0),
    layer(5956.0, 2600.0, 5951.0, 3616.0),
];

impl CrustalModel {
    pub fn new(layers: Vec<CrustalLayer>) -> Result<Self> {
        if layers.is_empty() {
            return Err(Error::InvalidParameter("crustal model has no layers".into()));
        }
        if layers[0].depth_top != 0.0 {
            return Err(Error::InvalidParameter(
                "first crustal layer must start at depth 0".into(),
            ));
        }
        for l in &layers {
            l.validate()?;
        }
        if layers.windows(2).any(|w| w[1].depth_top <= w[0].depth_top) {
            return Err(Error::InvalidParameter(
                "layer tops must be strictly increasing".into(),
            ));
        }
        Ok(Self { layers })
    }

    pub fn layers(&self) -> &[CrustalLayer] {
        &self.layers
    }

    /// Layer containing `depth`: the one with the greatest top not below it.
    pub fn layer_at(&self, depth: f64) -> Result<&CrustalLayer> {
        if !(depth >= 0.0) {
            return Err(Error::InvalidParameter(format!(
                "depth must be >= 0, got {depth}"
            )));
        }
        let idx = self.layers.partition_point(|l| l.depth_top <= depth);
        Ok(&self.layers[idx - 1])
    }

    /// Reads a JSON array of layers.
    pub fn from_json_file(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)?;
        serde_json::from_str(&text).map_err(|e| Error::format(path, e.to_string()))
    }
}

impl Default for CrustalModel {
    fn default() -> Self {
        Self {
            layers: DEFAULT_LAYERS.to_vec(),
        }
    }
}

impl TryFrom<Vec<CrustalLayer>> for CrustalModel {
    type Error = Error;

    fn try_from(layers: Vec<CrustalLayer>) -> Result<Self> {
        CrustalModel::new(layers)
    }
}

impl From<CrustalModel> for Vec<CrustalLayer> {
    fn from(m: CrustalModel) -> Self {
        m.layers
    }
}

/// Sediment velocities growing with the square root of depth:
/// `v(z) = v0 + coef · z^exponent`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BasinProfile {
    pub vs0: f64,
    pub vs_coef: f64,
    pub vp0: f64,
    pub vp_coef: f64,
    pub exponent: f64,
}

impl Default for BasinProfile {
    fn default() -> Self {
        Self {
            vs0: 300.0,
            vs_coef: 53.7,
            vp0: 550.0,
            vp_coef: 78.3,
            exponent: 0.5,
        }
    }
}

impl BasinProfile {
    pub fn vs(&self, z: f64) -> Result<f64> {
        check_depth(z)?;
        Ok(self.vs0 + self.vs_coef * z.powf(self.exponent))
    }

    pub fn vp(&self, z: f64) -> Result<f64> {
        check_depth(z)?;
        Ok(self.vp0 + self.vp_coef * z.powf(self.exponent))
    }
}

fn check_depth(z: f64) -> Result<()> {
    if !(z >= 0.0) || !z.is_finite() {
        return Err(Error::InvalidParameter(format!(
            "depth must be finite and >= 0, got {z}"
        )));
    }
    Ok(())
}

/// Basin S-wave velocity at depth `z` (m), default profile.
pub fn vs_basin(z: f64) -> Result<f64> {
    BasinProfile::default().vs(z)
}

/// Basin P-wave velocity at depth `z` (m), default profile.
pub fn vp_basin(z: f64) -> Result<f64> {
    BasinProfile::default().vp(z)
}
