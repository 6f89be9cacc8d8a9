//! Double-couple point sources: focal mechanism, moment tensor, source-time
//! function and the homogeneous full-space synthesizer.
//!
//! Coordinates are geographic with `x` north, `y` east and `z` down.

mod fullspace;
mod stf;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub use fullspace::{
    synth_fullspace, synth_fullspace_terms, FieldTerms, Medium, PointSourceScenario, Position,
    ScenarioFile, Term,
};
pub use stf::{liu_stf, SourceTimeFunction, StfShape};

/// Strike, dip and rake in degrees.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawMechanism")]
pub struct FocalMechanism {
    strike: f64,
    dip: f64,
    rake: f64,
}

#[derive(Deserialize)]
struct RawMechanism {
    strike: f64,
    dip: f64,
    rake: f64,
}

impl TryFrom<RawMechanism> for FocalMechanism {
    type Error = Error;

    fn try_from(r: RawMechanism) -> Result<Self> {
        FocalMechanism::new(r.strike, r.dip, r.rake)
    }
}

impl FocalMechanism {
    /// Strike is wrapped into [0, 360); dip must lie in [0, 90] and rake in
    /// (-180, 180].
    pub fn new(strike: f64, dip: f64, rake: f64) -> Result<Self> {
        if !(strike.is_finite() && dip.is_finite() && rake.is_finite()) {
            return Err(Error::InvalidParameter("focal angles must be finite".into()));
        }
        if !(0.0..=90.0).contains(&dip) {
            return Err(Error::InvalidParameter(format!(
                "dip must lie in [0, 90] degrees, got {dip}"
            )));
        }
        if !(rake > -180.0 && rake <= 180.0) {
            return Err(Error::InvalidParameter(format!(
                "rake must lie in (-180, 180] degrees, got {rake}"
            )));
        }
        Ok(Self {
            strike: strike.rem_euclid(360.0),
            dip,
            rake,
        })
    }

    pub fn strike(&self) -> f64 {
        self.strike
    }

    pub fn dip(&self) -> f64 {
        self.dip
    }

    pub fn rake(&self) -> f64 {
        self.rake
    }

    /// Unit fault normal (pointing into the hanging wall, upward for dip < 90).
    pub fn fault_normal(&self) -> [f64; 3] {
        let (phi, delta) = (self.strike.to_radians(), self.dip.to_radians());
        [-delta.sin() * phi.sin(), delta.sin() * phi.cos(), -delta.cos()]
    }

    /// Unit slip vector of the hanging wall relative to the footwall.
    pub fn slip_vector(&self) -> [f64; 3] {
        let (phi, delta, lambda) = (
            self.strike.to_radians(),
            self.dip.to_radians(),
            self.rake.to_radians(),
        );
        [
            lambda.cos() * phi.cos() + delta.cos() * lambda.sin() * phi.sin(),
            lambda.cos() * phi.sin() - delta.cos() * lambda.sin() * phi.cos(),
            -lambda.sin() * delta.sin(),
        ]
    }
}

/// Symmetric moment tensor in N·m.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MomentTensor {
    pub mxx: f64,
    pub myy: f64,
    pub mzz: f64,
    pub mxy: f64,
    pub mxz: f64,
    pub myz: f64,
}

impl MomentTensor {
    pub fn as_matrix(&self) -> [[f64; 3]; 3] {
        [
            [self.mxx, self.mxy, self.mxz],
            [self.mxy, self.myy, self.myz],
            [self.mxz, self.myz, self.mzz],
        ]
    }

    pub fn trace(&self) -> f64 {
        self.mxx + self.myy + self.mzz
    }

    pub fn scaled(&self, c: f64) -> Self {
        Self {
            mxx: self.mxx * c,
            myy: self.myy * c,
            mzz: self.mzz * c,
            mxy: self.mxy * c,
            mxz: self.mxz * c,
            myz: self.myz * c,
        }
    }

    /// Scalar moment `sqrt(Σ M_ij² / 2)`.
    pub fn scalar_moment(&self) -> f64 {
        let m = self.as_matrix();
        (m.iter().flatten().map(|v| v * v).sum::<f64>() / 2.0).sqrt()
    }
}

/// Double-couple tensor for a shear dislocation with the given mechanism.
pub fn moment_tensor(fm: &FocalMechanism, m0: f64) -> Result<MomentTensor> {
    if !(m0.is_finite() && m0 > 0.0) {
        return Err(Error::InvalidParameter(format!(
            "seismic moment must be > 0, got {m0}"
        )));
    }
    let (phi, delta, lambda) = (
        fm.strike.to_radians(),
        fm.dip.to_radians(),
        fm.rake.to_radians(),
    );
    let (sd, cd) = delta.sin_cos();
    let (s2d, c2d) = (2.0 * delta).sin_cos();
    let (sl, cl) = lambda.sin_cos();
    let (sp, cp) = phi.sin_cos();
    let (s2p, c2p) = (2.0 * phi).sin_cos();
    Ok(MomentTensor {
        mxx: -m0 * (sd * cl * s2p + s2d * sl * sp * sp),
        myy: m0 * (sd * cl * s2p - s2d * sl * cp * cp),
        mzz: m0 * s2d * sl,
        mxy: m0 * (sd * cl * c2p + 0.5 * s2d * sl * s2p),
        mxz: -m0 * (cd * cl * cp + c2d * sl * sp),
        myz: -m0 * (cd * cl * sp - c2d * sl * cp),
    })
}

/// Far-field radiation amplitudes for a unit-moment double couple along the
/// unit direction `gamma` (source to receiver): `(A_P, |A_S|)`.
pub fn radiation_pattern(fm: &FocalMechanism, gamma: [f64; 3]) -> Result<(f64, f64)> {
    let norm = gamma.iter().map(|g| g * g).sum::<f64>().sqrt();
    if !(norm > 0.0) {
        return Err(Error::InvalidParameter("direction must be non-zero".into()));
    }
    let g = gamma.map(|v| v / norm);
    let m = moment_tensor(fm, 1.0)?.as_matrix();
    let mg: [f64; 3] = std::array::from_fn(|i| (0..3).map(|j| m[i][j] * g[j]).sum());
    let a_p: f64 = (0..3).map(|i| g[i] * mg[i]).sum();
    let a_s = (0..3)
        .map(|i| (mg[i] - a_p * g[i]).powi(2))
        .sum::<f64>()
        .sqrt();
    Ok((a_p, a_s))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn pure_vertical_strike_slip() {
        let fm = FocalMechanism::new(0.0, 90.0, 0.0).unwrap();
        let m = moment_tensor(&fm, 1.0).unwrap();
        assert!((m.mxy - 1.0).abs() < 1e-15);
        for v in [m.mxx, m.myy, m.mzz, m.mxz, m.myz] {
            assert!(v.abs() < 1e-15, "{m:?}");
        }
    }

    #[test]
    fn reverse_fault_mzz() {
        let fm = FocalMechanism::new(45.0, 55.0, 90.0).unwrap();
        let m0 = 2.81e16;
        let m = moment_tensor(&fm, m0).unwrap();
        let want = m0 * 110f64.to_radians().sin();
        assert!(((m.mzz - want) / want).abs() < 1e-6);
        assert!((m.mzz - 2.641e16).abs() / 2.641e16 < 1e-3);
        assert!(m.trace().abs() < 1e-9 * m0);
    }

    #[test]
    fn tensor_equals_slip_normal_dyad() {
        // independent route: M = M0 (u n^T + n u^T)
        for &(s, d, r) in &[(0.0, 90.0, 0.0), (45.0, 55.0, 90.0), (123.0, 17.0, -64.0), (300.0, 80.0, 170.0)] {
            let fm = FocalMechanism::new(s, d, r).unwrap();
            let (u, n) = (fm.slip_vector(), fm.fault_normal());
            let m = moment_tensor(&fm, 1.0).unwrap().as_matrix();
            for i in 0..3 {
                for j in 0..3 {
                    let dyad = u[i] * n[j] + n[i] * u[j];
                    assert!((m[i][j] - dyad).abs() < 1e-12, "({s},{d},{r}) [{i}][{j}]");
                }
            }
        }
    }

    #[test]
    fn strike_wraps() {
        let a = FocalMechanism::new(45.0, 55.0, 90.0).unwrap();
        let b = FocalMechanism::new(405.0, 55.0, 90.0).unwrap();
        assert_eq!(a, b);
        assert_eq!(moment_tensor(&a, 1.0).unwrap(), moment_tensor(&b, 1.0).unwrap());
        assert!(FocalMechanism::new(0.0, 91.0, 0.0).is_err());
        assert!(FocalMechanism::new(0.0, 45.0, -180.0).is_err());
        assert!(FocalMechanism::new(0.0, 45.0, 180.0).is_ok());
    }

    #[test]
    fn radiation_of_strike_slip() {
        let fm = FocalMechanism::new(0.0, 90.0, 0.0).unwrap();
        let (ap, as_) = radiation_pattern(&fm, [1.0, 0.0, 0.0]).unwrap();
        assert!(ap.abs() < 1e-15);
        assert!((as_ - 1.0).abs() < 1e-12);
        let h = 0.5f64.sqrt();
        let (ap, _) = radiation_pattern(&fm, [h, h, 0.0]).unwrap();
        assert!((ap.abs() - 1.0).abs() < 1e-12);
        let (ap, as_) = radiation_pattern(&fm, [0.3, 0.5, 0.2]).unwrap();
        assert!(ap * ap + as_ * as_ > 0.0);
        assert!(radiation_pattern(&fm, [0.0; 3]).is_err());
    }

    #[test]
    fn rejects_bad_moment() {
        let fm = FocalMechanism::new(0.0, 45.0, 0.0).unwrap();
        assert!(moment_tensor(&fm, 0.0).is_err());
        assert!(moment_tensor(&fm, f64::NAN).is_err());
    }
}
