//! Stream-function velocities, momentum residuals and the per-point loss
//! terms with their cotangents on the field jets.

use crate::error::{Error, Result};
use crate::jet::{slot, Jet, MAX_LEN};

/// Pressure and stream function at one point.
#[derive(Clone, Copy, Debug)]
pub struct FieldSample {
    pub p: Jet,
    pub psi: Jet,
}

/// `u = ψ_y`, `v = -ψ_x` and the derivatives the momentum equations use.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Velocities {
    pub u: f64,
    pub v: f64,
    pub u_x: f64,
    pub u_y: f64,
    pub u_xx: f64,
    pub u_yy: f64,
    pub v_x: f64,
    pub v_y: f64,
    pub v_xx: f64,
    pub v_yy: f64,
}

/// Read velocities off the ψ jet; needs order 3.
pub fn velocities(sample: &FieldSample) -> Result<Velocities> {
    velocities_of(&sample.psi)
}

pub(crate) fn velocities_of(psi: &Jet) -> Result<Velocities> {
    if psi.order() < 3 {
        return Err(Error::Usage(format!(
            "velocity derivatives need a stream-function jet of order 3, got {}",
            psi.order()
        )));
    }
    let d = |a, b| psi.coeffs()[slot(a, b)];
    Ok(Velocities {
        u: d(0, 1),
        v: -d(1, 0),
        u_x: d(1, 1),
        u_y: d(0, 2),
        u_xx: d(2, 1),
        u_yy: d(0, 3),
        v_x: -d(2, 0),
        v_y: -d(1, 1),
        v_xx: -d(3, 0),
        v_yy: -d(1, 2),
    })
}

/// `(R_x, R_y)` of the steady incompressible momentum equations.
pub fn momentum_residuals(sample: &FieldSample, reynolds: f64) -> Result<(f64, f64)> {
    if sample.p.order() < 1 {
        return Err(Error::Usage("pressure jet needs order 1".into()));
    }
    let vel = velocities(sample)?;
    let (p_x, p_y) = (sample.p.coeffs()[slot(1, 0)], sample.p.coeffs()[slot(0, 1)]);
    Ok(residuals(&vel, p_x, p_y, 1.0 / reynolds))
}

fn residuals(w: &Velocities, p_x: f64, p_y: f64, nu: f64) -> (f64, f64) {
    (
        w.u * w.u_x + w.v * w.u_y + p_x - nu * (w.u_xx + w.u_yy),
        w.u * w.v_x + w.v * w.v_y + p_y - nu * (w.v_xx + w.v_yy),
    )
}

/// `(R_x² + R_y²)` at an interior point, scaled by `weight`, and its
/// cotangents on the ψ (order 3) and p (order 1) jets.
pub(crate) fn interior_term(psi: &Jet, p: &Jet, nu: f64, weight: f64) -> (f64, [f64; MAX_LEN], [f64; MAX_LEN]) {
    let w = velocities_of(psi).expect("interior ψ has order 3");
    let (p_x, p_y) = (p.coeffs()[slot(1, 0)], p.coeffs()[slot(0, 1)]);
    let (rx, ry) = residuals(&w, p_x, p_y, nu);
    let (gx, gy) = (2.0 * weight * rx, 2.0 * weight * ry);
    let mut cpsi = [0.0; MAX_LEN];
    // ∂R/∂(u, v, u_x, …) mapped through u = ψ_y, v = -ψ_x, …
    cpsi[slot(0, 1)] = gx * w.u_x + gy * w.v_x;
    cpsi[slot(1, 0)] = -(gx * w.u_y + gy * w.v_y);
    cpsi[slot(1, 1)] = gx * w.u - gy * w.v;
    cpsi[slot(0, 2)] = gx * w.v;
    cpsi[slot(2, 0)] = -gy * w.u;
    cpsi[slot(2, 1)] = -gx * nu;
    cpsi[slot(0, 3)] = -gx * nu;
    cpsi[slot(3, 0)] = gy * nu;
    cpsi[slot(1, 2)] = gy * nu;
    let mut cp = [0.0; MAX_LEN];
    cp[slot(1, 0)] = gx;
    cp[slot(0, 1)] = gy;
    (weight * (rx * rx + ry * ry), cpsi, cp)
}

/// `((u - u_b)² + v²)` at a boundary point, scaled by `weight`, and its
/// cotangent on the ψ jet (order ≥ 1).
pub(crate) fn boundary_term(psi: &Jet, u_b: f64, weight: f64) -> (f64, [f64; MAX_LEN]) {
    let u = psi.coeffs()[slot(0, 1)];
    let v = -psi.coeffs()[slot(1, 0)];
    let mut c = [0.0; MAX_LEN];
    c[slot(0, 1)] = 2.0 * weight * (u - u_b);
    c[slot(1, 0)] = -2.0 * weight * v;
    (weight * ((u - u_b).powi(2) + v * v), c)
}

/// `p²` scaled by `weight`, and its cotangent on the p jet.
pub(crate) fn reference_term(p: &Jet, weight: f64) -> (f64, [f64; MAX_LEN]) {
    let v = p.value();
    let mut c = [0.0; MAX_LEN];
    c[0] = 2.0 * weight * v;
    (weight * v * v, c)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::jet::{jet_var, Axis};

    fn var(v: f64, axis: Axis) -> Jet {
        jet_var(v, axis, 3).unwrap()
    }

    /// ψ = x²y at (x, y).
    fn x2y(x: f64, y: f64) -> Jet {
        let xj = var(x, Axis::X);
        xj * xj * var(y, Axis::Y)
    }

    #[test]
    fn bilinear_stream_function() {
        let psi = var(2.0, Axis::X) * var(3.0, Axis::Y);
        let s = FieldSample {
            p: Jet::zero(1),
            psi,
        };
        let w = velocities(&s).unwrap();
        assert_eq!((w.u, w.v), (2.0, -3.0));
        assert_eq!(w.u_x + w.v_y, 0.0);
    }

    #[test]
    fn manufactured_residuals() {
        let s = FieldSample {
            p: Jet::zero(1),
            psi: x2y(1.0, 1.0),
        };
        let w = velocities(&s).unwrap();
        assert_eq!((w.u, w.v, w.u_xx, w.u_yy), (1.0, -2.0, 2.0, 0.0));
        let (rx, ry) = momentum_residuals(&s, 10.0).unwrap();
        assert!((rx - 1.8).abs() < 1e-10 && (ry - 2.0).abs() < 1e-10);
    }

    #[test]
    fn trivial_fields_have_zero_residual() {
        let zero = FieldSample {
            p: Jet::zero(1),
            psi: Jet::zero(3),
        };
        assert_eq!(momentum_residuals(&zero, 10.0).unwrap(), (0.0, 0.0));
        let uniform = FieldSample {
            p: Jet::zero(1),
            psi: var(0.4, Axis::Y),
        };
        assert_eq!(momentum_residuals(&uniform, 10.0).unwrap(), (0.0, 0.0));
    }

    #[test]
    fn low_order_stream_function_rejected() {
        let s = FieldSample {
            p: Jet::zero(1),
            psi: Jet::zero(2),
        };
        assert!(matches!(velocities(&s), Err(Error::Usage(_))));
    }

    #[test]
    fn interior_cotangent_matches_finite_differences() {
        let psi = Jet::from_coeffs(&[0.3, -0.2, 0.5, 0.7, -0.4, 0.1, 0.9, -0.6, 0.25, 0.35]).unwrap();
        let p = Jet::from_coeffs(&[0.1, 0.45, -0.15]).unwrap();
        let nu = 0.1;
        let (_, cpsi, cp) = interior_term(&psi, &p, nu, 0.5);
        let mut all: Vec<f64> = psi.coeffs().to_vec();
        all.extend_from_slice(p.coeffs());
        let f = |t: &[f64]| {
            let psi = Jet::from_coeffs(&t[..10]).unwrap();
            let p = Jet::from_coeffs(&t[10..]).unwrap();
            interior_term(&psi, &p, nu, 0.5).0
        };
        let fd = fdcheck::gradient(&f, &all, 1e-6);
        let mut got = cpsi.to_vec();
        got.extend_from_slice(&cp[..3]);
        assert!(fdcheck::first_mismatch(&got, &fd, 1e-7).is_none(), "{got:?} vs {fd:?}");
    }
}
