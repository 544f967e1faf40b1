//! Radius and shape data of the geodesic-sphere picture, and geodesics of
//! the Berger 3-sphere `S^3_{C,tau}` through `o = (0, 1)`.
//!
//! A unit vector `a1 Y_1 + a2 J_1 Y_1 + a3 X^tau` generates the geodesic
//! `s -> exp(s (a1 Y_1 + a2 J_1 Y_1 + a3 X^tau)) o`, where
//! `X^tau = (X_1 + (1 - 2 tau) Z)/sqrt(tau)` and `Z = diag(i, 0)` spans k.
//! The closed form below writes that orbit as a sum of two circles,
//! `gamma(s) = A e^{i w1 s} + B e^{i w2 s}` with `w2 - w1 = 2P`.

use nalgebra::{Complex, Matrix2, Vector2};
use serde::Serialize;

use crate::error::{GeometryError, Result};

pub type C64 = Complex<f64>;

/// Which rank one symmetric space the sphere sits in as a geodesic sphere.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum Branch {
    Compact,
    NonCompact,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct Radius {
    pub t: f64,
    /// Factor relating the geodesic sphere metric to the tau-metric.
    pub homothety: f64,
    pub branch: Branch,
}

fn check_tau(tau: f64) -> Result<()> {
    if !(tau.is_finite() && tau > 0.0) {
        return Err(GeometryError::InvalidTau(tau));
    }
    if tau == 1.0 {
        return Err(GeometryError::RoundSphere("no ambient geodesic sphere"));
    }
    Ok(())
}

pub fn tau_to_radius(tau: f64) -> Result<Radius> {
    check_tau(tau)?;
    Ok(if tau < 1.0 {
        Radius { t: tau.sqrt().acos(), homothety: (1.0 - tau).sqrt(), branch: Branch::Compact }
    } else {
        Radius { t: tau.sqrt().acosh(), homothety: (tau - 1.0).sqrt(), branch: Branch::NonCompact }
    })
}

pub fn radius_to_tau(t: f64, branch: Branch) -> f64 {
    match branch {
        Branch::Compact => t.cos().powi(2),
        Branch::NonCompact => t.cosh().powi(2),
    }
}

/// Principal curvatures `(beta1, beta2)` of the geodesic sphere on the
/// vertical and horizontal distributions.
pub fn shape_eigs(tau: f64) -> Result<(f64, f64)> {
    let r = tau_to_radius(tau)?;
    let t = r.t;
    Ok(match r.branch {
        Branch::Compact => (-2.0 / (2.0 * t).tan(), -1.0 / t.tan()),
        Branch::NonCompact => (-2.0 / (2.0 * t).tanh(), -1.0 / t.tanh()),
    })
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct GeodesicParams {
    pub alpha1: f64,
    pub alpha2: f64,
    pub alpha3: f64,
    pub tau: f64,
}

impl GeodesicParams {
    pub fn new(alpha1: f64, alpha2: f64, alpha3: f64, tau: f64) -> Result<Self> {
        check_tau(tau)?;
        let norm2 = alpha1 * alpha1 + alpha2 * alpha2 + alpha3 * alpha3;
        if !norm2.is_finite() || (norm2 - 1.0).abs() > 1e-12 {
            return Err(GeometryError::InvalidGeodesic(format!(
                "coefficients must have unit norm, got |alpha|^2 = {norm2}"
            )));
        }
        Ok(GeodesicParams { alpha1, alpha2, alpha3, tau })
    }

    /// Normalize an arbitrary nonzero coefficient vector.
    pub fn normalized(alpha1: f64, alpha2: f64, alpha3: f64, tau: f64) -> Result<Self> {
        let n = (alpha1 * alpha1 + alpha2 * alpha2 + alpha3 * alpha3).sqrt();
        if n == 0.0 || !n.is_finite() {
            return Err(GeometryError::ZeroVector);
        }
        Self::new(alpha1 / n, alpha2 / n, alpha3 / n, tau)
    }

    pub fn slope(&self) -> f64 {
        let h = (self.alpha1 * self.alpha1 + self.alpha2 * self.alpha2).sqrt();
        if h == 0.0 {
            f64::INFINITY
        } else {
            self.alpha3.abs() / h
        }
    }

    fn p(&self) -> f64 {
        (self.alpha1 * self.alpha1 + self.alpha2 * self.alpha2 + self.tau * self.alpha3 * self.alpha3).sqrt()
    }
}

/// Frequencies and amplitudes of the two circles making up the geodesic.
#[derive(Clone, Copy, Debug)]
pub struct Modes {
    pub w1: f64,
    pub w2: f64,
    pub a: Vector2<C64>,
    pub b: Vector2<C64>,
}

pub fn modes(g: &GeodesicParams) -> Modes {
    let p = g.p();
    let st = g.tau.sqrt();
    let w1 = -(p * st + (g.tau - 1.0) * g.alpha3) / st;
    let u = C64::new(g.alpha2, -g.alpha1);
    let s = 1.0 / (2.0 * p);
    Modes {
        w1,
        w2: w1 + 2.0 * p,
        a: Vector2::new(-u * s, C64::from(p - st * g.alpha3) * s),
        b: Vector2::new(u * s, C64::from(p + st * g.alpha3) * s),
    }
}

/// The closed-form geodesic in `C^2`.
pub fn berger_geodesic_point(g: &GeodesicParams, s: f64) -> Vector2<C64> {
    let p = g.p();
    let st = g.tau.sqrt();
    let q = C64::from_polar(1.0 / (2.0 * p), -s * (p * st + (g.tau - 1.0) * g.alpha3) / st);
    let e = C64::from_polar(1.0, 2.0 * p * s);
    let one = C64::from(1.0);
    let u = C64::new(g.alpha2, -g.alpha1);
    Vector2::new(q * (e - one) * u, q * ((e + one) * p + (e - one) * (st * g.alpha3)))
}

pub fn berger_geodesic_velocity(g: &GeodesicParams, s: f64) -> Vector2<C64> {
    let m = modes(g);
    let i = C64::i();
    m.a * (i * m.w1 * C64::from_polar(1.0, m.w1 * s)) + m.b * (i * m.w2 * C64::from_polar(1.0, m.w2 * s))
}

/// `(re z1, im z1, re z2, im z2)`.
pub fn to_reals(z: &Vector2<C64>) -> [f64; 4] {
    [z[0].re, z[0].im, z[1].re, z[1].im]
}

/// The generator `a1 Y_1 + a2 J_1 Y_1 + a3 X^tau` as a 2x2 complex matrix.
pub fn generator(g: &GeodesicParams) -> Matrix2<C64> {
    let z = C64::from(0.0);
    let one = C64::from(1.0);
    let i = C64::i();
    let y = Matrix2::new(z, one, -one, z);
    let jy = Matrix2::new(z, i, i, z);
    let x1 = Matrix2::new(z, z, z, i);
    let zk = Matrix2::new(i, z, z, z);
    let xt = (x1 + zk * C64::from(1.0 - 2.0 * g.tau)) / C64::from(g.tau.sqrt());
    y * C64::from(g.alpha1) + jy * C64::from(g.alpha2) + xt * C64::from(g.alpha3)
}

/// The orbit of `o` under the one-parameter group, by matrix exponential.
pub fn orbit_oracle(g: &GeodesicParams, s: f64) -> Vector2<C64> {
    let m = (generator(g) * C64::from(s)).exp();
    m * Vector2::new(C64::from(0.0), C64::from(1.0))
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct ClosedGeodesic {
    pub j: i64,
    pub k: i64,
    pub alpha3: f64,
    pub slope: f64,
    /// `pi |j| / P`, after which both circles have turned a whole number of times.
    pub period: f64,
}

/// Solutions of the closing condition `w1 = 2Pk/j`, one per distinct slope,
/// keeping the shortest period. Sorted by slope.
pub fn closed_geodesics(tau: f64, jmax: i64, kmax: i64) -> Result<Vec<ClosedGeodesic>> {
    check_tau(tau)?;
    if jmax < 1 || kmax < 1 {
        return Err(GeometryError::InvalidGeodesic("jmax and kmax must be at least 1".into()));
    }
    let mut out: Vec<ClosedGeodesic> = Vec::new();
    for j in -jmax..=jmax {
        if j == 0 {
            continue;
        }
        for k in -kmax..=kmax {
            let c = tau.sqrt() * (j + 2 * k) as f64 / (j as f64 * (1.0 - tau));
            let denom = 1.0 + c * c * (1.0 - tau);
            if denom <= 0.0 {
                continue;
            }
            let a3sq = c * c / denom;
            if a3sq >= 1.0 {
                continue;
            }
            let alpha3 = a3sq.sqrt().copysign(c);
            let p = (1.0 - (1.0 - tau) * a3sq).sqrt();
            out.push(ClosedGeodesic {
                j,
                k,
                alpha3,
                slope: (a3sq / (1.0 - a3sq)).sqrt(),
                period: std::f64::consts::PI * j.unsigned_abs() as f64 / p,
            });
        }
    }
    out.sort_by(|a, b| a.slope.total_cmp(&b.slope).then(a.period.total_cmp(&b.period)));
    let mut dedup: Vec<ClosedGeodesic> = Vec::new();
    for g in out {
        match dedup.last() {
            Some(last) if (g.slope - last.slope).abs() <= 1e-12 => {}
            _ => dedup.push(g),
        }
    }
    Ok(dedup)
}

pub fn closed_geodesic_slopes(tau: f64, jmax: i64, kmax: i64) -> Result<Vec<f64>> {
    Ok(closed_geodesics(tau, jmax, kmax)?.into_iter().map(|g| g.slope).collect())
}

/// Position and velocity mismatch after one period.
pub fn closure_defect(g: &ClosedGeodesic, tau: f64) -> Result<f64> {
    let h = (1.0 - g.alpha3 * g.alpha3).sqrt();
    let params = GeodesicParams::new(h, 0.0, g.alpha3, tau)?;
    let dp = (berger_geodesic_point(&params, g.period) - berger_geodesic_point(&params, 0.0)).norm();
    let dv = (berger_geodesic_velocity(&params, g.period) - berger_geodesic_velocity(&params, 0.0)).norm();
    Ok(dp.max(dv))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::liealg::{AlgebraElement, Family, Presentation};
    use nalgebra::DMatrix;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn random_params(rng: &mut ChaCha8Rng, tau: f64) -> GeodesicParams {
        let a: [f64; 3] = std::array::from_fn(|_| rng.random_range(-1.0..1.0));
        GeodesicParams::normalized(a[0], a[1], a[2], tau).unwrap()
    }

    #[test]
    fn radius_round_trip() {
        assert!((tau_to_radius(0.5).unwrap().t - std::f64::consts::FRAC_PI_4).abs() < 1e-15);
        assert!(tau_to_radius(1.0 - 1e-12).unwrap().t < 1e-5);
        for i in 1..40 {
            let tau = i as f64 * 0.07;
            if (tau - 1.0).abs() < 1e-9 {
                continue;
            }
            let r = tau_to_radius(tau).unwrap();
            assert!((radius_to_tau(r.t, r.branch) - tau).abs() < 1e-14);
        }
        assert!(matches!(tau_to_radius(1.0), Err(GeometryError::RoundSphere(_))));
        assert!(matches!(tau_to_radius(-0.1), Err(GeometryError::InvalidTau(_))));
    }

    #[test]
    fn shape_eigenvalues() {
        let (b1, b2) = shape_eigs(0.25).unwrap();
        assert!((b1 - 2.0 / 3f64.sqrt()).abs() < 1e-14);
        assert!((b2 + 1.0 / 3f64.sqrt()).abs() < 1e-14);
        assert!(shape_eigs(0.5).unwrap().0.abs() < 1e-15);
        for tau in [0.6, 0.9, 1.5, 3.0] {
            let (b1, b2) = shape_eigs(tau).unwrap();
            assert!(b1 < 0.0 && b2 < 0.0 && b1 != b2);
        }
        // closed forms on the compact branch
        for tau in [0.1, 0.3, 0.7] {
            let (b1, b2) = shape_eigs(tau).unwrap();
            assert!((b1 - (1.0 - 2.0 * tau) / (tau * (1.0 - tau)).sqrt()).abs() < 1e-13);
            assert!((b2 + (tau / (1.0 - tau)).sqrt()).abs() < 1e-13);
        }
    }

    #[test]
    fn base_point_and_vertical_case() {
        let g = GeodesicParams::new(0.6, 0.0, 0.8, 0.3).unwrap();
        let z = berger_geodesic_point(&g, 0.0);
        assert!((z - Vector2::new(C64::from(0.0), C64::from(1.0))).norm() < 1e-15);
        let v = GeodesicParams::new(0.0, 0.0, 1.0, 0.3).unwrap();
        let z = berger_geodesic_point(&v, 1.0);
        let want = C64::from_polar(1.0, 1.0 / 0.3f64.sqrt());
        assert!(z[0].norm() < 1e-15 && (z[1] - want).norm() < 1e-14);
        let v = GeodesicParams::new(0.0, 0.0, -1.0, 0.3).unwrap();
        assert!((berger_geodesic_point(&v, 1.0)[1] - want.conj()).norm() < 1e-14);
    }

    #[test]
    fn formula_matches_orbit() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for tau in [0.3, 2.0] {
            for _ in 0..5 {
                let g = random_params(&mut rng, tau);
                for k in 0..=40 {
                    let s = k as f64 * 0.5;
                    let d = (berger_geodesic_point(&g, s) - orbit_oracle(&g, s)).norm();
                    assert!(d < 1e-9, "tau {tau} s {s}: {d}");
                    assert!((berger_geodesic_point(&g, s).norm() - 1.0).abs() < 1e-12);
                }
            }
        }
    }

    #[test]
    fn modes_reproduce_formula() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let g = random_params(&mut rng, 0.4);
        let m = modes(&g);
        for s in [0.0, 0.3, 7.1] {
            let z = m.a * C64::from_polar(1.0, m.w1 * s) + m.b * C64::from_polar(1.0, m.w2 * s);
            assert!((z - berger_geodesic_point(&g, s)).norm() < 1e-13);
        }
    }

    #[test]
    fn constant_speed() {
        // Tau-metric speed of a curve in S^3: split the Euclidean velocity into
        // the Hopf direction i*z and its complement and weight the first by tau.
        let mut rng = ChaCha8Rng::seed_from_u64(8);
        let g = random_params(&mut rng, 0.3);
        let speed = |s: f64| {
            let z = berger_geodesic_point(&g, s);
            let v = berger_geodesic_velocity(&g, s);
            let iz = z * C64::i();
            let vert = (iz[0].conj() * v[0] + iz[1].conj() * v[1]).re;
            let total = v.norm_squared();
            (g.tau * vert * vert + (total - vert * vert)).sqrt()
        };
        let s0 = speed(0.0);
        assert!((s0 - 1.0).abs() < 1e-12);
        for k in 0..=100 {
            assert!((speed(k as f64 * 0.1) - s0).abs() < 1e-8);
        }
    }

    #[test]
    fn x_tau_has_unit_length() {
        let tau = 0.3;
        let pres = Presentation::build(Family::C, 1, tau).unwrap();
        let g = GeodesicParams::new(0.0, 0.0, 1.0, tau).unwrap();
        let m = generator(&g);
        // realify with 2x2 blocks [[re, -im], [im, re]]
        let real = DMatrix::from_fn(4, 4, |r, c| {
            let z = m[(r / 2, c / 2)];
            match (r % 2, c % 2) {
                (0, 0) | (1, 1) => z.re,
                (1, 0) => z.im,
                _ => -z.im,
            }
        });
        let p = pres.project_p(&AlgebraElement::new(real)).unwrap();
        assert!((p.norm() - 1.0).abs() < 1e-14);
        assert!((p[0] - 1.0).abs() < 1e-14);
    }

    #[test]
    fn closed_slopes_close() {
        for tau in [0.3, 2.0] {
            let gs = closed_geodesics(tau, 6, 6).unwrap();
            assert!(!gs.is_empty());
            for g in &gs {
                assert!(closure_defect(g, tau).unwrap() < 1e-8, "{g:?}");
            }
            assert!(gs.windows(2).all(|w| w[0].slope < w[1].slope));
        }
        // j + 2k = 0 gives the horizontal great circles
        let gs = closed_geodesics(0.3, 2, 2).unwrap();
        assert_eq!(gs[0].slope, 0.0);
    }

    #[test]
    fn generic_slope_absent() {
        let slopes = closed_geodesic_slopes(0.3, 50, 50).unwrap();
        assert!(slopes.iter().all(|s| (s - 0.37).abs() > 1e-9));
    }

    #[test]
    fn rejects_bad_params() {
        assert!(GeodesicParams::new(1.0, 1.0, 0.0, 0.3).is_err());
        assert!(GeodesicParams::new(1.0, 0.0, 0.0, 1.0).is_err());
        assert!(closed_geodesics(0.3, 0, 3).is_err());
    }
}
