//! Closed-form values of D and R on basis vectors, and the Jacobi spectra of
//! unit vertical and horizontal vectors, for checking the curvature model.

use serde::Serialize;

use crate::curvature::{CurvatureModel, SpectrumPair};
use crate::error::Result;
use crate::liealg::{Family, PVector, Presentation};
use crate::tolerances;

#[derive(Clone, Debug, Serialize)]
pub struct Identity {
    pub name: String,
    pub expected: Vec<f64>,
    pub actual: Vec<f64>,
    pub residual: f64,
}

struct Builder<'a> {
    model: &'a CurvatureModel,
    out: Vec<Identity>,
}

impl Builder<'_> {
    fn push(&mut self, name: String, actual: PVector, expected: PVector) {
        let residual = (&actual - &expected).norm();
        self.out.push(Identity {
            name,
            expected: expected.iter().copied().collect(),
            actual: actual.iter().copied().collect(),
            residual,
        });
    }

    fn d(&mut self, name: String, x: &PVector, y: &PVector, expected: PVector) {
        let a = self.model.d(x, y);
        self.push(name, a, expected);
    }

    fn r(&mut self, name: String, x: &PVector, y: &PVector, z: &PVector, expected: PVector) {
        let a = self.model.r(x, y, z);
        self.push(name, a, expected);
    }
}

/// Oriented triples `(i, j, k)` with `J_j J_i = J_k`, all rotations included.
fn oriented_triples(pres: &Presentation) -> Result<Vec<[usize; 3]>> {
    let lines = match pres.family() {
        Family::C => return Ok(vec![]),
        Family::H => vec![[1, 2, 3]],
        Family::O => pres.derive_fano_table()?,
    };
    Ok(lines
        .into_iter()
        .flat_map(|[a, b, c]| [[a, b, c], [b, c, a], [c, a, b]])
        .collect())
}

/// Evaluate every closed-form identity available for the presentation.
///
/// X_i are the unscaled vertical generators, Y = Y_1 and, when n allows,
/// Z = Y_2 and W = Y_3 are horizontal vectors on mutually orthogonal
/// F-lines.
pub fn curvature_identities(model: &CurvatureModel) -> Result<Vec<Identity>> {
    let pres = model.presentation();
    let tau = pres.tau();
    let m = pres.dim_p1();
    let dim = pres.dim();
    let zero = PVector::zeros(dim);
    let x: Vec<PVector> = (1..=m).map(|i| pres.x_vec(i)).collect::<Result<_>>()?;
    let y = pres.y_vec(1)?;
    let jy: Vec<PVector> = (1..=m).map(|i| pres.apply_j(i, &y)).collect::<Result<_>>()?;
    let triples = oriented_triples(pres)?;
    let mut b = Builder { model, out: Vec::new() };

    if pres.family() == Family::O {
        for i in 0..m {
            let s = i + 1;
            b.d(format!("D_Y1 X{s} = 2 tau J{s}Y1"), &y, &x[i], &jy[i] * (2.0 * tau));
            b.d(format!("D_X{s} Y1 = (2 tau - 1) J{s}Y1"), &x[i], &y, &jy[i] * (2.0 * tau - 1.0));
            b.d(format!("D_Y1 J{s}Y1 = -X{s}/2"), &y, &jy[i], &x[i] * -0.5);
            b.r(format!("R(X{s},Y1)Y1 = tau X{s}"), &x[i], &y, &y, &x[i] * tau);
            b.r(format!("R(X{s},Y1)X{s} = -4 tau^2 Y1"), &x[i], &y, &x[i], &y * (-4.0 * tau * tau));
            b.r(format!("R(X{s},Y1)J{s}Y1 = 0"), &x[i], &y, &jy[i], zero.clone());
            b.r(format!("R(Y1,J{s}Y1)Y1 = (3 tau - 4) J{s}Y1"), &y, &jy[i], &y, &jy[i] * (3.0 * tau - 4.0));
            b.r(format!("R(Y1,J{s}Y1)J{s}Y1 = (4 - 3 tau) Y1"), &y, &jy[i], &jy[i], &y * (4.0 - 3.0 * tau));
            b.r(format!("R(Y1,J{s}Y1)X{s} = 0"), &y, &jy[i], &x[i], zero.clone());
        }
        for &[i, j, k] in &triples {
            let (xi, xj, xk) = (&x[i - 1], &x[j - 1], &x[k - 1]);
            let (jiy, jjy, jky) = (&jy[i - 1], &jy[j - 1], &jy[k - 1]);
            b.d(format!("D_J{i}Y1 J{j}Y1 = X{k}/2"), jiy, jjy, xk * 0.5);
            b.r(format!("R(X{i},X{j})Y1 = 8(tau - tau^2) J{k}Y1"), xi, xj, &y, jky * (8.0 * (tau - tau * tau)));
            b.r(format!("R(X{i},X{j})X{i} = -4 X{j}"), xi, xj, xi, xj * -4.0);
            b.r(format!("R(X{i},X{j})X{k} = 0"), xi, xj, xk, zero.clone());
            b.r(format!("R(X{i},Y1)X{j} = 4(tau - tau^2) J{k}Y1"), xi, &y, xj, jky * (4.0 * (tau - tau * tau)));
            b.r(format!("R(X{i},Y1)J{j}Y1 = (1 - tau) X{k}"), xi, &y, jjy, xk * (1.0 - tau));
            b.r(format!("R(Y1,J{i}Y1)X{j} = 2(1 - tau) X{k}"), &y, jiy, xj, xk * (2.0 * (1.0 - tau)));
            b.r(format!("R(Y1,J{i}Y1)J{j}Y1 = 0"), &y, jiy, jjy, zero.clone());
        }
        return Ok(b.out);
    }

    let z = if pres.n() >= 2 { Some(pres.y_vec(2)?) } else { None };
    let w = if pres.n() >= 3 { Some(pres.y_vec(3)?) } else { None };
    for i in 0..m {
        let s = i + 1;
        b.d(format!("D_Y X{s} = tau J{s}Y"), &y, &x[i], &jy[i] * tau);
        b.d(format!("D_X{s} Y = (tau - 1) J{s}Y"), &x[i], &y, &jy[i] * (tau - 1.0));
        b.d(format!("D_Y J{s}Y = -X{s}"), &y, &jy[i], &x[i] * -1.0);
        b.r(format!("R(X{s},Y)X{s} = -tau^2 Y"), &x[i], &y, &x[i], &y * (-tau * tau));
        b.r(format!("R(X{s},Y)Y = tau X{s}"), &x[i], &y, &y, &x[i] * tau);
        b.r(format!("R(X{s},Y)J{s}Y = 0"), &x[i], &y, &jy[i], zero.clone());
        b.r(format!("R(Y,J{s}Y)Y = (3 tau - 4) J{s}Y"), &y, &jy[i], &y, &jy[i] * (3.0 * tau - 4.0));
        b.r(format!("R(Y,J{s}Y)J{s}Y = (4 - 3 tau) Y"), &y, &jy[i], &jy[i], &y * (4.0 - 3.0 * tau));
        b.r(format!("R(Y,J{s}Y)X{s} = 0"), &y, &jy[i], &x[i], zero.clone());
        if let Some(z) = &z {
            let jz = pres.apply_j(s, z)?;
            b.r(format!("R(X{s},Y)Z = 0"), &x[i], &y, z, zero.clone());
            b.r(format!("R(Y,J{s}Y)Z = 2(tau - 1) J{s}Z"), &y, &jy[i], z, &jz * (2.0 * (tau - 1.0)));
            b.r(format!("R(Y,Z)J{s}Y = (tau - 1) J{s}Z"), &y, z, &jy[i], &jz * (tau - 1.0));
            b.r(format!("R(Y,Z)X{s} = 0"), &y, z, &x[i], zero.clone());
        }
    }
    if let Some(z) = &z {
        b.d("D_Y Z = 0".into(), &y, z, zero.clone());
        b.r("R(Y,Z)Y = -Z".into(), &y, z, &y, z * -1.0);
        if let Some(w) = &w {
            b.r("R(Y,Z)W = 0".into(), &y, z, w, zero.clone());
        }
    }
    for &[i, j, k] in &triples {
        let (xi, xj, xk) = (&x[i - 1], &x[j - 1], &x[k - 1]);
        let (jiy, jjy, jky) = (&jy[i - 1], &jy[j - 1], &jy[k - 1]);
        b.d(format!("D_J{i}Y J{j}Y = X{k}"), jiy, jjy, xk.clone());
        b.r(format!("R(X{i},X{j})Y = 2 tau(1 - tau) J{k}Y"), xi, xj, &y, jky * (2.0 * tau * (1.0 - tau)));
        b.r(format!("R(X{i},X{j})X{i} = -X{j}"), xi, xj, xi, xj * -1.0);
        b.r(format!("R(X{i},X{j})X{k} = 0"), xi, xj, xk, zero.clone());
        b.r(format!("R(X{i},Y)J{j}Y = (1 - tau) X{k}"), xi, &y, jjy, xk * (1.0 - tau));
        b.r(format!("R(X{i},Y)X{j} = tau(1 - tau) J{k}Y"), xi, &y, xj, jky * (tau * (1.0 - tau)));
        b.r(format!("R(Y,J{i}Y)X{j} = 2(1 - tau) X{k}"), &y, jiy, xj, xk * (2.0 * (1.0 - tau)));
        b.r(format!("R(Y,J{i}Y)J{j}Y = 0"), &y, jiy, jjy, zero.clone());
    }
    Ok(b.out)
}

/// Expected Jacobi spectra of unit vectors, split into the vertical and
/// horizontal blocks.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ExpectedJacobi {
    pub vertical_p1: Vec<SpectrumPair>,
    pub vertical_p2: Vec<SpectrumPair>,
    pub horizontal_p1: Vec<SpectrumPair>,
    pub horizontal_p2: Vec<SpectrumPair>,
}

fn merge(pairs: &[(f64, usize)]) -> Vec<SpectrumPair> {
    let mut v: Vec<SpectrumPair> = pairs.iter().copied().filter(|&(_, m)| m > 0).collect();
    v.sort_by(|a, b| a.0.total_cmp(&b.0));
    let mut out: Vec<SpectrumPair> = Vec::new();
    for (l, m) in v {
        match out.last_mut() {
            Some(last) if (last.0 - l).abs() <= tolerances::SPECTRUM_GROUPING => last.1 += m,
            _ => out.push((l, m)),
        }
    }
    out
}

/// Eigenvalues of `R_X` for unit vertical X and of `R_Y` for unit
/// horizontal Y, with multiplicities, as functions of tau and the sphere
/// dimension.
pub fn expected_jacobi(family: Family, n: usize, tau: f64) -> ExpectedJacobi {
    let f = family.dim_f();
    let sphere = match family {
        Family::O => 15,
        _ => f * (n + 1) - 1,
    };
    ExpectedJacobi {
        vertical_p1: merge(&[(0.0, 1), (1.0 / tau, f - 2)]),
        vertical_p2: merge(&[(tau, sphere + 1 - f)]),
        horizontal_p1: merge(&[(tau, f - 1)]),
        horizontal_p2: merge(&[(0.0, 1), (4.0 - 3.0 * tau, f - 1), (1.0, sphere + 1 - 2 * f)]),
    }
}

/// Both spectra as totals over p.
pub fn expected_full(e: &ExpectedJacobi) -> (Vec<SpectrumPair>, Vec<SpectrumPair>) {
    let cat = |a: &[SpectrumPair], b: &[SpectrumPair]| merge(&[a, b].concat());
    (cat(&e.vertical_p1, &e.vertical_p2), cat(&e.horizontal_p1, &e.horizontal_p2))
}

/// Largest eigenvalue deviation, or None when the multiplicity patterns
/// differ.
pub fn spectrum_deviation(expected: &[SpectrumPair], actual: &[SpectrumPair]) -> Option<f64> {
    if expected.len() != actual.len() {
        return None;
    }
    let mut worst: f64 = 0.0;
    for (e, a) in expected.iter().zip(actual) {
        if e.1 != a.1 {
            return None;
        }
        worst = worst.max((e.0 - a.0).abs());
    }
    Some(worst)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn check(f: Family, n: usize, tau: f64) -> usize {
        let m = CurvatureModel::new(Presentation::build(f, n, tau).unwrap());
        let ids = curvature_identities(&m).unwrap();
        for id in &ids {
            assert!(id.residual <= 1e-12, "{f} n={n} tau={tau}: {} residual {}", id.name, id.residual);
        }
        ids.len()
    }

    #[test]
    fn identities_hold() {
        for tau in [0.25, 0.5, 0.75, 1.5] {
            assert!(check(Family::C, 3, tau) > 10);
            assert!(check(Family::H, 3, tau) > 40);
            assert!(check(Family::O, 1, tau) > 200);
            check(Family::H, 1, tau);
            check(Family::C, 1, tau);
        }
    }

    #[test]
    fn fano_orientation_matters() {
        // the reversed orientation must fail, or the table is not testing anything
        let m = CurvatureModel::new(Presentation::build(Family::O, 1, 0.3).unwrap());
        let p = m.presentation();
        let [i, j, k] = p.derive_fano_table().unwrap()[0];
        let got = m.d(&p.apply_j(j, &p.y_vec(1).unwrap()).unwrap(), &p.apply_j(i, &p.y_vec(1).unwrap()).unwrap());
        let want = p.x_vec(k).unwrap() * 0.5;
        assert!((got + want).norm() < 1e-12);
    }

    #[test]
    fn jacobi_matches_table() {
        for (f, n, tau) in [
            (Family::C, 2, 0.3),
            (Family::H, 1, 0.25),
            (Family::H, 2, 0.6),
            (Family::O, 1, 0.25),
            (Family::O, 1, 1.2),
            (Family::C, 1, 1.0),
        ] {
            let m = CurvatureModel::new(Presentation::build(f, n, tau).unwrap());
            let e = expected_jacobi(f, n, tau);
            let p = m.presentation();
            let sv = m.jacobi_split_spectrum(&p.x_hat(1).unwrap()).unwrap();
            let sh = m.jacobi_split_spectrum(&p.y_vec(1).unwrap()).unwrap();
            for (want, got) in [
                (&e.vertical_p1, &sv.p1),
                (&e.vertical_p2, &sv.p2),
                (&e.horizontal_p1, &sh.p1),
                (&e.horizontal_p2, &sh.p2),
            ] {
                let d = spectrum_deviation(want, got).unwrap_or_else(|| panic!("{f} {tau}: {want:?} vs {got:?}"));
                assert!(d < 1e-10);
            }
            assert!(sv.coupling < 1e-12 && sh.coupling < 1e-12);
        }
    }

    #[test]
    fn round_sphere_spectrum() {
        let (v, h) = expected_full(&expected_jacobi(Family::H, 2, 1.0));
        assert_eq!(v, vec![(0.0, 1), (1.0, 10)]);
        assert_eq!(h, v);
    }
}
