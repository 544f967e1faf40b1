//! Tangent spaces of the known totally geodesic submanifolds through o,
//! with the invariants each is expected to have.

use serde::Serialize;

use crate::curvature::CurvatureModel;
use crate::error::{GeometryError, Result};
use crate::liealg::{Family, PVector, Presentation};
use crate::subspace::{self, CertResult, Subspace, Verdict};
use crate::tables::spectrum_deviation;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
pub enum FamilyTag {
    #[serde(rename = "WP_real_sphere")]
    WpRealSphere,
    #[serde(rename = "WP_complex_berger")]
    WpComplexBerger,
    #[serde(rename = "WP_quat_berger")]
    WpQuatBerger,
    #[serde(rename = "WP_berger_in_H")]
    WpBergerInH,
    #[serde(rename = "WP_inverse_sphere")]
    WpInverseSphere,
    #[serde(rename = "NWP_sphere_hat")]
    NwpSphereHat,
    #[serde(rename = "NWP_RP2")]
    NwpRp2,
    #[serde(rename = "NWP_RP3")]
    NwpRp3,
    #[serde(rename = "NWP_Vtheta")]
    NwpVtheta,
    #[serde(rename = "NWP_VthetaPrime")]
    NwpVthetaPrime,
}

impl FamilyTag {
    pub fn as_str(self) -> &'static str {
        match self {
            FamilyTag::WpRealSphere => "WP_real_sphere",
            FamilyTag::WpComplexBerger => "WP_complex_berger",
            FamilyTag::WpQuatBerger => "WP_quat_berger",
            FamilyTag::WpBergerInH => "WP_berger_in_H",
            FamilyTag::WpInverseSphere => "WP_inverse_sphere",
            FamilyTag::NwpSphereHat => "NWP_sphere_hat",
            FamilyTag::NwpRp2 => "NWP_RP2",
            FamilyTag::NwpRp3 => "NWP_RP3",
            FamilyTag::NwpVtheta => "NWP_Vtheta",
            FamilyTag::NwpVthetaPrime => "NWP_VthetaPrime",
        }
    }

    pub fn well_positioned(self) -> bool {
        self.as_str().starts_with("WP")
    }
}

impl std::fmt::Display for FamilyTag {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum ExpectedCurvature {
    /// Constant sectional curvature.
    Constant(f64),
    /// Isometric to the Hopf-Berger sphere of the given presentation.
    Berger { family: Family, n: usize, tau: f64 },
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Params {
    pub k: Option<usize>,
    pub tau: f64,
    pub theta: Option<f64>,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Expected {
    pub dim: usize,
    pub curvature: ExpectedCurvature,
    /// Common slope of all vectors; only the not well-positioned families
    /// have one.
    pub slope: Option<f64>,
    pub phi: Option<f64>,
    pub well_positioned: bool,
    /// `(dim V cap p1, dim V cap p2)` for split subspaces.
    pub split: Option<(usize, usize)>,
    pub tau_range: &'static str,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ClassificationRecord {
    pub tag: FamilyTag,
    pub label: String,
    pub params: Params,
    pub expected: Expected,
}

#[derive(Clone, Debug)]
pub struct CatalogEntry {
    pub record: ClassificationRecord,
    pub subspace: Subspace,
}

#[derive(Serialize)]
pub struct CatalogDumpItem<'a> {
    #[serde(flatten)]
    pub record: &'a ClassificationRecord,
    /// Frame vectors in the orthonormal p-basis.
    pub frame: Vec<Vec<f64>>,
}

pub fn dump(entries: &[CatalogEntry]) -> Vec<CatalogDumpItem<'_>> {
    entries
        .iter()
        .map(|e| CatalogDumpItem {
            record: &e.record,
            frame: e.subspace.vectors().iter().map(|v| v.iter().copied().collect()).collect(),
        })
        .collect()
}

const EXACT_TAU: f64 = 1e-12;

fn nwp_slope(tau: f64) -> f64 {
    (tau / (1.0 - 2.0 * tau)).sqrt()
}

struct Collector<'a> {
    pres: &'a Presentation,
    out: Vec<CatalogEntry>,
}

impl Collector<'_> {
    #[allow(clippy::too_many_arguments)]
    fn add(
        &mut self,
        tag: FamilyTag,
        label: String,
        k: Option<usize>,
        theta: Option<f64>,
        vs: Vec<PVector>,
        curvature: ExpectedCurvature,
        phi: Option<f64>,
        tau_range: &'static str,
    ) -> Result<()> {
        let sub = Subspace::from_vectors(self.pres, &vs)?;
        let wp = tag.well_positioned();
        let split = if wp {
            let (v, h) = sub.split(1e-9);
            Some((v.len(), h.len()))
        } else {
            None
        };
        let tau = self.pres.tau();
        self.out.push(CatalogEntry {
            record: ClassificationRecord {
                tag,
                label,
                params: Params { k, tau, theta },
                expected: Expected {
                    dim: sub.dim(),
                    curvature,
                    slope: if wp { None } else { Some(nwp_slope(tau)) },
                    phi,
                    well_positioned: wp,
                    split,
                    tau_range,
                },
            },
            subspace: sub,
        });
        Ok(())
    }
}

fn xs(pres: &Presentation, k: usize) -> Result<Vec<PVector>> {
    (1..=k).map(|i| pres.x_hat(i)).collect()
}

fn complex_lines(pres: &Presentation, k: usize) -> Result<Vec<PVector>> {
    let mut vs = Vec::new();
    for j in 1..=k {
        let y = pres.y_vec(j)?;
        vs.push(pres.apply_j(1, &y)?);
        vs.push(y);
    }
    Ok(vs)
}

fn quaternionic_lines(pres: &Presentation, k: usize) -> Result<Vec<PVector>> {
    let mut vs = Vec::new();
    for j in 1..=k {
        let y = pres.y_vec(j)?;
        for i in 1..=3 {
            vs.push(pres.apply_j(i, &y)?);
        }
        vs.push(y);
    }
    Ok(vs)
}

/// The Fano line through 1 and 2.
fn o_quaternionic_line(pres: &Presentation) -> Result<[usize; 3]> {
    let lines = pres.derive_fano_table()?;
    lines
        .into_iter()
        .find(|l| l.contains(&1) && l.contains(&2))
        .ok_or(GeometryError::FanoAmbiguous(1, 2))
}

/// Orthonormal frame `v_1 .. v_m` of the maximal not well-positioned sphere
/// through `Y_1`.
pub fn sigma_hat_frame(pres: &Presentation) -> Result<Vec<PVector>> {
    subspace::sigma_hat_vectors(pres, &pres.y_vec(1)?)
}

fn check_theta(theta: f64) -> Result<(f64, f64)> {
    if !(0.0..=1.0).contains(&theta) {
        return Err(GeometryError::InvalidTheta(theta));
    }
    let a = std::f64::consts::FRAC_PI_2 * theta;
    Ok((a.sin(), a.cos()))
}

/// `span{sin(pi theta/2) v1 + cos(pi theta/2) v4, v2, v3}`.
pub fn v_theta(pres: &Presentation, theta: f64) -> Result<Subspace> {
    if pres.family() != Family::O {
        return Err(GeometryError::RequiresOctonions);
    }
    let (s, c) = check_theta(theta)?;
    let v = sigma_hat_frame(pres)?;
    Subspace::from_vectors(pres, &[&v[0] * s + &v[3] * c, v[1].clone(), v[2].clone()])
}

/// `span{sin(pi theta/2) v1 + cos(pi theta/2) v2, v5, v6}`.
pub fn v_theta_prime(pres: &Presentation, theta: f64) -> Result<Subspace> {
    if pres.family() != Family::O {
        return Err(GeometryError::RequiresOctonions);
    }
    let (s, c) = check_theta(theta)?;
    let v = sigma_hat_frame(pres)?;
    Subspace::from_vectors(pres, &[&v[0] * s + &v[1] * c, v[4].clone(), v[5].clone()])
}

/// Spanning vectors of the projective plane through `X_2` and `X_3`; the
/// `Y_2` term drops out at tau = 1/3.
pub fn a2_vectors(pres: &Presentation) -> Result<Vec<PVector>> {
    let tau = pres.tau();
    let c = |m: f64| 1.0 - m * tau;
    let y1 = pres.y_vec(1)?;
    let u = pres.x_hat(2)? + &y1 * (c(2.0) / tau).sqrt();
    let mut v = pres.x_hat(3)? + pres.apply_j(1, &y1)? * (tau / c(2.0)).sqrt();
    if c(3.0) > EXACT_TAU {
        v += pres.y_vec(2)? * (c(1.0) * c(3.0) / (tau * c(2.0))).sqrt();
    }
    Ok(vec![u, v])
}

/// The plane above extended through `X_1`; the `Y_3` term drops out at
/// tau = 1/4.
pub fn a3_vectors(pres: &Presentation) -> Result<Vec<PVector>> {
    let tau = pres.tau();
    let c = |m: f64| 1.0 - m * tau;
    let mut vs = a2_vectors(pres)?;
    let y1 = pres.y_vec(1)?;
    let y2 = pres.y_vec(2)?;
    let mut w = pres.x_hat(1)? - pres.apply_j(3, &y1)? * (tau / c(2.0)).sqrt()
        + pres.apply_j(2, &y2)? * (tau * c(1.0).sqrt() / (tau * c(2.0) * c(3.0)).sqrt());
    if c(4.0) > EXACT_TAU {
        w -= pres.y_vec(3)? * (c(1.0) * c(4.0) / (c(3.0) * tau)).sqrt();
    }
    vs.push(w);
    Ok(vs)
}

/// All catalog subspaces valid for the presentation.
pub fn catalog_entries(pres: &Presentation) -> Result<Vec<CatalogEntry>> {
    let tau = pres.tau();
    let n = pres.n();
    let m = pres.dim_p1();
    let mut c = Collector { pres, out: Vec::new() };
    let all = "(0, inf)";

    match pres.family() {
        Family::C | Family::H => {
            for k in 2..=n {
                let vs = (1..=k).map(|j| pres.y_vec(j)).collect::<Result<_>>()?;
                c.add(FamilyTag::WpRealSphere, format!("S^{k}_1"), Some(k), None, vs, ExpectedCurvature::Constant(1.0), None, all)?;
            }
        }
        Family::O => {}
    }

    match pres.family() {
        Family::C => {
            for k in 1..n {
                let mut vs = xs(pres, 1)?;
                vs.extend(complex_lines(pres, k)?);
                let curv = ExpectedCurvature::Berger { family: Family::C, n: k, tau };
                c.add(FamilyTag::WpComplexBerger, format!("S^{}_{{C,tau}}", 2 * k + 1), Some(k), None, vs, curv, None, all)?;
            }
        }
        Family::H => {
            for k in 1..n {
                let mut vs = xs(pres, 3)?;
                vs.extend(quaternionic_lines(pres, k)?);
                let curv = ExpectedCurvature::Berger { family: Family::H, n: k, tau };
                c.add(FamilyTag::WpQuatBerger, format!("S^{}_{{H,tau}}", 4 * k + 3), Some(k), None, vs, curv, None, all)?;
            }
            for k in 1..=n {
                let mut vs = xs(pres, 1)?;
                vs.extend(complex_lines(pres, k)?);
                let curv = ExpectedCurvature::Berger { family: Family::C, n: k, tau };
                c.add(FamilyTag::WpBergerInH, format!("S^{}_{{C,tau}}", 2 * k + 1), Some(k), None, vs, curv, None, all)?;
            }
        }
        Family::O => {
            let [a, b, d] = o_quaternionic_line(pres)?;
            let y = pres.y_vec(1)?;
            let mut vs = vec![pres.x_hat(a)?, pres.x_hat(b)?, pres.x_hat(d)?, y.clone()];
            for i in [a, b, d] {
                vs.push(pres.apply_j(i, &y)?);
            }
            let curv = ExpectedCurvature::Berger { family: Family::H, n: 1, tau };
            c.add(FamilyTag::WpQuatBerger, "S^7_{H,tau}".into(), Some(1), None, vs, curv, None, all)?;
            let vs = vec![pres.x_hat(1)?, y.clone(), pres.apply_j(1, &y)?];
            let curv = ExpectedCurvature::Berger { family: Family::C, n: 1, tau };
            c.add(FamilyTag::WpComplexBerger, "S^3_{C,tau}".into(), Some(1), None, vs, curv, None, all)?;
        }
    }

    for k in 2..=m {
        c.add(
            FamilyTag::WpInverseSphere,
            format!("S^{k}_{{1/tau}}"),
            Some(k),
            None,
            xs(pres, k)?,
            ExpectedCurvature::Constant(1.0 / tau),
            None,
            all,
        )?;
    }

    if !(tau < 0.5) || pres.family() == Family::C {
        return Ok(c.out);
    }

    let sec_hat = ExpectedCurvature::Constant(4.0 * (1.0 - tau));
    let half = "(0, 1/2)";
    let sigma = sigma_hat_frame(pres)?;
    let sub_dims: Vec<usize> = match pres.family() {
        Family::H => vec![2, 3],
        _ => vec![2, 4, 5, 6, 7],
    };
    for k in sub_dims {
        c.add(FamilyTag::NwpSphereHat, format!("S^{k}_{{4-4tau}}"), Some(k), None, sigma[..k].to_vec(), sec_hat.clone(), None, half)?;
    }

    match pres.family() {
        Family::H => {
            let third = (tau - 1.0 / 3.0).abs() <= EXACT_TAU;
            let quarter = (tau - 0.25).abs() <= EXACT_TAU;
            let rp = || ExpectedCurvature::Constant(1.0 - tau);
            if third {
                c.add(FamilyTag::NwpRp2, "RP^2_{2/3}".into(), Some(2), None, a2_vectors(pres)?, rp(), None, "{1/3}")?;
            } else if tau < 1.0 / 3.0 && n >= 2 {
                c.add(FamilyTag::NwpRp2, "RP^2_{1-tau}".into(), Some(2), None, a2_vectors(pres)?, rp(), None, "(0, 1/3)")?;
            }
            if quarter && n >= 2 {
                c.add(FamilyTag::NwpRp3, "RP^3_{3/4}".into(), Some(3), None, a3_vectors(pres)?, rp(), None, "{1/4}")?;
            } else if tau < 0.25 && n >= 3 {
                c.add(FamilyTag::NwpRp3, "RP^3_{1-tau}".into(), Some(3), None, a3_vectors(pres)?, rp(), None, "(0, 1/4)")?;
            }
        }
        Family::O => {
            for theta in [0.0, 0.5, 1.0] {
                let (s, co) = check_theta(theta)?;
                let v = v_theta(pres, theta)?.vectors();
                c.add(FamilyTag::NwpVtheta, format!("V_{theta}"), Some(3), Some(theta), v, sec_hat.clone(), Some(s), half)?;
                let v = v_theta_prime(pres, theta)?.vectors();
                c.add(FamilyTag::NwpVthetaPrime, format!("V'_{theta}"), Some(3), Some(theta), v, sec_hat.clone(), Some(co), half)?;
            }
            if (tau - 1.0 / 3.0).abs() <= EXACT_TAU {
                let y = pres.y_vec(1)?;
                let vs = vec![pres.x_hat(2)? + &y, pres.x_hat(3)? + pres.apply_j(1, &y)?];
                c.add(FamilyTag::NwpRp2, "RP^2_{2/3}".into(), Some(2), None, vs, ExpectedCurvature::Constant(2.0 / 3.0), None, "{1/3}")?;
            }
        }
        Family::C => unreachable!(),
    }
    Ok(c.out)
}

/// `max |R(a,b)c - k(<b,c>a - <a,c>b)|` over frame triples.
pub fn constant_curvature_residual(model: &CurvatureModel, v: &Subspace, kappa: f64) -> f64 {
    let e = v.vectors();
    let d = e.len();
    let images = model.r_frame(v.frame());
    let mut worst: f64 = 0.0;
    for a in 0..d {
        for b in 0..d {
            for c in 0..d {
                let mut want = PVector::zeros(e[0].len());
                if b == c {
                    want += &e[a] * kappa;
                }
                if a == c {
                    want -= &e[b] * kappa;
                }
                worst = worst.max((&images[(a * d + b) * d + c] - want).norm());
            }
        }
    }
    worst
}

/// Compare the Jacobi operators of the induced curvature at a unit vertical
/// and a unit horizontal vector of V against those of the model sphere.
pub fn berger_spectrum_deviation(model: &CurvatureModel, v: &Subspace, family: Family, n: usize, tau: f64) -> Result<f64> {
    let target = CurvatureModel::new(Presentation::build(family, n, tau)?);
    let tp = target.presentation();
    let (vert, hor) = v.split(1e-9);
    if vert.is_empty() || hor.is_empty() {
        return Err(GeometryError::Degenerate);
    }
    let f = v.frame();
    let mut worst: f64 = 0.0;
    for (x, tx) in [(&vert[0], tp.x_hat(1)?), (&hor[0], tp.y_vec(1)?)] {
        let induced = f.tr_mul(&(model.jacobi(x)? * f));
        let got = crate::curvature::group_eigenvalues((&induced + induced.transpose()) * 0.5);
        let want = target.jacobi_spectrum(&tx)?;
        match spectrum_deviation(&want, &got) {
            Some(d) => worst = worst.max(d),
            None => return Ok(f64::INFINITY),
        }
    }
    Ok(worst)
}

#[derive(Clone, Debug, Serialize)]
pub struct EntryCheck {
    pub tag: FamilyTag,
    pub label: String,
    pub certificate: Option<CertResult>,
    /// Sectional curvature of the first frame plane.
    pub sectional: f64,
    /// Deviation from the expected constant curvature or Berger spectrum.
    pub curvature_residual: f64,
    pub slope_residual: Option<f64>,
    pub phi: Option<f64>,
    pub nabla_residuals: [f64; 2],
    pub pass: bool,
}

pub const CATALOG_CURVATURE_TOL: f64 = 1e-10;

/// Certificate, curvature, slope and phi checks for one entry.
pub fn verify_entry(model: &CurvatureModel, entry: &CatalogEntry, tol: f64) -> Result<EntryCheck> {
    let pres = model.presentation();
    let v = &entry.subspace;
    let exp = &entry.record.expected;
    let e = v.vectors();
    let certificate = if pres.tau() == 1.0 { None } else { Some(subspace::tg_certificate_with_tol(model, v, tol)?) };
    let curvature_residual = match &exp.curvature {
        ExpectedCurvature::Constant(k) => constant_curvature_residual(model, v, *k),
        ExpectedCurvature::Berger { family, n, tau } => berger_spectrum_deviation(model, v, *family, *n, *tau)?,
    };
    let slope_residual = exp.slope.map(|s| {
        let (lo, hi) = v.slope_range();
        (lo - s).abs().max((hi - s).abs())
    });
    let phi = if exp.phi.is_some() { Some(subspace::phi_invariant(pres, v)?) } else { None };
    let nabla_residuals = [
        subspace::nabla_invariance(model, v, 1).residual,
        subspace::nabla_invariance(model, v, 2).residual,
    ];
    let want_verdict = if exp.well_positioned { Verdict::WellPositionedTG } else { Verdict::NotWellPositionedTG };
    let pass = certificate.as_ref().is_none_or(|c| c.verdict == want_verdict)
        && curvature_residual <= CATALOG_CURVATURE_TOL
        && slope_residual.is_none_or(|r| r <= CATALOG_CURVATURE_TOL)
        && match (phi, exp.phi) {
            (Some(a), Some(b)) => (a - b).abs() <= tol,
            _ => true,
        }
        && nabla_residuals.iter().all(|&r| r <= tol);
    Ok(EntryCheck {
        tag: entry.record.tag,
        label: entry.record.label.clone(),
        certificate,
        sectional: model.sectional(&e[0], &e[1])?,
        curvature_residual,
        slope_residual,
        phi,
        nabla_residuals,
        pass,
    })
}
