//! Linear subspaces of p: splitting, slope, the alpha form, curvature
//! invariance, totally geodesic certificates and the 3-form phi.

use nalgebra::{DMatrix, DVector, SymmetricEigen};
use serde::Serialize;

use crate::curvature::CurvatureModel;
use crate::error::{GeometryError, Result};
use crate::geodesics::shape_eigs;
use crate::liealg::{Family, PVector, Presentation};
use crate::tolerances;

/// An orthonormal frame, stored as the columns of a `dim x d` matrix.
#[derive(Clone, Debug, PartialEq)]
pub struct Subspace {
    frame: DMatrix<f64>,
    p1: DMatrix<f64>,
    p2: DMatrix<f64>,
}

impl Subspace {
    /// Orthonormalize `vs` by two passes of Gram-Schmidt.
    pub fn from_vectors(pres: &Presentation, vs: &[PVector]) -> Result<Self> {
        if vs.is_empty() {
            return Err(GeometryError::ZeroVector);
        }
        let dim = pres.dim();
        let mut cols: Vec<PVector> = Vec::with_capacity(vs.len());
        for v in vs {
            if v.len() != dim {
                return Err(GeometryError::DimensionMismatch { expected: dim, got: v.len() });
            }
            let scale = v.norm();
            if scale == 0.0 {
                return Err(GeometryError::Degenerate);
            }
            let mut w = v / scale;
            for _ in 0..2 {
                for c in &cols {
                    let k = c.dot(&w);
                    w.axpy(-k, c, 1.0);
                }
            }
            let n = w.norm();
            if n < 1e-10 {
                return Err(GeometryError::Degenerate);
            }
            cols.push(w / n);
        }
        Ok(Self::from_orthonormal(pres, DMatrix::from_columns(&cols)))
    }

    fn from_orthonormal(pres: &Presentation, frame: DMatrix<f64>) -> Self {
        let m = pres.dim_p1();
        let mut p1 = frame.clone();
        p1.rows_mut(m, frame.nrows() - m).fill(0.0);
        let p2 = &frame - &p1;
        Subspace { frame, p1, p2 }
    }

    pub fn from_frame(pres: &Presentation, frame: &DMatrix<f64>) -> Result<Self> {
        let cols: Vec<PVector> = frame.column_iter().map(|c| c.into_owned()).collect();
        Self::from_vectors(pres, &cols)
    }

    pub fn dim(&self) -> usize {
        self.frame.ncols()
    }

    pub fn ambient_dim(&self) -> usize {
        self.frame.nrows()
    }

    pub fn frame(&self) -> &DMatrix<f64> {
        &self.frame
    }

    /// Vertical parts of the frame vectors.
    pub fn p1_frame(&self) -> &DMatrix<f64> {
        &self.p1
    }

    pub fn p2_frame(&self) -> &DMatrix<f64> {
        &self.p2
    }

    pub fn vectors(&self) -> Vec<PVector> {
        self.frame.column_iter().map(|c| c.into_owned()).collect()
    }

    pub fn vector(&self, i: usize) -> PVector {
        self.frame.column(i).into_owned()
    }

    pub fn projector(&self) -> DMatrix<f64> {
        &self.frame * self.frame.transpose()
    }

    /// `|(I - VV^T) w|`.
    pub fn off_residual(&self, w: &PVector) -> f64 {
        let c = self.frame.tr_mul(w);
        (w - &self.frame * c).norm()
    }

    pub fn contains(&self, w: &PVector, tol: f64) -> bool {
        self.off_residual(w) <= tol
    }

    /// Largest residual of `other`'s frame vectors off this subspace.
    pub fn containment_residual(&self, other: &Subspace) -> f64 {
        other.frame.column_iter().map(|c| self.off_residual(&c.into_owned())).fold(0.0, f64::max)
    }

    /// Largest principal angle to a subspace of the same dimension.
    pub fn largest_principal_angle(&self, other: &Subspace) -> f64 {
        if self.dim() != other.dim() {
            return std::f64::consts::FRAC_PI_2;
        }
        let m = self.frame.tr_mul(&other.frame);
        let sv = m.singular_values();
        let smin = sv.iter().copied().fold(f64::INFINITY, f64::min).clamp(-1.0, 1.0);
        // arcsin of the off-component is accurate for tiny angles
        let proj = &self.frame * &m;
        let mut worst: f64 = 0.0;
        for c in 0..other.dim() {
            worst = worst.max((other.frame.column(c) - proj.column(c)).norm());
        }
        if smin > 0.99 {
            worst.min(1.0).asin()
        } else {
            smin.acos()
        }
    }

    /// Split `V = (V cap p1) + (V cap p2) + rest` by the spectrum of the
    /// compressed vertical projection. Returns the bases of the first two.
    pub fn split(&self, tol: f64) -> (Vec<PVector>, Vec<PVector>) {
        let g = self.p1.tr_mul(&self.p1);
        let eig = SymmetricEigen::new(g);
        let mut vert = Vec::new();
        let mut hor = Vec::new();
        for (i, &l) in eig.eigenvalues.iter().enumerate() {
            let v = &self.frame * eig.eigenvectors.column(i);
            if (l - 1.0).abs() <= tol {
                vert.push(v);
            } else if l.abs() <= tol {
                hor.push(v);
            }
        }
        (vert, hor)
    }

    /// Range of slopes over the unit vectors of V.
    pub fn slope_range(&self) -> (f64, f64) {
        let g = self.p1.tr_mul(&self.p1);
        let ev = SymmetricEigen::new(g).eigenvalues;
        let to_slope = |l: f64| {
            let l = l.clamp(0.0, 1.0);
            if 1.0 - l <= 1e-15 {
                f64::INFINITY
            } else {
                (l / (1.0 - l)).sqrt()
            }
        };
        let lo = ev.iter().copied().fold(f64::INFINITY, f64::min);
        let hi = ev.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        (to_slope(lo), to_slope(hi))
    }
}

/// `|P1 v| / |P2 v|`, infinite for vertical vectors.
pub fn slope(pres: &Presentation, v: &PVector) -> Result<f64> {
    let n = v.norm();
    if n == 0.0 {
        return Err(GeometryError::ZeroVector);
    }
    let a = pres.p1_part(v).norm();
    let b = pres.p2_part(v).norm();
    if b <= tolerances::BRACKET * n {
        Ok(f64::INFINITY)
    } else {
        Ok(a / b)
    }
}

/// Diagonal of the alpha form in the orthonormal basis.
///
/// alpha = -(beta1 <P1 ., P1 .> + beta2 <P2 ., P2 .>), the second fundamental
/// form of the geodesic sphere along the inner normal, rescaled to tau-metric
/// units. With this sign alpha is positive definite for tau > 1/2.
pub fn alpha_diagonal(pres: &Presentation) -> Result<DVector<f64>> {
    let (b1, b2) = shape_eigs(pres.tau())?;
    let m = pres.dim_p1();
    Ok(DVector::from_fn(pres.dim(), |a, _| if a < m { -b1 } else { -b2 }))
}

pub fn alpha(pres: &Presentation, v: &PVector, w: &PVector) -> Result<f64> {
    let d = alpha_diagonal(pres)?;
    Ok(v.component_mul(&d).dot(w))
}

/// Gram matrix of alpha on the frame of V.
pub fn alpha_matrix(pres: &Presentation, v: &Subspace) -> Result<DMatrix<f64>> {
    let d = alpha_diagonal(pres)?;
    let f = v.frame();
    let df = DMatrix::from_fn(f.nrows(), f.ncols(), |r, c| d[r] * f[(r, c)]);
    Ok(f.tr_mul(&df))
}

pub fn isotropy_residual(pres: &Presentation, v: &Subspace) -> Result<f64> {
    Ok(alpha_matrix(pres, v)?.amax())
}

pub fn is_isotropic(pres: &Presentation, v: &Subspace, tol: f64) -> Result<bool> {
    Ok(isotropy_residual(pres, v)? <= tol)
}

/// Largest distance of a projected frame vector from V.
pub fn well_positioned_residual(v: &Subspace) -> f64 {
    let mut worst: f64 = 0.0;
    for c in 0..v.dim() {
        worst = worst.max(v.off_residual(&v.p1_frame().column(c).into_owned()));
        worst = worst.max(v.off_residual(&v.p2_frame().column(c).into_owned()));
    }
    worst
}

pub fn is_well_positioned(v: &Subspace, tol: f64) -> bool {
    well_positioned_residual(v) <= tol
}

/// Largest off-V component among the images of a tensor on frame tuples.
#[derive(Clone, Debug, Serialize, PartialEq)]
pub struct Invariance {
    pub residual: f64,
    /// Frame indices of the worst tuple.
    pub tuple: Vec<usize>,
    /// The image vector at the worst tuple.
    pub image: Vec<f64>,
}

fn worst_off(v: &Subspace, images: &[PVector], slots: usize) -> Invariance {
    let d = v.dim();
    let mut best = Invariance { residual: 0.0, tuple: vec![0; slots], image: vec![] };
    for (idx, w) in images.iter().enumerate() {
        let r = v.off_residual(w);
        if r > best.residual || best.image.is_empty() {
            let mut t = vec![0; slots];
            let mut k = idx;
            for s in (0..slots).rev() {
                t[s] = k % d;
                k /= d;
            }
            best = Invariance { residual: r, tuple: t, image: w.iter().copied().collect() };
        }
    }
    best
}

pub fn r_invariance(model: &CurvatureModel, v: &Subspace) -> Invariance {
    worst_off(v, &model.r_frame(v.frame()), 3)
}

pub fn d_invariance(model: &CurvatureModel, v: &Subspace) -> Invariance {
    worst_off(v, &model.d_frame(v.frame()), 2)
}

/// Invariance under `nabla^k R`; `k = 0` is R itself.
pub fn nabla_invariance(model: &CurvatureModel, v: &Subspace, k: usize) -> Invariance {
    let f = v.frame();
    match k {
        0 => r_invariance(model, v),
        1 => worst_off(v, &model.nabla_frame(f), 4),
        2 => worst_off(v, &model.nabla2_frame(f), 5),
        _ => {
            let cols = v.vectors();
            let d = cols.len();
            let slots = k + 3;
            let images: Vec<PVector> = (0..d.pow(slots as u32))
                .map(|mut idx| {
                    let mut t = vec![0; slots];
                    for s in (0..slots).rev() {
                        t[s] = idx % d;
                        idx /= d;
                    }
                    let vs: Vec<PVector> = t[..k].iter().map(|&i| cols[i].clone()).collect();
                    model.nabla_k_r(&vs, &cols[t[k]], &cols[t[k + 1]], &cols[t[k + 2]])
                })
                .collect();
            worst_off(v, &images, slots)
        }
    }
}

pub fn is_r_invariant(model: &CurvatureModel, v: &Subspace, tol: f64) -> (bool, f64) {
    let r = r_invariance(model, v).residual;
    (r <= tol, r)
}

pub fn is_d_invariant(model: &CurvatureModel, v: &Subspace, tol: f64) -> (bool, f64) {
    let r = d_invariance(model, v).residual;
    (r <= tol, r)
}

pub fn is_nabla_r_invariant(model: &CurvatureModel, v: &Subspace, k: usize, tol: f64) -> (bool, f64) {
    let r = nabla_invariance(model, v, k).residual;
    (r <= tol, r)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize)]
pub enum Verdict {
    WellPositionedTG,
    NotWellPositionedTG,
    NotTG,
}

#[derive(Clone, Debug, Serialize, PartialEq)]
pub struct Witness {
    /// Which test failed: "R", "D", "nabla R", "nabla^2 R" or "alpha".
    pub kind: &'static str,
    pub tuple: Vec<usize>,
    pub value: Vec<f64>,
    pub residual: f64,
}

#[derive(Clone, Debug, Serialize, PartialEq)]
pub struct Diagnostics {
    pub dim: usize,
    pub slope_min: f64,
    pub slope_max: f64,
    pub well_positioned_residual: f64,
    pub isotropy_residual: f64,
    pub r_residual: f64,
    pub d_residual: Option<f64>,
    pub nabla_residuals: Option<[f64; 2]>,
}

#[derive(Clone, Debug, Serialize, PartialEq)]
pub struct CertResult {
    pub verdict: Verdict,
    /// The sufficient condition that produced a positive verdict.
    pub criterion: Option<&'static str>,
    pub witness: Option<Witness>,
    pub diagnostics: Diagnostics,
}

fn witness(kind: &'static str, inv: &Invariance) -> Witness {
    Witness { kind, tuple: inv.tuple.clone(), value: inv.image.clone(), residual: inv.residual }
}

pub fn tg_certificate(model: &CurvatureModel, v: &Subspace) -> Result<CertResult> {
    tg_certificate_with_tol(model, v, tolerances::CONTAINMENT)
}

/// Decide whether V is tangent to a totally geodesic submanifold.
///
/// Split subspaces pass when they are invariant under R and D, or under R,
/// nabla R and nabla^2 R (a finite audit of the full derivative condition).
/// Other subspaces pass when they are alpha-isotropic and R-invariant, which
/// is only possible for tau < 1/2.
pub fn tg_certificate_with_tol(model: &CurvatureModel, v: &Subspace, tol: f64) -> Result<CertResult> {
    let pres = model.presentation();
    let tau = pres.tau();
    if tau == 1.0 {
        return Err(GeometryError::RoundSphere("every subspace is totally geodesic"));
    }
    if v.dim() < 2 {
        return Err(GeometryError::DimensionMismatch { expected: 2, got: v.dim() });
    }
    if v.ambient_dim() != pres.dim() {
        return Err(GeometryError::DimensionMismatch { expected: pres.dim(), got: v.ambient_dim() });
    }
    let (slope_min, slope_max) = v.slope_range();
    let wp = well_positioned_residual(v);
    let iso = isotropy_residual(pres, v)?;
    let r = r_invariance(model, v);
    let mut diag = Diagnostics {
        dim: v.dim(),
        slope_min,
        slope_max,
        well_positioned_residual: wp,
        isotropy_residual: iso,
        r_residual: r.residual,
        d_residual: None,
        nabla_residuals: None,
    };
    let audit = |diag: &mut Diagnostics| {
        let n1 = nabla_invariance(model, v, 1);
        let n2 = nabla_invariance(model, v, 2);
        diag.nabla_residuals = Some([n1.residual, n2.residual]);
        (n1, n2)
    };
    let not_tg = |diag: Diagnostics, w: Witness| CertResult {
        verdict: Verdict::NotTG,
        criterion: None,
        witness: Some(w),
        diagnostics: diag,
    };

    if r.residual > tol {
        if wp <= tol {
            diag.d_residual = Some(d_invariance(model, v).residual);
        }
        return Ok(not_tg(diag, witness("R", &r)));
    }

    if wp <= tol {
        let d = d_invariance(model, v);
        diag.d_residual = Some(d.residual);
        let (n1, n2) = audit(&mut diag);
        if d.residual <= tol {
            return Ok(CertResult {
                verdict: Verdict::WellPositionedTG,
                criterion: Some("split, D- and R-invariant"),
                witness: None,
                diagnostics: diag,
            });
        }
        if n1.residual <= tol && n2.residual <= tol {
            return Ok(CertResult {
                verdict: Verdict::WellPositionedTG,
                criterion: Some("split, R-, nabla R- and nabla^2 R-invariant"),
                witness: None,
                diagnostics: diag,
            });
        }
        let w = if n1.residual > tol { witness("nabla R", &n1) } else { witness("nabla^2 R", &n2) };
        return Ok(not_tg(diag, w));
    }

    let isotropic_branch = tau < 0.5 || tau > 1.0;
    if isotropic_branch && iso <= tol {
        audit(&mut diag);
        let criterion = if tau < 0.5 {
            "alpha-isotropic and R-invariant"
        } else {
            "alpha-isotropic and R-invariant (non-compact branch)"
        };
        return Ok(CertResult {
            verdict: Verdict::NotWellPositionedTG,
            criterion: Some(criterion),
            witness: None,
            diagnostics: diag,
        });
    }
    let a = alpha_matrix(pres, v)?;
    let (mut bi, mut bj) = (0, 0);
    for i in 0..a.nrows() {
        for j in 0..a.ncols() {
            if a[(i, j)].abs() > a[(bi, bj)].abs() {
                bi = i;
                bj = j;
            }
        }
    }
    Ok(not_tg(
        diag,
        Witness { kind: "alpha", tuple: vec![bi, bj], value: vec![a[(bi, bj)]], residual: a[(bi, bj)].abs() },
    ))
}

fn phi_scale(pres: &Presentation) -> Result<f64> {
    if pres.family() != Family::O {
        return Err(GeometryError::RequiresOctonions);
    }
    let tau = pres.tau();
    if !(tau < 0.5) {
        return Err(GeometryError::TauOutOfRange { tau, reason: "phi needs tau < 1/2" });
    }
    Ok(2.0 * (1.0 - tau).powf(1.5) / (1.0 - 2.0 * tau))
}

/// The 3-form `phi(x,y,z) = c <P2 x, [P1 y, P2 z]>` with
/// `c = 2 (1-tau)^{3/2} / (1 - 2 tau)`.
pub fn phi(pres: &Presentation, x: &PVector, y: &PVector, z: &PVector) -> Result<f64> {
    let c = phi_scale(pres)?;
    let b = pres.bracket_p(&pres.p1_part(y), &pres.p2_part(z));
    Ok(c * pres.p2_part(x).dot(&b))
}

const SIGMA_HAT_CONTAINMENT: f64 = 1e-10;

fn sigma_coeffs(tau: f64) -> Result<(f64, f64)> {
    if !(tau > 0.0 && tau < 0.5) {
        return Err(GeometryError::TauOutOfRange { tau, reason: "the maximal sphere needs tau < 1/2" });
    }
    Ok(((tau / (1.0 - tau)).sqrt(), ((1.0 - 2.0 * tau) / (1.0 - tau)).sqrt()))
}

/// Frame `v_i = sqrt(tau/(1-tau)) X_i/|X_i| - sqrt((1-2tau)/(1-tau)) J_i y`
/// of the maximal sphere through o determined by a unit horizontal `y`.
pub fn sigma_hat_vectors(pres: &Presentation, y: &PVector) -> Result<Vec<PVector>> {
    let (a, b) = sigma_coeffs(pres.tau())?;
    let yn = y.norm();
    if yn == 0.0 {
        return Err(GeometryError::ZeroVector);
    }
    let y = y / yn;
    (1..=pres.dim_p1())
        .map(|i| Ok(pres.x_hat(i)? * a - pres.apply_j(i, &y)? * b))
        .collect()
}

pub fn sigma_hat(pres: &Presentation, y: &PVector) -> Result<Subspace> {
    Subspace::from_vectors(pres, &sigma_hat_vectors(pres, y)?)
}

/// Recover the horizontal unit vector `y` whose maximal sphere contains the
/// isotropic vector `u`.
pub fn sigma_hat_axis(pres: &Presentation, u: &PVector) -> Result<PVector> {
    let (a, b) = sigma_coeffs(pres.tau())?;
    let m = pres.dim_p1();
    let c: Vec<f64> = (0..m).map(|i| u[i] / a).collect();
    let c2: f64 = c.iter().map(|x| x * x).sum();
    if c2 == 0.0 {
        return Err(GeometryError::NotInSigmaHat(u.norm()));
    }
    let h = pres.p2_part(u);
    let mut jc = DVector::zeros(pres.dim());
    for (i, ci) in c.iter().enumerate() {
        jc += pres.apply_j(i + 1, &h)? * *ci;
    }
    let y = jc / (b * c2);
    let n = y.norm();
    if n == 0.0 {
        return Err(GeometryError::NotInSigmaHat(u.norm()));
    }
    Ok(y / n)
}

/// The maximal sphere through o containing V, if there is one.
pub fn containing_sigma_hat(pres: &Presentation, v: &Subspace) -> Result<Subspace> {
    let y = sigma_hat_axis(pres, &v.vector(0))?;
    let s = sigma_hat(pres, &y)?;
    let r = s.containment_residual(v);
    if r > SIGMA_HAT_CONTAINMENT {
        return Err(GeometryError::NotInSigmaHat(r));
    }
    Ok(s)
}

/// `|phi(e1, e2, e3)|` on an orthonormal frame of a 3-space inside a
/// maximal sphere.
pub fn phi_invariant(pres: &Presentation, v: &Subspace) -> Result<f64> {
    phi_scale(pres)?;
    if v.dim() != 3 {
        return Err(GeometryError::DimensionMismatch { expected: 3, got: v.dim() });
    }
    containing_sigma_hat(pres, v)?;
    let e = v.vectors();
    Ok(phi(pres, &e[0], &e[1], &e[2])?.abs())
}
