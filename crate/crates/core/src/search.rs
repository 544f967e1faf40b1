//! Random-restart search for curvature-invariant 2-planes, with each hit
//! certified and matched against the catalog.

use std::collections::BTreeMap;

use nalgebra::{DMatrix, DVector};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;

use crate::catalog::{self, ExpectedCurvature, FamilyTag};
use crate::curvature::CurvatureModel;
use crate::error::{GeometryError, Result};
use crate::liealg::{Family, PVector, Presentation};
use crate::subspace::{self, Subspace, Verdict};
use crate::tolerances;

#[derive(Clone, Debug, Serialize)]
pub struct SearchConfig {
    pub restarts: usize,
    pub seed: u64,
    /// Squared residual at which a plane counts as invariant.
    pub objective_tol: f64,
    pub classify_tol: f64,
    /// Weight of the alpha terms; zero disables isotropy.
    pub isotropy_weight: f64,
    pub max_iterations: usize,
    /// Number of 3-spaces sampled per hit when refining inside a maximal
    /// sphere (octonionic family only); zero disables refinement.
    pub refine_samples: usize,
}

impl Default for SearchConfig {
    fn default() -> Self {
        SearchConfig {
            restarts: 100,
            seed: 42,
            objective_tol: tolerances::OBJECTIVE,
            classify_tol: tolerances::CLASSIFY,
            isotropy_weight: 0.0,
            max_iterations: 300,
            refine_samples: 0,
        }
    }
}

/// Residual vector of a frame `(u, v)` and its Jacobian in ambient
/// coordinates `(u, v)`.
pub struct Residual {
    pub r: DVector<f64>,
    pub jac: DMatrix<f64>,
}

impl Residual {
    pub fn value(&self) -> f64 {
        self.r.norm_squared()
    }

    pub fn gradient(&self) -> DVector<f64> {
        self.jac.tr_mul(&self.r) * 2.0
    }
}

fn off_block(
    model: &CurvatureModel,
    x: &PVector,
    y: &PVector,
    proj: &DMatrix<f64>,
) -> (PVector, DMatrix<f64>, DMatrix<f64>) {
    // T = R(x, y) y; returns (I-P)T and its derivatives in x and y
    let dim = x.len();
    let tx = model.r_slot_matrix(0, y, y);
    let ty = model.r_slot_matrix(1, x, y) + model.r_slot_matrix(2, x, y);
    let t = &tx * x;
    let off = proj * &t;
    let id = DMatrix::<f64>::identity(dim, dim);
    let jx = proj * &tx - &id * x.dot(&t) - x * t.transpose();
    let jy = proj * &ty - &id * y.dot(&t) - y * t.transpose();
    (off, jx, jy)
}

/// `r = [(I-P)R(u,v)v; (I-P)R(v,u)u; sqrt(w) alpha(u,u), sqrt(w) alpha(v,v),
/// sqrt(w) alpha(u,v)]` with `P = uu^T + vv^T`.
pub fn residual(model: &CurvatureModel, u: &PVector, v: &PVector, weight: f64) -> Result<Residual> {
    let dim = model.dim();
    let proj = DMatrix::<f64>::identity(dim, dim) - u * u.transpose() - v * v.transpose();
    let (r1, j1u, j1v) = off_block(model, u, v, &proj);
    let (r2, j2v, j2u) = off_block(model, v, u, &proj);
    let iso = weight > 0.0;
    let rows = 2 * dim + if iso { 3 } else { 0 };
    let mut r = DVector::zeros(rows);
    let mut jac = DMatrix::zeros(rows, 2 * dim);
    r.rows_mut(0, dim).copy_from(&r1);
    r.rows_mut(dim, dim).copy_from(&r2);
    jac.view_mut((0, 0), (dim, dim)).copy_from(&j1u);
    jac.view_mut((0, dim), (dim, dim)).copy_from(&j1v);
    jac.view_mut((dim, 0), (dim, dim)).copy_from(&j2u);
    jac.view_mut((dim, dim), (dim, dim)).copy_from(&j2v);
    if iso {
        let s = weight.sqrt();
        let m = subspace::alpha_diagonal(model.presentation())?;
        let mu = u.component_mul(&m);
        let mv = v.component_mul(&m);
        let o = 2 * dim;
        r[o] = s * u.dot(&mu);
        r[o + 1] = s * v.dot(&mv);
        r[o + 2] = s * u.dot(&mv);
        for a in 0..dim {
            jac[(o, a)] = 2.0 * s * mu[a];
            jac[(o + 1, dim + a)] = 2.0 * s * mv[a];
            jac[(o + 2, a)] = s * mv[a];
            jac[(o + 2, dim + a)] = s * mu[a];
        }
    }
    Ok(Residual { r, jac })
}

pub fn objective(model: &CurvatureModel, u: &PVector, v: &PVector, weight: f64) -> Result<f64> {
    Ok(residual(model, u, v, weight)?.value())
}

/// Central differences of the objective over the ambient coordinates.
pub fn fd_gradient(model: &CurvatureModel, u: &PVector, v: &PVector, weight: f64, h: f64) -> Result<DVector<f64>> {
    let dim = u.len();
    let mut g = DVector::zeros(2 * dim);
    for k in 0..2 * dim {
        let shift = |sgn: f64| {
            let (mut a, mut b) = (u.clone(), v.clone());
            if k < dim {
                a[k] += sgn * h;
            } else {
                b[k - dim] += sgn * h;
            }
            objective(model, &a, &b, weight)
        };
        g[k] = (shift(1.0)? - shift(-1.0)?) / (2.0 * h);
    }
    Ok(g)
}

/// `|g - g_fd| / |g|`.
pub fn gradient_check(model: &CurvatureModel, u: &PVector, v: &PVector, weight: f64) -> Result<f64> {
    let g = residual(model, u, v, weight)?.gradient();
    let fd = fd_gradient(model, u, v, weight, tolerances::FD_STEP)?;
    Ok((&g - &fd).norm() / g.norm().max(f64::MIN_POSITIVE))
}

fn retract(u: &PVector, v: &PVector) -> Option<(PVector, PVector)> {
    let nu = u.norm();
    if nu < 1e-14 {
        return None;
    }
    let u = u / nu;
    let w = v - &u * u.dot(v);
    let nw = w.norm();
    if nw < 1e-14 {
        return None;
    }
    Some((u, w / nw))
}

/// Outcome of one restart.
#[derive(Clone, Debug)]
pub struct Descent {
    pub u: PVector,
    pub v: PVector,
    pub value: f64,
    pub iterations: usize,
}

/// Levenberg-Marquardt on the Grassmannian of 2-planes, with steps
/// restricted to the horizontal space of the frame and a Gram-Schmidt
/// retraction.
pub fn minimize(model: &CurvatureModel, u0: &PVector, v0: &PVector, cfg: &SearchConfig) -> Result<Descent> {
    let dim = model.dim();
    let (mut u, mut v) = retract(u0, v0).ok_or(GeometryError::Degenerate)?;
    let mut res = residual(model, &u, &v, cfg.isotropy_weight)?;
    let mut f = res.value();
    let mut lambda = 1e-3;
    let mut it = 0;
    while it < cfg.max_iterations && f > cfg.objective_tol * 1e-4 {
        it += 1;
        let proj = DMatrix::<f64>::identity(dim, dim) - &u * u.transpose() - &v * v.transpose();
        let mut pi = DMatrix::zeros(2 * dim, 2 * dim);
        pi.view_mut((0, 0), (dim, dim)).copy_from(&proj);
        pi.view_mut((dim, dim), (dim, dim)).copy_from(&proj);
        let jt = &res.jac * &pi;
        let jtj = jt.tr_mul(&jt);
        let rhs = -(jt.tr_mul(&res.r));
        let mut accepted = false;
        for _ in 0..30 {
            let scale = jtj.diagonal().max().max(1e-12);
            let a = &jtj + DMatrix::<f64>::identity(2 * dim, 2 * dim) * (lambda * scale);
            let Some(ch) = a.cholesky() else {
                lambda *= 10.0;
                continue;
            };
            let step = ch.solve(&rhs);
            let Some((nu, nv)) = retract(&(&u + step.rows(0, dim)), &(&v + step.rows(dim, dim))) else {
                lambda *= 10.0;
                continue;
            };
            let nres = residual(model, &nu, &nv, cfg.isotropy_weight)?;
            let nf = nres.value();
            if nf < f {
                u = nu;
                v = nv;
                res = nres;
                f = nf;
                lambda = (lambda / 5.0).max(1e-15);
                accepted = true;
                break;
            }
            lambda *= 4.0;
        }
        if !accepted {
            break;
        }
    }
    Ok(Descent { u, v, value: f, iterations: it })
}

#[derive(Clone, Debug, PartialEq, Serialize)]
#[serde(tag = "status", rename_all = "snake_case")]
pub enum HitStatus {
    Classified { tag: FamilyTag, label: String },
    /// Curvature invariant but refused by the certificate.
    Rejected { witness: &'static str, residual: f64 },
    #[serde(rename = "UNCLASSIFIED")]
    Unclassified,
}

#[derive(Clone, Debug, Serialize)]
pub struct SearchHit {
    pub restart: usize,
    pub iterations: usize,
    pub residual: f64,
    pub dim: usize,
    pub slope_min: f64,
    pub slope_max: f64,
    pub sectional: f64,
    pub well_positioned: bool,
    pub phi: Option<f64>,
    pub verdict: Verdict,
    #[serde(flatten)]
    pub status: HitStatus,
    pub frame: Vec<Vec<f64>>,
}

#[derive(Clone, Debug, Serialize)]
pub struct Refinement {
    /// Index of the parent hit in the sorted list.
    pub parent: usize,
    pub psi: f64,
    pub phi: f64,
    pub verdict: Verdict,
    #[serde(flatten)]
    pub status: HitStatus,
}

#[derive(Clone, Debug, Default, Serialize)]
pub struct Summary {
    pub restarts: usize,
    pub converged: usize,
    pub hits: usize,
    pub classified: usize,
    pub rejected: usize,
    pub unclassified: usize,
    pub by_family: BTreeMap<String, usize>,
    /// Sectional curvatures of the hits, rounded to 6 decimals, with counts.
    pub sectional_histogram: BTreeMap<String, usize>,
    /// Counts of refined phi values in ten bins over [0, 1].
    pub phi_histogram: Vec<usize>,
    pub phi_min: Option<f64>,
    pub phi_max: Option<f64>,
}

#[derive(Clone, Debug, Serialize)]
pub struct SearchResult {
    pub hits: Vec<SearchHit>,
    pub refinements: Vec<Refinement>,
    pub summary: Summary,
}

fn start_frame(pres: &Presentation, seed: u64, index: usize) -> (PVector, PVector) {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(index as u64);
    (pres.random_pvector(&mut rng), pres.random_pvector(&mut rng))
}

/// Constant-curvature catalog data used to name a hit.
pub struct Anchor {
    tag: FamilyTag,
    label: String,
    dim: usize,
    kappa: f64,
    well_positioned: bool,
    split: Option<(usize, usize)>,
    slope: Option<f64>,
}

pub fn anchors(pres: &Presentation) -> Result<Vec<Anchor>> {
    Ok(catalog::catalog_entries(pres)?
        .into_iter()
        .filter_map(|e| match e.record.expected.curvature {
            ExpectedCurvature::Constant(kappa) => Some(Anchor {
                tag: e.record.tag,
                label: e.record.label,
                dim: e.record.expected.dim,
                kappa,
                well_positioned: e.record.expected.well_positioned,
                split: e.record.expected.split,
                slope: e.record.expected.slope,
            }),
            ExpectedCurvature::Berger { .. } => None,
        })
        .collect())
}

/// Match a certified subspace to a constant-curvature catalog family of at
/// least its dimension with the same invariants; exact dimension first.
fn classify(
    anchors: &[Anchor],
    dim: usize,
    wp: bool,
    split: (usize, usize),
    slope: f64,
    sec: f64,
    tol: f64,
) -> Option<(FamilyTag, String)> {
    let fits = |a: &&Anchor| {
        a.dim >= dim
            && a.well_positioned == wp
            && (a.kappa - sec).abs() <= tol
            && match (wp, a.split, a.slope) {
                (true, Some((p, q)), _) => split.0 <= p && split.1 <= q,
                (false, _, Some(s)) => (s - slope).abs() <= tol,
                _ => false,
            }
    };
    let best = anchors.iter().filter(fits).min_by_key(|a| a.dim)?;
    let label = if best.dim == dim { best.label.clone() } else { format!("{dim}-plane in {}", best.label) };
    Some((best.tag, label))
}

fn frame_rows(v: &Subspace) -> Vec<Vec<f64>> {
    v.vectors().iter().map(|c| c.iter().copied().collect()).collect()
}

fn evaluate(
    model: &CurvatureModel,
    anchors: &[Anchor],
    v: &Subspace,
    cfg: &SearchConfig,
) -> Result<(Verdict, HitStatus, bool, f64, f64, f64)> {
    let loose = 10.0 * cfg.classify_tol;
    let cert = subspace::tg_certificate_with_tol(model, v, loose)?;
    let (smin, smax) = v.slope_range();
    let e = v.vectors();
    let sec = model.sectional(&e[0], &e[1])?;
    let wp = subspace::is_well_positioned(v, loose);
    let status = match (&cert.verdict, &cert.witness) {
        (Verdict::NotTG, Some(w)) => HitStatus::Rejected { witness: w.kind, residual: w.residual },
        (Verdict::NotTG, None) => HitStatus::Unclassified,
        _ => {
            let (vert, hor) = v.split(loose);
            match classify(anchors, v.dim(), wp, (vert.len(), hor.len()), smax, sec, cfg.classify_tol) {
                Some((tag, label)) => HitStatus::Classified { tag, label },
                None => HitStatus::Unclassified,
            }
        }
    };
    Ok((cert.verdict, status, wp, smin, smax, sec))
}

/// Run every restart, keep the converged planes, deduplicate them and
/// classify each one.
pub fn search_planes(model: &CurvatureModel, cfg: &SearchConfig) -> Result<SearchResult> {
    let pres = model.presentation();
    if pres.tau() == 1.0 {
        return Err(GeometryError::RoundSphere("every plane is invariant"));
    }
    let runs: Vec<Result<Descent>> = (0..cfg.restarts)
        .into_par_iter()
        .map(|i| {
            let (u, v) = start_frame(pres, cfg.seed, i);
            minimize(model, &u, &v, cfg)
        })
        .collect();

    let mut kept: Vec<(usize, Descent, Subspace)> = Vec::new();
    for (i, run) in runs.into_iter().enumerate() {
        let d = run?;
        if d.value > cfg.objective_tol {
            continue;
        }
        let s = Subspace::from_vectors(pres, &[d.u.clone(), d.v.clone()])?;
        match kept.iter_mut().find(|(_, _, o)| o.largest_principal_angle(&s) < tolerances::DEDUP_ANGLE) {
            Some(slot) if d.value < slot.1.value => *slot = (i, d, s),
            Some(_) => {}
            None => kept.push((i, d, s)),
        }
    }
    let converged = kept.len();

    let anchors = anchors(pres)?;
    let mut hits = Vec::with_capacity(kept.len());
    for (restart, d, s) in kept {
        let (verdict, status, wp, smin, smax, sec) = evaluate(model, &anchors, &s, cfg)?;
        hits.push(SearchHit {
            restart,
            iterations: d.iterations,
            residual: d.value,
            dim: 2,
            slope_min: smin,
            slope_max: smax,
            sectional: sec,
            well_positioned: wp,
            phi: None,
            verdict,
            status,
            frame: frame_rows(&s),
        });
    }
    let key = |h: &SearchHit| (h.sectional, if h.slope_max.is_finite() { h.slope_max } else { f64::MAX });
    hits.sort_by(|a, b| {
        let (ka, kb) = (key(a), key(b));
        ka.0.total_cmp(&kb.0)
            .then(ka.1.total_cmp(&kb.1))
            .then(a.residual.total_cmp(&b.residual))
            .then(a.restart.cmp(&b.restart))
    });

    let mut refinements = Vec::new();
    if cfg.refine_samples > 0 && pres.family() == Family::O && pres.tau() < 0.5 {
        for (idx, h) in hits.iter().enumerate() {
            if h.well_positioned || !matches!(h.status, HitStatus::Classified { .. }) {
                continue;
            }
            let plane: Vec<PVector> = h.frame.iter().map(|c| DVector::from_vec(c.clone())).collect();
            refinements.extend(refine(model, &anchors, idx, &plane, cfg)?);
        }
    }

    let summary = summarize(cfg.restarts, converged, &hits, &refinements);
    Ok(SearchResult { hits, refinements, summary })
}

/// Extend a not well-positioned plane `{a, b}` inside its maximal sphere by
/// `c(psi) = cos(psi) g + sin(psi) w`, where g maximizes `phi(a, b, .)` and
/// w is orthogonal to `a, b, g`. The resulting 3-spaces have
/// `|phi| = |cos psi|`.
pub fn refine(
    model: &CurvatureModel,
    anchors_: &[Anchor],
    parent: usize,
    plane: &[PVector],
    cfg: &SearchConfig,
) -> Result<Vec<Refinement>> {
    let pres = model.presentation();
    let v2 = Subspace::from_vectors(pres, plane)?;
    let sigma = subspace::containing_sigma_hat(pres, &v2)?;
    let (a, b) = (v2.vector(0), v2.vector(1));
    let frame = sigma.vectors();
    let mut g = PVector::zeros(pres.dim());
    for w in &frame {
        g += w * subspace::phi(pres, &a, &b, w)?;
    }
    let g = g.normalize();
    let abg = Subspace::from_vectors(pres, &[a.clone(), b.clone(), g.clone()])?;
    let w = frame
        .iter()
        .map(|w| {
            let c = abg.frame().tr_mul(w);
            w - abg.frame() * c
        })
        .max_by(|x, y| x.norm().total_cmp(&y.norm()))
        .ok_or(GeometryError::Degenerate)?
        .normalize();
    let m = cfg.refine_samples.max(2);
    let mut out = Vec::with_capacity(m);
    for k in 0..m {
        let psi = std::f64::consts::FRAC_PI_2 * k as f64 / (m - 1) as f64;
        let c = &g * psi.cos() + &w * psi.sin();
        let v3 = Subspace::from_vectors(pres, &[a.clone(), b.clone(), c])?;
        let (verdict, status, ..) = evaluate(model, anchors_, &v3, cfg)?;
        let phi = subspace::phi_invariant(pres, &v3)?;
        let status = match status {
            HitStatus::Classified { .. } => {
                let theta = 2.0 / std::f64::consts::PI * phi.clamp(0.0, 1.0).asin();
                HitStatus::Classified { tag: FamilyTag::NwpVtheta, label: format!("V_theta, theta = {theta:.6}") }
            }
            s => s,
        };
        out.push(Refinement { parent, psi, phi, verdict, status });
    }
    Ok(out)
}

fn summarize(restarts: usize, converged: usize, hits: &[SearchHit], refinements: &[Refinement]) -> Summary {
    let mut s = Summary { restarts, converged, hits: hits.len(), phi_histogram: vec![0; 10], ..Default::default() };
    for h in hits {
        match &h.status {
            HitStatus::Classified { tag, .. } => {
                s.classified += 1;
                *s.by_family.entry(tag.to_string()).or_default() += 1;
            }
            HitStatus::Rejected { .. } => s.rejected += 1,
            HitStatus::Unclassified => s.unclassified += 1,
        }
        *s.sectional_histogram.entry(format!("{:.6}", h.sectional)).or_default() += 1;
    }
    for r in refinements {
        if matches!(r.status, HitStatus::Unclassified) {
            s.unclassified += 1;
        }
        let bin = ((r.phi * 10.0) as usize).min(9);
        s.phi_histogram[bin] += 1;
        s.phi_min = Some(s.phi_min.map_or(r.phi, |m: f64| m.min(r.phi)));
        s.phi_max = Some(s.phi_max.map_or(r.phi, |m: f64| m.max(r.phi)));
    }
    s
}
