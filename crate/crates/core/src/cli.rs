//! Command-line front end. Every subcommand produces a [`Report`]; the exit
//! code is 0 when all checks pass, 1 when one fails and 2 on bad arguments.

use std::fs;
use std::io::Write;
use std::path::PathBuf;
use std::time::Instant;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;

use crate::catalog;
use crate::curvature::{CurvatureModel, SpectrumPair};
use crate::error::{GeometryError, Result};
use crate::geodesics::{self, GeodesicParams};
use crate::liealg::{Family, Presentation};
use crate::report::{self, Check, Report};
use crate::search::{self, HitStatus, SearchConfig};
use crate::subspace;
use crate::tables;
use crate::tolerances;

#[derive(Parser, Debug)]
#[command(name = "hopf-berger", version, about = "Curvature and totally geodesic subspaces of Hopf-Berger spheres")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
    #[command(flatten)]
    pub output: OutputArgs,
}

#[derive(Args, Debug)]
pub struct OutputArgs {
    /// Write the report here instead of stdout.
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
    #[arg(long, global = true, value_enum, default_value_t = Format::Json)]
    pub format: Format,
    /// Record wall time in the report (makes output run-dependent).
    #[arg(long, global = true)]
    pub timing: bool,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Json,
    Markdown,
}

#[derive(Args, Debug, Clone)]
pub struct PresArgs {
    #[arg(long, value_parser = parse_family)]
    pub family: Family,
    /// Quaternionic/complex dimension n (ignored for O).
    #[arg(long, default_value_t = 1)]
    pub n: usize,
    #[arg(long, allow_negative_numbers = true)]
    pub tau: f64,
}

fn parse_family(s: &str) -> std::result::Result<Family, String> {
    s.parse()
}

impl PresArgs {
    fn build(&self) -> Result<Presentation> {
        Presentation::build(self.family, self.n, self.tau)
    }
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Jacobi spectra of unit vertical and horizontal vectors.
    Spectra {
        #[command(flatten)]
        pres: PresArgs,
        #[arg(long, default_value_t = 1e-10)]
        tol: f64,
    },
    /// Closed-form values of D and R on basis vectors.
    Tables {
        #[command(flatten)]
        pres: PresArgs,
        #[arg(long, default_value_t = 1e-12)]
        tol: f64,
    },
    /// Certificates and curvature of every catalog subspace.
    VerifyCatalog {
        #[command(flatten)]
        pres: PresArgs,
        #[arg(long, default_value_t = tolerances::CONTAINMENT)]
        tol: f64,
    },
    /// Random-restart search for invariant 2-planes.
    Search {
        #[command(flatten)]
        pres: PresArgs,
        #[arg(long, default_value_t = 100)]
        restarts: usize,
        #[arg(long, default_value_t = 42)]
        seed: u64,
        /// Tolerance for matching hits against the catalog.
        #[arg(long, default_value_t = tolerances::CLASSIFY)]
        tol: f64,
        /// Also require the plane to be alpha-isotropic.
        #[arg(long)]
        isotropic: bool,
        #[arg(long, default_value_t = 1.0)]
        isotropy_weight: f64,
        /// 3-spaces sampled per not well-positioned hit (O only).
        #[arg(long, default_value_t = 0)]
        refine: usize,
        #[arg(long, default_value_t = 300)]
        max_iterations: usize,
        /// Write one JSON line per hit, then a summary line.
        #[arg(long)]
        hits: Option<PathBuf>,
    },
    /// phi along the two one-parameter families of 3-spaces.
    Phi {
        #[arg(long, default_value_t = 0.2)]
        tau: f64,
        #[arg(long, default_value_t = 21)]
        points: usize,
        #[arg(long, default_value_t = 1e-9)]
        tol: f64,
    },
    /// Sample a geodesic of the Berger 3-sphere and check it against the
    /// group orbit; also check closure of the closed geodesics.
    Geodesic {
        #[arg(long, num_args = 3, allow_negative_numbers = true, value_names = ["A1", "A2", "A3"])]
        alpha: Vec<f64>,
        #[arg(long)]
        tau: f64,
        #[arg(long, default_value_t = 20.0)]
        s_max: f64,
        #[arg(long, default_value_t = 201)]
        samples: usize,
        #[arg(long, default_value_t = 6)]
        jmax: i64,
        #[arg(long, default_value_t = 1e-9)]
        tol: f64,
        /// Write s, re z1, im z1, re z2, im z2 rows here.
        #[arg(long)]
        csv: Option<PathBuf>,
    },
    /// Dump the presentation (basis matrices and scales).
    Describe {
        #[command(flatten)]
        pres: PresArgs,
    },
    /// Dump the catalog subspaces with their frames.
    Catalog {
        #[command(flatten)]
        pres: PresArgs,
    },
}

#[derive(Serialize)]
struct SpectrumRecord {
    tau: f64,
    family: Family,
    vector_class: &'static str,
    pairs: Vec<SpectrumPair>,
}

fn spectra(pres: Presentation, tol: f64, cmd: Vec<String>) -> Result<Report> {
    let model = CurvatureModel::new(pres);
    let p = model.presentation();
    let mut rep = Report::new(cmd, Some(p));
    let exp = tables::expected_jacobi(p.family(), p.n(), p.tau());
    let (full_v, full_h) = tables::expected_full(&exp);
    let mut records = Vec::new();
    for (class, x, e1, e2, full) in [
        ("vertical", p.x_hat(1)?, &exp.vertical_p1, &exp.vertical_p2, &full_v),
        ("horizontal", p.y_vec(1)?, &exp.horizontal_p1, &exp.horizontal_p2, &full_h),
    ] {
        let split = model.jacobi_split_spectrum(&x)?;
        for (block, want, got) in [("p1", e1, &split.p1), ("p2", e2, &split.p2)] {
            let dev = tables::spectrum_deviation(want, got);
            rep.push(Check::with_values(
                format!("{class} Jacobi spectrum on {block}"),
                want,
                got,
                dev.unwrap_or(f64::INFINITY),
                dev.is_some_and(|d| d <= tol),
            ));
        }
        rep.push(Check::residual(format!("{class} Jacobi block coupling"), split.coupling, tol));
        let all = model.jacobi_spectrum(&x)?;
        let dev = tables::spectrum_deviation(full, &all);
        rep.push(Check::with_values(
            format!("{class} Jacobi spectrum"),
            full,
            &all,
            dev.unwrap_or(f64::INFINITY),
            dev.is_some_and(|d| d <= tol),
        ));
        records.push(SpectrumRecord { tau: p.tau(), family: p.family(), vector_class: class, pairs: all });
    }
    rep.set_data(records);
    Ok(rep)
}

fn cmd_tables(pres: Presentation, tol: f64, cmd: Vec<String>) -> Result<Report> {
    let model = CurvatureModel::new(pres);
    let mut rep = Report::new(cmd, Some(model.presentation()));
    for id in tables::curvature_identities(&model)? {
        rep.push(Check::with_values(id.name, &id.expected, &id.actual, id.residual, id.residual <= tol));
    }
    Ok(rep)
}

fn verify_catalog(pres: Presentation, tol: f64, cmd: Vec<String>) -> Result<Report> {
    let model = CurvatureModel::new(pres);
    let p = model.presentation();
    let mut rep = Report::new(cmd, Some(p));
    let entries = catalog::catalog_entries(p)?;
    let mut checks = Vec::new();
    for e in &entries {
        let c = catalog::verify_entry(&model, e, tol)?;
        let name = format!("{} {}", c.tag, c.label);
        if let Some(cert) = &c.certificate {
            let want = if e.record.expected.well_positioned {
                subspace::Verdict::WellPositionedTG
            } else {
                subspace::Verdict::NotWellPositionedTG
            };
            rep.push(Check::with_values(format!("{name}: certificate"), want, cert.verdict, 0.0, cert.verdict == want));
        }
        rep.push(Check::residual(format!("{name}: curvature"), c.curvature_residual, catalog::CATALOG_CURVATURE_TOL));
        if let Some(r) = c.slope_residual {
            rep.push(Check::residual(format!("{name}: slope"), r, catalog::CATALOG_CURVATURE_TOL));
        }
        if let (Some(want), Some(got)) = (e.record.expected.phi, c.phi) {
            rep.push(Check::close(format!("{name}: phi"), want, got, tol));
        }
        rep.push(Check::residual(format!("{name}: nabla R invariance"), c.nabla_residuals[0], tol));
        rep.push(Check::residual(format!("{name}: nabla^2 R invariance"), c.nabla_residuals[1], tol));
        checks.push(c);
    }
    rep.set_data(serde_json::json!({
        "catalog": catalog::dump(&entries),
        "sectional": checks.iter().map(|c| (c.label.clone(), c.sectional)).collect::<Vec<_>>(),
    }));
    Ok(rep)
}

fn cmd_search(
    pres: Presentation,
    cfg: SearchConfig,
    hits_path: Option<&PathBuf>,
    cmd: Vec<String>,
) -> Result<Report> {
    let model = CurvatureModel::new(pres);
    let mut rep = Report::new(cmd, Some(model.presentation()));
    let res = search::search_planes(&model, &cfg)?;
    let s = &res.summary;
    rep.push(Check::with_values("unclassified hits", 0, s.unclassified, s.unclassified as f64, s.unclassified == 0));
    for (i, h) in res.hits.iter().enumerate() {
        if let HitStatus::Classified { tag, label } = &h.status {
            rep.push(Check::with_values(
                format!("hit {i}: {tag} {label}"),
                "totally geodesic",
                h.verdict,
                h.residual,
                h.residual <= cfg.objective_tol,
            ));
        }
    }
    match hits_path {
        Some(path) => {
            let mut f = fs::File::create(path).map_err(|e| GeometryError::Io(e.to_string()))?;
            let mut write = |line: String| writeln!(f, "{line}").map_err(|e| GeometryError::Io(e.to_string()));
            for h in &res.hits {
                write(report::to_json_string(h))?;
            }
            for r in &res.refinements {
                write(report::to_json_string(&serde_json::json!({ "refinement": r })))?;
            }
            write(report::to_json_string(&serde_json::json!({ "summary": s })))?;
            rep.set_data(serde_json::json!({ "config": cfg, "summary": s }));
        }
        None => rep.set_data(serde_json::json!({ "config": cfg, "summary": s, "hits": res.hits, "refinements": res.refinements })),
    }
    Ok(rep)
}

fn cmd_phi(tau: f64, points: usize, tol: f64, cmd: Vec<String>) -> Result<Report> {
    let pres = Presentation::build(Family::O, 1, tau)?;
    let mut rep = Report::new(cmd, Some(&pres));
    if points < 2 {
        return Err(GeometryError::InvalidArgument("need at least 2 points".into()));
    }
    let mut curve = Vec::new();
    for i in 0..points {
        let theta = i as f64 / (points - 1) as f64;
        let a = std::f64::consts::FRAC_PI_2 * theta;
        let p = subspace::phi_invariant(&pres, &catalog::v_theta(&pres, theta)?)?;
        let q = subspace::phi_invariant(&pres, &catalog::v_theta_prime(&pres, theta)?)?;
        rep.push(Check::close(format!("phi(V_theta) at theta = {theta}"), a.sin(), p, tol));
        rep.push(Check::close(format!("phi(V'_theta) at theta = {theta}"), a.cos(), q, tol));
        curve.push([theta, p, q]);
    }
    rep.set_data(serde_json::json!({ "columns": ["theta", "phi_v_theta", "phi_v_theta_prime"], "rows": curve }));
    Ok(rep)
}

#[allow(clippy::too_many_arguments)]
fn cmd_geodesic(
    alpha: &[f64],
    tau: f64,
    s_max: f64,
    samples: usize,
    jmax: i64,
    tol: f64,
    csv: Option<&PathBuf>,
    cmd: Vec<String>,
) -> Result<Report> {
    let g = GeodesicParams::new(alpha[0], alpha[1], alpha[2], tau)?;
    if samples < 2 || !(s_max > 0.0) {
        return Err(GeometryError::InvalidGeodesic("need samples >= 2 and s_max > 0".into()));
    }
    let mut rep = Report::new(cmd, None);
    let mut rows = String::from("s,re_z1,im_z1,re_z2,im_z2\n");
    let mut worst: f64 = 0.0;
    for k in 0..samples {
        let s = s_max * k as f64 / (samples - 1) as f64;
        let z = geodesics::berger_geodesic_point(&g, s);
        worst = worst.max((z - geodesics::orbit_oracle(&g, s)).norm());
        let r = geodesics::to_reals(&z);
        rows.push_str(&format!(
            "{},{},{},{},{}\n",
            report::fmt_f64(s),
            report::fmt_f64(r[0]),
            report::fmt_f64(r[1]),
            report::fmt_f64(r[2]),
            report::fmt_f64(r[3])
        ));
    }
    rep.push(Check::residual("closed form vs orbit", worst, tol));
    let closed = geodesics::closed_geodesics(tau, jmax, jmax)?;
    let mut worst_close: f64 = 0.0;
    for c in &closed {
        worst_close = worst_close.max(geodesics::closure_defect(c, tau)?);
    }
    rep.push(Check::residual(format!("closure of {} closed geodesics", closed.len()), worst_close, 1e-8));
    if let Some(path) = csv {
        fs::write(path, rows).map_err(|e| GeometryError::Io(e.to_string()))?;
    }
    rep.set_data(serde_json::json!({ "params": g, "slope": g.slope(), "closed": closed }));
    Ok(rep)
}

/// Parse an argument list whose first element is the program name.
pub fn parse<I, T>(args: I) -> std::result::Result<Cli, String>
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    Cli::try_parse_from(args).map_err(|e| e.to_string())
}

/// Run a parsed command and build its report.
pub fn execute(cli: &Cli, argv: Vec<String>) -> Result<Report> {
    match &cli.command {
        Command::Spectra { pres, tol } => spectra(pres.build()?, *tol, argv),
        Command::Tables { pres, tol } => cmd_tables(pres.build()?, *tol, argv),
        Command::VerifyCatalog { pres, tol } => verify_catalog(pres.build()?, *tol, argv),
        Command::Search { pres, restarts, seed, tol, isotropic, isotropy_weight, refine, max_iterations, hits } => {
            let cfg = SearchConfig {
                restarts: *restarts,
                seed: *seed,
                classify_tol: *tol,
                isotropy_weight: if *isotropic { *isotropy_weight } else { 0.0 },
                max_iterations: *max_iterations,
                refine_samples: *refine,
                ..Default::default()
            };
            cmd_search(pres.build()?, cfg, hits.as_ref(), argv)
        }
        Command::Phi { tau, points, tol } => cmd_phi(*tau, *points, *tol, argv),
        Command::Geodesic { alpha, tau, s_max, samples, jmax, tol, csv } => {
            cmd_geodesic(alpha, *tau, *s_max, *samples, *jmax, *tol, csv.as_ref(), argv)
        }
        Command::Describe { pres } => {
            let p = pres.build()?;
            let mut rep = Report::new(argv, Some(&p));
            rep.set_data(p.descriptor());
            Ok(rep)
        }
        Command::Catalog { pres } => {
            let p = pres.build()?;
            let mut rep = Report::new(argv, Some(&p));
            rep.set_data(catalog::dump(&catalog::catalog_entries(&p)?));
            Ok(rep)
        }
    }
}

/// Parse, run, write the report and return the process exit code.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let argv: Vec<std::ffi::OsString> = args.into_iter().map(Into::into).collect();
    let cli = match Cli::try_parse_from(&argv) {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { 2 } else { 0 };
        }
    };
    let echo: Vec<String> = argv.iter().skip(1).map(|a| a.to_string_lossy().into_owned()).collect();
    let start = Instant::now();
    let mut rep = match execute(&cli, echo) {
        Ok(r) => r,
        Err(e) => {
            eprintln!("error: {e}");
            return 2;
        }
    };
    if cli.output.timing {
        rep.wall_time_s = Some(start.elapsed().as_secs_f64());
    }
    let text = match cli.output.format {
        Format::Json => rep.to_json() + "\n",
        Format::Markdown => rep.to_markdown(),
    };
    let written = match &cli.output.out {
        Some(path) => fs::write(path, text),
        None => std::io::stdout().write_all(text.as_bytes()),
    };
    if let Err(e) = written {
        eprintln!("error: {e}");
        return 2;
    }
    for c in rep.failures() {
        eprintln!("FAIL {}: residual {}", c.name, report::fmt_f64(c.residual));
    }
    if rep.pass {
        0
    } else {
        1
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn report(args: &[&str]) -> Report {
        let mut full = vec!["hopf-berger"];
        full.extend_from_slice(args);
        let cli = Cli::try_parse_from(&full).unwrap();
        execute(&cli, args.iter().map(|s| s.to_string()).collect()).unwrap()
    }

    #[test]
    fn spectra_octonionic() {
        let r = report(&["spectra", "--family", "O", "--tau", "0.25"]);
        assert!(r.pass, "{}", r.to_markdown());
        let s = r.to_json();
        assert!(s.contains("\"vector_class\":\"horizontal\""));
    }

    #[test]
    fn tables_and_catalog() {
        assert!(report(&["tables", "--family", "H", "--n", "1", "--tau", "0.5"]).pass);
        let r = report(&["verify-catalog", "--family", "C", "--n", "3", "--tau", "0.7"]);
        assert!(r.pass);
        assert!(!r.to_json().contains("NWP_"));
    }

    #[test]
    fn phi_and_geodesic() {
        assert!(report(&["phi", "--tau", "0.4"]).pass);
        let r = report(&["geodesic", "--alpha", "0.6", "0", "-0.8", "--tau", "2.0"]);
        assert!(r.pass, "{}", r.to_markdown());
    }

    #[test]
    fn exit_codes() {
        assert_eq!(run(["hopf-berger", "spectra", "--family", "X", "--tau", "0.3"]), 2);
        assert_eq!(run(["hopf-berger", "spectra", "--family", "C", "--tau", "-1", "--out", "/dev/null"]), 2);
        assert_eq!(run(["hopf-berger", "spectra", "--family", "C", "--tau", "0.3", "--out", "/dev/null"]), 0);
        assert_eq!(run(["hopf-berger", "tables", "--family", "C", "--tau", "0.3", "--tol", "0", "--out", "/dev/null"]), 1);
    }

    #[test]
    fn reports_are_deterministic() {
        let a = report(&["search", "--family", "H", "--tau", "0.3", "--restarts", "8", "--isotropic"]).to_json();
        let b = report(&["search", "--family", "H", "--tau", "0.3", "--restarts", "8", "--isotropic"]).to_json();
        assert_eq!(a, b);
    }
}
