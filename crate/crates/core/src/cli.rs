//! Command-line front end: model files, analysis commands, JSON reports
//! and CSV output.

use std::ffi::OsString;
use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::{Deserialize, Serialize};
use serde_json::{json, Value};
use sha2::{Digest, Sha256};

use crate::error::{Error, Result};
use crate::experiments::{self, EnsembleConfig, EnsembleRow, SweepRow};
use crate::kernels::{CMatrix, Hermitian, Tolerances, C64};
use crate::kyp::{self, Certificate};
use crate::normalization;
use crate::passify::{self, NormKind};
use crate::radius::{self, Perturbation};
use crate::system::{self, StateSpaceModel};
use crate::xi::{self, Direction};

pub const SCHEMA_VERSION: &str = "1";

pub const EXIT_OK: i32 = 0;
pub const EXIT_INTERNAL: i32 = 1;
pub const EXIT_DOMAIN: i32 = 2;
pub const EXIT_USAGE: i32 = 64;

const DERIVED_TAU: f64 = 1e-8;

type Rows = Vec<Vec<[f64; 2]>>;

/// On-disk model: complex entries as `[re, im]` pairs, row-major.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ModelFile {
    pub schema_version: String,
    pub n: usize,
    pub m: usize,
    #[serde(rename = "A")]
    pub a: Rows,
    #[serde(rename = "B")]
    pub b: Rows,
    #[serde(rename = "C")]
    pub c: Rows,
    #[serde(rename = "D")]
    pub d: Rows,
    #[serde(rename = "X", default, skip_serializing_if = "Option::is_none")]
    pub x: Option<Rows>,
}

fn parse_err(location: impl Into<String>, message: impl Into<String>) -> Error {
    Error::Parse {
        location: location.into(),
        message: message.into(),
    }
}

fn to_matrix(name: &str, rows: &Rows, r: usize, cl: usize) -> Result<CMatrix> {
    if rows.len() != r || rows.iter().any(|row| row.len() != cl) {
        let got_cols = rows.first().map_or(0, Vec::len);
        return Err(Error::dim(name, format!("{r}x{cl}"), format!("{}x{}", rows.len(), got_cols)));
    }
    for (i, row) in rows.iter().enumerate() {
        for (j, e) in row.iter().enumerate() {
            if !(e[0].is_finite() && e[1].is_finite()) {
                return Err(parse_err(format!("{name}[{i}][{j}]"), "non-finite entry"));
            }
        }
    }
    Ok(CMatrix::from_fn(r, cl, |i, j| C64::new(rows[i][j][0], rows[i][j][1])))
}

fn to_rows(m: &CMatrix) -> Rows {
    (0..m.nrows())
        .map(|i| (0..m.ncols()).map(|j| [m[(i, j)].re, m[(i, j)].im]).collect())
        .collect()
}

impl ModelFile {
    pub fn from_model(model: &StateSpaceModel, x: Option<&Hermitian>) -> Self {
        ModelFile {
            schema_version: SCHEMA_VERSION.into(),
            n: model.n(),
            m: model.m(),
            a: to_rows(model.a()),
            b: to_rows(model.b()),
            c: to_rows(model.c()),
            d: to_rows(model.d()),
            x: x.map(|x| to_rows(x.matrix())),
        }
    }

    pub fn model(&self) -> Result<StateSpaceModel> {
        if self.schema_version != SCHEMA_VERSION {
            return Err(parse_err(
                "schema_version",
                format!("unsupported version {:?}, expected {SCHEMA_VERSION:?}", self.schema_version),
            ));
        }
        let (n, m) = (self.n, self.m);
        StateSpaceModel::new(
            to_matrix("A", &self.a, n, n)?,
            to_matrix("B", &self.b, n, m)?,
            to_matrix("C", &self.c, m, n)?,
            to_matrix("D", &self.d, m, m)?,
        )
    }

    pub fn certificate_matrix(&self) -> Result<Option<Hermitian>> {
        self.x
            .as_ref()
            .map(|x| Hermitian::new(to_matrix("X", x, self.n, self.n)?))
            .transpose()
    }
}

#[derive(Debug, Clone)]
pub struct LoadedModel {
    pub model: StateSpaceModel,
    pub certificate: Option<Certificate>,
    /// Canonical serialization, the input to the report digest.
    pub canonical: String,
}

pub fn parse_model_str(text: &str, tol: &Tolerances) -> Result<LoadedModel> {
    let file: ModelFile =
        serde_json::from_str(text).map_err(|e| parse_err(format!("line {}, column {}", e.line(), e.column()), e.to_string()))?;
    let model = file.model()?;
    let certificate = match file.certificate_matrix()? {
        Some(x) => Some(kyp::classify_certificate(&x, &model, tol)?),
        None => None,
    };
    let canonical = serde_json::to_string(&file).expect("model file serializes");
    Ok(LoadedModel {
        model,
        certificate,
        canonical,
    })
}

pub fn parse_model(path: &Path, tol: &Tolerances) -> Result<LoadedModel> {
    let text = std::fs::read_to_string(path)?;
    parse_model_str(&text, tol).map_err(|e| match e {
        Error::Parse { location, message } => parse_err(format!("{}: {location}", path.display()), message),
        other => other,
    })
}

pub fn write_model(path: &Path, model: &StateSpaceModel, x: Option<&Hermitian>) -> Result<()> {
    let text = serde_json::to_string_pretty(&ModelFile::from_model(model, x)).expect("model file serializes");
    std::fs::write(path, text + "\n")?;
    Ok(())
}

/// Rows that can be written as CSV.
pub trait CsvRow {
    fn header() -> &'static [&'static str];
    fn record(&self) -> Vec<String>;
}

fn g17(x: f64) -> String {
    format!("{x:.16e}")
}

impl CsvRow for EnsembleRow {
    fn header() -> &'static [&'static str] {
        &[
            "index", "seed", "rho", "lam_w", "lam_wt", "lam_ds", "est", "ratio_w", "ratio_wt", "ratio_ds", "ratio_est",
        ]
    }

    fn record(&self) -> Vec<String> {
        let mut r = vec![self.index.to_string(), self.seed.to_string()];
        r.extend(
            [
                self.rho,
                self.lam_w,
                self.lam_wt,
                self.lam_ds,
                self.est,
                self.ratio_w,
                self.ratio_wt,
                self.ratio_ds,
                self.ratio_est,
            ]
            .map(g17),
        );
        r
    }
}

impl CsvRow for SweepRow {
    fn header() -> &'static [&'static str] {
        &["t", "b_t", "c_t", "rho_t", "lam_w_t", "lam_ds_t"]
    }

    fn record(&self) -> Vec<String> {
        [self.t, self.b_t, self.c_t, self.rho_t, self.lam_w_t, self.lam_ds_t].map(g17).to_vec()
    }
}

pub fn write_csv<T: CsvRow, W: Write>(rows: &[T], out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    let io = |e: csv::Error| Error::Io(std::io::Error::other(e));
    w.write_record(T::header()).map_err(io)?;
    for row in rows {
        w.write_record(row.record()).map_err(io)?;
    }
    w.flush()?;
    Ok(())
}

pub fn emit_csv<T: CsvRow>(rows: &[T], path: &Path) -> Result<()> {
    write_csv(rows, std::fs::File::create(path)?)
}

#[derive(Debug, Parser)]
#[command(name = "passivity", version, about = "Passivity analysis of discrete-time state-space models")]
pub struct Cli {
    #[command(flatten)]
    pub tol: TolFlags,
    /// Write the JSON report here instead of stdout.
    #[arg(long, global = true)]
    pub output: Option<PathBuf>,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Args)]
pub struct TolFlags {
    #[arg(long, global = true)]
    pub tol_rank: Option<f64>,
    #[arg(long, global = true)]
    pub tol_psd: Option<f64>,
    #[arg(long, global = true)]
    pub tol_eig: Option<f64>,
    #[arg(long, global = true)]
    pub tol_circle: Option<f64>,
    #[arg(long, global = true)]
    pub tol_golden: Option<f64>,
    #[arg(long, global = true)]
    pub tol_bisect: Option<f64>,
}

impl TolFlags {
    pub fn tolerances(&self) -> Result<Tolerances> {
        let mut t = Tolerances::default();
        let set = |slot: &mut f64, v: Option<f64>| {
            if let Some(v) = v {
                *slot = v;
            }
        };
        set(&mut t.rank_tol, self.tol_rank);
        set(&mut t.psd_tol, self.tol_psd);
        set(&mut t.eig_tol, self.tol_eig);
        set(&mut t.circle_tol, self.tol_circle);
        set(&mut t.golden_tol, self.tol_golden);
        set(&mut t.bisect_tau, self.tol_bisect);
        t.validate()?;
        Ok(t)
    }
}

#[derive(Debug, Args)]
pub struct ModelArgs {
    #[arg(long)]
    pub model: PathBuf,
}

#[derive(Debug, Args)]
pub struct CertArgs {
    #[command(flatten)]
    pub model: ModelArgs,
    /// Certificate `x·I`; overrides an `X` stored in the model file.
    #[arg(long)]
    pub x: Option<f64>,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
pub enum NormArg {
    #[value(name = "2")]
    Two,
    #[value(name = "fro")]
    Fro,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Minimality, stability and passivity summary.
    Analyze(CertArgs),
    /// Normalized realization for a certificate.
    Normalize {
        #[command(flatten)]
        cert: CertArgs,
        /// Also write the normalized model file here.
        #[arg(long)]
        write_model: Option<PathBuf>,
    },
    /// X-passivity radius, minimal perturbation and bounds.
    Radius(CertArgs),
    /// Supremum of the LMI shift by both procedures.
    Xi {
        #[command(flatten)]
        model: ModelArgs,
        #[arg(long, default_value_t = 1e-8)]
        tau: f64,
    },
    /// Distance to passivity.
    Passify {
        #[command(flatten)]
        model: ModelArgs,
        #[arg(long, default_value_t = 1e-8)]
        tau: f64,
        #[arg(long, value_enum, default_value = "2")]
        norm: NormArg,
        #[arg(long, default_value_t = 5000)]
        budget: usize,
    },
    /// Distance to stability of `A`.
    Stability(ModelArgs),
    /// Reproducible numerical experiments.
    #[command(subcommand)]
    Experiment(Experiment),
}

#[derive(Debug, Subcommand)]
pub enum Experiment {
    /// Random ensemble of exact radii against cheap estimates.
    Figure1 {
        #[arg(long, default_value_t = 50)]
        count: usize,
        #[arg(long, default_value_t = 5)]
        n: usize,
        #[arg(long, default_value_t = 2)]
        m: usize,
        #[arg(long, default_value_t = 1)]
        seed: u64,
        #[arg(long, default_value_t = 0.05)]
        margin: f64,
        /// CSV destination; stdout when absent.
        #[arg(long)]
        csv: Option<PathBuf>,
    },
    /// Radius of `{a, bt, c/t, d}` over the admissible `t`.
    Scalar {
        #[arg(long, allow_negative_numbers = true)]
        a: f64,
        #[arg(long, allow_negative_numbers = true)]
        b: f64,
        #[arg(long, allow_negative_numbers = true)]
        c: f64,
        #[arg(long, allow_negative_numbers = true)]
        d: f64,
        /// Number of grid points.
        #[arg(long, default_value_t = 101)]
        grid: usize,
        #[arg(long)]
        csv: Option<PathBuf>,
    },
}

/// Outcome of one command: a JSON report and, for experiments, CSV text.
#[derive(Debug, Clone)]
pub struct Outcome {
    pub report: Value,
    pub csv: Option<(Option<PathBuf>, Vec<u8>)>,
}

fn mat_json(m: &CMatrix) -> Value {
    json!(to_rows(m))
}

fn perturbation_json(p: &Perturbation) -> Result<Value> {
    Ok(json!({
        "delta_a": mat_json(&p.delta_a),
        "delta_b": mat_json(&p.delta_b),
        "delta_c": mat_json(&p.delta_c),
        "delta_d": mat_json(&p.delta_d),
        "norm2": p.norm2()?,
        "norm_fro": p.norm_fro(),
    }))
}

fn certificate_json(c: &Certificate) -> Value {
    json!({
        "x": mat_json(c.x.matrix()),
        "classification": c.classification,
        "lambda_min_w": c.lambda_min_w,
        "lambda_min_x": c.lambda_min_x,
    })
}

fn digest(parts: &[&str]) -> String {
    let mut h = Sha256::new();
    for p in parts {
        h.update((p.len() as u64).to_le_bytes());
        h.update(p.as_bytes());
    }
    h.finalize().iter().map(|b| format!("{b:02x}")).collect()
}

/// Certificate from `--x`, the model file, or the near-optimal certificate
/// of the shift supremum.
fn resolve_certificate(loaded: &LoadedModel, x: Option<f64>, tol: &Tolerances, warnings: &mut Vec<String>) -> Result<Certificate> {
    let n = loaded.model.n();
    if let Some(x) = x {
        return kyp::classify_certificate(&Hermitian::new(Hermitian::identity(n).matrix().scale(x))?, &loaded.model, tol);
    }
    if let Some(c) = &loaded.certificate {
        return Ok(c.clone());
    }
    let res = xi::xi_sup_eigenvalue(&loaded.model, DERIVED_TAU, tol)?;
    warnings.push(format!("no certificate given; using the near-optimal one (Xi >= {:e})", res.xi_lo));
    xi::near_optimal_certificate(&loaded.model, &res, tol)
}

fn analyze(loaded: &LoadedModel, x: Option<f64>, tol: &Tolerances, warnings: &mut Vec<String>) -> Result<Value> {
    let model = &loaded.model;
    let mr = system::validate_minimal(model, tol)?;
    if !mr.minimal() {
        warnings.push("model is not minimal".into());
    }
    let sm = xi::shift_model(model, 0.0, Direction::Forward)?;
    let circle = xi::has_unit_circle_zeros(&sm, tol)?;
    let strict = xi::strictly_passive(&sm, tol)?;
    let passive = xi::passive(&sm, tol)?;
    let cert = if x.is_some() || loaded.certificate.is_some() || strict {
        match resolve_certificate(loaded, x, tol, warnings) {
            Ok(c) => certificate_json(&c),
            Err(e) if e.is_domain() => {
                warnings.push(format!("no certificate: {e}"));
                Value::Null
            }
            Err(e) => return Err(e),
        }
    } else {
        Value::Null
    };
    Ok(json!({
        "n": model.n(),
        "m": model.m(),
        "minimality": {
            "controllable": mr.controllable,
            "observable": mr.observable,
            "ctrl_rank": mr.ctrl_rank,
            "obs_rank": mr.obs_rank,
            "minimal": mr.minimal(),
        },
        "stability": {
            "spectral_radius": mr.spectral_radius,
            "stable": mr.stable,
            "asymptotically_stable": mr.asymptotically_stable,
        },
        "passivity": {
            "strictly_passive": strict,
            "passive": passive,
            "unit_circle_zeros": circle.omegas,
        },
        "certificate": cert,
    }))
}

fn normalize_cmd(loaded: &LoadedModel, x: Option<f64>, out: Option<&Path>, tol: &Tolerances, warnings: &mut Vec<String>) -> Result<Value> {
    let cert = resolve_certificate(loaded, x, tol, warnings)?;
    let mt = normalization::normalize(&loaded.model, &cert, tol)?;
    let check = normalization::verify_normalized(&mt.model, tol)?;
    if let Some(p) = out {
        write_model(p, &mt.model, Some(&Hermitian::identity(mt.model.n())))?;
    }
    Ok(json!({
        "certificate": certificate_json(&cert),
        "t": mat_json(&mt.t),
        "model": ModelFile::from_model(&mt.model, None),
        "check": {
            "normalized": check.normalized,
            "lambda_min": check.lambda_min,
            "contractive": check.contractive,
            "norm_a": check.norm_a,
        },
    }))
}

fn radius_cmd(loaded: &LoadedModel, x: Option<f64>, tol: &Tolerances, warnings: &mut Vec<String>) -> Result<Value> {
    let cert = resolve_certificate(loaded, x, tol, warnings)?;
    let r = radius::x_passivity_radius(&loaded.model, &cert.x, tol)?;
    Ok(json!({
        "certificate": certificate_json(&cert),
        "rho": r.rho,
        "bounds": {
            "lower": r.lower_bound,
            "upper": r.upper_bound,
            "inverse_alpha_beta": r.inverse_alpha_beta,
            "scaled_eig_bound": r.scaled_eig_bound,
        },
        "est": r.est,
        "gamma_star": r.search.gamma_star,
        "alpha": r.search.alpha,
        "beta": r.search.beta,
        "delta": perturbation_json(&r.delta)?,
    }))
}

fn xi_cmd(loaded: &LoadedModel, tau: f64, tol: &Tolerances, warnings: &mut Vec<String>) -> Result<Value> {
    let model = &loaded.model;
    let bis = xi::xi_sup_bisection(model, tau, tol)?;
    let eig = xi::xi_sup_eigenvalue(model, tau, tol)?;
    let gap = (bis.xi_lo - eig.xi_lo).abs();
    let agree = gap <= 2.0 * tau;
    if !agree {
        warnings.push(format!("procedures disagree by {gap:e} > 2 tau"));
    }
    let cert = match xi::near_optimal_certificate(model, &eig, tol) {
        Ok(c) => {
            let star = xi::xi_star(model, &c, tol)?;
            json!({ "certificate": certificate_json(&c), "xi_star": star })
        }
        Err(e) if e.is_domain() => {
            warnings.push(format!("no near-optimal certificate: {e}"));
            Value::Null
        }
        Err(e) => return Err(e),
    };
    Ok(json!({
        "tau": tau,
        "bisection": bis,
        "eigenvalue": eig,
        "difference": gap,
        "agree": agree,
        "near_optimal": cert,
    }))
}

fn passify_cmd(loaded: &LoadedModel, tau: f64, norm: NormArg, budget: usize, tol: &Tolerances, warnings: &mut Vec<String>) -> Result<Value> {
    let norm = match norm {
        NormArg::Two => NormKind::Two,
        NormArg::Fro => NormKind::Frobenius,
    };
    let r = passify::distance_to_passivity(&loaded.model, tau, norm, budget, tol)?;
    if !r.refinement_converged {
        warnings.push("refinement did not converge; the constrained perturbation bounds the distance".into());
    }
    Ok(json!({
        "tau": tau,
        "norm": norm,
        "xi_big": r.xi_big,
        "delta_constrained": perturbation_json(&r.delta_constrained)?,
        "certificate": certificate_json(&r.x_cert),
        "certificate_xi": r.certificate_xi,
        "delta_refined": r.delta_refined.as_ref().map(perturbation_json).transpose()?,
        "sigma2": r.sigma2,
        "sigma_frob": r.sigma_frob,
        "refinement_converged": r.refinement_converged,
    }))
}

fn experiment_cmd(e: &Experiment, tol: &Tolerances) -> Result<(Value, Option<PathBuf>, Vec<u8>)> {
    let mut buf = vec![];
    match e {
        Experiment::Figure1 {
            count,
            n,
            m,
            seed,
            margin,
            csv,
        } => {
            let cfg = EnsembleConfig {
                count: *count,
                n: *n,
                m: *m,
                seed: *seed,
                margin: *margin,
                ..Default::default()
            };
            let ens = experiments::figure1_experiment(&cfg, tol)?;
            write_csv(&ens.rows, &mut buf)?;
            let inputs = json!({ "count": count, "n": n, "m": m, "seed": seed, "margin": margin });
            Ok((json!({ "experiment": "figure1", "inputs": inputs, "summary": ens.summary }), csv.clone(), buf))
        }
        Experiment::Scalar { a, b, c, d, grid, csv } => {
            let range = experiments::scalar_certificate_range(*a, *b, *c, *d)?;
            let sw = experiments::scalar_sweep(*a, *b, *c, *d, &experiments::sweep_grid(range, *grid), tol)?;
            write_csv(&sw.rows, &mut buf)?;
            let inputs = json!({ "a": a, "b": b, "c": c, "d": d, "grid": grid });
            let summary = json!({
                "x_range": [sw.x_range.0, sw.x_range.1],
                "balanced_index": sw.balanced_index,
                "argmax_index": sw.argmax_index,
                "balanced": sw.rows[sw.balanced_index],
                "argmax": sw.rows[sw.argmax_index],
            });
            Ok((json!({ "experiment": "scalar", "inputs": inputs, "summary": summary }), csv.clone(), buf))
        }
    }
}

fn command_name(c: &Command) -> &'static str {
    match c {
        Command::Analyze(_) => "analyze",
        Command::Normalize { .. } => "normalize",
        Command::Radius(_) => "radius",
        Command::Xi { .. } => "xi",
        Command::Passify { .. } => "passify",
        Command::Stability(_) => "stability",
        Command::Experiment(_) => "experiment",
    }
}

/// Runs a parsed command. Reports carry no timestamp, so equal inputs give
/// byte-identical output.
pub fn execute(cli: &Cli) -> Result<Outcome> {
    let tol = cli.tol.tolerances()?;
    let mut warnings = vec![];
    let load = |p: &Path| parse_model(p, &tol);
    let mut csv = None;
    let (inputs, results) = match &cli.command {
        Command::Analyze(a) => {
            let l = load(&a.model.model)?;
            let r = analyze(&l, a.x, &tol, &mut warnings)?;
            (vec![l.canonical, format!("x={:?}", a.x)], r)
        }
        Command::Normalize { cert, write_model } => {
            let l = load(&cert.model.model)?;
            let r = normalize_cmd(&l, cert.x, write_model.as_deref(), &tol, &mut warnings)?;
            (vec![l.canonical, format!("x={:?}", cert.x)], r)
        }
        Command::Radius(a) => {
            let l = load(&a.model.model)?;
            let r = radius_cmd(&l, a.x, &tol, &mut warnings)?;
            (vec![l.canonical, format!("x={:?}", a.x)], r)
        }
        Command::Xi { model, tau } => {
            let l = load(&model.model)?;
            let r = xi_cmd(&l, *tau, &tol, &mut warnings)?;
            (vec![l.canonical, format!("tau={tau:e}")], r)
        }
        Command::Passify {
            model,
            tau,
            norm,
            budget,
        } => {
            let l = load(&model.model)?;
            let r = passify_cmd(&l, *tau, *norm, *budget, &tol, &mut warnings)?;
            (vec![l.canonical, format!("tau={tau:e} norm={norm:?} budget={budget}")], r)
        }
        Command::Stability(m) => {
            let l = load(&m.model)?;
            let r = json!(passify::distance_to_stability(l.model.a(), &tol)?);
            (vec![l.canonical], r)
        }
        Command::Experiment(e) => {
            let (r, path, bytes) = experiment_cmd(e, &tol)?;
            let inputs = r["inputs"].to_string();
            csv = Some((path, bytes));
            (vec![inputs], r)
        }
    };
    let name = command_name(&cli.command);
    let tol_text = serde_json::to_string(&tol).expect("tolerances serialize");
    let mut parts: Vec<&str> = vec![name, &tol_text];
    parts.extend(inputs.iter().map(String::as_str));
    let report = json!({
        "command": name,
        "inputs_digest": digest(&parts),
        "tolerances": tol,
        "results": results,
        "warnings": warnings,
    });
    Ok(Outcome { report, csv })
}

pub fn exit_code(e: &Error) -> i32 {
    if e.is_domain() {
        EXIT_DOMAIN
    } else {
        EXIT_INTERNAL
    }
}

fn deliver(cli: &Cli, out: &Outcome, stdout: &mut dyn Write) -> Result<()> {
    let text = serde_json::to_string_pretty(&out.report).expect("report serializes") + "\n";
    if let Some((path, bytes)) = &out.csv {
        match path {
            Some(p) => std::fs::write(p, bytes)?,
            None => stdout.write_all(bytes)?,
        }
    }
    match &cli.output {
        Some(p) => std::fs::write(p, text)?,
        // with CSV on stdout the report goes only to a file
        None if matches!(&out.csv, Some((None, _))) => {}
        None => stdout.write_all(text.as_bytes())?,
    }
    Ok(())
}

/// Parses `args`, runs the command and returns the process exit code.
pub fn run<I, T>(args: I, stdout: &mut dyn Write, stderr: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_USAGE } else { EXIT_OK };
            let text = e.render().to_string();
            let _ = if e.use_stderr() {
                stderr.write_all(text.as_bytes())
            } else {
                stdout.write_all(text.as_bytes())
            };
            return code;
        }
    };
    match execute(&cli).and_then(|out| deliver(&cli, &out, stdout)) {
        Ok(()) => EXIT_OK,
        Err(e) => {
            let _ = writeln!(stderr, "error: {e}");
            exit_code(&e)
        }
    }
}
