//! `nokholo`: command-line front end for the exact computations in
//! `nokholo-core`.
//!
//! Exit status: 0 success, 1 usage or I/O error, 2 mathematical
//! precondition violated, 3 no fit found.

mod files;
mod report;
mod svg;

use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};
use nokholo_core::cohomology::{kunneth_table, parse_factors, MultidegreeRay, TableSidecar};
use nokholo_core::holonomic::{certify_complexity, CertifyOptions, Verdict};
use nokholo_core::nok::{build_o31_family, classify_boundary, nok_surface_body, polyhedral_control_family, slice_bodies, FlagOnSurface};
use nokholo_core::rational::parse_q;
use nokholo_core::zariski::zariski_decompose;
use nokholo_core::CoefficientTable;
use serde_json::json;

use files::{load_surface, read, to_json_text, write_atomic};

#[derive(Debug)]
pub enum CliError {
    Usage(String),
    Io(String),
    Math(nokholo_core::Error),
    NoFit(String),
}

impl From<nokholo_core::Error> for CliError {
    fn from(e: nokholo_core::Error) -> Self {
        if e.is_precondition() {
            CliError::Math(e)
        } else {
            CliError::Usage(e.to_string())
        }
    }
}

impl CliError {
    fn code(&self) -> u8 {
        match self {
            CliError::Usage(_) | CliError::Io(_) => 1,
            CliError::Math(_) => 2,
            CliError::NoFit(_) => 3,
        }
    }
}

impl std::fmt::Display for CliError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            CliError::Usage(m) | CliError::Io(m) | CliError::NoFit(m) => f.write_str(m),
            CliError::Math(e) => write!(f, "{e}"),
        }
    }
}

#[derive(Parser)]
#[command(name = "nokholo", version, about = "Newton–Okounkov bodies and holonomicity certificates, exactly")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
enum Family {
    /// `O(3,1)` on `P^(d-2) x P2`, sliced on `E x E`.
    O31,
    /// `2H - E` on the blow-up of the plane at a point.
    Control,
}

#[derive(Subcommand)]
enum Command {
    /// Zariski decomposition `B = P + N` of a class on a surface.
    Zariski {
        /// Surface JSON (path, or fixture name such as blowup.json).
        surface: String,
        /// Class expression, e.g. "H+2E".
        class: String,
        #[arg(short, long)]
        out: Option<PathBuf>,
    },
    /// Newton–Okounkov body of a nef class for a (curve, point) flag.
    Body {
        surface: String,
        class: String,
        /// Flag curve class.
        #[arg(long)]
        curve: String,
        /// Put the flag point on this negative curve (label or index)
        /// instead of a general point.
        #[arg(long)]
        point: Option<String>,
        /// Writes body.json and body.svg here.
        #[arg(long)]
        out_dir: Option<PathBuf>,
    },
    /// Nef-boundary slice family with its exact boundary verdict.
    Slice {
        /// Dimension of the ambient product `P^(d-2) x P2`.
        #[arg(long, default_value_t = 4)]
        dim: i64,
        /// Number of sample points `s = j*eps/k`.
        #[arg(long, default_value_t = 9)]
        grid: usize,
        /// Slice width, as "p/q".
        #[arg(long)]
        epsilon: Option<String>,
        #[arg(long, value_enum, default_value = "o31")]
        family: Family,
        /// Writes slice.json, boundary.svg and sections.svg here.
        #[arg(long)]
        out_dir: Option<PathBuf>,
    },
    /// Table of `dim H^i(X, O(nD))` on a product, as CSV.
    Complexity {
        /// Factors such as "P2xP2", "ExP1", "E~xP3".
        #[arg(long)]
        factors: String,
        /// Slopes of the ray, e.g. "3,1".
        #[arg(long, allow_hyphen_values = true)]
        ray: String,
        #[arg(short = 'N', long = "n-max", default_value_t = 40)]
        n_max: usize,
        /// CSV path; a JSON sidecar is written next to it.
        #[arg(short, long)]
        out: Option<PathBuf>,
    },
    /// Fits each q-slice and certifies holonomicity of the complexity function.
    Certify {
        table: PathBuf,
        #[arg(long)]
        deg_num: Option<usize>,
        #[arg(long)]
        deg_den: Option<usize>,
        #[arg(long, default_value_t = 10)]
        holdout: usize,
        #[arg(long, default_value_t = 1)]
        modulus: usize,
        #[arg(long)]
        max_transient: Option<usize>,
        #[arg(short, long)]
        out: Option<PathBuf>,
    },
    /// HTML bundle with a slice verdict and a certificate side by side.
    Report {
        #[arg(long)]
        slice: PathBuf,
        #[arg(long)]
        certificate: PathBuf,
        #[arg(short, long)]
        out: Option<PathBuf>,
    },
}

fn emit(out: Option<&Path>, text: &str) -> Result<(), CliError> {
    match out {
        Some(p) => write_atomic(p, text),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

fn zariski(surface: &str, class: &str, out: Option<&Path>) -> Result<(), CliError> {
    let s = load_surface(surface)?;
    let b = s.parse_class(class)?;
    let z = zariski_decompose(&s, &b)?;
    emit(out, &to_json_text(&z.to_json(&s)))
}

fn body(surface: &str, class: &str, curve: &str, point: Option<&str>, out_dir: Option<&Path>) -> Result<(), CliError> {
    let s = load_surface(surface)?;
    let b = s.parse_class(class)?;
    if curve.trim().is_empty() {
        return Err(CliError::Usage("empty flag curve".into()));
    }
    let c = s.parse_class(curve)?;
    let point = match point {
        None => None,
        Some(p) => Some(match p.parse::<usize>() {
            Ok(i) => i,
            Err(_) => {
                let class = s.parse_class(p)?;
                s.negative_curves()
                    .iter()
                    .position(|x| *x == class)
                    .ok_or_else(|| CliError::Usage(format!("{p:?} is not a listed negative curve")))?
            }
        }),
    };
    let flag = FlagOnSurface::new(&s, c, point)?;
    let body = nok_surface_body(&s, &b, &flag)?;
    let mut doc = body.to_json();
    doc["surface"] = s.id().into();
    doc["class"] = s.format_class(&b).into();
    doc["flag"] = json!({ "curve": s.format_class(&flag.curve_class), "point_on_negative_curve": flag.point_on_negative_curve });
    let text = to_json_text(&doc);
    if let Some(dir) = out_dir {
        write_atomic(&dir.join("body.json"), &text)?;
        let title = format!("body of {} on {}", s.format_class(&b), s.id());
        write_atomic(&dir.join("body.svg"), &svg::body_svg(&body, &title))?;
    }
    print!("{text}");
    Ok(())
}

fn slice(dim: i64, grid: usize, epsilon: Option<&str>, family: Family, out_dir: Option<&Path>) -> Result<(), CliError> {
    let (mut fam, fixture, divisor) = match family {
        Family::O31 => {
            let fam = build_o31_family(dim)?;
            let divisor = json!({ "label": "O(3,1)", "factors": format!("P{}xP2", dim - 2), "ray": [3, 1] });
            (fam, "exe2.json", divisor)
        }
        Family::Control => (polyhedral_control_family(), "blowup.json", serde_json::Value::Null),
    };
    if let Some(e) = epsilon {
        let e = parse_q(e)?;
        if e <= nokholo_core::Q::from_integer(0.into()) {
            return Err(CliError::Usage("epsilon must be positive".into()));
        }
        fam.epsilon = e;
    }
    let points = fam.grid(grid);
    for x in &points {
        if !fam.surface.is_nef(&fam.base.shifted(x, &fam.shift)?)? {
            return Err(CliError::Math(nokholo_core::Error::NotNef));
        }
    }
    let region = fam.region(&points)?;
    let verdict = classify_boundary(&region)?;
    let doc = json!({
        "family": family.to_possible_value().map(|v| v.get_name().to_string()),
        "dim": if family == Family::O31 { json!(dim) } else { serde_json::Value::Null },
        "label": fam.label,
        "divisor": divisor,
        "surface_fixture": fixture,
        "region": region.to_json(&fam.surface),
        "verdict": verdict,
    });
    let text = to_json_text(&doc);
    if let Some(dir) = out_dir {
        write_atomic(&dir.join("slice.json"), &text)?;
        write_atomic(&dir.join("boundary.svg"), &svg::boundary_svg(&region, &fam.label))?;
        let flag = FlagOnSurface::generic(&fam.surface, fam.curve.clone())?;
        let bodies = slice_bodies(&fam.surface, &fam.base, &fam.shift, &flag, &points)?;
        write_atomic(&dir.join("sections.svg"), &svg::slice_family_svg(&bodies, &fam.label))?;
    }
    print!("{text}");
    Ok(())
}

fn sidecar_path(csv: &Path) -> PathBuf {
    csv.with_extension("json")
}

fn complexity(factors: &str, ray: &str, n_max: usize, out: Option<&Path>) -> Result<(), CliError> {
    let factors = parse_factors(factors)?;
    let ray: MultidegreeRay = ray.parse()?;
    let table = kunneth_table(&factors, &ray, n_max)?;
    if let Some(p) = out {
        let sidecar = table.sidecar().expect("computed tables carry provenance");
        write_atomic(&sidecar_path(p), &to_json_text(&serde_json::to_value(sidecar).expect("serializable")))?;
    }
    emit(out, &table.to_csv())
}

fn load_table(path: &Path) -> Result<CoefficientTable, CliError> {
    let text = read(path)?;
    if text.trim().is_empty() {
        return Err(CliError::Usage(format!("{}: empty table", path.display())));
    }
    let side = sidecar_path(path);
    let sidecar: Option<TableSidecar> = if side.is_file() && side != path {
        Some(serde_json::from_str(&read(&side)?).map_err(|e| CliError::Usage(format!("{}: {e}", side.display())))?)
    } else {
        None
    };
    Ok(CoefficientTable::from_csv(&text, sidecar.as_ref())?)
}

fn certify(table: &Path, opts: CertifyOptions, out: Option<&Path>) -> Result<(), CliError> {
    let t = load_table(table)?;
    let cert = certify_complexity(&t, &opts)?;
    if cert.verdict == Verdict::NoFitFound {
        let slice = cert.failing_slice.map_or("?".into(), |i| i.to_string());
        return Err(CliError::NoFit(format!("NO_FIT_FOUND: no rational fit for slice q^{slice} within the given bounds")));
    }
    emit(out, &to_json_text(&cert.to_json()))
}

fn load_json(path: &Path) -> Result<serde_json::Value, CliError> {
    let text = read(path)?;
    if text.trim().is_empty() {
        return Err(CliError::Usage(format!("{}: empty input", path.display())));
    }
    serde_json::from_str(&text).map_err(|e| CliError::Usage(format!("{}: {e}", path.display())))
}

fn run(cli: Cli) -> Result<(), CliError> {
    match cli.command {
        Command::Zariski { surface, class, out } => zariski(&surface, &class, out.as_deref()),
        Command::Body { surface, class, curve, point, out_dir } => body(&surface, &class, &curve, point.as_deref(), out_dir.as_deref()),
        Command::Slice { dim, grid, epsilon, family, out_dir } => slice(dim, grid, epsilon.as_deref(), family, out_dir.as_deref()),
        Command::Complexity { factors, ray, n_max, out } => complexity(&factors, &ray, n_max, out.as_deref()),
        Command::Certify { table, deg_num, deg_den, holdout, modulus, max_transient, out } => {
            certify(&table, CertifyOptions { deg_num, deg_den, holdout, modulus, max_transient }, out.as_deref())
        }
        Command::Report { slice, certificate, out } => {
            let r = report::build(&load_json(&slice)?, &load_json(&certificate)?)?;
            eprintln!("boundary: {}, complexity: {}", r.boundary_kind, r.certificate_verdict);
            if r.same_divisor == Some(false) {
                eprintln!("warning: slice and table describe different divisors");
            }
            emit(out.as_deref(), &r.html)
        }
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.code())
        }
    }
}
