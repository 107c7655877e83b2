//! Single-file HTML bundle juxtaposing a slice-boundary verdict and a
//! holonomicity certificate.

use std::fmt::Write;

use nokholo_core::holonomic::{describe_denominator, HolonomicCertificate};
use nokholo_core::nok::{classify_boundary, SliceRegion};

use crate::files::load_surface;
use crate::{svg, CliError};

pub struct Report {
    pub html: String,
    pub boundary_kind: String,
    pub certificate_verdict: String,
    pub same_divisor: Option<bool>,
}

fn escape(s: &str) -> String {
    s.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;")
}

fn field<'a>(v: &'a serde_json::Value, key: &str) -> Result<&'a serde_json::Value, CliError> {
    v.get(key).ok_or_else(|| CliError::Usage(format!("report input lacks {key:?}")))
}

/// Re-loads both documents, re-checks them exactly and renders the bundle.
pub fn build(slice_doc: &serde_json::Value, cert_doc: &serde_json::Value) -> Result<Report, CliError> {
    let surface = load_surface(field(slice_doc, "surface_fixture")?.as_str().unwrap_or_default())?;
    let region = SliceRegion::from_json(field(slice_doc, "region")?, &surface)?;
    if !region.verify() {
        return Err(CliError::Usage("slice samples do not lie on the recorded boundary".into()));
    }
    let verdict = classify_boundary(&region)?;
    let recorded = field(field(slice_doc, "verdict")?, "kind")?;
    if serde_json::to_value(verdict.kind).expect("serializable") != *recorded {
        return Err(CliError::Usage("recorded boundary verdict does not match recomputation".into()));
    }
    let cert = HolonomicCertificate::from_json(cert_doc)?;
    if let (Some((u, v)), Some(x), Some(qop)) = (&cert.closed_form, &cert.x_operator, &cert.q_operator) {
        if !x.annihilates_rational(u, v) || !qop.annihilates_rational(u, v) {
            return Err(CliError::Usage("certificate operators do not annihilate the closed form".into()));
        }
    }
    let kind = serde_json::to_value(verdict.kind).expect("serializable").as_str().unwrap_or_default().to_string();
    let cverdict = serde_json::to_value(cert.verdict).expect("serializable").as_str().unwrap_or_default().to_string();

    let divisor = slice_doc.get("divisor").filter(|d| !d.is_null());
    let same_divisor = match (divisor, &cert.source) {
        (Some(d), Some(src)) => Some(d["factors"] == src.factors.as_str() && d["ray"] == serde_json::json!(src.ray)),
        _ => None,
    };
    let divisor_text = divisor
        .map(|d| format!("{} on {}", d["label"].as_str().unwrap_or("?"), d["factors"].as_str().unwrap_or("?")))
        .unwrap_or_else(|| format!("{} on {}", region_base(slice_doc), surface.id()));
    let source_text = cert
        .source
        .as_ref()
        .map(|s| format!("ray ({}) on {}", s.ray.iter().map(i64::to_string).collect::<Vec<_>>().join(","), s.factors))
        .unwrap_or_else(|| "table without provenance".into());

    let mut h = String::new();
    h.push_str("<!DOCTYPE html>\n<html><head><meta charset=\"utf-8\"><title>nokholo report</title>\n");
    h.push_str("<style>body{font-family:sans-serif;max-width:60em;margin:2em auto}code,pre{background:#f4f4f4}td,th{padding:0.2em 0.8em;text-align:left}</style>\n");
    h.push_str("</head><body>\n<h1>Polyhedrality versus holonomicity</h1>\n");
    let _ = writeln!(h, "<table><tr><th>divisor</th><td>{}</td></tr>", escape(&divisor_text));
    let _ = writeln!(h, "<tr><th>table source</th><td>{}</td></tr>", escape(&source_text));
    let same = match same_divisor {
        Some(true) => "yes",
        Some(false) => "no",
        None => "not recorded",
    };
    let _ = writeln!(h, "<tr><th>same divisor</th><td>{same}</td></tr>");
    let _ = writeln!(h, "<tr><th>slice boundary</th><td><b id=\"boundary-kind\">{kind}</b></td></tr>");
    let _ = writeln!(h, "<tr><th>complexity function</th><td><b id=\"certificate-verdict\">{cverdict}</b></td></tr></table>");

    h.push_str("<h2>Newton&ndash;Okounkov slice</h2>\n");
    let _ = writeln!(h, "<p>Boundary <code>Q(s, t) = {} = 0</code>, exact on {} samples ({} held out).</p>", escape(&region.boundary_polynomial.to_string()), verdict.exact_samples_on_boundary, region.held_out().count());
    if let Some(c) = &verdict.conic {
        let rows: Vec<String> = c
            .matrix
            .iter()
            .map(|r| r.iter().map(nokholo_core::rational::format_q).collect::<Vec<_>>().join(", "))
            .collect();
        let _ = writeln!(h, "<p>Conic matrix <code>[[{}]]</code>, determinant <code>{}</code>.</p>", rows.join("], ["), nokholo_core::rational::format_q(&c.determinant));
    }
    for l in &verdict.pieces {
        let _ = writeln!(h, "<p>Boundary line <code>{}</code></p>", escape(&l.to_string()));
    }
    h.push_str(&svg::boundary_svg(&region, "boundary of the nef region"));

    h.push_str("<h2>Complexity function</h2>\n");
    for (i, fit) in cert.fits.iter().enumerate() {
        let _ = writeln!(h, "<p>slice q^{i}: <code>({}) / {}</code></p>", escape(&fit.numerator.to_string()), escape(&describe_denominator(&fit.denominator)));
    }
    if let Some((u, v)) = &cert.closed_form {
        let _ = writeln!(h, "<p>Closed form <code>E(x, q) = ({}) / {}</code></p>", escape(&u.to_string()), escape(&describe_denominator(v)));
    }
    if let Some(x) = &cert.x_operator {
        let _ = writeln!(h, "<p>x-operator <code>{}</code></p>", escape(&x.to_string()));
    }
    if let Some(qop) = &cert.q_operator {
        let _ = writeln!(h, "<p>q-operator <code>{}</code></p>", escape(&qop.to_string()));
    }
    if let Some(i) = cert.failing_slice {
        let _ = writeln!(h, "<p>No fit found for slice q^{i}.</p>");
    }
    h.push_str("</body></html>\n");
    Ok(Report { html: h, boundary_kind: kind, certificate_verdict: cverdict, same_divisor })
}

fn region_base(doc: &serde_json::Value) -> String {
    doc["region"]["base"]["expression"].as_str().unwrap_or("?").to_string()
}
