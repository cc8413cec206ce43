//! File formats shared with the command-line tool: bodies and functions as
//! JSON, envelope grids as CSV, simple SVG figures.
//!
//! Body files:
//! `{"type":"hpolytope","halfspaces":[[a_1,...,a_n,b], ...]}` or
//! `{"type":"vpolygon","vertices":[[x,y], ...]}`.
//!
//! Function files:
//! `{"pieces":[{"Q":[[...]],"a":[...],"b":0.0}, ...]}`.
//!
//! Regions: `"[a,b]^n"` or an explicit box list `"[[a1,b1],[a2,b2]]"`.

use crate::convex::{ConvexBody, HPolytope, VPolygon};
use crate::error::{Error, Result};
use crate::funcreg::PCQFunction;
use crate::geometry::{BoxRegion, Matrix, Vector};
use crate::glue::EnvelopeFunction;
use crate::morphology::ContactDecomposition2D;
use serde::{Deserialize, Serialize};

/// On-disk body representation.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "lowercase")]
pub enum BodyFile {
    Hpolytope { halfspaces: Vec<Vec<f64>> },
    Vpolygon { vertices: Vec<[f64; 2]> },
}

/// A parsed body: either representation, convertible to halfspace form.
#[derive(Debug, Clone)]
pub enum Body {
    Polytope(HPolytope),
    Polygon(VPolygon),
}

impl Body {
    pub fn dim(&self) -> usize {
        match self {
            Body::Polytope(p) => p.dim(),
            Body::Polygon(_) => 2,
        }
    }

    /// Halfspace form (polygons convert exactly through their edges).
    pub fn to_polytope(&self) -> Result<HPolytope> {
        match self {
            Body::Polytope(p) => Ok(p.clone()),
            Body::Polygon(p) => p.to_hpolytope(),
        }
    }

    /// The exact polygon when the body is two-dimensional.
    pub fn polygon(&self) -> Result<VPolygon> {
        match self {
            Body::Polygon(p) => Ok(p.clone()),
            Body::Polytope(p) => {
                if p.dim() != 2 {
                    return Err(Error::InvalidInput(
                        "exact contact decomposition needs a 2D body".into(),
                    ));
                }
                let pts: Vec<[f64; 2]> = p.vertices().iter().map(|v| [v[0], v[1]]).collect();
                VPolygon::from_points(&pts)
            }
        }
    }
}

/// Parse a body JSON document, naming the offending field on failure.
pub fn parse_body_json(text: &str) -> Result<Body> {
    let file: BodyFile = serde_json::from_str(text)
        .map_err(|e| Error::InvalidInput(format!("body JSON: {e}")))?;
    match file {
        BodyFile::Hpolytope { halfspaces } => {
            if halfspaces.is_empty() {
                return Err(Error::InvalidInput("field 'halfspaces' is empty".into()));
            }
            let width = halfspaces[0].len();
            if width < 2 {
                return Err(Error::InvalidInput(
                    "field 'halfspaces[0]': need at least [a_1, b]".into(),
                ));
            }
            let mut rows = Vec::with_capacity(halfspaces.len());
            for (i, row) in halfspaces.iter().enumerate() {
                if row.len() != width {
                    return Err(Error::InvalidInput(format!(
                        "field 'halfspaces[{i}]': expected {width} numbers, got {}",
                        row.len()
                    )));
                }
                let (a, b) = row.split_at(width - 1);
                rows.push((Vector::from_slice(a), b[0]));
            }
            Ok(Body::Polytope(HPolytope::new(rows)?))
        }
        BodyFile::Vpolygon { vertices } => {
            if vertices.len() < 3 {
                return Err(Error::InvalidInput(
                    "field 'vertices': need at least 3 points".into(),
                ));
            }
            Ok(Body::Polygon(VPolygon::new(vertices)?))
        }
    }
}

pub fn body_to_json(body: &Body) -> String {
    let file = match body {
        Body::Polytope(p) => BodyFile::Hpolytope {
            halfspaces: p
                .halfspaces()
                .iter()
                .map(|h| {
                    let mut row = h.normal.as_slice().to_vec();
                    row.push(h.offset);
                    row
                })
                .collect(),
        },
        Body::Polygon(p) => BodyFile::Vpolygon {
            vertices: p.vertices().to_vec(),
        },
    };
    serde_json::to_string_pretty(&file).expect("serializable")
}

#[derive(Debug, Clone, Serialize, Deserialize)]
struct PieceFile {
    #[serde(rename = "Q")]
    q: Vec<Vec<f64>>,
    a: Vec<f64>,
    b: f64,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
struct FunctionFile {
    pieces: Vec<PieceFile>,
}

/// Parse a piecewise-quadratic function JSON document.
pub fn parse_function_json(text: &str) -> Result<PCQFunction> {
    let file: FunctionFile = serde_json::from_str(text)
        .map_err(|e| Error::InvalidInput(format!("function JSON: {e}")))?;
    if file.pieces.is_empty() {
        return Err(Error::InvalidInput("field 'pieces' is empty".into()));
    }
    let mut pieces = Vec::with_capacity(file.pieces.len());
    for (i, p) in file.pieces.iter().enumerate() {
        let q = Matrix::from_rows(&p.q)
            .map_err(|e| Error::InvalidInput(format!("field 'pieces[{i}].Q': {e}")))?;
        if q.n != p.a.len() {
            return Err(Error::InvalidInput(format!(
                "field 'pieces[{i}].a': length {} does not match Q ({}x{})",
                p.a.len(),
                q.n,
                q.n
            )));
        }
        pieces.push((q, Vector::from_slice(&p.a), p.b));
    }
    PCQFunction::new(pieces)
}

pub fn function_to_json(f: &PCQFunction) -> String {
    let file = FunctionFile {
        pieces: f
            .pieces()
            .iter()
            .map(|p| PieceFile {
                q: (0..p.q.n)
                    .map(|r| (0..p.q.n).map(|c| p.q.get(r, c)).collect())
                    .collect(),
                a: p.a.as_slice().to_vec(),
                b: p.b,
            })
            .collect(),
    };
    serde_json::to_string_pretty(&file).expect("serializable")
}

/// Parse `"[a,b]^n"` or `"[[a1,b1],[a2,b2],...]"`.
pub fn parse_region(text: &str) -> Result<BoxRegion> {
    let t = text.trim();
    if let Some((bracket, power)) = t.rsplit_once('^') {
        let n: usize = power
            .trim()
            .parse()
            .map_err(|_| Error::InvalidInput(format!("region power '{power}' not an integer")))?;
        let inner = bracket
            .trim()
            .strip_prefix('[')
            .and_then(|s| s.strip_suffix(']'))
            .ok_or_else(|| Error::InvalidInput(format!("region '{t}': expected [a,b]^n syntax")))?;
        let parts: Vec<&str> = inner.split(',').collect();
        if parts.len() != 2 {
            return Err(Error::InvalidInput(format!(
                "region '{t}': expected two bounds in [a,b]"
            )));
        }
        let a: f64 = parts[0]
            .trim()
            .parse()
            .map_err(|_| Error::InvalidInput(format!("region bound '{}'", parts[0])))?;
        let b: f64 = parts[1]
            .trim()
            .parse()
            .map_err(|_| Error::InvalidInput(format!("region bound '{}'", parts[1])))?;
        return BoxRegion::cube(a, b, n);
    }
    // Explicit box list.
    let pairs: Vec<[f64; 2]> = serde_json::from_str(t)
        .map_err(|e| Error::InvalidInput(format!("region '{t}': {e}")))?;
    let lo = pairs.iter().map(|p| p[0]).collect();
    let hi = pairs.iter().map(|p| p[1]).collect();
    BoxRegion::new(lo, hi)
}

/// Parse a grid CSV (optional header): coordinate columns then phi.
pub fn parse_grid_csv(text: &str) -> Result<(Vec<Vector>, Vec<f64>)> {
    let mut nodes = Vec::new();
    let mut phi = Vec::new();
    let mut width = None;
    for (lineno, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() {
            continue;
        }
        let fields: Vec<&str> = line.split(',').map(str::trim).collect();
        let parsed: std::result::Result<Vec<f64>, _> =
            fields.iter().map(|f| f.parse::<f64>()).collect();
        let Ok(values) = parsed else {
            if lineno == 0 {
                continue; // header
            }
            return Err(Error::InvalidInput(format!(
                "grid CSV line {}: non-numeric field",
                lineno + 1
            )));
        };
        if values.len() < 2 {
            return Err(Error::InvalidInput(format!(
                "grid CSV line {}: need coordinates and a value",
                lineno + 1
            )));
        }
        match width {
            None => width = Some(values.len()),
            Some(w) if w != values.len() => {
                return Err(Error::InvalidInput(format!(
                    "grid CSV line {}: expected {w} fields, got {}",
                    lineno + 1,
                    values.len()
                )))
            }
            _ => {}
        }
        let (coords, v) = values.split_at(values.len() - 1);
        nodes.push(Vector::from_slice(coords));
        phi.push(v[0]);
    }
    if nodes.is_empty() {
        return Err(Error::InvalidInput("grid CSV has no data rows".into()));
    }
    Ok((nodes, phi))
}

/// Render the envelope as CSV: node coordinates, phi, F.
pub fn render_hull_csv(env: &EnvelopeFunction) -> String {
    let dim = env.nodes().first().map(|n| n.dim()).unwrap_or(0);
    let mut out = String::new();
    let coords: Vec<String> = (0..dim).map(|d| format!("x{}", d + 1)).collect();
    out.push_str(&coords.join(","));
    out.push_str(",phi,F\n");
    for (i, node) in env.nodes().iter().enumerate() {
        let row: Vec<String> = node
            .as_slice()
            .iter()
            .map(|c| format!("{c}"))
            .chain([format!("{}", env.phi()[i]), format!("{}", env.values()[i])])
            .collect();
        out.push_str(&row.join(","));
        out.push('\n');
    }
    out
}

// ---------------------------------------------------------------------------
// SVG figures
// ---------------------------------------------------------------------------

struct SvgFrame {
    min: [f64; 2],
    max: [f64; 2],
    size: f64,
}

impl SvgFrame {
    fn new(points: impl Iterator<Item = [f64; 2]>, size: f64) -> Self {
        let mut min = [f64::INFINITY; 2];
        let mut max = [f64::NEG_INFINITY; 2];
        for p in points {
            for d in 0..2 {
                min[d] = min[d].min(p[d]);
                max[d] = max[d].max(p[d]);
            }
        }
        let pad = 0.07 * ((max[0] - min[0]).max(max[1] - min[1])).max(1e-9);
        SvgFrame {
            min: [min[0] - pad, min[1] - pad],
            max: [max[0] + pad, max[1] + pad],
            size,
        }
    }

    fn scale(&self) -> f64 {
        let sx = self.size / (self.max[0] - self.min[0]);
        let sy = self.size / (self.max[1] - self.min[1]);
        sx.min(sy)
    }

    fn map(&self, p: [f64; 2]) -> (f64, f64) {
        let s = self.scale();
        (
            (p[0] - self.min[0]) * s,
            self.size - (p[1] - self.min[1]) * s,
        )
    }
}

fn svg_polyline(frame: &SvgFrame, pts: &[[f64; 2]], style: &str, close: bool) -> String {
    let mut d = String::new();
    for (i, p) in pts.iter().enumerate() {
        let (x, y) = frame.map(*p);
        d.push_str(if i == 0 { "M" } else { "L" });
        d.push_str(&format!("{x:.3} {y:.3} "));
    }
    if close {
        d.push('Z');
    }
    format!("<path d=\"{d}\" {style}/>\n")
}

/// Figure for a 2D opening: the body outline, contact segments and the
/// bridging arcs of the opening boundary.
pub fn svg_body_opening(polygon: &VPolygon, decomp: &ContactDecomposition2D) -> String {
    let frame = SvgFrame::new(polygon.vertices().iter().copied(), 640.0);
    let mut out = String::from(
        "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"640\" height=\"640\" viewBox=\"0 0 640 640\">\n",
    );
    out.push_str(&svg_polyline(
        &frame,
        polygon.vertices(),
        "fill=\"none\" stroke=\"#888\" stroke-width=\"1.5\"",
        true,
    ));
    for seg in &decomp.segments {
        out.push_str(&svg_polyline(
            &frame,
            &[seg.start, seg.end],
            "fill=\"none\" stroke=\"#0a7\" stroke-width=\"3\"",
            false,
        ));
    }
    for arc in &decomp.arcs {
        let r = arc.radius * frame.scale();
        let a0 = [
            arc.center[0] + arc.radius * arc.angle_start.cos(),
            arc.center[1] + arc.radius * arc.angle_start.sin(),
        ];
        let a1 = [
            arc.center[0] + arc.radius * arc.angle_end.cos(),
            arc.center[1] + arc.radius * arc.angle_end.sin(),
        ];
        let (x0, y0) = frame.map(a0);
        let (x1, y1) = frame.map(a1);
        let large = i32::from(arc.angle_end - arc.angle_start > std::f64::consts::PI);
        // Screen y is flipped, so a counterclockwise sweep renders with
        // sweep flag 0.
        out.push_str(&format!(
            "<path d=\"M{x0:.3} {y0:.3} A{r:.3} {r:.3} 0 {large} 0 {x1:.3} {y1:.3}\" \
             fill=\"none\" stroke=\"#d55\" stroke-width=\"2\"/>\n"
        ));
    }
    out.push_str("</svg>\n");
    out
}

/// Figure for 1D function families: named curves sampled as polylines,
/// plus optional point groups (e.g. the touch set) drawn as dots.
pub fn svg_curves_1d(curves: &[(&str, &[[f64; 2]])], points: &[(&str, &[[f64; 2]])]) -> String {
    let frame = SvgFrame::new(
        curves
            .iter()
            .chain(points.iter())
            .flat_map(|(_, pts)| pts.iter().copied()),
        640.0,
    );
    let palette = ["#333", "#0a7", "#d55", "#07c", "#a0a"];
    let mut out = String::from(
        "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"640\" height=\"640\" viewBox=\"0 0 640 640\">\n",
    );
    for (i, (name, pts)) in curves.iter().enumerate() {
        let color = palette[i % palette.len()];
        out.push_str(&svg_polyline(
            &frame,
            pts,
            &format!("fill=\"none\" stroke=\"{color}\" stroke-width=\"1.8\""),
            false,
        ));
        out.push_str(&format!(
            "<text x=\"12\" y=\"{}\" fill=\"{color}\" font-size=\"14\">{name}</text>\n",
            18 + 18 * i
        ));
    }
    for (j, (name, pts)) in points.iter().enumerate() {
        let color = palette[(curves.len() + j) % palette.len()];
        for p in pts.iter() {
            let (x, y) = frame.map(*p);
            out.push_str(&format!(
                "<circle cx=\"{x:.2}\" cy=\"{y:.2}\" r=\"2.2\" fill=\"{color}\"/>\n"
            ));
        }
        out.push_str(&format!(
            "<text x=\"12\" y=\"{}\" fill=\"{color}\" font-size=\"14\">{name}</text>\n",
            18 + 18 * (curves.len() + j)
        ));
    }
    out.push_str("</svg>\n");
    out
}

/// Scatter plot of labelled 2D point groups (used for touch sets).
pub fn svg_points_2d(groups: &[(&str, &[[f64; 2]])]) -> String {
    let frame = SvgFrame::new(
        groups.iter().flat_map(|(_, pts)| pts.iter().copied()),
        640.0,
    );
    let palette = ["#0a7", "#d55", "#07c"];
    let mut out = String::from(
        "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"640\" height=\"640\" viewBox=\"0 0 640 640\">\n",
    );
    for (i, (name, pts)) in groups.iter().enumerate() {
        let color = palette[i % palette.len()];
        for p in pts.iter() {
            let (x, y) = frame.map(*p);
            out.push_str(&format!(
                "<circle cx=\"{x:.2}\" cy=\"{y:.2}\" r=\"1.6\" fill=\"{color}\"/>\n"
            ));
        }
        out.push_str(&format!(
            "<text x=\"12\" y=\"{}\" fill=\"{color}\" font-size=\"14\">{name}</text>\n",
            18 + 18 * i
        ));
    }
    out.push_str("</svg>\n");
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn body_round_trip_and_validation() {
        let square = r#"{"type":"hpolytope","halfspaces":[[1,0,1],[-1,0,1],[0,1,1],[0,-1,1]]}"#;
        let body = parse_body_json(square).unwrap();
        assert_eq!(body.dim(), 2);
        let json = body_to_json(&body);
        let again = parse_body_json(&json).unwrap();
        assert_eq!(again.dim(), 2);

        let poly = r#"{"type":"vpolygon","vertices":[[0,0],[2,0],[0,2]]}"#;
        let body = parse_body_json(poly).unwrap();
        assert!(body.polygon().is_ok());

        // Ragged halfspace row named in the error.
        let bad = r#"{"type":"hpolytope","halfspaces":[[1,0,1],[0,1]]}"#;
        let err = parse_body_json(bad).unwrap_err();
        assert!(err.to_string().contains("halfspaces[1]"), "{err}");

        // Unknown type reported as a parse problem.
        assert!(parse_body_json(r#"{"type":"blob"}"#).is_err());
    }

    #[test]
    fn function_round_trip_and_validation() {
        let abs = r#"{"pieces":[{"Q":[[0]],"a":[1],"b":0},{"Q":[[0]],"a":[-1],"b":0}]}"#;
        let f = parse_function_json(abs).unwrap();
        assert_eq!(f.dim(), 1);
        assert_eq!(f.eval(&Vector(vec![-0.5])), 0.5);
        let json = function_to_json(&f);
        let f2 = parse_function_json(&json).unwrap();
        assert_eq!(f2.eval(&Vector(vec![-0.5])), 0.5);

        let bad = r#"{"pieces":[{"Q":[[0,0],[0,0]],"a":[1],"b":0}]}"#;
        let err = parse_function_json(bad).unwrap_err();
        assert!(err.to_string().contains("pieces[0]"), "{err}");
    }

    #[test]
    fn region_syntaxes() {
        let r = parse_region("[-1,1]^2").unwrap();
        assert_eq!(r.dim(), 2);
        assert_eq!(r.volume(), 4.0);
        let r = parse_region("[[0,1],[-2,2],[0,0.5]]").unwrap();
        assert_eq!(r.dim(), 3);
        assert!((r.volume() - 4.0 * 0.5).abs() < 1e-12);
        assert!(parse_region("[1,-1]^2").is_err());
        assert!(parse_region("nonsense").is_err());
    }

    #[test]
    fn grid_csv_round_trip() {
        let text = "x1,phi\n0,1\n1,0\n2,1\n";
        let (nodes, phi) = parse_grid_csv(text).unwrap();
        assert_eq!(nodes.len(), 3);
        assert_eq!(phi, vec![1.0, 0.0, 1.0]);
        let env = crate::glue::convex_envelope(&nodes, &phi).unwrap();
        let csv = render_hull_csv(&env);
        assert!(csv.starts_with("x1,phi,F\n"));
        assert_eq!(csv.lines().count(), 4);

        assert!(parse_grid_csv("x\n1\n").is_err());
        assert!(parse_grid_csv("").is_err());
    }

    #[test]
    fn svg_outputs_are_wellformed() {
        let p = VPolygon::new(vec![[-1.0, -1.0], [1.0, -1.0], [1.0, 1.0], [-1.0, 1.0]]).unwrap();
        let d = crate::morphology::contact_set_2d(&p, 0.25).unwrap();
        let svg = svg_body_opening(&p, &d);
        assert!(svg.starts_with("<svg") && svg.trim_end().ends_with("</svg>"));
        assert!(svg.matches("<path").count() >= 9); // outline + 4 segments + 4 arcs

        let pts: Vec<[f64; 2]> = (0..10)
            .map(|i| [i as f64 / 10.0, (i as f64 / 10.0 - 0.5).abs()])
            .collect();
        let touch: Vec<[f64; 2]> = vec![[0.0, 0.5], [0.9, 0.4]];
        let svg = svg_curves_1d(&[("f", &pts)], &[("touch", &touch)]);
        assert!(svg.contains("<text"));
        assert_eq!(svg.matches("<circle").count(), 2);
    }
}
