//! SVG figures: the Poincaré disk for planar grids, the trace on the
//! reference plane for the dodecagrid.

use std::fmt::Write;

use hyca_core::lorentz;
use hyca_core::{CellId, GridKind, Region, State};
use serde::{Deserialize, Serialize};

use crate::formats::{Roles, Snapshot};

#[derive(Clone, Debug, PartialEq, Eq, thiserror::Error)]
pub enum RenderError {
    #[error("cell {cell} holds state {state}, which has no colour")]
    UnknownState { cell: u32, state: State },
    #[error("snapshot has {got} cells, the region has {expected}")]
    SnapshotSize { expected: usize, got: usize },
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(default)]
pub struct Palette {
    /// Guideline cells.
    pub line: String,
    pub extra: String,
    pub background: String,
    pub marker: String,
    /// Cells of a region rendered without states.
    pub blank: String,
    pub stroke: String,
}

impl Default for Palette {
    fn default() -> Palette {
        Palette {
            line: "#f2d40c".into(),
            extra: "#3b6fd6".into(),
            background: "#4caf50".into(),
            marker: "#d32f2f".into(),
            blank: "#ffffff".into(),
            stroke: "#333333".into(),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(default)]
pub struct RenderSpec {
    /// Width and height in pixels.
    pub size: u32,
    /// Only cells at most this far from the guideline segment are drawn.
    pub depth: Option<u32>,
    pub colors: Palette,
}

impl Default for RenderSpec {
    fn default() -> RenderSpec {
        RenderSpec { size: 800, depth: None, colors: Palette::default() }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub enum Shape {
    /// Vertices in the disk, joined by geodesic arcs.
    Polygon(Vec<[f64; 2]>),
    Dot { center: [f64; 2], radius: f64 },
}

#[derive(Clone, Debug, PartialEq)]
pub struct Item {
    pub cell: u32,
    pub role: &'static str,
    pub fill: String,
    pub shape: Shape,
}

/// Shapes in drawing order.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct Figure {
    pub items: Vec<Item>,
}

fn fill_of(region: &Region, c: CellId, snapshot: Option<&Snapshot>, palette: &Palette) -> Result<(&'static str, String), RenderError> {
    let on_line = region.is_guideline(c);
    let Some(snap) = snapshot else {
        return Ok(if on_line { ("line", palette.line.clone()) } else { ("blank", palette.blank.clone()) });
    };
    let state = snap.configuration.state(c);
    let Roles { background, marker, extra } = snap.roles;
    let role = if on_line {
        "line"
    } else if Some(state) == extra {
        "extra"
    } else if Some(state) == marker {
        "marker"
    } else if Some(state) == background {
        "background"
    } else {
        return Err(RenderError::UnknownState { cell: c.0, state });
    };
    let fill = match role {
        "line" => &palette.line,
        "extra" => &palette.extra,
        "marker" => &palette.marker,
        _ => &palette.background,
    };
    Ok((role, fill.clone()))
}

/// Lays out the cells of `region`, coloured by `snapshot` when given.
pub fn figure(region: &Region, snapshot: Option<&Snapshot>, spec: &RenderSpec) -> Result<Figure, RenderError> {
    if let Some(s) = snapshot {
        if s.configuration.states.len() != region.len() {
            return Err(RenderError::SnapshotSize { expected: region.len(), got: s.configuration.states.len() });
        }
    }
    let shown = |c: CellId| spec.depth.is_none_or(|d| region.distance(c) <= d);
    let mut items = Vec::new();
    if region.grid().is_planar() {
        for c in region.cells().filter(|&c| shown(c)) {
            let (role, fill) = fill_of(region, c, snapshot, &spec.colors)?;
            let points = region.polygon(c).iter().map(lorentz::to_disk).collect();
            items.push(Item { cell: c.0, role, fill, shape: Shape::Polygon(points) });
        }
        return Ok(Figure { items });
    }
    let plane = region.guide_normal();
    let flatten = flattening(region);
    let mut dots = Vec::new();
    for c in region.cells().filter(|&c| shown(c)) {
        let below = lorentz::dot(&region.center(c), &plane) < 0.0;
        for slot in 0..GridKind::Dodecagrid.arity() {
            let face = region.slot_vertices(c, slot);
            if !face.iter().all(|v| lorentz::dot(v, &plane).abs() < 1e-6 * v[3]) {
                continue;
            }
            let (role, fill) = fill_of(region, c, snapshot, &spec.colors)?;
            let pts: Vec<[f64; 2]> = face.iter().map(|v| lorentz::to_disk(&lorentz::apply(&flatten, v))).collect();
            if below {
                items.push(Item { cell: c.0, role, fill, shape: Shape::Polygon(pts) });
            } else {
                let centre = lorentz::to_disk(&lorentz::apply(&flatten, &region.side_center(c, slot)));
                let size = pts.iter().map(|p| ((p[0] - centre[0]).powi(2) + (p[1] - centre[1]).powi(2)).sqrt()).fold(f64::INFINITY, f64::min);
                dots.push(Item { cell: c.0, role, fill, shape: Shape::Dot { center: centre, radius: 0.3 * size } });
            }
        }
    }
    items.extend(dots);
    Ok(Figure { items })
}

/// The boost carrying the reference plane onto `z = 0`.
fn flattening(region: &Region) -> lorentz::Mat4 {
    let n = region.guide_normal();
    let s = (n[3] / n[2]).atanh();
    let m = lorentz::boost_z(s);
    if lorentz::apply(&m, &n)[3].abs() < 1e-9 {
        m
    } else {
        lorentz::boost_z(-s)
    }
}

fn num(x: f64) -> String {
    let s = format!("{x:.6}");
    if s == "-0.000000" {
        "0.000000".into()
    } else {
        s
    }
}

/// Screen coordinates, y up.
fn pt(p: [f64; 2]) -> String {
    format!("{} {}", num(p[0]), num(-p[1]))
}

/// Centre and radius of the circle orthogonal to the unit circle through
/// `p` and `q`; `None` when the geodesic is a diameter.
fn geodesic_circle(p: [f64; 2], q: [f64; 2]) -> Option<([f64; 2], f64)> {
    let det = 2.0 * (p[0] * q[1] - p[1] * q[0]);
    if det.abs() < 1e-9 {
        return None;
    }
    let a = p[0] * p[0] + p[1] * p[1] + 1.0;
    let b = q[0] * q[0] + q[1] * q[1] + 1.0;
    let c = [(a * q[1] - b * p[1]) / det, (b * p[0] - a * q[0]) / det];
    Some((c, (c[0] * c[0] + c[1] * c[1] - 1.0).sqrt()))
}

/// Path along the geodesic from `p` to `q`.
fn arc_to(p: [f64; 2], q: [f64; 2]) -> String {
    let Some((c, r)) = geodesic_circle(p, q) else {
        return format!(" L {}", pt(q));
    };
    let cross = (p[0] - c[0]) * (q[1] - c[1]) - (p[1] - c[1]) * (q[0] - c[0]);
    // Screen y points down, so a counter-clockwise turn is a positive sweep.
    let sweep = u8::from(cross > 0.0);
    format!(" A {} {} 0 0 {} {}", num(r), num(r), sweep, pt(q))
}

pub fn to_svg(fig: &Figure, spec: &RenderSpec) -> String {
    let mut out = String::new();
    let _ = writeln!(
        out,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{0}" height="{0}" viewBox="-1.02 -1.02 2.04 2.04">"#,
        spec.size
    );
    if !fig.items.is_empty() {
        let stroke = &spec.colors.stroke;
        let _ = writeln!(out, r#"<circle cx="0" cy="0" r="1" fill="none" stroke="{stroke}" stroke-width="0.004"/>"#);
        for item in &fig.items {
            let attrs = format!(r#"class="{}" data-cell="{}" fill="{}" stroke="{stroke}" stroke-width="0.002""#, item.role, item.cell, item.fill);
            match &item.shape {
                Shape::Polygon(points) => {
                    let mut d = format!("M {}", pt(points[0]));
                    for (i, &p) in points.iter().enumerate() {
                        d.push_str(&arc_to(p, points[(i + 1) % points.len()]));
                    }
                    let _ = writeln!(out, r#"<path {attrs} d="{d} Z"/>"#);
                }
                Shape::Dot { center, radius } => {
                    let _ = writeln!(out, r#"<circle {attrs} cx="{}" cy="{}" r="{}"/>"#, num(center[0]), num(-center[1]), num(*radius));
                }
            }
        }
    }
    out.push_str("</svg>\n");
    out
}

pub fn render(region: &Region, snapshot: Option<&Snapshot>, spec: &RenderSpec) -> Result<String, RenderError> {
    Ok(to_svg(&figure(region, snapshot, spec)?, spec))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn empty_figure_has_empty_body() {
        let svg = to_svg(&Figure::default(), &RenderSpec::default());
        assert_eq!(svg.lines().count(), 2);
        assert!(svg.ends_with("</svg>\n"));
    }

    #[test]
    fn arcs_through_the_origin_are_straight() {
        assert_eq!(arc_to([0.1, 0.0], [0.5, 0.0]), " L 0.500000 0.000000");
        assert!(arc_to([0.1, 0.2], [0.5, 0.0]).starts_with(" A "));
    }

    #[test]
    fn arc_circle_is_orthogonal_to_the_boundary() {
        let (p, q) = ([0.3, 0.1], [-0.2, 0.4]);
        let (c, r) = geodesic_circle(p, q).unwrap();
        let dist = |x: [f64; 2]| ((x[0] - c[0]).powi(2) + (x[1] - c[1]).powi(2)).sqrt();
        assert!((dist(p) - r).abs() < 1e-12 && (dist(q) - r).abs() < 1e-12);
        assert!((c[0] * c[0] + c[1] * c[1] - r * r - 1.0).abs() < 1e-12);
    }

    #[test]
    fn central_pentagon_sides_bow_inwards() {
        // Counter-clockwise from the lower left to the top vertex, seen with y up.
        let s = arc_to([-0.378497, 0.122981], [0.0, 0.397975]);
        assert_eq!(s.split_whitespace().nth(5), Some("1"));
    }

    #[test]
    fn negative_zero_is_printed_as_zero() {
        assert_eq!(num(-0.0000001), "0.000000");
    }

    #[test]
    fn rendering_is_deterministic() {
        let region = hyca_core::build_region(GridKind::Pentagrid, 2, 1).unwrap();
        let a = render(&region, None, &RenderSpec::default()).unwrap();
        let b = render(&region, None, &RenderSpec::default()).unwrap();
        assert_eq!(a, b);
        assert_eq!(a.matches("<path").count(), region.len());
    }

    #[test]
    fn dodecagrid_trace_has_faces_and_dots() {
        let region = hyca_core::build_region(GridKind::Dodecagrid, 2, 1).unwrap();
        let fig = figure(&region, None, &RenderSpec::default()).unwrap();
        let faces = fig.items.iter().filter(|i| matches!(i.shape, Shape::Polygon(_))).count();
        let dots = fig.items.len() - faces;
        assert!(faces >= 3);
        assert!(dots > 0 && dots <= faces);
    }
}
