//! Static SVG rendering of a model's stored layout.
//!
//! Shape vocabulary: concepts are ellipses, predicates rounded rectangles,
//! variables dashed rectangles and constants solid rectangles. Each arc is
//! a straight line clipped to both node outlines, labelled at its midpoint
//! with "t" or the role's short letter. Frames are not drawn.

use std::fmt::Write as _;

use crate::frame::{ElementId, ElementKind, Model};
use crate::xml::{escape_text, Geometry};

pub const CANVAS_MARGIN: i64 = 20;
pub const PREDICATE_CORNER_RADIUS: u32 = 12;

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum SvgError {
    #[error("element {0} has no geometry")]
    MissingGeometry(ElementId),
}

#[derive(Clone, Copy, PartialEq)]
enum Outline {
    Box,
    Ellipse,
}

fn outline(kind: ElementKind) -> Outline {
    if kind == ElementKind::Concept {
        Outline::Ellipse
    } else {
        Outline::Box
    }
}

fn center(g: &Geometry) -> (f64, f64) {
    (
        g.left as f64 + f64::from(g.width) / 2.0,
        g.top as f64 + f64::from(g.height) / 2.0,
    )
}

/// Point where the ray from the node centre towards `toward` leaves the
/// node outline.
fn clip(g: &Geometry, shape: Outline, toward: (f64, f64)) -> (f64, f64) {
    let (cx, cy) = center(g);
    let (dx, dy) = (toward.0 - cx, toward.1 - cy);
    if dx == 0.0 && dy == 0.0 {
        return (cx, cy);
    }
    let (rx, ry) = (f64::from(g.width) / 2.0, f64::from(g.height) / 2.0);
    let t = match shape {
        Outline::Box => {
            let tx = if dx == 0.0 { f64::INFINITY } else { rx / dx.abs() };
            let ty = if dy == 0.0 { f64::INFINITY } else { ry / dy.abs() };
            tx.min(ty)
        }
        Outline::Ellipse => 1.0 / ((dx / rx).powi(2) + (dy / ry).powi(2)).sqrt(),
    };
    let t = t.min(1.0);
    (cx + dx * t, cy + dy * t)
}

/// Formats a coordinate with at most two decimals and no trailing zeros.
fn num(v: f64) -> String {
    let s = format!("{:.2}", v);
    let s = s.trim_end_matches('0').trim_end_matches('.');
    if s == "-0" {
        "0".to_owned()
    } else {
        s.to_owned()
    }
}

fn node_geometry(m: &Model, id: ElementId) -> Result<Geometry, SvgError> {
    m.geometry.get(&id).copied().ok_or(SvgError::MissingGeometry(id))
}

/// Renders the model as a standalone SVG 1.1 document. Nodes come first in
/// id order, then arcs in id order.
pub fn render_svg(m: &Model) -> Result<String, SvgError> {
    let mut nodes: Vec<(ElementId, ElementKind, &str)> = Vec::with_capacity(m.node_count());
    nodes.extend(m.concepts.iter().map(|c| (c.id, ElementKind::Concept, c.name.as_str())));
    nodes.extend(m.constants.iter().map(|c| (c.id, ElementKind::Constant, c.name.as_str())));
    nodes.extend(m.variables.iter().map(|v| (v.id, ElementKind::Variable, v.name.as_str())));
    nodes.extend(
        m.predicates
            .iter()
            .map(|p| (p.id, ElementKind::Predicate(p.kind), p.name.as_str())),
    );
    nodes.sort_by_key(|(id, _, _)| *id);

    let mut placed = Vec::with_capacity(nodes.len());
    for &(id, kind, name) in &nodes {
        placed.push((id, kind, name, node_geometry(m, id)?));
    }

    let mut arcs: Vec<_> = m.arcs.iter().collect();
    arcs.sort_by_key(|a| a.id);
    let endpoint = |id: ElementId| -> Result<(Geometry, Outline), SvgError> {
        let kind = m.kind_of(id).ok_or(SvgError::MissingGeometry(id))?;
        Ok((node_geometry(m, id)?, outline(kind)))
    };
    let mut lines = Vec::with_capacity(arcs.len());
    for a in arcs {
        let (sg, ss) = endpoint(a.source)?;
        let (tg, ts) = endpoint(a.target)?;
        let from = clip(&sg, ss, center(&tg));
        let to = clip(&tg, ts, center(&sg));
        lines.push((a, from, to));
    }

    let (min_x, min_y, max_x, max_y) = if placed.is_empty() {
        (0, 0, 0, 0)
    } else {
        placed.iter().fold(
            (i64::MAX, i64::MAX, i64::MIN, i64::MIN),
            |(x0, y0, x1, y1), (_, _, _, g)| {
                (x0.min(g.left), y0.min(g.top), x1.max(g.right()), y1.max(g.bottom()))
            },
        )
    };
    let (vx, vy) = (min_x - CANVAS_MARGIN, min_y - CANVAS_MARGIN);
    let (vw, vh) = (
        max_x - min_x + 2 * CANVAS_MARGIN,
        max_y - min_y + 2 * CANVAS_MARGIN,
    );

    let mut out = String::new();
    let _ = writeln!(
        out,
        r#"<svg xmlns="http://www.w3.org/2000/svg" version="1.1" viewBox="{vx} {vy} {vw} {vh}" width="{vw}" height="{vh}" font-family="sans-serif" font-size="14">"#
    );
    out.push_str(concat!(
        "  <defs>\n",
        r#"    <marker id="arrow" viewBox="0 0 10 10" refX="10" refY="5" markerWidth="8" markerHeight="8" orient="auto"><path d="M 0 0 L 10 5 L 0 10 z" fill="black"/></marker>"#,
        "\n  </defs>\n",
    ));

    for (id, kind, name, g) in &placed {
        let (cx, cy) = center(g);
        let _ = writeln!(out, r#"  <g id="e{id}" class="{}">"#, class_name(*kind));
        match kind {
            ElementKind::Concept => {
                let _ = writeln!(
                    out,
                    r#"    <ellipse cx="{}" cy="{}" rx="{}" ry="{}" fill="white" stroke="black"/>"#,
                    num(cx),
                    num(cy),
                    num(f64::from(g.width) / 2.0),
                    num(f64::from(g.height) / 2.0)
                );
            }
            ElementKind::Predicate(_) => {
                let _ = writeln!(
                    out,
                    r#"    <rect x="{}" y="{}" width="{}" height="{}" rx="{PREDICATE_CORNER_RADIUS}" fill="white" stroke="black" stroke-width="2"/>"#,
                    g.left, g.top, g.width, g.height
                );
            }
            ElementKind::Variable => {
                let _ = writeln!(
                    out,
                    r#"    <rect x="{}" y="{}" width="{}" height="{}" fill="white" stroke="black" stroke-dasharray="4 2"/>"#,
                    g.left, g.top, g.width, g.height
                );
            }
            _ => {
                let _ = writeln!(
                    out,
                    r##"    <rect x="{}" y="{}" width="{}" height="{}" fill="#eeeeee" stroke="black"/>"##,
                    g.left, g.top, g.width, g.height
                );
            }
        }
        let _ = writeln!(
            out,
            r#"    <text x="{}" y="{}" text-anchor="middle" dominant-baseline="central">{}</text>"#,
            num(cx),
            num(cy),
            escape_text(name)
        );
        out.push_str("  </g>\n");
    }

    for (a, from, to) in lines {
        let (mx, my) = ((from.0 + to.0) / 2.0, (from.1 + to.1) / 2.0);
        let _ = writeln!(out, r#"  <g id="e{}" class="arc">"#, a.id);
        let _ = writeln!(
            out,
            r#"    <line x1="{}" y1="{}" x2="{}" y2="{}" stroke="black" marker-end="url(#arrow)"/>"#,
            num(from.0),
            num(from.1),
            num(to.0),
            num(to.1)
        );
        let _ = writeln!(
            out,
            r#"    <text x="{}" y="{}" text-anchor="middle" dominant-baseline="central" font-style="italic" fill="blue">{}</text>"#,
            num(mx),
            num(my),
            a.kind.marker()
        );
        out.push_str("  </g>\n");
    }
    out.push_str("</svg>\n");
    Ok(out)
}

fn class_name(kind: ElementKind) -> &'static str {
    match kind {
        ElementKind::Concept => "concept",
        ElementKind::Constant => "constant",
        ElementKind::Variable => "variable",
        ElementKind::Predicate(_) => "predicate",
        ElementKind::Arc => "arc",
        ElementKind::Frame => "frame",
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::frame::{ArcKind, PredicateKind, Role};

    #[test]
    fn single_variable() {
        let mut m = Model::new();
        let v = m.add_variable("MyVar");
        m.geometry.insert(v, Geometry::new(100, 100, 100, 50));
        let svg = render_svg(&m).unwrap();
        assert!(svg.contains(r#"<rect x="100" y="100" width="100" height="50""#));
        assert!(svg.contains(r#"<text x="150" y="125" text-anchor="middle" dominant-baseline="central">MyVar</text>"#));
        assert!(svg.contains(r#"viewBox="80 80 140 90""#));
    }

    #[test]
    fn empty_canvas() {
        let svg = render_svg(&Model::new()).unwrap();
        assert!(svg.starts_with("<svg "));
        assert!(svg.contains(r#"viewBox="-20 -20 40 40""#));
        assert!(!svg.contains("<rect") && !svg.contains("<line"));
    }

    #[test]
    fn missing_geometry() {
        let mut m = Model::new();
        let v = m.add_variable("x");
        assert_eq!(render_svg(&m), Err(SvgError::MissingGeometry(v)));
    }

    #[test]
    fn arcs_are_clipped_to_outlines() {
        let mut m = Model::new();
        let c = m.add_concept("C");
        let v = m.add_variable("v");
        let p = m.add_predicate("p", PredicateKind::Event);
        m.add_arc(ArcKind::Type, v, c);
        m.add_arc(ArcKind::Role(Role::Agent), p, v);
        m.geometry.insert(c, Geometry::new(300, 0, 100, 50));
        m.geometry.insert(v, Geometry::new(0, 0, 100, 50));
        m.geometry.insert(p, Geometry::new(0, 200, 100, 50));
        let svg = render_svg(&m).unwrap();
        // v → c horizontally: right edge of v to left tip of the ellipse.
        assert!(svg.contains(r#"<line x1="100" y1="25" x2="300" y2="25""#), "{svg}");
        // p → v vertically: top edge of p to bottom edge of v.
        assert!(svg.contains(r#"<line x1="50" y1="200" x2="50" y2="50""#), "{svg}");
        assert_eq!(svg.matches("<line ").count(), 2);
        assert_eq!(svg.matches(">t</text>").count(), 1);
        assert_eq!(svg.matches(">a</text>").count(), 1);
    }

    #[test]
    fn ellipse_clip_is_on_the_ellipse() {
        let g = Geometry::new(0, 0, 100, 50);
        let (x, y) = clip(&g, Outline::Ellipse, (200.0, 200.0));
        let v = ((x - 50.0) / 50.0).powi(2) + ((y - 25.0) / 25.0).powi(2);
        assert!((v - 1.0).abs() < 1e-9);
    }

    #[test]
    fn number_formatting() {
        assert_eq!(num(1.0), "1");
        assert_eq!(num(1.5), "1.5");
        assert_eq!(num(-0.001), "0");
        assert_eq!(num(2.346), "2.35");
    }
}
