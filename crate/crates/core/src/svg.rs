//! SVG drawings of planar configurations: penny realizations, circle
//! packings, the `z = 0` section of standard-form packings, and chains.

use std::fmt::Write as _;
use std::path::Path;

use thiserror::Error;

use crate::chain::ChainResult;
use crate::geom::Point2;
use crate::lift::{LiftError, PennyRealization};
use crate::packing::{Packing, PackingError, ToleranceProfile};
use crate::scalar::Real;

/// Largest `|z|` of a non-hub center, and deviation of the hubs from the
/// unit spheres at `(0,0,±1)`, accepted as standard form.
pub const STANDARD_FORM_TOL: f64 = 1e-8;

#[derive(Debug, Error)]
pub enum PlotError {
    #[error("3-dimensional packing is not in standard form (unit hubs at (0,0,±1), other centers on z = 0); run standard-form first")]
    NotStandardForm,
    #[error(transparent)]
    Packing(#[from] PackingError),
    #[error(transparent)]
    Lift(#[from] LiftError),
    #[error("cannot write SVG: {0}")]
    Io(#[from] std::io::Error),
}

/// Something that can be drawn.
#[derive(Clone, Copy, Debug)]
pub enum Plot<'a, T> {
    Pennies(&'a PennyRealization<T>),
    Packing(&'a Packing<T>),
    Chain(&'a ChainResult<T>),
}

struct Disk {
    id: String,
    center: Point2<f64>,
    radius: f64,
}

#[derive(Default)]
struct Scene {
    disks: Vec<Disk>,
    contacts: Vec<(String, String)>,
    /// Dashed reference outline (the forbidden disk of a chain).
    outline: Option<f64>,
    caption: Option<String>,
}

/// Renders the object as an SVG document. Disks come sorted by label and
/// contacts by label pair; the view box is the bounding box plus 10% on
/// each side.
pub fn render_svg<T: Real>(obj: Plot<'_, T>, tol: &ToleranceProfile<T>) -> Result<String, PlotError> {
    let mut scene = match obj {
        Plot::Pennies(r) => pennies_scene(r, tol)?,
        Plot::Packing(pk) => packing_scene(pk, tol)?,
        Plot::Chain(c) => chain_scene(c, tol),
    };
    scene.disks.sort_by(|a, b| a.id.cmp(&b.id));
    for (a, b) in &mut scene.contacts {
        if a > b {
            std::mem::swap(a, b);
        }
    }
    scene.contacts.sort();
    Ok(write_scene(&scene))
}

/// [`render_svg`] written to `path`.
pub fn plot_svg<T: Real>(obj: Plot<'_, T>, tol: &ToleranceProfile<T>, path: &Path) -> Result<(), PlotError> {
    std::fs::write(path, render_svg(obj, tol)?)?;
    Ok(())
}

fn pennies_scene<T: Real>(r: &PennyRealization<T>, tol: &ToleranceProfile<T>) -> Result<Scene, PlotError> {
    let g = r.contact_graph(tol)?;
    Ok(Scene {
        disks: r
            .pennies()
            .map(|(id, p)| Disk { id: id.into(), center: Point2::new(p.x.as_f64(), p.y.as_f64()), radius: 1.0 })
            .collect(),
        contacts: g.edges().map(|(a, b)| (a.into(), b.into())).collect(),
        ..Default::default()
    })
}

fn packing_scene<T: Real>(pk: &Packing<T>, tol: &ToleranceProfile<T>) -> Result<Scene, PlotError> {
    let hubs: Vec<&str> = if pk.dimension() == 3 { standard_form_hubs(pk)? } else { vec![] };
    let g = pk.contact_graph(tol)?;
    let drawn = |id: &str| !hubs.contains(&id);
    Ok(Scene {
        disks: pk
            .spheres()
            .iter()
            .filter(|s| drawn(&s.id))
            .map(|s| Disk {
                id: s.id.clone(),
                center: Point2::new(s.center.x.as_f64(), s.center.y.as_f64()),
                radius: s.radius.as_f64(),
            })
            .collect(),
        contacts: g.edges().filter(|(a, b)| drawn(a) && drawn(b)).map(|(a, b)| (a.into(), b.into())).collect(),
        ..Default::default()
    })
}

/// The two hub labels of a standard-form packing.
fn standard_form_hubs<T: Real>(pk: &Packing<T>) -> Result<Vec<&str>, PlotError> {
    let near = |a: f64, b: f64| (a - b).abs() <= STANDARD_FORM_TOL;
    let mut hubs = Vec::new();
    for s in pk.spheres() {
        let (c, r) = (s.center, s.radius.as_f64());
        if near(c.x.as_f64(), 0.0) && near(c.y.as_f64(), 0.0) && near(c.z.as_f64().abs(), 1.0) && near(r, 1.0) {
            hubs.push(s);
        } else if !near(c.z.as_f64(), 0.0) {
            return Err(PlotError::NotStandardForm);
        }
    }
    match hubs[..] {
        [a, b] if a.center.z.as_f64() * b.center.z.as_f64() < 0.0 => Ok(vec![&a.id, &b.id]),
        _ => Err(PlotError::NotStandardForm),
    }
}

fn chain_scene<T: Real>(c: &ChainResult<T>, tol: &ToleranceProfile<T>) -> Scene {
    let k = c.len();
    let label = |i: usize| format!("c{}", i + 1);
    let mut contacts: Vec<(String, String)> = (1..k).map(|i| (label(i - 1), label(i))).collect();
    if k >= 3 && c.closure_defect.abs() <= tol.contact_tol * (c.radii[0] + c.radii[k - 1]) {
        contacts.push((label(0), label(k - 1)));
    }
    Scene {
        disks: c
            .positions
            .iter()
            .zip(&c.radii)
            .enumerate()
            .map(|(i, (p, r))| Disk {
                id: label(i),
                center: Point2::new(p.x.as_f64(), p.y.as_f64()),
                radius: r.as_f64(),
            })
            .collect(),
        contacts,
        outline: Some(1.0),
        caption: Some(format!("closure defect = {:e}", c.closure_defect.as_f64())),
    }
}

fn write_scene(scene: &Scene) -> String {
    let mut lo = Point2::new(f64::INFINITY, f64::INFINITY);
    let mut hi = Point2::new(f64::NEG_INFINITY, f64::NEG_INFINITY);
    let boxes = scene.disks.iter().map(|d| (d.center, d.radius)).chain(scene.outline.map(|r| (Point2::zero(), r)));
    for (c, r) in boxes {
        // SVG's y axis points down; flip so drawings keep the math orientation.
        lo = Point2::new(lo.x.min(c.x - r), lo.y.min(-c.y - r));
        hi = Point2::new(hi.x.max(c.x + r), hi.y.max(-c.y + r));
    }
    if !lo.x.is_finite() {
        lo = Point2::new(-1.0, -1.0);
        hi = Point2::new(1.0, 1.0);
    }
    let (w, h) = (hi.x - lo.x, hi.y - lo.y);
    let (mx, my) = (0.1 * w, 0.1 * h);
    let stroke = 0.004 * w.max(h);
    let center = |d: &Disk| (d.center.x, -d.center.y);

    let mut s = String::new();
    let _ = writeln!(
        s,
        r#"<svg xmlns="http://www.w3.org/2000/svg" viewBox="{} {} {} {}">"#,
        num(lo.x - mx),
        num(lo.y - my),
        num(w + 2.0 * mx),
        num(h + 2.0 * my)
    );
    if let Some(r) = scene.outline {
        let _ = writeln!(
            s,
            r#"  <circle class="forbidden" cx="0" cy="0" r="{}" fill="none" stroke="gray" stroke-width="{}" stroke-dasharray="{}"/>"#,
            num(r),
            num(stroke),
            num(4.0 * stroke)
        );
    }
    for d in &scene.disks {
        let (x, y) = center(d);
        let _ = writeln!(
            s,
            r#"  <circle data-id="{}" cx="{}" cy="{}" r="{}" fill="lightsteelblue" stroke="black" stroke-width="{}"/>"#,
            escape(&d.id),
            num(x),
            num(y),
            num(d.radius),
            num(stroke)
        );
    }
    for (a, b) in &scene.contacts {
        let find = |id: &str| scene.disks.iter().find(|d| d.id == id).map(center).expect("contact between drawn disks");
        let ((x1, y1), (x2, y2)) = (find(a), find(b));
        let _ = writeln!(
            s,
            r#"  <line data-from="{}" data-to="{}" x1="{}" y1="{}" x2="{}" y2="{}" stroke="firebrick" stroke-width="{}"/>"#,
            escape(a),
            escape(b),
            num(x1),
            num(y1),
            num(x2),
            num(y2),
            num(stroke)
        );
    }
    if let Some(text) = &scene.caption {
        let _ = writeln!(
            s,
            r#"  <text x="{}" y="{}" font-size="{}">{}</text>"#,
            num(lo.x - 0.5 * mx),
            num(lo.y - 0.3 * my),
            num(0.5 * my.max(stroke)),
            escape(text)
        );
    }
    s.push_str("</svg>\n");
    s
}

fn num(x: f64) -> String {
    let s = format!("{x:.6}");
    let s = s.trim_end_matches('0').trim_end_matches('.');
    if s == "-0" {
        "0".into()
    } else {
        s.into()
    }
}

fn escape(s: &str) -> String {
    let mut out = String::with_capacity(s.len());
    for ch in s.chars() {
        match ch {
            '&' => out.push_str("&amp;"),
            '<' => out.push_str("&lt;"),
            '>' => out.push_str("&gt;"),
            '"' => out.push_str("&quot;"),
            '\'' => out.push_str("&apos;"),
            c => out.push(c),
        }
    }
    out
}
