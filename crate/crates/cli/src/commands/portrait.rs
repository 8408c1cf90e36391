use std::fmt::Write as _;
use std::io::Write;

use hill_core::collision::{equilibria, reduced_system, EquilibriumKind, EquilibriumPoint};
use hill_core::integrator::{integrate, Direction, EventSpec, Options};
use hill_core::Rational;
use rayon::prelude::*;
use serde::Serialize;

use crate::error::CliError;

/// Seeding and integration settings of a phase portrait.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PortraitGrid {
    /// Grid points per axis.
    pub n: usize,
    /// Seeds on the invariant circle (ignored unless `c > 0`).
    pub circle_seeds: usize,
    /// Seeds on the invariant line `w = 0`.
    pub line_seeds: usize,
    /// τ-span in each direction.
    pub tau: f64,
    /// Half-width of the plotted box in units of `√|c|` (absolute if `c = 0`).
    pub half_width: f64,
    pub samples_per_curve: usize,
}

impl Default for PortraitGrid {
    fn default() -> Self {
        PortraitGrid {
            n: 8,
            circle_seeds: 12,
            line_seeds: 8,
            tau: 4.0,
            half_width: 3.0,
            samples_per_curve: 160,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum SeedSource {
    Grid,
    Circle,
    Line,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Curve {
    pub source: SeedSource,
    pub forward: bool,
    pub seed: [f64; 2],
    /// `(τ, v, w)` samples.
    pub points: Vec<[f64; 3]>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Portrait {
    pub alpha: Rational,
    pub beta: Rational,
    pub c: f64,
    /// Plotted range `[−range, range]` on both axes.
    pub range: f64,
    pub half_width: f64,
    pub equilibria: Vec<EquilibriumPoint>,
    pub curves: Vec<Curve>,
}

impl Portrait {
    /// Radius `√(2c)` of the invariant circle, if it exists.
    pub fn circle_radius(&self) -> Option<f64> {
        (self.c > 0.0).then(|| (2.0 * self.c).sqrt())
    }
}

fn seeds(c: f64, range: f64, grid: &PortraitGrid) -> Vec<(SeedSource, [f64; 2])> {
    let mut out = Vec::new();
    let n = grid.n;
    for i in 0..n {
        for j in 0..n {
            // Cell centres, so the origin is never a seed for even n.
            let v = -range + (2.0 * i as f64 + 1.0) * range / n as f64;
            let w = -range + (2.0 * j as f64 + 1.0) * range / n as f64;
            out.push((SeedSource::Grid, [v, w]));
        }
    }
    if c > 0.0 {
        let rho = (2.0 * c).sqrt();
        let m = grid.circle_seeds;
        for k in 0..m {
            let phi = (k as f64 + 0.5) * std::f64::consts::TAU / m as f64;
            out.push((SeedSource::Circle, [rho * phi.cos(), rho * phi.sin()]));
        }
    }
    let m = grid.line_seeds;
    for k in 0..m {
        let v = -range + (2.0 * k as f64 + 1.0) * range / m as f64;
        out.push((SeedSource::Line, [v, 0.0]));
    }
    out
}

pub fn cmd_portrait(
    alpha: Rational,
    beta: Rational,
    c: f64,
    grid: &PortraitGrid,
) -> Result<Portrait, CliError> {
    if grid.n == 0 && grid.line_seeds == 0 && (c <= 0.0 || grid.circle_seeds == 0) {
        return Err(CliError::Usage("portrait grid has no seeds".into()));
    }
    if !(grid.tau > 0.0 && grid.half_width > 0.0 && grid.samples_per_curve >= 2) {
        return Err(CliError::Usage(
            "portrait tau, half width and sample count must be positive".into(),
        ));
    }
    if !c.is_finite() {
        return Err(CliError::Usage(format!("c must be finite, got {c}")));
    }
    let range = grid.half_width * if c == 0.0 { 1.0 } else { c.abs().sqrt() };
    let field = reduced_system(alpha, beta, c);
    let limit = 1.05 * range;
    let opts = Options::with_tolerances(1e-10, 1e-10);

    let jobs: Vec<(SeedSource, [f64; 2], bool)> = seeds(c, range, grid)
        .into_iter()
        .flat_map(|(src, s)| [(src, s, true), (src, s, false)])
        .collect();
    let curves = jobs
        .par_iter()
        .map(|&(source, seed, forward)| -> Result<Curve, CliError> {
            let leave = EventSpec::new(move |_, y: &[f64]| y[1].abs().max(y[2].abs()) - limit)
                .direction(Direction::Rising)
                .terminal();
            let end = if forward { grid.tau } else { -grid.tau };
            let sol = integrate(
                &field,
                &[0.0, seed[0], seed[1]],
                (0.0, end),
                &opts,
                &[leave],
            )
            .map_err(|f| CliError::Integration(f.error))?;
            let traj = &sol.trajectory;
            let t_end = traj.end().expect("initial sample present");
            let m = grid.samples_per_curve;
            let mut points = Vec::with_capacity(m);
            for k in 0..m {
                let t = if k + 1 == m {
                    t_end
                } else {
                    t_end * k as f64 / (m - 1) as f64
                };
                let y = traj.dense_eval(t).map_err(CliError::Integration)?;
                points.push([t, y[1], y[2]]);
            }
            Ok(Curve {
                source,
                forward,
                seed,
                points,
            })
        })
        .collect::<Result<Vec<_>, _>>()?;

    Ok(Portrait {
        alpha,
        beta,
        c,
        range,
        half_width: grid.half_width,
        equilibria: equilibria(alpha, beta, c),
        curves,
    })
}

pub fn write_portrait_csv<W: Write>(p: &Portrait, out: W) -> Result<(), CliError> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(["curve", "source", "direction", "tau", "v", "w"])?;
    for (i, curve) in p.curves.iter().enumerate() {
        let source = match curve.source {
            SeedSource::Grid => "grid",
            SeedSource::Circle => "circle",
            SeedSource::Line => "line",
        };
        let dir = if curve.forward { "forward" } else { "backward" };
        for pt in &curve.points {
            w.write_record([
                i.to_string(),
                source.into(),
                dir.into(),
                format!("{:?}", pt[0]),
                format!("{:?}", pt[1]),
                format!("{:?}", pt[2]),
            ])?;
        }
    }
    w.flush()?;
    Ok(())
}

const SIZE: f64 = 640.0;
const MARGIN: f64 = 48.0;

fn escape(s: &str) -> String {
    s.replace('&', "&amp;")
        .replace('<', "&lt;")
        .replace('>', "&gt;")
        .replace('"', "&quot;")
}

fn kind_colour(kind: EquilibriumKind) -> &'static str {
    match kind {
        EquilibriumKind::Saddle => "#d62728",
        EquilibriumKind::Source => "#ff7f0e",
        EquilibriumKind::Sink => "#1f77b4",
        EquilibriumKind::Center => "#2ca02c",
        EquilibriumKind::Degenerate => "#9467bd",
    }
}

/// Self-contained SVG of the portrait. Output depends only on `p`.
pub fn render_svg(p: &Portrait) -> String {
    let span = SIZE - 2.0 * MARGIN;
    let r = p.range;
    let sx = |v: f64| MARGIN + (v + r) / (2.0 * r) * span;
    let sy = |w: f64| MARGIN + (r - w) / (2.0 * r) * span;
    let mut s = String::new();

    let _ = writeln!(s, r#"<?xml version="1.0" encoding="UTF-8"?>"#);
    let _ = writeln!(
        s,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{SIZE}" height="{SIZE}" viewBox="0 0 {SIZE} {SIZE}">"#
    );
    let _ = writeln!(
        s,
        r#"<metadata>{{"alpha":"{}","beta":"{}","c":{:?},"v_range":[{:?},{:?}],"w_range":[{:?},{:?}],"half_width":{:?},"scaled_by_sqrt_abs_c":{},"curves":{}}}</metadata>"#,
        p.alpha,
        p.beta,
        p.c,
        -r,
        r,
        -r,
        r,
        p.half_width,
        p.c != 0.0,
        p.curves.len()
    );
    let _ = writeln!(
        s,
        "<title>Reduced flow on the collision manifold, alpha = {}, beta = {}, c = {:?}</title>",
        p.alpha, p.beta, p.c
    );
    let _ = writeln!(
        s,
        "<defs><marker id=\"arrow\" viewBox=\"0 0 10 10\" refX=\"5\" refY=\"5\" markerWidth=\"5\" markerHeight=\"5\" orient=\"auto\"><path d=\"M0,0 L10,5 L0,10 z\" fill=\"#555\"/></marker></defs>"
    );
    let _ = writeln!(
        s,
        r##"<rect class="background" x="0" y="0" width="{SIZE}" height="{SIZE}" fill="#ffffff"/>"##
    );
    let _ = writeln!(
        s,
        r##"<rect class="frame" x="{MARGIN}" y="{MARGIN}" width="{span}" height="{span}" fill="none" stroke="#000000"/>"##
    );

    // Axes and labels.
    let _ = writeln!(
        s,
        r##"<line class="axis" x1="{:.3}" y1="{:.3}" x2="{:.3}" y2="{:.3}" stroke="#bbbbbb"/>"##,
        sx(0.0),
        sy(-r),
        sx(0.0),
        sy(r)
    );
    let _ = writeln!(
        s,
        r##"<text x="{:.3}" y="{:.3}" font-family="sans-serif" font-size="14" text-anchor="middle">v</text>"##,
        SIZE / 2.0,
        SIZE - 14.0
    );
    let _ = writeln!(
        s,
        r##"<text x="16" y="{:.3}" font-family="sans-serif" font-size="14" text-anchor="middle">w</text>"##,
        SIZE / 2.0
    );
    for (x, anchor) in [(-r, "start"), (r, "end")] {
        let _ = writeln!(
            s,
            r##"<text class="tick" x="{:.3}" y="{:.3}" font-family="sans-serif" font-size="11" text-anchor="{anchor}">{}</text>"##,
            sx(x),
            SIZE - MARGIN + 14.0,
            format_tick(x)
        );
    }

    let _ = writeln!(
        s,
        r##"<g class="flow" fill="none" stroke="#555555" stroke-width="0.8">"##
    );
    for curve in &p.curves {
        if curve.points.len() < 2 {
            continue;
        }
        let mut pts = String::new();
        for pt in &curve.points {
            let _ = write!(pts, "{:.3},{:.3} ", sx(pt[1]), sy(pt[2]));
        }
        let marker = if curve.forward {
            r#" marker-end="url(#arrow)""#
        } else {
            ""
        };
        let _ = writeln!(
            s,
            r#"<polyline class="orbit" data-source="{}" data-direction="{}"{marker} points="{}"/>"#,
            match curve.source {
                SeedSource::Grid => "grid",
                SeedSource::Circle => "circle",
                SeedSource::Line => "line",
            },
            if curve.forward { "forward" } else { "backward" },
            pts.trim_end()
        );
    }
    let _ = writeln!(s, "</g>");

    let _ = writeln!(
        s,
        r##"<line class="invariant-line" data-w="0" x1="{:.3}" y1="{:.3}" x2="{:.3}" y2="{:.3}" stroke="#2ca02c" stroke-width="1.5"/>"##,
        sx(-r),
        sy(0.0),
        sx(r),
        sy(0.0)
    );
    if let Some(rho) = p.circle_radius() {
        let _ = writeln!(
            s,
            r##"<circle class="invariant-circle" data-radius="{:?}" cx="{:.3}" cy="{:.3}" r="{:.3}" fill="none" stroke="#2ca02c" stroke-width="1.5"/>"##,
            rho,
            sx(0.0),
            sy(0.0),
            rho / (2.0 * r) * span
        );
    }

    let _ = writeln!(s, r#"<g class="equilibria">"#);
    for e in &p.equilibria {
        let name = escape(e.name.as_str());
        let _ = writeln!(
            s,
            r##"<circle class="equilibrium" data-name="{name}" data-kind="{}" data-v="{:?}" data-w="{:?}" cx="{:.3}" cy="{:.3}" r="5" fill="{}" stroke="#000000"/>"##,
            e.kind.as_str(),
            e.v,
            e.w,
            sx(e.v),
            sy(e.w),
            kind_colour(e.kind)
        );
        let _ = writeln!(
            s,
            r#"<text class="equilibrium-label" x="{:.3}" y="{:.3}" font-family="sans-serif" font-size="12">{name}</text>"#,
            sx(e.v) + 7.0,
            sy(e.w) - 7.0
        );
    }
    let _ = writeln!(s, "</g>");
    let _ = writeln!(s, "</svg>");
    s
}

fn format_tick(x: f64) -> String {
    let t = format!("{x:.3}");
    let t = t.trim_end_matches('0').trim_end_matches('.');
    if t == "-0" {
        "0".into()
    } else {
        t.into()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use hill_core::rational::{int, rational};

    fn small() -> PortraitGrid {
        PortraitGrid {
            n: 3,
            circle_seeds: 4,
            line_seeds: 2,
            samples_per_curve: 20,
            ..Default::default()
        }
    }

    #[test]
    fn seeds_cover_grid_circle_and_line() {
        let p = cmd_portrait(int(3), rational(3, 2), 1.0, &small()).unwrap();
        assert_eq!(p.curves.len(), 2 * (9 + 4 + 2));
        let circle: Vec<&Curve> = p
            .curves
            .iter()
            .filter(|c| c.source == SeedSource::Circle)
            .collect();
        for c in circle {
            for pt in &c.points {
                assert!((pt[1] * pt[1] + pt[2] * pt[2] - 2.0).abs() < 1e-6);
            }
        }
        let line = p.curves.iter().filter(|c| c.source == SeedSource::Line);
        assert!(line.flat_map(|c| &c.points).all(|pt| pt[2] == 0.0));
    }

    #[test]
    fn curves_stay_in_the_plotted_box() {
        let p = cmd_portrait(int(3), rational(3, 2), 0.1, &small()).unwrap();
        let lim = 1.05 * p.range + 1e-6;
        for c in &p.curves {
            assert!(c
                .points
                .iter()
                .all(|pt| pt[1].abs() <= lim && pt[2].abs() <= lim));
        }
    }

    #[test]
    fn prolate_flow_has_increasing_v() {
        let p = cmd_portrait(int(3), rational(3, 2), -1.0, &small()).unwrap();
        assert!(p.equilibria.is_empty());
        for c in &p.curves {
            let sign = if c.forward { 1.0 } else { -1.0 };
            for w in c.points.windows(2) {
                assert!(sign * (w[1][1] - w[0][1]) >= 0.0);
            }
        }
    }

    #[test]
    fn svg_is_deterministic_and_self_contained() {
        let g = small();
        let a = render_svg(&cmd_portrait(int(3), rational(3, 2), 1.0, &g).unwrap());
        let b = render_svg(&cmd_portrait(int(3), rational(3, 2), 1.0, &g).unwrap());
        assert_eq!(a, b);
        assert!(!a.contains("href"));
        assert_eq!(a.matches(r#"class="equilibrium""#).count(), 4);
        assert_eq!(a.matches(r#"class="invariant-circle""#).count(), 1);
        let zero = render_svg(&cmd_portrait(int(3), rational(3, 2), 0.0, &g).unwrap());
        assert_eq!(zero.matches(r#"class="equilibrium""#).count(), 1);
        assert!(!zero.contains("invariant-circle"));
    }

    #[test]
    fn empty_grid_is_rejected() {
        let g = PortraitGrid {
            n: 0,
            line_seeds: 0,
            ..Default::default()
        };
        assert!(cmd_portrait(int(3), rational(3, 2), -1.0, &g).is_err());
    }
}
