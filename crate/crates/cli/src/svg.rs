//! SVG renderers. Geometry is written in plain data coordinates (a y-flip
//! group handles screen orientation) so tests can parse the figures and
//! assert on the numbers directly.

use std::fmt::Write;

use switched::planar::{PlanarPair, WorstCaseOrbit};
use switched::simcore::{CounterexampleReport, Trajectory};
use switched::smallmat::norm2;

fn num(v: f64) -> String {
    // nine decimals: far below every geometric tolerance, still compact
    format!("{v:.9}")
}

/// Closed extremal orbit with switch markers on the axes, over short
/// flow-line pieces of both vector fields on a `grid` x `grid` lattice.
pub fn figure1_svg(p: &PlanarPair, orbit: &WorstCaseOrbit, grid: usize) -> anyhow::Result<String> {
    anyhow::ensure!(grid >= 2, "flow grid needs at least 2 points per side");
    let states = orbit.trajectory.states();
    anyhow::ensure!(!states.is_empty(), "orbit trajectory is empty");

    let mut points: Vec<(f64, f64)> = states.iter().map(|s| (s[0], s[1])).collect();
    points.push(points[0]);

    let (mut min_x, mut max_x, mut min_y, mut max_y) = (f64::MAX, f64::MIN, f64::MAX, f64::MIN);
    for &(x, y) in &points {
        min_x = min_x.min(x);
        max_x = max_x.max(x);
        min_y = min_y.min(y);
        max_y = max_y.max(y);
    }
    let diameter = (max_x - min_x).max(max_y - min_y);
    let pad = 0.18 * diameter;
    let (x0, x1) = (min_x - pad, max_x + pad);
    let (y0, y1) = (min_y - pad, max_y + pad);

    let mut svg = String::new();
    write!(
        svg,
        "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"640\" height=\"640\" \
         viewBox=\"{} {} {} {}\">\n",
        num(x0),
        num(-y1),
        num(x1 - x0),
        num(y1 - y0)
    )?;
    svg.push_str("<title>extremal planar orbit</title>\n");
    write!(
        svg,
        "<desc>closed orbit of the two-bang law, period {}, monodromy radius {}; \
         markers sit on the switching axes</desc>\n",
        num(orbit.law.period),
        num(orbit.monodromy_rho)
    )?;
    svg.push_str("<g transform=\"scale(1 -1)\">\n");

    // short flow-line pieces of both fields, integrated for a fixed arc length
    let cell = ((x1 - x0) / grid as f64).min((y1 - y0) / grid as f64);
    let arc = 0.38 * cell;
    for (k, a) in [p.a0(), p.a1()].into_iter().enumerate() {
        write!(
            svg,
            "<g class=\"flow field{k}\" fill=\"none\" stroke=\"{}\" stroke-width=\"{}\">\n",
            if k == 0 { "#4a78c8" } else { "#c86a4a" },
            num(0.004 * diameter)
        )?;
        for gi in 0..grid {
            for gj in 0..grid {
                let px = x0 + (gi as f64 + 0.5) * (x1 - x0) / grid as f64;
                let py = y0 + (gj as f64 + 0.5) * (y1 - y0) / grid as f64;
                let speed = norm2(&a.matvec(&[px, py])?);
                if speed <= 1e-12 {
                    continue;
                }
                let h = arc / speed;
                let mut line = String::new();
                for step in -2..=2_i32 {
                    let t = f64::from(step) * h / 4.0;
                    let q = a.scale(t).expm()?.matvec(&[px, py])?;
                    if !line.is_empty() {
                        line.push(' ');
                    }
                    write!(line, "{},{}", num(q[0]), num(q[1]))?;
                }
                write!(svg, "<polyline points=\"{line}\"/>\n")?;
            }
        }
        svg.push_str("</g>\n");
    }

    write!(
        svg,
        "<g class=\"axes\" stroke=\"#999999\" stroke-width=\"{}\">\n\
         <line x1=\"{}\" y1=\"0\" x2=\"{}\" y2=\"0\"/>\n\
         <line x1=\"0\" y1=\"{}\" x2=\"0\" y2=\"{}\"/>\n</g>\n",
        num(0.005 * diameter),
        num(x0),
        num(x1),
        num(y0),
        num(y1)
    )?;

    let orbit_points: Vec<String> =
        points.iter().map(|&(x, y)| format!("{},{}", num(x), num(y))).collect();
    write!(
        svg,
        "<polyline class=\"orbit\" fill=\"none\" stroke=\"black\" stroke-width=\"{}\" \
         points=\"{}\"/>\n",
        num(0.01 * diameter),
        orbit_points.join(" ")
    )?;

    write!(svg, "<g class=\"switches\" fill=\"black\">\n")?;
    for pt in &orbit.switch_points {
        write!(
            svg,
            "<circle class=\"switch\" cx=\"{}\" cy=\"{}\" r=\"{}\"/>\n",
            num(pt[0]),
            num(pt[1]),
            num(0.018 * diameter)
        )?;
    }
    svg.push_str("</g>\n</g>\n</svg>\n");
    Ok(svg)
}

/// Norm history of the lifted counterexample run with inf/sup guide lines.
pub fn norm_history_svg(traj: &Trajectory, report: &CounterexampleReport) -> anyhow::Result<String> {
    let times = traj.times();
    anyhow::ensure!(!times.is_empty(), "trajectory is empty");
    let norms = traj.norms();
    let horizon = report.horizon;
    let y_max = 1.15 * report.sup_norm.max(1e-12);

    // pixel-space canvas; the data values ride along in the labels
    let (left, right, top, bottom) = (70.0, 870.0, 40.0, 480.0);
    let to_x = |t: f64| left + (right - left) * t / horizon;
    let to_y = |v: f64| bottom - (bottom - top) * v / y_max;
    let px = |v: f64| format!("{v:.3}");

    let stride = (times.len() + 1999) / 2000;
    let mut line = String::new();
    for (k, (t, n)) in times.iter().zip(&norms).enumerate() {
        if k % stride != 0 && k + 1 != times.len() {
            continue;
        }
        if !line.is_empty() {
            line.push(' ');
        }
        write!(line, "{},{}", px(to_x(*t)), px(to_y(*n)))?;
    }

    let mut svg = String::new();
    svg.push_str(
        "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"900\" height=\"520\" \
         viewBox=\"0 0 900 520\">\n",
    );
    svg.push_str("<title>lifted norm history</title>\n");
    write!(
        svg,
        "<desc>|y(t)| under the two-clock law over horizon {}; the band never \
         reaches zero</desc>\n",
        num(horizon)
    )?;
    write!(
        svg,
        "<g class=\"axes\" stroke=\"#333333\" stroke-width=\"1\">\n\
         <line x1=\"{l}\" y1=\"{b}\" x2=\"{r}\" y2=\"{b}\"/>\n\
         <line x1=\"{l}\" y1=\"{t}\" x2=\"{l}\" y2=\"{b}\"/>\n</g>\n",
        l = px(left),
        r = px(right),
        t = px(top),
        b = px(bottom)
    )?;
    for (class, value) in [("guide inf", report.inf_norm), ("guide sup", report.sup_norm)] {
        write!(
            svg,
            "<line class=\"{class}\" stroke=\"#b03030\" stroke-dasharray=\"6 4\" \
             stroke-width=\"1\" x1=\"{}\" y1=\"{y}\" x2=\"{}\" y2=\"{y}\"/>\n",
            px(left),
            px(right),
            y = px(to_y(value))
        )?;
        write!(
            svg,
            "<text class=\"{} label\" x=\"{}\" y=\"{}\" font-size=\"13\">{} |y| = {}</text>\n",
            class.split(' ').nth(1).unwrap(),
            px(left + 8.0),
            px(to_y(value) - 6.0),
            class.split(' ').nth(1).unwrap(),
            num(value)
        )?;
    }
    write!(
        svg,
        "<polyline class=\"norm\" fill=\"none\" stroke=\"black\" stroke-width=\"1\" \
         points=\"{line}\"/>\n"
    )?;
    for (t, label) in [(0.0, "0"), (horizon, "horizon")] {
        write!(
            svg,
            "<text class=\"tick\" x=\"{}\" y=\"{}\" font-size=\"13\" text-anchor=\"middle\">{}\
             </text>\n",
            px(to_x(t)),
            px(bottom + 18.0),
            label
        )?;
    }
    svg.push_str("</svg>\n");
    Ok(svg)
}
