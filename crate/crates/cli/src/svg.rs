//! Minimal SVG emission: initial and final boundary curves with axes.

use fbmhd::surface::SurfaceGraph;
use std::f64::consts::PI;

const SIZE: f64 = 480.0;
const SCALE: f64 = 160.0;

fn polyline(surface: &SurfaceGraph, n: usize) -> String {
    let mut pts = String::new();
    for j in 0..=n {
        let th = 2.0 * PI * (j % n) as f64 / n as f64;
        let r = surface.radius(th);
        let x = SIZE / 2.0 + SCALE * r * th.cos();
        let y = SIZE / 2.0 - SCALE * r * th.sin();
        if j > 0 {
            pts.push(' ');
        }
        pts.push_str(&format!("{x:.2},{y:.2}"));
    }
    pts
}

pub fn boundary_figure(initial: &SurfaceGraph, final_surface: &SurfaceGraph) -> String {
    let n = 256;
    let c = SIZE / 2.0;
    format!(
        "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"{s}\" height=\"{s}\" viewBox=\"0 0 {s} {s}\">\n\
         <rect width=\"{s}\" height=\"{s}\" fill=\"white\"/>\n\
         <line x1=\"0\" y1=\"{c}\" x2=\"{s}\" y2=\"{c}\" stroke=\"#cccccc\" stroke-width=\"1\"/>\n\
         <line x1=\"{c}\" y1=\"0\" x2=\"{c}\" y2=\"{s}\" stroke=\"#cccccc\" stroke-width=\"1\"/>\n\
         <polyline points=\"{p0}\" fill=\"none\" stroke=\"#4477aa\" stroke-width=\"1.5\"/>\n\
         <polyline points=\"{p1}\" fill=\"none\" stroke=\"#cc3311\" stroke-width=\"1.5\"/>\n\
         <text x=\"8\" y=\"18\" font-family=\"monospace\" font-size=\"12\" fill=\"#4477aa\">initial</text>\n\
         <text x=\"8\" y=\"34\" font-family=\"monospace\" font-size=\"12\" fill=\"#cc3311\">final</text>\n\
         </svg>\n",
        s = SIZE,
        c = c,
        p0 = polyline(initial, n),
        p1 = polyline(final_surface, n),
    )
}
