//! SVG heatmap rendering of the C surface. A convenience view only; the
//! CSV is the canonical output.

use phasecrb_core::asymptotic::SurfaceCell;

/// Viridis control points sampled uniformly in [0, 1].
const VIRIDIS: [[f64; 3]; 9] = [
    [68.0, 1.0, 84.0],
    [72.0, 40.0, 120.0],
    [62.0, 74.0, 137.0],
    [49.0, 104.0, 142.0],
    [38.0, 130.0, 142.0],
    [31.0, 158.0, 137.0],
    [53.0, 183.0, 121.0],
    [109.0, 205.0, 89.0],
    [253.0, 231.0, 37.0],
];

fn viridis(t: f64) -> (u8, u8, u8) {
    let t = t.clamp(0.0, 1.0) * (VIRIDIS.len() - 1) as f64;
    let i = (t.floor() as usize).min(VIRIDIS.len() - 2);
    let f = t - i as f64;
    let mix = |a: f64, b: f64| (a + (b - a) * f).round() as u8;
    (
        mix(VIRIDIS[i][0], VIRIDIS[i + 1][0]),
        mix(VIRIDIS[i][1], VIRIDIS[i + 1][1]),
        mix(VIRIDIS[i][2], VIRIDIS[i + 1][2]),
    )
}

/// Renders the row-major surface (gamma outer, tau inner) coloring
/// `log10(C)` over its finite range, clipped to three decades above the
/// minimum. Missing cells stay white.
pub fn heatmap(cells: &[SurfaceCell], gamma_count: usize, tau_count: usize) -> String {
    assert_eq!(cells.len(), gamma_count * tau_count);
    let finite: Vec<f64> = cells
        .iter()
        .filter_map(|c| c.c)
        .filter(|v| v.is_finite() && *v > 0.0)
        .collect();
    let lo = finite.iter().copied().fold(f64::INFINITY, f64::min).log10();
    let hi = (lo + 3.0).min(
        finite
            .iter()
            .copied()
            .fold(f64::NEG_INFINITY, f64::max)
            .log10(),
    );
    let span = (hi - lo).max(1e-12);

    let cell_px = 12.0;
    let margin = 50.0;
    let width = margin + gamma_count as f64 * cell_px + 20.0;
    let height = margin + tau_count as f64 * cell_px + 20.0;
    let mut svg = String::new();
    svg.push_str(&format!(
        "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"{width}\" height=\"{height}\" \
         viewBox=\"0 0 {width} {height}\">\n"
    ));
    svg.push_str("<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n");
    for (idx, cell) in cells.iter().enumerate() {
        let gi = idx / tau_count;
        let ti = idx % tau_count;
        let x = margin + gi as f64 * cell_px;
        // tau grows upward.
        let y = margin + (tau_count - 1 - ti) as f64 * cell_px;
        match cell.c {
            Some(c) if c.is_finite() && c > 0.0 => {
                let t = 1.0 - (c.log10() - lo) / span;
                let (r, g, b) = viridis(t);
                svg.push_str(&format!(
                    "<rect x=\"{x}\" y=\"{y}\" width=\"{cell_px}\" height=\"{cell_px}\" \
                     fill=\"rgb({r},{g},{b})\"><title>gamma*={:.4} tau={:.4} C={:.6}</title></rect>\n",
                    cell.gamma_star, cell.tau, c
                ));
            }
            _ => {}
        }
    }
    svg.push_str(&format!(
        "<text x=\"{}\" y=\"{}\" font-size=\"12\">gamma*</text>\n",
        margin + gamma_count as f64 * cell_px / 2.0 - 20.0,
        height - 4.0
    ));
    svg.push_str(&format!(
        "<text x=\"10\" y=\"{}\" font-size=\"12\" transform=\"rotate(-90 12 {})\">tau</text>\n",
        margin + tau_count as f64 * cell_px / 2.0,
        margin + tau_count as f64 * cell_px / 2.0
    ));
    svg.push_str("</svg>\n");
    svg
}
