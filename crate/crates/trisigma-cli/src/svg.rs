//! Minimal standalone SVG 1.1 line chart for the threshold curves.
//!
//! Two labeled series (the inf side in yellow, the sup side in blue,
//! matching the usual presentation of the two sides), light axes with
//! tick labels, and an annotated crossing marker. All coordinates are
//! formatted with fixed precision so identical curves produce
//! byte-identical files.

use trisigma::threshold::ThresholdCurve;

const WIDTH: f64 = 640.0;
const HEIGHT: f64 = 420.0;
const MARGIN_L: f64 = 70.0;
const MARGIN_R: f64 = 24.0;
const MARGIN_T: f64 = 28.0;
const MARGIN_B: f64 = 52.0;

struct Frame {
    x_min: f64,
    x_max: f64,
    y_min: f64,
    y_max: f64,
}

impl Frame {
    fn x(&self, v: f64) -> f64 {
        MARGIN_L + (v - self.x_min) / (self.x_max - self.x_min) * (WIDTH - MARGIN_L - MARGIN_R)
    }

    fn y(&self, v: f64) -> f64 {
        HEIGHT - MARGIN_B
            - (v - self.y_min) / (self.y_max - self.y_min) * (HEIGHT - MARGIN_T - MARGIN_B)
    }
}

fn polyline(frame: &Frame, xs: &[f64], ys: &[f64], color: &str) -> String {
    let points: Vec<String> = xs
        .iter()
        .zip(ys)
        .map(|(&x, &y)| format!("{:.2},{:.2}", frame.x(x), frame.y(y)))
        .collect();
    format!(
        "  <polyline fill=\"none\" stroke=\"{color}\" stroke-width=\"2\" points=\"{}\"/>\n",
        points.join(" ")
    )
}

/// Render the two sides of the threshold inequality with the crossing
/// annotated. Degenerate single-point curves still produce a valid file.
pub fn render_threshold_curve(curve: &ThresholdCurve) -> String {
    let x_min = curve.eps_values.first().copied().unwrap_or(0.0);
    let x_max = curve.eps_values.last().copied().unwrap_or(1.0);
    let values = curve.lhs.iter().chain(curve.rhs.iter());
    let mut y_min = f64::INFINITY;
    let mut y_max = f64::NEG_INFINITY;
    for &v in values {
        y_min = y_min.min(v);
        y_max = y_max.max(v);
    }
    if !y_min.is_finite() || y_min == y_max {
        y_min -= 1.0;
        y_max += 1.0;
    }
    let pad = 0.06 * (y_max - y_min);
    let frame = Frame {
        x_min,
        x_max: if x_max > x_min { x_max } else { x_min + 1.0 },
        y_min: y_min - pad,
        y_max: y_max + pad,
    };

    let mut svg = String::new();
    svg.push_str(&format!(
        "<svg xmlns=\"http://www.w3.org/2000/svg\" version=\"1.1\" width=\"{WIDTH}\" height=\"{HEIGHT}\" viewBox=\"0 0 {WIDTH} {HEIGHT}\">\n"
    ));
    svg.push_str("  <rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n");

    // axes
    let x0 = frame.x(frame.x_min);
    let x1 = frame.x(frame.x_max);
    let y0 = frame.y(frame.y_min);
    let y1 = frame.y(frame.y_max);
    svg.push_str(&format!(
        "  <line x1=\"{x0:.2}\" y1=\"{y0:.2}\" x2=\"{x1:.2}\" y2=\"{y0:.2}\" stroke=\"black\"/>\n"
    ));
    svg.push_str(&format!(
        "  <line x1=\"{x0:.2}\" y1=\"{y0:.2}\" x2=\"{x0:.2}\" y2=\"{y1:.2}\" stroke=\"black\"/>\n"
    ));
    for i in 0..=4 {
        let t = i as f64 / 4.0;
        let xv = frame.x_min + t * (frame.x_max - frame.x_min);
        let yv = frame.y_min + t * (frame.y_max - frame.y_min);
        svg.push_str(&format!(
            "  <text x=\"{:.2}\" y=\"{:.2}\" font-size=\"11\" text-anchor=\"middle\">{:.3}</text>\n",
            frame.x(xv),
            y0 + 16.0,
            xv
        ));
        svg.push_str(&format!(
            "  <text x=\"{:.2}\" y=\"{:.2}\" font-size=\"11\" text-anchor=\"end\">{:.1}</text>\n",
            x0 - 6.0,
            frame.y(yv) + 4.0,
            yv
        ));
    }
    svg.push_str(&format!(
        "  <text x=\"{:.2}\" y=\"{:.2}\" font-size=\"12\" text-anchor=\"middle\">support radius</text>\n",
        0.5 * (x0 + x1),
        HEIGHT - 12.0
    ));

    svg.push_str(&polyline(&frame, &curve.eps_values, &curve.lhs, "#e6b800"));
    svg.push_str(&polyline(&frame, &curve.eps_values, &curve.rhs, "#2060c0"));

    // legend
    svg.push_str(&format!(
        "  <text x=\"{:.2}\" y=\"{:.2}\" font-size=\"12\" fill=\"#e6b800\">inf side</text>\n",
        x0 + 10.0,
        y1 + 16.0
    ));
    svg.push_str(&format!(
        "  <text x=\"{:.2}\" y=\"{:.2}\" font-size=\"12\" fill=\"#2060c0\">sup side</text>\n",
        x0 + 10.0,
        y1 + 32.0
    ));

    if let Some(cross) = curve.crossing() {
        // interpolate the height of the crossing on the sup side
        let mut cy = curve.rhs[0];
        for i in 1..curve.eps_values.len() {
            if curve.eps_values[i] >= cross {
                let t = (cross - curve.eps_values[i - 1])
                    / (curve.eps_values[i] - curve.eps_values[i - 1]);
                cy = curve.rhs[i - 1] + t * (curve.rhs[i] - curve.rhs[i - 1]);
                break;
            }
        }
        svg.push_str(&format!(
            "  <circle cx=\"{:.2}\" cy=\"{:.2}\" r=\"4\" fill=\"red\"/>\n",
            frame.x(cross),
            frame.y(cy)
        ));
        svg.push_str(&format!(
            "  <text x=\"{:.2}\" y=\"{:.2}\" font-size=\"12\" fill=\"red\">crossing at {:.4}</text>\n",
            frame.x(cross) + 8.0,
            frame.y(cy) - 8.0,
            cross
        ));
    }

    svg.push_str("</svg>\n");
    svg
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn well_formed_output() {
        let curve = ThresholdCurve {
            eps_values: vec![0.01, 0.05, 0.10, 0.13],
            lhs: vec![90.0, 36.0, 29.0, 26.0],
            rhs: vec![28.3, 28.3, 28.4, 28.5],
        };
        let svg = render_threshold_curve(&curve);
        assert!(svg.starts_with("<svg"));
        assert!(svg.ends_with("</svg>\n"));
        assert!(svg.contains("polyline"));
        assert!(svg.contains("crossing at"));
        assert_eq!(svg.matches("<polyline").count(), 2);
    }

    #[test]
    fn single_point_is_degenerate_but_valid() {
        let curve =
            ThresholdCurve { eps_values: vec![0.05], lhs: vec![36.0], rhs: vec![28.3] };
        let svg = render_threshold_curve(&curve);
        assert!(svg.starts_with("<svg") && svg.ends_with("</svg>\n"));
    }

    #[test]
    fn byte_identical_for_identical_curves() {
        let curve = ThresholdCurve {
            eps_values: vec![0.01, 0.13],
            lhs: vec![90.0, 26.0],
            rhs: vec![28.3, 28.5],
        };
        assert_eq!(render_threshold_curve(&curve), render_threshold_curve(&curve));
    }
}
