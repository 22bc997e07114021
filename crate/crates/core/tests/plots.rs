use nalgebra::DMatrix;
use transparency_game::experiment::{emit_svg, execute, Curve, CurveStyle, ExperimentConfig, PlotData, Task};

fn attr_values(svg: &str, attr: &str) -> Vec<String> {
    let key = format!("{attr}=\"");
    svg.match_indices(&key)
        .map(|(i, _)| {
            let rest = &svg[i + key.len()..];
            rest[..rest.find('"').unwrap()].to_string()
        })
        .collect()
}

#[test]
fn heatmap_cells_carry_exact_values() {
    let m = DMatrix::from_row_slice(2, 3, &[0.1, -2.5, 3.0, 1e-9, 7.25, 0.0]);
    let svg = emit_svg(&PlotData::ParamHeatmap(m.clone())).unwrap();
    let values: Vec<f64> = attr_values(&svg, "data-value").iter().map(|v| v.parse().unwrap()).collect();
    let mut expected: Vec<f64> = m.iter().copied().collect();
    let mut got = values.clone();
    expected.sort_by(f64::total_cmp);
    got.sort_by(f64::total_cmp);
    assert_eq!(got, expected);
}

#[test]
fn overlay_points_round_trip() {
    let x = vec![0.0, 0.25, 0.5, 1.0 / 3.0];
    let y = vec![1.5, -0.125, 2.0, std::f64::consts::PI];
    let plot = PlotData::CurveOverlay(vec![Curve { name: "c".into(), x: x.clone(), y: y.clone(), style: CurveStyle::Line }]);
    let svg = emit_svg(&plot).unwrap();
    let curve = &svg[svg.find("data-name=\"c\"").unwrap()..];
    let curve = &curve[..curve.find('>').unwrap()];
    let xs: Vec<f64> = attr_values(curve, "data-x")[0].split(' ').map(|v| v.parse().unwrap()).collect();
    let ys: Vec<f64> = attr_values(curve, "data-y")[0].split(' ').map(|v| v.parse().unwrap()).collect();
    assert_eq!(xs, x);
    assert_eq!(ys, y);
}

#[test]
fn experiment_plots_render() {
    let report = execute(&ExperimentConfig::new(Task::Synth1d, 0)).unwrap();
    assert!(!report.plots.is_empty());
    for p in &report.plots {
        let svg = emit_svg(&p.plot).unwrap();
        assert!(svg.starts_with("<svg") && svg.trim_end().ends_with("</svg>"), "{}", p.name);
    }
}
