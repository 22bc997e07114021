//! Write the three SVG plot kinds to a directory (default: ./plots).

use nalgebra::DMatrix;
use transparency_game::experiment::svg::{emit_svg, Curve, CurveStyle, PlotData};

fn main() -> transparency_game::Result<()> {
    let out = std::path::PathBuf::from(std::env::args().nth(1).unwrap_or_else(|| "plots".into()));
    std::fs::create_dir_all(&out)?;

    let heat = PlotData::ParamHeatmap(DMatrix::from_fn(3, 20, |r, c| ((r + 1) as f64 * c as f64 / 6.0).sin()));
    let x: Vec<f64> = (0..50).map(|i| i as f64 / 49.0).collect();
    let overlay = PlotData::CurveOverlay(vec![
        Curve { name: "target".into(), x: x.clone(), y: x.iter().map(|v| (6.0 * v).sin()).collect(), style: CurveStyle::Points },
        Curve { name: "fit".into(), x: x.clone(), y: x.iter().map(|v| 5.5 * v - 9.0 * v * v).collect(), style: CurveStyle::Line },
    ]);
    let cdf = PlotData::Cdf(vec![("a".into(), vec![0.3, 0.1, 0.9, 0.5]), ("b".into(), vec![0.2, 0.25, 0.4])]);

    for (name, plot) in [("heatmap", heat), ("overlay", overlay), ("cdf", cdf)] {
        let path = out.join(format!("{name}.svg"));
        std::fs::write(&path, emit_svg(&plot)?)?;
        println!("wrote {}", path.display());
    }
    Ok(())
}
