//! A small fixed-total grid: theory next to Monte Carlo, written as CSV and SVG.
//!
//! Usage: `cargo run --release --example reproduce_grid -- [out_dir]`

use laplace_mia::cli::{emit_svg, run_fig3, to_csv, write_csv, ExperimentSpec};

fn main() -> laplace_mia::Result<()> {
    let out_dir = std::env::args()
        .nth(1)
        .map(std::path::PathBuf::from)
        .unwrap_or_else(std::env::temp_dir);
    let spec = ExperimentSpec::new(vec![1.0, 5.0, 10.0], 2000, 42).with_m_range(4, 12);
    let rows = run_fig3(&spec)?;
    print!("{}", to_csv(&rows));

    let csv = out_dir.join("grid.csv");
    let svg = out_dir.join("grid.svg");
    write_csv(&rows, &csv)?;
    emit_svg(&rows, &svg)?;
    eprintln!("wrote {} and {}", csv.display(), svg.display());
    Ok(())
}
