//! Read a matrix file, refine it, and write and re-read a JSON-lines trace.

use std::path::Path;

use urv::io::{parse_matrix, read_trace, write_trace, MatrixFormat};
use urv::{refine, RefineOptions, UpperTriangular};

fn main() -> urv::Result<()> {
    let path = Path::new(env!("CARGO_MANIFEST_DIR")).join("data/near_diagonal.csv");
    let r0 = UpperTriangular::new(parse_matrix(&path, MatrixFormat::Auto)?)?;
    let opts = RefineOptions {
        record_rho: true,
        max_double_sweeps: 3,
        ..RefineOptions::default()
    };
    let report = refine(&r0, &opts)?;

    let mut buf = Vec::new();
    write_trace(&mut buf, report.final_state.history())?;
    let text = String::from_utf8(buf).expect("utf-8");
    print!("{text}");

    for (line, rec) in read_trace(&text)?.iter().zip(report.final_state.history()) {
        assert_eq!(line.to_record()?, *rec);
    }
    println!("trace round-trips exactly");
    Ok(())
}
