//! Regenerates the synthetic fixtures under `crates/core/fixtures/`.
//!
//! cargo run -p cfair --example gen_fixtures

use std::path::Path;

use cfair::synth::{law_school_csv, oulad_csv, student_csv};

fn main() -> std::io::Result<()> {
    let root = Path::new(env!("CARGO_MANIFEST_DIR")).join("fixtures");
    for (dir, file, body) in [
        ("law", "law_school.csv", law_school_csv(3000, 11)),
        ("student", "student.csv", student_csv(650, 12)),
        ("oulad", "studentInfo.csv", oulad_csv(8000, 13)),
    ] {
        let path = root.join(dir).join(file);
        std::fs::create_dir_all(path.parent().unwrap())?;
        std::fs::write(&path, body)?;
        println!("wrote {}", path.display());
    }
    Ok(())
}
