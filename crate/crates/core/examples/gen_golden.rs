//! Regenerates the golden benchmark dataset under data/golden (or a
//! directory given as the first argument).

#[path = "../tests/support/golden_gen.rs"]
mod golden_gen;

fn main() -> std::io::Result<()> {
    let dir = std::env::args()
        .nth(1)
        .unwrap_or_else(|| "data/golden".to_string());
    let dir = std::path::Path::new(&dir);
    std::fs::create_dir_all(dir)?;
    let files = golden_gen::generate();
    for (name, contents) in files.entries() {
        std::fs::write(dir.join(name), contents)?;
        println!("wrote {}", dir.join(name).display());
    }
    Ok(())
}
