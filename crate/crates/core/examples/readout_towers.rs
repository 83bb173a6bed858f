//! Build both tower constructions for a given output width and run the
//! structural checks on each.
//!
//! Usage: `cargo run --release --example readout_towers [n]`

use bsbm::readout::{build_tower, verify_tower, Construction, TowerOptions, VerifyOptions};

fn main() -> bsbm::Result<()> {
    let n: usize = std::env::args().nth(1).map_or(3, |s| s.parse().expect("n"));
    for construction in [Construction::Interp, Construction::Bleed] {
        let tower = build_tower(n, construction, TowerOptions::default())?;
        print!("{}", tower.describe());
        let checks = verify_tower(&tower, &VerifyOptions::default())?;
        let failed = checks.iter().filter(|c| c.failed()).count();
        for check in &checks {
            println!("  {check}");
        }
        println!("{} checks, {failed} failed\n", checks.len());
    }
    Ok(())
}
