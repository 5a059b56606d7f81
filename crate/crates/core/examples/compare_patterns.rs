//! Active windows against random binary masks at the same number of
//! measurements, scored by SSIM against the scene.
//!
//! `cargo run --example compare_patterns`

use spi3d::baseline::compare_patterns;
use spi3d::cli::procedural_fringes;

fn main() -> spi3d::Result<()> {
    let scenes = procedural_fringes(8, 42, 32, (6.0, 8.0), (13.0, 17.0))?;
    for n in [2, 4, 16] {
        let r = compare_patterns(&scenes, n, 42)?;
        println!(
            "rate {:>6.2}%: {} measurements, active ssim {:.4}, random ssim {:.4} (ridge strength {:e})",
            100.0 * r.rate,
            r.measurements,
            r.active_ssim,
            r.random_ssim,
            r.best_lambda
        );
    }
    Ok(())
}
