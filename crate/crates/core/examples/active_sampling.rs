//! Active sampling windows: rectangles and split pairs, their rates and
//! extents, and the order in which placements are projected.
//!
//! `cargo run --example active_sampling`

use spi3d::sampling::{check_nyquist, make_sequence, make_window, swirl_order, Orientation, ScanOrder, WindowKind};

fn main() -> spi3d::Result<()> {
    for n in [1, 2, 4, 16] {
        for kind in [WindowKind::Rect, WindowKind::SplitPair] {
            let set = make_window(n, kind, Orientation::Vertical)?;
            let seq = make_sequence((64, 64), &set, ScanOrder::Raster)?;
            println!(
                "N {n:>2} {kind:?}: tile {:?}, extent {} px, rate {:.4}, {} measurements, low-res {:?}, regime at T=8 {:?}",
                set.tile(),
                set.extent(),
                seq.rate(),
                seq.len(),
                seq.low_res_dims(),
                check_nyquist(set.extent(), 8.0)?
            );
        }
    }
    println!("swirl order over a 4x4 anchor grid:");
    let order = swirl_order(4, 4);
    for r in 0..4 {
        let row: Vec<String> = (0..4).map(|c| format!("{:>3}", order.iter().position(|&p| p == (r, c)).unwrap())).collect();
        println!("  {}", row.join(""));
    }
    Ok(())
}
