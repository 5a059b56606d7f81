//! Window extent against fringe period: narrow windows keep the carrier
//! frequency, wide ones alias it.
//!
//! `cargo run --example nyquist_aliasing`

use spi3d::spectrum::nyquist_demo;

fn main() -> spi3d::Result<()> {
    let (carrier, report) = nyquist_demo(6.0, &[1, 2, 3, 4, 5, 6, 7])?;
    println!("carrier {}x{}, period {} px", carrier.grid().height(), carrier.grid().width(), report.period);
    println!("{:>6} {:>9} {:>8} {:>8} {:>6}", "extent", "regime", "carrier", "sampled", "shift");
    for c in &report.cases {
        println!(
            "{:>6} {:>9} {:>8} {:>8} {:>6}",
            c.extent,
            format!("{:?}", c.regime).to_lowercase(),
            c.carrier_bin,
            c.sampled_bin,
            c.shift
        );
    }
    Ok(())
}
