//! Mini-tile masks the contribution test produces for one elongated splat,
//! next to the exhaustive per-pixel answer.

use minitile_splat::cat::{cat_test_detailed, exhaustive_mask, NumericProfile, SamplingMode};
use minitile_splat::preprocess::{Splat2D, Sym2, TileCoords};

fn bits(m: u8) -> String {
    (0..4).map(|i| if m >> i & 1 == 1 { '#' } else { '.' }).collect()
}

fn main() -> minitile_splat::Result<()> {
    // Thin streak crossing the first tile diagonally.
    let (l1, l2, th) = (60.0f64, 0.6f64, 0.6f64);
    let (c, s) = (th.cos(), th.sin());
    let cov = Sym2::new(l1 * c * c + l2 * s * s, (l1 - l2) * c * s, l1 * s * s + l2 * c * c);
    let splat = Splat2D::from_covariance(0, [7.3, 6.8], cov, 1.0, 0.8, [1.0; 3]).expect("positive definite");
    println!("spiky: {}", splat.spiky);

    let profiles = [NumericProfile::Exact, NumericProfile::Mixed, NumericProfile::Full8];
    print!("{:22}", "sub-tile");
    for sub in 0..4 {
        print!(" {sub:>6}");
    }
    println!();
    let subtiles: Vec<TileCoords> = (0..4).map(|s| TileCoords::new((0, 0), s, 0)).collect();
    print!("{:22}", "exhaustive");
    for t in &subtiles {
        print!("   {}", bits(exhaustive_mask(&splat, t).0));
    }
    println!();
    for mode in SamplingMode::ALL {
        for profile in profiles {
            print!("{:22}", format!("{}/{}", mode.name(), profile.name()));
            for t in &subtiles {
                print!("   {}", bits(cat_test_detailed(&splat, t, mode, profile).mask.0));
            }
            println!();
        }
    }
    Ok(())
}
