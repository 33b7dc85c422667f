//! SLIC at KITTI resolution with the default segment count.

use image::{Rgb, RgbImage};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use roadprior::refine::{relabel, superpixels, SlicConfig};
use roadprior::RoadMask;

/// Sky, a road trapezoid and verge, with sensor noise.
fn street(seed: u64) -> RgbImage {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    RgbImage::from_fn(1242, 375, |x, y| {
        let (xf, yf) = (x as f64, y as f64);
        let base = if yf < 170.0 {
            [140.0, 180.0, 230.0 - yf * 0.2]
        } else if (xf - 621.0).abs() < (yf - 150.0) * 2.6 {
            [80.0, 80.0, 85.0]
        } else {
            [70.0, 120.0 + (xf * 0.05).sin() * 20.0, 50.0]
        };
        Rgb(base.map(|c| (c + rng.random_range(-12.0..12.0)).clamp(0.0, 255.0) as u8))
    })
}

#[test]
fn kitti_sized_partition() {
    let img = street(11);
    let sp = superpixels(&img, 800, &SlicConfig::default()).unwrap();
    let n = 1242 * 375;
    assert_eq!(sp.labels().len(), n);
    assert!(sp.segments_connected());
    let sizes = sp.sizes();
    assert_eq!(sizes.len(), sp.k());
    assert_eq!(sizes.iter().sum::<usize>(), n);
    assert!(sizes.iter().all(|&s| s > 0));
    assert!((600..=1000).contains(&sp.k()), "k = {}", sp.k());
    // orphans are merged, so nothing is a speck
    let min = *sizes.iter().min().unwrap();
    assert!(min * 8 >= n / 800, "smallest segment {min}");

    // a mask that already follows the road survives relabeling almost unchanged
    let road: Vec<bool> = (0..n)
        .map(|i| {
            let (x, y) = ((i % 1242) as f64, (i / 1242) as f64);
            y >= 170.0 && (x - 621.0).abs() < (y - 150.0) * 2.6
        })
        .collect();
    let mask = RoadMask::from_bools(1242, 375, &road).unwrap();
    let out = relabel(&sp, &mask).unwrap().support();
    let inter = out.iter().zip(&road).filter(|(a, b)| **a && **b).count() as f64;
    let union = out.iter().zip(&road).filter(|(a, b)| **a || **b).count() as f64;
    assert!(inter / union > 0.9, "IoU {}", inter / union);
}
