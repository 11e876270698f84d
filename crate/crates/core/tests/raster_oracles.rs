mod common;

use matra_core::raster::{
    column_histogram, connected_components, load_pgm, row_histogram, save_pgm, window_stats, BinaryImage, GrayImage,
    Rect,
};
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use common::random_gray;

fn random_binary(rng: &mut ChaCha8Rng, w: usize, h: usize, p: f64) -> BinaryImage {
    BinaryImage::from_vec(w, h, (0..w * h).map(|_| rng.gen_bool(p)).collect()).unwrap()
}

#[test]
fn pgm_round_trips() {
    let mut rng = ChaCha8Rng::seed_from_u64(10);
    for _ in 0..100 {
        let (w, h) = (rng.gen_range(1..30), rng.gen_range(1..30));
        let img = random_gray(&mut rng, w, h);
        let bytes = save_pgm(&img);
        assert_eq!(load_pgm(&bytes).unwrap(), img);
        assert_eq!(save_pgm(&load_pgm(&bytes).unwrap()), bytes);
    }
}

#[test]
fn histograms_match_pixel_loops() {
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    for _ in 0..50 {
        let img = random_binary(&mut rng, 12, 10, 0.4);
        let r = Rect::new(rng.gen_range(0..6), rng.gen_range(0..4), 6, 6);
        let rows = row_histogram(&img, r).unwrap();
        let cols = column_histogram(&img, r).unwrap();
        for (i, &c) in rows.iter().enumerate() {
            let naive = (r.x..r.right()).filter(|&x| img.is_ink(x, r.y + i)).count();
            assert_eq!(c, naive);
        }
        for (i, &c) in cols.iter().enumerate() {
            let naive = (r.y..r.bottom()).filter(|&y| img.is_ink(r.x + i, y)).count();
            assert_eq!(c, naive);
        }
    }
}

#[test]
fn window_stats_match_naive() {
    let mut rng = ChaCha8Rng::seed_from_u64(12);
    for i in 0..100 {
        let (w, h) = (rng.gen_range(1..20), rng.gen_range(1..20));
        let img = random_gray(&mut rng, w, h);
        let half = 1 + i % 15;
        for y in 0..h {
            for x in 0..w {
                let vals: Vec<f64> = (y.saturating_sub(half)..=(y + half).min(h - 1))
                    .flat_map(|yy| (x.saturating_sub(half)..=(x + half).min(w - 1)).map(move |xx| (xx, yy)))
                    .map(|(xx, yy)| f64::from(img.get(xx, yy)))
                    .collect();
                let n = vals.len() as f64;
                let mean = vals.iter().sum::<f64>() / n;
                let var = vals.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / n;
                let s = window_stats(&img, (x, y), half);
                assert!((s.mean - mean).abs() < 1e-9);
                assert!((s.stddev - var.sqrt()).abs() < 1e-9, "{} vs {}", s.stddev, var.sqrt());
            }
        }
    }
}

fn flood(img: &BinaryImage, x: usize, y: usize, label: u32, labels: &mut Vec<u32>) {
    let w = img.width();
    if !img.is_ink(x, y) || labels[y * w + x] != 0 {
        return;
    }
    labels[y * w + x] = label;
    for dy in -1isize..=1 {
        for dx in -1isize..=1 {
            let (nx, ny) = (x as isize + dx, y as isize + dy);
            if img.ink_at(nx, ny) {
                flood(img, nx as usize, ny as usize, label, labels);
            }
        }
    }
}

#[test]
fn components_match_recursive_flood_fill() {
    let mut rng = ChaCha8Rng::seed_from_u64(13);
    for _ in 0..100 {
        let img = random_binary(&mut rng, 20, 20, 0.45);
        let mut labels = vec![0u32; 400];
        let mut next = 0;
        for y in 0..20 {
            for x in 0..20 {
                if img.is_ink(x, y) && labels[y * 20 + x] == 0 {
                    next += 1;
                    flood(&img, x, y, next, &mut labels);
                }
            }
        }
        let comps = connected_components(&img);
        assert_eq!(comps.len(), next as usize);
        for (i, c) in comps.iter().enumerate() {
            // raster-order ids agree with the scan order of the oracle
            assert!(c.pixels.iter().all(|&(x, y)| labels[y * 20 + x] == i as u32 + 1));
            assert_eq!(c.pixel_count, labels.iter().filter(|&&l| l == i as u32 + 1).count());
        }
    }
}

fn binary_strategy() -> impl Strategy<Value = BinaryImage> {
    (1usize..20, 1usize..20).prop_flat_map(|(w, h)| {
        proptest::collection::vec(proptest::bool::weighted(0.4), w * h)
            .prop_map(move |bits| BinaryImage::from_vec(w, h, bits).unwrap())
    })
}

fn gray_strategy() -> impl Strategy<Value = GrayImage> {
    (1usize..24, 1usize..24).prop_flat_map(|(w, h)| {
        proptest::collection::vec(any::<u8>(), w * h).prop_map(move |v| GrayImage::from_vec(w, h, v).unwrap())
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(128))]

    #[test]
    fn ink_is_conserved(img in binary_strategy()) {
        let rows: usize = row_histogram(&img, img.bounds()).unwrap().iter().sum();
        let cols: usize = column_histogram(&img, img.bounds()).unwrap().iter().sum();
        prop_assert_eq!(rows, img.ink_count());
        prop_assert_eq!(cols, img.ink_count());
    }

    #[test]
    fn components_partition_and_are_maximal(img in binary_strategy()) {
        let comps = connected_components(&img);
        let w = img.width();
        let mut owner = vec![usize::MAX; w * img.height()];
        for (i, c) in comps.iter().enumerate() {
            for &(x, y) in &c.pixels {
                prop_assert!(img.is_ink(x, y));
                prop_assert_eq!(owner[y * w + x], usize::MAX);
                owner[y * w + x] = i;
            }
        }
        for y in 0..img.height() {
            for x in 0..w {
                if !img.is_ink(x, y) {
                    continue;
                }
                prop_assert!(owner[y * w + x] != usize::MAX);
                // no 8-neighbour belongs to a different component
                for (nx, ny) in [(x + 1, y), (x, y + 1), (x + 1, y + 1)] {
                    if nx < w && ny < img.height() && img.is_ink(nx, ny) {
                        prop_assert_eq!(owner[ny * w + nx], owner[y * w + x]);
                    }
                }
                if x > 0 && y + 1 < img.height() && img.is_ink(x - 1, y + 1) {
                    prop_assert_eq!(owner[(y + 1) * w + x - 1], owner[y * w + x]);
                }
            }
        }
    }

    #[test]
    fn pgm_round_trip_property(img in gray_strategy()) {
        let bytes = save_pgm(&img);
        prop_assert_eq!(load_pgm(&bytes).unwrap(), img);
    }

    #[test]
    fn zero_rotation_is_identity(img in gray_strategy()) {
        prop_assert_eq!(matra_core::raster::rotate_gray(&img, 0.0), img.clone());
        let bin = img.threshold_below(128);
        prop_assert_eq!(matra_core::raster::rotate_binary(&bin, 0.0), bin);
    }
}
