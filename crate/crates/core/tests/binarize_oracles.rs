mod common;

use matra_core::binarize::{adaptive_niblack_params, global_fixed, niblack, otsu, otsu_threshold, sauvola};
use matra_core::raster::{BinaryImage, GrayImage};
use matra_core::synthgen::{render_clean, PageSpec};
use matra_core::{Error, GlobalThresholdConfig, LocalThresholdConfig};
use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use common::random_gray;

fn naive_local(img: &GrayImage, window: usize, rule: impl Fn(f64, f64) -> f64) -> BinaryImage {
    let half = window / 2;
    BinaryImage::from_fn(img.width(), img.height(), |x, y| {
        let (mut n, mut s, mut q) = (0u64, 0u64, 0u64);
        for yy in y.saturating_sub(half)..=(y + half).min(img.height() - 1) {
            for xx in x.saturating_sub(half)..=(x + half).min(img.width() - 1) {
                let v = u64::from(img.get(xx, yy));
                n += 1;
                s += v;
                q += v * v;
            }
        }
        let numer = n as u128 * q as u128 - (s as u128) * (s as u128);
        f64::from(img.get(x, y)) < rule(s as f64 / n as f64, (numer as f64).sqrt() / n as f64)
    })
}

#[test]
fn global_matches_pixel_comparison() {
    let mut rng = ChaCha8Rng::seed_from_u64(20);
    let img = random_gray(&mut rng, 31, 17);
    let out = global_fixed(&img, GlobalThresholdConfig { threshold: 128 });
    for y in 0..17 {
        for x in 0..31 {
            assert_eq!(out.is_ink(x, y), img.get(x, y) < 128);
        }
    }
}

#[test]
fn otsu_bimodal_and_uniform() {
    let img = GrayImage::from_fn(20, 10, |x, _| if x < 10 { 30 } else { 220 });
    let bin = otsu(&img).unwrap();
    for y in 0..10 {
        for x in 0..20 {
            assert_eq!(bin.is_ink(x, y), img.get(x, y) == 30);
        }
    }
    assert!(matches!(otsu_threshold(&GrayImage::new(4, 4, 9)), Err(Error::UniformImage)));
}

#[test]
fn local_methods_match_naive_windows() {
    let mut rng = ChaCha8Rng::seed_from_u64(21);
    for i in 0..50 {
        let img = random_gray(&mut rng, 9, 9);
        let window = [3, 5, 7][i % 3];
        let nb = LocalThresholdConfig { window, k: -0.2, r: 128.0 };
        assert_eq!(niblack(&img, &nb).unwrap(), naive_local(&img, window, |m, s| m - 0.2 * s));
        let sv = LocalThresholdConfig { window, k: 0.34, r: 128.0 };
        assert_eq!(sauvola(&img, &sv).unwrap(), naive_local(&img, window, |m, s| m * (1.0 + 0.34 * (s / 128.0 - 1.0))));
    }
}

#[test]
fn adaptive_window_tracks_scale() {
    let spec = PageSpec { lines: 3, seed: 4, ..Default::default() };
    let (small, _) = render_clean(&PageSpec { scale: 40, ..spec.clone() }).unwrap();
    let (large, _) = render_clean(&PageSpec { scale: 80, ..spec }).unwrap();
    let a = adaptive_niblack_params(&small).unwrap().window as f64;
    let b = adaptive_niblack_params(&large).unwrap().window as f64;
    assert!((1.6..=2.4).contains(&(b / a)), "{a} -> {b}");
}

fn gray_in(lo: u8, hi: u8) -> impl Strategy<Value = GrayImage> {
    (2usize..16, 2usize..16).prop_flat_map(move |(w, h)| {
        proptest::collection::vec(lo..=hi, w * h).prop_map(move |v| GrayImage::from_vec(w, h, v).unwrap())
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(128))]

    #[test]
    fn global_is_monotone(img in gray_in(0, 255), a in any::<u8>(), b in any::<u8>()) {
        let (lo, hi) = (a.min(b), a.max(b));
        let low = global_fixed(&img, GlobalThresholdConfig { threshold: lo });
        let high = global_fixed(&img, GlobalThresholdConfig { threshold: hi });
        prop_assert!(low.data().iter().zip(high.data()).all(|(l, h)| !l || *h));
    }

    #[test]
    fn otsu_shift_invariant(img in gray_in(10, 245), c in -10i16..=10) {
        prop_assume!(otsu_threshold(&img).is_ok());
        let shifted = GrayImage::from_fn(img.width(), img.height(), |x, y| (i16::from(img.get(x, y)) + c) as u8);
        let t = i16::from(otsu_threshold(&img).unwrap());
        prop_assert_eq!(i16::from(otsu_threshold(&shifted).unwrap()), t + c);
    }

    #[test]
    fn local_thresholds_are_local(img in gray_in(0, 255), px in 0usize..16, py in 0usize..16, v in any::<u8>()) {
        let (w, h) = (img.width(), img.height());
        let (px, py) = (px % w, py % h);
        let cfg = LocalThresholdConfig { window: 3, k: -0.2, r: 128.0 };
        let mut edited = img.clone();
        edited.set(px, py, v);
        let (a, b) = (niblack(&img, &cfg).unwrap(), niblack(&edited, &cfg).unwrap());
        let (c, d) = (sauvola(&img, &cfg).unwrap(), sauvola(&edited, &cfg).unwrap());
        for y in 0..h {
            for x in 0..w {
                if x.abs_diff(px) > cfg.window || y.abs_diff(py) > cfg.window {
                    prop_assert_eq!(a.is_ink(x, y), b.is_ink(x, y));
                    prop_assert_eq!(c.is_ink(x, y), d.is_ink(x, y));
                }
            }
        }
    }
}
