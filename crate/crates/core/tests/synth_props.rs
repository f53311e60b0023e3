use convtact::synth::{generate, make_texture, make_texture_with_lattice, sample_bicubic, zoom_frame, SynthConfig};
use convtact::Tensor;

#[test]
fn zoom_telescopes_on_smooth_texture() {
    let tex = make_texture_with_lattice(96, 80, 3, 8).unwrap();
    let foe = (40.0, 44.0);
    for (m1, m2) in [(1.05, 1.1), (1.2, 1.3), (1.01, 1.5)] {
        let once = zoom_frame(&tex, foe, m1 * m2).unwrap();
        let twice = zoom_frame(&zoom_frame(&tex, foe, m1).unwrap(), foe, m2).unwrap();
        let err = once.max_abs_diff(&twice);
        assert!(err < 2e-2, "m1 {m1} m2 {m2}: {err}");
    }
}

#[test]
fn zoom_moves_a_peak_radially() {
    // a smooth blob at p lands at foe + m (p - foe)
    let (w, h) = (80usize, 64usize);
    let p = (50.0, 22.0);
    let blob = Tensor::from_fn(&[h, w], |i| {
        let (dx, dy) = (i[1] as f64 - p.0, i[0] as f64 - p.1);
        (-(dx * dx + dy * dy) / 18.0).exp()
    })
    .unwrap();
    let foe = (30.0, 35.0);
    for m in [1.1, 1.25, 1.4] {
        let z = zoom_frame(&blob, foe, m).unwrap();
        // intensity-weighted centroid
        let (mut sx, mut sy, mut s) = (0.0, 0.0, 0.0);
        for y in 0..h {
            for x in 0..w {
                let v = z.at(y, x).max(0.0);
                sx += v * x as f64;
                sy += v * y as f64;
                s += v;
            }
        }
        let want = (foe.0 + m * (p.0 - foe.0), foe.1 + m * (p.1 - foe.1));
        assert!((sx / s - want.0).abs() < 0.05 && (sy / s - want.1).abs() < 0.05, "m {m}: ({}, {})", sx / s, sy / s);
    }
}

#[test]
fn unit_zoom_and_integer_samples_reproduce_texture() {
    let tex = make_texture(32, 24, 8).unwrap();
    assert!(zoom_frame(&tex, (10.0, 10.0), 1.0).unwrap().max_abs_diff(&tex) < 1e-15);
    assert_eq!(sample_bicubic(&tex, 5.0, 7.0), tex.at(7, 5));
    assert!(zoom_frame(&tex, (10.0, 10.0), 0.9).is_err());
}

#[test]
fn truth_follows_the_magnification_law() {
    let cfg = SynthConfig { frames: 30, ..Default::default() };
    let seq = generate(&cfg).unwrap();
    assert_eq!(seq.frames.dims(), &[30, 256, 256]);
    for t in 0..cfg.frames - 1 {
        let ratio = cfg.magnification(t + 1) / cfg.magnification(t);
        let c = 1.0 - 1.0 / ratio;
        assert!((1.0 / c - seq.truth[t].ttc).abs() < 1e-9);
        assert_eq!(seq.truth[t].ttc, cfg.t0 - t as f64);
    }
    let (fx, fy) = cfg.foe_px();
    assert!(seq.truth.iter().all(|r| r.foe_x == fx && r.foe_y == fy));
}

#[test]
fn generator_is_deterministic_and_seed_sensitive() {
    let cfg = SynthConfig { width: 64, height: 48, frames: 5, noise_sigma: 0.05, seed: 11, ..Default::default() };
    let a = generate(&cfg).unwrap();
    let b = generate(&cfg).unwrap();
    assert_eq!(a, b);
    let c = generate(&SynthConfig { seed: 12, ..cfg }).unwrap();
    let differing = a.frames.data().iter().zip(c.frames.data()).filter(|(x, y)| x != y).count();
    assert!(differing * 2 >= a.frames.len());
    assert!(a.frames.data().iter().all(|v| (0.0..=1.0).contains(v)));
}

#[test]
fn noise_has_requested_spread() {
    let clean = generate(&SynthConfig { width: 128, height: 128, frames: 2, ..Default::default() }).unwrap();
    let noisy =
        generate(&SynthConfig { width: 128, height: 128, frames: 2, noise_sigma: 0.02, ..Default::default() }).unwrap();
    // clamping only trims the rare pixels pushed past 0 or 1
    let diffs: Vec<f64> = noisy.frames.data().iter().zip(clean.frames.data()).map(|(a, b)| a - b).collect();
    let n = diffs.len() as f64;
    let mean = diffs.iter().sum::<f64>() / n;
    let sd = (diffs.iter().map(|d| (d - mean).powi(2)).sum::<f64>() / n).sqrt();
    assert!(mean.abs() < 2e-3 && (sd - 0.02).abs() < 2e-3, "mean {mean} sd {sd}");
}

#[test]
fn invalid_configs_rejected() {
    let base = SynthConfig::default();
    for bad in [
        SynthConfig { frames: 0, ..base },
        SynthConfig { frames: 100, ..base },
        SynthConfig { foe: (0.0, 0.5), ..base },
        SynthConfig { noise_sigma: -0.1, ..base },
        SynthConfig { width: 8, ..base },
        SynthConfig { texture_lattice: 0, ..base },
    ] {
        assert!(generate(&bad).is_err(), "{bad:?}");
    }
}
