use convtact::rng::XorShift64Star;
use convtact::synth::{generate, zoom_frame, SynthConfig};
use convtact::ttc::{
    build_normal_system, derivatives_3d, estimate_fixed, estimate_multiscale, radial_gradient, run_sequence, solve_ttc,
    FramePair, Mode, TtcConfig,
};
use convtact::{Image, Tensor};
use proptest::prelude::*;

fn random_image(h: usize, w: usize, seed: u64) -> Image {
    let mut rng = XorShift64Star::new(seed);
    Tensor::from_fn(&[h, w], |_| rng.uniform()).unwrap()
}

/// Smallest eigenvalue of a symmetric 3x3 matrix by Jacobi rotations.
#[allow(clippy::needless_range_loop)]
fn min_eigenvalue(m: [[f64; 3]; 3]) -> f64 {
    let mut a = m;
    for _ in 0..100 {
        let (mut p, mut q, mut big) = (0, 1, 0.0);
        for i in 0..3 {
            for j in i + 1..3 {
                if a[i][j].abs() > big {
                    (p, q, big) = (i, j, a[i][j].abs());
                }
            }
        }
        let scale = (0..3).map(|i| a[i][i].abs()).fold(0.0, f64::max);
        if big <= 1e-15 * scale.max(f64::MIN_POSITIVE) {
            break;
        }
        let theta = 0.5 * (2.0 * a[p][q]).atan2(a[q][q] - a[p][p]);
        let (c, s) = (theta.cos(), theta.sin());
        let mut r = [[0.0; 3]; 3];
        for (i, row) in r.iter_mut().enumerate() {
            row[i] = 1.0;
        }
        r[p][p] = c;
        r[q][q] = c;
        r[p][q] = s;
        r[q][p] = -s;
        // a <- r^T a r
        let mut t = [[0.0; 3]; 3];
        for i in 0..3 {
            for j in 0..3 {
                t[i][j] = (0..3).map(|k| a[i][k] * r[k][j]).sum();
            }
        }
        for i in 0..3 {
            for j in 0..3 {
                a[i][j] = (0..3).map(|k| r[k][i] * t[k][j]).sum();
            }
        }
    }
    (0..3).map(|i| a[i][i]).fold(f64::INFINITY, f64::min)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn normal_matrix_is_symmetric_psd(h in 5usize..20, w in 5usize..20, s0: u64, s1: u64) {
        let (e0, e1) = (random_image(h, w, s0), random_image(h, w, s1));
        let (ex, ey, et) = derivatives_3d(&e0, &e1).unwrap();
        let g = radial_gradient(&ex, &ey).unwrap();
        let sys = build_normal_system(&ex, &ey, &g, &et, 1).unwrap();
        for i in 0..3 {
            for j in 0..3 {
                prop_assert_eq!(sys.m[i][j], sys.m[j][i]);
            }
        }
        let scale = (0..3).map(|i| sys.m[i][i]).fold(1.0, f64::max);
        prop_assert!(min_eigenvalue(sys.m) >= -1e-10 * scale);
    }

    #[test]
    fn residual_never_exceeds_mean_et_squared(h in 5usize..20, w in 5usize..20, s0: u64, s1: u64) {
        let (e0, e1) = (random_image(h, w, s0), random_image(h, w, s1));
        let (ex, ey, et) = derivatives_3d(&e0, &e1).unwrap();
        let g = radial_gradient(&ex, &ey).unwrap();
        let sys = build_normal_system(&ex, &ey, &g, &et, 1).unwrap();
        let est = solve_ttc(&sys, &TtcConfig::default());
        let mean_et_sq = sys.et_sq / sys.count as f64;
        prop_assert!(est.residual <= mean_et_sq * (1.0 + 1e-12) + 1e-15);
        prop_assert!((0.0..=1.0).contains(&est.relative_residual));
    }

    #[test]
    fn brightness_scale_leaves_estimate_unchanged(seed in 1u64..1000, a in 0.1f64..10.0) {
        let cfg = SynthConfig { width: 48, height: 40, frames: 2, seed, ..Default::default() };
        let seq = generate(&cfg).unwrap();
        let (e0, e1) = (seq.frames.plane(0).unwrap(), seq.frames.plane(1).unwrap());
        let base = estimate_fixed(&FramePair::new(&e0, &e1, 0).unwrap(), 0, &TtcConfig::default()).unwrap();
        let (s0, s1) = (e0.map(|v| a * v), e1.map(|v| a * v));
        let scaled = estimate_fixed(&FramePair::new(&s0, &s1, 0).unwrap(), 0, &TtcConfig::default()).unwrap();
        let rel = |x: f64, y: f64| (x - y).abs() / x.abs().max(1e-300);
        prop_assert!(rel(base.ttc, scaled.ttc) < 1e-9);
        prop_assert!(rel(base.x0, scaled.x0) < 1e-9);
        prop_assert!(rel(base.y0, scaled.y0) < 1e-9);
    }
}

#[test]
fn constant_frames_are_never_finite() {
    for (v0, v1) in [(0.0, 0.0), (0.5, 0.5), (0.2, 0.7)] {
        let e0 = Tensor::filled(&[16, 20], v0).unwrap();
        let e1 = Tensor::filled(&[16, 20], v1).unwrap();
        let pair = FramePair::new(&e0, &e1, 0).unwrap();
        for est in [
            estimate_fixed(&pair, 0, &TtcConfig::default()).unwrap(),
            estimate_fixed(&pair, 2, &TtcConfig::default()).unwrap(),
            estimate_multiscale(&pair, 2, &TtcConfig::default()).unwrap(),
        ] {
            assert!(est.degenerate);
            assert!(!est.ttc.is_finite());
            assert_eq!((est.a, est.b, est.c), (0.0, 0.0, 0.0));
        }
    }
}

#[test]
fn approach_and_recession_signs() {
    let cfg = SynthConfig { width: 96, height: 96, frames: 2, ..Default::default() };
    let seq = generate(&cfg).unwrap();
    let (e0, e1) = (seq.frames.plane(0).unwrap(), seq.frames.plane(1).unwrap());
    let approach = estimate_fixed(&FramePair::new(&e0, &e1, 0).unwrap(), 0, &TtcConfig::default()).unwrap();
    assert!(approach.c > 0.0 && approach.ttc > 0.0 && approach.ttc.is_finite());
    let recede = estimate_fixed(&FramePair::new(&e1, &e0, 0).unwrap(), 0, &TtcConfig::default()).unwrap();
    assert!(recede.c < 0.0 && recede.ttc < 0.0);
}

#[test]
fn levels_zero_to_two_agree() {
    // a coarser noise lattice keeps the texture well inside the level-2 band
    let seq = generate(&SynthConfig { texture_lattice: 6, ..Default::default() }).unwrap();
    let cfg = TtcConfig::default();
    let per_level: Vec<_> = (0..=2).map(|l| run_sequence(&seq.frames, Mode::Fixed(l), &cfg).unwrap()).collect();
    for i in 0..per_level[0].len() {
        let base = per_level[0][i].ttc;
        for level in &per_level[1..] {
            let rel = (level[i].ttc - base).abs() / base;
            assert!(rel <= 0.10, "frame {i} level {}: {} vs {base}", level[i].level, level[i].ttc);
        }
    }
}

#[test]
fn focus_of_expansion_follows_the_zoom_centre() {
    let texture = convtact::synth::make_texture(128, 96, 4).unwrap();
    let cfg = TtcConfig::default();
    for foe in [(40.0, 50.0), (80.0, 30.0), (64.0, 48.0)] {
        let e1 = zoom_frame(&texture, foe, 1.02).unwrap();
        let est = estimate_fixed(&FramePair::new(&texture, &e1, 0).unwrap(), 0, &cfg).unwrap();
        let (x, y) = est.foe_pixels(128, 96);
        assert!((x - foe.0).abs() < 3.0 && (y - foe.1).abs() < 3.0, "{foe:?} -> ({x}, {y})");
        // m = 1.02 corresponds to ttc = 1 / (1 - 1/m) = 51 frames
        assert!((est.ttc - 51.0).abs() / 51.0 < 0.1, "{}", est.ttc);
    }
}

#[test]
fn sequence_results_in_frame_order() {
    let cfg = SynthConfig { width: 40, height: 32, frames: 9, ..Default::default() };
    let seq = generate(&cfg).unwrap();
    let all = run_sequence(&seq.frames, Mode::Multiscale(2), &TtcConfig::default()).unwrap();
    for (i, est) in all.iter().enumerate() {
        let (e0, e1) = (seq.frames.plane(i).unwrap(), seq.frames.plane(i + 1).unwrap());
        let one = estimate_multiscale(&FramePair::new(&e0, &e1, i).unwrap(), 2, &TtcConfig::default()).unwrap();
        assert_eq!(*est, one);
    }
}
