use std::f64::consts::PI;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use routeseg::dsp::gammatone::{fast_weights, fft_convolve, gammatone_energies, FastGammatoneConfig};
use routeseg::dsp::stft::power_frames;
use routeseg::dsp::*;

const FS: f64 = 44_100.0;

fn noise(seed: u64, n: usize, sigma: f64) -> Vec<f64> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..n).map(|_| sigma * rng.sample::<f64, _>(StandardNormal)).collect()
}

/// O(N^2) DFT of one windowed frame.
fn direct_dft(frame: &[f64], n: usize) -> Vec<(f64, f64)> {
    (0..n / 2 + 1)
        .map(|k| {
            let mut re = 0.0;
            let mut im = 0.0;
            for (i, &v) in frame.iter().enumerate() {
                let ang = -2.0 * PI * (i * k % n) as f64 / n as f64;
                re += v * ang.cos();
                im += v * ang.sin();
            }
            (re, im)
        })
        .collect()
}

fn pearson(a: &[f64], b: &[f64]) -> f64 {
    let n = a.len() as f64;
    let ma = a.iter().sum::<f64>() / n;
    let mb = b.iter().sum::<f64>() / n;
    let mut sab = 0.0;
    let mut saa = 0.0;
    let mut sbb = 0.0;
    for (x, y) in a.iter().zip(b) {
        sab += (x - ma) * (y - mb);
        saa += (x - ma).powi(2);
        sbb += (y - mb).powi(2);
    }
    sab / (saa * sbb).sqrt()
}

#[test]
fn hamming_examples() {
    let w2 = hamming_window(2).unwrap();
    assert!((w2[0] - 0.08).abs() < 1e-15 && (w2[1] - 0.08).abs() < 1e-15);
    let w3 = hamming_window(3).unwrap();
    assert!((w3[1] - 1.0).abs() < 1e-15 && (w3[2] - 0.08).abs() < 1e-15);
    let w = hamming_window(441).unwrap();
    for n in 0..441 {
        assert!((w[n] - w[440 - n]).abs() < 1e-15);
    }
    assert!(hamming_window(1).is_err());
}

#[test]
fn stft_matches_direct_dft_on_random_signals() {
    let cfg = StftConfig { frame_len: 256, hop: 128, fft_size: 256, window: WindowKind::Hamming };
    let w = hamming_window(256).unwrap();
    let mut worst: f64 = 0.0;
    for seed in 0..100 {
        let x = noise(seed, 1024, 1.0);
        let s = stft(&x, &cfg).unwrap();
        assert_eq!(s.frames.len(), (1024 - 256) / 128 + 1);
        for (t, frame) in s.frames.iter().enumerate() {
            let seg: Vec<f64> = (0..256).map(|n| x[t * 128 + n] * w[n]).collect();
            for (c, (re, im)) in frame.iter().zip(direct_dft(&seg, 256)) {
                worst = worst.max((c.re - re).abs()).max((c.im - im).abs());
            }
        }
    }
    assert!(worst < 1e-9, "max deviation {}", worst);
}

#[test]
fn stft_dc_linearity_and_exact_bin() {
    let rect = StftConfig { frame_len: 64, hop: 64, fft_size: 64, window: WindowKind::Rectangular };
    let s = stft(&vec![0.7; 256], &rect).unwrap();
    for f in &s.frames {
        assert!((f[0].norm() - 0.7 * 64.0).abs() < 1e-9);
        assert!(f[1..].iter().all(|c| c.norm() < 1e-9));
    }
    let x = noise(3, 256, 1.0);
    let a = stft(&x, &rect).unwrap();
    let b = stft(&x.iter().map(|v| 2.0 * v).collect::<Vec<_>>(), &rect).unwrap();
    for (fa, fb) in a.frames.iter().zip(&b.frames) {
        for (ca, cb) in fa.iter().zip(fb) {
            assert!((2.0 * ca - cb).norm() < 1e-12);
        }
    }
    let k0 = 5;
    let tone: Vec<f64> = (0..256).map(|n| (2.0 * PI * k0 as f64 * n as f64 / 64.0).cos()).collect();
    for f in stft(&tone, &rect).unwrap().frames {
        let best = (0..f.len()).max_by(|&i, &j| f[i].norm().total_cmp(&f[j].norm())).unwrap();
        assert_eq!(best, k0);
    }
    assert!(stft(&[0.0; 10], &rect).is_err());
}

#[test]
fn rectangular_frames_satisfy_parseval() {
    let n = 128;
    let rect = StftConfig { frame_len: n, hop: n, fft_size: n, window: WindowKind::Rectangular };
    let x = noise(9, 4 * n, 0.5);
    let s = stft(&x, &rect).unwrap();
    for (t, f) in s.frames.iter().enumerate() {
        let e_time: f64 = x[t * n..(t + 1) * n].iter().map(|v| v * v).sum();
        // Full spectrum from the one-sided half.
        let mut e_freq = f[0].norm_sqr() + f[n / 2].norm_sqr();
        e_freq += 2.0 * f[1..n / 2].iter().map(|c| c.norm_sqr()).sum::<f64>();
        assert!((e_time - e_freq / n as f64).abs() < 1e-9);
    }
}

#[test]
fn log_power_values_and_floor() {
    use rustfft::num_complex::Complex64;
    let s = stft::Stft {
        frames: vec![vec![Complex64::new(1.0, 0.0), Complex64::new(0.0, 10.0), Complex64::new(0.0, 0.0)]],
        fft_size: 4,
    };
    let img = log_power(&s, 4.0, -120.0).unwrap();
    assert_eq!(img.get(0, 0), 0.0);
    assert!((img.get(1, 0) - 20.0).abs() < 1e-12);
    assert_eq!(img.get(2, 0), -120.0);
}

#[test]
fn spectrogram_shape_and_silence() {
    let cfg = StftConfig::default();
    assert_eq!((cfg.frame_len, cfg.hop, cfg.fft_size), (441, 441, 441));
    let img = spectrogram(&noise(1, 22_050, 0.1), FS, &cfg).unwrap();
    assert_eq!((img.channels, img.frames), (221, 50));
    let silent = spectrogram(&vec![0.0; 22_050], FS, &cfg).unwrap();
    assert!(silent.values.iter().all(|&v| v == DEFAULT_FLOOR_DB));
    let again = spectrogram(&noise(1, 22_050, 0.1), FS, &cfg).unwrap();
    assert_eq!(img, again);
}

#[test]
fn mel_spot_values_and_monotonicity() {
    assert_eq!(mel_frequency(0.0).unwrap(), 0.0);
    let m700 = mel_frequency(700.0).unwrap();
    assert!((m700 - 1127.0 * 2f64.ln()).abs() < 1e-12);
    assert!((m700 - 781.17).abs() < 0.01);
    let mut prev = -1.0;
    for f in (0..22050).step_by(50) {
        let m = mel_frequency(f as f64).unwrap();
        assert!(m > prev);
        prev = m;
    }
    assert!(mel_frequency(-1.0).is_err());
}

#[test]
fn mel_filterbank_rows_and_partition() {
    let fb = MelFilterbank::new(64, 441, FS).unwrap();
    for j in 0..64 {
        let row = fb.row(j);
        assert!(row.iter().all(|&w| w >= 0.0));
        assert!(row.iter().sum::<f64>() > 0.0);
    }
    for k in 0..fb.bins {
        let total: f64 = (0..64).map(|j| fb.row(j)[k]).sum();
        assert!(total <= 1.0 + 1e-9, "bin {} weight {}", k, total);
    }
    assert!(MelFilterbank::new(1, 441, FS).is_err());
}

#[test]
fn mel_outputs_match_direct_summation() {
    let cfg = StftConfig::default();
    let x = noise(5, 22_050, 0.2);
    let fb = MelFilterbank::new(64, cfg.fft_size, FS).unwrap();
    let w = hamming_window(441).unwrap();
    let img = mel_spectrogram(&x, FS, &cfg, 64).unwrap();
    assert_eq!((img.channels, img.frames), (64, 50));
    let mut worst: f64 = 0.0;
    for t in [0usize, 17, 49] {
        let seg: Vec<f64> = (0..441).map(|n| x[t * 441 + n] * w[n]).collect();
        let power: Vec<f64> = direct_dft(&seg, 441).iter().map(|(r, i)| r * r + i * i).collect();
        let p_fast = &power_frames(&stft(&x, &cfg).unwrap())[t];
        let fast = fb.apply(p_fast);
        for j in 0..64 {
            let direct: f64 = (0..fb.bins).map(|k| fb.row(j)[k] * power[k]).sum();
            worst = worst.max((fast[j] - direct).abs());
            let db = 10.0 * direct.log10();
            assert!((img.get(j, t) - db).abs() < 1e-9);
        }
    }
    assert!(worst < 1e-9, "max deviation {}", worst);
}

#[test]
fn erb_and_gammatone_spot_values() {
    assert!((erb_bandwidth(0.0).unwrap() - 25.1693).abs() < 1e-12);
    assert!((erb_bandwidth(1000.0).unwrap() - 135.16).abs() < 0.01);
    assert!(erb_bandwidth(-1.0).is_err());
    assert_eq!(gammatone_ir(-0.001, 1000.0, 2, 135.0).unwrap(), 0.0);
    assert_eq!(gammatone_ir(0.0, 1000.0, 2, 135.0).unwrap(), 0.0);
    assert!(gammatone_ir(0.01, 0.0, 2, 25.0).is_err());
    let fb = GammatoneFilterbank::erb_spaced(32, 200.0, 20_000.0, FS).unwrap();
    for (f, b) in fb.center_freqs.iter().zip(&fb.bandwidths) {
        assert_eq!(*b, 1.019 * (f / 9.26449 + 24.7));
    }
    assert!((fb.center_freqs[0] - 200.0).abs() < 1.0);
    assert!(fb.center_freqs.windows(2).all(|w| w[1] > w[0]));
}

#[test]
fn fast_weights_peak_near_centre() {
    let fb = GammatoneFilterbank::erb_spaced(32, 200.0, 20_000.0, FS).unwrap();
    let n = FastGammatoneConfig::for_frame(441).fft_size;
    let df = FS / n as f64;
    for (i, row) in fast_weights(&fb, n).iter().enumerate() {
        assert!(row.iter().all(|&w| w >= 0.0));
        let best = (0..row.len()).max_by(|&a, &b| row[a].total_cmp(&row[b])).unwrap();
        let nearest = (fb.center_freqs[i] / df).round() as usize;
        assert_eq!(best, nearest, "channel {}", i);
    }
}

#[test]
fn fft_convolution_matches_direct_sum() {
    let x = noise(2, 300, 1.0);
    let h = noise(4, 37, 1.0);
    let y = fft_convolve(&x, &h);
    for n in 0..y.len() {
        let mut s = 0.0;
        for k in 0..h.len() {
            if n >= k && n - k < x.len() {
                s += x[n - k] * h[k];
            }
        }
        assert!((y[n] - s).abs() < 1e-10);
    }
}

/// Simpson integral of the unit-gain impulse response squared, in samples.
fn ir_energy_quadrature(fb: &GammatoneFilterbank, i: usize) -> f64 {
    let fc = fb.center_freqs[i];
    let b = fb.bandwidths[i];
    let scale = 1.0 / (FS * fb.response(i, fc).norm());
    let t_end = 40.0 / (2.0 * PI * b);
    let steps = 400_000;
    let h = t_end / steps as f64;
    let f = |t: f64| (gammatone_ir(t, fc, 2, b).unwrap() * scale).powi(2);
    let mut s = f(0.0) + f(t_end);
    for k in 1..steps {
        s += f(k as f64 * h) * if k % 2 == 1 { 4.0 } else { 2.0 };
    }
    s * h / 3.0 * FS
}

#[test]
fn impulse_energy_matches_quadrature() {
    let fb = GammatoneFilterbank::new(vec![300.0, 800.0, 1500.0], FS).unwrap();
    let mut x = vec![0.0; 22_050];
    x[4000] = 1.0;
    let e = gammatone_energies(&x, &fb, 22_050, 22_050).unwrap();
    let sums: Vec<f64> = (0..3).map(|i| e[i][0]).collect();
    for i in 0..3 {
        let direct: f64 = fb.impulse_response(i).unwrap().iter().map(|v| v * v).sum();
        assert!((sums[i] - direct).abs() / direct < 1e-9);
        let quad = ir_energy_quadrature(&fb, i);
        assert!((sums[i] - quad).abs() / quad < 1e-6, "channel {}: {} vs {}", i, sums[i], quad);
    }
}

#[test]
fn tone_excites_its_own_channel() {
    let fb = GammatoneFilterbank::erb_spaced(32, 200.0, 20_000.0, FS).unwrap();
    for &i in &[3usize, 12, 25] {
        let fc = fb.center_freqs[i];
        let x: Vec<f64> = (0..22_050).map(|n| 0.5 * (2.0 * PI * fc * n as f64 / FS).sin()).collect();
        let e = gammatone_energies(&x, &fb, 441, 441).unwrap();
        let totals: Vec<f64> = e.iter().map(|r| r.iter().sum()).collect();
        let best = (0..32).max_by(|&a, &b| totals[a].total_cmp(&totals[b])).unwrap();
        assert_eq!(best, i);
    }
}

#[test]
fn gammatonegram_silence_and_frame_counts() {
    let fb = GammatoneFilterbank::erb_spaced(32, 200.0, 20_000.0, FS).unwrap();
    let cfg = StftConfig::default();
    let silent = vec![0.0; 22_050];
    let d = gammatonegram_direct(&silent, &fb, 441, 441).unwrap();
    assert!(d.values.iter().all(|&v| v == DEFAULT_FLOOR_DB));
    let x = noise(8, 22_050, 0.3);
    let f = gammatonegram_fast(&x, &fb, &cfg).unwrap();
    let s = spectrogram(&x, FS, &cfg).unwrap();
    let m = mel_spectrogram(&x, FS, &cfg, 64).unwrap();
    assert_eq!((d.frames, f.frames, s.frames, m.frames), (50, 50, 50, 50));
    assert_eq!(f, gammatonegram_fast(&x, &fb, &cfg).unwrap());
    assert!(gammatonegram_direct(&x, &fb, 0, 441).is_err());
}

#[test]
fn fast_gammatonegram_correlates_with_direct() {
    let fb = GammatoneFilterbank::erb_spaced(32, 200.0, 20_000.0, FS).unwrap();
    let cfg = StftConfig::default();
    let mut worst: f64 = 1.0;
    for seed in 0..20 {
        let x = noise(100 + seed, 22_050, 0.3);
        let d = gammatonegram_direct(&x, &fb, 441, 441).unwrap();
        let f = gammatonegram_fast(&x, &fb, &cfg).unwrap();
        worst = worst.min(pearson(&d.values, &f.values));
    }
    assert!(worst >= 0.99, "worst Pearson {}", worst);
}
