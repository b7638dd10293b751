use std::f64::consts::PI;

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use routeseg::canvas::polar::{in_range_mask, pixel_center, point_to_pixel};
use routeseg::canvas::*;
use routeseg::fusion::LabeledPose;
use routeseg::simworld::{generate_world, plan_traverse, SimConfig};
use routeseg::{Pose2, TerrainClass};

fn scan(azimuths: usize, bins: usize, res: f32, power: Vec<f32>) -> PolarScan {
    PolarScan::new(azimuths, bins, res, 0.0, Pose2::new(0.0, 0.0, 0.0), power).unwrap()
}

fn entry(x: f64, y: f64, terrain: TerrainClass) -> LabeledPose {
    LabeledPose { timestamp: 0.0, x, y, yaw: 0.0, terrain, confidence: 1.0 }
}

#[test]
fn zero_scan_renders_black() {
    let s = scan(400, 100, 0.5, vec![0.0; 40_000]);
    let img = polar_to_cartesian(&s, 64, 1.6).unwrap();
    assert!(img.image.iter().all(|&v| v == 0.0));
}

#[test]
fn hot_bin_lands_on_the_positive_x_axis() {
    let (a, bins, res) = (400, 200, 0.25f32);
    let r = 120;
    let mut power = vec![0.0; a * bins];
    power[r] = 1.0;
    let s = scan(a, bins, res, power);
    let (size, mpp) = (256, 0.4);
    let img = polar_to_cartesian(&s, size, mpp).unwrap();
    let best = (0..img.image.len()).max_by(|&i, &j| img.image[i].total_cmp(&img.image[j])).unwrap();
    let rho = (r as f64 + 0.5) * f64::from(res);
    let (er, ec) = (size as f64 / 2.0 - 0.5, size as f64 / 2.0 - 0.5 + rho / mpp);
    let (br, bc) = ((best / size) as f64, (best % size) as f64);
    assert!((br - er).abs() <= 1.0 && (bc - ec).abs() <= 1.0, "({}, {}) vs ({}, {})", br, bc, er, ec);
}

#[test]
fn uniform_scan_preserves_energy() {
    let (a, bins, res) = (400, 400, 0.125f32);
    let s = scan(a, bins, res, vec![1.0; a * bins]);
    let (size, mpp) = (256, 0.4);
    let img = polar_to_cartesian(&s, size, mpp).unwrap();
    let r = bins as f64 * f64::from(res);
    // integral of unit power over the disc, using the polar area element
    let dr = f64::from(res);
    let polar: f64 = (0..bins).map(|k| (k as f64 + 0.5) * dr * dr * 2.0 * PI).sum();
    let cart: f64 = img.image.iter().sum::<f64>() * mpp * mpp;
    let ratio = cart / polar;
    assert!((0.8..=1.2).contains(&ratio), "ratio {}", ratio);
    assert!((polar - PI * r * r).abs() < 1e-6 * polar);
}

#[test]
fn scan_frame_round_trip() {
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    for _ in 0..1000 {
        let p = Pose2::new(rng.random_range(-500.0..500.0), rng.random_range(-500.0..500.0), rng.random_range(-PI..PI));
        let (gx, gy) = (rng.random_range(-500.0..500.0), rng.random_range(-500.0..500.0));
        let (lx, ly) = p.to_local(gx, gy);
        let (bx, by) = p.to_global(lx, ly);
        assert!((bx - gx).abs() < 1e-9 && (by - gy).abs() < 1e-9);
    }
    let (r, c) = point_to_pixel(256, 0.4, 3.4, -1.4);
    let (x, y) = pixel_center(256, 0.4, r.round() as usize, c.round() as usize);
    assert!((x - 3.4).abs() < 1e-9 && (y + 1.4).abs() < 1e-9);
}

fn geom() -> ScanGeometry {
    ScanGeometry::for_profile(RadarProfile::Short)
}

#[test]
fn entry_at_the_scan_pose_paints_a_centred_disc() {
    let g = geom();
    let pose = Pose2::new(10.0, 20.0, 0.7);
    let m = paint_labels(pose, g, &[entry(10.0, 20.0, TerrainClass::Gravel)], 1.0).unwrap();
    let n = g.size;
    let painted: Vec<(usize, usize)> = (0..n * n).filter(|&i| m.labels[i] == Label::Path).map(|i| (i / n, i % n)).collect();
    assert!(!painted.is_empty());
    let (sr, sc) = painted.iter().fold((0.0, 0.0), |(a, b), &(r, c)| (a + r as f64, b + c as f64));
    let centre = (n as f64 - 1.0) / 2.0;
    assert!((sr / painted.len() as f64 - centre).abs() < 1e-9);
    assert!((sc / painted.len() as f64 - centre).abs() < 1e-9);
    assert_eq!(m.count(Label::NotPath), 0);
}

#[test]
fn entry_outside_the_scan_paints_nothing() {
    let m = paint_labels(Pose2::new(0.0, 0.0, 0.0), geom(), &[entry(500.0, 0.0, TerrainClass::Gravel)], 2.0).unwrap();
    assert_eq!(m, LabelMask::unlabeled(geom().size));
}

#[test]
fn painted_count_matches_disc_rasterisation() {
    let g = geom();
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    for _ in 0..20 {
        let (x, y) = (rng.random_range(-30.0..30.0), rng.random_range(-30.0..30.0));
        let rho = rng.random_range(0.2..3.0);
        let m = paint_labels(Pose2::new(0.0, 0.0, 0.0), g, &[entry(x, y, TerrainClass::Grass)], rho).unwrap();
        let n = g.size;
        let half = n as f64 / 2.0;
        let mut expected = 0;
        for row in 0..n {
            for col in 0..n {
                let px = (col as f64 + 0.5 - half) * g.metres_per_pixel;
                let py = (half - row as f64 - 0.5) * g.metres_per_pixel;
                expected += usize::from(((px - x).powi(2) + (py - y).powi(2)).sqrt() <= rho);
            }
        }
        assert_eq!(m.count(Label::NotPath), expected);
    }
}

#[test]
fn later_entries_win_and_order_is_irrelevant_elsewhere() {
    let g = geom();
    let pose = Pose2::new(0.0, 0.0, 0.0);
    let conflict = [entry(0.0, 0.0, TerrainClass::Gravel), entry(0.0, 0.0, TerrainClass::Grass)];
    let m = paint_labels(pose, g, &conflict, 1.0).unwrap();
    assert_eq!(m.count(Label::Path), 0);

    let mut rng = ChaCha8Rng::seed_from_u64(4);
    let mut entries: Vec<LabeledPose> = (0..40)
        .map(|i| {
            let t = if i % 3 == 0 { TerrainClass::Gravel } else { TerrainClass::Grass };
            entry(-40.0 + 2.0 * i as f64, rng.random_range(-40.0..40.0), t)
        })
        .collect();
    let base = paint_labels(pose, g, &entries, 0.5).unwrap();
    entries.shuffle(&mut rng);
    assert_eq!(paint_labels(pose, g, &entries, 0.5).unwrap(), base);
}

#[test]
fn rotating_pose_and_trajectory_together_changes_nothing() {
    let g = geom();
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let pose = Pose2::new(50.0, -20.0, 0.0);
    let entries: Vec<LabeledPose> = (0..30)
        .map(|_| entry(50.0 + rng.random_range(-40.0..40.0), -20.0 + rng.random_range(-40.0..40.0), TerrainClass::Gravel))
        .collect();
    let base = paint_labels(pose, g, &entries, 0.7).unwrap();
    for angle in [0.3, -1.2, 2.5] {
        let (s, c) = f64::sin_cos(angle);
        let turned: Vec<LabeledPose> = entries
            .iter()
            .map(|e| {
                let (dx, dy) = (e.x - pose.x, e.y - pose.y);
                entry(pose.x + c * dx - s * dy, pose.y + s * dx + c * dy, e.terrain)
            })
            .collect();
        let p = Pose2::new(pose.x, pose.y, angle);
        assert_eq!(paint_labels(p, g, &turned, 0.7).unwrap(), base);
    }
}

#[test]
fn mask_statistics() {
    let empty = mask_stats(&LabelMask::unlabeled(8));
    assert_eq!((empty.labeled_fraction, empty.path_fraction, empty.path_fraction_defined), (0.0, 0.0, false));
    let full = mask_stats(&LabelMask { size: 4, labels: vec![Label::Path; 16] });
    assert_eq!((full.labeled_fraction, full.path_fraction), (1.0, 1.0));
    assert!(full.path_fraction_defined);
}

#[test]
fn painted_labels_are_sparse_on_a_default_traverse() {
    let cfg = SimConfig::default();
    let map = generate_world(13, &cfg).unwrap();
    let tr = plan_traverse(&map, &cfg, 14).unwrap();
    let entries: Vec<LabeledPose> = tr
        .samples
        .iter()
        .step_by(5)
        .map(|s| LabeledPose { timestamp: s.t, x: s.pose.x, y: s.pose.y, yaw: s.pose.yaw, terrain: s.terrain, confidence: 1.0 })
        .collect();
    let g = geom();
    for k in (0..tr.samples.len()).step_by(400) {
        let m = paint_labels(tr.samples[k].pose, g, &entries, FOOTPRINT_RADIUS.max(0.75 * g.metres_per_pixel)).unwrap();
        let st = mask_stats(&m);
        assert!(st.labeled_fraction > 0.0 && st.labeled_fraction < 0.1, "{}", st.labeled_fraction);
    }
}

#[test]
fn label_grey_levels() {
    for (l, v) in [(Label::Unlabeled, 0u8), (Label::NotPath, 128), (Label::Path, 255)] {
        assert_eq!(l.to_gray(), v);
        assert_eq!(Label::from_gray(v).unwrap(), l);
    }
    assert!(Label::from_gray(7).is_err());
}

#[test]
fn rds_layout_is_byte_exact() {
    let s = PolarScan::new(2, 3, 0.5, 1.25, Pose2::new(1.0, -2.0, 0.5), vec![0.0, 1.0, 2.0, 3.0, 4.0, 0.25]).unwrap();
    let mut bytes = Vec::new();
    write_rds(&mut bytes, &s).unwrap();
    let mut golden = b"RDS1".to_vec();
    golden.extend([2, 0, 0, 0, 3, 0, 0, 0]);
    golden.extend([0x00, 0x00, 0x00, 0x3f]); // 0.5f32
    golden.extend([0, 0, 0, 0, 0, 0, 0xf4, 0x3f]); // 1.25
    golden.extend([0, 0, 0, 0, 0, 0, 0xf0, 0x3f]); // 1.0
    golden.extend([0, 0, 0, 0, 0, 0, 0x00, 0xc0]); // -2.0
    golden.extend([0, 0, 0, 0, 0, 0, 0xe0, 0x3f]); // 0.5
    for v in [0u32, 0x3f80_0000, 0x4000_0000, 0x4040_0000, 0x4080_0000, 0x3e80_0000] {
        golden.extend(v.to_le_bytes());
    }
    assert_eq!(bytes, golden);
    let back = read_rds(&bytes[..]).unwrap();
    assert_eq!(back, s);
    assert!(read_rds(&bytes[..bytes.len() - 1]).is_err());
    assert!(read_rds(&b"RDS2"[..]).is_err());
}

#[test]
fn in_range_pixels_form_a_disc() {
    let m = in_range_mask(64, 1.0, 20.0);
    let inside = m.iter().filter(|&&v| v).count() as f64;
    assert!((inside - PI * 400.0).abs() < 0.05 * PI * 400.0);
}
