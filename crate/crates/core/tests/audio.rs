use routeseg::audio::*;
use routeseg::dsp::AudioClip;
use routeseg::simworld::synth_audio;
use routeseg::TerrainClass;

const FS: u32 = 44_100;

fn small_campaign() -> CampaignConfig {
    CampaignConfig { train_seconds: 6.0, test_seconds: 3.0, microphones: 2, session_seconds: 3.0, clip_hop: 0.5 }
}

fn trained(representation: Representation) -> AudioClassifier {
    let cfg = small_campaign();
    let recs = record_campaign(cfg.train_seconds, &cfg, FS, 1).unwrap();
    let ex = FeatureExtractor::new(representation, FS).unwrap();
    let ds = build_dataset(&recs, &ex, cfg.clip_hop, Split::Train).unwrap();
    let train = AudioTrainConfig { epochs: 3, batch_size: 8, learning_rate: 3e-3, seed: 2 };
    train_classifier(&ds, &ClassifierSpec::default(), &train, FS).unwrap().0
}

#[test]
fn clip_counts_follow_duration_and_microphones() {
    let cfg = small_campaign();
    let recs = record_campaign(cfg.train_seconds, &cfg, FS, 3).unwrap();
    let ex = FeatureExtractor::new(Representation::Mel, FS).unwrap();
    let ds = build_dataset(&recs, &ex, cfg.clip_hop, Split::Train).unwrap();
    // seconds / 0.5 s per clip, per microphone
    let per_class = (cfg.train_seconds / 0.5) as usize * cfg.microphones;
    assert_eq!(ds.class_counts(), [per_class; 3]);
    // at full scale: 15 min at 0.5 s is 1800 clips per microphone, 3600 for two
    assert_eq!((15.0 * 60.0 / CLIP_SECONDS) as usize * 2, 3600);
}

#[test]
fn empty_input_is_a_dataset_error() {
    let ex = FeatureExtractor::new(Representation::Mel, FS).unwrap();
    let err = build_dataset(&[], &ex, 0.5, Split::Train).unwrap_err();
    assert!(matches!(err, routeseg::Error::Dataset(_)));
}

#[test]
fn datasets_are_deterministic() {
    let cfg = small_campaign();
    let ex = FeatureExtractor::new(Representation::Spectrogram, FS).unwrap();
    let build = || build_dataset(&record_campaign(3.0, &cfg, FS, 4).unwrap(), &ex, 0.5, Split::Test).unwrap();
    let (a, b) = (build(), build());
    assert_eq!(a.labels, b.labels);
    assert!(a.images.iter().zip(&b.images).all(|(x, y)| x.data() == y.data()));
}

#[test]
fn single_sample_is_fitted() {
    let ex = FeatureExtractor::new(Representation::Mel, FS).unwrap();
    let clip = synth_audio(TerrainClass::Asphalt, 0.5, FS, 9).unwrap();
    let ds = AudioDataset {
        representation: Representation::Mel,
        split: Split::Train,
        images: vec![ex.tensor(&clip).unwrap()],
        labels: vec![TerrainClass::Asphalt],
        skipped: 0,
    };
    let cfg = AudioTrainConfig { epochs: 30, batch_size: 1, learning_rate: 1e-2, seed: 1 };
    let (model, log) = train_classifier(&ds, &ClassifierSpec::default(), &cfg, FS).unwrap();
    assert_eq!(model.classify_image(&ds.images[0]).unwrap(), TerrainClass::Asphalt);
    assert!(log.last().unwrap().loss < 0.05);
}

#[test]
fn stream_predictions_are_centred_and_normalised() {
    let model = trained(Representation::Mel);
    let stream = synth_audio(TerrainClass::Gravel, 10.0, FS, 5).unwrap();
    let preds = model.classify_stream(&stream, 100.0).unwrap();
    assert_eq!(preds.len(), 20);
    for (i, p) in preds.iter().enumerate() {
        assert!((p.timestamp - (100.0 + (i as f64 + 0.5) * 0.5)).abs() < 1e-12);
        assert!((p.probabilities.iter().sum::<f64>() - 1.0).abs() < 1e-9);
    }
    let quiet = AudioClip::new(stream.samples.iter().map(|v| v * 0.5).collect(), FS).unwrap();
    let again = model.classify_stream(&quiet, 100.0).unwrap();
    for (a, b) in preds.iter().zip(&again) {
        assert_eq!(a.terrain, b.terrain);
    }
}

#[test]
fn small_campaign_is_learnable_and_saved_models_agree() {
    for representation in Representation::ALL {
        let model = trained(representation);
        let cfg = small_campaign();
        let test = build_dataset(
            &record_campaign(cfg.test_seconds, &cfg, FS, 99).unwrap(),
            &model.extractor,
            cfg.clip_hop,
            Split::Test,
        )
        .unwrap();
        let eval = evaluate(&model, &test).unwrap();
        assert!(eval.accuracy >= 0.9, "{}: {}", representation.name(), eval.accuracy);

        let (mut w, mut h) = (Vec::new(), Vec::new());
        model.save(&mut w, &mut h).unwrap();
        let back = AudioClassifier::load(&w[..], &h[..]).unwrap();
        for x in &test.images {
            assert_eq!(model.probabilities(x).unwrap(), back.probabilities(x).unwrap());
        }
    }
}

#[test]
fn scoring_of_fixed_predictions() {
    let truth = [TerrainClass::Grass, TerrainClass::Gravel, TerrainClass::Asphalt, TerrainClass::Gravel];
    let all = score_predictions(&truth, &truth).unwrap();
    assert_eq!(all.accuracy, 1.0);
    assert_eq!(all.confusion, [[1, 0, 0], [0, 2, 0], [0, 0, 1]]);
    let shifted: Vec<TerrainClass> =
        truth.iter().map(|t| TerrainClass::from_index((t.index() + 1) % 3).unwrap()).collect();
    let none = score_predictions(&truth, &shifted).unwrap();
    assert_eq!(none.accuracy, 0.0);
    assert_eq!((0..3).map(|i| none.confusion[i][i]).sum::<u64>(), 0);
    assert!(score_predictions(&truth, &shifted[..2]).is_err());
}

#[test]
fn representation_names_round_trip() {
    for r in Representation::ALL {
        assert_eq!(Representation::parse(r.name()).unwrap(), r);
    }
    assert!(Representation::parse("mfcc").is_err());
}
