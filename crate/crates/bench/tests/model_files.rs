use clusterkrig_bench::{synth_dataset, BenchError, Pipeline, SynthFunction};
use clusterkrig_core::{CkConfig, FitConfig, Flavor, Matrix};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

#[test]
fn saved_models_predict_bit_for_bit() {
    let data = synth_dataset(SynthFunction::Himmelblau, 150, 2, 2).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let q: Vec<[f64; 2]> = (0..40).map(|_| [rng.random_range(-6.0..6.0), rng.random_range(-6.0..6.0)]).collect();
    let q = Matrix::from_rows(&q).unwrap();
    let dir = tempfile::tempdir().unwrap();
    for flavor in Flavor::ALL {
        let cfg = CkConfig {
            subset_size: 60,
            fit: FitConfig { restarts: 1, max_evals: 80, ..FitConfig::default() },
            ..CkConfig::new(flavor, 3)
        };
        for standardize in [true, false] {
            let p = Pipeline::fit(&data, &cfg, standardize).unwrap();
            let path = dir.path().join(format!("{flavor}-{standardize}.json"));
            p.save(&path).unwrap();
            let loaded = Pipeline::load(&path).unwrap();
            assert_eq!(loaded, p, "{flavor}");
            let (m0, v0) = p.predict(&q).unwrap();
            let (m1, v1) = loaded.predict(&q).unwrap();
            for i in 0..40 {
                assert_eq!(m0[i].to_bits(), m1[i].to_bits());
                assert_eq!(v0[i].to_bits(), v1[i].to_bits());
            }
        }
    }
}

#[test]
fn version_and_format_are_checked() {
    let data = synth_dataset(SynthFunction::Ackley, 40, 1, 2).unwrap();
    let cfg = CkConfig { fit: FitConfig { restarts: 0, max_evals: 40, ..FitConfig::default() }, ..CkConfig::new(Flavor::Owck, 2) };
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("m.json");
    Pipeline::fit(&data, &cfg, true).unwrap().save(&path).unwrap();
    let text = std::fs::read_to_string(&path).unwrap();

    let bumped = text.replacen("\"version\":1", "\"version\":99", 1);
    std::fs::write(&path, bumped).unwrap();
    let err = Pipeline::load(&path).unwrap_err();
    assert!(matches!(err, BenchError::Format { .. }));
    assert!(err.to_string().contains("version 99"));

    std::fs::write(&path, text.replacen("clusterkrig-model", "something-else", 1)).unwrap();
    assert!(Pipeline::load(&path).is_err());

    std::fs::write(&path, "{not json").unwrap();
    assert!(Pipeline::load(&path).is_err());
}

#[test]
fn query_width_must_match() {
    let data = synth_dataset(SynthFunction::Ackley, 40, 2, 2).unwrap();
    let cfg = CkConfig { fit: FitConfig { restarts: 0, max_evals: 40, ..FitConfig::default() }, ..CkConfig::new(Flavor::Mtck, 2) };
    let p = Pipeline::fit(&data, &cfg, true).unwrap();
    assert!(p.predict(&Matrix::zeros(3, 3)).is_err());
    let raw = Pipeline::fit(&data, &cfg, false).unwrap();
    assert!(raw.predict(&Matrix::zeros(3, 3)).is_err());
}
