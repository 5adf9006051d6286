use clusterkrig_bench::{run_experiment, DatasetSource, ExperimentConfig, Fold, SynthFunction};
use clusterkrig_core::{kfold_split, FitConfig, Flavor};

fn quick(function: SynthFunction, n: usize, d: usize) -> ExperimentConfig {
    let mut c = ExperimentConfig::new(DatasetSource::Synthetic { function, n, d, seed: 3 });
    c.fit = FitConfig { restarts: 1, max_evals: 80, ..FitConfig::default() };
    c.workers = 1;
    c.seed = 11;
    c
}

#[test]
fn two_flavors_three_sweeps_five_folds() {
    let mut c = quick(SynthFunction::Ackley, 150, 2);
    c.flavors = vec![Flavor::Owck, Flavor::Mtck];
    c.clusters = vec![1, 2, 3];
    let rows = run_experiment(&c, |_| {}).unwrap();
    assert_eq!(rows.len(), 36);
    assert_eq!(rows.iter().filter(|r| r.fold == Fold::Mean).count(), 6);
    assert!(rows.iter().all(|r| r.error.is_none()));

    // every mean row is the mean of the five rows before it
    for group in rows.chunks(6) {
        let (folds, mean) = group.split_at(5);
        let m = folds.iter().map(|r| r.r2).sum::<f64>() / 5.0;
        assert!((mean[0].r2 - m).abs() < 1e-12);
        let t = folds.iter().map(|r| r.fit_time_s).sum::<f64>() / 5.0;
        assert!((mean[0].fit_time_s - t).abs() < 1e-12);
    }
}

#[test]
fn sod_with_every_training_row_equals_full() {
    let mut c = quick(SynthFunction::Rosenbrock, 100, 2);
    c.flavors = vec![Flavor::Sod, Flavor::Full];
    // five folds of 100 rows leave 80 for training
    c.subset_sizes = vec![80];
    let rows = run_experiment(&c, |_| {}).unwrap();
    let sod = rows.iter().find(|r| r.flavor == "sod" && r.fold == Fold::Mean).unwrap();
    let full = rows.iter().find(|r| r.flavor == "full" && r.fold == Fold::Mean).unwrap();
    assert!((sod.r2 - full.r2).abs() < 1e-8, "{} vs {}", sod.r2, full.r2);
    assert!((sod.msll - full.msll).abs() < 1e-8);
}

#[test]
fn identical_configs_give_identical_metrics() {
    let mut c = quick(SynthFunction::Himmelblau, 120, 2);
    c.flavors = vec![Flavor::Owfck, Flavor::Gmmck, Flavor::Sod];
    c.clusters = vec![2];
    c.subset_sizes = vec![40];
    let a = run_experiment(&c, |_| {}).unwrap();
    c.workers = 3;
    let b = run_experiment(&c, |_| {}).unwrap();
    assert_eq!(a.len(), b.len());
    for (x, y) in a.iter().zip(&b) {
        assert_eq!((x.r2.to_bits(), x.smse.to_bits(), x.msll.to_bits()), (y.r2.to_bits(), y.smse.to_bits(), y.msll.to_bits()));
    }
}

#[test]
fn rows_stream_out_as_cells_finish() {
    let mut c = quick(SynthFunction::Ackley, 60, 1);
    c.flavors = vec![Flavor::Mtck];
    c.clusters = vec![2];
    let seen = std::sync::Mutex::new(Vec::new());
    let rows = run_experiment(&c, |r| seen.lock().unwrap().push(r.fold)).unwrap();
    let mut seen = seen.into_inner().unwrap();
    seen.sort();
    assert_eq!(seen, (0..5).map(Fold::Index).collect::<Vec<_>>());
    assert_eq!(rows.len(), 6);
}

#[test]
fn folds_are_disjoint_from_training() {
    for (n, k) in [(50, 5), (2000, 5), (123, 7)] {
        let f = kfold_split(n, k, 5).unwrap();
        for fold in 0..k {
            let test: Vec<usize> = (0..n).filter(|&i| f[i] == fold).collect();
            let train: Vec<usize> = (0..n).filter(|&i| f[i] != fold).collect();
            assert!(!test.is_empty());
            assert_eq!(test.len() + train.len(), n);
            assert!(test.iter().all(|i| !train.contains(i)));
        }
    }
}

#[test]
fn csv_source_runs() {
    let data = clusterkrig_bench::synth_dataset(SynthFunction::Diffpow, 80, 3, 1).unwrap();
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("diffpow.csv");
    clusterkrig_bench::write_csv(&path, &data).unwrap();
    let mut c = quick(SynthFunction::Diffpow, 80, 3);
    c.source = DatasetSource::Csv { path, target: "y".into() };
    c.flavors = vec![Flavor::Owck];
    c.clusters = vec![2];
    let rows = run_experiment(&c, |_| {}).unwrap();
    assert_eq!(rows[0].dataset, "diffpow");
    assert!(rows.iter().all(|r| r.r2.is_finite()));
}
