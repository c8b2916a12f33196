mod common;

use twinsvm::dataset::{self, Dataset};
use twinsvm::estimators::{Algorithm, HyperParams};
use twinsvm::kernels::KernelSpec;
use twinsvm::model::{fit_model, ModelConfig, Scheme};
use twinsvm::persistence::{self, SavedModel};
use twinsvm::TwinSvmError;

fn cases() -> Vec<(Dataset, ModelConfig)> {
    let binary = common::clusters(2, 40, 3, 2.0, 1);
    let multi = common::clusters(4, 25, 3, 3.0, 2);
    let mut out = Vec::new();
    for (ds, schemes) in [(binary, vec![Scheme::Binary]), (multi, vec![Scheme::Ovo, Scheme::Ova])] {
        for scheme in schemes {
            for kernel in [KernelSpec::linear(), KernelSpec::rbf(0.4).with_rect_fraction(0.6)] {
                for algorithm in [Algorithm::Tsvm, Algorithm::Lstsvm] {
                    let cfg = ModelConfig {
                        algorithm,
                        scheme,
                        params: HyperParams::new(0.8, 1.3, kernel),
                    };
                    out.push((ds.clone(), cfg));
                }
            }
        }
    }
    out
}

#[test]
fn reloaded_models_predict_bit_identically() {
    let dir = tempfile::tempdir().unwrap();
    let points = common::normal_matrix(&mut common::rng(5), 100, 3) * 3.0;
    for (i, (ds, cfg)) in cases().into_iter().enumerate() {
        let scaler = (i % 2 == 0).then(|| dataset::fit_scaler(&ds));
        let train = match &scaler {
            Some(s) => dataset::apply_scaler(&ds, s).unwrap(),
            None => ds,
        };
        let saved = SavedModel::new(fit_model(&train, &cfg).unwrap(), scaler);
        let path = dir.path().join(format!("model{i}.json"));
        persistence::save_model(&saved, &path).unwrap();
        let loaded = persistence::load_model(&path).unwrap();
        assert_eq!(loaded, saved, "case {i}");
        assert_eq!(loaded.predict_batch(&points).unwrap(), saved.predict_batch(&points).unwrap());
        let a = saved.predict_scored_batch(&points).unwrap();
        let b = loaded.predict_scored_batch(&points).unwrap();
        for (x, y) in a.iter().zip(&b) {
            assert_eq!(x.first.to_bits(), y.first.to_bits());
            assert_eq!(x.second.to_bits(), y.second.to_bits());
        }
        assert_eq!(persistence::to_json(&loaded), std::fs::read_to_string(&path).unwrap());
    }
}

#[test]
fn damaged_files_are_rejected() {
    let dir = tempfile::tempdir().unwrap();
    let (ds, cfg) = cases().swap_remove(9);
    let saved = SavedModel::new(fit_model(&ds, &cfg).unwrap(), None);
    let text = persistence::to_json(&saved);

    let truncated = dir.path().join("truncated.json");
    std::fs::write(&truncated, &text[..text.len() / 3]).unwrap();
    assert!(matches!(persistence::load_model(&truncated), Err(TwinSvmError::Corrupt(_))));

    let versioned = text.replace("\"format_version\": 1", "\"format_version\": 2");
    assert!(matches!(persistence::from_json(&versioned), Err(TwinSvmError::UnsupportedVersion(2))));

    let relabeled = text.replace("\"feature_count\": 3", "\"feature_count\": 4");
    assert!(matches!(persistence::from_json(&relabeled), Err(TwinSvmError::Corrupt(_))));

    let missing = dir.path().join("absent.json");
    assert!(matches!(persistence::load_model(&missing), Err(TwinSvmError::Io(_))));
}
