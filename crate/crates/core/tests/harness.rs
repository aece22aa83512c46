use speakerid_core::harness::{
    prepare_phonetic_material, run_duration_experiment, run_phonetic_experiment, run_phonetic_on_material, CellCoords,
    DurationProtocolConfig, PhoneticProtocolConfig,
};
use speakerid_core::phonetic::PhonemeTaxonomy;
use speakerid_core::synth::{synth_corpus, SynthCorpusConfig};
use speakerid_core::{Error, MeasureKind};

fn corpus(cfg: SynthCorpusConfig) -> speakerid_core::corpus::Corpus {
    synth_corpus(&cfg).unwrap().1
}

#[test]
fn well_separated_speakers_are_always_identified() {
    let c = corpus(SynthCorpusConfig {
        n_speakers: 5,
        separation: 25.0,
        cov_spread: 1.0,
        frames_per_speaker: 2600,
        seed: 2,
        ..Default::default()
    });
    let cfg = DurationProtocolConfig {
        train_seconds: vec![15.0],
        test_seconds: vec![1.0],
        ..Default::default()
    };
    let r = run_duration_experiment(&c, &cfg, 2).unwrap();
    for kind in MeasureKind::ALL {
        let cell = r.duration_cell(1500, 100, kind).unwrap();
        assert_eq!(cell.n_tests, 5 * 11);
        assert_eq!(cell.global_accuracy, Some(100.0), "{kind}");
    }
}

#[test]
fn duration_reports_are_reproducible() {
    let c = corpus(SynthCorpusConfig {
        n_speakers: 6,
        separation: 0.3,
        cov_spread: 0.15,
        frames_per_speaker: 2600,
        seed: 3,
        ..Default::default()
    });
    let cfg = DurationProtocolConfig::default();
    let a = run_duration_experiment(&c, &cfg, 9).unwrap().to_csv();
    let b = run_duration_experiment(&c, &cfg, 9).unwrap().to_csv();
    assert_eq!(a, b);
    assert_eq!(a.lines().count(), 1 + 5 * 5 * 3);
    assert_ne!(a, run_duration_experiment(&c, &cfg, 10).unwrap().to_csv());
}

#[test]
fn test_cap_limits_tests_per_speaker() {
    let c = corpus(SynthCorpusConfig {
        n_speakers: 3,
        frames_per_speaker: 6000,
        seed: 1,
        ..Default::default()
    });
    let cfg = DurationProtocolConfig {
        train_seconds: vec![15.0],
        test_seconds: vec![1.0, 10.0],
        max_tests_per_speaker: 20,
        ..Default::default()
    };
    let r = run_duration_experiment(&c, &cfg, 1).unwrap();
    assert_eq!(r.duration_cell(1500, 100, MeasureKind::MuG).unwrap().n_tests, 60);
    assert_eq!(r.duration_cell(1500, 1000, MeasureKind::MuG).unwrap().n_tests, 12);
}

#[test]
fn short_material_is_rejected() {
    let c = corpus(SynthCorpusConfig {
        n_speakers: 3,
        frames_per_speaker: 1000,
        ..Default::default()
    });
    let err = run_duration_experiment(&c, &DurationProtocolConfig::default(), 0).unwrap_err();
    assert!(matches!(err, Error::InsufficientMaterial { .. }), "{err}");
}

#[test]
fn phonetic_cells_account_for_every_test() {
    let c = corpus(SynthCorpusConfig {
        n_speakers: 4,
        class_spread: 0.4,
        frames_per_speaker: 4000,
        seed: 6,
        ..Default::default()
    });
    let tax = PhonemeTaxonomy::french();
    let mut cfg = PhoneticProtocolConfig::default();
    cfg.selectors.push("ɥ".into());
    let material = prepare_phonetic_material(&c, &cfg, &tax, 6).unwrap();
    let report = run_phonetic_on_material(&material, &cfg, 6).unwrap();
    assert_eq!(report, run_phonetic_experiment(&c, &cfg, &tax, 6).unwrap());
    for sel in &cfg.selectors {
        let assembled: usize = material
            .assemblies
            .iter()
            .filter(|a| &a.selector == sel)
            .map(|a| a.tests.len())
            .sum();
        for kind in MeasureKind::ALL {
            let cell = report
                .cell(&CellCoords::Phonetic { selector: sel.clone() }, kind)
                .unwrap();
            assert_eq!(cell.n_tests, assembled, "{sel}");
            assert_eq!(cell.below_min_tests, assembled < 40);
            assert_eq!(cell.global_accuracy.is_none(), assembled == 0);
        }
    }
    assert!(material
        .assemblies
        .iter()
        .all(|a| a.tests.iter().all(|t| t.len() == 100)));
    assert!(material.train.iter().all(|(_, t)| t.len() == 1500));
}

#[test]
fn unknown_selector_is_a_usage_error() {
    let c = corpus(SynthCorpusConfig {
        n_speakers: 2,
        frames_per_speaker: 2000,
        ..Default::default()
    });
    let cfg = PhoneticProtocolConfig {
        selectors: vec!["Diphthongs".into()],
        ..Default::default()
    };
    let err = run_phonetic_experiment(&c, &cfg, &PhonemeTaxonomy::french(), 0).unwrap_err();
    assert!(matches!(err, Error::UnknownSelector(_)));
    assert!(!err.is_data_error());
}
