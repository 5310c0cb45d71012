use std::collections::BTreeSet;

use eegwpd::eval::{
    confusion, metrics, misclassified, overlap, read_id_list, text_report, write_id_list, EvalError,
};
use eegwpd::{ClassLabel, ConfusionMatrix};
use proptest::prelude::*;

fn cm(tp: u64, fn_: u64, tn: u64, fp: u64) -> ConfusionMatrix {
    ConfusionMatrix { tp, tn, fp, fn_ }
}

#[test]
fn reference_confusion_counts() {
    let m = metrics(&cm(105, 21, 137, 13)).unwrap();
    assert_eq!(format!("{:.2}/{:.2}/{:.2}", m.accuracy, m.sensitivity, m.specificity), "87.68/83.33/91.33");
    let m = metrics(&cm(102, 24, 137, 13)).unwrap();
    assert_eq!(format!("{:.2}/{:.2}/{:.2}", m.accuracy, m.sensitivity, m.specificity), "86.59/80.95/91.33");
}

#[test]
fn undefined_and_invalid_inputs() {
    assert!(matches!(metrics(&cm(0, 0, 5, 1)), Err(EvalError::UndefinedMetric(_))));
    assert!(matches!(metrics(&cm(3, 1, 0, 0)), Err(EvalError::UndefinedMetric(_))));
    assert!(matches!(metrics(&cm(0, 0, 0, 0)), Err(EvalError::EmptyInput)));
    let y = [ClassLabel::Normal];
    assert!(matches!(confusion(&y, &[0.2, 0.3], 0.5), Err(EvalError::LengthMismatch { .. })));
    for t in [0.0, 1.0, f64::NAN] {
        assert!(matches!(confusion(&y, &[0.2], t), Err(EvalError::InvalidThreshold(_))));
    }
}

#[test]
fn threshold_ties_go_abnormal() {
    let y = [ClassLabel::Abnormal, ClassLabel::Normal];
    let c = confusion(&y, &[0.5, 0.5], 0.5).unwrap();
    assert_eq!((c.tp, c.fp), (1, 1));
}

#[test]
fn id_list_round_trip_and_report_text() {
    let dir = tempfile::tempdir().unwrap();
    let p = dir.path().join("ids.txt");
    let ids: Vec<String> = ["b", "a", "c"].iter().map(|s| s.to_string()).collect();
    write_id_list(&p, &ids).unwrap();
    let back = read_id_list(&p).unwrap();
    assert_eq!(back, ids.iter().cloned().collect::<BTreeSet<_>>());
    let c = cm(105, 21, 137, 13);
    let text = text_report("m", &c, &metrics(&c).unwrap());
    assert!(text.contains("87.68") && text.contains("83.33") && text.contains("91.33"));
}

fn labels_and_probs() -> impl Strategy<Value = (Vec<ClassLabel>, Vec<f64>)> {
    prop::collection::vec((any::<bool>(), 0.0f64..=1.0), 1..200).prop_map(|v| {
        v.into_iter()
            .map(|(b, p)| (if b { ClassLabel::Abnormal } else { ClassLabel::Normal }, p))
            .unzip()
    })
}

fn id_set() -> impl Strategy<Value = BTreeSet<String>> {
    prop::collection::btree_set(0u8..40, 0..30).prop_map(|s| s.into_iter().map(|i| format!("r{i}")).collect())
}

proptest! {
    #[test]
    fn confusion_partitions_the_input((y, p) in labels_and_probs(), t in 0.01f64..0.99) {
        let c = confusion(&y, &p, t).unwrap();
        prop_assert_eq!(c.total() as usize, y.len());
        let pos = y.iter().filter(|&&l| l == ClassLabel::Abnormal).count() as u64;
        prop_assert_eq!(c.positives(), pos);
        let ids: Vec<String> = (0..y.len()).map(|i| i.to_string()).collect();
        prop_assert_eq!(misclassified(&ids, &y, &p, t).len() as u64, c.fp + c.fn_);
        if let Ok(m) = metrics(&c) {
            for v in [m.accuracy, m.sensitivity, m.specificity] {
                prop_assert!((0.0..=100.0).contains(&v));
            }
            let mixed = (m.sensitivity * c.positives() as f64 + m.specificity * c.negatives() as f64)
                / c.total() as f64;
            prop_assert!((mixed - m.accuracy).abs() < 1e-9);
        }
    }

    #[test]
    fn raising_threshold_never_adds_positives((y, p) in labels_and_probs(), a in 0.01f64..0.99, b in 0.01f64..0.99) {
        let (lo, hi) = if a <= b { (a, b) } else { (b, a) };
        let c_lo = confusion(&y, &p, lo).unwrap();
        let c_hi = confusion(&y, &p, hi).unwrap();
        prop_assert!(c_hi.tp <= c_lo.tp && c_hi.fp <= c_lo.fp);
    }

    #[test]
    fn venn_regions_cover_union(a in id_set(), b in id_set(), c in id_set()) {
        let v = overlap(&a, &b, &c);
        let union: BTreeSet<_> = a.iter().chain(&b).chain(&c).collect();
        prop_assert_eq!(v.total(), union.len());
        prop_assert_eq!(v.only_a + v.a_b + v.a_c + v.all, a.len());
        prop_assert_eq!(v.only_b + v.a_b + v.b_c + v.all, b.len());
        prop_assert_eq!(v.only_c + v.a_c + v.b_c + v.all, c.len());
        let w = overlap(&b, &a, &c);
        prop_assert_eq!((w.only_a, w.only_b, w.a_c, w.b_c), (v.only_b, v.only_a, v.b_c, v.a_c));
    }
}
