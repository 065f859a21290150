use std::collections::HashSet;
use std::path::Path;

use proptest::prelude::*;

use codemix_sarcasm::corpus::{parse_dataset, to_tsv, Dataset, LabeledComment};
use codemix_sarcasm::metrics::{self, confusion, reconstruct, report, round_half_up, ConfusionMatrix, PublishedReport};
use codemix_sarcasm::parse::parse_label;
use codemix_sarcasm::{Label, LanguagePair};

fn label() -> impl Strategy<Value = Label> {
    prop_oneof![Just(Label::NonSarcastic), Just(Label::Sarcastic)]
}

fn pairs(max: usize) -> impl Strategy<Value = Vec<(Label, Label)>> {
    prop::collection::vec((label(), label()), 1..=max)
}

fn dataset() -> impl Strategy<Value = Dataset> {
    let row = ("[a-z0-9_]{1,10}", "\\PC{0,30}", label());
    (prop::collection::vec(row, 0..40), any::<bool>()).prop_map(|(rows, labeled)| {
        let mut seen = HashSet::new();
        let comments = rows
            .into_iter()
            .filter(|(id, text, _)| !text.trim().is_empty() && seen.insert(id.clone()))
            .map(|(id, text, gold)| LabeledComment {
                id,
                text,
                gold: labeled.then_some(gold),
            })
            .collect();
        Dataset {
            language_pair: LanguagePair::MalayalamEnglish,
            comments,
            source_path: "mem.tsv".into(),
            labeled,
        }
    })
}

/// Textbook per-class definitions computed straight from the label lists.
fn naive(gold: &[Label], pred: &[Label]) -> [[f64; 3]; 2] {
    let mut out = [[0.0; 3]; 2];
    for (k, class) in Label::ALL.iter().enumerate() {
        let tp = gold
            .iter()
            .zip(pred)
            .filter(|(g, p)| *g == class && *p == class)
            .count() as f64;
        let predicted = pred.iter().filter(|p| *p == class).count() as f64;
        let actual = gold.iter().filter(|g| *g == class).count() as f64;
        let p = if predicted > 0.0 { tp / predicted } else { 0.0 };
        let r = if actual > 0.0 { tp / actual } else { 0.0 };
        let f = if p + r > 0.0 { 2.0 * p * r / (p + r) } else { 0.0 };
        out[k] = [p, r, f];
    }
    out
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(256))]

    #[test]
    fn dataset_tsv_round_trip(d in dataset()) {
        let text = to_tsv(&d);
        let back = parse_dataset(&text, Path::new("mem.tsv"), LanguagePair::MalayalamEnglish).unwrap();
        prop_assert_eq!(back, d);
    }

    #[test]
    fn matches_textbook_definitions(p in pairs(200)) {
        let (gold, pred): (Vec<Label>, Vec<Label>) = p.into_iter().unzip();
        let r = report(&confusion(&gold, &pred).unwrap()).unwrap();
        let expected = naive(&gold, &pred);
        let n = gold.len() as f64;
        for (k, c) in r.per_class.iter().enumerate() {
            for (got, want) in [c.precision, c.recall, c.f1].iter().zip(expected[k]) {
                prop_assert!((got - want).abs() <= 1e-12);
            }
        }
        let support: [f64; 2] = [r.per_class[0].support as f64, r.per_class[1].support as f64];
        for m in 0..3 {
            let macro_want = (expected[0][m] + expected[1][m]) / 2.0;
            let weighted_want = (support[0] * expected[0][m] + support[1] * expected[1][m]) / n;
            let macro_got = [r.macro_avg.precision, r.macro_avg.recall, r.macro_avg.f1][m];
            let weighted_got = [r.weighted.precision, r.weighted.recall, r.weighted.f1][m];
            prop_assert!((macro_got - macro_want).abs() <= 1e-12);
            prop_assert!((weighted_got - weighted_want).abs() <= 1e-12);
        }
    }

    #[test]
    fn micro_equals_accuracy(p in pairs(200)) {
        let (gold, pred): (Vec<Label>, Vec<Label>) = p.into_iter().unzip();
        let r = report(&confusion(&gold, &pred).unwrap()).unwrap();
        let acc = gold.iter().zip(&pred).filter(|(g, p)| g == p).count() as f64 / gold.len() as f64;
        prop_assert_eq!(r.micro.precision, acc);
        prop_assert_eq!(r.micro.recall, acc);
        prop_assert_eq!(r.micro.f1, acc);
        prop_assert!((r.weighted.recall - acc).abs() <= 1e-12);
    }

    #[test]
    fn permutation_invariant(p in pairs(100), seed in any::<u64>()) {
        let mut shuffled = p.clone();
        let mut rng = seed;
        for i in (1..shuffled.len()).rev() {
            rng = rng.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
            shuffled.swap(i, (rng >> 33) as usize % (i + 1));
        }
        let m = |v: &[(Label, Label)]| {
            let (g, p): (Vec<Label>, Vec<Label>) = v.iter().copied().unzip();
            confusion(&g, &p).unwrap()
        };
        prop_assert_eq!(m(&p), m(&shuffled));
    }

    #[test]
    fn macro_lies_between_class_values(p in pairs(200)) {
        let (gold, pred): (Vec<Label>, Vec<Label>) = p.into_iter().unzip();
        let r = report(&confusion(&gold, &pred).unwrap()).unwrap();
        let [a, b] = [&r.per_class[0], &r.per_class[1]];
        for (m, x, y) in [
            (r.macro_avg.precision, a.precision, b.precision),
            (r.macro_avg.recall, a.recall, b.recall),
            (r.macro_avg.f1, a.f1, b.f1),
        ] {
            prop_assert!(x.min(y) <= m && m <= x.max(y));
            prop_assert!((0.0..=1.0).contains(&m));
        }
    }

    #[test]
    fn reconstruction_contains_truth(nn in 0u64..120, ns in 0u64..120, sn in 0u64..120, ss in 0u64..120) {
        prop_assume!(nn + ns > 0 && sn + ss > 0);
        let m = ConfusionMatrix::from_cells(nn, ns, sn, ss);
        let target = PublishedReport::from_report(&report(&m).unwrap(), 2);
        let found = reconstruct(&target, metrics::DEFAULT_TOLERANCE).unwrap();
        prop_assert!(found.iter().any(|c| c.matrix == m));
    }

    #[test]
    fn parse_label_is_total(s in "\\PC*") {
        let _ = parse_label(&s);
    }

    #[test]
    fn rounding_moves_at_most_half_a_unit(x in 0.0f64..1.0) {
        let r = round_half_up(x, 2);
        prop_assert!((r - x).abs() <= 0.005 + 1e-12);
        prop_assert_eq!(round_half_up(r, 2), r);
    }
}
