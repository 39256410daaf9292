use scd_core::influence::vectorize;
use scd_core::{cosine_similarity, Corpus, InfluenceProfile};
use scd_eval::{run_with_pairs, WorkflowConfig, DEFAULT_DISSIMILARITY_CAP};

fn toy() -> Corpus {
    let mut c = Corpus::new();
    c.ingest_plaintext(
        "apple pear fruit. apple plum fruit. pear plum sweet. fruit sweet apple.",
        "orchard",
    )
    .unwrap();
    c.ingest_plaintext(
        "car bus road. car train road. bus train fast. road fast car.",
        "traffic",
    )
    .unwrap();
    c
}

/// Every dissimilar pair and every feasible K on the 8-sentence corpus.
/// Fails on pair (0, 6) at K = 6; see the test below.
#[test]
fn toy_corpus_refresh_never_worsens_avg() {
    let c = toy();
    let ws = c.window_ids();
    let v: Vec<_> = ws
        .iter()
        .map(|w| {
            vectorize(
                c.sentence(*w).unwrap(),
                InfluenceProfile::Constant,
                c.vocabulary(),
            )
            .unwrap()
        })
        .collect();
    let mut checked = 0;
    for i in 0..ws.len() {
        for j in i + 1..ws.len() {
            if cosine_similarity(&v[i], &v[j]).unwrap() >= DEFAULT_DISSIMILARITY_CAP {
                continue;
            }
            for k in 2..ws.len() {
                let out =
                    run_with_pairs(&c, &WorkflowConfig::new(k, 0), vec![(ws[i], ws[j])]).unwrap();
                let m = out.metrics;
                assert!(m.avg_rb <= m.avg_fb, "pair ({i}, {j}) K={k}: {m:?}");
                checked += 1;
            }
        }
    }
    assert_eq!(checked, 16 * 6);
}

#[test]
fn distance_vectors_cover_every_sentence() {
    let c = toy();
    let ws = c.window_ids();
    let out = run_with_pairs(&c, &WorkflowConfig::new(3, 0), vec![(ws[0], ws[4])]).unwrap();
    assert_eq!(out.h_fb.len(), 8);
    assert_eq!(out.h_fr.len(), 8);
    assert_eq!(out.h_rb.len(), 8);
    assert!(out.skipped.is_empty());
    assert_ne!(
        out.refreshed.association(ws[0]),
        out.refreshed.association(ws[4])
    );
}

/// Pair (0, 6) at K = 6: refresh leaves fewer differing rows, each further
/// off, so the mean over differing rows rises. Distances in closed form.
#[test]
fn toy_counterexample_values() {
    let c = toy();
    let ws = c.window_ids();
    let out = run_with_pairs(&c, &WorkflowConfig::new(6, 0), vec![(ws[0], ws[6])]).unwrap();
    let parts = |m: &scd_core::ScdModel| -> Vec<Vec<u64>> {
        m.scds()
            .map(|s| s.windows.iter().map(|w| w.0).collect())
            .collect()
    };
    assert_eq!(
        parts(&out.faulty),
        vec![vec![0, 6], vec![1, 3], vec![2], vec![4], vec![5], vec![7]]
    );
    assert_eq!(
        parts(&out.refreshed),
        vec![vec![0, 1, 3], vec![2], vec![4, 6], vec![5], vec![7]]
    );
    assert_eq!(
        parts(&out.baseline),
        vec![vec![0, 1, 3], vec![2], vec![4], vec![5], vec![6], vec![7]]
    );

    let r2 = 2f64.sqrt();
    let r54 = 54f64.sqrt();
    let first = (1.0 - (2.0 * 3f64.sqrt() + 1.0) / r54).sqrt();
    let pair = (1.0 - 2.0 / 3.0 - 2.0 / r54).sqrt();
    let lone = (1.0 - 1.0 / r2).sqrt();
    let moved = ((2.0 - r2) / 3.0).sqrt();
    let fb = [first, pair, 0.0, pair, 0.0, 0.0, lone, 0.0];
    let rb = [0.0, 0.0, 0.0, 0.0, moved, 0.0, moved, 0.0];
    for (got, want) in out.h_fb.iter().zip(fb).chain(out.h_rb.iter().zip(rb)) {
        assert!((got - want).abs() < 1e-12, "{got} vs {want}");
    }
    let m = out.metrics;
    assert!((m.avg_fb - (first + 2.0 * pair + lone) / 4.0).abs() < 1e-12);
    assert!((m.avg_rb - moved).abs() < 1e-12);
    assert!(m.avg_rb > m.avg_fb);
    assert!(m.pd_rb < m.pd_fb);
    assert!(out.h_rb.iter().sum::<f64>() < out.h_fb.iter().sum::<f64>());
}
