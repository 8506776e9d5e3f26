use actseg_core::corpus::normalize_features;
use actseg_core::eval::Tally;
use actseg_core::gaussian::{
    combine_scores, fit_weighted, posterior_to_loglikelihood, CovarianceMode, GaussianModel,
    PosteriorMatrix, PriorTable, ScoreMatrix,
};
use actseg_core::hmm::{viterbi_align, ActionInventory, ActionModel, SequenceHmm};
use actseg_core::train::linear_init;
use actseg_core::{FeatureSequence, FrameLabeling, LabelId, Segmentation};
use proptest::prelude::*;

/// Boundaries of the uniform split, written out independently.
fn reference_split(frames: usize, sizes: &[usize]) -> Vec<usize> {
    let k = sizes.len() as u64;
    let mut out = Vec::new();
    let mut base = 0;
    for (i, &n) in sizes.iter().enumerate() {
        let lo = (i as u64 * frames as u64 / k) as usize;
        let hi = ((i as u64 + 1) * frames as u64 / k) as usize;
        let len = (hi - lo) as u64;
        for t in 0..len {
            // state j owns [floor(j len / n), floor((j+1) len / n))
            let j = (0..n as u64).rev().find(|j| j * len / n as u64 <= t).unwrap() as usize;
            out.push(base + j);
        }
        base += n;
    }
    out
}

proptest! {
    #[test]
    fn linear_init_follows_floor_rule(
        sizes in prop::collection::vec(1usize..4, 1..5),
        extra in 0usize..40,
    ) {
        let mut inv = ActionInventory::new(sizes.len());
        for (i, &n) in sizes.iter().enumerate() {
            inv.insert(ActionModel::new(LabelId(i), n, 10).unwrap());
        }
        let labels: Vec<LabelId> = (0..sizes.len()).map(LabelId).collect();
        let seq = SequenceHmm::concat(&labels, &inv).unwrap();
        let max_n = *sizes.iter().max().unwrap();
        let frames = max_n * sizes.len() + extra;
        let al = linear_init(frames, &seq).unwrap();
        prop_assert_eq!(&al.states, &reference_split(frames, &sizes));
        prop_assert!(seq.is_admissible(&al.states));
        // the labeling of the split equals the naive uniform labeling
        let classes: Vec<LabelId> = al.states.iter().map(|&s| seq.index().get(s).unwrap().label).collect();
        prop_assert_eq!(classes, FrameLabeling::uniform_split(&labels, frames).unwrap().labels);
    }

    #[test]
    fn iod_at_least_iou(
        pairs in prop::collection::vec(
            (1usize..30).prop_flat_map(|t| (
                prop::collection::vec(0usize..4, t),
                prop::collection::vec(0usize..4, t),
            )),
            1..4,
        )
    ) {
        let ls: Vec<(FrameLabeling, FrameLabeling)> = pairs
            .iter()
            .map(|(g, h)| (
                FrameLabeling::new(g.iter().map(|&x| LabelId(x)).collect()),
                FrameLabeling::new(h.iter().map(|&x| LabelId(x)).collect()),
            ))
            .collect();
        let refs: Vec<(&FrameLabeling, &FrameLabeling)> = ls.iter().map(|(g, h)| (g, h)).collect();
        let tally = Tally::from_pairs(&refs).unwrap();
        for c in tally.per_class.values() {
            if let (Some(iod), Some(iou)) = (c.iod(), c.iou()) {
                prop_assert!(iod >= iou);
            }
        }
        for m in [tally.mof(), tally.moc(), tally.jaccard_iou(), tally.jaccard_iod()] {
            prop_assert!((0.0..=1.0).contains(&m));
        }
        let same: Vec<(&FrameLabeling, &FrameLabeling)> = ls.iter().map(|(g, _)| (g, g)).collect();
        let t = Tally::from_pairs(&same).unwrap();
        prop_assert_eq!((t.mof(), t.moc(), t.jaccard_iou(), t.jaccard_iod()), (1.0, 1.0, 1.0, 1.0));
        // relabeling both sides by a bijection keeps class metrics
        let perm = |l: &FrameLabeling| FrameLabeling::new(l.labels.iter().map(|x| LabelId(3 - x.0)).collect());
        let permuted: Vec<(FrameLabeling, FrameLabeling)> = ls.iter().map(|(g, h)| (perm(g), perm(h))).collect();
        let prefs: Vec<(&FrameLabeling, &FrameLabeling)> = permuted.iter().map(|(g, h)| (g, h)).collect();
        let p = Tally::from_pairs(&prefs).unwrap();
        prop_assert!((p.moc() - tally.moc()).abs() < 1e-12);
        prop_assert!((p.jaccard_iou() - tally.jaccard_iou()).abs() < 1e-12);
        prop_assert!((p.jaccard_iod() - tally.jaccard_iod()).abs() < 1e-12);
    }

    #[test]
    fn posterior_round_trip(
        rows in prop::collection::vec(prop::collection::vec(0.0f64..1.0, 4), 1..6),
        raw_priors in prop::collection::vec(0.05f64..1.0, 4),
    ) {
        let rows: Vec<Vec<f64>> = rows
            .into_iter()
            .map(|r| {
                let s: f64 = r.iter().sum::<f64>() + 1e-3;
                r.iter().map(|v| (v + 2.5e-4) / s).collect()
            })
            .collect();
        let total: f64 = raw_priors.iter().sum();
        let priors = PriorTable::new(raw_priors.iter().map(|p| p / total).collect()).unwrap();
        let post = PosteriorMatrix::new(rows.len(), 4, rows.concat()).unwrap();
        let ll = posterior_to_loglikelihood(&post, &priors).unwrap();
        for (t, row) in rows.iter().enumerate() {
            let back: Vec<f64> = (0..4).map(|s| ll.get(t, s).exp() * priors.as_slice()[s]).collect();
            let z: f64 = back.iter().sum();
            for (b, p) in back.iter().zip(row) {
                prop_assert!((b / z - p).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn combine_is_commutative_and_idempotent(
        a in prop::collection::vec(-30.0f64..0.0, 6),
        b in prop::collection::vec(-30.0f64..0.0, 6),
    ) {
        let ma = ScoreMatrix::new(2, 3, a.clone()).unwrap();
        let mb = ScoreMatrix::new(2, 3, b.clone()).unwrap();
        let ab = combine_scores(&ma, &mb).unwrap();
        prop_assert_eq!(&ab, &combine_scores(&mb, &ma).unwrap());
        prop_assert_eq!(&combine_scores(&ma, &ma).unwrap(), &ma);
        for i in 0..6 {
            let expected = ((a[i].exp() + b[i].exp()) / 2.0).ln();
            prop_assert!((ab.as_slice()[i] - expected).abs() < 1e-12);
        }
    }

    #[test]
    fn uniform_weights_give_unweighted_mle(
        xs in prop::collection::vec(prop::collection::vec(-5.0f64..5.0, 3), 2..12),
        w in 0.1f64..10.0,
    ) {
        let n = xs.len() as f64;
        let g = fit_weighted(xs.iter().map(|x| &x[..]), &vec![w; xs.len()], CovarianceMode::Full, 0.0);
        // a handful of samples can be exactly degenerate; skip those
        let Ok(g) = g else { return Ok(()); };
        for d in 0..3 {
            let mean = xs.iter().map(|x| x[d]).sum::<f64>() / n;
            prop_assert!((g.mean()[d] - mean).abs() < 1e-9);
            for e in 0..3 {
                let me = xs.iter().map(|x| x[e]).sum::<f64>() / n;
                let cov = xs.iter().map(|x| (x[d] - mean) * (x[e] - me)).sum::<f64>() / n;
                prop_assert!((g.covariance()[d * 3 + e] - cov).abs() < 1e-9);
            }
        }
    }

    #[test]
    fn normalization_idempotent(
        rows in prop::collection::vec(prop::collection::vec(-3.0f64..3.0, 3), 1..10),
    ) {
        let mut rows = rows;
        for r in &mut rows { r[2] = 0.0; }
        let seq = FeatureSequence::from_rows("v", &rows).unwrap();
        let once = normalize_features(&seq).unwrap();
        let twice = normalize_features(&once).unwrap();
        for (a, b) in once.as_slice().iter().zip(twice.as_slice()) {
            prop_assert!((a - b).abs() < 1e-12);
        }
        prop_assert!(once.frames().all(|f| f[2] == 0.0));
    }

    #[test]
    fn viterbi_segments_agree_with_states(seed in 0u64..500) {
        let mut inv = ActionInventory::new(3);
        for l in 0..3 { inv.insert(ActionModel::new(LabelId(l), 1 + l, 4).unwrap()); }
        let labels = [LabelId((seed % 3) as usize), LabelId(((seed / 3) % 3) as usize)];
        let seq = SequenceHmm::concat(&labels, &inv).unwrap();
        let frames = seq.n_states() + (seed % 7) as usize;
        let data: Vec<f64> = (0..frames * 6).map(|i| -(((i as u64 * 2654435761 + seed) % 97) as f64) / 10.0).collect();
        let scores = ScoreMatrix::new(frames, 6, data).unwrap();
        let al = viterbi_align(&seq, &scores).unwrap();
        let seg = actseg_core::corpus::segmentation_from_alignment(&al, seq.index()).unwrap();
        let labeling = seg.to_labeling();
        prop_assert_eq!(labeling.len(), frames);
        for (t, &s) in al.states.iter().enumerate() {
            prop_assert_eq!(labeling.labels[t], seq.index().get(s).unwrap().label);
        }
        prop_assert_eq!(seg.segments().len(), 2);
        prop_assert!(Segmentation::new(seg.segments().to_vec()).is_ok());
    }
}

#[test]
fn density_integrates_to_one() {
    for (mean, var) in [(0.0, 1.0), (3.5, 0.25), (-2.0, 9.0)] {
        let g = GaussianModel::isotropic(vec![mean], var, CovarianceMode::Full).unwrap();
        let sigma: f64 = var.sqrt();
        let (a, b) = (mean - 8.0 * sigma, mean + 8.0 * sigma);
        // composite Simpson, 20000 panels
        let n = 20_000;
        let h = (b - a) / n as f64;
        let f = |x: f64| g.log_density(&[x]).unwrap().exp();
        let mut s = f(a) + f(b);
        for i in 1..n {
            s += f(a + i as f64 * h) * if i % 2 == 1 { 4.0 } else { 2.0 };
        }
        let integral = s * h / 3.0;
        assert!((integral - 1.0).abs() < 1e-6, "{integral}");
    }
}
