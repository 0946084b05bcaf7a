use metagibbs::info::{cond_info, gaussian_channel_info, kl, skl, InfoKind};
use metagibbs::{Axis, DiscreteDist, GaussianChannel, JointDist};
use nalgebra::DMatrix;
use proptest::prelude::*;

/// Strictly positive probability vector of length `k`.
fn simplex(k: usize) -> impl Strategy<Value = Vec<f64>> {
    prop::collection::vec(0.01f64..1.0, k).prop_map(|v| {
        let s: f64 = v.iter().sum();
        let mut p: Vec<f64> = v.iter().map(|x| x / s).collect();
        let head: f64 = p[..p.len() - 1].iter().sum();
        *p.last_mut().unwrap() = 1.0 - head;
        p
    })
}

fn channel(nx: usize, ny: usize) -> impl Strategy<Value = Vec<Vec<f64>>> {
    prop::collection::vec(simplex(ny), nx)
}

fn joint2(nx: usize, ny: usize) -> impl Strategy<Value = (usize, usize, Vec<f64>)> {
    simplex(nx * ny).prop_map(move |t| (nx, ny, t))
}

fn sized_joint() -> impl Strategy<Value = (usize, usize, Vec<f64>)> {
    (2usize..=4, 2usize..=4).prop_flat_map(|(a, b)| joint2(a, b))
}

fn table(nx: usize, ny: usize, t: Vec<f64>) -> JointDist {
    JointDist::new(vec![Axis::indexed("X", nx), Axis::indexed("Y", ny)], t).unwrap()
}

/// I and L by direct summation over the table.
fn oracle(nx: usize, ny: usize, t: &[f64]) -> (f64, f64) {
    let px: Vec<f64> = (0..nx).map(|x| (0..ny).map(|y| t[x * ny + y]).sum()).collect();
    let py: Vec<f64> = (0..ny).map(|y| (0..nx).map(|x| t[x * ny + y]).sum()).collect();
    let (mut i, mut l) = (0.0, 0.0);
    for x in 0..nx {
        for y in 0..ny {
            let p = t[x * ny + y];
            let q = px[x] * py[y];
            i += p * (p / q).ln();
            l += q * (q / p).ln();
        }
    }
    (i, l)
}

fn iskl_of(px: &[f64], ch: &[Vec<f64>]) -> f64 {
    let j = JointDist::from_channel("X", &DiscreteDist::from_probs(px.to_vec()).unwrap(), "Y", ch).unwrap();
    metagibbs::info::skl_info(&j, "X", "Y").unwrap()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(1000))]

    #[test]
    fn measures_are_nonnegative((nx, ny, t) in sized_joint()) {
        let j = table(nx, ny, t);
        let i = metagibbs::info::mutual_info(&j, "X", "Y").unwrap();
        let l = metagibbs::info::lautum_info(&j, "X", "Y").unwrap();
        prop_assert!(i >= -1e-12 && l >= -1e-12);
    }

    #[test]
    fn additivity_and_oracle((nx, ny, t) in sized_joint()) {
        let (oi, ol) = oracle(nx, ny, &t);
        let j = table(nx, ny, t);
        let i = metagibbs::info::mutual_info(&j, "X", "Y").unwrap();
        let l = metagibbs::info::lautum_info(&j, "X", "Y").unwrap();
        let s = metagibbs::info::skl_info(&j, "X", "Y").unwrap();
        prop_assert!((s - (i + l)).abs() <= 1e-12);
        prop_assert!((i - oi).abs() <= 1e-12 && (l - ol).abs() <= 1e-12);
    }

    #[test]
    fn concavity_for_binary_inputs(
        (ch, p0, p1) in (2usize..=4).prop_flat_map(|ny| (channel(2, ny), simplex(2), simplex(2))),
        lambda in 0.0f64..=1.0,
    ) {
        let mix: Vec<f64> = p0.iter().zip(&p1).map(|(a, b)| lambda * a + (1.0 - lambda) * b).collect();
        let lhs = iskl_of(&mix, &ch);
        let rhs = lambda * iskl_of(&p0, &ch) + (1.0 - lambda) * iskl_of(&p1, &ch);
        prop_assert!(lhs - rhs >= -1e-10, "slack {}", lhs - rhs);
    }

    #[test]
    fn conditional_additivity(t in simplex(8)) {
        let j = JointDist::new(
            vec![Axis::indexed("X", 2), Axis::indexed("Y", 2), Axis::indexed("Z", 2)],
            t,
        )
        .unwrap();
        let i = cond_info(&j, "X", "Y", "Z", InfoKind::Mutual).unwrap();
        let l = cond_info(&j, "X", "Y", "Z", InfoKind::Lautum).unwrap();
        let s = cond_info(&j, "X", "Y", "Z", InfoKind::Skl).unwrap();
        prop_assert!(i >= -1e-12 && l >= -1e-12);
        prop_assert!((s - (i + l)).abs() <= 1e-12);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(100))]

    #[test]
    fn skl_symmetry(p in simplex(4), q in simplex(4)) {
        let p = DiscreteDist::from_probs(p).unwrap();
        let q = DiscreteDist::from_probs(q).unwrap();
        let a = skl(&p, &q).unwrap();
        let b = skl(&q, &p).unwrap();
        prop_assert!((a - b).abs() <= 1e-12);
        prop_assert!((a - kl(&p, &q).unwrap() - kl(&q, &p).unwrap()).abs() <= 1e-12);
    }
}

/// With three inputs the mixture inequality can fail.
#[test]
fn concavity_fails_with_three_inputs() {
    let ch = vec![
        vec![0.677991400138861, 0.32200859986113906],
        vec![0.05936187443661074, 0.9406381255633892],
        vec![0.6094682333686257, 0.39053176663137434],
    ];
    let p0 = [0.35408248879224646, 0.010475539700609635, 0.6354419715071439];
    let p1 = [0.43769256796481915, 0.02043977809003351, 0.5418676539451474];
    let lambda = 0.7115643615033257;
    let mix: Vec<f64> = p0.iter().zip(&p1).map(|(a, b)| lambda * a + (1.0 - lambda) * b).collect();
    let slack = iskl_of(&mix, &ch) - (lambda * iskl_of(&p0, &ch) + (1.0 - lambda) * iskl_of(&p1, &ch));
    assert!((slack + 3.5228158798764064e-07).abs() < 1e-12, "slack {slack}");
}

#[test]
fn gaussian_scalar_channel() {
    for (sx, sn) in [(1.0, 1.0), (2.0, 0.5), (0.3, 1.7), (10.0, 0.1)] {
        let ch = GaussianChannel::new(
            DMatrix::from_element(1, 1, 1.0),
            DMatrix::from_element(1, 1, sx * sx),
            DMatrix::from_element(1, 1, sn * sn),
            true,
        )
        .unwrap();
        let info = gaussian_channel_info(&ch).unwrap();
        let snr = (sx * sx) / (sn * sn);
        assert!((info.iskl - snr).abs() <= 1e-10);
        assert!((info.mutual.unwrap() - 0.5 * (1.0 + snr).ln()).abs() <= 1e-10);
        assert!((info.mutual.unwrap() + info.lautum.unwrap() - info.iskl).abs() <= 1e-10);
    }
}
