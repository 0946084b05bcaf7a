//! Named instances and seeded random instance generators.

use rand::Rng;
use rand_distr::{Distribution, Exp1};

use crate::env::FiniteEnvironment;
use crate::info::DiscreteDist;
use crate::meta::MetaInstance;
use crate::rng::{substream, Role};
use crate::super_task::SuperInstance;

/// Loss `0.5·1[w≠z] + 0.5·1[u≠w]` on binary `U`, `W`, `Z`.
pub fn disagreement_loss() -> Vec<Vec<Vec<f64>>> {
    (0..2)
        .map(|u| {
            (0..2)
                .map(|w| {
                    (0..2).map(|z| 0.5 * f64::from(u8::from(w != z)) + 0.5 * f64::from(u8::from(u != w))).collect()
                })
                .collect()
        })
        .collect()
}

/// Two Bernoulli tasks (0.2 and 0.8) with a uniform task prior.
pub fn bern2_env(m: usize, n: usize) -> FiniteEnvironment {
    let tasks = vec![DiscreteDist::bernoulli(0.2).unwrap(), DiscreteDist::bernoulli(0.8).unwrap()];
    FiniteEnvironment::new(tasks, DiscreteDist::uniform(2).unwrap(), m, n).expect("valid preset")
}

/// The `bern2` meta instance: `m = 2`, `n = 1`, binary spaces, the
/// disagreement loss, `γ = 1` and a uniform prior. Loss range `[0, 1]`.
pub fn bern2() -> MetaInstance {
    bern2_with(2, 1, 1.0)
}

pub fn bern2_with(m: usize, n: usize, gamma: f64) -> MetaInstance {
    let env = bern2_env(m, n);
    let prior = MetaInstance::uniform_prior(&env, 2, 2);
    MetaInstance::new(env, disagreement_loss(), gamma, prior, Some((0.0, 1.0))).expect("valid preset")
}

/// The tiny super-task instance: `m = 1`, the `bern2` tasks, binary
/// spaces, the disagreement loss and uniform priors.
pub fn tiny_super(n: usize, gamma: f64) -> SuperInstance {
    let env = bern2_env(1, n);
    SuperInstance::new(env, disagreement_loss(), gamma, vec![0.25; 4], vec![0.5; 2], Some((0.0, 1.0)))
        .expect("valid preset")
}

fn dirichlet(rng: &mut impl Rng, k: usize) -> Vec<f64> {
    let raw: Vec<f64> = (0..k).map(|_| Exp1.sample(rng)).collect::<Vec<f64>>();
    let s: f64 = raw.iter().sum();
    let mut p: Vec<f64> = raw.iter().map(|v| v / s).collect();
    // put the rounding remainder on the last cell so the sum is 1 to the ulp
    let head: f64 = p[..k - 1].iter().sum();
    p[k - 1] = 1.0 - head;
    p
}

fn random_loss(rng: &mut impl Rng, u: usize, w: usize, z: usize) -> Vec<Vec<Vec<f64>>> {
    (0..u).map(|_| (0..w).map(|_| (0..z).map(|_| rng.random::<f64>()).collect()).collect()).collect()
}

/// Shape of a random meta instance.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct MetaShape {
    pub z: usize,
    pub u: usize,
    pub w: usize,
    pub tasks: usize,
    pub m: usize,
    pub n: usize,
}

/// Draws a shape with `|Z|, |U|, |W|, |T| ∈ {2, 3}`, `m, n ∈ {1, 2}`.
pub fn random_meta_shape(seed: u64, index: u64) -> MetaShape {
    let mut rng = substream(seed, index, Role::Custom(1));
    MetaShape {
        z: rng.random_range(2..=3),
        u: rng.random_range(2..=3),
        w: rng.random_range(2..=3),
        tasks: rng.random_range(2..=3),
        m: rng.random_range(1..=2),
        n: rng.random_range(1..=2),
    }
}

/// Random meta instance with loss in `[0, 1]`. Even indices get a product
/// prior, odd indices an unstructured one.
pub fn random_meta_instance(seed: u64, index: u64, shape: MetaShape, gamma: f64) -> MetaInstance {
    let mut rng = substream(seed, index, Role::Custom(2));
    let tasks = (0..shape.tasks).map(|_| DiscreteDist::from_probs(dirichlet(&mut rng, shape.z)).unwrap()).collect();
    let tp = DiscreteDist::from_probs(dirichlet(&mut rng, shape.tasks)).unwrap();
    let env = FiniteEnvironment::new(tasks, tp, shape.m, shape.n).unwrap();
    let loss = random_loss(&mut rng, shape.u, shape.w, shape.z);
    let prior = if index % 2 == 0 {
        let pu = dirichlet(&mut rng, shape.u);
        let pw = dirichlet(&mut rng, shape.w);
        let p = MetaInstance::product_prior(&env, &pu, &pw);
        let s: f64 = p.iter().sum();
        p.iter().map(|v| v / s).collect()
    } else {
        dirichlet(&mut rng, shape.u * shape.w.pow(shape.m as u32))
    };
    MetaInstance::new(env, loss, gamma, prior, Some((0.0, 1.0))).expect("generated instance is valid")
}

/// Random variant of the tiny super-task instance: same sizes, random task
/// laws, task prior, loss in `[0, 1]`, priors and `γ ∈ [0.5, 4]`.
pub fn random_tiny_super(seed: u64, index: u64, n: usize) -> SuperInstance {
    let mut rng = substream(seed, index, Role::Custom(3));
    let tasks = (0..2).map(|_| DiscreteDist::from_probs(dirichlet(&mut rng, 2)).unwrap()).collect();
    let tp = DiscreteDist::from_probs(dirichlet(&mut rng, 2)).unwrap();
    let env = FiniteEnvironment::new(tasks, tp, 1, n).unwrap();
    let loss = random_loss(&mut rng, 2, 2, 2);
    let prior_train = dirichlet(&mut rng, 4);
    let prior_test = dirichlet(&mut rng, 2);
    let gamma = rng.random_range(0.5..4.0);
    SuperInstance::new(env, loss, gamma, prior_train, prior_test, Some((0.0, 1.0)))
        .expect("generated instance is valid")
}
