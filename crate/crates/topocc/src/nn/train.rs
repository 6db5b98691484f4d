//! Full-batch gradient descent over compiled diagrams, plus the
//! synthetic cycle-vs-clique classification task used by the test
//! suites and the CLI.

use std::collections::HashMap;

use ndarray::Array2;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::cochain::Cochain;
use crate::complex::CombinatorialComplex;
use crate::lifting::{loop_cc, two_clique_cc, Graph};
use crate::nn::diagram::{CompiledDiagram, Mode, ParameterStore};
use crate::nn::NnError;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Loss {
    CrossEntropy,
    Mse,
}

#[derive(Clone, Debug)]
pub struct TrainConfig {
    pub lr: f64,
    pub epochs: usize,
    pub seed: u64,
    pub loss: Loss,
    /// Node whose value feeds the loss (mean-readout for
    /// cross-entropy, direct for mse).
    pub output: String,
}

impl TrainConfig {
    /// Parses a `train` line of the diagram file:
    /// `train lr <f> epochs <n> seed <n> loss <cross-entropy|mse> output <node>`.
    pub fn parse(text: &str) -> Result<Option<TrainConfig>, NnError> {
        for raw in text.lines() {
            let line = raw.split('#').next().unwrap_or("").trim();
            let Some(rest) = line.strip_prefix("train ") else {
                continue;
            };
            let tokens: Vec<&str> = rest.split_whitespace().collect();
            if !tokens.len().is_multiple_of(2) {
                return Err(NnError::Parse("train line needs key-value pairs".into()));
            }
            let mut cfg = TrainConfig {
                lr: 0.01,
                epochs: 100,
                seed: 0,
                loss: Loss::CrossEntropy,
                output: String::new(),
            };
            for pair in tokens.chunks(2) {
                match pair[0] {
                    "lr" => {
                        cfg.lr = pair[1]
                            .parse()
                            .map_err(|_| NnError::Parse("bad lr".into()))?
                    }
                    "epochs" => {
                        cfg.epochs = pair[1]
                            .parse()
                            .map_err(|_| NnError::Parse("bad epochs".into()))?
                    }
                    "seed" => {
                        cfg.seed = pair[1]
                            .parse()
                            .map_err(|_| NnError::Parse("bad seed".into()))?
                    }
                    "loss" => {
                        cfg.loss = match pair[1] {
                            "cross-entropy" | "ce" => Loss::CrossEntropy,
                            "mse" => Loss::Mse,
                            other => {
                                return Err(NnError::Parse(format!("unknown loss `{other}`")))
                            }
                        }
                    }
                    "output" => cfg.output = pair[1].to_string(),
                    other => return Err(NnError::Parse(format!("unknown train key `{other}`"))),
                }
            }
            if cfg.output.is_empty() {
                return Err(NnError::Parse("train line needs `output <node>`".into()));
            }
            return Ok(Some(cfg));
        }
        Ok(None)
    }
}

/// Classification class or regression target for one item.
#[derive(Clone, Debug)]
pub enum Target {
    Class(usize),
    Values(Array2<f64>),
}

/// One training example: a diagram compiled on the item's complex
/// (all items must share one diagram spec so parameter shapes agree),
/// input cochains, and the target.
pub struct DatasetItem {
    pub diagram: CompiledDiagram,
    pub inputs: HashMap<String, Cochain>,
    pub target: Target,
}

#[derive(Default)]
pub struct Dataset {
    pub items: Vec<DatasetItem>,
}

impl Dataset {
    pub fn new(items: Vec<DatasetItem>) -> Self {
        Self { items }
    }

    pub fn len(&self) -> usize {
        self.items.len()
    }

    pub fn is_empty(&self) -> bool {
        self.items.is_empty()
    }
}

#[derive(Clone, Copy, Debug)]
pub struct EpochStats {
    pub loss: f64,
    /// Training accuracy; absent for regression losses.
    pub accuracy: Option<f64>,
}

/// Loss, correctness (classification only), and parameter gradients
/// of one item.
type PassOutcome = (f64, Option<bool>, Vec<Array2<f64>>);

fn item_pass(
    params: &ParameterStore,
    item: &DatasetItem,
    cfg: &TrainConfig,
) -> Result<PassOutcome, NnError> {
    let mut run = item.diagram.forward_with(params, &item.inputs, Mode::Train)?;
    match (&item.target, cfg.loss) {
        (Target::Class(class), Loss::CrossEntropy) => {
            let logits = run.readout_mean(&cfg.output)?;
            let loss_id = run.cross_entropy(logits, *class)?;
            let loss = run.scalar(loss_id)?;
            let out = run
                .value(&cfg.output)
                .ok_or_else(|| NnError::MissingInput(cfg.output.clone()))?;
            let mut mean = vec![0.0; out.dim()];
            for row in out.data().rows() {
                for (c, v) in row.iter().enumerate() {
                    mean[c] += v / out.rows().max(1) as f64;
                }
            }
            let predicted = mean
                .iter()
                .enumerate()
                .max_by(|a, b| a.1.partial_cmp(b.1).unwrap())
                .map(|(i, _)| i)
                .unwrap_or(0);
            let grads = run.backward_scalar(loss_id)?;
            Ok((loss, Some(predicted == *class), grads))
        }
        (Target::Values(values), Loss::Mse) => {
            let loss_id = run.mse(&cfg.output, values)?;
            let loss = run.scalar(loss_id)?;
            let grads = run.backward_scalar(loss_id)?;
            Ok((loss, None, grads))
        }
        _ => Err(NnError::ShapeMismatch(
            "loss kind does not match the target kind".into(),
        )),
    }
}

/// Plain full-batch gradient descent: gradients are accumulated over
/// every item, averaged, and applied once per epoch. Deterministic
/// for a fixed compile seed.
pub fn train(
    params: &mut ParameterStore,
    dataset: &Dataset,
    cfg: &TrainConfig,
) -> Result<Vec<EpochStats>, NnError> {
    assert!(!dataset.is_empty(), "dataset must be non-empty");
    let n = dataset.len() as f64;
    let mut history = Vec::with_capacity(cfg.epochs);
    for _ in 0..cfg.epochs {
        let mut total_loss = 0.0;
        let mut correct = 0usize;
        let mut classified = 0usize;
        let mut acc: Vec<Array2<f64>> = (0..params.len())
            .map(|i| Array2::zeros(params.slot(i).raw_dim()))
            .collect();
        for item in &dataset.items {
            let (loss, was_correct, grads) = item_pass(params, item, cfg)?;
            total_loss += loss;
            if let Some(ok) = was_correct {
                classified += 1;
                if ok {
                    correct += 1;
                }
            }
            for (a, g) in acc.iter_mut().zip(grads) {
                *a += &g;
            }
        }
        for a in &mut acc {
            *a /= n;
        }
        params.set_grads(acc);
        params.step(cfg.lr);
        history.push(EpochStats {
            loss: total_loss / n,
            accuracy: (classified > 0).then(|| correct as f64 / classified as f64),
        });
    }
    Ok(history)
}

/// Evaluates classification accuracy of the current parameters.
pub fn evaluate_accuracy(
    params: &ParameterStore,
    dataset: &Dataset,
    output: &str,
) -> Result<f64, NnError> {
    let mut correct = 0usize;
    for item in &dataset.items {
        let run = item
            .diagram
            .forward_with(params, &item.inputs, Mode::Infer)?;
        let out = run
            .value(output)
            .ok_or_else(|| NnError::MissingInput(output.to_string()))?;
        let mut mean = vec![0.0; out.dim()];
        for row in out.data().rows() {
            for (c, v) in row.iter().enumerate() {
                mean[c] += v / out.rows().max(1) as f64;
            }
        }
        let predicted = mean
            .iter()
            .enumerate()
            .max_by(|a, b| a.1.partial_cmp(b.1).unwrap())
            .map(|(i, _)| i)
            .unwrap_or(0);
        if let Target::Class(class) = item.target {
            if predicted == class {
                correct += 1;
            }
        }
    }
    Ok(correct as f64 / dataset.len() as f64)
}

/// Synthetic binary task: cycle graphs lifted through their single
/// loop against complete graphs lifted through their triangles, with
/// noisy all-ones vertex features. Labels: cycle 0, clique 1.
pub fn cycle_clique_complexes(
    per_class: usize,
    n_min: usize,
    n_max: usize,
    seed: u64,
) -> Vec<(CombinatorialComplex, usize)> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut out = Vec::with_capacity(2 * per_class);
    for _ in 0..per_class {
        let n = rng.random_range(n_min..=n_max);
        let cycle = Graph::cycle(n);
        let cc = loop_cc(&cycle, &[(0..n).collect()]).expect("a cycle is its own loop");
        out.push((cc, 0));
        let n = rng.random_range(n_min..=n_max);
        let cc = two_clique_cc(&Graph::complete(n)).expect("complete graphs lift cleanly");
        out.push((cc, 1));
    }
    out
}

/// All-ones vertex features with uniform noise, the input cochain of
/// the synthetic task.
pub fn noisy_ones(cc: &CombinatorialComplex, dim: usize, noise: f64, rng: &mut ChaCha8Rng) -> Cochain {
    let data = Array2::from_shape_fn((cc.rank_size(0), dim), |_| {
        1.0 + rng.random_range(-noise..noise)
    });
    Cochain::new(0, data)
}

/// Two-channel vertex features `[1 + noise, degree / vertex count]`;
/// the degree channel is what separates structurally different
/// lifts.
pub fn degree_features(cc: &CombinatorialComplex, noise: f64, rng: &mut ChaCha8Rng) -> Cochain {
    let n = cc.vertex_count().max(1) as f64;
    let mut degree = vec![0.0; cc.vertex_count()];
    for edge in cc.cells(1) {
        for &v in edge.vertices() {
            degree[v] += 1.0;
        }
    }
    let data = Array2::from_shape_fn((cc.rank_size(0), 2), |(v, c)| {
        if c == 0 {
            1.0 + rng.random_range(-noise..noise)
        } else {
            degree[v] / n
        }
    });
    Cochain::new(0, data)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::complex::example_cc;
    use crate::nn::diagram::{compile_diagram, DiagramSpec};

    fn simple_items(
        spec: &DiagramSpec,
        cc: &CombinatorialComplex,
        seed: u64,
    ) -> (CompiledDiagram, Dataset) {
        let diagram = compile_diagram(spec, cc, seed).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(17);
        let items = (0..4)
            .map(|i| {
                let inputs: HashMap<String, Cochain> = [(
                    "v".to_string(),
                    noisy_ones(cc, 2, 0.5, &mut rng),
                )]
                .into();
                DatasetItem {
                    diagram: compile_diagram(spec, cc, seed).unwrap(),
                    inputs,
                    target: Target::Class(i % 2),
                }
            })
            .collect();
        (diagram, Dataset::new(items))
    }

    #[test]
    fn zero_learning_rate_keeps_loss_constant() {
        let cc = example_cc();
        let spec = DiagramSpec::parse(
            "node v 0 2\nnode e 1 2\nedge v e B0,1^T conv identity\n",
        )
        .unwrap();
        let (diagram, dataset) = simple_items(&spec, &cc, 3);
        let mut params = diagram.params().clone();
        let cfg = TrainConfig {
            lr: 0.0,
            epochs: 5,
            seed: 3,
            loss: Loss::CrossEntropy,
            output: "e".into(),
        };
        let history = train(&mut params, &dataset, &cfg).unwrap();
        for window in history.windows(2) {
            assert!((window[0].loss - window[1].loss).abs() < 1e-15);
        }
    }

    #[test]
    fn mse_on_linear_diagram_is_non_increasing() {
        let cc = example_cc();
        let spec = DiagramSpec::parse(
            "node v 0 2\nnode e 1 2\nedge v e B0,1^T conv identity\n",
        )
        .unwrap();
        let diagram = compile_diagram(&spec, &cc, 5).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(8);
        let items: Vec<DatasetItem> = (0..3)
            .map(|_| {
                let inputs: HashMap<String, Cochain> =
                    [("v".to_string(), noisy_ones(&cc, 2, 1.0, &mut rng))].into();
                DatasetItem {
                    diagram: compile_diagram(&spec, &cc, 5).unwrap(),
                    inputs,
                    target: Target::Values(Array2::ones((1, 2))),
                }
            })
            .collect();
        let dataset = Dataset::new(items);
        let mut params = diagram.params().clone();
        let cfg = TrainConfig {
            lr: 0.02,
            epochs: 40,
            seed: 5,
            loss: Loss::Mse,
            output: "e".into(),
        };
        let history = train(&mut params, &dataset, &cfg).unwrap();
        for window in history.windows(2) {
            assert!(
                window[1].loss <= window[0].loss + 1e-12,
                "loss must not increase on a convex problem with a small step"
            );
        }
    }

    #[test]
    fn train_config_parse() {
        let cfg = TrainConfig::parse(
            "node v 0 1\ntrain lr 0.05 epochs 20 seed 9 loss mse output v\n",
        )
        .unwrap()
        .unwrap();
        assert_eq!(cfg.lr, 0.05);
        assert_eq!(cfg.epochs, 20);
        assert_eq!(cfg.seed, 9);
        assert_eq!(cfg.loss, Loss::Mse);
        assert_eq!(cfg.output, "v");
        assert!(TrainConfig::parse("node v 0 1\n").unwrap().is_none());
    }

    #[test]
    fn synthetic_task_shapes() {
        let items = cycle_clique_complexes(3, 8, 12, 7);
        assert_eq!(items.len(), 6);
        for (cc, label) in &items {
            assert_eq!(cc.dim(), 2);
            if *label == 0 {
                assert_eq!(cc.rank_size(2), 1);
            } else {
                assert!(cc.rank_size(2) >= 56);
            }
        }
    }
}
