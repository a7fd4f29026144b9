//! Convolution work counting.
//!
//! Each output element of a convolution layer at (m, r, c) is a sum of
//! `N * K * K` products of weights and input features. A product and its
//! accumulation are counted as two FLOPs, so a layer costs
//! `2 * M * R_out * C_out * N * K^2`.

use alloc::format;
use alloc::string::String;
use alloc::vec::Vec;

use crate::operational::{Phase, ThroughputUnit, WorkloadRecord};
use crate::units::{Joules, Seconds};

/// Backward pass ≈ input-gradient pass + weight-gradient pass, each about the
/// cost of the forward pass.
pub const DEFAULT_TRAINING_MULTIPLIER: u64 = 3;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum WorkloadError {
    #[error("layer {layer}: {field} must be positive")]
    NonPositive { layer: usize, field: &'static str },
    #[error("layer {layer}: {kernel}x{kernel} kernel with padding {padding} does not fit a {rows}x{cols} input")]
    EmptyOutput { layer: usize, kernel: u32, padding: u32, rows: u32, cols: u32 },
    #[error("layers {prev} -> {next}: output {produced} does not match input {expected}")]
    ChainMismatch { prev: usize, next: usize, produced: FeatureShape, expected: FeatureShape },
    #[error("batch size must be positive")]
    ZeroBatch,
    #[error("training multiplier must be positive")]
    ZeroMultiplier,
    #[error("FLOP count overflows u64")]
    Overflow,
    #[error("per-item time needs a GFLOPS-rated record, `{benchmark}` is rated in {unit}")]
    UnitMismatch { benchmark: String, unit: ThroughputUnit },
}

/// Channels × rows × cols of a feature map.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct FeatureShape {
    pub channels: u32,
    pub rows: u32,
    pub cols: u32,
}

impl core::fmt::Display for FeatureShape {
    fn fmt(&self, f: &mut core::fmt::Formatter<'_>) -> core::fmt::Result {
        write!(f, "{}x{}x{}", self.channels, self.rows, self.cols)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ConvLayerSpec {
    pub in_channels: u32,
    pub out_channels: u32,
    /// Square kernel side.
    pub kernel: u32,
    pub rows_in: u32,
    pub cols_in: u32,
    pub stride: u32,
    pub padding: u32,
}

impl ConvLayerSpec {
    pub fn input_shape(&self) -> FeatureShape {
        FeatureShape { channels: self.in_channels, rows: self.rows_in, cols: self.cols_in }
    }

    fn validate(&self, layer: usize) -> Result<(u32, u32), WorkloadError> {
        for (field, v) in [
            ("in_channels", self.in_channels),
            ("out_channels", self.out_channels),
            ("kernel", self.kernel),
            ("rows_in", self.rows_in),
            ("cols_in", self.cols_in),
            ("stride", self.stride),
        ] {
            if v == 0 {
                return Err(WorkloadError::NonPositive { layer, field });
            }
        }
        let out = |extent: u32| {
            let padded = u64::from(extent) + 2 * u64::from(self.padding);
            let k = u64::from(self.kernel);
            (padded >= k).then(|| (padded - k) / u64::from(self.stride) + 1)
        };
        match (out(self.rows_in), out(self.cols_in)) {
            (Some(r), Some(c)) => Ok((r as u32, c as u32)),
            _ => Err(WorkloadError::EmptyOutput {
                layer,
                kernel: self.kernel,
                padding: self.padding,
                rows: self.rows_in,
                cols: self.cols_in,
            }),
        }
    }
}

/// Output rows and columns of a convolution layer.
pub fn conv_output_dims(layer: &ConvLayerSpec) -> Result<(u32, u32), WorkloadError> {
    layer.validate(0)
}

pub fn conv_flops(layer: &ConvLayerSpec) -> Result<u64, WorkloadError> {
    let (rows, cols) = conv_output_dims(layer)?;
    [
        u64::from(layer.out_channels),
        u64::from(rows),
        u64::from(cols),
        u64::from(layer.in_channels),
        u64::from(layer.kernel),
        u64::from(layer.kernel),
    ]
    .iter()
    .try_fold(2u64, |acc, &f| acc.checked_mul(f))
    .ok_or(WorkloadError::Overflow)
}

/// A layer the convolution formula does not cover (pooling, flatten,
/// activation). Its FLOPs are supplied by the user; `output` reshapes the
/// feature map for the next layer, `None` passes it through.
#[derive(Debug, Clone, PartialEq)]
pub struct OpaqueLayer {
    pub tag: String,
    pub flops: Option<u64>,
    pub output: Option<FeatureShape>,
}

#[derive(Debug, Clone, PartialEq)]
pub enum Layer {
    Conv(ConvLayerSpec),
    Opaque(OpaqueLayer),
}

impl Layer {
    fn kind(&self) -> &str {
        match self {
            Layer::Conv(_) => "conv",
            Layer::Opaque(o) => &o.tag,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct NetworkSpec {
    pub name: String,
    layers: Vec<Layer>,
    batch: u32,
    training_multiplier: u64,
}

impl NetworkSpec {
    /// Validates every layer and the shape hand-off between consecutive layers.
    pub fn new(name: impl Into<String>, layers: Vec<Layer>, batch: u32) -> Result<Self, WorkloadError> {
        if batch == 0 {
            return Err(WorkloadError::ZeroBatch);
        }
        let mut current: Option<(usize, FeatureShape)> = None;
        for (idx, layer) in layers.iter().enumerate() {
            match layer {
                Layer::Conv(conv) => {
                    let (rows, cols) = conv.validate(idx)?;
                    if let Some((prev, produced)) = current {
                        if produced != conv.input_shape() {
                            return Err(WorkloadError::ChainMismatch {
                                prev,
                                next: idx,
                                produced,
                                expected: conv.input_shape(),
                            });
                        }
                    }
                    current = Some((idx, FeatureShape { channels: conv.out_channels, rows, cols }));
                }
                Layer::Opaque(op) => {
                    if let Some(shape) = op.output {
                        current = Some((idx, shape));
                    }
                }
            }
        }
        Ok(Self { name: name.into(), layers, batch, training_multiplier: DEFAULT_TRAINING_MULTIPLIER })
    }

    pub fn with_training_multiplier(mut self, multiplier: u64) -> Result<Self, WorkloadError> {
        if multiplier == 0 {
            return Err(WorkloadError::ZeroMultiplier);
        }
        self.training_multiplier = multiplier;
        Ok(self)
    }

    pub fn layers(&self) -> &[Layer] {
        &self.layers
    }
    pub fn batch(&self) -> u32 {
        self.batch
    }
    pub fn training_multiplier(&self) -> u64 {
        self.training_multiplier
    }

    /// Non-convolution layers counted as zero because no FLOPs were given.
    pub fn warnings(&self) -> Vec<String> {
        self.layers
            .iter()
            .enumerate()
            .filter_map(|(i, l)| match l {
                Layer::Opaque(op) if op.flops.is_none() => {
                    Some(format!("{}: layer {i} ({}) has no FLOP count, using 0", self.name, l.kind()))
                }
                _ => None,
            })
            .collect()
    }

    /// Forward FLOPs for one item (no batch factor).
    pub fn forward_flops_per_item(&self) -> Result<u64, WorkloadError> {
        self.layers.iter().try_fold(0u64, |acc, layer| {
            let f = match layer {
                Layer::Conv(conv) => conv_flops(conv)?,
                Layer::Opaque(op) => op.flops.unwrap_or(0),
            };
            acc.checked_add(f).ok_or(WorkloadError::Overflow)
        })
    }
}

/// FLOP totals for a network. Counts are multiply and add separately.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct WorkEstimate {
    pub phase: Phase,
    pub forward_flops: u64,
    pub training_flops: u64,
    /// Totals are for a single item rather than a whole batch.
    pub per_item: bool,
}

impl WorkEstimate {
    pub fn flops(&self) -> u64 {
        match self.phase {
            Phase::Inference => self.forward_flops,
            Phase::Training => self.training_flops,
        }
    }
}

fn estimate(net: &NetworkSpec, phase: Phase, items: u64, per_item: bool) -> Result<WorkEstimate, WorkloadError> {
    let forward = net.forward_flops_per_item()?.checked_mul(items).ok_or(WorkloadError::Overflow)?;
    let training = forward.checked_mul(net.training_multiplier).ok_or(WorkloadError::Overflow)?;
    Ok(WorkEstimate { phase, forward_flops: forward, training_flops: training, per_item })
}

/// Whole-batch FLOPs.
pub fn network_flops(net: &NetworkSpec, phase: Phase) -> Result<WorkEstimate, WorkloadError> {
    estimate(net, phase, u64::from(net.batch), false)
}

pub fn network_flops_per_item(net: &NetworkSpec, phase: Phase) -> Result<WorkEstimate, WorkloadError> {
    estimate(net, phase, 1, true)
}

/// Time and active energy to process `flops` on a GFLOPS-rated record.
pub fn time_and_energy(flops: u64, record: &WorkloadRecord) -> Result<(Seconds, Joules), WorkloadError> {
    let throughput = record.throughput();
    let per_unit = throughput
        .unit
        .flops_per_unit()
        .ok_or_else(|| WorkloadError::UnitMismatch { benchmark: record.benchmark.clone(), unit: throughput.unit })?;
    let time = Seconds(flops as f64 / (throughput.value * per_unit));
    Ok((time, record.power() * time))
}

pub fn time_and_energy_per_item(
    net: &NetworkSpec,
    record: &WorkloadRecord,
    phase: Phase,
) -> Result<(Seconds, Joules), WorkloadError> {
    time_and_energy(network_flops_per_item(net, phase)?.flops(), record)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::operational::Throughput;
    use crate::units::Watts;
    use alloc::vec;

    fn conv(n: u32, m: u32, k: u32, r: u32, c: u32, stride: u32, padding: u32) -> ConvLayerSpec {
        ConvLayerSpec { in_channels: n, out_channels: m, kernel: k, rows_in: r, cols_in: c, stride, padding }
    }

    #[test]
    fn output_dims() {
        assert_eq!(conv_output_dims(&conv(1, 1, 3, 5, 5, 1, 0)).unwrap(), (3, 3));
        assert_eq!(conv_output_dims(&conv(1, 1, 3, 224, 224, 1, 1)).unwrap(), (224, 224));
        assert_eq!(conv_output_dims(&conv(3, 64, 11, 227, 227, 4, 0)).unwrap(), (55, 55));
        assert!(matches!(conv_output_dims(&conv(1, 1, 5, 3, 3, 1, 0)), Err(WorkloadError::EmptyOutput { .. })));
        assert!(matches!(
            conv_output_dims(&conv(1, 1, 3, 5, 5, 0, 0)),
            Err(WorkloadError::NonPositive { field: "stride", .. })
        ));
    }

    #[test]
    fn flops_examples() {
        assert_eq!(conv_flops(&conv(1, 1, 1, 1, 1, 1, 0)).unwrap(), 2);
        // 4x4 output from a 6x6 input with a 3x3 kernel
        assert_eq!(conv_flops(&conv(3, 2, 3, 6, 6, 1, 0)).unwrap(), 1728);
        // AlexNet conv1: 2 * 64 * 55 * 55 * 3 * 121
        assert_eq!(conv_flops(&conv(3, 64, 11, 227, 227, 4, 0)).unwrap(), 140_553_600);
    }

    #[test]
    fn empty_network_is_zero() {
        let net = NetworkSpec::new("empty", vec![], 4).unwrap();
        assert_eq!(network_flops(&net, Phase::Training).unwrap().flops(), 0);
    }

    #[test]
    fn single_layer_times_batch() {
        let l = conv(3, 2, 3, 6, 6, 1, 0);
        let net = NetworkSpec::new("one", vec![Layer::Conv(l)], 8).unwrap();
        let w = network_flops(&net, Phase::Inference).unwrap();
        assert_eq!(w.flops(), 8 * 1728);
        assert_eq!(w.training_flops, 3 * w.forward_flops);
        assert!(!w.per_item);
    }

    #[test]
    fn chain_mismatch_names_the_seam() {
        let a = conv(3, 8, 3, 6, 6, 1, 0);
        let b = conv(8, 4, 3, 5, 5, 1, 0);
        let err = NetworkSpec::new("bad", vec![Layer::Conv(a), Layer::Conv(b)], 1).unwrap_err();
        assert_eq!(
            err,
            WorkloadError::ChainMismatch {
                prev: 0,
                next: 1,
                produced: FeatureShape { channels: 8, rows: 4, cols: 4 },
                expected: FeatureShape { channels: 8, rows: 5, cols: 5 },
            }
        );
    }

    #[test]
    fn opaque_layers_reshape_and_warn() {
        let a = conv(3, 8, 3, 6, 6, 1, 0);
        let pool = Layer::Opaque(OpaqueLayer {
            tag: "pool".into(),
            flops: Some(10),
            output: Some(FeatureShape { channels: 8, rows: 2, cols: 2 }),
        });
        let relu = Layer::Opaque(OpaqueLayer { tag: "relu".into(), flops: None, output: None });
        let b = conv(8, 4, 1, 2, 2, 1, 0);
        let net = NetworkSpec::new("ok", vec![Layer::Conv(a), pool, relu, Layer::Conv(b)], 1).unwrap();
        let expected = conv_flops(&a).unwrap() + 10 + conv_flops(&b).unwrap();
        assert_eq!(network_flops(&net, Phase::Inference).unwrap().flops(), expected);
        let warnings = net.warnings();
        assert_eq!(warnings.len(), 1);
        assert!(warnings[0].contains("relu"));
    }

    #[test]
    fn training_multiplier_is_configurable() {
        let net = NetworkSpec::new("one", vec![Layer::Conv(conv(1, 1, 1, 1, 1, 1, 0))], 1)
            .unwrap()
            .with_training_multiplier(2)
            .unwrap();
        assert_eq!(network_flops(&net, Phase::Training).unwrap().flops(), 4);
        assert!(net.clone().with_training_multiplier(0).is_err());
        assert!(NetworkSpec::new("x", vec![], 0).is_err());
    }

    #[test]
    fn time_and_energy_on_gflops_record() {
        let unit = WorkloadRecord::new("b", "d", Phase::Training, Throughput::gflops(1.0), Watts(1.0)).unwrap();
        assert_eq!(time_and_energy(1_000_000_000, &unit).unwrap(), (Seconds(1.0), Joules(1.0)));
        assert_eq!(time_and_energy(0, &unit).unwrap(), (Seconds(0.0), Joules(0.0)));

        let gpu = WorkloadRecord::new("b", "d", Phase::Training, Throughput::gflops(1335.0), Watts(21.05)).unwrap();
        let (t, e) = time_and_energy(1_000_000_000, &gpu).unwrap();
        assert!((t.value() - 7.490_636_7e-4).abs() < 1e-10);
        assert!((e.value() - 1.576_779e-2).abs() < 1e-7);
    }

    #[test]
    fn fps_records_are_rejected() {
        let ddr3 = WorkloadRecord::new("b", "d", Phase::Inference, Throughput::fps(84.8), Watts(2.0)).unwrap();
        assert!(matches!(time_and_energy(1, &ddr3), Err(WorkloadError::UnitMismatch { .. })));
    }

    #[test]
    fn per_item_excludes_batch() {
        let l = conv(3, 2, 3, 6, 6, 1, 0);
        let net = NetworkSpec::new("one", vec![Layer::Conv(l)], 8).unwrap();
        let w = network_flops_per_item(&net, Phase::Training).unwrap();
        assert_eq!(w.flops(), 3 * 1728);
        assert!(w.per_item);
        let rec = WorkloadRecord::new("b", "d", Phase::Training, Throughput::gflops(1e-6), Watts(2.0)).unwrap();
        let (t, e) = time_and_energy_per_item(&net, &rec, Phase::Training).unwrap();
        assert!((t.value() - 5.184).abs() < 1e-12);
        assert!((e.value() - 10.368).abs() < 1e-12);
    }
}
