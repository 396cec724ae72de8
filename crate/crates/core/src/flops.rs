//! Layer-by-layer cost accounting for convolutional networks.
//!
//! Counting convention: one multiply-accumulate is one FLOP. Convolutions
//! cost `out_h·out_w·out_c·in_c·k²`, fully connected layers `in·out`;
//! batch norm, activations and pooling cost nothing. Parameters are
//! convolution weights (no bias unless requested), two per batch-norm
//! channel, and fully connected weights plus bias.

use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PoolKind {
    Max,
    Avg,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case")]
pub enum LayerKind {
    Conv {
        kernel: usize,
        #[serde(default = "one")]
        stride: usize,
        out: usize,
        #[serde(default)]
        padding: usize,
        #[serde(default)]
        bias: bool,
        /// Expected input channels, checked when present.
        #[serde(default, skip_serializing_if = "Option::is_none")]
        in_channels: Option<usize>,
    },
    Batchnorm,
    Activation,
    Pool {
        kind: PoolKind,
        kernel: usize,
        #[serde(default = "one")]
        stride: usize,
        #[serde(default)]
        padding: usize,
    },
    /// Stage of bottleneck blocks (1×1 reduce, 3×3, 1×1 expand, each with
    /// batch norm); the stride sits on the first block's first 1×1.
    BottleneckStage {
        blocks: usize,
        mid: usize,
        out: usize,
        #[serde(default = "one")]
        stride: usize,
    },
    /// Stage of basic blocks (two 3×3 convolutions with batch norm).
    BasicStage {
        blocks: usize,
        out: usize,
        #[serde(default = "one")]
        stride: usize,
    },
    GlobalPool,
    Fc {
        out: usize,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        in_features: Option<usize>,
    },
}

fn one() -> usize {
    1
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LayerSpec {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub name: Option<String>,
    #[serde(flatten)]
    pub kind: LayerKind,
}

/// Declarative network description; serialized as TOML `.arch` files.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ArchSpec {
    pub name: String,
    /// `[h, w, c]`
    pub input: [usize; 3],
    pub layers: Vec<LayerSpec>,
}

impl ArchSpec {
    pub fn from_toml(s: &str) -> Result<Self> {
        toml::from_str(s).map_err(|e| Error::Config(e.to_string()))
    }

    pub fn to_toml(&self) -> Result<String> {
        toml::to_string(self).map_err(|e| Error::Config(e.to_string()))
    }

    pub fn load(path: &Path) -> Result<Self> {
        let s = std::fs::read_to_string(path)?;
        Self::from_toml(&s).map_err(|e| Error::Config(format!("{}: {e}", path.display())))
    }

    pub fn without_layer(&self, i: usize) -> Self {
        let mut s = self.clone();
        s.layers.remove(i);
        s
    }
}

/// Shape `(h, w, c)`, or a flat feature vector with `h = w = 1`.
pub type Shape = (usize, usize, usize);

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct LayerCost {
    pub name: String,
    pub output: Shape,
    pub macs: u64,
    pub params: u64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CostReport {
    pub name: String,
    pub macs: u64,
    pub params: u64,
    pub layers: Vec<LayerCost>,
}

impl CostReport {
    /// Multiply-accumulates × 10⁻⁹.
    pub fn gflops(&self) -> f64 {
        self.macs as f64 * 1e-9
    }

    /// Counting a multiply and an add separately.
    pub fn gflops_2x(&self) -> f64 {
        2.0 * self.gflops()
    }

    pub fn mparams(&self) -> f64 {
        self.params as f64 * 1e-6
    }
}

struct Counter {
    shape: Shape,
    macs: u64,
    params: u64,
}

impl Counter {
    fn conv(
        &mut self,
        k: usize,
        stride: usize,
        pad: usize,
        out: usize,
        bias: bool,
    ) -> std::result::Result<(), String> {
        let (h, w, c) = self.shape;
        if stride == 0 || k == 0 || out == 0 {
            return Err("kernel, stride and output channels must be positive".into());
        }
        if h + 2 * pad < k || w + 2 * pad < k {
            return Err(format!("kernel {k} larger than padded {h}x{w} input"));
        }
        let (oh, ow) = (
            (h + 2 * pad - k) / stride + 1,
            (w + 2 * pad - k) / stride + 1,
        );
        self.macs += (oh * ow * out * c * k * k) as u64;
        self.params += (c * k * k * out + if bias { out } else { 0 }) as u64;
        self.shape = (oh, ow, out);
        Ok(())
    }

    fn bn(&mut self) {
        self.params += 2 * self.shape.2 as u64;
    }

    fn bottleneck(
        &mut self,
        mid: usize,
        out: usize,
        stride: usize,
    ) -> std::result::Result<(), String> {
        let input = self.shape;
        self.conv(1, stride, 0, mid, false)?;
        self.bn();
        self.conv(3, 1, 1, mid, false)?;
        self.bn();
        self.conv(1, 1, 0, out, false)?;
        self.bn();
        self.shortcut(input, out, stride)
    }

    fn basic(&mut self, out: usize, stride: usize) -> std::result::Result<(), String> {
        let input = self.shape;
        self.conv(3, stride, 1, out, false)?;
        self.bn();
        self.conv(3, 1, 1, out, false)?;
        self.bn();
        self.shortcut(input, out, stride)
    }

    /// Projection shortcut when the block changes shape.
    fn shortcut(
        &mut self,
        input: Shape,
        out: usize,
        stride: usize,
    ) -> std::result::Result<(), String> {
        if stride == 1 && input.2 == out {
            return Ok(());
        }
        let main = self.shape;
        self.shape = input;
        self.conv(1, stride, 0, out, false)?;
        self.bn();
        if self.shape != main {
            return Err(format!(
                "shortcut shape {:?} differs from block output {main:?}",
                self.shape
            ));
        }
        Ok(())
    }
}

fn layer_name(i: usize, l: &LayerSpec) -> String {
    let kind = match l.kind {
        LayerKind::Conv { .. } => "conv",
        LayerKind::Batchnorm => "batchnorm",
        LayerKind::Activation => "activation",
        LayerKind::Pool { .. } => "pool",
        LayerKind::BottleneckStage { .. } => "bottleneck_stage",
        LayerKind::BasicStage { .. } => "basic_stage",
        LayerKind::GlobalPool => "global_pool",
        LayerKind::Fc { .. } => "fc",
    };
    match &l.name {
        Some(n) => format!("{n} ({kind})"),
        None => format!("#{i} ({kind})"),
    }
}

pub fn count_cost(spec: &ArchSpec) -> Result<CostReport> {
    let [h, w, c] = spec.input;
    if h == 0 || w == 0 || c == 0 {
        return Err(Error::Arch {
            layer: 0,
            name: "input".into(),
            reason: "empty input shape".into(),
        });
    }
    let mut ct = Counter {
        shape: (h, w, c),
        macs: 0,
        params: 0,
    };
    let mut layers = Vec::with_capacity(spec.layers.len());
    for (i, l) in spec.layers.iter().enumerate() {
        let name = layer_name(i, l);
        let (m0, p0) = (ct.macs, ct.params);
        let step = match l.kind {
            LayerKind::Conv {
                kernel,
                stride,
                out,
                padding,
                bias,
                in_channels,
            } => match in_channels {
                Some(ic) if ic != ct.shape.2 => Err(format!(
                    "expects {ic} input channels, receives {}",
                    ct.shape.2
                )),
                _ => ct.conv(kernel, stride, padding, out, bias),
            },
            LayerKind::Batchnorm => {
                ct.bn();
                Ok(())
            }
            LayerKind::Activation => Ok(()),
            LayerKind::Pool {
                kernel,
                stride,
                padding,
                ..
            } => {
                let (h, w, c) = ct.shape;
                if stride == 0
                    || kernel == 0
                    || h + 2 * padding < kernel
                    || w + 2 * padding < kernel
                {
                    Err(format!("pool {kernel}/{stride} does not fit {h}x{w}"))
                } else {
                    ct.shape = (
                        (h + 2 * padding - kernel) / stride + 1,
                        (w + 2 * padding - kernel) / stride + 1,
                        c,
                    );
                    Ok(())
                }
            }
            LayerKind::BottleneckStage {
                blocks,
                mid,
                out,
                stride,
            } => (0..blocks)
                .try_for_each(|b| ct.bottleneck(mid, out, if b == 0 { stride } else { 1 })),
            LayerKind::BasicStage {
                blocks,
                out,
                stride,
            } => (0..blocks).try_for_each(|b| ct.basic(out, if b == 0 { stride } else { 1 })),
            LayerKind::GlobalPool => {
                ct.shape = (1, 1, ct.shape.2);
                Ok(())
            }
            LayerKind::Fc { out, in_features } => {
                let n = ct.shape.0 * ct.shape.1 * ct.shape.2;
                match in_features {
                    Some(f) if f != n => Err(format!("expects {f} input features, receives {n}")),
                    _ if out == 0 => Err("no output features".into()),
                    _ => {
                        ct.macs += (n * out) as u64;
                        ct.params += (n * out + out) as u64;
                        ct.shape = (1, 1, out);
                        Ok(())
                    }
                }
            }
        };
        step.map_err(|reason| Error::Arch {
            layer: i,
            name: name.clone(),
            reason,
        })?;
        layers.push(LayerCost {
            name,
            output: ct.shape,
            macs: ct.macs - m0,
            params: ct.params - p0,
        });
    }
    Ok(CostReport {
        name: spec.name.clone(),
        macs: ct.macs,
        params: ct.params,
        layers,
    })
}

/// Average per-frame GFLOPs when a fraction `mix` of processed frames goes
/// through the I-frame network and the rest through the P-frame network.
pub fn average_gflops(i_cost: &CostReport, p_cost: &CostReport, mix: f64) -> Result<f64> {
    if !(0.0..=1.0).contains(&mix) {
        return Err(Error::param(format!(
            "I-frame fraction {mix} outside [0, 1]"
        )));
    }
    Ok(mix * i_cost.gflops() + (1.0 - mix) * p_cost.gflops())
}

/// Least-squares fit of `y = mix·i + (1 − mix)·p` to observed averages;
/// returns `(mix, p)`.
pub fn fit_frame_mix(i_costs: &[f64], averages: &[f64]) -> Result<(f64, f64)> {
    if i_costs.len() != averages.len() || i_costs.len() < 2 {
        return Err(Error::param("need at least two paired observations"));
    }
    let n = i_costs.len() as f64;
    let mi = i_costs.iter().sum::<f64>() / n;
    let my = averages.iter().sum::<f64>() / n;
    let sxx: f64 = i_costs.iter().map(|x| (x - mi) * (x - mi)).sum();
    let sxy: f64 = i_costs
        .iter()
        .zip(averages)
        .map(|(x, y)| (x - mi) * (y - my))
        .sum();
    if sxx == 0.0 {
        return Err(Error::param("I-frame costs are all equal"));
    }
    let mix = sxy / sxx;
    let intercept = my - mix * mi;
    if mix >= 1.0 {
        return Err(Error::param(format!(
            "fitted fraction {mix} leaves no P-frames"
        )));
    }
    Ok((mix, intercept / (1.0 - mix)))
}

/// P-frame cost minimizing squared error at a fixed `mix`.
pub fn fit_p_cost(i_costs: &[f64], averages: &[f64], mix: f64) -> Result<f64> {
    if i_costs.len() != averages.len() || i_costs.is_empty() || !(0.0..1.0).contains(&mix) {
        return Err(Error::param("need paired observations and mix in [0, 1)"));
    }
    let n = i_costs.len() as f64;
    let r: f64 = i_costs
        .iter()
        .zip(averages)
        .map(|(i, y)| y - mix * i)
        .sum::<f64>()
        / n;
    Ok(r / (1.0 - mix))
}
