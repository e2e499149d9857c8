//! Published human-study figures, rendered next to local results for
//! comparison only. Rows follow `Measure::ALL` order.

use serde::{Deserialize, Serialize};

use super::Measure;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct OmnibusRef {
    pub h: f64,
    /// `None` where only `p < .001` was published.
    pub p: Option<f64>,
    pub eta2: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PairRef {
    pub pair: &'static str,
    pub u: f64,
    pub p: Option<f64>,
    pub p_adj: Option<f64>,
    pub r: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RhoRef {
    pub rho: f64,
    pub p: Option<f64>,
}

/// Condition means and SDs, `[low, medium, high]`.
pub const CONDITION_MEAN_SD: [[(f64, f64); 3]; 6] = [
    [(3.88, 0.91), (4.31, 0.90), (3.82, 1.11)],
    [(4.93, 1.54), (5.67, 1.24), (5.43, 1.29)],
    [(2.82, 1.01), (3.48, 1.02), (3.06, 1.01)],
    [(4.31, 1.62), (5.26, 1.35), (4.58, 1.58)],
    [(5.30, 0.96), (5.79, 0.96), (5.52, 1.02)],
    [(3.81, 0.95), (4.47, 0.72), (3.94, 1.05)],
];

const fn kw(h: f64, p: Option<f64>, eta2: f64) -> OmnibusRef {
    OmnibusRef { h, p, eta2 }
}

pub const CONDITION_KW: [OmnibusRef; 6] = [
    kw(9.317, Some(0.010), 0.049),
    kw(7.703, Some(0.021), 0.038),
    kw(10.812, Some(0.005), 0.059),
    kw(11.019, Some(0.004), 0.061),
    kw(8.393, Some(0.015), 0.043),
    kw(16.635, None, 0.098),
];

const fn pr(pair: &'static str, u: f64, p: Option<f64>, p_adj: Option<f64>, r: f64) -> PairRef {
    PairRef { pair, u, p, p_adj, r }
}

pub const CONDITION_PAIRS: [[PairRef; 3]; 6] = [
    [
        pr("low vs medium", 850.0, Some(0.005), Some(0.016), 0.276),
        pr("low vs high", 1238.0, Some(0.936), Some(1.0), 0.008),
        pr("medium vs high", 1605.5, Some(0.013), Some(0.039), 0.245),
    ],
    [
        pr("low vs medium", 847.0, Some(0.005), Some(0.015), 0.278),
        pr("low vs high", 1010.5, Some(0.098), Some(0.293), 0.165),
        pr("medium vs high", 1387.5, Some(0.338), Some(1.0), 0.095),
    ],
    [
        pr("low vs medium", 789.5, Some(0.002), Some(0.005), 0.317),
        pr("low vs high", 1057.5, Some(0.185), Some(0.554), 0.133),
        pr("medium vs high", 1550.0, Some(0.038), Some(0.115), 0.207),
    ],
    [
        pr("low vs medium", 792.0, Some(0.002), Some(0.005), 0.316),
        pr("low vs high", 1119.0, Some(0.365), Some(1.0), 0.090),
        pr("medium vs high", 1589.5, Some(0.019), Some(0.056), 0.234),
    ],
    [
        pr("low vs medium", 826.5, Some(0.004), Some(0.011), 0.292),
        pr("low vs high", 1063.0, Some(0.198), Some(0.594), 0.129),
        pr("medium vs high", 1472.0, Some(0.126), Some(0.379), 0.153),
    ],
    [
        pr("low vs medium", 700.5, None, None, 0.379),
        pr("low vs high", 1115.5, Some(0.353), Some(1.0), 0.093),
        pr("medium vs high", 1692.0, Some(0.002), Some(0.006), 0.305),
    ],
];

/// Alignment against each measure.
pub const ALIGNMENT_RHO: [f64; 6] = [0.253, 0.234, 0.231, 0.269, 0.288, 0.304];

/// Published alignment summary: mean, SD, min, max.
pub const ALIGNMENT_SUMMARY: (f64, f64, f64, f64) = (0.52, 0.21, 0.0, 0.88);

/// Trait-distance correlations, rows by measure, columns O C E A ES.
pub const DISTANCE_RHO: [[f64; 5]; 6] = [
    [-0.071, -0.231, -0.232, -0.114, -0.222],
    [-0.143, -0.146, -0.147, -0.208, -0.117],
    [-0.078, -0.134, -0.163, -0.133, -0.131],
    [-0.164, -0.090, -0.227, -0.203, -0.166],
    [-0.201, -0.146, -0.202, -0.188, -0.191],
    [-0.126, -0.288, -0.271, -0.121, -0.233],
];

pub const CLUSTER_KW: [OmnibusRef; 6] = [
    kw(9.650, Some(0.008), 0.051),
    kw(6.987, Some(0.030), 0.033),
    kw(8.037, Some(0.018), 0.041),
    kw(11.340, Some(0.003), 0.063),
    kw(14.891, None, 0.087),
    kw(13.357, Some(0.001), 0.076),
];

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ClusterRef {
    pub label: &'static str,
    pub size: usize,
    pub mean_alignment: f64,
}

pub const CLUSTERS: [ClusterRef; 3] = [
    ClusterRef {
        label: "Extraversion-Misaligned",
        size: 39,
        mean_alignment: 0.498,
    },
    ClusterRef {
        label: "Globally-Misaligned",
        size: 49,
        mean_alignment: 0.287,
    },
    ClusterRef {
        label: "Well-Aligned",
        size: 62,
        mean_alignment: 0.717,
    },
];

pub const CLUSTER_SILHOUETTE: f64 = 0.310;

pub fn condition_kw(m: Measure) -> OmnibusRef {
    CONDITION_KW[m.index()]
}

pub fn cluster_kw(m: Measure) -> OmnibusRef {
    CLUSTER_KW[m.index()]
}
