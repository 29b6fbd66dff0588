//! Published benchmark values used by the validation suite and the
//! `reproduce` command: the depression and epilepsy trial datasets, their
//! test results, and the three planning tables (T4: binary planning, T5:
//! binary sample-size precision with exact power, T6: Poisson planning).
//!
//! Values marked `derived` replace printed cells that are inconsistent with
//! their own row under the planning formulas (the recomputed values were
//! cross-checked against independent high-precision solvers); the `reproduce`
//! diff reports both.

use crate::data::{GroupData, SufficientStat};

/// Three-armed depression trial, binary remission endpoint
/// (placebo 26/88, reference 31/84, test 43/86).
pub fn depression_trial() -> GroupData {
    GroupData::new(
        SufficientStat::from_count(86, 43).expect("static data"),
        SufficientStat::from_count(84, 31).expect("static data"),
        SufficientStat::from_count(88, 26).expect("static data"),
    )
}

/// Three-armed epilepsy trial, Poisson seizure counts
/// (placebo 338/18, reference 295/18, test 288/18).
pub fn epilepsy_trial() -> GroupData {
    GroupData::new(
        SufficientStat::from_count(18, 288).expect("static data"),
        SufficientStat::from_count(18, 295).expect("static data"),
        SufficientStat::from_count(18, 338).expect("static data"),
    )
}

/// Published test results for the two worked examples.
pub struct WorkedExample {
    pub delta: f64,
    pub t_restricted: f64,
    pub t_unrestricted: f64,
    pub p_restricted_pct: f64,
    pub p_unrestricted_pct: f64,
}

pub const DEPRESSION_RESULT: WorkedExample = WorkedExample {
    delta: 0.8,
    t_restricted: 2.104,
    t_unrestricted: 2.108,
    p_restricted_pct: 1.77,
    p_unrestricted_pct: 1.75,
};

pub const EPILEPSY_RESULT: WorkedExample = WorkedExample {
    delta: 0.5,
    t_restricted: 1.328,
    t_unrestricted: 1.349,
    p_restricted_pct: 9.21,
    p_unrestricted_pct: 8.86,
};

/// One allocation block of a T4 row: the printed sigma_0/sigma_RML column and
/// the four sample sizes (n_0.7 restricted, n_0.7 unrestricted, n_0.8
/// restricted, n_0.8 unrestricted).
pub struct T4Block {
    /// Printed variance-ratio column; the published table tabulates
    /// sigma_0 / sigma_RML (its sample sizes pin that orientation).
    pub sigma0_over_srml: f64,
    /// Formula-consistent replacement when the printed cell contradicts the
    /// row's own sample sizes.
    pub sigma0_over_srml_derived: Option<f64>,
    pub n: [u32; 4],
}

/// Row of the binary planning table (delta = 0.7, alpha = 5%, common
/// alternative pi_T = pi_R).
pub struct T4Row {
    pub pi_p: f64,
    pub pi_t: f64,
    /// Printed optimal weights (w_T*, w_R*, w_P*).
    pub weights: [f64; 3],
    pub optimal: T4Block,
    pub two_two_one: T4Block,
}

pub const T4_DELTA: f64 = 0.7;
pub const T4_ALPHA: f64 = 0.05;

#[allow(clippy::approx_constant)] // published table digits
pub const TABLE4: [T4Row; 12] = [
    T4Row {
        pi_p: 0.1,
        pi_t: 0.3,
        weights: [0.527, 0.369, 0.104],
        optimal: T4Block {
            sigma0_over_srml: 0.994,
            sigma0_over_srml_derived: None,
            n: [997, 988, 1308, 1297],
        },
        two_two_one: T4Block {
            sigma0_over_srml: 1.014,
            sigma0_over_srml_derived: None,
            n: [1054, 1076, 1388, 1414],
        },
    },
    T4Row {
        pi_p: 0.1,
        pi_t: 0.5,
        weights: [0.532, 0.372, 0.096],
        optimal: T4Block {
            sigma0_over_srml: 0.986,
            sigma0_over_srml_derived: None,
            n: [296, 289, 387, 380],
        },
        two_two_one: T4Block {
            sigma0_over_srml: 1.006,
            sigma0_over_srml_derived: None,
            n: [315, 318, 415, 418],
        },
    },
    T4Row {
        pi_p: 0.1,
        pi_t: 0.7,
        weights: [0.527, 0.369, 0.104],
        optimal: T4Block {
            sigma0_over_srml: 0.955,
            sigma0_over_srml_derived: None,
            n: [118, 110, 154, 145],
        },
        two_two_one: T4Block {
            sigma0_over_srml: 0.965,
            sigma0_over_srml_derived: None,
            n: [127, 120, 165, 158],
        },
    },
    T4Row {
        pi_p: 0.1,
        pi_t: 0.9,
        weights: [0.500, 0.350, 0.150],
        optimal: T4Block {
            sigma0_over_srml: 0.791,
            sigma0_over_srml_derived: None,
            n: [43, 30, 54, 39],
        },
        two_two_one: T4Block {
            sigma0_over_srml: 0.759,
            sigma0_over_srml_derived: None,
            n: [48, 31, 60, 41],
        },
    },
    T4Row {
        pi_p: 0.3,
        pi_t: 0.5,
        weights: [0.506, 0.354, 0.139],
        optimal: T4Block {
            sigma0_over_srml: 0.998,
            sigma0_over_srml_derived: None,
            n: [1279, 1275, 1680, 1675],
        },
        two_two_one: T4Block {
            // Printed 1.012 contradicts the printed sizes 1761/1762, which
            // pin the ratio at 1.000; asserted against the derived value.
            sigma0_over_srml: 1.012,
            sigma0_over_srml_derived: Some(1.0004),
            n: [1341, 1341, 1761, 1762],
        },
    },
    T4Row {
        pi_p: 0.3,
        pi_t: 0.7,
        weights: [0.500, 0.350, 0.150],
        optimal: T4Block {
            sigma0_over_srml: 0.986,
            sigma0_over_srml_derived: None,
            n: [281, 275, 368, 361],
        },
        two_two_one: T4Block {
            sigma0_over_srml: 0.975,
            sigma0_over_srml_derived: None,
            n: [298, 287, 390, 377],
        },
    },
    T4Row {
        pi_p: 0.3,
        pi_t: 0.9,
        weights: [0.463, 0.324, 0.212],
        optimal: T4Block {
            sigma0_over_srml: 0.867,
            sigma0_over_srml_derived: None,
            n: [76, 61, 98, 81],
        },
        two_two_one: T4Block {
            sigma0_over_srml: 0.830,
            sigma0_over_srml_derived: None,
            n: [84, 63, 106, 83],
        },
    },
    T4Row {
        pi_p: 0.5,
        pi_t: 0.7,
        weights: [0.493, 0.345, 0.161],
        optimal: T4Block {
            sigma0_over_srml: 0.997,
            sigma0_over_srml_derived: None,
            n: [1134, 1129, 1489, 1483],
        },
        two_two_one: T4Block {
            sigma0_over_srml: 0.988,
            sigma0_over_srml_derived: None,
            n: [1191, 1170, 1561, 1537],
        },
    },
    T4Row {
        pi_p: 0.5,
        pi_t: 0.9,
        weights: [0.455, 0.318, 0.227],
        optimal: T4Block {
            sigma0_over_srml: 0.924,
            sigma0_over_srml_derived: None,
            n: [161, 143, 209, 188],
        },
        two_two_one: T4Block {
            sigma0_over_srml: 0.894,
            sigma0_over_srml_derived: None,
            n: [174, 147, 224, 193],
        },
    },
    T4Row {
        pi_p: 0.7,
        pi_t: 0.8,
        weights: [0.489, 0.343, 0.168],
        optimal: T4Block {
            sigma0_over_srml: 0.998,
            sigma0_over_srml_derived: None,
            n: [3505, 3495, 4603, 4591],
        },
        two_two_one: T4Block {
            sigma0_over_srml: 0.989,
            sigma0_over_srml_derived: None,
            n: [3672, 3611, 4814, 4744],
        },
    },
    T4Row {
        pi_p: 0.7,
        pi_t: 0.9,
        weights: [0.463, 0.324, 0.212],
        optimal: T4Block {
            sigma0_over_srml: 0.974,
            sigma0_over_srml_derived: None,
            n: [571, 549, 746, 721],
        },
        two_two_one: T4Block {
            sigma0_over_srml: 0.949,
            sigma0_over_srml_derived: None,
            n: [609, 562, 792, 739],
        },
    },
    T4Row {
        pi_p: 0.8,
        pi_t: 0.9,
        weights: [0.476, 0.333, 0.190],
        optimal: T4Block {
            sigma0_over_srml: 0.992,
            sigma0_over_srml_derived: None,
            n: [2101, 2076, 2756, 2727],
        },
        two_two_one: T4Block {
            sigma0_over_srml: 0.975,
            sigma0_over_srml_derived: None,
            n: [2214, 2130, 2895, 2798],
        },
    },
];

/// Row of the binary sample-size precision table (alpha = 2.5%, power 80%,
/// restricted variance, common alternative pi_T = pi_R). The prior-method
/// columns are context from the earlier binary-endpoint formula.
pub struct T5Row {
    /// Allocation ratio n_T : n_R : n_P.
    pub alloc: [f64; 3],
    pub delta: f64,
    pub pi_p: f64,
    pub pi_r: f64,
    pub prior_n: u32,
    pub prior_power_pct: f64,
    pub n: u32,
    /// Formula-consistent n when the printed one deviates beyond rounding.
    pub n_derived: Option<u32>,
    pub exact_power_pct: f64,
}

pub const T5_ALPHA: f64 = 0.025;
pub const T5_POWER: f64 = 0.8;

const A111: [f64; 3] = [1.0, 1.0, 1.0];
const A221: [f64; 3] = [2.0, 2.0, 1.0];
const A321: [f64; 3] = [3.0, 2.0, 1.0];

#[rustfmt::skip]
pub const TABLE5: [T5Row; 30] = [
    T5Row { alloc: A111, delta: 0.6, pi_p: 0.1, pi_r: 0.5, prior_n: 309, prior_power_pct: 78.94, n: 319, n_derived: None, exact_power_pct: 80.08 },
    T5Row { alloc: A111, delta: 0.6, pi_p: 0.1, pi_r: 0.7, prior_n: 135, prior_power_pct: 81.51, n: 132, n_derived: None, exact_power_pct: 80.77 },
    T5Row { alloc: A111, delta: 0.6, pi_p: 0.1, pi_r: 0.9, prior_n: 54,  prior_power_pct: 83.05, n: 53,  n_derived: None, exact_power_pct: 80.49 },
    T5Row { alloc: A111, delta: 0.6, pi_p: 0.3, pi_r: 0.7, prior_n: 318, prior_power_pct: 81.17, n: 312, n_derived: None, exact_power_pct: 80.45 },
    T5Row { alloc: A111, delta: 0.6, pi_p: 0.3, pi_r: 0.9, prior_n: 99,  prior_power_pct: 83.92, n: 94,  n_derived: None, exact_power_pct: 81.52 },
    T5Row { alloc: A111, delta: 0.6, pi_p: 0.5, pi_r: 0.9, prior_n: 213, prior_power_pct: 84.95, n: 195, n_derived: None, exact_power_pct: 81.43 },
    T5Row { alloc: A111, delta: 0.8, pi_p: 0.1, pi_r: 0.7, prior_n: 606, prior_power_pct: 81.74, n: 583, n_derived: None, exact_power_pct: 80.18 },
    T5Row { alloc: A111, delta: 0.8, pi_p: 0.1, pi_r: 0.9, prior_n: 201, prior_power_pct: 85.57, n: 182, n_derived: None, exact_power_pct: 81.14 },
    T5Row { alloc: A111, delta: 0.8, pi_p: 0.3, pi_r: 0.9, prior_n: 345, prior_power_pct: 85.39, n: 309, n_derived: None, exact_power_pct: 81.08 },
    // Printed 653 is off the formula value by 2 (under-converged projection
    // in the original computation); printed exact power still checked at 653.
    T5Row { alloc: A111, delta: 0.8, pi_p: 0.5, pi_r: 0.9, prior_n: 726, prior_power_pct: 84.74, n: 653, n_derived: Some(655), exact_power_pct: 80.51 },
    T5Row { alloc: A221, delta: 0.6, pi_p: 0.1, pi_r: 0.5, prior_n: 270, prior_power_pct: 78.59, n: 283, n_derived: None, exact_power_pct: 80.36 },
    T5Row { alloc: A221, delta: 0.6, pi_p: 0.1, pi_r: 0.7, prior_n: 115, prior_power_pct: 79.96, n: 119, n_derived: None, exact_power_pct: 80.62 },
    T5Row { alloc: A221, delta: 0.6, pi_p: 0.1, pi_r: 0.9, prior_n: 50,  prior_power_pct: 84.71, n: 49,  n_derived: None, exact_power_pct: 80.71 },
    T5Row { alloc: A221, delta: 0.6, pi_p: 0.3, pi_r: 0.7, prior_n: 290, prior_power_pct: 80.73, n: 287, n_derived: None, exact_power_pct: 80.02 },
    T5Row { alloc: A221, delta: 0.6, pi_p: 0.3, pi_r: 0.9, prior_n: 95,  prior_power_pct: 84.25, n: 89,  n_derived: None, exact_power_pct: 80.82 },
    T5Row { alloc: A221, delta: 0.6, pi_p: 0.5, pi_r: 0.9, prior_n: 213, prior_power_pct: 86.06, n: 186, n_derived: None, exact_power_pct: 81.11 },
    T5Row { alloc: A221, delta: 0.8, pi_p: 0.1, pi_r: 0.7, prior_n: 510, prior_power_pct: 81.69, n: 492, n_derived: None, exact_power_pct: 80.15 },
    T5Row { alloc: A221, delta: 0.8, pi_p: 0.1, pi_r: 0.9, prior_n: 170, prior_power_pct: 85.42, n: 156, n_derived: None, exact_power_pct: 81.99 },
    T5Row { alloc: A221, delta: 0.8, pi_p: 0.3, pi_r: 0.9, prior_n: 300, prior_power_pct: 85.51, n: 269, n_derived: None, exact_power_pct: 81.09 },
    T5Row { alloc: A221, delta: 0.8, pi_p: 0.5, pi_r: 0.9, prior_n: 635, prior_power_pct: 84.69, n: 575, n_derived: Some(572), exact_power_pct: 80.88 },
    T5Row { alloc: A321, delta: 0.6, pi_p: 0.1, pi_r: 0.5, prior_n: 252, prior_power_pct: 78.15, n: 268, n_derived: None, exact_power_pct: 80.49 },
    T5Row { alloc: A321, delta: 0.6, pi_p: 0.1, pi_r: 0.7, prior_n: 108, prior_power_pct: 80.54, n: 110, n_derived: None, exact_power_pct: 81.05 },
    T5Row { alloc: A321, delta: 0.6, pi_p: 0.1, pi_r: 0.9, prior_n: 42,  prior_power_pct: 80.12, n: 45,  n_derived: None, exact_power_pct: 83.09 },
    T5Row { alloc: A321, delta: 0.6, pi_p: 0.3, pi_r: 0.7, prior_n: 276, prior_power_pct: 80.97, n: 272, n_derived: None, exact_power_pct: 80.31 },
    T5Row { alloc: A321, delta: 0.6, pi_p: 0.3, pi_r: 0.9, prior_n: 90,  prior_power_pct: 85.70, n: 83,  n_derived: None, exact_power_pct: 81.07 },
    T5Row { alloc: A321, delta: 0.6, pi_p: 0.5, pi_r: 0.9, prior_n: 204, prior_power_pct: 87.31, n: 173, n_derived: None, exact_power_pct: 80.65 },
    T5Row { alloc: A321, delta: 0.8, pi_p: 0.1, pi_r: 0.7, prior_n: 486, prior_power_pct: 82.51, n: 458, n_derived: None, exact_power_pct: 80.17 },
    T5Row { alloc: A321, delta: 0.8, pi_p: 0.1, pi_r: 0.9, prior_n: 156, prior_power_pct: 87.36, n: 135, n_derived: None, exact_power_pct: 81.75 },
    T5Row { alloc: A321, delta: 0.8, pi_p: 0.3, pi_r: 0.9, prior_n: 282, prior_power_pct: 87.17, n: 241, n_derived: None, exact_power_pct: 81.21 },
    T5Row { alloc: A321, delta: 0.8, pi_p: 0.5, pi_r: 0.9, prior_n: 606, prior_power_pct: 86.02, n: 520, n_derived: Some(526), exact_power_pct: 80.30 },
];

/// Row of the Poisson planning table (alpha = 5%, optimal allocation, common
/// alternative rate_T = rate_R, everything in units of the placebo rate).
pub struct T6Row {
    pub delta: f64,
    /// rate_T / rate_P = rate_R / rate_P.
    pub rate_ratio: f64,
    /// Projected rates (T, R, P) over the placebo rate.
    pub theta_h0: [f64; 3],
    pub sigma_rml: f64,
    pub sigma0: f64,
    /// sigma_RML / sigma_0 (tabulated in this orientation).
    pub sigma_ratio: f64,
    /// n_0.7 restricted, n_0.7 unrestricted, n_0.8 restricted, n_0.8
    /// unrestricted, times the placebo rate.
    pub n: [u32; 4],
}

pub const T6_ALPHA: f64 = 0.05;

#[rustfmt::skip]
pub const TABLE6: [T6Row; 9] = [
    T6Row { delta: 0.5, rate_ratio: 0.7, theta_h0: [0.78, 0.64, 0.92], sigma_rml: 1.763, sigma0: 1.755, sigma_ratio: 1.005, n: [649, 645, 852, 847] },
    T6Row { delta: 0.5, rate_ratio: 0.5, theta_h0: [0.64, 0.41, 0.87], sigma_rml: 1.594, sigma0: 1.561, sigma_ratio: 1.021, n: [190, 184, 248, 241] },
    T6Row { delta: 0.5, rate_ratio: 0.3, theta_h0: [0.51, 0.21, 0.81], sigma_rml: 1.426, sigma0: 1.322, sigma_ratio: 1.079, n: [76, 68, 98, 89] },
    T6Row { delta: 0.7, rate_ratio: 0.7, theta_h0: [0.75, 0.66, 0.95], sigma_rml: 1.726, sigma0: 1.722, sigma_ratio: 1.002, n: [1729, 1724, 2270, 2265] },
    T6Row { delta: 0.7, rate_ratio: 0.5, theta_h0: [0.58, 0.44, 0.91], sigma_rml: 1.515, sigma0: 1.502, sigma_ratio: 1.009, n: [479, 472, 628, 620] },
    T6Row { delta: 0.7, rate_ratio: 0.3, theta_h0: [0.42, 0.23, 0.86], sigma_rml: 1.278, sigma0: 1.231, sigma_ratio: 1.038, n: [172, 162, 224, 213] },
    T6Row { delta: 0.8, rate_ratio: 0.7, theta_h0: [0.73, 0.67, 0.97], sigma_rml: 1.707, sigma0: 1.706, sigma_ratio: 1.001, n: [3810, 3805, 5004, 4999] },
    T6Row { delta: 0.8, rate_ratio: 0.5, theta_h0: [0.55, 0.46, 0.94], sigma_rml: 1.479, sigma0: 1.473, sigma_ratio: 1.004, n: [1028, 1021, 1349, 1342] },
    T6Row { delta: 0.8, rate_ratio: 0.3, theta_h0: [0.38, 0.25, 0.90], sigma_rml: 1.210, sigma0: 1.186, sigma_ratio: 1.020, n: [348, 338, 456, 444] },
];

/// The published allocation-improvement claim for binary endpoints at
/// delta = 0.6, pi_P = 0.1, pi_T = pi_R = 0.9: the optimal allocation
/// 2.5 : 1.5 : 1 versus the constrained 2.1 : 2.1 : 1.
pub struct AllocationClaim {
    pub delta: f64,
    pub pi_p: f64,
    pub pi_t: f64,
    /// Optimal ratio (T, R, P).
    pub optimal_ratio: [f64; 3],
    pub constrained_ratio: [f64; 3],
    /// Published total sample sizes (optimal, constrained) at power 0.8.
    pub printed_n: [u32; 2],
    /// Formula values at alpha = 2.5%, power 0.8, restricted variance. The
    /// printed pair is not reproducible from the sample-size formula at any
    /// standard (alpha, power); the published ~12% reduction is.
    pub derived_n: [u32; 2],
    pub reduction_pct: f64,
}

pub const ALLOCATION_CLAIM: AllocationClaim = AllocationClaim {
    delta: 0.6,
    pi_p: 0.1,
    pi_t: 0.9,
    optimal_ratio: [2.5, 1.5, 1.0],
    constrained_ratio: [2.1, 2.1, 1.0],
    printed_n: [79, 89],
    derived_n: [43, 49],
    reduction_pct: 12.0,
};
