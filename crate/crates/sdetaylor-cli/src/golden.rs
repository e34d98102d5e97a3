//! Reference values checked by `validate`.

/// Coefficients `\bar C_{3 j2 j1}`, rows `j2 = 0..6`, columns `j1 = 0..6`.
pub const TRIPLE_J3_3: [[&str; 7]; 7] = [
    ["0", "2/105", "0", "-4/315", "0", "2/693", "0"],
    ["4/105", "0", "-2/315", "0", "-8/3465", "0", "10/9009"],
    ["2/35", "-2/105", "0", "4/3465", "0", "-74/45045", "0"],
    ["2/315", "0", "-2/3465", "0", "16/45045", "0", "-10/9009"],
    ["-2/63", "46/3465", "0", "-32/45045", "0", "2/9009", "0"],
    ["-10/693", "0", "38/9009", "0", "-4/9009", "0", "122/765765"],
    ["0", "-10/3003", "0", "20/9009", "0", "-226/765765", "0"],
];

/// Coefficients `\bar C_{2 1 j2 j1}`.
pub const QUADRUPLE_J4_2_J3_1: [[&str; 3]; 3] = [
    ["2/21", "-2/45", "2/315"],
    ["2/315", "2/315", "-2/225"],
    ["-2/105", "2/225", "2/1155"],
];

/// Coefficients `\bar C_{1 0 1 j2 j1}`.
pub const QUINTUPLE_J5_1_J4_0_J3_1: [[&str; 2]; 2] = [["4/315", "0"], ["4/315", "-8/945"]];

/// All golden coefficient entries as `(l, j with j[0] = j1, value)`.
pub fn coefficient_entries() -> Vec<(Vec<u32>, Vec<usize>, &'static str)> {
    let mut out = Vec::new();
    for (j2, row) in TRIPLE_J3_3.iter().enumerate() {
        for (j1, v) in row.iter().enumerate() {
            out.push((vec![0; 3], vec![j1, j2, 3], *v));
        }
    }
    for (j2, row) in QUADRUPLE_J4_2_J3_1.iter().enumerate() {
        for (j1, v) in row.iter().enumerate() {
            out.push((vec![0; 4], vec![j1, j2, 1, 2], *v));
        }
    }
    for (j2, row) in QUINTUPLE_J5_1_J4_0_J3_1.iter().enumerate() {
        for (j1, v) in row.iter().enumerate() {
            out.push((vec![0; 5], vec![j1, j2, 1, 0, 1], *v));
        }
    }
    out
}

/// One truncation error constant: `E = value · Δ^power`.
#[derive(Debug, Clone, Copy)]
pub struct ErrorConstant {
    pub name: &'static str,
    pub i: &'static [usize],
    pub l: &'static [u32],
    pub p: usize,
    pub value: f64,
}

pub const ERROR_CONSTANTS: [ErrorConstant; 6] = [
    ErrorConstant {
        name: "triple distinct, p=6",
        i: &[1, 2, 3],
        l: &[0, 0, 0],
        p: 6,
        value: 0.01956000,
    },
    ErrorConstant {
        name: "quadruple distinct, p=2",
        i: &[1, 2, 3, 4],
        l: &[0, 0, 0, 0],
        p: 2,
        value: 0.02360840,
    },
    ErrorConstant {
        name: "triple l=(1,0,0), p=2",
        i: &[1, 2, 3],
        l: &[1, 0, 0],
        p: 2,
        value: 0.00815429,
    },
    ErrorConstant {
        name: "triple l=(0,1,0), p=2",
        i: &[1, 2, 3],
        l: &[0, 1, 0],
        p: 2,
        value: 0.0173903,
    },
    ErrorConstant {
        name: "triple l=(0,0,1), p=2",
        i: &[1, 2, 3],
        l: &[0, 0, 1],
        p: 2,
        value: 0.0252801,
    },
    ErrorConstant {
        name: "quintuple distinct, p=1",
        i: &[1, 2, 3, 4, 5],
        l: &[0; 5],
        p: 1,
        value: 0.00759105,
    },
];

/// Relative tolerance against six printed significant digits.
pub const ERROR_CONSTANT_RTOL: f64 = 5e-6;

pub const RANK_A: [u64; 10] = [1, 3, 7, 15, 31, 63, 127, 255, 511, 1023];
pub const N_M: [u64; 10] = [1, 4, 11, 26, 57, 120, 247, 502, 1013, 2036];
pub const F: [&str; 10] = [
    "1", "1.3333", "1.5714", "1.7333", "1.8387", "1.9048", "1.9449", "1.9686", "1.9824", "1.9902",
];
pub const RANK_D: [u64; 10] = [1, 2, 4, 7, 12, 20, 33, 54, 88, 143];
pub const N_E: [u64; 10] = [1, 2, 5, 9, 17, 29, 50, 83, 138, 261];
pub const G: [&str; 10] = [
    "1", "1", "1.2500", "1.2857", "1.4167", "1.4500", "1.5152", "1.5370", "1.5682", "1.8252",
];
