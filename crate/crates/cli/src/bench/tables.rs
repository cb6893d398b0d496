//! Grid layouts and reference values of the benchmark tables.

use crate::commands::simulate::StructureKind;

/// `(n, p)` cells of the DGP tables, in column order.
pub const DGP_CELLS: [(usize, usize); 9] = [
    (100, 100),
    (100, 120),
    (100, 150),
    (120, 120),
    (120, 150),
    (120, 180),
    (150, 150),
    (150, 180),
    (150, 200),
];

pub const STRUCTURES: [StructureKind; 3] = [StructureKind::Ma1, StructureKind::Ar1, StructureKind::Lr];

/// `ρ` for MA(1) and AR(1).
pub const RHO_VALUES: [f64; 3] = [0.1, 0.5, 0.9];
/// Hurst indices for LR.
pub const HURST_VALUES: [f64; 3] = [0.5, 0.7, 0.9];
pub const CONSTANTS: [f64; 4] = [0.5, 1.0, 3.0, 5.0];

pub fn default_params(s: StructureKind) -> &'static [f64] {
    match s {
        StructureKind::Ma1 | StructureKind::Ar1 => &RHO_VALUES,
        StructureKind::Lr => &HURST_VALUES,
    }
}

pub const HF_DIMS: [usize; 5] = [100, 200, 300, 400, 500];
pub const HF_RHOS: [f64; 6] = [0.1, 0.2, 0.3, 0.4, 0.5, 0.6];

/// Reference cell values, rows MA(1), AR(1), LR and columns as in [`DGP_CELLS`].
pub struct DgpReference {
    pub frobenius: [[f64; 9]; 3],
    pub spectral: [[f64; 9]; 3],
}

pub const TABLE1: DgpReference = DgpReference {
    frobenius: [
        [7.486, 8.187, 9.125, 8.152, 9.104, 9.985, 9.023, 9.912, 10.466],
        [12.908, 14.187, 15.916, 14.140, 15.866, 17.418, 15.813, 17.361, 18.326],
        [16.328, 18.792, 22.325, 18.713, 22.230, 25.598, 22.166, 25.531, 27.718],
    ],
    spectral: [
        [1.311, 1.320, 1.323, 1.280, 1.302, 1.300, 1.259, 1.253, 1.290],
        [6.457, 6.540, 6.642, 6.543, 6.644, 6.680, 6.621, 6.668, 6.706],
        [14.900, 17.141, 20.359, 17.115, 20.320, 23.410, 20.310, 23.385, 25.358],
    ],
};

pub const TABLE2: DgpReference = DgpReference {
    frobenius: [
        [7.444, 8.167, 9.184, 8.128, 9.121, 9.981, 9.052, 9.896, 10.444],
        [12.887, 14.231, 15.910, 14.115, 15.843, 17.437, 15.809, 17.372, 18.343],
        [16.340, 18.792, 22.308, 18.746, 22.226, 25.597, 22.191, 25.534, 27.708],
    ],
    spectral: [
        [1.287, 1.306, 1.322, 1.285, 1.290, 1.315, 1.269, 1.257, 1.281],
        [6.440, 6.569, 6.647, 6.537, 6.625, 6.694, 6.611, 6.675, 6.718],
        [14.869, 17.133, 20.354, 17.142, 20.309, 23.435, 20.306, 23.391, 25.380],
    ],
};

pub const TABLE3: DgpReference = DgpReference {
    frobenius: [
        [17.924, 13.304, 16.366, 13.891, 18.053, 56.409, 45.830, 47.441, 48.709],
        [22.418, 18.747, 22.315, 19.278, 23.889, 62.149, 51.171, 53.261, 54.873],
        [25.603, 23.216, 28.499, 23.720, 29.947, 68.971, 56.433, 60.179, 62.801],
    ],
    spectral: [
        [11.051, 4.252, 4.967, 4.336, 8.007, 46.882, 37.333, 37.528, 37.443],
        [14.709, 8.483, 9.097, 8.608, 11.858, 50.770, 41.286, 41.451, 41.392],
        [21.067, 18.706, 22.309, 18.814, 24.366, 63.348, 51.485, 54.035, 55.375],
    ],
};

/// Frobenius reference values, rows by `p` as in [`HF_DIMS`], columns by `ρ`.
pub const TABLE5: [[f64; 6]; 5] = [
    [1.41, 2.87, 4.42, 6.14, 8.11, 10.52],
    [2.00, 4.07, 6.27, 8.70, 11.51, 14.94],
    [2.46, 4.99, 7.69, 10.67, 14.11, 18.32],
    [2.84, 5.77, 8.88, 12.33, 16.30, 21.17],
    [3.17, 6.45, 9.93, 13.78, 18.23, 23.68],
];

impl DgpReference {
    pub fn lookup(&self, s: StructureKind, n: usize, p: usize) -> Option<(f64, f64)> {
        let col = DGP_CELLS.iter().position(|&c| c == (n, p))?;
        let row = STRUCTURES.iter().position(|&x| x == s)?;
        Some((self.frobenius[row][col], self.spectral[row][col]))
    }
}

pub fn table5_reference(p: usize, rho: f64) -> Option<f64> {
    let r = HF_DIMS.iter().position(|&d| d == p)?;
    let c = HF_RHOS.iter().position(|&x| (x - rho).abs() < 1e-12)?;
    Some(TABLE5[r][c])
}
