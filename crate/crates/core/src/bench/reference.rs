//! Published settling-sphere results used as validation fixtures.
//!
//! Reference rows are the spectral-element solutions of the four Galileo
//! regimes; the remaining rows are lattice Boltzmann results labeled
//! `(coupling, D/dx)`. All values are dimensionless with `u_ref` and `D`.
//! Values are transcribed verbatim; bump [`VERSION`] when editing.

pub const VERSION: u32 = 1;

/// Regime A (Ga = 144) row.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SteadyAxisymmetric {
    pub coupling: &'static str,
    pub resolution: u32,
    pub u_pv: f64,
    pub u_pv_error: f64,
    pub l_r: f64,
    pub l_r_error: f64,
}

pub const REGIME_A_REFERENCE_U_PV: f64 = -1.285;
pub const REGIME_A_REFERENCE_L_R: f64 = 1.383;

const fn a(coupling: &'static str, resolution: u32, u_pv: f64, u_pv_error: f64, l_r: f64, l_r_error: f64) -> SteadyAxisymmetric {
    SteadyAxisymmetric {
        coupling,
        resolution,
        u_pv,
        u_pv_error,
        l_r,
        l_r_error,
    }
}

pub const REGIME_A: [SteadyAxisymmetric; 24] = [
    a("BB", 18, -1.2161, 0.0536, 1.4126, 0.0214),
    a("BB", 24, -1.2386, 0.0361, 1.3884, 0.0039),
    a("BB", 36, -1.2487, 0.0283, 1.3701, 0.0093),
    a("BB", 48, -1.2538, 0.0243, 1.3634, 0.0142),
    a("CLI", 18, -1.2150, 0.0545, 1.3462, 0.0266),
    a("CLI", 24, -1.2383, 0.0363, 1.3616, 0.0155),
    a("CLI", 36, -1.2538, 0.0243, 1.3540, 0.0210),
    a("CLI", 48, -1.2586, 0.0205, 1.3511, 0.0231),
    a("MR", 18, -1.2172, 0.0528, 1.4919, 0.0787),
    a("MR", 24, -1.2510, 0.0265, 1.4248, 0.0303),
    a("MR", 36, -1.2643, 0.0161, 1.3775, 0.0040),
    a("MR", 48, -1.2646, 0.0159, 1.3610, 0.0159),
    a("M1B1", 18, -1.1646, 0.0937, 1.4685, 0.0618),
    a("M1B1", 24, -1.1924, 0.0721, 1.4330, 0.0361),
    a("M1B1", 36, -1.2182, 0.0520, 1.4015, 0.0134),
    a("M1B1", 48, -1.2299, 0.0429, 1.3873, 0.0031),
    a("M2B2", 18, -1.2363, 0.0379, 1.3820, 0.0008),
    a("M2B2", 24, -1.2490, 0.0280, 1.3665, 0.0119),
    a("M2B2", 36, -1.2588, 0.0204, 1.3521, 0.0224),
    a("M2B2", 48, -1.2616, 0.0182, 1.3482, 0.0251),
    a("M3B2", 18, -1.2128, 0.0562, 1.4128, 0.0216),
    a("M3B2", 24, -1.2309, 0.0421, 1.3876, 0.0033),
    a("M3B2", 36, -1.2453, 0.0309, 1.3692, 0.0099),
    a("M3B2", 48, -1.2513, 0.0262, 1.3612, 0.0158),
];

/// Regime B (Ga = 178.46) row: value and error for each quantity.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SteadyOblique {
    pub coupling: &'static str,
    pub resolution: u32,
    /// No steady state was reached.
    pub unsteady: bool,
    pub u_pv: [f64; 2],
    pub u_ph: [f64; 2],
    pub omega_ph: [f64; 2],
    pub l_r: [f64; 2],
}

pub const REGIME_B_REFERENCE: [f64; 4] = [-1.356, 0.1245, 0.0137, 1.629];

const fn b(coupling: &'static str, resolution: u32, unsteady: bool, v: [f64; 8]) -> SteadyOblique {
    SteadyOblique {
        coupling,
        resolution,
        unsteady,
        u_pv: [v[0], v[1]],
        u_ph: [v[2], v[3]],
        omega_ph: [v[4], v[5]],
        l_r: [v[6], v[7]],
    }
}

pub const REGIME_B: [SteadyOblique; 18] = [
    b("BB", 24, false, [-1.3097, 0.0341, 0.0494, 0.0554, 0.0605, 0.0345, 1.6593, 0.0186]),
    b("BB", 36, false, [-1.3265, 0.0218, 0.0652, 0.0437, 0.0490, 0.0260, 1.6324, 0.0021]),
    b("BB", 48, false, [-1.3325, 0.0173, 0.0722, 0.0386, 0.0367, 0.0170, 1.6181, 0.0067]),
    b("CLI", 24, false, [-1.3056, 0.0371, 0.0883, 0.0267, 0.0230, 0.0069, 1.6023, 0.0164]),
    b("CLI", 36, false, [-1.3267, 0.0216, 0.0934, 0.0229, 0.0175, 0.0028, 1.6058, 0.0143]),
    b("CLI", 48, false, [-1.3328, 0.0171, 0.0991, 0.0187, 0.0104, 0.0025, 1.6025, 0.0163]),
    b("MR", 24, true, [-1.3037, 0.0385, 0.1178, 0.0049, 0.0092, 0.0033, 1.6625, 0.0206]),
    b("MR", 36, true, [-1.3358, 0.0149, 0.1097, 0.0109, 0.0038, 0.0073, 1.6486, 0.0120]),
    b("MR", 48, true, [-1.3384, 0.0130, 0.1108, 0.0101, 0.0013, 0.0091, 1.6216, 0.0046]),
    b("M1B1", 24, false, [-1.2455, 0.0815, 0.1171, 0.0055, 0.0332, 0.0144, 1.7104, 0.0500]),
    b("M1B1", 36, false, [-1.2795, 0.0564, 0.1153, 0.0068, 0.0220, 0.0061, 1.6634, 0.0211]),
    b("M1B1", 48, false, [-1.2944, 0.0454, 0.1159, 0.0063, 0.0186, 0.0036, 1.6432, 0.0087]),
    b("M2B2", 24, false, [-1.3040, 0.0384, 0.1329, 0.0062, 0.0437, 0.0221, 1.6225, 0.0040]),
    b("M2B2", 36, false, [-1.3218, 0.0252, 0.1238, 0.0005, 0.0255, 0.0087, 1.6047, 0.0149]),
    b("M2B2", 48, false, [-1.3278, 0.0208, 0.1209, 0.0027, 0.0198, 0.0045, 1.5972, 0.0195]),
    b("M3B2", 24, false, [-1.2904, 0.0484, 0.1150, 0.0070, 0.0223, 0.0064, 1.6497, 0.0127]),
    b("M3B2", 36, false, [-1.3112, 0.0331, 0.1128, 0.0086, 0.0135, 0.0001, 1.6233, 0.0035]),
    b("M3B2", 48, false, [-1.3192, 0.0271, 0.1124, 0.0089, 0.0108, 0.0021, 1.6120, 0.0104]),
];

/// Regime C (Ga = 190) row. Column order: mean u_pV, mean u_pH, mean
/// omega_pH, RMS u_pV, RMS u_pH, RMS omega_pH, frequency.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OscillatingOblique {
    pub coupling: &'static str,
    pub resolution: u32,
    pub values: [f64; 7],
    pub errors: [f64; 7],
}

pub const REGIME_C_REFERENCE: [f64; 7] = [-1.376, 0.136, 0.012, 0.008, 0.033, 0.008, 0.071];

const fn c(coupling: &'static str, resolution: u32, values: [f64; 7], errors: [f64; 7]) -> OscillatingOblique {
    OscillatingOblique {
        coupling,
        resolution,
        values,
        errors,
    }
}

pub const REGIME_C: [OscillatingOblique; 12] = [
    c("BB", 36, [-1.3479, 0.0624, 0.0452, 0.0108, 0.0624, 0.0439, 0.0415], [0.0206, 0.0536, 0.0241, 0.0018, 0.0210, 0.0258, 0.4152]),
    c("BB", 48, [-1.3540, 0.0678, 0.0351, 0.0126, 0.0678, 0.0350, 0.0356], [0.0162, 0.0496, 0.0167, 0.0030, 0.0250, 0.0193, 0.4984]),
    c("CLI", 36, [-1.3461, 0.1001, 0.0284, 0.0053, 0.0333, 0.0120, 0.0637], [0.0220, 0.0262, 0.0118, 0.0022, 0.0001, 0.0026, 0.1030]),
    c("CLI", 48, [-1.3527, 0.1076, 0.0195, 0.0058, 0.0307, 0.0087, 0.0668], [0.0172, 0.0207, 0.0054, 0.0019, 0.0020, 0.0003, 0.0599]),
    c("MR", 36, [-1.3547, 0.1091, 0.0143, 0.0115, 0.0538, 0.0143, 0.0636], [0.0158, 0.0197, 0.0016, 0.0023, 0.0148, 0.0043, 0.1042]),
    c("MR", 48, [-1.3590, 0.1178, 0.0080, 0.0078, 0.0362, 0.0080, 0.0667], [0.0126, 0.0134, 0.0030, 0.0004, 0.0021, 0.0003, 0.0607]),
    c("M1B1", 36, [-1.2978, 0.1295, 0.0223, 0.0015, 0.0065, 0.0019, 0.0680], [0.0571, 0.0049, 0.0074, 0.0050, 0.0195, 0.0047, 0.0421]),
    c("M1B1", 48, [-1.3131, 0.1306, 0.0173, 0.0013, 0.0049, 0.0013, 0.0669], [0.0459, 0.0041, 0.0038, 0.0052, 0.0207, 0.0051, 0.0576]),
    c("M2B2", 36, [-1.3389, 0.1363, 0.0250, 0.0015, 0.0072, 0.0018, 0.0690], [0.0272, 0.0001, 0.0094, 0.0050, 0.0191, 0.0047, 0.0287]),
    c("M2B2", 48, [-1.3455, 0.1355, 0.0185, 0.0013, 0.0052, 0.0013, 0.0712], [0.0224, 0.0005, 0.0046, 0.0051, 0.0205, 0.0052, 0.0024]),
    c("M3B2", 36, [-1.3283, 0.1245, 0.0117, 0.0016, 0.0086, 0.0021, 0.0733], [0.0349, 0.0084, 0.0003, 0.0049, 0.0181, 0.0046, 0.0328]),
    c("M3B2", 48, [-1.3371, 0.1240, 0.0084, 0.0017, 0.0095, 0.0021, 0.0729], [0.0285, 0.0089, 0.0027, 0.0048, 0.0174, 0.0045, 0.0273]),
];

/// Regime D (Ga = 250) row, sample-averaged over seven runs. Column order:
/// mean u_pV, RMS u_pV, RMS u_pr, RMS omega_pV, RMS omega_px.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Chaotic {
    pub coupling: &'static str,
    pub resolution: u32,
    pub values: [f64; 5],
    pub errors: [f64; 5],
}

pub const REGIME_D_REFERENCE: [f64; 5] = [-1.4604, 0.0087, 0.0854, 0.0013, 0.0067];

const fn d(coupling: &'static str, values: [f64; 5], errors: [f64; 5]) -> Chaotic {
    Chaotic {
        coupling,
        resolution: 36,
        values,
        errors,
    }
}

pub const REGIME_D: [Chaotic; 6] = [
    d("BB", [-1.4111, 0.0049, 0.0342, 0.0005, 0.0200], [0.0338, 0.0026, 0.0351, 0.0005, 0.0091]),
    d("CLI", [-1.4114, 0.0075, 0.0701, 0.0016, 0.0358], [0.0336, 0.0008, 0.0105, 0.0002, 0.0199]),
    d("MR", [-1.4187, 0.0037, 0.0348, 0.0008, 0.0116], [0.0286, 0.0034, 0.0347, 0.0004, 0.0033]),
    d("M1B1", [-1.3701, 0.0109, 0.0913, 0.0008, 0.0160], [0.0618, 0.0015, 0.0041, 0.0003, 0.0064]),
    d("M2B2", [-1.4093, 0.0102, 0.1045, 0.0009, 0.0209], [0.0350, 0.0011, 0.0131, 0.0003, 0.0097]),
    d("M3B2", [-1.4010, 0.0066, 0.0881, 0.0158, 0.0082], [0.0407, 0.0014, 0.0019, 0.0099, 0.0010]),
];

/// Drag coefficient of a simple cubic sphere array at `D = L/2`.
pub const STOKES_ARRAY_C: f64 = 2.8402;

/// Regime-A row for a coupling label and resolution.
pub fn regime_a(coupling: &str, resolution: u32) -> Option<&'static SteadyAxisymmetric> {
    REGIME_A.iter().find(|r| r.coupling == coupling && r.resolution == resolution)
}
