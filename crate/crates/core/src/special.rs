//! Complementary error function and its scaled form, using Cody's rational
//! Chebyshev approximations on three intervals.

const ONE_OVER_SQRT_PI: f64 = 0.56418958354775628695;
const THRESHOLD: f64 = 0.46875;
const XBIG: f64 = 26.543;
/// Below this, `erfcx` overflows.
const XNEG: f64 = -26.6287357137514;

const A: [f64; 5] = [
    3.1611237438705656,
    113.864154151050156,
    377.485237685302021,
    3209.37758913846947,
    0.185777706184603153,
];
const B: [f64; 4] = [
    23.6012909523441209,
    244.024637934444173,
    1282.61652607737228,
    2844.23683343917062,
];
const C: [f64; 9] = [
    0.564188496988670089,
    8.88314979438837594,
    66.1191906371416295,
    298.635138197400131,
    881.95222124176909,
    1712.04761263407058,
    2051.07837782607147,
    1230.33935479799725,
    2.15311535474403846e-8,
];
const D: [f64; 8] = [
    15.7449261107098347,
    117.693950891312499,
    537.181101862009858,
    1621.38957456669019,
    3290.79923573345963,
    4362.61909014324716,
    3439.36767414372164,
    1230.33935480374942,
];
const P: [f64; 6] = [
    0.305326634961232344,
    0.360344899949804439,
    0.125781726111229246,
    0.0160837851487422766,
    6.58749161529837803e-4,
    0.0163153871373020978,
];
const Q: [f64; 5] = [
    2.56852019228982242,
    1.87295284992346047,
    0.527905102951428412,
    0.0605183413124413191,
    0.00233520497626869185,
];

/// `erf(x)/x` for `|x| <= 0.46875`, as a function of `z = x²`.
fn small(z: f64) -> f64 {
    ((((A[4] * z + A[0]) * z + A[1]) * z + A[2]) * z + A[3]) / ((((z + B[0]) * z + B[1]) * z + B[2]) * z + B[3])
}

/// `erfcx(y)` for `0.46875 < y <= 4`.
fn middle(y: f64) -> f64 {
    let num = C[..8].iter().fold(C[8], |acc, &c| acc * y + c);
    let den = D.iter().fold(1.0, |acc, &d| acc * y + d);
    num / den
}

/// `erfcx(y)` for `y > 4`.
fn large(y: f64) -> f64 {
    let z = 1.0 / (y * y);
    let num = P[..5].iter().fold(P[5], |acc, &p| acc * z + p);
    let den = Q.iter().fold(1.0, |acc, &q| acc * z + q);
    (ONE_OVER_SQRT_PI - z * num / den) / y
}

/// `exp(-y²)` without the cancellation error of squaring `y` directly:
/// `y` is split into a 1/16-grid part and a small remainder.
fn exp_neg_square(y: f64) -> f64 {
    let coarse = (y * 16.0).trunc() / 16.0;
    (-coarse * coarse).exp() * (-(y - coarse) * (y + coarse)).exp()
}

fn exp_pos_square(y: f64) -> f64 {
    let coarse = (y * 16.0).trunc() / 16.0;
    (coarse * coarse).exp() * ((y - coarse) * (y + coarse)).exp()
}

fn erfcx_positive(y: f64) -> f64 {
    if y <= 4.0 {
        middle(y)
    } else {
        large(y)
    }
}

pub fn erfc(x: f64) -> f64 {
    if x.is_nan() {
        return f64::NAN;
    }
    let y = x.abs();
    if y <= THRESHOLD {
        return 1.0 - x * small(y * y);
    }
    let tail = if y >= XBIG { 0.0 } else { erfcx_positive(y) * exp_neg_square(y) };
    if x < 0.0 {
        2.0 - tail
    } else {
        tail
    }
}

/// `exp(x²)·erfc(x)`; saturates at `f64::MAX` below about -26.63.
pub fn erfcx(x: f64) -> f64 {
    if x.is_nan() {
        return f64::NAN;
    }
    let y = x.abs();
    if y <= THRESHOLD {
        let z = y * y;
        return z.exp() * (1.0 - x * small(z));
    }
    if x < XNEG {
        return f64::MAX;
    }
    let r = erfcx_positive(y);
    if x < 0.0 {
        2.0 * exp_pos_square(y) - r
    } else {
        r
    }
}

/// `ln erfc(x)`, finite wherever `erfc` would underflow.
pub fn ln_erfc(x: f64) -> f64 {
    if x > THRESHOLD {
        erfcx_positive(x).ln() - x * x
    } else {
        erfc(x).ln()
    }
}
