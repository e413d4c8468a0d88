//! Special functions needed by the closed-form propagators: Fresnel integrals,
//! the sine/cosine integrals and Gauss-Legendre rules.

use std::f64::consts::{FRAC_PI_2, PI};
use std::sync::OnceLock;

use num_complex::Complex64 as C64;

const EULER_GAMMA: f64 = 0.577_215_664_901_532_9;
const CF_EPS: f64 = 1e-16;
const CF_MAXIT: usize = 400;
const FPMIN: f64 = 1e-300;

/// `(1 + i) / 2`, the limit of `F(z)` as `z -> +inf`.
pub const HALF_ONE_PLUS_I: C64 = C64::new(0.5, 0.5);

/// `e^{i pi z^2 / 2}`.
#[inline]
pub fn chirp(z: f64) -> C64 {
    let (s, c) = (0.5 * PI * z * z).sin_cos();
    C64::new(c, s)
}

/// Complex Fresnel integral `F(z) = C(z) + i S(z) = int_0^z e^{i pi t^2 / 2} dt`.
pub fn fresnel(z: f64) -> C64 {
    let az = z.abs();
    let f = if az < 1.5 {
        fresnel_series(az)
    } else {
        HALF_ONE_PLUS_I - fresnel_aux_reference(az) * chirp(az)
    };
    if z < 0.0 {
        -f
    } else {
        f
    }
}

/// Auxiliary Fresnel function `G(z) = ((1 + i)/2 - F(z)) e^{-i pi z^2 / 2}` for `z >= 0`.
///
/// `G` is smooth and slowly varying (`G ~ i / (pi z)` for large `z`), so
/// `F(z) = (1 + i)/2 - G(z) e^{i pi z^2/2}` carries no cancellation when
/// differences of Fresnel integrals at large arguments are formed.
///
/// This is the fast path: a Taylor table built from the ODE
/// `G' = -1 - i pi z G` below `z = 6`, the asymptotic series above.
#[inline]
pub fn fresnel_aux(z: f64) -> C64 {
    debug_assert!(z >= 0.0);
    if z >= AUX_ASYMPTOTIC_FROM {
        aux_asymptotic(z)
    } else {
        aux_table().eval(z)
    }
}

/// Reference evaluation of `G(z)`: power series below 1.5, continued fraction above.
pub fn fresnel_aux_reference(z: f64) -> C64 {
    debug_assert!(z >= 0.0);
    if z < 1.5 {
        (HALF_ONE_PLUS_I - fresnel_series(z)) * chirp(z).conj()
    } else {
        aux_continued_fraction(z)
    }
}

fn fresnel_series(z: f64) -> C64 {
    // sum_k (i pi / 2)^k z^{2k+1} / (k! (2k+1))
    let w = C64::new(0.0, 0.5 * PI * z * z);
    let mut term = C64::new(z, 0.0);
    let mut sum = term;
    for k in 1..60 {
        term = term * w / (k as f64);
        let add = term / ((2 * k + 1) as f64);
        sum += add;
        if add.norm() < 1e-18 * sum.norm() {
            break;
        }
    }
    sum
}

fn aux_continued_fraction(z: f64) -> C64 {
    // Lentz evaluation of the complementary error function continued fraction.
    let pix2 = PI * z * z;
    let mut b = C64::new(1.0, -pix2);
    let mut cc = C64::new(1.0 / FPMIN, 0.0);
    let mut d = b.inv();
    let mut h = d;
    let mut n: f64 = -1.0;
    for _ in 2..CF_MAXIT {
        n += 2.0;
        let a = -n * (n + 1.0);
        b += C64::new(4.0, 0.0);
        d = (d * a + b).inv();
        cc = b + cc.inv() * a;
        let del = cc * d;
        h *= del;
        if (del.re - 1.0).abs() + del.im.abs() < CF_EPS {
            break;
        }
    }
    h *= C64::new(z, -z);
    HALF_ONE_PLUS_I * h
}

const AUX_ASYMPTOTIC_FROM: f64 = 6.0;
const AUX_TABLE_STEP: f64 = 1.0 / 256.0;
const AUX_TAYLOR_ORDER: usize = 7;
const AUX_LANES: usize = 4;

fn aux_asymptotic(z: f64) -> C64 {
    // G(z) = (i / (pi z)) sum_k (2k-1)!! (-i / w)^k,  w = pi z^2
    let w = PI * z * z;
    let r = 1.0 / (w * w);
    // real part: sum_m (-1)^m (4m-1)!! / w^{2m}
    const RE: [f64; 10] = [
        1.0,
        -3.0,
        105.0,
        -10395.0,
        2027025.0,
        -654729075.0,
        316234143225.0,
        -213458046676875.0,
        1.918_987_839_625_106_2e17,
        -2.216_430_954_766_997_7e20,
    ];
    // imaginary part: -sum_m (-1)^m (4m+1)!! / w^{2m+1}
    const IM: [f64; 9] = [
        -1.0,
        15.0,
        -945.0,
        135135.0,
        -34459425.0,
        13749310575.0,
        -7905853580625.0,
        6190283353629375.0,
        -6.332_659_870_762_850_6e18,
    ];
    // truncation keeps the first omitted term below 1e-16
    let (nre, nim) = if z < 10.0 {
        (10, 9)
    } else if z < 20.0 {
        (6, 6)
    } else if z < 60.0 {
        (4, 4)
    } else {
        (3, 3)
    };
    let mut re = 0.0;
    for c in RE[..nre].iter().rev() {
        re = re * r + c;
    }
    let mut im = 0.0;
    for c in IM[..nim].iter().rev() {
        im = im * r + c;
    }
    im /= w;
    // (i / (pi z)) (re + i im)
    C64::new(-im, re) / (PI * z)
}

struct AuxTable {
    coeffs: Vec<[C64; AUX_TAYLOR_ORDER + 1]>,
}

impl AuxTable {
    fn build() -> Self {
        let nodes = (AUX_ASYMPTOTIC_FROM / AUX_TABLE_STEP).round() as usize + 1;
        let coeffs = (0..nodes)
            .map(|j| {
                let z0 = j as f64 * AUX_TABLE_STEP;
                let mut g = [C64::new(0.0, 0.0); AUX_TAYLOR_ORDER + 1];
                g[0] = fresnel_aux_reference(z0);
                // (k+1) g_{k+1} = -[k == 0] - i pi (z0 g_k + g_{k-1})
                for k in 0..AUX_TAYLOR_ORDER {
                    let prev = if k > 0 { g[k - 1] } else { C64::new(0.0, 0.0) };
                    let mut rhs = C64::new(0.0, -PI) * (g[k] * z0 + prev);
                    if k == 0 {
                        rhs -= 1.0;
                    }
                    g[k + 1] = rhs / ((k + 1) as f64);
                }
                g
            })
            .collect();
        Self { coeffs }
    }

    #[inline]
    fn eval(&self, z: f64) -> C64 {
        let j = (z / AUX_TABLE_STEP).round() as usize;
        let s = z - j as f64 * AUX_TABLE_STEP;
        let g = &self.coeffs[j];
        let mut acc = g[AUX_TAYLOR_ORDER];
        for k in (0..AUX_TAYLOR_ORDER).rev() {
            acc = acc * s + g[k];
        }
        acc
    }
}

/// `G` at several points; the independent evaluations are interleaved.
pub fn fresnel_aux_many(z: &[f64], out: &mut [C64]) {
    let table = aux_table();
    for (zc, oc) in z.chunks(AUX_LANES).zip(out.chunks_mut(AUX_LANES)) {
        let mut rows = [&table.coeffs[0]; AUX_LANES];
        let mut s = [0.0; AUX_LANES];
        for (l, &zl) in zc.iter().enumerate() {
            if zl < AUX_ASYMPTOTIC_FROM {
                let j = (zl * (1.0 / AUX_TABLE_STEP) + 0.5) as usize;
                rows[l] = &table.coeffs[j];
                s[l] = zl - j as f64 * AUX_TABLE_STEP;
            }
        }
        let mut acc = [C64::new(0.0, 0.0); AUX_LANES];
        for l in 0..AUX_LANES {
            acc[l] = rows[l][AUX_TAYLOR_ORDER];
        }
        for k in (0..AUX_TAYLOR_ORDER).rev() {
            for l in 0..AUX_LANES {
                acc[l] = acc[l] * s[l] + rows[l][k];
            }
        }
        for (l, o) in oc.iter_mut().enumerate() {
            *o = if zc[l] < AUX_ASYMPTOTIC_FROM { acc[l] } else { aux_asymptotic(zc[l]) };
        }
    }
}

fn aux_table() -> &'static AuxTable {
    static TABLE: OnceLock<AuxTable> = OnceLock::new();
    TABLE.get_or_init(AuxTable::build)
}

/// Sine and cosine integrals `(Si(x), Ci(x))` for `x > 0`.
pub fn sici(x: f64) -> (f64, f64) {
    let (si_shift, ci) = sici_shifted(x);
    (si_shift + FRAC_PI_2, ci)
}

/// `(Si(x) - pi/2, Ci(x))` for `x > 0`, computed without cancellation for large `x`.
pub fn sici_shifted(x: f64) -> (f64, f64) {
    assert!(x > 0.0, "sici requires a positive argument");
    if x > 2.0 {
        let mut b = C64::new(1.0, x);
        let mut c = C64::new(1.0 / FPMIN, 0.0);
        let mut d = b.inv();
        let mut h = d;
        for i in 2..CF_MAXIT {
            let a = -((i - 1) as f64).powi(2);
            b += C64::new(2.0, 0.0);
            d = (d * a + b).inv();
            c = b + c.inv() * a;
            let del = c * d;
            h *= del;
            if (del.re - 1.0).abs() + del.im.abs() < CF_EPS {
                break;
            }
        }
        let (s, cs) = x.sin_cos();
        h *= C64::new(cs, -s);
        (h.im, -h.re)
    } else {
        let mut sum = 0.0;
        let mut sums = 0.0;
        let mut sumc = 0.0;
        let mut sign = 1.0;
        let mut fact = 1.0;
        let mut odd = true;
        for k in 1..CF_MAXIT {
            fact *= x / k as f64;
            let term = fact / k as f64;
            sum += sign * term;
            let err = term / sum.abs();
            if odd {
                sign = -sign;
                sums = sum;
                sum = sumc;
            } else {
                sumc = sum;
                sum = sums;
            }
            if err < CF_EPS {
                break;
            }
            odd = !odd;
        }
        (sums - FRAC_PI_2, sumc + x.ln() + EULER_GAMMA)
    }
}

/// `int_t^inf e^{i s} / s ds` for `t > 0`.
pub fn oscillatory_tail(t: f64) -> C64 {
    let (si, ci) = sici_shifted(t);
    C64::new(-ci, -si)
}

/// Gauss-Legendre nodes and weights on `[-1, 1]`.
pub fn gauss_legendre(n: usize) -> (Vec<f64>, Vec<f64>) {
    assert!(n >= 1);
    let mut nodes = vec![0.0; n];
    let mut weights = vec![0.0; n];
    let m = (n + 1) / 2;
    for i in 0..m {
        let mut z = (PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
        let mut dp = 0.0;
        for _ in 0..100 {
            let mut p1 = 1.0;
            let mut p2 = 0.0;
            for j in 0..n {
                let p3 = p2;
                p2 = p1;
                p1 = ((2 * j + 1) as f64 * z * p2 - j as f64 * p3) / (j + 1) as f64;
            }
            dp = n as f64 * (z * p1 - p2) / (z * z - 1.0);
            let dz = p1 / dp;
            z -= dz;
            if dz.abs() < 1e-16 {
                break;
            }
        }
        nodes[i] = -z;
        nodes[n - 1 - i] = z;
        let w = 2.0 / ((1.0 - z * z) * dp * dp);
        weights[i] = w;
        weights[n - 1 - i] = w;
    }
    (nodes, weights)
}

/// Cached 16-point Gauss-Legendre rule.
pub(crate) fn gl16() -> &'static (Vec<f64>, Vec<f64>) {
    static RULE: OnceLock<(Vec<f64>, Vec<f64>)> = OnceLock::new();
    RULE.get_or_init(|| gauss_legendre(16))
}

/// Integrates `f` over `[a, b]` with `panels` equal panels of 16-point Gauss-Legendre.
pub(crate) fn integrate_panels<F: FnMut(f64) -> f64>(a: f64, b: f64, panels: usize, mut f: F) -> f64 {
    let (nodes, weights) = gl16();
    let h = (b - a) / panels as f64;
    let mut total = 0.0;
    for p in 0..panels {
        let mid = a + (p as f64 + 0.5) * h;
        let mut acc = 0.0;
        for (x, w) in nodes.iter().zip(weights) {
            acc += w * f(mid + 0.5 * h * x);
        }
        total += 0.5 * h * acc;
    }
    total
}
