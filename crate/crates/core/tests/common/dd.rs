//! Double-double Fisher information and its Schur-complement inverse.

use std::ops::{Add, Mul, Sub};

use moving_array::channel::SteeringBundle;
use moving_array::waveform::WaveformSet;
use moving_array::{Layout, Scene, C64};
use twofloat::TwoFloat;

#[derive(Clone, Copy, Debug)]
pub struct Cdd {
    pub re: TwoFloat,
    pub im: TwoFloat,
}

impl Cdd {
    pub fn zero() -> Self {
        Self {
            re: TwoFloat::from(0.0),
            im: TwoFloat::from(0.0),
        }
    }
    pub fn from_c64(z: C64) -> Self {
        Self {
            re: TwoFloat::from(z.re),
            im: TwoFloat::from(z.im),
        }
    }
    pub fn conj(self) -> Self {
        Self {
            re: self.re,
            im: -self.im,
        }
    }
    pub fn norm_sqr(self) -> TwoFloat {
        self.re * self.re + self.im * self.im
    }
}

impl Add for Cdd {
    type Output = Cdd;
    fn add(self, o: Cdd) -> Cdd {
        Cdd {
            re: self.re + o.re,
            im: self.im + o.im,
        }
    }
}

impl Sub for Cdd {
    type Output = Cdd;
    fn sub(self, o: Cdd) -> Cdd {
        Cdd {
            re: self.re - o.re,
            im: self.im - o.im,
        }
    }
}

impl Mul for Cdd {
    type Output = Cdd;
    fn mul(self, o: Cdd) -> Cdd {
        Cdd {
            re: self.re * o.re - self.im * o.im,
            im: self.re * o.im + self.im * o.re,
        }
    }
}

/// Quotient accurate to double-double precision; `TwoFloat`'s own division
/// returns only the leading word for some operands.
pub fn div(a: TwoFloat, b: TwoFloat) -> TwoFloat {
    let mut q = TwoFloat::from(a.hi() / b.hi());
    for _ in 0..2 {
        let r = a - q * b;
        q += TwoFloat::from(r.hi() / b.hi());
    }
    q
}

fn lift(v: &[C64]) -> Vec<Cdd> {
    v.iter().copied().map(Cdd::from_c64).collect()
}

fn dot_t(u: &[Cdd], v: &[Cdd]) -> Cdd {
    u.iter().zip(v).fold(Cdd::zero(), |acc, (a, b)| acc + *a * *b)
}

fn dot_h(u: &[Cdd], v: &[Cdd]) -> Cdd {
    u.iter().zip(v).fold(Cdd::zero(), |acc, (a, b)| acc + a.conj() * *b)
}

/// The 4x4 information matrix over `(x, y, Re b, Im b)` in double-double.
pub fn fim(bundles: &[SteeringBundle], layout: &Layout, scene: &Scene, ws: &WaveformSet) -> [[TwoFloat; 4]; 4] {
    let mut f_pq = [[Cdd::zero(); 2]; 2];
    let mut f_pb = [Cdd::zero(); 2];
    let mut f_bb = TwoFloat::from(0.0);
    for l in 0..layout.n_symbols() {
        let bundle = if bundles.len() == 1 { &bundles[0] } else { &bundles[l] };
        let a = lift(&bundle.a);
        let s = lift(&ws.symbols[l]);
        let t = dot_t(&a, &s);
        let w: Vec<Cdd> = a.iter().map(|z| *z * t).collect();
        let u: Vec<Vec<Cdd>> = [&bundle.da_dx, &bundle.da_dy]
            .iter()
            .map(|da| {
                let da = lift(da);
                let tp = dot_t(&da, &s);
                da.iter().zip(&a).map(|(d, z)| *d * t + *z * tp).collect()
            })
            .collect();
        for p in 0..2 {
            for q in 0..2 {
                f_pq[p][q] = f_pq[p][q] + dot_h(&u[p], &u[q]);
            }
            f_pb[p] = f_pb[p] + dot_h(&u[p], &w);
        }
        f_bb += w.iter().fold(TwoFloat::from(0.0), |acc, z| acc + z.norm_sqr());
    }
    let b = Cdd::from_c64(scene.reflection());
    let two_over_noise = div(TwoFloat::from(2.0), TwoFloat::from(scene.noise_power()));
    let b2 = b.norm_sqr() * two_over_noise;
    let fpb: Vec<Cdd> = f_pb
        .iter()
        .map(|v| {
            let z = *v * b.conj();
            Cdd {
                re: z.re * two_over_noise,
                im: z.im * two_over_noise,
            }
        })
        .collect();
    let fbb = f_bb * two_over_noise;
    let zero = TwoFloat::from(0.0);
    [
        [f_pq[0][0].re * b2, f_pq[0][1].re * b2, fpb[0].re, -fpb[0].im],
        [f_pq[1][0].re * b2, f_pq[1][1].re * b2, fpb[1].re, -fpb[1].im],
        [fpb[0].re, fpb[1].re, fbb, zero],
        [-fpb[0].im, -fpb[1].im, zero, fbb],
    ]
}

/// `[F^-1]_11 + [F^-1]_22` of a double-double information matrix.
pub fn position_bound(m: &[[TwoFloat; 4]; 4]) -> f64 {
    let (a, b, c, d) = (m[2][2], m[2][3], m[3][2], m[3][3]);
    let det_n = a * d - b * c;
    let inv = [[div(d, det_n), -div(b, det_n)], [-div(c, det_n), div(a, det_n)]];
    let mut schur = [[TwoFloat::from(0.0); 2]; 2];
    for p in 0..2 {
        for q in 0..2 {
            let mut acc = m[p][q];
            for i in 0..2 {
                for j in 0..2 {
                    acc -= m[p][2 + i] * inv[i][j] * m[q][2 + j];
                }
            }
            schur[p][q] = acc;
        }
    }
    let det = schur[0][0] * schur[1][1] - schur[0][1] * schur[1][0];
    f64::from(div(schur[0][0] + schur[1][1], det))
}
