use std::f64::consts::PI;

use crate::error::{check_len, invalid, Result};
use crate::mathkit::C64;

/// Row-major `rows x cols` grid; rows index subcarriers, columns symbols.
#[derive(Debug, Clone, PartialEq)]
pub struct Grid<T> {
    pub rows: usize,
    pub cols: usize,
    pub data: Vec<T>,
}

impl<T: Clone> Grid<T> {
    pub fn filled(rows: usize, cols: usize, value: T) -> Self {
        Self {
            rows,
            cols,
            data: vec![value; rows * cols],
        }
    }

    pub fn from_rows(rows: Vec<Vec<T>>) -> Result<Self> {
        let cols = rows.first().map_or(0, Vec::len);
        for r in &rows {
            check_len("grid row", cols, r.len())?;
        }
        Ok(Self {
            rows: rows.len(),
            cols,
            data: rows.into_iter().flatten().collect(),
        })
    }

    pub fn get(&self, r: usize, c: usize) -> &T {
        &self.data[r * self.cols + c]
    }

    pub fn set(&mut self, r: usize, c: usize, v: T) {
        self.data[r * self.cols + c] = v;
    }
}

/// One frame on the simulated subcarriers: data symbols, transmitted
/// differential symbols, received vectors and decision variables
/// (column `n - 1` of `z` belongs to symbol `n >= 1`).
#[derive(Debug, Clone)]
pub struct FrameGrid {
    pub s: Grid<C64>,
    pub x: Grid<C64>,
    pub y: Grid<Vec<C64>>,
    pub z: Grid<C64>,
}

/// Unit-modulus PSK points `exp(j 2 pi i / order)`.
pub fn dpsk_constellation(order: usize) -> Result<Vec<C64>> {
    check_order(order)?;
    Ok((0..order)
        .map(|i| C64::from_polar(1.0, 2.0 * PI * i as f64 / order as f64))
        .collect())
}

pub(crate) fn check_order(order: usize) -> Result<()> {
    if matches!(order, 2 | 4 | 8 | 16) {
        Ok(())
    } else {
        Err(invalid("constellation", format!("order {order} not in {{2, 4, 8, 16}}")))
    }
}

fn check_unit(s: &Grid<C64>) -> Result<()> {
    if s.data.iter().all(|z| (z.norm() - 1.0).abs() < 1e-9) {
        Ok(())
    } else {
        Err(invalid("symbols", "data symbols must be unit modulus"))
    }
}

/// Time-domain differential encoding along each row:
/// `x[k][0] = sqrt(Px) s[k][0]`, `x[k][n] = x[k][n-1] s[k][n]`.
pub fn diff_encode(s: &Grid<C64>, px: f64) -> Result<Grid<C64>> {
    check_unit(s)?;
    let amp = px.sqrt();
    let mut x = s.clone();
    for k in 0..s.rows {
        let mut acc = C64::new(amp, 0.0);
        for n in 0..s.cols {
            acc *= s.get(k, n);
            x.set(k, n, acc);
        }
    }
    Ok(x)
}

/// Same recursion running across subcarriers at each symbol.
pub fn diff_encode_frequency(s: &Grid<C64>, px: f64) -> Result<Grid<C64>> {
    check_unit(s)?;
    let amp = px.sqrt();
    let mut x = s.clone();
    for n in 0..s.cols {
        let mut acc = C64::new(amp, 0.0);
        for k in 0..s.rows {
            acc *= s.get(k, n);
            x.set(k, n, acc);
        }
    }
    Ok(x)
}

/// `y_prev^H y_cur / (M B)`.
pub fn diff_decode(y_prev: &[C64], y_cur: &[C64], ris_elements: usize, bs_antennas: usize) -> Result<C64> {
    check_len("received vector", y_prev.len(), y_cur.len())?;
    let mb = (ris_elements * bs_antennas) as f64;
    Ok(crate::mathkit::vdot(y_prev, y_cur) / mb)
}

/// Splits `y_prev^H y_cur` with `y = q x + v` into signal, two
/// signal-noise cross terms and noise-noise term. The four terms add up to
/// `y_prev^H y_cur`.
pub fn decompose_terms(
    q_prev: &[C64],
    q_cur: &[C64],
    x_prev: C64,
    x_cur: C64,
    v_prev: &[C64],
    v_cur: &[C64],
) -> [C64; 4] {
    use crate::mathkit::vdot;
    [
        x_prev.conj() * x_cur * vdot(q_prev, q_cur),
        x_prev.conj() * vdot(q_prev, v_cur),
        x_cur * vdot(v_prev, q_cur),
        vdot(v_prev, v_cur),
    ]
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Decision {
    pub index: usize,
    /// `z` was exactly zero, so the index is arbitrary (0).
    pub degenerate: bool,
}

/// Nearest PSK point by angle. An argument exactly between two points
/// goes to the one reached first counter-clockwise from 0 (the lower index
/// except across the wrap).
pub fn decide_psk(z: C64, order: usize) -> Decision {
    if z.re == 0.0 && z.im == 0.0 {
        return Decision {
            index: 0,
            degenerate: true,
        };
    }
    let step = 2.0 * PI / order as f64;
    let x = z.arg().rem_euclid(2.0 * PI) / step;
    let lower = x.floor();
    let idx = if x - lower > 0.5 { lower as usize + 1 } else { lower as usize };
    Decision {
        index: idx % order,
        degenerate: false,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mathkit::RngStream;

    fn c(re: f64, im: f64) -> C64 {
        C64::new(re, im)
    }

    #[test]
    fn constellations() {
        let b = dpsk_constellation(2).unwrap();
        assert!((b[0] - c(1.0, 0.0)).norm() < 1e-15 && (b[1] - c(-1.0, 0.0)).norm() < 1e-15);
        let q = dpsk_constellation(4).unwrap();
        for (p, e) in q.iter().zip([c(1.0, 0.0), c(0.0, 1.0), c(-1.0, 0.0), c(0.0, -1.0)]) {
            assert!((p - e).norm() < 1e-15);
        }
        for m in [2, 4, 8, 16] {
            assert!(dpsk_constellation(m).unwrap().iter().all(|p| (p.norm() - 1.0).abs() < 1e-15));
        }
        assert!(dpsk_constellation(3).is_err());
        assert!(dpsk_constellation(32).is_err());
    }

    #[test]
    fn encode_examples() {
        let ones = Grid::filled(2, 3, c(1.0, 0.0));
        let x = diff_encode(&ones, 4.0).unwrap();
        assert!(x.data.iter().all(|z| *z == c(2.0, 0.0)));
        let s = Grid::from_rows(vec![vec![c(1.0, 0.0), c(0.0, 1.0), c(0.0, 1.0)]]).unwrap();
        let x = diff_encode(&s, 1.0).unwrap();
        for (a, e) in x.data.iter().zip([c(1.0, 0.0), c(0.0, 1.0), c(-1.0, 0.0)]) {
            assert!((a - e).norm() < 1e-15);
        }
        let bad = Grid::filled(1, 2, c(2.0, 0.0));
        assert!(diff_encode(&bad, 1.0).is_err());
    }

    #[test]
    fn encode_preserves_modulus() {
        let mut rng = RngStream::new(1, 0);
        let pts = dpsk_constellation(8).unwrap();
        let s = Grid {
            rows: 3,
            cols: 50,
            data: (0..150).map(|_| pts[rng.index(8)]).collect(),
        };
        for x in [diff_encode(&s, 0.3).unwrap(), diff_encode_frequency(&s, 0.3).unwrap()] {
            assert!(x.data.iter().all(|z| (z.norm() - 0.3f64.sqrt()).abs() < 1e-12));
        }
        let xf = diff_encode_frequency(&s, 1.0).unwrap();
        for n in 0..50 {
            for k in 1..3 {
                assert!((xf.get(k, n) - xf.get(k - 1, n) * s.get(k, n)).norm() < 1e-12);
            }
        }
    }

    #[test]
    fn decode_examples() {
        let e1 = [c(1.0, 0.0)];
        assert_eq!(diff_decode(&e1, &e1, 1, 1).unwrap(), c(1.0, 0.0));
        assert_eq!(diff_decode(&[c(1.0, 2.0), c(0.5, 0.0)], &[c(0.0, 0.0); 2], 4, 2).unwrap(), c(0.0, 0.0));
        assert!(diff_decode(&e1, &[c(1.0, 0.0); 2], 1, 1).is_err());
    }

    #[test]
    fn noiseless_decode_has_symbol_phase() {
        let mut rng = RngStream::new(2, 0);
        let (b, m, px) = (4, 16, 0.01_f64);
        let q: Vec<C64> = (0..b).map(|_| rng.complex_normal(3.0)).collect();
        let s = C64::from_polar(1.0, 1.1);
        let x_prev = C64::from_polar(px.sqrt(), 0.4);
        let x_cur = x_prev * s;
        let y_prev: Vec<C64> = q.iter().map(|z| z * x_prev).collect();
        let y_cur: Vec<C64> = q.iter().map(|z| z * x_cur).collect();
        let z = diff_decode(&y_prev, &y_cur, m, b).unwrap();
        let expect = s * (crate::mathkit::norm_sqr(&q) * px / (m * b) as f64);
        assert!((z - expect).norm() < 1e-14 * expect.norm());
        assert!((z.arg() - s.arg()).abs() < 1e-12);
    }

    #[test]
    fn terms_sum_to_correlation() {
        let mut rng = RngStream::new(3, 0);
        let b = 5;
        let mut draw = |n: usize| (0..n).map(|_| rng.complex_normal(1.0)).collect::<Vec<_>>();
        let (qp, qc, vp, vc) = (draw(b), draw(b), draw(b), draw(b));
        let (xp, xc) = (C64::from_polar(0.7, 0.2), C64::from_polar(0.7, 2.0));
        let yp: Vec<C64> = qp.iter().zip(&vp).map(|(q, v)| q * xp + v).collect();
        let yc: Vec<C64> = qc.iter().zip(&vc).map(|(q, v)| q * xc + v).collect();
        let t = decompose_terms(&qp, &qc, xp, xc, &vp, &vc);
        let sum: C64 = t.iter().sum();
        let (m, bb) = (3, b);
        let z = diff_decode(&yp, &yc, m, bb).unwrap() * (m * bb) as f64;
        assert!((sum - z).norm() < 1e-12);

        let zero = vec![C64::new(0.0, 0.0); b];
        let t = decompose_terms(&qp, &qc, xp, xc, &zero, &zero);
        assert_eq!(&t[1..], &[C64::new(0.0, 0.0); 3]);
        let t = decompose_terms(&zero, &zero, xp, xc, &vp, &vc);
        assert_eq!(&t[..3], &[C64::new(0.0, 0.0); 3]);
        assert_eq!(t[3], crate::mathkit::vdot(&vp, &vc));
    }

    #[test]
    fn decisions() {
        assert_eq!(decide_psk(c(1.0, 0.0), 4).index, 0);
        assert_eq!(decide_psk(C64::from_polar(1.0, PI / 4.0), 4).index, 0);
        let d = decide_psk(c(0.0, 0.0), 4);
        assert!(d.degenerate && d.index == 0);
        assert_eq!(decide_psk(c(-1.0, 0.01), 2).index, 1);
        assert_eq!(decide_psk(c(0.3, -0.01), 8).index, 0);
        let mut rng = RngStream::new(4, 0);
        for _ in 0..1000 {
            let z = rng.complex_normal(1.0);
            let rot = z * C64::new(0.0, 1.0);
            assert_eq!(decide_psk(rot, 4).index, (decide_psk(z, 4).index + 1) % 4);
        }
    }
}
