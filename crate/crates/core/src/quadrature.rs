//! Globally adaptive tensor-product Gauss–Kronrod cubature on boxes.
//!
//! Each cell is integrated with the 15-point Kronrod rule on every axis. The
//! 7-point Gauss rule shares its nodes, so replacing the Kronrod weights on a
//! single axis by Gauss weights gives a per-axis error estimate from the same
//! function values; cells are bisected along the axis with the largest one.

use std::cmp::Ordering;
use std::collections::BinaryHeap;

use crate::scalar::Real;
use crate::sum::CompensatedSum;

const XGK: [f64; 8] = [
    0.991_455_371_120_812_639_206_854_697_526_329,
    0.949_107_912_342_758_524_526_189_684_047_851,
    0.864_864_423_359_769_072_789_712_788_640_926,
    0.741_531_185_599_394_439_863_864_773_280_788,
    0.586_087_235_467_691_130_294_144_845_693_013,
    0.405_845_151_377_397_166_906_606_412_076_961,
    0.207_784_955_007_898_467_600_689_403_773_245,
    0.0,
];
const WGK: [f64; 8] = [
    0.022_935_322_010_529_224_963_732_008_058_970,
    0.063_092_092_629_978_553_290_700_663_189_204,
    0.104_790_010_322_250_183_839_876_322_541_518,
    0.140_653_259_715_525_918_745_189_590_510_238,
    0.169_004_726_639_267_902_826_583_426_598_550,
    0.190_350_578_064_785_409_913_256_402_421_014,
    0.204_432_940_075_298_892_414_161_999_234_649,
    0.209_482_141_084_727_828_012_999_174_891_714,
];
/// Gauss weights at XGK[1], XGK[3], XGK[5], XGK[7].
const WG: [f64; 4] = [
    0.129_484_966_168_869_693_270_611_432_679_082,
    0.279_705_391_489_276_667_901_467_771_423_780,
    0.381_830_050_505_118_944_950_369_775_488_975,
    0.417_959_183_673_469_387_755_102_040_816_327,
];

/// 15 nodes on [-1, 1] with Kronrod and embedded Gauss weights.
fn rule<F: Real>() -> ([F; 15], [F; 15], [F; 15]) {
    let mut x = [F::zero(); 15];
    let mut wk = [F::zero(); 15];
    let mut wg = [F::zero(); 15];
    for i in 0..7 {
        x[i] = -F::lit(XGK[i]);
        x[14 - i] = F::lit(XGK[i]);
        wk[i] = F::lit(WGK[i]);
        wk[14 - i] = F::lit(WGK[i]);
        if i % 2 == 1 {
            wg[i] = F::lit(WG[i / 2]);
            wg[14 - i] = F::lit(WG[i / 2]);
        }
    }
    x[7] = F::zero();
    wk[7] = F::lit(WGK[7]);
    wg[7] = F::lit(WG[3]);
    (x, wk, wg)
}

/// Result of an adaptive integration.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Cubature<F> {
    pub value: F,
    pub error: F,
    pub evaluations: usize,
    pub converged: bool,
}

#[derive(Debug, Clone)]
struct Cell<F> {
    lo: Vec<F>,
    hi: Vec<F>,
    value: F,
    error: F,
    split_axis: usize,
}

struct Keyed(f64, usize);

impl PartialEq for Keyed {
    fn eq(&self, other: &Self) -> bool {
        self.cmp(other) == Ordering::Equal
    }
}
impl Eq for Keyed {}
impl PartialOrd for Keyed {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}
impl Ord for Keyed {
    fn cmp(&self, other: &Self) -> Ordering {
        self.0.total_cmp(&other.0).then_with(|| other.1.cmp(&self.1))
    }
}

struct Rule<F> {
    x: [F; 15],
    wk: [F; 15],
    wg: [F; 15],
}

impl<F: Real> Rule<F> {
    fn points_per_cell(d: usize) -> usize {
        15usize.pow(d as u32)
    }

    fn cell<G: FnMut(&[F]) -> F>(&self, f: &mut G, lo: &[F], hi: &[F]) -> Cell<F> {
        let d = lo.len();
        let half: Vec<F> = lo.iter().zip(hi).map(|(&a, &b)| (b - a) * F::lit(0.5)).collect();
        let mid: Vec<F> = lo.iter().zip(hi).map(|(&a, &b)| (a + b) * F::lit(0.5)).collect();
        let mut idx = vec![0usize; d];
        let mut y = vec![F::zero(); d];
        let mut kron = CompensatedSum::new();
        let mut gauss: Vec<CompensatedSum<F>> = vec![CompensatedSum::new(); d];
        for _ in 0..Self::points_per_cell(d) {
            let mut wk = F::one();
            for a in 0..d {
                y[a] = mid[a] + half[a] * self.x[idx[a]];
                wk = wk * self.wk[idx[a]];
            }
            let fx = f(&y);
            kron.add(wk * fx);
            for a in 0..d {
                let g = self.wg[idx[a]];
                if g != F::zero() {
                    gauss[a].add(wk / self.wk[idx[a]] * g * fx);
                }
            }
            for a in (0..d).rev() {
                idx[a] += 1;
                if idx[a] < 15 {
                    break;
                }
                idx[a] = 0;
            }
        }
        let volume = half.iter().fold(F::one(), |acc, &h| acc * h);
        let k = kron.value();
        let mut error = F::zero();
        let mut worst = (F::zero(), 0usize);
        for (a, g) in gauss.iter().enumerate() {
            let e = (k - g.value()).abs() * volume;
            error = error + e;
            if e > worst.0 {
                worst = (e, a);
            }
        }
        if worst.0 == F::zero() {
            // Flat in every axis estimate: split the longest side.
            worst.1 = (0..d)
                .max_by(|&a, &b| half[a].partial_cmp(&half[b]).unwrap_or(Ordering::Equal))
                .unwrap_or(0);
        }
        Cell {
            lo: lo.to_vec(),
            hi: hi.to_vec(),
            value: k * volume,
            error,
            split_axis: worst.1,
        }
    }
}

/// Integrates `f` over the union of the given disjoint boxes to absolute
/// tolerance `tol`, spending at most `max_evals` function evaluations.
pub fn integrate_boxes<F, G>(mut f: G, boxes: &[(Vec<F>, Vec<F>)], tol: F, max_evals: usize) -> Cubature<F>
where
    F: Real,
    G: FnMut(&[F]) -> F,
{
    let (x, wk, wg) = rule::<F>();
    let rule = Rule { x, wk, wg };
    let d = boxes.first().map_or(1, |b| b.0.len());
    let per_cell = Rule::<F>::points_per_cell(d);

    let mut cells: Vec<Cell<F>> = Vec::new();
    let mut heap = BinaryHeap::new();
    let mut evaluations = 0usize;
    for (lo, hi) in boxes {
        let c = rule.cell(&mut f, lo, hi);
        evaluations += per_cell;
        heap.push(Keyed(c.error.to_f64_lossy(), cells.len()));
        cells.push(c);
    }
    let mut err_total: f64 = cells.iter().map(|c| c.error.to_f64_lossy()).sum();
    let mut val_total: f64 = cells.iter().map(|c| c.value.to_f64_lossy()).sum();
    let tol64 = tol.to_f64_lossy();
    let floor = |v: f64| tol64.max(50.0 * F::epsilon().to_f64_lossy() * v.abs());

    let mut converged = err_total <= floor(val_total);
    while !converged && evaluations + 2 * per_cell <= max_evals {
        let Some(Keyed(_, i)) = heap.pop() else { break };
        let parent = cells[i].clone();
        let axis = parent.split_axis;
        let cut = (parent.lo[axis] + parent.hi[axis]) * F::lit(0.5);
        let mut hi_left = parent.hi.clone();
        hi_left[axis] = cut;
        let mut lo_right = parent.lo.clone();
        lo_right[axis] = cut;
        let left = rule.cell(&mut f, &parent.lo, &hi_left);
        let right = rule.cell(&mut f, &lo_right, &parent.hi);
        evaluations += 2 * per_cell;
        err_total += (left.error + right.error).to_f64_lossy() - parent.error.to_f64_lossy();
        val_total += (left.value + right.value).to_f64_lossy() - parent.value.to_f64_lossy();
        heap.push(Keyed(left.error.to_f64_lossy(), i));
        cells[i] = left;
        heap.push(Keyed(right.error.to_f64_lossy(), cells.len()));
        cells.push(right);
        converged = err_total <= floor(val_total);
    }

    let mut value = CompensatedSum::new();
    let mut error = CompensatedSum::new();
    for c in &cells {
        value.add(c.value);
        error.add(c.error);
    }
    let value = value.value();
    let error = error.value();
    Cubature {
        value,
        error,
        evaluations,
        converged: error.to_f64_lossy() <= floor(value.to_f64_lossy()),
    }
}
