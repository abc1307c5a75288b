//! Globally adaptive Gauss–Kronrod quadrature for vector-valued integrands.
//!
//! The interval with the largest error estimate is bisected until the summed
//! estimate drops below `max(abs_tol, rel_tol * |I|)`. Integrands return a
//! fixed-size array so a whole Gramian can be integrated in one pass; the
//! error of an interval is the largest componentwise |Kronrod − Gauss|.
#![allow(clippy::excessive_precision)]

use std::cmp::Ordering;
use std::collections::BinaryHeap;

use crate::error::{Error, Result};

/// Positive Kronrod abscissae (descending, ending at 0) with their weights,
/// and the Gauss weights of the embedded rule. Gauss nodes are the Kronrod
/// nodes at odd indices.
struct KronrodTable {
    nodes: &'static [f64],
    kronrod: &'static [f64],
    gauss: &'static [f64],
    /// Weight of the centre node in the Gauss rule (0 when the Gauss rule
    /// has an even number of points).
    gauss_centre: f64,
}

const GK15: KronrodTable = KronrodTable {
    nodes: &[
        0.991_455_371_120_812_639_206_854_697_526_329,
        0.949_107_912_342_758_524_526_189_684_047_851,
        0.864_864_423_359_769_072_789_712_788_640_926,
        0.741_531_185_599_394_439_863_864_773_280_788,
        0.586_087_235_467_691_130_294_144_838_258_730,
        0.405_845_151_377_397_166_906_606_412_076_961,
        0.207_784_955_007_898_467_600_689_403_773_245,
        0.0,
    ],
    kronrod: &[
        0.022_935_322_010_529_224_963_732_008_058_970,
        0.063_092_092_629_978_553_290_700_663_189_204,
        0.104_790_010_322_250_183_839_876_322_541_518,
        0.140_653_259_715_525_918_745_189_590_510_238,
        0.169_004_726_639_267_902_826_583_426_598_550,
        0.190_350_578_064_785_409_913_256_402_421_014,
        0.204_432_940_075_298_892_414_161_999_234_649,
        0.209_482_141_084_727_828_012_999_174_891_714,
    ],
    gauss: &[
        0.129_484_966_168_869_693_270_611_432_679_082,
        0.279_705_391_489_276_667_901_467_771_423_780,
        0.381_830_050_505_118_944_950_369_775_488_975,
    ],
    gauss_centre: 0.417_959_183_673_469_387_755_102_040_816_327,
};

const GK21: KronrodTable = KronrodTable {
    nodes: &[
        0.995_657_163_025_808_080_735_527_280_689_003,
        0.973_906_528_517_171_720_077_964_012_084_452,
        0.930_157_491_355_708_226_001_207_180_059_508,
        0.865_063_366_688_984_510_732_096_688_423_493,
        0.780_817_726_586_416_897_063_717_578_345_042,
        0.679_409_568_299_024_406_234_327_365_114_874,
        0.562_757_134_668_604_683_339_000_099_272_694,
        0.433_395_394_129_247_190_799_265_943_165_784,
        0.294_392_862_701_460_198_131_126_603_103_866,
        0.148_874_338_981_631_210_884_826_001_129_720,
        0.0,
    ],
    kronrod: &[
        0.011_694_638_867_371_874_278_064_396_062_192,
        0.032_558_162_307_964_727_478_818_972_459_390,
        0.054_755_896_574_351_996_031_381_300_244_580,
        0.075_039_674_810_919_952_767_043_140_916_190,
        0.093_125_454_583_697_605_535_065_465_083_366,
        0.109_387_158_802_297_641_899_210_590_325_805,
        0.123_491_976_262_065_851_077_813_519_373_441,
        0.134_709_217_311_473_325_928_054_001_771_707,
        0.142_775_938_577_060_080_797_094_273_138_717,
        0.147_739_104_901_338_491_374_841_515_972_068,
        0.149_445_554_002_916_905_664_936_468_389_821,
    ],
    gauss: &[
        0.066_671_344_308_688_137_593_568_809_893_332,
        0.149_451_349_150_580_593_145_776_339_657_697,
        0.219_086_362_515_982_043_995_534_934_228_163,
        0.269_266_719_309_996_355_091_226_921_569_469,
        0.295_524_224_714_752_870_173_892_994_651_338,
    ],
    gauss_centre: 0.0,
};

/// Kronrod extension used on each panel.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Rule {
    /// 7-point Gauss embedded in 15-point Kronrod.
    Gk15,
    /// 10-point Gauss embedded in 21-point Kronrod.
    #[default]
    Gk21,
}

impl Rule {
    fn table(self) -> &'static KronrodTable {
        match self {
            Rule::Gk15 => &GK15,
            Rule::Gk21 => &GK21,
        }
    }

    /// Integrand evaluations per panel.
    pub fn points(self) -> usize {
        2 * self.table().nodes.len() - 1
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QuadOptions {
    pub abs_tol: f64,
    pub rel_tol: f64,
    pub max_intervals: usize,
    pub rule: Rule,
}

impl Default for QuadOptions {
    fn default() -> Self {
        Self {
            abs_tol: 1e-12,
            rel_tol: 0.0,
            max_intervals: 4000,
            rule: Rule::Gk21,
        }
    }
}

impl QuadOptions {
    pub fn with_abs_tol(mut self, tol: f64) -> Self {
        self.abs_tol = tol;
        self
    }

    pub fn with_rel_tol(mut self, tol: f64) -> Self {
        self.rel_tol = tol;
        self
    }

    pub fn with_rule(mut self, rule: Rule) -> Self {
        self.rule = rule;
        self
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Estimate<const N: usize> {
    pub value: [f64; N],
    /// Summed componentwise error bound over all panels.
    pub error: f64,
    pub intervals: usize,
    pub evaluations: usize,
}

struct Panel<const N: usize> {
    a: f64,
    b: f64,
    value: [f64; N],
    error: f64,
}

impl<const N: usize> PartialEq for Panel<N> {
    fn eq(&self, other: &Self) -> bool {
        self.error.total_cmp(&other.error) == Ordering::Equal
    }
}

impl<const N: usize> Eq for Panel<N> {}

impl<const N: usize> PartialOrd for Panel<N> {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl<const N: usize> Ord for Panel<N> {
    fn cmp(&self, other: &Self) -> Ordering {
        self.error.total_cmp(&other.error)
    }
}

fn apply_rule<const N: usize, F>(f: &F, a: f64, b: f64, table: &KronrodTable) -> Panel<N>
where
    F: Fn(f64) -> [f64; N],
{
    let centre = 0.5 * (a + b);
    let half = 0.5 * (b - a);
    let mut kronrod = [0.0; N];
    let mut gauss = [0.0; N];
    let last = table.nodes.len() - 1;

    let fc = f(centre);
    for c in 0..N {
        kronrod[c] = table.kronrod[last] * fc[c];
        gauss[c] = table.gauss_centre * fc[c];
    }
    for (j, &x) in table.nodes[..last].iter().enumerate() {
        let f1 = f(centre - half * x);
        let f2 = f(centre + half * x);
        let gauss_weight = if j % 2 == 1 { table.gauss[j / 2] } else { 0.0 };
        for c in 0..N {
            let pair = f1[c] + f2[c];
            kronrod[c] += table.kronrod[j] * pair;
            gauss[c] += gauss_weight * pair;
        }
    }

    let mut error = 0.0f64;
    let mut value = [0.0; N];
    for c in 0..N {
        value[c] = kronrod[c] * half;
        error = error.max(((kronrod[c] - gauss[c]) * half).abs());
    }
    Panel { a, b, value, error }
}

/// Integrates a vector-valued function over `[a, b]`.
pub fn integrate<const N: usize, F>(f: F, a: f64, b: f64, opts: &QuadOptions) -> Result<Estimate<N>>
where
    F: Fn(f64) -> [f64; N],
{
    let table = opts.rule.table();
    let per_panel = opts.rule.points();
    if a == b {
        return Ok(Estimate {
            value: [0.0; N],
            error: 0.0,
            intervals: 0,
            evaluations: 0,
        });
    }

    let first = apply_rule(&f, a, b, table);
    let mut total = first.value;
    let mut total_error = first.error;
    let mut evaluations = per_panel;
    let mut heap = BinaryHeap::new();
    heap.push(first);

    let target = |total: &[f64; N]| {
        let scale = total.iter().fold(0.0f64, |m, v| m.max(v.abs()));
        opts.abs_tol.max(opts.rel_tol * scale)
    };

    while total_error > target(&total) {
        if heap.len() >= opts.max_intervals {
            return Err(Error::Quadrature {
                estimate: total[0],
                error: total_error,
                tolerance: target(&total),
                intervals: heap.len(),
            });
        }
        let worst = heap.pop().expect("heap holds at least one panel");
        let mid = 0.5 * (worst.a + worst.b);
        // Interval can no longer be split in f64.
        if mid <= worst.a || mid >= worst.b {
            return Err(Error::Quadrature {
                estimate: total[0],
                error: total_error,
                tolerance: target(&total),
                intervals: heap.len() + 1,
            });
        }
        let left = apply_rule(&f, worst.a, mid, table);
        let right = apply_rule(&f, mid, worst.b, table);
        evaluations += 2 * per_panel;
        for (c, t) in total.iter_mut().enumerate() {
            *t += left.value[c] + right.value[c] - worst.value[c];
        }
        total_error += left.error + right.error - worst.error;
        heap.push(left);
        heap.push(right);
    }

    // Re-sum from the panels; the running total drifts by rounding.
    let mut value = [0.0; N];
    let mut error = 0.0;
    let mut panels: Vec<_> = heap.into_vec();
    panels.sort_by(|p, q| p.a.total_cmp(&q.a));
    for p in &panels {
        for (v, pv) in value.iter_mut().zip(&p.value) {
            *v += pv;
        }
        error += p.error;
    }
    Ok(Estimate {
        value,
        error,
        intervals: panels.len(),
        evaluations,
    })
}

/// Scalar convenience wrapper around [`integrate`].
pub fn integrate_scalar<F>(f: F, a: f64, b: f64, opts: &QuadOptions) -> Result<f64>
where
    F: Fn(f64) -> f64,
{
    integrate(|x| [f(x)], a, b, opts).map(|e| e.value[0])
}

/// Nested integration over the rectangle `[ax, bx] × [ay, by]`, inner
/// variable `y`.
///
/// The inner integrals are solved to a tighter absolute tolerance so their
/// error does not dominate the outer estimate.
pub fn integrate_rect<const N: usize, F>(
    f: F,
    (ax, bx): (f64, f64),
    (ay, by): (f64, f64),
    opts: &QuadOptions,
) -> Result<Estimate<N>>
where
    F: Fn(f64, f64) -> [f64; N],
{
    let width = (bx - ax).abs().max(f64::MIN_POSITIVE);
    let inner_opts = QuadOptions {
        abs_tol: 0.1 * opts.abs_tol / width,
        rel_tol: 0.1 * opts.rel_tol,
        ..*opts
    };
    let inner_failure = std::cell::Cell::new(None);
    let outer = integrate(
        |x| match integrate(|y| f(x, y), ay, by, &inner_opts) {
            Ok(e) => e.value,
            Err(err) => {
                inner_failure.set(Some(err));
                [f64::NAN; N]
            }
        },
        ax,
        bx,
        opts,
    );
    if let Some(err) = inner_failure.take() {
        return Err(err);
    }
    outer
}

#[cfg(test)]
mod tests {
    use super::*;

    fn exact_monomial(k: u32) -> f64 {
        if k % 2 == 0 {
            2.0 / (k as f64 + 1.0)
        } else {
            0.0
        }
    }

    #[test]
    fn single_panel_integrates_polynomials_exactly() {
        for (rule, degree) in [(Rule::Gk15, 22), (Rule::Gk21, 30)] {
            let table = rule.table();
            for k in 0..=degree {
                let p: Panel<1> = apply_rule(&|x: f64| [x.powi(k as i32)], -1.0, 1.0, table);
                assert!(
                    (p.value[0] - exact_monomial(k)).abs() < 1e-14,
                    "{rule:?} degree {k}: {}",
                    p.value[0]
                );
            }
        }
    }

    #[test]
    fn embedded_gauss_rule_has_zero_error_on_low_degree() {
        // 7-point Gauss is exact to degree 13, 10-point to degree 19.
        for (rule, degree) in [(Rule::Gk15, 13), (Rule::Gk21, 19)] {
            let p: Panel<1> = apply_rule(&|x: f64| [x.powi(degree)], 0.0, 1.0, rule.table());
            assert!(p.error < 1e-15, "{rule:?}: {}", p.error);
        }
    }

    #[test]
    fn lorentzian_to_tight_tolerance() {
        let opts = QuadOptions::default().with_abs_tol(1e-13);
        let got = integrate_scalar(|x| 1.0 / (1.0 + x * x), -50.0, 50.0, &opts).unwrap();
        let exact = 2.0 * 50f64.atan();
        assert!((got - exact).abs() < 1e-12, "{got} vs {exact}");
    }

    #[test]
    fn sharp_peak_forces_subdivision() {
        let eps = 1e-3;
        let opts = QuadOptions::default().with_abs_tol(1e-10);
        let est = integrate(|x| [eps / (x * x + eps * eps)], -1.0, 1.0, &opts).unwrap();
        let exact = 2.0 * (1.0 / eps).atan();
        assert!((est.value[0] - exact).abs() < 1e-9);
        assert!(est.intervals > 1);
    }

    #[test]
    fn both_rules_agree() {
        let f = |x: f64| (3.0 * x).sin() * (-x * x).exp();
        let a = integrate_scalar(f, -2.0, 3.0, &QuadOptions::default().with_rule(Rule::Gk15)).unwrap();
        let b = integrate_scalar(f, -2.0, 3.0, &QuadOptions::default().with_rule(Rule::Gk21)).unwrap();
        assert!((a - b).abs() < 1e-12);
    }

    #[test]
    fn rectangle_separable() {
        let opts = QuadOptions::default().with_abs_tol(1e-12);
        let est = integrate_rect(|x, y| [x.exp() * y.cos(), x * y], (0.0, 1.0), (0.0, 2.0), &opts).unwrap();
        let exact0 = (1f64.exp() - 1.0) * 2f64.sin();
        assert!((est.value[0] - exact0).abs() < 1e-12);
        assert!((est.value[1] - 1.0).abs() < 1e-12);
    }

    #[test]
    fn budget_exhaustion_is_reported() {
        let opts = QuadOptions {
            abs_tol: 1e-15,
            rel_tol: 0.0,
            max_intervals: 3,
            rule: Rule::Gk15,
        };
        let err = integrate_scalar(|x| x.abs().sqrt().recip().min(1e8), -1.0, 1.0, &opts).unwrap_err();
        assert!(matches!(err, Error::Quadrature { .. }), "{err}");
    }

    #[test]
    fn empty_interval() {
        let est = integrate(|x| [x], 2.0, 2.0, &QuadOptions::default()).unwrap();
        assert_eq!(est.value, [0.0]);
    }
}
