use super::piecewise::{DedupSet, PiecewiseExp, Provenance};
use crate::cycles::ExtremeCycle;
use crate::error::{Error, Result};
use crate::ifs::AffineIfs;
use num_complex::Complex64;

/// Truncation of `{S_w e_{-c} : c extreme cycle point, w in L*}` to words of
/// length at most `max_len`.
///
/// Breadth-first closure of the exponentials `e_{-c}` under `S_l`; an element
/// already produced by a shorter word is kept once, with its first word as
/// provenance. Output order: by word length, then by letter order.
pub fn gen_fractal_onb(ifs: &AffineIfs, spectrum: &[f64], cycles: &[ExtremeCycle], max_len: usize) -> Vec<PiecewiseExp> {
    let n = ifs.len();
    let mut out: Vec<PiecewiseExp> = Vec::new();
    let mut seen = DedupSet::default();

    let mut layer = Vec::new();
    for cycle in cycles {
        for &c in &cycle.points {
            let root = PiecewiseExp::exponential(n, Complex64::new(1.0, 0.0), -c).with_provenance(Provenance {
                word: vec![],
                letters: vec![],
                cycle_point: c,
            });
            if seen.insert(&root, &out, out.len()) {
                out.push(root.clone());
                layer.push(root);
            }
        }
    }

    for _ in 0..max_len {
        let mut next = Vec::new();
        for elem in &layer {
            let prov = elem.provenance().expect("generated elements carry provenance").clone();
            for (li, &l) in spectrum.iter().enumerate() {
                let mut word = Vec::with_capacity(prov.word.len() + 1);
                word.push(li);
                word.extend_from_slice(&prov.word);
                let mut letters = Vec::with_capacity(word.len());
                letters.push(l);
                letters.extend_from_slice(&prov.letters);
                let child = elem.apply_isometry(ifs, l).with_provenance(Provenance {
                    word,
                    letters,
                    cycle_point: prov.cycle_point,
                });
                if seen.insert(&child, &out, out.len()) {
                    out.push(child.clone());
                    next.push(child);
                }
            }
        }
        if next.is_empty() {
            break;
        }
        layer = next;
    }
    out
}

/// Frequencies of the generated basis when `B`, `L` and `R` are integers, in
/// which case every element is a single exponential.
pub fn integer_spectrum(ifs: &AffineIfs, spectrum: &[f64], cycles: &[ExtremeCycle], max_len: usize) -> Result<Vec<f64>> {
    for &v in ifs
        .digits()
        .iter()
        .chain(spectrum)
        .chain(std::iter::once(&ifs.scale()))
    {
        if v.fract() != 0.0 {
            return Err(Error::NonIntegerInput(v));
        }
    }
    let mut freqs = gen_fractal_onb(ifs, spectrum, cycles, max_len)
        .iter()
        .map(|e| {
            e.as_exponential()
                // normalize -0.0, which arises from -R^n c at c = 0
                .map(|cell| cell.freq + 0.0)
                .ok_or_else(|| Error::InvalidArgument("generated element is not a single exponential".into()))
        })
        .collect::<Result<Vec<f64>>>()?;
    freqs.sort_by(f64::total_cmp);
    freqs.dedup();
    Ok(freqs)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::cycles::find_extreme_cycles;

    fn cantor_basis(max_len: usize) -> Vec<PiecewiseExp> {
        let ifs = AffineIfs::cantor();
        let l = [0.0, 0.75];
        let cycles = find_extreme_cycles(&ifs, &l, 12, 1e-9).unwrap();
        gen_fractal_onb(&ifs, &l, &cycles, max_len)
    }

    #[test]
    fn cantor_counts() {
        // 1 + 1 + 2 + 4 + 8 + 16 canonical words with no trailing 0
        assert_eq!(cantor_basis(5).len(), 32);
        assert_eq!(cantor_basis(0).len(), 1);
        for e in cantor_basis(5) {
            let word = &e.provenance().unwrap().word;
            assert!(word.last() != Some(&0), "{word:?}");
            assert!(e.is_unimodular(1e-12));
        }
    }

    #[test]
    fn cantor_coefficients_are_signs() {
        for e in cantor_basis(5) {
            for cell in e.cells() {
                assert!(cell.coef.im.abs() < 1e-12 && (cell.coef.re.abs() - 1.0).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn no_two_elements_coincide() {
        let basis = cantor_basis(6);
        for (i, a) in basis.iter().enumerate() {
            for b in &basis[i + 1..] {
                assert!(!a.same_function(b));
            }
        }
    }

    #[test]
    fn max_len_zero_gives_cycle_exponentials() {
        let ifs = AffineIfs::unit_interval(2);
        let cycles = find_extreme_cycles(&ifs, &[0.0, 1.0], 4, 1e-9).unwrap();
        let basis = gen_fractal_onb(&ifs, &[0.0, 1.0], &cycles, 0);
        let freqs: Vec<f64> = basis.iter().map(|e| e.as_exponential().unwrap().freq).collect();
        assert_eq!(freqs, vec![0.0, -1.0]);
    }

    #[test]
    fn lebesgue_frequencies_are_integers() {
        let ifs = AffineIfs::unit_interval(2);
        let l = [0.0, 1.0];
        let cycles = find_extreme_cycles(&ifs, &l, 6, 1e-9).unwrap();
        let freqs = integer_spectrum(&ifs, &l, &cycles, 3).unwrap();
        let expect: Vec<f64> = (-8..8).map(f64::from).collect();
        assert_eq!(freqs, expect);
        for max_len in 0..6 {
            for e in gen_fractal_onb(&ifs, &l, &cycles, max_len) {
                assert_eq!(e.depth(), 0);
            }
        }
    }

    #[test]
    fn scale_four_spectrum_prefix() {
        let ifs = AffineIfs::new(4.0, vec![0.0, 2.0]).unwrap();
        let l = [0.0, 1.0];
        let cycles = find_extreme_cycles(&ifs, &l, 8, 1e-9).unwrap();
        let freqs = integer_spectrum(&ifs, &l, &cycles, 4).unwrap();
        assert_eq!(freqs.len(), 16);
        assert_eq!(&freqs[..8], &[0.0, 1.0, 4.0, 5.0, 16.0, 17.0, 20.0, 21.0]);
    }

    #[test]
    fn trivial_spectrum_is_zero() {
        // with only the letter 0 every word collapses to e_0
        let ifs = AffineIfs::unit_interval(2);
        let zero_cycle = find_extreme_cycles(&ifs, &[0.0, 1.0], 1, 1e-9).unwrap()[..1].to_vec();
        assert_eq!(integer_spectrum(&ifs, &[0.0], &zero_cycle, 5).unwrap(), vec![0.0]);
    }

    #[test]
    fn integer_spectrum_rejects_fractions() {
        let ifs = AffineIfs::cantor();
        let cycles = find_extreme_cycles(&ifs, &[0.0, 0.75], 4, 1e-9).unwrap();
        assert_eq!(integer_spectrum(&ifs, &[0.0, 0.75], &cycles, 2), Err(Error::NonIntegerInput(0.75)));
    }
}
