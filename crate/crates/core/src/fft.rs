//! Radix-2 complex FFT used for short-time power spectra.

use alloc::vec::Vec;
use core::f64::consts::PI;

/// In-place iterative radix-2 FFT plan of a fixed power-of-two size.
#[derive(Debug, Clone)]
pub struct Fft {
    size: usize,
    twiddles: Vec<(f64, f64)>,
    bitrev: Vec<usize>,
}

impl Fft {
    /// Panics if `size` is not a power of two.
    pub fn new(size: usize) -> Self {
        assert!(size.is_power_of_two(), "FFT size {size} is not a power of two");
        let bits = size.trailing_zeros();
        let bitrev = (0..size)
            .map(|i| if bits == 0 { 0 } else { i.reverse_bits() >> (usize::BITS - bits) })
            .collect();
        let twiddles = (0..size / 2)
            .map(|k| {
                let a = -2.0 * PI * k as f64 / size as f64;
                (libm::cos(a), libm::sin(a))
            })
            .collect();
        Self { size, twiddles, bitrev }
    }

    pub fn size(&self) -> usize {
        self.size
    }

    pub fn transform(&self, re: &mut [f64], im: &mut [f64]) {
        let n = self.size;
        assert!(re.len() == n && im.len() == n);
        for i in 0..n {
            let j = self.bitrev[i];
            if j > i {
                re.swap(i, j);
                im.swap(i, j);
            }
        }
        let mut len = 2;
        while len <= n {
            let step = n / len;
            for start in (0..n).step_by(len) {
                for k in 0..len / 2 {
                    let (wr, wi) = self.twiddles[k * step];
                    let a = start + k;
                    let b = a + len / 2;
                    let tr = re[b] * wr - im[b] * wi;
                    let ti = re[b] * wi + im[b] * wr;
                    re[b] = re[a] - tr;
                    im[b] = im[a] - ti;
                    re[a] += tr;
                    im[a] += ti;
                }
            }
            len <<= 1;
        }
    }

    /// `|X[k]|^2` for `k = 0..=size/2` of a real frame zero-padded to the FFT size.
    pub fn power_spectrum(&self, frame: &[f64], out: &mut Vec<f64>) {
        let n = self.size;
        let mut re = alloc::vec![0.0; n];
        let mut im = alloc::vec![0.0; n];
        re[..frame.len()].copy_from_slice(frame);
        self.transform(&mut re, &mut im);
        out.clear();
        out.extend((0..=n / 2).map(|k| re[k] * re[k] + im[k] * im[k]));
    }
}
