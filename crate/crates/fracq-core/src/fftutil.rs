//! In-place 3D complex FFT over x₁-fastest flattened data, one axis at a
//! time. Lanes are independent, so each axis pass parallelizes over disjoint
//! lane groups; the inverse transform applies the 1/N normalization itself.

use rayon::prelude::*;
use rustfft::num_complex::Complex;
use rustfft::FftPlanner;

/// Raw base pointer that may cross thread boundaries. Each worker touches a
/// disjoint set of lanes (distinct y index), so access is race-free.
struct SendPtr(*mut Complex<f64>);
unsafe impl Send for SendPtr {}
unsafe impl Sync for SendPtr {}

impl SendPtr {
    // Accessed through &self so closures capture the wrapper, not the field.
    fn get(&self) -> *mut Complex<f64> {
        self.0
    }
}

pub(crate) fn fft3(data: &mut [Complex<f64>], dims: [usize; 3], inverse: bool) {
    let [nx, ny, nz] = dims;
    assert_eq!(data.len(), nx * ny * nz, "dims do not match data length");
    let mut planner = FftPlanner::new();
    let plan = |planner: &mut FftPlanner<f64>, n: usize| {
        if inverse {
            planner.plan_fft_inverse(n)
        } else {
            planner.plan_fft_forward(n)
        }
    };

    // Axis 0: lanes are contiguous rows.
    let fft_x = plan(&mut planner, nx);
    data.par_chunks_mut(nx).for_each_init(
        || vec![Complex::default(); fft_x.get_inplace_scratch_len()],
        |scratch, lane| fft_x.process_with_scratch(lane, scratch),
    );

    // Axis 1: stride-nx lanes, grouped by contiguous z-slab.
    let fft_y = plan(&mut planner, ny);
    data.par_chunks_mut(nx * ny).for_each_init(
        || {
            (
                vec![Complex::default(); ny],
                vec![Complex::default(); fft_y.get_inplace_scratch_len()],
            )
        },
        |(lane, scratch), slab| {
            for i in 0..nx {
                for j in 0..ny {
                    lane[j] = slab[i + nx * j];
                }
                fft_y.process_with_scratch(lane, scratch);
                for j in 0..ny {
                    slab[i + nx * j] = lane[j];
                }
            }
        },
    );

    // Axis 2: stride nx·ny. Lanes with a common y index share no elements,
    // so parallelize over y and gather/scatter through a raw pointer.
    let fft_z = plan(&mut planner, nz);
    let base = SendPtr(data.as_mut_ptr());
    (0..ny).into_par_iter().for_each_init(
        || {
            (
                vec![Complex::default(); nz],
                vec![Complex::default(); fft_z.get_inplace_scratch_len()],
            )
        },
        |(lane, scratch), j| {
            let p = base.get();
            for i in 0..nx {
                for k in 0..nz {
                    // Safety: indices i + nx(j + ny k) are unique per (i, j, k)
                    // and each worker owns a single j.
                    lane[k] = unsafe { *p.add(i + nx * (j + ny * k)) };
                }
                fft_z.process_with_scratch(lane, scratch);
                for k in 0..nz {
                    unsafe { *p.add(i + nx * (j + ny * k)) = lane[k] };
                }
            }
        },
    );

    if inverse {
        let scale = 1.0 / (nx * ny * nz) as f64;
        data.par_iter_mut().for_each(|v| *v *= scale);
    }
}
