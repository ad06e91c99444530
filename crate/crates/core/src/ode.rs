//! Dormand-Prince 5(4) stepping for small complex systems.

use num_complex::Complex64;

pub(crate) type State<const N: usize> = [Complex64; N];

const C: [f64; 7] = [0.0, 1.0 / 5.0, 3.0 / 10.0, 4.0 / 5.0, 8.0 / 9.0, 1.0, 1.0];

const A: [[f64; 6]; 7] = [
    [0.0; 6],
    [1.0 / 5.0, 0.0, 0.0, 0.0, 0.0, 0.0],
    [3.0 / 40.0, 9.0 / 40.0, 0.0, 0.0, 0.0, 0.0],
    [44.0 / 45.0, -56.0 / 15.0, 32.0 / 9.0, 0.0, 0.0, 0.0],
    [
        19372.0 / 6561.0,
        -25360.0 / 2187.0,
        64448.0 / 6561.0,
        -212.0 / 729.0,
        0.0,
        0.0,
    ],
    [
        9017.0 / 3168.0,
        -355.0 / 33.0,
        46732.0 / 5247.0,
        49.0 / 176.0,
        -5103.0 / 18656.0,
        0.0,
    ],
    [
        35.0 / 384.0,
        0.0,
        500.0 / 1113.0,
        125.0 / 192.0,
        -2187.0 / 6784.0,
        11.0 / 84.0,
    ],
];

/// Fifth-order weights minus the embedded fourth-order ones.
const E: [f64; 7] = [
    71.0 / 57600.0,
    0.0,
    -71.0 / 16695.0,
    71.0 / 1920.0,
    -17253.0 / 339200.0,
    22.0 / 525.0,
    -1.0 / 40.0,
];

pub(crate) struct Step<const N: usize> {
    pub y: State<N>,
    pub err: State<N>,
    /// Derivative at the end point, reusable as the first stage of the next step.
    pub f_end: State<N>,
}

/// One trial step from `(t, y)` with `f0 = f(t, y)`.
pub(crate) fn dopri_step<const N: usize, F>(f: &F, t: f64, y: &State<N>, f0: &State<N>, h: f64) -> Step<N>
where
    F: Fn(f64, &State<N>) -> State<N>,
{
    let zero = Complex64::new(0.0, 0.0);
    let mut k = [[zero; N]; 7];
    k[0] = *f0;
    for s in 1..7 {
        let mut ys = *y;
        for (j, kj) in k.iter().enumerate().take(s) {
            let a = A[s][j];
            if a != 0.0 {
                for i in 0..N {
                    ys[i] += kj[i] * (h * a);
                }
            }
        }
        k[s] = f(t + C[s] * h, &ys);
    }
    // the last stage is evaluated at the fifth-order solution
    let mut y_new = *y;
    for (j, kj) in k.iter().enumerate().take(6) {
        for i in 0..N {
            y_new[i] += kj[i] * (h * A[6][j]);
        }
    }
    let mut err = [zero; N];
    for (j, kj) in k.iter().enumerate() {
        for i in 0..N {
            err[i] += kj[i] * (h * E[j]);
        }
    }
    Step {
        y: y_new,
        err,
        f_end: k[6],
    }
}
