//! Independent oracles: dense full-space Hamiltonians built from Pauli
//! Kronecker products, a Jacobi eigensolver and an RK4 integrator.

#![allow(dead_code)]

pub type Dense = Vec<Vec<f64>>;

pub fn zeros(n: usize) -> Dense {
    vec![vec![0.0; n]; n]
}

fn kron(a: &Dense, b: &Dense) -> Dense {
    let (n, m) = (a.len(), b.len());
    let mut out = zeros(n * m);
    for i in 0..n {
        for j in 0..n {
            if a[i][j] == 0.0 {
                continue;
            }
            for k in 0..m {
                for l in 0..m {
                    out[i * m + k][j * m + l] = a[i][j] * b[k][l];
                }
            }
        }
    }
    out
}

fn pauli(name: char) -> Dense {
    match name {
        'x' => vec![vec![0.0, 1.0], vec![1.0, 0.0]],
        // i·σ_y, real; σy⊗σy = -(iσy)⊗(iσy)
        'y' => vec![vec![0.0, 1.0], vec![-1.0, 0.0]],
        'z' => vec![vec![1.0, 0.0], vec![0.0, -1.0]],
        _ => vec![vec![1.0, 0.0], vec![0.0, 1.0]],
    }
}

/// `σ^a_i σ^b_j` on N spins, site 1 being the leftmost tensor factor.
pub fn two_site(n: usize, i: usize, a: char, j: usize, b: char) -> Dense {
    let mut m = vec![vec![1.0]];
    for site in 1..=n {
        let f = if site == i {
            pauli(a)
        } else if site == j {
            pauli(b)
        } else {
            pauli('1')
        };
        m = kron(&m, &f);
    }
    m
}

pub fn one_site_z(n: usize, i: usize) -> Dense {
    two_site(n, i, 'z', 0, '1')
}

fn axpy(acc: &mut Dense, a: f64, x: &Dense) {
    for (r, xr) in acc.iter_mut().zip(x) {
        for (v, w) in r.iter_mut().zip(xr) {
            *v += a * w;
        }
    }
}

/// Dipolar chain coupling on a unit lattice, `-1 / (2 r^3)`, or nearest
/// neighbour only.
pub fn chain_coupling(i: usize, j: usize, nn: bool) -> f64 {
    let r = (j - i) as f64;
    if nn && j - i != 1 {
        0.0
    } else {
        -0.5 / (r * r * r)
    }
}

/// `Σ c_ij [hop (σxσx + σyσy) + ising σzσz]` on the full 2^N space.
pub fn full_hamiltonian(n: usize, coupling: impl Fn(usize, usize) -> f64, hop: f64, ising: f64) -> Dense {
    let mut h = zeros(1 << n);
    for i in 1..=n {
        for j in i + 1..=n {
            let c = coupling(i, j);
            if c == 0.0 {
                continue;
            }
            axpy(&mut h, c * hop, &two_site(n, i, 'x', j, 'x'));
            axpy(&mut h, -c * hop, &two_site(n, i, 'y', j, 'y'));
            axpy(&mut h, c * ising, &two_site(n, i, 'z', j, 'z'));
        }
    }
    h
}

pub fn secular_chain(n: usize, nn: bool) -> Dense {
    full_hamiltonian(n, |i, j| chain_coupling(i, j, nn), 1.0, -2.0)
}

/// Restriction of a full-space matrix to the listed integer states.
pub fn restrict(m: &Dense, states: &[usize]) -> Dense {
    states
        .iter()
        .map(|&a| states.iter().map(|&b| m[a][b]).collect())
        .collect()
}

/// States with `k` down spins, ascending.
pub fn states_with_weight(n: usize, k: u32) -> Vec<usize> {
    (0..1usize << n).filter(|s| s.count_ones() == k).collect()
}

/// Cyclic Jacobi eigenvalues of a symmetric matrix, ascending.
pub fn jacobi_eigenvalues(m: &Dense) -> Vec<f64> {
    let n = m.len();
    let mut a = m.clone();
    for _sweep in 0..100 {
        let off: f64 = (0..n)
            .flat_map(|i| (0..n).filter(move |&j| j != i).map(move |j| (i, j)))
            .map(|(i, j)| a[i][j] * a[i][j])
            .sum();
        if off < 1e-26 {
            break;
        }
        for p in 0..n {
            for q in p + 1..n {
                if a[p][q].abs() < 1e-300 {
                    continue;
                }
                let theta = (a[q][q] - a[p][p]) / (2.0 * a[p][q]);
                let t = theta.signum() / (theta.abs() + (theta * theta + 1.0).sqrt());
                let t = if theta == 0.0 { 1.0 } else { t };
                let c = 1.0 / (t * t + 1.0).sqrt();
                let s = t * c;
                for k in 0..n {
                    let (akp, akq) = (a[k][p], a[k][q]);
                    a[k][p] = c * akp - s * akq;
                    a[k][q] = s * akp + c * akq;
                }
                for k in 0..n {
                    let (apk, aqk) = (a[p][k], a[q][k]);
                    a[p][k] = c * apk - s * aqk;
                    a[q][k] = s * apk + c * aqk;
                }
            }
        }
    }
    let mut e: Vec<f64> = (0..n).map(|i| a[i][i]).collect();
    e.sort_by(f64::total_cmp);
    e
}

#[derive(Clone, Copy, Debug)]
pub struct C {
    pub re: f64,
    pub im: f64,
}

fn matvec_minus_i(h: &Dense, psi: &[C]) -> Vec<C> {
    // -i H ψ
    h.iter()
        .map(|row| {
            let (mut re, mut im) = (0.0, 0.0);
            for (hv, p) in row.iter().zip(psi) {
                if *hv != 0.0 {
                    re += hv * p.re;
                    im += hv * p.im;
                }
            }
            C { re: im, im: -re }
        })
        .collect()
}

fn add_scaled(x: &[C], k: &[C], a: f64) -> Vec<C> {
    x.iter()
        .zip(k)
        .map(|(x, k)| C {
            re: x.re + a * k.re,
            im: x.im + a * k.im,
        })
        .collect()
}

pub fn expectation(m: &Dense, psi: &[C]) -> f64 {
    let mut total = 0.0;
    for (i, row) in m.iter().enumerate() {
        for (j, v) in row.iter().enumerate() {
            if *v != 0.0 {
                total += v * (psi[i].re * psi[j].re + psi[i].im * psi[j].im);
            }
        }
    }
    total
}

/// Classical RK4 on `dψ/dt = -iHψ`, recording `⟨A⟩` at every multiple of
/// `record_every` steps.
pub fn rk4_series(h: &Dense, a: &Dense, psi0: &[f64], dt: f64, steps: usize, record_every: usize) -> Vec<f64> {
    let mut psi: Vec<C> = psi0.iter().map(|&x| C { re: x, im: 0.0 }).collect();
    let mut out = vec![expectation(a, &psi)];
    for s in 1..=steps {
        let k1 = matvec_minus_i(h, &psi);
        let k2 = matvec_minus_i(h, &add_scaled(&psi, &k1, dt / 2.0));
        let k3 = matvec_minus_i(h, &add_scaled(&psi, &k2, dt / 2.0));
        let k4 = matvec_minus_i(h, &add_scaled(&psi, &k3, dt));
        for i in 0..psi.len() {
            psi[i].re += dt / 6.0 * (k1[i].re + 2.0 * k2[i].re + 2.0 * k3[i].re + k4[i].re);
            psi[i].im += dt / 6.0 * (k1[i].im + 2.0 * k2[i].im + 2.0 * k3[i].im + k4[i].im);
        }
        if s % record_every == 0 {
            out.push(expectation(a, &psi));
        }
    }
    out
}

/// Mean GOE eigenvector NPC.
pub fn goe_npc(d: usize) -> f64 {
    (d as f64 + 2.0) / 3.0
}

/// Brute-force count of `N`-bit palindromes with `k` set bits.
pub fn palindromes(n: usize, k: u32) -> usize {
    (0..1u32 << n)
        .filter(|s| s.count_ones() == k)
        .filter(|&s| (0..n).all(|b| (s >> b) & 1 == (s >> (n - 1 - b)) & 1))
        .count()
}

/// `C(n, k)` by Pascal's triangle.
pub fn choose(n: usize, k: usize) -> usize {
    let mut row = vec![1usize];
    for _ in 0..n {
        let mut next = vec![1usize; row.len() + 1];
        for i in 1..row.len() {
            next[i] = row[i - 1] + row[i];
        }
        row = next;
    }
    row[k]
}
