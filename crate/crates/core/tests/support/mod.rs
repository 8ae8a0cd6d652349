//! Brute-force reference implementations shared by the integration tests.
#![allow(dead_code)]

pub fn dist(a: &[f64], b: &[f64]) -> f64 {
    let mut s = 0.0;
    for k in 0..a.len() {
        s += (a[k] - b[k]).powi(2);
    }
    s.sqrt()
}

pub fn avg(v: &[f64]) -> f64 {
    v.iter().sum::<f64>() / v.len() as f64
}

pub fn sdev(v: &[f64]) -> f64 {
    let m = avg(v);
    (v.iter().map(|a| (a - m).powi(2)).sum::<f64>() / (v.len() - 1) as f64).sqrt()
}

pub fn corr(a: &[f64], b: &[f64]) -> f64 {
    let (ma, mb) = (avg(a), avg(b));
    let cov: f64 = a.iter().zip(b).map(|(x, y)| (x - ma) * (y - mb)).sum();
    let va: f64 = a.iter().map(|x| (x - ma).powi(2)).sum();
    let vb: f64 = b.iter().map(|y| (y - mb).powi(2)).sum();
    cov / (va * vb).sqrt()
}

pub fn med(v: &[f64]) -> f64 {
    let mut s = v.to_vec();
    s.sort_by(|a, b| a.partial_cmp(b).unwrap());
    let n = s.len();
    if n.is_multiple_of(2) {
        (s[n / 2 - 1] + s[n / 2]) / 2.0
    } else {
        s[n / 2]
    }
}

/// Straightforward nearest-better statistics: for each point list every
/// better point with its distance and take the first minimum.
pub fn nbc_oracle(x: &[Vec<f64>], z: &[f64]) -> [f64; 5] {
    let n = x.len();
    let mut nn = Vec::new();
    let mut nb = Vec::new();
    let mut target = Vec::new();
    for i in 0..n {
        let others: Vec<f64> = (0..n).filter(|&j| j != i).map(|j| dist(&x[i], &x[j])).collect();
        nn.push(others.iter().cloned().fold(f64::MAX, f64::min));
        let better: Vec<(usize, f64)> = (0..n)
            .filter(|&j| z[j] < z[i])
            .map(|j| (j, dist(&x[i], &x[j])))
            .collect();
        if better.is_empty() {
            nb.push(others.iter().cloned().fold(0.0, f64::max));
            target.push(None);
        } else {
            let m = better.iter().map(|p| p.1).fold(f64::MAX, f64::min);
            let j = better.iter().find(|p| p.1 == m).unwrap().0;
            nb.push(m);
            target.push(Some(j));
        }
    }
    let indeg: Vec<f64> = (0..n)
        .map(|i| target.iter().filter(|t| **t == Some(i)).count() as f64)
        .collect();
    let ratio: Vec<f64> = (0..n).map(|i| nn[i] / nb[i]).collect();
    [
        sdev(&nn) / sdev(&nb),
        avg(&nn) / avg(&nb),
        corr(&nn, &nb),
        sdev(&ratio) / avg(&ratio),
        corr(&indeg, z),
    ]
}

pub fn disp_oracle(x: &[Vec<f64>], z: &[f64], q: f64) -> [f64; 4] {
    let n = x.len();
    let all: Vec<f64> = (0..n)
        .flat_map(|i| (i + 1..n).map(move |j| (i, j)))
        .map(|(i, j)| dist(&x[i], &x[j]))
        .collect();
    let mut idx: Vec<usize> = (0..n).collect();
    idx.sort_by(|a, b| z[*a].partial_cmp(&z[*b]).unwrap().then(a.cmp(b)));
    let k = ((q * n as f64) - 1e-9).ceil() as usize;
    let best = &idx[..k];
    let mut sub = Vec::new();
    for a in 0..k {
        for b in a + 1..k {
            sub.push(dist(&x[best[a]], &x[best[b]]));
        }
    }
    [
        avg(&sub) / avg(&all),
        med(&sub) / med(&all),
        avg(&sub) - avg(&all),
        med(&sub) - med(&all),
    ]
}

pub fn entropy_oracle(psi: &[i8]) -> f64 {
    let pairs: Vec<(i8, i8)> = psi.windows(2).map(|w| (w[0], w[1])).collect();
    let mut h = 0.0;
    for a in [-1i8, 0, 1] {
        for b in [-1i8, 0, 1] {
            let c = pairs.iter().filter(|p| **p == (a, b)).count();
            if a != b && c > 0 {
                let p = c as f64 / pairs.len() as f64;
                h -= p * p.ln() / 6f64.ln();
            }
        }
    }
    h
}
