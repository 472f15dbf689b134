//! Index-tuple bookkeeping. Every sign in the forms module comes from here.

/// Sorts `idx` into a strictly increasing tuple and returns the sign of the
/// sorting permutation, or `None` if an index repeats.
pub(crate) fn sort_with_sign(idx: &[usize]) -> Option<(Vec<usize>, f64)> {
    let mut v = idx.to_vec();
    let mut sign = 1.0;
    // insertion sort; each adjacent swap flips the sign
    for i in 1..v.len() {
        let mut j = i;
        while j > 0 && v[j - 1] > v[j] {
            v.swap(j - 1, j);
            sign = -sign;
            j -= 1;
        }
    }
    if v.windows(2).any(|w| w[0] == w[1]) {
        return None;
    }
    Some((v, sign))
}

/// All strictly increasing `k`-tuples drawn from `0..n`.
pub(crate) fn combinations(n: usize, k: usize) -> Vec<Vec<usize>> {
    let mut out = Vec::new();
    if k > n {
        return out;
    }
    let mut cur: Vec<usize> = (0..k).collect();
    loop {
        out.push(cur.clone());
        let mut i = k;
        loop {
            if i == 0 {
                return out;
            }
            i -= 1;
            if cur[i] < n - k + i {
                cur[i] += 1;
                for j in i + 1..k {
                    cur[j] = cur[j - 1] + 1;
                }
                break;
            }
        }
    }
}

/// All permutations of `0..k` with their signs.
pub(crate) fn permutations(k: usize) -> Vec<(Vec<usize>, f64)> {
    fn rec(prefix: &mut Vec<usize>, rest: &mut Vec<usize>, out: &mut Vec<(Vec<usize>, f64)>) {
        if rest.is_empty() {
            let (_, s) = sort_with_sign(prefix).expect("permutation has distinct entries");
            out.push((prefix.clone(), s));
            return;
        }
        for i in 0..rest.len() {
            let v = rest.remove(i);
            prefix.push(v);
            rec(prefix, rest, out);
            prefix.pop();
            rest.insert(i, v);
        }
    }
    let mut out = Vec::new();
    rec(&mut Vec::new(), &mut (0..k).collect(), &mut out);
    out
}

/// Determinant by permutation expansion; fine for the k <= 6 used here.
pub(crate) fn det(m: &[Vec<f64>]) -> f64 {
    let k = m.len();
    permutations(k)
        .into_iter()
        .map(|(p, s)| s * p.iter().enumerate().map(|(r, c)| m[r][*c]).product::<f64>())
        .sum()
}
