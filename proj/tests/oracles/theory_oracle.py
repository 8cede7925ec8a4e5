#!/usr/bin/env python3
"""High-precision reference values for the tuning and bound computations.

Independent of the C++ code; run with mpmath and paste the printed values
into the tests when the fixtures change.
"""
from mpmath import mp, mpf, sqrt, log, exp, floor, ceil

mp.dps = 50


def lam_heuristic(n, p, v):
    m = mpf(max(n, p))
    return v * log(log(m)) * sqrt(log(m) / n)


def report(q, eps, sigma, M, c, n, p):
    eps, sigma, M, c = mpf(eps), mpf(sigma), mpf(M), mpf(c)
    L = log(mpf(max(p, n)))
    lam = c * sqrt(L / n)
    m0 = max(q, min(p, int(floor(1 / lam))))
    rn = q * L
    s = (1 + eps) * q + eps
    j0 = int(ceil((log(m0) - log(eps)) / abs(log(2 * sqrt(M)) - log(c))))
    out = dict(lam=lam, m0=m0, rn=rn, s=s, j0=j0,
               delta=2 * sqrt(M) / c,
               c_req=2 * sqrt(M) * (1 + eps) / eps,
               sparsity_tail=j0 * exp(-sigma * rn),
               risk_tail=(1 + j0) * exp(-sigma * rn),
               risk_thr=3 * lam * s,
               mean_bound=(1 + j0) * exp(-sigma * rn) + 3 * lam * s)
    kmax = min(max(m0, int(floor(s)), (j0 - 1) * q + int(floor(sqrt(m0)))), p)
    ks = []
    for k in range(q, kmax + 1):
        lhs = 4 * (k + 1) * log(M * k * L)
        rhs = k * L + 6 * (k + 1) * log(2)
        ks.append((k, lhs, rhs, lhs <= rhs))
    out['k'] = ks
    return out


def lemma1(k, n, p, M, sigma):
    L = log(mpf(max(p, n)))
    return sqrt(M * k * L / n), exp(-sigma * k * L)


if __name__ == '__main__':
    for v in ('1', '0.1875', '0.25'):
        print('lambda_heuristic(100,200,%s) =' % v, mp.nstr(lam_heuristic(100, 200, mpf(v)), 20))
    r = report(1, '0.5', 1, 1, 8, 100, 200)
    for key, val in r.items():
        if key == 'k':
            for k, lhs, rhs, ok in val:
                print('k=%d lhs=%s rhs=%s ok=%s' % (k, mp.nstr(lhs, 20), mp.nstr(rhs, 20), ok))
        else:
            print(key, '=', mp.nstr(val, 20) if not isinstance(val, int) else val)
    t, tail = lemma1(3, 100, 200, mpf(1), mpf(1))
    print('lemma1(3,100,200,1,1) =', mp.nstr(t, 20), mp.nstr(tail, 20))
