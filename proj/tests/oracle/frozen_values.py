"""Independent extended-precision values frozen into the unit tests."""
from mpmath import mp, mpf, gamma, exp, nsum, inf, sqrt, pi, log

mp.dps = 40


def ml(a, b, z):
    return nsum(lambda k: z**k / gamma(a * k + b), [0, inf])


def moser(q0, m, lam, n=400):
    q = [mpf(q0)]
    for _ in range(n + 1):
        q.append((m + q[-1]) / lam)
    b = lam ** (n + 1) * q[n + 1]
    z = exp(sum(lam**k * log(q[k]) for k in range(n + 1)) / b)
    s1 = exp(sum(lam**k * log(q[k] - 1) for k in range(n + 1)) / b)
    s2 = exp(sum(lam**k * 2 * log((m + q[k]) / 2) for k in range(n + 1)) / b)
    return z, s1, s2


if __name__ == "__main__":
    print("E_{1/2,1/2}(-1)", ml(mpf("0.5"), mpf("0.5"), -1))
    print("E_{0.8,1}(-1)", ml(mpf("0.8"), 1, -1))
    print("E_{0.3,1}(-1)", ml(mpf("0.3"), 1, -1))
    print("g_0.3(2)", mpf(2) ** mpf("-0.7") / gamma(mpf("0.3")))
    print("e^-1/sqrt(pi)", exp(-1) / sqrt(pi))
    print("1-E_{1/2}(-100 sqrt(1/2))", 1 - ml(mpf("0.5"), 1, -100 * sqrt(mpf("0.5"))))
    for args in [(2, 1, mpf("0.5")), (1.5, 1, mpf("0.5")), (4, 2, mpf("0.75")), (2, 2, mpf("0.75"))]:
        print(args, [mp.nstr(v, 15) for v in moser(*args)])
