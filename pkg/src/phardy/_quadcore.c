/* Hot kernels for the half-line family (vertices 0,1,2,... with unit edge
 * weights, unit vertex measure, zero potential, Dirichlet value at 0).
 *
 * The weight tables are evaluated in IEEE binary128: the operator applied to
 * n^{1/q} loses ~n^2 relative precision to cancellation, so double precision
 * cannot deliver 1e-12 tables at n = 1e6.  binary128 leaves ~1e-20 headroom.
 *
 * The cutoff-energy kernel accumulates O(n^{2q}) terms in double precision
 * with chunked partial sums; all near-cancelling per-edge differences are
 * evaluated through expm1/log1p-style series so that no term loses more than
 * a few ulps.
 */

#include <math.h>
#include <stdint.h>
#include <quadmath.h>

#include "_quadcore.h"

/* x^e with fast paths for the exponents that actually occur (p in {1.5,2,3}
 * gives e in {1/3, 1/2, 2/3, 1, 3/2, 2}).  powq is ~5x slower than sqrtq. */
static __float128 qpow(__float128 x, double e)
{
    if (e == 1.0)
        return x;
    if (e == 2.0)
        return x * x;
    if (e == 0.5)
        return sqrtq(x);
    if (e == 1.5)
        return x * sqrtq(x);
    if (e == 1.0 / 3.0)
        return cbrtq(x);
    if (e == 2.0 / 3.0) {
        __float128 c = cbrtq(x);
        return c * c;
    }
    return powq(x, (__float128)e);
}

/* Hardy weight on {1..N} from the operator route: w(n) = H(v)(n) / v(n)^(p-1)
 * with v(t) = t^(1/q), q = p/(p-1), v(0) = 0. */
void ph_line_weight_graph(int64_t N, double p, double *out)
{
    const double s = (p - 1.0) / p; /* 1/q */
    const double pm1 = p - 1.0;
    __float128 vcur = 1.0Q;              /* v(1) */
    __float128 apow = 1.0Q;              /* (v(1)-v(0))^(p-1) */
    for (int64_t n = 1; n <= N; n++) {
        __float128 vnext = qpow((__float128)(n + 1), s);
        __float128 bpow = qpow(vnext - vcur, pm1);
        __float128 vpow = qpow(vcur, pm1);
        out[n - 1] = (double)((apow - bpow) / vpow);
        apow = bpow;
        vcur = vnext;
    }
}

/* Same weight from the closed form
 * w(n) = (1-(1-1/n)^(1/q))^(p-1) - ((1+1/n)^(1/q)-1)^(p-1).  */
void ph_line_weight_formula(int64_t N, double p, double *out)
{
    const double s = (p - 1.0) / p;
    const double pm1 = p - 1.0;
    for (int64_t n = 1; n <= N; n++) {
        __float128 t = 1.0Q / (__float128)n;
        __float128 d1 = 1.0Q - qpow(1.0Q - t, s);
        __float128 d2 = qpow(1.0Q + t, s) - 1.0Q;
        out[n - 1] = (double)(qpow(d1, pm1) - qpow(d2, pm1));
    }
}

/* ---------------------------------------------------------------------- */
/* double-precision helpers for the cutoff-energy kernel                   */

/* binomial series coefficients binom(s, k), k = 0..PH_NCOEF-1 */
#define PH_NCOEF 12

static void binom_coefs(double s, double *c)
{
    c[0] = 1.0;
    for (int k = 1; k < PH_NCOEF; k++)
        c[k] = c[k - 1] * (s - (k - 1)) / k;
}

/* (1+t)^s - 1 for |t| <= 1/64, full relative precision via the series */
static double powm1_series(double t, const double *c)
{
    double acc = c[PH_NCOEF - 1];
    for (int k = PH_NCOEF - 2; k >= 1; k--)
        acc = c[k] + t * acc;
    return t * acc;
}

/* 2 - (1-t)^s - (1+t)^s = -2 * sum_{k>=1} binom(s,2k) t^(2k), t small */
static double sym_defect_series(double t, const double *c)
{
    double t2 = t * t;
    double acc = 0.0;
    for (int k = (PH_NCOEF - 1) & ~1; k >= 2; k -= 2)
        acc = -2.0 * c[k] + t2 * acc;
    return t2 * acc;
}

/* log1p(t) for |t| <= 1/64 via the series (keeps the hot loop libm-free) */
static double log1p_small(double t)
{
    double acc = 0.0;
    for (int k = 10; k >= 2; k--)
        acc = ((k & 1) ? 1.0 : -1.0) / k + t * acc;
    return t * (1.0 + t * acc);
}

/* Hardy weight w(x) in double, full relative precision.
 * w = d2^(p-1) * expm1((p-1) log1p(D/d2)), D = d1-d2 via the even series. */
static double weight_stable(double x, double p, double s,
                            const double *cs)
{
    double t = 1.0 / x;
    double d1, d2, D;
    if (x >= 64.0) {
        d2 = powm1_series(t, cs);
        d1 = -powm1_series(-t, cs);
        D = sym_defect_series(t, cs);
    } else {
        d1 = -expm1(s * log1p(-t));
        d2 = expm1(s * log1p(t));
        D = d1 - d2;
    }
    if (p == 2.0)
        return D;
    return pow(d2, p - 1.0) * expm1((p - 1.0) * log1p(D / d2));
}

/* Kahan-compensated accumulator */
typedef struct { double s, c; } ksum;

static inline void kadd(ksum *k, double v)
{
    double y = v - k->c;
    double t = k->s + y;
    k->c = (t - k->s) - y;
    k->s = t;
}

/* E_n = h(f) - sum w(x) f(x)^p for f = v * psi_n(v), v(x) = x^(1/q), on the
 * half line.  psi_n is the log cutoff: 1 on [1/n, n], log ramp down to 0 at
 * n^2, zero beyond; the lower ramp is empty since v >= 1.
 *
 * Returns the energy; *support_out gets the largest vertex with f > 0.
 * Specialised p == 2 branch runs without libm calls in the hot loop.
 */
double ph_line_cutoff_energy(int64_t ncut, double p, int64_t *support_out)
{
    const double s = (p - 1.0) / p;   /* v = x^s */
    const double q = p / (p - 1.0);
    const double lnn = log((double)ncut);
    /* plateau while v <= n  <=>  x <= n^q; support while v < n^2 */
    int64_t xq = (int64_t)floor(pow((double)ncut, q));
    while (pow((double)(xq + 1), s) <= (double)ncut)
        xq++;
    while (pow((double)xq, s) > (double)ncut)
        xq--;
    int64_t xhi = (int64_t)floor(pow((double)ncut, 2.0 * q));
    while (pow((double)(xhi + 1), s) < (double)ncut * (double)ncut)
        xhi++;
    while (xhi > xq && pow((double)xhi, s) >= (double)ncut * (double)ncut)
        xhi--;
    if (support_out)
        *support_out = xhi;

    double cs[PH_NCOEF];
    binom_coefs(s, cs);

    ksum kin = {0.0, 0.0}, pot = {0.0, 0.0};

    /* edge (0,1): f(1) = 1 * psi(1) = 1 (v(1)=1 lies on the plateau) */
    kadd(&kin, 1.0);

    if (p == 2.0) {
        /* v = sqrt(x); plateau: f = v, ramp: f = v*(2 - ln x / (2 ln n)) */
        double r = 1.0;              /* sqrt(x) */
        for (int64_t x = 1; x < xq; x++) {
            double rn = sqrt((double)(x + 1));
            double dv = 1.0 / (r + rn);
            kadd(&kin, dv * dv);
            kadd(&pot, weight_stable((double)x, 2.0, 0.5, cs) * (double)x);
            r = rn;
        }
        /* boundary edge xq -> xq+1 crosses into the ramp */
        {
            double fq = sqrt((double)xq);
            double lx = log((double)(xq + 1));
            double psi = 2.0 - lx / (2.0 * lnn);
            if (psi > 1.0) psi = 1.0;
            if (psi < 0.0) psi = 0.0;
            double fn = sqrt((double)(xq + 1)) * psi;
            kadd(&kin, (fn - fq) * (fn - fq));
            kadd(&pot, weight_stable((double)xq, 2.0, 0.5, cs) * (double)xq);
        }
        /* ramp, in blocks; deep blocks (t tiny) run a short-series loop */
        const double i2ln = 1.0 / (2.0 * lnn);
        int64_t x = xq + 1;
        while (x <= xhi) {
            int64_t bend = x + (1 << 22);
            if (bend > xhi)
                bend = xhi;
            double lx = log((double)x);
            r = sqrt((double)x);
            double psi = 2.0 - lx * i2ln;
            if (psi > 1.0) psi = 1.0;
            if (psi < 0.0) psi = 0.0;
            double bkin = 0.0, bpot = 0.0;
            if (x >= 50000) {
                for (int64_t y = x; y < bend; y++) {
                    double t = 1.0 / (double)y;
                    double dlx = t * (1.0 - t * (0.5 - t / 3.0));
                    double dpsi = dlx * i2ln;
                    double dv = r * (t * (0.5 - t * (0.125 - 0.0625 * t)));
                    double psin = psi - dpsi;
                    double df = dv * psin - r * dpsi;
                    bkin += df * df;
                    double t2 = t * t;
                    double w = t2 * (0.25 + t2 * 0.078125);
                    bpot += w * ((double)y * psi * psi);
                    lx += dlx;
                    psi -= dpsi;
                    r += dv;
                }
            } else {
                for (int64_t y = x; y < bend; y++) {
                    double t = 1.0 / (double)y;
                    double dlx = (y >= 64) ? log1p_small(t) : log1p(t);
                    double dpsi = dlx * i2ln;
                    double dv = r * powm1_series(t, cs);
                    double psin = psi - dpsi;
                    double df = (psin <= 0.0) ? (-r * psi)
                                              : (dv * psin - r * dpsi);
                    bkin += df * df;
                    bpot += weight_stable((double)y, 2.0, 0.5, cs)
                            * ((double)y * psi * psi);
                    lx += dlx;
                    psi = psin > 0.0 ? psin : 0.0;
                    r += dv;
                }
            }
            kadd(&kin, bkin);
            kadd(&pot, bpot);
            x = bend;
            if (x == xhi) {
                /* last vertex: f(xhi+1) = 0 */
                double lxe = log((double)x);
                double psie = 2.0 - lxe * i2ln;
                if (psie < 0.0) psie = 0.0;
                double re = sqrt((double)x);
                kadd(&kin, re * psie * re * psie);
                kadd(&pot, weight_stable((double)x, 2.0, 0.5, cs)
                               * ((double)x * psie * psie));
                break;
            }
        }
        return kin.s - pot.s;
    }

    /* general p: direct evaluation, support sizes stay modest (<= ~1e8) */
    for (int64_t x = 1; x <= xhi; x++) {
        double vx = pow((double)x, s);
        double psi = 1.0;
        if (vx > (double)ncut) {
            psi = 2.0 - log(vx) / lnn;
            if (psi < 0.0) psi = 0.0;
        }
        double f = vx * psi;
        double fn = 0.0;
        if (x < xhi) {
            double vn = pow((double)(x + 1), s);
            double psin = 1.0;
            if (vn > (double)ncut) {
                psin = 2.0 - log(vn) / lnn;
                if (psin < 0.0) psin = 0.0;
            }
            fn = vn * psin;
        }
        kadd(&kin, pow(fabs(fn - f), p));
        kadd(&pot, weight_stable((double)x, p, s, cs) * pow(f, p));
    }
    return kin.s - pot.s;
}
