#include "sqrtreg/stats.hpp"

#include <cmath>
#include <limits>
#include <stdexcept>

#include "sqrtreg/errors.hpp"
#include "sqrtreg/rng.hpp"

namespace sqrtreg {

double norm_cdf(double x) {
    return 0.5 * std::erfc(-x / std::sqrt(2.0));
}

namespace {

// Rational approximation of the inverse normal CDF (Acklam), ~1e-9 accurate.
double norm_quantile_seed(double p) {
    static const double a[6] = {-3.969683028665376e+01, 2.209460984245205e+02,
                                -2.759285104469687e+02, 1.383577518672690e+02,
                                -3.066479806614716e+01, 2.506628277459239e+00};
    static const double b[5] = {-5.447609879822406e+01, 1.615858368580409e+02,
                                -1.556989798598866e+02, 6.680131188771972e+01,
                                -1.328068155288572e+01};
    static const double c[6] = {-7.784894002430293e-03, -3.223964580411365e-01,
                                -2.400758277161838e+00, -2.549732539343734e+00,
                                4.374664141464968e+00,  2.938163982698783e+00};
    static const double d[4] = {7.784695709041462e-03, 3.224671290700398e-01,
                                2.445134137142996e+00, 3.754408661907416e+00};
    const double plow = 0.02425;
    if (p < plow) {
        double q = std::sqrt(-2.0 * std::log(p));
        return (((((c[0] * q + c[1]) * q + c[2]) * q + c[3]) * q + c[4]) * q + c[5]) /
               ((((d[0] * q + d[1]) * q + d[2]) * q + d[3]) * q + 1.0);
    }
    if (p > 1.0 - plow) {
        double q = std::sqrt(-2.0 * std::log(1.0 - p));
        return -(((((c[0] * q + c[1]) * q + c[2]) * q + c[3]) * q + c[4]) * q + c[5]) /
               ((((d[0] * q + d[1]) * q + d[2]) * q + d[3]) * q + 1.0);
    }
    double q = p - 0.5, r = q * q;
    return (((((a[0] * r + a[1]) * r + a[2]) * r + a[3]) * r + a[4]) * r + a[5]) * q /
           (((((b[0] * r + b[1]) * r + b[2]) * r + b[3]) * r + b[4]) * r + 1.0);
}

const double kInvSqrt2Pi = 0.3989422804014326779399461;

} // namespace

double norm_quantile(double q) {
    if (!(q > 0.0 && q < 1.0)) {
        if (q == 0.0) return -std::numeric_limits<double>::infinity();
        if (q == 1.0) return std::numeric_limits<double>::infinity();
        throw InvalidRegime("normal quantile needs q in [0,1]");
    }
    double x = norm_quantile_seed(q);
    // Two Halley steps against the erfc-based CDF.
    for (int it = 0; it < 2; ++it) {
        double f = norm_cdf(x) - q;
        double fp = kInvSqrt2Pi * std::exp(-0.5 * x * x);
        if (fp <= 0.0) break;
        double u = f / fp;
        x -= u / (1.0 + 0.5 * x * u);
    }
    return x;
}

namespace {

// Continued fraction for the incomplete beta (modified Lentz).
double betacf(double a, double b, double x) {
    const double tiny = 1e-300, eps = 1e-16;
    double qab = a + b, qap = a + 1.0, qam = a - 1.0;
    double c = 1.0;
    double d = 1.0 - qab * x / qap;
    if (std::fabs(d) < tiny) d = tiny;
    d = 1.0 / d;
    double h = d;
    for (int m = 1; m <= 500; ++m) {
        int m2 = 2 * m;
        double aa = m * (b - m) * x / ((qam + m2) * (a + m2));
        d = 1.0 + aa * d;
        if (std::fabs(d) < tiny) d = tiny;
        c = 1.0 + aa / c;
        if (std::fabs(c) < tiny) c = tiny;
        d = 1.0 / d;
        h *= d * c;
        aa = -(a + m) * (qab + m) * x / ((a + m2) * (qap + m2));
        d = 1.0 + aa * d;
        if (std::fabs(d) < tiny) d = tiny;
        c = 1.0 + aa / c;
        if (std::fabs(c) < tiny) c = tiny;
        d = 1.0 / d;
        double del = d * c;
        h *= del;
        if (std::fabs(del - 1.0) < eps) break;
    }
    return h;
}

} // namespace

double incomplete_beta(double a, double b, double x) {
    if (a <= 0.0 || b <= 0.0) throw InvalidRegime("incomplete beta needs a, b > 0");
    if (x <= 0.0) return 0.0;
    if (x >= 1.0) return 1.0;
    double ln_front = std::lgamma(a + b) - std::lgamma(a) - std::lgamma(b) +
                      a * std::log(x) + b * std::log1p(-x);
    double front = std::exp(ln_front);
    if (x < (a + 1.0) / (a + b + 2.0)) {
        return front * betacf(a, b, x) / a;
    }
    return 1.0 - front * betacf(b, a, 1.0 - x) / b;
}

double f_cdf(double d1, double d2, double x) {
    if (x <= 0.0) return 0.0;
    double t = d1 * x / (d1 * x + d2);
    return incomplete_beta(0.5 * d1, 0.5 * d2, t);
}

double f_quantile(double d1, double d2, double q) {
    if (!(q >= 0.0 && q < 1.0)) throw InvalidRegime("F quantile needs q in [0,1)");
    if (q == 0.0) return 0.0;
    double hi = 1.0;
    while (f_cdf(d1, d2, hi) < q) {
        hi *= 2.0;
        if (hi > 1e300) throw InvalidRegime("F quantile bracket overflow");
    }
    double lo = 0.0;
    for (int it = 0; it < 200; ++it) {
        double mid = 0.5 * (lo + hi);
        if (f_cdf(d1, d2, mid) < q)
            lo = mid;
        else
            hi = mid;
    }
    return 0.5 * (lo + hi);
}

double Rng::normal() { return norm_quantile(uniform()); }

} // namespace sqrtreg
