#include "hetcorr/numeric.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <numeric>
#include <stdexcept>

#include <boost/math/special_functions/beta.hpp>

#include "hetcorr/random.hpp"

namespace hetcorr {

double Rng::normal() { return normal_quantile(uniform()); }

double normal_cdf(double x) { return 0.5 * std::erfc(-x / std::sqrt(2.0)); }

double normal_sf(double x) { return 0.5 * std::erfc(x / std::sqrt(2.0)); }

namespace {

template <std::size_t N>
double horner(const std::array<double, N>& c, double x) {
    double acc = c[N - 1];
    for (std::size_t i = N - 1; i-- > 0;) acc = acc * x + c[i];
    return acc;
}

constexpr std::array<double, 8> kA{3.3871328727963666080e0,     1.3314166789178437745e+2,
                                   1.9715909503065514427e+3,    1.3731693765509461125e+4,
                                   4.5921953931549871457e+4,    6.7265770927008700853e+4,
                                   3.3430575583588128105e+4,    2.5090809287301226727e+3};
constexpr std::array<double, 8> kB{1.0,
                                   4.2313330701600911252e+1,
                                   6.8718700749205790830e+2,
                                   5.3941960214247511077e+3,
                                   2.1213794301586595867e+4,
                                   3.9307895800092710610e+4,
                                   2.8729085735721942674e+4,
                                   5.2264952788528545610e+3};
constexpr std::array<double, 8> kC{1.42343711074968357734e0,  4.63033784615654529590e0,
                                   5.76949722146069140550e0,  3.64784832476320460504e0,
                                   1.27045825245236838258e0,  2.41780725177450611770e-1,
                                   2.27238449892691845833e-2, 7.74545014278341407640e-4};
constexpr std::array<double, 8> kD{1.0,
                                   2.05319162663775882187e0,
                                   1.67638483018380384940e0,
                                   6.89767334985100004550e-1,
                                   1.48103976427480074590e-1,
                                   1.51986665636164571966e-2,
                                   5.47593808499534494600e-4,
                                   1.05075007164441684324e-9};
constexpr std::array<double, 8> kE{6.65790464350110377720e0,  5.46378491116411436990e0,
                                   1.78482653991729133580e0,  2.96560571828504891230e-1,
                                   2.65321895265761230930e-2, 1.24266094738807843860e-3,
                                   2.71155556874348757815e-5, 2.01033439929228813265e-7};
constexpr std::array<double, 8> kF{1.0,
                                   5.99832206555887937690e-1,
                                   1.36929880922735805310e-1,
                                   1.48753612908506148525e-2,
                                   7.86869131145613259100e-4,
                                   1.84631831751005468180e-5,
                                   1.42151175831644588870e-7,
                                   2.04426310338993978564e-15};

// Gauss-Kronrod 7/15 nodes and weights.
constexpr std::array<double, 8> kXgk{0.991455371120812639206854697526329,
                                     0.949107912342758524526189684047851,
                                     0.864864423359769072789712788640926,
                                     0.741531185599394439863864773280788,
                                     0.586087235467691130294144845693013,
                                     0.405845151377397166906606412076961,
                                     0.207784955007898467600689403773245,
                                     0.0};
constexpr std::array<double, 8> kWgk{0.022935322010529224963732008058970,
                                     0.063092092629978553290700663189204,
                                     0.104790010322250183839876322541518,
                                     0.140653259715525918745189590510238,
                                     0.169004726639267902826583426598550,
                                     0.190350578064785409913256402421014,
                                     0.204432940075298892414161999234649,
                                     0.209482141084727828012999174891714};
constexpr std::array<double, 4> kWg{0.129484966168869693270611432679082,
                                    0.279705391489276667901467771423780,
                                    0.381830050505118944950369775488975,
                                    0.417959183673469387755102040816327};

void gauss_kronrod(const std::function<double(double)>& f, double a, double b, double& kronrod,
                   double& gauss) {
    const double centre = 0.5 * (a + b);
    const double half = 0.5 * (b - a);
    const double fc = f(centre);
    kronrod = fc * kWgk[7];
    gauss = fc * kWg[3];
    for (std::size_t j = 0; j < 7; ++j) {
        const double dx = half * kXgk[j];
        const double sum = f(centre - dx) + f(centre + dx);
        kronrod += kWgk[j] * sum;
        if (j % 2 == 1) gauss += kWg[j / 2] * sum;
    }
    kronrod *= half;
    gauss *= half;
}

double integrate_rec(const std::function<double(double)>& f, double a, double b, double tol,
                     int depth) {
    double k = 0.0;
    double g = 0.0;
    gauss_kronrod(f, a, b, k, g);
    if (std::abs(k - g) <= tol || depth <= 0) return k;
    const double mid = 0.5 * (a + b);
    return integrate_rec(f, a, mid, 0.5 * tol, depth - 1) +
           integrate_rec(f, mid, b, 0.5 * tol, depth - 1);
}

}  // namespace

double normal_quantile(double p) {
    if (!(p > 0.0 && p < 1.0)) throw std::domain_error("normal_quantile: p must lie in (0,1)");
    const double q = p - 0.5;
    if (std::abs(q) <= 0.425) {
        const double r = 0.180625 - q * q;
        return q * horner(kA, r) / horner(kB, r);
    }
    double r = std::sqrt(-std::log(q < 0.0 ? p : 1.0 - p));
    double val = 0.0;
    if (r <= 5.0) {
        r -= 1.6;
        val = horner(kC, r) / horner(kD, r);
    } else {
        r -= 5.0;
        val = horner(kE, r) / horner(kF, r);
    }
    return q < 0.0 ? -val : val;
}

double integrate(const std::function<double(double)>& f, double a, double b, double abs_tol,
                 int max_depth) {
    if (a == b) return 0.0;
    if (a > b) return -integrate(f, b, a, abs_tol, max_depth);
    return integrate_rec(f, a, b, abs_tol, max_depth);
}

double bisect_increasing(const std::function<double(double)>& f, double target, double lo,
                         double hi, double x_tol) {
    while (hi - lo > x_tol) {
        const double mid = 0.5 * (lo + hi);
        if (mid <= lo || mid >= hi) break;
        if (f(mid) < target) {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    return 0.5 * (lo + hi);
}

double binomial_upper_tail(long n, double p, long k) {
    if (n < 0) throw std::invalid_argument("binomial_upper_tail: n must be nonnegative");
    if (k <= 0) return 1.0;
    if (k > n) return 0.0;
    if (p <= 0.0) return 0.0;
    if (p >= 1.0) return 1.0;
    // P(X >= k) = I_p(k, n - k + 1)
    return boost::math::ibeta(static_cast<double>(k), static_cast<double>(n - k + 1), p);
}

Moments moments(std::span<const double> xs) {
    Moments m;
    if (xs.empty()) return m;
    const double n = static_cast<double>(xs.size());
    m.mean = std::accumulate(xs.begin(), xs.end(), 0.0) / n;
    double m2 = 0.0;
    double m3 = 0.0;
    for (double x : xs) {
        const double d = x - m.mean;
        m2 += d * d;
        m3 += d * d * d;
    }
    if (xs.size() > 1) m.sd = std::sqrt(m2 / (n - 1.0));
    m2 /= n;
    m3 /= n;
    m.skewness = m2 > 0.0 ? m3 / std::pow(m2, 1.5) : 0.0;
    return m;
}

double quantile(std::vector<double> xs, double q) {
    if (xs.empty()) throw std::invalid_argument("quantile: empty sample");
    std::sort(xs.begin(), xs.end());
    const double h = (static_cast<double>(xs.size()) - 1.0) * std::clamp(q, 0.0, 1.0);
    const auto lo = static_cast<std::size_t>(std::floor(h));
    const auto hi = std::min(lo + 1, xs.size() - 1);
    return xs[lo] + (h - static_cast<double>(lo)) * (xs[hi] - xs[lo]);
}

double ks_statistic(std::vector<double> xs, const std::function<double(double)>& cdf) {
    std::sort(xs.begin(), xs.end());
    const double n = static_cast<double>(xs.size());
    double d = 0.0;
    for (std::size_t i = 0; i < xs.size(); ++i) {
        const double f = cdf(xs[i]);
        d = std::max({d, static_cast<double>(i + 1) / n - f, f - static_cast<double>(i) / n});
    }
    return d;
}

double ks_statistic_upper(std::vector<double> xs, const std::function<double(double)>& cdf) {
    std::sort(xs.begin(), xs.end());
    const double n = static_cast<double>(xs.size());
    double d = 0.0;
    for (std::size_t i = 0; i < xs.size(); ++i) {
        d = std::max(d, static_cast<double>(i + 1) / n - cdf(xs[i]));
    }
    return d;
}

namespace {

std::vector<double> average_ranks(std::span<const double> xs) {
    std::vector<std::size_t> idx(xs.size());
    std::iota(idx.begin(), idx.end(), 0);
    std::stable_sort(idx.begin(), idx.end(), [&](auto a, auto b) { return xs[a] < xs[b]; });
    std::vector<double> r(xs.size());
    for (std::size_t i = 0; i < idx.size();) {
        std::size_t j = i;
        while (j + 1 < idx.size() && xs[idx[j + 1]] == xs[idx[i]]) ++j;
        const double avg = 0.5 * static_cast<double>(i + j) + 1.0;
        for (std::size_t t = i; t <= j; ++t) r[idx[t]] = avg;
        i = j + 1;
    }
    return r;
}

}  // namespace

double pearson_correlation(std::span<const double> a, std::span<const double> b) {
    if (a.size() != b.size() || a.size() < 2) {
        throw std::invalid_argument("pearson_correlation: need two equal-length samples");
    }
    const double n = static_cast<double>(a.size());
    const double ma = std::accumulate(a.begin(), a.end(), 0.0) / n;
    const double mb = std::accumulate(b.begin(), b.end(), 0.0) / n;
    double sab = 0.0;
    double saa = 0.0;
    double sbb = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) {
        sab += (a[i] - ma) * (b[i] - mb);
        saa += (a[i] - ma) * (a[i] - ma);
        sbb += (b[i] - mb) * (b[i] - mb);
    }
    return sab / std::sqrt(saa * sbb);
}

double spearman_correlation(std::span<const double> a, std::span<const double> b) {
    const auto ra = average_ranks(a);
    const auto rb = average_ranks(b);
    return pearson_correlation(ra, rb);
}

std::vector<double> isotonic_increasing(std::span<const double> ys) {
    std::vector<double> level;
    std::vector<std::size_t> width;
    for (double y : ys) {
        level.push_back(y);
        width.push_back(1);
        while (level.size() > 1 && level[level.size() - 2] > level.back()) {
            const auto w1 = static_cast<double>(width[width.size() - 2]);
            const auto w2 = static_cast<double>(width.back());
            const double merged = (level[level.size() - 2] * w1 + level.back() * w2) / (w1 + w2);
            width[width.size() - 2] += width.back();
            level.pop_back();
            width.pop_back();
            level.back() = merged;
        }
    }
    std::vector<double> out;
    out.reserve(ys.size());
    for (std::size_t b = 0; b < level.size(); ++b) out.insert(out.end(), width[b], level[b]);
    return out;
}

}  // namespace hetcorr
