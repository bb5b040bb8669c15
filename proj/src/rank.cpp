#include "hetcorr/rank.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>
#include <string>

namespace hetcorr {

Ranking::Ranking(std::vector<int> values) : values_(std::move(values)) {
    const auto n = values_.size();
    std::vector<bool> seen(n, false);
    for (int v : values_) {
        if (v < 1 || static_cast<std::size_t>(v) > n || seen[static_cast<std::size_t>(v - 1)]) {
            throw std::invalid_argument("Ranking: values are not a permutation of 1.." +
                                        std::to_string(n));
        }
        seen[static_cast<std::size_t>(v - 1)] = true;
    }
}

Ranking Ranking::identity(std::size_t n) {
    std::vector<int> v(n);
    std::iota(v.begin(), v.end(), 1);
    return Ranking(std::move(v));
}

std::vector<std::size_t> Ranking::inverse() const {
    std::vector<std::size_t> inv(values_.size());
    for (std::size_t i = 0; i < values_.size(); ++i) {
        inv[static_cast<std::size_t>(values_[i] - 1)] = i;
    }
    return inv;
}

std::int64_t FootruleComponents::total() const {
    return std::accumulate(d.begin(), d.end(), std::int64_t{0});
}

Ranking rank_vector(std::span<const double> values) {
    if (values.empty()) throw std::invalid_argument("rank_vector: empty input");
    for (double v : values) {
        if (std::isnan(v)) throw std::invalid_argument("rank_vector: NaN value");
    }
    std::vector<std::size_t> order(values.size());
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(),
                     [&](std::size_t a, std::size_t b) { return values[a] > values[b]; });
    std::vector<int> r(values.size());
    for (std::size_t pos = 0; pos < order.size(); ++pos) r[order[pos]] = static_cast<int>(pos + 1);
    return Ranking(std::move(r));
}

std::size_t count_ties(std::span<const double> values) {
    std::vector<double> sorted(values.begin(), values.end());
    std::sort(sorted.begin(), sorted.end());
    std::size_t ties = 0;
    for (std::size_t i = 1; i < sorted.size(); ++i) {
        if (sorted[i] == sorted[i - 1]) ++ties;
    }
    return ties;
}

RankedSample make_ranked_sample(std::vector<double> x, std::vector<double> y) {
    if (x.size() != y.size()) throw std::invalid_argument("RankedSample: |x| != |y|");
    if (x.size() < 2) throw std::invalid_argument("RankedSample: need at least two observations");
    RankedSample s;
    s.pi = rank_vector(x);
    s.nu = rank_vector(y);
    s.x_ties = count_ties(x);
    s.y_ties = count_ties(y);
    s.x = std::move(x);
    s.y = std::move(y);
    return s;
}

RankedSample make_ranked_sample(const Ranking& pi, const Ranking& nu) {
    if (pi.size() != nu.size()) throw std::invalid_argument("RankedSample: length mismatch");
    if (pi.size() < 2) throw std::invalid_argument("RankedSample: need at least two observations");
    RankedSample s;
    // Larger value <=> smaller rank, so negate.
    for (std::size_t i = 0; i < pi.size(); ++i) {
        s.x.push_back(-static_cast<double>(pi[i]));
        s.y.push_back(-static_cast<double>(nu[i]));
    }
    s.pi = pi;
    s.nu = nu;
    return s;
}

namespace {

std::int64_t merge_count(std::vector<int>& a, std::vector<int>& buf, std::size_t lo,
                         std::size_t hi) {
    if (hi - lo < 2) return 0;
    const std::size_t mid = lo + (hi - lo) / 2;
    std::int64_t inv = merge_count(a, buf, lo, mid) + merge_count(a, buf, mid, hi);
    std::size_t i = lo;
    std::size_t j = mid;
    std::size_t k = lo;
    while (i < mid && j < hi) {
        if (a[i] <= a[j]) {
            buf[k++] = a[i++];
        } else {
            inv += static_cast<std::int64_t>(mid - i);
            buf[k++] = a[j++];
        }
    }
    while (i < mid) buf[k++] = a[i++];
    while (j < hi) buf[k++] = a[j++];
    std::copy(buf.begin() + static_cast<std::ptrdiff_t>(lo),
              buf.begin() + static_cast<std::ptrdiff_t>(hi),
              a.begin() + static_cast<std::ptrdiff_t>(lo));
    return inv;
}

void check_lengths(const Ranking& pi, const Ranking& nu) {
    if (pi.size() != nu.size()) throw std::invalid_argument("rankings differ in length");
}

}  // namespace

std::int64_t count_inversions(std::vector<int> a) {
    std::vector<int> buf(a.size());
    return merge_count(a, buf, 0, a.size());
}

std::int64_t kendall_distance(const Ranking& pi, const Ranking& nu) {
    check_lengths(pi, nu);
    // nu composed with pi^{-1}: nu values listed in pi order.
    const auto inv = pi.inverse();
    std::vector<int> seq(pi.size());
    for (std::size_t r = 0; r < inv.size(); ++r) seq[r] = nu[inv[r]];
    return count_inversions(std::move(seq));
}

double kendall_tau(const Ranking& pi, const Ranking& nu) {
    check_lengths(pi, nu);
    const auto n = static_cast<double>(pi.size());
    if (pi.size() < 2) throw std::invalid_argument("kendall_tau: need n >= 2");
    return 1.0 - 4.0 * static_cast<double>(kendall_distance(pi, nu)) / (n * (n - 1.0));
}

double kendall_tau(const RankedSample& sample) { return kendall_tau(sample.pi, sample.nu); }

FootruleComponents footrule_components(const Ranking& pi, const Ranking& nu) {
    check_lengths(pi, nu);
    FootruleComponents fc;
    const auto n = static_cast<double>(pi.size());
    fc.d.resize(pi.size());
    fc.scaled.resize(pi.size());
    for (std::size_t i = 0; i < pi.size(); ++i) {
        fc.d[i] = std::abs(static_cast<std::int64_t>(pi[i]) - nu[i]);
        fc.scaled[i] = static_cast<double>(fc.d[i]) / n;
    }
    return fc;
}

std::vector<std::pair<double, double>> pseudo_observations(const RankedSample& sample) {
    const auto n1 = static_cast<double>(sample.size()) + 1.0;
    std::vector<std::pair<double, double>> out(sample.size());
    for (std::size_t i = 0; i < sample.size(); ++i) {
        out[i] = {1.0 - sample.pi[i] / n1, 1.0 - sample.nu[i] / n1};
    }
    return out;
}

std::vector<std::int64_t> per_point_discordance(const Ranking& pi, const Ranking& nu) {
    check_lengths(pi, nu);
    const std::size_t n = pi.size();
    const auto inv = pi.inverse();
    // Fenwick tree over nu ranks of items already visited in pi order.
    std::vector<std::int64_t> tree(n + 1, 0);
    std::vector<std::int64_t> c(n, 0);
    for (std::size_t pos = 0; pos < n; ++pos) {
        const std::size_t i = inv[pos];
        const auto v = static_cast<std::size_t>(nu[i]);
        std::int64_t earlier_smaller = 0;
        for (std::size_t k = v - 1; k > 0; k -= k & (~k + 1)) earlier_smaller += tree[k];
        const auto earlier_greater = static_cast<std::int64_t>(pos) - earlier_smaller;
        const auto later_smaller = static_cast<std::int64_t>(v - 1) - earlier_smaller;
        c[i] = earlier_greater + later_smaller;
        for (std::size_t k = v; k <= n; k += k & (~k + 1)) tree[k] += 1;
    }
    return c;
}

std::vector<std::int64_t> per_point_discordance(const RankedSample& sample) {
    return per_point_discordance(sample.pi, sample.nu);
}

}  // namespace hetcorr
