#pragma once

#include <cstdint>
#include <span>
#include <utility>
#include <vector>

namespace hetcorr {

/// A permutation of {1, ..., n}. Rank 1 goes to the largest value:
/// rank(x_i) = #{j : x_i <= x_j}.
class Ranking {
public:
    Ranking() = default;

    /// Validates that `values` is a permutation of 1..n.
    explicit Ranking(std::vector<int> values);

    static Ranking identity(std::size_t n);

    std::size_t size() const noexcept { return values_.size(); }
    int operator[](std::size_t i) const noexcept { return values_[i]; }
    const std::vector<int>& values() const noexcept { return values_; }

    /// inverse()[r - 1] is the index holding rank r.
    std::vector<std::size_t> inverse() const;

    friend bool operator==(const Ranking&, const Ranking&) = default;

private:
    std::vector<int> values_;
};

/// Paired observations and their rankings.
struct RankedSample {
    std::vector<double> x;
    std::vector<double> y;
    Ranking pi;
    Ranking nu;
    /// Observations whose value repeats an earlier one (x and y respectively).
    std::size_t x_ties = 0;
    std::size_t y_ties = 0;

    std::size_t size() const noexcept { return pi.size(); }
};

struct FootruleComponents {
    std::vector<std::int64_t> d;
    std::vector<double> scaled;

    std::int64_t total() const;
};

/// Ranks by the counting definition; ties go to the earlier index as if it
/// were infinitesimally larger, so the result is always a permutation.
Ranking rank_vector(std::span<const double> values);

/// Number of tied observations (values equal to some earlier value).
std::size_t count_ties(std::span<const double> values);

RankedSample make_ranked_sample(std::vector<double> x, std::vector<double> y);

/// Sample whose raw values are the rankings themselves.
RankedSample make_ranked_sample(const Ranking& pi, const Ranking& nu);

/// Discordant pairs, by merge-sort inversion counting.
std::int64_t kendall_distance(const Ranking& pi, const Ranking& nu);

/// 1 - 4 D / (n (n - 1)).
double kendall_tau(const Ranking& pi, const Ranking& nu);
double kendall_tau(const RankedSample& sample);

FootruleComponents footrule_components(const Ranking& pi, const Ranking& nu);

/// (1 - pi_i / (n + 1), 1 - nu_i / (n + 1)).
std::vector<std::pair<double, double>> pseudo_observations(const RankedSample& sample);

/// c_i = number of j discordant with i.
std::vector<std::int64_t> per_point_discordance(const Ranking& pi, const Ranking& nu);
std::vector<std::int64_t> per_point_discordance(const RankedSample& sample);

/// Inversions of an integer sequence (pairs i < j with a_i > a_j).
std::int64_t count_inversions(std::vector<int> a);

}  // namespace hetcorr
