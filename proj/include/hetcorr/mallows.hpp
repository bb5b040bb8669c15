#pragma once

#include <cstdint>
#include <utility>
#include <vector>

#include "hetcorr/rank.hpp"

namespace hetcorr {

/// Upper end of the scale bracket; fits that hit it are flagged as saturated.
inline constexpr double kScaleCap = 50.0;
inline constexpr double kScaleFloor = 1e-12;
inline constexpr double kScaleTolerance = 1e-10;

/// log sum_{i=0}^{k} e^{-i theta}; theta >= 0.
double stage_log_normalizer(double theta, std::size_t k);

/// Mean of the truncated geometric law on {0..k} with weights e^{-theta j}.
double stage_expected_v(double theta, std::size_t k);

/// log C(phi)^{-1} = sum_{k=1}^{n-1} log sum_{i=0}^{k} e^{-i phi}.
double log_normalizer(double phi, std::size_t n);

/// E_phi[D] under Mallows(phi) on n items.
double expected_distance(double phi, std::size_t n);

/// One Mallows draw centered at the identity ranking.
Ranking sample_mallows(double phi, std::size_t n, std::uint64_t seed);

struct MallowsFit {
    double phi_hat = 0.0;
    double log_likelihood = 0.0;
    std::int64_t distance = 0;
    std::size_t n = 0;
    bool saturated = false;  // phi_hat pinned at kScaleCap
    bool boundary = false;   // phi_hat pinned at 0
};

MallowsFit mallows_mle(std::int64_t distance, std::size_t n);

/// Stage counts v_1..v_{n-1} with 0 <= v_k <= k.
class StageVector {
public:
    StageVector() = default;
    explicit StageVector(std::vector<int> v);

    std::size_t size() const noexcept { return v_.size(); }
    int operator[](std::size_t i) const noexcept { return v_[i]; }
    const std::vector<int>& values() const noexcept { return v_; }
    std::int64_t total() const;

private:
    std::vector<int> v_;
};

/// Inputs are the x and y rankings listed in processing order; v_k counts the
/// first k items discordant with item k + 1.
StageVector multistage_decompose(const Ranking& x_in_order, const Ranking& y_in_order);

/// Inverse of the decomposition against the identity: the ranking nu whose
/// stage vector (in index order) is `v`.
Ranking ranking_from_stages(const StageVector& v);

struct MultistageFit {
    std::vector<double> theta;                               // one per stage
    std::vector<std::pair<std::size_t, std::size_t>> blocks; // 1-based inclusive stage ranges
    std::vector<double> block_theta;
    double log_likelihood = 0.0;
    std::size_t saturated_blocks = 0;
    std::size_t boundary_blocks = 0;
};

/// ceil(sqrt(n - 1)).
std::size_t default_block_count(std::size_t n);

MultistageFit multistage_fit_smooth(const StageVector& v, std::size_t block_count);

}  // namespace hetcorr
