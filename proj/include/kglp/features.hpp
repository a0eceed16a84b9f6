#pragma once

#include <array>
#include <cstddef>
#include <span>
#include <string>
#include <vector>

#include "kglp/graph_index.hpp"

namespace kglp {

inline constexpr int kNumFeatures = 22;

// Canonical feature order. Fine-grained features of the core triple first,
// then the coarse-grained neighbourhood aggregates.
const std::array<std::string, kNumFeatures>& feature_names();

// index of a canonical feature name; throws ValidationError if unknown
int feature_index(const std::string& name);

struct FeatureVector {
    std::array<double, kNumFeatures> values{};

    double& operator[](std::size_t i) { return values[i]; }
    double operator[](std::size_t i) const { return values[i]; }
};

// (s_deg, o_deg, p_freq, sp_cofreq, op_cofreq, so_cofreq), all from the
// train-split index; combinations never observed in train are 0.
std::array<double, 6> fine_features(const GraphIndex& index, const Triple& t);

// Neighbourhood aggregates: subject block then object block, each block being
// (min_deg_nbr, max_deg_nbr, mean_deg_nbr, num_nbrs,
//  min_freq_rel, max_freq_rel, mean_freq_rel, num_rels).
// All eight values of a side are 0 when that endpoint has no train edges.
std::array<double, 16> coarse_features(const GraphIndex& index, const Triple& t);

// full 22-vector in canonical order
FeatureVector featurize(const GraphIndex& index, const Triple& t);

// Subset of canonical feature names to exclude from a model's input.
class AblationMask {
public:
    AblationMask() = default;
    explicit AblationMask(const std::vector<std::string>& excluded_names);

    [[nodiscard]] bool empty() const { return n_excluded_ == 0; }
    [[nodiscard]] bool excludes(int feature_idx) const { return excluded_[feature_idx]; }
    [[nodiscard]] int surviving_count() const { return kNumFeatures - n_excluded_; }
    [[nodiscard]] std::vector<int> surviving_indices() const;
    [[nodiscard]] std::vector<std::string> surviving_names() const;
    [[nodiscard]] std::vector<std::string> excluded_names() const;

private:
    std::array<bool, kNumFeatures> excluded_{};
    int n_excluded_ = 0;
};

// survivors of v in canonical order
std::vector<double> mask(const FeatureVector& v, const AblationMask& ablation);

// Column-wise z-score normalization fitted on a corpus of equal-length
// vectors. Population standard deviation; a column with zero variance gets
// its std floored to 1 so it maps to 0.
class FeatureNormalizer {
public:
    FeatureNormalizer() = default;
    FeatureNormalizer(std::vector<double> mean, std::vector<double> stddev);

    static FeatureNormalizer fit(const std::vector<std::vector<double>>& corpus);

    [[nodiscard]] std::vector<double> apply(const std::vector<double>& v) const;
    void apply_inplace(std::span<double> v) const;

    [[nodiscard]] std::size_t dim() const { return mean_.size(); }
    [[nodiscard]] const std::vector<double>& mean() const { return mean_; }
    [[nodiscard]] const std::vector<double>& stddev() const { return std_; }

private:
    std::vector<double> mean_;
    std::vector<double> std_;
};

} // namespace kglp
