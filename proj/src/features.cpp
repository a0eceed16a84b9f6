#include "kglp/features.hpp"

#include <cmath>

namespace kglp {

const std::array<std::string, kNumFeatures>& feature_names() {
    static const std::array<std::string, kNumFeatures> names = {
        "s_deg",          "o_deg",          "p_freq",
        "sp_cofreq",      "op_cofreq",      "so_cofreq",
        "s_min_deg_nbr",  "s_max_deg_nbr",  "s_mean_deg_nbr",
        "o_min_deg_nbr",  "o_max_deg_nbr",  "o_mean_deg_nbr",
        "s_num_nbrs",     "o_num_nbrs",
        "s_min_freq_rel", "s_max_freq_rel", "s_mean_freq_rel",
        "o_min_freq_rel", "o_max_freq_rel", "o_mean_freq_rel",
        "s_num_rels",     "o_num_rels",
    };
    return names;
}

int feature_index(const std::string& name) {
    const auto& names = feature_names();
    for (int i = 0; i < kNumFeatures; ++i) {
        if (names[i] == name) return i;
    }
    throw ValidationError("unknown feature name: " + name);
}

std::array<double, 6> fine_features(const GraphIndex& index, const Triple& t) {
    return {
        static_cast<double>(index.degree(t.subject)),
        static_cast<double>(index.degree(t.object)),
        static_cast<double>(index.pred_freq(t.predicate)),
        static_cast<double>(index.cofreq_sp(t.subject, t.predicate)),
        static_cast<double>(index.cofreq_op(t.object, t.predicate)),
        static_cast<double>(index.cofreq_so(t.subject, t.object)),
    };
}

std::array<double, 16> coarse_features(const GraphIndex& index, const Triple& t) {
    const auto& s = index.neighborhood(t.subject);
    const auto& o = index.neighborhood(t.object);
    return {
        s.min_deg_nbr, s.max_deg_nbr, s.mean_deg_nbr, s.num_nbrs,
        s.min_freq_rel, s.max_freq_rel, s.mean_freq_rel, s.num_rels,
        o.min_deg_nbr, o.max_deg_nbr, o.mean_deg_nbr, o.num_nbrs,
        o.min_freq_rel, o.max_freq_rel, o.mean_freq_rel, o.num_rels,
    };
}

FeatureVector featurize(const GraphIndex& index, const Triple& t) {
    const auto fine = fine_features(index, t);
    const auto& s = index.neighborhood(t.subject);
    const auto& o = index.neighborhood(t.object);
    FeatureVector v;
    for (std::size_t i = 0; i < fine.size(); ++i) v[i] = fine[i];
    v[6] = s.min_deg_nbr;
    v[7] = s.max_deg_nbr;
    v[8] = s.mean_deg_nbr;
    v[9] = o.min_deg_nbr;
    v[10] = o.max_deg_nbr;
    v[11] = o.mean_deg_nbr;
    v[12] = s.num_nbrs;
    v[13] = o.num_nbrs;
    v[14] = s.min_freq_rel;
    v[15] = s.max_freq_rel;
    v[16] = s.mean_freq_rel;
    v[17] = o.min_freq_rel;
    v[18] = o.max_freq_rel;
    v[19] = o.mean_freq_rel;
    v[20] = s.num_rels;
    v[21] = o.num_rels;
    return v;
}

AblationMask::AblationMask(const std::vector<std::string>& excluded_names) {
    for (const auto& name : excluded_names) {
        int idx = feature_index(name);
        if (!excluded_[idx]) {
            excluded_[idx] = true;
            ++n_excluded_;
        }
    }
}

std::vector<int> AblationMask::surviving_indices() const {
    std::vector<int> out;
    out.reserve(surviving_count());
    for (int i = 0; i < kNumFeatures; ++i) {
        if (!excluded_[i]) out.push_back(i);
    }
    return out;
}

std::vector<std::string> AblationMask::surviving_names() const {
    std::vector<std::string> out;
    for (int i : surviving_indices()) out.push_back(feature_names()[i]);
    return out;
}

std::vector<std::string> AblationMask::excluded_names() const {
    std::vector<std::string> out;
    for (int i = 0; i < kNumFeatures; ++i) {
        if (excluded_[i]) out.push_back(feature_names()[i]);
    }
    return out;
}

std::vector<double> mask(const FeatureVector& v, const AblationMask& ablation) {
    std::vector<double> out;
    out.reserve(ablation.surviving_count());
    for (int i = 0; i < kNumFeatures; ++i) {
        if (!ablation.excludes(i)) out.push_back(v[i]);
    }
    return out;
}

FeatureNormalizer::FeatureNormalizer(std::vector<double> mean, std::vector<double> stddev)
    : mean_(std::move(mean)), std_(std::move(stddev)) {
    if (mean_.size() != std_.size()) throw ValidationError("normalizer mean/std size mismatch");
    for (double s : std_) {
        if (!(s > 0.0)) throw ValidationError("normalizer std must be positive");
    }
}

FeatureNormalizer FeatureNormalizer::fit(const std::vector<std::vector<double>>& corpus) {
    if (corpus.empty()) throw ValidationError("cannot fit normalizer on an empty corpus");
    const std::size_t dim = corpus.front().size();
    const double n = static_cast<double>(corpus.size());

    std::vector<double> mean(dim, 0.0), var(dim, 0.0);
    for (const auto& row : corpus) {
        if (row.size() != dim) throw ValidationError("normalizer corpus rows differ in length");
        for (std::size_t j = 0; j < dim; ++j) mean[j] += row[j];
    }
    for (std::size_t j = 0; j < dim; ++j) mean[j] /= n;
    for (const auto& row : corpus) {
        for (std::size_t j = 0; j < dim; ++j) {
            double d = row[j] - mean[j];
            var[j] += d * d;
        }
    }
    std::vector<double> stddev(dim, 1.0);
    for (std::size_t j = 0; j < dim; ++j) {
        double s = std::sqrt(var[j] / n);
        stddev[j] = s > 1e-12 ? s : 1.0;
    }
    FeatureNormalizer out;
    out.mean_ = std::move(mean);
    out.std_ = std::move(stddev);
    return out;
}

std::vector<double> FeatureNormalizer::apply(const std::vector<double>& v) const {
    std::vector<double> out(v);
    apply_inplace(out);
    return out;
}

void FeatureNormalizer::apply_inplace(std::span<double> v) const {
    if (v.size() != mean_.size()) throw ValidationError("normalizer dimension mismatch");
    for (std::size_t j = 0; j < v.size(); ++j) v[j] = (v[j] - mean_[j]) / std_[j];
}

} // namespace kglp
