#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "kglp/dense_net.hpp"
#include "kglp/eval.hpp"
#include "kglp/features.hpp"
#include "kglp/kgem.hpp"

namespace kglp {

// One (KG, hyperparameter combo, seed) run: every validation query's rank
// next to the structural features of its originating triple.
struct ExperimentRecord {
    struct QueryEntry {
        FeatureVector features;
        QuerySide side = QuerySide::Object;
        double rank = 1.0;
    };

    std::string kg_name;
    KgemConfig config;
    std::uint64_t seed = 0;
    std::vector<QueryEntry> queries;
    double rank_max = 1.0; // number of entities in the KG
    double mrr = 0.0;

    // hash of the hyperparameter combination (seed excluded, so replicates
    // of the same combo share a key)
    [[nodiscard]] std::uint64_t combo_key() const;

    void validate() const; // mrr must be recomputable from ranks to 1e-9
};

// Trains one combo on kg.train and records per-query validation ranks.
ExperimentRecord build_record(const std::string& kg_name, const KnowledgeGraph& kg,
                              const GraphIndex& index, const KgemConfig& config,
                              TiePolicy policy = TiePolicy::Realistic);

struct RankHistogram {
    static constexpr int kBins = 30;
    std::array<double, kBins> mass{};
};

// Equal-width bins over [1, rank_max], masses sum to 1. Fractional ranks
// (from the rank transform) are binned the same way as integer ranks.
RankHistogram histogram(std::span<const double> ranks, double rank_max);

// Smoothed KL divergence: both histograms get additive epsilon then are
// renormalized, so empty bins are safe.
inline constexpr double kKlEpsilon = 1e-10;
double kl_div(const RankHistogram& p, const RankHistogram& q);

// sigmoid output (0,1) -> real rank on (1, rank_max)
inline double rank_transform(double y, double rank_max) {
    return 1.0 + y * (rank_max - 1.0);
}

// Numeric slots followed by one-hot groups; slot order is fixed and stored in
// checkpoints. Learning rate and regularizer coefficient are encoded on a
// log10 scale since the grids space them by decades.
struct HyperparamEncodingScheme {
    bool include_scoring = false; // cross-KGEM mode

    [[nodiscard]] int dim() const { return include_scoring ? 14 : 11; }
    [[nodiscard]] std::vector<std::string> slot_names() const;
    [[nodiscard]] std::vector<double> encode(const KgemConfig& config) const;
};

struct TwigConfig {
    int phase1_epochs = 5;
    int phase2_epochs = 10;
    double lr = 5e-3;
    double kl_coef_phase1 = 1.0;
    double kl_coef_phase2 = 1.0;
    double mse_coef_phase1 = 0.0;
    double mse_coef_phase2 = 10.0;
    std::vector<int> struct_hidden{16, 8};
    std::vector<int> hyp_hidden{16, 8};
    int trunk_hidden = 8;
    bool cross_kgem = false;
    std::uint64_t seed = 0;

    void validate() const;
};

// Two-branch simulator: latent codes for structure and hyperparameters are
// learned separately, then merged by a two-layer trunk ending in a sigmoid.
struct TwigModel {
    DenseNet struct_branch;
    DenseNet hyp_branch;
    DenseNet trunk; // exactly two layers; the phase-2 trainable set
    HyperparamEncodingScheme scheme;
    FeatureNormalizer struct_norm;
    FeatureNormalizer hyp_norm;
};

TwigModel init_twig(const TwigConfig& config);

// transformed predicted ranks for one combo over a block of query features
// (raw, unnormalized; n rows of 22)
std::vector<double> twig_predict_ranks(const TwigModel& model,
                                       std::span<const double> query_features, int n,
                                       const KgemConfig& combo, double rank_max);

// mean reciprocal of the transformed predicted ranks
double predict_mrr(const TwigModel& model, std::span<const double> query_features, int n,
                   const KgemConfig& combo, double rank_max);

struct TwigTrainResult {
    TwigModel model;
    std::vector<double> phase1_loss; // per epoch mean (hard-binned KL value)
    std::vector<double> phase2_loss;
};

// 2-phase protocol: phase 1 fits the rank distributions (KL only, all layers
// trainable); phase 2 freezes both branches and adds the MRR term, updating
// only the trunk's two layers.
TwigTrainResult train_twig(std::span<const ExperimentRecord> records, const TwigConfig& config);

// Loss + full parameter gradient for one record, exposed for the
// finite-difference tests. The KL term uses the differentiable soft binning
// here, matching what the training gradient descends.
double twig_loss_and_grad(const TwigModel& model, const ExperimentRecord& record,
                          double kl_coef, double mse_coef,
                          std::vector<double>& struct_grads, std::vector<double>& hyp_grads,
                          std::vector<double>& trunk_grads);

// coefficient of determination, 1 - SS_res/SS_tot
double r2(std::span<const double> predicted, std::span<const double> actual);

enum class ProtocolMode { HoldoutPct, ZeroShot, FewShot };

struct ProtocolSplit {
    std::vector<std::size_t> train_indices;
    std::vector<std::size_t> test_indices;
};

// holdout: a seeded pct% of combo keys held out across all KGs;
// zero-shot: every record of holdout_kg held out;
// few-shot: zero-shot, then pct% of the held-out KG's combos moved to train.
ProtocolSplit split_protocols(std::span<const ExperimentRecord> records, ProtocolMode mode,
                              double pct, const std::string& holdout_kg, std::uint64_t seed);

} // namespace kglp
