#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "kglp/dense_net.hpp"
#include "kglp/eval.hpp"
#include "kglp/features.hpp"
#include "kglp/graph_index.hpp"

namespace kglp {

struct TwigIConfig {
    int npp = 30;
    double lr = 5e-3;
    int batch_size = 128;
    double margin = 0.1;
    int epochs = 20;
    std::uint64_t seed = 0;
    std::vector<int> hidden{24, 8}; // paper fixes depth, not widths
    double dropout = 0.01;

    void validate() const;
};

// Structure-only link predictor: a small dense network over the (possibly
// ablated) 22 structural features, sigmoid output in (0,1). The feature list,
// ablation mask, and input normalizer travel with the model.
struct TwigIModel {
    DenseNet net;                 // input -> hidden1 -> hidden2 -> 1 (sigmoid)
    AblationMask ablation;
    std::vector<std::string> feature_names; // surviving features, canonical order
    FeatureNormalizer normalizer;           // fitted on the training corpus

    [[nodiscard]] int input_dim() const { return net.input_dim(); }
};

// Fresh model with fan-in uniform weights; deterministic for a fixed seed.
// The normalizer starts as identity and is replaced when training fits it.
TwigIModel init_twigi(const AblationMask& ablation, const std::vector<int>& hidden_dims,
                      double dropout, std::uint64_t seed);

// Batched scoring: x is n rows of already-normalized surviving features.
// Dropout fires only when training is set.
std::vector<double> twigi_forward(const TwigIModel& model, std::span<const double> x, int n,
                                  bool training, RngStream* dropout_rng,
                                  DenseNet::Cache* cache = nullptr);

struct TwigITrainResult {
    TwigIModel model;
    std::vector<double> epoch_loss;
};

using TwigIEpochCallback = std::function<void(int epoch, double mean_loss)>;

// Margin-ranking training against basic-sampled corruptions featurized with
// the same train-only index. Fits the normalizer before the first epoch.
TwigITrainResult train_twigi(const KnowledgeGraph& kg, const GraphIndex& index,
                             const TwigIConfig& config, const AblationMask& ablation,
                             const TwigIEpochCallback& on_epoch = {});

// Continues optimization of an existing model on a new KG: fresh optimizer
// state and a normalizer refitted on the new KG's train features. The feature
// list (ablation) must match the model's.
TwigITrainResult finetune_twigi(TwigIModel model, const KnowledgeGraph& new_kg,
                                const GraphIndex& new_index, const TwigIConfig& config,
                                const TwigIEpochCallback& on_epoch = {});

// Inference-mode scorer for lp-eval: featurizes candidate completions on the
// fly against the (train-only) index.
Scorer twigi_scorer(const TwigIModel& model, const GraphIndex& index);

// Loss and parameter gradient for one batch with fixed corruptions, dropout
// disabled. Exposed for the finite-difference tests.
double twigi_batch_loss_and_grad(const TwigIModel& model,
                                 const std::vector<std::vector<double>>& pos_rows,
                                 const std::vector<std::vector<std::vector<double>>>& neg_rows,
                                 double margin, std::vector<double>& param_grads);

} // namespace kglp
