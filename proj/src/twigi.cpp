#include "kglp/twigi.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <sstream>

#include "kglp/sampler.hpp"

namespace kglp {

void TwigIConfig::validate() const {
    if (npp < 1) throw ValidationError("negatives per positive must be >= 1");
    if (!(lr > 0.0)) throw ValidationError("learning rate must be > 0");
    if (batch_size < 1) throw ValidationError("batch size must be >= 1");
    if (margin < 0.0) throw ValidationError("margin must be >= 0");
    if (epochs < 0) throw ValidationError("epochs must be >= 0");
    if (hidden.empty()) throw ValidationError("at least one hidden layer required");
    if (dropout < 0.0 || dropout >= 1.0) throw ValidationError("dropout must be in [0,1)");
}

TwigIModel init_twigi(const AblationMask& ablation, const std::vector<int>& hidden_dims,
                      double dropout, std::uint64_t seed) {
    const int input_dim = ablation.surviving_count();
    if (input_dim <= 0) throw ValidationError("ablation leaves no input features");
    if (hidden_dims.empty()) throw ValidationError("at least one hidden layer required");

    std::vector<LayerSpec> spec;
    int prev = input_dim;
    for (int h : hidden_dims) {
        spec.push_back({prev, h, Activation::Relu});
        prev = h;
    }
    spec.push_back({prev, 1, Activation::Sigmoid});

    auto rng = RngStream::named(seed, "twigi/init");
    TwigIModel model;
    model.net = DenseNet(std::move(spec), dropout, rng);
    model.ablation = ablation;
    model.feature_names = ablation.surviving_names();
    model.normalizer = FeatureNormalizer(std::vector<double>(input_dim, 0.0),
                                         std::vector<double>(input_dim, 1.0));
    return model;
}

std::vector<double> twigi_forward(const TwigIModel& model, std::span<const double> x, int n,
                                  bool training, RngStream* dropout_rng,
                                  DenseNet::Cache* cache) {
    return model.net.forward(x, n, training, dropout_rng, cache);
}

namespace {

std::vector<double> normalized_features(const TwigIModel& model, const GraphIndex& index,
                                        const Triple& t) {
    auto row = mask(featurize(index, t), model.ablation);
    model.normalizer.apply_inplace(row);
    return row;
}

// mean margin-ranking loss over all (positive, negative) pairs; fills
// dscore (length n_rows) with dLoss/d(net output)
double pairwise_mrl(std::span<const double> scores, std::size_t n_pos, int npp, double margin,
                    std::span<double> dscore) {
    const double inv = 1.0 / static_cast<double>(n_pos * static_cast<std::size_t>(npp));
    double loss = 0.0;
    for (std::size_t i = 0; i < n_pos; ++i) {
        const double pos = scores[i];
        for (int k = 0; k < npp; ++k) {
            const std::size_t ni = n_pos + i * static_cast<std::size_t>(npp) + k;
            const double v = margin + scores[ni] - pos;
            if (v > 0.0) {
                loss += v * inv;
                dscore[i] -= inv;
                dscore[ni] += inv;
            }
        }
    }
    return loss;
}

TwigITrainResult run_training(TwigIModel model, const KnowledgeGraph& kg,
                              const GraphIndex& index, const TwigIConfig& config,
                              const TwigIEpochCallback& on_epoch) {
    config.validate();
    if (kg.train.empty()) throw ValidationError("cannot train on an empty train split");

    // z-scores are fitted on the training corpus before the first epoch
    {
        std::vector<std::vector<double>> corpus;
        corpus.reserve(kg.train.size());
        for (const auto& t : kg.train) corpus.push_back(mask(featurize(index, t), model.ablation));
        model.normalizer = FeatureNormalizer::fit(corpus);
    }

    TwigITrainResult result;
    NegativeSampler sampler(index, SamplerKind::Basic);
    auto shuffle_rng = RngStream::named(config.seed, "twigi/shuffle");
    auto neg_rng = RngStream::named(config.seed, "twigi/negatives");
    auto drop_rng = RngStream::named(config.seed, "twigi/dropout");

    AdamState adam(model.net.params().size());
    std::vector<double> grads(model.net.params().size());
    const int in_dim = model.input_dim();

    std::vector<std::size_t> order(kg.train.size());
    std::iota(order.begin(), order.end(), 0);

    for (int epoch = 0; epoch < config.epochs; ++epoch) {
        for (std::size_t i = order.size(); i > 1; --i) {
            std::swap(order[i - 1], order[shuffle_rng.next_index(i)]);
        }

        double epoch_loss = 0.0;
        std::size_t n_batches = 0;
        for (std::size_t start = 0; start < order.size(); start += config.batch_size) {
            const std::size_t end = std::min(order.size(), start + config.batch_size);
            const std::size_t b = end - start;
            const std::size_t rows = b * (1 + static_cast<std::size_t>(config.npp));

            std::vector<double> x(rows * in_dim);
            for (std::size_t i = 0; i < b; ++i) {
                const Triple& pos = kg.train[order[start + i]];
                auto row = normalized_features(model, index, pos);
                std::copy(row.begin(), row.end(), x.begin() + i * in_dim);
                for (int k = 0; k < config.npp; ++k) {
                    Corruption c = sampler.sample_one(pos, neg_rng, nullptr);
                    auto neg = normalized_features(model, index, apply_corruption(pos, c));
                    const std::size_t r = b + i * static_cast<std::size_t>(config.npp) + k;
                    std::copy(neg.begin(), neg.end(), x.begin() + r * in_dim);
                }
            }

            DenseNet::Cache cache;
            auto scores = model.net.forward(x, static_cast<int>(rows), true, &drop_rng, &cache);
            std::vector<double> dscore(rows, 0.0);
            double loss = pairwise_mrl(scores, b, config.npp, config.margin, dscore);
            if (!std::isfinite(loss)) {
                std::ostringstream msg;
                msg << "non-finite loss at epoch " << epoch << ", batch " << n_batches;
                throw RuntimeFault(msg.str());
            }
            std::fill(grads.begin(), grads.end(), 0.0);
            model.net.backward(cache, dscore, grads);
            adam.step(model.net.params(), grads, config.lr);

            epoch_loss += loss;
            ++n_batches;
        }
        epoch_loss /= static_cast<double>(n_batches);
        result.epoch_loss.push_back(epoch_loss);
        if (on_epoch) on_epoch(epoch, epoch_loss);
    }
    result.model = std::move(model);
    return result;
}

} // namespace

TwigITrainResult train_twigi(const KnowledgeGraph& kg, const GraphIndex& index,
                             const TwigIConfig& config, const AblationMask& ablation,
                             const TwigIEpochCallback& on_epoch) {
    config.validate();
    TwigIModel model = init_twigi(ablation, config.hidden, config.dropout, config.seed);
    return run_training(std::move(model), kg, index, config, on_epoch);
}

TwigITrainResult finetune_twigi(TwigIModel model, const KnowledgeGraph& new_kg,
                                const GraphIndex& new_index, const TwigIConfig& config,
                                const TwigIEpochCallback& on_epoch) {
    if (model.feature_names != model.ablation.surviving_names()) {
        throw ValidationError("model feature list does not match its ablation mask");
    }
    if (config.epochs == 0) {
        // explicit no-op: weights unchanged, normalizer untouched
        TwigITrainResult result;
        result.model = std::move(model);
        return result;
    }
    return run_training(std::move(model), new_kg, new_index, config, on_epoch);
}

Scorer twigi_scorer(const TwigIModel& model, const GraphIndex& index) {
    return [&model, &index](const Triple& t) {
        auto row = normalized_features(model, index, t);
        auto out = model.net.forward(row, 1, false, nullptr, nullptr);
        return out[0];
    };
}

double twigi_batch_loss_and_grad(const TwigIModel& model,
                                 const std::vector<std::vector<double>>& pos_rows,
                                 const std::vector<std::vector<std::vector<double>>>& neg_rows,
                                 double margin, std::vector<double>& param_grads) {
    const std::size_t b = pos_rows.size();
    if (neg_rows.size() != b || b == 0) throw ValidationError("bad batch shapes");
    const int npp = static_cast<int>(neg_rows.front().size());
    const int in_dim = model.input_dim();
    const std::size_t rows = b * (1 + static_cast<std::size_t>(npp));

    std::vector<double> x(rows * in_dim);
    for (std::size_t i = 0; i < b; ++i) {
        std::copy(pos_rows[i].begin(), pos_rows[i].end(), x.begin() + i * in_dim);
        for (int k = 0; k < npp; ++k) {
            const std::size_t r = b + i * static_cast<std::size_t>(npp) + k;
            std::copy(neg_rows[i][k].begin(), neg_rows[i][k].end(), x.begin() + r * in_dim);
        }
    }
    DenseNet::Cache cache;
    auto scores = model.net.forward(x, static_cast<int>(rows), false, nullptr, &cache);
    std::vector<double> dscore(rows, 0.0);
    double loss = pairwise_mrl(scores, b, npp, margin, dscore);
    if (param_grads.size() != model.net.params().size()) {
        param_grads.assign(model.net.params().size(), 0.0);
    }
    model.net.backward(cache, dscore, param_grads);
    return loss;
}

} // namespace kglp
