#include "kglp/twig.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <numeric>
#include <sstream>
#include <string_view>
#include <unordered_set>

namespace kglp {

namespace {

void append_fnv(std::uint64_t& h, const std::string& s) {
    for (char c : s) {
        h ^= static_cast<unsigned char>(c);
        h *= 0x100000001b3ull;
    }
    h ^= '|';
    h *= 0x100000001b3ull;
}

std::string num_str(double v) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

} // namespace

std::uint64_t ExperimentRecord::combo_key() const {
    std::uint64_t h = 0xcbf29ce484222325ull;
    append_fnv(h, to_string(config.scoring));
    append_fnv(h, std::to_string(config.dim));
    append_fnv(h, to_string(config.loss));
    append_fnv(h, config.margin ? num_str(*config.margin) : "none");
    append_fnv(h, to_string(config.sampler));
    append_fnv(h, std::to_string(config.npp));
    append_fnv(h, num_str(config.lr));
    append_fnv(h, num_str(config.reg_coef));
    append_fnv(h, std::to_string(config.transe_norm));
    append_fnv(h, std::to_string(config.batch_size));
    append_fnv(h, std::to_string(config.epochs));
    return h;
}

void ExperimentRecord::validate() const {
    if (queries.empty()) throw ValidationError("experiment record has no queries");
    if (rank_max < 1.0) throw ValidationError("rank_max must be >= 1");
    double rsum = 0.0;
    for (const auto& q : queries) {
        if (q.rank < 1.0 || q.rank > rank_max) {
            throw ValidationError("record rank outside [1, rank_max]");
        }
        rsum += 1.0 / q.rank;
    }
    const double recomputed = rsum / static_cast<double>(queries.size());
    if (std::abs(recomputed - mrr) > 1e-9) {
        std::ostringstream msg;
        msg << "record MRR " << mrr << " does not match its ranks (" << recomputed << ")";
        throw ValidationError(msg.str());
    }
}

ExperimentRecord build_record(const std::string& kg_name, const KnowledgeGraph& kg,
                              const GraphIndex& index, const KgemConfig& config,
                              TiePolicy policy) {
    if (kg.valid.empty()) throw ValidationError("no validation triples to build a record from");

    auto trained = train_kgem(kg, index, config);
    const auto scorer = kgem_scorer(trained.model);
    const auto filter = kg.all_true_triples();

    ExperimentRecord rec;
    rec.kg_name = kg_name;
    rec.config = config;
    rec.seed = config.seed;
    rec.rank_max = static_cast<double>(kg.entities.size());

    double rsum = 0.0;
    for (const auto& t : kg.valid) {
        const FeatureVector fv = featurize(index, t);
        for (const auto& q : make_queries(std::span(&t, 1))) {
            auto rr = rank_query(scorer, q, filter, policy, kg.entities.size());
            rec.queries.push_back({fv, q.side, static_cast<double>(rr.rank)});
            rsum += 1.0 / static_cast<double>(rr.rank);
        }
    }
    rec.mrr = rsum / static_cast<double>(rec.queries.size());
    rec.validate();
    return rec;
}

RankHistogram histogram(std::span<const double> ranks, double rank_max) {
    if (ranks.empty()) throw ValidationError("cannot build a histogram of zero ranks");
    RankHistogram h;
    const double per = 1.0 / static_cast<double>(ranks.size());
    if (rank_max <= 1.0) {
        h.mass[0] = 1.0;
        return h;
    }
    const double width = (rank_max - 1.0) / RankHistogram::kBins;
    for (double r : ranks) {
        int bin = static_cast<int>(std::floor((r - 1.0) / width));
        bin = std::clamp(bin, 0, RankHistogram::kBins - 1);
        h.mass[bin] += per;
    }
    return h;
}

double kl_div(const RankHistogram& p, const RankHistogram& q) {
    const double norm = 1.0 + RankHistogram::kBins * kKlEpsilon;
    double acc = 0.0;
    for (int i = 0; i < RankHistogram::kBins; ++i) {
        const double pi = (p.mass[i] + kKlEpsilon) / norm;
        const double qi = (q.mass[i] + kKlEpsilon) / norm;
        acc += pi * std::log(pi / qi);
    }
    return acc;
}

std::vector<std::string> HyperparamEncodingScheme::slot_names() const {
    std::vector<std::string> names{
        "lr_log10", "reg_log10", "npp", "dim", "margin_or_0",
        "loss_mrl", "loss_bcel", "loss_cel",
        "sampler_basic", "sampler_bernoulli", "sampler_pseudo",
    };
    if (include_scoring) {
        names.insert(names.end(), {"scoring_transe", "scoring_distmult", "scoring_complex"});
    }
    return names;
}

std::vector<double> HyperparamEncodingScheme::encode(const KgemConfig& config) const {
    std::vector<double> enc;
    enc.reserve(dim());
    enc.push_back(std::log10(std::max(config.lr, 1e-300)));
    enc.push_back(config.reg_coef > 0.0 ? std::log10(config.reg_coef) : -12.0);
    enc.push_back(static_cast<double>(config.npp));
    enc.push_back(static_cast<double>(config.dim));
    enc.push_back(config.margin.value_or(0.0));
    enc.push_back(config.loss == LossKind::MRL ? 1.0 : 0.0);
    enc.push_back(config.loss == LossKind::BCEL ? 1.0 : 0.0);
    enc.push_back(config.loss == LossKind::CEL ? 1.0 : 0.0);
    enc.push_back(config.sampler == SamplerKind::Basic ? 1.0 : 0.0);
    enc.push_back(config.sampler == SamplerKind::Bernoulli ? 1.0 : 0.0);
    enc.push_back(config.sampler == SamplerKind::PseudoTyped ? 1.0 : 0.0);
    if (include_scoring) {
        enc.push_back(config.scoring == ScoringKind::TransE ? 1.0 : 0.0);
        enc.push_back(config.scoring == ScoringKind::DistMult ? 1.0 : 0.0);
        enc.push_back(config.scoring == ScoringKind::ComplEx ? 1.0 : 0.0);
    }
    return enc;
}

void TwigConfig::validate() const {
    if (phase1_epochs < 0 || phase2_epochs < 0) throw ValidationError("epochs must be >= 0");
    if (!(lr > 0.0)) throw ValidationError("learning rate must be > 0");
    if (struct_hidden.size() != 2 || hyp_hidden.size() != 2) {
        throw ValidationError("branches use exactly two dense layers");
    }
    if (trunk_hidden < 1) throw ValidationError("trunk hidden width must be >= 1");
}

TwigModel init_twig(const TwigConfig& config) {
    config.validate();
    TwigModel m;
    m.scheme.include_scoring = config.cross_kgem;

    auto rs = RngStream::named(config.seed, "twig/init-struct");
    auto rh = RngStream::named(config.seed, "twig/init-hyp");
    auto rt = RngStream::named(config.seed, "twig/init-trunk");

    m.struct_branch = DenseNet(
        {{kNumFeatures, config.struct_hidden[0], Activation::Relu},
         {config.struct_hidden[0], config.struct_hidden[1], Activation::Relu}},
        0.0, rs);
    m.hyp_branch = DenseNet({{m.scheme.dim(), config.hyp_hidden[0], Activation::Relu},
                             {config.hyp_hidden[0], config.hyp_hidden[1], Activation::Relu}},
                            0.0, rh);
    const int trunk_in = config.struct_hidden[1] + config.hyp_hidden[1];
    m.trunk = DenseNet({{trunk_in, config.trunk_hidden, Activation::Relu},
                        {config.trunk_hidden, 1, Activation::Sigmoid}},
                       0.0, rt);

    m.struct_norm = FeatureNormalizer(std::vector<double>(kNumFeatures, 0.0),
                                      std::vector<double>(kNumFeatures, 1.0));
    m.hyp_norm = FeatureNormalizer(std::vector<double>(m.scheme.dim(), 0.0),
                                   std::vector<double>(m.scheme.dim(), 1.0));
    return m;
}

namespace {

// forward through both branches and the trunk; x_struct is n rows of
// normalized features, enc the normalized hyperparameter encoding
std::vector<double> twig_forward(const TwigModel& model, std::span<const double> x_struct, int n,
                                 std::span<const double> enc, DenseNet::Cache* sc,
                                 DenseNet::Cache* hc, DenseNet::Cache* tc) {
    auto s_out = model.struct_branch.forward(x_struct, n, false, nullptr, sc);
    auto h_out = model.hyp_branch.forward(enc, 1, false, nullptr, hc);
    const int sd = model.struct_branch.output_dim();
    const int hd = model.hyp_branch.output_dim();

    std::vector<double> trunk_in(static_cast<std::size_t>(n) * (sd + hd));
    for (int r = 0; r < n; ++r) {
        double* row = trunk_in.data() + static_cast<std::size_t>(r) * (sd + hd);
        const double* srow = s_out.data() + static_cast<std::size_t>(r) * sd;
        std::copy(srow, srow + sd, row);
        std::copy(h_out.begin(), h_out.end(), row + sd);
    }
    return model.trunk.forward(trunk_in, n, false, nullptr, tc);
}

// Gaussian soft assignment with full-histogram support, so the KL gradient
// can see target mass arbitrarily far from a predicted rank (a narrow kernel
// has zero gradient toward distant bins and stalls) and stays smooth
// everywhere (a kernel with kinks fails finite-difference validation).
constexpr double kSoftKernelSigmaBins = 8.0;

struct SoftBinAssignment {
    std::array<double, RankHistogram::kBins> mass{};     // normalized, sums to 1
    std::array<double, RankHistogram::kBins> dmass_dr{}; // per unit of rank
};

SoftBinAssignment soft_assign(double rank, double rank_max) {
    SoftBinAssignment a;
    if (rank_max <= 1.0) {
        a.mass[0] = 1.0;
        return a;
    }
    const double bin_width = (rank_max - 1.0) / RankHistogram::kBins;
    const double t = (rank - 1.0) / bin_width; // continuous bin coordinate
    const double inv_sigma2 = 1.0 / (kSoftKernelSigmaBins * kSoftKernelSigmaBins);
    std::array<double, RankHistogram::kBins> k{}, kp{};
    double sum = 0.0, sum_p = 0.0;
    for (int j = 0; j < RankHistogram::kBins; ++j) {
        const double d = t - (static_cast<double>(j) + 0.5);
        k[j] = std::exp(-0.5 * d * d * inv_sigma2);
        kp[j] = -d * inv_sigma2 * k[j];
        sum += k[j];
        sum_p += kp[j];
    }
    const double dt_dr = 1.0 / bin_width;
    for (int j = 0; j < RankHistogram::kBins; ++j) {
        a.mass[j] = k[j] / sum;
        a.dmass_dr[j] = (kp[j] * sum - k[j] * sum_p) / (sum * sum) * dt_dr;
    }
    return a;
}

RankHistogram soft_histogram(std::span<const double> ranks, double rank_max) {
    RankHistogram h;
    if (rank_max <= 1.0) {
        h.mass[0] = 1.0;
        return h;
    }
    const double per = 1.0 / static_cast<double>(ranks.size());
    for (double r : ranks) {
        auto a = soft_assign(r, rank_max);
        for (int j = 0; j < RankHistogram::kBins; ++j) h.mass[j] += a.mass[j] * per;
    }
    return h;
}

struct PreparedRecord {
    std::vector<double> x_norm; // n x 22
    std::vector<double> enc_norm;
    int n = 0;
    double rank_max = 1.0;
    RankHistogram true_hist;      // hard-binned, for the reported loss value
    RankHistogram true_hist_soft; // kernel-smoothed, target of the gradient path
    double true_mrr = 0.0;
};

PreparedRecord prepare(const TwigModel& model, const ExperimentRecord& rec) {
    PreparedRecord p;
    p.n = static_cast<int>(rec.queries.size());
    p.rank_max = rec.rank_max;
    p.x_norm.resize(static_cast<std::size_t>(p.n) * kNumFeatures);
    std::vector<double> ranks;
    ranks.reserve(p.n);
    for (int i = 0; i < p.n; ++i) {
        const auto& q = rec.queries[i];
        std::copy(q.features.values.begin(), q.features.values.end(),
                  p.x_norm.begin() + static_cast<std::size_t>(i) * kNumFeatures);
        model.struct_norm.apply_inplace(
            std::span(p.x_norm.data() + static_cast<std::size_t>(i) * kNumFeatures,
                      kNumFeatures));
        ranks.push_back(q.rank);
    }
    p.enc_norm = model.hyp_norm.apply(model.scheme.encode(rec.config));
    p.true_hist = histogram(ranks, rec.rank_max);
    p.true_hist_soft = soft_histogram(ranks, rec.rank_max);
    p.true_mrr = rec.mrr;
    return p;
}

// Computes loss and d(loss)/dy for a prepared record given predicted sigmoid
// outputs y. The returned value uses hard binning for the KL term; the
// gradient descends the KL between kernel-smoothed predicted and true
// histograms, which is smooth, reaches distant target mass, and vanishes
// exactly when the distributions match. When soft_value is set the value
// itself is the smoothed one (used by the finite-difference oracle).
double combo_loss(const PreparedRecord& p, std::span<const double> y, double kl_coef,
                  double mse_coef, std::span<double> dy, bool soft_value) {
    const int n = p.n;
    std::vector<double> ranks(n);
    for (int i = 0; i < n; ++i) ranks[i] = rank_transform(y[i], p.rank_max);

    double inv_rank_sum = 0.0;
    for (int i = 0; i < n; ++i) inv_rank_sum += 1.0 / ranks[i];
    const double pred_mrr = inv_rank_sum / static_cast<double>(n);

    const RankHistogram soft = soft_histogram(ranks, p.rank_max);
    const double kl_value = soft_value
                                ? kl_div(soft, p.true_hist_soft)
                                : kl_div(histogram(ranks, p.rank_max), p.true_hist);
    const double mse = (pred_mrr - p.true_mrr) * (pred_mrr - p.true_mrr);
    const double loss = kl_coef * kl_value + mse_coef * mse;

    if (!dy.empty()) {
        // d(KL(soft_pred || soft_true))/d(soft mass_j)
        const double norm = 1.0 + RankHistogram::kBins * kKlEpsilon;
        std::array<double, RankHistogram::kBins> dkl_dmass{};
        for (int j = 0; j < RankHistogram::kBins; ++j) {
            const double pj = (soft.mass[j] + kKlEpsilon) / norm;
            const double qj = (p.true_hist_soft.mass[j] + kKlEpsilon) / norm;
            dkl_dmass[j] = (std::log(pj / qj) + 1.0) / norm;
        }
        const double dmse_dmrr = 2.0 * (pred_mrr - p.true_mrr);
        const double per = 1.0 / static_cast<double>(n);
        const double dr_dy = p.rank_max - 1.0;
        for (int i = 0; i < n; ++i) {
            double dloss_dr = 0.0;
            if (kl_coef != 0.0 && p.rank_max > 1.0) {
                auto a = soft_assign(ranks[i], p.rank_max);
                double acc = 0.0;
                for (int j = 0; j < RankHistogram::kBins; ++j) {
                    acc += dkl_dmass[j] * a.dmass_dr[j];
                }
                dloss_dr += kl_coef * per * acc;
            }
            if (mse_coef != 0.0) {
                dloss_dr += mse_coef * dmse_dmrr * (-per / (ranks[i] * ranks[i]));
            }
            dy[i] = dloss_dr * dr_dy;
        }
    }
    return loss;
}

double record_step(const TwigModel& model, const PreparedRecord& p, double kl_coef,
                   double mse_coef, bool soft_value, std::vector<double>* struct_grads,
                   std::vector<double>* hyp_grads, std::vector<double>* trunk_grads) {
    DenseNet::Cache sc, hc, tc;
    auto y = twig_forward(model, p.x_norm, p.n, p.enc_norm, &sc, &hc, &tc);

    std::vector<double> dy(p.n, 0.0);
    const bool want_grads = trunk_grads != nullptr;
    double loss = combo_loss(p, y, kl_coef, mse_coef,
                             want_grads ? std::span<double>(dy) : std::span<double>(),
                             soft_value);
    if (!want_grads) return loss;

    auto d_trunk_in = model.trunk.backward(tc, dy, *trunk_grads);
    if (struct_grads || hyp_grads) {
        const int sd = model.struct_branch.output_dim();
        const int hd = model.hyp_branch.output_dim();
        std::vector<double> d_struct(static_cast<std::size_t>(p.n) * sd);
        std::vector<double> d_hyp(hd, 0.0);
        for (int r = 0; r < p.n; ++r) {
            const double* row = d_trunk_in.data() + static_cast<std::size_t>(r) * (sd + hd);
            std::copy(row, row + sd, d_struct.data() + static_cast<std::size_t>(r) * sd);
            for (int j = 0; j < hd; ++j) d_hyp[j] += row[sd + j];
        }
        if (struct_grads) model.struct_branch.backward(sc, d_struct, *struct_grads);
        if (hyp_grads) model.hyp_branch.backward(hc, d_hyp, *hyp_grads);
    }
    return loss;
}

} // namespace

std::vector<double> twig_predict_ranks(const TwigModel& model,
                                       std::span<const double> query_features, int n,
                                       const KgemConfig& combo, double rank_max) {
    if (static_cast<int>(query_features.size()) != n * kNumFeatures) {
        throw ValidationError("query feature block has wrong width");
    }
    std::vector<double> x(query_features.begin(), query_features.end());
    for (int i = 0; i < n; ++i) {
        model.struct_norm.apply_inplace(
            std::span(x.data() + static_cast<std::size_t>(i) * kNumFeatures, kNumFeatures));
    }
    auto enc = model.hyp_norm.apply(model.scheme.encode(combo));
    auto y = twig_forward(model, x, n, enc, nullptr, nullptr, nullptr);
    std::vector<double> ranks(n);
    for (int i = 0; i < n; ++i) ranks[i] = rank_transform(y[i], rank_max);
    return ranks;
}

double predict_mrr(const TwigModel& model, std::span<const double> query_features, int n,
                   const KgemConfig& combo, double rank_max) {
    auto ranks = twig_predict_ranks(model, query_features, n, combo, rank_max);
    return mrr_of_ranks(ranks);
}

double twig_loss_and_grad(const TwigModel& model, const ExperimentRecord& record,
                          double kl_coef, double mse_coef,
                          std::vector<double>& struct_grads, std::vector<double>& hyp_grads,
                          std::vector<double>& trunk_grads) {
    if (struct_grads.size() != model.struct_branch.params().size()) {
        struct_grads.assign(model.struct_branch.params().size(), 0.0);
    }
    if (hyp_grads.size() != model.hyp_branch.params().size()) {
        hyp_grads.assign(model.hyp_branch.params().size(), 0.0);
    }
    if (trunk_grads.size() != model.trunk.params().size()) {
        trunk_grads.assign(model.trunk.params().size(), 0.0);
    }
    auto prepared = prepare(model, record);
    return record_step(model, prepared, kl_coef, mse_coef, /*soft_value=*/true, &struct_grads,
                       &hyp_grads, &trunk_grads);
}

TwigTrainResult train_twig(std::span<const ExperimentRecord> records, const TwigConfig& config) {
    config.validate();
    {
        std::vector<std::uint64_t> keys;
        for (const auto& r : records) keys.push_back(r.combo_key());
        std::sort(keys.begin(), keys.end());
        keys.erase(std::unique(keys.begin(), keys.end()), keys.end());
        if (keys.size() < 2) {
            throw ValidationError("twig training needs records from at least 2 combos");
        }
    }

    TwigTrainResult result;
    result.model = init_twig(config);
    TwigModel& model = result.model;

    // normalizers fitted over the training records only
    {
        std::vector<std::vector<double>> struct_corpus;
        std::vector<std::vector<double>> hyp_corpus;
        for (const auto& rec : records) {
            rec.validate();
            for (const auto& q : rec.queries) {
                struct_corpus.emplace_back(q.features.values.begin(), q.features.values.end());
            }
            hyp_corpus.push_back(model.scheme.encode(rec.config));
        }
        model.struct_norm = FeatureNormalizer::fit(struct_corpus);
        model.hyp_norm = FeatureNormalizer::fit(hyp_corpus);
    }

    std::vector<PreparedRecord> prepared;
    prepared.reserve(records.size());
    for (const auto& rec : records) prepared.push_back(prepare(model, rec));

    auto order_rng = RngStream::named(config.seed, "twig/shuffle");
    std::vector<std::size_t> order(prepared.size());
    std::iota(order.begin(), order.end(), 0);

    std::vector<double> gs(model.struct_branch.params().size());
    std::vector<double> gh(model.hyp_branch.params().size());
    std::vector<double> gt(model.trunk.params().size());

    auto run_phase = [&](int epochs, double kl_coef, double mse_coef, bool freeze_branches,
                         std::vector<double>& history) {
        AdamState adam_s(gs.size());
        AdamState adam_h(gh.size());
        AdamState adam_t(gt.size());
        for (int epoch = 0; epoch < epochs; ++epoch) {
            for (std::size_t i = order.size(); i > 1; --i) {
                std::swap(order[i - 1], order[order_rng.next_index(i)]);
            }
            double epoch_loss = 0.0;
            for (std::size_t idx : order) {
                std::fill(gs.begin(), gs.end(), 0.0);
                std::fill(gh.begin(), gh.end(), 0.0);
                std::fill(gt.begin(), gt.end(), 0.0);
                double loss = record_step(model, prepared[idx], kl_coef, mse_coef,
                                          /*soft_value=*/false,
                                          freeze_branches ? nullptr : &gs,
                                          freeze_branches ? nullptr : &gh, &gt);
                if (!std::isfinite(loss)) {
                    throw RuntimeFault("non-finite twig loss at epoch " + std::to_string(epoch));
                }
                if (!freeze_branches) {
                    adam_s.step(model.struct_branch.params(), gs, config.lr);
                    adam_h.step(model.hyp_branch.params(), gh, config.lr);
                }
                adam_t.step(model.trunk.params(), gt, config.lr);
                epoch_loss += loss;
            }
            history.push_back(epoch_loss / static_cast<double>(order.size()));
        }
    };

    run_phase(config.phase1_epochs, config.kl_coef_phase1, config.mse_coef_phase1,
              /*freeze_branches=*/false, result.phase1_loss);
    run_phase(config.phase2_epochs, config.kl_coef_phase2, config.mse_coef_phase2,
              /*freeze_branches=*/true, result.phase2_loss);
    return result;
}

double r2(std::span<const double> predicted, std::span<const double> actual) {
    if (predicted.size() != actual.size()) throw ValidationError("r2: size mismatch");
    if (predicted.size() < 2) throw ValidationError("r2 needs at least 2 points");
    double mean = 0.0;
    for (double a : actual) mean += a;
    mean /= static_cast<double>(actual.size());
    double ss_tot = 0.0, ss_res = 0.0;
    for (std::size_t i = 0; i < actual.size(); ++i) {
        ss_tot += (actual[i] - mean) * (actual[i] - mean);
        ss_res += (actual[i] - predicted[i]) * (actual[i] - predicted[i]);
    }
    if (ss_tot <= 0.0) throw ValidationError("r2 undefined: actual values have zero variance");
    return 1.0 - ss_res / ss_tot;
}

ProtocolSplit split_protocols(std::span<const ExperimentRecord> records, ProtocolMode mode,
                              double pct, const std::string& holdout_kg, std::uint64_t seed) {
    ProtocolSplit split;
    auto shuffled_keys = [&](std::vector<std::uint64_t> keys, std::string_view label) {
        std::sort(keys.begin(), keys.end());
        keys.erase(std::unique(keys.begin(), keys.end()), keys.end());
        auto rng = RngStream::named(seed, label);
        for (std::size_t i = keys.size(); i > 1; --i) {
            std::swap(keys[i - 1], keys[rng.next_index(i)]);
        }
        return keys;
    };

    switch (mode) {
        case ProtocolMode::HoldoutPct: {
            if (pct <= 0.0 || pct >= 100.0) throw ValidationError("holdout pct must be in (0,100)");
            std::vector<std::uint64_t> keys;
            for (const auto& r : records) keys.push_back(r.combo_key());
            keys = shuffled_keys(std::move(keys), "protocol/holdout");
            const std::size_t n_test =
                static_cast<std::size_t>(pct / 100.0 * static_cast<double>(keys.size()));
            std::unordered_set<std::uint64_t> test_keys(keys.begin(),
                                                        keys.begin() + static_cast<long>(n_test));
            for (std::size_t i = 0; i < records.size(); ++i) {
                (test_keys.count(records[i].combo_key()) ? split.test_indices
                                                         : split.train_indices)
                    .push_back(i);
            }
            break;
        }
        case ProtocolMode::ZeroShot: {
            bool found = false;
            for (std::size_t i = 0; i < records.size(); ++i) {
                if (records[i].kg_name == holdout_kg) {
                    split.test_indices.push_back(i);
                    found = true;
                } else {
                    split.train_indices.push_back(i);
                }
            }
            if (!found) throw ValidationError("no records for holdout KG: " + holdout_kg);
            break;
        }
        case ProtocolMode::FewShot: {
            if (pct < 0.0 || pct >= 100.0) throw ValidationError("few-shot pct must be in [0,100)");
            std::vector<std::uint64_t> kg_keys;
            for (const auto& r : records) {
                if (r.kg_name == holdout_kg) kg_keys.push_back(r.combo_key());
            }
            if (kg_keys.empty()) throw ValidationError("no records for holdout KG: " + holdout_kg);
            kg_keys = shuffled_keys(std::move(kg_keys), "protocol/few-shot");
            const std::size_t n_move =
                static_cast<std::size_t>(pct / 100.0 * static_cast<double>(kg_keys.size()));
            std::unordered_set<std::uint64_t> move_keys(
                kg_keys.begin(), kg_keys.begin() + static_cast<long>(n_move));
            for (std::size_t i = 0; i < records.size(); ++i) {
                const bool is_holdout = records[i].kg_name == holdout_kg;
                if (!is_holdout || move_keys.count(records[i].combo_key())) {
                    split.train_indices.push_back(i);
                } else {
                    split.test_indices.push_back(i);
                }
            }
            break;
        }
    }
    return split;
}

} // namespace kglp
