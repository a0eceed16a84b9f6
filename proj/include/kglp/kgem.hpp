#pragma once

#include <functional>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "kglp/dense_net.hpp"
#include "kglp/graph_index.hpp"
#include "kglp/sampler.hpp"

namespace kglp {

enum class ScoringKind { TransE, DistMult, ComplEx };
enum class LossKind { MRL, BCEL, CEL };

std::string to_string(ScoringKind k);
std::string to_string(LossKind k);
ScoringKind scoring_kind_from_string(const std::string& s);
LossKind loss_kind_from_string(const std::string& s);

struct KgemConfig {
    ScoringKind scoring = ScoringKind::DistMult;
    int dim = 50;
    LossKind loss = LossKind::BCEL;
    std::optional<double> margin;          // present iff loss == MRL
    SamplerKind sampler = SamplerKind::Basic;
    int npp = 5;
    double lr = 1e-2;
    double reg_coef = 0.0;                 // L3 regularizer weight
    int transe_norm = 2;                   // p-norm for TransE, 1 or 2
    int batch_size = 128;
    int epochs = 100;
    std::uint64_t seed = 0;

    void validate() const;
    [[nodiscard]] std::string describe() const;
};

// Embedding tables plus optimizer state. ComplEx rows store the real parts
// followed by the imaginary parts, so row_dim is 2*dim for it.
struct KgemModel {
    KgemConfig config;
    std::int32_t n_entities = 0;
    std::int32_t n_predicates = 0;
    int row_dim = 0;
    std::vector<double> entity_emb;    // n_entities x row_dim
    std::vector<double> pred_emb;      // n_predicates x row_dim

    [[nodiscard]] std::span<const double> entity_row(EntityId e) const {
        return {entity_emb.data() + static_cast<std::size_t>(e) * row_dim,
                static_cast<std::size_t>(row_dim)};
    }
    [[nodiscard]] std::span<const double> pred_row(PredicateId p) const {
        return {pred_emb.data() + static_cast<std::size_t>(p) * row_dim,
                static_cast<std::size_t>(row_dim)};
    }

    [[nodiscard]] double score(const Triple& t) const;
};

KgemModel init_kgem(const KgemConfig& config, std::int32_t n_entities, std::int32_t n_predicates);

// plain scoring functions on raw embedding vectors
double score_transe(std::span<const double> e_s, std::span<const double> e_p,
                    std::span<const double> e_o, int p_norm);
double score_distmult(std::span<const double> e_s, std::span<const double> e_p,
                      std::span<const double> e_o);
// re/im split rows: Re(<e_s, e_p, conj(e_o)>)
double score_complex(std::span<const double> e_s, std::span<const double> e_p,
                     std::span<const double> e_o);

// Adds coef * dScore/d(row) for each of the three embedding rows into the
// dense gradient tables.
void accumulate_score_grad(const KgemModel& model, const Triple& t, double coef,
                           std::span<double> entity_grad, std::span<double> pred_grad);

// loss primitives (values only; training uses the closed-form gradients below)
double loss_bcel(double score, double flag);
double loss_mrl(double score_pos, double score_neg, double margin);
double loss_cel(double score_pos, std::span<const double> scores_neg);

// L3 regularization penalty over the distinct embedding rows touched by a
// batch, weighted by reg_coef. Gradients are added to the tables.
double regularization_penalty(const KgemModel& model,
                              std::span<const EntityId> touched_entities,
                              std::span<const PredicateId> touched_predicates,
                              double reg_coef,
                              std::span<double> entity_grad, std::span<double> pred_grad);

struct KgemTrainResult {
    KgemModel model;
    std::vector<double> epoch_loss;
    std::size_t sampler_fallbacks = 0;
};

using EpochCallback = std::function<void(int epoch, double mean_loss, const KgemModel& model)>;

// Full training loop: shuffled batches, negative sampling, analytic
// gradients, dense Adam step per batch. Deterministic for a fixed seed.
KgemTrainResult train_kgem(const KnowledgeGraph& kg, const GraphIndex& index,
                           const KgemConfig& config, const EpochCallback& on_epoch = {});

// Computes the loss and its gradient for one batch of positives with fixed
// corruptions. Exposed for the finite-difference tests.
double kgem_batch_loss_and_grad(const KgemModel& model, std::span<const Triple> positives,
                                const std::vector<std::vector<Corruption>>& negatives,
                                double reg_coef, std::span<double> entity_grad,
                                std::span<double> pred_grad);

// scorer adapter for lp-eval
std::function<double(const Triple&)> kgem_scorer(const KgemModel& model);

// The full hyperparameter search grid: (3 margins x MRL + BCEL + CEL) x
// 3 samplers x 3 npp x 3 lr x 3 reg x 3 dims = 1215 combinations.
std::vector<KgemConfig> enumerate_grid();

// Restricted grids for desk-scale experiments; empty axes fall back to the
// full grid's values.
struct GridSpec {
    std::vector<ScoringKind> scorings{ScoringKind::DistMult};
    std::vector<LossKind> losses{LossKind::MRL, LossKind::BCEL, LossKind::CEL};
    std::vector<double> margins{0.5, 1.0, 2.0};
    std::vector<SamplerKind> samplers{SamplerKind::Basic, SamplerKind::Bernoulli,
                                      SamplerKind::PseudoTyped};
    std::vector<int> npps{5, 25, 125};
    std::vector<double> lrs{1e-2, 1e-4, 1e-6};
    std::vector<double> reg_coefs{1e-2, 1e-4, 1e-6};
    std::vector<int> dims{50, 100, 250};
    int epochs = 100;
    int batch_size = 128;

    [[nodiscard]] std::vector<KgemConfig> cartesian() const;
};

} // namespace kglp
