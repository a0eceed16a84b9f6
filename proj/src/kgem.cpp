#include "kglp/kgem.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <sstream>

namespace kglp {

std::string to_string(ScoringKind k) {
    switch (k) {
        case ScoringKind::TransE: return "TransE";
        case ScoringKind::DistMult: return "DistMult";
        case ScoringKind::ComplEx: return "ComplEx";
    }
    return "?";
}

std::string to_string(LossKind k) {
    switch (k) {
        case LossKind::MRL: return "MRL";
        case LossKind::BCEL: return "BCEL";
        case LossKind::CEL: return "CEL";
    }
    return "?";
}

ScoringKind scoring_kind_from_string(const std::string& s) {
    if (s == "TransE" || s == "transe") return ScoringKind::TransE;
    if (s == "DistMult" || s == "distmult") return ScoringKind::DistMult;
    if (s == "ComplEx" || s == "complex") return ScoringKind::ComplEx;
    throw ValidationError("unknown scoring function: " + s);
}

LossKind loss_kind_from_string(const std::string& s) {
    if (s == "MRL" || s == "mrl") return LossKind::MRL;
    if (s == "BCEL" || s == "bcel" || s == "BCE") return LossKind::BCEL;
    if (s == "CEL" || s == "cel" || s == "CE") return LossKind::CEL;
    throw ValidationError("unknown loss function: " + s);
}

void KgemConfig::validate() const {
    if (dim < 1) throw ValidationError("embedding dim must be >= 1");
    if (loss == LossKind::MRL) {
        if (!margin.has_value()) throw ValidationError("MRL requires a margin");
        if (*margin < 0.0) throw ValidationError("margin must be >= 0");
    } else if (margin.has_value()) {
        throw ValidationError("margin is only valid with MRL");
    }
    if (npp < 1) throw ValidationError("negatives per positive must be >= 1");
    if (!(lr > 0.0)) throw ValidationError("learning rate must be > 0");
    if (reg_coef < 0.0) throw ValidationError("regularizer coefficient must be >= 0");
    if (transe_norm != 1 && transe_norm != 2) throw ValidationError("TransE norm must be 1 or 2");
    if (batch_size < 1) throw ValidationError("batch size must be >= 1");
    if (epochs < 1) throw ValidationError("epochs must be >= 1");
}

std::string KgemConfig::describe() const {
    std::ostringstream os;
    os << to_string(scoring) << " d=" << dim << " loss=" << to_string(loss);
    if (margin) os << " margin=" << *margin;
    os << " sampler=" << to_string(sampler) << " npp=" << npp << " lr=" << lr
       << " reg=" << reg_coef << " batch=" << batch_size << " epochs=" << epochs;
    return os.str();
}

double score_transe(std::span<const double> e_s, std::span<const double> e_p,
                    std::span<const double> e_o, int p_norm) {
    double acc = 0.0;
    if (p_norm == 1) {
        for (std::size_t i = 0; i < e_s.size(); ++i) {
            acc += std::abs(e_s[i] + e_p[i] - e_o[i]);
        }
        return -acc;
    }
    for (std::size_t i = 0; i < e_s.size(); ++i) {
        double d = e_s[i] + e_p[i] - e_o[i];
        acc += d * d;
    }
    return -std::sqrt(acc);
}

double score_distmult(std::span<const double> e_s, std::span<const double> e_p,
                      std::span<const double> e_o) {
    double acc = 0.0;
    for (std::size_t i = 0; i < e_s.size(); ++i) acc += e_s[i] * e_p[i] * e_o[i];
    return acc;
}

double score_complex(std::span<const double> e_s, std::span<const double> e_p,
                     std::span<const double> e_o) {
    const std::size_t d = e_s.size() / 2;
    const double* sr = e_s.data();
    const double* si = sr + d;
    const double* pr = e_p.data();
    const double* pi = pr + d;
    const double* or_ = e_o.data();
    const double* oi = or_ + d;
    double acc = 0.0;
    for (std::size_t i = 0; i < d; ++i) {
        acc += sr[i] * pr[i] * or_[i] + si[i] * pr[i] * oi[i] + sr[i] * pi[i] * oi[i] -
               si[i] * pi[i] * or_[i];
    }
    return acc;
}

double KgemModel::score(const Triple& t) const {
    auto es = entity_row(t.subject);
    auto ep = pred_row(t.predicate);
    auto eo = entity_row(t.object);
    switch (config.scoring) {
        case ScoringKind::TransE: return score_transe(es, ep, eo, config.transe_norm);
        case ScoringKind::DistMult: return score_distmult(es, ep, eo);
        case ScoringKind::ComplEx: return score_complex(es, ep, eo);
    }
    return 0.0;
}

KgemModel init_kgem(const KgemConfig& config, std::int32_t n_entities, std::int32_t n_predicates) {
    config.validate();
    if (n_entities < 1 || n_predicates < 1) throw ValidationError("empty vocabulary");
    KgemModel m;
    m.config = config;
    m.n_entities = n_entities;
    m.n_predicates = n_predicates;
    m.row_dim = (config.scoring == ScoringKind::ComplEx) ? 2 * config.dim : config.dim;
    m.entity_emb.resize(static_cast<std::size_t>(n_entities) * m.row_dim);
    m.pred_emb.resize(static_cast<std::size_t>(n_predicates) * m.row_dim);

    auto rng = RngStream::named(config.seed, "kgem/init");
    const double bound = 0.5 / std::sqrt(static_cast<double>(config.dim));
    for (auto& x : m.entity_emb) x = rng.next_uniform(-bound, bound);
    for (auto& x : m.pred_emb) x = rng.next_uniform(-bound, bound);
    return m;
}

void accumulate_score_grad(const KgemModel& model, const Triple& t, double coef,
                           std::span<double> entity_grad, std::span<double> pred_grad) {
    const int rd = model.row_dim;
    auto es = model.entity_row(t.subject);
    auto ep = model.pred_row(t.predicate);
    auto eo = model.entity_row(t.object);
    double* gs = entity_grad.data() + static_cast<std::size_t>(t.subject) * rd;
    double* gp = pred_grad.data() + static_cast<std::size_t>(t.predicate) * rd;
    double* go = entity_grad.data() + static_cast<std::size_t>(t.object) * rd;

    switch (model.config.scoring) {
        case ScoringKind::TransE: {
            if (model.config.transe_norm == 1) {
                for (int i = 0; i < rd; ++i) {
                    double d = es[i] + ep[i] - eo[i];
                    double g = (d > 0.0) ? -coef : (d < 0.0 ? coef : 0.0);
                    gs[i] += g;
                    gp[i] += g;
                    go[i] -= g;
                }
            } else {
                double norm = 0.0;
                for (int i = 0; i < rd; ++i) {
                    double d = es[i] + ep[i] - eo[i];
                    norm += d * d;
                }
                norm = std::sqrt(norm);
                if (norm <= 0.0) return;
                for (int i = 0; i < rd; ++i) {
                    double d = es[i] + ep[i] - eo[i];
                    double g = -coef * d / norm;
                    gs[i] += g;
                    gp[i] += g;
                    go[i] -= g;
                }
            }
            return;
        }
        case ScoringKind::DistMult: {
            for (int i = 0; i < rd; ++i) {
                gs[i] += coef * ep[i] * eo[i];
                gp[i] += coef * es[i] * eo[i];
                go[i] += coef * es[i] * ep[i];
            }
            return;
        }
        case ScoringKind::ComplEx: {
            const int d = rd / 2;
            const double* sr = es.data();
            const double* si = sr + d;
            const double* pr = ep.data();
            const double* pi = pr + d;
            const double* onr = eo.data();
            const double* oni = onr + d;
            for (int i = 0; i < d; ++i) {
                gs[i] += coef * (pr[i] * onr[i] + pi[i] * oni[i]);
                gs[i + d] += coef * (pr[i] * oni[i] - pi[i] * onr[i]);
                gp[i] += coef * (sr[i] * onr[i] + si[i] * oni[i]);
                gp[i + d] += coef * (sr[i] * oni[i] - si[i] * onr[i]);
                go[i] += coef * (sr[i] * pr[i] - si[i] * pi[i]);
                go[i + d] += coef * (si[i] * pr[i] + sr[i] * pi[i]);
            }
            return;
        }
    }
}

namespace {

double softplus(double x) {
    // log(1 + e^x) without overflow
    return x > 0.0 ? x + std::log1p(std::exp(-x)) : std::log1p(std::exp(x));
}

double sigmoid(double x) { return 1.0 / (1.0 + std::exp(-x)); }

} // namespace

double loss_bcel(double score, double flag) {
    // -(flag*log(sigma(s)) + (1-flag)*log(1-sigma(s))), stable logits form
    return flag > 0.5 ? softplus(-score) : softplus(score);
}

double loss_mrl(double score_pos, double score_neg, double margin) {
    return std::max(0.0, margin + score_neg - score_pos);
}

double loss_cel(double score_pos, std::span<const double> scores_neg) {
    double mx = score_pos;
    for (double s : scores_neg) mx = std::max(mx, s);
    double denom = std::exp(score_pos - mx);
    for (double s : scores_neg) denom += std::exp(s - mx);
    return -(score_pos - mx - std::log(denom));
}

double regularization_penalty(const KgemModel& model,
                              std::span<const EntityId> touched_entities,
                              std::span<const PredicateId> touched_predicates,
                              double reg_coef,
                              std::span<double> entity_grad, std::span<double> pred_grad) {
    if (reg_coef == 0.0) return 0.0;
    const int rd = model.row_dim;
    double penalty = 0.0;
    auto add_row = [&](std::span<const double> row, double* grad) {
        for (int i = 0; i < rd; ++i) {
            double a = std::abs(row[i]);
            penalty += a * a * a;
            grad[i] += reg_coef * 3.0 * row[i] * a;
        }
    };
    for (EntityId e : touched_entities) {
        add_row(model.entity_row(e), entity_grad.data() + static_cast<std::size_t>(e) * rd);
    }
    for (PredicateId p : touched_predicates) {
        add_row(model.pred_row(p), pred_grad.data() + static_cast<std::size_t>(p) * rd);
    }
    return reg_coef * penalty;
}

double kgem_batch_loss_and_grad(const KgemModel& model, std::span<const Triple> positives,
                                const std::vector<std::vector<Corruption>>& negatives,
                                double reg_coef, std::span<double> entity_grad,
                                std::span<double> pred_grad) {
    const std::size_t b = positives.size();
    if (negatives.size() != b) throw ValidationError("negatives do not match positives");

    std::vector<double> pos_scores(b);
    std::vector<std::vector<double>> neg_scores(b);
    std::vector<std::vector<Triple>> neg_triples(b);
    for (std::size_t i = 0; i < b; ++i) {
        pos_scores[i] = model.score(positives[i]);
        neg_triples[i].reserve(negatives[i].size());
        neg_scores[i].reserve(negatives[i].size());
        for (const auto& c : negatives[i]) {
            Triple nt = apply_corruption(positives[i], c);
            neg_triples[i].push_back(nt);
            neg_scores[i].push_back(model.score(nt));
        }
    }

    double loss = 0.0;
    const LossKind kind = model.config.loss;
    switch (kind) {
        case LossKind::BCEL: {
            std::size_t n_points = 0;
            for (std::size_t i = 0; i < b; ++i) n_points += 1 + neg_scores[i].size();
            const double inv = 1.0 / static_cast<double>(n_points);
            for (std::size_t i = 0; i < b; ++i) {
                loss += loss_bcel(pos_scores[i], 1.0) * inv;
                accumulate_score_grad(model, positives[i], (sigmoid(pos_scores[i]) - 1.0) * inv,
                                      entity_grad, pred_grad);
                for (std::size_t k = 0; k < neg_scores[i].size(); ++k) {
                    loss += loss_bcel(neg_scores[i][k], 0.0) * inv;
                    accumulate_score_grad(model, neg_triples[i][k], sigmoid(neg_scores[i][k]) * inv,
                                          entity_grad, pred_grad);
                }
            }
            break;
        }
        case LossKind::MRL: {
            const double margin = model.config.margin.value_or(0.0);
            std::size_t n_pairs = 0;
            for (std::size_t i = 0; i < b; ++i) n_pairs += neg_scores[i].size();
            const double inv = 1.0 / static_cast<double>(n_pairs);
            for (std::size_t i = 0; i < b; ++i) {
                double pos_coef = 0.0;
                for (std::size_t k = 0; k < neg_scores[i].size(); ++k) {
                    double v = margin + neg_scores[i][k] - pos_scores[i];
                    if (v > 0.0) {
                        loss += v * inv;
                        pos_coef -= inv;
                        accumulate_score_grad(model, neg_triples[i][k], inv, entity_grad,
                                              pred_grad);
                    }
                }
                if (pos_coef != 0.0) {
                    accumulate_score_grad(model, positives[i], pos_coef, entity_grad, pred_grad);
                }
            }
            break;
        }
        case LossKind::CEL: {
            const double inv = 1.0 / static_cast<double>(b);
            for (std::size_t i = 0; i < b; ++i) {
                loss += loss_cel(pos_scores[i], neg_scores[i]) * inv;
                double mx = pos_scores[i];
                for (double s : neg_scores[i]) mx = std::max(mx, s);
                double denom = std::exp(pos_scores[i] - mx);
                for (double s : neg_scores[i]) denom += std::exp(s - mx);
                double p0 = std::exp(pos_scores[i] - mx) / denom;
                accumulate_score_grad(model, positives[i], (p0 - 1.0) * inv, entity_grad,
                                      pred_grad);
                for (std::size_t k = 0; k < neg_scores[i].size(); ++k) {
                    double pk = std::exp(neg_scores[i][k] - mx) / denom;
                    accumulate_score_grad(model, neg_triples[i][k], pk * inv, entity_grad,
                                          pred_grad);
                }
            }
            break;
        }
    }

    if (reg_coef > 0.0) {
        std::vector<EntityId> ents;
        std::vector<PredicateId> preds;
        for (std::size_t i = 0; i < b; ++i) {
            ents.push_back(positives[i].subject);
            ents.push_back(positives[i].object);
            preds.push_back(positives[i].predicate);
            for (const auto& nt : neg_triples[i]) {
                ents.push_back(nt.subject);
                ents.push_back(nt.object);
            }
        }
        std::sort(ents.begin(), ents.end());
        ents.erase(std::unique(ents.begin(), ents.end()), ents.end());
        std::sort(preds.begin(), preds.end());
        preds.erase(std::unique(preds.begin(), preds.end()), preds.end());
        loss += regularization_penalty(model, ents, preds, reg_coef, entity_grad, pred_grad);
    }
    return loss;
}

KgemTrainResult train_kgem(const KnowledgeGraph& kg, const GraphIndex& index,
                           const KgemConfig& config, const EpochCallback& on_epoch) {
    config.validate();
    if (kg.train.empty()) throw ValidationError("cannot train on an empty train split");

    KgemTrainResult result;
    result.model = init_kgem(config, kg.entities.size(), kg.predicates.size());
    KgemModel& model = result.model;

    NegativeSampler sampler(index, config.sampler);
    auto shuffle_rng = RngStream::named(config.seed, "kgem/shuffle");
    auto neg_rng = RngStream::named(config.seed, "kgem/negatives");

    AdamState ent_adam(model.entity_emb.size());
    AdamState pred_adam(model.pred_emb.size());
    std::vector<double> ent_grad(model.entity_emb.size());
    std::vector<double> pred_grad(model.pred_emb.size());

    std::vector<std::size_t> order(kg.train.size());
    std::iota(order.begin(), order.end(), 0);

    std::vector<Triple> batch;
    for (int epoch = 0; epoch < config.epochs; ++epoch) {
        // Fisher-Yates with our deterministic stream
        for (std::size_t i = order.size(); i > 1; --i) {
            std::swap(order[i - 1], order[shuffle_rng.next_index(i)]);
        }

        double epoch_loss = 0.0;
        std::size_t n_batches = 0;
        for (std::size_t start = 0; start < order.size(); start += config.batch_size) {
            const std::size_t end = std::min(order.size(), start + config.batch_size);
            batch.clear();
            for (std::size_t i = start; i < end; ++i) batch.push_back(kg.train[order[i]]);

            NegativeBatch negs = sampler.sample(batch, config.npp, neg_rng);
            result.sampler_fallbacks += negs.basic_fallbacks;

            std::fill(ent_grad.begin(), ent_grad.end(), 0.0);
            std::fill(pred_grad.begin(), pred_grad.end(), 0.0);
            double loss = kgem_batch_loss_and_grad(model, batch, negs.negatives, config.reg_coef,
                                                   ent_grad, pred_grad);
            if (!std::isfinite(loss)) {
                std::ostringstream msg;
                msg << "non-finite loss (" << loss << ") at epoch " << epoch << ", batch "
                    << n_batches << " [" << config.describe() << "]";
                throw RuntimeFault(msg.str());
            }
            ent_adam.step(model.entity_emb, ent_grad, config.lr);
            pred_adam.step(model.pred_emb, pred_grad, config.lr);
            epoch_loss += loss;
            ++n_batches;
        }
        epoch_loss /= static_cast<double>(n_batches);
        result.epoch_loss.push_back(epoch_loss);
        if (on_epoch) on_epoch(epoch, epoch_loss, model);
    }
    return result;
}

std::function<double(const Triple&)> kgem_scorer(const KgemModel& model) {
    return [&model](const Triple& t) { return model.score(t); };
}

std::vector<KgemConfig> GridSpec::cartesian() const {
    if (scorings.empty() || losses.empty() || samplers.empty() || npps.empty() || lrs.empty() ||
        reg_coefs.empty() || dims.empty()) {
        throw ValidationError("grid spec has an empty hyperparameter axis");
    }
    std::vector<KgemConfig> out;
    struct LossVariant {
        LossKind loss;
        std::optional<double> margin;
    };
    std::vector<LossVariant> loss_variants;
    for (LossKind l : losses) {
        if (l == LossKind::MRL) {
            for (double m : margins) loss_variants.push_back({l, m});
        } else {
            loss_variants.push_back({l, std::nullopt});
        }
    }
    for (ScoringKind sc : scorings) {
        for (const auto& lv : loss_variants) {
            for (SamplerKind sam : samplers) {
                for (int npp : npps) {
                    for (double lr : lrs) {
                        for (double r : reg_coefs) {
                            for (int d : dims) {
                                KgemConfig c;
                                c.scoring = sc;
                                c.loss = lv.loss;
                                c.margin = lv.margin;
                                c.sampler = sam;
                                c.npp = npp;
                                c.lr = lr;
                                c.reg_coef = r;
                                c.dim = d;
                                c.epochs = epochs;
                                c.batch_size = batch_size;
                                c.validate();
                                out.push_back(c);
                            }
                        }
                    }
                }
            }
        }
    }
    return out;
}

std::vector<KgemConfig> enumerate_grid() {
    GridSpec spec;
    spec.scorings = {ScoringKind::DistMult};
    return spec.cartesian();
}

} // namespace kglp
