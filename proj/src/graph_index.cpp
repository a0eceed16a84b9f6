#include "kglp/graph_index.hpp"

#include <algorithm>

namespace kglp {

namespace {

void sort_unique(std::vector<std::int32_t>& v) {
    std::sort(v.begin(), v.end());
    v.erase(std::unique(v.begin(), v.end()), v.end());
}

} // namespace

GraphIndex build_index(const KnowledgeGraph& kg) {
    GraphIndex idx;
    const auto n_ent = kg.entities.size();
    const auto n_pred = kg.predicates.size();
    idx.degree_.assign(n_ent, 0);
    idx.pred_freq_.assign(n_pred, 0);
    idx.neighbors_.assign(n_ent, {});
    idx.incident_preds_.assign(n_ent, {});
    idx.subj_candidates_.assign(n_pred, {});
    idx.obj_candidates_.assign(n_pred, {});
    idx.n_train_ = static_cast<std::int64_t>(kg.train.size());

    for (const auto& t : kg.train) {
        idx.degree_[t.subject] += 1;
        idx.degree_[t.object] += 1;
        idx.pred_freq_[t.predicate] += 1;
        idx.sp_[GraphIndex::pair_key(t.subject, t.predicate)] += 1;
        idx.op_[GraphIndex::pair_key(t.object, t.predicate)] += 1;
        idx.so_[GraphIndex::pair_key(t.subject, t.object)] += 1;

        idx.neighbors_[t.subject].push_back(t.object);
        idx.neighbors_[t.object].push_back(t.subject);
        idx.incident_preds_[t.subject].push_back(t.predicate);
        idx.incident_preds_[t.object].push_back(t.predicate);
        idx.subj_candidates_[t.predicate].push_back(t.subject);
        idx.obj_candidates_[t.predicate].push_back(t.object);
    }

    for (auto& v : idx.neighbors_) sort_unique(v);
    for (auto& v : idx.incident_preds_) sort_unique(v);
    for (auto& v : idx.subj_candidates_) sort_unique(v);
    for (auto& v : idx.obj_candidates_) sort_unique(v);

    idx.coarse_.assign(n_ent, {});
    for (std::int32_t e = 0; e < n_ent; ++e) {
        auto& st = idx.coarse_[e];
        const auto& nbrs = idx.neighbors_[e];
        if (!nbrs.empty()) {
            double mn = 1e300, mx = -1e300, sum = 0;
            for (auto n : nbrs) {
                double d = static_cast<double>(idx.degree_[n]);
                mn = std::min(mn, d);
                mx = std::max(mx, d);
                sum += d;
            }
            st.min_deg_nbr = mn;
            st.max_deg_nbr = mx;
            st.mean_deg_nbr = sum / static_cast<double>(nbrs.size());
            st.num_nbrs = static_cast<double>(nbrs.size());
        }
        const auto& preds = idx.incident_preds_[e];
        if (!preds.empty()) {
            double mn = 1e300, mx = -1e300, sum = 0;
            for (auto p : preds) {
                double f = static_cast<double>(idx.pred_freq_[p]);
                mn = std::min(mn, f);
                mx = std::max(mx, f);
                sum += f;
            }
            st.min_freq_rel = mn;
            st.max_freq_rel = mx;
            st.mean_freq_rel = sum / static_cast<double>(preds.size());
            st.num_rels = static_cast<double>(preds.size());
        }
    }
    return idx;
}

} // namespace kglp
