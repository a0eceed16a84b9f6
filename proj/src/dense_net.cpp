#include "kglp/dense_net.hpp"

#include <cmath>

namespace kglp {

namespace {

double activate(Activation a, double z) {
    switch (a) {
        case Activation::Relu: return z > 0.0 ? z : 0.0;
        case Activation::Sigmoid: return 1.0 / (1.0 + std::exp(-z));
        case Activation::None: return z;
    }
    return z;
}

double activate_grad(Activation a, double z, double y) {
    switch (a) {
        case Activation::Relu: return z > 0.0 ? 1.0 : 0.0;
        case Activation::Sigmoid: return y * (1.0 - y);
        case Activation::None: return 1.0;
    }
    return 1.0;
}

} // namespace

DenseNet::DenseNet(std::vector<LayerSpec> spec, double dropout, RngStream& init_rng)
    : spec_(std::move(spec)), dropout_(dropout) {
    if (spec_.empty()) throw ValidationError("dense net needs at least one layer");
    if (dropout_ < 0.0 || dropout_ >= 1.0) throw ValidationError("dropout must be in [0,1)");
    int total = 0;
    for (std::size_t l = 0; l < spec_.size(); ++l) {
        const auto& s = spec_[l];
        if (s.in <= 0 || s.out <= 0) throw ValidationError("layer dims must be positive");
        if (l > 0 && spec_[l - 1].out != s.in) throw ValidationError("layer shapes do not chain");
        offsets_.push_back(total);
        total += s.in * s.out + s.out;
    }
    params_.assign(total, 0.0);
    // fan-in uniform init for weights, zero bias
    for (std::size_t l = 0; l < spec_.size(); ++l) {
        const auto& s = spec_[l];
        double bound = 1.0 / std::sqrt(static_cast<double>(s.in));
        double* w = params_.data() + offsets_[l];
        for (int i = 0; i < s.in * s.out; ++i) w[i] = init_rng.next_uniform(-bound, bound);
    }
}

std::pair<int, int> DenseNet::layer_param_range(int layer) const {
    const auto& s = spec_.at(layer);
    int begin = offsets_.at(layer);
    return {begin, begin + s.in * s.out + s.out};
}

std::vector<double> DenseNet::forward(std::span<const double> x, int n, bool training,
                                      RngStream* dropout_rng, Cache* cache) const {
    if (static_cast<int>(x.size()) != n * input_dim()) {
        throw ValidationError("forward: input width does not match model input dim");
    }
    if (training && dropout_ > 0.0 && dropout_rng == nullptr) {
        throw ValidationError("forward: training with dropout requires an rng");
    }

    std::vector<double> cur(x.begin(), x.end());
    if (cache) {
        cache->n = n;
        cache->input = cur;
        cache->pre.assign(spec_.size(), {});
        cache->post.assign(spec_.size(), {});
        cache->drop_scale.assign(spec_.size(), {});
        cache->training = training;
    }

    for (std::size_t l = 0; l < spec_.size(); ++l) {
        const auto& s = spec_[l];
        const double* w = params_.data() + offsets_[l];
        const double* b = w + s.in * s.out;

        std::vector<double> pre(static_cast<std::size_t>(n) * s.out);
        for (int r = 0; r < n; ++r) {
            const double* xi = cur.data() + static_cast<std::size_t>(r) * s.in;
            double* zi = pre.data() + static_cast<std::size_t>(r) * s.out;
            for (int j = 0; j < s.out; ++j) {
                const double* wj = w + static_cast<std::size_t>(j) * s.in;
                double acc = b[j];
                for (int k = 0; k < s.in; ++k) acc += wj[k] * xi[k];
                zi[j] = acc;
            }
        }

        std::vector<double> post(pre.size());
        for (std::size_t i = 0; i < pre.size(); ++i) post[i] = activate(s.act, pre[i]);

        const bool gap_dropout = training && dropout_ > 0.0 && l + 1 < spec_.size();
        std::vector<double> scales;
        if (gap_dropout) {
            scales.resize(post.size());
            const double keep = 1.0 - dropout_;
            for (std::size_t i = 0; i < post.size(); ++i) {
                scales[i] = dropout_rng->next_bernoulli(dropout_) ? 0.0 : 1.0 / keep;
                post[i] *= scales[i];
            }
        }

        if (cache) {
            cache->pre[l] = pre;
            cache->post[l] = post;
            if (gap_dropout) cache->drop_scale[l] = std::move(scales);
        }
        cur = std::move(post);
    }
    return cur;
}

std::vector<double> DenseNet::backward(const Cache& cache, std::span<const double> dy,
                                       std::vector<double>& param_grads) const {
    const int n = cache.n;
    if (static_cast<int>(dy.size()) != n * output_dim()) {
        throw ValidationError("backward: dy width does not match model output dim");
    }
    if (param_grads.size() != params_.size()) param_grads.assign(params_.size(), 0.0);

    std::vector<double> grad(dy.begin(), dy.end());
    for (int l = num_layers() - 1; l >= 0; --l) {
        const auto& s = spec_[l];
        const double* w = params_.data() + offsets_[l];
        double* gw = param_grads.data() + offsets_[l];
        double* gb = gw + s.in * s.out;
        const auto& pre = cache.pre[l];
        const auto& post = cache.post[l];
        const auto& scales = cache.drop_scale[l];
        const std::vector<double>& layer_in =
            (l == 0) ? cache.input : cache.post[static_cast<std::size_t>(l) - 1];

        std::vector<double> dx(static_cast<std::size_t>(n) * s.in, 0.0);
        for (int r = 0; r < n; ++r) {
            const std::size_t zoff = static_cast<std::size_t>(r) * s.out;
            const double* xi = layer_in.data() + static_cast<std::size_t>(r) * s.in;
            double* dxi = dx.data() + static_cast<std::size_t>(r) * s.in;
            for (int j = 0; j < s.out; ++j) {
                double g = grad[zoff + j];
                if (!scales.empty()) g *= scales[zoff + j];
                // undo dropout scaling on the cached post value to recover the
                // raw activation for the sigmoid derivative
                double y = post[zoff + j];
                if (!scales.empty()) y = (scales[zoff + j] == 0.0) ? 0.0 : y / scales[zoff + j];
                double dz = g * activate_grad(s.act, pre[zoff + j], y);
                if (dz == 0.0) continue;
                gb[j] += dz;
                double* gwj = gw + static_cast<std::size_t>(j) * s.in;
                const double* wj = w + static_cast<std::size_t>(j) * s.in;
                for (int k = 0; k < s.in; ++k) {
                    gwj[k] += dz * xi[k];
                    dxi[k] += dz * wj[k];
                }
            }
        }
        grad = std::move(dx);
    }
    return grad;
}

void AdamState::step(std::span<double> params, std::span<const double> grads, double lr,
                     const std::vector<std::uint8_t>* frozen) {
    if (params.size() != m_.size() || grads.size() != m_.size()) {
        throw ValidationError("adam: parameter/gradient size mismatch");
    }
    ++t_;
    const double bc1 = 1.0 - std::pow(kBeta1, static_cast<double>(t_));
    const double bc2 = 1.0 - std::pow(kBeta2, static_cast<double>(t_));
    for (std::size_t i = 0; i < m_.size(); ++i) {
        if (frozen && (*frozen)[i]) continue;
        const double g = grads[i];
        m_[i] = kBeta1 * m_[i] + (1.0 - kBeta1) * g;
        v_[i] = kBeta2 * v_[i] + (1.0 - kBeta2) * g * g;
        const double mhat = m_[i] / bc1;
        const double vhat = v_[i] / bc2;
        params[i] -= lr * mhat / (std::sqrt(vhat) + kEpsilon);
    }
}

} // namespace kglp
