#pragma once

#include <cstdint>
#include <span>
#include <utility>
#include <vector>

#include "kglp/errors.hpp"
#include "kglp/rng.hpp"

namespace kglp {

enum class Activation { None, Relu, Sigmoid };

struct LayerSpec {
    int in = 0;
    int out = 0;
    Activation act = Activation::None;
};

// Small fully-connected stack with analytic gradients. Parameters live in one
// flat vector (weights row-major out x in, then bias, per layer) so the
// optimizer and freeze masks can treat the whole net uniformly.
class DenseNet {
public:
    DenseNet() = default;
    DenseNet(std::vector<LayerSpec> spec, double dropout, RngStream& init_rng);

    [[nodiscard]] int input_dim() const { return spec_.empty() ? 0 : spec_.front().in; }
    [[nodiscard]] int output_dim() const { return spec_.empty() ? 0 : spec_.back().out; }
    [[nodiscard]] int num_layers() const { return static_cast<int>(spec_.size()); }
    [[nodiscard]] int num_params() const { return static_cast<int>(params_.size()); }
    [[nodiscard]] double dropout() const { return dropout_; }
    [[nodiscard]] const std::vector<LayerSpec>& spec() const { return spec_; }

    std::vector<double>& params() { return params_; }
    [[nodiscard]] const std::vector<double>& params() const { return params_; }

    // [begin, end) range of this layer's weights+bias in the flat vector
    [[nodiscard]] std::pair<int, int> layer_param_range(int layer) const;

    struct Cache {
        int n = 0;
        std::vector<double> input;                    // n x in
        std::vector<std::vector<double>> pre;         // per layer, n x out (pre-activation)
        std::vector<std::vector<double>> post;        // per layer, n x out (post-activation+dropout)
        std::vector<std::vector<double>> drop_scale;  // per gap, n x out (0 or 1/(1-p))
        bool training = false;
    };

    // Row-major batch forward: x is n rows of input_dim. Dropout is applied
    // between layers only when training is set (inverted scaling, so
    // inference needs no correction).
    std::vector<double> forward(std::span<const double> x, int n, bool training,
                                RngStream* dropout_rng, Cache* cache) const;

    // dy is n x output_dim. Adds parameter gradients into param_grads
    // (size num_params) and returns dx (n x input_dim).
    std::vector<double> backward(const Cache& cache, std::span<const double> dy,
                                 std::vector<double>& param_grads) const;

private:
    std::vector<LayerSpec> spec_;
    std::vector<double> params_;
    std::vector<int> offsets_; // per layer start into params_
    double dropout_ = 0.0;
};

// Adam with bias correction. Frozen entries (optional mask) are skipped
// entirely: no parameter update and no moment update.
class AdamState {
public:
    AdamState() = default;
    explicit AdamState(std::size_t n) : m_(n, 0.0), v_(n, 0.0) {}

    void step(std::span<double> params, std::span<const double> grads, double lr,
              const std::vector<std::uint8_t>* frozen = nullptr);

    [[nodiscard]] std::int64_t steps_taken() const { return t_; }

    static constexpr double kBeta1 = 0.9;
    static constexpr double kBeta2 = 0.999;
    static constexpr double kEpsilon = 1e-8;

private:
    std::vector<double> m_;
    std::vector<double> v_;
    std::int64_t t_ = 0;
};

} // namespace kglp
