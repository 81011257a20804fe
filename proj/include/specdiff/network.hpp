// network.hpp: bidirectional LSTM encoder, additive attention and a dense
// head, with hand-written backpropagation through time.
//
// All weights live in one flat parameter vector; Network only describes the
// layout and evaluates it, so optimisers, checkpoints and gradient checks
// work on plain spans.
#pragma once

#include <Eigen/Core>

#include <cstdint>
#include <random>
#include <span>
#include <string>
#include <vector>

namespace specdiff::forecast {

struct Hyperparams {
    int hidden_size = 16;      // units per direction
    int sequence_length = 16;  // input window L
    int num_layers = 1;
    double dropout = 0.0;      // between stacked layers and on the context vector
    double learning_rate = 1e-3;

    void validate() const;
    bool operator==(const Hyperparams&) const = default;
};

struct TensorSpec {
    std::string name;
    Eigen::Index rows = 0;
    Eigen::Index cols = 0;
    std::size_t offset = 0;

    std::size_t size() const { return static_cast<std::size_t>(rows * cols); }
};

// Intermediate values of one forward pass, kept for backward().
struct ForwardCache {
    struct Direction {
        Eigen::MatrixXd gates;  // 4h × T, activated [i; f; g; o]
        Eigen::MatrixXd cell;   // h × T
        Eigen::MatrixXd hidden; // h × T
    };
    struct Layer {
        Eigen::MatrixXd input;   // in × T
        Direction fwd;
        Direction bwd;
        Eigen::MatrixXd output;  // 2h × T after dropout
        Eigen::MatrixXd mask;    // 2h × T (empty when no dropout)
    };
    std::vector<Layer> layers;
    Eigen::VectorXd query;        // 2h
    Eigen::MatrixXd score_hidden; // a × T, tanh(W_k H + W_q q + b)
    Eigen::VectorXd alpha;        // T
    Eigen::VectorXd context;      // 2h after dropout
    Eigen::VectorXd context_mask; // 2h (empty when no dropout)
    double output = 0.0;
};

class Network {
public:
    explicit Network(const Hyperparams& hp);

    const Hyperparams& hyperparams() const noexcept { return hp_; }
    std::size_t parameter_count() const noexcept { return count_; }
    const std::vector<TensorSpec>& tensors() const noexcept { return tensors_; }
    const TensorSpec& tensor(const std::string& name) const;

    // Uniform in ±1/√fan_in; forget-gate biases start at 1.
    std::vector<double> initialize(std::uint64_t seed) const;

    // Prediction for a normalised window of length 2..L. With a non-null
    // rng, dropout masks are drawn (training mode); inference is
    // deterministic.
    double forward(std::span<const double> theta, std::span<const double> window, ForwardCache& cache,
                   std::mt19937_64* dropout_rng = nullptr) const;

    // Accumulates ∂(d_output · output)/∂θ into grad.
    void backward(std::span<const double> theta, const ForwardCache& cache, double d_output,
                  std::span<double> grad) const;

private:
    void add(const std::string& name, Eigen::Index rows, Eigen::Index cols);

    Hyperparams hp_;
    std::vector<TensorSpec> tensors_;
    std::size_t count_ = 0;
};

}  // namespace specdiff::forecast
