#include "specdiff/network.hpp"

#include "specdiff/error.hpp"

#include <algorithm>
#include <cmath>

namespace specdiff::forecast {

void Hyperparams::validate() const {
    require(hidden_size >= 1, ErrorCode::InvalidArgument, "hidden_size must be >= 1");
    require(sequence_length >= 2, ErrorCode::InvalidArgument, "sequence_length must be >= 2");
    require(num_layers >= 1, ErrorCode::InvalidArgument, "num_layers must be >= 1");
    require(dropout >= 0.0 && dropout < 1.0, ErrorCode::InvalidArgument, "dropout must be in [0, 1)");
    require(std::isfinite(learning_rate) && learning_rate > 0.0, ErrorCode::InvalidArgument,
            "learning_rate must be > 0");
}

namespace {

using Map = Eigen::Map<Eigen::MatrixXd>;
using CMap = Eigen::Map<const Eigen::MatrixXd>;
using VMap = Eigen::Map<Eigen::VectorXd>;
using CVMap = Eigen::Map<const Eigen::VectorXd>;

std::string dir_name(int layer, bool forward) {
    return "l" + std::to_string(layer) + (forward ? ".fwd" : ".bwd");
}

double sigmoid(double x) { return 1.0 / (1.0 + std::exp(-x)); }

}  // namespace

Network::Network(const Hyperparams& hp) : hp_(hp) {
    hp_.validate();
    const Eigen::Index h = hp.hidden_size;
    for (int l = 0; l < hp.num_layers; ++l) {
        const Eigen::Index in = l == 0 ? 1 : 2 * h;
        for (bool fwd : {true, false}) {
            const auto base = dir_name(l, fwd);
            add(base + ".W", 4 * h, in);
            add(base + ".U", 4 * h, h);
            add(base + ".b", 4 * h, 1);
        }
    }
    add("att.Wk", h, 2 * h);
    add("att.Wq", h, 2 * h);
    add("att.b", h, 1);
    add("att.v", h, 1);
    add("head.w", 2 * h, 1);
    add("head.b", 1, 1);
}

void Network::add(const std::string& name, Eigen::Index rows, Eigen::Index cols) {
    tensors_.push_back({name, rows, cols, count_});
    count_ += static_cast<std::size_t>(rows * cols);
}

const TensorSpec& Network::tensor(const std::string& name) const {
    for (const auto& t : tensors_) {
        if (t.name == name) return t;
    }
    fail(ErrorCode::InvalidArgument, "no tensor named " + name);
}

std::vector<double> Network::initialize(std::uint64_t seed) const {
    std::mt19937_64 rng(seed);
    std::vector<double> theta(count_, 0.0);
    const int h = hp_.hidden_size;
    for (const auto& t : tensors_) {
        double fan_in = 2.0 * h;  // attention and head read the 2h-wide encoder state
        if (t.name.ends_with(".W")) fan_in = static_cast<double>(t.cols);
        if (t.name.ends_with(".U") || (t.name.starts_with("l") && t.name.ends_with(".b")) || t.name == "att.v") {
            fan_in = static_cast<double>(h);
        }
        const double bound = 1.0 / std::sqrt(fan_in);
        std::uniform_real_distribution<double> dist(-bound, bound);
        for (std::size_t i = 0; i < t.size(); ++i) theta[t.offset + i] = dist(rng);
        if (t.name.starts_with("l") && t.name.ends_with(".b")) {
            for (int k = 0; k < h; ++k) theta[t.offset + static_cast<std::size_t>(h + k)] = 1.0;
        }
    }
    return theta;
}

double Network::forward(std::span<const double> theta, std::span<const double> window, ForwardCache& cache,
                        std::mt19937_64* dropout_rng) const {
    require(theta.size() == count_, ErrorCode::LengthMismatch, "parameter vector has the wrong size");
    const auto T = static_cast<Eigen::Index>(window.size());
    require(T >= 2 && T <= hp_.sequence_length, ErrorCode::InvalidArgument,
            "window length must be in [2, sequence_length]");
    for (double v : window) require(std::isfinite(v), ErrorCode::NonFinite, "non-finite model input");

    const Eigen::Index h = hp_.hidden_size;
    const bool drop = dropout_rng != nullptr && hp_.dropout > 0.0;
    std::bernoulli_distribution keep(1.0 - hp_.dropout);
    const double keep_scale = 1.0 / (1.0 - hp_.dropout);
    auto p = [&](const std::string& name) {
        const auto& t = tensor(name);
        return CMap(theta.data() + t.offset, t.rows, t.cols);
    };

    cache.layers.resize(static_cast<std::size_t>(hp_.num_layers));
    Eigen::MatrixXd input(1, T);
    for (Eigen::Index t = 0; t < T; ++t) input(0, t) = window[static_cast<std::size_t>(t)];

    for (int l = 0; l < hp_.num_layers; ++l) {
        auto& layer = cache.layers[static_cast<std::size_t>(l)];
        layer.input = input;
        for (bool fwd : {true, false}) {
            const auto base = dir_name(l, fwd);
            const auto W = p(base + ".W");
            const auto U = p(base + ".U");
            const auto b = p(base + ".b");
            auto& d = fwd ? layer.fwd : layer.bwd;
            d.gates.resize(4 * h, T);
            d.cell.resize(h, T);
            d.hidden.resize(h, T);
            // Pre-activations from the input for all steps at once.
            const Eigen::MatrixXd zin = (W * layer.input).colwise() + b.col(0);
            Eigen::VectorXd hprev = Eigen::VectorXd::Zero(h);
            Eigen::VectorXd cprev = Eigen::VectorXd::Zero(h);
            for (Eigen::Index s = 0; s < T; ++s) {
                const Eigen::Index t = fwd ? s : T - 1 - s;
                Eigen::VectorXd z = zin.col(t) + U * hprev;
                for (Eigen::Index k = 0; k < h; ++k) {
                    z[k] = sigmoid(z[k]);
                    z[h + k] = sigmoid(z[h + k]);
                    z[2 * h + k] = std::tanh(z[2 * h + k]);
                    z[3 * h + k] = sigmoid(z[3 * h + k]);
                }
                const Eigen::VectorXd c = z.segment(h, h).cwiseProduct(cprev) +
                                          z.segment(0, h).cwiseProduct(z.segment(2 * h, h));
                const Eigen::VectorXd hh = z.segment(3 * h, h).cwiseProduct(c.array().tanh().matrix());
                d.gates.col(t) = z;
                d.cell.col(t) = c;
                d.hidden.col(t) = hh;
                hprev = hh;
                cprev = c;
            }
        }
        layer.output.resize(2 * h, T);
        layer.output.topRows(h) = layer.fwd.hidden;
        layer.output.bottomRows(h) = layer.bwd.hidden;
        layer.mask.resize(0, 0);
        if (drop && l + 1 < hp_.num_layers) {
            layer.mask.resize(2 * h, T);
            for (Eigen::Index i = 0; i < layer.mask.size(); ++i) layer.mask(i) = keep(*dropout_rng) ? keep_scale : 0.0;
            layer.output = layer.output.cwiseProduct(layer.mask);
        }
        input = layer.output;
    }

    const auto& top = cache.layers.back();
    cache.query.resize(2 * h);
    cache.query.head(h) = top.fwd.hidden.col(T - 1);
    cache.query.tail(h) = top.bwd.hidden.col(0);

    const auto Wk = p("att.Wk");
    const auto Wq = p("att.Wq");
    const auto ab = p("att.b");
    const auto v = p("att.v");
    const Eigen::VectorXd qproj = Wq * cache.query + ab.col(0);
    cache.score_hidden = ((Wk * top.output).colwise() + qproj).array().tanh().matrix();
    Eigen::VectorXd scores = cache.score_hidden.transpose() * v.col(0);
    const double smax = scores.maxCoeff();
    cache.alpha = (scores.array() - smax).exp().matrix();
    cache.alpha /= cache.alpha.sum();

    cache.context = top.output * cache.alpha;
    cache.context_mask.resize(0);
    if (drop) {
        cache.context_mask.resize(2 * h);
        for (Eigen::Index i = 0; i < 2 * h; ++i) cache.context_mask[i] = keep(*dropout_rng) ? keep_scale : 0.0;
        cache.context = cache.context.cwiseProduct(cache.context_mask);
    }
    cache.output = p("head.w").col(0).dot(cache.context) + p("head.b")(0, 0);
    return cache.output;
}

void Network::backward(std::span<const double> theta, const ForwardCache& cache, double d_output,
                       std::span<double> grad) const {
    require(grad.size() == count_ && theta.size() == count_, ErrorCode::LengthMismatch,
            "gradient vector has the wrong size");
    const Eigen::Index h = hp_.hidden_size;
    const Eigen::Index T = cache.alpha.size();
    auto p = [&](const std::string& name) {
        const auto& t = tensor(name);
        return CMap(theta.data() + t.offset, t.rows, t.cols);
    };
    auto g = [&](const std::string& name) {
        const auto& t = tensor(name);
        return Map(grad.data() + t.offset, t.rows, t.cols);
    };

    // Head.
    g("head.w").col(0) += d_output * cache.context;
    g("head.b")(0, 0) += d_output;
    Eigen::VectorXd d_context = d_output * p("head.w").col(0);
    if (cache.context_mask.size() > 0) d_context = d_context.cwiseProduct(cache.context_mask);

    // Attention: C = H α, α = softmax(vᵀ tanh(W_k H + W_q q + b)).
    const auto& top = cache.layers.back();
    Eigen::MatrixXd d_top = d_context * cache.alpha.transpose();  // 2h × T
    const Eigen::VectorXd d_alpha = top.output.transpose() * d_context;
    const double weighted = cache.alpha.dot(d_alpha);
    const Eigen::VectorXd d_scores = cache.alpha.cwiseProduct((d_alpha.array() - weighted).matrix());

    const auto v = p("att.v");
    g("att.v").col(0) += cache.score_hidden * d_scores;
    const Eigen::MatrixXd d_pre =
        ((v.col(0) * d_scores.transpose()).array() * (1.0 - cache.score_hidden.array().square())).matrix();
    g("att.Wk") += d_pre * top.output.transpose();
    const Eigen::VectorXd d_pre_sum = d_pre.rowwise().sum();
    g("att.Wq") += d_pre_sum * cache.query.transpose();
    g("att.b").col(0) += d_pre_sum;
    d_top += p("att.Wk").transpose() * d_pre;
    const Eigen::VectorXd d_query = p("att.Wq").transpose() * d_pre_sum;

    // Through the dropout mask of the top layer output (none for the top layer).
    Eigen::MatrixXd d_out = d_top;
    for (int l = hp_.num_layers - 1; l >= 0; --l) {
        const auto& layer = cache.layers[static_cast<std::size_t>(l)];
        if (layer.mask.size() > 0) d_out = d_out.cwiseProduct(layer.mask);
        Eigen::MatrixXd d_hidden_f = d_out.topRows(h);
        Eigen::MatrixXd d_hidden_b = d_out.bottomRows(h);
        if (l == hp_.num_layers - 1) {
            d_hidden_f.col(T - 1) += d_query.head(h);
            d_hidden_b.col(0) += d_query.tail(h);
        }
        Eigen::MatrixXd d_input = Eigen::MatrixXd::Zero(layer.input.rows(), T);
        for (bool fwd : {true, false}) {
            const auto base = dir_name(l, fwd);
            const auto W = p(base + ".W");
            const auto U = p(base + ".U");
            auto gW = g(base + ".W");
            auto gU = g(base + ".U");
            auto gb = g(base + ".b");
            const auto& d = fwd ? layer.fwd : layer.bwd;
            const Eigen::MatrixXd& d_hidden = fwd ? d_hidden_f : d_hidden_b;
            Eigen::MatrixXd dz_all(4 * h, T);
            Eigen::VectorXd dh_next = Eigen::VectorXd::Zero(h);
            Eigen::VectorXd dc_next = Eigen::VectorXd::Zero(h);
            for (Eigen::Index s = T - 1; s >= 0; --s) {
                const Eigen::Index t = fwd ? s : T - 1 - s;
                const Eigen::Index prev = fwd ? t - 1 : t + 1;
                const bool has_prev = fwd ? t > 0 : t < T - 1;
                const auto z = d.gates.col(t);
                const auto ig = z.segment(0, h).array();
                const auto fg = z.segment(h, h).array();
                const auto gg = z.segment(2 * h, h).array();
                const auto og = z.segment(3 * h, h).array();
                const Eigen::ArrayXd tc = d.cell.col(t).array().tanh();
                const Eigen::ArrayXd dh = (d_hidden.col(t) + dh_next).array();
                const Eigen::ArrayXd dc = dc_next.array() + dh * og * (1.0 - tc.square());
                const Eigen::ArrayXd cprev =
                    has_prev ? Eigen::ArrayXd(d.cell.col(prev).array()) : Eigen::ArrayXd::Zero(h);
                auto dz = dz_all.col(t);
                dz.segment(0, h) = (dc * gg * ig * (1.0 - ig)).matrix();
                dz.segment(h, h) = (dc * cprev * fg * (1.0 - fg)).matrix();
                dz.segment(2 * h, h) = (dc * ig * (1.0 - gg.square())).matrix();
                dz.segment(3 * h, h) = (dh * tc * og * (1.0 - og)).matrix();
                if (has_prev) gU += dz * d.hidden.col(prev).transpose();
                dh_next = U.transpose() * dz;
                dc_next = (dc * fg).matrix();
            }
            gW += dz_all * layer.input.transpose();
            gb.col(0) += dz_all.rowwise().sum();
            d_input += W.transpose() * dz_all;
        }
        d_out = d_input;
    }
}

}  // namespace specdiff::forecast
