// search.hpp: random hyperparameter search over the forecaster.
#pragma once

#include "specdiff/forecaster.hpp"

#include <functional>
#include <limits>
#include <optional>
#include <random>
#include <string>
#include <vector>

namespace specdiff::forecast {

struct IntRange {
    int lo = 0;
    int hi = 0;
};

struct RealRange {
    double lo = 0.0;
    double hi = 0.0;
    bool log_scale = false;
};

struct SearchSpace {
    IntRange hidden_size{8, 128};
    IntRange sequence_length{8, 64};
    IntRange num_layers{1, 3};
    RealRange dropout{0.0, 0.5};
    RealRange learning_rate{1e-4, 1e-2, true};

    void validate() const;
};

using Sampler = std::function<Hyperparams(const SearchSpace&, std::mt19937_64&)>;

// Uniform integers, uniform or log-uniform reals.
Hyperparams random_sample(const SearchSpace& space, std::mt19937_64& rng);

struct TrialRecord {
    int trial = 0;
    Hyperparams hp;
    double val_rmse = std::numeric_limits<double>::infinity();
    int epochs = 0;
    std::string status;  // "ok", "diverged" or "rejected: <reason>"
};

struct SearchOptions {
    int trials = 25;
    TrainOptions train;  // train.seed is the search seed
    Sampler sampler;     // empty: random_sample
};

struct SearchResult {
    TrainedForecaster best;
    int best_trial = -1;
    std::vector<TrialRecord> log;
};

// Seed of trial t's sampler and of its training run.
std::uint64_t trial_sampler_seed(std::uint64_t seed, int trial);
std::uint64_t trial_train_seed(std::uint64_t seed, int trial);

SearchResult hyperparameter_search(const ZplTrace& trace, const SearchSpace& space,
                                   const SearchOptions& options);

}  // namespace specdiff::forecast
