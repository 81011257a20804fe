#include "specdiff/search.hpp"

#include "specdiff/error.hpp"
#include "specdiff/seeding.hpp"

#include <cmath>

namespace specdiff::forecast {

void SearchSpace::validate() const {
    auto int_ok = [](IntRange r, int min) { return r.lo >= min && r.hi >= r.lo; };
    require(int_ok(hidden_size, 1), ErrorCode::InvalidArgument, "search space: hidden_size range");
    require(int_ok(sequence_length, 2), ErrorCode::InvalidArgument, "search space: sequence_length range (L >= 2)");
    require(int_ok(num_layers, 1), ErrorCode::InvalidArgument, "search space: num_layers range");
    require(dropout.lo >= 0.0 && dropout.hi >= dropout.lo && dropout.hi < 1.0, ErrorCode::InvalidArgument,
            "search space: dropout must lie in [0, 1)");
    require(learning_rate.lo > 0.0 && learning_rate.hi >= learning_rate.lo, ErrorCode::InvalidArgument,
            "search space: learning_rate must be > 0");
}

Hyperparams random_sample(const SearchSpace& space, std::mt19937_64& rng) {
    auto pick_int = [&](IntRange r) { return std::uniform_int_distribution<int>(r.lo, r.hi)(rng); };
    auto pick_real = [&](RealRange r) {
        if (r.lo == r.hi) return r.lo;
        if (r.log_scale) {
            return std::exp(std::uniform_real_distribution<double>(std::log(r.lo), std::log(r.hi))(rng));
        }
        return std::uniform_real_distribution<double>(r.lo, r.hi)(rng);
    };
    Hyperparams hp;
    hp.hidden_size = pick_int(space.hidden_size);
    hp.sequence_length = pick_int(space.sequence_length);
    hp.num_layers = pick_int(space.num_layers);
    hp.dropout = pick_real(space.dropout);
    hp.learning_rate = pick_real(space.learning_rate);
    return hp;
}

std::uint64_t trial_sampler_seed(std::uint64_t seed, int trial) {
    return derive_seed(seed, 2 * static_cast<std::uint64_t>(trial));
}

std::uint64_t trial_train_seed(std::uint64_t seed, int trial) {
    return derive_seed(seed, 2 * static_cast<std::uint64_t>(trial) + 1);
}

SearchResult hyperparameter_search(const ZplTrace& trace, const SearchSpace& space,
                                   const SearchOptions& options) {
    require(options.trials >= 1, ErrorCode::InvalidArgument, "search needs at least one trial");
    space.validate();
    const Sampler sampler = options.sampler ? options.sampler : Sampler(random_sample);

    SearchResult result;
    for (int t = 0; t < options.trials; ++t) {
        std::mt19937_64 rng(trial_sampler_seed(options.train.seed, t));
        TrialRecord rec;
        rec.trial = t;
        rec.hp = sampler(space, rng);
        TrainOptions topt = options.train;
        topt.seed = trial_train_seed(options.train.seed, t);
        try {
            auto model = train(trace, rec.hp, topt);
            rec.val_rmse = model.meta.best_val_rmse;
            rec.epochs = model.meta.epochs_run;
            rec.status = "ok";
            if (result.best_trial < 0 || rec.val_rmse < result.best.meta.best_val_rmse) {
                result.best = std::move(model);
                result.best_trial = t;
            }
        } catch (const Error& e) {
            if (e.code() == ErrorCode::Diverged) {
                rec.status = "diverged";
            } else if (e.code() == ErrorCode::DegenerateData) {
                throw;
            } else {
                rec.status = std::string("rejected: ") + e.what();
            }
        }
        result.log.push_back(std::move(rec));
    }
    require(result.best_trial >= 0, ErrorCode::Diverged, "all search trials diverged or were rejected");
    return result;
}

}  // namespace specdiff::forecast
