// serialize.hpp: JSON forms of checkpoints, configs and analysis results.
#pragma once

#include "specdiff/eval.hpp"
#include "specdiff/forecaster.hpp"
#include "specdiff/g2.hpp"
#include "specdiff/noise.hpp"
#include "specdiff/replica.hpp"
#include "specdiff/search.hpp"
#include "specdiff/simulator.hpp"

#include <json.hpp>

#include <filesystem>

namespace specdiff::serialize {

using nlohmann::json;

inline constexpr int kCheckpointVersion = 1;
inline constexpr const char* kCheckpointFormat = "specdiff-forecaster";

json to_json(const forecast::Hyperparams& hp);
forecast::Hyperparams hyperparams_from_json(const json& j);

json to_json(const forecast::TrainedForecaster& model);
forecast::TrainedForecaster forecaster_from_json(const json& j);
void save_checkpoint(const forecast::TrainedForecaster& model, const std::filesystem::path& path);
forecast::TrainedForecaster load_checkpoint(const std::filesystem::path& path);

json to_json(const forecast::ForecastResult& result);
json to_json(const std::vector<forecast::TrialRecord>& log);
json to_json(const g2::G2Fit& fit);
json to_json(const noise::PowerLawFit& fit);
json to_json(const noise::SegmentedPsdFit& fit, const noise::PsdResult& psd);
json to_json(const Histogram& h);
json to_json(const replica::OverlapEvolution& evolution);
json to_json(const std::vector<eval::MismatchRow>& rows);
json to_json(const eval::EvalReport& report);
json to_json(const sim::FluctuatorBathConfig& cfg);
json to_json(const sim::FrameRenderConfig& cfg);

// Overwrites the fields present in j.
void apply(const json& j, sim::FluctuatorBathConfig& cfg);
void apply(const json& j, sim::FrameRenderConfig& cfg);

// Two-space indented dump terminated by a newline.
std::string dump(const json& j);

}  // namespace specdiff::serialize
