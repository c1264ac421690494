#pragma once

#include <string>

#include <json.hpp>

#include "robgan/contamination.hpp"
#include "robgan/experiment.hpp"
#include "robgan/generator.hpp"
#include "robgan/mlp.hpp"
#include "robgan/trainer.hpp"

namespace robgan {

using Json = nlohmann::ordered_json;

// Parsing throws std::invalid_argument with the offending key on schema errors.

DatasetSpec dataset_spec_from_json(const Json& j);
Json to_json(const DatasetSpec& spec);

TrainOverrides train_overrides_from_json(const Json& j);
Json to_json(const TrainOverrides& o);
Json to_json(const TrainConfig& cfg);

EstimatorSpec estimator_from_json(const Json& j);
Json to_json(const EstimatorSpec& e);

ExperimentConfig experiment_config_from_json(const Json& j);
Json to_json(const ExperimentConfig& cfg);

/// Layer dims, activations and row-major parameters.
Json to_json(const Mlp& net);
Json to_json(const Generator& g);
/// theta_hat, sigma_hat, final objective and clamp count.
Json to_json(const Estimate& est);

Json read_json_file(const std::string& path);

/// "robgan <version> <compiler>", identical for every output of one build.
std::string build_fingerprint();

} // namespace robgan
