// Copyright (C) 2026 The lunar-lab Authors
// SPDX-License-Identifier: Apache-2.0
//

// Analytical training-cost model: adapter parameter counts and per-token
// FLOPs of fine-tuning every module versus re-solving one down-projection.
#pragma once

#include <string>
#include <vector>

#include <json.hpp>

namespace lunar {

struct CostInputs {
    double n_model = 0.0;       // total parameters of the base model
    double layers = 0.0;        // L
    double modules_per_layer = 0.0;  // m
    double lora_rank = 0.0;     // r
    double module_dim = 0.0;    // d
    double n_epoch = 0.0;

    // Throws ConfigError naming the first field below 1.
    void validate() const;
};

struct CostReport {
    double n_baseline = 0.0;
    double n_lunar = 0.0;
    double c_baseline = 0.0;
    double c_lunar = 0.0;
    double ratio = 0.0;
};

// n_baseline = L m r 2d, n_lunar = r 2d,
// c_baseline = (2 N + 4 n_baseline) n_epoch, c_lunar = 2 N + 6 n_lunar n_epoch.
CostReport estimate(const CostInputs& in);

// "llama2-7b" and "toy". Throws ConfigError for other names.
CostInputs cost_preset(const std::string& name);
std::vector<std::string> cost_preset_names();

nlohmann::json to_json(const CostInputs& in);
nlohmann::json to_json(const CostReport& r);

}  // namespace lunar
