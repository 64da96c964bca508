// Copyright (C) 2026 The lunar-lab Authors
// SPDX-License-Identifier: Apache-2.0
//

#include "lunar/cost.hpp"

#include <cmath>

#include "lunar/errors.hpp"

namespace lunar {

void CostInputs::validate() const {
    const std::pair<const char*, double> fields[] = {
        {"n_model", n_model},     {"layers", layers},       {"modules_per_layer", modules_per_layer},
        {"lora_rank", lora_rank}, {"module_dim", module_dim}, {"n_epoch", n_epoch},
    };
    for (const auto& [name, v] : fields) {
        if (!std::isfinite(v) || v < 1.0) {
            throw ConfigError(std::string("cost: ") + name + " must be >= 1");
        }
    }
}

CostReport estimate(const CostInputs& in) {
    in.validate();
    CostReport r;
    r.n_baseline = in.layers * in.modules_per_layer * in.lora_rank * 2.0 * in.module_dim;
    r.n_lunar = in.lora_rank * 2.0 * in.module_dim;
    r.c_baseline = (2.0 * in.n_model + 4.0 * r.n_baseline) * in.n_epoch;
    r.c_lunar = 2.0 * in.n_model + 6.0 * r.n_lunar * in.n_epoch;
    r.ratio = r.c_baseline / r.c_lunar;
    return r;
}

CostInputs cost_preset(const std::string& name) {
    if (name == "llama2-7b") {
        return CostInputs{6.74e9, 32, 7, 8, 4096, 20};
    }
    if (name == "toy") {
        // The default desk model (vocab 321, d = 64, p = 256, four layers).
        return CostInputs{238272, 4, 7, 8, 64, 20};
    }
    throw ConfigError("cost: unknown preset '" + name + "' (expected llama2-7b or toy)");
}

std::vector<std::string> cost_preset_names() { return {"llama2-7b", "toy"}; }

nlohmann::json to_json(const CostInputs& in) {
    return {{"n_model", in.n_model},     {"layers", in.layers},       {"modules_per_layer", in.modules_per_layer},
            {"lora_rank", in.lora_rank}, {"module_dim", in.module_dim}, {"n_epoch", in.n_epoch}};
}

nlohmann::json to_json(const CostReport& r) {
    return {{"n_baseline", r.n_baseline},
            {"n_lunar", r.n_lunar},
            {"c_baseline", r.c_baseline},
            {"c_lunar", r.c_lunar},
            {"ratio", r.ratio}};
}

}  // namespace lunar
