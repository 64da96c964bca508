// Copyright (C) 2026 The lunar-lab Authors
// SPDX-License-Identifier: Apache-2.0
//

#include <algorithm>
#include <cmath>

#include "lunar/errors.hpp"
#include "lunar/model.hpp"

namespace lunar {

void quantize_tensor(std::span<float> values, int bits) {
    if (bits != 4 && bits != 8) {
        throw ConfigError("quantize: bits must be 4 or 8, got " + std::to_string(bits));
    }
    float max_abs = 0.0f;
    for (float v : values) {
        max_abs = std::max(max_abs, std::fabs(v));
    }
    if (max_abs == 0.0f) {
        return;
    }
    const float levels = static_cast<float>((1 << (bits - 1)) - 1);
    const float scale = max_abs / levels;
    for (float& v : values) {
        const float q = std::clamp(std::nearbyint(v / scale), -levels, levels);
        v = q * scale;
    }
}

ModelCheckpoint quantize(const ModelCheckpoint& m, const QuantSpec& spec) {
    ModelCheckpoint out = m;
    for (auto& t : tensors(out)) {
        quantize_tensor(t.values, spec.bits);
    }
    return out;
}

}  // namespace lunar
