#pragma once

#include <string>

#include <json.hpp>

#include "regnn/model.hpp"

namespace regnn {

// Binary checkpoint: magic "REGNN1", a length-prefixed JSON header (param
// names and shapes, config echo, seed, vocab and label lists), then the
// tensors as little-endian float32 in header order.
struct Checkpoint {
    ParamSet<float> params;
    nlohmann::json header;
};

void save_checkpoint(const std::string& path, const Checkpoint& ckpt);
Checkpoint load_checkpoint(const std::string& path);

}  // namespace regnn
