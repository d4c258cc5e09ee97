#ifndef CSC_CHECKPOINT_HPP
#define CSC_CHECKPOINT_HPP

#include <string>

#include "csc/model.hpp"

namespace csc {

// Self-describing JSON checkpoint: format version, the model config, and
// every tensor by name. save/load round-trip bit-exactly (doubles are
// serialized with shortest round-trip formatting).
void save_checkpoint(const ModelParams& params, const std::string& path);
ModelParams load_checkpoint(const std::string& path);

std::string model_config_to_json(const ModelConfig& cfg);

}  // namespace csc

#endif
