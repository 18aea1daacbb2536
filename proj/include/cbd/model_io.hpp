#pragma once

#include <string>

#include "cbd/model.hpp"
#include "cbd/text.hpp"

namespace cbd {

// Model directory layout: manifest.json (architecture, shapes, hyperparams,
// checksums, provenance), one little-endian float32 row-major .bin file per
// named tensor, and vocab.txt. Round-trips are bit-exact.
void save_model(const ModelBundle& bundle, const Vocabulary& vocab, const std::string& dir);

struct LoadedModel {
    ModelBundle bundle;
    Vocabulary vocab;
};

LoadedModel load_model(const std::string& dir);

} // namespace cbd
