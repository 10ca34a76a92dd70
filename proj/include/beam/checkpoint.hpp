#pragma once

#include <iosfwd>
#include <string>

#include "beam/rbm.hpp"
#include "beam/training.hpp"

namespace beam {

// Structured text, versioned ("beam-checkpoint v1"), every number written in
// shortest exact decimal so save -> load -> save reproduces identical bytes.
// The full checkpoint carries the model, Adam moments, the particle
// population with each particle's RNG stream states, the critic cache, and
// the shuffle stream, which is everything a resumed run needs to continue
// bit-for-bit.

void save_model(std::ostream& out, const RbmModel& m);
RbmModel load_model(std::istream& in);

void save_checkpoint(const std::string& path, const TrainState& state);
TrainState load_checkpoint(const std::string& path);

}  // namespace beam
